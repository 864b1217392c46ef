//! Gnuplot scripts for the CSV artifacts. Plotting runs out of process.

use std::path::Path;

use anyhow::Result;

use crate::config::Experiment;

fn script(experiment: Experiment) -> (&'static str, String) {
    let head = "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n";
    let body = match experiment {
        Experiment::ThreeSite => "set output 'three_site.png'\nset xlabel 't'\nset ylabel 'P(t)'\n\
             plot 'three_site.csv' using 1:2 with lines, '' using 1:3 with lines\n"
            .to_string(),
        Experiment::Band => "set output 'band.png'\nset xlabel 'K'\nset ylabel 'energy'\n\
             plot 'band.csv' using 1:(stringcolumn(2) eq 'upper' ? $4 : 1/0) with points title 'upper', \
             '' using 1:(stringcolumn(2) eq 'lower' ? $4 : 1/0) with points title 'lower'\n"
            .to_string(),
        Experiment::Spectrum => "set output 'spectrum.png'\nset xlabel 'F'\nset ylabel 'energy'\n\
             plot 'spectrum.csv' using 1:(stringcolumn(5) eq 'correlated' ? $3 : 1/0) with points pt 7 ps 0.3 title 'correlated', \
             '' using 1:(stringcolumn(5) eq 'uncorrelated' ? $3 : 1/0) with points pt 7 ps 0.1 title 'uncorrelated'\n"
            .to_string(),
        Experiment::Quench => "set output 'quench.png'\nset multiplot layout 3,1\nset xlabel 't'\n\
             plot 'quench.csv' using 1:2 with lines\nplot 'quench.csv' using 1:3 with lines\n\
             plot 'quench.csv' using 1:4 with lines\nunset multiplot\n"
            .to_string(),
        Experiment::Sweep => "set output 'sweep.png'\nset xlabel 'F'\nset ylabel 'transfer'\n\
             plot 'sweep.csv' using 1:2 with linespoints\n"
            .to_string(),
    };
    let name = match experiment {
        Experiment::ThreeSite => "three_site.gp",
        Experiment::Band => "band.gp",
        Experiment::Spectrum => "spectrum.gp",
        Experiment::Quench => "quench.gp",
        Experiment::Sweep => "sweep.gp",
    };
    (name, format!("{head}{body}"))
}

pub fn emit(experiment: Experiment, dir: &Path) -> Result<String> {
    let (name, text) = script(experiment);
    std::fs::write(dir.join(name), text)?;
    Ok(name.to_string())
}
