//! Experiment drivers. Each writes its CSV/JSON artifacts into the output
//! directory and returns the list of files it produced.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use pairquench::export::fmt_num;
use pairquench::quench::{field_grid, time_grid};
use pairquench::spectrum::{detect_avoided_crossings, scan_and_track, EnergyWindow};
use pairquench::three_site::{constants, effective_hamiltonian, exact_pair_transfer};
use pairquench::{band_scan, Boundary, Branch, ModelParams, QuenchSetup, WavePacketSpec};
use serde::Serialize;
use serde_json::json;

use crate::config::{Experiment, ModelConfig, PacketConfig, RunConfig};

/// Settling criterion for the transfer series: window length and tolerance.
const PLATEAU_WINDOW: f64 = 100.0;
const PLATEAU_TOLERANCE: f64 = 0.02;

pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Artifacts {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file =
            File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn model_params(m: &ModelConfig, field: f64) -> ModelParams {
    ModelParams {
        sites: m.sites,
        hopping: m.hopping,
        onsite: m.onsite,
        nearest: m.nearest,
        field,
        boundary: Boundary::Open,
    }
}

fn packet_spec(p: &PacketConfig) -> WavePacketSpec {
    WavePacketSpec {
        k0: p.k0,
        alpha: p.alpha,
        center: p.center,
        branch: p.branch,
    }
}

/// `cfg` has passed validation, so the sections the experiment needs exist.
pub fn run(experiment: Experiment, cfg: &RunConfig, out: &Path) -> Result<Artifacts> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut art = Artifacts {
        dir: out.to_path_buf(),
        files: Vec::new(),
    };
    let model = cfg.model.as_ref().expect("validated");
    match experiment {
        Experiment::ThreeSite => three_site(model, cfg, &mut art)?,
        Experiment::Band => band(model, &mut art)?,
        Experiment::Spectrum => spectrum(model, cfg, &mut art)?,
        Experiment::Quench => quench(model, cfg, &mut art)?,
        Experiment::Sweep => sweep(model, cfg, &mut art)?,
    }
    Ok(art)
}

fn three_site(model: &ModelConfig, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let ts = cfg.three_site.as_ref().expect("validated");
    let params = model_params(model, ts.field);
    params.validate()?;
    let times = time_grid(ts.t_max, ts.dt)?;
    let effective = effective_hamiltonian(ts.field, model.onsite, model.nearest, model.hopping)?;
    let exact = exact_pair_transfer(&params, &times)?;
    let mut w = art.create("three_site.csv")?;
    writeln!(w, "t,analytic,exact")?;
    for (t, p) in times.iter().zip(&exact) {
        writeln!(
            w,
            "{},{},{}",
            fmt_num(*t),
            fmt_num(effective.transfer(*t)),
            fmt_num(*p)
        )?;
    }
    w.flush()?;
    drop(w);
    let mut summary = json!({
        "effective": {
            "unpaired": effective.unpaired,
            "paired": effective.paired,
            "coupling": effective.coupling,
        },
        "exact_peak": exact.iter().copied().fold(0.0, f64::max),
    });
    if model.onsite == model.nearest {
        let c = constants(ts.field, model.onsite, model.hopping)?;
        summary["constants"] = json!({
            "c0": c.c0,
            "c1": c.c1,
            "omega": c.omega,
            "theta": c.theta,
            "amplitude": c.amplitude(),
            "period": c.period(),
        });
    }
    art.json("three_site.json", &summary)
}

fn band(model: &ModelConfig, art: &mut Artifacts) -> Result<()> {
    let band = band_scan(model.hopping, model.onsite, model.sites)?;
    let mut w = art.create("band.csv")?;
    band.write_csv(&mut w)?;
    w.flush()?;
    drop(w);
    let summary = json!({
        "lower_complete": band.is_complete(Branch::Lower),
        "upper_complete": band.is_complete(Branch::Upper),
        "sectors": band.sectors.len(),
        "bound_states": band.states().count(),
        "min_continuum_gap": band.min_continuum_gap(),
    });
    art.json("band.json", &summary)
}

fn spectrum(model: &ModelConfig, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let sc = cfg.spectrum.as_ref().expect("validated");
    let params = model_params(model, 0.0);
    params.validate()?;
    let fields = field_grid(sc.f_start, sc.f_stop, sc.f_step)?;
    let window = match (sc.window_center, sc.window_width) {
        (Some(c), Some(w)) => Some(EnergyWindow::centered(c, w)?),
        _ => None,
    };
    let chunk = rayon::current_num_threads();
    let (slices, tracking) = scan_and_track(&fields, &params, window, chunk)?;
    let mut w = art.create("spectrum.csv")?;
    tracking.write_csv(&slices, sc.threshold, &mut w)?;
    w.flush()?;
    drop(w);
    let report = detect_avoided_crossings(&slices, &tracking, sc.threshold);
    let slopes: Vec<_> = tracking
        .levels
        .iter()
        .filter_map(|l| {
            let slope = l.slope(&slices)?;
            let rbar: Vec<f64> = (0..slices.len())
                .filter_map(|s| l.correlation(&slices, s))
                .collect();
            let mean = rbar.iter().sum::<f64>() / rbar.len() as f64;
            Some(json!({ "level_id": l.id, "slope": slope, "mean_rbar": mean }))
        })
        .collect();
    art.json(
        "crossings.json",
        &json!({
            "avoided": report.avoided,
            "true_crossings": report.crossings,
            "flagged_segments": report.flagged,
            "slopes": slopes,
        }),
    )
}

fn quench(model: &ModelConfig, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let q = cfg.quench.as_ref().expect("validated");
    let packet = cfg.packet.as_ref().expect("validated");
    let setup = QuenchSetup::new(model_params(model, 0.0), packet_spec(packet))?;
    let times = time_grid(q.t_max, q.dt)?;
    let traj = setup.trajectory(q.field, &times, q.backend)?;
    let mut w = art.create("quench.csv")?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    drop(w);
    let half = 0.5 * q.t_max;
    let summary = json!({
        "field": q.field,
        "transfer_min": traj.transfer.iter().copied().fold(f64::INFINITY, f64::min),
        "transfer_final": traj.transfer.last(),
        "transfer_mean_second_half": traj.mean_over(&traj.transfer, half, q.t_max),
        "energy_mean": traj.mean_over(&traj.energy, 0.0, q.t_max),
        "energy_period": traj.energy_period(),
        "distance_initial": traj.distance.first(),
        "distance_final": traj.distance.last(),
        "relaxation_time": traj.relaxation_time(PLATEAU_WINDOW, PLATEAU_TOLERANCE),
    });
    art.json("quench.json", &summary)
}

fn sweep(model: &ModelConfig, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let s = cfg.sweep.as_ref().expect("validated");
    let packet = cfg.packet.as_ref().expect("validated");
    let setup = QuenchSetup::new(model_params(model, 0.0), packet_spec(packet))?;
    let fields = field_grid(s.f_start, s.f_stop, s.f_step)?;
    let result = pairquench::quench::sweep_transfer(&setup, &fields, s.t_final)?;
    let mut w = art.create("sweep.csv")?;
    result.write_csv(&mut w)?;
    w.flush()?;
    drop(w);
    let failures: Vec<_> = result
        .points
        .iter()
        .filter_map(|p| {
            p.transfer
                .as_ref()
                .err()
                .map(|e| json!({ "F": p.field, "error": e.to_string() }))
        })
        .collect();
    let values = result.values().unwrap_or_default();
    let spread = values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().copied().fold(f64::INFINITY, f64::min);
    art.json(
        "sweep.json",
        &json!({
            "t_final": result.t_final,
            "period": result.period,
            "spread": if values.is_empty() { None } else { Some(spread) },
            "failures": failures,
        }),
    )?;
    if !failures.is_empty() {
        anyhow::bail!("{} sweep point(s) failed; see sweep.json", failures.len());
    }
    Ok(())
}
