//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. `ACCEPTANCE_ONLY=1,3` restricts the run.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use pairquench::bound_band::{
    band_scan, bound_state_realspace, build_heq, momentum_grid, solve_bound_states, Branch,
};
use pairquench::hubbard::{
    build_h0, build_hamiltonian, expectation, pair_distribution, Boundary, ModelParams,
    TwoBosonBasis,
};
use pairquench::linalg::{StateVector, SymmetricEigen};
use pairquench::period::estimate_period;
use pairquench::propagate::{ChebyshevPropagator, SpectralPropagator};
use pairquench::quench::{field_grid, reference_model, sweep_transfer, time_grid, Backend};
use pairquench::three_site::{
    constants, exact_pair_transfer, three_site_params, transfer_probability,
};
use pairquench::{QuenchSetup, WavePacketSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn three_site() -> Outcome {
    let c = constants(-3.0, -6.0, 0.4).unwrap();
    let expected_period = 3.0 * 6.0 * PI / (76f64.sqrt() * 0.16);
    let dt = 0.05;
    let times: Vec<f64> = (0..=4000).map(|i| i as f64 * dt).collect();
    let exact = exact_pair_transfer(&three_site_params(-3.0), &times).unwrap();
    let amplitude = exact.iter().copied().fold(0.0, f64::max);
    let period = estimate_period(&exact, dt).map_or(f64::NAN, |p| p.period);
    let away = constants(-1.0, -6.0, 0.4).unwrap();
    let analytic_peak = times
        .iter()
        .map(|&t| transfer_probability(t, &away))
        .fold(0.0, f64::max);
    let exact_away = exact_pair_transfer(&three_site_params(-1.0), &times).unwrap();
    let exact_away_peak = exact_away.iter().copied().fold(0.0, f64::max);
    let pass = within(amplitude, 18.0 / 19.0, 0.1)
        && within(period, expected_period, 0.1)
        && analytic_peak < 0.01
        && within(c.period(), expected_period, 1e-12);
    outcome(
        pass,
        format!(
            "F=-3 amplitude {amplitude:.4} (target {:.4}), period {period:.3} (target {expected_period:.3}); \
             F=-1 effective-model peak {analytic_peak:.5} (< 0.01), exact peak {exact_away_peak:.4} (informational)",
            18.0 / 19.0
        ),
    )
}

fn bound_band_oracle() -> Outcome {
    let (kappa, onsite, sites) = (1.0, -6.24, 111);
    let grid = momentum_grid(sites).unwrap();
    // 20 momenta spread evenly over the ring grid
    let picks: Vec<f64> = (0..20)
        .map(|i| grid[((grid.len() - 1) as f64 * i as f64 / 19.0).round() as usize])
        .collect();
    let mut worst_energy: f64 = 0.0;
    let mut count_mismatch = Vec::new();
    for &k in &picks {
        let states = solve_bound_states(k, kappa, onsite).unwrap();
        let j = (2.0 * kappa * (k / 2.0).cos()).abs();
        let eig = SymmetricEigen::dense(&build_heq(k, kappa, onsite, 400).unwrap()).unwrap();
        let isolated: Vec<f64> = eig
            .values
            .into_iter()
            .filter(|e| e.abs() > 2.0 * j + 1e-6)
            .collect();
        if isolated.len() != states.len() {
            count_mismatch.push(k);
            continue;
        }
        for (s, e) in states.iter().zip(&isolated) {
            worst_energy = worst_energy.max((s.energy - e).abs());
        }
    }
    let ring = ModelParams {
        sites,
        hopping: kappa,
        onsite,
        nearest: onsite,
        field: 0.0,
        boundary: Boundary::Ring,
    };
    let basis = TwoBosonBasis::new(sites).unwrap();
    let h0 = build_h0(&ring, &basis).unwrap();
    let mut worst_residual: f64 = 0.0;
    let mut failing = Vec::new();
    for &k in &picks {
        for s in solve_bound_states(k, kappa, onsite).unwrap() {
            let psi = bound_state_realspace(&s, sites).unwrap();
            let hpsi = h0.apply(psi.amplitudes());
            let residual = hpsi
                .iter()
                .zip(psi.amplitudes())
                .map(|(a, b)| (a - Complex64::from(s.energy) * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst_residual = worst_residual.max(residual);
            if residual >= 1e-6 {
                failing.push(format!(
                    "K={k:.4} beta={:.3} residual {residual:.2e}",
                    s.beta
                ));
            }
        }
    }
    let pass = count_mismatch.is_empty() && worst_energy < 1e-8 && failing.is_empty();
    let mut detail = format!(
        "max |de| {worst_energy:.2e} (< 1e-8) over 20 K; max ring residual {worst_residual:.2e} (< 1e-6)"
    );
    if !count_mismatch.is_empty() {
        detail += &format!("; bound-state count differs at K = {count_mismatch:?}");
    }
    if !failing.is_empty() {
        detail += &format!("; failing: {}", failing.join(", "));
    }
    outcome(pass, detail)
}

fn completeness() -> Outcome {
    let strong = band_scan(1.0, -6.24, 111).unwrap();
    let weak = band_scan(1.0, -5.0, 111).unwrap();
    let strong_ok = strong.is_complete(Branch::Lower) && strong.is_complete(Branch::Upper);
    let weak_incomplete = !(weak.is_complete(Branch::Lower) && weak.is_complete(Branch::Upper));
    outcome(
        strong_ok && weak_incomplete,
        format!(
            "|U/kappa|=6.24 both branches complete: {strong_ok}; |U/kappa|=5 some branch incomplete: {weak_incomplete}"
        ),
    )
}

fn reference_setup() -> QuenchSetup {
    QuenchSetup::new(reference_model(), WavePacketSpec::default()).unwrap()
}

fn bloch_quench(setup: &QuenchSetup) -> Outcome {
    let times = time_grid(800.0, 1.0).unwrap();
    let traj = setup
        .trajectory(-0.097120, &times, Backend::Chebyshev)
        .unwrap();
    let (t_min, at) =
        traj.transfer
            .iter()
            .zip(&traj.times)
            .fold(
                (f64::INFINITY, 0.0),
                |acc, (&v, &t)| if v < acc.0 { (v, t) } else { acc },
            );
    let late = traj.mean_over(&traj.transfer, 400.0, 800.0).unwrap();
    let period = traj.energy_period().map_or(f64::NAN, |p| p.period);
    let e_mean = traj.mean_over(&traj.energy, 0.0, 800.0).unwrap();
    let norm_dev = traj
        .norm
        .iter()
        .map(|n| (n - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = t_min >= 0.88
        && (0.90..=0.96).contains(&late)
        && (period - 64.7).abs() <= 2.0
        && (e_mean + 6.24).abs() <= 0.3;
    outcome(
        pass,
        format!(
            "min T {t_min:.4} at t={at} (>= 0.88); mean T[400,800] {late:.4} (0.90..0.96); \
             E period {period:.2} (64.7 +- 2); E mean {e_mean:.3} (-6.24 +- 0.3); max |norm-1| {norm_dev:.1e}"
        ),
    )
}

fn decay_quench(setup: &QuenchSetup) -> Outcome {
    let times = time_grid(800.0, 1.0).unwrap();
    let traj = setup
        .trajectory(-0.097815, &times, Backend::Chebyshev)
        .unwrap();
    let t_end = *traj.transfer.last().unwrap();
    let (r0, r_end) = (traj.distance[0], *traj.distance.last().unwrap());
    let e_late = traj.mean_over(&traj.energy, 600.0, 800.0).unwrap();
    let pass = t_end < 0.35 && r_end > 5.0 * r0 && e_late > -2.0;
    outcome(
        pass,
        format!("T(800) {t_end:.4} (< 0.35); rbar(800) {r_end:.2} vs 5 rbar(0) {:.2}; E mean[600,800] {e_late:.3} (> -2)", 5.0 * r0),
    )
}

fn field_period(setup: &QuenchSetup) -> Outcome {
    let fields = field_grid(-0.0995, -0.0950, 7.5e-5).unwrap();
    let sweep = sweep_transfer(setup, &fields, 800.0).unwrap();
    let Some(values) = sweep.values() else {
        return outcome(false, "some sweep points failed".into());
    };
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let period = sweep.period.map_or(f64::NAN, |p| p.period);
    let pass = (period - 0.0015).abs() <= 0.0003 && hi - lo > 0.4;
    outcome(
        pass,
        format!(
            "{} points; period {period:.5} (0.0015 +- 0.0003); spread {:.3} (> 0.4)",
            fields.len(),
            hi - lo
        ),
    )
}

fn property_suite() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // unitarity and energy conservation over a long run on a mid-size chain
    let p = ModelParams {
        sites: 41,
        ..reference_model()
    };
    let basis = TwoBosonBasis::new(p.sites).unwrap();
    let h = build_hamiltonian(&p, &basis).unwrap();
    let packet = WavePacketSpec {
        center: 20.0,
        ..WavePacketSpec::default()
    };
    let setup = QuenchSetup::new(p, packet).unwrap();
    let psi0 = setup.psi0.clone();
    let e0 = expectation(&h, &psi0).unwrap();
    let prop = ChebyshevPropagator::new(&h);
    let mut amps = psi0.amplitudes().to_vec();
    let (mut norm_dev, mut energy_dev): (f64, f64) = (0.0, 0.0);
    for _ in 0..80 {
        prop.step(&mut amps, 10.0).unwrap();
        let psi = StateVector::new(amps.clone());
        norm_dev = norm_dev.max((psi.norm() - 1.0).abs());
        let e = pairquench::hubbard::expectation(&h, &psi.clone().normalized().unwrap()).unwrap();
        energy_dev = energy_dev.max((e - e0).abs());
    }
    pass &= norm_dev < 1e-8 && energy_dev < 1e-8;
    notes.push(format!(
        "max |norm-1| {norm_dev:.1e}, max |dE| {energy_dev:.1e}"
    ));

    let spectral = SpectralPropagator::new(&h).unwrap();
    let reference = spectral.state_at(&spectral.coefficients(&psi0), 800.0);
    let diff = StateVector::new(amps).distance(&reference);
    pass &= diff < 1e-6;
    notes.push(format!("|dPsi(800)| {diff:.1e}"));

    let dist = pair_distribution(&basis, &reference).unwrap();
    let sum_dev = (dist.iter().sum::<f64>() - 1.0).abs();
    pass &= sum_dev < 1e-10;
    notes.push(format!("sum rule {sum_dev:.1e}"));

    let mut fock_dev: f64 = 0.0;
    for sites in 2..=6 {
        for boundary in [Boundary::Open, Boundary::Ring] {
            if boundary == Boundary::Ring && sites < 3 {
                continue;
            }
            let field = if boundary == Boundary::Open {
                -0.37
            } else {
                0.0
            };
            let p = ModelParams {
                sites,
                hopping: 0.8,
                onsite: -6.24,
                nearest: 1.3,
                field,
                boundary,
            };
            fock_dev = fock_dev.max(common::max_deviation(&p));
        }
    }
    pass &= fock_dev < 1e-14;
    notes.push(format!("Fock oracle max deviation {fock_dev:.1e}"));
    outcome(pass, notes.join("; "))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |n: usize| only.as_ref().is_none_or(|o| o.contains(&n));
    let needs_setup = [4, 5, 6].iter().any(|&n| wanted(n));
    let setup = needs_setup.then(reference_setup);
    let criteria: Vec<(usize, &str, Check)> = vec![
        (1, "three-site analytic check", Box::new(three_site)),
        (2, "bound-band oracle", Box::new(bound_band_oracle)),
        (3, "completeness threshold", Box::new(completeness)),
        (
            4,
            "Bloch-oscillation quench",
            Box::new(|| bloch_quench(setup.as_ref().unwrap())),
        ),
        (
            5,
            "decay quench",
            Box::new(|| decay_quench(setup.as_ref().unwrap())),
        ),
        (
            6,
            "field-period extraction",
            Box::new(|| field_period(setup.as_ref().unwrap())),
        ),
        (7, "property suite", Box::new(property_suite)),
    ];
    let mut failed = Vec::new();
    for (n, name, check) in criteria {
        if !wanted(n) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n} [{name}]: {verdict} ({:.1} s) {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria pass");
}
