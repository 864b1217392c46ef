//! Field quench of a bound-pair wave packet.
//!
//! The packet is assembled from ring bound states at `F = 0` and then evolved
//! under the open-chain Hamiltonian with the field switched on. The observables
//! are the weight left on the bound states, the mean pair separation and the
//! energy of the field-free Hamiltonian.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound_band::{band_scan, BandStructure, BoundProjector, Branch};
use crate::error::{invalid, Error, Result};
use crate::export::fmt_num;
use crate::hubbard::{build_h0, build_stark, quadratic_form, Boundary, ModelParams, TwoBosonBasis};
use crate::linalg::{StateVector, SymmetricEigen, SymmetricOperator};
use crate::period::{estimate_period, PeriodEstimate};
use crate::propagate::{check_norm, ChebyshevPropagator, SpectralPropagator};

pub use crate::propagate::Backend;

/// Gaussian packet over the centre momenta of one bound band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    /// Central momentum in radians.
    pub k0: f64,
    /// Momentum-space width.
    pub alpha: f64,
    /// Central site.
    pub center: f64,
    pub branch: Branch,
}

impl Default for WavePacketSpec {
    fn default() -> Self {
        Self {
            k0: -0.9 * std::f64::consts::PI,
            alpha: 0.2,
            center: 36.0,
            branch: Branch::Upper,
        }
    }
}

impl WavePacketSpec {
    pub fn validate(&self, sites: usize) -> Result<()> {
        if !(self.k0.abs() <= std::f64::consts::PI) {
            return Err(invalid(format!("k0 = {} outside [-pi, pi]", self.k0)));
        }
        if !(self.alpha > 0.0) {
            return Err(invalid(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.center >= 1.0 && self.center <= sites as f64) {
            return Err(invalid(format!(
                "packet centre {} outside 1..={sites}",
                self.center
            )));
        }
        Ok(())
    }

    fn weight(&self, k: f64) -> f64 {
        (-(k - self.k0).powi(2) / (2.0 * self.alpha * self.alpha)).exp()
    }
}

/// Relative Gaussian weight above which a band state must exist.
const REQUIRED_WEIGHT: f64 = 1e-8;

/// `Lambda sum_K exp(-(K-K0)^2/(2 alpha^2) - i N_A K) |psi_K>` on one branch.
pub fn prepare_wavepacket(
    spec: &WavePacketSpec,
    projector: &BoundProjector,
) -> Result<StateVector> {
    spec.validate(projector.sites)?;
    let momenta: Vec<f64> = crate::bound_band::momentum_grid(projector.sites)?;
    let peak = momenta.iter().map(|&k| spec.weight(k)).fold(0.0, f64::max);
    let dim = projector
        .entries()
        .first()
        .map(|e| e.state.dim())
        .ok_or_else(|| Error::IncompleteBand {
            k: spec.k0,
            branch: spec.branch.label(),
        })?;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for k in momenta {
        let w = spec.weight(k);
        match projector.find(k, spec.branch) {
            Some(entry) => {
                let c = Complex64::from_polar(w, -spec.center * k);
                for (a, v) in amps.iter_mut().zip(entry.state.amplitudes()) {
                    *a += c * v;
                }
            }
            None if w > REQUIRED_WEIGHT * peak => {
                return Err(Error::IncompleteBand {
                    k,
                    branch: spec.branch.label(),
                })
            }
            None => {}
        }
    }
    StateVector::new(amps).normalized()
}

/// `sum_{b,K} |<psi_K^b|psi>|^2` over every bound state in the projector.
pub fn transfer_rate(psi: &StateVector, projector: &BoundProjector) -> f64 {
    projector.weight(psi.amplitudes())
}

/// Operators and projector needed to read off the quench observables.
#[derive(Debug, Clone)]
pub struct Probes {
    pub basis: TwoBosonBasis,
    /// Field-free open-chain Hamiltonian.
    pub h0: SymmetricOperator,
    pub projector: BoundProjector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub transfer: f64,
    pub distance: f64,
    pub energy: f64,
    pub norm: f64,
}

impl Probes {
    pub fn measure(&self, amps: &[Complex64]) -> Sample {
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let distance = self
            .basis
            .pairs()
            .iter()
            .zip(amps)
            .map(|(&(i, j), a)| (j - i) as f64 * a.norm_sqr())
            .sum::<f64>()
            / norm2;
        Sample {
            transfer: self.projector.weight(amps),
            distance,
            energy: quadratic_form(&self.h0, amps).re / norm2,
            norm: norm2.sqrt(),
        }
    }
}

/// Sampled observables of one quench.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuenchTrajectory {
    pub times: Vec<f64>,
    pub transfer: Vec<f64>,
    pub distance: Vec<f64>,
    pub energy: Vec<f64>,
    pub norm: Vec<f64>,
}

impl QuenchTrajectory {
    fn push(&mut self, t: f64, s: Sample) {
        self.times.push(t);
        self.transfer.push(s.transfer);
        self.distance.push(s.distance);
        self.energy.push(s.energy);
        self.norm.push(s.norm);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Indices of samples with `t` in `[from, to]`.
    fn window(&self, from: f64, to: f64) -> impl Iterator<Item = usize> + '_ {
        self.times
            .iter()
            .enumerate()
            .filter(move |(_, &t)| t >= from - 1e-9 && t <= to + 1e-9)
            .map(|(i, _)| i)
    }

    pub fn mean_over(&self, series: &[f64], from: f64, to: f64) -> Option<f64> {
        let idx: Vec<usize> = self.window(from, to).collect();
        if idx.is_empty() {
            return None;
        }
        Some(idx.iter().map(|&i| series[i]).sum::<f64>() / idx.len() as f64)
    }

    /// Bloch period read off the energy series; requires uniform sampling.
    pub fn energy_period(&self) -> Option<PeriodEstimate> {
        let step = uniform_step(&self.times)?;
        estimate_period(&self.energy, step)
    }

    /// First time after which the transfer series stays flat: the standard
    /// deviation over the following `window` time units is below `tolerance`.
    pub fn relaxation_time(&self, window: f64, tolerance: f64) -> Option<f64> {
        let step = uniform_step(&self.times)?;
        let span = (window / step).round() as usize;
        if span == 0 || span >= self.len() {
            return None;
        }
        (0..self.len() - span).find_map(|start| {
            let slice = &self.transfer[start..=start + span];
            let mean = slice.iter().sum::<f64>() / slice.len() as f64;
            let var = slice.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / slice.len() as f64;
            (var.sqrt() < tolerance).then_some(self.times[start])
        })
    }

    /// CSV with columns `t,transfer,distance,energy,norm`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,transfer,distance,energy,norm")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_num(self.times[i]),
                fmt_num(self.transfer[i]),
                fmt_num(self.distance[i]),
                fmt_num(self.energy[i]),
                fmt_num(self.norm[i])
            )?;
        }
        Ok(())
    }
}

fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let step = times[1] - times[0];
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
    (uniform && step > 0.0).then_some(step)
}

/// Uniform grid `0, dt, 2 dt, ..., t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return Err(invalid("time grid needs dt > 0 and t_max >= 0"));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first().copied() != Some(0.0) {
        return Err(invalid("time samples must start at 0"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("time samples must be ascending"));
    }
    Ok(())
}

/// Evolves `psi0` under `h` and samples the observables at `times`.
pub fn evolve(
    h: &SymmetricOperator,
    psi0: &StateVector,
    times: &[f64],
    probes: &Probes,
    backend: Backend,
) -> Result<QuenchTrajectory> {
    check_times(times)?;
    if h.dim() != psi0.dim() || probes.h0.dim() != psi0.dim() {
        return Err(invalid("operator and state dimensions differ"));
    }
    let norm0 = psi0.norm();
    let mut traj = QuenchTrajectory::default();
    match backend {
        Backend::Chebyshev => {
            let prop = ChebyshevPropagator::new(h);
            let mut amps = psi0.amplitudes().to_vec();
            let mut now = 0.0;
            for &t in times {
                prop.step(&mut amps, t - now)?;
                now = t;
                let s = probes.measure(&amps);
                check_norm(&StateVector::new(amps.clone()), norm0)?;
                traj.push(t, s);
            }
        }
        Backend::Spectral => {
            let prop = SpectralPropagator::new(h)?;
            let coeffs = prop.coefficients(psi0);
            for &t in times {
                let psi = prop.state_at(&coeffs, t);
                traj.push(t, probes.measure(psi.amplitudes()));
            }
        }
    }
    Ok(traj)
}

/// Everything fixed across quenches of one model: basis, field-free
/// Hamiltonian, bound-state projector and the initial packet.
#[derive(Debug, Clone)]
pub struct QuenchSetup {
    pub model: ModelParams,
    pub packet: WavePacketSpec,
    pub band: BandStructure,
    pub probes: Probes,
    pub psi0: StateVector,
}

impl QuenchSetup {
    /// `model.field` is ignored; the quench field is supplied per run.
    pub fn new(model: ModelParams, packet: WavePacketSpec) -> Result<Self> {
        let model = ModelParams {
            field: 0.0,
            boundary: Boundary::Open,
            ..model
        };
        model.validate()?;
        let basis = TwoBosonBasis::new(model.sites)?;
        let h0 = build_h0(&model, &basis)?;
        let band = band_scan(model.hopping, model.onsite, model.sites)?;
        let projector = BoundProjector::new(&band)?;
        let psi0 = prepare_wavepacket(&packet, &projector)?;
        Ok(Self {
            model,
            packet,
            band,
            probes: Probes {
                basis,
                h0,
                projector,
            },
            psi0,
        })
    }

    /// Open-chain `H0 + F sum_j j n_j`.
    pub fn hamiltonian(&self, field: f64) -> Result<SymmetricOperator> {
        let stark = build_stark(&self.probes.basis, field, Boundary::Open)?;
        self.probes.h0.add_scaled(&stark, 1.0)
    }

    pub fn trajectory(
        &self,
        field: f64,
        times: &[f64],
        backend: Backend,
    ) -> Result<QuenchTrajectory> {
        evolve(
            &self.hamiltonian(field)?,
            &self.psi0,
            times,
            &self.probes,
            backend,
        )
    }

    /// State at `t` after the quench.
    pub fn state_at(&self, field: f64, t: f64, backend: Backend) -> Result<StateVector> {
        crate::propagate::propagate(&self.hamiltonian(field)?, &self.psi0, t, backend)
    }

    /// `T(t_f)` for one field value.
    pub fn transfer_at(&self, field: f64, t_final: f64) -> Result<f64> {
        let psi = self.state_at(field, t_final, Backend::Chebyshev)?;
        Ok(transfer_rate(&psi, &self.probes.projector))
    }

    /// Field on for `t <= release`, then free evolution under `H0`.
    pub fn release_trajectory(
        &self,
        field: f64,
        release: f64,
        t_end: f64,
        dt: f64,
    ) -> Result<QuenchTrajectory> {
        if release > t_end {
            return Err(invalid("release time after the end of the run"));
        }
        let times = time_grid(t_end, dt)?;
        let h = self.hamiltonian(field)?;
        let on = ChebyshevPropagator::new(&h);
        let off = ChebyshevPropagator::new(&self.probes.h0);
        let mut amps = self.psi0.amplitudes().to_vec();
        let mut now = 0.0;
        let mut traj = QuenchTrajectory::default();
        for &t in &times {
            if now < release && t > release {
                on.step(&mut amps, release - now)?;
                off.step(&mut amps, t - release)?;
            } else if t <= release {
                on.step(&mut amps, t - now)?;
            } else {
                off.step(&mut amps, t - now)?;
            }
            now = t;
            check_norm(&StateVector::new(amps.clone()), self.psi0.norm())?;
            traj.push(t, self.probes.measure(&amps));
        }
        Ok(traj)
    }
}

/// Weights `|<E_n|psi>|^2` of the smallest eigenpair set carrying at least
/// `mass`, returned sorted by eigenvalue.
pub fn energy_distribution(
    psi0: &StateVector,
    eigen: &SymmetricEigen,
    mass: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(invalid(format!("mass must lie in (0, 1], got {mass}")));
    }
    if eigen.vectors.nrows() != psi0.dim() {
        return Err(invalid("eigenbasis and state dimensions differ"));
    }
    let mut weighted: Vec<(f64, f64)> = eigen
        .values
        .iter()
        .zip(eigen.project(psi0))
        .map(|(&e, c)| (e, c.norm_sqr()))
        .collect();
    weighted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    let mut kept = Vec::new();
    let mut total = 0.0;
    for (e, w) in weighted {
        if total >= mass {
            break;
        }
        total += w;
        kept.push((e, w));
    }
    kept.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(kept)
}

/// One point of a field sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub field: f64,
    pub transfer: std::result::Result<f64, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub t_final: f64,
    pub points: Vec<SweepPoint>,
    pub period: Option<PeriodEstimate>,
}

impl SweepResult {
    pub fn fields(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.field).collect()
    }

    /// Transfer values, `None` when any point failed.
    pub fn values(&self) -> Option<Vec<f64>> {
        self.points
            .iter()
            .map(|p| p.transfer.clone().ok())
            .collect()
    }

    /// CSV with columns `F,transfer_tf`; failed points are written as `NaN`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "F,transfer_tf")?;
        for p in &self.points {
            let value = match &p.transfer {
                Ok(v) => fmt_num(*v),
                Err(_) => "NaN".to_string(),
            };
            writeln!(w, "{},{}", fmt_num(p.field), value)?;
        }
        Ok(())
    }
}

/// Uniform grid from `start` to `stop` inclusive.
pub fn field_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(invalid("field grid needs step > 0 and stop >= start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// Long-time transfer `T(t_f)` across a field grid. Points run in parallel
/// on the current rayon pool; a failing point is recorded and the sweep
/// continues.
pub fn sweep_transfer(setup: &QuenchSetup, fields: &[f64], t_final: f64) -> Result<SweepResult> {
    if !(t_final > 0.0) {
        return Err(invalid("t_f must be positive"));
    }
    if let Some(f) = fields.iter().find(|f| **f == 0.0) {
        return Err(invalid(format!("sweep fields must be nonzero, got {f}")));
    }
    let points: Vec<SweepPoint> = fields
        .par_iter()
        .map(|&field| SweepPoint {
            field,
            transfer: setup.transfer_at(field, t_final),
        })
        .collect();
    let mut result = SweepResult {
        t_final,
        points,
        period: None,
    };
    result.period = estimate_sweep_period(&result);
    Ok(result)
}

/// Dominant field period of the sweep curve.
pub fn estimate_sweep_period(sweep: &SweepResult) -> Option<PeriodEstimate> {
    let values = sweep.values()?;
    let fields = sweep.fields();
    let step = uniform_step(&fields)?;
    estimate_period(&values, step)
}

/// The headline model: `N = 111`, `U = V = -6.24`, `kappa = 1`.
pub fn reference_model() -> ModelParams {
    ModelParams {
        sites: 111,
        hopping: 1.0,
        onsite: -6.24,
        nearest: -6.24,
        field: -0.097120,
        boundary: Boundary::Open,
    }
}
