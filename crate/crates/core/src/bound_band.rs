//! Bound pairs of the translation-invariant chain.
//!
//! In the sector of centre momentum `K` the relative motion is a semi-infinite
//! chain with hopping `J_K = 2 kappa cos(K/2)`, an enhanced `sqrt(2) J_K` bond
//! between separations 0 and 1, and the interaction on the first two sites.
//! A bound solution has amplitudes `psi_r = s^r A x^{-r}` for `r >= 1`, with
//! `x = e^beta > 1` and `s = +-1` the alternation sign, where `x` is a root of
//!
//! ```text
//! s x^3 + 2 u x^2 + s (u^2 - 1) x + u = 0,    u = U / J_K.
//! ```
//!
//! The bulk equation fixes the energy to `-2 s J_K cosh(beta)`, always outside
//! the scattering continuum `[-2 J_K, 2 J_K]`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::export::fmt_num;
use crate::hubbard::TwoBosonBasis;
use crate::linalg::{inner, StateVector, SymmetricOperator, TripletBuilder};

/// Roots at or below `1 + ROOT_MARGIN` are treated as unbound.
const ROOT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumSector {
    pub k: f64,
    /// `J_K = 2 kappa cos(K/2)`.
    pub hopping: f64,
    /// `u_K = U / J_K`.
    pub reduced: f64,
}

impl MomentumSector {
    pub fn new(k: f64, kappa: f64, onsite: f64) -> Result<Self> {
        if !(k.abs() <= PI) {
            return Err(invalid(format!("momentum {k} outside [-pi, pi]")));
        }
        let hopping = 2.0 * kappa * (k / 2.0).cos();
        if hopping.abs() < 1e-14 {
            return Err(Error::EmptySector { k });
        }
        Ok(Self {
            k,
            hopping,
            reduced: onsite / hopping,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Lower,
    Upper,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One bound solution of the relative-motion chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub k: f64,
    pub hopping: f64,
    pub reduced: f64,
    /// Alternation sign `s` of the tail, `+1` or `-1`.
    pub sign: i8,
    /// Decay root `x = e^beta`.
    pub decay_root: f64,
    pub beta: f64,
    pub energy: f64,
}

impl BoundState {
    fn new(sector: MomentumSector, sign: i8, x: f64) -> Self {
        let s = f64::from(sign);
        Self {
            k: sector.k,
            hopping: sector.hopping,
            reduced: sector.reduced,
            sign,
            decay_root: x,
            beta: x.ln(),
            energy: -s * sector.hopping * (x + 1.0 / x),
        }
    }

    /// Cubic residual scaled by the magnitude of its largest term.
    pub fn cubic_residual(&self) -> f64 {
        cubic_scaled_residual(f64::from(self.sign), self.reduced, self.decay_root)
    }

    /// Chain amplitude at separation `r`, before normalization (`A = 1`).
    pub fn chain_amplitude(&self, r: usize) -> f64 {
        let s = f64::from(self.sign);
        let x = self.decay_root;
        if r == 0 {
            // second row of the chain eigen-equation
            (1.0 + s * self.reduced / x) / SQRT_2
        } else {
            s.powi(r as i32) * x.powi(-(r as i32))
        }
    }

    /// Normalized chain amplitudes `psi_0..=psi_max`.
    pub fn chain_amplitudes(&self, max_separation: usize) -> Vec<f64> {
        let mut amps: Vec<f64> = (0..=max_separation)
            .map(|r| self.chain_amplitude(r))
            .collect();
        let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        amps
    }
}

fn cubic_terms(s: f64, u: f64, x: f64) -> [f64; 4] {
    [s * x * x * x, 2.0 * u * x * x, s * (u * u - 1.0) * x, u]
}

fn cubic_scaled_residual(s: f64, u: f64, x: f64) -> f64 {
    let terms = cubic_terms(s, u, x);
    let sum: f64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        sum.abs() / scale
    }
}

/// Real roots of `x^3 + a x^2 + b x + c`, Newton-polished.
pub fn real_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut roots = if p < 0.0 && disc < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * PI * k as f64 / 3.0).cos() + shift)
            .collect::<Vec<_>>()
    } else {
        let sq = disc.max(0.0).sqrt();
        let t = (-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt();
        vec![t + shift]
    };
    for r in roots.iter_mut() {
        for _ in 0..6 {
            let f = ((*r + a) * *r + b) * *r + c;
            let df = (3.0 * *r + 2.0 * a) * *r + b;
            if df == 0.0 {
                break;
            }
            let step = f / df;
            *r -= step;
            if step.abs() <= 1e-16 * r.abs().max(1.0) {
                break;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Every bound solution (`x > 1`) at centre momentum `k`, ordered by energy.
///
/// Returns [`Error::EmptySector`] when `J_K` vanishes and an empty list for
/// `U = 0`.
pub fn solve_bound_states(k: f64, kappa: f64, onsite: f64) -> Result<Vec<BoundState>> {
    let sector = MomentumSector::new(k, kappa, onsite)?;
    if onsite == 0.0 {
        return Ok(Vec::new());
    }
    let u = sector.reduced;
    let mut out = Vec::new();
    for sign in [1i8, -1] {
        let s = f64::from(sign);
        // divide through by s to get a monic cubic
        for x in real_cubic_roots(2.0 * u * s, u * u - 1.0, u * s) {
            if x > 1.0 + ROOT_MARGIN {
                out.push(BoundState::new(sector, sign, x));
            }
        }
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

/// Relative-motion chain truncated at separation `length`.
pub fn build_heq(k: f64, kappa: f64, onsite: f64, length: usize) -> Result<SymmetricOperator> {
    if length < 2 {
        return Err(invalid(format!(
            "chain length must be at least 2, got {length}"
        )));
    }
    let hopping = 2.0 * kappa * (k / 2.0).cos();
    let mut b = TripletBuilder::new(length + 1);
    b.add(0, 0, onsite);
    b.add(1, 1, onsite);
    b.add_symmetric(0, 1, -SQRT_2 * hopping);
    for r in 1..length {
        b.add_symmetric(r, r + 1, -hopping);
    }
    Ok(b.build())
}

/// Grid index `m` with `k = 2 pi m / N`, if `k` lies on the grid.
pub fn grid_index(k: f64, sites: usize) -> Option<i64> {
    let m = k * sites as f64 / (2.0 * PI);
    let rounded = m.round();
    ((m - rounded).abs() < 1e-9).then_some(rounded as i64)
}

/// Symmetric momentum grid `2 pi m / N`, `|m| <= (N-1)/2`, for odd `N`.
pub fn momentum_grid(sites: usize) -> Result<Vec<f64>> {
    if sites.is_multiple_of(2) || sites < 3 {
        return Err(invalid(format!(
            "momentum grid needs odd N >= 3, got {sites}"
        )));
    }
    let half = (sites as i64 - 1) / 2;
    Ok((-half..=half)
        .map(|m| 2.0 * PI * m as f64 / sites as f64)
        .collect())
}

/// Embeds a bound state into the two-boson basis of an `N`-site ring.
pub fn bound_state_realspace(bound: &BoundState, sites: usize) -> Result<StateVector> {
    if sites.is_multiple_of(2) || sites < 3 {
        return Err(invalid(format!(
            "ring embedding needs odd N >= 3, got {sites}"
        )));
    }
    if grid_index(bound.k, sites).is_none() {
        return Err(invalid(format!(
            "momentum {} is not on the 2 pi m / {sites} grid",
            bound.k
        )));
    }
    let basis = TwoBosonBasis::new(sites)?;
    let max_sep = (sites - 1) / 2;
    let chain = bound.chain_amplitudes(max_sep);
    let k = bound.k;
    let scale = 1.0 / (sites as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
    for j in 1..=sites {
        let phase = Complex64::from_polar(scale, k * j as f64);
        amps[basis.rank(j, j).unwrap()] += phase * chain[0];
        for (r, &c) in chain.iter().enumerate().skip(1) {
            let partner = (j + r - 1) % sites + 1;
            let half = Complex64::from_polar(1.0, k * r as f64 / 2.0);
            amps[basis.rank(j, partner).unwrap()] += phase * half * c;
        }
    }
    Ok(StateVector::new(amps))
}

/// Bound states at one grid momentum with their band labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorStates {
    pub k: f64,
    pub hopping: f64,
    pub states: Vec<(Branch, BoundState)>,
}

impl SectorStates {
    pub fn get(&self, branch: Branch) -> Option<&BoundState> {
        self.states
            .iter()
            .find(|(b, _)| *b == branch)
            .map(|(_, s)| s)
    }

    /// Scattering continuum `[-2 J_K, 2 J_K]`.
    pub fn continuum(&self) -> (f64, f64) {
        let w = 2.0 * self.hopping.abs();
        (-w, w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub sites: usize,
    pub kappa: f64,
    pub onsite: f64,
    pub sectors: Vec<SectorStates>,
}

impl BandStructure {
    pub fn is_complete(&self, branch: Branch) -> bool {
        self.sectors.iter().all(|s| s.get(branch).is_some())
    }

    pub fn momenta(&self) -> impl Iterator<Item = f64> + '_ {
        self.sectors.iter().map(|s| s.k)
    }

    pub fn states(&self) -> impl Iterator<Item = (Branch, &BoundState)> + '_ {
        self.sectors
            .iter()
            .flat_map(|s| s.states.iter().map(|(b, st)| (*b, st)))
    }

    /// Smallest distance of any bound energy to the edge of its continuum.
    pub fn min_continuum_gap(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| {
                let (lo, hi) = s.continuum();
                s.states
                    .iter()
                    .map(move |(_, st)| (st.energy - lo).abs().min((st.energy - hi).abs()))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `K,branch,beta,energy`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "K,branch,beta,energy")?;
        for (branch, st) in self.states() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_num(st.k),
                branch,
                fmt_num(st.beta),
                fmt_num(st.energy)
            )?;
        }
        Ok(())
    }
}

/// Labels the solutions of one sector. With two states the ordering is by
/// energy; a lone state belongs to the band that stays detached from the
/// continuum, which lies on the side of the interaction sign.
fn label_sector(onsite: f64, states: Vec<BoundState>) -> Vec<(Branch, BoundState)> {
    match states.len() {
        0 => Vec::new(),
        1 => {
            let branch = if onsite < 0.0 {
                Branch::Lower
            } else {
                Branch::Upper
            };
            vec![(branch, states[0])]
        }
        _ => {
            // a third root never appears for this cubic family; keep the two
            // extremes if it ever did
            let lo = states[0];
            let hi = states[states.len() - 1];
            vec![(Branch::Lower, lo), (Branch::Upper, hi)]
        }
    }
}

/// Bound states on every grid momentum of an odd `N`-site ring.
pub fn band_scan(kappa: f64, onsite: f64, sites: usize) -> Result<BandStructure> {
    if !(kappa > 0.0) {
        return Err(invalid(format!("band scan needs kappa > 0, got {kappa}")));
    }
    let sectors = momentum_grid(sites)?
        .into_iter()
        .map(|k| {
            let states = solve_bound_states(k, kappa, onsite)?;
            Ok(SectorStates {
                k,
                hopping: 2.0 * kappa * (k / 2.0).cos(),
                states: label_sector(onsite, states),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandStructure {
        sites,
        kappa,
        onsite,
        sectors,
    })
}

/// Ring embeddings of every bound state of a band structure, used to
/// measure the weight a state keeps on the bound pairs.
#[derive(Debug, Clone)]
pub struct BoundProjector {
    pub sites: usize,
    entries: Vec<ProjectorEntry>,
}

#[derive(Debug, Clone)]
pub struct ProjectorEntry {
    pub k: f64,
    pub branch: Branch,
    pub energy: f64,
    pub state: StateVector,
}

impl BoundProjector {
    pub fn new(band: &BandStructure) -> Result<Self> {
        let entries = band
            .states()
            .map(|(branch, st)| {
                Ok(ProjectorEntry {
                    k: st.k,
                    branch,
                    energy: st.energy,
                    state: bound_state_realspace(st, band.sites)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sites: band.sites,
            entries,
        })
    }

    pub fn entries(&self) -> &[ProjectorEntry] {
        &self.entries
    }

    pub fn find(&self, k: f64, branch: Branch) -> Option<&ProjectorEntry> {
        self.entries
            .iter()
            .find(|e| e.branch == branch && (e.k - k).abs() < 1e-12)
    }

    /// `sum |<psi_K^b|psi>|^2` over all stored bound states.
    pub fn weight(&self, amps: &[Complex64]) -> f64 {
        self.entries
            .iter()
            .map(|e| inner(e.state.amplitudes(), amps).norm_sqr())
            .sum()
    }
}
