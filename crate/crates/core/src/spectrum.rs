//! Spectra as a function of the field, per-level pair correlation, and
//! avoided-crossing detection by overlap-based level tracking.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::export::fmt_num;
use crate::hubbard::{build_hamiltonian, Boundary, ModelParams, TwoBosonBasis};
use crate::linalg::SymmetricEigen;

/// Levels with `rbar` at or below this are pair-like.
pub const DEFAULT_RBAR_THRESHOLD: f64 = 1.0;
/// Smallest overlap accepted when following a level to the next field value.
pub const MIN_TRACKING_OVERLAP: f64 = 0.5;
/// Gaps below this are treated as exact crossings.
pub const CROSSING_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelClass {
    Correlated,
    Uncorrelated,
}

impl LevelClass {
    pub fn label(self) -> &'static str {
        match self {
            LevelClass::Correlated => "correlated",
            LevelClass::Uncorrelated => "uncorrelated",
        }
    }
}

/// Closed energy interval used to keep only part of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub min: f64,
    pub max: f64,
}

impl EnergyWindow {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min < max) {
            return Err(invalid(format!("empty energy window [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    /// Window of total width `width` centred on `center`.
    pub fn centered(center: f64, width: f64) -> Result<Self> {
        Self::new(center - 0.5 * width, center + 0.5 * width)
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.min && e <= self.max
    }
}

/// Eigenvalues, correlations and (windowed) eigenvectors at one field value.
#[derive(Debug, Clone)]
pub struct SpectrumSlice {
    pub field: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Mean separation of each eigenvector, aligned with `eigenvalues`.
    pub correlations: Vec<f64>,
    pub window: Option<EnergyWindow>,
    vectors: Vec<Vec<f64>>,
}

impl SpectrumSlice {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvector `n`; empty once the slice has been stripped after tracking.
    pub fn vector(&self, n: usize) -> &[f64] {
        self.vectors.get(n).map_or(&[], Vec::as_slice)
    }
}

fn rbar_of(basis: &TwoBosonBasis, v: &[f64]) -> f64 {
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    basis
        .pairs()
        .iter()
        .zip(v)
        .map(|(&(i, j), x)| (j - i) as f64 * x * x)
        .sum::<f64>()
        / norm2
}

fn slice_at(
    params: &ModelParams,
    basis: &TwoBosonBasis,
    window: Option<EnergyWindow>,
) -> Result<SpectrumSlice> {
    let h = build_hamiltonian(params, basis)?;
    let eig = SymmetricEigen::dense(&h)?;
    let mut slice = SpectrumSlice {
        field: params.field,
        eigenvalues: Vec::new(),
        correlations: Vec::new(),
        window,
        vectors: Vec::new(),
    };
    for (n, &e) in eig.values.iter().enumerate() {
        if window.is_some_and(|w| !w.contains(e)) {
            continue;
        }
        let v = eig.vector(n);
        slice.correlations.push(rbar_of(basis, &v));
        slice.eigenvalues.push(e);
        slice.vectors.push(v);
    }
    Ok(slice)
}

/// Dense spectrum of the open chain at every field in `fields`.
pub fn spectrum_vs_field(
    fields: &[f64],
    params: &ModelParams,
    window: Option<EnergyWindow>,
) -> Result<Vec<SpectrumSlice>> {
    if params.boundary != Boundary::Open {
        return Err(invalid("field spectra require the open chain"));
    }
    let basis = TwoBosonBasis::new(params.sites)?;
    fields
        .par_iter()
        .map(|&f| {
            let p = params.with_field(f);
            p.validate()?;
            slice_at(&p, &basis, window)
        })
        .collect()
}

pub fn classify_levels(slice: &SpectrumSlice, threshold: f64) -> Vec<LevelClass> {
    slice
        .correlations
        .iter()
        .map(|&r| {
            if r <= threshold {
                LevelClass::Correlated
            } else {
                LevelClass::Uncorrelated
            }
        })
        .collect()
}

/// A level followed across the field grid. `indices[s]` is its position in
/// slice `s`, or `None` when it is outside the window there.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedLevel {
    pub id: usize,
    pub indices: Vec<Option<usize>>,
}

impl TrackedLevel {
    pub fn energy(&self, slices: &[SpectrumSlice], s: usize) -> Option<f64> {
        self.indices
            .get(s)
            .copied()
            .flatten()
            .map(|n| slices[s].eigenvalues[n])
    }

    pub fn correlation(&self, slices: &[SpectrumSlice], s: usize) -> Option<f64> {
        self.indices
            .get(s)
            .copied()
            .flatten()
            .map(|n| slices[s].correlations[n])
    }

    /// Least-squares slope `dE/dF` over the slices where the level exists.
    pub fn slope(&self, slices: &[SpectrumSlice]) -> Option<f64> {
        let pts: Vec<(f64, f64)> = (0..slices.len())
            .filter_map(|s| self.energy(slices, s).map(|e| (slices[s].field, e)))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

/// Step between slices `slice` and `slice + 1` where a level could not be
/// followed with sufficient overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlaggedSegment {
    pub slice: usize,
    pub level_id: usize,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelTracking {
    pub levels: Vec<TrackedLevel>,
    pub flagged: Vec<FlaggedSegment>,
    /// `ids[s][n]`: level id of index `n` in slice `s`.
    ids: Vec<Vec<usize>>,
}

impl LevelTracking {
    pub fn slices(&self) -> usize {
        self.ids.len()
    }

    /// Level id of index `n` in slice `s`.
    pub fn id_at(&self, s: usize, n: usize) -> Option<usize> {
        self.ids.get(s)?.get(n).copied()
    }

    /// CSV with columns `F,level_id,energy,rbar,label`, ordered by slice and
    /// then by energy.
    pub fn write_csv<W: Write>(
        &self,
        slices: &[SpectrumSlice],
        threshold: f64,
        mut w: W,
    ) -> std::io::Result<()> {
        writeln!(w, "F,level_id,energy,rbar,label")?;
        for (s, slice) in slices.iter().enumerate() {
            let labels = classify_levels(slice, threshold);
            for n in 0..slice.len() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    fmt_num(slice.field),
                    self.ids[s][n],
                    fmt_num(slice.eigenvalues[n]),
                    fmt_num(slice.correlations[n]),
                    labels[n].label()
                )?;
            }
        }
        Ok(())
    }

    /// Appends slice `next`, matching it against `prev` (the slice pushed
    /// before it, still carrying its eigenvectors).
    fn push(&mut self, prev: Option<&SpectrumSlice>, next: &SpectrumSlice) {
        let s = self.ids.len();
        let mut assigned: Vec<Option<usize>> = vec![None; next.len()];
        if let Some(prev) = prev {
            let current = &self.ids[s - 1];
            let rows: Vec<Vec<(f64, usize, usize)>> = (0..prev.len())
                .into_par_iter()
                .map(|a| {
                    (0..next.len())
                        .filter_map(|b| {
                            let o = overlap(prev.vector(a), next.vector(b));
                            (o > 1e-3).then_some((o, a, b))
                        })
                        .collect()
                })
                .collect();
            let mut candidates: Vec<(f64, usize, usize)> = rows.into_iter().flatten().collect();
            candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
            let mut taken_prev = vec![false; prev.len()];
            for (o, a, b) in candidates {
                if taken_prev[a] || assigned[b].is_some() {
                    continue;
                }
                taken_prev[a] = true;
                let id = current[a];
                assigned[b] = Some(id);
                if o < MIN_TRACKING_OVERLAP {
                    self.flagged.push(FlaggedSegment {
                        slice: s - 1,
                        level_id: id,
                        overlap: o,
                    });
                }
            }
        }
        let ids: Vec<usize> = assigned
            .into_iter()
            .map(|id| {
                id.unwrap_or_else(|| {
                    let id = self.levels.len();
                    self.levels.push(TrackedLevel {
                        id,
                        indices: Vec::new(),
                    });
                    id
                })
            })
            .collect();
        for level in &mut self.levels {
            level.indices.push(None);
        }
        for (n, &id) in ids.iter().enumerate() {
            self.levels[id].indices[s] = Some(n);
        }
        self.ids.push(ids);
    }
}

fn overlap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().abs()
}

/// Follows every level through the slices by greedy maximal-overlap
/// assignment between neighbouring field values. Pairs whose best overlap
/// falls below [`MIN_TRACKING_OVERLAP`] are still joined when nothing better
/// is available, but the step is flagged.
pub fn track_levels(slices: &[SpectrumSlice]) -> LevelTracking {
    let mut tracking = LevelTracking::default();
    for (s, slice) in slices.iter().enumerate() {
        tracking.push(s.checked_sub(1).map(|p| &slices[p]), slice);
    }
    tracking
}

/// Diagonalizes and tracks in chunks of `chunk` field values, dropping
/// eigenvectors once they are no longer needed. Memory stays bounded by
/// `chunk + 1` slices of eigenvectors, which matters for long chains.
pub fn scan_and_track(
    fields: &[f64],
    params: &ModelParams,
    window: Option<EnergyWindow>,
    chunk: usize,
) -> Result<(Vec<SpectrumSlice>, LevelTracking)> {
    let chunk = chunk.max(1);
    let mut slices: Vec<SpectrumSlice> = Vec::with_capacity(fields.len());
    let mut tracking = LevelTracking::default();
    for part in fields.chunks(chunk) {
        for slice in spectrum_vs_field(part, params, window)? {
            tracking.push(slices.last(), &slice);
            if let Some(last) = slices.last_mut() {
                last.vectors = Vec::new();
            }
            slices.push(slice);
        }
    }
    if let Some(last) = slices.last_mut() {
        last.vectors = Vec::new();
    }
    Ok((slices, tracking))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvoidedCrossing {
    pub f_center: f64,
    pub gap: f64,
    /// Tracked level ids, lower level at the minimum first.
    pub level_pair: (usize, usize),
    /// Classes of the two levels at the minimum, in the same order.
    pub classification: (LevelClass, LevelClass),
}

/// Field at which two tracked levels exchange order with gap below
/// [`CROSSING_GAP`] or change sign between grid points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrueCrossing {
    pub f_center: f64,
    pub level_pair: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    pub avoided: Vec<AvoidedCrossing>,
    pub crossings: Vec<TrueCrossing>,
    pub flagged: Vec<FlaggedSegment>,
}

/// Local minima of the gap between tracked levels that are adjacent in
/// energy, kept when the two levels have different classes at the minimum.
/// Sign changes of a tracked energy difference are reported as exact
/// crossings instead.
pub fn detect_avoided_crossings(
    slices: &[SpectrumSlice],
    tracking: &LevelTracking,
    threshold: f64,
) -> CrossingReport {
    let labels: Vec<Vec<LevelClass>> = slices
        .iter()
        .map(|s| classify_levels(s, threshold))
        .collect();
    let mut avoided = Vec::new();
    let mut crossings = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (s, slice) in slices.iter().enumerate() {
        for n in 1..slice.len() {
            if let (Some(a), Some(b)) = (tracking.id_at(s, n - 1), tracking.id_at(s, n)) {
                let key = (a.min(b), a.max(b));
                if !pairs.contains(&key) {
                    pairs.push(key);
                }
            }
        }
    }
    for (a, b) in pairs {
        let la = &tracking.levels[a];
        let lb = &tracking.levels[b];
        let diff: Vec<Option<f64>> = (0..slices.len())
            .map(|s| Some(lb.energy(slices, s)? - la.energy(slices, s)?))
            .collect();
        for s in 0..slices.len() {
            let Some(d) = diff[s] else { continue };
            if d.abs() < CROSSING_GAP {
                crossings.push(TrueCrossing {
                    f_center: slices[s].field,
                    level_pair: (a, b),
                });
                continue;
            }
            if let Some(Some(dn)) = diff.get(s + 1) {
                if d * dn < 0.0 && dn.abs() >= CROSSING_GAP {
                    let (f0, f1) = (slices[s].field, slices[s + 1].field);
                    crossings.push(TrueCrossing {
                        f_center: f0 + (f1 - f0) * d / (d - dn),
                        level_pair: (a, b),
                    });
                }
            }
            if s == 0 || s + 1 == slices.len() {
                continue;
            }
            let (Some(dp), Some(dn)) = (diff[s - 1], diff[s + 1]) else {
                continue;
            };
            let g = d.abs();
            if !(dp * d > 0.0 && dn * d > 0.0 && g < dp.abs() && g <= dn.abs()) {
                continue;
            }
            let (Some(na), Some(nb)) = (la.indices[s], lb.indices[s]) else {
                continue;
            };
            if na.abs_diff(nb) != 1 {
                continue;
            }
            let (lo, hi) = if na < nb { (a, b) } else { (b, a) };
            let (nlo, nhi) = (na.min(nb), na.max(nb));
            let classes = (labels[s][nlo], labels[s][nhi]);
            if classes.0 == classes.1 {
                continue;
            }
            avoided.push(AvoidedCrossing {
                f_center: slices[s].field,
                gap: g,
                level_pair: (lo, hi),
                classification: classes,
            });
        }
    }
    avoided.sort_by(|x, y| x.f_center.total_cmp(&y.f_center));
    crossings.sort_by(|x, y| x.f_center.total_cmp(&y.f_center));
    CrossingReport {
        avoided,
        crossings,
        flagged: tracking.flagged.clone(),
    }
}
