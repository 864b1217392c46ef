//! Two-boson basis and the extended Bose-Hubbard chain in a linear field.
//!
//! Sites are labelled `1..=N`. A configuration `(i, j)` with `i <= j` is the
//! normalized state `a_i^† a_j^† |vac>` for `i < j` and
//! `(a_i^†)^2 / sqrt(2) |vac>` for `i == j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{StateVector, SymmetricOperator, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Ring,
}

/// Physical parameters of `H = H0 + F sum_j j n_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sites: usize,
    /// Hopping amplitude kappa.
    pub hopping: f64,
    /// On-site interaction U.
    pub onsite: f64,
    /// Nearest-neighbour interaction V.
    pub nearest: f64,
    /// Field strength F (energy per site).
    pub field: f64,
    pub boundary: Boundary,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(invalid(format!(
                "need at least 2 sites, got {}",
                self.sites
            )));
        }
        if !(self.hopping >= 0.0) || !self.hopping.is_finite() {
            return Err(invalid(format!(
                "hopping must be finite and non-negative, got {}",
                self.hopping
            )));
        }
        if !self.onsite.is_finite() || !self.nearest.is_finite() || !self.field.is_finite() {
            return Err(invalid("interaction and field strengths must be finite"));
        }
        if self.boundary == Boundary::Ring && self.field != 0.0 {
            return Err(invalid("a linear field requires open boundaries"));
        }
        Ok(())
    }

    pub fn with_field(self, field: f64) -> Self {
        Self { field, ..self }
    }
}

/// Lexicographic enumeration of `(i, j)`, `1 <= i <= j <= N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoBosonBasis {
    sites: usize,
    pairs: Vec<(usize, usize)>,
}

impl TwoBosonBasis {
    pub fn new(sites: usize) -> Result<Self> {
        if sites < 2 {
            return Err(invalid(format!("need at least 2 sites, got {sites}")));
        }
        let pairs = (1..=sites)
            .flat_map(|i| (i..=sites).map(move |j| (i, j)))
            .collect();
        Ok(Self { sites, pairs })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Index of configuration `(i, j)`; the order of the two sites is irrelevant.
    pub fn rank(&self, a: usize, b: usize) -> Option<usize> {
        let (i, j) = if a <= b { (a, b) } else { (b, a) };
        if i == 0 || j > self.sites {
            return None;
        }
        let n = self.sites;
        // rows 1..i-1 hold N, N-1, ..., N-i+2 entries
        Some((i - 1) * (2 * n + 2 - i) / 2 + (j - i))
    }

    pub fn unrank(&self, k: usize) -> Option<(usize, usize)> {
        self.pairs.get(k).copied()
    }

    fn occupation(&self, k: usize, site: usize) -> usize {
        let (i, j) = self.pairs[k];
        usize::from(i == site) + usize::from(j == site)
    }

    /// Moves one boson from `from` to `to`, returning the target index and the
    /// bosonic amplitude `sqrt(n_from) sqrt(n_to + 1)`.
    fn hop(&self, k: usize, from: usize, to: usize) -> Option<(usize, f64)> {
        let n_from = self.occupation(k, from);
        if n_from == 0 {
            return None;
        }
        let n_to = self.occupation(k, to);
        let (i, j) = self.pairs[k];
        let (a, b) = if i == from { (to, j) } else { (i, to) };
        let target = self.rank(a, b)?;
        Some((target, ((n_from * (n_to + 1)) as f64).sqrt()))
    }
}

fn bonds(sites: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (1..sites).map(|s| (s, s + 1)).collect();
    if boundary == Boundary::Ring {
        out.push((sites, 1));
    }
    out
}

/// Field-free extended Hubbard Hamiltonian `H0`.
pub fn build_h0(params: &ModelParams, basis: &TwoBosonBasis) -> Result<SymmetricOperator> {
    let mut relaxed = *params;
    relaxed.field = 0.0;
    relaxed.validate()?;
    if basis.sites() != params.sites {
        return Err(invalid("basis and parameters disagree on the site count"));
    }
    let bonds = bonds(params.sites, params.boundary);
    let mut b = TripletBuilder::new(basis.dim());
    for k in 0..basis.dim() {
        let (i, j) = basis.pairs[k];
        let mut diag = 0.0;
        if i == j {
            diag += params.onsite;
        } else {
            let adjacent = bonds
                .iter()
                .filter(|&&(s, t)| (s, t) == (i, j) || (t, s) == (i, j))
                .count();
            diag += params.nearest * adjacent as f64;
        }
        if diag != 0.0 {
            b.add(k, k, diag);
        }
        if params.hopping == 0.0 {
            continue;
        }
        // a_t^† a_s for every bond; the transpose supplies the Hermitian conjugate
        for &(s, t) in &bonds {
            if let Some((target, amp)) = basis.hop(k, s, t) {
                b.add_symmetric(target, k, -params.hopping * amp);
            }
        }
    }
    Ok(b.build())
}

/// Diagonal field term `F sum_j j n_j`, entry `F (i + j)` on `(i, j)`.
pub fn build_stark(
    basis: &TwoBosonBasis,
    field: f64,
    boundary: Boundary,
) -> Result<SymmetricOperator> {
    if boundary == Boundary::Ring && field != 0.0 {
        return Err(invalid("a linear field requires open boundaries"));
    }
    let diag: Vec<f64> = basis
        .pairs()
        .iter()
        .map(|&(i, j)| field * (i + j) as f64)
        .collect();
    Ok(SymmetricOperator::diagonal(&diag))
}

/// Full quench Hamiltonian `H0 + F sum_j j n_j`.
pub fn build_hamiltonian(params: &ModelParams, basis: &TwoBosonBasis) -> Result<SymmetricOperator> {
    params.validate()?;
    let h0 = build_h0(params, basis)?;
    let stark = build_stark(basis, params.field, params.boundary)?;
    h0.add_scaled(&stark, 1.0)
}

/// Probability of each particle separation `r = j - i`, `r = 0..N-1`.
pub fn pair_distribution(basis: &TwoBosonBasis, state: &StateVector) -> Result<Vec<f64>> {
    if state.dim() != basis.dim() {
        return Err(invalid(format!(
            "state dimension {} does not match basis dimension {}",
            state.dim(),
            basis.dim()
        )));
    }
    let mut dist = vec![0.0; basis.sites()];
    for (&(i, j), a) in basis.pairs().iter().zip(state.amplitudes()) {
        dist[j - i] += a.norm_sqr();
    }
    Ok(dist)
}

/// Mean separation `sum_{i, r>=1} r <n_i n_{i+r}>` of the two bosons.
pub fn mean_distance(basis: &TwoBosonBasis, state: &StateVector) -> Result<f64> {
    state.require_normalized()?;
    let dist = pair_distribution(basis, state)?;
    Ok(dist.iter().enumerate().map(|(r, p)| r as f64 * p).sum())
}

/// Largest tolerated imaginary part of a Hermitian quadratic form.
const IMAGINARY_RESIDUE: f64 = 1e-10;

/// `<psi|A|psi>` for a normalized state.
pub fn expectation(op: &SymmetricOperator, state: &StateVector) -> Result<f64> {
    if op.dim() != state.dim() {
        return Err(invalid(format!(
            "operator dimension {} does not match state dimension {}",
            op.dim(),
            state.dim()
        )));
    }
    state.require_normalized()?;
    let value = quadratic_form(op, state.amplitudes());
    if value.im.abs() > IMAGINARY_RESIDUE * value.re.abs().max(1.0) {
        return Err(invalid(format!(
            "quadratic form has imaginary residue {}",
            value.im
        )));
    }
    Ok(value.re)
}

pub(crate) fn quadratic_form(op: &SymmetricOperator, amps: &[Complex64]) -> Complex64 {
    (0..op.dim())
        .map(|r| {
            let row: Complex64 = op.row(r).map(|(c, v)| amps[c] * v).sum();
            amps[r].conj() * row
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymmetricEigen;

    fn params(sites: usize, hopping: f64, u: f64, v: f64, boundary: Boundary) -> ModelParams {
        ModelParams {
            sites,
            hopping,
            onsite: u,
            nearest: v,
            field: 0.0,
            boundary,
        }
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(TwoBosonBasis::new(3).unwrap().dim(), 6);
        assert_eq!(TwoBosonBasis::new(111).unwrap().dim(), 6216);
        assert_eq!(
            TwoBosonBasis::new(2).unwrap().pairs(),
            &[(1, 1), (1, 2), (2, 2)]
        );
        assert!(TwoBosonBasis::new(1).is_err());
    }

    #[test]
    fn rank_inverts_unrank() {
        let basis = TwoBosonBasis::new(17).unwrap();
        for k in 0..basis.dim() {
            let (i, j) = basis.unrank(k).unwrap();
            assert_eq!(basis.rank(i, j), Some(k));
            assert_eq!(basis.rank(j, i), Some(k));
        }
        assert_eq!(basis.rank(0, 3), None);
        assert_eq!(basis.rank(2, 18), None);
    }

    #[test]
    fn two_site_free_spectrum() {
        let p = params(2, 1.0, 0.0, 0.0, Boundary::Open);
        let basis = TwoBosonBasis::new(2).unwrap();
        let h0 = build_h0(&p, &basis).unwrap();
        assert!((h0.get(0, 1) + 2f64.sqrt()).abs() < 1e-15);
        let e = SymmetricEigen::dense(&h0).unwrap();
        for (got, want) in e.values.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_interaction_entries() {
        let p = params(3, 0.4, -6.0, -6.0, Boundary::Open);
        let basis = TwoBosonBasis::new(3).unwrap();
        let h0 = build_h0(&p, &basis).unwrap();
        let k11 = basis.rank(1, 1).unwrap();
        let k12 = basis.rank(1, 2).unwrap();
        let k13 = basis.rank(1, 3).unwrap();
        assert_eq!(h0.get(k11, k11), -6.0);
        assert_eq!(h0.get(k12, k12), -6.0);
        assert_eq!(h0.get(k13, k13), 0.0);
        assert!(h0.is_symmetric());
        assert!((0..basis.dim()).all(|r| h0.row_nnz(r) <= 5));
    }

    #[test]
    fn stark_entries() {
        let basis = TwoBosonBasis::new(3).unwrap();
        let s = build_stark(&basis, -3.0, Boundary::Open).unwrap();
        assert_eq!(s.get(0, 0), -6.0);
        let k13 = basis.rank(1, 3).unwrap();
        assert_eq!(s.get(k13, k13), -12.0);
        let zero = build_stark(&basis, 0.0, Boundary::Open).unwrap();
        assert_eq!(zero.nnz(), 0);
        assert!(build_stark(&basis, -3.0, Boundary::Ring).is_err());
        assert!(build_stark(&basis, 0.0, Boundary::Ring).is_ok());
    }

    #[test]
    fn ring_with_field_rejected() {
        let mut p = params(5, 1.0, -1.0, -1.0, Boundary::Ring);
        p.field = 0.1;
        assert!(p.validate().is_err());
        let basis = TwoBosonBasis::new(5).unwrap();
        assert!(build_hamiltonian(&p, &basis).is_err());
    }

    #[test]
    fn mean_distance_examples() {
        let basis = TwoBosonBasis::new(5).unwrap();
        let pair = StateVector::basis(basis.dim(), basis.rank(1, 1).unwrap());
        assert_eq!(mean_distance(&basis, &pair).unwrap(), 0.0);
        let far = StateVector::basis(basis.dim(), basis.rank(1, 3).unwrap());
        assert_eq!(mean_distance(&basis, &far).unwrap(), 2.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amps[basis.rank(1, 1).unwrap()] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        amps[basis.rank(1, 3).unwrap()] = Complex64::new(0.0, 1.0 / 2f64.sqrt());
        let mixed = StateVector::new(amps);
        assert!((mean_distance(&basis, &mixed).unwrap() - 1.0).abs() < 1e-14);

        let unnormalized = StateVector::from_real(&vec![1.0; basis.dim()]);
        assert!(mean_distance(&basis, &unnormalized).is_err());
    }

    #[test]
    fn expectation_examples() {
        let p = params(4, 1.0, -6.0, -6.0, Boundary::Open);
        let basis = TwoBosonBasis::new(4).unwrap();
        let h0 = build_h0(&p, &basis).unwrap();
        let pair = StateVector::basis(basis.dim(), 0);
        assert_eq!(expectation(&h0, &pair).unwrap(), -6.0);
        let adjacent = StateVector::basis(basis.dim(), basis.rank(1, 2).unwrap());
        assert_eq!(expectation(&h0, &adjacent).unwrap(), -6.0);
        let id = SymmetricOperator::identity(basis.dim());
        let psi = StateVector::from_real(&vec![1.0; basis.dim()])
            .normalized()
            .unwrap();
        assert!((expectation(&id, &psi).unwrap() - 1.0).abs() < 1e-14);
        let small = SymmetricOperator::identity(3);
        assert!(expectation(&small, &psi).is_err());
    }
}
