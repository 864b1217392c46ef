//! Sparse symmetric operators, state vectors and the dense eigensolver glue.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Norm tolerance below which a state counts as normalized.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Real symmetric matrix in compressed-row form. Both triangles are stored so
/// that a matrix-vector product is a single row sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Accumulates `(row, col, value)` contributions before freezing them into a
/// [`SymmetricOperator`]. Duplicate positions are summed.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.entries.push((row, col, value));
    }

    /// Adds `value` at `(a, b)` and at `(b, a)` (once on the diagonal).
    pub fn add_symmetric(&mut self, a: usize, b: usize, value: f64) {
        self.add(a, b, value);
        if a != b {
            self.add(b, a, value);
        }
    }

    pub fn build(mut self) -> SymmetricOperator {
        self.entries.sort_by_key(|x| (x.0, x.1));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
        }
        for r in 0..self.dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SymmetricOperator {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl SymmetricOperator {
    pub fn zeros(dim: usize) -> Self {
        TripletBuilder::new(dim).build()
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut b = TripletBuilder::new(values.len());
        for (i, &v) in values.iter().enumerate() {
            if v != 0.0 {
                b.add(i, i, v);
            }
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of one row as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(pos) => self.vals[span.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Exact transpose symmetry of the stored pattern and values.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &SymmetricOperator, scale: f64) -> Result<SymmetricOperator> {
        if self.dim != other.dim {
            return Err(invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        let mut b = TripletBuilder::new(self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                b.add(r, c, v);
            }
            for (c, v) in other.row(r) {
                b.add(r, c, scale * v);
            }
        }
        Ok(b.build())
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    /// `out = self * x`.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k]] * self.vals[k];
            }
            *o = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dim {
            let mut d = 0.0;
            let mut radius = 0.0;
            for (c, v) in self.row(r) {
                if c == r {
                    d = v;
                } else {
                    radius += v.abs();
                }
            }
            lo = lo.min(d - radius);
            hi = hi.max(d + radius);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Complex amplitude vector over a two-boson basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Unit vector on basis index `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amps, &other.amps)
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(invalid(format!(
                "state is not normalized (norm = {})",
                self.norm()
            )))
        }
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending and
/// eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl SymmetricEigen {
    pub fn dense(op: &SymmetricOperator) -> Result<Self> {
        Self::from_matrix(&op.to_dense())
    }

    pub fn from_matrix(m: &Mat<f64>) -> Result<Self> {
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        let vectors = evd.U().to_owned();
        // faer returns ascending order already; keep an explicit sort in case a
        // backend ever changes that.
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        if order.iter().enumerate().all(|(i, &j)| i == j) {
            return Ok(Self { values, vectors });
        }
        let sorted_values = order.iter().map(|&j| values[j]).collect();
        let sorted_vectors =
            Mat::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
        Ok(Self {
            values: sorted_values,
            vectors: sorted_vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, n: usize) -> Vec<f64> {
        (0..self.vectors.nrows())
            .map(|r| self.vectors[(r, n)])
            .collect()
    }

    /// Coefficients `<E_n|psi>` for every eigenvector.
    pub fn project(&self, psi: &StateVector) -> Vec<Complex64> {
        let amps = psi.amplitudes();
        let dim = self.vectors.nrows();
        (0..self.dim())
            .map(|n| {
                let col = self.vectors.col(n);
                (0..dim).map(|r| amps[r] * col[r]).sum()
            })
            .collect()
    }

    /// Rebuilds `sum_n c_n |E_n>`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> StateVector {
        let dim = self.vectors.nrows();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (n, c) in coeffs.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col = self.vectors.col(n);
            for (r, o) in out.iter_mut().enumerate() {
                *o += c * col[r];
            }
        }
        StateVector::new(out)
    }
}

/// Extremal eigenvalue estimates from a short Lanczos run.
///
/// The start vector is a fixed deterministic sequence so repeated runs give
/// identical bounds.
pub fn lanczos_extremes(op: &SymmetricOperator, iterations: usize) -> (f64, f64) {
    let n = op.dim();
    let steps = iterations.min(n).max(1);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin())
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut v_prev = vec![0.0; n];
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);
    let mut beta = 0.0;
    for _ in 0..steps {
        let mut w = op.apply_real(&v);
        let alpha: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        for i in 0..n {
            w[i] -= alpha * v[i] + beta * v_prev[i];
        }
        alphas.push(alpha);
        beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if beta < 1e-12 {
            break;
        }
        betas.push(beta);
        v_prev = std::mem::replace(&mut v, w.iter().map(|x| x / beta).collect());
    }
    let m = alphas.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j || j + 1 == i {
            betas[i.min(j)]
        } else {
            0.0
        }
    });
    match SymmetricEigen::from_matrix(&t) {
        Ok(e) => (e.values[0], e.values[m - 1]),
        Err(_) => op.gershgorin_bounds(),
    }
}
