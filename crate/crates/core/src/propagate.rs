//! Time evolution `e^{-iHt}` for a time-independent real symmetric `H`.
//!
//! Two independent routes are provided: a Chebyshev expansion that only needs
//! sparse matrix-vector products, and an exact spectral route through a dense
//! eigendecomposition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    lanczos_extremes, StateVector, SymmetricEigen, SymmetricOperator, NORM_TOLERANCE,
};

/// Bessel functions `J_0(x) ..= J_{n}(x)` of integer order for `x >= 0`,
/// by Miller's downward recurrence normalized with
/// `J_0 + 2 sum_k J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, n: usize) -> Vec<f64> {
    assert!(x >= 0.0, "bessel argument must be non-negative");
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = n.max(x.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1}
        let idx = k - 1;
        if idx <= n {
            out[idx] = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            out.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    norm += cur;
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Chebyshev propagator with spectral bounds estimated once per operator.
#[derive(Debug, Clone)]
pub struct ChebyshevPropagator<'a> {
    op: &'a SymmetricOperator,
    center: f64,
    half_width: f64,
    /// Coefficient magnitude below which the series is cut.
    pub tolerance: f64,
    /// Largest `half_width * dt` handled in one expansion; longer intervals
    /// are split.
    pub max_phase: f64,
}

/// Lanczos iterations used for the spectral bounds.
const BOUND_ITERATIONS: usize = 40;
/// Relative widening of the estimated spectral interval.
const BOUND_MARGIN: f64 = 0.05;

impl<'a> ChebyshevPropagator<'a> {
    pub fn new(op: &'a SymmetricOperator) -> Self {
        let (lo, hi) = lanczos_extremes(op, BOUND_ITERATIONS);
        let (glo, ghi) = op.gershgorin_bounds();
        let width = (hi - lo).max(1e-12);
        let lo = (lo - BOUND_MARGIN * width).max(glo);
        let hi = (hi + BOUND_MARGIN * width).min(ghi);
        Self::with_bounds(op, lo, hi)
    }

    pub fn with_bounds(op: &'a SymmetricOperator, lo: f64, hi: f64) -> Self {
        Self {
            op,
            center: 0.5 * (lo + hi),
            half_width: (0.5 * (hi - lo)).max(1e-12),
            tolerance: 1e-15,
            max_phase: 400.0,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// Advances `psi` by `dt` in place and returns the magnitude of the first
    /// neglected coefficients, an estimate of the truncation error.
    pub fn step(&self, psi: &mut [Complex64], dt: f64) -> Result<f64> {
        if dt == 0.0 {
            return Ok(0.0);
        }
        if dt < 0.0 {
            return Err(invalid("time steps must be non-negative"));
        }
        let pieces = (self.half_width * dt / self.max_phase).ceil().max(1.0) as usize;
        let sub = dt / pieces as f64;
        let mut err = 0.0;
        for _ in 0..pieces {
            err += self.expand(psi, sub);
        }
        Ok(err)
    }

    fn expand(&self, psi: &mut [Complex64], dt: f64) -> f64 {
        let n = psi.len();
        let z = self.half_width * dt;
        let guess = (z + 30.0 + 10.0 * z.cbrt()).ceil() as usize;
        let bessel = bessel_j_sequence(z, guess + 10);
        // first order past the turning point whose coefficients stay below tol
        let mut order = guess;
        for k in (z.floor() as usize)..guess {
            if bessel[k].abs() < self.tolerance && bessel[k + 1].abs() < self.tolerance {
                order = k;
                break;
            }
        }
        let neglected = bessel[order..].iter().map(|b| 2.0 * b.abs()).sum::<f64>();

        let scale = 1.0 / self.half_width;
        let shift = self.center;
        let apply_scaled = |src: &[Complex64], dst: &mut [Complex64]| {
            self.op.apply_into(src, dst);
            for (d, s) in dst.iter_mut().zip(src) {
                *d = (*d - s * shift) * scale;
            }
        };

        let minus_i = Complex64::new(0.0, -1.0);
        let mut acc: Vec<Complex64> = psi.iter().map(|v| v * bessel[0]).collect();
        let mut prev = psi.to_vec();
        let mut cur = vec![Complex64::new(0.0, 0.0); n];
        apply_scaled(&prev, &mut cur);
        let mut phase = minus_i;
        for k in 1..order {
            let c = phase * (2.0 * bessel[k]);
            for (a, v) in acc.iter_mut().zip(&cur) {
                *a += c * v;
            }
            if k + 1 == order {
                break;
            }
            let mut next = vec![Complex64::new(0.0, 0.0); n];
            apply_scaled(&cur, &mut next);
            for (nx, p) in next.iter_mut().zip(&prev) {
                *nx = 2.0 * *nx - p;
            }
            prev = std::mem::replace(&mut cur, next);
            phase *= minus_i;
        }
        let global = Complex64::from_polar(1.0, -self.center * dt);
        for (p, a) in psi.iter_mut().zip(&acc) {
            *p = global * a;
        }
        neglected
    }
}

/// Exact propagation in the eigenbasis of `H`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    eigen: SymmetricEigen,
}

impl SpectralPropagator {
    pub fn new(op: &SymmetricOperator) -> Result<Self> {
        Ok(Self {
            eigen: SymmetricEigen::dense(op)?,
        })
    }

    pub fn from_eigen(eigen: SymmetricEigen) -> Self {
        Self { eigen }
    }

    pub fn eigen(&self) -> &SymmetricEigen {
        &self.eigen
    }

    /// Eigenbasis coefficients of `psi`.
    pub fn coefficients(&self, psi: &StateVector) -> Vec<Complex64> {
        self.eigen.project(psi)
    }

    /// `e^{-iHt}` applied to the state with eigenbasis coefficients `coeffs`.
    pub fn state_at(&self, coeffs: &[Complex64], t: f64) -> StateVector {
        let evolved: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.eigen.values)
            .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
            .collect();
        self.eigen.synthesize(&evolved)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Chebyshev,
    Spectral,
}

/// `e^{-iHt} psi0` for a single time.
pub fn propagate(
    op: &SymmetricOperator,
    psi0: &StateVector,
    t: f64,
    backend: Backend,
) -> Result<StateVector> {
    if op.dim() != psi0.dim() {
        return Err(invalid("operator and state dimensions differ"));
    }
    match backend {
        Backend::Chebyshev => {
            let prop = ChebyshevPropagator::new(op);
            let mut amps = psi0.amplitudes().to_vec();
            prop.step(&mut amps, t)?;
            let out = StateVector::new(amps);
            check_norm(&out, psi0.norm())?;
            Ok(out)
        }
        Backend::Spectral => {
            let prop = SpectralPropagator::new(op)?;
            Ok(prop.state_at(&prop.coefficients(psi0), t))
        }
    }
}

pub(crate) fn check_norm(psi: &StateVector, expected: f64) -> Result<()> {
    let residual = (psi.norm() - expected).abs();
    if residual > NORM_TOLERANCE || !residual.is_finite() {
        Err(Error::Accuracy {
            residual,
            tolerance: NORM_TOLERANCE,
        })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;

    /// Power series of `J_n(x)`, adequate for moderate `x`.
    fn bessel_series(n: usize, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut sum = term;
        for m in 1..200 {
            term *= -(x * x / 4.0) / (m as f64 * (m + n) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn bessel_matches_power_series() {
        for &x in &[0.3, 1.0, 4.5, 9.0] {
            let seq = bessel_j_sequence(x, 12);
            for n in 0..=12 {
                let want = bessel_series(n, x);
                assert!(
                    (seq[n] - want).abs() < 1e-12,
                    "J_{n}({x}) {} vs {want}",
                    seq[n]
                );
            }
        }
        let zero = bessel_j_sequence(0.0, 3);
        assert_eq!(zero, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn bessel_large_argument_identities() {
        for &x in &[150.0, 2500.0] {
            let n = (x as usize) + 200;
            let seq = bessel_j_sequence(x, n);
            // sum of squares identity J_0^2 + 2 sum J_k^2 = 1
            let s: f64 = seq[0] * seq[0] + 2.0 * seq[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-12, "{s}");
            // asymptotic form of J_0
            let asym =
                (2.0 / (std::f64::consts::PI * x)).sqrt() * (x - std::f64::consts::FRAC_PI_4).cos();
            assert!((seq[0] - asym).abs() < 2.0 / x.powf(1.5));
        }
    }

    fn ring(n: usize) -> SymmetricOperator {
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add_symmetric(i, (i + 1) % n, -1.0);
            b.add(i, i, 0.1 * i as f64);
        }
        b.build()
    }

    #[test]
    fn chebyshev_matches_spectral() {
        let op = ring(40);
        let mut amps = vec![Complex64::new(0.0, 0.0); 40];
        amps[3] = Complex64::new(0.6, 0.0);
        amps[4] = Complex64::new(0.0, 0.8);
        let psi0 = StateVector::new(amps);
        for t in [0.5, 7.0, 130.0] {
            let a = propagate(&op, &psi0, t, Backend::Chebyshev).unwrap();
            let b = propagate(&op, &psi0, t, Backend::Spectral).unwrap();
            assert!(a.distance(&b) < 1e-11, "t={t}: {}", a.distance(&b));
        }
    }

    #[test]
    fn split_steps_agree_with_single_step() {
        let op = ring(30);
        let psi0 = StateVector::basis(30, 7);
        let prop = ChebyshevPropagator::new(&op);
        let mut stepped = psi0.amplitudes().to_vec();
        for _ in 0..50 {
            prop.step(&mut stepped, 1.0).unwrap();
        }
        let mut once = psi0.amplitudes().to_vec();
        prop.step(&mut once, 50.0).unwrap();
        let d = StateVector::new(stepped).distance(&StateVector::new(once));
        assert!(d < 1e-11, "{d}");
    }

    #[test]
    fn underestimated_bounds_are_detected() {
        let op = ring(30);
        let psi0 = StateVector::from_real(&vec![1.0; 30]).normalized().unwrap();
        let prop = ChebyshevPropagator::with_bounds(&op, -0.5, 0.5);
        let mut amps = psi0.amplitudes().to_vec();
        prop.step(&mut amps, 20.0).unwrap();
        assert!(check_norm(&StateVector::new(amps), 1.0).is_err());
    }
}
