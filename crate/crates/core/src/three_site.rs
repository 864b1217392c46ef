//! Two-level description of the three-site chain near the pair/unpaired
//! avoided crossing, plus the exact reference dynamics it approximates.
//!
//! The effective basis is `{|up>, |p>}` with `|p> = (a_1^†)^2/sqrt(2)|vac>` and
//! `|up> = a_1^† a_3^† |vac>`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::hubbard::{build_hamiltonian, Boundary, ModelParams, TwoBosonBasis};
use crate::linalg::{StateVector, SymmetricEigen};

const SINGULAR_EPS: f64 = 1e-12;

fn nonzero(value: f64, what: &str) -> Result<f64> {
    if value.abs() < SINGULAR_EPS {
        Err(Error::SingularParameter(format!("{what} vanishes")))
    } else {
        Ok(value)
    }
}

/// Real symmetric 2x2 effective Hamiltonian in the `{|up>, |p>}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevel {
    pub unpaired: f64,
    pub paired: f64,
    pub coupling: f64,
}

impl TwoLevel {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.unpaired, self.coupling], [self.coupling, self.paired]]
    }

    /// `1 - |<p|e^{-iHt}|p>|^2` evaluated exactly for the 2x2 problem.
    pub fn transfer(&self, t: f64) -> f64 {
        let half_gap = 0.5 * (self.unpaired - self.paired);
        let rabi = (half_gap * half_gap + self.coupling * self.coupling).sqrt();
        if rabi == 0.0 {
            return 0.0;
        }
        let s = (rabi * t).sin();
        (self.coupling / rabi).powi(2) * s * s
    }
}

/// Second-order effective Hamiltonian for general `U`, `V`.
pub fn effective_hamiltonian(
    field: f64,
    onsite: f64,
    nearest: f64,
    kappa: f64,
) -> Result<TwoLevel> {
    let (f, u, v) = (field, onsite, nearest);
    let k2 = kappa * kappa;
    let d1 = nonzero(u - f - v, "U - F - V")?;
    let d2 = nonzero(f - v, "F - V")?;
    let d3 = nonzero(f * f - v * v, "F^2 - V^2")?;
    Ok(TwoLevel {
        coupling: 0.5 * (std::f64::consts::SQRT_2 * k2 / d1 + std::f64::consts::SQRT_2 * k2 / d2),
        unpaired: 4.0 * f + 2.0 * k2 * v / d3,
        paired: u + 2.0 * f + 2.0 * k2 / (u - v - f),
    })
}

/// Closed-form constants of the `U = V` two-level dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveConstants {
    /// Phase-centre energy `C0`.
    pub c0: f64,
    /// Detuning `C1`.
    pub c1: f64,
    /// Rabi frequency.
    pub omega: f64,
    /// Mixing angle, principal branch of `atan(tan theta)`.
    pub theta: f64,
    pub tan_theta: f64,
}

impl EffectiveConstants {
    /// Maximal transfer `sin^2 theta`.
    pub fn amplitude(&self) -> f64 {
        let t2 = self.tan_theta * self.tan_theta;
        t2 / (1.0 + t2)
    }

    /// Period `pi / omega` of `P(t)`.
    pub fn period(&self) -> f64 {
        std::f64::consts::PI / self.omega
    }
}

pub fn constants(field: f64, onsite: f64, kappa: f64) -> Result<EffectiveConstants> {
    let (f, u) = (field, onsite);
    let k2 = kappa * kappa;
    nonzero(f, "F")?;
    let diff = nonzero(f * f - u * u, "F^2 - U^2")?;
    let fu = nonzero(f * f - f * u, "F^2 - F U")?;
    let c0 = u / 2.0 + 3.0 * f + k2 * u / diff - k2 / f;
    let c1 = u - 2.0 * f - 2.0 * k2 / f - 2.0 * k2 * u / diff;
    let mixing = u * std::f64::consts::SQRT_2 * k2 / fu;
    let omega = 0.5 * (mixing * mixing + c1 * c1).sqrt();
    let tan_theta = if c1 == 0.0 {
        f64::INFINITY.copysign(mixing)
    } else {
        mixing / c1
    };
    Ok(EffectiveConstants {
        c0,
        c1,
        omega,
        theta: tan_theta.atan(),
        tan_theta,
    })
}

/// `P(t) = sin^2(theta) sin^2(omega t)`.
pub fn transfer_probability(t: f64, c: &EffectiveConstants) -> f64 {
    let s = (c.omega * t).sin();
    c.amplitude() * s * s
}

/// Exact `1 - |<p|Psi(t)>|^2` for the pair initially on site 1 of an open chain.
pub fn exact_pair_transfer(params: &ModelParams, times: &[f64]) -> Result<Vec<f64>> {
    if params.boundary != Boundary::Open {
        return Err(invalid(
            "pair-transfer dynamics is defined on the open chain",
        ));
    }
    let basis = TwoBosonBasis::new(params.sites)?;
    let h = build_hamiltonian(params, &basis)?;
    let eig = SymmetricEigen::dense(&h)?;
    let pair = basis.rank(1, 1).unwrap();
    let start = StateVector::basis(basis.dim(), pair);
    let weights: Vec<f64> = eig.project(&start).iter().map(|c| c.norm_sqr()).collect();
    Ok(times
        .iter()
        .map(|&t| {
            let survival: Complex64 = weights
                .iter()
                .zip(&eig.values)
                .map(|(w, e)| Complex64::from_polar(*w, -e * t))
                .sum();
            (1.0 - survival.norm_sqr()).max(0.0)
        })
        .collect())
}

/// Default three-site setting: `U = V = -6`, `kappa = 0.4`, `F = U/2`.
pub fn three_site_params(field: f64) -> ModelParams {
    ModelParams {
        sites: 3,
        hopping: 0.4,
        onsite: -6.0,
        nearest: -6.0,
        field,
        boundary: Boundary::Open,
    }
}
