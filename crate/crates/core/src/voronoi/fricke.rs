//! Numerical determination of the Fricke scalar for θΔ.

use crate::error::{Error, Result};
use crate::qseries::{builtin_form, delta_expansion, theta_expansion, QSeries};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Σ c(n) qⁿ at q = e(τ), by Horner's rule.
pub(crate) fn eval_at(s: &QSeries, tau: Complex64) -> Complex64 {
    let q = (Complex64::new(0.0, TAU) * tau).exp();
    let coeffs = s.coeffs_bigint();
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * q + num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN);
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrickeScalar {
    pub kappa: Complex64,
    pub points: Vec<Complex64>,
    pub ratios: Vec<Complex64>,
    /// max_j |r_j − r_0| / |r_0|
    pub spread: f64,
}

pub const FRICKE_POINTS: [(f64, f64); 3] = [(0.0, 0.5), (0.25, 0.5), (-0.25, 0.5)];

/// κ with (θΔ)|W₄ = κ·θ(z)Δ(4z), where (f|W₄)(z) = f(−1/(4z))·φ(z)^{−25}
/// and φ(z) = 4^{1/4}√(−iz). The ratio is computed at three points and must
/// agree to 1e-8.
pub fn fricke_scalar() -> Result<FrickeScalar> {
    // |q| ≤ e^{-0.8π} at every point used, so 400 terms are plenty.
    let trunc = 400;
    let f = builtin_form("theta_delta", trunc)?;
    let theta = theta_expansion(trunc)?;
    let delta = delta_expansion(trunc)?;
    let mut ratios = Vec::new();
    let points: Vec<Complex64> = FRICKE_POINTS
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    for &z in &points {
        let image = -(z * 4.0).inv();
        let phi = Complex64::new(4f64.powf(0.25), 0.0) * (Complex64::new(0.0, -1.0) * z).sqrt();
        let lhs = eval_at(&f, image) * phi.powi(-25);
        let rhs = eval_at(&theta, z) * eval_at(&delta, z * 4.0);
        ratios.push(lhs / rhs);
    }
    let r0 = ratios[0];
    let spread = ratios
        .iter()
        .map(|r| (r - r0).norm() / r0.norm())
        .fold(0.0, f64::max);
    if spread > 1e-8 {
        return Err(Error::Convergence(format!(
            "Fricke ratio is not constant across sample points (spread {spread:.2e}); ansatz κ·θ(z)Δ(4z) fails"
        )));
    }
    Ok(FrickeScalar {
        kappa: r0,
        points,
        ratios,
        spread,
    })
}
