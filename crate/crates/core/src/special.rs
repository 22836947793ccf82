//! Complex log-Gamma.
//!
//! The Voronoi kernel needs Γ(κ+σ+it)/Γ(1+κ−σ−it) for |t| in the
//! thousands, far beyond where Γ itself is representable, so everything is
//! done on the log scale.

use num_complex::Complex64;
use std::f64::consts::PI;

// B_{2k} / (2k (2k-1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const SHIFT_RADIUS: f64 = 15.0;

/// ln Γ(z), correct modulo 2πi (which is all that exp() of it needs).
///
/// Stirling's series after shifting z to |z| ≥ 15; the left half-plane goes
/// through the reflection formula. Relative accuracy is close to machine
/// precision in the real part and ~|z|·1e-16 absolute in the phase.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let s = (Complex64::from(PI) * z).sin();
        return Complex64::from(PI.ln()) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < SHIFT_RADIUS {
        shift += z.ln();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

/// ln Γ for real positive arguments.
pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re
}
