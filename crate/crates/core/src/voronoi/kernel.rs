//! The Voronoi kernel
//!
//!   B(y) = ∫ ŵ(1−σ−it) · Γ(σ+it+κ)/Γ(1−σ−it+κ) · (4π²y)^{−σ−it} dt,
//!
//! with κ = (ℓ − 1/2)/2 and ŵ the Mellin transform of the window. The
//! derivation from the twisted functional equation is written out in the
//! repository docs. On σ = 1/2 the Γ-ratio has modulus one, so the
//! integrand decays exactly as fast as ŵ, and a uniform trapezoid rule in t
//! is spectrally accurate: by Poisson summation its error is a sum of
//! B(y·e^{±2πk/h}) terms, which are negligible for h ≤ 0.1.

use crate::error::{invalid, Error, Result};
use crate::special::ln_gamma;
use crate::windows::{mellin_line, Window};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Contour abscissa.
    pub sigma: f64,
    /// Trapezoid step in t.
    pub h: f64,
    /// Stop extending the t-range once a block of this length contributes
    /// less than `tail_tol` in absolute value. The Mellin values bottom out
    /// near 1e-15 per node past |t| ≈ 1500, so much below 1e-12 per block
    /// is unreachable.
    pub block: f64,
    pub tail_tol: f64,
    /// Fixed t-range; None means adaptive.
    pub t_max: Option<f64>,
    /// Hard cap on the adaptive range.
    pub t_cap: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            sigma: 0.5,
            h: 0.1,
            block: 100.0,
            tail_tol: 1e-11,
            t_max: None,
            t_cap: 20_000.0,
        }
    }
}

/// Tabulated integrand of B on t = 0, h, 2h, ..., ready for evaluation at
/// any y. Immutable after construction.
#[derive(Debug)]
pub struct BKernel {
    params: KernelParams,
    kappa: f64,
    window: Window,
    /// H(t_k) = ŵ(1−σ−it_k) Γ(σ+it_k+κ)/Γ(1−σ−it_k+κ).
    values: Vec<Complex64>,
    /// The same integrand at −t_k, computed independently on first use.
    negative: OnceLock<Vec<Complex64>>,
    /// Absolute bound on what the last block added.
    last_block: f64,
}

fn gamma_ratio(s: Complex64, kappa: f64) -> Complex64 {
    (ln_gamma(s + kappa) - ln_gamma(Complex64::new(1.0 + kappa, 0.0) - s)).exp()
}

fn integrand_block(
    w: &Window,
    sigma: f64,
    kappa: f64,
    h: f64,
    k0: usize,
    count: usize,
    sign: f64,
) -> Vec<Complex64> {
    let t0 = sign * k0 as f64 * h;
    let s0 = Complex64::new(1.0 - sigma, -t0);
    let mel = mellin_line(w, s0, -sign * h, count - 1);
    mel.iter()
        .enumerate()
        .map(|(j, m)| {
            let t = sign * (k0 + j) as f64 * h;
            m * gamma_ratio(Complex64::new(sigma, t), kappa)
        })
        .collect()
}

impl BKernel {
    /// Kernel for a form of weight ℓ + 1/2 with default parameters.
    pub fn new(w: &Window, ell: u32) -> Result<Self> {
        Self::with_params(w, ell, KernelParams::default())
    }

    pub fn with_params(w: &Window, ell: u32, params: KernelParams) -> Result<Self> {
        if ell == 0 {
            return invalid("ℓ must be ≥ 1");
        }
        let kappa = (ell as f64 - 0.5) / 2.0;
        if !(params.sigma > -kappa && params.h > 0.0 && params.block > 0.0) {
            return invalid(format!("bad kernel parameters {params:?}"));
        }
        let per_block = (params.block / params.h).round().max(1.0) as usize;
        let mut values = Vec::new();
        let mut last_block = f64::INFINITY;
        match params.t_max {
            Some(t_max) => {
                let count = (t_max / params.h).round() as usize + 1;
                values = integrand_block(w, params.sigma, kappa, params.h, 0, count, 1.0);
                last_block = 2.0
                    * params.h
                    * values
                        .iter()
                        .rev()
                        .take(per_block)
                        .map(|z| z.norm())
                        .sum::<f64>();
            }
            None => {
                while last_block > params.tail_tol {
                    if values.len() as f64 * params.h > params.t_cap {
                        return Err(Error::Convergence(format!(
                            "B kernel integrand still {last_block:.2e} per block at |t| = {}",
                            params.t_cap
                        )));
                    }
                    let block = integrand_block(
                        w,
                        params.sigma,
                        kappa,
                        params.h,
                        values.len(),
                        per_block,
                        1.0,
                    );
                    last_block = 2.0 * params.h * block.iter().map(|z| z.norm()).sum::<f64>();
                    values.extend(block);
                }
            }
        }
        Ok(Self {
            params,
            kappa,
            window: *w,
            values,
            negative: OnceLock::new(),
            last_block,
        })
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Largest |t| in the quadrature.
    pub fn t_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.params.h
    }

    /// Contribution bound of the final block, times (4π²y)^{−σ}.
    pub fn tail_estimate(&self) -> f64 {
        self.last_block
    }

    /// B(y) for y > 0, using H(−t) = conj H(t).
    pub fn eval(&self, y: f64) -> f64 {
        assert!(y > 0.0, "B(y) needs y > 0");
        let l = (4.0 * PI * PI * y).ln();
        let h = self.params.h;
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        let step = Complex64::from_polar(1.0, -h * l);
        let mut phase = Complex64::new(1.0, 0.0);
        for (k, v) in self.values.iter().enumerate().skip(1) {
            if k % 256 == 0 {
                phase = Complex64::from_polar(1.0, -(k as f64) * h * l);
            } else {
                phase *= step;
            }
            let term = (v * phase).re;
            let t = acc + term;
            comp += if acc.abs() >= term.abs() {
                (acc - t) + term
            } else {
                (term - t) + acc
            };
            acc = t;
        }
        let total = self.values[0].re + 2.0 * (acc + comp);
        h * total * (-self.params.sigma * l).exp()
    }

    /// B(y) from both halves of the t-line with no symmetry assumed.
    /// The imaginary part measures the numerical asymmetry.
    pub fn eval_two_sided(&self, y: f64) -> Complex64 {
        let neg = self.negative.get_or_init(|| {
            integrand_block(
                &self.window,
                self.params.sigma,
                self.kappa,
                self.params.h,
                0,
                self.values.len(),
                -1.0,
            )
        });
        let l = (4.0 * PI * PI * y).ln();
        let h = self.params.h;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, (vp, vn)) in self.values.iter().zip(neg).enumerate() {
            let t = k as f64 * h;
            let plus = vp * Complex64::from_polar(1.0, -t * l);
            if k == 0 {
                acc += plus;
            } else {
                acc += plus + vn * Complex64::from_polar(1.0, t * l);
            }
        }
        acc * h * (-self.params.sigma * l).exp()
    }

    /// B at many points. Order is preserved.
    pub fn eval_many(&self, ys: &[f64]) -> Vec<f64> {
        use rayon::prelude::*;
        ys.par_iter().map(|&y| self.eval(y)).collect()
    }

    /// Smallest y = 2^k (k ≥ 0) beyond which |B| stays below `tol` on a
    /// doubling grid (checked at y, 2y, 4y).
    pub fn negligible_beyond(&self, tol: f64) -> f64 {
        let mut y = 1.0;
        while y < 1e12 {
            if (0..3).all(|j| self.eval(y * f64::from(1 << j)).abs() < tol) {
                return y;
            }
            y *= 2.0;
        }
        y
    }
}
