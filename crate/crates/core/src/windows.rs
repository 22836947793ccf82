//! Smooth weight functions supported in (0,1) and their transforms.

use crate::error::{invalid, Result};
use crate::quadrature::adaptive_simpson;
use crate::summation::Neumaier;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

/// Below this value a window is treated as exactly zero when choosing
/// quadrature ranges. exp(-745) is already subnormal.
const NEGLIGIBLE: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowKind {
    /// w₀(t) = exp(1 − 1/(4t(1−t))) on (0,1).
    StandardBump,
    /// w₀ rescaled to (a,b) ⊆ (0,1).
    ScaledBump { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    kind: WindowKind,
    l2sq: f64,
}

#[inline]
fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (4.0 * u * (1.0 - u))).exp()
    }
}

impl Window {
    pub fn standard_bump() -> Window {
        let mut w = Window {
            kind: WindowKind::StandardBump,
            l2sq: f64::NAN,
        };
        w.l2sq = l2_norm_sq(&w).expect("the standard bump integrates without trouble");
        w
    }

    pub fn scaled_bump(a: f64, b: f64) -> Result<Window> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= 1.0) {
            return invalid(format!("scaled bump needs 0 ≤ a < b ≤ 1, got ({a}, {b})"));
        }
        let mut w = Window {
            kind: WindowKind::ScaledBump { a, b },
            l2sq: f64::NAN,
        };
        w.l2sq = l2_norm_sq(&w)?;
        Ok(w)
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    /// ‖w‖₂², computed once at construction.
    pub fn l2sq(&self) -> f64 {
        self.l2sq
    }

    /// Support endpoints (a,b).
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            WindowKind::StandardBump => (0.0, 1.0),
            WindowKind::ScaledBump { a, b } => (a, b),
        }
    }

    /// Sub-interval outside which w < 1e-300.
    pub fn effective_support(&self) -> (f64, f64) {
        // Solve exp(1 − 1/(4u(1−u))) = NEGLIGIBLE for the smaller root u.
        let c = 1.0 - NEGLIGIBLE.ln();
        let u = 0.5 * (1.0 - (1.0 - 1.0 / c).sqrt());
        let (a, b) = self.support();
        (a + u * (b - a), b - u * (b - a))
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            WindowKind::StandardBump => bump(t),
            WindowKind::ScaledBump { a, b } => bump((t - a) / (b - a)),
        }
    }

    /// Flatness parameter c of the edge behaviour w ≈ exp(−c/dv) in the
    /// logarithmic variable v = −ln t, at the steeper edge. It governs how
    /// fast Fourier transforms in v decay.
    fn log_edge_parameter(&self) -> f64 {
        let (a, b) = self.support();
        (b - a) / (4.0 * b)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            WindowKind::StandardBump => f.write_str("standard"),
            WindowKind::ScaledBump { a, b } => write!(f, "{a},{b}"),
        }
    }
}

/// Parses `standard` or `a,b`.
impl FromStr for Window {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Window> {
        let s = s.trim();
        if s == "standard" {
            return Ok(Window::standard_bump());
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if let [a, b] = parts.as_slice() {
            if let (Ok(a), Ok(b)) = (a.parse::<f64>(), b.parse::<f64>()) {
                return Window::scaled_bump(a, b);
            }
        }
        invalid(format!("window must be `standard` or `a,b`, got `{s}`"))
    }
}

/// ∫₀¹ w(t)² dt by adaptive Simpson, absolute tolerance 1e-10.
pub fn l2_norm_sq(w: &Window) -> Result<f64> {
    let (a, b) = w.support();
    adaptive_simpson(|t| w.eval(t).powi(2), a, b, 1e-10, 50)
}

/// Step and node count for the trapezoid rule in v = −ln t that resolves
/// frequencies up to `max_freq`.
fn log_grid(w: &Window, max_freq: f64) -> (f64, f64, usize) {
    let (lo, hi) = w.effective_support();
    let v_lo = -hi.ln();
    let v_hi = -lo.max(f64::MIN_POSITIVE).ln();
    // Aliasing error ~ exp(−√(2c ω)); ask for e^{-40}.
    let omega = max_freq.abs() + 800.0 / w.log_edge_parameter();
    let h = TAU / omega;
    let n = ((v_hi - v_lo) / h).ceil() as usize + 1;
    (v_lo, h, n)
}

/// Mellin transform ∫₀¹ w(t) t^{s−1} dt.
///
/// Evaluated as ∫ w(e^{−v}) e^{−vs} dv with the trapezoid rule, which is
/// spectrally accurate here because the integrand is smooth and flat at
/// both ends.
pub fn mellin(w: &Window, s: Complex64) -> Complex64 {
    let (v_lo, h, n) = log_grid(w, s.im);
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    for j in 0..n {
        let v = v_lo + j as f64 * h;
        let wv = w.eval((-v).exp());
        if wv == 0.0 {
            continue;
        }
        let z = (-s * v).exp() * wv;
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value()) * h
}

/// Mellin transform along a vertical line: ŵ(s0 + i·k·dt) for k = 0..count.
///
/// Shares one grid across all points and advances the oscillatory factor
/// by rotation, re-synchronising periodically to keep rounding bounded.
pub fn mellin_line(w: &Window, s0: Complex64, dt: f64, count: usize) -> Vec<Complex64> {
    use rayon::prelude::*;
    let max_freq = s0.im.abs() + dt.abs() * count as f64;
    let (v_lo, h, n) = log_grid(w, max_freq);
    let mut nodes = Vec::with_capacity(n);
    for j in 0..n {
        let v = v_lo + j as f64 * h;
        let wv = w.eval((-v).exp());
        if wv != 0.0 {
            nodes.push((v, (-s0 * v).exp() * (wv * h)));
        }
    }
    const RESYNC: usize = 128;
    (0..=count)
        .into_par_iter()
        .map(|k| {
            let freq = -(k as f64) * dt;
            let mut acc_re = Neumaier::new();
            let mut acc_im = Neumaier::new();
            let mut rot = Complex64::new(1.0, 0.0);
            let mut phase = Complex64::new(1.0, 0.0);
            for (idx, &(v, base)) in nodes.iter().enumerate() {
                if idx % RESYNC == 0 {
                    let (s, c) = (freq * v).sin_cos();
                    phase = Complex64::new(c, s);
                    if idx + 1 < nodes.len() {
                        let (s, c) = (freq * (nodes[idx + 1].0 - v)).sin_cos();
                        rot = Complex64::new(c, s);
                    }
                }
                let z = base * phase;
                acc_re.add(z.re);
                acc_im.add(z.im);
                phase *= rot;
            }
            Complex64::new(acc_re.value(), acc_im.value())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSum {
    /// Σ_{n ≡ a (p)} n^{−α} w(n/x)
    pub value: f64,
    /// x^{1−α}/p
    pub reference: f64,
    pub ratio: f64,
}

/// Σ_{n ≡ a (mod p), n ≥ 1} n^{−α} w(n/x), with its ratio to x^{1−α}/p.
pub fn power_sum(alpha: f64, x: f64, p: u64, a: u64, w: &Window) -> Result<PowerSum> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return invalid(format!("power_sum needs 0 < α < 1/2, got {alpha}"));
    }
    if p == 0 || a >= p {
        return invalid(format!("need 0 ≤ a < p, got a={a}, p={p}"));
    }
    let (_, hi) = w.support();
    let n_max = (hi * x).floor() as u64;
    let mut acc = Neumaier::new();
    let mut n = if a == 0 { p } else { a };
    while n <= n_max {
        let nf = n as f64;
        acc.add(nf.powf(-alpha) * w.eval(nf / x));
        n += p;
    }
    let reference = x.powf(1.0 - alpha) / p as f64;
    let value = acc.value();
    Ok(PowerSum {
        value,
        reference,
        ratio: value / reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre_composite;

    #[test]
    fn standard_bump_values() {
        let w = Window::standard_bump();
        assert_eq!(w.eval(0.5), 1.0);
        assert_eq!(w.eval(0.0), 0.0);
        assert_eq!(w.eval(1.0), 0.0);
        assert_eq!(w.eval(-0.3), 0.0);
        assert!((w.eval(0.25) - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn values_in_unit_interval() {
        let w = Window::scaled_bump(0.2, 0.9).unwrap();
        for k in 0..=10_000 {
            let t = k as f64 / 10_000.0;
            let v = w.eval(t);
            assert!((0.0..=1.0).contains(&v));
            if !(0.2..0.9).contains(&t) {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn l2_norm_two_schemes() {
        let w = Window::standard_bump();
        let gl = gauss_legendre_composite(|t| w.eval(t).powi(2), 0.0, 1.0, 20, 64);
        assert!(w.l2sq() > 0.0 && w.l2sq() < 1.0);
        assert!((w.l2sq() - gl).abs() < 1e-10, "{} vs {}", w.l2sq(), gl);
        let narrow = Window::scaled_bump(0.25, 0.75).unwrap();
        assert!(narrow.l2sq() < w.l2sq());
        assert!((narrow.l2sq() - 0.5 * w.l2sq()).abs() < 1e-10);
    }

    #[test]
    fn scaled_bump_validation() {
        assert!(Window::scaled_bump(0.5, 0.5).is_err());
        assert!(Window::scaled_bump(-0.1, 0.5).is_err());
        assert!(Window::scaled_bump(0.2, 1.5).is_err());
        assert!(Window::scaled_bump(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn parse_window_specs() {
        assert_eq!(
            "standard".parse::<Window>().unwrap().kind(),
            WindowKind::StandardBump
        );
        assert_eq!(
            "0.25,0.75".parse::<Window>().unwrap().support(),
            (0.25, 0.75)
        );
        assert!("0.75,0.25".parse::<Window>().is_err());
        assert!("wide".parse::<Window>().is_err());
    }

    #[test]
    fn mellin_at_one_is_the_mass() {
        let w = Window::standard_bump();
        let mass = adaptive_simpson(|t| w.eval(t), 0.0, 1.0, 1e-13, 50).unwrap();
        let m = mellin(&w, Complex64::new(1.0, 0.0));
        assert!((m.re - mass).abs() < 1e-12 && m.im.abs() < 1e-14);
    }

    #[test]
    fn mellin_conjugate_symmetry_and_decay() {
        let w = Window::standard_bump();
        let s = Complex64::new(0.7, 13.0);
        assert!((mellin(&w, s.conj()) - mellin(&w, s).conj()).norm() < 1e-14);
        let m1 = mellin(&w, Complex64::new(1.0, 0.0)).norm();
        // Decay is super-polynomial but not fast at small height: the ratio
        // is 1.35e-3 at Im s = 50 and 1.0e-4 at Im s = 100.
        let m50 = mellin(&w, Complex64::new(1.0, 50.0)).norm();
        let m100 = mellin(&w, Complex64::new(1.0, 100.0)).norm();
        assert!(m50 < m1 * 1.5e-3, "{m50} vs {m1}");
        assert!(m100 < m1 * 1.1e-4, "{m100} vs {m1}");
        assert!((m50 - 8.17345048727e-4).abs() < 1e-12);
    }

    #[test]
    fn mellin_against_direct_quadrature() {
        for w in [
            Window::standard_bump(),
            Window::scaled_bump(0.25, 0.75).unwrap(),
        ] {
            for s in [
                Complex64::new(0.3, 2.0),
                Complex64::new(0.7, -2.0),
                Complex64::new(2.5, 20.0),
            ] {
                let direct =
                    |f: &dyn Fn(f64) -> f64| gauss_legendre_composite(f, 0.0, 1.0, 20, 400);
                let re = direct(&|t| w.eval(t) * (t.ln() * (s - 1.0)).exp().re);
                let im = direct(&|t| w.eval(t) * (t.ln() * (s - 1.0)).exp().im);
                let m = mellin(&w, s);
                assert!(
                    (m - Complex64::new(re, im)).norm() < 1e-11,
                    "{w} s={s}: {m} vs {re}+{im}i"
                );
            }
        }
    }

    #[test]
    fn mellin_line_matches_pointwise() {
        let w = Window::standard_bump();
        let s0 = Complex64::new(0.5, 0.0);
        let line = mellin_line(&w, s0, -0.5, 400);
        for k in [0usize, 1, 17, 200, 400] {
            let p = mellin(&w, s0 + Complex64::new(0.0, -0.5 * k as f64));
            assert!((line[k] - p).norm() < 1e-13 * (1.0 + p.norm()), "k={k}");
        }
    }

    #[test]
    fn finite_differences_stay_bounded() {
        let w = Window::standard_bump();
        let n = 10_000;
        let h = 1.0 / n as f64;
        let vals: Vec<f64> = (0..=n).map(|k| w.eval(k as f64 * h)).collect();
        let mut diff = vals.clone();
        for order in 1..=4 {
            diff = diff.windows(2).map(|p| (p[1] - p[0]) / h).collect();
            let max = diff.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            // Derivatives of w₀ are modest; a jump at the edges would give ~1/h^order.
            assert!(max < 10f64.powi(2 * order), "order {order}: {max}");
        }
    }

    #[test]
    fn power_sum_basics() {
        let w = Window::standard_bump();
        assert_eq!(power_sum(0.2, 10.0, 31, 20, &w).unwrap().value, 0.0);
        let ps = power_sum(0.3, 1000.0, 31, 1, &w).unwrap();
        // Reversed accumulation order as an independent loop.
        let mut ns: Vec<u64> = (0..)
            .map(|k| 1 + 31 * k)
            .take_while(|&n| n < 1000)
            .collect();
        ns.reverse();
        let direct: f64 = ns
            .iter()
            .map(|&n| (n as f64).powf(-0.3) * w.eval(n as f64 / 1000.0))
            .sum();
        assert!((ps.value - direct).abs() < 1e-12 * direct.abs());
        assert!(power_sum(0.6, 1000.0, 31, 1, &w).is_err());
    }

    #[test]
    fn power_sum_monotone_in_alpha() {
        let w = Window::standard_bump();
        let mut prev = f64::INFINITY;
        for k in 1..10 {
            let v = power_sum(k as f64 * 0.05, 5000.0, 101, 7, &w)
                .unwrap()
                .value;
            assert!(v <= prev);
            prev = v;
        }
    }
}
