//! Twisted functional equation, Voronoi summation and the Salié-sum
//! rearrangement of E(x,p,a).

mod fricke;
mod kernel;

pub use fricke::{fricke_scalar, FrickeScalar, FRICKE_POINTS};
pub use kernel::{BKernel, KernelParams};

use crate::error::{invalid, Error, Result};
use crate::modarith::{
    ep, eps, inv_mod, jacobi, legendre, sa, salie_closed, salie_direct, PrimeCtx,
};
use crate::progsums::progression_e;
use crate::qseries::{builtin_form, QSeries};
use crate::summation::Neumaier;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// A form f on Γ₀(4N) together with its Fricke image f₀ (already
/// including the scalar).
#[derive(Clone, Debug)]
pub struct FrickePair {
    pub f: QSeries,
    pub f0: QSeries,
    pub level_n: u64,
    pub ell: u32,
    pub scalar: Complex64,
}

impl FrickePair {
    /// θΔ and 2^12·θ(z)Δ(4z). The scalar is recomputed numerically and
    /// must match the built-in value.
    pub fn theta_delta(trunc_f: u64, trunc_f0: u64) -> Result<Self> {
        let fs = fricke_scalar()?;
        let built = crate::qseries::THETA_DELTA_FRICKE_SCALAR as f64;
        if (fs.kappa - built).norm() > 1e-6 * built {
            return Err(Error::Convergence(format!(
                "numerical Fricke scalar {} disagrees with {built}",
                fs.kappa
            )));
        }
        Ok(Self {
            f: builtin_form("theta_delta", trunc_f)?,
            f0: builtin_form("theta_delta_fricke", trunc_f0)?,
            level_n: 1,
            ell: 12,
            scalar: fs.kappa,
        })
    }

    /// A user-supplied pair. Weights must agree and be half-integral.
    pub fn from_series(f: QSeries, f0: QSeries, scalar: Complex64) -> Result<Self> {
        if f.weight() != f0.weight() {
            return invalid("f and f0 must have the same weight");
        }
        let ell = f.weight().ell()?;
        if f.level() % 4 != 0 {
            return invalid(format!("level {} is not of the form 4N", f.level()));
        }
        Ok(Self {
            level_n: f.level() / 4,
            ell,
            f,
            f0,
            scalar,
        })
    }

    /// Same pair with both series multiplied by k.
    pub fn scaled(&self, k: i64) -> Self {
        Self {
            f: self.f.scale(k),
            f0: self.f0.scale(k),
            ..self.clone()
        }
    }
}

/// ω_q(u) = ε_q^{−(2ℓ+1)} (−ū | q).
pub fn omega(u: i64, q: u64, ell: u32) -> Result<Complex64> {
    if q == 0 || q % 2 == 0 {
        return invalid(format!("q must be odd and positive, got {q}"));
    }
    let ubar = inv_mod(u, q).ok_or_else(|| Error::InvalidArgument(format!("gcd({u}, {q}) ≠ 1")))?;
    let e = eps(q as i64)?;
    let sym = jacobi(-(ubar as i64), q) as f64;
    Ok(e.powi(-(2 * ell as i32 + 1)) * sym)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedL {
    pub value: Complex64,
    pub n_max: u64,
    /// Heuristic size of Σ_{n > n_max}: RMS of a(n) near n_max times
    /// n_max^{1−σ}/(σ−1).
    pub tail_bound: f64,
}

/// L(s, f, u/q) = Σ a(n) e_q(un) n^{−s}, truncated at n_max. Requires
/// Re s ≥ 3/2.
pub fn twisted_l(f: &QSeries, u: i64, q: u64, s: Complex64, n_max: u64) -> Result<TwistedL> {
    if s.re < 1.5 {
        return invalid(format!(
            "Re s = {} is below the convergence margin 3/2",
            s.re
        ));
    }
    if q == 0 || (u as i128).gcd(&(q as i128)) != 1 || q.gcd(&f.level()) != 1 {
        return invalid(format!(
            "need gcd(u, q) = gcd(q, level) = 1 (u={u}, q={q}, level={})",
            f.level()
        ));
    }
    if n_max > f.truncation() || n_max < 2 {
        return Err(Error::Truncation {
            required: n_max,
            available: f.truncation(),
        });
    }
    let a = f.normalized();
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    for n in 1..=n_max {
        if a[n as usize] == 0.0 {
            continue;
        }
        let term = ep(u.wrapping_mul(n as i64).rem_euclid(q as i64), q)
            * (-s * (n as f64).ln()).exp()
            * a[n as usize];
        re.add(term.re);
        im.add(term.im);
    }
    let lo = (n_max / 2).max(1);
    let rms =
        ((lo..=n_max).map(|n| a[n as usize].powi(2)).sum::<f64>() / (n_max - lo + 1) as f64).sqrt();
    let tail_bound = rms * (n_max as f64).powf(1.0 - s.re) / (s.re - 1.0);
    Ok(TwistedL {
        value: Complex64::new(re.value(), im.value()),
        n_max,
        tail_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoronoiReport {
    pub u: i64,
    pub q: u64,
    pub x: f64,
    pub m_max: u64,
    pub t_max: f64,
    /// Σ_n a(n) e_q(un) w(n/x)
    pub lhs: Complex64,
    /// ω_q(u) x/(√(4N) q) Σ_m a₀(m) e_q(−\overline{4Nu} m) B(mx/(4Nq²))
    pub rhs: Complex64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    /// Largest |a₀(m) B(y_m)| over the last 10% of the dual sum.
    pub dual_tail: f64,
}

/// Both sides of the Voronoi formula, computed independently.
pub fn voronoi_check(
    pair: &FrickePair,
    kernel: &BKernel,
    u: i64,
    q: u64,
    x: f64,
    m_max: u64,
) -> Result<VoronoiReport> {
    let four_n = 4 * pair.level_n;
    if q == 0 || q % 2 == 0 || q.gcd(&four_n) != 1 || (u as i128).gcd(&(q as i128)) != 1 {
        return invalid(format!(
            "need q odd with gcd(q, 4N·u) = 1 (u={u}, q={q}, N={})",
            pair.level_n
        ));
    }
    if !(x >= 1.0) {
        return invalid(format!("x must be ≥ 1, got {x}"));
    }
    if pair.ell as f64 != (kernel.kappa() * 2.0 + 0.5) {
        return invalid("kernel was built for a different weight");
    }
    pair.f.view().require(x)?;
    if m_max == 0 || m_max > pair.f0.truncation() {
        return Err(Error::Truncation {
            required: m_max,
            available: pair.f0.truncation(),
        });
    }
    let w = kernel.window();
    let a = pair.f.normalized();
    let mut lre = Neumaier::new();
    let mut lim = Neumaier::new();
    for n in 1..=(x.floor() as u64) {
        let wv = w.eval(n as f64 / x);
        if wv == 0.0 || a[n as usize] == 0.0 {
            continue;
        }
        let t = ep((u as i128 * n as i128).rem_euclid(q as i128) as i64, q) * (a[n as usize] * wv);
        lre.add(t.re);
        lim.add(t.im);
    }
    let lhs = Complex64::new(lre.value(), lim.value());

    let a0 = pair.f0.normalized();
    let twist = if q == 1 {
        0
    } else {
        inv_mod((four_n as i128 * u as i128).rem_euclid(q as i128) as i64, q).unwrap()
    };
    let scale = x / (4.0 * pair.level_n as f64 * (q * q) as f64);
    let ms: Vec<u64> = (1..=m_max).filter(|&m| a0[m as usize] != 0.0).collect();
    let ys: Vec<f64> = ms.iter().map(|&m| m as f64 * scale).collect();
    let bs = kernel.eval_many(&ys);
    let mut rre = Neumaier::new();
    let mut rim = Neumaier::new();
    let tail_start = (m_max as f64 * 0.9) as u64;
    let mut dual_tail = 0.0f64;
    for ((&m, &b), _) in ms.iter().zip(&bs).zip(&ys) {
        let k = (-(twist as i128) * m as i128).rem_euclid(q as i128) as i64;
        let t = ep(k, q) * (a0[m as usize] * b);
        rre.add(t.re);
        rim.add(t.im);
        if m > tail_start {
            dual_tail = dual_tail.max((a0[m as usize] * b).abs());
        }
    }
    let pref = omega(u, q, pair.ell)? * (x / ((four_n as f64).sqrt() * q as f64));
    let rhs = pref * Complex64::new(rre.value(), rim.value());
    let abs_residual = (lhs - rhs).norm();
    Ok(VoronoiReport {
        u,
        q,
        x,
        m_max,
        t_max: kernel.t_max(),
        lhs,
        rhs,
        abs_residual,
        rel_residual: abs_residual / lhs.norm(),
        dual_tail,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoronoiRefinement {
    pub steps: Vec<VoronoiReport>,
    /// The dual sum stopped changing (relative 1e-12) between the last two
    /// steps.
    pub converged: bool,
}

impl VoronoiRefinement {
    pub fn last(&self) -> &VoronoiReport {
        self.steps.last().expect("at least one step")
    }
}

/// Run [`voronoi_check`] with m_max doubling from `m_start` until the dual
/// sum stabilises or `m_cap` is reached.
pub fn voronoi_refine(
    pair: &FrickePair,
    kernel: &BKernel,
    u: i64,
    q: u64,
    x: f64,
    m_start: u64,
    m_cap: u64,
) -> Result<VoronoiRefinement> {
    let mut steps: Vec<VoronoiReport> = Vec::new();
    let mut m = m_start.max(1);
    let cap = m_cap.min(pair.f0.truncation());
    loop {
        let r = voronoi_check(pair, kernel, u, q, x, m.min(cap))?;
        let done = steps
            .last()
            .is_some_and(|prev| (prev.rhs - r.rhs).norm() <= 1e-12 * r.lhs.norm().max(1e-300));
        steps.push(r);
        if done {
            return Ok(VoronoiRefinement {
                steps,
                converged: true,
            });
        }
        if m >= cap {
            return Ok(VoronoiRefinement {
                steps,
                converged: false,
            });
        }
        m *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RearrangeReport {
    pub x: f64,
    pub p: u64,
    pub a: u64,
    pub eta: f64,
    /// Y = 4Np²/x
    pub y_param: f64,
    /// ⌊Y^{1+η}⌋: last m in the truncated sum.
    pub m_cut: u64,
    /// E(x,p,a) from bucketing.
    pub e_direct: f64,
    /// ε_p^{−2ℓ}(a|p) Y^{−1/2} Σ_{m ≤ Y^{1+η}} a₀(m) Sa_p(N̄ma) B(m/Y)
    pub main_term: f64,
    pub truncated_residual: f64,
    /// Same sum over m ≤ m_full with exact Salié values (p | m included)
    /// plus the zero-frequency term.
    pub full_value: f64,
    pub full_residual: f64,
    pub zero_frequency: f64,
    pub m_full: u64,
    /// Number of m ≤ m_cut where N̄ma ≡ 0 (mod p) and Sa_p was set to 0.
    pub degenerate_sa: u64,
}

/// The rearranged E(x,p,a) for several classes at once (E and B are
/// shared across classes). `m_full` defaults to where B falls below 1e-12.
pub fn rearranged_e_check(
    pair: &FrickePair,
    kernel: &BKernel,
    x: f64,
    p: u64,
    classes: &[u64],
    eta: f64,
    m_full: Option<u64>,
) -> Result<Vec<RearrangeReport>> {
    let ctx = PrimeCtx::with_tables(p)?;
    let n = pair.level_n;
    let y_param = 4.0 * n as f64 * (p * p) as f64 / x;
    let cut = y_param.powf(1.0 + eta);
    if !(eta > 0.0) || cut >= p as f64 {
        return Err(Error::Range(format!(
            "need η > 0 and Y^(1+η) = {cut:.3} < p = {p}"
        )));
    }
    if (4 * n) % p == 0 || classes.iter().any(|&a| a % p == 0) {
        return Err(Error::Range(format!("p = {p} must not divide 4N·a")));
    }
    let m_cut = cut.floor() as u64;
    let m_full = match m_full {
        Some(m) => m,
        None => (y_param * kernel.negligible_beyond(1e-12)).ceil() as u64,
    }
    .max(m_cut);
    if m_full > pair.f0.truncation() {
        return Err(Error::Truncation {
            required: m_full,
            available: pair.f0.truncation(),
        });
    }
    let report = progression_e(pair.f.view(), kernel.window(), x, p)?;
    let a0 = pair.f0.normalized();
    let ys: Vec<f64> = (1..=m_full).map(|m| m as f64 / y_param).collect();
    let bs = kernel.eval_many(&ys);
    let nbar = inv_mod(n as i64, p).unwrap() as i64;
    let four_nbar = inv_mod(4 * n as i64, p).unwrap() as i64;
    let eps_p = eps(p as i64)?;
    let sign_2l = eps_p.powi(-2 * pair.ell as i32).re;
    let eps_full = eps_p.powi(-(2 * pair.ell as i32 + 1));
    let inv_sqrt_y = 1.0 / y_param.sqrt();
    let zero_frequency = report.total_sum / (p as f64 * report.scale());

    let mut out = Vec::with_capacity(classes.len());
    for &a in classes {
        let a = a % p;
        let chi_a = legendre(a as i64, &ctx) as f64;
        let mut main = Neumaier::new();
        let mut degenerate = 0;
        for m in 1..=m_cut {
            let arg = (nbar as i128 * m as i128 * a as i128).rem_euclid(p as i128) as i64;
            if arg == 0 {
                degenerate += 1;
            }
            main.add(a0[m as usize] * sa(arg, &ctx).re * bs[(m - 1) as usize]);
        }
        let main_term = sign_2l * chi_a * inv_sqrt_y * main.value();

        let sal_zero = salie_direct(0, a as i64, &ctx);
        let mut full_re = Neumaier::new();
        for m in 1..=m_full {
            let am = a0[m as usize];
            if am == 0.0 {
                continue;
            }
            let v = (four_nbar as i128 * m as i128).rem_euclid(p as i128) as i64;
            let sal = if v == 0 {
                sal_zero
            } else {
                salie_closed(v, a as i64, &ctx)?
            };
            full_re.add(am * (eps_full * sal).re * bs[(m - 1) as usize]);
        }
        let full_value = zero_frequency + inv_sqrt_y * full_re.value();
        let e_direct = report.e_values[a as usize];
        out.push(RearrangeReport {
            x,
            p,
            a,
            eta,
            y_param,
            m_cut,
            e_direct,
            main_term,
            truncated_residual: (e_direct - main_term).abs(),
            full_value,
            full_residual: (e_direct - full_value).abs(),
            zero_frequency,
            m_full,
            degenerate_sa: degenerate,
        });
    }
    Ok(out)
}
