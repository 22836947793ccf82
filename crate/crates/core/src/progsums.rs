//! Sums of normalized coefficients over residue classes modulo a prime:
//! E(x,p,a), its second and fourth moments, and the c_f estimate.

use crate::error::{invalid, Error, Result};
use crate::modarith::{legendre, PrimeCtx};
use crate::qseries::CoeffView;
use crate::summation::Neumaier;
use crate::windows::Window;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Minimum number of indices per partition of the bucketing pass. The
/// partition depends only on (x, p), never on the thread count, so results
/// are reproducible bit for bit.
const MIN_CHUNK: u64 = 1 << 16;

/// Indices n ≥ 1 with w(n/x) possibly nonzero.
fn index_range(w: &Window, x: f64) -> (u64, u64) {
    let (a, b) = w.support();
    let lo = ((a * x).floor() as u64).max(1);
    let hi = (b * x).ceil().min(x.floor()) as u64;
    (lo, hi)
}

/// Per-class compensated sums of `term(a(n), w(n/x))`, with K outputs per
/// term, accumulated over a fixed partition of the index range.
pub(crate) fn bucket_sums<const K: usize, F>(
    f: CoeffView<'_>,
    w: &Window,
    x: f64,
    p: u64,
    term: F,
) -> Vec<[f64; K]>
where
    F: Fn(f64, f64) -> [f64; K] + Sync,
{
    let (lo, hi) = index_range(w, x);
    let p_us = p as usize;
    if lo > hi {
        return vec![[0.0; K]; p_us];
    }
    let chunk = MIN_CHUNK.max(8 * p);
    let starts: Vec<u64> = (lo..=hi).step_by(chunk as usize).collect();
    let partials: Vec<Vec<[Neumaier; K]>> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + chunk - 1).min(hi);
            let mut acc = vec![[Neumaier::new(); K]; p_us];
            let mut r = (start % p) as usize;
            for n in start..=end {
                let wv = w.eval(n as f64 / x);
                let an = f.a[n as usize];
                if wv != 0.0 && an != 0.0 {
                    let vals = term(an, wv);
                    for (slot, v) in acc[r].iter_mut().zip(vals) {
                        slot.add(v);
                    }
                }
                r += 1;
                if r == p_us {
                    r = 0;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![[Neumaier::new(); K]; p_us];
    for part in &partials {
        for (t, q) in total.iter_mut().zip(part) {
            for k in 0..K {
                t[k].merge(&q[k]);
            }
        }
    }
    total
        .iter()
        .map(|t| std::array::from_fn(|k| t[k].value()))
        .collect()
}

fn check_inputs(f: CoeffView<'_>, x: f64, p: u64) -> Result<PrimeCtx> {
    if !(x.is_finite() && x >= 1.0) {
        return invalid(format!("x must be ≥ 1, got {x}"));
    }
    f.require(x)?;
    let ctx = PrimeCtx::with_tables(p)?;
    if f.level % p == 0 {
        return invalid(format!("p = {p} divides the level {}", f.level));
    }
    Ok(ctx)
}

/// N with level = 4N; forms whose level is not divisible by 4 use N = level.
fn level_n(level: u64) -> u64 {
    if level % 4 == 0 {
        level / 4
    } else {
        level
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressionReport {
    pub x: f64,
    pub p: u64,
    pub level: u64,
    /// E(x,p,a) for a = 0..p−1.
    pub e_values: Vec<f64>,
    /// (1/p) Σ_{a ≠ 0} E².
    pub m2: f64,
    /// (2/p) Σ_{(a/p)=1} E(N μ₊ a)⁴ with μ₊ = 1.
    pub m4_plus: f64,
    /// (2/p) Σ_{(a/p)=1} E(N μ₋ a)⁴ with μ₋ the least non-residue.
    pub m4_minus: f64,
    /// (m4₊ + m4₋)/2 = (1/p) Σ_{a ≠ 0} E⁴.
    pub m4: f64,
    /// (1/p) Σ_{a ≠ 0} |E|.
    pub abs_m1: f64,
    /// Σ_n a(n) w(n/x).
    pub total_sum: f64,
    /// Σ_{p | n} a(n) w(n/x).
    pub class0_sum: f64,
    pub mu_plus: u64,
    pub mu_minus: u64,
}

impl ProgressionReport {
    /// √(x/p), the normalisation of E.
    pub fn scale(&self) -> f64 {
        (self.x / self.p as f64).sqrt()
    }

    /// Unnormalised class sum Σ_{n ≡ a} a(n) w(n/x).
    pub fn class_sum(&self, a: u64) -> f64 {
        self.e_values[(a % self.p) as usize] * self.scale()
    }

    /// log p / log x.
    pub fn p_exponent(&self) -> f64 {
        (self.p as f64).ln() / self.x.ln()
    }
}

/// Moments of E over invertible classes. μ₊ and μ₋ pick the
/// representatives for the residue / non-residue halves.
pub fn moments_from_e(
    e: &[f64],
    p: u64,
    n: u64,
    mu_plus: u64,
    mu_minus: u64,
) -> Result<(f64, f64, f64, f64)> {
    let ctx = PrimeCtx::new(p)?;
    if legendre(mu_plus as i64, &ctx) != 1 || legendre(mu_minus as i64, &ctx) != -1 {
        return invalid(format!(
            "μ₊={mu_plus} must be a residue and μ₋={mu_minus} a non-residue mod {p}"
        ));
    }
    let pf = p as f64;
    let mut s2 = Neumaier::new();
    let mut s1 = Neumaier::new();
    for &v in &e[1..] {
        s2.add(v * v);
        s1.add(v.abs());
    }
    let mut plus = Neumaier::new();
    let mut minus = Neumaier::new();
    for a in 1..p {
        if legendre(a as i64, &ctx) != 1 {
            continue;
        }
        let rp = ((n as u128 * mu_plus as u128 * a as u128) % p as u128) as usize;
        let rm = ((n as u128 * mu_minus as u128 * a as u128) % p as u128) as usize;
        plus.add(e[rp].powi(4));
        minus.add(e[rm].powi(4));
    }
    let m2 = s2.value() / pf;
    let m4p = 2.0 * plus.value() / pf;
    let m4m = 2.0 * minus.value() / pf;
    Ok((m2, m4p, m4m, s1.value() / pf))
}

/// E(x,p,a) = (1/√(x/p)) Σ_{n ≡ a (p)} a(n) w(n/x) for every class, in one
/// bucketing pass, plus the derived moments.
pub fn progression_e(f: CoeffView<'_>, w: &Window, x: f64, p: u64) -> Result<ProgressionReport> {
    let ctx = check_inputs(f, x, p)?;
    let buckets = bucket_sums::<1, _>(f, w, x, p, |a, wv| [a * wv]);
    let class_sums: Vec<f64> = buckets.iter().map(|b| b[0]).collect();
    let total_sum = class_sums.iter().copied().collect::<Neumaier>().value();
    let scale = (x / p as f64).sqrt();
    let e_values: Vec<f64> = class_sums.iter().map(|s| s / scale).collect();
    let n = level_n(f.level);
    let mu_minus = ctx.least_non_residue();
    let (m2, m4_plus, m4_minus, abs_m1) = moments_from_e(&e_values, p, n, 1, mu_minus)?;
    Ok(ProgressionReport {
        x,
        p,
        level: f.level,
        class0_sum: class_sums[0],
        e_values,
        m2,
        m4_plus,
        m4_minus,
        m4: 0.5 * (m4_plus + m4_minus),
        abs_m1,
        total_sum,
        mu_plus: 1,
        mu_minus,
    })
}

/// Per-class sums used by the sign surveys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSums {
    pub x: f64,
    pub p: u64,
    /// Σ a(n) w(n/x)
    pub s1: Vec<f64>,
    /// Σ a(n)² w(n/x)²
    pub s2: Vec<f64>,
    /// Σ a(n)⁴ w(n/x)⁴
    pub s4: Vec<f64>,
    /// Σ |a(n)| w(n/x)
    pub abs1: Vec<f64>,
}

pub fn class_sums(f: CoeffView<'_>, w: &Window, x: f64, p: u64) -> Result<ClassSums> {
    check_inputs(f, x, p)?;
    let b = bucket_sums::<4, _>(f, w, x, p, |a, wv| {
        let t = a * wv;
        let t2 = t * t;
        [t, t2, t2 * t2, t.abs()]
    });
    Ok(ClassSums {
        x,
        p,
        s1: b.iter().map(|v| v[0]).collect(),
        s2: b.iter().map(|v| v[1]).collect(),
        s4: b.iter().map(|v| v[2]).collect(),
        abs1: b.iter().map(|v| v[3]).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfEstimate {
    pub xs: Vec<f64>,
    /// Σ a(n)² w(n/x)² / (‖w‖² x) at each x.
    pub estimates: Vec<f64>,
    /// Linear extrapolation in 1/ln x through the last two points.
    pub extrapolated: f64,
    /// |e_{k+1} − e_k| / e_k for successive sample points.
    pub relative_changes: Vec<f64>,
}

pub fn estimate_cf(f: CoeffView<'_>, w: &Window, xs: &[f64]) -> Result<CfEstimate> {
    if xs.is_empty() {
        return invalid("estimate_cf needs at least one x");
    }
    let mut estimates = Vec::with_capacity(xs.len());
    for &x in xs {
        if !(x.is_finite() && x >= 1.0) {
            return invalid(format!("x must be ≥ 1, got {x}"));
        }
        f.require(x)?;
        let b = bucket_sums::<1, _>(f, w, x, 1, |a, wv| [(a * wv).powi(2)]);
        estimates.push(b[0][0] / (w.l2sq() * x));
    }
    if estimates.iter().any(|&e| e <= 0.0) {
        return Err(Error::Range(
            "c_f estimate is not positive (zero form?)".into(),
        ));
    }
    let extrapolated = match xs.len() {
        1 => estimates[0],
        k => {
            let (u1, u2) = (1.0 / xs[k - 2].ln(), 1.0 / xs[k - 1].ln());
            let (e1, e2) = (estimates[k - 2], estimates[k - 1]);
            (e2 * u1 - e1 * u2) / (u1 - u2)
        }
    };
    let relative_changes = estimates
        .windows(2)
        .map(|e| ((e[1] - e[0]) / e[0]).abs())
        .collect();
    Ok(CfEstimate {
        xs: xs.to_vec(),
        estimates,
        extrapolated,
        relative_changes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// (x, |Σ a(n) w(n/x)|)
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope of log|S| against log x.
    pub slope: f64,
}

/// Total smoothed sums Σ a(n) w(n/x) at several x.
pub fn total_sum_decay(f: CoeffView<'_>, w: &Window, xs: &[f64]) -> Result<DecayReport> {
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        f.require(x)?;
        let b = bucket_sums::<1, _>(f, w, x, 1, |a, wv| [a * wv]);
        points.push((x, b[0][0].abs()));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(x, s)| (x.ln(), s.ln()))
        .collect();
    Ok(DecayReport {
        points,
        slope: least_squares_slope(&logs),
    })
}

/// Slope of the least-squares line through (u, v) points; NaN for fewer
/// than two points.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mu = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mu).powi(2)).sum();
    cov / var
}

/// √(x/p)·E(x,p,a), i.e. the raw class sum, and its ratio to p.
pub fn class_sum_residual(
    f: CoeffView<'_>,
    w: &Window,
    x: f64,
    p: u64,
    a: u64,
) -> Result<(f64, f64)> {
    let report = progression_e(f, w, x, p)?;
    let value = report.class_sum(a);
    Ok((value, value / p as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTolerances {
    /// Accept m2 / (c_f‖w‖²) within 1 ± this.
    pub m2_rel: f64,
    /// Accept m4± / (12 (c_f‖w‖²)²) up to this.
    pub m4_max: f64,
}

impl Default for MomentTolerances {
    fn default() -> Self {
        Self {
            m2_rel: 0.25,
            m4_max: 1.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVerdict {
    pub cf: f64,
    pub l2sq: f64,
    pub m2_ratio: f64,
    pub m4_plus_ratio: f64,
    pub m4_minus_ratio: f64,
    pub p_exponent: f64,
    /// 1/2 < log p / log x < 4/7.
    pub in_range: bool,
    pub m2_pass: bool,
    pub m4_pass: bool,
}

/// Compare the moments with c_f‖w‖² and 12(c_f‖w‖²)².
pub fn moment_verdict(
    report: &ProgressionReport,
    cf: f64,
    w: &Window,
    tol: MomentTolerances,
) -> Result<MomentVerdict> {
    if !(cf > 0.0) {
        return invalid(format!("c_f must be positive, got {cf}"));
    }
    let main = cf * w.l2sq();
    let m2_ratio = report.m2 / main;
    let m4_plus_ratio = report.m4_plus / (12.0 * main * main);
    let m4_minus_ratio = report.m4_minus / (12.0 * main * main);
    let e = report.p_exponent();
    let in_range = (report.p as f64) < report.x && e > 0.5 && e < 4.0 / 7.0;
    Ok(MomentVerdict {
        cf,
        l2sq: w.l2sq(),
        m2_ratio,
        m4_plus_ratio,
        m4_minus_ratio,
        p_exponent: e,
        in_range,
        m2_pass: in_range && (m2_ratio - 1.0).abs() <= tol.m2_rel,
        m4_pass: in_range && m4_plus_ratio <= tol.m4_max && m4_minus_ratio <= tol.m4_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderCheck {
    pub abs_m1: f64,
    /// m2^{3/2} / m4^{1/2}
    pub lower_bound: f64,
    pub holds: bool,
}

/// Hölder: (1/p)Σ|E| ≥ m2^{3/2} m4^{−1/2}, with m4 = (1/p)Σ E⁴.
pub fn holder_abs_first_moment(report: &ProgressionReport) -> Result<HolderCheck> {
    if report.m4 <= 0.0 {
        return invalid("fourth moment is zero; Hölder bound undefined");
    }
    let lower_bound = report.m2.powf(1.5) / report.m4.sqrt();
    Ok(HolderCheck {
        abs_m1: report.abs_m1,
        lower_bound,
        holds: report.abs_m1 >= lower_bound * (1.0 - 1e-12),
    })
}
