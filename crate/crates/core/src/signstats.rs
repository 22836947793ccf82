//! Sign counts T±(x, α) of normalized coefficients, the two counting
//! lemmas behind the lower bounds, and surveys over residue classes mod p.

use crate::error::{invalid, Error, Result};
use crate::modarith::{is_prime, nearest_prime_to_power};
use crate::progsums::class_sums;
use crate::qseries::CoeffView;
use crate::summation::Neumaier;
use crate::windows::Window;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return invalid(format!("α must be positive, got {alpha}"));
    }
    Ok(())
}

/// Indices counted: 1 ≤ n ≤ x, plus w(n/x) ≠ 0 for the smoothed count.
fn admissible(n: u64, x: f64, w: Option<&Window>) -> bool {
    match w {
        Some(w) => w.eval(n as f64 / x) != 0.0,
        None => true,
    }
}

/// Number of n ≤ x with n ≡ a (mod q) and ±a(n) > n^{−α}; with a window,
/// n is further restricted to w(n/x) ≠ 0.
pub fn count_t(
    f: CoeffView<'_>,
    x: f64,
    alpha: f64,
    a: u64,
    q: u64,
    sign: Sign,
    w: Option<&Window>,
) -> Result<u64> {
    check_alpha(alpha)?;
    if q == 0 {
        return invalid("modulus q must be ≥ 1");
    }
    f.require(x)?;
    let s = sign.factor();
    let first = if a % q == 0 { q } else { a % q };
    let n_max = x.floor() as u64;
    let mut count = 0;
    let mut n = first;
    while n <= n_max {
        if admissible(n, x, w) && s * f.a[n as usize] > (n as f64).powf(-alpha) {
            count += 1;
        }
        n += q;
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignCountReport {
    pub x: f64,
    pub q: u64,
    pub alpha: f64,
    /// T⁺_{a,q} for a = 0..q−1.
    pub per_class_plus: Vec<u64>,
    pub per_class_minus: Vec<u64>,
    /// Whether the windowed definition was used.
    pub smooth: bool,
}

impl SignCountReport {
    pub fn total_plus(&self) -> u64 {
        self.per_class_plus.iter().sum()
    }

    pub fn total_minus(&self) -> u64 {
        self.per_class_minus.iter().sum()
    }
}

/// T± for every class modulo q in one pass.
pub fn sign_counts(
    f: CoeffView<'_>,
    x: f64,
    alpha: f64,
    q: u64,
    w: Option<&Window>,
) -> Result<SignCountReport> {
    check_alpha(alpha)?;
    if q == 0 {
        return invalid("modulus q must be ≥ 1");
    }
    f.require(x)?;
    let mut plus = vec![0u64; q as usize];
    let mut minus = vec![0u64; q as usize];
    for n in 1..=x.floor() as u64 {
        let an = f.a[n as usize];
        if an == 0.0 || !admissible(n, x, w) {
            continue;
        }
        let thr = (n as f64).powf(-alpha);
        let r = (n % q) as usize;
        if an > thr {
            plus[r] += 1;
        } else if -an > thr {
            minus[r] += 1;
        }
    }
    Ok(SignCountReport {
        x,
        q,
        alpha,
        per_class_plus: plus,
        per_class_minus: minus,
        smooth: w.is_some(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignBalance {
    /// Σ_{b>0} b
    pub sum_plus: f64,
    /// −Σ_{b<0} b
    pub sum_minus: f64,
    /// Σ |b|
    pub total_abs: f64,
    /// Σ b
    pub total: f64,
}

/// Positive and negative parts of a sequence, each summed independently
/// with compensation.
pub fn sign_balance(b: &[f64]) -> SignBalance {
    let sum_plus: Neumaier = b.iter().copied().filter(|&v| v > 0.0).collect();
    let sum_minus: Neumaier = b.iter().filter(|&&v| v < 0.0).map(|&v| -v).collect();
    let total_abs: Neumaier = b.iter().map(|v| v.abs()).collect();
    let total: Neumaier = b.iter().copied().collect();
    SignBalance {
        sum_plus: sum_plus.value(),
        sum_minus: sum_minus.value(),
        total_abs: total_abs.value(),
        total: total.value(),
    }
}

/// (M − Σc)²/V: the lower bound for |{n : b(n) > c(n)}| when c ≥ 0,
/// Σc ≤ M ≤ Σb and Σb² ≤ V.
pub fn elmt2_bound(m: f64, v: f64, c_sum: f64) -> Result<f64> {
    if !(m > 0.0 && v > 0.0 && c_sum >= 0.0 && c_sum <= m) {
        return Err(Error::Range(format!(
            "bound needs M > 0, V > 0 and 0 ≤ Σc ≤ M (M={m}, V={v}, Σc={c_sum})"
        )));
    }
    Ok((m - c_sum).powi(2) / v)
}

/// The finite-data check of the lemma: returns (count, bound) when the
/// hypotheses hold for the given M and V, None otherwise.
pub fn elmt2_check(b: &[f64], c: &[f64], m: f64, v: f64) -> Option<(usize, f64)> {
    assert_eq!(b.len(), c.len());
    if c.iter().any(|&x| x < 0.0) {
        return None;
    }
    let c_sum: f64 = c.iter().sum();
    let b_sum: f64 = b.iter().sum();
    let b2: f64 = b.iter().map(|x| x * x).sum();
    if !(c_sum <= m && m <= b_sum && b2 <= v) {
        return None;
    }
    let bound = elmt2_bound(m, v, c_sum).ok()?;
    Some((b.iter().zip(c).filter(|(x, y)| x > y).count(), bound))
}

/// Default survey parameters, all expressed through an estimate of
/// c_f‖w‖².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyThresholds {
    /// Required proportion of classes.
    pub r: f64,
    pub m1: f64,
    pub m2: f64,
    /// A-set threshold for the eigenform survey.
    pub m: f64,
    pub delta: f64,
}

impl SurveyThresholds {
    pub const DEFAULT_R: f64 = 0.01;
    pub const DEFAULT_DELTA: f64 = 0.05;

    pub fn defaults(cf: f64, w: &Window) -> Self {
        let v = cf * w.l2sq();
        Self {
            r: Self::DEFAULT_R,
            m1: 0.02 * v.sqrt(),
            m2: 200.0 * v,
            m: 0.1 * v,
            delta: Self::DEFAULT_DELTA,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyVerdict {
    /// |{a invertible : T⁺_{a,p} ≥ 1}| / p
    pub fraction_classes_hit: f64,
    pub threshold_r: f64,
    pub alpha: f64,
    /// Admissible open range for log p / log x.
    pub p_exponent_window: (f64, f64),
    pub p_exponent: f64,
    pub out_of_range: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSurvey {
    pub x: f64,
    pub p: u64,
    pub m1: f64,
    pub m2: f64,
    pub verdict: SurveyVerdict,
    /// E(x,p,a) for a = 0..p−1.
    pub e_values: Vec<f64>,
    pub t_plus: Vec<u64>,
    pub t_minus: Vec<u64>,
    /// Class sum ≥ m₁√(x/p) and second moment ≤ m₂x/p.
    pub meets_conditions: Vec<bool>,
    /// The counting-lemma bound on T⁺ for classes where its hypotheses hold.
    pub lemma_bound: Vec<Option<f64>>,
    pub classes_hit: usize,
    pub classes_meeting_conditions: usize,
}

fn p_exponent(x: f64, p: u64) -> f64 {
    (p as f64).ln() / x.ln()
}

/// Per-class Σ n^{−α} w(n/x) over n ≡ a (mod p).
fn class_power_sums(x: f64, p: u64, alpha: f64, w: &Window) -> Vec<f64> {
    let mut acc = vec![Neumaier::new(); p as usize];
    for n in 1..=x.floor() as u64 {
        let wv = w.eval(n as f64 / x);
        if wv != 0.0 {
            acc[(n % p) as usize].add((n as f64).powf(-alpha) * wv);
        }
    }
    acc.iter().map(Neumaier::value).collect()
}

/// The class survey for arbitrary f: counts invertible classes a mod p
/// with T⁺_{a,p}(x, α; w) ≥ 1, next to the two sufficient conditions used
/// to prove that a positive proportion of classes qualify.
pub fn class_survey(
    f: CoeffView<'_>,
    w: &Window,
    x: f64,
    p: u64,
    alpha: f64,
    thresholds: &SurveyThresholds,
) -> Result<ClassSurvey> {
    if !(alpha > 3.0 / 14.0 && alpha <= 0.25) {
        return invalid(format!("class survey needs α in (3/14, 1/4], got {alpha}"));
    }
    let SurveyThresholds { r, m1, m2, .. } = *thresholds;
    if !(r > 0.0 && r < 1.0 / 48.0 && m1 > 0.0 && m2 > 0.0) {
        return invalid(format!(
            "need 0 < r < 1/48, m₁ > 0, m₂ > 0 (r={r}, m₁={m1}, m₂={m2})"
        ));
    }
    let sums = class_sums(f, w, x, p)?;
    let counts = sign_counts(f, x, alpha, p, Some(w))?;
    let csum = class_power_sums(x, p, alpha, w);
    let scale = (x / p as f64).sqrt();
    let (big_m, big_v) = (m1 * scale, m2 * x / p as f64);

    let mut meets = vec![false; p as usize];
    let mut lemma_bound = vec![None; p as usize];
    let mut hit = 0;
    for a in 1..p as usize {
        meets[a] = sums.s1[a] >= big_m && sums.s2[a] <= big_v;
        if meets[a] && csum[a] <= big_m {
            lemma_bound[a] = elmt2_bound(big_m, big_v, csum[a]).ok();
        }
        if counts.per_class_plus[a] >= 1 {
            hit += 1;
        }
    }
    let (lo, hi) = (1.0 - 2.0 * alpha, 4.0 / 7.0);
    let e = p_exponent(x, p);
    let out_of_range = !(e > lo && e < hi);
    let fraction = hit as f64 / p as f64;
    let verdict = SurveyVerdict {
        fraction_classes_hit: fraction,
        threshold_r: r,
        alpha,
        p_exponent_window: (lo, hi),
        p_exponent: e,
        out_of_range,
        pass: !out_of_range && fraction >= r,
    };
    Ok(ClassSurvey {
        x,
        p,
        m1,
        m2,
        verdict,
        e_values: sums.s1.iter().map(|s| s / scale).collect(),
        t_plus: counts.per_class_plus,
        t_minus: counts.per_class_minus,
        classes_meeting_conditions: meets.iter().filter(|&&b| b).count(),
        meets_conditions: meets,
        lemma_bound,
        classes_hit: hit,
    })
}

/// Membership of each class in the sets A (large second moment, moderate
/// fourth moment) and B (large first or second moment).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSets {
    pub in_a: Vec<bool>,
    pub in_b: Vec<bool>,
}

pub fn classify_ab(
    s1: &[f64],
    s2: &[f64],
    s4: &[f64],
    x: f64,
    p: u64,
    m: f64,
    delta: f64,
) -> ClassSets {
    let pf = p as f64;
    let a_s2 = m * x / pf;
    let a_s4 = x.powf(1.0 + delta) / pf.sqrt();
    let b_s1 = x.powf(1.0 - delta) / pf.powf(1.25);
    let b_s2 = x.powf(1.0 + delta) / pf.powf(0.75);
    let mut in_a = vec![false; s1.len()];
    let mut in_b = vec![false; s1.len()];
    for a in 1..s1.len() {
        in_a[a] = s2[a] > a_s2 && s4[a] <= a_s4;
        in_b[a] = s1[a].abs() > b_s1 || s2[a] > b_s2;
    }
    ClassSets { in_a, in_b }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSurvey {
    pub x: f64,
    pub p: u64,
    pub alpha: f64,
    pub m: f64,
    pub delta: f64,
    pub p_exponent_window: (f64, f64),
    pub p_exponent: f64,
    pub out_of_range: bool,
    pub e_values: Vec<f64>,
    pub t_plus: Vec<u64>,
    pub t_minus: Vec<u64>,
    pub sets: ClassSets,
    pub size_a: usize,
    pub size_b: usize,
    pub size_a_minus_b: usize,
    /// p^{3/4}/x^{δ/2}, the growth rate claimed for |A|.
    pub a_reference: f64,
    /// x^{1−2δ}/p^{7/4}, the claimed order of min(T⁺,T⁻) on A∖B.
    pub min_count_target: f64,
    /// Classes in A∖B with min(T⁺,T⁻) ≥ the target.
    pub a_minus_b_reaching_target: usize,
    /// m^{3/2} x^{1−δ/2}/p^{5/4}, the Hölder lower bound for Σ|a(n)|w on A.
    pub holder_bound: f64,
    /// Classes in A whose Σ|a(n)|w falls below the Hölder bound; always 0.
    pub holder_violations: usize,
}

/// Survey for eigenforms: classifies classes into A and B and compares
/// min(T⁺,T⁻) on A∖B with x^{1−2δ}/p^{7/4}.
#[allow(clippy::too_many_arguments)]
pub fn eigen_survey(
    f: CoeffView<'_>,
    w: &Window,
    x: f64,
    p: u64,
    alpha: f64,
    m: f64,
    delta: f64,
) -> Result<EigenSurvey> {
    if !(alpha > 0.125 && alpha <= 1.0 / 7.0) {
        return invalid(format!(
            "eigenform survey needs α in (1/8, 1/7], got {alpha}"
        ));
    }
    if !(m > 0.0 && delta > 0.0) {
        return invalid(format!("need m > 0 and δ > 0 (m={m}, δ={delta})"));
    }
    let sums = class_sums(f, w, x, p)?;
    let counts = sign_counts(f, x, alpha, p, Some(w))?;
    let sets = classify_ab(&sums.s1, &sums.s2, &sums.s4, x, p, m, delta);
    let pf = p as f64;
    let target = x.powf(1.0 - 2.0 * delta) / pf.powf(1.75);
    let holder_bound = m.powf(1.5) * x.powf(1.0 - delta / 2.0) / pf.powf(1.25);
    let mut reaching = 0;
    let mut violations = 0;
    for a in 1..p as usize {
        if sets.in_a[a] && sums.abs1[a] < holder_bound {
            violations += 1;
        }
        if sets.in_a[a]
            && !sets.in_b[a]
            && counts.per_class_plus[a].min(counts.per_class_minus[a]) as f64 >= target
        {
            reaching += 1;
        }
    }
    let (lo, hi) = (0.5, 4.0 * alpha);
    let e = p_exponent(x, p);
    let scale = (x / pf).sqrt();
    Ok(EigenSurvey {
        x,
        p,
        alpha,
        m,
        delta,
        p_exponent_window: (lo, hi),
        p_exponent: e,
        out_of_range: !(e > lo && e < hi),
        e_values: sums.s1.iter().map(|s| s / scale).collect(),
        size_a: sets.in_a.iter().filter(|&&b| b).count(),
        size_b: sets.in_b.iter().filter(|&&b| b).count(),
        size_a_minus_b: sets
            .in_a
            .iter()
            .zip(&sets.in_b)
            .filter(|&(&a, &b)| a && !b)
            .count(),
        sets,
        t_plus: counts.per_class_plus,
        t_minus: counts.per_class_minus,
        a_reference: pf.powf(0.75) / x.powf(delta / 2.0),
        min_count_target: target,
        a_minus_b_reaching_target: reaching,
        holder_bound,
        holder_violations: violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    pub m: f64,
    /// |{a mod p : Σ a(n)²w² > m x/p}|
    pub count: usize,
    /// Σ_a Σ a(n)²w² / (m x/p): Markov's inequality on the data.
    pub markov_bound: f64,
}

impl MarkovReport {
    /// count / ((c_f‖w‖²/m)·p), the ratio to the asymptotic bound.
    pub fn ratio_to_cf_bound(&self, cf: f64, w: &Window, p: u64) -> f64 {
        self.count as f64 / (cf * w.l2sq() / self.m * p as f64)
    }
}

pub fn markov_class_count(
    f: CoeffView<'_>,
    w: &Window,
    x: f64,
    p: u64,
    m: f64,
) -> Result<MarkovReport> {
    if !(m > 0.0) {
        return invalid(format!("m must be positive, got {m}"));
    }
    let sums = class_sums(f, w, x, p)?;
    let thr = m * x / p as f64;
    let count = sums.s2.iter().filter(|&&s| s > thr).count();
    let total: Neumaier = sums.s2.iter().copied().collect();
    Ok(MarkovReport {
        m,
        count,
        markov_bound: total.value() / thr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub x: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub p: u64,
    /// T⁺(x; α) over all n ≤ x.
    pub count_plus: u64,
    pub count_minus: u64,
    /// r·x^{4/7−2ε}
    pub target: f64,
    pub classes_hit: usize,
    pub survey: SurveyVerdict,
}

/// p for the corollary run: the prime nearest x^{4/7−3ε/2}, required to
/// lie in [x^{4/7−2ε}, x^{4/7−ε}].
pub fn corollary_prime(x: f64, epsilon: f64) -> Result<u64> {
    let base = 4.0 / 7.0;
    let p = nearest_prime_to_power(x, base - 1.5 * epsilon);
    let (lo, hi) = (x.powf(base - 2.0 * epsilon), x.powf(base - epsilon));
    if !(is_prime(p) && (p as f64) >= lo && (p as f64) <= hi) {
        return Err(Error::Range(format!(
            "no prime near x^(4/7−1.5ε) inside [{lo:.1}, {hi:.1}]"
        )));
    }
    Ok(p)
}

/// T±(x; 3/14 + ε) against r·x^{4/7−2ε}, together with the class survey
/// at the prime the argument uses.
pub fn corollary_count(
    f: CoeffView<'_>,
    w: &Window,
    x: f64,
    epsilon: f64,
    thresholds: &SurveyThresholds,
) -> Result<CorollaryReport> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 28.0) {
        return invalid(format!("ε must lie in (0, 1/28), got {epsilon}"));
    }
    let alpha = 3.0 / 14.0 + epsilon;
    let p = corollary_prime(x, epsilon)?;
    let survey = class_survey(f, w, x, p, alpha, thresholds)?;
    let totals = sign_counts(f, x, alpha, 1, None)?;
    Ok(CorollaryReport {
        x,
        epsilon,
        alpha,
        p,
        count_plus: totals.total_plus(),
        count_minus: totals.total_minus(),
        target: thresholds.r * x.powf(4.0 / 7.0 - 2.0 * epsilon),
        classes_hit: survey.classes_hit,
        survey: survey.verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::progsums::estimate_cf;
    use crate::qseries::{builtin_form, QSeries};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn theta_delta() -> &'static QSeries {
        static F: OnceLock<QSeries> = OnceLock::new();
        F.get_or_init(|| builtin_form("theta_delta", 20_000).unwrap())
    }

    fn negated(f: &QSeries) -> Vec<f64> {
        f.normalized().iter().map(|v| -v).collect()
    }

    #[test]
    fn count_t_against_brute_force() {
        let f = theta_delta();
        let a = f.normalized();
        let brute = (1..=10_000usize)
            .filter(|&n| a[n] > (n as f64).powf(-0.25))
            .count() as u64;
        let got = count_t(f.view(), 1e4, 0.25, 0, 1, Sign::Plus, None).unwrap();
        assert_eq!(got, brute);
        // Independent rescan from the top down.
        let rev = (1..=10_000usize)
            .rev()
            .filter(|&n| -(-a[n]) > 1.0 / (n as f64).powf(0.25))
            .count() as u64;
        assert_eq!(got, rev);
    }

    #[test]
    fn count_t_trivial_cases() {
        let zero = vec![0.0; 1001];
        let z = CoeffView::new(&zero, 4);
        assert_eq!(count_t(z, 1000.0, 0.2, 1, 7, Sign::Plus, None).unwrap(), 0);
        let alpha = 0.2;
        let two: Vec<f64> = (0..=1000)
            .map(|n: i32| {
                if n == 0 {
                    0.0
                } else {
                    2.0 * f64::from(n).powf(-alpha)
                }
            })
            .collect();
        let v = CoeffView::new(&two, 4);
        let w = Window::standard_bump();
        let support = (1..=1000u64)
            .filter(|&n| n % 7 == 3 && w.eval(n as f64 / 1000.0) != 0.0)
            .count() as u64;
        assert_eq!(
            count_t(v, 1000.0, alpha, 3, 7, Sign::Plus, Some(&w)).unwrap(),
            support
        );
        assert!(count_t(v, 2000.0, alpha, 3, 7, Sign::Plus, None).is_err());
    }

    #[test]
    fn counts_agree_with_single_class_counts() {
        let f = theta_delta();
        let w = Window::standard_bump();
        let rep = sign_counts(f.view(), 5000.0, 0.23, 13, Some(&w)).unwrap();
        for a in 0..13 {
            assert_eq!(
                rep.per_class_plus[a as usize],
                count_t(f.view(), 5000.0, 0.23, a, 13, Sign::Plus, Some(&w)).unwrap()
            );
            assert_eq!(
                rep.per_class_minus[a as usize],
                count_t(f.view(), 5000.0, 0.23, a, 13, Sign::Minus, Some(&w)).unwrap()
            );
        }
    }

    #[test]
    fn sign_flip_swaps_counts() {
        let f = theta_delta();
        let neg = negated(f);
        let nv = CoeffView::new(&neg, f.level());
        let a = sign_counts(f.view(), 20_000.0, 0.22, 31, None).unwrap();
        let b = sign_counts(nv, 20_000.0, 0.22, 31, None).unwrap();
        assert_eq!(a.per_class_plus, b.per_class_minus);
        assert_eq!(a.per_class_minus, b.per_class_plus);
    }

    #[test]
    fn monotone_in_alpha_and_x() {
        let f = theta_delta();
        let mut prev = 0;
        for alpha in [0.05, 0.1, 0.2, 0.25, 0.4] {
            let c = count_t(f.view(), 10_000.0, alpha, 0, 1, Sign::Plus, None).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        let mut prev = 0;
        for x in [100.0, 1000.0, 5000.0, 20_000.0] {
            let c = count_t(f.view(), x, 0.23, 2, 5, Sign::Minus, None).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn sign_balance_examples() {
        assert_eq!(
            sign_balance(&[1.0, -1.0]),
            SignBalance {
                sum_plus: 1.0,
                sum_minus: 1.0,
                total_abs: 2.0,
                total: 0.0
            }
        );
        assert_eq!(sign_balance(&[0.5, 2.0]).sum_minus, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b: Vec<f64> = (0..100_000)
            .map(|_| rng.random_range(-1.0..1.0) + 0.001)
            .collect();
        let s = sign_balance(&b);
        for part in [s.sum_plus, s.sum_minus] {
            let ratio = part / (0.5 * s.total_abs);
            assert!((0.9..=1.1).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn elmt2_examples() {
        assert_eq!(elmt2_bound(10.0, 36.0, 4.0).unwrap(), 1.0);
        assert_eq!(elmt2_bound(3.0, 1.0, 3.0).unwrap(), 0.0);
        assert!(elmt2_bound(3.0, 1.0, 4.0).is_err());
        assert!(elmt2_bound(3.0, 0.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

        #[test]
        fn sign_balance_identities(b in prop::collection::vec(-1e6f64..1e6, 0..400)) {
            let s = sign_balance(&b);
            let scale = s.total_abs.max(1.0);
            prop_assert!((s.sum_plus + s.sum_minus - s.total_abs).abs() <= 1e-12 * scale);
            prop_assert!((s.sum_plus - s.sum_minus - s.total).abs() <= 1e-12 * scale);
        }

        #[test]
        fn elmt2_bound_holds(
            bc in prop::collection::vec((-2.0f64..3.0, 0.0f64..1.0), 1..60),
            slack in 0.0f64..1.0,
            vslack in 1.0f64..3.0,
        ) {
            let (b, c): (Vec<f64>, Vec<f64>) = bc.into_iter().unzip();
            let c_sum: f64 = c.iter().sum();
            let b_sum: f64 = b.iter().sum();
            prop_assume!(b_sum >= c_sum);
            let m = c_sum + slack * (b_sum - c_sum);
            prop_assume!(m > 0.0);
            let v = vslack * b.iter().map(|x| x * x).sum::<f64>();
            if let Some((count, bound)) = elmt2_check(&b, &c, m, v) {
                prop_assert!(count as f64 >= bound * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn surveys_on_theta_delta() {
        let f = theta_delta();
        let w = Window::standard_bump();
        let cf = estimate_cf(f.view(), &w, &[5000.0, 20_000.0])
            .unwrap()
            .extrapolated;
        let th = SurveyThresholds::defaults(cf, &w);
        let p = 223; // ≈ 20000^0.546
        let s = class_survey(f.view(), &w, 20_000.0, p, 0.23, &th).unwrap();
        assert!(!s.verdict.out_of_range);
        assert_eq!(s.e_values.len(), p as usize);
        for a in 1..p as usize {
            if s.t_plus[a] >= 1 {
                let recount =
                    count_t(f.view(), 20_000.0, 0.23, a as u64, p, Sign::Plus, Some(&w)).unwrap();
                assert!(recount >= 1);
            }
            if let Some(b) = s.lemma_bound[a] {
                assert!(s.t_plus[a] as f64 >= b);
            }
        }
        assert!(s.verdict.fraction_classes_hit > 0.0 && s.verdict.fraction_classes_hit <= 1.0);

        let neg = negated(f);
        let sn = class_survey(CoeffView::new(&neg, 4), &w, 20_000.0, p, 0.23, &th).unwrap();
        assert_eq!(sn.t_plus, s.t_minus);
        assert_eq!(sn.t_minus, s.t_plus);

        let off = class_survey(f.view(), &w, 20_000.0, 3, 0.23, &th).unwrap();
        assert!(off.verdict.out_of_range && !off.verdict.pass);
        assert!(class_survey(f.view(), &w, 20_000.0, p, 0.3, &th).is_err());
    }

    #[test]
    fn eigen_survey_classification() {
        let f = theta_delta();
        let w = Window::standard_bump();
        let s = eigen_survey(f.view(), &w, 20_000.0, 149, 0.14, 0.05, 0.05).unwrap();
        assert_eq!(s.holder_violations, 0);
        assert!(s.size_a > 0);
        assert!(eigen_survey(f.view(), &w, 20_000.0, 149, 0.2, 0.05, 0.05).is_err());

        // One class carries a huge sum and must land in B.
        let mut a = vec![0.0; 20_001];
        for (n, v) in a.iter_mut().enumerate().skip(1) {
            *v = if n % 149 == 5 {
                50.0
            } else {
                ((n * 7919) % 13) as f64 / 6.0 - 1.0
            };
        }
        let s = eigen_survey(CoeffView::new(&a, 4), &w, 20_000.0, 149, 0.14, 0.05, 0.05).unwrap();
        assert!(s.sets.in_b[5]);
        assert!(!(s.sets.in_a[5] && !s.sets.in_b[5]));
    }

    #[test]
    fn markov_counts() {
        let f = theta_delta();
        let w = Window::standard_bump();
        let r = markov_class_count(f.view(), &w, 20_000.0, 149, 1.0).unwrap();
        assert!(r.count as f64 <= r.markov_bound);
        assert_eq!(
            markov_class_count(f.view(), &w, 20_000.0, 149, 1e12)
                .unwrap()
                .count,
            0
        );
    }

    #[test]
    fn corollary_small() {
        let f = theta_delta();
        let w = Window::standard_bump();
        let cf = estimate_cf(f.view(), &w, &[5000.0, 20_000.0])
            .unwrap()
            .extrapolated;
        let th = SurveyThresholds::defaults(cf, &w);
        let r = corollary_count(f.view(), &w, 20_000.0, 0.02, &th).unwrap();
        let (lo, hi) = (
            20_000f64.powf(4.0 / 7.0 - 0.04),
            20_000f64.powf(4.0 / 7.0 - 0.02),
        );
        assert!((r.p as f64) >= lo && (r.p as f64) <= hi);
        assert!(r.count_plus >= r.classes_hit as u64);
        let neg = negated(f);
        let rn = corollary_count(CoeffView::new(&neg, 4), &w, 20_000.0, 0.02, &th).unwrap();
        assert_eq!(rn.count_minus, r.count_plus);
    }

    #[test]
    fn random_elmt2_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut applicable = 0;
        for _ in 0..2000 {
            let k = rng.random_range(1..40);
            let b: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..2.0)).collect();
            let c: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.5)).collect();
            let m = c.iter().sum::<f64>() + rng.random_range(0.0..1.0);
            let v = b.iter().map(|x| x * x).sum::<f64>() * rng.random_range(1.0..2.0);
            if let Some((count, bound)) = elmt2_check(&b, &c, m, v) {
                applicable += 1;
                assert!(count as f64 >= bound);
            }
        }
        assert!(applicable > 100);
    }
}
