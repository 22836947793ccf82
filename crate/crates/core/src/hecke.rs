//! Hecke operators T_{p²} on half-integral weight forms, eigenvalue
//! extraction, the Shimura lift relation and coefficient-growth
//! diagnostics.
//!
//! For a form of weight ℓ + 1/2 with character χ and p ∤ level,
//!
//!   c'(n) = c(p²n) + χ(p)((−1)^ℓ n | p) p^{ℓ−1} c(n) + χ(p²) p^{2ℓ−1} c(n/p²).
//!
//! Everything here runs on exact integers and rationals.

use crate::arith::{divisors, extended_symbol, is_squarefree, moebius, squarefree_decompose};
use crate::error::{invalid, Error, Result};
use crate::modarith::{is_prime, kronecker};
use crate::progsums::least_squares_slope;
use crate::qseries::{CharacterTag, QSeries};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

/// Eigenvalues λ(p), keyed by prime.
pub type LambdaMap = BTreeMap<u64, BigRational>;

/// Minimum number of probes with c(n) ≠ 0 before a form is called an
/// eigenform.
pub const MIN_PROBES: usize = 3;

/// χ(d) for the character carried by a series. The trivial tag is the
/// principal character modulo the level; `four_n` is (level | ·).
pub fn character_value(tag: CharacterTag, level: u64, d: u64) -> Result<i64> {
    match tag {
        CharacterTag::Trivial => Ok(i64::from(d.gcd(&level) == 1)),
        CharacterTag::FourN => Ok(i64::from(kronecker(level as i64, d as i64))),
        CharacterTag::User => Err(Error::Unsupported(
            "user-defined characters have no values here".into(),
        )),
    }
}

fn pow_big(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

fn check_hecke_prime(f: &QSeries, p: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if f.level() % p == 0 {
        return Err(Error::Unsupported(format!(
            "T_{{p²}} for p = {p} dividing the level {}",
            f.level()
        )));
    }
    f.weight().ell()
}

/// T_{p²} f, truncated at ⌊X/p²⌋. Requires p prime with p ∤ level.
pub fn apply_tp2(f: &QSeries, p: u64) -> Result<QSeries> {
    let ell = check_hecke_prime(f, p)?;
    let p2 = p * p;
    let out_trunc = f.truncation() / p2;
    if out_trunc == 0 {
        return Err(Error::Truncation {
            required: p2,
            available: f.truncation(),
        });
    }
    let chi_p = character_value(f.character(), f.level(), p)?;
    let chi_p2 = chi_p * chi_p;
    let sign: i64 = if ell % 2 == 0 { 1 } else { -1 };
    let mid = pow_big(p, ell - 1) * chi_p;
    let low = pow_big(p, 2 * ell - 1) * chi_p2;
    let c = f.coeffs_bigint();
    let out: Vec<BigInt> = (0..=out_trunc)
        .map(|n| {
            let i = n as usize;
            let mut v = c[i * p2 as usize].clone();
            if !c[i].is_zero() {
                let sym = kronecker(sign * n as i64, p as i64);
                if sym != 0 {
                    v += &mid * &c[i] * sym;
                }
            }
            if n % p2 == 0 {
                v += &low * &c[(n / p2) as usize];
            }
            v
        })
        .collect();
    QSeries::from_bigint(f.weight(), f.level(), f.character(), out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeckeResult {
    pub p: u64,
    /// λ as an exact rational.
    #[serde(serialize_with = "ser_rational")]
    pub lambda: BigRational,
    /// max |c'(n) − λc(n)| over the probes; exactly zero for an eigenform.
    pub residual: f64,
    /// Probe indices with c(n) ≠ 0.
    pub probes: usize,
    pub is_eigen: bool,
}

fn ser_rational<S: serde::Serializer>(
    r: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// λ(p) from c'(n)/c(n) over n ≤ n_probe. The form is an eigenform when
/// every probe agrees exactly and at least [`MIN_PROBES`] probes have
/// c(n) ≠ 0.
pub fn extract_eigenvalue(f: &QSeries, p: u64, n_probe: u64) -> Result<HeckeResult> {
    let t = apply_tp2(f, p)?;
    let n_probe = n_probe.min(t.truncation());
    let mut lambda: Option<BigRational> = None;
    let mut probes = 0;
    let mut residual = BigRational::zero();
    for n in 1..=n_probe {
        let (c, cp) = (f.coeff(n)?, t.coeff(n)?);
        if c.is_zero() {
            continue;
        }
        probes += 1;
        if lambda.is_none() {
            lambda = Some(BigRational::new(cp, c));
        }
    }
    let lambda = lambda
        .ok_or_else(|| Error::InvalidArgument(format!("c(n) = 0 for every n ≤ {n_probe}")))?;
    for n in 1..=n_probe {
        let c = BigRational::from_integer(f.coeff(n)?);
        let cp = BigRational::from_integer(t.coeff(n)?);
        let dev = (cp - &lambda * c).abs();
        if dev > residual {
            residual = dev;
        }
    }
    let is_eigen = residual.is_zero() && probes >= MIN_PROBES;
    Ok(HeckeResult {
        p,
        residual: residual.to_f64().unwrap_or(f64::INFINITY),
        lambda,
        probes,
        is_eigen,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShimuraCoeffs {
    pub lambdas: LambdaMap,
    /// λ(0..=n_max), λ(0) = 0.
    pub lambda_n: Vec<BigRational>,
}

/// λ(n) for n ≤ n_max from the Euler product
/// Π_p (1 − λ(p)p^{−s} + χ²(p)p^{2ℓ−1−2s})^{−1}.
pub fn shimura_lambda_n(
    lambdas: &LambdaMap,
    n_max: u64,
    ell: u32,
    chi: impl Fn(u64) -> Result<i64>,
) -> Result<ShimuraCoeffs> {
    if ell == 0 {
        return invalid("ℓ must be ≥ 1");
    }
    let mut lam = vec![BigRational::zero(); n_max as usize + 1];
    if n_max >= 1 {
        lam[1] = BigRational::one();
    }
    for n in 2..=n_max {
        let (p, e) = crate::arith::factorize(n)[0];
        let pe = p.pow(e);
        if pe == n {
            let lp = lambdas
                .get(&p)
                .ok_or_else(|| Error::InvalidArgument(format!("λ({p}) missing")))?;
            lam[n as usize] = if e == 1 {
                lp.clone()
            } else {
                let c = chi(p)?;
                let q = BigRational::from_integer(pow_big(p, 2 * ell - 1) * (c * c));
                lp * &lam[(n / p) as usize] - q * &lam[(n / (p * p)) as usize]
            };
        } else {
            lam[n as usize] = &lam[pe as usize] * &lam[(n / pe) as usize];
        }
    }
    Ok(ShimuraCoeffs {
        lambdas: lambdas.clone(),
        lambda_n: lam,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShimuraCheck {
    pub t: u64,
    pub n_max: u64,
    /// (n, c(tn²), predicted) for every n ≤ n_max.
    pub rows: Vec<(u64, String, String)>,
    /// max |c(tn²) − predicted|, exactly 0 when the relation holds.
    pub max_residual: f64,
}

/// Checks c(tn²) = c(t) Σ_{d|n} μ(d) ((−1)^ℓ t | d) χ(d) d^{ℓ−1} λ(n/d) for
/// n ≤ n_max. This is the raw-coefficient form of the normalized relation
/// a(tn²)n^{ℓ−1/2} = a(t)Σ(...). `lambdas` must cover every prime ≤ n_max,
/// including primes dividing the level.
pub fn shimura_relation_check(
    f: &QSeries,
    lambdas: &LambdaMap,
    t: u64,
    n_max: u64,
) -> Result<ShimuraCheck> {
    if !is_squarefree(t) {
        return invalid(format!("t = {t} is not squarefree"));
    }
    let need = t.saturating_mul(n_max.saturating_mul(n_max));
    if need > f.truncation() {
        return Err(Error::Truncation {
            required: need,
            available: f.truncation(),
        });
    }
    let ell = f.weight().ell()?;
    let (tag, level) = (f.character(), f.level());
    for (&p, _) in lambdas
        .iter()
        .filter(|(p, _)| level % **p != 0 && **p <= n_max)
    {
        let r = extract_eigenvalue(f, p, f.truncation() / (p * p))?;
        if !r.is_eigen {
            return Err(Error::NotEigen(format!(
                "T_{{{p}²}} residual {}",
                r.residual
            )));
        }
    }
    let sh = shimura_lambda_n(lambdas, n_max, ell, |d| character_value(tag, level, d))?;
    let sym_base = if ell % 2 == 0 { t as i64 } else { -(t as i64) };
    let ct = BigRational::from_integer(f.coeff(t)?);
    let mut rows = Vec::new();
    let mut worst = BigRational::zero();
    for n in 1..=n_max {
        let mut acc = BigRational::zero();
        for d in divisors(n) {
            let mu = moebius(d);
            if mu == 0 {
                continue;
            }
            let sym = extended_symbol(sym_base, d as i64);
            let chi = character_value(tag, level, d)?;
            if sym == 0 || chi == 0 {
                continue;
            }
            let w = pow_big(d, ell - 1) * (i64::from(mu) * i64::from(sym) * chi);
            acc += BigRational::from_integer(w) * &sh.lambda_n[(n / d) as usize];
        }
        let predicted = &ct * acc;
        let actual = BigRational::from_integer(f.coeff(t * n * n)?);
        let dev = (&actual - &predicted).abs();
        if dev > worst {
            worst = dev;
        }
        rows.push((n, actual.to_string(), predicted.to_string()));
    }
    Ok(ShimuraCheck {
        t,
        n_max,
        rows,
        max_residual: worst.to_f64().unwrap_or(f64::INFINITY),
    })
}

/// Growth exponent above which |a(tn²)|/|a(t)| is flagged as violating
/// the n^ε bound. The fit is over n ≤ n_max, so ε-growth shows up as a
/// small slope; √n growth as 1/2.
pub const DELIGNE_FLAG_EXPONENT: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeligneReport {
    pub t: u64,
    /// (n, |a(tn²)|/|a(t)|) for n ≤ n_max.
    pub ratios: Vec<(u64, f64)>,
    /// Least-squares slope of ln ratio against ln n over nonzero ratios
    /// with n ≥ 2; −∞ when all of them vanish.
    pub exponent: f64,
    /// a(t) = 0, so the relation says nothing.
    pub degenerate: bool,
    pub violates_epsilon_growth: bool,
}

pub fn deligne_ratio_report(f: &QSeries, t: u64, n_max: u64) -> Result<DeligneReport> {
    let need = t.saturating_mul(n_max.saturating_mul(n_max));
    if need > f.truncation() {
        return Err(Error::Truncation {
            required: need,
            available: f.truncation(),
        });
    }
    let at = f.normalized_coeff(t)?;
    if at == 0.0 {
        return Ok(DeligneReport {
            t,
            ratios: Vec::new(),
            exponent: f64::NAN,
            degenerate: true,
            violates_epsilon_growth: false,
        });
    }
    let ratios: Vec<(u64, f64)> = (1..=n_max)
        .map(|n| Ok((n, (f.normalized_coeff(t * n * n)? / at).abs())))
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = ratios
        .iter()
        .filter(|&&(n, r)| n >= 2 && r > 0.0)
        .map(|&(n, r)| ((n as f64).ln(), r.ln()))
        .collect();
    let exponent = match pts.len() {
        0 => f64::NEG_INFINITY,
        1 => pts[0].1 / pts[0].0,
        _ => least_squares_slope(&pts),
    };
    Ok(DeligneReport {
        t,
        ratios,
        exponent,
        degenerate: false,
        violates_epsilon_growth: exponent > DELIGNE_FLAG_EXPONENT,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourthMomentFit {
    /// (x, Σ_{n≤x} |a(n)|⁴)
    pub points: Vec<(f64, f64)>,
    pub exponent: f64,
}

/// Slope of ln Σ_{n≤x}|a(n)|⁴ against ln x.
pub fn fourth_moment_exponent(f: &QSeries, xs: &[u64]) -> Result<FourthMomentFit> {
    if xs.len() < 2 {
        return invalid("need at least two x values for a slope");
    }
    let x_max = *xs.iter().max().expect("nonempty");
    if x_max > f.truncation() {
        return Err(Error::Truncation {
            required: x_max,
            available: f.truncation(),
        });
    }
    let a = f.normalized();
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    let mut acc = crate::summation::Neumaier::new();
    let mut n = 1u64;
    let mut points = Vec::new();
    for &x in &sorted {
        while n <= x {
            acc.add(a[n as usize].powi(4));
            n += 1;
        }
        points.push((x as f64, acc.value()));
    }
    if points.iter().any(|&(_, s)| s <= 0.0) {
        return invalid("Σ|a(n)|⁴ vanishes at some x; no log-slope");
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, s)| (x.ln(), s.ln())).collect();
    Ok(FourthMomentFit {
        points,
        exponent: least_squares_slope(&logs),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoeffBoundReport {
    /// (x, max |a(n)|/n^{3/14}) over admissible n ≤ x, a running max.
    pub rows: Vec<(f64, f64)>,
    /// Log-log slope of the table over rows with positive values.
    pub slope: f64,
}

/// Running max of |a(n)|/n^{3/14} over n = t·m² ≤ x with t squarefree and
/// m | level.
pub fn coeff_bound_report(f: &QSeries, xs: &[u64]) -> Result<CoeffBoundReport> {
    let x_max = xs.iter().copied().max().unwrap_or(0);
    if x_max > f.truncation() {
        return Err(Error::Truncation {
            required: x_max,
            available: f.truncation(),
        });
    }
    let a = f.normalized();
    let level = f.level();
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    let mut best = 0.0f64;
    let mut n = 1u64;
    let mut rows = Vec::new();
    for &x in &sorted {
        while n <= x {
            let v = a[n as usize];
            if v != 0.0 && level % squarefree_decompose(n).1 == 0 {
                best = best.max(v.abs() / (n as f64).powf(3.0 / 14.0));
            }
            n += 1;
        }
        rows.push((x as f64, best));
    }
    let logs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.1 > 0.0)
        .map(|&(x, v)| (x.ln(), v.ln()))
        .collect();
    let slope = if logs.len() >= 2 {
        least_squares_slope(&logs)
    } else {
        0.0
    };
    Ok(CoeffBoundReport { rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::{builtin_form, Weight};

    fn eta8(x: u64) -> QSeries {
        builtin_form("eta8_cubed", x).unwrap()
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn tp2_worked_example() {
        let t = apply_tp2(&eta8(900), 3).unwrap();
        assert_eq!(t.truncation(), 100);
        assert_eq!(t.coeff(1).unwrap(), BigInt::from(-4));
        assert_eq!(t.coeff(9).unwrap(), BigInt::from(12));
    }

    #[test]
    fn tp2_zero_and_errors() {
        let z = QSeries::from_i128(
            Weight::from_twice(3),
            64,
            CharacterTag::Trivial,
            vec![0; 101],
        )
        .unwrap();
        assert!(apply_tp2(&z, 3)
            .unwrap()
            .coeffs_bigint()
            .iter()
            .all(Zero::is_zero));
        assert!(matches!(
            apply_tp2(&eta8(100), 2),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(apply_tp2(&eta8(100), 9), Err(Error::NotPrime(9))));
        assert!(matches!(
            apply_tp2(&eta8(100), 11),
            Err(Error::Truncation { .. })
        ));
        let user = eta8(100)
            .with_metadata(Weight::from_twice(3), 64, CharacterTag::User)
            .unwrap();
        assert!(matches!(apply_tp2(&user, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn eigenvalues_of_eta8_cubed() {
        let f = eta8(20_000);
        let r3 = extract_eigenvalue(&f, 3, 500).unwrap();
        assert!(r3.is_eigen && r3.residual == 0.0);
        assert_eq!(r3.lambda, int(-4));
        let r5 = extract_eigenvalue(&f, 5, 500).unwrap();
        assert_eq!(r5.lambda, int(6));
        let scaled = extract_eigenvalue(&f.scale(5), 3, 500).unwrap();
        assert_eq!(scaled.lambda, r3.lambda);
        assert!(scaled.is_eigen);
    }

    #[test]
    fn too_few_probes_is_not_eigen() {
        // Only c(1), c(9) visible below 10.
        let r = extract_eigenvalue(&eta8(20_000), 3, 10).unwrap();
        assert_eq!(r.probes, 2);
        assert!(!r.is_eigen);
    }

    #[test]
    fn theta_delta_is_not_eigen() {
        let f = builtin_form("theta_delta", 2_000).unwrap();
        let r = extract_eigenvalue(&f, 3, 200).unwrap();
        assert!(!r.is_eigen && r.residual > 0.0);
    }

    #[test]
    fn lambda_n_recurrence() {
        let lambdas: LambdaMap = [(2, int(3)), (3, int(-4)), (5, int(6)), (7, int(0))]
            .into_iter()
            .collect();
        let sh = shimura_lambda_n(&lambdas, 10, 1, |d| Ok(i64::from(d % 2 == 1))).unwrap();
        assert_eq!(sh.lambda_n[1], int(1));
        assert_eq!(sh.lambda_n[6], int(-12));
        assert_eq!(sh.lambda_n[9], int(16 - 3));
        assert_eq!(sh.lambda_n[8], int(27));
        assert_eq!(sh.lambda_n[10], int(18));
        assert!(shimura_lambda_n(&lambdas, 11, 1, |_| Ok(1)).is_err());
    }

    #[test]
    fn shimura_relation_exact_on_eta8() {
        let f = eta8(30_000);
        let mut lambdas = LambdaMap::new();
        for p in [3u64, 5, 7, 11, 13] {
            lambdas.insert(p, extract_eigenvalue(&f, p, 60).unwrap().lambda);
        }
        // p = 2 divides the level; c(4n) = 0 identically, so λ(2) = 0.
        lambdas.insert(2, int(0));
        let chk = shimura_relation_check(&f, &lambdas, 1, 15).unwrap();
        assert_eq!(chk.max_residual, 0.0);
        assert_eq!(chk.rows[2], (3, "-3".to_string(), "-3".to_string()));
        assert_eq!(chk.rows[4].1, "5");
        let t1 = shimura_relation_check(&f, &lambdas, 1, 1).unwrap();
        assert_eq!(t1.max_residual, 0.0);
        assert!(shimura_relation_check(&f, &lambdas, 4, 2).is_err());
    }

    #[test]
    fn shimura_rejects_non_eigen() {
        let f = builtin_form("theta_delta", 2_000).unwrap();
        let lambdas: LambdaMap = [(2, int(0)), (3, int(1))].into_iter().collect();
        assert!(matches!(
            shimura_relation_check(&f, &lambdas, 1, 3),
            Err(Error::NotEigen(_))
        ));
    }

    #[test]
    fn hecke_operators_commute_and_are_linear() {
        let f = builtin_form("theta_delta", 30_000).unwrap();
        let g = eta8(30_000)
            .with_metadata(f.weight(), 4, CharacterTag::Trivial)
            .unwrap();
        let a = apply_tp2(&apply_tp2(&f, 3).unwrap(), 5).unwrap();
        let b = apply_tp2(&apply_tp2(&f, 5).unwrap(), 3).unwrap();
        let m = a.truncation().min(b.truncation());
        assert_eq!(a.truncate(m).unwrap(), b.truncate(m).unwrap());

        let lhs = apply_tp2(&f.scale(3).add(&g.scale(-2)), 7).unwrap();
        let rhs = apply_tp2(&f, 7)
            .unwrap()
            .scale(3)
            .add(&apply_tp2(&g, 7).unwrap().scale(-2));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn deligne_report() {
        let r = deligne_ratio_report(&eta8(10_000), 1, 99).unwrap();
        assert!((r.exponent - 0.5).abs() < 0.05, "{}", r.exponent);
        assert!(r.violates_epsilon_growth);
        let d = deligne_ratio_report(&eta8(10_000), 2, 10).unwrap();
        assert!(d.degenerate && d.ratios.is_empty());
        let mut c = vec![0i128; 101];
        c[1] = 7;
        let lone = QSeries::from_i128(Weight::from_twice(3), 64, CharacterTag::Trivial, c).unwrap();
        let r = deligne_ratio_report(&lone, 1, 10).unwrap();
        assert_eq!(r.exponent, f64::NEG_INFINITY);
        assert!(!r.violates_epsilon_growth);
    }

    #[test]
    fn fourth_moment_slopes() {
        let xs = [10_000u64, 40_000, 160_000];
        let fit = fourth_moment_exponent(&eta8(160_000), &xs).unwrap();
        // Σ_{m odd, m² ≤ x} m² exactly.
        for &(x, s) in &fit.points {
            let exact: f64 = (1..)
                .step_by(2)
                .take_while(|m| (m * m) as f64 <= x)
                .map(|m| (m * m) as f64)
                .sum();
            assert!((s - exact).abs() < 1e-9 * exact);
        }
        assert!((fit.exponent - 1.5).abs() < 0.05);
        let ones = QSeries::from_i128(
            Weight::from_twice(2),
            1,
            CharacterTag::Trivial,
            vec![1; 1001],
        )
        .unwrap();
        let fit = fourth_moment_exponent(&ones, &[10, 100, 1000]).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_bound_table() {
        let r = coeff_bound_report(&eta8(10_000), &[10, 100, 1000, 10_000]).unwrap();
        assert!(r.rows.iter().all(|&(_, v)| (v - 1.0).abs() < 1e-12));
        let f = builtin_form("theta_delta", 20_000).unwrap();
        let r = coeff_bound_report(&f, &[100, 1000, 5000, 20_000]).unwrap();
        assert!(r.rows.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(r.rows.iter().all(|&(_, v)| v.is_finite() && v > 0.0));
    }
}
