//! Eta products, theta, and the built-in test forms.

use super::{convolve, multiply, CharacterTag, Coeffs, QSeries, Weight};
use crate::error::{invalid, Error, Result};
use num_bigint::BigInt;
use num_traits::Zero;
use std::fmt;
use std::str::FromStr;

/// Scalar relating the Fricke image of θΔ to θ(z)Δ(4z). The value 2^12
/// is predicted analytically and confirmed numerically by
/// `voronoi::fricke_scalar`.
pub const THETA_DELTA_FRICKE_SCALAR: i64 = 4096;

/// Nonzero terms of Π(1 − qⁿ) up to x: (−1)^k at k(3k−1)/2, k ∈ ℤ.
fn pentagonal_terms(x: usize) -> Vec<(usize, i128)> {
    let mut terms = vec![(0usize, 1i128)];
    for k in 1usize.. {
        let sign = if k % 2 == 1 { -1 } else { 1 };
        let a = k * (3 * k - 1) / 2;
        if a > x {
            break;
        }
        terms.push((a, sign));
        let b = k * (3 * k + 1) / 2;
        if b <= x {
            terms.push((b, sign));
        }
    }
    terms.sort_unstable();
    terms
}

/// Nonzero terms of Π(1 − qⁿ)³ up to x: (−1)^k (2k+1) at k(k+1)/2.
fn eta_cubed_terms(x: usize) -> Vec<(usize, i128)> {
    (0usize..)
        .map(|k| {
            (
                k * (k + 1) / 2,
                if k % 2 == 0 {
                    2 * k as i128 + 1
                } else {
                    -(2 * k as i128 + 1)
                },
            )
        })
        .take_while(|&(n, _)| n <= x)
        .collect()
}

fn dilate_terms(terms: &[(usize, i128)], d: usize, x: usize) -> Vec<(usize, i128)> {
    terms
        .iter()
        .map(|&(n, c)| (n * d, c))
        .filter(|&(n, _)| n <= x)
        .collect()
}

fn sparse_to_dense(terms: &[(usize, i128)], x: usize) -> Vec<i128> {
    let mut v = vec![0i128; x + 1];
    for &(n, c) in terms {
        if n <= x {
            v[n] += c;
        }
    }
    v
}

/// Π(1 − qⁿ) truncated at q^X (the eta function without its q^{1/24}).
pub fn eta_expansion(truncation: u64) -> Result<QSeries> {
    if truncation == 0 {
        return invalid("truncation must be ≥ 1");
    }
    let x = truncation as usize;
    let coeffs = sparse_to_dense(&pentagonal_terms(x), x);
    QSeries::from_i128(Weight::from_twice(1), 1, CharacterTag::Trivial, coeffs)
}

/// Π(1 − qⁿ)³ from Jacobi's identity.
pub fn eta_cubed_expansion(truncation: u64) -> Result<QSeries> {
    if truncation == 0 {
        return invalid("truncation must be ≥ 1");
    }
    let x = truncation as usize;
    QSeries::from_i128(
        Weight::from_twice(3),
        1,
        CharacterTag::Trivial,
        sparse_to_dense(&eta_cubed_terms(x), x),
    )
}

/// θ(z) = 1 + 2 Σ q^{m²}, weight 1/2, level 4.
pub fn theta_expansion(truncation: u64) -> Result<QSeries> {
    if truncation == 0 {
        return invalid("truncation must be ≥ 1");
    }
    let x = truncation as usize;
    let mut v = vec![0i128; x + 1];
    v[0] = 1;
    for m in 1usize.. {
        if m * m > x {
            break;
        }
        v[m * m] = 2;
    }
    QSeries::from_i128(Weight::from_twice(1), 4, CharacterTag::Trivial, v)
}

/// Δ(z) = q Π(1 − qⁿ)^24, built as eight sparse passes of η³.
pub fn delta_expansion(truncation: u64) -> Result<QSeries> {
    if truncation == 0 {
        return invalid("truncation must be ≥ 1");
    }
    let x = truncation as usize;
    let body = power_of_sparse(&eta_cubed_terms(x - 1), 8, x - 1);
    let mut coeffs = match body {
        Coeffs::Small(v) => Coeffs::Small(std::iter::once(0).chain(v).collect()),
        Coeffs::Big(v) => Coeffs::Big(std::iter::once(BigInt::zero()).chain(v).collect()),
    };
    if let Coeffs::Small(v) = &mut coeffs {
        v.truncate(x + 1);
    }
    QSeries::build(Weight::integral(12), 1, CharacterTag::Trivial, coeffs)
}

/// (Σ terms)^k up to index x by k sparse × dense passes.
fn power_of_sparse(terms: &[(usize, i128)], k: u32, x: usize) -> Coeffs {
    let mut acc = Coeffs::Small(sparse_to_dense(&[(0, 1)], x));
    let sparse = Coeffs::Small(sparse_to_dense(terms, x));
    for _ in 0..k {
        acc = convolve(&sparse, &acc, x);
    }
    acc
}

/// Divide a dense series by a sparse one with constant term 1.
fn divide_by_sparse(num: Coeffs, terms: &[(usize, i128)], x: usize) -> Coeffs {
    debug_assert_eq!(terms.first(), Some(&(0, 1)));
    let tail: Vec<(usize, i128)> = terms.iter().copied().filter(|&(n, _)| n > 0).collect();
    if let Coeffs::Small(f) = &num {
        let mut g = vec![0i128; x + 1];
        let mut ok = true;
        'outer: for n in 0..=x {
            let mut acc = f[n];
            for &(i, c) in &tail {
                if i > n {
                    break;
                }
                match c.checked_mul(g[n - i]).and_then(|p| acc.checked_sub(p)) {
                    Some(v) => acc = v,
                    None => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            g[n] = acc;
        }
        if ok {
            return Coeffs::Small(g);
        }
    }
    let f = num.to_big();
    let mut g: Vec<BigInt> = vec![BigInt::zero(); x + 1];
    for n in 0..=x {
        let mut acc = f[n].clone();
        for &(i, c) in &tail {
            if i > n {
                break;
            }
            acc -= &g[n - i] * c;
        }
        g[n] = acc;
    }
    Coeffs::Big(g)
}

/// Dilation z ↦ dz that also raises the truncation to `truncation`
/// (which must not exceed d·X).
fn dilate_extend(s: &QSeries, d: u64, truncation: u64) -> Result<QSeries> {
    if truncation > d * s.truncation() + d - 1 {
        return Err(Error::Truncation {
            required: truncation,
            available: d * s.truncation() + d - 1,
        });
    }
    let x = truncation as usize;
    let d = d as usize;
    let src = s.coeffs_bigint();
    let mut out = vec![BigInt::zero(); x + 1];
    for (n, c) in src.into_iter().enumerate() {
        if n * d <= x {
            out[n * d] = c;
        }
    }
    QSeries::from_bigint(s.weight(), s.level() * d as u64, s.character(), out)
}

/// An eta quotient Π η(d z)^{r_d}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaQuotientSpec {
    pub factors: Vec<(u64, i32)>,
}

impl EtaQuotientSpec {
    pub fn new(factors: Vec<(u64, i32)>) -> Result<Self> {
        if factors.iter().any(|&(d, _)| d == 0) {
            return invalid("eta quotient dilations must be positive");
        }
        let spec = Self { factors };
        spec.q_order()?;
        Ok(spec)
    }

    /// The leading power Σ d·r / 24, which must be a non-negative integer.
    pub fn q_order(&self) -> Result<u64> {
        let s: i64 = self.factors.iter().map(|&(d, r)| d as i64 * r as i64).sum();
        if s < 0 || s % 24 != 0 {
            return invalid(format!("Σ d·r = {s} is not a non-negative multiple of 24"));
        }
        Ok((s / 24) as u64)
    }

    /// Twice the weight, Σ r.
    pub fn twice_weight(&self) -> Result<u32> {
        let s: i64 = self.factors.iter().map(|&(_, r)| r as i64).sum();
        u32::try_from(s)
            .map_err(|_| Error::InvalidArgument(format!("eta quotient has negative weight {s}/2")))
    }
}

/// Expand an eta quotient to q^X. The level is supplied by the caller
/// (validity of the quotient as a modular form is not certified).
pub fn eta_quotient(spec: &EtaQuotientSpec, truncation: u64, level: u64) -> Result<QSeries> {
    if truncation == 0 {
        return invalid("truncation must be ≥ 1");
    }
    let shift = spec.q_order()? as usize;
    let twice = spec.twice_weight()?;
    let x = truncation as usize;
    let mut coeffs = Coeffs::Small(vec![0i128; x + 1]);
    if shift <= x {
        let body_len = x - shift;
        let mut body = Coeffs::Small(sparse_to_dense(&[(0, 1)], body_len));
        for &(d, r) in &spec.factors {
            let d = d as usize;
            let cubes = dilate_terms(&eta_cubed_terms(body_len), d, body_len);
            let ones = dilate_terms(&pentagonal_terms(body_len), d, body_len);
            let plan = [
                (cubes.as_slice(), r.unsigned_abs() / 3),
                (ones.as_slice(), r.unsigned_abs() % 3),
            ];
            for (terms, times) in plan {
                let sparse = Coeffs::Small(sparse_to_dense(terms, body_len));
                for _ in 0..times {
                    body = if r > 0 {
                        convolve(&sparse, &body, body_len)
                    } else {
                        divide_by_sparse(body, terms, body_len)
                    };
                }
            }
        }
        coeffs = match body {
            Coeffs::Small(v) => {
                let mut out = vec![0i128; x + 1];
                out[shift..].copy_from_slice(&v);
                Coeffs::Small(out)
            }
            Coeffs::Big(v) => {
                let mut out = vec![BigInt::zero(); x + 1];
                for (o, c) in out[shift..].iter_mut().zip(v) {
                    *o = c;
                }
                Coeffs::Big(out)
            }
        };
    }
    QSeries::build(
        Weight::from_twice(twice),
        level,
        CharacterTag::Trivial,
        coeffs,
    )
}

/// The forms shipped with the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinForm {
    /// θ(z)Δ(z), weight 25/2, level 4.
    ThetaDelta,
    /// η(8z)³, weight 3/2, level 64: a unary theta series.
    Eta8Cubed,
    /// 2^12 · θ(z)Δ(4z): the Fricke image of θΔ.
    ThetaDeltaFricke,
}

impl BuiltinForm {
    pub const ALL: [BuiltinForm; 3] = [
        BuiltinForm::ThetaDelta,
        BuiltinForm::Eta8Cubed,
        BuiltinForm::ThetaDeltaFricke,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinForm::ThetaDelta => "theta_delta",
            BuiltinForm::Eta8Cubed => "eta8_cubed",
            BuiltinForm::ThetaDeltaFricke => "theta_delta_fricke",
        }
    }
}

impl fmt::Display for BuiltinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BuiltinForm::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownForm(s.to_string()))
    }
}

/// Build a named form to q^X.
pub fn builtin_form(name: &str, truncation: u64) -> Result<QSeries> {
    let form: BuiltinForm = name.parse()?;
    let weight = Weight::from_twice(25);
    match form {
        BuiltinForm::ThetaDelta => {
            let prod = multiply(
                &theta_expansion(truncation)?,
                &delta_expansion(truncation)?,
                truncation,
            )?;
            prod.with_metadata(weight, 4, CharacterTag::Trivial)
        }
        BuiltinForm::Eta8Cubed => {
            eta_quotient(&EtaQuotientSpec::new(vec![(8, 3)])?, truncation, 64)
        }
        BuiltinForm::ThetaDeltaFricke => {
            // Δ(4z) to q^X only needs Δ to q^{X/4}.
            let delta4 = dilate_extend(&delta_expansion((truncation / 4).max(1))?, 4, truncation)?;
            let prod = multiply(&theta_expansion(truncation)?, &delta4, truncation)?;
            Ok(prod.scale(THETA_DELTA_FRICKE_SCALAR).with_metadata(
                weight,
                4,
                CharacterTag::FourN,
            )?)
        }
    }
}
