//! Truncated q-expansions with exact integer coefficients.
//!
//! Coefficients live in `i128` while they fit (everything up to θΔ at
//! X = 10^6 does) and fall back to `BigInt` otherwise. The normalized
//! floating view a(n) = c(n)/n^{(k−1)/2}, with k the weight, is derived
//! lazily on first use.

mod eta;
mod io;

pub use eta::{
    builtin_form, delta_expansion, eta_cubed_expansion, eta_expansion, eta_quotient,
    theta_expansion, BuiltinForm, EtaQuotientSpec, THETA_DELTA_FRICKE_SCALAR,
};
pub use io::{format_qexp, parse_qexp, read_qexp, write_qexp, QexpFile};

use crate::error::{invalid, Error, Result};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

/// Weight ℓ + 1/2, stored as two_k = 2ℓ + 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfWeight {
    two_k: u32,
}

impl HalfWeight {
    pub fn new(two_k: u32) -> Result<Self> {
        if two_k % 2 == 0 || two_k < 3 {
            return invalid(format!(
                "half-integral weight needs odd two_k ≥ 3, got {two_k}"
            ));
        }
        Ok(Self { two_k })
    }

    pub fn two_k(self) -> u32 {
        self.two_k
    }

    pub fn ell(self) -> u32 {
        (self.two_k - 1) / 2
    }
}

/// Weight of a series: twice the weight, so that 1/2 and 25/2 are exact.
/// Odd values are half-integral weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Weight {
    twice: u32,
}

impl Weight {
    pub const fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    pub const fn integral(k: u32) -> Self {
        Self { twice: 2 * k }
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    /// The half-integral weight view, if the weight is ℓ + 1/2 with ℓ ≥ 1.
    pub fn half(self) -> Option<HalfWeight> {
        HalfWeight::new(self.twice).ok()
    }

    /// ℓ for a half-integral weight ℓ + 1/2.
    pub fn ell(self) -> Result<u32> {
        self.half().map(HalfWeight::ell).ok_or_else(|| {
            Error::InvalidArgument(format!("weight {}/2 is not ℓ+1/2 with ℓ ≥ 1", self.twice))
        })
    }

    /// Exponent e in a(n) = c(n)/n^e, i.e. (k−1)/2 for weight k. For
    /// k = ℓ + 1/2 this is (ℓ − 1/2)/2.
    pub fn normalization_exponent(self) -> f64 {
        (self.twice as f64 - 2.0) / 4.0
    }

    pub fn add(self, other: Weight) -> Weight {
        Weight {
            twice: self.twice + other.twice,
        }
    }
}

impl From<HalfWeight> for Weight {
    fn from(h: HalfWeight) -> Self {
        Weight { twice: h.two_k }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.twice)
    }
}

/// Character bookkeeping. Only a tag: no character arithmetic is done
/// beyond what the Hecke module needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterTag {
    Trivial,
    FourN,
    User,
}

impl fmt::Display for CharacterTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CharacterTag::Trivial => "trivial",
            CharacterTag::FourN => "four_n",
            CharacterTag::User => "user",
        })
    }
}

impl FromStr for CharacterTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trivial" => Ok(CharacterTag::Trivial),
            "four_n" => Ok(CharacterTag::FourN),
            "user" => Ok(CharacterTag::User),
            other => invalid(format!(
                "unknown character tag `{other}` (expected trivial, four_n or user)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Coeffs {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

impl Coeffs {
    fn len(&self) -> usize {
        match self {
            Coeffs::Small(v) => v.len(),
            Coeffs::Big(v) => v.len(),
        }
    }

    /// Demote to i128 storage when every value fits.
    fn normalize(self) -> Self {
        match self {
            Coeffs::Big(v) => {
                let small: Option<Vec<i128>> = v.iter().map(ToPrimitive::to_i128).collect();
                match small {
                    Some(s) => Coeffs::Small(s),
                    None => Coeffs::Big(v),
                }
            }
            small => small,
        }
    }

    fn to_big(&self) -> Vec<BigInt> {
        match self {
            Coeffs::Small(v) => v.iter().map(|&c| BigInt::from(c)).collect(),
            Coeffs::Big(v) => v.clone(),
        }
    }
}

/// A q-expansion Σ_{n=0}^{X} c(n) qⁿ with exact integer coefficients.
///
/// Immutable once built; the normalized floating view is computed at most
/// once and shared.
#[derive(Clone, Debug)]
pub struct QSeries {
    weight: Weight,
    level: u64,
    character: CharacterTag,
    coeffs: Coeffs,
    normalized: OnceLock<Vec<f64>>,
}

impl PartialEq for QSeries {
    fn eq(&self, other: &Self) -> bool {
        self.weight == other.weight
            && self.level == other.level
            && self.character == other.character
            && self.coeffs == other.coeffs
    }
}

impl QSeries {
    /// Series c(0..=X) from machine integers; `coeffs.len()` is X + 1.
    pub fn from_i128(
        weight: Weight,
        level: u64,
        character: CharacterTag,
        coeffs: Vec<i128>,
    ) -> Result<Self> {
        Self::build(weight, level, character, Coeffs::Small(coeffs))
    }

    pub fn from_bigint(
        weight: Weight,
        level: u64,
        character: CharacterTag,
        coeffs: Vec<BigInt>,
    ) -> Result<Self> {
        Self::build(weight, level, character, Coeffs::Big(coeffs).normalize())
    }

    pub(crate) fn build(
        weight: Weight,
        level: u64,
        character: CharacterTag,
        coeffs: Coeffs,
    ) -> Result<Self> {
        if level == 0 {
            return invalid("level must be positive");
        }
        if coeffs.len() < 2 {
            return invalid("a series needs truncation X ≥ 1");
        }
        Ok(Self {
            weight,
            level,
            character,
            coeffs: coeffs.normalize(),
            normalized: OnceLock::new(),
        })
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn character(&self) -> CharacterTag {
        self.character
    }

    /// X: the largest index with a known coefficient.
    pub fn truncation(&self) -> u64 {
        (self.coeffs.len() - 1) as u64
    }

    /// Same coefficients, different metadata.
    pub fn with_metadata(
        &self,
        weight: Weight,
        level: u64,
        character: CharacterTag,
    ) -> Result<Self> {
        Self::build(weight, level, character, self.coeffs.clone())
    }

    /// c(n), or an error for n beyond the truncation.
    pub fn coeff(&self, n: u64) -> Result<BigInt> {
        self.check_index(n)?;
        Ok(match &self.coeffs {
            Coeffs::Small(v) => BigInt::from(v[n as usize]),
            Coeffs::Big(v) => v[n as usize].clone(),
        })
    }

    /// c(n) as i128 if it fits.
    pub fn coeff_i128(&self, n: u64) -> Result<Option<i128>> {
        self.check_index(n)?;
        Ok(match &self.coeffs {
            Coeffs::Small(v) => Some(v[n as usize]),
            Coeffs::Big(v) => v[n as usize].to_i128(),
        })
    }

    pub fn is_zero_at(&self, n: u64) -> bool {
        match &self.coeffs {
            Coeffs::Small(v) => v.get(n as usize).is_none_or(|c| *c == 0),
            Coeffs::Big(v) => v.get(n as usize).is_none_or(Zero::is_zero),
        }
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n > self.truncation() {
            return Err(Error::Truncation {
                required: n,
                available: self.truncation(),
            });
        }
        Ok(())
    }

    /// All coefficients c(0..=X) as big integers.
    pub fn coeffs_bigint(&self) -> Vec<BigInt> {
        self.coeffs.to_big()
    }

    /// Coefficients as i128, when all fit.
    pub fn coeffs_i128(&self) -> Option<&[i128]> {
        match &self.coeffs {
            Coeffs::Small(v) => Some(v),
            Coeffs::Big(_) => None,
        }
    }

    /// Indices n ≥ 1 with c(n) ≠ 0.
    pub fn support(&self) -> Vec<u64> {
        (1..=self.truncation())
            .filter(|&n| !self.is_zero_at(n))
            .collect()
    }

    /// The normalized array a(0..=X), a(0) = 0 by convention.
    pub fn normalized(&self) -> &[f64] {
        self.normalized.get_or_init(|| {
            let e = self.weight.normalization_exponent();
            let mut out = vec![0.0; self.coeffs.len()];
            for (n, slot) in out.iter_mut().enumerate().skip(1) {
                let c = match &self.coeffs {
                    Coeffs::Small(v) => v[n] as f64,
                    Coeffs::Big(v) => v[n].to_f64().unwrap_or(f64::NAN),
                };
                if c != 0.0 {
                    *slot = c / (n as f64).powf(e);
                }
            }
            out
        })
    }

    /// a(n) = c(n) / n^{(k−1)/2}.
    pub fn normalized_coeff(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return invalid("normalized coefficients start at n = 1");
        }
        self.check_index(n)?;
        Ok(self.normalized()[n as usize])
    }

    /// A view of the normalized coefficients for the statistics modules.
    pub fn view(&self) -> CoeffView<'_> {
        CoeffView {
            a: self.normalized(),
            level: self.level,
        }
    }

    /// Series cut down to a smaller truncation.
    pub fn truncate(&self, x: u64) -> Result<QSeries> {
        if x == 0 || x > self.truncation() {
            return invalid(format!(
                "cannot truncate series at {} to {x}",
                self.truncation()
            ));
        }
        let n = x as usize + 1;
        let coeffs = match &self.coeffs {
            Coeffs::Small(v) => Coeffs::Small(v[..n].to_vec()),
            Coeffs::Big(v) => Coeffs::Big(v[..n].to_vec()),
        };
        Self::build(self.weight, self.level, self.character, coeffs)
    }

    /// k · f.
    pub fn scale(&self, k: i64) -> QSeries {
        let coeffs = match &self.coeffs {
            Coeffs::Small(v) => match v
                .iter()
                .map(|c| c.checked_mul(k as i128))
                .collect::<Option<Vec<_>>>()
            {
                Some(s) => Coeffs::Small(s),
                None => Coeffs::Big(v.iter().map(|&c| BigInt::from(c) * k).collect()),
            },
            Coeffs::Big(v) => Coeffs::Big(v.iter().map(|c| c * k).collect()),
        };
        Self::build(self.weight, self.level, self.character, coeffs).expect("metadata unchanged")
    }

    /// f + g over the common truncation. Metadata is taken from `self`.
    pub fn add(&self, other: &QSeries) -> QSeries {
        let x = self.truncation().min(other.truncation()) as usize;
        let coeffs = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Small(a), Coeffs::Small(b)) => {
                match (0..=x)
                    .map(|n| a[n].checked_add(b[n]))
                    .collect::<Option<Vec<_>>>()
                {
                    Some(s) => Coeffs::Small(s),
                    None => Coeffs::Big((0..=x).map(|n| BigInt::from(a[n]) + b[n]).collect()),
                }
            }
            _ => {
                let a = self.coeffs.to_big();
                let b = other.coeffs.to_big();
                Coeffs::Big((0..=x).map(|n| &a[n] + &b[n]).collect())
            }
        };
        Self::build(self.weight, self.level, self.character, coeffs).expect("metadata unchanged")
    }

    /// Largest |c(n)| over the series, as f64 (for diagnostics).
    pub fn max_abs_f64(&self) -> f64 {
        match &self.coeffs {
            Coeffs::Small(v) => v
                .iter()
                .map(|c| c.unsigned_abs() as f64)
                .fold(0.0, f64::max),
            Coeffs::Big(v) => v
                .iter()
                .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max),
        }
    }
}

/// Normalized coefficients a(0..=X) plus the level, which is all the
/// statistics modules need. Synthetic coefficient sequences can be wrapped
/// directly.
#[derive(Clone, Copy, Debug)]
pub struct CoeffView<'a> {
    pub a: &'a [f64],
    pub level: u64,
}

impl<'a> CoeffView<'a> {
    pub fn new(a: &'a [f64], level: u64) -> Self {
        Self { a, level }
    }

    pub fn truncation(&self) -> u64 {
        self.a.len().saturating_sub(1) as u64
    }

    /// Error unless a(n) is known for all n ≤ x.
    pub fn require(&self, x: f64) -> Result<()> {
        let need = x.floor().max(0.0) as u64;
        if need > self.truncation() {
            return Err(Error::Truncation {
                required: need,
                available: self.truncation(),
            });
        }
        Ok(())
    }
}

/// Dilation z ↦ dz: the result has c'(dn) = c(n), same truncation.
pub fn dilate(s: &QSeries, d: u64) -> Result<QSeries> {
    if d == 0 {
        return invalid("dilation factor must be ≥ 1");
    }
    let x = s.truncation() as usize;
    let d = d as usize;
    let coeffs = match &s.coeffs {
        Coeffs::Small(v) => {
            let mut out = vec![0i128; x + 1];
            for n in 0..=x / d {
                out[n * d] = v[n];
            }
            Coeffs::Small(out)
        }
        Coeffs::Big(v) => {
            let mut out = vec![BigInt::zero(); x + 1];
            for n in 0..=x / d {
                out[n * d] = v[n].clone();
            }
            Coeffs::Big(out)
        }
    };
    QSeries::build(s.weight, s.level * d as u64, s.character, coeffs)
}

/// Exact product truncated at `truncation`. Weight adds; the level is the
/// lcm of the two levels (callers override with `with_metadata` when they
/// know better).
pub fn multiply(a: &QSeries, b: &QSeries, truncation: u64) -> Result<QSeries> {
    if truncation == 0 {
        return invalid("truncation must be ≥ 1");
    }
    let avail = a.truncation().min(b.truncation());
    if truncation > avail {
        return Err(Error::Truncation {
            required: truncation,
            available: avail,
        });
    }
    let x = truncation as usize;
    // Sparse side: fewer nonzero terms.
    let (sparse, dense) = if a.support().len() <= b.support().len() {
        (a, b)
    } else {
        (b, a)
    };
    let coeffs = convolve(&sparse.coeffs, &dense.coeffs, x);
    let level = num_integer::lcm(a.level, b.level);
    let character = if a.character == b.character {
        a.character
    } else {
        CharacterTag::User
    };
    QSeries::build(a.weight.add(b.weight), level, character, coeffs)
}

/// Sparse × dense convolution up to index x, choosing the integer backend.
pub(crate) fn convolve(sparse: &Coeffs, dense: &Coeffs, x: usize) -> Coeffs {
    if let (Coeffs::Small(s), Coeffs::Small(d)) = (sparse, dense) {
        let terms: Vec<(usize, i128)> = s
            .iter()
            .take(x + 1)
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| (i, *c))
            .collect();
        if let Some(out) = convolve_small(&terms, &d[..=x.min(d.len() - 1)], x) {
            return Coeffs::Small(out);
        }
    }
    let s = sparse.to_big();
    let d = dense.to_big();
    let mut out = vec![BigInt::zero(); x + 1];
    for (i, c) in s.iter().enumerate().take(x + 1) {
        if c.is_zero() {
            continue;
        }
        for (j, dj) in d.iter().enumerate().take(x + 1 - i) {
            if !dj.is_zero() {
                out[i + j] += c * dj;
            }
        }
    }
    Coeffs::Big(out)
}

/// i128 convolution. When a crude a-priori bound shows no overflow the
/// inner loop is unchecked; otherwise it runs checked and reports overflow
/// with None.
pub(crate) fn convolve_small(
    terms: &[(usize, i128)],
    dense: &[i128],
    x: usize,
) -> Option<Vec<i128>> {
    let mut out = vec![0i128; x + 1];
    let dmax = dense.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    let smass = terms
        .iter()
        .try_fold(0u128, |acc, (_, c)| acc.checked_add(c.unsigned_abs()));
    let safe = smass
        .and_then(|m| m.checked_mul(dmax))
        .is_some_and(|b| b <= i128::MAX as u128);
    if safe {
        for &(i, c) in terms {
            if i > x {
                continue;
            }
            let len = (x + 1 - i).min(dense.len());
            let (dst, src) = (&mut out[i..i + len], &dense[..len]);
            match c {
                1 => dst.iter_mut().zip(src).for_each(|(o, d)| *o += d),
                -1 => dst.iter_mut().zip(src).for_each(|(o, d)| *o -= d),
                _ => dst.iter_mut().zip(src).for_each(|(o, d)| *o += c * d),
            }
        }
        return Some(out);
    }
    for &(i, c) in terms {
        if i > x {
            continue;
        }
        let len = (x + 1 - i).min(dense.len());
        for j in 0..len {
            let prod = c.checked_mul(dense[j])?;
            out[i + j] = out[i + j].checked_add(prod)?;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(coeffs: &[i128]) -> QSeries {
        QSeries::from_i128(
            Weight::integral(0),
            1,
            CharacterTag::Trivial,
            coeffs.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn half_weight_invariants() {
        assert!(HalfWeight::new(25).is_ok());
        assert_eq!(HalfWeight::new(25).unwrap().ell(), 12);
        assert!(HalfWeight::new(24).is_err());
        assert!(HalfWeight::new(1).is_err());
        assert_eq!(Weight::from_twice(3).normalization_exponent(), 0.25);
        assert_eq!(Weight::from_twice(25).normalization_exponent(), 5.75);
    }

    #[test]
    fn character_tags_round_trip() {
        for tag in [
            CharacterTag::Trivial,
            CharacterTag::FourN,
            CharacterTag::User,
        ] {
            assert_eq!(tag.to_string().parse::<CharacterTag>().unwrap(), tag);
        }
        assert!("odd".parse::<CharacterTag>().is_err());
    }

    #[test]
    fn multiply_by_one_is_identity() {
        let f = series(&[0, 1, -2, 0, 5, 7]);
        let one = series(&[1, 0, 0, 0, 0, 0]);
        assert_eq!(
            multiply(&f, &one, 5).unwrap().coeffs_i128().unwrap(),
            f.coeffs_i128().unwrap()
        );
    }

    #[test]
    fn multiply_truncation_errors() {
        let f = series(&[1, 1, 1]);
        assert!(matches!(multiply(&f, &f, 3), Err(Error::Truncation { .. })));
        assert!(multiply(&f, &f, 0).is_err());
    }

    #[test]
    fn overflow_switches_to_bigint() {
        let big = i128::MAX / 3;
        let f = series(&[big, big]);
        let sq = multiply(&f, &f, 1).unwrap();
        assert!(sq.coeffs_i128().is_none());
        assert_eq!(sq.coeff(0).unwrap(), BigInt::from(big) * BigInt::from(big));
        assert_eq!(
            sq.coeff(1).unwrap(),
            BigInt::from(big) * BigInt::from(big) * 2
        );
    }

    #[test]
    fn bigint_input_demotes_when_small() {
        let s = QSeries::from_bigint(
            Weight::integral(1),
            1,
            CharacterTag::Trivial,
            vec![BigInt::from(0), BigInt::from(3)],
        )
        .unwrap();
        assert!(s.coeffs_i128().is_some());
        assert_eq!(
            s,
            series(&[0, 3])
                .with_metadata(Weight::integral(1), 1, CharacterTag::Trivial)
                .unwrap()
        );
    }

    #[test]
    fn dilate_basics() {
        let f = series(&[1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(dilate(&f, 1).unwrap().coeffs_i128(), f.coeffs_i128());
        let g = dilate(&f, 3).unwrap();
        assert_eq!(g.coeffs_i128().unwrap(), &[1, 0, 0, 2, 0, 0, 3]);
        assert!(dilate(&f, 0).is_err());
    }

    #[test]
    fn normalized_and_index_errors() {
        let f = QSeries::from_i128(
            Weight::from_twice(3),
            4,
            CharacterTag::Trivial,
            vec![0, 1, 0, 0, 0, 0, 0, 0, 0, -3],
        )
        .unwrap();
        assert_eq!(f.normalized_coeff(1).unwrap(), 1.0);
        assert!((f.normalized_coeff(9).unwrap() + 3f64.sqrt()).abs() < 1e-15);
        assert!(f.normalized_coeff(0).is_err());
        assert!(matches!(
            f.normalized_coeff(10),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn scale_and_add() {
        let f = series(&[0, 1, 2, 3]);
        let g = series(&[0, -1, 0, 1, 9]);
        assert_eq!(f.scale(-2).coeffs_i128().unwrap(), &[0, -2, -4, -6]);
        assert_eq!(f.add(&g).coeffs_i128().unwrap(), &[0, 0, 2, 4]);
    }
}
