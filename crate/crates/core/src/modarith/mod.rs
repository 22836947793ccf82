//! Modular arithmetic, quadratic characters, and Salié sums modulo an odd
//! prime.

mod primes;

pub use primes::{
    is_prime, mul_mod, nearest_odd_prime, nearest_prime_to_power, next_prime, pow_mod, prev_prime,
};

use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Largest modulus for which [`PrimeCtx::with_tables`] will precompute
/// per-residue tables.
pub const MAX_TABLE_PRIME: u64 = 1 << 24;

/// An odd prime, optionally with precomputed residue, inverse and
/// root-of-unity tables.
#[derive(Clone, Debug)]
pub struct PrimeCtx {
    p: u64,
    tables: Option<Tables>,
}

#[derive(Clone, Debug)]
struct Tables {
    chi: Vec<i8>,
    residues: Vec<u64>,
    inverse: Vec<u64>,
    roots: Vec<Complex64>,
}

impl PrimeCtx {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p, tables: None })
    }

    /// Like [`PrimeCtx::new`], plus O(p) lookup tables.
    pub fn with_tables(p: u64) -> Result<Self> {
        let mut ctx = Self::new(p)?;
        if p > MAX_TABLE_PRIME {
            return invalid(format!("tables requested for p={p} > {MAX_TABLE_PRIME}"));
        }
        let n = p as usize;
        let mut chi = vec![-1i8; n];
        chi[0] = 0;
        for y in 1..=(p - 1) / 2 {
            chi[mul_mod(y, y, p) as usize] = 1;
        }
        let residues = (1..p).filter(|&a| chi[a as usize] == 1).collect();
        let mut inverse = vec![0u64; n];
        if n > 1 {
            inverse[1] = 1;
        }
        for a in 2..n {
            // inv(a) = -(p / a) * inv(p mod a)
            let q = (p / a as u64) as u128;
            let r = inverse[(p % a as u64) as usize] as u128;
            inverse[a] = ((p as u128 - (q * r) % p as u128) % p as u128) as u64;
        }
        let roots = (0..p).map(|k| unit_root(k, p)).collect();
        ctx.tables = Some(Tables {
            chi,
            residues,
            inverse,
            roots,
        });
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The (p−1)/2 quadratic residues in increasing order, if tables exist.
    pub fn residues(&self) -> Option<&[u64]> {
        self.tables.as_ref().map(|t| t.residues.as_slice())
    }

    #[inline]
    pub fn reduce(&self, a: i64) -> u64 {
        a.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    fn reduce_i128(&self, a: i128) -> u64 {
        a.rem_euclid(self.p as i128) as u64
    }

    pub fn inverse(&self, a: i64) -> Option<u64> {
        let r = self.reduce(a);
        if r == 0 {
            return None;
        }
        Some(match &self.tables {
            Some(t) => t.inverse[r as usize],
            None => pow_mod(r, self.p - 2, self.p),
        })
    }

    #[inline]
    fn root(&self, k: u64) -> Complex64 {
        match &self.tables {
            Some(t) => t.roots[k as usize],
            None => unit_root(k, self.p),
        }
    }

    /// Smallest positive quadratic non-residue.
    pub fn least_non_residue(&self) -> u64 {
        (2..self.p)
            .find(|&a| legendre(a as i64, self) == -1)
            .expect("odd primes have non-residues")
    }
}

/// e(k/q) for 0 ≤ k < q, evaluated on the nearer side of the circle.
#[inline]
fn unit_root(k: u64, q: u64) -> Complex64 {
    let k = k as i128;
    let q = q as i128;
    let centred = if 2 * k > q { k - q } else { k };
    let (s, c) = (TAU * centred as f64 / q as f64).sin_cos();
    Complex64::new(c, s)
}

/// Legendre symbol (a|p) by Euler's criterion.
pub fn legendre(a: i64, ctx: &PrimeCtx) -> i8 {
    let r = ctx.reduce(a);
    if let Some(t) = &ctx.tables {
        return t.chi[r as usize];
    }
    match pow_mod(r, (ctx.p - 1) / 2, ctx.p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Jacobi symbol (a|n) for odd positive n.
pub fn jacobi(a: i64, n: u64) -> i8 {
    assert!(n % 2 == 1, "Jacobi symbol needs an odd modulus");
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut result = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Kronecker symbol (a|n) for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1i8;
    let mut m = n;
    if m < 0 {
        m = -m;
        if a < 0 {
            result = -result;
        }
    }
    let tz = m.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && (a.rem_euclid(8) == 3 || a.rem_euclid(8) == 5) {
            result = -result;
        }
        m >>= tz;
    }
    result * jacobi(a, m as u64)
}

/// ε_d: 1 if d ≡ 1 (mod 4), i if d ≡ 3 (mod 4). Defined for positive odd d.
pub fn eps(d: i64) -> Result<Complex64> {
    if d <= 0 || d % 2 == 0 {
        return invalid(format!("eps needs a positive odd integer, got {d}"));
    }
    Ok(if d % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    })
}

/// e_q(a) = exp(2πi a/q), with a reduced mod q first.
pub fn ep(a: i64, q: u64) -> Complex64 {
    unit_root(a.rem_euclid(q as i64) as u64, q)
}

/// Inverse of a modulo m (m ≥ 1), if gcd(a, m) = 1.
pub fn inv_mod(a: i64, m: u64) -> Option<u64> {
    let m_i = m as i128;
    let (mut r0, mut r1) = (m_i, (a as i128).rem_euclid(m_i));
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m_i) as u64)
}

/// The canonical square root √x^p ∈ [1, (p−1)/2] of a quadratic residue.
pub fn sqrt_mod(x: i64, ctx: &PrimeCtx) -> Result<u64> {
    let p = ctx.p;
    let a = ctx.reduce(x);
    if a == 0 {
        return Err(Error::ZeroResidue { x, p });
    }
    if legendre(a as i64, ctx) != 1 {
        return Err(Error::NonResidue { x, p });
    }
    let root = tonelli_shanks(a, ctx);
    Ok(if root > (p - 1) / 2 { p - root } else { root })
}

fn tonelli_shanks(a: u64, ctx: &PrimeCtx) -> u64 {
    let p = ctx.p;
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = ctx.least_non_residue();
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// Normalized Salié sum (1/√p) Σ_{b mod p}^× (b|p) e_p(ub + v b̄), summed
/// term by term.
pub fn salie_direct(u: i64, v: i64, ctx: &PrimeCtx) -> Complex64 {
    let p = ctx.p;
    let u = ctx.reduce(u) as u128;
    let v = ctx.reduce(v) as u128;
    let mut acc = Complex64::new(0.0, 0.0);
    for b in 1..p {
        let chi = legendre(b as i64, ctx);
        let binv = ctx.inverse(b as i64).expect("b is a unit") as u128;
        let k = ((u * b as u128 + v * binv) % p as u128) as u64;
        let z = ctx.root(k);
        if chi == 1 {
            acc += z;
        } else {
            acc -= z;
        }
    }
    acc / (p as f64).sqrt()
}

/// Salié sum via (v|p) ε_p Σ_{y² ≡ uv} e_p(2y). Requires p ∤ uv.
pub fn salie_closed(u: i64, v: i64, ctx: &PrimeCtx) -> Result<Complex64> {
    let p = ctx.p;
    let uv = ctx.reduce_i128(u as i128 * v as i128);
    if uv == 0 {
        return Err(Error::SalieDegenerate { u, v, p });
    }
    if legendre(uv as i64, ctx) != 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let y = sqrt_mod(uv as i64, ctx)?;
    let two_y = mul_mod(2, y, p);
    let s = ctx.root(two_y) + ctx.root(p - two_y);
    Ok(s * eps(p as i64)? * legendre(v, ctx) as f64)
}

/// Sa_p(y) = e_p(√y^p) + e_p(−√y^p) for (y|p) = 1, else 0.
///
/// For y ≡ 0 (mod p) the value is not defined by the theory; this returns
/// 0 and callers that care should test [`sa_is_degenerate`].
pub fn sa(y: i64, ctx: &PrimeCtx) -> Complex64 {
    match sqrt_mod(y, ctx) {
        Ok(r) => Complex64::new(2.0 * (TAU * r as f64 / ctx.p as f64).cos(), 0.0),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

pub fn sa_is_degenerate(y: i64, ctx: &PrimeCtx) -> bool {
    ctx.reduce(y) == 0
}

/// δ_p(x): 1 if p | x, else 0.
pub fn delta_p(x: i64, p: u64) -> u8 {
    u8::from(x.rem_euclid(p as i64) == 0)
}

/// Number of sign vectors e ∈ {±1}⁴ with Σ e_i √(μ m_i)^p ≡ 0 (mod p).
pub fn quadruple_delta_count(m: [i64; 4], mu: i64, ctx: &PrimeCtx) -> Result<u32> {
    let p = ctx.p as i64;
    let mut roots = [0i64; 4];
    for (r, &mi) in roots.iter_mut().zip(&m) {
        let prod = (mu as i128 * mi as i128).rem_euclid(p as i128) as i64;
        if legendre(prod, ctx) != 1 {
            return invalid(format!(
                "μ·m = {mu}·{mi} is not a nonzero square modulo {p}"
            ));
        }
        *r = sqrt_mod(prod, ctx)? as i64;
    }
    let mut count = 0;
    for signs in 0u32..16 {
        let s: i64 = (0..4)
            .map(|i| {
                if signs >> i & 1 == 1 {
                    -roots[i]
                } else {
                    roots[i]
                }
            })
            .sum();
        count += u32::from(delta_p(s, ctx.p) == 1);
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_legendre(a: i64, p: u64) -> i8 {
        let r = a.rem_euclid(p as i64) as u64;
        if r == 0 {
            0
        } else if (1..p).any(|y| y * y % p == r) {
            1
        } else {
            -1
        }
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn prime_ctx_rejects_composites_and_two() {
        assert!(PrimeCtx::new(2).is_err());
        assert!(PrimeCtx::new(9).is_err());
        assert!(PrimeCtx::new(1).is_err());
        assert!(PrimeCtx::new(97).is_ok());
    }

    #[test]
    fn residue_table_has_half_the_units() {
        for p in [3u64, 5, 7, 97, 211] {
            let ctx = PrimeCtx::with_tables(p).unwrap();
            let res = ctx.residues().unwrap();
            assert_eq!(res.len() as u64, (p - 1) / 2);
            assert!(res.iter().all(|&r| brute_legendre(r as i64, p) == 1));
        }
    }

    #[test]
    fn legendre_exhaustive_against_brute_force() {
        for p in (3..500).filter(|&p| is_prime(p)) {
            let plain = PrimeCtx::new(p).unwrap();
            let tabled = PrimeCtx::with_tables(p).unwrap();
            for a in -(p as i64)..(2 * p as i64) {
                let b = brute_legendre(a, p);
                assert_eq!(legendre(a, &plain), b, "({a}|{p})");
                assert_eq!(legendre(a, &tabled), b, "({a}|{p}) tabled");
            }
        }
    }

    #[test]
    fn legendre_examples() {
        let c7 = PrimeCtx::new(7).unwrap();
        assert_eq!(legendre(2, &c7), 1);
        assert_eq!(legendre(3, &c7), -1);
        assert_eq!(legendre(1, &PrimeCtx::new(101).unwrap()), 1);
    }

    #[test]
    fn jacobi_and_kronecker_agree_with_legendre_on_primes() {
        for p in (3..200u64).filter(|&p| is_prime(p)) {
            let ctx = PrimeCtx::new(p).unwrap();
            for a in -50..50 {
                assert_eq!(jacobi(a, p), legendre(a, &ctx));
                assert_eq!(kronecker(a, p as i64), legendre(a, &ctx));
            }
        }
        // Jacobi is multiplicative in the modulus.
        assert_eq!(jacobi(2, 15), jacobi(2, 3) * jacobi(2, 5));
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(1, 2), 1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(-1, -1), -1);
    }

    #[test]
    fn eps_values() {
        assert_eq!(eps(5).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(eps(7).unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(eps(1).unwrap(), Complex64::new(1.0, 0.0));
        assert!(eps(-3).is_err());
        assert!(eps(4).is_err());
    }

    #[test]
    fn ep_reduction_and_modulus() {
        assert!(close(ep(0, 7), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(ep(7, 7), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(ep(-3, 7), ep(4, 7), 1e-15));
        for a in 0..1000 {
            assert!((ep(a, 997).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn inverses() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(-1, 7), Some(6));
        assert_eq!(inv_mod(6, 9), None);
        let ctx = PrimeCtx::with_tables(211).unwrap();
        for a in 1..211 {
            assert_eq!(mul_mod(ctx.inverse(a).unwrap(), a as u64, 211), 1);
            assert_eq!(ctx.inverse(a), inv_mod(a, 211));
        }
    }

    #[test]
    fn sqrt_mod_examples() {
        let c7 = PrimeCtx::new(7).unwrap();
        assert_eq!(sqrt_mod(2, &c7).unwrap(), 3);
        assert!(matches!(sqrt_mod(3, &c7), Err(Error::NonResidue { .. })));
        assert!(matches!(sqrt_mod(14, &c7), Err(Error::ZeroResidue { .. })));
        assert_eq!(sqrt_mod(1, &PrimeCtx::new(10007).unwrap()).unwrap(), 1);
    }

    #[test]
    fn sqrt_mod_exhaustive_small_primes() {
        for p in (3..10_000u64).filter(|&p| is_prime(p)) {
            let ctx = PrimeCtx::new(p).unwrap();
            let mut seen = 0;
            for y in 1..=(p - 1) / 2 {
                let x = (y * y % p) as i64;
                let r = sqrt_mod(x, &ctx).unwrap();
                assert_eq!(r, y, "p={p} x={x}");
                seen += 1;
            }
            assert_eq!(seen, (p - 1) / 2);
        }
    }

    #[test]
    fn salie_examples() {
        let c3 = PrimeCtx::new(3).unwrap();
        let minus_i = Complex64::new(0.0, -1.0);
        assert!(close(salie_direct(1, 1, &c3), minus_i, 1e-12));
        assert!(close(salie_closed(1, 1, &c3).unwrap(), minus_i, 1e-12));
        let c5 = PrimeCtx::new(5).unwrap();
        let golden = 2.0 * (2.0 * TAU / 5.0).cos();
        assert!(close(
            salie_closed(1, 1, &c5).unwrap(),
            Complex64::new(golden, 0.0),
            1e-12
        ));
        assert!(close(
            salie_direct(1, 1, &c5),
            Complex64::new(golden, 0.0),
            1e-12
        ));
        assert_eq!(salie_closed(1, 2, &c5).unwrap(), Complex64::new(0.0, 0.0));
        assert!(salie_direct(1, 2, &c5).norm() < 1e-12);
        assert!(salie_direct(0, 0, &PrimeCtx::new(97).unwrap()).norm() < 1e-12);
        assert!(matches!(
            salie_closed(0, 3, &c5),
            Err(Error::SalieDegenerate { .. })
        ));
    }

    #[test]
    fn salie_conjugation_and_bound() {
        for p in [5u64, 13, 31, 43] {
            let ctx = PrimeCtx::with_tables(p).unwrap();
            let mut worst = 0.0f64;
            for u in 1..p as i64 {
                for v in 1..p as i64 {
                    let s = salie_direct(u, v, &ctx);
                    assert!(close(salie_direct(-u, -v, &ctx), s.conj(), 1e-12));
                    worst = worst.max(s.norm());
                }
            }
            assert!(worst <= 2.0 + 1e-12, "p={p}: max |Sal| = {worst}");
        }
    }

    #[test]
    fn sa_examples() {
        let c5 = PrimeCtx::new(5).unwrap();
        assert!((sa(1, &c5).re - 2.0 * (TAU / 5.0).cos()).abs() < 1e-12);
        assert_eq!(sa(2, &c5), Complex64::new(0.0, 0.0));
        assert!((sa(4, &c5).re - 2.0 * (2.0 * TAU / 5.0).cos()).abs() < 1e-12);
        assert_eq!(sa(5, &c5), Complex64::new(0.0, 0.0));
        assert!(sa_is_degenerate(10, &c5));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_p(0, 7), 1);
        assert_eq!(delta_p(7, 7), 1);
        assert_eq!(delta_p(-14, 7), 1);
        assert_eq!(delta_p(1, 7), 0);
    }

    #[test]
    fn quadruple_counts() {
        let c97 = PrimeCtx::new(97).unwrap();
        assert_eq!(quadruple_delta_count([1, 1, 2, 2], 1, &c97).unwrap(), 4);
        assert_eq!(quadruple_delta_count([1, 1, 1, 1], 1, &c97).unwrap(), 6);
        let c101 = PrimeCtx::new(101).unwrap();
        assert_eq!(quadruple_delta_count([1, 4, 9, 25], 1, &c101).unwrap(), 0);
        // (5|97) = (97|5) = (2|5) = -1
        assert!(quadruple_delta_count([1, 1, 1, 5], 1, &c97).is_err());
    }

    #[test]
    fn least_non_residue() {
        assert_eq!(PrimeCtx::new(7).unwrap().least_non_residue(), 3);
        assert_eq!(PrimeCtx::new(23).unwrap().least_non_residue(), 5);
    }
}
