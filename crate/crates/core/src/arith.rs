//! Integer helpers: factorization, Möbius, squarefree decomposition and the
//! quadratic symbol attached to a non-fundamental discriminant.

use crate::modarith::kronecker;
use num_integer::Integer;

/// Prime factorization by trial division. Fine for the index sizes used
/// here (≤ 10^12).
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn moebius(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factorize(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

/// n = t·m² with t squarefree; returns (t, m).
pub fn squarefree_decompose(n: u64) -> (u64, u64) {
    let mut t = 1;
    let mut m = 1;
    for (p, e) in factorize(n) {
        if e % 2 == 1 {
            t *= p;
        }
        m *= p.pow(e / 2);
    }
    (t, m)
}

/// Writes n ≡ 0,1 (mod 4) as D·m² with D a fundamental discriminant.
/// Returns None for n ≡ 2,3 (mod 4) and for n = 0.
pub fn fundamental_discriminant(n: i64) -> Option<(i64, u64)> {
    if n == 0 || !matches!(n.rem_euclid(4), 0 | 1) {
        return None;
    }
    let sign = n.signum();
    let (t, m) = squarefree_decompose(n.unsigned_abs());
    let d = sign * t as i64;
    // d is squarefree; it is fundamental iff d ≡ 1 (mod 4), otherwise 4d is.
    if d.rem_euclid(4) == 1 {
        Some((d, m))
    } else {
        debug_assert!(m % 2 == 0);
        Some((4 * d, m / 2))
    }
}

/// The quadratic character (n|·) for arbitrary nonzero n: the character
/// modulo |n| (n ≡ 0,1 mod 4) or 4|n| (n ≡ 2,3 mod 4) induced by (D|·),
/// where D is the fundamental discriminant with n = Dm² or 4n = Dm².
/// By convention (0|±1) = 1 and (0|d) = 0 otherwise.
pub fn extended_symbol(n: i64, d: i64) -> i8 {
    if n == 0 {
        return i8::from(d == 1 || d == -1);
    }
    let (disc, modulus) = if matches!(n.rem_euclid(4), 0 | 1) {
        (
            fundamental_discriminant(n).expect("n is 0 or 1 mod 4").0,
            n.unsigned_abs(),
        )
    } else {
        (
            fundamental_discriminant(4 * n).expect("4n is 0 mod 4").0,
            4 * n.unsigned_abs(),
        )
    };
    if d.unsigned_abs().gcd(&modulus) != 1 {
        return 0;
    }
    kronecker(disc, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_divisors() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(999_983), vec![(999_983, 1)]);
    }

    #[test]
    fn moebius_values() {
        let expect = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1];
        for (n, &m) in (1..=10).zip(&expect) {
            assert_eq!(moebius(n), m, "mu({n})");
        }
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_decompose(72), (2, 6));
        assert_eq!(squarefree_decompose(49), (1, 7));
        assert!(is_squarefree(30));
        assert!(!is_squarefree(18));
    }

    #[test]
    fn fundamental_discriminants() {
        assert_eq!(fundamental_discriminant(-4), Some((-4, 1)));
        assert_eq!(fundamental_discriminant(12), Some((12, 1)));
        assert_eq!(fundamental_discriminant(-3 * 25), Some((-3, 5)));
        assert_eq!(fundamental_discriminant(8 * 9), Some((8, 3)));
        assert_eq!(fundamental_discriminant(-12), Some((-3, 2)));
        assert_eq!(fundamental_discriminant(2), None);
    }

    #[test]
    fn extended_symbol_matches_kronecker_on_fundamentals_and_coprime_odd() {
        for n in [-7i64, -4, -3, 5, 8, 12, 13] {
            for d in 1..60i64 {
                if d.unsigned_abs().gcd(&n.unsigned_abs()) == 1 {
                    assert_eq!(extended_symbol(n, d), kronecker(n, d), "({n}|{d})");
                }
            }
        }
        // (-1|·) is the character mod 4: (-1|3) = -1, (-1|5) = 1, (-1|2) = 0.
        assert_eq!(extended_symbol(-1, 3), -1);
        assert_eq!(extended_symbol(-1, 5), 1);
        assert_eq!(extended_symbol(-1, 2), 0);
        // Imprimitive: (9|·) is trivial away from 3.
        assert_eq!(extended_symbol(9, 5), 1);
        assert_eq!(extended_symbol(9, 3), 0);
        assert_eq!(extended_symbol(0, 1), 1);
        assert_eq!(extended_symbol(0, 3), 0);
    }
}
