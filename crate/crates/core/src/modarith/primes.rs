//! Deterministic primality and prime search.

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

// The first twelve primes are a deterministic witness set below 3.3e24.
const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller–Rabin with a witness set that is exact for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime ≥ n.
pub fn next_prime(n: u64) -> u64 {
    let mut k = n.max(2);
    while !is_prime(k) {
        k += 1;
    }
    k
}

/// Largest prime ≤ n, if any.
pub fn prev_prime(n: u64) -> Option<u64> {
    let mut k = n;
    while k >= 2 {
        if is_prime(k) {
            return Some(k);
        }
        k -= 1;
    }
    None
}

/// The odd prime nearest to `target`; ties go to the smaller prime.
pub fn nearest_odd_prime(target: f64) -> u64 {
    let t = target.max(3.0);
    let below = prev_prime(t.floor() as u64).filter(|&p| p >= 3);
    let above = next_prime((t.ceil() as u64).max(3));
    match below {
        Some(b) if (t - b as f64) <= (above as f64 - t) => b,
        _ => above,
    }
}

/// Nearest odd prime to x^e.
pub fn nearest_prime_to_power(x: f64, e: f64) -> u64 {
    nearest_odd_prime(x.powf(e))
}
