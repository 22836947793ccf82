//! The B kernel against its Hankel-transform form
//!   B(y) = 2π ∫ w(t) J_{ℓ−1/2}(4π√(yt)) dt,
//! with the half-integer Bessel function built from spherical Bessel
//! functions by Miller's downward recurrence.

use hiw_core::voronoi::BKernel;
use hiw_core::Window;
use std::f64::consts::PI;

/// j_n(z) for z > 0 by downward recurrence.
fn spherical_j(n: usize, z: f64) -> f64 {
    let start = n + 40 + (2.0 * z) as usize;
    let (mut hi, mut mid) = (0.0f64, 1e-300f64);
    let mut at_n = 0.0;
    for k in (1..=start).rev() {
        let lo = (2 * k + 1) as f64 / z * mid - hi;
        hi = mid;
        mid = lo;
        if k - 1 == n {
            at_n = mid;
        }
        if mid.abs() > 1e250 {
            hi *= 1e-250;
            mid *= 1e-250;
            at_n *= 1e-250;
        }
    }
    // Normalise against whichever of j_0, j_1 is further from a zero.
    let (j0, j1) = (z.sin() / z, z.sin() / (z * z) - z.cos() / z);
    if j0.abs() >= j1.abs() {
        at_n * j0 / mid
    } else {
        at_n * j1 / hi
    }
}

fn bessel_half(ell: usize, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    (2.0 * z / PI).sqrt() * spherical_j(ell - 1, z)
}

fn hankel_oracle(w: &Window, ell: usize, y: f64) -> f64 {
    let (a, b) = w.support();
    let n = 40_000;
    let h = (b - a) / n as f64;
    let f = |t: f64| w.eval(t) * bessel_half(ell, 4.0 * PI * (y * t).sqrt());
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * PI * s * h / 3.0
}

#[test]
fn spherical_bessel_sanity() {
    let z: f64 = 3.7;
    let j1 = z.sin() / (z * z) - z.cos() / z;
    assert!((spherical_j(1, z) - j1).abs() < 1e-14);
    let j2 = (3.0 / (z * z) - 1.0) * z.sin() / z - 3.0 * z.cos() / (z * z);
    assert!((spherical_j(2, z) - j2).abs() < 1e-14);
}

#[test]
fn kernel_matches_hankel_transform() {
    let w = Window::standard_bump();
    for ell in [12usize, 4] {
        let k = BKernel::new(&w, ell as u32).unwrap();
        let scale = hankel_oracle(&w, ell, 1.0).abs().max(1e-3);
        for y in [0.02, 0.2, 0.7, 1.0, 3.3, 10.0, 40.0] {
            let got = k.eval(y);
            let want = hankel_oracle(&w, ell, y);
            assert!(
                (got - want).abs() < 1e-9 * scale,
                "ℓ={ell} y={y}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn kernel_on_scaled_window() {
    let w = Window::scaled_bump(0.25, 0.75).unwrap();
    let k = BKernel::new(&w, 12).unwrap();
    for y in [0.1, 1.0, 5.0] {
        let want = hankel_oracle(&w, 12, y);
        assert!(
            (k.eval(y) - want).abs() < 1e-9 * want.abs().max(1e-3),
            "y={y}"
        );
    }
}
