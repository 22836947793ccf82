//! Compensated summation.
//!
//! Bucketed reductions over 10^6 terms of mixed sign lose several digits
//! with naive accumulation, and partitioned (parallel) sums must agree with
//! the serial order to ~1e-12. Neumaier's variant of Kahan summation handles
//! both: the running compensation survives terms larger than the sum.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another accumulator into this one, keeping both compensations.
    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a slice.
pub fn sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<Neumaier>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        // Naive summation returns 0 here.
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(&xs), 2.0);
    }

    #[test]
    fn merge_matches_serial() {
        let xs: Vec<f64> = (1..10_000)
            .map(|k| ((k * 7919) % 1000) as f64 / (k as f64) - 0.3)
            .collect();
        let serial = sum(&xs);
        let mut merged = Neumaier::new();
        for chunk in xs.chunks(333) {
            merged.merge(&chunk.iter().copied().collect());
        }
        assert!((serial - merged.value()).abs() <= 1e-12 * serial.abs().max(1.0));
    }
}
