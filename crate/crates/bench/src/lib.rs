//! Shared inputs for the benchmarks in `benches/`.

use hiw_core::{builtin_form, QSeries};

/// θΔ truncated at `n`, built once per benchmark group.
pub fn theta_delta(n: u64) -> QSeries {
    builtin_form("theta_delta", n).expect("theta_delta is built in")
}
