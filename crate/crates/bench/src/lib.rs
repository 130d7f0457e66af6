//! Inputs shared by the benchmarks.

use unitroot_core::{simulate_ar1, TimeSeries};

/// A reproducible AR(1) sample of length `t`.
pub fn sample(rho: f64, t: usize) -> TimeSeries {
    simulate_ar1(rho, t, 0.0, 1.0, 42).expect("valid simulation arguments")
}
