//! Special functions used across the crate.

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Tail of the Riemann zeta series, `sum_{k >= from} k^(-s)`, for `s > 1`.
///
/// Sums directly up to `from + 10_000` and closes with an Euler-Maclaurin
/// remainder; the neglected term is below `1e-20` relative for the exponents
/// used here.
pub fn zeta_tail(s: f64, from: u64) -> f64 {
    assert!(s > 1.0, "zeta_tail needs s > 1");
    let from = from.max(1);
    let cut = from + 10_000;
    let mut head = 0.0;
    // smallest terms first
    for k in (from..cut).rev() {
        head += (k as f64).powf(-s);
    }
    head + euler_maclaurin_tail(s, cut as f64)
}

/// `sum_{k >= n} k^(-s)` via Euler-Maclaurin with three Bernoulli corrections.
pub fn euler_maclaurin_tail(s: f64, n: f64) -> f64 {
    let ns = n.powf(-s);
    n.powf(1.0 - s) / (s - 1.0) + 0.5 * ns + s * ns / (12.0 * n)
        - s * (s + 1.0) * (s + 2.0) * ns / (720.0 * n * n * n)
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * ns / (30_240.0 * n.powi(5))
}

/// Riemann zeta for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    zeta_tail(s, 1)
}
