//! Shared inputs for the operator benchmarks.

use kantorovich::operators::{OperatorSpec, Variant};

/// `n` equispaced points on `[a, b]`.
pub fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub fn spec(variant: Variant, w: f64) -> OperatorSpec {
    OperatorSpec::standard(variant).with_w(w).expect("valid w")
}
