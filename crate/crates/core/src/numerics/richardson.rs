//! Step-refinement helpers: observed orders and extrapolated limits.

/// Observed convergence order from errors at steps `h` and `h / ratio`.
///
/// Returns `None` when either error is zero or not finite, which happens
/// when the quantity is already at the roundoff floor.
pub fn observed_order(err_coarse: f64, err_fine: f64, ratio: f64) -> Option<f64> {
    let (a, b) = (err_coarse.abs(), err_fine.abs());
    if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
        Some((a / b).ln() / ratio.ln())
    } else {
        None
    }
}

/// Limit at `x -> 0` of `g(x) = L + c x^p + ...` from two samples.
pub fn extrapolate_to_zero(x1: f64, g1: f64, x2: f64, g2: f64, p: f64) -> f64 {
    let (w1, w2) = (x1.powf(p), x2.powf(p));
    (w1 * g2 - w2 * g1) / (w1 - w2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_quadratic_error() {
        let o = observed_order(4e-4, 1e-4, 2.0).unwrap();
        assert!((o - 2.0).abs() < 1e-12);
        assert!(observed_order(0.0, 1e-4, 2.0).is_none());
    }

    #[test]
    fn extrapolation_removes_leading_term() {
        let g = |x: f64| 3.0 + 2.0 * x.sqrt();
        let l = extrapolate_to_zero(1e-2, g(1e-2), 5e-3, g(5e-3), 0.5);
        assert!((l - 3.0).abs() < 1e-13);
        let g = |x: f64| -1.0 + 5.0 * x;
        assert!((extrapolate_to_zero(0.1, g(0.1), 0.05, g(0.05), 1.0) + 1.0).abs() < 1e-13);
    }
}
