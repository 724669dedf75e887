//! Central finite-difference gradients for validating analytic gradients.

use ndarray::Array1;

/// Central-difference gradient of a scalar function, with a per-coordinate
/// step chosen by the caller.
pub fn central_diff_gradient(
    f: impl Fn(&Array1<f64>) -> f64,
    x: &Array1<f64>,
    step: impl Fn(usize) -> f64,
) -> Array1<f64> {
    let mut probe = x.clone();
    let mut grad = Array1::zeros(x.len());
    for i in 0..x.len() {
        let h = step(i);
        probe[i] = x[i] + h;
        let plus = f(&probe);
        probe[i] = x[i] - h;
        let minus = f(&probe);
        probe[i] = x[i];
        grad[i] = (plus - minus) / (2.0 * h);
    }
    grad
}

/// `||a - b|| / max(||b||, floor)` with a small floor so near-zero gradients
/// do not blow up the ratio.
pub fn relative_error(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    assert_eq!(a.len(), b.len(), "relative_error length mismatch");
    let diff = a - b;
    let num = diff.dot(&diff).sqrt();
    let den = b.dot(b).sqrt().max(1e-8);
    num / den
}

/// Step size used when differentiating the smoothed regularizer: the
/// curvature scales like `1/eta`, so the step shrinks with `eta` but never
/// below `1e-6`.
pub fn eta_aware_step(eta: f64) -> f64 {
    (1e-3 * eta).max(1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn quadratic_gradient() {
        let f = |v: &Array1<f64>| v[0] * v[0] + 2.0 * v[0] * v[1] + v[1] * v[1];
        let g = central_diff_gradient(f, &array![1.0, 2.0], |_| 1e-6);
        assert!((g[0] - 6.0).abs() < 1e-7);
        assert!((g[1] - 6.0).abs() < 1e-7);
    }

    #[test]
    fn relative_error_scales() {
        let a = array![1.0, 0.0];
        let b = array![1.0, 1e-3];
        let r = relative_error(&a, &b);
        assert!((r - 1e-3 / (1.0 + 1e-6_f64).sqrt()).abs() < 1e-9);
    }
}
