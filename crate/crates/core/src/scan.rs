//! Bracketing and bisection for first-crossing searches along rays.

/// Finds the first sign change of `f` from negative to non-negative on
/// `(0, t_max]`, scanning with `steps` uniform samples, and refines it by
/// bisection until the bracket is narrower than `tol`.
///
/// Returns `None` when no sign change is found.
pub(crate) fn first_crossing<F: Fn(f64) -> f64>(f: F, t_max: f64, steps: usize, tol: f64) -> Option<f64> {
    let h = t_max / steps as f64;
    let mut lo = 0.0;
    let mut f_lo = f(0.0);
    for i in 1..=steps {
        let t = if i == steps { t_max } else { i as f64 * h };
        let v = f(t);
        if f_lo < 0.0 && v >= 0.0 {
            return Some(bisect(&f, lo, t, tol));
        }
        lo = t;
        f_lo = v;
    }
    None
}

/// Bisection on a bracket with `f(lo) < 0 <= f(hi)`.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// True if `f` returns below zero somewhere on `(from, t_max]`.
pub(crate) fn reenters<F: Fn(f64) -> f64>(f: F, from: f64, t_max: f64, steps: usize) -> bool {
    let h = (t_max - from) / steps as f64;
    (1..=steps).any(|i| f(from + i as f64 * h) < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt() {
        let r = first_crossing(|t| t * t - 0.36, 1.0, 64, 1e-14).unwrap();
        assert!((r - 0.6).abs() < 1e-13);
    }

    #[test]
    fn first_of_two() {
        let r = first_crossing(|t| (t - 0.3) * (t - 0.5) * (t - 0.7), 1.0, 200, 1e-14);
        // negative on (0,0.3), positive on (0.3,0.5), negative, positive
        assert!((r.unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn no_crossing() {
        assert!(first_crossing(|t| t - 2.0, 1.0, 16, 1e-12).is_none());
    }
}
