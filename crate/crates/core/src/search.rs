//! One-dimensional golden-section maximization and bisection root finding.

/// `1/φ`.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` (absolute) or after
/// `max_iter` shrink steps. Each step reuses one interior evaluation.
pub fn golden_max(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Maximum {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while (b - a) > tol && iterations < max_iter {
        iterations += 1;
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    // The bracket ends are never evaluated inside the loop; a monotone
    // objective must still be able to report its boundary.
    let (fa, fb) = (f(lo), f(hi));
    if fa > value && fa >= fb {
        return Maximum {
            x: lo,
            value: fa,
            iterations,
        };
    }
    if fb > value {
        return Maximum {
            x: hi,
            value: fb,
            iterations,
        };
    }
    Maximum {
        x,
        value,
        iterations,
    }
}

/// Bisection for a sign change of `f` on `[a, b]`. Returns `None` if
/// `f(a)` and `f(b)` share a sign.
pub fn bisect(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let m = golden_max(|x| -(x - 1.3) * (x - 1.3) + 2.0, -5.0, 5.0, 1e-10, 500);
        assert!((m.x - 1.3).abs() < 1e-7);
        assert!((m.value - 2.0).abs() < 1e-15);
        assert!(m.iterations > 10);
    }

    #[test]
    fn reports_boundary_for_monotone() {
        let m = golden_max(|x| x, 0.0, 1.0, 1e-12, 500);
        assert_eq!(m.x, 1.0);
        let m = golden_max(|x| -x, 0.0, 1.0, 1e-12, 500);
        assert_eq!(m.x, 0.0);
    }

    #[test]
    fn bisect_roots() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-10).is_none());
        assert_eq!(bisect(|x| x, 0.0, 1.0, 1e-10), Some(0.0));
    }
}
