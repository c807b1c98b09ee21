//! Adaptive Simpson quadrature.
//!
//! This is the workhorse behind every "check the closed form against a raw
//! integral" test in the library: beta-type integrals, bubble energy terms and
//! the continuation envelope all funnel through [`integrate`]. It is kept
//! deliberately independent of the Gamma-function module so the two can verify
//! each other.

/// Hard cap on bisection depth; 2^52 subintervals is far past the point where
/// f64 panel widths stop being representable, so this only guards runaway
/// recursion on pathological integrands.
const MAX_DEPTH: u32 = 52;

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// `tol` is an absolute tolerance on the result; each bisection halves the
/// budget, and a panel is accepted when the classic Richardson estimate
/// `|S_fine - S_coarse| < 15 tol` holds. Integrable endpoint behaviour is the
/// caller's problem (shift the endpoint or substitute first).
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol.max(f64::MIN_POSITIVE), 0)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        // Richardson extrapolation: Simpson's error shrinks 16x per halving.
        return left + right + delta / 15.0;
    }
    let half_tol = 0.5 * tol;
    adaptive(f, a, m, fa, flm, fm, left, half_tol, depth + 1)
        + adaptive(f, m, b, fm, frm, fb, right, half_tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        // Simpson is exact on cubics, so the adaptive wrapper must be too.
        let v = integrate(&|x| 3.0 * x * x + 2.0 * x - 1.0, -1.0, 2.0, 1e-12);
        assert!((v - (9.0 + 3.0 - 3.0)).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn smooth_transcendental() {
        let v = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11, "got {v}");
    }

    #[test]
    fn mildly_singular_derivative() {
        // sqrt has unbounded derivative at 0 but the adaptive split copes.
        let v = integrate(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - 2.0 / 3.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(&|x: f64| x.exp(), 1.5, 1.5, 1e-12), 0.0);
    }

    #[test]
    fn steep_peak_resolved() {
        // Narrow Gaussian: total mass sqrt(pi)/50 over the real line; the
        // window [-1, 1] captures all but ~1e-40 of it.
        let s = 0.02;
        let v = integrate(&|x: f64| (-x * x / (s * s)).exp(), -1.0, 1.0, 1e-14);
        let exact = std::f64::consts::PI.sqrt() * s;
        assert!((v - exact).abs() < 1e-12, "got {v} want {exact}");
    }
}
