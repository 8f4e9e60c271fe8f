//! Adaptive Simpson quadrature, with a variant for square-root edges.

const MAX_DEPTH: u32 = 48;

fn simpson_rec(
    f: &mut dyn FnMut(f64) -> f64,
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
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

/// `∫_a^b f` to absolute tolerance `tol` (best effort past the depth cap).
pub fn adaptive_simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Four panels up front so that narrow features are not skipped.
    let panels = 4;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += simpson_rec(&mut f, x0, x1, f0, fm, f1, whole, tol / panels as f64, 0);
    }
    total
}

/// `∫_a^b f` for integrands with square-root behaviour at both ends:
/// `x = a + u²` on the left half and `x = b − u²` on the right half.
pub fn integrate_sqrt_edges(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let c = 0.5 * (a + b);
    let w = (c - a).sqrt();
    let left = adaptive_simpson(|u| 2.0 * u * f(a + u * u), 0.0, w, 0.5 * tol);
    let right = adaptive_simpson(|u| 2.0 * u * f(b - u * u), 0.0, w, 0.5 * tol);
    left + right
}
