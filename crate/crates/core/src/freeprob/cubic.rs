//! Complex polynomial roots up to degree three (Cardano plus Newton polish).

use num_complex::Complex64 as C;

/// Leading coefficients below this fraction of the largest one are dropped.
const DEGENERATE_REL: f64 = 1e-14;

fn polish(coeffs: &[C], mut x: C) -> C {
    for _ in 0..4 {
        let (mut p, mut dp) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
        for &c in coeffs {
            dp = dp * x + p;
            p = p * x + c;
        }
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        let next = x - step;
        // Keep the step only if it does not increase the residual.
        let mut pn = C::new(0.0, 0.0);
        for &c in coeffs {
            pn = pn * next + c;
        }
        if pn.norm() <= p.norm() {
            x = next;
        } else {
            break;
        }
    }
    x
}

fn cbrt(z: C) -> C {
    if z.norm() == 0.0 {
        z
    } else {
        z.powf(1.0 / 3.0)
    }
}

/// Roots of `a x³ + b x² + c x + d`. Coefficients that are negligible
/// relative to the others lower the degree, so fewer roots may come back.
pub fn poly3_roots(a: C, b: C, c: C, d: C) -> Vec<C> {
    let scale = [a, b, c, d].iter().fold(0.0_f64, |m, v| m.max(v.norm()));
    if scale == 0.0 {
        return Vec::new();
    }
    let small = |v: C| v.norm() <= DEGENERATE_REL * scale;
    if small(a) {
        if small(b) {
            if small(c) {
                return Vec::new();
            }
            return vec![-d / c];
        }
        // b x² + c x + d
        let disc = (c * c - b * d * 4.0).sqrt();
        let q = if (c.conj() * disc).re >= 0.0 {
            (c + disc) * -0.5
        } else {
            (c - disc) * -0.5
        };
        let coeffs = [b, c, d];
        let mut out = Vec::with_capacity(2);
        if q.norm() > 0.0 {
            out.push(polish(&coeffs, q / b));
            out.push(polish(&coeffs, d / q));
        } else {
            out.push(C::new(0.0, 0.0));
            out.push(C::new(0.0, 0.0));
        }
        return out;
    }
    let (b1, c1, d1) = (b / a, c / a, d / a);
    // x = t − b1/3 ; t³ + p t + q = 0
    let shift = b1 / 3.0;
    let p = c1 - b1 * b1 / 3.0;
    let q = b1 * b1 * b1 * (2.0 / 27.0) - b1 * c1 / 3.0 + d1;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let (u1, u2) = (-q / 2.0 + disc, -q / 2.0 - disc);
    let u = cbrt(if u1.norm() >= u2.norm() { u1 } else { u2 });
    let omega = C::new(-0.5, 3f64.sqrt() / 2.0);
    let coeffs = [a, b, c, d];
    let mut out = Vec::with_capacity(3);
    let mut w = C::new(1.0, 0.0);
    for _ in 0..3 {
        let uk = u * w;
        let t = if uk.norm() == 0.0 {
            C::new(0.0, 0.0)
        } else {
            uk - p / (uk * 3.0)
        };
        out.push(polish(&coeffs, t - shift));
        w *= omega;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(coeffs: &[C], x: C) -> C {
        coeffs.iter().fold(C::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    #[test]
    fn recovers_known_roots() {
        let r = [C::new(1.0, 0.0), C::new(-2.0, 0.5), C::new(0.3, -4.0)];
        // (x − r0)(x − r1)(x − r2)
        let a = C::new(1.0, 0.0);
        let b = -(r[0] + r[1] + r[2]);
        let c = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        let d = -(r[0] * r[1] * r[2]);
        let got = poly3_roots(a, b, c, d);
        for want in r {
            assert!(got.iter().any(|g| (g - want).norm() < 1e-13), "{want} not in {got:?}");
        }
    }

    #[test]
    fn triple_root_and_zero() {
        let one = C::new(1.0, 0.0);
        let got = poly3_roots(one, one * -3.0, one * 3.0, -one);
        for g in got {
            assert!((g - one).norm() < 1e-5);
        }
        let got = poly3_roots(one, C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
        assert!(got.iter().all(|g| g.norm() < 1e-15));
    }

    #[test]
    fn degenerate_degrees() {
        let z = C::new(0.0, 0.0);
        let one = C::new(1.0, 0.0);
        let got = poly3_roots(z, one, z, -one * 4.0);
        assert_eq!(got.len(), 2);
        assert!(got.iter().any(|g| (g - 2.0).norm() < 1e-15));
        assert!(got.iter().any(|g| (g + 2.0).norm() < 1e-15));
        let got = poly3_roots(z, z, one * 2.0, -one);
        assert_eq!(got, vec![C::new(0.5, 0.0)]);
        assert!(poly3_roots(z, z, z, z).is_empty());
    }

    #[test]
    fn residuals_small_on_random_cubics() {
        let mut s = 7u64;
        let mut r = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..200 {
            let co = [C::new(r(), r()), C::new(r(), r()), C::new(r(), r()), C::new(r(), r())];
            let roots = poly3_roots(co[0], co[1], co[2], co[3]);
            assert_eq!(roots.len(), 3);
            for x in roots {
                let scale = co.iter().map(|c| c.norm()).sum::<f64>() * (1.0 + x.norm()).powi(3);
                assert!(eval(&co, x).norm() < 1e-12 * scale);
            }
        }
    }
}
