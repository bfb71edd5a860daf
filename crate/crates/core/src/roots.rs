//! Real roots of `A z² + B z + C`.

use crate::scalar::Scalar;

/// `A z² + B z + C` evaluated in Horner form.
#[inline]
pub fn eval_quadratic<T: Scalar>(a: T, b: T, c: T, z: T) -> T {
    (a * z + b) * z + c
}

/// Real roots in ascending order, without duplicates for a double root.
///
/// Uses the cancellation-free pair `q = -(B + sign(B)√D)/2`, `z₁ = q/A`,
/// `z₂ = C/q`, then one Newton step per root, kept only if it lowers `|Q|`.
/// A discriminant that is negative only at rounding level is treated as zero.
pub fn real_quadratic_roots<T: Scalar>(a: T, b: T, c: T) -> Vec<T> {
    let zero = T::zero();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    if a == zero {
        if b == zero {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let bb = b * b;
    let fourac = four * a * c;
    let mut disc = bb - fourac;
    let noise = T::lit(8.0) * T::epsilon() * (bb.abs() + fourac.abs());
    if disc < zero {
        if -disc <= noise {
            disc = zero;
        } else {
            return Vec::new();
        }
    }
    let sq = disc.sqrt();
    let mut roots = if disc == zero {
        vec![-b / (two * a)]
    } else {
        let sign = if b < zero { -T::one() } else { T::one() };
        let q = -(b + sign * sq) / two;
        if q == zero {
            // b = 0 and c = 0
            vec![zero]
        } else {
            vec![q / a, c / q]
        }
    };
    for z in roots.iter_mut() {
        *z = newton_polish(a, b, c, *z);
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    roots.dedup();
    roots
}

fn newton_polish<T: Scalar>(a: T, b: T, c: T, z: T) -> T {
    let q = eval_quadratic(a, b, c, z);
    let dq = T::lit(2.0) * a * z + b;
    if q == T::zero() || dq == T::zero() {
        return z;
    }
    let next = z - q / dq;
    if next.is_finite() && eval_quadratic(a, b, c, next).abs() < q.abs() {
        next
    } else {
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        assert_eq!(real_quadratic_roots(1.0, -3.0, 2.0), vec![1.0, 2.0]);
        let r: Vec<f64> = real_quadratic_roots(0.5, 0.0, -0.02);
        assert!((r[0] + 0.2).abs() < 1e-16 && (r[1] - 0.2).abs() < 1e-16);
        assert!(real_quadratic_roots(1.0, 0.0, 1.0).is_empty());
        assert_eq!(real_quadratic_roots(1.0, 2.0, 1.0), vec![-1.0]);
        assert_eq!(real_quadratic_roots(0.0, 2.0, -1.0), vec![0.5]);
    }

    #[test]
    fn no_cancellation_for_small_root() {
        // roots 1e-9 and 1e9
        let roots: Vec<f64> = real_quadratic_roots(1.0, -(1e9 + 1e-9), 1.0);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 1e-9).abs() < 1e-24);
        assert!((roots[1] - 1e9).abs() < 1e-6);
    }

    #[test]
    fn nearly_coincident_roots() {
        // (z - 0.02)(z - 0.02001)
        let (r1, r2) = (0.02f64, 0.020_01f64);
        let roots = real_quadratic_roots(1.0, -(r1 + r2), r1 * r2);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - r1).abs() < 1e-14);
        assert!((roots[1] - r2).abs() < 1e-14);
    }
}
