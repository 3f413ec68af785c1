//! Branch-correct square root and the free Green functions.
//!
//! Units are `ħ = 1`, `2m = 1`, so the free Hamiltonian is `-Δ` and
//! `G^w` is the kernel of `(-Δ - w)^{-1}`:
//!
//! * d = 1: `G^w(x) = i e^{i s |x|} / (2 s)`
//! * d = 3: `G^w(r) = e^{i s r} / (4 π r)`
//!
//! with `s = sqrt_upper(w)`.

use crate::error::{Error, Result};
use crate::scalar::{cx, imag_unit, Cx, Real};
use crate::space::Dimension;

/// Square root on the sheet `Im s > 0`. On the cut `[0, ∞)` the limit
/// from the upper half-plane is returned, which is real and nonnegative.
pub fn sqrt_upper<T: Real>(w: Cx<T>) -> Cx<T> {
    let s = w.sqrt();
    if s.im < T::zero() || (s.im == T::zero() && s.re < T::zero()) {
        -s
    } else {
        s
    }
}

/// True when `w` lies on `[0, ∞)`.
pub fn on_cut<T: Real>(w: Cx<T>) -> bool {
    w.im == T::zero() && w.re >= T::zero()
}

fn check_off_cut<T: Real>(w: Cx<T>) -> Result<()> {
    if on_cut(w) {
        Err(Error::OnCut { re: w.re.as_f64(), im: w.im.as_f64() })
    } else {
        Ok(())
    }
}

fn check_radius<T: Real>(r: T) -> Result<()> {
    if r < T::zero() {
        Err(Error::NegativeRadius(r.as_f64()))
    } else if r == T::zero() {
        Err(Error::SingularPoint)
    } else {
        Ok(())
    }
}

/// 1D Green function in terms of `s = sqrt_upper(w)`.
#[inline]
pub(crate) fn g1<T: Real>(s: Cx<T>, x: T) -> Cx<T> {
    let i = imag_unit::<T>();
    i * (i * s * x.abs()).exp() / (s + s)
}

/// 1D Green derivative in terms of `s`; the sign factor is `sgn(x)`, with
/// `sgn(0) = 0`.
#[inline]
pub(crate) fn g1_prime<T: Real>(s: Cx<T>, x: T) -> Cx<T> {
    let sg = if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    };
    (imag_unit::<T>() * s * x.abs()).exp() * (-sg * T::lit(0.5))
}

/// 3D Green function in terms of `s`, for `r > 0`.
#[inline]
pub(crate) fn g3<T: Real>(s: Cx<T>, r: T) -> Cx<T> {
    (imag_unit::<T>() * s * r).exp() / (T::lit(4.0) * T::PI() * r)
}

/// Free Green function `G^w(x)`. For d = 3, `x` is a radius.
pub fn green<T: Real>(dim: Dimension, w: Cx<T>, x: T) -> Result<Cx<T>> {
    check_off_cut(w)?;
    green_upper_limit(dim, w, x)
}

/// Like [`green`], but accepts `w` on the cut and returns the limit from
/// the upper half-plane. The 1D function is still undefined at `w = 0`.
pub fn green_upper_limit<T: Real>(dim: Dimension, w: Cx<T>, x: T) -> Result<Cx<T>> {
    let s = sqrt_upper(w);
    match dim {
        Dimension::One => {
            if w == Cx::new(T::zero(), T::zero()) {
                return Err(Error::BranchPoint);
            }
            Ok(g1(s, x))
        }
        Dimension::Three => {
            check_radius(x)?;
            Ok(g3(s, x))
        }
    }
}

/// `d/dx G^w(x)` in one dimension, `-sgn(x) e^{i s |x|} / 2`.
pub fn green_derivative_1d<T: Real>(w: Cx<T>, x: T) -> Result<Cx<T>> {
    check_off_cut(w)?;
    if x == T::zero() {
        return Err(Error::UndefinedSign);
    }
    Ok(g1_prime(sqrt_upper(w), x))
}

/// `⟨G^{z̄}(· - y), G^w(· - y')⟩` with `r = |y - y'|`, equal to
/// `(G^z(r) - G^w(r)) / (z - w)`. At `r = 0` the 3D value is the finite
/// limit `i (√z - √w) / (4π (z - w))`.
pub fn green_overlap<T: Real>(dim: Dimension, z: Cx<T>, w: Cx<T>, r: T) -> Result<Cx<T>> {
    check_off_cut(z)?;
    check_off_cut(w)?;
    if z == w {
        return Err(Error::DegenerateOverlap);
    }
    match dim {
        Dimension::One => Ok(overlap_1d_unchecked(z, w, r, 0)),
        Dimension::Three => {
            if r < T::zero() {
                return Err(Error::NegativeRadius(r.as_f64()));
            }
            Ok(overlap_3d_unchecked(z, w, r))
        }
    }
}

/// Derivatives in `r` of the 1D overlap profile
/// `F(r) = (G^z(r) - G^w(r)) / (z - w)`, for `order` 0, 1 or 2, with a
/// signed `r`. In terms of the parity index,
/// `⟨Φ^{z̄}_{p,a}, Φ^w_{p',b}⟩ = (-1)^p F^{(p+p')}(a - b)`.
pub fn green_overlap_1d<T: Real>(z: Cx<T>, w: Cx<T>, r: T, order: usize) -> Result<Cx<T>> {
    check_off_cut(z)?;
    check_off_cut(w)?;
    if z == w {
        return Err(Error::DegenerateOverlap);
    }
    if order > 2 {
        return Err(Error::InvalidParameter(format!("overlap derivative order {order} > 2")));
    }
    Ok(overlap_1d_unchecked(z, w, r, order))
}

pub(crate) fn overlap_1d_unchecked<T: Real>(z: Cx<T>, w: Cx<T>, r: T, order: usize) -> Cx<T> {
    let (sz, sw) = (sqrt_upper(z), sqrt_upper(w));
    let num = match order {
        0 => g1(sz, r) - g1(sw, r),
        1 => g1_prime(sz, r) - g1_prime(sw, r),
        _ => -(z * g1(sz, r)) + w * g1(sw, r),
    };
    num / (z - w)
}

pub(crate) fn overlap_3d_unchecked<T: Real>(z: Cx<T>, w: Cx<T>, r: T) -> Cx<T> {
    let (sz, sw) = (sqrt_upper(z), sqrt_upper(w));
    if r == T::zero() {
        imag_unit::<T>() * (sz - sw) / ((z - w) * T::lit(4.0) * T::PI())
    } else {
        (g3(sz, r) - g3(sw, r)) / (z - w)
    }
}

/// The coinciding-energy limit `∂_w` of [`green_overlap_1d`], i.e.
/// `⟨G^{w̄}, G^w⟩`-type overlaps needed for normalizing bound states.
pub fn green_overlap_1d_limit<T: Real>(w: Cx<T>, r: T, order: usize) -> Result<Cx<T>> {
    check_off_cut(w)?;
    let s = sqrt_upper(w);
    let i = imag_unit::<T>();
    let e = (i * s * r.abs()).exp();
    let four = T::lit(4.0);
    let dg = -e * (cx(r.abs(), T::zero()) / (s * s * four) + i / (s * s * s * four));
    Ok(match order {
        0 => dg,
        1 => -i * e * r / (s * four),
        2 => -g1(s, r) - w * dg,
        _ => return Err(Error::InvalidParameter(format!("overlap derivative order {order} > 2"))),
    })
}

/// The coinciding-energy limit of the 3D overlap, `i e^{i s r} / (8 π s)`.
pub fn green_overlap_3d_limit<T: Real>(w: Cx<T>, r: T) -> Result<Cx<T>> {
    check_off_cut(w)?;
    if r < T::zero() {
        return Err(Error::NegativeRadius(r.as_f64()));
    }
    let s = sqrt_upper(w);
    let i = imag_unit::<T>();
    Ok(i * (i * s * r).exp() / (s * T::lit(8.0) * T::PI()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_with_breaks, QuadOptions};
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn sqrt_examples() {
        assert!(close(sqrt_upper(C::new(-1.0, 0.0)), C::new(0.0, 1.0), 1e-15));
        assert!(close(sqrt_upper(C::new(4.0, 0.0)), C::new(2.0, 0.0), 1e-15));
        assert!(close(sqrt_upper(C::new(0.0, 2.0)), C::new(1.0, 1.0), 1e-15));
        assert!(close(sqrt_upper(C::new(-1.0, -0.0)), C::new(0.0, 1.0), 1e-15));
    }

    #[test]
    fn sqrt_branch_random_annulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let rad = 10f64.powf(rng.gen_range(-3.0..3.0));
            let w = C::from_polar(rad, rng.gen_range(-PI..PI));
            let s = sqrt_upper(w);
            assert!((s * s - w).norm() <= 1e-14 * w.norm());
            if w.im != 0.0 || w.re < 0.0 {
                assert!(s.im > 0.0);
            }
            let sc = sqrt_upper(w.conj());
            assert!(close(sc, -s.conj(), 1e-15 * rad.sqrt()));
        }
    }

    #[test]
    fn green_examples() {
        let w = C::new(-1.0, 0.0);
        assert!(close(green(Dimension::One, w, 0.0).unwrap(), C::new(0.5, 0.0), 1e-15));
        let g3v = green(Dimension::Three, w, 1.0).unwrap();
        assert!(close(g3v, C::new((-1.0f64).exp() / (4.0 * PI), 0.0), 1e-15));
        // The decimal 0.0292764 agrees with e^{-1}/(4π) to five figures only.
        assert!((g3v.re - 0.0292764).abs() < 2e-6);
        assert!(close(green(Dimension::One, w, 2.0).unwrap(), C::new((-2.0f64).exp() / 2.0, 0.0), 1e-15));
        assert_eq!(green(Dimension::Three, w, 0.0), Err(Error::SingularPoint));
        assert!(matches!(green(Dimension::Three, w, -1.0), Err(Error::NegativeRadius(_))));
        assert!(matches!(green(Dimension::One, C::new(2.0, 0.0), 1.0), Err(Error::OnCut { .. })));
        assert!(green_upper_limit(Dimension::One, C::new(2.0, 0.0), 1.0).is_ok());
        assert_eq!(green_upper_limit(Dimension::One, C::new(0.0, 0.0), 1.0), Err(Error::BranchPoint));
    }

    #[test]
    fn green_conjugation_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let w = C::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let x: f64 = rng.gen_range(-3.0..3.0);
            for (dim, arg) in [(Dimension::One, x), (Dimension::Three, x.abs() + 0.01)] {
                let a = green(dim, w.conj(), arg).unwrap().conj();
                let b = green(dim, w, arg).unwrap();
                assert!(close(a, b, 1e-14 * (1.0 + b.norm())));
            }
        }
    }

    #[test]
    fn derivative_examples() {
        let e1 = (-1.0f64).exp() / 2.0;
        let w = C::new(-1.0, 0.0);
        assert!(close(green_derivative_1d(w, 1.0).unwrap(), C::new(-e1, 0.0), 1e-15));
        assert!(close(green_derivative_1d(w, -1.0).unwrap(), C::new(e1, 0.0), 1e-15));
        assert!(close(green_derivative_1d(C::new(-4.0, 0.0), 0.5).unwrap(), C::new(-e1, 0.0), 1e-15));
        assert_eq!(green_derivative_1d(w, 0.0), Err(Error::UndefinedSign));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let w = C::new(-2.0, 1.5);
        let h = 1e-6;
        for x in [-1.3, 0.4, 2.0] {
            let fd = (green(Dimension::One, w, x + h).unwrap() - green(Dimension::One, w, x - h).unwrap()) / (2.0 * h);
            assert!(close(fd, green_derivative_1d(w, x).unwrap(), 1e-8));
        }
    }

    #[test]
    fn overlap_examples() {
        let (z, w) = (C::new(-1.0, 0.0), C::new(-4.0, 0.0));
        assert!(close(green_overlap(Dimension::Three, z, w, 0.0).unwrap(), C::new(1.0 / (12.0 * PI), 0.0), 1e-15));
        assert!(close(green_overlap(Dimension::One, z, w, 0.0).unwrap(), C::new(1.0 / 12.0, 0.0), 1e-15));
        let expect = ((-1.0f64).exp() - (-2.0f64).exp()) / (12.0 * PI);
        assert!(close(green_overlap(Dimension::Three, z, w, 1.0).unwrap(), C::new(expect, 0.0), 1e-15));
        assert_eq!(green_overlap(Dimension::One, z, z, 1.0), Err(Error::DegenerateOverlap));
    }

    /// Brute-force 1D overlap: integrate the product over a truncated line
    /// with kinks as breakpoints.
    fn brute_1d(z: C, w: C, a: f64, b: f64, p: usize, q: usize) -> C {
        let (sz, sw) = (sqrt_upper(z), sqrt_upper(w));
        let dz = |x: f64| if p == 0 { g1(sz, x - a) } else { g1_prime(sz, x - a) };
        let dw = |x: f64| if q == 0 { g1(sw, x - b) } else { g1_prime(sw, x - b) };
        let decay = sz.im.min(sw.im);
        let l = 40.0 / decay;
        let (lo, hi) = (a.min(b), a.max(b));
        let opts = QuadOptions::default().with_abs_tol(1e-11);
        integrate_with_breaks(|x| dz(x) * dw(x), &[lo - l, lo, hi, hi + l], &opts).value
    }

    #[test]
    fn overlap_matches_quadrature_1d() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let z = C::new(rng.gen_range(-4.0..-0.5), rng.gen_range(-2.0..2.0));
            let w = C::new(rng.gen_range(-4.0..-0.5), rng.gen_range(-2.0..2.0));
            let a = rng.gen_range(-1.0..1.0);
            let b = rng.gen_range(-1.0..1.0);
            for (p, q) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let sign = if p == 1 { -1.0 } else { 1.0 };
                let closed = green_overlap_1d(z, w, a - b, p + q).unwrap() * sign;
                assert!(close(closed, brute_1d(z, w, a, b, p, q), 1e-6), "p={p} q={q}");
            }
        }
    }

    /// 3D overlap in prolate spheroidal coordinates about the two centres
    /// at distance r: `d³x = (r/2)³ (ξ² - η²) dξ dη dφ`, `r₁ = (r/2)(ξ+η)`,
    /// `r₂ = (r/2)(ξ-η)`.
    fn brute_3d(z: C, w: C, r: f64) -> C {
        let (sz, sw) = (sqrt_upper(z), sqrt_upper(w));
        let decay = sz.im.min(sw.im);
        let xi_max = 1.0 + 2.0 * 40.0 / (decay * r);
        let h = r / 2.0;
        let opts = QuadOptions::default().with_abs_tol(1e-10);
        let inner = |xi: f64| {
            integrate_with_breaks(
                |eta: f64| {
                    let r1 = h * (xi + eta);
                    let r2 = h * (xi - eta);
                    // (ξ² - η²) = r1 r2 / h², which cancels both 1/r poles.
                    let val = (C::i() * (sz * r1 + sw * r2)).exp() / (16.0 * PI * PI);
                    val * (h / 1.0)
                },
                &[-1.0, 1.0],
                &opts,
            )
            .value
        };
        let outer = integrate_with_breaks(inner, &[1.0, 1.0 + 1.0 / (decay * r), xi_max], &opts).value;
        outer * 2.0 * PI
    }

    #[test]
    fn overlap_matches_quadrature_3d() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let z = C::new(rng.gen_range(-4.0..-0.5), rng.gen_range(-2.0..2.0));
            let w = C::new(rng.gen_range(-4.0..-0.5), rng.gen_range(-2.0..2.0));
            let r = rng.gen_range(0.2..2.0);
            let closed = green_overlap(Dimension::Three, z, w, r).unwrap();
            assert!(close(closed, brute_3d(z, w, r), 1e-6));
        }
    }

    #[test]
    fn limit_overlaps_match_difference_quotients() {
        let w = C::new(-1.7, 0.4);
        let dz = C::new(1e-6, 1e-6);
        for r in [-0.8, 0.0, 1.1] {
            for order in 0..3 {
                let q = (overlap_1d_unchecked(w + dz, w, r, order) + overlap_1d_unchecked(w - dz, w, r, order)) / 2.0;
                let l = green_overlap_1d_limit(w, r, order).unwrap();
                assert!(close(q, l, 1e-6), "order {order} r {r}: {q} vs {l}");
            }
            let r3 = r.abs();
            let q = (overlap_3d_unchecked(w + dz, w, r3) + overlap_3d_unchecked(w - dz, w, r3)) / 2.0;
            assert!(close(q, green_overlap_3d_limit(w, r3).unwrap(), 1e-6));
        }
    }

    #[test]
    fn single_precision_green() {
        let g = green(Dimension::One, Complex::<f32>::new(-1.0, 0.0), 2.0).unwrap();
        assert!((g.re - (-2.0f32).exp() / 2.0).abs() < 1e-6);
    }

    use num_complex::Complex;
}
