//! Random models, admissible spectral points and self-adjoint boundary
//! pairs shared by the integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spinpoint::linalg::Lu;
use spinpoint::BoundaryPair;
use spinpoint::{CMatrix, ModelSpec};
use spinpoint::{Dimension, Point, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `Re z ∈ [-re, re]`, `Im z ∈ [im_lo, im_hi]`.
pub fn random_z(rng: &mut ChaCha8Rng, re: f64, im_lo: f64, im_hi: f64) -> C64 {
    cx(rng.gen_range(-re..re), rng.gen_range(im_lo..im_hi))
}

/// Like [`random_z`] with a random half-plane.
pub fn random_z_either(rng: &mut ChaCha8Rng, re: f64, im_lo: f64, im_hi: f64) -> C64 {
    let z = random_z(rng, re, im_lo, im_hi);
    if rng.gen_bool(0.5) {
        z.conj()
    } else {
        z
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: Dimension, half: f64) -> Point {
    match dim {
        Dimension::One => Point::line(rng.gen_range(-half..half)),
        Dimension::Three => {
            Point::space(rng.gen_range(-half..half), rng.gen_range(-half..half), rng.gen_range(-half..half))
        }
    }
}

/// A point at least `gap` away from every site.
pub fn random_point_off_sites(rng: &mut ChaCha8Rng, model: &ModelSpec, half: f64, gap: f64) -> Point {
    loop {
        let p = random_point(rng, model.dim(), half);
        if model.positions().iter().all(|y| p.distance(y) >= gap) {
            return p;
        }
    }
}

/// `n` sites in `[-2, 2]^d`, pairwise at least `0.4` apart, with couplings
/// in `[-1, 1]`.
pub fn random_model(rng: &mut ChaCha8Rng, dim: Dimension, n: usize) -> ModelSpec {
    let mut sites: Vec<Point> = Vec::new();
    while sites.len() < n {
        let p = random_point(rng, dim, 2.0);
        if sites.iter().all(|q| q.distance(&p) >= 0.4) {
            sites.push(p);
        }
    }
    let alpha = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ModelSpec::new(dim, sites, alpha, 6).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, amp: f64) -> CMatrix {
    CMatrix::from_fn(m, m, |_, _| cx(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))
}

/// A generic self-adjoint pair from the Cayley transform `U` of a random
/// Hermitian matrix: `A = X(U − I)`, `B = iX(U + I)` with `X` invertible.
/// `AB*` is Hermitian and `(A|B)` has full rank for every unitary `U`.
pub fn random_valid_pair(rng: &mut ChaCha8Rng, dim: Dimension, n: usize) -> BoundaryPair {
    let m = spinpoint::spinspace::index_dimension(dim, n);
    let g = random_matrix(rng, m, 1.0);
    let h = g.add(&g.adjoint()).scale(cx(0.5, 0.0));
    let ih = h.scale(cx(0.0, 1.0));
    let id = CMatrix::identity(m);
    // (I − iH)^{-1}(I + iH); the factors commute.
    let u = Lu::new(&id.sub(&ih)).solve_matrix(&id.add(&ih));
    let x = id.add(&random_matrix(rng, m, 0.3 / (m as f64).sqrt()));
    let a = x.matmul(&u.sub(&id));
    let b = x.matmul(&u.add(&id)).scale(cx(0.0, 1.0));
    BoundaryPair::new(dim, n, a, b).unwrap()
}

pub fn rel_err(got: C64, want: C64) -> f64 {
    (got - want).norm() / want.norm()
}
