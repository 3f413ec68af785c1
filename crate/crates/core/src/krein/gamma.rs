use crate::boundary::BoundaryPair;
use crate::complexmath::{g1, g1_prime, g3, on_cut, sqrt_upper};
use crate::error::{Error, Result};
use crate::linalg::{svd, CMatrix, Lu};
use crate::scalar::{imag_unit, Cx, Real};
use crate::space::Dimension;
use crate::spinspace::{index_dimension, ModelSpec};

/// Which matrix a [`GammaMatrix`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaKind {
    /// `Γ(z)`.
    Free,
    /// `Γ^{AB}(z) = B Γ(z) + A`.
    Dressed,
}

/// Treatment of a spectral point whose shifted value `z − α·σ` lands on
/// `[0, ∞)` for some configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CutPolicy {
    #[default]
    Reject,
    /// Use the limit from the upper half-plane.
    UpperLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaMatrix<T> {
    pub z: Cx<T>,
    pub kind: GammaKind,
    pub entries: CMatrix<T>,
}

/// `s_σ = sqrt_upper(z − α·σ)` for every configuration code.
pub(crate) fn channel_roots<T: Real>(model: &ModelSpec<T>, z: Cx<T>, cut: CutPolicy) -> Result<Vec<Cx<T>>> {
    (0..model.config_count())
        .map(|code| {
            let w = z - model.shift(code);
            if on_cut(w) {
                if cut == CutPolicy::Reject {
                    return Err(Error::OnCut { re: w.re.as_f64(), im: w.im.as_f64() });
                }
                if model.dim() == Dimension::One && w.re == T::zero() {
                    return Err(Error::BranchPoint);
                }
            }
            Ok(sqrt_upper(w))
        })
        .collect()
}

/// `Γ(z)`, assembled blockwise in `σ`.
pub fn gamma_free<T: Real>(model: &ModelSpec<T>, z: Cx<T>) -> Result<GammaMatrix<T>> {
    gamma_free_with(model, z, CutPolicy::Reject)
}

pub fn gamma_free_with<T: Real>(model: &ModelSpec<T>, z: Cx<T>, cut: CutPolicy) -> Result<GammaMatrix<T>> {
    let roots = channel_roots(model, z, cut)?;
    Ok(GammaMatrix { z, kind: GammaKind::Free, entries: assemble(model, z, &roots) })
}

pub(crate) fn assemble<T: Real>(model: &ModelSpec<T>, z: Cx<T>, roots: &[Cx<T>]) -> CMatrix<T> {
    let n = model.n();
    let dim = model.dim();
    let m = index_dimension(dim, n);
    let nc = model.config_count();
    let mut g = CMatrix::zeros(m, m);
    let four_pi = T::lit(4.0) * T::PI();
    let minus_i = -imag_unit::<T>();
    for (code, &s) in roots.iter().enumerate() {
        let w = z - model.shift(code);
        for j in 0..n {
            for k in 0..n {
                let (yj, yk) = (model.position(j), model.position(k));
                match dim {
                    Dimension::Three => {
                        let (r, c) = ((j * nc) + code, (k * nc) + code);
                        g[(r, c)] = if j == k { s * minus_i / four_pi } else { -g3(s, yj.distance(&yk)) };
                    }
                    Dimension::One => {
                        let x = yj.x() - yk.x();
                        let block = n * nc;
                        let (r0, c0) = (j * nc + code, k * nc + code);
                        let gv = g1(s, x);
                        g[(r0, c0)] = -gv;
                        g[(r0 + block, c0 + block)] = -(w * gv);
                        if j != k {
                            let gp = g1_prime(s, x);
                            g[(r0 + block, c0)] = gp;
                            g[(r0, c0 + block)] = -gp;
                        }
                    }
                }
            }
        }
    }
    g
}

/// `Γ^{AB}(z) = B Γ(z) + A`.
pub fn gamma_dressed<T: Real>(pair: &BoundaryPair<T>, gamma: &GammaMatrix<T>) -> Result<GammaMatrix<T>> {
    let m = pair.size();
    let e = &gamma.entries;
    if e.rows() != m || e.cols() != m {
        return Err(Error::MatrixShape { expected: m, rows: e.rows(), cols: e.cols() });
    }
    Ok(GammaMatrix { z: gamma.z, kind: GammaKind::Dressed, entries: pair.b().matmul(e).add(pair.a()) })
}

/// Inverse of `Γ^{AB}(z)` with its 1-norm condition number.
#[derive(Clone, Debug, PartialEq)]
pub struct DressedInverse<T> {
    pub inverse: CMatrix<T>,
    pub condition: T,
}

/// Condition numbers above this raise [`Error::NearPole`]: `1e12` in
/// double precision, `0.01 / ε` for coarser scalars.
pub fn near_pole_threshold<T: Real>() -> T {
    T::lit(1e12).min(T::lit(0.01) / T::epsilon())
}

pub fn invert_dressed<T: Real>(gamma_ab: &GammaMatrix<T>) -> Result<DressedInverse<T>> {
    let a = &gamma_ab.entries;
    if !a.is_square() {
        return Err(Error::MatrixShape { expected: a.rows(), rows: a.rows(), cols: a.cols() });
    }
    let near_pole = |condition: T| Error::NearPole {
        condition: condition.as_f64(),
        smallest_singular_value: svd(a).smallest().as_f64(),
    };
    let lu = Lu::new(a);
    if lu.is_singular() {
        return Err(near_pole(T::infinity()));
    }
    let inverse = lu.inverse();
    let condition = a.norm_one() * inverse.norm_one();
    if !(condition <= near_pole_threshold()) {
        return Err(near_pole(condition));
    }
    Ok(DressedInverse { inverse, condition })
}
