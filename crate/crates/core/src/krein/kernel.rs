use super::gamma::{assemble, channel_roots, gamma_dressed, invert_dressed, CutPolicy, GammaKind, GammaMatrix};
use crate::boundary::{validate, BoundaryPair, ValidationOptions};
use crate::complexmath::{g1, g1_prime, g3};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{Cx, Real};
use crate::space::{Dimension, Point};
use crate::spinspace::{ModelSpec, MultiIndex};
use num_traits::Zero;

/// Options shared by the kernel and resolvent evaluators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelOptions<T> {
    /// Skip boundary-pair validation.
    pub unchecked: bool,
    pub cut: CutPolicy,
    pub validation: ValidationOptions<T>,
}

impl<T: Real> Default for KernelOptions<T> {
    fn default() -> Self {
        KernelOptions { unchecked: false, cut: CutPolicy::Reject, validation: ValidationOptions::default() }
    }
}

impl<T: Real> KernelOptions<T> {
    pub fn unchecked() -> Self {
        KernelOptions { unchecked: true, ..Self::default() }
    }
}

pub(crate) fn check_compatible<T: Real>(model: &ModelSpec<T>, pair: &BoundaryPair<T>) -> Result<()> {
    if model.dim() != pair.dim() || model.n() != pair.n() {
        let m = model.index_dimension();
        return Err(Error::MatrixShape { expected: m, rows: pair.size(), cols: pair.size() });
    }
    Ok(())
}

pub(crate) fn ensure_valid<T: Real>(pair: &BoundaryPair<T>, opts: &KernelOptions<T>) -> Result<()> {
    if opts.unchecked {
        return Ok(());
    }
    let r = validate(pair, &opts.validation);
    if r.is_valid {
        Ok(())
    } else {
        Err(Error::InvalidPair { defect: r.hermiticity_defect.as_f64(), rank: r.rank_estimate, size: r.size })
    }
}

/// `Φ^z_μ(x, σ)`: the spin-channel Green function centred at `y_j`, or
/// its derivative for parity 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectFunction<T> {
    pub mu: MultiIndex,
    pub z: Cx<T>,
    dim: Dimension,
    site: Point<T>,
    root: Cx<T>,
}

impl<T: Real> DefectFunction<T> {
    pub fn new(model: &ModelSpec<T>, mu: MultiIndex, z: Cx<T>, cut: CutPolicy) -> Result<Self> {
        model.encode(&mu)?;
        let roots = channel_roots(model, z, cut)?;
        Ok(DefectFunction { mu, z, dim: model.dim(), site: model.position(mu.j), root: roots[mu.sigma.code()] })
    }

    pub fn eval(&self, x: Point<T>, sigma: usize) -> Result<Cx<T>> {
        if x.distance(&self.site) == T::zero() {
            return Err(Error::AtSpinSite(self.mu.j));
        }
        if sigma != self.mu.sigma.code() {
            return Ok(Cx::zero());
        }
        Ok(defect_value(self.dim, self.mu.parity(), self.root, x, self.site))
    }
}

/// Flat indices `μ` with `σ_μ = σ`, in increasing order.
pub(crate) fn channel_indices<T: Real>(model: &ModelSpec<T>, sigma: usize) -> impl Iterator<Item = usize> {
    let nc = model.config_count();
    let parities = match model.dim() {
        Dimension::One => 2,
        Dimension::Three => 1,
    };
    (0..parities * model.n()).map(move |k| k * nc + sigma)
}

#[inline]
pub(crate) fn defect_value<T: Real>(dim: Dimension, p: u8, s: Cx<T>, x: Point<T>, y: Point<T>) -> Cx<T> {
    match dim {
        Dimension::Three => g3(s, x.distance(&y)),
        Dimension::One => {
            let d = x.x() - y.x();
            if p == 0 {
                g1(s, d)
            } else {
                g1_prime(s, d)
            }
        }
    }
}

/// Resolvent kernel of `H^{AB}` at a fixed spectral point, with
/// `M = (Γ^{AB}(z))^{-1} B` cached.
#[derive(Clone, Debug)]
pub struct ResolventKernel<T> {
    model: ModelSpec<T>,
    z: Cx<T>,
    roots: Vec<Cx<T>>,
    gamma_ab: GammaMatrix<T>,
    m: CMatrix<T>,
    condition: T,
}

impl<T: Real> ResolventKernel<T> {
    pub fn new(model: &ModelSpec<T>, pair: &BoundaryPair<T>, z: Cx<T>, opts: &KernelOptions<T>) -> Result<Self> {
        check_compatible(model, pair)?;
        ensure_valid(pair, opts)?;
        Self::new_prevalidated(model, pair, z, opts.cut)
    }

    /// Skips validation; the caller has already checked the pair.
    pub(crate) fn new_prevalidated(
        model: &ModelSpec<T>,
        pair: &BoundaryPair<T>,
        z: Cx<T>,
        cut: CutPolicy,
    ) -> Result<Self> {
        let roots = channel_roots(model, z, cut)?;
        let gamma = GammaMatrix { z, kind: GammaKind::Free, entries: assemble(model, z, &roots) };
        let gamma_ab = gamma_dressed(pair, &gamma)?;
        let inv = invert_dressed(&gamma_ab)?;
        let m = inv.inverse.matmul(pair.b());
        Ok(ResolventKernel { model: model.clone(), z, roots, gamma_ab, m, condition: inv.condition })
    }

    pub fn z(&self) -> Cx<T> {
        self.z
    }

    pub fn model(&self) -> &ModelSpec<T> {
        &self.model
    }

    /// `(Γ^{AB}(z))^{-1} B`.
    pub fn coupling(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn gamma_dressed(&self) -> &GammaMatrix<T> {
        &self.gamma_ab
    }

    pub fn condition(&self) -> T {
        self.condition
    }

    /// `sqrt_upper(z − α·σ)` for configuration `code`.
    pub fn root(&self, code: usize) -> Cx<T> {
        self.roots[code]
    }

    pub fn roots(&self) -> &[Cx<T>] {
        &self.roots
    }

    fn check_point(&self, x: &Point<T>) -> Result<()> {
        for (j, y) in self.model.positions().iter().enumerate() {
            if x.distance(y) == T::zero() {
                return Err(Error::AtSpinSite(j));
            }
        }
        Ok(())
    }

    /// `Φ^z_μ(x, σ)` for every `μ` of channel `σ`, paired with the flat index.
    /// Site coincidences are not checked; the 1D derivative uses `sgn(0) = 0`.
    pub(crate) fn defect_row(&self, x: Point<T>, sigma: usize) -> Vec<(usize, Cx<T>)> {
        let s = self.roots[sigma];
        let dim = self.model.dim();
        channel_indices(&self.model, sigma)
            .map(|flat| {
                let mu = self.model.decode(flat);
                (flat, defect_value(dim, mu.parity(), s, x, self.model.position(mu.j)))
            })
            .collect()
    }

    /// `δ_{σσ'} G^{z − α·σ}(x − x')`.
    pub fn free_part(&self, x: Point<T>, sigma: usize, xp: Point<T>, sigma_p: usize) -> Result<Cx<T>> {
        if sigma != sigma_p {
            return Ok(Cx::zero());
        }
        let s = self.roots[sigma];
        match self.model.dim() {
            Dimension::One => Ok(g1(s, x.x() - xp.x())),
            Dimension::Three => {
                let r = x.distance(&xp);
                if r == T::zero() {
                    return Err(Error::SingularPoint);
                }
                Ok(g3(s, r))
            }
        }
    }

    /// `Σ Φ^z_μ(x,σ) M_{μμ'} Φ^z_{μ'}(x',σ')`.
    pub fn correction(&self, x: Point<T>, sigma: usize, xp: Point<T>, sigma_p: usize) -> Result<Cx<T>> {
        self.check_point(&x)?;
        self.check_point(&xp)?;
        let left = self.defect_row(x, sigma);
        let right = self.defect_row(xp, sigma_p);
        let mut acc = Cx::zero();
        for &(a, fa) in &left {
            for &(b, fb) in &right {
                acc = acc + fa * self.m[(a, b)] * fb;
            }
        }
        Ok(acc)
    }

    pub fn eval(&self, x: Point<T>, sigma: usize, xp: Point<T>, sigma_p: usize) -> Result<Cx<T>> {
        let c = self.correction(x, sigma, xp, sigma_p)?;
        Ok(self.free_part(x, sigma, xp, sigma_p)? + c)
    }

    /// Charges `c = M s` for projections `s_μ = ⟨Φ^{z̄}_μ, Ψ⟩`.
    pub fn charges(&self, projections: &[Cx<T>]) -> Vec<Cx<T>> {
        self.m.mul_vec(projections)
    }

    /// `Σ_μ c_μ Φ^z_μ(x, σ)`.
    pub(crate) fn correction_from_charges(&self, charges: &[Cx<T>], x: Point<T>, sigma: usize) -> Cx<T> {
        self.defect_row(x, sigma).into_iter().fold(Cx::zero(), |acc, (k, v)| acc + charges[k] * v)
    }
}

/// One-shot kernel value `R^{AB}(z)(x, σ; x', σ')`.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_kernel<T: Real>(
    model: &ModelSpec<T>,
    pair: &BoundaryPair<T>,
    z: Cx<T>,
    x: Point<T>,
    sigma: usize,
    xp: Point<T>,
    sigma_p: usize,
    opts: &KernelOptions<T>,
) -> Result<Cx<T>> {
    ResolventKernel::new(model, pair, z, opts)?.eval(x, sigma, xp, sigma_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{preset_delta, preset_delta_prime, preset_free, preset_offdiag, DeltaConvention};
    use crate::complexmath::sqrt_upper;
    use num_complex::Complex64 as C;
    use std::f64::consts::PI;

    #[test]
    fn free_kernel_is_green() {
        let m = ModelSpec::line(&[0.0, 1.0], &[0.2, -0.4]).unwrap();
        let p = preset_free(Dimension::One, 2).unwrap();
        let z = C::new(-0.3, 0.8);
        let k = ResolventKernel::new(&m, &p, z, &KernelOptions::default()).unwrap();
        for (s, sp) in [(0, 0), (1, 1), (2, 3)] {
            let (x, xp) = (Point::line(0.3), Point::line(-1.7));
            assert_eq!(k.correction(x, s, xp, sp).unwrap(), C::new(0.0, 0.0));
            let expect = if s == sp { g1(sqrt_upper(z - m.shift(s)), 2.0) } else { C::new(0.0, 0.0) };
            assert_eq!(k.eval(x, s, xp, sp).unwrap(), expect);
        }
    }

    #[test]
    fn delta_d3_matches_closed_form() {
        let m = ModelSpec::space(&[[0.0; 3]], &[0.7]).unwrap();
        let beta = [-1.0, 0.3];
        let p = preset_delta(Dimension::Three, 1, &[beta], DeltaConvention::Stated).unwrap();
        let z = C::new(1.3, 2.1);
        let k = ResolventKernel::new(&m, &p, z, &KernelOptions::default()).unwrap();
        let x = Point::space(0.3, -0.2, 0.5);
        let xp = Point::space(-1.0, 0.4, 0.1);
        for (code, sign) in [(0usize, 1.0), (1, -1.0)] {
            let s = sqrt_upper(z - 0.7 * sign);
            let g = |r: f64| (C::i() * s * r).exp() / (4.0 * PI * r);
            let c = C::new(0.0, 4.0 * PI) / (s + C::new(0.0, 4.0 * PI * beta[code]));
            let expect = g(x.distance(&xp)) + c * g(x.distance(&m.position(0))) * g(xp.distance(&m.position(0)));
            let got = k.eval(x, code, xp, code).unwrap();
            assert!((got - expect).norm() <= 1e-13 * expect.norm());
            assert_eq!(k.eval(x, code, xp, 1 - code).unwrap(), C::new(0.0, 0.0));
        }
    }

    #[test]
    fn spin_diagonal_pairs_have_no_cross_terms() {
        let m = ModelSpec::line(&[0.0, 1.5], &[0.3, 0.1]).unwrap();
        let dp = preset_delta_prime(Dimension::One, 2, &[0.4, -0.9]).unwrap();
        let d = preset_delta(Dimension::One, 2, &[[1.0, -2.0], [0.5, 0.1]], DeltaConvention::Stated).unwrap();
        for p in [dp, d] {
            let k = ResolventKernel::new(&m, &p, C::new(0.1, 0.5), &KernelOptions::default()).unwrap();
            for s in 0..4 {
                for sp in 0..4 {
                    if s != sp {
                        assert_eq!(k.eval(Point::line(0.7), s, Point::line(-0.3), sp).unwrap(), C::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_pair_requires_unchecked() {
        let m = ModelSpec::space(&[[0.0; 3]], &[0.0]).unwrap();
        let p = preset_offdiag(Dimension::Three, 1, &[[1.0, 0.5]]).unwrap();
        let z = C::new(-1.0, 1.0);
        assert!(matches!(ResolventKernel::new(&m, &p, z, &KernelOptions::default()), Err(Error::InvalidPair { .. })));
        assert!(ResolventKernel::new(&m, &p, z, &KernelOptions::unchecked()).is_ok());
    }

    #[test]
    fn evaluation_at_site_rejected() {
        let m = ModelSpec::space(&[[0.0; 3]], &[0.0]).unwrap();
        let p = preset_delta(Dimension::Three, 1, &[[1.0, 1.0]], DeltaConvention::Stated).unwrap();
        let k = ResolventKernel::new(&m, &p, C::new(-1.0, 0.3), &KernelOptions::default()).unwrap();
        assert_eq!(k.eval(Point::space(0.0, 0.0, 0.0), 0, Point::space(1.0, 0.0, 0.0), 0), Err(Error::AtSpinSite(0)));
        let phi = DefectFunction::new(&m, m.decode(1), C::new(-1.0, 0.3), CutPolicy::Reject).unwrap();
        assert_eq!(phi.eval(Point::space(1.0, 0.0, 0.0), 0).unwrap(), C::new(0.0, 0.0));
        assert!(phi.eval(Point::space(1.0, 0.0, 0.0), 1).unwrap().norm() > 0.0);
    }
}
