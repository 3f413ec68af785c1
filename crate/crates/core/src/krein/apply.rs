//! Action of the resolvent on a state: free convolution plus the charge
//! correction `Σ_μ c_μ Φ^z_μ` with `c = (Γ^{AB})^{-1} B s`,
//! `s_μ = ⟨Φ^{z̄}_μ, Ψ⟩`.

use super::kernel::{channel_indices, check_compatible, ensure_valid, KernelOptions, ResolventKernel};
use crate::boundary::BoundaryPair;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use crate::scalar::{cx, imag_unit, Cx, Real};
use crate::space::{Dimension, Point};
use crate::spinspace::ModelSpec;
use crate::state::{GaussianTerm, Grid1, SampledState, SpinState};
use num_traits::{One, Zero};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApplyOptions<T> {
    pub kernel: KernelOptions<T>,
    pub quad: QuadOptions<T>,
}

impl<T: Real> Default for ApplyOptions<T> {
    fn default() -> Self {
        ApplyOptions { kernel: KernelOptions::default(), quad: QuadOptions::default() }
    }
}

/// Left and right partial transforms at sorted sweep points:
/// `L(P) = ∫_{x<P} e^{is(P−x)} ψ`, `U(P) = ∫_{x>P} e^{is(x−P)} ψ`.
pub(crate) struct Sweep<T> {
    points: Vec<T>,
    left: Vec<Cx<T>>,
    right: Vec<Cx<T>>,
    error: T,
}

impl<T: Real> Sweep<T> {
    fn locate(&self, x: T) -> usize {
        self.points
            .binary_search_by(|p| p.partial_cmp(&x).unwrap_or(Ordering::Less))
            .expect("output point is a sweep point")
    }

    /// `(G^w * ψ)(x) = i/(2s) (L + U)`.
    fn convolution(&self, s: Cx<T>, x: T) -> Cx<T> {
        let k = self.locate(x);
        imag_unit::<T>() / (s + s) * (self.left[k] + self.right[k])
    }

    /// `∫ (G^w)'(x' − x) ψ(x') dx' = (L − U)/2`.
    fn derivative_projection(&self, x: T) -> Cx<T> {
        let k = self.locate(x);
        (self.left[k] - self.right[k]) * T::lit(0.5)
    }
}

fn sorted_unique<T: Real>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v.dedup();
    v
}

fn sweep_1d<T: Real>(
    s: Cx<T>,
    psi: &dyn Fn(T) -> Cx<T>,
    support: Option<(T, T)>,
    nodes: &[T],
    outputs: &[T],
    quad: &QuadOptions<T>,
) -> Result<Sweep<T>> {
    let mut pts: Vec<T> = outputs.to_vec();
    if let Some((lo, hi)) = support {
        pts.push(lo);
        pts.push(hi);
        pts.extend(nodes.iter().copied().filter(|&x| x > lo && x < hi));
    }
    if pts.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite evaluation point".into()));
    }
    let points = sorted_unique(pts);
    let np = points.len();
    let inside = |a: T, b: T| support.is_some_and(|(lo, hi)| a >= lo && b <= hi);
    let cells = (0..np.saturating_sub(1)).filter(|&k| inside(points[k], points[k + 1])).count().max(1);
    let cell_opts = QuadOptions { abs_tol: quad.abs_tol / T::from_usize_lossy(cells), ..*quad };
    let i = imag_unit::<T>();
    let mut left = vec![Cx::zero(); np];
    let mut right = vec![Cx::zero(); np];
    let mut error = T::zero();
    let mut cell_l = vec![Cx::zero(); np.saturating_sub(1)];
    let mut cell_u = vec![Cx::zero(); np.saturating_sub(1)];
    for k in 0..np.saturating_sub(1) {
        let (a, b) = (points[k], points[k + 1]);
        if !inside(a, b) {
            continue;
        }
        let rl = integrate_with_breaks(|x| (i * s * (b - x)).exp() * psi(x), &[a, b], &cell_opts);
        let ru = integrate_with_breaks(|x| (i * s * (x - a)).exp() * psi(x), &[a, b], &cell_opts);
        cell_l[k] = rl.into_result(&cell_opts)?;
        cell_u[k] = ru.into_result(&cell_opts)?;
        error = error + rl.error + ru.error;
    }
    for k in 0..np.saturating_sub(1) {
        let phase = (i * s * (points[k + 1] - points[k])).exp();
        left[k + 1] = phase * left[k] + cell_l[k];
    }
    for k in (0..np.saturating_sub(1)).rev() {
        let phase = (i * s * (points[k + 1] - points[k])).exp();
        right[k] = phase * right[k + 1] + cell_u[k];
    }
    Ok(Sweep { points, left, right, error })
}

/// `sinh(q)/q · e^{E}`, computed without overflow.
fn sinhc_exp<T: Real>(q: Cx<T>, e: Cx<T>) -> Cx<T> {
    if q.norm() < T::lit(1e-3) {
        let q2 = q * q;
        (Cx::<T>::one() + q2 / T::lit(6.0) + q2 * q2 / T::lit(120.0)) * e.exp()
    } else {
        ((q + e).exp() - (e - q).exp()) / (q * T::lit(2.0))
    }
}

/// `(G^w * g)(x)` for a 3D Gaussian term: closed-form angular average,
/// radial Gauss–Kronrod.
fn convolve_gaussian_3d<T: Real>(
    s: Cx<T>,
    g: &GaussianTerm<T>,
    x: Point<T>,
    quad: &QuadOptions<T>,
) -> Result<(Cx<T>, T)> {
    if g.weight.is_zero() {
        return Ok((Cx::zero(), T::zero()));
    }
    let i = imag_unit::<T>();
    let d = [0, 1, 2].map(|k| x.0[k] - g.center.0[k]);
    let dn = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let two_a = g.width * T::lit(2.0);
    let four_a = g.width * T::lit(4.0);
    let kd = g.momentum[0] * d[0] + g.momentum[1] * d[1] + g.momentum[2] * d[2];
    let base = i * kd - cx(dn * dn, T::zero()) / four_a;
    let integrand = |rho: T| {
        let v = [0, 1, 2].map(|k| -(cx(rho * d[k], T::zero()) / two_a) + i * (rho * g.momentum[k]));
        let qq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let q = qq.sqrt();
        let e = base - cx(rho * rho, T::zero()) / four_a + i * s * rho;
        sinhc_exp(q, e) * rho
    };
    let r = g.support_radius();
    let lo = (dn - r).max(T::zero());
    let brk = if dn > lo { vec![lo, dn, dn + r] } else { vec![lo, dn + r] };
    let est = integrate_with_breaks(integrand, &brk, quad);
    let v = est.into_result(quad)?;
    Ok((v * g.weight, est.error * g.weight.norm()))
}

fn convolve_3d<T: Real>(s: Cx<T>, terms: &[GaussianTerm<T>], x: Point<T>, quad: &QuadOptions<T>) -> Result<(Cx<T>, T)> {
    let mut acc = (Cx::zero(), T::zero());
    for g in terms {
        let (v, e) = convolve_gaussian_3d(s, g, x, quad)?;
        acc = (acc.0 + v, acc.1 + e);
    }
    Ok(acc)
}

struct ChannelInput<'a, T> {
    psi: Box<dyn Fn(T) -> Cx<T> + 'a>,
    support: Option<(T, T)>,
    nodes: Vec<T>,
}

fn channel_input_1d<T: Real>(state: &SpinState<T>, sigma: usize) -> ChannelInput<'_, T> {
    match state {
        SpinState::Gaussian(g) => ChannelInput {
            psi: Box::new(move |x| g.eval(Point::line(x), sigma)),
            support: g.support_1d(sigma),
            nodes: g.channels[sigma].iter().map(|t| t.center.x()).collect(),
        },
        SpinState::Sampled(sm) => {
            let empty = sm.channels[sigma].iter().all(|z| z.is_zero());
            ChannelInput {
                psi: Box::new(move |x| sm.eval(x, sigma)),
                support: if empty { None } else { Some((sm.grid.start, sm.grid.end())) },
                nodes: sm.grid.points(),
            }
        }
    }
}

pub(crate) fn check_state<T: Real>(model: &ModelSpec<T>, state: &SpinState<T>) -> Result<()> {
    if state.channel_count() != model.config_count() {
        return Err(Error::LengthMismatch { expected: model.config_count(), got: state.channel_count() });
    }
    match state {
        SpinState::Gaussian(g) if g.dim != model.dim() => Err(Error::BadDimension(g.dim.value())),
        SpinState::Sampled(_) if model.dim() == Dimension::Three => {
            Err(Error::UnsupportedDimension { what: "sampled input states", dim: 3 })
        }
        _ => Ok(()),
    }
}

/// Projections `s_μ`, for 1D together with the per-channel sweeps at the
/// requested output points.
pub(crate) fn projections_1d<T: Real>(
    model: &ModelSpec<T>,
    roots: &[Cx<T>],
    state: &SpinState<T>,
    outputs: &[T],
    quad: &QuadOptions<T>,
) -> Result<(Vec<Cx<T>>, Vec<Option<Sweep<T>>>, T)> {
    let sites: Vec<T> = model.positions().iter().map(|p| p.x()).collect();
    let mut all = outputs.to_vec();
    all.extend(sites.iter().copied());
    let mut proj = vec![Cx::zero(); model.index_dimension()];
    let mut sweeps = Vec::with_capacity(model.config_count());
    let mut error = T::zero();
    for sigma in 0..model.config_count() {
        let input = channel_input_1d(state, sigma);
        if input.support.is_none() {
            sweeps.push(None);
            continue;
        }
        let s = roots[sigma];
        let sw = sweep_1d(s, input.psi.as_ref(), input.support, &input.nodes, &all, quad)?;
        error = error + sw.error;
        for flat in channel_indices(model, sigma) {
            let mu = model.decode(flat);
            let y = sites[mu.j];
            proj[flat] = if mu.parity() == 0 { sw.convolution(s, y) } else { sw.derivative_projection(y) };
        }
        sweeps.push(Some(sw));
    }
    Ok((proj, sweeps, error))
}

pub(crate) fn projections_3d<T: Real>(
    model: &ModelSpec<T>,
    roots: &[Cx<T>],
    state: &SpinState<T>,
    quad: &QuadOptions<T>,
) -> Result<(Vec<Cx<T>>, T)> {
    let SpinState::Gaussian(g) = state else {
        return Err(Error::UnsupportedDimension { what: "sampled input states", dim: 3 });
    };
    let mut proj = vec![Cx::zero(); model.index_dimension()];
    let mut error = T::zero();
    for sigma in 0..model.config_count() {
        if g.channels[sigma].is_empty() {
            continue;
        }
        for flat in channel_indices(model, sigma) {
            let mu = model.decode(flat);
            let (v, e) = convolve_3d(roots[sigma], &g.channels[sigma], model.position(mu.j), quad)?;
            proj[flat] = v;
            error = error + e;
        }
    }
    Ok((proj, error))
}

/// `R^{AB}(z) Ψ` represented by its charges; evaluate with [`Self::eval`].
#[derive(Clone, Debug)]
pub struct AppliedResolvent<T> {
    kernel: ResolventKernel<T>,
    state: SpinState<T>,
    projections: Vec<Cx<T>>,
    charges: Vec<Cx<T>>,
    error: T,
    quad: QuadOptions<T>,
}

pub fn apply_resolvent<T: Real>(
    model: &ModelSpec<T>,
    pair: &BoundaryPair<T>,
    z: Cx<T>,
    state: &SpinState<T>,
    opts: &ApplyOptions<T>,
) -> Result<AppliedResolvent<T>> {
    check_compatible(model, pair)?;
    check_state(model, state)?;
    ensure_valid(pair, &opts.kernel)?;
    let kernel = ResolventKernel::new_prevalidated(model, pair, z, opts.kernel.cut)?;
    let (projections, error) = match model.dim() {
        Dimension::One => {
            let (p, _, e) = projections_1d(model, kernel.roots(), state, &[], &opts.quad)?;
            (p, e)
        }
        Dimension::Three => projections_3d(model, kernel.roots(), state, &opts.quad)?,
    };
    let charges = kernel.charges(&projections);
    Ok(AppliedResolvent { kernel, state: state.clone(), projections, charges, error, quad: opts.quad })
}

impl<T: Real> AppliedResolvent<T> {
    pub fn kernel(&self) -> &ResolventKernel<T> {
        &self.kernel
    }

    /// `s_μ = ⟨Φ^{z̄}_μ, Ψ⟩` in flat order.
    pub fn projections(&self) -> &[Cx<T>] {
        &self.projections
    }

    /// `c = (Γ^{AB})^{-1} B s`.
    pub fn charges(&self) -> &[Cx<T>] {
        &self.charges
    }

    /// Accumulated quadrature error estimate of the projections.
    pub fn error_estimate(&self) -> T {
        self.error
    }

    /// `(G^{z−α·σ} * ψ_σ)(x)`.
    pub fn free_part(&self, x: Point<T>, sigma: usize) -> Result<Cx<T>> {
        let s = self.kernel.root(sigma);
        match self.kernel.model().dim() {
            Dimension::One => {
                let input = channel_input_1d(&self.state, sigma);
                if input.support.is_none() {
                    return Ok(Cx::zero());
                }
                let sw = sweep_1d(s, input.psi.as_ref(), input.support, &input.nodes, &[x.x()], &self.quad)?;
                Ok(sw.convolution(s, x.x()))
            }
            Dimension::Three => {
                let SpinState::Gaussian(g) = &self.state else { unreachable!("checked at construction") };
                Ok(convolve_3d(s, &g.channels[sigma], x, &self.quad)?.0)
            }
        }
    }

    /// `(R^{AB}(z) Ψ)_σ(x)`; `x` must not be a spin site.
    pub fn eval(&self, x: Point<T>, sigma: usize) -> Result<Cx<T>> {
        for (j, y) in self.kernel.model().positions().iter().enumerate() {
            if x.distance(y) == T::zero() {
                return Err(Error::AtSpinSite(j));
            }
        }
        Ok(self.free_part(x, sigma)? + self.kernel.correction_from_charges(&self.charges, x, sigma))
    }
}

/// `R^{AB}(z)Ψ` sampled on a 1D grid, with the charges used.
#[derive(Clone, Debug)]
pub struct GridResolvent<T> {
    pub values: SampledState<T>,
    pub projections: Vec<Cx<T>>,
    pub charges: Vec<Cx<T>>,
    pub error: T,
}

/// Grid form of [`apply_resolvent`] (d = 1). A grid point that coincides
/// with a spin site receives the mean of the one-sided limits.
pub fn apply_resolvent_on_grid<T: Real>(
    model: &ModelSpec<T>,
    pair: &BoundaryPair<T>,
    z: Cx<T>,
    state: &SpinState<T>,
    grid: &Grid1<T>,
    opts: &ApplyOptions<T>,
) -> Result<GridResolvent<T>> {
    check_compatible(model, pair)?;
    check_state(model, state)?;
    if model.dim() != Dimension::One {
        return Err(Error::UnsupportedDimension { what: "grid output", dim: model.dim().value() });
    }
    ensure_valid(pair, &opts.kernel)?;
    let kernel = ResolventKernel::new_prevalidated(model, pair, z, opts.kernel.cut)?;
    resolvent_on_grid_with(&kernel, state, grid, &opts.quad)
}

pub(crate) fn resolvent_on_grid_with<T: Real>(
    kernel: &ResolventKernel<T>,
    state: &SpinState<T>,
    grid: &Grid1<T>,
    quad: &QuadOptions<T>,
) -> Result<GridResolvent<T>> {
    let xs = grid.points();
    let (projections, sweeps, error) = projections_1d(kernel.model(), kernel.roots(), state, &xs, quad)?;
    let charges = kernel.charges(&projections);
    let channels = (0..kernel.model().config_count())
        .map(|sigma| {
            let s = kernel.root(sigma);
            xs.iter()
                .map(|&x| {
                    let free = sweeps[sigma].as_ref().map_or(Cx::zero(), |sw| sw.convolution(s, x));
                    free + kernel.correction_from_charges(&charges, Point::line(x), sigma)
                })
                .collect()
        })
        .collect();
    Ok(GridResolvent { values: SampledState { grid: *grid, channels }, projections, charges, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{preset_delta, preset_free, DeltaConvention};
    use crate::complexmath::{g1, g3, sqrt_upper};
    use crate::quadrature::integrate;
    use crate::state::GaussianPacket;
    use num_complex::Complex64 as C;
    use std::f64::consts::PI;

    fn packet_1d(n_channels: usize, sigma: usize, c: f64, k: f64, a: f64) -> SpinState<f64> {
        let g = GaussianTerm::new(Point::line(c), [k, 0.0, 0.0], a, C::new(1.0, 0.0)).unwrap();
        SpinState::Gaussian(GaussianPacket::single(Dimension::One, n_channels, sigma, g).unwrap())
    }

    #[test]
    fn free_1d_matches_direct_quadrature() {
        let m = ModelSpec::line(&[0.0], &[0.0]).unwrap();
        let p = preset_free(Dimension::One, 1).unwrap();
        let z = C::new(-0.7, 0.9);
        let st = packet_1d(2, 0, 0.5, 1.3, 0.6);
        let r = apply_resolvent(&m, &p, z, &st, &ApplyOptions::default()).unwrap();
        let s = sqrt_upper(z);
        for x in [-2.0, 0.3, 1.7] {
            let oracle = integrate(
                |xp: f64| g1(s, x - xp) * st.eval(Point::line(xp), 0),
                -30.0,
                30.0,
                &QuadOptions::default().with_abs_tol(1e-12),
            );
            let got = r.eval(Point::line(x), 0).unwrap();
            assert!((got - oracle.value).norm() < 1e-6, "{got} vs {}", oracle.value);
            assert_eq!(r.eval(Point::line(x), 1).unwrap(), C::new(0.0, 0.0));
        }
    }

    #[test]
    fn grid_and_pointwise_agree() {
        let m = ModelSpec::line(&[0.0, 1.0], &[0.2, 0.1]).unwrap();
        let p = preset_delta(Dimension::One, 2, &[[-1.0, 0.5], [0.7, -0.3]], DeltaConvention::Stated).unwrap();
        let z = C::new(0.5, 0.4);
        let st = packet_1d(4, 2, 0.4, -1.0, 0.3);
        let grid = Grid1::spanning(-3.05, 3.95, 41).unwrap();
        let gr = apply_resolvent_on_grid(&m, &p, z, &st, &grid, &ApplyOptions::default()).unwrap();
        let ar = apply_resolvent(&m, &p, z, &st, &ApplyOptions::default()).unwrap();
        for k in [0, 7, 20, 40] {
            let x = grid.point(k);
            for sigma in 0..4 {
                let a = gr.values.channels[sigma][k];
                let b = ar.eval(Point::line(x), sigma).unwrap();
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    /// 3D free convolution against direct spherical-coordinate quadrature
    /// around the evaluation point.
    #[test]
    fn free_3d_matches_spherical_quadrature() {
        let m = ModelSpec::space(&[[0.0; 3]], &[0.0]).unwrap();
        let p = preset_free(Dimension::Three, 1).unwrap();
        let z = C::new(-1.0, 0.5);
        let g = GaussianTerm::new(Point::space(0.3, -0.2, 0.1), [0.8, 0.0, -0.4], 0.5, C::new(1.0, 0.2)).unwrap();
        let st = SpinState::Gaussian(GaussianPacket::single(Dimension::Three, 2, 1, g).unwrap());
        let r = apply_resolvent(&m, &p, z, &st, &ApplyOptions::default()).unwrap();
        let x = Point::space(1.0, 0.5, -0.3);
        let s = sqrt_upper(z);
        let opts = QuadOptions::default().with_abs_tol(1e-10);
        let oracle = integrate(
            |rho: f64| {
                let inner = integrate(
                    |th: f64| {
                        integrate(
                            |ph: f64| {
                                let dir = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                                let xp = x.offset(dir.map(|d| d * rho));
                                g.eval(xp) * th.sin()
                            },
                            0.0,
                            2.0 * PI,
                            &opts,
                        )
                        .value
                    },
                    0.0,
                    PI,
                    &opts,
                )
                .value;
                inner * g3(s, rho) * rho * rho
            },
            0.0,
            12.0,
            &QuadOptions::default().with_abs_tol(1e-9),
        );
        let got = r.eval(x, 1).unwrap();
        assert!((got - oracle.value).norm() < 1e-6, "{got} vs {}", oracle.value);
    }
}
