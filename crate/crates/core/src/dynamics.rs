//! Time evolution: closed-form free Gaussian evolution and a Stone-formula
//! quadrature of `e^{−itH^{AB}}` built from resolvents near the real axis.

use crate::boundary::BoundaryPair;
use crate::error::{Error, Result};
use crate::krein::{
    check_compatible, check_state, ensure_valid, projections_1d, resolvent_on_grid_with, CutPolicy, KernelOptions,
    ResolventKernel,
};
use crate::quadrature::QuadOptions;
use crate::scalar::{cx, Cx, Real};
use crate::space::Dimension;
use crate::spectral::{
    closed_channel_roots, essential_spectrum_bottom, expansion_on_points, find_bound_states, find_embedded_eigenvalues,
    orthonormal_eigenbasis, SearchOptions,
};
use crate::spinspace::ModelSpec;
use crate::state::{GaussianPacket, GaussianTerm, Grid1, SampledState, SpinState};
use num_traits::Zero;
use rayon::prelude::*;

/// One Gaussian after time `t` under `−Δ + α·σ`:
/// `A → A + it`, `c → c + 2kt`, `w → w (A/(A+it))^{d/2} e^{i|k|²t − i(α·σ)t}`.
pub fn free_evolve_term<T: Real>(dim: Dimension, g: &GaussianTerm<T>, shift: T, t: T) -> GaussianTerm<T> {
    let a1 = g.width + cx(T::zero(), t);
    let ratio = (g.width / a1).sqrt();
    let spread = match dim {
        Dimension::One => ratio,
        Dimension::Three => ratio * ratio * ratio,
    };
    let k = g.momentum;
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let phase = cx(T::zero(), (k2 - shift) * t).exp();
    let two_t = t + t;
    GaussianTerm {
        center: g.center.offset([k[0] * two_t, k[1] * two_t, k[2] * two_t]),
        momentum: k,
        width: a1,
        weight: g.weight * spread * phase,
    }
}

/// Closed-form free evolution of every channel, with the Zeeman phase
/// `e^{−i(α·σ)t}` per configuration.
pub fn free_evolve<T: Real>(model: &ModelSpec<T>, packet: &GaussianPacket<T>, t: T) -> Result<GaussianPacket<T>> {
    if packet.dim != model.dim() {
        return Err(Error::BadDimension(packet.dim.value()));
    }
    if packet.channel_count() != model.config_count() {
        return Err(Error::LengthMismatch { expected: model.config_count(), got: packet.channel_count() });
    }
    if t == T::zero() {
        return Ok(packet.clone());
    }
    let channels = packet
        .channels
        .iter()
        .enumerate()
        .map(|(code, terms)| terms.iter().map(|g| free_evolve_term(model.dim(), g, model.shift(code), t)).collect())
        .collect();
    GaussianPacket::new(packet.dim, channels)
}

/// Parameters of [`evolve_spectral`]; `None` fields take the documented
/// defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralParams<T> {
    /// Distance of the resolvent from the real axis; default `1e-3 (1 + |μ|)`.
    pub epsilon: Option<T>,
    /// `λ` nodes of the trapezoid rule.
    pub nodes: usize,
    /// Lower end `μ − margin`; default margin `1`.
    pub margin: Option<T>,
    /// Upper end; default `μ + 40 (|k|² + d/(4 Re A))` maximized over terms.
    pub lambda_max: Option<T>,
    /// Largest admissible `|‖Ψ(t)‖ − ‖Ψ(0)‖|`; `None` disables the check.
    pub drift_tol: Option<T>,
    pub search: SearchOptions<T>,
    pub quad: QuadOptions<T>,
}

impl<T: Real> Default for SpectralParams<T> {
    fn default() -> Self {
        SpectralParams {
            epsilon: None,
            nodes: 2048,
            margin: None,
            lambda_max: None,
            drift_tol: Some(T::lit(1e-2)),
            search: SearchOptions::default(),
            quad: QuadOptions::default(),
        }
    }
}

/// `|k|² + d/(4 Re A)` maximized over the Gaussian terms; for sampled
/// states the Nyquist scale `(π/h)²`.
pub fn kinetic_scale<T: Real>(state: &SpinState<T>) -> T {
    match state {
        SpinState::Gaussian(g) => {
            let d = T::from_usize_lossy(g.dim.value());
            g.channels
                .iter()
                .flatten()
                .map(|t| {
                    let k = t.momentum;
                    k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + d / (T::lit(4.0) * t.width.re)
                })
                .fold(T::zero(), T::max)
        }
        SpinState::Sampled(s) => {
            let q = T::PI() / s.grid.step;
            q * q
        }
    }
}

/// Bound state data used by the evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundComponent<T> {
    pub energy: T,
    /// `⟨φ_k, Ψ⟩` for the orthonormal eigenbasis at this energy.
    pub overlaps: Vec<Cx<T>>,
    /// `(P_b Ψ)` on the output grid.
    pub projection: SampledState<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub state: SampledState<T>,
    pub norm: T,
    pub channel_weights: Vec<T>,
    /// `e^{ε|t|} ‖I_h − I_{2h}‖` for the continuum quadrature.
    pub error_estimate: T,
    /// `|‖Ψ(t)‖_grid − ‖Ψ(0)‖|`.
    pub norm_drift: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEvolution<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub epsilon: T,
    pub lambda_min: T,
    pub lambda_max: T,
    pub nodes: usize,
    pub initial_norm: T,
    pub bound: Vec<BoundComponent<T>>,
    /// Summed quadrature error estimates of the resolvent projections.
    pub resolvent_error: T,
}

/// `(ε/π) / ((λ − E)² + ε²)`, the pole part of `(R(λ+iε) − R(λ−iε))/(2πi)`.
fn lorentzian<T: Real>(lambda: T, e: T, eps: T) -> T {
    let d = lambda - e;
    eps / (T::PI() * (d * d + eps * eps))
}

/// `Ψ(t) = Σ_b e^{−iE_b t} P_b Ψ + e^{ε|t|} ∫ e^{−iλt} D(λ) dλ` on a 1D grid,
/// with `D = (R(λ+iε) − R(λ−iε))Ψ/(2πi)` minus the bound-state poles,
/// integrated by the trapezoid rule over `[μ − margin, λ_max]`.
pub fn evolve_spectral<T: Real>(
    model: &ModelSpec<T>,
    pair: &BoundaryPair<T>,
    state: &SpinState<T>,
    grid: &Grid1<T>,
    times: &[T],
    params: &SpectralParams<T>,
) -> Result<SpectralEvolution<T>> {
    check_compatible(model, pair)?;
    check_state(model, state)?;
    if model.dim() != Dimension::One {
        return Err(Error::UnsupportedDimension { what: "spectral evolution", dim: model.dim().value() });
    }
    let kopts = KernelOptions {
        unchecked: params.search.unchecked,
        cut: CutPolicy::Reject,
        validation: params.search.validation,
    };
    ensure_valid(pair, &kopts)?;
    if params.nodes < 3 {
        return Err(Error::InvalidParameter(format!("{} λ-nodes, need at least 3", params.nodes)));
    }
    let mu = essential_spectrum_bottom(model);
    let eps = params.epsilon.unwrap_or_else(|| T::lit(1e-3) * (T::one() + mu.abs()));
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("ε = {eps} must be positive")));
    }
    let lambda_min = mu - params.margin.unwrap_or_else(T::one);
    let lambda_max = params.lambda_max.unwrap_or_else(|| mu + T::lit(40.0) * kinetic_scale(state));
    if !(lambda_max > lambda_min) {
        return Err(Error::InvalidParameter("empty λ window".into()));
    }
    let xs = grid.points();
    let nc = model.config_count();

    let bound = bound_components(model, pair, state, grid, &params.search, &params.quad)?;

    let n = params.nodes;
    let h = (lambda_max - lambda_min) / T::from_usize_lossy(n - 1);
    let lambdas: Vec<T> = (0..n).map(|k| lambda_min + h * T::from_usize_lossy(k)).collect();
    let two_pi_i = cx(T::zero(), T::lit(2.0) * T::PI());
    let densities: Vec<(Vec<Vec<Cx<T>>>, T)> = lambdas
        .par_iter()
        .map(|&lambda| {
            let up = ResolventKernel::new_prevalidated(model, pair, cx(lambda, eps), CutPolicy::Reject)?;
            let dn = ResolventKernel::new_prevalidated(model, pair, cx(lambda, -eps), CutPolicy::Reject)?;
            let ru = resolvent_on_grid_with(&up, state, grid, &params.quad)?;
            let rd = resolvent_on_grid_with(&dn, state, grid, &params.quad)?;
            let poles: Vec<(T, &SampledState<T>)> =
                bound.iter().map(|b| (lorentzian(lambda, b.energy, eps), &b.projection)).collect();
            let d = (0..nc)
                .map(|s| {
                    (0..xs.len())
                        .map(|i| {
                            let raw = (ru.values.channels[s][i] - rd.values.channels[s][i]) / two_pi_i;
                            poles.iter().fold(raw, |acc, (w, p)| acc - p.channels[s][i] * *w)
                        })
                        .collect()
                })
                .collect();
            Ok((d, ru.error + rd.error))
        })
        .collect::<Result<_>>()?;
    let resolvent_error = densities.iter().fold(T::zero(), |acc, d| acc + d.1);

    let initial_norm = state.norm();
    let mut snapshots = Vec::with_capacity(times.len());
    for &t in times {
        let (fine, coarse) = trapezoid_pair(&densities, &lambdas, h, t, nc, xs.len());
        let growth = (eps * t.abs()).exp();
        let mut channels: Vec<Vec<Cx<T>>> = fine.iter().map(|c| c.iter().map(|z| *z * growth).collect()).collect();
        for b in &bound {
            let ph = cx(T::zero(), -b.energy * t).exp();
            for s in 0..nc {
                for i in 0..xs.len() {
                    channels[s][i] = channels[s][i] + b.projection.channels[s][i] * ph;
                }
            }
        }
        let st = SampledState { grid: *grid, channels };
        let diff = SampledState {
            grid: *grid,
            channels: fine
                .iter()
                .zip(&coarse)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x - *y) * growth).collect())
                .collect(),
        };
        let norm = st.norm();
        let channel_weights = (0..nc).map(|s| st.channel_weight(s)).collect();
        let norm_drift = (norm - initial_norm).abs();
        if let Some(tol) = params.drift_tol {
            if !(norm_drift <= tol) {
                return Err(Error::NormDrift { t: t.as_f64(), drift: norm_drift.as_f64(), tolerance: tol.as_f64() });
            }
        }
        snapshots.push(Snapshot { t, state: st, norm, channel_weights, error_estimate: diff.norm(), norm_drift });
    }
    Ok(SpectralEvolution {
        snapshots,
        epsilon: eps,
        lambda_min,
        lambda_max,
        nodes: n,
        initial_norm,
        bound,
        resolvent_error,
    })
}

/// Trapezoid sums with step `h` and `2h` (even-indexed nodes) of
/// `e^{−iλt} D(λ)`, in fixed node order.
fn trapezoid_pair<T: Real>(
    densities: &[(Vec<Vec<Cx<T>>>, T)],
    lambdas: &[T],
    h: T,
    t: T,
    nc: usize,
    len: usize,
) -> (Vec<Vec<Cx<T>>>, Vec<Vec<Cx<T>>>) {
    let n = lambdas.len();
    let last_even = (n - 1) / 2 * 2;
    let half = T::lit(0.5);
    let mut fine = vec![vec![Cx::zero(); len]; nc];
    let mut coarse = vec![vec![Cx::zero(); len]; nc];
    for (k, (d, _)) in densities.iter().enumerate() {
        let ph = cx(T::zero(), -lambdas[k] * t).exp();
        let wf = if k == 0 || k == n - 1 { h * half } else { h };
        let wc = if k % 2 == 1 || k > last_even {
            T::zero()
        } else if k == 0 || k == last_even {
            h
        } else {
            h + h
        };
        for s in 0..nc {
            for i in 0..len {
                let v = d[s][i] * ph;
                fine[s][i] = fine[s][i] + v * wf;
                if wc != T::zero() {
                    coarse[s][i] = coarse[s][i] + v * wc;
                }
            }
        }
    }
    (fine, coarse)
}

fn bound_components<T: Real>(
    model: &ModelSpec<T>,
    pair: &BoundaryPair<T>,
    state: &SpinState<T>,
    grid: &Grid1<T>,
    search: &SearchOptions<T>,
    quad: &QuadOptions<T>,
) -> Result<Vec<BoundComponent<T>>> {
    let opts = SearchOptions { unchecked: true, ..*search };
    let mut states = find_bound_states(model, pair, &opts)?.states;
    states.extend(find_embedded_eigenvalues(model, pair, &opts)?.states);
    let xs = grid.points();
    let mut out = Vec::with_capacity(states.len());
    for b in &states {
        // Open channels carry zero charge, so their placeholder roots drop out.
        let (roots, _) = closed_channel_roots(model, b.energy);
        let (proj, _, _) = projections_1d(model, &roots, state, &[], quad)?;
        let basis = orthonormal_eigenbasis(model, b)?;
        let mut total = vec![vec![Cx::zero(); xs.len()]; model.config_count()];
        let mut overlaps = Vec::with_capacity(basis.len());
        for c in &basis {
            let ov = c.iter().zip(&proj).fold(Cx::zero(), |acc, (ci, si)| acc + ci.conj() * *si);
            overlaps.push(ov);
            let phi = expansion_on_points(model, b.energy, c, &xs)?;
            for (tc, pc) in total.iter_mut().zip(&phi) {
                for (a, p) in tc.iter_mut().zip(pc) {
                    *a = *a + *p * ov;
                }
            }
        }
        out.push(BoundComponent {
            energy: b.energy,
            overlaps,
            projection: SampledState { grid: *grid, channels: total },
        });
    }
    Ok(out)
}
