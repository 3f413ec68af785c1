//! Essential spectrum, discrete eigenvalues below it as zeros of the
//! smallest singular value of `Γ^{AB}(E)`, and the eigenfunctions
//! `Σ_μ c_μ Φ^E_μ` built from null vectors.

use crate::boundary::{BoundaryPair, ValidationOptions};
use crate::complexmath::{green_overlap_1d_limit, green_overlap_3d_limit, sqrt_upper};
use crate::error::{Error, Result};
use crate::krein::{assemble, channel_indices, check_compatible, defect_value, ensure_valid, CutPolicy, KernelOptions};
use crate::linalg::{svd, CMatrix, Lu, Svd};
use crate::scalar::{real, Cx, Real};
use crate::space::{Dimension, Point};
use crate::spinspace::ModelSpec;
use num_traits::Zero;
use rayon::prelude::*;

/// `μ = min_σ α·σ = −Σ_j |α_j|`.
pub fn essential_spectrum_bottom<T: Real>(model: &ModelSpec<T>) -> T {
    (0..model.config_count()).map(|c| model.shift(c)).fold(T::infinity(), T::min)
}

/// Roots `sqrt_upper(E − α·σ)` for the channels closed at `E` (`E < α·σ`)
/// and the placeholder `i` for open ones, with the flat indices of the
/// closed channels. Everything that uses a placeholder is multiplied by a
/// zero charge or dropped as a column.
pub(crate) fn closed_channel_roots<T: Real>(model: &ModelSpec<T>, e: T) -> (Vec<Cx<T>>, Vec<usize>) {
    let placeholder = Cx::new(T::zero(), T::one());
    let mut cols = Vec::new();
    let roots = (0..model.config_count())
        .map(|c| {
            let w = e - model.shift(c);
            if w < T::zero() {
                cols.extend(channel_indices(model, c));
                sqrt_upper(real(w))
            } else {
                placeholder
            }
        })
        .collect();
    cols.sort_unstable();
    (roots, cols)
}

/// The columns of `Γ^{AB}(E)` belonging to channels closed at `E`, the
/// scale `‖A‖_∞ + ‖BΓ(E)‖_∞` over those columns (which unlike `‖Γ^{AB}‖_∞`
/// cannot cancel at a root) and the column indices. Below `μ` this is the
/// full matrix.
fn dressed_at<T: Real>(model: &ModelSpec<T>, pair: &BoundaryPair<T>, e: T) -> Result<(CMatrix<T>, T, Vec<usize>)> {
    let (roots, cols) = closed_channel_roots(model, e);
    if cols.is_empty() {
        return Err(Error::AboveThreshold { energy: e.as_f64(), bottom: essential_spectrum_bottom(model).as_f64() });
    }
    let m = model.index_dimension();
    let bg = pair.b().matmul(&assemble(model, real(e), &roots));
    let pick = |g: &CMatrix<T>| CMatrix::from_fn(m, cols.len(), |r, c| g[(r, cols[c])]);
    let (bg, a) = (pick(&bg), pick(pair.a()));
    let scale = a.norm_inf() + bg.norm_inf();
    Ok((bg.add(&a), scale, cols))
}

fn check_below<T: Real>(e: T, mu: T) -> Result<()> {
    if e < mu {
        Ok(())
    } else {
        Err(Error::AboveThreshold { energy: e.as_f64(), bottom: mu.as_f64() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileSample<T> {
    pub energy: T,
    pub smallest_singular_value: T,
    /// `log |det Γ^{AB}(E)|`; `-inf` at an exact zero.
    pub log_abs_det: T,
}

/// `σ_min` and `log|det|` of `Γ^{AB}(E)` at each sample, all below `μ`.
pub fn detgamma_profile<T: Real>(
    model: &ModelSpec<T>,
    pair: &BoundaryPair<T>,
    energies: &[T],
) -> Result<Vec<ProfileSample<T>>> {
    check_compatible(model, pair)?;
    let mu = essential_spectrum_bottom(model);
    for &e in energies {
        check_below(e, mu)?;
    }
    energies
        .par_iter()
        .map(|&e| {
            let (g, _, _) = dressed_at(model, pair, e)?;
            let lu = Lu::new(&g);
            let log_abs_det = if lu.is_singular() { T::neg_infinity() } else { lu.log_abs_det() };
            Ok(ProfileSample { energy: e, smallest_singular_value: svd(&g).smallest(), log_abs_det })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions<T> {
    /// Lower end of the scan; `None` uses [`default_search_floor`].
    pub e_min: Option<T>,
    /// Scan points, geometric in `κ = √(μ − E)`.
    pub points: usize,
    /// Acceptance: `σ_min ≤ tol · (‖A‖_∞ + ‖BΓ‖_∞)`.
    pub tol: T,
    pub max_iterations: usize,
    pub unchecked: bool,
    pub validation: ValidationOptions<T>,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        SearchOptions {
            e_min: None,
            points: 400,
            tol: T::lit(1e-10).max(T::epsilon() * T::lit(1e3)),
            max_iterations: 200,
            unchecked: false,
            validation: ValidationOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundStateResult<T> {
    pub energy: T,
    /// Unit null vector of `Γ^{AB}(E)` for the smallest singular value.
    pub charges: Vec<Cx<T>>,
    pub smallest_singular_value: T,
    /// Singular values at or below `1e3 · tol · (‖A‖_∞ + ‖BΓ‖_∞)`.
    pub multiplicity_estimate: usize,
    /// Orthonormal (Euclidean) basis of the numerical null space; its first
    /// element is `charges`.
    pub null_space: Vec<Vec<Cx<T>>>,
}

/// A minimum that polished to `σ_min` between `tol` and `√tol` (relative).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnconvergedBracket<T> {
    pub lower: T,
    pub upper: T,
    pub best_energy: T,
    pub relative_singular_value: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundStateSearch<T> {
    /// Distinct energies, ascending.
    pub states: Vec<BoundStateResult<T>>,
    pub unconverged: Vec<UnconvergedBracket<T>>,
    pub e_min: T,
    pub e_max: T,
}

/// `μ − 10 (1 + (4π s)²)` with `s = max(‖A‖/‖B‖, ‖B‖/‖A‖)`, a scale that
/// covers the coupling-induced binding energies of the presets.
pub fn default_search_floor<T: Real>(model: &ModelSpec<T>, pair: &BoundaryPair<T>) -> T {
    let (na, nb) = (pair.a().norm_inf(), pair.b().norm_inf());
    let s = if na == T::zero() || nb == T::zero() { T::one() } else { (na / nb).max(nb / na) };
    let k = T::lit(4.0) * T::PI() * s;
    essential_spectrum_bottom(model) - T::lit(10.0) * (T::one() + k * k)
}

/// Offset of the scan from the threshold: `1e-6 (1 + |μ|)`.
pub fn threshold_offset<T: Real>(mu: T) -> T {
    T::lit(1e-6) * (T::one() + mu.abs())
}

struct Probe<T> {
    svd: Svd<T>,
    norm: T,
    cols: Vec<usize>,
}

impl<T: Real> Probe<T> {
    fn relative(&self) -> T {
        if self.norm == T::zero() {
            T::zero()
        } else {
            self.svd.smallest() / self.norm
        }
    }
}

fn probe<T: Real>(model: &ModelSpec<T>, pair: &BoundaryPair<T>, e: T) -> Result<Probe<T>> {
    let (g, norm, cols) = dressed_at(model, pair, e)?;
    Ok(Probe { norm, svd: svd(&g), cols })
}

/// Golden-section minimization of the relative `σ_min` over `κ ∈ [lo, hi]`.
fn golden<T: Real>(f: &dyn Fn(T) -> Result<T>, mut lo: T, mut hi: T, max_iterations: usize) -> Result<(T, T)> {
    let r = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let stop = T::epsilon() * T::lit(4.0);
    for _ in 0..max_iterations {
        if hi - lo <= stop * hi.abs().max(T::one()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Scans `[E_min, μ − δ]`, polishes every local minimum of `σ_min` and
/// keeps those with `σ_min ≤ tol · (‖A‖_∞ + ‖BΓ‖_∞)`.
pub fn find_bound_states<T: Real>(
    model: &ModelSpec<T>,
    pair: &BoundaryPair<T>,
    opts: &SearchOptions<T>,
) -> Result<BoundStateSearch<T>> {
    check_compatible(model, pair)?;
    let kopts = KernelOptions { unchecked: opts.unchecked, cut: CutPolicy::Reject, validation: opts.validation };
    ensure_valid(pair, &kopts)?;
    let mu = essential_spectrum_bottom(model);
    let e_min = opts.e_min.unwrap_or_else(|| default_search_floor(model, pair));
    let delta = threshold_offset(mu);
    let e_max = mu - delta;
    check_below(e_min, e_max)?;
    if opts.points < 3 {
        return Err(Error::InvalidParameter(format!("{} scan points, need at least 3", opts.points)));
    }
    let mut search = BoundStateSearch { states: Vec::new(), unconverged: Vec::new(), e_min, e_max };
    if pair.b().max_abs() == T::zero() {
        return Ok(search);
    }
    scan_window(model, pair, opts, mu, delta.sqrt(), (mu - e_min).sqrt(), &mut search)?;
    search.states.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap_or(std::cmp::Ordering::Equal));
    search.states = merge_duplicates(search.states);
    Ok(search)
}

/// Eigenvalues embedded in the continuum, between `μ` and the highest
/// threshold. At such an `E` the eigenfunction has no component in the
/// channels open at `E`, so its charges are a null vector of the columns of
/// `Γ^{AB}(E)` that belong to closed channels. Spin-diagonal pairs with
/// Zeeman splitting have them generically; spin-flip couplings usually turn
/// them into resonances. Each window between consecutive thresholds is
/// scanned like [`find_bound_states`], with `opts.points` points.
pub fn find_embedded_eigenvalues<T: Real>(
    model: &ModelSpec<T>,
    pair: &BoundaryPair<T>,
    opts: &SearchOptions<T>,
) -> Result<BoundStateSearch<T>> {
    check_compatible(model, pair)?;
    let kopts = KernelOptions { unchecked: opts.unchecked, cut: CutPolicy::Reject, validation: opts.validation };
    ensure_valid(pair, &kopts)?;
    if opts.points < 3 {
        return Err(Error::InvalidParameter(format!("{} scan points, need at least 3", opts.points)));
    }
    let mut thresholds: Vec<T> = (0..model.config_count()).map(|c| model.shift(c)).collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    thresholds.dedup();
    let (lo, hi) = (thresholds[0], thresholds[thresholds.len() - 1]);
    let mut search = BoundStateSearch { states: Vec::new(), unconverged: Vec::new(), e_min: lo, e_max: hi };
    if pair.b().max_abs() == T::zero() {
        return Ok(search);
    }
    for w in thresholds.windows(2) {
        let (bottom, top) = (w[0], w[1]);
        let (d_top, d_bottom) = (threshold_offset(top), threshold_offset(bottom));
        if top - bottom <= d_top + d_bottom {
            continue;
        }
        scan_window(model, pair, opts, top, d_top.sqrt(), (top - bottom - d_bottom).sqrt(), &mut search)?;
    }
    search.states.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap_or(std::cmp::Ordering::Equal));
    search.states = merge_duplicates(search.states);
    Ok(search)
}

/// Scans `E = top − κ²` for `κ` geometric in `[k_lo, k_hi]`, polishes the
/// local minima of the relative `σ_min` and records roots and unconverged
/// brackets.
fn scan_window<T: Real>(
    model: &ModelSpec<T>,
    pair: &BoundaryPair<T>,
    opts: &SearchOptions<T>,
    top: T,
    k_lo: T,
    k_hi: T,
    search: &mut BoundStateSearch<T>,
) -> Result<()> {
    let energy = |k: T| top - k * k;
    let n = opts.points;
    let ratio = (k_hi / k_lo).ln() / T::from_usize_lossy(n - 1);
    let kappas: Vec<T> =
        (0..n).map(|i| if i == n - 1 { k_hi } else { k_lo * (ratio * T::from_usize_lossy(i)).exp() }).collect();
    let values: Vec<T> =
        kappas.par_iter().map(|&k| probe(model, pair, energy(k)).map(|p| p.relative())).collect::<Result<_>>()?;

    let objective = |k: T| probe(model, pair, energy(k)).map(|p| p.relative());
    let loose = opts.tol.sqrt();
    // The threshold end is skipped: in d = 1 the relative σ_min falls like κ
    // there without a root.
    for i in 1..n {
        let left_ok = values[i] <= values[i - 1];
        let right_ok = i == n - 1 || values[i] < values[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let lo = kappas[i - 1];
        let hi = kappas[(i + 1).min(n - 1)];
        let (k, rel) = golden(&objective, lo, hi, opts.max_iterations)?;
        let e = energy(k);
        if rel <= opts.tol {
            let p = probe(model, pair, e)?;
            search.states.push(result_from_probe(model, e, &p, opts.tol));
        } else if rel <= loose {
            search.unconverged.push(UnconvergedBracket {
                lower: energy(hi),
                upper: energy(lo),
                best_energy: e,
                relative_singular_value: rel,
            });
        }
    }
    Ok(())
}

fn result_from_probe<T: Real>(model: &ModelSpec<T>, e: T, p: &Probe<T>, tol: T) -> BoundStateResult<T> {
    let cut = T::lit(1e3) * tol * p.norm;
    let sv = &p.svd.singular_values;
    let mult = sv.iter().filter(|&&s| s <= cut).count().max(1);
    let cols = p.svd.v.cols();
    let m = model.index_dimension();
    let null_space: Vec<Vec<Cx<T>>> = (0..mult)
        .map(|k| {
            let mut full = vec![Cx::zero(); m];
            for (i, v) in p.svd.v.column(cols - 1 - k).into_iter().enumerate() {
                full[p.cols[i]] = v;
            }
            full
        })
        .collect();
    BoundStateResult {
        energy: e,
        charges: null_space[0].clone(),
        smallest_singular_value: p.svd.smallest(),
        multiplicity_estimate: mult,
        null_space,
    }
}

fn merge_duplicates<T: Real>(states: Vec<BoundStateResult<T>>) -> Vec<BoundStateResult<T>> {
    let mut out: Vec<BoundStateResult<T>> = Vec::with_capacity(states.len());
    for s in states {
        match out.last_mut() {
            Some(prev) if (s.energy - prev.energy).abs() <= T::lit(1e-9) * (T::one() + s.energy.abs()) => {
                if s.smallest_singular_value < prev.smallest_singular_value {
                    *prev = s;
                }
            }
            _ => out.push(s),
        }
    }
    out
}

/// `Σ_μ c_μ Φ^E_μ(x, σ)` for an arbitrary charge vector at real `E < μ`.
pub fn expansion_eval<T: Real>(
    model: &ModelSpec<T>,
    energy: T,
    charges: &[Cx<T>],
    x: Point<T>,
    sigma: usize,
) -> Result<Cx<T>> {
    if charges.len() != model.index_dimension() {
        return Err(Error::LengthMismatch { expected: model.index_dimension(), got: charges.len() });
    }
    if sigma >= model.config_count() {
        return Err(Error::IndexOutOfRange(format!("configuration {sigma}")));
    }
    for (j, y) in model.positions().iter().enumerate() {
        if x.distance(y) == T::zero() {
            return Err(Error::AtSpinSite(j));
        }
    }
    let roots = supported_roots(model, energy, charges)?;
    let s = roots[sigma];
    Ok(channel_indices(model, sigma).fold(Cx::zero(), |acc, flat| {
        let mu = model.decode(flat);
        acc + charges[flat] * defect_value(model.dim(), mu.parity(), s, x, model.position(mu.j))
    }))
}

/// [`expansion_eval`] on 1D sample points; a point at a site receives the
/// mean of the one-sided limits.
pub(crate) fn expansion_on_points<T: Real>(
    model: &ModelSpec<T>,
    energy: T,
    charges: &[Cx<T>],
    xs: &[T],
) -> Result<Vec<Vec<Cx<T>>>> {
    let roots = supported_roots(model, energy, charges)?;
    Ok((0..model.config_count())
        .map(|sigma| {
            let idx: Vec<usize> = channel_indices(model, sigma).filter(|&f| !charges[f].is_zero()).collect();
            xs.iter()
                .map(|&x| {
                    idx.iter().fold(Cx::zero(), |acc, &flat| {
                        let mu = model.decode(flat);
                        let v =
                            defect_value(model.dim(), mu.parity(), roots[sigma], Point::line(x), model.position(mu.j));
                        acc + charges[flat] * v
                    })
                })
                .collect()
        })
        .collect())
}

/// Channel roots at `energy`, which may lie in the continuum if every
/// channel open there carries zero charge.
fn supported_roots<T: Real>(model: &ModelSpec<T>, energy: T, charges: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    if charges.len() != model.index_dimension() {
        return Err(Error::LengthMismatch { expected: model.index_dimension(), got: charges.len() });
    }
    let (roots, closed) = closed_channel_roots(model, energy);
    let above = || Error::AboveThreshold { energy: energy.as_f64(), bottom: essential_spectrum_bottom(model).as_f64() };
    if closed.is_empty() {
        return Err(above());
    }
    for (k, c) in charges.iter().enumerate() {
        if !c.is_zero() && closed.binary_search(&k).is_err() {
            return Err(above());
        }
    }
    Ok(roots)
}

/// The eigenfunction of `result` (unnormalized; see [`eigenfunction_norm`]).
pub fn eigenfunction_eval<T: Real>(
    model: &ModelSpec<T>,
    result: &BoundStateResult<T>,
    x: Point<T>,
    sigma: usize,
) -> Result<Cx<T>> {
    expansion_eval(model, result.energy, &result.charges, x, sigma)
}

/// Gram matrix `⟨Φ^E_μ, Φ^E_ν⟩` of the defect functions at real `E`. Above
/// `μ` the blocks of channels open at `E` are not square integrable and are
/// left zero.
pub fn defect_gram<T: Real>(model: &ModelSpec<T>, energy: T) -> Result<CMatrix<T>> {
    let m = model.index_dimension();
    if closed_channel_roots(model, energy).1.is_empty() {
        return Err(Error::AboveThreshold {
            energy: energy.as_f64(),
            bottom: essential_spectrum_bottom(model).as_f64(),
        });
    }
    let mut g = CMatrix::zeros(m, m);
    for sigma in 0..model.config_count() {
        if energy >= model.shift(sigma) {
            continue;
        }
        let w = real(energy - model.shift(sigma));
        let idx: Vec<usize> = channel_indices(model, sigma).collect();
        for &a in &idx {
            let ma = model.decode(a);
            for &b in &idx {
                let mb = model.decode(b);
                let (ya, yb) = (model.position(ma.j), model.position(mb.j));
                g[(a, b)] = match model.dim() {
                    Dimension::Three => green_overlap_3d_limit(w, ya.distance(&yb))?,
                    Dimension::One => {
                        let order = (ma.parity() + mb.parity()) as usize;
                        let v = green_overlap_1d_limit(w, ya.x() - yb.x(), order)?;
                        if ma.parity() == 1 {
                            -v
                        } else {
                            v
                        }
                    }
                };
            }
        }
    }
    Ok(g)
}

fn gram_inner<T: Real>(g: &CMatrix<T>, a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    let gb = g.mul_vec(b);
    a.iter().zip(&gb).fold(Cx::zero(), |acc, (x, y)| acc + x.conj() * *y)
}

/// `L²` norm of `Σ_μ c_μ Φ^E_μ`.
pub fn eigenfunction_norm<T: Real>(model: &ModelSpec<T>, energy: T, charges: &[Cx<T>]) -> Result<T> {
    supported_roots(model, energy, charges)?;
    let g = defect_gram(model, energy)?;
    Ok(gram_inner(&g, charges, charges).re.max(T::zero()).sqrt())
}

/// Charge vectors of an `L²`-orthonormal basis of the eigenspace, by
/// Gram–Schmidt over `null_space`. Numerically dependent vectors are dropped.
pub fn orthonormal_eigenbasis<T: Real>(model: &ModelSpec<T>, result: &BoundStateResult<T>) -> Result<Vec<Vec<Cx<T>>>> {
    let g = defect_gram(model, result.energy)?;
    let mut basis: Vec<Vec<Cx<T>>> = Vec::new();
    for v in &result.null_space {
        let raw = gram_inner(&g, v, v).re.sqrt();
        let mut u = v.clone();
        for _pass in 0..2 {
            for b in &basis {
                let c = gram_inner(&g, b, &u);
                for (ui, bi) in u.iter_mut().zip(b) {
                    *ui = *ui - c * *bi;
                }
            }
        }
        let nrm = gram_inner(&g, &u, &u).re.max(T::zero()).sqrt();
        if nrm > T::lit(1e-8) * raw {
            basis.push(u.into_iter().map(|z| z / nrm).collect());
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{preset_delta, preset_delta_prime, preset_free, preset_offdiag, DeltaConvention};
    use crate::quadrature::{integrate, QuadOptions};
    use std::f64::consts::PI;

    #[test]
    fn essential_bottom_examples() {
        let m = ModelSpec::<f64>::line(&[0.0, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(essential_spectrum_bottom(&m), -3.0);
        let m = ModelSpec::<f64>::line(&[0.0], &[0.0]).unwrap();
        assert_eq!(essential_spectrum_bottom(&m), 0.0);
        let m = ModelSpec::<f64>::line(&[0.0, 1.0], &[-0.5, 1.5]).unwrap();
        assert_eq!(essential_spectrum_bottom(&m), -2.0);
    }

    #[test]
    fn free_profile_is_identity() {
        let m = ModelSpec::<f64>::space(&[[0.0, 0.0, 0.0]], &[0.0]).unwrap();
        let p = preset_free(Dimension::Three, 1).unwrap();
        let prof = detgamma_profile(&m, &p, &[-1.0, -10.0]).unwrap();
        for s in prof {
            assert_eq!(s.smallest_singular_value, 1.0);
            assert_eq!(s.log_abs_det, 0.0);
        }
        assert!(matches!(detgamma_profile(&m, &p, &[0.0]), Err(Error::AboveThreshold { .. })));
        let r = find_bound_states(&m, &p, &SearchOptions::default()).unwrap();
        assert!(r.states.is_empty());
    }

    #[test]
    fn delta_3d_bound_state() {
        let m = ModelSpec::<f64>::space(&[[0.0, 0.0, 0.0]], &[0.0]).unwrap();
        let p = preset_delta(Dimension::Three, 1, &[[-1.0, -1.0]], DeltaConvention::Stated).unwrap();
        let r = find_bound_states(&m, &p, &SearchOptions::default()).unwrap();
        assert_eq!(r.states.len(), 1);
        let e = -16.0 * PI * PI;
        assert!((r.states[0].energy - e).abs() <= 1e-8 * e.abs(), "{}", r.states[0].energy);
        assert_eq!(r.states[0].multiplicity_estimate, 2);
        let prof = detgamma_profile(&m, &p, &[e * 1.01, e, e * 0.99]).unwrap();
        assert!(prof[1].smallest_singular_value < prof[0].smallest_singular_value);
        assert!(prof[1].smallest_singular_value < prof[2].smallest_singular_value);
    }

    #[test]
    fn delta_1d_bound_state() {
        let m = ModelSpec::<f64>::line(&[0.0], &[0.0]).unwrap();
        let p = preset_delta(Dimension::One, 1, &[[-2.0, -2.0]], DeltaConvention::Stated).unwrap();
        let r = find_bound_states(&m, &p, &SearchOptions::default()).unwrap();
        assert_eq!(r.states.len(), 1);
        assert!((r.states[0].energy + 1.0).abs() <= 1e-8);
    }

    #[test]
    fn zeeman_split_delta_1d() {
        // Channel σ binds at α·σ − β_σ²/4, with β_+ on σ = +1.
        let m = ModelSpec::<f64>::line(&[0.0], &[0.3]).unwrap();
        let p = preset_delta(Dimension::One, 1, &[[-2.0, -3.0]], DeltaConvention::Stated).unwrap();
        let r = find_bound_states(&m, &p, &SearchOptions::default()).unwrap();
        let got: Vec<f64> = r.states.iter().map(|s| s.energy).collect();
        assert_eq!(got.len(), 2, "{got:?}");
        assert!((got[0] - (-0.3 - 2.25)).abs() < 1e-8, "{got:?}");
        assert!((got[1] - (0.3 - 1.0)).abs() < 1e-8, "{got:?}");
    }

    #[test]
    fn delta_prime_bound_state() {
        let m = ModelSpec::<f64>::line(&[0.0], &[0.0]).unwrap();
        // Odd solution sgn(x) e^{−κ|x|}: jump 2 = γ·(−κ), so only γ < 0 binds.
        let p = preset_delta_prime(Dimension::One, 1, &[0.5]).unwrap();
        assert!(find_bound_states(&m, &p, &SearchOptions::default()).unwrap().states.is_empty());
        let p = preset_delta_prime(Dimension::One, 1, &[-0.5]).unwrap();
        let r = find_bound_states(&m, &p, &SearchOptions::default()).unwrap();
        assert_eq!(r.states.len(), 1, "{:?}", r.states);
        assert!((r.states[0].energy + 16.0).abs() < 1e-7, "{}", r.states[0].energy);
    }

    #[test]
    fn offdiag_3d_binds_the_symmetric_combination() {
        // Γ^AB = [[κ/4π, iβ̂], [−iβ̂, κ/4π]] has eigenvalues κ/4π ± β̂.
        let m = ModelSpec::<f64>::space(&[[0.0, 0.0, 0.0]], &[0.0]).unwrap();
        for bh in [0.4, -0.4] {
            let p = preset_offdiag(Dimension::Three, 1, &[[bh, bh]]).unwrap();
            let r = find_bound_states(&m, &p, &SearchOptions::default()).unwrap();
            assert_eq!(r.states.len(), 1);
            let e = -16.0 * PI * PI * bh * bh;
            assert!((r.states[0].energy - e).abs() <= 1e-8 * e.abs());
            assert_eq!(r.states[0].multiplicity_estimate, 1);
        }
    }

    #[test]
    fn eigenfunction_profile_and_norm() {
        let m = ModelSpec::<f64>::space(&[[0.0, 0.0, 0.0]], &[0.0]).unwrap();
        let p = preset_delta(Dimension::Three, 1, &[[-1.0, 0.5]], DeltaConvention::Stated).unwrap();
        let r = find_bound_states(&m, &p, &SearchOptions::default()).unwrap();
        assert_eq!(r.states.len(), 1);
        let st = &r.states[0];
        let kappa = (-st.energy).sqrt();
        let bound = if st.charges[0].norm() > st.charges[1].norm() { 0 } else { 1 };
        let other = 1 - bound;
        let v1 = eigenfunction_eval(&m, st, Point::space(0.1, 0.0, 0.0), bound).unwrap();
        let v2 = eigenfunction_eval(&m, st, Point::space(0.0, 0.3, 0.0), bound).unwrap();
        let ratio = (v1 / v2).re;
        let expect = ((-kappa * 0.1).exp() / 0.1) / ((-kappa * 0.3).exp() / 0.3);
        assert!((ratio / expect - 1.0).abs() < 1e-10);
        assert_eq!(eigenfunction_eval(&m, st, Point::space(0.1, 0.0, 0.0), other).unwrap(), Cx::zero());
        let far = eigenfunction_eval(&m, st, Point::space(20.0 / kappa, 0.0, 0.0), bound).unwrap();
        assert!(far.norm() <= 1e-8 * v1.norm());
        let radial = integrate(
            |r: f64| {
                let v = eigenfunction_eval(&m, st, Point::space(r, 0.0, 0.0), bound).unwrap();
                Cx::new(4.0 * PI * r * r * v.norm_sqr(), 0.0)
            },
            1e-12,
            40.0 / kappa,
            &QuadOptions::default().with_abs_tol(1e-14),
        );
        let n = eigenfunction_norm(&m, st.energy, &st.charges).unwrap();
        assert!((radial.value.re.sqrt() / n - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gram_matches_quadrature_1d() {
        let m = ModelSpec::<f64>::line(&[-0.4, 0.6], &[0.0, 0.0]).unwrap();
        let e = -1.7;
        let g = defect_gram(&m, e).unwrap();
        let c: Vec<Cx<f64>> =
            (0..m.index_dimension()).map(|i| Cx::new(0.3 + i as f64 * 0.1, 0.2 - 0.05 * i as f64)).collect();
        let quad: f64 = (0..m.config_count())
            .map(|sigma| {
                let f = |x: f64| Cx::new(expansion_eval(&m, e, &c, Point::line(x), sigma).unwrap().norm_sqr(), 0.0);
                let o = QuadOptions::default().with_abs_tol(1e-13);
                integrate(f, -40.0, -0.4, &o).value.re
                    + integrate(f, -0.4, 0.6, &o).value.re
                    + integrate(f, 0.6, 40.0, &o).value.re
            })
            .sum();
        assert!((gram_inner(&g, &c, &c).re / quad - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_basis_is_orthonormal() {
        let m = ModelSpec::<f64>::line(&[0.0], &[0.0]).unwrap();
        let p = preset_delta(Dimension::One, 1, &[[-2.0, -2.0]], DeltaConvention::Stated).unwrap();
        let r = find_bound_states(&m, &p, &SearchOptions::default()).unwrap();
        let st = &r.states[0];
        assert_eq!(st.multiplicity_estimate, 2);
        let basis = orthonormal_eigenbasis(&m, st).unwrap();
        assert_eq!(basis.len(), 2);
        let g = defect_gram(&m, st.energy).unwrap();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let v = gram_inner(&g, a, b);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - Cx::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn embedded_level_of_a_spin_diagonal_delta() {
        let m = ModelSpec::<f64>::line(&[0.0], &[0.3]).unwrap();
        let p = preset_delta(Dimension::One, 1, &[[-1.0, 2.0]], DeltaConvention::Stated).unwrap();
        assert!(find_bound_states(&m, &p, &SearchOptions::default()).unwrap().states.is_empty());
        let r = find_embedded_eigenvalues(&m, &p, &SearchOptions::default()).unwrap();
        assert_eq!(r.states.len(), 1);
        let b = &r.states[0];
        assert!((b.energy - 0.05).abs() < 1e-10, "{}", b.energy);
        // Only the channel with σ = +1 is closed at 0.05.
        for k in 0..m.index_dimension() {
            if m.decode(k).sigma.code() != 0 {
                assert!(b.charges[k].is_zero(), "μ = {k}");
            }
        }
        assert!(b.charges.iter().any(|c| !c.is_zero()));
        let basis = orthonormal_eigenbasis(&m, b).unwrap();
        assert_eq!(basis.len(), 1);
        assert!((eigenfunction_norm(&m, b.energy, &basis[0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(eigenfunction_eval(&m, b, Point::line(0.7), 1).unwrap(), Cx::new(0.0, 0.0));
        let mut open = b.charges.clone();
        open[1] = Cx::new(1.0, 0.0);
        assert!(matches!(expansion_eval(&m, b.energy, &open, Point::line(0.7), 1), Err(Error::AboveThreshold { .. })));
    }

    #[test]
    fn embedded_search_is_empty_without_zeeman_splitting() {
        let m = ModelSpec::<f64>::space(&[[0.0, 0.0, 0.0]], &[0.0]).unwrap();
        let p = preset_delta(Dimension::Three, 1, &[[-1.0, 0.5]], DeltaConvention::Stated).unwrap();
        assert!(find_embedded_eigenvalues(&m, &p, &SearchOptions::default()).unwrap().states.is_empty());
    }
}
