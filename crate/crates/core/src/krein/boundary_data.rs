//! Numerical extraction of the boundary data `(q, f)` of a wave function
//! at the spin sites.
//!
//! * d = 1: `q₀ = ψ'(y⁻) − ψ'(y⁺)`, `q₁ = ψ(y⁻) − ψ(y⁺)`,
//!   `f₀ = (ψ(y⁺) + ψ(y⁻))/2`, `f₁ = −(ψ'(y⁺) + ψ'(y⁻))/2`, with one-sided
//!   limits from Richardson extrapolation.
//! * d = 3: `r ψ̄(r) ≈ q/(4π) + f r + O(r²)` fitted by a quartic on a ladder
//!   of six radii, `ψ̄` being the average over 26 directions.

use crate::boundary::{boundary_residual, BoundaryPair};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use crate::space::{Dimension, Point};
use crate::spinspace::{ModelSpec, MultiIndex};
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtractOptions<T> {
    /// Largest offset from the site; `None` picks `c · min(distance to the
    /// nearest other site, 1)` with `c = 0.05` in d = 1 and `0.01` in d = 3.
    pub radius: Option<T>,
    /// Relative tolerance on the extrapolation error estimate.
    pub tol: T,
}

impl<T: Real> Default for ExtractOptions<T> {
    fn default() -> Self {
        ExtractOptions { radius: None, tol: T::lit(1e-6).max(T::epsilon().sqrt()) }
    }
}

/// Boundary data at one `(j, σ)`; `q` and `f` are indexed by parity in
/// d = 1 and have length one in d = 3.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteData<T> {
    pub q: Vec<Cx<T>>,
    pub f: Vec<Cx<T>>,
    pub error: T,
}

fn default_radius<T: Real>(model: &ModelSpec<T>, opts: &ExtractOptions<T>) -> T {
    let c = match model.dim() {
        Dimension::One => T::lit(0.05),
        Dimension::Three => T::lit(0.01),
    };
    opts.radius.unwrap_or_else(|| c * model.min_separation().min(T::one()))
}

/// Ridders–Neville extrapolation to `h → 0` of `values[k] ≈ v(h₀/2^k)`,
/// assuming an expansion in integer powers of `h`. Returns the best
/// estimate and its error.
fn extrapolate<T: Real>(values: &[Cx<T>]) -> (Cx<T>, T) {
    let n = values.len();
    let mut table = vec![vec![Cx::zero(); n]; n];
    let mut best = (values[0], T::infinity());
    for k in 0..n {
        table[k][0] = values[k];
        let mut pow = T::one();
        for l in 1..=k {
            pow = pow * T::lit(2.0);
            table[k][l] = (table[k][l - 1] * pow - table[k - 1][l - 1]) / (pow - T::one());
            let err = (table[k][l] - table[k][l - 1]).norm().max((table[k][l] - table[k - 1][l - 1]).norm());
            if err <= best.1 {
                best = (table[k][l], err);
            }
        }
        if k >= 2 && (table[k][k] - table[k - 1][k - 1]).norm() >= T::lit(2.0) * best.1 && best.1.is_finite() {
            break;
        }
    }
    best
}

const LEVELS: usize = 8;

fn one_sided<T: Real>(
    psi: &dyn Fn(Point<T>) -> Result<Cx<T>>,
    y: T,
    side: T,
    h0: T,
) -> Result<((Cx<T>, T), (Cx<T>, T))> {
    let mut vals = Vec::with_capacity(LEVELS);
    let mut ders = Vec::with_capacity(LEVELS);
    let mut h = h0;
    for _ in 0..LEVELS {
        let at = |t: T| psi(Point::line(y + side * t));
        vals.push(at(h)?);
        let d = h * T::lit(0.5);
        ders.push((at(h + d)? - at(h - d)?) / (d + d) * side);
        h = h * T::lit(0.5);
    }
    Ok((extrapolate(&vals), extrapolate(&ders)))
}

/// 26 unit directions: the nonzero points of `{−1, 0, 1}³`, normalized.
fn directions<T: Real>() -> Vec<[T; 3]> {
    let mut out = Vec::with_capacity(26);
    for a in -1i32..=1 {
        for b in -1i32..=1 {
            for c in -1i32..=1 {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                let v = [a, b, c].map(|t| T::from_i32(t).expect("small"));
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                out.push(v.map(|t| t / n));
            }
        }
    }
    out
}

/// Least squares for a real design matrix and complex data via modified
/// Gram–Schmidt QR. Returns coefficients and the residual norm.
fn least_squares<T: Real>(design: &[Vec<T>], data: &[Cx<T>]) -> (Vec<Cx<T>>, T) {
    let rows = design.len();
    let cols = design[0].len();
    let mut q: Vec<Vec<T>> = (0..cols).map(|c| (0..rows).map(|r| design[r][c]).collect()).collect();
    let mut rmat = vec![vec![T::zero(); cols]; cols];
    for c in 0..cols {
        for p in 0..c {
            let dot: T = (0..rows).map(|r| q[p][r] * q[c][r]).sum();
            rmat[p][c] = dot;
            for r in 0..rows {
                q[c][r] = q[c][r] - dot * q[p][r];
            }
        }
        let nrm = q[c].iter().map(|v| *v * *v).sum::<T>().sqrt();
        rmat[c][c] = nrm;
        for v in q[c].iter_mut() {
            *v = *v / nrm;
        }
    }
    let qt_b: Vec<Cx<T>> = (0..cols).map(|c| (0..rows).fold(Cx::zero(), |acc, r| acc + data[r] * q[c][r])).collect();
    let mut coef = vec![Cx::zero(); cols];
    for c in (0..cols).rev() {
        let mut v = qt_b[c];
        for p in c + 1..cols {
            v = v - coef[p] * rmat[c][p];
        }
        coef[c] = v / rmat[c][c];
    }
    let resid = (0..rows)
        .map(|r| {
            let fit = (0..cols).fold(Cx::<T>::zero(), |acc, c| acc + coef[c] * design[r][c]);
            (fit - data[r]).norm_sqr()
        })
        .sum::<T>()
        .sqrt();
    (coef, resid)
}

/// Boundary data of channel `sigma` at site `j`. `psi` evaluates
/// `ψ_σ`; it is never called at the site itself.
pub fn extract_boundary_data<T: Real>(
    model: &ModelSpec<T>,
    psi: &dyn Fn(Point<T>) -> Result<Cx<T>>,
    j: usize,
    opts: &ExtractOptions<T>,
) -> Result<SiteData<T>> {
    if j >= model.n() {
        return Err(Error::IndexOutOfRange(format!("site {j} for N = {}", model.n())));
    }
    let h0 = default_radius(model, opts);
    let y = model.position(j);
    match model.dim() {
        Dimension::One => {
            let ((vp, evp), (dp, edp)) = one_sided(psi, y.x(), T::one(), h0)?;
            let ((vm, evm), (dm, edm)) = one_sided(psi, y.x(), -T::one(), h0)?;
            let half = T::lit(0.5);
            let q = vec![dm - dp, vm - vp];
            let f = vec![(vp + vm) * half, -(dp + dm) * half];
            let scale_v = T::one().max(vp.norm()).max(vm.norm());
            let scale_d = T::one().max(dp.norm()).max(dm.norm());
            let rel = (evp + evm) / scale_v + (edp + edm) / scale_d;
            if !(rel <= opts.tol) {
                return Err(Error::Extrapolation { estimate: rel.as_f64(), tolerance: opts.tol.as_f64() });
            }
            Ok(SiteData { q, f, error: (evp + evm).max(edp + edm) })
        }
        Dimension::Three => {
            let dirs = directions::<T>();
            let mut design = Vec::with_capacity(6);
            let mut data = Vec::with_capacity(6);
            let mut r = h0;
            for _ in 0..6 {
                let mut avg = Cx::zero();
                for d in &dirs {
                    avg = avg + psi(y.offset(d.map(|c| c * r)))?;
                }
                avg = avg / T::from_usize_lossy(dirs.len());
                let t = r / h0;
                design.push(vec![T::one(), t, t * t, t * t * t, t * t * t * t]);
                data.push(avg * r);
                r = r * T::lit(0.5);
            }
            let (coef, resid) = least_squares(&design, &data);
            let four_pi = T::lit(4.0) * T::PI();
            let q = coef[0] * four_pi;
            let f = coef[1] / h0;
            let scale = T::one().max(coef[0].norm()).max(coef[1].norm());
            if !(resid / scale <= opts.tol) {
                return Err(Error::Extrapolation { estimate: (resid / scale).as_f64(), tolerance: opts.tol.as_f64() });
            }
            Ok(SiteData { q: vec![q], f: vec![f], error: resid })
        }
    }
}

/// `(q, f)` for all `μ`, in flat order. `psi(x, σ)` evaluates channel `σ`
/// by configuration code.
pub fn extract_all<T: Real>(
    model: &ModelSpec<T>,
    psi: &dyn Fn(Point<T>, usize) -> Result<Cx<T>>,
    opts: &ExtractOptions<T>,
) -> Result<(Vec<Cx<T>>, Vec<Cx<T>>)> {
    let m = model.index_dimension();
    let mut q = vec![Cx::zero(); m];
    let mut f = vec![Cx::zero(); m];
    let parities: &[Option<u8>] = match model.dim() {
        Dimension::One => &[Some(0), Some(1)],
        Dimension::Three => &[None],
    };
    for sigma in model.configs() {
        let code = sigma.code();
        let channel = |x: Point<T>| psi(x, code);
        for j in 0..model.n() {
            let d = extract_boundary_data(model, &channel, j, opts)?;
            for (k, &p) in parities.iter().enumerate() {
                let flat = model.encode(&MultiIndex { p, j, sigma })?;
                q[flat] = d.q[k];
                f[flat] = d.f[k];
            }
        }
    }
    Ok((q, f))
}

/// `max |A q − B f|`.
pub fn verify_boundary_conditions<T: Real>(pair: &BoundaryPair<T>, q: &[Cx<T>], f: &[Cx<T>]) -> Result<T> {
    boundary_residual(pair, q, f)
}
