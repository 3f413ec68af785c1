//! Boundary pairs `(A, B)` defining the condition `A q = B f`, their
//! validation, the locality test and the named presets.

use crate::error::{Error, Result};
use crate::linalg::{singular_values, CMatrix};
use crate::scalar::{cx, real, Cx, Real};
use crate::space::Dimension;
use crate::spinspace::{encode_multiindex, index_dimension, MultiIndex, SpinConfiguration};
use num_traits::Zero;

/// The two `m × m` matrices of a boundary condition.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPair<T> {
    dim: Dimension,
    n: usize,
    a: CMatrix<T>,
    b: CMatrix<T>,
}

impl<T: Real> BoundaryPair<T> {
    pub fn new(dim: Dimension, n: usize, a: CMatrix<T>, b: CMatrix<T>) -> Result<Self> {
        let m = index_dimension(dim, n);
        for mat in [&a, &b] {
            if mat.rows() != m || mat.cols() != m {
                return Err(Error::MatrixShape { expected: m, rows: mat.rows(), cols: mat.cols() });
            }
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter("non-finite boundary matrix entry".into()));
        }
        Ok(BoundaryPair { dim, n, a, b })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &CMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &CMatrix<T> {
        &self.b
    }

    /// `(cA, cB)`; describes the same operator for `c ≠ 0`.
    pub fn scaled(&self, c: Cx<T>) -> Self {
        BoundaryPair { dim: self.dim, n: self.n, a: self.a.scale(c), b: self.b.scale(c) }
    }

    /// `(XA, XB)`; describes the same operator for invertible `X`.
    pub fn left_multiplied(&self, x: &CMatrix<T>) -> Self {
        BoundaryPair { dim: self.dim, n: self.n, a: x.matmul(&self.a), b: x.matmul(&self.b) }
    }
}

/// Tolerances for [`validate`]. A `None` hermiticity tolerance means
/// `1e-10 · max(1, ‖A‖‖B‖)` in max-abs norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationOptions<T> {
    pub hermiticity_tol: Option<T>,
    pub rank_rtol: T,
}

impl<T: Real> Default for ValidationOptions<T> {
    fn default() -> Self {
        ValidationOptions { hermiticity_tol: None, rank_rtol: T::lit(1e-10).max(T::epsilon() * T::lit(100.0)) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<T> {
    /// `max |AB* − BA*|`.
    pub hermiticity_defect: T,
    /// Tolerance the defect was compared against.
    pub hermiticity_tol: T,
    /// Rank of the `m × 2m` block `(A|B)`.
    pub rank_estimate: usize,
    pub size: usize,
    /// Singular values of `(A|B)`, descending.
    pub singular_values: Vec<T>,
    pub is_valid: bool,
    pub is_local: bool,
}

pub fn validate<T: Real>(pair: &BoundaryPair<T>, opts: &ValidationOptions<T>) -> ValidationReport<T> {
    let (a, b) = (pair.a(), pair.b());
    let ab = a.matmul(&b.adjoint());
    let defect = ab.sub(&ab.adjoint()).max_abs();
    let tol = opts.hermiticity_tol.unwrap_or_else(|| T::lit(1e-10) * T::one().max(a.max_abs() * b.max_abs()));
    let sv = singular_values(&a.hstack(b));
    let smax = sv.first().copied().unwrap_or_else(T::zero);
    let rank = if smax == T::zero() { 0 } else { sv.iter().filter(|&&s| s > opts.rank_rtol * smax).count() };
    let m = pair.size();
    ValidationReport {
        hermiticity_defect: defect,
        hermiticity_tol: tol,
        rank_estimate: rank,
        size: m,
        singular_values: sv,
        is_valid: defect <= tol && rank == m,
        is_local: is_local(pair),
    }
}

/// True iff both matrices couple a site only to itself, leave spectator
/// spins untouched, and have entries that depend only on the site's own
/// spin pair (and parities), identically for every spectator configuration.
pub fn is_local<T: Real>(pair: &BoundaryPair<T>) -> bool {
    let n = pair.n();
    let scale = pair.a().max_abs().max(pair.b().max_abs());
    let tol = T::lit(1e-12) * scale;
    let parities: &[Option<u8>] = match pair.dim() {
        Dimension::One => &[Some(0), Some(1)],
        Dimension::Three => &[None],
    };
    for mat in [pair.a(), pair.b()] {
        for r in 0..mat.rows() {
            let mu = crate::spinspace::decode_multiindex(r, pair.dim(), n).expect("row in range");
            for c in 0..mat.cols() {
                let nu = crate::spinspace::decode_multiindex(c, pair.dim(), n).expect("col in range");
                let v = mat[(r, c)];
                let spectators_differ = (mu.sigma.code() ^ nu.sigma.code()) & !(1usize << mu.j) != 0;
                if (mu.j != nu.j || spectators_differ) && v.norm() > tol {
                    return false;
                }
            }
        }
        // Equal across spectator configurations.
        for j in 0..n {
            for &p in parities {
                for &q in parities {
                    for (s, t) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
                        let mut reference: Option<Cx<T>> = None;
                        for code in 0..1usize << n {
                            let base = SpinConfiguration::from_code(n, code).expect("code in range");
                            if base.sigma(j) != s {
                                continue;
                            }
                            let other = if s == t { base } else { base.flipped(j) };
                            let r = encode_multiindex(&MultiIndex { p, j, sigma: base }, pair.dim(), n).expect("valid");
                            let c =
                                encode_multiindex(&MultiIndex { p: q, j, sigma: other }, pair.dim(), n).expect("valid");
                            let v = mat[(r, c)];
                            match reference {
                                None => reference = Some(v),
                                Some(x) if (x - v).norm() > tol => return false,
                                Some(_) => {}
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// Convention for the 1D δ-like preset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DeltaConvention {
    /// `b₀₀ = −β`: the derivative jump `ψ'(y⁺) − ψ'(y⁻)` equals `β ψ(y)`.
    #[default]
    Stated,
    /// `b₀₀ = −2β`, so the realized jump is `2β ψ(y)`.
    PaperLiteral,
}

fn index(dim: Dimension, n: usize, p: Option<u8>, j: usize, sigma: SpinConfiguration) -> usize {
    encode_multiindex(&MultiIndex { p, j, sigma }, dim, n).expect("preset index in range")
}

fn check_table(n: usize, len: usize) -> Result<()> {
    if len != n {
        return Err(Error::LengthMismatch { expected: n, got: len });
    }
    Ok(())
}

fn check_spin_count(n: usize) -> Result<()> {
    if n == 0 || n >= usize::BITS as usize / 2 {
        return Err(Error::SpinCount { n, cap: usize::BITS as usize / 2 - 1 });
    }
    Ok(())
}

/// `A = I, B = 0`: the free Hamiltonian.
pub fn preset_free<T: Real>(dim: Dimension, n: usize) -> Result<BoundaryPair<T>> {
    check_spin_count(n)?;
    let m = index_dimension(dim, n);
    BoundaryPair::new(dim, n, CMatrix::identity(m), CMatrix::zeros(m, m))
}

/// δ-like coupling with strengths `beta[j] = [β_{j+}, β_{j−}]`.
///
/// d = 3: `A = diag(β_{jσ_j})`, `B = I`. d = 1: `A = I` and
/// `b_{0jσ,0jσ} = −β_{jσ_j}` (or `−2β` under [`DeltaConvention::PaperLiteral`]).
pub fn preset_delta<T: Real>(
    dim: Dimension,
    n: usize,
    beta: &[[T; 2]],
    convention: DeltaConvention,
) -> Result<BoundaryPair<T>> {
    check_spin_count(n)?;
    check_table(n, beta.len())?;
    if beta.iter().flatten().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter("non-finite δ strength".into()));
    }
    let m = index_dimension(dim, n);
    let strength = |j: usize, s: &SpinConfiguration| if s.sigma(j) > 0 { beta[j][0] } else { beta[j][1] };
    let mut a = CMatrix::zeros(m, m);
    let mut b = CMatrix::zeros(m, m);
    match dim {
        Dimension::Three => {
            for j in 0..n {
                for code in 0..1usize << n {
                    let s = SpinConfiguration::from_code(n, code)?;
                    let k = index(dim, n, None, j, s);
                    a[(k, k)] = real(strength(j, &s));
                    b[(k, k)] = Cx::new(T::one(), T::zero());
                }
            }
        }
        Dimension::One => {
            a = CMatrix::identity(m);
            let factor = match convention {
                DeltaConvention::Stated => T::one(),
                DeltaConvention::PaperLiteral => T::lit(2.0),
            };
            for j in 0..n {
                for code in 0..1usize << n {
                    let s = SpinConfiguration::from_code(n, code)?;
                    let k = index(dim, n, Some(0), j, s);
                    b[(k, k)] = real(-factor * strength(j, &s));
                }
            }
        }
    }
    BoundaryPair::new(dim, n, a, b)
}

/// Spin-flip coupling with `betahat[j] = [β̂_{j+}, β̂_{j−}]`.
///
/// d = 3: `a_{jσ, jσ'} = σ_j i β̂_{jσ_j}` when `σ'` is `σ` with spin `j`
/// reversed, `B = I`. d = 1: `A = I`, `b_{0jσ, 0jσ'} = −2 σ_j i β̂_{jσ_j}`.
/// Hermitian only when `β̂_{j+} = β̂_{j−}`.
pub fn preset_offdiag<T: Real>(dim: Dimension, n: usize, betahat: &[[T; 2]]) -> Result<BoundaryPair<T>> {
    check_spin_count(n)?;
    check_table(n, betahat.len())?;
    if betahat.iter().flatten().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter("non-finite off-diagonal strength".into()));
    }
    let m = index_dimension(dim, n);
    let mut a = CMatrix::zeros(m, m);
    let mut b = CMatrix::zeros(m, m);
    let (p, factor) = match dim {
        Dimension::Three => {
            b = CMatrix::identity(m);
            (None, T::one())
        }
        Dimension::One => {
            a = CMatrix::identity(m);
            (Some(0), T::lit(-2.0))
        }
    };
    for j in 0..n {
        for code in 0..1usize << n {
            let s = SpinConfiguration::from_code(n, code)?;
            let sj = s.sigma(j);
            let bh = if sj > 0 { betahat[j][0] } else { betahat[j][1] };
            let r = index(dim, n, p, j, s);
            let c = index(dim, n, p, j, s.flipped(j));
            let v = cx(T::zero(), factor * T::from_i8(sj).expect("±1") * bh);
            match dim {
                Dimension::Three => a[(r, c)] = v,
                Dimension::One => b[(r, c)] = v,
            }
        }
    }
    BoundaryPair::new(dim, n, a, b)
}

/// δ' coupling (d = 1 only): `A = I`, `b_{1jσ,1jσ} = γ_j`. The realized
/// condition is `ψ'` continuous and `ψ(y⁺) − ψ(y⁻) = γ_j ψ'(y)`.
pub fn preset_delta_prime<T: Real>(dim: Dimension, n: usize, gamma: &[T]) -> Result<BoundaryPair<T>> {
    if dim != Dimension::One {
        return Err(Error::UnsupportedDimension { what: "the δ' preset", dim: dim.value() });
    }
    check_spin_count(n)?;
    check_table(n, gamma.len())?;
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter("non-finite δ' strength".into()));
    }
    let m = index_dimension(dim, n);
    let mut b = CMatrix::zeros(m, m);
    for (j, &g) in gamma.iter().enumerate() {
        for code in 0..1usize << n {
            let s = SpinConfiguration::from_code(n, code)?;
            let k = index(dim, n, Some(1), j, s);
            b[(k, k)] = real(g);
        }
    }
    BoundaryPair::new(dim, n, CMatrix::identity(m), b)
}

/// `max |A q − B f|`.
pub fn boundary_residual<T: Real>(pair: &BoundaryPair<T>, q: &[Cx<T>], f: &[Cx<T>]) -> Result<T> {
    let m = pair.size();
    for v in [q, f] {
        if v.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: v.len() });
        }
    }
    let aq = pair.a().mul_vec(q);
    let bf = pair.b().mul_vec(f);
    Ok(aq.iter().zip(&bf).fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).norm())))
}

/// Zero vector of the pair's size, convenience for boundary data.
pub fn zero_vector<T: Real>(pair: &BoundaryPair<T>) -> Vec<Cx<T>> {
    vec![Cx::zero(); pair.size()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn opts() -> ValidationOptions<f64> {
        ValidationOptions::default()
    }

    #[test]
    fn free_and_degenerate() {
        for dim in [Dimension::One, Dimension::Three] {
            let p = preset_free::<f64>(dim, 1).unwrap();
            assert_eq!(p.size(), if dim == Dimension::One { 4 } else { 2 });
            let r = validate(&p, &opts());
            assert!(r.is_valid && r.is_local);
        }
        let z = BoundaryPair::new(Dimension::Three, 1, CMatrix::<f64>::zeros(2, 2), CMatrix::zeros(2, 2)).unwrap();
        let r = validate(&z, &opts());
        assert!(!r.is_valid);
        assert_eq!(r.rank_estimate, 0);
    }

    #[test]
    fn shape_checked() {
        let e = BoundaryPair::new(Dimension::One, 1, CMatrix::<f64>::identity(2), CMatrix::zeros(2, 2));
        assert!(matches!(e, Err(Error::MatrixShape { expected: 4, .. })));
    }

    #[test]
    fn delta_preset_d3() {
        let p = preset_delta(Dimension::Three, 1, &[[0.0, 0.0]], DeltaConvention::Stated).unwrap();
        assert_eq!(p.a().max_abs(), 0.0);
        assert_eq!(p.b(), &CMatrix::identity(2));
        let p = preset_delta(Dimension::Three, 1, &[[-1.0, 0.3]], DeltaConvention::Stated).unwrap();
        assert_eq!(p.a()[(0, 0)], C::new(-1.0, 0.0));
        assert_eq!(p.a()[(1, 1)], C::new(0.3, 0.0));
        assert!(validate(&p, &opts()).is_valid);
    }

    #[test]
    fn delta_preset_conventions_d1() {
        let s = preset_delta(Dimension::One, 1, &[[1.5, 1.5]], DeltaConvention::Stated).unwrap();
        let l = preset_delta(Dimension::One, 1, &[[1.5, 1.5]], DeltaConvention::PaperLiteral).unwrap();
        assert_eq!(s.b()[(0, 0)], C::new(-1.5, 0.0));
        assert_eq!(l.b()[(0, 0)], C::new(-3.0, 0.0));
        // A q = B f for q0 = ψ'(y⁻) − ψ'(y⁺), f0 = ψ(y): the realized jump
        // ψ'(y⁺) − ψ'(y⁻) = -q0 = -b00 ψ(y).
        assert_eq!(-s.b()[(0, 0)].re, 1.5);
        assert_eq!(-l.b()[(0, 0)].re, 3.0);
    }

    #[test]
    fn offdiag_preset() {
        let p = preset_offdiag(Dimension::Three, 1, &[[0.7, 0.7]]).unwrap();
        assert_eq!(p.a()[(0, 1)], C::new(0.0, 0.7));
        assert_eq!(p.a()[(1, 0)], C::new(0.0, -0.7));
        assert!(validate(&p, &opts()).is_valid);
        let q = preset_offdiag(Dimension::Three, 1, &[[0.7, 0.2]]).unwrap();
        let r = validate(&q, &opts());
        assert!(!r.is_valid);
        assert!((r.hermiticity_defect - 0.5).abs() < 1e-15);
        let z = preset_offdiag(Dimension::Three, 1, &[[0.0, 0.0]]).unwrap();
        assert_eq!(z.a().max_abs(), 0.0);
        let d1 = preset_offdiag(Dimension::One, 2, &[[0.4, 0.4], [-1.0, -1.0]]).unwrap();
        let r = validate(&d1, &opts());
        assert!(r.is_valid && r.is_local);
    }

    #[test]
    fn delta_prime_preset() {
        let p = preset_delta_prime(Dimension::One, 1, &[0.0]).unwrap();
        assert_eq!(p, preset_free(Dimension::One, 1).unwrap());
        let p = preset_delta_prime(Dimension::One, 2, &[-0.5, 2.0]).unwrap();
        let r = validate(&p, &opts());
        assert!(r.is_valid && r.is_local);
        assert!(matches!(
            preset_delta_prime::<f64>(Dimension::Three, 1, &[1.0]),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn random_presets_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3);
            let dim = if rng.gen_bool(0.5) { Dimension::One } else { Dimension::Three };
            let beta: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]).collect();
            let same: Vec<[f64; 2]> = beta.iter().map(|b| [b[0], b[0]]).collect();
            let gamma: Vec<f64> = beta.iter().map(|b| b[1]).collect();
            let mut pairs = vec![
                preset_delta(dim, n, &beta, DeltaConvention::Stated).unwrap(),
                preset_delta(dim, n, &beta, DeltaConvention::PaperLiteral).unwrap(),
                preset_offdiag(dim, n, &same).unwrap(),
            ];
            if dim == Dimension::One {
                pairs.push(preset_delta_prime(dim, n, &gamma).unwrap());
            }
            for p in &pairs {
                let r = validate(p, &opts());
                assert!(r.is_valid && r.is_local, "{r:?}");
                let c = rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let rs = validate(&p.scaled(C::new(c, 0.0)), &opts());
                assert_eq!(rs.is_valid, r.is_valid);
            }
        }
    }

    #[test]
    fn moving_entry_breaks_locality() {
        let p = preset_delta(Dimension::Three, 2, &[[1.0, 2.0], [3.0, 4.0]], DeltaConvention::Stated).unwrap();
        assert!(is_local(&p));
        // Move the (j=0, σ=0) diagonal entry to a j = 0, j' = 1 slot.
        let mut a = p.a().clone();
        let v = a[(0, 0)];
        a[(0, 0)] = C::new(0.0, 0.0);
        a[(0, 4)] = v;
        let moved = BoundaryPair::new(Dimension::Three, 2, a, p.b().clone()).unwrap();
        assert!(!is_local(&moved));
        // Spectator dependence: vary a site-0 entry with the state of spin 1.
        let mut a = p.a().clone();
        a[(2, 2)] = C::new(9.0, 0.0);
        let spect = BoundaryPair::new(Dimension::Three, 2, a, p.b().clone()).unwrap();
        assert!(!is_local(&spect));
    }

    #[test]
    fn residual() {
        let p = preset_free::<f64>(Dimension::Three, 1).unwrap();
        let z = zero_vector(&p);
        assert_eq!(boundary_residual(&p, &z, &z).unwrap(), 0.0);
        let q = vec![C::new(0.5, 0.0), C::new(0.0, -2.0)];
        assert_eq!(boundary_residual(&p, &q, &z).unwrap(), 2.0);
    }
}
