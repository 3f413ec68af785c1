//! Spin configurations, Zeeman shifts and the flat multi-index order.
//!
//! A configuration `σ = (σ_1, …, σ_N)` is stored by its bit code
//! `code(σ) = Σ_j ((1 - σ_j)/2) 2^j` with 0-based `j`, so `σ_j = +1` is bit 0.
//! The flat index of `μ = (p, j, σ)` is `p·N·2^N + j·2^N + code(σ)`; the
//! parity term is absent in three dimensions.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::space::{Dimension, Point};

/// Default upper bound on the number of spins.
pub const DEFAULT_MAX_SPINS: usize = 6;

/// One of the `2^N` spin configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration {
    n: usize,
    code: usize,
}

impl SpinConfiguration {
    pub fn from_code(n: usize, code: usize) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(Error::SpinCount { n, cap: usize::BITS as usize - 1 });
        }
        if code >> n != 0 {
            return Err(Error::IndexOutOfRange(format!("configuration code {code} for N = {n}")));
        }
        Ok(SpinConfiguration { n, code })
    }

    /// Builds a configuration from entries `±1`.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let mut code = 0;
        for (j, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => code |= 1 << j,
                other => return Err(Error::InvalidParameter(format!("spin entry {other} is not ±1"))),
            }
        }
        Self::from_code(signs.len(), code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn code(&self) -> usize {
        self.code
    }

    /// `σ_j ∈ {+1, -1}`, 0-based `j`.
    pub fn sigma(&self, j: usize) -> i8 {
        if (self.code >> j) & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.n).map(|j| self.sigma(j)).collect()
    }

    /// The configuration with spin `j` reversed.
    pub fn flipped(&self, j: usize) -> Self {
        SpinConfiguration { n: self.n, code: self.code ^ (1 << j) }
    }
}

/// All `2^N` configurations in code order, for `1 ≤ N ≤ DEFAULT_MAX_SPINS`.
pub fn enumerate_configs(n: usize) -> Result<Vec<SpinConfiguration>> {
    enumerate_configs_capped(n, DEFAULT_MAX_SPINS)
}

pub fn enumerate_configs_capped(n: usize, cap: usize) -> Result<Vec<SpinConfiguration>> {
    if n == 0 || n > cap {
        return Err(Error::SpinCount { n, cap });
    }
    (0..1usize << n).map(|code| SpinConfiguration::from_code(n, code)).collect()
}

/// `α·σ = Σ_j α_j σ_j`.
pub fn zeeman_shift<T: Real>(alpha: &[T], sigma: &SpinConfiguration) -> Result<T> {
    if alpha.len() != sigma.n() {
        return Err(Error::LengthMismatch { expected: sigma.n(), got: alpha.len() });
    }
    Ok(alpha
        .iter()
        .enumerate()
        .map(|(j, &a)| if sigma.sigma(j) > 0 { a } else { -a })
        .fold(T::zero(), |acc, v| acc + v))
}

/// Size `m` of the boundary matrices: `N·2^{N+1}` for d = 1, `N·2^N` for d = 3.
pub fn index_dimension(dim: Dimension, n: usize) -> usize {
    let base = n << n;
    match dim {
        Dimension::One => 2 * base,
        Dimension::Three => base,
    }
}

/// `μ = (p, j, σ)`. `p` is present exactly in one dimension; `j` is 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub p: Option<u8>,
    pub j: usize,
    pub sigma: SpinConfiguration,
}

impl MultiIndex {
    /// Parity, reading an absent parity as 0.
    pub fn parity(&self) -> u8 {
        self.p.unwrap_or(0)
    }
}

pub fn encode_multiindex(mu: &MultiIndex, dim: Dimension, n: usize) -> Result<usize> {
    if mu.sigma.n() != n {
        return Err(Error::IndexOutOfRange(format!("configuration has {} spins, model has {n}", mu.sigma.n())));
    }
    if mu.j >= n {
        return Err(Error::IndexOutOfRange(format!("site {} for N = {n}", mu.j)));
    }
    let block = n << n;
    let p = match (dim, mu.p) {
        (Dimension::One, Some(p @ (0 | 1))) => p as usize,
        (Dimension::Three, None) => 0,
        (Dimension::One, Some(p)) => return Err(Error::IndexOutOfRange(format!("parity {p}"))),
        (Dimension::One, None) => return Err(Error::IndexOutOfRange("parity missing in d = 1".into())),
        (Dimension::Three, Some(_)) => return Err(Error::IndexOutOfRange("parity given in d = 3".into())),
    };
    Ok(p * block + (mu.j << n) + mu.sigma.code())
}

pub fn decode_multiindex(flat: usize, dim: Dimension, n: usize) -> Result<MultiIndex> {
    let m = index_dimension(dim, n);
    if flat >= m {
        return Err(Error::IndexOutOfRange(format!("flat index {flat} >= {m}")));
    }
    let block = n << n;
    let p = match dim {
        Dimension::One => Some((flat / block) as u8),
        Dimension::Three => None,
    };
    let rest = flat % block;
    Ok(MultiIndex { p, j: rest >> n, sigma: SpinConfiguration::from_code(n, rest & ((1 << n) - 1))? })
}

/// Particle dimension, spin positions and Zeeman couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec<T> {
    dim: Dimension,
    positions: Vec<Point<T>>,
    alpha: Vec<T>,
    shifts: Vec<T>,
}

impl<T: Real> ModelSpec<T> {
    /// Checks `1 ≤ N ≤ cap`, matching lengths, finite and pairwise distinct
    /// positions.
    pub fn new(dim: Dimension, positions: Vec<Point<T>>, alpha: Vec<T>, cap: usize) -> Result<Self> {
        let n = positions.len();
        if n == 0 || n > cap {
            return Err(Error::SpinCount { n, cap });
        }
        if cap > DEFAULT_MAX_SPINS && n > DEFAULT_MAX_SPINS {
            log::warn!(
                "N = {n} exceeds the default cap {DEFAULT_MAX_SPINS}; dense algebra of size {}",
                index_dimension(dim, n)
            );
        }
        if alpha.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: alpha.len() });
        }
        let positions: Vec<Point<T>> = match dim {
            Dimension::One => positions.into_iter().map(|p| Point::line(p.x())).collect(),
            Dimension::Three => positions,
        };
        if positions.iter().any(|p| p.coords().iter().any(|c| !c.is_finite())) || alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("non-finite position or coupling".into()));
        }
        for a in 0..n {
            for b in a + 1..n {
                if positions[a].distance(&positions[b]) == T::zero() {
                    return Err(Error::CoincidentSites(a, b));
                }
            }
        }
        let shifts = (0..1usize << n)
            .map(|code| zeeman_shift(&alpha, &SpinConfiguration { n, code }))
            .collect::<Result<Vec<T>>>()?;
        Ok(ModelSpec { dim, positions, alpha, shifts })
    }

    /// One-dimensional model with the default cap.
    pub fn line(positions: &[T], alpha: &[T]) -> Result<Self> {
        Self::new(
            Dimension::One,
            positions.iter().map(|&x| Point::line(x)).collect(),
            alpha.to_vec(),
            DEFAULT_MAX_SPINS,
        )
    }

    /// Three-dimensional model with the default cap.
    pub fn space(positions: &[[T; 3]], alpha: &[T]) -> Result<Self> {
        Self::new(Dimension::Three, positions.iter().map(|&p| Point(p)).collect(), alpha.to_vec(), DEFAULT_MAX_SPINS)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Point<T>] {
        &self.positions
    }

    pub fn position(&self, j: usize) -> Point<T> {
        self.positions[j]
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    /// Number of spin configurations, `2^N`.
    pub fn config_count(&self) -> usize {
        1 << self.n()
    }

    pub fn configs(&self) -> Vec<SpinConfiguration> {
        (0..self.config_count()).map(|code| SpinConfiguration { n: self.n(), code }).collect()
    }

    pub fn config(&self, code: usize) -> SpinConfiguration {
        SpinConfiguration { n: self.n(), code }
    }

    /// `α·σ` for the configuration with the given code.
    pub fn shift(&self, code: usize) -> T {
        self.shifts[code]
    }

    pub fn index_dimension(&self) -> usize {
        index_dimension(self.dim, self.n())
    }

    pub fn decode(&self, flat: usize) -> MultiIndex {
        decode_multiindex(flat, self.dim, self.n()).expect("flat index in range")
    }

    pub fn encode(&self, mu: &MultiIndex) -> Result<usize> {
        encode_multiindex(mu, self.dim, self.n())
    }

    /// Smallest distance between two spin sites, `∞` for a single site.
    pub fn min_separation(&self) -> T {
        let mut best = T::infinity();
        for a in 0..self.n() {
            for b in a + 1..self.n() {
                best = best.min(self.positions[a].distance(&self.positions[b]));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration() {
        let c1 = enumerate_configs(1).unwrap();
        assert_eq!(c1.iter().map(|c| c.signs()).collect::<Vec<_>>(), vec![vec![1], vec![-1]]);
        let c2 = enumerate_configs(2).unwrap();
        assert_eq!(c2.len(), 4);
        assert_eq!(c2[1].signs(), vec![-1, 1]);
        assert_eq!(c2[2].signs(), vec![1, -1]);
        assert_eq!(enumerate_configs(6).unwrap().len(), 64);
        assert!(matches!(enumerate_configs(0), Err(Error::SpinCount { .. })));
        assert!(matches!(enumerate_configs(7), Err(Error::SpinCount { .. })));
        assert_eq!(enumerate_configs_capped(7, 8).unwrap().len(), 128);
    }

    #[test]
    fn zeeman() {
        let s = SpinConfiguration::from_signs(&[1, -1]).unwrap();
        assert_eq!(zeeman_shift(&[1.0, 2.0], &s).unwrap(), -1.0);
        for c in enumerate_configs(3).unwrap() {
            assert_eq!(zeeman_shift(&[0.0; 3], &c).unwrap(), 0.0);
        }
        let s = SpinConfiguration::from_signs(&[-1]).unwrap();
        assert_eq!(zeeman_shift(&[0.5], &s).unwrap(), -0.5);
        assert!(matches!(zeeman_shift(&[0.5, 1.0], &s), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn index_dimensions() {
        assert_eq!(index_dimension(Dimension::Three, 1), 2);
        assert_eq!(index_dimension(Dimension::One, 1), 4);
        assert_eq!(index_dimension(Dimension::Three, 3), 24);
        assert_eq!(index_dimension(Dimension::One, 6), 768);
    }

    #[test]
    fn encode_examples() {
        let plus = SpinConfiguration::from_signs(&[1]).unwrap();
        let minus = SpinConfiguration::from_signs(&[-1]).unwrap();
        let d3 = Dimension::Three;
        assert_eq!(encode_multiindex(&MultiIndex { p: None, j: 0, sigma: plus }, d3, 1).unwrap(), 0);
        assert_eq!(encode_multiindex(&MultiIndex { p: None, j: 0, sigma: minus }, d3, 1).unwrap(), 1);
        assert_eq!(encode_multiindex(&MultiIndex { p: Some(1), j: 0, sigma: plus }, Dimension::One, 1).unwrap(), 2);
        assert!(encode_multiindex(&MultiIndex { p: Some(2), j: 0, sigma: plus }, Dimension::One, 1).is_err());
        assert!(encode_multiindex(&MultiIndex { p: None, j: 1, sigma: plus }, d3, 1).is_err());
        assert!(decode_multiindex(2, d3, 1).is_err());
    }

    #[test]
    fn encode_decode_exhaustive() {
        for dim in [Dimension::One, Dimension::Three] {
            for n in 1..=6 {
                let m = index_dimension(dim, n);
                let mut seen = vec![false; m];
                let parities: &[Option<u8>] = match dim {
                    Dimension::One => &[Some(0), Some(1)],
                    Dimension::Three => &[None],
                };
                let mut count = 0;
                for &p in parities {
                    for j in 0..n {
                        for sigma in enumerate_configs(n).unwrap() {
                            let mu = MultiIndex { p, j, sigma };
                            let f = encode_multiindex(&mu, dim, n).unwrap();
                            assert!(!seen[f]);
                            seen[f] = true;
                            assert_eq!(decode_multiindex(f, dim, n).unwrap(), mu);
                            count += 1;
                        }
                    }
                }
                assert_eq!(count, m);
            }
        }
    }

    #[test]
    fn model_checks() {
        assert!(matches!(ModelSpec::line(&[0.0, 0.0], &[0.0, 0.0]), Err(Error::CoincidentSites(0, 1))));
        assert!(matches!(ModelSpec::<f64>::line(&[], &[]), Err(Error::SpinCount { .. })));
        assert!(matches!(ModelSpec::line(&[0.0], &[0.0, 1.0]), Err(Error::LengthMismatch { .. })));
        let m = ModelSpec::space(&[[0.0; 3], [1.0, 0.0, 0.0]], &[1.0, 2.0]).unwrap();
        assert_eq!(m.index_dimension(), 8);
        assert_eq!(m.shift(0), 3.0);
        assert_eq!(m.shift(3), -3.0);
        let min = (0..4).map(|c| m.shift(c)).fold(f64::INFINITY, f64::min);
        assert_eq!(min, -3.0);
    }
}
