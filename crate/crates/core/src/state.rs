//! Particle-plus-spin states `Ψ = Σ_σ ψ_σ ⊗ χ_σ`.
//!
//! A state is either a sum of Gaussians per channel (closed form) or a set
//! of samples on a uniform 1D grid.

use crate::error::{Error, Result};
use crate::scalar::{cx, imag_unit, Cx, Real};
use crate::space::{Dimension, Point};
use num_traits::Zero;

/// `w · exp(−|x − c|² / (4A) + i k·(x − c))` with complex `A`, `Re(1/A) > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianTerm<T> {
    pub center: Point<T>,
    pub momentum: [T; 3],
    /// Complex width parameter `A`; real and positive for a fresh packet.
    pub width: Cx<T>,
    pub weight: Cx<T>,
}

impl<T: Real> GaussianTerm<T> {
    /// Real width `a > 0`, so `|ψ|² ∝ exp(−|x − c|²/(2a))`.
    pub fn new(center: Point<T>, momentum: [T; 3], width: T, weight: Cx<T>) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!("Gaussian width {width} must be positive")));
        }
        Ok(GaussianTerm { center, momentum, width: cx(width, T::zero()), weight })
    }

    /// Coefficients of `exp(−P|x|² + Q·x + R)`.
    fn quadratic(&self) -> (Cx<T>, [Cx<T>; 3], Cx<T>) {
        let i = imag_unit::<T>();
        let four_a = self.width * T::lit(4.0);
        let p = four_a.inv();
        let c = self.center.coords();
        let k = self.momentum;
        let q = [0, 1, 2].map(|d| p * (c[d] + c[d]) + i * k[d]);
        let c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
        let kc = k[0] * c[0] + k[1] * c[1] + k[2] * c[2];
        (p, q, -p * c2 - i * kc + self.weight.ln())
    }

    pub fn eval(&self, x: Point<T>) -> Cx<T> {
        let d = [0, 1, 2].map(|k| x.0[k] - self.center.0[k]);
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let kd = self.momentum[0] * d[0] + self.momentum[1] * d[1] + self.momentum[2] * d[2];
        self.weight * (-(cx(r2, T::zero()) / (self.width * T::lit(4.0))) + imag_unit::<T>() * kd).exp()
    }

    /// Radius beyond which `|ψ| ≤ 1e-17 |w|` (relative to the peak).
    pub fn support_radius(&self) -> T {
        let re = (self.width * T::lit(4.0)).inv().re;
        (T::lit(39.0) / re).sqrt()
    }
}

/// `⟨g₁, g₂⟩ = ∫ conj(g₁) g₂ dx` in dimension `d`.
pub fn gaussian_overlap<T: Real>(dim: Dimension, g1: &GaussianTerm<T>, g2: &GaussianTerm<T>) -> Cx<T> {
    if g1.weight.is_zero() || g2.weight.is_zero() {
        return Cx::zero();
    }
    let (p1, q1, r1) = g1.quadratic();
    let (p2, q2, r2) = g2.quadratic();
    let p = p1.conj() + p2;
    let nd = match dim {
        Dimension::One => 1,
        Dimension::Three => 3,
    };
    let mut qq = Cx::<T>::zero();
    for d in 0..nd {
        let q = q1[d].conj() + q2[d];
        qq = qq + q * q;
    }
    let base = (cx(T::PI(), T::zero()) / p).sqrt();
    let pref = match dim {
        Dimension::One => base,
        Dimension::Three => base * base * base,
    };
    pref * (qq / (p * T::lit(4.0)) + r1.conj() + r2).exp()
}

/// Gaussian sums per spin channel, indexed by configuration code.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPacket<T> {
    pub dim: Dimension,
    pub channels: Vec<Vec<GaussianTerm<T>>>,
}

impl<T: Real> GaussianPacket<T> {
    pub fn new(dim: Dimension, channels: Vec<Vec<GaussianTerm<T>>>) -> Result<Self> {
        if channels.is_empty() || !channels.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!("{} channels is not 2^N", channels.len())));
        }
        Ok(GaussianPacket { dim, channels })
    }

    /// One Gaussian in channel `sigma`, zero elsewhere.
    pub fn single(dim: Dimension, channel_count: usize, sigma: usize, term: GaussianTerm<T>) -> Result<Self> {
        let mut channels = vec![Vec::new(); channel_count];
        if sigma >= channel_count {
            return Err(Error::IndexOutOfRange(format!("channel {sigma} of {channel_count}")));
        }
        channels[sigma].push(term);
        Self::new(dim, channels)
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn eval(&self, x: Point<T>, sigma: usize) -> Cx<T> {
        self.channels[sigma].iter().fold(Cx::zero(), |acc, g| acc + g.eval(x))
    }

    pub fn channel_norm_sqr(&self, sigma: usize) -> T {
        let terms = &self.channels[sigma];
        let mut acc = Cx::<T>::zero();
        for a in terms {
            for b in terms {
                acc = acc + gaussian_overlap(self.dim, a, b);
            }
        }
        acc.re.max(T::zero())
    }

    pub fn norm(&self) -> T {
        (0..self.channel_count()).map(|s| self.channel_norm_sqr(s)).sum::<T>().sqrt()
    }

    /// Support interval (1D) of channel `sigma`, `None` when empty.
    pub fn support_1d(&self, sigma: usize) -> Option<(T, T)> {
        self.channels[sigma].iter().filter(|g| !g.weight.is_zero()).fold(None, |acc, g| {
            let (c, r) = (g.center.x(), g.support_radius());
            Some(match acc {
                None => (c - r, c + r),
                Some((lo, hi)) => (lo.min(c - r), hi.max(c + r)),
            })
        })
    }
}

/// Uniform 1D grid `x_k = start + k·step`, `k < len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1<T> {
    pub start: T,
    pub step: T,
    pub len: usize,
}

impl<T: Real> Grid1<T> {
    pub fn new(start: T, step: T, len: usize) -> Result<Self> {
        if !(step > T::zero()) || len < 2 || !start.is_finite() {
            return Err(Error::InvalidParameter("grid needs a positive step and at least two points".into()));
        }
        Ok(Grid1 { start, step, len })
    }

    /// `len` points spanning `[lo, hi]`.
    pub fn spanning(lo: T, hi: T, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidParameter("grid needs at least two points".into()));
        }
        Self::new(lo, (hi - lo) / T::from_usize_lossy(len - 1), len)
    }

    pub fn point(&self, k: usize) -> T {
        self.start + self.step * T::from_usize_lossy(k)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.len).map(|k| self.point(k)).collect()
    }

    pub fn end(&self) -> T {
        self.point(self.len - 1)
    }
}

/// Samples per channel on a common 1D grid; linear in between, zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledState<T> {
    pub grid: Grid1<T>,
    pub channels: Vec<Vec<Cx<T>>>,
}

impl<T: Real> SampledState<T> {
    pub fn new(grid: Grid1<T>, channels: Vec<Vec<Cx<T>>>) -> Result<Self> {
        if channels.is_empty() || !channels.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!("{} channels is not 2^N", channels.len())));
        }
        for c in &channels {
            if c.len() != grid.len {
                return Err(Error::LengthMismatch { expected: grid.len, got: c.len() });
            }
        }
        Ok(SampledState { grid, channels })
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn eval(&self, x: T, sigma: usize) -> Cx<T> {
        let g = &self.grid;
        let u = (x - g.start) / g.step;
        if u < T::zero() || u > T::from_usize_lossy(g.len - 1) {
            return Cx::zero();
        }
        let k = u.floor().to_usize().unwrap_or(0).min(g.len - 2);
        let t = u - T::from_usize_lossy(k);
        let v = &self.channels[sigma];
        v[k] * (T::one() - t) + v[k + 1] * t
    }

    /// Trapezoid `∫ |ψ_σ|²`.
    pub fn channel_weight(&self, sigma: usize) -> T {
        let v = &self.channels[sigma];
        let half = T::lit(0.5);
        let inner: T = v.iter().map(|z| z.norm_sqr()).sum();
        (inner - half * (v[0].norm_sqr() + v[v.len() - 1].norm_sqr())) * self.grid.step
    }

    pub fn norm(&self) -> T {
        (0..self.channel_count()).map(|s| self.channel_weight(s)).sum::<T>().sqrt()
    }

    /// `max_{σ,k} |ψ_σ(x_k) − φ_σ(x_k)|`.
    pub fn max_difference(&self, other: &SampledState<T>) -> Result<T> {
        if self.grid != other.grid || self.channel_count() != other.channel_count() {
            return Err(Error::InvalidParameter("states live on different grids".into()));
        }
        Ok(self
            .channels
            .iter()
            .zip(&other.channels)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x - *y).norm()))
            .fold(T::zero(), T::max))
    }

    /// `‖ψ − φ‖` by the trapezoid rule.
    pub fn distance(&self, other: &SampledState<T>) -> Result<T> {
        let diff = SampledState {
            grid: self.grid,
            channels: self
                .channels
                .iter()
                .zip(&other.channels)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x - *y).collect())
                .collect(),
        };
        if self.grid != other.grid || self.channel_count() != other.channel_count() {
            return Err(Error::InvalidParameter("states live on different grids".into()));
        }
        Ok(diff.norm())
    }
}

/// Input state for the resolvent and dynamics.
#[derive(Clone, Debug, PartialEq)]
pub enum SpinState<T> {
    Gaussian(GaussianPacket<T>),
    Sampled(SampledState<T>),
}

impl<T: Real> SpinState<T> {
    pub fn channel_count(&self) -> usize {
        match self {
            SpinState::Gaussian(g) => g.channel_count(),
            SpinState::Sampled(s) => s.channel_count(),
        }
    }

    pub fn eval(&self, x: Point<T>, sigma: usize) -> Cx<T> {
        match self {
            SpinState::Gaussian(g) => g.eval(x, sigma),
            SpinState::Sampled(s) => s.eval(x.x(), sigma),
        }
    }

    pub fn norm(&self) -> T {
        match self {
            SpinState::Gaussian(g) => g.norm(),
            SpinState::Sampled(s) => s.norm(),
        }
    }

    /// Samples a state on a grid (1D).
    pub fn sample(&self, grid: &Grid1<T>) -> SampledState<T> {
        let xs = grid.points();
        SampledState {
            grid: *grid,
            channels: (0..self.channel_count())
                .map(|s| xs.iter().map(|&x| self.eval(Point::line(x), s)).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadOptions};
    use num_complex::Complex64 as C;

    #[test]
    fn overlap_matches_quadrature_1d() {
        let a = GaussianTerm::new(Point::line(0.3), [1.5, 0.0, 0.0], 0.4, C::new(0.7, -0.2)).unwrap();
        let mut b = GaussianTerm::new(Point::line(-0.5), [-0.8, 0.0, 0.0], 1.1, C::new(-0.3, 1.0)).unwrap();
        b.width = C::new(1.1, 0.6);
        let q = integrate(
            |x: f64| a.eval(Point::line(x)).conj() * b.eval(Point::line(x)),
            -30.0,
            30.0,
            &QuadOptions::default(),
        );
        let closed = gaussian_overlap(Dimension::One, &a, &b);
        assert!((q.value - closed).norm() < 1e-10, "{} vs {}", q.value, closed);
    }

    #[test]
    fn norm_3d_closed_form() {
        // ∫ exp(−r²/(2a)) d³x = (2πa)^{3/2}
        let g = GaussianTerm::new(Point::space(1.0, 2.0, 3.0), [0.5, -1.0, 2.0], 0.7, C::new(1.0, 0.0)).unwrap();
        let n2 = gaussian_overlap(Dimension::Three, &g, &g);
        assert!((n2.re - (2.0 * std::f64::consts::PI * 0.7f64).powf(1.5)).abs() < 1e-12);
        assert!(n2.im.abs() < 1e-12);
    }

    #[test]
    fn sampled_interpolation_and_weight() {
        let grid = Grid1::spanning(-1.0, 1.0, 3).unwrap();
        let s = SampledState::new(
            grid,
            vec![vec![C::new(0.0, 0.0), C::new(2.0, 0.0), C::new(0.0, 0.0)], vec![C::new(0.0, 0.0); 3]],
        )
        .unwrap();
        assert_eq!(s.eval(-0.5, 0), C::new(1.0, 0.0));
        assert_eq!(s.eval(1.5, 0), C::new(0.0, 0.0));
        assert_eq!(s.channel_weight(0), 4.0);
        assert!(SampledState::new(grid, vec![vec![C::new(0.0, 0.0); 2]]).is_err());
    }
}
