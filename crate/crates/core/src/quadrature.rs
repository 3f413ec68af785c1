//! Adaptive 10/21-point Gauss–Kronrod quadrature for complex integrands on
//! finite intervals, with optional breakpoints.

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use num_traits::Zero;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        QuadOptions {
            abs_tol: T::lit(1e-8),
            rel_tol: T::lit(1e-10).max(T::epsilon() * T::lit(50.0)),
            max_subdivisions: 2000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_abs_tol(mut self, tol: T) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_rel_tol(mut self, tol: T) -> Self {
        self.rel_tol = tol;
        self
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadEstimate<T> {
    pub value: Cx<T>,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Real> QuadEstimate<T> {
    /// Turns a non-converged estimate into [`Error::Quadrature`].
    pub fn into_result(self, opts: &QuadOptions<T>) -> Result<Cx<T>> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature {
                achieved: self.error.as_f64(),
                requested: opts.abs_tol.max(opts.rel_tol * self.value.norm()).as_f64(),
            })
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Segment<T> {
    a: T,
    b: T,
    value: Cx<T>,
    error: T,
}

/// One 21-point Kronrod panel with QUADPACK-style error scaling. Returns
/// `(integral, error)`.
pub fn gk21<T: Real, F: FnMut(T) -> Cx<T>>(f: &mut F, a: T, b: T) -> (Cx<T>, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let hl = half * (b - a);
    let ahl = hl.abs();
    let fc = f(center);
    let mut res_g = Cx::zero();
    let mut res_k = fc * T::lit(WGK[10]);
    let mut res_abs = fc.norm() * T::lit(WGK[10]);
    let mut fv1 = [Cx::zero(); 10];
    let mut fv2 = [Cx::zero(); 10];
    for j in 0..10 {
        let dx = hl * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k = res_k + (f1 + f2) * w;
        res_abs = res_abs + (f1.norm() + f2.norm()) * w;
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * T::lit(WG[j / 2]);
        }
    }
    let mean = res_k * half;
    let mut res_asc = (fc - mean).norm() * T::lit(WGK[10]);
    for j in 0..10 {
        res_asc = res_asc + ((fv1[j] - mean).norm() + (fv2[j] - mean).norm()) * T::lit(WGK[j]);
    }
    let result = res_k * hl;
    res_abs = res_abs * ahl;
    res_asc = res_asc * ahl;
    let mut err = ((res_k - res_g) * hl).norm();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = res_asc * scale.min(T::one());
    }
    let fifty_eps = T::lit(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / fifty_eps {
        err = err.max(fifty_eps * res_abs);
    }
    (result, err)
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<T: Real, F: FnMut(T) -> Cx<T>>(f: F, a: T, b: T, opts: &QuadOptions<T>) -> QuadEstimate<T> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Adaptive integration over `[points[0], points[last]]`, with every
/// interior point treated as a breakpoint. Points must be nondecreasing;
/// empty intervals are skipped.
pub fn integrate_with_breaks<T: Real, F: FnMut(T) -> Cx<T>>(
    mut f: F,
    points: &[T],
    opts: &QuadOptions<T>,
) -> QuadEstimate<T> {
    let mut segs: Vec<Segment<T>> = Vec::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk21(&mut f, w[0], w[1]);
            evaluations += 21;
            segs.push(Segment { a: w[0], b: w[1], value, error });
        }
    }
    let total =
        |segs: &[Segment<T>]| segs.iter().fold((Cx::<T>::zero(), T::zero()), |(v, e), s| (v + s.value, e + s.error));
    let budget = opts.max_subdivisions.max(segs.len());
    loop {
        let (value, error) = total(&segs);
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= target || segs.is_empty() {
            return QuadEstimate { value, error, evaluations, converged: true };
        }
        if segs.len() >= budget {
            return QuadEstimate { value, error, evaluations, converged: false };
        }
        let worst = segs
            .iter()
            .enumerate()
            .fold((0, -T::one()), |best, (i, s)| if s.error > best.1 { (i, s.error) } else { best })
            .0;
        let s = segs[worst];
        let mid = T::lit(0.5) * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            // Interval exhausted at machine resolution.
            return QuadEstimate { value, error, evaluations, converged: false };
        }
        let (v1, e1) = gk21(&mut f, s.a, mid);
        let (v2, e2) = gk21(&mut f, mid, s.b);
        evaluations += 42;
        segs[worst] = Segment { a: s.a, b: mid, value: v1, error: e1 };
        segs.push(Segment { a: mid, b: s.b, value: v2, error: e2 });
    }
}
