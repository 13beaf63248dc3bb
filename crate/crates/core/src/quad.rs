//! Global adaptive Gauss–Kronrod (G10/K21) quadrature over a set of panels.
//!
//! The integrand may be real or complex. Panels are bisected in order of
//! decreasing error estimate until the total error meets the tolerance, the
//! remaining error is at the rounding floor, or the subdivision budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

/// Values the integrator can accumulate.
pub trait Scalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign
{
    fn modulus(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

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

/// Result of one 21-point Kronrod rule on `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct Panel<T> {
    pub a: f64,
    pub b: f64,
    pub value: T,
    pub error: f64,
    /// True when the error estimate sits at the rounding floor.
    pub roundoff: bool,
}

/// Applies the G10/K21 pair on `[a, b]` with QUADPACK-style error scaling.
pub fn gk21<T: Scalar, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Panel<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::default();
    let mut resabs = fc.modulus() * WGK[10];
    let mut fv1 = [T::default(); 10];
    let mut fv2 = [T::default(); 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        kronrod += sum * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
        resabs += WGK[j] * (f1.modulus() + f2.modulus());
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[10] * (fc - mean).modulus();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).modulus() + (fv2[j] - mean).modulus());
    }
    let scale = half.abs();
    let value = kronrod * half;
    resabs *= scale;
    resasc *= scale;
    let mut error = ((kronrod - gauss) * half).modulus();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    let mut roundoff = false;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor >= error {
        error = floor;
        roundoff = true;
    }
    Panel {
        a,
        b,
        value,
        error,
        roundoff,
    }
}

/// Convergence controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_subdivisions: usize) -> Self {
        Self {
            rel,
            abs,
            max_subdivisions,
        }
    }
}

/// Integral estimate with its error bound and cost.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Ranked<T>(Panel<T>);

impl<T> PartialEq for Ranked<T> {
    fn eq(&self, other: &Self) -> bool {
        self.0.error == other.0.error
    }
}
impl<T> Eq for Ranked<T> {}
impl<T> PartialOrd for Ranked<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Ranked<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.error.total_cmp(&other.0.error)
    }
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (which must be increasing).
///
/// On budget exhaustion the partial estimate is returned in `Err`.
pub fn integrate<T: Scalar, F: FnMut(f64) -> T>(
    mut f: F,
    points: &[f64],
    tol: &Tolerance,
) -> Result<Quadrature<T>, Quadrature<T>> {
    let mut heap = BinaryHeap::new();
    let mut settled_value = T::default();
    let mut settled_error = 0.0;
    let mut total = T::default();
    let mut total_error = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let p = gk21(&mut f, w[0], w[1]);
        evaluations += 21;
        total += p.value;
        total_error += p.error;
        if p.roundoff {
            settled_value += p.value;
            settled_error += p.error;
        } else {
            heap.push(Ranked(p));
        }
    }
    let mut subdivisions = 0;
    loop {
        let target = tol.abs.max(tol.rel * total.modulus());
        if total_error <= target {
            break;
        }
        let Some(Ranked(worst)) = heap.pop() else {
            // Everything left is at the rounding floor.
            break;
        };
        if subdivisions >= tol.max_subdivisions {
            heap.push(Ranked(worst));
            let (value, error) = resum(&heap, settled_value, settled_error);
            return Err(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            settled_value += worst.value;
            settled_error += worst.error;
            continue;
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        total = total - worst.value + left.value + right.value;
        total_error += left.error + right.error - worst.error;
        for p in [left, right] {
            if p.roundoff {
                settled_value += p.value;
                settled_error += p.error;
            } else {
                heap.push(Ranked(p));
            }
        }
    }
    let (value, error) = resum(&heap, settled_value, settled_error);
    Ok(Quadrature {
        value,
        error,
        evaluations,
    })
}

fn resum<T: Scalar>(heap: &BinaryHeap<Ranked<T>>, value: T, error: f64) -> (T, f64) {
    let mut v = value;
    let mut e = error;
    for Ranked(p) in heap.iter() {
        v += p.value;
        e += p.error;
    }
    (v, e)
}

/// `n_per_octave` geometric breakpoints per factor of two from `lo` to `hi`.
pub fn geometric_points(lo: f64, hi: f64, n_per_octave: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo);
    let octaves = (hi / lo).log2();
    let n = ((octaves * n_per_octave as f64).ceil() as usize).max(1);
    let ratio = (hi / lo).powf(1.0 / n as f64);
    let mut pts = Vec::with_capacity(n + 1);
    let mut x = lo;
    for _ in 0..n {
        pts.push(x);
        x *= ratio;
    }
    pts.push(hi);
    pts
}
