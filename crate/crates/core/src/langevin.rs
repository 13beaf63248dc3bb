//! Fractional Langevin dynamics of the critical mode,
//! `(v d_t^s + r) x + (g/N) x^3 = xi`, and ensemble estimators.
//!
//! The fractional derivative is the Grünwald–Letnikov sum over the full
//! history with zero history before `t = 0`. The memory sum is evaluated
//! exactly by an online divide-and-conquer FFT convolution, so a trajectory
//! of `n` steps costs `O(n log^2 n)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exponents::{self, PowerLawFit};
use crate::greens::{LowFreqCoeffs, ModelParams};
use crate::quad::{self, Tolerance};

/// Trajectories are aborted once `|x|` exceeds this.
pub const OVERFLOW_GUARD: f64 = 1e8;
/// Steps handled by direct summation at the bottom of the recursion.
const BASE_BLOCK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// `<xi(t) xi(t')> = 2 kappa_eff delta(t - t')`.
    White,
    /// Gaussian noise with spectrum `4 v_I T_b omega_z^-s |w|^(s-1)`.
    Colored { t_b: f64, v_i: f64, omega_z: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub s: f64,
    /// Amplitude of `v (-i w)^s`.
    pub v: f64,
    pub r: f64,
    pub kappa_eff: f64,
    /// Quartic coupling, `g_ph` or `g_at`.
    pub g: f64,
    /// Number of atoms; `f64::INFINITY` drops the cubic term.
    pub n_atoms: f64,
    pub dt: f64,
    pub steps: usize,
    pub burn_in: usize,
    pub ensemble: usize,
    pub seed: u64,
    pub noise: NoiseKind,
    pub x0: f64,
}

impl SimConfig {
    /// White-noise configuration from the low-frequency coefficients, with
    /// `dt = 0.01/omega_z` and a burn-in of 20% of `steps`.
    pub fn from_coefficients(p: &ModelParams, co: &LowFreqCoeffs, steps: usize, ensemble: usize, seed: u64) -> Self {
        Self {
            s: p.bath.s,
            v: co.v,
            r: co.r,
            kappa_eff: co.kappa_eff,
            g: co.g_ph,
            n_atoms: p.n_atoms.unwrap_or(f64::INFINITY),
            dt: 0.01 / p.omega_z,
            steps,
            burn_in: steps / 5,
            ensemble,
            seed,
            noise: NoiseKind::White,
            x0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::invalid(format!("s = {} must lie in (0, 1)", self.s)));
        }
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(Error::invalid(format!("v = {} must be positive", self.v)));
        }
        if !(self.r.is_finite() && self.kappa_eff >= 0.0 && self.g >= 0.0) {
            return Err(Error::invalid("need finite r, kappa_eff >= 0 and g >= 0"));
        }
        if !(self.n_atoms > 0.0) {
            return Err(Error::invalid(format!("N = {} must be positive", self.n_atoms)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt = {} must be positive", self.dt)));
        }
        if self.steps <= self.burn_in {
            return Err(Error::invalid(format!(
                "steps = {} must exceed burn_in = {}",
                self.steps, self.burn_in
            )));
        }
        if self.ensemble == 0 {
            return Err(Error::invalid("ensemble must contain at least one trajectory"));
        }
        if let NoiseKind::Colored { t_b, v_i, omega_z } = self.noise {
            if !(t_b > 0.0 && v_i >= 0.0 && omega_z > 0.0) {
                return Err(Error::invalid("colored noise needs T_b > 0, v_I >= 0 and omega_z > 0"));
            }
        }
        if !self.x0.is_finite() {
            return Err(Error::invalid("x0 must be finite"));
        }
        Ok(())
    }

    fn cubic(&self) -> f64 {
        if self.n_atoms.is_infinite() {
            0.0
        } else {
            self.g / self.n_atoms
        }
    }
}

/// Post-burn-in samples of one ensemble member.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<f64>,
    pub dt: f64,
    pub seed: u64,
    pub member: usize,
    pub config: SimConfig,
}

/// Grünwald–Letnikov weights of `(1 - z)^s`: `w_0 = 1`, `w_k = w_{k-1} (k - 1 - s)/k`.
pub fn gl_weights(s: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    if n == 0 {
        return w;
    }
    w.push(1.0);
    for k in 1..n {
        let prev = w[k - 1];
        w.push(prev * (k as f64 - 1.0 - s) / k as f64);
    }
    w
}

/// Forward and inverse plans of one block size and the transformed kernel.
type BlockPlan = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>, Arc<Vec<Complex64>>);

/// Online evaluation of `H_n = sum_{k >= 1} w_k x_{n-k}` while `x` is being
/// generated.
struct HistorySum {
    weights: Vec<f64>,
    planner: FftPlanner<f64>,
    plans: HashMap<usize, BlockPlan>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl HistorySum {
    fn new(weights: Vec<f64>) -> Self {
        Self {
            weights,
            planner: FftPlanner::new(),
            plans: HashMap::new(),
            buf: Vec::new(),
            scratch: Vec::new(),
        }
    }

    /// Forward and inverse plans of size `2L` and the transform of `w[0..2L)`.
    fn plan(&mut self, half: usize) -> BlockPlan {
        if let Some(p) = self.plans.get(&half) {
            return p.clone();
        }
        let size = 2 * half;
        let fwd = self.planner.plan_fft_forward(size);
        let inv = self.planner.plan_fft_inverse(size);
        let mut kernel: Vec<Complex64> = self.weights[..size].iter().map(|&w| Complex64::new(w, 0.0)).collect();
        fwd.process(&mut kernel);
        let entry = (fwd, inv, Arc::new(kernel));
        self.plans.insert(half, entry.clone());
        entry
    }

    /// Generates `x[0..len)`; `step(n, H_n, x)` returns `x_n` given `x[..n]`.
    fn run(&mut self, len: usize, step: &mut impl FnMut(usize, f64, &[f64]) -> Result<f64>) -> Result<Vec<f64>> {
        let padded = len.next_power_of_two().max(BASE_BLOCK);
        if self.weights.len() < padded {
            return Err(Error::invalid("weight table shorter than the trajectory"));
        }
        let mut x = vec![0.0; len];
        let mut hist = vec![0.0; len];
        self.solve(0, padded, len, &mut x, &mut hist, step)?;
        Ok(x)
    }

    fn solve(
        &mut self,
        l: usize,
        r: usize,
        len: usize,
        x: &mut [f64],
        hist: &mut [f64],
        step: &mut impl FnMut(usize, f64, &[f64]) -> Result<f64>,
    ) -> Result<()> {
        if l >= len {
            return Ok(());
        }
        if r - l <= BASE_BLOCK {
            for n in l..r.min(len) {
                let h = hist[n] + (l..n).map(|j| self.weights[n - j] * x[j]).sum::<f64>();
                x[n] = step(n, h, &x[..n])?;
            }
            return Ok(());
        }
        let m = (l + r) / 2;
        self.solve(l, m, len, x, hist, step)?;
        if m < len {
            // H[m + t] += sum_{i < L} x[l + i] w[L + t - i]; no wrap-around at size 2L.
            let half = m - l;
            let (fwd, inv, kernel) = self.plan(half);
            let size = 2 * half;
            self.buf.clear();
            self.buf.extend(x[l..m].iter().map(|&v| Complex64::new(v, 0.0)));
            self.buf.resize(size, Complex64::new(0.0, 0.0));
            let need = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
            if self.scratch.len() < need {
                self.scratch.resize(need, Complex64::new(0.0, 0.0));
            }
            fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
            for (b, k) in self.buf.iter_mut().zip(kernel.iter()) {
                *b *= k;
            }
            inv.process_with_scratch(&mut self.buf, &mut self.scratch);
            let scale = 1.0 / size as f64;
            for t in 0..(r - m).min(len - m) {
                hist[m + t] += self.buf[half + t].re * scale;
            }
        }
        self.solve(m, r, len, x, hist, step)
    }
}

fn member_rng(seed: u64, member: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(member as u64);
    rng
}

/// Stationary Gaussian sequence of `n` samples at spacing `dt` with power
/// spectral density `4 v_I T_b omega_z^-s |w|^(s-1)`, by spectral synthesis
/// over a block 1/0.9 times longer whose first 10% is discarded.
pub fn colored_noise(s: f64, t_b: f64, v_i: f64, omega_z: f64, dt: f64, n: usize, seed: u64) -> Vec<f64> {
    colored_noise_with(&mut ChaCha20Rng::seed_from_u64(seed), s, t_b, v_i, omega_z, dt, n)
}

fn colored_noise_with(rng: &mut impl Rng, s: f64, t_b: f64, v_i: f64, omega_z: f64, dt: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let total = ((n as f64 / 0.9).ceil() as usize).max(n + 1);
    let m = total.next_multiple_of(2);
    let amp = 4.0 * v_i * t_b * omega_z.powf(-s);
    let dw = 2.0 * PI / (m as f64 * dt);
    // E|c_k|^2 = S(w_k) dw / 2pi.
    let var = |k: usize| amp * (k as f64 * dw).powf(s - 1.0) / (m as f64 * dt);
    let mut c = vec![Complex64::new(0.0, 0.0); m];
    for k in 1..m / 2 {
        let sd = (0.5 * var(k)).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c[k] = Complex64::new(re * sd, im * sd);
        c[m - k] = c[k].conj();
    }
    let nyq: f64 = rng.sample(StandardNormal);
    c[m / 2] = Complex64::new(nyq * var(m / 2).sqrt(), 0.0);
    FftPlanner::new().plan_fft_inverse(m).process(&mut c);
    c[m - n..].iter().map(|z| z.re).collect()
}

/// Simulates ensemble member `member` and returns its post-burn-in samples.
pub fn simulate_member(cfg: &SimConfig, member: usize) -> Result<Trajectory> {
    cfg.validate()?;
    let padded = cfg.steps.next_power_of_two().max(BASE_BLOCK);
    simulate_with_weights(cfg, member, gl_weights(cfg.s, padded))
}

fn simulate_with_weights(cfg: &SimConfig, member: usize, weights: Vec<f64>) -> Result<Trajectory> {
    let mut rng = member_rng(cfg.seed, member);
    let colored = match cfg.noise {
        NoiseKind::White => None,
        NoiseKind::Colored { t_b, v_i, omega_z } => Some(colored_noise_with(
            &mut rng, cfg.s, t_b, v_i, omega_z, cfg.dt, cfg.steps,
        )),
    };
    let white_sd = (2.0 * cfg.kappa_eff / cfg.dt).sqrt();
    let gain = cfg.dt.powf(cfg.s) / cfg.v;
    let cubic = cfg.cubic();
    let mut step = |n: usize, h: f64, x: &[f64]| -> Result<f64> {
        if n == 0 {
            return Ok(cfg.x0);
        }
        let xi = match &colored {
            Some(c) => c[n],
            None => white_sd * rng.sample::<f64, _>(StandardNormal),
        };
        let prev = x[n - 1];
        let next = (xi - cfg.r * prev - cubic * prev * prev * prev) * gain - h;
        if !(next.abs() <= OVERFLOW_GUARD) {
            return Err(Error::Overflow {
                member,
                step: n,
                value: next.abs(),
            });
        }
        Ok(next)
    };
    let mut x = HistorySum::new(weights).run(cfg.steps, &mut step)?;
    let samples = x.split_off(cfg.burn_in);
    Ok(Trajectory {
        samples,
        dt: cfg.dt,
        seed: cfg.seed,
        member,
        config: *cfg,
    })
}

/// All ensemble members, in member order.
pub fn simulate(cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    map_members(cfg, Ok)
}

/// Simulates every member and reduces it with `f` without keeping the samples.
pub fn map_members<T: Send>(cfg: &SimConfig, f: impl Fn(Trajectory) -> Result<T> + Sync) -> Result<Vec<T>> {
    cfg.validate()?;
    let padded = cfg.steps.next_power_of_two().max(BASE_BLOCK);
    let weights = gl_weights(cfg.s, padded);
    (0..cfg.ensemble)
        .into_par_iter()
        .map(|m| f(simulate_with_weights(cfg, m, weights.clone())?))
        .collect()
}

/// Ensemble- and time-averaged moments after burn-in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryStats {
    pub mean: f64,
    pub mean_stderr: f64,
    pub second_moment: f64,
    pub second_stderr: f64,
    /// Change of the second moment between the two halves of the window.
    pub drift: f64,
    pub drift_stderr: f64,
    /// First lag where the autocorrelation drops below `1/e`.
    pub correlation_time: Option<f64>,
}

struct MemberSummary {
    mean: f64,
    second: f64,
    first_half: f64,
    second_half: f64,
    autocorr: Vec<f64>,
}

fn mean_and_stderr(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, f64::INFINITY);
    }
    let var = v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Raw autocorrelation `sum_n x_n x_{n+k} / (len - k)` for `k < max_lag`.
fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(size, Complex64::new(0.0, 0.0));
    planner.plan_fft_forward(size).process(&mut buf);
    for b in buf.iter_mut() {
        *b = Complex64::new(b.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    (0..max_lag.min(n))
        .map(|k| buf[k].re / size as f64 / (n - k) as f64)
        .collect()
}

/// Stationary statistics of the ensemble; the autocorrelation is resolved
/// up to `max_lag` steps.
pub fn stationary_statistics(cfg: &SimConfig, max_lag: usize) -> Result<StationaryStats> {
    let rows = map_members(cfg, |t| {
        let x = &t.samples;
        let n = x.len();
        let sq = |s: &[f64]| s.iter().map(|v| v * v).sum::<f64>() / s.len().max(1) as f64;
        Ok(MemberSummary {
            mean: x.iter().sum::<f64>() / n as f64,
            second: sq(x),
            first_half: sq(&x[..n / 2]),
            second_half: sq(&x[n / 2..]),
            autocorr: if max_lag > 0 {
                autocorrelation(x, max_lag)
            } else {
                Vec::new()
            },
        })
    })?;
    let (mean, mean_stderr) = mean_and_stderr(rows.iter().map(|r| r.mean));
    let (second_moment, second_stderr) = mean_and_stderr(rows.iter().map(|r| r.second));
    let (drift, drift_stderr) = mean_and_stderr(rows.iter().map(|r| r.second_half - r.first_half));
    let correlation_time = if max_lag > 0 {
        let lags = rows[0].autocorr.len();
        let acf: Vec<f64> = (0..lags)
            .map(|k| rows.iter().map(|r| r.autocorr[k]).sum::<f64>() / rows.len() as f64)
            .collect();
        let target = acf[0] / std::f64::consts::E;
        acf.windows(2).position(|w| w[1] < target).map(|k| {
            let frac = (acf[k] - target) / (acf[k] - acf[k + 1]);
            (k as f64 + frac) * cfg.dt
        })
    } else {
        None
    };
    Ok(StationaryStats {
        mean,
        mean_stderr,
        second_moment,
        second_stderr,
        drift,
        drift_stderr,
        correlation_time,
    })
}

/// `<(x(t + tau) - x(t))^2>` averaged over `t` after burn-in and over the
/// ensemble, for each lag `tau` (in time units, rounded to whole steps).
pub fn mean_square_displacement(cfg: &SimConfig, lags: &[f64]) -> Result<Vec<(f64, f64)>> {
    let steps: Vec<usize> = lags.iter().map(|&l| (l / cfg.dt).round().max(1.0) as usize).collect();
    if let Some(&too_long) = steps.iter().find(|&&k| k >= cfg.steps - cfg.burn_in) {
        return Err(Error::invalid(format!(
            "lag of {too_long} steps exceeds the sampled window"
        )));
    }
    let rows = map_members(cfg, |t| {
        let x = &t.samples;
        Ok(steps
            .iter()
            .map(|&k| {
                let m = x.len() - k;
                (0..m).map(|i| (x[i + k] - x[i]).powi(2)).sum::<f64>() / m as f64
            })
            .collect::<Vec<f64>>())
    })?;
    Ok(steps
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let avg = rows.iter().map(|r| r[i]).sum::<f64>() / rows.len() as f64;
            (k as f64 * cfg.dt, avg)
        })
        .collect())
}

fn oracle_tolerance() -> Tolerance {
    Tolerance::new(1e-10, 0.0, 20_000)
}

fn quadrature(f: impl FnMut(f64) -> f64, pts: &[f64], what: &str) -> Result<f64> {
    quad::integrate(f, pts, &oracle_tolerance())
        .map(|q| q.value)
        .map_err(|q| Error::Quadrature {
            context: what.to_string(),
            estimate: q.value.into(),
            error: q.error,
        })
}

/// Stationary `<x^2>` of the linear continuous-time theory (`g = 0`):
/// `int dw/2pi S(w) / |r + v (-i w)^s|^2`.
pub fn linear_variance_continuous(cfg: &SimConfig) -> Result<f64> {
    cfg.validate()?;
    let (s, v, r) = (cfg.s, cfg.v, cfg.r);
    if !(r > 0.0) {
        return Err(Error::invalid("the linear theory is stationary only for r > 0"));
    }
    let (amp, power) = match cfg.noise {
        NoiseKind::White => (2.0 * cfg.kappa_eff, 0.0),
        NoiseKind::Colored { t_b, v_i, omega_z } => (4.0 * v_i * t_b * omega_z.powf(-s), s - 1.0),
    };
    // Spectrum falls as w^(power - 2s) at high frequency.
    let uv = power - 2.0 * s;
    if uv >= -1.0 {
        return Err(Error::invalid(format!(
            "linear variance is UV divergent for s = {s} with this noise"
        )));
    }
    let phase = Complex64::from_polar(1.0, -0.5 * PI * s);
    let f = |w: f64| amp * w.powf(power) / (r + v * w.powf(s) * phase).norm_sqr();
    let (lo, hi) = (1e-14, 1e8);
    let body = quadrature(f, &quad::geometric_points(lo, hi, 2), "linear variance")?;
    let below = amp / (r * r) * lo.powf(power + 1.0) / (power + 1.0);
    let above = amp / (v * v) * hi.powf(uv + 1.0) / -(uv + 1.0);
    Ok((body + below + above) / PI)
}

/// Stationary `<x^2>` of the discretised linear scheme (`g = 0`, white noise):
/// `int_{-pi}^{pi} dtheta/2pi (2 kappa_eff/dt) / |v dt^-s (1 - e^{i theta})^s + r e^{i theta}|^2`.
pub fn linear_variance_discrete(cfg: &SimConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.noise != NoiseKind::White {
        return Err(Error::invalid("discrete oracle is implemented for white noise"));
    }
    if !(cfg.r > 0.0) {
        return Err(Error::invalid("the linear theory is stationary only for r > 0"));
    }
    let (s, v, r, dt) = (cfg.s, cfg.v, cfg.r, cfg.dt);
    let f = |th: f64| {
        let z = Complex64::from_polar(1.0, th);
        let sym = (Complex64::new(1.0, 0.0) - z).powf(s) * (v * dt.powf(-s)) + z * r;
        2.0 * cfg.kappa_eff / dt / sym.norm_sqr()
    };
    let lo = 1e-14;
    let body = quadrature(f, &quad::geometric_points(lo, PI, 2), "discrete linear variance")?;
    Ok((body + f(lo) * lo) / PI)
}

/// One point of a finite-size scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteSizePoint {
    pub n_atoms: f64,
    pub stats: StationaryStats,
}

/// Finite-size scan at criticality: stationary `<x^2>` against `N`, its
/// power-law fit (`alpha`), and the fit of the `1/e` autocorrelation time
/// (`zeta`) where it was resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSizeScan {
    pub points: Vec<FiniteSizePoint>,
    pub alpha: PowerLawFit,
    pub zeta: Option<PowerLawFit>,
}

/// Drift beyond this many standard errors is reported as non-stationary.
pub const DRIFT_SIGMAS: f64 = 3.0;

pub fn finite_size_scan(template: &SimConfig, n_list: &[f64], max_lag: usize) -> Result<FiniteSizeScan> {
    if template.r != 0.0 {
        return Err(Error::invalid("finite-size scans are taken at r = 0"));
    }
    if !(template.g > 0.0) {
        return Err(Error::invalid("finite-size scans need g > 0"));
    }
    let lo = n_list.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = n_list.iter().copied().fold(0.0, f64::max);
    if !(hi / lo >= 10f64.powf(1.5)) {
        return Err(Error::invalid("N values must span at least 1.5 decades"));
    }
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let cfg = SimConfig {
            n_atoms: n,
            ..*template
        };
        let stats = stationary_statistics(&cfg, max_lag)?;
        let bound = DRIFT_SIGMAS * stats.drift_stderr;
        if stats.drift.abs() > bound {
            return Err(Error::NonStationary {
                drift: stats.drift,
                bound,
            });
        }
        points.push(FiniteSizePoint { n_atoms: n, stats });
    }
    let alpha = exponents::fit_power_law(
        &points
            .iter()
            .map(|p| (p.n_atoms, p.stats.second_moment))
            .collect::<Vec<_>>(),
        (lo, hi),
    );
    let alpha = match alpha {
        Ok(f) => f,
        Err(_) => fit_few(
            &points
                .iter()
                .map(|p| (p.n_atoms, p.stats.second_moment))
                .collect::<Vec<_>>(),
            (lo, hi),
        )?,
    };
    let times: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.stats.correlation_time.map(|t| (p.n_atoms, t)))
        .collect();
    let zeta = if times.len() == points.len() {
        fit_few(&times, (lo, hi)).ok()
    } else {
        None
    };
    Ok(FiniteSizeScan { points, alpha, zeta })
}

/// Log-log least squares for scans with fewer points than the general fit
/// requires; the standard error is left infinite below three points.
fn fit_few(points: &[(f64, f64)], window: (f64, f64)) -> Result<PowerLawFit> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Fit("need at least two positive points".into()));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(PowerLawFit {
        exponent: slope,
        amplitude: intercept.exp(),
        stderr: if n > 2.0 {
            (sse / (n - 2.0) / sxx).sqrt()
        } else {
            f64::INFINITY
        },
        r_squared: if syy > 0.0 {
            (1.0 - sse / syy).clamp(0.0, 1.0)
        } else {
            1.0
        },
        window,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn white(s: f64, r: f64, steps: usize, ensemble: usize) -> SimConfig {
        SimConfig {
            s,
            v: 0.2,
            r,
            kappa_eff: 0.265625,
            g: 0.0,
            n_atoms: f64::INFINITY,
            dt: 0.01,
            steps,
            burn_in: steps / 5,
            ensemble,
            seed: 7,
            noise: NoiseKind::White,
            x0: 0.0,
        }
    }

    #[test]
    fn weights_by_hand() {
        let w = gl_weights(0.5, 4);
        assert_eq!(w, vec![1.0, -0.5, -0.125, -0.0625]);
        let w = gl_weights(1.0, 4);
        assert_eq!(w, vec![1.0, -1.0, 0.0, 0.0]);
        assert!(gl_weights(0.3, 0).is_empty());
    }

    #[test]
    fn weight_partial_sums_follow_product_form() {
        // sum_{k<n} w_k is the coefficient of z^(n-1) in (1 - z)^(s-1).
        for &s in &[0.2, 0.5, 0.9] {
            let w = gl_weights(s, 1_000_000);
            let mut sum = 0.0;
            let mut prod = 1.0;
            let mut last = f64::INFINITY;
            for (k, wk) in w.iter().enumerate() {
                sum += wk;
                if k > 0 {
                    prod *= 1.0 - s / k as f64;
                }
                if k % 100_000 == 99_999 || k == 10 {
                    assert_relative_eq!(sum, prod, max_relative = 1e-9);
                    assert!(sum > 0.0 && sum < last);
                    last = sum;
                }
            }
            // Decays as n^-s / Gamma(1 - s).
            assert!(sum < 1e6f64.powf(-s));
        }
    }

    #[test]
    fn online_convolution_matches_direct_sum() {
        let s = 0.63;
        let n: usize = 1000;
        let w = gl_weights(s, n.next_power_of_two());
        let mut direct = vec![0.0; n];
        let mut hs = vec![0.0; n];
        for k in 0..n {
            let h: f64 = (1..=k).map(|j| w[j] * direct[k - j]).sum();
            hs[k] = h;
            direct[k] = ((k as f64 * 0.37).sin() - 0.1 * h).tanh();
        }
        let mut got_h = vec![0.0; n];
        let x = HistorySum::new(w)
            .run(n, &mut |k, h, _x: &[f64]| {
                got_h[k] = h;
                Ok(((k as f64 * 0.37).sin() - 0.1 * h).tanh())
            })
            .unwrap();
        for k in 0..n {
            assert!((x[k] - direct[k]).abs() < 1e-12, "k={k}");
            assert!((got_h[k] - hs[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = white(0.7, 0.1, 100, 1);
        assert!(c.validate().is_ok());
        c.burn_in = 100;
        assert!(c.validate().is_err());
        let mut c = white(0.7, 0.1, 100, 1);
        c.noise = NoiseKind::Colored {
            t_b: 0.0,
            v_i: 0.1,
            omega_z: 1.0,
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn identical_seeds_give_identical_trajectories() {
        let c = white(0.6, 0.05, 3000, 3);
        let a = simulate(&c).unwrap();
        let b = simulate(&c).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].samples, a[1].samples);
        let single = simulate_member(&c, 2).unwrap();
        assert_eq!(single, a[2]);
        assert_eq!(a[0].samples.len(), 3000 - 600);
    }

    #[test]
    fn overflow_names_the_step() {
        let mut c = white(0.6, 0.0, 5000, 1);
        c.g = 1e6;
        c.n_atoms = 1.0;
        c.x0 = 100.0;
        match simulate(&c) {
            Err(Error::Overflow { member: 0, step, .. }) => assert!(step < 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_temperature_noise_vanishes() {
        assert!(colored_noise(0.5, 1e-300 * 0.0, 0.2, 1.0, 0.01, 1000, 3)
            .iter()
            .all(|&x| x == 0.0));
    }

    fn periodogram_slope(x: &[f64], dt: f64, lo: f64, hi: f64) -> f64 {
        let n = x.len();
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let dw = 2.0 * PI / (n as f64 * dt);
        let edges = exponents::log_grid(lo, hi, 11);
        let pts: Vec<(f64, f64)> = edges
            .windows(2)
            .map(|e| {
                let (a, b) = ((e[0] / dw).ceil() as usize, (e[1] / dw).floor() as usize);
                let p = (a..b).map(|k| buf[k].norm_sqr()).sum::<f64>() / (b - a) as f64;
                ((e[0] * e[1]).sqrt(), p)
            })
            .collect();
        exponents::fit_power_law(&pts, (lo, hi)).unwrap().exponent
    }

    #[test]
    fn colored_noise_spectrum() {
        let dt = 0.01;
        let n = 1 << 20;
        for &s in &[0.4, 0.7] {
            let x = colored_noise(s, 1.0, 0.2, 1.0, dt, n, 11);
            let slope = periodogram_slope(&x, dt, 0.1, 10.0);
            assert!((slope - (s - 1.0)).abs() < 0.05, "s={s}: {slope}");
        }
        // s -> 1: flat spectrum with variance 4 v_I T_b / omega_z per unit bandwidth.
        let x = colored_noise(0.999_999, 1.0, 0.2, 1.0, dt, n, 12);
        assert!(periodogram_slope(&x, dt, 0.1, 100.0).abs() < 0.05);
        let var = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let band = PI / dt / PI;
        assert_relative_eq!(var, 0.8 * band, max_relative = 0.02);
    }

    #[test]
    fn discrete_oracle_approaches_continuous() {
        // The gap is the missing UV tail, of order dt^(2s - 1).
        let mut c = white(0.7, 0.02, 100, 1);
        let cont = linear_variance_continuous(&c).unwrap();
        let gaps: Vec<f64> = [0.04, 0.01, 0.0025]
            .iter()
            .map(|&dt| {
                c.dt = dt;
                (linear_variance_discrete(&c).unwrap() / cont - 1.0).abs()
            })
            .collect();
        for w in gaps.windows(2) {
            let order = (w[0] / w[1]).ln() / 4f64.ln();
            assert!((order - 0.4).abs() < 0.05, "{gaps:?}");
        }
        assert!(linear_variance_continuous(&white(0.4, 0.1, 100, 1)).is_err());
    }

    #[test]
    fn continuous_oracle_of_markovian_limit() {
        // s -> 1 with v = 1: int dw/2pi 2k/(r^2 + w^2) = k/r.
        let mut c = white(0.999_999, 0.3, 100, 1);
        c.v = 1.0;
        c.noise = NoiseKind::White;
        let got = linear_variance_continuous(&c).unwrap();
        assert_relative_eq!(got, 0.265625 / 0.3, max_relative = 1e-4);
    }

    #[test]
    fn halving_dt_moves_discrete_variance_little() {
        let mut c = white(0.7, 0.0187, 100, 1);
        let coarse = linear_variance_discrete(&c).unwrap();
        c.dt /= 2.0;
        let fine = linear_variance_discrete(&c).unwrap();
        assert!((fine / coarse - 1.0).abs() < 0.02);
    }

    #[test]
    fn steady_state_flux_exponent() {
        // <x^2> ~ r^-(2 - 1/s) as r -> 0.
        let s = 0.7;
        let pts: Vec<(f64, f64)> = exponents::log_grid(1e-7, 1e-5, 6)
            .into_iter()
            .map(|r| (r, linear_variance_continuous(&white(s, r, 100, 1)).unwrap()))
            .collect();
        let fit = exponents::fit_power_law(&pts, (1e-7, 1e-5)).unwrap();
        assert!((fit.exponent + (2.0 - 1.0 / s)).abs() < 2e-3, "{fit:?}");
    }

    #[test]
    fn linear_white_noise_variance() {
        let c = white(0.7, 0.1, 60_000, 16);
        let stats = stationary_statistics(&c, 0).unwrap();
        let exact = linear_variance_discrete(&c).unwrap();
        let rel = (stats.second_moment - exact).abs();
        assert!(rel < 4.0 * stats.second_stderr, "{stats:?} vs {exact}");
        assert!(stats.mean.abs() < 4.0 * stats.mean_stderr);
    }

    #[test]
    fn linear_colored_noise_variance() {
        let mut c = white(0.7, 0.2, 60_000, 16);
        c.noise = NoiseKind::Colored {
            t_b: 0.5,
            v_i: 0.05,
            omega_z: 1.0,
        };
        let stats = stationary_statistics(&c, 0).unwrap();
        let exact = linear_variance_continuous(&c).unwrap();
        assert!(
            ((stats.second_moment - exact) / exact).abs() < 0.05,
            "{stats:?} vs {exact}"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn online_convolution_is_exact(s in 0.05f64..0.95, n in 1usize..700) {
            let w = gl_weights(s, n.next_power_of_two().max(BASE_BLOCK));
            let x = HistorySum::new(w.clone()).run(n, &mut |k, h, _x: &[f64]| Ok((k as f64).cos() - 0.5 * h)).unwrap();
            for k in 0..n {
                let h: f64 = (1..=k).map(|j| w[j] * x[k - j]).sum();
                prop_assert!((x[k] - ((k as f64).cos() - 0.5 * h)).abs() < 1e-11);
            }
        }
    }
}
