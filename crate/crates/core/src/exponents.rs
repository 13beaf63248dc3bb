//! Power-law fits, predicted exponent tables, crossover-time extraction and
//! the finite-temperature fit-window study.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::{self, ModelParams, Scenario};
use crate::observables::{self, Field, QuadConfig};

/// Least-squares fit of `y = amplitude * x^exponent` in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// Standard error of the exponent.
    pub stderr: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.amplitude * x.powf(self.exponent)
    }
}

pub const MIN_FIT_POINTS: usize = 6;

/// Fits the points with `window.0 <= x <= window.1`.
pub fn fit_power_law(points: &[(f64, f64)], window: (f64, f64)) -> Result<PowerLawFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Fit(format!("empty window [{lo}, {hi}]")));
    }
    let slack = 1e-12;
    let inside: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, _)| x >= lo * (1.0 - slack) && x <= hi * (1.0 + slack))
        .collect();
    if inside.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} points in [{lo:e}, {hi:e}], need at least {MIN_FIT_POINTS}",
            inside.len()
        )));
    }
    if let Some(&(x, y)) = inside
        .iter()
        .find(|&&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::Fit(format!("non-positive or non-finite point ({x:e}, {y:e})")));
    }
    let n = inside.len() as f64;
    let lx: Vec<f64> = inside.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = inside.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(PowerLawFit {
        exponent: slope,
        amplitude: intercept.exp(),
        stderr: (sse / (n - 2.0) / sxx).sqrt(),
        r_squared,
        window,
        points: inside.len(),
    })
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// A predicted exponent, or the qualitative behaviour listed instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Value(f64),
    /// The quantity diverges as the infrared regulator is removed.
    IrDivergent,
    /// Exponential rather than algebraic decay.
    ExpDecay,
}

impl Exponent {
    pub fn value(self) -> Option<f64> {
        match self {
            Exponent::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Value(v) => write!(f, "{v:.17e}"),
            Exponent::IrDivergent => f.write_str("ir-divergent"),
            Exponent::ExpDecay => f.write_str("exp-decay"),
        }
    }
}

/// Closed-form exponents of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPrediction {
    pub scenario: Scenario,
    pub s: f64,
    /// `n ~ dy^-nu`.
    pub photon_flux: Exponent,
    /// `iG^K(t) ~ t^-nu_t` at criticality.
    pub corr_critical: Exponent,
    pub corr_away: Exponent,
    /// `iG^R(t) ~ t^-nu'_t` at criticality.
    pub resp_critical: Exponent,
    pub resp_away: Exponent,
    /// `n ~ N^alpha` at criticality.
    pub finite_size: Exponent,
    /// `t_c ~ dy^-zeta_c`.
    pub crossover: Exponent,
    /// `t_N ~ N^zeta`.
    pub finite_size_time: Exponent,
}

pub fn predicted_exponents(scenario: Scenario, s: f64) -> Result<ScenarioPrediction> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid(format!("s = {s} must lie in (0, 1)")));
    }
    use Exponent::{ExpDecay, IrDivergent, Value};
    let p = match scenario {
        Scenario::Both => ScenarioPrediction {
            scenario,
            s,
            photon_flux: Value(if s > 0.5 { 2.0 - 1.0 / s } else { 0.0 }),
            corr_critical: if s > 0.5 { IrDivergent } else { Value(1.0 - 2.0 * s) },
            corr_away: Value(1.0 + s),
            resp_critical: Value(1.0 - s),
            resp_away: Value(1.0 + s),
            finite_size: Value(if s > 0.5 {
                (2.0 * s - 1.0) / (3.0 * s - 1.0)
            } else {
                0.0
            }),
            crossover: Value(1.0 / s),
            finite_size_time: Value(if s > 1.0 / 3.0 { 1.0 / (3.0 * s - 1.0) } else { 0.0 }),
        },
        Scenario::Thermal => ScenarioPrediction {
            scenario,
            s,
            photon_flux: Value(1.0),
            corr_critical: IrDivergent,
            corr_away: Value(s),
            resp_critical: Value(1.0 - s),
            resp_away: Value(1.0 + s),
            finite_size: Value(0.5),
            crossover: Value(1.0 / s),
            finite_size_time: Value(1.0 / (2.0 * s)),
        },
        Scenario::MbOnly => ScenarioPrediction {
            scenario,
            s,
            photon_flux: Value(1.0),
            corr_critical: IrDivergent,
            corr_away: ExpDecay,
            resp_critical: IrDivergent,
            resp_away: ExpDecay,
            finite_size: Value(0.5),
            crossover: Value(1.0),
            finite_size_time: Value(0.5),
        },
        Scenario::NmbOnly => ScenarioPrediction {
            scenario,
            s,
            photon_flux: Value(0.0),
            corr_critical: Value(1.0 - s),
            corr_away: Value(1.0 + s),
            resp_critical: Value(1.0 - s),
            resp_away: Value(1.0 + s),
            finite_size: Value(0.0),
            crossover: Value(1.0 / s),
            finite_size_time: Value(if s > 0.5 { 1.0 / (2.0 * s - 1.0) } else { 0.0 }),
        },
    };
    Ok(p)
}

/// Photon number at each relative distance `dy/y_c`.
pub fn photon_number_scan(p: &ModelParams, distances: &[f64], q: &QuadConfig) -> Result<Vec<(f64, f64)>> {
    distances
        .par_iter()
        .map(|&d| {
            let n = observables::photon_number(&p.at_distance(d)?, q)?;
            Ok((d, n.value))
        })
        .collect()
}

/// Photon-flux fit of `n` against `dy/y_c` over `window` with `points` samples.
/// The flux exponent is `-fit.exponent`.
pub fn photon_flux_fit(p: &ModelParams, window: (f64, f64), points: usize, q: &QuadConfig) -> Result<PowerLawFit> {
    let data = photon_number_scan(p, &log_grid(window.0, window.1, points), q)?;
    fit_power_law(&data, window)
}

/// Time-domain quantity used in exponent fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeQuantity {
    /// Symmetrised `iG^K(t)`.
    Correlation,
    /// `|iG^R(t)|`.
    Response,
    MeanSquareDisplacement,
}

pub fn time_scan(
    quantity: TimeQuantity,
    field: Field,
    p: &ModelParams,
    times: &[f64],
    q: &QuadConfig,
) -> Result<Vec<(f64, f64)>> {
    times
        .par_iter()
        .map(|&t| {
            let v = match quantity {
                TimeQuantity::Correlation => observables::correlation_time(field, t, p, q)?,
                TimeQuantity::Response => observables::response_time(field, t, p, q)?,
                TimeQuantity::MeanSquareDisplacement => observables::mean_square_displacement(field, t, p, q)?,
            };
            Ok((t, v.value))
        })
        .collect()
}

/// Fit of a time-domain quantity over `window` with `points` samples.
pub fn time_fit(
    quantity: TimeQuantity,
    field: Field,
    p: &ModelParams,
    window: (f64, f64),
    points: usize,
    q: &QuadConfig,
) -> Result<PowerLawFit> {
    let data = time_scan(quantity, field, p, &log_grid(window.0, window.1, points), q)?;
    fit_power_law(&data, window)
}

/// Windows and gates of the crossover extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverConfig {
    /// Early (critical) window in absolute time.
    pub early: (f64, f64),
    /// Late (off-critical) window in units of [`estimated_crossover_time`].
    pub late: (f64, f64),
    pub points: usize,
    pub min_r_squared: f64,
    /// Slopes closer than this are reported as no crossover.
    pub min_slope_gap: f64,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        Self {
            early: (10.0, 100.0),
            late: (1e3, 1e5),
            points: 9,
            min_r_squared: 0.99,
            min_slope_gap: 0.1,
        }
    }
}

/// Intersection of the early and late power laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    pub time: f64,
    pub early: PowerLawFit,
    pub late: PowerLawFit,
}

/// `(v/r)^(1/s)`, where the fractional term of the low-frequency theory
/// matches the mass.
pub fn estimated_crossover_time(p: &ModelParams) -> Result<f64> {
    let co = greens::lowfreq_coefficients(p)?;
    if !(co.r > 0.0) {
        return Err(Error::invalid("crossover time needs y < y_c"));
    }
    Ok((co.v / co.r).powf(1.0 / p.bath.s))
}

/// Crossover from sampled early and late data.
pub fn crossover_from_data(
    early: &[(f64, f64)],
    late: &[(f64, f64)],
    early_window: (f64, f64),
    late_window: (f64, f64),
    cfg: &CrossoverConfig,
) -> Result<Crossover> {
    let e = fit_power_law(early, early_window)?;
    let l = fit_power_law(late, late_window)?;
    for (name, f) in [("early", &e), ("late", &l)] {
        if f.r_squared < cfg.min_r_squared {
            return Err(Error::Fit(format!(
                "{name} window [{:e}, {:e}] is not a power law (r^2 = {:.5})",
                f.window.0, f.window.1, f.r_squared
            )));
        }
    }
    if (e.exponent - l.exponent).abs() < cfg.min_slope_gap {
        return Err(Error::NoCrossover {
            early: e.exponent,
            late: l.exponent,
        });
    }
    let ln_t = (l.amplitude.ln() - e.amplitude.ln()) / (e.exponent - l.exponent);
    Ok(Crossover {
        time: ln_t.exp(),
        early: e,
        late: l,
    })
}

/// Crossover time of the photon correlation function at `p`.
pub fn crossover_time(p: &ModelParams, cfg: &CrossoverConfig, q: &QuadConfig) -> Result<Crossover> {
    let tc = estimated_crossover_time(p)?;
    let late = (cfg.late.0 * tc, cfg.late.1 * tc);
    let fit = |w: (f64, f64)| {
        time_scan(
            TimeQuantity::Correlation,
            Field::Photon,
            p,
            &log_grid(w.0, w.1, cfg.points),
            q,
        )
    };
    crossover_from_data(&fit(cfg.early)?, &fit(late)?, cfg.early, late, cfg)
}

/// Crossover times over `distances` (relative to `y_c`) and the fit of
/// `t_c` against the distance; `zeta_c = -fit.exponent`.
pub fn crossover_scan(
    p: &ModelParams,
    distances: &[f64],
    cfg: &CrossoverConfig,
    q: &QuadConfig,
) -> Result<(Vec<(f64, Crossover)>, PowerLawFit)> {
    let rows: Vec<(f64, Crossover)> = distances
        .iter()
        .map(|&d| Ok((d, crossover_time(&p.at_distance(d)?, cfg, q)?)))
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|(d, c)| (*d, c.time)).collect();
    let lo = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = distances.iter().copied().fold(0.0, f64::max);
    let fit = fit_power_law(&pts, (lo, hi))?;
    Ok((rows, fit))
}

/// Photon-flux fits of a finite-temperature bath over several windows of
/// `dy/y_c`. The fitted exponent depends on how close the window is to
/// criticality.
pub fn finite_temperature_window_study(
    p: &ModelParams,
    windows: &[(f64, f64)],
    points: usize,
    q: &QuadConfig,
) -> Result<Vec<PowerLawFit>> {
    if !(p.bath.t_b > 0.0) {
        return Err(Error::invalid("window study needs T_b > 0"));
    }
    if p.bath.mu_b > 0.0 {
        return Err(Error::invalid("window study needs mu_b <= 0"));
    }
    windows.iter().map(|&w| photon_flux_fit(p, w, points, q)).collect()
}

/// Values of a correlation-type quantity with the spectrum cut to zero below
/// each of `cuts`; growth as the cut is lowered signals an infrared divergence.
pub fn infrared_regularised(
    quantity: TimeQuantity,
    field: Field,
    t: f64,
    p: &ModelParams,
    cuts: &[f64],
    q: &QuadConfig,
) -> Result<Vec<(f64, f64)>> {
    cuts.iter()
        .map(|&cut| {
            let q = QuadConfig {
                omega_min: (cut * 1e-3).min(q.omega_min),
                ..*q
            };
            let v = match quantity {
                TimeQuantity::Correlation => {
                    observables::fourier_oscillatory(
                        |w| {
                            if w.abs() < cut {
                                Ok(0.0.into())
                            } else {
                                observables::keldysh_spectrum(field, w, p).map(Into::into)
                            }
                        },
                        t,
                        &q,
                    )?
                    .value
                    .re
                }
                TimeQuantity::Response => observables::fourier_oscillatory(
                    |w| {
                        if w.abs() < cut {
                            Ok(0.0.into())
                        } else {
                            observables::retarded_spectrum(field, w, p)
                        }
                    },
                    t,
                    &q,
                )?
                .value
                .norm(),
                TimeQuantity::MeanSquareDisplacement => {
                    return Err(Error::invalid("the mean-square displacement is infrared finite"))
                }
            };
            Ok((cut, v))
        })
        .collect()
}
