//! Frequency integrals of the exact Green's functions: photon number,
//! time-domain correlation and response functions, and the mean-square
//! displacement of the order parameter.
//!
//! Time-domain quantities use [`fourier_oscillatory`]: each half-line is
//! split at the branch point `w = 0`, covered by logarithmic panels up to
//! the half period `pi/t` and by half-period panels beyond, and closed with
//! an integration-by-parts tail.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::greens::{self, ModelParams};
use crate::quad::{self, Scalar, Tolerance};

/// Panels per octave on logarithmic grids.
const PANELS_PER_OCTAVE: usize = 4;
/// Half-period panels before the asymptotic tail.
const HALF_PERIODS: f64 = 200.0;
/// Minimum extent of the panelled region below `t = 1e3`.
const MIN_EXTENT: f64 = 50.0;

/// Quadrature controls. Frequencies are absolute (in units where omega_z = 1
/// they are the usual dimensionless values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    /// Lowest panel edge; the integrand is extrapolated as a power below it.
    pub omega_min: f64,
    /// Upper panel edge for non-oscillatory integrals; a `1/w^2` tail is added beyond.
    pub omega_max: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            omega_min: 1e-16,
            omega_max: 1e3,
            max_subdivisions: 50_000,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(Error::invalid(format!(
                "rel_tol = {} must lie in (0, 1e-3]",
                self.rel_tol
            )));
        }
        if !(self.omega_min > 0.0 && self.omega_min < self.omega_max && self.omega_max.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 < omega_min < omega_max, got {} and {}",
                self.omega_min, self.omega_max
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be positive"));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.rel_tol, 0.0, self.max_subdivisions)
    }
}

/// Value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

impl<T: Scalar> Estimate<T> {
    fn zero() -> Self {
        Self {
            value: T::default(),
            error: 0.0,
        }
    }

    fn plus(self, o: Estimate<T>) -> Self {
        Self {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

/// Which field's Green's functions are transformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// `[G]_11` of the cavity photon.
    Photon,
    /// Rotated photon quadrature with exact frequency dependence.
    X,
    /// Single-field low-frequency theory of the scenario.
    XLowFreq,
}

/// `i G^K(w)` of `field`; real and positive.
pub fn keldysh_spectrum(field: Field, omega: f64, p: &ModelParams) -> Result<f64> {
    match field {
        Field::Photon => {
            let g = greens::photon_greens(omega, p)?;
            Ok((g.k.0[0][0] * Complex64::i()).re)
        }
        Field::X => {
            let (pr, pk) = greens::x_inverse_exact(omega, p)?;
            Ok(pk.im / pr.norm_sqr())
        }
        Field::XLowFreq => {
            let (pr, pk) = greens::x_inverse_lowfreq(omega, p)?;
            Ok(pk.im / pr.norm_sqr())
        }
    }
}

/// `G^R(w)` of `field`.
pub fn retarded_spectrum(field: Field, omega: f64, p: &ModelParams) -> Result<Complex64> {
    match field {
        Field::Photon => Ok(greens::photon_greens(omega, p)?.r.0[0][0]),
        Field::X => Ok(greens::x_inverse_exact(omega, p)?.0.inv()),
        Field::XLowFreq => Ok(greens::x_inverse_lowfreq(omega, p)?.0.inv()),
    }
}

fn run_quad<T: Scalar>(
    context: &str,
    mut f: impl FnMut(f64) -> Result<T>,
    points: &[f64],
    q: &QuadConfig,
) -> Result<Estimate<T>> {
    let mut failure = None;
    let res = quad::integrate(
        |w| match f(w) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                T::default()
            }
        },
        points,
        &q.tolerance(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    match res {
        Ok(r) => Ok(Estimate {
            value: r.value,
            error: r.error,
        }),
        Err(r) => Err(Error::Quadrature {
            context: context.to_string(),
            estimate: r.value.to_complex(),
            error: r.error,
        }),
    }
}

/// `int_0^floor g` for an integrand behaving as a power of `w` below `floor`.
fn below_floor<T: Scalar>(g: &mut impl FnMut(f64) -> Result<T>, floor: f64) -> Result<Estimate<T>> {
    let g1 = g(floor)?;
    let g2 = g(2.0 * floor)?;
    let g4 = g(4.0 * floor)?;
    if g1.modulus() == 0.0 {
        return Ok(Estimate::zero());
    }
    let local = |a: T, b: T| (b.modulus() / a.modulus()).log2();
    let p = local(g1, g2);
    if !p.is_finite() || p <= -1.0 {
        return Err(Error::InfraredDivergent { exponent: p });
    }
    let value = g1 * (floor / (p + 1.0));
    let drift = (local(g2, g4) - p).abs();
    Ok(Estimate {
        value,
        error: value.modulus() * drift / (p + 1.0),
    })
}

/// Logarithmic panel edges from `floor` to `pi/t` followed by half-period
/// edges; returns the edges (the last one is the start of the tail).
fn oscillatory_panels(t: f64, q: &QuadConfig) -> (f64, Vec<f64>) {
    let h = PI / t;
    let floor = q.omega_min.min(1e-3 / t);
    let mut extent = HALF_PERIODS * h;
    if t < 1e3 {
        extent = extent.max(MIN_EXTENT);
    }
    let n = (extent / h).ceil() as usize;
    let mut pts = quad::geometric_points(floor, h, 1);
    pts.extend((2..=n).map(|k| k as f64 * h));
    (floor, pts)
}

/// `int_W^inf f(w) e^{i a w} dw` from three terms of the integration-by-parts series.
fn ibp_tail(f: &mut impl FnMut(f64) -> Result<Complex64>, w: f64, a: f64) -> Result<Estimate<Complex64>> {
    let h = 1e-3 * w;
    let (fm, f0, fp) = (f(w - h)?, f(w)?, f(w + h)?);
    let d = [f0, (fp - fm) / (2.0 * h), (fp - f0 * 2.0 + fm) / (h * h)];
    let ia = Complex64::new(0.0, a);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    let mut pow = ia;
    for (k, dk) in d.iter().enumerate() {
        let term = dk / pow * if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += term;
        last = term.norm();
        pow *= ia;
    }
    Ok(Estimate {
        value: -Complex64::from_polar(1.0, a * w) * sum,
        error: last,
    })
}

/// `int_0^inf f(w) e^{i sigma w t} dw` for `t > 0`.
fn oscillatory_half_line(
    f: &mut impl FnMut(f64) -> Result<Complex64>,
    t: f64,
    sigma: f64,
    q: &QuadConfig,
) -> Result<Estimate<Complex64>> {
    let (floor, pts) = oscillatory_panels(t, q);
    let phase = |w: f64| Complex64::from_polar(1.0, sigma * w * t);
    let mut g = |w: f64| Ok(f(w)? * phase(w));
    let body = run_quad(&format!("Fourier integral at t = {t}"), &mut g, &pts, q)?;
    let below = below_floor(&mut g, floor)?;
    let tail = ibp_tail(f, *pts.last().expect("panels"), sigma * t)?;
    Ok(body.plus(below).plus(tail))
}

/// `int_0^inf f(w) dw` for `f ~ 1/w^2` beyond `omega_max`.
fn half_line<T: Scalar>(
    f: &mut impl FnMut(f64) -> Result<T>,
    from: f64,
    q: &QuadConfig,
    context: &str,
) -> Result<Estimate<T>> {
    let top = q.omega_max.max(2.0 * from);
    let pts = quad::geometric_points(from, top, PANELS_PER_OCTAVE);
    let body = run_quad(context, &mut *f, &pts, q)?;
    Ok(body.plus(inverse_square_tail(f, top)?))
}

/// `int_W^inf f` with `f = A/w^2 + B/w^3 + C/w^4` matched at `W`, `2W`, `4W`.
fn inverse_square_tail<T: Scalar>(f: &mut impl FnMut(f64) -> Result<T>, w: f64) -> Result<Estimate<T>> {
    // u_k = w_k^2 f(w_k) = A + B/w_k + C/w_k^2 at w_k = w, 2w, 4w.
    let u1 = f(w)? * (w * w);
    let u2 = f(2.0 * w)? * (4.0 * w * w);
    let u4 = f(4.0 * w)? * (16.0 * w * w);
    let c = (u1 - u2 * 3.0 + u4 * 2.0) * (8.0 * w * w / 3.0);
    let b = (u1 - u2) * (2.0 * w) - c * (1.5 / w);
    let a = u1 - b * (1.0 / w) - c * (1.0 / (w * w));
    let last = c * (1.0 / (3.0 * w * w * w));
    Ok(Estimate {
        value: a * (1.0 / w) + b * (1.0 / (2.0 * w * w)) + last,
        error: last.modulus(),
    })
}

/// `int dw/2pi F(w) e^{-i w t}` over the real line.
///
/// `F` may have an integrable power-law singularity at `w = 0`. For `t > 0`
/// it needs only to decay as `1/|w|`; at `t = 0` it must decay as `1/w^2`.
pub fn fourier_oscillatory(
    mut f: impl FnMut(f64) -> Result<Complex64>,
    t: f64,
    q: &QuadConfig,
) -> Result<Estimate<Complex64>> {
    q.validate()?;
    if !t.is_finite() {
        return Err(Error::invalid(format!("t = {t} must be finite")));
    }
    let (pos, neg) = if t == 0.0 {
        let floor = q.omega_min;
        let mut fp = |w: f64| f(w);
        let mut total = half_line(&mut fp, floor, q, "frequency integral")?;
        total = total.plus(below_floor(&mut fp, floor)?);
        let mut fm = |w: f64| f(-w);
        let mut other = half_line(&mut fm, floor, q, "frequency integral")?;
        other = other.plus(below_floor(&mut fm, floor)?);
        (total, other)
    } else {
        // Negative frequencies enter as int_0^inf F(-u) e^{+i u t} du.
        let ta = t.abs();
        let sigma = -t.signum();
        let pos = oscillatory_half_line(&mut |w| f(w), ta, sigma, q)?;
        let neg = oscillatory_half_line(&mut |w| f(-w), ta, -sigma, q)?;
        (pos, neg)
    };
    let total = pos.plus(neg);
    Ok(Estimate {
        value: total.value / (2.0 * PI),
        error: total.error / (2.0 * PI),
    })
}

fn require_disordered(p: &ModelParams, allow_critical: bool) -> Result<()> {
    p.validate()?;
    let yc = p.critical_coupling();
    if p.y > yc || (p.y == yc && !allow_critical) {
        return Err(Error::invalid(format!(
            "y = {} is not below the critical coupling y_c = {yc}",
            p.y
        )));
    }
    Ok(())
}

/// `n = (1/2) int dw/2pi i[G^K(w)]_11 - 1/2`.
pub fn photon_number(p: &ModelParams, q: &QuadConfig) -> Result<Estimate<f64>> {
    require_disordered(p, false)?;
    q.validate()?;
    let mut total = Estimate::zero();
    for sign in [1.0, -1.0] {
        let mut f = |w: f64| keldysh_spectrum(Field::Photon, sign * w, p);
        total = total
            .plus(half_line(&mut f, q.omega_min, q, "photon number")?)
            .plus(below_floor(&mut f, q.omega_min)?);
    }
    Ok(Estimate {
        value: 0.5 * total.value / (2.0 * PI) - 0.5,
        error: 0.5 * total.error / (2.0 * PI),
    })
}

/// Symmetrised Keldysh correlator `Re int dw/2pi iG^K(w) e^{-i w t}` of `field`.
///
/// For the photon, the value at `t = 0` is `2n + 1`.
pub fn correlation_time(field: Field, t: f64, p: &ModelParams, q: &QuadConfig) -> Result<Estimate<f64>> {
    require_disordered(p, true)?;
    let e = fourier_oscillatory(|w| keldysh_spectrum(field, w, p).map(Complex64::from), t.abs(), q)?;
    Ok(Estimate {
        value: e.value.re,
        error: e.error,
    })
}

/// `G^R(t) = int dw/2pi G^R(w) e^{-i w t}`, zero for `t < 0`.
pub fn response_complex(field: Field, t: f64, p: &ModelParams, q: &QuadConfig) -> Result<Estimate<Complex64>> {
    require_disordered(p, true)?;
    if t < 0.0 {
        return Ok(Estimate::zero());
    }
    if t == 0.0 {
        return Err(Error::invalid("response function is evaluated at t > 0"));
    }
    fourier_oscillatory(|w| retarded_spectrum(field, w, p), t, q)
}

/// `|G^R(t)| = |iG^R(t)|`; the photon response carries a constant phase at
/// late times, so exponents are extracted from the modulus.
pub fn response_time(field: Field, t: f64, p: &ModelParams, q: &QuadConfig) -> Result<Estimate<f64>> {
    let e = response_complex(field, t, p, q)?;
    Ok(Estimate {
        value: e.value.norm(),
        error: e.error,
    })
}

/// `<(x(t) - x(0))^2> = 2 (C(0) - C(t)) = 2 int dw/2pi iG^K(w) (1 - cos w t)`,
/// integrated as one IR-finite integrand.
pub fn mean_square_displacement(field: Field, t: f64, p: &ModelParams, q: &QuadConfig) -> Result<Estimate<f64>> {
    require_disordered(p, true)?;
    q.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t = {t} must be positive")));
    }
    let (floor, pts) = oscillatory_panels(t, q);
    let top = *pts.last().expect("panels");
    let mut total = Estimate::zero();
    for sign in [1.0, -1.0] {
        let mut f = |w: f64| keldysh_spectrum(field, sign * w, p);
        let mut g = |w: f64| {
            let s = (0.5 * w * t).sin();
            Ok(f(w)? * 2.0 * s * s)
        };
        total = total
            .plus(run_quad("mean-square displacement", &mut g, &pts, q)?)
            .plus(below_floor(&mut g, floor)?);
        // Beyond `top`: int F - Re int F e^{i w t}.
        let plain = half_line(&mut f, top, q, "mean-square displacement tail")?;
        let osc = ibp_tail(&mut |w| f(w).map(Complex64::from), top, t)?;
        total = total.plus(plain).plus(Estimate {
            value: -osc.value.re,
            error: osc.error,
        });
    }
    Ok(Estimate {
        value: 2.0 * total.value / (2.0 * PI),
        error: 2.0 * total.error / (2.0 * PI),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::Scenario;
    use approx::assert_relative_eq;

    fn reference(s: f64) -> ModelParams {
        ModelParams::reference(s).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(QuadConfig::default().validate().is_ok());
        let bad = QuadConfig {
            rel_tol: 1e-2,
            ..QuadConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadConfig {
            omega_min: 1e4,
            ..QuadConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn lorentzian_transform() {
        let q = QuadConfig::default();
        let a = 1.0;
        let e = fourier_oscillatory(|w| Ok(Complex64::from(2.0 * a / (w * w + a * a))), 3.0, &q).unwrap();
        assert_relative_eq!(e.value.re, (-3.0f64).exp(), max_relative = 1e-8);
        assert!(e.value.im.abs() < 1e-10);
        let e0 = fourier_oscillatory(|w| Ok(Complex64::from(2.0 * a / (w * w + a * a))), 0.0, &q).unwrap();
        assert_relative_eq!(e0.value.re, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn zero_function_transforms_to_zero() {
        let e = fourier_oscillatory(|_| Ok(Complex64::new(0.0, 0.0)), 7.0, &QuadConfig::default()).unwrap();
        assert_eq!(e.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn slowly_decaying_pole() {
        // 1/(w - w0 + i g) -> -i e^{-i w0 t - g t}
        let (w0, g) = (2.0, 0.5);
        let q = QuadConfig::default();
        for &t in &[0.3, 1.0, 4.0, 20.0] {
            let e = fourier_oscillatory(|w| Ok(Complex64::new(w - w0, g).inv()), t, &q).unwrap();
            let exact = Complex64::new(0.0, -1.0) * Complex64::from_polar((-g * t).exp(), -w0 * t);
            assert!((e.value - exact).norm() < 1e-8 * exact.norm().max(1e-3), "t={t}");
        }
    }

    /// `int_0^inf w^-0.6 e^{-w^2} cos(w t) dw` by the substitution `w = u^2.5`
    /// and a dense trapezoid rule.
    fn trapezoid_oracle(t: f64) -> f64 {
        let n = 2_000_000;
        let umax = 3.0;
        let du = umax / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let u = i as f64 * du;
            let w = u.powf(2.5);
            let v = 2.5 * (-w * w).exp() * (w * t).cos();
            sum += if i == 0 || i == n { 0.5 * v } else { v };
        }
        sum * du / PI
    }

    #[test]
    fn singular_power_law_matches_trapezoid() {
        let q = QuadConfig::default();
        let f = |w: f64| Ok(Complex64::from(w.abs().powf(-0.6) * (-w * w).exp()));
        let mut vals = Vec::new();
        for &t in &[10.0, 100.0] {
            let e = fourier_oscillatory(f, t, &q).unwrap();
            let oracle = trapezoid_oracle(t);
            assert_relative_eq!(e.value.re, oracle, max_relative = 1e-6);
            vals.push(e.value.re);
        }
        let slope = (vals[1] / vals[0]).log10();
        assert!((slope + 0.4).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn infrared_divergence_is_reported() {
        let f = |w: f64| Ok(Complex64::from(w.abs().powf(-1.2) * (-w * w).exp()));
        let err = fourier_oscillatory(f, 1.0, &QuadConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InfraredDivergent { .. }));
    }

    #[test]
    fn empty_cavity_has_no_photons() {
        let mut p = reference(0.5);
        p.y = 0.0;
        let n = photon_number(&p, &QuadConfig::default()).unwrap();
        assert!(n.value.abs() < 1e-9, "{:?}", n);
    }

    #[test]
    fn photon_number_rejects_ordered_side() {
        let p = reference(0.5).at_distance(0.0).unwrap();
        assert!(matches!(
            photon_number(&p, &QuadConfig::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn photon_number_grows_with_coupling() {
        let q = QuadConfig::default();
        let mut last = -1.0;
        for &rel in &[0.9, 0.5, 0.1, 1e-2, 1e-4] {
            let n = photon_number(&reference(0.6).at_distance(rel).unwrap(), &q)
                .unwrap()
                .value;
            assert!(n > last, "rel={rel}: {n} <= {last}");
            last = n;
        }
    }

    #[test]
    fn halving_tolerance_stays_within_error_estimate() {
        let p = reference(0.7).at_distance(1e-4).unwrap();
        let coarse = QuadConfig {
            rel_tol: 1e-6,
            ..QuadConfig::default()
        };
        let fine = QuadConfig {
            rel_tol: 5e-7,
            ..QuadConfig::default()
        };
        let a = photon_number(&p, &coarse).unwrap();
        let b = photon_number(&p, &fine).unwrap();
        assert!((a.value - b.value).abs() <= a.error, "{a:?} {b:?}");
        let a = correlation_time(Field::Photon, 50.0, &p, &coarse).unwrap();
        let b = correlation_time(Field::Photon, 50.0, &p, &fine).unwrap();
        assert!((a.value - b.value).abs() <= a.error, "{a:?} {b:?}");
    }

    #[test]
    fn equal_time_correlation_is_twice_occupation_plus_one() {
        let q = QuadConfig::default();
        let p = reference(0.4).at_distance(1e-3).unwrap();
        let n = photon_number(&p, &q).unwrap().value;
        let c0 = correlation_time(Field::Photon, 0.0, &p, &q).unwrap().value;
        assert_relative_eq!(c0, 2.0 * n + 1.0, max_relative = 1e-9);
    }

    #[test]
    fn bare_photon_response_is_a_damped_oscillation() {
        let mut p = reference(0.5);
        p.y = 0.0;
        let q = QuadConfig::default();
        for &t in &[0.5, 2.0, 10.0] {
            let g = response_complex(Field::Photon, t, &p, &q).unwrap().value;
            let exact = Complex64::new(0.0, -1.0) * Complex64::from_polar((-0.5 * t).exp(), -2.0 * t);
            assert!((g - exact).norm() < 1e-8, "t={t}: {g} vs {exact}");
        }
        assert_eq!(response_time(Field::Photon, -1.0, &p, &q).unwrap().value, 0.0);
    }

    #[test]
    fn markovian_lowfreq_theory_has_exponential_functions() {
        let p = reference(0.5)
            .for_scenario(Scenario::MbOnly, 0.0)
            .unwrap()
            .at_distance(1e-2)
            .unwrap();
        let co = greens::lowfreq_coefficients(&p).unwrap();
        let chi = 0.25;
        let q = QuadConfig::default();
        for &t in &[1.0, 10.0, 60.0] {
            let decay = (-co.r * t / chi).exp();
            let gr = response_complex(Field::XLowFreq, t, &p, &q).unwrap().value;
            assert_relative_eq!(gr.re, -decay / chi, max_relative = 1e-7);
            let c = correlation_time(Field::XLowFreq, t, &p, &q).unwrap().value;
            assert_relative_eq!(c, co.kappa_eff / (chi * co.r) * decay, max_relative = 1e-7);
        }
    }

    #[test]
    fn msd_vanishes_at_short_times_and_matches_difference() {
        let p = reference(0.75).at_distance(1e-2).unwrap();
        let q = QuadConfig::default();
        // iG^K_x falls off as 1/w^2, so the MSD is linear at short times.
        let small = mean_square_displacement(Field::X, 1e-4, &p, &q).unwrap().value;
        let larger = mean_square_displacement(Field::X, 1e-2, &p, &q).unwrap().value;
        assert!(small > 0.0);
        assert_relative_eq!(small / larger, 1e-2, max_relative = 0.1);
        let t = 5.0;
        let msd = mean_square_displacement(Field::X, t, &p, &q).unwrap().value;
        let c0 = correlation_time(Field::X, 0.0, &p, &q).unwrap().value;
        let ct = correlation_time(Field::X, t, &p, &q).unwrap().value;
        assert_relative_eq!(msd, 2.0 * (c0 - ct), max_relative = 1e-7);
    }

    #[test]
    fn markovian_critical_msd_is_diffusive() {
        // Without the colored bath, iG^K_x = 2 kappa_eff / (chi w)^2 at r = 0,
        // so the MSD is 2 kappa_eff t / chi^2.
        let p = reference(0.5)
            .for_scenario(Scenario::MbOnly, 0.0)
            .unwrap()
            .at_distance(0.0)
            .unwrap();
        let co = greens::lowfreq_coefficients(&p).unwrap();
        let q = QuadConfig::default();
        for &t in &[1.0, 30.0, 1e3] {
            let msd = mean_square_displacement(Field::XLowFreq, t, &p, &q).unwrap().value;
            assert_relative_eq!(msd, 2.0 * co.kappa_eff * t / 0.0625, max_relative = 1e-7);
        }
    }
}
