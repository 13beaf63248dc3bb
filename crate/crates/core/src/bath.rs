//! Sub-ohmic bosonic bath coupled to the atomic mode.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Retarded or advanced branch of a two-time function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Retarded,
    Advanced,
}

impl Branch {
    /// +1 for retarded, -1 for advanced.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Retarded => 1.0,
            Branch::Advanced => -1.0,
        }
    }
}

/// Parameters of the colored bath. All frequencies share one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Coupling strength.
    pub gamma: f64,
    /// Spectral exponent, strictly between 0 and 1.
    pub s: f64,
    /// Bare atomic frequency, used as the reference scale of the spectrum.
    pub omega_z: f64,
    /// Soft UV cutoff of the spectral density.
    pub omega_m: f64,
    /// Bath temperature.
    pub t_b: f64,
    /// Bath chemical potential (non-positive).
    pub mu_b: f64,
}

impl BathParams {
    /// Zero-temperature bath with the cutoff at `1e4 * omega_z`.
    pub fn new(gamma: f64, s: f64, omega_z: f64) -> Result<Self> {
        let p = Self {
            gamma,
            s,
            omega_z,
            omega_m: 1e4 * omega_z,
            t_b: 0.0,
            mu_b: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_temperature(mut self, t_b: f64, mu_b: f64) -> Result<Self> {
        self.t_b = t_b;
        self.mu_b = mu_b;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::invalid(format!("s = {} must lie in (0, 1)", self.s)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma = {} must be >= 0", self.gamma)));
        }
        if !(self.omega_z > 0.0 && self.omega_z.is_finite()) {
            return Err(Error::invalid(format!("omega_z = {} must be > 0", self.omega_z)));
        }
        if !(self.omega_m > 0.0) {
            return Err(Error::invalid(format!("omega_m = {} must be > 0", self.omega_m)));
        }
        if !(self.t_b >= 0.0 && self.t_b.is_finite()) {
            return Err(Error::invalid(format!("T_b = {} must be >= 0", self.t_b)));
        }
        if !(self.mu_b <= 0.0 && self.mu_b.is_finite()) {
            return Err(Error::invalid(format!("mu_b = {} must be <= 0", self.mu_b)));
        }
        Ok(())
    }

    /// rho(w) = gamma Theta(w) (w/omega_z)^s / (1 + (w/omega_m)^2).
    pub fn spectral_density(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        let x = omega / self.omega_m;
        self.gamma * (omega / self.omega_z).powf(self.s) / (1.0 + x * x)
    }

    /// Self-energy in the infinite-cutoff limit,
    /// `(pi gamma / sin(pi s)) |w/omega_z|^s (Theta(w) e^{-/+ i pi s} + Theta(-w))`.
    pub fn self_energy_closed(&self, omega: f64, branch: Branch) -> Complex64 {
        if omega == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let amp = PI * self.gamma / (PI * self.s).sin() * (omega.abs() / self.omega_z).powf(self.s);
        if omega > 0.0 {
            let r = Complex64::from_polar(amp, -PI * self.s);
            match branch {
                Branch::Retarded => r,
                Branch::Advanced => r.conj(),
            }
        } else {
            Complex64::new(amp, 0.0)
        }
    }

    /// Self-energy from the finite-cutoff spectral density by principal-value
    /// quadrature, subtracted at `w = 0` so that the atomic frequency stays
    /// `omega_z`:
    /// `P int_0^inf rho(w') [1/(w - w') + 1/w'] dw' -/+ i pi rho(w)`.
    ///
    /// Differs from [`Self::self_energy_closed`] by a cutoff correction of
    /// relative size `~ (|w|/omega_m)^(1-s)`.
    pub fn self_energy_pv(&self, omega: f64, branch: Branch, rel_tol: f64) -> Result<Complex64> {
        self.validate()?;
        if !(rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol must be > 0"));
        }
        if omega == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let re = self.pv_real(omega, rel_tol)?;
        let im = -branch.sign() * PI * self.spectral_density(omega);
        Ok(Complex64::new(re, im))
    }

    fn pv_real(&self, omega: f64, rel_tol: f64) -> Result<f64> {
        let s = self.s;
        // g(w') = rho(w') w / w', so the subtracted kernel is g(w')/(w - w').
        let g = |wp: f64| self.spectral_density(wp) * omega / wp;
        let tol = Tolerance::new(rel_tol, 0.0, 20_000);
        let upper = 100.0 * self.omega_m;
        let scale = omega.abs().max(self.omega_z);
        let floor = 1e-14 * scale;
        let fail = |q: quad::Quadrature<f64>| Error::Quadrature {
            context: format!("principal-value self-energy at w = {omega}"),
            estimate: Complex64::new(q.value, 0.0),
            error: q.error,
        };
        // rho(w') w / ((w - w') w') -> gamma omega_z^-s w'^(s-1) as w' -> 0.
        let below_floor = self.gamma * self.omega_z.powf(-s) * floor.powf(s) / s;
        // rho ~ gamma (w'/omega_z)^s (omega_m/w')^2 and kernel ~ -w/w'^2 beyond `upper`.
        let tail = -self.gamma * omega * self.omega_z.powf(-s) * self.omega_m.powi(2) * upper.powf(s - 3.0) / (3.0 - s);

        let regular = |wp: f64| g(wp) / (omega - wp);
        if omega < 0.0 {
            let pts = quad::geometric_points(floor, upper, 2);
            let q = quad::integrate(regular, &pts, &tol).map_err(fail)?;
            return Ok(q.value + below_floor + tail);
        }
        let h = 0.5 * omega;
        let mut total = below_floor + tail;
        let q = quad::integrate(regular, &quad::geometric_points(floor, omega - h, 2), &tol).map_err(fail)?;
        total += q.value;
        let q = quad::integrate(regular, &quad::geometric_points(omega + h, upper, 2), &tol).map_err(fail)?;
        total += q.value;
        // Symmetric window around the pole: P int g(w')/(w-w') = int_0^h [g(w-u) - g(w+u)]/u du.
        let window = |u: f64| (g(omega - u) - g(omega + u)) / u;
        let q = quad::integrate(window, &[0.0, 0.25 * h, 0.5 * h, h], &tol).map_err(fail)?;
        total += q.value;
        Ok(total)
    }

    /// coth((w - mu_b)/(2 T_b)); at T_b = 0 this is sgn(w - mu_b), with 0 at w = mu_b.
    pub fn thermal_factor(&self, omega: f64) -> f64 {
        let x = omega - self.mu_b;
        if self.t_b == 0.0 {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }
        } else {
            1.0 / (x / (2.0 * self.t_b)).tanh()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bath(s: f64) -> BathParams {
        BathParams::new(0.1, s, 1.0).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        let b = bath(0.5);
        assert_relative_eq!(b.spectral_density(1.0), 0.1 / (1.0 + 1e-8), max_relative = 1e-14);
        assert_relative_eq!(b.spectral_density(1.0), 0.099_999_999_0, max_relative = 1e-9);
        assert_relative_eq!(b.spectral_density(1e4), 0.1 * 100.0 / 2.0, max_relative = 1e-14);
        assert_eq!(b.spectral_density(-0.3), 0.0);
        assert_eq!(b.spectral_density(0.0), 0.0);
    }

    #[test]
    fn closed_form_values() {
        let b = bath(0.5);
        let kr = b.self_energy_closed(1.0, Branch::Retarded);
        assert!(kr.re.abs() < 1e-15);
        assert_relative_eq!(kr.im, -0.314_159_265_358_979_3, max_relative = 1e-12);
        let kneg = b.self_energy_closed(-1.0, Branch::Retarded);
        assert_relative_eq!(kneg.re, 0.314_159_265_358_979_3, max_relative = 1e-12);
        assert_eq!(kneg.im, 0.0);
        assert_eq!(b.self_energy_closed(0.0, Branch::Advanced), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn thermal_factor_values() {
        let b = bath(0.5).with_temperature(1.0, -0.001).unwrap();
        assert_relative_eq!(b.thermal_factor(0.0), 2_000.000_166_666_67, max_relative = 1e-10);
        let cold = bath(0.5).with_temperature(0.0, -0.2).unwrap();
        assert_eq!(cold.thermal_factor(-0.2), 0.0);
        assert_eq!(cold.thermal_factor(0.0), 1.0);
        assert_eq!(cold.thermal_factor(-1.0), -1.0);
    }

    #[test]
    fn validation() {
        assert!(BathParams::new(0.1, 1.0, 1.0).is_err());
        assert!(BathParams::new(0.1, 0.0, 1.0).is_err());
        assert!(BathParams::new(-0.1, 0.5, 1.0).is_err());
        assert!(bath(0.5).with_temperature(1.0, 0.1).is_err());
        assert!(bath(0.5).with_temperature(-1.0, 0.0).is_err());
    }

    /// Independent evaluation of the subtracted principal value for w < 0 with
    /// the cutoff removed, by substitution w' = |w| u:
    /// gamma |w|^s int_0^inf u^(s-1)/(1+u) du = pi gamma |w|^s / sin(pi s).
    #[test]
    fn pv_negative_frequency_matches_cutoff_free_limit() {
        let mut b = bath(0.3);
        b.omega_m = 1e12;
        let k = b.self_energy_pv(-0.5, Branch::Retarded, 1e-10).unwrap();
        let exact = PI * 0.1 * 0.5f64.powf(0.3) / (PI * 0.3).sin();
        assert_relative_eq!(k.re, exact, max_relative = 1e-5);
    }

    #[test]
    fn pv_approaches_closed_form_with_cutoff() {
        for &s in &[0.3, 0.5, 0.7] {
            for &w in &[-1.0, -0.1, 0.05, 0.5, 1.0] {
                let closed = bath(s).self_energy_closed(w, Branch::Retarded);
                let mut last = f64::INFINITY;
                for &m in &[1e4, 1e6, 1e8] {
                    let mut b = bath(s);
                    b.omega_m = m;
                    let pv = b.self_energy_pv(w, Branch::Retarded, 1e-11).unwrap();
                    let rel = (pv - closed).norm() / closed.norm();
                    // Leading cutoff correction: (|w|/omega_m)^(1-s) sin(pi s/2).
                    let bound = 2.0 * (w.abs() / m).powf(1.0 - s);
                    assert!(rel < bound, "s={s} w={w} m={m} rel={rel:e}");
                    assert!(rel < last);
                    last = rel;
                }
            }
        }
    }

    proptest! {
        #[test]
        fn retarded_imaginary_part_nonpositive(w in 1e-6f64..50.0, s in 0.05f64..0.95) {
            prop_assert!(bath(s).self_energy_closed(w, Branch::Retarded).im <= 0.0);
        }

        #[test]
        fn advanced_is_conjugate(w in -50.0f64..50.0, s in 0.05f64..0.95) {
            let b = bath(s);
            prop_assert_eq!(b.self_energy_closed(w, Branch::Advanced), b.self_energy_closed(w, Branch::Retarded).conj());
        }

        #[test]
        fn thermal_factor_odd_about_mu(x in 1e-6f64..20.0, t in 0.0f64..5.0, mu in -2.0f64..0.0) {
            let b = bath(0.5).with_temperature(t, mu).unwrap();
            let sum = b.thermal_factor(mu + x) + b.thermal_factor(mu - x);
            prop_assert!(sum.abs() <= 1e-12 * b.thermal_factor(mu + x).abs());
        }

        #[test]
        fn pv_imaginary_part_is_pi_rho(w in 1e-3f64..5.0, s in 0.1f64..0.9) {
            let b = bath(s);
            let k = b.self_energy_pv(w, Branch::Advanced, 1e-8).unwrap();
            prop_assert!((k.im - PI * b.spectral_density(w)).abs() < 1e-14);
        }
    }
}
