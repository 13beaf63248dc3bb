//! Keldysh inverse Green's functions of the cavity-atom system, the rotated
//! x-field theory and its low-frequency coefficients.
//!
//! Matrices act on the Nambu pair `(a(w), a*(-w))` (photon) or
//! `(b(w), b*(-w))` (atom). Retarded blocks carry the `+i0` of
//! `P^R_ph = w - Delta + i kappa`, and `P^A = (P^R)^dagger`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::bath::{BathParams, Branch};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// 2x2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    /// Inverse using a caller-supplied determinant (which may be computed
    /// more accurately than by expanding the entries).
    pub fn inverse_with_det(&self, det: Complex64) -> Self {
        let m = &self.0;
        Mat2::new(m[1][1] / det, -m[0][1] / det, -m[1][0] / det, m[0][0] / det)
    }

    pub fn inverse(&self) -> Self {
        self.inverse_with_det(self.det())
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0] * z, m[0][1] * z, m[1][0] * z, m[1][1] * z)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(c(-1.0))
    }
}

/// Retarded and Keldysh blocks of an inverse Green's function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keldysh2 {
    pub r: Mat2,
    pub k: Mat2,
}

impl Keldysh2 {
    pub fn advanced(&self) -> Mat2 {
        self.r.adjoint()
    }
}

/// Which baths are attached and at what temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Cavity loss and colored bath, with T_b = 0 or mu_b < 0.
    Both,
    /// Both baths with T_b > 0 and mu_b = 0.
    Thermal,
    /// Cavity loss only.
    MbOnly,
    /// Colored bath only, T_b = 0.
    NmbOnly,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Both, Scenario::Thermal, Scenario::MbOnly, Scenario::NmbOnly];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Both => "both",
            Scenario::Thermal => "thermal",
            Scenario::MbOnly => "mb-only",
            Scenario::NmbOnly => "nmb-only",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(Scenario::Both),
            "thermal" => Ok(Scenario::Thermal),
            "mb-only" => Ok(Scenario::MbOnly),
            "nmb-only" => Ok(Scenario::NmbOnly),
            other => Err(Error::invalid(format!(
                "unknown scenario '{other}' (expected both, thermal, mb-only, nmb-only)"
            ))),
        }
    }
}

/// How the atomic self-energy is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelfEnergyModel {
    /// Infinite-cutoff closed form.
    Closed,
    /// Finite-cutoff principal-value quadrature at the given relative tolerance.
    PrincipalValue { rel_tol: f64 },
}

/// Microscopic parameters of the driven-dissipative model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Cavity detuning.
    pub delta: f64,
    /// Cavity loss rate (ignored when the Markovian bath is off).
    pub kappa: f64,
    pub omega_z: f64,
    /// Light-matter coupling; the disordered side is `y <= y_c`.
    pub y: f64,
    /// Colored bath; `bath.omega_z` is kept equal to `omega_z`.
    pub bath: BathParams,
    pub markovian_on: bool,
    pub nonmarkovian_on: bool,
    /// Number of atoms; `None` is the thermodynamic limit.
    pub n_atoms: Option<f64>,
    pub self_energy: SelfEnergyModel,
}

impl ModelParams {
    /// Both baths on, zero bath temperature, `y = 0`.
    pub fn new(delta: f64, kappa: f64, omega_z: f64, gamma: f64, s: f64) -> Result<Self> {
        let p = Self {
            delta,
            kappa,
            omega_z,
            y: 0.0,
            bath: BathParams::new(gamma, s, omega_z)?,
            markovian_on: true,
            nonmarkovian_on: true,
            n_atoms: None,
            self_energy: SelfEnergyModel::Closed,
        };
        p.validate()?;
        Ok(p)
    }

    /// Reference parameters Delta = 2, kappa = 0.5, gamma = 0.1, omega_z = 1.
    pub fn reference(s: f64) -> Result<Self> {
        Self::new(2.0, 0.5, 1.0, 0.1, s)
    }

    /// Parameters configured for `scenario`, starting from `self`.
    /// The thermal scenario uses `t_b` (must be > 0) and sets mu_b = 0.
    pub fn for_scenario(mut self, scenario: Scenario, t_b: f64) -> Result<Self> {
        match scenario {
            Scenario::Both => {
                self.markovian_on = true;
                self.nonmarkovian_on = true;
            }
            Scenario::Thermal => {
                self.markovian_on = true;
                self.nonmarkovian_on = true;
                self.bath = self.bath.with_temperature(t_b, 0.0)?;
                if t_b <= 0.0 {
                    return Err(Error::invalid("thermal scenario needs T_b > 0"));
                }
            }
            Scenario::MbOnly => {
                self.markovian_on = true;
                self.nonmarkovian_on = false;
            }
            Scenario::NmbOnly => {
                self.markovian_on = false;
                self.nonmarkovian_on = true;
                self.bath = self.bath.with_temperature(0.0, self.bath.mu_b)?;
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid(format!("Delta = {} must be > 0", self.delta)));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa = {} must be >= 0", self.kappa)));
        }
        if !(self.omega_z > 0.0 && self.omega_z.is_finite()) {
            return Err(Error::invalid(format!("omega_z = {} must be > 0", self.omega_z)));
        }
        if self.bath.omega_z != self.omega_z {
            return Err(Error::invalid("bath.omega_z must equal omega_z"));
        }
        self.bath.validate()?;
        if !(self.y >= 0.0 && self.y.is_finite()) {
            return Err(Error::invalid(format!("y = {} must be >= 0", self.y)));
        }
        if !self.markovian_on && !self.nonmarkovian_on {
            return Err(Error::invalid("at least one bath must be on"));
        }
        if !self.markovian_on && self.bath.t_b > 0.0 {
            return Err(Error::invalid(
                "finite bath temperature is only modelled with both baths on",
            ));
        }
        if let Some(n) = self.n_atoms {
            if !(n > 0.0) {
                return Err(Error::invalid(format!("N = {n} must be > 0")));
            }
        }
        if let SelfEnergyModel::PrincipalValue { rel_tol } = self.self_energy {
            if !(rel_tol > 0.0) {
                return Err(Error::invalid("principal-value tolerance must be > 0"));
            }
        }
        Ok(())
    }

    /// Cavity loss actually in effect.
    pub fn kappa_on(&self) -> f64 {
        if self.markovian_on {
            self.kappa
        } else {
            0.0
        }
    }

    /// Bath coupling actually in effect.
    pub fn gamma_on(&self) -> f64 {
        if self.nonmarkovian_on {
            self.bath.gamma
        } else {
            0.0
        }
    }

    fn active_bath(&self) -> BathParams {
        let mut b = self.bath;
        b.gamma = self.gamma_on();
        b
    }

    pub fn scenario(&self) -> Scenario {
        if !self.nonmarkovian_on {
            Scenario::MbOnly
        } else if !self.markovian_on {
            Scenario::NmbOnly
        } else if self.bath.t_b > 0.0 && self.bath.mu_b == 0.0 {
            Scenario::Thermal
        } else {
            Scenario::Both
        }
    }

    /// y_c = sqrt((Delta^2 + kappa^2) omega_z / Delta).
    pub fn critical_coupling(&self) -> f64 {
        let k = self.kappa_on();
        ((self.delta * self.delta + k * k) * self.omega_z / self.delta).sqrt()
    }

    /// Copy with `y = y_c (1 - rel)`.
    pub fn at_distance(mut self, rel: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rel) {
            return Err(Error::invalid(format!("relative distance {rel} must lie in [0, 1]")));
        }
        self.y = self.critical_coupling() * (1.0 - rel);
        Ok(self)
    }

    /// delta_y = y_c - y.
    pub fn delta_y(&self) -> f64 {
        self.critical_coupling() - self.y
    }

    fn self_energy(&self, omega: f64, branch: Branch) -> Result<Complex64> {
        let b = self.active_bath();
        if b.gamma == 0.0 {
            return Ok(c(0.0));
        }
        match self.self_energy {
            SelfEnergyModel::Closed => Ok(b.self_energy_closed(omega, branch)),
            SelfEnergyModel::PrincipalValue { rel_tol } => b.self_energy_pv(omega, branch, rel_tol),
        }
    }

    /// Atomic Keldysh component `F_b(w) (P^R_at - P^A_at)`, consistent with
    /// whichever self-energy model is in use.
    fn atom_keldysh(&self, omega: f64) -> Result<Complex64> {
        let b = self.active_bath();
        if b.gamma == 0.0 || omega <= 0.0 {
            return Ok(c(0.0));
        }
        let im = self.self_energy(omega, Branch::Retarded)?.im;
        Ok(I * (-2.0 * im * b.thermal_factor(omega)))
    }
}

/// Uncoupled inverse Green's functions at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareInverse {
    pub photon_r: Complex64,
    pub photon_k: Complex64,
    pub atom_r: Complex64,
    pub atom_k: Complex64,
}

impl BareInverse {
    pub fn photon_a(&self) -> Complex64 {
        self.photon_r.conj()
    }
    pub fn atom_a(&self) -> Complex64 {
        self.atom_r.conj()
    }
}

/// `P^R_ph = w - Delta + i kappa`, `P^K_ph = 2 i kappa`,
/// `P^R_at = w - omega_z - K^R(w)`, `P^K_at = 2 i pi rho(w) F_b(w)`.
pub fn bare_inverse(omega: f64, p: &ModelParams) -> Result<BareInverse> {
    let k = p.kappa_on();
    Ok(BareInverse {
        photon_r: Complex64::new(omega - p.delta, k),
        photon_k: Complex64::new(0.0, 2.0 * k),
        atom_r: c(omega - p.omega_z) - p.self_energy(omega, Branch::Retarded)?,
        atom_k: p.atom_keldysh(omega)?,
    })
}

/// Photon self-energy from the atoms and its shift from the critical value,
/// `dSigma = Sigma(w, y) - Sigma(0, y_c)`, evaluated without cancellation.
#[derive(Debug, Clone, Copy)]
struct PhotonSelfEnergy {
    sigma: Complex64,
    shift: Complex64,
    /// `d(w)`, purely imaginary.
    keldysh: Complex64,
}

fn photon_self_energy(omega: f64, p: &ModelParams) -> Result<PhotonSelfEnergy> {
    let wz = p.omega_z;
    let y = p.y;
    let yc = p.critical_coupling();
    let kr_p = p.self_energy(omega, Branch::Retarded)?;
    let ka_m = p.self_energy(-omega, Branch::Advanced)?;
    let pr_p = c(omega - wz) - kr_p;
    let pa_m = c(-omega - wz) - ka_m;
    // 1/P = -1/wz + (P + wz)/(wz P)
    let bracket = (c(omega) - kr_p) / pr_p + (c(-omega) - ka_m) / pa_m;
    let sigma_c = yc * yc / (2.0 * wz);
    let shift = c((y - yc) * (y + yc) / (2.0 * wz)) - bracket * (y * y / (4.0 * wz));
    let keldysh =
        (p.atom_keldysh(omega)? / pr_p.norm_sqr() + p.atom_keldysh(-omega)? / pa_m.norm_sqr()) * (y * y / 4.0);
    Ok(PhotonSelfEnergy {
        sigma: c(sigma_c) + shift,
        shift,
        keldysh,
    })
}

/// Effective 2x2 photon inverse after integrating out the atoms.
pub fn photon_effective_inverse(omega: f64, p: &ModelParams) -> Result<Keldysh2> {
    Ok(photon_inverse_with_shift(omega, p)?.0)
}

fn photon_inverse_with_shift(omega: f64, p: &ModelParams) -> Result<(Keldysh2, Complex64)> {
    let k = p.kappa_on();
    let se = photon_self_energy(omega, p)?;
    let s = se.sigma;
    let d = se.keldysh;
    let pr_p = Complex64::new(omega - p.delta, k);
    let pa_m = Complex64::new(-omega - p.delta, -k);
    let pk = Complex64::new(0.0, 2.0 * k);
    let inv = Keldysh2 {
        r: Mat2::new(pr_p + s, s, s, pa_m + s),
        k: Mat2::new(pk + d, d, d, pk + d),
    };
    Ok((inv, se.shift))
}

/// Effective 2x2 atomic inverse after integrating out the photon.
pub fn atom_effective_inverse(omega: f64, p: &ModelParams) -> Result<Keldysh2> {
    let k = p.kappa_on();
    let y2 = p.y * p.y;
    let ph_r = |w: f64| Complex64::new(w - p.delta, k);
    let sigma = -(ph_r(omega).inv() + ph_r(-omega).conj().inv()) * (y2 / 4.0);
    let pk = Complex64::new(0.0, 2.0 * k);
    let g = (pk / ph_r(omega).norm_sqr() + pk / ph_r(-omega).norm_sqr()) * (y2 / 4.0);
    let at_r_p = c(omega - p.omega_z) - p.self_energy(omega, Branch::Retarded)?;
    let at_a_m = c(-omega - p.omega_z) - p.self_energy(-omega, Branch::Advanced)?;
    Ok(Keldysh2 {
        r: Mat2::new(at_r_p + sigma, sigma, sigma, at_a_m + sigma),
        k: Mat2::new(p.atom_keldysh(omega)? + g, g, g, p.atom_keldysh(-omega)? + g),
    })
}

/// Exact photon Green's functions `G^R = (P^R)^-1`, `G^K = -G^R P^K G^A`.
///
/// The determinant is evaluated as `-2 Delta dSigma - w^2 - 2 i kappa w`,
/// which stays accurate arbitrarily close to criticality.
#[derive(Debug, Clone, Copy)]
pub struct PhotonGreens {
    pub r: Mat2,
    pub k: Mat2,
}

pub fn photon_greens(omega: f64, p: &ModelParams) -> Result<PhotonGreens> {
    let (inv, shift) = photon_inverse_with_shift(omega, p)?;
    let k = p.kappa_on();
    let det = -shift * (2.0 * p.delta) - Complex64::new(omega * omega, 2.0 * k * omega);
    let gr = inv.r.inverse_with_det(det);
    let gk = (gr * inv.k * gr.adjoint()).scale(c(-1.0));
    Ok(PhotonGreens { r: gr, k: gk })
}

/// Rotation matrices `(R_cl, R_q)` taking `(a(w), a*(-w))` to `(x, z)`.
pub fn photon_rotation(p: &ModelParams) -> (Mat2, Mat2) {
    let ph = (-p.delta).atan2(p.kappa_on());
    let e = |x: f64| Complex64::from_polar(1.0, x);
    (
        Mat2::new(c(1.0), c(1.0), e(-ph), e(ph)),
        Mat2::new(c(1.0), c(1.0), -e(ph), -e(-ph)),
    )
}

/// Rotation taking `(b(w), b*(-w))` to `(phi, zeta)`.
pub fn atom_rotation() -> (Mat2, Mat2) {
    let r = Mat2::new(c(1.0), c(1.0), I, -I);
    (r, r)
}

/// Rotates an inverse Green's function with `(R_cl, R_q)` and integrates out
/// the second rotated field exactly, returning `(P^R, P^K)` of the first.
pub fn reduce_rotated(inv: &Keldysh2, r_cl: &Mat2, r_q: &Mat2) -> (Complex64, Complex64) {
    let icl = r_cl.inverse();
    let iq = r_q.inverse();
    let pr = iq.adjoint() * inv.r * icl;
    let pk = iq.adjoint() * inv.k * iq;
    let pa = pr.adjoint();
    let (r, k, a) = (&pr.0, &pk.0, &pa.0);
    // Gaussian elimination of (z_cl, z_q) from the 4x4 form [[0, P^A], [P^R, P^K]].
    let zz = Mat2::new(c(0.0), a[1][1], r[1][1], k[1][1]);
    let xz = Mat2::new(c(0.0), a[0][1], r[0][1], k[0][1]);
    let zx = Mat2::new(c(0.0), a[1][0], r[1][0], k[1][0]);
    let corr = xz * zz.inverse() * zx;
    (r[0][0] - corr.0[1][0], k[0][0] - corr.0[1][1])
}

/// `(P^R_x, P^K_x)` of the x field, exact in frequency:
/// `P^R_x = dSigma + i w chi + w^2/(2 Delta)`,
/// `P^K_x = d(w) + 2 i chi M [1 + w^2 (1 + chi^2)/(4 M^2)]`,
/// with `chi = kappa/Delta`, `M = Delta (1 + chi^2)/2`.
pub fn x_inverse_exact(omega: f64, p: &ModelParams) -> Result<(Complex64, Complex64)> {
    p.validate()?;
    let chi = p.kappa_on() / p.delta;
    let m = 0.5 * p.delta * (1.0 + chi * chi);
    let se = photon_self_energy(omega, p)?;
    let pr = se.shift + Complex64::new(omega * omega / (2.0 * p.delta), omega * chi);
    let pk = se.keldysh
        + Complex64::new(
            0.0,
            2.0 * chi * m * (1.0 + omega * omega * (1.0 + chi * chi) / (4.0 * m * m)),
        );
    Ok((pr, pk))
}

/// `(P^R_phi, P^K_phi)` of the atomic phi field by exact rotation and elimination.
pub fn phi_inverse_exact(omega: f64, p: &ModelParams) -> Result<(Complex64, Complex64)> {
    p.validate()?;
    let inv = atom_effective_inverse(omega, p)?;
    let (rc, rq) = atom_rotation();
    Ok(reduce_rotated(&inv, &rc, &rq))
}

/// Constants of the single-field low-frequency theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowFreqCoeffs {
    pub r: f64,
    pub v_i: f64,
    pub v_r: f64,
    /// Amplitude of `v (-i w)^s`.
    pub v: f64,
    pub kappa_eff: f64,
    pub g_ph: f64,
    pub g_at: f64,
    /// `None` without cavity loss.
    pub t_eff: Option<f64>,
    pub r_at: f64,
    pub v_at_i: f64,
    pub v_at_r: f64,
}

pub fn lowfreq_coefficients(p: &ModelParams) -> Result<LowFreqCoeffs> {
    p.validate()?;
    let s = p.bath.s;
    let d = p.delta;
    let k = p.kappa_on();
    let wz = p.omega_z;
    let g = p.gamma_on();
    let yc = p.critical_coupling();
    let dy = p.delta_y();
    let d2k2 = d * d + k * k;
    let v_i = yc * yc / (4.0 * wz * wz) * PI * g;
    let half = 0.5 * PI * s;
    Ok(LowFreqCoeffs {
        r: yc * dy / wz,
        v_i,
        v_r: v_i / half.tan(),
        v: v_i / (half.sin() * wz.powf(s)),
        kappa_eff: 0.5 * k * (1.0 + k * k / (d * d)),
        g_ph: d2k2 * d2k2 / (2.0 * d * d * wz),
        g_at: 0.5 * yc * yc * d / d2k2,
        t_eff: (k > 0.0).then(|| d2k2 / (4.0 * d)),
        r_at: dy * yc * d / d2k2,
        v_at_i: 0.25 * PI * g,
        v_at_r: 0.25 * PI * g * (1.0 / (PI * s).sin() + 1.0 / (PI * s).tan()),
    })
}

/// Low-frequency `(P^R_x, P^K_x)` of the scenario `p` describes.
pub fn x_inverse_lowfreq(omega: f64, p: &ModelParams) -> Result<(Complex64, Complex64)> {
    let co = lowfreq_coefficients(p)?;
    let s = p.bath.s;
    let wz = p.omega_z;
    let sgn = if omega > 0.0 {
        1.0
    } else if omega < 0.0 {
        -1.0
    } else {
        0.0
    };
    let chi = p.kappa_on() / p.delta;
    let scaled = (omega.abs() / wz).powf(s);
    let fractional = c(-co.r) + Complex64::new(-co.v_r, co.v_i * sgn) * scaled;
    Ok(match p.scenario() {
        Scenario::Both => (fractional, Complex64::new(0.0, 2.0 * co.kappa_eff)),
        Scenario::Thermal => {
            if omega == 0.0 {
                return Err(Error::invalid("thermal low-frequency noise is singular at w = 0"));
            }
            let kk = 4.0 * co.v_i * p.bath.t_b * wz.powf(-s) * omega.abs().powf(s - 1.0);
            (fractional, Complex64::new(0.0, kk))
        }
        Scenario::MbOnly => (
            Complex64::new(-co.r, omega * chi),
            Complex64::new(0.0, 2.0 * co.kappa_eff),
        ),
        Scenario::NmbOnly => (fractional, Complex64::new(0.0, 2.0 * co.v_i * scaled)),
    })
}

/// Field whose distribution function is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    PhotonX,
    AtomPhi,
}

fn ratio(pr: Complex64, pk: Complex64) -> Result<f64> {
    let im = pr.im;
    if im == 0.0 {
        return Err(Error::invalid("distribution function undefined where Im P^R = 0"));
    }
    // F = P^K / (P^R - P^A) with P^K = i k and P^R - P^A = 2 i Im P^R.
    Ok(pk.im / (2.0 * im))
}

/// Exact `F(w) = G^K / (G^R - G^A) = P^K / (P^R - P^A)`.
pub fn distribution_function(which: FieldKind, omega: f64, p: &ModelParams) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::invalid("distribution function is evaluated at w != 0"));
    }
    let (pr, pk) = match which {
        FieldKind::PhotonX => x_inverse_exact(omega, p)?,
        FieldKind::AtomPhi => phi_inverse_exact(omega, p)?,
    };
    ratio(pr, pk)
}

/// Low-frequency prediction of `F_x(w)`: `2 T_eff/w` (cavity loss only),
/// `(kappa_eff/v_I)|omega_z/w|^s sgn w` (both baths), `2 T_b/w` (thermal),
/// `sgn w` (colored bath only).
pub fn distribution_lowfreq(omega: f64, p: &ModelParams) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::invalid("distribution function is evaluated at w != 0"));
    }
    let (pr, pk) = x_inverse_lowfreq(omega, p)?;
    ratio(pr, pk)
}

/// Truncated polynomial in (b, eps = 1/N): coefficients of b^i eps^j, i < 6, j < 2.
#[derive(Debug, Clone, Copy)]
struct Series([[Complex64; 2]; 6]);

impl Series {
    fn zero() -> Self {
        Series([[c(0.0); 2]; 6])
    }
    fn term(coef: Complex64, i: usize, j: usize) -> Self {
        let mut s = Self::zero();
        s.0[i][j] = coef;
        s
    }
    fn add(&self, o: &Series) -> Series {
        let mut out = *self;
        for i in 0..6 {
            for j in 0..2 {
                out.0[i][j] += o.0[i][j];
            }
        }
        out
    }
    fn scale(&self, z: Complex64) -> Series {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= z);
        out
    }
    fn mul(&self, o: &Series) -> Series {
        let mut out = Self::zero();
        for i in 0..6 {
            for j in 0..2 {
                for k in 0..6 - i {
                    for l in 0..2 - j {
                        out.0[i + k][j + l] += self.0[i][j] * o.0[k][l];
                    }
                }
            }
        }
        out
    }
    fn re(&self) -> Series {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v = c(v.re));
        out
    }
}

/// Linear coefficient and `N` times the cubic coefficient of the stationary
/// equation for a real atomic field `b`, obtained by eliminating the photon
/// from the two mean-field equations at `w = 0`:
/// `P_ph(0) a - y b (1 - b^2/4N) = 0` and
/// `P_at(0) b - y Re[a] (1 - (b Re b + |b|^2/2)/2N) = 0`.
pub fn mean_field_atomic_equation(p: &ModelParams) -> Result<(f64, f64)> {
    p.validate()?;
    let y = c(p.y);
    let b = Series::term(c(1.0), 1, 0);
    let b2 = b.mul(&b);
    let eps = Series::term(c(1.0), 0, 1);
    let one = Series::term(c(1.0), 0, 0);
    let pph = Complex64::new(-p.delta, p.kappa_on());
    let pat = c(-p.omega_z);
    let a = b.mul(&one.add(&eps.mul(&b2).scale(c(-0.25)))).scale(y / pph);
    let sat = one.add(&eps.mul(&b2.scale(c(1.5))).scale(c(-0.5)));
    let h = b.scale(pat).add(&a.re().mul(&sat).scale(-y));
    Ok((h.0[1][0].re, h.0[3][1].re))
}

/// Quartic coupling of the phi theory from the mean-field route.
///
/// The equation is normalised so that its linear coefficient is the mass
/// `-P^R_phi(0) = (y_c^2 - y^2) Delta / (2 (Delta^2 + kappa^2))` of the
/// Gaussian action, then evaluated at `y = y_c`.
pub fn mean_field_g_at(p: &ModelParams) -> Result<f64> {
    let yc = p.critical_coupling();
    let d2k2 = p.delta * p.delta + p.kappa_on() * p.kappa_on();
    let probe = ModelParams { y: 0.5 * yc, ..*p };
    let (lin, _) = mean_field_atomic_equation(&probe)?;
    let mass = (yc * yc - probe.y * probe.y) * p.delta / (2.0 * d2k2);
    let norm = mass / lin;
    let (_, cubic) = mean_field_atomic_equation(&ModelParams { y: yc, ..*p })?;
    Ok(norm * cubic)
}
