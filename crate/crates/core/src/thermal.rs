//! A single oscillator bombarded by thermal oscillators.
//!
//! The system covariance is written as `nu I + s_cross X + s_plus Z`, with
//! `X` and `Z` the real Pauli matrices. Under the first-order master
//! equation the three coefficients obey a closed linear system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{self, GaussianChannel, JointSetup};
use crate::error::{Error, Result};
use crate::interpolation::{self, Generators};
use crate::linalg::{self, Matrix, Vector};
use crate::phase_space::{self, omega2, GaussianState};

/// Relative change per unit time below which a trajectory counts as settled.
pub const SETTLED_RATE: f64 = 1e-10;
const SATURATION_TOL: f64 = 1e-12;

pub fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorBathSetup {
    #[serde(rename = "E_S")]
    pub e_s: f64,
    #[serde(rename = "E_A")]
    pub e_a: f64,
    #[serde(rename = "nu_A")]
    pub nu_a: f64,
    #[serde(rename = "G", with = "crate::serde_mat::matrix")]
    pub g: Matrix,
    pub dt: f64,
}

impl OscillatorBathSetup {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_s > 0.0 && self.e_a > 0.0) {
            return Err(Error::InvalidSetup(format!(
                "energy gaps must be positive, got {} and {}",
                self.e_s, self.e_a
            )));
        }
        if !(self.nu_a >= 1.0) || !self.nu_a.is_finite() {
            return Err(Error::InvalidSetup(format!(
                "bath thermal parameter must be at least 1, got {}",
                self.nu_a
            )));
        }
        if self.g.shape() != (2, 2) {
            return Err(Error::InvalidSetup(format!(
                "coupling must be 2x2, got {:?}",
                self.g.shape()
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidSetup(format!(
                "step duration must be positive, got {}",
                self.dt
            )));
        }
        Ok(())
    }

    pub fn det_g(&self) -> f64 {
        self.g.determinant()
    }

    /// `Tr(G^T G)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.g.norm_squared()
    }

    /// The general joint description: Hamiltonians `E I`, no linear terms,
    /// thermal ancilla.
    pub fn to_joint(&self) -> Result<JointSetup> {
        self.validate()?;
        Ok(JointSetup {
            f_s: Matrix::identity(2, 2) * self.e_s,
            alpha_s: Vector::zeros(2),
            f_a: Matrix::identity(2, 2) * self.e_a,
            alpha_a: Vector::zeros(2),
            g: self.g.clone(),
            ancilla: phase_space::thermal_state(self.nu_a, 1)?,
            dt: self.dt,
        })
    }
}

/// Coefficients of a 2x2 symmetric matrix over `{I, X, Z}`. Also used for
/// their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovCoefficients {
    pub nu: f64,
    pub s_cross: f64,
    pub s_plus: f64,
}

impl CovCoefficients {
    pub fn to_matrix(&self) -> Matrix {
        Matrix::identity(2, 2) * self.nu + pauli_x() * self.s_cross + pauli_z() * self.s_plus
    }
}

pub fn decompose_cov(cov: &Matrix) -> Result<CovCoefficients> {
    if cov.shape() != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "expected a 2x2 covariance, got {:?}",
            cov.shape()
        )));
    }
    linalg::check_symmetric(cov, 1e-12)?;
    Ok(CovCoefficients {
        nu: 0.5 * (cov[(0, 0)] + cov[(1, 1)]),
        s_cross: 0.5 * (cov[(0, 1)] + cov[(1, 0)]),
        s_plus: 0.5 * (cov[(0, 0)] - cov[(1, 1)]),
    })
}

/// Time derivatives of the coefficients under the first-order master equation.
pub fn coefficient_rhs(c: &CovCoefficients, s: &OscillatorBathSetup) -> CovCoefficients {
    let det = s.det_g();
    let gt = s.g.transpose();
    let tr_ggt = s.frobenius_sq();
    let tr_x = (&gt * pauli_x() * &s.g).trace();
    let tr_z = (&gt * pauli_z() * &s.g).trace();
    let half_dt_nu = 0.5 * s.dt * s.nu_a;
    CovCoefficients {
        nu: -s.dt * det * c.nu + half_dt_nu * tr_ggt,
        s_cross: -2.0 * s.e_s * c.s_plus - s.dt * det * c.s_cross - half_dt_nu * tr_x,
        s_plus: 2.0 * s.e_s * c.s_cross - s.dt * det * c.s_plus - half_dt_nu * tr_z,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalReport {
    pub has_fixed_point: bool,
    pub nu_infinity: Option<f64>,
    /// Relaxation rate `dt det G` of the coefficients.
    pub rate: f64,
    /// `Tr(G^T G) / (2 det G) nu_A`, defined when `det G > 0`.
    pub nu_tilde: Option<f64>,
    pub cooling_saturated: bool,
    pub passivity_ok: bool,
}

pub fn analyze(s: &OscillatorBathSetup) -> Result<ThermalReport> {
    s.validate()?;
    let det = s.det_g();
    let tr = s.frobenius_sq();
    let has_fixed_point = det > 0.0;
    let nu_tilde = has_fixed_point.then(|| tr / (2.0 * det) * s.nu_a);
    let cooling_saturated = (tr - 2.0 * det).abs() <= SATURATION_TOL * tr.max(1.0);
    let passivity_ok = match nu_tilde {
        Some(nu) => {
            let lhs = phase_space::beta_energy_from_nu(nu)?;
            let rhs = phase_space::beta_energy_from_nu(s.nu_a)?;
            lhs <= rhs || (lhs.is_finite() && lhs - rhs <= SATURATION_TOL * rhs.abs().max(1.0))
        }
        None => false,
    };
    Ok(ThermalReport {
        has_fixed_point,
        nu_infinity: nu_tilde,
        rate: s.dt * det,
        nu_tilde,
        cooling_saturated,
        passivity_ok,
    })
}

/// `g1 I + gw omega`.
pub fn rwa_coupling(g1: f64, gw: f64) -> Matrix {
    Matrix::identity(2, 2) * g1 + omega2() * gw
}

/// Coupling block of `g a_S a_A^dag + h a_S a_A + h.c.` in quadratures,
/// fixed by `det G = |g|^2 - |h|^2` and `Tr(G^T G) = 2(|g|^2 + |h|^2)`.
pub fn ladder_coupling(g: Complex64, h: Complex64) -> Matrix {
    Matrix::identity(2, 2) * g.re + omega2() * g.im + pauli_z() * h.re + pauli_x() * h.im
}

/// How the system is advanced by one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    /// The exact channel induced by one interaction.
    Discrete,
    /// The first-order master equation integrated over one step.
    FirstOrder,
}

/// Generators truncated at first order in `dt`.
pub fn first_order_generators(s: &OscillatorBathSetup) -> Result<Generators> {
    let series = crate::bombardment::closed_form_series(&s.to_joint()?, 1)?;
    series.truncated(1, s.dt)
}

/// The per-step channel for the chosen dynamics.
pub fn step_channel(s: &OscillatorBathSetup, dynamics: Dynamics) -> Result<GaussianChannel> {
    match dynamics {
        Dynamics::Discrete => channel::reduce_from_joint(&s.to_joint()?),
        Dynamics::FirstOrder => interpolation::propagate(&first_order_generators(s)?, s.dt),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub nu_s: f64,
    pub s_cross: f64,
    pub s_plus: f64,
    pub purity: f64,
}

impl TrajectoryPoint {
    fn at(t: f64, state: &GaussianState) -> Result<Self> {
        let c = decompose_cov(&state.cov)?;
        Ok(Self {
            t,
            nu_s: c.nu,
            s_cross: c.s_cross,
            s_plus: c.s_plus,
            purity: 1.0 / state.cov.determinant(),
        })
    }
}

/// `steps + 1` points starting at `t = 0`, one per interaction.
pub fn simulate(
    s: &OscillatorBathSetup,
    initial: &GaussianState,
    steps: usize,
    dynamics: Dynamics,
) -> Result<Vec<TrajectoryPoint>> {
    if initial.dim() != 2 {
        return Err(Error::DimensionMismatch("system must be a single mode".into()));
    }
    let c = step_channel(s, dynamics)?;
    let mut state = initial.clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(TrajectoryPoint::at(0.0, &state)?);
    for n in 1..=steps {
        state = channel::apply(&c, &state)?;
        out.push(TrajectoryPoint::at(n as f64 * s.dt, &state)?);
    }
    Ok(out)
}

/// Fixed point of `cov -> T cov T^T + R`, if the map is contracting.
pub fn stationary_covariance(c: &GaussianChannel) -> Result<Matrix> {
    let dim = c.dim();
    let tt = linalg::tensor_product(&c.t, &c.t);
    let spectral_radius = linalg::eigenvalues(&c.t)?
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if spectral_radius >= 1.0 {
        return Err(Error::InvalidSetup(format!(
            "channel is not contracting (spectral radius {spectral_radius}), no fixed point"
        )));
    }
    let lhs = Matrix::identity(dim * dim, dim * dim) - tt;
    let v = lhs
        .lu()
        .solve(&linalg::vec(&c.r))
        .ok_or(Error::SingularInput { modulus: 0.0 })?;
    Ok(linalg::symmetrize(&linalg::unvec(&v, dim, dim)?))
}

/// Iterates the channel until the covariance changes by less than
/// [`SETTLED_RATE`] relative per unit time. Returns the settling time and
/// state, or `None` if `max_steps` is exhausted first.
pub fn run_to_fixed_point(
    c: &GaussianChannel,
    dt: f64,
    initial: &GaussianState,
    max_steps: usize,
) -> Result<Option<(f64, GaussianState)>> {
    let mut state = initial.clone();
    for n in 1..=max_steps {
        let next = channel::apply(c, &state)?;
        let change = (&next.cov - &state.cov).norm() / state.cov.norm() / dt;
        state = next;
        if change < SETTLED_RATE {
            return Ok(Some((n as f64 * dt, state)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::thermal_state;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(g: Matrix) -> OscillatorBathSetup {
        OscillatorBathSetup {
            e_s: 1.0,
            e_a: 1.0,
            nu_a: 3.0,
            g,
            dt: 0.05,
        }
    }

    #[test]
    fn decomposition_examples() {
        let c = decompose_cov(&(Matrix::identity(2, 2) * 2.5)).unwrap();
        assert_eq!((c.nu, c.s_cross, c.s_plus), (2.5, 0.0, 0.0));
        let c = decompose_cov(&Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert_eq!((c.nu, c.s_cross, c.s_plus), (2.0, 1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..100 {
            let m = crate::random::symmetric(&mut rng, 2, 3.0);
            let back = decompose_cov(&m).unwrap().to_matrix();
            assert!((back - m).amax() <= 1e-14);
        }
        assert!(decompose_cov(&Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn free_rotation_without_coupling() {
        let s = setup(Matrix::zeros(2, 2));
        let c = CovCoefficients { nu: 2.0, s_cross: 0.3, s_plus: -0.4 };
        let d = coefficient_rhs(&c, &s);
        assert_eq!(d.nu, 0.0);
        assert_abs_diff_eq!(d.s_cross, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(d.s_plus, 0.6, epsilon = 1e-15);
    }

    #[test]
    fn rwa_fixed_point_is_stationary() {
        let s = setup(rwa_coupling(0.3, 0.0));
        let d = coefficient_rhs(&CovCoefficients { nu: 3.0, s_cross: 0.0, s_plus: 0.0 }, &s);
        assert_abs_diff_eq!(d.nu, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.s_cross, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.s_plus, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn coefficient_rhs_matches_master_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..100 {
            let s = OscillatorBathSetup {
                e_s: rng.random_range(0.2..2.0),
                e_a: rng.random_range(0.2..2.0),
                nu_a: rng.random_range(1.0..4.0),
                g: crate::random::matrix(&mut rng, 2, 2, 1.0),
                dt: rng.random_range(0.01..0.2),
            };
            let state = crate::random::valid_state(&mut rng, 1, 1.0, 3.0);
            let (_, cov_dot) = interpolation::master_rhs(&first_order_generators(&s).unwrap(), &state)
                .unwrap();
            let expected = decompose_cov(&linalg::symmetrize(&cov_dot)).unwrap();
            let got = coefficient_rhs(&decompose_cov(&state.cov).unwrap(), &s);
            assert_abs_diff_eq!(got.nu, expected.nu, epsilon = 1e-12);
            assert_abs_diff_eq!(got.s_cross, expected.s_cross, epsilon = 1e-12);
            assert_abs_diff_eq!(got.s_plus, expected.s_plus, epsilon = 1e-12);
        }
    }

    #[test]
    fn analysis_examples() {
        let r = analyze(&setup(rwa_coupling(0.2, 0.1))).unwrap();
        assert!(r.has_fixed_point && r.cooling_saturated && r.passivity_ok);
        assert_abs_diff_eq!(r.nu_infinity.unwrap(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.rate, 0.05 * 0.05, epsilon = 1e-16);

        let r = analyze(&setup(Matrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.0]))).unwrap();
        assert!(!r.has_fixed_point);
        assert_eq!(r.nu_infinity, None);
        assert!(!r.passivity_ok);

        let g = 0.3;
        let r = analyze(&setup(Matrix::from_row_slice(2, 2, &[2.0 * g, 0.0, 0.0, g]))).unwrap();
        assert_abs_diff_eq!(r.nu_infinity.unwrap(), 1.25 * 3.0, epsilon = 1e-14);
        assert!(!r.cooling_saturated);
        assert!(r.passivity_ok);

        let bad = OscillatorBathSetup { nu_a: 0.5, ..setup(Matrix::identity(2, 2)) };
        assert!(matches!(analyze(&bad), Err(Error::InvalidSetup(_))));
    }

    #[test]
    fn couplings() {
        let g = 0.4;
        assert_eq!(rwa_coupling(g, 0.0), Matrix::identity(2, 2) * g);
        assert_eq!(rwa_coupling(0.0, g), omega2() * g);
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..100 {
            let (g1, gw) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let r = analyze(&setup(rwa_coupling(g1, gw))).unwrap();
            assert_abs_diff_eq!(r.nu_infinity.unwrap(), 3.0, epsilon = 1e-12);

            let gc = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let hc = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let m = ladder_coupling(gc, hc);
            assert_abs_diff_eq!(m.determinant(), gc.norm_sqr() - hc.norm_sqr(), epsilon = 1e-12);
            assert_abs_diff_eq!(m.norm_squared(), 2.0 * (gc.norm_sqr() + hc.norm_sqr()), epsilon = 1e-12);
        }
        let r = analyze(&setup(ladder_coupling(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)))).unwrap();
        assert_abs_diff_eq!(r.nu_infinity.unwrap(), 5.0, epsilon = 1e-12);
        let r = analyze(&setup(ladder_coupling(Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.4)))).unwrap();
        assert!(!r.has_fixed_point);
        let r = analyze(&setup(ladder_coupling(Complex64::new(0.2, 0.1), Complex64::new(0.0, 0.0)))).unwrap();
        assert!(r.cooling_saturated);
    }

    #[test]
    fn frobenius_bound_and_cooling_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..10_000 {
            let g = crate::random::matrix(&mut rng, 2, 2, 2.0);
            assert!(g.norm_squared() >= 2.0 * g.determinant() - 1e-14);
            let s = OscillatorBathSetup { g, ..setup(Matrix::zeros(2, 2)) };
            if let Some(nu) = analyze(&s).unwrap().nu_infinity {
                assert!(nu >= 3.0 * (1.0 - 1e-14));
            }
        }
    }

    #[test]
    fn first_order_flow_settles_at_effective_temperature() {
        let s = setup(Matrix::from_row_slice(2, 2, &[0.4, 0.1, -0.2, 0.3]));
        let nu_tilde = analyze(&s).unwrap().nu_tilde.unwrap();
        let c = step_channel(&s, Dynamics::FirstOrder).unwrap();
        let sigma = stationary_covariance(&c).unwrap();
        let coeffs = decompose_cov(&sigma).unwrap();
        assert_abs_diff_eq!(coeffs.nu, nu_tilde, epsilon = 1e-9);
        assert!(coeffs.s_cross.abs() < 0.05 && coeffs.s_plus.abs() < 0.05);
        let (t, settled) = run_to_fixed_point(&c, s.dt, &GaussianState::vacuum(1), 2_000_000)
            .unwrap()
            .unwrap();
        assert!(t > 0.0);
        assert!((settled.cov - sigma).amax() < 1e-6);
    }

    #[test]
    fn simulation_starts_at_initial_state() {
        let s = setup(rwa_coupling(0.1, 0.0));
        let init = thermal_state(2.0, 1).unwrap();
        let traj = simulate(&s, &init, 10, Dynamics::Discrete).unwrap();
        assert_eq!(traj.len(), 11);
        assert_eq!(traj[0].nu_s, 2.0);
        assert_abs_diff_eq!(traj[0].purity, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(traj[10].t, 0.5, epsilon = 1e-15);
        assert!(traj.windows(2).all(|w| w[1].nu_s > w[0].nu_s));
        assert!(stationary_covariance(&step_channel(&setup(Matrix::zeros(2, 2)), Dynamics::Discrete).unwrap()).is_err());
    }

    #[test]
    fn json_field_names() {
        let s = setup(Matrix::identity(2, 2));
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        for key in ["E_S", "E_A", "nu_A", "G", "dt"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let r = serde_json::to_value(analyze(&setup(Matrix::zeros(2, 2))).unwrap()).unwrap();
        assert!(r["nu_infinity"].is_null());
    }
}
