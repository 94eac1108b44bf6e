//! Gaussian states on phase space, the symplectic form, quadratic
//! Hamiltonians and their exact symplectic-affine flows.
//!
//! Quadratures are ordered `(q1, p1, ..., qN, pN)` with `[q, p] = i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianMatrix, Matrix, Vector};
use crate::tolerances::Tolerances;

/// The symplectic unit `[[0, 1], [-1, 0]]`.
pub fn omega2() -> Matrix {
    Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// Block-diagonal symplectic form on `n_modes` modes.
pub fn omega(n_modes: usize) -> Matrix {
    let w = omega2();
    let mut m = Matrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        m.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&w);
    }
    m
}

/// Number of modes for a phase-space dimension, rejecting odd sizes.
pub fn modes_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::OddDimension(dim));
    }
    Ok(dim / 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: Matrix,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidArgument("need at least one mode".into()));
        }
        Ok(Self {
            n_modes,
            matrix: omega(n_modes),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

pub fn symplectic_form(n_modes: usize) -> Result<SymplecticForm> {
    SymplecticForm::new(n_modes)
}

/// First and second moments of a Gaussian state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    #[serde(with = "crate::serde_mat::vector")]
    pub mean: Vector,
    #[serde(with = "crate::serde_mat::matrix")]
    pub cov: Matrix,
}

/// Outcome of the uncertainty-principle test `cov + i Omega >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateCheck {
    pub valid: bool,
    pub min_eig: f64,
    pub threshold: f64,
}

impl GaussianState {
    /// Builds a state after checking shapes and covariance symmetry. Physical
    /// validity is a separate question; see [`validate_state`].
    pub fn new(mean: Vector, cov: Matrix) -> Result<Self> {
        let s = Self { mean, cov };
        s.check_shape()?;
        linalg::check_symmetric(&s.cov, Tolerances::default().symmetry)?;
        Ok(s)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            mean: Vector::zeros(2 * n_modes),
            cov: Matrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub(crate) fn check_shape(&self) -> Result<usize> {
        let n = modes_for_dim(self.mean.len())?;
        if self.cov.shape() != (2 * n, 2 * n) {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {} but covariance is {:?}",
                self.mean.len(),
                self.cov.shape()
            )));
        }
        Ok(n)
    }
}

/// Minimum eigenvalue of `cov + i Omega`.
pub fn uncertainty_margin(cov: &Matrix) -> Result<f64> {
    let n = modes_for_dim(cov.nrows())?;
    if !cov.is_square() {
        return Err(Error::NotSquare {
            rows: cov.nrows(),
            cols: cov.ncols(),
        });
    }
    let h = HermitianMatrix::from_parts(&linalg::symmetrize(cov), &omega(n))?;
    Ok(linalg::min_eig_hermitian(&h))
}

pub fn validate_state(s: &GaussianState) -> Result<StateCheck> {
    validate_state_with(s, &Tolerances::default())
}

pub fn validate_state_with(s: &GaussianState, tol: &Tolerances) -> Result<StateCheck> {
    s.check_shape()?;
    let min_eig = uncertainty_margin(&s.cov)?;
    let threshold = -tol.state * s.cov.norm().max(1.0);
    Ok(StateCheck {
        valid: min_eig >= threshold,
        min_eig,
        threshold,
    })
}

/// Purity `1 / det(cov)` of a valid state.
pub fn purity(s: &GaussianState) -> Result<f64> {
    let check = validate_state(s)?;
    if !check.valid {
        return Err(Error::InvalidState {
            min_eig: check.min_eig,
        });
    }
    Ok(1.0 / s.cov.determinant())
}

/// Thermal state `cov = nu I`, zero mean.
pub fn thermal_state(nu: f64, n_modes: usize) -> Result<GaussianState> {
    if !(nu >= 1.0) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "thermal parameter must be >= 1, got {nu}"
        )));
    }
    if n_modes == 0 {
        return Err(Error::InvalidArgument("need at least one mode".into()));
    }
    Ok(GaussianState {
        mean: Vector::zeros(2 * n_modes),
        cov: Matrix::identity(2 * n_modes, 2 * n_modes) * nu,
    })
}

/// `nu = (e^x + 1)/(e^x - 1) = coth(x/2)` for `x = beta E > 0`.
pub fn nu_from_beta_energy(beta_energy: f64) -> Result<f64> {
    if !(beta_energy > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta * E must be positive, got {beta_energy}"
        )));
    }
    if beta_energy.is_infinite() {
        return Ok(1.0);
    }
    Ok(1.0 / (0.5 * beta_energy).tanh())
}

/// Inverse of [`nu_from_beta_energy`]; `nu = 1` maps to `+inf`.
pub fn beta_energy_from_nu(nu: f64) -> Result<f64> {
    if !(nu >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "thermal parameter must be >= 1, got {nu}"
        )));
    }
    if nu == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((2.0 / (nu - 1.0)).ln_1p())
}

pub fn nu_from_beta(beta: f64, energy: f64) -> Result<f64> {
    nu_from_beta_energy(beta * energy)
}

pub fn beta_from_nu(nu: f64, energy: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "energy gap must be positive, got {energy}"
        )));
    }
    Ok(beta_energy_from_nu(nu)? / energy)
}

/// `H = X^T F X / 2 + alpha^T X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticHamiltonian {
    #[serde(rename = "F", with = "crate::serde_mat::matrix")]
    pub f: Matrix,
    #[serde(with = "crate::serde_mat::vector")]
    pub alpha: Vector,
}

impl QuadraticHamiltonian {
    pub fn new(f: Matrix, alpha: Vector) -> Result<Self> {
        linalg::check_symmetric(&f, Tolerances::default().symmetry)?;
        modes_for_dim(f.nrows())?;
        if alpha.len() != f.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "F is {:?} but alpha has length {}",
                f.shape(),
                alpha.len()
            )));
        }
        Ok(Self { f, alpha })
    }

    pub fn dim(&self) -> usize {
        self.f.nrows()
    }
}

/// Phase-space map `X -> S X + d` with `S` symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSymplectic {
    pub s: Matrix,
    pub d: Vector,
}

impl AffineSymplectic {
    pub fn identity(dim: usize) -> Self {
        Self {
            s: Matrix::identity(dim, dim),
            d: Vector::zeros(dim),
        }
    }

    /// `max |S Omega S^T - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let w = omega(self.s.nrows() / 2);
        (&self.s * &w * self.s.transpose() - w).amax()
    }
}

/// Exact flow of a time-independent quadratic Hamiltonian for time `t`:
/// `S = exp(Omega F t)` and `d = (exp(Omega F t) - I)/(Omega F) Omega alpha`.
pub fn hamiltonian_flow(h: &QuadraticHamiltonian, t: f64) -> AffineSymplectic {
    let w = omega(h.dim() / 2);
    let gen = &w * &h.f;
    AffineSymplectic {
        s: linalg::mat_exp(&(&gen * t)),
        d: linalg::expm1_div(&gen, t) * (&w * &h.alpha),
    }
}

pub fn apply_affine(s: &GaussianState, m: &AffineSymplectic) -> Result<GaussianState> {
    s.check_shape()?;
    if m.s.shape() != (s.dim(), s.dim()) || m.d.len() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "map of size {:?} applied to a state of dimension {}",
            m.s.shape(),
            s.dim()
        )));
    }
    Ok(GaussianState {
        mean: &m.s * &s.mean + &m.d,
        cov: linalg::symmetrize(&(&m.s * &s.cov * m.s.transpose())),
    })
}
