//! Random test instances: states, channels, setups and generators.
//!
//! Everything takes the generator by reference so sweeps are reproducible
//! from a single seed.

use rand::Rng;

use crate::channel::{GaussianChannel, JointSetup};
use crate::interpolation::Generators;
use crate::linalg::{self, Matrix, Vector};
use crate::phase_space::{omega, GaussianState};

/// Entries uniform in `[-scale, scale]`.
pub fn matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..=scale))
}

pub fn vector<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> Vector {
    Vector::from_fn(dim, |_, _| rng.random_range(-scale..=scale))
}

pub fn symmetric<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> Matrix {
    linalg::symmetrize(&matrix(rng, dim, dim, scale))
}

/// `exp(Omega H)` for a random symmetric `H` of the given scale.
pub fn symplectic<R: Rng + ?Sized>(rng: &mut R, n_modes: usize, scale: f64) -> Matrix {
    let h = symmetric(rng, 2 * n_modes, scale);
    linalg::mat_exp(&(omega(n_modes) * h))
}

/// `S diag(nu) S^T` with symplectic eigenvalues drawn from `[nu_min, nu_max]`
/// (both at least 1) and a random mean.
pub fn valid_state<R: Rng + ?Sized>(
    rng: &mut R,
    n_modes: usize,
    nu_min: f64,
    nu_max: f64,
) -> GaussianState {
    let s = symplectic(rng, n_modes, 0.5);
    let mut diag = Vector::zeros(2 * n_modes);
    for k in 0..n_modes {
        let nu = if nu_max > nu_min {
            rng.random_range(nu_min..=nu_max)
        } else {
            nu_min
        };
        diag[2 * k] = nu;
        diag[2 * k + 1] = nu;
    }
    let cov = linalg::symmetrize(&(&s * Matrix::from_diagonal(&diag) * s.transpose()));
    GaussianState {
        mean: vector(rng, 2 * n_modes, 1.0),
        cov,
    }
}

/// A random channel that satisfies the complete-positivity condition with
/// some slack: `R` is a random PSD matrix shifted by the spectral norm of
/// `T Omega T^T - Omega`.
pub fn cptp_channel<R: Rng + ?Sized>(rng: &mut R, n_modes: usize) -> GaussianChannel {
    let dim = 2 * n_modes;
    let t = matrix(rng, dim, dim, 1.0);
    let w = omega(n_modes);
    let defect = &t * &w * t.transpose() - &w;
    let bound = defect.norm();
    let x = matrix(rng, dim, dim, 0.5);
    let r = linalg::symmetrize(&(&x * x.transpose() + Matrix::identity(dim, dim) * (bound + 0.01)));
    GaussianChannel {
        t,
        d: vector(rng, dim, 1.0),
        r,
    }
}

/// Random Hamiltonian blocks of unit scale, random coupling, and a mixed
/// ancilla with symplectic eigenvalues in `[1, 3]`.
pub fn joint_setup<R: Rng + ?Sized>(
    rng: &mut R,
    n_system: usize,
    n_ancilla: usize,
    dt: f64,
) -> JointSetup {
    joint_setup_with_ancilla(rng, n_system, n_ancilla, dt, 1.0, 3.0)
}

pub fn joint_setup_with_ancilla<R: Rng + ?Sized>(
    rng: &mut R,
    n_system: usize,
    n_ancilla: usize,
    dt: f64,
    nu_min: f64,
    nu_max: f64,
) -> JointSetup {
    let (ds, da) = (2 * n_system, 2 * n_ancilla);
    JointSetup {
        f_s: symmetric(rng, ds, 1.0),
        alpha_s: vector(rng, ds, 1.0),
        f_a: symmetric(rng, da, 1.0),
        alpha_a: vector(rng, da, 1.0),
        g: matrix(rng, ds, da, 1.0),
        ancilla: valid_state(rng, n_ancilla, nu_min, nu_max),
        dt,
    }
}

/// Unconstrained generators: arbitrary `A`, random `b`, PSD `C`.
pub fn generators<R: Rng + ?Sized>(rng: &mut R, n_modes: usize) -> Generators {
    let dim = 2 * n_modes;
    let x = matrix(rng, dim, dim, 1.0);
    Generators {
        a: matrix(rng, dim, dim, 1.0),
        b: vector(rng, dim, 1.0),
        c: linalg::symmetrize(&(&x * x.transpose())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::is_cptp;
    use crate::phase_space::validate_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instances_satisfy_their_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let s = symplectic(&mut rng, 2, 0.5);
            let w = omega(2);
            assert!((&s * &w * s.transpose() - &w).amax() < 1e-12);
            assert!(validate_state(&valid_state(&mut rng, 2, 1.0, 3.0)).unwrap().valid);
            assert!(is_cptp(&cptp_channel(&mut rng, 2)).unwrap().cp);
            joint_setup(&mut rng, 2, 1, 0.1).validate().unwrap();
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let a = joint_setup(&mut ChaCha8Rng::seed_from_u64(9), 1, 2, 0.1);
        let b = joint_setup(&mut ChaCha8Rng::seed_from_u64(9), 1, 2, 0.1);
        assert_eq!(a, b);
    }
}
