//! Open Gaussian dynamics of a system bombarded by a stream of ancillae.
//!
//! States are described by a mean vector and covariance matrix in the
//! quadrature ordering `(q_1, p_1, q_2, p_2, ...)`. One interaction with a
//! fresh ancilla induces a Gaussian channel on the system
//! ([`channel::reduce_from_joint`]). The [`interpolation`] module turns that
//! channel into a time-independent master equation whose flow agrees with the
//! repeated channel at every multiple of the step duration. [`bombardment`]
//! expands those generators in the step duration, [`classify`] sorts them
//! into kinds of dynamics and [`thermal`] treats an oscillator bombarded by
//! thermal oscillators.

pub mod bombardment;
pub mod channel;
pub mod classify;
pub mod error;
pub mod interpolation;
pub mod linalg;
pub mod phase_space;
pub mod random;
pub mod serde_mat;
pub mod thermal;
pub mod tolerances;

pub use bombardment::{GeneratorSeries, PurifyReport, SeriesTerm};
pub use channel::{ChannelSeries, CpReport, GaussianChannel, JointSetup};
pub use classify::{Availability, BlockDecomposition, DynamicsReport};
pub use error::{Error, Result};
pub use interpolation::Generators;
pub use linalg::{HermitianMatrix, Matrix, Vector};
pub use phase_space::{
    AffineSymplectic, GaussianState, QuadraticHamiltonian, StateCheck, SymplecticForm,
};
pub use thermal::{CovCoefficients, Dynamics, OscillatorBathSetup, ThermalReport, TrajectoryPoint};
pub use tolerances::Tolerances;
