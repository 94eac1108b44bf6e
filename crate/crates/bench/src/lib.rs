//! Fixed inputs for the criterion benchmarks under `benches/`.

use gaussbomb_core::{random, GaussianChannel, JointSetup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A reproducible random joint setup with the given mode counts.
pub fn joint_fixture(n_system: usize, n_ancilla: usize, dt: f64) -> JointSetup {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B + (n_system * 10 + n_ancilla) as u64);
    random::joint_setup(&mut rng, n_system, n_ancilla, dt)
}

/// The reduced channel of [`joint_fixture`].
pub fn channel_fixture(n_system: usize, n_ancilla: usize, dt: f64) -> GaussianChannel {
    gaussbomb_core::channel::reduce_from_joint(&joint_fixture(n_system, n_ancilla, dt))
        .expect("fixture setups are valid")
}
