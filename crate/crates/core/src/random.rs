//! Seeded sampling of spin configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::heisenberg::SpinConfiguration;
use crate::Vec3;

pub type SpinRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SpinRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the unit sphere from a normalized Gaussian triple.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

pub fn random_configuration<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SpinConfiguration {
    SpinConfiguration::from_raw((0..n).map(|_| random_unit_vector(rng)).collect())
}
