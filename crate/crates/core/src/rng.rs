//! Seeded random streams with stable, named sub-streams.
//!
//! Each consumer (patient, each sensor channel, adaptation, disturbance,
//! schedule) draws from its own ChaCha stream whose seed is derived from the
//! master seed and the stream name. Adding a consumer never perturbs the
//! draws seen by existing ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Names of the simulation's random sub-streams.
pub mod stream {
    pub const PATIENT: &str = "patient";
    pub const SENSOR_FORCE: &str = "sensors.force";
    pub const SENSOR_IMU: &str = "sensors.imu";
    pub const SENSOR_POS: &str = "sensors.pos";
    pub const ADAPTATION: &str = "adaptation";
    pub const DISTURBANCE: &str = "disturbance";
    pub const SCHEDULE: &str = "schedule";
}

/// A deterministic random stream derived from (master seed, stream name).
pub struct SeededStream {
    rng: ChaCha12Rng,
}

impl SeededStream {
    pub fn new(master_seed: u64, name: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(master_seed.to_le_bytes());
        hasher.update(b"/");
        hasher.update(name.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        SeededStream {
            rng: ChaCha12Rng::from_seed(seed),
        }
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller (deterministic two-draw form).
    pub fn normal(&mut self) -> f64 {
        let u1: f64 = self.rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = self.rng.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Exponential with the given rate (events per unit).
    pub fn exponential(&mut self, rate: f64) -> f64 {
        let u: f64 = self.rng.gen_range(f64::MIN_POSITIVE..1.0);
        -u.ln() / rate
    }

    /// Random sign, +1.0 or -1.0.
    pub fn sign(&mut self) -> f64 {
        if self.rng.gen::<bool>() {
            1.0
        } else {
            -1.0
        }
    }
}
