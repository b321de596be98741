use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::RawConfig;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("profiling failed: {0}")]
pub struct ProfileError(pub String);

/// Measures the runtime of a benchmark job under a configuration.
///
/// Implementations must return a positive number of seconds and tolerate
/// concurrent calls.
pub trait Profiler: Send + Sync {
    fn measure(&self, config: &RawConfig) -> Result<f64, ProfileError>;
}

/// Nominal cost of one real profiling run, in seconds.
pub const NOMINAL_PROFILE_S: f64 = 30.0;

/// A synthetic profiler for desk-scale runs.
///
/// runtime = 30
///         + 2.0 * ln(io.sort.mb / 120)^2
///         + 1.0 * ln(shuffle.parallelcopies / 6)^2
///         + 0.5 * ln(io.sort.factor / 12)^2
///         + 1.5 * (log2(io.file.buffer.size / 65536) / 4)^2
///         + noise
///
/// Each term uses the field's raw value when it parses as a positive number
/// and is zero otherwise. The noise is uniform on [-0.5, 0.5), drawn from a
/// hash of the seed and the configuration, so equal inputs give equal
/// runtimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MockProfiler {
    pub seed: u64,
}

const TERMS: [(&str, f64, f64); 3] = [
    ("mapreduce.task.io.sort.mb", 2.0, 120.0),
    ("mapreduce.reduce.shuffle.parallelcopies", 1.0, 6.0),
    ("mapreduce.task.io.sort.factor", 0.5, 12.0),
];

impl MockProfiler {
    pub fn new(seed: u64) -> Self {
        MockProfiler { seed }
    }

    /// The smooth part of the runtime, without noise.
    pub fn penalty(config: &RawConfig) -> f64 {
        let positive = |name: &str| {
            config
                .get(name)
                .and_then(|e| e.raw_value.parse::<f64>().ok())
                .filter(|v| v.is_finite() && *v > 0.0)
        };
        let mut p = 0.0;
        for (name, weight, best) in TERMS {
            if let Some(v) = positive(name) {
                p += weight * (v / best).ln().powi(2);
            }
        }
        if let Some(v) = positive("io.file.buffer.size") {
            p += 1.5 * ((v / 65536.0).log2() / 4.0).powi(2);
        }
        p
    }

    pub fn noise(&self, config: &RawConfig) -> f64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        for (k, v) in config.values() {
            h.update(k.as_bytes());
            h.update([0]);
            h.update(v.as_bytes());
            h.update([0]);
        }
        let bytes: [u8; 8] = h.finalize()[..8].try_into().expect("8 bytes");
        (u64::from_le_bytes(bytes) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

impl Profiler for MockProfiler {
    fn measure(&self, config: &RawConfig) -> Result<f64, ProfileError> {
        Ok(NOMINAL_PROFILE_S + Self::penalty(config) + self.noise(config))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_positive() {
        let p = MockProfiler::new(3);
        let c: RawConfig = [("mapreduce.task.io.sort.mb", "80")].into_iter().collect();
        assert_eq!(p.measure(&c).unwrap(), p.measure(&c).unwrap());
        assert_ne!(p.measure(&c).unwrap(), MockProfiler::new(4).measure(&c).unwrap());
        assert!(p.measure(&RawConfig::new()).unwrap() > 0.0);
        let expected = 2.0 * (80.0f64 / 120.0).ln().powi(2);
        assert!((MockProfiler::penalty(&c) - expected).abs() < 1e-12);
    }

    #[test]
    fn noise_is_centred() {
        let p = MockProfiler::new(11);
        let n = 4000;
        let mean: f64 = (0..n)
            .map(|i| {
                let c: RawConfig = [("k", i.to_string())].into_iter().collect();
                p.noise(&c)
            })
            .sum::<f64>()
            / n as f64;
        // Uniform on a unit interval: standard error about 0.0046.
        assert!(mean.abs() < 0.03, "{mean}");
    }
}
