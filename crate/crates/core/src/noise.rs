//! Seeded complex Gaussian noise calibrated to a Frobenius-norm SNR.
//!
//! Every entry draws from its own ChaCha8 stream (`stream = entry index`),
//! so the result does not depend on evaluation order.

use crate::error::{Error, Result};
use crate::forward::CMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Identifier recorded in dataset metadata.
pub const RNG_NAME: &str = "chacha8-stream-per-entry";

fn entry_noise(seed: u64, index: u64) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Standard deviation of each real component for the requested SNR.
pub fn component_sigma(signal_energy: f64, entries: usize, snr_db: f64) -> f64 {
    (signal_energy / (10f64.powf(snr_db / 10.0) * 2.0 * entries as f64)).sqrt()
}

/// `K + eta` with `10 log10(||K||_F^2 / E||eta||_F^2) = snr_db`.
/// `snr_db = +inf` returns the input unchanged.
pub fn add_noise(matrix: &CMatrix, snr_db: f64, seed: u64) -> Result<CMatrix> {
    if snr_db == f64::INFINITY {
        return Ok(matrix.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::Domain(format!("SNR must be finite or +inf, got {snr_db}")));
    }
    let energy = matrix.norm_squared();
    if energy == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let sigma = component_sigma(energy, matrix.len(), snr_db);
    let (rows, cols) = matrix.shape();
    Ok(CMatrix::from_fn(rows, cols, |j, l| {
        matrix[(j, l)] + entry_noise(seed, (j * cols + l) as u64) * sigma
    }))
}

/// Per-frequency seed derived from the run seed (SplitMix64 finalizer).
pub fn frequency_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Measured `10 log10(||clean||^2 / ||noisy - clean||^2)`.
pub fn measured_snr_db(clean: &CMatrix, noisy: &CMatrix) -> f64 {
    10.0 * (clean.norm_squared() / (noisy - clean).norm_squared()).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_matrix(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |j, l| {
            Complex64::new(((j + 2 * l) as f64).sin(), ((3 * j + l) as f64).cos())
        })
    }

    #[test]
    fn infinite_snr_is_identity() {
        let k = sample_matrix(5);
        assert_eq!(add_noise(&k, f64::INFINITY, 3).unwrap(), k);
    }

    #[test]
    fn deterministic_per_seed() {
        let k = sample_matrix(6);
        let a = add_noise(&k, 20.0, 11).unwrap();
        let b = add_noise(&k, 20.0, 11).unwrap();
        let c = add_noise(&k, 20.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_matrix_rejected() {
        assert!(matches!(
            add_noise(&CMatrix::zeros(3, 3), 20.0, 1),
            Err(Error::ZeroMatrix)
        ));
        assert!(add_noise(&sample_matrix(3), f64::NAN, 1).is_err());
    }

    #[test]
    fn calibration_over_seeds() {
        let k = sample_matrix(64);
        let mean: f64 = (0..100)
            .map(|s| measured_snr_db(&k, &add_noise(&k, 20.0, s).unwrap()))
            .sum::<f64>()
            / 100.0;
        assert!((mean - 20.0).abs() <= 0.5, "mean SNR {mean}");
    }

    #[test]
    fn frequency_seeds_differ() {
        let s: Vec<u64> = (0..50).map(|f| frequency_seed(42, f)).collect();
        let mut sorted = s.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), s.len());
    }
}
