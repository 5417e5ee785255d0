//! BPSK over AWGN with LLR demodulation.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::Bit;

/// Operating point of the AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub sigma: f64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self> {
        Ok(ChannelParams {
            ebn0_db,
            rate,
            sigma: snr_to_sigma(ebn0_db, rate)?,
        })
    }
}

/// Noise standard deviation for unit-energy BPSK at `Eb/N0 = ebn0_db` and code
/// rate `rate`: `sigma^2 = 1 / (2 R Eb/N0)`.
pub fn snr_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return invalid(format!("rate must lie in (0, 1], got {rate}"));
    }
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    Ok((1.0 / (2.0 * rate * ebn0)).sqrt())
}

/// Maps bit 0 to +1 and bit 1 to -1.
pub fn modulate_bpsk(codeword: &[Bit]) -> Vec<f64> {
    codeword
        .iter()
        .map(|&b| if b & 1 == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// LLR of a received sample: `2 y / sigma^2`.
#[inline]
pub fn llr(y: f64, sigma: f64) -> f64 {
    2.0 * y / (sigma * sigma)
}

/// Adds Gaussian noise of standard deviation `sigma` drawn from `rng` and
/// returns the channel LLRs.
pub fn transmit_and_demodulate<R: Rng + ?Sized>(
    symbols: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return invalid(format!("noise sigma must be positive, got {sigma}"));
    }
    Ok(symbols
        .iter()
        .map(|&s| {
            let noise: f64 = rng.sample(StandardNormal);
            llr(s + sigma * noise, sigma)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_reference_points() {
        assert!((snr_to_sigma(0.0, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((snr_to_sigma(10.0 * 2f64.log10(), 0.25).unwrap() - 1.0).abs() < 1e-12);
        assert!((snr_to_sigma(3.0103, 0.25).unwrap() - 1.0).abs() < 1e-5);
        assert!(snr_to_sigma(200.0, 0.5).unwrap() < 1e-9);
        assert!(snr_to_sigma(1.0, 0.0).is_err());
        assert!(snr_to_sigma(1.0, 1.5).is_err());
    }

    #[test]
    fn bpsk_mapping() {
        assert_eq!(modulate_bpsk(&[0, 0]), vec![1.0, 1.0]);
        assert_eq!(modulate_bpsk(&[1, 0, 1]), vec![-1.0, 1.0, -1.0]);
        assert!(modulate_bpsk(&[1; 64]).iter().all(|&s| s == -1.0));
    }

    #[test]
    fn llr_formula() {
        assert_eq!(llr(0.5, 1.0), 1.0);
        assert!((llr(1.0, 0.1) - 200.0).abs() < 1e-9);
    }

    #[test]
    fn low_noise_keeps_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let symbols = modulate_bpsk(&[0, 1, 1, 0, 1, 0, 0, 1]);
        for _ in 0..100 {
            let llrs = transmit_and_demodulate(&symbols, 0.1, &mut rng).unwrap();
            for (s, l) in symbols.iter().zip(&llrs) {
                assert_eq!(s.signum(), l.signum());
            }
        }
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(transmit_and_demodulate(&[1.0], 0.0, &mut rng).is_err());
        assert!(transmit_and_demodulate(&[1.0], -1.0, &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_llrs() {
        let symbols = vec![1.0; 128];
        let a = transmit_and_demodulate(&symbols, 0.8, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = transmit_and_demodulate(&symbols, 0.8, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noise_moments() {
        let sigma = 0.7;
        let n = 1_000_000;
        let symbols = vec![0.0; n];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let llrs = transmit_and_demodulate(&symbols, sigma, &mut rng).unwrap();
        // Recover the noise samples: y = llr * sigma^2 / 2.
        let noise: Vec<f64> = llrs.iter().map(|l| l * sigma * sigma / 2.0).collect();
        let mean = noise.iter().sum::<f64>() / n as f64;
        let var = noise.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 * sigma / 1000.0, "mean {mean}");
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.01, "var {var}");
    }
}
