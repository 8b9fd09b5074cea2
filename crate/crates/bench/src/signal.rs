use gsi_core::rng;
use gsi_core::{Error, Real, Scalar};
use rand::Rng;
use rand_distr::StandardNormal;

/// Gaussian test signal with its last two coordinates multiplied by
/// `spike_factor`. Complex entries are `(g₁ + i g₂)/√2`.
pub fn generate_signal<S: Scalar>(d: usize, seed: u64, spike_factor: f64) -> Result<Vec<S>, Error> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "signal dimension must be at least 2, got {d}"
        )));
    }
    let mut s = rng::stream(seed);
    let scale = match S::FIELD {
        gsi_core::FieldTag::Real => 1.0,
        gsi_core::FieldTag::Complex => std::f64::consts::FRAC_1_SQRT_2,
    };
    Ok((0..d)
        .map(|i| {
            let re: f64 = s.sample(StandardNormal);
            let im: f64 = s.sample(StandardNormal);
            let k = if i >= d - 2 { spike_factor * scale } else { scale };
            S::from_parts(S::Real::of(k * re), S::Real::of(k * im))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gsi_core::scalar::norm_sqr;
    use gsi_core::Complex64;

    #[test]
    fn spikes_only_the_last_two_coordinates() {
        let plain = generate_signal::<f64>(4, 3, 1.0).unwrap();
        let spiked = generate_signal::<f64>(4, 3, 200.0).unwrap();
        assert_eq!(plain[..2], spiked[..2]);
        for i in 2..4 {
            assert!((spiked[i] / plain[i] - 200.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_tiny_dimension() {
        assert!(generate_signal::<f64>(1, 0, 200.0).is_err());
    }

    #[test]
    fn expected_squared_norm() {
        // E‖x‖² = (d − 2) + 2·200² for unit per-coordinate variance.
        for complex in [false, true] {
            let d = 16;
            let expected = (d - 2) as f64 + 2.0 * 200.0f64.powi(2);
            let mean = (0..10_000u64)
                .map(|s| {
                    if complex {
                        norm_sqr(&generate_signal::<Complex64>(d, s, 200.0).unwrap())
                    } else {
                        norm_sqr(&generate_signal::<f64>(d, s, 200.0).unwrap())
                    }
                })
                .sum::<f64>()
                / 10_000.0;
            assert!((mean / expected - 1.0).abs() < 0.05, "{mean} vs {expected}");
        }
    }
}
