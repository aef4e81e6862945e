use crate::error::{Error, Result};

/// Base-2 binary entropy `-(p log2 p + (1-p) log2 (1-p))`, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(plogp(p) + plogp(1.0 - p))
}

/// Base-2 Shannon entropy of a probability vector.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64> {
    if let Some(&p) = dist.iter().find(|p| p.is_nan() || **p < 0.0) {
        return Err(Error::Domain(format!("negative or NaN probability {p}")));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("distribution sums to {total}, not 1")));
    }
    Ok(dist.iter().map(|&p| plogp(p)).sum())
}

/// Mutual information (bits) of a joint distribution given as a row-major
/// table `joint[x][y]`. Rows and columns need not be normalized individually;
/// the table is normalized by its total mass.
pub fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let total: f64 = joint.iter().flatten().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let cols = joint.iter().map(Vec::len).max().unwrap_or(0);
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum::<f64>() / total).collect();
    let mut py = vec![0.0; cols];
    for row in joint {
        for (y, v) in row.iter().enumerate() {
            py[y] += v / total;
        }
    }
    let mut info = 0.0;
    for (x, row) in joint.iter().enumerate() {
        for (y, &v) in row.iter().enumerate() {
            let pxy = v / total;
            if pxy > 0.0 {
                info += pxy * (pxy / (px[x] * py[y])).log2();
            }
        }
    }
    info.max(0.0)
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_entropy_reference_points() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 1 - H(0.93301) reproduces the optimal incoherent gain 0.6454 at D = 1/4.
        let h = binary_entropy(0.93301).unwrap();
        assert!((h - 0.35460).abs() < 5e-5, "{h}");
    }

    #[test]
    fn binary_entropy_rejects_out_of_range() {
        assert!(matches!(binary_entropy(-0.1), Err(Error::Domain(_))));
        assert!(matches!(binary_entropy(1.5), Err(Error::Domain(_))));
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn shannon_entropy_reference_points() {
        assert_eq!(shannon_entropy(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.25; 4]).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(shannon_entropy(&[0.5, 0.6]), Err(Error::Domain(_))));
        assert!(shannon_entropy(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn product_attack_posterior_entropy() {
        // Per-set posterior of the product attack at D = 1/4: the squared
        // pyramid coefficients a^2, b^2, c^2, d^2 with a = (2+sqrt3)/4,
        // b = c = 1/4, d = (2-sqrt3)/4.
        let s3 = 3f64.sqrt();
        let a = (2.0 + s3) / 4.0;
        let d = (2.0 - s3) / 4.0;
        let dist = [a * a, 0.0625, 0.0625, d * d];
        let direct: f64 = dist.iter().map(|p| -p * p.log2()).sum();
        let h = shannon_entropy(&dist).unwrap();
        assert!((h - direct).abs() < 1e-15);
        // Two minus this entropy is twice the per-qubit optimum 0.6454.
        assert!(((2.0 - h) - 1.2908).abs() < 5e-4, "{h}");
    }

    #[test]
    fn mutual_information_of_perfect_and_useless_channels() {
        let perfect = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        assert!((mutual_information(&perfect) - 1.0).abs() < 1e-15);
        let useless = vec![vec![0.25, 0.25], vec![0.25, 0.25]];
        assert_eq!(mutual_information(&useless), 0.0);
    }

    proptest! {
        #[test]
        fn binary_entropy_is_symmetric(p in 0.0f64..=1.0) {
            let a = binary_entropy(p).unwrap();
            let b = binary_entropy(1.0 - p).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&a));
        }
    }
}
