use crate::{Error, Result};

/// Mean squared error between two equally sized signals.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "prediction has {} values, target {}",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("empty signal".into()));
    }
    Ok(pred
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / pred.len() as f64)
}

/// Peak signal-to-noise ratio in dB for signals with peak 1.
///
/// Identical signals return `f64::INFINITY`.
pub fn psnr(pred: &[f64], target: &[f64]) -> Result<f64> {
    let e = mse(pred, target)?;
    Ok(psnr_from_mse(e))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_infinite() {
        let a = vec![0.2; 12];
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn constant_offset() {
        let a = vec![0.3; 12];
        let b = vec![0.4; 12];
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn checkerboard_vs_gray() {
        let board: Vec<f64> = (0..64).map(|i| ((i / 8 + i % 8) % 2) as f64).collect();
        let gray = vec![0.5; 64];
        let p = psnr(&board, &gray).unwrap();
        assert!((p - 10.0 * 4f64.log10()).abs() < 1e-12);
        assert!((p - 6.02).abs() < 5e-3);
    }

    #[test]
    fn shape_mismatch() {
        assert!(psnr(&[0.0; 3], &[0.0; 4]).is_err());
    }
}
