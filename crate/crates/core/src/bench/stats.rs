use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub n: usize,
    /// Mean of `b - a`.
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub t: f64,
    /// One-sided p-value for the alternative `mean(b - a) > 0`.
    pub p_greater: f64,
}

/// Paired t-test on `b - a`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest, BenchError> {
    if a.len() != b.len() {
        return Err(BenchError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(BenchError::Empty);
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let (t, p) = if sd == 0.0 {
        match mean.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => (f64::INFINITY, 0.0),
            Some(std::cmp::Ordering::Less) => (f64::NEG_INFINITY, 1.0),
            _ => (0.0, 0.5),
        }
    } else {
        let t = mean / (sd / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df ≥ 1");
        (t, 1.0 - dist.cdf(t))
    };
    Ok(PairedTTest {
        n,
        mean_diff: mean,
        sd_diff: sd,
        t,
        p_greater: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_hand_computed_t() {
        // d = [1, 2, 3, 4]: mean 2.5, sd 1.2910, t = 3.8730 on 3 df, one-sided p ≈ 0.01522.
        let a = [0.0; 4];
        let b = [1.0, 2.0, 3.0, 4.0];
        let r = paired_t_test(&a, &b).unwrap();
        assert!((r.t - 3.872983).abs() < 1e-5);
        assert!((r.p_greater - 0.015225).abs() < 1e-4, "{}", r.p_greater);
        let rev = paired_t_test(&b, &a).unwrap();
        assert!((rev.p_greater - (1.0 - r.p_greater)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(
            paired_t_test(&[1.0, 1.0], &[1.0, 1.0]).unwrap().p_greater,
            0.5
        );
        assert_eq!(
            paired_t_test(&[0.0, 0.0], &[1.0, 1.0]).unwrap().p_greater,
            0.0
        );
        assert!(paired_t_test(&[1.0], &[1.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[1.0]).is_err());
    }
}
