//! Small summary statistics used by the experiment harness.

use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median; the average of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Standard error of the mean (sample standard deviation over √n).
pub fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Pearson chi-square statistic against the uniform distribution over the
/// given categories.
pub fn chi_square_uniform_statistic(observed: &[u64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let expected = total as f64 / observed.len() as f64;
    observed
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum()
}

/// Upper-tail p-value of the uniformity chi-square test.
pub fn chi_square_uniform_p_value(observed: &[u64]) -> f64 {
    assert!(observed.len() >= 2, "need at least two categories");
    let stat = chi_square_uniform_statistic(observed);
    let dist = ChiSquared::new((observed.len() - 1) as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summaries() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
        assert!((stderr(&[1.0, 3.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perfectly_uniform_counts_have_p_one() {
        assert!((chi_square_uniform_p_value(&[10, 10, 10]) - 1.0).abs() < 1e-12);
        assert!(chi_square_uniform_p_value(&[100, 0, 0]) < 1e-10);
    }
}
