//! Small statistics helpers for the test harness.

use crate::randomness::{Label, RandomTape, Tag};

/// `P[X >= (1 + d) mu] <= exp(-d^2 mu / 3)` for `d` in `[0, 1]`, and
/// `exp(-d mu / 3)` for `d >= 1`.
pub fn chernoff_upper(mu: f64, d: f64) -> f64 {
    if d <= 1.0 {
        (-d * d * mu / 3.0).exp()
    } else {
        (-d * mu / 3.0).exp()
    }
}

/// `P[X <= (1 - d) mu] <= exp(-d^2 mu / 2)`.
pub fn chernoff_lower(mu: f64, d: f64) -> f64 {
    (-d * d * mu / 2.0).exp()
}

/// Bound on `P[X > 2 mu]`.
pub fn doubling_tail_bound(mu: f64) -> f64 {
    chernoff_upper(mu, 1.0)
}

/// Fraction of `trials` sums of `t` Bernoulli(`p`) variables that exceed
/// `threshold`.
pub fn bernoulli_tail_frequency(tape: &RandomTape, t: u64, p: f64, threshold: u64, trials: u64) -> f64 {
    let mut stream = tape.stream(&Label::new(Tag::Scratch));
    let mut exceed = 0u64;
    for _ in 0..trials {
        let sum = (0..t).filter(|_| stream.unit() < p).count() as u64;
        exceed += (sum > threshold) as u64;
    }
    exceed as f64 / trials as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSummary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
}

impl MeanSummary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return MeanSummary { n, mean: f64::NAN, std_dev: f64::NAN };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        MeanSummary { n, mean, std_dev: var.sqrt() }
    }

    pub fn std_err(&self) -> f64 {
        self.std_dev / (self.n as f64).sqrt()
    }

    /// Upper end of the normal-approximation 95% confidence interval.
    pub fn upper_95(&self) -> f64 {
        self.mean + 1.96 * self.std_err()
    }
}

/// Least-squares fit `y = slope * x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_bound_value() {
        assert!((doubling_tail_bound(10.0) - (-10.0f64 / 3.0).exp()).abs() < 1e-12);
        assert!((doubling_tail_bound(10.0) - 0.0357).abs() < 1e-3);
    }

    #[test]
    fn mean_summary() {
        let s = MeanSummary::of([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_dev - 1.2909944).abs() < 1e-6);
        assert!(s.upper_95() > s.mean);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let (a, b) = least_squares(&xs, &ys);
        assert!((a - 3.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_frequency_small_run() {
        let f = bernoulli_tail_frequency(&RandomTape::new(3), 100, 0.5, 100, 200);
        assert_eq!(f, 0.0);
    }
}
