//! Built-in summary statistics.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatError {
    #[error("statistic {0:?} needs at least {1} value(s)")]
    EmptyInput(String, usize),
    #[error("quantile p={0} is outside [0, 1]")]
    BadQuantile(f64),
    #[error("unknown statistic {0:?}")]
    UnknownStatistic(String),
}

/// A summary statistic over a numeric column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stat {
    Mean,
    Std,
    Median,
    Min,
    Max,
    Count,
    Sum,
    Quantile(f64),
}

impl Stat {
    /// Parses a statistic name; `quantile` takes its probability separately
    /// (spec form `{"stat": "quantile", "p": 0.25}`).
    pub fn parse(name: &str, p: Option<f64>) -> Result<Stat, StatError> {
        match name {
            "mean" => Ok(Stat::Mean),
            "std" => Ok(Stat::Std),
            "median" => Ok(Stat::Median),
            "min" => Ok(Stat::Min),
            "max" => Ok(Stat::Max),
            "count" => Ok(Stat::Count),
            "sum" => Ok(Stat::Sum),
            "quantile" => {
                let p = p.unwrap_or(0.5);
                if !(0.0..=1.0).contains(&p) {
                    return Err(StatError::BadQuantile(p));
                }
                Ok(Stat::Quantile(p))
            }
            other => Err(StatError::UnknownStatistic(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Stat::Mean => "mean",
            Stat::Std => "std",
            Stat::Median => "median",
            Stat::Min => "min",
            Stat::Max => "max",
            Stat::Count => "count",
            Stat::Sum => "sum",
            Stat::Quantile(_) => "quantile",
        }
    }
}

/// Computes a statistic over already-null-filtered values.
///
/// `std` is the sample standard deviation (n − 1 divisor) and so needs two
/// values; `count` and `sum` accept empty input. `median` is the p = 0.5
/// type-7 quantile.
pub fn compute_stat(values: &[f64], stat: Stat) -> Result<f64, StatError> {
    match stat {
        Stat::Count => return Ok(values.len() as f64),
        Stat::Sum => return Ok(values.iter().sum()),
        _ => {}
    }
    if values.is_empty() {
        return Err(StatError::EmptyInput(stat.name().to_string(), 1));
    }
    match stat {
        Stat::Mean => Ok(values.iter().sum::<f64>() / values.len() as f64),
        Stat::Std => {
            if values.len() < 2 {
                return Err(StatError::EmptyInput("std".into(), 2));
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            Ok((ss / (n - 1.0)).sqrt())
        }
        Stat::Median => Ok(quantile_type7(values, 0.5)),
        Stat::Min => Ok(values.iter().copied().fold(f64::INFINITY, f64::min)),
        Stat::Max => Ok(values.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        Stat::Quantile(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(StatError::BadQuantile(p));
            }
            Ok(quantile_type7(values, p))
        }
        Stat::Count | Stat::Sum => unreachable!(),
    }
}

/// Type-7 quantile: h = (n − 1)·p, linear interpolation between the order
/// statistics at floor(h) and floor(h) + 1.
pub fn quantile_type7(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - h.floor();
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mean_of_small_list() {
        assert_eq!(compute_stat(&[1.0, 2.0, 3.0], Stat::Mean).unwrap(), 2.0);
    }

    #[test]
    fn two_point_sample_std() {
        let s = compute_stat(&[2.0, 4.0], Stat::Std).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn std_needs_two_values() {
        assert!(compute_stat(&[1.0], Stat::Std).is_err());
    }

    #[test]
    fn quantile_interpolates() {
        // sorted [1,2,3,10], p=0.5: h = 1.5, 2 + 0.5*(3-2) = 2.5
        let q = compute_stat(&[1.0, 2.0, 3.0, 10.0], Stat::Quantile(0.5)).unwrap();
        assert_eq!(q, 2.5);
    }

    #[test]
    fn count_and_sum_accept_empty() {
        assert_eq!(compute_stat(&[], Stat::Count).unwrap(), 0.0);
        assert_eq!(compute_stat(&[], Stat::Sum).unwrap(), 0.0);
        assert!(compute_stat(&[], Stat::Mean).is_err());
    }

    #[test]
    fn bad_quantile_rejected() {
        assert_eq!(
            compute_stat(&[1.0], Stat::Quantile(1.5)).unwrap_err(),
            StatError::BadQuantile(1.5)
        );
        assert!(Stat::parse("quantile", Some(-0.1)).is_err());
    }

    /// Independent oracle: type-7 by direct definition on an explicitly
    /// sorted copy, no shared code with `quantile_type7`.
    fn quantile_oracle(values: &[f64], p: f64) -> f64 {
        let mut s = values.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = s.len();
        let h = (n as f64 - 1.0) * p;
        let j = h.floor() as usize;
        let g = h - j as f64;
        if j + 1 < n {
            (1.0 - g) * s[j] + g * s[j + 1]
        } else {
            s[n - 1]
        }
    }

    proptest! {
        #[test]
        fn quantile_matches_oracle(
            values in proptest::collection::vec(-1e6..1e6f64, 1..40),
            p in 0.0..=1.0f64,
        ) {
            let got = quantile_type7(&values, p);
            let want = quantile_oracle(&values, p);
            prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }

        #[test]
        fn mean_times_count_is_sum(values in proptest::collection::vec(-1e3..1e3f64, 1..50)) {
            let mean = compute_stat(&values, Stat::Mean).unwrap();
            let count = compute_stat(&values, Stat::Count).unwrap();
            let sum = compute_stat(&values, Stat::Sum).unwrap();
            prop_assert!((mean * count - sum).abs() <= 1e-12 * (1.0 + sum.abs()));
        }
    }
}
