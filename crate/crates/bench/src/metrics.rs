/*
Copyright 2026 The tcbirrt Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
//! Success-rate curves and trimmed planning-time statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Outcome of one planning trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub task_id: usize,
    pub success: bool,
    /// Planning time in seconds; the timeout for failures.
    pub time_s: f64,
    pub iterations: usize,
    /// Sum of joint-space distances along the path; 0 for failures.
    pub path_len_rad: f64,
    pub regrasp: bool,
}

/// `n` points spaced evenly in log-time from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && n >= 1, "positive start and at least one point");
    if n == 1 || hi <= lo {
        return vec![hi.max(0.0)];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    grid
}

/// Time grid used in reports: 100 log-spaced points from 0.1 s to `timeout`.
pub fn default_grid(timeout: f64) -> Vec<f64> {
    log_grid(0.1, timeout, 100)
}

/// Fraction of all records that succeeded within each grid time.
pub fn success_rate_curve(records: &[TrialRecord], grid: &[f64]) -> Vec<(f64, f64)> {
    assert!(!records.is_empty(), "no records");
    let mut times: Vec<f64> = records.iter().filter(|r| r.success).map(|r| r.time_s).collect();
    times.sort_by(f64::total_cmp);
    let n = records.len() as f64;
    grid.iter()
        .map(|&t| {
            let within = times.partition_point(|&x| x <= t);
            (t, within as f64 / n)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeStats {
    pub mean: f64,
    /// Sample standard deviation with Bessel's correction; 0 for one sample.
    pub std: f64,
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq, Serialize, Deserialize)]
#[error("{actual} successes, {required} required")]
pub struct Insufficient {
    pub required: usize,
    pub actual: usize,
}

/// Mean and standard deviation of the `n_t_min` smallest successful times.
pub fn trimmed_time_stats(records: &[TrialRecord], n_t_min: usize) -> Result<TimeStats, Insufficient> {
    assert!(n_t_min >= 1, "n_t_min must be positive");
    let mut times: Vec<f64> = records.iter().filter(|r| r.success).map(|r| r.time_s).collect();
    if times.len() < n_t_min {
        return Err(Insufficient {
            required: n_t_min,
            actual: times.len(),
        });
    }
    times.sort_by(f64::total_cmp);
    let kept = &times[..n_t_min];
    let k = n_t_min as f64;
    let mean = kept.iter().sum::<f64>() / k;
    let std = if n_t_min > 1 {
        (kept.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(TimeStats { mean, std })
}

/// Median of the successful times, if any.
pub fn median_success_time(records: &[TrialRecord]) -> Option<f64> {
    let mut times: Vec<f64> = records.iter().filter(|r| r.success).map(|r| r.time_s).collect();
    if times.is_empty() {
        return None;
    }
    times.sort_by(f64::total_cmp);
    let m = times.len() / 2;
    Some(if times.len() % 2 == 1 {
        times[m]
    } else {
        0.5 * (times[m - 1] + times[m])
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scene: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub regrasps: usize,
    pub timeout: f64,
    pub median_time: Option<f64>,
    pub n_t_min: usize,
    pub time_stats: Result<TimeStats, Insufficient>,
    /// `(t, p(t))` samples.
    pub curve: Vec<(f64, f64)>,
}

impl MetricsReport {
    pub fn new(scene: &str, records: &[TrialRecord], timeout: f64, n_t_min: usize) -> Self {
        let successes = records.iter().filter(|r| r.success).count();
        Self {
            scene: scene.to_owned(),
            trials: records.len(),
            successes,
            success_rate: if records.is_empty() {
                0.0
            } else {
                successes as f64 / records.len() as f64
            },
            regrasps: records.iter().filter(|r| r.success && r.regrasp).count(),
            timeout,
            median_time: median_success_time(records),
            n_t_min,
            time_stats: trimmed_time_stats(records, n_t_min),
            curve: if records.is_empty() {
                Vec::new()
            } else {
                success_rate_curve(records, &default_grid(timeout))
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(success: bool, time_s: f64) -> TrialRecord {
        TrialRecord {
            task_id: 0,
            success,
            time_s,
            iterations: 0,
            path_len_rad: 0.0,
            regrasp: false,
        }
    }

    #[test]
    fn all_failures_give_zero_curve() {
        let r = vec![rec(false, 60.0); 5];
        assert!(success_rate_curve(&r, &default_grid(60.0)).iter().all(|(_, p)| *p == 0.0));
    }

    #[test]
    fn direct_count_at_two_and_a_half_seconds() {
        let r = [rec(true, 1.0), rec(true, 2.0), rec(true, 3.0), rec(false, 60.0)];
        assert_eq!(success_rate_curve(&r, &[2.5])[0].1, 0.5);
    }

    #[test]
    fn forty_of_a_hundred() {
        let mut r = vec![rec(true, 1.0); 40];
        r.extend(vec![rec(false, 1000.0); 60]);
        assert_eq!(success_rate_curve(&r, &[1000.0])[0].1, 0.4);
    }

    #[test]
    fn smallest_two_of_three() {
        let r = [rec(true, 5.0), rec(true, 1.0), rec(true, 3.0)];
        assert_eq!(trimmed_time_stats(&r, 2).unwrap().mean, 2.0);
    }

    #[test]
    fn constant_times_have_zero_spread() {
        let r = vec![rec(true, 2.0); 4];
        assert_eq!(trimmed_time_stats(&r, 3).unwrap(), TimeStats { mean: 2.0, std: 0.0 });
    }

    #[test]
    fn too_few_successes() {
        let r = [rec(true, 1.0), rec(false, 9.0)];
        assert_eq!(
            trimmed_time_stats(&r, 2),
            Err(Insufficient {
                required: 2,
                actual: 1
            })
        );
    }

    #[test]
    fn grid_endpoints_and_monotonicity() {
        let g = default_grid(60.0);
        assert_eq!(g.len(), 100);
        assert_eq!((g[0], g[99]), (0.1, 60.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
