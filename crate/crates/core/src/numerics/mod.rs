//! Numerical integration of the spin equations of motion.

mod rk;
mod splitting;

pub use rk::{reference_integrate, reference_integrate_at, rk4_fixed, DEFAULT_TOL};
pub use splitting::{
    integrate_splitting, integrate_splitting_at, split_dimers, split_edges, IntegrationStats, SplitPlan,
};

use crate::error::{Error, Result};
use crate::heisenberg::SpinConfiguration;

/// States sampled at increasing times.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpinConfiguration>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&SpinConfiguration> {
        self.states.last()
    }

    /// Largest componentwise difference between two trajectories sampled
    /// at the same times.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| max_deviation(a, b))
            .fold(0.0, f64::max)
    }
}

/// Largest componentwise difference between two configurations.
pub fn max_deviation(a: &SpinConfiguration, b: &SpinConfiguration) -> f64 {
    a.spins()
        .iter()
        .zip(b.spins())
        .map(|(x, y)| (x - y).amax())
        .fold(0.0, f64::max)
}

/// `samples` equally spaced times from 0 to `t_end` inclusive; a single
/// sample means `t_end` alone.
pub fn sample_times(t_end: f64, samples: usize) -> Result<Vec<f64>> {
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::InvalidArgument(format!("end time must be finite and nonnegative, got {t_end}")));
    }
    match samples {
        0 => Err(Error::InvalidArgument("at least one sample is required".into())),
        1 => Ok(vec![t_end]),
        k => Ok((0..k)
            .map(|i| if i + 1 == k { t_end } else { t_end * i as f64 / (k - 1) as f64 })
            .collect()),
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument("sample times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sample times must be nondecreasing".into()));
    }
    Ok(())
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn convergence_order(hs: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_grid() {
        assert_eq!(sample_times(1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(sample_times(2.0, 1).unwrap(), vec![2.0]);
        assert!(sample_times(1.0, 0).is_err());
        assert!(sample_times(-1.0, 2).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let hs = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = hs.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((convergence_order(&hs, &errs) - 2.0).abs() < 1e-12);
    }
}
