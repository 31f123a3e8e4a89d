//! Runge-Kutta integrators for `ds_μ/dt = h_μ × s_μ`.

use super::{check_times, sample_times, Trajectory};
use crate::error::{Error, Result};
use crate::heisenberg::{eom_rhs_into, CouplingMatrix, FieldVector, SpinConfiguration};
use crate::Vec3;

/// Default per-step tolerance of the adaptive integrator.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Dormand-Prince 5(4) tableau; the system is autonomous, so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn check_start(j: &CouplingMatrix, cfg0: &SpinConfiguration) -> Result<()> {
    if cfg0.len() != j.n() {
        return Err(Error::DimensionMismatch { expected: j.n(), found: cfg0.len() });
    }
    Ok(())
}

/// Adaptive integration from 0 to `t_end`, sampled at both ends.
pub fn reference_integrate(
    j: &CouplingMatrix,
    cfg0: &SpinConfiguration,
    t_end: f64,
    tol: f64,
    field: &FieldVector,
) -> Result<Trajectory> {
    reference_integrate_at(j, cfg0, &sample_times(t_end, 2)?, tol, field)
}

/// Adaptive Dormand-Prince 5(4) integration with steps clipped to land on
/// each sample time. Spins are not renormalized.
pub fn reference_integrate_at(
    j: &CouplingMatrix,
    cfg0: &SpinConfiguration,
    times: &[f64],
    tol: f64,
    field: &FieldVector,
) -> Result<Trajectory> {
    check_start(j, cfg0)?;
    check_times(times)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = cfg0.len();
    let t_final = times.last().copied().unwrap_or(0.0);
    let min_step = 1e-14 * t_final;

    let mut y = cfg0.spins().to_vec();
    let mut k: Vec<Vec<Vec3>> = vec![vec![Vec3::zeros(); n]; 7];
    let mut stage = vec![Vec3::zeros(); n];
    let mut y_new = vec![Vec3::zeros(); n];
    eom_rhs_into(j, &y, field, &mut k[0]);

    let mut t = 0.0;
    let mut h = (0.01 * t_final).clamp(f64::MIN_POSITIVE, 0.01);
    let mut out = Trajectory { times: Vec::with_capacity(times.len()), states: Vec::with_capacity(times.len()) };
    for &target in times {
        while t < target {
            let remaining = target - t;
            let last = remaining <= h;
            let step = if last { remaining } else { h };
            for s in 1..7 {
                for mu in 0..n {
                    let mut acc = Vec3::zeros();
                    for (r, a) in A[s].iter().enumerate().take(s) {
                        if *a != 0.0 {
                            acc += k[r][mu] * *a;
                        }
                    }
                    stage[mu] = y[mu] + acc * step;
                }
                eom_rhs_into(j, &stage, field, &mut k[s]);
            }
            // stage 7 was evaluated at the fifth-order solution
            y_new.copy_from_slice(&stage);
            let mut err: f64 = 0.0;
            for mu in 0..n {
                let mut e = Vec3::zeros();
                for (s, w) in E.iter().enumerate() {
                    if *w != 0.0 {
                        e += k[s][mu] * *w;
                    }
                }
                e *= step;
                for c in 0..3 {
                    let scale = tol * (1.0 + y[mu][c].abs().max(y_new[mu][c].abs()));
                    err = err.max(e[c].abs() / scale);
                }
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let proposed = step * factor;
            if err <= 1.0 && last {
                // a clipped landing step says nothing about the natural step size
                h = h.max(proposed);
            } else {
                h = proposed;
            }
            if h < min_step {
                return Err(Error::StepUnderflow { t, h });
            }
        }
        out.times.push(target);
        out.states.push(SpinConfiguration::from_raw(y.clone()));
    }
    Ok(out)
}

/// Classical fourth-order Runge-Kutta with fixed step `h`; the step before
/// each sample time is shortened to land on it.
pub fn rk4_fixed(
    j: &CouplingMatrix,
    cfg0: &SpinConfiguration,
    times: &[f64],
    h: f64,
    field: &FieldVector,
) -> Result<Trajectory> {
    check_start(j, cfg0)?;
    check_times(times)?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    let n = cfg0.len();
    let mut y = cfg0.spins().to_vec();
    let mut k = vec![vec![Vec3::zeros(); n]; 4];
    let mut tmp = vec![Vec3::zeros(); n];
    let mut t = 0.0;
    let mut out = Trajectory { times: Vec::with_capacity(times.len()), states: Vec::with_capacity(times.len()) };
    for &target in times {
        while t < target {
            let remaining = target - t;
            let last = remaining <= h * (1.0 + 1e-9);
            let step = if last { remaining } else { h };
            eom_rhs_into(j, &y, field, &mut k[0]);
            for s in 1..4 {
                let w = if s == 3 { step } else { 0.5 * step };
                for mu in 0..n {
                    tmp[mu] = y[mu] + k[s - 1][mu] * w;
                }
                eom_rhs_into(j, &tmp, field, &mut k[s]);
            }
            for mu in 0..n {
                y[mu] += (k[0][mu] + k[1][mu] * 2.0 + k[2][mu] * 2.0 + k[3][mu]) * (step / 6.0);
            }
            t = if last { target } else { t + step };
        }
        out.times.push(target);
        out.states.push(SpinConfiguration::from_raw(y.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_configuration, seeded_rng};

    #[test]
    fn zero_couplings_constant() {
        let mut rng = seeded_rng(1);
        let cfg = random_configuration(&mut rng, 3);
        let traj = reference_integrate(&CouplingMatrix::zeros(3), &cfg, 5.0, 1e-10, &FieldVector::zero()).unwrap();
        assert_eq!(traj.states[1], cfg);
    }

    #[test]
    fn single_spin_precession() {
        let s0 = Vec3::new(0.6, 0.0, 0.8);
        let cfg = SpinConfiguration::new(vec![s0]).unwrap();
        let field = FieldVector::new(0.0, 0.0, 1.0);
        let times = sample_times(2.0 * std::f64::consts::PI, 9).unwrap();
        let traj = reference_integrate_at(&CouplingMatrix::zeros(1), &cfg, &times, 1e-10, &field).unwrap();
        for (t, c) in traj.times.iter().zip(&traj.states) {
            // ds/dt = B × s: counterclockwise about z
            let expected = Vec3::new(0.6 * t.cos(), 0.6 * t.sin(), 0.8);
            assert!((c.spin(0) - expected).amax() < 1e-8, "t = {t}");
        }
        assert!((traj.states.last().unwrap().spin(0) - s0).amax() < 1e-8);
    }

    #[test]
    fn rejects_bad_arguments() {
        let cfg = SpinConfiguration::new(vec![Vec3::x(), Vec3::y()]).unwrap();
        let j = CouplingMatrix::uniform(2, 1.0);
        assert!(reference_integrate(&j, &cfg, 1.0, 0.0, &FieldVector::zero()).is_err());
        assert!(reference_integrate(&CouplingMatrix::zeros(3), &cfg, 1.0, 1e-8, &FieldVector::zero()).is_err());
        assert!(rk4_fixed(&j, &cfg, &[1.0], -0.1, &FieldVector::zero()).is_err());
    }

    #[test]
    fn rk4_matches_reference_for_small_steps() {
        let mut rng = seeded_rng(3);
        let cfg = random_configuration(&mut rng, 4);
        let j = CouplingMatrix::from_fn(4, |a, b| (a + 2 * b) as f64 * 0.25);
        let r = reference_integrate(&j, &cfg, 1.0, 1e-12, &FieldVector::zero()).unwrap();
        let q = rk4_fixed(&j, &cfg, &[0.0, 1.0], 1e-3, &FieldVector::zero()).unwrap();
        assert!(r.max_deviation(&q) < 1e-9);
    }
}
