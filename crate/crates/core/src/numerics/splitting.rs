//! Splitting integrators built from exact sub-flows of integrable parts.

use std::time::Instant;

use super::{check_times, sample_times, Trajectory};
use crate::error::{Error, Result};
use crate::evolution::{evolve_in_place, rotation_matrix};
use crate::graph::{decompose, SpinGraph};
use crate::heisenberg::{energy, pairs, CouplingMatrix, FieldVector, SpinConfiguration};
use crate::tree::{detect_tree, BJSystem};
use crate::Vec3;

/// Tree-partitioned parts whose Hamiltonians add up to a target.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPlan {
    parts: Vec<BJSystem>,
}

impl SplitPlan {
    pub fn new(parts: Vec<BJSystem>) -> Result<Self> {
        let n = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("a split plan needs at least one part".into()))?
            .n();
        if let Some(p) = parts.iter().find(|p| p.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: p.n() });
        }
        Ok(SplitPlan { parts })
    }

    pub fn parts(&self) -> &[BJSystem] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts[0].n()
    }

    /// Sum of the parts' coupling matrices.
    pub fn target(&self) -> CouplingMatrix {
        self.parts
            .iter()
            .map(BJSystem::hamiltonian_couplings)
            .reduce(|a, b| &a + &b)
            .expect("nonempty plan")
    }

    /// Checks that the parts add up to `j` within `1e-12` per entry.
    pub fn check_target(&self, j: &CouplingMatrix) -> Result<()> {
        if j.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: j.n(), found: self.n() });
        }
        let sum = self.target();
        for (a, b) in pairs(j.n()) {
            if (sum.get(a, b) - j.get(a, b)).abs() > 1e-12 * (1.0 + j.get(a, b).abs()) {
                return Err(Error::InvalidArgument(format!(
                    "split plan gives J_{{{},{}}} = {}, expected {}",
                    a + 1,
                    b + 1,
                    sum.get(a, b),
                    j.get(a, b)
                )));
            }
        }
        Ok(())
    }
}

fn part_from_edges(n: usize, edges: &[(usize, usize)], value: f64) -> Option<BJSystem> {
    let g = SpinGraph::from_edges(n, edges).ok()?;
    let sys = decompose(&g).system()?.clone();
    let j = sys.couplings().iter().map(|c| c * value).collect();
    BJSystem::new(sys.tree().clone(), j).ok()
}

/// Greedy split into large equal-weight integrable parts.
///
/// Each part starts from the first uncovered edge and takes only edges of
/// the same coupling. It first tries all of them at once; otherwise it
/// grows edge by edge, preferring edges disjoint from the part's spins,
/// as long as the part's graph stays free of induced 4-chains. A part that
/// cannot grow is a single dimer.
pub fn split_edges(j: &CouplingMatrix) -> SplitPlan {
    let n = j.n();
    let edges = j.nonzero_entries();
    if edges.is_empty() {
        return SplitPlan { parts: vec![BJSystem::from_split(n.max(1), &trivial_split(n.max(1))).expect("valid")] };
    }
    let mut covered = vec![false; edges.len()];
    let mut parts = Vec::new();
    while let Some(seed) = covered.iter().position(|c| !c) {
        let value = edges[seed].2;
        let same: Vec<usize> = (0..edges.len()).filter(|&k| !covered[k] && edges[k].2 == value).collect();
        let pair = |k: usize| (edges[k].0, edges[k].1);
        let whole: Vec<_> = same.iter().map(|&k| pair(k)).collect();
        let (members, sys) = match part_from_edges(n, &whole, value) {
            Some(sys) => (same.clone(), sys),
            None => {
                let mut members = vec![seed];
                let mut sys = part_from_edges(n, &[pair(seed)], value).expect("a dimer is integrable");
                loop {
                    let mut touched = vec![false; n];
                    for &k in &members {
                        touched[edges[k].0] = true;
                        touched[edges[k].1] = true;
                    }
                    let mut candidates: Vec<usize> = same.iter().copied().filter(|k| !members.contains(k)).collect();
                    candidates.sort_by_key(|&k| (touched[edges[k].0] || touched[edges[k].1], k));
                    let grown = candidates.into_iter().find_map(|k| {
                        let mut es: Vec<_> = members.iter().map(|&m| pair(m)).collect();
                        es.push(pair(k));
                        part_from_edges(n, &es, value).map(|s| (k, s))
                    });
                    match grown {
                        Some((k, s)) => {
                            members.push(k);
                            sys = s;
                        }
                        None => break,
                    }
                }
                (members, sys)
            }
        };
        for k in members {
            covered[k] = true;
        }
        parts.push(sys);
    }
    SplitPlan { parts }
}

fn trivial_split(n: usize) -> crate::tree::Split {
    use crate::tree::Split;
    (1..n).fold(Split::Leaf(0), |acc, m| Split::join(0.0, acc, Split::Leaf(m)))
}

/// Dimer split from a greedy edge colouring: every part is a set of
/// disjoint dimers.
pub fn split_dimers(j: &CouplingMatrix) -> SplitPlan {
    let n = j.n();
    let mut colours: Vec<CouplingMatrix> = Vec::new();
    let mut used: Vec<Vec<bool>> = Vec::new();
    for (a, b, v) in j.nonzero_entries() {
        let c = match used.iter().position(|u| !u[a] && !u[b]) {
            Some(c) => c,
            None => {
                colours.push(CouplingMatrix::zeros(n));
                used.push(vec![false; n]);
                colours.len() - 1
            }
        };
        colours[c].set(a, b, v);
        used[c][a] = true;
        used[c][b] = true;
    }
    if colours.is_empty() {
        colours.push(CouplingMatrix::zeros(n.max(1)));
    }
    let parts = colours.iter().map(|m| detect_tree(m).expect("disjoint dimers form a tree")).collect();
    SplitPlan { parts }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationStats {
    /// Largest `|H(t) − H(0)|` over all steps.
    pub energy_drift: f64,
    /// Largest `| |s_μ(t)| − 1 |` over all steps.
    pub spin_norm_drift: f64,
    /// Largest componentwise change of the total spin over all steps.
    pub total_spin_drift: f64,
    pub steps: usize,
    pub wall_time: f64,
}

/// Splitting integration from 0 to `t_end`, sampled at both ends.
pub fn integrate_splitting(
    plan: &SplitPlan,
    cfg0: &SpinConfiguration,
    t_end: f64,
    h: f64,
    order: u8,
    field: &FieldVector,
) -> Result<(Trajectory, IntegrationStats)> {
    if h > t_end {
        return Err(Error::InvalidArgument(format!("step {h} exceeds the end time {t_end}")));
    }
    integrate_splitting_at(plan, cfg0, &sample_times(t_end, 2)?, h, order, field)
}

enum Flow<'a> {
    Part(&'a BJSystem),
    Field(Vec3),
}

impl Flow<'_> {
    fn apply(&self, spins: &mut [Vec3], t: f64) {
        match self {
            Flow::Part(sys) => evolve_in_place(sys, spins, t),
            Flow::Field(b) => {
                let r = rotation_matrix(b, t);
                spins.iter_mut().for_each(|s| *s = r * *s);
            }
        }
    }
}

/// Lie-Trotter (`order = 1`) or Strang (`order = 2`) splitting with exact
/// sub-flows; the field is one more part. The step before each sample time
/// is shortened to land on it.
pub fn integrate_splitting_at(
    plan: &SplitPlan,
    cfg0: &SpinConfiguration,
    times: &[f64],
    h: f64,
    order: u8,
    field: &FieldVector,
) -> Result<(Trajectory, IntegrationStats)> {
    if cfg0.len() != plan.n() {
        return Err(Error::DimensionMismatch { expected: plan.n(), found: cfg0.len() });
    }
    check_times(times)?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    if order != 1 && order != 2 {
        return Err(Error::InvalidArgument(format!("splitting order must be 1 or 2, got {order}")));
    }
    let start = Instant::now();
    let mut flows: Vec<Flow> = plan.parts.iter().map(Flow::Part).collect();
    if !field.is_zero() {
        flows.push(Flow::Field(field.0));
    }
    let j = plan.target();
    let mut y = cfg0.spins().to_vec();
    let e0 = energy(&j, cfg0, field)?;
    let s0: Vec3 = y.iter().sum();
    let mut stats = IntegrationStats {
        energy_drift: 0.0,
        spin_norm_drift: cfg0.max_norm_deviation(),
        total_spin_drift: 0.0,
        steps: 0,
        wall_time: 0.0,
    };
    let mut t = 0.0;
    let mut out = Trajectory { times: Vec::with_capacity(times.len()), states: Vec::with_capacity(times.len()) };
    for &target in times {
        while t < target {
            let remaining = target - t;
            let last = remaining <= h * (1.0 + 1e-9);
            let step = if last { remaining } else { h };
            if order == 1 {
                flows.iter().for_each(|f| f.apply(&mut y, step));
            } else {
                let (last_flow, rest) = flows.split_last().expect("nonempty plan");
                rest.iter().for_each(|f| f.apply(&mut y, 0.5 * step));
                last_flow.apply(&mut y, step);
                rest.iter().rev().for_each(|f| f.apply(&mut y, 0.5 * step));
            }
            t = if last { target } else { t + step };
            stats.steps += 1;
            let cfg = SpinConfiguration::from_raw(y.clone());
            stats.energy_drift = stats.energy_drift.max((energy(&j, &cfg, field)? - e0).abs());
            stats.spin_norm_drift = stats.spin_norm_drift.max(cfg.max_norm_deviation());
            let s: Vec3 = y.iter().sum();
            stats.total_spin_drift = stats.total_spin_drift.max((s - s0).amax());
        }
        out.times.push(target);
        out.states.push(SpinConfiguration::from_raw(y.clone()));
    }
    stats.wall_time = start.elapsed().as_secs_f64();
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::evolve;
    use crate::numerics::max_deviation;
    use crate::random::{random_configuration, seeded_rng};

    fn edge_sets(plan: &SplitPlan) -> Vec<Vec<(usize, usize, f64)>> {
        plan.parts().iter().map(|p| p.hamiltonian_couplings().nonzero_entries()).collect()
    }

    #[test]
    fn split_examples() {
        let chain = SpinGraph::path(4).adjacency();
        assert_eq!(
            edge_sets(&split_edges(&chain)),
            vec![vec![(0, 1, 1.0), (2, 3, 1.0)], vec![(1, 2, 1.0)]]
        );
        assert_eq!(split_edges(&SpinGraph::cycle(4).adjacency()).parts().len(), 1);
        let tri = CouplingMatrix::from_entries(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]).unwrap();
        assert_eq!(
            edge_sets(&split_edges(&tri)),
            vec![vec![(0, 1, 1.0), (1, 2, 1.0)], vec![(0, 2, 2.0)]]
        );
        for plan in [split_edges(&tri), split_dimers(&tri)] {
            plan.check_target(&tri).unwrap();
            assert_eq!(plan.target(), tri);
        }
        assert_eq!(split_dimers(&chain).parts().len(), 2);
    }

    #[test]
    fn single_part_is_exact() {
        let sys = decompose(&SpinGraph::complete(4)).system().cloned().unwrap();
        let plan = SplitPlan::new(vec![sys.clone()]).unwrap();
        let mut rng = seeded_rng(2);
        let cfg = random_configuration(&mut rng, 4);
        for order in [1, 2] {
            let (traj, _) = integrate_splitting(&plan, &cfg, 2.0, 0.25, order, &FieldVector::zero()).unwrap();
            let exact = evolve(&sys, &cfg, 2.0, &FieldVector::zero()).unwrap();
            assert!(max_deviation(traj.last().unwrap(), &exact) < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let plan = split_edges(&SpinGraph::path(3).adjacency());
        let mut rng = seeded_rng(2);
        let cfg = random_configuration(&mut rng, 3);
        assert!(integrate_splitting(&plan, &cfg, 1.0, 2.0, 2, &FieldVector::zero()).is_err());
        assert!(integrate_splitting(&plan, &cfg, 1.0, 0.1, 3, &FieldVector::zero()).is_err());
        let other = random_configuration(&mut rng, 4);
        assert!(integrate_splitting(&plan, &other, 1.0, 0.1, 2, &FieldVector::zero()).is_err());
        assert!(SplitPlan::new(vec![]).is_err());
    }
}
