//! Coupled basis `|(S_M)_M, S⁽³⁾⟩` built by recursive Clebsch-Gordan coupling.

use std::collections::BTreeMap;

use nalgebra::DVector;

use super::cg::cg_coefficient;
use super::HalfInt;
use crate::error::{Error, Result};
use crate::tree::{BJSystem, NodeId, PartitionTree};

/// Quantum numbers of one coupled basis state: a label per tree node
/// (leaves carry `s`) and the total magnetic quantum number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledBasisState {
    pub s: HalfInt,
    /// Indexed by node id.
    pub labels: Vec<HalfInt>,
    pub m: HalfInt,
}

impl CoupledBasisState {
    pub fn root_label(&self) -> HalfInt {
        self.labels[0]
    }

    /// Labels of the internal nodes keyed as `S_{1,2}`.
    pub fn named_labels(&self, tree: &PartitionTree) -> BTreeMap<String, f64> {
        tree.internal_nodes()
            .map(|id| {
                let set: Vec<String> = tree.node(id).set.iter().map(|m| (m + 1).to_string()).collect();
                (format!("S_{{{}}}", set.join(",")), self.labels[id].value())
            })
            .collect()
    }

    /// Checks leaf labels, the triangle rule and the range of `m`.
    pub fn validate(&self, tree: &PartitionTree) -> Result<()> {
        let bad = |why: String| Err(Error::InvalidArgument(format!("inconsistent basis state: {why}")));
        if self.labels.len() != tree.len() {
            return bad(format!("{} labels for {} tree nodes", self.labels.len(), tree.len()));
        }
        for (id, node) in tree.nodes().iter().enumerate() {
            let label = self.labels[id];
            match node.children {
                None if label != self.s => return bad(format!("leaf {} carries {label}", tree.label(id))),
                None => {}
                Some([a, b]) => {
                    let (la, lb) = (self.labels[a], self.labels[b]);
                    if label < (la - lb).abs() || label > la + lb || (la + lb).int_diff(label).is_none() {
                        return bad(format!("{} = {label} violates the triangle rule", tree.label(id)));
                    }
                }
            }
        }
        let root = self.root_label();
        if self.m.abs() > root || root.int_diff(self.m).is_none() {
            return bad(format!("m = {} out of range for total spin {root}", self.m));
        }
        Ok(())
    }
}

fn check_s(s: HalfInt) -> Result<()> {
    if s.twice() <= 0 {
        return Err(Error::InvalidArgument(format!("spin quantum number must be at least 1/2, got {s}")));
    }
    Ok(())
}

fn subtree_assignments(tree: &PartitionTree, id: NodeId, s: HalfInt) -> Vec<Vec<(NodeId, HalfInt)>> {
    match tree.node(id).children {
        None => vec![vec![(id, s)]],
        Some([a, b]) => {
            let left = subtree_assignments(tree, a, s);
            let right = subtree_assignments(tree, b, s);
            let mut out = Vec::new();
            for l in &left {
                for r in &right {
                    let (la, lb) = (l[0].1, r[0].1);
                    let mut total = (la - lb).abs();
                    while total <= la + lb {
                        let mut v = Vec::with_capacity(l.len() + r.len() + 1);
                        v.push((id, total));
                        v.extend_from_slice(l);
                        v.extend_from_slice(r);
                        out.push(v);
                        total = total + HalfInt::from_int(1);
                    }
                }
            }
            out
        }
    }
}

/// Every admissible label assignment (one per multiplet), indexed by node id.
pub fn multiplets(tree: &PartitionTree, s: HalfInt) -> Result<Vec<Vec<HalfInt>>> {
    check_s(s)?;
    Ok(subtree_assignments(tree, tree.root(), s)
        .into_iter()
        .map(|a| {
            let mut labels = vec![HalfInt::ZERO; tree.len()];
            for (id, l) in a {
                labels[id] = l;
            }
            labels
        })
        .collect())
}

/// All `(2s+1)^N` coupled basis states.
pub fn coupled_basis(tree: &PartitionTree, s: HalfInt) -> Result<Vec<CoupledBasisState>> {
    Ok(multiplets(tree, s)?
        .into_iter()
        .flat_map(|labels| {
            labels[0]
                .projections()
                .map(move |m| CoupledBasisState { s, labels: labels.clone(), m })
                .collect::<Vec<_>>()
        })
        .collect())
}

/// `½ Σ_M (J(M) − J(M̄)) S_M(S_M+1) + B·S⁽³⁾`, leaves included.
pub fn eigenvalue(sys: &BJSystem, state: &CoupledBasisState, field_magnitude: f64) -> Result<f64> {
    let tree = sys.tree();
    state.validate(tree)?;
    let casimirs: f64 = (0..tree.len())
        .map(|id| {
            let l = state.labels[id].value();
            sys.rate(id) * l * (l + 1.0)
        })
        .sum();
    Ok(0.5 * casimirs + field_magnitude * state.m.value())
}

/// Amplitudes on the product basis `|m_1, ..., m_N⟩`, where spin `μ`
/// contributes the digit `s − m_μ` with weight `(2s+1)^(N−1−μ)`.
pub fn expand(tree: &PartitionTree, state: &CoupledBasisState) -> Result<DVector<f64>> {
    state.validate(tree)?;
    let d = (state.s.twice() + 1) as usize;
    let n = tree.n();
    let dim = d
        .checked_pow(n as u32)
        .filter(|&v| v <= super::DENSE_LIMIT)
        .ok_or(Error::DimensionGuard { dim: usize::MAX, limit: super::DENSE_LIMIT })?;
    let mut out = DVector::zeros(dim);
    let weights: Vec<usize> = (0..n).map(|mu| d.pow((n - 1 - mu) as u32)).collect();
    for (index, amp) in expand_node(tree, state, &weights, tree.root(), state.root_label(), state.m)? {
        out[index] += amp;
    }
    Ok(out)
}

fn expand_node(
    tree: &PartitionTree,
    state: &CoupledBasisState,
    weights: &[usize],
    id: NodeId,
    label: HalfInt,
    m: HalfInt,
) -> Result<Vec<(usize, f64)>> {
    let node = tree.node(id);
    let Some([a, b]) = node.children else {
        let mu = node.set[0];
        let digit = state.s.int_diff(m).expect("valid projection") as usize;
        return Ok(vec![(digit * weights[mu], 1.0)]);
    };
    let (la, lb) = (state.labels[a], state.labels[b]);
    let mut out = Vec::new();
    for ma in la.projections() {
        let mb = m - ma;
        if mb.abs() > lb || lb.int_diff(mb).is_none() {
            continue;
        }
        let c = cg_coefficient(la, lb, ma, mb, label, m)?;
        if c == 0.0 {
            continue;
        }
        let left = expand_node(tree, state, weights, a, la, ma)?;
        let right = expand_node(tree, state, weights, b, lb, mb)?;
        for (i, x) in &left {
            for (j, y) in &right {
                out.push((i + j, c * x * y));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{decompose, SpinGraph};

    fn tree_of(g: &SpinGraph) -> PartitionTree {
        decompose(g).system().unwrap().tree().clone()
    }

    #[test]
    fn dimer_and_triangle_multiplets() {
        let dimer = tree_of(&SpinGraph::path(2));
        let roots: Vec<f64> = multiplets(&dimer, HalfInt::HALF).unwrap().iter().map(|l| l[0].value()).collect();
        assert_eq!(roots, vec![0.0, 1.0]);
        assert_eq!(coupled_basis(&dimer, HalfInt::HALF).unwrap().len(), 4);

        let tri = tree_of(&SpinGraph::complete(3));
        let ms = multiplets(&tri, HalfInt::HALF).unwrap();
        let dims: usize = ms.iter().map(|l| (l[0].twice() + 1) as usize).sum();
        assert_eq!(ms.len(), 3);
        assert_eq!(dims, 8);
    }

    #[test]
    fn dimer_eigenvalues() {
        let sys = decompose(&SpinGraph::path(2)).system().cloned().unwrap();
        let mut seen: Vec<f64> = multiplets(sys.tree(), HalfInt::HALF)
            .unwrap()
            .into_iter()
            .map(|labels| {
                let state = CoupledBasisState { s: HalfInt::HALF, m: labels[0], labels };
                eigenvalue(&sys, &state, 0.0).unwrap()
            })
            .collect();
        seen.sort_by(f64::total_cmp);
        assert_eq!(seen, vec![-0.75, 0.25]);
    }

    #[test]
    fn rejects_inconsistent_states() {
        let sys = decompose(&SpinGraph::path(2)).system().cloned().unwrap();
        let mut state = coupled_basis(sys.tree(), HalfInt::HALF).unwrap().remove(0);
        state.labels[0] = HalfInt::from_int(2);
        assert!(eigenvalue(&sys, &state, 0.0).is_err());
        assert!(multiplets(sys.tree(), HalfInt::ZERO).is_err());
    }

    #[test]
    fn expanded_states_are_orthonormal() {
        for g in [SpinGraph::complete(3), SpinGraph::cycle(4), SpinGraph::complete(4)] {
            let tree = tree_of(&g);
            let states = coupled_basis(&tree, HalfInt::HALF).unwrap();
            let vs: Vec<DVector<f64>> = states.iter().map(|s| expand(&tree, s).unwrap()).collect();
            for (a, u) in vs.iter().enumerate() {
                for (b, v) in vs.iter().enumerate() {
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((u.dot(v) - expected).abs() < 1e-12);
                }
            }
        }
    }
}
