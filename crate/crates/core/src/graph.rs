//! Spin graphs: systems whose couplings are all 0 or 1.
//!
//! A spin graph is integrable iff it has no vertex-induced path on four
//! vertices. The decomposition here splits disconnected graphs into a
//! component and the rest (cross coupling 0) and connected graphs along
//! the components of their complement (cross coupling 1); it fails exactly
//! when a connected graph has a connected complement.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{pairs, CouplingMatrix};
use crate::tree::{components, BJSystem, NestedTree, Split};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinGraph {
    n: usize,
    adj: Vec<bool>,
}

impl SpinGraph {
    pub fn empty(n: usize) -> Self {
        Self { n, adj: vec![false; n * n] }
    }

    /// Builds from 0-based edges; rejects loops and out-of-range vertices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::IndexOutOfRange { index: a.max(b) + 1, n });
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("loop at vertex {}", a + 1)));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path edges")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((0, n - 1));
        }
        Self::from_edges(n, &edges).expect("cycle edges")
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = pairs(n).collect();
        Self::from_edges(n, &edges).expect("complete edges")
    }

    /// The graph of nonzero couplings.
    pub fn support(j: &CouplingMatrix) -> Self {
        let mut g = Self::empty(j.n());
        for (a, b, _) in j.nonzero_entries() {
            g.add_edge(a, b);
        }
        g
    }

    /// Interprets a coupling matrix with entries in {0, 1} as a graph.
    pub fn from_couplings(j: &CouplingMatrix) -> Option<Self> {
        if j.upper().iter().all(|&v| v == 0.0 || v == 1.0) {
            Some(Self::support(j))
        } else {
            None
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.n + b]
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a * self.n + b] = true;
        self.adj[b * self.n + a] = true;
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        pairs(self.n).filter(|&(a, b)| self.has_edge(a, b)).collect()
    }

    pub fn edge_count(&self) -> usize {
        pairs(self.n).filter(|&(a, b)| self.has_edge(a, b)).count()
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&b| self.has_edge(a, b))
    }

    pub fn adjacency(&self) -> CouplingMatrix {
        CouplingMatrix::from_fn(self.n, |a, b| if self.has_edge(a, b) { 1.0 } else { 0.0 })
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.n).collect();
        components(&all, |a, b| self.has_edge(a, b)).len() <= 1
    }

    /// Applies the relabeling `v -> perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut g = Self::empty(self.n);
        for (a, b) in self.edges() {
            g.add_edge(perm[a], perm[b]);
        }
        g
    }
}

/// Lexicographically smallest ordered vertex tuple `(a, b, c, d)` forming an
/// induced path: edges `ab`, `bc`, `cd` present, `ac`, `bd`, `ad` absent.
pub fn find_induced_4chain(g: &SpinGraph) -> Option<[usize; 4]> {
    for a in 0..g.n() {
        for b in g.neighbors(a) {
            for c in g.neighbors(b) {
                if c == a || g.has_edge(a, c) {
                    continue;
                }
                for d in g.neighbors(c) {
                    if d != a && d != b && !g.has_edge(a, d) && !g.has_edge(b, d) {
                        return Some([a, b, c, d]);
                    }
                }
            }
        }
    }
    None
}

pub fn is_induced_4chain(g: &SpinGraph, [a, b, c, d]: [usize; 4]) -> bool {
    let distinct = BTreeSet::from([a, b, c, d]).len() == 4;
    distinct
        && g.has_edge(a, b)
        && g.has_edge(b, c)
        && g.has_edge(c, d)
        && !g.has_edge(a, c)
        && !g.has_edge(b, d)
        && !g.has_edge(a, d)
}

#[derive(Clone, Debug, PartialEq)]
pub enum IntegrabilityVerdict {
    /// Partition tree with coupling 1 at uniform joins and 0 at disjoint ones.
    Integrable(BJSystem),
    /// An induced 4-chain, 0-based.
    NotIntegrable([usize; 4]),
}

impl IntegrabilityVerdict {
    pub fn is_integrable(&self) -> bool {
        matches!(self, IntegrabilityVerdict::Integrable(_))
    }

    pub fn system(&self) -> Option<&BJSystem> {
        match self {
            IntegrabilityVerdict::Integrable(sys) => Some(sys),
            IntegrabilityVerdict::NotIntegrable(_) => None,
        }
    }

    pub fn chain(&self) -> Option<[usize; 4]> {
        match self {
            IntegrabilityVerdict::Integrable(_) => None,
            IntegrabilityVerdict::NotIntegrable(c) => Some(*c),
        }
    }

    pub fn to_json(&self) -> VerdictJson {
        match self {
            IntegrabilityVerdict::Integrable(sys) => {
                VerdictJson { integrable: true, tree: Some(sys.to_nested()), chain: None }
            }
            IntegrabilityVerdict::NotIntegrable(c) => VerdictJson {
                integrable: false,
                tree: None,
                chain: Some(c.map(|v| v + 1)),
            },
        }
    }
}

/// `{"integrable": true, "tree": ...}` or `{"integrable": false, "chain": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub integrable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<NestedTree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<[usize; 4]>,
}

pub fn decompose(g: &SpinGraph) -> IntegrabilityVerdict {
    let all: Vec<usize> = (0..g.n()).collect();
    if g.n() > 0 {
        if let Some(split) = split_graph(g, &all) {
            let sys = BJSystem::from_split(g.n(), &split).expect("decomposition yields a valid tree");
            return IntegrabilityVerdict::Integrable(sys);
        }
    }
    let chain = find_induced_4chain(g)
        .expect("a graph without a uniform or disjoint split contains an induced 4-chain");
    IntegrabilityVerdict::NotIntegrable(chain)
}

fn split_graph(g: &SpinGraph, set: &[usize]) -> Option<Split> {
    if set.len() == 1 {
        return Some(Split::Leaf(set[0]));
    }
    let comps = components(set, |a, b| g.has_edge(a, b));
    let (parts, j) = if comps.len() > 1 {
        (comps, 0.0)
    } else {
        (components(set, |a, b| a != b && !g.has_edge(a, b)), 1.0)
    };
    if parts.len() < 2 {
        return None;
    }
    // k > 2 parts fold left to right
    let mut iter = parts.iter();
    let mut acc = split_graph(g, iter.next().unwrap())?;
    for part in iter {
        acc = Split::join(j, acc, split_graph(g, part)?);
    }
    Some(acc)
}

/// Largest vertex count accepted by the enumerator.
pub const MAX_ENUMERATION_N: usize = 7;

/// Adjacency bitstring in row-major pair order, first pair most significant.
fn code(g: &SpinGraph) -> u32 {
    pairs(g.n()).fold(0u32, |acc, (a, b)| (acc << 1) | g.has_edge(a, b) as u32)
}

fn from_code(n: usize, code: u32) -> SpinGraph {
    let m = n * n.saturating_sub(1) / 2;
    let mut g = SpinGraph::empty(n);
    for (k, (a, b)) in pairs(n).enumerate() {
        if code >> (m - 1 - k) & 1 == 1 {
            g.add_edge(a, b);
        }
    }
    g
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn canonical_code_with(g: &SpinGraph, perms: &[Vec<usize>]) -> u32 {
    let edges = g.edges();
    let n = g.n();
    let m = n * n.saturating_sub(1) / 2;
    perms
        .iter()
        .map(|p| {
            edges.iter().fold(0u32, |acc, &(a, b)| {
                let (x, y) = if p[a] < p[b] { (p[a], p[b]) } else { (p[b], p[a]) };
                acc | 1 << (m - 1 - crate::heisenberg::pair_index(n, x, y))
            })
        })
        .min()
        .unwrap_or(0)
}

/// Canonical form: the relabeling with lexicographically smallest adjacency bitstring.
pub fn canonical_form(g: &SpinGraph) -> SpinGraph {
    from_code(g.n(), canonical_code_with(g, &permutations(g.n())))
}

/// One canonical representative per isomorphism class of connected graphs
/// on `n` vertices, ordered by edge count and then by bitstring.
pub fn enumerate_connected_graphs(n: usize) -> Result<Vec<SpinGraph>> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(Error::InvalidArgument(format!(
            "enumeration supports 1..={MAX_ENUMERATION_N} vertices, got {n}"
        )));
    }
    // grow all graphs vertex by vertex, canonicalizing at each size
    let mut classes: BTreeSet<u32> = BTreeSet::from([0]);
    for k in 2..=n {
        let perms = permutations(k);
        let mut next = BTreeSet::new();
        for &c in &classes {
            let base = from_code(k - 1, c);
            for mask in 0u32..(1 << (k - 1)) {
                let mut g = SpinGraph::empty(k);
                for (a, b) in base.edges() {
                    g.add_edge(a, b);
                }
                for v in 0..k - 1 {
                    if mask >> v & 1 == 1 {
                        g.add_edge(v, k - 1);
                    }
                }
                next.insert(canonical_code_with(&g, &perms));
            }
        }
        classes = next;
    }
    let mut graphs: Vec<(usize, u32, SpinGraph)> = classes
        .into_iter()
        .map(|c| from_code(n, c))
        .filter(SpinGraph::is_connected)
        .map(|g| (g.edge_count(), code(&g), g))
        .collect();
    graphs.sort_by_key(|(e, c, _)| (*e, *c));
    Ok(graphs.into_iter().map(|(_, _, g)| g).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_search_examples() {
        assert_eq!(find_induced_4chain(&SpinGraph::path(4)), Some([0, 1, 2, 3]));
        assert_eq!(find_induced_4chain(&SpinGraph::cycle(4)), None);
        assert_eq!(find_induced_4chain(&SpinGraph::path(5)), Some([0, 1, 2, 3]));
        assert_eq!(find_induced_4chain(&SpinGraph::complete(5)), None);
        // C5 contains induced paths
        let w = find_induced_4chain(&SpinGraph::cycle(5)).unwrap();
        assert!(is_induced_4chain(&SpinGraph::cycle(5), w));
    }

    #[test]
    fn decompose_examples() {
        let dimer = decompose(&SpinGraph::path(2));
        let sys = dimer.system().unwrap();
        assert_eq!(sys.tree().sets(), vec![vec![0, 1], vec![0], vec![1]]);
        assert_eq!(sys.coupling(0), 1.0);

        let square = decompose(&SpinGraph::cycle(4));
        let sys = square.system().unwrap();
        let mut sets = sys.tree().sets();
        sets.sort();
        let mut expected = vec![vec![0, 1, 2, 3], vec![0, 2], vec![1, 3], vec![0], vec![1], vec![2], vec![3]];
        expected.sort();
        assert_eq!(sets, expected);
        assert_eq!(sys.coupling(0), 1.0);
        assert_eq!(sys.hamiltonian_couplings(), SpinGraph::cycle(4).adjacency());

        assert_eq!(decompose(&SpinGraph::path(4)), IntegrabilityVerdict::NotIntegrable([0, 1, 2, 3]));

        let single = decompose(&SpinGraph::empty(1));
        assert_eq!(single.system().unwrap().tree().len(), 1);
    }

    #[test]
    fn disconnected_components_fold_left() {
        let g = SpinGraph::from_edges(5, &[(0, 3), (1, 2)]).unwrap();
        let sys = decompose(&g).system().cloned().unwrap();
        let tree = sys.tree();
        let [a, b] = tree.node(0).children.unwrap();
        assert_eq!(tree.node(a).set, vec![0, 1, 2, 3]);
        assert_eq!(tree.node(b).set, vec![4]);
        let [c, d] = tree.node(a).children.unwrap();
        assert_eq!((tree.node(c).set.clone(), tree.node(d).set.clone()), (vec![0, 3], vec![1, 2]));
        assert_eq!((sys.coupling(0), sys.coupling(a)), (0.0, 0.0));
        assert_eq!(sys.hamiltonian_couplings(), g.adjacency());
    }

    #[test]
    fn enumeration_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| enumerate_connected_graphs(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
        assert!(enumerate_connected_graphs(0).is_err());
        assert!(enumerate_connected_graphs(8).is_err());
    }

    #[test]
    fn canonical_form_is_label_invariant() {
        let g = SpinGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
        let h = g.permuted(&[4, 2, 0, 1, 3]);
        assert_eq!(canonical_form(&g), canonical_form(&h));
    }

    #[test]
    fn verdict_json_shape() {
        let json = serde_json::to_value(decompose(&SpinGraph::path(4)).to_json()).unwrap();
        assert_eq!(json, serde_json::json!({"integrable": false, "chain": [1, 2, 3, 4]}));
        let json = serde_json::to_value(decompose(&SpinGraph::path(2)).to_json()).unwrap();
        assert_eq!(json["integrable"], true);
        assert_eq!(json["tree"]["set"], serde_json::json!([1, 2]));
    }
}
