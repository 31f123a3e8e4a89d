//! Partition trees and (B, J)-systems.
//!
//! A partition tree over `{0..n}` is a laminar family of subsets that
//! contains the full set and splits every non-singleton member into exactly
//! two members. Attaching a coupling to each node gives a Heisenberg
//! Hamiltonian whose coupling between two spins is the value at the
//! smallest node containing both.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{pairs, CouplingMatrix, SpinConfiguration};
use crate::Vec3;

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    /// Sorted, 0-based spin indices.
    pub set: Vec<usize>,
    pub parent: Option<NodeId>,
    /// Children ordered by their smallest element.
    pub children: Option<[NodeId; 2]>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn contains(&self, mu: usize) -> bool {
        self.set.binary_search(&mu).is_ok()
    }
}

/// The first violated clause found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeViolation {
    /// An index is not in `0..n`.
    IndexOutOfRange { set: Vec<usize>, n: usize },
    /// The empty set is a member.
    EmptySet,
    /// The full index set is missing.
    MissingRoot,
    /// Two members overlap without being nested.
    NotNested { first: Vec<usize>, second: Vec<usize> },
    /// A non-singleton member is not the disjoint union of two members.
    NotSplit { set: Vec<usize> },
    /// Node count differs from `2n - 1`.
    WrongSize { found: usize, expected: usize },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::IndexOutOfRange { set, n } => {
                write!(f, "set {} has an index outside 1..={n}", set_label(set))
            }
            TreeViolation::EmptySet => write!(f, "the empty set is a member"),
            TreeViolation::MissingRoot => write!(f, "the full index set is not a member"),
            TreeViolation::NotNested { first, second } => write!(
                f,
                "sets {} and {} overlap without being nested",
                set_label(first),
                set_label(second)
            ),
            TreeViolation::NotSplit { set } => {
                write!(f, "set {} is not the disjoint union of two members", set_label(set))
            }
            TreeViolation::WrongSize { found, expected } => {
                write!(f, "tree has {found} nodes, expected {expected}")
            }
        }
    }
}

/// Renders a 0-based set with 1-based labels, e.g. `{1,3}`.
pub fn set_label(set: &[usize]) -> String {
    let inner: Vec<String> = set.iter().map(|m| (m + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn normalize_sets(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    // larger sets first, ties by content
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    out.dedup();
    out
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn intersects(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.binary_search(x).is_ok())
}

/// Checks the partition-tree axioms on a raw family of 0-based sets.
pub fn validate(n: usize, sets: &[Vec<usize>]) -> std::result::Result<(), TreeViolation> {
    let sets = normalize_sets(sets);
    if let Some(bad) = sets.iter().find(|s| s.iter().any(|&m| m >= n)) {
        return Err(TreeViolation::IndexOutOfRange { set: bad.clone(), n });
    }
    if sets.iter().any(|s| s.is_empty()) {
        return Err(TreeViolation::EmptySet);
    }
    if !sets.iter().any(|s| s.len() == n) || n == 0 {
        return Err(TreeViolation::MissingRoot);
    }
    for (a, first) in sets.iter().enumerate() {
        for second in &sets[a + 1..] {
            if intersects(first, second) && !is_subset(second, first) && !is_subset(first, second) {
                return Err(TreeViolation::NotNested { first: first.clone(), second: second.clone() });
            }
        }
    }
    for set in sets.iter().filter(|s| s.len() > 1) {
        if maximal_children(set, &sets).is_none() {
            return Err(TreeViolation::NotSplit { set: set.clone() });
        }
    }
    if sets.len() != 2 * n - 1 {
        return Err(TreeViolation::WrongSize { found: sets.len(), expected: 2 * n - 1 });
    }
    Ok(())
}

/// The two maximal proper subsets of `set` within a laminar family, if they
/// partition `set`.
fn maximal_children<'a>(set: &[usize], sets: &'a [Vec<usize>]) -> Option<[&'a Vec<usize>; 2]> {
    let proper: Vec<&Vec<usize>> = sets
        .iter()
        .filter(|s| s.len() < set.len() && is_subset(s, set))
        .collect();
    let maximal: Vec<&Vec<usize>> = proper
        .iter()
        .filter(|s| !proper.iter().any(|t| t.len() > s.len() && is_subset(s, t)))
        .cloned()
        .collect();
    if maximal.len() == 2 && maximal[0].len() + maximal[1].len() == set.len() {
        let mut pair = [maximal[0], maximal[1]];
        pair.sort_by_key(|s| s[0]);
        Some(pair)
    } else {
        None
    }
}

/// Binary partition tree stored as an arena; node 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionTree {
    n: usize,
    nodes: Vec<TreeNode>,
    leaves: Vec<NodeId>,
}

impl PartitionTree {
    /// Builds a tree from a family of 0-based sets after validating it.
    pub fn from_sets(n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        validate(n, sets).map_err(|v| Error::InvalidTree(v.to_string()))?;
        let sets = normalize_sets(sets);
        let mut tree = PartitionTree { n, nodes: Vec::with_capacity(sets.len()), leaves: vec![0; n] };
        tree.push_subtree(&sets, &sets[0], None);
        Ok(tree)
    }

    fn push_subtree(&mut self, sets: &[Vec<usize>], set: &[usize], parent: Option<NodeId>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(TreeNode { set: set.to_vec(), parent, children: None });
        if set.len() == 1 {
            self.leaves[set[0]] = id;
        } else {
            let [a, b] = maximal_children(set, sets).expect("validated tree");
            let left = self.push_subtree(sets, a, Some(id));
            let right = self.push_subtree(sets, b, Some(id));
            self.nodes[id].children = Some([left, right]);
        }
        id
    }

    /// The single-spin tree.
    pub fn trivial() -> Self {
        Self::from_sets(1, &[vec![0]]).expect("trivial tree")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Sets of all nodes in arena (pre-order) order.
    pub fn sets(&self) -> Vec<Vec<usize>> {
        self.nodes.iter().map(|n| n.set.clone()).collect()
    }

    /// Nodes with two children, in pre-order.
    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&id| !self.nodes[id].is_leaf())
    }

    pub fn leaf(&self, mu: usize) -> NodeId {
        self.leaves[mu]
    }

    /// The successor (smallest strict superset) of a node; `None` for the root.
    pub fn successor(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn find(&self, set: &[usize]) -> Option<NodeId> {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        self.nodes.iter().position(|n| n.set == sorted)
    }

    pub fn label(&self, id: NodeId) -> String {
        set_label(&self.nodes[id].set)
    }

    fn check_index(&self, mu: usize) -> Result<()> {
        if mu >= self.n {
            return Err(Error::IndexOutOfRange { index: mu + 1, n: self.n });
        }
        Ok(())
    }

    /// All nodes containing `mu`, from the root down to the leaf `{mu}`.
    pub fn construction_path(&self, mu: usize) -> Result<Vec<NodeId>> {
        self.check_index(mu)?;
        let mut path = vec![self.leaves[mu]];
        while let Some(p) = self.nodes[*path.last().unwrap()].parent {
            path.push(p);
        }
        path.reverse();
        Ok(path)
    }

    /// Smallest node containing both spins.
    pub fn meet(&self, mu: usize, nu: usize) -> Result<NodeId> {
        self.check_index(mu)?;
        self.check_index(nu)?;
        if mu == nu {
            return Err(Error::InvalidArgument(format!("meet needs distinct spins, got {} twice", mu + 1)));
        }
        let mut id = self.nodes[self.leaves[mu]].parent.expect("n > 1 has a parent");
        while !self.nodes[id].contains(nu) {
            id = self.nodes[id].parent.expect("root contains every spin");
        }
        Ok(id)
    }
}

/// Recursive description of a binary tree with couplings, used to build
/// systems programmatically.
#[derive(Clone, Debug, PartialEq)]
pub enum Split {
    Leaf(usize),
    Join { j: f64, left: Box<Split>, right: Box<Split> },
}

impl Split {
    pub fn join(j: f64, left: Split, right: Split) -> Split {
        Split::Join { j, left: Box::new(left), right: Box::new(right) }
    }

    fn collect(&self, sets: &mut Vec<Vec<usize>>, js: &mut Vec<(Vec<usize>, f64)>) -> Vec<usize> {
        match self {
            Split::Leaf(m) => {
                sets.push(vec![*m]);
                vec![*m]
            }
            Split::Join { j, left, right } => {
                let mut set = left.collect(sets, js);
                set.extend(right.collect(sets, js));
                set.sort_unstable();
                sets.push(set.clone());
                js.push((set.clone(), *j));
                set
            }
        }
    }
}

/// A partition tree together with a coupling value per node.
#[derive(Clone, Debug, PartialEq)]
pub struct BJSystem {
    tree: PartitionTree,
    j: Vec<f64>,
}

/// `H = ½ Σ_M c_M S_M² + constant`, with singleton terms folded into the constant.
#[derive(Clone, Debug, PartialEq)]
pub struct CasimirForm {
    /// `(node, J(M) − J(M̄))` for every non-singleton node.
    pub terms: Vec<(NodeId, f64)>,
    /// `½ Σ_μ (J({μ}) − J({μ}̄))`, the contribution of `S_{{μ}}² = 1`.
    pub constant: f64,
}

impl BJSystem {
    /// `j` is indexed by node id; leaf entries must be zero.
    pub fn new(tree: PartitionTree, j: Vec<f64>) -> Result<Self> {
        if j.len() != tree.len() {
            return Err(Error::DimensionMismatch { expected: tree.len(), found: j.len() });
        }
        for (id, (&v, node)) in j.iter().zip(tree.nodes()).enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidCoupling(format!("non-finite coupling at {}", tree.label(id))));
            }
            if node.is_leaf() && v != 0.0 {
                return Err(Error::InvalidCoupling(format!("singleton {} must carry zero coupling", tree.label(id))));
            }
        }
        Ok(Self { tree, j })
    }

    /// Couplings given per set; sets absent from the map get zero.
    pub fn from_set_couplings(tree: PartitionTree, couplings: &BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        let j = tree
            .nodes()
            .iter()
            .map(|node| couplings.get(&node.set).copied().unwrap_or(0.0))
            .collect();
        Self::new(tree, j)
    }

    pub fn from_split(n: usize, split: &Split) -> Result<Self> {
        let mut sets = Vec::new();
        let mut js = Vec::new();
        split.collect(&mut sets, &mut js);
        let tree = PartitionTree::from_sets(n, &sets)?;
        Self::from_set_couplings(tree, &js.into_iter().collect())
    }

    /// Every internal node carries the same coupling `c`: the pantahedron.
    pub fn uniform(tree: PartitionTree, c: f64) -> Self {
        let j = tree.nodes().iter().map(|n| if n.is_leaf() { 0.0 } else { c }).collect();
        Self { tree, j }
    }

    pub fn tree(&self) -> &PartitionTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn coupling(&self, id: NodeId) -> f64 {
        self.j[id]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.j
    }

    /// `J(M̄)`, zero above the root.
    pub fn successor_coupling(&self, id: NodeId) -> f64 {
        self.tree.successor(id).map_or(0.0, |p| self.j[p])
    }

    /// `J(M) − J(M̄)`, the rate of the rotation about `S_M`.
    pub fn rate(&self, id: NodeId) -> f64 {
        self.j[id] - self.successor_coupling(id)
    }

    /// `J_{μν} = J(meet(μ, ν))`.
    pub fn hamiltonian_couplings(&self) -> CouplingMatrix {
        let n = self.n();
        let mut m = CouplingMatrix::zeros(n);
        for (a, b) in pairs(n) {
            let id = self.tree.meet(a, b).expect("valid indices");
            m.set(a, b, self.j[id]);
        }
        m
    }

    pub fn casimir_form(&self) -> CasimirForm {
        let mut terms = Vec::new();
        let mut constant = 0.0;
        for (id, node) in self.tree.nodes().iter().enumerate() {
            let c = self.rate(id);
            if node.is_leaf() {
                constant += 0.5 * c;
            } else {
                terms.push((id, c));
            }
        }
        CasimirForm { terms, constant }
    }

    /// Total spin of every node, indexed by node id.
    pub fn node_spins(&self, cfg: &SpinConfiguration) -> Result<Vec<Vec3>> {
        if cfg.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: cfg.len() });
        }
        Ok(node_spins(&self.tree, cfg.spins()))
    }
}

pub(crate) fn node_spins(tree: &PartitionTree, spins: &[Vec3]) -> Vec<Vec3> {
    // children always follow their parent in the arena, so a reverse sweep works
    let mut out = vec![Vec3::zeros(); tree.len()];
    for id in (0..tree.len()).rev() {
        let node = tree.node(id);
        out[id] = match node.children {
            None => spins[node.set[0]],
            Some([a, b]) => out[a] + out[b],
        };
    }
    out
}

impl CasimirForm {
    pub fn evaluate(&self, system: &BJSystem, cfg: &SpinConfiguration) -> Result<f64> {
        let spins = system.node_spins(cfg)?;
        Ok(0.5 * self.terms.iter().map(|&(id, c)| c * spins[id].norm_squared()).sum::<f64>() + self.constant)
    }
}

/// Nested JSON form of a system: `{"set": [...], "j": 1.0, "children": [...]}`
/// with 1-based, ascending sets and children ordered by smallest element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedTree {
    pub set: Vec<usize>,
    #[serde(default)]
    pub j: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NestedTree>,
}

impl BJSystem {
    pub fn to_nested(&self) -> NestedTree {
        self.nested_from(self.tree.root())
    }

    fn nested_from(&self, id: NodeId) -> NestedTree {
        let node = self.tree.node(id);
        NestedTree {
            set: node.set.iter().map(|m| m + 1).collect(),
            j: self.j[id],
            children: node
                .children
                .map(|cs| cs.iter().map(|&c| self.nested_from(c)).collect())
                .unwrap_or_default(),
        }
    }

    pub fn from_nested(nested: &NestedTree) -> Result<Self> {
        let n = nested.set.len();
        let mut sets = Vec::new();
        let mut js = BTreeMap::new();
        flatten_nested(nested, n, &mut sets, &mut js)?;
        let tree = PartitionTree::from_sets(n, &sets)?;
        Self::from_set_couplings(tree, &js)
    }
}

fn flatten_nested(
    node: &NestedTree,
    n: usize,
    sets: &mut Vec<Vec<usize>>,
    js: &mut BTreeMap<Vec<usize>, f64>,
) -> Result<Vec<usize>> {
    let mut set = Vec::with_capacity(node.set.len());
    for &m in &node.set {
        if m == 0 || m > n {
            return Err(Error::IndexOutOfRange { index: m, n });
        }
        set.push(m - 1);
    }
    set.sort_unstable();
    match node.children.len() {
        0 => {}
        2 => {
            let mut union = flatten_nested(&node.children[0], n, sets, js)?;
            union.extend(flatten_nested(&node.children[1], n, sets, js)?);
            union.sort_unstable();
            if union != set {
                return Err(Error::InvalidTree(format!(
                    "children of {} do not partition it",
                    set_label(&set)
                )));
            }
        }
        k => {
            return Err(Error::InvalidTree(format!("node {} has {k} children, expected 0 or 2", set_label(&set))))
        }
    }
    if node.children.is_empty() && set.len() > 1 {
        return Err(Error::InvalidTree(format!("node {} has no children", set_label(&set))));
    }
    js.insert(set.clone(), node.j);
    sets.push(set.clone());
    Ok(set)
}

fn values_equal(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Finds a partition tree reproducing a coupling matrix, if one exists.
///
/// At every level the cross coupling `c` of a split is forced: the graph of
/// pairs with `J ≠ c` must be disconnected, and at most one value of `c`
/// can achieve this. Components are joined left to right in order of their
/// smallest spin.
pub fn detect_tree(j: &CouplingMatrix) -> Option<BJSystem> {
    let n = j.n();
    if n == 0 {
        return None;
    }
    let all: Vec<usize> = (0..n).collect();
    let split = detect_split(j, &all)?;
    BJSystem::from_split(n, &split).ok()
}

fn detect_split(j: &CouplingMatrix, set: &[usize]) -> Option<Split> {
    if set.len() == 1 {
        return Some(Split::Leaf(set[0]));
    }
    let v = set[0];
    let mut candidates: Vec<f64> = Vec::new();
    for &w in &set[1..] {
        let c = j.get(v, w);
        if !candidates.iter().any(|&d| values_equal(c, d)) {
            candidates.push(c);
        }
    }
    for c in candidates {
        let comps = components(set, |a, b| !values_equal(j.get(a, b), c));
        if comps.len() < 2 {
            continue;
        }
        let mut parts = comps.iter().map(|comp| detect_split(j, comp));
        let mut acc = parts.next()??;
        for part in parts {
            acc = Split::join(c, acc, part?);
        }
        return Some(acc);
    }
    None
}

/// Largest spin count for which every partition tree is enumerated.
pub const ENUMERATION_MAX_N: usize = 7;

/// Every binary partition tree on `n` spins, as set families.
pub fn all_partition_trees(n: usize) -> Result<Vec<PartitionTree>> {
    if n == 0 || n > ENUMERATION_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "tree enumeration needs 1 <= n <= {ENUMERATION_MAX_N}, got {n}"
        )));
    }
    let all: Vec<usize> = (0..n).collect();
    hierarchies(&all).into_iter().map(|sets| PartitionTree::from_sets(n, &sets)).collect()
}

fn hierarchies(set: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if set.len() == 1 {
        return vec![vec![set.to_vec()]];
    }
    let rest = &set[1..];
    let mut out = Vec::new();
    // the first spin always goes left; the right part must be non-empty
    for mask in 0..(1u32 << rest.len()) - 1 {
        let mut left = vec![set[0]];
        let mut right = Vec::new();
        for (k, &v) in rest.iter().enumerate() {
            if mask & (1 << k) != 0 {
                left.push(v);
            } else {
                right.push(v);
            }
        }
        for l in hierarchies(&left) {
            for r in hierarchies(&right) {
                let mut sets = vec![set.to_vec()];
                sets.extend(l.iter().cloned());
                sets.extend(r.iter().cloned());
                out.push(sets);
            }
        }
    }
    out
}

/// Every tree system whose Hamiltonian couplings equal `j`. A cograph with
/// a join or union of three or more parts admits several trees.
pub fn compatible_systems(j: &CouplingMatrix) -> Result<Vec<BJSystem>> {
    let mut out = Vec::new();
    'trees: for tree in all_partition_trees(j.n())? {
        let mut js = vec![0.0; tree.len()];
        for id in tree.internal_nodes() {
            let [a, b] = tree.node(id).children.expect("internal node");
            let (sa, sb) = (&tree.node(a).set, &tree.node(b).set);
            let c = j.get(sa[0], sb[0]);
            if sa.iter().any(|&x| sb.iter().any(|&y| !values_equal(j.get(x, y), c))) {
                continue 'trees;
            }
            js[id] = c;
        }
        out.push(BJSystem::new(tree, js)?);
    }
    Ok(out)
}

/// Connected components of the graph on `set` with the given adjacency,
/// each sorted, ordered by smallest element.
pub(crate) fn components(set: &[usize], adjacent: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut seen = vec![false; set.len()];
    let mut out = Vec::new();
    for start in 0..set.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(a) = stack.pop() {
            comp.push(set[a]);
            for b in 0..set.len() {
                if !seen[b] && adjacent(set[a], set[b]) {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::evaluate_observable;
    use crate::random::{random_configuration, seeded_rng};

    fn square_sets() -> Vec<Vec<usize>> {
        vec![vec![0, 1, 2, 3], vec![0, 2], vec![1, 3], vec![0], vec![1], vec![2], vec![3]]
    }

    #[test]
    fn tree_enumeration_counts() {
        // (2n-3)!! binary hierarchies on n labelled leaves
        let counts: Vec<usize> = (1..=5).map(|n| all_partition_trees(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 15, 105]);
        assert!(all_partition_trees(0).is_err());
    }

    #[test]
    fn compatible_systems_of_small_graphs() {
        let complete = CouplingMatrix::from_fn(4, |_, _| 1.0);
        assert_eq!(compatible_systems(&complete).unwrap().len(), 15);
        let square = square_system().hamiltonian_couplings();
        let systems = compatible_systems(&square).unwrap();
        assert_eq!(systems.len(), 1);
        assert_eq!(systems[0].tree().sets(), square_system().tree().sets());
        let chain = CouplingMatrix::from_entries(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(compatible_systems(&chain).unwrap().is_empty());
    }

    pub(crate) fn square_system() -> BJSystem {
        let tree = PartitionTree::from_sets(4, &square_sets()).unwrap();
        BJSystem::from_set_couplings(tree, &[(vec![0, 1, 2, 3], 1.0)].into_iter().collect()).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate(4, &square_sets()), Ok(()));
        assert_eq!(PartitionTree::from_sets(4, &square_sets()).unwrap().len(), 7);

        let mut missing = square_sets();
        missing.remove(0);
        assert_eq!(validate(4, &missing), Err(TreeViolation::MissingRoot));

        let overlap = vec![vec![0, 1, 2], vec![0, 1], vec![1, 2], vec![0], vec![1], vec![2]];
        assert!(matches!(validate(3, &overlap), Err(TreeViolation::NotNested { .. })));

        let unsplit = vec![vec![0, 1, 2], vec![0], vec![1], vec![2]];
        assert_eq!(validate(3, &unsplit), Err(TreeViolation::NotSplit { set: vec![0, 1, 2] }));

        let empty = vec![vec![0], vec![]];
        assert_eq!(validate(1, &empty), Err(TreeViolation::EmptySet));
        assert!(matches!(validate(2, &[vec![0, 5]]), Err(TreeViolation::IndexOutOfRange { .. })));
    }

    #[test]
    fn meet_and_path_examples() {
        let tree = PartitionTree::from_sets(4, &square_sets()).unwrap();
        assert_eq!(tree.node(tree.meet(0, 2).unwrap()).set, vec![0, 2]);
        assert_eq!(tree.node(tree.meet(0, 1).unwrap()).set, vec![0, 1, 2, 3]);
        for (a, b) in pairs(4) {
            assert_eq!(tree.meet(a, b).unwrap(), tree.meet(b, a).unwrap());
        }
        let path: Vec<Vec<usize>> = tree
            .construction_path(0)
            .unwrap()
            .into_iter()
            .map(|id| tree.node(id).set.clone())
            .collect();
        assert_eq!(path, vec![vec![0, 1, 2, 3], vec![0, 2], vec![0]]);
        assert!(tree.construction_path(4).is_err());
        assert!(tree.meet(1, 1).is_err());

        let trivial = PartitionTree::trivial();
        assert_eq!(trivial.construction_path(0).unwrap(), vec![0]);

        let dimer = PartitionTree::from_sets(2, &[vec![0, 1], vec![0], vec![1]]).unwrap();
        let path: Vec<Vec<usize>> = dimer
            .construction_path(1)
            .unwrap()
            .into_iter()
            .map(|id| dimer.node(id).set.clone())
            .collect();
        assert_eq!(path, vec![vec![0, 1], vec![1]]);
    }

    #[test]
    fn hamiltonian_couplings_examples() {
        let square = square_system().hamiltonian_couplings();
        let expected = CouplingMatrix::from_entries(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).unwrap();
        assert_eq!(square, expected);

        let tree = PartitionTree::from_sets(4, &square_sets()).unwrap();
        assert_eq!(BJSystem::uniform(tree.clone(), 2.5).hamiltonian_couplings(), CouplingMatrix::uniform(4, 2.5));
        assert!(BJSystem::uniform(tree, 0.0).hamiltonian_couplings().is_zero());
    }

    #[test]
    fn casimir_form_examples() {
        let dimer = BJSystem::from_split(2, &Split::join(1.0, Split::Leaf(0), Split::Leaf(1))).unwrap();
        let form = dimer.casimir_form();
        assert_eq!(form.terms, vec![(0, 1.0)]);
        assert_eq!(form.constant, -1.0);

        let square = square_system();
        let form = square.casimir_form();
        let h = square.hamiltonian_couplings();
        let mut rng = seeded_rng(3);
        for _ in 0..100 {
            let cfg = random_configuration(&mut rng, 4);
            let direct = evaluate_observable(&h, &cfg).unwrap();
            let casimir = form.evaluate(&square, &cfg).unwrap();
            assert!((direct - casimir).abs() < 1e-12);
        }

        let zero = BJSystem::uniform(PartitionTree::from_sets(4, &square_sets()).unwrap(), 0.0);
        let form = zero.casimir_form();
        assert!(form.terms.iter().all(|&(_, c)| c == 0.0));
        assert_eq!(form.constant, 0.0);
    }

    #[test]
    fn nested_round_trip() {
        let sys = square_system();
        let nested = sys.to_nested();
        assert_eq!(nested.set, vec![1, 2, 3, 4]);
        assert_eq!(nested.children[0].set, vec![1, 3]);
        assert_eq!(BJSystem::from_nested(&nested).unwrap(), sys);

        let mut broken = nested.clone();
        broken.children[0].set = vec![1, 2];
        assert!(BJSystem::from_nested(&broken).is_err());
    }

    #[test]
    fn rejects_nonzero_leaf_coupling() {
        let tree = PartitionTree::from_sets(2, &[vec![0, 1], vec![0], vec![1]]).unwrap();
        assert!(BJSystem::new(tree, vec![1.0, 0.5, 0.0]).is_err());
    }

    #[test]
    fn detects_weighted_trees() {
        // ((1 -2.0- 2) -0.5- 3), couplings J12 = 2, J13 = J23 = 0.5
        let j = CouplingMatrix::from_entries(3, &[(0, 1, 2.0), (0, 2, 0.5), (1, 2, 0.5)]).unwrap();
        let sys = detect_tree(&j).unwrap();
        assert_eq!(sys.hamiltonian_couplings(), j);

        // general triangle is integrable but not tree-partitioned
        let general = CouplingMatrix::from_entries(3, &[(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)]).unwrap();
        assert!(detect_tree(&general).is_none());

        // disconnected pieces
        let j = CouplingMatrix::from_entries(4, &[(0, 1, 1.0), (2, 3, 3.0)]).unwrap();
        assert_eq!(detect_tree(&j).unwrap().hamiltonian_couplings(), j);
    }
}
