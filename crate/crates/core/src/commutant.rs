//! Heisenberg constants of motion.
//!
//! The observables commuting with `H` form the nullspace of a linear
//! system with one equation per spin triple. For tree-partitioned systems
//! an explicit family of `N − 1` pairwise commuting constants is read off
//! the tree; for small general systems a bounded exact search decides
//! whether any such family exists inside the commutant.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact;
use crate::heisenberg::{
    commutation_residuals, commutation_system, independence_rank, pair_index, triple_residual, triples,
    CouplingMatrix, TripleResidual, FLOAT_REL_TOL,
};
use crate::io::SparseEntry;
use crate::tree::{detect_tree, BJSystem};

/// Result of solving the commutation system for a Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct ComReport {
    /// Basis of every Heisenberg observable commuting with `H`.
    pub basis: Vec<CouplingMatrix>,
    pub system_rank: usize,
    /// Solved with exact rational arithmetic.
    pub exact: bool,
    /// A commuting family of `N − 1` independent constants, when one was found.
    pub selected_family: Vec<CouplingMatrix>,
    /// `pairwise_commuting[a][b]` for the selected family.
    pub pairwise_commuting: Vec<Vec<bool>>,
    pub search: FamilySearch,
}

/// Outcome of looking for `N − 1` independent, pairwise commuting constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySearch {
    /// Built from a partition tree.
    Tree,
    /// Found by the exact search in the commutant.
    Found,
    /// The exact search proved that no such family exists.
    NoneExists,
    /// Outside the search bounds or not exactly representable.
    NotAttempted,
}

/// Bounds of the exhaustive family search.
pub const SEARCH_MAX_N: usize = 5;
pub const SEARCH_MAX_DIM: usize = 8;

fn to_matrix(n: usize, v: &[f64]) -> CouplingMatrix {
    let mut m = CouplingMatrix::zeros(n);
    for (k, (a, b)) in crate::heisenberg::pairs(n).enumerate() {
        m.set(a, b, v[k]);
    }
    m
}

fn rational_matrix(n: usize, v: &[BigRational]) -> CouplingMatrix {
    to_matrix(n, &v.iter().map(exact::to_f64).collect::<Vec<_>>())
}

/// Every Heisenberg observable commuting with `H`, plus a selected commuting family.
pub fn solve_commutant(j: &CouplingMatrix) -> Result<ComReport> {
    let n = j.n();
    if n < 2 {
        return Err(Error::InvalidArgument("the commutant needs at least two spins".into()));
    }
    let cols = n * (n - 1) / 2;
    let (basis, system_rank, exact_basis) = match j.exact_upper() {
        Some(jx) => {
            let rows = commutation_system(&jx, n);
            let (rank, basis) = exact::nullspace(&rows, cols);
            let mats = basis.iter().map(|v| rational_matrix(n, v)).collect();
            (mats, rank, Some(basis))
        }
        None => {
            let rows = commutation_system(j.upper(), n);
            let (rank, basis) = exact::float_nullspace(&rows, cols, FLOAT_REL_TOL);
            (basis.iter().map(|v| to_matrix(n, v)).collect(), rank, None)
        }
    };
    let (selected_family, search) = if let Some(sys) = detect_tree(j) {
        (commuting_family_for_tree(&sys), FamilySearch::Tree)
    } else {
        match &exact_basis {
            Some(b) => search_family(n, b),
            None => (Vec::new(), FamilySearch::NotAttempted),
        }
    };
    let pairwise_commuting = selected_family
        .iter()
        .map(|a| selected_family.iter().map(|b| crate::heisenberg::commute(a, b).unwrap_or(false)).collect())
        .collect();
    Ok(ComReport {
        basis,
        system_rank,
        exact: exact_basis.is_some(),
        selected_family,
        pairwise_commuting,
        search,
    })
}

/// For each internal node, the observable coupling its two branches with
/// unit strength: the Heisenberg part of `½(S_M² − S_{M₁}² − S_{M₂}²)`.
pub fn commuting_family_for_tree(sys: &BJSystem) -> Vec<CouplingMatrix> {
    let tree = sys.tree();
    tree.internal_nodes()
        .map(|id| {
            let [a, b] = tree.node(id).children.expect("internal node");
            let mut m = CouplingMatrix::zeros(sys.n());
            for &x in &tree.node(a).set {
                for &y in &tree.node(b).set {
                    m.set(x, y, 1.0);
                }
            }
            m
        })
        .collect()
}

/// Pairs of family members whose bracket does not vanish, with witnesses.
#[derive(Clone, Debug, PartialEq)]
pub struct PairFailure {
    pub first: usize,
    pub second: usize,
    pub residuals: Vec<TripleResidual>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyVerification {
    pub size: usize,
    pub rank: usize,
    /// Members (by index) that fail to commute with `H`.
    pub hamiltonian_failures: Vec<(usize, Vec<TripleResidual>)>,
    pub pair_failures: Vec<PairFailure>,
}

impl FamilyVerification {
    pub fn commutes_with_hamiltonian(&self) -> bool {
        self.hamiltonian_failures.is_empty()
    }

    pub fn pairwise_commuting(&self) -> bool {
        self.pair_failures.is_empty()
    }

    pub fn independent(&self) -> bool {
        self.rank == self.size
    }

    pub fn passed(&self) -> bool {
        self.commutes_with_hamiltonian() && self.pairwise_commuting() && self.independent()
    }
}

fn failing(residuals: Vec<TripleResidual>) -> Vec<TripleResidual> {
    residuals.into_iter().filter(|r| !r.vanishes).collect()
}

/// Checks that every member commutes with `H`, that members commute
/// pairwise, and that they are independent.
pub fn verify_family(family: &[CouplingMatrix], j: &CouplingMatrix) -> Result<FamilyVerification> {
    let mut hamiltonian_failures = Vec::new();
    for (k, e) in family.iter().enumerate() {
        let bad = failing(commutation_residuals(e, j)?);
        if !bad.is_empty() {
            hamiltonian_failures.push((k, bad));
        }
    }
    let mut pair_failures = Vec::new();
    for a in 0..family.len() {
        for b in a + 1..family.len() {
            let bad = failing(commutation_residuals(&family[a], &family[b])?);
            if !bad.is_empty() {
                pair_failures.push(PairFailure { first: a, second: b, residuals: bad });
            }
        }
    }
    Ok(FamilyVerification {
        size: family.len(),
        rank: independence_rank(family)?,
        hamiltonian_failures,
        pair_failures,
    })
}

/// True iff `target` is a linear combination of `family`.
pub fn in_span(target: &CouplingMatrix, family: &[CouplingMatrix]) -> Result<bool> {
    let mut with = family.to_vec();
    with.push(target.clone());
    Ok(independence_rank(&with)? == independence_rank(family)?)
}

/// `B_t(x, y)` for every triple: the bracket `{x, y}` in triple coordinates.
fn bracket_coefficients(n: usize, x: &[BigRational], y: &[BigRational]) -> Vec<BigRational> {
    triples(n)
        .map(|(a, b, c)| {
            let p = [pair_index(n, a, b), pair_index(n, a, c), pair_index(n, b, c)];
            triple_residual([&x[p[0]], &x[p[1]], &x[p[2]]], [&y[p[0]], &y[p[1]], &y[p[2]]])
        })
        .collect()
}

fn combine(coeffs: &[BigRational], basis: &[Vec<BigRational>]) -> Vec<BigRational> {
    let len = basis.first().map_or(0, Vec::len);
    let mut out = vec![BigRational::zero(); len];
    for (c, v) in coeffs.iter().zip(basis) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

/// Exact search for `N − 1` independent pairwise commuting observables in
/// the span of `basis` (the commutant of `H`).
///
/// Every maximal commuting subspace contains the centre `Z` of the
/// commutant, so only `k = N − 1 − dim Z` further directions are needed in
/// a complement of `Z`. One direction always commutes with itself; two
/// directions `x, y` exist iff the kernel of the induced map on `Λ²` holds a
/// decomposable bivector `x ∧ y`, which is decided when every bivector is
/// decomposable (complement dimension ≤ 3) or the kernel is a line.
pub fn search_family(n: usize, basis: &[Vec<BigRational>]) -> (Vec<CouplingMatrix>, FamilySearch) {
    let need = n.saturating_sub(1);
    let d = basis.len();
    if d < need {
        return (Vec::new(), FamilySearch::NoneExists);
    }
    if n > SEARCH_MAX_N || d > SEARCH_MAX_DIM {
        return (Vec::new(), FamilySearch::NotAttempted);
    }
    // centre: coefficient vectors a with B_t(Σ a_i c_i, c_k) = 0 for all t, k
    let forms: Vec<Vec<Vec<BigRational>>> = basis
        .iter()
        .map(|x| basis.iter().map(|y| bracket_coefficients(n, x, y)).collect())
        .collect();
    let ntrip = forms.first().and_then(|f| f.first()).map_or(0, Vec::len);
    let mut rows = Vec::new();
    for k in 0..d {
        for t in 0..ntrip {
            rows.push((0..d).map(|i| forms[i][k][t].clone()).collect::<Vec<_>>());
        }
    }
    let (_, centre_coeffs) = exact::nullspace(&rows, d);
    let centre: Vec<Vec<BigRational>> = centre_coeffs.iter().map(|a| combine(a, basis)).collect();
    let z = centre.len();

    let finish = |mut vectors: Vec<Vec<BigRational>>| {
        vectors.truncate(need);
        let fam = vectors
            .into_iter()
            .map(|mut v| {
                exact::normalize_leading(&mut v);
                rational_matrix(n, &v)
            })
            .collect();
        (fam, FamilySearch::Found)
    };
    if z >= need {
        return finish(centre);
    }
    // complement of the centre inside the commutant, chosen from the basis
    let mut span = centre.clone();
    let mut complement = Vec::new();
    for v in basis {
        let mut trial = span.clone();
        trial.push(v.clone());
        if exact::rank(&trial, v.len()) > span.len() {
            span = trial;
            complement.push(v.clone());
        }
    }
    let q = complement.len();
    let k = need - z;
    if q < k {
        return (Vec::new(), FamilySearch::NoneExists);
    }
    if k == 1 {
        let mut vectors = centre;
        vectors.push(complement[0].clone());
        return finish(vectors);
    }
    if k > 2 {
        return (Vec::new(), FamilySearch::NotAttempted);
    }
    // k == 2: kernel of Λ²(complement) → brackets
    let bivectors: Vec<(usize, usize)> = (0..q).flat_map(|i| (i + 1..q).map(move |j| (i, j))).collect();
    let images: Vec<Vec<BigRational>> = bivectors
        .iter()
        .map(|&(i, j)| bracket_coefficients(n, &complement[i], &complement[j]))
        .collect();
    let mut rows = Vec::new();
    for t in 0..ntrip {
        rows.push(images.iter().map(|img| img[t].clone()).collect::<Vec<_>>());
    }
    let (_, kernel) = exact::nullspace(&rows, bivectors.len());
    let pick = match kernel.len() {
        0 => return (Vec::new(), FamilySearch::NoneExists),
        1 => kernel[0].clone(),
        _ if q <= 3 => kernel[0].clone(),
        _ => return (Vec::new(), FamilySearch::NotAttempted),
    };
    // antisymmetric coefficient matrix of the bivector
    let mut p = vec![vec![BigRational::zero(); q]; q];
    for (&(i, j), c) in bivectors.iter().zip(&pick) {
        p[i][j] = c.clone();
        p[j][i] = -c.clone();
    }
    if exact::rank(&p, q) != 2 {
        return (Vec::new(), FamilySearch::NoneExists);
    }
    // columns of a rank-2 bivector matrix span the plane x ∧ y
    let mut plane: Vec<Vec<BigRational>> = Vec::new();
    for col in 0..q {
        let column: Vec<BigRational> = (0..q).map(|r| p[r][col].clone()).collect();
        let mut trial = plane.clone();
        trial.push(column.clone());
        if exact::rank(&trial, q) > plane.len() {
            plane = trial;
        }
        if plane.len() == 2 {
            break;
        }
    }
    let mut vectors = centre;
    for coeffs in &plane {
        vectors.push(combine(coeffs, &complement));
    }
    finish(vectors)
}

/// Sparse form of every basis matrix, 1-based.
pub fn report_json(report: &ComReport) -> serde_json::Value {
    let sparse = |ms: &[CouplingMatrix]| -> Vec<Vec<SparseEntry>> { ms.iter().map(SparseEntry::from_matrix).collect() };
    serde_json::json!({
        "basis": sparse(&report.basis),
        "system_rank": report.system_rank,
        "exact": report.exact,
        "selected_family": sparse(&report.selected_family),
        "pairwise_commuting": report.pairwise_commuting,
        "search": report.search,
    })
}

/// The all-ones pattern: the Heisenberg part of `½ S²`.
pub fn total_spin_pattern(n: usize) -> CouplingMatrix {
    CouplingMatrix::uniform(n, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{decompose, SpinGraph};
    use crate::tree::Split;

    fn m(n: usize, entries: &[(usize, usize)]) -> CouplingMatrix {
        let e: Vec<_> = entries.iter().map(|&(a, b)| (a, b, 1.0)).collect();
        CouplingMatrix::from_entries(n, &e).unwrap()
    }

    #[test]
    fn general_triangle_commutant() {
        let j = CouplingMatrix::from_entries(3, &[(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.5)]).unwrap();
        let report = solve_commutant(&j).unwrap();
        assert!(report.basis.len() >= 2);
        assert_eq!(report.basis.len(), 3 - report.system_rank);
        assert!(in_span(&j, &report.basis).unwrap());
        assert!(in_span(&total_spin_pattern(3), &report.basis).unwrap());
        assert_eq!(report.search, FamilySearch::Found);
        assert!(verify_family(&report.selected_family, &j).unwrap().passed());
    }

    #[test]
    fn chain4_commutant_is_h_and_total_spin() {
        let j = SpinGraph::path(4).adjacency();
        let report = solve_commutant(&j).unwrap();
        assert_eq!(report.basis.len(), 2);
        assert_eq!(independence_rank(&[j.clone(), total_spin_pattern(4)]).unwrap(), 2);
        for b in &report.basis {
            assert!(in_span(b, &[j.clone(), total_spin_pattern(4)]).unwrap());
        }
        assert_eq!(report.search, FamilySearch::NoneExists);
        assert!(report.selected_family.is_empty());
    }

    #[test]
    fn pantahedron_commutant_is_everything() {
        let report = solve_commutant(&CouplingMatrix::uniform(4, 1.0)).unwrap();
        assert_eq!(report.basis.len(), 6);
        assert_eq!(report.system_rank, 0);
    }

    #[test]
    fn tree_family_examples() {
        let dimer = decompose(&SpinGraph::path(2)).system().cloned().unwrap();
        assert_eq!(commuting_family_for_tree(&dimer), vec![m(2, &[(0, 1)])]);

        let square = decompose(&SpinGraph::cycle(4)).system().cloned().unwrap();
        let family = commuting_family_for_tree(&square);
        assert_eq!(
            family,
            vec![m(4, &[(0, 1), (0, 3), (1, 2), (2, 3)]), m(4, &[(0, 2)]), m(4, &[(1, 3)])]
        );
        let v = verify_family(&family, &SpinGraph::cycle(4).adjacency()).unwrap();
        assert!(v.passed());

        let chain3 = decompose(&SpinGraph::path(3)).system().cloned().unwrap();
        let family = commuting_family_for_tree(&chain3);
        assert_eq!(family, vec![m(3, &[(0, 1), (1, 2)]), m(3, &[(0, 2)])]);
    }

    #[test]
    fn verify_family_examples() {
        // path 1-2-3, spin 5 joined to it, spin 4 joined to everything
        let j = m(5, &[(0, 1), (1, 2), (0, 4), (1, 4), (2, 4), (0, 3), (1, 3), (2, 3), (3, 4)]);
        let family = vec![
            j.clone(),
            m(5, &[(0, 2)]),
            m(5, &[(0, 1), (1, 2)]),
            m(5, &[(0, 4), (1, 4), (2, 4)]),
        ];
        assert!(verify_family(&family, &j).unwrap().passed());

        let chain = SpinGraph::path(4).adjacency();
        assert!(verify_family(&[chain.clone()], &chain).unwrap().passed());

        let v = verify_family(&[m(4, &[(0, 3)])], &chain).unwrap();
        assert!(!v.commutes_with_hamiltonian());
        let witnesses: Vec<[usize; 3]> = v.hamiltonian_failures[0].1.iter().map(|r| r.triple).collect();
        assert!(witnesses.contains(&[0, 1, 3]));
    }

    #[test]
    fn scaling_leaves_solution_space_unchanged() {
        let j = m(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]);
        let a = solve_commutant(&j).unwrap();
        let b = solve_commutant(&j.scaled(-2.5)).unwrap();
        assert_eq!(a.basis, b.basis);
    }

    #[test]
    fn weighted_tree_uses_tree_family() {
        let sys = BJSystem::from_split(
            3,
            &Split::join(0.5, Split::join(2.0, Split::Leaf(0), Split::Leaf(1)), Split::Leaf(2)),
        )
        .unwrap();
        let report = solve_commutant(&sys.hamiltonian_couplings()).unwrap();
        assert_eq!(report.search, FamilySearch::Tree);
        assert!(report.pairwise_commuting.iter().flatten().all(|&c| c));
    }
}
