//! Full analysis of a system and the table of all small connected spin graphs.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::commutant::{
    commuting_family_for_tree, report_json, solve_commutant, verify_family, ComReport, FamilySearch,
    FamilyVerification,
};
use crate::error::{Error, Result};
use crate::graph::{decompose, enumerate_connected_graphs, IntegrabilityVerdict, SpinGraph};
use crate::heisenberg::{commute, n4_determinant, CouplingMatrix};
use crate::io::SparseEntry;
use crate::tree::{compatible_systems, detect_tree, BJSystem};

/// Largest size for which the commutant is solved during analysis.
pub const COMMUTANT_MAX_N: usize = 7;

/// Largest spin count accepted by [`catalog`].
pub const CATALOG_MAX_N: usize = 5;

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub couplings: CouplingMatrix,
    pub graph: Option<SpinGraph>,
    /// `None` when integrability could not be decided.
    pub integrable: Option<bool>,
    pub system: Option<BJSystem>,
    /// Induced 4-chain, 0-based.
    pub chain: Option<[usize; 4]>,
    pub family: Vec<CouplingMatrix>,
    pub verification: FamilyVerification,
    pub n4_determinant: Option<f64>,
    pub commutant: Option<ComReport>,
}

impl AnalysisReport {
    pub fn n(&self) -> usize {
        self.couplings.n()
    }

    pub fn to_json(&self) -> Value {
        let mut out = serde_json::Map::new();
        out.insert("n".into(), json!(self.n()));
        if let Some(g) = &self.graph {
            let edges: Vec<[usize; 2]> = g.edges().into_iter().map(|(a, b)| [a + 1, b + 1]).collect();
            out.insert("edges".into(), json!(edges));
        } else {
            out.insert("couplings".into(), json!(SparseEntry::from_matrix(&self.couplings)));
        }
        out.insert("integrable".into(), json!(self.integrable));
        if let Some(sys) = &self.system {
            out.insert("tree".into(), json!(sys.to_nested()));
        }
        if let Some(c) = self.chain {
            out.insert("chain".into(), json!(c.map(|v| v + 1)));
        }
        let family: Vec<Vec<SparseEntry>> = self.family.iter().map(SparseEntry::from_matrix).collect();
        out.insert("family".into(), json!(family));
        let v = &self.verification;
        out.insert(
            "verification".into(),
            json!({
                "size": v.size,
                "rank": v.rank,
                "commutes_with_hamiltonian": v.commutes_with_hamiltonian(),
                "pairwise_commuting": v.pairwise_commuting(),
                "independent": v.independent(),
                "passed": v.passed(),
            }),
        );
        if let Some(d) = self.n4_determinant {
            out.insert("n4_determinant".into(), json!(d));
        }
        if let Some(c) = &self.commutant {
            let mut com = report_json(c);
            com["dimension"] = json!(c.basis.len());
            out.insert("commutant".into(), com);
        }
        Value::Object(out)
    }
}

fn commutant_of(j: &CouplingMatrix) -> Result<Option<ComReport>> {
    if j.n() < 2 || j.n() > COMMUTANT_MAX_N {
        return Ok(None);
    }
    solve_commutant(j).map(Some)
}

fn finish(
    couplings: CouplingMatrix,
    graph: Option<SpinGraph>,
    integrable: Option<bool>,
    system: Option<BJSystem>,
    chain: Option<[usize; 4]>,
    commutant: Option<ComReport>,
) -> Result<AnalysisReport> {
    let family = match (&system, &commutant) {
        (Some(sys), _) => commuting_family_for_tree(sys),
        (None, Some(c)) if c.search == FamilySearch::Found => c.selected_family.clone(),
        _ => Vec::new(),
    };
    let verification = verify_family(&family, &couplings)?;
    let n4 = if couplings.n() == 4 { Some(n4_determinant(&couplings)?) } else { None };
    Ok(AnalysisReport { couplings, graph, integrable, system, chain, family, verification, n4_determinant: n4, commutant })
}

/// Decompose, build and verify the commuting family, and solve the commutant.
pub fn analyze_graph(g: &SpinGraph) -> Result<AnalysisReport> {
    let j = g.adjacency();
    let commutant = commutant_of(&j)?;
    match decompose(g) {
        IntegrabilityVerdict::Integrable(sys) => finish(j, Some(g.clone()), Some(true), Some(sys), None, commutant),
        IntegrabilityVerdict::NotIntegrable(c) => finish(j, Some(g.clone()), Some(false), None, Some(c), commutant),
    }
}

/// Analysis of a general coupling matrix. Spin graphs are decided by the
/// 4-chain test; other systems by tree detection and, failing that, by the
/// bounded commutant search.
pub fn analyze_couplings(j: &CouplingMatrix) -> Result<AnalysisReport> {
    if let Some(g) = SpinGraph::from_couplings(j) {
        return analyze_graph(&g);
    }
    let commutant = commutant_of(j)?;
    if let Some(sys) = detect_tree(j) {
        return finish(j.clone(), None, Some(true), Some(sys), None, commutant);
    }
    let integrable = match commutant.as_ref().map(|c| &c.search) {
        Some(FamilySearch::Found) => Some(true),
        Some(FamilySearch::NoneExists) => Some(false),
        _ => None,
    };
    finish(j.clone(), None, integrable, None, None, commutant)
}

/// Compact decomposition string: `(A * B)` for a uniform join with unit
/// coupling, `(A *c B)` for coupling `c`, `(A + B)` for a disjoint union.
pub fn tree_expression(sys: &BJSystem) -> String {
    fn walk(sys: &BJSystem, id: usize, out: &mut String) {
        let node = sys.tree().node(id);
        match node.children {
            None => write!(out, "{}", node.set[0] + 1).unwrap(),
            Some([a, b]) => {
                out.push('(');
                walk(sys, a, out);
                let c = sys.coupling(id);
                if c == 0.0 {
                    out.push_str(" + ");
                } else if c == 1.0 {
                    out.push_str(" * ");
                } else {
                    write!(out, " *{c} ").unwrap();
                }
                walk(sys, b, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    walk(sys, sys.tree().root(), &mut out);
    out
}

/// One row of the graph table.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogRow {
    pub index: usize,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub integrable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<[usize; 4]>,
    pub family_size: usize,
    pub family_verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n4_determinant: Option<f64>,
    pub commutant_dimension: Option<usize>,
    pub family_search: Option<FamilySearch>,
}

/// All connected spin graphs on `n` spins, analysed, in canonical order.
pub fn catalog(n: usize) -> Result<Vec<(SpinGraph, AnalysisReport)>> {
    if !(1..=CATALOG_MAX_N).contains(&n) {
        return Err(Error::InvalidArgument(format!("catalog size must be in 1..={CATALOG_MAX_N}, got {n}")));
    }
    enumerate_connected_graphs(n)?
        .into_iter()
        .map(|g| analyze_graph(&g).map(|r| (g, r)))
        .collect()
}

pub fn catalog_rows(n: usize) -> Result<Vec<CatalogRow>> {
    Ok(catalog(n)?
        .into_iter()
        .enumerate()
        .map(|(k, (g, r))| CatalogRow {
            index: k + 1,
            n,
            edges: g.edges().into_iter().map(|(a, b)| [a + 1, b + 1]).collect(),
            integrable: r.integrable == Some(true),
            decomposition: r.system.as_ref().map(tree_expression),
            chain: r.chain.map(|c| c.map(|v| v + 1)),
            family_size: r.family.len(),
            family_verified: r.verification.passed(),
            n4_determinant: r.n4_determinant,
            commutant_dimension: r.commutant.as_ref().map(|c| c.basis.len()),
            family_search: r.commutant.as_ref().map(|c| c.search.clone()),
        })
        .collect())
}

pub fn catalog_csv(rows: &[CatalogRow]) -> String {
    let mut out = String::from(
        "index,n,edges,integrable,decomposition,chain,family_size,family_verified,n4_determinant,commutant_dimension\n",
    );
    for r in rows {
        let edges: Vec<String> = r.edges.iter().map(|[a, b]| format!("{a}-{b}")).collect();
        let chain = r.chain.map(|c| c.map(|v| v.to_string()).join("-")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.n,
            edges.join(" "),
            r.integrable,
            r.decomposition.clone().unwrap_or_default(),
            chain,
            r.family_size,
            r.family_verified,
            r.n4_determinant.map(|d| d.to_string()).unwrap_or_default(),
            r.commutant_dimension.map(|d| d.to_string()).unwrap_or_default(),
        )
        .unwrap();
    }
    out
}

/// A row of the reference table of connected spin graphs: the listed
/// constants of motion besides `H` and `S⁽³⁾`, each a sum of `s_i·s_j`
/// over 1-based pairs, and the listed verdict. Vertex labels refer to a
/// drawing that is not available, so rows are matched up to relabelling.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceRow {
    pub n: usize,
    pub integrable: bool,
    pub constants: &'static [&'static [(usize, usize)]],
}

const fn row(n: usize, integrable: bool, constants: &'static [&'static [(usize, usize)]]) -> ReferenceRow {
    ReferenceRow { n, integrable, constants }
}

pub const REFERENCE_ROWS: &[ReferenceRow] = &[
    row(1, true, &[]),
    row(2, true, &[]),
    row(3, true, &[&[(1, 3)]]),
    row(3, true, &[&[(1, 3)]]),
    row(4, true, &[&[(1, 3)], &[(2, 4)]]),
    row(4, true, &[&[(1, 3)], &[(2, 4)]]),
    row(4, true, &[&[(1, 3)], &[(2, 4)]]),
    row(4, true, &[&[(3, 4)], &[(1, 3), (1, 4)]]),
    row(4, true, &[&[(3, 4)], &[(1, 3), (1, 4)]]),
    row(4, false, &[&[(1, 3), (1, 4), (2, 4)]]),
    row(5, false, &[&[(1, 3)], &[(2, 4), (1, 5), (2, 5), (3, 5)]]),
    row(5, false, &[&[(1, 3)], &[(2, 4), (1, 5), (2, 5), (3, 5)]]),
    row(5, true, &[&[(1, 3)], &[(1, 2), (2, 3)], &[(1, 5), (2, 5), (3, 5)]]),
    row(5, true, &[&[(1, 3)], &[(1, 2), (2, 3)], &[(1, 5), (2, 5), (3, 5)]]),
    row(5, false, &[&[(1, 3), (1, 4), (1, 5), (2, 4), (2, 5), (3, 5)]]),
    row(5, false, &[&[(1, 3), (1, 4), (1, 5), (2, 5), (3, 5)]]),
    row(5, false, &[&[(1, 3), (1, 4), (1, 5), (2, 4), (2, 5)]]),
    row(5, false, &[&[(1, 3), (1, 4), (1, 5), (2, 4), (2, 5)]]),
    row(5, false, &[&[(1, 3), (1, 4), (2, 4), (2, 5), (3, 5)]]),
    row(5, true, &[&[(1, 2)], &[(3, 4)], &[(1, 3), (1, 4), (2, 3), (2, 4)]]),
    row(5, true, &[&[(1, 2)], &[(3, 4)], &[(1, 3), (1, 4), (2, 3), (2, 4)]]),
    row(5, true, &[&[(1, 2)], &[(3, 4)], &[(1, 3), (1, 4), (2, 3), (2, 4)]]),
    row(5, false, &[&[(1, 3), (2, 4), (2, 5), (3, 5)]]),
    row(5, false, &[&[(1, 3), (2, 5), (3, 5)], &[(1, 4), (2, 4), (3, 4), (4, 5)]]),
    row(5, true, &[&[(1, 4)], &[(2, 3)], &[(2, 5), (3, 5)]]),
    row(5, true, &[&[(1, 3)], &[(2, 4)], &[(2, 5), (4, 5)]]),
    row(5, true, &[&[(1, 3)], &[(2, 4)], &[(2, 5), (4, 5)]]),
    row(5, true, &[&[(1, 3)], &[(2, 4)], &[(2, 5), (4, 5)]]),
    row(5, true, &[&[(1, 3)], &[(2, 5)], &[(2, 4), (4, 5)]]),
    row(5, true, &[&[(1, 3)], &[(2, 5)], &[(2, 4), (4, 5)]]),
    row(5, true, &[&[(1, 3)], &[(2, 4)], &[(1, 5), (2, 5), (3, 5), (4, 5)]]),
    row(5, true, &[&[(1, 3)], &[(2, 4)], &[(1, 5), (2, 5), (3, 5), (4, 5)]]),
    row(5, true, &[&[(1, 3)], &[(2, 4)], &[(1, 5), (2, 5), (3, 5), (4, 5)]]),
];

impl ReferenceRow {
    /// The listed constants as coupling matrices.
    pub fn observables(&self) -> Vec<CouplingMatrix> {
        self.constants
            .iter()
            .map(|pairs| {
                let entries: Vec<_> = pairs.iter().map(|&(a, b)| (a - 1, b - 1, 1.0)).collect();
                CouplingMatrix::from_entries(self.n, &entries).expect("valid table entry")
            })
            .collect()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Whether the row's constants fit graph `g` under some relabelling of
/// the row: they commute with `H` and with each other, and for an
/// integrable graph they lie in the span of the family of some tree
/// reproducing the graph, plus `H`
/// (exact rank test).
pub fn reference_row_fits(row: &ReferenceRow, g: &SpinGraph) -> Result<bool> {
    if g.n() != row.n {
        return Ok(false);
    }
    let j = g.adjacency();
    // the tree is not unique, so any tree reproducing the graph may serve
    let spans: Option<Vec<Vec<CouplingMatrix>>> = match decompose(g).system() {
        Some(_) => Some(
            compatible_systems(&j)?
                .iter()
                .map(|sys| {
                    let mut span = commuting_family_for_tree(sys);
                    span.push(j.clone());
                    span
                })
                .collect(),
        ),
        None => None,
    };
    'perms: for perm in permutations(row.n) {
        let constants: Vec<CouplingMatrix> = row
            .constants
            .iter()
            .map(|pairs| {
                let entries: Vec<_> = pairs.iter().map(|&(a, b)| (perm[a - 1], perm[b - 1], 1.0)).collect();
                CouplingMatrix::from_entries(row.n, &entries).expect("valid table entry")
            })
            .collect();
        for (a, c) in constants.iter().enumerate() {
            if !commute(c, &j)? || constants[a + 1..].iter().any(|d| !commute(c, d).unwrap_or(false)) {
                continue 'perms;
            }
        }
        let Some(spans) = &spans else {
            return Ok(true);
        };
        for span in spans {
            let mut inside = true;
            for c in &constants {
                if !crate::commutant::in_span(c, span)? {
                    inside = false;
                    break;
                }
            }
            if inside {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
