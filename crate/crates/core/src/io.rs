//! JSON and CSV formats. Spin indices are 1-based in every file format.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SpinGraph;
use crate::heisenberg::{energy, CouplingMatrix, FieldVector, SpinConfiguration};
use crate::numerics::{SplitPlan, Trajectory};
use crate::tree::{BJSystem, NestedTree};
use crate::Vec3;

/// One nonzero matrix entry, `i < j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

impl SparseEntry {
    pub fn from_matrix(m: &CouplingMatrix) -> Vec<SparseEntry> {
        m.nonzero_entries()
            .into_iter()
            .map(|(a, b, value)| SparseEntry { i: a + 1, j: b + 1, value })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "J")]
    pub value: f64,
}

/// `{"n": 4, "couplings": [{"i": 1, "j": 2, "J": 1.0}, ...]}`; omitted pairs are zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingFile {
    pub n: usize,
    pub couplings: Vec<CouplingEntry>,
}

/// `{"n": 5, "edges": [[1, 2], [2, 3]]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

/// `{"spins": [[x, y, z], ...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub spins: Vec<[f64; 3]>,
}

/// `{"parts": [<nested system>, ...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub parts: Vec<NestedTree>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn check_index(field: &str, index: usize, n: usize) -> Result<usize> {
    if index == 0 || index > n {
        return Err(Error::Parse(format!("{field}: spin index {index} out of range 1..={n}")));
    }
    Ok(index - 1)
}

impl CouplingFile {
    pub fn to_matrix(&self) -> Result<CouplingMatrix> {
        let mut m = CouplingMatrix::zeros(self.n);
        let mut seen = vec![false; self.n * self.n];
        for (k, e) in self.couplings.iter().enumerate() {
            let a = check_index(&format!("couplings[{k}].i"), e.i, self.n)?;
            let b = check_index(&format!("couplings[{k}].j"), e.j, self.n)?;
            if a == b {
                return Err(Error::Parse(format!("couplings[{k}]: diagonal entry ({}, {})", e.i, e.j)));
            }
            if !e.value.is_finite() {
                return Err(Error::Parse(format!("couplings[{k}].J: not a finite number")));
            }
            let key = a.min(b) * self.n + a.max(b);
            if std::mem::replace(&mut seen[key], true) {
                return Err(Error::Parse(format!("couplings[{k}]: pair ({}, {}) given twice", e.i, e.j)));
            }
            m.set(a, b, e.value);
        }
        Ok(m)
    }

    pub fn from_matrix(m: &CouplingMatrix) -> Self {
        CouplingFile {
            n: m.n(),
            couplings: m
                .nonzero_entries()
                .into_iter()
                .map(|(a, b, value)| CouplingEntry { i: a + 1, j: b + 1, value })
                .collect(),
        }
    }
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<SpinGraph> {
        let mut g = SpinGraph::empty(self.n);
        for (k, [i, j]) in self.edges.iter().enumerate() {
            let a = check_index(&format!("edges[{k}][0]"), *i, self.n)?;
            let b = check_index(&format!("edges[{k}][1]"), *j, self.n)?;
            if a == b {
                return Err(Error::Parse(format!("edges[{k}]: self-loop at {i}")));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn from_graph(g: &SpinGraph) -> Self {
        GraphFile { n: g.n(), edges: g.edges().into_iter().map(|(a, b)| [a + 1, b + 1]).collect() }
    }
}

pub fn parse_couplings(text: &str) -> Result<CouplingMatrix> {
    parse_json::<CouplingFile>(text, "coupling file")?.to_matrix()
}

pub fn parse_graph(text: &str) -> Result<SpinGraph> {
    parse_json::<GraphFile>(text, "graph file")?.to_graph()
}

pub fn parse_system(text: &str) -> Result<BJSystem> {
    BJSystem::from_nested(&parse_json::<NestedTree>(text, "system file")?)
}

pub fn parse_plan(text: &str) -> Result<SplitPlan> {
    let file = parse_json::<PlanFile>(text, "split plan")?;
    let parts = file
        .parts
        .iter()
        .enumerate()
        .map(|(k, p)| BJSystem::from_nested(p).map_err(|e| Error::Parse(format!("parts[{k}]: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    SplitPlan::new(parts)
}

/// Loads a configuration, rejecting spins whose norm is off by more than 1e-6.
pub fn parse_config(text: &str) -> Result<SpinConfiguration> {
    let file = parse_json::<ConfigFile>(text, "configuration file")?;
    for (k, s) in file.spins.iter().enumerate() {
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse(format!("spins[{k}]: not a finite vector")));
        }
    }
    SpinConfiguration::new(file.spins.iter().map(|s| Vec3::new(s[0], s[1], s[2])).collect())
}

pub fn config_to_json(cfg: &SpinConfiguration) -> String {
    let file = ConfigFile { spins: cfg.spins().iter().map(|s| [s.x, s.y, s.z]).collect() };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn plan_to_json(plan: &SplitPlan) -> String {
    let file = PlanFile { parts: plan.parts().iter().map(BJSystem::to_nested).collect() };
    serde_json::to_string_pretty(&file).expect("serializable")
}

/// Any of the accepted system inputs.
#[derive(Clone, Debug)]
pub enum SystemInput {
    Graph(SpinGraph),
    Couplings(CouplingMatrix),
    System(BJSystem),
    Plan(SplitPlan),
}

impl SystemInput {
    /// Decides the format from the top-level keys.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = parse_json(text, "system file")?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("system file: expected a JSON object".into()))?;
        if obj.contains_key("parts") {
            parse_plan(text).map(SystemInput::Plan)
        } else if obj.contains_key("edges") {
            parse_graph(text).map(SystemInput::Graph)
        } else if obj.contains_key("couplings") {
            parse_couplings(text).map(SystemInput::Couplings)
        } else if obj.contains_key("set") {
            parse_system(text).map(SystemInput::System)
        } else {
            Err(Error::Parse(
                "system file: expected one of the keys \"edges\", \"couplings\", \"set\" or \"parts\"".into(),
            ))
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SystemInput::Graph(g) => g.n(),
            SystemInput::Couplings(j) => j.n(),
            SystemInput::System(s) => s.n(),
            SystemInput::Plan(p) => p.n(),
        }
    }

    /// The Hamiltonian's coupling matrix.
    pub fn couplings(&self) -> CouplingMatrix {
        match self {
            SystemInput::Graph(g) => g.adjacency(),
            SystemInput::Couplings(j) => j.clone(),
            SystemInput::System(s) => s.hamiltonian_couplings(),
            SystemInput::Plan(p) => p.target(),
        }
    }
}

/// Header `t,s1x,s1y,s1z,...,energy` and one row per sample.
pub fn trajectory_csv(traj: &Trajectory, j: &CouplingMatrix, field: &FieldVector) -> Result<String> {
    let n = j.n();
    let mut out = String::from("t");
    for mu in 1..=n {
        write!(out, ",s{mu}x,s{mu}y,s{mu}z").unwrap();
    }
    out.push_str(",energy\n");
    for (t, cfg) in traj.times.iter().zip(&traj.states) {
        let e = energy(j, cfg, field)?;
        write!(out, "{t}").unwrap();
        for s in cfg.spins() {
            write!(out, ",{},{},{}", s.x, s.y, s.z).unwrap();
        }
        writeln!(out, ",{e}").unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_roundtrip() {
        let j = parse_couplings(r#"{"n": 3, "couplings": [{"i": 1, "j": 2, "J": 1.5}, {"i": 3, "j": 2, "J": -1}]}"#)
            .unwrap();
        assert_eq!(j.get(0, 1), 1.5);
        assert_eq!(j.get(1, 2), -1.0);
        assert_eq!(j.get(0, 2), 0.0);
        let text = serde_json::to_string(&CouplingFile::from_matrix(&j)).unwrap();
        assert_eq!(parse_couplings(&text).unwrap(), j);
    }

    #[test]
    fn parse_errors_name_the_field() {
        let err = parse_couplings(r#"{"n": 3, "couplings": [{"i": 1, "j": 4, "J": 1}]}"#).unwrap_err();
        assert!(err.to_string().contains("couplings[0].j"), "{err}");
        let err = parse_graph(r#"{"n": 3, "edges": [[1, 2], [2, 2]]}"#).unwrap_err();
        assert!(err.to_string().contains("edges[1]"), "{err}");
        let err = parse_couplings("{\"n\": 3,\n \"couplings\": [{\"i\": 1}]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(err.is_input_error());
    }

    #[test]
    fn config_norm_check() {
        let cfg = parse_config(r#"{"spins": [[1, 0, 0], [0, 0.6, 0.8]]}"#).unwrap();
        assert_eq!(cfg.len(), 2);
        assert!(parse_config(r#"{"spins": [[1, 0, 0], [0, 0.6, 0.81]]}"#).is_err());
        assert!(parse_config(r#"{"spins": [[1.0000005, 0, 0]]}"#).is_ok());
    }

    #[test]
    fn detects_input_kind() {
        assert!(matches!(SystemInput::parse(r#"{"n": 2, "edges": [[1, 2]]}"#).unwrap(), SystemInput::Graph(_)));
        assert!(matches!(
            SystemInput::parse(r#"{"n": 2, "couplings": []}"#).unwrap(),
            SystemInput::Couplings(_)
        ));
        let sys = r#"{"set": [1, 2], "j": 1.0, "children": [{"set": [1]}, {"set": [2]}]}"#;
        assert!(matches!(SystemInput::parse(sys).unwrap(), SystemInput::System(_)));
        let plan = format!(r#"{{"parts": [{sys}]}}"#);
        assert!(matches!(SystemInput::parse(&plan).unwrap(), SystemInput::Plan(_)));
        assert!(SystemInput::parse("[]").is_err());
        assert!(SystemInput::parse(r#"{"foo": 1}"#).is_err());
    }
}
