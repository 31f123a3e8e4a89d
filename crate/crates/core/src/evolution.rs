//! Closed-form time evolution of tree-partitioned systems.
//!
//! Writing `H = ½ Σ_M (J(M) − J(M̄)) S_M²`, the flow is a product of
//! rotations of each subsystem about its own total spin. Composing from the
//! leaves towards the root keeps every axis equal to its value at `t = 0`,
//! because rotating a subsystem about its total spin leaves the total spin
//! of every superset and every disjoint set unchanged.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::heisenberg::{FieldVector, SpinConfiguration};
use crate::tree::{node_spins, BJSystem, NodeId};
use crate::{Mat3, Vec3};

/// Rotation about `axis` by the angle `|axis|·t` (right-handed); identity
/// for a zero axis.
pub fn rotation_matrix(axis: &Vec3, t: f64) -> Mat3 {
    let norm = axis.norm();
    if norm == 0.0 || t == 0.0 {
        return Mat3::identity();
    }
    let k = axis / norm;
    let angle = norm * t;
    let (sin, cos) = angle.sin_cos();
    let cross = Mat3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Mat3::identity() + cross * sin + cross * cross * (1.0 - cos)
}

/// State after time `t`; the Zeeman rotation `D(B, t)` is applied last.
pub fn evolve(sys: &BJSystem, cfg0: &SpinConfiguration, t: f64, field: &FieldVector) -> Result<SpinConfiguration> {
    let spins0 = cfg0.spins();
    if spins0.len() != sys.n() {
        return Err(Error::DimensionMismatch { expected: sys.n(), found: spins0.len() });
    }
    let mut out = spins0.to_vec();
    evolve_in_place(sys, &mut out, t);
    if !field.is_zero() {
        let r = rotation_matrix(&field.0, t);
        out.iter_mut().for_each(|s| *s = r * *s);
    }
    Ok(SpinConfiguration::from_raw(out))
}

/// Exact flow of `sys` for time `t` on raw spin vectors, zero field.
pub(crate) fn evolve_in_place(sys: &BJSystem, spins: &mut [Vec3], t: f64) {
    let tree = sys.tree();
    let axes = node_spins(tree, spins);
    let rotations: Vec<Option<Mat3>> = (0..tree.len())
        .map(|id| {
            let rate = sys.rate(id);
            if tree.node(id).is_leaf() || rate == 0.0 {
                None
            } else {
                Some(rotation_matrix(&axes[id], rate * t))
            }
        })
        .collect();
    for (mu, s) in spins.iter_mut().enumerate() {
        let mut id = tree.leaf(mu);
        while let Some(parent) = tree.successor(id) {
            id = parent;
            if let Some(r) = &rotations[id] {
                *s = r * *s;
            }
        }
    }
}

/// Applies the flow of the single term `½ (J(M) − J(M̄)) S_M²` for time `t`,
/// with the axis taken from the current spins.
pub fn apply_node_flow(sys: &BJSystem, id: NodeId, spins: &mut [Vec3], t: f64) {
    let node = sys.tree().node(id);
    if node.is_leaf() {
        return;
    }
    let axis: Vec3 = node.set.iter().map(|&m| spins[m]).sum();
    let r = rotation_matrix(&axis, sys.rate(id) * t);
    for &m in &node.set {
        spins[m] = r * spins[m];
    }
}

/// Composes the node flows in the given order, each with its axis
/// recomputed from the current state.
pub fn evolve_in_order(sys: &BJSystem, cfg0: &SpinConfiguration, t: f64, order: &[NodeId]) -> SpinConfiguration {
    let mut spins = cfg0.spins().to_vec();
    for &id in order {
        apply_node_flow(sys, id, &mut spins, t);
    }
    SpinConfiguration::from_raw(spins)
}

/// Rotates the spins of one subsystem about `axis` by `|axis|·t`.
pub fn rotate_subsystem(cfg: &SpinConfiguration, set: &[usize], axis: &Vec3, t: f64) -> SpinConfiguration {
    let r = rotation_matrix(axis, t);
    let mut spins = cfg.spins().to_vec();
    for &m in set {
        spins[m] = r * spins[m];
    }
    SpinConfiguration::from_raw(spins)
}

/// Index of an action variable: an internal tree node, or the field axis
/// that plays the role of the root's successor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ActionIndex {
    Node(NodeId),
    Field,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionAngle {
    pub index: ActionIndex,
    /// `|S_M|`, or `e·S` for the field index.
    pub action: f64,
    /// Polar angle in `[0, π]`.
    pub theta: f64,
    /// Azimuth in `[0, 2π)`.
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionAngleChart {
    pub entries: Vec<ActionAngle>,
}

impl ActionAngleChart {
    pub fn get(&self, index: ActionIndex) -> Option<&ActionAngle> {
        self.entries.iter().find(|e| e.index == index)
    }
}

/// Cross-product norm below which a frame counts as degenerate.
pub const FRAME_DEGENERACY_TOL: f64 = 1e-9;

fn unit(v: &Vec3, what: &str, node: &str) -> Result<Vec3> {
    let norm = v.norm();
    if norm < FRAME_DEGENERACY_TOL {
        return Err(Error::DegenerateFrame { node: node.to_string(), reason: format!("{what} vanishes") });
    }
    Ok(v / norm)
}

/// Polar and azimuthal angle of `v` in the frame built from `axis` and a
/// reference direction `reference` (which fixes `φ = 0`).
fn frame_angles(axis: &Vec3, reference: &Vec3, v: &Vec3, node: &str) -> Result<(f64, f64)> {
    let c = axis.cross(reference);
    if c.norm() < FRAME_DEGENERACY_TOL {
        return Err(Error::DegenerateFrame {
            node: node.to_string(),
            reason: "axis parallel to its successor axis".into(),
        });
    }
    if axis.cross(v).norm() < FRAME_DEGENERACY_TOL {
        return Err(Error::DegenerateFrame {
            node: node.to_string(),
            reason: "axis parallel to its first branch".into(),
        });
    }
    let e_theta = axis.cross(&c).normalize();
    let e_phi = axis.cross(&e_theta);
    let theta = v.dot(axis).clamp(-1.0, 1.0).acos();
    let phi = v.dot(&e_phi).atan2(v.dot(&e_theta)).rem_euclid(TAU);
    Ok((theta, if phi >= TAU { 0.0 } else { phi }))
}

/// Action-angle coordinates `(S_M, θ_M, φ_M)` for every internal node plus
/// the field index, where `field_direction` is the unit vector `e`.
pub fn action_angles(sys: &BJSystem, cfg: &SpinConfiguration, field_direction: &Vec3) -> Result<ActionAngleChart> {
    let tree = sys.tree();
    let spins = sys.node_spins(cfg)?;
    let e = unit(field_direction, "field direction", "0")?;
    let mut entries = Vec::with_capacity(sys.n());
    for id in tree.internal_nodes() {
        let label = tree.label(id);
        let e_m = unit(&spins[id], "total spin", &label)?;
        let e_bar = match tree.successor(id) {
            Some(p) => unit(&spins[p], "successor total spin", &label)?,
            None => e,
        };
        let [first, _] = tree.node(id).children.expect("internal node");
        let e_first = unit(&spins[first], "branch total spin", &label)?;
        let (theta, phi) = frame_angles(&e_m, &e_bar, &e_first, &label)?;
        entries.push(ActionAngle { index: ActionIndex::Node(id), action: spins[id].norm(), theta, phi });
    }
    // field index: azimuth of the root axis about e, measured from a fixed reference
    let reference = if e.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e_root = unit(&spins[tree.root()], "total spin", &tree.label(tree.root()))?;
    let (theta, phi) = frame_angles(&e, &reference, &e_root, "0")?;
    entries.push(ActionAngle { index: ActionIndex::Field, action: e.dot(&spins[tree.root()]), theta, phi });
    Ok(ActionAngleChart { entries })
}

/// Difference of two angles mapped into `(-π, π]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}
