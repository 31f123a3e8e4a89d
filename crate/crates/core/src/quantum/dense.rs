//! Dense product-basis Hamiltonian and spectrum comparison.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::basis::{eigenvalue, multiplets, CoupledBasisState};
use super::HalfInt;
use crate::error::{Error, Result};
use crate::heisenberg::{pairs, CouplingMatrix};
use crate::tree::BJSystem;

/// Largest Hilbert space dimension handled densely.
pub const DENSE_LIMIT: usize = 4096;

fn dimension(n: usize, s: HalfInt) -> Result<usize> {
    if s.twice() <= 0 {
        return Err(Error::InvalidArgument(format!("spin quantum number must be at least 1/2, got {s}")));
    }
    let d = (s.twice() + 1) as usize;
    match d.checked_pow(n as u32) {
        Some(dim) if dim <= DENSE_LIMIT => Ok(dim),
        other => Err(Error::DimensionGuard { dim: other.unwrap_or(usize::MAX), limit: DENSE_LIMIT }),
    }
}

/// Twice the projection of each spin in product state `index`.
fn projections(index: usize, n: usize, s: HalfInt) -> Vec<i64> {
    let d = (s.twice() + 1) as usize;
    let mut rest = index;
    let mut out = vec![0; n];
    for mu in (0..n).rev() {
        out[mu] = s.twice() - 2 * (rest % d) as i64;
        rest /= d;
    }
    out
}

/// `Σ J_{μν} s_μ·s_ν + B S⁽³⁾` on the product basis, with
/// `s_μ·s_ν = s^z s^z + ½(s⁺s⁻ + s⁻s⁺)`. The matrix is real symmetric.
pub fn dense_hamiltonian(j: &CouplingMatrix, s: HalfInt, field_magnitude: f64) -> Result<DMatrix<f64>> {
    let n = j.n();
    let dim = dimension(n, s)?;
    let d = (s.twice() + 1) as usize;
    let weights: Vec<usize> = (0..n).map(|mu| d.pow((n - 1 - mu) as u32)).collect();
    let ss1 = s.value() * (s.value() + 1.0);
    // ⟨m+1| s⁺ |m⟩
    let raise = |m: f64| (ss1 - m * (m + 1.0)).sqrt();
    let couplings: Vec<(usize, usize, f64)> = pairs(n).map(|(a, b)| (a, b, j.get(a, b))).filter(|e| e.2 != 0.0).collect();
    let mut h = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let tm = projections(col, n, s);
        let m: Vec<f64> = tm.iter().map(|&t| t as f64 / 2.0).collect();
        let mut diag = field_magnitude * m.iter().sum::<f64>();
        for &(a, b, jab) in &couplings {
            diag += jab * m[a] * m[b];
            // ½ J (s⁺_a s⁻_b + s⁻_a s⁺_b)
            if tm[a] < s.twice() && tm[b] > -s.twice() {
                let row = col - weights[a] + weights[b];
                h[(row, col)] += 0.5 * jab * raise(m[a]) * raise(m[b] - 1.0);
            }
            if tm[b] < s.twice() && tm[a] > -s.twice() {
                let row = col - weights[b] + weights[a];
                h[(row, col)] += 0.5 * jab * raise(m[b]) * raise(m[a] - 1.0);
            }
        }
        h[(col, col)] += diag;
    }
    Ok(h)
}

/// Diagonal matrix of the total magnetic quantum number.
pub fn total_sz_matrix(n: usize, s: HalfInt) -> Result<DMatrix<f64>> {
    let dim = dimension(n, s)?;
    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |i, _| {
        projections(i, n, s).iter().sum::<i64>() as f64 / 2.0
    })))
}

/// Sorted eigenvalues of the dense Hamiltonian.
pub fn dense_spectrum(j: &CouplingMatrix, s: HalfInt, field_magnitude: f64) -> Result<Vec<f64>> {
    let h = dense_hamiltonian(j, s, field_magnitude)?;
    let mut values: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: usize,
    pub labels: BTreeMap<String, f64>,
}

/// Energy levels in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Spectrum {
    pub levels: Vec<Level>,
}

impl Spectrum {
    pub fn dimension(&self) -> usize {
        self.levels.iter().map(|l| l.degeneracy).sum()
    }

    /// Every energy repeated by its degeneracy, ascending.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.levels.iter().flat_map(|l| std::iter::repeat_n(l.energy, l.degeneracy)).collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Closed-form spectrum read off the coupled basis: one level per
/// multiplet without field, one per multiplet and `S⁽³⁾` with it.
pub fn closed_form_spectrum(sys: &BJSystem, s: HalfInt, field_magnitude: f64) -> Result<Spectrum> {
    let tree = sys.tree();
    let mut levels = Vec::new();
    for labels in multiplets(tree, s)? {
        let root = labels[0];
        if field_magnitude == 0.0 {
            let state = CoupledBasisState { s, labels, m: root };
            levels.push(Level {
                energy: eigenvalue(sys, &state, 0.0)?,
                degeneracy: (root.twice() + 1) as usize,
                labels: state.named_labels(tree),
            });
        } else {
            for m in root.projections() {
                let state = CoupledBasisState { s, labels: labels.clone(), m };
                let mut names = state.named_labels(tree);
                names.insert("S^(3)".into(), m.value());
                levels.push(Level { energy: eigenvalue(sys, &state, field_magnitude)?, degeneracy: 1, labels: names });
            }
        }
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(Spectrum { levels })
}

/// Largest difference between the closed-form and the dense spectrum,
/// both expanded by degeneracy and sorted.
pub fn spectrum_compare(sys: &BJSystem, s: HalfInt, field_magnitude: f64) -> Result<f64> {
    let dense = dense_spectrum(&sys.hamiltonian_couplings(), s, field_magnitude)?;
    let closed = closed_form_spectrum(sys, s, field_magnitude)?.expanded();
    Ok(dense.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}
