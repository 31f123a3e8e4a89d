//! Classical Heisenberg spin systems: configurations, observables of
//! Heisenberg type, the commutation criterion and the equations of motion.
//!
//! Spin indices are 0-based in the Rust API. Everything that faces a user
//! (JSON, CSV, labels, CLI) is 1-based.

use std::ops::{Add, Mul, Sub};

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact;
use crate::Vec3;

/// Relative tolerance used when couplings are not recognisable fractions.
pub const FLOAT_REL_TOL: f64 = 1e-10;

/// Tolerance on `|s|` when accepting user-provided configurations.
pub const LOAD_NORM_TOL: f64 = 1e-6;

/// A point of the phase space: one unit vector per spin.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinConfiguration {
    spins: Vec<Vec3>,
}

impl SpinConfiguration {
    /// Accepts spins whose norms are within [`LOAD_NORM_TOL`] of one and
    /// renormalizes them.
    pub fn new(spins: Vec<Vec3>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::InvalidArgument("configuration needs at least one spin".into()));
        }
        let mut out = Vec::with_capacity(spins.len());
        for (i, s) in spins.into_iter().enumerate() {
            let norm = s.norm();
            if !norm.is_finite() || (norm - 1.0).abs() > LOAD_NORM_TOL {
                return Err(Error::NotNormalized { index: i + 1, norm });
            }
            out.push(s / norm);
        }
        Ok(Self { spins: out })
    }

    /// Wraps vectors as they are. Integrator output goes through here so
    /// that norm drift stays observable.
    pub fn from_raw(spins: Vec<Vec3>) -> Self {
        Self { spins }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[Vec3] {
        &self.spins
    }

    pub fn spin(&self, mu: usize) -> Vec3 {
        self.spins[mu]
    }

    pub fn into_spins(self) -> Vec<Vec3> {
        self.spins
    }

    /// Applies the same rotation to every spin.
    pub fn rotated(&self, rot: &nalgebra::Matrix3<f64>) -> Self {
        Self::from_raw(self.spins.iter().map(|s| rot * s).collect())
    }

    /// Largest deviation of a spin norm from one.
    pub fn max_norm_deviation(&self) -> f64 {
        self.spins
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Symmetric coupling matrix with zero diagonal; also the coefficient
/// matrix of any observable of Heisenberg type `Σ_{μ<ν} E_{μν} s_μ·s_ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    upper: Vec<f64>,
}

/// Position of the pair `(i, j)`, `i < j`, in row-major upper-triangle order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)` with `i < j < n` in row-major order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// All triples `i < j < k < n` in lexicographic order.
pub fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |i| {
        (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k)))
    })
}

impl CouplingMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, upper: vec![0.0; n * n.saturating_sub(1) / 2] }
    }

    /// All pairs coupled with the same value `c`.
    pub fn uniform(n: usize, c: f64) -> Self {
        Self { n, upper: vec![c; n * n.saturating_sub(1) / 2] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self { n, upper: pairs(n).map(|(i, j)| f(i, j)).collect() }
    }

    /// Builds from `(i, j, value)` triples with 0-based indices.
    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = Self::zeros(n);
        for &(i, j, v) in entries {
            m.try_set(i, j, v)?;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[pair_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.upper[pair_index(self.n, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.try_set(i, j, value).expect("valid coupling index");
    }

    pub fn try_set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i == j {
            return Err(Error::InvalidCoupling(format!("diagonal entry ({}, {})", i + 1, j + 1)));
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if b >= self.n {
            return Err(Error::IndexOutOfRange { index: b + 1, n: self.n });
        }
        if !value.is_finite() {
            return Err(Error::InvalidCoupling(format!("non-finite value at ({}, {})", a + 1, b + 1)));
        }
        self.upper[pair_index(self.n, a, b)] = value;
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, upper: self.upper.iter().map(|v| v * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|&v| v == 0.0)
    }

    /// Nonzero entries as `(i, j, value)`, 0-based, row-major.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, f64)> {
        pairs(self.n)
            .zip(&self.upper)
            .filter(|(_, &v)| v != 0.0)
            .map(|((i, j), &v)| (i, j, v))
            .collect()
    }

    /// Exact rational entries, if every entry is a recognisable fraction.
    pub fn exact_upper(&self) -> Option<Vec<BigRational>> {
        exact::recover_all(&self.upper)
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

impl Add for &CouplingMatrix {
    type Output = CouplingMatrix;
    fn add(self, rhs: &CouplingMatrix) -> CouplingMatrix {
        assert_eq!(self.n, rhs.n, "coupling dimension mismatch");
        CouplingMatrix {
            n: self.n,
            upper: self.upper.iter().zip(&rhs.upper).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Homogeneous magnetic field for the Zeeman term `B·S`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct FieldVector(pub Vec3);

impl FieldVector {
    pub fn zero() -> Self {
        Self(Vec3::zeros())
    }

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vec3::new(x, y, z))
    }

    pub fn is_zero(&self) -> bool {
        self.0 == Vec3::zeros()
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `Σ_{μ<ν} E_{μν} s_μ·s_ν`.
pub fn evaluate_observable(e: &CouplingMatrix, cfg: &SpinConfiguration) -> Result<f64> {
    check_dim(e.n(), cfg.len())?;
    Ok(evaluate_unchecked(e, cfg.spins()))
}

pub(crate) fn evaluate_unchecked(e: &CouplingMatrix, spins: &[Vec3]) -> f64 {
    pairs(e.n())
        .zip(e.upper())
        .filter(|(_, &v)| v != 0.0)
        .map(|((i, j), &v)| v * spins[i].dot(&spins[j]))
        .sum()
}

/// Energy including the Zeeman term `B·S`.
pub fn energy(j: &CouplingMatrix, cfg: &SpinConfiguration, field: &FieldVector) -> Result<f64> {
    check_dim(j.n(), cfg.len())?;
    let total: Vec3 = cfg.spins().iter().sum();
    Ok(evaluate_unchecked(j, cfg.spins()) + field.0.dot(&total))
}

/// `S_A = Σ_{μ∈A} s_μ` for a nonempty subset of 0-based indices.
pub fn total_spin(cfg: &SpinConfiguration, subset: &[usize]) -> Result<Vec3> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut sum = Vec3::zeros();
    for &mu in subset {
        if mu >= cfg.len() {
            return Err(Error::IndexOutOfRange { index: mu + 1, n: cfg.len() });
        }
        sum += cfg.spin(mu);
    }
    Ok(sum)
}

/// Commutation residual of one spin triple, with the triple reported 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleResidual {
    pub triple: [usize; 3],
    pub value: f64,
    /// Exact zero for rational inputs, relative-tolerance zero otherwise.
    pub vanishes: bool,
}

/// The bilinear, alternating residual
/// `E_{μν}(F_{μλ}−F_{νλ}) + E_{μλ}(F_{νλ}−F_{μν}) + E_{νλ}(F_{μν}−F_{μλ})`.
pub(crate) fn triple_residual<T>(e: [&T; 3], f: [&T; 3]) -> T
where
    T: Clone,
    for<'a> &'a T: Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
    T: Add<Output = T>,
{
    let [e_mn, e_ml, e_nl] = e;
    let [f_mn, f_ml, f_nl] = f;
    e_mn * &(f_ml - f_nl) + e_ml * &(f_nl - f_mn) + e_nl * &(f_mn - f_ml)
}

fn triple_pairs(n: usize, i: usize, j: usize, k: usize) -> [usize; 3] {
    [pair_index(n, i, j), pair_index(n, i, k), pair_index(n, j, k)]
}

/// Residuals of the commutation condition for every triple `μ<ν<λ`.
/// `{E, F}` vanishes identically iff every residual vanishes.
pub fn commutation_residuals(e: &CouplingMatrix, f: &CouplingMatrix) -> Result<Vec<TripleResidual>> {
    check_dim(e.n(), f.n())?;
    let n = e.n();
    if let (Some(ex), Some(fx)) = (e.exact_upper(), f.exact_upper()) {
        return Ok(triples(n)
            .map(|(i, j, k)| {
                let p = triple_pairs(n, i, j, k);
                let r = triple_residual([&ex[p[0]], &ex[p[1]], &ex[p[2]]], [&fx[p[0]], &fx[p[1]], &fx[p[2]]]);
                TripleResidual { triple: [i, j, k], value: exact::to_f64(&r), vanishes: r.is_zero() }
            })
            .collect());
    }
    let scale = (e.max_abs() * f.max_abs()).max(f64::MIN_POSITIVE);
    let (eu, fu) = (e.upper(), f.upper());
    Ok(triples(n)
        .map(|(i, j, k)| {
            let p = triple_pairs(n, i, j, k);
            let r = triple_residual([&eu[p[0]], &eu[p[1]], &eu[p[2]]], [&fu[p[0]], &fu[p[1]], &fu[p[2]]]);
            TripleResidual { triple: [i, j, k], value: r, vanishes: r.abs() <= FLOAT_REL_TOL * scale }
        })
        .collect())
}

/// True iff the two Heisenberg observables Poisson-commute identically.
pub fn commute(e: &CouplingMatrix, f: &CouplingMatrix) -> Result<bool> {
    Ok(commutation_residuals(e, f)?.iter().all(|r| r.vanishes))
}

/// Rows of the linear system in the unknowns `E_{μν}` (one column per pair)
/// expressing `{E, H} = 0`, one row per triple.
pub(crate) fn commutation_system<T>(j: &[T], n: usize) -> Vec<Vec<T>>
where
    T: Clone + Zero,
    for<'a> &'a T: Sub<&'a T, Output = T>,
{
    let cols = n * n.saturating_sub(1) / 2;
    triples(n)
        .map(|(a, b, c)| {
            let p = triple_pairs(n, a, b, c);
            let (j_ab, j_ac, j_bc) = (&j[p[0]], &j[p[1]], &j[p[2]]);
            let mut row = vec![T::zero(); cols];
            row[p[0]] = j_ac - j_bc;
            row[p[1]] = j_bc - j_ab;
            row[p[2]] = j_ab - j_ac;
            row
        })
        .collect()
}

/// Number of linearly independent observables in the family, i.e. the rank
/// of their coefficient vectors.
pub fn independence_rank(observables: &[CouplingMatrix]) -> Result<usize> {
    let Some(first) = observables.first() else {
        return Ok(0);
    };
    for o in observables {
        check_dim(first.n(), o.n())?;
    }
    let cols = first.upper().len();
    let exact_rows: Option<Vec<Vec<BigRational>>> =
        observables.iter().map(|o| o.exact_upper()).collect();
    Ok(match exact_rows {
        Some(rows) => exact::rank(&rows, cols),
        None => {
            let rows: Vec<Vec<f64>> = observables.iter().map(|o| o.upper().to_vec()).collect();
            exact::float_rank(&rows, cols, FLOAT_REL_TOL)
        }
    })
}

/// Right-hand side of the equations of motion: `ds_μ/dt = h_μ × s_μ`
/// with local field `h_μ = Σ_ν J_{μν} s_ν + B`.
pub fn eom_rhs(j: &CouplingMatrix, cfg: &SpinConfiguration, field: &FieldVector) -> Result<Vec<Vec3>> {
    check_dim(j.n(), cfg.len())?;
    let mut out = vec![Vec3::zeros(); cfg.len()];
    eom_rhs_into(j, cfg.spins(), field, &mut out);
    Ok(out)
}

pub(crate) fn local_fields(j: &CouplingMatrix, spins: &[Vec3], field: &FieldVector, out: &mut [Vec3]) {
    out.iter_mut().for_each(|h| *h = field.0);
    for ((a, b), &v) in pairs(j.n()).zip(j.upper()) {
        if v != 0.0 {
            out[a] += v * spins[b];
            out[b] += v * spins[a];
        }
    }
}

pub(crate) fn eom_rhs_into(j: &CouplingMatrix, spins: &[Vec3], field: &FieldVector, out: &mut [Vec3]) {
    local_fields(j, spins, field, out);
    for (h, s) in out.iter_mut().zip(spins) {
        *h = h.cross(s);
    }
}

/// The 3×3 determinant whose vanishing decides integrability of a 4-spin system.
pub fn n4_determinant(j: &CouplingMatrix) -> Result<f64> {
    check_dim(4, j.n())?;
    Ok(match j.exact_upper() {
        Some(x) => exact::to_f64(&exact::determinant(n4_matrix(&x))),
        None => {
            let m = n4_matrix(j.upper());
            nalgebra::Matrix3::from_fn(|r, c| m[r][c]).determinant()
        }
    })
}

fn n4_matrix<T>(u: &[T]) -> Vec<Vec<T>>
where
    T: Clone + Zero,
    for<'a> &'a T: Sub<&'a T, Output = T>,
{
    // upper-triangle order for n = 4: 12 13 14 23 24 34
    let (j12, j13, j14, j23, j24, j34) = (&u[0], &u[1], &u[2], &u[3], &u[4], &u[5]);
    vec![
        vec![j13 - j23, j23 - j12, T::zero()],
        vec![j14 - j24, T::zero(), j24 - j12],
        vec![T::zero(), j14 - j34, j34 - j13],
    ]
}

/// Integrability test for four spins: the coupling-difference determinant vanishes.
pub fn is_integrable_n4(j: &CouplingMatrix) -> Result<bool> {
    check_dim(4, j.n())?;
    Ok(match j.exact_upper() {
        Some(x) => exact::determinant(n4_matrix(&x)).is_zero(),
        None => {
            let m = n4_matrix(j.upper());
            let det = nalgebra::Matrix3::from_fn(|r, c| m[r][c]).determinant();
            let scale = j.max_abs().powi(3).max(f64::MIN_POSITIVE);
            det.abs() <= FLOAT_REL_TOL * scale
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::poisson_bracket;
    use crate::random::{random_configuration, seeded_rng};

    fn chain(n: usize) -> CouplingMatrix {
        CouplingMatrix::from_fn(n, |i, j| if j == i + 1 { 1.0 } else { 0.0 })
    }

    #[test]
    fn observable_examples() {
        let cfg = SpinConfiguration::new(vec![Vec3::x(); 3]).unwrap();
        assert_eq!(evaluate_observable(&CouplingMatrix::zeros(3), &cfg).unwrap(), 0.0);
        assert_eq!(evaluate_observable(&CouplingMatrix::uniform(3, 1.0), &cfg).unwrap(), 3.0);
        let dimer = SpinConfiguration::new(vec![Vec3::x(); 2]).unwrap();
        assert_eq!(evaluate_observable(&CouplingMatrix::uniform(2, 1.0), &dimer).unwrap(), 1.0);
        assert!(matches!(
            evaluate_observable(&CouplingMatrix::zeros(2), &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn total_spin_examples() {
        let cfg = SpinConfiguration::new(vec![Vec3::x(), Vec3::y(), -Vec3::y()]).unwrap();
        assert_eq!(total_spin(&cfg, &[0]).unwrap(), Vec3::x());
        assert_eq!(total_spin(&cfg, &[1, 2]).unwrap(), Vec3::zeros());
        assert_eq!(total_spin(&cfg, &[0, 1]).unwrap(), Vec3::new(1.0, 1.0, 0.0));
        assert!(matches!(total_spin(&cfg, &[]), Err(Error::EmptySubset)));
        assert!(matches!(total_spin(&cfg, &[3]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn rejects_unnormalized_spins() {
        let err = SpinConfiguration::new(vec![Vec3::new(1.0, 0.1, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { index: 1, .. }));
    }

    #[test]
    fn residual_examples() {
        let f = chain(3);
        let e = CouplingMatrix::from_entries(3, &[(0, 2, 1.0)]).unwrap();
        let r = commutation_residuals(&e, &f).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].value, 0.0);
        assert!(r[0].vanishes);

        assert!(commute(&f, &f).unwrap());

        let f4 = chain(4);
        let e4 = CouplingMatrix::from_entries(4, &[(0, 3, 1.0)]).unwrap();
        let r = commutation_residuals(&e4, &f4).unwrap();
        let t124 = r.iter().find(|r| r.triple == [0, 1, 3]).unwrap();
        assert_eq!(t124.value, -1.0);
        assert!(!t124.vanishes);
        assert!(commutation_residuals(&CouplingMatrix::zeros(2), &CouplingMatrix::zeros(2))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn residual_sign_matches_numerical_bracket() {
        // {E, F} = Σ_t r_t(E, F) det(s_μ, s_ν, s_λ) up to a fixed global sign
        let mut rng = seeded_rng(7);
        let e = CouplingMatrix::from_entries(3, &[(0, 1, 1.0)]).unwrap();
        let f = CouplingMatrix::from_entries(3, &[(1, 2, 1.0)]).unwrap();
        let cfg = random_configuration(&mut rng, 3);
        let s = cfg.spins();
        let numeric = poisson_bracket(
            |x| evaluate_unchecked(&e, x),
            |x| evaluate_unchecked(&f, x),
            s,
            1e-5,
        );
        let r = commutation_residuals(&e, &f).unwrap()[0].value;
        let det = s[0].dot(&s[1].cross(&s[2]));
        assert!((numeric.abs() - (r * det).abs()).abs() < 1e-8);
        assert!(r != 0.0);
    }

    #[test]
    fn rank_examples() {
        let e = CouplingMatrix::uniform(3, 1.0);
        assert_eq!(independence_rank(&[]).unwrap(), 0);
        assert_eq!(independence_rank(&[e.clone()]).unwrap(), 1);
        assert_eq!(independence_rank(&[e.clone(), e.scaled(2.0)]).unwrap(), 1);
        assert_eq!(independence_rank(&[e.clone(), CouplingMatrix::uniform(3, 1.0)]).unwrap(), 1);
        assert_eq!(independence_rank(&[e, chain(3)]).unwrap(), 2);
        let irrational = CouplingMatrix::uniform(3, std::f64::consts::SQRT_2);
        assert_eq!(independence_rank(&[irrational.clone(), irrational.scaled(3.0)]).unwrap(), 1);
    }

    #[test]
    fn eom_examples() {
        let free = SpinConfiguration::new(vec![Vec3::x(), Vec3::y()]).unwrap();
        let rhs = eom_rhs(&CouplingMatrix::zeros(2), &free, &FieldVector::zero()).unwrap();
        assert!(rhs.iter().all(|v| *v == Vec3::zeros()));

        let single = SpinConfiguration::new(vec![Vec3::x()]).unwrap();
        let rhs = eom_rhs(&CouplingMatrix::zeros(1), &single, &FieldVector::new(0.0, 0.0, 1.0)).unwrap();
        assert!((rhs[0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(rhs[0].dot(&Vec3::x()), 0.0);
        // counter-clockwise precession about +z
        assert_eq!(rhs[0], Vec3::y());

        let parallel = SpinConfiguration::new(vec![Vec3::z(), Vec3::z()]).unwrap();
        let rhs = eom_rhs(&CouplingMatrix::uniform(2, 1.0), &parallel, &FieldVector::zero()).unwrap();
        assert!(rhs.iter().all(|v| *v == Vec3::zeros()));
    }

    #[test]
    fn eom_matches_finite_difference_bracket() {
        let mut rng = seeded_rng(11);
        let j = CouplingMatrix::from_fn(4, |i, k| 0.3 + (i * 4 + k) as f64 * 0.17);
        let field = FieldVector::new(0.2, -0.5, 0.7);
        let cfg = random_configuration(&mut rng, 4);
        let rhs = eom_rhs(&j, &cfg, &field).unwrap();
        let ham = |x: &[Vec3]| {
            let total: Vec3 = x.iter().sum();
            evaluate_unchecked(&j, x) + field.0.dot(&total)
        };
        for mu in 0..4 {
            for i in 0..3 {
                let b = poisson_bracket(|x| x[mu][i], ham, cfg.spins(), 1e-5);
                assert!((b - rhs[mu][i]).abs() < 1e-9, "mu={mu} i={i}: {b} vs {}", rhs[mu][i]);
            }
        }
    }

    #[test]
    fn n4_determinant_examples() {
        let chain4 = chain(4);
        assert_eq!(n4_determinant(&chain4).unwrap(), 1.0);
        assert!(!is_integrable_n4(&chain4).unwrap());
        let mut square = chain(4);
        square.set(0, 3, 1.0);
        assert_eq!(n4_determinant(&square).unwrap(), 0.0);
        assert!(is_integrable_n4(&square).unwrap());
        assert!(is_integrable_n4(&CouplingMatrix::uniform(4, 2.5)).unwrap());
        assert!(matches!(is_integrable_n4(&chain(3)), Err(Error::DimensionMismatch { .. })));
    }
}
