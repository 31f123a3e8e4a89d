//! Exact rational linear algebra used wherever an integrability verdict
//! must not depend on rounding: rank, nullspace and small determinants.
//!
//! Floating inputs are lifted to rationals by [`recover_rational`], which
//! only succeeds when the double is the correctly rounded value of a
//! fraction with a modest denominator (integers, `0.5`, `0.1`, `2/3`, ...).

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const MAX_DENOMINATOR: i128 = 1 << 20;

/// Recovers the fraction `p/q` whose nearest double is exactly `x`.
pub fn recover_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    if x == x.trunc() && x.abs() < 9.0e15 {
        return Some(BigRational::from_integer(BigInt::from(x as i64)));
    }
    // continued-fraction convergents
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1.0e18 {
            break;
        }
        let ai = a as i128;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOMINATOR {
            break;
        }
        if (h2 as f64) / (k2 as f64) == x {
            return Some(BigRational::new(BigInt::from(h2), BigInt::from(k2)));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

/// Lifts every value, or returns `None` if any of them is not a recognisable fraction.
pub fn recover_all(values: &[f64]) -> Option<Vec<BigRational>> {
    values.iter().map(|&v| recover_rational(v)).collect()
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
    })
}

/// Row echelon form by fraction-free integer elimination.
///
/// Each rational row is first scaled to a primitive integer row; elimination
/// uses cross-multiplication followed by division by the row content, so no
/// fractions appear. Returns the echelon rows and their pivot columns.
fn integer_echelon(rows: &[Vec<BigRational>], cols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut work: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| primitive_integer_row(row))
        .filter(|row| row.iter().any(|v| !v.is_zero()))
        .collect();
    let mut echelon = Vec::new();
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(pos) = work.iter().position(|row| !row[col].is_zero()) else {
            continue;
        };
        let pivot_row = work.swap_remove(pos);
        let pivot = pivot_row[col].clone();
        for row in work.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (target, p) in row.iter_mut().zip(&pivot_row) {
                *target = &*target * &pivot - &factor * p;
            }
            normalize_content(row);
        }
        work.retain(|row| row.iter().any(|v| !v.is_zero()));
        echelon.push(pivot_row);
        pivots.push(col);
    }
    (echelon, pivots)
}

fn primitive_integer_row(row: &[BigRational]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut ints: Vec<BigInt> = row
        .iter()
        .map(|q| q.numer() * (&lcm / q.denom()))
        .collect();
    normalize_content(&mut ints);
    ints
}

fn normalize_content(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

/// Rank of a rational matrix given by rows.
pub fn rank(rows: &[Vec<BigRational>], cols: usize) -> usize {
    integer_echelon(rows, cols).1.len()
}

/// Exact nullspace basis of the matrix given by `rows` (each of length `cols`).
///
/// Returns `(rank, basis)`; every basis vector is scaled so that its first
/// nonzero entry is `+1`.
pub fn nullspace(rows: &[Vec<BigRational>], cols: usize) -> (usize, Vec<Vec<BigRational>>) {
    let (echelon, pivots) = integer_echelon(rows, cols);
    // reduce to RREF over the rationals (small: one pass of back substitution)
    let mut rref: Vec<Vec<BigRational>> = echelon
        .iter()
        .zip(&pivots)
        .map(|(row, &p)| {
            let lead = BigRational::from_integer(row[p].clone());
            row.iter()
                .map(|v| BigRational::from_integer(v.clone()) / &lead)
                .collect()
        })
        .collect();
    for i in (0..rref.len()).rev() {
        let p = pivots[i];
        for k in 0..i {
            let factor = rref[k][p].clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..cols {
                let delta = &factor * &rref[i][c];
                rref[k][c] -= delta;
            }
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &p) in rref.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            normalize_leading(&mut v);
            v
        })
        .collect();
    (pivots.len(), basis)
}

/// Scales a vector so its first nonzero entry is `+1`.
pub fn normalize_leading(v: &mut [BigRational]) {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        for x in v.iter_mut() {
            *x = &*x / &lead;
        }
    }
}

/// Determinant by exact Gaussian elimination.
pub fn determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            let factor = &m[r][col] / &pivot;
            if factor.is_zero() {
                continue;
            }
            for c in col..n {
                let delta = &factor * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    det
}

/// Numerical rank with threshold `rel_tol * largest singular value`.
pub fn float_rank(rows: &[Vec<f64>], cols: usize, rel_tol: f64) -> usize {
    if rows.is_empty() || cols == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Numerical nullspace via SVD; singular values below `rel_tol * max` count as zero.
pub fn float_nullspace(rows: &[Vec<f64>], cols: usize, rel_tol: f64) -> (usize, Vec<Vec<f64>>) {
    if cols == 0 {
        return (0, Vec::new());
    }
    // pad to at least `cols` rows so that V^T is square
    let nrows = rows.len().max(cols);
    let m = DMatrix::from_fn(nrows, cols, |r, c| rows.get(r).map_or(0.0, |row| row[c]));
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut rank = 0;
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if max > 0.0 && s > rel_tol * max {
            rank += 1;
        } else {
            let mut v: Vec<f64> = vt.row(i).iter().cloned().collect();
            if let Some(lead) = v.iter().find(|x| x.abs() > 1e-12).cloned() {
                v.iter_mut().for_each(|x| *x /= lead);
            }
            basis.push(v);
        }
    }
    (rank, basis)
}

/// Sign of a rational as -1, 0 or 1.
pub fn signum(q: &BigRational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn recovers_simple_fractions() {
        assert_eq!(recover_rational(1.0), Some(q(1, 1)));
        assert_eq!(recover_rational(-0.5), Some(q(-1, 2)));
        assert_eq!(recover_rational(0.1), Some(q(1, 10)));
        assert_eq!(recover_rational(2.0 / 3.0), Some(q(2, 3)));
        assert_eq!(recover_rational(0.0), Some(q(0, 1)));
        assert_eq!(recover_rational(f64::NAN), None);
        assert_eq!(recover_rational(std::f64::consts::PI), None);
    }

    #[test]
    fn rank_and_nullspace_agree() {
        let rows = vec![
            vec![q(1, 1), q(2, 1), q(3, 1)],
            vec![q(2, 1), q(4, 1), q(6, 1)],
            vec![q(0, 1), q(1, 2), q(1, 1)],
        ];
        assert_eq!(rank(&rows, 3), 2);
        let (r, basis) = nullspace(&rows, 3);
        assert_eq!(r, 2);
        assert_eq!(basis.len(), 1);
        for row in &rows {
            let dot: BigRational = row.iter().zip(&basis[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
        assert_eq!(basis[0][0], q(1, 1));
    }

    #[test]
    fn determinant_matches_expansion() {
        let m = vec![
            vec![q(2, 1), q(0, 1), q(1, 1)],
            vec![q(1, 1), q(3, 1), q(2, 1)],
            vec![q(1, 1), q(1, 1), q(1, 1)],
        ];
        // 2(3-2) - 0 + 1(1-3) = 0
        assert!(determinant(m).is_zero());
        let swap = vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]];
        assert_eq!(determinant(swap), q(-1, 1));
    }

    #[test]
    fn float_paths_match_exact_on_small_case() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        assert_eq!(float_rank(&rows, 3, 1e-10), 1);
        let (r, basis) = float_nullspace(&rows, 3, 1e-10);
        assert_eq!(r, 1);
        assert_eq!(basis.len(), 2);
    }
}
