//! Clebsch-Gordan coefficients, Condon-Shortley phase.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::HalfInt;
use crate::error::{Error, Result};
use crate::exact::to_f64;

fn factorial(n: i64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn check_pair(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice() < 0 || m.abs() > j || j.int_diff(m).is_none() {
        return Err(Error::InvalidArgument(format!("invalid angular momentum pair j = {j}, m = {m}")));
    }
    Ok(())
}

/// `⟨j1 m1; j2 m2 | J M⟩` from the Racah closed form, evaluated with
/// exact rational factorials and a single final square root.
pub fn cg_coefficient(j1: HalfInt, j2: HalfInt, m1: HalfInt, m2: HalfInt, big_j: HalfInt, big_m: HalfInt) -> Result<f64> {
    check_pair(j1, m1)?;
    check_pair(j2, m2)?;
    if big_j.twice() < 0 {
        return Err(Error::InvalidArgument(format!("negative total angular momentum {big_j}")));
    }
    if big_m != m1 + m2 || big_m.abs() > big_j || big_j < (j1 - j2).abs() || big_j > j1 + j2 {
        return Ok(0.0);
    }
    let Some(s) = (j1 + j2).int_diff(big_j) else { return Ok(0.0) };
    // every remaining combination is an integer
    let i = |a: HalfInt, b: HalfInt| a.int_diff(b).expect("integer combination");
    let a1 = i(big_j + j1, j2); // J + j1 − j2
    let a2 = i(big_j + j2, j1); // J − j1 + j2
    let a3 = i(j1 + j2 + big_j, -HalfInt::from_int(1)); // j1 + j2 + J + 1
    let p1 = i(big_j, -big_m);
    let p2 = i(big_j, big_m);
    let (q1, q2) = (i(j1, m1), i(j1, -m1));
    let (r1, r2) = (i(j2, m2), i(j2, -m2));
    let pref = BigRational::new(
        BigInt::from(big_j.twice() + 1)
            * factorial(a1)
            * factorial(a2)
            * factorial(s)
            * factorial(p1)
            * factorial(p2)
            * factorial(q1)
            * factorial(q2)
            * factorial(r1)
            * factorial(r2),
        factorial(a3),
    );
    let c1 = i(big_j, j2 - m1); // J − j2 + m1
    let c2 = i(big_j, j1 + m2); // J − j1 − m2
    let k_min = 0.max(-c1).max(-c2);
    let k_max = s.min(q1).min(r2);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(s - k)
            * factorial(q1 - k)
            * factorial(r2 - k)
            * factorial(c1 + k)
            * factorial(c2 + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }
    let magnitude = to_f64(&(pref * &sum * &sum)).sqrt();
    Ok(if sum.is_negative() { -magnitude } else { magnitude })
}
