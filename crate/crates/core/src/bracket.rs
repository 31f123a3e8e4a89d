//! Numerical Poisson bracket on the product of unit spheres.
//!
//! `{f, g}(s) = Σ_μ s_μ · (∇_μ f × ∇_μ g)`, with ambient gradients taken by
//! central differences. Any smooth extension of `f`, `g` off the spheres
//! gives the same value because the radial gradient component drops out of
//! the triple product. Used as an oracle for the algebraic commutation
//! criterion and the equations of motion.

use crate::Vec3;

/// Ambient gradient of `f` at every spin by central differences with step `h`.
pub fn gradient<F>(f: &F, spins: &[Vec3], h: f64) -> Vec<Vec3>
where
    F: Fn(&[Vec3]) -> f64,
{
    let mut work = spins.to_vec();
    (0..spins.len())
        .map(|mu| {
            let mut grad = Vec3::zeros();
            for i in 0..3 {
                let orig = work[mu][i];
                work[mu][i] = orig + h;
                let plus = f(&work);
                work[mu][i] = orig - h;
                let minus = f(&work);
                work[mu][i] = orig;
                grad[i] = (plus - minus) / (2.0 * h);
            }
            grad
        })
        .collect()
}

/// `{f, g}` evaluated at `spins`.
pub fn poisson_bracket<F, G>(f: F, g: G, spins: &[Vec3], h: f64) -> f64
where
    F: Fn(&[Vec3]) -> f64,
    G: Fn(&[Vec3]) -> f64,
{
    let df = gradient(&f, spins, h);
    let dg = gradient(&g, spins, h);
    spins
        .iter()
        .zip(df.iter().zip(&dg))
        .map(|(s, (a, b))| s.dot(&a.cross(b)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_brackets_follow_levi_civita() {
        // {s^1, s^2} = s^3 on a single spin
        let s = [Vec3::new(0.3, -0.4, (1.0f64 - 0.25).sqrt())];
        let b = poisson_bracket(|x| x[0][0], |x| x[0][1], &s, 1e-5);
        assert!((b - s[0][2]).abs() < 1e-9);
        let b = poisson_bracket(|x| x[0][1], |x| x[0][0], &s, 1e-5);
        assert!((b + s[0][2]).abs() < 1e-9);
    }

    #[test]
    fn different_spins_commute() {
        let s = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        let b = poisson_bracket(|x| x[0][0], |x| x[1][2], &s, 1e-5);
        assert!(b.abs() < 1e-12);
    }
}
