use proptest::prelude::*;

use spintree::bracket::poisson_bracket;
use spintree::evolution::evolve;
use spintree::graph::{decompose, SpinGraph};
use spintree::heisenberg::{commute, energy, evaluate_observable, total_spin};
use spintree::numerics::{integrate_splitting, max_deviation, reference_integrate, split_edges};
use spintree::quantum::{cg_coefficient, HalfInt};
use spintree::random::{random_configuration, seeded_rng};
use spintree::tree::BJSystem;
use spintree::{CouplingMatrix, FieldVector, SpinConfiguration, Vec3};

fn graph_from_mask(n: usize, mask: u32) -> SpinGraph {
    let mut g = SpinGraph::empty(n);
    let mut bit = 0;
    for a in 0..n {
        for b in a + 1..n {
            if mask & (1 << bit) != 0 {
                g.add_edge(a, b);
            }
            bit += 1;
        }
    }
    g
}

fn integrable_system(n: usize, mask: u32) -> Option<BJSystem> {
    decompose(&graph_from_mask(n, mask)).system().cloned()
}

fn couplings(n: usize, values: &[i8]) -> CouplingMatrix {
    let mut k = 0;
    CouplingMatrix::from_fn(n, |_, _| {
        k += 1;
        f64::from(values[k - 1])
    })
}

fn observable(m: &CouplingMatrix) -> impl Fn(&[Vec3]) -> f64 + '_ {
    move |s| evaluate_observable(m, &SpinConfiguration::from_raw(s.to_vec())).unwrap()
}

fn field(b: [f64; 3]) -> FieldVector {
    FieldVector(Vec3::new(b[0], b[1], b[2]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_evolution_is_a_flow(
        n in 2usize..=6,
        mask in any::<u32>(),
        seed in any::<u64>(),
        t1 in 0.0f64..5.0,
        t2 in 0.0f64..5.0,
        b in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let Some(sys) = integrable_system(n, mask) else { return Ok(()) };
        let cfg0 = random_configuration(&mut seeded_rng(seed), n);
        let b = field(b);
        let direct = evolve(&sys, &cfg0, t1 + t2, &b).unwrap();
        let composed = evolve(&sys, &evolve(&sys, &cfg0, t1, &b).unwrap(), t2, &b).unwrap();
        prop_assert!(max_deviation(&direct, &composed) < 1e-12);
    }

    #[test]
    fn exact_evolution_conserves_energy_and_norms(
        n in 2usize..=6,
        mask in any::<u32>(),
        seed in any::<u64>(),
        t in 0.0f64..50.0,
        b in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let Some(sys) = integrable_system(n, mask) else { return Ok(()) };
        let j = sys.hamiltonian_couplings();
        let cfg0 = random_configuration(&mut seeded_rng(seed), n);
        let b = field(b);
        let cfg = evolve(&sys, &cfg0, t, &b).unwrap();
        prop_assert!((energy(&j, &cfg, &b).unwrap() - energy(&j, &cfg0, &b).unwrap()).abs() < 1e-10);
        prop_assert!(cfg.max_norm_deviation() < 1e-12);
        for id in sys.tree().internal_nodes() {
            let set = &sys.tree().node(id).set;
            let before = total_spin(&cfg0, set).unwrap().norm();
            let after = total_spin(&cfg, set).unwrap().norm();
            prop_assert!((before - after).abs() < 1e-10);
        }
    }

    #[test]
    fn edge_split_reproduces_the_couplings(n in 2usize..=6, values in prop::collection::vec(-2i8..=2, 15)) {
        let j = couplings(n, &values);
        let plan = split_edges(&j);
        prop_assert!(plan.check_target(&j).is_ok());
        prop_assert_eq!(plan.target(), j);
    }

    #[test]
    fn clebsch_gordan_rows_are_orthonormal(tj1 in 0i64..=4, tj2 in 0i64..=4, pick in any::<u64>()) {
        let (j1, j2) = (HalfInt::from_twice(tj1), HalfInt::from_twice(tj2));
        let totals: Vec<HalfInt> = ((tj1 - tj2).abs()..=tj1 + tj2).step_by(2).map(HalfInt::from_twice).collect();
        let a = totals[(pick % totals.len() as u64) as usize];
        let b = totals[((pick / 7) % totals.len() as u64) as usize];
        let lower = if a < b { a } else { b };
        for m in lower.projections() {
            let mut sum = 0.0;
            for m1 in j1.projections() {
                let m2 = m - m1;
                if m2.abs() > j2 || j2.int_diff(m2).is_none() {
                    continue;
                }
                sum += cg_coefficient(j1, j2, m1, m2, a, m).unwrap() * cg_coefficient(j1, j2, m1, m2, b, m).unwrap();
            }
            let expected = if a == b { 1.0 } else { 0.0 };
            prop_assert!((sum - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn residuals_agree_with_the_numerical_bracket(
        e in prop::collection::vec(-1i8..=1, 6),
        f in prop::collection::vec(-1i8..=1, 6),
        seed in any::<u64>(),
    ) {
        let (e, f) = (couplings(4, &e), couplings(4, &f));
        let mut rng = seeded_rng(seed);
        let largest = (0..5)
            .map(|_| {
                let cfg = random_configuration(&mut rng, 4);
                poisson_bracket(observable(&e), observable(&f), cfg.spins(), 1e-5).abs()
            })
            .fold(0.0, f64::max);
        if commute(&e, &f).unwrap() {
            prop_assert!(largest < 1e-7);
        } else {
            prop_assert!(largest > 1e-7);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn strang_is_second_order_on_six_spins(mask in any::<u32>(), seed in any::<u64>()) {
        let g = graph_from_mask(6, mask | 1);
        let j = g.adjacency();
        let plan = split_edges(&j);
        let cfg0 = random_configuration(&mut seeded_rng(seed), 6);
        let none = FieldVector::zero();
        let reference = reference_integrate(&j, &cfg0, 1.0, 1e-12, &none).unwrap();
        let exact = reference.last().unwrap();
        let error = |h: f64| {
            let (traj, _) = integrate_splitting(&plan, &cfg0, 1.0, h, 2, &none).unwrap();
            max_deviation(traj.last().unwrap(), exact)
        };
        if plan.parts().len() == 1 {
            prop_assert!(error(0.1) < 1e-9);
        } else {
            let (coarse, fine) = (error(0.1), error(0.05));
            prop_assume!(coarse > 1e-8);
            let ratio = coarse / fine;
            prop_assert!((3.0..5.0).contains(&ratio), "error ratio {ratio}");
        }
    }
}
