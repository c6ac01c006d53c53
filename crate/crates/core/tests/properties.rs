mod common;

use num_rational::Rational64;
use proptest::prelude::*;
use rand::Rng;

use smoothopt::csp::{arithmetize, Constraint, CspInstance};
use smoothopt::estimator::{check_aggregate_bounds, estimate, PartialAssignment, Sample};
use smoothopt::estimator::Mode;
use smoothopt::poly::{certify, decompose, from_graph_kdense, from_graph_maxcut, SmoothPolynomial, Strategy};
use smoothopt::relaxation::{build_program, solve, Variant};
use smoothopt::rounding::round;
use smoothopt::rng;
use smoothopt::scheme::{approximate_maxcut, maximize_smooth, SchemeConfig};
use smoothopt::Assignment;

fn poly_from_seed(seed: u64, max_n: usize, max_d: usize) -> SmoothPolynomial {
    let mut g = rng::stream(seed, &[500]);
    let n = g.gen_range(2..=max_n);
    let d = g.gen_range(1..=max_d.min(n));
    let terms: Vec<(Vec<usize>, Rational64)> = (0..g.gen_range(1..=2 * n))
        .map(|_| {
            let len = g.gen_range(1..=d);
            let vars = rand::seq::index::sample(&mut g, n, len).into_vec();
            (vars, Rational64::new(g.gen_range(-7..=7), g.gen_range(1..=3)))
        })
        .collect();
    SmoothPolynomial::from_terms(n, Rational64::from_integer(g.gen_range(-2..=2)), terms).unwrap()
}

fn bits(mask: u64, n: usize) -> Assignment {
    Assignment::from_bits((0..n).map(|i| (mask >> i & 1) as u8).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_reassembles_polynomial(seed in any::<u64>(), mask in any::<u64>()) {
        let p = poly_from_seed(seed, 10, 4);
        let x = bits(mask, p.n());
        let expect = p.evaluate(&x).unwrap();
        prop_assert_eq!(decompose(&p, Strategy::CanonicalLex).unwrap().evaluate(&x).unwrap(), expect);
        if p.degree() == 2 {
            prop_assert_eq!(decompose(&p, Strategy::MaxCutSymmetric).unwrap().evaluate(&x).unwrap(), expect);
        }
    }

    #[test]
    fn maxcut_polynomial_counts_cut_edges(seed in any::<u64>()) {
        let mut g = rng::stream(seed, &[501]);
        let n = g.gen_range(2..=10);
        let m = g.gen_range(0..=n * (n - 1) / 2);
        let graph = common::random_graph(n, m, &mut g);
        let cut = from_graph_maxcut(&graph);
        let dense = from_graph_kdense(&graph);
        for mask in 0..1u64 << n {
            let x = bits(mask, n);
            prop_assert_eq!(cut.evaluate(&x).unwrap(), Rational64::from_integer(graph.cut_value(x.bits()) as i64));
            prop_assert_eq!(dense.evaluate(&x).unwrap(), Rational64::from_integer(graph.induced_edges(x.bits()) as i64));
        }
    }

    #[test]
    fn certificate_bounds_every_coefficient(seed in any::<u64>(), delta in 0.05f64..=1.0) {
        let p = poly_from_seed(seed, 12, 4);
        prop_assume!(!p.is_constant());
        let cert = certify(&p, delta).unwrap();
        let n = p.n() as f64;
        let d = p.degree() as i32;
        prop_assert!(cert.beta >= 1.0 && cert.kappa >= 1.0);
        for mono in p.monomials() {
            let c = mono.coeff();
            let mag = (*c.numer() as f64 / *c.denom() as f64).abs();
            prop_assert!(mag <= cert.beta * n.powi(d - mono.degree() as i32) * (1.0 + 1e-12));
        }
        let sums = p.degree_abs_sums();
        for s in sums.iter().skip(1) {
            prop_assert!(*s <= cert.kappa * cert.beta * n.powf(f64::from(d) - 1.0 + delta) * (1.0 + 1e-9));
        }
        prop_assert!(cert.verify(&p));
    }

    #[test]
    fn arithmetization_is_exact(seed in any::<u64>()) {
        let mut g = rng::stream(seed, &[502]);
        let n = g.gen_range(2..=8);
        let k = g.gen_range(1..=3usize.min(n));
        let constraints: Vec<Constraint> = (0..g.gen_range(1..=12))
            .map(|_| {
                let mut vars = rand::seq::index::sample(&mut g, n, k).into_vec();
                vars.sort_unstable();
                let mut table: Vec<bool> = (0..1usize << k).map(|_| g.gen_bool(0.5)).collect();
                let forced = g.gen_range(0..table.len());
                table[forced] = true;
                Constraint { vars, table }
            })
            .collect();
        let inst = CspInstance::new(n, constraints).unwrap();
        let p = arithmetize(&inst).unwrap();
        for mask in 0..1u64 << n {
            let x = bits(mask, n);
            // Independent recount straight from the truth tables.
            let count = inst
                .constraints()
                .iter()
                .filter(|c| {
                    let row = c.vars.iter().enumerate().fold(0usize, |acc, (i, &v)| acc | (x.bits()[v] as usize) << i);
                    c.table[row]
                })
                .count();
            prop_assert_eq!(p.evaluate(&x).unwrap(), Rational64::from_integer(count as i64));
        }
    }

    #[test]
    fn planted_full_sample_program_is_feasible_and_widening_only_helps(seed in any::<u64>(), eps in 0.01f64..0.5) {
        let p = poly_from_seed(seed, 9, 3);
        prop_assume!(p.degree() >= 2);
        let cert = certify(&p, 0.5).unwrap();
        let tree = decompose(&p, Strategy::CanonicalLex).unwrap();
        let sample = Sample::full(p.n()).unwrap();
        let mut g = rng::stream(seed, &[503]);
        let x = Assignment::from_bools((0..p.n()).map(|_| g.gen_bool(0.5)));
        let s = PartialAssignment::restrict(&x, &sample.distinct());
        let est = estimate(&tree, &sample, &s).unwrap();
        check_aggregate_bounds(&tree, &est, &cert).unwrap();
        let narrow = build_program(&tree, &est, eps, eps, 0.5, Variant::Generic).unwrap();
        let wide = build_program(&tree, &est, 2.0 * eps, 2.0 * eps, 0.5, Variant::Generic).unwrap();
        // x itself satisfies every row, so both programs are feasible and the
        // optimum can only grow as the rows widen.
        prop_assert!(narrow.max_violation(&x.as_f64()) <= 1e-9);
        let a = solve(&narrow, 1e-9).unwrap();
        let b = solve(&wide, 1e-9).unwrap();
        prop_assert!(a.is_optimal() && b.is_optimal());
        prop_assert!(b.objective_value >= a.objective_value - 1e-6);
        prop_assert!(a.objective_value >= narrow.objective_at(&x.as_f64()) - 1e-6);
    }

    #[test]
    fn lp_optimum_dominates_feasible_binary_points(seed in any::<u64>()) {
        let mut g = rng::stream(seed, &[504]);
        let prog = common::random_program(&mut g);
        let sol = solve(&prog, 1e-9).unwrap();
        for mask in 0..1u64 << prog.n {
            let z = bits(mask, prog.n).as_f64();
            if prog.max_violation(&z) <= 1e-9 {
                prop_assert!(sol.is_optimal());
                prop_assert!(prog.objective_at(&z) <= sol.objective_value + 1e-6);
            }
        }
    }

    #[test]
    fn rounding_keeps_objective_floor(seed in any::<u64>()) {
        let mut g = rng::stream(seed, &[505]);
        let prog = common::random_program(&mut g);
        let sol = solve(&prog, 1e-9).unwrap();
        prop_assume!(sol.is_optimal());
        let out = round(&sol, &prog, 4, &mut rng::stream(seed, &[506])).unwrap();
        prop_assert!(out.objective >= sol.objective_value - 1.0 - 1e-9);
    }

    #[test]
    fn more_random_assignments_never_hurt(seed in 0u64..1000) {
        let mut g = rng::stream(seed, &[507]);
        let graph = common::random_graph(12, 30, &mut g);
        let run = |count| {
            let cfg = SchemeConfig { mode: Mode::Random { count }, sample_override: Some(6), seed, trials: 4, ..SchemeConfig::default() };
            approximate_maxcut(&graph, &cfg).unwrap()
        };
        prop_assert!(run(8).value >= run(4).value);
    }

    #[test]
    fn identical_seed_identical_report(seed in 0u64..1000) {
        let p = poly_from_seed(seed, 8, 3);
        let cfg = SchemeConfig { mode: Mode::Random { count: 8 }, sample_override: Some(4), seed, trials: 4, ..SchemeConfig::default() };
        let a = maximize_smooth(&p, &cfg).unwrap().without_timings();
        let b = maximize_smooth(&p, &cfg).unwrap().without_timings();
        prop_assert_eq!(a, b);
    }
}
