use std::collections::BTreeMap;

use fmtkit::fmt::{a_of_chaos, moment2, moment3, moment4, stein_residual_chaos};
use fmtkit::gaussian::{malliavin_inner_pathwise, sample_gaussian, symmetrize, wick_moment, SymmetricKernel, Tensor};
use fmtkit::stein::{
    mble_inner_product, moment_sequence, real_fn, stein_identity_residual, MbleCase, NamedTarget, PolyCoeff, QuadOptions,
    TargetMeasure, TestFunction,
};
use fmtkit::{Chaos, Kernel};
use proptest::prelude::*;

/// `E[Π_k I_{n_k}(f_k)]` by the diagram formula: sum over complete pairings
/// of the legs that never pair two legs of the same factor, each pairing
/// contributing the fully contracted product of the tensors.
fn diagram_moment(factors: &[&Kernel]) -> f64 {
    let legs: Vec<(usize, usize)> = factors
        .iter()
        .enumerate()
        .flat_map(|(k, f)| (0..f.order()).map(move |s| (k, s)))
        .collect();
    if legs.len() % 2 == 1 {
        return 0.0;
    }
    let dim = factors.first().map_or(1, |f| f.dim());
    let mut pairings = Vec::new();
    pair_up(&legs, &mut vec![false; legs.len()], &mut Vec::new(), &mut pairings);
    let mut total = 0.0;
    for pairing in &pairings {
        // pair p carries a summed label; leg (k, s) reads the label of its pair
        let mut slot_pair: Vec<Vec<usize>> = factors.iter().map(|f| vec![0; f.order()]).collect();
        for (p, &(a, b)) in pairing.iter().enumerate() {
            slot_pair[legs[a].0][legs[a].1] = p;
            slot_pair[legs[b].0][legs[b].1] = p;
        }
        let mut labels = vec![0usize; pairing.len()];
        loop {
            let mut term = 1.0;
            for (k, f) in factors.iter().enumerate() {
                let idx: Vec<usize> = slot_pair[k].iter().map(|&p| labels[p]).collect();
                term *= f.get(&idx);
                if term == 0.0 {
                    break;
                }
            }
            total += term;
            // odometer over d^{#pairs} label assignments
            let mut i = 0;
            while i < labels.len() {
                labels[i] += 1;
                if labels[i] < dim {
                    break;
                }
                labels[i] = 0;
                i += 1;
            }
            if i == labels.len() {
                break;
            }
        }
    }
    total
}

fn pair_up(legs: &[(usize, usize)], used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    let Some(first) = used.iter().position(|u| !u) else {
        out.push(cur.clone());
        return;
    };
    used[first] = true;
    for j in first + 1..legs.len() {
        if !used[j] && legs[j].0 != legs[first].0 {
            used[j] = true;
            cur.push((first, j));
            pair_up(legs, used, cur, out);
            cur.pop();
            used[j] = false;
        }
    }
    used[first] = false;
}

fn kernel_strategy(dim: usize, order: usize) -> impl Strategy<Value = Kernel> {
    prop::collection::vec((prop::collection::vec(0..dim, order), -1.0f64..1.0), 1..5).prop_map(move |raw| {
        let entries: BTreeMap<Vec<usize>, f64> = raw
            .into_iter()
            .map(|(mut idx, v)| {
                idx.sort_unstable();
                (idx, v)
            })
            .collect();
        SymmetricKernel::from_entries(dim, order, entries).unwrap()
    })
}

fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(scale).max(1e-300)
}

fn points(dim: usize, seed: u64, n: usize) -> Vec<Vec<f64>> {
    sample_gaussian(dim, seed, n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn isometry((f, g) in (1usize..4, 1usize..4).prop_flat_map(|(d, n)| (kernel_strategy(d, n), kernel_strategy(d, n)))) {
        let n = f.order();
        let want = (1..=n).product::<usize>() as f64 * f.inner(&g).unwrap();
        prop_assert!(close(diagram_moment(&[&f, &g]), want, 1.0, 1e-12));
        let (cf, cg) = (Chaos::from_kernel(f.clone()), Chaos::from_kernel(g.clone()));
        prop_assert!(close(cf.expectation_of_product(&cg).unwrap(), want, 1.0, 1e-12));
        prop_assert!(close(moment2(&f), diagram_moment(&[&f, &f]), 1.0, 1e-12));
    }

    #[test]
    fn orthogonal_levels((f, g) in (1usize..4).prop_flat_map(|d| (kernel_strategy(d, 1), kernel_strategy(d, 2)))) {
        let (cf, cg) = (Chaos::from_kernel(f), Chaos::from_kernel(g));
        prop_assert_eq!(cf.expectation_of_product(&cg).unwrap(), 0.0);
    }

    #[test]
    fn moments_match_diagram_formula(f in (1usize..4, 1usize..3).prop_flat_map(|(d, n)| kernel_strategy(d, n))) {
        let big_f = Chaos::from_kernel(f.clone());
        let m2 = moment2(&f);
        for (p, closed) in [(3usize, moment3(&f)), (4, moment4(&f))] {
            let oracle = diagram_moment(&vec![&f; p]);
            prop_assert!(close(closed, oracle, m2.powf(p as f64 / 2.0), 1e-10), "p = {p}: {closed} vs {oracle}");
            let wick = wick_moment(&[big_f.clone()], &[p]).unwrap();
            prop_assert!(close(wick, oracle, m2.powf(p as f64 / 2.0), 1e-10), "wick p = {p}: {wick} vs {oracle}");
        }
    }

    #[test]
    fn mixed_moments_match_diagram_formula((f, g) in (1usize..3).prop_flat_map(|d| (kernel_strategy(d, 2), kernel_strategy(d, 1)))) {
        let (cf, cg) = (Chaos::from_kernel(f.clone()), Chaos::from_kernel(g.clone()));
        let wick = wick_moment(&[cf, cg], &[2, 2]).unwrap();
        let oracle = diagram_moment(&[&f, &f, &g, &g]);
        prop_assert!(close(wick, oracle, moment2(&f) * moment2(&g), 1e-10));
    }

    #[test]
    fn product_formula_pathwise((f, g) in (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(d, n, m)| (kernel_strategy(d, n), kernel_strategy(d, m)))) {
        let (cf, cg) = (Chaos::from_kernel(f.clone()), Chaos::from_kernel(g.clone()));
        let fg = cf.product(&cg).unwrap();
        let scale = (cf.second_moment() * cg.second_moment()).sqrt();
        for x in points(f.dim(), 3, 50) {
            let want = cf.eval(&x).unwrap() * cg.eval(&x).unwrap();
            prop_assert!(close(fg.eval(&x).unwrap(), want, scale, 1e-10));
        }
        // E[FG] is the level-0 part of the product
        prop_assert!(close(fg.expectation(), cf.expectation_of_product(&cg).unwrap(), scale, 1e-12));
    }

    #[test]
    fn malliavin_inner_pathwise_agrees((f, g) in (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(d, n, m)| (kernel_strategy(d, n), kernel_strategy(d, m)))) {
        let (cf, cg) = (Chaos::from_kernel(f), Chaos::from_kernel(g));
        let inner = cf.malliavin_inner(&cg).unwrap();
        let scale = (cf.second_moment() * cg.second_moment()).sqrt() * 16.0;
        for x in points(cf.dim(), 4, 30) {
            let want = malliavin_inner_pathwise(&cf, &cg, &x).unwrap();
            prop_assert!(close(inner.eval(&x).unwrap(), want, scale, 1e-10));
        }
    }

    #[test]
    fn symmetrize_idempotent(raw in (1usize..4, 1usize..4).prop_flat_map(|(d, n)| (Just(d), prop::collection::vec((prop::collection::vec(0..d, n), -1.0f64..1.0), 1..6)))) {
        let (dim, entries) = raw;
        let order = entries[0].0.len();
        let mut t = Tensor::zero(dim, order);
        for (idx, v) in entries {
            t.set(idx, v);
        }
        let s = symmetrize(&t);
        let again = symmetrize(&Tensor::from_kernel(&s));
        for (idx, v) in s.entries() {
            prop_assert!((again.get(idx) - v).abs() < 1e-15);
        }
        prop_assert_eq!(again.nnz(), s.nnz());
    }

    #[test]
    fn quadratic_functional_identity(c in -2.0f64..2.0, x in -4.0f64..4.0) {
        // F = c(X² - 1): ½ a(F) = ⟨D(-L)⁻¹F, DF⟩ = 2cF + 2c² with a = 4c²+4cx
        prop_assume!(c.abs() > 1e-3);
        let f = SymmetricKernel::diagonal(1, 0, 2).scale(&c);
        let coeff = PolyCoeff::new(0.0, 4.0 * c, 4.0 * c * c);
        let half_a = 0.5 * a_of_chaos(&f, &coeff).unwrap().eval(&[x]).unwrap();
        let closed = mble_inner_product(MbleCase::Quadratic { c }, &[x]).unwrap();
        let big_f = Chaos::from_kernel(f.clone());
        let chaos = big_f.ou_inverse().unwrap().malliavin_inner(&big_f).unwrap().eval(&[x]).unwrap();
        let scale = 1.0 + closed.abs();
        prop_assert!((half_a - closed).abs() <= 1e-12 * scale);
        prop_assert!((chaos - closed).abs() <= 1e-12 * scale);
        prop_assert!(stein_residual_chaos(&f, &coeff).unwrap().value.abs() < 1e-12);
    }
}

fn named_targets() -> Vec<NamedTarget> {
    vec![
        NamedTarget::Normal { gamma: 1.0 },
        NamedTarget::Normal { gamma: 2.5 },
        NamedTarget::Student { nu: 5.0 },
        NamedTarget::Pareto { nu: 6.0 },
        NamedTarget::Gamma { a: 2.0, lambda: 1.0 },
        NamedTarget::Gamma { a: 0.7, lambda: 3.0 },
        NamedTarget::InverseGamma { delta: 1.0, lambda: 6.0 },
        NamedTarget::FDist { a: 5.0, b: 12.0 },
        NamedTarget::UniformCentered,
        NamedTarget::Beta { a: 2.0, b: 3.0 },
        NamedTarget::Beta { a: 0.5, b: 0.5 },
    ]
}

#[test]
fn numeric_coefficient_matches_closed_form() {
    for t in named_targets() {
        let closed = t.target().unwrap();
        let numeric = TargetMeasure::from_density(t.name(), closed.density_fn(), closed.support())
            .unwrap_or_else(|e| panic!("{t:?}: {e}"));
        let c = t.coeffs();
        let grid = closed.support().interior_grid(200, closed.scale(), 0.02);
        for &x in &grid {
            let (want, got) = (c.eval(&x), numeric.a(x).unwrap());
            assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{t:?} at x = {x}: {got} vs {want}");
        }
    }
}

#[test]
fn identity_residual_and_moment_recursion() {
    let opts = QuadOptions::default();
    for t in named_targets() {
        let target = t.target().unwrap();
        let c = t.coeffs();
        let bound = t.moment_bound().unwrap_or(f64::INFINITY);
        // E[½a h' + b h] = 0 for h = x^k whenever x^{k+1} is integrable
        for k in 1..=3u32 {
            if (k + 1) as f64 >= bound {
                continue;
            }
            let r = stein_identity_residual(&target, &TestFunction::monomial(k)).unwrap_or_else(|e| panic!("{t:?} k = {k}: {e}"));
            assert!(r.abs() < 1e-7, "{t:?} k = {k}: {r}");
        }
        // the same identity is the moment recursion
        let max = (1..=6).take_while(|&j| (j as f64) < bound).last().unwrap_or(0);
        if max < 2 {
            continue;
        }
        let seq = moment_sequence(&c, max).unwrap();
        for (j, m) in seq.iter().enumerate().skip(1) {
            let q = target.expect(|x| x.powi(j as i32), &opts).unwrap_or_else(|e| panic!("{t:?} j = {j}: {e}"));
            assert!((q - m).abs() <= 1e-6 * m.abs().max(1e-3), "{t:?} j = {j}: {q} vs {m}");
        }
    }
}

#[test]
fn custom_density_round_trip() {
    // a grid density built from the Gamma(2, 1) law recovers its coefficient
    let t = NamedTarget::Gamma { a: 2.0, lambda: 1.0 }.target().unwrap();
    let pts: Vec<(f64, f64)> = (1..400).map(|i| -2.0 + i as f64 * 0.05).map(|x| (x, t.density(x))).collect();
    let g = fmtkit::stein::grid_target(&pts, Some(-2.0), None).unwrap();
    for x in [-1.5, -1.0, 0.0, 1.0, 3.0] {
        let want = 2.0 * x + 4.0;
        assert!((g.a(x).unwrap() - want).abs() < 2e-2 * want, "x = {x}");
    }
    let _ = real_fn(|x| x);
}
