//! Invariants over randomly weighted groupoids and matched pairs.

use proptest::prelude::*;

use mqgroupoid::actions::{coaction_violations, Convolution, GAction};
use mqgroupoid::classical::classical_qg;
use mqgroupoid::cli::run;
use mqgroupoid::examples::{classify_transitive_principal, e1_desc, e3_desc, gen_product_pair_groupoid, ProductSpace};
use mqgroupoid::groupoid::{modular_data, FiniteGroupoid, GroupoidDesc, HaarSystem, MorphismDesc};
use mqgroupoid::hilbert::{flip, oracle_consistency, pair_space, slice, LegMap};
use mqgroupoid::linalg::{commutator, dist, max_abs, C64};
use mqgroupoid::matched_pair::{
    action_identities, apply_normalization, check_haar_decomposition, mutual_actions, solve_haar_normalization, swap_desc,
    validate_matched_pair, MatchedPair, MatchedPairDesc,
};
use mqgroupoid::pmu::build_w;
use mqgroupoid::suite::{axiom_suite, SuiteConfig};
use mqgroupoid::weight::Weight;

fn weight() -> impl Strategy<Value = f64> {
    (1u32..=16).prop_map(|k| k as f64 / 4.0)
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(weight(), n)
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b)), n)
}

/// Pair groupoid on `n` points with `ν` and `λˣ(x,y) = m(y)`, the general left-invariant choice.
fn pair_groupoid(nu: &[f64], m: &[f64]) -> GroupoidDesc {
    let pts: Vec<String> = (0..nu.len()).map(|i| format!("p{i}")).collect();
    let id = |x: usize, y: usize| format!("{}>{}", pts[x], pts[y]);
    let mut d = GroupoidDesc { units: pts.clone(), ..Default::default() };
    for x in 0..pts.len() {
        for y in 0..pts.len() {
            d.morphisms.push(MorphismDesc { id: id(x, y), src: pts[y].clone(), rng: pts[x].clone() });
            d.inverse.push((id(x, y), id(y, x)));
            for z in 0..pts.len() {
                d.compose.push((id(x, y), id(y, z), id(x, z)));
            }
            d.haar.entry(pts[x].clone()).or_default().insert(id(x, y), Weight::Num(m[y]));
        }
        d.nu.insert(pts[x].clone(), Weight::Num(nu[x]));
    }
    d
}

fn pair_weights() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=4).prop_flat_map(|n| (weights(n), weights(n)))
}

fn load(d: &GroupoidDesc) -> (FiniteGroupoid, HaarSystem) {
    let g = FiniteGroupoid::from_desc(d).unwrap();
    let h = HaarSystem::from_desc(&g, d).unwrap();
    (g, h)
}

fn product_space() -> impl Strategy<Value = ProductSpace> {
    product_space_up_to(3)
}

fn product_space_up_to(n2: usize) -> impl Strategy<Value = ProductSpace> {
    (1usize..=2, 1usize..=n2).prop_flat_map(|(n1, n2)| (weights(n1), weights(n2))).prop_map(|(nu1, nu2)| {
        let mut ps = ProductSpace::letters(nu1.len(), nu2.len()).unwrap();
        ps.nu1 = nu1;
        ps.nu2 = nu2;
        ps
    })
}

/// Weighted product pair groupoids and `S₃` on three weighted points.
fn matched_pair_desc() -> impl Strategy<Value = MatchedPairDesc> {
    matched_pair_desc_up_to(3)
}

fn matched_pair_desc_up_to(n2: usize) -> impl Strategy<Value = MatchedPairDesc> {
    prop_oneof![
        product_space_up_to(n2).prop_map(|ps| gen_product_pair_groupoid(&ps)),
        weights(3).prop_map(|nu| e3_desc(Some(nu)))
    ]
}

fn assemble(d: &MatchedPairDesc) -> MatchedPair {
    validate_matched_pair(d, 1e-12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn classical_w_is_a_unitary_solution_of_the_pentagon((nu, m) in pair_weights()) {
        let (g, h) = load(&pair_groupoid(&nu, &m));
        let q = classical_qg(&g, &h);
        prop_assert!(q.unitarity_residual() <= 1e-9);
        prop_assert!(q.pentagon_residual() <= 1e-9);
    }

    #[test]
    fn regular_representations_commute((nu, m) in pair_weights(), f in complex_vec(16), k in complex_vec(16)) {
        let (g, h) = load(&pair_groupoid(&nu, &m));
        let q = classical_qg(&g, &h);
        let n = g.len();
        prop_assert!(max_abs(&commutator(&q.lambda(&f[..n]), &q.rho(&k[..n]))) <= 1e-9);
    }

    #[test]
    fn operator_weights_depend_on_one_end((nu, m) in pair_weights(), f in complex_vec(16)) {
        let (g, h) = load(&pair_groupoid(&nu, &m));
        let q = classical_qg(&g, &h);
        let f = &f[..g.len()];
        let (tl, tr) = (q.t_left(f), q.t_right(f));
        for x in 0..g.len() {
            for y in 0..g.len() {
                if g.r(x) == g.r(y) {
                    prop_assert!((tl[x] - tl[y]).norm() <= 1e-12);
                }
                if g.s(x) == g.s(y) {
                    prop_assert!((tr[x] - tr[y]).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn delta_is_the_inversion_density((nu, m) in pair_weights(), f in prop::collection::vec(-1.0f64..1.0, 16)) {
        let (g, h) = load(&pair_groupoid(&nu, &m));
        let md = modular_data(&g, &h.lambda, &h.nu, None);
        prop_assert!(md.cocycle_residual <= 1e-12);
        let lhs: f64 = (0..g.len()).map(|x| f[g.inv(x)] * md.mu[x]).sum();
        let rhs: f64 = (0..g.len()).map(|x| f[x] * md.delta[x] * md.mu[x]).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        for x in 0..g.len() {
            prop_assert!((md.delta[g.inv(x)] * md.delta[x] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn convolution_representation_is_a_star_homomorphism((nu, m) in pair_weights(), f in complex_vec(16), f2 in complex_vec(16)) {
        let (g, h) = load(&pair_groupoid(&nu, &m));
        let a = GAction::units(&g);
        prop_assert_eq!(coaction_violations(&g, &a), 0);
        let conv = Convolution::new(&g, &h, &a);
        let (f, f2) = (&f[..conv.dim()], &f2[..conv.dim()]);
        prop_assert!(dist(&conv.represent(&conv.star(f, f2)), &(conv.represent(f) * conv.represent(f2))) <= 1e-9);
        prop_assert!(dist(&conv.represent(&conv.sharp(f)), &conv.represent(f).adjoint()) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn factorization_is_coherent(d in matched_pair_desc()) {
        let mp = assemble(&d);
        let g = &mp.g;
        for g2 in mp.g2_arrows() {
            for &g1 in g.range_fiber(g.s(g2)) {
                if !mp.in1[g1] {
                    continue;
                }
                let x = g.mul(g2, g1);
                for &h1 in g.range_fiber(g.s(g1)) {
                    if mp.in1[h1] {
                        prop_assert_eq!(mp.p2[g.mul(mp.p2[x], h1)], mp.p2[g.mul(x, h1)]);
                    }
                }
            }
        }
        let ids = action_identities(&mp, &mutual_actions(&mp));
        prop_assert_eq!((ids.source, ids.middle, ids.middle_hat, ids.coaction, ids.coaction_hat, ids.phi_compat), (0, 0, 0, 0, 0, 0));
    }

    #[test]
    fn swapped_pair_validates(d in matched_pair_desc()) {
        prop_assert!(validate_matched_pair(&swap_desc(&d), 1e-9).is_ok());
    }

    #[test]
    fn normalization_restores_decomposition(d in matched_pair_desc(), k in weights(9)) {
        let mp = assemble(&d);
        let lambda1: Vec<f64> = (0..mp.g.len()).map(|x| if mp.in1[x] { mp.lambda1[x] * k[mp.g.r(x) % k.len()] } else { 0.0 }).collect();
        let bad = mp.with_subgroupoid_weights(lambda1, mp.lambda2.clone());
        let norm = solve_haar_normalization(&bad, 1e-12).unwrap();
        prop_assert!(check_haar_decomposition(&apply_normalization(&bad, &norm), 1e-9).is_ok());
    }

    #[test]
    fn pair_weights_match_the_oracle(d in matched_pair_desc()) {
        prop_assert!(oracle_consistency(&assemble(&d)).max_rel_err <= 1e-12);
    }

    #[test]
    fn flip_is_unitary_and_slices_are_sesquilinear(d in matched_pair_desc(), a in complex_vec(1), v in complex_vec(108)) {
        let mp = assemble(&d);
        let n = mp.g.len();
        let sr = pair_space(&mp, LegMap::S, LegMap::R);
        let rs = pair_space(&mp, LegMap::R, LegMap::S);
        prop_assert!(flip(&sr, &rs).unwrap().unitarity_residual() <= 1e-12);
        let w = build_w(&mp).unwrap();
        let x = w.w.to_dense();
        let sm = &w.sm;
        prop_assert_eq!(sm.len(), x.ncols());
        // W*W restricted to P_{s,m} as an operator on that space
        let op = x.adjoint() * &x;
        let (p, q, r) = (&v[..n], &v[n..2 * n], &v[2 * n..3 * n]);
        let a = a[0];
        let comb: Vec<C64> = p.iter().zip(q).map(|(s, t)| a * s + t).collect();
        let lin = slice(&mp, sm, &op, r, &comb, 0) - (slice(&mp, sm, &op, r, p, 0) * a + slice(&mp, sm, &op, r, q, 0));
        prop_assert!(max_abs(&lin) <= 1e-9);
        let anti = slice(&mp, sm, &op, &comb, r, 1) - (slice(&mp, sm, &op, p, r, 1) * a.conj() + slice(&mp, sm, &op, q, r, 1));
        prop_assert!(max_abs(&anti) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn generated_examples_pass_the_suite(d in matched_pair_desc_up_to(2)) {
        let rep = axiom_suite(&d, &SuiteConfig::default());
        prop_assert!(rep.pass(), "{}", rep);
    }

    #[test]
    fn classification_inverts_generation(ps in product_space()) {
        let mp = assemble(&gen_product_pair_groupoid(&ps));
        let back = classify_transitive_principal(&mp).unwrap();
        prop_assert_eq!((back.x1.len(), back.x2.len()), (ps.x1.len(), ps.x2.len()));
        for i in 0..ps.x1.len() {
            for j in 0..ps.x2.len() {
                let (want, got) = (ps.nu1[i] * ps.nu2[j], back.nu1[i] * back.nu2[j]);
                prop_assert!((want - got).abs() <= 1e-12 * want, "({i},{j}): {want} vs {got}");
            }
        }
    }

    #[test]
    fn exit_code_is_zero_exactly_when_every_check_passes(ps in product_space_up_to(2), break_it in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let mut d = gen_product_pair_groupoid(&ps);
        if break_it {
            // doubling one G1 weight breaks left invariance of λ₁ unless its fiber is a single unit arrow
            let w = d.haar1.values_mut().next().unwrap().values_mut().next().unwrap();
            *w = Weight::Num(w.value().unwrap() * 2.0);
        }
        let path = dir.path().join("in.json");
        std::fs::write(&path, serde_json::to_string(&d).unwrap()).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let args = ["mqg", "verify", path.to_str().unwrap(), "--format", "json", "--checks", "decomposition,pmu,legs"];
        let code = run(args, &mut out, &mut err);
        let rep: mqgroupoid::report::Report = serde_json::from_slice(&out).unwrap();
        prop_assert_eq!(code == 0, rep.pass());
        prop_assert_eq!(code == 0, rep.checks().all(|c| c.pass) && rep.stages.iter().all(|s| s.error.is_none()));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let args = ["mqg", "validate", path.to_str().unwrap()];
        prop_assert_eq!(run(args, &mut out, &mut err) == 0, !break_it || ps.x1.len() == 1);
    }
}

#[test]
fn one_point_input_is_the_bicrossed_product() {
    let mp = assemble(&e1_desc());
    assert!(mp.m.iter().all(|&u| u == mp.m[0]));
    let rep = axiom_suite(&e1_desc(), &SuiteConfig { select: vec!["pentagon".into()], ..SuiteConfig::default() });
    assert!(rep.pass());
}
