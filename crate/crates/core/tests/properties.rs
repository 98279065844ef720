use std::sync::Arc;

use obslab_core::characteristic::{enumerate_characteristic, res_standard_two, CharacteristicCocycle};
use obslab_core::cochain::{coboundary, cocycles, is_coboundary, Cochain};
use obslab_core::fixtures::{fx1, fx_klein, Fixture};
use obslab_core::group::{decompose, quotient, section_cocycle, CrossSection, FiniteGroup, NormalSubgroup};
use obslab_core::heisenberg::{antisymmetry_invariant, build_heisenberg_demo, necessary_test, splitting_test};
use obslab_core::hjr::{change_section, delta_mod, obstruction_equal, SectionTower};
use obslab_core::module::{AbelianModule, FlowData, FlowModule, GroupAction, ModuleAut};
use obslab_core::resolution::resolve_three_cocycle;
use obslab_core::standard::{full_three_failure, h3s_class_equal, StandardThree, StandardTwo};
use obslab_core::Budget;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s3() -> FiniteGroup {
    let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    let idx = |p: [usize; 3]| perms.iter().position(|&q| q == p).unwrap();
    let table: Vec<Vec<usize>> = perms
        .iter()
        .map(|a| perms.iter().map(|b| idx([a[b[0]], a[b[1]], a[b[2]]])).collect())
        .collect();
    FiniteGroup::from_table(&table, "S3").unwrap()
}

fn groups() -> Vec<FiniteGroup> {
    vec![
        FiniteGroup::cyclic(2),
        FiniteGroup::cyclic(3),
        FiniteGroup::cyclic(4),
        FiniteGroup::product(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)]),
        s3(),
        FiniteGroup::heisenberg(2),
    ]
}

fn normal_subgroups(g: &Arc<FiniteGroup>) -> Vec<NormalSubgroup> {
    let mut out: Vec<NormalSubgroup> = Vec::new();
    for x in g.elements() {
        let n = NormalSubgroup::normal_closure(g, &[x]).unwrap();
        if !out.iter().any(|m| m.members() == n.members()) {
            out.push(n);
        }
    }
    out
}

/// Coefficients `Z/n` or `Z/2 x Z/2` with a flow and a trivial action.
fn flows(g: &Arc<FiniteGroup>) -> Vec<Arc<FlowModule>> {
    let mut out = Vec::new();
    for n in [2u64, 3, 4] {
        out.push(Arc::new(FlowModule::trivial_action(FlowData::trivial_cyclic(n), g).unwrap()));
    }
    let z4 = AbelianModule::cyclic(4);
    let neg = ModuleAut::negation(&z4);
    out.push(Arc::new(FlowModule::trivial_action(FlowData::new(z4, neg, 2), g).unwrap()));
    let k = AbelianModule::new(vec![2, 2]).unwrap();
    let swap = ModuleAut::new(&k, vec![vec![0, 1], vec![1, 0]]).unwrap();
    out.push(Arc::new(FlowModule::trivial_action(FlowData::new(k, swap, 3), g).unwrap()));
    out
}

fn random_cochain(flow: &Arc<FlowModule>, degree: usize, rng: &mut impl Rng) -> Cochain {
    let size = flow.module().size();
    Cochain::from_fn(flow, degree, |_| rng.gen_range(0..size))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn section_cocycle_and_decompose(gi in 0usize..6, ni in 0usize..8, si in 0usize..64) {
        let g = Arc::new(groups()[gi].clone());
        let subs = normal_subgroups(&g);
        let n = &subs[ni % subs.len()];
        let q = Arc::new(quotient(&g, n).unwrap());
        let all = CrossSection::all(&q);
        let s = &all[si % all.len()];
        let sc = section_cocycle(s);
        let qg = q.quot();
        for a in qg.elements() {
            for b in qg.elements() {
                prop_assert!(n.contains(sc.get(a, b)));
            }
        }
        for x in g.elements() {
            let (m, p) = decompose(x, s);
            prop_assert!(n.contains(m));
            prop_assert_eq!(g.mul(m, s.sect(p)), x);
        }
    }

    #[test]
    fn h1_classes_are_coset_invariant(gi in 0usize..6, fi in 0usize..5, seed in any::<u64>()) {
        let g = Arc::new(groups()[gi].clone());
        let f = &flows(&g)[fi];
        let md = f.module();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rng.gen_range(0..md.size());
        let v = rng.gen_range(0..md.size());
        let shifted = md.add(a, md.sub(f.theta(v), v));
        prop_assert_eq!(f.h1_class(a).representative, f.h1_class(shifted).representative);
        let rep = f.canonical_rep(a);
        prop_assert_eq!(f.canonical_rep(rep), rep);
        prop_assert_eq!(f.h1_structure().representatives.len() * f.image_theta_minus_one().len(), md.size());
    }

    #[test]
    fn theta_commutes_with_action(gi in 0usize..6) {
        let g = Arc::new(groups()[gi].clone());
        let md = AbelianModule::cyclic(3);
        let negated: Vec<usize> = if g.order().is_multiple_of(2) {
            g.elements().filter(|&x| g.element_order(x) == 2).take(1).collect()
        } else {
            vec![]
        };
        if let Ok(action) = GroupAction::by_sign(&g, &md, &negated) {
            let f = FlowModule::new(FlowData::new(md.clone(), ModuleAut::negation(&md), 0), action).unwrap();
            for x in g.elements() {
                for a in md.elements() {
                    prop_assert_eq!(f.theta(f.alpha(x, a)), f.alpha(x, f.theta(a)));
                }
            }
        }
    }

    #[test]
    fn coboundary_squares_to_zero(gi in 0usize..6, fi in 0usize..5, deg in 0usize..3, seed in any::<u64>()) {
        let g = Arc::new(groups()[gi].clone());
        let f = &flows(&g)[fi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_cochain(f, deg, &mut rng);
        prop_assert!(coboundary(&coboundary(&c)).is_zero());
        let z = coboundary(&c);
        let w = is_coboundary(&z).unwrap().expect("a coboundary by construction");
        prop_assert_eq!(coboundary(&w), z);
    }

    #[test]
    fn random_standard_cocycles(gi in 0usize..4, fi in 0usize..5, seed in any::<u64>()) {
        let g = Arc::new(groups()[gi].clone());
        let f = &flows(&g)[fi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = StandardThree::random(f, &mut rng);
        prop_assert!(c.validate().is_ok());
        prop_assert!(full_three_failure(&c, -2, 2).is_none());
        let a = random_cochain(f, 2, &mut rng);
        let b = StandardThree::coboundary_of(&a);
        prop_assert!(b.validate().is_ok());
        let moved = c.add(&b);
        prop_assert!(h3s_class_equal(&c, &moved).unwrap().is_some());
        prop_assert!(h3s_class_equal(&moved, &c).unwrap().is_some());
        let m = StandardTwo::random(f, &mut rng);
        prop_assert!(m.validate().is_ok());
    }
}

fn fixtures() -> Vec<Fixture> {
    vec![fx1(), fx_klein()]
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn k_is_a_class_invariant(fi in 0usize..2, ci in 0usize..64, seed in any::<u64>()) {
        let fx = &fixtures()[fi];
        let all = enumerate_characteristic(&fx.flow, &fx.l, &Budget::default()).unwrap();
        let chi = &all[ci % all.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = fx.flow.module().size();
        let a: Vec<usize> = (0..fx.l.order()).map(|i| if i == 0 { 0 } else { rng.gen_range(0..size) }).collect();
        let moved = chi.perturb(None, &a).unwrap();
        let (k1, k2) = (chi.compute_k().unwrap(), moved.compute_k().unwrap());
        prop_assert_eq!(k1.members(), k2.members());
        let witness = chi.class_equal(&moved).unwrap().expect("perturbation stays in class");
        prop_assert_eq!(&chi.perturb(None, &witness).unwrap(), &moved);
    }

    #[test]
    fn res_of_standard_is_valid(fi in 0usize..2, seed in any::<u64>()) {
        let fx = &fixtures()[fi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = StandardTwo::random(&fx.flow, &mut rng);
        let chi = res_standard_two(&m, &fx.l).unwrap();
        prop_assert!(chi.validate().is_ok());
        prop_assert!(chi.validate_brute_force().is_ok());
    }

    #[test]
    fn delta_is_class_invariant(fi in 0usize..2, ci in 0usize..64, seed in any::<u64>()) {
        let fx = &fixtures()[fi];
        let tower = SectionTower::new(&fx.flow, &fx.l, &fx.m).unwrap();
        let all = enumerate_characteristic(&fx.flow, &fx.l, &Budget::default()).unwrap();
        let chi = &all[ci % all.len()];
        let ob = delta_mod(chi, &tower).unwrap().obstruction;
        prop_assert!(ob.fiber_failure().is_none());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let torus = Arc::new(fx.flow.torus_module(fx.flow.group()));
        let e = random_cochain(&torus, 1, &mut rng);
        let xi = coboundary(&e).map_into(&fx.flow, |v| fx.flow.torus_element(v as u64));
        let size = fx.flow.module().size();
        let a: Vec<usize> = (0..fx.l.order()).map(|i| if i == 0 { 0 } else { rng.gen_range(0..size) }).collect();
        let moved = chi.perturb(Some(&xi), &a).unwrap();
        let ob2 = delta_mod(&moved, &tower).unwrap().obstruction;
        prop_assert!(obstruction_equal(&ob, &ob2).unwrap().is_some());
    }

    #[test]
    fn section_change_is_invertible(fi in 0usize..2, ci in 0usize..64, si in 0usize..8) {
        let fx = &fixtures()[fi];
        let tower = SectionTower::new(&fx.flow, &fx.l, &fx.m).unwrap();
        let all = enumerate_characteristic(&fx.flow, &fx.l, &Budget::default()).unwrap();
        let ob = delta_mod(&all[ci % all.len()], &tower).unwrap().obstruction;
        let sections = CrossSection::all(tower.s().quotient());
        let s2 = &sections[si % sections.len()];
        let back = change_section(&change_section(&ob, s2).unwrap(), ob.section()).unwrap();
        prop_assert!(h3s_class_equal(ob.cocycle(), back.cocycle()).unwrap().is_some());
        prop_assert_eq!(back.nu(), ob.nu());
    }

    #[test]
    fn resolution_round_trip(gi in 0usize..4, seed in any::<u64>()) {
        let g = Arc::new(groups()[gi].clone());
        let f = Arc::new(FlowModule::trivial_action(FlowData::trivial_cyclic(2), &g).unwrap());
        let all = cocycles(&f, 3, &Budget::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = &all[rng.gen_range(0..all.len())];
        let r = resolve_three_cocycle(c, &Budget::default()).unwrap();
        prop_assert!(r.kernel().is_abelian());
        prop_assert_eq!(r.big().order(), r.kernel().order() * g.order());
        let back = obslab_core::hjr::delta_hjr(r.chi(), r.section()).unwrap();
        prop_assert!(is_coboundary(&back.sub(c)).unwrap().is_some());
    }

    #[test]
    fn split_implies_necessary(k in 2usize..4, w in 0usize..3) {
        let w = w % k;
        let (_, ob) = build_heisenberg_demo(k, FlowData::trivial_cyclic(k as u64), w).unwrap();
        let split = splitting_test(&ob, &Budget::default()).unwrap().is_split();
        let necessary = necessary_test(&ob);
        prop_assert!(!split || necessary);
        if antisymmetry_invariant(&ob).iter().any(|&v| v != 0) {
            prop_assert!(!necessary);
        }
    }
}

#[test]
fn characteristic_validation_paths_agree_on_random_tables() {
    let fx = fx1();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = fx.flow.group().order();
    for _ in 0..200 {
        let mut table = |rows: usize| -> Vec<Vec<usize>> {
            (0..rows)
                .map(|i| (0..n).map(|j| if i == 0 || j == 0 { 0 } else { rng.gen_range(0..2) }).collect())
                .collect()
        };
        let mu = table(n);
        let lam_h = table(n);
        let lam_t = table(1).remove(0);
        let chi = CharacteristicCocycle::from_fns_unchecked(
            &fx.flow,
            &fx.l,
            |m, k| mu[m][k],
            |m, g| lam_h[m][g],
            |m| if m == 0 { 0 } else { lam_t[m] },
        );
        let Ok(chi) = chi else { continue };
        assert_eq!(chi.validate().is_ok(), chi.validate_brute_force().is_ok());
    }
}
