//! Worked values checked against brute-force computations written out here.

use std::sync::Arc;

use obslab_core::cochain::{coboundary, cohomology, enumerate_cochains, enumerate_cocycles, is_cocycle, Cochain};
use obslab_core::fixtures::{fx1, fx1_chi};
use obslab_core::group::{decompose, quotient, CrossSection, FiniteGroup, NormalSubgroup};
use obslab_core::heisenberg::{build_heisenberg_demo, necessary_test, splitting_test};
use obslab_core::hjr::{delta_hjr, delta_mod, partial_map, SectionTower};
use obslab_core::module::{enumerate_equivariant_homs, AbelianModule, FlowData, FlowModule, ModuleAut};
use obslab_core::resolution::resolve_three_cocycle;
use obslab_core::standard::StandardThree;
use obslab_core::Budget;

fn trivial(g: FiniteGroup, n: u64) -> Arc<FlowModule> {
    Arc::new(FlowModule::trivial_action(FlowData::trivial_cyclic(n), &Arc::new(g)).unwrap())
}

fn z4_negation() -> Arc<FlowModule> {
    let md = AbelianModule::cyclic(4);
    let theta = ModuleAut::negation(&md);
    let g = Arc::new(FiniteGroup::cyclic(2));
    Arc::new(FlowModule::trivial_action(FlowData::new(md, theta, 2), &g).unwrap())
}

/// Whether some normalized cochain of degree `target.degree() - 1` cobounds `target`, by enumeration.
fn brute_coboundary(target: &Cochain) -> bool {
    enumerate_cochains(target.flow(), target.degree() - 1, &Budget::default())
        .unwrap()
        .iter()
        .any(|b| coboundary(b) == *target)
}

fn isomorphic_by_search(a: &FiniteGroup, b: &FiniteGroup) -> bool {
    fn extend(a: &FiniteGroup, b: &FiniteGroup, map: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let i = map.len();
        if i == a.order() {
            return a.elements().all(|x| a.elements().all(|y| map[a.mul(x, y)] == b.mul(map[x], map[y])));
        }
        for j in b.elements() {
            if !used[j] && (i == 0) == (j == 0) {
                used[j] = true;
                map.push(j);
                if extend(a, b, map, used) {
                    return true;
                }
                map.pop();
                used[j] = false;
            }
        }
        false
    }
    a.order() == b.order() && extend(a, b, &mut Vec::new(), &mut vec![false; b.order()])
}

#[test]
fn heisenberg_products() {
    let h = FiniteGroup::heisenberg(2);
    let idx = |a: usize, b: usize, c: usize| a * 4 + b * 2 + c;
    assert_eq!(h.mul(idx(1, 0, 0), idx(0, 1, 0)), idx(1, 1, 1));
    assert_eq!(h.mul(idx(0, 1, 0), idx(1, 0, 0)), idx(1, 1, 0));
}

#[test]
fn heisenberg_quotient_is_klein() {
    let h = Arc::new(FiniteGroup::heisenberg(2));
    let q = quotient(&h, &NormalSubgroup::center(&h)).unwrap();
    let klein = FiniteGroup::product(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)]);
    assert!(isomorphic_by_search(q.quot(), &klein));
    assert!(!isomorphic_by_search(q.quot(), &FiniteGroup::cyclic(4)));
}

#[test]
fn decompose_in_z4() {
    let g = Arc::new(FiniteGroup::cyclic(4));
    let n = NormalSubgroup::new(&g, &[0, 2]).unwrap();
    let qd = Arc::new(quotient(&g, &n).unwrap());
    let s = CrossSection::minimal(&qd);
    let (m, p) = decompose(3, &s);
    assert_eq!((m, s.sect(p)), (2, 1));
    let sections: Vec<usize> = CrossSection::all(&qd).iter().map(|s| s.sect(qd.proj(1))).collect();
    assert_eq!(sections, vec![1, 3]);
}

#[test]
fn flow_images_by_enumeration() {
    let f = z4_negation();
    let md = f.module();
    let mut image: Vec<usize> = md.elements().map(|x| md.sub(f.theta(x), x)).collect();
    image.sort();
    image.dedup();
    assert_eq!(image, vec![0, 2]);
    assert_eq!(f.image_theta_minus_one(), image);
    assert_eq!(f.h1_structure().representatives.len(), 2);
    let preimages: Vec<usize> = md.elements().filter(|&v| md.sub(f.theta(v), v) == 2).collect();
    assert_eq!(f.theta_preimage(2), preimages.first().copied());
    assert_eq!(f.canonical_rep(3), 1);

    let k = AbelianModule::new(vec![2, 2]).unwrap();
    let swap = ModuleAut::new(&k, vec![vec![0, 1], vec![1, 0]]).unwrap();
    let g = Arc::new(FiniteGroup::trivial());
    let f = FlowModule::trivial_action(FlowData::new(k.clone(), swap, 3), &g).unwrap();
    let mut image: Vec<usize> = k.elements().map(|x| k.sub(f.theta(x), x)).collect();
    image.sort();
    image.dedup();
    assert_eq!(image, vec![0, k.encode(&[1, 1])]);
}

#[test]
fn equivariant_homs_on_heisenberg_center() {
    let h = Arc::new(FiniteGroup::heisenberg(2));
    let f = FlowModule::trivial_action(FlowData::trivial_cyclic(2), &h).unwrap();
    let c = NormalSubgroup::center(&h);
    let homs = enumerate_equivariant_homs(&c, &f, &Budget::default()).unwrap();
    assert_eq!(homs.len(), 2);
}

#[test]
fn low_degree_cohomology_by_enumeration() {
    let b = Budget::default();
    let f = trivial(FiniteGroup::cyclic(2), 2);
    let mut one = Cochain::zero(&f, 1);
    one.set(&[1], 1);
    assert!(coboundary(&one).is_zero());
    let mut two = Cochain::zero(&f, 2);
    two.set(&[1, 1], 1);
    assert!(is_cocycle(&two));
    assert!(!brute_coboundary(&two));
    let mut three = Cochain::zero(&f, 3);
    three.set(&[1, 1, 1], 1);
    assert!(is_cocycle(&three));
    assert!(!brute_coboundary(&three));
    assert_eq!(enumerate_cocycles(&f, 2, &b).unwrap().count(), 2);
    assert_eq!(enumerate_cocycles(&f, 3, &b).unwrap().count(), 2);
    assert_eq!(cohomology(&f, 2, &b).unwrap().invariant_factors, vec![2]);
    assert_eq!(cohomology(&f, 3, &b).unwrap().invariant_factors, vec![2]);

    // H^1(Z/4, Z/2) = Hom(Z/4, Z/2).
    let f = trivial(FiniteGroup::cyclic(4), 2);
    let homs = (0..16usize)
        .map(|bits| (0..4).map(|i| (bits >> i) & 1).collect::<Vec<_>>())
        .filter(|v| (0..4).all(|x| (0..4).all(|y| v[(x + y) % 4] == (v[x] + v[y]) % 2)))
        .count();
    assert_eq!(cohomology(&f, 1, &b).unwrap().order(), homs as u128);
}

#[test]
fn linkage_examples() {
    let f = trivial(FiniteGroup::cyclic(2), 2);
    let mut c = Cochain::zero(&f, 3);
    c.set(&[1, 1, 1], 1);
    assert!(StandardThree::new(c.clone(), Cochain::zero(&f, 2)).is_ok());
    let f3 = trivial(FiniteGroup::cyclic(2), 3);
    let mut d1 = Cochain::zero(&f3, 2);
    d1.set(&[1, 1], 1);
    let s = StandardThree::new(Cochain::zero(&f3, 3), d1).unwrap();
    // theta = id: the value at flow degree 2 is 2 d1 + c_Q.
    assert_eq!(s.expand((1, 2), (1, 0), (1, 0)), 2);
}

#[test]
fn fx1_hjr_and_partial() {
    let fx = fx1();
    let tower = SectionTower::new(&fx.flow, &fx.l, &fx.m).unwrap();
    let chi = fx1_chi(&fx);
    let c = delta_hjr(&chi, tower.s_dot()).unwrap();
    assert_eq!(c.entries(), vec![(vec![1, 1, 1], 1)]);
    assert!(!brute_coboundary(&c));
    let ob = delta_mod(&chi, &tower).unwrap().obstruction;
    assert!(ob.nu().iter().all(|&v| v == 0));
    assert!(ob.cocycle().d1.is_zero());
    let image = partial_map(&ob).unwrap();
    assert!(brute_coboundary(&image.c_g));
}

#[test]
fn heisenberg_tests_by_enumeration() {
    for k in [2usize, 3] {
        let (_, ob) = build_heisenberg_demo(k, FlowData::trivial_cyclic(k as u64), 1).unwrap();
        let fq = ob.flow_q();
        let zeta = Cochain::from_fn(fq, 2, |t| ob.zeta(ob.n_n(t[0], t[1])));
        // theta = id: Im(theta - 1) = 0, so the necessary test asks for zeta = d e exactly.
        let candidates = enumerate_cochains(fq, 1, &Budget::default()).unwrap();
        assert_eq!(candidates.len(), k.pow((k * k - 1) as u32));
        assert!(!candidates.iter().any(|e| coboundary(e) == zeta));
        assert!(!necessary_test(&ob));
        // Splitting with theta = id needs d1 + d b = 0 for some b.
        let d1 = &ob.cocycle().d1;
        assert!(!candidates.iter().any(|b| d1.add(&coboundary(b)).is_zero()));
        assert!(!splitting_test(&ob, &Budget::default()).unwrap().is_split());
    }
}

#[test]
fn resolution_of_the_generator() {
    let f = trivial(FiniteGroup::cyclic(2), 2);
    let mut c = Cochain::zero(&f, 3);
    c.set(&[1, 1, 1], 1);
    let r = resolve_three_cocycle(&c, &Budget::default()).unwrap();
    let h = r.big();
    assert_eq!(h.order(), 4);
    assert!(h.elements().any(|x| h.element_order(x) == 4));
    // Inflation to H kills the generator.
    let pulled = c.pullback(r.flow(), r.projection().projection());
    assert!(brute_coboundary(&pulled));

    let f4 = trivial(FiniteGroup::cyclic(2), 4);
    let mut c = Cochain::zero(&f4, 3);
    c.set(&[1, 1, 1], 2);
    let r = resolve_three_cocycle(&c, &Budget::default()).unwrap();
    let back = delta_hjr(r.chi(), r.section()).unwrap();
    assert!(brute_coboundary(&back.sub(&c)));
}
