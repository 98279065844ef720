//! The Heisenberg obstruction at finite modulus and the splitting tests.

use std::sync::Arc;

use crate::cochain::{coboundary, normalized_tuples, push_coboundary_terms, Cochain, CochainVars, Equation};
use crate::error::{Error, Result};
use crate::group::{quotient, CrossSection, FiniteGroup, NormalSubgroup, QuotientData};
use crate::hjr::{descend_flow, ModularObstruction};
use crate::linalg::LinearSystem;
use crate::module::{FlowData, FlowModule};
use crate::standard::{is_standard_coboundary, StandardThree};
use crate::Budget;

/// `G = Heis(Z/k)`, `N` its center, `Q = G/N` with `sect(a,b) = (a,b,0)`.
#[derive(Clone, Debug)]
pub struct HeisenbergFixture {
    pub k: usize,
    pub group: Arc<FiniteGroup>,
    pub center: NormalSubgroup,
    pub quotient: Arc<QuotientData>,
    pub section: CrossSection,
    pub flow: Arc<FlowModule>,
    /// `nu` sends the central generator `(0,0,1)` to the class of `w`.
    pub w: usize,
}

impl HeisenbergFixture {
    /// `(a, b)` for an element of Q.
    pub fn coords(&self, q: usize) -> (usize, usize) {
        let g = self.section.sect(q);
        (g / (self.k * self.k), (g / self.k) % self.k)
    }
}

/// The obstruction with `c_Q = 0`, `d1(q,r) = rep((a b') w)` and `nu(n) = n w`.
pub fn build_heisenberg_demo(k: usize, data: FlowData, w: usize) -> Result<(HeisenbergFixture, ModularObstruction)> {
    if k < 2 {
        return Err(Error::InvalidObstruction("Heisenberg modulus must be at least 2".into()));
    }
    let group = Arc::new(FiniteGroup::heisenberg(k));
    let flow = Arc::new(FlowModule::trivial_action(data, &group)?);
    let md = flow.module();
    if w >= md.size() {
        return Err(Error::InvalidModule(format!("{w} is not an element of {}", md.label())));
    }
    if flow.canonical_rep(md.scale(k as i64, w)) != 0 {
        return Err(Error::IncompatibleModulus { k, w });
    }
    let center = NormalSubgroup::center(&group);
    let quotient = Arc::new(quotient(&group, &center)?);
    let section = CrossSection::minimal(&quotient);
    let fixture = HeisenbergFixture {
        k,
        group: group.clone(),
        center: center.clone(),
        quotient: quotient.clone(),
        section: section.clone(),
        flow: flow.clone(),
        w,
    };
    let flow_q = descend_flow(&flow, &section)?;
    // Center element (0,0,c) sits at index c.
    let nu: Vec<usize> = center.members().iter().map(|&c| flow.canonical_rep(md.scale(c as i64, w))).collect();
    let d1 = Cochain::from_fn(&flow_q, 2, |t| {
        let (a, _) = fixture.coords(t[0]);
        let (_, b2) = fixture.coords(t[1]);
        flow.canonical_rep(md.scale(((a * b2) % k) as i64, w))
    });
    let cocycle = StandardThree::new(Cochain::zero(&flow_q, 3), d1)?;
    let ob = ModularObstruction::new(section, flow.clone(), cocycle, nu)?;
    Ok((fixture, ob))
}

/// Outcome of the splitting search.
#[derive(Clone, Debug, PartialEq)]
pub enum Splitting {
    /// `(c_Q, d1 + d_Q b)` is the standard coboundary of `f`.
    Split { b: Cochain, f: Cochain },
    /// No `b` works; `candidates` normalized cochains were ruled out, all of them
    /// one by one when `exhaustive`.
    Obstructed { candidates: u128, exhaustive: bool },
}

impl Splitting {
    pub fn is_split(&self) -> bool {
        matches!(self, Splitting::Split { .. })
    }
}

/// Largest candidate count that is also scanned one `b` at a time.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 16;

fn twisted(ob: &ModularObstruction, b: &Cochain) -> StandardThree {
    let c = ob.cocycle();
    StandardThree {
        c: c.c.clone(),
        d1: c.d1.add(&coboundary(b)),
    }
}

/// Decides whether some flow-cocycle-valued `b` on Q makes the twisted
/// obstruction a standard coboundary. The decision is one joint linear solve
/// in `(f, b)`; small search spaces are also scanned one candidate at a time.
pub fn splitting_test(ob: &ModularObstruction, budget: &Budget) -> Result<Splitting> {
    let fq = ob.flow_q();
    let md = fq.module();
    let order = fq.group().order();
    let mut sys = LinearSystem::new();
    let fv = CochainVars::add(&mut sys, md, order, 2);
    let bv = CochainVars::add(&mut sys, md, order, 1);
    let c = ob.cocycle();
    for t in normalized_tuples(order, 2) {
        let mut eq = Equation::new(md);
        let start = fv.at(&t).expect("normalized");
        eq.aut(fq.theta_aut(), 1, start);
        eq.ident(-1, start);
        push_coboundary_terms(&mut eq, fq, &bv, &t, -1);
        eq.push(&mut sys, md, c.d1.get(&t));
    }
    for t in normalized_tuples(order, 3) {
        let mut eq = Equation::new(md);
        push_coboundary_terms(&mut eq, fq, &fv, &t, 1);
        eq.push(&mut sys, md, c.c.get(&t));
    }
    let candidates = (md.size() as u128).checked_pow(order as u32 - 1).unwrap_or(u128::MAX);
    let exhaustive = budget.check("splitting candidates", candidates).is_ok() && candidates <= EXHAUSTIVE_LIMIT;
    let solution = sys.solve();
    if exhaustive {
        let found = scan_candidates(ob, budget)?;
        if found.is_some() != solution.is_some() {
            return Err(Error::VerificationFailed("exhaustive and linear splitting searches disagree".into()));
        }
        return Ok(match found {
            Some((b, f)) => Splitting::Split { b, f },
            None => Splitting::Obstructed { candidates, exhaustive },
        });
    }
    Ok(match solution {
        Some(x) => {
            let b = bv.read(fq, &x);
            let f = is_standard_coboundary(&twisted(ob, &b))
                .ok_or_else(|| Error::VerificationFailed("linear splitting witness does not replay".into()))?;
            Splitting::Split { b, f }
        }
        None => Splitting::Obstructed { candidates, exhaustive },
    })
}

/// Tries every normalized `b` in lexicographic order against one factored
/// system for `f`; returns the first `b` that works.
fn scan_candidates(ob: &ModularObstruction, budget: &Budget) -> Result<Option<(Cochain, Cochain)>> {
    let fq = ob.flow_q();
    let md = fq.module();
    let order = fq.group().order();
    let mut sys = LinearSystem::new();
    let fv = CochainVars::add(&mut sys, md, order, 2);
    let pairs: Vec<Vec<usize>> = normalized_tuples(order, 2).collect();
    let triples: Vec<Vec<usize>> = normalized_tuples(order, 3).collect();
    for t in &pairs {
        let mut eq = Equation::new(md);
        let start = fv.at(t).expect("normalized");
        eq.aut(fq.theta_aut(), 1, start);
        eq.ident(-1, start);
        eq.push(&mut sys, md, 0);
    }
    for t in &triples {
        let mut eq = Equation::new(md);
        push_coboundary_terms(&mut eq, fq, &fv, t, 1);
        eq.push(&mut sys, md, 0);
    }
    let factored = sys.factor();
    let c = ob.cocycle();
    let mut rhs = Vec::with_capacity(sys.num_rows());
    let c_part: Vec<i64> = triples
        .iter()
        .flat_map(|t| (0..md.rank()).map(move |i| md.component(c.c.get(t), i) as i64))
        .collect();
    for b in crate::cochain::enumerate_cochains(fq, 1, budget)? {
        let d1 = c.d1.add(&coboundary(&b));
        rhs.clear();
        rhs.extend(pairs.iter().flat_map(|t| (0..md.rank()).map(|i| md.component(d1.get(t), i) as i64)));
        rhs.extend_from_slice(&c_part);
        if let Some(x) = factored.solve(&rhs) {
            let f = fv.read(fq, &x);
            if StandardThree::coboundary_of(&f) != twisted(ob, &b) {
                return Err(Error::VerificationFailed("scanned splitting witness does not replay".into()));
            }
            return Ok(Some((b, f)));
        }
    }
    Ok(None)
}

/// `e` on Q with `zeta(n_N(q,r)) = d_Q e(q,r)` modulo `Im(theta - 1)`, if any.
pub fn necessary_witness(ob: &ModularObstruction) -> Option<Cochain> {
    let fq = ob.flow_q();
    let md = fq.module();
    let order = fq.group().order();
    let mut sys = LinearSystem::new();
    let ev = CochainVars::add(&mut sys, md, order, 1);
    let xv = CochainVars::add(&mut sys, md, order, 2);
    for t in normalized_tuples(order, 2) {
        let mut eq = Equation::new(md);
        push_coboundary_terms(&mut eq, fq, &ev, &t, 1);
        let start = xv.at(&t).expect("normalized");
        eq.aut(fq.theta_aut(), 1, start);
        eq.ident(-1, start);
        eq.push(&mut sys, md, ob.zeta(ob.n_n(t[0], t[1])));
    }
    sys.solve().map(|x| ev.read(fq, &x))
}

/// Whether `(q,r) -> nu(n_N(q,r))` is a coboundary with values in `H^1_theta`.
pub fn necessary_test(ob: &ModularObstruction) -> bool {
    necessary_witness(ob).is_some()
}

/// `(q,r) -> nu(n_N(q,r)) - nu(n_N(r,q))` as canonical representatives, row-major over Q x Q.
pub fn antisymmetry_invariant(ob: &ModularObstruction) -> Vec<usize> {
    let f = ob.flow_g();
    let md = f.module();
    let k = ob.flow_q().group().order();
    let mut out = Vec::with_capacity(k * k);
    for q in 0..k {
        for r in 0..k {
            out.push(f.canonical_rep(md.sub(ob.zeta(ob.n_n(q, r)), ob.zeta(ob.n_n(r, q)))));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolution::resolve_obstruction;
    use crate::hjr::{delta_mod, obstruction_equal};

    fn demo(k: usize, w: usize) -> (HeisenbergFixture, ModularObstruction) {
        build_heisenberg_demo(k, FlowData::trivial_cyclic(k as u64), w).unwrap()
    }

    #[test]
    fn section_cocycle_is_ab() {
        let (fx, ob) = demo(3, 1);
        for q in 0..9 {
            for r in 0..9 {
                let (a, _) = fx.coords(q);
                let (_, b2) = fx.coords(r);
                assert_eq!(ob.n_n(q, r), (a * b2) % 3);
            }
        }
    }

    #[test]
    fn injective_nu_is_obstructed() {
        for k in [2, 3] {
            let (_, ob) = demo(k, 1);
            let s = splitting_test(&ob, &Budget::default()).unwrap();
            assert!(!s.is_split(), "k = {k}");
            assert!(!necessary_test(&ob));
            assert!(antisymmetry_invariant(&ob).iter().any(|&v| v != 0));
        }
        let (_, ob) = demo(2, 1);
        assert_eq!(
            splitting_test(&ob, &Budget::default()).unwrap(),
            Splitting::Obstructed { candidates: 8, exhaustive: true }
        );
    }

    #[test]
    fn zero_nu_splits() {
        for k in [2, 3] {
            let (_, ob) = demo(k, 0);
            assert!(splitting_test(&ob, &Budget::default()).unwrap().is_split());
            assert!(necessary_test(&ob));
            assert!(antisymmetry_invariant(&ob).iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn pairing_value() {
        let (fx, ob) = demo(2, 1);
        let q = (0..4).find(|&q| fx.coords(q) == (1, 0)).unwrap();
        let r = (0..4).find(|&r| fx.coords(r) == (0, 1)).unwrap();
        assert_eq!(antisymmetry_invariant(&ob)[q * 4 + r], 1);
    }

    #[test]
    fn incompatible_modulus() {
        let err = build_heisenberg_demo(2, FlowData::trivial_cyclic(4), 1).unwrap_err();
        assert_eq!(err, Error::IncompatibleModulus { k: 2, w: 1 });
    }

    #[test]
    fn heisenberg_obstruction_is_realized() {
        let (_, ob) = demo(2, 1);
        let res = resolve_obstruction(&ob, &Budget::default()).unwrap();
        let again = delta_mod(&res.chi, &res.tower).unwrap().obstruction;
        assert!(obstruction_equal(&again, &ob).unwrap().is_some());
    }
}
