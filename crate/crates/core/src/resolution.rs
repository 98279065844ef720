//! Resolution groups: an extension `M -> H -> G` with abelian `M` on which a
//! given 3-cocycle of `G` becomes a coboundary, and the pipeline realizing a
//! modular obstruction as the image of a characteristic cocycle.

use std::collections::HashMap;
use std::sync::Arc;

use crate::characteristic::CharacteristicCocycle;
use crate::cochain::{coboundary, cocycle_failure, is_coboundary_with, normalized_tuples, Cochain};
use crate::error::{Error, Result};
use crate::group::{CrossSection, FiniteGroup, NormalSubgroup, QuotientData};
use crate::hjr::{delta_hjr, delta_mod, obstruction_equal, partial_map, ModularObstruction, SectionTower};
use crate::module::FlowModule;
use crate::Budget;

/// `H = M x_mu G` with the characteristic cocycle of the extension `A -> E -> M`.
#[derive(Clone, Debug)]
pub struct ResolutionSystem {
    base: Arc<FlowModule>,
    big: Arc<FiniteGroup>,
    kernel: NormalSubgroup,
    projection: Arc<QuotientData>,
    section: CrossSection,
    flow: Arc<FlowModule>,
    chi: CharacteristicCocycle,
    /// `b` on H with `d_H b = pi^* c`.
    cobounding: Cochain,
    /// Elements of M as functions `G -> A` vanishing at the identity.
    functions: Vec<Vec<usize>>,
}

impl ResolutionSystem {
    /// The coefficients over G.
    pub fn base(&self) -> &Arc<FlowModule> {
        &self.base
    }

    pub fn big(&self) -> &Arc<FiniteGroup> {
        &self.big
    }

    /// `M`, with `(m, g)` stored at `m * |G| + g`.
    pub fn kernel(&self) -> &NormalSubgroup {
        &self.kernel
    }

    pub fn projection(&self) -> &Arc<QuotientData> {
        &self.projection
    }

    /// `g -> (0, g)`.
    pub fn section(&self) -> &CrossSection {
        &self.section
    }

    /// The coefficients pulled back to H.
    pub fn flow(&self) -> &Arc<FlowModule> {
        &self.flow
    }

    pub fn chi(&self) -> &CharacteristicCocycle {
        &self.chi
    }

    pub fn cobounding(&self) -> &Cochain {
        &self.cobounding
    }

    pub fn kernel_functions(&self) -> &[Vec<usize>] {
        &self.functions
    }
}

/// Lemma-style resolution of a 3-cocycle `c` on G: functions `B = A^G`, `C = B/A`,
/// `mu = [u]` with `u(g,h)(x) = alpha_x^-1 c(x,g,h)`, and `M` generated by the
/// orbit of the range of `mu`.
pub fn resolve_three_cocycle(c: &Cochain, budget: &Budget) -> Result<ResolutionSystem> {
    if c.degree() != 3 {
        return Err(Error::InvalidStandard("resolution needs a 3-cocycle".into()));
    }
    if let Some(t) = cocycle_failure(c) {
        return Err(Error::NotACocycle { tuple: t });
    }
    let flow = c.flow();
    let g = flow.group().clone();
    let md = flow.module().clone();
    let n = g.order();
    let size = md.size();
    let total = (size as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    budget.check("function module A^G", total)?;
    let inv_aut: Vec<Vec<usize>> = g.elements().map(|x| flow.action().aut(x).inverse()).collect();

    let add = |a: &[usize], b: &[usize]| -> Vec<usize> { a.iter().zip(b).map(|(&x, &y)| md.add(x, y)).collect() };
    let normalize = |b: Vec<usize>| -> Vec<usize> {
        let e = b[0];
        b.into_iter().map(|v| md.sub(v, e)).collect()
    };
    // (alpha_p b)(q) = alpha_p(b(q p)), re-normalized at the identity.
    let act = |p: usize, b: &[usize]| -> Vec<usize> {
        normalize((0..n).map(|q| flow.alpha(p, b[g.mul(q, p)])).collect())
    };
    let mu_fn: Vec<Vec<usize>> = (0..n * n)
        .map(|i| {
            let (x, y) = (i / n, i % n);
            normalize((0..n).map(|z| inv_aut[z][c.get(&[z, x, y])]).collect())
        })
        .collect();

    // M: span of the orbit of the range of mu.
    let zero = vec![0usize; n];
    let mut gens: Vec<Vec<usize>> = Vec::new();
    for m in &mu_fn {
        for p in g.elements() {
            let v = act(p, m);
            if v != zero && !gens.contains(&v) {
                gens.push(v);
            }
        }
    }
    let mut elements = vec![zero.clone()];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(zero.clone(), 0)]);
    let mut i = 0;
    while i < elements.len() {
        for gen in &gens {
            let v = add(&elements[i], gen);
            if !index.contains_key(&v) {
                index.insert(v.clone(), elements.len());
                elements.push(v);
            }
        }
        i += 1;
    }
    let encode = |b: &[usize]| b.iter().fold(0u128, |acc, &v| acc * size as u128 + v as u128);
    elements.sort_by_key(|b| encode(b));
    let index: HashMap<Vec<usize>, usize> = elements.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
    let k = elements.len();
    let order = k * n;
    budget.check_cells("resolution group table", (order as u128) * (order as u128))?;

    let sum_idx: Vec<usize> = (0..k * k).map(|i| index[&add(&elements[i / k], &elements[i % k])]).collect();
    let act_idx: Vec<usize> = (0..n * k)
        .map(|i| {
            let v = act(i / k, &elements[i % k]);
            *index.get(&v).expect("M is stable under the action")
        })
        .collect();
    let mu_idx: Vec<usize> = mu_fn.iter().map(|m| index[m]).collect();
    // mu must be a 2-cocycle in M for the twisted product to be associative.
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                let lhs = sum_idx[act_idx[a * k + mu_idx[b * n + d]] * k + mu_idx[a * n + g.mul(b, d)]];
                let rhs = sum_idx[mu_idx[a * n + b] * k + mu_idx[g.mul(a, b) * n + d]];
                if lhs != rhs {
                    return Err(Error::VerificationFailed(format!("mu is not a cocycle at ({a}, {b}, {d})")));
                }
            }
        }
    }
    let mul = |x: usize, y: usize| {
        let (m1, g1) = (x / n, x % n);
        let (m2, g2) = (y / n, y % n);
        let m = sum_idx[sum_idx[m1 * k + act_idx[g1 * k + m2]] * k + mu_idx[g1 * n + g2]];
        m * n + g.mul(g1, g2)
    };
    let big = Arc::new(FiniteGroup::from_fn(order, format!("H(c) over {}", g.label()), mul));
    let proj: Vec<usize> = (0..order).map(|x| x % n).collect();
    let projection = Arc::new(QuotientData::from_projection(&big, &g, proj.clone())?);
    let section = CrossSection::new(&projection, (0..n).collect())?;
    let kernel = projection.kernel().clone();
    if !kernel.is_abelian() || kernel.order() != k {
        return Err(Error::VerificationFailed("resolution kernel is not the abelian group M".into()));
    }
    let h_flow = Arc::new(FlowModule::new(flow.data(), flow.action().pullback(&big, &proj))?);

    // lambda(m; (m', x)) = alpha_x(s_j(alpha_x^-1 m)(x)), mu_E = 0.
    let lam = |m: usize, h: usize| {
        let x = h % n;
        let pre = &elements[act_idx[g.inv(x) * k + m / n]];
        flow.alpha(x, pre[x])
    };
    let chi = CharacteristicCocycle::from_fns_unchecked(&h_flow, &kernel, |_, _| 0, lam, |_| 0)?;
    chi.validate_pure()
        .map_err(|e| Error::VerificationFailed(format!("resolution cocycle is invalid: {e}")))?;
    let back = delta_hjr(&chi, &section)?;
    if back.values() != c.values() {
        let diff = back.map_into(flow, |v| v).sub(c);
        if is_coboundary_with(&diff, budget)?.is_none() {
            return Err(Error::VerificationFailed("HJR image of the resolution is not cohomologous to c".into()));
        }
    }
    // b((m1,x),(m2,y)) = alpha_x(s_j(m2)(x)) cobounds the inflation of c.
    let cobounding = Cochain::from_fn(&h_flow, 2, |t| {
        let x = t[0] % n;
        flow.alpha(x, elements[t[1] / n][x])
    });
    let pulled = c.pullback(&h_flow, projection.projection());
    let db = coboundary(&cobounding);
    if let Some(t) = normalized_tuples(order, 3).find(|t| db.get(t) != pulled.get(t)) {
        return Err(Error::VerificationFailed(format!("resolution witness fails at {t:?}")));
    }
    Ok(ResolutionSystem {
        base: flow.clone(),
        big,
        kernel,
        projection,
        section,
        flow: h_flow,
        chi,
        cobounding,
        functions: elements,
    })
}

/// A characteristic cocycle over `(H x Z, L, M)` realizing a modular obstruction.
#[derive(Clone, Debug)]
pub struct ResolvedObstruction {
    /// Resolution of the torus-valued image of the obstruction.
    pub system: ResolutionSystem,
    /// `A` with the action of `H` through `H -> G`.
    pub flow: Arc<FlowModule>,
    /// Preimage of N.
    pub l: NormalSubgroup,
    pub m: NormalSubgroup,
    pub chi: CharacteristicCocycle,
    pub tower: SectionTower,
    /// `a` on Q with `delta_mod(chi) - ob = d a` in the standard complex.
    pub witness: Cochain,
}

/// Builds `chi` with `delta_mod(chi)` equal to `ob` in the fiber product, and verifies it.
pub fn resolve_obstruction(ob: &ModularObstruction, budget: &Budget) -> Result<ResolvedObstruction> {
    let image = partial_map(ob)?;
    let system = resolve_three_cocycle(&image.c_g, budget)?;
    let fg = ob.flow_g();
    let g = fg.group();
    let md = fg.module();
    let n = g.order();
    let big = system.big().clone();
    let pg: Vec<usize> = system.projection().projection().to_vec();
    let s = ob.section();
    let pq = s.quotient().projection().to_vec();
    let flow = Arc::new(FlowModule::new(fg.data(), fg.action().pullback(&big, &pg))?);
    let l_members: Vec<usize> = big.elements().filter(|&x| ob.n().contains(pg[x])).collect();
    let l = NormalSubgroup::new(&big, &l_members)?;
    let m = system.kernel().clone();

    let b = &system.cobounding;
    let u = |x: usize, y: usize| {
        md.sum([
            image.f.get(&[pq[pg[x]], pq[pg[y]]]),
            image.a.get(&[pg[x], pg[y]]),
            fg.torus_element(b.get(&[x, y]) as u64),
        ])
    };
    let chi = CharacteristicCocycle::from_fns_unchecked(
        &flow,
        &l,
        u,
        |x, h| md.sub(u(h, big.conj(big.inv(h), x)), u(x, h)),
        |x| md.neg(ob.zeta(g.inv(pg[x]))),
    )?;
    chi.validate()
        .map_err(|e| Error::VerificationFailed(format!("assembled characteristic cocycle is invalid: {e}")))?;
    let tower = SectionTower::with_sections(&flow, &l, &m, Some((0..n).collect()), Some(s.table().to_vec()))?;
    let realized = delta_mod(&chi, &tower)?.obstruction;
    let witness = match obstruction_equal(&realized, ob)? {
        Some(w) => w,
        None => {
            // W(p,q) = u(sdot p, sdot q) - u(n_L(p,q), sdot(pq)) bridges the two Q-parts.
            let q = s.quotient().quot();
            let w = Cochain::from_fn(ob.flow_q(), 2, |t| {
                let (p, r) = (t[0], t[1]);
                md.sub(u(tower.sdot(p), tower.sdot(r)), u(tower.n_l(p, r), tower.sdot(q.mul(p, r))))
            });
            let residual = realized.cocycle().c.sub(&ob.cocycle().c).sub(&coboundary(&w));
            return Err(Error::VerificationFailed(format!(
                "realized obstruction differs from the target; nu {:?} vs {:?}, W-residual {:?}",
                realized.nu(),
                ob.nu(),
                residual.entries().into_iter().filter(|e| e.1 != 0).collect::<Vec<_>>()
            )));
        }
    };
    Ok(ResolvedObstruction {
        system,
        flow,
        l,
        m,
        chi,
        tower,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::{cocycles, is_coboundary};
    use crate::fixtures::{fx1, fx1_chi};
    use crate::group::find_isomorphism;
    use crate::module::{AbelianModule, FlowData, ModuleAut};

    fn flow_over(g: FiniteGroup, n: u64) -> Arc<FlowModule> {
        Arc::new(FlowModule::trivial_action(FlowData::trivial_cyclic(n), &Arc::new(g)).unwrap())
    }

    #[test]
    fn zero_cocycle_resolves_to_base() {
        let f = flow_over(FiniteGroup::cyclic(3), 2);
        let r = resolve_three_cocycle(&Cochain::zero(&f, 3), &Budget::default()).unwrap();
        assert_eq!(r.kernel().order(), 1);
        assert_eq!(r.big().order(), 3);
        assert!(r.chi().is_trivial());
    }

    #[test]
    fn generator_of_h3_z2_resolves_to_z4() {
        let f = flow_over(FiniteGroup::cyclic(2), 2);
        let c = Cochain::from_fn(&f, 3, |t| usize::from(t == [1, 1, 1]));
        let r = resolve_three_cocycle(&c, &Budget::default()).unwrap();
        assert_eq!(r.kernel().order(), 2);
        assert!(find_isomorphism(r.big(), &FiniteGroup::cyclic(4)).is_some());
        assert_eq!(delta_hjr(r.chi(), r.section()).unwrap().values(), c.values());
    }

    #[test]
    fn z4_coefficients_round_trip() {
        let f = flow_over(FiniteGroup::cyclic(2), 4);
        let c = Cochain::from_fn(&f, 3, |t| if t == [1, 1, 1] { 2 } else { 0 });
        let r = resolve_three_cocycle(&c, &Budget::default()).unwrap();
        let back = delta_hjr(r.chi(), r.section()).unwrap();
        assert!(is_coboundary(&back.sub(&c)).unwrap().is_some());
    }

    #[test]
    fn nontrivial_action_round_trip() {
        let g = Arc::new(FiniteGroup::cyclic(2));
        let md = AbelianModule::cyclic(3);
        let data = FlowData::new(md.clone(), ModuleAut::identity(&md), 0);
        let action = crate::module::GroupAction::by_sign(&g, &md, &[1]).unwrap();
        let f = Arc::new(FlowModule::new(data, action).unwrap());
        for c in cocycles(&f, 3, &Budget::default()).unwrap() {
            let r = resolve_three_cocycle(&c, &Budget::default()).unwrap();
            assert!(r.kernel().is_abelian());
            assert_eq!(r.big().order(), r.kernel().order() * 2);
            let back = delta_hjr(r.chi(), r.section()).unwrap();
            assert!(is_coboundary(&back.sub(&c)).unwrap().is_some());
        }
    }

    #[test]
    fn fx1_obstruction_is_realized() {
        let fx = fx1();
        let tower = SectionTower::new(&fx.flow, &fx.l, &fx.m).unwrap();
        let ob = delta_mod(&fx1_chi(&fx), &tower).unwrap().obstruction;
        let res = resolve_obstruction(&ob, &Budget::default()).unwrap();
        let again = delta_mod(&res.chi, &res.tower).unwrap().obstruction;
        assert!(obstruction_equal(&again, &ob).unwrap().is_some());
        let triv = ModularObstruction::trivial(ob.section().clone(), ob.flow_g().clone()).unwrap();
        let res = resolve_obstruction(&triv, &Budget::default()).unwrap();
        assert!(res.chi.is_trivial() || delta_mod(&res.chi, &res.tower).unwrap().obstruction.is_trivial());
    }
}
