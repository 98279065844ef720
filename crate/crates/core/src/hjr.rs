//! Connecting maps between characteristic cocycles, modular obstructions and
//! torus-valued 3-cocycles, plus an exhaustive exactness checker.
//!
//! Notation: `H -> G = H/M -> Q = G/N` with `N = L/M`, sections `s_H: G -> H`,
//! `s: Q -> G` and `sdot = s_H . s`. `n_L(p,q) = sdot(p) sdot(q) sdot(pq)^-1` lies in L.

use std::sync::Arc;

use crate::characteristic::{enumerate_characteristic, res_standard_two, CharacteristicCocycle};
use crate::cochain::{
    coboundary, cocycle_failure, cocycles, is_coboundary_with, normalized_tuples, push_coboundary_terms,
    Cochain, CochainVars, Equation,
};
use crate::error::{Error, Result};
use crate::group::{quotient, section_cocycle, CrossSection, FiniteGroup, NormalSubgroup, QuotientData, SectionCocycle};
use crate::linalg::LinearSystem;
use crate::module::FlowModule;
use crate::standard::{flow_act, h3s_class_equal, is_standard_coboundary, FlowElt, StandardThree, StandardTwo};
use crate::Budget;

/// The coefficients over the quotient by `s`'s kernel, which must act trivially.
pub fn descend_flow(flow: &FlowModule, s: &CrossSection) -> Result<Arc<FlowModule>> {
    Ok(Arc::new(FlowModule::new(flow.data(), flow.action().descend(s)?)?))
}

fn defect(h: &FiniteGroup, q: &FiniteGroup, sdot: &[usize], a: usize, b: usize) -> usize {
    h.mul(h.mul(sdot[a], sdot[b]), h.inv(sdot[q.mul(a, b)]))
}

/// The HJR 3-cochain of `(lamH, mu)` along `sdot: Q -> H`.
fn hjr_cochain(
    flow_q: &Arc<FlowModule>,
    h: &FiniteGroup,
    sdot: &[usize],
    lam_h: impl Fn(usize, usize) -> usize,
    mu: impl Fn(usize, usize) -> usize,
) -> Cochain {
    let q = flow_q.group().clone();
    let md = flow_q.module().clone();
    Cochain::from_fn(flow_q, 3, |t| {
        let (p, a, b) = (t[0], t[1], t[2]);
        let nl = |x, y| defect(h, &q, sdot, x, y);
        let x = h.conj(sdot[p], nl(a, b));
        let v = md.add(lam_h(x, sdot[p]), mu(x, nl(p, q.mul(a, b))));
        md.sub(v, mu(nl(p, a), nl(q.mul(p, a), b)))
    })
}

fn same_subgroup(a: &NormalSubgroup, b: &NormalSubgroup) -> bool {
    a.members() == b.members() && **a.parent() == **b.parent()
}

/// `delta_HJR(chi)` along a section of `H -> H/L`; the flow part of `chi` is ignored.
pub fn delta_hjr(chi: &CharacteristicCocycle, s: &CrossSection) -> Result<Cochain> {
    let qd = s.quotient();
    if **qd.parent() != **chi.group() || qd.kernel().members() != chi.l().members() {
        return Err(Error::SectionMismatch("section is not a section of H -> H/L".into()));
    }
    let flow_q = descend_flow(chi.flow(), s)?;
    let c = hjr_cochain(&flow_q, chi.group(), s.table(), |x, g| chi.lam_h(x, g), |x, y| chi.mu(x, y));
    if let Some(t) = cocycle_failure(&c) {
        return Err(Error::VerificationFailed(format!("HJR cochain is not a cocycle at {t:?}")));
    }
    Ok(c)
}

/// `(chi, f)` from a 2-cochain `mu` on G with `d mu = pi^* xi`; afterwards
/// `xi = d_Q f + delta_HJR(chi)` holds and is checked.
pub fn inverse_from_cobounding(
    xi: &Cochain,
    mu: &Cochain,
    s: &CrossSection,
) -> Result<(CharacteristicCocycle, Cochain)> {
    let qd = s.quotient();
    let g = mu.group();
    if xi.degree() != 3 || mu.degree() != 2 {
        return Err(Error::InvalidStandard("expected a 3-cocycle on Q and a 2-cochain on G".into()));
    }
    if **qd.parent() != **g || **qd.quot() != **xi.group() || xi.module() != mu.module() {
        return Err(Error::SectionMismatch("section does not connect the two groups".into()));
    }
    let pulled = xi.pullback(mu.flow(), qd.projection());
    let dmu = coboundary(mu);
    if let Some(t) = normalized_tuples(g.order(), 3).find(|t| dmu.get(t) != pulled.get(t)) {
        return Err(Error::NotCobounding { tuple: t });
    }
    let md = mu.module();
    let n = qd.kernel();
    let chi = CharacteristicCocycle::from_fns_unchecked(
        mu.flow(),
        n,
        |x, y| mu.get(&[x, y]),
        |x, h| md.sub(mu.get(&[h, g.conj(g.inv(h), x)]), mu.get(&[x, h])),
        |_| 0,
    )?;
    chi.validate_pure()
        .map_err(|e| Error::VerificationFailed(format!("induced characteristic data is invalid: {e}")))?;
    let nn = section_cocycle(s);
    let q = qd.quot();
    let f = Cochain::from_fn(xi.flow(), 2, |t| {
        let (p, r) = (t[0], t[1]);
        md.sub(mu.get(&[s.sect(p), s.sect(r)]), mu.get(&[nn.get(p, r), s.sect(q.mul(p, r))]))
    });
    let c = delta_hjr(&chi, s)?;
    let rebuilt = coboundary(&f).add(&c);
    if rebuilt.values() != xi.values() {
        return Err(Error::VerificationFailed("xi differs from d f + delta_HJR(chi)".into()));
    }
    Ok((chi, f))
}

/// The chain `H -> G -> Q` with chosen sections and the induced coefficients.
#[derive(Clone, Debug)]
pub struct SectionTower {
    flow_h: Arc<FlowModule>,
    l: NormalSubgroup,
    m: NormalSubgroup,
    s_h: CrossSection,
    flow_g: Arc<FlowModule>,
    n: NormalSubgroup,
    s: CrossSection,
    flow_q: Arc<FlowModule>,
    s_dot: CrossSection,
    n_l: Vec<usize>,
    n_n: SectionCocycle,
}

impl SectionTower {
    /// Minimal sections throughout.
    pub fn new(flow_h: &Arc<FlowModule>, l: &NormalSubgroup, m: &NormalSubgroup) -> Result<Self> {
        Self::with_sections(flow_h, l, m, None, None)
    }

    /// `s_h` maps `H/M -> H` and `s` maps `Q -> H/M`, both as index tables.
    pub fn with_sections(
        flow_h: &Arc<FlowModule>,
        l: &NormalSubgroup,
        m: &NormalSubgroup,
        s_h: Option<Vec<usize>>,
        s: Option<Vec<usize>>,
    ) -> Result<Self> {
        let h = flow_h.group();
        if **l.parent() != **h || **m.parent() != **h {
            return Err(Error::NotSubgroup("L and M must be subgroups of H".into()));
        }
        if !m.is_subset_of(l) {
            return Err(Error::NotSubgroup("M is not contained in L".into()));
        }
        if let Some(&x) = l.members().iter().find(|&&x| !flow_h.action().aut(x).is_identity()) {
            return Err(Error::InvalidAction(format!("element {x} of L acts nontrivially")));
        }
        let qg = Arc::new(quotient(h, m)?);
        let s_h = match s_h {
            Some(t) => CrossSection::new(&qg, t)?,
            None => CrossSection::minimal(&qg),
        };
        let flow_g = descend_flow(flow_h, &s_h)?;
        let n = l.image(&qg);
        let qq = Arc::new(quotient(qg.quot(), &n)?);
        let s = match s {
            Some(t) => CrossSection::new(&qq, t)?,
            None => CrossSection::minimal(&qq),
        };
        Self::assemble(flow_h.clone(), l.clone(), m.clone(), s_h, flow_g, n, s)
    }

    fn assemble(
        flow_h: Arc<FlowModule>,
        l: NormalSubgroup,
        m: NormalSubgroup,
        s_h: CrossSection,
        flow_g: Arc<FlowModule>,
        n: NormalSubgroup,
        s: CrossSection,
    ) -> Result<Self> {
        let h = flow_h.group().clone();
        let qd = s.quotient();
        let q = qd.quot().clone();
        let flow_q = descend_flow(&flow_g, &s)?;
        let proj: Vec<usize> = h.elements().map(|x| qd.proj(s_h.quotient().proj(x))).collect();
        let hq = Arc::new(QuotientData::from_projection(&h, &q, proj)?);
        let sdot: Vec<usize> = q.elements().map(|p| s_h.sect(s.sect(p))).collect();
        let s_dot = CrossSection::new(&hq, sdot.clone())?;
        let k = q.order();
        let mut n_l = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                n_l.push(defect(&h, &q, &sdot, a, b));
            }
        }
        let n_n = section_cocycle(&s);
        Ok(SectionTower {
            flow_h,
            l,
            m,
            s_h,
            flow_g,
            n,
            s,
            flow_q,
            s_dot,
            n_l,
            n_n,
        })
    }

    /// Same tower with the section `Q -> G` replaced.
    pub fn with_q_section(&self, s: &CrossSection) -> Result<Self> {
        if s.quotient().projection() != self.s.quotient().projection() {
            return Err(Error::SectionMismatch("section of a different quotient".into()));
        }
        let s = CrossSection::new(self.s.quotient(), s.table().to_vec())?;
        Self::assemble(
            self.flow_h.clone(),
            self.l.clone(),
            self.m.clone(),
            self.s_h.clone(),
            self.flow_g.clone(),
            self.n.clone(),
            s,
        )
    }

    pub fn flow_h(&self) -> &Arc<FlowModule> {
        &self.flow_h
    }

    pub fn flow_g(&self) -> &Arc<FlowModule> {
        &self.flow_g
    }

    pub fn flow_q(&self) -> &Arc<FlowModule> {
        &self.flow_q
    }

    pub fn l(&self) -> &NormalSubgroup {
        &self.l
    }

    pub fn m(&self) -> &NormalSubgroup {
        &self.m
    }

    pub fn n(&self) -> &NormalSubgroup {
        &self.n
    }

    /// `s_H: G -> H`.
    pub fn s_h(&self) -> &CrossSection {
        &self.s_h
    }

    /// `s: Q -> G`.
    pub fn s(&self) -> &CrossSection {
        &self.s
    }

    /// `sdot: Q -> H` as a section of `H -> H/L`.
    pub fn s_dot(&self) -> &CrossSection {
        &self.s_dot
    }

    pub fn sdot(&self, p: usize) -> usize {
        self.s_dot.sect(p)
    }

    pub fn n_l(&self, p: usize, q: usize) -> usize {
        self.n_l[p * self.flow_q.group().order() + q]
    }

    pub fn n_n(&self, p: usize, q: usize) -> usize {
        self.n_n.get(p, q)
    }
}

/// A point of the fiber product of `H^3_s(Q~, A)` with `Hom_G(N, H^1_theta)`,
/// pinned to a section `Q -> G`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularObstruction {
    section: CrossSection,
    flow_g: Arc<FlowModule>,
    cocycle: StandardThree,
    /// Canonical representative of `nu(n)` for each member of N, in member order.
    nu: Vec<usize>,
    n_n: SectionCocycle,
}

impl ModularObstruction {
    pub fn new(section: CrossSection, flow_g: Arc<FlowModule>, cocycle: StandardThree, nu: Vec<usize>) -> Result<Self> {
        let n_n = section_cocycle(&section);
        let ob = ModularObstruction {
            section,
            flow_g,
            cocycle,
            nu,
            n_n,
        };
        ob.validate()?;
        Ok(ob)
    }

    pub fn trivial(section: CrossSection, flow_g: Arc<FlowModule>) -> Result<Self> {
        let flow_q = descend_flow(&flow_g, &section)?;
        let nu = vec![0; section.quotient().kernel().order()];
        Self::new(section, flow_g, StandardThree::zero(&flow_q), nu)
    }

    pub fn validate(&self) -> Result<()> {
        let qd = self.section.quotient();
        let f = &self.flow_g;
        let g = f.group();
        if **qd.parent() != **g {
            return Err(Error::InvalidObstruction("section is not a section of G".into()));
        }
        let expected = descend_flow(f, &self.section)?;
        if *expected != **self.cocycle.flow() {
            return Err(Error::InvalidObstruction("cocycle coefficients are not those induced from G".into()));
        }
        self.cocycle.validate()?;
        let n = qd.kernel();
        if self.nu.len() != n.order() {
            return Err(Error::InvalidObstruction(format!("nu has {} entries, N has {}", self.nu.len(), n.order())));
        }
        if let Some(&v) = self.nu.iter().find(|&&v| v >= f.module().size() || f.canonical_rep(v) != v) {
            return Err(Error::InvalidObstruction(format!("{v} is not a canonical class representative")));
        }
        for &x in n.members() {
            for &y in n.members() {
                if self.nu_at(g.mul(x, y)) != f.h1_add(self.nu_at(x), self.nu_at(y)) {
                    return Err(Error::InvalidObstruction(format!("nu is not additive at ({x}, {y})")));
                }
            }
            for h in g.elements() {
                if self.nu_at(g.conj(h, x)) != f.canonical_rep(f.alpha(h, self.nu_at(x))) {
                    return Err(Error::InvalidObstruction(format!("nu is not equivariant at ({h}, {x})")));
                }
            }
        }
        if let Some((q, r)) = self.fiber_failure() {
            return Err(Error::FiberViolated { q, r });
        }
        Ok(())
    }

    /// First `(q, r)` where `[d1(q,r)] != nu(n_N(q,r))`.
    pub fn fiber_failure(&self) -> Option<(usize, usize)> {
        let f = &self.flow_g;
        let k = self.section.quotient().quot().order();
        (0..k)
            .flat_map(|q| (0..k).map(move |r| (q, r)))
            .find(|&(q, r)| f.canonical_rep(self.cocycle.d1.get(&[q, r])) != self.nu_at(self.n_n.get(q, r)))
    }

    pub fn section(&self) -> &CrossSection {
        &self.section
    }

    pub fn flow_g(&self) -> &Arc<FlowModule> {
        &self.flow_g
    }

    pub fn flow_q(&self) -> &Arc<FlowModule> {
        self.cocycle.flow()
    }

    pub fn cocycle(&self) -> &StandardThree {
        &self.cocycle
    }

    pub fn n(&self) -> &NormalSubgroup {
        self.section.quotient().kernel()
    }

    pub fn nu(&self) -> &[usize] {
        &self.nu
    }

    /// `nu(x)` for `x` in N.
    pub fn nu_at(&self, x: usize) -> usize {
        self.nu[self.n().position(x).expect("element of N")]
    }

    /// `zeta_nu = canonical_rep . nu`, a cocycle-level lift of `nu`.
    pub fn zeta(&self, x: usize) -> usize {
        self.nu_at(x)
    }

    pub fn n_n(&self, q: usize, r: usize) -> usize {
        self.n_n.get(q, r)
    }

    pub fn is_trivial(&self) -> bool {
        self.nu.iter().all(|&v| v == 0) && is_standard_coboundary(&self.cocycle).is_some()
    }
}

/// A modular obstruction together with a cocycle-level lift of `nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionCocycleData {
    pub obstruction: ModularObstruction,
    /// `zeta(n)` for each member of N, in member order.
    pub zeta: Vec<usize>,
}

impl ObstructionCocycleData {
    pub fn new(obstruction: ModularObstruction, zeta: Vec<usize>) -> Result<Self> {
        let f = obstruction.flow_g();
        if zeta.len() != obstruction.nu().len() {
            return Err(Error::InvalidObstruction("zeta has the wrong length".into()));
        }
        if let Some(i) = (0..zeta.len()).find(|&i| f.canonical_rep(zeta[i]) != obstruction.nu()[i]) {
            return Err(Error::InvalidObstruction(format!(
                "zeta does not lift nu at {}",
                obstruction.n().members()[i]
            )));
        }
        Ok(ObstructionCocycleData { obstruction, zeta })
    }
}

/// The modified HJR map into the fiber product. Accepts every `chi` with
/// `M` inside `K(chi)`, which covers both readings of membership.
pub fn delta_mod(chi: &CharacteristicCocycle, tower: &SectionTower) -> Result<ObstructionCocycleData> {
    if **chi.flow() != **tower.flow_h() || !same_subgroup(chi.l(), tower.l()) {
        return Err(Error::ContextMismatch("cocycle and tower have different H, L or coefficients".into()));
    }
    let k = chi.compute_k()?;
    if !tower.m().is_subset_of(&k) {
        return Err(Error::NotInZLM("M is not contained in K(chi)".into()));
    }
    let flow_q = tower.flow_q();
    let d1 = Cochain::from_fn(flow_q, 2, |t| chi.lam_t(tower.n_l(t[0], t[1])));
    let c = hjr_cochain(flow_q, chi.group(), tower.s_dot().table(), |x, g| chi.lam_h(x, g), |x, y| chi.mu(x, y));
    let fg = tower.flow_g();
    let zeta: Vec<usize> = tower.n().members().iter().map(|&x| chi.lam_t(tower.s_h().sect(x))).collect();
    let nu = zeta.iter().map(|&z| fg.canonical_rep(z)).collect();
    let wrap = |e: Error| Error::VerificationFailed(format!("modified HJR image is not a modular obstruction: {e}"));
    let cocycle = StandardThree::new(c, d1).map_err(wrap)?;
    let ob = ModularObstruction::new(tower.s().clone(), fg.clone(), cocycle, nu).map_err(wrap)?;
    ObstructionCocycleData::new(ob, zeta)
}

/// The cochain `f` on `Q x Z` cobounding the modified HJR image of `Res(m)`.
#[derive(Clone, Debug)]
pub struct RestrictedCobounding {
    m: StandardTwo,
    tower: SectionTower,
    image: StandardThree,
}

impl RestrictedCobounding {
    pub fn eval(&self, p: FlowElt, q: FlowElt) -> usize {
        let t = &self.tower;
        let fh = t.flow_h();
        let md = fh.module();
        let qg = t.flow_q().group();
        let (sp, sq) = (t.sdot(p.0), t.sdot(q.0));
        let flow_term = fh.alpha(sp, fh.flow_expand(p.1, self.m.d.get(&[sq])));
        let v = md.add(flow_term, self.m.mu.get(&[sp, sq]));
        md.sub(self.m.mu.get(&[t.n_l(p.0, q.0), t.sdot(qg.mul(p.0, q.0))]), v)
    }

    /// The standard 3-cocycle `c_m` that `f` cobounds.
    pub fn image(&self) -> &StandardThree {
        &self.image
    }

    /// First triple with flow components in `-bound..=bound` where `d f != c_m`.
    pub fn failure(&self, bound: i64) -> Option<[FlowElt; 3]> {
        let fq = self.tower.flow_q();
        let q = fq.group();
        let md = fq.module();
        let mul = |a: FlowElt, b: FlowElt| (q.mul(a.0, b.0), a.1 + b.1);
        let elts: Vec<FlowElt> = q.elements().flat_map(|g| (-bound..=bound).map(move |s| (g, s))).collect();
        for &a in &elts {
            for &b in &elts {
                for &c in &elts {
                    let v = md.sum([
                        flow_act(fq, a, self.eval(b, c)),
                        md.neg(self.eval(mul(a, b), c)),
                        self.eval(a, mul(b, c)),
                        md.neg(self.eval(a, b)),
                    ]);
                    if v != self.image.expand(a, b, c) {
                        return Some([a, b, c]);
                    }
                }
            }
        }
        None
    }
}

/// Builds `f` for a standard 2-cocycle on `H x Z` and checks `d f = c_m` on flows in `-2..=2`.
pub fn cobound_for_restricted(m: &StandardTwo, tower: &SectionTower) -> Result<RestrictedCobounding> {
    if **m.flow() != **tower.flow_h() {
        return Err(Error::ContextMismatch("standard cocycle over different coefficients".into()));
    }
    let chi = res_standard_two(m, tower.l())?;
    let image = delta_mod(&chi, tower)?.obstruction.cocycle;
    let out = RestrictedCobounding {
        m: m.clone(),
        tower: tower.clone(),
        image,
    };
    if let Some(w) = out.failure(2) {
        return Err(Error::VerificationFailed(format!("d f differs from c_m at {w:?}")));
    }
    Ok(out)
}

/// The image of an obstruction in `H^3(G, T)` with the cochains used to build it.
#[derive(Clone, Debug)]
pub struct PartialImage {
    /// Torus-valued 3-cocycle on G, read in the torus module.
    pub c_g: Cochain,
    /// The same cocycle with values in A.
    pub values: Cochain,
    /// `theta(f) - f = d1 - zeta(n_N)` on Q.
    pub f: Cochain,
    /// The correction on G making the flow part vanish.
    pub a: Cochain,
}

/// `c_G = pi^* c_Q - d_G(pi^* f + a)`, which has values in the torus.
pub fn partial_map(ob: &ModularObstruction) -> Result<PartialImage> {
    if let Some((q, r)) = ob.fiber_failure() {
        return Err(Error::FiberViolated { q, r });
    }
    let fg = ob.flow_g();
    let g = fg.group();
    let md = fg.module();
    let s = ob.section();
    let qd = s.quotient();
    let proj = qd.projection();
    let d1 = &ob.cocycle().d1;
    let mut fail = None;
    let f = Cochain::from_fn(ob.flow_q(), 2, |t| {
        let rhs = md.sub(d1.get(t), ob.zeta(ob.n_n(t[0], t[1])));
        fg.theta_preimage(rhs).unwrap_or_else(|| {
            fail.get_or_insert((t[0], t[1]));
            0
        })
    });
    if let Some((q, r)) = fail {
        return Err(Error::FiberViolated { q, r });
    }
    let n_of = |x: usize| g.mul(s.sect(proj[x]), g.inv(x));
    let mut bad = None;
    let a = Cochain::from_fn(fg, 2, |t| {
        let (x, y) = (t[0], t[1]);
        let rhs = md.sum([
            ob.zeta(ob.n_n(proj[x], proj[y])),
            md.neg(ob.zeta(n_of(x))),
            md.neg(fg.alpha(x, ob.zeta(n_of(y)))),
            ob.zeta(n_of(g.mul(x, y))),
        ]);
        fg.theta_preimage(rhs).unwrap_or_else(|| {
            bad.get_or_insert(t.to_vec());
            0
        })
    });
    if let Some(t) = bad {
        return Err(Error::VerificationFailed(format!(
            "nu is not an equivariant homomorphism on the level of classes at {t:?}"
        )));
    }
    let b = f.pullback(fg, proj).add(&a);
    let values = ob.cocycle().c.pullback(fg, proj).sub(&coboundary(&b));
    let torus = Arc::new(fg.torus_module(g));
    for t in normalized_tuples(g.order(), 3) {
        if !fg.in_torus(values.get(&t)) {
            return Err(Error::TorusCoercionFailed { tuple: t });
        }
    }
    let c_g = values.map_into(&torus, |v| fg.torus_log(v).expect("checked") as usize);
    if let Some(t) = cocycle_failure(&c_g) {
        return Err(Error::VerificationFailed(format!("image in H^3(G, T) is not a cocycle at {t:?}")));
    }
    Ok(PartialImage { c_g, values, f, a })
}

/// `Inf = inf . partial`: the torus-valued image pulled back along `H -> G`.
pub fn inf_map(ob: &ModularObstruction, to_g: &QuotientData) -> Result<Cochain> {
    let fg = ob.flow_g();
    if **to_g.quot() != **fg.group() {
        return Err(Error::ContextMismatch("projection does not land in G".into()));
    }
    let image = partial_map(ob)?;
    let torus_h = Arc::new(fg.torus_module(to_g.parent()));
    Ok(image.c_g.pullback(&torus_h, to_g.projection()))
}

/// Transports `ob` to another section of the same quotient `G -> Q`.
pub fn change_section(ob: &ModularObstruction, s2: &CrossSection) -> Result<ModularObstruction> {
    let s = ob.section();
    let qd = s.quotient();
    if **s2.quotient().parent() != **qd.parent()
        || s2.quotient().projection() != qd.projection()
        || **s2.quotient().quot() != **qd.quot()
    {
        return Err(Error::SectionMismatch("sections of different quotients".into()));
    }
    let s2 = CrossSection::new(qd, s2.table().to_vec())?;
    let fg = ob.flow_g();
    let g = fg.group();
    let q = qd.quot();
    let md = fg.module();
    let fq = ob.flow_q();
    let n2 = |p: usize| g.mul(s2.sect(p), g.inv(s.sect(p)));
    let d1 = &ob.cocycle().d1;
    let d1_new = Cochain::from_fn(fq, 2, |t| {
        let (a, b) = (t[0], t[1]);
        md.sum([
            d1.get(t),
            ob.zeta(n2(a)),
            fq.alpha(a, ob.zeta(n2(b))),
            md.neg(ob.zeta(n2(q.mul(a, b)))),
        ])
    });
    let cocycle = StandardThree {
        c: ob.cocycle().c.clone(),
        d1: d1_new,
    };
    ModularObstruction::new(s2, fg.clone(), cocycle, ob.nu().to_vec())
        .map_err(|e| Error::VerificationFailed(format!("transported obstruction is invalid: {e}")))
}

/// Equality in the fiber product, transporting `b` to `a`'s section first.
/// Returns the witness `w` with `c_a - c_b' = d w` when equal.
pub fn obstruction_equal(a: &ModularObstruction, b: &ModularObstruction) -> Result<Option<Cochain>> {
    let (qa, qb) = (a.section().quotient(), b.section().quotient());
    if **a.flow_g() != **b.flow_g() || qa.projection() != qb.projection() || **qa.quot() != **qb.quot() {
        return Err(Error::ContextMismatch("obstructions over different G, N, Q or coefficients".into()));
    }
    let b = if a.section().table() != b.section().table() {
        change_section(b, a.section())?
    } else {
        b.clone()
    };
    if a.nu() != b.nu() {
        return Ok(None);
    }
    h3s_class_equal(a.cocycle(), b.cocycle())
}

/// Outcome of one exactness assertion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AssertionResult {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl AssertionResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(witness());
        }
    }
}

/// Assertions (b) to (d) under one reading of membership in `Z(H~, L, M, A)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReadingReport {
    pub members: usize,
    pub kernel: usize,
    pub ker_in_res: AssertionResult,
    pub inf_kills_image: AssertionResult,
    pub sublemma: AssertionResult,
}

impl ReadingReport {
    pub fn passed(&self) -> bool {
        self.ker_in_res.passed() && self.inf_kills_image.passed() && self.sublemma.passed()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessReport {
    pub characteristic_total: usize,
    pub torus_cocycles: usize,
    /// (a) Res lands in the kernel of the modified map.
    pub res_in_ker: AssertionResult,
    /// Cocycle-level membership.
    pub strict: ReadingReport,
    /// Membership up to perturbation by a cochain on L.
    pub class: ReadingReport,
}

impl ExactnessReport {
    pub fn passed(&self) -> bool {
        self.res_in_ker.passed() && self.strict.passed() && self.class.passed()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            return Ok(self);
        }
        let mut dump = Vec::new();
        for (name, r) in [
            ("(a)", &self.res_in_ker),
            ("strict (b)", &self.strict.ker_in_res),
            ("strict (c)", &self.strict.inf_kills_image),
            ("strict (d)", &self.strict.sublemma),
            ("class (b)", &self.class.ker_in_res),
            ("class (c)", &self.class.inf_kills_image),
            ("class (d)", &self.class.sublemma),
        ] {
            for w in &r.failures {
                dump.push(format!("{name}: {w}"));
            }
        }
        Err(Error::ExactnessViolation(dump.join("; ")))
    }
}

/// Solves `chi = perturb(trivial, mu0, a)` for a torus-valued 2-cocycle `mu0`
/// on H and `a: L -> A`; returns `mu0` over the torus module and `a` by position.
pub fn exhibit_as_res(chi: &CharacteristicCocycle) -> Result<Option<(Cochain, Vec<usize>)>> {
    let f = chi.flow();
    let h = chi.group();
    let l = chi.l();
    let md = f.module();
    let torus = Arc::new(f.torus_module(h));
    let tm = torus.module().clone();
    let mut sys = LinearSystem::new();
    let tv = CochainVars::add(&mut sys, &tm, h.order(), 2);
    for t in normalized_tuples(h.order(), 3) {
        let mut eq = Equation::new(&tm);
        push_coboundary_terms(&mut eq, &torus, &tv, &t, 1);
        eq.push(&mut sys, &tm, 0);
    }
    let mut a_at = vec![usize::MAX; h.order()];
    for &x in &l.members()[1..] {
        a_at[x] = sys.add_vars(md.moduli());
    }
    let gen = f.torus_generator();
    let t_term = |eq: &mut Equation, sign: i64, x: usize, y: usize| {
        if let Some(v) = tv.at(&[x, y]) {
            eq.scalar(md, v, sign, gen);
        }
    };
    let a_term = |eq: &mut Equation, sign: i64, x: usize, act: Option<usize>| {
        if x != 0 {
            match act {
                Some(g) => eq.aut(f.action().aut(g), sign, a_at[x]),
                None => eq.ident(sign, a_at[x]),
            }
        }
    };
    for &m in &l.members()[1..] {
        for &n in &l.members()[1..] {
            let mut eq = Equation::new(md);
            t_term(&mut eq, 1, m, n);
            a_term(&mut eq, 1, m, None);
            a_term(&mut eq, 1, n, None);
            a_term(&mut eq, -1, h.mul(m, n), None);
            eq.push(&mut sys, md, chi.mu(m, n));
        }
        for g in h.elements().skip(1) {
            let x = h.conj(h.inv(g), m);
            let mut eq = Equation::new(md);
            t_term(&mut eq, 1, g, x);
            t_term(&mut eq, -1, m, g);
            a_term(&mut eq, 1, x, Some(g));
            a_term(&mut eq, -1, m, None);
            eq.push(&mut sys, md, chi.lam_h(m, g));
        }
        let mut eq = Equation::new(md);
        eq.aut(f.theta_aut(), 1, a_at[m]);
        eq.ident(-1, a_at[m]);
        eq.push(&mut sys, md, chi.lam_t(m));
    }
    let Some(x) = sys.solve() else {
        return Ok(None);
    };
    let mu0 = tv.read(&torus, &x);
    let a: Vec<usize> = l
        .members()
        .iter()
        .map(|&m| if m == 0 { 0 } else { md.encode(&x[a_at[m]..a_at[m] + md.rank()]) })
        .collect();
    let lifted = mu0.map_into(f, |v| f.torus_element(v as u64));
    let rebuilt = CharacteristicCocycle::trivial(f, l)?.perturb(Some(&lifted), &a)?;
    if rebuilt != *chi {
        return Err(Error::VerificationFailed("Res witness does not reproduce the cocycle".into()));
    }
    Ok(Some((mu0, a)))
}

fn check_reading(
    chi: &CharacteristicCocycle,
    tower: &SectionTower,
    torus_g: &Arc<FlowModule>,
    budget: &Budget,
    out: &mut ReadingReport,
) -> Result<()> {
    out.members += 1;
    let data = delta_mod(chi, tower)?;
    let ob = &data.obstruction;
    if ob.is_trivial() {
        out.kernel += 1;
        let found = exhibit_as_res(chi)?;
        out.ker_in_res.record(found.is_some(), || format!("{chi:?} has trivial image but is not a Res class"));
    }
    let h = tower.flow_h().group();
    let inf = inf_map(ob, tower.s_h().quotient())?;
    let killed = is_coboundary_with(&inf, budget)?.is_some();
    out.inf_kills_image.record(killed, || format!("Inf of the image of {chi:?} is not a coboundary on {}", h.label()));
    let image = partial_map(ob)?;
    let restricted = chi.restrict_to_torus(tower.m())?;
    let hjr = delta_hjr(&restricted, tower.s_h())?.map_into(torus_g, |v| v);
    let diff = image.c_g.sub(&hjr);
    let agree = is_coboundary_with(&diff, budget)?.is_some();
    out.sublemma.record(agree, || {
        format!("partial(delta(chi)) and delta_HJR(i*chi) differ in class for {chi:?}")
    });
    Ok(())
}

/// Checks the exactness assertions by enumerating `Z(H~, L, A)` and `Z^2(H, T)`.
pub fn verify_exactness(
    flow_h: &Arc<FlowModule>,
    l: &NormalSubgroup,
    m: &NormalSubgroup,
    budget: &Budget,
) -> Result<ExactnessReport> {
    let tower = SectionTower::new(flow_h, l, m)?;
    let h = flow_h.group();
    let torus_h = Arc::new(flow_h.torus_module(h));
    let torus_g = Arc::new(flow_h.torus_module(tower.flow_g().group()));
    let mut res_in_ker = AssertionResult::default();
    let mut torus_cocycles = 0;
    for mu_t in cocycles(&torus_h, 2, budget)? {
        torus_cocycles += 1;
        let mu = mu_t.map_into(flow_h, |v| flow_h.torus_element(v as u64));
        let chi = CharacteristicCocycle::trivial(flow_h, l)?.perturb(Some(&mu), &vec![0; l.order()])?;
        let ob = delta_mod(&chi, &tower)?.obstruction;
        res_in_ker.record(ob.is_trivial(), || format!("Res of {mu_t:?} has nontrivial image"));
    }
    let all = enumerate_characteristic(flow_h, l, budget)?;
    let mut strict = ReadingReport::default();
    let mut class = ReadingReport::default();
    for chi in &all {
        if chi.in_zlm(m)? {
            check_reading(chi, &tower, &torus_g, budget, &mut strict)?;
            check_reading(chi, &tower, &torus_g, budget, &mut class)?;
        } else if let Some((_, normalized)) = chi.in_zlm_class(m)? {
            check_reading(&normalized, &tower, &torus_g, budget, &mut class)?;
        }
    }
    Ok(ExactnessReport {
        characteristic_total: all.len(),
        torus_cocycles,
        res_in_ker,
        strict,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::is_coboundary;
    use crate::fixtures::{fx1, fx1_chi, fx_klein, heisenberg_center};
    use crate::group::NormalSubgroup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tower(fx: &crate::fixtures::Fixture) -> SectionTower {
        SectionTower::new(&fx.flow, &fx.l, &fx.m).unwrap()
    }

    #[test]
    fn fx1_hjr_value() {
        let fx = fx1();
        let chi = fx1_chi(&fx);
        let t = tower(&fx);
        let c = delta_hjr(&chi, t.s_dot()).unwrap();
        let nonzero: Vec<_> = c.entries().into_iter().filter(|e| e.1 != 0).collect();
        assert_eq!(nonzero, vec![(vec![1, 1, 1], 1)]);
        assert!(is_coboundary(&c).unwrap().is_none());
        let ob = delta_mod(&chi, &t).unwrap().obstruction;
        assert_eq!(ob.cocycle().c.get(&[1, 1, 1]), 1);
        assert!(ob.cocycle().d1.is_zero());
        assert!(ob.nu().iter().all(|&v| v == 0));
        assert!(!ob.is_trivial());
        let triv = ModularObstruction::trivial(t.s().clone(), t.flow_g().clone()).unwrap();
        assert!(obstruction_equal(&ob, &triv).unwrap().is_none());
        assert!(obstruction_equal(&ob, &ob).unwrap().is_some());
    }

    #[test]
    fn trivial_l_gives_zero() {
        let fx = fx1();
        let l = NormalSubgroup::trivial(fx.flow.group());
        let chi = CharacteristicCocycle::trivial(&fx.flow, &l).unwrap();
        let t = SectionTower::new(&fx.flow, &l, &l).unwrap();
        assert!(delta_hjr(&chi, t.s_dot()).unwrap().is_zero());
        let report = verify_exactness(&fx.flow, &l, &l, &Budget::default()).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn hjr_class_is_section_independent() {
        for fx in [fx1(), fx_klein()] {
            let t = tower(&fx);
            let all = enumerate_characteristic(&fx.flow, &fx.l, &Budget::default()).unwrap();
            let sections = CrossSection::all(t.s_dot().quotient());
            for chi in &all {
                let c0 = delta_hjr(chi, &sections[0]).unwrap();
                for s in &sections[1..] {
                    let c1 = delta_hjr(chi, s).unwrap();
                    assert!(is_coboundary(&c0.sub(&c1)).unwrap().is_some());
                }
            }
        }
    }

    #[test]
    fn exactness_on_fixtures() {
        for fx in [fx1(), fx_klein(), heisenberg_center(2)] {
            let r = verify_exactness(&fx.flow, &fx.l, &fx.m, &Budget::default()).unwrap();
            assert_eq!(r.strict.sublemma.checked, r.strict.members);
            assert!(r.torus_cocycles > 1);
            assert!(r.passed(), "{}: {r:?}", fx.name);
            assert!(r.strict.members > 0 && r.class.members >= r.strict.members);
        }
    }

    #[test]
    fn inverse_from_cobounding_on_fx1_roles() {
        let fx = fx1();
        let t = tower(&fx);
        let xi = Cochain::from_fn(t.flow_q(), 3, |x| usize::from(x == [1, 1, 1]));
        let pulled = xi.pullback(t.flow_g(), t.s().quotient().projection());
        let mu = is_coboundary(&pulled).unwrap().expect("inflation to Z/4 kills the generator");
        let (chi, f) = inverse_from_cobounding(&xi, &mu, t.s()).unwrap();
        assert_eq!(coboundary(&f).add(&delta_hjr(&chi, t.s()).unwrap()).values(), xi.values());
        let bad = Cochain::zero(t.flow_g(), 2);
        assert!(matches!(inverse_from_cobounding(&xi, &bad, t.s()), Err(Error::NotCobounding { .. })));
    }

    #[test]
    fn restricted_cobounding_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for fx in [fx1(), fx_klein()] {
            let t = tower(&fx);
            for _ in 0..10 {
                let m = StandardTwo::random(&fx.flow, &mut rng);
                let f = cobound_for_restricted(&m, &t).unwrap();
                assert!(f.failure(2).is_none());
            }
        }
    }

    #[test]
    fn partial_and_inf_on_fx1() {
        let fx = fx1();
        let t = tower(&fx);
        let ob = delta_mod(&fx1_chi(&fx), &t).unwrap().obstruction;
        let image = partial_map(&ob).unwrap();
        assert!(is_coboundary(&image.c_g).unwrap().is_some());
        let inf = inf_map(&ob, t.s_h().quotient()).unwrap();
        assert!(is_coboundary(&inf).unwrap().is_some());
    }

    #[test]
    fn section_change_round_trip_fx1() {
        let fx = fx1();
        let t = tower(&fx);
        let sections = CrossSection::all(t.s().quotient());
        assert_eq!(sections.iter().map(|s| s.sect(1)).collect::<Vec<_>>(), vec![1, 3]);
        let all = enumerate_characteristic(&fx.flow, &fx.l, &Budget::default()).unwrap();
        for chi in &all {
            let ob = delta_mod(chi, &t).unwrap().obstruction;
            for s2 in &sections {
                let moved = change_section(&ob, s2).unwrap();
                let back = change_section(&moved, ob.section()).unwrap();
                assert!(h3s_class_equal(ob.cocycle(), back.cocycle()).unwrap().is_some());
                let direct = delta_mod(chi, &t.with_q_section(s2).unwrap()).unwrap().obstruction;
                assert!(obstruction_equal(&direct, &moved).unwrap().is_some());
            }
        }
    }
}
