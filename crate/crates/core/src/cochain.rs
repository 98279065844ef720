//! Normalized cochains `C^n(G, A)` with twisted coefficients, the coboundary,
//! and cohomology computed by exact modular linear algebra.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{self, subquotient, LinearSystem};
use crate::module::{AbelianModule, FlowModule, ModuleAut};
use crate::Budget;

/// A normalized map `G^n -> A`, stored densely with the first argument most significant.
#[derive(Clone)]
pub struct Cochain {
    degree: usize,
    flow: Arc<FlowModule>,
    values: Vec<usize>,
}

impl PartialEq for Cochain {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.values == other.values && *self.flow == *other.flow
    }
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cochain(deg {}, {:?})", self.degree, self.entries())
    }
}

/// Position of `tuple` in the dense table.
fn dense_index(order: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &g| acc * order + g)
}

/// All tuples of length `n` over `0..order` with entries from `from..order`, in lexicographic order.
pub fn tuples(order: usize, n: usize, from: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = if from >= order && n > 0 {
        0
    } else {
        (order - from).pow(n as u32)
    };
    let mut cur = vec![from; n];
    (0..count).map(move |k| {
        if k > 0 {
            let mut i = n;
            loop {
                i -= 1;
                cur[i] += 1;
                if cur[i] < order {
                    break;
                }
                cur[i] = from;
            }
        }
        cur.clone()
    })
}

/// Normalized tuples (no identity entry) of length `n`.
pub fn normalized_tuples(order: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    tuples(order, n, 1)
}

impl Cochain {
    pub fn zero(flow: &Arc<FlowModule>, degree: usize) -> Self {
        let order = flow.group().order();
        Cochain {
            degree,
            flow: flow.clone(),
            values: vec![0; order.pow(degree as u32)],
        }
    }

    /// Builds a cochain from `f` on normalized tuples; identity arguments give 0.
    pub fn from_fn(flow: &Arc<FlowModule>, degree: usize, mut f: impl FnMut(&[usize]) -> usize) -> Self {
        let mut c = Cochain::zero(flow, degree);
        let order = flow.group().order();
        for t in normalized_tuples(order, degree) {
            let v = f(&t);
            debug_assert!(v < flow.module().size());
            c.values[dense_index(order, &t)] = v;
        }
        c
    }

    /// Builds a cochain from a dense table, rejecting non-normalized input.
    pub fn from_values(flow: &Arc<FlowModule>, degree: usize, values: Vec<usize>) -> Result<Self> {
        let order = flow.group().order();
        if values.len() != order.pow(degree as u32) {
            return Err(Error::InvalidModule(format!(
                "cochain table has {} entries, expected {}",
                values.len(),
                order.pow(degree as u32)
            )));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= flow.module().size()) {
            return Err(Error::InvalidModule(format!("value {v} is not a module element")));
        }
        let c = Cochain {
            degree,
            flow: flow.clone(),
            values,
        };
        if let Some(t) = tuples(order, degree, 0).find(|t| t.contains(&0) && c.get(t) != 0) {
            return Err(Error::InvalidModule(format!("cochain is not normalized at {t:?}")));
        }
        Ok(c)
    }

    /// Builds a cochain from sparse entries; unspecified entries are 0.
    pub fn from_entries(flow: &Arc<FlowModule>, degree: usize, entries: &[(Vec<usize>, usize)]) -> Result<Self> {
        let order = flow.group().order();
        let mut values = vec![0; order.pow(degree as u32)];
        for (t, v) in entries {
            if t.len() != degree || t.iter().any(|&g| g >= order) {
                return Err(Error::InvalidModule(format!("bad cochain argument {t:?}")));
            }
            values[dense_index(order, t)] = *v;
        }
        Self::from_values(flow, degree, values)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn flow(&self) -> &Arc<FlowModule> {
        &self.flow
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.flow.group()
    }

    pub fn module(&self) -> &AbelianModule {
        self.flow.module()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    #[inline]
    pub fn get(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.degree);
        self.values[dense_index(self.group().order(), tuple)]
    }

    /// Sets a value at a normalized tuple.
    pub fn set(&mut self, tuple: &[usize], value: usize) {
        assert!(!tuple.contains(&0) || value == 0, "cochains are normalized");
        let i = dense_index(self.group().order(), tuple);
        self.values[i] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// Nonzero entries in lexicographic order.
    pub fn entries(&self) -> Vec<(Vec<usize>, usize)> {
        let order = self.group().order();
        normalized_tuples(order, self.degree)
            .filter_map(|t| {
                let v = self.get(&t);
                (v != 0).then_some((t, v))
            })
            .collect()
    }

    fn zip_with(&self, other: &Cochain, f: impl Fn(usize, usize) -> usize) -> Cochain {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        assert_eq!(self.values.len(), other.values.len(), "group mismatch");
        Cochain {
            degree: self.degree,
            flow: self.flow.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        let m = self.module();
        self.zip_with(other, |a, b| m.add(a, b))
    }

    pub fn sub(&self, other: &Cochain) -> Cochain {
        let m = self.module();
        self.zip_with(other, |a, b| m.sub(a, b))
    }

    pub fn neg(&self) -> Cochain {
        self.map(|a| self.module().neg(a))
    }

    /// Applies a value map that fixes 0, keeping the same coefficients.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> Cochain {
        Cochain {
            degree: self.degree,
            flow: self.flow.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Re-reads the values in other coefficients over the same group through `f` (which must fix 0).
    pub fn map_into(&self, flow: &Arc<FlowModule>, f: impl Fn(usize) -> usize) -> Cochain {
        assert_eq!(flow.group().order(), self.group().order());
        Cochain {
            degree: self.degree,
            flow: flow.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `c(proj(g_1), ..., proj(g_n))` over the larger group of `flow`.
    pub fn pullback(&self, flow: &Arc<FlowModule>, proj: &[usize]) -> Cochain {
        assert_eq!(flow.module(), self.module());
        Cochain::from_fn(flow, self.degree, |t| {
            let img: Vec<usize> = t.iter().map(|&g| proj[g]).collect();
            self.get(&img)
        })
    }

    /// `c(emb(g_1), ..., emb(g_n))` over a smaller group embedded by `emb`.
    pub fn restrict(&self, flow: &Arc<FlowModule>, emb: &[usize]) -> Cochain {
        self.pullback(flow, emb)
    }

    /// Component vector over normalized tuples, used as unknowns in linear systems.
    pub fn to_vars(&self) -> Vec<u64> {
        let m = self.module();
        normalized_tuples(self.group().order(), self.degree)
            .flat_map(|t| m.decode(self.get(&t)))
            .collect()
    }

    pub fn from_vars(flow: &Arc<FlowModule>, degree: usize, x: &[u64]) -> Cochain {
        let m = flow.module();
        let r = m.rank();
        let mut k = 0;
        Cochain::from_fn(flow, degree, |_| {
            let v = m.encode(&x[k * r..(k + 1) * r]);
            k += 1;
            v
        })
    }
}

/// Index of a normalized tuple among normalized tuples of its length.
pub fn normalized_index(order: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &g| acc * (order - 1) + (g - 1))
}

/// Block of module-valued unknowns indexed by normalized tuples of a fixed length.
#[derive(Clone, Copy, Debug)]
pub struct CochainVars {
    pub start: usize,
    pub degree: usize,
    pub order: usize,
    pub rank: usize,
}

impl CochainVars {
    pub fn add(sys: &mut LinearSystem, module: &AbelianModule, order: usize, degree: usize) -> Self {
        let count = (order - 1).pow(degree as u32);
        let start = sys.num_vars();
        for _ in 0..count {
            sys.add_vars(module.moduli());
        }
        CochainVars {
            start,
            degree,
            order,
            rank: module.rank(),
        }
    }

    /// First unknown of the block for `tuple`, or `None` when the tuple is degenerate.
    pub fn at(&self, tuple: &[usize]) -> Option<usize> {
        if tuple.contains(&0) {
            return None;
        }
        Some(self.start + normalized_index(self.order, tuple) * self.rank)
    }

    pub fn len(&self) -> usize {
        (self.order - 1).pow(self.degree as u32) * self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn read(&self, flow: &Arc<FlowModule>, x: &[u64]) -> Cochain {
        Cochain::from_vars(flow, self.degree, &x[self.start..self.start + self.len()])
    }
}

/// One module-valued equation, i.e. one row per component.
pub struct Equation {
    rows: Vec<Vec<(usize, i64)>>,
}

impl Equation {
    pub fn new(module: &AbelianModule) -> Self {
        Equation {
            rows: vec![Vec::new(); module.rank()],
        }
    }

    /// Adds `sign * phi(x)` where `x` is the block starting at `start`.
    pub fn aut(&mut self, phi: &ModuleAut, sign: i64, start: usize) {
        for (i, row) in self.rows.iter_mut().enumerate() {
            for (k, &c) in phi.matrix()[i].iter().enumerate() {
                if c != 0 {
                    row.push((start + k, sign * c));
                }
            }
        }
    }

    /// Adds `sign * x` where `x` is the block starting at `start`.
    pub fn ident(&mut self, sign: i64, start: usize) {
        for (i, row) in self.rows.iter_mut().enumerate() {
            row.push((start + i, sign));
        }
    }

    /// Adds `sign * t * elem` for a scalar unknown `t`.
    pub fn scalar(&mut self, module: &AbelianModule, var: usize, sign: i64, elem: usize) {
        for (i, row) in self.rows.iter_mut().enumerate() {
            let c = module.component(elem, i) as i64;
            if c != 0 {
                row.push((var, sign * c));
            }
        }
    }

    /// Pushes `equation = rhs`.
    pub fn push(self, sys: &mut LinearSystem, module: &AbelianModule, rhs: usize) {
        for (i, row) in self.rows.into_iter().enumerate() {
            sys.add_row(module.moduli()[i], &row, module.component(rhs, i) as i64);
        }
    }
}

/// Terms of `(d c)(g_0, ..., g_n)`: (acting element, sign, argument tuple).
pub fn coboundary_terms(group: &FiniteGroup, tuple: &[usize]) -> Vec<(usize, i64, Vec<usize>)> {
    let n = tuple.len() - 1;
    let mut out = Vec::with_capacity(n + 2);
    out.push((tuple[0], 1, tuple[1..].to_vec()));
    for i in 1..=n {
        let mut t = Vec::with_capacity(n);
        t.extend_from_slice(&tuple[..i - 1]);
        t.push(group.mul(tuple[i - 1], tuple[i]));
        t.extend_from_slice(&tuple[i + 1..]);
        out.push((0, if i % 2 == 0 { 1 } else { -1 }, t));
    }
    out.push((0, if (n + 1).is_multiple_of(2) { 1 } else { -1 }, tuple[..n].to_vec()));
    out
}

/// Adds the unknown-side of `(d x)(tuple)` to `eq`, with `x` in block `vars`.
pub fn push_coboundary_terms(eq: &mut Equation, flow: &FlowModule, vars: &CochainVars, tuple: &[usize], sign: i64) {
    for (act, s, t) in coboundary_terms(flow.group(), tuple) {
        if let Some(start) = vars.at(&t) {
            if act == 0 {
                eq.ident(sign * s, start);
            } else {
                eq.aut(flow.action().aut(act), sign * s, start);
            }
        }
    }
}

pub fn coboundary(c: &Cochain) -> Cochain {
    let flow = c.flow();
    let m = flow.module();
    let g = flow.group();
    Cochain::from_fn(flow, c.degree + 1, |t| {
        let mut acc = 0;
        for (act, s, sub) in coboundary_terms(g, t) {
            let mut v = c.get(&sub);
            if act != 0 {
                v = flow.alpha(act, v);
            }
            acc = if s > 0 { m.add(acc, v) } else { m.sub(acc, v) };
        }
        acc
    })
}

/// First normalized tuple at which `d c` does not vanish.
pub fn cocycle_failure(c: &Cochain) -> Option<Vec<usize>> {
    let flow = c.flow();
    let m = flow.module();
    let g = flow.group();
    normalized_tuples(g.order(), c.degree + 1).find(|t| {
        let mut acc = 0;
        for (act, s, sub) in coboundary_terms(g, t) {
            let mut v = c.get(&sub);
            if act != 0 {
                v = flow.alpha(act, v);
            }
            acc = if s > 0 { m.add(acc, v) } else { m.sub(acc, v) };
        }
        acc != 0
    })
}

pub fn is_cocycle(c: &Cochain) -> bool {
    cocycle_failure(c).is_none()
}

fn check_system_size(budget: &Budget, flow: &FlowModule, degree: usize) -> Result<()> {
    let q = (flow.group().order().saturating_sub(1)) as u128;
    let r = flow.module().rank() as u128;
    let cells = q.pow(degree as u32) * r * q.pow(degree as u32 + 1) * r;
    budget.check_cells("linear system", cells)
}

/// Some `b` with `d b = z`, or `None` when `z` is not a coboundary.
pub fn is_coboundary(z: &Cochain) -> Result<Option<Cochain>> {
    is_coboundary_with(z, &Budget::from_env())
}

pub fn is_coboundary_with(z: &Cochain, budget: &Budget) -> Result<Option<Cochain>> {
    if z.degree == 0 {
        return Ok(z.is_zero().then(|| z.clone()));
    }
    if let Some(t) = cocycle_failure(z) {
        return Err(Error::NotACocycle { tuple: t });
    }
    let flow = z.flow();
    check_system_size(budget, flow, z.degree - 1)?;
    let m = flow.module();
    let order = flow.group().order();
    let mut sys = LinearSystem::new();
    let vars = CochainVars::add(&mut sys, m, order, z.degree - 1);
    for t in normalized_tuples(order, z.degree) {
        let mut eq = Equation::new(m);
        push_coboundary_terms(&mut eq, flow, &vars, &t, 1);
        eq.push(&mut sys, m, z.get(&t));
    }
    Ok(sys.solve().map(|x| {
        let b = vars.read(flow, &x);
        debug_assert_eq!(coboundary(&b), *z);
        b
    }))
}

/// `H^n` as invariant factors together with representative cocycles.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyGroup {
    pub degree: usize,
    pub invariant_factors: Vec<u64>,
    pub basis: Vec<Cochain>,
}

impl CohomologyGroup {
    pub fn order(&self) -> u128 {
        self.invariant_factors.iter().map(|&d| d as u128).product()
    }

    pub fn describe(&self) -> String {
        if self.invariant_factors.is_empty() {
            "0".to_string()
        } else {
            self.invariant_factors
                .iter()
                .map(|d| format!("Z/{d}"))
                .collect::<Vec<_>>()
                .join(" x ")
        }
    }
}

/// Linear system whose solutions are the normalized `n`-cocycles.
pub fn cocycle_system(flow: &FlowModule, degree: usize) -> (LinearSystem, CochainVars) {
    let m = flow.module();
    let order = flow.group().order();
    let mut sys = LinearSystem::new();
    let vars = CochainVars::add(&mut sys, m, order, degree);
    for t in normalized_tuples(order, degree + 1) {
        let mut eq = Equation::new(m);
        push_coboundary_terms(&mut eq, flow, &vars, &t, 1);
        eq.push(&mut sys, m, 0);
    }
    (sys, vars)
}

pub fn cohomology(flow: &Arc<FlowModule>, degree: usize, budget: &Budget) -> Result<CohomologyGroup> {
    if degree > 3 {
        return Err(Error::BudgetExceeded {
            what: "cohomology degree".into(),
            needed: degree as u128,
            limit: 3,
        });
    }
    check_system_size(budget, flow, degree)?;
    let m = flow.module();
    let order = flow.group().order();
    let (sys, _) = cocycle_system(flow, degree);
    let mut image = Vec::new();
    if degree > 0 {
        let r = m.rank();
        for t in normalized_tuples(order, degree - 1) {
            for i in 0..r {
                let mut unit = vec![0u64; r];
                unit[i] = 1;
                let mut b = Cochain::zero(flow, degree - 1);
                b.values[dense_index(order, &t)] = m.encode(&unit);
                image.push(coboundary(&b).to_vars());
            }
        }
    }
    let sq = subquotient(&sys, &image);
    let basis = sq
        .generators
        .iter()
        .map(|x| Cochain::from_vars(flow, degree, x))
        .collect();
    Ok(CohomologyGroup {
        degree,
        invariant_factors: sq.invariant_factors,
        basis,
    })
}

/// All normalized `n`-cocycles as combinations of a basis of the cocycle group.
pub fn cocycles(flow: &Arc<FlowModule>, degree: usize, budget: &Budget) -> Result<Vec<Cochain>> {
    check_system_size(budget, flow, degree)?;
    let (sys, vars) = cocycle_system(flow, degree);
    let sq = subquotient(&sys, &[]);
    let moduli = sys.var_moduli().to_vec();
    Ok(linalg::combos(&sq.invariant_factors, budget, "cocycle group")?
        .into_iter()
        .map(|k| vars.read(flow, &linalg::span(&sq.generators, &k, &moduli)))
        .collect())
}

/// All normalized `n`-cocycles by brute force over all cochains, in lexicographic
/// order of their value tables. Serves as an oracle for [`cocycles`].
pub fn enumerate_cocycles(flow: &Arc<FlowModule>, degree: usize, budget: &Budget) -> Result<CocycleIter> {
    let order = flow.group().order();
    let cells = (order - 1).pow(degree as u32);
    let total = (flow.module().size() as u128)
        .checked_pow(cells as u32)
        .unwrap_or(u128::MAX);
    budget.check("cocycle enumeration", total)?;
    Ok(CocycleIter {
        flow: flow.clone(),
        degree,
        tuples: normalized_tuples(order, degree).collect(),
        digits: vec![0; cells],
        done: false,
    })
}

pub struct CocycleIter {
    flow: Arc<FlowModule>,
    degree: usize,
    tuples: Vec<Vec<usize>>,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for CocycleIter {
    type Item = Cochain;

    fn next(&mut self) -> Option<Cochain> {
        let size = self.flow.module().size();
        while !self.done {
            let mut c = Cochain::zero(&self.flow, self.degree);
            for (t, &d) in self.tuples.iter().zip(&self.digits) {
                c.set(t, d);
            }
            // advance odometer, last tuple fastest
            let mut i = self.digits.len();
            loop {
                if i == 0 {
                    self.done = true;
                    break;
                }
                i -= 1;
                self.digits[i] += 1;
                if self.digits[i] < size {
                    break;
                }
                self.digits[i] = 0;
            }
            if is_cocycle(&c) {
                return Some(c);
            }
        }
        None
    }
}

/// `(|Z^n|, |B^n|)` counted by enumerating every normalized cochain.
/// Oracle for the order of [`cohomology`].
pub fn brute_force_counts(flow: &Arc<FlowModule>, degree: usize, budget: &Budget) -> Result<(u128, u128)> {
    let z = enumerate_cocycles(flow, degree, budget)?.count() as u128;
    if degree == 0 {
        return Ok((z, 1));
    }
    let mut images = std::collections::BTreeSet::new();
    for c in enumerate_cochains(flow, degree - 1, budget)? {
        images.insert(coboundary(&c).values);
    }
    Ok((z, images.len() as u128))
}

/// All normalized `n`-cochains (no cocycle filter), same order as [`enumerate_cocycles`].
pub fn enumerate_cochains(flow: &Arc<FlowModule>, degree: usize, budget: &Budget) -> Result<Vec<Cochain>> {
    let order = flow.group().order();
    let tuples: Vec<Vec<usize>> = normalized_tuples(order, degree).collect();
    let size = flow.module().size();
    let total = (size as u128).checked_pow(tuples.len() as u32).unwrap_or(u128::MAX);
    budget.check("cochain enumeration", total)?;
    let mut out = Vec::with_capacity(total as usize);
    let mut digits = vec![0usize; tuples.len()];
    loop {
        let mut c = Cochain::zero(flow, degree);
        for (t, &d) in tuples.iter().zip(&digits) {
            c.set(t, d);
        }
        out.push(c);
        let mut i = digits.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < size {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::FlowData;

    fn trivial(g: FiniteGroup, n: u64) -> Arc<FlowModule> {
        Arc::new(FlowModule::trivial_action(FlowData::trivial_cyclic(n), &Arc::new(g)).unwrap())
    }

    #[test]
    fn brute_force_matches_snf() {
        let b = Budget::default();
        for (g, n) in [(FiniteGroup::cyclic(2), 2), (FiniteGroup::cyclic(3), 3), (FiniteGroup::cyclic(4), 2)] {
            let f = trivial(g, n);
            for d in 1..=2 {
                let (z, bd) = brute_force_counts(&f, d, &b).unwrap();
                assert_eq!(z / bd, cohomology(&f, d, &b).unwrap().order());
            }
        }
    }

    #[test]
    fn tuple_orders() {
        let t: Vec<_> = normalized_tuples(3, 2).collect();
        assert_eq!(t, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert_eq!(tuples(2, 0, 0).count(), 1);
        assert_eq!(normalized_tuples(1, 2).count(), 0);
        assert_eq!(normalized_tuples(1, 0).count(), 1);
    }

    #[test]
    fn coboundary_examples() {
        let f = trivial(FiniteGroup::cyclic(2), 2);
        let b = Cochain::from_entries(&f, 1, &[(vec![1], 1)]).unwrap();
        assert!(coboundary(&b).is_zero());
        let c = Cochain::from_entries(&f, 2, &[(vec![1, 1], 1)]).unwrap();
        assert!(is_cocycle(&c));
        assert!(is_coboundary(&c).unwrap().is_none());
        let c3 = Cochain::from_entries(&f, 3, &[(vec![1, 1, 1], 1)]).unwrap();
        assert!(is_cocycle(&c3));
        assert!(is_coboundary(&c3).unwrap().is_none());
        assert!(coboundary(&Cochain::zero(&f, 2)).is_zero());
    }

    #[test]
    fn non_normalized_rejected() {
        let f = trivial(FiniteGroup::cyclic(2), 2);
        assert!(Cochain::from_entries(&f, 1, &[(vec![0], 1)]).is_err());
    }

    #[test]
    fn cohomology_examples() {
        let b = Budget::default();
        let f = trivial(FiniteGroup::cyclic(2), 2);
        assert_eq!(cohomology(&f, 2, &b).unwrap().invariant_factors, vec![2]);
        assert_eq!(cohomology(&f, 3, &b).unwrap().invariant_factors, vec![2]);
        let f4 = trivial(FiniteGroup::cyclic(4), 2);
        assert_eq!(cohomology(&f4, 1, &b).unwrap().invariant_factors, vec![2]);
        assert_eq!(enumerate_cocycles(&f, 2, &b).unwrap().count(), 2);
        // one free argument (1,1,1), both values are cocycles
        assert_eq!(enumerate_cocycles(&f, 3, &b).unwrap().count(), 2);
        assert_eq!(cocycles(&f, 3, &b).unwrap().len(), 2);
        let f3 = trivial(FiniteGroup::cyclic(2), 3);
        assert_eq!(enumerate_cocycles(&f3, 1, &b).unwrap().count(), 1);
    }

    #[test]
    fn basis_elements_are_cocycles() {
        let b = Budget::default();
        let f = trivial(FiniteGroup::heisenberg(2), 2);
        let h = cohomology(&f, 2, &b).unwrap();
        assert!(h.basis.iter().all(is_cocycle));
        for (c, &d) in h.basis.iter().zip(&h.invariant_factors) {
            // each generator has exactly the stated order modulo coboundaries
            let mut acc = c.clone();
            for k in 1..d {
                assert!(is_coboundary(&acc).unwrap().is_none(), "order below {d} at {k}");
                acc = acc.add(c);
            }
            assert!(is_coboundary(&acc).unwrap().is_some());
        }
    }

    #[test]
    fn twisted_h1() {
        // Z/2 acting on Z/3 by inversion: H^1 = 0, H^2 = 0.
        let g = Arc::new(FiniteGroup::cyclic(2));
        let m = AbelianModule::cyclic(3);
        let action = crate::module::GroupAction::by_sign(&g, &m, &[1]).unwrap();
        let data = FlowData::new(m.clone(), ModuleAut::identity(&m), 0);
        let f = Arc::new(FlowModule::new(data, action).unwrap());
        let b = Budget::default();
        assert_eq!(cohomology(&f, 1, &b).unwrap().order(), 1);
        assert_eq!(cohomology(&f, 2, &b).unwrap().order(), 1);
        assert_eq!(cohomology(&f, 0, &b).unwrap().order(), 1);
    }
}
