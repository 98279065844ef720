//! Finite abelian coefficient modules with a group action and a flow
//! automorphism `theta`, plus `H^1_theta = A / Im(theta - 1)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{CrossSection, FiniteGroup, NormalSubgroup};
use crate::linalg::{subquotient, LinearSystem};
use crate::Budget;

/// `Z/n_1 x ... x Z/n_r`, elements encoded as mixed-radix indices with the
/// first component most significant (so index order is lexicographic order).
#[derive(Clone, PartialEq, Eq)]
pub struct AbelianModule {
    moduli: Vec<u64>,
    weights: Vec<usize>,
    size: usize,
}

impl fmt::Debug for AbelianModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AbelianModule({})", self.label())
    }
}

const MAX_MODULE_SIZE: usize = 1 << 20;

impl AbelianModule {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(Error::InvalidModule("moduli must be positive".into()));
        }
        let mut size = 1usize;
        for &m in &moduli {
            size = size
                .checked_mul(m as usize)
                .filter(|&s| s <= MAX_MODULE_SIZE)
                .ok_or_else(|| Error::InvalidModule("module too large".into()))?;
        }
        let mut weights = vec![1usize; moduli.len()];
        for i in (0..moduli.len().saturating_sub(1)).rev() {
            weights[i] = weights[i + 1] * moduli[i + 1] as usize;
        }
        Ok(AbelianModule {
            moduli,
            weights,
            size,
        })
    }

    pub fn cyclic(n: u64) -> Self {
        Self::new(vec![n]).expect("cyclic module")
    }

    /// Parses `Z2`, `Z/4`, `Z2xZ4` or `Z/2 x Z/2`.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let moduli = text
            .split(['x', '*'])
            .map(|p| {
                let p = p.trim();
                let digits = p
                    .strip_prefix("Z/")
                    .or_else(|| p.strip_prefix('Z'))
                    .ok_or_else(|| format!("bad module component '{p}'"))?;
                digits
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| format!("bad modulus in '{p}'"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(moduli).map_err(|e| e.to_string())
    }

    pub fn label(&self) -> String {
        self.moduli
            .iter()
            .map(|m| format!("Z/{m}"))
            .collect::<Vec<_>>()
            .join(" x ")
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Least common multiple of the moduli.
    pub fn exponent(&self) -> u64 {
        self.moduli.iter().fold(1, |a, &m| crate::linalg::lcm(a, m))
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    #[inline]
    pub fn component(&self, a: usize, i: usize) -> u64 {
        ((a / self.weights[i]) as u64) % self.moduli[i]
    }

    pub fn decode(&self, a: usize) -> Vec<u64> {
        (0..self.rank()).map(|i| self.component(a, i)).collect()
    }

    pub fn encode(&self, comps: &[u64]) -> usize {
        comps
            .iter()
            .zip(&self.moduli)
            .zip(&self.weights)
            .map(|((&c, &m), &w)| (c % m) as usize * w)
            .sum()
    }

    pub fn encode_i64(&self, comps: &[i64]) -> usize {
        comps
            .iter()
            .zip(&self.moduli)
            .zip(&self.weights)
            .map(|((&c, &m), &w)| c.rem_euclid(m as i64) as usize * w)
            .sum()
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        if self.rank() == 1 {
            return (a + b) % self.size;
        }
        let mut out = 0;
        for i in 0..self.rank() {
            let m = self.moduli[i];
            out += (((self.component(a, i) + self.component(b, i)) % m) as usize) * self.weights[i];
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        if self.rank() == 1 {
            return (self.size - a) % self.size;
        }
        let mut out = 0;
        for i in 0..self.rank() {
            let m = self.moduli[i];
            out += (((m - self.component(a, i)) % m) as usize) * self.weights[i];
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn scale(&self, k: i64, a: usize) -> usize {
        let comps: Vec<i64> = self
            .decode(a)
            .iter()
            .map(|&c| (c as i64).wrapping_mul(k.rem_euclid(self.exponent() as i64)))
            .collect();
        self.encode_i64(&comps)
    }

    pub fn sum(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items.into_iter().fold(0, |acc, x| self.add(acc, x))
    }

    pub fn order_of(&self, a: usize) -> u64 {
        (0..self.rank())
            .map(|i| {
                let c = self.component(a, i);
                self.moduli[i] / crate::linalg::gcd(c, self.moduli[i])
            })
            .fold(1, crate::linalg::lcm)
    }
}

/// An automorphism of an [`AbelianModule`] given by an integer matrix acting on
/// component vectors.
#[derive(Clone, PartialEq, Eq)]
pub struct ModuleAut {
    matrix: Vec<Vec<i64>>,
    perm: Vec<usize>,
}

impl fmt::Debug for ModuleAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModuleAut({:?})", self.matrix)
    }
}

impl ModuleAut {
    pub fn new(module: &AbelianModule, matrix: Vec<Vec<i64>>) -> Result<Self> {
        let r = module.rank();
        if matrix.len() != r || matrix.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidModule(format!("matrix must be {r}x{r}")));
        }
        let n = module.moduli();
        for i in 0..r {
            for j in 0..r {
                // entry (i, j) sends Z/n_j into Z/n_i, so it must kill n_j.
                let need = n[i] / crate::linalg::gcd(n[i], n[j]);
                if matrix[i][j].rem_euclid(need as i64) != 0 {
                    return Err(Error::InvalidModule(format!(
                        "entry ({i},{j}) = {} is not a multiple of {need}",
                        matrix[i][j]
                    )));
                }
            }
        }
        let mut sys = LinearSystem::new();
        let start = sys.add_vars(n);
        for i in 0..r {
            let coeffs: Vec<(usize, i64)> = (0..r).map(|j| (start + j, matrix[i][j])).collect();
            sys.add_row(n[i], &coeffs, 0);
        }
        if sys.kernel_order() != 1 {
            return Err(Error::InvalidModule("matrix is not injective".into()));
        }
        let perm = module
            .elements()
            .map(|a| {
                let x = module.decode(a);
                let y: Vec<i64> = (0..r)
                    .map(|i| (0..r).map(|j| matrix[i][j] * x[j] as i64).sum())
                    .collect();
                module.encode_i64(&y)
            })
            .collect();
        Ok(ModuleAut { matrix, perm })
    }

    pub fn identity(module: &AbelianModule) -> Self {
        let r = module.rank();
        let matrix = (0..r)
            .map(|i| (0..r).map(|j| i64::from(i == j)).collect())
            .collect();
        ModuleAut {
            matrix,
            perm: module.elements().collect(),
        }
    }

    pub fn negation(module: &AbelianModule) -> Self {
        let r = module.rank();
        let matrix = (0..r)
            .map(|i| (0..r).map(|j| if i == j { -1 } else { 0 }).collect())
            .collect();
        ModuleAut {
            matrix,
            perm: module.elements().map(|a| module.neg(a)).collect(),
        }
    }

    #[inline]
    pub fn apply(&self, a: usize) -> usize {
        self.perm[a]
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &ModuleAut) -> ModuleAut {
        let r = self.matrix.len();
        let matrix = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| (0..r).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum())
                    .collect()
            })
            .collect();
        ModuleAut {
            matrix,
            perm: other.perm.iter().map(|&a| self.perm[a]).collect(),
        }
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.perm.len()];
        for (a, &b) in self.perm.iter().enumerate() {
            inv[b] = a;
        }
        inv
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }
}

/// A left action `g -> alpha_g` of a finite group on a module.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAction {
    group: Arc<FiniteGroup>,
    auts: Vec<ModuleAut>,
}

impl GroupAction {
    pub fn new(group: &Arc<FiniteGroup>, auts: Vec<ModuleAut>) -> Result<Self> {
        if auts.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "{} automorphisms for a group of order {}",
                auts.len(),
                group.order()
            )));
        }
        if !auts[0].is_identity() {
            return Err(Error::InvalidAction("identity acts nontrivially".into()));
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                if (0..auts[h].perm.len()).any(|a| auts[g].apply(auts[h].apply(a)) != auts[gh].apply(a)) {
                    return Err(Error::InvalidAction(format!(
                        "alpha_{g} alpha_{h} != alpha_{gh}"
                    )));
                }
            }
        }
        Ok(GroupAction {
            group: group.clone(),
            auts,
        })
    }

    pub fn trivial(group: &Arc<FiniteGroup>, module: &AbelianModule) -> Self {
        GroupAction {
            group: group.clone(),
            auts: vec![ModuleAut::identity(module); group.order()],
        }
    }

    /// The action in which the elements of `negated` act by `-1` and the rest trivially.
    pub fn by_sign(group: &Arc<FiniteGroup>, module: &AbelianModule, negated: &[usize]) -> Result<Self> {
        let auts = group
            .elements()
            .map(|g| {
                if negated.contains(&g) {
                    ModuleAut::negation(module)
                } else {
                    ModuleAut::identity(module)
                }
            })
            .collect();
        Self::new(group, auts)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    #[inline]
    pub fn aut(&self, g: usize) -> &ModuleAut {
        &self.auts[g]
    }

    /// The action of `parent` through a homomorphism `proj` onto this group.
    pub fn pullback(&self, parent: &Arc<FiniteGroup>, proj: &[usize]) -> GroupAction {
        GroupAction {
            group: parent.clone(),
            auts: proj.iter().map(|&p| self.auts[p].clone()).collect(),
        }
    }

    /// The induced action of `s.quotient().quot`, defined when the kernel acts trivially.
    pub fn descend(&self, s: &CrossSection) -> Result<GroupAction> {
        let q = s.quotient();
        if let Some(&m) = q.kernel().members().iter().find(|&&m| !self.auts[m].is_identity()) {
            return Err(Error::InvalidAction(format!("kernel element {m} acts nontrivially")));
        }
        Ok(GroupAction {
            group: q.quot().clone(),
            auts: q.quot().elements().map(|p| self.auts[s.sect(p)].clone()).collect(),
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.auts.iter().all(|a| a.is_identity())
    }
}

/// A class in `H^1_theta`, carried by its canonical representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowCocycleClass {
    pub representative: usize,
    /// `v` with `theta(v) - v = a` when the class is zero.
    pub witness: Option<usize>,
}

impl FlowCocycleClass {
    pub fn is_coboundary(&self) -> bool {
        self.witness.is_some()
    }
}

/// Invariant factors of `H^1_theta` together with all canonical representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H1Structure {
    pub invariant_factors: Vec<u64>,
    pub representatives: Vec<usize>,
}

/// The coefficient data shared by a module, a flow automorphism and a torus,
/// independent of any group action.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowData {
    pub module: AbelianModule,
    pub theta: ModuleAut,
    pub torus_generator: usize,
}

impl FlowData {
    pub fn new(module: AbelianModule, theta: ModuleAut, torus_generator: usize) -> Self {
        FlowData {
            module,
            theta,
            torus_generator,
        }
    }

    /// `Z/n` with `theta = id`, torus the whole module.
    pub fn trivial_cyclic(n: u64) -> Self {
        let module = AbelianModule::cyclic(n);
        let theta = ModuleAut::identity(&module);
        FlowData::new(module, theta, if n > 1 { 1 } else { 0 })
    }
}

/// A module with group action, commuting flow automorphism and designated torus.
#[derive(Clone, Debug)]
pub struct FlowModule {
    module: AbelianModule,
    theta: ModuleAut,
    action: GroupAction,
    torus_generator: usize,
    torus: Vec<usize>,
    torus_log: Vec<Option<u64>>,
    // theta - 1 data
    canon: Vec<usize>,
    preimage: Vec<Option<usize>>,
}

impl PartialEq for FlowModule {
    fn eq(&self, other: &Self) -> bool {
        self.module == other.module
            && self.theta == other.theta
            && self.torus_generator == other.torus_generator
            && self.action == other.action
    }
}

impl FlowModule {
    pub fn new(data: FlowData, action: GroupAction) -> Result<Self> {
        let FlowData {
            module,
            theta,
            torus_generator,
        } = data;
        if theta.perm.len() != module.size() {
            return Err(Error::InvalidFlow("theta acts on a different module".into()));
        }
        for g in action.group.elements() {
            let a = action.aut(g);
            if a.perm.len() != module.size() {
                return Err(Error::InvalidFlow("action on a different module".into()));
            }
            if module.elements().any(|x| theta.apply(a.apply(x)) != a.apply(theta.apply(x))) {
                return Err(Error::InvalidFlow(format!("theta does not commute with alpha_{g}")));
            }
        }
        if torus_generator >= module.size() {
            return Err(Error::InvalidFlow("torus generator out of range".into()));
        }
        let mut torus = vec![0usize];
        let mut x = torus_generator;
        while x != 0 {
            torus.push(x);
            x = module.add(x, torus_generator);
        }
        let mut torus_log = vec![None; module.size()];
        for (k, &t) in torus.iter().enumerate() {
            torus_log[t] = Some(k as u64);
        }
        torus.sort_unstable();
        for &t in &torus {
            if theta.apply(t) != t {
                return Err(Error::InvalidFlow(format!("torus element {t} is moved by theta")));
            }
            for g in action.group.elements() {
                if action.aut(g).apply(t) != t {
                    return Err(Error::InvalidFlow(format!("torus element {t} is moved by alpha_{g}")));
                }
            }
        }
        // theta - 1: image membership, lexicographically minimal preimages and
        // lexicographically minimal coset representatives.
        let mut preimage = vec![None; module.size()];
        for v in module.elements() {
            let img = module.sub(theta.apply(v), v);
            if preimage[img].is_none() {
                preimage[img] = Some(v);
            }
        }
        let image: Vec<usize> = module.elements().filter(|&a| preimage[a].is_some()).collect();
        let mut canon = vec![usize::MAX; module.size()];
        for a in module.elements() {
            if canon[a] != usize::MAX {
                continue;
            }
            // `a` is the smallest element of its coset when first reached.
            for &i in &image {
                canon[module.add(a, i)] = a;
            }
        }
        Ok(FlowModule {
            module,
            theta,
            action,
            torus_generator,
            torus,
            torus_log,
            canon,
            preimage,
        })
    }

    /// Same coefficients and flow, acted on through another action.
    pub fn with_action(&self, action: GroupAction) -> Result<Self> {
        Self::new(self.data(), action)
    }

    /// Trivially acted module over `group`.
    pub fn trivial_action(data: FlowData, group: &Arc<FiniteGroup>) -> Result<Self> {
        let action = GroupAction::trivial(group, &data.module);
        Self::new(data, action)
    }

    pub fn data(&self) -> FlowData {
        FlowData {
            module: self.module.clone(),
            theta: self.theta.clone(),
            torus_generator: self.torus_generator,
        }
    }

    pub fn module(&self) -> &AbelianModule {
        &self.module
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.action.group
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn theta_aut(&self) -> &ModuleAut {
        &self.theta
    }

    #[inline]
    pub fn theta(&self, a: usize) -> usize {
        self.theta.apply(a)
    }

    #[inline]
    pub fn alpha(&self, g: usize, a: usize) -> usize {
        self.action.aut(g).apply(a)
    }

    /// `theta^s(a)` for any integer `s`.
    pub fn theta_pow(&self, s: i64, a: usize) -> usize {
        let mut x = a;
        if s >= 0 {
            for _ in 0..s {
                x = self.theta.apply(x);
            }
        } else {
            let inv = self.theta.inverse();
            for _ in 0..(-s) {
                x = inv[x];
            }
        }
        x
    }

    /// Value at `s` of the flow 1-cocycle with value `a` at 1: `sum_{0<=j<s} theta^j(a)`,
    /// and `-sum_{s<=j<0} theta^j(a)` for negative `s`.
    pub fn flow_expand(&self, s: i64, a: usize) -> usize {
        let m = &self.module;
        if s >= 0 {
            let mut acc = 0;
            let mut x = a;
            for _ in 0..s {
                acc = m.add(acc, x);
                x = self.theta.apply(x);
            }
            acc
        } else {
            let inv = self.theta.inverse();
            let mut acc = 0;
            let mut x = a;
            for _ in 0..(-s) {
                x = inv[x];
                acc = m.add(acc, x);
            }
            m.neg(acc)
        }
    }

    pub fn torus(&self) -> &[usize] {
        &self.torus
    }

    pub fn torus_generator(&self) -> usize {
        self.torus_generator
    }

    pub fn torus_order(&self) -> usize {
        self.torus.len()
    }

    #[inline]
    pub fn in_torus(&self, a: usize) -> bool {
        self.torus_log[a].is_some()
    }

    /// `k` with `a = k * generator`.
    #[inline]
    pub fn torus_log(&self, a: usize) -> Option<u64> {
        self.torus_log[a]
    }

    pub fn torus_element(&self, k: u64) -> usize {
        self.module.scale(k as i64, self.torus_generator)
    }

    /// The torus as its own trivially acted, flow-fixed cyclic module over `group`.
    pub fn torus_module(&self, group: &Arc<FiniteGroup>) -> FlowModule {
        let t = self.torus_order() as u64;
        FlowModule::trivial_action(FlowData::trivial_cyclic(t), group).expect("cyclic torus module")
    }

    #[inline]
    pub fn is_theta_coboundary(&self, a: usize) -> bool {
        self.preimage[a].is_some()
    }

    /// Lexicographically minimal `v` with `theta(v) - v = a`.
    #[inline]
    pub fn theta_preimage(&self, a: usize) -> Option<usize> {
        self.preimage[a]
    }

    #[inline]
    pub fn canonical_rep(&self, a: usize) -> usize {
        self.canon[a]
    }

    pub fn h1_class(&self, a: usize) -> FlowCocycleClass {
        FlowCocycleClass {
            representative: self.canon[a],
            witness: self.preimage[a],
        }
    }

    pub fn h1_add(&self, a: usize, b: usize) -> usize {
        self.canon[self.module.add(a, b)]
    }

    pub fn image_theta_minus_one(&self) -> Vec<usize> {
        self.module
            .elements()
            .filter(|&a| self.preimage[a].is_some())
            .collect()
    }

    pub fn h1_structure(&self) -> H1Structure {
        let m = &self.module;
        let mut sys = LinearSystem::new();
        sys.add_vars(m.moduli());
        let gens: Vec<Vec<u64>> = (0..m.rank())
            .map(|j| {
                let mut e = vec![0u64; m.rank()];
                e[j] = 1;
                m.decode(m.sub(self.theta.apply(m.encode(&e)), m.encode(&e)))
            })
            .collect();
        let sq = subquotient(&sys, &gens);
        let mut reps: Vec<usize> = m.elements().filter(|&a| self.canon[a] == a).collect();
        reps.sort_unstable();
        H1Structure {
            invariant_factors: sq.invariant_factors,
            representatives: reps,
        }
    }

    /// Checks that every `alpha_g` preserves `Im(theta - 1)`.
    pub fn check_descends_to_h1(&self) -> Result<()> {
        for g in self.group().elements() {
            for a in self.image_theta_minus_one() {
                if !self.is_theta_coboundary(self.alpha(g, a)) {
                    return Err(Error::ActionNotDescending { element: g });
                }
            }
        }
        Ok(())
    }
}

/// All `G`-equivariant homomorphisms `N -> H^1_theta`, each given as the
/// canonical representative of `nu(m)` for every member `m` of `N` (in member order).
pub fn enumerate_equivariant_homs(
    n: &NormalSubgroup,
    flow: &FlowModule,
    budget: &Budget,
) -> Result<Vec<Vec<usize>>> {
    let g = flow.group();
    if !Arc::ptr_eq(n.parent(), g) && **n.parent() != **g {
        return Err(Error::InvalidAction("subgroup of a different group".into()));
    }
    if let Some(&m) = n.members().iter().find(|&&m| !flow.action().aut(m).is_identity()) {
        return Err(Error::InvalidAction(format!("element {m} of N acts nontrivially")));
    }
    flow.check_descends_to_h1()?;
    let reps = flow.h1_structure().representatives;
    // Greedy generating set of N.
    let mut gens = Vec::new();
    let mut span = vec![0usize];
    for &m in n.members() {
        if !span.contains(&m) {
            gens.push(m);
            span = g.generated(&gens);
        }
    }
    let total = (reps.len() as u128).checked_pow(gens.len() as u32).unwrap_or(u128::MAX);
    budget.check("equivariant homomorphisms", total)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; gens.len()];
    'outer: loop {
        if let Some(nu) = extend_hom(n, flow, &gens, &idx.iter().map(|&i| reps[i]).collect::<Vec<_>>()) {
            out.push(nu);
        }
        let mut k = gens.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < reps.len() {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

fn extend_hom(n: &NormalSubgroup, flow: &FlowModule, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
    let g = flow.group();
    let mut nu = vec![usize::MAX; g.order()];
    nu[0] = 0;
    let mut queue = vec![0usize];
    let mut i = 0;
    while i < queue.len() {
        let x = queue[i];
        for (k, &gen) in gens.iter().enumerate() {
            let y = g.mul(x, gen);
            let val = flow.h1_add(nu[x], images[k]);
            if nu[y] == usize::MAX {
                nu[y] = val;
                queue.push(y);
            } else if nu[y] != val {
                return None;
            }
        }
        i += 1;
    }
    for &a in n.members() {
        for &b in n.members() {
            if nu[g.mul(a, b)] != flow.h1_add(nu[a], nu[b]) {
                return None;
            }
        }
    }
    for x in g.elements() {
        for &m in n.members() {
            if nu[g.conj(x, m)] != flow.canonical_rep(flow.alpha(x, nu[m])) {
                return None;
            }
        }
    }
    Some(n.members().iter().map(|&m| nu[m]).collect())
}
