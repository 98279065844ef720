//! Finite groups as multiplication tables, normal subgroups, quotients and
//! cross-sections.
//!
//! Elements are dense indices `0..order` and the identity is always `0`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A finite group given by its full multiplication table. Equality compares tables only.
#[derive(Clone)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    label: String,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.mul == other.mul
    }
}

impl Eq for FiniteGroup {}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.label, self.order)
    }
}

impl FiniteGroup {
    /// Validates `table` (row `g`, column `h` holds `g*h`) and builds the group.
    pub fn from_table(table: &[Vec<usize>], label: impl Into<String>) -> Result<Self> {
        let n = table.len();
        let bad = |reason: String, triple| Error::InvalidTable { reason, triple };
        if n == 0 {
            return Err(bad("empty table".into(), None));
        }
        for (g, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(bad(format!("row {g} has length {}, expected {n}", row.len()), None));
            }
            if let Some(&x) = row.iter().find(|&&x| x >= n) {
                return Err(bad(format!("entry {x} in row {g} is out of range"), None));
            }
        }
        for (g, row) in table.iter().enumerate() {
            if table[0][g] != g || row[0] != g {
                return Err(bad(format!("0 is not a two-sided identity at {g}"), None));
            }
        }
        for g in 0..n {
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for h in 0..n {
                if std::mem::replace(&mut seen_row[table[g][h]], true) {
                    return Err(bad(format!("row {g} is not a permutation"), None));
                }
                if std::mem::replace(&mut seen_col[table[h][g]], true) {
                    return Err(bad(format!("column {g} is not a permutation"), None));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(bad("multiplication is not associative".into(), Some((a, b, c))));
                    }
                }
            }
        }
        let mul: Vec<usize> = table.iter().flatten().copied().collect();
        let inv = (0..n)
            .map(|g| (0..n).find(|&h| mul[g * n + h] == 0).expect("latin square"))
            .collect();
        Ok(FiniteGroup {
            order: n,
            mul,
            inv,
            label: label.into(),
        })
    }

    /// Builds from a multiplication rule the caller has already proven associative.
    pub(crate) fn from_fn(order: usize, label: String, f: impl Fn(usize, usize) -> usize) -> Self {
        let mut mul = Vec::with_capacity(order * order);
        for a in 0..order {
            for b in 0..order {
                mul.push(f(a, b));
            }
        }
        let inv = (0..order)
            .map(|g| (0..order).find(|&h| mul[g * order + h] == 0).expect("group"))
            .collect();
        FiniteGroup {
            order,
            mul,
            inv,
            label,
        }
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order 0");
        Self::from_fn(n, format!("Z/{n}"), |a, b| (a + b) % n)
    }

    /// Direct product; element index is mixed radix with the first factor most significant.
    pub fn product(factors: &[FiniteGroup]) -> Self {
        if factors.is_empty() {
            return Self::trivial();
        }
        let orders: Vec<usize> = factors.iter().map(|g| g.order).collect();
        let order: usize = orders.iter().product();
        let split = |mut x: usize| {
            let mut parts = vec![0; orders.len()];
            for i in (0..orders.len()).rev() {
                parts[i] = x % orders[i];
                x /= orders[i];
            }
            parts
        };
        let label = factors
            .iter()
            .map(|g| g.label.clone())
            .collect::<Vec<_>>()
            .join(" x ");
        Self::from_fn(order, label, |a, b| {
            let (pa, pb) = (split(a), split(b));
            factors
                .iter()
                .enumerate()
                .fold(0, |acc, (i, g)| acc * orders[i] + g.mul(pa[i], pb[i]))
        })
    }

    /// Heisenberg group mod `k`: `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`,
    /// with `(a,b,c)` stored at index `a*k^2 + b*k + c`.
    pub fn heisenberg(k: usize) -> Self {
        assert!(k > 0, "heisenberg group with modulus 0");
        let dec = |x: usize| (x / (k * k), (x / k) % k, x % k);
        Self::from_fn(k * k * k, format!("Heis(Z/{k})"), |x, y| {
            let (a, b, c) = dec(x);
            let (a2, b2, c2) = dec(y);
            let na = (a + a2) % k;
            let nb = (b + b2) % k;
            let nc = (c + c2 + a * b2) % k;
            na * k * k + nb * k + nc
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `g * m * g^-1`.
    #[inline]
    pub fn conj(&self, g: usize, m: usize) -> usize {
        self.mul(self.mul(g, m), self.inv[g])
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.mul.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    /// Closure of `gens` under multiplication, sorted.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut mask = vec![false; self.order];
        mask[0] = true;
        let mut members = vec![0];
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            for &g in gens {
                let y = self.mul(x, g);
                if !mask[y] {
                    mask[y] = true;
                    members.push(y);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        members
    }
}

/// Descriptor for the group families the crate knows how to build.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(usize),
    Product(Vec<GroupSpec>),
    Heisenberg(usize),
    Explicit(Vec<Vec<usize>>),
}

impl GroupSpec {
    /// Parses `cyclic:n`, `Zn`, `heisenberg:k`, `klein`, `product(a,b,..)` or `a*b*..`.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let t = text.trim();
        if let Some(inner) = t.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            let parts = split_top_level(inner, ',');
            return Ok(GroupSpec::Product(
                parts.iter().map(|p| GroupSpec::parse(p)).collect::<std::result::Result<_, _>>()?,
            ));
        }
        let parts = split_top_level(t, '*');
        if parts.len() > 1 {
            return Ok(GroupSpec::Product(
                parts.iter().map(|p| GroupSpec::parse(p)).collect::<std::result::Result<_, _>>()?,
            ));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("bad group order in '{text}'"))
        };
        if let Some(n) = t.strip_prefix("cyclic:") {
            Ok(GroupSpec::Cyclic(num(n)?))
        } else if let Some(n) = t.strip_prefix("heisenberg:") {
            Ok(GroupSpec::Heisenberg(num(n)?))
        } else if t == "klein" {
            Ok(GroupSpec::Product(vec![GroupSpec::Cyclic(2), GroupSpec::Cyclic(2)]))
        } else if let Some(n) = t.strip_prefix('Z') {
            Ok(GroupSpec::Cyclic(num(n)?))
        } else {
            Err(format!("unknown group family '{text}'"))
        }
    }
}

fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    out.push(cur);
    out
}

pub fn build_group(spec: &GroupSpec) -> Result<FiniteGroup> {
    match spec {
        GroupSpec::Cyclic(n) => Ok(FiniteGroup::cyclic(*n)),
        GroupSpec::Heisenberg(k) => Ok(FiniteGroup::heisenberg(*k)),
        GroupSpec::Product(fs) => {
            let groups = fs.iter().map(build_group).collect::<Result<Vec<_>>>()?;
            Ok(FiniteGroup::product(&groups))
        }
        GroupSpec::Explicit(t) => FiniteGroup::from_table(t, format!("table[{}]", t.len())),
    }
}

/// A normal subgroup, stored as a sorted member list of its parent.
#[derive(Clone, Debug)]
pub struct NormalSubgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl PartialEq for NormalSubgroup {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.parent, &other.parent) || self.parent == other.parent)
            && self.members == other.members
    }
}

impl NormalSubgroup {
    pub fn new(parent: &Arc<FiniteGroup>, members: &[usize]) -> Result<Self> {
        let n = parent.order();
        let mut position = vec![None; n];
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&x) = sorted.iter().find(|&&x| x >= n) {
            return Err(Error::NotSubgroup(format!("element {x} out of range")));
        }
        for (i, &m) in sorted.iter().enumerate() {
            position[m] = Some(i);
        }
        if position[0].is_none() {
            return Err(Error::NotSubgroup("identity missing".into()));
        }
        for &a in &sorted {
            if position[parent.inv(a)].is_none() {
                return Err(Error::NotSubgroup(format!("inverse of {a} missing")));
            }
            for &b in &sorted {
                if position[parent.mul(a, b)].is_none() {
                    return Err(Error::NotSubgroup(format!("{a}*{b} missing")));
                }
            }
        }
        for g in parent.elements() {
            for &m in &sorted {
                if position[parent.conj(g, m)].is_none() {
                    return Err(Error::NotNormal { member: m, by: g });
                }
            }
        }
        Ok(NormalSubgroup {
            parent: parent.clone(),
            members: sorted,
            position,
        })
    }

    /// Normal closure of `gens`.
    pub fn normal_closure(parent: &Arc<FiniteGroup>, gens: &[usize]) -> Result<Self> {
        let mut all: Vec<usize> = Vec::new();
        for &x in gens {
            for g in parent.elements() {
                all.push(parent.conj(g, x));
            }
        }
        Self::new(parent, &parent.generated(&all))
    }

    pub fn trivial(parent: &Arc<FiniteGroup>) -> Self {
        Self::new(parent, &[0]).expect("trivial subgroup")
    }

    pub fn whole(parent: &Arc<FiniteGroup>) -> Self {
        let all: Vec<usize> = parent.elements().collect();
        Self::new(parent, &all).expect("whole group")
    }

    pub fn center(parent: &Arc<FiniteGroup>) -> Self {
        let z: Vec<usize> = parent
            .elements()
            .filter(|&z| parent.elements().all(|g| parent.mul(g, z) == parent.mul(z, g)))
            .collect();
        Self::new(parent, &z).expect("center is normal")
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn contains(&self, g: usize) -> bool {
        self.position[g].is_some()
    }

    /// Index of `g` in the sorted member list.
    #[inline]
    pub fn position(&self, g: usize) -> Option<usize> {
        self.position[g]
    }

    pub fn is_subset_of(&self, other: &NormalSubgroup) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    pub fn is_abelian(&self) -> bool {
        let p = &self.parent;
        self.members
            .iter()
            .all(|&a| self.members.iter().all(|&b| p.mul(a, b) == p.mul(b, a)))
    }

    /// Image in the quotient group (normal because the projection is onto).
    pub fn image(&self, q: &QuotientData) -> NormalSubgroup {
        let img: Vec<usize> = self.members.iter().map(|&m| q.proj(m)).collect();
        NormalSubgroup::new(q.quot(), &img).expect("image of a normal subgroup is normal")
    }

    /// Preimage of a normal subgroup of `q.quot` in `q.parent`.
    pub fn preimage(sub: &NormalSubgroup, q: &QuotientData) -> NormalSubgroup {
        let pre: Vec<usize> = q
            .parent()
            .elements()
            .filter(|&g| sub.contains(q.proj(g)))
            .collect();
        NormalSubgroup::new(q.parent(), &pre).expect("preimage of a normal subgroup is normal")
    }
}

/// Quotient `parent / kernel` with coset representatives of minimal index.
#[derive(Clone, Debug)]
pub struct QuotientData {
    parent: Arc<FiniteGroup>,
    kernel: NormalSubgroup,
    quot: Arc<FiniteGroup>,
    proj: Vec<usize>,
    reps: Vec<usize>,
}

pub fn quotient(parent: &Arc<FiniteGroup>, kernel: &NormalSubgroup) -> Result<QuotientData> {
    // Re-validate in case the caller built the subgroup for another parent.
    let kernel = NormalSubgroup::new(parent, kernel.members())?;
    let n = parent.order();
    let mut proj = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for g in 0..n {
        if proj[g] != usize::MAX {
            continue;
        }
        let idx = reps.len();
        reps.push(g);
        for &m in kernel.members() {
            proj[parent.mul(m, g)] = idx;
        }
    }
    let k = reps.len();
    let table: Vec<Vec<usize>> = (0..k)
        .map(|a| (0..k).map(|b| proj[parent.mul(reps[a], reps[b])]).collect())
        .collect();
    let label = format!("{}/[{}]", parent.label(), kernel.order());
    let quot = FiniteGroup::from_table(&table, label)?;
    Ok(QuotientData {
        parent: parent.clone(),
        kernel,
        quot: Arc::new(quot),
        proj,
        reps,
    })
}

impl QuotientData {
    /// Builds quotient data from an explicit surjective homomorphism.
    pub fn from_projection(
        parent: &Arc<FiniteGroup>,
        quot: &Arc<FiniteGroup>,
        proj: Vec<usize>,
    ) -> Result<Self> {
        if proj.len() != parent.order() || proj.iter().any(|&p| p >= quot.order()) {
            return Err(Error::InvalidSection("projection has wrong shape".into()));
        }
        for a in parent.elements() {
            for b in parent.elements() {
                if proj[parent.mul(a, b)] != quot.mul(proj[a], proj[b]) {
                    return Err(Error::InvalidSection(format!(
                        "projection is not a homomorphism at ({a}, {b})"
                    )));
                }
            }
        }
        let mut reps = vec![usize::MAX; quot.order()];
        for g in parent.elements().rev() {
            reps[proj[g]] = g;
        }
        if reps.contains(&usize::MAX) {
            return Err(Error::InvalidSection("projection is not onto".into()));
        }
        let ker: Vec<usize> = parent.elements().filter(|&g| proj[g] == 0).collect();
        let kernel = NormalSubgroup::new(parent, &ker)?;
        Ok(QuotientData {
            parent: parent.clone(),
            kernel,
            quot: quot.clone(),
            proj,
            reps,
        })
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn kernel(&self) -> &NormalSubgroup {
        &self.kernel
    }

    pub fn quot(&self) -> &Arc<FiniteGroup> {
        &self.quot
    }

    #[inline]
    pub fn proj(&self, g: usize) -> usize {
        self.proj[g]
    }

    pub fn projection(&self) -> &[usize] {
        &self.proj
    }

    /// Minimal-index representative of each coset.
    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    pub fn coset(&self, p: usize) -> Vec<usize> {
        self.parent.elements().filter(|&g| self.proj[g] == p).collect()
    }
}

/// A normalized set-theoretic section of a quotient map.
#[derive(Clone, Debug)]
pub struct CrossSection {
    quotient: Arc<QuotientData>,
    sect: Vec<usize>,
}

impl PartialEq for CrossSection {
    fn eq(&self, other: &Self) -> bool {
        self.sect == other.sect && self.quotient.proj == other.quotient.proj
    }
}

impl CrossSection {
    pub fn new(quotient: &Arc<QuotientData>, sect: Vec<usize>) -> Result<Self> {
        if sect.len() != quotient.quot.order() {
            return Err(Error::InvalidSection(format!(
                "section has {} entries, quotient has order {}",
                sect.len(),
                quotient.quot.order()
            )));
        }
        for (p, &g) in sect.iter().enumerate() {
            if g >= quotient.parent.order() || quotient.proj(g) != p {
                return Err(Error::InvalidSection(format!("sect({p}) = {g} does not lie over {p}")));
            }
        }
        if sect[0] != 0 {
            return Err(Error::InvalidSection("section is not normalized".into()));
        }
        Ok(CrossSection {
            quotient: quotient.clone(),
            sect,
        })
    }

    /// Section through the minimal coset representatives.
    pub fn minimal(quotient: &Arc<QuotientData>) -> Self {
        Self::new(quotient, quotient.reps.clone()).expect("minimal reps form a section")
    }

    /// All normalized sections, in lexicographic order of their tables.
    pub fn all(quotient: &Arc<QuotientData>) -> Vec<Self> {
        let cosets: Vec<Vec<usize>> = (0..quotient.quot.order()).map(|p| quotient.coset(p)).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; cosets.len()];
        loop {
            let sect: Vec<usize> = (0..cosets.len())
                .map(|p| if p == 0 { 0 } else { cosets[p][idx[p]] })
                .collect();
            out.push(Self::new(quotient, sect).expect("enumerated section"));
            let mut p = cosets.len();
            loop {
                if p <= 1 {
                    return out;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < cosets[p].len() {
                    break;
                }
                idx[p] = 0;
            }
        }
    }

    pub fn quotient(&self) -> &Arc<QuotientData> {
        &self.quotient
    }

    #[inline]
    pub fn sect(&self, p: usize) -> usize {
        self.sect[p]
    }

    pub fn table(&self) -> &[usize] {
        &self.sect
    }
}

/// The kernel-valued defect `n(p,q) = s(p)s(q)s(pq)^-1` of a section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionCocycle {
    order: usize,
    table: Vec<usize>,
}

impl SectionCocycle {
    #[inline]
    pub fn get(&self, p: usize, q: usize) -> usize {
        self.table[p * self.order + q]
    }
}

pub fn section_cocycle(s: &CrossSection) -> SectionCocycle {
    let qd = &s.quotient;
    let (g, q) = (&qd.parent, &qd.quot);
    let k = q.order();
    let mut table = Vec::with_capacity(k * k);
    for p in 0..k {
        for r in 0..k {
            let n = g.mul(g.mul(s.sect(p), s.sect(r)), g.inv(s.sect(q.mul(p, r))));
            assert!(qd.kernel.contains(n), "section cocycle leaves the kernel");
            table.push(n);
        }
    }
    let sc = SectionCocycle { order: k, table };
    for a in 0..k {
        assert_eq!(sc.get(a, 0), 0, "section cocycle not normalized");
        assert_eq!(sc.get(0, a), 0, "section cocycle not normalized");
        for b in 0..k {
            for c in 0..k {
                let lhs = g.mul(g.conj(s.sect(a), sc.get(b, c)), sc.get(a, q.mul(b, c)));
                let rhs = g.mul(sc.get(a, b), sc.get(q.mul(a, b), c));
                assert_eq!(lhs, rhs, "nonabelian cocycle identity fails at ({a},{b},{c})");
            }
        }
    }
    sc
}

/// Splits `g = m * sect(p)` with `m` in the kernel.
pub fn decompose(g: usize, s: &CrossSection) -> (usize, usize) {
    let parent = &s.quotient.parent;
    let p = s.quotient.proj(g);
    (parent.mul(g, parent.inv(s.sect(p))), p)
}

/// Searches for an isomorphism `a -> b`; returns the element map if one exists.
pub fn find_isomorphism(a: &FiniteGroup, b: &FiniteGroup) -> Option<Vec<usize>> {
    if a.order() != b.order() {
        return None;
    }
    let mut ord_a: Vec<usize> = a.elements().map(|g| a.element_order(g)).collect();
    let mut ord_b: Vec<usize> = b.elements().map(|g| b.element_order(g)).collect();
    let (oa, ob) = (ord_a.clone(), ord_b.clone());
    ord_a.sort_unstable();
    ord_b.sort_unstable();
    if ord_a != ord_b {
        return None;
    }
    // Greedy generating set of `a`.
    let mut gens = Vec::new();
    let mut span = vec![0usize];
    for g in a.elements() {
        if !span.contains(&g) {
            gens.push(g);
            span = a.generated(&gens);
        }
    }
    let mut images = vec![0usize; gens.len()];
    fn extend(
        a: &FiniteGroup,
        b: &FiniteGroup,
        gens: &[usize],
        images: &mut Vec<usize>,
        i: usize,
        oa: &[usize],
        ob: &[usize],
    ) -> Option<Vec<usize>> {
        if i == gens.len() {
            return try_map(a, b, gens, images);
        }
        for cand in b.elements() {
            if ob[cand] != oa[gens[i]] {
                continue;
            }
            images[i] = cand;
            if let Some(m) = extend(a, b, gens, images, i + 1, oa, ob) {
                return Some(m);
            }
        }
        None
    }
    extend(a, b, &gens, &mut images, 0, &oa, &ob)
}

fn try_map(a: &FiniteGroup, b: &FiniteGroup, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
    let mut map = vec![usize::MAX; a.order()];
    map[0] = 0;
    let mut queue = vec![0usize];
    let mut i = 0;
    while i < queue.len() {
        let x = queue[i];
        for (k, &g) in gens.iter().enumerate() {
            let y = a.mul(x, g);
            let img = b.mul(map[x], images[k]);
            if map[y] == usize::MAX {
                map[y] = img;
                queue.push(y);
            } else if map[y] != img {
                return None;
            }
        }
        i += 1;
    }
    let mut hit = vec![false; b.order()];
    for &m in &map {
        if m == usize::MAX || std::mem::replace(&mut hit[m], true) {
            return None;
        }
    }
    for x in a.elements() {
        for y in a.elements() {
            if map[a.mul(x, y)] != b.mul(map[x], map[y]) {
                return None;
            }
        }
    }
    Some(map)
}
