//! Exact linear algebra over finite abelian groups.
//!
//! A system has scalar unknowns `x_j` in `Z/m_j` and congruences
//! `sum_j c_ij x_j = b_i (mod n_i)`. Every modulus divides `N = lcm(all)`,
//! so the system is lifted to `Z/N` (row `i` scaled by `N/n_i`) and
//! diagonalized there by unimodular row and column operations, i.e. a Smith
//! form over the principal ideal ring `Z/N`.

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm_all(values: &[u64]) -> u64 {
    values.iter().fold(1, |a, &b| lcm(a, b))
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Returns `(g, s, t)` with `s*a + t*b = g = gcd(a, b)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, s, t) = ext_gcd(b, a % b);
        (g, t, s - (a / b) * t)
    }
}

fn reduce(x: i64, n: u64) -> u64 {
    x.rem_euclid(n as i64) as u64
}

/// Inverse of `a` modulo `n` when `gcd(a, n) = 1`.
fn inv_mod(a: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let (g, s, _) = ext_gcd(a as i64, n as i64);
    debug_assert_eq!(g, 1);
    reduce(s, n)
}

/// A unit `u` of `Z/n` with `u*a = gcd(a, n)`.
fn normalizing_unit(a: u64, n: u64) -> u64 {
    let g = gcd(a, n);
    if g == 0 || n == 1 {
        return 1;
    }
    let m = n / g;
    let u0 = inv_mod((a / g) % m, m);
    (0..g)
        .map(|t| u0 + t * m)
        .find(|&u| gcd(u, n) == 1)
        .expect("a lift to a unit always exists")
}

/// Integer matrix reduced modulo `n`, row major.
#[derive(Clone, Debug)]
struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Mat {
    fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m.data[i * k + i] = 1;
        }
        m
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `(row_a, row_b) <- (s*row_a + t*row_b, u*row_a + v*row_b)`.
    fn mix_rows(&mut self, a: usize, b: usize, e: [u64; 4], n: u64) {
        let [s, t, u, v] = e;
        for j in 0..self.cols {
            let x = self.data[a * self.cols + j];
            let y = self.data[b * self.cols + j];
            if x == 0 && y == 0 {
                continue;
            }
            self.data[a * self.cols + j] = (s * x + t * y) % n;
            self.data[b * self.cols + j] = (u * x + v * y) % n;
        }
    }

    /// `(col_a, col_b) <- (s*col_a + t*col_b, u*col_a + v*col_b)`.
    fn mix_cols(&mut self, a: usize, b: usize, e: [u64; 4], n: u64) {
        let [s, t, u, v] = e;
        for i in 0..self.rows {
            let x = self.data[i * self.cols + a];
            let y = self.data[i * self.cols + b];
            if x == 0 && y == 0 {
                continue;
            }
            self.data[i * self.cols + a] = (s * x + t * y) % n;
            self.data[i * self.cols + b] = (u * x + v * y) % n;
        }
    }

    fn scale_row(&mut self, a: usize, u: u64, n: u64) {
        for j in 0..self.cols {
            let x = &mut self.data[a * self.cols + j];
            *x = (*x * u) % n;
        }
    }

    fn mul_vec(&self, v: &[u64], n: u64) -> Vec<u64> {
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &b)| (acc + a * b) % n)
            })
            .collect()
    }

    fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }
}

/// Result of `P * A * Q = D` over `Z/n` with `D` diagonal.
struct Diagonal {
    n: u64,
    /// Normalized diagonal entries (each divides `n`), one per pivot.
    pivots: Vec<u64>,
    cols: usize,
    q: Mat,
    q_inv: Option<Mat>,
    p: Option<Mat>,
    p_inv: Option<Mat>,
    /// Right-hand sides carried through the row operations (i.e. `P b`).
    rhs: Vec<Vec<u64>>,
}

struct Track {
    p: bool,
    p_inv: bool,
    q_inv: bool,
}

fn bezout_matrix(a: u64, b: u64, n: u64) -> [u64; 4] {
    let (g, s, t) = ext_gcd(a as i64, b as i64);
    let g = g as u64;
    [
        reduce(s, n),
        reduce(t, n),
        reduce(-((b / g) as i64), n),
        (a / g) % n,
    ]
}

fn inverse_of(e: [u64; 4], n: u64) -> [u64; 4] {
    let [s, t, u, v] = e;
    [v, (n - t) % n, (n - u) % n, s]
}

fn diagonalize(mut a: Mat, mut rhs: Vec<Vec<u64>>, n: u64, track: Track) -> Diagonal {
    let (r, c) = (a.rows, a.cols);
    let mut q = Mat::identity(c);
    let mut q_inv = track.q_inv.then(|| Mat::identity(c));
    let mut p = track.p.then(|| Mat::identity(r));
    let mut p_inv = track.p_inv.then(|| Mat::identity(r));
    let mut pivots = Vec::new();

    macro_rules! row_swap {
        ($i:expr, $j:expr) => {{
            a.swap_rows($i, $j);
            for b in rhs.iter_mut() {
                b.swap($i, $j);
            }
            if let Some(p) = p.as_mut() {
                p.swap_rows($i, $j);
            }
            if let Some(pi) = p_inv.as_mut() {
                pi.swap_cols($i, $j);
            }
        }};
    }
    macro_rules! row_mix {
        ($i:expr, $j:expr, $e:expr) => {{
            let e = $e;
            a.mix_rows($i, $j, e, n);
            for b in rhs.iter_mut() {
                let (x, y) = (b[$i], b[$j]);
                b[$i] = (e[0] * x + e[1] * y) % n;
                b[$j] = (e[2] * x + e[3] * y) % n;
            }
            if let Some(p) = p.as_mut() {
                p.mix_rows($i, $j, e, n);
            }
            if let Some(pi) = p_inv.as_mut() {
                let [s, t, u, v] = inverse_of(e, n);
                // X E^-1: new col_i = s' col_i + u' col_j, new col_j = t' col_i + v' col_j
                pi.mix_cols($i, $j, [s, u, t, v], n);
            }
        }};
    }
    macro_rules! col_swap {
        ($i:expr, $j:expr) => {{
            a.swap_cols($i, $j);
            q.swap_cols($i, $j);
            if let Some(qi) = q_inv.as_mut() {
                qi.swap_rows($i, $j);
            }
        }};
    }
    macro_rules! col_mix {
        ($i:expr, $j:expr, $e:expr) => {{
            // A F where F acts on columns (i, j) with matrix [[s, u], [t, v]],
            // so new col_i = s col_i + t col_j and new col_j = u col_i + v col_j.
            let e = $e;
            a.mix_cols($i, $j, e, n);
            q.mix_cols($i, $j, e, n);
            if let Some(qi) = q_inv.as_mut() {
                let [s, t, u, v] = e;
                // F^-1 Q^-1 with F = [[s, u], [t, v]] acting from the right on columns,
                // F^-1 = [[v, -u], [-t, s]] acting on rows (i, j).
                qi.mix_rows($i, $j, [v, (n - u) % n, (n - t) % n, s], n);
            }
        }};
    }

    let mut k = 0;
    while k < r.min(c) {
        // Pick the entry generating the largest ideal in the remaining block.
        let mut best: Option<(u64, usize, usize)> = None;
        'search: for i in k..r {
            for j in k..c {
                let x = a.at(i, j);
                if x != 0 {
                    let g = gcd(x, n);
                    if best.is_none_or(|(bg, _, _)| g < bg) {
                        best = Some((g, i, j));
                        if g == 1 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((_, bi, bj)) = best else { break };
        row_swap!(k, bi);
        col_swap!(k, bj);
        loop {
            let mut dirty = false;
            for i in k + 1..r {
                let b = a.at(i, k);
                if b == 0 {
                    continue;
                }
                let piv = a.at(k, k);
                let g = gcd(piv, n);
                if b.is_multiple_of(g) {
                    let m = n / g;
                    let f = (b / g) % m * inv_mod((piv / g) % m, m) % m;
                    row_mix!(k, i, [1, 0, (n - f) % n, 1]);
                } else {
                    row_mix!(k, i, bezout_matrix(piv, b, n));
                }
            }
            for j in k + 1..c {
                let b = a.at(k, j);
                if b == 0 {
                    continue;
                }
                let piv = a.at(k, k);
                let g = gcd(piv, n);
                if b.is_multiple_of(g) {
                    let m = n / g;
                    let f = (b / g) % m * inv_mod((piv / g) % m, m) % m;
                    col_mix!(k, j, [1, 0, (n - f) % n, 1]);
                } else {
                    dirty = true;
                    col_mix!(k, j, bezout_matrix(piv, b, n));
                }
            }
            if !dirty || (k + 1..r).all(|i| a.at(i, k) == 0) {
                break;
            }
        }
        let piv = a.at(k, k);
        let u = normalizing_unit(piv, n);
        if u != 1 {
            a.scale_row(k, u, n);
            for b in rhs.iter_mut() {
                b[k] = b[k] * u % n;
            }
            if let Some(p) = p.as_mut() {
                p.scale_row(k, u, n);
            }
            if let Some(pi) = p_inv.as_mut() {
                let ui = inv_mod(u, n);
                for i in 0..pi.rows {
                    let x = pi.at(i, k);
                    pi.set(i, k, x * ui % n);
                }
            }
        }
        let d = a.at(k, k);
        if d == 0 {
            break;
        }
        pivots.push(d);
        k += 1;
    }
    Diagonal {
        n,
        pivots,
        cols: c,
        q,
        q_inv,
        p,
        p_inv,
        rhs,
    }
}

impl Diagonal {
    /// `gcd(d_i, n)` for every column index (zero columns give `n`).
    fn column_orders(&self) -> Vec<u64> {
        (0..self.cols)
            .map(|i| self.pivots.get(i).map_or(self.n, |&d| gcd(d, self.n)))
            .collect()
    }

    /// Solves `D y' = b'` and returns `y = Q y'` when consistent.
    fn back_substitute(&self, b: &[u64]) -> Option<Vec<u64>> {
        let n = self.n;
        let mut yp = vec![0u64; self.cols];
        for (i, &bi) in b.iter().enumerate() {
            match self.pivots.get(i) {
                Some(&d) => {
                    if bi % d != 0 {
                        return None;
                    }
                    yp[i] = bi / d;
                }
                None => {
                    if bi % n != 0 {
                        return None;
                    }
                }
            }
        }
        Some(self.q.mul_vec(&yp, n))
    }
}

#[derive(Clone, Debug)]
struct Row {
    modulus: u64,
    coeffs: Vec<(usize, i64)>,
    rhs: i64,
}

/// A linear congruence system over a product of cyclic groups.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    var_mods: Vec<u64>,
    rows: Vec<Row>,
}

impl LinearSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a scalar unknown in `Z/modulus` and returns its index.
    pub fn add_var(&mut self, modulus: u64) -> usize {
        assert!(modulus > 0);
        self.var_mods.push(modulus);
        self.var_mods.len() - 1
    }

    /// Adds a block of unknowns and returns the index of the first one.
    pub fn add_vars(&mut self, moduli: &[u64]) -> usize {
        let start = self.var_mods.len();
        for &m in moduli {
            self.add_var(m);
        }
        start
    }

    pub fn num_vars(&self) -> usize {
        self.var_mods.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var_moduli(&self) -> &[u64] {
        &self.var_mods
    }

    /// Adds `sum coeff * x_var = rhs (mod modulus)`. Repeated variables are summed.
    pub fn add_row(&mut self, modulus: u64, coeffs: &[(usize, i64)], rhs: i64) {
        assert!(modulus > 0);
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(coeffs.len());
        for &(v, c) in coeffs {
            let c = c.rem_euclid(modulus as i64);
            if let Some(e) = merged.iter_mut().find(|e| e.0 == v) {
                e.1 = (e.1 + c) % modulus as i64;
            } else {
                merged.push((v, c));
            }
        }
        merged.retain(|&(_, c)| c != 0);
        for &(v, c) in &merged {
            debug_assert!(
                (c as u128 * self.var_mods[v] as u128).is_multiple_of(modulus as u128),
                "ill-formed coefficient {c} for Z/{} into Z/{modulus}",
                self.var_mods[v]
            );
        }
        self.rows.push(Row {
            modulus,
            coeffs: merged,
            rhs: rhs.rem_euclid(modulus as i64),
        });
    }

    fn ring(&self) -> u64 {
        let n = self
            .var_mods
            .iter()
            .chain(self.rows.iter().map(|r| &r.modulus))
            .fold(1u64, |acc, &m| lcm(acc, m));
        assert!(n < (1 << 31), "ring modulus {n} too large");
        n
    }

    fn lifted(&self, n: u64) -> Mat {
        let mut a = Mat::zeros(self.rows.len(), self.var_mods.len());
        for (i, row) in self.rows.iter().enumerate() {
            let scale = n / row.modulus;
            for &(v, c) in &row.coeffs {
                a.set(i, v, (scale * c as u64) % n);
            }
        }
        a
    }

    fn lifted_rhs(&self, n: u64, rhs: impl Iterator<Item = i64>) -> Vec<u64> {
        self.rows
            .iter()
            .zip(rhs)
            .map(|(row, b)| (n / row.modulus) * reduce(b, row.modulus) % n)
            .collect()
    }

    fn to_x(&self, y: &[u64]) -> Vec<u64> {
        y.iter().zip(&self.var_mods).map(|(&v, &m)| v % m).collect()
    }

    /// Some solution of the system, or `None` when inconsistent.
    pub fn solve(&self) -> Option<Vec<u64>> {
        let n = self.ring();
        let b = self.lifted_rhs(n, self.rows.iter().map(|r| r.rhs));
        let d = diagonalize(
            self.lifted(n),
            vec![b],
            n,
            Track {
                p: false,
                p_inv: false,
                q_inv: false,
            },
        );
        d.back_substitute(&d.rhs[0]).map(|y| self.to_x(&y))
    }

    /// Precomputes a factorization for solving with many right-hand sides.
    pub fn factor(&self) -> Factored {
        let n = self.ring();
        let d = diagonalize(
            self.lifted(n),
            Vec::new(),
            n,
            Track {
                p: true,
                p_inv: false,
                q_inv: false,
            },
        );
        Factored {
            system: self.clone(),
            n,
            diag: d,
        }
    }

    /// Generators of the solution group of the homogeneous system.
    pub fn kernel_generators(&self) -> Vec<Vec<u64>> {
        let n = self.ring();
        let d = diagonalize(
            self.lifted(n),
            Vec::new(),
            n,
            Track {
                p: false,
                p_inv: false,
                q_inv: false,
            },
        );
        let orders = d.column_orders();
        let mut out = Vec::new();
        for (i, &g) in orders.iter().enumerate() {
            let scale = n / g;
            let y: Vec<u64> = d.q.col(i).iter().map(|&v| v * scale % n).collect();
            let x = self.to_x(&y);
            if x.iter().any(|&v| v != 0) {
                out.push(x);
            }
        }
        out
    }

    /// Order of the solution group of the homogeneous system.
    pub fn kernel_order(&self) -> u128 {
        let n = self.ring();
        let d = diagonalize(
            self.lifted(n),
            Vec::new(),
            n,
            Track {
                p: false,
                p_inv: false,
                q_inv: false,
            },
        );
        // |{y : Ay = 0}| / |{y : y_j in m_j Z/N}|
        let ky: u128 = d.column_orders().iter().map(|&g| g as u128).product();
        let rel: u128 = self.var_mods.iter().map(|&m| (n / m) as u128).product();
        ky / rel
    }

    /// Residue of `x` against row `i`.
    pub fn evaluate(&self, x: &[u64]) -> Vec<u64> {
        self.rows
            .iter()
            .map(|row| {
                let m = row.modulus as i128;
                let s: i128 = row
                    .coeffs
                    .iter()
                    .map(|&(v, c)| c as i128 * x[v] as i128)
                    .sum::<i128>()
                    - row.rhs as i128;
                s.rem_euclid(m) as u64
            })
            .collect()
    }

    pub fn is_solution(&self, x: &[u64]) -> bool {
        self.evaluate(x).iter().all(|&r| r == 0)
    }
}

/// A factored system that answers many right-hand sides.
pub struct Factored {
    system: LinearSystem,
    n: u64,
    diag: Diagonal,
}

impl Factored {
    /// Solves the factored matrix against new right-hand sides (one per row).
    pub fn solve(&self, rhs: &[i64]) -> Option<Vec<u64>> {
        assert_eq!(rhs.len(), self.system.rows.len());
        let b = self.system.lifted_rhs(self.n, rhs.iter().copied());
        let p = self.diag.p.as_ref().expect("row transform tracked");
        let pb = p.mul_vec(&b, self.n);
        self.diag
            .back_substitute(&pb)
            .map(|y| self.system.to_x(&y))
    }
}

/// A finite abelian group presented as a subquotient, with generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subquotient {
    /// Invariant factors `d_1 | d_2 | ...`, all greater than one.
    pub invariant_factors: Vec<u64>,
    /// One unknown vector per invariant factor, of exactly that order.
    pub generators: Vec<Vec<u64>>,
}

impl Subquotient {
    pub fn order(&self) -> u128 {
        self.invariant_factors.iter().map(|&d| d as u128).product()
    }
}

/// Computes `ker(system) / <image_gens>` where `system` is read as homogeneous
/// and each image generator lies in its kernel.
pub fn subquotient(system: &LinearSystem, image_gens: &[Vec<u64>]) -> Subquotient {
    let n = system.ring();
    let c = system.num_vars();
    let d = diagonalize(
        system.lifted(n),
        Vec::new(),
        n,
        Track {
            p: false,
            p_inv: false,
            q_inv: true,
        },
    );
    let q_inv = d.q_inv.as_ref().expect("tracked");
    let orders = d.column_orders();
    let to_t = |y: &[u64]| -> Vec<u64> {
        let yp = q_inv.mul_vec(y, n);
        yp.iter()
            .zip(&orders)
            .map(|(&v, &g)| {
                let scale = n / g;
                assert_eq!(v % scale, 0, "vector is not in the kernel");
                v / scale
            })
            .collect()
    };
    let mut rels: Vec<Vec<u64>> = Vec::new();
    for (i, &g) in orders.iter().enumerate() {
        let mut e = vec![0u64; c];
        e[i] = g % n;
        rels.push(e);
    }
    for (j, &m) in system.var_mods.iter().enumerate() {
        let mut y = vec![0u64; c];
        y[j] = m % n;
        rels.push(to_t(&y));
    }
    for x in image_gens {
        rels.push(to_t(x));
    }
    let mut r = Mat::zeros(c, rels.len());
    for (k, v) in rels.iter().enumerate() {
        for (i, &x) in v.iter().enumerate().take(c) {
            r.set(i, k, x % n);
        }
    }
    let d2 = diagonalize(
        r,
        Vec::new(),
        n,
        Track {
            p: false,
            p_inv: true,
            q_inv: false,
        },
    );
    let p_inv = d2.p_inv.as_ref().expect("tracked");
    let mut cyclic: Vec<(u64, Vec<u64>)> = Vec::new();
    for k in 0..c {
        let order = d2.pivots.get(k).map_or(n, |&e| gcd(e, n));
        if order <= 1 {
            continue;
        }
        let t = p_inv.col(k);
        let yp: Vec<u64> = t
            .iter()
            .zip(&orders)
            .map(|(&v, &g)| v * (n / g) % n)
            .collect();
        let y = d.q.mul_vec(&yp, n);
        cyclic.push((order, system.to_x(&y)));
    }
    to_invariant_factors(&cyclic, &system.var_mods)
}

fn prime_powers(mut x: u64) -> Vec<(u64, u32, u64)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        if x.is_multiple_of(p) {
            let mut e = 0;
            let mut pe = 1;
            while x.is_multiple_of(p) {
                x /= p;
                e += 1;
                pe *= p;
            }
            out.push((p, e, pe));
        }
        p += 1;
    }
    if x > 1 {
        out.push((x, 1, x));
    }
    out
}

fn to_invariant_factors(cyclic: &[(u64, Vec<u64>)], mods: &[u64]) -> Subquotient {
    use std::collections::BTreeMap;
    let scale = |v: &[u64], k: u64| -> Vec<u64> {
        v.iter().zip(mods).map(|(&x, &m)| x * k % m).collect()
    };
    let mut by_prime: BTreeMap<u64, Vec<(u64, Vec<u64>)>> = BTreeMap::new();
    for (order, v) in cyclic {
        for (p, _, pe) in prime_powers(*order) {
            by_prime.entry(p).or_default().push((pe, scale(v, order / pe)));
        }
    }
    let width = by_prime.values().map(|v| v.len()).max().unwrap_or(0);
    for comps in by_prime.values_mut() {
        comps.sort_by_key(|c| std::cmp::Reverse(c.0));
    }
    // Column j (from the largest) collects the j-th largest power of each prime.
    let mut factors: Vec<(u64, Vec<u64>)> = (0..width)
        .map(|j| {
            let mut d = 1u64;
            let mut g = vec![0u64; mods.len()];
            for comps in by_prime.values() {
                if let Some((pe, v)) = comps.get(j) {
                    d *= pe;
                    for (i, x) in v.iter().enumerate() {
                        g[i] = (g[i] + x) % mods[i];
                    }
                }
            }
            (d, g)
        })
        .collect();
    factors.reverse();
    Subquotient {
        invariant_factors: factors.iter().map(|f| f.0).collect(),
        generators: factors.into_iter().map(|f| f.1).collect(),
    }
}

/// Every coefficient vector `k` with `0 <= k_i < factors_i`, in odometer order.
pub fn combos(factors: &[u64], budget: &crate::Budget, what: &str) -> crate::Result<Vec<Vec<u64>>> {
    let total: u128 = factors.iter().map(|&d| d as u128).product();
    budget.check(what, total)?;
    let mut out = vec![vec![]];
    for &d in factors {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..d).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    Ok(out)
}

/// `sum_i coeffs_i * gens_i`, reduced componentwise.
pub fn span(gens: &[Vec<u64>], coeffs: &[u64], moduli: &[u64]) -> Vec<u64> {
    let mut x = vec![0u64; moduli.len()];
    for (g, &k) in gens.iter().zip(coeffs) {
        for i in 0..x.len() {
            x[i] = (x[i] + k * g[i]) % moduli[i];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_simple_congruence() {
        // 2x = 2 mod 4 with x in Z/4.
        let mut s = LinearSystem::new();
        let x = s.add_var(4);
        s.add_row(4, &[(x, 2)], 2);
        let sol = s.solve().unwrap();
        assert!(s.is_solution(&sol));
        let mut s = LinearSystem::new();
        let x = s.add_var(4);
        s.add_row(4, &[(x, 2)], 1);
        assert!(s.solve().is_none());
    }

    #[test]
    fn mixed_moduli() {
        // x in Z/2 embedded into Z/4 by 2x; 2x + y = 3 mod 4, y in Z/4.
        let mut s = LinearSystem::new();
        let x = s.add_var(2);
        let y = s.add_var(4);
        s.add_row(4, &[(x, 2), (y, 1)], 3);
        s.add_row(2, &[(y, 1)], 1);
        let sol = s.solve().unwrap();
        assert!(s.is_solution(&sol));
        assert_eq!(s.kernel_order(), 2);
    }

    #[test]
    fn coprime_components() {
        // Z/6 unknown, 3x = 3 mod 6 and 2x = 4 mod 6 -> x = 5 only.
        let mut s = LinearSystem::new();
        let x = s.add_var(6);
        s.add_row(6, &[(x, 3)], 3);
        s.add_row(6, &[(x, 2)], 4);
        assert_eq!(s.solve().unwrap(), vec![5]);
    }

    #[test]
    fn kernel_of_zero_map_is_everything() {
        let mut s = LinearSystem::new();
        s.add_vars(&[2, 4, 3]);
        assert_eq!(s.kernel_order(), 24);
        let sq = subquotient(&s, &[]);
        assert_eq!(sq.invariant_factors, vec![2, 12]);
    }

    #[test]
    fn subquotient_with_image() {
        // Z/4 modulo <2> is Z/2.
        let mut s = LinearSystem::new();
        s.add_var(4);
        let sq = subquotient(&s, &[vec![2]]);
        assert_eq!(sq.invariant_factors, vec![2]);
        assert_eq!(sq.generators[0][0] % 2, 1);
        // Z/2 x Z/2 modulo the diagonal.
        let mut s = LinearSystem::new();
        s.add_vars(&[2, 2]);
        let sq = subquotient(&s, &[vec![1, 1]]);
        assert_eq!(sq.invariant_factors, vec![2]);
    }

    #[test]
    fn factored_matches_direct() {
        let mut s = LinearSystem::new();
        let a = s.add_var(6);
        let b = s.add_var(6);
        s.add_row(6, &[(a, 2), (b, 4)], 0);
        s.add_row(6, &[(a, 3), (b, 3)], 0);
        let f = s.factor();
        for r0 in 0..6 {
            for r1 in 0..6 {
                let mut t = LinearSystem::new();
                let a = t.add_var(6);
                let b = t.add_var(6);
                t.add_row(6, &[(a, 2), (b, 4)], r0);
                t.add_row(6, &[(a, 3), (b, 3)], r1);
                let brute = (0..36u64).any(|v| t.is_solution(&[v / 6, v % 6]));
                let fx = f.solve(&[r0, r1]);
                assert_eq!(brute, fx.is_some());
                assert_eq!(brute, t.solve().is_some());
                if let Some(x) = fx {
                    assert!(t.is_solution(&x));
                }
            }
        }
    }

    #[test]
    fn normalizing_unit_works() {
        for n in 1..30u64 {
            for a in 1..n {
                let u = normalizing_unit(a, n);
                assert_eq!(gcd(u, n), 1);
                assert_eq!(a * u % n, gcd(a, n) % n);
            }
        }
    }
}
