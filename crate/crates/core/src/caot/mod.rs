//! Additive operations K(n) -> CH^m: the linear system on G-data, its exact kernel,
//! gradability, integral generators, the Chern character, evaluation on classes,
//! composition with mod-p Chow operations and the Adams commutation check.
//!
//! Equation A_l reads
//! G_l(t_1..t_{l-1}, u + v) = sum_{j,k} a_jk G_{j+k+l-1}(t_1..t_{l-1}, u^{x j}, v^{x k})
//! for l = 1..m; A_l with l > m is vacuous in degree m.

mod echelon;
mod gdata;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, split_p_part, Prime, Rational};
use crate::fgl::FormalGroupLaw;
use crate::polyring::{distinct_permutations, symmetrize, Partition, Ring, VarTable, WeightedPoly};

pub use echelon::Echelon;
pub use gdata::{parse_gdata, variables, GData, GDataJson, GPolyJson};

/// One row of the system: the coefficient of a monomial in equation A_l.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    /// The equation index l.
    pub equation: u32,
    /// Exponents of t_1..t_{l-1}, u, v.
    pub monomial: Vec<u32>,
    /// (variable index, coefficient), sorted by index.
    pub coeffs: Vec<(usize, Rational)>,
}

#[derive(Clone, Debug)]
pub struct LinearSystem {
    p: Prime,
    n: u32,
    m: u32,
    ring: Ring,
    vars: Vec<(u32, Partition)>,
    rows: Vec<Row>,
}

impl LinearSystem {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn variables(&self) -> &[(u32, Partition)] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// The row of equation `l` at the given (t-sorted) monomial, if nonzero.
    pub fn row(&self, l: u32, monomial: &[u32]) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.equation == l && r.monomial == monomial)
    }

    fn dense(&self, r: &Row) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.vars.len()];
        for (i, c) in &r.coeffs {
            v[*i] = c.clone();
        }
        v
    }

    /// Reduced echelon form of all rows.
    pub fn echelon(&self) -> Result<Echelon> {
        let mut e = Echelon::new(self.ring, self.vars.len());
        for r in &self.rows {
            e.insert(&self.dense(r))?;
        }
        Ok(e)
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn sorted_desc(e: &[u32]) -> bool {
    e.windows(2).all(|w| w[0] >= w[1])
}

/// Builds the equations A_1..A_m on the unknowns alpha^{(l)}_r.
///
/// `n` is recorded for gradability; the law needs a bound of at least m. Rows are
/// emitted only for monomials whose t-part is non-increasing: each equation is
/// symmetric in t_1..t_{l-1}.
pub fn build_system(f: &FormalGroupLaw, n: u32, m: u32, ring: Ring) -> Result<LinearSystem> {
    if m == 0 {
        return Err(Error::InvalidInput("target degree m must be >= 1".into()));
    }
    if f.bound() < m {
        return Err(Error::TruncationTooSmall {
            bound: f.bound(),
            needed: m as u64,
        });
    }
    if ring.prime().is_some_and(|q| q != f.p()) {
        return Err(Error::RingMismatch(ring.tag(), format!("p = {}", f.p())));
    }
    let vars = variables(m);
    let mut eqs: Vec<BTreeMap<Vec<u32>, BTreeMap<usize, Rational>>> =
        vec![BTreeMap::new(); m as usize];
    let mut push = |l: u32, mono: Vec<u32>, idx: usize, c: Rational| {
        *eqs[l as usize - 1]
            .entry(mono)
            .or_default()
            .entry(idx)
            .or_insert_with(Rational::zero) += c;
    };
    for (idx, (big_l, r)) in vars.iter().enumerate() {
        let big_l = *big_l;
        let perms = distinct_permutations(r.parts());
        // Own equation: G_l(.., u + v) - G_l(.., u) - G_l(.., v).
        for e in &perms {
            let (head, last) = e.split_at(big_l as usize - 1);
            if !sorted_desc(head) {
                continue;
            }
            for i in 1..last[0] {
                let mut mono = head.to_vec();
                mono.extend([i, last[0] - i]);
                push(big_l, mono, idx, Rational::from_integer(binomial(last[0], i)));
            }
        }
        // Lower equations A_l, l < L: the terms a_jk G_L with j + k = L - l + 1, j, k >= 1.
        for l in 1..big_l {
            let s = big_l - l + 1;
            for j in 1..s {
                let a = f.a(j, s - j);
                if a.is_zero() {
                    continue;
                }
                for e in &perms {
                    let head = &e[..l as usize - 1];
                    if !sorted_desc(head) {
                        continue;
                    }
                    let split = (l - 1 + j) as usize;
                    let mut mono = head.to_vec();
                    mono.push(e[l as usize - 1..split].iter().sum());
                    mono.push(e[split..].iter().sum());
                    push(l, mono, idx, -a.clone());
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (li, eq) in eqs.into_iter().enumerate() {
        for (monomial, coeffs) in eq {
            let coeffs: Vec<(usize, Rational)> = coeffs
                .into_iter()
                .map(|(i, c)| Ok((i, ring.coerce(&c)?)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if !coeffs.is_empty() {
                rows.push(Row {
                    equation: li as u32 + 1,
                    monomial,
                    coeffs,
                });
            }
        }
    }
    Ok(LinearSystem {
        p: f.p(),
        n,
        m,
        ring,
        vars,
        rows,
    })
}

/// Kernel basis in canonical order (one vector per free unknown, last unknowns free).
pub fn solve_kernel(sys: &LinearSystem) -> Result<Vec<GData>> {
    let e = sys.echelon()?;
    e.kernel()
        .iter()
        .map(|v| GData::from_coords(sys.p, sys.n, sys.m, sys.ring, v))
        .collect()
}

/// Checks every equation A_l by direct substitution into the G_l.
pub fn naturality_check(g: &GData, f: &FormalGroupLaw) -> Result<bool> {
    let m = g.m();
    let ring = g.ring();
    if f.p() != g.p() {
        return Err(Error::RingMismatch(format!("p = {}", f.p()), format!("p = {}", g.p())));
    }
    if f.bound() < m {
        return Err(Error::TruncationTooSmall {
            bound: f.bound(),
            needed: m as u64,
        });
    }
    for l in 1..=m {
        let target = VarTable::tuv(l);
        let t = |i: u32| WeightedPoly::var(ring, target.clone(), i as usize, None);
        let (u, v) = (t(l - 1), t(l));
        let head: Vec<WeightedPoly> = (0..l - 1).map(t).collect();
        let mut images = head.clone();
        images.push(u.add(&v)?);
        let lhs = g.g(l).expect("l <= m").compose(&target, &images, None)?;
        let mut rhs = WeightedPoly::zero(ring, target.clone(), None);
        for (&(j, k), a) in f.coeffs() {
            let big_l = j + k + l - 1;
            if big_l > m || a.is_zero() {
                continue;
            }
            let mut images = head.clone();
            images.extend(std::iter::repeat_n(u.clone(), j as usize));
            images.extend(std::iter::repeat_n(v.clone(), k as usize));
            let term = g.g(big_l).expect("big_l <= m").compose(&target, &images, None)?;
            rhs = rhs.add(&term.scale(&ring.coerce(a)?))?;
        }
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

fn gradable_part(r: &Partition, modulus: u64) -> bool {
    r.parts().iter().all(|&x| (x as u64) % modulus == 1 % modulus)
}

/// Every exponent of every monomial is 1 mod (p^n - 1).
pub fn is_gradable(g: &GData) -> bool {
    let modulus = g.modulus();
    g.polys().iter().all(|poly| {
        poly.terms()
            .all(|(mono, _)| mono.exps().iter().all(|&e| e as u64 % modulus == 1 % modulus))
    })
}

/// Intersection of the span of `basis` with the gradable G-data.
pub fn gradable_subspace(basis: &[GData]) -> Result<Vec<GData>> {
    let Some(first) = basis.first() else {
        return Ok(Vec::new());
    };
    let (p, n, m, ring) = (first.p(), first.n(), first.m(), first.ring());
    let modulus = first.modulus();
    let coords: Vec<Vec<Rational>> = basis.iter().map(GData::coords).collect();
    let mut e = Echelon::new(ring, basis.len());
    for (c, (_, r)) in variables(m).iter().enumerate() {
        if !gradable_part(r, modulus) {
            let row: Vec<Rational> = coords.iter().map(|v| v[c].clone()).collect();
            e.insert(&row)?;
        }
    }
    e.kernel()
        .iter()
        .map(|lam| {
            let mut acc = GData::zero(p, n, m, ring);
            for (l, b) in lam.iter().zip(basis) {
                if !l.is_zero() {
                    acc = acc.add(&b.scale(l))?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Generator phi_m of the integral additive operations to CH^m, over Z_(p).
///
/// The rational kernel vector is taken primitive in Z and divided by the prime-to-p
/// part of its first nonzero coordinate, which then equals p^e > 0.
pub fn integral_generator(f: &FormalGroupLaw, n: u32, m: u32) -> Result<GData> {
    let sys = build_system(f, n, m, Ring::Q)?;
    let kernel = sys.echelon()?.kernel();
    if kernel.len() != 1 {
        return Err(Error::UnexpectedRank {
            m,
            dim: kernel.len(),
        });
    }
    let v = &kernel[0];
    let first = v.iter().find(|x| !x.is_zero()).expect("kernel vector is nonzero");
    let (_, unit) = split_p_part(first, f.p());
    let v: Vec<Rational> = v.iter().map(|x| x / &unit).collect();
    GData::from_coords(f.p(), n, m, Ring::ZpLocal(f.p()), &v)
}

/// Chern character to CH^m: G_l is the degree-m part of prod_j exp_F(t_j).
pub fn ch_gdata(f: &FormalGroupLaw, n: u32, m: u32) -> Result<GData> {
    if f.bound() < m {
        return Err(Error::TruncationTooSmall {
            bound: f.bound(),
            needed: m as u64,
        });
    }
    let gamma = f.exp().truncated(m);
    let polys = (1..=m)
        .map(|l| {
            let vars = VarTable::t(l);
            let mut acc = WeightedPoly::one(Ring::Q, vars.clone(), Some(m));
            for j in 0..l as usize {
                let tj = WeightedPoly::var(Ring::Q, vars.clone(), j, Some(m));
                acc = acc.mul(&gamma.compose(&vars, &[tj], Some(m))?)?;
            }
            Ok(acc.homogeneous(m))
        })
        .collect::<Result<Vec<_>>>()?;
    GData::new(f.p(), n, m, Ring::Q, polys)
}

/// Value of an additive operation on a class with integer coefficients.
///
/// The class is a polynomial in z_1..z_N; a monomial z^e is the pull-back of
/// z_1...z_E (E = |e|) along the map repeating z_j e_j times, so it goes to G_E with
/// its variables identified accordingly. The result lives in t_1..t_N.
pub fn evaluate_additive(g: &GData, class: &WeightedPoly) -> Result<WeightedPoly> {
    if let Some((_, c)) = class.terms().find(|(_, c)| !c.denom().is_one()) {
        return Err(Error::UseAdamsTrick(format_rational(c)));
    }
    evaluate_linear(g, class)
}

/// Like [`evaluate_additive`] but accepting any coefficients in the ring of `g`.
pub(crate) fn evaluate_linear(g: &GData, class: &WeightedPoly) -> Result<WeightedPoly> {
    let nz = class.vars().len() as u32;
    if class.vars().as_ref() != VarTable::z(nz).as_ref() {
        return Err(Error::InvalidInput("classes are polynomials in z_1..z_N".into()));
    }
    let target = VarTable::t(nz);
    let mut acc = WeightedPoly::zero(g.ring(), target.clone(), None);
    for (mono, c) in class.terms() {
        let e = mono.degree();
        if e == 0 {
            return Err(Error::InvalidInput("class has a constant term".into()));
        }
        let Some(ge) = g.g(e) else { continue };
        let map: Vec<usize> = mono
            .exps()
            .iter()
            .enumerate()
            .flat_map(|(j, &k)| std::iter::repeat_n(j, k as usize))
            .collect();
        acc = acc.add(&ge.embed(&target, &map)?.scale(&g.ring().coerce(c)?))?;
    }
    Ok(acc)
}

/// phi(prod_j [k]_F z_j) = k^m G_l for l = 1..m.
pub fn adams_commutation_check(g: &GData, f: &FormalGroupLaw, k: i64) -> Result<bool> {
    let m = g.m();
    if f.bound() < m {
        return Err(Error::TruncationTooSmall {
            bound: f.bound(),
            needed: m as u64,
        });
    }
    let ks = crate::fgl::k_series(f, k)?.truncated(m);
    let km = Rational::from_integer(BigInt::from(k).pow(m));
    for l in 1..=m {
        let vars = VarTable::z(l);
        let mut class = WeightedPoly::one(Ring::Q, vars.clone(), Some(m));
        for j in 0..l as usize {
            let zj = WeightedPoly::var(Ring::Q, vars.clone(), j, Some(m));
            class = class.mul(&ks.compose(&vars, &[zj], Some(m))?)?;
        }
        let lhs = evaluate_linear(g, &class.into_exact())?;
        if lhs != g.g(l).expect("l <= m").scale(&km) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An additive operation CH^i/p -> CH^j/p given by its value Q_i on t_1...t_i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CHOpData {
    p: Prime,
    i: u32,
    j: u32,
    q: WeightedPoly,
}

impl CHOpData {
    /// Validates that Q_i is a symmetric homogeneous polynomial over F_p divisible by t_1...t_i.
    pub fn new(p: Prime, q: WeightedPoly) -> Result<Self> {
        let i = q.vars().len() as u32;
        if q.ring() != Ring::Fp(p) || q.vars().as_ref() != VarTable::t(i).as_ref() {
            return Err(Error::TableMismatch);
        }
        let j = q.max_weight().unwrap_or(i);
        if q.terms().any(|(mono, _)| mono.weight() != j || mono.exps().contains(&0)) {
            return Err(Error::InvalidInput(
                "Q must be homogeneous and divisible by t_1...t_i".into(),
            ));
        }
        if !q.is_symmetric(&(0..i as usize).collect::<Vec<_>>()) {
            return Err(Error::InvalidInput("Q is not symmetric".into()));
        }
        Ok(CHOpData {
            p,
            i,
            j,
            q: q.into_exact(),
        })
    }

    /// The operation sending t_1...t_i to the symmetrization of t_1^{p^s_1}...t_i^{p^s_i}.
    pub fn from_p_partition(p: Prime, parts: &[u32]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidInput("empty partition".into()));
        }
        if let Some(&bad) = parts.iter().find(|&&x| !is_p_power(x as u64, p.get())) {
            return Err(Error::InvalidInput(format!("{bad} is not a power of {p}")));
        }
        Self::new(p, symmetrize(parts, Ring::Fp(p)))
    }

    pub fn source(&self) -> u32 {
        self.i
    }

    pub fn target(&self) -> u32 {
        self.j
    }

    pub fn q(&self) -> &WeightedPoly {
        &self.q
    }
}

fn is_p_power(mut x: u64, p: u64) -> bool {
    if x == 0 {
        return false;
    }
    while x.is_multiple_of(p) {
        x /= p;
    }
    x == 1
}

/// Every part is a power of p.
pub fn is_p_special(r: &Partition, p: Prime) -> bool {
    r.parts().iter().all(|&x| is_p_power(x as u64, p.get()))
}

/// Q o g: each monomial t^e of G_l is the diagonal image of t_1...t_i, so it goes to
/// Q_i with the same variables identified.
pub fn compose_ch_operation(q: &CHOpData, g: &GData) -> Result<GData> {
    if g.m() != q.i {
        return Err(Error::DegreeMismatch {
            expected: q.i,
            found: g.m(),
        });
    }
    let ring = Ring::Fp(q.p);
    let g = g.to_ring(ring)?;
    let polys = (1..=q.j)
        .map(|l| {
            let target = VarTable::t(l);
            let mut acc = WeightedPoly::zero(ring, target.clone(), None);
            if let Some(gl) = g.g(l) {
                for (mono, c) in gl.terms() {
                    let map: Vec<usize> = mono
                        .exps()
                        .iter()
                        .enumerate()
                        .flat_map(|(v, &k)| std::iter::repeat_n(v, k as usize))
                        .collect();
                    acc = acc.add(&q.q.embed(&target, &map)?.scale(c))?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    GData::new(q.p, g.n(), q.j, ring, polys)
}

/// Result of a pivot-structure audit: unknowns that failed to be eliminated in
/// terms of unknowns of strictly larger arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotReport {
    pub checked: usize,
    pub failures: Vec<(u32, Partition)>,
}

impl PivotReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn audit(e: &Echelon, vars: &[(u32, Partition)], select: impl Fn(u32, &Partition) -> bool) -> PivotReport {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (c, (l, r)) in vars.iter().enumerate() {
        if !select(*l, r) {
            continue;
        }
        checked += 1;
        let ok = e
            .pivot_support(c)
            .is_some_and(|sup| sup.iter().all(|&s| vars[s].0 > *l));
        if !ok {
            failures.push((*l, r.clone()));
        }
    }
    PivotReport { checked, failures }
}

/// Over F_p every unknown at a partition that is not p-special must reduce to an
/// expression in unknowns of larger arity.
pub fn upper_triangular_check(f: &FormalGroupLaw, n: u32, m: u32) -> Result<PivotReport> {
    let p = f.p();
    let sys = build_system(f, n, m, Ring::Fp(p))?;
    let e = sys.echelon()?;
    Ok(audit(&e, &sys.vars, |_, r| !is_p_special(r, p)))
}

/// Within the gradable solutions, unknowns at p^n-special partitions having at least
/// p^n equal parts must reduce to unknowns of larger arity.
pub fn grad_coef_check(f: &FormalGroupLaw, n: u32, m: u32) -> Result<PivotReport> {
    let p = f.p();
    let pn = p.pow(n);
    let modulus = pn - 1;
    let sys = build_system(f, n, m, Ring::Fp(p))?;
    let mut e = sys.echelon()?;
    for (c, (_, r)) in sys.vars.iter().enumerate() {
        if !gradable_part(r, modulus) {
            let mut row = vec![Rational::zero(); sys.vars.len()];
            row[c] = Rational::one();
            e.insert(&row)?;
        }
    }
    let special = |r: &Partition| r.parts().iter().all(|&x| is_p_power(x as u64, pn));
    Ok(audit(&e, &sys.vars, |_, r| {
        special(r) && r.multiplicities().iter().any(|&(_, k)| k as u64 >= pn)
    }))
}

#[cfg(test)]
mod tests;
