//! Sparse weighted polynomials and truncated power series over Q, Z_(p) and F_p.
//!
//! A [`WeightedPoly`] carries a truncation bound: `Some(d)` means it is a power
//! series known only modulo terms of weight > d, `None` means an exact polynomial.
//! Terms are kept in a `BTreeMap` keyed by [`Mono`], whose order is total weight
//! first and then the exponent vector lexicographically.

mod partition;
mod serial;
mod series;
mod vars;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, int_mod, is_p_unit, reduce_mod_p, Fp, Prime, Rational};

pub use partition::{distinct_permutations, partitions_of, symmetrize, Partition};
pub use serial::PolyJson;
pub use series::{revert, revert_to};
pub use vars::{VarKind, VarTable, Vars};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Q,
    ZpLocal(Prime),
    Fp(Prime),
}

impl Ring {
    pub fn prime(self) -> Option<Prime> {
        match self {
            Ring::Q => None,
            Ring::ZpLocal(p) | Ring::Fp(p) => Some(p),
        }
    }

    /// Brings an arbitrary rational into this ring's canonical representation.
    pub fn coerce(self, q: &Rational) -> Result<Rational> {
        match self {
            Ring::Fp(p) => Ok(reduce_mod_p(q, p)?.to_rational()),
            _ => Ok(q.clone()),
        }
    }

    fn norm(self, q: Rational) -> Rational {
        match self {
            Ring::Fp(p) if q.denom().is_one() => {
                Rational::from_integer(q.numer().mod_floor(&p.big()))
            }
            Ring::Fp(p) => reduce_mod_p(&q, p)
                .expect("F_p arithmetic stays integral")
                .to_rational(),
            _ => q,
        }
    }

    pub fn inv(self, q: &Rational) -> Option<Rational> {
        match self {
            Ring::Q => (!q.is_zero()).then(|| q.recip()),
            Ring::ZpLocal(p) => is_p_unit(q, p).then(|| q.recip()),
            Ring::Fp(p) => Fp::new(p, int_mod(q.numer(), p.get()))
                .inv()
                .map(Fp::to_rational),
        }
    }

    pub fn tag(self) -> String {
        match self {
            Ring::Q => "q".into(),
            Ring::ZpLocal(p) => format!("zp({p})"),
            Ring::Fp(p) => format!("fp({p})"),
        }
    }
}

/// A monomial: its total weight and exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    weight: u32,
    exps: Vec<u32>,
}

impl Mono {
    pub fn new(vars: &VarTable, exps: Vec<u32>) -> Mono {
        let weight = exps.iter().zip(vars.weights()).map(|(e, w)| e * w).sum();
        Mono { weight, exps }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

pub(crate) fn min_bound(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn within(w: u32, bound: Option<u32>) -> bool {
    bound.is_none_or(|b| w <= b)
}

#[derive(Clone, Debug)]
pub struct WeightedPoly {
    ring: Ring,
    vars: Vars,
    terms: BTreeMap<Mono, Rational>,
    bound: Option<u32>,
}

impl PartialEq for WeightedPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.bound == other.bound
            && same_table(&self.vars, &other.vars)
            && self.terms == other.terms
    }
}

impl Eq for WeightedPoly {}

fn same_table(a: &Vars, b: &Vars) -> bool {
    std::sync::Arc::ptr_eq(a, b) || a == b
}

impl WeightedPoly {
    pub fn zero(ring: Ring, vars: Vars, bound: Option<u32>) -> Self {
        WeightedPoly {
            ring,
            vars,
            terms: BTreeMap::new(),
            bound,
        }
    }

    pub fn constant(ring: Ring, vars: Vars, c: Rational, bound: Option<u32>) -> Result<Self> {
        let n = vars.len();
        Self::from_terms(ring, vars, [(vec![0; n], c)], bound)
    }

    pub fn one(ring: Ring, vars: Vars, bound: Option<u32>) -> Self {
        Self::constant(ring, vars, Rational::one(), bound).expect("1 is in every ring")
    }

    pub fn var(ring: Ring, vars: Vars, i: usize, bound: Option<u32>) -> Self {
        let mut exps = vec![0; vars.len()];
        exps[i] = 1;
        Self::from_terms(ring, vars, [(exps, Rational::one())], bound).expect("valid variable")
    }

    /// Builds a polynomial from (exponent vector, coefficient) pairs; duplicates are summed
    /// and terms above the bound are dropped.
    pub fn from_terms<I>(ring: Ring, vars: Vars, terms: I, bound: Option<u32>) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut map: BTreeMap<Mono, Rational> = BTreeMap::new();
        for (exps, c) in terms {
            if exps.len() != vars.len() {
                return Err(Error::InvalidInput(format!(
                    "exponent vector of length {} for {} variables",
                    exps.len(),
                    vars.len()
                )));
            }
            let c = ring.coerce(&c)?;
            let m = Mono::new(&vars, exps);
            if within(m.weight, bound) {
                *map.entry(m).or_insert_with(Rational::zero) += c;
            }
        }
        Ok(Self::from_map(ring, vars, map, bound))
    }

    fn from_map(ring: Ring, vars: Vars, map: BTreeMap<Mono, Rational>, bound: Option<u32>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(m, _)| within(m.weight, bound))
            .map(|(m, c)| (m, ring.norm(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        WeightedPoly {
            ring,
            vars,
            terms,
            bound,
        }
    }

    fn from_hash(ring: Ring, vars: Vars, map: HashMap<Mono, Rational>, bound: Option<u32>) -> Self {
        Self::from_map(ring, vars, map.into_iter().collect(), bound)
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn bound(&self) -> Option<u32> {
        self.bound
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Rational)> + '_ {
        self.terms.iter()
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient_of(&self, exps: &[u32]) -> Rational {
        let m = Mono::new(&self.vars, exps.to_vec());
        self.terms.get(&m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient_of(&vec![0; self.vars.len()])
    }

    /// Smallest weight of a stored term.
    pub fn min_weight(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.weight)
    }

    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.weight)
    }

    /// Lower bound on the weight of every term of the true (untruncated) series.
    fn valuation_lower_bound(&self) -> Option<u32> {
        match (self.min_weight(), self.bound) {
            (Some(w), _) => Some(w),
            (None, Some(b)) => Some(b + 1),
            (None, None) => None,
        }
    }

    fn check_compat(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.tag(), other.ring.tag()));
        }
        if !same_table(&self.vars, &other.vars) {
            return Err(Error::TableMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let bound = min_bound(self.bound, other.bound);
        let mut map = self.terms.clone();
        for (m, c) in &other.terms {
            *map.entry(m.clone()).or_insert_with(Rational::zero) += c;
        }
        Ok(Self::from_map(self.ring, self.vars.clone(), map, bound))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let c = self.ring.coerce(c).unwrap_or_else(|_| c.clone());
        let map = self
            .terms
            .iter()
            .map(|(m, a)| (m.clone(), a * &c))
            .collect();
        Self::from_map(self.ring, self.vars.clone(), map, self.bound)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let bound = min_bound(self.bound, other.bound);
        let mut acc: HashMap<Mono, Rational> = HashMap::new();
        for (ma, ca) in &self.terms {
            if !within(ma.weight, bound) {
                break;
            }
            for (mb, cb) in &other.terms {
                let w = ma.weight + mb.weight;
                if !within(w, bound) {
                    break;
                }
                let exps = ma.exps.iter().zip(&mb.exps).map(|(x, y)| x + y).collect();
                *acc.entry(Mono { weight: w, exps })
                    .or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Ok(Self::from_hash(self.ring, self.vars.clone(), acc, bound))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.ring, self.vars.clone(), self.bound);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same table");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same table");
            }
        }
        acc
    }

    /// Lowers the truncation bound to `b` (never raises it).
    pub fn truncated(&self, b: u32) -> Self {
        let bound = min_bound(self.bound, Some(b));
        let map = self.terms.clone();
        Self::from_map(self.ring, self.vars.clone(), map, bound)
    }

    /// Forgets the truncation bound, treating the stored terms as an exact polynomial.
    pub fn into_exact(mut self) -> Self {
        self.bound = None;
        self
    }

    pub fn with_bound(mut self, bound: Option<u32>) -> Self {
        if let Some(b) = bound {
            self.terms.retain(|m, _| m.weight <= b);
        }
        self.bound = bound;
        self
    }

    /// The weight-`w` homogeneous part as an exact polynomial.
    pub fn homogeneous(&self, w: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.weight == w)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        WeightedPoly {
            ring: self.ring,
            vars: self.vars.clone(),
            terms,
            bound: None,
        }
    }

    /// Agreement of the stored terms up to weight `b`.
    pub fn agrees_upto(&self, other: &Self, b: u32) -> bool {
        self.ring == other.ring
            && same_table(&self.vars, &other.vars)
            && self
                .terms
                .iter()
                .filter(|(m, _)| m.weight <= b)
                .eq(other.terms.iter().filter(|(m, _)| m.weight <= b))
    }

    /// First term (in canonical order) where two polynomials differ up to weight `b`.
    pub fn first_difference(&self, other: &Self, b: u32) -> Option<(Vec<u32>, Rational, Rational)> {
        let keys: std::collections::BTreeSet<&Mono> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .filter(|m| m.weight <= b)
            .collect();
        keys.into_iter().find_map(|m| {
            let a = self.terms.get(m).cloned().unwrap_or_else(Rational::zero);
            let c = other.terms.get(m).cloned().unwrap_or_else(Rational::zero);
            (a != c).then(|| (m.exps.clone(), a, c))
        })
    }

    /// Changes coefficient ring; coefficients are coerced (reduced mod p for F_p).
    pub fn to_ring(&self, ring: Ring) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (m, c) in &self.terms {
            map.insert(m.clone(), ring.coerce(c)?);
        }
        Ok(Self::from_map(ring, self.vars.clone(), map, self.bound))
    }

    /// Re-labels variables: variable `i` becomes `target[map[i]]`. Weights are recomputed.
    pub fn embed(&self, target: &Vars, map: &[usize]) -> Result<Self> {
        if map.len() != self.vars.len() || map.iter().any(|&j| j >= target.len()) {
            return Err(Error::InvalidInput("bad variable map".into()));
        }
        let mut out: BTreeMap<Mono, Rational> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut exps = vec![0; target.len()];
            for (i, e) in m.exps.iter().enumerate() {
                exps[map[i]] += e;
            }
            *out.entry(Mono::new(target, exps))
                .or_insert_with(Rational::zero) += c;
        }
        let bound = if self.vars.weights().eq(map.iter().map(|&j| target.weight(j))) {
            self.bound
        } else if self.bound.is_some() {
            return Err(Error::InvalidInput("embedding a series must keep weights".into()));
        } else {
            None
        };
        Ok(Self::from_map(self.ring, target.clone(), out, bound))
    }

    /// Composition: substitutes `images[i]` (polynomials over `target`) for variable `i`.
    ///
    /// If `self` is a truncated series every image must have zero constant term; the
    /// result bound is derived from the weight growth of the images and capped by `cap`.
    pub fn compose(&self, target: &Vars, images: &[WeightedPoly], cap: Option<u32>) -> Result<Self> {
        if images.len() != self.vars.len() {
            return Err(Error::InvalidInput(format!(
                "{} images for {} variables",
                images.len(),
                self.vars.len()
            )));
        }
        for img in images {
            if img.ring != self.ring {
                return Err(Error::RingMismatch(self.ring.tag(), img.ring.tag()));
            }
            if !same_table(&img.vars, target) {
                return Err(Error::TableMismatch);
            }
        }
        let n = self.vars.len();
        let mut max_exp = vec![0u32; n];
        for m in self.terms.keys() {
            for (i, &e) in m.exps.iter().enumerate() {
                max_exp[i] = max_exp[i].max(e);
            }
        }
        let mut bound = cap;
        if let Some(df) = self.bound {
            let mut rho: Option<(u64, u64)> = None;
            for (i, img) in images.iter().enumerate() {
                if !img.constant_term().is_zero() {
                    return Err(Error::NonNilpotentSubstitution(self.vars.kind(i).name()));
                }
                if let Some(a) = img.valuation_lower_bound() {
                    let b = self.vars.weight(i) as u64;
                    let a = a as u64;
                    if rho.is_none_or(|(ra, rb)| a * rb < ra * b) {
                        rho = Some((a, b));
                    }
                }
            }
            if let Some((a, b)) = rho {
                let lim = (a * (df as u64 + 1)).div_ceil(b) - 1;
                bound = min_bound(bound, Some(lim.min(u32::MAX as u64) as u32));
            }
        }
        for (i, img) in images.iter().enumerate() {
            if max_exp[i] > 0 {
                bound = min_bound(bound, img.bound);
            }
        }
        let mut powers: Vec<Vec<WeightedPoly>> = Vec::with_capacity(n);
        for (i, img) in images.iter().enumerate() {
            let base = img.clone().with_bound(bound);
            let mut pw = vec![WeightedPoly::one(self.ring, target.clone(), bound)];
            for e in 1..=max_exp[i] {
                let next = if e == 1 {
                    base.clone()
                } else {
                    pw[e as usize - 1].mul(&base)?
                };
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc: HashMap<Mono, Rational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut lowest = 0u32;
            let mut vanishes = false;
            for (i, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    match powers[i][e as usize].min_weight() {
                        Some(w) => lowest += w,
                        None => vanishes = true,
                    }
                }
            }
            if vanishes || !within(lowest, bound) {
                continue;
            }
            let mut term: Option<WeightedPoly> = None;
            for (i, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    let f = &powers[i][e as usize];
                    term = Some(match term {
                        None => f.clone(),
                        Some(t) => t.mul(f)?,
                    });
                }
            }
            match term {
                None => {
                    *acc.entry(Mono::new(target, vec![0; target.len()]))
                        .or_insert_with(Rational::zero) += c;
                }
                Some(t) => {
                    for (tm, tc) in t.terms {
                        *acc.entry(tm).or_insert_with(Rational::zero) += tc * c;
                    }
                }
            }
        }
        Ok(Self::from_hash(self.ring, target.clone(), acc, bound))
    }

    /// Substitutes polynomials over the same table for some variables, keeping the rest.
    pub fn substitute(&self, assignment: &[(usize, WeightedPoly)]) -> Result<Self> {
        let mut images: Vec<WeightedPoly> = (0..self.vars.len())
            .map(|i| WeightedPoly::var(self.ring, self.vars.clone(), i, None))
            .collect();
        for (i, img) in assignment {
            if *i >= images.len() {
                return Err(Error::InvalidInput(format!("no variable {i}")));
            }
            images[*i] = img.clone();
        }
        self.compose(&self.vars.clone(), &images, None)
    }

    /// True iff invariant under every permutation of the listed variables.
    pub fn is_symmetric(&self, on: &[usize]) -> bool {
        on.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            self.terms.iter().all(|(m, c)| {
                let mut e = m.exps.clone();
                e.swap(a, b);
                let swapped = Mono::new(&self.vars, e);
                self.terms.get(&swapped) == Some(c)
            })
        })
    }

    /// Human-readable form such as `-(1/2)c2^2 - c1c3`.
    pub fn pretty(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = self.mono_name(m);
            if mono.is_empty() {
                out.push_str(&format_rational(&a));
            } else if a.is_one() {
                out.push_str(&mono);
            } else if a.denom().is_one() {
                out.push_str(&format!("{}{}", a.numer(), mono));
            } else {
                out.push_str(&format!("({}){}", format_rational(&a), mono));
            }
        }
        out
    }

    pub fn mono_name(&self, m: &Mono) -> String {
        let mut s = String::new();
        for (i, &e) in m.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            s.push_str(&self.vars.kind(i).name());
            if e > 1 {
                s.push_str(&format!("^{e}"));
            }
        }
        s
    }
}

impl fmt::Display for WeightedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

#[cfg(test)]
mod tests;
