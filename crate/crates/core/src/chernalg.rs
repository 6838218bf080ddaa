//! Symbolic Chern classes: the polynomials P_i with (log_F c_tot)_i = c_i - P_i,
//! their p-adic valuations, Cartan derivatives and discrete Taylor expansion.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, nu_p, p_power, reduce_mod_p, Prime, Rational, Valuation};
use crate::fgl::{FormalGroupLaw, MoravaLaw};
use crate::polyring::{Ring, VarKind, VarTable, WeightedPoly};

/// An exact polynomial in c_j^{(s)}, 1 <= s <= arity, 1 <= j <= degree, weight(c_j) = j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChernPoly {
    arity: u32,
    degree: u32,
    poly: WeightedPoly,
}

impl ChernPoly {
    pub fn zero(arity: u32, degree: u32) -> Self {
        ChernPoly {
            arity,
            degree,
            poly: WeightedPoly::zero(Ring::Q, VarTable::chern(arity, degree), None),
        }
    }

    pub fn index(degree: u32, j: u32, slot: u32) -> usize {
        ((slot - 1) * degree + (j - 1)) as usize
    }

    /// The symbol c_j in slot `slot`.
    pub fn c(arity: u32, degree: u32, j: u32, slot: u32) -> Self {
        let vars = VarTable::chern(arity, degree);
        ChernPoly {
            arity,
            degree,
            poly: WeightedPoly::var(Ring::Q, vars, Self::index(degree, j, slot), None),
        }
    }

    /// c_1 + ... + c_degree in the given slot.
    pub fn c_tot(arity: u32, degree: u32, slot: u32) -> Self {
        let mut acc = Self::zero(arity, degree);
        for j in 1..=degree {
            acc = acc.add(&Self::c(arity, degree, j, slot));
        }
        acc
    }

    pub fn from_poly(arity: u32, degree: u32, poly: WeightedPoly) -> Result<Self> {
        if poly.vars().as_ref() != VarTable::chern(arity, degree).as_ref() || poly.ring() != Ring::Q {
            return Err(Error::TableMismatch);
        }
        Ok(ChernPoly {
            arity,
            degree,
            poly: poly.into_exact(),
        })
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn poly(&self) -> &WeightedPoly {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        self.lift(self.poly.add(&o.poly).expect("same Chern table"))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.lift(self.poly.sub(&o.poly).expect("same Chern table"))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.lift(self.poly.mul(&o.poly).expect("same Chern table"))
    }

    pub fn scale(&self, a: &Rational) -> Self {
        self.lift(self.poly.scale(a))
    }

    pub fn pow(&self, e: u32) -> Self {
        self.lift(self.poly.pow(e))
    }

    fn lift(&self, poly: WeightedPoly) -> Self {
        ChernPoly {
            arity: self.arity,
            degree: self.degree,
            poly,
        }
    }

    pub fn homogeneous(&self, w: u32) -> Self {
        self.lift(self.poly.homogeneous(w))
    }

    /// Smallest p-adic valuation of a coefficient; infinite for zero.
    pub fn valuation(&self, p: Prime) -> Valuation {
        self.poly
            .terms()
            .map(|(_, c)| nu_p(c, p))
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    /// Moves slot s to `slot_map[s - 1]` in a table of arity `new_arity`.
    pub fn relabel(&self, new_arity: u32, slot_map: &[u32]) -> Self {
        let target = VarTable::chern(new_arity, self.degree);
        let map: Vec<usize> = (0..self.poly.vars().len())
            .map(|i| match self.poly.vars().kind(i) {
                VarKind::Chern { index, slot } => {
                    Self::index(self.degree, *index, slot_map[*slot as usize - 1])
                }
                _ => unreachable!("Chern table"),
            })
            .collect();
        ChernPoly {
            arity: new_arity,
            degree: self.degree,
            poly: self.poly.embed(&target, &map).expect("valid slot map"),
        }
    }

    /// Keeps only terms built from c_s with s = j mod (p^n - 1) (all other c_s set to zero).
    pub fn specialize_component(&self, j: u64, modulus: u64) -> Self {
        let vars = self.poly.vars().clone();
        let keep = |i: usize| match vars.kind(i) {
            VarKind::Chern { index, .. } => (*index as u64) % modulus == j % modulus,
            _ => false,
        };
        let terms = self
            .poly
            .terms()
            .filter(|(m, _)| m.exps().iter().enumerate().all(|(i, &e)| e == 0 || keep(i)))
            .map(|(m, c)| (m.exps().to_vec(), c.clone()));
        self.lift(WeightedPoly::from_terms(Ring::Q, vars.clone(), terms, None).expect("same table"))
    }

    /// Substitutes a polynomial over `target` for every symbol c_j^{(s)}.
    pub fn evaluate(
        &self,
        target: &crate::polyring::Vars,
        ring: Ring,
        value: impl Fn(u32, u32) -> WeightedPoly,
    ) -> Result<WeightedPoly> {
        let images: Vec<WeightedPoly> = self
            .poly
            .vars()
            .kinds()
            .map(|k| match k {
                VarKind::Chern { index, slot } => value(*index, *slot),
                _ => unreachable!("Chern table"),
            })
            .collect();
        self.poly.to_ring(ring)?.compose(target, &images, None)
    }

    pub fn pretty(&self) -> String {
        self.poly.pretty()
    }
}

impl std::fmt::Display for ChernPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.pretty())
    }
}

/// Specialization c_s -> 0 for s not congruent to j mod (p^n - 1).
pub fn specialize_component(pol: &ChernPoly, j: u64, p: Prime, n: u32) -> ChernPoly {
    pol.specialize_component(j, p.pow(n) - 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogComponentResult {
    pub i: u32,
    pub p_i: ChernPoly,
    pub nu: Valuation,
    pub mu: u32,
}

impl LogComponentResult {
    /// One-line summary, e.g. `P_2 = -(1/2)c1^2, nu = -1, mu = 1`.
    pub fn pretty_line(&self) -> String {
        format!("P_{} = {}, nu = {}, mu = {}", self.i, self.p_i, self.nu, self.mu)
    }
}

fn mu_of(nu: Valuation) -> u32 {
    match nu {
        Valuation::Finite(v) if v < 0 => (-v) as u32,
        _ => 0,
    }
}

/// Weight components of f(c_1 + c_2 + ... ) up to `i_max`, for a univariate series f.
fn components_of(f: &WeightedPoly, i_max: u32) -> Result<WeightedPoly> {
    let table = VarTable::chern(1, i_max);
    let c_tot = ChernPoly::c_tot(1, i_max, 1).poly.with_bound(Some(i_max));
    let out = f.compose(&table, &[c_tot], Some(i_max))?;
    match out.bound() {
        Some(b) if b < i_max => Err(Error::TruncationTooSmall {
            bound: b,
            needed: i_max as u64,
        }),
        _ => Ok(out),
    }
}

/// P_i for 1 <= i <= i_max from a formal group law logarithm.
pub fn log_components(log: &WeightedPoly, p: Prime, i_max: u32) -> Result<Vec<LogComponentResult>> {
    let comp = components_of(log, i_max)?;
    Ok((1..=i_max)
        .map(|i| {
            let ci = ChernPoly::c(1, i_max, i, 1);
            let part = ChernPoly {
                arity: 1,
                degree: i_max,
                poly: comp.homogeneous(i),
            };
            let p_i = ci.sub(&part);
            let nu = p_i.valuation(p);
            LogComponentResult {
                i,
                p_i,
                nu,
                mu: mu_of(nu),
            }
        })
        .collect())
}

/// The integral polynomials P_n = n [-log(1 - c_tot)]_n of the K_0 Chern character.
pub fn k0_log_components(i_max: u32) -> Result<Vec<ChernPoly>> {
    let series = WeightedPoly::from_terms(
        Ring::Q,
        VarTable::x(),
        (1..=i_max).map(|k| (vec![k], Rational::new(BigInt::one(), BigInt::from(k)))),
        Some(i_max),
    )?;
    let comp = components_of(&series, i_max)?;
    (1..=i_max)
        .map(|n| {
            let pn = ChernPoly {
                arity: 1,
                degree: i_max,
                poly: comp.homogeneous(n).scale(&Rational::from_integer(BigInt::from(n))),
            };
            let mut content = BigInt::zero();
            for (_, c) in pn.poly.terms() {
                if !c.denom().is_one() {
                    return Err(Error::IntegralityFailure(format!(
                        "K_0 polynomial P_{n} has coefficient {}",
                        format_rational(c)
                    )));
                }
                content = content.gcd(c.numer());
            }
            if !content.is_one() {
                return Err(Error::IntegralityFailure(format!(
                    "K_0 polynomial P_{n} has content {content}"
                )));
            }
            Ok(pn)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub i: u32,
    pub k: u32,
    pub v: u32,
    /// nu_p(P_i) before specialization.
    pub nu: Valuation,
    /// nu_p of the specialization of P_i to its own component.
    pub nu_specialized: Valuation,
    /// Scalar a in F_p^x with p^k P~_i = a (c_v - P~_v)^(p^(nk)) mod p, when k > 0.
    pub scalar: Option<u64>,
}

/// Writes i = p^(nk) v with p^n not dividing v.
pub fn split_index(i: u32, pn: u64) -> (u32, u32) {
    let mut k = 0;
    let mut v = i as u64;
    while v.is_multiple_of(pn) {
        v /= pn;
        k += 1;
    }
    (k, v as u32)
}

/// Executes the valuation lemma for P_i: off-component specializations vanish,
/// nu_p(P~_i) >= -k, and for k > 0 equality plus proportionality mod p.
pub fn lemma_valuation_checks(m: &MoravaLaw, comps: &[LogComponentResult], i: u32) -> Result<LemmaReport> {
    let p = m.p();
    let modulus = m.modulus();
    let (k, v) = split_index(i, m.pn());
    let get = |j: u32| {
        comps
            .iter()
            .find(|c| c.i == j)
            .ok_or_else(|| Error::InvalidInput(format!("P_{j} not computed")))
    };
    let pi = &get(i)?.p_i;
    for j in 0..modulus {
        if j != i as u64 % modulus {
            let s = pi.specialize_component(j, modulus);
            let first = s
                .poly
                .terms()
                .next()
                .map(|(mono, c)| (s.poly.mono_name(mono), format_rational(c)));
            if let Some((mono, c)) = first {
                return Err(Error::LemmaViolation(format!(
                    "P_{i} specialized to component {j} keeps {mono} with coefficient {c}"
                )));
            }
        }
    }
    let ptilde = pi.specialize_component(i as u64, modulus);
    let nu_t = ptilde.valuation(p);
    if nu_t < Valuation::Finite(-(k as i64)) {
        return Err(Error::LemmaViolation(format!(
            "nu_p(P~_{i}) = {nu_t} < -{k}"
        )));
    }
    let mut scalar = None;
    if k > 0 {
        if nu_t != Valuation::Finite(-(k as i64)) {
            return Err(Error::LemmaViolation(format!(
                "nu_p(P~_{i}) = {nu_t}, expected -{k}"
            )));
        }
        let fp = Ring::Fp(p);
        let lhs = ptilde.poly.scale(&p_power(p, k as i64)).to_ring(fp)?;
        let pv = get(v)?.p_i.specialize_component(v as u64, modulus);
        let base = ChernPoly::c(1, pi.degree, v, 1).sub(&pv);
        let rhs = base.poly.to_ring(fp)?.pow(p.pow(m.n() * k) as u32);
        let (mono, a) = lhs.terms().next().expect("valuation finite so nonzero");
        let b = rhs.coefficient_of(mono.exps());
        let ratio = (|| {
            let bi = fp.inv(&b)?;
            Some(reduce_mod_p(&(a * bi), p).ok()?.value())
        })();
        match ratio {
            Some(s) if rhs.scale(&Rational::from_integer(BigInt::from(s))) == lhs => scalar = Some(s),
            _ => {
                return Err(Error::LemmaViolation(format!(
                    "p^{k} P~_{i} is not proportional to (c_{v} - P~_{v})^(p^{}) mod p",
                    m.n() * k
                )))
            }
        }
    }
    Ok(LemmaReport {
        i,
        k,
        v,
        nu: pi.valuation(p),
        nu_specialized: nu_t,
        scalar,
    })
}

/// The two-slot polynomials dc_j = [F(c_tot', c_tot'')]_j - c_j' - c_j'' for j <= degree.
#[derive(Clone, Debug)]
pub struct CartanTables {
    degree: u32,
    d: Vec<ChernPoly>,
}

impl CartanTables {
    pub fn new(f: &FormalGroupLaw, degree: u32) -> Result<Self> {
        if f.bound() < degree {
            return Err(Error::TruncationTooSmall {
                bound: f.bound(),
                needed: degree as u64,
            });
        }
        let t1 = ChernPoly::c_tot(2, degree, 1).poly.with_bound(Some(degree));
        let t2 = ChernPoly::c_tot(2, degree, 2).poly.with_bound(Some(degree));
        let s = f.add_series(&t1, &t2)?;
        let d = (1..=degree)
            .map(|j| {
                let part = ChernPoly {
                    arity: 2,
                    degree,
                    poly: s.homogeneous(j),
                };
                part.sub(&ChernPoly::c(2, degree, j, 1))
                    .sub(&ChernPoly::c(2, degree, j, 2))
            })
            .collect();
        Ok(CartanTables { degree, d })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// dc_j as a two-slot polynomial.
    pub fn dc(&self, j: u32) -> &ChernPoly {
        &self.d[j as usize - 1]
    }
}

/// Discrete derivative of `pol` in slot `slot`, as a polynomial with one more slot:
/// (dP)(.., x, .., y) = P(.., x + y, ..) - P(.., x, ..) - P(.., y, ..), where the new
/// argument y occupies the last slot and c_j(x + y) = c_j(x) + c_j(y) + dc_j(x, y).
pub fn cartan_derivative(pol: &ChernPoly, slot: u32, tables: &CartanTables) -> Result<ChernPoly> {
    let (r, deg) = (pol.arity, pol.degree);
    if slot == 0 || slot > r {
        return Err(Error::InvalidInput(format!("slot {slot} outside 1..={r}")));
    }
    if deg > tables.degree {
        return Err(Error::TruncationTooSmall {
            bound: tables.degree,
            needed: deg as u64,
        });
    }
    let new = r + 1;
    let same: Vec<u32> = (1..=r).collect();
    let moved: Vec<u32> = (1..=r).map(|s| if s == slot { new } else { s }).collect();
    let table = VarTable::chern(new, deg);
    let images: Vec<WeightedPoly> = (1..=r)
        .flat_map(|s| (1..=deg).map(move |j| (s, j)))
        .map(|(s, j)| {
            let c = ChernPoly::c(new, deg, j, s);
            if s != slot {
                return c.poly;
            }
            let dc = restrict_degree(tables.dc(j), deg).relabel(new, &[slot, new]);
            c.add(&ChernPoly::c(new, deg, j, new)).add(&dc).poly
        })
        .collect();
    let shifted = pol.poly.compose(&table, &images, None)?;
    let out = ChernPoly {
        arity: new,
        degree: deg,
        poly: shifted,
    };
    Ok(out.sub(&pol.relabel(new, &same)).sub(&pol.relabel(new, &moved)))
}

/// Re-expresses a polynomial using only c_j with j <= deg (all its terms must allow it).
fn restrict_degree(pol: &ChernPoly, deg: u32) -> ChernPoly {
    if pol.degree == deg {
        return pol.clone();
    }
    let target = VarTable::chern(pol.arity, deg);
    let terms = pol.poly.terms().filter_map(|(m, c)| {
        let mut exps = vec![0; target.len()];
        for (i, &e) in m.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let VarKind::Chern { index, slot } = pol.poly.vars().kind(i) else {
                unreachable!()
            };
            if *index > deg {
                return None;
            }
            exps[ChernPoly::index(deg, *index, *slot)] = e;
        }
        Some((exps, c.clone()))
    });
    ChernPoly {
        arity: pol.arity,
        degree: deg,
        poly: WeightedPoly::from_terms(Ring::Q, target.clone(), terms, None).expect("table"),
    }
}

/// Iterated derivatives d^s P, s = 0..=max_s, each taken in the last slot.
pub fn derivative_tower(pol: &ChernPoly, max_s: u32, tables: &CartanTables) -> Result<Vec<ChernPoly>> {
    let mut out = vec![pol.clone()];
    for _ in 0..max_s {
        let last = out.last().expect("nonempty");
        let next = cartan_derivative(last, last.arity, tables)?;
        out.push(next);
    }
    Ok(out)
}

/// f(a_1 + ... + a_k) = sum over nonempty J of d^{|J|-1} f(a_j : j in J).
pub fn discrete_taylor<A, T>(
    args: &[A],
    mut deriv: impl FnMut(&[&A]) -> Result<T>,
    zero: T,
    mut add: impl FnMut(T, T) -> Result<T>,
) -> Result<T> {
    if args.len() >= usize::BITS as usize {
        return Err(Error::InvalidInput("too many Taylor arguments".into()));
    }
    let mut acc = zero;
    for mask in 1usize..(1 << args.len()) {
        let subset: Vec<&A> = (0..args.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| &args[i])
            .collect();
        acc = add(acc, deriv(&subset)?)?;
    }
    Ok(acc)
}

/// Whether a rational polynomial has all coefficients in Z.
pub fn is_integral_poly(pol: &ChernPoly) -> bool {
    pol.poly.terms().all(|(_, c)| c.denom().is_one())
}

/// Sign-aware helper used in reports: "-(1/2)c1^2" style.
pub fn pretty_coefficient(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else if c.is_negative() {
        format!("-({})", format_rational(&-c))
    } else {
        format!("({})", format_rational(c))
    }
}
