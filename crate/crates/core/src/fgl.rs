//! One-dimensional formal group laws given by a logarithm, and the Morava K-theory laws.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    format_rational, is_p_integral, is_p_unit, p_power, rat, reduce_mod_p, Fp, Prime, Rational,
};
use crate::polyring::{revert_to, Ring, VarTable, Vars, WeightedPoly};

/// A formal group law over Q truncated at total degree `bound`, with its logarithm,
/// exponential, formal inverse and coefficient table a_ij, all filled at construction.
#[derive(Clone, Debug)]
pub struct FormalGroupLaw {
    p: Prime,
    bound: u32,
    log: WeightedPoly,
    exp: WeightedPoly,
    inverse: WeightedPoly,
    law: WeightedPoly,
    coeffs: BTreeMap<(u32, u32), Rational>,
}

fn x_var(bound: u32) -> WeightedPoly {
    WeightedPoly::var(Ring::Q, VarTable::x(), 0, Some(bound))
}

pub fn fgl_from_log(log: &WeightedPoly, p: Prime, bound: u32) -> Result<FormalGroupLaw> {
    if log.ring() != Ring::Q || log.vars().len() != 1 || log.vars().weight(0) != 1 {
        return Err(Error::InvalidInput(
            "logarithm must be a univariate series over Q".into(),
        ));
    }
    if !log.constant_term().is_zero() || !log.coefficient_of(&[1]).is_one() {
        return Err(Error::NotNormalized(log.pretty()));
    }
    if log.bound().is_some_and(|b| b < bound) {
        return Err(Error::TruncationTooSmall {
            bound: log.bound().unwrap_or(0),
            needed: bound as u64,
        });
    }
    let log = log.truncated(bound).with_bound(Some(bound));
    let exp = revert_to(&log, bound)?;
    let xy = VarTable::xy();
    let lx = log.embed(&xy, &[0])?;
    let ly = log.embed(&xy, &[1])?;
    let law = exp.compose(&xy, &[lx.add(&ly)?], Some(bound))?;
    let coeffs = law
        .terms()
        .map(|(m, c)| ((m.exps()[0], m.exps()[1]), c.clone()))
        .collect();
    let inverse = solve_inverse(&law, bound)?;
    Ok(FormalGroupLaw {
        p,
        bound,
        log,
        exp,
        inverse,
        law,
        coeffs,
    })
}

/// The series i(x) with F(x, i(x)) = 0, solved degree by degree from F alone.
fn solve_inverse(law: &WeightedPoly, bound: u32) -> Result<WeightedPoly> {
    let x = x_var(bound);
    let mut iota = x.neg();
    for d in 2..=bound {
        let r = law.compose(&VarTable::x(), &[x.clone(), iota.clone()], Some(bound))?;
        let c = r.coefficient_of(&[d]);
        if !c.is_zero() {
            let corr = WeightedPoly::from_terms(Ring::Q, VarTable::x(), [(vec![d], -c)], Some(bound))?;
            iota = iota.add(&corr)?;
        }
    }
    Ok(iota)
}

impl FormalGroupLaw {
    /// F_a(x, y) = x + y.
    pub fn additive(p: Prime, bound: u32) -> Result<Self> {
        fgl_from_log(&x_var(bound), p, bound)
    }

    /// F_m(x, y) = x + y + xy, with logarithm log(1 + x).
    pub fn multiplicative(p: Prime, bound: u32) -> Result<Self> {
        let terms = (1..=bound as i64).map(|k| {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            (vec![k as u32], Rational::new(BigInt::from(sign), BigInt::from(k)))
        });
        let log = WeightedPoly::from_terms(Ring::Q, VarTable::x(), terms, Some(bound))?;
        fgl_from_log(&log, p, bound)
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn log(&self) -> &WeightedPoly {
        &self.log
    }

    pub fn exp(&self) -> &WeightedPoly {
        &self.exp
    }

    /// F(x, y) over the table (x, y).
    pub fn law(&self) -> &WeightedPoly {
        &self.law
    }

    /// The univariate formal inverse series.
    pub fn inverse_series(&self) -> &WeightedPoly {
        &self.inverse
    }

    pub fn coeffs(&self) -> &BTreeMap<(u32, u32), Rational> {
        &self.coeffs
    }

    /// a_ij, zero when absent; only meaningful for i + j <= bound.
    pub fn a(&self, i: u32, j: u32) -> Rational {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    /// F(x, y) with both arguments polynomials over a common table.
    pub fn add_series(&self, s: &WeightedPoly, t: &WeightedPoly) -> Result<WeightedPoly> {
        let law = self.law.to_ring(s.ring())?;
        law.compose(s.vars(), &[s.clone(), t.clone()], None)
    }

    /// [k]_F applied to a series s.
    pub fn k_series_of(&self, k: i64, s: &WeightedPoly) -> Result<WeightedPoly> {
        k_series(self, k)?.to_ring(s.ring())?.compose(s.vars(), std::slice::from_ref(s), None)
    }

    /// [a]_F(s) = exp(a log s) for a rational a; for a in Z_(p) this stays p-integral.
    pub fn rational_multiple_of(&self, a: &Rational, s: &WeightedPoly) -> Result<WeightedPoly> {
        let inner = self.log.scale(a);
        let series = self.exp.compose(&VarTable::x(), &[inner], Some(self.bound))?;
        series.to_ring(s.ring())?.compose(s.vars(), std::slice::from_ref(s), None)
    }
}

/// Iterated F-sum of the given series; every term must have zero constant term.
pub fn formal_sum(f: &FormalGroupLaw, terms: &[WeightedPoly]) -> Result<WeightedPoly> {
    let (first, rest) = terms
        .split_first()
        .ok_or_else(|| Error::InvalidInput("formal sum of no terms".into()))?;
    for t in terms {
        if !t.constant_term().is_zero() {
            return Err(Error::NonNilpotentSubstitution("formal sum term".into()));
        }
    }
    let mut acc = first.clone();
    for t in rest {
        acc = f.add_series(&acc, t)?;
    }
    Ok(acc)
}

pub fn formal_inverse(f: &FormalGroupLaw, s: &WeightedPoly) -> Result<WeightedPoly> {
    if !s.constant_term().is_zero() {
        return Err(Error::NonNilpotentSubstitution("formal inverse argument".into()));
    }
    f.inverse
        .to_ring(s.ring())?
        .compose(s.vars(), std::slice::from_ref(s), None)
}

/// [k]x as a univariate series; negative k goes through the formal inverse.
pub fn k_series(f: &FormalGroupLaw, k: i64) -> Result<WeightedPoly> {
    let xv = VarTable::x();
    match k {
        0 => Ok(WeightedPoly::zero(Ring::Q, xv, Some(f.bound))),
        k if k > 0 => f.exp.compose(&xv, &[f.log.scale(&rat(k))], Some(f.bound)),
        k => {
            let pos = k_series(f, -k)?;
            f.inverse.compose(&xv, &[pos], Some(f.bound))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightReport {
    pub holds: bool,
    /// Coefficient of x^(p^n) in [p]x mod p, as its least non-negative residue.
    pub unit: u64,
    /// [p]x mod p as (degree, residue) pairs.
    pub p_series_mod_p: Vec<(u32, u64)>,
}

pub fn check_height(f: &FormalGroupLaw, n: u32) -> Result<HeightReport> {
    let pn = f.p.pow(n);
    if (f.bound as u64) < pn {
        return Err(Error::TruncationTooSmall {
            bound: f.bound,
            needed: pn,
        });
    }
    let ps = k_series(f, f.p.get() as i64)?.to_ring(Ring::Fp(f.p))?;
    let residues: Vec<(u32, u64)> = ps
        .terms()
        .map(|(m, c)| {
            (
                m.exps()[0],
                reduce_mod_p(c, f.p).expect("already reduced").value(),
            )
        })
        .collect();
    let below = residues.iter().any(|(e, _)| (*e as u64) < pn);
    let unit = residues
        .iter()
        .find(|(e, _)| *e as u64 == pn)
        .map_or(0, |(_, u)| *u);
    Ok(HeightReport {
        holds: !below && unit != 0,
        unit,
        p_series_mod_p: residues,
    })
}

/// True iff every nonzero a_ij has i + j = 1 mod (p^n - 1).
pub fn check_morava_grading(f: &FormalGroupLaw, p: Prime, n: u32) -> bool {
    let modulus = p.pow(n) - 1;
    f.coeffs
        .keys()
        .all(|(i, j)| (*i as u64 + *j as u64) % modulus == 1 % modulus)
}

/// True iff gamma(F_src(x, y)) = F_tgt(gamma(x), gamma(y)) up to the common bound.
pub fn fgl_morphism_check(
    gamma: &WeightedPoly,
    src: &FormalGroupLaw,
    tgt: &FormalGroupLaw,
) -> Result<bool> {
    if !gamma.constant_term().is_zero() {
        return Err(Error::NonNilpotentSubstitution("morphism".into()));
    }
    let d = gamma
        .bound()
        .unwrap_or(u32::MAX)
        .min(src.bound)
        .min(tgt.bound);
    let xy = VarTable::xy();
    let lhs = gamma.compose(&xy, std::slice::from_ref(&src.law), Some(d))?;
    let gx = gamma.embed(&xy, &[0])?;
    let gy = gamma.embed(&xy, &[1])?;
    let rhs = tgt.law.compose(&xy, &[gx, gy], Some(d))?;
    Ok(lhs.agrees_upto(&rhs, d))
}

/// A Morava K-theory law: logarithm x + sum_i (a_i / p^i) x^(p^(n i)) with p-unit a_i.
#[derive(Clone, Debug)]
pub struct MoravaLaw {
    n: u32,
    a_seq: Vec<Rational>,
    fgl: FormalGroupLaw,
}

/// a_i from an explicit prefix; missing entries default to a_1^i (all ones when empty).
fn a_entry(a_seq: &[Rational], i: u32) -> Rational {
    match a_seq.get(i as usize - 1) {
        Some(a) => a.clone(),
        None => {
            let a1 = a_seq.first().cloned().unwrap_or_else(Rational::one);
            num_traits::pow(a1, i as usize)
        }
    }
}

pub fn morava_log(p: Prime, n: u32, a_seq: &[Rational], bound: u32) -> Result<WeightedPoly> {
    if n == 0 {
        return Err(Error::InvalidInput("height n must be at least 1".into()));
    }
    for a in a_seq {
        if !is_p_unit(a, p) {
            return Err(Error::NotAUnit {
                value: format_rational(a),
                p: p.get(),
            });
        }
    }
    let mut terms = vec![(vec![1], Rational::one())];
    let mut i = 1u32;
    loop {
        let deg = (p.get() as u128).checked_pow(n * i);
        match deg {
            Some(d) if d <= bound as u128 => {
                terms.push((vec![d as u32], a_entry(a_seq, i) / p_power(p, i as i64)));
            }
            _ => break,
        }
        i += 1;
    }
    WeightedPoly::from_terms(Ring::Q, VarTable::x(), terms, Some(bound))
}

impl MoravaLaw {
    /// Builds the law and checks that the Araki generators it determines are p-integral.
    pub fn new(p: Prime, n: u32, a_seq: &[Rational], bound: u32) -> Result<Self> {
        let log = morava_log(p, n, a_seq, bound)?;
        let fgl = fgl_from_log(&log, p, bound)?;
        let law = MoravaLaw {
            n,
            a_seq: a_seq.to_vec(),
            fgl,
        };
        let mut top = 0;
        while (p.get() as u128).pow(top + 1) <= bound as u128 {
            top += 1;
        }
        araki_v(&law, top.max(2 * n))?;
        Ok(law)
    }

    pub fn lubin_tate(p: Prime, n: u32, bound: u32) -> Result<Self> {
        Self::new(p, n, &[], bound)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> Prime {
        self.fgl.p
    }

    pub fn bound(&self) -> u32 {
        self.fgl.bound
    }

    pub fn fgl(&self) -> &FormalGroupLaw {
        &self.fgl
    }

    /// The a-sequence exactly as supplied.
    pub fn a_seq(&self) -> &[Rational] {
        &self.a_seq
    }

    pub fn a(&self, i: u32) -> Rational {
        a_entry(&self.a_seq, i)
    }

    /// p^n - 1, the grading modulus.
    pub fn modulus(&self) -> u64 {
        self.p().pow(self.n) - 1
    }

    /// p^n.
    pub fn pn(&self) -> u64 {
        self.p().pow(self.n)
    }
}

/// Araki generators v_1..v_up_to from p l_m = sum_{i<m} l_i v_{m-i}^(p^i) + p^(p^m) l_m.
pub fn araki_v(m: &MoravaLaw, up_to: u32) -> Result<Vec<Rational>> {
    let p = m.p();
    let l = |i: u32| -> Rational {
        if i == 0 {
            Rational::one()
        } else if i.is_multiple_of(m.n) {
            m.a(i / m.n) / p_power(p, (i / m.n) as i64)
        } else {
            Rational::zero()
        }
    };
    let mut v: Vec<Rational> = Vec::with_capacity(up_to as usize);
    for mm in 1..=up_to {
        let pm = p.big().pow(mm);
        let big = num_traits::pow(
            Rational::from_integer(p.big()),
            usize::try_from(&pm - BigInt::one()).map_err(|_| {
                Error::InvalidInput("Araki index too large".into())
            })?,
        );
        let mut val = Rational::from_integer(p.big()) * (Rational::one() - big) * l(mm);
        for i in 1..mm {
            let li = l(i);
            if !li.is_zero() {
                let e = p.get().pow(i) as usize;
                val -= li * num_traits::pow(v[(mm - i - 1) as usize].clone(), e);
            }
        }
        if !is_p_integral(&val, p) {
            return Err(Error::ArakiInconsistent {
                index: mm,
                value: format_rational(&val),
                p: p.get(),
            });
        }
        v.push(val);
    }
    Ok(v)
}

/// Residues of the Araki generators mod p.
pub fn araki_residues(v: &[Rational], p: Prime) -> Vec<Fp> {
    v.iter()
        .map(|x| reduce_mod_p(x, p).expect("checked integral"))
        .collect()
}

/// exp_{F_m}(log_{K(1)}(x)) for the Lubin-Tate K(1) law: the Artin-Hasse isomorphism.
pub fn artin_hasse(p: Prime, bound: u32) -> Result<(WeightedPoly, MoravaLaw, FormalGroupLaw)> {
    let k1 = MoravaLaw::lubin_tate(p, 1, bound)?;
    let fm = FormalGroupLaw::multiplicative(p, bound)?;
    let gamma = fm
        .exp()
        .compose(&VarTable::x(), &[k1.fgl().log().clone()], Some(bound))?;
    Ok((gamma, k1, fm))
}

/// True iff every coefficient is p-integral.
pub fn is_integral(f: &WeightedPoly, p: Prime) -> bool {
    f.terms().all(|(_, c)| is_p_integral(c, p))
}

pub fn xy_table() -> Vars {
    VarTable::xy()
}
