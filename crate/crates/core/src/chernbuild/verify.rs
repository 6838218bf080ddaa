//! Verification suites for a constructed set of Chern classes.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use super::ChernClassSet;
use crate::caot::{compose_ch_operation, evaluate_linear, is_gradable, CHOpData, Echelon, GData};
use crate::chernalg::{derivative_tower, discrete_taylor, split_index, CartanTables, ChernPoly};
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, Prime, Rational};
use crate::fgl::{formal_inverse, formal_sum};
use crate::polyring::{partitions_of, Partition, Ring, VarTable, WeightedPoly};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub subject: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.into(),
            checks: Vec::new(),
        }
    }

    fn push(&mut self, subject: String, pass: bool, detail: String) {
        self.checks.push(CheckResult {
            subject,
            pass,
            detail,
        });
    }
}

/// G_l(c_i) = 0 unless l = i mod (p^n - 1).
pub fn verify_support(cset: &ChernClassSet) -> SuiteReport {
    let modulus = cset.law().modulus();
    let mut report = SuiteReport::new("support");
    for e in cset.entries() {
        let i = e.i;
        let witness = (1..=i)
            .filter(|&l| !(l as u64 + modulus - i as u64 % modulus).is_multiple_of(modulus))
            .find_map(|l| {
                let g = e.c.g(l)?;
                let (mono, c) = g.terms().next()?;
                Some(format!(
                    "G_{l} has {} with coefficient {}",
                    g.mono_name(mono),
                    format_rational(c)
                ))
            });
        let pass = witness.is_none();
        let detail = witness.unwrap_or_else(|| "zero off its component".into());
        report.push(format!("c_{i}"), pass, detail);
    }
    report
}

/// Every exponent of every monomial of every G_l(c_i) is 1 mod (p^n - 1).
pub fn verify_gradable(cset: &ChernClassSet) -> SuiteReport {
    let modulus = cset.law().modulus();
    let mut report = SuiteReport::new("gradable");
    for e in cset.entries() {
        let pass = is_gradable(&e.c);
        let detail = if pass {
            "gradable".to_string()
        } else {
            e.c.polys()
                .iter()
                .find_map(|g| {
                    g.terms()
                        .find(|(m, _)| m.exps().iter().any(|&x| x as u64 % modulus != 1 % modulus))
                        .map(|(m, _)| format!("monomial {}", g.mono_name(m)))
                })
                .unwrap_or_default()
        };
        report.push(format!("c_{}", e.i), pass, detail);
    }
    report
}

/// Values of c_tot on classes, through the discrete Taylor expansion: each class is
/// split into signed monomials, c_j is known on a single monomial from its G-data
/// (and on -z^e through the formal inverse), and the iterated Cartan derivatives
/// combine them.
struct TaylorEvaluator<'a> {
    cset: &'a ChernClassSet,
    tables: CartanTables,
    /// towers[j - 1][s] = d^s c_j.
    towers: Vec<Vec<ChernPoly>>,
}

impl<'a> TaylorEvaluator<'a> {
    fn new(cset: &'a ChernClassSet) -> Result<Self> {
        let d = cset.degree();
        Ok(TaylorEvaluator {
            cset,
            tables: CartanTables::new(cset.law().fgl(), d)?,
            towers: (1..=d).map(|j| vec![ChernPoly::c(1, d, j, 1)]).collect(),
        })
    }

    fn derivative(&mut self, j: u32, s: usize) -> Result<&ChernPoly> {
        let tower = &mut self.towers[j as usize - 1];
        if tower.len() <= s {
            let base = tower.last().expect("nonempty").clone();
            let extra = derivative_tower(&base, (s + 1 - tower.len()) as u32, &self.tables)?;
            tower.extend(extra.into_iter().skip(1));
        }
        Ok(&self.towers[j as usize - 1][s])
    }

    /// c_1(a), .., c_D(a) for a = +-z^e.
    fn monomial_values(&self, exps: &[u32], negative: bool) -> Result<Vec<WeightedPoly>> {
        let nz = exps.len() as u32;
        let d = self.cset.degree();
        let class = WeightedPoly::from_terms(Ring::Q, VarTable::z(nz), [(exps.to_vec(), Rational::one())], None)?;
        let values = (1..=d)
            .map(|j| {
                let g = self.cset.c(j).expect("j <= degree").to_ring(Ring::Q)?;
                evaluate_linear(&g, &class)
            })
            .collect::<Result<Vec<_>>>()?;
        if !negative {
            return Ok(values);
        }
        let mut tot = WeightedPoly::zero(Ring::Q, VarTable::t(nz), Some(d));
        for v in &values {
            tot = tot.add(&v.clone().with_bound(Some(d)))?;
        }
        let inv = formal_inverse(self.cset.law().fgl(), &tot)?;
        Ok((1..=d).map(|j| inv.homogeneous(j)).collect())
    }

    /// c_tot of an integer-coefficient class in z_1..z_N, truncated at the degree.
    fn c_tot(&mut self, class: &WeightedPoly) -> Result<WeightedPoly> {
        let d = self.cset.degree();
        let nz = class.vars().len() as u32;
        let target = VarTable::t(nz);
        let mut args = Vec::new();
        for (mono, c) in class.terms() {
            if !c.denom().is_one() {
                return Err(Error::UseAdamsTrick(format_rational(c)));
            }
            if mono.degree() == 0 {
                return Err(Error::InvalidInput("class has a constant term".into()));
            }
            let negative = c < &Rational::zero();
            let count: u64 = c.numer().magnitude().try_into().map_err(|_| {
                Error::InvalidInput("coefficient too large to expand".into())
            })?;
            let values = self.monomial_values(mono.exps(), negative)?;
            for _ in 0..count {
                args.push(values.clone());
            }
        }
        let zero = WeightedPoly::zero(Ring::Q, target.clone(), None);
        let total = discrete_taylor(
            &args,
            |subset| {
                let s = subset.len() - 1;
                let mut acc = zero.clone();
                for j in 1..=d {
                    let der = self.derivative(j, s)?.clone();
                    let value = der.evaluate(&target, Ring::Q, |idx, slot| {
                        subset[slot as usize - 1][idx as usize - 1].clone()
                    })?;
                    acc = acc.add(&value)?;
                }
                Ok(acc)
            },
            zero.clone(),
            |a, b| a.add(&b),
        )?;
        Ok(total.truncated(d))
    }
}

/// c_tot(x) for an integer-coefficient class x in z_1..z_N, up to the set's degree.
pub fn class_value(cset: &ChernClassSet, class: &WeightedPoly) -> Result<WeightedPoly> {
    TaylorEvaluator::new(cset)?.c_tot(class)
}

/// The fixed test pairs: monomials, powers, repeated and mixed variables, and
/// negative coefficients.
pub fn cartan_corpus() -> Vec<(String, WeightedPoly, WeightedPoly)> {
    type Terms<'a> = &'a [(&'a [u32], i64)];
    let pair = |name: &str, n: u32, x: Terms, y: Terms| {
        let mk = |t: Terms| {
            WeightedPoly::from_terms(
                Ring::Q,
                VarTable::z(n),
                t.iter().map(|(e, c)| (e.to_vec(), Rational::from_integer((*c).into()))),
                None,
            )
            .expect("valid corpus class")
        };
        (name.to_string(), mk(x), mk(y))
    };
    vec![
        pair("(z1, 0)", 1, &[(&[1], 1)], &[]),
        pair("(z1, z2)", 2, &[(&[1, 0], 1)], &[(&[0, 1], 1)]),
        pair("(z1z2, z3)", 3, &[(&[1, 1, 0], 1)], &[(&[0, 0, 1], 1)]),
        pair("(z1, z1)", 1, &[(&[1], 1)], &[(&[1], 1)]),
        pair("(z1^2, z2)", 2, &[(&[2, 0], 1)], &[(&[0, 1], 1)]),
        pair("(z1z2, z1z3)", 3, &[(&[1, 1, 0], 1)], &[(&[1, 0, 1], 1)]),
        pair("(z1 + z2, z3)", 3, &[(&[1, 0, 0], 1), (&[0, 1, 0], 1)], &[(&[0, 0, 1], 1)]),
        pair("(-z1, z2)", 2, &[(&[1, 0], -1)], &[(&[0, 1], 1)]),
        pair("(z1, -z1)", 1, &[(&[1], 1)], &[(&[1], -1)]),
        pair("(2z1, z2z3)", 3, &[(&[1, 0, 0], 2)], &[(&[0, 1, 1], 1)]),
        pair("(z1z2z3, z4)", 4, &[(&[1, 1, 1, 0], 1)], &[(&[0, 0, 0, 1], 1)]),
        pair("(-z1z2, z1)", 2, &[(&[1, 1], -1)], &[(&[1, 0], 1)]),
    ]
}

/// Cartan formula c_tot(x + y) = F(c_tot(x), c_tot(y)) on the given pairs, plus the
/// Segre identities: for every arity l,
/// G_l(c_tot)(t_1..t_{l-1}, u + v) = F-sum over (j, k) of [a_jk]_F G_{l-1+j+k}(c_tot)(t.., u^{x j}, v^{x k}),
/// which ties the stored G-data to the law.
pub fn verify_cartan(
    cset: &ChernClassSet,
    pairs: &[(String, WeightedPoly, WeightedPoly)],
) -> Result<SuiteReport> {
    let d = cset.degree();
    let f = cset.law().fgl();
    let mut eval = TaylorEvaluator::new(cset)?;
    let mut report = SuiteReport::new("cartan");
    for (name, x, y) in pairs {
        let sum = eval.c_tot(&x.add(y)?)?;
        let cx = eval.c_tot(x)?;
        let cy = eval.c_tot(y)?;
        let rhs = f.add_series(&cx.with_bound(Some(d)), &cy.with_bound(Some(d)))?;
        let detail = match sum.first_difference(&rhs, d) {
            None => format!("equal up to degree {d}"),
            Some((exps, a, b)) => format!(
                "differ at {exps:?}: {} vs {}",
                format_rational(&a),
                format_rational(&b)
            ),
        };
        report.push(name.clone(), detail.starts_with("equal"), detail);
    }
    for l in 1..=d {
        let (pass, detail) = segre_identity(cset, l)?;
        report.push(format!("segre l={l}"), pass, detail);
    }
    Ok(report)
}

fn total_g(cset: &ChernClassSet, l: u32) -> Result<WeightedPoly> {
    let mut acc = WeightedPoly::zero(Ring::Q, VarTable::t(l), None);
    for e in cset.entries() {
        if let Some(g) = e.c.g(l) {
            acc = acc.add(&g.to_ring(Ring::Q)?)?;
        }
    }
    Ok(acc)
}

fn segre_identity(cset: &ChernClassSet, l: u32) -> Result<(bool, String)> {
    let d = cset.degree();
    let f = cset.law().fgl();
    let target = VarTable::tuv(l);
    let var = |i: u32| WeightedPoly::var(Ring::Q, target.clone(), i as usize, Some(d));
    let head: Vec<WeightedPoly> = (0..l - 1).map(var).collect();
    let (u, v) = (var(l - 1), var(l));
    let mut images = head.clone();
    images.push(u.add(&v)?);
    let lhs = total_g(cset, l)?.with_bound(Some(d)).compose(&target, &images, Some(d))?;
    let mut terms = Vec::new();
    for (&(j, k), a) in f.coeffs() {
        let big_l = j + k + l - 1;
        if big_l > d || a.is_zero() {
            continue;
        }
        let mut images = head.clone();
        images.extend(std::iter::repeat_n(u.clone(), j as usize));
        images.extend(std::iter::repeat_n(v.clone(), k as usize));
        let s = total_g(cset, big_l)?
            .with_bound(Some(d))
            .compose(&target, &images, Some(d))?;
        if s.is_zero() {
            continue;
        }
        terms.push(if a.is_one() { s } else { f.rational_multiple_of(a, &s)? });
    }
    let rhs = if terms.is_empty() {
        WeightedPoly::zero(Ring::Q, target.clone(), Some(d))
    } else {
        formal_sum(f, &terms)?
    };
    Ok(match lhs.first_difference(&rhs, d) {
        None => (true, format!("equal up to degree {d}")),
        Some((exps, a, b)) => (
            false,
            format!(
                "differ at {exps:?}: {} vs {}",
                format_rational(&a),
                format_rational(&b)
            ),
        ),
    })
}

/// The scalar a in F_p^x with phi_i = a (phi_v)^(p^(nk)) mod p, where i = p^(nk) v.
pub fn verify_power_congruence(cset: &ChernClassSet, i: u32) -> Result<u64> {
    let law = cset.law();
    let p = law.p();
    let (k, v) = split_index(i, law.pn());
    if k == 0 {
        return Err(Error::InvalidInput(format!("p^n does not divide {i}")));
    }
    let entry = |j: u32| {
        cset.entry(j)
            .ok_or_else(|| Error::InvalidInput(format!("c_{j} was not built")))
    };
    let fp = Ring::Fp(p);
    let phi_i = entry(i)?.phi.to_ring(fp)?;
    let power = entry(v)?.phi.to_ring(fp)?.pointwise_pow(p.pow(law.n() * k) as u32)?;
    let (a, b) = (phi_i.coords(), power.coords());
    let fail = || Error::LemmaViolation(format!("phi_{i} is not a multiple of phi_{v}^(p^{})", law.n() * k));
    let idx = b.iter().position(|x| !x.is_zero()).ok_or_else(fail)?;
    let s = fp.coerce(&(&a[idx] * fp.inv(&b[idx]).ok_or_else(fail)?))?;
    if s.is_zero() || power.scale(&s) != phi_i {
        return Err(fail());
    }
    Ok(s.to_integer().try_into().expect("residue fits"))
}

/// Flattened values of Chern monomials (and optionally one extra operation) on sums of
/// monomials in fresh variables.
///
/// For block arities rho = (r_1 >= .. >= r_s), the entry of an operation M is the part of
/// M(m_1 + .. + m_s), m_k a product of r_k fresh variables, divisible by every variable:
/// by inclusion-exclusion this is the (s-1)-st discrete derivative at (m_1, .., m_s).
/// For monomials in Chern classes, c_tot(m_1 + .. + m_s) is the F-sum of the c_tot(m_k).
struct Flattening {
    columns: BTreeMap<(usize, Vec<u32>), usize>,
    rows: Vec<BTreeMap<(usize, Vec<u32>), Rational>>,
}

impl Flattening {
    fn build(cset: &ChernClassSet, weight: u32, arities: &[Partition], monomials: &[Partition]) -> Result<Self> {
        if weight > cset.degree() {
            return Err(Error::TruncationTooSmall {
                bound: cset.degree(),
                needed: weight as u64,
            });
        }
        let f = cset.law().fgl();
        let mut rows = vec![BTreeMap::new(); monomials.len()];
        for (ri, rho) in arities.iter().enumerate() {
            let nv = rho.sum();
            let target = VarTable::t(nv);
            let mut blocks = Vec::new();
            let mut offset = 0usize;
            for &r in rho.parts() {
                let map: Vec<usize> = (offset..offset + r as usize).collect();
                let mut tot = WeightedPoly::zero(Ring::Q, target.clone(), Some(weight));
                for j in r..=weight {
                    if let Some(g) = cset.c(j).and_then(|c| c.g(r)) {
                        tot = tot.add(&g.to_ring(Ring::Q)?.embed(&target, &map)?.with_bound(Some(weight)))?;
                    }
                }
                blocks.push(tot);
                offset += r as usize;
            }
            let sum = formal_sum(f, &blocks)?;
            let parts: Vec<WeightedPoly> = (1..=weight).map(|j| sum.homogeneous(j)).collect();
            for (mi, lambda) in monomials.iter().enumerate() {
                let mut value = WeightedPoly::one(Ring::Q, target.clone(), None);
                for &j in lambda.parts() {
                    value = value.mul(&parts[j as usize - 1])?;
                }
                for (mono, c) in value.terms() {
                    if mono.exps().iter().all(|&e| e > 0) {
                        rows[mi].insert((ri, mono.exps().to_vec()), c.clone());
                    }
                }
            }
        }
        let mut fl = Flattening {
            columns: BTreeMap::new(),
            rows,
        };
        fl.index_columns();
        Ok(fl)
    }

    fn index_columns(&mut self) {
        let keys: std::collections::BTreeSet<_> = self.rows.iter().flat_map(|r| r.keys().cloned()).collect();
        self.columns = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    }

    fn dense(&self, row: &BTreeMap<(usize, Vec<u32>), Rational>) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.columns.len()];
        for (k, c) in row {
            v[self.columns[k]] = c.clone();
        }
        v
    }
}

/// Rank of the Chern monomials of weight i (one per partition of i) over Q or F_p.
pub fn chern_monomial_rank(cset: &ChernClassSet, i: u32, ring: Ring) -> Result<usize> {
    let arities: Vec<Partition> = (1..=i).flat_map(|s| partitions_of(s, None)).collect();
    let monomials = partitions_of(i, None);
    let fl = Flattening::build(cset, i, &arities, &monomials)?;
    let mut e = Echelon::new(ring, fl.columns.len());
    for row in &fl.rows {
        e.insert(&fl.dense(row))?;
    }
    Ok(e.rank())
}

/// Whether an additive operation xi to CH^j/p, restricted to the source component
/// `component` mod (p^n - 1), is the reduction of an integral polynomial in the c_i.
pub fn liftability_check(xi: &GData, cset: &ChernClassSet, component: u64) -> Result<bool> {
    let p = cset.p();
    let modulus = cset.law().modulus();
    let j = xi.m();
    let fp = Ring::Fp(p);
    let xi = xi.to_ring(fp)?;
    let arities: Vec<Partition> = (1..=j)
        .flat_map(|s| partitions_of(s, None))
        .filter(|rho| rho.parts().iter().all(|&r| (r as u64 + modulus - component % modulus).is_multiple_of(modulus)))
        .collect();
    let monomials = partitions_of(j, None);
    let mut fl = Flattening::build(cset, j, &arities, &monomials)?;
    let mut extra = BTreeMap::new();
    for (ri, rho) in arities.iter().enumerate() {
        if let [r] = rho.parts() {
            for (mono, c) in xi.g(*r).expect("r <= j").terms() {
                extra.insert((ri, mono.exps().to_vec()), c.clone());
            }
        }
    }
    fl.rows.push(extra);
    fl.index_columns();
    let mut e = Echelon::new(fp, fl.columns.len());
    let (xi_row, chern_rows) = fl.rows.split_last().expect("nonempty");
    for row in chern_rows {
        e.insert(&fl.dense(row))?;
    }
    e.contains(&fl.dense(xi_row))
}

/// Q o c_2 mod p, where Q sends t_1 t_2 to t_1^p t_2 + t_1 t_2^p.
pub fn non_liftable_example(cset: &ChernClassSet) -> Result<GData> {
    let p: Prime = cset.p();
    let c2 = cset
        .c(2)
        .ok_or_else(|| Error::InvalidInput("c_2 was not built".into()))?;
    let q = CHOpData::from_p_partition(p, &[p.get() as u32, 1])?;
    compose_ch_operation(&q, &c2.to_ring(Ring::Fp(p))?)
}
