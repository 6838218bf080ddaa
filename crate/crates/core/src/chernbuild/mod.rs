//! Inductive construction of the Chern classes c_i : K(n) -> CH^i (x) Z_(p) as G-data.
//!
//! For i < p^n, c_i is the integral additive generator phi_i. For larger i,
//! c_i = R_i + (alpha / p^mu) phi_i, where R_i realizes P_i(c_1, .., c_{i-1}) and alpha
//! is found digit by digit so that every intermediate operation stays p-integral.

mod io;
mod verify;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::caot::{integral_generator, GData};
use crate::chernalg::{log_components, ChernPoly, LogComponentResult};
use crate::error::{Error, Result};
use crate::exactnum::{int_mod, is_p_integral, p_power, Prime, Rational};
use crate::fgl::MoravaLaw;
use crate::polyring::{Ring, VarKind, VarTable, WeightedPoly};

pub use io::{load_class_set, render_class_set, Certificate, ClassRecord, CERTIFICATE_FILE};
pub use verify::{
    cartan_corpus, chern_monomial_rank, class_value, liftability_check, non_liftable_example,
    verify_cartan, verify_gradable, verify_power_congruence, verify_support, CheckResult,
    SuiteReport,
};

/// One constructed class with the data certifying it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChernEntry {
    pub i: u32,
    pub component: LogComponentResult,
    /// Integral generator phi_i over Z_(p).
    pub phi: GData,
    /// alpha_mu; 1 in the additive range.
    pub alpha: Rational,
    /// alpha / p^mu.
    pub beta: Rational,
    /// Realization of P_i over Q (zero in the additive range).
    pub realized: GData,
    /// c_i over Z_(p).
    pub c: GData,
}

#[derive(Clone, Debug)]
pub struct ChernClassSet {
    law: MoravaLaw,
    degree: u32,
    entries: Vec<ChernEntry>,
}

impl ChernClassSet {
    pub fn law(&self) -> &MoravaLaw {
        &self.law
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn p(&self) -> Prime {
        self.law.p()
    }

    pub fn entries(&self) -> &[ChernEntry] {
        &self.entries
    }

    pub fn entry(&self, i: u32) -> Option<&ChernEntry> {
        (i >= 1).then(|| self.entries.get(i as usize - 1)).flatten()
    }

    /// G-data of c_i.
    pub fn c(&self, i: u32) -> Option<&GData> {
        self.entry(i).map(|e| &e.c)
    }

    /// Only the additive range was built (degree < p^n).
    pub fn base_only(&self) -> bool {
        (self.degree as u64) < self.law.pn()
    }

    pub(crate) fn from_entries(law: MoravaLaw, degree: u32, entries: Vec<ChernEntry>) -> Self {
        ChernClassSet {
            law,
            degree,
            entries,
        }
    }
}

/// G-data of P(c_1, ..) where every c_j is replaced by its value on z_1...z_l.
///
/// `classes[j - 1]` is the G-data of c_j; P must be homogeneous of positive weight
/// and use only the classes provided.
pub fn realize_chern_poly(pol: &ChernPoly, classes: &[GData]) -> Result<GData> {
    let first = classes
        .first()
        .ok_or_else(|| Error::InvalidInput("no classes to realize with".into()))?;
    let (p, n) = (first.p(), first.n());
    if pol.arity() != 1 {
        return Err(Error::InvalidInput("realization needs a one-slot polynomial".into()));
    }
    let weights: Vec<u32> = pol.poly().terms().map(|(m, _)| m.weight()).collect();
    let w = match weights.first() {
        None => return Err(Error::InvalidInput("cannot infer the degree of zero".into())),
        Some(&w) if weights.iter().all(|&x| x == w) => w,
        Some(&w) => {
            return Err(Error::DegreeMismatch {
                expected: w,
                found: *weights.iter().find(|&&x| x != w).expect("exists"),
            })
        }
    };
    for (m, _) in pol.poly().terms() {
        for (idx, &e) in m.exps().iter().enumerate() {
            if let VarKind::Chern { index, .. } = pol.poly().vars().kind(idx) {
                if e > 0 && *index as usize > classes.len() {
                    return Err(Error::InvalidInput(format!("c_{index} is not available")));
                }
            }
        }
    }
    let polys = (1..=w)
        .map(|l| {
            let target = VarTable::t(l);
            let zero = WeightedPoly::zero(Ring::Q, target.clone(), None);
            pol.evaluate(&target, Ring::Q, |j, _| {
                classes
                    .get(j as usize - 1)
                    .and_then(|g| g.g(l))
                    .map(|g| g.to_ring(Ring::Q).expect("Z_(p) embeds in Q"))
                    .unwrap_or_else(|| zero.clone())
            })
            .map(|g| g.homogeneous(w))
        })
        .collect::<Result<Vec<_>>>()?;
    GData::new(p, n, w, Ring::Q, polys)
}

fn scalar_multiple(target: &GData, base: &GData) -> Option<u64> {
    let (tc, bc) = (target.coords(), base.coords());
    let i = bc.iter().position(|x| !x.is_zero())?;
    let ring = base.ring();
    let b = ring.coerce(&(&tc[i] * ring.inv(&bc[i])?)).ok()?;
    (base.scale(&b) == *target).then(|| b.to_integer().try_into().ok()).flatten()
}

/// Builds c_1..c_degree for the law. Fails if an intermediate operation is not
/// proportional to phi_i mod p, or if the first correction is divisible by p.
pub fn build_chern_classes(law: &MoravaLaw, degree: u32) -> Result<ChernClassSet> {
    if degree == 0 {
        return Err(Error::InvalidInput("degree must be >= 1".into()));
    }
    if law.bound() < degree {
        return Err(Error::TruncationTooSmall {
            bound: law.bound(),
            needed: degree as u64,
        });
    }
    let p = law.p();
    let (n, pn) = (law.n(), law.pn());
    let zp = Ring::ZpLocal(p);
    let fp = Ring::Fp(p);
    let comps = log_components(law.fgl().log(), p, degree)?;
    let mut entries: Vec<ChernEntry> = Vec::with_capacity(degree as usize);
    for comp in comps {
        let i = comp.i;
        let phi = integral_generator(law.fgl(), n, i)?;
        if (i as u64) < pn {
            if !comp.p_i.is_zero() {
                return Err(Error::LemmaViolation(format!("P_{i} is nonzero below p^n")));
            }
            entries.push(ChernEntry {
                i,
                component: comp,
                c: phi.clone(),
                realized: GData::zero(p, n, i, Ring::Q),
                phi,
                alpha: Rational::one(),
                beta: Rational::one(),
            });
            continue;
        }
        let classes: Vec<GData> = entries.iter().map(|e| e.c.clone()).collect();
        let realized = realize_chern_poly(&comp.p_i, &classes)?;
        let mu = comp.mu;
        let phi_q = phi.to_ring(Ring::Q)?;
        let phi_bar = phi.to_ring(fp)?;
        let mut alpha = BigInt::one();
        for r in 0..mu {
            let theta = realized
                .scale(&p_power(p, (mu - r) as i64))
                .add(&phi_q.scale(&(Rational::from_integer(alpha.clone()) * p_power(p, -(r as i64)))))?;
            let theta_bar = theta
                .to_ring(fp)
                .map_err(|_| Error::IntegralityFailure(format!("c_{i}: step {r} is not p-integral")))?;
            let b = scalar_multiple(&theta_bar, &phi_bar).ok_or(Error::LiftAddViolated { i, r })?;
            if r == 0 && int_mod(&(&alpha - BigInt::from(b)), p.get()) == 0 {
                return Err(Error::NonzeroCheckFailed { i });
            }
            alpha -= BigInt::from(b) * BigInt::from(p.get()).pow(r);
        }
        let alpha = Rational::from_integer(alpha);
        let beta = &alpha * p_power(p, -(mu as i64));
        let c = realized.add(&phi_q.scale(&beta))?;
        if c.polys().iter().any(|g| g.terms().any(|(_, x)| !is_p_integral(x, p))) {
            return Err(Error::IntegralityFailure(format!("c_{i} is not p-integral")));
        }
        let c = c.to_ring(zp)?;
        if !c.has_unit_content() {
            return Err(Error::IntegralityFailure(format!("c_{i} vanishes mod p")));
        }
        entries.push(ChernEntry {
            i,
            component: comp,
            phi,
            alpha,
            beta,
            realized,
            c,
        });
    }
    Ok(ChernClassSet {
        law: law.clone(),
        degree,
        entries,
    })
}
