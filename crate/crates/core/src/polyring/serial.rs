use serde::{Deserialize, Serialize};

use super::{Mono, Ring, VarKind, VarTable, WeightedPoly};
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, Prime};

/// Serialized polynomial: coefficients as exact rational strings, terms in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub ring: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    pub vars: Vec<String>,
    pub weights: Vec<u32>,
    pub bound: Option<u32>,
    pub terms: Vec<(Vec<u32>, String)>,
}

pub(crate) fn ring_to_json(ring: Ring) -> (String, Option<u64>) {
    match ring {
        Ring::Q => ("q".into(), None),
        Ring::ZpLocal(p) => ("zp".into(), Some(p.get())),
        Ring::Fp(p) => ("fp".into(), Some(p.get())),
    }
}

pub(crate) fn ring_from_json(tag: &str, p: Option<u64>) -> Result<Ring> {
    match (tag, p) {
        ("q", None) => Ok(Ring::Q),
        ("zp", Some(p)) => Ok(Ring::ZpLocal(Prime::new(p)?)),
        ("fp", Some(p)) => Ok(Ring::Fp(Prime::new(p)?)),
        _ => Err(Error::Parse(format!("bad ring {tag:?} with p = {p:?}"))),
    }
}

/// Reads canonical terms, rejecting duplicates, zeros, out-of-bound weights and
/// coefficients that are not in canonical form for the ring.
pub(crate) fn terms_from_json(
    ring: Ring,
    vars: &VarTable,
    bound: Option<u32>,
    terms: &[(Vec<u32>, String)],
) -> Result<Vec<(Vec<u32>, crate::Rational)>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(terms.len());
    for (exps, c) in terms {
        if exps.len() != vars.len() {
            return Err(Error::Parse("exponent vector arity mismatch".into()));
        }
        let weight: u64 = exps
            .iter()
            .zip(vars.weights())
            .map(|(&e, w)| e as u64 * w as u64)
            .sum();
        if weight > u32::MAX as u64 || bound.is_some_and(|b| weight > b as u64) {
            return Err(Error::Parse("term above truncation bound".into()));
        }
        let q = parse_rational(c)?;
        if num_traits::Zero::is_zero(&q) {
            return Err(Error::Parse("zero coefficient stored".into()));
        }
        if ring.coerce(&q)? != q {
            return Err(Error::Parse(format!("coefficient {c} not canonical")));
        }
        if !seen.insert(exps.clone()) {
            return Err(Error::Parse("duplicate monomial".into()));
        }
        out.push((exps.clone(), q));
    }
    Ok(out)
}

impl WeightedPoly {
    pub fn to_json(&self) -> PolyJson {
        let (ring, p) = ring_to_json(self.ring);
        PolyJson {
            ring,
            p,
            vars: self.vars.kinds().map(VarKind::name).collect(),
            weights: self.vars.weights().collect(),
            bound: self.bound,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.exps.clone(), format_rational(c)))
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Self> {
        let ring = ring_from_json(&j.ring, j.p)?;
        if j.vars.len() != j.weights.len() {
            return Err(Error::Parse("vars and weights differ in length".into()));
        }
        let kinds = j
            .vars
            .iter()
            .map(|s| VarKind::parse(s).ok_or_else(|| Error::Parse(format!("bad variable {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let vars = VarTable::new(kinds.into_iter().zip(j.weights.iter().copied()).collect())
            .map_err(|e| Error::Parse(e.to_string()))?;
        let terms = terms_from_json(ring, &vars, j.bound, &j.terms)?;
        let poly = WeightedPoly::from_terms(ring, vars, terms, j.bound)?;
        debug_assert!(poly.terms.keys().all(|m: &Mono| m.exps.len() == poly.vars.len()));
        Ok(poly)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: PolyJson = serde_json::from_str(s)?;
        Self::from_json(&j)
    }
}
