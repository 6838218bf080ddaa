use serde::{Deserialize, Serialize};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, nu_p, parse_rational, Prime, Rational, Valuation};
use crate::polyring::{partitions_of, Partition, Ring, VarTable, WeightedPoly};

/// Values of an operation to CH^m on the products z_1...z_l, 1 <= l <= m.
///
/// `polys[l - 1]` is a symmetric homogeneous polynomial of degree m in t_1..t_l,
/// divisible by t_1...t_l. Arities above m carry nothing in degree m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GData {
    p: Prime,
    n: u32,
    m: u32,
    ring: Ring,
    polys: Vec<WeightedPoly>,
}

/// Unknowns of the additive system for target degree m: (l, partition of m into l parts),
/// l ascending, partitions reverse-lexicographic.
pub fn variables(m: u32) -> Vec<(u32, Partition)> {
    (1..=m)
        .flat_map(|l| partitions_of(m, Some(l)).into_iter().map(move |r| (l, r)))
        .collect()
}

impl GData {
    pub fn new(p: Prime, n: u32, m: u32, ring: Ring, polys: Vec<WeightedPoly>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput("G-data needs m >= 1 and n >= 1".into()));
        }
        if ring.prime().is_some_and(|q| q != p) {
            return Err(Error::RingMismatch(ring.tag(), format!("p = {p}")));
        }
        if polys.len() != m as usize {
            return Err(Error::InvalidInput(format!(
                "{} polynomials for m = {m}",
                polys.len()
            )));
        }
        for (i, g) in polys.iter().enumerate() {
            let l = i as u32 + 1;
            if g.ring() != ring {
                return Err(Error::RingMismatch(g.ring().tag(), ring.tag()));
            }
            if g.bound().is_some() || g.vars().as_ref() != VarTable::t(l).as_ref() {
                return Err(Error::TableMismatch);
            }
            for (mono, _) in g.terms() {
                if mono.weight() != m {
                    return Err(Error::DegreeMismatch {
                        expected: m,
                        found: mono.weight(),
                    });
                }
                if mono.exps().contains(&0) {
                    return Err(Error::InvalidInput(format!(
                        "G_{l} has a term not divisible by t_1...t_{l}"
                    )));
                }
            }
            if !g.is_symmetric(&(0..l as usize).collect::<Vec<_>>()) {
                return Err(Error::InvalidInput(format!("G_{l} is not symmetric")));
            }
        }
        Ok(GData {
            p,
            n,
            m,
            ring,
            polys,
        })
    }

    pub fn zero(p: Prime, n: u32, m: u32, ring: Ring) -> Self {
        GData {
            p,
            n,
            m,
            ring,
            polys: (1..=m)
                .map(|l| WeightedPoly::zero(ring, VarTable::t(l), None))
                .collect(),
        }
    }

    /// Builds G-data from coordinates alpha^{(l)}_r in the order of [`variables`].
    pub fn from_coords(p: Prime, n: u32, m: u32, ring: Ring, coords: &[Rational]) -> Result<Self> {
        let vars = variables(m);
        if coords.len() != vars.len() {
            return Err(Error::InvalidInput(format!(
                "{} coordinates for {} unknowns",
                coords.len(),
                vars.len()
            )));
        }
        let mut polys: Vec<WeightedPoly> = (1..=m)
            .map(|l| WeightedPoly::zero(ring, VarTable::t(l), None))
            .collect();
        for ((l, r), c) in vars.iter().zip(coords) {
            if c.is_zero() {
                continue;
            }
            let g = &mut polys[*l as usize - 1];
            *g = g.add(&crate::polyring::symmetrize(r.parts(), ring).scale(c))?;
        }
        Ok(GData {
            p,
            n,
            m,
            ring,
            polys,
        })
    }

    /// Coefficients of the sorted monomials t^r, in the order of [`variables`].
    pub fn coords(&self) -> Vec<Rational> {
        variables(self.m)
            .iter()
            .map(|(l, r)| self.polys[*l as usize - 1].coefficient_of(r.parts()))
            .collect()
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// p^n - 1.
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.n) - 1
    }

    /// G_l, or `None` for l outside 1..=m.
    pub fn g(&self, l: u32) -> Option<&WeightedPoly> {
        (l >= 1).then(|| self.polys.get(l as usize - 1)).flatten()
    }

    pub fn polys(&self) -> &[WeightedPoly] {
        &self.polys
    }

    pub fn is_zero(&self) -> bool {
        self.polys.iter().all(WeightedPoly::is_zero)
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.p != o.p || self.n != o.n || self.m != o.m {
            return Err(Error::DegreeMismatch {
                expected: self.m,
                found: o.m,
            });
        }
        if self.ring != o.ring {
            return Err(Error::RingMismatch(self.ring.tag(), o.ring.tag()));
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(&WeightedPoly) -> Result<WeightedPoly>) -> Result<Self> {
        Ok(GData {
            polys: self.polys.iter().map(f).collect::<Result<_>>()?,
            ..self.clone()
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let mut out = self.clone();
        for (a, b) in out.polys.iter_mut().zip(&o.polys) {
            *a = a.add(b)?;
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&-Rational::from_integer(1.into())))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|g| Ok(g.scale(c))).expect("scaling cannot fail")
    }

    /// Changes the coefficient ring; reduction to F_p needs p-integral coefficients.
    pub fn to_ring(&self, ring: Ring) -> Result<Self> {
        if ring.prime().is_some_and(|q| q != self.p) {
            return Err(Error::RingMismatch(ring.tag(), self.ring.tag()));
        }
        let mut out = self.map(|g| g.to_ring(ring))?;
        out.ring = ring;
        Ok(out)
    }

    /// Smallest p-adic valuation of a coefficient (infinite for zero data).
    pub fn valuation(&self) -> Valuation {
        self.polys
            .iter()
            .flat_map(|g| g.terms().map(|(_, c)| nu_p(c, self.p)))
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    /// All coefficients p-integral and at least one a p-unit.
    pub fn has_unit_content(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    /// Pointwise e-th power: the operation x -> phi(x)^e, of target degree m*e.
    pub fn pointwise_pow(&self, e: u32) -> Result<Self> {
        let m = self.m * e;
        let polys = (1..=m)
            .map(|l| match self.g(l) {
                Some(g) => g.pow(e),
                None => WeightedPoly::zero(self.ring, VarTable::t(l), None),
            })
            .collect();
        Ok(GData {
            m,
            polys,
            ..self.clone()
        })
    }

    pub fn to_json(&self) -> GDataJson {
        let (ring, _) = ring_name(self.ring);
        GDataJson {
            schema_version: SCHEMA_VERSION,
            p: self.p.get(),
            n: self.n,
            m: self.m,
            ring: ring.into(),
            polys: self
                .polys
                .iter()
                .enumerate()
                .map(|(i, g)| GPolyJson {
                    l: i as u32 + 1,
                    terms: g
                        .terms()
                        .map(|(mono, c)| (mono.exps().to_vec(), format_rational(c)))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(j: &GDataJson) -> Result<Self> {
        if j.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {}",
                j.schema_version
            )));
        }
        let p = Prime::new(j.p)?;
        let ring = match j.ring.as_str() {
            "q" => Ring::Q,
            "zp" => Ring::ZpLocal(p),
            "fp" => Ring::Fp(p),
            other => return Err(Error::Parse(format!("bad ring {other:?}"))),
        };
        if j.m == 0 || j.m > MAX_DEGREE || j.n == 0 || j.n > MAX_DEGREE {
            return Err(Error::Parse(format!("m = {} or n = {} out of range", j.m, j.n)));
        }
        if j.polys.len() != j.m as usize {
            return Err(Error::Parse(format!("{} arities for m = {}", j.polys.len(), j.m)));
        }
        let mut polys = Vec::with_capacity(j.polys.len());
        for (i, gp) in j.polys.iter().enumerate() {
            let l = i as u32 + 1;
            if gp.l != l {
                return Err(Error::Parse(format!("arity {} listed at position {l}", gp.l)));
            }
            let vars = VarTable::t(l);
            let mut terms = Vec::with_capacity(gp.terms.len());
            let mut last: Option<Vec<u32>> = None;
            for (exps, c) in &gp.terms {
                if exps.len() != l as usize {
                    return Err(Error::Parse("exponent vector arity mismatch".into()));
                }
                if exps.iter().map(|&e| e as u64).sum::<u64>() != j.m as u64 {
                    return Err(Error::Parse(format!("term of G_{l} is not of degree {}", j.m)));
                }
                if last.as_ref().is_some_and(|prev| prev >= exps) {
                    return Err(Error::Parse("terms not in canonical order".into()));
                }
                last = Some(exps.clone());
                let q = parse_rational(c)?;
                if q.is_zero() || ring.coerce(&q)? != q {
                    return Err(Error::Parse(format!("coefficient {c} not canonical")));
                }
                if let Ring::ZpLocal(p) = ring {
                    if !crate::exactnum::is_p_integral(&q, p) {
                        return Err(Error::Parse(format!("coefficient {c} not {p}-integral")));
                    }
                }
                terms.push((exps.clone(), q));
            }
            polys.push(WeightedPoly::from_terms(ring, vars, terms, None)?);
        }
        GData::new(p, j.n, j.m, ring, polys).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: GDataJson = serde_json::from_str(s)?;
        Self::from_json(&j)
    }
}

/// Reads and validates a `.gdata.json` document.
pub fn parse_gdata(s: &str) -> Result<GData> {
    GData::from_json_str(s)
}

const SCHEMA_VERSION: u32 = 1;
const MAX_DEGREE: u32 = 64;

fn ring_name(ring: Ring) -> (&'static str, Option<Prime>) {
    match ring {
        Ring::Q => ("q", None),
        Ring::ZpLocal(p) => ("zp", Some(p)),
        Ring::Fp(p) => ("fp", Some(p)),
    }
}

/// Serialized G-data: one canonical term list per arity, coefficients as rational strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GDataJson {
    pub schema_version: u32,
    pub p: u64,
    pub n: u32,
    pub m: u32,
    pub ring: String,
    pub polys: Vec<GPolyJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GPolyJson {
    pub l: u32,
    pub terms: Vec<(Vec<u32>, String)>,
}
