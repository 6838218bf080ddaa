use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Variable kinds live in disjoint namespaces so that substitutions cannot capture
/// a variable of another family by accident.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    T(u32),
    Z(u32),
    U,
    V,
    X,
    Y,
    W,
    /// `c_index` in external slot `slot` (1-based).
    Chern { index: u32, slot: u32 },
}

impl VarKind {
    pub fn name(&self) -> String {
        match self {
            VarKind::T(i) => format!("t{i}"),
            VarKind::Z(i) => format!("z{i}"),
            VarKind::U => "u".into(),
            VarKind::V => "v".into(),
            VarKind::X => "x".into(),
            VarKind::Y => "y".into(),
            VarKind::W => "w".into(),
            VarKind::Chern { index, slot: 1 } => format!("c{index}"),
            VarKind::Chern { index, slot } => format!("c{index}[{slot}]"),
        }
    }

    pub fn parse(s: &str) -> Option<VarKind> {
        let idx = |t: &str| -> Option<u32> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) || t.starts_with('0') {
                return None;
            }
            t.parse().ok()
        };
        match s {
            "u" => return Some(VarKind::U),
            "v" => return Some(VarKind::V),
            "x" => return Some(VarKind::X),
            "y" => return Some(VarKind::Y),
            "w" => return Some(VarKind::W),
            _ => {}
        }
        if let Some(r) = s.strip_prefix('t') {
            return idx(r).map(VarKind::T);
        }
        if let Some(r) = s.strip_prefix('z') {
            return idx(r).map(VarKind::Z);
        }
        let r = s.strip_prefix('c')?;
        match r.split_once('[') {
            None => idx(r).map(|index| VarKind::Chern { index, slot: 1 }),
            Some((i, rest)) => {
                let slot = idx(rest.strip_suffix(']')?)?;
                if slot == 1 {
                    return None;
                }
                Some(VarKind::Chern {
                    index: idx(i)?,
                    slot,
                })
            }
        }
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Ordered table of variables with their weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarTable {
    vars: Vec<(VarKind, u32)>,
}

pub type Vars = Arc<VarTable>;

impl VarTable {
    pub fn new(vars: Vec<(VarKind, u32)>) -> Result<Vars> {
        for (i, (k, w)) in vars.iter().enumerate() {
            if *w == 0 {
                return Err(Error::InvalidInput(format!("variable {k} has weight 0")));
            }
            if vars[..i].iter().any(|(o, _)| o == k) {
                return Err(Error::InvalidInput(format!("duplicate variable {k}")));
            }
        }
        Ok(Arc::new(VarTable { vars }))
    }

    fn unchecked(vars: Vec<(VarKind, u32)>) -> Vars {
        Arc::new(VarTable { vars })
    }

    /// t_1..t_l, weight 1.
    pub fn t(l: u32) -> Vars {
        Self::unchecked((1..=l).map(|i| (VarKind::T(i), 1)).collect())
    }

    /// z_1..z_l, weight 1.
    pub fn z(l: u32) -> Vars {
        Self::unchecked((1..=l).map(|i| (VarKind::Z(i), 1)).collect())
    }

    pub fn x() -> Vars {
        Self::unchecked(vec![(VarKind::X, 1)])
    }

    pub fn xy() -> Vars {
        Self::unchecked(vec![(VarKind::X, 1), (VarKind::Y, 1)])
    }

    pub fn xyw() -> Vars {
        Self::unchecked(vec![(VarKind::X, 1), (VarKind::Y, 1), (VarKind::W, 1)])
    }

    /// t_1..t_l followed by u, v, all weight 1.
    pub fn tuv(l: u32) -> Vars {
        let mut v: Vec<_> = (1..=l).map(|i| (VarKind::T(i), 1)).collect();
        v.push((VarKind::U, 1));
        v.push((VarKind::V, 1));
        Self::unchecked(v)
    }

    /// Chern symbols c_j^{(s)} for slots 1..=arity and j in 1..=degree; c_j has weight j.
    /// Index of c_j^{(s)} is (s-1)*degree + (j-1).
    pub fn chern(arity: u32, degree: u32) -> Vars {
        let mut v = Vec::with_capacity((arity * degree) as usize);
        for slot in 1..=arity {
            for index in 1..=degree {
                v.push((VarKind::Chern { index, slot }, index));
            }
        }
        Self::unchecked(v)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn kind(&self, i: usize) -> &VarKind {
        &self.vars[i].0
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.vars[i].1
    }

    pub fn weights(&self) -> impl Iterator<Item = u32> + '_ {
        self.vars.iter().map(|(_, w)| *w)
    }

    pub fn kinds(&self) -> impl Iterator<Item = &VarKind> + '_ {
        self.vars.iter().map(|(k, _)| k)
    }

    pub fn position(&self, kind: &VarKind) -> Option<usize> {
        self.vars.iter().position(|(k, _)| k == kind)
    }
}
