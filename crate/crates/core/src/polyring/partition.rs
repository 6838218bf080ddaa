use num_traits::One;

use super::{Ring, VarTable, WeightedPoly};
use crate::exactnum::Rational;

/// Partition stored with parts in non-increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Option<Self> {
        if parts.contains(&0) {
            return None;
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Some(Partition(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Multiplicity of each part value, as (value, count) in decreasing value order.
    pub fn multiplicities(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &r in &self.0 {
            match out.last_mut() {
                Some((v, c)) if *v == r => *c += 1,
                _ => out.push((r, 1)),
            }
        }
        out
    }
}

/// All partitions of `m` (into exactly `l` parts if given), reverse-lexicographic.
pub fn partitions_of(m: u32, l: Option<u32>) -> Vec<Partition> {
    fn go(rest: u32, max: u32, cur: &mut Vec<u32>, l: Option<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            if l.is_none_or(|l| cur.len() as u32 == l) {
                out.push(Partition(cur.clone()));
            }
            return;
        }
        if let Some(l) = l {
            let left = l.saturating_sub(cur.len() as u32);
            // need `left` parts each <= max summing to rest
            if left == 0 || rest > left * max || rest < left {
                return;
            }
        }
        for part in (1..=max.min(rest)).rev() {
            cur.push(part);
            go(rest - part, part, cur, l, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(m, m, &mut Vec::new(), l, &mut out);
    out
}

/// Distinct permutations of an exponent vector, in lexicographic order.
pub fn distinct_permutations(exps: &[u32]) -> Vec<Vec<u32>> {
    let mut cur = exps.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    loop {
        let n = cur.len();
        if n < 2 {
            return out;
        }
        let Some(i) = (0..n - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("pivot exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

/// Orbit sum of t^exps under permutations of t_1..t_l, each distinct monomial once.
pub fn symmetrize(exps: &[u32], ring: Ring) -> WeightedPoly {
    let vars = VarTable::t(exps.len() as u32);
    WeightedPoly::from_terms(
        ring,
        vars,
        distinct_permutations(exps)
            .into_iter()
            .map(|e| (e, Rational::one())),
        None,
    )
    .expect("arity matches")
}
