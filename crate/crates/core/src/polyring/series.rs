use num_traits::Zero;

use super::{Ring, WeightedPoly};
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, Rational};

fn dense(f: &WeightedPoly, d: u32) -> Result<Vec<Rational>> {
    if f.vars().len() != 1 || f.vars().weight(0) != 1 {
        return Err(Error::InvalidInput(
            "reversion needs a univariate series in a weight-1 variable".into(),
        ));
    }
    let mut c = vec![Rational::zero(); d as usize + 1];
    for (m, a) in f.terms() {
        let e = m.exps()[0];
        if e <= d {
            c[e as usize] = a.clone();
        }
    }
    Ok(c)
}

/// Compositional inverse of a univariate series to its own truncation bound.
pub fn revert(f: &WeightedPoly) -> Result<WeightedPoly> {
    match f.bound() {
        Some(d) => revert_to(f, d),
        None => Err(Error::InvalidInput(
            "reversion of an exact polynomial needs an explicit bound".into(),
        )),
    }
}

/// Compositional inverse g with f(g(x)) = x modulo weight > d.
///
/// Coefficients are solved one degree at a time while maintaining the table
/// `pw[k][n] = [x^n] g^k`, which for k >= 2 depends only on lower coefficients of g.
pub fn revert_to(f: &WeightedPoly, d: u32) -> Result<WeightedPoly> {
    let d = f.bound().map_or(d, |b| b.min(d));
    let ring = f.ring();
    let c = dense(f, d)?;
    if !c[0].is_zero() {
        return Err(Error::NotReversible(format!(
            "constant term {}",
            format_rational(&c[0])
        )));
    }
    if d == 0 {
        return Ok(WeightedPoly::zero(ring, f.vars().clone(), Some(0)));
    }
    let inv = ring
        .inv(&c[1])
        .ok_or_else(|| Error::NotReversible(format_rational(&c[1])))?;
    let n = d as usize;
    let mul = |a: &Rational, b: &Rational| ring_norm(ring, a * b);
    let mut g = vec![Rational::zero(); n + 1];
    g[1] = inv.clone();
    // pw[k][j] for 1 <= k <= n, 0 <= j <= n
    let mut pw = vec![vec![Rational::zero(); n + 1]; n + 1];
    pw[1][1] = g[1].clone();
    for k in 2..=n {
        pw[k][k] = mul(&pw[k - 1][k - 1], &g[1]);
    }
    for j in 2..=n {
        for k in 2..j {
            // pw[k][j] = sum_{i=1}^{j-k+1} g_i * pw[k-1][j-i]; only g_{<j} is involved.
            let mut s = Rational::zero();
            for i in 1..=(j + 1 - k) {
                if !g[i].is_zero() && !pw[k - 1][j - i].is_zero() {
                    s += &g[i] * &pw[k - 1][j - i];
                }
            }
            pw[k][j] = ring_norm(ring, s);
        }
        let mut s = Rational::zero();
        for k in 2..=j {
            if !c[k].is_zero() {
                s += &c[k] * &pw[k][j];
            }
        }
        g[j] = ring_norm(ring, -(s * &inv));
        pw[1][j] = g[j].clone();
    }
    WeightedPoly::from_terms(
        ring,
        f.vars().clone(),
        g.into_iter().enumerate().map(|(e, a)| (vec![e as u32], a)),
        Some(d),
    )
}

fn ring_norm(ring: Ring, q: Rational) -> Rational {
    ring.norm(q)
}
