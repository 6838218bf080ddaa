//! Incremental reduced row echelon form over Q (fraction-free, integer rows) or F_p.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{int_mod, lcm_big, reduce_mod_p, Prime, Rational};
use crate::polyring::Ring;

#[derive(Clone, Debug)]
enum Rows {
    /// Primitive integer rows with positive pivot.
    Int(Vec<(usize, Vec<BigInt>)>),
    /// Rows over F_p with pivot 1.
    Mod(u64, Vec<(usize, Vec<u64>)>),
}

/// Rows are kept fully reduced (Gauss-Jordan) and sorted by pivot column, so the
/// result depends only on the row space, never on insertion order.
#[derive(Clone, Debug)]
pub struct Echelon {
    width: usize,
    rows: Rows,
}

fn primitive(mut r: Vec<BigInt>) -> Vec<BigInt> {
    let g = r.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return r;
    }
    let neg = r.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if neg { -g } else { g };
    if !g.is_one() {
        for x in &mut r {
            *x /= &g;
        }
    }
    r
}

fn eliminate(target: &mut Vec<BigInt>, by: &[BigInt], col: usize) {
    if target[col].is_zero() {
        return;
    }
    let a = by[col].clone();
    let b = target[col].clone();
    let g = a.gcd(&b);
    let (a, b) = (&a / &g, &b / &g);
    for (t, y) in target.iter_mut().zip(by) {
        *t = &a * &*t - &b * y;
    }
    *target = primitive(std::mem::take(target));
}

impl Echelon {
    /// Echelon form for row vectors of length `width`; Z_(p) is handled as Q.
    pub fn new(ring: Ring, width: usize) -> Self {
        let rows = match ring {
            Ring::Fp(p) => Rows::Mod(p.get(), Vec::new()),
            _ => Rows::Int(Vec::new()),
        };
        Echelon { width, rows }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        match &self.rows {
            Rows::Int(r) => r.len(),
            Rows::Mod(_, r) => r.len(),
        }
    }

    pub fn pivots(&self) -> Vec<usize> {
        match &self.rows {
            Rows::Int(r) => r.iter().map(|(c, _)| *c).collect(),
            Rows::Mod(_, r) => r.iter().map(|(c, _)| *c).collect(),
        }
    }

    /// Inserts a row; returns whether it enlarged the row space.
    pub fn insert(&mut self, row: &[Rational]) -> Result<bool> {
        if row.len() != self.width {
            return Err(Error::InvalidInput(format!(
                "row of length {} for width {}",
                row.len(),
                self.width
            )));
        }
        match &mut self.rows {
            Rows::Int(rows) => {
                let mut r = primitive(integer_row(row));
                for (c, p) in rows.iter() {
                    eliminate(&mut r, p, *c);
                }
                let Some(col) = r.iter().position(|x| !x.is_zero()) else {
                    return Ok(false);
                };
                for (_, p) in rows.iter_mut() {
                    eliminate(p, &r, col);
                }
                let at = rows.partition_point(|(c, _)| *c < col);
                rows.insert(at, (col, r));
                Ok(true)
            }
            Rows::Mod(p, rows) => {
                let p = *p;
                let mut r = mod_row(row, p)?;
                for (c, q) in rows.iter() {
                    let f = r[*c];
                    sub_mul(&mut r, q, f, p);
                }
                let Some(col) = r.iter().position(|&x| x != 0) else {
                    return Ok(false);
                };
                let inv = inv_mod(r[col], p);
                for x in &mut r {
                    *x = *x * inv % p;
                }
                for (_, q) in rows.iter_mut() {
                    let f = q[col];
                    sub_mul(q, &r, f, p);
                }
                let at = rows.partition_point(|(c, _)| *c < col);
                rows.insert(at, (col, r));
                Ok(true)
            }
        }
    }

    /// Whether the row lies in the current row space.
    pub fn contains(&self, row: &[Rational]) -> Result<bool> {
        let mut copy = self.clone();
        Ok(!copy.insert(row)?)
    }

    /// Nonzero columns of the reduced row with pivot `col`, other than `col`.
    pub fn pivot_support(&self, col: usize) -> Option<Vec<usize>> {
        match &self.rows {
            Rows::Int(rows) => rows.iter().find(|(c, _)| *c == col).map(|(_, r)| {
                (0..r.len()).filter(|&j| j != col && !r[j].is_zero()).collect()
            }),
            Rows::Mod(_, rows) => rows
                .iter()
                .find(|(c, _)| *c == col)
                .map(|(_, r)| (0..r.len()).filter(|&j| j != col && r[j] != 0).collect()),
        }
    }

    /// Basis of the solution space of row . x = 0, one vector per free column in
    /// increasing order. Over Q each vector is primitive integral with a positive
    /// entry at its free column; over F_p that entry is 1.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let pivots = self.pivots();
        let free = (0..self.width).filter(|c| !pivots.contains(c));
        match &self.rows {
            Rows::Int(rows) => free
                .map(|f| {
                    let scale = rows
                        .iter()
                        .filter(|(_, r)| !r[f].is_zero())
                        .fold(BigInt::one(), |acc, (c, r)| lcm_big(&acc, &r[*c]));
                    let mut v = vec![BigInt::zero(); self.width];
                    v[f] = scale.clone();
                    for (c, r) in rows {
                        if !r[f].is_zero() {
                            v[*c] = -(&scale / &r[*c]) * &r[f];
                        }
                    }
                    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
                    v.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
                })
                .collect(),
            Rows::Mod(p, rows) => free
                .map(|f| {
                    let mut v = vec![0u64; self.width];
                    v[f] = 1;
                    for (c, r) in rows {
                        v[*c] = (p - r[f]) % p;
                    }
                    v.into_iter()
                        .map(|x| Rational::from_integer(BigInt::from(x)))
                        .collect()
                })
                .collect(),
        }
    }
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let den = row.iter().fold(BigInt::one(), |acc, x| lcm_big(&acc, x.denom()));
    row.iter()
        .map(|x| x.numer() * (&den / x.denom()))
        .collect()
}

fn mod_row(row: &[Rational], p: u64) -> Result<Vec<u64>> {
    let prime = Prime::new(p)?;
    row.iter()
        .map(|x| {
            if x.denom().is_one() {
                Ok(int_mod(x.numer(), p))
            } else {
                Ok(reduce_mod_p(x, prime)?.value())
            }
        })
        .collect()
}

fn sub_mul(target: &mut [u64], by: &[u64], f: u64, p: u64) {
    if f == 0 {
        return;
    }
    for (t, &y) in target.iter_mut().zip(by) {
        *t = (*t + (p - f) * y % p) % p;
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let (mut b, mut e) = (a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}
