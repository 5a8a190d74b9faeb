//! Integer spans of type sets and their reductions mod m.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::typevec::TypeSet;

/// Largest `mⁿ` enumerated by [`mod_m_image`].
pub const DEFAULT_MOD_CAP: u64 = 10_000_000;

/// A sublattice of `Zⁿ` in row echelon normal form.
///
/// Pivot columns strictly increase down the rows, pivots are positive and
/// every entry above a pivot lies in `0..pivot`. The form is unique for a
/// given lattice, so derived equality is lattice equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerLattice {
    arity: usize,
    rank: usize,
    basis: Vec<Vec<i64>>,
    /// Smith invariant factors of the basis, `d_1 | d_2 | … | d_rank`.
    invariant_factors: Vec<i64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductiveProfile {
    pub dim_ss: u64,
    pub dim_ab: u64,
}

impl IntegerLattice {
    /// Lattice generated by arbitrary integer rows of a common length.
    pub fn from_generators(arity: usize, rows: &[Vec<i64>]) -> Result<Self> {
        for r in rows {
            if r.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, got: r.len() });
            }
        }
        let basis = echelon_form(rows.to_vec(), arity)?;
        let invariant_factors = smith_diagonal(basis.clone())?;
        Ok(Self { arity, rank: basis.len(), basis, invariant_factors })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn invariant_factors(&self) -> &[i64] {
        &self.invariant_factors
    }

    /// Renormalises the basis; the result equals `self`.
    pub fn renormalize(&self) -> Result<Self> {
        Self::from_generators(self.arity, &self.basis)
    }

    pub fn contains(&self, z: &[i64]) -> Result<bool> {
        if z.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: z.len() });
        }
        let mut z = z.to_vec();
        for row in &self.basis {
            let p = pivot(row).expect("basis rows are nonzero");
            if z[..p].iter().any(|&x| x != 0) {
                return Ok(false);
            }
            if z[p] % row[p] != 0 {
                return Ok(false);
            }
            let c = z[p] / row[p];
            for (zi, &ri) in z.iter_mut().zip(row) {
                *zi = zi.checked_sub(c.checked_mul(ri).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
            }
        }
        Ok(z.iter().all(|&x| x == 0))
    }

    /// Order of the image of the lattice in `(Z_m)ⁿ`, from the invariant factors.
    pub fn mod_m_order(&self, m: u64) -> Result<u64> {
        if m < 2 {
            return Err(Error::BadModulus(m));
        }
        let mut order: u64 = 1;
        for &d in &self.invariant_factors {
            let g = gcd(d.unsigned_abs(), m);
            order = order.checked_mul(m / g).ok_or(Error::Overflow)?;
        }
        Ok(order)
    }
}

fn pivot(row: &[i64]) -> Option<usize> {
    row.iter().position(|&x| x != 0)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn sub_multiple(target: &mut [i64], source: &[i64], c: i64) -> Result<()> {
    if c == 0 {
        return Ok(());
    }
    for (t, &s) in target.iter_mut().zip(source) {
        *t = t.checked_sub(c.checked_mul(s).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
    }
    Ok(())
}

fn echelon_form(mut rows: Vec<Vec<i64>>, arity: usize) -> Result<Vec<Vec<i64>>> {
    rows.retain(|r| r.iter().any(|&x| x != 0));
    let mut top = 0;
    for col in 0..arity {
        // Euclid on the column below `top` until one nonzero entry remains.
        loop {
            let nonzero: Vec<usize> = (top..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nonzero.len() <= 1 {
                if let Some(&i) = nonzero.first() {
                    rows.swap(top, i);
                }
                break;
            }
            let &min = nonzero.iter().min_by_key(|&&i| rows[i][col].unsigned_abs()).expect("nonempty");
            let src = rows[min].clone();
            for &i in &nonzero {
                if i != min {
                    let c = rows[i][col].div_euclid(src[col]);
                    sub_multiple(&mut rows[i], &src, c)?;
                }
            }
        }
        if top < rows.len() && rows[top][col] != 0 {
            if rows[top][col] < 0 {
                for x in rows[top].iter_mut() {
                    *x = x.checked_neg().ok_or(Error::Overflow)?;
                }
            }
            let src = rows[top].clone();
            for row in rows.iter_mut().take(top) {
                let c = row[col].div_euclid(src[col]);
                sub_multiple(row, &src, c)?;
            }
            top += 1;
        }
    }
    rows.truncate(top);
    Ok(rows)
}

/// Diagonal of the Smith normal form of a full-row-rank matrix.
fn smith_diagonal(mut a: Vec<Vec<i64>>) -> Result<Vec<i64>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::with_capacity(rows);
    for k in 0..rows.min(cols) {
        loop {
            // Move the smallest nonzero entry of the trailing block to (k, k).
            let mut best: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if a[i][j] != 0
                        && best.is_none_or(|(bi, bj)| a[i][j].unsigned_abs() < a[bi][bj].unsigned_abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return Ok(diag);
            };
            a.swap(k, bi);
            for row in a.iter_mut() {
                row.swap(k, bj);
            }
            let p = a[k][k];
            let mut clean = true;
            for i in k + 1..rows {
                let c = a[i][k].div_euclid(p);
                let src = a[k].clone();
                sub_multiple(&mut a[i], &src, c)?;
                clean &= a[i][k] == 0;
            }
            for j in k + 1..cols {
                let c = a[k][j].div_euclid(p);
                for row in a.iter_mut() {
                    row[j] = row[j].checked_sub(c.checked_mul(row[k]).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
                }
                clean &= a[k][j] == 0;
            }
            if !clean {
                continue;
            }
            // Enforce divisibility of the trailing block by the pivot.
            let bad = (k + 1..rows).find(|&i| (k + 1..cols).any(|j| a[i][j] % p != 0));
            if let Some(i) = bad {
                let (head, tail) = a.split_at_mut(i);
                for (x, &y) in head[k][k..cols].iter_mut().zip(&tail[0][k..cols]) {
                    *x = x.checked_add(y).ok_or(Error::Overflow)?;
                }
                continue;
            }
            diag.push(p.abs());
            break;
        }
    }
    Ok(diag)
}

fn rows_of(v: &TypeSet) -> Vec<Vec<i64>> {
    v.iter().map(|t| t.components().into_iter().map(i64::from).collect()).collect()
}

/// The integer span of the members of `V`.
pub fn span_z(v: &TypeSet) -> Result<IntegerLattice> {
    if v.is_empty() {
        return Err(Error::EmptyTypeSet);
    }
    IntegerLattice::from_generators(v.arity(), &rows_of(v))
}

/// Dimension of the real span, by fraction-free elimination.
pub fn rank_r(v: &TypeSet) -> Result<usize> {
    if v.is_empty() {
        return Err(Error::EmptyTypeSet);
    }
    let mut m: Vec<Vec<i128>> = v.iter().map(|t| t.components().into_iter().map(i128::from).collect()).collect();
    let (rows, cols) = (m.len(), v.arity());
    let mut rank = 0;
    let mut prev: i128 = 1;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..rows {
            for j in col + 1..cols {
                let num = m[rank][col]
                    .checked_mul(m[i][j])
                    .and_then(|a| m[i][col].checked_mul(m[rank][j]).and_then(|b| a.checked_sub(b)))
                    .ok_or(Error::Overflow)?;
                m[i][j] = num / prev;
            }
            m[i][col] = 0;
        }
        prev = m[rank][col];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Ok(rank)
}

/// The subgroup of `(Z_m)ⁿ` generated by `V` reduced mod `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModImage {
    pub modulus: u64,
    pub arity: usize,
    pub order: u64,
    /// Members as little-endian base-`m` codes, sorted.
    codes: Vec<u64>,
}

impl ModImage {
    pub fn is_full(&self) -> bool {
        Some(self.order) == self.modulus.checked_pow(self.arity as u32)
    }

    pub fn index(&self) -> u64 {
        self.modulus.pow(self.arity as u32) / self.order
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn elements(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let (m, n) = (self.modulus, self.arity);
        self.codes.iter().map(move |&c| decode(c, m, n))
    }

    pub fn contains(&self, z: &[u64]) -> bool {
        z.len() == self.arity && self.codes.binary_search(&encode(z, self.modulus)).is_ok()
    }
}

fn encode(z: &[u64], m: u64) -> u64 {
    z.iter().rev().fold(0, |acc, &x| acc * m + x % m)
}

fn decode(mut c: u64, m: u64, n: usize) -> Vec<u64> {
    (0..n)
        .map(|_| {
            let x = c % m;
            c /= m;
            x
        })
        .collect()
}

pub fn mod_m_image(v: &TypeSet, m: u64) -> Result<ModImage> {
    mod_m_image_with_cap(v, m, DEFAULT_MOD_CAP)
}

/// Enumerates the image by breadth-first closure and checks its order
/// against the invariant-factor formula.
pub fn mod_m_image_with_cap(v: &TypeSet, m: u64, cap: u64) -> Result<ModImage> {
    if m < 2 {
        return Err(Error::BadModulus(m));
    }
    if v.is_empty() {
        return Err(Error::EmptyTypeSet);
    }
    let n = v.arity();
    let states = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if states > cap as u128 {
        return Err(Error::StateCapExceeded { states, cap });
    }
    let size = states as u64;
    // Adding generator v to code c: digit i increments when v_i = 1.
    let gens: Vec<Vec<usize>> = v.iter().map(|t| (0..n).filter(|&i| t.get(i)).collect()).collect();
    let mut seen = vec![false; size as usize];
    seen[0] = true;
    let mut queue = VecDeque::from([0u64]);
    let mut digits = vec![0u64; n];
    while let Some(c) = queue.pop_front() {
        for g in &gens {
            let mut x = c;
            for d in digits.iter_mut() {
                *d = x % m;
                x /= m;
            }
            for &i in g {
                digits[i] = (digits[i] + 1) % m;
            }
            let y = encode(&digits, m);
            if !seen[y as usize] {
                seen[y as usize] = true;
                queue.push_back(y);
            }
        }
    }
    let codes: Vec<u64> = (0..size).filter(|&c| seen[c as usize]).collect();
    let order = codes.len() as u64;
    let predicted = span_z(v)?.mod_m_order(m)?;
    if predicted != order {
        return Err(Error::Internal(format!(
            "mod {m} image has {order} elements by enumeration but {predicted} by invariant factors"
        )));
    }
    Ok(ModImage { modulus: m, arity: n, order, codes })
}

/// `deficit(V)·dim_ss + (n − rank_r(V))·dim_ab`.
pub fn codimension(v: &TypeSet, profile: ReductiveProfile) -> Result<u64> {
    let deficit = v.richness_deficit()? as u64;
    let rank = rank_r(v)? as u64;
    let n = v.arity() as u64;
    deficit
        .checked_mul(profile.dim_ss)
        .and_then(|a| (n - rank).checked_mul(profile.dim_ab).and_then(|b| a.checked_add(b)))
        .ok_or(Error::Overflow)
}
