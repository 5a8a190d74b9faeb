//! 0/1 type vectors and ordered sets of them.
//!
//! A [`TypeVector`] records, for `n` paths, which of them pass through a
//! point. Components are indexed from zero in the API; the textual form
//! writes component 0 first, so `"1010"` has ones at indices 0 and 2.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest arity representable by a [`TypeVector`].
pub const MAX_ARITY: usize = 64;

/// Default arity cap for exhaustive richness-deficit search.
pub const DEFAULT_ARITY_CAP: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector {
    arity: u8,
    bits: u64,
}

fn full_mask(arity: usize) -> u64 {
    if arity == 64 {
        u64::MAX
    } else {
        (1u64 << arity) - 1
    }
}

fn check_arity(arity: usize) -> Result<()> {
    if arity == 0 || arity > MAX_ARITY {
        Err(Error::BadArity { got: arity, max: MAX_ARITY })
    } else {
        Ok(())
    }
}

impl TypeVector {
    pub fn new(components: &[u8]) -> Result<Self> {
        check_arity(components.len())?;
        let mut bits = 0u64;
        for (i, &c) in components.iter().enumerate() {
            match c {
                0 => {}
                1 => bits |= 1 << i,
                other => return Err(Error::Parse(format!("component {other} is not 0 or 1"))),
            }
        }
        Ok(Self { arity: components.len() as u8, bits })
    }

    /// Builds a vector from a bit mask where bit `i` is component `i`.
    pub fn from_mask(arity: usize, mask: u64) -> Result<Self> {
        check_arity(arity)?;
        if mask & !full_mask(arity) != 0 {
            return Err(Error::Parse(format!("mask {mask:#x} has bits beyond arity {arity}")));
        }
        Ok(Self { arity: arity as u8, bits: mask })
    }

    pub fn zero(arity: usize) -> Result<Self> {
        Self::from_mask(arity, 0)
    }

    pub fn ones(arity: usize) -> Result<Self> {
        Self::from_mask(arity, full_mask(arity))
    }

    pub fn unit(arity: usize, index: usize) -> Result<Self> {
        check_arity(arity)?;
        if index >= arity {
            return Err(Error::IndexOutOfRange { index, arity });
        }
        Self::from_mask(arity, 1 << index)
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn mask(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, index: usize) -> bool {
        index < self.arity() && (self.bits >> index) & 1 == 1
    }

    pub fn components(&self) -> Vec<u8> {
        (0..self.arity()).map(|i| self.get(i) as u8).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Removes the components listed in `removed`, keeping the order of the rest.
    ///
    /// Duplicates in `removed` are ignored. Removing nothing returns `self`.
    pub fn restrict(&self, removed: &[usize]) -> Result<Self> {
        let n = self.arity();
        let mut drop = 0u64;
        for &k in removed {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, arity: n });
            }
            drop |= 1 << k;
        }
        let kept = n - drop.count_ones() as usize;
        if kept == 0 {
            return Err(Error::EmptyRestriction);
        }
        let mut bits = 0u64;
        let mut out = 0;
        for i in 0..n {
            if drop >> i & 1 == 1 {
                continue;
            }
            if self.get(i) {
                bits |= 1 << out;
            }
            out += 1;
        }
        Ok(Self { arity: kept as u8, bits })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let comps = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("unexpected character {other:?} in type vector"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(&comps)
    }
}

impl std::str::FromStr for TypeVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.arity() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeVector({self})")
    }
}

/// An ordered, duplicate-free set of type vectors of one arity.
///
/// The member order is the order of first insertion and is what products
/// like `G_V` follow. Equality and hashing ignore the order.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct TypeSet {
    arity: usize,
    members: Vec<TypeVector>,
}

impl TypeSet {
    /// An empty set of the given arity.
    pub fn empty(arity: usize) -> Result<Self> {
        check_arity(arity)?;
        Ok(Self { arity, members: Vec::new() })
    }

    /// Collects vectors of the given arity, dropping repeats.
    pub fn new(arity: usize, vectors: impl IntoIterator<Item = TypeVector>) -> Result<Self> {
        let mut set = Self::empty(arity)?;
        for v in vectors {
            set.insert(v)?;
        }
        Ok(set)
    }

    /// Like [`TypeSet::new`] but takes the arity from the first vector.
    pub fn from_vectors(vectors: impl IntoIterator<Item = TypeVector>) -> Result<Self> {
        let mut iter = vectors.into_iter().peekable();
        let arity = iter.peek().ok_or(Error::EmptyTypeSet)?.arity();
        Self::new(arity, iter)
    }

    pub fn from_masks(arity: usize, masks: &[u64]) -> Result<Self> {
        let vs = masks
            .iter()
            .map(|&m| TypeVector::from_mask(arity, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(arity, vs)
    }

    /// Parses strings such as `"1100"`; see [`TypeSet::parse_text`] for lists.
    pub fn from_strs(items: &[&str]) -> Result<Self> {
        let vs = items.iter().map(|s| TypeVector::parse(s)).collect::<Result<Vec<_>>>()?;
        Self::from_vectors(vs)
    }

    /// Appends `v` unless already present. Returns whether it was added.
    pub fn insert(&mut self, v: TypeVector) -> Result<bool> {
        if v.arity() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: v.arity() });
        }
        if self.members.contains(&v) {
            return Ok(false);
        }
        self.members.push(v);
        Ok(true)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn members(&self) -> &[TypeVector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &TypeVector) -> bool {
        self.members.contains(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TypeVector> {
        self.members.iter()
    }

    fn nonempty(&self) -> Result<()> {
        if self.members.is_empty() {
            Err(Error::EmptyTypeSet)
        } else {
            Ok(())
        }
    }

    /// Componentwise integer sum of the members.
    pub fn sum(&self) -> Vec<u32> {
        let mut s = vec![0u32; self.arity];
        for v in &self.members {
            for (i, c) in s.iter_mut().enumerate() {
                *c += v.get(i) as u32;
            }
        }
        s
    }

    /// Rich: every index pair is separated by some member and every index
    /// is covered by a one in some member.
    pub fn is_rich(&self) -> Result<bool> {
        self.nonempty()?;
        let n = self.arity;
        let union = self.members.iter().fold(0u64, |acc, v| acc | v.mask());
        if union != full_mask(n) {
            return Ok(false);
        }
        for i in 0..n {
            for j in i + 1..n {
                let separated = self.members.iter().any(|v| v.get(i) != v.get(j));
                if !separated {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Restriction of every member; repeats collapse and the order of first
    /// occurrence is kept.
    pub fn restrict(&self, removed: &[usize]) -> Result<Self> {
        let mut out: Option<TypeSet> = None;
        for v in &self.members {
            let r = v.restrict(removed)?;
            match out.as_mut() {
                Some(set) => {
                    set.insert(r)?;
                }
                None => out = Some(Self { arity: r.arity(), members: vec![r] }),
            }
        }
        match out {
            Some(set) => Ok(set),
            None => {
                // Validate `removed` even for an empty set.
                let probe = TypeVector::zero(self.arity)?.restrict(removed)?;
                Self::empty(probe.arity())
            }
        }
    }

    pub fn richness_deficit(&self) -> Result<usize> {
        self.richness_deficit_with_cap(DEFAULT_ARITY_CAP)
    }

    /// Smallest number of removed components leaving a rich restriction.
    ///
    /// Subsets are tried by increasing size, lexicographically within a size.
    /// `{(0,…,0)}` has deficit `n`.
    pub fn richness_deficit_with_cap(&self, cap: usize) -> Result<usize> {
        self.nonempty()?;
        let n = self.arity;
        if n > cap {
            return Err(Error::ArityCapExceeded { arity: n, cap });
        }
        if self.members.iter().all(|v| v.is_zero()) {
            return Ok(n);
        }
        for size in 0..n {
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                if self.restrict(&combo)?.is_rich()? {
                    return Ok(size);
                }
                if !next_combination(&mut combo, n) {
                    break;
                }
            }
        }
        Err(Error::Internal("no rich restriction found for a nonzero type set".into()))
    }

    /// Splitting test: members sum to all ones and none is zero.
    pub fn is_splitting(&self) -> Result<bool> {
        self.nonempty()?;
        if self.members.iter().any(|v| v.is_zero()) {
            return Ok(false);
        }
        Ok(self.sum().iter().all(|&c| c == 1))
    }

    /// Text form: one vector per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.members {
            s.push_str(&v.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses vectors separated by newlines, commas, semicolons or spaces.
    /// Lines starting with `#` are comments.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut vs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            for tok in line.split(|c: char| c == ',' || c == ';' || c.is_whitespace()) {
                if !tok.is_empty() {
                    vs.push(TypeVector::parse(tok)?);
                }
            }
        }
        Self::from_vectors(vs)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("type set serialises")
    }

    fn sorted_masks(&self) -> Vec<u64> {
        let mut m: Vec<u64> = self.members.iter().map(|v| v.mask()).collect();
        m.sort_unstable();
        m
    }
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

impl PartialEq for TypeSet {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.sorted_masks() == other.sorted_masks()
    }
}

impl Eq for TypeSet {}

impl Hash for TypeSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.sorted_masks().hash(state);
    }
}

impl fmt::Display for TypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for TypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeSet{self}")
    }
}

impl TryFrom<Vec<Vec<u8>>> for TypeSet {
    type Error = Error;

    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        let vs = rows.iter().map(|r| TypeVector::new(r)).collect::<Result<Vec<_>>>()?;
        Self::from_vectors(vs)
    }
}

impl From<TypeSet> for Vec<Vec<u8>> {
    fn from(set: TypeSet) -> Self {
        set.members.iter().map(|v| v.components()).collect()
    }
}

/// A type set whose members partition the index set.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TypeSet", into = "TypeSet")]
pub struct Splitting(TypeSet);

impl Splitting {
    pub fn as_type_set(&self) -> &TypeSet {
        &self.0
    }

    pub fn into_type_set(self) -> TypeSet {
        self.0
    }

    pub fn members(&self) -> &[TypeVector] {
        self.0.members()
    }

    pub fn arity(&self) -> usize {
        self.0.arity()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The finest splitting `{e_1, …, e_n}`.
    pub fn finest(arity: usize) -> Result<Self> {
        let units = (0..arity).map(|i| TypeVector::unit(arity, i)).collect::<Result<Vec<_>>>()?;
        Self::try_from(TypeSet::new(arity, units)?)
    }

    /// The coarsest splitting `{(1,…,1)}`.
    pub fn coarsest(arity: usize) -> Result<Self> {
        Self::try_from(TypeSet::new(arity, [TypeVector::ones(arity)?])?)
    }

    /// `self ≥ coarser`: every member of `coarser` is a sum of members of `self`.
    pub fn refines(&self, coarser: &Splitting) -> Result<bool> {
        if self.arity() != coarser.arity() {
            return Err(Error::ArityMismatch { expected: coarser.arity(), got: self.arity() });
        }
        for v in coarser.members() {
            let parts = kappa(v, self)?;
            // Members of a splitting are disjoint, so the sum is a union.
            let union = parts.iter().fold(0u64, |acc, p| acc | p.mask());
            if union != v.mask() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl TryFrom<TypeSet> for Splitting {
    type Error = Error;

    fn try_from(set: TypeSet) -> Result<Self> {
        if set.is_splitting()? {
            Ok(Splitting(set))
        } else {
            Err(Error::NotSplitting(set.to_string()))
        }
    }
}

impl From<Splitting> for TypeSet {
    fn from(s: Splitting) -> Self {
        s.0
    }
}

impl fmt::Display for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Splitting{}", self.0)
    }
}

/// Equality-class indicator vectors of `labels`, ordered by smallest index.
pub fn splitting_for<L: Eq>(labels: &[L]) -> Result<Splitting> {
    let n = labels.len();
    check_arity(n)?;
    let mut seen = 0u64;
    let mut classes = Vec::new();
    for i in 0..n {
        if seen >> i & 1 == 1 {
            continue;
        }
        let mut mask = 0u64;
        for (j, l) in labels.iter().enumerate().skip(i) {
            if *l == labels[i] {
                mask |= 1 << j;
            }
        }
        seen |= mask;
        classes.push(TypeVector::from_mask(n, mask)?);
    }
    Ok(Splitting(TypeSet { arity: n, members: classes }))
}

/// Members of `split` sharing a one-position with `v`.
pub fn kappa(v: &TypeVector, split: &Splitting) -> Result<TypeSet> {
    if v.arity() != split.arity() {
        return Err(Error::ArityMismatch { expected: split.arity(), got: v.arity() });
    }
    let members = split.members().iter().copied().filter(|p| p.mask() & v.mask() != 0);
    TypeSet::new(v.arity(), members)
}

/// Index classes of `set`: indices with identical columns, dropping indices
/// that are zero in every member. Each class is a sorted index list; classes
/// are ordered by smallest index.
pub fn index_classes(set: &TypeSet) -> Vec<Vec<usize>> {
    let n = set.arity();
    let column = |i: usize| set.members().iter().map(|v| v.get(i)).collect::<Vec<bool>>();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut signatures: Vec<Vec<bool>> = Vec::new();
    for i in 0..n {
        let col = column(i);
        if !col.iter().any(|&b| b) {
            continue;
        }
        match signatures.iter().position(|s| *s == col) {
            Some(k) => classes[k].push(i),
            None => {
                signatures.push(col);
                classes.push(vec![i]);
            }
        }
    }
    classes
}

/// Distinct splittings, deduplicated ignoring member order.
pub fn dedup_splittings(items: impl IntoIterator<Item = Splitting>) -> Vec<Splitting> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|s| seen.insert(s.clone())).collect()
}
