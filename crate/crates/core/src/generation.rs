//! Subgroups of `Gⁿ` generated by diagonal-pattern subgroups `G_v`.
//!
//! Tuples are stored as mixed-radix indices, little-endian over components:
//! `(g_0, …, g_{n-1})` has index `Σ g_i·|G|^i`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{CommutatorLengths, Construction, FiniteGroup, GroupElement};
use crate::lattice::IntegerLattice;
use crate::typevec::{index_classes, Splitting, TypeSet, TypeVector};

pub const DEFAULT_STATE_CAP: u64 = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureOptions {
    pub cap_states: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        Self { cap_states: DEFAULT_STATE_CAP, threads: None }
    }
}

impl ClosureOptions {
    pub(crate) fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match self.threads {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            None => f(),
        }
    }
}

fn state_count(group: &FiniteGroup, arity: usize, cap: u64) -> Result<u64> {
    let states = (group.order() as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
    if states > cap as u128 || states > u32::MAX as u128 * 16 {
        return Err(Error::StateCapExceeded { states, cap });
    }
    Ok(states as u64)
}

/// A subset of `Gⁿ` as a bitset over tuple indices.
#[derive(Clone)]
pub struct TupleSubset {
    group: FiniteGroup,
    arity: usize,
    states: u64,
    bits: Vec<u64>,
    count: u64,
}

impl fmt::Debug for TupleSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TupleSubset({}^{}, {} of {})", self.group.label(), self.arity, self.count, self.states)
    }
}

impl PartialEq for TupleSubset {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.count == other.count && self.bits == other.bits && self.group == other.group
    }
}

impl TupleSubset {
    pub fn empty(group: &FiniteGroup, arity: usize, cap: u64) -> Result<Self> {
        if arity == 0 {
            return Err(Error::BadArity { got: 0, max: crate::typevec::MAX_ARITY });
        }
        let states = state_count(group, arity, cap)?;
        Ok(Self { group: group.clone(), arity, states, bits: vec![0; states.div_ceil(64) as usize], count: 0 })
    }

    pub fn identity(group: &FiniteGroup, arity: usize, cap: u64) -> Result<Self> {
        let mut s = Self::empty(group, arity, cap)?;
        s.insert_index(0);
        Ok(s)
    }

    pub fn full(group: &FiniteGroup, arity: usize, cap: u64) -> Result<Self> {
        let mut s = Self::empty(group, arity, cap)?;
        for w in s.bits.iter_mut() {
            *w = u64::MAX;
        }
        let tail = s.states % 64;
        if tail != 0 {
            *s.bits.last_mut().expect("nonempty") = (1u64 << tail) - 1;
        }
        s.count = s.states;
        Ok(s)
    }

    pub fn from_tuples<'a>(
        group: &FiniteGroup,
        arity: usize,
        cap: u64,
        tuples: impl IntoIterator<Item = &'a [GroupElement]>,
    ) -> Result<Self> {
        let mut s = Self::empty(group, arity, cap)?;
        for t in tuples {
            s.insert(t)?;
        }
        Ok(s)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// `|G|ⁿ`.
    pub fn states(&self) -> u64 {
        self.states
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn is_full(&self) -> bool {
        self.count == self.states
    }

    pub fn encode(&self, tuple: &[GroupElement]) -> Result<u64> {
        if tuple.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: tuple.len() });
        }
        let r = self.group.order() as u64;
        let mut x = 0u64;
        for g in tuple.iter().rev() {
            self.group.check(*g)?;
            x = x * r + g.index() as u64;
        }
        Ok(x)
    }

    pub fn decode(&self, mut index: u64) -> Vec<GroupElement> {
        let r = self.group.order() as u64;
        (0..self.arity)
            .map(|_| {
                let d = index % r;
                index /= r;
                GroupElement::from_index(d as usize)
            })
            .collect()
    }

    #[inline]
    pub fn contains_index(&self, index: u64) -> bool {
        index < self.states && self.bits[(index / 64) as usize] >> (index % 64) & 1 == 1
    }

    pub fn contains(&self, tuple: &[GroupElement]) -> Result<bool> {
        Ok(self.contains_index(self.encode(tuple)?))
    }

    #[inline]
    pub fn insert_index(&mut self, index: u64) -> bool {
        let (w, b) = ((index / 64) as usize, index % 64);
        let fresh = self.bits[w] >> b & 1 == 0;
        if fresh {
            self.bits[w] |= 1 << b;
            self.count += 1;
        }
        fresh
    }

    pub fn insert(&mut self, tuple: &[GroupElement]) -> Result<bool> {
        let i = self.encode(tuple)?;
        Ok(self.insert_index(i))
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as u64;
                word &= word - 1;
                Some(w as u64 * 64 + b)
            })
        })
    }

    pub fn tuples(&self) -> impl Iterator<Item = Vec<GroupElement>> + '_ {
        self.indices().map(|i| self.decode(i))
    }

    fn same_shape(&self, other: &TupleSubset) -> Result<()> {
        if self.arity != other.arity || self.group != other.group {
            Err(Error::SubsetMismatch)
        } else {
            Ok(())
        }
    }

    pub fn is_subset_of(&self, other: &TupleSubset) -> Result<bool> {
        self.same_shape(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0))
    }

    /// Members of `self` absent from `other`.
    fn difference(&self, other: &TupleSubset) -> Vec<u64> {
        let mut out = Vec::new();
        for (w, (&a, &b)) in self.bits.iter().zip(&other.bits).enumerate() {
            let mut word = a & !b;
            while word != 0 {
                out.push(w as u64 * 64 + word.trailing_zeros() as u64);
                word &= word - 1;
            }
        }
        out
    }

    fn multiplier(&self, tuple: &[GroupElement]) -> TupleMul {
        TupleMul::new(&self.group, tuple)
    }

    fn multiplier_for_index(&self, index: u64) -> TupleMul {
        self.multiplier(&self.decode(index))
    }

    pub fn mul_tuples(&self, a: &[GroupElement], b: &[GroupElement]) -> Vec<GroupElement> {
        a.iter().zip(b).map(|(&x, &y)| self.group.mul(x, y)).collect()
    }

    /// Exact subgroup test: the subgroup generated by greedily chosen
    /// members must not leave the set and must exhaust it.
    pub fn is_subgroup(&self) -> bool {
        if !self.contains_index(0) {
            return false;
        }
        let mut h = self.clone_empty();
        h.insert_index(0);
        let mut gens: Vec<TupleMul> = Vec::new();
        for x in self.indices() {
            if h.contains_index(x) {
                continue;
            }
            gens.push(self.multiplier_for_index(x));
            let frontier: Vec<u64> = h.indices().collect();
            if !bfs(&mut h, frontier, &gens, None, Some(self)) {
                return false;
            }
        }
        h.count == self.count
    }

    fn clone_empty(&self) -> TupleSubset {
        TupleSubset {
            group: self.group.clone(),
            arity: self.arity,
            states: self.states,
            bits: vec![0; self.bits.len()],
            count: 0,
        }
    }
}

/// Right multiplication by a fixed tuple, acting on tuple indices.
#[derive(Clone)]
struct TupleMul {
    radix: u64,
    parts: Vec<(u64, Arc<[u32]>)>,
}

impl TupleMul {
    fn new(group: &FiniteGroup, tuple: &[GroupElement]) -> Self {
        let r = group.order() as u64;
        let mut parts = Vec::new();
        let mut w = 1u64;
        for &g in tuple {
            if g != GroupElement::IDENTITY {
                let map: Arc<[u32]> = (0..group.order()).map(|d| group.mul_idx(d, g.index()) as u32).collect();
                parts.push((w, map));
            }
            w = w.saturating_mul(r);
        }
        Self { radix: r, parts }
    }

    /// Left multiplication `x ↦ tuple · x`.
    fn left(group: &FiniteGroup, tuple: &[GroupElement]) -> Self {
        let r = group.order() as u64;
        let mut parts = Vec::new();
        let mut w = 1u64;
        for &g in tuple {
            if g != GroupElement::IDENTITY {
                let map: Arc<[u32]> = (0..group.order()).map(|d| group.mul_idx(g.index(), d) as u32).collect();
                parts.push((w, map));
            }
            w = w.saturating_mul(r);
        }
        Self { radix: r, parts }
    }

    #[inline]
    fn apply(&self, mut x: u64) -> u64 {
        for (w, map) in &self.parts {
            let d = (x / w) % self.radix;
            x = x - d * w + map[d as usize] as u64 * w;
        }
        x
    }
}

/// Level-synchronous breadth-first closure under right multiplication.
///
/// `frontier` holds members whose images are still unexplored. New members
/// are appended to `record`. Returns false as soon as a new member falls
/// outside `guard`.
fn bfs(
    set: &mut TupleSubset,
    mut frontier: Vec<u64>,
    gens: &[TupleMul],
    mut record: Option<&mut Vec<u64>>,
    guard: Option<&TupleSubset>,
) -> bool {
    if gens.is_empty() {
        return true;
    }
    while !frontier.is_empty() {
        let view = &*set;
        let candidates: Vec<u64> = frontier
            .par_chunks(4096)
            .flat_map_iter(|chunk| {
                chunk.iter().flat_map(move |&x| gens.iter().map(move |m| m.apply(x))).filter(|&y| !view.contains_index(y))
            })
            .collect();
        let mut next = Vec::new();
        for y in candidates {
            if set.insert_index(y) {
                if let Some(g) = guard {
                    if !g.contains_index(y) {
                        return false;
                    }
                }
                next.push(y);
                if let Some(r) = record.as_deref_mut() {
                    r.push(y);
                }
            }
        }
        frontier = next;
    }
    true
}

/// A small generating set of `G`, chosen greedily in index order.
pub fn generating_set(group: &FiniteGroup) -> Vec<GroupElement> {
    let mut gens = Vec::new();
    let mut inside = vec![false; group.order()];
    inside[0] = true;
    for x in group.elements() {
        if !inside[x.index()] {
            gens.push(x);
            inside.iter_mut().for_each(|b| *b = false);
            for h in group.generate(&gens) {
                inside[h.index()] = true;
            }
        }
    }
    gens
}

fn pattern_tuple(group: &FiniteGroup, v: &TypeVector, g: GroupElement) -> Vec<GroupElement> {
    (0..v.arity()).map(|i| if v.get(i) { g } else { group.identity() }).collect()
}

fn pattern_generators(group: &FiniteGroup, gens: &[GroupElement], v: &TypeVector) -> Vec<TupleMul> {
    if v.is_zero() {
        return Vec::new();
    }
    gens.iter().map(|&g| TupleMul::new(group, &pattern_tuple(group, v, g))).collect()
}

/// `G_v = {(g^{v_1}, …, g^{v_n})}`.
pub fn g_v_set(group: &FiniteGroup, v: &TypeVector, cap: u64) -> Result<TupleSubset> {
    let mut s = TupleSubset::empty(group, v.arity(), cap)?;
    for g in group.elements() {
        s.insert(&pattern_tuple(group, v, g))?;
    }
    Ok(s)
}

/// `{a·b | a ∈ A, b ∈ B}` by direct enumeration of pairs. Multiplier tables
/// are built for the smaller side only.
pub fn product_set(a: &TupleSubset, b: &TupleSubset) -> Result<TupleSubset> {
    a.same_shape(b)?;
    let (muls, xs): (Vec<TupleMul>, Vec<u64>) = if b.count() <= a.count() {
        (b.indices().map(|y| b.multiplier_for_index(y)).collect(), a.indices().collect())
    } else {
        (a.indices().map(|x| TupleMul::left(&a.group, &a.decode(x))).collect(), b.indices().collect())
    };
    let mut out = a.clone_empty();
    for batch in xs.chunks(1 << 16) {
        let products: Vec<u64> = batch
            .par_chunks(1024)
            .flat_map_iter(|chunk| chunk.iter().flat_map(|&x| muls.iter().map(move |m| m.apply(x))).collect::<Vec<_>>())
            .collect();
        for p in products {
            out.insert_index(p);
        }
    }
    Ok(out)
}

/// Replaces `set` by `set · H`, where `H` is the subgroup generated by `gens`.
fn right_multiply_subgroup(set: &mut TupleSubset, gens: &[TupleMul]) {
    let frontier: Vec<u64> = set.indices().collect();
    bfs(set, frontier, gens, None, None);
}

/// Result of power-round closure.
#[derive(Clone, Debug)]
pub struct Closure {
    pub set: TupleSubset,
    /// Least `q ≥ 1` with `G_V^q = G_V^{q+1}`; `None` if rounds ran out first.
    pub q_min: Option<usize>,
    /// `|G_V^q|` for `q = 0, 1, …`.
    pub round_counts: Vec<u64>,
}

/// Subgroup generated by `∪ G_v`, with the stabilisation exponent.
pub fn gv_power_closure(group: &FiniteGroup, v: &TypeSet) -> Result<Closure> {
    gv_power_closure_with(group, v, &ClosureOptions::default())
}

pub fn gv_power_closure_with(group: &FiniteGroup, v: &TypeSet, opts: &ClosureOptions) -> Result<Closure> {
    opts.run(|| power_rounds(group, v, None, opts.cap_states))
}

/// `G_V^q`, the `q`-fold product of `G_{v_1}⋯G_{v_k}`.
pub fn gv_power(group: &FiniteGroup, v: &TypeSet, q: usize, opts: &ClosureOptions) -> Result<TupleSubset> {
    opts.run(|| power_rounds(group, v, Some(q), opts.cap_states)).map(|c| c.set)
}

fn power_rounds(group: &FiniteGroup, v: &TypeSet, max_rounds: Option<usize>, cap: u64) -> Result<Closure> {
    if v.is_empty() {
        return Err(Error::EmptyTypeSet);
    }
    let n = v.arity();
    let gens = generating_set(group);
    let per_v: Vec<Vec<TupleMul>> = v.iter().map(|t| pattern_generators(group, &gens, t)).collect();
    let k = per_v.len();
    let identity = TupleSubset::identity(group, n, cap)?;
    let mut round_counts = vec![1];
    if max_rounds == Some(0) {
        return Ok(Closure { set: identity, q_min: None, round_counts });
    }
    // layers[j] = S_q · G_{v_1} ⋯ G_{v_j}; layers[0] = S_q.
    let mut layers = vec![identity];
    for g in &per_v {
        let mut next = layers.last().expect("nonempty").clone();
        right_multiply_subgroup(&mut next, g);
        layers.push(next);
    }
    round_counts.push(layers[k].count());
    let mut q = 1;
    if layers[k].count() == 1 {
        return Ok(Closure { set: layers.pop().expect("nonempty"), q_min: Some(1), round_counts });
    }
    loop {
        if max_rounds == Some(q) {
            return Ok(Closure { set: layers.pop().expect("nonempty"), q_min: None, round_counts });
        }
        // Only the newly reached members of each layer need multiplying.
        let mut delta = layers[k].difference(&layers[0]);
        layers[0] = layers[k].clone();
        for j in 1..=k {
            let mut fresh = Vec::new();
            let mut seeds = Vec::new();
            for &x in &delta {
                if layers[j].insert_index(x) {
                    seeds.push(x);
                    fresh.push(x);
                }
            }
            bfs(&mut layers[j], seeds, &per_v[j - 1], Some(&mut fresh), None);
            delta = fresh;
        }
        q += 1;
        round_counts.push(layers[k].count());
        if delta.is_empty() {
            return Ok(Closure { set: layers.pop().expect("nonempty"), q_min: Some(q - 1), round_counts });
        }
    }
}

/// `G_V` for a splitting, as one ordered product pass. Checked against the
/// reversed order, against `|G|^{|V|}`, and for small results against the
/// subgroup axioms.
pub fn splitting_subgroup(group: &FiniteGroup, v: &Splitting, opts: &ClosureOptions) -> Result<TupleSubset> {
    let gens = generating_set(group);
    let pass = |members: &mut dyn Iterator<Item = &TypeVector>| -> Result<TupleSubset> {
        let mut s = TupleSubset::identity(group, v.arity(), opts.cap_states)?;
        for t in members {
            right_multiply_subgroup(&mut s, &pattern_generators(group, &gens, t));
        }
        Ok(s)
    };
    opts.run(|| {
        let forward = pass(&mut v.members().iter())?;
        let backward = pass(&mut v.members().iter().rev())?;
        if forward != backward {
            return Err(Error::Internal("splitting subgroup depends on member order".into()));
        }
        let expected = (group.order() as u64).pow(v.len() as u32);
        if forward.count() != expected {
            return Err(Error::Internal(format!("splitting subgroup has {} elements, expected {expected}", forward.count())));
        }
        if forward.count() <= 1_000_000 && !forward.is_subgroup() {
            return Err(Error::Internal("splitting product is not a subgroup".into()));
        }
        Ok(forward)
    })
}

/// Right-multiplies `set` by the subgroup `G_V` of a splitting.
pub(crate) fn multiply_by_splitting(set: &mut TupleSubset, gens: &[GroupElement], v: &Splitting) {
    let group = set.group.clone();
    let muls: Vec<TupleMul> = v.members().iter().flat_map(|t| pattern_generators(&group, gens, t)).collect();
    right_multiply_subgroup(set, &muls);
}

/// `q(n)`: `q(0) = q(1) = q(2) = 1`, `q(n+1) = (1 + 4·cl)·q(n)`.
pub fn q_of(n: usize, cl: usize) -> u128 {
    let base = 1u128 + 4 * cl as u128;
    base.checked_pow(n.saturating_sub(2) as u32).unwrap_or(u128::MAX)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QBoundReport {
    pub group: String,
    pub n: usize,
    pub commutator_length: usize,
    pub perfect: bool,
    pub rich: bool,
    pub count: u64,
    pub full: bool,
    pub q_min: usize,
    pub bound: u128,
    pub ok: bool,
}

/// Compares the observed stabilisation exponent with `(1 + 4·cl)^{n−2}`.
///
/// For non-perfect groups `cl` is the commutator width and the bound is
/// reported without being implied by `perfect && rich`.
pub fn verify_q_bound(group: &FiniteGroup, v: &TypeSet, opts: &ClosureOptions) -> Result<QBoundReport> {
    let cl = CommutatorLengths::compute(group);
    let closure = gv_power_closure_with(group, v, opts)?;
    let q_min = closure.q_min.expect("unbounded closure always stabilises");
    let bound = q_of(v.arity(), cl.width());
    Ok(QBoundReport {
        group: group.label().to_string(),
        n: v.arity(),
        commutator_length: cl.width(),
        perfect: cl.is_perfect(),
        rich: v.is_rich()?,
        count: closure.set.count(),
        full: closure.set.is_full(),
        q_min,
        bound,
        ok: q_min as u128 <= bound,
    })
}

/// Product of pattern tuples `(g^{v_1}, …, g^{v_n})`, left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactorWord {
    pub factors: Vec<(TypeVector, GroupElement)>,
}

#[derive(Serialize, Deserialize)]
struct FactorRecord {
    pattern: String,
    element_index: usize,
}

impl Serialize for FactorWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<FactorRecord> = self
            .factors
            .iter()
            .map(|(v, g)| FactorRecord { pattern: v.to_string(), element_index: g.index() })
            .collect();
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FactorWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<FactorRecord>::deserialize(d)?;
        let factors = records
            .into_iter()
            .map(|r| {
                TypeVector::parse(&r.pattern)
                    .map(|v| (v, GroupElement::from_index(r.element_index)))
                    .map_err(serde::de::Error::custom)
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(FactorWord { factors })
    }
}

impl FactorWord {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn evaluate(&self, group: &FiniteGroup, arity: usize) -> Result<Vec<GroupElement>> {
        let mut acc = vec![group.identity(); arity];
        for (v, g) in &self.factors {
            if v.arity() != arity {
                return Err(Error::ArityMismatch { expected: arity, got: v.arity() });
            }
            group.check(*g)?;
            for (i, a) in acc.iter_mut().enumerate() {
                if v.get(i) {
                    *a = group.mul(*a, *g);
                }
            }
        }
        Ok(acc)
    }

    fn inverse(&self, group: &FiniteGroup) -> FactorWord {
        FactorWord { factors: self.factors.iter().rev().map(|(v, g)| (*v, group.inv(*g))).collect() }
    }

    /// Merges adjacent factors on the same pattern and drops identities.
    fn push(&mut self, group: &FiniteGroup, v: TypeVector, g: GroupElement) {
        if let Some((last_v, last_g)) = self.factors.last_mut() {
            if *last_v == v {
                *last_g = group.mul(*last_g, g);
                if *last_g == group.identity() {
                    self.factors.pop();
                }
                return;
            }
        }
        if g != group.identity() && !v.is_zero() {
            self.factors.push((v, g));
        }
    }

    fn append(&mut self, group: &FiniteGroup, other: FactorWord) {
        for (v, g) in other.factors {
            self.push(group, v, g);
        }
    }
}

/// Builds factor words for targets in `Gⁿ` from a rich `V` by induction
/// on `n`, following the constructive proof that `G_V` generates `Gⁿ`.
pub struct Decomposer {
    group: FiniteGroup,
    lengths: CommutatorLengths,
}

impl Decomposer {
    pub fn new(group: &FiniteGroup) -> Result<Self> {
        let lengths = CommutatorLengths::compute(group);
        lengths.group_length()?;
        Ok(Self { group: group.clone(), lengths })
    }

    pub fn commutator_length(&self) -> usize {
        self.lengths.width()
    }

    /// Upper bound on word length: `q(n)·|V|`.
    pub fn length_bound(&self, v: &TypeSet) -> u128 {
        q_of(v.arity(), self.lengths.width()).saturating_mul(v.len() as u128)
    }

    pub fn decompose(&self, v: &TypeSet, target: &[GroupElement]) -> Result<FactorWord> {
        if v.arity() != target.len() {
            return Err(Error::ArityMismatch { expected: v.arity(), got: target.len() });
        }
        for &g in target {
            self.group.check(g)?;
        }
        if !v.is_rich()? {
            return Err(Error::NotRich);
        }
        let word = self.solve(v, target)?;
        let value = word.evaluate(&self.group, v.arity())?;
        if value != target {
            return Err(Error::Internal("factor word does not evaluate to its target".into()));
        }
        Ok(word)
    }

    fn solve(&self, v: &TypeSet, target: &[GroupElement]) -> Result<FactorWord> {
        let g = &self.group;
        let n = v.arity();
        let mut word = FactorWord::default();
        match n {
            1 => {
                let one = TypeVector::new(&[1])?;
                word.push(g, one, target[0]);
            }
            2 => self.base_two(v, target, &mut word)?,
            _ => {
                let last = n - 1;
                let head = v.restrict(&[last])?;
                let lifted = lift(&self.solve(&head, &target[..last])?, v, last);
                let h = lifted.evaluate(g, n)?[last];
                word.append(g, lifted);
                let correction = g.mul(g.inv(h), target[last]);
                if correction != g.identity() {
                    let drop_first = v.restrict(&[0])?;
                    let drop_second = v.restrict(&[1])?;
                    let mut tail_target = vec![g.identity(); n - 1];
                    for (p, q) in self.lengths.decompose(correction)? {
                        // a = (x, 1, …, 1, p) and b = (1, y, 1, …, 1, q).
                        tail_target[n - 2] = p;
                        let a = lift(&self.solve(&drop_first, &tail_target)?, v, 0);
                        tail_target[n - 2] = q;
                        let b = lift(&self.solve(&drop_second, &tail_target)?, v, 1);
                        let (ai, bi) = (a.inverse(g), b.inverse(g));
                        word.append(g, a);
                        word.append(g, b);
                        word.append(g, ai);
                        word.append(g, bi);
                    }
                }
            }
        }
        Ok(word)
    }

    fn base_two(&self, v: &TypeSet, t: &[GroupElement], word: &mut FactorWord) -> Result<()> {
        let g = &self.group;
        let p01 = TypeVector::new(&[0, 1])?;
        let p10 = TypeVector::new(&[1, 0])?;
        let p11 = TypeVector::new(&[1, 1])?;
        let pos = |x: &TypeVector| v.iter().position(|m| m == x);
        let (t0, t1) = (t[0], t[1]);
        match (pos(&p01), pos(&p10), pos(&p11)) {
            (Some(_), Some(_), _) => {
                word.push(g, p10, t0);
                word.push(g, p01, t1);
            }
            (Some(i01), None, Some(i11)) => {
                // (1,1)·(0,1): (t0, t0·x) with x = t0⁻¹t1; reversed: (x·t0 = t1).
                if i11 < i01 {
                    word.push(g, p11, t0);
                    word.push(g, p01, g.mul(g.inv(t0), t1));
                } else {
                    word.push(g, p01, g.mul(t1, g.inv(t0)));
                    word.push(g, p11, t0);
                }
            }
            (None, Some(i10), Some(i11)) => {
                if i11 < i10 {
                    word.push(g, p11, t1);
                    word.push(g, p10, g.mul(g.inv(t1), t0));
                } else {
                    word.push(g, p10, g.mul(t0, g.inv(t1)));
                    word.push(g, p11, t1);
                }
            }
            _ => return Err(Error::NotRich),
        }
        Ok(())
    }
}

/// Lifts a word over `R_k(V)` to `V`, using the first member of `V` whose
/// restriction matches each factor pattern.
fn lift(word: &FactorWord, v: &TypeSet, removed: usize) -> FactorWord {
    let factors = word
        .factors
        .iter()
        .map(|(w, g)| {
            let up = v
                .iter()
                .find(|m| m.restrict(&[removed]).map(|r| r == *w).unwrap_or(false))
                .expect("restricted patterns come from V");
            (*up, *g)
        })
        .collect();
    FactorWord { factors }
}

pub fn decompose(group: &FiniteGroup, v: &TypeSet, target: &[GroupElement]) -> Result<FactorWord> {
    Decomposer::new(group)?.decompose(v, target)
}

/// One factor of a group recognised as `(F_1 × ⋯ × F_r)/N`.
#[derive(Clone, Debug)]
pub enum GroupFactor {
    Perfect(FiniteGroup),
    Cyclic(usize),
}

impl GroupFactor {
    pub fn order(&self) -> usize {
        match self {
            GroupFactor::Perfect(f) => f.order(),
            GroupFactor::Cyclic(m) => *m,
        }
    }
}

/// A group written as a product of perfect and cyclic factors, optionally
/// modulo a normal subgroup of that product.
#[derive(Clone, Debug)]
pub struct GroupDecomposition {
    pub factors: Vec<GroupFactor>,
    /// Normal subgroup as element indices of the product, if a quotient.
    pub normal: Option<Vec<GroupElement>>,
}

impl GroupDecomposition {
    pub fn of(group: &FiniteGroup) -> Result<Self> {
        match group.construction() {
            Construction::Quotient { parent, subgroup } => {
                let factors = product_factors(parent)?;
                Ok(Self { factors, normal: Some(subgroup.clone()) })
            }
            _ => Ok(Self { factors: product_factors(group)?, normal: None }),
        }
    }

    /// Per-factor components of a product element, first factor first.
    fn split(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.order();
            index /= f.order();
        }
        out
    }
}

fn product_factors(group: &FiniteGroup) -> Result<Vec<GroupFactor>> {
    match group.construction() {
        Construction::Product(l, r) => {
            let mut out = product_factors(l)?;
            out.extend(product_factors(r)?);
            Ok(out)
        }
        Construction::Cyclic(m) => Ok(vec![GroupFactor::Cyclic(*m)]),
        Construction::Quotient { .. } => {
            Err(Error::NoDecomposition(format!("{}: nested quotients are not recognised", group.label())))
        }
        _ if group.is_perfect() => Ok(vec![GroupFactor::Perfect(group.clone())]),
        _ => Err(Error::NoDecomposition(format!("{} is neither perfect nor cyclic", group.label()))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorPrediction {
    pub factor: String,
    pub order: u128,
    pub structure: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosurePrediction {
    pub order: u128,
    pub factors: Vec<FactorPrediction>,
    /// `|H ∩ Nⁿ|` when the group is a quotient.
    pub normal_intersection: Option<u128>,
    pub deficit: usize,
}

/// Predicts `|⟨G_V⟩|` from the factor structure: a perfect factor `F`
/// contributes `F^{n − deficit}` (tuples constant on the index classes of
/// `V`), a cyclic factor `Z_m` contributes the image of `span_Z(V)` mod `m`,
/// and a quotient by `N` divides by the part of `Nⁿ` inside that product.
pub fn predict_closure(group: &FiniteGroup, v: &TypeSet, cap: u64) -> Result<ClosurePrediction> {
    if v.is_empty() {
        return Err(Error::EmptyTypeSet);
    }
    let decomposition = GroupDecomposition::of(group)?;
    let n = v.arity();
    let classes = index_classes(v);
    let deficit = n - classes.len();
    let generators: Vec<Vec<i64>> = v.iter().map(|t| t.components().into_iter().map(i64::from).collect()).collect();
    let mut order: u128 = 1;
    let mut factors = Vec::new();
    // Membership test per factor for tuples of factor components.
    let mut lattices: Vec<Option<IntegerLattice>> = Vec::new();
    for f in &decomposition.factors {
        let (o, structure, lattice) = match f {
            GroupFactor::Perfect(g) => {
                let o = (g.order() as u128).checked_pow(classes.len() as u32).ok_or(Error::Overflow)?;
                (o, format!("{}^{}", g.label(), classes.len()), None)
            }
            GroupFactor::Cyclic(m) => {
                let mut rows = generators.clone();
                for i in 0..n {
                    let mut e = vec![0i64; n];
                    e[i] = *m as i64;
                    rows.push(e);
                }
                let lattice = IntegerLattice::from_generators(n, &rows)?;
                let o = if *m == 1 { 1 } else { crate::lattice::span_z(v)?.mod_m_order(*m as u64)? as u128 };
                (o, format!("span_Z(V) mod {m}"), Some(lattice))
            }
        };
        order = order.checked_mul(o).ok_or(Error::Overflow)?;
        factors.push(FactorPrediction {
            factor: match f {
                GroupFactor::Perfect(g) => g.label().to_string(),
                GroupFactor::Cyclic(m) => format!("Z{m}"),
            },
            order: o,
            structure,
        });
        lattices.push(lattice);
    }
    let normal_intersection = match &decomposition.normal {
        None => None,
        Some(normal) => {
            let states = (normal.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if states > cap as u128 {
                return Err(Error::StateCapExceeded { states, cap });
            }
            let split: Vec<Vec<usize>> = normal.iter().map(|h| decomposition.split(h.index())).collect();
            let mut hits: u128 = 0;
            let mut digits = vec![0usize; n];
            'outer: loop {
                let inside = decomposition.factors.iter().enumerate().all(|(fi, f)| {
                    let comp = |i: usize| split[digits[i]][fi];
                    match f {
                        GroupFactor::Perfect(_) => {
                            (0..n).all(|i| classes.iter().any(|c| c.contains(&i)) || comp(i) == 0)
                                && classes.iter().all(|c| c.iter().all(|&i| comp(i) == comp(c[0])))
                        }
                        GroupFactor::Cyclic(_) => {
                            let z: Vec<i64> = (0..n).map(|i| comp(i) as i64).collect();
                            lattices[fi].as_ref().expect("cyclic factors carry a lattice").contains(&z).unwrap_or(false)
                        }
                    }
                });
                if inside {
                    hits += 1;
                }
                for d in digits.iter_mut() {
                    *d += 1;
                    if *d < normal.len() {
                        continue 'outer;
                    }
                    *d = 0;
                }
                break;
            }
            order /= hits;
            Some(hits)
        }
    };
    Ok(ClosurePrediction { order, factors, normal_intersection, deficit })
}
