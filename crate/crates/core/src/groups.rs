//! Finite groups on dense element indices.
//!
//! Every group numbers its elements `0..order` with `0` the identity.
//! Multiplication is a table lookup when `order²` fits the table budget,
//! otherwise it is computed from the factors of a product or quotient.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(u32);

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        GroupElement(i as u32)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Size limits for group construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCaps {
    /// Largest base (cyclic or permutation) group.
    pub base_order: usize,
    /// Largest product or quotient group.
    pub product_order: usize,
    /// Largest `order²` for which a multiplication table is cached.
    pub table_entries: usize,
}

impl Default for GroupCaps {
    fn default() -> Self {
        Self { base_order: 360, product_order: 10_000, table_entries: 1 << 24 }
    }
}

#[derive(Clone, Debug)]
enum Law {
    Table(Vec<u16>),
    Product { left: FiniteGroup, right: FiniteGroup },
    Quotient { parent: FiniteGroup, reps: Vec<u32>, coset_of: Vec<u32> },
}

/// How a group was built. Used to recover product/quotient structure.
#[derive(Clone, Debug)]
pub enum Construction {
    Cyclic(usize),
    Symmetric(usize),
    Alternating(usize),
    Product(FiniteGroup, FiniteGroup),
    Quotient { parent: FiniteGroup, subgroup: Vec<GroupElement> },
}

#[derive(Debug)]
struct GroupData {
    label: String,
    order: usize,
    law: Law,
    inv: Vec<u32>,
    perms: Option<Vec<Vec<u8>>>,
    construction: Construction,
}

/// A finite group. Cloning is cheap; the data is shared and immutable.
#[derive(Clone)]
pub struct FiniteGroup {
    data: Arc<GroupData>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.data.label, self.data.order)
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.order() == other.order()
                && self.label() == other.label()
                && self.table_equal(other))
    }
}

impl FiniteGroup {
    fn from_table(
        label: String,
        order: usize,
        table: Vec<u16>,
        perms: Option<Vec<Vec<u8>>>,
        construction: Construction,
    ) -> Self {
        let mut inv = vec![0u32; order];
        for a in 0..order {
            for b in 0..order {
                if table[a * order + b] == 0 {
                    inv[a] = b as u32;
                    break;
                }
            }
        }
        Self {
            data: Arc::new(GroupData { label, order, law: Law::Table(table), inv, perms, construction }),
        }
    }

    fn finish(label: String, order: usize, law: Law, construction: Construction, caps: &GroupCaps) -> Self {
        let provisional = Self {
            data: Arc::new(GroupData {
                label: label.clone(),
                order,
                law,
                inv: Vec::new(),
                perms: None,
                construction: construction.clone(),
            }),
        };
        if order * order <= caps.table_entries {
            let mut table = vec![0u16; order * order];
            for a in 0..order {
                for b in 0..order {
                    table[a * order + b] = provisional.mul_idx(a, b) as u16;
                }
            }
            return Self::from_table(label, order, table, None, construction);
        }
        let inv = (0..order).map(|a| provisional.inv_uncached(a) as u32).collect();
        let data = Arc::try_unwrap(provisional.data).expect("provisional group is unshared");
        Self { data: Arc::new(GroupData { inv, ..data }) }
    }

    pub fn cyclic(m: usize) -> Result<Self> {
        Self::cyclic_with_caps(m, &GroupCaps::default())
    }

    pub fn cyclic_with_caps(m: usize, caps: &GroupCaps) -> Result<Self> {
        if m == 0 {
            return Err(Error::GroupParameter("cyclic group order must be positive".into()));
        }
        if m > caps.base_order {
            return Err(Error::OrderCapExceeded { order: m, cap: caps.base_order });
        }
        let mut table = vec![0u16; m * m];
        for a in 0..m {
            for b in 0..m {
                table[a * m + b] = ((a + b) % m) as u16;
            }
        }
        Ok(Self::from_table(format!("Z{m}"), m, table, None, Construction::Cyclic(m)))
    }

    /// Symmetric group on `k` points, `1 ≤ k ≤ 5`.
    pub fn symmetric(k: usize) -> Result<Self> {
        if !(1..=5).contains(&k) {
            return Err(Error::GroupParameter(format!("symmetric degree must be in 1..=5, got {k}")));
        }
        Ok(Self::permutations(k, false))
    }

    /// Alternating group on `k` points, `3 ≤ k ≤ 6`.
    pub fn alternating(k: usize) -> Result<Self> {
        if !(3..=6).contains(&k) {
            return Err(Error::GroupParameter(format!("alternating degree must be in 3..=6, got {k}")));
        }
        Ok(Self::permutations(k, true))
    }

    fn permutations(k: usize, even_only: bool) -> Self {
        let perms: Vec<Vec<u8>> = all_permutations(k)
            .into_iter()
            .filter(|p| !even_only || is_even(p))
            .collect();
        let index: HashMap<&[u8], usize> = perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        let order = perms.len();
        let mut table = vec![0u16; order * order];
        let mut buf = vec![0u8; k];
        for (a, p) in perms.iter().enumerate() {
            for (b, q) in perms.iter().enumerate() {
                // (p·q)(i) = p(q(i)): apply q first.
                for i in 0..k {
                    buf[i] = p[q[i] as usize];
                }
                table[a * order + b] = index[buf.as_slice()] as u16;
            }
        }
        let (label, construction) = if even_only {
            (format!("A{k}"), Construction::Alternating(k))
        } else {
            (format!("S{k}"), Construction::Symmetric(k))
        };
        Self::from_table(label, order, table, Some(perms), construction)
    }

    pub fn direct_product(left: &FiniteGroup, right: &FiniteGroup) -> Result<Self> {
        Self::direct_product_with_caps(left, right, &GroupCaps::default())
    }

    /// Componentwise product; the pair `(a, b)` has index `a·|right| + b`.
    pub fn direct_product_with_caps(left: &FiniteGroup, right: &FiniteGroup, caps: &GroupCaps) -> Result<Self> {
        let order = left.order() * right.order();
        if order > caps.product_order {
            return Err(Error::OrderCapExceeded { order, cap: caps.product_order });
        }
        let label = format!("{} x {}", left.label(), right.label());
        Ok(Self::finish(
            label,
            order,
            Law::Product { left: left.clone(), right: right.clone() },
            Construction::Product(left.clone(), right.clone()),
            caps,
        ))
    }

    pub fn central_quotient(parent: &FiniteGroup, subgroup: &[GroupElement]) -> Result<Self> {
        Self::central_quotient_with_caps(parent, subgroup, &GroupCaps::default())
    }

    /// Quotient by a normal subgroup, checked exhaustively. Cosets are
    /// numbered by their smallest parent element, so the identity coset is 0.
    pub fn central_quotient_with_caps(
        parent: &FiniteGroup,
        subgroup: &[GroupElement],
        caps: &GroupCaps,
    ) -> Result<Self> {
        let order = parent.order();
        let mut member = vec![false; order];
        for &h in subgroup {
            parent.check(h)?;
            member[h.index()] = true;
        }
        if !parent.is_subgroup_mask(&member) {
            return Err(Error::NotSubgroup);
        }
        for g in 0..order {
            let gi = parent.inv_idx(g);
            for h in (0..order).filter(|&h| member[h]) {
                if !member[parent.mul_idx(parent.mul_idx(g, h), gi)] {
                    return Err(Error::NotNormal);
                }
            }
        }
        let n_elems: Vec<usize> = (0..order).filter(|&h| member[h]).collect();
        let mut coset_of = vec![u32::MAX; order];
        let mut reps = Vec::new();
        for g in 0..order {
            if coset_of[g] != u32::MAX {
                continue;
            }
            let c = reps.len() as u32;
            reps.push(g as u32);
            for &h in &n_elems {
                coset_of[parent.mul_idx(g, h)] = c;
            }
        }
        let q_order = reps.len();
        if q_order > caps.product_order {
            return Err(Error::OrderCapExceeded { order: q_order, cap: caps.product_order });
        }
        let label = format!("({})/N[{}]", parent.label(), n_elems.len());
        let mut sorted: Vec<GroupElement> = n_elems.iter().map(|&h| GroupElement::from_index(h)).collect();
        sorted.sort();
        Ok(Self::finish(
            label,
            q_order,
            Law::Quotient { parent: parent.clone(), reps, coset_of },
            Construction::Quotient { parent: parent.clone(), subgroup: sorted },
            caps,
        ))
    }

    pub fn order(&self) -> usize {
        self.data.order
    }

    pub fn label(&self) -> &str {
        &self.data.label
    }

    pub fn construction(&self) -> &Construction {
        &self.data.construction
    }

    /// Permutation images of an element, for permutation groups.
    pub fn permutation(&self, g: GroupElement) -> Option<&[u8]> {
        self.data.perms.as_ref().map(|p| p[g.index()].as_slice())
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::IDENTITY
    }

    pub fn element(&self, index: usize) -> Result<GroupElement> {
        if index < self.order() {
            Ok(GroupElement::from_index(index))
        } else {
            Err(Error::ElementOutOfRange { index, order: self.order() })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> {
        (0..self.order()).map(GroupElement::from_index)
    }

    pub(crate) fn check(&self, g: GroupElement) -> Result<()> {
        self.element(g.index()).map(|_| ())
    }

    pub fn mul(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        GroupElement::from_index(self.mul_idx(a.index(), b.index()))
    }

    pub fn inv(&self, a: GroupElement) -> GroupElement {
        GroupElement::from_index(self.inv_idx(a.index()))
    }

    /// `a b a⁻¹ b⁻¹`.
    pub fn commutator(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        let ab = self.mul(a, b);
        let ai_bi = self.mul(self.inv(a), self.inv(b));
        self.mul(ab, ai_bi)
    }

    /// Product of a sequence, left to right.
    pub fn product(&self, items: impl IntoIterator<Item = GroupElement>) -> GroupElement {
        items.into_iter().fold(self.identity(), |acc, g| self.mul(acc, g))
    }

    #[inline]
    pub(crate) fn mul_idx(&self, a: usize, b: usize) -> usize {
        match &self.data.law {
            Law::Table(t) => t[a * self.data.order + b] as usize,
            Law::Product { left, right } => {
                let r = right.order();
                left.mul_idx(a / r, b / r) * r + right.mul_idx(a % r, b % r)
            }
            Law::Quotient { parent, reps, coset_of } => {
                coset_of[parent.mul_idx(reps[a] as usize, reps[b] as usize)] as usize
            }
        }
    }

    #[inline]
    pub(crate) fn inv_idx(&self, a: usize) -> usize {
        self.data.inv[a] as usize
    }

    fn inv_uncached(&self, a: usize) -> usize {
        match &self.data.law {
            Law::Table(_) => self.inv_idx(a),
            Law::Product { left, right } => {
                let r = right.order();
                left.inv_idx(a / r) * r + right.inv_idx(a % r)
            }
            Law::Quotient { parent, reps, coset_of } => coset_of[parent.inv_idx(reps[a] as usize)] as usize,
        }
    }

    /// Whether products are looked up in a cached table.
    pub fn has_table(&self) -> bool {
        matches!(self.data.law, Law::Table(_))
    }

    fn table_equal(&self, other: &FiniteGroup) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul_idx(a, b) == other.mul_idx(a, b)))
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (a + 1..n).all(|b| self.mul_idx(a, b) == self.mul_idx(b, a)))
    }

    /// Checks identity, inverse and associativity laws. Associativity is
    /// exhaustive below order 512 and sampled with `seed` above.
    pub fn check_laws(&self, seed: u64) -> Result<()> {
        let n = self.order();
        for g in 0..n {
            if self.mul_idx(0, g) != g || self.mul_idx(g, 0) != g {
                return Err(Error::LawViolation(format!("identity fails on {g}")));
            }
            if self.mul_idx(g, self.inv_idx(g)) != 0 || self.mul_idx(self.inv_idx(g), g) != 0 {
                return Err(Error::LawViolation(format!("inverse fails on {g}")));
            }
        }
        let assoc = |a: usize, b: usize, c: usize| {
            self.mul_idx(self.mul_idx(a, b), c) == self.mul_idx(a, self.mul_idx(b, c))
        };
        if n < 512 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return Err(Error::LawViolation(format!("associativity fails on ({a},{b},{c})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10_000 {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if !assoc(a, b, c) {
                    return Err(Error::LawViolation(format!("associativity fails on ({a},{b},{c})")));
                }
            }
        }
        Ok(())
    }

    fn is_subgroup_mask(&self, member: &[bool]) -> bool {
        if !member[0] {
            return false;
        }
        let elems: Vec<usize> = (0..self.order()).filter(|&h| member[h]).collect();
        elems.iter().all(|&a| elems.iter().all(|&b| member[self.mul_idx(a, b)]))
    }

    /// Whether the listed elements form a subgroup.
    pub fn is_subgroup(&self, elements: &[GroupElement]) -> Result<bool> {
        let mut member = vec![false; self.order()];
        for &h in elements {
            self.check(h)?;
            member[h.index()] = true;
        }
        Ok(self.is_subgroup_mask(&member))
    }

    /// The subgroup generated by `generators`, sorted by index.
    pub fn generate(&self, generators: &[GroupElement]) -> Vec<GroupElement> {
        let n = self.order();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for g in generators {
                let y = self.mul_idx(x, g.index());
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..n).filter(|&i| seen[i]).map(GroupElement::from_index).collect()
    }

    /// Distinct commutator values, sorted.
    pub fn commutators(&self) -> Vec<GroupElement> {
        let n = self.order();
        let mut seen = vec![false; n];
        for a in 0..n {
            for b in 0..n {
                let c = self.commutator(GroupElement::from_index(a), GroupElement::from_index(b));
                seen[c.index()] = true;
            }
        }
        (0..n).filter(|&i| seen[i]).map(GroupElement::from_index).collect()
    }

    pub fn commutator_subgroup(&self) -> Vec<GroupElement> {
        self.generate(&self.commutators())
    }

    pub fn is_perfect(&self) -> bool {
        self.commutator_subgroup().len() == self.order()
    }

    /// Commutator length of `g`; `None` outside the commutator subgroup.
    pub fn commutator_length(&self, g: GroupElement) -> Result<Option<usize>> {
        self.check(g)?;
        Ok(CommutatorLengths::compute(self).length(g))
    }

    /// Maximum commutator length; the group must be perfect.
    pub fn commutator_length_group(&self) -> Result<usize> {
        CommutatorLengths::compute(self).group_length()
    }

    /// Shortest list of pairs `(p, q)` whose commutators multiply to `g`.
    pub fn commutator_decompose(&self, g: GroupElement) -> Result<Vec<(GroupElement, GroupElement)>> {
        self.check(g)?;
        CommutatorLengths::compute(self).decompose(g)
    }
}

fn all_permutations(k: usize) -> Vec<Vec<u8>> {
    // Lexicographic order, so the identity comes first.
    let mut out = Vec::new();
    let mut p: Vec<u8> = (0..k as u8).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| p[j] > p[i]).expect("successor exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

fn is_even(p: &[u8]) -> bool {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 0
}

/// Breadth-first commutator lengths with shortest-path certificates.
///
/// Layer `r` holds the elements that are a product of `r` commutators and no
/// fewer. Each commutator value keeps its lexicographically smallest pair.
#[derive(Clone, Debug)]
pub struct CommutatorLengths {
    group: FiniteGroup,
    dist: Vec<Option<u32>>,
    pred: Vec<(u32, u32)>,
    witness: Vec<Option<(u32, u32)>>,
}

impl CommutatorLengths {
    pub fn compute(group: &FiniteGroup) -> Self {
        let n = group.order();
        let mut witness: Vec<Option<(u32, u32)>> = vec![None; n];
        for a in 0..n {
            for b in 0..n {
                let c = group.commutator(GroupElement::from_index(a), GroupElement::from_index(b));
                witness[c.index()].get_or_insert((a as u32, b as u32));
            }
        }
        let gens: Vec<usize> = (1..n).filter(|&c| witness[c].is_some()).collect();
        let mut dist = vec![None; n];
        let mut pred = vec![(0u32, 0u32); n];
        dist[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].expect("queued elements are reached");
            for &c in &gens {
                let y = group.mul_idx(x, c);
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    pred[y] = (x as u32, c as u32);
                    queue.push_back(y);
                }
            }
        }
        Self { group: group.clone(), dist, pred, witness }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn length(&self, g: GroupElement) -> Option<usize> {
        self.dist.get(g.index()).copied().flatten().map(|d| d as usize)
    }

    pub fn is_perfect(&self) -> bool {
        self.dist.iter().all(Option::is_some)
    }

    /// Largest length over the commutator subgroup. Zero for abelian groups.
    pub fn width(&self) -> usize {
        self.dist.iter().flatten().copied().max().unwrap_or(0) as usize
    }

    pub fn group_length(&self) -> Result<usize> {
        if !self.is_perfect() {
            let commutator_order = self.dist.iter().filter(|d| d.is_some()).count();
            return Err(Error::NotPerfect { order: self.group.order(), commutator_order });
        }
        Ok(self.width())
    }

    pub fn decompose(&self, g: GroupElement) -> Result<Vec<(GroupElement, GroupElement)>> {
        if self.length(g).is_none() {
            return Err(Error::NotInCommutatorSubgroup(g.index()));
        }
        let mut pairs = Vec::new();
        let mut x = g.index();
        while x != 0 {
            let (prev, c) = self.pred[x];
            let (p, q) = self.witness[c as usize].expect("edge labels are commutators");
            pairs.push((GroupElement(p), GroupElement(q)));
            x = prev as usize;
        }
        pairs.reverse();
        let value = self.group.product(pairs.iter().map(|&(p, q)| self.group.commutator(p, q)));
        if value != g {
            return Err(Error::Internal(format!("commutator word evaluates to {value}, expected {g}")));
        }
        Ok(pairs)
    }
}

/// JSON description of a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupDescriptor {
    Cyclic { m: usize },
    Alternating { k: usize },
    Symmetric { k: usize },
    /// Left-nested product of two or more factors.
    Product { factors: Vec<GroupDescriptor> },
    /// Quotient by the listed parent element indices.
    Quotient { parent: Box<GroupDescriptor>, subgroup: Vec<usize> },
}

impl GroupDescriptor {
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<FiniteGroup> {
        self.build_with_caps(&GroupCaps::default())
    }

    pub fn build_with_caps(&self, caps: &GroupCaps) -> Result<FiniteGroup> {
        match self {
            GroupDescriptor::Cyclic { m } => FiniteGroup::cyclic_with_caps(*m, caps),
            GroupDescriptor::Alternating { k } => {
                let g = FiniteGroup::alternating(*k)?;
                check_base(&g, caps)
            }
            GroupDescriptor::Symmetric { k } => {
                let g = FiniteGroup::symmetric(*k)?;
                check_base(&g, caps)
            }
            GroupDescriptor::Product { factors } => {
                let mut iter = factors.iter();
                let first = iter
                    .next()
                    .ok_or_else(|| Error::GroupParameter("product needs at least one factor".into()))?;
                let mut acc = first.build_with_caps(caps)?;
                for f in iter {
                    acc = FiniteGroup::direct_product_with_caps(&acc, &f.build_with_caps(caps)?, caps)?;
                }
                Ok(acc)
            }
            GroupDescriptor::Quotient { parent, subgroup } => {
                let p = parent.build_with_caps(caps)?;
                let elems = subgroup.iter().map(|&i| p.element(i)).collect::<Result<Vec<_>>>()?;
                FiniteGroup::central_quotient_with_caps(&p, &elems, caps)
            }
        }
    }
}

fn check_base(g: &FiniteGroup, caps: &GroupCaps) -> Result<FiniteGroup> {
    if g.order() > caps.base_order {
        Err(Error::OrderCapExceeded { order: g.order(), cap: caps.base_order })
    } else {
        Ok(g.clone())
    }
}
