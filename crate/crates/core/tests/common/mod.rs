//! Checks shared by the property suites and the acceptance runner.
//! Each returns `Err(description)` on a counterexample.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use webhol::generation::{gv_power_closure, product_set, splitting_subgroup, ClosureOptions, TupleSubset};
use webhol::groups::{FiniteGroup, GroupElement};
use webhol::typevec::{kappa, splitting_for, Splitting, TypeSet, TypeVector};

pub type Check = Result<(), String>;

pub fn small_groups() -> Vec<FiniteGroup> {
    vec![
        FiniteGroup::cyclic(2).unwrap(),
        FiniteGroup::cyclic(3).unwrap(),
        FiniteGroup::symmetric(3).unwrap(),
        FiniteGroup::alternating(4).unwrap(),
    ]
}

/// A group from `groups` with `|G|ⁿ ≤ limit`, if any.
pub fn pick_group<R: Rng>(rng: &mut R, groups: &[FiniteGroup], n: usize, limit: u64) -> FiniteGroup {
    let fits: Vec<&FiniteGroup> =
        groups.iter().filter(|g| (g.order() as u64).checked_pow(n as u32).is_some_and(|s| s <= limit)).collect();
    (*fits.choose(rng).unwrap_or(&&groups[0])).clone()
}

pub fn random_typeset<R: Rng>(rng: &mut R, n: usize, size: usize) -> TypeSet {
    let masks: Vec<u64> = (0..size).map(|_| rng.gen_range(0..1u64 << n)).collect();
    TypeSet::from_masks(n, &masks).unwrap()
}

/// A random rich set: the unit vectors, or a random set padded until rich.
pub fn random_rich<R: Rng>(rng: &mut R, n: usize) -> TypeSet {
    loop {
        let size = rng.gen_range(1..=2 * n + 1);
        let v = random_typeset(rng, n, size);
        if v.is_rich().unwrap() {
            return v;
        }
    }
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=n);
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// A splitting and a coarsening of it obtained by merging classes.
pub fn random_refinement_pair<R: Rng>(rng: &mut R, n: usize) -> (Splitting, Splitting) {
    let labels = random_labels(rng, n);
    let merge: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n.max(1))).collect();
    let coarse_labels: Vec<usize> = labels.iter().map(|&l| merge[l]).collect();
    (splitting_for(&labels).unwrap(), splitting_for(&coarse_labels).unwrap())
}

/// Removing any one index from a rich set leaves a rich set.
pub fn restriction_keeps_richness(v: &TypeSet) -> Check {
    if v.arity() < 2 || !v.is_rich().unwrap() {
        return Ok(());
    }
    for k in 0..v.arity() {
        let r = v.restrict(&[k]).unwrap();
        if !r.is_rich().unwrap() {
            return Err(format!("{v} rich but restriction at {k} = {r} is not"));
        }
    }
    Ok(())
}

/// A finer splitting has a larger subgroup.
pub fn refinement_monotone(g: &FiniteGroup, fine: &Splitting, coarse: &Splitting) -> Check {
    if !fine.refines(coarse).unwrap() {
        return Ok(());
    }
    let opts = ClosureOptions::default();
    let big = splitting_subgroup(g, fine, &opts).map_err(|e| e.to_string())?;
    let small = splitting_subgroup(g, coarse, &opts).map_err(|e| e.to_string())?;
    if small.is_subset_of(&big).unwrap() {
        Ok(())
    } else {
        Err(format!("G_{coarse} not inside G_{fine} for {}", g.label()))
    }
}

/// Every element of the closure for `R_k(V)` extends to one for `V`.
pub fn restriction_lift(g: &FiniteGroup, v: &TypeSet, k: usize) -> Check {
    if v.arity() < 2 {
        return Ok(());
    }
    let full = gv_power_closure(g, v).map_err(|e| e.to_string())?.set;
    let r = v.restrict(&[k]).unwrap();
    let part = gv_power_closure(g, &r).map_err(|e| e.to_string())?.set;
    let mut projected = TupleSubset::empty(g, v.arity() - 1, u64::MAX).unwrap();
    for mut t in full.tuples() {
        t.remove(k);
        projected.insert(&t).unwrap();
    }
    if part.is_subset_of(&projected).unwrap() {
        Ok(())
    } else {
        Err(format!("closure of R_{k}({v}) not covered by projection, {}", g.label()))
    }
}

/// For `V'` refining `V`, every `v ∈ V` is the disjoint sum of `κ(v, V')`,
/// whose members all lie below `v`; without refinement some `v` fails.
pub fn kappa_dominance(fine: &Splitting, coarse: &Splitting) -> Check {
    let mut all_sums = true;
    for v in coarse.members() {
        let k = kappa(v, fine).unwrap();
        let sum: Vec<u32> = if k.is_empty() { vec![0; v.arity()] } else { k.sum() };
        let exact = sum.iter().enumerate().all(|(i, &s)| s == u32::from(v.get(i)));
        all_sums &= exact;
        if fine.refines(coarse).unwrap() {
            if !exact {
                return Err(format!("{v} is not the sum of kappa({v}, {fine})"));
            }
            if k.iter().any(|w| w.mask() & !v.mask() != 0) {
                return Err(format!("kappa({v}, {fine}) leaves {v}"));
            }
        }
    }
    if all_sums != fine.refines(coarse).unwrap() {
        return Err(format!("refinement of {fine} over {coarse} disagrees with kappa sums"));
    }
    Ok(())
}

/// Patterns with disjoint supports give commuting subgroups.
pub fn disjoint_patterns_commute(g: &FiniteGroup, a: &TypeVector, b: &TypeVector) -> Check {
    if a.mask() & b.mask() != 0 {
        return Ok(());
    }
    let n = a.arity();
    let tuple = |v: &TypeVector, x: GroupElement| -> Vec<GroupElement> {
        (0..n).map(|i| if v.get(i) { x } else { g.identity() }).collect()
    };
    for x in g.elements() {
        for y in g.elements() {
            let (p, q) = (tuple(a, x), tuple(b, y));
            let pq: Vec<GroupElement> = p.iter().zip(&q).map(|(&s, &t)| g.mul(s, t)).collect();
            let qp: Vec<GroupElement> = q.iter().zip(&p).map(|(&s, &t)| g.mul(s, t)).collect();
            if pq != qp {
                return Err(format!("{a} and {b} do not commute in {}", g.label()));
            }
        }
    }
    Ok(())
}

/// `G_V` of a splitting is a subgroup equal to its square, and any member
/// order gives the same set.
pub fn splitting_order_independent<R: Rng>(rng: &mut R, g: &FiniteGroup, s: &Splitting) -> Check {
    let opts = ClosureOptions::default();
    let base = splitting_subgroup(g, s, &opts).map_err(|e| e.to_string())?;
    let mut members = s.members().to_vec();
    members.shuffle(rng);
    let mut permuted = TupleSubset::identity(g, s.arity(), u64::MAX).unwrap();
    for v in &members {
        let gv = webhol::generation::g_v_set(g, v, u64::MAX).unwrap();
        permuted = product_set(&permuted, &gv).unwrap();
    }
    if permuted != base {
        return Err(format!("G_V for {s} depends on order in {}", g.label()));
    }
    if !base.is_subgroup() {
        return Err(format!("G_V for {s} is not a subgroup"));
    }
    // A subgroup is its own square; compute the square outright when cheap.
    if base.count() <= 2_000 && product_set(&base, &base).unwrap() != base {
        return Err(format!("G_V for {s} differs from its square"));
    }
    Ok(())
}

/// Independent deficit oracle: `n` minus the number of distinct columns
/// that are not identically zero.
pub fn deficit_oracle(v: &TypeSet) -> usize {
    let n = v.arity();
    let mut columns: Vec<Vec<u8>> = (0..n)
        .map(|i| v.iter().map(|t| u8::from(t.get(i))).collect::<Vec<_>>())
        .filter(|c| c.contains(&1))
        .collect();
    columns.sort();
    columns.dedup();
    n - columns.len()
}

/// Runs the six structural checks over every small instance: all nonempty
/// subsets of `{0,1}³`, all pairs of splittings of four indices and all
/// pattern pairs of arity four, each against groups with `|G|ⁿ ≤ 10⁵`.
/// Returns the number of instances checked.
pub fn exhaustive_suite() -> Result<usize, String> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    let groups = small_groups();
    let all3: Vec<TypeSet> = (1u64..256)
        .map(|bits| TypeSet::from_masks(3, &(0..8).filter(|m| bits >> m & 1 == 1).collect::<Vec<_>>()).unwrap())
        .collect();
    for v in &all3 {
        restriction_keeps_richness(v)?;
        checked += 1;
        for g in &groups {
            for k in 0..3 {
                restriction_lift(g, v, k)?;
                checked += 1;
            }
        }
    }
    let mut splittings: Vec<Splitting> = Vec::new();
    for code in 0..256usize {
        let labels: Vec<usize> = (0..4).map(|i| code >> (2 * i) & 3).collect();
        let s = splitting_for(&labels).unwrap();
        if !splittings.contains(&s) {
            splittings.push(s);
        }
    }
    if splittings.len() != 15 {
        return Err(format!("expected 15 splittings of four indices, found {}", splittings.len()));
    }
    for a in &splittings {
        for b in &splittings {
            kappa_dominance(a, b)?;
            checked += 1;
            for g in &groups {
                refinement_monotone(g, a, b)?;
                checked += 1;
            }
        }
        for g in &groups {
            splitting_order_independent(&mut rng, g, a)?;
            checked += 1;
        }
    }
    for a in 0..16u64 {
        for b in 0..16u64 {
            let (va, vb) = (TypeVector::from_mask(4, a).unwrap(), TypeVector::from_mask(4, b).unwrap());
            for g in &groups {
                disjoint_patterns_commute(g, &va, &vb)?;
                checked += 1;
            }
        }
    }
    Ok(checked)
}
