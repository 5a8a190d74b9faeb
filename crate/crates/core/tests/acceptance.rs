//! One pass/fail line per acceptance criterion. Run with `--nocapture` or
//! read the lines from the test harness output; the A5⁴ tiers are ignored by
//! default and run with `cargo test --release --test acceptance -- --ignored`.

mod common;

use std::io::Write;
use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use webhol::generation::{
    gv_power_closure, gv_power_closure_with, predict_closure, q_of, verify_q_bound, ClosureOptions, Decomposer,
};
use webhol::groups::FiniteGroup;
use webhol::lattice::{codimension, mod_m_image, rank_r, ReductiveProfile};
use webhol::typevec::{TypeSet, TypeVector};
use webhol::web::{
    achievable_set, cycled_web, double_pairing_web, predict_web_transport, suffix_truncation_check, types_of,
    SuffixStatus, Verdict,
};

fn report(criterion: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {criterion} [{status}] {detail}").unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {criterion}: {detail}");
}

fn set(text: &str) -> TypeSet {
    TypeSet::parse_text(text).unwrap()
}

fn six() -> TypeSet {
    set("1100 1010 1001 0110 0101 0011")
}

fn baez_sawin() -> TypeSet {
    set("1100 1010 0101 0011")
}

/// Rich set of arity three used for the fast A5 tiers.
fn rich3() -> TypeSet {
    set("110 011 100")
}

/// The double-pairing web alternated `2·q(4)·4` times with A5's `cl = 1`.
fn pairing_web() -> webhol::DiscreteWeb {
    let cycles = 2 * q_of(4, 1) as usize * 4;
    double_pairing_web(cycles, 3).unwrap()
}

#[test]
fn criterion_1_cyclic_separation() {
    let start = Instant::now();
    let v = six();
    let img2 = mod_m_image(&v, 2).unwrap();
    let img3 = mod_m_image(&v, 3).unwrap();
    let c2 = gv_power_closure(&FiniteGroup::cyclic(2).unwrap(), &v).unwrap();
    let c3 = gv_power_closure(&FiniteGroup::cyclic(3).unwrap(), &v).unwrap();
    let pass = img2.order == 8
        && img2.index() == 2
        && img3.order == 81
        && img3.is_full()
        && c2.set.count() == 8
        && c3.set.count() == 81;
    report(
        "1",
        pass,
        format!(
            "mod 2 order {} index {}, mod 3 order {}; closures {} and {} (exact) in {:?}",
            img2.order,
            img2.index(),
            img3.order,
            c2.set.count(),
            c3.set.count(),
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_2_rank_and_codimension() {
    let v = baez_sawin();
    let rank = rank_r(&v).unwrap();
    let codim = codimension(&v, ReductiveProfile { dim_ss: 0, dim_ab: 1 }).unwrap();
    report("2", rank == 3 && codim == 1, format!("rank {rank} (want 3), codimension {codim} (want 1)"));
}

#[test]
fn criterion_3_rich_sets_fill_a5_cubed() {
    let start = Instant::now();
    let a5 = FiniteGroup::alternating(5).unwrap();
    let c = gv_power_closure(&a5, &rich3()).unwrap();
    let sub = c.set.is_subgroup();
    report(
        "3",
        c.set.count() == 216_000 && sub,
        format!("A5 n=3 count {} (want 216000), subgroup {sub} in {:?}", c.set.count(), start.elapsed()),
    );
}

#[test]
#[ignore = "A5⁴ closure, run with --ignored in release"]
fn criterion_3_slow_rich_sets_fill_a5_fourth() {
    let start = Instant::now();
    let a5 = FiniteGroup::alternating(5).unwrap();
    let c = gv_power_closure(&a5, &baez_sawin()).unwrap();
    let sub = c.set.is_subgroup();
    report(
        "3 (n=4)",
        c.set.count() == 12_960_000 && sub,
        format!("A5 n=4 count {} (want 12960000), subgroup {sub} in {:?}", c.set.count(), start.elapsed()),
    );
}

#[test]
fn criterion_4_q_bound_n3() {
    let a5 = FiniteGroup::alternating(5).unwrap();
    let r = verify_q_bound(&a5, &rich3(), &ClosureOptions::default()).unwrap();
    let pass = r.commutator_length == 1 && r.full && r.q_min <= 5 && r.bound == 5 && r.ok;
    report("4", pass, format!("cl {} q_min {} bound {} (n=3, want q_min ≤ 5)", r.commutator_length, r.q_min, r.bound));
}

#[test]
#[ignore = "A5⁴ closure, run with --ignored in release"]
fn criterion_4_slow_q_bound_n4() {
    let a5 = FiniteGroup::alternating(5).unwrap();
    let r = verify_q_bound(&a5, &baez_sawin(), &ClosureOptions::default()).unwrap();
    let pass = r.commutator_length == 1 && r.full && r.q_min <= 25 && r.bound == 25 && r.ok;
    report(
        "4 (n=4)",
        pass,
        format!("cl {} q_min {} bound {} (n=4, want q_min ≤ 25)", r.commutator_length, r.q_min, r.bound),
    );
}

#[test]
fn criterion_5_decomposition_words() {
    let start = Instant::now();
    let a5 = FiniteGroup::alternating(5).unwrap();
    let v = rich3();
    let d = Decomposer::new(&a5).unwrap();
    let bound = q_of(3, d.commutator_length()) * v.len() as u128;
    let mut rng = ChaCha8Rng::seed_from_u64(2003);
    let mut ok = 0;
    let mut longest = 0;
    for _ in 0..1000 {
        let target: Vec<_> = (0..3).map(|_| a5.element(rng.gen_range(0..60)).unwrap()).collect();
        let Ok(word) = d.decompose(&v, &target) else { continue };
        longest = longest.max(word.len());
        if word.evaluate(&a5, 3).unwrap() == target && word.len() as u128 <= bound {
            ok += 1;
        }
    }
    report(
        "5",
        ok == 1000,
        format!("{ok}/1000 words exact, longest {longest} (bound {bound}) in {:?}", start.elapsed()),
    );
}

#[test]
fn criterion_6_deficit_structure() {
    let start = Instant::now();
    let a5 = FiniteGroup::alternating(5).unwrap();
    let v = set("110 001");
    let c = gv_power_closure(&a5, &v).unwrap();
    let constant = c.set.tuples().all(|t| t[0] == t[1]);
    let predicted = predict_closure(&a5, &v, u64::MAX).unwrap();
    let pass = v.richness_deficit().unwrap() == 1 && c.set.count() == 3600 && constant && predicted.order == 3600;
    report(
        "6",
        pass,
        format!(
            "deficit {}, closure {} (want 3600), constant on {{0,1}} {constant}, predicted {} in {:?}",
            v.richness_deficit().unwrap(),
            c.set.count(),
            predicted.order,
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_7_web_prediction_z3() {
    let start = Instant::now();
    let z3 = FiniteGroup::cyclic(3).unwrap();
    let opts = ClosureOptions::default();
    let w = pairing_web();
    let p = predict_web_transport(&w, &z3, &opts).unwrap();
    // Steps 1..=6 are the first repetition of both pairings.
    let s = suffix_truncation_check(&w, &z3, 7, w.step_count(), &opts).unwrap();
    let pass = p.achievable_order == 27 && p.verdict == Verdict::Equal && s.status == SuffixStatus::Equal;
    report(
        "7",
        pass,
        format!(
            "Z3 achievable {} predicted {} verdict {:?}, suffix from 7 {:?} (t' {:?}) in {:?}",
            p.achievable_order,
            p.predicted_order,
            p.verdict,
            s.status,
            s.t_prime,
            start.elapsed()
        ),
    );
}

#[test]
#[ignore = "A5⁴ web transport, run with --ignored in release"]
fn criterion_7_slow_web_prediction_a5() {
    let start = Instant::now();
    let a5 = FiniteGroup::alternating(5).unwrap();
    let opts = ClosureOptions::default();
    let w = pairing_web();
    let p = predict_web_transport(&w, &a5, &opts).unwrap();
    let s = suffix_truncation_check(&w, &a5, 7, w.step_count(), &opts).unwrap();
    let pass = p.achievable_order == 12_960_000 && p.verdict == Verdict::Equal && s.status == SuffixStatus::Equal;
    report(
        "7 (A5)",
        pass,
        format!(
            "A5 achievable {} verdict {:?}, suffix from 7 {:?} in {:?}",
            p.achievable_order,
            p.verdict,
            s.status,
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_8_denseness_shadow() {
    let start = Instant::now();
    let opts = ClosureOptions::default();
    let w = pairing_web();
    let z3 = FiniteGroup::cyclic(3).unwrap();
    let cyclic = achievable_set(&w, &z3, &opts).unwrap();
    let index = mod_m_image(&types_of(&w).unwrap(), 3).unwrap().index();
    let proper = !cyclic.is_full() && cyclic.states() / cyclic.count() == index && index == 3;
    // Perfect side on a three-path web whose types are rich.
    let a5 = FiniteGroup::alternating(5).unwrap();
    let small = cycled_web(&[vec![0, 0, 1], vec![0, 1, 1]], 2 * q_of(3, 1) as usize * 2, 3).unwrap();
    let rich = types_of(&small).unwrap().is_rich().unwrap();
    let full = achievable_set(&small, &a5, &opts).unwrap().is_full();
    report(
        "8",
        proper && rich && full,
        format!(
            "Z3 index {} (predicted {index}), A5 on rich 3-path web full {full} in {:?}",
            cyclic.states() / cyclic.count(),
            start.elapsed()
        ),
    );
}

#[test]
#[ignore = "A5⁴ web transport, run with --ignored in release"]
fn criterion_8_slow_perfect_full_on_pairing_web() {
    let start = Instant::now();
    let a5 = FiniteGroup::alternating(5).unwrap();
    let full = achievable_set(&pairing_web(), &a5, &ClosureOptions::default()).unwrap().is_full();
    report("8 (A5)", full, format!("A5 on the pairing web full {full} in {:?}", start.elapsed()));
}

#[test]
fn criterion_9_property_suites() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let groups = small_groups();
    let cases = 1000;
    let mut failures: Vec<String> = Vec::new();
    let mut record = |c: Check| {
        if let Err(e) = c {
            failures.push(e);
        }
    };
    for _ in 0..cases {
        let n = rng.gen_range(1..=8);
        record(restriction_keeps_richness(&random_rich(&mut rng, n)));

        let (fine, coarse) = random_refinement_pair(&mut rng, n);
        let g = pick_group(&mut rng, &groups, n, 5_000);
        record(refinement_monotone(&g, &fine, &coarse));
        record(kappa_dominance(&fine, &coarse));
        let other = webhol::typevec::splitting_for(&random_labels(&mut rng, n)).unwrap();
        record(kappa_dominance(&fine, &other));

        let m = rng.gen_range(2..=6);
        let size = rng.gen_range(1..=2 * m + 1);
        let v = random_typeset(&mut rng, m, size);
        let g = pick_group(&mut rng, &groups, m, 2_000);
        record(restriction_lift(&g, &v, rng.gen_range(0..m)));

        let mask = (1u64 << n) - 1;
        let a = rng.gen::<u64>() & mask;
        let b = rng.gen::<u64>() & mask & !a;
        let g = groups[rng.gen_range(0..groups.len())].clone();
        record(disjoint_patterns_commute(
            &g,
            &TypeVector::from_mask(n, a).unwrap(),
            &TypeVector::from_mask(n, b).unwrap(),
        ));

        let s = webhol::typevec::splitting_for(&random_labels(&mut rng, n)).unwrap();
        let g = pick_group(&mut rng, &groups, n, 2_000);
        record(splitting_order_independent(&mut rng, &g, &s));
    }
    let exhaustive = exhaustive_suite();
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && exhaustive.is_ok() && elapsed.as_secs_f64() < 60.0;
    report(
        "9",
        pass,
        format!(
            "{cases} random cases per property, {} failures; exhaustive {:?}; {elapsed:?} (limit 60 s){}",
            failures.len(),
            exhaustive,
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    );
}

#[test]
fn cubed_closure_uses_bitset_options() {
    // Guards the fast tier against accidental cap regressions.
    let a5 = FiniteGroup::alternating(5).unwrap();
    let tight = ClosureOptions { cap_states: 1_000, ..ClosureOptions::default() };
    assert!(gv_power_closure_with(&a5, &rich3(), &tight).is_err());
}
