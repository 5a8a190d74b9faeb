//! Discrete webs: paths as rows of segment labels over common steps.
//!
//! Steps are 0-based here; reports and windows taken from users are 1-based.
//! Each tassel's base point sits at a virtual step before the first column
//! and never enters a transport product.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generation::{
    generating_set, gv_power, multiply_by_splitting, product_set, q_of, ClosureOptions, TupleSubset,
};
use crate::groups::{CommutatorLengths, FiniteGroup, GroupElement};
use crate::typevec::{dedup_splittings, splitting_for, Splitting, TypeSet, MAX_ARITY};

/// Largest `|G|^{#labels}` for which assignments are enumerated outright.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WebSpec", into = "WebSpec")]
pub struct DiscreteWeb {
    paths: Vec<Vec<String>>,
    tassels: Vec<Vec<usize>>,
    base: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct WebSpec {
    paths: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tassels: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Vec<String>>,
}

impl TryFrom<WebSpec> for DiscreteWeb {
    type Error = Error;

    fn try_from(s: WebSpec) -> Result<Self> {
        DiscreteWeb::new(s.paths, s.tassels, s.base)
    }
}

impl From<DiscreteWeb> for WebSpec {
    fn from(w: DiscreteWeb) -> Self {
        WebSpec { paths: w.paths, tassels: Some(w.tassels), base: Some(w.base) }
    }
}

impl DiscreteWeb {
    /// Validates shape, consistent parametrisation and the tassel partition.
    /// Tassels default to a single one; base labels default to `p0, p1, …`.
    pub fn new(paths: Vec<Vec<String>>, tassels: Option<Vec<Vec<usize>>>, base: Option<Vec<String>>) -> Result<Self> {
        let n = paths.len();
        if n == 0 || n > MAX_ARITY {
            return Err(Error::InvalidWeb(format!("need 1..={MAX_ARITY} paths, got {n}")));
        }
        let steps = paths[0].len();
        if steps == 0 {
            return Err(Error::InvalidWeb("paths have no steps".into()));
        }
        if let Some(i) = paths.iter().position(|p| p.len() != steps) {
            return Err(Error::InvalidWeb(format!("path {i} has {} steps, expected {steps}", paths[i].len())));
        }
        let mut step_of: HashMap<&str, usize> = HashMap::new();
        for row in &paths {
            for (t, label) in row.iter().enumerate() {
                if let Some(&s) = step_of.get(label.as_str()) {
                    if s != t {
                        return Err(Error::InvalidWeb(format!(
                            "label {label:?} occurs at steps {} and {}; parametrisation is inconsistent",
                            s + 1,
                            t + 1
                        )));
                    }
                }
                step_of.insert(label, t);
            }
        }
        let tassels = tassels.unwrap_or_else(|| vec![(0..n).collect()]);
        let mut seen = vec![false; n];
        for t in &tassels {
            if t.is_empty() {
                return Err(Error::InvalidWeb("empty tassel".into()));
            }
            for &i in t {
                if i >= n || seen[i] {
                    return Err(Error::InvalidWeb(format!("tassels do not partition the paths at index {i}")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidWeb(format!("path {i} belongs to no tassel")));
        }
        let tassels: Vec<Vec<usize>> = tassels
            .into_iter()
            .map(|mut t| {
                t.sort_unstable();
                t
            })
            .collect();
        let base = base.unwrap_or_else(|| (0..tassels.len()).map(|i| format!("p{i}")).collect());
        if base.len() != tassels.len() {
            return Err(Error::InvalidWeb(format!("{} base labels for {} tassels", base.len(), tassels.len())));
        }
        Ok(Self { paths, tassels, base })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("webs serialise")
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn step_count(&self) -> usize {
        self.paths[0].len()
    }

    pub fn paths(&self) -> &[Vec<String>] {
        &self.paths
    }

    pub fn tassels(&self) -> &[Vec<usize>] {
        &self.tassels
    }

    pub fn base(&self) -> &[String] {
        &self.base
    }

    pub fn column(&self, t: usize) -> Vec<&str> {
        self.paths.iter().map(|p| p[t].as_str()).collect()
    }

    /// Distinct segment labels in first-occurrence order, step by step.
    pub fn labels(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in 0..self.step_count() {
            for p in &self.paths {
                if seen.insert(p[t].as_str()) {
                    out.push(p[t].as_str());
                }
            }
        }
        out
    }

    /// The sub-web on the given paths, as a single tassel.
    pub fn sub_web(&self, indices: &[usize]) -> Result<Self> {
        let paths = indices
            .iter()
            .map(|&i| {
                self.paths
                    .get(i)
                    .cloned()
                    .ok_or(Error::IndexOutOfRange { index: i, arity: self.path_count() })
            })
            .collect::<Result<Vec<_>>>()?;
        let base = self.tassel_of(indices[0]).map(|k| self.base[k].clone()).unwrap_or_else(|| "p0".into());
        Self::new(paths, None, Some(vec![base]))
    }

    /// Steps `from..=to`, 1-based.
    pub fn step_window(&self, from: usize, to: usize) -> Result<Self> {
        if from == 0 || from > to || to > self.step_count() {
            return Err(Error::BadStepWindow(format!("[{from}, {to}] in a web of {} steps", self.step_count())));
        }
        let paths = self.paths.iter().map(|p| p[from - 1..to].to_vec()).collect();
        Self::new(paths, Some(self.tassels.clone()), Some(self.base.clone()))
    }

    fn tassel_of(&self, path: usize) -> Option<usize> {
        self.tassels.iter().position(|t| t.contains(&path))
    }
}

/// A web whose columns cycle through the given label patterns, each held
/// for `hold` steps; `patterns[k][i]` is the class of path `i` under pattern
/// `k`. Labels read `s{step}_{class}`.
pub fn cycled_web(patterns: &[Vec<usize>], cycles: usize, hold: usize) -> Result<DiscreteWeb> {
    let n = patterns.first().map_or(0, Vec::len);
    if patterns.iter().any(|p| p.len() != n) || hold == 0 || cycles == 0 {
        return Err(Error::InvalidWeb("patterns need a common length and a positive hold and cycle count".into()));
    }
    let steps = patterns.len() * cycles * hold;
    let paths = (0..n)
        .map(|i| (0..steps).map(|t| format!("s{}_{}", t + 1, patterns[(t / hold) % patterns.len()][i])).collect())
        .collect();
    DiscreteWeb::new(paths, None, None)
}

/// Two pairings of four paths, `{12|34}` and `{13|24}`, each held for
/// `hold` steps and alternated `cycles` times.
pub fn double_pairing_web(cycles: usize, hold: usize) -> Result<DiscreteWeb> {
    cycled_web(&[vec![0, 0, 1, 1], vec![0, 1, 0, 1]], cycles, hold)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSplitting {
    /// 1-based step.
    pub step: usize,
    pub splitting: Splitting,
    pub regular: bool,
}

/// A maximal run of consecutive regular steps; 1-based, inclusive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularBlock {
    pub start: usize,
    pub end: usize,
    pub splitting: Splitting,
}

/// Equality-class splitting of every column. Step `t` is regular when
/// `1 < t < T` and steps `t−1`, `t`, `t+1` share a splitting.
pub fn step_splittings(w: &DiscreteWeb) -> Vec<StepSplitting> {
    let steps = w.step_count();
    let splits: Vec<Splitting> =
        (0..steps).map(|t| splitting_for(&w.column(t)).expect("columns are nonempty")).collect();
    (0..steps)
        .map(|t| StepSplitting {
            step: t + 1,
            regular: t > 0 && t + 1 < steps && splits[t - 1] == splits[t] && splits[t] == splits[t + 1],
            splitting: splits[t].clone(),
        })
        .collect()
}

pub fn regular_blocks(w: &DiscreteWeb) -> Vec<RegularBlock> {
    blocks_of(&step_splittings(w))
}

fn blocks_of(steps: &[StepSplitting]) -> Vec<RegularBlock> {
    let mut out: Vec<RegularBlock> = Vec::new();
    for s in steps.iter().filter(|s| s.regular) {
        match out.last_mut() {
            Some(b) if b.end + 1 == s.step => b.end = s.step,
            _ => out.push(RegularBlock { start: s.step, end: s.step, splitting: s.splitting.clone() }),
        }
    }
    out
}

/// `V_w`: the union of the splittings at regular steps.
pub fn types_of(w: &DiscreteWeb) -> Result<TypeSet> {
    let mut out = TypeSet::empty(w.path_count())?;
    for s in step_splittings(w).iter().filter(|s| s.regular) {
        for v in s.splitting.members() {
            out.insert(*v)?;
        }
    }
    if out.is_empty() {
        return Err(Error::NoRegularSteps);
    }
    Ok(out)
}

/// Number of leading regular blocks that stand in for a neighbourhood of
/// the base point: the first half, rounded up.
fn window_blocks(block_count: usize) -> usize {
    block_count.div_ceil(2)
}

/// `𝒲(w)`: the distinct splittings of the regular blocks in the base
/// neighbourhood window, in first-occurrence order.
pub fn limit_splittings(w: &DiscreteWeb) -> Result<Vec<Splitting>> {
    let blocks = regular_blocks(w);
    if blocks.is_empty() {
        return Err(Error::NoRegularSteps);
    }
    Ok(dedup_splittings(blocks[..window_blocks(blocks.len())].iter().map(|b| b.splitting.clone())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionStatus {
    Pass,
    Fail,
    TruncationLimited,
    NotModeled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: u8,
    pub status: ConditionStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TasselReport {
    pub paths: Vec<usize>,
    pub conditions: Vec<ConditionResult>,
    /// No condition failed.
    pub valid: bool,
    pub rich: Option<bool>,
}

impl TasselReport {
    pub fn status(&self, condition: u8) -> Option<ConditionStatus> {
        self.conditions.iter().find(|c| c.condition == condition).map(|c| c.status)
    }
}

fn result(condition: u8, status: ConditionStatus, detail: impl Into<String>) -> ConditionResult {
    ConditionResult { condition, status, detail: detail.into() }
}

/// Checks the discrete tassel conditions on the given paths.
///
/// 1. not modelled;
/// 2. the paths share one base label, which is not also a segment label;
/// 3. paths that meet anywhere also meet inside the base window;
/// 4. every type of the tassel occurs at a regular step inside the window;
/// 5. the paths differ, and differ at some regular step.
pub fn check_tassel(w: &DiscreteWeb, tassel: &[usize]) -> Result<TasselReport> {
    use ConditionStatus::*;
    if tassel.is_empty() {
        return Err(Error::InvalidWeb("empty tassel".into()));
    }
    let sub = w.sub_web(tassel)?;
    let mut conditions = vec![result(1, NotModeled, "contractible neighbourhoods have no discrete content")];

    let homes: BTreeSet<Option<usize>> = tassel.iter().map(|&i| w.tassel_of(i)).collect();
    let labels: BTreeSet<&str> = w.labels().into_iter().collect();
    conditions.push(match homes.iter().next() {
        Some(Some(k)) if homes.len() == 1 => {
            if labels.contains(w.base[*k].as_str()) {
                result(2, Fail, format!("base label {:?} is also a segment label", w.base[*k]))
            } else {
                result(2, Pass, format!("common base {:?}", w.base[*k]))
            }
        }
        _ => result(2, Fail, "paths belong to different tassels"),
    });

    let steps = step_splittings(&sub);
    let blocks = blocks_of(&steps);
    let window_end = match blocks.len() {
        0 => None,
        b => Some(blocks[window_blocks(b) - 1].end),
    };
    let limited = blocks.len() == 1;
    let k = tassel.len();

    conditions.push(match window_end {
        None => result(3, Fail, "no regular steps"),
        Some(end) => {
            let mut bad = None;
            'pairs: for a in 0..k {
                for b in a + 1..k {
                    let meet = |t: usize| sub.paths[a][t] == sub.paths[b][t];
                    if (0..sub.step_count()).any(meet) && !(0..end).any(meet) {
                        bad = Some((tassel[a], tassel[b]));
                        break 'pairs;
                    }
                }
            }
            match bad {
                Some((a, b)) => result(3, Fail, format!("paths {a} and {b} meet only after step {end}")),
                None if limited => result(3, TruncationLimited, "only one regular block"),
                None => result(3, Pass, format!("all meetings recur by step {end}")),
            }
        }
    });

    let types = types_of(&sub).ok();
    conditions.push(match (&types, window_end) {
        (Some(types), Some(end)) => {
            let mut early = TypeSet::empty(k)?;
            for s in steps.iter().filter(|s| s.regular && s.step <= end) {
                for v in s.splitting.members() {
                    early.insert(*v)?;
                }
            }
            match types.iter().find(|v| !early.contains(v)) {
                Some(v) => result(4, Fail, format!("type {v} first occurs after step {end}")),
                None if limited => result(4, TruncationLimited, "only one regular block"),
                None => result(4, Pass, format!("{} types occur by step {end}", types.len())),
            }
        }
        _ => result(4, Fail, "no regular steps"),
    });

    let mut five = result(5, Pass, "rows are distinct at regular steps");
    'rows: for a in 0..k {
        for b in a + 1..k {
            if sub.paths[a] == sub.paths[b] {
                five = result(5, Fail, format!("paths {} and {} coincide", tassel[a], tassel[b]));
                break 'rows;
            }
            if !steps.iter().any(|s| s.regular && sub.paths[a][s.step - 1] != sub.paths[b][s.step - 1]) {
                five = result(5, Fail, format!("paths {} and {} differ only at irregular steps", tassel[a], tassel[b]));
                break 'rows;
            }
        }
    }
    conditions.push(five);

    let valid = conditions.iter().all(|c| c.status != Fail);
    let rich = match types {
        Some(t) => Some(t.is_rich()?),
        None => None,
    };
    Ok(TasselReport { paths: tassel.to_vec(), conditions, valid, rich })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WebReport {
    pub tassels: Vec<TasselReport>,
    /// Distinct tassels share no segment label.
    pub disjoint: bool,
    pub valid: bool,
}

pub fn check_web(w: &DiscreteWeb) -> Result<WebReport> {
    let tassels = w.tassels.iter().map(|t| check_tassel(w, t)).collect::<Result<Vec<_>>>()?;
    let mut owner: HashMap<&str, usize> = HashMap::new();
    let mut disjoint = true;
    for (k, t) in w.tassels.iter().enumerate() {
        for &i in t {
            for label in &w.paths[i] {
                if *owner.entry(label.as_str()).or_insert(k) != k {
                    disjoint = false;
                }
            }
        }
    }
    let valid = disjoint && tassels.iter().all(|t| t.valid);
    Ok(WebReport { tassels, disjoint, valid })
}

/// A group element for every segment label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscreteConnection {
    pub assignment: BTreeMap<String, GroupElement>,
}

impl DiscreteConnection {
    pub fn identity(w: &DiscreteWeb, group: &FiniteGroup) -> Self {
        Self { assignment: w.labels().into_iter().map(|l| (l.to_string(), group.identity())).collect() }
    }
}

/// Component `i` is the ordered product of the elements along path `i`.
pub fn transport(w: &DiscreteWeb, group: &FiniteGroup, a: &DiscreteConnection) -> Result<Vec<GroupElement>> {
    w.paths
        .iter()
        .map(|row| {
            row.iter().try_fold(group.identity(), |acc, label| {
                let g = *a.assignment.get(label).ok_or_else(|| Error::MissingLabel(label.clone()))?;
                group.check(g)?;
                Ok(group.mul(acc, g))
            })
        })
        .collect()
}

/// The set of all transports: the ordered product over steps of the
/// splitting subgroups. Enumerates every connection as a cross-check when
/// `|G|^{#labels}` is at most [`ENUMERATION_LIMIT`].
pub fn achievable_set(w: &DiscreteWeb, group: &FiniteGroup, opts: &ClosureOptions) -> Result<TupleSubset> {
    let set = fold_steps(w, group, opts)?;
    let labels = w.labels().len() as u32;
    if (group.order() as u128).checked_pow(labels).is_some_and(|s| s <= ENUMERATION_LIMIT) {
        let enumerated = achievable_by_enumeration(w, group, opts.cap_states)?;
        if enumerated != set {
            return Err(Error::Internal("step fold disagrees with connection enumeration".into()));
        }
    }
    Ok(set)
}

fn fold_steps(w: &DiscreteWeb, group: &FiniteGroup, opts: &ClosureOptions) -> Result<TupleSubset> {
    let steps = step_splittings(w);
    let gens = generating_set(group);
    let mut set = TupleSubset::identity(group, w.path_count(), opts.cap_states)?;
    let distinct = dedup_splittings(steps.iter().map(|s| s.splitting.clone()));
    // Splittings whose subgroup the current set is already invariant under.
    let mut stable: Vec<Splitting> = Vec::new();
    opts.run(|| {
        for s in &steps {
            if set.is_full() {
                break;
            }
            if stable.contains(&s.splitting) {
                if distinct.iter().all(|d| stable.contains(d)) {
                    break;
                }
                continue;
            }
            let before = set.count();
            multiply_by_splitting(&mut set, &gens, &s.splitting);
            if set.count() != before {
                stable.clear();
            }
            stable.push(s.splitting.clone());
        }
    });
    Ok(set)
}

/// Every transport, by enumerating all connections.
pub fn achievable_by_enumeration(w: &DiscreteWeb, group: &FiniteGroup, cap: u64) -> Result<TupleSubset> {
    let labels = w.labels();
    let r = group.order();
    let states = (r as u128).checked_pow(labels.len() as u32).unwrap_or(u128::MAX);
    if states > ENUMERATION_LIMIT {
        return Err(Error::StateCapExceeded { states, cap: ENUMERATION_LIMIT as u64 });
    }
    let slot: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let rows: Vec<Vec<usize>> = w.paths.iter().map(|p| p.iter().map(|l| slot[l.as_str()]).collect()).collect();
    let mut set = TupleSubset::empty(group, w.path_count(), cap)?;
    let mut digits = vec![0usize; labels.len()];
    loop {
        let tuple: Vec<GroupElement> = rows
            .iter()
            .map(|row| group.product(row.iter().map(|&s| GroupElement::from_index(digits[s]))))
            .collect();
        set.insert(&tuple)?;
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(set);
            }
            digits[i] += 1;
            if digits[i] < r {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    AchievableSmaller,
    AchievableLarger,
    Incomparable,
}

fn compare(achievable: &TupleSubset, predicted: &TupleSubset) -> Result<Verdict> {
    let sub = achievable.is_subset_of(predicted)?;
    let sup = predicted.is_subset_of(achievable)?;
    Ok(match (sub, sup) {
        (true, true) => Verdict::Equal,
        (true, false) => Verdict::AchievableSmaller,
        (false, true) => Verdict::AchievableLarger,
        (false, false) => Verdict::Incomparable,
    })
}

/// Recurrence of the limit splittings in a sequence of regular blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recurrence {
    pub q: u128,
    pub limit_splittings: usize,
    /// Regular blocks per limit splitting, in first-occurrence order.
    pub occurrences: Vec<usize>,
    /// Each limit splitting fills at least `q·|𝒲|` blocks.
    pub counts_ok: bool,
    /// `(W_1 ⋯ W_S)^q` occurs as an ordered subsequence of the blocks.
    pub ordered_ok: bool,
}

impl Recurrence {
    pub fn holds(&self) -> bool {
        self.counts_ok && self.ordered_ok
    }
}

fn recurrence(blocks: &[RegularBlock], limit: &[Splitting], q: u128) -> Recurrence {
    let occurrences: Vec<usize> =
        limit.iter().map(|s| blocks.iter().filter(|b| &b.splitting == s).count()).collect();
    let need = q.saturating_mul(limit.len() as u128);
    let counts_ok = occurrences.iter().all(|&c| c as u128 >= need);
    // Greedy subsequence match of the pattern W_1 … W_S repeated q times.
    let total = need;
    let mut matched: u128 = 0;
    for b in blocks {
        if matched == total {
            break;
        }
        if b.splitting == limit[(matched % limit.len() as u128) as usize] {
            matched += 1;
        }
    }
    Recurrence { q, limit_splittings: limit.len(), occurrences, counts_ok, ordered_ok: matched == total }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TasselPrediction {
    pub paths: Vec<usize>,
    pub types: TypeSet,
    pub q: u128,
    pub predicted_order: u64,
    pub valid: bool,
    pub recurrence: Recurrence,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WebPrediction {
    pub tassels: Vec<TasselPrediction>,
    pub achievable_order: u64,
    pub predicted_order: u64,
    pub verdict: Verdict,
    /// Valid tassels, disjoint labels and sufficient recurrence everywhere.
    /// Without it the prediction is only a lower bound.
    pub hypothesis_met: bool,
    #[serde(skip)]
    pub predicted: Option<TupleSubset>,
    #[serde(skip)]
    pub achievable: Option<TupleSubset>,
}

/// Predicts the achievable set tassel by tassel as `G_{V_T}^{q(|T|)}`,
/// places the factors on their path indices and compares with the exact set.
pub fn predict_web_transport(w: &DiscreteWeb, group: &FiniteGroup, opts: &ClosureOptions) -> Result<WebPrediction> {
    let achievable = achievable_set(w, group, opts)?;
    let web_report = check_web(w)?;
    let cl = CommutatorLengths::compute(group).width();
    let n = w.path_count();
    let mut predicted = TupleSubset::identity(group, n, opts.cap_states)?;
    let mut tassels = Vec::new();
    for (t, report) in w.tassels.iter().zip(&web_report.tassels) {
        let sub = w.sub_web(t)?;
        let types = types_of(&sub)?;
        let q = q_of(t.len(), cl);
        let rounds = usize::try_from(q).unwrap_or(usize::MAX);
        let local = gv_power(group, &types, rounds, opts)?;
        let limit = limit_splittings(&sub)?;
        let rec = recurrence(&regular_blocks(&sub), &limit, q);
        let mut embedded = TupleSubset::empty(group, n, opts.cap_states)?;
        let mut full = vec![group.identity(); n];
        for tuple in local.tuples() {
            for (slot, &i) in t.iter().enumerate() {
                full[i] = tuple[slot];
            }
            embedded.insert(&full)?;
        }
        predicted = product_set(&predicted, &embedded)?;
        tassels.push(TasselPrediction {
            paths: t.clone(),
            types,
            q,
            predicted_order: local.count(),
            valid: report.valid,
            recurrence: rec,
        });
    }
    let verdict = compare(&achievable, &predicted)?;
    let hypothesis_met = web_report.disjoint && tassels.iter().all(|t| t.valid && t.recurrence.holds());
    Ok(WebPrediction {
        tassels,
        achievable_order: achievable.count(),
        predicted_order: predicted.count(),
        verdict,
        hypothesis_met,
        predicted: Some(predicted),
        achievable: Some(achievable),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuffixStatus {
    Equal,
    NotEqual,
    InsufficientRecurrence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuffixReport {
    pub tau: usize,
    pub t: usize,
    /// Latest start `s` such that steps `[s, t]` still carry the recurrence.
    pub t_prime: Option<usize>,
    pub status: SuffixStatus,
    pub achievable_order: Option<u64>,
    pub predicted_order: u64,
}

/// Checks that steps `[tau, t]` (1-based) already realise the whole
/// prediction, provided `tau` does not pass the latest start `t'` from which
/// every tassel's limit splittings still recur often enough before `t`.
pub fn suffix_truncation_check(
    w: &DiscreteWeb,
    group: &FiniteGroup,
    tau: usize,
    t: usize,
    opts: &ClosureOptions,
) -> Result<SuffixReport> {
    if tau == 0 || tau > t || t > w.step_count() {
        return Err(Error::BadStepWindow(format!("tau {tau}, t {t} in a web of {} steps", w.step_count())));
    }
    let prediction = predict_web_transport(w, group, opts)?;
    let predicted = prediction.predicted.expect("prediction carries its set");
    let cl = CommutatorLengths::compute(group).width();
    let mut t_prime: Option<usize> = Some(t);
    for tassel in &w.tassels {
        let sub = w.sub_web(tassel)?;
        let limit = limit_splittings(&sub)?;
        let q = q_of(tassel.len(), cl);
        let blocks: Vec<RegularBlock> = regular_blocks(&sub).into_iter().filter(|b| b.end <= t).collect();
        let start = (0..blocks.len()).rev().find(|&i| recurrence(&blocks[i..], &limit, q).holds());
        t_prime = match (t_prime, start) {
            (Some(tp), Some(i)) => Some(tp.min(blocks[i].start)),
            _ => None,
        };
    }
    let (status, achievable_order) = match t_prime {
        Some(tp) if tau <= tp => {
            let window = w.step_window(tau, t)?;
            let achieved = achievable_set(&window, group, opts)?;
            let status = if achieved == predicted { SuffixStatus::Equal } else { SuffixStatus::NotEqual };
            (status, Some(achieved.count()))
        }
        _ => (SuffixStatus::InsufficientRecurrence, None),
    };
    Ok(SuffixReport { tau, t, t_prime, status, achievable_order, predicted_order: predicted.count() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn web(rows: &[&[&str]]) -> DiscreteWeb {
        DiscreteWeb::new(rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(), None, None)
            .unwrap()
    }

    fn el(i: usize) -> GroupElement {
        GroupElement::from_index(i)
    }

    #[test]
    fn construction_checks_shape_and_parametrisation() {
        assert!(DiscreteWeb::new(vec![], None, None).is_err());
        assert!(DiscreteWeb::new(vec![vec!["a".into()], vec![]], None, None).is_err());
        let e = DiscreteWeb::new(vec![vec!["a".into(), "b".into()], vec!["b".into(), "c".into()]], None, None);
        assert!(matches!(e, Err(Error::InvalidWeb(_))));
        let bad_partition = DiscreteWeb::new(vec![vec!["a".into()], vec!["b".into()]], Some(vec![vec![0]]), None);
        assert!(bad_partition.is_err());
        let w = DiscreteWeb::from_json(r#"{"paths": [["a","b"],["c","b"]], "tassels": [[0,1]], "base": ["p"]}"#).unwrap();
        assert_eq!(w.base(), &["p".to_string()]);
        assert_eq!(DiscreteWeb::from_json(&w.to_json()).unwrap(), w);
    }

    #[test]
    fn splittings_and_regularity() {
        let w = web(&[&["a", "b", "c", "d"], &["e", "f", "g", "h"]]);
        let s = step_splittings(&w);
        assert!(s.iter().all(|x| x.splitting == Splitting::finest(2).unwrap()));
        assert_eq!(s.iter().filter(|x| x.regular).map(|x| x.step).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(types_of(&w).unwrap(), TypeSet::from_strs(&["10", "01"]).unwrap());
        let single = web(&[&["a", "b", "c"]]);
        assert!(step_splittings(&single).iter().all(|x| x.splitting == Splitting::finest(1).unwrap()));
        let short = web(&[&["a", "b"]]);
        assert_eq!(types_of(&short), Err(Error::NoRegularSteps));
    }

    #[test]
    fn shared_prefix_then_split() {
        let w = web(&[&["a", "b", "c", "d", "e", "f"], &["a", "b", "c", "x", "y", "z"]]);
        let v = types_of(&w).unwrap();
        assert!(v.contains(&"11".parse().unwrap()));
        assert!(v.contains(&"10".parse().unwrap()));
        assert!(v.contains(&"01".parse().unwrap()));
    }

    #[test]
    fn double_pairing_types_and_limits() {
        let w = double_pairing_web(4, 3).unwrap();
        let v = types_of(&w).unwrap();
        assert_eq!(v, TypeSet::from_strs(&["1100", "0011", "1010", "0101"]).unwrap());
        assert_eq!(limit_splittings(&w).unwrap().len(), 2);
        let report = check_tassel(&w, &[0, 1, 2, 3]).unwrap();
        assert!(report.valid, "{report:?}");
        assert_eq!(report.status(1), Some(ConditionStatus::NotModeled));
        assert!(report.conditions.iter().skip(1).all(|c| c.status == ConditionStatus::Pass));
        assert_eq!(report.rich, Some(true));
    }

    #[test]
    fn late_splittings_leave_the_limit_set() {
        let mut rows: Vec<Vec<String>> = vec![Vec::new(); 2];
        for t in 0..12 {
            let late = t >= 9;
            rows[0].push(format!("s{t}_0"));
            rows[1].push(format!("s{t}_{}", if late { 1 } else { 0 }));
        }
        let w = DiscreteWeb::new(rows, None, None).unwrap();
        let limit = limit_splittings(&w).unwrap();
        assert_eq!(limit, vec![Splitting::coarsest(2).unwrap()]);
        let report = check_tassel(&w, &[0, 1]).unwrap();
        assert_eq!(report.status(4), Some(ConditionStatus::Fail));
    }

    #[test]
    fn constant_splitting_has_one_limit() {
        let w = web(&[&["a", "b", "c", "d"], &["a", "b", "c", "d"]]);
        assert_eq!(limit_splittings(&w).unwrap().len(), 1);
        let r = check_tassel(&w, &[0, 1]).unwrap();
        assert_eq!(r.status(5), Some(ConditionStatus::Fail));
        assert!(!r.valid);
    }

    #[test]
    fn late_meeting_fails_condition_three() {
        let mut rows: Vec<Vec<String>> = vec![Vec::new(); 2];
        for t in 0..8 {
            let meet = t == 7;
            rows[0].push(format!("s{t}_0"));
            rows[1].push(format!("s{t}_{}", if meet { 0 } else { 1 }));
        }
        let w = DiscreteWeb::new(rows, None, None).unwrap();
        assert_eq!(check_tassel(&w, &[0, 1]).unwrap().status(3), Some(ConditionStatus::Fail));
    }

    #[test]
    fn base_label_reused_fails_condition_two() {
        let w = DiscreteWeb::new(
            vec![vec!["p".into(), "b".into(), "c".into()], vec!["x".into(), "y".into(), "z".into()]],
            None,
            Some(vec!["p".into()]),
        )
        .unwrap();
        assert_eq!(check_tassel(&w, &[0, 1]).unwrap().status(2), Some(ConditionStatus::Fail));
    }

    #[test]
    fn transport_examples() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let w = web(&[&["a", "b"], &["a", "c"]]);
        let mut a = DiscreteConnection::default();
        a.assignment.insert("a".into(), el(1));
        a.assignment.insert("b".into(), el(2));
        a.assignment.insert("c".into(), el(3));
        assert_eq!(
            transport(&w, &s3, &a).unwrap(),
            vec![s3.mul(el(1), el(2)), s3.mul(el(1), el(3))]
        );
        assert_eq!(transport(&w, &s3, &DiscreteConnection::identity(&w, &s3)).unwrap(), vec![el(0), el(0)]);
        a.assignment.remove("c");
        assert_eq!(transport(&w, &s3, &a), Err(Error::MissingLabel("c".into())));
        let one = web(&[&["a"], &["a"], &["a"]]);
        let mut b = DiscreteConnection::default();
        b.assignment.insert("a".into(), el(4));
        assert_eq!(transport(&one, &s3, &b).unwrap(), vec![el(4); 3]);
    }

    #[test]
    fn achievable_sets_on_small_webs() {
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let opts = ClosureOptions::default();
        let w = double_pairing_web(1, 3).unwrap();
        assert_eq!(achievable_set(&w, &z3, &opts).unwrap().count(), 27);
        let single = web(&[&["a", "b", "c"]]);
        assert!(achievable_set(&single, &FiniteGroup::alternating(4).unwrap(), &opts).unwrap().is_full());
    }

    #[test]
    fn z3_prediction_on_double_pairings() {
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let w = double_pairing_web(8, 3).unwrap();
        let p = predict_web_transport(&w, &z3, &ClosureOptions::default()).unwrap();
        assert_eq!(p.verdict, Verdict::Equal);
        assert_eq!(p.predicted_order, 27);
        assert!(p.hypothesis_met);
    }

    #[test]
    fn two_tassels_factorise() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let rows: Vec<Vec<String>> = vec![
            (0..4).map(|t| format!("a{t}")).collect(),
            (0..4).map(|t| format!("a{t}")).collect(),
            (0..4).map(|t| format!("b{t}")).collect(),
        ];
        let w = DiscreteWeb::new(rows, Some(vec![vec![0, 1], vec![2]]), None).unwrap();
        let p = predict_web_transport(&w, &z2, &ClosureOptions::default()).unwrap();
        assert_eq!(p.achievable_order, 4);
        assert_eq!(p.predicted_order, 4);
        assert_eq!(p.verdict, Verdict::Equal);
        assert!(!p.hypothesis_met);
    }

    #[test]
    fn suffix_checks() {
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let opts = ClosureOptions::default();
        let w = double_pairing_web(6, 3).unwrap();
        let r = suffix_truncation_check(&w, &z3, 4, w.step_count(), &opts).unwrap();
        assert_eq!(r.status, SuffixStatus::Equal);
        let r1 = suffix_truncation_check(&w, &z3, 1, w.step_count(), &opts).unwrap();
        assert_eq!(r1.status, SuffixStatus::Equal);
        let late = suffix_truncation_check(&w, &z3, w.step_count() - 2, w.step_count(), &opts).unwrap();
        assert_eq!(late.status, SuffixStatus::InsufficientRecurrence);
        assert!(suffix_truncation_check(&w, &z3, 0, 3, &opts).is_err());
    }
}
