//! Command-line front end. [`run`] does all the work so it can be tested
//! without spawning a process.

use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generation::{
    gv_power_closure_with, predict_closure, q_of, verify_q_bound, ClosureOptions, Decomposer, DEFAULT_STATE_CAP,
};
use crate::groups::{CommutatorLengths, FiniteGroup, GroupDescriptor};
use crate::lattice::{codimension, mod_m_image_with_cap, rank_r, span_z, ReductiveProfile, DEFAULT_MOD_CAP};
use crate::typevec::{index_classes, TypeSet};
use crate::web::{
    check_web, limit_splittings, predict_web_transport, step_splittings, suffix_truncation_check, types_of,
    DiscreteWeb, SuffixStatus,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CAP_ENV: &str = "WEBHOL_CAP_STATES";
/// Closures at or below this size may be dumped element by element.
pub const DUMP_LIMIT: u64 = 10_000;

#[derive(Parser, Debug)]
#[command(name = "webhol", version, about = "Achievable transport sets along discrete webs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Largest |G|^n enumerated (default 2^27, or $WEBHOL_CAP_STATES).
    #[arg(long, global = true)]
    pub cap_states: Option<u64>,
    /// Worker threads for closures.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for sampled checks and random targets.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Richness, deficit and splitting status of a type set.
    Typeset {
        #[arg(long)]
        typeset: String,
    },
    /// Subgroup of G^n generated by the G_v, with its stabilisation exponent.
    Closure {
        #[arg(long)]
        group: String,
        #[arg(long)]
        typeset: String,
        /// List every member when the closure is small.
        #[arg(long)]
        dump: bool,
    },
    /// Factor words for targets in G^n over a rich type set.
    Decompose {
        #[arg(long)]
        group: String,
        #[arg(long)]
        typeset: String,
        /// Comma-separated element indices, one per component.
        #[arg(long, conflicts_with = "samples")]
        target: Option<String>,
        /// Number of random targets.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Integer span, real rank, mod-m images and codimension.
    Lattice {
        #[arg(long)]
        typeset: String,
        #[arg(long, value_delimiter = ',')]
        modulus: Vec<u64>,
        #[arg(long)]
        dim_ss: Option<u64>,
        #[arg(long)]
        dim_ab: Option<u64>,
    },
    /// Splittings, types, tassel conditions and, with a group, transports.
    Web {
        #[arg(long)]
        web: String,
        #[arg(long)]
        group: Option<String>,
        /// First step of a suffix window (1-based).
        #[arg(long, requires = "group")]
        tau: Option<usize>,
        /// Last step of the suffix window; defaults to the final step.
        #[arg(long = "t", requires = "tau")]
        t: Option<usize>,
    },
    /// Observed stabilisation exponent against (1 + 4 cl)^(n-2).
    Qbound {
        #[arg(long)]
        group: String,
        #[arg(long)]
        typeset: String,
    },
}

/// Exit status and rendered output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    let cap = match cap_states(&cli.common) {
        Ok(c) => c,
        Err(e) => return failure(&e),
    };
    let opts = ClosureOptions { cap_states: cap, threads: cli.common.threads };
    match dispatch(&cli.command, &cli.common, &opts) {
        Ok((ok, body)) => {
            let mut report = json!({
                "version": VERSION,
                "caps": { "cap_states": cap, "threads": cli.common.threads, "mod_cap": DEFAULT_MOD_CAP },
            });
            if let (Value::Object(r), Value::Object(b)) = (&mut report, body) {
                r.extend(b);
            }
            Outcome { code: if ok { 0 } else { 1 }, stdout: render(&report, cli.common.format), stderr: String::new() }
        }
        Err(e) => failure(&e),
    }
}

fn failure(e: &Error) -> Outcome {
    Outcome { code: exit_code(e), stdout: String::new(), stderr: format!("error: {e}\n") }
}

/// 1 for failures of the analysis itself, 2 for bad input or caps.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotPerfect { .. }
        | Error::NotRich
        | Error::NotInCommutatorSubgroup(_)
        | Error::NoRegularSteps
        | Error::LawViolation(_)
        | Error::Internal(_)
        | Error::Overflow => 1,
        _ => 2,
    }
}

fn cap_states(common: &Common) -> Result<u64> {
    if let Some(c) = common.cap_states {
        return Ok(c);
    }
    match std::env::var(CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Parse(format!("{CAP_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_STATE_CAP),
    }
}

fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("reports serialise") + "\n",
        Format::Text => {
            let mut out = String::new();
            if let Value::Object(map) = report {
                let width = map.keys().map(String::len).max().unwrap_or(0);
                for (k, v) in map {
                    let shown = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("{k:<width$}  {shown}\n"));
                }
            }
            out
        }
    }
}

fn read_input(spec: &str) -> Result<String> {
    let path = Path::new(spec);
    if !spec.trim_start().starts_with(['{', '[']) && path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{spec}: {e}")))
    } else {
        Ok(spec.to_string())
    }
}

/// A group from JSON, a file holding JSON, or shorthand such as `A5`,
/// `Z3`, `S4` or `A5xZ3`.
pub fn parse_group(spec: &str, caps: &crate::groups::GroupCaps) -> Result<FiniteGroup> {
    let text = read_input(spec)?;
    let text = text.trim();
    let descriptor = if text.starts_with('{') {
        GroupDescriptor::parse_json(text)?
    } else {
        let factors = text
            .split(['x', '*'])
            .map(|f| {
                let f = f.trim();
                let (kind, num) = f.split_at(f.find(|c: char| c.is_ascii_digit()).unwrap_or(f.len()));
                let k: usize = num.parse().map_err(|_| Error::Parse(format!("unknown group {f:?}")))?;
                match kind {
                    "Z" | "C" => Ok(GroupDescriptor::Cyclic { m: k }),
                    "A" => Ok(GroupDescriptor::Alternating { k }),
                    "S" => Ok(GroupDescriptor::Symmetric { k }),
                    _ => Err(Error::Parse(format!("unknown group {f:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if factors.len() == 1 {
            factors.into_iter().next().expect("one factor")
        } else {
            GroupDescriptor::Product { factors }
        }
    };
    descriptor.build_with_caps(caps)
}

/// A type set from JSON, text such as `1100,1010`, or a file holding either.
pub fn parse_typeset(spec: &str) -> Result<TypeSet> {
    let text = read_input(spec)?;
    if text.trim_start().starts_with('[') {
        TypeSet::parse_json(&text)
    } else {
        TypeSet::parse_text(&text)
    }
}

fn members(v: &TypeSet) -> Vec<String> {
    v.iter().map(|t| t.to_string()).collect()
}

fn dispatch(command: &Command, common: &Common, opts: &ClosureOptions) -> Result<(bool, Value)> {
    let group_caps = crate::groups::GroupCaps::default();
    match command {
        Command::Typeset { typeset } => {
            let v = parse_typeset(typeset)?;
            let rich = v.is_rich()?;
            let deficit = v.richness_deficit()?;
            Ok((
                true,
                json!({
                    "command": "typeset",
                    "arity": v.arity(),
                    "members": members(&v),
                    "rich": rich,
                    "deficit": deficit,
                    "splitting": v.is_splitting()?,
                    "rank_r": rank_r(&v)?,
                    "index_classes": index_classes(&v),
                }),
            ))
        }
        Command::Closure { group, typeset, dump } => {
            let g = parse_group(group, &group_caps)?;
            let v = parse_typeset(typeset)?;
            let closure = gv_power_closure_with(&g, &v, opts)?;
            let cl = CommutatorLengths::compute(&g).width();
            let subgroup = closure.set.is_subgroup();
            let prediction = predict_closure(&g, &v, opts.cap_states).ok();
            let mut body = json!({
                "command": "closure",
                "group": g.label(),
                "typeset": members(&v),
                "n": v.arity(),
                "count": closure.set.count(),
                "full": closure.set.is_full(),
                "q_min": closure.q_min,
                "round_counts": closure.round_counts,
                "commutator_length": cl,
                "bound": big(q_of(v.arity(), cl)),
                "subgroup": subgroup,
                "prediction": prediction,
            });
            if *dump && closure.set.count() <= DUMP_LIMIT {
                let elements: Vec<Vec<usize>> =
                    closure.set.tuples().map(|t| t.iter().map(|e| e.index()).collect()).collect();
                body["elements"] = json!(elements);
            }
            Ok((subgroup, body))
        }
        Command::Decompose { group, typeset, target, samples } => {
            let g = parse_group(group, &group_caps)?;
            let v = parse_typeset(typeset)?;
            let d = Decomposer::new(&g)?;
            let targets: Vec<Vec<usize>> = match (target, samples) {
                (Some(t), _) => vec![t
                    .split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad element index {x:?}"))))
                    .collect::<Result<_>>()?],
                (None, n) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
                    (0..n.unwrap_or(1)).map(|_| (0..v.arity()).map(|_| rng.gen_range(0..g.order())).collect()).collect()
                }
            };
            let bound = d.length_bound(&v);
            let mut words = Vec::new();
            let mut all_ok = true;
            for t in &targets {
                let elems = t.iter().map(|&i| g.element(i)).collect::<Result<Vec<_>>>()?;
                let word = d.decompose(&v, &elems)?;
                let ok = word.evaluate(&g, v.arity())? == elems && word.len() as u128 <= bound;
                all_ok &= ok;
                words.push(json!({ "target": t, "length": word.len(), "word": word, "ok": ok }));
            }
            Ok((
                all_ok,
                json!({
                    "command": "decompose",
                    "group": g.label(),
                    "typeset": members(&v),
                    "commutator_length": d.commutator_length(),
                    "length_bound": big(bound),
                    "words": words,
                    "all_ok": all_ok,
                }),
            ))
        }
        Command::Lattice { typeset, modulus, dim_ss, dim_ab } => {
            let v = parse_typeset(typeset)?;
            let l = span_z(&v)?;
            let images = modulus
                .iter()
                .map(|&m| {
                    let image = mod_m_image_with_cap(&v, m, DEFAULT_MOD_CAP.min(opts.cap_states))?;
                    Ok(json!({ "modulus": m, "order": image.order, "index": image.index(), "full": image.is_full() }))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut body = json!({
                "command": "lattice",
                "arity": l.arity(),
                "rank": l.rank(),
                "rank_r": rank_r(&v)?,
                "basis": l.basis(),
                "invariant_factors": l.invariant_factors(),
                "mod_images": images,
            });
            if dim_ss.is_some() || dim_ab.is_some() {
                let profile = ReductiveProfile { dim_ss: dim_ss.unwrap_or(0), dim_ab: dim_ab.unwrap_or(0) };
                body["codimension"] = json!(codimension(&v, profile)?);
            }
            Ok((true, body))
        }
        Command::Web { web, group, tau, t } => {
            let w = DiscreteWeb::from_json(&read_input(web)?)?;
            let report = check_web(&w)?;
            let splittings: Vec<Value> = step_splittings(&w)
                .iter()
                .map(|s| json!({ "step": s.step, "splitting": members(s.splitting.as_type_set()), "regular": s.regular }))
                .collect();
            let types = types_of(&w).ok().map(|v| members(&v));
            let limits: Option<Vec<Vec<String>>> =
                limit_splittings(&w).ok().map(|l| l.iter().map(|s| members(s.as_type_set())).collect());
            let mut ok = report.valid;
            let mut body = json!({
                "command": "web",
                "paths": w.path_count(),
                "steps": w.step_count(),
                "splittings": splittings,
                "types": types,
                "limit_splittings": limits,
                "validity": report,
            });
            if let Some(group) = group {
                let g = parse_group(group, &group_caps)?;
                let prediction = predict_web_transport(&w, &g, opts)?;
                body["group"] = json!(g.label());
                body["prediction"] = json!(prediction);
                if let Some(tau) = tau {
                    let end = t.unwrap_or(w.step_count());
                    let suffix = suffix_truncation_check(&w, &g, *tau, end, opts)?;
                    ok &= suffix.status == SuffixStatus::Equal;
                    body["suffix"] = json!(suffix);
                }
            }
            Ok((ok, body))
        }
        Command::Qbound { group, typeset } => {
            let g = parse_group(group, &group_caps)?;
            let v = parse_typeset(typeset)?;
            let report = verify_q_bound(&g, &v, opts)?;
            let mut body = serde_json::to_value(&report).expect("reports serialise");
            body["command"] = json!("qbound");
            body["bound"] = big(report.bound);
            Ok((report.ok, body))
        }
    }
}

/// A JSON number when it fits in `u64`, else its decimal string.
fn big(x: u128) -> Value {
    u64::try_from(x).map_or_else(|_| json!(x.to_string()), |v| json!(v))
}
