//! Bounded satisfiability and validity for wK4 and DL.
//!
//! wK4 is searched over rooted weakly transitive models of at most `bound`
//! worlds. DL is searched over single clusters (the rooted DL frames) of at
//! most [`b_dl`] worlds, which is treated as complete.
//!
//! The default engine encodes the search into SAT. The explicit engine
//! enumerates canonical models one by one; it is only usable for tiny bounds.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Formula, SubClosure};
use crate::kripke::{is_dl_frame, is_rooted_at, is_weakly_transitive, model_check, PointedModel};

pub(crate) mod cnf;
pub mod enumerate;

use cnf::{Cnf, Side, SideClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    Wk4,
    Dl,
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Logic::Wk4 => "wk4",
            Logic::Dl => "dl",
        })
    }
}

impl FromStr for Logic {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "wk4" => Ok(Logic::Wk4),
            "dl" => Ok(Logic::Dl),
            other => Err(format!("unknown logic `{other}` (expected wk4 or dl)")),
        }
    }
}

/// Search backend.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    #[default]
    Sat,
    /// Canonical explicit enumeration; wK4 up to 4 worlds only.
    Enumerate,
}

/// When an exhausted wK4 search may be labelled certified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Wk4Certification {
    /// Only propositionally unsatisfiable formulas are certified.
    #[default]
    Never,
    /// Also certify once `bound ≥ 2^(2^|sub(f)|)`.
    DoubleExponential,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SearchConfig {
    pub engine: Engine,
    pub wk4_certification: Wk4Certification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatStatus {
    Satisfiable(PointedModel),
    UnsatUpTo(usize),
    UnsatCertified,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SatStats {
    /// Solver calls (SAT engine) or models checked (explicit engine).
    pub candidates: u64,
    pub sat_vars: u64,
    pub sat_clauses: u64,
    pub conflicts: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatVerdict {
    pub status: SatStatus,
    pub bound: usize,
    pub stats: SatStats,
}

impl SatVerdict {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self.status, SatStatus::Satisfiable(_))
    }

    pub fn witness(&self) -> Option<&PointedModel> {
        match &self.status {
            SatStatus::Satisfiable(pm) => Some(pm),
            _ => None,
        }
    }
}

/// `2·(number of ◇-pairs of sub(f)) + 2`.
pub fn b_dl(f: &Formula) -> usize {
    2 * SubClosure::of(f).num_diamonds() + 2
}

/// The cluster size beyond which extra copies of a world kind cannot matter:
/// two copies per (valuation, reflexivity) kind.
pub fn dl_kind_cap(num_vars: usize) -> usize {
    if num_vars >= 20 {
        usize::MAX
    } else {
        2 * 2 * (1usize << num_vars)
    }
}

fn double_exponential_reached(closure_len: usize, bound: usize) -> bool {
    if closure_len >= 6 {
        // 2^(2^6) already exceeds usize
        return false;
    }
    bound as u128 >= 1u128 << (1u32 << closure_len)
}

pub fn sat_wk4(f: &Formula, bound: usize) -> Result<SatVerdict> {
    sat_wk4_with(f, bound, &SearchConfig::default())
}

pub fn sat_wk4_with(f: &Formula, bound: usize, config: &SearchConfig) -> Result<SatVerdict> {
    if bound == 0 {
        return Err(Error::ZeroBound);
    }
    let start = Instant::now();
    let cl = SubClosure::of(f);
    let goal = cl.phi_literal();
    if !cnf::propositionally_satisfiable(&cl, goal) {
        return Ok(SatVerdict {
            status: SatStatus::UnsatCertified,
            bound,
            stats: SatStats {
                candidates: 1,
                elapsed: start.elapsed(),
                ..Default::default()
            },
        });
    }
    let (found, mut stats) = match config.engine {
        Engine::Sat => search_sat(&cl, bound, SideClass::Wk4)?,
        Engine::Enumerate => search_enumerate_wk4(&cl, bound)?,
    };
    stats.elapsed = start.elapsed();
    let status = match found {
        Some(pm) => {
            check_witness(&pm, f, Logic::Wk4)?;
            SatStatus::Satisfiable(pm)
        }
        None if config.wk4_certification == Wk4Certification::DoubleExponential
            && double_exponential_reached(cl.len(), bound) =>
        {
            SatStatus::UnsatCertified
        }
        None => SatStatus::UnsatUpTo(bound),
    };
    Ok(SatVerdict { status, bound, stats })
}

/// Complete DL satisfiability: searches clusters of up to [`b_dl`] worlds.
pub fn sat_dl(f: &Formula) -> SatVerdict {
    sat_dl_with(f, None, &SearchConfig::default()).expect("no bound to reject")
}

/// DL search with an optional bound; the verdict is certified only when the
/// effective bound reaches [`b_dl`].
pub fn sat_dl_with(f: &Formula, bound: Option<usize>, config: &SearchConfig) -> Result<SatVerdict> {
    if bound == Some(0) {
        return Err(Error::ZeroBound);
    }
    let start = Instant::now();
    let cl = SubClosure::of(f);
    let full = b_dl(f);
    let bound = bound.unwrap_or(full);
    // larger clusters only repeat kinds, so the search can stop at the cap
    let effective = bound.min(full).min(dl_kind_cap(cl.signature().len()));
    let (found, mut stats) = if !cnf::propositionally_satisfiable(&cl, cl.phi_literal()) {
        (None, SatStats::default())
    } else {
        match config.engine {
            Engine::Sat => search_sat(&cl, effective, SideClass::Cluster)?,
            Engine::Enumerate => search_enumerate_dl(&cl, effective),
        }
    };
    stats.elapsed = start.elapsed();
    let status = match found {
        Some(pm) => {
            check_witness(&pm, f, Logic::Dl)?;
            SatStatus::Satisfiable(pm)
        }
        None if bound >= full => SatStatus::UnsatCertified,
        None => SatStatus::UnsatUpTo(bound),
    };
    Ok(SatVerdict { status, bound, stats })
}

pub fn sat(f: &Formula, logic: Logic, bound: usize, config: &SearchConfig) -> Result<SatVerdict> {
    match logic {
        Logic::Wk4 => sat_wk4_with(f, bound, config),
        Logic::Dl => sat_dl_with(f, None, config),
    }
}

/// Re-checks a search result: frame class, rootedness and truth at the root.
fn check_witness(pm: &PointedModel, f: &Formula, logic: Logic) -> Result<()> {
    let frame = pm.model.frame();
    let class_ok = match logic {
        Logic::Wk4 => is_weakly_transitive(frame),
        Logic::Dl => is_dl_frame(frame),
    };
    if !class_ok || !is_rooted_at(frame, pm.root) || !model_check(&pm.model, pm.root, f)? {
        return Err(Error::Invariant(format!("search returned a model that does not satisfy `{f}`")));
    }
    Ok(())
}

/// One call over all sizes up to `bound`; if satisfiable, walk the sizes
/// upwards to return a smallest model.
fn search_sat(cl: &SubClosure, bound: usize, class: SideClass) -> Result<(Option<PointedModel>, SatStats)> {
    let mut cnf = Cnf::new();
    let all: Vec<usize> = (0..cl.num_pairs()).collect();
    let side = Side::encode(&mut cnf, bound, class, cl, &all);
    let goal = side.literal(0, cl.phi_literal());
    cnf.add(&[goal]);
    let mut stats = SatStats {
        sat_vars: cnf.num_vars(),
        sat_clauses: cnf.num_clauses(),
        ..Default::default()
    };
    stats.candidates += 1;
    let mut found = None;
    if cnf.solve(&[]) {
        for k in 1..=bound {
            stats.candidates += 1;
            if cnf.solve(&side.exact_size(k)) {
                found = Some(PointedModel::new(side.decode(&cnf), 0)?);
                break;
            }
        }
        if found.is_none() {
            return Err(Error::Invariant("solver lost a model while minimising".into()));
        }
    }
    stats.conflicts = cnf.num_conflicts();
    Ok((found, stats))
}

fn search_enumerate_wk4(cl: &SubClosure, bound: usize) -> Result<(Option<PointedModel>, SatStats)> {
    if bound > 4 {
        return Err(Error::Invariant(format!(
            "explicit enumeration supports at most 4 worlds, got bound {bound}"
        )));
    }
    let sig = cl.signature();
    let goal = cl.phi_literal();
    let mut stats = SatStats::default();
    let mut found = None;
    for n in 1..=bound {
        enumerate::for_each_wk4_model(n, &sig, |m| {
            stats.candidates += 1;
            if enumerate::holds_at_root(m, cl, goal.pair, goal.positive) {
                found = Some(m.clone());
                true
            } else {
                false
            }
        });
        if found.is_some() {
            break;
        }
    }
    Ok((found.map(|m| PointedModel { model: m, root: 0 }), stats))
}

fn search_enumerate_dl(cl: &SubClosure, bound: usize) -> (Option<PointedModel>, SatStats) {
    let sig = cl.signature();
    let kinds = enumerate::kinds(sig.len());
    let goal = cl.phi_literal();
    let mut stats = SatStats::default();
    let mut found = None;
    for total in 1..=bound {
        enumerate::for_each_cluster(kinds.len(), 2, total, |counts, root| {
            stats.candidates += 1;
            let m = enumerate::cluster_model(&sig, &kinds, counts, root);
            if enumerate::holds_at_root(&m, cl, goal.pair, goal.positive) {
                found = Some(m);
                true
            } else {
                false
            }
        });
        if found.is_some() {
            break;
        }
    }
    (found.map(|m| PointedModel { model: m, root: 0 }), stats)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    /// No countermodel was found; `certified` says whether the search was
    /// complete.
    Valid { certified: bool, bound: usize },
    CounterModel(PointedModel),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid { .. })
    }
}

/// Whether `φ → ψ` is valid, by searching for a model of `φ ∧ ¬ψ`. For DL the
/// bound is ignored and the complete [`b_dl`] search runs instead.
pub fn is_valid(phi: &Formula, psi: &Formula, logic: Logic, bound: usize) -> Result<Validity> {
    is_valid_with(phi, psi, logic, bound, &SearchConfig::default())
}

pub fn is_valid_with(phi: &Formula, psi: &Formula, logic: Logic, bound: usize, config: &SearchConfig) -> Result<Validity> {
    let f = Formula::and(phi.clone(), Formula::not(psi.clone()));
    let v = sat(&f, logic, bound, config)?;
    Ok(match v.status {
        SatStatus::Satisfiable(pm) => Validity::CounterModel(pm),
        SatStatus::UnsatUpTo(b) => Validity::Valid {
            certified: false,
            bound: b,
        },
        SatStatus::UnsatCertified => Validity::Valid {
            certified: true,
            bound: v.bound,
        },
    })
}
