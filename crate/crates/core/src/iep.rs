//! Interpolant existence.
//!
//! `φ → ψ` has no interpolant in `L ∈ {wK4, DL}` iff there are rooted
//! `L`-models `𝔐_φ, r_φ ⊨ φ` and `𝔐_ψ, r_ψ ⊨ ¬ψ` whose roots are
//! ρ-bisimilar for the shared signature ρ. The deciders below search for
//! such a witness pair with a SAT encoding: for DL over clusters up to a
//! complete polynomial bound, for wK4 up to a caller-chosen bound.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bisim::{maximal_bisimulation, rho_classes, verify_bisimulation, BisimRelation};
use crate::error::{Error, Result};
use crate::formula::{shared_signature, Formula, Signature, SubClosure};
use crate::kripke::{extension, is_dl_frame, is_rooted_at, is_weakly_transitive, model_check, ModelFile, PointedModel};
use crate::satsearch::cnf::{Bisim, Cnf, Side, SideClass};
use crate::satsearch::{dl_kind_cap, is_valid, Logic, Validity};

/// The data of the bisimulation criterion: two pointed models and the
/// shared signature, optionally with an explicit ρ-bisimulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessPair {
    pub phi_model: PointedModel,
    pub psi_model: PointedModel,
    pub rho: Signature,
    pub relation: Option<BisimRelation>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessFile {
    rho: Vec<String>,
    phi: ModelFile,
    psi: ModelFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relation: Option<Vec<[usize; 2]>>,
}

impl WitnessPair {
    pub fn size(&self) -> (usize, usize) {
        (self.phi_model.model.len(), self.psi_model.model.len())
    }

    /// `{"rho": [...], "phi": model, "psi": model, "relation": [[x,y],...]?}`
    /// where both models carry a `root`.
    pub fn to_json(&self) -> String {
        let file = WitnessFile {
            rho: self.rho.iter().map(str::to_string).collect(),
            phi: ModelFile::from_model(&self.phi_model.model, Some(self.phi_model.root)),
            psi: ModelFile::from_model(&self.psi_model.model, Some(self.psi_model.root)),
            relation: self.relation.as_ref().map(|r| r.pairs().map(|(x, y)| [x, y]).collect()),
        };
        serde_json::to_string(&file).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<WitnessPair> {
        let file: WitnessFile = serde_json::from_str(text)?;
        let side = |mf: ModelFile, name: &str| -> Result<PointedModel> {
            let (m, root) = mf.into_model()?;
            let root = root.ok_or_else(|| Error::MalformedModel(format!("{name} model needs a `root`")))?;
            PointedModel::new(m, root)
        };
        let phi_model = side(file.phi, "phi")?;
        let psi_model = side(file.psi, "psi")?;
        let relation = match file.relation {
            Some(pairs) => Some(BisimRelation::from_pairs(
                phi_model.model.len(),
                psi_model.model.len(),
                pairs.into_iter().map(|[x, y]| (x, y)),
            )?),
            None => None,
        };
        Ok(WitnessPair {
            phi_model,
            psi_model,
            rho: file.rho.into_iter().collect(),
            relation,
        })
    }
}

/// Reasons a witness pair fails; empty means it verifies.
pub fn witness_failures(w: &WitnessPair, phi: &Formula, psi: &Formula, logic: Logic) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let rho = shared_signature(phi, psi);
    if w.rho != rho {
        out.push(format!("declared signature {} differs from the shared signature {rho}", w.rho));
    }
    for (name, pm) in [("phi", &w.phi_model), ("psi", &w.psi_model)] {
        let frame = pm.model.frame();
        if !is_weakly_transitive(frame) {
            out.push(format!("{name} model is not weakly transitive"));
        } else if !is_rooted_at(frame, pm.root) {
            out.push(format!("{name} model is not rooted at {}", pm.root));
        }
        if logic == Logic::Dl && !is_dl_frame(frame) {
            out.push(format!("{name} model is not symmetric"));
        }
    }
    if !model_check(&w.phi_model.model, w.phi_model.root, phi)? {
        out.push("phi is false at the root of the phi model".into());
    }
    if model_check(&w.psi_model.model, w.psi_model.root, psi)? {
        out.push("psi is true at the root of the psi model".into());
    }
    let (m1, m2) = (&w.phi_model.model, &w.psi_model.model);
    match &w.relation {
        Some(beta) => {
            if !verify_bisimulation(m1, m2, &rho, beta)? {
                out.push("the given relation is not a rho-bisimulation".into());
            }
            if !beta.contains(w.phi_model.root, w.psi_model.root) {
                out.push("the given relation does not relate the roots".into());
            }
        }
        None => {
            if !maximal_bisimulation(m1, m2, &rho)?.contains(w.phi_model.root, w.psi_model.root) {
                out.push("the roots are not rho-bisimilar".into());
            }
        }
    }
    Ok(out)
}

/// Checks the frame class, rootedness, `φ` and `¬ψ` at the roots, and
/// ρ-bisimilarity of the roots (via the given relation, if any).
pub fn verify_witness(w: &WitnessPair, phi: &Formula, psi: &Formula, logic: Logic) -> Result<bool> {
    Ok(witness_failures(w, phi, psi, logic)?.is_empty())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IepStatus {
    NotValid(PointedModel),
    NoInterpolant(WitnessPair),
    HasInterpolantCertified,
    HasInterpolantUpToBound(usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IepStats {
    /// Per-side world bounds of the witness search.
    pub bounds: (usize, usize),
    pub validity_certified: bool,
    pub solver_calls: u64,
    pub sat_vars: u64,
    pub sat_clauses: u64,
    pub conflicts: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IepVerdict {
    pub status: IepStatus,
    pub stats: IepStats,
}

impl IepVerdict {
    pub fn witness(&self) -> Option<&WitnessPair> {
        match &self.status {
            IepStatus::NoInterpolant(w) => Some(w),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.status {
            IepStatus::NotValid(_) => "not-valid",
            IepStatus::NoInterpolant(_) => "no-interpolant",
            IepStatus::HasInterpolantCertified => "has-interpolant",
            IepStatus::HasInterpolantUpToBound(_) => "has-interpolant-up-to-bound",
        }
    }
}

/// Per-model world bound for DL witnesses:
/// `(2|sub(φ)| + 1) + (2|sub(ψ)| + 1) + 2·(2|sub(φ)| + 2|sub(ψ)| + 2)`.
pub fn b_iep(phi: &Formula, psi: &Formula) -> usize {
    let a = SubClosure::of(phi).len();
    let b = SubClosure::of(psi).len();
    (2 * a + 1) + (2 * b + 1) + 2 * (2 * a + 2 * b + 2)
}

/// Options for the wK4 decider.
#[derive(Clone, Copy, Debug)]
pub struct Wk4Options {
    /// World bounds for `𝔐_φ` and `𝔐_ψ`.
    pub bounds: (usize, usize),
    /// Bound for the preliminary validity check.
    pub validity_bound: usize,
    /// Return a witness of smallest total size.
    pub minimize: bool,
}

impl Wk4Options {
    pub fn uniform(bound: usize) -> Wk4Options {
        Wk4Options {
            bounds: (bound, bound),
            validity_bound: bound,
            minimize: true,
        }
    }
}

pub fn decide_iep_wk4(phi: &Formula, psi: &Formula, bound: usize) -> Result<IepVerdict> {
    decide_iep_wk4_with(phi, psi, &Wk4Options::uniform(bound))
}

pub fn decide_iep_wk4_with(phi: &Formula, psi: &Formula, opts: &Wk4Options) -> Result<IepVerdict> {
    let (n1, n2) = opts.bounds;
    if n1 == 0 || n2 == 0 || opts.validity_bound == 0 {
        return Err(Error::ZeroBound);
    }
    let start = Instant::now();
    let mut stats = IepStats {
        bounds: opts.bounds,
        ..Default::default()
    };
    match is_valid(phi, psi, Logic::Wk4, opts.validity_bound)? {
        Validity::CounterModel(pm) => {
            stats.elapsed = start.elapsed();
            return Ok(IepVerdict {
                status: IepStatus::NotValid(pm),
                stats,
            });
        }
        Validity::Valid { certified, .. } => stats.validity_certified = certified,
    }
    let found = search_witness(phi, psi, (n1, n2), SideClass::Wk4, opts.minimize, &mut stats)?;
    stats.elapsed = start.elapsed();
    let status = match found {
        Some(w) => {
            check_found(&w, phi, psi, Logic::Wk4)?;
            IepStatus::NoInterpolant(w)
        }
        None => IepStatus::HasInterpolantUpToBound(n1.max(n2)),
    };
    Ok(IepVerdict { status, stats })
}

/// Complete DL decider. Witnesses are searched over pairs of clusters of
/// at most [`b_iep`] worlds each (and at most two worlds per valuation and
/// reflexivity kind, beyond which extra copies are bisimilar duplicates).
pub fn decide_iep_dl(phi: &Formula, psi: &Formula) -> Result<IepVerdict> {
    let start = Instant::now();
    let bound = b_iep(phi, psi);
    let n1 = bound.min(dl_kind_cap(phi.signature().len()));
    let n2 = bound.min(dl_kind_cap(psi.signature().len()));
    let mut stats = IepStats {
        bounds: (n1, n2),
        ..Default::default()
    };
    match is_valid(phi, psi, Logic::Dl, 1)? {
        Validity::CounterModel(pm) => {
            stats.elapsed = start.elapsed();
            return Ok(IepVerdict {
                status: IepStatus::NotValid(pm),
                stats,
            });
        }
        Validity::Valid { certified, .. } => stats.validity_certified = certified,
    }
    let found = search_witness(phi, psi, (n1, n2), SideClass::Cluster, true, &mut stats)?;
    stats.elapsed = start.elapsed();
    let status = match found {
        Some(w) => {
            check_found(&w, phi, psi, Logic::Dl)?;
            IepStatus::NoInterpolant(w)
        }
        None => IepStatus::HasInterpolantCertified,
    };
    Ok(IepVerdict { status, stats })
}

pub fn decide_iep(phi: &Formula, psi: &Formula, logic: Logic, bound: usize) -> Result<IepVerdict> {
    match logic {
        Logic::Wk4 => decide_iep_wk4(phi, psi, bound),
        Logic::Dl => decide_iep_dl(phi, psi),
    }
}

fn check_found(w: &WitnessPair, phi: &Formula, psi: &Formula, logic: Logic) -> Result<()> {
    let failures = witness_failures(w, phi, psi, logic)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Invariant(format!("decoded witness fails: {}", failures.join("; "))))
    }
}

fn search_witness(
    phi: &Formula,
    psi: &Formula,
    (n1, n2): (usize, usize),
    class: SideClass,
    minimize: bool,
    stats: &mut IepStats,
) -> Result<Option<WitnessPair>> {
    let cl = SubClosure::new(phi, psi);
    let rho = shared_signature(phi, psi);
    let mut cnf = Cnf::new();
    let a_pairs: Vec<usize> = cl.phi_pairs().iter().collect();
    let b_pairs: Vec<usize> = cl.psi_pairs().iter().collect();
    let a = Side::encode(&mut cnf, n1, class, &cl, &a_pairs);
    let b = Side::encode(&mut cnf, n2, class, &cl, &b_pairs);
    let goal_a = a.literal(0, cl.phi_literal());
    let goal_b = !b.literal(0, cl.psi_literal());
    cnf.add(&[goal_a]);
    cnf.add(&[goal_b]);
    let beta = Bisim::encode(&mut cnf, &a, &b, &rho);
    stats.sat_vars = cnf.num_vars();
    stats.sat_clauses = cnf.num_clauses();
    stats.solver_calls += 1;
    let mut sat = cnf.solve(&[]);
    if sat && minimize {
        sat = false;
        'outer: for total in 2..=n1 + n2 {
            for k1 in total.saturating_sub(n2).max(1)..=n1.min(total - 1) {
                let mut assume = a.exact_size(k1);
                assume.extend(b.exact_size(total - k1));
                stats.solver_calls += 1;
                if cnf.solve(&assume) {
                    sat = true;
                    break 'outer;
                }
            }
        }
        if !sat {
            return Err(Error::Invariant("solver lost a witness while minimising".into()));
        }
    }
    stats.conflicts = cnf.num_conflicts();
    if !sat {
        return Ok(None);
    }
    let (m1, m2) = (a.decode(&cnf), b.decode(&cnf));
    let decoded = beta.decode(&cnf, m1.len(), m2.len());
    if !verify_bisimulation(&m1, &m2, &rho, &decoded)? || !decoded.contains(0, 0) {
        return Err(Error::Invariant("decoded relation is not a rho-bisimulation".into()));
    }
    let relation = maximal_bisimulation(&m1, &m2, &rho)?;
    Ok(Some(WitnessPair {
        phi_model: PointedModel::new(m1, 0)?,
        psi_model: PointedModel::new(m2, 0)?,
        rho,
        relation: Some(relation),
    }))
}

/// Cuts a verified DL witness down to at most [`b_iep`] worlds per model:
/// up to two points for each closure member true in a model (plus the
/// root), then up to two points in each model for every ρ-bisimilarity
/// class met so far. The relation is always recomputed on the result.
pub fn shrink_dl_witness(w: &WitnessPair, phi: &Formula, psi: &Formula) -> Result<WitnessPair> {
    let failures = witness_failures(w, phi, psi, Logic::Dl)?;
    if !failures.is_empty() {
        return Err(Error::WitnessRejected(failures.join("; ")));
    }
    let rho = shared_signature(phi, psi);
    let (m1, m2) = (&w.phi_model.model, &w.psi_model.model);
    let stage_one = |pm: &PointedModel, f: &Formula| -> Result<BTreeSet<usize>> {
        let mut keep = BTreeSet::from([pm.root]);
        for member in SubClosure::of(f).members() {
            keep.extend(extension(&pm.model, &member)?.iter().take(2));
        }
        Ok(keep)
    };
    let mut keep1 = stage_one(&w.phi_model, phi)?;
    let mut keep2 = stage_one(&w.psi_model, psi)?;

    // ρ-classes over the disjoint union; the ψ-model is shifted by |W₁|
    let union = m1.disjoint_union(m2);
    let classes = rho_classes(&union, &rho)?;
    let off = m1.len();
    let met: BTreeSet<usize> = keep1
        .iter()
        .map(|&x| classes.class_of[x])
        .chain(keep2.iter().map(|&x| classes.class_of[x + off]))
        .collect();
    let mut per_class: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (x, &c) in classes.class_of.iter().enumerate() {
        if met.contains(&c) {
            let e = per_class.entry(c).or_default();
            if x < off {
                e.0.push(x);
            } else {
                e.1.push(x - off);
            }
        }
    }
    for (xs, ys) in per_class.values() {
        keep1.extend(xs.iter().take(2));
        keep2.extend(ys.iter().take(2));
    }

    let restrict = |pm: &PointedModel, keep: &BTreeSet<usize>| -> Result<PointedModel> {
        let mut order = vec![pm.root];
        order.extend(keep.iter().copied().filter(|&x| x != pm.root));
        PointedModel::new(pm.model.restrict(&order), 0)
    };
    let phi_model = restrict(&w.phi_model, &keep1)?;
    let psi_model = restrict(&w.psi_model, &keep2)?;
    let relation = maximal_bisimulation(&phi_model.model, &psi_model.model, &rho)?;
    let out = WitnessPair {
        phi_model,
        psi_model,
        rho,
        relation: Some(relation),
    };
    let failures = witness_failures(&out, phi, psi, Logic::Dl)?;
    if !failures.is_empty() {
        return Err(Error::Invariant(format!("shrunk witness fails: {}", failures.join("; "))));
    }
    Ok(out)
}

/// All formulas over `vars` (core constructors, no `¬¬` and no `χ ∧ χ`)
/// with exactly `size` nodes and modal depth at most `depth`, sorted by
/// their printed form.
pub fn formulas_of_size(vars: &Signature, size: usize, depth: usize) -> Vec<Formula> {
    let mut table: Vec<Vec<Formula>> = vec![Vec::new(); size + 1];
    for s in 1..=size {
        let mut out: Vec<Formula> = Vec::new();
        if s == 1 {
            out.push(Formula::False);
            out.push(Formula::True);
            out.extend(vars.iter().map(Formula::var));
        } else {
            for g in &table[s - 1] {
                if !matches!(g, Formula::Not(_)) {
                    out.push(Formula::not(g.clone()));
                }
                if g.modal_depth() < depth {
                    out.push(Formula::diamond(g.clone()));
                }
            }
            for ls in 1..s - 1 {
                let rs = s - 1 - ls;
                for a in &table[ls] {
                    for b in &table[rs] {
                        if a != b {
                            out.push(Formula::and(a.clone(), b.clone()));
                        }
                    }
                }
            }
        }
        table[s] = out;
    }
    let mut out = std::mem::take(&mut table[size]);
    out.sort_by_cached_key(|f| f.to_string());
    out.dedup();
    out
}

/// Searches ρ-formulas in order of size, then printed form, for an
/// interpolant whose two implications pass [`is_valid`] at `bound`.
/// `None` is inconclusive.
pub fn enumerate_interpolants(
    phi: &Formula,
    psi: &Formula,
    logic: Logic,
    depth: usize,
    size: usize,
    bound: usize,
) -> Result<Option<Formula>> {
    let rho = shared_signature(phi, psi);
    for s in 1..=size {
        for iota in formulas_of_size(&rho, s, depth) {
            if is_valid(phi, &iota, logic, bound)?.is_valid() && is_valid(&iota, psi, logic, bound)?.is_valid() {
                return Ok(Some(iota));
            }
        }
    }
    Ok(None)
}
