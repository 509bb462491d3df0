//! Seeded random instances and the property runs behind the `fuzz`
//! subcommand. Every case is a pure function of its seed, so a failing seed
//! can be replayed on its own.

use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bisim::maximal_bisimulation;
use crate::error::Result;
use crate::filtration::{filtrate, properties, properties::Violation};
use crate::formula::{random_formula, shared_signature, Formula, FormulaShape, Signature};
use crate::iep::{b_iep, shrink_dl_witness, witness_failures, WitnessPair};
use crate::kripke::{extension, weak_transitive_closure, Frame, Model, PointedModel};
use crate::satsearch::Logic;

const VARS: [&str; 3] = ["p", "q", "r"];

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub seeds: u64,
    pub first_seed: u64,
    pub max_worlds: usize,
    pub max_vars: usize,
    pub max_depth: usize,
    pub workers: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seeds: 1000,
            first_seed: 0,
            max_worlds: 8,
            max_vars: 3,
            max_depth: 3,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub property: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FuzzOutcome {
    pub cases: u64,
    pub failures: Vec<SeedFailure>,
    /// Largest model produced by a case (`|W†|` for filtration runs).
    pub largest: usize,
}

impl FuzzOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random weakly transitive model with `1..=max_worlds` points over `sig`.
pub fn random_wt_model<R: Rng + ?Sized>(rng: &mut R, max_worlds: usize, sig: &Signature) -> Model {
    let n = rng.gen_range(1..=max_worlds.max(1));
    let density = rng.gen_range(0.05..0.6);
    let mut f = Frame::new(n);
    for x in 0..n {
        for y in 0..n {
            if rng.gen_bool(density) {
                f.add_edge(x, y);
            }
        }
    }
    let mut m = Model::new(weak_transitive_closure(&f), sig.clone());
    for v in sig.iter() {
        for x in 0..n {
            if rng.gen_bool(0.5) {
                m.set(v, x, true).expect("in range");
            }
        }
    }
    m
}

/// A random formula of modal depth at most `depth` over a random nonempty
/// subset of `vars`.
pub fn random_formula_over<R: Rng + ?Sized>(rng: &mut R, vars: &[&str], depth: usize) -> Formula {
    let pick: Vec<&str> = loop {
        let p: Vec<&str> = vars.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
        if !p.is_empty() || vars.is_empty() {
            break p;
        }
    };
    let shape = FormulaShape::new(&pick, depth + 2);
    loop {
        let f = random_formula(rng, &shape);
        if f.modal_depth() <= depth {
            return f;
        }
    }
}

/// Input of one filtration case.
#[derive(Clone, Debug)]
pub struct FiltrationCase {
    pub model: Model,
    pub phi: Formula,
    pub psi: Formula,
    pub designated: (usize, usize),
}

pub fn filtration_case(seed: u64, cfg: &FuzzConfig) -> FiltrationCase {
    let mut rng = rng_for(seed);
    let vars = &VARS[..cfg.max_vars.clamp(1, VARS.len())];
    let phi = random_formula_over(&mut rng, vars, cfg.max_depth);
    let psi = random_formula_over(&mut rng, vars, cfg.max_depth);
    let sigma = phi.signature().union(&psi.signature());
    let model = random_wt_model(&mut rng, cfg.max_worlds, &sigma);
    let n = model.len();
    let rp = rng.gen_range(0..n);
    // half of the cases use ρ-bisimilar designated points
    let rq = if rng.gen_bool(0.5) {
        let rho = shared_signature(&phi, &psi);
        let max = maximal_bisimulation(&model, &model, &rho).expect("signature covers ρ");
        let row: Vec<usize> = max.row(rp).iter().collect();
        row[rng.gen_range(0..row.len())]
    } else {
        rng.gen_range(0..n)
    };
    FiltrationCase {
        model,
        phi,
        psi,
        designated: (rp, rq),
    }
}

/// Filtrates one case and returns every property violation.
pub fn check_filtration_case(case: &FiltrationCase) -> Result<(usize, Vec<Violation>)> {
    let f = filtrate(&case.model, &case.phi, &case.psi, case.designated)?;
    Ok((f.worlds.len(), properties::check_all(&case.model, &f)))
}

fn run_seeds(cfg: &FuzzConfig, case: impl Fn(u64) -> (usize, Vec<SeedFailure>) + Sync) -> FuzzOutcome {
    let out = Mutex::new(FuzzOutcome::default());
    let next = Mutex::new(cfg.first_seed);
    let end = cfg.first_seed.saturating_add(cfg.seeds);
    std::thread::scope(|s| {
        for _ in 0..cfg.workers.max(1) {
            s.spawn(|| loop {
                let seed = {
                    let mut n = next.lock().expect("seed counter");
                    if *n >= end {
                        break;
                    }
                    *n += 1;
                    *n - 1
                };
                let (size, failures) = case(seed);
                let mut o = out.lock().expect("outcome");
                o.cases += 1;
                o.largest = o.largest.max(size);
                o.failures.extend(failures);
            });
        }
    });
    let mut o = out.into_inner().expect("outcome");
    o.failures.sort_by(|a, b| (a.seed, &a.property, &a.detail).cmp(&(b.seed, &b.property, &b.detail)));
    o
}

fn failure(seed: u64, property: impl Into<String>, detail: impl Into<String>) -> SeedFailure {
    SeedFailure {
        seed,
        property: property.into(),
        detail: detail.into(),
    }
}

/// The filtration property suite over `cfg.seeds` random cases.
pub fn fuzz_filtration(cfg: &FuzzConfig) -> FuzzOutcome {
    run_seeds(cfg, |seed| {
        let case = filtration_case(seed, cfg);
        match check_filtration_case(&case) {
            Ok((size, vs)) => (size, vs.into_iter().map(|v| failure(seed, v.property, v.detail)).collect()),
            Err(e) => (0, vec![failure(seed, "filtrate", e.to_string())]),
        }
    })
}

/// `◇◇p → (p ∨ ◇p)` at every world of random weakly transitive models.
pub fn fuzz_axiom(cfg: &FuzzConfig) -> FuzzOutcome {
    let axiom = crate::formula::parse("<><>p -> p | <>p").expect("axiom parses");
    let sig: Signature = ["p"].into_iter().collect();
    run_seeds(cfg, |seed| {
        let m = random_wt_model(&mut rng_for(seed), cfg.max_worlds, &sig);
        let ext = extension(&m, &axiom).expect("p is in the signature");
        let bad: Vec<usize> = (0..m.len()).filter(|&x| !ext.contains(x)).collect();
        let fails = if bad.is_empty() {
            vec![]
        } else {
            vec![failure(seed, "wK4 axiom", format!("fails at {bad:?}"))]
        };
        (m.len(), fails)
    })
}

fn random_cluster<R: Rng + ?Sized>(rng: &mut R, max_worlds: usize, sig: &Signature) -> Model {
    let n = rng.gen_range(1..=max_worlds.max(1));
    let mut f = Frame::difference(n);
    for x in 0..n {
        if rng.gen_bool(0.4) {
            f.add_edge(x, x);
        }
    }
    let mut m = Model::new(f, sig.clone());
    for v in sig.iter() {
        for x in 0..n {
            if rng.gen_bool(0.5) {
                m.set(v, x, true).expect("in range");
            }
        }
    }
    m
}

/// Adds up to `extra` copies of points whose kind (valuation and
/// reflexivity) is reflexive or already occurs twice, so truth is unchanged.
pub fn pad_cluster<R: Rng + ?Sized>(rng: &mut R, m: &Model, extra: usize) -> Model {
    let n = m.len();
    let kind = |x: usize| {
        let vals: Vec<bool> = m.signature().iter().map(|v| m.holds(v, x).expect("in signature")).collect();
        (vals, m.frame().is_reflexive_at(x))
    };
    let safe: Vec<usize> = (0..n)
        .filter(|&x| m.frame().is_reflexive_at(x) || (0..n).any(|y| y != x && kind(y) == kind(x)))
        .collect();
    if safe.is_empty() {
        return m.clone();
    }
    let copies: Vec<usize> = (0..extra).map(|_| safe[rng.gen_range(0..safe.len())]).collect();
    let total = n + copies.len();
    let source = |x: usize| if x < n { x } else { copies[x - n] };
    let mut f = Frame::difference(total);
    for x in 0..total {
        if m.frame().is_reflexive_at(source(x)) {
            f.add_edge(x, x);
        }
    }
    let mut out = Model::new(f, m.signature().clone());
    for v in m.signature().iter() {
        for x in 0..total {
            if m.holds(v, source(x)).expect("in signature") {
                out.set(v, x, true).expect("in range");
            }
        }
    }
    out
}

/// A verified DL witness pair for random `(φ, ψ)`, padded with redundant
/// points; `None` when the seed's draw is not a witness.
pub fn random_padded_dl_witness(seed: u64, cfg: &FuzzConfig) -> Option<(Formula, Formula, WitnessPair)> {
    let mut rng = rng_for(seed);
    let vars = &VARS[..cfg.max_vars.clamp(1, VARS.len())];
    let phi = random_formula_over(&mut rng, vars, cfg.max_depth);
    let psi = random_formula_over(&mut rng, vars, cfg.max_depth);
    let rho = shared_signature(&phi, &psi);
    let m1 = random_cluster(&mut rng, cfg.max_worlds, &phi.signature());
    let m2 = random_cluster(&mut rng, cfg.max_worlds, &psi.signature());
    let (e1, e2) = (rng.gen_range(1..=cfg.max_worlds), rng.gen_range(1..=cfg.max_worlds));
    let m1 = pad_cluster(&mut rng, &m1, e1);
    let m2 = pad_cluster(&mut rng, &m2, e2);
    let w = WitnessPair {
        phi_model: PointedModel::new(m1, 0).ok()?,
        psi_model: PointedModel::new(m2, 0).ok()?,
        rho,
        relation: None,
    };
    match witness_failures(&w, &phi, &psi, Logic::Dl) {
        Ok(f) if f.is_empty() => Some((phi, psi, w)),
        _ => None,
    }
}

/// Shrinks random padded DL witnesses and re-verifies the result.
/// Seeds whose draw is not a witness are skipped and not counted.
pub fn fuzz_shrink(cfg: &FuzzConfig) -> FuzzOutcome {
    let mut o = run_seeds(cfg, |seed| {
        let Some((phi, psi, w)) = random_padded_dl_witness(seed, cfg) else {
            return (usize::MAX, vec![]);
        };
        let bound = b_iep(&phi, &psi);
        match shrink_dl_witness(&w, &phi, &psi) {
            Err(e) => (0, vec![failure(seed, "shrink", e.to_string())]),
            Ok(s) => {
                let (a, b) = s.size();
                let mut fails = Vec::new();
                match witness_failures(&s, &phi, &psi, Logic::Dl) {
                    Ok(f) if f.is_empty() => {}
                    Ok(f) => fails.push(failure(seed, "shrink verify", f.join("; "))),
                    Err(e) => fails.push(failure(seed, "shrink verify", e.to_string())),
                }
                if a > bound || b > bound {
                    fails.push(failure(seed, "B_IEP", format!("sizes ({a}, {b}) > {bound}")));
                }
                (a + b, fails)
            }
        }
    });
    // skipped seeds reported usize::MAX as their size
    o.largest = 0;
    o
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::is_weakly_transitive;

    #[test]
    fn cases_are_reproducible() {
        let cfg = FuzzConfig::default();
        let a = filtration_case(17, &cfg);
        let b = filtration_case(17, &cfg);
        assert_eq!(a.model, b.model);
        assert_eq!(a.phi, b.phi);
        assert!(is_weakly_transitive(a.model.frame()));
        assert!(a.model.len() <= 8);
        assert!(a.phi.modal_depth() <= 3 && a.psi.modal_depth() <= 3);
    }

    #[test]
    fn small_runs_pass() {
        let cfg = FuzzConfig {
            seeds: 40,
            workers: 2,
            ..FuzzConfig::default()
        };
        let f = fuzz_filtration(&cfg);
        assert_eq!(f.cases, 40);
        assert!(f.passed(), "{:?}", f.failures);
        assert!(fuzz_axiom(&cfg).passed());
        let s = fuzz_shrink(&cfg);
        assert!(s.passed(), "{:?}", s.failures);
    }

    #[test]
    fn padding_keeps_truth() {
        let mut rng = rng_for(3);
        let sig: Signature = ["p"].into_iter().collect();
        for _ in 0..50 {
            let m = random_cluster(&mut rng, 4, &sig);
            let padded = pad_cluster(&mut rng, &m, 3);
            let f = crate::formula::parse("<>p & <>~p | <><>(p & ~<>p)").unwrap();
            assert_eq!(
                extension(&m, &f).unwrap().contains(0),
                extension(&padded, &f).unwrap().contains(0)
            );
        }
    }
}
