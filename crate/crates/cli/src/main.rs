use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use iepkit::bisim::{maximal_bisimulation, verify_bisimulation, BisimRelation};
use iepkit::filtration::{filtrate, filtration_report, properties};
use iepkit::formula::{parse, shared_signature, Formula, Signature};
use iepkit::harness::{fuzz_axiom, fuzz_filtration, fuzz_shrink, FuzzConfig};
use iepkit::iep::{
    decide_iep_dl, decide_iep_wk4, enumerate_interpolants, witness_failures, IepStatus, WitnessPair,
};
use iepkit::kripke::dot::{model_to_dot, DotOptions};
use iepkit::kripke::{Model, ModelFile, PointedModel};
use iepkit::satsearch::{is_valid, sat, Engine, Logic, SatStatus, SearchConfig, Validity};
use iepkit::tiling::{self, TilingInstance};

const EXIT_USAGE: u8 = 64;
const EXIT_INVARIANT: u8 = 70;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "iepkit", version, about = "Interpolant existence for wK4 and DL")]
struct Cli {
    /// Worker threads for the fuzz runs.
    #[arg(long, global = true, env = "IEPKIT_WORKERS", default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print its canonical form.
    Parse {
        /// Formula file, or `-` for stdin.
        #[arg(long)]
        formula: String,
        /// Print size, depth and signature as JSON instead.
        #[arg(long)]
        json: bool,
    },
    /// Bounded satisfiability.
    Sat {
        #[command(flatten)]
        logic: LogicArgs,
        #[arg(long)]
        formula: String,
        #[arg(long, value_enum, default_value_t = EngineArg::Sat)]
        engine: EngineArg,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Validity of `phi -> psi` by countermodel search.
    Valid {
        #[command(flatten)]
        logic: LogicArgs,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Maximal rho-bisimulation between two models, or a check of a given one.
    Bisim {
        #[arg(long, conflicts_with_all = ["left", "right"])]
        witness: Option<PathBuf>,
        #[arg(long, requires = "right")]
        left: Option<PathBuf>,
        #[arg(long, requires = "left")]
        right: Option<PathBuf>,
        /// Comma-separated shared variables (default: common signature).
        #[arg(long)]
        rho: Option<String>,
        /// JSON list of pairs to verify instead of computing the maximal one.
        #[arg(long)]
        relation: Option<PathBuf>,
    },
    /// Decide interpolant existence. Exit 0: has interpolant, 1: none, 2: not valid, 3: error.
    Iep(IepArgs),
    /// Mosaic filtration of a finite model.
    Filtrate {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        model: PathBuf,
        /// Designated points `i,j` for phi and psi.
        #[arg(long, value_parser = parse_pair)]
        designate: (usize, usize),
        /// Write the filtrated model here instead of embedding it in stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: bool,
        /// Run the property checks; violations exit 70.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        emit_dot: Option<PathBuf>,
    },
    /// Tiling instances and the reduction.
    Tiling {
        #[arg(value_enum)]
        action: TilingAction,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out_prefix: Option<PathBuf>,
    },
    /// Seeded property fuzzing.
    Fuzz {
        #[arg(long, value_enum)]
        module: FuzzModule,
        #[arg(long, default_value_t = 1000)]
        seeds: u64,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_worlds: usize,
        #[arg(long, default_value_t = 3)]
        max_vars: usize,
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
    },
}

#[derive(Args)]
struct LogicArgs {
    #[arg(long, default_value = "wk4")]
    logic: Logic,
    /// World bound for wK4 searches (DL searches are complete).
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    bound: u64,
}

#[derive(Args)]
struct EmitArgs {
    /// Write the model found (if any) as JSON.
    #[arg(long)]
    emit_model: Option<PathBuf>,
    #[arg(long)]
    emit_dot: Option<PathBuf>,
}

#[derive(Args)]
struct IepArgs {
    #[command(flatten)]
    logic: LogicArgs,
    #[arg(long)]
    phi: String,
    #[arg(long)]
    psi: String,
    /// Check this witness file instead of searching.
    #[arg(long)]
    verify_only: Option<PathBuf>,
    #[arg(long)]
    emit_witness: Option<PathBuf>,
    #[arg(long)]
    emit_dot: Option<PathBuf>,
    /// Enumerate candidate interpolants up to `depth,size`.
    #[arg(long, value_parser = parse_pair)]
    find_interpolant: Option<(usize, usize)>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Sat,
    Enumerate,
}

#[derive(Clone, Copy, ValueEnum)]
enum TilingAction {
    Gen,
    Solve,
    Witness,
    Roundtrip,
}

#[derive(Clone, Copy, ValueEnum)]
enum FuzzModule {
    Filtration,
    Axiom,
    Shrink,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected two numbers `i,j`")?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((num(a)?, num(b)?))
}

/// Exit status carried out of a command.
struct Outcome(u8);

fn read_source(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn read_formula(path: &str) -> Result<Formula> {
    let text = read_source(path)?;
    parse(&text).with_context(|| format!("parsing {path}"))
}

fn read_model(path: &Path) -> Result<(Model, Option<usize>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Model::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

// a closed pipe (`| head`) is not an error worth dying over
fn print_json(v: &Value) {
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("json"));
}

fn model_json(pm: &PointedModel) -> Value {
    serde_json::to_value(ModelFile::from_model(&pm.model, Some(pm.root))).expect("json")
}

fn emit_model(pm: &PointedModel, emit: &EmitArgs) -> Result<()> {
    if let Some(p) = &emit.emit_model {
        write_file(p, &pm.to_json())?;
    }
    if let Some(p) = &emit.emit_dot {
        let dot = model_to_dot(
            &pm.model,
            &DotOptions {
                roots: &[pm.root],
                ..Default::default()
            },
        );
        write_file(p, &dot)?;
    }
    Ok(())
}

fn witness_dot(w: &WitnessPair) -> Result<String> {
    let (a, b) = (&w.phi_model, &w.psi_model);
    let n1 = a.model.len();
    let union = a.model.disjoint_union(&b.model);
    let beta = match &w.relation {
        Some(r) => r.clone(),
        None => maximal_bisimulation(&a.model, &b.model, &w.rho)?,
    };
    let n = union.len();
    let dashed = BisimRelation::from_pairs(n, n, beta.pairs().map(|(x, y)| (x, y + n1)))?;
    Ok(model_to_dot(
        &union,
        &DotOptions {
            name: Some("witness"),
            roots: &[a.root, b.root + n1],
            dashed: Some(&dashed),
        },
    ))
}

fn config(engine: EngineArg) -> SearchConfig {
    SearchConfig {
        engine: match engine {
            EngineArg::Sat => Engine::Sat,
            EngineArg::Enumerate => Engine::Enumerate,
        },
        ..Default::default()
    }
}

fn cmd_parse(formula: &str, as_json: bool) -> Result<Outcome> {
    let f = read_formula(formula)?;
    if as_json {
        print_json(&json!({
            "formula": f.to_string(),
            "size": f.size(),
            "modal_depth": f.modal_depth(),
            "signature": f.signature().iter().collect::<Vec<_>>(),
        }));
    } else {
        let _ = writeln!(std::io::stdout().lock(), "{f}");
    }
    Ok(Outcome(0))
}

fn cmd_sat(la: &LogicArgs, formula: &str, engine: EngineArg, emit: &EmitArgs) -> Result<Outcome> {
    let f = read_formula(formula)?;
    let start = Instant::now();
    let v = sat(&f, la.logic, la.bound as usize, &config(engine))?;
    eprintln!("sat: {:?} after {:.2?}", status_name(&v.status), start.elapsed());
    let mut out = json!({
        "logic": la.logic,
        "bound": v.bound,
        "status": status_name(&v.status),
        "stats": v.stats,
    });
    if let Some(pm) = v.witness() {
        out["model"] = model_json(pm);
        emit_model(pm, emit)?;
    }
    print_json(&out);
    Ok(Outcome(0))
}

fn status_name(s: &SatStatus) -> &'static str {
    match s {
        SatStatus::Satisfiable(_) => "satisfiable",
        SatStatus::UnsatUpTo(_) => "unsatisfiable-up-to-bound",
        SatStatus::UnsatCertified => "unsatisfiable",
    }
}

fn cmd_valid(la: &LogicArgs, phi: &str, psi: &str, emit: &EmitArgs) -> Result<Outcome> {
    let (phi, psi) = (read_formula(phi)?, read_formula(psi)?);
    let out = match is_valid(&phi, &psi, la.logic, la.bound as usize)? {
        Validity::Valid { certified, bound } => json!({
            "logic": la.logic,
            "valid": true,
            "certified": certified,
            "bound": bound,
        }),
        Validity::CounterModel(pm) => {
            emit_model(&pm, emit)?;
            json!({
                "logic": la.logic,
                "valid": false,
                "countermodel": model_json(&pm),
            })
        }
    };
    print_json(&out);
    Ok(Outcome(0))
}

fn cmd_bisim(
    witness: Option<&Path>,
    left: Option<&Path>,
    right: Option<&Path>,
    rho: Option<&str>,
    relation: Option<&Path>,
) -> Result<Outcome> {
    let (m1, r1, m2, r2, mut given, mut sig) = match (witness, left, right) {
        (Some(w), _, _) => {
            let text = fs::read_to_string(w).with_context(|| format!("reading {}", w.display()))?;
            let w = WitnessPair::from_json(&text)?;
            (
                w.phi_model.model,
                Some(w.phi_model.root),
                w.psi_model.model,
                Some(w.psi_model.root),
                w.relation,
                Some(w.rho),
            )
        }
        (None, Some(l), Some(r)) => {
            let (m1, r1) = read_model(l)?;
            let (m2, r2) = read_model(r)?;
            (m1, r1, m2, r2, None, None)
        }
        _ => bail!("give either --witness or both --left and --right"),
    };
    if let Some(list) = rho {
        sig = Some(list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect::<Signature>());
    }
    let sig = sig.unwrap_or_else(|| m1.signature().intersection(m2.signature()));
    if let Some(p) = relation {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        given = Some(BisimRelation::from_json(&text, m1.len(), m2.len())?);
    }
    let roots_related = |r: &BisimRelation| match (r1, r2) {
        (Some(a), Some(b)) => Some(r.contains(a, b)),
        _ => None,
    };
    let out = match given {
        Some(r) => {
            let ok = verify_bisimulation(&m1, &m2, &sig, &r)?;
            json!({
                "rho": sig.iter().collect::<Vec<_>>(),
                "is_bisimulation": ok,
                "roots_related": roots_related(&r),
            })
        }
        None => {
            let max = maximal_bisimulation(&m1, &m2, &sig)?;
            json!({
                "rho": sig.iter().collect::<Vec<_>>(),
                "maximal": max.pairs().map(|(x, y)| [x, y]).collect::<Vec<_>>(),
                "roots_related": roots_related(&max),
            })
        }
    };
    print_json(&out);
    Ok(Outcome(0))
}

fn cmd_iep(a: &IepArgs) -> Result<Outcome> {
    let (phi, psi) = (read_formula(&a.phi)?, read_formula(&a.psi)?);
    let logic = a.logic.logic;
    if let Some(p) = &a.verify_only {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let w = WitnessPair::from_json(&text)?;
        let failures = witness_failures(&w, &phi, &psi, logic)?;
        let ok = failures.is_empty();
        print_json(&json!({
            "logic": logic,
            "verified": ok,
            "failures": failures,
        }));
        return Ok(Outcome(if ok { 1 } else { EXIT_ERROR }));
    }
    let bound = a.logic.bound as usize;
    let start = Instant::now();
    let v = match logic {
        Logic::Wk4 => decide_iep_wk4(&phi, &psi, bound)?,
        Logic::Dl => decide_iep_dl(&phi, &psi)?,
    };
    eprintln!("iep: {} after {:.2?}", v.label(), start.elapsed());
    let mut out = json!({
        "logic": logic,
        "verdict": v.label(),
        "rho": shared_signature(&phi, &psi).iter().collect::<Vec<_>>(),
        "stats": v.stats,
    });
    let code = match &v.status {
        IepStatus::NotValid(pm) => {
            out["countermodel"] = model_json(pm);
            2
        }
        IepStatus::NoInterpolant(w) => {
            out["witness"] = serde_json::from_str::<Value>(&w.to_json())?;
            if let Some(p) = &a.emit_witness {
                write_file(p, &w.to_json())?;
            }
            if let Some(p) = &a.emit_dot {
                write_file(p, &witness_dot(w)?)?;
            }
            1
        }
        IepStatus::HasInterpolantUpToBound(b) => {
            out["bound"] = json!(b);
            0
        }
        IepStatus::HasInterpolantCertified => 0,
    };
    if code == 0 {
        if let Some((depth, size)) = a.find_interpolant {
            let found = enumerate_interpolants(&phi, &psi, logic, depth, size, bound)?;
            out["interpolant"] = json!(found.map(|f| f.to_string()));
        }
    }
    print_json(&out);
    Ok(Outcome(code))
}

#[allow(clippy::too_many_arguments)]
fn cmd_filtrate(
    phi: &str,
    psi: &str,
    model: &Path,
    designate: (usize, usize),
    out: Option<&Path>,
    report: bool,
    check: bool,
    emit_dot: Option<&Path>,
) -> Result<Outcome> {
    let (phi, psi) = (read_formula(phi)?, read_formula(psi)?);
    let (m, _) = read_model(model)?;
    let f = filtrate(&m, &phi, &psi, designate)?;
    let pm = PointedModel::new(f.model.clone(), f.designated.0)?;
    let mut result = json!({
        "designated": [f.designated.0, f.designated.1],
        "map": f.map,
        "beta": f.beta.pairs().map(|(x, y)| [x, y]).collect::<Vec<_>>(),
    });
    match out {
        Some(p) => write_file(p, &pm.to_json())?,
        None => result["model"] = model_json(&pm),
    }
    if report {
        result["report"] = serde_json::to_value(filtration_report(&f))?;
    }
    if let Some(p) = emit_dot {
        let dot = model_to_dot(
            &f.model,
            &DotOptions {
                name: Some("filtration"),
                roots: &[f.designated.0, f.designated.1],
                dashed: Some(&f.beta),
            },
        );
        write_file(p, &dot)?;
    }
    let mut code = 0;
    if check {
        let violations = properties::check_all(&m, &f);
        if !violations.is_empty() {
            code = EXIT_INVARIANT;
        }
        result["violations"] = serde_json::to_value(violations)?;
    }
    print_json(&result);
    Ok(Outcome(code))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_tiling(action: TilingAction, instance: &Path, prefix: Option<&Path>) -> Result<Outcome> {
    let text = fs::read_to_string(instance).with_context(|| format!("reading {}", instance.display()))?;
    let inst = TilingInstance::from_json(&text)?;
    match action {
        TilingAction::Gen => {
            let (phi, psi) = tiling::generate_formulas(&inst)?;
            let mut out = json!({
                "phi_size": phi.size(),
                "psi_size": psi.size(),
                "rho": shared_signature(&phi, &psi).iter().collect::<Vec<_>>(),
            });
            match prefix {
                Some(p) => {
                    write_file(&with_suffix(p, ".phi"), &format!("{phi}\n"))?;
                    write_file(&with_suffix(p, ".psi"), &format!("{psi}\n"))?;
                }
                None => {
                    out["phi"] = json!(phi.to_string());
                    out["psi"] = json!(psi.to_string());
                }
            }
            print_json(&out);
        }
        TilingAction::Solve => {
            let sol = tiling::solve_tiling(&inst)?;
            if let (Some(p), Some(s)) = (prefix, &sol) {
                write_file(&with_suffix(p, ".solution.json"), &s.to_json())?;
            }
            print_json(&json!({
                "solvable": sol.is_some(),
                "rows": sol.map(|s| s.rows),
            }));
        }
        TilingAction::Witness => {
            let sol = tiling::solve_tiling(&inst)?.ok_or_else(|| anyhow!("the instance has no solution"))?;
            let w = tiling::build_witness_from_solution(&inst, &sol)?;
            if let Some(p) = prefix {
                write_file(&with_suffix(p, ".witness.json"), &w.to_json())?;
                write_file(&with_suffix(p, ".witness.dot"), &witness_dot(&w)?)?;
            }
            let (n1, n2) = w.size();
            print_json(&json!({ "sizes": [n1, n2], "verified": true }));
        }
        TilingAction::Roundtrip => {
            let start = Instant::now();
            let r = tiling::roundtrip(&inst)?;
            eprintln!("roundtrip after {:.2?}", start.elapsed());
            let agrees = r.agrees();
            print_json(&json!({
                "solvable": r.solution.is_some(),
                "witness_sizes": r.witness.as_ref().map(|w| w.size()),
                "search": r.search.as_ref().map(|v| v.label()),
                "agrees": agrees,
            }));
            if !agrees {
                return Ok(Outcome(EXIT_INVARIANT));
            }
        }
    }
    Ok(Outcome(0))
}

fn cmd_fuzz(module: FuzzModule, cfg: &FuzzConfig) -> Result<Outcome> {
    let start = Instant::now();
    let outcome = match module {
        FuzzModule::Filtration => fuzz_filtration(cfg),
        FuzzModule::Axiom => fuzz_axiom(cfg),
        FuzzModule::Shrink => fuzz_shrink(cfg),
    };
    eprintln!(
        "fuzz: {} cases, {} failures after {:.2?}",
        outcome.cases,
        outcome.failures.len(),
        start.elapsed()
    );
    print_json(&serde_json::to_value(&outcome)?);
    Ok(Outcome(if outcome.passed() { 0 } else { 1 }))
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Parse { formula, json } => cmd_parse(&formula, json),
        Command::Sat {
            logic,
            formula,
            engine,
            emit,
        } => cmd_sat(&logic, &formula, engine, &emit),
        Command::Valid { logic, phi, psi, emit } => cmd_valid(&logic, &phi, &psi, &emit),
        Command::Bisim {
            witness,
            left,
            right,
            rho,
            relation,
        } => cmd_bisim(
            witness.as_deref(),
            left.as_deref(),
            right.as_deref(),
            rho.as_deref(),
            relation.as_deref(),
        ),
        Command::Iep(a) => cmd_iep(&a),
        Command::Filtrate {
            phi,
            psi,
            model,
            designate,
            out,
            report,
            check,
            emit_dot,
        } => cmd_filtrate(&phi, &psi, &model, designate, out.as_deref(), report, check, emit_dot.as_deref()),
        Command::Tiling {
            action,
            instance,
            out_prefix,
        } => cmd_tiling(action, &instance, out_prefix.as_deref()),
        Command::Fuzz {
            module,
            seeds,
            seed,
            max_worlds,
            max_vars,
            max_depth,
        } => cmd_fuzz(
            module,
            &FuzzConfig {
                seeds,
                first_seed: seed,
                max_worlds,
                max_vars,
                max_depth,
                workers: cli.workers.max(1),
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome(code)) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let invariant = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<iepkit::Error>(), Some(iepkit::Error::Invariant(_))));
            ExitCode::from(if invariant { EXIT_INVARIANT } else { EXIT_ERROR })
        }
    }
}
