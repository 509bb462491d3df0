mod common;

use iepkit::iep::{decide_iep_dl, decide_iep_wk4, enumerate_interpolants, shrink_dl_witness};
use iepkit::{parse, sub_closure, verify_witness, Formula, IepStatus};
use iepkit::satsearch::Logic;

fn label(s: &IepStatus) -> &'static str {
    match s {
        IepStatus::NotValid(_) => "not-valid",
        IepStatus::NoInterpolant(_) => "no-interpolant",
        IepStatus::HasInterpolantCertified | IepStatus::HasInterpolantUpToBound(_) => "has-interpolant",
    }
}

/// Independent re-check of a witness: frame class, roots, truth and
/// bisimilarity of the roots.
fn oracle_accepts(w: &iepkit::WitnessPair, phi: &Formula, psi: &Formula, dl: bool) -> bool {
    let (a, b) = (&w.phi_model, &w.psi_model);
    let class = |m: &iepkit::Model| {
        common::weakly_transitive(m.frame()) && (!dl || common::dl_cluster(m.frame()))
    };
    class(&a.model)
        && class(&b.model)
        && common::rooted(a.model.frame(), a.root)
        && common::rooted(b.model.frame(), b.root)
        && common::eval(&a.model, a.root, phi)
        && !common::eval(&b.model, b.root, psi)
        && common::naive_bisim(&a.model, &b.model, &iepkit::shared_signature(phi, psi))[a.root][b.root]
}

#[test]
fn dl_verdicts_match_the_cluster_oracle_on_small_formulas() {
    let vars = ["p", "q"];
    let mut oracle = common::DlIepOracle::new(&vars);
    let fs = common::formulas_up_to(&vars, 3);
    let mut counts = std::collections::BTreeMap::new();
    for phi in &fs {
        for psi in &fs {
            if sub_closure(phi, psi).len() > 8 {
                continue;
            }
            let v = decide_iep_dl(phi, psi).unwrap();
            let want = oracle.verdict(phi, psi);
            assert_eq!(label(&v.status), want, "{phi} / {psi}");
            if let Some(w) = v.witness() {
                assert!(oracle_accepts(w, phi, psi, true), "{phi} / {psi}");
            }
            *counts.entry(want).or_insert(0) += 1;
        }
    }
    // formulas this small are too weak to separate ρ-bisimilar roots, so
    // only the other two verdicts occur
    assert_eq!(counts.len(), 2, "{counts:?}");
}

#[test]
fn shared_variable_interpolant() {
    let phi = parse("p & r").unwrap();
    let psi = parse("p | q").unwrap();
    for logic in [Logic::Wk4, Logic::Dl] {
        let v = iepkit::iep::decide_iep(&phi, &psi, logic, 3).unwrap();
        assert!(matches!(
            v.status,
            IepStatus::HasInterpolantCertified | IepStatus::HasInterpolantUpToBound(_)
        ));
    }
    let found = enumerate_interpolants(&phi, &psi, Logic::Wk4, 0, 1, 3).unwrap();
    assert_eq!(found, Some(parse("p").unwrap()));
}

#[test]
fn fixture_witnesses_pass_the_oracle() {
    let (phi, psi) = iepkit::fixtures::wk4_gap_formulas();
    let v = decide_iep_wk4(&phi, &psi, 3).unwrap();
    let w = v.witness().expect("no interpolant");
    assert!(oracle_accepts(w, &phi, &psi, false));

    let (phi, psi) = iepkit::fixtures::dl_gap_formulas();
    let v = decide_iep_dl(&phi, &psi).unwrap();
    let w = v.witness().expect("no interpolant");
    assert!(oracle_accepts(w, &phi, &psi, true));
}

#[test]
fn shrinking_padded_witnesses() {
    let cfg = iepkit::harness::FuzzConfig::default();
    let mut done = 0;
    for seed in 0..2000 {
        let Some((phi, psi, w)) = iepkit::harness::random_padded_dl_witness(seed, &cfg) else {
            continue;
        };
        let s = shrink_dl_witness(&w, &phi, &psi).unwrap();
        assert!(verify_witness(&s, &phi, &psi, Logic::Dl).unwrap());
        assert!(oracle_accepts(&s, &phi, &psi, true), "seed {seed}");
        let bound = iepkit::iep::b_iep(&phi, &psi);
        assert!(s.size().0 <= bound && s.size().1 <= bound);
        done += 1;
        if done == 100 {
            break;
        }
    }
    assert_eq!(done, 100);
}

#[test]
fn not_valid_countermodels_are_real() {
    let phi = parse("<>p").unwrap();
    let psi = parse("<><>p").unwrap();
    // in DL a single irreflexive pair gives <>p but not <><>p at the p-point
    let v = decide_iep_dl(&parse("p & <>~p").unwrap(), &parse("<>p").unwrap()).unwrap();
    let IepStatus::NotValid(pm) = v.status else { panic!("{}", v.label()) };
    assert!(common::eval(&pm.model, pm.root, &parse("p & <>~p & ~<>p").unwrap()));
    let v = decide_iep_wk4(&psi, &phi, 3).unwrap();
    let IepStatus::NotValid(pm) = v.status else { panic!("{}", v.label()) };
    assert!(common::eval(&pm.model, pm.root, &parse("<><>p & ~<>p").unwrap()));
}

#[test]
fn dl_verdicts_match_the_cluster_oracle_on_larger_pairs() {
    use rand::seq::SliceRandom;
    let vars = ["p", "q"];
    let mut oracle = common::DlIepOracle::new(&vars);
    let fs: Vec<Formula> = common::formulas_up_to(&vars, 7)
        .into_iter()
        .filter(|f| f.modal_depth() >= 1)
        .collect();
    let mut rng = iepkit::harness::rng_for(7);
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..3000 {
        let phi = fs.choose(&mut rng).unwrap();
        let psi = fs.choose(&mut rng).unwrap();
        let v = decide_iep_dl(phi, psi).unwrap();
        let want = oracle.verdict(phi, psi);
        assert_eq!(label(&v.status), want, "{phi} / {psi}");
        if let Some(w) = v.witness() {
            assert!(oracle_accepts(w, phi, psi, true), "{phi} / {psi}");
        }
        *counts.entry(want).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), 2, "{counts:?}");
}

/// Random pairs almost never lack an interpolant, so these are built by
/// hand: `φ` pins down a two-point irreflexive cluster, `¬ψ` needs a root
/// that sees two different points, and both roots see something.
#[test]
fn dl_pairs_without_interpolant_match_the_oracle() {
    let vars = ["p", "q"];
    let mut oracle = common::DlIepOracle::new(&vars);
    let pinned = "p & ~<>p & <><>p & ~<><><>p";
    let cases = [
        (pinned, "~(q & <>~q & <>q)", "no-interpolant"),
        (pinned, "~(<>~q & <>q)", "no-interpolant"),
        (pinned, "~(~q & <>q & <>(q & <>~q) & <>~q)", "no-interpolant"),
        (pinned, "<>true", "has-interpolant"),
        (pinned, "~(q & <>q)", "not-valid"),
        ("p & ~<>p & <><>p", "~(q & <>~q & <>q)", "not-valid"),
        ("p & <>~p & ~<>p", "~(<>~q & <>q)", "not-valid"),
    ];
    for (a, b, want) in cases {
        let (phi, psi) = (parse(a).unwrap(), parse(b).unwrap());
        assert_eq!(oracle.verdict(&phi, &psi), want, "oracle on {a} / {b}");
        let v = decide_iep_dl(&phi, &psi).unwrap();
        assert_eq!(label(&v.status), want, "{a} / {b}");
        if let Some(w) = v.witness() {
            assert!(oracle_accepts(w, &phi, &psi, true));
        }
    }
}
