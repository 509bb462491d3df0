//! The small models and formulas used throughout the tests, the CLI
//! examples and the acceptance suite.
//!
//! Pictures use `•` for irreflexive and `∘` for reflexive points.

use crate::formula::{parse, Formula, Signature};
use crate::kripke::{Frame, Model};

fn model(n: usize, edges: &[(usize, usize)], sig: &[&str], val: &[(&str, &[usize])]) -> Model {
    let frame = Frame::from_edges(n, edges.iter().copied()).expect("fixture edges in range");
    let mut m = Model::new(frame, sig.iter().copied().collect::<Signature>());
    for (v, xs) in val {
        for &x in xs.iter() {
            m.set(v, x, true).expect("fixture valuation in range");
        }
    }
    m
}

/// `φ = ◇◇p ∧ ¬◇p`, `ψ = ◇◇¬q ∨ q`.
pub fn wk4_gap_formulas() -> (Formula, Formula) {
    (parse("<><>p & ~<>p").unwrap(), parse("<><>~q | q").unwrap())
}

/// Two-point cluster: `r_φ = 0` (•, p) and `x₁ = 1` (∘, ¬p). Root 0.
pub fn wk4_gap_phi_model() -> (Model, usize) {
    (model(2, &[(0, 1), (1, 0), (1, 1)], &["p"], &[("p", &[0])]), 0)
}

/// `r_ψ = 0` (•, ¬q) sees `x₂ = 1` (∘, q). Root 0.
pub fn wk4_gap_psi_model() -> (Model, usize) {
    (model(2, &[(0, 1), (1, 1)], &["q"], &[("q", &[1])]), 0)
}

/// Disjoint union of the two models above: worlds `r_φ, x₁, r_ψ, x₂`.
/// Returns the model with `r_φ` and `r_ψ`.
pub fn wk4_gap_union() -> (Model, usize, usize) {
    let (a, _) = wk4_gap_phi_model();
    let (b, _) = wk4_gap_psi_model();
    (a.disjoint_union(&b), 0, 2)
}

/// `φ = ◇◇p ∧ ¬◇p ∧ ¬◇◇◇p`,
/// `ψ = ◇◇s ∧ ¬◇s → ¬(◇(q ∧ ◇s) ∧ ◇(¬q ∧ ◇s))`.
pub fn dl_gap_formulas() -> (Formula, Formula) {
    (
        parse("<><>p & ~<>p & ~<><><>p").unwrap(),
        parse("<><>s & ~<>s -> ~(<>(q & <>s) & <>(~q & <>s))").unwrap(),
    )
}

/// Irreflexive two-point cluster, `p` at the root only.
pub fn dl_gap_phi_model() -> (Model, usize) {
    (model(2, &[(0, 1), (1, 0)], &["p"], &[("p", &[0])]), 0)
}

/// Irreflexive three-point cluster: root `s`, then `¬s,q` and `¬s,¬q`.
pub fn dl_gap_psi_model() -> (Model, usize) {
    let edges: Vec<_> = (0..3).flat_map(|x| (0..3).filter(move |&y| y != x).map(move |y| (x, y))).collect();
    (model(3, &edges, &["q", "s"], &[("s", &[0]), ("q", &[1])]), 0)
}

/// `φ = p ∧ ¬◇q`, `ψ = ¬p ∧ ◇r`, shared signature `{p}`.
pub fn irr_formulas() -> (Formula, Formula) {
    (parse("p & ~<>q").unwrap(), parse("~p & <>r").unwrap())
}

/// `x = 0` (p, r) → `x′ = 1`; `y = 2` (p) → `y′ = 3` (q); all irreflexive.
/// Returns the model with `(x, y)`.
pub fn irr_model() -> (Model, (usize, usize)) {
    (
        model(4, &[(0, 1), (2, 3)], &["p", "q", "r"], &[("p", &[0, 2]), ("q", &[3]), ("r", &[0])]),
        (0, 2),
    )
}
