//! Checkers for the facts a filtration must satisfy. Each returns the list
//! of violations found; an empty list means the property holds.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{arrow, filtration_report, find_rho_maximal_successor, rho_maximal, Filtration};
use crate::bisim::{maximal_bisimulation, verify_bisimulation};
use crate::bits::BitSet;
use crate::kripke::{closure_types, is_weakly_transitive, Model};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub property: &'static str,
    pub detail: String,
}

fn push(out: &mut Vec<Violation>, property: &'static str, detail: String) {
    out.push(Violation { property, detail });
}

/// Runs every check against the input model `m` the filtration was built from.
pub fn check_all(m: &Model, f: &Filtration) -> Vec<Violation> {
    let mut out = Vec::new();
    check_equivalence(m, f, &mut out);
    check_abstract_closure(f, &mut out);
    check_transitivity(f, &mut out);
    check_edges(m, f, &mut out);
    check_irr(m, f, &mut out);
    check_dagger_model(m, f, &mut out);
    if !filtration_report(f).within_bounds {
        push(&mut out, "size bound", format!("{:?}", filtration_report(f)));
    }
    out
}

/// `T_[C] = t^ρ(D)` for ρ-maximal `D ∈ [C]`, the `AT` domains, and the
/// existence of ρ-maximal successors, and that every cluster-type is
/// dominated by that of a ρ-maximal cluster in its class.
pub fn check_equivalence(m: &Model, f: &Filtration, out: &mut Vec<Violation>) {
    let eq = &f.equivalence;
    let cd = &eq.clusters;
    for e in 0..eq.num_classes() {
        let atoms: BTreeSet<BitSet> = eq.types[e]
            .iter()
            .map(|&t| eq.atom_of[eq.rho.members(t).next().expect("nonempty")].clone())
            .collect();
        if atoms != eq.atoms[e] {
            push(out, "AT domain", format!("class {e}"));
        }
        for &d in &eq.members[e] {
            if rho_maximal(m, eq, d) && eq.cluster_types(d) != eq.types[e] {
                push(out, "rho-clusters", format!("class {e}, maximal cluster {d}"));
            }
        }
    }
    for c in 0..cd.num_clusters() {
        match find_rho_maximal_successor(m, eq, c) {
            Err(e) => push(out, "rho-maximal successor", e.to_string()),
            Ok(d) => {
                if !cd.below_or_equal(c, d) || !eq.cluster_types(c).is_subset(&eq.cluster_types(d)) {
                    push(out, "rho-maximal successor", format!("{c} -> {d}"));
                }
            }
        }
        let e = eq.class_of[c];
        let tau = f.cluster_type_of[c];
        let ok = eq.members[e]
            .iter()
            .any(|&d| rho_maximal(m, eq, d) && (d == c || f.ct_arrow[tau][f.cluster_type_of[d]]));
        if !ok {
            push(out, "maximal cover", format!("cluster {c}"));
        }
        if rho_maximal(m, eq, c) && f.cluster_types[tau].map.values().any(BTreeSet::is_empty) {
            push(out, "maximal cluster-type", format!("cluster {c} has an empty value"));
        }
    }
}

/// Every `(𝒕, a, τ, M)` with `τ ∈ M`, `a ∈ dom M`, `𝒕 ∈ τ(a)` is a world.
pub fn check_abstract_closure(f: &Filtration, out: &mut Vec<Violation>) {
    let have: BTreeSet<_> = f.worlds.iter().collect();
    for (mi, mo) in f.mosaics.iter().enumerate() {
        for &tau in &mo.cluster_types {
            for (a, ts) in &f.cluster_types[tau].map {
                if !mo.domain.contains(a) {
                    push(out, "world closure", format!("mosaic {mi}: cluster-type {tau} has a foreign domain"));
                }
                for t in ts {
                    let w = super::DagWorld {
                        t: t.clone(),
                        a: a.clone(),
                        tau,
                        mosaic: mi,
                    };
                    if !have.contains(&w) {
                        push(out, "world closure", format!("missing quadruple {w:?}"));
                    }
                }
            }
        }
    }
}

/// `↠` is transitive on types, cluster-types and mosaics.
pub fn check_transitivity(f: &Filtration, out: &mut Vec<Violation>) {
    let types: Vec<&BitSet> = f.types.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let ta: Vec<Vec<bool>> = types
        .iter()
        .map(|a| types.iter().map(|b| arrow(&f.closure, a, b)).collect())
        .collect();
    for (name, rel) in [("transitivity of types", &ta), ("transitivity of cluster-types", &f.ct_arrow), ("transitivity of mosaics", &f.m_arrow)] {
        let n = rel.len();
        for i in 0..n {
            for j in 0..n {
                if !rel[i][j] {
                    continue;
                }
                for k in 0..n {
                    if rel[j][k] && !rel[i][k] {
                        push(out, name, format!("{i} -> {j} -> {k}"));
                    }
                }
            }
        }
    }
}

/// `↠` along the edges of the input, for types, cluster-types and mosaics.
pub fn check_edges(m: &Model, f: &Filtration, out: &mut Vec<Violation>) {
    let eq = &f.equivalence;
    let cd = &eq.clusters;
    for (x, y) in m.frame().edges() {
        let (cx, cy) = (cd.cluster_of(x), cd.cluster_of(y));
        // inside a cluster `y` may owe its ◇χ to `x` alone (the two-point
        // cluster with an irreflexive root already does), so this is only
        // claimed across clusters and between points of equal type
        let claimed = cx != cy || f.types[x] == f.types[y];
        if claimed && !arrow(&f.closure, &f.types[x], &f.types[y]) {
            push(out, "edge types", format!("{x} R {y}"));
        }
        if cx != cy && !f.ct_arrow[f.cluster_type_of[cx]][f.cluster_type_of[cy]] {
            push(out, "edge cluster-types", format!("C({x}) R C({y})"));
        }
        let (ex, ey) = (eq.class_of[cx], eq.class_of[cy]);
        if ex != ey && !f.m_arrow[f.mosaic_of_class[ex]][f.mosaic_of_class[ey]] {
            push(out, "edge mosaics", format!("{x} R {y}"));
        }
    }
}

/// Points with an `irr` atom: at most one per cluster-type of the mosaic,
/// and none in clusters that are not ρ-maximal.
pub fn check_irr(m: &Model, f: &Filtration, out: &mut Vec<Violation>) {
    for (mi, mo) in f.mosaics.iter().enumerate() {
        for &tau in &mo.cluster_types {
            for a in &f.irr[mi] {
                if f.cluster_types[tau].get(a).is_some_and(|ts| ts.len() > 1) {
                    push(out, "irr singleton", format!("mosaic {mi}, cluster-type {tau}"));
                }
            }
        }
    }
    let eq = &f.equivalence;
    for c in 0..eq.clusters.num_clusters() {
        if rho_maximal(m, eq, c) {
            continue;
        }
        let mi = f.mosaic_of_class[eq.class_of[c]];
        let tau = &f.cluster_types[f.cluster_type_of[c]];
        if f.irr[mi].iter().any(|a| tau.get(a).is_some_and(|ts| !ts.is_empty())) {
            push(out, "irr outside maximal", format!("cluster {c}"));
        }
    }
}

/// Facts about the result: weak transitivity, edge preservation, that
/// types are maximal and true, and that `β†` relates the designated images.
pub fn check_dagger_model(m: &Model, f: &Filtration, out: &mut Vec<Violation>) {
    let fr = f.model.frame();
    if !is_weakly_transitive(fr) {
        push(out, "weak transitivity", "R† is not weakly transitive".into());
    }
    for (x, y) in m.frame().edges() {
        if !fr.has_edge(f.map[x], f.map[y]) {
            push(out, "edge preservation", format!("{x} R {y}"));
        }
    }
    let cl = &f.closure;
    for (i, j) in fr.edges() {
        let (t, u) = (&f.worlds[i].t, &f.worlds[j].t);
        for &d in cl.diamond_pairs() {
            let crate::formula::PairNode::Diamond(chi) = cl.node(d) else {
                unreachable!()
            };
            if chi.holds_in(u) && !t.contains(d) {
                push(out, "type maximality", format!("w{i} R† w{j}, pair {d}"));
            }
        }
    }
    match closure_types(&f.model, cl) {
        Ok(actual) => {
            for (i, w) in f.worlds.iter().enumerate() {
                if actual[i] != w.t {
                    push(out, "truth", format!("w{i}: {:?} vs {:?}", actual[i], w.t));
                }
            }
        }
        Err(e) => push(out, "truth", e.to_string()),
    }
    let (rp, rq) = f.input_designated;
    let (dp, dq) = f.designated;
    let phi = cl.phi_literal();
    let psi = cl.psi_literal();
    if phi.holds_in(&f.types[rp]) != phi.holds_in(&f.worlds[dp].t) || psi.holds_in(&f.types[rq]) != psi.holds_in(&f.worlds[dq].t) {
        push(out, "designated truth", "designated images disagree on φ or ψ".into());
    }
    match verify_bisimulation(&f.model, &f.model, &f.rho, &f.beta) {
        Ok(true) => {}
        Ok(false) => push(out, "dagger bisimulation", "β† is not a ρ-bisimulation".into()),
        Err(e) => push(out, "dagger bisimulation", e.to_string()),
    }
    match maximal_bisimulation(m, m, &f.rho) {
        Ok(max) if max.contains(rp, rq) && !f.beta.contains(dp, dq) => {
            push(out, "dagger bisimulation", "designated images not related by β†".into())
        }
        Ok(_) => {}
        Err(e) => push(out, "dagger bisimulation", e.to_string()),
    }
}
