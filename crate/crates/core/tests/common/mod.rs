//! Brute-force oracles for the integration tests. Models are only read
//! through `Frame::has_edge`, `Model::holds` and `Model::len`; nothing here
//! calls the library's semantics.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use iepkit::{Formula, Frame, Model, Signature};

/// Extension of `f`, bottom-up.
pub fn ext(m: &Model, f: &Formula) -> Vec<bool> {
    let n = m.len();
    match f {
        Formula::False => vec![false; n],
        Formula::True => vec![true; n],
        Formula::Var(v) => (0..n).map(|x| m.holds(v, x).expect("variable in signature")).collect(),
        Formula::Not(g) => ext(m, g).into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => ext(m, a).into_iter().zip(ext(m, b)).map(|(x, y)| x && y).collect(),
        Formula::Diamond(g) => {
            let e = ext(m, g);
            (0..n).map(|x| (0..n).any(|y| m.frame().has_edge(x, y) && e[y])).collect()
        }
    }
}

pub fn eval(m: &Model, x: usize, f: &Formula) -> bool {
    ext(m, f)[x]
}

pub fn weakly_transitive(f: &Frame) -> bool {
    let n = f.len();
    (0..n).all(|x| {
        (0..n).all(|y| !f.has_edge(x, y) || (0..n).all(|z| !f.has_edge(y, z) || x == z || f.has_edge(x, z)))
    })
}

/// Every other point is reachable from `r`.
pub fn rooted(f: &Frame, r: usize) -> bool {
    let n = f.len();
    let mut seen = vec![false; n];
    let mut stack = vec![r];
    while let Some(x) = stack.pop() {
        for y in 0..n {
            if f.has_edge(x, y) && !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    (0..n).all(|y| y == r || seen[y])
}

/// A single cluster: `x ≠ y` always related.
pub fn dl_cluster(f: &Frame) -> bool {
    let n = f.len();
    (0..n).all(|x| (0..n).all(|y| x == y || f.has_edge(x, y)))
}

fn atoms(m: &Model, x: usize, rho: &Signature) -> Vec<bool> {
    rho.iter().map(|v| m.holds(v, x).expect("variable in signature")).collect()
}

/// Largest ρ-bisimulation by Kleene iteration from the full atom-agreement
/// relation, rebuilding the whole relation every round.
pub fn naive_bisim(m1: &Model, m2: &Model, rho: &Signature) -> Vec<Vec<bool>> {
    let (n1, n2) = (m1.len(), m2.len());
    let mut z: Vec<Vec<bool>> =
        (0..n1).map(|x| (0..n2).map(|y| atoms(m1, x, rho) == atoms(m2, y, rho)).collect()).collect();
    loop {
        let next: Vec<Vec<bool>> = (0..n1)
            .map(|x| {
                (0..n2)
                    .map(|y| {
                        z[x][y]
                            && (0..n1).all(|x2| {
                                !m1.frame().has_edge(x, x2) || (0..n2).any(|y2| m2.frame().has_edge(y, y2) && z[x2][y2])
                            })
                            && (0..n2).all(|y2| {
                                !m2.frame().has_edge(y, y2) || (0..n1).any(|x2| m1.frame().has_edge(x, x2) && z[x2][y2])
                            })
                    })
                    .collect()
            })
            .collect();
        if next == z {
            return z;
        }
        z = next;
    }
}

/// Blocks of points satisfying the same ρ-formulas, found through definable
/// sets alone: start from the atoms and keep splitting by `◇S` for every
/// union `S` of current blocks. Needs at most 16 worlds.
pub fn definable_blocks(m: &Model, rho: &Signature) -> Vec<usize> {
    let n = m.len();
    assert!(n <= 16);
    let mut block: Vec<usize> = renumber(&(0..n).map(|x| atoms(m, x, rho)).collect::<Vec<_>>());
    loop {
        let k = block.iter().max().map_or(0, |b| b + 1);
        let mut sig: Vec<Vec<bool>> = vec![Vec::new(); n];
        for s in 0u32..(1 << k) {
            let dia = diamond_of_union(m, &block, s);
            for x in 0..n {
                sig[x].push(dia & (1 << x) != 0);
            }
        }
        let refined: Vec<(usize, Vec<bool>)> = (0..n).map(|x| (block[x], sig[x].clone())).collect();
        let next = renumber(&refined);
        let k2 = next.iter().max().map_or(0, |b| b + 1);
        if k2 == k {
            return next;
        }
        block = next;
    }
}

fn renumber<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    keys.iter()
        .map(|k| {
            let len = ids.len();
            *ids.entry(k.clone()).or_insert(len)
        })
        .collect()
}

/// `◇S` as a bit mask, for `S` the union of the blocks chosen by `which`.
fn diamond_of_union(m: &Model, block: &[usize], which: u32) -> u32 {
    let n = m.len();
    let mut out = 0;
    for x in 0..n {
        if (0..n).any(|y| m.frame().has_edge(x, y) && which & (1 << block[y]) != 0) {
            out |= 1 << x;
        }
    }
    out
}

/// Whether the ρ-type `t` of `x` satisfies `◇t ⊆ t`: every definable set
/// containing `x` also has `x` in its `◇`.
pub fn diamond_type_closed(m: &Model, rho: &Signature, x: usize) -> bool {
    let block = definable_blocks(m, rho);
    let k = block.iter().max().map_or(0, |b| b + 1);
    (0u32..(1 << k))
        .filter(|s| s & (1 << block[x]) != 0)
        .all(|s| diamond_of_union(m, &block, s) & (1 << x) != 0)
}

/// Every weakly transitive frame on `n` worlds, as edge masks.
pub fn wt_frames(n: usize) -> Vec<Frame> {
    let mut out = Vec::new();
    for mask in 0u64..(1 << (n * n)) {
        let edges = (0..n * n).filter(|i| mask & (1 << i) != 0).map(|i| (i / n, i % n));
        let f = Frame::from_edges(n, edges).unwrap();
        if weakly_transitive(&f) {
            out.push(f);
        }
    }
    out
}

/// Whether `f` holds at world 0 of some rooted weakly transitive model of at
/// most `max` worlds.
pub fn wk4_sat_small(f: &Formula, max: usize) -> bool {
    let sig = f.signature();
    let vars: Vec<String> = sig.iter().map(str::to_string).collect();
    (1..=max).any(|n| {
        wt_frames(n).into_iter().filter(|fr| rooted(fr, 0)).any(|fr| {
            (0u64..(1 << (n * vars.len()))).any(|val| {
                let mut m = Model::new(fr.clone(), sig.clone());
                for (i, v) in vars.iter().enumerate() {
                    for x in 0..n {
                        m.set(v, x, val & (1 << (i * n + x)) != 0).unwrap();
                    }
                }
                eval(&m, 0, f)
            })
        })
    })
}

/// Isomorphism of two models over a common signature, by trying every
/// bijection.
pub fn isomorphic(a: &Model, b: &Model, sig: &Signature) -> bool {
    let n = a.len();
    if n != b.len() || a.frame().num_edges() != b.frame().num_edges() {
        return false;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut |p| {
        (0..n).all(|x| sig.iter().all(|v| a.holds(v, x).unwrap() == b.holds(v, p[x]).unwrap()))
            && (0..n).all(|x| (0..n).all(|y| a.frame().has_edge(x, y) == b.frame().has_edge(p[x], p[y])))
    })
}

fn permutations(p: &mut Vec<usize>, i: usize, test: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if i == p.len() {
        return test(p);
    }
    for j in i..p.len() {
        p.swap(i, j);
        if permutations(p, i + 1, test) {
            p.swap(i, j);
            return true;
        }
        p.swap(i, j);
    }
    false
}

/// All formulas over `vars` with `⊤, ⊥, ¬, ∧, ◇` of tree size exactly `size`.
pub fn formulas_of_size(vars: &[&str], size: usize) -> Vec<Formula> {
    let mut table: Vec<Vec<Formula>> = vec![vec![]];
    for s in 1..=size {
        let mut fs = Vec::new();
        if s == 1 {
            fs.push(Formula::True);
            fs.push(Formula::False);
            fs.extend(vars.iter().map(|v| Formula::var(*v)));
        } else {
            for g in &table[s - 1] {
                fs.push(Formula::not(g.clone()));
                fs.push(Formula::diamond(g.clone()));
            }
            for l in 1..s - 1 {
                for a in &table[l] {
                    for b in &table[s - 1 - l] {
                        fs.push(Formula::and(a.clone(), b.clone()));
                    }
                }
            }
        }
        table.push(fs);
    }
    table.swap_remove(size)
}

pub fn formulas_up_to(vars: &[&str], size: usize) -> Vec<Formula> {
    (1..=size).flat_map(|s| formulas_of_size(vars, s)).collect()
}

// ---- single clusters, described by how often each world kind occurs ----

/// World kinds are `2·valuation + reflexive`; a valuation is a bit mask over
/// an ordered variable list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    /// Kinds with at least one point.
    pub present: u32,
    /// Kinds whose points see a point of the same kind: reflexive kinds, and
    /// irreflexive kinds occurring at least twice.
    pub selfok: u32,
}

/// Calls `visit(shape, points)` for every cluster with at most `irr_cap`
/// irreflexive and `refl_cap` reflexive points per valuation. Empty
/// clusters are left out.
pub fn for_each_shape(num_vals: usize, irr_cap: usize, refl_cap: usize, mut visit: impl FnMut(Shape, usize)) {
    let kinds = 2 * num_vals;
    assert!(kinds <= 32);
    let mut counts = vec![0usize; kinds];
    loop {
        let total: usize = counts.iter().sum();
        if total > 0 {
            let mut s = Shape { present: 0, selfok: 0 };
            for (k, &c) in counts.iter().enumerate() {
                if c > 0 {
                    s.present |= 1 << k;
                    if k & 1 == 1 || c >= 2 {
                        s.selfok |= 1 << k;
                    }
                }
            }
            visit(s, total);
        }
        let mut k = 0;
        loop {
            if k == kinds {
                return;
            }
            let cap = if k & 1 == 1 { refl_cap } else { irr_cap };
            if counts[k] < cap {
                counts[k] += 1;
                break;
            }
            counts[k] = 0;
            k += 1;
        }
    }
}

/// Distinct shapes of [`for_each_shape`] with their smallest size.
pub fn shapes(num_vals: usize, irr_cap: usize, refl_cap: usize) -> BTreeMap<Shape, usize> {
    let mut out = BTreeMap::new();
    for_each_shape(num_vals, irr_cap, refl_cap, |s, total| {
        let e = out.entry(s).or_insert(total);
        *e = (*e).min(total);
    });
    out
}

/// Kinds whose valuation has bit `i`.
fn var_kinds(i: usize) -> u32 {
    [0xCCCC_CCCC, 0xF0F0_F0F0, 0xFF00_FF00, 0xFFFF_0000][i]
}

/// Kinds of `s` at which `f` holds, given the variable order.
pub fn shape_ext(s: Shape, f: &Formula, vars: &[&str]) -> u32 {
    match f {
        Formula::False => 0,
        Formula::True => s.present,
        Formula::Var(v) => {
            let i = vars.iter().position(|w| w == v).expect("variable in order");
            s.present & var_kinds(i)
        }
        Formula::Not(g) => s.present & !shape_ext(s, g, vars),
        Formula::And(a, b) => shape_ext(s, a, vars) & shape_ext(s, b, vars),
        Formula::Diamond(g) => {
            let e = shape_ext(s, g, vars);
            match e.count_ones() {
                0 => 0,
                1 => {
                    let own = if s.selfok & e != 0 { e } else { 0 };
                    (s.present & !e) | own
                }
                _ => s.present,
            }
        }
    }
}

/// The model of a shape with one point per present kind, plus a second
/// point for irreflexive kinds that need one.
pub fn shape_model(s: Shape, vars: &[&str]) -> Model {
    let mut kinds = Vec::new();
    for k in 0..32 {
        if s.present & (1 << k) != 0 {
            kinds.push(k);
            if k & 1 == 0 && s.selfok & (1 << k) != 0 {
                kinds.push(k);
            }
        }
    }
    let n = kinds.len();
    let mut f = Frame::difference(n);
    for (x, &k) in kinds.iter().enumerate() {
        if k & 1 == 1 {
            f.add_edge(x, x);
        }
    }
    let mut m = Model::new(f, vars.iter().copied().collect());
    for (x, &k) in kinds.iter().enumerate() {
        for (i, v) in vars.iter().enumerate() {
            m.set(v, x, (k >> 1) & (1 << i) != 0).unwrap();
        }
    }
    m
}

/// Canonical ρ-bisimulation invariant of every present kind of `s`, as a
/// small integer. `rho` lists positions into the variable order.
///
/// The quotient of a cluster by bisimilarity is again a cluster, with
/// distinct classes always related, so it is fixed by the set of its class
/// keys `(ρ-valuation, self-loop)`; the invariant is that set plus the key
/// of the root's class.
pub fn shape_invariants(s: Shape, rho: &[usize]) -> BTreeMap<usize, u64> {
    let present: Vec<usize> = (0..32).filter(|k| s.present & (1 << k) != 0).collect();
    let rval = |k: usize| rho.iter().enumerate().fold(0usize, |a, (j, &i)| a | ((((k >> 1) >> i) & 1) << j));
    let sees = |a: usize, b: usize| a != b || s.selfok & (1 << a) != 0;
    let mut class: BTreeMap<usize, usize> = present.iter().map(|&k| (k, rval(k))).collect();
    let mut count = class.values().collect::<BTreeSet<_>>().len();
    loop {
        let keys: Vec<(usize, BTreeSet<usize>)> = present
            .iter()
            .map(|&k| (class[&k], present.iter().filter(|&&l| sees(k, l)).map(|l| class[l]).collect()))
            .collect();
        let ids = renumber(&keys);
        let next: BTreeMap<usize, usize> = present.iter().copied().zip(ids).collect();
        let c2 = next.values().collect::<BTreeSet<_>>().len();
        class = next;
        if c2 == count {
            break;
        }
        count = c2;
    }
    let mut key_of_class: BTreeMap<usize, usize> = BTreeMap::new();
    for &k in &present {
        let looped = present.iter().any(|&l| class[&l] == class[&k] && sees(k, l));
        let key = 2 * rval(k) + looped as usize;
        if let Some(&old) = key_of_class.get(&class[&k]) {
            assert_eq!(old, key, "class keys are stable");
        }
        key_of_class.insert(class[&k], key);
    }
    let keys: BTreeSet<usize> = key_of_class.values().copied().collect();
    assert_eq!(keys.len(), key_of_class.len(), "distinct classes of a minimal cluster have distinct keys");
    let keyset: u64 = keys.iter().fold(0, |a, &k| a | 1 << k);
    present.iter().map(|&k| (k, (keyset << 6) | key_of_class[&class[&k]] as u64)).collect()
}

/// Filtration facts re-checked with the oracles above: `R†` weakly
/// transitive, `R` edges preserved, every closure member true at `x` iff at
/// `w(x)`, `β†` inside the largest ρ-bisimulation on `𝔐†`, and bisimilar
/// designated points mapped into `β†`.
pub fn filtration_oracle_failures(m: &Model, f: &iepkit::Filtration) -> Vec<String> {
    let mut out = Vec::new();
    let dag = &f.model;
    if !weakly_transitive(dag.frame()) {
        out.push("R† not weakly transitive".to_string());
    }
    for x in 0..m.len() {
        for y in 0..m.len() {
            if m.frame().has_edge(x, y) && !dag.frame().has_edge(f.map[x], f.map[y]) {
                out.push(format!("edge {x} -> {y} lost"));
            }
        }
    }
    for chi in f.closure.members() {
        let (a, b) = (ext(m, &chi), ext(dag, &chi));
        for x in 0..m.len() {
            if a[x] != b[f.map[x]] {
                out.push(format!("{chi} differs at {x}"));
            }
        }
    }
    let max = naive_bisim(dag, dag, &f.rho);
    for (i, j) in f.beta.pairs() {
        if !max[i][j] {
            out.push(format!("β† relates {i}, {j}"));
        }
    }
    let (rp, rq) = f.input_designated;
    if naive_bisim(m, m, &f.rho)[rp][rq] && !f.beta.contains(f.map[rp], f.map[rq]) {
        out.push("designated points lost".to_string());
    }
    out
}

/// Raw DL interpolant existence over every cluster shape: `not-valid` if
/// some pointed cluster satisfies `φ ∧ ¬ψ`, `no-interpolant` if a pointed
/// cluster of `φ` and one of `¬ψ` share their ρ-invariant, otherwise
/// `has-interpolant`.
pub struct DlIepOracle {
    pub vars: Vec<&'static str>,
    pub shapes: Vec<Shape>,
    masks: std::collections::HashMap<Formula, Vec<u32>>,
    invariants: std::collections::HashMap<Vec<usize>, Vec<BTreeMap<usize, u64>>>,
}

impl DlIepOracle {
    /// Up to 3 irreflexive and 2 reflexive points per valuation.
    pub fn new(vars: &[&'static str]) -> DlIepOracle {
        DlIepOracle {
            vars: vars.to_vec(),
            shapes: shapes(1 << vars.len(), 3, 2).into_keys().collect(),
            masks: Default::default(),
            invariants: Default::default(),
        }
    }

    /// Largest cluster the shape enumeration stands for.
    pub fn max_points(&self) -> usize {
        (1 << self.vars.len()) * 5
    }

    fn masks(&mut self, f: &Formula) -> Vec<u32> {
        if let Some(m) = self.masks.get(f) {
            return m.clone();
        }
        let m: Vec<u32> = self.shapes.iter().map(|&s| shape_ext(s, f, &self.vars)).collect();
        self.masks.insert(f.clone(), m.clone());
        m
    }

    fn invariant_set(&mut self, masks: &[u32], rho: &[usize]) -> BTreeSet<u64> {
        if !self.invariants.contains_key(rho) {
            let inv = self.shapes.iter().map(|&s| shape_invariants(s, rho)).collect();
            self.invariants.insert(rho.to_vec(), inv);
        }
        let inv = &self.invariants[rho];
        let mut out = BTreeSet::new();
        for (i, &m) in masks.iter().enumerate() {
            for (k, &id) in &inv[i] {
                if m & (1 << k) != 0 {
                    out.insert(id);
                }
            }
        }
        out
    }

    pub fn verdict(&mut self, phi: &Formula, psi: &Formula) -> &'static str {
        let mp = self.masks(phi);
        let mq: Vec<u32> = self.masks(psi).iter().zip(&self.shapes).map(|(m, s)| s.present & !m).collect();
        if mp.iter().zip(&mq).any(|(a, b)| a & b != 0) {
            return "not-valid";
        }
        let shared: BTreeSet<String> = phi
            .signature()
            .iter()
            .filter(|v| psi.signature().contains(v))
            .map(str::to_string)
            .collect();
        let rho: Vec<usize> =
            (0..self.vars.len()).filter(|&i| shared.contains(self.vars[i])).collect();
        let a = self.invariant_set(&mp, &rho);
        let b = self.invariant_set(&mq, &rho);
        if a.intersection(&b).next().is_some() {
            "no-interpolant"
        } else {
            "has-interpolant"
        }
    }
}

/// Smallest cluster satisfying `f` somewhere, over every cluster with at
/// most two irreflexive and one reflexive point per valuation (enough: a
/// third irreflexive or second reflexive copy never changes truth).
pub fn dl_min_model(f: &Formula, vars: &[&str]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for_each_shape(1 << vars.len(), 2, 1, |s, total| {
        if best.is_none_or(|b| total < b) && shape_ext(s, f, vars) != 0 {
            best = Some(total);
        }
    });
    best
}

/// Distinct `◇`-subformulas once double negations are gone.
pub fn diamond_count(f: &Formula) -> usize {
    fn walk(f: &Formula, out: &mut BTreeSet<Formula>) {
        match f {
            Formula::Diamond(g) => {
                out.insert(f.clone());
                walk(g, out);
            }
            Formula::Not(g) => walk(g, out),
            Formula::And(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    walk(&f.normalize(), &mut out);
    out.len()
}

/// Hand-picked `n = 1` tiling instances with a 2×2 torus solution.
pub const SOLVABLE_TILINGS: [&str; 5] = [
    r#"{"tiles":["t0"],"h":[["t0","t0"]],"v":[["t0","t0"]],"init":["t0"],"n":1}"#,
    r#"{"tiles":["a","b"],"h":[["a","b"],["b","a"]],"v":[["a","b"],["b","a"]],"init":["a"],"n":1}"#,
    r#"{"tiles":["a","b"],"h":[["a","a"],["a","b"],["b","a"],["b","b"]],"v":[["a","a"],["a","b"],["b","a"],["b","b"]],"init":["a","b"],"n":1}"#,
    r#"{"tiles":["a","b"],"h":[["a","b"],["b","a"]],"v":[["a","a"],["b","b"]],"init":["b","a"],"n":1}"#,
    r#"{"tiles":["a","b","c"],"h":[["a","b"],["b","a"],["c","c"]],"v":[["a","c"],["c","a"],["b","c"],["c","b"]],"init":["a"],"n":1}"#,
];

/// Hand-picked `n = 1` instances without one.
pub const UNSOLVABLE_TILINGS: [&str; 5] = [
    r#"{"tiles":["a","b"],"n":1}"#,
    r#"{"tiles":["t0"],"v":[["t0","t0"]],"n":1}"#,
    r#"{"tiles":["a","b"],"h":[["a","a"],["b","b"]],"v":[["a","a"],["b","b"]],"init":["a","b"],"n":1}"#,
    r#"{"tiles":["a","b","c"],"h":[["a","b"],["b","c"],["c","a"]],"v":[["a","a"],["b","b"],["c","c"]],"n":1}"#,
    r#"{"tiles":["a","b"],"h":[["a","a"],["a","b"],["b","a"],["b","b"]],"v":[["a","a"]],"init":["b"],"n":1}"#,
];

/// Whether some assignment of tiles to the `side × side` torus matches.
pub fn tiling_solvable(inst: &iepkit::TilingInstance) -> bool {
    let side = 1usize << inst.n;
    let k = inst.tiles.len();
    let cells = side * side;
    let id = |t: &str| inst.tiles.iter().position(|u| u == t).unwrap();
    let h: BTreeSet<(usize, usize)> = inst.h.iter().map(|[a, b]| (id(a), id(b))).collect();
    let v: BTreeSet<(usize, usize)> = inst.v.iter().map(|[a, b]| (id(a), id(b))).collect();
    let init: Vec<usize> = inst.init.iter().map(|t| id(t)).collect();
    let mut cell = vec![0usize; cells];
    loop {
        let at = |i: usize, j: usize| cell[(j % side) * side + (i % side)];
        let ok = init.iter().enumerate().all(|(i, &t)| cell[i] == t)
            && (0..side).all(|i| {
                (0..side).all(|j| h.contains(&(at(i, j), at(i + 1, j))) && v.contains(&(at(i, j), at(i, j + 1))))
            });
        if ok {
            return true;
        }
        let mut c = 0;
        loop {
            if c == cells {
                return false;
            }
            cell[c] += 1;
            if cell[c] < k {
                break;
            }
            cell[c] = 0;
            c += 1;
        }
    }
}
