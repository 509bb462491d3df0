//! Exponential torus tilings and their reduction to interpolant
//! non-existence in wK4.
//!
//! Variables of the generated formulas are `e`, `p`, `q`, `lvl<i>`, `a<k>`,
//! `b<k>` and `tile_<id>`. Coordinates `(i, j)` are written with `i` in bits
//! `0..n` and `j` in bits `n..2n`, least significant bit first.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bisim::BisimRelation;
use crate::error::{Error, Result};
use crate::formula::{shared_signature, Formula};
use crate::iep::{decide_iep_wk4_with, witness_failures, IepStatus, IepVerdict, Wk4Options, WitnessPair};
use crate::kripke::{Frame, Model, PointedModel};
use crate::satsearch::Logic;

/// Largest exponent accepted by [`generate_formulas`].
pub const MAX_GENERATE_N: usize = 6;
/// Largest exponent accepted by [`solve_tiling`].
pub const MAX_SOLVE_N: usize = 2;

/// Tiling system `(T, H, V)` with initial row segment `init` and torus
/// side `2^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingInstance {
    pub tiles: Vec<String>,
    #[serde(default)]
    pub h: Vec<[String; 2]>,
    #[serde(default)]
    pub v: Vec<[String; 2]>,
    #[serde(default)]
    pub init: Vec<String>,
    pub n: usize,
}

fn is_tile_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl TilingInstance {
    pub fn from_json(text: &str) -> Result<TilingInstance> {
        let inst: TilingInstance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedTiling(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.n > MAX_GENERATE_N {
            return bad(format!("n = {} exceeds {MAX_GENERATE_N}", self.n));
        }
        if self.tiles.is_empty() {
            return bad("no tiles".into());
        }
        let mut seen = BTreeSet::new();
        for t in &self.tiles {
            if !is_tile_id(t) {
                return bad(format!("`{t}` is not a valid tile id"));
            }
            if !seen.insert(t) {
                return bad(format!("duplicate tile `{t}`"));
            }
        }
        for [a, b] in self.h.iter().chain(&self.v) {
            for t in [a, b] {
                if !seen.contains(t) {
                    return bad(format!("unknown tile `{t}` in a matching pair"));
                }
            }
        }
        if self.init.len() > 1 << self.n {
            return bad(format!("initial condition longer than the row length {}", 1 << self.n));
        }
        if let Some(t) = self.init.iter().find(|t| !seen.contains(t)) {
            return bad(format!("unknown tile `{t}` in the initial condition"));
        }
        Ok(())
    }

    /// Torus side `2^n`.
    pub fn side(&self) -> usize {
        1 << self.n
    }

    fn index(&self, t: &str) -> usize {
        self.tiles.iter().position(|x| x == t).expect("validated tile")
    }

    fn matches(pairs: &[[String; 2]], a: &str, b: &str) -> bool {
        pairs.iter().any(|[x, y]| x == a && y == b)
    }
}

/// `τ`, stored as `rows[j][i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSolution {
    pub rows: Vec<Vec<String>>,
}

impl TorusSolution {
    pub fn get(&self, i: usize, j: usize) -> &str {
        &self.rows[j][i]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<TorusSolution> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Checks shape, tiles, the initial condition and both matching relations.
pub fn check_solution(inst: &TilingInstance, sol: &TorusSolution) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidSolution(m));
    let s = inst.side();
    if sol.rows.len() != s || sol.rows.iter().any(|r| r.len() != s) {
        return bad(format!("expected a {s}×{s} grid"));
    }
    for j in 0..s {
        for i in 0..s {
            let t = sol.get(i, j);
            if !inst.tiles.iter().any(|x| x == t) {
                return bad(format!("unknown tile `{t}` at ({i},{j})"));
            }
            if !TilingInstance::matches(&inst.h, t, sol.get((i + 1) % s, j)) {
                return bad(format!("horizontal mismatch at ({i},{j})"));
            }
            if !TilingInstance::matches(&inst.v, t, sol.get(i, (j + 1) % s)) {
                return bad(format!("vertical mismatch at ({i},{j})"));
            }
        }
    }
    for (i, t) in inst.init.iter().enumerate() {
        if sol.get(i, 0) != t {
            return bad(format!("initial condition violated at ({i},0)"));
        }
    }
    Ok(())
}

/// First solution in row-major order with tiles tried in declaration order.
pub fn solve_tiling(inst: &TilingInstance) -> Result<Option<TorusSolution>> {
    inst.validate()?;
    if inst.n > MAX_SOLVE_N {
        return Err(Error::TilingTooLarge(inst.n));
    }
    let s = inst.side();
    let k = inst.tiles.len();
    let mut h = vec![vec![false; k]; k];
    let mut v = vec![vec![false; k]; k];
    for (rel, pairs) in [(&mut h, &inst.h), (&mut v, &inst.v)] {
        for [a, b] in pairs {
            rel[inst.index(a)][inst.index(b)] = true;
        }
    }
    let init: Vec<usize> = inst.init.iter().map(|t| inst.index(t)).collect();
    let mut grid = vec![usize::MAX; s * s];
    let fits = |grid: &[usize], cell: usize, t: usize| -> bool {
        let (i, j) = (cell % s, cell / s);
        if j == 0 && i < init.len() && init[i] != t {
            return false;
        }
        // neighbours already placed: left, above, and the wrap-around ones
        if i > 0 && !h[grid[cell - 1]][t] {
            return false;
        }
        if i == s - 1 && !h[t][grid[j * s]] {
            return false;
        }
        if j > 0 && !v[grid[cell - s]][t] {
            return false;
        }
        if j == s - 1 && !v[t][grid[i]] {
            return false;
        }
        true
    };
    fn place(grid: &mut [usize], cell: usize, k: usize, fits: &dyn Fn(&[usize], usize, usize) -> bool) -> bool {
        if cell == grid.len() {
            return true;
        }
        for t in 0..k {
            if fits(grid, cell, t) {
                grid[cell] = t;
                if place(grid, cell + 1, k, fits) {
                    return true;
                }
            }
        }
        grid[cell] = usize::MAX;
        false
    }
    if !place(&mut grid, 0, k, &fits) {
        return Ok(None);
    }
    let rows = (0..s)
        .map(|j| (0..s).map(|i| inst.tiles[grid[j * s + i]].clone()).collect())
        .collect();
    Ok(Some(TorusSolution { rows }))
}

fn var(s: impl Into<String>) -> Formula {
    Formula::var(s)
}

fn tile(t: &str) -> Formula {
    var(format!("tile_{t}"))
}

fn lvl(i: usize) -> Formula {
    var(format!("lvl{i}"))
}

fn a(k: usize) -> Formula {
    var(format!("a{k}"))
}

fn b(k: usize) -> Formula {
    var(format!("b{k}"))
}

fn lit(f: Formula, positive: bool) -> Formula {
    if positive {
        f
    } else {
        Formula::not(f)
    }
}

/// `[x=(i,j)]` over the bit variables `bit(0..2n)`.
fn coords(n: usize, bit: fn(usize) -> Formula, i: usize, j: usize) -> Formula {
    Formula::conj((0..2 * n).map(|k| {
        let on = if k < n { i >> k & 1 == 1 } else { j >> (k - n) & 1 == 1 };
        lit(bit(k), on)
    }))
}

pub fn b_equals(n: usize, i: usize, j: usize) -> Formula {
    coords(n, b, i, j)
}

pub fn a_equals(n: usize, i: usize, j: usize) -> Formula {
    coords(n, a, i, j)
}

/// `b = a ⊕ 1` on bits `lo..hi`, with bits outside the range equal.
fn succ(n: usize, lo: usize, hi: usize) -> Formula {
    let carry = (lo..hi).map(|m| {
        Formula::conj(
            [b(m), Formula::not(a(m))]
                .into_iter()
                .chain((lo..m).map(|k| Formula::and(Formula::not(b(k)), a(k))))
                .chain((m + 1..hi).map(|k| Formula::iff(b(k), a(k)))),
        )
    });
    let wrap = Formula::conj((lo..hi).map(|m| Formula::and(Formula::not(b(m)), a(m))));
    let rest = Formula::conj((0..2 * n).filter(|k| !(lo..hi).contains(k)).map(|k| Formula::iff(b(k), a(k))));
    Formula::and(Formula::disj(carry.chain([wrap])), rest)
}

pub fn succ_x(n: usize) -> Formula {
    succ(n, 0, n)
}

pub fn succ_y(n: usize) -> Formula {
    succ(n, n, 2 * n)
}

pub fn grid(n: usize) -> Formula {
    Formula::conj((0..2 * n).map(|k| Formula::iff(a(k), b(k))))
}

/// `φ` and `ψ = χ → (□□q → q)` for the instance.
pub fn generate_formulas(inst: &TilingInstance) -> Result<(Formula, Formula)> {
    inst.validate()?;
    let n = inst.n;
    let two_n = 2 * n;
    let e = var("e");
    let p = var("p");
    let dia = Formula::diamond;
    let bx = Formula::boxed;
    let not = Formula::not;

    let core = Formula::conj([
        e.clone(),
        Formula::and(dia(dia(p.clone())), not(dia(p.clone()))),
        bx(Formula::implies(e.clone(), dia(p.clone()))),
    ]);
    let shared: Vec<Formula> = inst.tiles.iter().map(|t| tile(t)).chain((0..two_n).map(b)).collect();
    let phi = Formula::conj([core].into_iter().chain(shared.into_iter().map(|v| Formula::or(v.clone(), not(v)))));

    let mut chi = Vec::new();
    // the tree
    let exclusive = Formula::conj(
        (0..=two_n).flat_map(|i| (i + 1..=two_n).map(move |j| not(Formula::and(lvl(i), lvl(j))))),
    );
    chi.push(Formula::and(lvl(0), Formula::box_plus(exclusive)));
    for i in 0..two_n {
        chi.push(Formula::box_plus(Formula::implies(
            lvl(i),
            Formula::and(
                dia(Formula::and(lvl(i + 1), a(i))),
                dia(Formula::and(lvl(i + 1), not(a(i)))),
            ),
        )));
    }
    for i in 0..two_n {
        for j in i + 1..=two_n {
            for positive in [true, false] {
                chi.push(bx(Formula::implies(
                    Formula::and(lvl(i + 1), lit(a(i), positive)),
                    bx(Formula::implies(lvl(j), lit(a(i), positive))),
                )));
            }
        }
    }
    for i in 0..=two_n {
        chi.push(Formula::box_plus(Formula::implies(lvl(i), e.clone())));
    }
    // the grid below the leaves
    let leaf = lvl(two_n);
    let off = |f: Formula| Formula::and(not(e.clone()), f);
    chi.push(bx(Formula::implies(
        leaf.clone(),
        dia(off(Formula::and(grid(n), Formula::disj(inst.tiles.iter().map(|t| tile(t)))))),
    )));
    for i in 0..two_n {
        for positive in [true, false] {
            chi.push(bx(Formula::implies(
                Formula::and(leaf.clone(), lit(a(i), positive)),
                bx(Formula::implies(not(e.clone()), lit(a(i), positive))),
            )));
        }
    }
    chi.push(bx(Formula::conj(inst.tiles.iter().enumerate().flat_map(|(x, t)| {
        inst.tiles[x + 1..]
            .iter()
            .map(move |u| not(Formula::and(tile(t), tile(u))))
    }))));
    let has = |t: &str| dia(off(Formula::and(grid(n), tile(t))));
    chi.push(bx(Formula::implies(
        leaf.clone(),
        Formula::conj(
            inst.tiles
                .iter()
                .map(|t| Formula::implies(has(t), bx(Formula::implies(off(grid(n)), tile(t))))),
        ),
    )));
    for (pairs, step) in [(&inst.h, succ_x(n)), (&inst.v, succ_y(n))] {
        chi.push(bx(Formula::implies(
            leaf.clone(),
            Formula::conj(inst.tiles.iter().map(|t| {
                let allowed = Formula::disj(pairs.iter().filter(|[x, _]| x == t).map(|[_, y]| tile(y)));
                Formula::implies(has(t), bx(Formula::implies(off(step.clone()), allowed)))
            })),
        )));
    }
    for (i, t) in inst.init.iter().enumerate() {
        chi.push(bx(Formula::implies(
            Formula::and(leaf.clone(), a_equals(n, i, 0)),
            bx(Formula::implies(off(grid(n)), tile(t))),
        )));
    }
    let q = var("q");
    let psi = Formula::implies(Formula::conj(chi), Formula::implies(bx(bx(q.clone())), q));
    Ok((phi, psi))
}

/// `(|𝔐_φ|, |𝔐_ψ|)` of the witness built from a solution.
pub fn witness_size(n: usize) -> (usize, usize) {
    let cells = 1usize << (2 * n);
    let tree = (1usize << (2 * n + 1)) - 1;
    (2 + cells, tree + cells * cells)
}

/// The witness pair for a solution: a two-point cluster `{r_φ, x}` above
/// one irreflexive point per cell, and a binary tree of depth `2n` whose
/// leaves each see one irreflexive point per cell.
pub fn build_witness_from_solution(inst: &TilingInstance, sol: &TorusSolution) -> Result<WitnessPair> {
    check_solution(inst, sol)?;
    let (phi, psi) = generate_formulas(inst)?;
    let n = inst.n;
    let s = inst.side();
    let cells = s * s;
    let set = |m: &mut Model, v: String, x: usize| m.set(&v, x, true);
    let mark_cell = |m: &mut Model, x: usize, k: usize, l: usize| -> Result<()> {
        for bit in 0..2 * n {
            let on = if bit < n { k >> bit & 1 == 1 } else { l >> (bit - n) & 1 == 1 };
            if on {
                set(m, format!("b{bit}"), x)?;
            }
        }
        set(m, format!("tile_{}", sol.get(k, l)), x)
    };

    // 𝔐_φ: 0 = r_φ, 1 = x, 2 + k + l·s = w_{k,l}
    let mut f = Frame::new(2 + cells);
    for (x, y) in [(0, 1), (1, 0), (1, 1)] {
        f.add_edge(x, y);
    }
    for w in 2..2 + cells {
        f.add_edge(0, w);
        f.add_edge(1, w);
    }
    let mut m1 = Model::new(f, phi.signature());
    set(&mut m1, "p".into(), 0)?;
    set(&mut m1, "e".into(), 0)?;
    set(&mut m1, "e".into(), 1)?;
    for l in 0..s {
        for k in 0..s {
            mark_cell(&mut m1, 2 + k + l * s, k, l)?;
        }
    }

    // 𝔐_ψ: heap-ordered tree, node `v` has children `2v+1` (bit 0) and
    // `2v+2` (bit 1); then `u^{k,l}_{i,j}` after the tree
    let tree = (1usize << (2 * n + 1)) - 1;
    let first_leaf = (1usize << (2 * n)) - 1;
    let total = tree + cells * cells;
    let depth = |mut v: usize| {
        let mut d = 0;
        while v > 0 {
            v = (v - 1) / 2;
            d += 1;
        }
        d
    };
    // path bits: bit d is set iff the step into level d+1 went right
    let path = |mut v: usize| {
        let mut bits = Vec::new();
        while v > 0 {
            bits.push((v - 1) % 2 == 1);
            v = (v - 1) / 2;
        }
        bits.reverse();
        bits
    };
    let leaf_of = |i: usize, j: usize| {
        let mut v = 0;
        for d in 0..2 * n {
            let on = if d < n { i >> d & 1 == 1 } else { j >> (d - n) & 1 == 1 };
            v = 2 * v + if on { 2 } else { 1 };
        }
        v
    };
    let u = |i: usize, j: usize, k: usize, l: usize| tree + (i + j * s) * cells + k + l * s;
    let mut g = Frame::new(total);
    for v in 0..tree {
        if v > 0 {
            g.add_edge(v, v);
        }
        // every tree node sees its proper descendants
        for w in 1..tree {
            let mut x = w;
            while x > v {
                x = (x - 1) / 2;
            }
            if x == v && w != v {
                g.add_edge(v, w);
            }
        }
    }
    for j in 0..s {
        for i in 0..s {
            let leaf = leaf_of(i, j);
            for l in 0..s {
                for k in 0..s {
                    let x = u(i, j, k, l);
                    let mut anc = leaf;
                    loop {
                        g.add_edge(anc, x);
                        if anc == 0 {
                            break;
                        }
                        anc = (anc - 1) / 2;
                    }
                }
            }
        }
    }
    let mut m2 = Model::new(g, psi.signature());
    for x in 1..total {
        set(&mut m2, "q".into(), x)?;
    }
    for v in 0..tree {
        set(&mut m2, "e".into(), v)?;
        set(&mut m2, format!("lvl{}", depth(v)), v)?;
        for (d, on) in path(v).into_iter().enumerate() {
            if on {
                set(&mut m2, format!("a{d}"), v)?;
            }
        }
    }
    for j in 0..s {
        for i in 0..s {
            debug_assert!(leaf_of(i, j) >= first_leaf);
            for l in 0..s {
                for k in 0..s {
                    let x = u(i, j, k, l);
                    for d in 0..2 * n {
                        let on = if d < n { i >> d & 1 == 1 } else { j >> (d - n) & 1 == 1 };
                        if on {
                            set(&mut m2, format!("a{d}"), x)?;
                        }
                    }
                    mark_cell(&mut m2, x, k, l)?;
                }
            }
        }
    }

    let mut beta = BisimRelation::empty(2 + cells, total);
    for c in 0..2 {
        for v in 0..tree {
            beta.insert(c, v);
        }
    }
    for l in 0..s {
        for k in 0..s {
            for j in 0..s {
                for i in 0..s {
                    beta.insert(2 + k + l * s, u(i, j, k, l));
                }
            }
        }
    }
    let w = WitnessPair {
        phi_model: PointedModel::new(m1, 0)?,
        psi_model: PointedModel::new(m2, 0)?,
        rho: shared_signature(&phi, &psi),
        relation: Some(beta),
    };
    let failures = witness_failures(&w, &phi, &psi, Logic::Wk4)?;
    if !failures.is_empty() {
        return Err(Error::Invariant(format!("tiling witness fails: {}", failures.join("; "))));
    }
    Ok(w)
}

/// Both sides of the reduction for one instance.
#[derive(Clone, Debug)]
pub struct Roundtrip {
    pub solution: Option<TorusSolution>,
    /// Set when a solution exists and its witness verified.
    pub witness: Option<WitnessPair>,
    /// Set when no solution exists: the bounded search at the witness size.
    pub search: Option<IepVerdict>,
}

impl Roundtrip {
    pub fn agrees(&self) -> bool {
        match (&self.solution, &self.search) {
            (Some(_), _) => self.witness.is_some(),
            (None, Some(v)) => matches!(v.status, IepStatus::HasInterpolantUpToBound(_)),
            (None, None) => false,
        }
    }
}

/// Solves the instance; on success verifies the constructed witness,
/// otherwise searches for a witness up to [`witness_size`].
pub fn roundtrip(inst: &TilingInstance) -> Result<Roundtrip> {
    if inst.n > 1 {
        return Err(Error::TilingTooLarge(inst.n));
    }
    let solution = solve_tiling(inst)?;
    if let Some(sol) = &solution {
        let w = build_witness_from_solution(inst, sol)?;
        return Ok(Roundtrip {
            solution,
            witness: Some(w),
            search: None,
        });
    }
    let (phi, psi) = generate_formulas(inst)?;
    let bounds = witness_size(inst.n);
    let opts = Wk4Options {
        bounds,
        validity_bound: bounds.0,
        minimize: false,
    };
    let verdict = decide_iep_wk4_with(&phi, &psi, &opts)?;
    Ok(Roundtrip {
        solution: None,
        witness: None,
        search: Some(verdict),
    })
}

pub fn roundtrip_check(inst: &TilingInstance) -> Result<bool> {
    Ok(roundtrip(inst)?.agrees())
}
