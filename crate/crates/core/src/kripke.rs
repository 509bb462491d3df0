//! Finite Kripke frames and models.
//!
//! Worlds are dense integers `0..n`. The accessibility relation is stored as
//! one successor bit set per world, which gives O(1) edge tests and cheap
//! set operations for `◇`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bisim;
use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::formula::{Formula, Literal, PairNode, Signature, SubClosure};

pub mod dot;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    succ: Vec<BitSet>,
}

impl Frame {
    /// `n` worlds, empty relation.
    pub fn new(n: usize) -> Frame {
        Frame {
            succ: vec![BitSet::new(n); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Frame> {
        let mut f = Frame::new(n);
        for (x, y) in edges {
            f.check_world(x)?;
            f.check_world(y)?;
            f.add_edge(x, y);
        }
        Ok(f)
    }

    /// The difference frame `(W, ≠)`.
    pub fn difference(n: usize) -> Frame {
        let mut f = Frame::new(n);
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    f.add_edge(x, y);
                }
            }
        }
        f
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn check_world(&self, x: usize) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(Error::WorldOutOfRange {
                world: x,
                worlds: self.len(),
            })
        }
    }

    #[inline]
    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.succ[x].contains(y)
    }

    pub fn add_edge(&mut self, x: usize, y: usize) {
        self.succ[x].insert(y);
    }

    pub fn remove_edge(&mut self, x: usize, y: usize) {
        self.succ[x].remove(y);
    }

    #[inline]
    pub fn successors(&self, x: usize) -> &BitSet {
        &self.succ[x]
    }

    pub fn is_reflexive_at(&self, x: usize) -> bool {
        self.has_edge(x, x)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(x, s)| s.iter().map(move |y| (x, y)))
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(BitSet::count).sum()
    }

    /// The subframe on `worlds` (renumbered in the given order).
    pub fn restrict(&self, worlds: &[usize]) -> Frame {
        let mut f = Frame::new(worlds.len());
        for (i, &x) in worlds.iter().enumerate() {
            for (j, &y) in worlds.iter().enumerate() {
                if self.has_edge(x, y) {
                    f.add_edge(i, j);
                }
            }
        }
        f
    }
}

/// First triple `x R y R z` with `x ≠ z` and not `x R z`, if any.
pub fn weak_transitivity_violation(f: &Frame) -> Option<(usize, usize, usize)> {
    for x in 0..f.len() {
        for y in f.successors(x).iter() {
            for z in f.successors(y).iter() {
                if x != z && !f.has_edge(x, z) {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

/// `xRyRz → x = z ∨ xRz` for all triples.
pub fn is_weakly_transitive(f: &Frame) -> bool {
    weak_transitivity_violation(f).is_none()
}

/// Smallest weakly transitive relation containing `f`'s relation.
pub fn weak_transitive_closure(f: &Frame) -> Frame {
    let mut g = f.clone();
    loop {
        let mut changed = false;
        for x in 0..g.len() {
            let mut reach = BitSet::new(g.len());
            for y in g.successors(x).iter() {
                reach.union_with(g.successors(y));
            }
            reach.remove(x);
            if !reach.is_subset(g.successors(x)) {
                let mut s = g.succ[x].clone();
                s.union_with(&reach);
                g.succ[x] = s;
                changed = true;
            }
        }
        if !changed {
            return g;
        }
    }
}

pub fn is_symmetric(f: &Frame) -> bool {
    f.edges().all(|(x, y)| f.has_edge(y, x))
}

/// Symmetric and weakly transitive.
pub fn is_dl_frame(f: &Frame) -> bool {
    is_symmetric(f) && is_weakly_transitive(f)
}

/// Partition of the worlds of a weakly transitive frame into clusters
/// `C(x) = {x} ∪ {y | xRy ∧ yRx}` with the strict order `R^s` between them.
///
/// Cluster ids are assigned in order of their smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterDecomposition {
    cluster_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    degenerate: Vec<bool>,
    strict: Vec<BitSet>,
}

impl ClusterDecomposition {
    pub fn num_clusters(&self) -> usize {
        self.members.len()
    }

    pub fn cluster_of(&self, x: usize) -> usize {
        self.cluster_of[x]
    }

    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    /// A single irreflexive point.
    pub fn is_degenerate(&self, c: usize) -> bool {
        self.degenerate[c]
    }

    /// `C R C`; holds iff the cluster is non-degenerate.
    pub fn sees_itself(&self, c: usize) -> bool {
        !self.degenerate[c]
    }

    /// `C R^s C'`.
    pub fn strictly_below(&self, c: usize, d: usize) -> bool {
        self.strict[c].contains(d)
    }

    /// `C R^r C'`: reflexive closure of `R^s`.
    pub fn below_or_equal(&self, c: usize, d: usize) -> bool {
        c == d || self.strict[c].contains(d)
    }

    /// Clusters `D` with `C R^s D`.
    pub fn strict_successors(&self, c: usize) -> &BitSet {
        &self.strict[c]
    }

    /// `C R C'`: some member of `c` sees some member of `d`.
    pub fn cluster_sees(&self, c: usize, d: usize) -> bool {
        if c == d {
            self.sees_itself(c)
        } else {
            self.strictly_below(c, d)
        }
    }

    /// `C R x`.
    pub fn cluster_sees_world(&self, frame: &Frame, c: usize, x: usize) -> bool {
        self.members[c].iter().any(|&y| frame.has_edge(y, x))
    }
}

/// Cluster decomposition of a weakly transitive frame.
pub fn clusters(f: &Frame) -> Result<ClusterDecomposition> {
    if let Some((x, y, z)) = weak_transitivity_violation(f) {
        return Err(Error::NotWeaklyTransitive(x, y, z));
    }
    let n = f.len();
    let mut cluster_of = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        if cluster_of[x] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut ms = vec![x];
        cluster_of[x] = id;
        for y in f.successors(x).iter() {
            if y != x && f.has_edge(y, x) {
                if cluster_of[y] != usize::MAX {
                    return Err(Error::Invariant(format!("world {y} lies in two clusters")));
                }
                cluster_of[y] = id;
                ms.push(y);
            }
        }
        members.push(ms);
    }
    let k = members.len();
    let degenerate = members
        .iter()
        .map(|ms| ms.len() == 1 && !f.has_edge(ms[0], ms[0]))
        .collect();
    let mut strict = vec![BitSet::new(k); k];
    for (x, y) in f.edges() {
        let (cx, cy) = (cluster_of[x], cluster_of[y]);
        if cx != cy {
            strict[cx].insert(cy);
        }
    }
    Ok(ClusterDecomposition {
        cluster_of,
        members,
        degenerate,
        strict,
    })
}

/// Every cluster is `R^r`-reachable from the root's cluster.
pub fn is_rooted_at(f: &Frame, r: usize) -> bool {
    if r >= f.len() {
        return false;
    }
    let Ok(cd) = clusters(f) else {
        return false;
    };
    let rc = cd.cluster_of(r);
    (0..cd.num_clusters()).all(|c| cd.below_or_equal(rc, c))
}

/// A σ-model: a frame plus a valuation of every variable of `signature`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    frame: Frame,
    signature: Signature,
    // indexed by position in `signature`
    val: Vec<BitSet>,
}

impl Model {
    /// All variables false everywhere.
    pub fn new(frame: Frame, signature: Signature) -> Model {
        let val = vec![BitSet::new(frame.len()); signature.len()];
        Model {
            frame,
            signature,
            val,
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn frame_mut(&mut self) -> &mut Frame {
        &mut self.frame
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    /// `𝔳(v)`.
    pub fn valuation(&self, v: &str) -> Result<&BitSet> {
        let i = self
            .signature
            .position(v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
        Ok(&self.val[i])
    }

    pub fn set(&mut self, v: &str, x: usize, value: bool) -> Result<()> {
        self.frame.check_world(x)?;
        let i = self
            .signature
            .position(v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
        self.val[i].set(x, value);
        Ok(())
    }

    pub fn holds(&self, v: &str, x: usize) -> Result<bool> {
        Ok(self.valuation(v)?.contains(x))
    }

    /// Same frame and valuation, over a larger signature (new variables false).
    pub fn with_signature(&self, signature: &Signature) -> Model {
        let mut m = Model::new(self.frame.clone(), signature.clone());
        for (i, v) in self.signature.iter().enumerate() {
            if let Some(j) = signature.position(v) {
                m.val[j] = self.val[i].clone();
            }
        }
        m
    }

    /// Submodel on `worlds`, renumbered in the given order.
    pub fn restrict(&self, worlds: &[usize]) -> Model {
        let frame = self.frame.restrict(worlds);
        let val = self
            .val
            .iter()
            .map(|s| BitSet::from_iter_with_len(worlds.len(), (0..worlds.len()).filter(|&i| s.contains(worlds[i]))))
            .collect();
        Model {
            frame,
            signature: self.signature.clone(),
            val,
        }
    }

    /// Disjoint union; worlds of `other` are shifted by `self.len()`.
    pub fn disjoint_union(&self, other: &Model) -> Model {
        let sig = self.signature.union(&other.signature);
        let n1 = self.len();
        let n = n1 + other.len();
        let edges = self
            .frame
            .edges()
            .chain(other.frame.edges().map(|(x, y)| (x + n1, y + n1)));
        let frame = Frame::from_edges(n, edges).expect("edges in range");
        let mut m = Model::new(frame, sig);
        for (part, offset) in [(self, 0), (other, n1)] {
            for v in part.signature.iter() {
                for x in part.valuation(v).expect("own variable").iter() {
                    m.set(v, x + offset, true).expect("in range");
                }
            }
        }
        m
    }

    /// Bit set over `rho`'s variables (in `rho`'s order) true at `x`.
    pub fn atom_bits(&self, x: usize, rho: &Signature) -> Result<BitSet> {
        let mut b = BitSet::new(rho.len());
        for (i, v) in rho.iter().enumerate() {
            if self.holds(v, x)? {
                b.insert(i);
            }
        }
        Ok(b)
    }

    pub fn from_json(text: &str) -> Result<(Model, Option<usize>)> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model()
    }

    pub fn to_json(&self, root: Option<usize>) -> String {
        serde_json::to_string(&ModelFile::from_model(self, root)).expect("serialisable")
    }
}

/// On-disk model schema:
/// `{"worlds": n, "rel": [[i,j],...], "val": {"p":[0,2],...}, "root": i?}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub worlds: usize,
    #[serde(default)]
    pub rel: Vec<[usize; 2]>,
    #[serde(default)]
    pub val: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
}

/// Upper limit on worlds accepted from files; guards the quadratic adjacency.
pub const MAX_FILE_WORLDS: usize = 1 << 14;

impl ModelFile {
    pub fn into_model(self) -> Result<(Model, Option<usize>)> {
        if self.worlds > MAX_FILE_WORLDS {
            return Err(Error::MalformedModel(format!(
                "{} worlds exceeds the limit of {MAX_FILE_WORLDS}",
                self.worlds
            )));
        }
        let frame = Frame::from_edges(self.worlds, self.rel.iter().map(|&[x, y]| (x, y)))?;
        for v in self.val.keys() {
            if !is_identifier(v) {
                return Err(Error::MalformedModel(format!("`{v}` is not a valid variable name")));
            }
        }
        let sig: Signature = self.val.keys().cloned().collect();
        let mut m = Model::new(frame, sig);
        for (v, xs) in &self.val {
            for &x in xs {
                m.set(v, x, true)?;
            }
        }
        if let Some(r) = self.root {
            m.frame.check_world(r)?;
        }
        Ok((m, self.root))
    }

    pub fn from_model(m: &Model, root: Option<usize>) -> ModelFile {
        ModelFile {
            worlds: m.len(),
            rel: m.frame.edges().map(|(x, y)| [x, y]).collect(),
            val: m
                .signature
                .iter()
                .map(|v| (v.to_string(), m.valuation(v).expect("own variable").iter().collect()))
                .collect(),
            root,
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "true"
        && s != "false"
}

/// A model with a designated root world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    pub model: Model,
    pub root: usize,
}

impl PointedModel {
    pub fn new(model: Model, root: usize) -> Result<PointedModel> {
        model.frame.check_world(root)?;
        Ok(PointedModel { model, root })
    }

    pub fn to_json(&self) -> String {
        self.model.to_json(Some(self.root))
    }

    pub fn from_json(text: &str) -> Result<PointedModel> {
        let (model, root) = Model::from_json(text)?;
        let root = root.ok_or_else(|| Error::MalformedModel("pointed model needs a `root`".into()))?;
        PointedModel::new(model, root)
    }
}

/// Set of worlds where `f` holds.
pub fn extension(m: &Model, f: &Formula) -> Result<BitSet> {
    let n = m.len();
    Ok(match f {
        Formula::False => BitSet::new(n),
        Formula::True => BitSet::full(n),
        Formula::Var(v) => m.valuation(v)?.clone(),
        Formula::Not(g) => {
            let e = extension(m, g)?;
            BitSet::from_iter_with_len(n, (0..n).filter(|&x| !e.contains(x)))
        }
        Formula::And(a, b) => {
            let mut e = extension(m, a)?;
            e.intersect_with(&extension(m, b)?);
            e
        }
        Formula::Diamond(g) => {
            let e = extension(m, g)?;
            diamond_of(m.frame(), &e)
        }
    })
}

/// Worlds with an `R`-successor in `target`.
pub fn diamond_of(frame: &Frame, target: &BitSet) -> BitSet {
    let n = frame.len();
    BitSet::from_iter_with_len(n, (0..n).filter(|&x| frame.successors(x).intersects(target)))
}

/// `𝔐, x ⊨ f`.
pub fn model_check(m: &Model, x: usize, f: &Formula) -> Result<bool> {
    m.frame.check_world(x)?;
    Ok(extension(m, f)?.contains(x))
}

/// Extension of every closure pair's representative, in pair order.
pub fn closure_extensions(m: &Model, cl: &SubClosure) -> Result<Vec<BitSet>> {
    let n = m.len();
    let mut ext: Vec<BitSet> = Vec::with_capacity(cl.num_pairs());
    let lit_ext = |ext: &[BitSet], l: Literal| -> BitSet {
        let e = &ext[l.pair];
        if l.positive {
            e.clone()
        } else {
            BitSet::from_iter_with_len(n, (0..n).filter(|&x| !e.contains(x)))
        }
    };
    for node in cl.nodes() {
        let e = match node {
            PairNode::False => BitSet::new(n),
            PairNode::True => BitSet::full(n),
            PairNode::Var(v) => m.valuation(v)?.clone(),
            PairNode::And(a, b) => {
                let mut e = lit_ext(&ext, *a);
                e.intersect_with(&lit_ext(&ext, *b));
                e
            }
            PairNode::Diamond(a) => diamond_of(m.frame(), &lit_ext(&ext, *a)),
        };
        ext.push(e);
    }
    Ok(ext)
}

/// The φ,ψ-type of every world, as bit vectors over closure pairs.
pub fn closure_types(m: &Model, cl: &SubClosure) -> Result<Vec<BitSet>> {
    let ext = closure_extensions(m, cl)?;
    Ok((0..m.len())
        .map(|x| BitSet::from_iter_with_len(cl.num_pairs(), (0..cl.num_pairs()).filter(|&i| ext[i].contains(x))))
        .collect())
}

/// `𝒕(x) = t(x) ∩ sub(φ,ψ)`; bit `i` is set iff the representative of pair
/// `i` holds at `x`.
pub fn phi_psi_type(m: &Model, x: usize, cl: &SubClosure) -> Result<BitSet> {
    m.frame.check_world(x)?;
    Ok(closure_types(m, cl)?.swap_remove(x))
}

/// `at^ρ(x)`: the variables of `rho` true at `x`.
pub fn atomic_type(m: &Model, x: usize, rho: &Signature) -> Result<Signature> {
    m.frame.check_world(x)?;
    let mut out = Signature::empty();
    for v in rho.iter() {
        if m.holds(v, x)? {
            out.insert(v);
        }
    }
    Ok(out)
}

/// Finite-model surrogates for the descriptive-model conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DescriptiveReport {
    /// Distinct worlds are never bisimilar over the full signature.
    pub differentiated: bool,
    /// `xRy` whenever `x` has a successor bisimilar to `y`.
    pub tight: bool,
    /// Always true on finite models.
    pub compact: bool,
    pub bisimilar_pairs: Vec<(usize, usize)>,
    pub missing_edges: Vec<(usize, usize)>,
}

pub fn check_descriptive_finite(m: &Model) -> DescriptiveReport {
    let rel = bisim::maximal_bisimulation(m, m, m.signature()).expect("signature is the model's own");
    let n = m.len();
    let mut bisimilar_pairs = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            if rel.contains(x, y) {
                bisimilar_pairs.push((x, y));
            }
        }
    }
    let mut missing_edges = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if !m.frame.has_edge(x, y) && m.frame.successors(x).iter().any(|z| rel.contains(z, y)) {
                missing_edges.push((x, y));
            }
        }
    }
    DescriptiveReport {
        differentiated: bisimilar_pairs.is_empty(),
        tight: missing_edges.is_empty(),
        compact: true,
        bisimilar_pairs,
        missing_edges,
    }
}
