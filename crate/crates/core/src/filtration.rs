//! Mosaic filtration of a finite weakly transitive model with two
//! designated points.
//!
//! Every point `x` is mapped to a quadruple `w(x) = (𝒕, a, τ, M)` made of its
//! φ,ψ-type, its atomic ρ-type, the cluster-type of `C(x)` and the mosaic of
//! the `≈`-class of `C(x)`. The quadruples form the worlds of `𝔐†`.
//!
//! ρ-types are never computed as formula sets. Two points have the same
//! ρ-type iff they are ρ-bisimilar, and `◇t ⊆ t` holds iff some point of
//! type `t` sees a point of type `t`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::bisim::{rho_classes, BisimRelation, RhoClasses};
use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::formula::{Formula, PairNode, Signature, SubClosure};
use crate::kripke::{closure_types, clusters, ClusterDecomposition, Frame, Model};

/// `≈` on clusters, with the ρ-type classes `T_[C]` and atom domains
/// `AT_[C]` of each `≈`-class.
#[derive(Clone, Debug)]
pub struct ClusterEquivalence {
    pub clusters: ClusterDecomposition,
    pub rho: RhoClasses,
    /// `≈`-class of every cluster.
    pub class_of: Vec<usize>,
    /// `[C]`, as cluster ids.
    pub members: Vec<Vec<usize>>,
    /// `T_[C]`, as ρ-class ids.
    pub types: Vec<BTreeSet<usize>>,
    /// `AT_[C]`.
    pub atoms: Vec<BTreeSet<BitSet>>,
    /// Atomic ρ-type of every point, over the positions of ρ.
    pub atom_of: Vec<BitSet>,
    /// Whether some point of the ρ-class sees a point of the same class.
    pub self_reaching: Vec<bool>,
}

impl ClusterEquivalence {
    pub fn num_classes(&self) -> usize {
        self.members.len()
    }

    /// `t^ρ(C)` as a set of ρ-class ids.
    pub fn cluster_types(&self, c: usize) -> BTreeSet<usize> {
        self.clusters.members(c).iter().map(|&x| self.rho.class_of[x]).collect()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn cluster_equivalence(m: &Model, rho: &Signature) -> Result<ClusterEquivalence> {
    let cd = clusters(m.frame())?;
    let rc = rho_classes(m, rho)?;
    let atom_of = (0..m.len()).map(|x| m.atom_bits(x, rho)).collect::<Result<Vec<_>>>()?;
    let k = cd.num_clusters();
    let mut parent: Vec<usize> = (0..k).collect();
    let mut first = vec![usize::MAX; rc.count];
    for x in 0..m.len() {
        let (t, c) = (rc.class_of[x], cd.cluster_of(x));
        if first[t] == usize::MAX {
            first[t] = c;
        } else {
            let (a, b) = (find(&mut parent, first[t]), find(&mut parent, c));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut ids = vec![usize::MAX; k];
    let mut class_of = vec![0; k];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for c in 0..k {
        let r = find(&mut parent, c);
        if ids[r] == usize::MAX {
            ids[r] = members.len();
            members.push(Vec::new());
        }
        class_of[c] = ids[r];
        members[ids[r]].push(c);
    }
    let mut types = vec![BTreeSet::new(); members.len()];
    let mut atoms = vec![BTreeSet::new(); members.len()];
    for x in 0..m.len() {
        let e = class_of[cd.cluster_of(x)];
        types[e].insert(rc.class_of[x]);
        atoms[e].insert(atom_of[x].clone());
    }
    let mut self_reaching = vec![false; rc.count];
    for (x, y) in m.frame().edges() {
        if rc.same(x, y) {
            self_reaching[rc.class_of[x]] = true;
        }
    }
    Ok(ClusterEquivalence {
        clusters: cd,
        rho: rc,
        class_of,
        members,
        types,
        atoms,
        atom_of,
        self_reaching,
    })
}

/// `C` is ρ-maximal: whenever `C R y` and some `x ∈ C` has the ρ-type of
/// `y`, then `y ∈ C`.
pub fn rho_maximal(m: &Model, eq: &ClusterEquivalence, c: usize) -> bool {
    let cd = &eq.clusters;
    let here = eq.cluster_types(c);
    (0..m.len()).all(|y| {
        cd.cluster_of(y) == c || !here.contains(&eq.rho.class_of[y]) || !cd.cluster_sees_world(m.frame(), c, y)
    })
}

/// A ρ-maximal `D` with `C R^r D` and `t^ρ(C) ⊆ t^ρ(D)`, preferring `C`
/// itself and otherwise the lowest-numbered candidate.
pub fn find_rho_maximal_successor(m: &Model, eq: &ClusterEquivalence, c: usize) -> Result<usize> {
    let cd = &eq.clusters;
    let here = eq.cluster_types(c);
    std::iter::once(c)
        .chain(cd.strict_successors(c).iter())
        .find(|&d| rho_maximal(m, eq, d) && here.is_subset(&eq.cluster_types(d)))
        .ok_or_else(|| Error::Invariant(format!("cluster {c} has no ρ-maximal successor")))
}

/// `τ_C`: atomic ρ-type ↦ set of φ,ψ-types, over the whole domain of the class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClusterType {
    pub map: BTreeMap<BitSet, BTreeSet<BitSet>>,
}

impl ClusterType {
    pub fn domain(&self) -> impl Iterator<Item = &BitSet> {
        self.map.keys()
    }

    pub fn get(&self, a: &BitSet) -> Option<&BTreeSet<BitSet>> {
        self.map.get(a)
    }

    /// `⋃ τ(a)`, i.e. `𝒕(C)`.
    pub fn housed(&self) -> BTreeSet<&BitSet> {
        self.map.values().flatten().collect()
    }
}

/// A mosaic: the cluster-types of one `≈`-class, by interned id.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mosaic {
    pub domain: BTreeSet<BitSet>,
    pub cluster_types: BTreeSet<usize>,
}

/// A world of `𝔐†`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DagWorld {
    pub t: BitSet,
    pub a: BitSet,
    pub tau: usize,
    pub mosaic: usize,
}

/// `𝒕 ↠ 𝒕′`: for every `◇χ`, if `χ` or `◇χ` is in `𝒕′` then `◇χ ∈ 𝒕`.
pub fn arrow(cl: &SubClosure, t1: &BitSet, t2: &BitSet) -> bool {
    cl.diamond_pairs().iter().all(|&d| {
        let PairNode::Diamond(chi) = cl.node(d) else {
            unreachable!("diamond pair")
        };
        !(chi.holds_in(t2) || t2.contains(d)) || t1.contains(d)
    })
}

pub fn arrow_ct(cl: &SubClosure, c1: &ClusterType, c2: &ClusterType) -> bool {
    let h2 = c2.housed();
    c1.housed().iter().all(|t1| h2.iter().all(|t2| arrow(cl, t1, t2)))
}

/// `M ↠ M′` given the cluster-types of both mosaics.
pub fn arrow_m(cl: &SubClosure, m1: &[&ClusterType], m2: &[&ClusterType]) -> bool {
    m1.iter().all(|c1| m2.iter().any(|c2| arrow_ct(cl, c1, c2)))
}

/// The filtrated model together with all intermediate state.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub closure: SubClosure,
    pub rho: Signature,
    pub equivalence: ClusterEquivalence,
    /// `𝒕(x)` for every input point.
    pub types: Vec<BitSet>,
    pub cluster_types: Vec<ClusterType>,
    /// Interned cluster-type of every cluster.
    pub cluster_type_of: Vec<usize>,
    pub mosaics: Vec<Mosaic>,
    /// Interned mosaic of every `≈`-class.
    pub mosaic_of_class: Vec<usize>,
    /// `I(M)` for every mosaic.
    pub irr: Vec<BTreeSet<BitSet>>,
    /// `ct_arrow[i][j]` iff cluster-type `i ↠ j`.
    pub ct_arrow: Vec<Vec<bool>>,
    /// `m_arrow[i][j]` iff mosaic `i ↠ j`.
    pub m_arrow: Vec<Vec<bool>>,
    pub worlds: Vec<DagWorld>,
    /// `w(x)` as an index into `worlds`.
    pub map: Vec<usize>,
    pub model: Model,
    pub beta: BisimRelation,
    pub designated: (usize, usize),
    pub input_designated: (usize, usize),
}

fn intern<T: Ord + Clone>(table: &mut Vec<T>, index: &mut BTreeMap<T, usize>, item: T) -> usize {
    if let Some(&i) = index.get(&item) {
        return i;
    }
    let i = table.len();
    table.push(item.clone());
    index.insert(item, i);
    i
}

/// Builds `𝔐†`, `w(·)` and `β†` from `m` with designated points
/// `(r_φ, r_ψ)`. ρ is the shared signature of φ and ψ.
pub fn filtrate(m: &Model, phi: &Formula, psi: &Formula, designated: (usize, usize)) -> Result<Filtration> {
    m.frame().check_world(designated.0)?;
    m.frame().check_world(designated.1)?;
    let cl = SubClosure::new(phi, psi);
    let rho = phi.signature().intersection(&psi.signature());
    let sigma = cl.signature();
    let eq = cluster_equivalence(m, &rho)?;
    let types = closure_types(m, &cl)?;
    let cd = &eq.clusters;

    let mut cluster_types = Vec::new();
    let mut ct_index = BTreeMap::new();
    let mut cluster_type_of = Vec::with_capacity(cd.num_clusters());
    for c in 0..cd.num_clusters() {
        let mut map: BTreeMap<BitSet, BTreeSet<BitSet>> =
            eq.atoms[eq.class_of[c]].iter().map(|a| (a.clone(), BTreeSet::new())).collect();
        for &x in cd.members(c) {
            map.get_mut(&eq.atom_of[x])
                .expect("atom of a member lies in the class domain")
                .insert(types[x].clone());
        }
        cluster_type_of.push(intern(&mut cluster_types, &mut ct_index, ClusterType { map }));
    }

    let mut mosaics = Vec::new();
    let mut m_index = BTreeMap::new();
    let mut mosaic_of_class = Vec::with_capacity(eq.num_classes());
    for e in 0..eq.num_classes() {
        let mosaic = Mosaic {
            domain: eq.atoms[e].clone(),
            cluster_types: eq.members[e].iter().map(|&c| cluster_type_of[c]).collect(),
        };
        mosaic_of_class.push(intern(&mut mosaics, &mut m_index, mosaic));
    }

    // a ∈ I(M) unless some class with mosaic M has a self-reaching ρ-type over a
    let mut irr: Vec<BTreeSet<BitSet>> = mosaics.iter().map(|mo| mo.domain.clone()).collect();
    for e in 0..eq.num_classes() {
        for &t in &eq.types[e] {
            if eq.self_reaching[t] {
                let x = eq.rho.members(t).next().expect("nonempty class");
                irr[mosaic_of_class[e]].remove(&eq.atom_of[x]);
            }
        }
    }

    let ct_arrow: Vec<Vec<bool>> = cluster_types
        .iter()
        .map(|c1| cluster_types.iter().map(|c2| arrow_ct(&cl, c1, c2)).collect())
        .collect();
    let m_arrow: Vec<Vec<bool>> = mosaics
        .iter()
        .map(|m1| {
            mosaics
                .iter()
                .map(|m2| {
                    m1.cluster_types
                        .iter()
                        .all(|&i| m2.cluster_types.iter().any(|&j| ct_arrow[i][j]))
                })
                .collect()
        })
        .collect();

    let mut worlds = Vec::new();
    let mut w_index = HashMap::new();
    let mut map = Vec::with_capacity(m.len());
    for x in 0..m.len() {
        let c = cd.cluster_of(x);
        let w = DagWorld {
            t: types[x].clone(),
            a: eq.atom_of[x].clone(),
            tau: cluster_type_of[c],
            mosaic: mosaic_of_class[eq.class_of[c]],
        };
        let i = *w_index.entry(w.clone()).or_insert_with(|| {
            worlds.push(w);
            worlds.len() - 1
        });
        map.push(i);
    }

    let n = worlds.len();
    let mut frame = Frame::new(n);
    for (i, w) in worlds.iter().enumerate() {
        for (j, v) in worlds.iter().enumerate() {
            if r_dagger(&cl, &irr, &cluster_types, &ct_arrow, &m_arrow, w, v, i == j) {
                frame.add_edge(i, j);
            }
        }
    }
    let mut model = Model::new(frame, sigma.clone());
    for (i, w) in worlds.iter().enumerate() {
        for v in sigma.iter() {
            let pair = cl.var_pair(v).expect("closure variable");
            if w.t.contains(pair) {
                model.set(v, i, true)?;
            }
        }
    }
    let mut beta = BisimRelation::empty(n, n);
    for (i, w) in worlds.iter().enumerate() {
        for (j, v) in worlds.iter().enumerate() {
            if w.a == v.a && w.mosaic == v.mosaic {
                beta.insert(i, j);
            }
        }
    }
    Ok(Filtration {
        closure: cl,
        rho,
        designated: (map[designated.0], map[designated.1]),
        input_designated: designated,
        equivalence: eq,
        types,
        cluster_types,
        cluster_type_of,
        mosaics,
        mosaic_of_class,
        irr,
        ct_arrow,
        m_arrow,
        worlds,
        map,
        model,
        beta,
    })
}

#[allow(clippy::too_many_arguments)]
fn r_dagger(
    cl: &SubClosure,
    irr: &[BTreeSet<BitSet>],
    cts: &[ClusterType],
    ct_arrow: &[Vec<bool>],
    m_arrow: &[Vec<bool>],
    w: &DagWorld,
    v: &DagWorld,
    same: bool,
) -> bool {
    let tau_ok = w.tau == v.tau || ct_arrow[w.tau][v.tau];
    if w.mosaic != v.mosaic {
        m_arrow[w.mosaic][v.mosaic] && ct_arrow[w.tau][v.tau]
    } else if m_arrow[w.mosaic][w.mosaic] {
        if same {
            arrow(cl, &w.t, &w.t)
        } else {
            tau_ok
        }
    } else {
        let i = &irr[w.mosaic];
        if same {
            arrow(cl, &w.t, &w.t) && !i.contains(&w.a)
        } else {
            let empty_on_irr = i.iter().all(|b| cts[w.tau].get(b).is_none_or(BTreeSet::is_empty));
            w.tau == v.tau || (ct_arrow[w.tau][v.tau] && empty_on_irr)
        }
    }
}

/// Size accounting for a filtration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiltrationReport {
    pub input_worlds: usize,
    pub clusters: usize,
    pub classes: usize,
    pub cluster_types: usize,
    pub mosaics: usize,
    pub worlds: usize,
    pub closure_pairs: usize,
    pub rho: usize,
    /// `log₂` of the cluster-type bound `2^(|ρ| + 2^(|sub| + |ρ|))`.
    pub cluster_type_bound_log2: f64,
    /// `log₂` of the bound on `|W†|`.
    pub world_bound_log2: f64,
    pub within_bounds: bool,
}

pub fn filtration_report(f: &Filtration) -> FiltrationReport {
    let pairs = f.closure.num_pairs() as f64;
    let r = f.rho.len() as f64;
    let ct_log = r + (pairs + r).exp2();
    // quadruples: types × atoms × cluster-types × sets of cluster-types
    let w_log = pairs + r + ct_log + ct_log.exp2();
    let le = |count: usize, log: f64| (count as f64).log2() <= log;
    FiltrationReport {
        input_worlds: f.map.len(),
        clusters: f.equivalence.clusters.num_clusters(),
        classes: f.equivalence.num_classes(),
        cluster_types: f.cluster_types.len(),
        mosaics: f.mosaics.len(),
        worlds: f.worlds.len(),
        closure_pairs: f.closure.num_pairs(),
        rho: f.rho.len(),
        cluster_type_bound_log2: ct_log,
        world_bound_log2: w_log,
        within_bounds: le(f.cluster_types.len(), ct_log)
            && le(f.mosaics.len(), ct_log.exp2())
            && le(f.worlds.len(), w_log)
            && f.worlds.len() <= f.map.len(),
    }
}

pub mod properties;
