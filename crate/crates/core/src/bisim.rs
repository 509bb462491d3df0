//! ρ-bisimulations between finite models.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::formula::Signature;
use crate::kripke::{Model, PointedModel};

/// A relation `β ⊆ W₁ × W₂`, stored as one row of `W₂` per world of `W₁`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BisimRelation {
    right: usize,
    rows: Vec<BitSet>,
}

impl BisimRelation {
    pub fn empty(left: usize, right: usize) -> BisimRelation {
        BisimRelation {
            right,
            rows: vec![BitSet::new(right); left],
        }
    }

    pub fn universal(left: usize, right: usize) -> BisimRelation {
        BisimRelation {
            right,
            rows: vec![BitSet::full(right); left],
        }
    }

    pub fn identity(n: usize) -> BisimRelation {
        let mut r = BisimRelation::empty(n, n);
        for x in 0..n {
            r.insert(x, x);
        }
        r
    }

    /// Range-checked construction from a pair list.
    pub fn from_pairs(left: usize, right: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<BisimRelation> {
        let mut r = BisimRelation::empty(left, right);
        for (x, y) in pairs {
            if x >= left {
                return Err(Error::WorldOutOfRange { world: x, worlds: left });
            }
            if y >= right {
                return Err(Error::WorldOutOfRange { world: y, worlds: right });
            }
            r.insert(x, y);
        }
        Ok(r)
    }

    pub fn left_len(&self) -> usize {
        self.rows.len()
    }

    pub fn right_len(&self) -> usize {
        self.right
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows.get(x).is_some_and(|r| r.contains(y))
    }

    pub fn insert(&mut self, x: usize, y: usize) {
        self.rows[x].insert(y);
    }

    pub fn remove(&mut self, x: usize, y: usize) {
        self.rows[x].remove(y);
    }

    /// Worlds of `W₂` related to `x`.
    pub fn row(&self, x: usize) -> &BitSet {
        &self.rows[x]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(x, r)| r.iter().map(move |y| (x, y)))
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(BitSet::count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(BitSet::is_empty)
    }

    pub fn is_subset(&self, other: &BisimRelation) -> bool {
        self.rows.len() == other.rows.len() && self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }

    pub fn union_with(&mut self, other: &BisimRelation) {
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            a.union_with(b);
        }
    }

    pub fn transpose(&self) -> BisimRelation {
        let mut t = BisimRelation::empty(self.right, self.rows.len());
        for (x, y) in self.pairs() {
            t.insert(y, x);
        }
        t
    }

    /// JSON pair list `[[x, y], ...]`.
    pub fn to_json(&self) -> String {
        let pairs: Vec<[usize; 2]> = self.pairs().map(|(x, y)| [x, y]).collect();
        serde_json::to_string(&pairs).expect("serialisable")
    }

    pub fn from_json(text: &str, left: usize, right: usize) -> Result<BisimRelation> {
        let pairs: Vec<[usize; 2]> = serde_json::from_str(text)?;
        BisimRelation::from_pairs(left, right, pairs.into_iter().map(|[x, y]| (x, y)))
    }
}

fn atoms(m: &Model, rho: &Signature) -> Result<Vec<BitSet>> {
    (0..m.len()).map(|x| m.atom_bits(x, rho)).collect()
}

/// Checks (atom) and both directions of (move) for every pair of `beta`.
pub fn verify_bisimulation(m1: &Model, m2: &Model, rho: &Signature, beta: &BisimRelation) -> Result<bool> {
    if beta.left_len() != m1.len() {
        return Err(Error::WorldOutOfRange {
            world: beta.left_len().max(1) - 1,
            worlds: m1.len(),
        });
    }
    if beta.right_len() != m2.len() {
        return Err(Error::WorldOutOfRange {
            world: beta.right_len().max(1) - 1,
            worlds: m2.len(),
        });
    }
    let (a1, a2) = (atoms(m1, rho)?, atoms(m2, rho)?);
    let back = beta.transpose();
    Ok(beta.pairs().all(|(x1, x2)| pair_ok(m1, m2, &a1, &a2, beta, &back, x1, x2)))
}

#[allow(clippy::too_many_arguments)]
fn pair_ok(
    m1: &Model,
    m2: &Model,
    a1: &[BitSet],
    a2: &[BitSet],
    beta: &BisimRelation,
    back: &BisimRelation,
    x1: usize,
    x2: usize,
) -> bool {
    let (s1, s2) = (m1.frame().successors(x1), m2.frame().successors(x2));
    a1[x1] == a2[x2]
        && s1.iter().all(|y1| beta.row(y1).intersects(s2))
        && s2.iter().all(|y2| back.row(y2).intersects(s1))
}

/// The largest ρ-bisimulation between `m1` and `m2`: start from all pairs
/// agreeing on ρ and prune (move) violations until nothing changes.
pub fn maximal_bisimulation(m1: &Model, m2: &Model, rho: &Signature) -> Result<BisimRelation> {
    let (a1, a2) = (atoms(m1, rho)?, atoms(m2, rho)?);
    let mut beta = BisimRelation::empty(m1.len(), m2.len());
    for x1 in 0..m1.len() {
        for x2 in 0..m2.len() {
            if a1[x1] == a2[x2] {
                beta.insert(x1, x2);
            }
        }
    }
    let mut back = beta.transpose();
    loop {
        let mut removed = Vec::new();
        for (x1, x2) in beta.pairs() {
            if !pair_ok(m1, m2, &a1, &a2, &beta, &back, x1, x2) {
                removed.push((x1, x2));
            }
        }
        if removed.is_empty() {
            return Ok(beta);
        }
        for (x1, x2) in removed {
            beta.remove(x1, x2);
            back.remove(x2, x1);
        }
    }
}

/// Whether the two roots are related by some ρ-bisimulation.
pub fn bisimilar(pm1: &PointedModel, pm2: &PointedModel, rho: &Signature) -> Result<bool> {
    Ok(maximal_bisimulation(&pm1.model, &pm2.model, rho)?.contains(pm1.root, pm2.root))
}

/// ρ-bisimilarity classes of the worlds of one model. Class ids are
/// numbered in order of their smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoClasses {
    pub class_of: Vec<usize>,
    pub count: usize,
}

impl RhoClasses {
    pub fn same(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }

    pub fn members(&self, class: usize) -> impl Iterator<Item = usize> + '_ {
        self.class_of
            .iter()
            .enumerate()
            .filter(move |&(_, &c)| c == class)
            .map(|(x, _)| x)
    }
}

pub fn rho_classes(m: &Model, rho: &Signature) -> Result<RhoClasses> {
    let beta = maximal_bisimulation(m, m, rho)?;
    let mut class_of = vec![usize::MAX; m.len()];
    let mut count = 0;
    for x in 0..m.len() {
        if class_of[x] == usize::MAX {
            for y in beta.row(x).iter() {
                class_of[y] = count;
            }
            count += 1;
        }
    }
    Ok(RhoClasses { class_of, count })
}
