//! Modal formulas over a finite signature.
//!
//! The core language has six constructors: `⊥`, `⊤`, variables, `¬`, `∧`
//! and `◇`. Disjunction, implication, bi-implication and `□` are accepted by
//! the parser and the builder functions but expand into the core
//! constructors immediately, so every downstream module only has to handle
//! four connectives.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::bits::BitSet;
use crate::error::{Error, Result};

mod parse;
mod random;

pub use parse::parse;
pub use random::{random_formula, FormulaShape};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    False,
    True,
    Var(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Diamond(Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::Diamond(Box::new(f))
    }

    /// `a ∨ b` as `¬(¬a ∧ ¬b)`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `a → b` as `¬(a ∧ ¬b)`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    /// `a ↔ b` as `(a → b) ∧ (b → a)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    /// `□f` as `¬◇¬f`.
    pub fn boxed(f: Formula) -> Formula {
        Formula::not(Formula::diamond(Formula::not(f)))
    }

    /// `f ∧ □f`.
    pub fn box_plus(f: Formula) -> Formula {
        Formula::and(f.clone(), Formula::boxed(f))
    }

    /// `f ∨ ◇f`.
    pub fn diamond_plus(f: Formula) -> Formula {
        Formula::or(f.clone(), Formula::diamond(f))
    }

    /// Conjunction of all items; `⊤` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of all items; `⊥` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::False,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::False | Formula::True | Formula::Var(_) => 1,
            Formula::Not(f) | Formula::Diamond(f) => 1 + f.size(),
            Formula::And(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::False | Formula::True | Formula::Var(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::Diamond(f) => 1 + f.modal_depth(),
            Formula::And(a, b) => a.modal_depth().max(b.modal_depth()),
        }
    }

    pub fn signature(&self) -> Signature {
        let mut sig = Signature::empty();
        self.collect_vars(&mut sig.0);
        sig
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::False | Formula::True => {}
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::Not(f) | Formula::Diamond(f) => f.collect_vars(out),
            Formula::And(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Removes every double negation, at any depth.
    pub fn normalize(&self) -> Formula {
        match self {
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Not(g) => g.normalize(),
                g => Formula::not(g.normalize()),
            },
            Formula::And(a, b) => Formula::and(a.normalize(), b.normalize()),
            Formula::Diamond(a) => Formula::diamond(a.normalize()),
            atom => atom.clone(),
        }
    }

    /// Fully parenthesised rendering: every binary node gets its own parens.
    pub fn to_string_full(&self) -> String {
        let mut s = String::new();
        write_full(self, &mut s);
        s
    }
}

fn write_full(f: &Formula, out: &mut String) {
    match f {
        Formula::False => out.push_str("false"),
        Formula::True => out.push_str("true"),
        Formula::Var(v) => out.push_str(v),
        Formula::Not(g) => {
            out.push('~');
            write_full(g, out);
        }
        Formula::Diamond(g) => {
            out.push_str("<>");
            write_full(g, out);
        }
        Formula::And(a, b) => {
            out.push('(');
            write_full(a, out);
            out.push_str(" & ");
            write_full(b, out);
            out.push(')');
        }
    }
}

/// Canonical ASCII rendering with minimal parentheses. Re-parses to the
/// identical tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::False => f.write_str("false"),
            Formula::True => f.write_str("true"),
            Formula::Var(v) => f.write_str(v),
            Formula::Not(g) => {
                f.write_str("~")?;
                write_operand(g, f)
            }
            Formula::Diamond(g) => {
                f.write_str("<>")?;
                write_operand(g, f)
            }
            Formula::And(a, b) => {
                // `&` is left-associative, so only a right conjunct needs parens.
                write!(f, "{a} & ")?;
                if matches!(**b, Formula::And(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

fn write_operand(g: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if matches!(g, Formula::And(..)) {
        write!(f, "({g})")
    } else {
        write!(f, "{g}")
    }
}

/// A finite, lexicographically ordered set of variable names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(BTreeSet<String>);

impl Signature {
    pub fn empty() -> Self {
        Signature(BTreeSet::new())
    }

    pub fn contains(&self, v: &str) -> bool {
        self.0.contains(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn insert(&mut self, v: impl Into<String>) {
        self.0.insert(v.into());
    }

    pub fn union(&self, other: &Signature) -> Signature {
        Signature(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &Signature) -> Signature {
        Signature(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &Signature) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Position of `v` in the lexicographic order.
    pub fn position(&self, v: &str) -> Option<usize> {
        self.0.iter().position(|x| x == v)
    }
}

impl<S: Into<String>> FromIterator<S> for Signature {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Signature(iter.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

pub fn signature_of(f: &Formula) -> Signature {
    f.signature()
}

pub fn shared_signature(phi: &Formula, psi: &Formula) -> Signature {
    phi.signature().intersection(&psi.signature())
}

/// A member of a [`SubClosure`]: the representative of pair `pair`, or its
/// negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub pair: usize,
    pub positive: bool,
}

impl Literal {
    pub fn holds_in(self, t: &BitSet) -> bool {
        t.contains(self.pair) == self.positive
    }
}

/// Shape of a closure pair's representative in terms of other pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairNode {
    False,
    True,
    Var(String),
    And(Literal, Literal),
    Diamond(Literal),
}

/// `sub(φ) ∪ sub(ψ)`: subformulas of two formulas closed under single
/// negation, with `¬¬χ` identified with `χ`.
///
/// Members come in pairs `{χ, ¬χ}`; the representative `χ` of each pair
/// never starts with a negation. Pairs are indexed in post-order of first
/// occurrence (children before parents, `φ` before `ψ`), so a φ,ψ-type is a
/// bit vector over pair indices and closure evaluation can run in index
/// order.
#[derive(Clone, Debug)]
pub struct SubClosure {
    phi: Formula,
    psi: Formula,
    reps: Vec<Formula>,
    nodes: Vec<PairNode>,
    index: HashMap<Formula, usize>,
    in_phi: BitSet,
    in_psi: BitSet,
    diamonds: Vec<usize>,
    phi_lit: Literal,
    psi_lit: Literal,
}

impl SubClosure {
    pub fn new(phi: &Formula, psi: &Formula) -> SubClosure {
        let phi_n = phi.normalize();
        let psi_n = psi.normalize();
        let mut b = ClosureBuilder::default();
        let mut seen_phi = Vec::new();
        let phi_lit = b.insert(&phi_n, &mut seen_phi);
        let mut seen_psi = Vec::new();
        let psi_lit = b.insert(&psi_n, &mut seen_psi);
        let n = b.reps.len();
        let diamonds = b
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, node)| matches!(node, PairNode::Diamond(_)))
            .map(|(i, _)| i)
            .collect();
        SubClosure {
            phi: phi_n,
            psi: psi_n,
            in_phi: BitSet::from_iter_with_len(n, seen_phi),
            in_psi: BitSet::from_iter_with_len(n, seen_psi),
            reps: b.reps,
            nodes: b.nodes,
            index: b.index,
            diamonds,
            phi_lit,
            psi_lit,
        }
    }

    /// Closure of a single formula.
    pub fn of(f: &Formula) -> SubClosure {
        SubClosure::new(f, f)
    }

    pub fn phi(&self) -> &Formula {
        &self.phi
    }

    pub fn psi(&self) -> &Formula {
        &self.psi
    }

    pub fn phi_literal(&self) -> Literal {
        self.phi_lit
    }

    pub fn psi_literal(&self) -> Literal {
        self.psi_lit
    }

    /// Number of `{χ, ¬χ}` pairs.
    pub fn num_pairs(&self) -> usize {
        self.reps.len()
    }

    /// Number of members, `|sub(φ,ψ)|`.
    pub fn len(&self) -> usize {
        2 * self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// `|sub(φ)|`.
    pub fn phi_len(&self) -> usize {
        2 * self.in_phi.count()
    }

    /// `|sub(ψ)|`.
    pub fn psi_len(&self) -> usize {
        2 * self.in_psi.count()
    }

    pub fn representative(&self, pair: usize) -> &Formula {
        &self.reps[pair]
    }

    pub fn node(&self, pair: usize) -> &PairNode {
        &self.nodes[pair]
    }

    pub fn nodes(&self) -> &[PairNode] {
        &self.nodes
    }

    /// The formula denoted by a literal.
    pub fn member(&self, lit: Literal) -> Formula {
        let rep = self.reps[lit.pair].clone();
        if lit.positive {
            rep
        } else {
            Formula::not(rep)
        }
    }

    /// All members in index order, each pair as `χ, ¬χ`.
    pub fn members(&self) -> Vec<Formula> {
        (0..self.reps.len())
            .flat_map(|i| {
                [
                    self.member(Literal { pair: i, positive: true }),
                    self.member(Literal { pair: i, positive: false }),
                ]
            })
            .collect()
    }

    pub fn phi_members(&self) -> Vec<Formula> {
        self.side_members(&self.in_phi)
    }

    pub fn psi_members(&self) -> Vec<Formula> {
        self.side_members(&self.in_psi)
    }

    fn side_members(&self, side: &BitSet) -> Vec<Formula> {
        side.iter()
            .flat_map(|i| {
                [
                    self.member(Literal { pair: i, positive: true }),
                    self.member(Literal { pair: i, positive: false }),
                ]
            })
            .collect()
    }

    pub fn phi_pairs(&self) -> &BitSet {
        &self.in_phi
    }

    pub fn psi_pairs(&self) -> &BitSet {
        &self.in_psi
    }

    /// Looks a formula up, after negation normalisation.
    pub fn literal_of(&self, f: &Formula) -> Option<Literal> {
        match f.normalize() {
            Formula::Not(g) => self.index.get(&*g).map(|&pair| Literal { pair, positive: false }),
            g => self.index.get(&g).map(|&pair| Literal { pair, positive: true }),
        }
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.literal_of(f).is_some()
    }

    /// Pair indices whose representative is `◇χ`.
    pub fn diamond_pairs(&self) -> &[usize] {
        &self.diamonds
    }

    /// Number of `◇`-prefixed members.
    pub fn num_diamonds(&self) -> usize {
        self.diamonds.len()
    }

    pub fn signature(&self) -> Signature {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                PairNode::Var(v) => Some(v.clone()),
                _ => None,
            })
            .collect()
    }

    /// Pair index of a variable, if it occurs.
    pub fn var_pair(&self, v: &str) -> Option<usize> {
        self.index.get(&Formula::var(v)).copied()
    }

    /// Renders a φ,ψ-type as the set of members it contains.
    pub fn type_members(&self, t: &BitSet) -> Vec<Formula> {
        (0..self.reps.len())
            .map(|i| self.member(Literal { pair: i, positive: t.contains(i) }))
            .collect()
    }

    /// Builds a type from the members it should contain; every pair not
    /// mentioned defaults to its negative member.
    pub fn type_from_members<'a>(&self, members: impl IntoIterator<Item = &'a Formula>) -> Result<BitSet> {
        let mut t = BitSet::new(self.num_pairs());
        for m in members {
            let lit = self
                .literal_of(m)
                .ok_or_else(|| Error::Invariant(format!("`{m}` is not in the closure")))?;
            t.set(lit.pair, lit.positive);
        }
        Ok(t)
    }
}

#[derive(Default)]
struct ClosureBuilder {
    reps: Vec<Formula>,
    nodes: Vec<PairNode>,
    index: HashMap<Formula, usize>,
}

impl ClosureBuilder {
    /// Inserts a normalised formula and all its subformulas; returns its literal.
    fn insert(&mut self, f: &Formula, seen: &mut Vec<usize>) -> Literal {
        let (rep, positive) = match f {
            Formula::Not(g) => (g.as_ref(), false),
            g => (g, true),
        };
        let node = match rep {
            Formula::False => PairNode::False,
            Formula::True => PairNode::True,
            Formula::Var(v) => PairNode::Var(v.clone()),
            Formula::And(a, b) => {
                let la = self.insert(a, seen);
                let lb = self.insert(b, seen);
                PairNode::And(la, lb)
            }
            Formula::Diamond(a) => PairNode::Diamond(self.insert(a, seen)),
            Formula::Not(_) => unreachable!("closure input must be normalised"),
        };
        let pair = match self.index.get(rep) {
            Some(&i) => i,
            None => {
                let i = self.reps.len();
                self.reps.push(rep.clone());
                self.nodes.push(node);
                self.index.insert(rep.clone(), i);
                i
            }
        };
        if !seen.contains(&pair) {
            seen.push(pair);
        }
        Literal { pair, positive }
    }
}

pub fn sub_closure(phi: &Formula, psi: &Formula) -> SubClosure {
    SubClosure::new(phi, psi)
}
