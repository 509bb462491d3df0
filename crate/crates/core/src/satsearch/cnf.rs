//! Propositional encodings of bounded model search, solved with batsat.
//!
//! A side is a block of `n` world slots. Slot `i` exists iff `E(i)`, and
//! existence is downward closed so the live worlds are always `0..k`.
//! Slot 0 is the root. Every closure pair gets a truth variable per slot,
//! tied to its children by full equivalences, so any satisfying assignment
//! decodes to a model in which the truth variables are the real truth values.

use batsat::{lbool, BasicSolver, Lit, SolverInterface};

use crate::bisim::BisimRelation;
use crate::formula::{Literal, PairNode, Signature, SubClosure};
use crate::kripke::{Frame, Model};

/// Frame class of a side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SideClass {
    /// Rooted and weakly transitive.
    Wk4,
    /// A single cluster: all distinct live worlds see each other.
    Cluster,
}

pub(crate) struct Cnf {
    solver: BasicSolver,
    tru: Lit,
    clause: Vec<Lit>,
}

impl Cnf {
    pub(crate) fn new() -> Cnf {
        let mut solver = BasicSolver::default();
        let tru = Lit::new(solver.new_var_default(), true);
        let mut cnf = Cnf {
            solver,
            tru,
            clause: Vec::new(),
        };
        cnf.add(&[tru]);
        cnf
    }

    pub(crate) fn fresh(&mut self) -> Lit {
        Lit::new(self.solver.new_var_default(), true)
    }

    pub(crate) fn constant(&self, b: bool) -> Lit {
        if b {
            self.tru
        } else {
            !self.tru
        }
    }

    pub(crate) fn add(&mut self, lits: &[Lit]) {
        self.clause.clear();
        self.clause.extend_from_slice(lits);
        self.solver.add_clause_reuse(&mut self.clause);
    }

    /// `a → b`.
    pub(crate) fn implies(&mut self, a: Lit, b: Lit) {
        self.add(&[!a, b]);
    }

    /// `g ↔ a ∧ b`.
    fn and_gate(&mut self, a: Lit, b: Lit) -> Lit {
        let g = self.fresh();
        self.add(&[!g, a]);
        self.add(&[!g, b]);
        self.add(&[g, !a, !b]);
        g
    }

    /// `g ↔ ⋁ xs`.
    fn or_gate(&mut self, xs: &[Lit]) -> Lit {
        if xs.is_empty() {
            return self.constant(false);
        }
        let g = self.fresh();
        for &x in xs {
            self.add(&[!x, g]);
        }
        let mut c = Vec::with_capacity(xs.len() + 1);
        c.push(!g);
        c.extend_from_slice(xs);
        self.add(&c);
        g
    }

    pub(crate) fn solve(&mut self, assumptions: &[Lit]) -> bool {
        self.solver.solve_limited(assumptions) == lbool::TRUE
    }

    pub(crate) fn value(&self, l: Lit) -> bool {
        SolverInterface::value_lit(&self.solver, l) == lbool::TRUE
    }

    pub(crate) fn num_vars(&self) -> u64 {
        self.solver.num_vars() as u64
    }

    pub(crate) fn num_clauses(&self) -> u64 {
        self.solver.num_clauses()
    }

    pub(crate) fn num_conflicts(&self) -> u64 {
        self.solver.num_conflicts()
    }
}

pub(crate) struct Side {
    pub(crate) n: usize,
    pub(crate) sig: Signature,
    pub(crate) exists: Vec<Lit>,
    /// `rel[x][y]`
    pub(crate) rel: Vec<Vec<Lit>>,
    /// `val[x][i]` for the `i`-th variable of `sig`
    pub(crate) val: Vec<Vec<Lit>>,
    /// `truth[x][pair]`; only pairs in the encoded set are meaningful
    pub(crate) truth: Vec<Vec<Lit>>,
}

impl Side {
    /// Encodes a side of `n` slots over the closure pairs in `pairs`
    /// (which must be closed under subformulas).
    pub(crate) fn encode(cnf: &mut Cnf, n: usize, class: SideClass, cl: &SubClosure, pairs: &[usize]) -> Side {
        assert!(n >= 1);
        let sig: Signature = pairs
            .iter()
            .filter_map(|&i| match cl.node(i) {
                PairNode::Var(v) => Some(v.clone()),
                _ => None,
            })
            .collect();
        let exists: Vec<Lit> = (0..n).map(|_| cnf.fresh()).collect();
        cnf.add(&[exists[0]]);
        for i in 1..n {
            cnf.implies(exists[i], exists[i - 1]);
        }
        let rel: Vec<Vec<Lit>> = (0..n).map(|_| (0..n).map(|_| cnf.fresh()).collect()).collect();
        for x in 0..n {
            for y in 0..n {
                cnf.implies(rel[x][y], exists[x]);
                cnf.implies(rel[x][y], exists[y]);
            }
        }
        match class {
            SideClass::Wk4 => {
                for y in 1..n {
                    cnf.implies(exists[y], rel[0][y]);
                }
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            if x != z {
                                cnf.add(&[!rel[x][y], !rel[y][z], rel[x][z]]);
                            }
                        }
                    }
                }
            }
            SideClass::Cluster => {
                for x in 0..n {
                    for y in 0..n {
                        if x != y {
                            cnf.add(&[!exists[x], !exists[y], rel[x][y]]);
                        }
                    }
                }
            }
        }
        let val: Vec<Vec<Lit>> = (0..n).map(|_| (0..sig.len()).map(|_| cnf.fresh()).collect()).collect();
        // relabelling the non-root worlds never changes the model, so the
        // live ones can be taken in non-decreasing order of valuation
        for x in 1..n.saturating_sub(1) {
            let mut eq = exists[x + 1];
            for k in 0..sig.len() {
                let (u, v) = (val[x][k], val[x + 1][k]);
                cnf.add(&[!eq, !u, v]);
                if k + 1 < sig.len() {
                    let next = cnf.fresh();
                    cnf.add(&[!eq, !u, !v, next]);
                    cnf.add(&[!eq, u, v, next]);
                    eq = next;
                }
            }
        }
        let unused = cnf.constant(false);
        let mut truth = vec![vec![unused; cl.num_pairs()]; n];
        let lit = |truth: &Vec<Vec<Lit>>, x: usize, l: Literal| {
            let t = truth[x][l.pair];
            if l.positive {
                t
            } else {
                !t
            }
        };
        // pairs are in post-order, so children are encoded first
        let mut sorted = pairs.to_vec();
        sorted.sort_unstable();
        for &i in &sorted {
            for x in 0..n {
                let t = match cl.node(i) {
                    PairNode::False => cnf.constant(false),
                    PairNode::True => cnf.constant(true),
                    PairNode::Var(v) => val[x][sig.position(v).expect("variable of an encoded pair")],
                    PairNode::And(a, b) => {
                        let (la, lb) = (lit(&truth, x, *a), lit(&truth, x, *b));
                        cnf.and_gate(la, lb)
                    }
                    PairNode::Diamond(a) => {
                        let mut witnesses = Vec::with_capacity(n);
                        for y in 0..n {
                            let ly = lit(&truth, y, *a);
                            witnesses.push(cnf.and_gate(rel[x][y], ly));
                        }
                        cnf.or_gate(&witnesses)
                    }
                };
                truth[x][i] = t;
            }
        }
        Side {
            n,
            sig,
            exists,
            rel,
            val,
            truth,
        }
    }

    pub(crate) fn literal(&self, x: usize, l: Literal) -> Lit {
        let t = self.truth[x][l.pair];
        if l.positive {
            t
        } else {
            !t
        }
    }

    /// Assumptions fixing the number of live worlds to exactly `k`.
    pub(crate) fn exact_size(&self, k: usize) -> Vec<Lit> {
        let mut a = vec![self.exists[k - 1]];
        if k < self.n {
            a.push(!self.exists[k]);
        }
        a
    }

    pub(crate) fn decode(&self, cnf: &Cnf) -> Model {
        let k = self.exists.iter().take_while(|&&e| cnf.value(e)).count();
        let mut frame = Frame::new(k);
        for x in 0..k {
            for y in 0..k {
                if cnf.value(self.rel[x][y]) {
                    frame.add_edge(x, y);
                }
            }
        }
        let mut m = Model::new(frame, self.sig.clone());
        for x in 0..k {
            for (i, v) in self.sig.iter().enumerate() {
                if cnf.value(self.val[x][i]) {
                    m.set(v, x, true).expect("decoded world in range");
                }
            }
        }
        m
    }
}

/// Encodes a ρ-bisimulation `β` between two sides with `β(0,0)`.
pub(crate) struct Bisim {
    pairs: Vec<Vec<Lit>>,
}

impl Bisim {
    pub(crate) fn encode(cnf: &mut Cnf, a: &Side, b: &Side, rho: &Signature) -> Bisim {
        let (n1, n2) = (a.n, b.n);
        let beta: Vec<Vec<Lit>> = (0..n1).map(|_| (0..n2).map(|_| cnf.fresh()).collect()).collect();
        cnf.add(&[beta[0][0]]);
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                let p = beta[x1][x2];
                cnf.implies(p, a.exists[x1]);
                cnf.implies(p, b.exists[x2]);
                for v in rho.iter() {
                    let va = a.val[x1][a.sig.position(v).expect("ρ ⊆ side signature")];
                    let vb = b.val[x2][b.sig.position(v).expect("ρ ⊆ side signature")];
                    cnf.add(&[!p, !va, vb]);
                    cnf.add(&[!p, va, !vb]);
                }
            }
        }
        // forth: β(x1,x2) ∧ R1(x1,y1) → F(x2,y1), F(x2,y1) → ∃y2 R2(x2,y2) ∧ β(y1,y2)
        for x2 in 0..n2 {
            for y1 in 0..n1 {
                let f = cnf.fresh();
                let mut options = vec![!f];
                for y2 in 0..n2 {
                    let g = cnf.fresh();
                    cnf.implies(g, b.rel[x2][y2]);
                    cnf.implies(g, beta[y1][y2]);
                    options.push(g);
                }
                cnf.add(&options);
                for x1 in 0..n1 {
                    cnf.add(&[!beta[x1][x2], !a.rel[x1][y1], f]);
                }
            }
        }
        // back, symmetrically
        for x1 in 0..n1 {
            for y2 in 0..n2 {
                let f = cnf.fresh();
                let mut options = vec![!f];
                for y1 in 0..n1 {
                    let g = cnf.fresh();
                    cnf.implies(g, a.rel[x1][y1]);
                    cnf.implies(g, beta[y1][y2]);
                    options.push(g);
                }
                cnf.add(&options);
                for x2 in 0..n2 {
                    cnf.add(&[!beta[x1][x2], !b.rel[x2][y2], f]);
                }
            }
        }
        Bisim { pairs: beta }
    }

    pub(crate) fn decode(&self, cnf: &Cnf, k1: usize, k2: usize) -> BisimRelation {
        let mut r = BisimRelation::empty(k1, k2);
        for x1 in 0..k1 {
            for x2 in 0..k2 {
                if cnf.value(self.pairs[x1][x2]) {
                    r.insert(x1, x2);
                }
            }
        }
        r
    }
}

/// Satisfiability of a closure literal with every `◇`-pair treated as an
/// independent atom. Unsatisfiable here means unsatisfiable in any model.
pub(crate) fn propositionally_satisfiable(cl: &SubClosure, goal: Literal) -> bool {
    let mut cnf = Cnf::new();
    let mut truth: Vec<Lit> = Vec::with_capacity(cl.num_pairs());
    let lit = |truth: &[Lit], l: Literal| if l.positive { truth[l.pair] } else { !truth[l.pair] };
    let mut vars = std::collections::HashMap::new();
    for node in cl.nodes() {
        let t = match node {
            PairNode::False => cnf.constant(false),
            PairNode::True => cnf.constant(true),
            PairNode::Var(v) => *vars.entry(v.clone()).or_insert_with(|| cnf.fresh()),
            PairNode::And(a, b) => {
                let (la, lb) = (lit(&truth, *a), lit(&truth, *b));
                cnf.and_gate(la, lb)
            }
            PairNode::Diamond(_) => cnf.fresh(),
        };
        truth.push(t);
    }
    let g = lit(&truth, goal);
    cnf.solve(&[g])
}
