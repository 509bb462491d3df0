//! Explicit canonical enumeration of small models.
//!
//! Only feasible for a handful of worlds, but it needs nothing beyond the
//! model checker, so it doubles as a cross-check for the SAT engine.

use crate::bits::BitSet;
use crate::formula::{Signature, SubClosure};
use crate::kripke::{closure_extensions, is_rooted_at, is_weakly_transitive, Frame, Model};

/// Calls `visit` on every rooted weakly transitive model with exactly `n`
/// worlds over `sig`, rooted at 0, with the non-root valuations sorted.
/// Stops early when `visit` returns `true`; returns whether it did.
pub fn for_each_wk4_model(n: usize, sig: &Signature, mut visit: impl FnMut(&Model) -> bool) -> bool {
    assert!(n >= 1 && n * n <= 25, "explicit enumeration is limited to 5 worlds");
    let vals = 1usize << sig.len();
    let vars: Vec<&str> = sig.iter().collect();
    for mask in 0u64..(1u64 << (n * n)) {
        let mut f = Frame::new(n);
        for x in 0..n {
            for y in 0..n {
                if mask >> (x * n + y) & 1 == 1 {
                    f.add_edge(x, y);
                }
            }
        }
        if !(1..n).all(|y| f.has_edge(0, y)) || !is_weakly_transitive(&f) || !is_rooted_at(&f, 0) {
            continue;
        }
        let mut assignment = vec![0usize; n];
        loop {
            let mut m = Model::new(f.clone(), sig.clone());
            for (x, &a) in assignment.iter().enumerate() {
                for (i, v) in vars.iter().enumerate() {
                    if a >> i & 1 == 1 {
                        m.set(v, x, true).expect("in range");
                    }
                }
            }
            if visit(&m) {
                return true;
            }
            if !next_sorted_tail(&mut assignment, vals) {
                break;
            }
        }
    }
    false
}

/// Advances `a` so that `a[1..]` stays non-decreasing; `a[0]` is free.
fn next_sorted_tail(a: &mut [usize], vals: usize) -> bool {
    let n = a.len();
    // odometer over a[0] (fastest) then the sorted tail
    if a[0] + 1 < vals {
        a[0] += 1;
        return true;
    }
    a[0] = 0;
    let mut i = n;
    while i > 1 {
        i -= 1;
        if a[i] + 1 < vals {
            let v = a[i] + 1;
            for slot in a.iter_mut().skip(i) {
                *slot = v;
            }
            // the tail must be sorted; positions before i are unchanged
            return true;
        }
    }
    false
}

/// A world kind inside a cluster: valuation bits over a signature plus a
/// reflexivity flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Kind {
    pub val: usize,
    pub reflexive: bool,
}

pub fn kinds(sig_len: usize) -> Vec<Kind> {
    (0..1usize << sig_len)
        .flat_map(|val| [false, true].map(|reflexive| Kind { val, reflexive }))
        .collect()
}

/// The cluster with `counts[k]` worlds of `kinds[k]`; world 0 has kind `root`
/// (which must have a nonzero count).
pub fn cluster_model(sig: &Signature, kinds: &[Kind], counts: &[usize], root: usize) -> Model {
    assert!(counts[root] > 0);
    let mut order = vec![root];
    for (k, &c) in counts.iter().enumerate() {
        let extra = if k == root { c - 1 } else { c };
        order.extend(std::iter::repeat(k).take(extra));
    }
    let n = order.len();
    let mut f = Frame::difference(n);
    for (x, &k) in order.iter().enumerate() {
        if kinds[k].reflexive {
            f.add_edge(x, x);
        }
    }
    let mut m = Model::new(f, sig.clone());
    let vars: Vec<&str> = sig.iter().collect();
    for (x, &k) in order.iter().enumerate() {
        for (i, v) in vars.iter().enumerate() {
            if kinds[k].val >> i & 1 == 1 {
                m.set(v, x, true).expect("in range");
            }
        }
    }
    m
}

/// Calls `visit(counts, root)` on every count vector over `num_kinds` kinds
/// with entries `≤ cap` summing to `total`, and every root kind present.
pub fn for_each_cluster(num_kinds: usize, cap: usize, total: usize, mut visit: impl FnMut(&[usize], usize) -> bool) -> bool {
    fn rec(counts: &mut Vec<usize>, k: usize, left: usize, cap: usize, visit: &mut dyn FnMut(&[usize], usize) -> bool) -> bool {
        if k == counts.len() {
            if left != 0 {
                return false;
            }
            for root in 0..counts.len() {
                if counts[root] > 0 && visit(counts, root) {
                    return true;
                }
            }
            return false;
        }
        let room = cap * (counts.len() - k - 1);
        for c in 0..=cap.min(left) {
            if left - c > room {
                continue;
            }
            counts[k] = c;
            if rec(counts, k + 1, left - c, cap, visit) {
                return true;
            }
        }
        counts[k] = 0;
        false
    }
    let mut counts = vec![0; num_kinds];
    rec(&mut counts, 0, total, cap, &mut visit)
}

/// Whether pair `lit` of `cl` holds at world 0.
pub(crate) fn holds_at_root(m: &Model, cl: &SubClosure, pair: usize, positive: bool) -> bool {
    let ext: Vec<BitSet> = closure_extensions(m, cl).expect("signature covers the closure");
    ext[pair].contains(0) == positive
}
