//! Finite sets with a k-generator action, the equivariance distance `d_S`
//! between them, and clopen-set marginals of the random stabilizer.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::PermTuple;
use crate::solutions::is_solution;
use crate::system::EquationSystem;
use crate::word::Word;
use crate::Rational;

/// A finite F_S-set: generator `i` acts by `σᵢ`. `certified` records that
/// every relator of the attached system acts trivially (a Γ-set).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSet {
    action: PermTuple,
    certified: bool,
}

impl GSet {
    pub fn new(action: PermTuple) -> Self {
        GSet {
            action,
            certified: false,
        }
    }

    /// Attaches a system; the set is certified iff the action satisfies it.
    pub fn with_system(action: PermTuple, system: &EquationSystem) -> Result<Self> {
        let certified = is_solution(system, &action)?;
        Ok(GSet { action, certified })
    }

    pub fn size(&self) -> usize {
        self.action.degree()
    }

    pub fn rank(&self) -> usize {
        self.action.k()
    }

    pub fn action(&self) -> &PermTuple {
        &self.action
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }
}

/// Largest domain size for which [`gset_distance`] searches exhaustively.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InjectionBudget {
    pub max_domain: usize,
}

impl Default for InjectionBudget {
    fn default() -> Self {
        InjectionBudget { max_domain: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GSetDistance {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    /// False when `value` is only an upper bound from the greedy heuristic.
    pub exact: bool,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::format_rational(r))
}

fn ordered<'a>(x: &'a GSet, y: &'a GSet) -> Result<(&'a GSet, &'a GSet)> {
    if x.rank() != y.rank() {
        return Err(Error::ArityMismatch {
            expected: x.rank(),
            got: y.rank(),
        });
    }
    Ok(if x.size() <= y.size() { (x, y) } else { (y, x) })
}

/// Points of `x` in BFS order over its Schreier graph, so that edges close
/// up as early as possible during the search.
fn search_order(x: &PermTuple) -> Vec<usize> {
    let n = x.degree();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for p in x.perms() {
                for u in [p.image(v), p.preimage(v)] {
                    if !seen[u] {
                        seen[u] = true;
                        q.push_back(u);
                    }
                }
            }
        }
    }
    order
}

struct Search<'a> {
    x: &'a PermTuple,
    y: &'a PermTuple,
    order: Vec<usize>,
    assign: Vec<usize>,
    used: Vec<bool>,
    best: usize,
}

const UNASSIGNED: usize = usize::MAX;

impl Search<'_> {
    /// Mismatches on edges of `x` that become fully assigned when `v ↦ target`.
    fn added_cost(&self, v: usize, target: usize) -> usize {
        let mut cost = 0;
        for (sx, sy) in self.x.perms().iter().zip(self.y.perms()) {
            let out = sx.image(v);
            if out == v {
                cost += (target != sy.image(target)) as usize;
            } else if self.assign[out] != UNASSIGNED {
                cost += (self.assign[out] != sy.image(target)) as usize;
            }
            let pred = sx.preimage(v);
            if pred != v && self.assign[pred] != UNASSIGNED {
                cost += (target != sy.image(self.assign[pred])) as usize;
            }
        }
        cost
    }

    fn run(&mut self, depth: usize, cost: usize) {
        if cost >= self.best {
            return;
        }
        if depth == self.order.len() {
            self.best = cost;
            return;
        }
        let v = self.order[depth];
        for target in 0..self.y.degree() {
            if self.used[target] {
                continue;
            }
            let c = cost + self.added_cost(v, target);
            if c >= self.best {
                continue;
            }
            self.assign[v] = target;
            self.used[target] = true;
            self.run(depth + 1, c);
            self.used[target] = false;
            self.assign[v] = UNASSIGNED;
            if self.best == 0 {
                return;
            }
        }
    }
}

fn greedy_cost(x: &PermTuple, y: &PermTuple) -> usize {
    let mut s = Search {
        x,
        y,
        order: search_order(x),
        assign: vec![UNASSIGNED; x.degree()],
        used: vec![false; y.degree()],
        best: usize::MAX,
    };
    let mut total = 0;
    for depth in 0..s.order.len() {
        let v = s.order[depth];
        let (c, t) = (0..y.degree())
            .filter(|&t| !s.used[t])
            .map(|t| (s.added_cost(v, t), t))
            .min()
            .expect("|X| <= |Y|");
        s.assign[v] = t;
        s.used[t] = true;
        total += c;
    }
    total
}

/// `d_S(X, Y) = min_f (1/|X|) Σ_s Σ_x [f(sx) ≠ s f(x)]` over injections
/// `f` from the smaller set into the larger, found exhaustively with
/// partial-cost pruning. Refuses when the smaller set exceeds the budget.
pub fn gset_distance(x: &GSet, y: &GSet, budget: &InjectionBudget) -> Result<Rational> {
    let (small, large) = ordered(x, y)?;
    if small.size() > budget.max_domain {
        return Err(Error::budget(
            "injection search domain",
            small.size() as u128,
            budget.max_domain as u128,
        ));
    }
    let upper = greedy_cost(&small.action, &large.action);
    let mut s = Search {
        x: &small.action,
        y: &large.action,
        order: search_order(&small.action),
        assign: vec![UNASSIGNED; small.size()],
        used: vec![false; large.size()],
        best: upper + 1,
    };
    s.run(0, 0);
    Ok(Rational::new(s.best.min(upper) as i64, small.size() as i64))
}

/// Exact within budget, otherwise the greedy upper bound, labeled as such.
pub fn gset_distance_or_bound(x: &GSet, y: &GSet, budget: &InjectionBudget) -> Result<GSetDistance> {
    match gset_distance(x, y, budget) {
        Ok(value) => Ok(GSetDistance { value, exact: true }),
        Err(e) if e.is_budget() => {
            let (small, large) = ordered(x, y)?;
            let cost = greedy_cost(&small.action, &large.action);
            Ok(GSetDistance {
                value: Rational::new(cost as i64, small.size() as i64),
                exact: false,
            })
        }
        Err(e) => Err(e),
    }
}

/// The clopen set `C_{A,B} = { H : H ∩ A = B }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginalSpec {
    a: Vec<Word>,
    b: Vec<Word>,
}

impl MarginalSpec {
    pub fn new(mut a: Vec<Word>, mut b: Vec<Word>) -> Result<Self> {
        a.sort();
        a.dedup();
        b.sort();
        b.dedup();
        if let Some(w) = b.iter().find(|w| a.binary_search(w).is_err()) {
            return Err(Error::NotSubset(format!("B contains {w}, which is not in A")));
        }
        Ok(MarginalSpec { a, b })
    }

    pub fn a(&self) -> &[Word] {
        &self.a
    }

    pub fn b(&self) -> &[Word] {
        &self.b
    }
}

/// `P_x(stab(x) ∩ A = B)` for `x` uniform in `X`.
pub fn random_stabilizer_marginal(x: &GSet, spec: &MarginalSpec) -> Result<Rational> {
    if let Some(w) = spec.a.iter().find(|w| w.rank() != x.rank()) {
        return Err(Error::AlphabetMismatch {
            left: w.rank(),
            right: x.rank(),
        });
    }
    let hits = (0..x.size())
        .filter(|&p| {
            spec.a
                .iter()
                .all(|w| (w.apply(&x.action, p) == p) == spec.b.binary_search(w).is_ok())
        })
        .count();
    Ok(Rational::new(hits as i64, x.size() as i64))
}
