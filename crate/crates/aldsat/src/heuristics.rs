//! Branching heuristics: iterated literal weights, look-ahead probing with
//! new-binary-clause scoring, and decision/direction selection.
//!
//! The weight recursion starts from h ≡ 1 and repeatedly redistributes mass:
//! a literal `x` collects, from every residual ternary clause `(x ∨ y ∨ z)`,
//! the product of the normalized weights of `¬y` and `¬z`, and from every
//! residual binary clause `(x ∨ y)` the normalized weight of `¬y` scaled by
//! `gamma`. Normalization divides by the mean weight `mu` over both polarities
//! of the variables present in the view, which keeps the table's magnitude
//! stable across iterations.
//!
//! A look-ahead probes each candidate variable in both directions: it
//! propagates the probe to fixpoint and scores the set of clauses that shrank
//! from three free literals to two and are still unsatisfied — the newly
//! created binary clauses. Each such clause contributes its weight (product or
//! sum of the table weights of its two complementary literals). A probe that
//! conflicts marks the opposite value as forced; both directions conflicting
//! marks the node dead.

use crate::cnf::{
    propagate, Assignment, Formula, Literal, PropagationStatus, ReducedView,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    /// New binary clause `(y ∨ z)` scores `h(¬y) · h(¬z)`.
    Product,
    /// New binary clause `(y ∨ z)` scores `h(¬y) + h(¬z)`.
    Sum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicConfig {
    pub combiner: Combiner,
    /// Weight-recursion depth; 0 keeps the all-ones table, making diffs plain
    /// new-binary-clause counts.
    pub iterations: u32,
    /// Relative importance of residual binary clauses in the recursion.
    pub gamma: f64,
    /// When on, a conflicting probe forces the opposite value (and both sides
    /// conflicting marks the node dead). When off, conflicts carry no
    /// inference and the conflicting side simply scores 0.
    pub failed_literal_detection: bool,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            combiner: Combiner::Product,
            iterations: 3,
            gamma: 3.3,
            failed_literal_detection: true,
        }
    }
}

pub const MAX_WEIGHT_ITERATIONS: u32 = 16;

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("residual clause of width {0}: only binary and ternary clauses are supported")]
    UnsupportedWidth(usize),
    #[error("gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("iteration count {0} exceeds the supported maximum {MAX_WEIGHT_ITERATIONS}")]
    TooManyIterations(u32),
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<(), WeightError> {
        if !(self.gamma > 0.0) {
            return Err(WeightError::NonPositiveGamma(self.gamma));
        }
        if self.iterations > MAX_WEIGHT_ITERATIONS {
            return Err(WeightError::TooManyIterations(self.iterations));
        }
        Ok(())
    }
}

/// Per-literal weights plus the mean `mu` of the returned table over both
/// polarities of the view's variables (1.0 for an empty view). The identity
/// `sum over view literals of h == 2 * view_vars * mu` holds by construction.
#[derive(Debug, Clone)]
pub struct LiteralWeightTable {
    h: Vec<f64>,
    mu: f64,
}

impl LiteralWeightTable {
    /// All-ones table for `num_vars` variables (the iteration-0 state).
    pub fn uniform(num_vars: u32) -> Self {
        Self {
            h: vec![1.0; 2 * (num_vars as usize + 1)],
            mu: 1.0,
        }
    }

    pub fn get(&self, lit: Literal) -> f64 {
        self.h[lit.index()]
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Uniformly scaled copy; decision selection is invariant under this.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            h: self.h.iter().map(|w| w * c).collect(),
            mu: self.mu * c,
        }
    }
}

/// Runs the weight recursion for `config.iterations` rounds over the view.
///
/// Views whose variables lose all weight mid-recursion (mean collapses to 0)
/// stop iterating early and return the last table; its `mu` is then 0, and
/// every diff computed from it is 0, which downstream selection handles by
/// falling back to index order.
pub fn compute_weights(
    view: &ReducedView,
    config: &HeuristicConfig,
) -> Result<LiteralWeightTable, WeightError> {
    config.validate()?;
    let width = view.max_width();
    if view.num_clauses() > 0 && !(2..=3).contains(&width) {
        return Err(WeightError::UnsupportedWidth(width));
    }
    if let Some(thin) = view.clauses().find(|c| c.lits.len() < 2) {
        return Err(WeightError::UnsupportedWidth(thin.lits.len()));
    }

    let size = 2 * (view.num_vars() as usize + 1);
    let mut h = vec![1.0f64; size];
    let mean = |h: &[f64]| -> f64 {
        if view.vars().is_empty() {
            return 1.0;
        }
        let total: f64 = view
            .vars()
            .iter()
            .map(|&v| {
                h[Literal::new(v, true).index()] + h[Literal::new(v, false).index()]
            })
            .sum();
        total / (2.0 * view.vars().len() as f64)
    };

    for _ in 0..config.iterations {
        let mu = mean(&h);
        if !(mu > 0.0) {
            break;
        }
        let mut next = vec![0.0f64; size];
        for clause in view.clauses() {
            match clause.lits {
                &[a, b] => {
                    next[a.index()] += config.gamma * h[(!b).index()] / mu;
                    next[b.index()] += config.gamma * h[(!a).index()] / mu;
                }
                &[a, b, c] => {
                    let (na, nb, nc) = (
                        h[(!a).index()] / mu,
                        h[(!b).index()] / mu,
                        h[(!c).index()] / mu,
                    );
                    next[a.index()] += nb * nc;
                    next[b.index()] += na * nc;
                    next[c.index()] += na * nb;
                }
                _ => unreachable!("width checked above"),
            }
        }
        h = next;
    }
    let mu = mean(&h);
    Ok(LiteralWeightTable { h, mu })
}

/// Weight of a residual binary clause `(y ∨ z)`: the combiner applied to the
/// table weights of `¬y` and `¬z`.
pub fn clause_weight(
    lits: &[Literal],
    table: &LiteralWeightTable,
    config: &HeuristicConfig,
) -> f64 {
    assert_eq!(lits.len(), 2, "clause weights are defined on binary clauses");
    let a = table.get(!lits[0]);
    let b = table.get(!lits[1]);
    match config.combiner {
        Combiner::Product => a * b,
        Combiner::Sum => a + b,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forced {
    None,
    MustTrue,
    MustFalse,
    BothFail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarLookahead {
    pub var: u32,
    /// Score of probing the variable false; 0.0 if that probe conflicted.
    pub diff_false: f64,
    /// Score of probing the variable true; 0.0 if that probe conflicted.
    pub diff_true: f64,
    pub forced: Forced,
}

impl VarLookahead {
    pub fn product(&self) -> f64 {
        self.diff_false * self.diff_true
    }

    pub fn sum(&self) -> f64 {
        self.diff_false + self.diff_true
    }
}

/// Look-ahead results for every variable of the probed view, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct LookaheadResult {
    entries: Vec<VarLookahead>,
}

impl LookaheadResult {
    pub fn entries(&self) -> &[VarLookahead] {
        &self.entries
    }

    pub fn get(&self, var: u32) -> Option<&VarLookahead> {
        self.entries
            .binary_search_by_key(&var, |e| e.var)
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Some variable fails in both directions: the node is unsatisfiable.
    pub fn has_dead_end(&self) -> bool {
        self.entries.iter().any(|e| e.forced == Forced::BothFail)
    }

    /// Literals forced by single-sided failures, ascending by variable.
    pub fn forced_literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.entries.iter().filter_map(|e| match e.forced {
            Forced::MustTrue => Some(Literal::new(e.var, true)),
            Forced::MustFalse => Some(Literal::new(e.var, false)),
            _ => None,
        })
    }
}

/// Probes both values of every variable occurring in the current residual
/// view, in ascending variable order, without changing the assignment.
///
/// Each probe propagates to fixpoint; consistent probes score the weighted
/// count of clauses that shrank from three free literals to two (and stayed
/// unsatisfied). The diffs describe the node as it was on entry: forced
/// literals discovered here are reported, not applied.
pub fn lookahead_all(
    formula: &Formula,
    assignment: &mut Assignment,
    table: &LiteralWeightTable,
    config: &HeuristicConfig,
) -> LookaheadResult {
    let view = formula.reduced_view(assignment);
    lookahead_on_view(formula, assignment, &view, table, config)
}

/// [`lookahead_all`] against a residual view the caller already built
/// (must describe `assignment`'s current state).
pub(crate) fn lookahead_on_view(
    formula: &Formula,
    assignment: &mut Assignment,
    view: &ReducedView,
    table: &LiteralWeightTable,
    config: &HeuristicConfig,
) -> LookaheadResult {
    let mut entries = Vec::with_capacity(view.vars().len());
    for &var in view.vars() {
        let mut diff = [0.0f64; 2];
        let mut failed = [false; 2];
        for (slot, value) in [(0usize, false), (1, true)] {
            let mark = assignment.mark();
            match propagate(formula, assignment, Literal::new(var, value)) {
                PropagationStatus::Conflict => failed[slot] = true,
                PropagationStatus::Consistent => {
                    diff[slot] =
                        score_new_binaries(formula, assignment, view, mark, table, config);
                }
            }
            assignment.undo_to(mark);
        }
        let forced = if !config.failed_literal_detection {
            Forced::None
        } else {
            match (failed[0], failed[1]) {
                (false, false) => Forced::None,
                (true, false) => Forced::MustTrue,
                (false, true) => Forced::MustFalse,
                (true, true) => Forced::BothFail,
            }
        };
        entries.push(VarLookahead {
            var,
            diff_false: diff[0],
            diff_true: diff[1],
            forced,
        });
    }
    LookaheadResult { entries }
}

/// Sums the weights of clauses that the probe shrank from ternary to binary.
///
/// Scans the occurrence lists of every literal falsified by the probe (the
/// trail suffix after `mark`). A clause counts if it had three free literals
/// at node entry and now has exactly two, none satisfied. A clause never
/// counts twice: a second falsified literal would leave it with fewer than
/// two free literals, and unit propagation satisfies or conflicts it.
fn score_new_binaries(
    formula: &Formula,
    assignment: &Assignment,
    node_view: &ReducedView,
    mark: usize,
    table: &LiteralWeightTable,
    config: &HeuristicConfig,
) -> f64 {
    let mut total = 0.0;
    for &assigned in &assignment.trail()[mark..] {
        for &ci in formula.occurrences(!assigned) {
            if node_view.residual_width(ci as usize) != 3 {
                continue;
            }
            let mut free = [None; 2];
            let mut free_count = 0;
            let mut satisfied = false;
            for &l in formula.clauses()[ci as usize].lits() {
                match assignment.literal_status(l) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        if free_count < 2 {
                            free[free_count] = Some(l);
                        }
                        free_count += 1;
                    }
                }
            }
            if !satisfied && free_count == 2 {
                total += clause_weight(
                    &[free[0].unwrap(), free[1].unwrap()],
                    table,
                    config,
                );
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub variable: u32,
    /// The branch explored first: the value whose probe scored the smaller
    /// diff (ties pick false).
    pub first_value: bool,
}

/// Picks the unforced variable maximizing `diff_false * diff_true`, breaking
/// ties by larger `diff_false + diff_true`, then by lowest variable index.
/// Returns `None` when every probed variable is forced (or there are none).
pub fn select_decision(result: &LookaheadResult) -> Option<Decision> {
    select_decision_where(result, |_| true)
}

/// [`select_decision`] restricted to variables accepted by `keep`.
pub fn select_decision_where(
    result: &LookaheadResult,
    mut keep: impl FnMut(u32) -> bool,
) -> Option<Decision> {
    let mut best: Option<&VarLookahead> = None;
    for e in &result.entries {
        if e.forced != Forced::None || !keep(e.var) {
            continue;
        }
        let better = match best {
            None => true,
            // Entries ascend by variable, so strict comparisons keep the
            // lowest index on ties.
            Some(b) => {
                e.product() > b.product()
                    || (e.product() == b.product() && e.sum() > b.sum())
            }
        };
        if better {
            best = Some(e);
        }
    }
    best.map(|e| Decision {
        variable: e.var,
        first_value: e.diff_true < e.diff_false,
    })
}
