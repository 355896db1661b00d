//! Strategy-ordered tree search: visit orders over the top `d` branching
//! levels (the jump depth), a replaying descent engine with dead-prefix
//! memoization, plain DFS below the jump depth, and exhaustive mapping of
//! which depth-`d` subtrees contain solutions.
//!
//! A path through the top of the tree is summarized by a code of `d` bits,
//! most significant bit first: bit 0 follows the heuristic's preferred branch,
//! bit 1 takes the opposite branch (a discrepancy). Codes address branch
//! decisions, not raw tree levels — literals forced at a node (by units or
//! failed-literal probes) consume no bit.

use crate::bits::BitSet;
use crate::cnf::{propagate, Assignment, Formula, Literal, PropagationStatus};
use crate::heuristics::{
    compute_weights, lookahead_on_view, select_decision_where, HeuristicConfig,
    WeightError,
};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Dfs,
    Lds,
    Ilds,
    Dds,
    Alds,
}

impl StrategyKind {
    /// The strategies whose orders are permutations (no repeats), i.e. all
    /// but `Lds`.
    pub const PERMUTATIONS: [StrategyKind; 4] = [
        StrategyKind::Dfs,
        StrategyKind::Ilds,
        StrategyKind::Dds,
        StrategyKind::Alds,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Dfs => "dfs",
            StrategyKind::Lds => "lds",
            StrategyKind::Ilds => "ilds",
            StrategyKind::Dds => "dds",
            StrategyKind::Alds => "alds",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dfs" => Ok(StrategyKind::Dfs),
            "lds" => Ok(StrategyKind::Lds),
            "ilds" => Ok(StrategyKind::Ilds),
            "dds" => Ok(StrategyKind::Dds),
            "alds" => Ok(StrategyKind::Alds),
            other => Err(format!(
                "unknown strategy {other:?} (expected dfs, lds, ilds, dds, or alds)"
            )),
        }
    }
}

/// A (partial) branch-decision path: `len` bits of `bits`, most significant
/// bit = the root-level decision. The all-zero code is the leftmost path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathCode {
    pub bits: u32,
    pub len: u8,
}

impl PathCode {
    pub fn new(bits: u32, len: u8) -> Self {
        assert!(len <= 32);
        assert!(len == 32 || bits < 1u32 << len, "code wider than its length");
        Self { bits, len }
    }

    pub fn leaf_index(self) -> u32 {
        self.bits
    }

    /// 1-based level (from the root) of the deepest discrepancy; 0 for the
    /// all-left code.
    pub fn deepest_discrepancy_level(self) -> u32 {
        if self.bits == 0 {
            0
        } else {
            self.len as u32 - self.bits.trailing_zeros()
        }
    }
}

/// Number of right (discrepancy) branches on the path.
pub fn discrepancies(code: PathCode) -> u32 {
    code.bits.count_ones()
}

/// Enumeration guard for visit orders and subtree maps.
pub const MAX_JUMP_DEPTH: u8 = 24;
/// The repeating order has `2^(d-1) * (d + 2)` entries; past this depth the
/// materialized vector stops being reasonable.
pub const MAX_LDS_DEPTH: u8 = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("depth {0} exceeds the enumeration guard {MAX_JUMP_DEPTH}")]
    DepthTooLarge(u8),
    #[error("lds at depth {0} would materialize 2^(d-1)*(d+2) entries; the guard is {MAX_LDS_DEPTH}")]
    LdsDepthTooLarge(u8),
}

/// The order in which a strategy visits the `2^d` depth-`d` subtrees,
/// as leaf indices.
///
/// - `dfs`: leaf index ascending (pure left-to-right).
/// - `ilds`: discrepancy count ascending, index ascending within a count.
/// - `alds`: discrepancy count ascending, index *descending* within a count
///   (equal-discrepancy paths whose discrepancies sit closer to the root
///   come first).
/// - `dds`: deepest-discrepancy level ascending (0 for the all-left leaf),
///   then discrepancy count ascending, then index ascending.
/// - `lds`: the classic repeating scheme — for each k = 0..=d, every leaf
///   with at most k discrepancies in index order. Covers every leaf, with
///   repeats; returned for cost analysis, not solving.
pub fn visit_order(kind: StrategyKind, d: u8) -> Result<Vec<u32>, OrderError> {
    if d > MAX_JUMP_DEPTH {
        return Err(OrderError::DepthTooLarge(d));
    }
    if kind == StrategyKind::Lds && d > MAX_LDS_DEPTH {
        return Err(OrderError::LdsDepthTooLarge(d));
    }
    let n: u32 = 1 << d;
    let mut order: Vec<u32> = (0..n).collect();
    match kind {
        StrategyKind::Dfs => {}
        StrategyKind::Ilds => order.sort_unstable_by_key(|&v| (v.count_ones(), v)),
        StrategyKind::Alds => {
            order.sort_unstable_by_key(|&v| (v.count_ones(), std::cmp::Reverse(v)))
        }
        StrategyKind::Dds => order.sort_unstable_by_key(|&v| {
            (
                PathCode::new(v, d).deepest_discrepancy_level(),
                v.count_ones(),
                v,
            )
        }),
        StrategyKind::Lds => {
            order.clear();
            for k in 0..=u32::from(d) {
                order.extend((0..n).filter(|v| v.count_ones() <= k));
            }
        }
    }
    Ok(order)
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub heuristic: HeuristicConfig,
    /// Maximum number of node evaluations before the search gives up.
    pub budget: u64,
    /// Memoize evaluated prefixes so descents sharing a dead prefix are
    /// skipped. Disabling bypasses the memo entirely (every descent fresh);
    /// results are identical, only cost changes.
    pub skip_dead_prefixes: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            heuristic: HeuristicConfig::default(),
            budget: 100_000_000,
            skip_dead_prefixes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    /// Contains a model indexed by `var - 1`.
    Satisfiable(Vec<bool>),
    Unsatisfiable,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Subtree descents that stayed alive to the jump depth (or found a model
    /// above it). Dead and skipped prefixes are not entered.
    pub subtrees_entered: u64,
    /// 1-based position of the solving descent among entered subtrees.
    pub rank_of_first_solution: Option<u64>,
    /// Fresh node evaluations (memoized replays do not re-count).
    pub nodes_expanded: u64,
}

/// Which depth-`d` subtrees contain at least one satisfying assignment
/// (`solution_bits`), and which were entered at all (`entered_bits`,
/// the complement of dead-prefix coverage).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreeMap {
    pub depth: u8,
    pub solution_bits: BitSet,
    pub entered_bits: BitSet,
    pub nodes_expanded: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("strategy {0} repeats subtrees and cannot drive the solver")]
    RepeatingStrategy(StrategyKind),
    #[error("node budget of {0} evaluations exhausted")]
    BudgetExhausted(u64),
    #[error("subtree mapping requires depth at least 1")]
    ZeroDepthMap,
}

#[derive(Debug, Clone, PartialEq)]
enum NodeOutcome {
    /// Every clause satisfied; any completion of the assignment is a model.
    Satisfied,
    /// Conflict, or some variable fails both probe directions.
    Dead,
    Decision {
        variable: u32,
        first_value: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct NodeEval {
    /// Literals propagated at this node before branching (residual units and
    /// single-sided probe failures), in application order. Replaying them
    /// from the same prefix state reproduces the node deterministically.
    forced: Vec<Literal>,
    outcome: NodeOutcome,
}

enum DescentEnd {
    /// All `d` bits consumed; assignment sits at the subtree root.
    ReachedJumpDepth,
    /// Model found while consuming the prefix; assignment left at the model.
    SatisfiedAbove,
    /// Prefix died (now or in a memoized earlier descent); assignment unwound.
    DeadPrefix,
}

struct Searcher<'f> {
    formula: &'f Formula,
    config: &'f SearchConfig,
    assignment: Assignment,
    nodes: u64,
    memo: HashMap<(u8, u32), NodeEval>,
}

impl<'f> Searcher<'f> {
    fn new(formula: &'f Formula, config: &'f SearchConfig) -> Self {
        Self {
            formula,
            config,
            assignment: Assignment::new(formula.num_vars()),
            nodes: 0,
            memo: HashMap::new(),
        }
    }

    /// Propagates a forced literal. `Ok(true)` if it extended the trail,
    /// `Ok(false)` if it was already satisfied, `Err(())` on conflict or if
    /// it was already falsified.
    fn apply_forced(&mut self, lit: Literal) -> Result<bool, ()> {
        match self.assignment.literal_status(lit) {
            Some(true) => Ok(false),
            Some(false) => Err(()),
            None => match propagate(self.formula, &mut self.assignment, lit) {
                PropagationStatus::Conflict => Err(()),
                PropagationStatus::Consistent => Ok(true),
            },
        }
    }

    /// Evaluates the node at the current assignment: propagates residual
    /// units, computes weights, probes every view variable, applies forced
    /// literals, and selects a branch variable — restarting on the shrunken
    /// view only when every probed variable was forced. Counts one node
    /// against the budget.
    fn evaluate_fresh(&mut self) -> Result<NodeEval, SearchError> {
        self.nodes += 1;
        if self.nodes > self.config.budget {
            return Err(SearchError::BudgetExhausted(self.config.budget));
        }
        let mut forced = Vec::new();
        loop {
            let view = self.formula.reduced_view(&self.assignment);
            if view.is_empty() {
                return Ok(NodeEval {
                    forced,
                    outcome: NodeOutcome::Satisfied,
                });
            }
            let units: Vec<Literal> = view
                .clauses()
                .filter(|c| c.lits.len() == 1)
                .map(|c| c.lits[0])
                .collect();
            if !units.is_empty() {
                for lit in units {
                    match self.apply_forced(lit) {
                        Ok(true) => forced.push(lit),
                        Ok(false) => {}
                        Err(()) => {
                            return Ok(NodeEval {
                                forced,
                                outcome: NodeOutcome::Dead,
                            })
                        }
                    }
                }
                continue;
            }
            let table = compute_weights(&view, &self.config.heuristic)?;
            let result = lookahead_on_view(
                self.formula,
                &mut self.assignment,
                &view,
                &table,
                &self.config.heuristic,
            );
            if result.has_dead_end() {
                return Ok(NodeEval {
                    forced,
                    outcome: NodeOutcome::Dead,
                });
            }
            for lit in result.forced_literals().collect::<Vec<_>>() {
                match self.apply_forced(lit) {
                    Ok(true) => forced.push(lit),
                    Ok(false) => {}
                    Err(()) => {
                        return Ok(NodeEval {
                            forced,
                            outcome: NodeOutcome::Dead,
                        })
                    }
                }
            }
            // Select from this pass's diffs, restricted to variables the
            // forced propagations left free.
            if let Some(decision) =
                select_decision_where(&result, |v| self.assignment.is_free(v))
            {
                return Ok(NodeEval {
                    forced,
                    outcome: NodeOutcome::Decision {
                        variable: decision.variable,
                        first_value: decision.first_value,
                    },
                });
            }
            // Everything probed was forced away; re-evaluate the smaller view.
        }
    }

    /// Fetches or computes the node evaluation for the current prefix,
    /// leaving the assignment advanced past the node's forced literals
    /// (except for dead nodes, which the caller unwinds).
    fn node_at_prefix(&mut self, key: (u8, u32)) -> Result<NodeEval, SearchError> {
        if self.config.skip_dead_prefixes {
            if let Some(hit) = self.memo.get(&key).cloned() {
                if hit.outcome != NodeOutcome::Dead {
                    for &lit in &hit.forced {
                        // Replay from the identical prefix state is
                        // deterministic, so forced literals reapply cleanly.
                        let replayed = self.apply_forced(lit);
                        debug_assert_eq!(replayed, Ok(true), "forced replay diverged");
                        if replayed.is_err() {
                            return Ok(NodeEval {
                                forced: hit.forced.clone(),
                                outcome: NodeOutcome::Dead,
                            });
                        }
                    }
                }
                return Ok(hit);
            }
        }
        let eval = self.evaluate_fresh()?;
        if self.config.skip_dead_prefixes {
            self.memo.insert(key, eval.clone());
        }
        Ok(eval)
    }

    /// Replays `code`'s branch decisions from the root. On `DeadPrefix` the
    /// assignment is unwound to the pre-descent mark; otherwise it is left
    /// advanced and the caller unwinds.
    fn descend(&mut self, code: u32, depth: u8) -> Result<(DescentEnd, usize), SearchError> {
        let mark = self.assignment.mark();
        for level in 0..depth {
            let prefix = code >> (depth - level);
            let eval = match self.node_at_prefix((level, prefix)) {
                Ok(eval) => eval,
                Err(e) => {
                    self.assignment.undo_to(mark);
                    return Err(e);
                }
            };
            match eval.outcome {
                NodeOutcome::Dead => {
                    self.assignment.undo_to(mark);
                    return Ok((DescentEnd::DeadPrefix, mark));
                }
                NodeOutcome::Satisfied => return Ok((DescentEnd::SatisfiedAbove, mark)),
                NodeOutcome::Decision {
                    variable,
                    first_value,
                } => {
                    let bit = code >> (depth - 1 - level) & 1;
                    let value = if bit == 0 { first_value } else { !first_value };
                    let child = (level + 1, code >> (depth - 1 - level));
                    if propagate(
                        self.formula,
                        &mut self.assignment,
                        Literal::new(variable, value),
                    ) == PropagationStatus::Conflict
                    {
                        if self.config.skip_dead_prefixes {
                            self.memo.insert(
                                child,
                                NodeEval {
                                    forced: Vec::new(),
                                    outcome: NodeOutcome::Dead,
                                },
                            );
                        }
                        self.assignment.undo_to(mark);
                        return Ok((DescentEnd::DeadPrefix, mark));
                    }
                }
            }
        }
        Ok((DescentEnd::ReachedJumpDepth, mark))
    }

    /// Plain depth-first DPLL from the current assignment. `Ok(true)` leaves
    /// the assignment at a model; `Ok(false)` restores it.
    fn dpll(&mut self) -> Result<bool, SearchError> {
        let mark = self.assignment.mark();
        let eval = self.evaluate_fresh()?;
        match eval.outcome {
            NodeOutcome::Satisfied => Ok(true),
            NodeOutcome::Dead => {
                self.assignment.undo_to(mark);
                Ok(false)
            }
            NodeOutcome::Decision {
                variable,
                first_value,
            } => {
                for value in [first_value, !first_value] {
                    let branch_mark = self.assignment.mark();
                    if propagate(
                        self.formula,
                        &mut self.assignment,
                        Literal::new(variable, value),
                    ) == PropagationStatus::Conflict
                    {
                        self.assignment.undo_to(branch_mark);
                        continue;
                    }
                    if self.dpll()? {
                        return Ok(true);
                    }
                    self.assignment.undo_to(branch_mark);
                }
                self.assignment.undo_to(mark);
                Ok(false)
            }
        }
    }

    fn extract_model(&self) -> Vec<bool> {
        let model = self.assignment.to_model();
        debug_assert!(self.formula.is_satisfied_by(&model));
        model
    }
}

/// Searches for a model, visiting depth-`depth` subtrees in the strategy's
/// order and running DFS inside each. Deterministic for a given formula and
/// configuration. `depth` 0 degenerates to plain DFS from the root.
pub fn solve(
    formula: &Formula,
    config: &SearchConfig,
    kind: StrategyKind,
    depth: u8,
) -> Result<SolveReport, SearchError> {
    if kind == StrategyKind::Lds {
        return Err(SearchError::RepeatingStrategy(kind));
    }
    config.heuristic.validate()?;
    let order = visit_order(kind, depth)?;
    let mut searcher = Searcher::new(formula, config);
    let mut entered = 0u64;
    let report = |status, entered, rank, nodes| SolveReport {
        status,
        subtrees_entered: entered,
        rank_of_first_solution: rank,
        nodes_expanded: nodes,
    };
    for &code in &order {
        let (end, mark) = match searcher.descend(code, depth) {
            Ok(result) => result,
            Err(SearchError::BudgetExhausted(_)) => {
                return Ok(report(
                    SolveStatus::BudgetExhausted,
                    entered,
                    None,
                    searcher.nodes,
                ))
            }
            Err(e) => return Err(e),
        };
        match end {
            DescentEnd::DeadPrefix => continue,
            DescentEnd::SatisfiedAbove => {
                entered += 1;
                let model = searcher.extract_model();
                return Ok(report(
                    SolveStatus::Satisfiable(model),
                    entered,
                    Some(entered),
                    searcher.nodes,
                ));
            }
            DescentEnd::ReachedJumpDepth => {
                entered += 1;
                match searcher.dpll() {
                    Ok(true) => {
                        let model = searcher.extract_model();
                        return Ok(report(
                            SolveStatus::Satisfiable(model),
                            entered,
                            Some(entered),
                            searcher.nodes,
                        ));
                    }
                    Ok(false) => searcher.assignment.undo_to(mark),
                    Err(SearchError::BudgetExhausted(_)) => {
                        return Ok(report(
                            SolveStatus::BudgetExhausted,
                            entered,
                            None,
                            searcher.nodes,
                        ))
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(report(
        SolveStatus::Unsatisfiable,
        entered,
        None,
        searcher.nodes,
    ))
}

/// Exhaustively determines, for every depth-`depth` subtree, whether it
/// contains a satisfying assignment. Budget exhaustion is an error here (a
/// partial map is not meaningful).
pub fn map_subtrees(
    formula: &Formula,
    config: &SearchConfig,
    depth: u8,
) -> Result<SubtreeMap, SearchError> {
    if depth == 0 {
        return Err(SearchError::ZeroDepthMap);
    }
    if depth > MAX_JUMP_DEPTH {
        return Err(SearchError::Order(OrderError::DepthTooLarge(depth)));
    }
    config.heuristic.validate()?;
    let leaves = 1usize << depth;
    let mut solution_bits = BitSet::new(leaves);
    let mut entered_bits = BitSet::new(leaves);
    let mut searcher = Searcher::new(formula, config);
    for code in 0..leaves as u32 {
        let (end, mark) = searcher.descend(code, depth)?;
        match end {
            DescentEnd::DeadPrefix => {}
            DescentEnd::SatisfiedAbove => {
                entered_bits.set(code as usize, true);
                solution_bits.set(code as usize, true);
                searcher.assignment.undo_to(mark);
            }
            DescentEnd::ReachedJumpDepth => {
                entered_bits.set(code as usize, true);
                if searcher.dpll()? {
                    solution_bits.set(code as usize, true);
                }
                searcher.assignment.undo_to(mark);
            }
        }
    }
    Ok(SubtreeMap {
        depth,
        solution_bits,
        entered_bits,
        nodes_expanded: searcher.nodes,
    })
}
