//! Core CNF types: literals, clauses, formulas, assignments, unit propagation,
//! residual views, and the random k-SAT generator.

use crate::rng::Xorshift64Star;
use std::fmt;
use thiserror::Error;

/// A literal over a 1-based variable index. Encoded as `var << 1 | negated`
/// so both polarities of a variable index densely into weight/occurrence tables.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal(u32);

impl Literal {
    pub fn new(var: u32, positive: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal(var << 1 | u32::from(!positive))
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negated(self) -> Self {
        Literal(self.0 ^ 1)
    }

    /// Dense table index; tables are sized `2 * (num_vars + 1)`.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Inverse of [`Literal::index`].
    pub fn from_index(index: usize) -> Self {
        let lit = Literal(index as u32);
        assert!(lit.var() >= 1);
        lit
    }

    /// `0` is the DIMACS clause terminator, not a literal.
    pub fn from_dimacs(value: i32) -> Option<Self> {
        if value == 0 {
            return None;
        }
        Some(Self::new(value.unsigned_abs(), value > 0))
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var() as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;
    fn not(self) -> Literal {
        self.negated()
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A non-empty clause with no duplicate literals and no complementary pair.
#[derive(Clone, PartialEq, Eq)]
pub struct Clause {
    lits: Vec<Literal>,
}

/// Result of normalizing a raw literal list into a [`Clause`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Clause {
        clause: Clause,
        duplicates_removed: usize,
    },
    /// Contains a complementary pair; always satisfied, dropped by callers.
    Tautology,
    Empty,
}

impl Clause {
    /// Deduplicates repeated literals (first occurrence kept, order otherwise
    /// preserved) and rejects tautologies and empty clauses.
    pub fn normalized(lits: &[Literal]) -> Normalized {
        let mut seen: Vec<Literal> = Vec::with_capacity(lits.len());
        let mut duplicates_removed = 0;
        for &lit in lits {
            if seen.contains(&!lit) {
                return Normalized::Tautology;
            }
            if seen.contains(&lit) {
                duplicates_removed += 1;
            } else {
                seen.push(lit);
            }
        }
        if seen.is_empty() {
            return Normalized::Empty;
        }
        Normalized::Clause {
            clause: Clause { lits: seen },
            duplicates_removed,
        }
    }

    pub fn lits(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, lit) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{lit}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("clause {clause} references variable {var} but the formula has {num_vars} variables")]
    VarOutOfRange {
        clause: usize,
        var: u32,
        num_vars: u32,
    },
}

/// An immutable CNF formula with precomputed occurrence lists.
///
/// Occurrence lists map each literal to the ascending indices of clauses that
/// contain it; all propagation and look-ahead scans run over them in that
/// order, which fixes the deterministic trail order everything downstream
/// (replays, caches, reports) relies on.
#[derive(Clone)]
pub struct Formula {
    num_vars: u32,
    clauses: Vec<Clause>,
    comments: Vec<String>,
    occ: Vec<Vec<u32>>,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars
            && self.clauses == other.clauses
            && self.comments == other.comments
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Formula")
            .field("num_vars", &self.num_vars)
            .field("clauses", &self.clauses)
            .finish()
    }
}

impl Formula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        for (ci, clause) in clauses.iter().enumerate() {
            for lit in clause.lits() {
                if lit.var() > num_vars {
                    return Err(FormulaError::VarOutOfRange {
                        clause: ci,
                        var: lit.var(),
                        num_vars,
                    });
                }
            }
        }
        let mut occ = vec![Vec::new(); 2 * (num_vars as usize + 1)];
        for (ci, clause) in clauses.iter().enumerate() {
            for lit in clause.lits() {
                occ[lit.index()].push(ci as u32);
            }
        }
        Ok(Self {
            num_vars,
            clauses,
            comments: Vec::new(),
            occ,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn push_comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    /// Ascending clause indices containing `lit`.
    pub fn occurrences(&self, lit: Literal) -> &[u32] {
        &self.occ[lit.index()]
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    /// `values[var - 1]` gives the variable's truth value.
    pub fn is_satisfied_by(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.lits()
                .iter()
                .any(|l| values[(l.var() - 1) as usize] == l.is_positive())
        })
    }

    pub fn reduced_view(&self, assignment: &Assignment) -> ReducedView {
        let mut lits = Vec::new();
        let mut spans = Vec::new();
        let mut widths = vec![0u8; self.clauses.len()];
        let mut in_view = vec![false; self.num_vars as usize + 1];
        'clauses: for (ci, clause) in self.clauses.iter().enumerate() {
            let start = lits.len() as u32;
            for &lit in clause.lits() {
                match assignment.literal_status(lit) {
                    Some(true) => {
                        lits.truncate(start as usize);
                        continue 'clauses;
                    }
                    Some(false) => {}
                    None => lits.push(lit),
                }
            }
            let len = lits.len() as u32 - start;
            debug_assert!(len > 0, "falsified clause in reduced view");
            widths[ci] = len as u8;
            spans.push(ClauseSpan {
                start,
                len: len as u8,
                source: ci as u32,
            });
        }
        let mut vars = Vec::new();
        for &lit in &lits {
            let v = lit.var() as usize;
            if !in_view[v] {
                in_view[v] = true;
                vars.push(lit.var());
            }
        }
        vars.sort_unstable();
        ReducedView {
            lits,
            spans,
            widths,
            vars,
            in_view,
            num_vars: self.num_vars,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ClauseSpan {
    start: u32,
    len: u8,
    source: u32,
}

/// The residual formula under an assignment: satisfied clauses dropped,
/// falsified literals removed. Stored flat (no per-clause allocation).
#[derive(Debug, Clone)]
pub struct ReducedView {
    lits: Vec<Literal>,
    spans: Vec<ClauseSpan>,
    /// Residual width per original clause index; 0 = satisfied (absent).
    widths: Vec<u8>,
    /// Variables occurring in some residual clause, ascending.
    vars: Vec<u32>,
    in_view: Vec<bool>,
    num_vars: u32,
}

/// One residual clause: its free literals and the index of the original clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidualClause<'a> {
    pub lits: &'a [Literal],
    pub source: u32,
}

impl ReducedView {
    pub fn clauses(&self) -> impl Iterator<Item = ResidualClause<'_>> {
        self.spans.iter().map(|s| ResidualClause {
            lits: &self.lits[s.start as usize..s.start as usize + s.len as usize],
            source: s.source,
        })
    }

    pub fn num_clauses(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Residual width of original clause `ci`; 0 if satisfied.
    pub fn residual_width(&self, ci: usize) -> u8 {
        self.widths[ci]
    }

    /// Variables occurring in some residual clause, ascending.
    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    pub fn contains_var(&self, var: u32) -> bool {
        self.in_view[var as usize]
    }

    pub fn max_width(&self) -> usize {
        self.spans.iter().map(|s| s.len as usize).max().unwrap_or(0)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }
}

/// Tri-state partial assignment with an undo trail.
///
/// `mark`/`undo_to` bracket decision levels: every assignment (decision or
/// implied) is pushed onto the trail, and undoing to a mark restores the
/// exact prior state.
#[derive(Debug, Clone)]
pub struct Assignment {
    values: Vec<i8>, // 0 free, 1 true, -1 false; indexed by var (slot 0 unused)
    trail: Vec<Literal>,
}

impl Assignment {
    pub fn new(num_vars: u32) -> Self {
        Self {
            values: vec![0; num_vars as usize + 1],
            trail: Vec::with_capacity(num_vars as usize),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32 - 1
    }

    pub fn value(&self, var: u32) -> Option<bool> {
        match self.values[var as usize] {
            0 => None,
            v => Some(v > 0),
        }
    }

    pub fn is_free(&self, var: u32) -> bool {
        self.values[var as usize] == 0
    }

    /// `Some(true)` = literal satisfied, `Some(false)` = falsified.
    pub fn literal_status(&self, lit: Literal) -> Option<bool> {
        self.value(lit.var()).map(|v| v == lit.is_positive())
    }

    pub fn assign(&mut self, lit: Literal) {
        debug_assert!(self.is_free(lit.var()), "variable {} already set", lit.var());
        self.values[lit.var() as usize] = if lit.is_positive() { 1 } else { -1 };
        self.trail.push(lit);
    }

    pub fn trail(&self) -> &[Literal] {
        &self.trail
    }

    pub fn num_assigned(&self) -> usize {
        self.trail.len()
    }

    /// Current trail position, for a later [`Assignment::undo_to`].
    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    pub fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let lit = self.trail.pop().unwrap();
            self.values[lit.var() as usize] = 0;
        }
    }

    /// Total model with unassigned variables defaulted to false;
    /// index `var - 1`.
    pub fn to_model(&self) -> Vec<bool> {
        (1..self.values.len())
            .map(|v| self.values[v] > 0)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationStatus {
    Consistent,
    Conflict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationOutcome {
    pub status: PropagationStatus,
    /// Every literal assigned by the call, in assignment order, starting with
    /// the asserted literal itself.
    pub implied: Vec<Literal>,
}

/// Asserts `lit` and propagates unit consequences to fixpoint.
///
/// On `Conflict` the assignment is left as-is (partially extended); the caller
/// rolls back via a trail mark taken before the call. Clause scans follow the
/// occurrence lists in ascending clause order, so the implied sequence is
/// deterministic.
pub fn unit_propagate(
    formula: &Formula,
    assignment: &mut Assignment,
    lit: Literal,
) -> PropagationOutcome {
    let start = assignment.mark();
    let status = propagate(formula, assignment, lit);
    PropagationOutcome {
        status,
        implied: assignment.trail()[start..].to_vec(),
    }
}

/// Trail-extending propagation core shared by [`unit_propagate`] and the
/// solver. Assumes `lit`'s variable is free.
pub(crate) fn propagate(
    formula: &Formula,
    assignment: &mut Assignment,
    lit: Literal,
) -> PropagationStatus {
    let mut cursor = assignment.mark();
    assignment.assign(lit);
    while cursor < assignment.trail().len() {
        let falsified = !assignment.trail()[cursor];
        cursor += 1;
        for &ci in formula.occurrences(falsified) {
            let clause = &formula.clauses()[ci as usize];
            let mut unit = None;
            let mut free = 0;
            let mut satisfied = false;
            for &l in clause.lits() {
                match assignment.literal_status(l) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        free += 1;
                        unit = Some(l);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match free {
                0 => return PropagationStatus::Conflict,
                1 => assignment.assign(unit.unwrap()),
                _ => {}
            }
        }
    }
    PropagationStatus::Consistent
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("clause width {k} exceeds variable count {n}")]
    WidthExceedsVars { k: u32, n: u32 },
    #[error("clause width must be at least 1")]
    ZeroWidth,
}

/// Uniform random k-SAT: each clause draws `k` distinct variables (redrawing
/// duplicates) and independent fair polarities. Duplicate clauses across the
/// formula are allowed, matching the standard fixed-clause-length model.
///
/// The exact stream consumption is part of the reproducibility contract:
/// per clause, per slot, draw `1 + (next_u64() % n)` until the variable is
/// distinct from earlier slots of the same clause, then draw one `next_u64()`
/// whose lowest bit decides polarity (1 = positive).
pub fn generate_uniform_ksat(
    n: u32,
    m: u32,
    k: u32,
    seed: u64,
) -> Result<Formula, GeneratorError> {
    if k == 0 {
        return Err(GeneratorError::ZeroWidth);
    }
    if k > n {
        return Err(GeneratorError::WidthExceedsVars { k, n });
    }
    let mut rng = Xorshift64Star::new(seed);
    let mut clauses = Vec::with_capacity(m as usize);
    let mut slot_vars: Vec<u32> = Vec::with_capacity(k as usize);
    for _ in 0..m {
        slot_vars.clear();
        let mut lits = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let var = loop {
                let v = 1 + rng.below(n as u64) as u32;
                if !slot_vars.contains(&v) {
                    break v;
                }
            };
            slot_vars.push(var);
            lits.push(Literal::new(var, rng.next_bool()));
        }
        match Clause::normalized(&lits) {
            Normalized::Clause { clause, .. } => clauses.push(clause),
            // Distinct variables per clause: duplicates and tautologies
            // cannot occur.
            _ => unreachable!("generator emits distinct variables"),
        }
    }
    let mut formula = Formula::new(n, clauses).expect("generator stays in range");
    formula.push_comment(format!(
        "generator=xorshift64star seed={seed} n={n} m={m} k={k}"
    ));
    Ok(formula)
}
