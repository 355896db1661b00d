//! DIMACS CNF reading and writing.
//!
//! Reading normalizes clauses: duplicate literals inside a clause are dropped
//! and tautological clauses removed, with counts reported alongside the
//! formula. Comment lines are kept (in order) and re-emitted by the writer so
//! generator provenance survives a round-trip.

use crate::cnf::{Clause, Formula, Literal, Normalized};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: expected 'p cnf <vars> <clauses>' header, found {found:?}")]
    MalformedHeader { line: usize, found: String },
    #[error("missing 'p cnf' header")]
    MissingHeader,
    #[error("line {line}: invalid token {token:?}")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: literal {lit} out of range for {num_vars} variables")]
    LiteralOutOfRange {
        line: usize,
        lit: i32,
        num_vars: u32,
    },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("clause {found} of {expected} unterminated at end of input")]
    UnterminatedClause { expected: usize, found: usize },
    #[error("header promises {expected} clauses but input ends after {found}")]
    MissingClauses { expected: usize, found: usize },
}

/// A parsed formula plus normalization counts.
#[derive(Debug)]
pub struct ParseOutput {
    pub formula: Formula,
    pub tautologies_removed: usize,
    pub duplicate_literals_removed: usize,
}

/// Parses DIMACS CNF text. Clauses may span lines; input after the promised
/// clause count is ignored (tolerates `%`-style trailer lines some benchmark
/// suites append).
pub fn parse_dimacs(text: &str) -> Result<ParseOutput, DimacsError> {
    let mut comments = Vec::new();
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut tautologies_removed = 0;
    let mut duplicate_literals_removed = 0;

    'lines: for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            if header.is_none() {
                comments.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
            }
            continue;
        }
        let Some((num_vars, num_clauses)) = header else {
            let mut parts = trimmed.split_whitespace();
            let ok = parts.next() == Some("p")
                && parts.next() == Some("cnf");
            let n = parts.next().and_then(|t| t.parse::<u32>().ok());
            let m = parts.next().and_then(|t| t.parse::<usize>().ok());
            match (ok, n, m, parts.next()) {
                (true, Some(n), Some(m), None) => {
                    header = Some((n, m));
                    clauses.reserve(m);
                    continue;
                }
                _ => {
                    return Err(DimacsError::MalformedHeader {
                        line,
                        found: trimmed.to_string(),
                    })
                }
            }
        };
        for token in trimmed.split_whitespace() {
            let value: i32 = token.parse().map_err(|_| DimacsError::InvalidToken {
                line,
                token: token.to_string(),
            })?;
            match Literal::from_dimacs(value) {
                Some(lit) => {
                    if lit.var() > num_vars {
                        return Err(DimacsError::LiteralOutOfRange {
                            line,
                            lit: value,
                            num_vars,
                        });
                    }
                    pending.push(lit);
                }
                None => {
                    match Clause::normalized(&pending) {
                        Normalized::Clause {
                            clause,
                            duplicates_removed,
                        } => {
                            duplicate_literals_removed += duplicates_removed;
                            clauses.push(clause);
                        }
                        Normalized::Tautology => tautologies_removed += 1,
                        Normalized::Empty => {
                            return Err(DimacsError::EmptyClause { line })
                        }
                    }
                    pending.clear();
                    if clauses.len() + tautologies_removed == num_clauses {
                        break 'lines;
                    }
                }
            }
        }
    }

    let (num_vars, num_clauses) = header.ok_or(DimacsError::MissingHeader)?;
    let found = clauses.len() + tautologies_removed;
    if !pending.is_empty() {
        return Err(DimacsError::UnterminatedClause {
            expected: num_clauses,
            found: found + 1,
        });
    }
    if found < num_clauses {
        return Err(DimacsError::MissingClauses {
            expected: num_clauses,
            found,
        });
    }
    let mut formula =
        Formula::new(num_vars, clauses).expect("literal range checked during parse");
    for comment in comments {
        formula.push_comment(comment);
    }
    Ok(ParseOutput {
        formula,
        tautologies_removed,
        duplicate_literals_removed,
    })
}

/// Writes DIMACS text: comments, header, then one clause per line.
pub fn write_dimacs(formula: &Formula) -> String {
    let mut out = String::new();
    for comment in formula.comments() {
        writeln!(out, "c {comment}").unwrap();
    }
    writeln!(
        out,
        "p cnf {} {}",
        formula.num_vars(),
        formula.num_clauses()
    )
    .unwrap();
    for clause in formula.clauses() {
        for lit in clause.lits() {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        writeln!(out, "0").unwrap();
    }
    out
}
