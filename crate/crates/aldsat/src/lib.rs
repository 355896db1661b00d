//! A look-ahead DPLL solver for random 3-SAT whose top levels are traversed
//! in discrepancy-based orders, plus a probabilistic model of such search
//! trees and an experiment harness for comparing traversal strategies on
//! generated instance sets.

pub mod bits;
pub mod cnf;
pub mod dimacs;
pub mod experiment;
pub mod heuristics;
pub mod rng;
pub mod search;
pub mod treemodel;
