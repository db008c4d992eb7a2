//! A string constraint solver based on forward propagation of regular
//! constraints through concatenation equations.
//!
//! Pipeline: [`smt::parse_smt`] reads a script, [`constraints::desugar`]
//! lowers it to binary equations over variables with automaton constraints,
//! and [`solver::solve`] refines those automata layer by layer and classifies
//! the result as sat, unsat or unknown. [`oracle`] is an independent bounded
//! checker used to cross-validate verdicts.

pub mod constraints;
pub mod driver;
pub mod interval;
pub mod oracle;
pub mod regex;
pub mod smt;
pub mod snfa;
pub mod solver;
pub mod word;
