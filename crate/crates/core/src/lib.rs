//! A proof-checking kernel for a directed type theory with `hom`, `core` and `op`
//! type formers, a finite-category semantics engine that interprets checked syntax
//! into small categories, weak-factorization-system certificates, and a directed-grid
//! analyzer for PV programs.

pub mod checker;
pub mod cli;
pub mod dspace;
pub mod fincat;
pub mod interp;
pub mod kernel;
pub mod parser;
pub mod wfs;
