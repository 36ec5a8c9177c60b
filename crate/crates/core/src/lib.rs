//! Exact symbolic engine, numerical oracles and a finite-dimensional matrix
//! model for the spectral functions of modular curvature on noncommutative
//! m-tori: hypergeometric atoms, divided-difference calculus, the cyclic and
//! difference-raising transformations of the variational calculus, and the
//! machine verification of the Connes-Moscovici type functional relations.

pub mod divdiff;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod hfamily;
#[cfg(test)]
mod hfamily_tests;
pub mod matrixmodel;
pub mod numeric;
pub mod ops;
#[cfg(test)]
mod ops_tests;
pub mod report;
pub mod spectral;
