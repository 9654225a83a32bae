//! Exact and empirical tools around the average Lang-Trotter problem.
//!
//! For a fixed integer `r`, the count `pi_E^r(x)` of primes `p <= x` of good
//! reduction with Frobenius trace `a_p(E) = r` is averaged over the box of
//! curves `y^2 = x^3 + ax + b` with `|a| <= A`, `|b| <= B`. This crate provides
//! the pieces needed to compute and cross-check that average:
//!
//! * [`arith`]: primes, Legendre and quartic residue symbols.
//! * [`curves`]: traces of Frobenius, isomorphism classes and exact per-prime
//!   trace distributions.
//! * [`classnum`]: form class numbers `h(d)` and Kronecker class numbers `H(D)`.
//! * [`characters`]: Dirichlet character tables and the character-sum
//!   representation of box counts.
//! * [`analytic`]: the constant `C_r`, the comparison integral `pi_{1/2}(x)`
//!   and partial sums of `H(r^2 - 4p) / 2p`.
//! * [`experiments`]: box averages, second moments and exceptional-curve
//!   censuses backed by an on-disk cache.
//! * [`verify`]: the invariant suite run by `lang-trotter verify-all`.

pub mod analytic;
pub mod arith;
pub mod characters;
pub mod classnum;
pub mod curves;
mod error;
pub mod experiments;
pub mod verify;

pub use analytic::{b_of_r, euler_product_cr, pi_half, ComparisonPoint, ConstantValue};
pub use arith::{legendre, mod_inv, quartic_symbol, sieve_primes, PrimeList, QuarticSymbol};
pub use characters::{BoxCountDecomposition, Character, CharacterTable};
pub use classnum::{form_class_number, kronecker_h, ClassNumberRecord, FormClassCount};
pub use curves::{trace_distribution, trace_of_frobenius, CurveParams, IsoClassSummary, TraceDistribution};
pub use error::{Error, Result};
pub use experiments::{AverageReport, ExperimentConfig};
