//! Exact-arithmetic workbench for the geometry of the curves X₀(pⁿ)
//! (n ≤ 4) over highly ramified extensions of Q_p.
//!
//! The crate is organised in layers:
//! - [`arith`]: F_{p²}, truncated Witt vectors W(F_{p²})/p^M, Teichmüller lifts;
//! - [`qseries`]: integer q-expansions (E₄, Δ, j);
//! - [`modpoly`]: the modular polynomial Φ_p and its supersingular shift;
//! - [`tower`]: the totally ramified tower L = Q_{p²}(π), π^e = p, with
//!   Newton polygons and Hensel lifting;
//! - [`supersingular`]: the supersingular locus in characteristic p;
//! - [`affinoid`]: circle-by-circle valuation profiles, tower sampling and
//!   verification of the reduction identities of each component;
//! - [`graph`]: dual graphs of the stable reductions, genus bookkeeping
//!   and width tables.
//!
//! All core arithmetic is exact: big integers, exact rationals and
//! fixed-modulus Witt coefficients. No floating point is used anywhere.

pub mod affinoid;
pub mod arith;
pub mod error;
pub mod graph;
pub mod modpoly;
pub mod qseries;
pub mod quotient;
pub mod supersingular;
pub mod tower;

pub use error::{Error, Result};
