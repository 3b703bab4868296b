//! Exact p-adic continued fractions over rational quaternion algebras.
//!
//! Everything is computed in exact arithmetic: quaternion coordinates are
//! arbitrary-precision rationals, valuations are half-integers, and the
//! only real-valued quantities (operator norms at infinity, the criterion
//! ratio, heights) are carried as certified rational intervals.
//!
//! The crate provides:
//!
//! - [`quat`]: arithmetic in `B = (a, b / Q)` with reduced norm and trace,
//!   inverses, minimal polynomials and integrality predicates;
//! - [`orders`]: ring lattices, the maximal orders of the discriminant-`pq`
//!   family, Hilbert symbols, local lattice norms;
//! - [`padic`]: the ramified valuation `w_p`, digit expansion along the
//!   uniformizer, and floor functions (special and prescribed-override);
//! - [`cf`]: the expansion algorithm, convergent tables, exact identity
//!   verification, periodicity detection and convergence profiles;
//! - [`interval`] and [`heights`]: certified interval arithmetic, operator
//!   norms via an exact 2x2 splitting, adelic heights, and the finiteness
//!   criterion that certifies p-adic limits to lie outside B;
//! - [`certify`]: roots of `X B_n X + X B_{n-1} - A_n X - A_{n-1}`,
//!   the commutative-subfield oracle for `X^2 - aX - 1`, and the
//!   non-terminating `(1/q)(i + ij/p)` trace with its Bezout replay.

pub mod arith;
pub mod certify;
pub mod cf;
pub mod error;
pub mod heights;
pub mod interval;
pub mod orders;
pub mod padic;
pub mod quat;

pub use certify::{
    build_periodic_quadratic, certify_no_root, counterexample_trace, subfield_roots,
    CounterexampleTrace, QuadPoly, TraceStep,
};
pub use cf::{
    convergence_profile, convergents, expand, unroll, verify_identities, CFExpansion,
    ConvergentTable, ExpansionStatus, IdentityCheck, IdentityReport, Limits, TruncationReason,
};
pub use error::{Error, Result};
pub use heights::{
    bounded_prefix_analysis, certify_not_in_b, height, mu_of_expansion, mu_of_quotients, ninf,
    norm_growth_check, real_split, theta, BoundedPrefixReport, Certification, FiniteNorm,
    HeightReport, NormGrowthReport, QuadExt, SplitMatrix,
};
pub use interval::RatInterval;
pub use orders::{
    hilbert_symbol, maximal_order_pq, order_containing, standard_order, Order, Place,
};
pub use padic::{make_override_floor, wp, FloorFunction, SpecialType, Valuation};
pub use quat::{Algebra, MinPoly, Quat};
