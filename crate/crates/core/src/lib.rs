//! Certified computation of simultaneous rational approximation to the points
//! (ζ, ζ², …, ζᵏ) for lacunary series ζ = c·Σ b^(−aₙ) and for rationals.
//!
//! The kernel ([`exactnum`]) works in exact big-rational arithmetic with
//! certified interval enclosures; [`contfrac`] certifies continued-fraction
//! convergents by bracketing; [`simul`] scans the simultaneous approximation
//! quality M_x = max_j ‖ζʲx‖ and verifies the structure theorems that pin
//! down near-minima; [`dual`] scans the dual linear forms
//! |x₀ + ζx₁ + … + ζᵏx_k|; [`exponents`] turns scan output into finite-scale
//! exponent estimates and evaluates the exact transfer formulas; and
//! [`construct`] builds numbers with prescribed approximation exponents and
//! certificates for them.

pub mod construct;
pub mod contfrac;
pub mod dual;
pub mod error;
pub mod exactnum;
pub mod exponents;
pub mod simul;

pub use error::{Error, Result};
