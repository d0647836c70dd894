//! Invariants of nilpotent products of cyclic groups.
//!
//! The central computation: given cyclic groups of orders `n_1, ..., n_q`
//! (0 meaning infinite), form their `n`th nilpotent product and compute its
//! `c`-nilpotent multiplier as an abelian group. Under the hypothesis that
//! every prime up to `n + c` is coprime to the finite orders, the multiplier
//! is a direct sum of cyclic groups indexed by the basic commutators whose
//! weights lie in a window determined by `n` and `c`, each contributing the
//! gcd of the orders of the generators it touches.
//!
//! The crate keeps several independent routes to the same answers and leans
//! on their agreement:
//!
//! - [`multiplier`] counts basic commutators weight by weight (the general
//!   algorithm), via closed-form partial sums of the necklace-counting
//!   function for equal-order blocks, and via a two-factor shortcut.
//! - [`engine`] does brute-force group arithmetic: normal forms, collection,
//!   subgroup enumeration, so predictions can be checked against an actual
//!   subgroup fingerprint.
//! - [`hallbasis`] enumerates basic commutators; [`numtheory`] counts them.
//!
//! The command-line companion crate exposes all of this as subcommands.

pub mod engine;
pub mod error;
pub mod hallbasis;
pub mod multiplier;
pub mod numtheory;

pub use engine::{
    analytic_order_counts, verify_multiplier, FingerprintReport, GeneratorWord, GroupContext,
    GroupElement, VerifyReport,
};
pub use error::{Error, Result};
pub use hallbasis::{BasicCommutator, BasisTable};
pub use multiplier::{
    canonicalize, multiplier_closed_form, multiplier_general, multiplier_general_unchecked,
    multiplier_two_factor, validate_spec, AbelianStructure, Caps, CyclicOrders, PrimeViolation,
    ProductSpec,
};
pub use numtheory::{chi_partial_sum, gcd_zero_aware, witt_chi, WittCount};
