//! A sealed laboratory for self-replicating programs.
//!
//! Programs are words of a small, hermetic toy language ([`interp`]). On top of
//! it the crate builds fixed points of program transformers ([`recursion`]),
//! virtual system environments ([`envmodel`]), concrete viruses forged from
//! abstract class definitions ([`virusforge`]), and an extensional checker for
//! their defining equations and behavioural traits ([`verifier`]).
//!
//! Nothing in this crate touches the host filesystem, network or processes.

#![forbid(unsafe_code)]

pub mod codec;
pub mod interp;
pub mod recursion;
pub mod envmodel;
pub mod virusforge;
pub mod verifier;

pub use codec::Word;
pub use interp::{interp, EvalOutcome, Fuel, Program};
