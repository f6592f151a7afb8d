//! Strip peeling on hyperbolic pants and one-holed tori: the upper half-plane
//! kernel, marked structures, curve and arc enumeration, peeling, weak metrics
//! and a config-driven experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod enumerate;
pub mod error;
pub mod h2;
pub mod harness;
pub mod metrics;
pub mod par;
pub mod peel;
pub mod surface;
pub mod verify;
pub mod word;
