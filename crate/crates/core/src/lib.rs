//! An auctioneer-free sealed-bid second-price auction over a safe-prime
//! field, simulated as `n` bidder state machines on an in-process bus.
//!
//! Bidders learn only the second-highest bid; the winner learns it won and
//! can prove so to the seller. Every public value lands on a bulletin board
//! that third parties can audit from the transcript alone.

pub mod auction;
pub mod codes;
pub mod error;
pub mod field;
pub mod harness;
pub mod keygen;
pub mod party;
pub mod ringnet;
pub mod transcript;
pub mod verify;

pub use error::{Error, Result};
pub use field::{ExponentValue, FieldParams, GroupElement};
