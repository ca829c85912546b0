//! Running auctions end to end: configuration, seeding, the coordinator,
//! the plaintext oracle, golden replay and benchmarks.

pub mod appendix;
pub mod bench;
pub mod config;
pub mod coordinator;
pub mod oracle;
pub mod rng;

pub use config::AuctionConfig;
pub use coordinator::{run_auction, Auction, PhaseTimings};
pub use oracle::{brute_force_oracle, OracleResult};
