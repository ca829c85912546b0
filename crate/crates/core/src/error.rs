use thiserror::Error;

use crate::transcript::Phase;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is below the minimum of 7")]
    ModulusTooSmall(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is prime but (p-1)/2 is not")]
    NotSafePrime(u64),
    #[error("{g} does not generate the multiplicative group mod {p}")]
    NotGenerator { p: u64, g: u64 },
    #[error("zero has no multiplicative inverse")]
    ZeroElement,
    #[error("value {value} is not a group element mod {p}")]
    NotInGroup { p: u64, value: u64 },
    #[error("no safe prime in [{lo}, {hi}]")]
    RangeExhausted { lo: u64, hi: u64 },

    #[error("at least 3 bidders are required, got {0}")]
    TooFewBidders(usize),
    #[error("bid width k must be in 1..=63, got {0}")]
    BadBitWidth(usize),
    #[error("bid {bid} does not fit in {k} bits")]
    BidOutOfRange { bid: u64, k: usize },
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error("secret code {0} is zero mod p-1")]
    ZeroCode(String),
    #[error("bidder {bidder} is missing a share from bidder {from}")]
    MissingShare { bidder: usize, from: usize },

    #[error("ring broken during {phase} phase: {detail}")]
    BrokenRing { phase: Phase, detail: String },
    #[error("transfer item arrived with hop count {hop} outside 1..={n}")]
    WrongHopCount { hop: usize, n: usize },
    #[error("published family {family} is missing origins {missing:?}")]
    IncompleteFamily { family: String, missing: Vec<usize> },

    #[error("output price has no zero digit; winner proof does not apply")]
    NoZeroDigit,
    #[error("bidders {0:?} all presented valid winner proofs")]
    MultipleValidClaims(Vec<usize>),

    #[error("malformed transcript at line {line}: {reason}")]
    MalformedTranscript { line: usize, reason: String },
    #[error("fixture mismatch at {quantity}: expected {expected}, got {actual}")]
    FixtureMismatch {
        quantity: String,
        expected: String,
        actual: String,
    },
    #[error("invalid fixture: {0}")]
    InvalidFixture(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures that indicate a party deviated from the protocol,
    /// as opposed to bad input or I/O.
    pub fn is_protocol_violation(&self) -> bool {
        matches!(
            self,
            Error::BrokenRing { .. }
                | Error::WrongHopCount { .. }
                | Error::IncompleteFamily { .. }
                | Error::MultipleValidClaims(_)
                | Error::MissingShare { .. }
        )
    }
}
