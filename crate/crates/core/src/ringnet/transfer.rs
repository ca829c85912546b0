use crate::codes::SecretCodes;
use crate::error::{Error, Result};
use crate::field::{ExponentValue, FieldParams, GroupElement};
use crate::transcript::Phase;

use super::board::Family;
use super::topology::{Direction, RingTopology};

/// Which quantity a transfer is computing. The origin is carried separately
/// in [`TransferItem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    /// `K_{origin,i,j}`, returned to bidder `i`.
    Key { i: usize, j: usize },
    Fake { i: usize, j: usize },
    Check { i: usize, j: usize },
    Commit,
    Verify,
    B { j: usize },
    P { j: usize },
    D { j: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    ReturnTo(usize),
    Publish,
}

/// The secret exponent a visiting bidder applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    E,
    ESquared,
    ECubed,
    /// `c_{visitor, r+1}` for an item arriving with hop count `r`.
    CNextHop,
}

impl Transform {
    pub fn exponent(
        self,
        field: &FieldParams,
        codes: &SecretCodes,
        j: Option<usize>,
        hop: usize,
    ) -> ExponentValue {
        let e = || codes.e(j.expect("e-transforms are digit-indexed"));
        match self {
            Transform::E => e(),
            Transform::ESquared => field.exp_mul(e(), e()),
            Transform::ECubed => field.exp_mul(field.exp_mul(e(), e()), e()),
            Transform::CNextHop => codes.c(hop + 1),
        }
    }
}

impl Tag {
    pub fn name(&self) -> &'static str {
        match self {
            Tag::Key { .. } => "K",
            Tag::Fake { .. } => "F",
            Tag::Check { .. } => "C",
            Tag::Commit => "commit",
            Tag::Verify => "verify",
            Tag::B { .. } => "B",
            Tag::P { .. } => "P",
            Tag::D { .. } => "D",
        }
    }

    pub fn j(&self) -> Option<usize> {
        match *self {
            Tag::Key { j, .. }
            | Tag::Fake { j, .. }
            | Tag::Check { j, .. }
            | Tag::B { j }
            | Tag::P { j }
            | Tag::D { j } => Some(j),
            Tag::Commit | Tag::Verify => None,
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Tag::Check { .. } | Tag::P { .. } => Direction::Backward,
            _ => Direction::Forward,
        }
    }

    pub fn terminal(&self) -> Terminal {
        match *self {
            Tag::Key { i, .. } | Tag::Fake { i, .. } | Tag::Check { i, .. } => {
                Terminal::ReturnTo(i)
            }
            _ => Terminal::Publish,
        }
    }

    pub fn transform(&self) -> Transform {
        match self {
            Tag::Key { .. } | Tag::B { .. } | Tag::D { .. } => Transform::E,
            Tag::Fake { .. } | Tag::Check { .. } => Transform::ESquared,
            Tag::P { .. } => Transform::ECubed,
            Tag::Commit | Tag::Verify => Transform::CNextHop,
        }
    }

    pub fn phase(&self) -> Phase {
        match self {
            Tag::Key { .. } | Tag::Fake { .. } | Tag::Check { .. } => Phase::Keygen,
            Tag::Commit => Phase::Commit,
            Tag::Verify => Phase::Verify,
            Tag::B { .. } | Tag::P { .. } | Tag::D { .. } => Phase::Round,
        }
    }

    /// The board family a published transfer lands in.
    pub fn family(&self) -> Option<Family> {
        match *self {
            Tag::Commit => Some(Family::Commit),
            Tag::Verify => Some(Family::Verify),
            Tag::B { j } => Some(Family::B(j)),
            Tag::P { j } => Some(Family::P(j)),
            Tag::D { j } => Some(Family::D(j)),
            _ => None,
        }
    }
}

/// A value in flight. `hop` is `r` in `ᵣX`: 1 when the origin sends it, `n`
/// once every other bidder has transformed it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferItem {
    pub origin: usize,
    pub tag: Tag,
    pub hop: usize,
    pub payload: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferOutcome {
    pub value: GroupElement,
    pub last_holder: usize,
    pub visited: Vec<usize>,
}

/// Runs one transfer synchronously. `hop_transform(holder, r)` returns the
/// exponent the holder applies to an item arriving with hop count `r`, or
/// `None` if the holder refuses to forward.
pub fn ring_transfer<F>(
    field: &FieldParams,
    topology: &RingTopology,
    phase: Phase,
    origin: usize,
    initial: GroupElement,
    direction: Direction,
    mut hop_transform: F,
) -> Result<TransferOutcome>
where
    F: FnMut(usize, usize) -> Option<ExponentValue>,
{
    let mut value = initial;
    let mut holder = origin;
    let mut visited = Vec::with_capacity(topology.n() - 1);
    for r in 1..topology.n() {
        holder = topology.step(holder, direction);
        let t = hop_transform(holder, r).ok_or_else(|| Error::BrokenRing {
            phase,
            detail: format!("bidder {holder} did not forward the item from {origin} at hop {r}"),
        })?;
        value = field.pow(value, t);
        visited.push(holder);
    }
    Ok(TransferOutcome {
        value,
        last_holder: holder,
        visited,
    })
}
