//! Bid commitment and the digit-by-digit price determination.

use crate::error::{Error, Result};
use crate::field::{FieldParams, GroupElement};
use crate::party::Bidder;
use crate::ringnet::{Family, Network};
use crate::transcript::{Endpoint, Phase, Record};

/// Public results of one digit round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundState {
    pub j: usize,
    pub b: GroupElement,
    pub p: GroupElement,
    pub d: GroupElement,
    /// `P_j^{n-2}`, the value `D_j` is compared against.
    pub p_power: GroupElement,
    pub digit: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutputPrice {
    pub bits: Vec<bool>,
    pub value: u64,
}

impl OutputPrice {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        OutputPrice { bits, value }
    }

    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// The largest digit whose bit is 0.
    pub fn last_zero_digit(&self) -> Option<usize> {
        self.bits.iter().rposition(|&b| !b).map(|i| i + 1)
    }
}

/// A family that never fully appeared means some transfer stalled.
pub(crate) fn collect_family(net: &Network, family: Family) -> Result<Vec<GroupElement>> {
    net.board().vector(family, net.n()).map_err(|e| match e {
        Error::IncompleteFamily { family, missing } => Error::BrokenRing {
            phase: net.phase(),
            detail: format!("{family} never published for origins {missing:?}"),
        },
        other => other,
    })
}

fn post_value(net: &mut Network, tag: &str, j: usize, value: impl ToString) {
    net.post(
        Record::new(Phase::Round, Endpoint::Coordinator, Endpoint::Public, tag)
            .digit(j)
            .payload(value),
    );
}

pub fn commit_bids(bidders: &mut [Bidder], net: &mut Network) -> Result<Vec<GroupElement>> {
    net.set_phase(Phase::Commit);
    for b in bidders.iter_mut() {
        let actions = b.start_commit();
        net.execute(b.index(), actions)?;
    }
    net.run(bidders)?;
    collect_family(net, Family::Commit)
}

/// Sends every code row, then every bid share.
pub fn exchange_shares(bidders: &mut [Bidder], net: &mut Network) -> Result<()> {
    net.set_phase(Phase::Sharing);
    for b in bidders.iter_mut() {
        let actions = b.send_codes();
        net.execute(b.index(), actions)?;
    }
    net.run(bidders)?;
    for b in bidders.iter_mut() {
        let actions = b.send_bid_shares()?;
        net.execute(b.index(), actions)?;
    }
    net.run(bidders)
}

pub fn round_bp(
    field: &FieldParams,
    bidders: &mut [Bidder],
    net: &mut Network,
    j: usize,
) -> Result<(GroupElement, GroupElement)> {
    net.set_phase(Phase::Round);
    for b in bidders.iter_mut() {
        let actions = b.start_bp(j)?;
        net.execute(b.index(), actions)?;
    }
    net.run(bidders)?;
    let b = field.product(collect_family(net, Family::B(j))?);
    let p = field.product(collect_family(net, Family::P(j))?);
    Ok((b, p))
}

pub fn sole_check(key: GroupElement, b_j: GroupElement) -> bool {
    key == b_j
}

pub fn round_masks(bidders: &mut [Bidder], net: &mut Network, j: usize, b_j: GroupElement) -> Result<()> {
    for b in bidders.iter_mut() {
        let actions = b.send_masks(j, b_j)?;
        net.execute(b.index(), actions)?;
    }
    net.run(bidders)
}

pub fn round_d(field: &FieldParams, bidders: &mut [Bidder], net: &mut Network, j: usize) -> Result<GroupElement> {
    for b in bidders.iter_mut() {
        let actions = b.start_d(j)?;
        net.execute(b.index(), actions)?;
    }
    net.run(bidders)?;
    Ok(field.product(collect_family(net, Family::D(j))?))
}

/// Returns `P_j^{n-2}` and the digit, which is 0 exactly when `D_j` equals it.
pub fn decide_digit(field: &FieldParams, d: GroupElement, p: GroupElement, n: usize) -> (GroupElement, bool) {
    let power = field.pow(p, field.exponent(n as i128 - 2));
    (power, d != power)
}

/// One full digit round: `B_j`/`P_j`, sole checks and masks, `D_j`, the
/// public digit, then the loser rule.
pub fn run_round(field: &FieldParams, bidders: &mut [Bidder], net: &mut Network, j: usize) -> Result<RoundState> {
    let (b, p) = round_bp(field, bidders, net, j)?;
    post_value(net, "B_j", j, b);
    post_value(net, "P_j", j, p);
    round_masks(bidders, net, j, b)?;
    let d = round_d(field, bidders, net, j)?;
    post_value(net, "D_j", j, d);
    let (p_power, digit) = decide_digit(field, d, p, bidders.len());
    post_value(net, "digit", j, digit as u8);
    for bidder in bidders.iter_mut() {
        bidder.conclude_round(j, digit);
    }
    Ok(RoundState { j, b, p, d, p_power, digit })
}

pub fn determine_price(
    field: &FieldParams,
    bidders: &mut [Bidder],
    net: &mut Network,
) -> Result<(OutputPrice, Vec<RoundState>)> {
    let k = bidders[0].k();
    let rounds = (1..=k)
        .map(|j| run_round(field, bidders, net, j))
        .collect::<Result<Vec<_>>>()?;
    Ok((publish_price(net, &rounds), rounds))
}

/// Assembles the price from the round digits and announces it.
pub fn publish_price(net: &mut Network, rounds: &[RoundState]) -> OutputPrice {
    let price = OutputPrice::from_bits(rounds.iter().map(|r| r.digit).collect());
    net.post(Record::new(Phase::Round, Endpoint::Coordinator, Endpoint::Public, "price").payload(price.value));
    price
}
