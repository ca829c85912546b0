//! The worked five-bidder example, replayed phase by phase against the
//! published tables.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::GroupElement;
use crate::keygen::KeySet;

use super::config::AuctionConfig;
use super::coordinator::Auction;

type Getter = fn(&KeySet, usize) -> GroupElement;

const BUNDLED: &str = include_str!("../../fixtures/appendix.json");

#[derive(Clone, Debug, Deserialize)]
pub struct ExpectedRound {
    pub b: u64,
    pub p: u64,
    /// Missing where the printed value is unusable.
    pub d: Option<u64>,
    pub p_power: u64,
    pub digit: u8,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SoleBidder {
    pub j: usize,
    pub bidder: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Expected {
    pub keys: Vec<Vec<u64>>,
    pub fakes: Vec<Vec<u64>>,
    pub checks: Vec<Vec<u64>>,
    /// Signed `Y` or `N` per bidder and digit, whichever the bid selects.
    pub indicators: Vec<Vec<i64>>,
    pub commitments: Vec<u64>,
    pub rounds: Vec<ExpectedRound>,
    pub sole: Vec<SoleBidder>,
    pub bits: String,
    pub price: u64,
    pub verification: Vec<u64>,
    pub matching_slots: Vec<usize>,
    pub winner: usize,
    pub proof_digit: usize,
    pub proof_product: u64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct AppendixFixture {
    pub config: AuctionConfig,
    pub expected: Expected,
}

impl AppendixFixture {
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED).expect("bundled fixture parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn expect_eq<T: PartialEq + std::fmt::Debug>(quantity: impl Into<String>, expected: T, actual: T) -> Result<()> {
    if expected == actual {
        return Ok(());
    }
    Err(Error::FixtureMismatch {
        quantity: quantity.into(),
        expected: format!("{expected:?}"),
        actual: format!("{actual:?}"),
    })
}

fn values(xs: &[GroupElement]) -> Vec<u64> {
    xs.iter().map(|x| x.value()).collect()
}

pub fn replay_appendix() -> Result<Auction> {
    replay(&AppendixFixture::bundled())
}

/// Runs the fixture auction and stops at the first quantity that differs.
/// Returns the finished auction on success.
pub fn replay(fixture: &AppendixFixture) -> Result<Auction> {
    let exp = &fixture.expected;
    let mut auction = Auction::new(&fixture.config)?;
    let (n, k) = (auction.n(), auction.k());
    if exp.keys.len() != n || exp.rounds.len() != k {
        return Err(Error::InvalidFixture(format!("expected tables are not {n}x{k}")));
    }

    auction.keygen()?;
    let tables: [(&str, &Vec<Vec<u64>>, Getter); 3] = [
        ("K", &exp.keys, |ks, j| ks.key(j)),
        ("F", &exp.fakes, |ks, j| ks.fake(j)),
        ("C", &exp.checks, |ks, j| ks.check(j)),
    ];
    for (name, table, get) in tables {
        for (l, bidder) in auction.bidders().iter().enumerate() {
            let keys = bidder.keys().ok_or_else(|| Error::InvalidFixture("keys missing after keygen".into()))?;
            let row: Vec<u64> = (1..=k).map(|j| get(keys, j).value()).collect();
            expect_eq(format!("{name}_{},*", l + 1), &table[l], &row)?;
        }
    }

    auction.commit()?;
    expect_eq("committed bids", exp.commitments.clone(), values(auction.commitments()))?;

    auction.share()?;
    let field = *auction.field();
    for (l, bidder) in auction.bidders().iter().enumerate() {
        let ind = bidder.indicators().ok_or_else(|| Error::InvalidFixture("indicators missing".into()))?;
        for j in 1..=k {
            let want = field.exponent(exp.indicators[l][j - 1] as i128);
            let got = ind.target(j, bidder.bid().bit(j));
            expect_eq(format!("indicator {},{j}", l + 1), want, got)?;
        }
    }

    for (idx, want) in exp.rounds.iter().enumerate() {
        let j = idx + 1;
        let got = auction.round()?.clone();
        expect_eq(format!("B_{j}"), want.b, got.b.value())?;
        expect_eq(format!("P_{j}"), want.p, got.p.value())?;
        if let Some(d) = want.d {
            expect_eq(format!("D_{j}"), d, got.d.value())?;
        }
        expect_eq(format!("P_{j}^(n-2)"), want.p_power, got.p_power.value())?;
        let sole: Vec<usize> = auction
            .bidders()
            .iter()
            .filter(|b| b.was_sole(j))
            .map(|b| b.index())
            .collect();
        let want_sole: Vec<usize> = exp.sole.iter().filter(|s| s.j == j).map(|s| s.bidder).collect();
        expect_eq(format!("sole bidders at digit {j}"), want_sole, sole)?;
        expect_eq(format!("digit {j}"), want.digit == 1, got.digit)?;
    }
    let price = auction.price().cloned().expect("price set after the last round");
    expect_eq("price bits", exp.bits.as_str(), price.bit_string().as_str())?;
    expect_eq("price", exp.price, price.value)?;

    auction.verify()?;
    let v = auction.verification().expect("verify ran").clone();
    expect_eq("verification vector", exp.verification.clone(), values(&v.vector))?;
    expect_eq("matching slots", exp.matching_slots.clone(), v.matching_slots)?;

    auction.winner()?;
    let outcome = auction.outcome().expect("winner ran").clone();
    expect_eq("winner", Some(exp.winner), outcome.winner)?;
    expect_eq("tie draw", false, outcome.tie)?;
    expect_eq("proof digit", Some(exp.proof_digit), price.last_zero_digit())?;
    let proof = auction.bidders()[exp.winner - 1]
        .proof(exp.proof_digit)
        .ok_or_else(|| Error::InvalidFixture("winner has no proof".into()))?;
    expect_eq("proof product", exp.proof_product, proof.product(&field).value())?;
    expect_eq("proof equals B_j'", exp.rounds[exp.proof_digit - 1].b, exp.proof_product)?;
    Ok(auction)
}
