//! Drives the phases in order. The coordinator holds no secrets: it only
//! tells bidders when to start a phase, reads the board and posts values
//! anyone could recompute.

use std::time::{Duration, Instant};

use log::{debug, info};
use rand_chacha::ChaCha20Rng;

use crate::auction::{self, OutputPrice, RoundState};
use crate::codes::{SecretCodes, ShareMatrix};
use crate::error::{Error, Result};
use crate::field::{FieldParams, GroupElement};
use crate::keygen::run_key_generation;
use crate::party::{Behavior, Bidder};
use crate::ringnet::{Action, Network};
use crate::transcript::{Endpoint, Phase, Record, Transcript};
use crate::verify::{determine_winner, verify_price, AuctionOutcome, Verification};

use super::config::{AuctionConfig, Setup};
use super::rng::COORDINATOR_STREAM;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub keygen: Duration,
    pub commit: Duration,
    pub sharing: Duration,
    pub rounds: Duration,
    pub verify: Duration,
    pub winner: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.keygen + self.commit + self.sharing + self.rounds + self.verify + self.winner
    }
}

#[derive(Debug)]
pub struct Auction {
    field: FieldParams,
    bidders: Vec<Bidder>,
    net: Network,
    rng: ChaCha20Rng,
    setup: Setup,
    seller: Vec<String>,
    commitments: Vec<GroupElement>,
    rounds: Vec<RoundState>,
    price: Option<OutputPrice>,
    verification: Option<Verification>,
    outcome: Option<AuctionOutcome>,
    timings: PhaseTimings,
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot += start.elapsed();
    out
}

impl Auction {
    pub fn new(config: &AuctionConfig) -> Result<Self> {
        Self::from_setup(config.resolve()?)
    }

    pub fn from_setup(setup: Setup) -> Result<Self> {
        let (field, n, k) = (setup.field, setup.n, setup.k);
        let mut bidders = Vec::with_capacity(n);
        for l in 1..=n {
            let mut rng = setup.seeds.bidder(l);
            let codes = match &setup.codes {
                Some(all) => all[l - 1].clone(),
                None => SecretCodes::generate(l, n, k, &field, &mut rng)?,
            };
            let mut bidder = Bidder::new(field, codes, setup.bids[l - 1].clone(), Behavior::Honest, rng)?;
            if let Some(shares) = &setup.shares {
                bidder = bidder.with_share_fixture(shares[l - 1].clone());
            }
            bidders.push(bidder);
        }
        let mut net = Network::new(n);
        for (tag, v) in [("p", field.p()), ("g", field.generator().value()), ("n", n as u64), ("k", k as u64)] {
            net.post(Record::new(Phase::Setup, Endpoint::Coordinator, Endpoint::Public, tag).payload(v));
        }
        Ok(Auction {
            field,
            bidders,
            net,
            rng: setup.seeds.fork(COORDINATOR_STREAM),
            setup,
            seller: vec![],
            commitments: vec![],
            rounds: vec![],
            price: None,
            verification: None,
            outcome: None,
            timings: PhaseTimings::default(),
        })
    }

    /// Starts a new auction among the same bidders with new bids. With
    /// `reuse_keys` the codes and keys carry over and key generation only
    /// re-sends the seller commitments; otherwise everything is fresh.
    pub fn successor(&self, bids: &[u64], seed: u64) -> Result<Auction> {
        let mut cfg = AuctionConfig::fixed(
            self.field.p(),
            self.field.generator().value(),
            bids,
            self.setup.k,
            seed,
        );
        cfg.reuse_keys = self.setup.reuse_keys;
        let mut setup = cfg.resolve()?;
        if !self.setup.reuse_keys {
            return Auction::from_setup(setup);
        }
        setup.codes = Some(self.bidders.iter().map(|b| b.codes().clone()).collect());
        let mut next = Auction::from_setup(setup)?;
        for (new, old) in next.bidders.iter_mut().zip(&self.bidders) {
            if let Some(keys) = old.keys() {
                new.install_keys(keys.clone());
            }
        }
        Ok(next)
    }

    pub fn set_behavior(&mut self, l: usize, behavior: Behavior) {
        self.bidders[l - 1].set_behavior(behavior);
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.setup.n
    }

    pub fn k(&self) -> usize {
        self.setup.k
    }

    pub fn bidders(&self) -> &[Bidder] {
        &self.bidders
    }

    pub fn bids(&self) -> Vec<u64> {
        self.setup.bids.iter().map(|b| b.value()).collect()
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn transcript(&self) -> &Transcript {
        self.net.transcript()
    }

    pub fn into_transcript(self) -> Transcript {
        self.net.into_transcript()
    }

    pub fn seller_commitments(&self) -> &[String] {
        &self.seller
    }

    pub fn commitments(&self) -> &[GroupElement] {
        &self.commitments
    }

    pub fn rounds(&self) -> &[RoundState] {
        &self.rounds
    }

    pub fn price(&self) -> Option<&OutputPrice> {
        self.price.as_ref()
    }

    pub fn verification(&self) -> Option<&Verification> {
        self.verification.as_ref()
    }

    pub fn outcome(&self) -> Option<&AuctionOutcome> {
        self.outcome.as_ref()
    }

    pub fn timings(&self) -> PhaseTimings {
        self.timings
    }

    /// Every bidder's current shares, for oracle checks.
    pub fn share_matrix(&self) -> Option<ShareMatrix> {
        self.bidders
            .iter()
            .map(|b| b.shares().cloned())
            .collect::<Option<Vec<_>>>()
            .map(ShareMatrix::new)
    }

    pub fn keygen(&mut self) -> Result<()> {
        let (bidders, net) = (&mut self.bidders, &mut self.net);
        let seller = timed(&mut self.timings.keygen, || {
            if bidders.iter().all(|b| b.keys().is_some()) {
                net.set_phase(Phase::Keygen);
                let mut seller = vec![];
                for b in bidders.iter() {
                    let digest = b.keys().expect("checked above").commitment().to_owned();
                    seller.push(digest.clone());
                    net.execute(b.index(), vec![Action::CommitToSeller { digest }])?;
                }
                return Ok(seller);
            }
            run_key_generation(bidders, net)
        })?;
        debug!("keygen done, {} sends", self.net.total_sends());
        self.seller = seller;
        Ok(())
    }

    pub fn commit(&mut self) -> Result<()> {
        let (bidders, net) = (&mut self.bidders, &mut self.net);
        self.commitments = timed(&mut self.timings.commit, || auction::commit_bids(bidders, net))?;
        Ok(())
    }

    pub fn share(&mut self) -> Result<()> {
        let (bidders, net) = (&mut self.bidders, &mut self.net);
        timed(&mut self.timings.sharing, || auction::exchange_shares(bidders, net))
    }

    /// Runs the next digit round.
    pub fn round(&mut self) -> Result<&RoundState> {
        let j = self.rounds.len() + 1;
        if j > self.setup.k {
            return Err(Error::InvalidConfig(format!("all {} rounds already ran", self.setup.k)));
        }
        let (field, bidders, net) = (&self.field, &mut self.bidders, &mut self.net);
        let state = timed(&mut self.timings.rounds, || auction::run_round(field, bidders, net, j))?;
        debug!("round {j}: B={} P={} D={} digit={}", state.b, state.p, state.d, state.digit as u8);
        self.rounds.push(state);
        if j == self.setup.k {
            self.price = Some(auction::publish_price(&mut self.net, &self.rounds));
        }
        Ok(self.rounds.last().expect("just pushed"))
    }

    fn require_price(&self) -> Result<OutputPrice> {
        self.price
            .clone()
            .ok_or_else(|| Error::InvalidConfig("price is not determined yet".into()))
    }

    pub fn verify(&mut self) -> Result<()> {
        let price = self.require_price()?.value;
        let (bidders, net, commitments) = (&mut self.bidders, &mut self.net, &self.commitments);
        let v = timed(&mut self.timings.verify, || verify_price(bidders, net, price, commitments))?;
        self.verification = Some(v);
        Ok(())
    }

    pub fn winner(&mut self) -> Result<()> {
        let price = self.require_price()?;
        let verification = self
            .verification
            .clone()
            .ok_or_else(|| Error::InvalidConfig("price is not verified yet".into()))?;
        let (field, bidders, net, rng) = (&self.field, &self.bidders, &mut self.net, &mut self.rng);
        let (rounds, seller) = (&self.rounds, &self.seller);
        let outcome = timed(&mut self.timings.winner, || {
            determine_winner(field, bidders, net, &price, rounds, &verification, seller, rng)
        })?;
        info!(
            "price {} ({}), accepted={}, winner={:?}, tie={}",
            outcome.price.value,
            outcome.price.bit_string(),
            outcome.accepted,
            outcome.winner,
            outcome.tie
        );
        self.outcome = Some(outcome);
        Ok(())
    }

    pub fn run(&mut self) -> Result<AuctionOutcome> {
        self.keygen()?;
        self.commit()?;
        self.share()?;
        while self.rounds.len() < self.setup.k {
            self.round()?;
        }
        self.verify()?;
        self.winner()?;
        Ok(self.outcome.clone().expect("winner phase sets the outcome"))
    }
}

/// Runs every phase and returns the outcome with the full transcript.
pub fn run_auction(config: &AuctionConfig) -> Result<(AuctionOutcome, Transcript)> {
    let mut auction = Auction::new(config)?;
    let outcome = auction.run()?;
    Ok((outcome, auction.into_transcript()))
}
