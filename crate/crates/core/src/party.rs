//! The bidder state machine. A bidder only ever sees its own codes, the
//! messages addressed to it and the bulletin board.

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::codes::{compute_indicators, make_bid_shares, Bid, GeneratedShares, Indicators, SecretCodes};
use crate::error::{Error, Result};
use crate::field::{ExponentValue, FieldParams, GroupElement};
use crate::keygen::{init_key_triplet, KeySet};
use crate::ringnet::{Action, Message, Node, RingTopology, Tag, Terminal, TransferItem};
use crate::transcript::Phase;
use crate::verify::WinnerProof;

/// How a bidder departs from the protocol, if at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Behavior {
    #[default]
    Honest,
    /// When the loser rule fires, pushes later digits toward `Y` instead of `N`.
    InflateLoserAdjustment,
    /// Once round `after` ends, pushes every later digit toward `Y`.
    InflateAfter { after: usize },
    /// Drops every transfer item it should forward during `phase`.
    Silent { phase: Phase },
}

#[derive(Debug)]
pub struct Bidder {
    index: usize,
    field: FieldParams,
    topology: RingTopology,
    codes: SecretCodes,
    bid: Bid,
    behavior: Behavior,
    rng: ChaCha20Rng,
    share_fixture: Option<Vec<Vec<ExponentValue>>>,
    received_a: Vec<Option<Vec<ExponentValue>>>,
    indicators: Option<Indicators>,
    shares: Option<GeneratedShares>,
    received_b: Vec<Option<Vec<ExponentValue>>>,
    k_factors: Vec<Vec<Option<GroupElement>>>,
    f_factors: Vec<Vec<Option<GroupElement>>>,
    c_factors: Vec<Vec<Option<GroupElement>>>,
    keys: Option<KeySet>,
    sole: Vec<bool>,
    masks: Vec<Vec<Option<GroupElement>>>,
}

fn missing_table(n: usize, k: usize) -> Vec<Vec<Option<GroupElement>>> {
    vec![vec![None; k]; n]
}

impl Bidder {
    pub fn new(
        field: FieldParams,
        codes: SecretCodes,
        bid: Bid,
        behavior: Behavior,
        rng: ChaCha20Rng,
    ) -> Result<Self> {
        let (n, k) = (codes.n(), codes.k());
        if bid.k() != k {
            return Err(Error::Dimensions(format!("bid has {} bits, codes have {k}", bid.k())));
        }
        Ok(Bidder {
            index: codes.owner(),
            field,
            topology: RingTopology::new(n)?,
            codes,
            bid,
            behavior,
            rng,
            share_fixture: None,
            received_a: vec![None; n],
            indicators: None,
            shares: None,
            received_b: vec![None; n],
            k_factors: missing_table(n, k),
            f_factors: missing_table(n, k),
            c_factors: missing_table(n, k),
            keys: None,
            sole: vec![false; k],
            masks: missing_table(k, n),
        })
    }

    /// Uses `rows[i-1] = b_{i,self,·}` instead of fresh random shares.
    pub fn with_share_fixture(mut self, rows: Vec<Vec<ExponentValue>>) -> Self {
        self.share_fixture = Some(rows);
        self
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n(&self) -> usize {
        self.topology.n()
    }

    pub fn k(&self) -> usize {
        self.codes.k()
    }

    pub fn codes(&self) -> &SecretCodes {
        &self.codes
    }

    pub fn bid(&self) -> &Bid {
        &self.bid
    }

    pub fn behavior(&self) -> Behavior {
        self.behavior
    }

    pub fn set_behavior(&mut self, behavior: Behavior) {
        self.behavior = behavior;
    }

    pub fn keys(&self) -> Option<&KeySet> {
        self.keys.as_ref()
    }

    pub fn indicators(&self) -> Option<&Indicators> {
        self.indicators.as_ref()
    }

    pub fn shares(&self) -> Option<&GeneratedShares> {
        self.shares.as_ref()
    }

    pub fn was_sole(&self, j: usize) -> bool {
        self.sole[j - 1]
    }

    fn key_set(&self) -> Result<&KeySet> {
        self.keys.as_ref().ok_or_else(|| Error::BrokenRing {
            phase: Phase::Keygen,
            detail: format!("bidder {} has no keys", self.index),
        })
    }

    fn send_item(&self, item: TransferItem) -> Action {
        let to = self.topology.step(self.index, item.tag.direction());
        Action::Send { to, msg: Message::Transfer(item) }
    }

    fn originate(&self, tag: Tag, exponent: ExponentValue) -> Action {
        self.originate_value(tag, self.field.pow_g(exponent))
    }

    fn originate_value(&self, tag: Tag, payload: GroupElement) -> Action {
        self.send_item(TransferItem { origin: self.index, tag, hop: 1, payload })
    }

    pub fn start_keygen(&mut self) -> Vec<Action> {
        let (n, k) = (self.n(), self.k());
        let mut out = Vec::with_capacity(3 * n * k);
        for i in 1..=n {
            for j in 1..=k {
                let t = init_key_triplet(&self.field, &self.codes, i, j);
                out.push(self.originate_value(Tag::Key { i, j }, t.k));
                out.push(self.originate_value(Tag::Fake { i, j }, t.f));
                out.push(self.originate_value(Tag::Check { i, j }, t.c));
            }
        }
        out
    }

    fn store_factor(&mut self, origin: usize, tag: Tag, value: GroupElement) -> Result<()> {
        let (table, j) = match tag {
            Tag::Key { j, .. } => (&mut self.k_factors, j),
            Tag::Fake { j, .. } => (&mut self.f_factors, j),
            Tag::Check { j, .. } => (&mut self.c_factors, j),
            other => {
                return Err(Error::BrokenRing {
                    phase: other.phase(),
                    detail: format!("bidder {} was handed a finished {} item", self.index, other.name()),
                })
            }
        };
        table[origin - 1][j - 1] = Some(value);
        Ok(())
    }

    fn on_transfer(&mut self, item: TransferItem) -> Result<Vec<Action>> {
        let n = self.n();
        if item.hop == 0 || item.hop > n {
            return Err(Error::WrongHopCount { hop: item.hop, n });
        }
        if item.hop == n {
            return match item.tag.terminal() {
                Terminal::ReturnTo(i) if i == self.index => {
                    self.store_factor(item.origin, item.tag, item.payload)?;
                    Ok(vec![])
                }
                _ => Err(Error::WrongHopCount { hop: item.hop, n }),
            };
        }
        if matches!(self.behavior, Behavior::Silent { phase } if phase == item.tag.phase()) {
            return Ok(vec![]);
        }
        let t = item
            .tag
            .transform()
            .exponent(&self.field, &self.codes, item.tag.j(), item.hop);
        let next = TransferItem {
            hop: item.hop + 1,
            payload: self.field.pow(item.payload, t),
            ..item
        };
        if next.hop < n {
            return Ok(vec![self.send_item(next)]);
        }
        match next.tag.terminal() {
            Terminal::ReturnTo(i) if i == self.index => {
                self.store_factor(next.origin, next.tag, next.payload)?;
                Ok(vec![])
            }
            Terminal::ReturnTo(i) => Ok(vec![Action::Send { to: i, msg: Message::Transfer(next) }]),
            Terminal::Publish => Ok(vec![Action::Publish {
                family: next.tag.family().expect("published tags have a family"),
                origin: next.origin,
                payload: next.payload,
            }]),
        }
    }

    /// Multiplies the returned factors into the key set and commits to the
    /// key factors with the seller.
    pub fn finish_keygen(&mut self) -> Result<Vec<Action>> {
        let index = self.index;
        let complete = |table: &[Vec<Option<GroupElement>>], name: &str| -> Result<Vec<Vec<GroupElement>>> {
            table
                .iter()
                .enumerate()
                .map(|(u, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, v)| {
                            v.ok_or_else(|| Error::BrokenRing {
                                phase: Phase::Keygen,
                                detail: format!("{name}_{{{},{index},{}}} never reached bidder {index}", u + 1, j + 1),
                            })
                        })
                        .collect()
                })
                .collect()
        };
        let kf = complete(&self.k_factors, "K")?;
        let ff = complete(&self.f_factors, "F")?;
        let cf = complete(&self.c_factors, "C")?;
        let keys = KeySet::assemble(&self.field, self.index, kf, &ff, &cf);
        let digest = keys.commitment().to_owned();
        self.keys = Some(keys);
        Ok(vec![Action::CommitToSeller { digest }])
    }

    /// Reuses a key set from an earlier auction.
    pub fn install_keys(&mut self, keys: KeySet) {
        self.keys = Some(keys);
    }

    pub fn start_commit(&mut self) -> Vec<Action> {
        let x = self.field.exp_mul(self.field.exponent_u64(self.bid.value()), self.codes.c(1));
        vec![self.originate(Tag::Commit, x)]
    }

    pub fn start_verify(&mut self, price: u64) -> Vec<Action> {
        let x = self.field.exp_mul(self.field.exponent_u64(price), self.codes.c(1));
        vec![self.originate(Tag::Verify, x)]
    }

    pub fn send_codes(&mut self) -> Vec<Action> {
        let me = self.index;
        self.received_a[me - 1] = Some(self.codes.a_row(me).to_vec());
        (1..=self.n())
            .filter(|&i| i != me)
            .map(|i| Action::Send { to: i, msg: Message::CodeShare(self.codes.a_row(i).to_vec()) })
            .collect()
    }

    pub fn send_bid_shares(&mut self) -> Result<Vec<Action>> {
        let (n, k, me) = (self.n(), self.k(), self.index);
        let ind = compute_indicators(&self.field, me, k, &self.received_a)?;
        let shares = match self.share_fixture.take() {
            Some(rows) => GeneratedShares::from_rows(me, rows),
            None => make_bid_shares(&self.field, me, &self.bid, &ind, n, &mut self.rng),
        };
        let out = (1..=n)
            .filter(|&i| i != me)
            .map(|i| Action::Send { to: i, msg: Message::BidShare(shares.row(i).to_vec()) })
            .collect();
        self.indicators = Some(ind);
        self.shares = Some(shares);
        Ok(out)
    }

    /// `Σ_i b_{self,i,j}`, with the own share taken from the live (possibly
    /// adjusted) generated shares.
    fn received_sum(&self, j: usize) -> Result<ExponentValue> {
        let me = self.index;
        let mut acc = ExponentValue::ZERO;
        for (idx, row) in self.received_b.iter().enumerate() {
            let v = if idx + 1 == me {
                self.shares.as_ref().map(|s| s.share(me, j))
            } else {
                row.as_ref().map(|r| r[j - 1])
            };
            let v = v.ok_or(Error::MissingShare { bidder: me, from: idx + 1 })?;
            acc = self.field.exp_add(acc, v);
        }
        Ok(acc)
    }

    pub fn start_bp(&mut self, j: usize) -> Result<Vec<Action>> {
        let s = self.received_sum(j)?;
        let e = self.codes.e(j);
        let e3 = self.field.exp_mul(self.field.exp_mul(e, e), e);
        Ok(vec![
            self.originate(Tag::B { j }, self.field.exp_mul(s, e)),
            self.originate(Tag::P { j }, self.field.exp_mul(s, e3)),
        ])
    }

    /// Sole check against the published `B_j`, then mask shares whose product
    /// is the fake key if sole and the check key otherwise.
    pub fn send_masks(&mut self, j: usize, b_j: GroupElement) -> Result<Vec<Action>> {
        let keys = self.key_set()?;
        let sole = keys.key(j) == b_j;
        let target = if sole { keys.fake(j) } else { keys.check(j) };
        let d = choose_mask_shares(&self.field, self.n(), target, &mut self.rng);
        self.sole[j - 1] = sole;
        if sole {
            self.adjust(j, true);
        }
        let me = self.index;
        self.masks[j - 1][me - 1] = Some(d[me - 1]);
        Ok((1..=self.n())
            .filter(|&i| i != me)
            .map(|i| Action::Send { to: i, msg: Message::MaskShare { j, value: d[i - 1] } })
            .collect())
    }

    pub fn start_d(&mut self, j: usize) -> Result<Vec<Action>> {
        let me = self.index;
        let mut prod = GroupElement::ONE;
        for (idx, d) in self.masks[j - 1].iter().enumerate() {
            let d = d.ok_or(Error::MissingShare { bidder: me, from: idx + 1 })?;
            prod = self.field.mul(prod, d);
        }
        let payload = self.field.pow(prod, self.codes.e(j));
        Ok(vec![self.originate_value(Tag::D { j }, payload)])
    }

    fn adjust(&mut self, j: usize, toward_y: bool) {
        if let (Some(shares), Some(ind)) = (self.shares.as_mut(), self.indicators.as_ref()) {
            if toward_y {
                shares.adjust_winner(&self.field, ind, j);
            } else {
                shares.adjust_loser(&self.field, ind, j);
            }
        }
    }

    /// Applies the loser rule after the digit of round `j` is public.
    pub fn conclude_round(&mut self, j: usize, digit: bool) {
        let dropped = match (&self.shares, &self.indicators) {
            (Some(s), Some(ind)) => digit && s.sum(&self.field, j) == ind.n(j),
            _ => false,
        };
        match self.behavior {
            Behavior::InflateLoserAdjustment if dropped => self.adjust(j, true),
            _ if dropped => self.adjust(j, false),
            _ => {}
        }
        if let Behavior::InflateAfter { after } = self.behavior {
            if after == j {
                self.adjust(j, true);
            }
        }
    }

    /// The factors behind `K_{self,j}`, bound to the seller commitment.
    pub fn proof(&self, j: usize) -> Option<WinnerProof> {
        let keys = self.keys.as_ref()?;
        Some(WinnerProof {
            claimant: self.index,
            j,
            factors: keys.factors().to_vec(),
        })
    }

    /// An honest bidder comes forward only if its key matches `B_{j'}`.
    pub fn claim(&self, j: usize, b_j: GroupElement) -> Option<WinnerProof> {
        let keys = self.keys.as_ref()?;
        (keys.key(j) == b_j).then(|| self.proof(j)).flatten()
    }
}

impl Node for Bidder {
    fn handle(&mut self, from: usize, msg: Message) -> Result<Vec<Action>> {
        match msg {
            Message::Transfer(item) => self.on_transfer(item),
            Message::CodeShare(values) => {
                self.received_a[from - 1] = Some(values);
                Ok(vec![])
            }
            Message::BidShare(values) => {
                self.received_b[from - 1] = Some(values);
                Ok(vec![])
            }
            Message::MaskShare { j, value } => {
                self.masks[j - 1][from - 1] = Some(value);
                Ok(vec![])
            }
        }
    }
}

/// `n` non-zero factors of `target`: `n-1` uniform ones and a closing one.
pub fn choose_mask_shares<R: Rng + ?Sized>(
    field: &FieldParams,
    n: usize,
    target: GroupElement,
    rng: &mut R,
) -> Vec<GroupElement> {
    let mut d: Vec<GroupElement> = (1..n).map(|_| field.random_element(rng)).collect();
    let partial = field.product(d.iter().copied());
    d.push(field.div(target, partial));
    d
}
