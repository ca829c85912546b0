use std::collections::VecDeque;

use log::trace;

use crate::error::{Error, Result};
use crate::field::{ExponentValue, GroupElement};
use crate::transcript::{Endpoint, Phase, Record, Transcript};

use super::board::{BulletinBoard, Family};
use super::transfer::TransferItem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    Transfer(TransferItem),
    /// `a_{sender,receiver,·}`.
    CodeShare(Vec<ExponentValue>),
    /// `b_{receiver,sender,·}`.
    BidShare(Vec<ExponentValue>),
    /// `d_{receiver,sender,j}`.
    MaskShare { j: usize, value: GroupElement },
}

impl Message {
    fn record(&self, phase: Phase, from: usize, to: usize) -> Record {
        let base = |tag: &str| Record::new(phase, Endpoint::Bidder(from), Endpoint::Bidder(to), tag);
        match self {
            Message::Transfer(item) => {
                let mut r = base(item.tag.name()).origin(item.origin).hop(item.hop);
                r.j = item.tag.j();
                if let super::Terminal::ReturnTo(i) = item.tag.terminal() {
                    r.target = Some(i);
                }
                r
            }
            Message::CodeShare(_) => base("code_share"),
            Message::BidShare(_) => base("bid_share"),
            Message::MaskShare { j, .. } => base("mask_share").digit(*j),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub from: usize,
    pub to: usize,
    pub msg: Message,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Send { to: usize, msg: Message },
    Publish { family: Family, origin: usize, payload: GroupElement },
    CommitToSeller { digest: String },
}

/// A bidder as seen by the bus.
pub trait Node {
    fn handle(&mut self, from: usize, msg: Message) -> Result<Vec<Action>>;
}

/// In-process delivery with a single FIFO queue, which also gives FIFO order
/// on every sender-receiver edge. Every send and publish is mirrored to the
/// transcript.
#[derive(Debug)]
pub struct Network {
    n: usize,
    phase: Phase,
    queue: VecDeque<Envelope>,
    board: BulletinBoard,
    transcript: Transcript,
    seller: Vec<Option<String>>,
    sends: Vec<usize>,
}

impl Network {
    pub fn new(n: usize) -> Self {
        Network {
            n,
            phase: Phase::Setup,
            queue: VecDeque::new(),
            board: BulletinBoard::new(),
            transcript: Transcript::new(),
            seller: vec![None; n],
            sends: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn board(&self) -> &BulletinBoard {
        &self.board
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    /// Appends a record that is not tied to a bidder action, such as the
    /// coordinator's public announcements.
    pub fn post(&mut self, record: Record) {
        self.transcript.push(record);
    }

    pub fn seller_commitment(&self, l: usize) -> Option<&str> {
        self.seller[l - 1].as_deref()
    }

    pub fn sends_by(&self, l: usize) -> usize {
        self.sends[l - 1]
    }

    pub fn total_sends(&self) -> usize {
        self.sends.iter().sum()
    }

    pub fn execute(&mut self, author: usize, actions: Vec<Action>) -> Result<()> {
        for action in actions {
            match action {
                Action::Send { to, msg } => {
                    if to == 0 || to > self.n {
                        return Err(Error::Dimensions(format!("bidder {author} sent to unknown bidder {to}")));
                    }
                    self.transcript.push(msg.record(self.phase, author, to));
                    self.sends[author - 1] += 1;
                    self.queue.push_back(Envelope { from: author, to, msg });
                }
                Action::Publish { family, origin, payload } => {
                    self.board
                        .append(self.phase, Endpoint::Bidder(author), family, origin, payload);
                    let mut r = Record::new(self.phase, Endpoint::Bidder(author), Endpoint::Public, family.name())
                        .origin(origin)
                        .payload(payload);
                    r.j = family.j();
                    self.transcript.push(r);
                }
                Action::CommitToSeller { digest } => {
                    self.transcript.push(
                        Record::new(self.phase, Endpoint::Bidder(author), Endpoint::Seller, "commitment")
                            .payload(&digest),
                    );
                    self.seller[author - 1] = Some(digest);
                }
            }
        }
        Ok(())
    }

    /// Delivers queued messages until the network is idle.
    pub fn run<N: Node>(&mut self, nodes: &mut [N]) -> Result<()> {
        while let Some(env) = self.queue.pop_front() {
            trace!("deliver {} -> {}: {:?}", env.from, env.to, env.msg);
            let actions = nodes[env.to - 1].handle(env.from, env.msg)?;
            self.execute(env.to, actions)?;
        }
        Ok(())
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }
}
