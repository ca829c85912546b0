//! JSON-lines transcript of every send and publish made during a run.
//!
//! Group and exponent values appear as decimal strings. Point-to-point
//! payloads are sealed (`null`): the transcript records that a message moved
//! between two bidders but not what it carried.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Setup,
    Keygen,
    Commit,
    Sharing,
    Round,
    Verify,
    Winner,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Setup => "setup",
            Phase::Keygen => "keygen",
            Phase::Commit => "commit",
            Phase::Sharing => "sharing",
            Phase::Round => "round",
            Phase::Verify => "verify",
            Phase::Winner => "winner",
        };
        f.write_str(s)
    }
}

/// Who sent or received a record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Endpoint {
    Bidder(usize),
    Public,
    Seller,
    Coordinator,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Bidder(l) => write!(f, "{l}"),
            Endpoint::Public => f.write_str("public"),
            Endpoint::Seller => f.write_str("seller"),
            Endpoint::Coordinator => f.write_str("coordinator"),
        }
    }
}

impl From<Endpoint> for String {
    fn from(e: Endpoint) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for Endpoint {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "public" => Ok(Endpoint::Public),
            "seller" => Ok(Endpoint::Seller),
            "coordinator" => Ok(Endpoint::Coordinator),
            _ => s
                .parse::<usize>()
                .ok()
                .filter(|&l| l >= 1)
                .map(Endpoint::Bidder)
                .ok_or_else(|| format!("unknown endpoint {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub seq: u64,
    pub phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub sender: Endpoint,
    pub receiver: Endpoint,
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hop: Option<usize>,
    pub payload: Option<String>,
}

impl Record {
    pub fn new(phase: Phase, sender: Endpoint, receiver: Endpoint, tag: impl Into<String>) -> Self {
        Record {
            seq: 0,
            phase,
            j: None,
            sender,
            receiver,
            tag: tag.into(),
            origin: None,
            target: None,
            hop: None,
            payload: None,
        }
    }

    pub fn digit(mut self, j: usize) -> Self {
        self.j = Some(j);
        self
    }

    pub fn origin(mut self, origin: usize) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn target(mut self, target: usize) -> Self {
        self.target = Some(target);
        self
    }

    pub fn hop(mut self, hop: usize) -> Self {
        self.hop = Some(hop);
        self
    }

    pub fn payload(mut self, payload: impl ToString) -> Self {
        self.payload = Some(payload.to_string());
        self
    }
}

/// An append-only sequence of records with strictly increasing `seq`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    records: Vec<Record>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record, assigning the next sequence number.
    pub fn push(&mut self, mut record: Record) -> u64 {
        let seq = self.records.last().map_or(0, |r| r.seq + 1);
        record.seq = seq;
        self.records.push(record);
        seq
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Builds a transcript from records as-is, without renumbering. Used for
    /// audits of externally produced (possibly tampered) logs.
    pub fn from_records(records: Vec<Record>) -> Self {
        Transcript { records }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// Parses JSON lines. Blank lines are skipped; an input with no records
    /// is malformed.
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut records = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record =
                serde_json::from_str(&line).map_err(|e| Error::MalformedTranscript {
                    line: idx + 1,
                    reason: e.to_string(),
                })?;
            records.push(record);
        }
        if records.is_empty() {
            return Err(Error::MalformedTranscript {
                line: 0,
                reason: "transcript is empty".into(),
            });
        }
        Ok(Transcript { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut t = Transcript::new();
        t.push(Record::new(Phase::Round, Endpoint::Bidder(3), Endpoint::Public, "B").digit(1).origin(4).payload(1621));
        t.push(Record::new(Phase::Sharing, Endpoint::Bidder(1), Endpoint::Bidder(2), "bid_share"));
        let text = t.to_jsonl();
        assert!(text.contains(r#""payload":"1621""#));
        assert!(text.contains(r#""payload":null"#));
        let back = Transcript::read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.records()[1].seq, 1);
    }

    #[test]
    fn empty_and_garbage_are_malformed() {
        assert!(matches!(
            Transcript::read_jsonl("".as_bytes()),
            Err(Error::MalformedTranscript { line: 0, .. })
        ));
        let text = "{\"seq\":0}\n";
        assert!(matches!(
            Transcript::read_jsonl(text.as_bytes()),
            Err(Error::MalformedTranscript { line: 1, .. })
        ));
    }

    #[test]
    fn endpoints_parse() {
        assert_eq!("public".parse::<Endpoint>(), Ok(Endpoint::Public));
        assert_eq!("12".parse::<Endpoint>(), Ok(Endpoint::Bidder(12)));
        assert!("0".parse::<Endpoint>().is_err());
        assert_eq!(Phase::Keygen.to_string(), "keygen");
    }
}
