use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldParams, GroupElement};
use crate::transcript::{Endpoint, Phase};

/// A set of `n` published values, one per transfer origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Commit,
    Verify,
    B(usize),
    P(usize),
    D(usize),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Commit => "commit",
            Family::Verify => "verify",
            Family::B(_) => "B",
            Family::P(_) => "P",
            Family::D(_) => "D",
        }
    }

    pub fn j(&self) -> Option<usize> {
        match *self {
            Family::B(j) | Family::P(j) | Family::D(j) => Some(j),
            Family::Commit | Family::Verify => None,
        }
    }

    pub fn phase(&self) -> Phase {
        match self {
            Family::Commit => Phase::Commit,
            Family::Verify => Phase::Verify,
            _ => Phase::Round,
        }
    }

    pub fn from_parts(name: &str, j: Option<usize>) -> Option<Family> {
        match (name, j) {
            ("commit", None) => Some(Family::Commit),
            ("verify", None) => Some(Family::Verify),
            ("B", Some(j)) => Some(Family::B(j)),
            ("P", Some(j)) => Some(Family::P(j)),
            ("D", Some(j)) => Some(Family::D(j)),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.j() {
            Some(j) => write!(f, "{}_{j}", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub id: u64,
    pub phase: Phase,
    pub author: Endpoint,
    pub family: Family,
    pub origin: usize,
    pub payload: GroupElement,
}

/// Append-only public channel. Entries are never modified or removed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BulletinBoard {
    entries: Vec<Entry>,
}

impl BulletinBoard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(
        &mut self,
        phase: Phase,
        author: Endpoint,
        family: Family,
        origin: usize,
        payload: GroupElement,
    ) -> u64 {
        let id = self.entries.len() as u64;
        self.entries.push(Entry {
            id,
            phase,
            author,
            family,
            origin,
            payload,
        });
        id
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// The first value published for `origin` in `family`.
    pub fn get(&self, family: Family, origin: usize) -> Option<GroupElement> {
        self.entries
            .iter()
            .find(|e| e.family == family && e.origin == origin)
            .map(|e| e.payload)
    }

    /// `family` indexed by origin `1..=n`, failing if any slot is missing.
    pub fn vector(&self, family: Family, n: usize) -> Result<Vec<GroupElement>> {
        let slots: Vec<_> = (1..=n).map(|o| self.get(family, o)).collect();
        let missing: Vec<usize> = slots
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| i + 1)
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteFamily {
                family: family.to_string(),
                missing,
            });
        }
        Ok(slots.into_iter().flatten().collect())
    }

    pub fn aggregate_product(
        &self,
        field: &FieldParams,
        family: Family,
        n: usize,
    ) -> Result<GroupElement> {
        Ok(field.product(self.vector(family, n)?))
    }
}
