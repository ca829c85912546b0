use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `l -> l+1`, wrapping `n -> 1`.
    Forward,
    /// `l -> l-1`, wrapping `1 -> n`.
    Backward,
}

/// Bidders `1..=n` arranged in a ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingTopology {
    n: usize,
}

impl RingTopology {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewBidders(n));
        }
        Ok(RingTopology { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn next(&self, l: usize) -> usize {
        l % self.n + 1
    }

    pub fn prev(&self, l: usize) -> usize {
        (l + self.n - 2) % self.n + 1
    }

    pub fn step(&self, l: usize, dir: Direction) -> usize {
        match dir {
            Direction::Forward => self.next(l),
            Direction::Backward => self.prev(l),
        }
    }

    /// The `n-1` bidders a transfer started at `origin` visits, in order.
    pub fn visitors(&self, origin: usize, dir: Direction) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n - 1);
        let mut h = origin;
        for _ in 1..self.n {
            h = self.step(h, dir);
            out.push(h);
        }
        out
    }

    /// The bidder holding a transfer after its last transform.
    pub fn last_holder(&self, origin: usize, dir: Direction) -> usize {
        self.step(origin, match dir {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        })
    }
}
