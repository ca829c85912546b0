//! Key values, check keys and fake keys, produced by three families of ring
//! transfers per `(origin, recipient, digit)`.

use sha2::{Digest, Sha256};

use crate::codes::SecretCodes;
use crate::error::{Error, Result};
use crate::field::{ExponentValue, FieldParams, GroupElement};
use crate::party::Bidder;
use crate::ringnet::Network;
use crate::transcript::Phase;

/// Bidder `owner`'s keys after key generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySet {
    owner: usize,
    keys: Vec<GroupElement>,
    checks: Vec<GroupElement>,
    fakes: Vec<GroupElement>,
    factors: Vec<Vec<GroupElement>>,
    commitment: String,
}

impl KeySet {
    /// Combines the returned per-origin factors. `k_factors[u-1][j-1]` is
    /// `K_{u,owner,j}`, and likewise for the fake and check factors.
    pub fn assemble(
        field: &FieldParams,
        owner: usize,
        k_factors: Vec<Vec<GroupElement>>,
        f_factors: &[Vec<GroupElement>],
        c_factors: &[Vec<GroupElement>],
    ) -> Self {
        let k = k_factors.first().map_or(0, Vec::len);
        let column = |table: &[Vec<GroupElement>], j: usize| field.product(table.iter().map(|row| row[j]));
        let keys = (0..k).map(|j| column(&k_factors, j)).collect();
        let checks = (0..k).map(|j| column(c_factors, j)).collect();
        let fakes = (0..k).map(|j| column(f_factors, j)).collect();
        let commitment = hex::encode(hash_commit(owner, &k_factors));
        KeySet {
            owner,
            keys,
            checks,
            fakes,
            factors: k_factors,
            commitment,
        }
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn key(&self, j: usize) -> GroupElement {
        self.keys[j - 1]
    }

    pub fn check(&self, j: usize) -> GroupElement {
        self.checks[j - 1]
    }

    pub fn fake(&self, j: usize) -> GroupElement {
        self.fakes[j - 1]
    }

    /// `K_{u,owner,j}`.
    pub fn factor(&self, u: usize, j: usize) -> GroupElement {
        self.factors[u - 1][j - 1]
    }

    pub fn factors(&self) -> &[Vec<GroupElement>] {
        &self.factors
    }

    /// Hex SHA-256 of the factor table, as sent to the seller.
    pub fn commitment(&self) -> &str {
        &self.commitment
    }
}

/// The three initial values a bidder sends into the ring for recipient `i`
/// at digit `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyTriplet {
    pub k: GroupElement,
    pub f: GroupElement,
    pub c: GroupElement,
}

pub fn init_key_triplet(field: &FieldParams, codes: &SecretCodes, i: usize, j: usize) -> KeyTriplet {
    let n = codes.n();
    let others = field.exp_sum((1..=n).filter(|&w| w != i).map(|w| codes.a(w, j)));
    let own = codes.a(i, j);
    let e = codes.e(j);
    let e2 = field.exp_mul(e, e);
    let base = field.exp_sub(own, others);
    let fake = field.exp_sub(field.exp_scale(own, 2 * n as i128 - 3), others);
    KeyTriplet {
        k: field.pow_g(field.exp_mul(base, e)),
        f: field.pow_g(field.exp_mul(fake, e2)),
        c: field.pow_g(field.exp_mul(base, e2)),
    }
}

/// Digest over records `owner:u:j:value`, `u` then `j` ascending, joined by
/// newlines.
pub fn hash_commit(owner: usize, factors: &[Vec<GroupElement>]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    let mut first = true;
    for (u, row) in factors.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !first {
                hasher.update(b"\n");
            }
            first = false;
            hasher.update(format!("{owner}:{}:{}:{}", u + 1, j + 1, v.value()).as_bytes());
        }
    }
    hasher.finalize().into()
}

/// Keys computed directly from every bidder's codes. Only the simulator can
/// do this; it serves as an oracle for the ring-transferred keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedFormKeys {
    pub keys: Vec<GroupElement>,
    pub checks: Vec<GroupElement>,
    pub fakes: Vec<GroupElement>,
}

pub fn indicator_y(field: &FieldParams, codes: &[SecretCodes], l: usize, j: usize) -> ExponentValue {
    field.exp_sum(codes.iter().map(|c| c.a(l, j)))
}

pub fn closed_form_keys(field: &FieldParams, codes: &[SecretCodes]) -> Vec<ClosedFormKeys> {
    let n = codes.len();
    let k = codes[0].k();
    let y: Vec<Vec<ExponentValue>> = (1..=n)
        .map(|l| (1..=k).map(|j| indicator_y(field, codes, l, j)).collect())
        .collect();
    let e1: Vec<ExponentValue> = (1..=k)
        .map(|j| field.exp_product(codes.iter().map(|c| c.e(j))))
        .collect();
    (1..=n)
        .map(|l| {
            let mut out = ClosedFormKeys {
                keys: vec![],
                checks: vec![],
                fakes: vec![],
            };
            for j in 1..=k {
                let own = y[l - 1][j - 1];
                let rest = field.exp_sum((1..=n).filter(|&h| h != l).map(|h| y[h - 1][j - 1]));
                let e2 = field.exp_mul(e1[j - 1], e1[j - 1]);
                let base = field.exp_sub(own, rest);
                let fake = field.exp_sub(field.exp_scale(own, 2 * n as i128 - 3), rest);
                out.keys.push(field.pow_g(field.exp_mul(base, e1[j - 1])));
                out.checks.push(field.pow_g(field.exp_mul(base, e2)));
                out.fakes.push(field.pow_g(field.exp_mul(fake, e2)));
            }
            out
        })
        .collect()
}

/// Runs every key transfer to completion and collects the seller
/// commitments.
pub fn run_key_generation(bidders: &mut [Bidder], net: &mut Network) -> Result<Vec<String>> {
    net.set_phase(Phase::Keygen);
    for b in bidders.iter_mut() {
        let actions = b.start_keygen();
        net.execute(b.index(), actions)?;
    }
    net.run(bidders)?;
    for b in bidders.iter_mut() {
        let actions = b.finish_keygen()?;
        net.execute(b.index(), actions)?;
    }
    (1..=bidders.len())
        .map(|l| {
            net.seller_commitment(l).map(str::to_owned).ok_or_else(|| Error::BrokenRing {
                phase: Phase::Keygen,
                detail: format!("seller holds no commitment from bidder {l}"),
            })
        })
        .collect()
}
