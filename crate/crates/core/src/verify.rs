//! Price verification against the committed bids, winner determination and
//! the secret-free transcript audit.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::Serialize;

use crate::auction::{collect_family, OutputPrice, RoundState};
use crate::error::{Error, Result};
use crate::field::{FieldParams, GroupElement};
use crate::keygen::hash_commit;
use crate::party::Bidder;
use crate::ringnet::{Family, Network};
use crate::transcript::{Endpoint, Phase, Record, Transcript};

/// A claim to the seller: the claimant's full key-factor table, so the
/// seller can check it against the keygen commitment, and the digit `j'`
/// whose key must match `B_{j'}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinnerProof {
    pub claimant: usize,
    pub j: usize,
    pub factors: Vec<Vec<GroupElement>>,
}

impl WinnerProof {
    /// `∏_u K_{u,claimant,j}`.
    pub fn product(&self, field: &FieldParams) -> GroupElement {
        field.product(self.factors.iter().map(|row| row[self.j - 1]))
    }

    /// Rows separated by `;`, values by `,`.
    pub fn encode(&self) -> String {
        self.factors
            .iter()
            .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn decode(field: &FieldParams, claimant: usize, j: usize, text: &str) -> Result<Self> {
        let factors = text
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|v| {
                        let v: u64 = v
                            .trim()
                            .parse()
                            .map_err(|_| Error::InvalidFixture(format!("bad factor {v:?}")))?;
                        field.element(v)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let k = factors.first().map_or(0, Vec::len);
        if k == 0 || factors.iter().any(|r| r.len() != k) || j == 0 || j > k {
            return Err(Error::Dimensions("factor table is ragged or misses the claimed digit".into()));
        }
        Ok(WinnerProof { claimant, j, factors })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub vector: Vec<GroupElement>,
    pub matching_slots: Vec<usize>,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuctionOutcome {
    pub price: OutputPrice,
    pub accepted: bool,
    pub matching_slots: Vec<usize>,
    pub winner: Option<usize>,
    pub tie: bool,
    /// Bidders who came forward with a proof, valid or not.
    pub claimants: Vec<usize>,
    pub valid_claims: Vec<usize>,
}

/// Slot `i` holds the chain that started at bidder `i`.
pub fn matching_slots(commitments: &[GroupElement], verification: &[GroupElement]) -> Vec<usize> {
    commitments
        .iter()
        .zip(verification)
        .enumerate()
        .filter(|(_, (a, b))| a == b)
        .map(|(i, _)| i + 1)
        .collect()
}

fn join_indices(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_indices(s: &str) -> Option<Vec<usize>> {
    if s.is_empty() {
        return Some(vec![]);
    }
    s.split(',').map(|x| x.parse().ok()).collect()
}

pub fn verify_price(
    bidders: &mut [Bidder],
    net: &mut Network,
    price: u64,
    commitments: &[GroupElement],
) -> Result<Verification> {
    net.set_phase(Phase::Verify);
    for b in bidders.iter_mut() {
        let actions = b.start_verify(price);
        net.execute(b.index(), actions)?;
    }
    net.run(bidders)?;
    let vector = collect_family(net, Family::Verify)?;
    let slots = matching_slots(commitments, &vector);
    let accepted = !slots.is_empty();
    net.post(Record::new(Phase::Verify, Endpoint::Coordinator, Endpoint::Public, "slots").payload(join_indices(&slots)));
    net.post(Record::new(Phase::Verify, Endpoint::Coordinator, Endpoint::Public, "accepted").payload(accepted));
    Ok(Verification {
        vector,
        matching_slots: slots,
        accepted,
    })
}

/// Valid iff the factors hash to the claimant's commitment, the claim names
/// the last zero digit of the price and the factors multiply to `B_{j'}`.
pub fn check_winner_proof(
    field: &FieldParams,
    proof: &WinnerProof,
    price: &OutputPrice,
    b_jp: GroupElement,
    commitment: &str,
) -> Result<bool> {
    let jp = price.last_zero_digit().ok_or(Error::NoZeroDigit)?;
    if proof.j != jp || proof.factors.iter().any(|r| r.len() < jp) {
        return Ok(false);
    }
    let digest = hex::encode(hash_commit(proof.claimant, &proof.factors));
    Ok(digest == commitment && proof.product(field) == b_jp)
}

/// Picks the winner once the price is accepted: the one valid claimant if
/// there is one, otherwise a uniform draw from the matching slots. Returns
/// the winner and whether the draw was used.
pub fn break_tie<R: Rng + ?Sized>(
    matching_slots: &[usize],
    valid_claims: &[usize],
    rng: &mut R,
) -> Result<(usize, bool)> {
    match valid_claims {
        [one] => Ok((*one, false)),
        [] => {
            if matching_slots.is_empty() {
                return Err(Error::InvalidConfig("no matching slot to draw a winner from".into()));
            }
            Ok((matching_slots[rng.gen_range(0..matching_slots.len())], true))
        }
        many => Err(Error::MultipleValidClaims(many.to_vec())),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn determine_winner<R: Rng + ?Sized>(
    field: &FieldParams,
    bidders: &[Bidder],
    net: &mut Network,
    price: &OutputPrice,
    rounds: &[RoundState],
    verification: &Verification,
    seller: &[String],
    rng: &mut R,
) -> Result<AuctionOutcome> {
    net.set_phase(Phase::Winner);
    let mut outcome = AuctionOutcome {
        price: price.clone(),
        accepted: verification.accepted,
        matching_slots: verification.matching_slots.clone(),
        winner: None,
        tie: false,
        claimants: vec![],
        valid_claims: vec![],
    };
    if !verification.accepted {
        return Ok(outcome);
    }
    if let Some(jp) = price.last_zero_digit() {
        let b_jp = rounds[jp - 1].b;
        for b in bidders {
            let Some(proof) = b.claim(jp, b_jp) else { continue };
            net.post(
                Record::new(Phase::Winner, Endpoint::Bidder(b.index()), Endpoint::Seller, "claim")
                    .digit(jp)
                    .payload(proof.encode()),
            );
            outcome.claimants.push(b.index());
            if check_winner_proof(field, &proof, price, b_jp, &seller[b.index() - 1])? {
                outcome.valid_claims.push(b.index());
            }
        }
    }
    let (winner, tie) = break_tie(&outcome.matching_slots, &outcome.valid_claims, rng)?;
    let tag = if tie { "tie_winner" } else { "winner" };
    net.post(Record::new(Phase::Winner, Endpoint::Seller, Endpoint::Public, tag).payload(winner));
    outcome.winner = Some(winner);
    outcome.tie = tie;
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub pass: bool,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub checks: Vec<Check>,
    pub verdict: String,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// True if a check called `name` (at digit `j`, when given) failed.
    pub fn failed(&self, name: &str, j: Option<usize>) -> bool {
        self.failures()
            .any(|c| c.name == name && (j.is_none() || c.j == j))
    }
}

struct Report(Vec<Check>);

impl Report {
    fn add(&mut self, name: &str, j: Option<usize>, expected: impl ToString, actual: impl ToString) {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        self.0.push(Check {
            name: name.into(),
            j,
            pass: expected == actual,
            expected,
            actual,
        });
    }

    fn finish(self) -> AuditReport {
        let verdict = if self.0.iter().all(|c| c.pass) { "pass" } else { "fail" };
        AuditReport {
            checks: self.0,
            verdict: verdict.into(),
        }
    }
}

#[derive(Default)]
struct Board {
    params: HashMap<&'static str, u64>,
    seller: BTreeMap<usize, String>,
    families: HashMap<Family, BTreeMap<usize, u64>>,
    posted: HashMap<(String, usize), String>,
    price: Option<u64>,
    slots: Option<Vec<usize>>,
    accepted: Option<bool>,
    claims: Vec<(usize, usize, String)>,
    winner: Option<(String, usize)>,
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedTranscript {
        line,
        reason: reason.into(),
    }
}

fn parse_board(t: &Transcript) -> Result<Board> {
    let mut b = Board::default();
    for (idx, r) in t.records().iter().enumerate() {
        let line = idx + 1;
        let payload = || r.payload.as_deref().ok_or_else(|| malformed(line, format!("{} has no payload", r.tag)));
        let number = || -> Result<u64> {
            payload()?.parse().map_err(|_| malformed(line, format!("{} payload is not a decimal", r.tag)))
        };
        let digit = || r.j.ok_or_else(|| malformed(line, format!("{} has no digit", r.tag)));
        match (r.receiver, r.tag.as_str()) {
            (Endpoint::Public, tag @ ("p" | "g" | "n" | "k")) if r.sender == Endpoint::Coordinator => {
                let key = match tag {
                    "p" => "p",
                    "g" => "g",
                    "n" => "n",
                    _ => "k",
                };
                b.params.insert(key, number()?);
            }
            (Endpoint::Seller, "commitment") => {
                let Endpoint::Bidder(l) = r.sender else {
                    return Err(malformed(line, "commitment from a non-bidder"));
                };
                b.seller.entry(l).or_insert(payload()?.to_owned());
            }
            (Endpoint::Public, name @ ("commit" | "verify" | "B" | "P" | "D")) => {
                let family = Family::from_parts(name, r.j)
                    .ok_or_else(|| malformed(line, format!("{name} with wrong digit field")))?;
                let origin = r.origin.ok_or_else(|| malformed(line, format!("{name} has no origin")))?;
                b.families.entry(family).or_default().entry(origin).or_insert(number()?);
            }
            (Endpoint::Public, tag @ ("B_j" | "P_j" | "D_j" | "digit")) => {
                b.posted.insert((tag.to_owned(), digit()?), payload()?.to_owned());
            }
            (Endpoint::Public, "price") => b.price = Some(number()?),
            (Endpoint::Public, "slots") => {
                b.slots = Some(parse_indices(payload()?).ok_or_else(|| malformed(line, "bad slot list"))?)
            }
            (Endpoint::Public, "accepted") => {
                b.accepted = Some(payload()?.parse().map_err(|_| malformed(line, "accepted is not a boolean"))?)
            }
            (Endpoint::Seller, "claim") => {
                let Endpoint::Bidder(l) = r.sender else {
                    return Err(malformed(line, "claim from a non-bidder"));
                };
                b.claims.push((l, digit()?, payload()?.to_owned()));
            }
            (Endpoint::Public, tag @ ("winner" | "tie_winner")) => {
                b.winner = Some((tag.to_owned(), number()? as usize));
            }
            _ => {}
        }
    }
    Ok(b)
}

fn show(v: Option<GroupElement>) -> String {
    v.map_or_else(|| "missing".into(), |v| v.to_string())
}

/// Recomputes every public decision from the published values alone.
pub fn audit_transcript(t: &Transcript) -> Result<AuditReport> {
    if t.is_empty() {
        return Err(malformed(0, "transcript is empty"));
    }
    let board = parse_board(t)?;
    let mut report = Report(vec![]);

    let bad_seq = t
        .records()
        .windows(2)
        .position(|w| w[1].seq <= w[0].seq)
        .map(|i| format!("seq {} follows {}", t.records()[i + 1].seq, t.records()[i].seq));
    report.add("sequence", None, "strictly increasing", bad_seq.as_deref().unwrap_or("strictly increasing"));

    let param = |name: &str| board.params.get(name).copied();
    let (Some(p), Some(g), Some(n), Some(k)) = (param("p"), param("g"), param("n"), param("k")) else {
        return Err(malformed(0, "missing field parameters"));
    };
    let (n, k) = (n as usize, k as usize);
    let field = match FieldParams::new(p, g) {
        Ok(f) => f,
        Err(e) => {
            report.add("params", None, "valid field", e);
            return Ok(report.finish());
        }
    };
    report.add("params", None, "valid field", "valid field");

    let with_seller = (1..=n).filter(|l| board.seller.contains_key(l)).count();
    report.add("seller_commitments", None, n, with_seller);

    let vector = |family: Family| -> Option<Vec<GroupElement>> {
        let entries = board.families.get(&family)?;
        (1..=n)
            .map(|o| entries.get(&o).and_then(|&v| field.element(v).ok()))
            .collect()
    };
    let aggregate = |family: Family| vector(family).map(|v| field.product(v));

    // Indexed by digit; slot 0 is unused.
    let mut b_values = vec![None];
    let mut digits = vec![];
    for j in 1..=k {
        let b_j = aggregate(Family::B(j));
        let p_j = aggregate(Family::P(j));
        let d_j = aggregate(Family::D(j));
        b_values.push(b_j);
        for (name, tag, value) in [("aggregate_B", "B_j", b_j), ("aggregate_P", "P_j", p_j), ("aggregate_D", "D_j", d_j)] {
            let posted = board.posted.get(&(tag.to_owned(), j)).cloned().unwrap_or_else(|| "missing".into());
            report.add(name, Some(j), show(value), posted);
        }
        let recomputed = match (d_j, p_j) {
            (Some(d), Some(pv)) => {
                let power = field.pow(pv, field.exponent(n as i128 - 2));
                Some((d != power) as u8)
            }
            _ => None,
        };
        let posted = board.posted.get(&("digit".to_owned(), j)).cloned();
        report.add(
            "digit",
            Some(j),
            recomputed.map_or("missing".into(), |d| d.to_string()),
            posted.clone().unwrap_or_else(|| "missing".into()),
        );
        digits.push(posted.as_deref() == Some("1"));
    }
    let price = OutputPrice::from_bits(digits);
    report.add(
        "price",
        None,
        price.value,
        board.price.map_or("missing".into(), |v| v.to_string()),
    );

    let commit = vector(Family::Commit);
    let verify = vector(Family::Verify);
    let slots = match (&commit, &verify) {
        (Some(c), Some(v)) => Some(matching_slots(c, v)),
        _ => None,
    };
    let accepted = slots.as_ref().map(|s| !s.is_empty());
    let expected = format!(
        "accepted={} slots=[{}]",
        accepted.map_or("missing".into(), |a| a.to_string()),
        slots.as_deref().map_or("missing".into(), join_indices)
    );
    let actual = format!(
        "accepted={} slots=[{}]",
        board.accepted.map_or("missing".into(), |a| a.to_string()),
        board.slots.as_deref().map_or("missing".into(), join_indices)
    );
    report.add("verification", None, expected, actual);

    let mut valid = vec![];
    for (claimant, j, text) in &board.claims {
        let outcome = match WinnerProof::decode(&field, *claimant, *j, text) {
            Ok(proof) => {
                let b_jp = b_values.get(*j).copied().flatten();
                let commitment = board.seller.get(claimant).map(String::as_str).unwrap_or("");
                match b_jp {
                    Some(b_jp) => check_winner_proof(&field, &proof, &price, b_jp, commitment)
                        .map_or_else(|e| e.to_string(), |ok| if ok { "valid".into() } else { "invalid".into() }),
                    None => "no B for claimed digit".into(),
                }
            }
            Err(e) => e.to_string(),
        };
        if outcome == "valid" {
            valid.push(*claimant);
        }
        // A claim is only ever made by a bidder whose key matched; a failing
        // one is either a cheat or a tampered record.
        report.add("winner_proof", Some(*j), "valid", outcome);
    }

    let expected_winner = match (accepted, valid.as_slice()) {
        (Some(true), [one]) => format!("winner {one}"),
        (Some(true), []) => format!("tie_winner in [{}]", slots.as_deref().map_or(String::new(), join_indices)),
        (Some(true), many) => format!("conflicting claims {many:?}"),
        _ => "none".into(),
    };
    let actual_winner = match &board.winner {
        Some((tag, w)) if tag == "tie_winner" && slots.as_ref().is_some_and(|s| s.contains(w)) => {
            format!("tie_winner in [{}]", slots.as_deref().map_or(String::new(), join_indices))
        }
        Some((tag, w)) => format!("{tag} {w}"),
        None => "none".into(),
    };
    report.add("winner", None, expected_winner, actual_winner);

    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn slots_are_origin_indexed() {
        let f = FieldParams::new(2063, 5).unwrap();
        let e = |xs: &[u64]| xs.iter().map(|&x| f.element(x).unwrap()).collect::<Vec<_>>();
        let commit = e(&[681, 528, 718, 32, 9]);
        let verify = e(&[1301, 705, 718, 511, 150]);
        assert_eq!(matching_slots(&commit, &verify), vec![3]);
        assert_eq!(matching_slots(&commit, &e(&[1, 1, 1, 1, 1])), Vec::<usize>::new());
    }

    #[test]
    fn tie_rules() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert_eq!(break_tie(&[3], &[4], &mut rng).unwrap(), (4, false));
        assert_eq!(break_tie(&[2], &[], &mut rng).unwrap(), (2, true));
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..50 {
            let (w, tie) = break_tie(&[1, 2], &[], &mut rng).unwrap();
            assert!(tie);
            seen.insert(w);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![1, 2]);
        assert!(matches!(break_tie(&[1], &[1, 2], &mut rng), Err(Error::MultipleValidClaims(_))));
    }

    #[test]
    fn proof_encoding_round_trips() {
        let f = FieldParams::new(2063, 5).unwrap();
        let proof = WinnerProof {
            claimant: 2,
            j: 2,
            factors: vec![vec![f.element(3).unwrap(), f.element(5).unwrap()]; 3],
        };
        let back = WinnerProof::decode(&f, 2, 2, &proof.encode()).unwrap();
        assert_eq!(back, proof);
        assert_eq!(proof.product(&f).value(), 125);
        assert!(WinnerProof::decode(&f, 2, 3, &proof.encode()).is_err());
        assert!(WinnerProof::decode(&f, 2, 1, "1,2;3").is_err());
    }

    #[test]
    fn proof_requires_zero_digit() {
        let f = FieldParams::new(2063, 5).unwrap();
        let proof = WinnerProof { claimant: 1, j: 1, factors: vec![vec![GroupElement::ONE]] };
        let all_ones = OutputPrice::from_bits(vec![true, true]);
        assert!(matches!(
            check_winner_proof(&f, &proof, &all_ones, GroupElement::ONE, ""),
            Err(Error::NoZeroDigit)
        ));
    }

    #[test]
    fn empty_transcript_is_malformed() {
        assert!(matches!(
            audit_transcript(&Transcript::new()),
            Err(Error::MalformedTranscript { .. })
        ));
    }
}
