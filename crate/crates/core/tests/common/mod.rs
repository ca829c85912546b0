#![allow(dead_code)]

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use vickrey_ring::harness::appendix::replay_appendix;
use vickrey_ring::harness::bench::{bench, poly_fit};
use vickrey_ring::harness::{brute_force_oracle, Auction, AuctionConfig};
use vickrey_ring::keygen::closed_form_keys;
use vickrey_ring::party::Behavior;
use vickrey_ring::transcript::{Endpoint, Transcript};
use vickrey_ring::verify::audit_transcript;

pub struct Verdict {
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    /// Transcripts of honest runs, for the audit criterion.
    pub honest: Vec<Transcript>,
}

fn verdict(pass: bool, detail: String, start: Instant, honest: Vec<Transcript>) -> Verdict {
    Verdict {
        pass,
        detail,
        elapsed: start.elapsed(),
        honest,
    }
}

/// A random honest workload: n in [3,7], k in [4,10], bids below 2^k.
pub fn random_workload(rng: &mut ChaCha20Rng) -> (Vec<u64>, usize) {
    let n = rng.gen_range(3..=7);
    let k = rng.gen_range(4..=10);
    ((0..n).map(|_| rng.gen_range(0..1u64 << k)).collect(), k)
}

/// Sole checks that came out true although the shares did not encode a
/// lone 1 for that bidder. Only the simulator can see this.
pub fn false_positives(a: &Auction) -> usize {
    let shares = a.share_matrix().expect("shares exist after sharing");
    let field = a.field();
    let bidders = a.bidders();
    let mut count = 0;
    for j in 1..=a.k() {
        let bits: Vec<Option<bool>> = bidders
            .iter()
            .map(|b| shares.encoded_bit(field, b.indicators().expect("indicators"), b.index(), j))
            .collect();
        for b in bidders {
            let l = b.index();
            let truly_sole = (1..=a.n()).all(|h| bits[h - 1] == Some(h == l));
            if b.was_sole(j) && !truly_sole {
                count += 1;
            }
        }
    }
    count
}

pub fn criterion_appendix() -> Verdict {
    let start = Instant::now();
    match replay_appendix() {
        Ok(a) => {
            let elapsed = start.elapsed();
            let o = a.outcome().expect("finished");
            let pass = elapsed < Duration::from_secs(1);
            let detail = format!(
                "all tables match; bits {} price {} winner {:?}; {:.3}s (limit 1s)",
                o.price.bit_string(),
                o.price.value,
                o.winner,
                elapsed.as_secs_f64()
            );
            verdict(pass, detail, start, vec![a.into_transcript()])
        }
        Err(e) => verdict(false, format!("replay diverged: {e}"), start, vec![]),
    }
}

pub fn criterion_oracle(runs: usize) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0002);
    let (mut agree, mut collided, mut disagree) = (0, 0, vec![]);
    let (mut fp_runs, mut bound_sum) = (0usize, 0.0f64);
    let mut honest = vec![];
    for run in 0..runs {
        let (bids, k) = random_workload(&mut rng);
        let cfg = AuctionConfig::random(&bids, k, 1000 + run as u64, (20, 21));
        let mut a = Auction::new(&cfg).expect("valid config");
        let outcome = a.run();
        let n = bids.len();
        bound_sum += 10.0 * (n * k) as f64 / a.field().p() as f64;
        let fp = false_positives(&a);
        if fp > 0 {
            fp_runs += 1;
        }
        let oracle = brute_force_oracle(&bids);
        let ok = match &outcome {
            Ok(o) => {
                o.accepted
                    && o.price.value == oracle.second_price
                    && o.winner.is_some_and(|w| oracle.winners.contains(&w))
            }
            Err(_) => false,
        };
        match (ok, fp > 0) {
            (true, _) => agree += 1,
            (false, true) => collided += 1,
            (false, false) => disagree.push((run, bids.clone(), outcome.map(|o| o.price.value))),
        }
        honest.push(a.into_transcript());
    }
    let rate = fp_runs as f64 / runs as f64;
    let bound = bound_sum / runs as f64;
    let elapsed = start.elapsed();
    let pass = disagree.is_empty() && rate <= bound && elapsed < Duration::from_secs(60);
    let detail = format!(
        "{agree}/{runs} agree, {collided} differ after a K=B false positive, {} differ otherwise {:?}; \
         false-positive rate {rate:.2e} (bound {bound:.2e}); {:.1}s (limit 60s)",
        disagree.len(),
        disagree.iter().take(3).collect::<Vec<_>>(),
        elapsed.as_secs_f64()
    );
    verdict(pass, detail, start, honest)
}

pub fn criterion_closed_forms(instances: usize) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0003);
    let mut mismatched = vec![];
    let mut honest = vec![];
    for run in 0..instances {
        let (bids, k) = random_workload(&mut rng);
        let cfg = AuctionConfig::random(&bids, k, 3000 + run as u64, (20, 21));
        let mut a = Auction::new(&cfg).expect("valid config");
        a.run().expect("honest run completes");
        let codes: Vec<_> = a.bidders().iter().map(|b| b.codes().clone()).collect();
        let closed = closed_form_keys(a.field(), &codes);
        let same = a.bidders().iter().zip(&closed).all(|(b, c)| {
            let ks = b.keys().expect("keys");
            (1..=k).all(|j| ks.key(j) == c.keys[j - 1] && ks.check(j) == c.checks[j - 1] && ks.fake(j) == c.fakes[j - 1])
        });
        if !same {
            mismatched.push(run);
        }
        honest.push(a.into_transcript());
    }
    let detail = format!(
        "{}/{instances} instances match on every K, C and F (mismatches {mismatched:?})",
        instances - mismatched.len()
    );
    verdict(mismatched.is_empty(), detail, start, honest)
}

#[derive(Debug, Default)]
pub struct CheatTally {
    pub runs: usize,
    pub attempts: usize,
    pub rejected: usize,
    pub aborted: usize,
    pub accepted_without_proof: usize,
    pub accepted_with_proof: usize,
    /// Accepted runs whose valid proof belongs to the cheater.
    pub cheater_proofs: usize,
    /// Runs where the emitted price is no committed bid.
    pub uncommitted_price: usize,
    pub uncommitted_rejected: usize,
}

/// Scripted runs where a random losing bidder inflates its loser
/// adjustment, kept only when the emitted price exceeds the true second bid.
pub fn scripted_cheats(wanted: usize, seed: u64) -> CheatTally {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut t = CheatTally::default();
    while t.runs < wanted && t.attempts < 50 * wanted {
        t.attempts += 1;
        let n = rng.gen_range(3..=6);
        let k = rng.gen_range(4..=8);
        let bids: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1u64 << k)).collect();
        let oracle = brute_force_oracle(&bids);
        let losers: Vec<usize> = (1..=n).filter(|l| !oracle.winners.contains(l)).collect();
        if losers.is_empty() {
            continue;
        }
        let cheater = losers[rng.gen_range(0..losers.len())];
        let cfg = AuctionConfig::random(&bids, k, rng.gen(), (20, 21));
        let mut a = Auction::new(&cfg).expect("valid config");
        a.set_behavior(cheater, Behavior::InflateLoserAdjustment);
        let result = a.run();
        let price = match (&result, a.price()) {
            (_, Some(p)) => p.value,
            (Err(_), None) => continue,
            (Ok(_), None) => unreachable!("a finished run has a price"),
        };
        if price <= oracle.second_price {
            continue;
        }
        t.runs += 1;
        let committed = bids.contains(&price);
        if !committed {
            t.uncommitted_price += 1;
        }
        match result {
            Err(e) => {
                assert!(e.is_protocol_violation(), "unexpected error {e}");
                t.aborted += 1;
            }
            Ok(o) if !o.accepted => {
                t.rejected += 1;
                if !committed {
                    t.uncommitted_rejected += 1;
                }
            }
            Ok(o) if o.valid_claims.is_empty() => t.accepted_without_proof += 1,
            Ok(o) => {
                t.accepted_with_proof += 1;
                if o.valid_claims.contains(&cheater) {
                    t.cheater_proofs += 1;
                }
            }
        }
    }
    t
}

pub fn criterion_soundness(runs: usize) -> Verdict {
    let start = Instant::now();
    let t = scripted_cheats(runs, 0x5eed_0004);
    let caught = t.rejected + t.aborted + t.accepted_without_proof;
    let pass = t.runs == runs && caught == runs;
    let detail = format!(
        "{caught}/{} inflated runs caught ({} rejected, {} aborted, {} without a valid proof); \
         {} accepted with a valid proof, {} of them held by the cheater; \
         uncommitted prices rejected {}/{}",
        t.runs,
        t.rejected,
        t.aborted,
        t.accepted_without_proof,
        t.accepted_with_proof,
        t.cheater_proofs,
        t.uncommitted_rejected,
        t.uncommitted_price
    );
    verdict(pass, detail, start, vec![])
}

pub fn tie_workload(rng: &mut ChaCha20Rng) -> (Vec<u64>, usize) {
    let n = rng.gen_range(3..=7);
    let k = rng.gen_range(4..=10);
    let max = rng.gen_range(1..1u64 << k);
    let mut bids: Vec<u64> = (0..n).map(|_| rng.gen_range(0..max)).collect();
    let holders = rng.gen_range(2..=n);
    for l in rand::seq::index::sample(rng, n, holders) {
        bids[l] = max;
    }
    (bids, k)
}

pub fn criterion_ties(cases: usize) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0005);
    let mut bad = vec![];
    let mut honest = vec![];
    for case in 0..cases {
        let (bids, k) = tie_workload(&mut rng);
        let max = *bids.iter().max().expect("non-empty");
        let holders: Vec<usize> = (1..=bids.len()).filter(|&l| bids[l - 1] == max).collect();
        let cfg = AuctionConfig::random(&bids, k, 5000 + case as u64, (20, 21));
        let (first, t1) = vickrey_ring::harness::run_auction(&cfg).expect("honest run completes");
        let (second, t2) = vickrey_ring::harness::run_auction(&cfg).expect("honest run completes");
        let ok = first.price.value == max
            && first.accepted
            && first.matching_slots == holders
            && first.winner.is_some_and(|w| first.matching_slots.contains(&w))
            && first == second
            && t1.to_jsonl() == t2.to_jsonl();
        if !ok {
            bad.push((case, bids, first.price.value, first.winner));
        }
        honest.push(t1);
    }
    let detail = format!(
        "{}/{cases} duplicate-max cases priced at the maximum with a repeatable winner from the matching slots {:?}",
        cases - bad.len(),
        bad
    );
    verdict(bad.is_empty(), detail, start, honest)
}

pub struct ShapeFits {
    pub main_linear_r2: f64,
    pub keygen_linear_rss: f64,
    pub keygen_quadratic_rss: f64,
}

pub fn criterion_complexity() -> (Verdict, ShapeFits) {
    let start = Instant::now();
    let ks = [4, 8, 12, 16, 24, 32];
    let by_k = bench(&[8], &ks, 5, 6).expect("bench over k");
    let xs: Vec<f64> = by_k.iter().map(|r| r.k as f64).collect();
    let ys: Vec<f64> = by_k.iter().map(|r| r.main).collect();
    let lin = poly_fit(&xs, &ys, 1).expect("fit");

    let ns = [3, 4, 5, 6, 8, 10];
    let by_n = bench(&ns, &[8], 5, 7).expect("bench over n");
    let xs: Vec<f64> = by_n.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = by_n.iter().map(|r| r.keygen_per_bidder).collect();
    let kl = poly_fit(&xs, &ys, 1).expect("fit");
    let kq = poly_fit(&xs, &ys, 2).expect("fit");
    let fits = ShapeFits {
        main_linear_r2: lin.r_squared,
        keygen_linear_rss: kl.rss,
        keygen_quadratic_rss: kq.rss,
    };
    let elapsed = start.elapsed();
    let pass = fits.main_linear_r2 >= 0.9
        && fits.keygen_quadratic_rss < fits.keygen_linear_rss
        && elapsed < Duration::from_secs(300);
    let detail = format!(
        "main auction vs k at n=8: linear R^2 {:.4} (need >= 0.9); per-bidder keygen vs n at k=8: \
         quadratic rss {:.3e} vs linear {:.3e}; {:.1}s (limit 300s)",
        fits.main_linear_r2,
        fits.keygen_quadratic_rss,
        fits.keygen_linear_rss,
        elapsed.as_secs_f64()
    );
    (verdict(pass, detail, start, vec![]), fits)
}

/// A tampering applied to an honest transcript and the check that must
/// catch it.
pub struct Mutation {
    pub name: &'static str,
    pub check: &'static str,
    pub j: Option<usize>,
    pub apply: fn(&mut Transcript),
}

fn edit(t: &mut Transcript, pick: impl Fn(&vickrey_ring::transcript::Record) -> bool, change: impl FnOnce(&mut vickrey_ring::transcript::Record)) {
    let mut records = t.records().to_vec();
    let r = records.iter_mut().find(|r| pick(r)).expect("record to mutate exists");
    change(r);
    *t = Transcript::from_records(records);
}

fn bump(payload: &mut Option<String>) {
    let v: u64 = payload.as_deref().expect("payload").parse().expect("number");
    *payload = Some((if v == 2 { 3 } else { v - 1 }).to_string());
}

pub fn mutations() -> Vec<Mutation> {
    vec![
        Mutation {
            name: "duplicate sequence number",
            check: "sequence",
            j: None,
            apply: |t| {
                let mut records = t.records().to_vec();
                records[5].seq = records[4].seq;
                *t = Transcript::from_records(records);
            },
        },
        Mutation {
            name: "generator replaced by 1",
            check: "params",
            j: None,
            apply: |t| edit(t, |r| r.tag == "g", |r| r.payload = Some("1".into())),
        },
        Mutation {
            name: "seller commitment dropped",
            check: "seller_commitments",
            j: None,
            apply: |t| {
                let records = t.records().iter().filter(|r| !(r.tag == "commitment" && r.sender == Endpoint::Bidder(2))).cloned().collect();
                *t = Transcript::from_records(records);
            },
        },
        Mutation {
            name: "B entry of origin 1 at digit 3 altered",
            check: "aggregate_B",
            j: Some(3),
            apply: |t| edit(t, |r| r.tag == "B" && r.receiver == Endpoint::Public && r.j == Some(3) && r.origin == Some(1), |r| bump(&mut r.payload)),
        },
        Mutation {
            name: "posted P_5 altered",
            check: "aggregate_P",
            j: Some(5),
            apply: |t| edit(t, |r| r.tag == "P_j" && r.j == Some(5), |r| bump(&mut r.payload)),
        },
        Mutation {
            name: "D entry of origin 2 at digit 1 altered",
            check: "aggregate_D",
            j: Some(1),
            apply: |t| edit(t, |r| r.tag == "D" && r.receiver == Endpoint::Public && r.j == Some(1) && r.origin == Some(2), |r| bump(&mut r.payload)),
        },
        Mutation {
            name: "digit 3 flipped",
            check: "digit",
            j: Some(3),
            apply: |t| {
                edit(t, |r| r.tag == "digit" && r.j == Some(3), |r| {
                    let flipped = if r.payload.as_deref() == Some("1") { "0" } else { "1" };
                    r.payload = Some(flipped.into());
                })
            },
        },
        Mutation {
            name: "announced price altered",
            check: "price",
            j: None,
            apply: |t| edit(t, |r| r.tag == "price", |r| bump(&mut r.payload)),
        },
        Mutation {
            name: "verification entry of origin 3 altered",
            check: "verification",
            j: None,
            apply: |t| edit(t, |r| r.tag == "verify" && r.receiver == Endpoint::Public && r.origin == Some(3), |r| bump(&mut r.payload)),
        },
        Mutation {
            name: "acceptance flag flipped",
            check: "verification",
            j: None,
            apply: |t| {
                edit(t, |r| r.tag == "accepted", |r| {
                    let flipped = if r.payload.as_deref() == Some("true") { "false" } else { "true" };
                    r.payload = Some(flipped.into());
                })
            },
        },
        Mutation {
            name: "claimed key factor altered",
            check: "winner_proof",
            j: None,
            apply: |t| {
                edit(t, |r| r.tag == "claim", |r| {
                    let text = r.payload.take().expect("claim payload");
                    let (head, rest) = text.split_once(',').expect("several factors");
                    let v: u64 = head.parse().expect("number");
                    r.payload = Some(format!("{},{rest}", if v == 2 { 3 } else { v - 1 }));
                })
            },
        },
        Mutation {
            name: "winner replaced",
            check: "winner",
            j: None,
            apply: |t| {
                edit(t, |r| r.tag == "winner" || r.tag == "tie_winner", |r| {
                    let w: usize = r.payload.as_deref().expect("winner").parse().expect("index");
                    r.payload = Some((w % 5 + 1).to_string());
                })
            },
        },
    ]
}

pub fn criterion_audit(honest: &[Transcript], base: &Transcript) -> Verdict {
    let start = Instant::now();
    let mut problems = vec![];
    for (idx, t) in honest.iter().enumerate() {
        match audit_transcript(t) {
            Ok(r) if r.passed() => {}
            Ok(r) => problems.push(format!(
                "honest #{idx} failed {:?}",
                r.failures().map(|c| c.name.clone()).collect::<Vec<_>>()
            )),
            Err(e) => problems.push(format!("honest #{idx}: {e}")),
        }
    }
    let muts = mutations();
    let mut caught = 0;
    for m in &muts {
        let mut t = base.clone();
        (m.apply)(&mut t);
        let roundtrip = Transcript::read_jsonl(t.to_jsonl().as_bytes()).expect("mutated transcript still parses");
        match audit_transcript(&roundtrip) {
            Ok(r) if r.failed(m.check, m.j) => caught += 1,
            Ok(r) => problems.push(format!(
                "{}: expected {} to fail, failures {:?}",
                m.name,
                m.check,
                r.failures().map(|c| c.name.clone()).collect::<Vec<_>>()
            )),
            Err(e) => problems.push(format!("{}: {e}", m.name)),
        }
    }
    let detail = format!(
        "{} honest transcripts audited clean, {caught}/{} mutations caught by the named check; problems {problems:?}",
        honest.len() - problems.iter().filter(|p| p.starts_with("honest")).count(),
        muts.len()
    );
    verdict(problems.is_empty() && caught >= 10, detail, start, vec![])
}
