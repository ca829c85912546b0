//! Wall-time and message-count measurements over grids of `n` and `k`,
//! plus the least-squares fits used to judge their growth.

use std::io::Write;
use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::random_safe_prime;

use super::config::AuctionConfig;
use super::coordinator::Auction;
use super::rng::{SeedSource, WORKLOAD_STREAM};

/// Mean timings in seconds for one `(n, k)` point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub k: usize,
    pub reps: usize,
    pub keygen: f64,
    /// Keygen time divided by `n`, the share of one bidder.
    pub keygen_per_bidder: f64,
    pub commit: f64,
    pub sharing: f64,
    pub rounds: f64,
    pub verify: f64,
    pub winner: f64,
    /// Everything after key generation.
    pub main: f64,
    pub keygen_sends: usize,
    pub main_sends: usize,
    /// The largest number of sends by a single bidder in the main auction.
    pub main_sends_max_bidder: usize,
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Runs `reps` seeded honest auctions per grid point over one random
/// 20-bit safe prime. Bids are drawn uniformly below `2^k`.
pub fn bench(ns: &[usize], ks: &[usize], reps: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be positive".into()));
    }
    let seeds = SeedSource::from_u64(seed);
    let mut rng = seeds.fork(WORKLOAD_STREAM);
    let field = random_safe_prime(1 << 20, (1 << 21) - 1, &mut rng)?;
    let mut rows = vec![];
    for &n in ns {
        for &k in ks {
            let mut row = BenchRow {
                n,
                k,
                reps,
                keygen: 0.0,
                keygen_per_bidder: 0.0,
                commit: 0.0,
                sharing: 0.0,
                rounds: 0.0,
                verify: 0.0,
                winner: 0.0,
                main: 0.0,
                keygen_sends: 0,
                main_sends: 0,
                main_sends_max_bidder: 0,
            };
            for _ in 0..reps {
                let bids: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1u64 << k)).collect();
                let cfg = AuctionConfig::fixed(field.p(), field.generator().value(), &bids, k, rng.gen());
                let mut auction = Auction::new(&cfg)?;
                auction.keygen()?;
                let net = auction.network();
                let after_keygen: Vec<usize> = (1..=n).map(|l| net.sends_by(l)).collect();
                let keygen_sends = net.total_sends();
                auction.run()?;
                let net = auction.network();
                let t = auction.timings();
                row.keygen += secs(t.keygen);
                row.commit += secs(t.commit);
                row.sharing += secs(t.sharing);
                row.rounds += secs(t.rounds);
                row.verify += secs(t.verify);
                row.winner += secs(t.winner);
                row.main += secs(t.total() - t.keygen);
                row.keygen_sends = keygen_sends;
                row.main_sends = net.total_sends() - keygen_sends;
                row.main_sends_max_bidder = (1..=n).map(|l| net.sends_by(l) - after_keygen[l - 1]).max().unwrap_or(0);
            }
            let r = reps as f64;
            for v in [
                &mut row.keygen,
                &mut row.commit,
                &mut row.sharing,
                &mut row.rounds,
                &mut row.verify,
                &mut row.winner,
                &mut row.main,
            ] {
                *v /= r;
            }
            row.keygen_per_bidder = row.keygen / n as f64;
            log::info!("bench n={n} k={k}: keygen {:.4}s main {:.4}s", row.keygen, row.main);
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyFit {
    /// Lowest degree first.
    pub coeffs: Vec<f64>,
    pub rss: f64,
    pub r_squared: f64,
}

/// Least-squares polynomial of the given degree through `(x, y)`.
pub fn poly_fit(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    if xs.len() != ys.len() || xs.len() <= degree {
        return Err(Error::InvalidConfig(format!(
            "{} points cannot fit degree {degree}",
            xs.len().min(ys.len())
        )));
    }
    let a = DMatrix::from_fn(xs.len(), degree + 1, |r, c| xs[r].powi(c as i32));
    let b = DVector::from_column_slice(ys);
    let coeffs = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidConfig(format!("least squares failed: {e}")))?;
    let rss = (&a * &coeffs - &b).norm_squared();
    let mean = b.mean();
    let tss: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if tss == 0.0 { 1.0 } else { 1.0 - rss / tss };
    Ok(PolyFit {
        coeffs: coeffs.iter().copied().collect(),
        rss,
        r_squared,
    })
}
