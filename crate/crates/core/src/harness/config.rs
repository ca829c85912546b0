use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codes::{check_dimensions, Bid, SecretCodes};
use crate::error::{Error, Result};
use crate::field::{is_prime, is_safe_prime, random_safe_prime, ExponentValue, FieldParams};

use super::rng::{SeedSource, FIELD_STREAM};

/// An integer written either as a JSON number or as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Int {
    Signed(i64),
    Unsigned(u64),
    Text(String),
}

impl Int {
    pub fn to_i128(&self) -> Result<i128> {
        match self {
            Int::Signed(v) => Ok(*v as i128),
            Int::Unsigned(v) => Ok(*v as i128),
            Int::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{s:?} is not an integer"))),
        }
    }

    pub fn to_u64(&self) -> Result<u64> {
        u64::try_from(self.to_i128()?).map_err(|_| Error::InvalidConfig(format!("{self:?} is not a non-negative 64-bit integer")))
    }
}

impl From<u64> for Int {
    fn from(v: u64) -> Self {
        Int::Unsigned(v)
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::Signed(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFixture {
    pub a: Vec<Vec<Int>>,
    pub c: Vec<Int>,
    pub e: Vec<Int>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixtures {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codes: Option<Vec<CodeFixture>>,
    /// `shares[l-1][i-1][j-1]` is the share bidder `l` generates for bidder
    /// `i` at digit `j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shares: Option<Vec<Vec<Vec<Int>>>>,
}

fn default_prime_bits() -> [u32; 2] {
    [20, 21]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionConfig {
    /// A safe prime, or `"random"` to draw one with `prime_bits`.
    pub p: Int,
    /// Random primes are drawn from `[2^lo, 2^hi - 1]`.
    #[serde(default = "default_prime_bits")]
    pub prime_bits: [u32; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Int>,
    pub n: usize,
    pub k: usize,
    pub bids: Vec<Int>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Int>,
    #[serde(default)]
    pub reuse_keys: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixtures: Option<Fixtures>,
}

/// A validated configuration with every value in its field.
#[derive(Clone, Debug)]
pub struct Setup {
    pub field: FieldParams,
    pub n: usize,
    pub k: usize,
    pub bids: Vec<Bid>,
    pub seeds: SeedSource,
    pub codes: Option<Vec<SecretCodes>>,
    pub shares: Option<Vec<Vec<Vec<ExponentValue>>>>,
    pub reuse_keys: bool,
}

impl AuctionConfig {
    /// Random safe prime of `bits` (lo, hi) and fresh codes.
    pub fn random(bids: &[u64], k: usize, seed: u64, bits: (u32, u32)) -> Self {
        AuctionConfig {
            p: Int::Text("random".into()),
            prime_bits: [bits.0, bits.1],
            g: None,
            n: bids.len(),
            k,
            bids: bids.iter().map(|&b| b.into()).collect(),
            seed: Some(seed.into()),
            reuse_keys: false,
            fixtures: None,
        }
    }

    pub fn fixed(p: u64, g: u64, bids: &[u64], k: usize, seed: u64) -> Self {
        AuctionConfig {
            p: p.into(),
            g: Some(g.into()),
            ..Self::random(bids, k, seed, (20, 21))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn pick_field(&self, seeds: &SeedSource) -> Result<FieldParams> {
        let mut rng = seeds.fork(FIELD_STREAM);
        if matches!(&self.p, Int::Text(s) if s == "random") {
            if self.g.is_some() {
                return Err(Error::InvalidConfig("g cannot be fixed when p is random".into()));
            }
            let [lo, hi] = self.prime_bits;
            if lo < 3 || hi > 63 || lo >= hi {
                return Err(Error::InvalidConfig(format!("prime_bits {lo}..{hi} out of range")));
            }
            return random_safe_prime(1 << lo, (1u64 << hi) - 1, &mut rng);
        }
        let p = self.p.to_u64()?;
        match &self.g {
            Some(g) => FieldParams::new(p, g.to_u64()?),
            None => random_generator(p, &mut rng),
        }
    }

    pub fn resolve(&self) -> Result<Setup> {
        let (n, k) = (self.n, self.k);
        check_dimensions(n, k)?;
        if self.bids.len() != n {
            return Err(Error::Dimensions(format!("{} bids for {n} bidders", self.bids.len())));
        }
        let bids = self
            .bids
            .iter()
            .map(|b| Bid::new(b.to_u64()?, k))
            .collect::<Result<Vec<_>>>()?;
        let seeds = match &self.seed {
            Some(s) => SeedSource::from_u64(s.to_u64()?),
            None => SeedSource::from_entropy(),
        };
        let field = self.pick_field(&seeds)?;
        let fixtures = self.fixtures.clone().unwrap_or_default();
        let canon = |x: &Int| x.to_i128().map(|v| field.exponent(v));
        let codes = fixtures
            .codes
            .map(|all| {
                if all.len() != n {
                    return Err(Error::Dimensions(format!("{} code fixtures for {n} bidders", all.len())));
                }
                all.iter()
                    .enumerate()
                    .map(|(idx, c)| {
                        let a = c
                            .a
                            .iter()
                            .map(|row| row.iter().map(canon).collect::<Result<Vec<_>>>())
                            .collect::<Result<Vec<_>>>()?;
                        let cs = c.c.iter().map(canon).collect::<Result<Vec<_>>>()?;
                        let es = c.e.iter().map(canon).collect::<Result<Vec<_>>>()?;
                        if cs.len() != n || es.len() != k {
                            return Err(Error::Dimensions(format!(
                                "bidder {} codes have {} c and {} e values, expected {n} and {k}",
                                idx + 1,
                                cs.len(),
                                es.len()
                            )));
                        }
                        SecretCodes::from_parts(idx + 1, a, cs, es)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let shares = fixtures
            .shares
            .map(|all| {
                let shaped = all.len() == n
                    && all.iter().all(|m| m.len() == n && m.iter().all(|row| row.len() == k));
                if !shaped {
                    return Err(Error::Dimensions(format!("share fixtures must be {n}x{n}x{k}")));
                }
                all.iter()
                    .map(|m| {
                        m.iter()
                            .map(|row| row.iter().map(canon).collect::<Result<Vec<_>>>())
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Ok(Setup {
            field,
            n,
            k,
            bids,
            seeds,
            codes,
            shares,
            reuse_keys: self.reuse_keys,
        })
    }
}

/// Validates `p` on its own, then draws generators until one passes.
fn random_generator<R: rand::Rng + ?Sized>(p: u64, rng: &mut R) -> Result<FieldParams> {
    if p < 7 {
        return Err(Error::ModulusTooSmall(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if !is_safe_prime(p) {
        return Err(Error::NotSafePrime(p));
    }
    loop {
        match FieldParams::new(p, rng.gen_range(2..=p - 2)) {
            Err(Error::NotGenerator { .. }) => continue,
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_strings_both_parse() {
        let cfg = AuctionConfig::from_json(
            r#"{"p": "2063", "g": 5, "n": 3, "k": 4, "bids": [1, "2", 3], "seed": "7",
                "fixtures": {"shares": null}}"#,
        )
        .unwrap();
        let setup = cfg.resolve().unwrap();
        assert_eq!(setup.field.p(), 2063);
        assert_eq!(setup.bids[1].value(), 2);
    }

    #[test]
    fn derived_generator_is_valid_and_seeded() {
        let mut cfg = AuctionConfig::fixed(2063, 5, &[1, 2, 3], 4, 11);
        cfg.g = None;
        let a = cfg.resolve().unwrap().field;
        let b = cfg.resolve().unwrap().field;
        assert_eq!(a, b);
        assert!(a.is_generator(a.generator().value()));
    }

    #[test]
    fn invalid_inputs() {
        let bad = |cfg: AuctionConfig| cfg.resolve().unwrap_err();
        assert!(matches!(bad(AuctionConfig::fixed(2063, 5, &[1, 2], 4, 1)), Error::TooFewBidders(2)));
        assert!(matches!(bad(AuctionConfig::fixed(2063, 5, &[1, 2, 16], 4, 1)), Error::BidOutOfRange { .. }));
        assert!(matches!(bad(AuctionConfig::fixed(2064, 5, &[1, 2, 3], 4, 1)), Error::NotPrime(2064)));
        let mut cfg = AuctionConfig::fixed(2063, 5, &[1, 2, 3], 4, 1);
        cfg.n = 4;
        assert!(matches!(bad(cfg), Error::Dimensions(_)));
        let mut cfg = AuctionConfig::fixed(2063, 5, &[1, 2, 3], 4, 1);
        cfg.g = None;
        cfg.p = 2069u64.into();
        assert!(matches!(bad(cfg), Error::NotSafePrime(2069)));
    }

    #[test]
    fn random_prime_in_requested_range() {
        let setup = AuctionConfig::random(&[1, 2, 3], 4, 5, (20, 21)).resolve().unwrap();
        assert!((1 << 20..1 << 21).contains(&setup.field.p()));
    }
}
