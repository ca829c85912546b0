//! Per-bidder secret material: codes, indicators, bid shares and the two
//! bid-adjustment rules.
//!
//! Bidder and digit indices are 1-based throughout, with digit 1 the most
//! significant bit of a bid.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{ExponentValue, FieldParams};

pub const MIN_BIDDERS: usize = 3;
pub const MAX_BITS: usize = 63;

pub fn check_dimensions(n: usize, k: usize) -> Result<()> {
    if n < MIN_BIDDERS {
        return Err(Error::TooFewBidders(n));
    }
    if k == 0 || k > MAX_BITS {
        return Err(Error::BadBitWidth(k));
    }
    Ok(())
}

/// A bid of `k` bits, most significant first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bid {
    value: u64,
    bits: Vec<bool>,
}

impl Bid {
    pub fn new(value: u64, k: usize) -> Result<Self> {
        if k == 0 || k > MAX_BITS {
            return Err(Error::BadBitWidth(k));
        }
        if value >> k != 0 {
            return Err(Error::BidOutOfRange { bid: value, k });
        }
        let bits = (1..=k).map(|j| (value >> (k - j)) & 1 == 1).collect();
        Ok(Bid { value, bits })
    }

    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        let k = bits.len();
        if k == 0 || k > MAX_BITS {
            return Err(Error::BadBitWidth(k));
        }
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Ok(Bid { value, bits })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn k(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, j: usize) -> bool {
        self.bits[j - 1]
    }
}

/// Bidder `owner`'s private exponents: `a` is n×k, `c` has n entries, `e` has k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretCodes {
    owner: usize,
    a: Vec<Vec<ExponentValue>>,
    c: Vec<ExponentValue>,
    e: Vec<ExponentValue>,
}

impl SecretCodes {
    pub fn generate<R: Rng + ?Sized>(
        owner: usize,
        n: usize,
        k: usize,
        field: &FieldParams,
        rng: &mut R,
    ) -> Result<Self> {
        check_dimensions(n, k)?;
        let a = (0..n)
            .map(|_| (0..k).map(|_| field.random_nonzero_exponent(rng)).collect())
            .collect();
        let c = (0..n).map(|_| field.random_nonzero_exponent(rng)).collect();
        let e = (0..k).map(|_| field.random_nonzero_exponent(rng)).collect();
        Ok(SecretCodes { owner, a, c, e })
    }

    /// Builds codes from explicit values, validating shape and that nothing is
    /// zero mod p-1.
    pub fn from_parts(
        owner: usize,
        a: Vec<Vec<ExponentValue>>,
        c: Vec<ExponentValue>,
        e: Vec<ExponentValue>,
    ) -> Result<Self> {
        let (n, k) = (c.len(), e.len());
        check_dimensions(n, k)?;
        if a.len() != n || a.iter().any(|row| row.len() != k) {
            return Err(Error::Dimensions(format!(
                "bidder {owner}: a must be {n}x{k}"
            )));
        }
        for (i, row) in a.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if x.is_zero() {
                    return Err(Error::ZeroCode(format!("a[{owner},{},{}]", i + 1, j + 1)));
                }
            }
        }
        if let Some(r) = c.iter().position(|x| x.is_zero()) {
            return Err(Error::ZeroCode(format!("c[{owner},{}]", r + 1)));
        }
        if let Some(j) = e.iter().position(|x| x.is_zero()) {
            return Err(Error::ZeroCode(format!("e[{owner},{}]", j + 1)));
        }
        Ok(SecretCodes { owner, a, c, e })
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn k(&self) -> usize {
        self.e.len()
    }

    pub fn a(&self, i: usize, j: usize) -> ExponentValue {
        self.a[i - 1][j - 1]
    }

    /// The row `a_{owner,i,·}` that is sent to bidder `i`.
    pub fn a_row(&self, i: usize) -> &[ExponentValue] {
        &self.a[i - 1]
    }

    pub fn c(&self, r: usize) -> ExponentValue {
        self.c[r - 1]
    }

    pub fn e(&self, j: usize) -> ExponentValue {
        self.e[j - 1]
    }
}

/// Exponent encodings of a 1 (`Y`) and a 0 (`N = -Y`) at each digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Indicators {
    y: Vec<ExponentValue>,
    n: Vec<ExponentValue>,
}

impl Indicators {
    pub fn from_y(field: &FieldParams, y: Vec<ExponentValue>) -> Self {
        let n = y.iter().map(|&v| field.exp_neg(v)).collect();
        Indicators { y, n }
    }

    pub fn y(&self, j: usize) -> ExponentValue {
        self.y[j - 1]
    }

    pub fn n(&self, j: usize) -> ExponentValue {
        self.n[j - 1]
    }

    pub fn target(&self, j: usize, bit: bool) -> ExponentValue {
        if bit {
            self.y(j)
        } else {
            self.n(j)
        }
    }

    pub fn k(&self) -> usize {
        self.y.len()
    }
}

/// `received[i-1]` holds `a_{i,owner,·}` as sent by bidder `i`.
pub fn compute_indicators(
    field: &FieldParams,
    owner: usize,
    k: usize,
    received: &[Option<Vec<ExponentValue>>],
) -> Result<Indicators> {
    let mut y = vec![ExponentValue::ZERO; k];
    for (idx, col) in received.iter().enumerate() {
        let col = col.as_ref().ok_or(Error::MissingShare {
            bidder: owner,
            from: idx + 1,
        })?;
        if col.len() != k {
            return Err(Error::Dimensions(format!(
                "bidder {owner} received {} code values from {}, expected {k}",
                col.len(),
                idx + 1
            )));
        }
        for (acc, &v) in y.iter_mut().zip(col) {
            *acc = field.exp_add(*acc, v);
        }
    }
    Ok(Indicators::from_y(field, y))
}

/// The shares `b_{i,owner,j}` that bidder `owner` generated for every `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedShares {
    owner: usize,
    rows: Vec<Vec<ExponentValue>>,
}

/// Splits each digit's indicator into `n` additive shares. The first `n-1`
/// are uniform; share `n` closes the sum to `Y` for a 1 bit and `N` for a 0.
pub fn make_bid_shares<R: Rng + ?Sized>(
    field: &FieldParams,
    owner: usize,
    bid: &Bid,
    ind: &Indicators,
    n: usize,
    rng: &mut R,
) -> GeneratedShares {
    let k = bid.k();
    let mut rows: Vec<Vec<ExponentValue>> = (0..n - 1)
        .map(|_| (0..k).map(|_| field.random_exponent(rng)).collect())
        .collect();
    let closing = (1..=k)
        .map(|j| {
            let partial = field.exp_sum(rows.iter().map(|r| r[j - 1]));
            field.exp_sub(ind.target(j, bid.bit(j)), partial)
        })
        .collect();
    rows.push(closing);
    GeneratedShares { owner, rows }
}

impl GeneratedShares {
    pub fn from_rows(owner: usize, rows: Vec<Vec<ExponentValue>>) -> Self {
        GeneratedShares { owner, rows }
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn share(&self, i: usize, j: usize) -> ExponentValue {
        self.rows[i - 1][j - 1]
    }

    /// The row `b_{i,owner,·}` destined for bidder `i`.
    pub fn row(&self, i: usize) -> &[ExponentValue] {
        &self.rows[i - 1]
    }

    pub fn rows(&self) -> &[Vec<ExponentValue>] {
        &self.rows
    }

    /// `Σ_i b_{i,owner,j}`.
    pub fn sum(&self, field: &FieldParams, j: usize) -> ExponentValue {
        field.exp_sum(self.rows.iter().map(|r| r[j - 1]))
    }

    /// Replaces the owner's own share at every digit after `j` so the total
    /// over all recipients equals `Y`. The other recipients already hold
    /// their shares, so only the owner's copy can move.
    pub fn adjust_winner(&mut self, field: &FieldParams, ind: &Indicators, j: usize) {
        self.retarget_after(field, j, |w| ind.y(w));
    }

    /// As [`adjust_winner`](Self::adjust_winner) but toward `N`.
    pub fn adjust_loser(&mut self, field: &FieldParams, ind: &Indicators, j: usize) {
        self.retarget_after(field, j, |w| ind.n(w));
    }

    pub fn retarget_after(
        &mut self,
        field: &FieldParams,
        j: usize,
        target: impl Fn(usize) -> ExponentValue,
    ) {
        let own = self.owner - 1;
        let k = self.rows[own].len();
        for w in j + 1..=k {
            let others = field.exp_sum(
                self.rows
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != own)
                    .map(|(_, r)| r[w - 1]),
            );
            self.rows[own][w - 1] = field.exp_sub(target(w), others);
        }
    }
}

/// Every bidder's generated shares side by side. Only the simulator, which
/// sees all secrets, can assemble one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareMatrix {
    by_generator: Vec<GeneratedShares>,
}

impl ShareMatrix {
    pub fn new(by_generator: Vec<GeneratedShares>) -> Self {
        ShareMatrix { by_generator }
    }

    /// `b_{i,l,j}`.
    pub fn get(&self, i: usize, l: usize, j: usize) -> ExponentValue {
        self.by_generator[l - 1].share(i, j)
    }

    /// Sum of the shares bidder `l` generated at digit `j`.
    pub fn generated_sum(&self, field: &FieldParams, l: usize, j: usize) -> ExponentValue {
        self.by_generator[l - 1].sum(field, j)
    }

    /// Sum of the shares bidder `i` received at digit `j`.
    pub fn received_sum(&self, field: &FieldParams, i: usize, j: usize) -> ExponentValue {
        field.exp_sum(self.by_generator.iter().map(|g| g.share(i, j)))
    }

    /// The bit each generator's shares currently encode, or `None` where the
    /// sum is neither `Y` nor `N`.
    pub fn encoded_bit(
        &self,
        field: &FieldParams,
        ind: &Indicators,
        l: usize,
        j: usize,
    ) -> Option<bool> {
        let s = self.generated_sum(field, l, j);
        if s == ind.y(j) {
            Some(true)
        } else if s == ind.n(j) {
            Some(false)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn f2063() -> FieldParams {
        FieldParams::new(2063, 5).unwrap()
    }

    fn ev(f: &FieldParams, xs: &[i64]) -> Vec<ExponentValue> {
        xs.iter().map(|&x| f.exponent(x as i128)).collect()
    }

    #[test]
    fn bid_bits_are_msb_first() {
        let b = Bid::new(217, 8).unwrap();
        let bits: String = b.bits().iter().map(|&x| if x { '1' } else { '0' }).collect();
        assert_eq!(bits, "11011001");
        assert!(b.bit(1) && !b.bit(3));
        assert_eq!(Bid::from_bits(b.bits().to_vec()).unwrap(), b);
        assert!(matches!(Bid::new(256, 8), Err(Error::BidOutOfRange { .. })));
        assert!(matches!(Bid::new(0, 0), Err(Error::BadBitWidth(0))));
    }

    #[test]
    fn generate_codes_shapes() {
        let f = FieldParams::new(7, 3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let codes = SecretCodes::generate(1, 3, 1, &f, &mut rng).unwrap();
        assert_eq!((codes.n(), codes.k()), (3, 1));
        for i in 1..=3 {
            assert!(!codes.a(i, 1).is_zero());
            assert!(!codes.c(i).is_zero());
        }
        assert!(!codes.e(1).is_zero());
        assert!(matches!(
            SecretCodes::generate(1, 2, 8, &f, &mut rng),
            Err(Error::TooFewBidders(2))
        ));
    }

    #[test]
    fn from_parts_rejects_zero_and_bad_shape() {
        let f = f2063();
        let one = f.exponent(1);
        let a = vec![vec![one; 2]; 3];
        assert!(SecretCodes::from_parts(1, a.clone(), vec![one; 3], vec![one; 2]).is_ok());
        let mut zero_a = a.clone();
        zero_a[1][1] = f.exponent(2062);
        assert!(matches!(
            SecretCodes::from_parts(1, zero_a, vec![one; 3], vec![one; 2]),
            Err(Error::ZeroCode(_))
        ));
        assert!(matches!(
            SecretCodes::from_parts(1, a[..2].to_vec(), vec![one; 3], vec![one; 2]),
            Err(Error::Dimensions(_))
        ));
    }

    #[test]
    fn indicators_from_columns() {
        let f = f2063();
        let cols = [847, 1449, 30, 1594, 1950];
        let received: Vec<_> = cols.iter().map(|&x| Some(ev(&f, &[x]))).collect();
        let ind = compute_indicators(&f, 1, 1, &received).unwrap();
        assert_eq!(ind.y(1), f.exponent(5870));
        assert_eq!(ind.n(1), f.exponent(-5870));

        let zeros: Vec<_> = (0..3).map(|_| Some(vec![ExponentValue::ZERO])).collect();
        let ind = compute_indicators(&f, 1, 1, &zeros).unwrap();
        assert_eq!(ind.y(1), ind.n(1));

        let mut missing = received.clone();
        missing[2] = None;
        assert!(matches!(
            compute_indicators(&f, 1, 1, &missing),
            Err(Error::MissingShare { bidder: 1, from: 3 })
        ));
    }

    #[test]
    fn printed_share_columns_sum_to_indicators() {
        let f = f2063();
        let s: i64 = [1334, 1514, 1313, 1977, -10657].iter().sum();
        assert_eq!(f.exponent(s as i128), f.exponent(-4519));
        let s: i64 = [1050, 1779, 1431, 258, 1352].iter().sum();
        assert_eq!(f.exponent(s as i128), f.exponent(5870));
    }

    fn winner_fixture(f: &FieldParams) -> (GeneratedShares, Indicators) {
        // Column j=8 of the shares bidder 4 generated, and its indicators at
        // digits 7 and 8 (bid bits 1 and 0).
        let rows = vec![
            ev(f, &[696, 1334]),
            ev(f, &[1904, 1514]),
            ev(f, &[1587, 1313]),
            ev(f, &[1759, 1977]),
            ev(f, &[-1803, -10657]),
        ];
        let ind = Indicators::from_y(f, ev(f, &[4143, 4519]));
        (GeneratedShares::from_rows(4, rows), ind)
    }

    #[test]
    fn winner_adjustment_matches_printed_value() {
        let f = f2063();
        let (mut shares, ind) = winner_fixture(&f);
        assert_eq!(shares.sum(&f, 1), ind.y(1));
        assert_eq!(shares.sum(&f, 2), ind.n(2));
        shares.adjust_winner(&f, &ind, 0);
        assert_eq!(shares.share(4, 1), f.exponent(1759));
        assert_eq!(shares.share(4, 2), f.exponent(11015));
        assert_eq!(shares.sum(&f, 2), ind.y(2));
        let once = shares.clone();
        shares.adjust_winner(&f, &ind, 0);
        assert_eq!(shares, once);
    }

    #[test]
    fn loser_adjustment_leaves_zero_bids_alone() {
        let f = f2063();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let ind = Indicators::from_y(&f, ev(&f, &[17, 400, 900]));
        let bid = Bid::new(0, 3).unwrap();
        let mut shares = make_bid_shares(&f, 2, &bid, &ind, 4, &mut rng);
        let before = shares.clone();
        shares.adjust_loser(&f, &ind, 1);
        assert_eq!(shares, before);
    }

    #[test]
    fn uniform_shares_vary_across_seeds() {
        let f = f2063();
        let ind = Indicators::from_y(&f, ev(&f, &[5]));
        let bid = Bid::new(1, 1).unwrap();
        let mut seen = std::collections::HashSet::new();
        for seed in 0..20 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let s = make_bid_shares(&f, 1, &bid, &ind, 3, &mut rng);
            seen.insert(s.share(1, 1));
            assert_eq!(s.sum(&f, 1), ind.y(1));
        }
        assert!(seen.len() >= 2);
    }

    proptest! {
        #[test]
        fn share_sum_law_and_adjustments(
            seed in any::<u64>(),
            n in 3usize..7,
            k in 1usize..10,
            bid_raw in any::<u64>(),
            trigger in 0usize..10,
            owner_pick in any::<usize>(),
        ) {
            let f = f2063();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let bid = Bid::new(bid_raw & ((1 << k) - 1), k).unwrap();
            let ind = Indicators::from_y(
                &f,
                (0..k).map(|_| f.random_nonzero_exponent(&mut rng)).collect(),
            );
            let owner = owner_pick % n + 1;
            let mut shares = make_bid_shares(&f, owner, &bid, &ind, n, &mut rng);
            for j in 1..=k {
                prop_assert_eq!(shares.sum(&f, j), ind.target(j, bid.bit(j)));
            }
            let trigger = trigger.min(k);
            let original = shares.clone();
            shares.adjust_loser(&f, &ind, trigger);
            for j in 1..=k {
                let want = if j > trigger { ind.n(j) } else { ind.target(j, bid.bit(j)) };
                prop_assert_eq!(shares.sum(&f, j), want);
            }
            shares.adjust_winner(&f, &ind, trigger);
            for j in trigger + 1..=k {
                prop_assert_eq!(shares.sum(&f, j), ind.y(j));
            }
            for i in (1..=n).filter(|&i| i != owner) {
                prop_assert_eq!(shares.row(i), original.row(i));
            }
        }
    }
}
