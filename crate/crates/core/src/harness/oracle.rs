/// Winner set (1-based, every bidder holding the maximum) and the price a
/// second-price auction charges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub winners: Vec<usize>,
    pub second_price: u64,
}

pub fn brute_force_oracle(bids: &[u64]) -> OracleResult {
    assert!(bids.len() >= 2, "need at least two bids");
    let mut sorted = bids.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let max = sorted[0];
    OracleResult {
        winners: (1..=bids.len()).filter(|&i| bids[i - 1] == max).collect(),
        second_price: sorted[1],
    }
}
