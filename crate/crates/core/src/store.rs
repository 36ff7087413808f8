//! Sparse joint-posterior state store.
//!
//! Maps unordered partial assignments to success/failure tallies. A store is
//! bounded by `max_order`: back-propagation eagerly updates every subset of
//! the played layout up to that size, plus the root key and (optionally) the
//! full size-D key used by candidate arbitration. Absent keys read as (0, 0).

use itertools::Itertools;
use rustc_hash::FxHashMap;

use crate::error::Error;
use crate::rng::PolicyRng;
use crate::types::{BetaCounts, DimensionSpec, Layout, PartialAssignment, Prior};
use crate::Result;

/// Associative store from [`PartialAssignment`] to [`BetaCounts`].
///
/// Single-writer: one experiment replication owns one store. Reads never
/// mutate.
#[derive(Debug, Clone)]
pub struct StateStore {
    spec: DimensionSpec,
    max_order: usize,
    track_full: bool,
    table: FxHashMap<PartialAssignment, BetaCounts>,
}

impl StateStore {
    /// `max_order` is the highest subset size eagerly maintained;
    /// `track_full` forces the size-D key to be maintained regardless.
    pub fn new(spec: DimensionSpec, max_order: usize, track_full: bool) -> Result<Self> {
        if max_order > spec.dims() {
            return Err(Error::config(format!(
                "max_order {} exceeds dimension count {}",
                max_order,
                spec.dims()
            )));
        }
        Ok(StateStore {
            spec,
            max_order,
            track_full,
            table: FxHashMap::default(),
        })
    }

    pub fn spec(&self) -> &DimensionSpec {
        &self.spec
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn track_full(&self) -> bool {
        self.track_full
    }

    /// Whether keys of this size are eagerly maintained.
    pub fn maintains_order(&self, order: usize) -> bool {
        order == 0 || order <= self.max_order || (self.track_full && order == self.spec.dims())
    }

    /// Stored counts for a key; (0, 0) for unseen keys. Validates the key
    /// against the spec.
    pub fn counts(&self, key: &PartialAssignment) -> Result<BetaCounts> {
        key.validate(&self.spec)?;
        Ok(self.counts_raw(key))
    }

    /// Lookup without validation; used on hot paths where the caller
    /// constructs keys from already-validated layouts.
    pub fn counts_raw(&self, key: &PartialAssignment) -> BetaCounts {
        self.table.get(key).copied().unwrap_or_default()
    }

    /// One draw from Beta(alpha + alpha0, beta + beta0) for the key's
    /// posterior. The store is not mutated.
    pub fn sample_theta(
        &self,
        key: &PartialAssignment,
        prior: &Prior,
        rng: &mut PolicyRng,
    ) -> Result<f64> {
        key.validate(&self.spec)?;
        Ok(self.sample_theta_raw(key, prior, rng))
    }

    pub fn sample_theta_raw(
        &self,
        key: &PartialAssignment,
        prior: &Prior,
        rng: &mut PolicyRng,
    ) -> f64 {
        let c = self.counts_raw(key);
        rng.beta(c.alpha as f64 + prior.alpha0, c.beta as f64 + prior.beta0)
    }

    /// Record one observation: increments alpha by `reward` and beta by
    /// `1 - reward` on the root key, every subset of the layout's pairs with
    /// size `1..=max_order`, and the full size-D key when tracked.
    pub fn backpropagate(&mut self, layout: &Layout, reward: u8) -> Result<()> {
        self.spec.validate_layout(layout)?;
        if reward > 1 {
            return Err(Error::spec(format!("reward must be 0 or 1, got {reward}")));
        }
        let d = self.spec.dims();

        self.table
            .entry(PartialAssignment::root())
            .or_default()
            .observe(reward);

        let pairs: Vec<(usize, u32)> = layout
            .0
            .iter()
            .enumerate()
            .map(|(i, &c)| (i + 1, c))
            .collect();
        for size in 1..=self.max_order.min(d) {
            for combo in pairs.iter().combinations(size) {
                let key = PartialAssignment::from_pairs(combo.iter().map(|&&p| p))
                    .expect("layout pairs have distinct dimensions");
                self.table.entry(key).or_default().observe(reward);
            }
        }
        if self.track_full && d > self.max_order {
            self.table
                .entry(PartialAssignment::full(layout))
                .or_default()
                .observe(reward);
        }
        Ok(())
    }

    /// Number of stored keys (including the root once touched).
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PartialAssignment, &BetaCounts)> {
        self.table.iter()
    }

    /// Line-oriented snapshot: one key per line, `dim:choice` pairs sorted by
    /// dimension and comma-separated, a tab, then `alpha beta`. Lines are
    /// sorted by key so the output is canonical.
    pub fn snapshot(&self) -> String {
        let mut keys: Vec<&PartialAssignment> = self.table.keys().collect();
        keys.sort();
        let mut out = String::new();
        for key in keys {
            let c = self.table[key];
            let pairs = key
                .iter()
                .map(|(d, v)| format!("{d}:{v}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!("{pairs}\t{} {}\n", c.alpha, c.beta));
        }
        out
    }

    /// Parse a snapshot produced by [`Self::snapshot`] into a store with the
    /// given shape. Round-trips bit-exactly.
    pub fn from_snapshot(
        spec: DimensionSpec,
        max_order: usize,
        track_full: bool,
        text: &str,
    ) -> Result<Self> {
        let mut store = StateStore::new(spec, max_order, track_full)?;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let bad = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            let (key_part, counts_part) = line
                .split_once('\t')
                .ok_or_else(|| bad("missing tab separator".into()))?;
            let mut key = PartialAssignment::root();
            if !key_part.is_empty() {
                for pair in key_part.split(',') {
                    let (d, v) = pair
                        .split_once(':')
                        .ok_or_else(|| bad(format!("malformed pair `{pair}`")))?;
                    let d: usize = d.parse().map_err(|_| bad(format!("bad dimension `{d}`")))?;
                    let v: u32 = v.parse().map_err(|_| bad(format!("bad choice `{v}`")))?;
                    key.insert(d, v).map_err(|e| bad(e.to_string()))?;
                }
            }
            key.validate(store.spec()).map_err(|e| bad(e.to_string()))?;
            let (a, b) = counts_part
                .split_once(' ')
                .ok_or_else(|| bad("missing counts".into()))?;
            let alpha: u64 = a.parse().map_err(|_| bad(format!("bad alpha `{a}`")))?;
            let beta: u64 = b.parse().map_err(|_| bad(format!("bad beta `{b}`")))?;
            store.table.insert(key, BetaCounts::new(alpha, beta));
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store3() -> StateStore {
        StateStore::new(DimensionSpec::uniform(3, 3).unwrap(), 2, true).unwrap()
    }

    fn key(pairs: &[(usize, u32)]) -> PartialAssignment {
        PartialAssignment::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn fresh_store_reads_zero() {
        let store = store3();
        assert_eq!(
            store.counts(&key(&[(1, 1)])).unwrap(),
            BetaCounts::new(0, 0)
        );
        assert_eq!(
            store.counts(&PartialAssignment::root()).unwrap(),
            BetaCounts::new(0, 0)
        );
    }

    #[test]
    fn counts_rejects_out_of_range_keys() {
        let store = store3();
        assert!(store.counts(&key(&[(4, 1)])).is_err());
        assert!(store.counts(&key(&[(1, 9)])).is_err());
    }

    #[test]
    fn single_update_hits_singleton_keys() {
        let mut store = store3();
        store.backpropagate(&Layout(vec![1, 2, 3]), 1).unwrap();
        assert_eq!(
            store.counts(&key(&[(1, 1)])).unwrap(),
            BetaCounts::new(1, 0)
        );
    }

    #[test]
    fn two_update_history_matches_replay() {
        // Hand replay: after [1,2,3]->1 and [1,2,2]->0 the key {(1,1)} saw
        // both plays, {(1,1),(3,3)} only the first.
        let mut store = store3();
        store.backpropagate(&Layout(vec![1, 2, 3]), 1).unwrap();
        store.backpropagate(&Layout(vec![1, 2, 2]), 0).unwrap();
        assert_eq!(
            store.counts(&key(&[(1, 1)])).unwrap(),
            BetaCounts::new(1, 1)
        );
        assert_eq!(
            store.counts(&key(&[(1, 1), (3, 3)])).unwrap(),
            BetaCounts::new(1, 0)
        );
    }

    #[test]
    fn backpropagate_updates_exactly_expected_keys() {
        // D=3, max_order=2, track_full: root + 3 singletons + 3 pairs + full.
        let mut store = store3();
        store.backpropagate(&Layout(vec![1, 2, 3]), 1).unwrap();
        assert_eq!(store.len(), 8);
        for (_, c) in store.iter() {
            assert_eq!(*c, BetaCounts::new(1, 0));
        }

        let mut store = store3();
        store.backpropagate(&Layout(vec![1, 2, 3]), 0).unwrap();
        assert_eq!(store.len(), 8);
        for (_, c) in store.iter() {
            assert_eq!(*c, BetaCounts::new(0, 1));
        }
    }

    #[test]
    fn full_order_store_updates_all_subsets() {
        let mut store = StateStore::new(DimensionSpec::uniform(3, 3).unwrap(), 3, true).unwrap();
        store.backpropagate(&Layout(vec![1, 2, 3]), 1).unwrap();
        // 2^3 - 1 non-root keys plus the root.
        assert_eq!(store.len(), 8);
    }

    #[test]
    fn sample_theta_uniform_prior_mean() {
        let store = store3();
        let prior = Prior::default();
        let mut rng = PolicyRng::from_seed(7);
        let k = key(&[(1, 1)]);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| store.sample_theta(&k, &prior, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn sample_theta_posterior_mean() {
        // counts (3,1) + prior (1,1) = Beta(4,2), mean 2/3, sd ~ sqrt(8/252).
        let mut store = store3();
        let k = key(&[(1, 1)]);
        for _ in 0..3 {
            store.backpropagate(&Layout(vec![1, 1, 1]), 1).unwrap();
        }
        store.backpropagate(&Layout(vec![1, 1, 1]), 0).unwrap();
        let prior = Prior::default();
        let mut rng = PolicyRng::from_seed(11);
        let n = 10_000u32;
        let mean: f64 = (0..n)
            .map(|_| store.sample_theta(&k, &prior, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        let se = (8.0 / 252.0f64).sqrt() / (n as f64).sqrt();
        assert!(
            (mean - 2.0 / 3.0).abs() < 3.0 * se,
            "mean {mean}, tolerance {}",
            3.0 * se
        );
    }

    #[test]
    fn sample_theta_saturated_counts_concentrate() {
        // Beta(10^6 + 1, 1): P(draw <= 0.99) is astronomically small.
        let spec = DimensionSpec::uniform(1, 2).unwrap();
        let snapshot = "\t1000000 0\n1:1\t1000000 0\n";
        let store = StateStore::from_snapshot(spec, 1, true, snapshot).unwrap();
        let prior = Prior::default();
        let mut rng = PolicyRng::from_seed(3);
        let k = key(&[(1, 1)]);
        let min = (0..1000)
            .map(|_| store.sample_theta(&k, &prior, &mut rng).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.99, "min draw {min}");
    }

    #[test]
    fn snapshot_round_trips() {
        let mut store = store3();
        store.backpropagate(&Layout(vec![1, 2, 3]), 1).unwrap();
        store.backpropagate(&Layout(vec![3, 2, 1]), 0).unwrap();
        let text = store.snapshot();
        let restored = StateStore::from_snapshot(store.spec().clone(), 2, true, &text).unwrap();
        assert_eq!(restored.snapshot(), text);
        assert_eq!(restored.len(), store.len());
    }

    #[test]
    fn snapshot_parse_errors_carry_line_numbers() {
        let spec = DimensionSpec::uniform(2, 2).unwrap();
        let err = StateStore::from_snapshot(spec, 1, true, "1:1\t1 0\nbogus\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
    }
}
