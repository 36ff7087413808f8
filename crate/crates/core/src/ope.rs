//! Off-policy evaluation on logged data.
//!
//! Logged rows are assumed to come from a uniform-random logging policy.
//! The replay method streams rows in order: whenever the candidate policy's
//! proposal matches the logged arm, the logged reward is revealed and
//! back-propagated; other rows are skipped without touching state. Per-arm
//! value estimates use the positive-part James-Stein shrinkage toward the
//! grand mean.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Error;
use crate::metrics::RunHistory;
use crate::rng::PolicyRng;
use crate::store::StateStore;
use crate::types::{DimensionSpec, Layout, RewardRecord};
use crate::Result;

/// Uniformly logged plays over a spec's arm space.
#[derive(Debug, Clone)]
pub struct LoggedDataset {
    spec: DimensionSpec,
    rows: Vec<(Layout, u8)>,
}

impl LoggedDataset {
    pub fn new(spec: DimensionSpec, rows: Vec<(Layout, u8)>) -> Result<Self> {
        for (layout, reward) in &rows {
            spec.validate_layout(layout)?;
            if *reward > 1 {
                return Err(Error::spec(format!("reward must be 0 or 1, got {reward}")));
            }
        }
        Ok(LoggedDataset { spec, rows })
    }

    pub fn spec(&self) -> &DimensionSpec {
        &self.spec
    }

    pub fn rows(&self) -> &[(Layout, u8)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Empirical per-arm tallies over the whole log.
    pub fn arm_stats(&self) -> BTreeMap<Layout, ArmStats> {
        let mut stats: BTreeMap<Layout, ArmStats> = BTreeMap::new();
        for (layout, reward) in &self.rows {
            let s = stats.entry(layout.clone()).or_default();
            s.plays += 1;
            s.successes += *reward as u64;
        }
        stats
    }
}

/// Success count and play count for one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArmStats {
    pub successes: u64,
    pub plays: u64,
}

impl ArmStats {
    pub fn new(successes: u64, plays: u64) -> Self {
        ArmStats { successes, plays }
    }

    pub fn mean(&self) -> f64 {
        self.successes as f64 / self.plays as f64
    }
}

/// Diagnostics from one replay evaluation.
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub history: RunHistory,
    /// Matched (revealed) steps.
    pub matched: u64,
    /// Log rows consumed, counting repeats across cycles.
    pub rows_seen: u64,
    /// Completed passes over the dataset; reported so users can judge reuse
    /// bias from cycling.
    pub cycles: u64,
}

/// Replay the log against a policy until `steps` matched steps, cycling the
/// dataset on exhaustion. `propose` sees the current store and stream and
/// returns the policy's arm; on a match, the logged reward is back-propagated
/// into `store` and appended to the history.
///
/// Returns early if a complete pass over the dataset produces no match
/// (a fixed policy proposing an arm the log never contains would otherwise
/// never terminate).
pub fn replay_evaluate<F>(
    mut propose: F,
    store: &mut StateStore,
    dataset: &LoggedDataset,
    steps: u64,
    rng: &mut PolicyRng,
) -> Result<ReplayOutcome>
where
    F: FnMut(&StateStore, &mut PolicyRng) -> Result<Layout>,
{
    if dataset.is_empty() {
        return Err(Error::config("logged dataset is empty"));
    }
    let mut history = RunHistory::new();
    let mut matched = 0u64;
    let mut rows_seen = 0u64;
    let mut cycles = 0u64;
    let mut matched_this_cycle = false;
    'outer: while matched < steps {
        for (layout, reward) in dataset.rows() {
            if matched >= steps {
                break 'outer;
            }
            rows_seen += 1;
            let proposal = propose(store, rng)?;
            if proposal == *layout {
                matched += 1;
                matched_this_cycle = true;
                store.backpropagate(layout, *reward)?;
                history.push(RewardRecord {
                    step: matched,
                    layout: layout.clone(),
                    reward: *reward,
                })?;
            }
        }
        cycles += 1;
        if !matched_this_cycle {
            break;
        }
        matched_this_cycle = false;
    }
    Ok(ReplayOutcome {
        history,
        matched,
        rows_seen,
        cycles,
    })
}

/// Shrunk per-arm estimates plus bookkeeping.
#[derive(Debug, Clone)]
pub struct ShrunkEstimates {
    /// `(arm, shrunk mean)` for every arm with at least one play, clamped to
    /// `[0, 1]`.
    pub values: Vec<(Layout, f64)>,
    /// Arms with zero plays, excluded rather than imputed.
    pub excluded: Vec<Layout>,
    /// The shrinkage factor actually applied (1.0 when below the k >= 4
    /// threshold or when arm means are degenerate).
    pub factor: f64,
}

impl ShrunkEstimates {
    pub fn value(&self, arm: &Layout) -> Option<f64> {
        self.values.iter().find(|(l, _)| l == arm).map(|&(_, v)| v)
    }
}

/// Positive-part James-Stein shrinkage of per-arm empirical means toward the
/// grand mean: `shrunk_i = xbar + c (x_i - xbar)` with
/// `c = max(0, 1 - (k - 3) sigma2 / sum_i (x_i - xbar)^2)` and `sigma2` the
/// pooled per-arm-mean variance `mean_i x_i (1 - x_i) / n_i`. Applied only
/// when `k >= 4` arms have plays; fewer arms pass through unchanged.
pub fn james_stein(stats: &[(Layout, ArmStats)]) -> ShrunkEstimates {
    let mut excluded = Vec::new();
    let mut included: Vec<(Layout, ArmStats)> = Vec::new();
    for (layout, s) in stats {
        if s.plays == 0 {
            excluded.push(layout.clone());
        } else {
            included.push((layout.clone(), *s));
        }
    }
    let k = included.len();
    if k == 0 {
        return ShrunkEstimates {
            values: Vec::new(),
            excluded,
            factor: 1.0,
        };
    }
    let means: Vec<f64> = included.iter().map(|(_, s)| s.mean()).collect();
    if k < 4 {
        return ShrunkEstimates {
            values: included
                .into_iter()
                .zip(means)
                .map(|((l, _), x)| (l, x))
                .collect(),
            excluded,
            factor: 1.0,
        };
    }
    let grand = means.iter().sum::<f64>() / k as f64;
    let spread: f64 = means.iter().map(|x| (x - grand).powi(2)).sum();
    let pooled_var = included
        .iter()
        .zip(&means)
        .map(|((_, s), x)| x * (1.0 - x) / s.plays as f64)
        .sum::<f64>()
        / k as f64;
    let factor = if spread == 0.0 {
        1.0
    } else {
        (1.0 - (k as f64 - 3.0) * pooled_var / spread).max(0.0)
    };
    let values = included
        .into_iter()
        .zip(means)
        .map(|((l, _), x)| (l, (grand + factor * (x - grand)).clamp(0.0, 1.0)))
        .collect();
    ShrunkEstimates {
        values,
        excluded,
        factor,
    }
}

fn expected_header(dims: usize) -> String {
    let mut h = String::new();
    for d in 1..=dims {
        let _ = write!(h, "dim_{d},");
    }
    h.push_str("reward");
    h
}

/// Parse a logged-data CSV with header `dim_1,...,dim_D,reward` against the
/// spec. Malformed rows are rejected with their line number.
pub fn ingest_logged(path: impl AsRef<Path>, spec: &DimensionSpec) -> Result<LoggedDataset> {
    let text = std::fs::read_to_string(path)?;
    let d = spec.dims();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let expected = expected_header(d);
    if header.trim_end() != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{expected}`, got `{header}`"),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} fields, got {}", d + 1, fields.len()),
            });
        }
        let mut assignment = Vec::with_capacity(d);
        for (i, field) in fields[..d].iter().enumerate() {
            let choice: u32 = field.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad choice `{field}` for dimension {}", i + 1),
            })?;
            spec.validate_pair(i + 1, choice)
                .map_err(|e| Error::Parse {
                    line: lineno,
                    message: e.to_string(),
                })?;
            assignment.push(choice);
        }
        let reward: u8 = fields[d].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("bad reward `{}`", fields[d]),
        })?;
        if reward > 1 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("reward must be 0 or 1, got {reward}"),
            });
        }
        rows.push((Layout(assignment), reward));
    }
    LoggedDataset::new(spec.clone(), rows)
}

/// Write a dataset in the same CSV schema `ingest_logged` reads.
pub fn write_logged(path: impl AsRef<Path>, dataset: &LoggedDataset) -> Result<()> {
    let mut out = expected_header(dataset.spec().dims());
    out.push('\n');
    for (layout, reward) in dataset.rows() {
        for c in &layout.0 {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{reward}");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Map numeric feature rows onto a discrete arm space by equal-frequency
/// quantile binning (1-based bin indices); labels map `-1 -> 0`, `+1 -> 1`.
pub fn discretize_features(rows: &[(Vec<f64>, i32)], bins: &[u32]) -> Result<LoggedDataset> {
    let spec = DimensionSpec::new(bins.to_vec())?;
    if rows.is_empty() {
        return Err(Error::config("no rows to discretize"));
    }
    let features = bins.len();
    for (i, (fs, _)) in rows.iter().enumerate() {
        if fs.len() != features {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected {features} features, got {}", fs.len()),
            });
        }
    }
    let n = rows.len();
    let mut assignments = vec![vec![0u32; features]; n];
    for f in 0..features {
        let b = bins[f] as usize;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            rows[i].0[f]
                .partial_cmp(&rows[j].0[f])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        let first = rows[order[0]].0[f];
        let last = rows[order[n - 1]].0[f];
        if first == last {
            return Err(Error::config(format!(
                "feature {} is constant; quantile bins are degenerate",
                f + 1
            )));
        }
        for (rank, &row) in order.iter().enumerate() {
            assignments[row][f] = (rank * b / n) as u32 + 1;
        }
    }
    let mut out = Vec::with_capacity(n);
    for (i, (_, label)) in rows.iter().enumerate() {
        let reward = match label {
            -1 => 0u8,
            1 => 1u8,
            other => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("label must be -1 or +1, got {other}"),
                })
            }
        };
        out.push((Layout(assignments[i].clone()), reward));
    }
    LoggedDataset::new(spec, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Prior;

    fn uniform_log(spec: &DimensionSpec, n: usize, seed: u64) -> LoggedDataset {
        let mut rng = PolicyRng::from_seed(seed);
        let rows: Vec<(Layout, u8)> = (0..n)
            .map(|_| {
                let layout = Layout(
                    (1..=spec.dims())
                        .map(|d| rng.uniform_choice(spec.choices(d)))
                        .collect(),
                );
                let reward = rng.bernoulli(0.5);
                (layout, reward)
            })
            .collect();
        LoggedDataset::new(spec.clone(), rows).unwrap()
    }

    #[test]
    fn replay_match_count_is_binomial() {
        // Fixed target arm against a uniform log over 4 arms: matches per
        // pass are Binomial(4000, 1/4), so expect 1000 +- 3*sqrt(750).
        let spec = DimensionSpec::uniform(2, 2).unwrap();
        let dataset = uniform_log(&spec, 4000, 3);
        let mut store = StateStore::new(spec, 2, true).unwrap();
        let target = Layout(vec![1, 2]);
        let mut rng = PolicyRng::from_seed(0);
        let outcome = replay_evaluate(
            |_, _| Ok(target.clone()),
            &mut store,
            &dataset,
            4000,
            &mut rng,
        )
        .unwrap();
        let first_pass = dataset.rows().iter().filter(|(l, _)| *l == target).count() as f64;
        let tol = 3.0 * (4000.0f64 * 0.25 * 0.75).sqrt();
        assert!((first_pass - 1000.0).abs() <= tol, "matches {first_pass}");
        assert!(outcome.matched == 4000, "matched {}", outcome.matched);
    }

    #[test]
    fn replay_on_policy_degenerates_to_log_order() {
        let spec = DimensionSpec::uniform(1, 2).unwrap();
        let rows: Vec<(Layout, u8)> = [(1, 1u8), (1, 0), (1, 1)]
            .map(|(c, r)| (Layout(vec![c]), r))
            .to_vec();
        let dataset = LoggedDataset::new(spec.clone(), rows.clone()).unwrap();
        let mut store = StateStore::new(spec, 1, true).unwrap();
        let mut rng = PolicyRng::from_seed(0);
        let outcome = replay_evaluate(
            |_, _| Ok(Layout(vec![1])),
            &mut store,
            &dataset,
            3,
            &mut rng,
        )
        .unwrap();
        assert_eq!(outcome.matched, 3);
        assert_eq!(outcome.rows_seen, 3);
        let rewards: Vec<u8> = outcome.history.records().iter().map(|r| r.reward).collect();
        assert_eq!(rewards, vec![1, 0, 1]);
    }

    #[test]
    fn replay_stops_after_matchless_cycle() {
        let spec = DimensionSpec::uniform(1, 3).unwrap();
        let rows = vec![(Layout(vec![2]), 1u8), (Layout(vec![3]), 0u8)];
        let dataset = LoggedDataset::new(spec.clone(), rows).unwrap();
        let mut store = StateStore::new(spec, 1, true).unwrap();
        let mut rng = PolicyRng::from_seed(0);
        let outcome = replay_evaluate(
            |_, _| Ok(Layout(vec![1])),
            &mut store,
            &dataset,
            10,
            &mut rng,
        )
        .unwrap();
        assert_eq!(outcome.matched, 0);
        assert_eq!(outcome.cycles, 1);
    }

    #[test]
    fn james_stein_equal_means_unchanged() {
        let arms: Vec<(Layout, ArmStats)> = (1..=5)
            .map(|v| (Layout(vec![v]), ArmStats::new(5, 10)))
            .collect();
        let shrunk = james_stein(&arms);
        for (_, v) in &shrunk.values {
            assert_eq!(*v, 0.5);
        }
    }

    #[test]
    fn james_stein_below_threshold_unchanged() {
        let arms = vec![
            (Layout(vec![1]), ArmStats::new(8, 10)),
            (Layout(vec![2]), ArmStats::new(2, 10)),
        ];
        let shrunk = james_stein(&arms);
        assert_eq!(shrunk.factor, 1.0);
        assert_eq!(shrunk.values[0].1, 0.8);
        assert_eq!(shrunk.values[1].1, 0.2);
    }

    #[test]
    fn james_stein_k5_fixture() {
        // Frozen from an independent evaluation of the formula on
        // (successes, plays) = (8,10),(3,10),(5,20),(12,15),(1,5).
        let arms = vec![
            (Layout(vec![1]), ArmStats::new(8, 10)),
            (Layout(vec![2]), ArmStats::new(3, 10)),
            (Layout(vec![3]), ArmStats::new(5, 20)),
            (Layout(vec![4]), ArmStats::new(12, 15)),
            (Layout(vec![5]), ArmStats::new(1, 5)),
        ];
        let shrunk = james_stein(&arms);
        let expected = [
            0.7680611413043479,
            0.31645335144927533,
            0.27129257246376814,
            0.7680611413043479,
            0.22613179347826087,
        ];
        assert!((shrunk.factor - 0.903215579710145).abs() < 1e-12);
        for ((_, got), want) in shrunk.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn james_stein_excludes_unplayed_arms() {
        let arms = vec![
            (Layout(vec![1]), ArmStats::new(3, 10)),
            (Layout(vec![2]), ArmStats::new(0, 0)),
        ];
        let shrunk = james_stein(&arms);
        assert_eq!(shrunk.values.len(), 1);
        assert_eq!(shrunk.excluded, vec![Layout(vec![2])]);
    }

    #[test]
    fn james_stein_contracts_toward_grand_mean() {
        let mut rng = PolicyRng::from_seed(33);
        for _ in 0..200 {
            let k = 4 + (rng.uniform_choice(5) as usize);
            let arms: Vec<(Layout, ArmStats)> = (0..k)
                .map(|i| {
                    let n = rng.uniform_choice(30) as u64;
                    let s = (rng.uniform_f64() * (n as f64 + 1.0)) as u64;
                    (Layout(vec![i as u32 + 1]), ArmStats::new(s.min(n), n))
                })
                .collect();
            let means: Vec<f64> = arms.iter().map(|(_, s)| s.mean()).collect();
            let grand = means.iter().sum::<f64>() / means.len() as f64;
            let before: f64 = means.iter().map(|x| (x - grand).powi(2)).sum();
            let shrunk = james_stein(&arms);
            let after: f64 = shrunk.values.iter().map(|(_, v)| (v - grand).powi(2)).sum();
            assert!(after <= before + 1e-12, "after {after} > before {before}");
            if (after - before).abs() < 1e-15 && before > 0.0 {
                assert_eq!(shrunk.factor, 1.0);
            }
            for (_, v) in &shrunk.values {
                assert!((0.0..=1.0).contains(v));
            }
        }
    }

    #[test]
    fn ingest_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        let spec = DimensionSpec::uniform(2, 3).unwrap();

        std::fs::write(&path, "dim_1,dim_2,reward\n1,2,1\n3,1,0\n2,2,1\n").unwrap();
        let loaded = ingest_logged(&path, &spec).unwrap();
        assert_eq!(loaded.len(), 3);
        assert_eq!(loaded.rows()[1], (Layout(vec![3, 1]), 0));

        let generated = uniform_log(&spec, 1000, 77);
        let path2 = dir.path().join("gen.csv");
        write_logged(&path2, &generated).unwrap();
        let back = ingest_logged(&path2, &spec).unwrap();
        assert_eq!(back.rows(), generated.rows());
    }

    #[test]
    fn ingest_rejects_bad_rows_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let spec = DimensionSpec::uniform(2, 3).unwrap();

        let path = dir.path().join("bad_reward.csv");
        std::fs::write(&path, "dim_1,dim_2,reward\n1,2,1\n1,1,2\n").unwrap();
        match ingest_logged(&path, &spec).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("reward"));
            }
            other => panic!("unexpected {other}"),
        }

        let path = dir.path().join("bad_header.csv");
        std::fs::write(&path, "a,b,c\n1,2,1\n").unwrap();
        assert!(matches!(
            ingest_logged(&path, &spec),
            Err(Error::Parse { line: 1, .. })
        ));

        let path = dir.path().join("bad_choice.csv");
        std::fs::write(&path, "dim_1,dim_2,reward\n1,9,1\n").unwrap();
        assert!(matches!(
            ingest_logged(&path, &spec),
            Err(Error::Parse { line: 2, .. })
        ));

        assert!(ingest_logged(dir.path().join("missing.csv"), &spec).is_err());
    }

    #[test]
    fn discretize_one_value_per_bin() {
        let rows: Vec<(Vec<f64>, i32)> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&v| (vec![v, 10.0 - v], 1))
            .collect();
        let dataset = discretize_features(&rows, &[4, 4]).unwrap();
        let firsts: Vec<u32> = dataset.rows().iter().map(|(l, _)| l.choice(1)).collect();
        assert_eq!(firsts, vec![1, 2, 3, 4]);
        let seconds: Vec<u32> = dataset.rows().iter().map(|(l, _)| l.choice(2)).collect();
        assert_eq!(seconds, vec![4, 3, 2, 1]);
    }

    #[test]
    fn discretize_fourclass_shape() {
        // 863 rows, 2 features, 4 bins each: every row assigned, populations
        // within one of each other per feature.
        let mut rng = PolicyRng::from_seed(863);
        let rows: Vec<(Vec<f64>, i32)> = (0..863)
            .map(|_| {
                (
                    vec![rng.uniform_f64(), rng.uniform_f64() * 5.0 - 2.0],
                    if rng.bernoulli(0.4) == 1 { 1 } else { -1 },
                )
            })
            .collect();
        let dataset = discretize_features(&rows, &[4, 4]).unwrap();
        assert_eq!(dataset.len(), 863);
        assert_eq!(dataset.spec().arm_count(), 16);
        for dim in 1..=2 {
            let mut pop = [0usize; 4];
            for (l, _) in dataset.rows() {
                pop[(l.choice(dim) - 1) as usize] += 1;
            }
            let (min, max) = (pop.iter().min().unwrap(), pop.iter().max().unwrap());
            assert!(max - min <= 1, "dim {dim} populations {pop:?}");
        }
    }

    #[test]
    fn discretize_rejects_constant_feature() {
        let rows: Vec<(Vec<f64>, i32)> = (0..10).map(|_| (vec![1.0, 2.0], 1)).collect();
        assert!(discretize_features(&rows, &[4, 4]).is_err());
    }

    #[test]
    fn replay_feeds_store_for_learning_policies() {
        // A learning proposer (TS over 2 arms) sees only matched rewards.
        let spec = DimensionSpec::uniform(1, 2).unwrap();
        let mut rows = Vec::new();
        let mut rng = PolicyRng::from_seed(2);
        for _ in 0..2000 {
            let arm = rng.uniform_choice(2);
            let p = if arm == 1 { 0.9 } else { 0.1 };
            rows.push((Layout(vec![arm]), rng.bernoulli(p)));
        }
        let dataset = LoggedDataset::new(spec.clone(), rows).unwrap();
        let mut store = StateStore::new(spec, 1, true).unwrap();
        let prior = Prior::default();
        let mut policy_rng = PolicyRng::from_seed(4);
        let outcome = replay_evaluate(
            |store, rng| {
                crate::policies::ts_optimize(
                    store,
                    1,
                    &crate::types::PartialAssignment::root(),
                    &prior,
                    rng,
                )
                .map(|c| Layout(vec![c]))
            },
            &mut store,
            &dataset,
            400,
            &mut policy_rng,
        )
        .unwrap();
        assert_eq!(outcome.matched, 400);
        // The learner should concentrate on the good arm in the last 100
        // matched plays.
        let tail = &outcome.history.records()[300..];
        let good = tail.iter().filter(|r| r.layout == Layout(vec![1])).count();
        assert!(good > 85, "good-arm plays in tail: {good}");
    }
}
