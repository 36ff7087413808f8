//! Arm-selection policies.
//!
//! Four path-planning procedures build candidate layouts one dimension at a
//! time from the joint posterior store: a full sequential pass (FPF), a
//! partial order-m pass (PPF-m), hill climbing (DS), and hill climbing with
//! boosted low-order scores (Boosted-DS-m). A template then repeats the
//! planner `S` times and arbitrates the candidates with one posterior draw
//! from each full-layout key. Flat Thompson Sampling over all arms and
//! independent per-dimension bandits (D-MABs, the order-1 partial pass) are
//! included as baselines.
//!
//! All procedures consume the supplied stream in a fixed order (permutations
//! and random dimension picks first, then Beta draws) and break ties toward
//! the lowest choice index, so selections are reproducible.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::PolicyRng;
use crate::store::StateStore;
use crate::types::{DimensionSpec, Layout, PartialAssignment, Prior, DEFAULT_ARM_CAP};
use crate::Result;

/// Which planning procedure a policy runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PolicyVariant {
    /// Full sequential pass over a random permutation of dimensions.
    Fpf,
    /// Fix `order - 1` dimensions sequentially, then optimize the rest in
    /// parallel conditioned on them.
    Ppf { order: usize },
    /// Hill climbing: random initial layout, one random dimension
    /// re-optimized per round.
    Ds,
    /// Hill climbing with scores summed from low-order joint draws.
    BoostedDs { order: usize },
    /// One Beta draw per full layout, argmax over all arms.
    FlatTs,
    /// Independent Thompson Sampling per dimension; identical code path to
    /// `Ppf { order: 1 }`.
    #[serde(rename = "dmabs")]
    DMabs,
}

impl PolicyVariant {
    pub fn name(&self) -> String {
        match self {
            PolicyVariant::Fpf => "fpf".into(),
            PolicyVariant::Ppf { order } => format!("ppf{order}"),
            PolicyVariant::Ds => "ds".into(),
            PolicyVariant::BoostedDs { order } => format!("boosted_ds{order}"),
            PolicyVariant::FlatTs => "flat_ts".into(),
            PolicyVariant::DMabs => "dmabs".into(),
        }
    }
}

fn default_searches() -> usize {
    45
}

fn default_rounds() -> usize {
    10
}

fn default_arm_cap() -> u64 {
    DEFAULT_ARM_CAP
}

/// A policy with its search parameters and prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    #[serde(flatten)]
    pub variant: PolicyVariant,
    /// Candidate searches per selection (`S`).
    #[serde(default = "default_searches")]
    pub searches: usize,
    /// Hill-climbing rounds (`K`); used by the DS variants only.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub prior: Prior,
    /// Enumeration cap for flat Thompson Sampling.
    #[serde(default = "default_arm_cap")]
    pub arm_cap: u64,
}

impl PolicyConfig {
    pub fn new(variant: PolicyVariant) -> Self {
        PolicyConfig {
            variant,
            searches: default_searches(),
            rounds: default_rounds(),
            prior: Prior::default(),
            arm_cap: default_arm_cap(),
        }
    }

    pub fn name(&self) -> String {
        self.variant.name()
    }

    pub fn validate(&self, spec: &DimensionSpec) -> Result<()> {
        if self.searches < 1 {
            return Err(Error::config("searches (S) must be >= 1"));
        }
        if self.rounds < 1 {
            return Err(Error::config("rounds (K) must be >= 1"));
        }
        Prior::new(self.prior.alpha0, self.prior.beta0)?;
        match self.variant {
            PolicyVariant::Ppf { order } | PolicyVariant::BoostedDs { order } => {
                if order < 1 || order > spec.dims() {
                    return Err(Error::config(format!(
                        "order {} out of range 1..={}",
                        order,
                        spec.dims()
                    )));
                }
            }
            PolicyVariant::FlatTs => {
                spec.arm_count_capped(self.arm_cap)?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Store shape this variant needs: `(max_order, track_full)`.
    pub fn store_requirements(&self, spec: &DimensionSpec) -> (usize, bool) {
        match self.variant {
            PolicyVariant::Fpf | PolicyVariant::Ds => (spec.dims(), true),
            PolicyVariant::Ppf { order } | PolicyVariant::BoostedDs { order } => (order, true),
            PolicyVariant::FlatTs => (0, true),
            PolicyVariant::DMabs => (1, false),
        }
    }

    fn check_store(&self, store: &StateStore) -> Result<()> {
        let (max_order, track_full) = self.store_requirements(store.spec());
        if store.max_order() < max_order
            || (track_full && !(store.track_full() || store.max_order() == store.spec().dims()))
        {
            return Err(Error::config(format!(
                "policy {} needs a store with max_order >= {} (got {}) and a tracked full key",
                self.name(),
                max_order,
                store.max_order()
            )));
        }
        Ok(())
    }
}

/// Thompson-optimize one dimension: sample one theta per choice from the key
/// `fixed + (target_dim, v)` and return the argmax choice. Ties go to the
/// lowest choice index.
pub fn ts_optimize(
    store: &StateStore,
    target_dim: usize,
    fixed: &PartialAssignment,
    prior: &Prior,
    rng: &mut PolicyRng,
) -> Result<u32> {
    let spec = store.spec();
    spec.validate_pair(target_dim, 1)?;
    fixed.validate(spec)?;
    if fixed.contains_dim(target_dim) {
        return Err(Error::config(format!(
            "target dimension {target_dim} is already fixed"
        )));
    }
    if !store.maintains_order(fixed.len() + 1) {
        return Err(Error::config(format!(
            "store of max_order {} cannot condition on {} fixed dimensions",
            store.max_order(),
            fixed.len()
        )));
    }
    let mut key = fixed.with(target_dim, 1);
    let mut best_choice = 1u32;
    let mut best_theta = f64::NEG_INFINITY;
    for v in 1..=spec.choices(target_dim) {
        key.set(target_dim, v);
        let theta = store.sample_theta_raw(&key, prior, rng);
        if theta > best_theta {
            best_theta = theta;
            best_choice = v;
        }
    }
    Ok(best_choice)
}

/// Boosted variant: per choice, sum a draw from the singleton key with draws
/// from every joint key `{(target, v)} + F` for subsets `F` of `fixed` with
/// `1 <= |F| <= order - 1`. At order 2 this is one singleton plus all pairs.
pub fn bst_ts_optimize(
    store: &StateStore,
    target_dim: usize,
    fixed: &PartialAssignment,
    order: usize,
    prior: &Prior,
    rng: &mut PolicyRng,
) -> Result<u32> {
    let spec = store.spec();
    spec.validate_pair(target_dim, 1)?;
    fixed.validate(spec)?;
    if fixed.contains_dim(target_dim) {
        return Err(Error::config(format!(
            "target dimension {target_dim} is already fixed"
        )));
    }
    if order < 1 {
        return Err(Error::config("order must be >= 1"));
    }
    let max_subset = order.saturating_sub(1).min(fixed.len());
    if !store.maintains_order(max_subset + 1) {
        return Err(Error::config(format!(
            "store of max_order {} cannot serve order-{} boosted scores",
            store.max_order(),
            order
        )));
    }

    // Subsets in (size, lexicographic) order so stream consumption is fixed.
    let pairs: Vec<(usize, u32)> = fixed.iter().collect();
    let mut subsets: Vec<PartialAssignment> = Vec::new();
    for size in 1..=max_subset {
        for combo in pairs.iter().combinations(size) {
            subsets.push(
                PartialAssignment::from_pairs(combo.iter().map(|&&p| p))
                    .expect("fixed pairs have distinct dimensions"),
            );
        }
    }

    let mut best_choice = 1u32;
    let mut best_score = f64::NEG_INFINITY;
    let mut singleton = PartialAssignment::root();
    singleton.set(target_dim, 1);
    for v in 1..=spec.choices(target_dim) {
        singleton.set(target_dim, v);
        let mut score = store.sample_theta_raw(&singleton, prior, rng);
        for subset in &subsets {
            let key = subset.with(target_dim, v);
            score += store.sample_theta_raw(&key, prior, rng);
        }
        if score > best_score {
            best_score = score;
            best_choice = v;
        }
    }
    Ok(best_choice)
}

/// Full sequential pass: visit a uniformly random permutation of dimensions,
/// fixing each via [`ts_optimize`] conditioned on all previously fixed pairs.
pub fn plan_fpf(store: &StateStore, prior: &Prior, rng: &mut PolicyRng) -> Result<Layout> {
    let spec = store.spec();
    let d = spec.dims();
    let order = rng.permutation(d);
    let mut fixed = PartialAssignment::root();
    let mut assignment = vec![0u32; d];
    for &dim in &order {
        let v = ts_optimize(store, dim, &fixed, prior, rng)?;
        fixed.insert(dim, v)?;
        assignment[dim - 1] = v;
    }
    Ok(Layout(assignment))
}

/// Partial pass of order `m`: fix `m - 1` random dimensions sequentially,
/// then optimize every remaining dimension conditioned only on those fixed
/// pairs. `m = 1` fixes nothing and optimizes each dimension independently.
pub fn plan_ppf(
    store: &StateStore,
    order: usize,
    prior: &Prior,
    rng: &mut PolicyRng,
) -> Result<Layout> {
    let spec = store.spec();
    let d = spec.dims();
    if order < 1 || order > d {
        return Err(Error::config(format!("order {order} out of range 1..={d}")));
    }
    let perm = rng.permutation(d);
    let mut fixed = PartialAssignment::root();
    let mut assignment = vec![0u32; d];
    for &dim in perm.iter().take(order - 1) {
        let v = ts_optimize(store, dim, &fixed, prior, rng)?;
        fixed.insert(dim, v)?;
        assignment[dim - 1] = v;
    }
    for &dim in perm.iter().skip(order - 1) {
        let v = ts_optimize(store, dim, &fixed, prior, rng)?;
        assignment[dim - 1] = v;
    }
    Ok(Layout(assignment))
}

/// Hill climbing: start from a uniformly random layout, then for `rounds`
/// iterations re-optimize one random dimension with all others held fixed.
pub fn plan_ds(
    store: &StateStore,
    rounds: usize,
    prior: &Prior,
    rng: &mut PolicyRng,
) -> Result<Layout> {
    let spec = store.spec();
    let d = spec.dims();
    let mut assignment: Vec<u32> = (1..=d)
        .map(|dim| rng.uniform_choice(spec.choices(dim)))
        .collect();
    let mut current = PartialAssignment::full(&Layout(assignment.clone()));
    for _ in 0..rounds {
        let dim = rng.uniform_dim(d);
        current.remove(dim);
        let v = ts_optimize(store, dim, &current, prior, rng)?;
        current.set(dim, v);
        assignment[dim - 1] = v;
    }
    Ok(Layout(assignment))
}

/// Hill climbing with [`bst_ts_optimize`] in place of the full conditional.
pub fn plan_boosted_ds(
    store: &StateStore,
    rounds: usize,
    order: usize,
    prior: &Prior,
    rng: &mut PolicyRng,
) -> Result<Layout> {
    let spec = store.spec();
    let d = spec.dims();
    let mut assignment: Vec<u32> = (1..=d)
        .map(|dim| rng.uniform_choice(spec.choices(dim)))
        .collect();
    let mut current = PartialAssignment::full(&Layout(assignment.clone()));
    for _ in 0..rounds {
        let dim = rng.uniform_dim(d);
        current.remove(dim);
        let v = bst_ts_optimize(store, dim, &current, order, prior, rng)?;
        current.set(dim, v);
        assignment[dim - 1] = v;
    }
    Ok(Layout(assignment))
}

/// Flat Thompson Sampling: one Beta draw per full layout, argmax over all
/// arms in lexicographic order (ties keep the smallest layout).
pub fn flat_ts_select(
    store: &StateStore,
    prior: &Prior,
    arm_cap: u64,
    rng: &mut PolicyRng,
) -> Result<Layout> {
    let spec = store.spec();
    spec.arm_count_capped(arm_cap)?;
    let mut best: Option<Layout> = None;
    let mut best_theta = f64::NEG_INFINITY;
    for layout in spec.layouts() {
        let key = PartialAssignment::full(&layout);
        let theta = store.sample_theta_raw(&key, prior, rng);
        if theta > best_theta {
            best_theta = theta;
            best = Some(layout);
        }
    }
    best.ok_or_else(|| Error::config("empty arm space"))
}

/// Run the configured policy once and return the selected arm.
///
/// Path-planning variants run their planner `searches` times, sample one
/// theta from each candidate's full-layout key, and return the candidate
/// with the maximal draw. Flat TS and D-MABs skip candidate arbitration.
pub fn select_arm(
    policy: &PolicyConfig,
    store: &StateStore,
    rng: &mut PolicyRng,
) -> Result<Layout> {
    policy.validate(store.spec())?;
    policy.check_store(store)?;
    let prior = &policy.prior;
    match policy.variant {
        PolicyVariant::FlatTs => flat_ts_select(store, prior, policy.arm_cap, rng),
        PolicyVariant::DMabs => plan_ppf(store, 1, prior, rng),
        _ => {
            let mut best: Option<Layout> = None;
            let mut best_theta = f64::NEG_INFINITY;
            for _ in 0..policy.searches {
                let candidate = match policy.variant {
                    PolicyVariant::Fpf => plan_fpf(store, prior, rng)?,
                    PolicyVariant::Ppf { order } => plan_ppf(store, order, prior, rng)?,
                    PolicyVariant::Ds => plan_ds(store, policy.rounds, prior, rng)?,
                    PolicyVariant::BoostedDs { order } => {
                        plan_boosted_ds(store, policy.rounds, order, prior, rng)?
                    }
                    _ => unreachable!(),
                };
                let key = PartialAssignment::full(&candidate);
                let theta = store.sample_theta_raw(&key, prior, rng);
                if theta > best_theta {
                    best_theta = theta;
                    best = Some(candidate);
                }
            }
            best.ok_or_else(|| Error::config("searches must be >= 1"))
        }
    }
}
