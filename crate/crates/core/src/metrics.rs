//! Evaluation metrics over closed-loop histories.
//!
//! One `RunHistory` is a single replication; the harness averages metric
//! values across replications. Regret comes in two flavors: realized
//! (`p(A*) - X_t`, the paper-style formula with Bernoulli noise) and
//! expected (`p(A*) - p(A_t)`).

use std::collections::HashMap;

use crate::error::Error;
use crate::simulator::SimulatorModel;
use crate::types::{Layout, RewardRecord};
use crate::Result;

/// Default moving-window size for windowed rates.
pub const DEFAULT_WINDOW: usize = 1000;

/// Ordered record of one replication's plays.
#[derive(Debug, Clone, Default)]
pub struct RunHistory {
    records: Vec<RewardRecord>,
}

impl RunHistory {
    pub fn new() -> Self {
        RunHistory::default()
    }

    /// Append a play; steps must arrive strictly increasing from 1.
    pub fn push(&mut self, record: RewardRecord) -> Result<()> {
        let expected = self.records.len() as u64 + 1;
        if record.step != expected {
            return Err(Error::spec(format!(
                "expected step {expected}, got {}",
                record.step
            )));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[RewardRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// One rate per consecutive full window of a history.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSeries {
    pub window: usize,
    pub values: Vec<f64>,
}

impl WindowSeries {
    /// Inclusive 1-based step bounds of window `i`.
    pub fn bounds(&self, i: usize) -> (u64, u64) {
        let start = (i * self.window) as u64 + 1;
        (start, start + self.window as u64 - 1)
    }
}

/// Mean realized regret `(1/T) * sum_t (p(A*) - X_t)` for one replication.
pub fn average_regret(history: &RunHistory, model: &SimulatorModel) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let (_, p_star) = model.true_best()?;
    let total: f64 = history
        .records()
        .iter()
        .map(|r| p_star - r.reward as f64)
        .sum();
    Ok(total / history.len() as f64)
}

/// Mean expected regret `(1/T) * sum_t (p(A*) - p(A_t))`.
pub fn expected_average_regret(history: &RunHistory, model: &SimulatorModel) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let (_, p_star) = model.true_best()?;
    let total: f64 = history
        .records()
        .iter()
        .map(|r| p_star - model.success_prob(&r.layout))
        .sum();
    Ok(total / history.len() as f64)
}

/// Per window: count of the modal layout divided by the window size. The
/// final partial window is dropped.
pub fn convergence_rate(history: &RunHistory, window: usize) -> Result<WindowSeries> {
    if window < 1 {
        return Err(Error::config("window must be >= 1"));
    }
    let mut values = Vec::new();
    for chunk in history.records().chunks_exact(window) {
        let mut counts: HashMap<&Layout, usize> = HashMap::new();
        for r in chunk {
            *counts.entry(&r.layout).or_insert(0) += 1;
        }
        let modal = counts.values().copied().max().unwrap_or(0);
        values.push(modal as f64 / window as f64);
    }
    Ok(WindowSeries { window, values })
}

/// Per window: fraction of steps whose layout equals the model's true best.
pub fn best_arm_rate(
    history: &RunHistory,
    model: &SimulatorModel,
    window: usize,
) -> Result<WindowSeries> {
    if window < 1 {
        return Err(Error::config("window must be >= 1"));
    }
    let (best, _) = model.true_best()?;
    let values = history
        .records()
        .chunks_exact(window)
        .map(|chunk| chunk.iter().filter(|r| r.layout == best).count() as f64 / window as f64)
        .collect();
    Ok(WindowSeries { window, values })
}

/// Per window: mean expected regret `p(A*) - p(A_t)`.
pub fn windowed_expected_regret(
    history: &RunHistory,
    model: &SimulatorModel,
    window: usize,
) -> Result<WindowSeries> {
    if window < 1 {
        return Err(Error::config("window must be >= 1"));
    }
    let (_, p_star) = model.true_best()?;
    let values = history
        .records()
        .chunks_exact(window)
        .map(|chunk| {
            chunk
                .iter()
                .map(|r| p_star - model.success_prob(&r.layout))
                .sum::<f64>()
                / window as f64
        })
        .collect();
    Ok(WindowSeries { window, values })
}
