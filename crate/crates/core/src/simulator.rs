//! Ground-truth Bernoulli reward environment.
//!
//! Success rates follow a probit link over a linear predictor with m-way
//! interaction weights: for a layout `A`,
//! `p(A) = NormalCDF((mu0 + sum_k alpha_k * sum_{k-subsets} mu^k(A)) / beta)`.
//! Weights are drawn i.i.d. standard normal at initialization and the model
//! is immutable afterwards, so it can be shared across parallel replications.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use statrs::function::erf;

use crate::error::Error;
use crate::rng::PolicyRng;
use crate::types::{DimensionSpec, Layout, DEFAULT_ARM_CAP};
use crate::Result;

/// Dense weight table for one subset of dimensions, row-major over the
/// subset's choice combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    /// 1-based dimension indices, sorted ascending.
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl WeightTable {
    fn index(&self, layout: &Layout, spec: &DimensionSpec) -> usize {
        let mut idx = 0usize;
        for &d in &self.dims {
            idx = idx * spec.choices(d) as usize + (layout.choice(d) - 1) as usize;
        }
        idx
    }

    /// Weight at the layout's choice combination for this subset.
    pub fn at(&self, layout: &Layout, spec: &DimensionSpec) -> f64 {
        self.values[self.index(layout, spec)]
    }
}

/// Immutable probit reward model with interaction order `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorModel {
    spec: DimensionSpec,
    order: usize,
    /// Scaling divisor `beta` applied to the whole linear predictor.
    scale: f64,
    /// Control parameters `alpha_1..alpha_m`, one per interaction size.
    controls: Vec<f64>,
    /// Intercept `mu0`; zero by default.
    bias: f64,
    /// Tables in deterministic order: size ascending, subsets lexicographic.
    weights: Vec<WeightTable>,
}

/// Default control parameters: `alpha_k = k! / (D (D-1) ... (D-k+1))`.
pub fn default_controls(dims: usize, order: usize) -> Result<Vec<f64>> {
    if order > dims {
        return Err(Error::config(format!(
            "interaction order {order} exceeds dimension count {dims}"
        )));
    }
    let mut out = Vec::with_capacity(order);
    let mut numerator = 1.0f64; // k!
    let mut denominator = 1.0f64; // D (D-1) ... (D-k+1)
    for k in 1..=order {
        numerator *= k as f64;
        denominator *= (dims - k + 1) as f64;
        out.push(numerator / denominator);
    }
    Ok(out)
}

/// Draw all interaction weights i.i.d. standard normal from the supplied
/// stream. Weight order is fixed (subset size ascending, subsets
/// lexicographic, choice combinations row-major), so a seed pins the model.
pub fn init_model(
    spec: DimensionSpec,
    order: usize,
    scale: f64,
    controls: Vec<f64>,
    rng: &mut PolicyRng,
) -> Result<SimulatorModel> {
    if order < 1 || order > spec.dims() {
        return Err(Error::config(format!(
            "interaction order {} out of range 1..={}",
            order,
            spec.dims()
        )));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::config(format!(
            "scale must be positive, got {scale}"
        )));
    }
    if controls.len() != order {
        return Err(Error::config(format!(
            "need {} control parameters, got {}",
            order,
            controls.len()
        )));
    }
    let d = spec.dims();
    let mut weights = Vec::new();
    for k in 1..=order {
        for dims in (1..=d).combinations(k) {
            let cells: usize = dims.iter().map(|&dd| spec.choices(dd) as usize).product();
            let values: Vec<f64> = (0..cells).map(|_| rng.standard_normal()).collect();
            weights.push(WeightTable { dims, values });
        }
    }
    Ok(SimulatorModel {
        spec,
        order,
        scale,
        controls,
        bias: 0.0,
        weights,
    })
}

impl SimulatorModel {
    pub fn spec(&self) -> &DimensionSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn controls(&self) -> &[f64] {
        &self.controls
    }

    pub fn weights(&self) -> &[WeightTable] {
        &self.weights
    }

    /// Override the intercept (zero by default).
    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    /// The linear predictor
    /// `(mu0 + sum_k alpha_k * sum_{k-subsets} mu^k(A)) / beta`.
    pub fn linear_predictor(&self, layout: &Layout) -> f64 {
        let mut acc = self.bias;
        for table in &self.weights {
            acc += self.controls[table.dims.len() - 1] * table.at(layout, &self.spec);
        }
        acc / self.scale
    }

    /// Success probability through the probit link; strictly increasing in
    /// the linear predictor.
    pub fn success_prob(&self, layout: &Layout) -> f64 {
        std_normal_cdf(self.linear_predictor(layout))
    }

    /// One Bernoulli reward draw for the layout.
    pub fn draw_reward(&self, layout: &Layout, rng: &mut PolicyRng) -> u8 {
        rng.bernoulli(self.success_prob(layout))
    }

    /// Exhaustive argmax of [`Self::success_prob`] over all layouts; ties go
    /// to the lexicographically smallest. Errors if the arm count exceeds
    /// `cap`.
    pub fn true_best_capped(&self, cap: u64) -> Result<(Layout, f64)> {
        self.spec.arm_count_capped(cap)?;
        let mut best: Option<(Layout, f64)> = None;
        for layout in self.spec.layouts() {
            let p = self.success_prob(&layout);
            if best.as_ref().is_none_or(|(_, bp)| p > *bp) {
                best = Some((layout, p));
            }
        }
        best.ok_or_else(|| Error::config("empty arm space"))
    }

    pub fn true_best(&self) -> Result<(Layout, f64)> {
        self.true_best_capped(DEFAULT_ARM_CAP)
    }

    /// JSON document with spec, scale, controls, and weight tables keyed by
    /// sorted dimension subsets. Round-trips every weight bit-exactly.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SimulatorModel = serde_json::from_str(text)?;
        if model.controls.len() != model.order {
            return Err(Error::config("controls length does not match order"));
        }
        Ok(model)
    }
}

/// Standard normal CDF via the error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf::erf(x / std::f64::consts::SQRT_2))
}
