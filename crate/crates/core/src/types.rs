//! Domain types: the arm space, full and partial assignments, and
//! Beta-Bernoulli tallies.
//!
//! Dimensions are 1-based (`1..=D`) and choices are 1-based (`1..=N_d`)
//! throughout the public API, matching the usual "choice 3 of dimension 2"
//! reading of a layout.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::Error;
use crate::Result;

/// Default cap on the total number of arms a component may enumerate.
pub const DEFAULT_ARM_CAP: u64 = 1_000_000;

/// The arm space: `D` dimensions, each with a discrete set of choices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    sizes: Vec<u32>,
}

impl DimensionSpec {
    /// Build a spec from per-dimension choice counts. Requires `D >= 1` and
    /// every count `>= 2`.
    pub fn new(sizes: Vec<u32>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::spec("need at least one dimension"));
        }
        if let Some((d, &n)) = sizes.iter().enumerate().find(|(_, &n)| n < 2) {
            return Err(Error::spec(format!(
                "dimension {} has {} choices; need at least 2",
                d + 1,
                n
            )));
        }
        Ok(DimensionSpec { sizes })
    }

    /// The common case: `dims` dimensions with `choices` options each.
    pub fn uniform(dims: usize, choices: u32) -> Result<Self> {
        Self::new(vec![choices; dims])
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    /// Choice count for a 1-based dimension index.
    pub fn choices(&self, dim: usize) -> u32 {
        self.sizes[dim - 1]
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Total arm count as a checked product.
    pub fn arm_count(&self) -> u128 {
        self.sizes.iter().map(|&n| n as u128).product()
    }

    /// Total arm count, or an error if it exceeds `cap`.
    pub fn arm_count_capped(&self, cap: u64) -> Result<u64> {
        let arms = self.arm_count();
        if arms > cap as u128 {
            Err(Error::ArmCapExceeded { arms, cap })
        } else {
            Ok(arms as u64)
        }
    }

    /// Iterate all layouts in lexicographic order. Intended for small arm
    /// spaces; callers should check [`Self::arm_count_capped`] first.
    pub fn layouts(&self) -> LayoutIter<'_> {
        LayoutIter {
            spec: self,
            next: Some(Layout(vec![1; self.sizes.len()])),
        }
    }

    pub fn validate_layout(&self, layout: &Layout) -> Result<()> {
        if layout.0.len() != self.dims() {
            return Err(Error::spec(format!(
                "layout has {} entries; spec has {} dimensions",
                layout.0.len(),
                self.dims()
            )));
        }
        for (i, &c) in layout.0.iter().enumerate() {
            if c < 1 || c > self.sizes[i] {
                return Err(Error::spec(format!(
                    "choice {} out of range 1..={} for dimension {}",
                    c,
                    self.sizes[i],
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn validate_pair(&self, dim: usize, choice: u32) -> Result<()> {
        if dim < 1 || dim > self.dims() {
            return Err(Error::spec(format!(
                "dimension {} out of range 1..={}",
                dim,
                self.dims()
            )));
        }
        if choice < 1 || choice > self.sizes[dim - 1] {
            return Err(Error::spec(format!(
                "choice {} out of range 1..={} for dimension {}",
                choice,
                self.sizes[dim - 1],
                dim
            )));
        }
        Ok(())
    }
}

/// Lexicographic iterator over all full layouts of a spec.
pub struct LayoutIter<'a> {
    spec: &'a DimensionSpec,
    next: Option<Layout>,
}

impl Iterator for LayoutIter<'_> {
    type Item = Layout;

    fn next(&mut self) -> Option<Layout> {
        let current = self.next.clone()?;
        // Advance like an odometer, last dimension fastest.
        let mut succ = current.clone();
        let mut i = succ.0.len();
        loop {
            if i == 0 {
                self.next = None;
                break;
            }
            i -= 1;
            if succ.0[i] < self.spec.sizes[i] {
                succ.0[i] += 1;
                self.next = Some(succ);
                break;
            }
            succ.0[i] = 1;
        }
        Some(current)
    }
}

/// A fully specified arm: one choice per dimension. Entry `i` (0-based) holds
/// the choice for dimension `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Layout(pub Vec<u32>);

impl Layout {
    /// Choice for a 1-based dimension index.
    pub fn choice(&self, dim: usize) -> u32 {
        self.0[dim - 1]
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

type Entries = SmallVec<[(u16, u32); 6]>;

/// An unordered set of `(dimension, choice)` pairs; the key of all posterior
/// state. Entries are kept sorted by dimension so that two assignments with
/// the same pairs compare equal and hash identically regardless of insertion
/// order. Sizes 0 (root) through D (full layout) are all valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssignment {
    entries: Entries,
}

impl PartialAssignment {
    /// The root key: no dimension fixed.
    pub fn root() -> Self {
        PartialAssignment::default()
    }

    /// Build from `(dim, choice)` pairs in any order. Fails if a dimension
    /// appears twice.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Result<Self> {
        let mut pa = PartialAssignment::root();
        for (d, c) in pairs {
            pa.insert(d, c)?;
        }
        Ok(pa)
    }

    /// The full size-D key for a layout.
    pub fn full(layout: &Layout) -> Self {
        let entries: Entries = layout
            .0
            .iter()
            .enumerate()
            .map(|(i, &c)| ((i + 1) as u16, c))
            .collect();
        PartialAssignment { entries }
    }

    /// Add a pair; errors if the dimension is already present.
    pub fn insert(&mut self, dim: usize, choice: u32) -> Result<()> {
        let d = u16::try_from(dim).map_err(|_| Error::spec("dimension index too large"))?;
        match self.entries.binary_search_by_key(&d, |e| e.0) {
            Ok(_) => Err(Error::spec(format!("dimension {dim} appears twice"))),
            Err(pos) => {
                self.entries.insert(pos, (d, choice));
                Ok(())
            }
        }
    }

    /// Insert or overwrite the choice for a dimension.
    pub fn set(&mut self, dim: usize, choice: u32) {
        let d = dim as u16;
        match self.entries.binary_search_by_key(&d, |e| e.0) {
            Ok(pos) => self.entries[pos].1 = choice,
            Err(pos) => self.entries.insert(pos, (d, choice)),
        }
    }

    pub fn remove(&mut self, dim: usize) {
        if let Ok(pos) = self.entries.binary_search_by_key(&(dim as u16), |e| e.0) {
            self.entries.remove(pos);
        }
    }

    /// A copy with one more (or overwritten) pair.
    pub fn with(&self, dim: usize, choice: u32) -> Self {
        let mut pa = self.clone();
        pa.set(dim, choice);
        pa
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_dim(&self, dim: usize) -> bool {
        self.entries
            .binary_search_by_key(&(dim as u16), |e| e.0)
            .is_ok()
    }

    /// Pairs in dimension order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.entries.iter().map(|&(d, c)| (d as usize, c))
    }

    pub fn validate(&self, spec: &DimensionSpec) -> Result<()> {
        for (d, c) in self.iter() {
            spec.validate_pair(d, c)?;
        }
        Ok(())
    }
}

/// Success/failure tallies for one stored key.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaCounts {
    pub alpha: u64,
    pub beta: u64,
}

impl BetaCounts {
    pub fn new(alpha: u64, beta: u64) -> Self {
        BetaCounts { alpha, beta }
    }

    pub fn observe(&mut self, reward: u8) {
        if reward == 1 {
            self.alpha += 1;
        } else {
            self.beta += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.alpha + self.beta
    }
}

/// Beta prior hyperparameters; defaults to the uniform Beta(1, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub alpha0: f64,
    pub beta0: f64,
}

impl Default for Prior {
    fn default() -> Self {
        Prior {
            alpha0: 1.0,
            beta0: 1.0,
        }
    }
}

impl Prior {
    pub fn new(alpha0: f64, beta0: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && beta0 > 0.0) {
            return Err(Error::config(format!(
                "prior parameters must be positive, got ({alpha0}, {beta0})"
            )));
        }
        Ok(Prior { alpha0, beta0 })
    }
}

/// One observed play: step index, the arm played, and its binary reward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardRecord {
    pub step: u64,
    pub layout: Layout,
    pub reward: u8,
}

impl RewardRecord {
    pub fn new(step: u64, layout: Layout, reward: u8) -> Result<Self> {
        if reward > 1 {
            return Err(Error::spec(format!("reward must be 0 or 1, got {reward}")));
        }
        Ok(RewardRecord {
            step,
            layout,
            reward,
        })
    }
}
