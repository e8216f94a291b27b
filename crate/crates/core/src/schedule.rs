//! Decoding orders shared by both protocols, the greedy scheduler that
//! produces them and the per-step verification record.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DrsError, Result};

/// A step passes verification when its slack is at least `-SLACK_TOLERANCE`.
pub const SLACK_TOLERANCE: f64 = 1e-12;

/// Label `ik` of the `k`-th virtual user of real user `i`. Both fields are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VirtualUserId {
    pub owner: usize,
    pub index: usize,
}

impl VirtualUserId {
    pub fn new(owner: usize, index: usize) -> Self {
        Self { owner, index }
    }
}

impl fmt::Display for VirtualUserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.owner < 10 && self.index < 10 {
            write!(f, "{}{}", self.owner, self.index)
        } else {
            write!(f, "{}.{}", self.owner, self.index)
        }
    }
}

impl std::str::FromStr for VirtualUserId {
    type Err = DrsError;

    /// Parses `ik` (single digits) or `i.k`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || DrsError::InvalidSchedule(format!("cannot parse virtual user `{s}`"));
        let (owner, index) = match s.split_once('.') {
            Some(parts) => parts,
            None if s.len() == 2 && s.is_ascii() => s.split_at(1),
            None => return Err(bad()),
        };
        let owner = owner.parse().map_err(|_| bad())?;
        let index = index.parse().map_err(|_| bad())?;
        Ok(Self::new(owner, index))
    }
}

/// Order in which the receiver decodes virtual users.
///
/// The leading run of index-1 entries is decoded in parallel: each of them
/// treats every other virtual user as interference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodingSchedule {
    pub order: Vec<VirtualUserId>,
}

impl DecodingSchedule {
    pub fn new(order: Vec<VirtualUserId>) -> Self {
        Self { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Number of leading entries that form the parallel first stage.
    pub fn parallel_stage_len(&self) -> usize {
        self.order.iter().take_while(|id| id.index == 1).count()
    }

    /// Checks that every virtual user of `counts` appears exactly once.
    pub fn check_covers(&self, counts: &[usize]) -> Result<()> {
        let expected: usize = counts.iter().sum();
        let mut seen = HashSet::with_capacity(self.order.len());
        for id in &self.order {
            let valid = id.owner >= 1
                && id.owner <= counts.len()
                && id.index >= 1
                && id.index <= counts[id.owner - 1];
            if !valid {
                return Err(DrsError::InvalidSchedule(format!("unknown virtual user {id}")));
            }
            if !seen.insert(*id) {
                return Err(DrsError::InvalidSchedule(format!("virtual user {id} decoded twice")));
            }
        }
        if seen.len() != expected {
            return Err(DrsError::InvalidSchedule(format!(
                "schedule decodes {} of {expected} virtual users",
                seen.len()
            )));
        }
        Ok(())
    }

    /// Parses comma-separated labels such as `11,21,22`.
    pub fn parse_labels(text: &str) -> Result<Self> {
        text.split(',')
            .map(|t| t.trim().parse())
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Comma-separated labels, e.g. `11,21,22`.
    pub fn labels(&self) -> String {
        self.order
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Greedy scheduler common to both protocols.
///
/// Decodes every owner's first virtual user, then repeatedly picks the owner
/// whose progress key is smallest (lowest owner id on ties), decodes its next
/// virtual user and advances its key. `initial(i)` is owner `i`'s key after its
/// first virtual user; `advance(i, key, k)` returns the key after virtual user
/// `k` (1-based) of owner `i` has been decoded.
pub(crate) fn greedy_schedule<K, I, A>(counts: &[usize], initial: I, advance: A) -> DecodingSchedule
where
    K: Ord,
    I: Fn(usize) -> K,
    A: Fn(usize, K, usize) -> K,
{
    let mut order: Vec<VirtualUserId> = (0..counts.len()).map(|i| VirtualUserId::new(i + 1, 1)).collect();
    let mut next = vec![2usize; counts.len()];
    let mut heap = BinaryHeap::new();
    for (i, &count) in counts.iter().enumerate() {
        if count > 1 {
            heap.push(Reverse((initial(i), i)));
        }
    }
    while let Some(Reverse((key, i))) = heap.pop() {
        let k = next[i];
        order.push(VirtualUserId::new(i + 1, k));
        next[i] += 1;
        if k < counts[i] {
            heap.push(Reverse((advance(i, key, k), i)));
        }
    }
    DecodingSchedule { order }
}

/// Feasibility of one decoding step.
///
/// For the Gaussian channel `tolerance` and `actual` are interference-plus-noise
/// powers; for the discrete channel they are the mutual information available
/// to the virtual user and the rate it demands. In both cases
/// `slack = tolerance − actual`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub user: VirtualUserId,
    pub tolerance: f64,
    pub actual: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub steps: Vec<StepRecord>,
    pub min_slack: f64,
    pub passed: bool,
    /// Position in the schedule of the first step with negative slack.
    pub first_failure: Option<usize>,
}

impl VerificationReport {
    pub fn from_steps(steps: Vec<StepRecord>) -> Self {
        let min_slack = steps.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);
        let first_failure = steps.iter().position(|s| s.slack < -SLACK_TOLERANCE);
        Self {
            steps,
            min_slack,
            passed: first_failure.is_none(),
            first_failure,
        }
    }

    pub fn failing_step(&self) -> Option<&StepRecord> {
        self.first_failure.map(|i| &self.steps[i])
    }
}

/// Rejects empty count vectors and zero counts.
pub(crate) fn check_counts(counts: &[usize]) -> Result<()> {
    if counts.is_empty() {
        return Err(DrsError::InvalidArgument("at least one count is required".into()));
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(DrsError::ZeroCount);
    }
    Ok(())
}
