//! Unequal numbers of virtual users on a symmetric discrete memoryless channel.
//!
//! User `i` switches uniformly over its own `L_i` virtual users and assigns
//!
//! ```text
//! r_ik = (1/L_i) Σ_l C(M−1, l) ((k−1)/L_i)^l (1 − (k−1)/L_i)^{M−1−l} I_l
//! ```
//!
//! The receiver decodes every first virtual user, then keeps serving the user
//! with the smallest decoded fraction `s(i) = (decoded virtual users) / L_i`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dmc::{is_symmetric, DmcChannel, MutualInfoTable, SYMMETRY_TOLERANCE};
use crate::error::{DrsError, Result};
use crate::schedule::{check_counts, greedy_schedule, DecodingSchedule, StepRecord, VerificationReport, VirtualUserId};
use crate::units::LogBase;

/// Uniform switches with per-user counts and the resulting rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchSystem {
    pub counts: Vec<usize>,
    /// `rates[i][k]` is the rate of virtual user `(i+1)(k+1)`.
    pub rates: Vec<Vec<f64>>,
    pub base: LogBase,
}

impl SwitchSystem {
    pub fn num_users(&self) -> usize {
        self.counts.len()
    }

    /// Switch weight `1/L_i` of `user` (zero-based).
    pub fn weight(&self, user: usize) -> f64 {
        1.0 / self.counts[user] as f64
    }

    pub fn rate(&self, id: VirtualUserId) -> f64 {
        self.rates[id.owner - 1][id.index - 1]
    }

    pub fn user_totals(&self) -> Vec<f64> {
        self.rates.iter().map(|r| r.iter().sum()).collect()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `Σ_l C(n, l) β^l (1 − β)^{n−l} I_l`.
fn binomial_mixture(chain: &[f64], beta: f64) -> f64 {
    let n = chain.len() - 1;
    chain
        .iter()
        .enumerate()
        .map(|(l, info)| binomial(n, l) * beta.powi(l as i32) * (1.0 - beta).powi((n - l) as i32) * info)
        .sum()
}

/// Assigns rates with each user's own count in the binomial mixture.
pub fn protocol2_build(ch: &DmcChannel, counts: &[usize]) -> Result<SwitchSystem> {
    check_counts(counts)?;
    if counts.len() != ch.num_users() {
        return Err(DrsError::InvalidArgument(format!(
            "{} counts given for {} users",
            counts.len(),
            ch.num_users()
        )));
    }
    if !is_symmetric(ch, SYMMETRY_TOLERANCE) {
        return Err(DrsError::AsymmetricChannel);
    }
    let table = MutualInfoTable::new(ch);
    let rates = counts
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let chain = table.chain(i);
            (0..l)
                .map(|k| binomial_mixture(&chain, k as f64 / l as f64) / l as f64)
                .collect()
        })
        .collect();
    Ok(SwitchSystem {
        counts: counts.to_vec(),
        rates,
        base: ch.log_base(),
    })
}

/// Exact fraction `decoded / count`.
#[derive(Debug, Clone, Copy)]
struct Progress {
    decoded: u64,
    count: u64,
}

impl PartialEq for Progress {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Progress {}

impl PartialOrd for Progress {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Progress {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.decoded as u128 * other.count as u128).cmp(&(other.decoded as u128 * self.count as u128))
    }
}

/// Decoding order: all first virtual users, then the user with the least
/// decoded fraction (lowest id on ties).
pub fn run_protocol2(sys: &SwitchSystem) -> DecodingSchedule {
    let count = |i: usize| sys.counts[i] as u64;
    greedy_schedule(
        &sys.counts,
        |i| Progress { decoded: 1, count: count(i) },
        |i, key, _| Progress {
            decoded: key.decoded + 1,
            count: count(i),
        },
    )
}

/// Compares each virtual user's rate with the mutual information it sees
/// given the switches and every virtual user decoded before it.
///
/// Another user's input is known exactly when its switch points at one of
/// its already-decoded virtual users, which happens with probability
/// `s_j = decoded_j / L_j`. Members of the parallel first stage see nothing decoded.
pub fn verify_schedule_dmc(
    ch: &DmcChannel,
    sys: &SwitchSystem,
    schedule: &DecodingSchedule,
) -> Result<VerificationReport> {
    if sys.num_users() != ch.num_users() {
        return Err(DrsError::InvalidArgument(format!(
            "system has {} users but the channel has {}",
            sys.num_users(),
            ch.num_users()
        )));
    }
    schedule.check_covers(&sys.counts)?;
    let ch = ch.clone().with_log_base(sys.base);
    let table = MutualInfoTable::new(&ch);
    let parallel = schedule.parallel_stage_len();

    let mut decoded = vec![0usize; sys.num_users()];
    let mut fractions = vec![0.0; sys.num_users()];
    let mut steps = Vec::with_capacity(schedule.len());
    for (t, id) in schedule.order.iter().enumerate() {
        let i = id.owner - 1;
        let info = sys.weight(i) * table.expected_given(i, &fractions);
        let rate = sys.rate(*id);
        steps.push(StepRecord {
            user: *id,
            tolerance: info,
            actual: rate,
            slack: info - rate,
        });
        decoded[i] += 1;
        if t + 1 >= parallel {
            for (j, f) in fractions.iter_mut().enumerate() {
                *f = decoded[j] as f64 / sys.counts[j] as f64;
            }
        }
    }
    Ok(VerificationReport::from_steps(steps))
}
