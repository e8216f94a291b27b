//! Unequal numbers of virtual users on the Gaussian channel.
//!
//! User `i` picks its own `L_i` and splits its power optimally for that count.
//! The receiver first decodes every user's first level, then always continues
//! with the user whose decoded power so far is smallest.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{DrsError, Result};
use crate::gaussian::{optimal_split, rate_allocation, GaussianChannel};
use crate::schedule::{check_counts, greedy_schedule, DecodingSchedule, StepRecord, VerificationReport, VirtualUserId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualUser {
    pub id: VirtualUserId,
    /// Transmit power in watts.
    pub power: f64,
    /// Rate in the channel's log base.
    pub rate: f64,
}

/// Virtual users of every real user, grouped by owner and ordered by index.
pub fn build_virtual_users(ch: &GaussianChannel, counts: &[usize]) -> Result<Vec<VirtualUser>> {
    check_counts(counts)?;
    ch.common_power()?;
    if counts.len() != ch.num_users() {
        return Err(DrsError::InvalidArgument(format!(
            "{} counts given for {} users",
            counts.len(),
            ch.num_users()
        )));
    }
    let mut users = Vec::with_capacity(counts.iter().sum());
    for (owner, &count) in counts.iter().enumerate() {
        let split = optimal_split(ch, count)?;
        let alloc = rate_allocation(ch, &split)?;
        for (k, (&power, &rate)) in split.levels().iter().zip(&alloc.rates).enumerate() {
            users.push(VirtualUser {
                id: VirtualUserId::new(owner + 1, k + 1),
                power,
                rate,
            });
        }
    }
    Ok(users)
}

/// Virtual users per owner, derived from a flat list.
fn counts_of(users: &[VirtualUser]) -> Vec<usize> {
    let owners = users.iter().map(|u| u.id.owner).max().unwrap_or(0);
    let mut counts = vec![0; owners];
    for u in users {
        counts[u.id.owner - 1] = counts[u.id.owner - 1].max(u.id.index);
    }
    counts
}

/// Looks up powers as `powers[owner - 1][index - 1]`.
fn power_table(users: &[VirtualUser]) -> Result<Vec<Vec<f64>>> {
    let counts = counts_of(users);
    let mut table: Vec<Vec<f64>> = counts.iter().map(|&c| vec![f64::NAN; c]).collect();
    for u in users {
        table[u.id.owner - 1][u.id.index - 1] = u.power;
    }
    if table.iter().flatten().any(|p| p.is_nan()) {
        return Err(DrsError::InvalidArgument(
            "virtual users must be numbered 1..L_i for every owner".into(),
        ));
    }
    Ok(table)
}

/// Cumulative decoded power used as a heap key.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DecodedPower(f64);

impl Eq for DecodedPower {}

impl PartialOrd for DecodedPower {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DecodedPower {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Decoding order: all first levels (ascending owner), then the owner with the
/// least decoded power goes next.
pub fn run_protocol1(users: &[VirtualUser]) -> Result<DecodingSchedule> {
    let powers = power_table(users)?;
    let counts: Vec<usize> = powers.iter().map(Vec::len).collect();
    Ok(greedy_schedule(
        &counts,
        |i| DecodedPower(powers[i][0]),
        |i, key, k| DecodedPower(key.0 + powers[i][k - 1]),
    ))
}

/// Compares, at every step, the interference a virtual user can tolerate at
/// its rate with the interference it actually faces.
///
/// The tolerance follows from the rate: `p / (e^{2r} − 1)` with `r` in nats,
/// which equals `M(P − Σ_{j<k} p_ij) − p_ik + N` under the protocol's rule.
/// The actual interference is `MP − (decoded power) − p_ik + N`, where
/// members of the parallel first stage do not count each other as decoded.
pub fn verify_schedule(
    users: &[VirtualUser],
    schedule: &DecodingSchedule,
    ch: &GaussianChannel,
) -> Result<VerificationReport> {
    let power = ch.common_power()?;
    let powers = power_table(users)?;
    let counts: Vec<usize> = powers.iter().map(Vec::len).collect();
    if counts.len() != ch.num_users() {
        return Err(DrsError::InvalidArgument(format!(
            "virtual users span {} owners but the channel has {} users",
            counts.len(),
            ch.num_users()
        )));
    }
    schedule.check_covers(&counts)?;

    let rates: std::collections::HashMap<VirtualUserId, f64> =
        users.iter().map(|u| (u.id, ch.log_base().to_nats(u.rate))).collect();
    let received = ch.num_users() as f64 * power + ch.noise();
    let parallel = schedule.parallel_stage_len();

    let mut decoded = 0.0;
    let mut steps = Vec::with_capacity(schedule.len());
    for (t, id) in schedule.order.iter().enumerate() {
        let p = powers[id.owner - 1][id.index - 1];
        let tolerance = p / (2.0 * rates[id]).exp_m1();
        let already = if t < parallel { 0.0 } else { decoded };
        let actual = received - already - p;
        steps.push(StepRecord {
            user: *id,
            tolerance,
            actual,
            slack: tolerance - actual,
        });
        if t + 1 == parallel {
            decoded = schedule.order[..parallel]
                .iter()
                .map(|v| powers[v.owner - 1][v.index - 1])
                .sum();
        } else if t >= parallel {
            decoded += p;
        }
    }
    Ok(VerificationReport::from_steps(steps))
}
