//! Power/rate splitting over the Gaussian multiple-access channel.
//!
//! Every real user superimposes `L` virtual users (levels). Level `k` is decoded
//! after all levels `< k` of every user, so it sees the undecoded power of all
//! users plus noise as interference. Rates are computed in nats and converted
//! to the channel's [`LogBase`] on output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DrsError, Result};
use crate::units::LogBase;

/// Relative tolerance used when checking that split levels sum to the owner's power.
pub const SPLIT_SUM_TOLERANCE: f64 = 1e-9;

/// An `M`-user Gaussian MAC: per-user transmit powers and receiver noise variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianChannel {
    powers: Vec<f64>,
    noise: f64,
    #[serde(default)]
    log_base: LogBase,
}

impl GaussianChannel {
    /// Channel where all `num_users` transmitters share the same power.
    pub fn symmetric(num_users: usize, power: f64, noise: f64) -> Result<Self> {
        Self::new(vec![power; num_users], noise)
    }

    pub fn new(powers: Vec<f64>, noise: f64) -> Result<Self> {
        if powers.is_empty() {
            return Err(DrsError::InvalidChannel("at least one user is required".into()));
        }
        if !(noise.is_finite() && noise > 0.0) {
            return Err(DrsError::InvalidChannel(format!(
                "noise variance must be positive and finite, got {noise}"
            )));
        }
        if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(DrsError::InvalidChannel(format!(
                "powers must be nonnegative and finite, got {p}"
            )));
        }
        Ok(Self {
            powers,
            noise,
            log_base: LogBase::Nat,
        })
    }

    pub fn with_log_base(mut self, log_base: LogBase) -> Self {
        self.log_base = log_base;
        self
    }

    pub fn num_users(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        let first = self.powers[0];
        self.powers.iter().all(|&p| p == first)
    }

    /// The shared per-user power `P` of a symmetric channel.
    pub fn common_power(&self) -> Result<f64> {
        if self.is_symmetric() {
            Ok(self.powers[0])
        } else {
            Err(DrsError::AsymmetricPowers)
        }
    }

    /// `A = 1 + ΣP_j / N`; equals `1 + MP/N` in the symmetric case.
    pub fn snr_factor(&self) -> f64 {
        1.0 + self.total_power() / self.noise
    }

    /// Ratio between the total undecoded power of all users and the undecoded
    /// power of `owner`, when every user splits with the same fractions.
    fn interference_multiplier(&self, owner: usize) -> f64 {
        if self.is_symmetric() {
            self.num_users() as f64
        } else {
            self.total_power() / self.powers[owner]
        }
    }

    fn owner_power(&self, owner: usize) -> Result<f64> {
        self.powers.get(owner).copied().ok_or_else(|| {
            DrsError::InvalidArgument(format!(
                "user index {owner} out of range for {} users",
                self.num_users()
            ))
        })
    }
}

/// Levels `p_1..p_L` that one real user assigns to its virtual users.
///
/// Levels are ordered by decoding position: `p_1` is decoded first and faces
/// the most interference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    /// Zero-based index of the real user owning these levels.
    pub owner: usize,
    levels: Vec<f64>,
}

impl PowerSplit {
    /// Validates that every level is positive and that the levels sum to `power`.
    pub fn new(owner: usize, levels: Vec<f64>, power: f64) -> Result<Self> {
        if levels.is_empty() {
            return Err(DrsError::ZeroLevels);
        }
        if let Some(p) = levels.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(DrsError::InvalidSplit(format!(
                "every level must be positive and finite, got {p}"
            )));
        }
        let sum: f64 = levels.iter().sum();
        if (sum - power).abs() > SPLIT_SUM_TOLERANCE * power {
            return Err(DrsError::InvalidSplit(format!(
                "levels sum to {sum}, expected {power}"
            )));
        }
        Ok(Self { owner, levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.levels.iter().sum()
    }

    /// `γ_k = p_k / Σp`.
    pub fn fractions(&self) -> Vec<f64> {
        let total = self.total();
        self.levels.iter().map(|p| p / total).collect()
    }

    /// `β_k = Σ_{j≤k} p_j`, one entry per level.
    pub fn cumulative(&self) -> Vec<f64> {
        self.levels
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

/// Per-level rates and SIRs for one real user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateAllocation {
    /// `r_k = ½ log(1 + SIR_k)`, in `base`.
    pub rates: Vec<f64>,
    pub sirs: Vec<f64>,
    pub total: f64,
    pub base: LogBase,
}

/// Error of the optimal `L`-level split relative to the maximum equal rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub levels: usize,
    pub achieved: f64,
    pub target: f64,
    /// `e[L] = target − achieved`.
    pub error: f64,
    /// `L · e[L]`.
    pub scaled_error: f64,
}

fn check_levels(levels: usize) -> Result<()> {
    if levels == 0 {
        Err(DrsError::ZeroLevels)
    } else {
        Ok(())
    }
}

/// Maximum common rate `R* = (1/2M) log(1 + MP/N)` of a symmetric channel.
pub fn max_equal_rate(ch: &GaussianChannel) -> Result<f64> {
    ch.common_power()?;
    Ok(ch.log_base.from_nats(max_equal_rate_nats(ch)))
}

fn max_equal_rate_nats(ch: &GaussianChannel) -> f64 {
    ch.snr_factor().ln() / (2.0 * ch.num_users() as f64)
}

/// SIR shared by every level of the optimal split:
/// `(A^{1/L} − 1) / ((M − 1) A^{1/L} + 1)`.
pub fn common_sir(ch: &GaussianChannel, levels: usize) -> Result<f64> {
    ch.common_power()?;
    check_levels(levels)?;
    let m = ch.num_users() as f64;
    let growth = (ch.snr_factor().ln() / levels as f64).exp_m1();
    Ok(growth / ((m - 1.0) * (growth + 1.0) + 1.0))
}

/// Fractions `γ_k = (N/S) a^{(L−k)/L} (a^{1/L} − 1)` with `a = 1 + S/N`, where
/// `S` is the total power of all users.
fn optimal_fractions(total_power: f64, noise: f64, levels: usize) -> Vec<f64> {
    let ln_a = (total_power / noise).ln_1p();
    let l = levels as f64;
    let step = (ln_a / l).exp_m1();
    (1..=levels)
        .map(|k| noise / total_power * (ln_a * (l - k as f64) / l).exp() * step)
        .collect()
}

fn positive_total_power(ch: &GaussianChannel) -> Result<f64> {
    let total = ch.total_power();
    if total > 0.0 {
        Ok(total)
    } else {
        Err(DrsError::InvalidSplit(
            "cannot split zero power into positive levels".into(),
        ))
    }
}

/// The unique throughput-maximizing split of a symmetric channel:
/// `p_k = (N/M) A^{(L−k)/L} (A^{1/L} − 1)`.
pub fn optimal_split(ch: &GaussianChannel, levels: usize) -> Result<PowerSplit> {
    let power = ch.common_power()?;
    check_levels(levels)?;
    let total = positive_total_power(ch)?;
    let split = optimal_fractions(total, ch.noise, levels)
        .into_iter()
        .map(|g| g * power)
        .collect();
    PowerSplit::new(0, split, power)
}

/// Equal-SIR levels stacked above a bottom level of power `last`.
///
/// The bottom level fixes the common SIR `s`; each level above it then sees
/// `M · (power below) + N` of interference, which pins its power to
/// `s (M·below + N) / (1 − (M − 1)s)`. Returned top-down (decoding order).
fn stack_equal_sir(last: f64, users: f64, noise: f64, levels: usize) -> Vec<f64> {
    let sir = last / ((users - 1.0) * last + noise);
    let gain = sir / (1.0 - (users - 1.0) * sir);
    let mut stack = Vec::with_capacity(levels);
    let mut below = 0.0;
    for k in 0..levels {
        let p = if k == 0 { last } else { gain * (users * below + noise) };
        below += p;
        stack.push(p);
    }
    stack.reverse();
    stack
}

/// Equal-SIR split found by bisection on the last level's power.
///
/// Independent of the closed form: for a trial last level the equal-SIR
/// condition determines every level above it, and the trial is bisected until
/// the levels exhaust the user's power. Terminates when the bracket is
/// narrower than `tol · P` (or can no longer be halved).
pub fn recursive_split(ch: &GaussianChannel, levels: usize, tol: f64) -> Result<PowerSplit> {
    let power = ch.common_power()?;
    check_levels(levels)?;
    positive_total_power(ch)?;
    if !(tol > 0.0) {
        return Err(DrsError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if levels == 1 {
        return PowerSplit::new(0, vec![power], power);
    }
    let users = ch.num_users() as f64;
    let noise = ch.noise;
    let excess = |last: f64| -> f64 {
        stack_equal_sir(last, users, noise, levels).iter().sum::<f64>() - power
    };

    let guard = 1e-15 * power;
    let (mut lo, mut hi) = (guard, power - (levels as f64 - 1.0) * guard);
    let (f_lo, f_hi) = (excess(lo), excess(hi));
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(DrsError::Bracketing { lo, hi, f_lo, f_hi });
    }
    while hi - lo >= tol * power {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let mut split = stack_equal_sir(0.5 * (lo + hi), users, noise, levels);
    // The first level absorbs whatever the bisection left over so power is conserved exactly.
    let rest: f64 = split[1..].iter().sum();
    split[0] = power - rest;
    PowerSplit::new(0, split, power)
}

/// Rates and SIRs of an arbitrary split for its owner.
///
/// All users are assumed to split with the same fractions as `split`, so level
/// `k` faces `S (1 − β_{k−1}/P_i) − p_k + N` of interference plus noise; this
/// is `MP − MΣ_{j<k}p_j − p_k + N` on a symmetric channel.
pub fn rate_allocation(ch: &GaussianChannel, split: &PowerSplit) -> Result<RateAllocation> {
    let owner_power = ch.owner_power(split.owner)?;
    let sum = split.total();
    if owner_power <= 0.0 || (sum - owner_power).abs() > SPLIT_SUM_TOLERANCE * owner_power {
        return Err(DrsError::InvalidSplit(format!(
            "levels sum to {sum} but user {} has power {owner_power}",
            split.owner + 1
        )));
    }
    let multiplier = ch.interference_multiplier(split.owner);
    let levels = split.levels();

    // Undecoded power of the owner at each level, as suffix sums.
    let mut remaining = vec![0.0; levels.len()];
    let mut acc = 0.0;
    for k in (0..levels.len()).rev() {
        acc += levels[k];
        remaining[k] = acc;
    }

    let mut sirs = Vec::with_capacity(levels.len());
    let mut rates = Vec::with_capacity(levels.len());
    for (p, rest) in levels.iter().zip(&remaining) {
        let denominator = multiplier * rest - p + ch.noise;
        assert!(denominator > 0.0, "interference plus noise must stay positive");
        let sir = p / denominator;
        sirs.push(sir);
        rates.push(ch.log_base.from_nats(0.5 * sir.ln_1p()));
    }
    let total = rates.iter().sum();
    Ok(RateAllocation {
        rates,
        sirs,
        total,
        base: ch.log_base,
    })
}

/// Divides the last level into two at the throughput-maximizing point, leaving
/// every other level unchanged.
///
/// The last level of every user leaves `A' = M p_L + N` at the receiver; the
/// first half takes `A' p_L / (A' + √(A' N))`.
pub fn split_last(ch: &GaussianChannel, split: &PowerSplit) -> Result<PowerSplit> {
    let power = ch.common_power()?;
    let last = *split.levels().last().ok_or(DrsError::ZeroLevels)?;
    let headroom = ch.num_users() as f64 * last + ch.noise;
    let first = headroom * last / (headroom + (headroom * ch.noise).sqrt());
    let second = last - first;

    let mut levels = split.levels()[..split.len() - 1].to_vec();
    levels.push(first);
    levels.push(second);
    PowerSplit::new(split.owner, levels, power)
}

/// Total rate of the optimal `L`-level split in nats:
/// `(L/2) log(M / (M − 1 + A^{−1/L}))`.
fn optimal_total_nats(users: f64, ln_a: f64, levels: usize) -> f64 {
    let l = levels as f64;
    -0.5 * l * ((-ln_a / l).exp_m1() / users).ln_1p()
}

/// `lim L·e[L] = (M − 1)(log A)² / (4M²)`.
pub fn limit_constant(ch: &GaussianChannel) -> Result<f64> {
    ch.common_power()?;
    let m = ch.num_users() as f64;
    let ln_a = ch.snr_factor().ln();
    // Squared log: converting to bits needs the factor twice.
    let nats = (m - 1.0) * ln_a * ln_a / (4.0 * m * m);
    Ok(ch.log_base.from_nats(ch.log_base.from_nats(nats)))
}

pub fn convergence_record(ch: &GaussianChannel, levels: usize) -> Result<ConvergenceRecord> {
    ch.common_power()?;
    check_levels(levels)?;
    let m = ch.num_users() as f64;
    let ln_a = ch.snr_factor().ln();
    let target = ln_a / (2.0 * m);
    let achieved = optimal_total_nats(m, ln_a, levels);
    let error = target - achieved;
    let base = ch.log_base;
    Ok(ConvergenceRecord {
        levels,
        achieved: base.from_nats(achieved),
        target: base.from_nats(target),
        error: base.from_nats(error),
        scaled_error: base.from_nats(levels as f64 * error),
    })
}

/// Convergence records of the optimal split for `L = 1..=l_max`.
pub fn error_curve(ch: &GaussianChannel, l_max: usize) -> Result<Vec<ConvergenceRecord>> {
    check_levels(l_max)?;
    (1..=l_max).map(|l| convergence_record(ch, l)).collect()
}

/// Rules generating an `L`-level split for every `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitFamily {
    Optimal,
    /// `p_k = P / L`.
    Uniform,
    /// The first level keeps `head_fraction · P` for every `L`; the rest is
    /// spread evenly. Its largest level never vanishes.
    HeavyHead { head_fraction: f64 },
}

impl SplitFamily {
    pub fn levels(&self, ch: &GaussianChannel, levels: usize) -> Result<Vec<f64>> {
        let power = ch.common_power()?;
        check_levels(levels)?;
        match *self {
            SplitFamily::Optimal => Ok(optimal_split(ch, levels)?.levels),
            SplitFamily::Uniform => Ok(vec![power / levels as f64; levels]),
            SplitFamily::HeavyHead { head_fraction } => {
                if !(head_fraction > 0.0 && head_fraction < 1.0) {
                    return Err(DrsError::InvalidArgument(format!(
                        "head fraction must lie in (0, 1), got {head_fraction}"
                    )));
                }
                if levels == 1 {
                    return Ok(vec![power]);
                }
                let tail = (1.0 - head_fraction) * power / (levels - 1) as f64;
                let mut split = vec![tail; levels];
                split[0] = head_fraction * power;
                Ok(split)
            }
        }
    }
}

/// Per-user totals for `L = 1..=l_max` of the splits produced by `family`.
///
/// Every produced split is validated; a family whose levels do not sum to the
/// user's power is rejected.
pub fn general_split_limit_check<F>(ch: &GaussianChannel, family: F, l_max: usize) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    let power = ch.common_power()?;
    check_levels(l_max)?;
    (1..=l_max)
        .into_par_iter()
        .map(|l| {
            let split = PowerSplit::new(0, family(l)?, power)?;
            Ok(rate_allocation(ch, &split)?.total)
        })
        .collect()
}

pub fn family_totals(ch: &GaussianChannel, family: SplitFamily, l_max: usize) -> Result<Vec<f64>> {
    general_split_limit_check(ch, |l| family.levels(ch, l), l_max)
}

/// One row of a throughput-versus-levels sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub levels: usize,
    pub total: f64,
    pub r_star: f64,
    pub error: f64,
    pub scaled_error: f64,
}

/// Per-user throughput of `family` for each `L` in `l_min..=l_max`, ordered by `L`.
pub fn sweep(
    ch: &GaussianChannel,
    family: SplitFamily,
    l_min: usize,
    l_max: usize,
) -> Result<Vec<SweepRow>> {
    check_levels(l_min)?;
    if l_max < l_min {
        return Err(DrsError::InvalidArgument(format!(
            "l-max ({l_max}) must not be below l-min ({l_min})"
        )));
    }
    let r_star = max_equal_rate(ch)?;
    (l_min..=l_max)
        .into_par_iter()
        .map(|l| {
            let total = match family {
                SplitFamily::Optimal => convergence_record(ch, l)?.achieved,
                _ => {
                    let split = PowerSplit::new(0, family.levels(ch, l)?, ch.common_power()?)?;
                    rate_allocation(ch, &split)?.total
                }
            };
            let error = r_star - total;
            Ok(SweepRow {
                levels: l,
                total,
                r_star,
                error,
                scaled_error: l as f64 * error,
            })
        })
        .collect()
}

/// Common fractions `γ_k` maximizing every user's throughput when powers differ.
pub fn asymmetric_fractions(ch: &GaussianChannel, levels: usize) -> Result<Vec<f64>> {
    check_levels(levels)?;
    let total = positive_total_power(ch)?;
    Ok(optimal_fractions(total, ch.noise, levels))
}

/// One split per user: user `i` transmits `γ_k P_i` on level `k`.
pub fn asymmetric_split(ch: &GaussianChannel, levels: usize) -> Result<Vec<PowerSplit>> {
    let fractions = asymmetric_fractions(ch, levels)?;
    ch.powers
        .iter()
        .enumerate()
        .map(|(owner, &p)| {
            if p <= 0.0 {
                return Err(DrsError::InvalidSplit(format!(
                    "user {} has zero power and cannot be split",
                    owner + 1
                )));
            }
            PowerSplit::new(owner, fractions.iter().map(|g| g * p).collect(), p)
        })
        .collect()
}

/// Limit of each user's total rate as `L → ∞`:
/// `P_i / (2ΣP_j) · log(1 + ΣP_j / N)`, a point on the dominant face.
pub fn asymmetric_limit_rates(ch: &GaussianChannel) -> Vec<f64> {
    let total = ch.total_power();
    if total == 0.0 {
        return vec![0.0; ch.num_users()];
    }
    let sum_capacity = 0.5 * (total / ch.noise).ln_1p();
    ch.powers
        .iter()
        .map(|p| ch.log_base.from_nats(p / total * sum_capacity))
        .collect()
}
