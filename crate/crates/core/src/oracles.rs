//! Brute-force references for the closed forms.
//!
//! Nothing here calls into the solvers it checks: SIRs, switch totals and
//! mutual information are recomputed from their definitions.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmc::{decode_tuple, DmcChannel, SwitchDistribution, UserSet};
use crate::error::{DrsError, Result};
use crate::gaussian::{GaussianChannel, PowerSplit};

/// Largest number of levels or switch positions a grid search accepts.
pub const MAX_GRID_LEVELS: usize = 3;

/// Visits every composition of `rest` into `parts` parts (each at least
/// `min`), appended to `prefix`, keeping the best score seen in `best`.
fn scan<F>(rest: usize, parts: usize, min: usize, prefix: &mut Vec<usize>, score: &F, best: &mut (Vec<usize>, f64))
where
    F: Fn(&[usize]) -> f64,
{
    if parts == 1 {
        if rest >= min {
            prefix.push(rest);
            let value = score(prefix);
            if value > best.1 {
                *best = (prefix.clone(), value);
            }
            prefix.pop();
        }
        return;
    }
    let reserve = min * (parts - 1);
    if rest < reserve + min {
        return;
    }
    for j in min..=rest - reserve {
        prefix.push(j);
        scan(rest - j, parts - 1, min, prefix, score, best);
        prefix.pop();
    }
}

/// Parallel exhaustive argmax over compositions of `n` into `parts` parts,
/// positive unless `allow_zero`.
///
/// Ties go to the lexicographically smallest composition, so the result does
/// not depend on thread scheduling.
fn grid_argmax<F>(n: usize, parts: usize, allow_zero: bool, score: F) -> (Vec<usize>, f64)
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let min = usize::from(!allow_zero);
    let better = |a: (Vec<usize>, f64), b: (Vec<usize>, f64)| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    };
    (min..=n)
        .into_par_iter()
        .map(|first| {
            let mut best = (Vec::new(), f64::NEG_INFINITY);
            let mut prefix = vec![first];
            if parts == 1 {
                if first == n {
                    best = (prefix.clone(), score(&prefix));
                }
            } else {
                scan(n - first, parts - 1, min, &mut prefix, &score, &mut best);
            }
            best
        })
        .reduce(|| (Vec::new(), f64::NEG_INFINITY), better)
}

/// Product of `1 + SIR_k` when every user splits its power as `levels`.
fn gaussian_objective(users: f64, noise: f64, levels: &[f64]) -> f64 {
    let mut undecoded: f64 = levels.iter().sum();
    let mut product = 1.0;
    for &p in levels {
        product *= level_factor(users, noise, p, undecoded - p);
        undecoded -= p;
    }
    product
}

/// `1 + SIR` of a level of power `p` with `below` of the user's power still undecoded beneath it.
#[inline]
fn level_factor(users: f64, noise: f64, p: f64, below: f64) -> f64 {
    1.0 + p / (users * (p + below) - p + noise)
}

/// Best split of `units` grid steps into `parts ≤ 2` positive levels, scanned
/// in lexicographic order so the first maximum wins. `bottom[u]` is the factor
/// of a last level holding `u` steps.
fn best_tail(users: f64, noise: f64, step: f64, bottom: &[f64], units: usize, parts: usize) -> (Vec<usize>, f64) {
    match parts {
        1 => (vec![units], bottom[units]),
        _ => {
            // Score of the first tail level times the bottom factor is
            // `received · bottom[units − j] / (received − a_j)`; compare the
            // ratios by cross-multiplication.
            let received = users * units as f64 * step + noise;
            let (mut best_j, mut best_num, mut best_den) = (0, f64::NEG_INFINITY, 1.0);
            for j in 1..units {
                let num = bottom[units - j];
                let den = received - j as f64 * step;
                if num * best_den > best_num * den {
                    (best_j, best_num, best_den) = (j, num, den);
                }
            }
            (vec![best_j, units - best_j], received * best_num / best_den)
        }
    }
}

/// Best `L`-level split on the grid `p_k ∈ (P/n)·{1, 2, …}` with `n = ⌈P / resolution⌉`.
///
/// Every grid point is scored; the first level is spread over threads and
/// ties go to the lexicographically smallest point.
pub fn grid_optimal_split(ch: &GaussianChannel, levels: usize, resolution: f64) -> Result<PowerSplit> {
    let power = ch.common_power()?;
    if levels == 0 {
        return Err(DrsError::ZeroLevels);
    }
    if levels > MAX_GRID_LEVELS {
        return Err(DrsError::InvalidArgument(format!(
            "grid search supports at most {MAX_GRID_LEVELS} levels"
        )));
    }
    if !(resolution > 0.0 && resolution <= 1e-3 * power) {
        return Err(DrsError::InvalidArgument(format!(
            "resolution must lie in (0, 1e-3·P], got {resolution}"
        )));
    }
    if levels == 1 {
        return PowerSplit::new(0, vec![power], power);
    }
    let n = (power / resolution).ceil() as usize;
    let step = power / n as f64;
    let users = ch.num_users() as f64;
    let noise = ch.noise();
    let bottom: Vec<f64> = (0..=n).map(|u| level_factor(users, noise, u as f64 * step, 0.0)).collect();
    let better = |a: (Vec<usize>, f64), b: (Vec<usize>, f64)| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    };
    let (point, _) = (1..n)
        .into_par_iter()
        .filter(|&first| n - first >= levels - 1)
        .map(|first| {
            let head = level_factor(users, noise, first as f64 * step, (n - first) as f64 * step);
            let (tail, value) = best_tail(users, noise, step, &bottom, n - first, levels - 1);
            let mut point = vec![first];
            point.extend(tail);
            (point, head * value)
        })
        .reduce(|| (Vec::new(), f64::NEG_INFINITY), better);
    let mut split: Vec<f64> = point.iter().map(|&x| x as f64 * step).collect();
    let rest: f64 = split[1..].iter().sum();
    split[0] = power - rest;
    PowerSplit::new(0, split, power)
}

/// Per-user total of the grid split in nats, recomputed from the SIRs.
pub fn grid_split_total(ch: &GaussianChannel, split: &PowerSplit) -> f64 {
    0.5 * gaussian_objective(ch.num_users() as f64, ch.noise(), split.levels()).ln()
}

/// `½ ln(1 + x)` as `∫_0^x dt / (2(1 + t))` by composite Simpson quadrature.
pub fn rate_by_quadrature(snr: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) / 2 * 2;
    let h = snr / n as f64;
    let f = |t: f64| 0.5 / (1.0 + t);
    let inner: f64 = (1..n)
        .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h))
        .sum();
    h / 3.0 * (f(0.0) + inner + f(snr))
}

/// Result of a switch grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchSearch {
    pub best: SwitchDistribution,
    /// Per-user total of `best`, in the channel's base.
    pub best_total: f64,
    /// Per-user total of the exact uniform switch of the same length.
    pub uniform_total: f64,
    /// `best_total − uniform_total`.
    pub gain: f64,
}

/// Per-user total of a switch on a symmetric channel, from the definition:
/// virtual user `k` sees each other user's input with probability `Σ_{j<k} λ_j`.
fn switch_total(chain: &[f64], weights: &[f64]) -> f64 {
    let others = chain.len() - 1;
    let mut before = 0.0;
    let mut total = 0.0;
    for &lambda in weights {
        // Distribution of the number of other users already known.
        let mut known = vec![0.0; others + 1];
        known[0] = 1.0;
        for _ in 0..others {
            for l in (0..=others).rev() {
                let stay = known[l] * (1.0 - before);
                let moved = if l > 0 { known[l - 1] * before } else { 0.0 };
                known[l] = stay + moved;
            }
        }
        total += lambda * known.iter().zip(chain).map(|(p, i)| p * i).sum::<f64>();
        before += lambda;
    }
    total
}

/// Best switch on the grid `λ_k ∈ {0, 1/n, …, 1}` with `n = round(1 / resolution)`.
pub fn grid_optimal_switch(ch: &DmcChannel, levels: usize, resolution: f64) -> Result<SwitchSearch> {
    if levels == 0 {
        return Err(DrsError::ZeroLevels);
    }
    if levels > MAX_GRID_LEVELS {
        return Err(DrsError::InvalidArgument(format!(
            "grid search supports at most {MAX_GRID_LEVELS} switch positions"
        )));
    }
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(DrsError::InvalidArgument(format!(
            "resolution must lie in (0, 0.5], got {resolution}"
        )));
    }
    let m = ch.num_users();
    let chain: Vec<f64> = (0..m)
        .map(|l| mi_entropy_oracle(ch, UserSet::singleton(0), UserSet::from(1..=l)))
        .collect::<Result<_>>()?;
    let n = (1.0 / resolution).round() as usize;
    let (point, best_total) = grid_argmax(n, levels, true, |j| {
        let weights: Vec<f64> = j.iter().map(|&x| x as f64 / n as f64).collect();
        switch_total(&chain, &weights)
    });
    let weights: Vec<f64> = point.iter().map(|&x| x as f64 / n as f64).collect();
    let uniform_total = switch_total(&chain, &vec![1.0 / levels as f64; levels]);
    Ok(SwitchSearch {
        best: SwitchDistribution::new(weights)?,
        best_total,
        uniform_total,
        gain: best_total - uniform_total,
    })
}

fn entropy<K: Eq + Hash>(dist: &HashMap<K, f64>) -> f64 {
    dist.values().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// `I(X_S; Y, X_T) = H(X_S) + H(Y, X_T) − H(Y, X_S, X_T)`, each entropy taken
/// from a marginal accumulated over the full joint distribution.
pub fn mi_entropy_oracle(ch: &DmcChannel, target: UserSet, given: UserSet) -> Result<f64> {
    let m = ch.num_users();
    if (target.union(given)).bits() >> m != 0 {
        return Err(DrsError::InvalidArgument("user set exceeds the channel's users".into()));
    }
    if !target.is_disjoint(given) {
        return Err(DrsError::InvalidArgument(
            "target and conditioning sets must be disjoint".into(),
        ));
    }
    let sizes = ch.alphabet_sizes();
    let pick = |x: &[usize], set: UserSet| -> Vec<usize> { set.iter().map(|u| x[u]).collect() };

    let mut h_s: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut h_yt: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
    let mut h_yst: HashMap<(usize, Vec<usize>, Vec<usize>), f64> = HashMap::new();
    let mut x = vec![0; m];
    for (row, law) in ch.transition_rows().iter().enumerate() {
        decode_tuple(row, sizes, &mut x);
        let px = ch.tuple_probability(&x);
        if px == 0.0 {
            continue;
        }
        let xs = pick(&x, target);
        let xt = pick(&x, given);
        for (y, &w) in law.iter().enumerate() {
            let p = px * w;
            if p == 0.0 {
                continue;
            }
            *h_s.entry(xs.clone()).or_default() += p;
            *h_yt.entry((y, xt.clone())).or_default() += p;
            *h_yst.entry((y, xs.clone(), xt.clone())).or_default() += p;
        }
    }
    let nats = entropy(&h_s) + entropy(&h_yt) - entropy(&h_yst);
    Ok(ch.log_base().from_nats(nats.max(0.0)))
}
