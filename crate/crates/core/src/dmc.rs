//! Discrete memoryless multiple-access channels: exact mutual information,
//! channel assumptions and random-switch rate formulas.
//!
//! User `i` owns `L` virtual users and a switch `S_i` with `P(S_i = k) = λ_k`
//! selecting which of them it transmits. Virtual user `ik` is decoded knowing
//! every switch and every virtual user of the earlier classes, which gives
//!
//! ```text
//! r_ik = λ_k Σ_{S ⊆ −i} β^{|S|} (1 − β)^{M−1−|S|} I(X_i; Y, X_S),   β = Σ_{j<k} λ_j
//! ```
//!
//! On a symmetric channel the subset sum collapses to a binomial mixture of
//! `I_l = I(X_1; Y, X_2, …, X_{l+1})`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{DrsError, Result};
use crate::units::LogBase;

pub const MAX_USERS: usize = 16;

/// Tolerance on row and input-distribution sums.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Tolerance used when a routine needs to decide whether a channel is symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Probabilities below this are treated as zero.
const NEGLIGIBLE: f64 = 1e-300;

pub const CHANNEL_SCHEMA: &str = "drs-dmc-1";

/// Set of users as a bitmask; bit `i` is the zero-based user `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct UserSet(u32);

impl UserSet {
    pub const EMPTY: UserSet = UserSet(0);

    pub fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(user: usize) -> Self {
        Self(1 << user)
    }

    /// All users `0..m`.
    pub fn all(m: usize) -> Self {
        Self(((1u64 << m) - 1) as u32)
    }

    pub fn contains(self, user: usize) -> bool {
        self.0 >> user & 1 == 1
    }

    pub fn with(self, user: usize) -> Self {
        Self(self.0 | 1 << user)
    }

    pub fn without(self, user: usize) -> Self {
        Self(self.0 & !(1 << user))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_disjoint(self, other: UserSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: UserSet) -> Self {
        Self(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// Every subset of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = UserSet> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let current = next?;
            next = if current == full {
                None
            } else {
                Some((current.wrapping_sub(full)) & full)
            };
            Some(UserSet(current))
        })
    }
}

impl<I: IntoIterator<Item = usize>> From<I> for UserSet {
    fn from(users: I) -> Self {
        users.into_iter().fold(UserSet::EMPTY, UserSet::with)
    }
}

/// Channel law `W(y | x_1..x_M)` together with a fixed product input distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DmcChannel {
    alphabet_sizes: Vec<usize>,
    output_size: usize,
    /// One row per input tuple, row-major with user 1 as the most significant digit.
    w: Vec<Vec<f64>>,
    inputs: Vec<Vec<f64>>,
    log_base: LogBase,
}

fn check_distribution(what: &str, probs: &[f64]) -> Result<()> {
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p))) {
        return Err(DrsError::InvalidChannel(format!("{what}: probability {p} outside [0, 1]")));
    }
    let sum = exact_sum(probs.iter().copied());
    if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(DrsError::InvalidChannel(format!("{what}: sums to {sum}, not 1")));
    }
    Ok(())
}

/// Neumaier-compensated sum.
pub(crate) fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

impl DmcChannel {
    pub fn new(
        alphabet_sizes: Vec<usize>,
        output_size: usize,
        w: Vec<Vec<f64>>,
        inputs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let m = alphabet_sizes.len();
        if m == 0 || m > MAX_USERS {
            return Err(DrsError::InvalidChannel(format!(
                "between 1 and {MAX_USERS} users are supported, got {m}"
            )));
        }
        if alphabet_sizes.iter().any(|&a| a == 0) || output_size == 0 {
            return Err(DrsError::InvalidChannel("alphabets must be nonempty".into()));
        }
        let rows = alphabet_sizes
            .iter()
            .try_fold(1usize, |acc, &a| acc.checked_mul(a))
            .ok_or_else(|| DrsError::InvalidChannel("input alphabet product overflows".into()))?;
        if w.len() != rows {
            return Err(DrsError::InvalidChannel(format!(
                "W has {} rows, expected {rows} (one per input tuple)",
                w.len()
            )));
        }
        for (r, row) in w.iter().enumerate() {
            if row.len() != output_size {
                return Err(DrsError::InvalidChannel(format!(
                    "W row {r} has {} entries, expected {output_size}",
                    row.len()
                )));
            }
            check_distribution(&format!("W row {r}"), row)?;
        }
        if inputs.len() != m {
            return Err(DrsError::InvalidChannel(format!(
                "{} input distributions given for {m} users",
                inputs.len()
            )));
        }
        for (i, (dist, &size)) in inputs.iter().zip(&alphabet_sizes).enumerate() {
            if dist.len() != size {
                return Err(DrsError::InvalidChannel(format!(
                    "input distribution of user {} has {} entries, alphabet has {size}",
                    i + 1,
                    dist.len()
                )));
            }
            check_distribution(&format!("input distribution of user {}", i + 1), dist)?;
        }
        Ok(Self {
            alphabet_sizes,
            output_size,
            w,
            inputs,
            log_base: LogBase::Nat,
        })
    }

    /// Channel whose output is a deterministic function of the inputs.
    pub fn deterministic<F>(
        alphabet_sizes: Vec<usize>,
        output_size: usize,
        inputs: Vec<Vec<f64>>,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&[usize]) -> usize,
    {
        let rows: usize = alphabet_sizes.iter().product();
        let mut w = Vec::with_capacity(rows);
        let mut x = vec![0; alphabet_sizes.len()];
        for row in 0..rows {
            decode_tuple(row, &alphabet_sizes, &mut x);
            let y = f(&x);
            if y >= output_size {
                return Err(DrsError::InvalidChannel(format!(
                    "output {y} outside alphabet of size {output_size}"
                )));
            }
            let mut dist = vec![0.0; output_size];
            dist[y] = 1.0;
            w.push(dist);
        }
        Self::new(alphabet_sizes, output_size, w, inputs)
    }

    /// `Y = X_1 + … + X_M` over binary inputs with uniform distributions.
    pub fn binary_adder(users: usize) -> Result<Self> {
        Self::deterministic(vec![2; users], users + 1, vec![vec![0.5, 0.5]; users], |x| {
            x.iter().sum()
        })
    }

    /// `Y = X_1 ⊕ … ⊕ X_M` over binary inputs with uniform distributions.
    pub fn binary_xor(users: usize) -> Result<Self> {
        Self::deterministic(vec![2; users], 2, vec![vec![0.5, 0.5]; users], |x| {
            x.iter().sum::<usize>() % 2
        })
    }

    /// Built-in channels by name: `adder` or `xor`.
    pub fn preset(name: &str, users: usize) -> Result<Self> {
        match name {
            "adder" => Self::binary_adder(users),
            "xor" => Self::binary_xor(users),
            other => Err(DrsError::InvalidArgument(format!(
                "unknown preset `{other}` (expected adder or xor)"
            ))),
        }
    }

    pub fn with_log_base(mut self, log_base: LogBase) -> Self {
        self.log_base = log_base;
        self
    }

    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    pub fn num_users(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn transition_rows(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn input_distribution(&self, user: usize) -> &[f64] {
        &self.inputs[user]
    }

    pub fn all_users(&self) -> UserSet {
        UserSet::all(self.num_users())
    }

    /// Probability of the input tuple `x` under the product input distribution.
    pub fn tuple_probability(&self, x: &[usize]) -> f64 {
        x.iter().enumerate().map(|(i, &xi)| self.inputs[i][xi]).product()
    }

    /// Parses the JSON channel document (see the crate README for the schema).
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChannelDocument = serde_json::from_str(text)?;
        doc.into_channel()
    }

    pub fn to_json(&self) -> String {
        let doc = ChannelDocument {
            schema: Some(CHANNEL_SCHEMA.to_string()),
            alphabets: self.alphabet_sizes.clone(),
            output: self.output_size,
            w: self.w.clone(),
            inputs: self.inputs.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("channel document serializes")
    }
}

/// Writes the digits of `row` (row-major, user 1 most significant) into `x`.
pub(crate) fn decode_tuple(mut row: usize, sizes: &[usize], x: &mut [usize]) {
    for i in (0..sizes.len()).rev() {
        x[i] = row % sizes[i];
        row /= sizes[i];
    }
}

/// On-disk form of a [`DmcChannel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub alphabets: Vec<usize>,
    pub output: usize,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
}

impl ChannelDocument {
    pub fn into_channel(self) -> Result<DmcChannel> {
        if let Some(schema) = &self.schema {
            if schema != CHANNEL_SCHEMA {
                return Err(DrsError::InvalidChannel(format!(
                    "unsupported schema `{schema}` (expected `{CHANNEL_SCHEMA}`)"
                )));
            }
        }
        DmcChannel::new(self.alphabets, self.output, self.w, self.inputs)
    }
}

/// Mixed-radix index of the coordinates of `x` selected by `users`.
fn sub_index(x: &[usize], users: &[usize], sizes: &[usize]) -> usize {
    users.iter().fold(0, |acc, &u| acc * sizes[u] + x[u])
}

fn mutual_information_nats(ch: &DmcChannel, target: UserSet, given: UserSet) -> f64 {
    if target.is_empty() {
        return 0.0;
    }
    let sizes = &ch.alphabet_sizes;
    let s_users: Vec<usize> = target.iter().collect();
    let t_users: Vec<usize> = given.iter().collect();
    let s_card: usize = s_users.iter().map(|&u| sizes[u]).product();
    let t_card: usize = t_users.iter().map(|&u| sizes[u]).product();
    let ny = ch.output_size;

    // joint[(xs, xt, y)] = P(X_S = xs, X_T = xt, Y = y)
    let mut joint = vec![0.0; s_card * t_card * ny];
    let mut p_s = vec![0.0; s_card];
    let mut x = vec![0; sizes.len()];
    for (row, law) in ch.w.iter().enumerate() {
        decode_tuple(row, sizes, &mut x);
        let p = ch.tuple_probability(&x);
        if p <= NEGLIGIBLE {
            continue;
        }
        let xs = sub_index(&x, &s_users, sizes);
        let xt = sub_index(&x, &t_users, sizes);
        let base = (xs * t_card + xt) * ny;
        for (y, &wy) in law.iter().enumerate() {
            joint[base + y] += p * wy;
        }
    }
    for (xs, slot) in p_s.iter_mut().enumerate() {
        let mut rest = xs;
        let mut prob = 1.0;
        for &u in s_users.iter().rev() {
            prob *= ch.inputs[u][rest % sizes[u]];
            rest /= sizes[u];
        }
        *slot = prob;
    }

    // P(X_T = xt, Y = y)
    let mut p_ty = vec![0.0; t_card * ny];
    for xs in 0..s_card {
        for xt in 0..t_card {
            for y in 0..ny {
                p_ty[xt * ny + y] += joint[(xs * t_card + xt) * ny + y];
            }
        }
    }

    let mut info = 0.0;
    for xs in 0..s_card {
        for xt in 0..t_card {
            for y in 0..ny {
                let q = joint[(xs * t_card + xt) * ny + y];
                if q > NEGLIGIBLE {
                    info += q * (q / (p_s[xs] * p_ty[xt * ny + y])).ln();
                }
            }
        }
    }
    info.max(0.0)
}

fn check_users(ch: &DmcChannel, set: UserSet) -> Result<()> {
    if set.bits() >> ch.num_users() != 0 {
        return Err(DrsError::InvalidArgument(format!(
            "user set {:#b} refers to users beyond the channel's {}",
            set.bits(),
            ch.num_users()
        )));
    }
    Ok(())
}

/// `I(X_S; Y, X_T)` by exact summation over the joint distribution.
///
/// Inputs are independent, so this also equals `I(X_S; Y | X_T)`.
pub fn mutual_information(ch: &DmcChannel, target: UserSet, given: UserSet) -> Result<f64> {
    check_users(ch, target)?;
    check_users(ch, given)?;
    if !target.is_disjoint(given) {
        return Err(DrsError::InvalidArgument(
            "target and conditioning sets must be disjoint".into(),
        ));
    }
    Ok(ch.log_base.from_nats(mutual_information_nats(ch, target, given)))
}

/// Outcome of [`check_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `I(X_S; Y | X_{S^c})` depends on `S` only through `|S|`.
    pub symmetric: bool,
    /// `I(X_S; Y) < I(X_S; Y | X_T)` for all disjoint nonempty `S`, `T`.
    pub strict_gain: bool,
    /// Largest spread of `I(X_S; Y | X_{S^c})` within one cardinality.
    pub symmetry_gap: f64,
    /// Smallest `I(X_S; Y | X_T) − I(X_S; Y)` over disjoint nonempty pairs
    /// (infinite for a single user).
    pub min_gain: f64,
}

/// Largest spread of `I(X_S; Y | X_{S^c})` within one cardinality.
fn symmetry_gap(ch: &DmcChannel) -> f64 {
    let all = ch.all_users();
    let mut by_size: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for s in all.subsets().filter(|s| !s.is_empty()) {
        let rest = UserSet::from_bits(all.bits() & !s.bits());
        let v = mutual_information_nats(ch, s, rest);
        let entry = by_size.entry(s.len()).or_insert((f64::INFINITY, f64::NEG_INFINITY));
        entry.0 = entry.0.min(v);
        entry.1 = entry.1.max(v);
    }
    let gap = by_size.values().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
    ch.log_base.from_nats(gap)
}

pub fn is_symmetric(ch: &DmcChannel, tol: f64) -> bool {
    symmetry_gap(ch) <= tol
}

/// Checks the symmetry condition and the strict conditioning gain.
pub fn check_assumptions(ch: &DmcChannel, tol: f64) -> AssumptionReport {
    let gap = symmetry_gap(ch);
    let all = ch.all_users();
    let mut min_gain = f64::INFINITY;
    for s in all.subsets().filter(|s| !s.is_empty()) {
        let alone = mutual_information_nats(ch, s, UserSet::EMPTY);
        let others = UserSet::from_bits(all.bits() & !s.bits());
        for t in others.subsets().filter(|t| !t.is_empty()) {
            let gain = mutual_information_nats(ch, s, t) - alone;
            min_gain = min_gain.min(gain);
        }
    }
    let min_gain = if min_gain.is_finite() {
        ch.log_base.from_nats(min_gain)
    } else {
        min_gain
    };
    AssumptionReport {
        symmetric: gap <= tol,
        strict_gain: min_gain > tol,
        symmetry_gap: gap,
        min_gain,
    }
}

/// Switch probabilities `λ_1..λ_L`, shared by every user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchDistribution {
    weights: Vec<f64>,
}

impl SwitchDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(DrsError::InvalidSwitch("at least one virtual user is required".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(DrsError::InvalidSwitch(format!("weight {w} is negative or not finite")));
        }
        let sum = exact_sum(weights.iter().copied());
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(DrsError::InvalidSwitch(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// `λ_k = 1/L`.
    pub fn uniform(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(DrsError::ZeroLevels);
        }
        Self::new(vec![1.0 / levels as f64; levels])
    }

    /// `λ_k ∝ ratio^{k−1}`, `0 < ratio < 1`.
    pub fn geometric(levels: usize, ratio: f64) -> Result<Self> {
        if levels == 0 {
            return Err(DrsError::ZeroLevels);
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(DrsError::InvalidSwitch(format!("ratio must lie in (0, 1), got {ratio}")));
        }
        let norm = (1.0 - ratio) / (1.0 - ratio.powi(levels as i32));
        Self::new((0..levels).map(|k| norm * ratio.powi(k as i32)).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `β_{k−1} = Σ_{j<k} λ_j` for every `k`, i.e. the probability that a
    /// switch has already moved past position `k`'s predecessors.
    pub fn preceding_mass(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.weights
            .iter()
            .map(|w| {
                let before = acc;
                acc += w;
                before.min(1.0)
            })
            .collect()
    }

    /// Replaces `λ_L` with `(α λ_L, (1 − α) λ_L)`.
    pub fn refine_last(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(DrsError::InvalidSwitch(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let mut weights = self.weights.clone();
        let last = weights.pop().expect("validated nonempty");
        weights.push(alpha * last);
        weights.push((1.0 - alpha) * last);
        Self::new(weights)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Probability that exactly `l` of `n` independent switches have a mark
/// below the current position, each with probability `beta`.
fn binomial_weight(n: usize, l: usize, beta: f64) -> f64 {
    binomial(n, l) * beta.powi(l as i32) * (1.0 - beta).powi((n - l) as i32)
}

/// `I(X_i; Y, X_S)` for every user `i` and every `S ⊆ −i`, in the channel's base.
#[derive(Debug, Clone, PartialEq)]
pub struct MutualInfoTable {
    num_users: usize,
    /// `per_user[i][S.bits()]`; entries with bit `i` set are unused.
    per_user: Vec<Vec<f64>>,
    joint: f64,
    base: LogBase,
}

impl MutualInfoTable {
    pub fn new(ch: &DmcChannel) -> Self {
        let m = ch.num_users();
        let all = ch.all_users();
        let per_user = (0..m)
            .map(|i| {
                let mut row = vec![0.0; 1 << m];
                for s in all.without(i).subsets() {
                    row[s.bits() as usize] =
                        ch.log_base.from_nats(mutual_information_nats(ch, UserSet::singleton(i), s));
                }
                row
            })
            .collect();
        let joint = ch.log_base.from_nats(mutual_information_nats(ch, all, UserSet::EMPTY));
        Self {
            num_users: m,
            per_user,
            joint,
            base: ch.log_base,
        }
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn base(&self) -> LogBase {
        self.base
    }

    /// `I(X_user; Y, X_S)`.
    pub fn given(&self, user: usize, others: UserSet) -> f64 {
        debug_assert!(!others.contains(user));
        self.per_user[user][others.bits() as usize]
    }

    /// `I(X_1, …, X_M; Y)`.
    pub fn joint(&self) -> f64 {
        self.joint
    }

    fn others(&self, user: usize) -> UserSet {
        UserSet::all(self.num_users).without(user)
    }

    /// `I_l = I(X_user; Y, X_{first l other users})` for `l = 0..M−1`.
    pub fn chain(&self, user: usize) -> Vec<f64> {
        let others: Vec<usize> = self.others(user).iter().collect();
        (0..self.num_users)
            .map(|l| self.given(user, UserSet::from(others[..l].iter().copied())))
            .collect()
    }

    /// Expected information of a virtual user of `user` when each other user
    /// `j` has independently had its active virtual user decoded with
    /// probability `decoded[j]`:
    /// `Σ_{S ⊆ −i} Π_{j∈S} s_j Π_{j∉S} (1 − s_j) I(X_i; Y, X_S)`.
    pub fn expected_given(&self, user: usize, decoded: &[f64]) -> f64 {
        self.others(user)
            .subsets()
            .map(|s| {
                let weight: f64 = self
                    .others(user)
                    .iter()
                    .map(|j| if s.contains(j) { decoded[j] } else { 1.0 - decoded[j] })
                    .product();
                weight * self.given(user, s)
            })
            .sum()
    }

    /// Subset-weighted switch rates, valid for any channel.
    pub fn switch_rates_general(&self, switch: &SwitchDistribution, user: usize) -> Vec<f64> {
        let mut decoded = vec![0.0; self.num_users];
        switch
            .weights()
            .iter()
            .zip(switch.preceding_mass())
            .map(|(&lambda, beta)| {
                decoded.iter_mut().for_each(|d| *d = beta);
                lambda * self.expected_given(user, &decoded)
            })
            .collect()
    }

    /// Binomial-mixture switch rates; equal to the general form on symmetric channels.
    pub fn switch_rates_symmetric(&self, switch: &SwitchDistribution, user: usize) -> Vec<f64> {
        let chain = self.chain(user);
        let n = self.num_users - 1;
        switch
            .weights()
            .iter()
            .zip(switch.preceding_mass())
            .map(|(&lambda, beta)| {
                lambda
                    * chain
                        .iter()
                        .enumerate()
                        .map(|(l, info)| binomial_weight(n, l, beta) * info)
                        .sum::<f64>()
            })
            .collect()
    }

    /// `lim Σ_k r_ik` for switches with vanishing weights:
    /// `(1/M) Σ_{j=0}^{M−1} C(M−1, j)^{−1} Σ_{|S|=j, S ⊆ −i} I(X_i; Y, X_S)`.
    pub fn limit_rate(&self, user: usize) -> f64 {
        let m = self.num_users;
        let n = m - 1;
        self.others(user)
            .subsets()
            .map(|s| self.given(user, s) / (m as f64 * binomial(n, s.len())))
            .sum()
    }
}

/// Rates `r_{X_ik}` of `user`'s virtual users when every user switches with `switch`.
///
/// Symmetric channels use the binomial mixture; others use the subset-weighted form.
pub fn switch_rates(ch: &DmcChannel, switch: &SwitchDistribution, user: usize) -> Result<Vec<f64>> {
    if user >= ch.num_users() {
        return Err(DrsError::InvalidArgument(format!(
            "user index {user} out of range for {} users",
            ch.num_users()
        )));
    }
    let table = MutualInfoTable::new(ch);
    if is_symmetric(ch, SYMMETRY_TOLERANCE) {
        Ok(table.switch_rates_symmetric(switch, user))
    } else {
        Ok(table.switch_rates_general(switch, user))
    }
}

/// Mixture coefficients `c_l = Σ_k λ_k C(M−1, l) β_{k−1}^l (1 − β_{k−1})^{M−1−l}`,
/// so that a user's total on a symmetric channel is `Σ_l c_l I_l`.
pub fn mixture_coefficients(switch: &SwitchDistribution, users: usize) -> Vec<f64> {
    let n = users.saturating_sub(1);
    let mut coeffs = vec![0.0; n + 1];
    for (lambda, beta) in switch.weights().iter().zip(switch.preceding_mass()) {
        for (l, c) in coeffs.iter_mut().enumerate() {
            *c += lambda * binomial_weight(n, l, beta);
        }
    }
    coeffs
}

/// Per-user limits of the total rate as the switch weights vanish.
///
/// A symmetric channel gives `(1/M) I(X_1..X_M; Y)` to everyone; otherwise each
/// user gets its subset-averaged share, and the shares still sum to the
/// joint mutual information.
pub fn limit_rates(ch: &DmcChannel) -> Vec<f64> {
    let table = MutualInfoTable::new(ch);
    let m = ch.num_users();
    if is_symmetric(ch, SYMMETRY_TOLERANCE) {
        vec![table.joint() / m as f64; m]
    } else {
        (0..m).map(|i| table.limit_rate(i)).collect()
    }
}

fn require_two_users(ch: &DmcChannel) -> Result<()> {
    if ch.num_users() == 2 {
        Ok(())
    } else {
        Err(DrsError::InvalidArgument(format!(
            "two users required, channel has {}",
            ch.num_users()
        )))
    }
}

/// Exact gap `(1/2L)(I(X_1; Y, X_2) − I(X_1; Y))` between the limit and the
/// uniform-switch total of a two-user channel.
pub fn two_user_error_term(ch: &DmcChannel, levels: usize) -> Result<f64> {
    require_two_users(ch)?;
    if levels == 0 {
        return Err(DrsError::ZeroLevels);
    }
    let a = mutual_information(ch, UserSet::singleton(0), UserSet::singleton(1))?;
    let b = mutual_information(ch, UserSet::singleton(0), UserSet::EMPTY)?;
    Ok((a - b) / (2.0 * levels as f64))
}

/// Measured gap between the limit and the total rate of `user` under the
/// uniform switch with `levels` positions.
pub fn uniform_switch_error(ch: &DmcChannel, levels: usize, user: usize) -> Result<f64> {
    let switch = SwitchDistribution::uniform(levels)?;
    let total: f64 = switch_rates(ch, &switch, user)?.iter().sum();
    Ok(limit_rates(ch)[user] - total)
}

/// Upper bound `Mα/L` on the uniform-switch error of a symmetric channel, with
/// `α = max_l C(M−1, l) (l/(M−1))^l (1 − l/(M−1))^{M−1−l} I_l`.
pub fn uniform_bound(ch: &DmcChannel, levels: usize) -> Result<f64> {
    if levels == 0 {
        return Err(DrsError::ZeroLevels);
    }
    let table = MutualInfoTable::new(ch);
    let m = ch.num_users();
    let n = m - 1;
    let alpha = table
        .chain(0)
        .iter()
        .enumerate()
        .map(|(l, info)| {
            let peak = if n == 0 { 1.0 } else { binomial_weight(n, l, l as f64 / n as f64) };
            peak * info
        })
        .fold(0.0, f64::max);
    Ok(m as f64 * alpha / levels as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn adder() -> DmcChannel {
        DmcChannel::binary_adder(2).unwrap().with_log_base(LogBase::Bit)
    }

    fn s(users: &[usize]) -> UserSet {
        UserSet::from(users.iter().copied())
    }

    #[test]
    fn user_set_subsets() {
        let set = s(&[0, 2, 3]);
        let subsets: Vec<_> = set.subsets().collect();
        assert_eq!(subsets.len(), 8);
        assert!(subsets.iter().all(|x| x.bits() & !set.bits() == 0));
        assert_eq!(UserSet::EMPTY.subsets().count(), 1);
        assert_eq!(UserSet::all(3).len(), 3);
        assert_eq!(set.iter().collect::<Vec<_>>(), vec![0, 2, 3]);
    }

    #[test]
    fn adder_information() {
        let ch = adder();
        let i0 = mutual_information(&ch, s(&[0]), UserSet::EMPTY).unwrap();
        let i1 = mutual_information(&ch, s(&[0]), s(&[1])).unwrap();
        let joint = mutual_information(&ch, s(&[0, 1]), UserSet::EMPTY).unwrap();
        assert_abs_diff_eq!(i0, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(i1, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(joint, 1.5, epsilon = 1e-15);
        assert_eq!(mutual_information(&ch, UserSet::EMPTY, s(&[1])).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_sets_rejected() {
        assert!(mutual_information(&adder(), s(&[0]), s(&[0, 1])).is_err());
        assert!(mutual_information(&adder(), s(&[2]), UserSet::EMPTY).is_err());
    }

    #[test]
    fn channel_validation() {
        let bad_row = vec![vec![0.5, 0.6], vec![1.0, 0.0]];
        assert!(DmcChannel::new(vec![2], 2, bad_row, vec![vec![0.5, 0.5]]).is_err());
        let ok_rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(DmcChannel::new(vec![2], 2, ok_rows.clone(), vec![vec![0.7, 0.2]]).is_err());
        assert!(DmcChannel::new(vec![2], 2, ok_rows.clone(), vec![vec![1.2, -0.2]]).is_err());
        assert!(DmcChannel::new(vec![3], 2, ok_rows.clone(), vec![vec![0.5, 0.5]]).is_err());
        assert!(DmcChannel::new(vec![2], 2, ok_rows, vec![vec![0.5, 0.5]]).is_ok());
        assert!(DmcChannel::new(vec![], 1, vec![], vec![]).is_err());
    }

    #[test]
    fn assumptions_of_standard_channels() {
        let report = check_assumptions(&adder(), 1e-9);
        assert!(report.symmetric && report.strict_gain);

        let xor = DmcChannel::binary_xor(2).unwrap().with_log_base(LogBase::Bit);
        let report = check_assumptions(&xor, 1e-9);
        assert!(report.symmetric && report.strict_gain);
        assert_abs_diff_eq!(mutual_information(&xor, s(&[0]), UserSet::EMPTY).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mutual_information(&xor, s(&[0]), s(&[1])).unwrap(), 1.0, epsilon = 1e-15);

        let copy = DmcChannel::deterministic(vec![2, 2], 2, vec![vec![0.5, 0.5]; 2], |x| x[0]).unwrap();
        let report = check_assumptions(&copy, 1e-9);
        assert!(!report.strict_gain);
        assert!(!report.symmetric);
    }

    #[test]
    fn two_user_switch_rates() {
        let ch = adder();
        let half = SwitchDistribution::uniform(2).unwrap();
        let rates = switch_rates(&ch, &half, 0).unwrap();
        assert_abs_diff_eq!(rates[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(rates[1], 0.375, epsilon = 1e-15);

        let single = SwitchDistribution::uniform(1).unwrap();
        assert_abs_diff_eq!(switch_rates(&ch, &single, 1).unwrap()[0], 0.5, epsilon = 1e-15);

        for lambda in [0.1, 0.3, 0.8] {
            let sw = SwitchDistribution::new(vec![lambda, 1.0 - lambda]).unwrap();
            let r = switch_rates(&ch, &sw, 0).unwrap();
            assert_abs_diff_eq!(r[0], lambda * 0.5, epsilon = 1e-15);
            let expected = (1.0 - lambda) * (lambda * 1.0 + (1.0 - lambda) * 0.5);
            assert_abs_diff_eq!(r[1], expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn switch_validation() {
        assert!(SwitchDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(SwitchDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(SwitchDistribution::new(vec![]).is_err());
        assert!(SwitchDistribution::uniform(0).is_err());
        assert!(SwitchDistribution::uniform(10_000).is_ok());
        assert!(SwitchDistribution::geometric(50, 0.9).is_ok());
    }

    #[test]
    fn limits() {
        for l in limit_rates(&adder()) {
            assert_abs_diff_eq!(l, 0.75, epsilon = 1e-15);
        }
        let single = DmcChannel::binary_adder(1).unwrap();
        let info = mutual_information(&single, s(&[0]), UserSet::EMPTY).unwrap();
        assert_abs_diff_eq!(limit_rates(&single)[0], info, epsilon = 1e-15);
    }

    #[test]
    fn two_user_error_examples() {
        assert_abs_diff_eq!(two_user_error_term(&adder(), 2).unwrap(), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(two_user_error_term(&adder(), 1).unwrap(), 0.25, epsilon = 1e-15);
        assert!(two_user_error_term(&adder(), 1_000_000).unwrap() < 1e-6);
        let three = DmcChannel::binary_adder(3).unwrap();
        assert!(two_user_error_term(&three, 2).is_err());
    }

    #[test]
    fn uniform_bound_examples() {
        let ch = adder();
        assert_abs_diff_eq!(uniform_bound(&ch, 2).unwrap(), 1.0, epsilon = 1e-15);
        let measured = uniform_switch_error(&ch, 2, 0).unwrap();
        assert_abs_diff_eq!(measured, 0.125, epsilon = 1e-15);
        assert!(uniform_bound(&ch, 1 << 30).unwrap() < 1e-8);

        let three = DmcChannel::binary_adder(3).unwrap().with_log_base(LogBase::Bit);
        let err = uniform_switch_error(&three, 10, 0).unwrap();
        assert!(err >= 0.0 && err <= uniform_bound(&three, 10).unwrap());
    }

    #[test]
    fn refine_last_gain_closed_form() {
        let ch = adder();
        let table = MutualInfoTable::new(&ch);
        let gap = table.given(0, s(&[1])) - table.given(0, UserSet::EMPTY);
        let sw = SwitchDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        for alpha in [0.1, 0.5, 0.9] {
            let finer = sw.refine_last(alpha).unwrap();
            let before: f64 = table.switch_rates_symmetric(&sw, 0).iter().sum();
            let after: f64 = table.switch_rates_symmetric(&finer, 0).iter().sum();
            let expected = alpha * (1.0 - alpha) * 0.25 * gap;
            assert_abs_diff_eq!(after - before, expected, epsilon = 1e-12);
            assert!(after > before);
        }
    }

    #[test]
    fn json_round_trip() {
        let ch = DmcChannel::binary_adder(2).unwrap();
        let text = ch.to_json();
        assert!(text.contains("\"schema\": \"drs-dmc-1\""));
        assert_eq!(DmcChannel::from_json(&text).unwrap(), ch);
    }

    #[test]
    fn json_without_schema_is_accepted() {
        let text = r#"{"alphabets":[2,2],"output":3,
            "W":[[1,0,0],[0,1,0],[0,1,0],[0,0,1]],
            "inputs":[[0.5,0.5],[0.5,0.5]]}"#;
        let ch = DmcChannel::from_json(text).unwrap();
        assert_eq!(ch, DmcChannel::binary_adder(2).unwrap());
    }

    #[test]
    fn json_rejects_other_schemas_and_fields() {
        let wrong = r#"{"schema":"drs-dmc-2","alphabets":[1],"output":1,"W":[[1]],"inputs":[[1]]}"#;
        assert!(matches!(DmcChannel::from_json(wrong), Err(DrsError::InvalidChannel(_))));
        let extra = r#"{"alphabets":[1],"output":1,"W":[[1]],"inputs":[[1]],"noise":2}"#;
        assert!(matches!(DmcChannel::from_json(extra), Err(DrsError::Parse(_))));
    }
}
