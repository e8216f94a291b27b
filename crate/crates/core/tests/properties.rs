//! Invariants of the Gaussian and discrete-channel formulas over random inputs.

use drs_core::dmc::{
    self, mixture_coefficients, mutual_information, switch_rates, DmcChannel, MutualInfoTable, SwitchDistribution,
    UserSet,
};
use drs_core::gaussian::{
    common_sir, max_equal_rate, optimal_split, rate_allocation, recursive_split, split_last, GaussianChannel,
    PowerSplit,
};
use drs_core::oracles::mi_entropy_oracle;
use drs_core::LogBase;
use proptest::prelude::*;

fn symmetric_channel() -> impl Strategy<Value = GaussianChannel> {
    (2usize..=8, 0.01f64..100.0, 0.01f64..10.0).prop_map(|(m, p, n)| GaussianChannel::symmetric(m, p, n).unwrap())
}

/// Positive weights normalized to a probability vector.
fn probability_vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

/// Random channels with at most three users and alphabets of at most four letters.
fn small_dmc() -> impl Strategy<Value = DmcChannel> {
    (prop::collection::vec(1usize..=4, 1..=3), 1usize..=4).prop_flat_map(|(alphabets, output)| {
        let rows: usize = alphabets.iter().product();
        let inputs: Vec<_> = alphabets.iter().map(|&a| probability_vector(a)).collect();
        (
            Just(alphabets),
            Just(output),
            prop::collection::vec(probability_vector(output), rows),
            inputs,
        )
            .prop_map(|(a, o, w, i)| DmcChannel::new(a, o, w, i).unwrap())
    })
}

fn symmetric_dmc() -> impl Strategy<Value = DmcChannel> {
    (2usize..=4, any::<bool>()).prop_map(|(m, adder)| {
        let ch = if adder { DmcChannel::binary_adder(m) } else { DmcChannel::binary_xor(m) };
        ch.unwrap().with_log_base(LogBase::Bit)
    })
}

fn every_pair(m: usize) -> Vec<(UserSet, UserSet)> {
    let all = UserSet::all(m);
    let mut pairs = Vec::new();
    for s in all.subsets() {
        let rest = UserSet::from_bits(all.bits() & !s.bits());
        for t in rest.subsets() {
            pairs.push((s, t));
        }
    }
    pairs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn optimal_split_has_equal_sirs(ch in symmetric_channel(), levels in 1usize..=64) {
        let split = optimal_split(&ch, levels).unwrap();
        let expected = common_sir(&ch, levels).unwrap();
        for sir in rate_allocation(&ch, &split).unwrap().sirs {
            prop_assert!((sir - expected).abs() < 1e-9, "{sir} vs {expected}");
        }
    }

    #[test]
    fn optimal_split_conserves_power(ch in symmetric_channel(), levels in 1usize..=64) {
        let split = optimal_split(&ch, levels).unwrap();
        let p = ch.common_power().unwrap();
        prop_assert!(split.levels().iter().all(|&x| x > 0.0));
        prop_assert!((split.total() - p).abs() <= 1e-9 * p);
        prop_assert!(split.levels().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn bisection_agrees_with_closed_form(ch in symmetric_channel(), levels in 1usize..=32) {
        let closed = optimal_split(&ch, levels).unwrap();
        let bisected = recursive_split(&ch, levels, 1e-14).unwrap();
        let p = ch.common_power().unwrap();
        for (a, b) in closed.levels().iter().zip(bisected.levels()) {
            prop_assert!((a - b).abs() <= 1e-8 * p, "{a} vs {b}");
        }
    }

    #[test]
    fn splitting_the_last_level_never_hurts(ch in symmetric_channel(), levels in 1usize..=32) {
        let split = optimal_split(&ch, levels).unwrap();
        let finer = split_last(&ch, &split).unwrap();
        let before = rate_allocation(&ch, &split).unwrap().total;
        let after = rate_allocation(&ch, &finer).unwrap().total;
        prop_assert!(after >= before - 1e-12);
        prop_assert!(after <= max_equal_rate(&ch).unwrap() + 1e-12);
    }

    #[test]
    fn no_split_beats_the_equal_rate_point(
        ch in symmetric_channel(),
        weights in prop::collection::vec(0.001f64..1.0, 1..=16),
    ) {
        let p = ch.common_power().unwrap();
        let s: f64 = weights.iter().sum();
        let mut levels: Vec<f64> = weights.iter().map(|w| w / s * p).collect();
        let rest: f64 = levels[1..].iter().sum();
        levels[0] = p - rest;
        let split = PowerSplit::new(0, levels, p).unwrap();
        let total = rate_allocation(&ch, &split).unwrap().total;
        prop_assert!(total <= max_equal_rate(&ch).unwrap() + 1e-12);
        let optimal = rate_allocation(&ch, &optimal_split(&ch, split.len()).unwrap()).unwrap().total;
        prop_assert!(total <= optimal + 1e-12);
    }

    #[test]
    fn optimal_totals_increase_with_levels(ch in symmetric_channel(), levels in 1usize..=63) {
        let a = rate_allocation(&ch, &optimal_split(&ch, levels).unwrap()).unwrap().total;
        let b = rate_allocation(&ch, &optimal_split(&ch, levels + 1).unwrap()).unwrap().total;
        prop_assert!(b >= a - 1e-13);
    }

    #[test]
    fn information_engines_agree(ch in small_dmc()) {
        for (s, t) in every_pair(ch.num_users()) {
            let direct = mutual_information(&ch, s, t).unwrap();
            let oracle = mi_entropy_oracle(&ch, s, t).unwrap();
            prop_assert!((direct - oracle).abs() < 1e-12, "{s:?} {t:?}: {direct} vs {oracle}");
            prop_assert!(direct >= 0.0);
        }
    }

    #[test]
    fn conditioning_on_more_inputs_helps(ch in small_dmc()) {
        let table = MutualInfoTable::new(&ch);
        let all = ch.all_users();
        for i in 0..ch.num_users() {
            for s in all.without(i).subsets() {
                for j in all.without(i).iter().filter(|&j| !s.contains(j)) {
                    prop_assert!(table.given(i, s.with(j)) >= table.given(i, s) - 1e-12);
                }
            }
        }
    }

    #[test]
    fn general_rates_reduce_to_binomial_form(
        ch in symmetric_dmc(),
        weights in prop::collection::vec(0.01f64..1.0, 1..=8),
    ) {
        let s: f64 = weights.iter().sum();
        let switch = SwitchDistribution::new(weights.iter().map(|w| w / s).collect()).unwrap();
        let table = MutualInfoTable::new(&ch);
        for user in 0..ch.num_users() {
            let general = table.switch_rates_general(&switch, user);
            let binomial = table.switch_rates_symmetric(&switch, user);
            for (a, b) in general.iter().zip(&binomial) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_user_error_is_exact(adder in any::<bool>(), levels in 1usize..=10_000) {
        let ch = if adder { DmcChannel::binary_adder(2) } else { DmcChannel::binary_xor(2) };
        let ch = ch.unwrap().with_log_base(LogBase::Bit);
        let measured = dmc::uniform_switch_error(&ch, levels, 0).unwrap();
        let closed = dmc::two_user_error_term(&ch, levels).unwrap();
        prop_assert!((measured - closed).abs() < 1e-12, "{measured} vs {closed}");
    }

    #[test]
    fn refining_the_last_weight_gains_in_closed_form(
        weights in prop::collection::vec(0.01f64..1.0, 1..=8),
        alpha in 0.01f64..0.99,
    ) {
        let ch = DmcChannel::binary_adder(2).unwrap().with_log_base(LogBase::Bit);
        let s: f64 = weights.iter().sum();
        let switch = SwitchDistribution::new(weights.iter().map(|w| w / s).collect()).unwrap();
        let finer = switch.refine_last(alpha).unwrap();
        let before: f64 = switch_rates(&ch, &switch, 0).unwrap().iter().sum();
        let after: f64 = switch_rates(&ch, &finer, 0).unwrap().iter().sum();
        let last = *switch.weights().last().unwrap();
        let gap = 1.0 - 0.5;
        let expected = alpha * (1.0 - alpha) * last * last * gap;
        prop_assert!((after - before - expected).abs() < 1e-12);
        prop_assert!(after > before);
    }

    #[test]
    fn asymmetric_shares_sum_to_joint_information(ch in small_dmc()) {
        let joint = mutual_information(&ch, ch.all_users(), UserSet::EMPTY).unwrap();
        let shares: f64 = dmc::limit_rates(&ch).iter().sum();
        prop_assert!((shares - joint).abs() < 1e-12);
    }
}

#[test]
fn mixture_coefficients_approach_beta_integral() {
    let binomial = |n: usize, k: usize| (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64);
    for m in 2..=4usize {
        let n = m - 1;
        for levels in [10, 100, 1000] {
            let coeffs = mixture_coefficients(&SwitchDistribution::uniform(levels).unwrap(), m);
            for (i, c) in coeffs.iter().enumerate() {
                let x = i as f64 / n as f64;
                let peak = binomial(n, i) * x.powi(i as i32) * (1.0 - x).powi((n - i) as i32);
                let gap = (c - 1.0 / m as f64).abs();
                assert!(gap <= peak / levels as f64 + 1e-15, "M={m} L={levels} i={i}: {gap} > {peak}/L");
            }
        }
    }
}

#[test]
fn vanishing_switches_reach_the_joint_share() {
    let levels = 10_000;
    for m in 2..=3 {
        let ch = DmcChannel::binary_adder(m).unwrap().with_log_base(LogBase::Bit);
        let limit = mutual_information(&ch, ch.all_users(), UserSet::EMPTY).unwrap() / m as f64;
        for switch in [
            SwitchDistribution::uniform(levels).unwrap(),
            SwitchDistribution::geometric(levels, 0.999).unwrap(),
        ] {
            let total: f64 = switch_rates(&ch, &switch, 0).unwrap().iter().sum();
            assert!((limit - total).abs() < 1e-3, "M={m}: {total} vs {limit}");
        }
    }
}

#[test]
fn asymmetric_two_user_limit_matches_long_switch() {
    // Y = X1 + X2 with a biased first input: not symmetric.
    let ch = DmcChannel::deterministic(vec![2, 2], 3, vec![vec![0.8, 0.2], vec![0.5, 0.5]], |x| x[0] + x[1])
        .unwrap()
        .with_log_base(LogBase::Bit);
    assert!(!dmc::is_symmetric(&ch, 1e-9));
    let limits = dmc::limit_rates(&ch);
    let long = SwitchDistribution::uniform(10_000).unwrap();
    for user in 0..2 {
        let alone = mutual_information(&ch, UserSet::singleton(user), UserSet::EMPTY).unwrap();
        let helped = mutual_information(&ch, UserSet::singleton(user), UserSet::singleton(1 - user)).unwrap();
        assert!((limits[user] - 0.5 * (alone + helped)).abs() < 1e-12);
        let total: f64 = switch_rates(&ch, &long, user).unwrap().iter().sum();
        assert!((limits[user] - total).abs() < 1e-4);
    }
}
