//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Lines go to the process stdout directly, so they show without `--nocapture`.

use std::io::Write;
use std::time::Instant;

use drs_core::dmc::{self, mutual_information, DmcChannel, UserSet};
use drs_core::dmc_protocol::{protocol2_build, run_protocol2, verify_schedule_dmc};
use drs_core::gaussian::{
    common_sir, convergence_record, family_totals, limit_constant, max_equal_rate, optimal_split, rate_allocation,
    sweep, GaussianChannel, SplitFamily,
};
use drs_core::gaussian_protocol::{build_virtual_users, run_protocol1, verify_schedule};
use drs_core::oracles::{grid_optimal_split, grid_optimal_switch, mi_entropy_oracle};
use drs_core::LogBase;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID_SPLIT_RESOLUTION: f64 = 1e-4;
const GRID_SPLIT_TOLERANCE: f64 = 1e-3;
const GRID_SPLIT_BUDGET_SECS: f64 = 60.0;
const EQUAL_SIR_TOLERANCE: f64 = 1e-9;
const LIMIT_CONSTANT_TOLERANCE_L1000: f64 = 0.01;
const LIMIT_CONSTANT_TOLERANCE_L100: f64 = 0.05;
const UNIFORM_FAMILY_TOLERANCE: f64 = 1e-3;
const EXACTNESS_TOLERANCE: f64 = 1e-12;
const SWITCH_GRID_RESOLUTION: f64 = 1e-3;
const SWITCH_GAIN_TOLERANCE: f64 = 1e-6;
const SLACK_FLOOR: f64 = -1e-12;
const MI_TOLERANCE: f64 = 1e-12;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for m in [2, 3] {
        for p in [0.5, 1.0, 4.0] {
            let ch = GaussianChannel::symmetric(m, p, 1.0).unwrap();
            for l in [2, 3] {
                let grid = grid_optimal_split(&ch, l, GRID_SPLIT_RESOLUTION).unwrap();
                let closed = optimal_split(&ch, l).unwrap();
                for (a, b) in grid.levels().iter().zip(closed.levels()) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= GRID_SPLIT_TOLERANCE && secs < GRID_SPLIT_BUDGET_SECS,
        format!("max |grid − closed form| = {worst:.3e} (≤ {GRID_SPLIT_TOLERANCE:e}), {secs:.1} s"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in 2..=8 {
        for p in [0.1, 1.0, 10.0] {
            let ch = GaussianChannel::symmetric(m, p, 1.0).unwrap();
            for l in 1..=64 {
                let expected = common_sir(&ch, l).unwrap();
                let alloc = rate_allocation(&ch, &optimal_split(&ch, l).unwrap()).unwrap();
                for sir in alloc.sirs {
                    worst = worst.max((sir - expected).abs());
                }
            }
        }
    }
    outcome(worst < EQUAL_SIR_TOLERANCE, format!("max SIR deviation {worst:.3e}"))
}

fn criterion_3() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for m in [2, 3, 5] {
        let ch = GaussianChannel::symmetric(m, 1.0, 1.0).unwrap();
        let c = limit_constant(&ch).unwrap();
        for (l, tol) in [(100, LIMIT_CONSTANT_TOLERANCE_L100), (1000, LIMIT_CONSTANT_TOLERANCE_L1000)] {
            let rel = (convergence_record(&ch, l).unwrap().scaled_error / c - 1.0).abs();
            passed &= rel < tol;
            parts.push(format!("M={m} L={l}: {:.3}%", 100.0 * rel));
        }
    }
    outcome(passed, parts.join(", "))
}

fn criterion_4() -> Outcome {
    let ch = GaussianChannel::symmetric(2, 1.0, 1.0).unwrap();
    let totals = family_totals(&ch, SplitFamily::Uniform, 1000).unwrap();
    let gap = max_equal_rate(&ch).unwrap() - totals[999];
    outcome(
        (0.0..=UNIFORM_FAMILY_TOLERANCE).contains(&gap),
        format!("R* − uniform total at L=1000 = {gap:.3e} nat"),
    )
}

fn criterion_5() -> Outcome {
    let ch = DmcChannel::binary_adder(2).unwrap().with_log_base(LogBase::Bit);
    let mut worst: f64 = 0.0;
    for l in 1..=100 {
        let closed = dmc::two_user_error_term(&ch, l).unwrap();
        let measured = dmc::uniform_switch_error(&ch, l, 0).unwrap();
        worst = worst.max((closed - measured).abs());
    }
    let e2 = dmc::two_user_error_term(&ch, 2).unwrap();
    outcome(
        worst <= EXACTNESS_TOLERANCE && e2 == 0.125,
        format!("max |closed − measured| = {worst:.3e}, e[2] = {e2} bit"),
    )
}

fn criterion_6() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for m in [2, 3] {
        let ch = DmcChannel::binary_adder(m).unwrap().with_log_base(LogBase::Bit);
        for l in [2, 10, 100] {
            let measured = dmc::uniform_switch_error(&ch, l, 0).unwrap();
            let bound = dmc::uniform_bound(&ch, l).unwrap();
            passed &= measured <= bound;
            parts.push(format!("M={m} L={l}: {measured:.4} ≤ {bound:.4}"));
        }
    }
    outcome(passed, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let two = DmcChannel::binary_adder(2).unwrap().with_log_base(LogBase::Bit);
    let mut passed = true;
    let mut parts = Vec::new();
    for l in [2, 3] {
        let found = grid_optimal_switch(&two, l, SWITCH_GRID_RESOLUTION).unwrap();
        passed &= found.gain <= SWITCH_GAIN_TOLERANCE;
        parts.push(format!("M=2 L={l}: gain {:.2e} bit", found.gain));
    }
    let three = DmcChannel::binary_adder(3).unwrap().with_log_base(LogBase::Bit);
    let found = grid_optimal_switch(&three, 2, SWITCH_GRID_RESOLUTION).unwrap();
    passed &= found.gain > 0.0;
    parts.push(format!(
        "M=3 L=2: λ = {:?}, gain {:.4e} bit",
        found.best.weights(),
        found.gain
    ));
    outcome(passed, parts.join(", "))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=6);
        let counts: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=10)).collect();
        let ch = GaussianChannel::symmetric(m, rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)).unwrap();
        let users = build_virtual_users(&ch, &counts).unwrap();
        let schedule = run_protocol1(&users).unwrap();
        worst = worst.min(verify_schedule(&users, &schedule, &ch).unwrap().min_slack);
    }
    let gaussian_worst = worst;

    let mut worst = f64::INFINITY;
    for _ in 0..500 {
        let m = rng.gen_range(1..=4);
        let counts: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=6)).collect();
        let ch = if rng.gen_bool(0.5) { DmcChannel::binary_adder(m) } else { DmcChannel::binary_xor(m) };
        let ch = ch.unwrap().with_log_base(LogBase::Bit);
        let sys = protocol2_build(&ch, &counts).unwrap();
        worst = worst.min(verify_schedule_dmc(&ch, &sys, &run_protocol2(&sys)).unwrap().min_slack);
    }
    let dmc_worst = worst;

    let adder = DmcChannel::binary_adder(2).unwrap().with_log_base(LogBase::Bit);
    let sys = protocol2_build(&adder, &[2, 3]).unwrap();
    let schedule = run_protocol2(&sys);
    let report = verify_schedule_dmc(&adder, &sys, &schedule).unwrap();
    let slack_22 = report.steps[2].slack;
    let walkthrough = schedule.labels() == "11,21,22,12,23" && (slack_22 - 1.0 / 36.0).abs() <= EXACTNESS_TOLERANCE;

    outcome(
        gaussian_worst >= SLACK_FLOOR && dmc_worst >= SLACK_FLOOR && walkthrough,
        format!(
            "min slack Gaussian {gaussian_worst:.3e}, DMC {dmc_worst:.3e}; (2,3) order {} with slack {slack_22:.6} bit at 22",
            schedule.labels()
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, p) in [("high", 10.0), ("low", 0.1)] {
        let ch = GaussianChannel::symmetric(100, p, 1.0).unwrap();
        let rows = sweep(&ch, SplitFamily::Optimal, 1, 50).unwrap();
        let increments: Vec<f64> = rows.windows(2).map(|w| w[1].total - w[0].total).collect();
        let monotone = increments.iter().all(|&d| d >= 0.0);
        let diminishing = increments.windows(2).all(|w| w[1] < w[0]);
        passed &= monotone && diminishing;
        parts.push(format!(
            "{label} SNR: total {:.5} → {:.5} of R* {:.5}, monotone {monotone}, diminishing {diminishing}",
            rows[0].total, rows[49].total, rows[0].r_star
        ));
    }
    outcome(passed, parts.join("; "))
}

fn test_channels() -> Vec<DmcChannel> {
    let mut channels = vec![
        DmcChannel::binary_adder(2).unwrap(),
        DmcChannel::binary_adder(3).unwrap(),
        DmcChannel::binary_xor(2).unwrap(),
        DmcChannel::binary_xor(3).unwrap(),
        DmcChannel::deterministic(vec![2, 2], 2, vec![vec![0.5, 0.5]; 2], |x| x[0]).unwrap(),
        DmcChannel::deterministic(vec![2, 2], 3, vec![vec![0.8, 0.2], vec![0.5, 0.5]], |x| x[0] + x[1]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let distribution = |rng: &mut ChaCha8Rng, n: usize| {
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    };
    for _ in 0..20 {
        let m = rng.gen_range(1..=3);
        let alphabets: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=4)).collect();
        let output = rng.gen_range(1..=4);
        let rows: usize = alphabets.iter().product();
        let w = (0..rows).map(|_| distribution(&mut rng, output)).collect();
        let inputs = alphabets.iter().map(|&a| distribution(&mut rng, a)).collect();
        channels.push(DmcChannel::new(alphabets, output, w, inputs).unwrap());
    }
    channels
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    let channels = test_channels();
    for ch in &channels {
        let all = ch.all_users();
        for s in all.subsets() {
            for t in UserSet::from_bits(all.bits() & !s.bits()).subsets() {
                let a = mutual_information(ch, s, t).unwrap();
                let b = mi_entropy_oracle(ch, s, t).unwrap();
                worst = worst.max((a - b).abs());
                pairs += 1;
            }
        }
    }
    outcome(
        worst < MI_TOLERANCE,
        format!("{} channels, {pairs} subset pairs, max difference {worst:.3e} nat", channels.len()),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed-form split vs grid oracle", criterion_1),
        ("equal SIR across levels", criterion_2),
        ("L·e[L] constant", criterion_3),
        ("uniform split family reaches R*", criterion_4),
        ("two-user switch error exact", criterion_5),
        ("uniform-switch O(1/L) bound", criterion_6),
        ("two-user switch grid oracle", criterion_7),
        ("protocol decodability", criterion_8),
        ("throughput sweep shape", criterion_9),
        ("MI engine vs entropy oracle", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = run();
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        let line = format!("[{verdict}] {:>2}. {name}: {}\n", i + 1, result.detail);
        std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
        if !result.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
