//! JSON-in, JSON-out bindings behind `www/index.html`.
//!
//! Every function returns a JSON document; failures come back as `{"error": "..."}`
//! so the page never has to catch exceptions.

use drs_core::dmc::DmcChannel;
use drs_core::dmc_protocol::{protocol2_build, run_protocol2, verify_schedule_dmc};
use drs_core::gaussian::{optimal_split, rate_allocation, sweep, GaussianChannel, SplitFamily, SweepRow};
use drs_core::{DecodingSchedule, LogBase, Result, VerificationReport};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn respond<T: Serialize>(result: Result<T>) -> String {
    match result {
        Ok(value) => serde_json::to_string(&value).expect("serializable response"),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

fn parse_base(base: &str) -> Result<LogBase> {
    base.parse().map_err(drs_core::DrsError::InvalidArgument)
}

#[derive(Serialize)]
struct Curves {
    optimal: Vec<SweepRow>,
    uniform: Vec<SweepRow>,
}

/// Per-user throughput of the optimal and uniform splits for `L = 1..=l_max`.
#[wasm_bindgen]
pub fn convergence_curves(users: usize, power: f64, noise: f64, l_max: usize, base: &str) -> String {
    respond((|| {
        let ch = GaussianChannel::symmetric(users, power, noise)?.with_log_base(parse_base(base)?);
        Ok(Curves {
            optimal: sweep(&ch, SplitFamily::Optimal, 1, l_max)?,
            uniform: sweep(&ch, SplitFamily::Uniform, 1, l_max)?,
        })
    })())
}

#[derive(Serialize)]
struct SplitView {
    levels: Vec<f64>,
    rates: Vec<f64>,
    sirs: Vec<f64>,
    total: f64,
}

/// Optimal power split of one user with its per-level rates and SIRs.
#[wasm_bindgen]
pub fn split_levels(users: usize, power: f64, noise: f64, levels: usize, base: &str) -> String {
    respond((|| {
        let ch = GaussianChannel::symmetric(users, power, noise)?.with_log_base(parse_base(base)?);
        let split = optimal_split(&ch, levels)?;
        let alloc = rate_allocation(&ch, &split)?;
        Ok(SplitView {
            levels: split.levels().to_vec(),
            rates: alloc.rates,
            sirs: alloc.sirs,
            total: alloc.total,
        })
    })())
}

#[derive(Serialize)]
struct ScheduleView {
    order: String,
    rates: Vec<Vec<f64>>,
    schedule: DecodingSchedule,
    report: VerificationReport,
}

/// Decoding schedule on a preset discrete channel (`adder` or `xor`) with one
/// user per entry of `counts` (comma separated). An empty `order` uses the
/// protocol's own order; otherwise the given labels are verified.
#[wasm_bindgen]
pub fn dmc_schedule(preset: &str, counts: &str, order: &str) -> String {
    respond((|| {
        let counts = counts
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<usize>()
                    .map_err(|_| drs_core::DrsError::InvalidArgument(format!("bad count `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let ch = DmcChannel::preset(preset, counts.len())?.with_log_base(LogBase::Bit);
        let sys = protocol2_build(&ch, &counts)?;
        let schedule = if order.trim().is_empty() {
            run_protocol2(&sys)
        } else {
            DecodingSchedule::parse_labels(order)?
        };
        let report = verify_schedule_dmc(&ch, &sys, &schedule)?;
        Ok(ScheduleView {
            order: schedule.labels(),
            rates: sys.rates,
            schedule,
            report,
        })
    })())
}
