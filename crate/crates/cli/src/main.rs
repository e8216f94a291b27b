//! `drs`: power splits, throughput sweeps and decoding schedules from the command line.

mod format;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use drs_core::dmc::DmcChannel;
use drs_core::dmc_protocol::{protocol2_build, run_protocol2, verify_schedule_dmc};
use drs_core::gaussian::{
    asymmetric_fractions, asymmetric_limit_rates, asymmetric_split, convergence_record, max_equal_rate,
    optimal_split, rate_allocation, sweep, GaussianChannel, SplitFamily,
};
use drs_core::gaussian_protocol::{build_virtual_users, run_protocol1, verify_schedule};
use drs_core::{DecodingSchedule, DrsError, LogBase, VerificationReport};
use serde::Serialize;

use format::general;

const CSV_DIGITS: usize = 12;

#[derive(Parser)]
#[command(name = "drs", version, about = "Distributed rate splitting for multiple-access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal power split of one user and the rates it achieves.
    Split(SplitArgs),
    /// Per-user throughput against the number of levels, as CSV.
    Sweep(SweepArgs),
    /// Decoding order for unequal virtual-user counts, with per-step verification.
    Schedule(ScheduleArgs),
}

#[derive(Args)]
struct GaussianArgs {
    /// Number of users sharing a common power.
    #[arg(long, requires = "power", conflicts_with = "powers")]
    users: Option<usize>,
    /// Common transmit power.
    #[arg(long)]
    power: Option<f64>,
    /// Per-user powers, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["users", "power"])]
    powers: Option<Vec<f64>>,
    /// Noise power.
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
}

impl GaussianArgs {
    fn channel(&self, base: LogBase, default_users: Option<usize>) -> Result<GaussianChannel, Failure> {
        let ch = match (&self.powers, self.users.or(default_users), self.power) {
            (Some(powers), _, _) => GaussianChannel::new(powers.clone(), self.noise),
            (None, Some(m), Some(p)) => GaussianChannel::symmetric(m, p, self.noise),
            _ => return Err(Failure::Usage("give --users M --power P, or --powers p1,p2,..".into())),
        };
        Ok(ch?.with_log_base(base))
    }
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    channel: GaussianArgs,
    /// Number of levels per user.
    #[arg(long)]
    levels: usize,
    #[arg(long, default_value = "nat")]
    base: LogBase,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Optimal,
    Uniform,
    HeavyHead,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    channel: GaussianArgs,
    #[arg(long, default_value_t = 1)]
    l_min: usize,
    #[arg(long)]
    l_max: usize,
    #[arg(long, value_enum, default_value = "optimal")]
    family: Family,
    /// First-level share of the heavy-head family.
    #[arg(long, default_value_t = 0.5)]
    head_fraction: f64,
    #[arg(long, default_value = "nat")]
    base: LogBase,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Virtual users per real user, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    counts: Vec<usize>,
    /// Common transmit power (Gaussian channel).
    #[arg(long, conflicts_with_all = ["channel", "preset"])]
    power: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Discrete channel description (JSON).
    #[arg(long, conflicts_with = "preset")]
    channel: Option<PathBuf>,
    /// Built-in discrete channel: adder or xor, one user per count.
    #[arg(long)]
    preset: Option<String>,
    /// Verify this decoding order (labels such as 11,21,22) instead of the protocol's.
    #[arg(long)]
    order: Option<String>,
    #[arg(long, default_value = "nat")]
    base: LogBase,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Precondition(String),
    Usage(String),
    Verification,
}

impl From<DrsError> for Failure {
    fn from(e: DrsError) -> Self {
        Failure::Precondition(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Precondition(e.to_string())
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Precondition(e.to_string()))?;
    writeln!(io::stdout(), "{text}")?;
    Ok(())
}

#[derive(Serialize)]
struct UserSplit {
    user: usize,
    power: f64,
    levels: Vec<f64>,
    rates: Vec<f64>,
    sirs: Vec<f64>,
    total: f64,
    limit: f64,
}

#[derive(Serialize)]
struct SplitReport {
    base: LogBase,
    levels: usize,
    noise: f64,
    /// Fraction of each user's power on each level.
    fractions: Vec<f64>,
    users: Vec<UserSplit>,
    /// Maximum equal rate; present for equal powers only.
    r_star: Option<f64>,
    error: Option<f64>,
    scaled_error: Option<f64>,
}

fn split_report(args: &SplitArgs) -> Result<SplitReport, Failure> {
    let ch = args.channel.channel(args.base, None)?;
    let splits = if ch.is_symmetric() {
        let one = optimal_split(&ch, args.levels)?;
        (0..ch.num_users())
            .map(|owner| drs_core::PowerSplit::new(owner, one.levels().to_vec(), one.total()))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        asymmetric_split(&ch, args.levels)?
    };
    let limits = asymmetric_limit_rates(&ch);
    let users = splits
        .iter()
        .map(|split| {
            let alloc = rate_allocation(&ch, split)?;
            Ok(UserSplit {
                user: split.owner + 1,
                power: split.total(),
                levels: split.levels().to_vec(),
                rates: alloc.rates,
                sirs: alloc.sirs,
                total: alloc.total,
                limit: limits[split.owner],
            })
        })
        .collect::<Result<Vec<_>, DrsError>>()?;
    let (r_star, error, scaled_error) = if ch.is_symmetric() {
        let record = convergence_record(&ch, args.levels)?;
        (Some(max_equal_rate(&ch)?), Some(record.error), Some(record.scaled_error))
    } else {
        (None, None, None)
    };
    Ok(SplitReport {
        base: args.base,
        levels: args.levels,
        noise: ch.noise(),
        fractions: asymmetric_fractions(&ch, args.levels)?,
        users,
        r_star,
        error,
        scaled_error,
    })
}

fn cmd_split(args: &SplitArgs) -> Result<(), Failure> {
    let report = split_report(args)?;
    if args.json {
        return print_json(&report);
    }
    let unit = report.base.unit();
    let mut out = io::stdout().lock();
    writeln!(out, "levels {}, noise {}, rates in {unit}", report.levels, general(report.noise, 6))?;
    let fractions: Vec<String> = report.fractions.iter().map(|g| general(*g, 6)).collect();
    writeln!(out, "fractions γ = ({})", fractions.join(", "))?;
    let shown = if report.r_star.is_some() { &report.users[..1] } else { &report.users[..] };
    for user in shown {
        if report.r_star.is_none() {
            writeln!(out, "user {} (power {})", user.user, general(user.power, 6))?;
        }
        writeln!(out, "{:>5}  {:>14}  {:>14}  {:>14}", "k", "power", "sir", "rate")?;
        for k in 0..user.levels.len() {
            writeln!(
                out,
                "{:>5}  {:>14}  {:>14}  {:>14}",
                k + 1,
                general(user.levels[k], 8),
                general(user.sirs[k], 8),
                general(user.rates[k], 8)
            )?;
        }
        writeln!(out, "total {}  limit {}", general(user.total, 10), general(user.limit, 10))?;
    }
    if let (Some(r_star), Some(e), Some(le)) = (report.r_star, report.error, report.scaled_error) {
        writeln!(out, "R* {}  e[L] {}  L·e[L] {}", general(r_star, 10), general(e, 10), general(le, 10))?;
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let ch = args.channel.channel(args.base, None)?;
    let family = match args.family {
        Family::Optimal => SplitFamily::Optimal,
        Family::Uniform => SplitFamily::Uniform,
        Family::HeavyHead => SplitFamily::HeavyHead {
            head_fraction: args.head_fraction,
        },
    };
    let rows = sweep(&ch, family, args.l_min, args.l_max)?;
    let mut out = io::stdout().lock();
    writeln!(out, "L,total,r_star,e,l_times_e")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.levels,
            general(row.total, CSV_DIGITS),
            general(row.r_star, CSV_DIGITS),
            general(row.error, CSV_DIGITS),
            general(row.scaled_error, CSV_DIGITS)
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ScheduleOutput<'a> {
    channel: &'a str,
    base: LogBase,
    counts: &'a [usize],
    order: String,
    schedule: &'a DecodingSchedule,
    report: &'a VerificationReport,
}

fn load_dmc(args: &ScheduleArgs) -> Result<Option<DmcChannel>, Failure> {
    if let Some(path) = &args.channel {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let ch = DmcChannel::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok(Some(ch));
    }
    if let Some(name) = &args.preset {
        return Ok(Some(DmcChannel::preset(name, args.counts.len()).map_err(|e| Failure::Usage(e.to_string()))?));
    }
    Ok(None)
}

fn cmd_schedule(args: &ScheduleArgs) -> Result<(), Failure> {
    let requested = args
        .order
        .as_deref()
        .map(DecodingSchedule::parse_labels)
        .transpose()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let (kind, schedule, report) = match load_dmc(args)? {
        Some(ch) => {
            let ch = ch.with_log_base(args.base);
            let sys = protocol2_build(&ch, &args.counts)?;
            let schedule = requested.unwrap_or_else(|| run_protocol2(&sys));
            let report = verify_schedule_dmc(&ch, &sys, &schedule)?;
            ("dmc", schedule, report)
        }
        None => {
            let power = args.power.unwrap_or(1.0);
            let ch = GaussianChannel::symmetric(args.counts.len(), power, args.noise)?.with_log_base(args.base);
            let users = build_virtual_users(&ch, &args.counts)?;
            let schedule = match requested {
                Some(order) => order,
                None => run_protocol1(&users)?,
            };
            let report = verify_schedule(&users, &schedule, &ch)?;
            ("gaussian", schedule, report)
        }
    };
    if args.json {
        print_json(&ScheduleOutput {
            channel: kind,
            base: args.base,
            counts: &args.counts,
            order: schedule.labels(),
            schedule: &schedule,
            report: &report,
        })?;
    } else {
        let mut out = io::stdout().lock();
        writeln!(out, "order {}", schedule.labels())?;
        let (tol, act) = if kind == "dmc" { ("information", "rate") } else { ("tolerance", "interference") };
        writeln!(out, "{:>6}  {:>14}  {:>14}  {:>14}", "step", tol, act, "slack")?;
        for step in &report.steps {
            writeln!(
                out,
                "{:>6}  {:>14}  {:>14}  {:>14}",
                step.user.to_string(),
                general(step.tolerance, 8),
                general(step.actual, 8),
                general(step.slack, 8)
            )?;
        }
        writeln!(out, "{}", if report.passed { "verification OK" } else { "verification FAILED" })?;
    }
    if report.passed {
        Ok(())
    } else {
        if let Some(step) = report.failing_step() {
            eprintln!("drs: virtual user {} is not decodable (slack {})", step.user, general(step.slack, 8));
        }
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Split(args) => cmd_split(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Schedule(args) => cmd_schedule(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Precondition(msg)) => {
            eprintln!("drs: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("drs: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(3),
    }
}
