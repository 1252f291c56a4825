use crate::{CampaignArgs, Cli, Command, Format, GainsArgs, ReportArgs, ScenarioArgs, SimulateArgs};
use serde::Serialize;
use slew_core::campaign::{self, CampaignSpec, Ranges};
use slew_core::sim::{
    export::fmt_f64, export_csv, export_svg_plots, read_csv, run_built, Scenario, ScenarioConfig,
    SimError,
};
use std::fmt;
use std::path::Path;
use std::time::Instant;

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad input, infeasible design or unreadable/unwritable files.
    Invalid(String),
    /// The simulation itself broke down.
    Fault(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Fault(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Fault(m) => f.write_str(m),
        }
    }
}

fn invalid(e: impl fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        if e.is_fault() {
            Failure::Fault(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

struct Log(u8);

impl Log {
    fn info(&self, msg: impl fmt::Display) {
        if self.0 >= 1 {
            eprintln!("{msg}");
        }
    }
}

pub fn dispatch(cli: &Cli) -> Outcome {
    let log = Log(cli.verbose);
    match &cli.command {
        Command::Envelope(a) => envelope(a),
        Command::Gains(a) => gains(a),
        Command::Simulate(a) => simulate(a, &log),
        Command::Campaign(a) => run_campaign(a, &log),
        Command::Report(a) => report(a, &log),
    }
}

fn load(a: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    ScenarioConfig::load(&a.config, &a.overrides).map_err(invalid)
}

fn build(a: &ScenarioArgs) -> Result<Scenario, Failure> {
    Scenario::build(&load(a)?).map_err(invalid)
}

fn print_csv(header: &[&str], row: &[String]) {
    println!("{}", header.join(","));
    println!("{}", row.join(","));
}

fn envelope(a: &ScenarioArgs) -> Outcome {
    let sc = build(a)?;
    let w = &sc.cfg.wheels;
    let e = &sc.envelope;
    print_csv(
        &[
            "alpha_deg", "beta_deg", "tau_w_max", "h_w_max", "h_bar", "tau_bar", "h_d",
            "orbit_period", "omega_bar",
        ],
        &[
            w.alpha_deg,
            w.beta_deg,
            w.tau_max,
            w.h_max,
            e.h_bar,
            e.tau_bar,
            e.h_d,
            sc.cfg.disturbance.period,
            e.omega_bar_derived,
        ]
        .map(fmt_f64),
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct GainsRow {
    k: f64,
    k_lo: f64,
    k_hi: f64,
    margin_valid: bool,
    psi: f64,
    delta_hat_bar_norm: f64,
    eps_e_bar: f64,
    eps_floor: Option<f64>,
    gamma_unit: f64,
    gamma_synth: f64,
    gamma_ceiling: f64,
    tau_required: f64,
    tau_bar: f64,
    torque_feasible: bool,
    gamma_used: f64,
}

fn gains(a: &GainsArgs) -> Outcome {
    let sc = build(&a.scenario)?;
    let g = &sc.gains;
    let row = GainsRow {
        k: g.k,
        k_lo: g.k_lo,
        k_hi: g.k_hi,
        margin_valid: g.margin_valid(),
        psi: g.psi,
        delta_hat_bar_norm: g.delta_hat_bar.norm2(),
        eps_e_bar: g.eps_e_bar,
        eps_floor: g.eps_floor,
        gamma_unit: g.gamma_unit,
        gamma_synth: g.gamma,
        gamma_ceiling: g.gamma_ceiling,
        tau_required: g.tau_required,
        tau_bar: sc.envelope.tau_bar,
        torque_feasible: g.torque_feasible,
        gamma_used: sc.smc.gamma,
    };
    match a.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&row).map_err(invalid)?
        ),
        Format::Csv => {
            let b = |x: bool| u8::from(x).to_string();
            print_csv(
                &[
                    "k", "k_lo", "k_hi", "margin_valid", "psi", "delta_hat_bar_norm", "eps_e_bar",
                    "eps_floor", "gamma_unit", "gamma_synth", "gamma_ceiling", "tau_required",
                    "tau_bar", "torque_feasible", "gamma_used",
                ],
                &[
                    fmt_f64(row.k),
                    fmt_f64(row.k_lo),
                    fmt_f64(row.k_hi),
                    b(row.margin_valid),
                    fmt_f64(row.psi),
                    fmt_f64(row.delta_hat_bar_norm),
                    fmt_f64(row.eps_e_bar),
                    row.eps_floor.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(row.gamma_unit),
                    fmt_f64(row.gamma_synth),
                    fmt_f64(row.gamma_ceiling),
                    fmt_f64(row.tau_required),
                    fmt_f64(row.tau_bar),
                    b(row.torque_feasible),
                    fmt_f64(row.gamma_used),
                ],
            );
        }
    }
    if !g.torque_feasible {
        eprintln!(
            "warning: synthesized gamma {:.4e} exceeds the torque ceiling {:.4e}; \
             running with the configured gamma {:.4e}",
            g.gamma, g.gamma_ceiling, sc.smc.gamma
        );
    }
    if sc.smc.gamma > g.gamma_ceiling {
        return Err(Failure::Invalid(format!(
            "gamma {:.6e} exceeds the torque ceiling {:.6e}",
            sc.smc.gamma, g.gamma_ceiling
        )));
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir).map_err(|e| invalid(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn zone_floors(cfg: &ScenarioConfig) -> Vec<f64> {
    let mut f: Vec<f64> = cfg.zones.iter().map(|z| z.theta_deg).collect();
    f.sort_by(f64::total_cmp);
    f.dedup();
    f
}

fn simulate(a: &SimulateArgs, log: &Log) -> Outcome {
    let sc = build(&a.scenario)?;
    let t0 = Instant::now();
    let out = run_built(&sc)?;
    log.info(format!(
        "simulated {} s in {:.2} s",
        out.metrics.duration,
        t0.elapsed().as_secs_f64()
    ));
    create_dir(&a.out)?;
    write_file(&a.out.join("scenario.toml"), &sc.cfg.to_toml_string())?;
    let csv_path = a.out.join("telemetry.csv");
    export_csv(&out.log, &csv_path).map_err(invalid)?;
    log.info(format!("wrote {}", csv_path.display()));
    let metrics = serde_json::to_string_pretty(&out.metrics).map_err(invalid)?;
    write_file(&a.out.join("metrics.json"), &metrics)?;
    if !a.no_plots {
        let files = export_svg_plots(
            &out.log,
            &a.out.join("run"),
            sc.smc.sigma_bar,
            &zone_floors(&sc.cfg),
        )
        .map_err(invalid)?;
        for f in files {
            log.info(format!("wrote {}", f.display()));
        }
    }
    let m = &out.metrics;
    println!("duration,min_margin_deg,max_tau_w,max_h_w,steady_tracking_error,final_error_deg,final_eta,converged");
    println!(
        "{},{},{},{},{},{},{},{}",
        fmt_f64(m.duration),
        fmt_f64(m.min_margin_deg),
        fmt_f64(m.max_tau_w),
        fmt_f64(m.max_h_w),
        fmt_f64(m.steady_tracking_error),
        fmt_f64(m.final_error_deg),
        fmt_f64(m.final_eta()),
        u8::from(m.converged)
    );
    Ok(())
}

fn run_campaign(a: &CampaignArgs, log: &Log) -> Outcome {
    let base = load(&a.scenario)?;
    // reject a broken base scenario up front rather than failing every run
    Scenario::build(&base).map_err(invalid)?;
    let seed = a.seed.unwrap_or(base.seed);
    let mut spec = CampaignSpec::new(base, a.runs, seed);
    if a.rest_to_rest {
        spec.ranges = Ranges::default().rest_to_rest();
    }
    let workers = a.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    if workers == 0 {
        return Err(Failure::Invalid("--workers must be at least 1".into()));
    }
    let t0 = Instant::now();
    let rep = campaign::run_campaign(&spec, workers).map_err(invalid)?;
    log.info(format!(
        "{} runs, {workers} worker thread(s), {:.1} s",
        a.runs,
        t0.elapsed().as_secs_f64()
    ));
    for r in &rep.runs {
        if let campaign::RunOutcome::Failed(msg) = &r.outcome {
            eprintln!("warning: run {} failed: {msg}", r.index);
        }
    }
    create_dir(&a.out)?;
    write_file(&a.out.join("scenario.toml"), &spec.base.to_toml_string())?;
    let mut files = campaign::report_csv(&rep, &a.out).map_err(invalid)?;
    if rep.bands.is_some() {
        files.extend(campaign::report_svg(&rep, &a.out).map_err(invalid)?);
    }
    for f in files {
        log.info(format!("wrote {}", f.display()));
    }
    print_aggregates(&rep.aggregates);
    Ok(())
}

fn print_aggregates(a: &campaign::Aggregates) {
    println!("runs,failed,violations,violation_fraction,max_violation_depth_deg,converged,convergence_rate");
    println!(
        "{},{},{},{},{},{},{}",
        a.runs,
        a.failed,
        a.violations,
        fmt_f64(a.violation_fraction),
        fmt_f64(a.max_violation_depth_deg),
        a.converged,
        fmt_f64(a.convergence_rate)
    );
}

fn report(a: &ReportArgs, log: &Log) -> Outcome {
    let runs = a.dir.join("runs.csv");
    if runs.is_file() {
        let agg = campaign::aggregates_from_csv(&runs).map_err(invalid)?;
        print_aggregates(&agg);
        return Ok(());
    }
    let telemetry = a.dir.join("telemetry.csv");
    if !telemetry.is_file() {
        return Err(Failure::Invalid(format!(
            "{}: neither runs.csv nor telemetry.csv found",
            a.dir.display()
        )));
    }
    let tl = read_csv(&telemetry).map_err(invalid)?;
    let scenario = a.dir.join("scenario.toml");
    let cfg = if scenario.is_file() {
        ScenarioConfig::load(&scenario.to_string_lossy(), &[]).map_err(invalid)?
    } else {
        ScenarioConfig::default()
    };
    let Some(last) = tl.records.last() else {
        return Err(Failure::Invalid(format!("{}: no samples", telemetry.display())));
    };
    let max_abs = |f: &dyn Fn(&slew_core::sim::Record) -> f64| {
        tl.records.iter().map(f).fold(0.0, f64::max)
    };
    let inf4 = |v: &[f64; 4]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let min_theta: Vec<String> = (0..tl.zone_count)
        .map(|j| {
            let m = tl
                .records
                .iter()
                .map(|r| r.theta[j])
                .fold(f64::INFINITY, f64::min);
            fmt_f64(m.to_degrees())
        })
        .collect();
    let mut header = vec!["samples".to_string(), "t_end".into()];
    header.extend((1..=tl.zone_count).map(|j| format!("min_theta_{j}_deg")));
    header.extend(["max_tau_w", "max_h_w", "final_eta", "torque_sat_samples"].map(String::from));
    let mut row = vec![tl.records.len().to_string(), fmt_f64(last.t)];
    row.extend(min_theta);
    row.extend([
        fmt_f64(max_abs(&|r| inf4(&r.tau_w))),
        fmt_f64(max_abs(&|r| inf4(&r.h_w))),
        fmt_f64(last.q[0]),
        tl.records
            .iter()
            .filter(|r| r.torque_saturated)
            .count()
            .to_string(),
    ]);
    println!("{}", header.join(","));
    println!("{}", row.join(","));
    if a.plots {
        let files = export_svg_plots(
            &tl,
            &a.dir.join("run"),
            cfg.controller.sigma_bar,
            &zone_floors(&cfg),
        )
        .map_err(invalid)?;
        for f in files {
            log.info(format!("wrote {}", f.display()));
        }
    }
    Ok(())
}
