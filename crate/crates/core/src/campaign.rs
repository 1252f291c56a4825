//! Monte Carlo robustness campaign: randomized scenarios, parallel execution, aggregate
//! safety and convergence statistics.

use crate::apf::{pointing_margins, ForbiddenZone};
use crate::error::{Error, Result};
use crate::math::{Mat3, Quaternion, Vec3};
use crate::sim::export::{fmt_f64, line_plot, ExportError, Series};
use crate::sim::{run_scenario, sample_inertia, Metrics, ScenarioConfig, TelemetryLog};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::{Path, PathBuf};

/// Redraws allowed when a perturbed start or goal lands inside a keep-out cone.
pub const PLACEMENT_DRAWS: usize = 100;

/// Upper edges of the violation-depth histogram bins, deg. Runs without a violation go in an
/// extra leading bin, depths beyond the last edge in a trailing one.
pub const DEPTH_BINS_DEG: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 5.0];

/// Half-widths of the uniform perturbations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ranges {
    /// Relative, per quaternion component (renormalized afterwards).
    pub q0_frac: f64,
    /// rad/s, per axis.
    pub omega0: f64,
    /// Half-angle of the cone each zone axis is tilted within, deg.
    pub zone_cone_deg: f64,
    /// Elementwise, relative to `|I*|`.
    pub inertia_frac: f64,
    /// Randomize disturbance bias within its magnitude, amplitude signs and phase.
    pub disturbance: bool,
}

impl Default for Ranges {
    fn default() -> Self {
        Self {
            q0_frac: 0.1,
            omega0: 1e-3,
            zone_cone_deg: 15.0,
            inertia_frac: 0.2,
            disturbance: true,
        }
    }
}

impl Ranges {
    pub fn zero() -> Self {
        Self {
            q0_frac: 0.0,
            omega0: 0.0,
            zone_cone_deg: 0.0,
            inertia_frac: 0.0,
            disturbance: false,
        }
    }

    /// Same ranges with the initial rate pinned to the base value.
    pub fn rest_to_rest(self) -> Self {
        Self { omega0: 0.0, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub base: ScenarioConfig,
    pub n_runs: usize,
    pub ranges: Ranges,
    pub seed: u64,
    /// Plant steps between band samples.
    pub band_stride: usize,
}

impl CampaignSpec {
    pub fn new(base: ScenarioConfig, n_runs: usize, seed: u64) -> Self {
        Self {
            base,
            n_runs,
            ranges: Ranges::default(),
            seed,
            band_stride: 100,
        }
    }

    fn validate(&self) -> Result<()> {
        let r = &self.ranges;
        if self.n_runs == 0 {
            return Err(Error::InvalidParameter("n_runs must be at least 1".into()));
        }
        if self.band_stride == 0 {
            return Err(Error::InvalidParameter("band_stride must be at least 1".into()));
        }
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if ![r.q0_frac, r.omega0, r.zone_cone_deg, r.inertia_frac]
            .into_iter()
            .all(finite_nonneg)
        {
            return Err(Error::InvalidParameter("ranges must be finite and non-negative".into()));
        }
        if r.q0_frac >= 1.0 || r.zone_cone_deg >= 90.0 {
            return Err(Error::InvalidParameter(
                "q0 range must stay below 100% and the zone cone below 90 deg".into(),
            ));
        }
        if r.inertia_frac > self.base.inertia.uncertainty {
            return Err(Error::InvalidParameter(format!(
                "inertia range {} exceeds the modelled uncertainty {}",
                r.inertia_frac, self.base.inertia.uncertainty
            )));
        }
        Ok(())
    }
}

/// Independent stream per run: the campaign seed keys the generator, the run index selects the
/// stream, so results do not depend on scheduling.
pub fn run_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sym(rng: &mut ChaCha8Rng, half: f64) -> f64 {
    if half > 0.0 {
        rng.gen_range(-half..=half)
    } else {
        0.0
    }
}

/// Direction drawn uniformly over the spherical cap of half-angle `cone` around `axis`.
fn tilt_within_cone(axis: Vec3<f64>, cone: f64, rng: &mut ChaCha8Rng) -> Vec3<f64> {
    if cone <= 0.0 {
        return axis;
    }
    let Some(a) = axis.try_normalize() else {
        return axis;
    };
    let cos_t = rng.gen_range(cone.cos()..=1.0);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let helper = if a.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let u = a.cross(&helper).try_normalize().unwrap_or(helper);
    let v = a.cross(&u);
    let d = a * cos_t + (u * phi.cos() + v * phi.sin()) * sin_t;
    d.try_normalize().unwrap_or(a)
}

fn clear_of_zones(q: &Quaternion<f64>, boresight: &Vec3<f64>, zones: &[ZoneDraw]) -> bool {
    let zs: Vec<ForbiddenZone<f64>> = zones
        .iter()
        .filter_map(|z| ForbiddenZone::new(z.axis, z.theta).ok())
        .collect();
    zs.len() == zones.len() && pointing_margins(q, boresight, &zs).iter().all(|m| !m.violated)
}

struct ZoneDraw {
    axis: Vec3<f64>,
    theta: f64,
}

fn perturb(spec: &CampaignSpec, index: usize) -> Result<ScenarioConfig> {
    let r = &spec.ranges;
    let base = &spec.base;
    let mut rng = run_rng(spec.seed, index);
    let mut cfg = base.clone();
    // TOML integers are signed
    cfg.seed = rng.gen_range(0..=i64::MAX as u64);

    let boresight = Vec3::from(base.attitude.boresight)
        .try_normalize()
        .ok_or_else(|| Error::InvalidParameter("boresight has zero length".into()))?;
    let q_d = Quaternion::from_array(base.attitude.q_d)?;
    let mut placed = false;
    for _ in 0..PLACEMENT_DRAWS {
        let mut q0 = base.attitude.q0;
        for c in q0.iter_mut() {
            *c += sym(&mut rng, r.q0_frac * c.abs());
        }
        let zones: Vec<ZoneDraw> = base
            .zones
            .iter()
            .map(|z| ZoneDraw {
                axis: tilt_within_cone(Vec3::from(z.axis), r.zone_cone_deg.to_radians(), &mut rng),
                theta: z.theta_deg.to_radians(),
            })
            .collect();
        let q = Quaternion::from_array(q0)?;
        if base.allow_initial_violation
            || (clear_of_zones(&q, &boresight, &zones) && clear_of_zones(&q_d, &boresight, &zones))
        {
            if r.q0_frac > 0.0 {
                cfg.attitude.q0 = q.to_array();
            }
            for (zc, z) in cfg.zones.iter_mut().zip(&zones) {
                zc.axis = z.axis.to_array();
            }
            placed = true;
            break;
        }
    }
    if !placed {
        return Err(Error::RejectionExhausted(PLACEMENT_DRAWS));
    }

    for (w, w0) in cfg.attitude.omega0.iter_mut().zip(base.attitude.omega0) {
        *w = w0 + sym(&mut rng, r.omega0);
    }

    if r.inertia_frac > 0.0 {
        let nominal = Mat3::from_rows(base.inertia.nominal);
        let bound = nominal.abs().scale(r.inertia_frac);
        let actual = sample_inertia(&nominal, &bound, &mut rng)?;
        cfg.inertia.actual = Some(actual.into());
        cfg.inertia.sample_actual = false;
    }

    if r.disturbance {
        let d = &mut cfg.disturbance;
        for i in 0..3 {
            d.bias[i] = sym(&mut rng, base.disturbance.bias[i].abs());
            if rng.gen::<bool>() {
                d.amplitude[i] = -d.amplitude[i];
            }
        }
        d.phase = rng.gen_range(0.0..std::f64::consts::TAU);
    }
    Ok(cfg)
}

/// One scenario per run, drawn from the run's own stream.
pub fn generate_runs(spec: &CampaignSpec) -> Result<Vec<ScenarioConfig>> {
    spec.validate()?;
    (0..spec.n_runs).map(|i| perturb(spec, i)).collect()
}

/// Signals tracked by the min/max bands.
pub const BAND_SIGNALS: [&str; 13] = [
    "q_eta", "q_x", "q_y", "q_z", "tauw_1", "tauw_2", "tauw_3", "tauw_4", "hw_1", "hw_2", "hw_3",
    "hw_4", "min_theta_deg",
];

/// Per-sample values of [`BAND_SIGNALS`].
pub fn band_trace(log: &TelemetryLog) -> Vec<[f64; 13]> {
    log.records
        .iter()
        .map(|r| {
            let mut row = [0.0; 13];
            row[..4].copy_from_slice(&r.q);
            row[4..8].copy_from_slice(&r.tau_w);
            row[8..12].copy_from_slice(&r.h_w);
            row[12] = r
                .theta
                .iter()
                .fold(f64::INFINITY, |a, &b| a.min(b))
                .to_degrees();
            row
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bands {
    pub t: Vec<f64>,
    pub lo: Vec<[f64; 13]>,
    pub hi: Vec<[f64; 13]>,
}

impl Bands {
    fn absorb(&mut self, trace: &[[f64; 13]]) {
        for ((lo, hi), row) in self.lo.iter_mut().zip(self.hi.iter_mut()).zip(trace) {
            for s in 0..13 {
                lo[s] = lo[s].min(row[s]);
                hi[s] = hi[s].max(row[s]);
            }
        }
    }

    /// Whether every sample of `trace` lies inside the bands.
    pub fn contains(&self, trace: &[[f64; 13]]) -> bool {
        trace.len() == self.t.len()
            && trace
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(row, (lo, hi))| (0..13).all(|s| lo[s] <= row[s] && row[s] <= hi[s]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Completed(Metrics),
    /// Setup or integration fault; counted as a violation at the cone floor.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub index: usize,
    pub config: ScenarioConfig,
    pub outcome: RunOutcome,
}

impl RunResult {
    pub fn metrics(&self) -> Option<&Metrics> {
        match &self.outcome {
            RunOutcome::Completed(m) => Some(m),
            RunOutcome::Failed(_) => None,
        }
    }

    /// Depth charged to the run, deg.
    pub fn violation_depth_deg(&self) -> f64 {
        match &self.outcome {
            RunOutcome::Completed(m) => m.violation_depth_deg,
            RunOutcome::Failed(_) => floor_deg(&self.config),
        }
    }

    pub fn violated(&self) -> bool {
        match &self.outcome {
            RunOutcome::Completed(m) => m.violation_depth_deg > 0.0,
            RunOutcome::Failed(_) => true,
        }
    }
}

fn floor_deg(cfg: &ScenarioConfig) -> f64 {
    cfg.zones
        .iter()
        .map(|z| z.theta_deg)
        .fold(0.0, f64::max)
}

fn depth_bin(depth: f64, violated: bool) -> usize {
    if !violated {
        return 0;
    }
    1 + DEPTH_BINS_DEG
        .iter()
        .position(|&edge| depth <= edge)
        .unwrap_or(DEPTH_BINS_DEG.len())
}

/// Campaign-level statistics, computable from the per-run table alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregates {
    pub runs: usize,
    pub failed: usize,
    pub violations: usize,
    pub violation_fraction: f64,
    pub max_violation_depth_deg: f64,
    pub converged: usize,
    pub convergence_rate: f64,
    /// Counts per [`DEPTH_BINS_DEG`] bin, with a leading "no violation" bin.
    pub histogram: Vec<usize>,
}

/// Per-run facts the aggregates depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunTally {
    pub failed: bool,
    pub violated: bool,
    pub depth_deg: f64,
    pub converged: bool,
}

impl Aggregates {
    pub fn from_tallies(rows: &[RunTally]) -> Self {
        let n = rows.len();
        let failed = rows.iter().filter(|r| r.failed).count();
        let violations = rows.iter().filter(|r| r.violated).count();
        let converged = rows.iter().filter(|r| r.converged).count();
        let mut histogram = vec![0; DEPTH_BINS_DEG.len() + 2];
        for r in rows {
            histogram[depth_bin(r.depth_deg, r.violated)] += 1;
        }
        let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        Self {
            runs: n,
            failed,
            violations,
            violation_fraction: frac(violations),
            max_violation_depth_deg: rows.iter().map(|r| r.depth_deg).fold(0.0, f64::max),
            converged,
            convergence_rate: frac(converged),
            histogram,
        }
    }
}

impl RunResult {
    pub fn tally(&self) -> RunTally {
        RunTally {
            failed: self.metrics().is_none(),
            violated: self.violated(),
            depth_deg: self.violation_depth_deg(),
            converged: self.metrics().is_some_and(|m| m.converged),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub seed: u64,
    pub runs: Vec<RunResult>,
    pub aggregates: Aggregates,
    /// Envelope over completed runs; `None` when every run failed.
    pub bands: Option<Bands>,
}

/// Sample times and band signals of one completed run.
pub type Trace = (Vec<f64>, Vec<[f64; 13]>);

impl CampaignReport {
    pub fn from_runs(seed: u64, runs: Vec<RunResult>, traces: Vec<Option<Trace>>) -> Self {
        let tallies: Vec<RunTally> = runs.iter().map(RunResult::tally).collect();
        let mut bands: Option<Bands> = None;
        for (t, trace) in traces.into_iter().flatten() {
            match &mut bands {
                None => {
                    bands = Some(Bands {
                        t,
                        lo: trace.clone(),
                        hi: trace,
                    })
                }
                Some(b) => b.absorb(&trace),
            }
        }
        Self {
            seed,
            aggregates: Aggregates::from_tallies(&tallies),
            bands,
            runs,
        }
    }
}

/// Recomputes the aggregates from a `runs.csv` written by [`report_csv`].
pub fn aggregates_from_csv(path: &Path) -> std::result::Result<Aggregates, ExportError> {
    let err = |e: &dyn std::fmt::Display| ExportError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let mut rd = csv::Reader::from_path(path).map_err(|e| err(&e))?;
    let header = rd.headers().map_err(|e| err(&e))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(&format!("missing column `{name}`")))
    };
    let (status, depth, violated, converged) = (
        col("status")?,
        col("violation_depth_deg")?,
        col("violated")?,
        col("converged")?,
    );
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| err(&e))?;
        let get = |i: usize| rec.get(i).unwrap_or("");
        rows.push(RunTally {
            failed: get(status) != "ok",
            violated: get(violated) == "1",
            depth_deg: get(depth)
                .parse()
                .map_err(|_| err(&format!("bad depth `{}`", get(depth))))?,
            converged: get(converged) == "1",
        });
    }
    Ok(Aggregates::from_tallies(&rows))
}

fn execute(index: usize, cfg: std::result::Result<ScenarioConfig, (ScenarioConfig, String)>, stride: usize)
    -> (RunResult, Option<Trace>)
{
    let (config, outcome, trace) = match cfg {
        Err((config, msg)) => (config, RunOutcome::Failed(msg), None),
        Ok(mut config) => {
            config.telemetry.stride = stride;
            match run_scenario(&config) {
                Ok(out) => {
                    let t = out.log.records.iter().map(|r| r.t).collect();
                    let trace = band_trace(&out.log);
                    (config, RunOutcome::Completed(out.metrics), Some((t, trace)))
                }
                Err(e) => (config, RunOutcome::Failed(e.to_string()), None),
            }
        }
    };
    (
        RunResult {
            index,
            config,
            outcome,
        },
        trace,
    )
}

/// Runs the campaign on a pool of `workers` threads. Runs that cannot be generated or fault
/// while integrating are recorded as failed, never aborting the campaign.
pub fn run_campaign(spec: &CampaignSpec, workers: usize) -> Result<CampaignReport> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        (0..spec.n_runs)
            .into_par_iter()
            .map(|i| {
                let cfg = perturb(spec, i).map_err(|e| (spec.base.clone(), e.to_string()));
                execute(i, cfg, spec.band_stride)
            })
            .collect()
    });
    let (runs, traces) = results.into_iter().unzip();
    Ok(CampaignReport::from_runs(spec.seed, runs, traces))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Column names of the per-run table.
pub const RUN_COLUMNS: [&str; 25] = [
    "run", "status", "q0_eta", "q0_x", "q0_y", "q0_z", "omega0_x", "omega0_y", "omega0_z",
    "min_margin_deg", "violation_depth_deg", "violated", "max_tau_w", "max_h_w",
    "torque_saturated_steps", "momentum_saturated_steps", "reaching_time",
    "max_sigma_after_reach", "settling_time", "steady_tracking_error", "steady_goal_error",
    "final_error_deg", "converged", "max_omega_star", "message",
];

/// Writes `summary.csv`, `runs.csv` and `histogram.csv` into `dir`.
pub fn report_csv(report: &CampaignReport, dir: &Path) -> std::result::Result<Vec<PathBuf>, ExportError> {
    let io = |p: &Path, e: &dyn std::fmt::Display| ExportError::Io {
        path: p.display().to_string(),
        reason: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, &e))?;

    let runs_path = dir.join("runs.csv");
    let mut w = csv::Writer::from_path(&runs_path).map_err(|e| io(&runs_path, &e))?;
    w.write_record(RUN_COLUMNS).map_err(|e| io(&runs_path, &e))?;
    for r in &report.runs {
        let a = &r.config.attitude;
        let mut row = vec![r.index.to_string()];
        row.push(if r.metrics().is_some() { "ok" } else { "failed" }.into());
        row.extend(a.q0.iter().chain(&a.omega0).map(|&x| fmt_f64(x)));
        let (m_cols, msg) = match &r.outcome {
            RunOutcome::Completed(m) => (
                vec![
                    fmt_f64(m.min_margin_deg),
                    fmt_f64(r.violation_depth_deg()),
                    u8::from(r.violated()).to_string(),
                    fmt_f64(m.max_tau_w),
                    fmt_f64(m.max_h_w),
                    m.torque_saturated_steps.to_string(),
                    m.momentum_saturated_steps.to_string(),
                    opt(m.reaching_time),
                    fmt_f64(m.max_sigma_after_reach),
                    opt(m.settling_time),
                    fmt_f64(m.steady_tracking_error),
                    fmt_f64(m.steady_goal_error),
                    fmt_f64(m.final_error_deg),
                    u8::from(m.converged).to_string(),
                    fmt_f64(m.max_omega_star),
                ],
                String::new(),
            ),
            RunOutcome::Failed(msg) => {
                let mut v = vec![String::new(); 15];
                v[1] = fmt_f64(r.violation_depth_deg());
                v[2] = "1".into();
                v[13] = "0".into();
                (v, msg.clone())
            }
        };
        row.extend(m_cols);
        row.push(msg);
        w.write_record(&row).map_err(|e| io(&runs_path, &e))?;
    }
    w.flush().map_err(|e| io(&runs_path, &e))?;

    let sum_path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&sum_path).map_err(|e| io(&sum_path, &e))?;
    let a = &report.aggregates;
    let rows: [(&str, String); 9] = [
        ("seed", report.seed.to_string()),
        ("runs", a.runs.to_string()),
        ("failed", a.failed.to_string()),
        ("violations", a.violations.to_string()),
        ("violation_fraction", fmt_f64(a.violation_fraction)),
        ("max_violation_depth_deg", fmt_f64(a.max_violation_depth_deg)),
        ("converged", a.converged.to_string()),
        ("convergence_rate", fmt_f64(a.convergence_rate)),
        (
            "worst_margin_deg",
            fmt_f64(
                report
                    .runs
                    .iter()
                    .filter_map(|r| r.metrics().map(|m| m.min_margin_deg))
                    .fold(f64::INFINITY, f64::min),
            ),
        ),
    ];
    w.write_record(["key", "value"]).map_err(|e| io(&sum_path, &e))?;
    for (k, v) in rows {
        w.write_record([k, v.as_str()]).map_err(|e| io(&sum_path, &e))?;
    }
    w.flush().map_err(|e| io(&sum_path, &e))?;

    let hist_path = dir.join("histogram.csv");
    let mut w = csv::Writer::from_path(&hist_path).map_err(|e| io(&hist_path, &e))?;
    w.write_record(["depth_lo_deg", "depth_hi_deg", "runs"])
        .map_err(|e| io(&hist_path, &e))?;
    let mut lo = 0.0;
    for (i, &count) in report.aggregates.histogram.iter().enumerate() {
        let (a, b) = match i {
            0 => ("none".to_string(), "none".to_string()),
            _ => {
                let hi = DEPTH_BINS_DEG.get(i - 1).copied().unwrap_or(f64::INFINITY);
                let out = (lo.to_string(), hi.to_string());
                lo = hi;
                out
            }
        };
        w.write_record([a, b, count.to_string()])
            .map_err(|e| io(&hist_path, &e))?;
    }
    w.flush().map_err(|e| io(&hist_path, &e))?;
    Ok(vec![sum_path, runs_path, hist_path])
}

/// Min/max envelopes of quaternion, wheel torque, wheel momentum and zone distance.
pub fn report_svg(report: &CampaignReport, dir: &Path) -> std::result::Result<Vec<PathBuf>, ExportError> {
    let Some(b) = &report.bands else {
        return Err(ExportError::Empty);
    };
    std::fs::create_dir_all(dir).map_err(|e| ExportError::Io {
        path: dir.display().to_string(),
        reason: e.to_string(),
    })?;
    let groups: [(&str, &str, &str, std::ops::Range<usize>); 4] = [
        ("band_quaternion", "Quaternion envelope", "q", 0..4),
        ("band_wheel_torque", "Wheel torque envelope", "N m", 4..8),
        ("band_wheel_momentum", "Wheel momentum envelope", "N m s", 8..12),
        ("band_zone_distance", "Closest zone axis", "deg", 12..13),
    ];
    let floor = report.runs.first().map(|r| floor_deg(&r.config));
    let names: Vec<(String, String)> = BAND_SIGNALS
        .iter()
        .map(|s| (format!("{s} min"), format!("{s} max")))
        .collect();
    let mut out = Vec::new();
    for (file, title, unit, range) in groups {
        let series: Vec<Series> = range
            .clone()
            .flat_map(|s| {
                [
                    Series {
                        name: &names[s].0,
                        y: b.lo.iter().map(|r| r[s]).collect(),
                    },
                    Series {
                        name: &names[s].1,
                        y: b.hi.iter().map(|r| r[s]).collect(),
                    },
                ]
            })
            .collect();
        let guides: Vec<f64> = if range.start == 12 {
            floor.into_iter().collect()
        } else {
            Vec::new()
        };
        let path = dir.join(format!("{file}.svg"));
        line_plot(&path, title, unit, &b.t, &series, &guides)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(n: usize) -> CampaignSpec {
        let base = ScenarioConfig::default()
            .with_overrides(&["duration=20".into()])
            .unwrap();
        CampaignSpec::new(base, n, 11)
    }

    #[test]
    fn zero_ranges_copy_base() {
        let mut spec = short(3);
        spec.ranges = Ranges::zero();
        for cfg in generate_runs(&spec).unwrap() {
            let mut c = cfg.clone();
            c.seed = spec.base.seed;
            assert_eq!(c.attitude, spec.base.attitude);
            assert_eq!(c.zones, spec.base.zones);
            assert_eq!(c.disturbance, spec.base.disturbance);
            assert_eq!(c.inertia, spec.base.inertia);
        }
    }

    #[test]
    fn runs_are_reproducible_and_distinct() {
        let spec = short(6);
        let a = generate_runs(&spec).unwrap();
        assert_eq!(a, generate_runs(&spec).unwrap());
        for c in &a {
            assert_eq!(&c.with_overrides(&[]).unwrap(), c);
        }
        assert_ne!(a[0].attitude, a[1].attitude);
        let mut other = spec.clone();
        other.seed += 1;
        assert_ne!(a, generate_runs(&other).unwrap());
    }

    #[test]
    fn perturbations_stay_in_range() {
        let spec = short(40);
        let base = &spec.base;
        let nominal = Mat3::from_rows(base.inertia.nominal);
        let bound = nominal.abs().scale(0.2);
        for cfg in generate_runs(&spec).unwrap() {
            let ia = Mat3::from_rows(cfg.inertia.actual.unwrap());
            assert!(ia.is_spd(1e-12));
            assert!((ia - nominal).abs().le_elementwise(&bound));
            for (w, w0) in cfg.attitude.omega0.iter().zip(base.attitude.omega0) {
                assert!((w - w0).abs() <= 1e-3);
            }
            for (z, z0) in cfg.zones.iter().zip(&base.zones) {
                let ang = Vec3::from(z.axis).angle_to(&Vec3::from(z0.axis).try_normalize().unwrap());
                assert!(ang <= 15f64.to_radians() + 1e-12);
            }
            for i in 0..3 {
                assert!(cfg.disturbance.bias[i].abs() <= base.disturbance.bias[i].abs());
                assert_eq!(cfg.disturbance.amplitude[i].abs(), base.disturbance.amplitude[i].abs());
            }
            let q = Quaternion::from_array(cfg.attitude.q0).unwrap();
            assert!((q.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_specs_rejected() {
        let mut spec = short(0);
        assert!(generate_runs(&spec).is_err());
        spec.n_runs = 1;
        spec.ranges.inertia_frac = 0.5;
        assert!(generate_runs(&spec).is_err());
    }

    #[test]
    fn histogram_and_failures() {
        let mut spec = short(4);
        // a zero-length boresight makes every run fail at build time
        spec.base.attitude.boresight = [0.0, 0.0, 0.0];
        spec.ranges = Ranges::zero();
        let rep = run_campaign(&spec, 2).unwrap();
        let a = &rep.aggregates;
        assert_eq!(a.failed, 4);
        assert_eq!(a.violations, 4);
        assert_eq!(a.max_violation_depth_deg, 15.0);
        assert_eq!(a.histogram.iter().sum::<usize>(), 4);
        assert!(rep.bands.is_none());
    }

    #[test]
    fn bins() {
        assert_eq!(depth_bin(0.0, false), 0);
        assert_eq!(depth_bin(0.05, true), 1);
        assert_eq!(depth_bin(0.5, true), 3);
        assert_eq!(depth_bin(7.0, true), DEPTH_BINS_DEG.len() + 1);
    }
}
