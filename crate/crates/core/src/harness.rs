//! Monte Carlo experiments: tightness sweeps over SNR, the ESDR-Y/ESDR2-T
//! objective comparison, and solve timing. Concrete in `f64`.
//!
//! Trial `k` at grid point `p` draws from `ChaCha8Rng::seed_from_u64(master)`
//! on stream `(p << 32) | k`, so results do not depend on the worker count.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{derive_problem, sample_instance, MimoInstance};
use crate::scalar::pairwise_sum;
use crate::sdr::{solve_sdr, SdrKind};
use crate::solver::{SolveStatus, SolverConfig};
use crate::tightness::{evaluate_report, TightnessReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `λ_min(H†H)·sin(π/M) > ‖H†v‖_∞`.
    EsdrxSufficient,
    /// The ESDR-X iff condition.
    EsdrxTight,
    /// The ESDR-Y necessary condition.
    EsdryNecessary,
    /// `Re z_i ≥ 0` for every `i`.
    Esdr1Necessary,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Condition::EsdrxSufficient, Condition::EsdrxTight, Condition::EsdryNecessary, Condition::Esdr1Necessary];

    pub fn name(self) -> &'static str {
        match self {
            Condition::EsdrxSufficient => "esdrx_sufficient",
            Condition::EsdrxTight => "esdrx_tight",
            Condition::EsdryNecessary => "esdry_necessary",
            Condition::Esdr1Necessary => "esdr1_necessary",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::InvalidInput(format!("unknown condition {s:?}")))
    }

    pub fn holds(self, r: &TightnessReport) -> bool {
        match self {
            Condition::EsdrxSufficient => r.esdrx_sufficient,
            Condition::EsdrxTight => r.esdrx_tight,
            Condition::EsdryNecessary => r.esdry_necessary,
            Condition::Esdr1Necessary => r.esdr1_necessary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    #[serde(alias = "M")]
    pub order: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials_per_point: usize,
    pub models: Vec<SdrKind>,
    pub conditions: Vec<Condition>,
    pub master_seed: u64,
    pub solver: SolverConfig,
    /// Per-model replacements for `solver`.
    pub solver_overrides: BTreeMap<SdrKind, SolverConfig>,
    /// Thread count; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub output_path: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 16,
            n: 10,
            order: 8,
            snr_grid_db: (1..=8).map(|k| 3.0 * k as f64).collect(),
            trials_per_point: 500,
            models: vec![SdrKind::EsdrX, SdrKind::EsdrY],
            conditions: Condition::ALL.to_vec(),
            master_seed: 0,
            solver: SolverConfig::default(),
            solver_overrides: BTreeMap::new(),
            workers: None,
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return invalid("m and n must be positive");
        }
        if self.trials_per_point == 0 {
            return invalid("trials_per_point must be at least 1");
        }
        if self.snr_grid_db.is_empty() {
            return invalid("SNR grid is empty");
        }
        if !self.conditions.is_empty() && self.order < 4 {
            return invalid("tightness conditions require M >= 4");
        }
        if self.workers == Some(0) {
            return invalid("workers must be positive");
        }
        self.solver.validate()?;
        self.solver_overrides.values().try_for_each(SolverConfig::validate)
    }

    pub fn solver_for(&self, kind: SdrKind) -> &SolverConfig {
        self.solver_overrides.get(&kind).unwrap_or(&self.solver)
    }

    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> Result<R> {
        match self.workers {
            None => Ok(f()),
            Some(k) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build()
                    .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }
}

/// Seeded generator of trial `trial` at grid point `point`.
pub fn trial_rng(master_seed: u64, point: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}

pub fn trial_instance(cfg: &ExperimentConfig, point: usize, trial: usize) -> Result<MimoInstance<f64>> {
    let snr = cfg.snr_grid_db[point];
    let mut inst = sample_instance::<f64, _>(cfg.m, cfg.n, cfg.order, snr, &mut trial_rng(cfg.master_seed, point, trial))?;
    inst.seed = Some(cfg.master_seed);
    Ok(inst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub kind: SdrKind,
    /// `None` when the solve raised an error.
    pub status: Option<SolveStatus>,
    /// Relaxation objective without `r†r`.
    pub objective: f64,
    pub tight: bool,
    pub margin: f64,
    pub iterations: usize,
    pub seconds: f64,
    pub error: Option<String>,
}

impl ModelOutcome {
    pub fn solved(&self) -> bool {
        self.status == Some(SolveStatus::Solved)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: usize,
    pub snr_db: f64,
    pub r_norm2: f64,
    pub report: Option<TightnessReport>,
    pub models: Vec<ModelOutcome>,
}

impl TrialRecord {
    pub fn outcome(&self, kind: SdrKind) -> Option<&ModelOutcome> {
        self.models.iter().find(|o| o.kind == kind)
    }
}

fn solve_one(kind: SdrKind, inst: &MimoInstance<f64>, pd: &crate::model::ProblemData<f64>, cfg: &SolverConfig) -> ModelOutcome {
    let start = Instant::now();
    let res = solve_sdr(kind, inst, pd, cfg);
    let seconds = start.elapsed().as_secs_f64();
    match res {
        Ok(s) => ModelOutcome {
            kind,
            status: Some(s.status),
            objective: s.objective,
            tight: s.tight,
            margin: s.margin,
            iterations: s.iterations,
            seconds,
            error: None,
        },
        Err(e) => ModelOutcome {
            kind,
            status: None,
            objective: f64::NAN,
            tight: false,
            margin: f64::NAN,
            iterations: 0,
            seconds,
            error: Some(e.to_string()),
        },
    }
}

/// One trial: sample, derive, evaluate the conditions, solve each model.
pub fn run_trial(cfg: &ExperimentConfig, point: usize, trial: usize) -> Result<TrialRecord> {
    let inst = trial_instance(cfg, point, trial)?;
    let pd = derive_problem(&inst);
    let report = if cfg.conditions.is_empty() { None } else { Some(evaluate_report(&inst, &pd)?) };
    let models = cfg.models.iter().map(|&k| solve_one(k, &inst, &pd, cfg.solver_for(k))).collect();
    Ok(TrialRecord { point, trial, snr_db: inst.snr_db, r_norm2: pd.r_norm2, report, models })
}

/// Every trial of the sweep, ordered by grid point then trial index.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..cfg.snr_grid_db.len()).flat_map(|p| (0..cfg.trials_per_point).map(move |k| (p, k))).collect();
    cfg.run(|| jobs.par_iter().map(|&(p, k)| run_trial(cfg, p, k)).collect::<Result<Vec<_>>>())?
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelStats {
    pub kind: SdrKind,
    pub solved: usize,
    /// Trials whose solve errored or stopped before convergence.
    pub failed: usize,
    pub tight: usize,
    /// `tight / solved`.
    pub tight_freq: f64,
    pub mean_objective: f64,
    pub mean_iterations: f64,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionStats {
    pub condition: Condition,
    pub count: usize,
    pub freq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub trials: usize,
    pub models: Vec<ModelStats>,
    pub conditions: Vec<ConditionStats>,
    /// Sum of per-trial solve times at this grid point.
    pub wall_seconds: f64,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        pairwise_sum(values) / values.len() as f64
    }
}

/// Per-grid-point frequencies and means; only solved trials enter the model
/// statistics.
pub fn aggregate(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SweepRow> {
    cfg.snr_grid_db
        .iter()
        .enumerate()
        .map(|(p, &snr_db)| {
            let here: Vec<&TrialRecord> = records.iter().filter(|r| r.point == p).collect();
            let models = cfg
                .models
                .iter()
                .map(|&kind| {
                    let outs: Vec<&ModelOutcome> = here.iter().filter_map(|r| r.outcome(kind)).collect();
                    let ok: Vec<&&ModelOutcome> = outs.iter().filter(|o| o.solved()).collect();
                    let tight = ok.iter().filter(|o| o.tight).count();
                    ModelStats {
                        kind,
                        solved: ok.len(),
                        failed: outs.len() - ok.len(),
                        tight,
                        tight_freq: if ok.is_empty() { f64::NAN } else { tight as f64 / ok.len() as f64 },
                        mean_objective: mean(&ok.iter().map(|o| o.objective).collect::<Vec<_>>()),
                        mean_iterations: mean(&ok.iter().map(|o| o.iterations as f64).collect::<Vec<_>>()),
                        mean_seconds: mean(&outs.iter().map(|o| o.seconds).collect::<Vec<_>>()),
                    }
                })
                .collect();
            let conditions = cfg
                .conditions
                .iter()
                .map(|&c| {
                    let count = here.iter().filter(|r| r.report.is_some_and(|rep| c.holds(&rep))).count();
                    ConditionStats { condition: c, count, freq: count as f64 / here.len().max(1) as f64 }
                })
                .collect();
            let times: Vec<f64> = here.iter().flat_map(|r| r.models.iter().map(|o| o.seconds)).collect();
            SweepRow { snr_db, trials: here.len(), models, conditions, wall_seconds: pairwise_sum(&times) }
        })
        .collect()
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let records = run_trials(cfg)?;
    Ok(aggregate(cfg, &records))
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns: `snr_db,trials`, then per model `<model>_{solved,failed,tight_freq,
/// mean_objective,mean_iterations,mean_seconds}`, then per condition
/// `<condition>_freq`, then `wall_seconds`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    let Some(first) = rows.first() else { return Ok(()) };
    let mut header = vec!["snr_db".to_string(), "trials".to_string()];
    for m in &first.models {
        for f in ["solved", "failed", "tight_freq", "mean_objective", "mean_iterations", "mean_seconds"] {
            header.push(format!("{}_{f}", m.kind));
        }
    }
    header.extend(first.conditions.iter().map(|c| format!("{}_freq", c.condition.name())));
    header.push("wall_seconds".into());
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut cells = vec![fmt_f(r.snr_db), r.trials.to_string()];
        for m in &r.models {
            cells.extend([
                m.solved.to_string(),
                m.failed.to_string(),
                fmt_f(m.tight_freq),
                fmt_f(m.mean_objective),
                fmt_f(m.mean_iterations),
                fmt_f(m.mean_seconds),
            ]);
        }
        cells.extend(r.conditions.iter().map(|c| fmt_f(c.freq)));
        cells.push(fmt_f(r.wall_seconds));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivRow {
    pub m: usize,
    pub n: usize,
    pub snr_db: f64,
    /// Trials where both models solved.
    pub trials: usize,
    pub failed: usize,
    /// Mean of `|opt_Y − opt_2T| / |opt_2T|`.
    pub mean_rel_diff: f64,
    pub max_rel_diff: f64,
}

/// ESDR-Y against ESDR2-T on every `(m, n)` of `shapes` and every SNR of the
/// grid; `cfg.m`, `cfg.n` and `cfg.models` are ignored.
pub fn run_equivalence_table(cfg: &ExperimentConfig, shapes: &[(usize, usize)]) -> Result<Vec<EquivRow>> {
    let mut rows = Vec::new();
    for &(m, n) in shapes {
        let sub = ExperimentConfig { m, n, models: vec![SdrKind::EsdrY, SdrKind::Esdr2T], conditions: vec![], ..cfg.clone() };
        let records = run_trials(&sub)?;
        for (p, &snr_db) in sub.snr_grid_db.iter().enumerate() {
            let mut diffs = Vec::new();
            let mut failed = 0;
            for r in records.iter().filter(|r| r.point == p) {
                match (r.outcome(SdrKind::EsdrY), r.outcome(SdrKind::Esdr2T)) {
                    (Some(y), Some(t)) if y.solved() && t.solved() => {
                        diffs.push((y.objective - t.objective).abs() / t.objective.abs());
                    }
                    _ => failed += 1,
                }
            }
            rows.push(EquivRow {
                m,
                n,
                snr_db,
                trials: diffs.len(),
                failed,
                mean_rel_diff: mean(&diffs),
                max_rel_diff: diffs.iter().copied().fold(f64::NAN, f64::max),
            });
        }
    }
    Ok(rows)
}

pub fn write_equivalence_csv<W: Write>(rows: &[EquivRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "m,n,snr_db,trials,failed,mean_rel_diff,max_rel_diff")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.m,
            r.n,
            fmt_f(r.snr_db),
            r.trials,
            r.failed,
            fmt_f(r.mean_rel_diff),
            fmt_f(r.max_rel_diff)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingEntry {
    pub kind: SdrKind,
    pub mean_seconds: f64,
    pub mean_iterations: f64,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub trials: usize,
    pub entries: Vec<TimingEntry>,
    /// `time(ESDR2-T) / time(ESDR-Y)` when both were timed.
    pub ratio_2t_over_y: Option<f64>,
}

/// Mean solve time per model for each `n`, at the first SNR of the grid.
/// Runs sequentially so the timings do not compete for cores.
pub fn run_timing(cfg: &ExperimentConfig, n_values: &[usize]) -> Result<Vec<TimingRow>> {
    let mut rows = Vec::new();
    for &n in n_values {
        let sub = ExperimentConfig { n, conditions: vec![], snr_grid_db: vec![cfg.snr_grid_db[0]], workers: Some(1), ..cfg.clone() };
        let records = run_trials(&sub)?;
        let entries: Vec<TimingEntry> = sub
            .models
            .iter()
            .map(|&kind| {
                let outs: Vec<&ModelOutcome> = records.iter().filter_map(|r| r.outcome(kind)).collect();
                TimingEntry {
                    kind,
                    mean_seconds: mean(&outs.iter().map(|o| o.seconds).collect::<Vec<_>>()),
                    mean_iterations: mean(&outs.iter().map(|o| o.iterations as f64).collect::<Vec<_>>()),
                    failed: outs.iter().filter(|o| !o.solved()).count(),
                }
            })
            .collect();
        let time_of = |k: SdrKind| entries.iter().find(|e| e.kind == k).map(|e| e.mean_seconds);
        let ratio = time_of(SdrKind::Esdr2T).zip(time_of(SdrKind::EsdrY)).map(|(a, b)| a / b);
        rows.push(TimingRow { n, trials: records.len(), entries, ratio_2t_over_y: ratio });
    }
    Ok(rows)
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], mut w: W) -> std::io::Result<()> {
    let Some(first) = rows.first() else { return Ok(()) };
    let mut header = vec!["n".to_string(), "trials".to_string()];
    for e in &first.entries {
        header.extend(["mean_seconds", "mean_iterations", "failed"].map(|f| format!("{}_{f}", e.kind)));
    }
    header.push("ratio_2t_over_y".into());
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut cells = vec![r.n.to_string(), r.trials.to_string()];
        for e in &r.entries {
            cells.extend([fmt_f(e.mean_seconds), fmt_f(e.mean_iterations), e.failed.to_string()]);
        }
        cells.push(r.ratio_2t_over_y.map(fmt_f).unwrap_or_default());
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            m: 4,
            n: 2,
            order: 4,
            snr_grid_db: vec![10.0, 60.0],
            trials_per_point: 4,
            models: vec![SdrKind::EsdrX],
            master_seed: 11,
            solver: SolverConfig::default().with_eps(1e-7),
            ..Default::default()
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let one = ExperimentConfig { workers: Some(1), ..small() };
        let two = ExperimentConfig { workers: Some(2), ..small() };
        let strip = |rs: Vec<TrialRecord>| -> Vec<_> {
            rs.into_iter().map(|r| (r.point, r.trial, r.report, r.models.iter().map(|o| (o.objective, o.iterations)).collect::<Vec<_>>())).collect()
        };
        assert_eq!(strip(run_trials(&one).unwrap()), strip(run_trials(&two).unwrap()));
    }

    #[test]
    fn high_snr_is_always_tight() {
        let rows = run_sweep(&small()).unwrap();
        assert_eq!(rows.len(), 2);
        let hi = &rows[1];
        assert_eq!(hi.models[0].tight_freq, 1.0);
        assert_eq!(hi.conditions.iter().find(|c| c.condition == Condition::EsdrxTight).unwrap().freq, 1.0);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("snr_db,trials,ESDR-X_solved"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn trial_seeds_are_independent_streams() {
        let a = trial_instance(&small(), 0, 0).unwrap();
        let b = trial_instance(&small(), 0, 1).unwrap();
        let c = trial_instance(&small(), 0, 0).unwrap();
        assert_ne!(a.h, b.h);
        assert_eq!(a.h, c.h);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig { trials_per_point: 0, ..small() }.validate().is_err());
        assert!(ExperimentConfig { snr_grid_db: vec![], ..small() }.validate().is_err());
        assert!(ExperimentConfig { order: 2, ..small() }.validate().is_err());
        assert!(ExperimentConfig { order: 2, conditions: vec![], ..small() }.validate().is_ok());
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut cfg = small();
        cfg.solver_overrides.insert(SdrKind::Esdr1T, SolverConfig::default().with_eps(1e-5));
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
        assert_eq!(cfg.solver_for(SdrKind::Esdr1T).eps_gap, 1e-5);
        assert_eq!(cfg.solver_for(SdrKind::EsdrX).eps_gap, 1e-7);
    }

    #[test]
    fn equivalence_and_timing_tables() {
        let cfg = ExperimentConfig { snr_grid_db: vec![10.0], trials_per_point: 2, ..small() };
        let eq = run_equivalence_table(&cfg, &[(3, 2)]).unwrap();
        assert_eq!(eq.len(), 1);
        assert!(eq[0].mean_rel_diff < 1e-4, "{eq:?}");
        let t = run_timing(&ExperimentConfig { models: vec![SdrKind::EsdrY], ..cfg }, &[2]).unwrap();
        assert_eq!(t[0].entries.len(), 1);
        assert!(t[0].ratio_2t_over_y.is_none());
        let mut buf = Vec::new();
        write_timing_csv(&t, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,trials,ESDR-Y_mean_seconds"));
    }
}
