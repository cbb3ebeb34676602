use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mimo_sdr::equivalence::{binary_weight_matrix, find_partition, lift, restrict};
use mimo_sdr::harness::{
    aggregate, run_equivalence_table, run_timing, run_trials, write_equivalence_csv, write_sweep_csv, write_timing_csv,
    Condition, ExperimentConfig,
};
use mimo_sdr::io::{read_json, to_json, DecomposedDoc, InstanceDoc, LiftedDoc, PartitionDoc, SolutionDoc};
use mimo_sdr::linalg::Mat;
use mimo_sdr::model::{derive_problem, make_symbol_set, sample_instance, shat_matrix};
use mimo_sdr::oracle::brute_force_ml;
use mimo_sdr::sdr::{solve_sdr, SdrKind};
use mimo_sdr::tightness::evaluate_report;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CSV_HELP: &str = "\
CSV output (header row always written, floats with 17 significant digits):

  simulate     snr_db, trials,
               per model: <model>_solved, <model>_failed, <model>_tight_freq,
                          <model>_mean_objective, <model>_mean_iterations, <model>_mean_seconds
               per condition: <condition>_freq
               wall_seconds (sum of solve times at that SNR)
  equiv-table  m, n, snr_db, trials, failed, mean_rel_diff, max_rel_diff
  timing       n, trials,
               per model: <model>_mean_seconds, <model>_mean_iterations, <model>_failed
               ratio_2t_over_y

Models: CSDR, ESDR-X, ESDR-Y, ESDR1-T, ESDR2-T.
Conditions: esdrx_sufficient, esdrx_tight, esdry_necessary, esdr1_necessary.
Mean objectives exclude the constant r†r.";

#[derive(Parser)]
#[command(name = "mimo-sdr", version, about = "Semidefinite relaxations of M-PSK MIMO detection", after_help = CSV_HELP)]
struct Cli {
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML file with ExperimentConfig fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo sweep over the SNR grid, one CSV row per SNR.
    Simulate {
        #[command(flatten)]
        exp: ExpArgs,
        /// Models to solve, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
        models: Option<Vec<SdrKind>>,
        /// Conditions to evaluate, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_condition)]
        conditions: Option<Vec<Condition>>,
        /// Also write every trial as JSON lines here.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// ESDR-Y against ESDR2-T optimal values per shape and SNR.
    EquivTable {
        #[command(flatten)]
        exp: ExpArgs,
        /// Shapes as MxN, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_shape, default_value = "4x4,6x4")]
        shapes: Vec<(usize, usize)>,
    },
    /// Mean solve time per model as n grows, at the first SNR of the grid.
    Timing {
        #[command(flatten)]
        exp: ExpArgs,
        #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
        n_values: Vec<usize>,
        #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_value = "ESDR-Y,ESDR2-T")]
        models: Vec<SdrKind>,
    },
    /// Sample one instance as JSON.
    Generate {
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "order", short = 'M', default_value_t = 8)]
        order: usize,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
    },
    /// Tightness conditions of an instance, as JSON.
    Check {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Solve one relaxation of an instance, as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_kind, default_value = "ESDR-Y")]
        model: SdrKind,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Exhaustive ML detection of an instance, as JSON.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Separable partition of a lifting matrix, as JSON.
    Partition {
        /// Symbol matrix of N antennas and order M, given as N:M.
        #[arg(long, value_parser = parse_pair, conflicts_with_all = ["binary", "matrix"])]
        shat: Option<(usize, usize)>,
        /// Binary weight matrix of Q bits and N antennas, given as Q:N.
        #[arg(long, value_parser = parse_pair, conflicts_with = "matrix")]
        binary: Option<(usize, usize)>,
        /// JSON file holding a list of rows.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Lift a decomposed point through a partition.
    Lift {
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Restrict a lifted point to the groups of a partition.
    Restrict {
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "order", short = 'M')]
    order: Option<usize>,
    /// SNR grid in dB, comma separated.
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Solver tolerance for primal, dual and gap residuals.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

fn parse_kind(s: &str) -> Result<SdrKind, String> {
    SdrKind::parse(s).map_err(|e| e.to_string())
}

fn parse_condition(s: &str) -> Result<Condition, String> {
    Condition::parse(s).map_err(|e| e.to_string())
}

fn parse_shape(s: &str) -> Result<(usize, usize), String> {
    split_pair(s, 'x')
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    split_pair(s, ':')
}

fn split_pair(s: &str, sep: char) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(sep).ok_or_else(|| format!("expected A{sep}B, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    Ok(cfg)
}

impl ExpArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.order {
            cfg.order = v;
        }
        if let Some(v) = &self.snr {
            cfg.snr_grid_db = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.trials_per_point = v;
        }
        if let Some(e) = self.eps {
            cfg.solver.eps_primal = e;
            cfg.solver.eps_dual = e;
            cfg.solver.eps_gap = e;
        }
        if let Some(k) = self.max_iters {
            cfg.solver.max_iters = k;
        }
    }
}

fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn emit_json<S: serde::Serialize>(out: Option<&Path>, value: &S) -> Result<()> {
    let mut w = open_out(out)?;
    writeln!(w, "{}", to_json(value)?)?;
    w.flush()?;
    Ok(())
}

fn load_instance(path: &Path) -> Result<mimo_sdr::Instance> {
    let doc: InstanceDoc = read_json(path)?;
    Ok(doc.to_instance()?)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = load_config(&cli)?;
    let out = cli.out.as_deref().or(cfg.output_path.as_deref().map(Path::new)).map(Path::to_path_buf);
    let out = out.as_deref();
    match &cli.cmd {
        Cmd::Simulate { exp, models, conditions, records } => {
            exp.apply(&mut cfg);
            if let Some(m) = models {
                cfg.models = m.clone();
            }
            if let Some(c) = conditions {
                cfg.conditions = c.clone();
            }
            let recs = run_trials(&cfg)?;
            let rows = aggregate(&cfg, &recs);
            if let Some(path) = records {
                let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
                for r in &recs {
                    writeln!(w, "{}", serde_json::to_string(r)?)?;
                }
                w.flush()?;
            }
            let mut w = open_out(out)?;
            write_sweep_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Cmd::EquivTable { exp, shapes } => {
            exp.apply(&mut cfg);
            let rows = run_equivalence_table(&cfg, shapes)?;
            let mut w = open_out(out)?;
            write_equivalence_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Cmd::Timing { exp, n_values, models } => {
            exp.apply(&mut cfg);
            cfg.models = models.clone();
            let rows = run_timing(&cfg, n_values)?;
            let mut w = open_out(out)?;
            write_timing_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Cmd::Generate { m, n, order, snr_db } => {
            let seed = cli.seed.unwrap_or(cfg.master_seed);
            let mut inst = sample_instance::<f64, _>(*m, *n, *order, *snr_db, &mut ChaCha8Rng::seed_from_u64(seed))?;
            inst.seed = Some(seed);
            emit_json(out, &InstanceDoc::from_instance(&inst))?;
        }
        Cmd::Check { instance } => {
            let inst = load_instance(instance)?;
            let pd = derive_problem(&inst);
            emit_json(out, &evaluate_report(&inst, &pd)?)?;
        }
        Cmd::Solve { instance, model, eps, max_iters } => {
            let inst = load_instance(instance)?;
            let pd = derive_problem(&inst);
            let mut sc = *cfg.solver_for(*model);
            if let Some(e) = eps {
                sc.eps_primal = *e;
                sc.eps_dual = *e;
                sc.eps_gap = *e;
            }
            if let Some(k) = max_iters {
                sc.max_iters = *k;
            }
            sc.validate()?;
            let sol = solve_sdr(*model, &inst, &pd, &sc)?;
            emit_json(out, &SolutionDoc::from_solution(&sol, pd.r_norm2))?;
        }
        Cmd::Oracle { instance } => {
            emit_json(out, &brute_force_ml(&load_instance(instance)?)?)?;
        }
        Cmd::Partition { shat, binary, matrix } => {
            let p: Mat<f64> = match (shat, binary, matrix) {
                (Some((n, order)), _, _) => shat_matrix(&make_symbol_set::<f64>(*order)?, *n),
                (_, Some((q, n)), _) => binary_weight_matrix::<f64>(*q, *n),
                (_, _, Some(path)) => Mat::from_rows(&read_json::<Vec<Vec<f64>>>(path)?)?,
                _ => bail!("one of --shat, --binary or --matrix is required"),
            };
            emit_json(out, &PartitionDoc::from_partition(&find_partition(&p)))?;
        }
        Cmd::Lift { partition, point } => {
            let part = read_json::<PartitionDoc>(partition)?.to_partition()?;
            let point = read_json::<DecomposedDoc>(point)?.to_point()?;
            emit_json(out, &LiftedDoc::from_point(&lift(&point, &part)?))?;
        }
        Cmd::Restrict { partition, point } => {
            let part = read_json::<PartitionDoc>(partition)?.to_partition()?;
            let lifted = read_json::<LiftedDoc>(point)?.to_point()?;
            let p = part.matrix();
            if lifted.t.len() != p.cols() {
                bail!("point has dimension {}, partition expects {}", lifted.t.len(), p.cols());
            }
            let y = p.mul_vec(&lifted.t);
            let yy = lifted.tt.congruence(&p);
            emit_json(out, &DecomposedDoc::from_point(&restrict(&lifted, &part, &y, &yy)?))?;
        }
    }
    Ok(())
}
