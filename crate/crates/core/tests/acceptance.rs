//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs every criterion by default; pass criterion numbers as arguments
//! (`cargo test --test acceptance -- 2 5`) to run a subset.

use std::collections::BTreeMap;
use std::time::Instant;

use mimo_sdr::equivalence::{
    antenna_partition, bc_groups, binary_weight_matrix, binary_weights, esdr2t_objective, esdr2t_to_esdry, esdr2t_violation,
    esdry_groups, esdry_objective, esdry_to_esdr2t, find_partition, lift, lifted_residuals, restrict, va_violation,
    weight_interval, weight_witness, DecomposedPoint, SeparablePartition,
};
use mimo_sdr::harness::{run_equivalence_table, run_timing, run_trials, trial_instance, Condition, ExperimentConfig, TrialRecord};
use mimo_sdr::linalg::{is_psd, Mat, SymMatrix};
use mimo_sdr::model::{compute_z, derive_problem, make_symbol_set, nearest_symbols, one_hot, shat_matrix, ProblemData};
use mimo_sdr::oracle::brute_force_ml;
use mimo_sdr::sdr::{solve_sdr, SdrKind};
use mimo_sdr::solver::SolverConfig;
use mimo_sdr::tightness::evaluate_report;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// ESDR1-T stalls a little above 1e-9 on first-order methods; 1e-7 keeps
/// the 1e-6 and 1e-5 checks meaningful.
fn solver_overrides() -> BTreeMap<SdrKind, SolverConfig> {
    BTreeMap::from([(SdrKind::Esdr1T, SolverConfig::default().with_eps(1e-7))])
}

fn rel_le(a: f64, b: f64, slack: f64) -> bool {
    a <= b + slack * b.abs().max(1.0)
}

/// Condition implications on 10⁴ instances.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let shapes = [(8, 4, 4), (8, 4, 8), (16, 10, 4), (16, 10, 8)];
    let per_point = 313;
    let mut total = 0;
    let mut violations = 0;
    let mut counts = [0usize; 3];
    for (k, &(m, n, order)) in shapes.iter().enumerate() {
        let cfg = ExperimentConfig {
            m,
            n,
            order,
            snr_grid_db: (1..=8).map(|j| 3.0 * j as f64).collect(),
            trials_per_point: per_point,
            master_seed: 1000 + k as u64,
            ..Default::default()
        };
        let jobs: Vec<(usize, usize)> = (0..8).flat_map(|p| (0..per_point).map(move |t| (p, t))).collect();
        let reports: Vec<_> = jobs
            .par_iter()
            .map(|&(p, t)| {
                let inst = trial_instance(&cfg, p, t).unwrap();
                evaluate_report(&inst, &derive_problem(&inst)).unwrap()
            })
            .collect();
        for r in reports {
            total += 1;
            counts[0] += r.esdrx_sufficient as usize;
            counts[1] += r.esdrx_tight as usize;
            counts[2] += r.esdry_necessary as usize;
            if (r.esdrx_sufficient && !r.esdrx_tight) || (r.esdrx_tight && !r.esdry_necessary) {
                violations += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        violations == 0 && total >= 10_000 && secs < 120.0,
        format!(
            "{total} instances, {violations} violations, holds: sufficient {} / tight {} / necessary {}, {secs:.1}s (limit 120s)",
            counts[0], counts[1], counts[2]
        ),
    )
}

fn sweep_config() -> ExperimentConfig {
    ExperimentConfig {
        m: 16,
        n: 10,
        order: 8,
        snr_grid_db: vec![3.0, 9.0, 15.0, 21.0],
        trials_per_point: 500,
        models: vec![SdrKind::EsdrX, SdrKind::EsdrY],
        conditions: vec![Condition::EsdrxTight, Condition::EsdryNecessary],
        master_seed: 2024,
        solver: SolverConfig::default(),
        ..Default::default()
    }
}

/// ESDR-X tightness against its iff condition.
fn criterion_2(records: &[TrialRecord], secs: f64) -> Outcome {
    let cfg = sweep_config();
    let mut pass = secs < 1800.0;
    let mut lines = Vec::new();
    let (mut agree, mut solved_total, mut failed_total) = (0, 0, 0);
    for (p, snr) in cfg.snr_grid_db.iter().enumerate() {
        let here: Vec<&TrialRecord> = records.iter().filter(|r| r.point == p).collect();
        let ok: Vec<&&TrialRecord> = here.iter().filter(|r| r.outcome(SdrKind::EsdrX).unwrap().solved()).collect();
        let failed = here.len() - ok.len();
        let tight = ok.iter().filter(|r| r.outcome(SdrKind::EsdrX).unwrap().tight).count();
        let cond = ok.iter().filter(|r| r.report.unwrap().esdrx_tight).count();
        let same = ok.iter().filter(|r| r.outcome(SdrKind::EsdrX).unwrap().tight == r.report.unwrap().esdrx_tight).count();
        let diff = (tight as f64 - cond as f64).abs() / ok.len().max(1) as f64;
        pass &= diff <= 0.02 && (failed as f64) < 0.01 * here.len() as f64;
        agree += same;
        solved_total += ok.len();
        failed_total += failed;
        lines.push(format!("{snr} dB: tight {tight}/{} cond {cond} |diff| {diff:.4}", ok.len()));
    }
    let rate = agree as f64 / solved_total.max(1) as f64;
    pass &= rate >= 0.99;
    outcome(
        pass,
        format!(
            "{}; per-trial agreement {rate:.4} (min 0.99), failed {failed_total}, {secs:.0}s (limit 1800s)",
            lines.join("; ")
        ),
    )
}

/// ESDR-Y tight implies its necessary condition.
fn criterion_3(records: &[TrialRecord]) -> Outcome {
    let mut solved = 0;
    let mut tight = 0;
    let mut counter = 0;
    for r in records {
        let y = r.outcome(SdrKind::EsdrY).unwrap();
        if !y.solved() {
            continue;
        }
        solved += 1;
        if y.tight {
            tight += 1;
            if !r.report.unwrap().esdry_necessary {
                counter += 1;
            }
        }
    }
    outcome(counter == 0 && solved > 0, format!("{solved} solved, {tight} tight, {counter} counterexamples"))
}

/// ESDR1-T is never tight, and the sign event has probability (1/2)ⁿ.
fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut solver = SolverConfig::default().with_eps(1e-5);
    solver.max_iters = 20_000;
    let cfg = ExperimentConfig {
        m: 16,
        n: 10,
        order: 8,
        snr_grid_db: vec![24.0],
        trials_per_point: 500,
        models: vec![SdrKind::Esdr1T],
        conditions: vec![Condition::Esdr1Necessary],
        master_seed: 4004,
        solver,
        ..Default::default()
    };
    let records = run_trials(&cfg).unwrap();
    let outs: Vec<_> = records.iter().map(|r| r.outcome(SdrKind::Esdr1T).unwrap()).collect();
    let solved = outs.iter().filter(|o| o.solved()).count();
    let tight = outs.iter().filter(|o| o.tight).count();
    let min_margin = outs.iter().filter(|o| o.solved()).map(|o| o.margin).fold(f64::INFINITY, f64::min);

    let trials = 10_000;
    let ev = ExperimentConfig { trials_per_point: trials, master_seed: 4005, conditions: vec![], ..cfg.clone() };
    let events: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = trial_instance(&ev, 0, t).unwrap();
            compute_z(&inst).iter().all(|z| z.re >= 0.0) as usize
        })
        .sum();
    let p = 0.5f64.powi(cfg.n as i32);
    let mean = trials as f64 * p;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    let within = (events as f64 - mean).abs() <= 3.0 * sd;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        tight == 0 && within && solved * 100 >= 99 * outs.len(),
        format!(
            "tight {tight}/{} ({solved} solved, eps 1e-5, min margin {min_margin:.3e}); sign event {events}/{trials}, expected {mean:.2} ± 3·{sd:.2}; {secs:.0}s",
            outs.len()
        ),
    )
}

/// ESDR-Y and ESDR2-T optimal values agree; the structural maps preserve
/// objectives exactly.
fn criterion_5() -> Outcome {
    let cfg = ExperimentConfig {
        order: 8,
        snr_grid_db: vec![5.0, 10.0, 15.0],
        trials_per_point: 30,
        master_seed: 5005,
        // the ESDR2-T feasible set has no interior point, so the first-order
        // tail is long
        solver: SolverConfig { max_iters: 200_000, ..SolverConfig::default().with_eps(1e-8) },
        ..Default::default()
    };
    let rows = run_equivalence_table(&cfg, &[(4, 4), (6, 4)]).unwrap();
    let mut pass = true;
    let mut cells = Vec::new();
    let (mut failed, mut trials) = (0, 0);
    for r in &rows {
        pass &= r.mean_rel_diff <= 1e-5;
        failed += r.failed;
        trials += r.failed + r.trials;
        cells.push(format!("({},{}) {} dB {:.2e}", r.m, r.n, r.snr_db, r.mean_rel_diff));
    }
    pass &= failed * 100 < trials;

    // both structural maps on sampled ESDR2-T-feasible points
    let mut worst_map = 0.0f64;
    let mut map_failures = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(5006);
    let mut mapped = 0;
    for (k, &(m, n)) in [(4, 4), (6, 4)].iter().enumerate() {
        for t in 0..30 {
            let inst = trial_instance(&ExperimentConfig { m, n, ..cfg.clone() }, k, t).unwrap();
            let pd = derive_problem(&inst);
            for _ in 0..4 {
                mapped += 1;
                let (tv, ttm) = random_simplex_point(&pd, &mut rng);
                let f = esdr2t_objective(&pd, &tv, &ttm);
                let Ok((y, yy)) = esdr2t_to_esdry(&tv, &ttm, &pd) else {
                    map_failures += 1;
                    continue;
                };
                worst_map = worst_map.max(rel_gap(esdry_objective(&pd, &y, &yy), f));
                match esdry_to_esdr2t(&y, &yy, &pd) {
                    Ok((t2, tt2)) => worst_map = worst_map.max(rel_gap(esdr2t_objective(&pd, &t2, &tt2), f)),
                    Err(_) => map_failures += 1,
                }
            }
        }
    }
    pass &= worst_map <= 1e-9 && map_failures == 0;
    outcome(
        pass,
        format!("mean rel diff {} (limit 1e-5), failed {failed}/{trials}; {mapped} mapped points, objective gap {worst_map:.2e} (limit 1e-9), map failures {map_failures}", cells.join(", ")),
    )
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn random_simplex_point(pd: &ProblemData<f64>, rng: &mut ChaCha8Rng) -> (Vec<f64>, SymMatrix<f64>) {
    let d = pd.dim_t();
    let k = rng.random_range(1..7);
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut t = vec![0.0; d];
    let mut tt = SymMatrix::zeros(d);
    for wi in &w {
        let u: Vec<usize> = (0..pd.n).map(|_| rng.random_range(0..pd.order)).collect();
        let v = one_hot::<f64>(&u, pd.order);
        t.iter_mut().zip(&v).for_each(|(a, b)| *a += wi / total * b);
        tt = tt.add(&SymMatrix::outer(&v).scale(wi / total));
    }
    (t, tt)
}

struct LiftCheck {
    residual: f64,
    round_trip: f64,
    feasibility: f64,
}

fn check_lift(point: &DecomposedPoint<f64>, part: &SeparablePartition<f64>) -> Result<(LiftCheck, Vec<f64>, SymMatrix<f64>), String> {
    let lifted = lift(point, part).map_err(|e| e.to_string())?;
    let res = lifted_residuals(&lifted, part, &point.y, &point.yy, Some(&point.groups)).map_err(|e| e.to_string())?;
    let back = restrict(&lifted, part, &point.y, &point.yy).map_err(|e| e.to_string())?;
    let mut rt = 0.0f64;
    for ((a, am), (b, bm)) in back.groups.iter().zip(&point.groups) {
        rt = a.iter().zip(b).fold(rt, |m, (x, y)| m.max((x - y).abs()));
        rt = rt.max(am.sub(bm).max_abs());
    }
    Ok((LiftCheck { residual: res.max(), round_trip: rt, feasibility: 0.0 }, lifted.t, lifted.tt))
}

/// The constructive lift on Ŝ and W partitions.
fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    let mut failures = 0;
    let mut worst = LiftCheck { residual: 0.0, round_trip: 0.0, feasibility: 0.0 };
    let mut shapes = 0;
    let note = |c: Result<LiftCheck, String>, worst: &mut LiftCheck, failures: &mut usize| match c {
        Ok(c) => {
            worst.residual = worst.residual.max(c.residual);
            worst.round_trip = worst.round_trip.max(c.round_trip);
            worst.feasibility = worst.feasibility.max(c.feasibility);
            if c.residual > 1e-6 || c.round_trip > 1e-8 || c.feasibility > 1e-6 {
                *failures += 1;
            }
        }
        Err(_) => *failures += 1,
    };
    for n in 1..=3 {
        for order in [4, 8] {
            shapes += 2;
            let inst = trial_instance(&ExperimentConfig { m: n + 2, n, order, snr_grid_db: vec![10.0], ..Default::default() }, 0, n * 10 + order)
                .unwrap();
            let pd = derive_problem(&inst);
            let antenna = antenna_partition(&pd).unwrap();
            let finest = find_partition(&shat_matrix(&make_symbol_set::<f64>(order).unwrap(), n));
            for _ in 0..100 {
                let (t, tt) = random_simplex_point(&pd, &mut rng);
                let (y, yy) = esdr2t_to_esdry(&t, &tt, &pd).unwrap();
                // per-antenna hull weights, independent of the generating (t, T)
                let c = esdry_groups(&pd, &y, &yy).map_err(|e| e.to_string()).and_then(|groups| {
                    let point = DecomposedPoint { y: y.clone(), yy: yy.clone(), groups };
                    let (mut c, lt, ltt) = check_lift(&point, &antenna)?;
                    c.feasibility = esdr2t_violation(&pd, &lt, &ltt).map_err(|e| e.to_string())?;
                    Ok(c)
                });
                note(c, &mut worst, &mut failures);
                // finest partition, groups restricted from (t, T)
                let groups = finest.col_groups.iter().map(|b| (b.iter().map(|&c| t[c]).collect(), tt.principal(b))).collect();
                let point = DecomposedPoint { y: y.clone(), yy: yy.clone(), groups };
                note(check_lift(&point, &finest).map(|r| r.0), &mut worst, &mut failures);
            }
        }
    }
    for n in 1..=2 {
        for q in 2..=3 {
            shapes += 1;
            let w = binary_weight_matrix::<f64>(q, n);
            let part = find_partition(&w);
            let d = q * n;
            for _ in 0..100 {
                // unit vectors g_0, …, g_d give a VA-feasible (b, B)
                let rank = rng.random_range(1..=d + 1);
                let mut g = Mat::from_fn(rank, d + 1, |_, _| rng.random_range(-1.0..1.0));
                for c in 0..=d {
                    let nrm = (0..rank).map(|r| g[(r, c)] * g[(r, c)]).sum::<f64>().sqrt();
                    (0..rank).for_each(|r| g[(r, c)] /= nrm);
                }
                let (_, b, bb) = SymMatrix::gram(&g).unborder();
                let (x, xx) = (w.mul_vec(&b), bb.congruence(&w));
                let c = bc_groups(q, &x, &xx).map_err(|e| e.to_string()).and_then(|groups| {
                    let point = DecomposedPoint { y: x.clone(), yy: xx.clone(), groups };
                    let (mut c, lt, ltt) = check_lift(&point, &part)?;
                    c.feasibility = va_violation(&lt, &ltt).map_err(|e| e.to_string())?;
                    Ok(c)
                });
                note(c, &mut worst, &mut failures);
            }
        }
    }
    outcome(
        failures == 0,
        format!(
            "{shapes} partition shapes x 100 points, {failures} failures; max residual {:.2e} (limit 1e-6), max round trip {:.2e} (limit 1e-8), max feasibility {:.2e}",
            worst.residual, worst.round_trip, worst.feasibility
        ),
    )
}

/// Image interval of unit-diagonal PSD matrices under `B ↦ wᵀBw`.
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let mut endpoint_err = 0.0f64;
    let mut outside = 0;
    let mut witness_bad = 0;
    for q in 1..=5 {
        let w = binary_weights::<f64>(q);
        let (lo, hi) = weight_interval::<f64>(q).unwrap();
        for target in [lo, hi] {
            let b = weight_witness::<f64>(q, target).unwrap();
            endpoint_err = endpoint_err.max((b.quad_form(&w) - target).abs());
            let diag_ok = b.diag().iter().all(|d| (d - 1.0).abs() <= 1e-12);
            if !diag_ok || !is_psd(&b, 1e-10).unwrap() {
                witness_bad += 1;
            }
        }
        for _ in 0..10_000 {
            let rank = rng.random_range(1..=q);
            let mut g = Mat::from_fn(rank, q, |_, _| rng.random_range(-1.0..1.0));
            for c in 0..q {
                let nrm = (0..rank).map(|r| g[(r, c)] * g[(r, c)]).sum::<f64>().sqrt();
                (0..rank).for_each(|r| g[(r, c)] /= nrm);
            }
            let v = SymMatrix::gram(&g).quad_form(&w);
            if v < lo - 1e-9 * hi || v > hi + 1e-9 * hi {
                outside += 1;
            }
        }
    }
    outcome(
        endpoint_err <= 1e-10 && outside == 0 && witness_bad == 0,
        format!("endpoint error {endpoint_err:.2e} (limit 1e-10), invalid witnesses {witness_bad}, samples outside {outside}/50000"),
    )
}

/// Tight SDRs agree with exhaustive ML, and every SDR lower-bounds it.
fn criterion_8() -> Outcome {
    let cfg = ExperimentConfig {
        m: 4,
        n: 2,
        order: 4,
        snr_grid_db: vec![15.0],
        master_seed: 8008,
        solver_overrides: solver_overrides(),
        ..Default::default()
    };
    let mut tight = 0;
    let mut mismatched = 0;
    let mut bound_viol = 0;
    let mut unsolved = 0;
    let mut worst = f64::NEG_INFINITY;
    for t in 0..50 {
        let inst = trial_instance(&cfg, 0, t).unwrap();
        let pd = derive_problem(&inst);
        let ml = brute_force_ml(&inst).unwrap();
        for kind in SdrKind::ALL {
            let s = solve_sdr(kind, &inst, &pd, cfg.solver_for(kind)).unwrap();
            if !s.solved() {
                unsolved += 1;
                continue;
            }
            let bound = s.objective + pd.r_norm2 - ml.objective;
            worst = worst.max(bound);
            if bound > 1e-6 {
                bound_viol += 1;
            }
            if s.tight {
                tight += 1;
                if nearest_symbols(&s.xhat, &inst.symbols).1 != ml.uopt {
                    mismatched += 1;
                }
            }
        }
    }
    outcome(
        mismatched == 0 && bound_viol == 0 && unsolved * 100 < 250,
        format!(
            "250 solves, {tight} tight, {mismatched} argmin mismatches, {bound_viol} bound violations (max excess {worst:.2e}, limit 1e-6), {unsolved} unsolved (limit 1%)"
        ),
    )
}

/// Relaxation ordering.
fn criterion_9() -> Outcome {
    let cfg = ExperimentConfig {
        m: 6,
        n: 4,
        order: 8,
        snr_grid_db: vec![10.0],
        trials_per_point: 50,
        models: SdrKind::ALL.to_vec(),
        conditions: vec![],
        master_seed: 9009,
        solver: SolverConfig::default(),
        solver_overrides: solver_overrides(),
        ..Default::default()
    };
    let records = run_trials(&cfg).unwrap();
    let slack = 1e-5;
    let mut viol: BTreeMap<&str, usize> = BTreeMap::new();
    let mut unsolved = 0;
    for r in &records {
        let f = |k| r.outcome(k).unwrap();
        if SdrKind::ALL.iter().any(|&k| !f(k).solved()) {
            unsolved += 1;
            continue;
        }
        let pairs = [
            ("CSDR<=ESDR-X", SdrKind::Csdr, SdrKind::EsdrX),
            ("ESDR-X<=ESDR-Y", SdrKind::EsdrX, SdrKind::EsdrY),
            ("ESDR1-T<=ESDR2-T", SdrKind::Esdr1T, SdrKind::Esdr2T),
        ];
        for (name, a, b) in pairs {
            let e = viol.entry(name).or_default();
            if !rel_le(f(a).objective, f(b).objective, slack) {
                *e += 1;
            }
        }
    }
    let total: usize = viol.values().sum();
    outcome(total == 0 && unsolved == 0, format!("50 instances, violations {viol:?} (slack 1e-5 relative), {unsolved} unsolved"))
}

/// ESDR2-T takes longer than ESDR-Y.
fn criterion_10() -> Outcome {
    let cfg = ExperimentConfig {
        m: 16,
        order: 8,
        snr_grid_db: vec![10.0],
        trials_per_point: 3,
        models: vec![SdrKind::EsdrY, SdrKind::Esdr2T],
        conditions: vec![],
        master_seed: 1010,
        ..Default::default()
    };
    let rows = run_timing(&cfg, &[4, 6, 8]).unwrap();
    let mut pass = true;
    let mut cells = Vec::new();
    for r in &rows {
        let ratio = r.ratio_2t_over_y.unwrap();
        pass &= ratio > 1.0;
        let t = |k| r.entries.iter().find(|e| e.kind == k).unwrap().mean_seconds;
        cells.push(format!("n={}: Y {:.3}s 2T {:.3}s ratio {ratio:.1}", r.n, t(SdrKind::EsdrY), t(SdrKind::Esdr2T)));
    }
    outcome(pass, cells.join("; "))
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |k: usize| selected.is_empty() || selected.contains(&k);
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |k: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        if want(k) {
            let o = f();
            println!("criterion {k:>2} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            results.push((k, name, o));
        }
    };
    run(1, "condition implications", &criterion_1);
    if want(2) || want(3) {
        let start = Instant::now();
        let records = run_trials(&sweep_config()).unwrap();
        let secs = start.elapsed().as_secs_f64();
        run(2, "ESDR-X tightness matches its iff condition", &|| criterion_2(&records, secs));
        run(3, "ESDR-Y tightness implies its necessary condition", &|| criterion_3(&records));
    }
    run(4, "ESDR1-T never tight; sign event frequency", &criterion_4);
    run(5, "ESDR-Y / ESDR2-T objective equivalence", &criterion_5);
    run(6, "constructive lift on separable partitions", &criterion_6);
    run(7, "unit-diagonal weight interval", &criterion_7);
    run(8, "consistency with exhaustive ML", &criterion_8);
    run(9, "relaxation ordering", &criterion_9);
    run(10, "ESDR2-T slower than ESDR-Y", &criterion_10);
    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} passed, {} failed", results.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
