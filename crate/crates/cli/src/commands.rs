//! One function per subcommand. Each writes into the run directory and
//! returns whether its checks passed.

use std::fmt::Write as _;

use adainject::check::oracle_deviation;
use adainject::landscape::{self, LandscapeId, GRAD_TOLERANCE};
use adainject::regret::{self, RegretReport};
use adainject::toy::{self, ToyRunSpec, Trajectory};
use adainject::{mlp, OptimizerKind};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{Cell, Csv, RunDir};
use crate::RunError;

/// Largest kernel-vs-reference disagreement accepted by `oracle-check`.
pub const ORACLE_TOLERANCE: f64 = 1e-12;

pub enum Outcome {
    Passed,
    CheckFailed(String),
}

fn trajectory_csv(t: &Trajectory) -> String {
    let mut csv = Csv::new(&["iter", "theta_0", "loss", "grad_norm", "step_norm"]);
    for r in &t.records {
        csv.row(&[
            Cell::Int(r.iteration as u64),
            Cell::Float(r.theta),
            Cell::Float(r.loss),
            Cell::Float(r.grad.abs()),
            Cell::Float(r.step_norm),
        ]);
    }
    csv.into_string()
}

fn plot_script(title: &str, xlabel: &str, ylabel: &str, series: &[(String, String, usize)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script; render with `gnuplot -p plot.gp`");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel '{ylabel}'");
    let plots: Vec<String> = series
        .iter()
        .map(|(file, label, col)| format!("'{file}' using 1:{col} with lines title '{label}'"))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

pub fn toy(cfg: &RunConfig, dir: &mut RunDir) -> Result<Outcome, RunError> {
    let t = &cfg.toy;
    let mut series = Vec::new();
    let mut reports = Vec::new();
    for &land in &t.landscapes {
        let template = ToyRunSpec {
            landscape: land,
            kind: cfg.optimizers[0],
            config: cfg.optimizer,
            x0: t.x0,
            iterations: t.iterations,
            loss: t.loss,
        };
        let trajs = if t.compare {
            let (report, trajs) = toy::compare(&template, &cfg.optimizers, t.margin, t.window)?;
            print_comparison(&report);
            reports.push(report);
            trajs
        } else {
            cfg.optimizers
                .iter()
                .map(|&kind| toy::run_trajectory(&ToyRunSpec { kind, ..template }))
                .collect::<Result<Vec<_>, _>>()?
        };
        for tr in &trajs {
            let name = format!("trajectory_{}_{}.csv", land, tr.spec.kind);
            dir.write(&name, trajectory_csv(tr))?;
            println!("{land} {:<17} final θ = {:+.6}", tr.spec.kind.name(), tr.final_theta());
            series.push((name, format!("{land} {}", tr.spec.kind), 2));
        }
    }
    if t.compare {
        dir.write_json("comparison.json", "toy-comparison", &reports)?;
    }
    if t.calibrate {
        let rows = toy::calibrate(&t.landscapes, &t.alphas, t.loss)?;
        for r in &rows {
            println!("alpha {:<8} contrast {}", r.alpha, r.contrast);
        }
        dir.write_json("calibration.json", "toy-calibration", &rows)?;
    }
    if cfg.emit_plotscript {
        dir.write("plot.gp", plot_script("parameter value per iteration", "iteration", "x", &series))?;
    }
    Ok(Outcome::Passed)
}

fn print_comparison(r: &toy::ComparisonReport) {
    println!("{}: x* = {:+.6}, margin {}", r.landscape, r.x_star, r.margin);
    for e in &r.entries {
        println!(
            "  {:<17} overshoot {:<5} max excursion {:+.4}  tail range {:.3e}",
            e.kind.name(),
            e.overshoot.occurred,
            e.overshoot.max_excursion,
            e.oscillation
        );
    }
}

pub fn regret(cfg: &RunConfig, dir: &mut RunDir) -> Result<Outcome, RunError> {
    let r = &cfg.regret;
    let reports = regret::run_bench(&cfg.optimizers, &cfg.seeds, r.dim, &r.horizons, r.sequence, &cfg.optimizer)?;
    let mut csv = Csv::new(&["kind", "seed", "T", "R", "slope"]);
    for rep in &reports {
        let seed = rep.seed.unwrap_or(0);
        for (h, v) in rep.horizons.iter().zip(&rep.regret) {
            csv.row(&[
                Cell::Text(rep.kind.to_string()),
                Cell::Int(seed),
                Cell::Int(*h as u64),
                Cell::Float(*v),
                Cell::Float(rep.slope.unwrap_or(f64::NAN)),
            ]);
        }
        dir.write_json(&format!("regret_{}_seed{seed}.json", rep.kind), "regret-report", rep)?;
        println!(
            "{:<17} seed {:<4} R(T_max) {:>10.4}  slope {}  avg {:.3e} -> {:.3e}",
            rep.kind.name(),
            seed,
            rep.regret.last().copied().unwrap_or(f64::NAN),
            rep.slope.map_or("n/a".to_string(), |s| format!("{s:.3}")),
            rep.avg_regret_first,
            rep.avg_regret_final
        );
    }
    dir.write("regret.csv", csv.into_string())?;
    let failing: Vec<&RegretReport> = reports
        .iter()
        .filter(|r| r.min_regret() < regret::REGRET_FLOOR)
        .collect();
    if failing.is_empty() {
        Ok(Outcome::Passed)
    } else {
        Ok(Outcome::CheckFailed(format!("{} report(s) with R(T) below the floor", failing.len())))
    }
}

fn dataset(cfg: &RunConfig) -> Result<mlp::SynthDataset, RunError> {
    Ok(mlp::synth_dataset(cfg.train.data_seed, cfg.train.n, cfg.train.d)?)
}

fn epoch_csv(r: &mlp::TrainReport) -> String {
    let mut csv = Csv::new(&["epoch", "loss"]);
    csv.row(&[Cell::Int(0), Cell::Float(r.initial_loss)]);
    for (i, l) in r.epoch_loss.iter().enumerate() {
        csv.row(&[Cell::Int(i as u64 + 1), Cell::Float(*l)]);
    }
    csv.into_string()
}

pub fn train(cfg: &RunConfig, dir: &mut RunDir) -> Result<Outcome, RunError> {
    let data = dataset(cfg)?;
    let mut reports = Vec::new();
    let mut series = Vec::new();
    for &kind in &cfg.optimizers {
        for &seed in &cfg.seeds {
            let r = mlp::train(&data, kind, &cfg.optimizer, &cfg.train_settings(seed))?;
            let name = format!("train_{kind}_seed{seed}.csv");
            dir.write(&name, epoch_csv(&r))?;
            println!(
                "{:<17} seed {:<4} loss {:.6} -> {:.6}  accuracy {:.3}",
                kind.name(),
                seed,
                r.initial_loss,
                r.final_loss(),
                r.final_accuracy
            );
            series.push((name, format!("{kind} seed {seed}"), 2));
            reports.push(r);
        }
    }
    dir.write_json("train.json", "train-reports", &reports)?;
    if cfg.emit_plotscript {
        dir.write("plot.gp", plot_script("full-data loss per epoch", "epoch", "loss", &series))?;
    }
    Ok(Outcome::Passed)
}

#[derive(Serialize)]
struct KDivergence {
    kind: OptimizerKind,
    seed: u64,
    loss_k1: f64,
    loss_k2: f64,
    differs: bool,
}

#[derive(Serialize)]
struct SweepTable<'a> {
    k_values: &'a [f64],
    seeds: &'a [u64],
    cells: &'a [mlp::SweepCell],
    /// Epoch-1 losses at k = 1 and k = 2 for every (kind, seed).
    k_divergence: Vec<KDivergence>,
}

pub fn sweep_k(cfg: &RunConfig, dir: &mut RunDir) -> Result<Outcome, RunError> {
    let data = dataset(cfg)?;
    let settings = cfg.train_settings(0);
    let cells = mlp::sweep_k(&data, &cfg.optimizers, &cfg.train.k_values, &cfg.optimizer, &cfg.seeds, &settings)?;
    let mut csv = Csv::new(&["kind", "k", "seed", "final_loss", "final_accuracy"]);
    for c in &cells {
        for r in &c.reports {
            csv.row(&[
                Cell::Text(c.kind.to_string()),
                Cell::Float(c.k),
                Cell::Int(r.seed),
                Cell::Float(r.final_loss()),
                Cell::Float(r.final_accuracy),
            ]);
            dir.write(&format!("sweep_{}_k{}_seed{}.csv", c.kind, c.k, r.seed), epoch_csv(r))?;
        }
    }
    dir.write("sweep_k.csv", csv.into_string())?;

    // Table layout: rows are optimizer kinds, columns are k.
    print!("{:<17}", "kind");
    for k in &cfg.train.k_values {
        print!(" | k = {k:<15}");
    }
    println!();
    for row in cells.chunks(cfg.train.k_values.len()) {
        print!("{:<17}", row[0].kind.name());
        for c in row {
            print!(" | {:.4} ± {:.4}", c.mean_final_loss, c.std_final_loss);
        }
        println!();
    }

    let find = |kind: OptimizerKind, k: f64| cells.iter().find(|c| c.kind == kind && c.k == k);
    let mut k_divergence = Vec::new();
    for &kind in &cfg.optimizers {
        if let (Some(a), Some(b)) = (find(kind, 1.0), find(kind, 2.0)) {
            for (ra, rb) in a.reports.iter().zip(&b.reports) {
                k_divergence.push(KDivergence {
                    kind,
                    seed: ra.seed,
                    loss_k1: ra.epoch_loss[0],
                    loss_k2: rb.epoch_loss[0],
                    differs: ra.epoch_loss[0] != rb.epoch_loss[0],
                });
            }
        }
    }
    let table = SweepTable {
        k_values: &cfg.train.k_values,
        seeds: &cfg.seeds,
        cells: &cells,
        k_divergence,
    };
    let same = table.k_divergence.iter().filter(|d| !d.differs).count();
    dir.write_json("sweep_k.json", "k-sweep", &table)?;
    let nonfinite = cells
        .iter()
        .flat_map(|c| &c.reports)
        .any(|r| r.epoch_loss.iter().any(|l| !l.is_finite()));
    if nonfinite {
        Ok(Outcome::CheckFailed("non-finite loss in the sweep".into()))
    } else if same > 0 && cfg.optimizers.iter().any(|k| k.is_injected()) {
        Ok(Outcome::CheckFailed(format!("{same} (kind, seed) pair(s) identical at k = 1 and k = 2")))
    } else {
        Ok(Outcome::Passed)
    }
}

#[derive(Serialize)]
struct GradcheckRow {
    target: String,
    samples: usize,
    max_rel_error: f64,
    passed: bool,
}

pub fn gradcheck(cfg: &RunConfig, dir: &mut RunDir) -> Result<Outcome, RunError> {
    let c = &cfg.check;
    let seed = cfg.seeds[0];
    let mut rows = Vec::new();
    for id in LandscapeId::ALL {
        let r = landscape::gradcheck_with(id, c.samples, seed, c.fd_step).max_rel_error;
        rows.push(GradcheckRow {
            target: id.to_string(),
            samples: c.samples,
            max_rel_error: r,
            passed: r < GRAD_TOLERANCE,
        });
    }
    let data = dataset(cfg)?;
    let batch = data.batch(&(0..20).collect::<Vec<_>>());
    let model = mlp::MlpModel::init(seed, cfg.train.d, cfg.train.hidden);
    let e = mlp::gradcheck(&model, &batch, c.mlp_fd_step)?;
    rows.push(GradcheckRow {
        target: "mlp".into(),
        samples: model.num_params(),
        max_rel_error: e,
        passed: e < GRAD_TOLERANCE,
    });
    for r in &rows {
        println!("{:<15} max relative error {:.3e}  {}", r.target, r.max_rel_error, if r.passed { "ok" } else { "FAIL" });
    }
    dir.write_json("gradcheck.json", "gradcheck", &rows)?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.target.as_str()).collect();
    if failed.is_empty() {
        Ok(Outcome::Passed)
    } else {
        Ok(Outcome::CheckFailed(format!("gradient mismatch on {}", failed.join(", "))))
    }
}

pub fn oracle_check(cfg: &RunConfig, dir: &mut RunDir) -> Result<Outcome, RunError> {
    let c = &cfg.check;
    let seed = cfg.seeds[0];
    let mut rows = Vec::new();
    for &kind in &cfg.optimizers {
        let d = oracle_deviation(kind, &cfg.optimizer, c.dim, c.steps, seed)?;
        println!(
            "{:<17} {} steps, dim {}: max |Δθ| {:.3e}  {}",
            kind.name(),
            d.steps,
            d.dim,
            d.max_abs_diff,
            if d.max_abs_diff <= ORACLE_TOLERANCE { "ok" } else { "FAIL" }
        );
        rows.push(d);
    }
    dir.write_json("oracle_check.json", "oracle-check", &rows)?;
    let failed = rows.iter().filter(|d| d.max_abs_diff > ORACLE_TOLERANCE).count();
    if failed == 0 {
        Ok(Outcome::Passed)
    } else {
        Ok(Outcome::CheckFailed(format!("{failed} kind(s) deviate from the reference")))
    }
}
