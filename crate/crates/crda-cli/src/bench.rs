//! Monte Carlo benchmark: per-trial generate/tune/train/evaluate over all
//! classifier variants, with per-trial result flushing so an interrupted run
//! resumes where it stopped.

use std::fs;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crda::{
    default_alphas, default_ks, evaluate, generate, grid_search, holdout_search, light_search,
    load_csv, load_transposed_csv, make_folds, mean_std, soft_holdout_search, soft_search, train,
    train_with, CrdaError, CvReport, EvalResult, Grid, LabeledDataset, RowNorm, SetupId,
    SetupSpec, Shrinkage,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{BenchArgs, PriorsArg, TuningArg};
use crate::commands::{lw_alpha, resolve_priors};
use crate::echo::Echo;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strategy {
    Tuned,
    PlugIn,
}

impl Strategy {
    fn label(self) -> &'static str {
        match self {
            Strategy::Tuned => "cv",
            Strategy::PlugIn => "lw",
        }
    }
}

/// The benchmark's fixed method set: each row norm under both shrinkage
/// strategies, plus the soft-threshold baseline.
const METHOD_COUNT: usize = 7;

fn hard_method_name(q: RowNorm) -> &'static str {
    match q {
        RowNorm::L1 => "crda-l1",
        RowNorm::L2 => "crda-l2",
        RowNorm::LInf => "crda-linf",
    }
}

const SOFT_METHOD_NAME: &str = "scrda-soft";

/// One method's scores on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub method: String,
    pub strategy: String,
    pub alpha: f64,
    pub param: f64,
    pub error: usize,
    pub nfs: usize,
    pub dr: Option<f64>,
    pub fp: Option<f64>,
}

enum Mode {
    Setup(SetupSpec),
    Data(LabeledDataset),
}

struct Plan {
    mode: Mode,
    trials: usize,
    folds: usize,
    seed: u64,
    multinomial: bool,
    tuning: TuningArg,
    priors: PriorsArg,
    out: PathBuf,
}

impl Plan {
    fn n_test_label(&self) -> String {
        match &self.mode {
            Mode::Setup(spec) => spec.n_test().to_string(),
            Mode::Data(ds) => format!("~{}", ds.n() / 4),
        }
    }
}

fn resolve_plan(args: &BenchArgs) -> Result<Plan, CliError> {
    let mode = match (&args.setup, &args.data) {
        (Some(id), None) => Mode::Setup(SetupSpec::new(*id, args.scale)?),
        (None, Some(path)) => {
            let ds = if args.transpose {
                let labels = args.labels.as_ref().expect("clap enforces --labels");
                load_transposed_csv(path, labels)?
            } else {
                load_csv(path, &args.label_column)?
            };
            Mode::Data(ds)
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --setup or --data is required".into(),
            ))
        }
    };
    let trials = args.trials.unwrap_or(match &mode {
        Mode::Setup(spec) if spec.id() == SetupId::III => 10,
        Mode::Setup(_) => 25,
        Mode::Data(_) => 10,
    });
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let folds = args.folds.unwrap_or(match &mode {
        Mode::Setup(spec) if spec.id() == SetupId::III => 10,
        _ => 5,
    });
    if args.tuning == TuningArg::Holdout {
        match &mode {
            Mode::Setup(spec) if spec.n_validation() > 0 => {}
            Mode::Setup(_) => {
                return Err(CliError::Usage(
                    "this setup generates no validation split; use --tuning cv".into(),
                ))
            }
            Mode::Data(_) => {
                return Err(CliError::Usage(
                    "--tuning holdout needs a generated validation split; use --tuning cv".into(),
                ))
            }
        }
    }
    Ok(Plan {
        mode,
        trials,
        folds,
        seed: args.seed,
        multinomial: args.multinomial,
        tuning: args.tuning,
        priors: args.priors,
        out: args.out.clone(),
    })
}

fn derive_trial_seeds(master: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..trials).map(|_| rng.gen()).collect()
}

fn push_row(
    rows: &mut Vec<TrialRow>,
    trial: usize,
    method: &str,
    strategy: &str,
    alpha: f64,
    param: f64,
    eval: &EvalResult,
) {
    rows.push(TrialRow {
        trial,
        method: method.to_string(),
        strategy: strategy.to_string(),
        alpha,
        param,
        error: eval.te_count,
        nfs: eval.nfs,
        dr: eval.dr_percent,
        fp: eval.fp_percent,
    });
}

struct TrialData<'a> {
    train: &'a LabeledDataset,
    validation: Option<&'a LabeledDataset>,
    test: &'a LabeledDataset,
    truth: Option<&'a [usize]>,
}

fn run_methods(
    plan: &Plan,
    data: &TrialData<'_>,
    trial: usize,
    seed: u64,
) -> Result<Vec<TrialRow>, CrdaError> {
    let p = data.train.p();
    let priors_vec = resolve_priors(plan.priors, data.train.n_groups());
    let priors = priors_vec.as_deref();
    let grid = Grid::default_for(p)?;
    let ks = default_ks(p);
    let alphas = default_alphas();
    let mut rows = Vec::with_capacity(METHOD_COUNT);

    for q in RowNorm::ALL {
        for strategy in [Strategy::Tuned, Strategy::PlugIn] {
            let report: CvReport = match (strategy, plan.tuning, data.validation) {
                (Strategy::Tuned, TuningArg::Cv, _) | (Strategy::Tuned, _, None) => {
                    grid_search(data.train, &grid, plan.folds, q, seed, priors)?
                }
                (Strategy::Tuned, TuningArg::Holdout, Some(val)) => {
                    holdout_search(data.train, val, &grid, q, priors)?
                }
                (Strategy::PlugIn, TuningArg::Cv, _) | (Strategy::PlugIn, _, None) => {
                    light_search(data.train, &ks, plan.folds, q, seed, priors)?
                }
                (Strategy::PlugIn, TuningArg::Holdout, Some(val)) => {
                    let alpha = lw_alpha(data.train)?;
                    let light_grid = Grid::new(vec![alpha], ks.clone(), p)?;
                    holdout_search(data.train, val, &light_grid, q, priors)?
                }
            };
            let model = train(
                data.train,
                report.selected_alpha(),
                report.selected_k(),
                q,
                priors,
            )?;
            let eval = evaluate(&model, data.test, data.truth)?;
            push_row(
                &mut rows,
                trial,
                hard_method_name(q),
                strategy.label(),
                report.selected_alpha(),
                report.selected_k() as f64,
                &eval,
            );
        }
    }

    let soft = match (plan.tuning, data.validation) {
        (TuningArg::Holdout, Some(val)) => soft_holdout_search(data.train, val, &alphas, priors)?,
        _ => soft_search(data.train, &alphas, plan.folds, seed, priors)?,
    };
    let model = train_with(
        data.train,
        soft.selected_alpha(),
        Shrinkage::Soft {
            delta: soft.selected_delta(),
        },
        priors,
    )?;
    let eval = evaluate(&model, data.test, data.truth)?;
    push_row(
        &mut rows,
        trial,
        SOFT_METHOD_NAME,
        "cv",
        soft.selected_alpha(),
        soft.selected_delta(),
        &eval,
    );
    Ok(rows)
}

fn run_trial(plan: &Plan, trial: usize, seed: u64) -> Result<Vec<TrialRow>, CrdaError> {
    match &plan.mode {
        Mode::Setup(spec) => {
            let generated = generate(spec, seed, plan.multinomial)?;
            let data = TrialData {
                train: &generated.train,
                validation: generated.validation.as_ref(),
                test: &generated.test,
                truth: Some(&generated.truth),
            };
            run_methods(plan, &data, trial, seed)
        }
        Mode::Data(ds) => {
            let quarters = make_folds(ds.labels(), 4, seed)?;
            let test_idx: Vec<usize> = (0..ds.n()).filter(|&i| quarters[i] == 0).collect();
            let train_idx: Vec<usize> = (0..ds.n()).filter(|&i| quarters[i] != 0).collect();
            let train_ds = ds.subset(&train_idx)?;
            let test_ds = ds.subset(&test_idx)?;
            let data = TrialData {
                train: &train_ds,
                validation: None,
                test: &test_ds,
                truth: None,
            };
            run_methods(plan, &data, trial, seed)
        }
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn trials_path(plan: &Plan) -> PathBuf {
    plan.out.join("trials.csv")
}

fn write_trials(path: &Path, completed: &[Option<Vec<TrialRow>>]) -> Result<(), CrdaError> {
    let file = File::create(path)?;
    let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
    wtr.write_record([
        "trial", "method", "strategy", "alpha", "param", "error", "nfs", "dr", "fp",
    ])?;
    for rows in completed.iter().flatten() {
        for row in rows {
            wtr.write_record([
                row.trial.to_string(),
                row.method.clone(),
                row.strategy.clone(),
                row.alpha.to_string(),
                row.param.to_string(),
                row.error.to_string(),
                row.nfs.to_string(),
                opt_cell(row.dr),
                opt_cell(row.fp),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

fn parse_trial_row(record: &csv::StringRecord) -> Option<TrialRow> {
    let field = |i: usize| record.get(i).map(str::trim);
    let opt = |i: usize| -> Option<Option<f64>> {
        match field(i) {
            Some("") | None => Some(None),
            Some(s) => s.parse::<f64>().ok().map(Some),
        }
    };
    Some(TrialRow {
        trial: field(0)?.parse().ok()?,
        method: field(1)?.to_string(),
        strategy: field(2)?.to_string(),
        alpha: field(3)?.parse().ok()?,
        param: field(4)?.parse().ok()?,
        error: field(5)?.parse().ok()?,
        nfs: field(6)?.parse().ok()?,
        dr: opt(7)?,
        fp: opt(8)?,
    })
}

/// Reads a previous run's per-trial file and keeps every trial that has a
/// complete set of method rows; anything unreadable is recomputed.
fn read_completed(path: &Path, trials: usize) -> Vec<Option<Vec<TrialRow>>> {
    let mut completed: Vec<Option<Vec<TrialRow>>> = vec![None; trials];
    let Ok(file) = File::open(path) else {
        return completed;
    };
    let mut rdr = csv::Reader::from_reader(file);
    let mut by_trial: Vec<Vec<TrialRow>> = vec![Vec::new(); trials];
    for record in rdr.records() {
        let Ok(record) = record else {
            return vec![None; trials];
        };
        if let Some(row) = parse_trial_row(&record) {
            if row.trial < trials {
                by_trial[row.trial].push(row);
            }
        }
    }
    for (t, rows) in by_trial.into_iter().enumerate() {
        if rows.len() == METHOD_COUNT {
            completed[t] = Some(rows);
        }
    }
    completed
}

struct SummaryRow {
    method: String,
    strategy: String,
    n: usize,
    te: (f64, f64),
    nfs: (f64, f64),
    dr: Option<(f64, f64)>,
    fp: Option<(f64, f64)>,
}

fn aggregate(completed: &[Option<Vec<TrialRow>>]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, String)> = Vec::new();
    for q in RowNorm::ALL {
        for strategy in [Strategy::Tuned, Strategy::PlugIn] {
            order.push((
                hard_method_name(q).to_string(),
                strategy.label().to_string(),
            ));
        }
    }
    order.push((SOFT_METHOD_NAME.to_string(), "cv".to_string()));

    order
        .into_iter()
        .map(|(method, strategy)| {
            let rows: Vec<&TrialRow> = completed
                .iter()
                .flatten()
                .flat_map(|rows| rows.iter())
                .filter(|r| r.method == method && r.strategy == strategy)
                .collect();
            let series = |f: &dyn Fn(&TrialRow) -> f64| -> (f64, f64) {
                let values: Vec<f64> = rows.iter().map(|r| f(r)).collect();
                mean_std(&values).unwrap_or((f64::NAN, f64::NAN))
            };
            let opt_series = |f: &dyn Fn(&TrialRow) -> Option<f64>| -> Option<(f64, f64)> {
                let values: Option<Vec<f64>> = rows.iter().map(|r| f(r)).collect();
                values.as_deref().and_then(mean_std)
            };
            SummaryRow {
                n: rows.len(),
                te: series(&|r| r.error as f64),
                nfs: series(&|r| r.nfs as f64),
                dr: opt_series(&|r| r.dr),
                fp: opt_series(&|r| r.fp),
                method,
                strategy,
            }
        })
        .collect()
}

fn write_results_csv(path: &Path, summary: &[SummaryRow]) -> Result<(), CrdaError> {
    let file = File::create(path)?;
    let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
    wtr.write_record([
        "method", "strategy", "trials", "te_mean", "te_std", "nfs_mean", "nfs_std", "dr_mean",
        "dr_std", "fp_mean", "fp_std",
    ])?;
    for row in summary {
        wtr.write_record([
            row.method.clone(),
            row.strategy.clone(),
            row.n.to_string(),
            row.te.0.to_string(),
            row.te.1.to_string(),
            row.nfs.0.to_string(),
            row.nfs.1.to_string(),
            opt_cell(row.dr.map(|v| v.0)),
            opt_cell(row.dr.map(|v| v.1)),
            opt_cell(row.fp.map(|v| v.0)),
            opt_cell(row.fp.map(|v| v.1)),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// One display cell: the tuned value with the plug-in value in parentheses.
fn paired_cell(tuned: f64, plug_in: Option<f64>) -> String {
    match plug_in {
        Some(p) => format!("{tuned:.1} ({p:.1})"),
        None => format!("{tuned:.1}"),
    }
}

fn render_markdown(plan: &Plan, summary: &[SummaryRow]) -> String {
    let find = |method: &str, strategy: &str| -> &SummaryRow {
        summary
            .iter()
            .find(|r| r.method == method && r.strategy == strategy)
            .expect("aggregate covers the fixed method set")
    };
    let with_truth = summary.iter().any(|r| r.dr.is_some());

    let mut md = String::new();
    md.push_str("# Benchmark results\n\n");
    let source = match &plan.mode {
        Mode::Setup(spec) => format!("setup {} (p = {})", spec.id(), spec.p()),
        Mode::Data(ds) => format!("real data (n = {}, p = {})", ds.n(), ds.p()),
    };
    md.push_str(&format!(
        "{source}, {} trials, seed {}, {} tuning. TE is the mean misclassification \
         count out of {} test samples and NFS the mean number of selected features; \
         values in parentheses use the closed-form shrinkage plug-in instead of the \
         tuned weight.\n\n",
        plan.trials,
        plan.seed,
        match plan.tuning {
            TuningArg::Cv => format!("{}-fold CV", plan.folds),
            TuningArg::Holdout => "hold-out".to_string(),
        },
        plan.n_test_label(),
    ));

    if with_truth {
        md.push_str("| Method | TE | NFS | DR % | FP % |\n|---|---|---|---|---|\n");
    } else {
        md.push_str("| Method | TE | NFS |\n|---|---|---|\n");
    }
    for q in RowNorm::ALL {
        let tuned = find(hard_method_name(q), "cv");
        let plug_in = find(hard_method_name(q), "lw");
        let mut cells = vec![
            format!("CRDA ({})", q.label()),
            paired_cell(tuned.te.0, Some(plug_in.te.0)),
            paired_cell(tuned.nfs.0, Some(plug_in.nfs.0)),
        ];
        if with_truth {
            cells.push(paired_cell(
                tuned.dr.map_or(f64::NAN, |v| v.0),
                plug_in.dr.map(|v| v.0),
            ));
            cells.push(paired_cell(
                tuned.fp.map_or(f64::NAN, |v| v.0),
                plug_in.fp.map(|v| v.0),
            ));
        }
        md.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    let soft = find(SOFT_METHOD_NAME, "cv");
    let mut cells = vec![
        "SCRDA (soft)".to_string(),
        paired_cell(soft.te.0, None),
        paired_cell(soft.nfs.0, None),
    ];
    if with_truth {
        cells.push(paired_cell(soft.dr.map_or(f64::NAN, |v| v.0), None));
        cells.push(paired_cell(soft.fp.map_or(f64::NAN, |v| v.0), None));
    }
    md.push_str(&format!("| {} |\n", cells.join(" | ")));
    md
}

fn write_bench_echo(plan: &Plan, args: &BenchArgs) -> Result<(), CrdaError> {
    let mut echo = Echo::new("bench");
    match &plan.mode {
        Mode::Setup(spec) => {
            echo.push("setup", spec.id())
                .push("scale", args.scale)
                .push("p", spec.p())
                .push("multinomial", plan.multinomial);
        }
        Mode::Data(ds) => {
            echo.push("data", args.data.as_ref().expect("data mode").display())
                .push("label_column", &args.label_column)
                .push("transpose", args.transpose)
                .push_opt("labels", args.labels.as_ref().map(|p| p.display()))
                .push("n", ds.n())
                .push("p", ds.p());
        }
    }
    echo.push("trials", plan.trials)
        .push("folds", plan.folds)
        .push("seed", plan.seed)
        .push(
            "tuning",
            match plan.tuning {
                TuningArg::Cv => "cv",
                TuningArg::Holdout => "holdout",
            },
        )
        .push(
            "priors",
            match plan.priors {
                PriorsArg::Equal => "equal",
                PriorsArg::Empirical => "empirical",
            },
        )
        .push("workers", rayon::current_num_threads());
    echo.write(plan.out.join("config.txt"))
}

/// Runs the benchmark and returns the aggregated per-method rows, leaving
/// trials.csv, results.csv, and results.md in the output directory.
pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let plan = resolve_plan(args)?;
    fs::create_dir_all(&plan.out).map_err(CrdaError::from)?;
    write_bench_echo(&plan, args)?;

    let seeds = derive_trial_seeds(plan.seed, plan.trials);
    let path = trials_path(&plan);
    let mut completed = read_completed(&path, plan.trials);
    let resumed = completed.iter().filter(|t| t.is_some()).count();
    if resumed > 0 {
        eprintln!("resuming: {resumed} of {} trials already on disk", plan.trials);
    }
    for t in 0..plan.trials {
        if completed[t].is_some() {
            continue;
        }
        let rows = run_trial(&plan, t, seeds[t])?;
        completed[t] = Some(rows);
        write_trials(&path, &completed)?;
        eprintln!("trial {} of {} done", t + 1, plan.trials);
    }

    let summary = aggregate(&completed);
    write_results_csv(&plan.out.join("results.csv"), &summary)?;
    let md = render_markdown(&plan, &summary);
    let mut file =
        BufWriter::new(File::create(plan.out.join("results.md")).map_err(CrdaError::from)?);
    file.write_all(md.as_bytes()).map_err(CrdaError::from)?;
    file.flush().map_err(CrdaError::from)?;
    print!("{md}");
    Ok(())
}
