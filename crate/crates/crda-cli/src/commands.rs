//! The four single-run subcommands: simulate, cv, train, predict.

use std::fs;
use std::fs::File;
use std::io::BufWriter;

use crda::{
    center_by_class, class_means, default_alphas, default_ks, equal_priors, generate, grid_search,
    holdout_search, ledoit_wolf_alpha, light_search, load_csv, load_matrix_csv, load_model,
    load_transposed_csv, load_transposed_matrix_csv, save_csv, save_model, train_with, write_truth,
    CrdaError, CvReport, Grid, LabeledDataset, SetupSpec, Shrinkage, TrainedModel,
    DEFAULT_LABEL_COLUMN,
};
use ndarray::Array2;

use crate::args::{AlphaArg, CvArgs, InputArgs, KArg, PredictArgs, PriorsArg, SimulateArgs, TrainArgs};
use crate::echo::Echo;
use crate::CliError;

pub(crate) fn load_input(input: &InputArgs) -> Result<LabeledDataset, CrdaError> {
    if input.transpose {
        let labels = input.labels.as_ref().expect("clap enforces --labels");
        load_transposed_csv(&input.data, labels)
    } else {
        load_csv(&input.data, &input.label_column)
    }
}

pub(crate) fn resolve_priors(arg: PriorsArg, n_groups: usize) -> Option<Vec<f64>> {
    match arg {
        PriorsArg::Equal => Some(equal_priors(n_groups)),
        PriorsArg::Empirical => None,
    }
}

/// Closed-form shrinkage weight plug-in for a labeled dataset.
pub(crate) fn lw_alpha(ds: &LabeledDataset) -> Result<f64, CrdaError> {
    let centered = center_by_class(ds, &class_means(ds))?;
    ledoit_wolf_alpha(&centered)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let spec = SetupSpec::new(args.setup, args.scale)?;
    let trial = generate(&spec, args.seed, args.multinomial)?;
    fs::create_dir_all(&args.out)?;

    save_csv(&trial.train, args.out.join("train.csv"), DEFAULT_LABEL_COLUMN)?;
    if let Some(validation) = &trial.validation {
        save_csv(
            validation,
            args.out.join("validation.csv"),
            DEFAULT_LABEL_COLUMN,
        )?;
    }
    save_csv(&trial.test, args.out.join("test.csv"), DEFAULT_LABEL_COLUMN)?;
    write_truth(args.out.join("truth.csv"), &trial.truth)?;

    let mut echo = Echo::new("simulate");
    echo.push("setup", args.setup)
        .push("seed", args.seed)
        .push("scale", args.scale)
        .push("multinomial", args.multinomial)
        .push("p", spec.p())
        .push("n_groups", spec.n_groups())
        .push("n_train", spec.n_train())
        .push("n_validation", spec.n_validation())
        .push("n_test", spec.n_test())
        .push("n_true_features", spec.truth().len());
    echo.write(args.out.join("config.txt"))?;

    println!(
        "setup {} trial written to {}: train {}x{}, test {}x{}, {} true features",
        args.setup,
        args.out.display(),
        spec.n_train(),
        spec.p(),
        spec.n_test(),
        spec.p(),
        spec.truth().len()
    );
    Ok(())
}

fn run_selection(args: &CvArgs, ds: &LabeledDataset) -> Result<CvReport, CliError> {
    let priors_vec = resolve_priors(args.priors, ds.n_groups());
    let priors = priors_vec.as_deref();
    let ks = match args.k {
        KArg::Cv => default_ks(ds.p()),
        KArg::Fixed(k) => vec![k],
    };
    let validation = args
        .validation
        .as_ref()
        .map(|path| load_csv(path, &args.input.label_column))
        .transpose()?;

    let report = match (args.alpha, &validation) {
        (AlphaArg::Lw, None) => light_search(ds, &ks, args.folds, args.q, args.seed, priors)?,
        (AlphaArg::Lw, Some(val)) => {
            let alpha = lw_alpha(ds)?;
            let grid = Grid::new(vec![alpha], ks, ds.p())?;
            holdout_search(ds, val, &grid, args.q, priors)?
        }
        (alpha, validation) => {
            let alphas = match alpha {
                AlphaArg::Cv => default_alphas(),
                AlphaArg::Fixed(a) => vec![a],
                AlphaArg::Lw => unreachable!("handled above"),
            };
            let grid = Grid::new(alphas, ks, ds.p())?;
            match validation {
                Some(val) => holdout_search(ds, val, &grid, args.q, priors)?,
                None => grid_search(ds, &grid, args.folds, args.q, args.seed, priors)?,
            }
        }
    };
    Ok(report)
}

pub fn cmd_cv(args: &CvArgs) -> Result<(), CliError> {
    let ds = load_input(&args.input)?;
    let report = run_selection(args, &ds)?;
    fs::create_dir_all(&args.out)?;

    let grid_file = File::create(args.out.join("grid.csv")).map_err(CrdaError::from)?;
    report.write_csv(BufWriter::new(grid_file))?;

    let tuning = if args.validation.is_some() {
        "holdout"
    } else {
        "cv"
    };
    let mut summary = Echo::new("cv-summary");
    summary
        .push("alpha_hat", report.selected_alpha())
        .push("k_hat", report.selected_k())
        .push("error", report.selected_error())
        .push("n_scored", report.n_scored())
        .push("eps_cv", report.eps_cv())
        .push("eps_thr", report.eps_thr())
        .push("nfs", report.selected_nfs())
        .push("norm", report.norm());
    summary.write(args.out.join("summary.txt"))?;

    let mut echo = Echo::new("cv");
    echo.push("data", args.input.data.display())
        .push("label_column", &args.input.label_column)
        .push("transpose", args.input.transpose)
        .push_opt("labels", args.input.labels.as_ref().map(|p| p.display()))
        .push("q", args.q)
        .push("alpha", args.alpha)
        .push("k", args.k)
        .push("folds", args.folds)
        .push("seed", args.seed)
        .push("tuning", tuning)
        .push_opt("validation", args.validation.as_ref().map(|p| p.display()))
        .push("priors", format!("{:?}", args.priors).to_lowercase());
    echo.write(args.out.join("config.txt"))?;

    println!(
        "selected alpha = {}, K = {} (errors {} of {}, nfs {}, eps_thr {})",
        report.selected_alpha(),
        report.selected_k(),
        report.selected_error(),
        report.n_scored(),
        report.selected_nfs(),
        report.eps_thr()
    );
    Ok(())
}

pub fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let ds = load_input(&args.input)?;
    let priors_vec = resolve_priors(args.priors, ds.n_groups());
    let alpha = match args.alpha {
        AlphaArg::Fixed(a) => a,
        AlphaArg::Lw => lw_alpha(&ds)?,
        AlphaArg::Cv => {
            return Err(CliError::Usage(
                "train needs --alpha as a fixed value or \"lw\"; run `crda cv` to tune it".into(),
            ))
        }
    };
    let shrinkage = match (args.k, args.delta) {
        (Some(k), None) => Shrinkage::Hard { k, norm: args.q },
        (None, Some(delta)) => Shrinkage::Soft { delta },
        _ => {
            return Err(CliError::Usage(
                "exactly one of --k or --delta is required".into(),
            ))
        }
    };
    let model = train_with(&ds, alpha, shrinkage, priors_vec.as_deref())?;

    fs::create_dir_all(&args.out)?;
    save_model(&model, args.out.join("model.json"))?;
    write_truth(
        args.out.join("selected_features.csv"),
        model.selected_features(),
    )?;

    let mut echo = Echo::new("train");
    echo.push("data", args.input.data.display())
        .push("label_column", &args.input.label_column)
        .push("transpose", args.input.transpose)
        .push_opt("labels", args.input.labels.as_ref().map(|p| p.display()))
        .push("alpha", args.alpha)
        .push("alpha_resolved", alpha)
        .push_opt("k", args.k)
        .push_opt("delta", args.delta)
        .push("q", args.q)
        .push("priors", format!("{:?}", args.priors).to_lowercase());
    echo.write(args.out.join("config.txt"))?;

    println!(
        "trained on {} samples, {} groups: alpha = {}, {} of {} features selected",
        ds.n(),
        ds.n_groups(),
        alpha,
        model.selected_features().len(),
        ds.p()
    );
    Ok(())
}

fn load_predict_input(args: &PredictArgs) -> Result<(Array2<f64>, Option<Vec<String>>), CrdaError> {
    if args.transpose {
        match &args.labels {
            Some(labels) => {
                let ds = load_transposed_csv(&args.data, labels)?;
                let actual = ds
                    .labels()
                    .iter()
                    .map(|&l| ds.label_names()[l].clone())
                    .collect();
                Ok((ds.x().clone(), Some(actual)))
            }
            None => {
                let (x, _) = load_transposed_matrix_csv(&args.data)?;
                Ok((x, None))
            }
        }
    } else {
        match load_csv(&args.data, &args.label_column) {
            Ok(ds) => {
                let actual = ds
                    .labels()
                    .iter()
                    .map(|&l| ds.label_names()[l].clone())
                    .collect();
                Ok((ds.x().clone(), Some(actual)))
            }
            Err(CrdaError::MissingLabelColumn { .. }) => {
                let (x, _) = load_matrix_csv(&args.data)?;
                Ok((x, None))
            }
            Err(e) => Err(e),
        }
    }
}

pub fn cmd_predict(args: &PredictArgs) -> Result<(), CliError> {
    let model: TrainedModel = load_model(&args.model)?;
    let (x, actual) = load_predict_input(args)?;
    let predictions = model.predict_names(&x)?;
    let scores = if args.discriminants {
        Some(model.discriminants(&x)?)
    } else {
        None
    };

    fs::create_dir_all(&args.out)?;
    let file = File::create(args.out.join("predictions.csv")).map_err(CrdaError::from)?;
    let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["sample".to_string(), "predicted".to_string()];
    if actual.is_some() {
        header.push("actual".to_string());
    }
    if scores.is_some() {
        for name in model.label_names() {
            header.push(format!("score_{name}"));
        }
    }
    wtr.write_record(&header).map_err(CrdaError::from)?;
    for (i, predicted) in predictions.iter().enumerate() {
        let mut record = vec![(i + 1).to_string(), predicted.to_string()];
        if let Some(actual) = &actual {
            record.push(actual[i].clone());
        }
        if let Some(scores) = &scores {
            record.extend(scores.row(i).iter().map(|v| v.to_string()));
        }
        wtr.write_record(&record).map_err(CrdaError::from)?;
    }
    wtr.flush().map_err(CrdaError::from)?;

    let mut echo = Echo::new("predict");
    echo.push("model", args.model.display())
        .push("data", args.data.display())
        .push("label_column", &args.label_column)
        .push("transpose", args.transpose)
        .push_opt("labels", args.labels.as_ref().map(|p| p.display()))
        .push("discriminants", args.discriminants)
        .push("n_samples", predictions.len());
    echo.write(args.out.join("config.txt"))?;

    match &actual {
        Some(actual) => {
            let errors = predictions
                .iter()
                .zip(actual)
                .filter(|&(p, a)| *p != a.as_str())
                .count();
            println!(
                "{} samples classified, {} labeled mismatches (rate {})",
                predictions.len(),
                errors,
                errors as f64 / predictions.len().max(1) as f64
            );
        }
        None => println!("{} samples classified", predictions.len()),
    }
    Ok(())
}
