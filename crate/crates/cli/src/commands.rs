//! One function per subcommand. Each returns whether every check it ran held.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use wishart_core::mc::{
    check_bound_dominance, check_chaos_decoupling, check_expectation, check_linear_form_std,
    check_sigma_concentration, check_sigma_lipschitz, check_wishart_decoupling,
    empirical_sample_complexity, sweep_scaling, ThetaRule, TrialConfig, DEFAULT_NORM_TRIALS,
    DEFAULT_SCALAR_TRIALS,
};
use wishart_core::wishart::STREAM_Y;
use wishart_core::{
    certify_norm_bound, theorem1_bound, DenseMatrix, RngSeed, ShapeFamily, SpdMatrix,
    WishartSampler,
};

use crate::config::{CommandName, ExperimentConfig, OutputFormat, SweepMode};
use crate::error::{CliError, CliResult};

pub const CHECK_NAMES: [&str; 6] = [
    "expectation",
    "dominance",
    "decoupling",
    "chaos",
    "stddev",
    "concentration",
];

const DEFAULT_LIPSCHITZ_PAIRS: usize = 1000;

pub fn run(cfg: &ExperimentConfig) -> CliResult<bool> {
    let command = cfg.command.ok_or_else(|| {
        CliError::usage("no command given: use a subcommand or set \"command\" in the config")
    })?;
    if command != CommandName::Sweep && cfg.format() == OutputFormat::Csv {
        return Err(CliError::usage("--format csv is only available for sweep"));
    }
    match command {
        CommandName::Sample => sample(cfg),
        CommandName::Bound => bound(cfg),
        CommandName::Verify => verify(cfg),
        CommandName::Netcert => netcert(cfg),
        CommandName::Sweep => sweep(cfg),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("reports serialize")
}

/// Prints the report and, with `--out`, also stores it as `<out>/<name>.json`.
fn emit<T: Serialize>(cfg: &ExperimentConfig, name: &str, report: &T) -> CliResult<()> {
    let text = to_json(report);
    println!("{text}");
    if let Some(dir) = &cfg.out {
        ensure_dir(dir)?;
        write_file(&dir.join(format!("{name}.json")), &format!("{text}\n"))?;
    }
    Ok(())
}

fn read_matrix(path: &Path) -> CliResult<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    DenseMatrix::from_json(&text)
        .map_err(|e| CliError::usage(format!("{}: invalid matrix: {e}", path.display())))
}

/// Writes `<out>/W.000`, `<out>/W.001`, … and, with `decoupled`, the matching
/// `W_decoupled.*` built from the same `Y`.
fn sample(cfg: &ExperimentConfig) -> CliResult<bool> {
    let model = cfg.model()?;
    let out = ExperimentConfig::require(&cfg.out, "out")?;
    let trials = cfg.trials_or(1);
    if trials > 1000 {
        return Err(CliError::usage("sample writes at most 1000 files (suffixes .000 to .999)"));
    }
    let sampler = WishartSampler::new(&model)?;
    let master = RngSeed(cfg.seed()).child(STREAM_Y);
    ensure_dir(out)?;
    for i in 0..trials {
        let seed = master.child(i as u64);
        write_file(&out.join(format!("W.{i:03}")), &sampler.sample(seed).to_json())?;
        if cfg.decoupled.unwrap_or(false) {
            let w = sampler.sample_decoupled(seed);
            write_file(&out.join(format!("W_decoupled.{i:03}")), &w.to_json())?;
        }
    }
    Ok(true)
}

fn bound(cfg: &ExperimentConfig) -> CliResult<bool> {
    let report = theorem1_bound(&cfg.model()?, cfg.convention())?;
    emit(cfg, "bound", &report)?;
    Ok(true)
}

fn trial_config(cfg: &ExperimentConfig) -> CliResult<TrialConfig> {
    Ok(TrialConfig::new(
        cfg.model()?,
        cfg.trials_or(DEFAULT_NORM_TRIALS),
        RngSeed(cfg.seed()),
    )?)
}

fn verify(cfg: &ExperimentConfig) -> CliResult<bool> {
    let check = ExperimentConfig::require(&cfg.check, "check")?.as_str();
    let seed = RngSeed(cfg.seed());
    let scalar_trials = cfg.trials_or(DEFAULT_SCALAR_TRIALS);
    match check {
        "expectation" => {
            let r = check_expectation(&trial_config(cfg)?)?;
            emit(cfg, check, &r)?;
            Ok(r.holds)
        }
        "dominance" => {
            let r = check_bound_dominance(&trial_config(cfg)?, cfg.convention())?;
            emit(cfg, check, &r)?;
            Ok(r.holds)
        }
        "decoupling" => {
            let r = check_wishart_decoupling(&trial_config(cfg)?)?;
            emit(cfg, check, &r)?;
            Ok(r.holds)
        }
        "chaos" => {
            let paths = ExperimentConfig::require(&cfg.matrices, "matrices")?;
            let family = paths
                .iter()
                .map(|p| read_matrix(p))
                .collect::<CliResult<Vec<_>>>()?;
            let p = family.first().map_or(0, DenseMatrix::rows);
            let theta = cfg.theta.clone().unwrap_or_else(|| SpdMatrix::identity(p));
            let r = check_chaos_decoupling(&family, &theta, scalar_trials, seed)?;
            emit(cfg, check, &r)?;
            Ok(r.holds)
        }
        "stddev" => {
            let a = ExperimentConfig::require(&cfg.vector, "vector")?;
            let theta = cfg
                .theta
                .clone()
                .unwrap_or_else(|| SpdMatrix::identity(a.len()));
            let r = check_linear_form_std(&theta, a, scalar_trials, seed)?;
            emit(cfg, check, &r)?;
            Ok(r.holds)
        }
        "concentration" => {
            let model = cfg.model()?;
            let p = model.p();
            let x = cfg.vector.clone().unwrap_or_else(|| {
                let mut e1 = vec![0.0; p];
                e1[0] = 1.0;
                e1
            });
            let t_grid = match &cfg.t_grid {
                Some(g) => g.clone(),
                None => {
                    let l = (p as f64).sqrt() * model.shape().spectral_norm()? / model.n() as f64;
                    (0..5).map(|k| k as f64 * l).collect()
                }
            };
            let tails = check_sigma_concentration(&model, &x, &t_grid, scalar_trials, seed)?;
            let pairs = cfg.pairs.unwrap_or(DEFAULT_LIPSCHITZ_PAIRS);
            let lipschitz = check_sigma_lipschitz(&model, &x, pairs, seed.child(1))?;
            let holds = tails.holds && lipschitz.holds;
            emit(
                cfg,
                check,
                &json!({ "tails": tails, "lipschitz": lipschitz, "holds": holds }),
            )?;
            Ok(holds)
        }
        other => Err(CliError::usage(format!(
            "unknown check {other:?}; valid checks: {}",
            CHECK_NAMES.join(", ")
        ))),
    }
}

/// One certificate per input file, one JSON object per line.
fn netcert(cfg: &ExperimentConfig) -> CliResult<bool> {
    let paths = ExperimentConfig::require(&cfg.matrices, "matrices")?;
    if paths.is_empty() {
        return Err(CliError::usage("netcert needs at least one matrix file"));
    }
    let mut lines = String::new();
    let mut all_hold = true;
    for path in paths {
        let a = read_matrix(path)?;
        let cert = certify_norm_bound(&a, path.display().to_string())?;
        all_hold &= cert.holds && cert.lower_holds();
        let line = to_json(&cert);
        println!("{line}");
        lines.push_str(&line);
        lines.push('\n');
    }
    if let Some(dir) = &cfg.out {
        ensure_dir(dir)?;
        write_file(&dir.join("certificates.jsonl"), &lines)?;
    }
    Ok(all_hold)
}

fn sweep(cfg: &ExperimentConfig) -> CliResult<bool> {
    let mode = *ExperimentConfig::require(&cfg.mode, "mode")?;
    let family = cfg.family.clone().unwrap_or(ShapeFamily::Identity);
    let theta_rule = cfg.theta_rule.clone().unwrap_or(ThetaRule::Identity);
    let trials = cfg.trials_or(DEFAULT_NORM_TRIALS);
    let seed = RngSeed(cfg.seed());
    let (name, csv, summary) = match mode {
        SweepMode::Scaling => {
            let p = *ExperimentConfig::require(&cfg.p, "p")?;
            let n_grid = ExperimentConfig::require(&cfg.n_grid, "n_grid")?;
            let r = sweep_scaling(p, n_grid, &family, &theta_rule.theta(p), trials, seed)?;
            ("scaling", r.to_csv(), to_json(&r))
        }
        SweepMode::Complexity => {
            let p_grid = ExperimentConfig::require(&cfg.p_grid, "p_grid")?;
            let tol = *ExperimentConfig::require(&cfg.tolerance, "tolerance")?;
            let r = empirical_sample_complexity(p_grid, tol, &family, &theta_rule, trials, seed)?;
            ("complexity", r.to_csv(), to_json(&r))
        }
    };
    match &cfg.out {
        Some(dir) => {
            ensure_dir(dir)?;
            let csv_path: PathBuf = dir.join(format!("{name}.csv"));
            write_file(&csv_path, &csv)?;
            write_file(&dir.join(format!("{name}_summary.json")), &format!("{summary}\n"))?;
        }
        None => match cfg.format() {
            OutputFormat::Csv => print!("{csv}"),
            OutputFormat::Json => println!("{summary}"),
        },
    }
    Ok(true)
}
