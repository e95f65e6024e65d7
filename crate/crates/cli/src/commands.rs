use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use exmart_core::experiment::{run_experiment, ExperimentResult, RunConfig, StreamSource};
use exmart_core::ingest::write_stream_csv;
use exmart_core::strangeness::{KnnProviderConfig, ProviderConfig, SvmProviderConfig};
use exmart_core::{doob_false_alarm_bound, threshold_from_design, Error, Scenario, TestDesign};
use log::{info, warn};
use serde::Serialize;

use crate::args::{DesignArgs, GenerateArgs, RunArgs, StrangenessKind, StreamArgs};
use crate::CliError;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::InvalidConfig(msg.into()))
}

fn output(path: &Path, err: std::io::Error) -> CliError {
    CliError::Output(format!("{}: {err}", path.display()))
}

fn synthetic(stream: &StreamArgs, scenario: Scenario) -> StreamSource {
    StreamSource::Synthetic {
        scenario,
        segments: stream.segments,
        segment_len: stream.segment_len,
        dim: stream.dim,
        noise_pct: stream.noise_pct,
    }
}

fn source(args: &RunArgs) -> Result<StreamSource, CliError> {
    let requested = args.stream.scenario.as_deref().map(str::to_ascii_lowercase);
    let requested = requested.as_deref().or(match (&args.input, &args.recipe) {
        (Some(_), None) => Some("csv"),
        (None, Some(_)) => Some("recipe"),
        _ => None,
    });
    match (requested.unwrap_or("b"), &args.input, &args.recipe) {
        ("csv", Some(path), None) => Ok(StreamSource::Csv {
            path: path.clone(),
            label_col: args.label_col.clone(),
        }),
        ("csv", _, _) => Err(config("scenario csv needs --input and no --recipe")),
        ("recipe", None, Some(path)) => Ok(StreamSource::Recipe { path: path.clone() }),
        ("recipe", _, _) => Err(config("scenario recipe needs --recipe and no --input")),
        (name, None, None) => Ok(synthetic(&args.stream, name.parse()?)),
        (name, _, _) => Err(config(format!(
            "--input and --recipe cannot be combined with scenario {}",
            name.to_ascii_uppercase()
        ))),
    }
}

fn provider(args: &RunArgs) -> Result<ProviderConfig, CliError> {
    match args.strangeness {
        StrangenessKind::Knn => {
            if args.gamma.is_some() || args.c.is_some() || args.retrain_every.is_some() {
                return Err(config(
                    "--gamma, --c and --retrain-every apply to --strangeness svm",
                ));
            }
            let mut cfg = KnnProviderConfig::default();
            if let Some(k) = args.k {
                cfg.k = k;
            }
            Ok(ProviderConfig::Knn(cfg))
        }
        StrangenessKind::Svm => {
            if args.k.is_some() {
                return Err(config("--k applies to --strangeness knn"));
            }
            let mut cfg = SvmProviderConfig::default();
            cfg.gamma = args.gamma.or(cfg.gamma);
            cfg.c = args.c.unwrap_or(cfg.c);
            cfg.retrain_every = args.retrain_every.unwrap_or(cfg.retrain_every);
            Ok(ProviderConfig::Svm(cfg))
        }
    }
}

pub fn build_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let cfg = RunConfig {
        source: source(args)?,
        lambdas: args.lambdas.clone(),
        epsilon: args.epsilon,
        window_cap: args.window_cap,
        provider: provider(args)?,
        replicas: args.replicas,
        seed: args.stream.seed,
        emit_trajectory: args.emit_trajectory,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    artifacts: Artifacts,
    failed_runs: usize,
}

#[derive(Serialize, Default)]
struct Artifacts {
    sweep: PathBuf,
    reports: Vec<PathBuf>,
    trajectories: Vec<PathBuf>,
}

fn run_stem(lambda: f64, replica: usize) -> String {
    format!("lambda-{lambda}_replica-{replica}")
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| output(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| output(path, e))
}

fn write_outputs(out: &Path, cfg: &RunConfig, result: &ExperimentResult) -> Result<(), CliError> {
    let mut artifacts = Artifacts {
        sweep: "sweep.csv".into(),
        ..Artifacts::default()
    };
    for dir in ["reports", "trajectories"] {
        if dir == "trajectories" && !cfg.emit_trajectory {
            continue;
        }
        fs::create_dir_all(out.join(dir)).map_err(|e| output(&out.join(dir), e))?;
    }
    write_file(&out.join(&artifacts.sweep), |w| {
        exmart_core::experiment::write_sweep_csv(w, cfg, result)
    })?;

    let mut failed = 0;
    for run in &result.runs {
        let stem = run_stem(run.lambda, run.replica);
        let rel = PathBuf::from("reports").join(format!("{stem}.txt"));
        write_file(&out.join(&rel), |w| {
            writeln!(w, "scenario = {}", cfg.source.label())?;
            writeln!(w, "lambda = {}", run.lambda)?;
            writeln!(w, "epsilon = {}", cfg.epsilon)?;
            writeln!(w, "provider = {}", cfg.provider.name())?;
            writeln!(w, "seed = {}", cfg.seed)?;
            writeln!(w, "replica = {}", run.replica)?;
            match &run.report {
                Ok(r) => w.write_all(r.to_key_value().as_bytes()),
                Err(e) => writeln!(w, "error = {e}"),
            }
        })?;
        artifacts.reports.push(rel);
        if let Err(e) = &run.report {
            failed += 1;
            warn!("lambda {} replica {} failed: {e}", run.lambda, run.replica);
        }
        if let Some(t) = &run.trajectory {
            let rel = PathBuf::from("trajectories").join(format!("{stem}.csv"));
            write_file(&out.join(&rel), |w| t.write_csv(w))?;
            artifacts.trajectories.push(rel);
        }
    }

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        artifacts,
        failed_runs: failed,
    };
    let path = out.join("manifest.json");
    write_file(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    if failed == result.runs.len() {
        return Err(CliError::Internal(format!("all {failed} runs failed")));
    }
    Ok(())
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let cfg = build_config(&args)?;
    fs::create_dir_all(&args.out).map_err(|e| output(&args.out, e))?;
    info!(
        "scenario {}, {} lambda value(s), {} replica(s)",
        cfg.source.label(),
        cfg.lambdas.len(),
        cfg.replicas
    );
    let result = run_experiment(&cfg)?;
    write_outputs(&args.out, &cfg, &result)?;
    for a in &result.aggregates {
        println!(
            "lambda {:>8}  precision {:.3}  recall {:.3}  median delay {:.1}  false alarms {:.1}  ({} runs)",
            a.lambda, a.precision, a.recall, a.median_delay, a.false_alarms, a.replicas_ok
        );
    }
    Ok(())
}

pub fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let scenario: Scenario = args.stream.scenario.as_deref().unwrap_or("B").parse()?;
    let source = synthetic(&args.stream, scenario);
    let cfg = RunConfig {
        source,
        ..RunConfig::desk(scenario, vec![2.0])
    };
    cfg.validate()?;
    let s = &args.stream;
    let stream = scenario.generate(s.segments, s.segment_len, s.dim, s.noise_pct, s.seed)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| output(dir, e))?;
    }
    write_stream_csv(&args.out, &stream).map_err(|e| match e {
        Error::Io { path, source } => output(&path, source),
        other => CliError::Core(other),
    })?;
    println!(
        "{} points, {} change points -> {}",
        stream.len(),
        stream.true_change_points.len(),
        args.out.display()
    );
    Ok(())
}

pub fn design(args: DesignArgs) -> Result<(), CliError> {
    let design = TestDesign::new(args.alpha, args.beta)?;
    let lambda = threshold_from_design(&design);
    println!("lambda = {lambda}");
    println!("false_alarm_bound = {}", doob_false_alarm_bound(lambda));
    Ok(())
}
