//! Reproducible detection experiments: build streams, run detectors over a
//! threshold sweep and replicas, score the runs, aggregate per threshold.
//!
//! Every replica owns RNG streams derived from `(seed, replica)`, and all
//! thresholds of a replica share the same stream and tie-breaking draws, so
//! results are independent of scheduling.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::detector::{Detector, DetectorConfig, MultiChannelDetector};
use crate::error::{Error, Result};
use crate::eval::{evaluate, report::median, EvalReport};
use crate::ingest::{compose_stream, load_labeled_csv, RecipeFile};
use crate::martingale::DEFAULT_EPSILON;
use crate::rng::derive_seed;
use crate::simulate::{Scenario, StreamSpec};
use crate::strangeness::{KnnProviderConfig, ProviderConfig};
use crate::types::Label;

const STREAM_TAG: u64 = 0x57_2EA;
const DETECTOR_TAG: u64 = 0xDE7_EC7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StreamSource {
    Synthetic {
        scenario: Scenario,
        segments: usize,
        segment_len: usize,
        dim: Option<usize>,
        noise_pct: Option<f64>,
    },
    /// A labeled CSV; change points are read from a sibling `.changes` file
    /// when present.
    Csv {
        path: PathBuf,
        label_col: String,
    },
    Recipe {
        path: PathBuf,
    },
}

impl StreamSource {
    pub fn synthetic(scenario: Scenario, segments: usize, segment_len: usize) -> Self {
        StreamSource::Synthetic {
            scenario,
            segments,
            segment_len,
            dim: None,
            noise_pct: None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            StreamSource::Synthetic { scenario, .. } => scenario.to_string(),
            StreamSource::Csv { .. } => "csv".into(),
            StreamSource::Recipe { .. } => "recipe".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub source: StreamSource,
    pub lambdas: Vec<f64>,
    pub epsilon: f64,
    pub window_cap: Option<usize>,
    #[serde(serialize_with = "ser_provider")]
    pub provider: ProviderConfig,
    pub replicas: usize,
    pub seed: u64,
    pub emit_trajectory: bool,
}

fn ser_provider<S: serde::Serializer>(
    p: &ProviderConfig,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let text = match p {
        ProviderConfig::Knn(c) => format!("knn(k={})", c.k),
        ProviderConfig::Svm(c) => format!(
            "svm(gamma={}, c={}, retrain_every={})",
            c.gamma.map_or("1/dim".to_string(), |g| g.to_string()),
            c.c,
            c.retrain_every
        ),
    };
    s.serialize_str(&text)
}

impl RunConfig {
    /// Desk-scale defaults: 10 segments of 1000 points, 20 replicas.
    pub fn desk(scenario: Scenario, lambdas: Vec<f64>) -> Self {
        Self {
            source: StreamSource::synthetic(scenario, 10, 1000),
            lambdas,
            epsilon: DEFAULT_EPSILON,
            window_cap: None,
            provider: ProviderConfig::Knn(KnnProviderConfig::default()),
            replicas: 20,
            seed: 0,
            emit_trajectory: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.lambdas.is_empty() {
            return bad("at least one lambda is required".into());
        }
        for &l in &self.lambdas {
            DetectorConfig::new(l)
                .with_epsilon(self.epsilon)
                .with_window_cap(self.window_cap)
                .validate()?;
        }
        if self.replicas == 0 {
            return bad("replicas must be positive".into());
        }
        match &self.provider {
            ProviderConfig::Knn(c) if c.k == 0 => return bad("k must be at least 1".into()),
            ProviderConfig::Svm(c)
                if !(c.c > 0.0) || c.gamma.is_some_and(|g| !(g > 0.0)) || c.retrain_every == 0 =>
            {
                return bad("svm needs c > 0, gamma > 0 and retrain_every >= 1".into())
            }
            _ => {}
        }
        if let StreamSource::Synthetic {
            scenario,
            segments,
            segment_len,
            dim,
            noise_pct,
        } = &self.source
        {
            if *segments == 0 || *segment_len == 0 {
                return bad("segments and segment length must be positive".into());
            }
            let dim = dim.unwrap_or(scenario.default_dim());
            match scenario {
                Scenario::A | Scenario::B | Scenario::C if dim != 2 => {
                    return bad(format!(
                        "scenario {scenario} is two-dimensional, got dim {dim}"
                    ))
                }
                Scenario::D if dim < 2 => return bad("scenario D needs dim >= 2".into()),
                Scenario::E if dim == 0 => return bad("scenario E needs dim >= 1".into()),
                _ => {}
            }
            if let Some(p) = noise_pct {
                if !(0.0..50.0).contains(p) {
                    return bad(format!("noise percentage must lie in [0, 50), got {p}"));
                }
            }
        }
        Ok(())
    }
}

/// Per-point record of every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub index: u64,
    pub log_martingale: Vec<f64>,
    pub p_value: Vec<f64>,
    pub detection: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub channels: Vec<Label>,
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    /// CSV with columns `index, logM_<class>..., p_<class>..., detection`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["index".to_string()];
        header.extend(self.channels.iter().map(|c| format!("logM_{c}")));
        header.extend(self.channels.iter().map(|c| format!("p_{c}")));
        header.push("detection".into());
        writeln!(w, "{}", header.join(","))?;
        for r in &self.rows {
            let mut line = r.index.to_string();
            for v in r.log_martingale.iter().chain(&r.p_value) {
                line.push(',');
                line.push_str(&v.to_string());
            }
            line.push_str(if r.detection { ",1" } else { ",0" });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Outcome of running one threshold on one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRun {
    pub detections: Vec<u64>,
    /// P-values of the first channel, for the uniformity diagnostic.
    pub p_values: Vec<f64>,
    pub trajectory: Option<Trajectory>,
}

/// Run a detector over `stream`. Streams with more than two labels use one
/// one-vs-rest channel per class.
pub fn run_detector(
    stream: &StreamSpec,
    config: DetectorConfig,
    provider: &ProviderConfig,
    keep_trajectory: bool,
) -> Result<DetectionRun> {
    let labels = stream.labels();
    let dim = stream.dim().unwrap_or(1);
    let mut detections = Vec::new();
    let mut p_values = Vec::with_capacity(stream.len());
    let mut trajectory = keep_trajectory.then(Trajectory::default);

    if labels.len() <= 2 {
        let mut det = Detector::new(config, provider.build(dim))?;
        if let Some(t) = trajectory.as_mut() {
            t.channels = vec![det.channel()];
        }
        for p in &stream.points {
            let out = det.step(p.clone())?;
            p_values.push(out.p_value.get());
            if let Some(ev) = out.event {
                detections.push(ev.index);
            }
            if let Some(t) = trajectory.as_mut() {
                t.rows.push(TrajectoryRow {
                    index: out.index,
                    log_martingale: vec![out.log_martingale],
                    p_value: vec![out.p_value.get()],
                    detection: out.event.is_some(),
                });
            }
        }
    } else {
        let mut det = MultiChannelDetector::new(config, &labels, |_| provider.build(dim))?;
        if let Some(t) = trajectory.as_mut() {
            t.channels = labels.clone();
        }
        for p in &stream.points {
            let step = det.step(p)?;
            p_values.push(step.channels[0].p_value.get());
            if let Some(ev) = step.event {
                detections.push(ev.index);
            }
            if let Some(t) = trajectory.as_mut() {
                t.rows.push(TrajectoryRow {
                    index: step.channels[0].index,
                    log_martingale: step.channels.iter().map(|o| o.log_martingale).collect(),
                    p_value: step.channels.iter().map(|o| o.p_value.get()).collect(),
                    detection: step.event.is_some(),
                });
            }
        }
    }
    Ok(DetectionRun {
        detections,
        p_values,
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaRun {
    pub lambda: f64,
    pub replica: usize,
    /// Failures are recorded per replica; the sweep continues.
    pub report: std::result::Result<EvalReport, String>,
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaAggregate {
    pub lambda: f64,
    pub replicas_ok: usize,
    pub precision: f64,
    pub recall: f64,
    pub mean_delay: f64,
    pub median_delay: f64,
    pub false_alarms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Ordered by lambda (as configured), then replica.
    pub runs: Vec<ReplicaRun>,
    pub aggregates: Vec<LambdaAggregate>,
}

impl ExperimentResult {
    pub fn aggregate(&self, lambda: f64) -> Option<&LambdaAggregate> {
        self.aggregates.iter().find(|a| a.lambda == lambda)
    }
}

enum Loaded {
    Fixed(StreamSpec),
    Recipe(crate::ingest::SegmentRecipe, Option<u64>),
    Synthetic,
}

fn read_change_points(path: &Path) -> Result<Vec<u64>> {
    let changes = path.with_extension("changes");
    if !changes.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&changes).map_err(|source| Error::Io {
        path: changes.clone(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                path: changes.clone(),
                line: i as u64 + 1,
                message: format!("`{l}` is not a point index"),
            })
        })
        .collect()
}

fn load_source(source: &StreamSource) -> Result<Loaded> {
    match source {
        StreamSource::Synthetic { .. } => Ok(Loaded::Synthetic),
        StreamSource::Csv { path, label_col } => {
            let points = load_labeled_csv(path, label_col)?;
            if points.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "{} has no data rows",
                    path.display()
                )));
            }
            Ok(Loaded::Fixed(StreamSpec::new(
                points,
                read_change_points(path)?,
            )?))
        }
        StreamSource::Recipe { path } => {
            let file = RecipeFile::load(path)?;
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            let recipe = file.resolve(base)?;
            recipe.validate()?;
            Ok(Loaded::Recipe(recipe, file.seed))
        }
    }
}

fn replica_stream(
    source: &StreamSource,
    loaded: &Loaded,
    seed: u64,
    replica: usize,
) -> Result<StreamSpec> {
    let stream_seed = derive_seed(seed, &[STREAM_TAG, replica as u64]);
    match (source, loaded) {
        (
            StreamSource::Synthetic {
                scenario,
                segments,
                segment_len,
                dim,
                noise_pct,
            },
            _,
        ) => scenario.generate(*segments, *segment_len, *dim, *noise_pct, stream_seed),
        (_, Loaded::Fixed(s)) => Ok(s.clone()),
        (_, Loaded::Recipe(r, fixed)) => compose_stream(r, fixed.unwrap_or(stream_seed)),
        _ => unreachable!("source and loaded stream disagree"),
    }
}

/// Seed of the detector used by `replica` (shared by every threshold).
pub fn detector_seed(seed: u64, replica: usize) -> u64 {
    derive_seed(seed, &[DETECTOR_TAG, replica as u64])
}

/// Run every `(lambda, replica)` cell of the sweep.
///
/// Configuration and input problems are reported before any detection runs;
/// failures inside a replica are recorded in that replica's report.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let loaded = load_source(&cfg.source)?;
    if let Loaded::Fixed(s) = &loaded {
        s.validate()?;
    }

    let per_replica: Vec<Vec<ReplicaRun>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|replica| {
            let stream = replica_stream(&cfg.source, &loaded, cfg.seed, replica);
            cfg.lambdas
                .iter()
                .map(|&lambda| {
                    let outcome = stream
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|stream| {
                            let det_cfg = DetectorConfig::new(lambda)
                                .with_epsilon(cfg.epsilon)
                                .with_window_cap(cfg.window_cap)
                                .with_seed(detector_seed(cfg.seed, replica));
                            run_detector(stream, det_cfg, &cfg.provider, cfg.emit_trajectory)
                                .map(|run| {
                                    let report = evaluate(
                                        &run.detections,
                                        &stream.true_change_points,
                                        stream.len() as u64,
                                        &run.p_values,
                                    );
                                    (report, run.trajectory)
                                })
                                .map_err(|e| e.to_string())
                        });
                    let (report, trajectory) = match outcome {
                        Ok((r, t)) => (Ok(r), t),
                        Err(e) => (Err(e), None),
                    };
                    ReplicaRun {
                        lambda,
                        replica,
                        report,
                        trajectory,
                    }
                })
                .collect()
        })
        .collect();

    let mut runs = Vec::with_capacity(cfg.replicas * cfg.lambdas.len());
    for (li, _) in cfg.lambdas.iter().enumerate() {
        for rep in &per_replica {
            runs.push(rep[li].clone());
        }
    }
    let aggregates = cfg
        .lambdas
        .iter()
        .map(|&lambda| aggregate(lambda, runs.iter().filter(|r| r.lambda == lambda)))
        .collect();
    Ok(ExperimentResult { runs, aggregates })
}

fn aggregate<'a>(lambda: f64, runs: impl Iterator<Item = &'a ReplicaRun>) -> LambdaAggregate {
    let ok: Vec<&EvalReport> = runs.filter_map(|r| r.report.as_ref().ok()).collect();
    let med = |f: &dyn Fn(&EvalReport) -> f64| {
        let v: Vec<f64> = ok.iter().map(|r| f(r)).filter(|x| !x.is_nan()).collect();
        median(&v)
    };
    LambdaAggregate {
        lambda,
        replicas_ok: ok.len(),
        precision: med(&|r| r.precision),
        recall: med(&|r| r.recall),
        mean_delay: med(&|r| r.mean_delay()),
        median_delay: med(&|r| r.median_delay()),
        false_alarms: med(&|r| r.false_alarms as f64),
    }
}

const SWEEP_HEADER: &str = "scenario,lambda,epsilon,provider,seed,replica,precision,recall,mean_delay,median_delay,false_alarms,missed,detections,correct,ks_statistic,ks_p_value,error";

/// Sweep CSV: one row per `(lambda, replica)` followed by one `aggregate`
/// row per lambda holding the medians across replicas.
pub fn write_sweep_csv<W: Write>(
    mut w: W,
    cfg: &RunConfig,
    result: &ExperimentResult,
) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    let prefix = |lambda: f64| {
        format!(
            "{},{},{},{},{}",
            cfg.source.label(),
            lambda,
            cfg.epsilon,
            cfg.provider.name(),
            cfg.seed
        )
    };
    for run in &result.runs {
        match &run.report {
            Ok(r) => {
                let (ks_d, ks_p) =
                    r.ks.map_or((f64::NAN, f64::NAN), |k| (k.statistic, k.p_value));
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},",
                    prefix(run.lambda),
                    run.replica,
                    r.precision,
                    r.recall,
                    r.mean_delay(),
                    r.median_delay(),
                    r.false_alarms,
                    r.missed,
                    r.detections,
                    r.correct,
                    ks_d,
                    ks_p
                )?;
            }
            Err(e) => {
                let msg = e.replace(['"', ',', '\n'], " ");
                writeln!(w, "{},{},,,,,,,,,,,{msg}", prefix(run.lambda), run.replica)?;
            }
        }
    }
    for a in &result.aggregates {
        writeln!(
            w,
            "{},aggregate,{},{},{},{},{},,,,,,",
            prefix(a.lambda),
            a.precision,
            a.recall,
            a.mean_delay,
            a.median_delay,
            a.false_alarms
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scenario: Scenario) -> RunConfig {
        RunConfig {
            source: StreamSource::synthetic(scenario, 3, 300),
            replicas: 3,
            seed: 11,
            ..RunConfig::desk(scenario, vec![10.0, 20.0])
        }
    }

    #[test]
    fn validation_catches_inconsistencies() {
        let mut cfg = small(Scenario::A);
        cfg.source = StreamSource::Synthetic {
            scenario: Scenario::A,
            segments: 3,
            segment_len: 10,
            dim: Some(5),
            noise_pct: None,
        };
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidConfig(_))));
        let mut cfg = small(Scenario::B);
        cfg.lambdas = vec![0.5];
        assert!(cfg.validate().is_err());
        cfg.lambdas.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_layout_and_determinism() {
        let cfg = small(Scenario::B);
        let a = run_experiment(&cfg).unwrap();
        assert_eq!(a.runs.len(), 6);
        assert_eq!(a.aggregates.len(), 2);
        assert_eq!(a, run_experiment(&cfg).unwrap());
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &cfg, &a).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 6 + 2);
        assert!(text.lines().skip(1).all(|l| l.starts_with("B,")));
        assert_eq!(
            text.lines().filter(|l| l.contains(",aggregate,")).count(),
            2
        );
    }

    #[test]
    fn trajectory_rows_cover_stream() {
        let mut cfg = small(Scenario::C);
        cfg.replicas = 1;
        cfg.lambdas = vec![10.0];
        cfg.emit_trajectory = true;
        let res = run_experiment(&cfg).unwrap();
        let t = res.runs[0].trajectory.as_ref().unwrap();
        assert_eq!(t.rows.len(), 900);
        let flagged = t.rows.iter().filter(|r| r.detection).count();
        assert_eq!(flagged, res.runs[0].report.as_ref().unwrap().detections);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("index,logM_0,p_0,detection\n"));
    }

    #[test]
    fn multi_class_stream_uses_channels() {
        use crate::types::LabeledPoint;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("three.csv");
        let pts: Vec<LabeledPoint> = (0..60)
            .map(|i| LabeledPoint::new(vec![(i % 3) as f64 + 0.01 * i as f64], i % 3))
            .collect();
        let stream = StreamSpec::new(pts, vec![31]).unwrap();
        crate::ingest::write_stream_csv(&path, &stream).unwrap();
        let cfg = RunConfig {
            source: StreamSource::Csv {
                path,
                label_col: "label".into(),
            },
            replicas: 1,
            emit_trajectory: true,
            ..RunConfig::desk(Scenario::B, vec![10.0])
        };
        let res = run_experiment(&cfg).unwrap();
        let t = res.runs[0].trajectory.as_ref().unwrap();
        assert_eq!(t.channels, vec![0, 1, 2]);
        assert_eq!(t.rows[0].log_martingale.len(), 3);
    }
}
