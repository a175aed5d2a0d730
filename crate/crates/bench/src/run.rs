//! Experiment execution and the per-record CSV format.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use tikhonov_picard::gsvd::{compute_gsvd, GsvdFactors};
use tikhonov_picard::minimize::GridSpec;
use tikhonov_picard::operators::{add_noise, ProblemInstance};
use tikhonov_picard::picard::{self, default_step, PicardEstimate, PicardMethod};
use tikhonov_picard::selectors::{select, Method, SelectionInput};
use tikhonov_picard::tikhonov::fourier_coeffs;

use crate::config::{ExperimentConfig, PicardSpec, ProblemSpec};
use crate::error::{BenchError, Result};
use crate::summary;

pub const RECORDS_FILE: &str = "records.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const FAILURES_FILE: &str = "failures.log";

pub const CSV_HEADER: [&str; 10] =
    ["problem", "alpha", "seed", "method", "lambda", "msd", "k0", "s2_est", "s2_true", "wall_time"];

/// One selection on one noise realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub alpha: f64,
    pub seed: u64,
    pub method: Method,
    pub lambda: f64,
    pub msd: f64,
    pub k0: Option<usize>,
    pub s2_est: Option<f64>,
    pub s2_true: f64,
    /// Seconds spent in the selection itself.
    pub wall_time: f64,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl RunRecord {
    pub fn to_row(&self) -> [String; 10] {
        [
            self.problem.clone(),
            format_float(self.alpha),
            self.seed.to_string(),
            self.method.label().to_string(),
            format_float(self.lambda),
            format_float(self.msd),
            self.k0.map(|k| k.to_string()).unwrap_or_default(),
            self.s2_est.map(format_float).unwrap_or_default(),
            format_float(self.s2_true),
            format_float(self.wall_time),
        ]
    }

    pub fn from_row(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != CSV_HEADER.len() {
            return Err(BenchError::Records(format!("expected 10 fields, got {}", row.len())));
        }
        let field = |i: usize| row.get(i).unwrap_or_default();
        let float = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| BenchError::Records(format!("bad {} `{}`", CSV_HEADER[i], field(i))))
        };
        let optional = |i: usize| (!field(i).is_empty()).then_some(i);
        Ok(RunRecord {
            problem: field(0).to_string(),
            alpha: float(1)?,
            seed: field(2).parse().map_err(|_| BenchError::Records(format!("bad seed `{}`", field(2))))?,
            method: field(3).parse()?,
            lambda: float(4)?,
            msd: float(5)?,
            k0: optional(6)
                .map(|i| field(i).parse().map_err(|_| BenchError::Records(format!("bad k0 `{}`", field(i)))))
                .transpose()?,
            s2_est: optional(7).map(float).transpose()?,
            s2_true: float(8)?,
            wall_time: float(9)?,
        })
    }
}

/// Streams records as CSV rows, header first.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(CSV_HEADER)?;
        Ok(RecordWriter { inner })
    }

    pub fn write(&mut self, r: &RunRecord) -> Result<()> {
        self.inner.write_record(r.to_row())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| BenchError::Io(e.into_error()))
    }
}

pub fn read_records_from<R: Read>(rd: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(rd);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(BenchError::Records(format!("unexpected header {:?}", header)));
    }
    reader.records().map(|row| RunRecord::from_row(&row?)).collect()
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    read_records_from(BufReader::new(File::open(path)?))
}

/// A selection that could not be completed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub problem: String,
    pub alpha: f64,
    pub seed: u64,
    /// `None` when the whole realization failed.
    pub method: Option<Method>,
    pub message: String,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let method = self.method.map_or("*", |m| m.label());
        write!(f, "{} alpha={:e} seed={} {}: {}", self.problem, self.alpha, self.seed, method, self.message)
    }
}

/// A problem instance together with its decomposition.
#[derive(Debug, Clone)]
pub struct PreparedProblem {
    pub spec: ProblemSpec,
    pub instance: ProblemInstance,
    pub factors: GsvdFactors,
}

impl PreparedProblem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let instance = spec.instance()?;
        let factors = compute_gsvd(&instance.a, &instance.l)?;
        Ok(PreparedProblem { spec, instance, factors })
    }

    /// Loads the decomposition from `dir` when present, otherwise computes
    /// and stores it there.
    pub fn cached(spec: ProblemSpec, dir: &Path) -> Result<Self> {
        let instance = spec.instance()?;
        let path = dir.join(format!("{}.gsvd", spec.cache_key()));
        let expected = (instance.m(), instance.n(), instance.l.nrows());
        if path.exists() {
            let factors = GsvdFactors::read_from(BufReader::new(File::open(&path)?))?;
            if factors.dims() == expected {
                return Ok(PreparedProblem { spec, instance, factors });
            }
            log::warn!("ignoring stale cache {}", path.display());
        }
        let factors = compute_gsvd(&instance.a, &instance.l)?;
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(&path)?);
        factors.write_to(&mut w)?;
        w.flush()?;
        Ok(PreparedProblem { spec, instance, factors })
    }
}

/// Picard estimators in the order they are evaluated.
const PICARD_ORDER: [PicardMethod; 3] =
    [PicardMethod::VSequence, PicardMethod::LillieforsForward, PicardMethod::LillieforsLegacy];

/// Every method on one noise realization. Picard estimates are computed once
/// and shared by all methods that use the same estimator.
pub fn run_realization(
    prep: &PreparedProblem,
    alpha: f64,
    seed: u64,
    methods: &[Method],
    picard_spec: &PicardSpec,
    grid: &GridSpec,
) -> (Vec<RunRecord>, Vec<RunFailure>) {
    let problem = prep.spec.label();
    let fail = |method: Option<Method>, message: String| RunFailure {
        problem: problem.clone(),
        alpha,
        seed,
        method,
        message,
    };
    let f = &prep.factors;
    let noisy = match add_noise(&prep.instance, alpha, seed) {
        Ok(n) => n,
        Err(e) => return (Vec::new(), vec![fail(None, e.to_string())]),
    };
    let spectral = match fourier_coeffs(f, &noisy.b) {
        Ok(s) => s,
        Err(e) => return (Vec::new(), vec![fail(None, e.to_string())]),
    };
    let h = picard_spec.h.unwrap_or_else(|| default_step(f.m()));
    let estimates: Vec<(PicardMethod, std::result::Result<PicardEstimate, String>)> = PICARD_ORDER
        .iter()
        .filter(|pm| methods.iter().any(|m| m.picard_source() == Some(**pm)))
        .map(|&pm| {
            let est = picard::estimate(pm, spectral.beta().as_slice(), f.r(), f.q(), picard_spec.eps, h);
            (pm, est.map_err(|e| e.to_string()))
        })
        .collect();
    let input = SelectionInput {
        factors: f,
        spectral: &spectral,
        x_true: Some(&prep.instance.x_true),
        grid,
    };

    let mut records = Vec::with_capacity(methods.len());
    let mut failures = Vec::new();
    for &method in methods {
        let picard = match method.picard_source() {
            None => None,
            Some(pm) => match estimates.iter().find(|(p, _)| *p == pm).map(|(_, e)| e) {
                Some(Ok(est)) => Some(est),
                Some(Err(msg)) => {
                    failures.push(fail(Some(method), format!("{pm} estimate failed: {msg}")));
                    continue;
                }
                None => unreachable!("estimates cover every configured source"),
            },
        };
        let start = Instant::now();
        let result = select(method, &input, picard);
        let wall_time = start.elapsed().as_secs_f64();
        match result {
            Ok(sel) => records.push(RunRecord {
                problem: problem.clone(),
                alpha,
                seed,
                method,
                lambda: sel.lambda,
                msd: sel.msd.unwrap_or(f64::NAN),
                k0: sel.k0_used,
                s2_est: sel.s2_used,
                s2_true: noisy.s2_true,
                wall_time,
            }),
            Err(e) => failures.push(fail(Some(method), e.to_string())),
        }
    }
    (records, failures)
}

/// Everything a run produced, in deterministic order.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
}

/// Decomposes every configured problem once.
pub fn prepare_problems(cfg: &ExperimentConfig) -> Result<Vec<PreparedProblem>> {
    cfg.problems
        .iter()
        .map(|spec| match &cfg.output.gsvd_cache {
            Some(dir) => PreparedProblem::cached(spec.clone(), dir),
            None => PreparedProblem::new(spec.clone()),
        })
        .collect()
}

/// Runs every (problem, alpha, seed) unit on a bounded worker pool. Results
/// reach `sink` one at a time, in problem/alpha/seed/method order regardless
/// of which worker finished first.
pub fn run_experiment<F>(cfg: &ExperimentConfig, sink: F) -> Result<RunOutcome>
where
    F: FnMut(&RunRecord) -> Result<()>,
{
    cfg.validate()?;
    let prepared = prepare_problems(cfg)?;
    run_prepared(cfg, &prepared, sink)
}

/// [`run_experiment`] with decompositions supplied by the caller.
pub fn run_prepared<F>(cfg: &ExperimentConfig, prepared: &[PreparedProblem], mut sink: F) -> Result<RunOutcome>
where
    F: FnMut(&RunRecord) -> Result<()>,
{
    let seeds: Vec<u64> = cfg.seeds.seeds().collect();
    let mut units = Vec::with_capacity(prepared.len() * cfg.alphas.len() * seeds.len());
    for p in 0..prepared.len() {
        for &alpha in &cfg.alphas {
            for &seed in &seeds {
                units.push((p, alpha, seed));
            }
        }
    }
    let workers = cfg.worker_count().clamp(1, units.len().max(1));
    let next = AtomicUsize::new(0);
    let mut outcome = RunOutcome::default();
    let mut sink_error = None;

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, units) = (&next, &units);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(p, alpha, seed)) = units.get(i) else { break };
                let done = run_realization(&prepared[p], alpha, seed, &cfg.methods, &cfg.picard, &cfg.grid);
                if tx.send((i, done)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        let mut emitted = 0;
        for (i, done) in rx {
            pending.insert(i, done);
            while let Some((records, failures)) = pending.remove(&emitted) {
                emitted += 1;
                for f in &failures {
                    log::warn!("{f}");
                }
                for r in &records {
                    if sink_error.is_none() {
                        if let Err(e) = sink(r) {
                            sink_error = Some(e);
                            next.store(units.len(), Ordering::Relaxed);
                        }
                    }
                }
                outcome.records.extend(records);
                outcome.failures.extend(failures);
            }
        }
    });

    match sink_error {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}

/// Paths written by [`run_to_dir`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub records: PathBuf,
    pub outcome: RunOutcome,
}

/// Runs the experiment, streaming `records.csv` into the output directory,
/// then writes the resolved config, the failure log and all summaries.
pub fn run_to_dir(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(CONFIG_FILE), cfg.to_json()?)?;
    let records_path = dir.join(RECORDS_FILE);
    let mut writer = RecordWriter::new(BufWriter::new(File::create(&records_path)?))?;
    let outcome = run_experiment(cfg, |r| writer.write(r))?;
    writer.finish()?.flush()?;

    let mut log = BufWriter::new(File::create(dir.join(FAILURES_FILE))?);
    for f in &outcome.failures {
        writeln!(log, "{f}")?;
    }
    log.flush()?;

    let table = summary::summarize(&outcome.records);
    summary::write_all(&table, &dir, cfg.output.svg)?;
    Ok(RunArtifacts { dir, records: records_path, outcome })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> RunRecord {
        RunRecord {
            problem: "heat".into(),
            alpha: 1e-4,
            seed: 7,
            method: Method::SsP3,
            lambda: 0.1 + 0.2,
            msd: 1.0 / 3.0,
            k0: Some(17),
            s2_est: Some(2.5e-9),
            s2_true: std::f64::consts::PI * 1e-9,
            wall_time: 0.25,
        }
    }

    #[test]
    fn floats_keep_17_significant_digits() {
        assert_eq!(format_float(0.1 + 0.2), "3.0000000000000004e-1");
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        for x in [1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE, -2.5e-300] {
            assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn records_round_trip_through_csv() {
        let mut opt = record();
        opt.method = Method::Opt;
        opt.k0 = None;
        opt.s2_est = None;
        let mut w = RecordWriter::new(Vec::new()).unwrap();
        w.write(&record()).unwrap();
        w.write(&opt).unwrap();
        let bytes = w.finish().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("problem,alpha,seed,method,lambda,msd,k0,s2_est,s2_true,wall_time\n"));
        assert!(text.contains("OPT,"));
        let back = read_records_from(bytes.as_slice()).unwrap();
        assert_eq!(back, vec![record(), opt]);
    }

    #[test]
    fn rejects_foreign_csv() {
        assert!(read_records_from("a,b\n1,2\n".as_bytes()).is_err());
        let bad = "problem,alpha,seed,method,lambda,msd,k0,s2_est,s2_true,wall_time\nheat,x,1,OPT,1,1,,,1,0\n";
        assert!(read_records_from(bad.as_bytes()).is_err());
    }
}
