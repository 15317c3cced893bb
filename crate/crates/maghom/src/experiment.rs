//! Monte Carlo sweeps over random graphs: expected diagonal Betti numbers,
//! threshold crossings, normalized ratios and normality diagnostics.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::chain::boundary_between;
use crate::graph::{all_pairs_distances, Graph};
use crate::homology::{compute_homology, HomologyError};
use crate::linalg::matrix_rank_exact;
use crate::random::{sample_er, sample_rgg, trial_seed, EdgeDensity, ErParams, ModelError, RggParams};
use crate::trail::{enumerate_trails_capped, Theory};

pub const SUMMARY_HEADER: &str =
    "model,n,k,param_name,param_value,trials,mean_beta,var_beta,ci_lo,ci_hi,skew,kurtosis,truncated_count,seed";
pub const TRIAL_HEADER: &str = "trial,seed,beta,t_kk,t_km1k,wall_ms,truncated";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("variance of beta is zero in this cell")]
    DegenerateVariance,
    #[error("no untruncated trials in cell {0}")]
    EmptyCell(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Er,
    /// Flat torus of the given area.
    Rgg { area: f64 },
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Er => "er",
            Model::Rgg { .. } => "rgg",
        }
    }

    /// Exponent beyond which the expected diagonal Betti number vanishes.
    pub fn threshold(self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            Model::Er => (k + 1.0) / (2.0 * k - 1.0),
            Model::Rgg { .. } => (k + 1.0) / (2.0 * k),
        }
    }
}

/// Density parameter of a sweep cell. `Q` means `p = n^{-q}` for ER and `r = n^{-q}` for RGG.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    Q(f64),
    P(f64),
    R(f64),
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Q(_) => "q",
            Param::P(_) => "p",
            Param::R(_) => "r",
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Param::Q(v) | Param::P(v) | Param::R(v) => v,
        }
    }

    /// The equivalent exponent `q` at size `n`.
    pub fn as_q(self, n: usize) -> f64 {
        match self {
            Param::Q(q) => q,
            Param::P(v) | Param::R(v) => -v.ln() / (n as f64).ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub model: Model,
    pub k: usize,
    pub ns: Vec<usize>,
    pub params: Vec<Param>,
    pub trials: usize,
    pub seed: u64,
    /// Per-trial cap on generators enumerated in either grade.
    pub budget: usize,
    pub workers: usize,
    /// Record wall-clock time per trial; off by default so output is reproducible.
    pub timing: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::Config("trials must be at least 1".into()));
        }
        if self.ns.is_empty() || self.params.is_empty() {
            return Err(ExperimentError::Config("n and parameter grids must be nonempty".into()));
        }
        if self.k == 0 {
            return Err(ExperimentError::Config("k must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(ExperimentError::Config("workers must be at least 1".into()));
        }
        for (model, param) in self.ns.iter().flat_map(|&n| self.params.iter().map(move |&p| (n, p))) {
            self.sampler(model, param, 0)?;
        }
        Ok(())
    }

    /// Cells in output order: `n` outermost, then the parameter grid.
    pub fn cells(&self) -> Vec<(usize, Param)> {
        self.ns.iter().flat_map(|&n| self.params.iter().map(move |&p| (n, p))).collect()
    }

    fn sampler(&self, n: usize, param: Param, seed: u64) -> Result<Sampler, ExperimentError> {
        match (self.model, param) {
            (Model::Er, Param::Q(q)) => Ok(Sampler::Er(ErParams::new(n, EdgeDensity::Q(q), seed)?)),
            (Model::Er, Param::P(p)) => Ok(Sampler::Er(ErParams::new(n, EdgeDensity::P(p), seed)?)),
            (Model::Rgg { area }, Param::Q(q)) => Ok(Sampler::Rgg(RggParams::new(n, (n as f64).powf(-q), area, seed)?)),
            (Model::Rgg { area }, Param::R(r)) => Ok(Sampler::Rgg(RggParams::new(n, r, area, seed)?)),
            (m, p) => Err(ExperimentError::Config(format!("parameter {} does not apply to {}", p.name(), m.name()))),
        }
    }

    /// Graph of trial `t` in cell `cell`.
    pub fn sample(&self, cell: usize, t: usize) -> Result<(u64, Graph), ExperimentError> {
        let (n, param) = self.cells()[cell];
        let seed = trial_seed(self.seed, cell as u64, t as u64);
        let g = match self.sampler(n, param, seed)? {
            Sampler::Er(p) => sample_er(&p)?,
            Sampler::Rgg(p) => sample_rgg(&p).0,
        };
        Ok((seed, g))
    }
}

enum Sampler {
    Er(ErParams),
    Rgg(RggParams),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentRecord {
    pub trial: usize,
    pub seed: u64,
    /// `None` when the trial hit the budget.
    pub beta: Option<usize>,
    pub t_kk: Option<usize>,
    pub t_km1k: Option<usize>,
    pub wall_ms: u64,
}

impl ExperimentRecord {
    pub fn truncated(&self) -> bool {
        self.beta.is_none()
    }

    /// `t_kk - t_{k-1,k} <= beta <= t_kk`.
    pub fn satisfies_sandwich(&self) -> bool {
        match (self.beta, self.t_kk, self.t_km1k) {
            (Some(b), Some(t), Some(s)) => b <= t && t <= b + s,
            _ => true,
        }
    }
}

/// Diagonal eulerian Betti number as `|ET_{k,k}| - rank ∂_{k,k}`, with both trail counts.
pub fn diagonal_betti(g: &Graph, k: usize, cap: usize) -> Option<(usize, usize, usize)> {
    let d = all_pairs_distances(g);
    let l = k as u32;
    let top = enumerate_trails_capped(g, &d, k, l, Theory::Emc, cap).ok()?;
    let below = enumerate_trails_capped(g, &d, k - 1, l, Theory::Emc, cap).ok()?;
    let rank = matrix_rank_exact(&boundary_between(&d, &top, &below));
    Some((top.len() - rank, top.len(), below.len()))
}

pub fn run_trial(g: &Graph, k: usize, trial: usize, seed: u64, cap: usize, timing: bool) -> ExperimentRecord {
    let start = Instant::now();
    let out = diagonal_betti(g, k, cap);
    let wall_ms = if timing { start.elapsed().as_millis() as u64 } else { 0 };
    ExperimentRecord {
        trial,
        seed,
        beta: out.map(|o| o.0),
        t_kk: out.map(|o| o.1),
        t_km1k: out.map(|o| o.2),
        wall_ms,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub model: Model,
    pub n: usize,
    pub k: usize,
    pub param: Param,
    /// Untruncated trials.
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub ci: (f64, f64),
    /// Standardized third moment.
    pub skew: f64,
    /// Standardized fourth moment (3 for a normal law).
    pub kurtosis: f64,
    pub truncated: usize,
    pub seed: u64,
}

/// Sample moments of a slice: mean, unbiased variance, standardized third and fourth moments.
pub fn moments(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let c = x - mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    let var = if xs.len() > 1 { m2 / (n - 1.0) } else { 0.0 };
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skew, kurt) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (f64::NAN, f64::NAN)
    };
    (mean, var, skew, kurt)
}

pub fn summarize(cfg: &SweepConfig, cell: usize, records: &[ExperimentRecord]) -> CellSummary {
    let (n, param) = cfg.cells()[cell];
    let betas: Vec<f64> = records.iter().filter_map(|r| r.beta).map(|b| b as f64).collect();
    let (mean, variance, skew, kurtosis) = moments(&betas);
    let half = 1.96 * (variance / betas.len().max(1) as f64).sqrt();
    CellSummary {
        model: cfg.model,
        n,
        k: cfg.k,
        param,
        count: betas.len(),
        mean,
        variance,
        ci: (mean - half, mean + half),
        skew,
        kurtosis,
        truncated: records.len() - betas.len(),
        seed: cfg.seed,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub summaries: Vec<CellSummary>,
    pub records: Vec<Vec<ExperimentRecord>>,
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool")
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, ExperimentError> {
    cfg.validate()?;
    let cells = cfg.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let flat: Vec<ExperimentRecord> = pool(cfg.workers).install(|| {
        jobs.par_iter()
            .map(|&(c, t)| {
                let (seed, g) = cfg.sample(c, t)?;
                Ok(run_trial(&g, cfg.k, t, seed, cfg.budget, cfg.timing))
            })
            .collect::<Result<_, ExperimentError>>()
    })?;
    let records: Vec<Vec<ExperimentRecord>> = flat.chunks(cfg.trials).map(<[_]>::to_vec).collect();
    let summaries = records.iter().enumerate().map(|(c, r)| summarize(cfg, c, r)).collect();
    Ok(SweepResult { summaries, records })
}

/// Float text with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".into()
    }
}

fn opt(x: Option<usize>) -> String {
    x.map_or_else(|| "na".into(), |v| v.to_string())
}

pub fn summary_csv(summaries: &[CellSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER.split(',')).unwrap();
    for s in summaries {
        w.write_record([
            s.model.name().to_string(),
            s.n.to_string(),
            s.k.to_string(),
            s.param.name().to_string(),
            fmt_float(s.param.value()),
            s.count.to_string(),
            fmt_float(s.mean),
            fmt_float(s.variance),
            fmt_float(s.ci.0),
            fmt_float(s.ci.1),
            fmt_float(s.skew),
            fmt_float(s.kurtosis),
            s.truncated.to_string(),
            s.seed.to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn trials_csv(records: &[ExperimentRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRIAL_HEADER.split(',')).unwrap();
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            opt(r.beta),
            opt(r.t_kk),
            opt(r.t_km1k),
            r.wall_ms.to_string(),
            r.truncated().to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Writes `summary.csv` and one `trials_cell{i}.csv` per cell.
pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.csv"), summary_csv(&result.summaries))?;
    for (i, r) in result.records.iter().enumerate() {
        fs::write(dir.join(format!("trials_cell{i}.csv")), trials_csv(r))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorseVerdict {
    pub checked: usize,
    /// Trial indices violating the sandwich.
    pub violations: Vec<usize>,
}

impl MorseVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn morse_bound_check(records: &[ExperimentRecord]) -> MorseVerdict {
    MorseVerdict {
        checked: records.iter().filter(|r| !r.truncated()).count(),
        violations: records.iter().filter(|r| !r.satisfies_sandwich()).map(|r| r.trial).collect(),
    }
}

/// Recomputes β of every `stride`-th trial through the general homology engine.
/// Returns the audited `(cell, trial)` pairs that disagree.
pub fn audit(cfg: &SweepConfig, result: &SweepResult, stride: usize) -> Result<Vec<(usize, usize)>, ExperimentError> {
    let mut bad = Vec::new();
    for (c, records) in result.records.iter().enumerate() {
        for r in records.iter().step_by(stride.max(1)) {
            let Some(beta) = r.beta else { continue };
            let (_, g) = cfg.sample(c, r.trial)?;
            let d = all_pairs_distances(&g);
            let h = compute_homology(&g, &d, cfg.k, cfg.k as u32, Theory::Emc, false, usize::MAX)?;
            if h.betti != beta {
                bad.push((c, r.trial));
            }
        }
    }
    Ok(bad)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub n: usize,
    /// Smallest grid exponent at which mean β falls below 1.
    pub q: Option<f64>,
    pub theory: f64,
}

pub fn threshold_crossing(cfg: &SweepConfig, summaries: &[CellSummary]) -> Vec<Crossing> {
    cfg.ns
        .iter()
        .map(|&n| {
            let mut cells: Vec<(f64, f64)> =
                summaries.iter().filter(|s| s.n == n).map(|s| (s.param.as_q(n), s.mean)).collect();
            cells.sort_by(|a, b| a.0.total_cmp(&b.0));
            Crossing {
                n,
                q: cells.iter().find(|c| c.1 < 1.0).map(|c| c.0),
                theory: cfg.model.threshold(cfg.k),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioPoint {
    pub n: usize,
    pub mean_beta: f64,
    pub ci: (f64, f64),
    pub normalizer: f64,
    pub ratio: f64,
    pub ratio_ci: (f64, f64),
    /// The limit of the ratio as `n` grows.
    pub limit: f64,
}

/// `E[β]/(n^{k+1} p^{2k-1})` for ER, `E[β]/(n^{k+1} r^{2k})` for RGG, one point per `n`.
pub fn ratio_experiment(cfg: &SweepConfig) -> Result<Vec<RatioPoint>, ExperimentError> {
    if cfg.params.len() != 1 {
        return Err(ExperimentError::Config("ratio experiment takes a single density".into()));
    }
    let result = run_sweep(cfg)?;
    let k = cfg.k as i32;
    result
        .summaries
        .iter()
        .enumerate()
        .map(|(c, s)| {
            if s.count == 0 {
                return Err(ExperimentError::EmptyCell(c));
            }
            let n = s.n as f64;
            let (normalizer, limit) = match (cfg.model, s.param) {
                (Model::Er, p) => {
                    let p = match p {
                        Param::Q(q) => n.powf(-q),
                        other => other.value(),
                    };
                    (n.powi(k + 1) * p.powi(2 * k - 1), 1.0)
                }
                (Model::Rgg { area }, r) => {
                    let r = match r {
                        Param::Q(q) => n.powf(-q),
                        other => other.value(),
                    };
                    (n.powi(k + 1) * r.powi(2 * k), (std::f64::consts::PI / area).powi(k))
                }
            };
            Ok(RatioPoint {
                n: s.n,
                mean_beta: s.mean,
                ci: s.ci,
                normalizer,
                ratio: s.mean / normalizer,
                ratio_ci: (s.ci.0 / normalizer, s.ci.1 / normalizer),
                limit,
            })
        })
        .collect()
}

pub fn ratio_csv(points: &[RatioPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "mean_beta", "ci_lo", "ci_hi", "normalizer", "ratio", "ratio_ci_lo", "ratio_ci_hi", "limit"])
        .unwrap();
    for p in points {
        let mut row = vec![p.n.to_string()];
        row.extend(
            [p.mean_beta, p.ci.0, p.ci.1, p.normalizer, p.ratio, p.ratio_ci.0, p.ratio_ci.1, p.limit]
                .map(fmt_float),
        );
        w.write_record(row).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CltReport {
    pub summary: CellSummary,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Kolmogorov–Smirnov distance of the standardized sample to N(0,1).
    pub ks: f64,
    /// `(lower edge, upper edge, count, expected count under N(0,1))`
    pub histogram: Vec<(f64, f64, usize, f64)>,
}

impl CltReport {
    pub fn report_csv(&self) -> String {
        let s = &self.summary;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model", "n", "k", "param_name", "param_value", "trials", "skewness", "excess_kurtosis", "ks"])
            .unwrap();
        w.write_record([
            s.model.name().to_string(),
            s.n.to_string(),
            s.k.to_string(),
            s.param.name().to_string(),
            fmt_float(s.param.value()),
            s.count.to_string(),
            fmt_float(self.skewness),
            fmt_float(self.excess_kurtosis),
            fmt_float(self.ks),
        ])
        .unwrap();
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn histogram_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["bin_lo", "bin_hi", "count", "expected"]).unwrap();
        for &(lo, hi, c, e) in &self.histogram {
            w.write_record([fmt_float(lo), fmt_float(hi), c.to_string(), fmt_float(e)]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Normality diagnostics for a single cell; `cfg` must hold one `n` and one density.
pub fn clt_experiment(cfg: &SweepConfig) -> Result<CltReport, ExperimentError> {
    if cfg.ns.len() != 1 || cfg.params.len() != 1 {
        return Err(ExperimentError::Config("CLT experiment takes a single cell".into()));
    }
    let result = run_sweep(cfg)?;
    let summary = result.summaries[0].clone();
    if summary.count == 0 {
        return Err(ExperimentError::EmptyCell(0));
    }
    if summary.variance <= 0.0 || summary.variance.is_nan() {
        return Err(ExperimentError::DegenerateVariance);
    }
    let sd = summary.variance.sqrt();
    let mut z: Vec<f64> = result.records[0]
        .iter()
        .filter_map(|r| r.beta)
        .map(|b| (b as f64 - summary.mean) / sd)
        .collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let m = z.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in z.iter().enumerate() {
        let f = normal.cdf(x);
        ks = ks.max((f - i as f64 / m).abs()).max(((i + 1) as f64 / m - f).abs());
    }
    let edges: Vec<f64> = (0..=16).map(|i| -4.0 + 0.5 * i as f64).collect();
    let histogram = edges
        .windows(2)
        .map(|w| {
            let count = z.iter().filter(|&&x| x >= w[0] && x < w[1]).count();
            (w[0], w[1], count, m * (normal.cdf(w[1]) - normal.cdf(w[0])))
        })
        .collect();
    Ok(CltReport {
        skewness: summary.skew,
        excess_kurtosis: summary.kurtosis - 3.0,
        summary,
        ks,
        histogram,
    })
}

pub fn crossing_csv(crossings: &[Crossing]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "crossing_q", "theory_q"]).unwrap();
    for c in crossings {
        w.write_record([c.n.to_string(), c.q.map_or_else(|| "na".into(), fmt_float), fmt_float(c.theory)])
            .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Writes a CSV string, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
