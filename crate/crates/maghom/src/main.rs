use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use maghom::chain::boundary_between;
use maghom::experiment::{self, ExperimentError, Model, Param, SweepConfig};
use maghom::graph::{all_pairs_distances, Graph};
use maghom::homology::{compute_homology, les_consistency_check, verify_vanishing_consequences, HomologyError, Torsion};
use maghom::structure::analyze;
use maghom::trail::{enumerate_trails_capped, Theory, TrailError};

#[derive(Parser)]
#[command(name = "maghom", version, about = "Magnitude homology of graphs")]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Betti numbers and torsion in one bidegree.
    Compute(ComputeArgs),
    /// List the generators of one chain group.
    Enumerate(EnumerateArgs),
    /// Classify the local collections of diagonal trails.
    Analyze(AnalyzeArgs),
    /// Monte Carlo sweeps on random graphs.
    Experiment {
        #[command(subcommand)]
        model: ExperimentModel,
    },
    /// Run the internal consistency checks on one graph.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryArg {
    Mc,
    Emc,
    Dmc,
    All,
}

impl TheoryArg {
    fn theories(self) -> Vec<Theory> {
        match self {
            TheoryArg::Mc => vec![Theory::Mc],
            TheoryArg::Emc => vec![Theory::Emc],
            TheoryArg::Dmc => vec![Theory::Dmc],
            TheoryArg::All => Theory::ALL.to_vec(),
        }
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    l: u32,
    #[arg(long, value_enum, default_value = "all")]
    theory: TheoryArg,
    /// Also compute torsion of the incoming differential.
    #[arg(long)]
    torsion: bool,
    /// Cap on generators per chain group.
    #[arg(long, default_value_t = 5_000_000)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    l: u32,
    #[arg(long, value_enum, default_value = "mc")]
    theory: TheoryArg,
    #[arg(long, default_value_t = 5_000_000)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 5_000_000)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Largest length for the differential and exactness checks.
    #[arg(long, default_value_t = 4)]
    l: u32,
    /// Degree for the vanishing-consequence check.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 5_000_000)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExperimentModel {
    /// Erdős–Rényi G(n, p).
    Er(ExperimentArgs),
    /// Geometric graphs on a flat torus.
    Rgg(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sweep,
    Ratio,
    Clt,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long)]
    k: usize,
    /// Exponent grid: p = n^{-q} (ER) or r = n^{-q} (RGG).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, group = "density")]
    q: Vec<f64>,
    #[arg(long, value_delimiter = ',', group = "density")]
    p: Vec<f64>,
    #[arg(long, value_delimiter = ',', group = "density")]
    r: Vec<f64>,
    /// Torus area (RGG only).
    #[arg(long, default_value_t = std::f64::consts::PI)]
    area: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-trial cap on enumerated trails.
    #[arg(long, default_value_t = 1_000_000)]
    budget: usize,
    #[arg(long, value_enum, default_value = "sweep")]
    kind: Kind,
    /// Recompute every N-th trial with the general homology engine; 0 disables.
    #[arg(long, default_value_t = 100)]
    audit: usize,
    /// Record per-trial wall time (breaks byte-identical output).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Validation(String),
    Budget(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Budget(m) | Failure::Check(m) => m,
        }
    }
}

impl From<HomologyError> for Failure {
    fn from(e: HomologyError) -> Self {
        match e {
            HomologyError::Budget(_) => Failure::Budget(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<TrailError> for Failure {
    fn from(e: TrailError) -> Self {
        match e {
            TrailError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Homology(h) => h.into(),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    Graph::from_text(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

/// Prints to stdout, or writes `name` inside `out` when given.
fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<(), Failure> {
    match out {
        Some(dir) => experiment::write_text(&dir.join(name), text).map_err(Failure::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn torsion_field(t: &Torsion) -> String {
    match t {
        Torsion::NotRequested => "na".into(),
        Torsion::Unknown => "unknown".into(),
        Torsion::Factors(f) if f.is_empty() => "none".into(),
        Torsion::Factors(f) => f.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
    }
}

fn compute(a: &ComputeArgs) -> Result<(), Failure> {
    let g = read_graph(&a.graph)?;
    let d = all_pairs_distances(&g);
    let mut text = String::from("theory,k,l,dim,rank_out,rank_in,betti,torsion\n");
    for theory in a.theory.theories() {
        let h = compute_homology(&g, &d, a.k, a.l, theory, a.torsion, a.budget)?;
        text += &format!(
            "{},{},{},{},{},{},{},{}\n",
            theory,
            h.k,
            h.l,
            h.dim_source,
            h.rank_out,
            h.rank_in,
            h.betti,
            torsion_field(&h.torsion)
        );
    }
    emit(a.out.as_deref(), "homology.csv", &text)
}

fn enumerate(a: &EnumerateArgs) -> Result<(), Failure> {
    let g = read_graph(&a.graph)?;
    let d = all_pairs_distances(&g);
    let mut text = String::new();
    for theory in a.theory.theories() {
        for t in enumerate_trails_capped(&g, &d, a.k, a.l, theory, a.budget)?.generators() {
            text += &format!("{t}\n");
        }
    }
    emit(a.out.as_deref(), "trails.txt", &text)
}

fn analyze_cmd(a: &AnalyzeArgs) -> Result<(), Failure> {
    let g = read_graph(&a.graph)?;
    let d = all_pairs_distances(&g);
    enumerate_trails_capped(&g, &d, a.k, a.k as u32, Theory::Emc, a.budget)?;
    let mut text = String::from("start,end,k,size,structure_type,kernel_dim\n");
    for r in analyze(&g, &d, a.k) {
        text += &format!("{},{},{},{},{},{}\n", r.start, r.end, r.k, r.size, r.structure.name(), r.kernel_dim);
    }
    emit(a.out.as_deref(), "collections.csv", &text)
}

fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let g = read_graph(&a.graph)?;
    let d = all_pairs_distances(&g);
    let mut rows = Vec::new();
    for theory in Theory::ALL {
        let mut ok = true;
        for l in 1..=a.l {
            for k in 1..l as usize {
                let top = enumerate_trails_capped(&g, &d, k + 1, l, theory, a.budget)?;
                let mid = enumerate_trails_capped(&g, &d, k, l, theory, a.budget)?;
                let low = enumerate_trails_capped(&g, &d, k - 1, l, theory, a.budget)?;
                ok &= boundary_between(&d, &mid, &low).multiply(&boundary_between(&d, &top, &mid)).is_zero();
            }
        }
        rows.push((format!("dd_zero_{theory}"), Some(ok)));
    }
    for l in 1..=a.l {
        rows.push((format!("les_exact_l{l}"), Some(les_consistency_check(&g, &d, l)?.passed())));
    }
    if let Some(k) = a.k {
        let v = verify_vanishing_consequences(&g, &d, k)?;
        rows.push((format!("vanishing_k{k}"), v.applicable().then(|| v.passed())));
    }
    let mut text = String::from("check,result\n");
    for (name, res) in &rows {
        let status = match res {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "not_applicable",
        };
        text += &format!("{name},{status}\n");
    }
    emit(a.out.as_deref(), "verify.csv", &text)?;
    if rows.iter().any(|r| r.1 == Some(false)) {
        return Err(Failure::Check("verification failed".into()));
    }
    Ok(())
}

fn run_experiment(model: &ExperimentModel, workers: usize) -> Result<(), Failure> {
    let (model, a) = match model {
        ExperimentModel::Er(a) => (Model::Er, a),
        ExperimentModel::Rgg(a) => (Model::Rgg { area: a.area }, a),
    };
    let params: Vec<Param> = if !a.q.is_empty() {
        a.q.iter().map(|&v| Param::Q(v)).collect()
    } else if !a.p.is_empty() {
        a.p.iter().map(|&v| Param::P(v)).collect()
    } else if !a.r.is_empty() {
        a.r.iter().map(|&v| Param::R(v)).collect()
    } else {
        return Err(Failure::Validation("one of --q, --p or --r is required".into()));
    };
    let cfg = SweepConfig {
        model,
        k: a.k,
        ns: a.n.clone(),
        params,
        trials: a.trials,
        seed: a.seed,
        budget: a.budget,
        workers,
        timing: a.timing,
    };
    let out = a.out.as_deref();
    match a.kind {
        Kind::Sweep => {
            let result = experiment::run_sweep(&cfg)?;
            if a.audit > 0 {
                let bad = experiment::audit(&cfg, &result, a.audit)?;
                if !bad.is_empty() {
                    return Err(Failure::Check(format!("audit mismatch at (cell, trial) {bad:?}")));
                }
            }
            let truncated: usize = result.summaries.iter().map(|s| s.truncated).sum();
            if truncated > 0 {
                eprintln!("warning: {truncated} trials exceeded the budget and are excluded");
            }
            let summary = experiment::summary_csv(&result.summaries);
            print!("{summary}");
            if let Some(dir) = out {
                experiment::write_sweep(dir, &result)?;
                let crossings = experiment::threshold_crossing(&cfg, &result.summaries);
                experiment::write_text(&dir.join("threshold.csv"), &experiment::crossing_csv(&crossings))?;
            }
        }
        Kind::Ratio => {
            let text = experiment::ratio_csv(&experiment::ratio_experiment(&cfg)?);
            print!("{text}");
            if let Some(dir) = out {
                experiment::write_text(&dir.join("ratio.csv"), &text)?;
            }
        }
        Kind::Clt => {
            let report = experiment::clt_experiment(&cfg)?;
            print!("{}", report.report_csv());
            if let Some(dir) = out {
                experiment::write_text(&dir.join("clt.csv"), &report.report_csv())?;
                experiment::write_text(&dir.join("histogram.csv"), &report.histogram_csv())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers == 0 {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(2);
    }
    rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global().expect("global thread pool");
    let result = match &cli.command {
        Command::Compute(a) => compute(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Experiment { model } => run_experiment(model, cli.workers),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
