//! `parlab`: condenser capacities, parabolicity classification and theorem
//! reproduction reports.
//!
//! Exit codes: 0 success, 1 a reproduced assertion failed, 2 solver error,
//! 3 configuration error. Outputs are staged and moved into `--out` only on
//! exit 0.

mod config;
mod output;
mod reproduce;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, Exhaustion, RunConfig};
use output::Staged;
use parlab::classify::{
    area_criterion, capacity_decay_test, d_parabolicity_test, volume_criterion, walk_classification, ClassifyError, GrowthSource,
};
use parlab::geometry::InnerCondition;
use parlab::potential::{condenser_capacity, Condenser, PotentialError};
use parlab::table::format_f64;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Solver(String),
    Assertion(Vec<String>),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl RunError {
    fn code(&self) -> u8 {
        match self {
            RunError::Assertion(_) => 1,
            RunError::Solver(_) => 2,
            RunError::Config(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "parlab", version, about = "Potential theory on triangulated surfaces with boundary")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Condenser capacity of a plate against an outer boundary marker.
    Capacity(Flags),
    /// Parabolicity verdicts for a model manifold.
    Classify(Flags),
    /// Reproduce a theorem's checkable conclusion on its stock geometry.
    Reproduce(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Mesh file in JSON form.
    #[arg(long, conflicts_with = "gen")]
    mesh: Option<PathBuf>,
    /// Mesh generator, e.g. `annulus:a=1,b=2,h=0.03`.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Exhaustion radii `base * ratio^j`, `j = 1..=count`.
    #[arg(long, value_name = "BASE,RATIO,COUNT")]
    exhaustion: Option<String>,
    /// volume, area, capacity, walk, dtest or all; comma-separated.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    theorem: Option<String>,
    /// Plate marker, or `radius:R`.
    #[arg(long)]
    plate: Option<String>,
    #[arg(long)]
    outer: Option<String>,
    /// euclidean, hyperbolic, cusp, power, sampled.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_delimiter = ',')]
    model_params: Option<Vec<f64>>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    sector: Option<f64>,
    #[arg(long)]
    n_theta: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
}

impl Flags {
    fn resolve(self, command: &str) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::load(self.config.as_deref())?;
        c.command = command.into();
        if let Some(v) = self.out {
            c.out = v;
        }
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if self.mesh.is_some() {
            c.mesh = self.mesh;
            c.gen = None;
        }
        if self.gen.is_some() {
            c.gen = self.gen;
            c.mesh = None;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.exhaustion {
            c.exhaustion = Some(v.parse::<Exhaustion>()?);
        }
        if let Some(v) = self.method {
            c.method = v;
        }
        if self.theorem.is_some() {
            c.theorem = self.theorem;
        }
        if let Some(v) = self.plate {
            c.plate = v;
        }
        if let Some(v) = self.outer {
            c.outer = v;
        }
        if let Some(v) = self.model {
            c.model = v;
        }
        if let Some(v) = self.model_params {
            c.model_params = v;
        }
        if let Some(v) = self.dim {
            c.dim = v;
        }
        if let Some(v) = self.sector {
            c.sector = v;
        }
        if let Some(v) = self.n_theta {
            c.n_theta = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn staged(cfg: &RunConfig) -> Result<Staged, RunError> {
    let s = Staged::new(&cfg.out).map_err(|e| ConfigError(format!("cannot stage output next to {}: {e}", cfg.out.display())))?;
    let echo = serde_json::to_value(cfg).map_err(|e| RunError::Solver(e.to_string()))?;
    write(&s, |s| s.write_json("config.json", &echo))?;
    Ok(s)
}

fn write(s: &Staged, f: impl FnOnce(&Staged) -> std::io::Result<()>) -> Result<(), RunError> {
    f(s).map_err(|e| RunError::Config(ConfigError(format!("cannot write output: {e}"))))
}

fn commit(s: Staged) -> Result<PathBuf, RunError> {
    s.commit().map_err(|e| RunError::Config(ConfigError(format!("cannot move output into place: {e}"))))
}

fn potential_err(e: PotentialError) -> RunError {
    RunError::Solver(e.to_string())
}

fn classify_err(e: ClassifyError) -> RunError {
    match e {
        ClassifyError::InvalidArgument(_) | ClassifyError::InsufficientData(_) | ClassifyError::NoTrueBoundary => {
            RunError::Config(ConfigError(e.to_string()))
        }
        other => RunError::Solver(other.to_string()),
    }
}

fn cmd_capacity(cfg: &RunConfig) -> Result<String, RunError> {
    let mesh = cfg.build_mesh()?;
    let k = cfg.plate_vertices(&mesh)?;
    if !mesh.has_marker(&cfg.outer) {
        return Err(ConfigError(format!("mesh has no boundary marker '{}'", cfg.outer)).into());
    }
    let condenser = Condenser::new(&mesh, k, &cfg.outer).map_err(potential_err)?;
    let r = condenser_capacity(&mesh, &condenser).map_err(potential_err)?;
    if r.energy_residual > cfg.tol * r.value.abs().max(1.0) {
        return Err(RunError::Solver(format!("energy evaluations disagree by {:e} (tol {:e})", r.energy_residual, cfg.tol)));
    }
    let s = staged(cfg)?;
    let result = json!({
        "value": r.value,
        "energy_residual": r.energy_residual,
        "plate_vertices": condenser.k.len(),
        "outer_vertices": condenser.outer.len(),
        "n_vertices": mesh.n_vertices(),
        "n_triangles": mesh.n_triangles(),
        "mean_edge_length": mesh.mean_edge_length(),
    });
    let mut csv = String::from("vertex,value\n");
    for (i, v) in r.potential.values.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", format_f64(*v)));
    }
    write(&s, |s| {
        s.write_json("capacity.json", &result)?;
        s.write("potential.csv", &csv)
    })?;
    let dir = commit(s)?;
    Ok(format!("capacity {} -> {}", r.value, dir.display()))
}

const INTEGRAL_R_MAX: f64 = 4096.0;

fn cmd_classify(cfg: &RunConfig) -> Result<String, RunError> {
    let mut methods: Vec<String> = cfg.method.split(',').map(|m| m.trim().to_ascii_lowercase()).collect();
    if methods.iter().any(|m| m == "all") {
        methods = vec!["volume".into(), "area".into(), "capacity".into()];
        if cfg.sector < 1.0 {
            methods.push("dtest".into());
        }
    }
    let model = cfg.model()?;
    let r_max = cfg.exhaustion.map_or(INTEGRAL_R_MAX, |e| e.base * e.ratio.powi(e.count as i32));
    let mut results = Vec::new();
    for m in &methods {
        let c = match m.as_str() {
            "volume" => volume_criterion(GrowthSource::Model(&model), r_max).map_err(classify_err)?,
            "area" => area_criterion(GrowthSource::Model(&model), r_max).map_err(classify_err)?,
            "capacity" => {
                let fam = cfg.family(InnerCondition::Plate)?;
                capacity_decay_test(&fam, fam.radii.len()).map_err(classify_err)?
            }
            "walk" => {
                let seed = cfg.require_seed("method walk")?;
                let fam = cfg.family(InnerCondition::Plate)?;
                walk_classification(&fam, fam.radii.len(), cfg.trials, seed).map_err(classify_err)?
            }
            "dtest" => {
                if cfg.sector >= 1.0 {
                    return Err(ConfigError("dtest needs a sector < 1 so the model has a true boundary".into()).into());
                }
                let fam = cfg.family(InnerCondition::Wall)?;
                d_parabolicity_test(&fam, fam.radii.len()).map_err(classify_err)?
            }
            other => return Err(ConfigError(format!("unknown method '{other}'")).into()),
        };
        results.push((m.clone(), c));
    }
    let s = staged(cfg)?;
    let doc = json!({
        "model": cfg.model,
        "dim": cfg.dim,
        "sector": cfg.sector,
        "classifications": results.iter().map(|(_, c)| c.to_json()).collect::<Vec<_>>(),
    });
    write(&s, |s| {
        s.write_json("classification.json", &doc)?;
        for (m, c) in &results {
            s.write(&format!("evidence_{m}.csv"), &c.evidence.to_csv())?;
        }
        Ok(())
    })?;
    let dir = commit(s)?;
    let verdicts: Vec<String> = results.iter().map(|(m, c)| format!("{m}={:?}", c.verdict)).collect();
    Ok(format!("{} -> {}", verdicts.join(" "), dir.display()))
}

fn cmd_reproduce(cfg: &RunConfig) -> Result<String, RunError> {
    let theorem = cfg.theorem.clone().ok_or_else(|| ConfigError(format!("reproduce needs --theorem ({})", reproduce::THEOREMS.join(", "))))?;
    if !reproduce::THEOREMS.contains(&theorem.as_str()) {
        return Err(ConfigError(format!("unknown theorem '{theorem}'; expected one of {}", reproduce::THEOREMS.join(", "))).into());
    }
    let report = reproduce::run(&theorem, cfg)?;
    if !report.passed() {
        let failed = report.assertions.iter().filter(|a| !a.holds).map(|a| format!("{}: {}", a.name, a.detail)).collect();
        return Err(RunError::Assertion(failed));
    }
    let s = staged(cfg)?;
    write(&s, |s| {
        s.write_json("report.json", &report.to_json())?;
        for (name, t) in &report.tables {
            s.write(&format!("{theorem}_{name}.csv"), &t.to_csv())?;
        }
        Ok(())
    })?;
    let dir = commit(s)?;
    Ok(format!("{theorem}: {} -> {}", report.summary, dir.display()))
}

fn configure_threads() -> Result<(), ConfigError> {
    if let Ok(v) = std::env::var("PARLAB_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| ConfigError(format!("PARLAB_THREADS='{v}' is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads().map_err(RunError::from).and_then(|()| match cli.command {
        Command::Capacity(f) => f.resolve("capacity").map_err(RunError::from).and_then(|c| cmd_capacity(&c)),
        Command::Classify(f) => f.resolve("classify").map_err(RunError::from).and_then(|c| cmd_classify(&c)),
        Command::Reproduce(f) => f.resolve("reproduce").map_err(RunError::from).and_then(|c| cmd_reproduce(&c)),
    });
    match result {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                RunError::Config(c) => eprintln!("configuration error: {c}"),
                RunError::Solver(s) => eprintln!("solver error: {s}"),
                RunError::Assertion(rows) => {
                    eprintln!("assertion failed:");
                    for r in rows {
                        eprintln!("  {r}");
                    }
                }
            }
            ExitCode::from(e.code())
        }
    }
}
