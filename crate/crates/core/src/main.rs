use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use nullmodels::degree_model::{DegreeLaw, DegreeSequence};
use nullmodels::experiments::config::canonical_hash;
use nullmodels::experiments::{run_experiment, RunConfig};
use nullmodels::graphs::{erase, generate_cm, generate_irg, KernelSpec};
use nullmodels::integrals::{a_gamma_closed_form, triple_integral, TripleIntegralSpec};
use nullmodels::io::{parse_edge_list, write_edge_list};
use nullmodels::rng::seeded;
use nullmodels::stable_limits::sample_limits;
use nullmodels::statistics::{clustering_average, clustering_global, degree_power_sums, pearson, triangle_count};
use nullmodels::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "nullmodels", version, about = "Random graph null models with heavy-tailed degrees")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Cm,
    Ecm,
    Irg,
}

impl ModelArg {
    fn name(self) -> &'static str {
        match self {
            ModelArg::Cm => "cm",
            ModelArg::Ecm => "ecm",
            ModelArg::Irg => "irg",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it as an edge list.
    Generate {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tail constant c in P(D > t) = c t^-gamma.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Connection kernel for irg: chung_lu, poisson or max_entropy.
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pearson, clustering and degree power sums of an edge-list file, as JSON.
    Stats {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the experiments of a JSON configuration.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Kernel triple integral over the octant or [eps, 1/eps]^3.
    Integrate {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value = "poisson")]
        kernel: String,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Coupled limit samples (S_{g/2}, S_{g/3}, S_{g/4}, S_{g/6}) as CSV.
    Limits {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 100_000)]
        truncation: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::InvalidInput(_) | Error::KernelCondition(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::runtime(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn write_file(path: &Path, contents: &str) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(model: ModelArg, gamma: f64, n: usize, seed: u64, scale: f64, kernel: Option<String>, out: &Path) -> CliResult {
    let law = DegreeLaw::new(gamma, scale).map_err(|e| Failure::usage(e.to_string()))?;
    if n == 0 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let kernel = match (model, kernel) {
        (ModelArg::Irg, Some(k)) => Some(KernelSpec::from_name(&k).map_err(|e| Failure::usage(e.to_string()))?),
        (ModelArg::Irg, None) => return Err(Failure::usage("--model irg requires --kernel")),
        (_, Some(_)) => return Err(Failure::usage("--kernel only applies to --model irg")),
        (_, None) => None,
    };
    let args = json!({
        "command": "generate",
        "model": model.name(),
        "gamma": gamma,
        "n": n,
        "seed": seed,
        "scale": scale,
        "kernel": kernel.as_ref().map(|k| k.name().to_string()),
    });
    let hash = canonical_hash(&args);
    let mut meta = BTreeMap::new();
    meta.insert("model".to_string(), model.name().to_string());
    meta.insert("gamma".to_string(), gamma.to_string());
    meta.insert("scale".to_string(), scale.to_string());
    meta.insert("seed".to_string(), seed.to_string());
    meta.insert("config_hash".to_string(), hash.clone());
    meta.insert("version".to_string(), VERSION.to_string());
    let mut rng = seeded(seed);
    let graph = match (model, &kernel) {
        (ModelArg::Irg, Some(k)) => {
            meta.insert("kernel".to_string(), k.name().to_string());
            let w = DegreeSequence::sample_weights(&law, n, &mut rng);
            generate_irg(&w, k, law.mean(), &mut rng)?
        }
        _ => {
            let seq = DegreeSequence::sample(&law, n, &mut rng);
            meta.insert("parity_adjusted".to_string(), seq.parity_adjusted().to_string());
            let cm = generate_cm(&seq, &mut rng)?;
            if let ModelArg::Ecm = model {
                let (g, report) = erase(&cm);
                let mut doc = report.to_json();
                doc["config_hash"] = json!(hash);
                write_file(&sidecar(out, ".erasure.json"), &(serde_json::to_string(&doc)? + "\n"))?;
                g
            } else {
                cm
            }
        }
    };
    write_file(out, &write_edge_list(&graph, &meta))
}

/// `{"value": ..}` or `{"value": null, "reason": ..}` for a degenerate statistic.
fn or_null<T: serde::Serialize>(r: nullmodels::Result<T>) -> Result<Value, Failure> {
    match r {
        Ok(v) => Ok(serde_json::to_value(v).expect("serializes")),
        Err(e) if e.is_degenerate() => Ok(json!({"value": null, "reason": e.to_string()})),
        Err(e) => Err(e.into()),
    }
}

fn cmd_stats(input: &Path, out: Option<&Path>) -> CliResult {
    let text = fs::read_to_string(input).map_err(|e| Failure::runtime(format!("{}: {e}", input.display())))?;
    let parsed = parse_edge_list(&text).map_err(|e| Failure::runtime(format!("{}: {e}", input.display())))?;
    let g = &parsed.graph;
    let sums = degree_power_sums(g.degrees(), &[1, 2, 3, 4, 6])?;
    let power_sums: BTreeMap<String, Value> =
        sums.iter().map(|(p, s)| (p.to_string(), serde_json::to_value(s).expect("serializes"))).collect();
    let doc = json!({
        "input_sha256": hex::encode(Sha256::digest(text.as_bytes())),
        "config_hash": parsed.metadata.get("config_hash"),
        "metadata": parsed.metadata,
        "n": g.n(),
        "edges": g.edge_count(),
        "simple": g.is_simple(),
        "triangles": triangle_count(g).to_string(),
        "pearson": or_null(pearson(g))?,
        "clustering": or_null(clustering_global(g))?,
        "average_clustering": if g.is_simple() { or_null(clustering_average(g))? } else {
            json!({"value": null, "reason": "average clustering is defined for simple graphs only"})
        },
        "power_sums": power_sums,
    });
    match out {
        Some(p) => write_file(p, &pretty(&doc)),
        None => {
            print!("{}", pretty(&doc));
            Ok(())
        }
    }
}

fn cmd_experiment(config: &Path, out: &Path, pool_set: bool) -> CliResult {
    let started = Instant::now();
    let text = fs::read_to_string(config).map_err(|e| Failure::usage(format!("{}: {e}", config.display())))?;
    let mut cfg = RunConfig::from_json_str(&text).map_err(|e| Failure::usage(e.to_string()))?;
    if let Ok(s) = std::env::var("NULLMODELS_SEED") {
        cfg.seed = s.trim().parse().map_err(|_| Failure::usage(format!("NULLMODELS_SEED {s:?} is not a u64")))?;
    }
    if let (false, Some(t)) = (pool_set, cfg.threads) {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::runtime(e.to_string()))?;
    }
    let hash = cfg.hash();
    fs::create_dir_all(out)?;
    let mut outputs = BTreeMap::new();
    let mut failed = Vec::new();
    for e in &cfg.experiments {
        eprintln!("running {} ({:?})", e.name, e.kind);
        let res = run_experiment(e, cfg.seed).map_err(|err| Failure::runtime(format!("experiment {:?}: {err}", e.name)))?;
        let mut summary = serde_json::to_value(&res)?;
        summary["config_hash"] = json!(hash);
        let summary_path = out.join(format!("{}.summary.json", e.name));
        write_file(&summary_path, &pretty(&summary))?;
        let mut paths = json!({"summary": summary_path});
        if !res.records.is_empty() {
            let mut jsonl = String::new();
            for r in &res.records {
                let mut r = r.clone();
                r["config_hash"] = json!(hash);
                jsonl.push_str(&serde_json::to_string(&r)?);
                jsonl.push('\n');
            }
            let p = out.join(format!("{}.jsonl", e.name));
            write_file(&p, &jsonl)?;
            paths["records"] = json!(p);
        }
        let csv_path = out.join(format!("{}.csv", e.name));
        write_file(&csv_path, &format!("# config_hash {hash}\n{}", res.csv))?;
        paths["csv"] = json!(csv_path);
        outputs.insert(e.name.clone(), paths);
        for c in res.checks.iter().filter(|c| !c.passed) {
            let tag = res.tag.as_deref().map(|t| format!(" [{t}]")).unwrap_or_default();
            failed.push(format!("{}{tag}: check {} failed (observed {}; {})", res.name, c.check, c.observed, c.detail));
        }
    }
    let manifest = json!({
        "config_hash": hash,
        "master_seed": cfg.seed,
        "version": VERSION,
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
        "config": serde_json::to_value(&cfg)?,
        "outputs": outputs,
    });
    write_file(&out.join("manifest.json"), &pretty(&manifest))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::runtime(failed.join("\n")))
    }
}

fn cmd_integrate(gamma: f64, kernel: &str, epsilon: Option<f64>, tolerance: f64) -> CliResult {
    let kernel = KernelSpec::from_name(kernel)?;
    let mut spec = TripleIntegralSpec::new(gamma, kernel.clone()).with_tolerance(tolerance);
    if let Some(e) = epsilon {
        spec = spec.with_epsilon(e);
    }
    let doc = match triple_integral(&spec) {
        Ok(est) => json!({
            "gamma": gamma,
            "kernel": kernel.name(),
            "epsilon": epsilon,
            "value": est.value,
            "error": est.error,
            "closed_form": (matches!(kernel, KernelSpec::Poisson) && epsilon.is_none()).then(|| a_gamma_closed_form(gamma)),
        }),
        Err(e @ Error::Quadrature { .. }) => return Err(Failure::runtime(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    print!("{}", pretty(&doc));
    Ok(())
}

fn cmd_limits(gamma: f64, samples: usize, truncation: usize, seed: u64, out: &Path) -> CliResult {
    let draws = sample_limits(gamma, truncation, samples, seed)?;
    let mut csv = String::from("s_2,s_3,s_4,s_6\n");
    for d in &draws {
        csv.push_str(&format!("{},{},{},{}\n", d.s(2), d.s(3), d.s(4), d.s(6)));
    }
    write_file(out, &csv)
}

fn run(cli: Cli) -> CliResult {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::runtime(e.to_string()))?;
    }
    match cli.command {
        Command::Generate { model, gamma, n, seed, scale, kernel, out } => cmd_generate(model, gamma, n, seed, scale, kernel, &out),
        Command::Stats { input, out } => cmd_stats(&input, out.as_deref()),
        Command::Experiment { config, out } => cmd_experiment(&config, &out, cli.threads.is_some()),
        Command::Integrate { gamma, kernel, epsilon, tolerance } => cmd_integrate(gamma, &kernel, epsilon, tolerance),
        Command::Limits { gamma, samples, truncation, seed, out } => cmd_limits(gamma, samples, truncation, seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == 2 {
                eprintln!("run with --help for usage");
            }
            ExitCode::from(f.code)
        }
    }
}
