//! Acceptance criteria 1-13, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed in order:
//!
//! ```text
//! cargo test --release --test acceptance            # all criteria
//! cargo test --release --test acceptance -- 4 7     # a subset
//! ```
//!
//! Thresholds are pinned below. A criterion that fails is reported as FAIL and
//! makes the target exit non-zero; nothing is retried with another seed.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rayon::ThreadPoolBuilder;
use serde_json::{json, Value};

use nullmodels::degree_model::{DegreeLaw, DegreeSequence};
use nullmodels::experiments::{run_experiment, CheckOutcome, ExperimentConfig, ExperimentOutput};
use nullmodels::graphs::{generate_cm, MultiGraph};
use nullmodels::rng::{seeded, stream_rng};
use nullmodels::statistics::{pearson, triangle_count};

const SEED: u64 = 20_240_601;

// criterion 1
const PAIRING_DRAWS: usize = 100_000;
const PAIRING_MAX_L: u64 = 10;
const PAIRING_SIGMAS: f64 = 3.0;
// criterion 2
const TRIANGLE_GRAPHS: usize = 100;
const TRIANGLE_MAX_N: usize = 25;
// criterion 3
const PEARSON_GRAPHS: usize = 50;
const PEARSON_DIGITS: f64 = 1e-12;
// criteria 4, 5, 7
const SCALING_SIZES: [usize; 4] = [1_000, 10_000, 100_000, 1_000_000];
const SCALING_REPLICAS: usize = 50;
const ERASED_SLOPE: (f64, f64) = (0.35, 0.65);
const PEARSON_SLOPE: (f64, f64) = (-1.0 / 3.0 - 0.1, -1.0 / 3.0 + 0.1);
const PEARSON_SIGN_N: usize = 100_000;
const PEARSON_SIGN_REPLICAS: usize = 200;
const PEARSON_SIGN_MIN: f64 = 0.95;
const CM_CLUSTERING_SLOPE: (f64, f64) = (-1.0 / 3.0 - 0.15, -1.0 / 3.0 + 0.15);
const ECM_CLUSTERING_SLOPE: (f64, f64) = (-0.5833 - 0.15, -0.5833 + 0.15);
const SWEEP_GAMMAS: [f64; 5] = [1.1, 1.15, 1.2, 1.5, 1.8];
const SWEEP_SIZES: [usize; 3] = [1_000, 10_000, 100_000];
const SWEEP_REPLICAS: usize = 50;
/// The grid neighbours of sqrt(4/3) = 1.1547.
const SWEEP_ARGMAX: (f64, f64) = (1.1, 1.2);
const SWEEP_MAX_SLOPE: (f64, f64) = (-0.46 - 0.1, -0.46 + 0.1);
// criterion 6
const IRG_N: usize = 100_000;
const IRG_REPLICAS: usize = 200;
const IRG_KS: f64 = 0.1;
// criterion 8
const DEGREE_SUM_N: usize = 100_000;
const DEGREE_SUM_REPLICAS: usize = 500;
const DEGREE_SUM_LIMIT_SAMPLES: usize = 100_000;
const LIMIT_TRUNCATION: usize = 2_000;
const DEGREE_SUM_KS: f64 = 0.08;
// criterion 9
const VARIANCE_N: usize = 10_000;
const VARIANCE_PAIRINGS: usize = 10_000;
const VARIANCE_RATIO: (f64, f64) = (0.7, 1.3);
// criterion 10
const INTEGRAL_GAMMAS: [f64; 3] = [1.2, 1.5, 1.8];
const INTEGRAL_MAX_ABS: f64 = 1e-4;
const INTEGRAL_SIGMAS: f64 = 3.0;
// criterion 11
const EDGE_N: usize = 10_000;
const EDGE_PAIRS: usize = 100;
const EDGE_PAIRINGS: usize = 10_000;
const EDGE_P95: f64 = 0.05;
// criterion 12
const JOINT_N: usize = 100_000;
const JOINT_REPLICAS: usize = 300;
const JOINT_LIMIT_SAMPLES: usize = 10_000;
const JOINT_MAX_DIFF: f64 = 0.2;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn experiment(v: Value) -> ExperimentOutput {
    let cfg: ExperimentConfig = serde_json::from_value(v).expect("config parses");
    run_experiment(&cfg, SEED).unwrap_or_else(|e| panic!("experiment {}: {e}", cfg.name))
}

fn describe(checks: &[CheckOutcome]) -> String {
    checks
        .iter()
        .map(|c| format!("{}={} {}", c.check, c.observed, if c.passed { "ok" } else { "FAILED" }))
        .collect::<Vec<_>>()
        .join(", ")
}

fn all_passed(outs: &[&ExperimentOutput]) -> bool {
    outs.iter().all(|o| o.passed() && !o.checks.is_empty())
}

/// Partitions of `total` into positive parts, largest first.
fn partitions(total: u64, max: u64) -> Vec<Vec<u64>> {
    if total == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(total)).rev() {
        for mut rest in partitions(total - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All perfect matchings of `items`.
fn matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for k in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().enumerate().filter(|&(i, _)| i + 1 != k).map(|(_, &x)| x).collect();
        for mut m in matchings(&rest) {
            m.push((items[0], items[k]));
            out.push(m);
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let mut compared = 0usize;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut index = 0u64;
    for l in (2..=PAIRING_MAX_L).step_by(2) {
        for degrees in partitions(l, l) {
            index += 1;
            let owner: Vec<usize> = degrees.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v, d as usize)).collect();
            // vertices with equal degree are exchangeable: one representative
            // pair per pair of degree classes
            let mut targets = Vec::new();
            for i in 0..degrees.len() {
                if i > 0 && degrees[i] == degrees[i - 1] {
                    continue;
                }
                targets.push((i, i));
                for j in i + 1..degrees.len() {
                    if j == i + 1 || degrees[j] != degrees[j - 1] {
                        targets.push((i, j));
                    }
                }
            }
            let all = matchings(&(0..owner.len()).collect::<Vec<_>>());
            let exact: Vec<f64> = targets
                .iter()
                .map(|&(i, j)| {
                    let hits = all
                        .iter()
                        .filter(|m| m.iter().any(|&(a, b)| (owner[a].min(owner[b]), owner[a].max(owner[b])) == (i, j)))
                        .count();
                    hits as f64 / all.len() as f64
                })
                .collect();
            let seq = DegreeSequence::from_values(degrees.clone()).expect("valid sequence");
            let mut rng = stream_rng(SEED, 1, index);
            let mut counts = vec![0u64; targets.len()];
            for _ in 0..PAIRING_DRAWS {
                let g = generate_cm(&seq, &mut rng).expect("even total");
                for (c, &(i, j)) in counts.iter_mut().zip(&targets) {
                    if g.multiplicity(i as u32, j as u32) > 0 {
                        *c += 1;
                    }
                }
            }
            for ((&(i, j), &p), &c) in targets.iter().zip(&exact).zip(&counts) {
                compared += 1;
                let est = c as f64 / PAIRING_DRAWS as f64;
                let sd = (p * (1.0 - p) / PAIRING_DRAWS as f64).sqrt();
                let ok = if sd == 0.0 { est == p } else { (est - p).abs() <= PAIRING_SIGMAS * sd };
                if sd > 0.0 {
                    worst = worst.max((est - p).abs() / sd);
                }
                if !ok {
                    failures.push(format!("{degrees:?} ({i},{j}): {est} vs {p}"));
                }
            }
        }
    }
    // two-sided 3 sigma tail of the normal law
    let expected = compared as f64 * 0.0027;
    let detail = format!(
        "{compared} probabilities over {index} sequences, largest |z| = {worst:.2}, {} beyond {PAIRING_SIGMAS} sigma ({expected:.2} expected by chance); {}",
        failures.len(),
        failures.join("; ")
    );
    outcome(failures.is_empty(), detail)
}

fn brute_triangles(g: &MultiGraph) -> u128 {
    let n = g.n() as u32;
    let mut t = 0u128;
    for i in 0..n {
        for j in i + 1..n {
            let a = g.multiplicity(i, j) as u128;
            if a == 0 {
                continue;
            }
            for k in j + 1..n {
                t += a * g.multiplicity(i, k) as u128 * g.multiplicity(j, k) as u128;
            }
        }
    }
    t
}

fn criterion_2() -> Outcome {
    use rand::Rng;
    let mut rng = seeded(SEED ^ 2);
    let mut mismatches = Vec::new();
    let mut total = 0u128;
    for k in 0..TRIANGLE_GRAPHS {
        let n = rng.random_range(3..=TRIANGLE_MAX_N);
        let g = if k % 2 == 0 {
            let edges = rng.random_range(0..=3 * n);
            let list: Vec<(u32, u32, u32)> = (0..edges)
                .map(|_| (rng.random_range(0..n as u32), rng.random_range(0..n as u32), rng.random_range(1..=3)))
                .collect();
            let mut g = MultiGraph::new(n);
            for (i, j, m) in list {
                g.add_edges(i, j, m);
            }
            g
        } else {
            let law = DegreeLaw::pareto(1.3).unwrap();
            generate_cm(&DegreeSequence::sample(&law, n, &mut rng), &mut rng).unwrap()
        };
        let (fast, slow) = (triangle_count(&g), brute_triangles(&g));
        total += slow;
        if fast != slow {
            mismatches.push(format!("graph {k}: {fast} vs {slow}"));
        }
    }
    outcome(mismatches.is_empty(), format!("{TRIANGLE_GRAPHS} multigraphs, {total} triangles in total; {}", mismatches.join("; ")))
}

/// Sample correlation of `(D_i, D_j)` over ordered stub pairs, by a double loop.
fn naive_pearson(g: &MultiGraph) -> Option<f64> {
    let n = g.n() as u32;
    let d = g.degrees();
    let (mut w, mut sx, mut sxx, mut sxy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let m = g.multiplicity(i.min(j), i.max(j)) as f64 * if i == j { 2.0 } else { 1.0 };
            if m == 0.0 {
                continue;
            }
            let (a, b) = (d[i as usize] as f64, d[j as usize] as f64);
            w += m;
            sx += m * a;
            sxx += m * a * a;
            sxy += m * a * b;
        }
    }
    let mean = sx / w;
    let var = sxx / w - mean * mean;
    (var.abs() > 1e-12 * mean * mean).then(|| (sxy / w - mean * mean) / var)
}

fn criterion_3() -> Outcome {
    let mut problems = Vec::new();
    let law = DegreeLaw::pareto(1.5).unwrap();
    let mut rng = seeded(SEED ^ 3);
    let mut worst: f64 = 0.0;
    for k in 0..PEARSON_GRAPHS {
        let g = generate_cm(&DegreeSequence::sample(&law, 10 + k, &mut rng), &mut rng).unwrap();
        match (pearson(&g), naive_pearson(&g)) {
            (Ok(p), Some(r)) => {
                let diff = (p.r - r).abs();
                worst = worst.max(diff);
                if diff > PEARSON_DIGITS * r.abs().max(1.0) {
                    problems.push(format!("graph {k}: {} vs {r}", p.r));
                }
            }
            (Err(e), None) if e.is_degenerate() => {}
            (a, b) => problems.push(format!("graph {k}: {:?} vs {b:?}", a.map(|p| p.r))),
        }
    }
    let path = MultiGraph::from_edges(3, [(0, 1, 1), (1, 2, 1)]).unwrap();
    match pearson(&path) {
        Ok(p) if p.r == -1.0 => {}
        other => problems.push(format!("path of 3: {:?}", other.map(|p| p.r))),
    }
    let cycle = MultiGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, 1))).unwrap();
    let k4 = MultiGraph::from_edges(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1)]).unwrap();
    let cubic = generate_cm(&DegreeSequence::from_values(vec![3; 20]).unwrap(), &mut rng).unwrap();
    for (name, g) in [("C5", &cycle), ("K4", &k4), ("3-regular CM", &cubic)] {
        if !pearson(g).is_err_and(|e| e.is_degenerate()) {
            problems.push(format!("{name} is not degenerate"));
        }
    }
    outcome(problems.is_empty(), format!("largest difference {worst:.2e}; {}", problems.join("; ")))
}

fn criterion_4() -> Outcome {
    let o = experiment(json!({
        "name": "erased_edges", "kind": "scaling", "model": "ecm", "statistic": "erased_edges",
        "gamma": 1.5, "sizes": SCALING_SIZES, "replicas": SCALING_REPLICAS,
        "assert": [{"check": "slope", "min": ERASED_SLOPE.0, "max": ERASED_SLOPE.1}]
    }));
    let conjectural = o.summary["conjectural"].as_bool() == Some(true);
    outcome(all_passed(&[&o]) && conjectural, format!("{} (conjectural: {conjectural})", describe(&o.checks)))
}

fn criterion_5() -> Outcome {
    let slope = experiment(json!({
        "name": "pearson_abs", "kind": "scaling", "model": "ecm", "statistic": "pearson_abs",
        "gamma": 1.5, "sizes": SCALING_SIZES, "replicas": SCALING_REPLICAS,
        "assert": [{"check": "slope", "min": PEARSON_SLOPE.0, "max": PEARSON_SLOPE.1}]
    }));
    let sign = experiment(json!({
        "name": "pearson_sign", "kind": "scaling", "model": "ecm", "statistic": "pearson",
        "gamma": 1.5, "sizes": [PEARSON_SIGN_N], "replicas": PEARSON_SIGN_REPLICAS,
        "assert": [{"check": "sign_fraction", "n": PEARSON_SIGN_N, "min": PEARSON_SIGN_MIN}]
    }));
    outcome(all_passed(&[&slope, &sign]), format!("{}; {}", describe(&slope.checks), describe(&sign.checks)))
}

fn criterion_6() -> Outcome {
    let o = experiment(json!({
        "name": "irg_vs_ecm", "kind": "distribution", "model": "irg", "kernel": "poisson",
        "compare_model": "ecm", "statistic": "pearson", "normalization": "paper",
        "gamma": 1.5, "sizes": [IRG_N], "replicas": IRG_REPLICAS,
        "assert": [{"check": "ks", "max": IRG_KS}]
    }));
    outcome(all_passed(&[&o]), describe(&o.checks))
}

fn criterion_7() -> Outcome {
    let cm = experiment(json!({
        "name": "clustering_cm", "kind": "scaling", "model": "cm", "statistic": "clustering_global",
        "gamma": 1.5, "sizes": SCALING_SIZES, "replicas": SCALING_REPLICAS,
        "assert": [{"check": "slope", "min": CM_CLUSTERING_SLOPE.0, "max": CM_CLUSTERING_SLOPE.1}]
    }));
    let ecm = experiment(json!({
        "name": "clustering_ecm", "kind": "scaling", "model": "ecm", "statistic": "clustering_global",
        "gamma": 1.5, "sizes": SCALING_SIZES, "replicas": SCALING_REPLICAS,
        "assert": [{"check": "slope", "min": ECM_CLUSTERING_SLOPE.0, "max": ECM_CLUSTERING_SLOPE.1}]
    }));
    let sweep = experiment(json!({
        "name": "clustering_sweep", "kind": "gamma_sweep", "model": "ecm", "statistic": "clustering_global",
        "gammas": SWEEP_GAMMAS, "sizes": SWEEP_SIZES, "replicas": SWEEP_REPLICAS,
        "assert": [
            {"check": "argmax_gamma", "min": SWEEP_ARGMAX.0, "max": SWEEP_ARGMAX.1},
            {"check": "max_slope", "min": SWEEP_MAX_SLOPE.0, "max": SWEEP_MAX_SLOPE.1}
        ]
    }));
    let slopes: Vec<String> = sweep.summary["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| format!("{}:{:.3}", p["gamma"], p["slope"].as_f64().unwrap_or(f64::NAN)))
        .collect();
    outcome(
        all_passed(&[&cm, &ecm, &sweep]),
        format!("CM {}; ECM {}; sweep {} [{}]", describe(&cm.checks), describe(&ecm.checks), describe(&sweep.checks), slopes.join(" ")),
    )
}

fn criterion_8() -> Outcome {
    let o = experiment(json!({
        "name": "degree_sum", "kind": "distribution", "model": "cm", "statistic": "degree_power_sum",
        "power": 2, "normalization": "paper", "norming": "exact",
        "gamma": 1.5, "sizes": [DEGREE_SUM_N], "replicas": DEGREE_SUM_REPLICAS,
        "limit_samples": DEGREE_SUM_LIMIT_SAMPLES, "truncation": LIMIT_TRUNCATION,
        "assert": [{"check": "ks", "max": DEGREE_SUM_KS}]
    }));
    outcome(all_passed(&[&o]), describe(&o.checks))
}

fn criterion_9() -> Outcome {
    let o = experiment(json!({
        "name": "conditional_variance", "kind": "conditional_variance",
        "gamma": 1.5, "sizes": [VARIANCE_N], "pairings": VARIANCE_PAIRINGS,
        "assert": [{"check": "ratio", "min": VARIANCE_RATIO.0, "max": VARIANCE_RATIO.1}]
    }));
    let s = &o.summary;
    outcome(
        all_passed(&[&o]),
        format!(
            "{}; n Var = {:.4}, prediction = {:.4}, exact matching variance gives {:.4}, 2n/L = {:.4}",
            describe(&o.checks),
            s["estimate"].as_f64().unwrap(),
            s["prediction"].as_f64().unwrap(),
            s["exact"].as_f64().unwrap(),
            s["leading_term"].as_f64().unwrap()
        ),
    )
}

fn criterion_10() -> Outcome {
    let o = experiment(json!({
        "name": "integrals", "kind": "integral", "gammas": INTEGRAL_GAMMAS,
        "assert": [{"check": "integral_agreement", "max_abs": INTEGRAL_MAX_ABS, "sigmas": INTEGRAL_SIGMAS}]
    }));
    let rows: Vec<String> = o.summary
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            format!(
                "g={} A={:.6} generic={:.6} mc={:.4}+-{:.4}",
                r["gamma"], r["a_gamma"].as_f64().unwrap(), r["generic"].as_f64().unwrap(),
                r["monte_carlo"].as_f64().unwrap(), r["monte_carlo_se"].as_f64().unwrap()
            )
        })
        .collect();
    outcome(all_passed(&[&o]), format!("{} [{}]", describe(&o.checks), rows.join("; ")))
}

fn criterion_11() -> Outcome {
    let o = experiment(json!({
        "name": "edge_probability", "kind": "edge_probability",
        "gamma": 1.5, "sizes": [EDGE_N], "pairs": EDGE_PAIRS, "pairings": EDGE_PAIRINGS,
        "assert": [{"check": "deviation", "q": 0.95, "max": EDGE_P95}]
    }));
    let hub = &o.summary["hub"];
    outcome(
        all_passed(&[&o]),
        format!("{}; hub pair deviation {:.4}", describe(&o.checks), hub["deviation"].as_f64().unwrap_or(f64::NAN)),
    )
}

fn criterion_12() -> Outcome {
    let o = experiment(json!({
        "name": "joint", "kind": "joint", "gamma": 1.5, "sizes": [JOINT_N], "replicas": JOINT_REPLICAS,
        "limit_samples": JOINT_LIMIT_SAMPLES, "truncation": LIMIT_TRUNCATION,
        "assert": [{"check": "spearman", "max": JOINT_MAX_DIFF}]
    }));
    let signs = o.summary["limit_signs_ok"].as_bool() == Some(true);
    outcome(
        all_passed(&[&o]) && signs,
        format!(
            "{}; limit signs (-,+,+): {signs}; empirical {} limit {}",
            describe(&o.checks),
            o.summary["empirical_spearman"],
            o.summary["limit_spearman"]
        ),
    )
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nullmodels")).args(args).output().expect("binary runs")
}

fn criterion_13() -> Outcome {
    let mut problems = Vec::new();
    let cfg = json!({"seed": SEED, "experiments": [
        {"name": "a", "kind": "scaling", "model": "ecm", "statistic": "pearson", "sizes": [500, 5000], "replicas": 8},
        {"name": "b", "kind": "distribution", "model": "cm", "statistic": "degree_power_sum", "normalization": "paper",
         "sizes": [2000], "replicas": 20, "limit_samples": 300, "truncation": 500},
        {"name": "c", "kind": "joint", "sizes": [3000], "replicas": 10, "limit_samples": 300, "truncation": 500},
        {"name": "d", "kind": "edge_probability", "sizes": [1000], "pairs": 10, "pairings": 200},
        {"name": "e", "kind": "gamma_sweep", "model": "ecm", "statistic": "clustering_global", "gammas": [1.3, 1.6], "sizes": [300, 3000], "replicas": 4}
    ]});
    let configs: Vec<ExperimentConfig> = serde_json::from_value(cfg["experiments"].clone()).unwrap();
    let run_all = |threads: usize| -> Vec<(String, Vec<Value>, String)> {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            configs
                .iter()
                .map(|c| {
                    let o = run_experiment(c, SEED).unwrap();
                    (serde_json::to_string(&o).unwrap(), o.records, o.csv)
                })
                .collect()
        })
    };
    if run_all(1) != run_all(4) {
        problems.push("library results differ between 1 and 4 threads".to_string());
    }
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    for model in ["cm", "ecm", "irg"] {
        let mut files = Vec::new();
        for (k, threads) in ["1", "4"].iter().enumerate() {
            let out = p(&format!("{model}{k}.el"));
            let mut args = vec!["--threads", threads, "generate", "--model", model, "--gamma", "1.5", "--n", "3000", "--seed", "7", "--out", &out];
            if model == "irg" {
                args.extend(["--kernel", "poisson"]);
            }
            let r = cli(&args);
            if !r.status.success() {
                problems.push(format!("generate {model} failed: {}", String::from_utf8_lossy(&r.stderr)));
            }
            let stats = cli(&["--threads", threads, "stats", &out]);
            files.push((std::fs::read(&out).unwrap_or_default(), std::fs::read(format!("{out}.erasure.json")).ok(), stats.stdout));
        }
        if files[0] != files[1] {
            problems.push(format!("generate/stats output for {model} differs between runs"));
        }
    }
    let cfg_path = p("config.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let mut runs = Vec::new();
    for (k, threads) in ["1", "4"].iter().enumerate() {
        let out = p(&format!("run{k}"));
        let r = cli(&["--threads", threads, "experiment", "--config", &cfg_path, "--out", &out]);
        if !r.status.success() {
            problems.push(format!("experiment run failed: {}", String::from_utf8_lossy(&r.stderr)));
        }
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .map(|d| d.filter_map(|e| e.ok()).map(|e| e.path()).collect::<Vec<_>>())
            .unwrap_or_default()
            .into_iter()
            .filter(|f| f.file_name().is_some_and(|n| n != "manifest.json"))
            .map(|f| (f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&f).unwrap()))
            .collect();
        files.sort();
        runs.push(files);
    }
    if runs[0].is_empty() || runs[0] != runs[1] {
        problems.push("experiment artifacts differ between --threads 1 and --threads 4".to_string());
    }
    outcome(problems.is_empty(), format!("{} artifacts compared; {}", runs[0].len(), problems.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 13] = [
        (1, "pairing law vs matching enumeration", criterion_1),
        (2, "triangle count vs brute force", criterion_2),
        (3, "Pearson vs double loop", criterion_3),
        (4, "erased-edge scaling", criterion_4),
        (5, "negative Pearson in the ECM", criterion_5),
        (6, "IRG Pearson vs ECM Pearson", criterion_6),
        (7, "clustering exponents and gamma sweep", criterion_7),
        (8, "degree-sum stable limit", criterion_8),
        (9, "conditional variance of Pearson in the CM", criterion_9),
        (10, "integral cross-check", criterion_10),
        (11, "edge-probability approximation", criterion_11),
        (12, "joint coupling", criterion_12),
        (13, "determinism", criterion_13),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} {verdict} [{:.1}s] {name}: {}", start.elapsed().as_secs_f64(), o.detail.trim_end_matches("; "));
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {failed} criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
