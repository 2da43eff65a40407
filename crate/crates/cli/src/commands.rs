use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use idla_core::acceptance::{run_criterion, AcceptanceConfig, CriterionOutcome};
use idla_core::experiments::mouse::check_mouse;
use idla_core::experiments::scan::{write_jsonl, LowerBoundConstants};
use idla_core::experiments::{
    balls_in_boxes, exit_uniformity, lower_bound_scan, mouse_select, shape_scan, ClassPartition, ScanConfig,
};
use idla_core::green::{constant_k, hitting_distance, hitting_probability, tree_f_exact, HittingDistance, McConfig};
use idla_core::{Error, GroupElement, GroupModel, SeedSpec, Word};
use serde::Serialize;

use crate::args::{
    BoxesArgs, CheckArgs, Command, ExitTestArgs, GreenArgs, GroupArg, LowerBoundsArgs, MouseArgs, SimulateArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(m) => CliError::Usage(m),
            e @ Error::Unsupported { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// What a subcommand produced.
#[derive(Default)]
pub struct Report {
    pub outputs: Vec<PathBuf>,
    /// Criteria evaluated by the `check` subcommand itself.
    pub checks: Vec<CriterionOutcome>,
}

pub fn out_dir(command: &Command) -> Option<&Path> {
    match command {
        Command::Simulate(a) => Some(&a.out),
        Command::LowerBounds(a) => Some(&a.out),
        Command::Green(a) => a.out.as_deref(),
        Command::ExitTest(a) => a.out.as_deref(),
        Command::Boxes(a) => a.out.as_deref(),
        Command::Mouse(a) => a.out.as_deref(),
        Command::Check(a) => a.out.as_deref(),
    }
}

pub fn master_seed(command: &Command) -> Option<u64> {
    match command {
        Command::Simulate(a) => Some(a.seed),
        Command::LowerBounds(a) => Some(a.seed),
        Command::Green(a) => Some(a.seed),
        Command::ExitTest(a) => Some(a.seed),
        Command::Boxes(a) => Some(a.seed),
        Command::Mouse(_) => None,
        Command::Check(a) => Some(a.seed),
    }
}

/// Acceptance criteria that `--check` evaluates after each subcommand.
pub fn related_criteria(command: &Command) -> Vec<u8> {
    match command {
        Command::Simulate(_) => vec![5, 6],
        Command::LowerBounds(_) => vec![5],
        Command::Green(_) => vec![2, 3, 9],
        Command::ExitTest(_) => vec![4],
        Command::Boxes(_) => vec![7],
        Command::Mouse(_) => vec![8],
        Command::Check(_) => Vec::new(),
    }
}

pub fn run_checks(ids: &[u8], cfg: &AcceptanceConfig) -> Vec<CriterionOutcome> {
    ids.iter()
        .map(|&id| {
            let outcome = run_criterion(id, cfg);
            println!("{}", outcome.line());
            outcome
        })
        .collect()
}

pub fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::LowerBounds(a) => lower_bounds(a),
        Command::Green(a) => green(a),
        Command::ExitTest(a) => exit_test(a),
        Command::Boxes(a) => boxes(a),
        Command::Mouse(a) => mouse(a),
        Command::Check(a) => check(a),
    }
}

fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn simulate(a: &SimulateArgs) -> Result<Report, CliError> {
    let cfg = ScanConfig::tree(a.q, a.n_min, a.n_max, a.replicas, a.seed)?.with_output(&a.out);
    let scan = shape_scan(&cfg)?;
    println!("n\tmax_dI\tmax_dO\tmed_dI\tmed_dO");
    for e in &scan.envelope {
        println!(
            "{}\t{}\t{}\t{}\t{}",
            e.n, e.max_delta_i, e.max_delta_o, e.median_delta_i, e.median_delta_o
        );
    }
    for f in &scan.fits {
        match &f.fit {
            Some(fit) => println!(
                "fit {} ({} ~ {}): coefficients {:?}, R2 = {:.4}",
                f.name,
                f.target,
                fit.form.label(),
                fit.coefficients,
                fit.r_squared
            ),
            None => println!("fit {}: {}", f.name, f.error.as_deref().unwrap_or("unavailable")),
        }
    }
    Ok(Report {
        outputs: scan.files,
        ..Report::default()
    })
}

#[derive(Serialize)]
struct LowerBoundSummary {
    q: u8,
    n_min: u64,
    n_max: u64,
    replicas: u32,
    c_outer: f64,
    c_inner: f64,
    cells: usize,
    outer_reached_fraction: f64,
    inner_uncovered_fraction: f64,
}

fn lower_bounds(a: &LowerBoundsArgs) -> Result<Report, CliError> {
    let cfg = ScanConfig::tree(a.q, a.n_min, a.n_max, a.replicas, a.seed)?.with_output(&a.out);
    let halved = LowerBoundConstants::halved(a.q as u32);
    let constants = LowerBoundConstants {
        c_outer: a.c_outer.unwrap_or(halved.c_outer),
        c_inner: a.c_inner.unwrap_or(halved.c_inner),
    };
    if constants.c_outer < 0.0 || constants.c_inner < 0.0 {
        return Err(CliError::Usage("constants must be non-negative".to_string()));
    }
    let scan = lower_bound_scan(&cfg, constants)?;
    let summary = LowerBoundSummary {
        q: a.q,
        n_min: a.n_min,
        n_max: a.n_max,
        replicas: a.replicas,
        c_outer: constants.c_outer,
        c_inner: constants.c_inner,
        cells: scan.records.len(),
        outer_reached_fraction: scan.outer_reached_fraction,
        inner_uncovered_fraction: scan.inner_uncovered_fraction,
    };
    println!(
        "C_o = {:.4}, C_i = {:.4}, {} cells",
        constants.c_outer,
        constants.c_inner,
        scan.records.len()
    );
    println!("outer sphere reached: {:.4}", scan.outer_reached_fraction);
    println!("inner ball not covered: {:.4}", scan.inner_uncovered_fraction);
    let mut outputs = scan.files;
    outputs.push(write_json(&a.out, "lower_bounds_summary.json", &summary)?);
    Ok(Report {
        outputs,
        ..Report::default()
    })
}

#[derive(Serialize)]
struct GreenReport {
    group: String,
    source: String,
    target: String,
    hitting_probability: f64,
    hitting_probability_exact: Option<String>,
    hitting_probability_half_width: f64,
    distance: f64,
    distance_half_width: f64,
    distance_exact: Option<String>,
    green: f64,
    green_half_width: f64,
    constant_k: f64,
    provenance: String,
}

fn green(a: &GreenArgs) -> Result<Report, CliError> {
    let model = match a.group {
        GroupArg::Tree => GroupModel::tree(a.q)?,
        GroupArg::Lamplighter => GroupModel::lamplighter(),
    };
    let x = model.parse(&a.source)?;
    let y = model.parse(&a.target)?;
    let cfg = McConfig::with_trials(a.trials);
    let seed = SeedSpec::new(a.seed, 0);
    let f = hitting_probability::<f64>(&model, &x, &y, &cfg, seed.child(0))?;
    let d = hitting_distance::<f64>(&model, &x, &y, &cfg, seed.child(0))?;
    let constants = constant_k::<f64>(&model, &cfg, seed.child(1))?;
    let (f_exact, d_exact) = match d {
        HittingDistance::Exact(t) => {
            let z = model.multiply(&model.inverse(&x), &y)?;
            (Some(tree_f_exact(&model, &z)?.to_string()), Some(format!("{}*ln({})", t.units, t.base)))
        }
        _ => (None, None),
    };
    let g = constants.green_identity * f.value;
    let g_half_width = if f.value > 0.0 {
        g * ((constants.green_identity_half_width / constants.green_identity).powi(2)
            + (f.half_width / f.value).powi(2))
        .sqrt()
    } else {
        f64::INFINITY
    };
    let report = GreenReport {
        group: model.to_string(),
        source: model.format(&x),
        target: model.format(&y),
        hitting_probability: f.value,
        hitting_probability_exact: f_exact.clone(),
        hitting_probability_half_width: f.half_width,
        distance: d.value(),
        distance_half_width: d.half_width(),
        distance_exact: d_exact.clone(),
        green: g,
        green_half_width: g_half_width,
        constant_k: constants.k,
        provenance: format!("{:?}", f.provenance).to_lowercase(),
    };
    println!("group: {}", report.group);
    match (&f_exact, &d_exact) {
        (Some(fe), Some(de)) => {
            println!("F = {fe} = {:.12} (exact)", f.value);
            println!("d = {de} = {:.15} (exact)", d.value());
            println!("G = {:.12} (exact)", g);
            println!("K = {:.15} (exact)", constants.k);
        }
        _ => {
            println!(
                "F = {:.5} +/- {:.5} ({} trials, {} hits, censored {:.1e})",
                f.value, f.half_width, f.trials, f.hits, f.censored_fraction
            );
            if d.is_resolved() {
                println!("d = {:.5} +/- {:.5}", d.value(), d.half_width());
            } else {
                println!("d unresolved: no trial hit the target");
            }
            println!("G = {:.5} +/- {:.5}", g, g_half_width);
            println!("K = {:.5} +/- {:.5}", constants.k, constants.k_half_width);
        }
    }
    let mut outputs = Vec::new();
    if let Some(dir) = &a.out {
        outputs.push(write_json(dir, "green.json", &report)?);
    }
    Ok(Report {
        outputs,
        ..Report::default()
    })
}

fn exit_test(a: &ExitTestArgs) -> Result<Report, CliError> {
    let model = GroupModel::tree(a.q)?;
    let t = exit_uniformity(&model, a.n, a.samples, a.seed)?;
    println!(
        "exit law on the sphere of word radius {} ({} points, {} samples)",
        a.n + 1,
        t.counts.len(),
        t.samples
    );
    println!(
        "chi-square = {:.4}, dof = {}, p-value = {:.6}",
        t.chi_square.statistic, t.chi_square.dof, t.chi_square.p_value
    );
    let mut outputs = Vec::new();
    if let Some(dir) = &a.out {
        outputs.push(write_json(dir, "exit_test.json", &t)?);
    }
    Ok(Report {
        outputs,
        ..Report::default()
    })
}

fn boxes(a: &BoxesArgs) -> Result<Report, CliError> {
    let r = balls_in_boxes(a.n, a.m, a.trials, a.seed)?;
    println!("M = {} boxes, N = {} balls, {} trials", r.boxes, r.balls, r.trials);
    println!("empirical = {:.5} +/- {:.5}", r.empirical, r.half_width);
    match (&r.exact, r.exact_value) {
        (Some(e), Some(v)) => println!("exact = {e} = {v:.5}"),
        _ => println!("exact = not computed for M > 12"),
    }
    println!("bound = {:.5}", r.bound);
    let mut outputs = Vec::new();
    if let Some(dir) = &a.out {
        outputs.push(write_json(dir, "boxes.json", &r)?);
    }
    Ok(Report {
        outputs,
        ..Report::default()
    })
}

#[derive(Serialize)]
struct MouseReport {
    #[serde(flatten)]
    result: idla_core::experiments::MouseResult,
    half_radius: Option<u64>,
    passed: bool,
    check: idla_core::experiments::MouseCheck,
}

fn mouse(a: &MouseArgs) -> Result<Report, CliError> {
    let model = GroupModel::tree(a.q)?;
    let words: Vec<Word> = if !a.classes.is_empty() {
        let r = a.half_radius.expect("clap enforces --half-radius with --classes");
        let partition = ClassPartition::new(&model, a.radius, r)?;
        if let Some(bad) = a.classes.iter().find(|&&c| c as u128 >= partition.class_count) {
            return Err(CliError::Usage(format!(
                "class {bad} out of range; there are {} classes",
                partition.class_count
            )));
        }
        partition.union(&a.classes)
    } else {
        a.a.iter()
            .map(|w| {
                model
                    .parse(w.trim())
                    .map(|e| e.as_word().expect("tree elements are words").clone())
            })
            .collect::<idla_core::Result<_>>()?
    };
    let elems: Vec<GroupElement> = words.iter().cloned().map(GroupElement::Word).collect();
    let (_, result) = mouse_select(&model, &elems, a.radius)?;
    let check = check_mouse(&model, &words, a.radius, a.half_radius)?;
    println!("z_A = {}", result.z_a);
    println!("path: {}", result.path.join(" -> "));
    println!("#T_j: {:?} (#A = {})", result.t_counts, result.a_size);
    println!("invariants: {}", if check.passed() { "hold" } else { "VIOLATED" });
    let report = MouseReport {
        result,
        half_radius: a.half_radius,
        passed: check.passed(),
        check,
    };
    let mut outputs = Vec::new();
    if let Some(dir) = &a.out {
        outputs.push(write_json(dir, "mouse.json", &report)?);
    }
    Ok(Report {
        outputs,
        ..Report::default()
    })
}

fn check(a: &CheckArgs) -> Result<Report, CliError> {
    if let Some(bad) = a.only.iter().find(|&&id| !(1..=10).contains(&id)) {
        return Err(CliError::Usage(format!("no acceptance criterion {bad}")));
    }
    let cfg = AcceptanceConfig {
        master_seed: a.seed,
        shape_n_max: a.n_max,
        output_dir: a.out.as_ref().map(|d| d.join("determinism")),
    };
    let ids: Vec<u8> = if a.only.is_empty() { (1..=10).collect() } else { a.only.clone() };
    let checks = run_checks(&ids, &cfg);
    let mut outputs = Vec::new();
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        let path = dir.join("check.jsonl");
        write_jsonl(&path, &checks)?;
        outputs.push(path);
    }
    Ok(Report { outputs, checks })
}
