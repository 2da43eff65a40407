//! The ten acceptance criteria, runnable from tests and from the CLI.
//!
//! Each criterion returns an outcome and the bytes of the data it produced.
//! Criterion 10 reruns the stochastic criteria in worker pools of different
//! sizes and compares those bytes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::FromPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balls::{ball_volume, enumerate_sphere, sphere_size, SphereWords};
use crate::error::{Error, Result};
use crate::experiments::fit::linear_regression;
use crate::experiments::mouse::{check_mouse, ClassPartition};
use crate::experiments::scan::{shape_scan, write_records_csv, ScanConfig};
use crate::experiments::{balls_in_boxes, exit_uniformity, occupancy_bound, occupancy_exact};
use crate::green::{hitting_distance, mc_f, tree_log_green, HittingDistance, HittingEstimate, McConfig};
use crate::group::{breadth_first_layers, GroupElement, GroupModel, Word};
use crate::stats::ks_uniform;
use crate::walk::SeedSpec;

pub const DEFAULT_ACCEPTANCE_SEED: u64 = 20_240_101;

/// Criteria that draw random numbers and so take part in criterion 10.
pub const STOCHASTIC_CRITERIA: [u8; 7] = [2, 3, 4, 5, 6, 7, 8];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    pub master_seed: u64,
    /// Largest `n` of the shape scan behind criteria 5 and 6.
    pub shape_n_max: u64,
    /// Where criterion 10 writes the files it compares; a temporary
    /// directory when unset.
    pub output_dir: Option<PathBuf>,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig {
            master_seed: DEFAULT_ACCEPTANCE_SEED,
            shape_n_max: 13,
            output_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// Outside the expected band but not a failure at this scale.
    pub warning: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        let status = match (self.passed, self.warning) {
            (false, _) => "FAIL",
            (true, true) => "PASS (warning)",
            (true, false) => "PASS",
        };
        let budget = self
            .budget_seconds
            .map(|b| format!(" / {b:.0}s"))
            .unwrap_or_default();
        format!(
            "criterion {:>2} [{}] {}: {} ({:.1}s{})",
            self.id, status, self.name, self.detail, self.seconds, budget
        )
    }
}

struct Verdict {
    passed: bool,
    warning: bool,
    detail: String,
    artifact: Vec<u8>,
}

impl Verdict {
    fn new(passed: bool, detail: String, artifact: Vec<u8>) -> Self {
        Verdict {
            passed,
            warning: false,
            detail,
            artifact,
        }
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "exact tree identities",
        2 => "hitting law",
        3 => "metric axioms",
        4 => "exit law",
        5 => "shape theorem envelope",
        6 => "fluctuation orders",
        7 => "balls in boxes",
        8 => "mouse algorithm",
        9 => "Green decay on trees",
        10 => "determinism",
        _ => "unknown",
    }
}

fn budget(id: u8) -> Option<f64> {
    match id {
        1 => Some(10.0),
        2 => Some(60.0),
        3 => Some(300.0),
        4 => Some(300.0),
        5 => Some(900.0),
        7 => Some(30.0),
        8 => Some(120.0),
        _ => None,
    }
}

fn to_json<S: Serialize>(value: &S) -> Vec<u8> {
    serde_json::to_vec(value).expect("acceptance artifacts serialize")
}

fn run_verdict(id: u8, cfg: &AcceptanceConfig) -> Result<Verdict> {
    match id {
        1 => exact_identities(),
        2 => hitting_law(cfg.master_seed),
        3 => metric_axioms(cfg.master_seed),
        4 => exit_law(cfg.master_seed),
        5 => shape_envelope(cfg),
        6 => fluctuation_orders(cfg),
        7 => balls_and_boxes(cfg.master_seed),
        8 => mouse(cfg.master_seed),
        9 => green_decay(),
        10 => determinism(cfg),
        _ => Err(Error::InvalidInput(format!("no acceptance criterion {id}"))),
    }
}

/// Runs one criterion and returns its outcome with the bytes it produced.
pub fn run_criterion_with_artifact(id: u8, cfg: &AcceptanceConfig) -> (CriterionOutcome, Vec<u8>) {
    let start = Instant::now();
    let verdict = run_verdict(id, cfg);
    let seconds = start.elapsed().as_secs_f64();
    let budget_seconds = budget(id);
    let over_budget = budget_seconds.is_some_and(|b| seconds > b);
    let (passed, warning, mut detail, artifact) = match verdict {
        Ok(v) => (v.passed, v.warning, v.detail, v.artifact),
        Err(e) => (false, false, format!("error: {e}"), Vec::new()),
    };
    if over_budget {
        detail.push_str("; over time budget");
    }
    (
        CriterionOutcome {
            id,
            name: criterion_name(id).to_string(),
            passed: passed && !over_budget,
            warning,
            detail,
            seconds,
            budget_seconds,
        },
        artifact,
    )
}

pub fn run_criterion(id: u8, cfg: &AcceptanceConfig) -> CriterionOutcome {
    run_criterion_with_artifact(id, cfg).0
}

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionOutcome> {
    (1..=10).map(|id| run_criterion(id, cfg)).collect()
}

fn exact_identities() -> Result<Verdict> {
    let mut mismatches = Vec::new();
    let mut rows = Vec::new();
    for q in [3u8, 4, 5] {
        let model = GroupModel::tree(q)?;
        let layers = breadth_first_layers(&model, 9);
        let mut volume = 0u128;
        for n in 0..=8u64 {
            volume += layers[n as usize].len() as u128;
            let bfs_sphere = layers[n as usize + 1].len() as u128;
            let formula = (ball_volume(n, q as u32)?, sphere_size(n, q as u32)?);
            let streamed = enumerate_sphere(&model, n)?.iter().count() as u128;
            if formula != (volume, bfs_sphere) || streamed != bfs_sphere {
                mismatches.push(format!("q={q} n={n}"));
            }
            rows.push((q, n, volume, bfs_sphere));
        }
    }
    let detail = if mismatches.is_empty() {
        format!("{} (q, n) pairs agree with BFS", rows.len())
    } else {
        format!("mismatch at {}", mismatches.join(", "))
    };
    Ok(Verdict::new(mismatches.is_empty(), detail, to_json(&rows)))
}

fn hitting_law(seed: u64) -> Result<Verdict> {
    let model = GroupModel::tree(3)?;
    let e = model.identity();
    let cfg = McConfig::with_trials(100_000);
    let mut passed = true;
    let mut parts = Vec::new();
    let mut estimates: Vec<HittingEstimate<f64>> = Vec::new();
    for (k, word) in ["a", "ab", "abc"].into_iter().enumerate() {
        let z = model.parse(word)?;
        let est: HittingEstimate<f64> = mc_f(&model, &e, &z, &cfg, SeedSpec::new(seed, 200 + k as u64))?;
        let p = 0.5f64.powi(k as i32 + 1);
        let sigma = (p * (1.0 - p) / cfg.trials as f64).sqrt();
        let z_score = (est.value - p) / sigma;
        let ok = z_score.abs() <= 3.0 && est.censored_fraction < 1e-3;
        passed &= ok;
        parts.push(format!(
            "|z|={} F={:.5} ({:+.2} sigma, censored {:.0e})",
            k + 1,
            est.value,
            z_score,
            est.censored_fraction
        ));
        estimates.push(est);
    }
    Ok(Verdict::new(passed, parts.join("; "), to_json(&estimates)))
}

fn random_word<R: Rng>(model: &GroupModel, max_len: usize, rng: &mut R) -> Result<GroupElement> {
    let len = rng.gen_range(0..=max_len);
    let letters: Vec<u8> = (0..len).map(|_| rng.gen_range(0..model.degree() as u8)).collect();
    model.reduce(&letters)
}

fn tree_axioms(model: &GroupModel, triples: usize, seed: SeedSpec) -> Result<Vec<String>> {
    let mut rng = seed.rng();
    let cfg = McConfig::default();
    let d = |x: &GroupElement, y: &GroupElement| -> Result<crate::green::TreeDistance> {
        match hitting_distance::<f64>(model, x, y, &cfg, seed)? {
            HittingDistance::Exact(t) => Ok(t),
            _ => Err(Error::InvalidInput("tree distances are exact".to_string())),
        }
    };
    let mut failures = Vec::new();
    for i in 0..triples {
        let x = random_word(model, 12, &mut rng)?;
        let y = random_word(model, 12, &mut rng)?;
        let z = random_word(model, 12, &mut rng)?;
        let g = random_word(model, 12, &mut rng)?;
        let (xy, yx, yz, xz) = (d(&x, &y)?, d(&y, &x)?, d(&y, &z)?, d(&x, &z)?);
        let shifted = d(&model.multiply(&g, &x)?, &model.multiply(&g, &y)?)?;
        let ok = d(&x, &x)?.units == 0
            && ((xy.units == 0) == (x == y))
            && xy == yx
            && xz.units <= xy.units + yz.units
            && shifted == xy;
        if !ok {
            failures.push(format!("{} triple {i}", model));
        }
    }
    Ok(failures)
}

#[derive(Serialize)]
struct LampTriple {
    x: String,
    y: String,
    z: String,
    d_xy: f64,
    d_yx: f64,
    d_yz: f64,
    d_xz: f64,
}

fn metric_axioms(seed: u64) -> Result<Verdict> {
    let mut failures = tree_axioms(&GroupModel::tree(3)?, 10_000, SeedSpec::new(seed, 300))?;
    failures.extend(tree_axioms(&GroupModel::tree(4)?, 10_000, SeedSpec::new(seed, 301))?);

    let lamp = GroupModel::lamplighter();
    let mut rng = SeedSpec::new(seed, 302).rng();
    let triples: Vec<[GroupElement; 3]> = (0..100)
        .map(|_| -> Result<[GroupElement; 3]> {
            Ok([
                random_word(&lamp, 3, &mut rng)?,
                random_word(&lamp, 3, &mut rng)?,
                random_word(&lamp, 3, &mut rng)?,
            ])
        })
        .collect::<Result<_>>()?;
    let cfg = McConfig::with_trials(4000);
    let base = SeedSpec::new(seed, 303);
    let mut worst = 0.0f64;
    let mut lamp_rows = Vec::new();
    for (i, [x, y, z]) in triples.iter().enumerate() {
        let stream = |k: u64| base.child(4 * i as u64 + k);
        let d_xy = hitting_distance::<f64>(&lamp, x, y, &cfg, stream(0))?;
        let d_yx = hitting_distance::<f64>(&lamp, y, x, &cfg, stream(1))?;
        let d_yz = hitting_distance::<f64>(&lamp, y, z, &cfg, stream(2))?;
        let d_xz = hitting_distance::<f64>(&lamp, x, z, &cfg, stream(3))?;
        if ![&d_xy, &d_yx, &d_yz, &d_xz].iter().all(|d| d.is_resolved()) {
            failures.push(format!("lamplighter triple {i} unresolved"));
            continue;
        }
        let sym_sigma = (d_xy.std_error().powi(2) + d_yx.std_error().powi(2)).sqrt();
        let tri_sigma = (d_xy.std_error().powi(2) + d_yz.std_error().powi(2) + d_xz.std_error().powi(2)).sqrt();
        let sym_excess = (d_xy.value() - d_yx.value()).abs() - 3.0 * sym_sigma;
        let tri_excess = d_xz.value() - d_xy.value() - d_yz.value() - 3.0 * tri_sigma;
        worst = worst.max(sym_excess.max(tri_excess) / sym_sigma.max(tri_sigma).max(1e-12));
        if sym_excess > 0.0 {
            failures.push(format!("lamplighter symmetry, triple {i}"));
        }
        if tri_excess > 0.0 {
            failures.push(format!("lamplighter triangle, triple {i}"));
        }
        lamp_rows.push(LampTriple {
            x: lamp.format(x),
            y: lamp.format(y),
            z: lamp.format(z),
            d_xy: d_xy.value(),
            d_yx: d_yx.value(),
            d_yz: d_yz.value(),
            d_xz: d_xz.value(),
        });
    }
    let detail = if failures.is_empty() {
        "2 x 10^4 tree triples exact; 100 lamplighter triples within 3 sigma".to_string()
    } else {
        format!("{} failures, first: {}", failures.len(), failures[0])
    };
    Ok(Verdict::new(failures.is_empty(), detail, to_json(&lamp_rows)))
}

fn exit_law(seed: u64) -> Result<Verdict> {
    let mut passed = true;
    let mut parts = Vec::new();
    let mut all_p = Vec::new();
    for q in [3u8, 4] {
        let model = GroupModel::tree(q)?;
        for n in 0..=2u64 {
            let p_values = (0..50u64)
                .map(|s| {
                    exit_uniformity(&model, n, 100_000, seed ^ ((q as u64) << 40) ^ (n << 32) ^ s)
                        .map(|t| t.chi_square.p_value)
                })
                .collect::<Result<Vec<f64>>>()?;
            let ks = ks_uniform(&p_values)?;
            passed &= ks.p_value > 0.01;
            parts.push(format!("q={q} n={n} KS p={:.3}", ks.p_value));
            all_p.push(p_values);
        }
    }
    Ok(Verdict::new(passed, parts.join(", "), to_json(&all_p)))
}

fn shape_config(cfg: &AcceptanceConfig) -> Result<ScanConfig> {
    ScanConfig::tree(3, 6, cfg.shape_n_max.max(6), 20, cfg.master_seed)
}

fn shape_envelope(cfg: &AcceptanceConfig) -> Result<Verdict> {
    let scan_cfg = shape_config(cfg)?;
    let scan = shape_scan(&scan_cfg)?;
    let k = 2f64.ln();
    let violations: Vec<String> = scan
        .records
        .iter()
        .filter(|r| r.n > 5)
        .filter(|r| {
            let n = r.n as f64;
            r.delta_i as f64 > (3.0 / k + 1.0) * n.ln() || r.delta_o as f64 > 2.5 * n.sqrt()
        })
        .map(|r| format!("n={} replica={}", r.n, r.replica))
        .collect();
    let max_i = scan.records.iter().map(|r| r.delta_i).max().unwrap_or(0);
    let max_o = scan.records.iter().map(|r| r.delta_o).max().unwrap_or(0);
    let dir = tempfile::tempdir()?;
    let csv = dir.path().join("shape_records.csv");
    write_records_csv(&csv, &scan_cfg.model()?, &scan.records)?;
    let detail = format!(
        "{} records, {} violations, max delta_I = {max_i}, max delta_O = {max_o}",
        scan.records.len(),
        violations.len()
    );
    Ok(Verdict::new(violations.is_empty(), detail, fs::read(csv)?))
}

fn fluctuation_orders(cfg: &AcceptanceConfig) -> Result<Verdict> {
    let scan = shape_scan(&shape_config(cfg)?)?;
    let outer = scan.fit("outer_power").and_then(|f| f.alpha());
    let inner = scan.fit("inner_power").and_then(|f| f.alpha());
    let in_band = match (outer, inner) {
        (Some(a), Some(b)) => (0.3..=0.7).contains(&a) && b <= 0.3,
        _ => false,
    };
    let fmt = |a: Option<f64>| a.map(|a| format!("{a:.3}")).unwrap_or_else(|| "no fit".to_string());
    let mut detail = format!("alpha(delta_O) = {}, alpha(delta_I+) = {}", fmt(outer), fmt(inner));
    let hard = cfg.shape_n_max >= 13;
    let warning = !in_band && cfg.shape_n_max < 12;
    if !in_band && !hard {
        detail.push_str("; outside band, report only below n_max = 13");
    }
    Ok(Verdict {
        passed: in_band || !hard,
        warning,
        detail,
        artifact: to_json(&scan.fits),
    })
}

fn balls_and_boxes(seed: u64) -> Result<Verdict> {
    let mut bound_violations = Vec::new();
    for m in 3..=12u64 {
        for n in 0..=40u64 {
            let bound = BigRational::from_f64(occupancy_bound(n, m)).expect("bound is finite");
            if occupancy_exact(n, m) > bound {
                bound_violations.push(format!("M={m} N={n}"));
            }
        }
    }
    let mut mc_failures = Vec::new();
    let mut results = Vec::new();
    for m in 3..=12u64 {
        for n in [m, 2 * m, 3 * m] {
            let r = balls_in_boxes(n, m, 100_000, seed.wrapping_add(m * 100 + n))?;
            let p = r.exact_value.expect("exact value for M <= 12");
            let sigma = (p * (1.0 - p) / r.trials as f64).sqrt();
            if (r.empirical - p).abs() > 3.0 * sigma {
                mc_failures.push(format!("M={m} N={n}"));
            }
            results.push(r);
        }
    }
    let passed = bound_violations.is_empty() && mc_failures.is_empty();
    let detail = format!(
        "bound violations: {}; MC outside 3 sigma: {} of {}",
        bound_violations.len(),
        mc_failures.len(),
        results.len()
    );
    Ok(Verdict::new(passed, detail, to_json(&results)))
}

fn proper_subsets(count: usize) -> impl Iterator<Item = Vec<usize>> {
    let full = (1u64 << count) - 1;
    (0..full).map(move |mask| (0..count).filter(|&i| mask >> i & 1 == 1).collect())
}

fn random_proper_subset<R: Rng>(count: usize, rng: &mut R) -> Vec<usize> {
    loop {
        let subset: Vec<usize> = (0..count).filter(|_| rng.gen_bool(0.5)).collect();
        if subset.len() < count {
            return subset;
        }
    }
}

/// Largest class count enumerated exhaustively; bigger partitions are sampled.
const EXHAUSTIVE_CLASS_LIMIT: u128 = 16;

fn mouse(seed: u64) -> Result<Verdict> {
    let mut checked = 0u64;
    let mut failures = Vec::new();
    let mut rng = SeedSpec::new(seed, 800).rng();
    let mut sampled = 0u64;
    for q in [3u8, 4] {
        let model = GroupModel::tree(q)?;
        for radius in 0..=3u64 {
            for r in 0..radius.max(1) {
                let partition = ClassPartition::new(&model, radius, r)?;
                let classes = partition.class_count as usize;
                let subsets: Vec<Vec<usize>> = if partition.class_count <= EXHAUSTIVE_CLASS_LIMIT {
                    proper_subsets(classes).collect()
                } else {
                    sampled += 1000;
                    (0..1000).map(|_| random_proper_subset(classes, &mut rng)).collect()
                };
                let bad: Vec<String> = subsets
                    .par_iter()
                    .filter_map(|s| {
                        let a = partition.union(s);
                        match check_mouse(&model, &a, radius, Some(r)) {
                            Ok(c) if c.passed() => None,
                            Ok(c) => Some(format!("q={q} R={radius} r={r}: {c:?}")),
                            Err(e) => Some(format!("q={q} R={radius} r={r}: {e}")),
                        }
                    })
                    .collect();
                checked += subsets.len() as u64;
                failures.extend(bad);
            }
        }
        let radius = 8u64;
        let inputs: Vec<(u64, Vec<usize>)> = (0..1000)
            .map(|_| {
                let r = rng.gen_range(0..radius);
                let classes = sphere_size(radius - r, q as u32).expect("small sphere") as usize;
                (r, random_proper_subset(classes, &mut rng))
            })
            .collect();
        let bad: Vec<String> = inputs
            .par_iter()
            .filter_map(|(r, s)| {
                let partition = ClassPartition::new(&model, radius, *r).ok()?;
                let a: Vec<Word> = partition.union(s);
                match check_mouse(&model, &a, radius, Some(*r)) {
                    Ok(c) if c.passed() => None,
                    Ok(c) => Some(format!("q={q} R=8 r={r}: {c:?}")),
                    Err(e) => Some(format!("q={q} R=8 r={r}: {e}")),
                }
            })
            .collect();
        checked += inputs.len() as u64;
        failures.extend(bad);
    }
    let detail = format!(
        "{checked} sets checked ({sampled} sampled from large partitions at R <= 3), {} failures",
        failures.len()
    );
    Ok(Verdict::new(failures.is_empty(), detail, to_json(&(checked, &failures))))
}

fn green_decay() -> Result<Verdict> {
    let mut passed = true;
    let mut parts = Vec::new();
    for q in [3u8, 4, 5] {
        let model = GroupModel::tree(q)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for len in 1..=12usize {
            let z = GroupElement::Word(SphereWords::new(&model, len).next().expect("sphere is nonempty"));
            xs.push(len as f64);
            ys.push(-tree_log_green::<f64>(&model, &z)?);
        }
        let (_, slope, r2) = linear_regression(&xs, &ys)?;
        let k = ((q - 1) as f64).ln();
        passed &= (slope - k).abs() < 1e-9 && r2 > 0.999;
        parts.push(format!("q={q} slope-K={:.1e} R2={r2:.6}", slope - k));
    }
    Ok(Verdict::new(passed, parts.join(", "), Vec::new()))
}

fn run_in_pool(threads: usize, id: u8, cfg: &AcceptanceConfig) -> Result<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let (outcome, artifact) = pool.install(|| run_criterion_with_artifact(id, cfg));
    if artifact.is_empty() {
        return Err(Error::InvalidInput(format!(
            "criterion {id} produced no output: {}",
            outcome.detail
        )));
    }
    Ok(artifact)
}

fn determinism(cfg: &AcceptanceConfig) -> Result<Verdict> {
    let temp;
    let dir: &Path = match &cfg.output_dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            d
        }
        None => {
            temp = tempfile::tempdir()?;
            temp.path()
        }
    };
    let mut differing = Vec::new();
    let mut digests = Vec::new();
    for id in STOCHASTIC_CRITERIA {
        let mut files = Vec::new();
        for threads in [1usize, 4] {
            let path = dir.join(format!("criterion-{id}-threads-{threads}.out"));
            fs::write(&path, run_in_pool(threads, id, cfg)?)?;
            files.push(fs::read(&path)?);
        }
        if files[0] != files[1] {
            differing.push(id.to_string());
        }
        digests.push((id, files[0].len()));
    }
    let detail = if differing.is_empty() {
        format!(
            "criteria {:?} byte-identical with 1 and 4 worker threads",
            STOCHASTIC_CRITERIA
        )
    } else {
        format!("outputs differ for criteria {}", differing.join(", "))
    };
    Ok(Verdict::new(differing.is_empty(), detail, to_json(&digests)))
}
