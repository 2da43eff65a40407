//! Replica scans of the IDLA cluster: fluctuation tables, envelope fits and
//! the finite-n lower-bound indicators.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balls::ball_volume;
use crate::error::{Error, Result};
use crate::experiments::fit::{fit, FitForm, FitResult};
use crate::group::{GroupKind, GroupModel};
use crate::idla::{fluctuations, grow_to_volume, run_to_volume, Checkpoint, Cluster, FluctuationRecord};
use crate::stats::{ks_two_sample, median, KsTest};
use crate::walk::SeedSpec;

pub const CSV_HEADER: &str = "model,q,n,replica,seed,volume,delta_I,delta_O";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub model: GroupKind,
    pub n_min: u64,
    pub n_max: u64,
    pub replicas: u32,
    pub master_seed: u64,
    /// Directory for the CSV and JSONL outputs; nothing is written when unset.
    pub output: Option<PathBuf>,
}

impl ScanConfig {
    /// A scan on the default presentation of `T_q`.
    pub fn tree(q: u8, n_min: u64, n_max: u64, replicas: u32, master_seed: u64) -> Result<Self> {
        let cfg = ScanConfig {
            model: GroupModel::tree(q)?.kind(),
            n_min,
            n_max,
            replicas,
            master_seed,
            output: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_output(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output = Some(dir.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas < 1 {
            return Err(Error::InvalidInput("replicas must be at least 1".to_string()));
        }
        if self.n_min < 1 {
            return Err(Error::InvalidInput("n_min must be at least 1".to_string()));
        }
        if self.n_max < self.n_min {
            return Err(Error::InvalidInput(format!(
                "n_max = {} is below n_min = {}",
                self.n_max, self.n_min
            )));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<GroupModel> {
        GroupModel::from_kind(self.model)
    }
}

/// Runs every replica to `V(n_max)`. Results come back sorted by replica;
/// failures are returned alongside whatever succeeded.
fn run_replicas(model: &GroupModel, cfg: &ScanConfig) -> (Vec<(u32, Vec<Checkpoint>)>, Option<Error>) {
    let results: Vec<(u32, Result<Vec<Checkpoint>>)> = (0..cfg.replicas)
        .into_par_iter()
        .map(|replica| {
            let run = run_to_volume(model, cfg.n_max, cfg.master_seed, replica).map(|(_, cps)| cps);
            (replica, run)
        })
        .collect();
    let mut ok = Vec::new();
    let mut first_error = None;
    for (replica, run) in results {
        match run {
            Ok(cps) => ok.push((replica, cps)),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    (ok, first_error)
}

/// Per-`n` summary across replicas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub n: u64,
    pub max_delta_i: i64,
    pub max_delta_o: i64,
    pub median_delta_i: f64,
    pub median_delta_o: f64,
    /// Median of `max(δ_I, 0)`.
    pub median_inner_excess: f64,
}

/// A named fit, or the reason it could not be made.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub target: String,
    pub fit: Option<FitResult<f64>>,
    pub error: Option<String>,
}

impl NamedFit {
    fn new(name: &str, target: &str, points: &[(u64, f64)], form: FitForm) -> Self {
        let (fit, error) = match fit(points, form) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        NamedFit {
            name: name.to_string(),
            target: target.to_string(),
            fit,
            error,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeScan {
    pub config: ScanConfig,
    pub records: Vec<FluctuationRecord>,
    pub envelope: Vec<EnvelopeRow>,
    pub fits: Vec<NamedFit>,
    pub files: Vec<PathBuf>,
}

impl ShapeScan {
    pub fn fit(&self, name: &str) -> Option<&FitResult<f64>> {
        self.fits.iter().find(|f| f.name == name).and_then(|f| f.fit.as_ref())
    }
}

pub fn envelope(records: &[FluctuationRecord]) -> Vec<EnvelopeRow> {
    let mut ns: Vec<u64> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let rows: Vec<&FluctuationRecord> = records.iter().filter(|r| r.n == n).collect();
            let di: Vec<f64> = rows.iter().map(|r| r.delta_i as f64).collect();
            let dout: Vec<f64> = rows.iter().map(|r| r.delta_o as f64).collect();
            let excess: Vec<f64> = rows.iter().map(|r| r.delta_i.max(0) as f64).collect();
            EnvelopeRow {
                n,
                max_delta_i: rows.iter().map(|r| r.delta_i).max().unwrap_or(0),
                max_delta_o: rows.iter().map(|r| r.delta_o).max().unwrap_or(0),
                median_delta_i: median(&di).unwrap_or(0.0),
                median_delta_o: median(&dout).unwrap_or(0.0),
                median_inner_excess: median(&excess).unwrap_or(0.0),
            }
        })
        .collect()
}

pub fn shape_fits(envelope: &[EnvelopeRow]) -> Vec<NamedFit> {
    let pts = |f: &dyn Fn(&EnvelopeRow) -> f64| -> Vec<(u64, f64)> { envelope.iter().map(|e| (e.n, f(e))).collect() };
    vec![
        NamedFit::new("inner_log", "max delta_I", &pts(&|e| e.max_delta_i as f64), FitForm::Log),
        NamedFit::new("outer_sqrt", "max delta_O", &pts(&|e| e.max_delta_o as f64), FitForm::Sqrt),
        NamedFit::new("outer_power", "median delta_O", &pts(&|e| e.median_delta_o), FitForm::Power),
        NamedFit::new(
            "inner_power",
            "median max(delta_I, 0)",
            &pts(&|e| e.median_inner_excess),
            FitForm::Power,
        ),
    ]
}

/// Runs `replicas` clusters to `V(n_max)` and records `δ_I`, `δ_O` for
/// `n_min <= n <= n_max`, sorted by `(n, replica)`.
pub fn shape_scan(cfg: &ScanConfig) -> Result<ShapeScan> {
    cfg.validate()?;
    let model = cfg.model()?;
    model.tree_degree("shape_scan")?;
    let (runs, error) = run_replicas(&model, cfg);
    let mut records: Vec<FluctuationRecord> = runs
        .iter()
        .flat_map(|(_, cps)| fluctuations(cps))
        .filter(|r| r.n >= cfg.n_min)
        .collect();
    records.sort_by_key(|r| (r.n, r.replica));
    let envelope = envelope(&records);
    let fits = shape_fits(&envelope);

    let mut files = Vec::new();
    if let Some(dir) = &cfg.output {
        fs::create_dir_all(dir)?;
        let csv = dir.join("shape_records.csv");
        write_records_csv(&csv, &model, &records)?;
        files.push(csv);
        if error.is_none() {
            let jsonl = dir.join("shape_fits.jsonl");
            write_jsonl(&jsonl, &fits)?;
            files.push(jsonl);
        }
    }
    if let Some(e) = error {
        return Err(e);
    }
    Ok(ShapeScan {
        config: cfg.clone(),
        records,
        envelope,
        fits,
        files,
    })
}

pub fn write_records_csv(path: &Path, model: &GroupModel, records: &[FluctuationRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            model.kind().label(),
            model.degree(),
            r.n,
            r.replica,
            r.seed,
            r.volume,
            r.delta_i,
            r.delta_o
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_jsonl<S: Serialize>(path: &Path, items: &[S]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Constants of the lower-bound scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConstants {
    pub c_outer: f64,
    pub c_inner: f64,
}

impl LowerBoundConstants {
    /// `C_o = 0.5 (ln(q-1)/ln q)^(1/2)`, `C_i = 0.25 / ln(q-1)`: half of each
    /// critical constant.
    pub fn halved(q: u32) -> Self {
        let k = ((q - 1) as f64).ln();
        LowerBoundConstants {
            c_outer: 0.5 * (k / (q as f64).ln()).sqrt(),
            c_inner: 0.25 / k,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundRecord {
    pub n: u64,
    pub replica: u32,
    /// `n + ceil(C_o sqrt(n))`.
    pub outer_index: u64,
    /// Whether `A(V(n))` meets `∂B(outer_index)`.
    pub outer_reached: bool,
    /// `n - ceil(C_i ln n)`, possibly negative.
    pub inner_index: i64,
    /// Whether `B(inner_index) ⊆ A(V(n))`.
    pub inner_covered: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundScan {
    pub config: ScanConfig,
    pub constants: LowerBoundConstants,
    pub records: Vec<LowerBoundRecord>,
    pub outer_reached_fraction: f64,
    pub inner_uncovered_fraction: f64,
    pub files: Vec<PathBuf>,
}

pub fn lower_bound_record(cp: &Checkpoint, constants: LowerBoundConstants) -> LowerBoundRecord {
    let n = cp.n as f64;
    let outer_index = cp.n + (constants.c_outer * n.sqrt()).ceil() as u64;
    let inner_index = cp.n as i64 - (constants.c_inner * n.ln()).ceil() as i64;
    LowerBoundRecord {
        n: cp.n,
        replica: cp.replica,
        outer_index,
        // ∂B(m) is the word sphere of radius m + 1
        outer_reached: cp.outer_radius > outer_index,
        inner_index,
        inner_covered: inner_index < 0 || cp.inner_radius as i64 >= inner_index,
    }
}

/// Records, per `(n, replica)`, whether the cluster reaches the enlarged
/// outer sphere and whether it covers the shrunken inner ball.
pub fn lower_bound_scan(cfg: &ScanConfig, constants: LowerBoundConstants) -> Result<LowerBoundScan> {
    cfg.validate()?;
    let model = cfg.model()?;
    model.tree_degree("lower_bound_scan")?;
    let (runs, error) = run_replicas(&model, cfg);
    let mut records: Vec<LowerBoundRecord> = runs
        .iter()
        .flat_map(|(_, cps)| cps.iter())
        .filter(|cp| cp.n >= cfg.n_min)
        .map(|cp| lower_bound_record(cp, constants))
        .collect();
    records.sort_by_key(|r| (r.n, r.replica));
    let cells = records.len().max(1) as f64;
    let outer_reached_fraction = records.iter().filter(|r| r.outer_reached).count() as f64 / cells;
    let inner_uncovered_fraction = records.iter().filter(|r| !r.inner_covered).count() as f64 / cells;

    let mut files = Vec::new();
    if let Some(dir) = &cfg.output {
        fs::create_dir_all(dir)?;
        let path = dir.join("lower_bounds.jsonl");
        write_jsonl(&path, &records)?;
        files.push(path);
    }
    if let Some(e) = error {
        return Err(e);
    }
    Ok(LowerBoundScan {
        config: cfg.clone(),
        constants,
        records,
        outer_reached_fraction,
        inner_uncovered_fraction,
        files,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelianCheck {
    pub n: u64,
    pub sphere_radius: u64,
    pub baseline: Vec<u64>,
    pub permuted: Vec<u64>,
    pub ks: KsTest,
}

/// Compares `#(A(V(n)) ∩ ∂B(r))` across replicas grown with the natural
/// particle seeds and with the same seeds handed out in a shuffled order.
pub fn abelian_check(model: &GroupModel, n: u64, r: u64, replicas: u32, master_seed: u64) -> Result<AbelianCheck> {
    let q = model.tree_degree("abelian_check")?;
    let volume = ball_volume(n, q)? as u32;
    let count = |permute: bool| -> Result<Vec<u64>> {
        (0..replicas)
            .into_par_iter()
            .map(|replica| {
                let mut order: Vec<u32> = (2..=volume).collect();
                if permute {
                    order.shuffle(&mut SeedSpec::new(master_seed, replica as u64).child(0).rng());
                }
                let mut cluster = Cluster::new(model);
                grow_to_volume(model, &mut cluster, n, master_seed, replica, |j| {
                    SeedSpec::particle(master_seed, replica, order[j as usize - 2])
                })?;
                Ok(cluster.count_at_radius(r + 1))
            })
            .collect()
    };
    let baseline = count(false)?;
    let permuted = count(true)?;
    let as_f64 = |v: &[u64]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let ks = ks_two_sample(&as_f64(&baseline), &as_f64(&permuted))?;
    Ok(AbelianCheck {
        n,
        sphere_radius: r,
        baseline,
        permuted,
        ks,
    })
}
