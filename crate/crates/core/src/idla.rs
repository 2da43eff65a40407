//! The Internal DLA growth chain and its inner and outer fluctuations.
//!
//! `A(1) = {e}`; particle `j >= 2` starts a fresh walk at `e` and adds the
//! first site it visits outside `A(j-1)`. On `T_q` the cluster is compared
//! at the times `V(n)` with the balls `B(n)`:
//!
//! * `δ_I(n) = n - inf{|z| : z ∉ A(V(n))} = n - (inner radius + 1)`
//! * `δ_O(n) = sup{|z| : z ∈ A(V(n))} - n = outer radius - n`

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::balls::{ball_volume, sphere_size, SphereWords, DEFAULT_ELEMENT_BUDGET};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, GroupModel};
use crate::walk::{exit_walk, Region, SeedSpec, StepLaw, STEP_CAP};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Addition {
    /// Cluster size after this particle, so the first logged particle has `j = 2`.
    pub j: u64,
    pub site: GroupElement,
    /// Exit index of the walk; unknown for clusters restored from a snapshot.
    pub sigma: Option<u64>,
}

/// The occupied set `A(j)` with insertion order and cached radius data.
#[derive(Clone, Debug)]
pub struct Cluster {
    members: FxHashSet<GroupElement>,
    log: Vec<Addition>,
    max_word_radius: u64,
    /// Members per word radius.
    radius_counts: Vec<u64>,
}

impl Cluster {
    /// `A(1) = {e}`.
    pub fn new(model: &GroupModel) -> Self {
        let mut members = FxHashSet::default();
        members.insert(model.identity());
        Cluster {
            members,
            log: Vec::new(),
            max_word_radius: 0,
            radius_counts: vec![1],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.members.contains(x)
    }

    pub fn additions(&self) -> &[Addition] {
        &self.log
    }

    pub fn max_word_radius(&self) -> u64 {
        self.max_word_radius
    }

    pub fn members(&self) -> impl Iterator<Item = &GroupElement> {
        self.members.iter()
    }

    /// Members in insertion order, starting with `e`.
    pub fn members_in_order<'a>(&'a self, model: &GroupModel) -> impl Iterator<Item = GroupElement> + 'a {
        std::iter::once(model.identity()).chain(self.log.iter().map(|a| a.site.clone()))
    }

    /// Number of members at word radius `r`.
    pub fn count_at_radius(&self, r: u64) -> u64 {
        self.radius_counts.get(r as usize).copied().unwrap_or(0)
    }

    /// Adds a site outside the cluster that neighbours it.
    pub fn insert(&mut self, model: &GroupModel, site: GroupElement, sigma: Option<u64>) -> Result<()> {
        if self.members.contains(&site) {
            return Err(Error::InvalidInput(format!(
                "{} is already in the cluster",
                model.format(&site)
            )));
        }
        if !model.neighbors(&site).iter().any(|y| self.members.contains(y)) {
            return Err(Error::InvalidInput(format!(
                "{} does not neighbour the cluster",
                model.format(&site)
            )));
        }
        let r = model.word_length(&site);
        if self.radius_counts.len() <= r as usize {
            self.radius_counts.resize(r as usize + 1, 0);
        }
        self.radius_counts[r as usize] += 1;
        self.max_word_radius = self.max_word_radius.max(r);
        self.members.insert(site.clone());
        self.log.push(Addition {
            j: self.members.len() as u64,
            site,
            sigma,
        });
        Ok(())
    }

    /// Builds a cluster from members in insertion order (the first must be `e`).
    pub fn from_sites(model: &GroupModel, sites: impl IntoIterator<Item = GroupElement>) -> Result<Self> {
        let mut sites = sites.into_iter();
        match sites.next() {
            Some(first) if first == model.identity() => {}
            _ => {
                return Err(Error::InvalidInput(
                    "a cluster must start at the identity".to_string(),
                ))
            }
        }
        let mut cluster = Cluster::new(model);
        for site in sites {
            model.validate(&site)?;
            cluster.insert(model, site, None)?;
        }
        Ok(cluster)
    }
}

impl Region for Cluster {
    fn contains_site(&self, x: &GroupElement) -> bool {
        self.members.contains(x)
    }

    fn site_count(&self) -> usize {
        self.members.len()
    }
}

/// Releases one particle from `e` and adds its exit site.
pub fn grow_one(model: &GroupModel, cluster: &mut Cluster, seed: SeedSpec) -> Result<GroupElement> {
    grow_with_law(model, cluster, &StepLaw::Uniform, seed)
}

fn grow_with_law(model: &GroupModel, cluster: &mut Cluster, law: &StepLaw, seed: SeedSpec) -> Result<GroupElement> {
    let (site, sigma) = exit_walk(model, cluster, law, &mut seed.rng(), STEP_CAP)?;
    cluster.insert(model, site.clone(), Some(sigma))?;
    Ok(site)
}

/// Largest `r` with `B(r) ⊆ cluster`, searching upward from `hint`.
///
/// `hint` must be a radius already known to be covered (the value at an
/// earlier time; clusters only grow). Each candidate sphere is first
/// screened by its member count, then streamed and checked point by point.
pub fn inner_radius_from(model: &GroupModel, cluster: &Cluster, hint: u64) -> Result<u64> {
    let q = model.tree_degree("inner_radius")?;
    let mut r = hint;
    loop {
        let next = r + 1;
        let full = sphere_size(next - 1, q)?;
        if full > DEFAULT_ELEMENT_BUDGET || (cluster.count_at_radius(next) as u128) < full {
            return Ok(r);
        }
        let covered = SphereWords::new(model, next as usize).all(|w| cluster.contains(&GroupElement::Word(w)));
        if !covered {
            return Ok(r);
        }
        r = next;
    }
}

pub fn inner_radius(model: &GroupModel, cluster: &Cluster) -> Result<u64> {
    inner_radius_from(model, cluster, 0)
}

/// `max_{z ∈ A} d(z)/K`, which is the largest word length on a tree.
pub fn outer_radius(model: &GroupModel, cluster: &Cluster) -> Result<u64> {
    model.tree_degree("outer_radius")?;
    Ok(cluster.max_word_radius())
}

/// Radii of the cluster at time `V(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    pub volume: u64,
    pub inner_radius: u64,
    pub outer_radius: u64,
    pub seed: u64,
    pub replica: u32,
}

/// One measurement row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluctuationRecord {
    pub n: u64,
    pub volume: u64,
    pub delta_i: i64,
    pub delta_o: i64,
    pub seed: u64,
    pub replica: u32,
}

impl FluctuationRecord {
    pub fn from_checkpoint(c: &Checkpoint) -> Self {
        FluctuationRecord {
            n: c.n,
            volume: c.volume,
            delta_i: c.n as i64 - (c.inner_radius as i64 + 1),
            delta_o: c.outer_radius as i64 - c.n as i64,
            seed: c.seed,
            replica: c.replica,
        }
    }
}

pub fn fluctuations(checkpoints: &[Checkpoint]) -> Vec<FluctuationRecord> {
    checkpoints.iter().map(FluctuationRecord::from_checkpoint).collect()
}

/// Largest `n` whose `V(n)` fits the element budget.
fn attainable_radius(q: u32, budget: u128) -> u64 {
    (0..)
        .take_while(|&n| ball_volume(n, q).map(|v| v <= budget).unwrap_or(false))
        .last()
        .unwrap_or(0)
}

/// Grows replica `replica` to `V(n_max)` members, recording a checkpoint at
/// every `V(n)`. Particle `j` uses stream `replica * 2^32 + j`.
pub fn run_to_volume(
    model: &GroupModel,
    n_max: u64,
    master_seed: u64,
    replica: u32,
) -> Result<(Cluster, Vec<Checkpoint>)> {
    let mut cluster = Cluster::new(model);
    let checkpoints = grow_to_volume(model, &mut cluster, n_max, master_seed, replica, |j| {
        SeedSpec::particle(master_seed, replica, j)
    })?;
    Ok((cluster, checkpoints))
}

/// Continues `cluster` to `V(n_max)`. Checkpoints are recorded for every
/// `V(n)` reached during this call, plus the current size if it is one.
pub fn grow_to_volume(
    model: &GroupModel,
    cluster: &mut Cluster,
    n_max: u64,
    master_seed: u64,
    replica: u32,
    particle_seed: impl Fn(u32) -> SeedSpec,
) -> Result<Vec<Checkpoint>> {
    let q = model.tree_degree("run_to_volume")?;
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be at least 1".to_string()));
    }
    let target = ball_volume(n_max, q)?;
    if target > DEFAULT_ELEMENT_BUDGET || target > u32::MAX as u128 {
        return Err(Error::Resource {
            what: format!(
                "cluster of volume V({n_max}); largest attainable n is {}",
                attainable_radius(q, DEFAULT_ELEMENT_BUDGET.min(u32::MAX as u128))
            ),
            required: target,
            limit: DEFAULT_ELEMENT_BUDGET,
        });
    }
    let target = target as u64;

    let mut checkpoints = Vec::new();
    let mut inner_hint = 0u64;
    let mut n = 1u64;
    while ball_volume(n, q)? < cluster.len() as u128 {
        n += 1;
    }
    while n <= n_max {
        let volume = ball_volume(n, q)? as u64;
        while (cluster.len() as u64) < volume {
            let j = cluster.len() as u32 + 1;
            grow_one(model, cluster, particle_seed(j))?;
        }
        inner_hint = inner_radius_from(model, cluster, inner_hint)?;
        checkpoints.push(Checkpoint {
            n,
            volume,
            inner_radius: inner_hint,
            outer_radius: cluster.max_word_radius(),
            seed: master_seed,
            replica,
        });
        n += 1;
    }
    debug_assert_eq!(cluster.len() as u64, target);
    Ok(checkpoints)
}

/// First line of a snapshot file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub model: GroupKind,
    pub q: u32,
    pub master_seed: u64,
    pub replica: u32,
    pub particles: u64,
    pub artifact_version: String,
}

/// Writes the manifest line followed by one canonical word per member, in
/// insertion order.
pub fn write_snapshot(
    path: &Path,
    model: &GroupModel,
    cluster: &Cluster,
    master_seed: u64,
    replica: u32,
) -> Result<SnapshotManifest> {
    let manifest = SnapshotManifest {
        model: model.kind(),
        q: model.degree() as u32,
        master_seed,
        replica,
        particles: cluster.len() as u64,
        artifact_version: ARTIFACT_VERSION.to_string(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &manifest)?;
    writeln!(out)?;
    for site in cluster.members_in_order(model) {
        writeln!(out, "{}", model.format(&site))?;
    }
    out.flush()?;
    Ok(manifest)
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotManifest, GroupModel, Cluster)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty snapshot".to_string()))??;
    let manifest: SnapshotManifest = serde_json::from_str(&header)?;
    let model = GroupModel::from_kind(manifest.model)?;
    let sites = lines
        .map(|line| model.parse(&line?))
        .collect::<Result<Vec<_>>>()?;
    if sites.len() as u64 != manifest.particles {
        return Err(Error::Format(format!(
            "snapshot lists {} sites but the manifest says {}",
            sites.len(),
            manifest.particles
        )));
    }
    let cluster = Cluster::from_sites(&model, sites)?;
    Ok((manifest, model, cluster))
}
