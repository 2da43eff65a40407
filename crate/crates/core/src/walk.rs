//! Seeded simple random walks on Cayley graphs and their stopping times.

use std::collections::HashSet;
use std::hash::BuildHasher;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GeneratorId, GroupElement, GroupModel, LampState, Word, WALK_LEFT, WALK_RIGHT};

/// Hard cap on the length of a single exit walk; reaching it means a bug.
pub const STEP_CAP: u64 = 1_000_000_000;

/// Default escape margin for hitting walks, see [`first_hit`].
pub const DEFAULT_ESCAPE_MARGIN: u64 = 24;

/// Identifies one independent random substream.
///
/// The stream is a ChaCha8 generator keyed by `master_seed` with
/// `stream_id` selecting the 2^64-block stream, so distinct pairs never
/// overlap and results do not depend on scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        SeedSpec { master_seed, stream_id }
    }

    /// Stream of particle `particle` in replica `replica`: `replica * 2^32 + particle`.
    pub fn particle(master_seed: u64, replica: u32, particle: u32) -> Self {
        SeedSpec::new(master_seed, ((replica as u64) << 32) | particle as u64)
    }

    /// Independent substream `index` derived from this one.
    pub fn child(&self, index: u64) -> Self {
        SeedSpec::new(splitmix64(self.master_seed ^ splitmix64(self.stream_id)), index)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Increment law of the walk. Experiments use [`StepLaw::Uniform`] only; the
/// weighted law exists for negative controls.
#[derive(Clone, Debug)]
pub enum StepLaw {
    Uniform,
    Weighted(WeightedIndex<f64>),
}

impl StepLaw {
    pub fn weighted(weights: &[f64]) -> Result<Self> {
        WeightedIndex::new(weights.iter().copied())
            .map(StepLaw::Weighted)
            .map_err(|e| Error::InvalidInput(format!("bad step weights: {e}")))
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, degree: usize, rng: &mut R) -> GeneratorId {
        match self {
            StepLaw::Uniform => rng.gen_range(0..degree as u32) as GeneratorId,
            StepLaw::Weighted(w) => w.sample(rng) as GeneratorId,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkState {
    pub position: GroupElement,
    pub steps: u64,
}

impl WalkState {
    pub fn at(position: GroupElement) -> Self {
        WalkState { position, steps: 0 }
    }
}

/// One increment: right-multiply by a uniform generator.
pub fn step<R: Rng + ?Sized>(model: &GroupModel, state: &mut WalkState, rng: &mut R) -> GeneratorId {
    let s = StepLaw::Uniform.draw(model.degree(), rng);
    model.push_generator(&mut state.position, s);
    state.steps += 1;
    s
}

/// A set of sites the walk can test membership against.
pub trait Region {
    fn contains_site(&self, x: &GroupElement) -> bool;
    fn site_count(&self) -> usize;
}

impl<S: BuildHasher> Region for HashSet<GroupElement, S> {
    fn contains_site(&self, x: &GroupElement) -> bool {
        self.contains(x)
    }

    fn site_count(&self) -> usize {
        self.len()
    }
}

/// Runs a walk from `e` until it first leaves `region`.
///
/// Returns the first site outside the region and the exit index `sigma`.
pub fn run_until_exit<R: Region + ?Sized>(
    model: &GroupModel,
    region: &R,
    seed: SeedSpec,
) -> Result<(GroupElement, u64)> {
    exit_walk(model, region, &StepLaw::Uniform, &mut seed.rng(), STEP_CAP)
}

pub(crate) fn exit_walk<R: Region + ?Sized, G: Rng + ?Sized>(
    model: &GroupModel,
    region: &R,
    law: &StepLaw,
    rng: &mut G,
    cap: u64,
) -> Result<(GroupElement, u64)> {
    let mut position = model.identity();
    let mut steps = 0u64;
    while region.contains_site(&position) {
        if steps >= cap {
            return Err(Error::StepCap {
                cap,
                cluster_size: region.site_count(),
            });
        }
        let s = law.draw(model.degree(), rng);
        model.push_generator(&mut position, s);
        steps += 1;
    }
    Ok((position, steps))
}

/// Result of a truncated hitting walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum HitOutcome {
    /// The target was visited at this step.
    Hit { steps: u64 },
    /// The walk moved `escape margin` further from the target than it started.
    Escaped { steps: u64 },
    /// Neither happened before the cutoff.
    Censored { steps: u64 },
}

impl HitOutcome {
    pub fn is_hit(&self) -> bool {
        matches!(self, HitOutcome::Hit { .. })
    }

    pub fn steps(&self) -> u64 {
        match *self {
            HitOutcome::Hit { steps } | HitOutcome::Escaped { steps } | HitOutcome::Censored { steps } => steps,
        }
    }
}

/// Incremental lower bound on the word distance from the walker to a target.
enum Tracker<'a> {
    /// Exact: `|w| + |z| - 2 lcp(w, z)`.
    Tree { target: &'a Word, common: usize },
    /// `|cursor - target cursor| + #(lamps differing from the target)`.
    Lamp { target: &'a LampState, mismatched: u64 },
}

impl<'a> Tracker<'a> {
    fn new(start: &GroupElement, target: &'a GroupElement) -> Self {
        match (start, target) {
            (GroupElement::Word(w), GroupElement::Word(z)) => Tracker::Tree {
                target: z,
                common: w.common_prefix_len(z),
            },
            (GroupElement::Lamp(l), GroupElement::Lamp(t)) => {
                let mismatched = l.lamps().iter().filter(|&&p| !t.is_lit(p)).count()
                    + t.lamps().iter().filter(|&&p| !l.is_lit(p)).count();
                Tracker::Lamp {
                    target: t,
                    mismatched: mismatched as u64,
                }
            }
            _ => unreachable!("elements validated against one model"),
        }
    }

    /// Applies `s` to `position` and updates the bound.
    #[inline]
    fn advance(&mut self, model: &GroupModel, position: &mut GroupElement, s: GeneratorId) {
        match (self, &mut *position) {
            (Tracker::Tree { target, common }, GroupElement::Word(w)) => {
                let len = w.len();
                if w.last() == Some(model.inverse_of(s)) {
                    w.pop();
                    if *common == len {
                        *common -= 1;
                    }
                } else {
                    w.push(s);
                    if *common == len && target.letters().get(len) == Some(&s) {
                        *common += 1;
                    }
                }
            }
            (Tracker::Lamp { target, mismatched }, GroupElement::Lamp(l)) => match s {
                WALK_RIGHT => l.shift_cursor(1),
                WALK_LEFT => l.shift_cursor(-1),
                _ => {
                    l.toggle_at_cursor();
                    let c = l.cursor();
                    if l.is_lit(c) == target.is_lit(c) {
                        *mismatched -= 1;
                    } else {
                        *mismatched += 1;
                    }
                }
            },
            _ => unreachable!("tracker matches element kind"),
        }
    }

    fn distance_bound(&self, position: &GroupElement) -> u64 {
        match (self, position) {
            (Tracker::Tree { target, common }, GroupElement::Word(w)) => {
                (w.len() + target.len() - 2 * common) as u64
            }
            (Tracker::Lamp { target, mismatched }, GroupElement::Lamp(l)) => {
                l.cursor().abs_diff(target.cursor()) + mismatched
            }
            _ => unreachable!("tracker matches element kind"),
        }
    }
}

/// Truncated hitting walk from `e` towards `target`, using [`DEFAULT_ESCAPE_MARGIN`].
pub fn first_hit(
    model: &GroupModel,
    target: &GroupElement,
    cutoff: u64,
    seed: SeedSpec,
) -> Result<HitOutcome> {
    first_hit_with_escape(model, target, cutoff, DEFAULT_ESCAPE_MARGIN, seed)
}

/// Truncated hitting walk from `e`.
///
/// The walk stops with [`HitOutcome::Escaped`] once a lower bound on its
/// word distance to `target` reaches `|target| + escape_margin`, and with
/// [`HitOutcome::Censored`] at `cutoff` steps. On `T_q` an escaped walk
/// returns with probability `(q-1)^-(|target| + margin)`.
pub fn first_hit_with_escape(
    model: &GroupModel,
    target: &GroupElement,
    cutoff: u64,
    escape_margin: u64,
    seed: SeedSpec,
) -> Result<HitOutcome> {
    if cutoff == 0 {
        return Err(Error::InvalidInput("cutoff must be positive".to_string()));
    }
    model.validate(target)?;
    let mut rng = seed.rng();
    Ok(hit_walk(model, target, cutoff, escape_margin, &mut rng))
}

pub(crate) fn hit_walk<G: Rng + ?Sized>(
    model: &GroupModel,
    target: &GroupElement,
    cutoff: u64,
    escape_margin: u64,
    rng: &mut G,
) -> HitOutcome {
    let mut position = model.identity();
    let mut tracker = Tracker::new(&position, target);
    let start = tracker.distance_bound(&position);
    if start == 0 {
        return HitOutcome::Hit { steps: 0 };
    }
    let escape = model.word_length(target).max(start) + escape_margin;
    let degree = model.degree();
    for steps in 1..=cutoff {
        let s = StepLaw::Uniform.draw(degree, rng);
        tracker.advance(model, &mut position, s);
        let bound = tracker.distance_bound(&position);
        if bound == 0 && position == *target {
            return HitOutcome::Hit { steps };
        }
        if bound >= escape {
            return HitOutcome::Escaped { steps };
        }
    }
    HitOutcome::Censored { steps: cutoff }
}

/// First point of the walk from `e` on the external boundary of the word
/// ball of radius `n` (the word sphere of radius `n + 1`). Tree models only.
pub fn exit_point(model: &GroupModel, n: u64, seed: SeedSpec) -> Result<GroupElement> {
    model.tree_degree("exit_point")?;
    let mut rng = seed.rng();
    Ok(sphere_exit(model, n, &StepLaw::Uniform, &mut rng).0)
}

/// Tree exit walk; returns the exit site and the exit time `xi_n`.
pub(crate) fn sphere_exit<G: Rng + ?Sized>(
    model: &GroupModel,
    n: u64,
    law: &StepLaw,
    rng: &mut G,
) -> (GroupElement, u64) {
    let target_len = n as usize + 1;
    let mut position = model.identity();
    let mut steps = 0u64;
    loop {
        let s = law.draw(model.degree(), rng);
        model.push_generator(&mut position, s);
        steps += 1;
        if let GroupElement::Word(w) = &position {
            if w.len() == target_len {
                return (position, steps);
            }
        }
    }
}
