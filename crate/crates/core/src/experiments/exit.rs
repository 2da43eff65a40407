//! Chi-square test of the exit law on `∂B(n)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balls::{enumerate_sphere_with_budget, DEFAULT_ELEMENT_BUDGET};
use crate::error::{Error, Result};
use crate::experiments::mouse::lexicographic_rank;
use crate::group::{GroupElement, GroupModel};
use crate::stats::{chi_square_uniform, ChiSquareTest};
use crate::walk::{sphere_exit, SeedSpec, StepLaw};

/// Largest sphere whose exit histogram is held in memory.
pub const EXIT_CELL_BUDGET: u128 = DEFAULT_ELEMENT_BUDGET / 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitTest {
    pub q: u32,
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub counts: Vec<u64>,
    pub chi_square: ChiSquareTest,
}

/// Tests the exit point of the simple random walk from `e` on `∂B(n)`
/// against the uniform distribution. Sample `i` uses substream `i` of `seed`.
pub fn exit_uniformity(model: &GroupModel, n: u64, samples: u64, seed: u64) -> Result<ExitTest> {
    exit_uniformity_with_law(model, n, samples, seed, &StepLaw::Uniform)
}

/// [`exit_uniformity`] with an arbitrary step law, for negative controls.
pub fn exit_uniformity_with_law(
    model: &GroupModel,
    n: u64,
    samples: u64,
    seed: u64,
    law: &StepLaw,
) -> Result<ExitTest> {
    let q = model.tree_degree("exit_uniformity")?;
    let cells = enumerate_sphere_with_budget(model, n, EXIT_CELL_BUDGET)?.count;
    if (samples as u128) < 10 * cells {
        return Err(Error::InvalidInput(format!(
            "need at least {} samples for {cells} boundary points, got {samples}",
            10 * cells
        )));
    }
    let base = SeedSpec::new(seed, 0);
    let cells = cells as usize;
    let counts = (0..samples)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut acc, i| {
                let mut rng = base.child(i).rng();
                let (site, _) = sphere_exit(model, n, law, &mut rng);
                if let GroupElement::Word(w) = site {
                    acc[lexicographic_rank(model, w.letters())] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let chi_square = chi_square_uniform(&counts)?;
    Ok(ExitTest {
        q,
        n,
        samples,
        seed,
        counts,
        chi_square,
    })
}
