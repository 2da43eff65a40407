//! Hitting-distance balls on `T_q`.
//!
//! Because `d(e, z) = ln(q-1) |z|` on the tree, `B(n)` is the word ball of
//! radius `n` and its external boundary `∂B(n)` is the word sphere of radius
//! `n + 1`. Non-tree balls are rejected rather than approximated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GeneratorId, GroupElement, GroupModel, Word};

/// Largest sphere or ball a single enumeration may materialize or stream.
pub const DEFAULT_ELEMENT_BUDGET: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BallSpec {
    pub center: GroupElement,
    pub radius: u64,
}

impl BallSpec {
    pub fn new(center: GroupElement, radius: u64) -> Self {
        BallSpec { center, radius }
    }

    pub fn at_identity(model: &GroupModel, radius: u64) -> Self {
        BallSpec::new(model.identity(), radius)
    }
}

fn check_degree(q: u32) -> Result<u128> {
    if q < 3 {
        return Err(Error::InvalidInput(format!("tree degree must be >= 3, got {q}")));
    }
    Ok(q as u128)
}

/// `#∂B(n) = q (q-1)^n`.
pub fn sphere_size(n: u64, q: u32) -> Result<u128> {
    let q = check_degree(q)?;
    let exp = u32::try_from(n).map_err(|_| Error::Overflow(format!("sphere size at n = {n}")))?;
    (q - 1)
        .checked_pow(exp)
        .and_then(|p| p.checked_mul(q))
        .ok_or_else(|| Error::Overflow(format!("sphere size q(q-1)^n for q = {q}, n = {n}")))
}

/// `V(n) = (q (q-1)^n - 2) / (q - 2)`.
pub fn ball_volume(n: u64, q: u32) -> Result<u128> {
    let boundary = sphere_size(n, q)
        .map_err(|_| Error::Overflow(format!("ball volume for q = {q}, n = {n}")))?;
    Ok((boundary - 2) / (q as u128 - 2))
}

/// `z ∈ B(center, n)`, i.e. word distance at most `n`. Tree models only.
pub fn contains(model: &GroupModel, z: &GroupElement, spec: &BallSpec) -> Result<bool> {
    model.tree_degree("contains")?;
    Ok(model.word_distance(&spec.center, z)? <= spec.radius)
}

/// Lexicographic stream of the reduced words of a fixed length.
///
/// Extends words depth first and never appends the inverse of the last
/// letter, so memory is one word regardless of the sphere size.
#[derive(Clone, Debug)]
pub struct SphereWords<'a> {
    model: &'a GroupModel,
    current: Option<Vec<GeneratorId>>,
}

impl<'a> SphereWords<'a> {
    /// Words of exactly `len` letters; `len = 0` yields only `e`.
    pub fn new(model: &'a GroupModel, len: usize) -> Self {
        let mut first = Vec::with_capacity(len);
        for i in 0..len {
            let letter = smallest_after(model, first.get(i.wrapping_sub(1)).copied(), 0);
            first.push(letter.expect("q >= 2 always leaves a letter"));
        }
        SphereWords {
            model,
            current: Some(first),
        }
    }
}

/// Smallest letter `>= from` that does not cancel against `prev`.
fn smallest_after(model: &GroupModel, prev: Option<GeneratorId>, from: usize) -> Option<GeneratorId> {
    let banned = prev.map(|p| model.inverse_of(p));
    (from..model.degree())
        .map(|s| s as GeneratorId)
        .find(|&s| Some(s) != banned)
}

impl Iterator for SphereWords<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let word = self.current.take()?;
        let out = Word::from_reduced(&word);

        let mut next = word;
        let mut i = next.len();
        while i > 0 {
            i -= 1;
            let prev = if i == 0 { None } else { Some(next[i - 1]) };
            if let Some(bumped) = smallest_after(self.model, prev, next[i] as usize + 1) {
                next[i] = bumped;
                for j in i + 1..next.len() {
                    next[j] = smallest_after(self.model, Some(next[j - 1]), 0).expect("letter exists");
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// The external boundary `∂B(n)` as a lazily enumerated collection.
#[derive(Clone, Debug)]
pub struct SphereView<'a> {
    pub radius_index: u64,
    pub count: u128,
    model: &'a GroupModel,
}

impl<'a> SphereView<'a> {
    /// Boundary points in lexicographic order.
    pub fn iter(&self) -> SphereWords<'a> {
        SphereWords::new(self.model, self.radius_index as usize + 1)
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + 'a {
        self.iter().map(GroupElement::Word)
    }
}

/// `∂B(n)` with the default element budget.
pub fn enumerate_sphere(model: &GroupModel, n: u64) -> Result<SphereView<'_>> {
    enumerate_sphere_with_budget(model, n, DEFAULT_ELEMENT_BUDGET)
}

pub fn enumerate_sphere_with_budget(model: &GroupModel, n: u64, budget: u128) -> Result<SphereView<'_>> {
    let q = model.tree_degree("enumerate_sphere")?;
    let count = sphere_size(n, q)?;
    if count > budget {
        return Err(Error::Resource {
            what: format!("sphere ∂B({n}) of {model}"),
            required: count,
            limit: budget,
        });
    }
    Ok(SphereView {
        radius_index: n,
        count,
        model,
    })
}

/// Checks `∂B(n) ⊆ B(n+1)` by enumeration, with balls measured in units of `k`.
///
/// With the true `K = ln(q-1)` this always holds; a smaller `k` shrinks the
/// balls faster than the boundary and the check fails.
pub fn check_boundary_inclusion_with_k(model: &GroupModel, n: u64, k: f64) -> Result<bool> {
    let q = model.tree_degree("check_boundary_inclusion")?;
    let unit = ((q - 1) as f64).ln();
    // Word radius of B_k(m): largest r with d = r ln(q-1) <= k m.
    let word_radius = |m: u64| -> u64 {
        let mut r = 0u64;
        while ((r + 1) as f64) * unit <= k * m as f64 {
            r += 1;
        }
        r
    };
    let inner = word_radius(n);
    let outer_limit = k * (n + 1) as f64;
    let view = enumerate_sphere(model, inner)?;
    for z in view.iter() {
        debug_assert_eq!(z.len() as u64, inner + 1);
        if (z.len() as f64) * unit > outer_limit {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn check_boundary_inclusion(model: &GroupModel, n: u64) -> Result<bool> {
    let q = model.tree_degree("check_boundary_inclusion")?;
    check_boundary_inclusion_with_k(model, n, ((q - 1) as f64).ln())
}

/// Summary row for volume checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub q: u32,
    pub n: u64,
    pub volume: u128,
    pub sphere: u128,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::breadth_first_layers;

    fn t(q: u8) -> GroupModel {
        GroupModel::tree(q).unwrap()
    }

    #[test]
    fn volume_examples() {
        assert_eq!(ball_volume(0, 3).unwrap(), 1);
        assert_eq!(ball_volume(2, 3).unwrap(), 10);
        assert_eq!(ball_volume(2, 4).unwrap(), 17);
        assert_eq!(sphere_size(0, 3).unwrap(), 3);
        assert_eq!(sphere_size(2, 3).unwrap(), 12);
        assert_eq!(sphere_size(1, 5).unwrap(), 20);
    }

    #[test]
    fn volumes_match_bfs() {
        for q in [3u8, 4, 5] {
            let layers = breadth_first_layers(&t(q), 6);
            let mut total = 0u128;
            for (n, layer) in layers.iter().enumerate() {
                total += layer.len() as u128;
                assert_eq!(ball_volume(n as u64, q as u32).unwrap(), total);
                if n + 1 < layers.len() {
                    assert_eq!(sphere_size(n as u64, q as u32).unwrap(), layers[n + 1].len() as u128);
                }
            }
        }
    }

    #[test]
    fn sphere_is_volume_difference() {
        for q in 3..9u32 {
            for n in 0..15u64 {
                assert_eq!(
                    sphere_size(n, q).unwrap(),
                    ball_volume(n + 1, q).unwrap() - ball_volume(n, q).unwrap()
                );
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(ball_volume(200, 3), Err(Error::Overflow(_))));
        assert!(matches!(sphere_size(100, 7), Err(Error::Overflow(_))));
        assert!(ball_volume(100, 3).is_ok());
        assert!(sphere_size(3, 2).is_err());
    }

    #[test]
    fn contains_examples() {
        let t3 = t(3);
        let e = t3.identity();
        assert!(contains(&t3, &e, &BallSpec::at_identity(&t3, 0)).unwrap());
        let z = t3.parse("abc").unwrap();
        assert!(!contains(&t3, &z, &BallSpec::at_identity(&t3, 2)).unwrap());
        assert!(contains(&t3, &z, &BallSpec::at_identity(&t3, 3)).unwrap());
        let lamp = GroupModel::lamplighter();
        assert!(matches!(
            contains(&lamp, &lamp.identity(), &BallSpec::at_identity(&lamp, 1)),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn contains_is_left_invariant() {
        let t4 = t(4);
        let g = t4.parse("abAb").unwrap();
        for layer in breadth_first_layers(&t4, 4) {
            for z in layer {
                let moved = t4.multiply(&g, &z).unwrap();
                for n in 0..5 {
                    assert_eq!(
                        contains(&t4, &moved, &BallSpec::new(g.clone(), n)).unwrap(),
                        contains(&t4, &z, &BallSpec::at_identity(&t4, n)).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn sphere_enumeration_examples() {
        let t3 = t(3);
        let names = |n| -> Vec<String> {
            enumerate_sphere(&t3, n)
                .unwrap()
                .elements()
                .map(|z| t3.format(&z))
                .collect()
        };
        assert_eq!(names(0), ["a", "b", "c"]);
        assert_eq!(names(1), ["ab", "ac", "ba", "bc", "ca", "cb"]);
    }

    #[test]
    fn sphere_enumeration_matches_bfs_in_order() {
        for q in [3u8, 4, 5] {
            let model = t(q);
            let layers = breadth_first_layers(&model, 5);
            for n in 0..4u64 {
                let view = enumerate_sphere(&model, n).unwrap();
                let got: Vec<GroupElement> = view.elements().collect();
                let mut want = layers[n as usize + 1].clone();
                want.sort();
                assert_eq!(got, want);
                assert_eq!(got.len() as u128, view.count);
                for z in &got {
                    let inside = model
                        .neighbors(z)
                        .iter()
                        .filter(|y| model.word_length(y) <= n)
                        .count();
                    assert_eq!(inside, 1);
                }
            }
        }
    }

    #[test]
    fn sphere_budget_is_enforced() {
        let t3 = t(3);
        match enumerate_sphere_with_budget(&t3, 10, 1000) {
            Err(Error::Resource { required, limit, .. }) => {
                assert_eq!(required, 3 * 1024);
                assert_eq!(limit, 1000);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
        assert!(enumerate_sphere(&GroupModel::lamplighter(), 1).is_err());
    }

    #[test]
    fn boundary_inclusion_holds() {
        for n in 0..=6 {
            assert!(check_boundary_inclusion(&t(3), n).unwrap());
        }
        for n in 0..=4 {
            assert!(check_boundary_inclusion(&t(5), n).unwrap());
        }
    }

    #[test]
    fn boundary_inclusion_fails_with_corrupted_k() {
        let t3 = t(3);
        let corrupted = 2f64.ln() / 2.0;
        assert!(check_boundary_inclusion_with_k(&t3, 1, corrupted).unwrap());
        assert!(!check_boundary_inclusion_with_k(&t3, 2, corrupted).unwrap());
    }

    #[test]
    fn volume_growth_bounds() {
        for q in [3u32, 4, 5] {
            let k = ((q - 1) as f64).ln();
            let c_a = (-k).exp();
            let c_tree = q as f64 / (q as f64 - 2.0);
            for n in 0..=20u64 {
                let v = ball_volume(n, q).unwrap() as f64;
                let growth = (k * n as f64).exp();
                assert!(c_a * growth <= v * (1.0 + 1e-12));
                assert!(v <= c_tree * growth * (1.0 + 1e-12));
                // and so the cubic bound holds with C_b = c_tree for n >= 1
                if n >= 1 {
                    assert!(v <= c_tree * (n as f64).powi(3) * growth * (1.0 + 1e-12));
                }
            }
        }
    }
}
