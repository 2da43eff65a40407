//! The Mouse algorithm and the class partition of `∂B(R)`.
//!
//! The mouse starts at `e` and walks outward, always stepping into the child
//! subtree holding the fewest points of `A`; after `R + 1` steps it sits at
//! `z_A ∈ ∂B(R)`, a boundary point not in `A`.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::balls::{sphere_size, SphereWords};
use crate::error::{Error, Result};
use crate::group::{GeneratorId, GroupElement, GroupModel, Word};

/// Partition of `∂B(R)` into the classes `[z] = ∂B(R) ∩ B(z, 2r)`.
///
/// On `T_q` two boundary words are within distance `2r` exactly when they
/// share their first `R + 1 - r` letters, so the classes are indexed by
/// those prefixes and there are `q (q-1)^(R-r)` of them.
#[derive(Clone, Debug)]
pub struct ClassPartition<'a> {
    model: &'a GroupModel,
    pub radius: u64,
    pub half_radius: u64,
    pub class_count: u128,
}

impl<'a> ClassPartition<'a> {
    pub fn new(model: &'a GroupModel, radius: u64, half_radius: u64) -> Result<Self> {
        let q = model.tree_degree("class_partition")?;
        if half_radius > radius {
            return Err(Error::InvalidInput(format!(
                "class half-radius {half_radius} exceeds the sphere index {radius}"
            )));
        }
        Ok(ClassPartition {
            model,
            radius,
            half_radius,
            class_count: sphere_size(radius - half_radius, q)?,
        })
    }

    /// Length of the shared prefix that identifies a class.
    pub fn prefix_len(&self) -> usize {
        (self.radius + 1 - self.half_radius) as usize
    }

    /// Class prefixes in lexicographic order; class `i` is the `i`-th.
    pub fn prefixes(&self) -> SphereWords<'a> {
        SphereWords::new(self.model, self.prefix_len())
    }

    /// Index of the class of boundary word `z`.
    pub fn class_of(&self, z: &Word) -> usize {
        lexicographic_rank(self.model, &z.letters()[..self.prefix_len()])
    }

    /// All boundary words in the class with prefix `prefix`.
    pub fn members(&self, prefix: &Word) -> Vec<Word> {
        let tail = self.half_radius as usize;
        if tail == 0 {
            return vec![prefix.clone()];
        }
        let model = self.model;
        let last = prefix.last();
        // Tails of length `tail` whose first letter does not cancel `last`.
        SphereWords::new(model, tail)
            .filter(|t| Some(model.inverse_of(t.letters()[0])) != last)
            .map(|t| {
                let mut letters = prefix.letters().to_vec();
                letters.extend_from_slice(t.letters());
                Word::from_reduced(&letters)
            })
            .collect()
    }

    /// The union of the listed classes.
    pub fn union(&self, classes: &[usize]) -> Vec<Word> {
        let wanted: FxHashSet<usize> = classes.iter().copied().collect();
        self.prefixes()
            .enumerate()
            .filter(|(i, _)| wanted.contains(i))
            .flat_map(|(_, p)| self.members(&p))
            .collect()
    }
}

/// Position of a reduced word among the reduced words of its length in
/// the order produced by [`SphereWords`].
pub fn lexicographic_rank(model: &GroupModel, letters: &[GeneratorId]) -> usize {
    let branching = model.degree() - 1;
    let len = letters.len();
    let mut rank = 0usize;
    for (i, &s) in letters.iter().enumerate() {
        let banned = (i > 0).then(|| model.inverse_of(letters[i - 1]));
        let smaller = (0..s).filter(|&t| Some(t) != banned).count();
        rank += smaller * branching.pow((len - 1 - i) as u32);
    }
    rank
}

/// Output of [`mouse_select`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MouseResult {
    /// `z_A = m_{R+1}`, in canonical word form.
    pub z_a: String,
    /// `m_0, ..., m_{R+1}`.
    pub path: Vec<String>,
    /// `#T_j = #(B(m_j, R+1-j) ∩ A)` for `j = 0..=R+1`.
    pub t_counts: Vec<u64>,
    pub a_size: u64,
}

/// Runs the Mouse algorithm on `A ⊊ ∂B(radius)`.
///
/// Among children with the fewest points of `A` in their subtree, the one
/// reached by the smallest generator id is chosen.
pub fn mouse_select(model: &GroupModel, a: &[GroupElement], radius: u64) -> Result<(Word, MouseResult)> {
    let q = model.tree_degree("mouse_select")?;
    let len = radius as usize + 1;
    let mut points: Vec<&Word> = Vec::with_capacity(a.len());
    let mut seen: FxHashSet<&Word> = FxHashSet::default();
    for x in a {
        model.validate(x)?;
        let w = x.as_word().expect("tree elements are words");
        if w.len() != len {
            return Err(Error::InvalidInput(format!(
                "{} is not on the sphere of word radius {len}",
                model.format(x)
            )));
        }
        if seen.insert(w) {
            points.push(w);
        }
    }
    if points.len() as u128 >= sphere_size(radius, q)? {
        return Err(Error::InvalidInput(
            "A covers the whole boundary, so no secure place exists".to_string(),
        ));
    }

    let a_size = points.len() as u64;
    let mut letters: Vec<GeneratorId> = Vec::with_capacity(len);
    let mut path = vec![model.format(&model.identity())];
    let mut t_counts = vec![a_size];
    let mut subtree = points;
    for depth in 0..len {
        let banned = letters.last().map(|&s| model.inverse_of(s));
        let mut counts = vec![0u64; model.degree()];
        for w in &subtree {
            counts[w.letters()[depth] as usize] += 1;
        }
        let choice = (0..model.degree() as GeneratorId)
            .filter(|&s| Some(s) != banned)
            .min_by_key(|&s| (counts[s as usize], s))
            .expect("a tree vertex has a child");
        letters.push(choice);
        subtree.retain(|w| w.letters()[depth] == choice);
        t_counts.push(subtree.len() as u64);
        path.push(model.format(&GroupElement::Word(Word::from_reduced(&letters))));
    }
    let z = Word::from_reduced(&letters);
    Ok((
        z.clone(),
        MouseResult {
            z_a: model.format(&GroupElement::Word(z)),
            path,
            t_counts,
            a_size,
        },
    ))
}

/// Which of the Mouse invariants fail for one input.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MouseCheck {
    pub z_a_in_a: bool,
    /// Indices `j` with `#T_j (q-1)^j > #A`.
    pub decay_violations: Vec<usize>,
    /// Whether some `T_j` differs from `B(z_A, 2(R+1-j)) ∩ A`.
    pub t_mismatch: bool,
    /// Set only when `A` is a union of classes: `d(z_A, A) <= 2r`.
    pub too_close: bool,
}

impl MouseCheck {
    pub fn passed(&self) -> bool {
        !self.z_a_in_a && self.decay_violations.is_empty() && !self.t_mismatch && !self.too_close
    }
}

/// Runs the Mouse algorithm and checks its invariants. Pass `half_radius`
/// when `A` is a union of classes of that half-radius.
pub fn check_mouse(model: &GroupModel, a: &[Word], radius: u64, half_radius: Option<u64>) -> Result<MouseCheck> {
    let q = model.tree_degree("mouse_select")? as u128;
    let elems: Vec<GroupElement> = a.iter().cloned().map(GroupElement::Word).collect();
    let (z, result) = mouse_select(model, &elems, radius)?;
    let mut check = MouseCheck {
        z_a_in_a: a.contains(&z),
        ..MouseCheck::default()
    };
    for (j, &t) in result.t_counts.iter().enumerate() {
        if (t as u128) * (q - 1).pow(j as u32) > result.a_size as u128 {
            check.decay_violations.push(j);
        }
        let ball = 2 * (radius as usize + 1 - j);
        let near = a.iter().filter(|w| z.len() + w.len() - 2 * z.common_prefix_len(w) <= ball).count();
        if near as u64 != t {
            check.t_mismatch = true;
        }
    }
    if let Some(r) = half_radius {
        let min_distance = a
            .iter()
            .map(|w| z.len() + w.len() - 2 * z.common_prefix_len(w))
            .min()
            .unwrap_or(usize::MAX);
        check.too_close = min_distance as u64 <= 2 * r;
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(q: u8) -> GroupModel {
        GroupModel::tree(q).unwrap()
    }

    fn elems(model: &GroupModel, words: &[&str]) -> Vec<GroupElement> {
        words.iter().map(|w| model.parse(w).unwrap()).collect()
    }

    #[test]
    fn mouse_examples() {
        let m = t(3);
        let (_, r) = mouse_select(&m, &elems(&m, &["a", "b"]), 0).unwrap();
        assert_eq!(r.z_a, "c");
        assert_eq!(r.path, ["e", "c"]);
        assert_eq!(r.t_counts, [2, 0]);
        let (_, r) = mouse_select(&m, &elems(&m, &["ab", "ac", "ba", "bc"]), 1).unwrap();
        assert_eq!(r.z_a, "ca");
        assert_eq!(r.t_counts, [4, 0, 0]);
    }

    #[test]
    fn mouse_rejects_full_sphere_and_bad_points() {
        let m = t(3);
        assert!(matches!(
            mouse_select(&m, &elems(&m, &["a", "b", "c"]), 0),
            Err(Error::InvalidInput(_))
        ));
        assert!(mouse_select(&m, &elems(&m, &["ab"]), 0).is_err());
        // duplicates do not count twice
        let (_, r) = mouse_select(&m, &elems(&m, &["a", "a", "b"]), 0).unwrap();
        assert_eq!(r.a_size, 2);
        assert!(mouse_select(&GroupModel::lamplighter(), &[], 0).is_err());
    }

    #[test]
    fn empty_set_takes_the_smallest_path() {
        let m = t(4);
        let (_, r) = mouse_select(&m, &[], 2).unwrap();
        assert_eq!(r.z_a, "aaa");
    }

    #[test]
    fn class_partition_matches_distance_definition() {
        for q in [3u8, 4] {
            let m = t(q);
            for radius in 0..=3u64 {
                let sphere: Vec<Word> = SphereWords::new(&m, radius as usize + 1).collect();
                for r in 0..=radius {
                    let p = ClassPartition::new(&m, radius, r).unwrap();
                    let prefixes: Vec<Word> = p.prefixes().collect();
                    assert_eq!(prefixes.len() as u128, p.class_count);
                    let mut covered = 0;
                    for (i, prefix) in prefixes.iter().enumerate() {
                        let members = p.members(prefix);
                        covered += members.len();
                        for z in &members {
                            assert_eq!(p.class_of(z), i);
                            // [z] is the set of boundary points within 2r of z
                            let ball: Vec<&Word> = sphere
                                .iter()
                                .filter(|w| z.len() + w.len() - 2 * z.common_prefix_len(w) <= 2 * r as usize)
                                .collect();
                            assert_eq!(ball.len(), members.len());
                            assert!(ball.iter().all(|w| members.contains(w)));
                        }
                    }
                    assert_eq!(covered, sphere.len());
                }
            }
        }
    }

    #[test]
    fn one_class_removed_is_found() {
        for q in [3u8, 4] {
            let m = t(q);
            for radius in 0..=3u64 {
                for r in 0..=radius {
                    let p = ClassPartition::new(&m, radius, r).unwrap();
                    let all: Vec<usize> = (0..p.class_count as usize).collect();
                    for missing in 0..p.class_count as usize {
                        let keep: Vec<usize> = all.iter().copied().filter(|&c| c != missing).collect();
                        let a = p.union(&keep);
                        let elems: Vec<GroupElement> = a.into_iter().map(GroupElement::Word).collect();
                        let (z, _) = mouse_select(&m, &elems, radius).unwrap();
                        assert_eq!(p.class_of(&z), missing);
                    }
                }
            }
        }
    }

    #[test]
    fn rank_agrees_with_enumeration() {
        let m = t(4);
        for (i, w) in SphereWords::new(&m, 3).enumerate() {
            assert_eq!(lexicographic_rank(&m, w.letters()), i);
        }
    }

    #[test]
    fn check_mouse_flags_nothing_on_valid_input() {
        let m = t(3);
        let p = ClassPartition::new(&m, 2, 1).unwrap();
        let a = p.union(&[0, 2, 3]);
        let check = check_mouse(&m, &a, 2, Some(1)).unwrap();
        assert!(check.passed(), "{check:?}");
    }
}
