//! Group presentations, reduced-word arithmetic and Cayley-graph neighbourhoods.
//!
//! Three tree presentations are supported, all with the homogeneous tree
//! `T_q` as Cayley graph: the free group `F_k` (`q = 2k`), the free product
//! of `F_{(q-1)/2}` with one `Z2` factor, and the free product of `q` copies
//! of `Z2`. The lamplighter group `Z wr Z2` is the non-tree model; its
//! elements are stored as a cursor plus the sorted set of lit lamps.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type GeneratorId = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub id: GeneratorId,
    /// The generator is its own inverse.
    pub involution: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKind {
    /// `F_rank`; `q = 2 * rank`.
    FreeGroup { rank: u8 },
    /// `F_{(q-1)/2} * Z2` with `q` odd.
    FreeProduct { q: u8 },
    /// `Z2 * ... * Z2` with `q` factors.
    InvolutionProduct { q: u8 },
    /// `Z wr Z2` with generators walk right, walk left, toggle.
    Lamplighter,
}

impl GroupKind {
    pub fn label(&self) -> &'static str {
        match self {
            GroupKind::FreeGroup { .. } => "free",
            GroupKind::FreeProduct { .. } => "free-product",
            GroupKind::InvolutionProduct { .. } => "involutions",
            GroupKind::Lamplighter => "lamplighter",
        }
    }
}

/// Canonical reduced word over a tree presentation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(SmallVec<[GeneratorId; 24]>);

impl Word {
    pub fn identity() -> Self {
        Word(SmallVec::new())
    }

    pub fn letters(&self) -> &[GeneratorId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<GeneratorId> {
        self.0.last().copied()
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(SmallVec::from_slice(&self.0[..len.min(self.0.len())]))
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub(crate) fn push(&mut self, letter: GeneratorId) {
        self.0.push(letter);
    }

    pub(crate) fn pop(&mut self) -> Option<GeneratorId> {
        self.0.pop()
    }

    /// Wraps letters that are already known to be reduced.
    pub(crate) fn from_reduced(letters: &[GeneratorId]) -> Self {
        Word(SmallVec::from_slice(letters))
    }
}

/// Element of `Z wr Z2`: lamp-lighter position plus the finite set of lit lamps.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampState {
    cursor: i64,
    /// Sorted, without duplicates.
    lamps: Vec<i64>,
}

impl LampState {
    pub fn new(cursor: i64, mut lamps: Vec<i64>) -> Result<Self> {
        lamps.sort_unstable();
        let before = lamps.len();
        lamps.dedup();
        if lamps.len() != before {
            return Err(Error::InvalidInput(
                "lamp positions must be distinct".to_string(),
            ));
        }
        Ok(LampState { cursor, lamps })
    }

    pub fn cursor(&self) -> i64 {
        self.cursor
    }

    pub fn lamps(&self) -> &[i64] {
        &self.lamps
    }

    pub fn is_lit(&self, position: i64) -> bool {
        self.lamps.binary_search(&position).is_ok()
    }

    pub(crate) fn toggle_at_cursor(&mut self) {
        match self.lamps.binary_search(&self.cursor) {
            Ok(idx) => {
                self.lamps.remove(idx);
            }
            Err(idx) => self.lamps.insert(idx, self.cursor),
        }
    }

    pub(crate) fn shift_cursor(&mut self, by: i64) {
        self.cursor += by;
    }

    fn product(&self, other: &LampState) -> LampState {
        let mut lamps = self.lamps.clone();
        for &p in &other.lamps {
            let at = p + self.cursor;
            match lamps.binary_search(&at) {
                Ok(idx) => {
                    lamps.remove(idx);
                }
                Err(idx) => lamps.insert(idx, at),
            }
        }
        LampState {
            cursor: self.cursor + other.cursor,
            lamps,
        }
    }

    fn inverse(&self) -> LampState {
        LampState {
            cursor: -self.cursor,
            lamps: self.lamps.iter().map(|p| p - self.cursor).collect(),
        }
    }

    /// Word length for the generating set {walk right, walk left, toggle}:
    /// one toggle per lit lamp plus the shortest tour from 0 that visits every
    /// lit lamp and ends at the cursor.
    fn word_length(&self) -> u64 {
        let (mut lo, mut hi) = (0i64.min(self.cursor), 0i64.max(self.cursor));
        if let (Some(&first), Some(&last)) = (self.lamps.first(), self.lamps.last()) {
            lo = lo.min(first);
            hi = hi.max(last);
        }
        let c = self.cursor;
        let left_first = (0 - lo) + (hi - lo) + (hi - c);
        let right_first = hi + (hi - lo) + (c - lo);
        self.lamps.len() as u64 + left_first.min(right_first) as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Word(Word),
    Lamp(LampState),
}

impl GroupElement {
    pub fn as_word(&self) -> Option<&Word> {
        match self {
            GroupElement::Word(w) => Some(w),
            GroupElement::Lamp(_) => None,
        }
    }

    pub fn as_lamp(&self) -> Option<&LampState> {
        match self {
            GroupElement::Lamp(l) => Some(l),
            GroupElement::Word(_) => None,
        }
    }
}

impl From<Word> for GroupElement {
    fn from(w: Word) -> Self {
        GroupElement::Word(w)
    }
}

impl From<LampState> for GroupElement {
    fn from(l: LampState) -> Self {
        GroupElement::Lamp(l)
    }
}

pub const WALK_RIGHT: GeneratorId = 0;
pub const WALK_LEFT: GeneratorId = 1;
pub const TOGGLE: GeneratorId = 2;

/// A group presentation with a finite symmetric generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupModel {
    kind: GroupKind,
    generators: Vec<Generator>,
    inverses: Vec<GeneratorId>,
    symbols: Vec<char>,
}

// `e` is reserved for the identity.
const LOWER: &[u8] = b"abcdfghijklmnopqrstuvwxyz";

impl GroupModel {
    /// Free group of the given rank; Cayley graph `T_{2 rank}`.
    pub fn free_group(rank: u8) -> Result<Self> {
        if rank < 2 {
            return Err(Error::InvalidInput(format!(
                "free group rank {rank} gives a tree of degree < 3"
            )));
        }
        Self::tree_presentation(GroupKind::FreeGroup { rank }, 0, rank)
    }

    /// `F_{(q-1)/2} * Z2`: one involution followed by `(q-1)/2` free pairs.
    pub fn free_product(q: u8) -> Result<Self> {
        if q < 3 || q.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "free product with Z2 needs odd q >= 3, got {q}"
            )));
        }
        Self::tree_presentation(GroupKind::FreeProduct { q }, 1, (q - 1) / 2)
    }

    /// Free product of `q` copies of `Z2`.
    pub fn involution_product(q: u8) -> Result<Self> {
        if q < 3 {
            return Err(Error::InvalidInput(format!(
                "tree degree must be >= 3, got {q}"
            )));
        }
        Self::tree_presentation(GroupKind::InvolutionProduct { q }, q, 0)
    }

    /// Default presentation of `T_q`: `F_{q/2}` for even `q`, `q` involutions for odd `q`.
    pub fn tree(q: u8) -> Result<Self> {
        if q < 3 {
            return Err(Error::InvalidInput(format!(
                "tree degree must be >= 3, got {q}"
            )));
        }
        if q.is_multiple_of(2) {
            Self::free_group(q / 2)
        } else {
            Self::involution_product(q)
        }
    }

    pub fn lamplighter() -> Self {
        GroupModel {
            kind: GroupKind::Lamplighter,
            generators: vec![
                Generator { id: WALK_RIGHT, involution: false },
                Generator { id: WALK_LEFT, involution: false },
                Generator { id: TOGGLE, involution: true },
            ],
            inverses: vec![WALK_LEFT, WALK_RIGHT, TOGGLE],
            symbols: vec!['t', 'T', 'a'],
        }
    }

    pub fn from_kind(kind: GroupKind) -> Result<Self> {
        match kind {
            GroupKind::FreeGroup { rank } => Self::free_group(rank),
            GroupKind::FreeProduct { q } => Self::free_product(q),
            GroupKind::InvolutionProduct { q } => Self::involution_product(q),
            GroupKind::Lamplighter => Ok(Self::lamplighter()),
        }
    }

    fn tree_presentation(kind: GroupKind, involutions: u8, pairs: u8) -> Result<Self> {
        let q = involutions as usize + 2 * pairs as usize;
        if involutions as usize + pairs as usize > LOWER.len() {
            return Err(Error::InvalidInput(format!("degree {q} is too large")));
        }
        let mut generators = Vec::with_capacity(q);
        let mut inverses = Vec::with_capacity(q);
        let mut symbols = Vec::with_capacity(q);
        for i in 0..involutions {
            generators.push(Generator { id: i, involution: true });
            inverses.push(i);
            symbols.push(LOWER[i as usize] as char);
        }
        for p in 0..pairs {
            let id = involutions + 2 * p;
            let letter = LOWER[(involutions + p) as usize] as char;
            generators.push(Generator { id, involution: false });
            generators.push(Generator { id: id + 1, involution: false });
            inverses.push(id + 1);
            inverses.push(id);
            symbols.push(letter);
            symbols.push(letter.to_ascii_uppercase());
        }
        Ok(GroupModel { kind, generators, inverses, symbols })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Degree of the Cayley graph, `#S`.
    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    /// True exactly when the Cayley graph is the homogeneous tree.
    pub fn exact_formulas(&self) -> bool {
        !matches!(self.kind, GroupKind::Lamplighter)
    }

    /// Tree degree `q`, or an unsupported-operation error on non-tree models.
    pub fn tree_degree(&self, op: &'static str) -> Result<u32> {
        if self.exact_formulas() {
            Ok(self.degree() as u32)
        } else {
            Err(self.unsupported(op))
        }
    }

    pub(crate) fn unsupported(&self, op: &'static str) -> Error {
        Error::Unsupported {
            model: self.to_string(),
            op,
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn inverse_of(&self, s: GeneratorId) -> GeneratorId {
        self.inverses[s as usize]
    }

    pub fn symbol(&self, s: GeneratorId) -> char {
        self.symbols[s as usize]
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::Lamplighter => GroupElement::Lamp(LampState::default()),
            _ => GroupElement::Word(Word::identity()),
        }
    }

    /// The element represented by a single generator.
    pub fn generator_element(&self, s: GeneratorId) -> GroupElement {
        let mut x = self.identity();
        self.push_generator(&mut x, s);
        x
    }

    /// Canonical form of a raw generator sequence.
    pub fn reduce(&self, letters: &[GeneratorId]) -> Result<GroupElement> {
        if let Some(&bad) = letters.iter().find(|&&s| s as usize >= self.degree()) {
            return Err(Error::InvalidInput(format!(
                "generator id {bad} is not in the generating set of {self}"
            )));
        }
        let mut x = self.identity();
        for &s in letters {
            self.push_generator(&mut x, s);
        }
        Ok(x)
    }

    /// `x <- x s` in place. Hot path of every walk.
    #[inline]
    pub fn push_generator(&self, x: &mut GroupElement, s: GeneratorId) {
        match x {
            GroupElement::Word(w) => {
                if w.last() == Some(self.inverses[s as usize]) {
                    w.pop();
                } else {
                    w.push(s);
                }
            }
            GroupElement::Lamp(l) => match s {
                WALK_RIGHT => l.shift_cursor(1),
                WALK_LEFT => l.shift_cursor(-1),
                _ => l.toggle_at_cursor(),
            },
        }
    }

    /// Checks that `x` is a canonical element of this model.
    pub fn validate(&self, x: &GroupElement) -> Result<()> {
        match (x, self.exact_formulas()) {
            (GroupElement::Word(w), true) => {
                let letters = w.letters();
                if let Some(&bad) = letters.iter().find(|&&s| s as usize >= self.degree()) {
                    return Err(Error::InvalidInput(format!(
                        "generator id {bad} is not in the generating set of {self}"
                    )));
                }
                if letters
                    .windows(2)
                    .any(|pair| pair[1] == self.inverse_of(pair[0]))
                {
                    return Err(Error::InvalidInput("word is not reduced".to_string()));
                }
                Ok(())
            }
            (GroupElement::Lamp(_), false) => Ok(()),
            _ => Err(Error::InvalidInput(format!(
                "element does not belong to {self}"
            ))),
        }
    }

    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(match (x, y) {
            (GroupElement::Word(_), GroupElement::Word(wy)) => {
                let mut out = x.clone();
                for &s in wy.letters() {
                    self.push_generator(&mut out, s);
                }
                out
            }
            (GroupElement::Lamp(lx), GroupElement::Lamp(ly)) => GroupElement::Lamp(lx.product(ly)),
            _ => unreachable!("validate rejects mixed element kinds"),
        })
    }

    /// Group inverse. Panics if a word uses letters outside this model.
    pub fn inverse(&self, x: &GroupElement) -> GroupElement {
        match x {
            GroupElement::Word(w) => GroupElement::Word(Word(
                w.letters()
                    .iter()
                    .rev()
                    .map(|&s| self.inverse_of(s))
                    .collect(),
            )),
            GroupElement::Lamp(l) => GroupElement::Lamp(l.inverse()),
        }
    }

    /// `x s` for every `s` in `S`, in generator order.
    pub fn neighbors(&self, x: &GroupElement) -> Vec<GroupElement> {
        self.generators
            .iter()
            .map(|g| {
                let mut y = x.clone();
                self.push_generator(&mut y, g.id);
                y
            })
            .collect()
    }

    /// Word length `|x|`.
    pub fn word_length(&self, x: &GroupElement) -> u64 {
        match x {
            GroupElement::Word(w) => w.len() as u64,
            GroupElement::Lamp(l) => l.word_length(),
        }
    }

    /// Word distance `|x^-1 y|`.
    pub fn word_distance(&self, x: &GroupElement, y: &GroupElement) -> Result<u64> {
        if let (GroupElement::Word(wx), GroupElement::Word(wy)) = (x, y) {
            self.validate(x)?;
            self.validate(y)?;
            let common = wx.common_prefix_len(wy);
            return Ok((wx.len() + wy.len() - 2 * common) as u64);
        }
        let diff = self.multiply(&self.inverse(x), y)?;
        Ok(self.word_length(&diff))
    }

    /// Parses `e`, a string of generator symbols (upper case is the inverse of
    /// a free letter, `x⁻¹` and `x^-1` are accepted as well), or for the
    /// lamplighter any string over `t`, `T`, `a` or a state `(cursor;{lamps})`
    /// as produced by [`GroupModel::format`].
    pub fn parse(&self, text: &str) -> Result<GroupElement> {
        let text = text.trim();
        if text.is_empty() || text == "e" {
            return Ok(self.identity());
        }
        if self.kind == GroupKind::Lamplighter && text.starts_with('(') {
            return parse_lamp_state(text).map(GroupElement::Lamp);
        }
        let chars: Vec<char> = text.chars().collect();
        let mut letters = Vec::with_capacity(chars.len());
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let s = self
                .symbols
                .iter()
                .position(|&sym| sym == c)
                .ok_or_else(|| {
                    Error::InvalidInput(format!("unknown generator symbol '{c}' for {self}"))
                })? as GeneratorId;
            i += 1;
            let rest: String = chars[i..].iter().take(3).collect();
            let inverted = if rest.starts_with("⁻¹") {
                i += 2;
                true
            } else if rest.starts_with("^-1") {
                i += 3;
                true
            } else {
                false
            };
            letters.push(if inverted { self.inverse_of(s) } else { s });
        }
        self.reduce(&letters)
    }

    pub fn format(&self, x: &GroupElement) -> String {
        match x {
            GroupElement::Word(w) if w.is_empty() => "e".to_string(),
            GroupElement::Word(w) => w.letters().iter().map(|&s| self.symbol(s)).collect(),
            GroupElement::Lamp(l) => {
                let lamps: Vec<String> = l.lamps.iter().map(|p| p.to_string()).collect();
                format!("({};{{{}}})", l.cursor, lamps.join(","))
            }
        }
    }
}

fn parse_lamp_state(text: &str) -> Result<LampState> {
    let bad = || Error::InvalidInput(format!("expected a lamplighter state `(cursor;{{lamps}})`, got `{text}`"));
    let inner = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
    let (cursor, lamps) = inner.split_once(';').ok_or_else(bad)?;
    let cursor: i64 = cursor.trim().parse().map_err(|_| bad())?;
    let lamps = lamps.trim().strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(bad)?;
    let lamps = lamps
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<i64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    LampState::new(cursor, lamps)
}

/// Breadth-first layers of the Cayley graph around `e`: `layers[r]` holds
/// the word sphere of radius `r`, discovered through `neighbors` only.
pub fn breadth_first_layers(model: &GroupModel, depth: usize) -> Vec<Vec<GroupElement>> {
    let mut seen: HashSet<GroupElement> = HashSet::new();
    seen.insert(model.identity());
    let mut layers = vec![vec![model.identity()]];
    for _ in 0..depth {
        let mut next = Vec::new();
        for x in layers.last().expect("non-empty") {
            for y in model.neighbors(x) {
                if seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        layers.push(next);
    }
    layers
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::FreeGroup { rank } => write!(f, "F_{rank} (T_{})", 2 * rank),
            GroupKind::FreeProduct { q } => write!(f, "F_{} * Z2 (T_{q})", (q - 1) / 2),
            GroupKind::InvolutionProduct { q } => write!(f, "Z2^*{q} (T_{q})"),
            GroupKind::Lamplighter => write!(f, "Z wr Z2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3() -> GroupModel {
        GroupModel::tree(3).unwrap()
    }

    fn f2() -> GroupModel {
        GroupModel::free_group(2).unwrap()
    }

    fn w(model: &GroupModel, s: &str) -> GroupElement {
        model.parse(s).unwrap()
    }

    #[test]
    fn reduce_cancels_inverse_pairs() {
        let f2 = f2();
        // a = 0, A = 1, b = 2, B = 3
        assert_eq!(f2.reduce(&[0, 1]).unwrap(), f2.identity());
        assert_eq!(f2.reduce(&[0, 2, 3, 0]).unwrap(), w(&f2, "aa"));
        assert_eq!(t3().reduce(&[0, 0]).unwrap(), t3().identity());
    }

    #[test]
    fn reduce_rejects_unknown_generator() {
        assert!(matches!(t3().reduce(&[0, 3]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn multiply_examples() {
        let f2 = f2();
        let x = w(&f2, "ab");
        assert_eq!(f2.multiply(&f2.identity(), &x).unwrap(), x);
        assert_eq!(f2.multiply(&x, &w(&f2, "Ba")).unwrap(), w(&f2, "aa"));
        let t3 = t3();
        assert_eq!(t3.multiply(&w(&t3, "ab"), &w(&t3, "b")).unwrap(), w(&t3, "a"));
    }

    #[test]
    fn multiply_rejects_model_mismatch() {
        let f2 = f2();
        let lamp = GroupModel::lamplighter();
        assert!(f2.multiply(&f2.identity(), &lamp.identity()).is_err());
        // `c` does not exist in F_2's four letters a A b B.
        let t5 = GroupModel::tree(5).unwrap();
        let foreign = w(&t5, "e");
        assert!(f2.multiply(&foreign, &t5.generator_element(4)).is_err());
    }

    #[test]
    fn inverse_examples() {
        let f2 = f2();
        assert_eq!(f2.inverse(&f2.identity()), f2.identity());
        assert_eq!(f2.inverse(&w(&f2, "ab")), w(&f2, "BA"));
        assert_eq!(f2.format(&f2.inverse(&w(&f2, "ab"))), "BA");
        let t3 = t3();
        assert_eq!(t3.inverse(&w(&t3, "abc")), w(&t3, "cba"));
    }

    #[test]
    fn neighbors_examples() {
        let t3 = t3();
        let around_e: Vec<String> = t3.neighbors(&t3.identity()).iter().map(|x| t3.format(x)).collect();
        assert_eq!(around_e, ["a", "b", "c"]);
        let around_a: Vec<String> = t3.neighbors(&w(&t3, "a")).iter().map(|x| t3.format(x)).collect();
        assert_eq!(around_a, ["e", "ab", "ac"]);
        let f2 = f2();
        assert_eq!(f2.neighbors(&w(&f2, "abA")).len(), 4);
    }

    #[test]
    fn tree_neighbors_have_one_parent() {
        let t4 = GroupModel::tree(4).unwrap();
        let x = w(&t4, "abAb");
        let shorter = t4
            .neighbors(&x)
            .iter()
            .filter(|y| t4.word_length(y) + 1 == t4.word_length(&x))
            .count();
        assert_eq!(shorter, 1);
    }

    #[test]
    fn parse_accepts_inverse_notations() {
        let f2 = f2();
        assert_eq!(w(&f2, "ab⁻¹"), w(&f2, "aB"));
        assert_eq!(w(&f2, "a^-1b"), w(&f2, "Ab"));
        assert!(f2.parse("z").is_err());
    }

    #[test]
    fn parse_accepts_lamp_states() {
        let g = GroupModel::lamplighter();
        let x = g.parse("taTTaT").unwrap();
        assert_eq!(g.format(&x), "(-2;{-1,1})");
        assert_eq!(g.parse("(-2;{1,-1})").unwrap(), x);
        assert_eq!(g.parse("(0;{})").unwrap(), g.identity());
        assert!(g.parse("(0;{1,1})").is_err());
        assert!(g.parse("(0;1)").is_err());
        assert!(t3().parse("(0;{})").is_err());
    }

    #[test]
    fn odd_free_product_has_one_involution() {
        let g = GroupModel::free_product(5).unwrap();
        let inv: Vec<bool> = g.generators().iter().map(|s| s.involution).collect();
        assert_eq!(inv, [true, false, false, false, false]);
        assert_eq!(g.format(&g.generator_element(2)), "B");
        assert!(GroupModel::free_product(4).is_err());
        assert!(GroupModel::tree(2).is_err());
    }

    #[test]
    fn lamplighter_arithmetic() {
        let g = GroupModel::lamplighter();
        // t a T : lamp at 1 lit, cursor back at 0
        let x = w(&g, "taT");
        let lamp = x.as_lamp().unwrap();
        assert_eq!(lamp.cursor(), 0);
        assert_eq!(lamp.lamps(), &[1]);
        assert_eq!(g.word_length(&x), 3);
        assert_eq!(g.multiply(&x, &g.inverse(&x)).unwrap(), g.identity());
        assert_eq!(g.word_length(&w(&g, "a")), 1);
        assert_eq!(g.word_length(&w(&g, "aa")), 0);
        // lamps at -1 and 1, cursor at -2: right first, then all the way left
        assert_eq!(g.word_length(&w(&g, "taTTaT")), 1 + 1 + 2 + 1 + 1);
    }

    #[test]
    fn lamplighter_word_length_matches_bfs() {
        use std::collections::{HashMap, VecDeque};
        let g = GroupModel::lamplighter();
        let mut dist: HashMap<GroupElement, u64> = HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(g.identity(), 0);
        queue.push_back(g.identity());
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            if d == 7 {
                continue;
            }
            for y in g.neighbors(&x) {
                if !dist.contains_key(&y) {
                    dist.insert(y.clone(), d + 1);
                    queue.push_back(y);
                }
            }
        }
        for (x, d) in &dist {
            assert_eq!(g.word_length(x), *d, "{}", g.format(x));
        }
    }
}
