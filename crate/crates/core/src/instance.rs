//! Set cover instances, covers, the text file format and synthetic families.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::randomness::{Label, RandomTape, Tag};
use crate::scalar::Scalar;

pub type SetId = u32;
pub type ElementId = u32;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("inconsistent instance: {0}")]
    Consistency(String),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Bipartite set/element incidence structure.
///
/// Immutable once built; `delta` and `freq` are always recomputed from the
/// adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverInstance {
    set_members: Vec<Vec<ElementId>>,
    element_sets: Vec<Vec<SetId>>,
    delta: usize,
    freq: usize,
}

impl SetCoverInstance {
    /// Builds an instance from per-set member lists, keeping the given order.
    pub fn from_sets(num_elements: usize, set_members: Vec<Vec<ElementId>>) -> Result<Self, InstanceError> {
        if set_members.is_empty() {
            return Err(InstanceError::Consistency("instance has no sets".into()));
        }
        if num_elements == 0 {
            return Err(InstanceError::Consistency("instance has no elements".into()));
        }
        let mut element_sets: Vec<Vec<SetId>> = vec![Vec::new(); num_elements];
        for (s, members) in set_members.iter().enumerate() {
            for &e in members {
                let slot = element_sets.get_mut(e as usize).ok_or_else(|| {
                    InstanceError::Consistency(format!("set {s} lists element {e}, but there are only {num_elements} elements"))
                })?;
                if slot.last() == Some(&(s as SetId)) {
                    return Err(InstanceError::Consistency(format!("set {s} lists element {e} twice")));
                }
                slot.push(s as SetId);
            }
        }
        if let Some(e) = element_sets.iter().position(|sets| sets.is_empty()) {
            return Err(InstanceError::Consistency(format!("element {e} is not contained in any set")));
        }
        let delta = set_members.iter().map(Vec::len).max().unwrap_or(0);
        let freq = element_sets.iter().map(Vec::len).max().unwrap_or(0);
        Ok(SetCoverInstance { set_members, element_sets, delta, freq })
    }

    pub fn num_sets(&self) -> usize {
        self.set_members.len()
    }

    pub fn num_elements(&self) -> usize {
        self.element_sets.len()
    }

    /// Maximum set size.
    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Maximum element frequency.
    pub fn freq(&self) -> usize {
        self.freq
    }

    pub fn members(&self, s: SetId) -> &[ElementId] {
        &self.set_members[s as usize]
    }

    pub fn sets_of(&self, e: ElementId) -> &[SetId] {
        &self.element_sets[e as usize]
    }

    pub fn num_edges(&self) -> usize {
        self.set_members.iter().map(Vec::len).sum()
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "setcover {} {}", self.num_sets(), self.num_elements()).unwrap();
        for (s, members) in self.set_members.iter().enumerate() {
            write!(out, "set {s}").unwrap();
            for e in members {
                write!(out, " {e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format. Sets without a `set` line are empty.
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut header: Option<(usize, usize)> = None;
        let mut sets: Vec<Option<Vec<ElementId>>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let keyword = tokens.next().unwrap_or_default();
            let parse_err = |message: String| InstanceError::Parse { line: line_no, message };
            let number = |tok: Option<&str>, what: &str| -> Result<u64, InstanceError> {
                let tok = tok.ok_or_else(|| parse_err(format!("missing {what}")))?;
                tok.parse::<u64>().map_err(|_| parse_err(format!("invalid {what} `{tok}`")))
            };
            match keyword {
                "setcover" => {
                    if header.is_some() {
                        return Err(parse_err("duplicate header".into()));
                    }
                    let m = number(tokens.next(), "set count")? as usize;
                    let n = number(tokens.next(), "element count")? as usize;
                    if tokens.next().is_some() {
                        return Err(parse_err("trailing tokens after header".into()));
                    }
                    header = Some((m, n));
                    sets = vec![None; m];
                }
                "set" => {
                    let (m, _) = header.ok_or_else(|| parse_err("`set` line before header".into()))?;
                    let s = number(tokens.next(), "set id")? as usize;
                    if s >= m {
                        return Err(InstanceError::Consistency(format!("line {line_no}: set id {s} out of range (num_sets = {m})")));
                    }
                    if sets[s].is_some() {
                        return Err(parse_err(format!("set {s} defined twice")));
                    }
                    let members = tokens
                        .map(|t| t.parse::<ElementId>().map_err(|_| parse_err(format!("invalid element id `{t}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    sets[s] = Some(members);
                }
                other => return Err(parse_err(format!("unknown keyword `{other}`"))),
            }
        }
        let (_, n) = header.ok_or(InstanceError::Parse { line: 0, message: "missing `setcover` header".into() })?;
        Self::from_sets(n, sets.into_iter().map(Option::unwrap_or_default).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| InstanceError::Io { path: path.display().to_string(), source })
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<SetCoverInstance, InstanceError> {
    SetCoverInstance::load(path)
}

/// Selected-set predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralCover {
    chosen: Vec<bool>,
}

impl IntegralCover {
    pub fn empty(num_sets: usize) -> Self {
        IntegralCover { chosen: vec![false; num_sets] }
    }

    pub fn full(num_sets: usize) -> Self {
        IntegralCover { chosen: vec![true; num_sets] }
    }

    pub fn from_flags(chosen: Vec<bool>) -> Self {
        IntegralCover { chosen }
    }

    pub fn from_ids(num_sets: usize, ids: impl IntoIterator<Item = SetId>) -> Self {
        let mut cover = Self::empty(num_sets);
        for s in ids {
            cover.insert(s);
        }
        cover
    }

    pub fn insert(&mut self, s: SetId) {
        self.chosen[s as usize] = true;
    }

    pub fn contains(&self, s: SetId) -> bool {
        self.chosen[s as usize]
    }

    pub fn size(&self) -> usize {
        self.chosen.iter().filter(|&&c| c).count()
    }

    pub fn ids(&self) -> Vec<SetId> {
        self.chosen.iter().enumerate().filter(|(_, &c)| c).map(|(s, _)| s as SetId).collect()
    }

    pub fn flags(&self) -> &[bool] {
        &self.chosen
    }
}

/// Weight function over sets.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalCover<T> {
    pub weight: Vec<T>,
}

impl<T: Scalar> FractionalCover<T> {
    pub fn zeros(num_sets: usize) -> Self {
        FractionalCover { weight: vec![T::zero(); num_sets] }
    }

    pub fn total(&self) -> T {
        crate::scalar::sum(&self.weight)
    }

    /// `wt(e)`: sum of the weights of the sets containing `e`.
    pub fn element_weight(&self, inst: &SetCoverInstance, e: ElementId) -> T {
        inst.sets_of(e).iter().fold(T::zero(), |acc, &s| acc + self.weight[s as usize].clone())
    }

    /// Least element whose weight is below one, if any.
    pub fn first_uncovered(&self, inst: &SetCoverInstance) -> Option<ElementId> {
        (0..inst.num_elements() as ElementId).find(|&e| self.element_weight(inst, e) < T::one())
    }

    pub fn is_feasible(&self, inst: &SetCoverInstance) -> bool {
        self.first_uncovered(inst).is_none()
    }
}

/// Outcome of checking an integral cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverVerdict {
    Ok,
    Uncovered(ElementId),
}

impl CoverVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, CoverVerdict::Ok)
    }
}

/// Checks that every element has a chosen containing set; reports the least
/// uncovered element otherwise.
pub fn validate_cover(inst: &SetCoverInstance, cover: &IntegralCover) -> CoverVerdict {
    for e in 0..inst.num_elements() as ElementId {
        if !inst.sets_of(e).iter().any(|&s| cover.contains(s)) {
            return CoverVerdict::Uncovered(e);
        }
    }
    CoverVerdict::Ok
}

/// Synthetic instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `num_elements` elements, each placed in `f_target` distinct sets drawn
    /// uniformly from `num_sets`.
    UniformRandom { num_elements: usize, num_sets: usize, f_target: usize },
    /// `opt_size * delta` elements partitioned into `opt_size` planted blocks
    /// of size `delta`, plus `f - 1` further random partitions into blocks of
    /// the same size. Every set has size `delta`, so the planted blocks form
    /// an optimal cover.
    BlockPlanted { opt_size: usize, delta: usize, f: usize },
    /// One set of size `delta` plus `delta` singletons.
    Star { delta: usize },
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub instance: SetCoverInstance,
    pub family: Family,
    pub seed: u64,
    /// Set ids of a known cover, when the family plants one.
    pub planted_cover: Option<Vec<SetId>>,
}

pub fn generate_instance(family: Family, seed: u64) -> Result<GeneratedInstance, InstanceError> {
    let tape = RandomTape::new(seed);
    let mut stream = tape.stream(&Label::new(Tag::Generator));
    let (sets, n, planted) = match family {
        Family::UniformRandom { num_elements, num_sets, f_target } => {
            if num_elements == 0 || num_sets == 0 || f_target == 0 {
                return Err(InstanceError::Infeasible("uniform-random parameters must be positive".into()));
            }
            if f_target > num_sets {
                return Err(InstanceError::Infeasible(format!("f_target {f_target} exceeds num_sets {num_sets}")));
            }
            let mut sets = vec![Vec::new(); num_sets];
            let mut ids: Vec<SetId> = (0..num_sets as SetId).collect();
            for e in 0..num_elements as ElementId {
                let (chosen, _) = ids.partial_shuffle(stream.rng(), f_target);
                for &s in chosen.iter() {
                    sets[s as usize].push(e);
                }
            }
            (sets, num_elements, None)
        }
        Family::BlockPlanted { opt_size, delta, f } => {
            if opt_size == 0 || delta == 0 || f == 0 {
                return Err(InstanceError::Infeasible("block-planted parameters must be positive".into()));
            }
            let n = opt_size * delta;
            let mut blocks: Vec<Vec<ElementId>> = Vec::with_capacity(opt_size * f);
            let mut order: Vec<ElementId> = (0..n as ElementId).collect();
            for round in 0..f {
                if round > 0 {
                    order.shuffle(stream.rng());
                }
                for chunk in order.chunks(delta) {
                    blocks.push(chunk.to_vec());
                }
            }
            // Random set ids so the planted blocks are not simply 0..opt_size.
            let mut ids: Vec<SetId> = (0..blocks.len() as SetId).collect();
            ids.shuffle(stream.rng());
            let mut sets = vec![Vec::new(); blocks.len()];
            for (block, &id) in blocks.into_iter().zip(&ids) {
                sets[id as usize] = block;
            }
            let mut planted: Vec<SetId> = ids[..opt_size].to_vec();
            planted.sort_unstable();
            (sets, n, Some(planted))
        }
        Family::Star { delta } => {
            if delta == 0 {
                return Err(InstanceError::Infeasible("star needs delta >= 1".into()));
            }
            let mut sets = vec![(0..delta as ElementId).collect::<Vec<_>>()];
            sets.extend((0..delta as ElementId).map(|e| vec![e]));
            (sets, delta, Some(vec![0]))
        }
    };
    let sets = sets
        .into_iter()
        .map(|mut members| {
            members.sort_unstable();
            members
        })
        .collect();
    let instance = SetCoverInstance::from_sets(n, sets)?;
    Ok(GeneratedInstance { instance, family, seed, planted_cover: planted })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_set_instance() {
        let inst = SetCoverInstance::parse("setcover 1 2\nset 0 0 1\n").unwrap();
        assert_eq!(inst.num_sets(), 1);
        assert_eq!(inst.members(0), &[0, 1]);
        assert_eq!(inst.delta(), 2);
        assert_eq!(inst.freq(), 1);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let inst = SetCoverInstance::parse("# hello\nsetcover 2 2 # header\n\nset 1 1\nset 0 0\n").unwrap();
        assert_eq!(inst.members(1), &[1]);
    }

    #[test]
    fn uncoverable_element_is_rejected() {
        let err = SetCoverInstance::parse("setcover 1 6\nset 0 0 1 2 3 4\n").unwrap_err();
        assert!(matches!(err, InstanceError::Consistency(_)), "{err}");
    }

    #[test]
    fn element_out_of_range_is_rejected() {
        let err = SetCoverInstance::parse("setcover 1 2\nset 0 0 2\n").unwrap_err();
        assert!(matches!(err, InstanceError::Consistency(_)));
    }

    #[test]
    fn duplicate_member_is_rejected() {
        assert!(SetCoverInstance::parse("setcover 1 2\nset 0 0 1 1\n").is_err());
    }

    #[test]
    fn malformed_line_is_a_parse_error() {
        let err = SetCoverInstance::parse("setcover 1 2\nset 0 zero\n").unwrap_err();
        assert!(matches!(err, InstanceError::Parse { line: 2, .. }));
        assert!(matches!(SetCoverInstance::parse("set 0 1\n"), Err(InstanceError::Parse { .. })));
        assert!(matches!(SetCoverInstance::parse("cover 1 2\n"), Err(InstanceError::Parse { .. })));
    }

    #[test]
    fn star_shape() {
        let g = generate_instance(Family::Star { delta: 8 }, 123).unwrap();
        let inst = &g.instance;
        assert_eq!(inst.num_sets(), 9);
        assert_eq!(inst.members(0).len(), 8);
        assert!((1..9).all(|s| inst.members(s).len() == 1));
        assert_eq!(inst.freq(), 2);
        assert_eq!(inst.delta(), 8);
    }

    #[test]
    fn planted_cover_is_valid() {
        let g = generate_instance(Family::BlockPlanted { opt_size: 5, delta: 8, f: 4 }, 7).unwrap();
        let planted = g.planted_cover.clone().unwrap();
        assert_eq!(planted.len(), 5);
        let cover = IntegralCover::from_ids(g.instance.num_sets(), planted);
        assert_eq!(validate_cover(&g.instance, &cover), CoverVerdict::Ok);
        assert_eq!(g.instance.delta(), 8);
        assert_eq!(g.instance.freq(), 4);
    }

    #[test]
    fn generator_is_deterministic() {
        let fam = Family::UniformRandom { num_elements: 100, num_sets: 40, f_target: 4 };
        let a = generate_instance(fam, 9).unwrap();
        let b = generate_instance(fam, 9).unwrap();
        assert_eq!(a.instance, b.instance);
        assert_eq!(a.instance.to_text(), b.instance.to_text());
        assert_eq!(a.instance.freq(), 4);
    }

    #[test]
    fn infeasible_parameters() {
        let fam = Family::UniformRandom { num_elements: 10, num_sets: 3, f_target: 4 };
        assert!(matches!(generate_instance(fam, 0), Err(InstanceError::Infeasible(_))));
        assert!(generate_instance(Family::Star { delta: 0 }, 0).is_err());
    }

    #[test]
    fn validate_full_and_empty() {
        let g = generate_instance(Family::UniformRandom { num_elements: 30, num_sets: 10, f_target: 2 }, 1).unwrap();
        let inst = &g.instance;
        assert_eq!(validate_cover(inst, &IntegralCover::full(inst.num_sets())), CoverVerdict::Ok);
        assert_eq!(validate_cover(inst, &IntegralCover::empty(inst.num_sets())), CoverVerdict::Uncovered(0));
    }

    #[test]
    fn round_trip_through_file() {
        let g = generate_instance(Family::UniformRandom { num_elements: 25, num_sets: 10, f_target: 3 }, 4).unwrap();
        let dir = std::env::temp_dir().join(format!("lcasc-rt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.sc");
        g.instance.save(&path).unwrap();
        let back = load_instance(&path).unwrap();
        assert_eq!(back, g.instance);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), back.to_text());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn fractional_feasibility() {
        let inst = SetCoverInstance::from_sets(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let mut fc = FractionalCover::<f64>::zeros(2);
        fc.weight[0] = 1.0;
        assert_eq!(fc.first_uncovered(&inst), Some(2));
        fc.weight[1] = 1.0;
        assert!(fc.is_feasible(&inst));
        assert_eq!(fc.total(), 2.0);
    }
}
