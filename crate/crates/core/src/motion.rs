//! Counting, bound checking and search for partial 2-colorings that break a
//! set of permutations.
//!
//! A permutation preserves a partial coloring when the coloring is constant on
//! every cycle intersected with the support. For permutations fixing the
//! support setwise this is the usual pointwise condition; for the others it is
//! exactly extendability to a preserved full coloring.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layered::VertexId;
use crate::perm::{GroupMotion, PermSet, Permutation};

/// Supports up to this size use the exhaustive scan under [`Strategy::Auto`].
pub const AUTO_EXHAUSTIVE_LIMIT: usize = 20;
/// Hard limit for [`Strategy::Exhaustive`].
pub const EXHAUSTIVE_MAX: usize = 30;
/// Default support limit for [`double_count_check`].
pub const DOUBLE_COUNT_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

#[derive(Deserialize)]
struct RawColoring {
    support: Vec<VertexId>,
    black: Vec<VertexId>,
}

/// A 2-coloring defined on `support`; vertices of the support not listed in
/// `black` are white. Both lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawColoring")]
pub struct PartialColoring {
    support: Vec<VertexId>,
    black: Vec<VertexId>,
}

impl TryFrom<RawColoring> for PartialColoring {
    type Error = Error;

    fn try_from(raw: RawColoring) -> Result<Self> {
        Self::new(raw.support, raw.black)
    }
}

impl PartialColoring {
    pub fn new(support: impl IntoIterator<Item = VertexId>, black: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        let support: BTreeSet<VertexId> = support.into_iter().collect();
        let black: BTreeSet<VertexId> = black.into_iter().collect();
        if let Some(v) = black.difference(&support).next() {
            return Err(Error::NotInDomain(*v));
        }
        Ok(Self { support: support.into_iter().collect(), black: black.into_iter().collect() })
    }

    pub fn empty() -> Self {
        Self { support: Vec::new(), black: Vec::new() }
    }

    pub fn all_black(support: impl IntoIterator<Item = VertexId>) -> Self {
        let support: BTreeSet<VertexId> = support.into_iter().collect();
        let support: Vec<VertexId> = support.into_iter().collect();
        Self { black: support.clone(), support }
    }

    pub fn support(&self) -> &[VertexId] {
        &self.support
    }

    pub fn black(&self) -> &[VertexId] {
        &self.black
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn color(&self, v: VertexId) -> Option<Color> {
        if self.support.binary_search(&v).is_err() {
            None
        } else if self.black.binary_search(&v).is_ok() {
            Some(Color::Black)
        } else {
            Some(Color::White)
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.support.binary_search(&v).is_ok()
    }

    /// Union of two colorings; they must agree where their supports overlap.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        for &v in &other.support {
            if let Some(c) = self.color(v) {
                if Some(c) != other.color(v) {
                    return Err(Error::InvalidParameter(format!("colorings disagree at vertex {v}")));
                }
            }
        }
        Self::new(self.support.iter().chain(&other.support).copied(), self.black.iter().chain(&other.black).copied())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Number of 2-colorings of the domain preserved by `p`, that is `2^cycles`.
/// Saturates at `u128::MAX` for more than 127 cycles.
pub fn preserved_count(p: &Permutation) -> u128 {
    1u128.checked_shl(p.cycle_count() as u32).filter(|&x| x != 0).unwrap_or(u128::MAX)
}

/// Cycle-constancy test. Support vertices outside the domain of `p` count as
/// fixed points.
pub fn preserves_partial(p: &Permutation, c: &PartialColoring) -> bool {
    let labels = p.cycle_labels();
    let mut seen: HashMap<u32, bool> = HashMap::new();
    for &v in c.support() {
        let Some(pos) = p.position_of(v) else { continue };
        let black = c.black.binary_search(&v).is_ok();
        if *seen.entry(labels[pos]).or_insert(black) != black {
            return false;
        }
    }
    true
}

/// Indices (into `set.elements()`) of the elements that preserve `c`.
pub fn verify_breaks(c: &PartialColoring, set: &PermSet) -> Vec<usize> {
    set.iter().enumerate().filter(|(_, p)| preserves_partial(p, c)).map(|(i, _)| i).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DoubleCount {
    pub lhs: u128,
    pub rhs: u128,
    pub equal: bool,
}

/// Sums preserved colorings over the distinct restrictions to `support`, and
/// separately sums preserving restrictions over all colorings of `support`.
pub fn double_count_check(set: &PermSet, support: &[VertexId], limit: usize) -> Result<DoubleCount> {
    let restricted = set.restrict_set(support)?;
    let n =
        restricted.elements().first().map_or_else(|| support.iter().collect::<BTreeSet<_>>().len(), Permutation::len);
    if n > limit || n > 63 {
        return Err(Error::EnumerationLimit { size: n, limit });
    }
    let lhs = restricted.iter().map(preserved_count).sum();
    // Cycles as bit masks; a coloring is preserved iff no cycle is split.
    let cycle_masks: Vec<Vec<u64>> = restricted
        .iter()
        .map(|p| {
            let mut by_label: HashMap<u32, u64> = HashMap::new();
            for (i, &c) in p.cycle_labels().iter().enumerate() {
                *by_label.entry(c).or_default() |= 1 << i;
            }
            by_label.into_values().filter(|m| m.count_ones() > 1).collect()
        })
        .collect();
    let mut rhs = 0u128;
    for mask in 0u64..(1u64 << n) {
        rhs += cycle_masks.iter().filter(|cs| cs.iter().all(|&b| mask & b == 0 || mask & b == b)).count() as u128;
    }
    Ok(DoubleCount { lhs, rhs, equal: lhs == rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub group_motion: GroupMotion,
    /// `|A|S'|`, the number of distinct restrictions.
    pub set_size: usize,
    /// `2 log2 |A|S'|`; negative infinity for an empty set.
    pub threshold: f64,
    pub holds: bool,
}

/// Evaluates `m(A)|S' > 2 log2 |A|S'|`. Every element must fix `support`
/// setwise and move at least one of its points.
pub fn bound_check(set: &PermSet, support: &[VertexId]) -> Result<BoundCheck> {
    let trivial: Vec<usize> =
        set.iter().enumerate().filter(|(_, p)| p.restricted_motion(support) == 0).map(|(i, _)| i).collect();
    if !trivial.is_empty() {
        return Err(Error::IdentityOnSupport { elements: trivial });
    }
    let restricted = set.restrict_set(support)?;
    let group_motion = restricted.group_motion(None);
    let set_size = restricted.len();
    let threshold = if set_size == 0 { f64::NEG_INFINITY } else { 2.0 * (set_size as f64).log2() };
    Ok(BoundCheck { group_motion, set_size, threshold, holds: group_motion.exceeds(threshold) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Strategy {
    /// Exhaustive up to [`AUTO_EXHAUSTIVE_LIMIT`] support vertices, randomized above.
    Auto {
        seed: u64,
        max_tries: u64,
    },
    Exhaustive,
    Randomized {
        seed: u64,
        max_tries: u64,
    },
}

/// Cycle-constancy constraints of a set over a fixed support. A coloring breaks
/// an element iff some block of its constraint is not monochromatic.
struct Constraints {
    n: usize,
    /// Per distinct constraint, blocks of support indices with at least two
    /// members.
    blocks: Vec<Vec<Vec<u32>>>,
}

impl Constraints {
    fn build(set: &PermSet, support: &[VertexId]) -> Result<Self> {
        let mut distinct = BTreeSet::new();
        for (i, p) in set.iter().enumerate() {
            let labels = p.cycle_labels();
            let mut by_cycle: HashMap<u32, Vec<u32>> = HashMap::new();
            for (s, &v) in support.iter().enumerate() {
                if let Some(pos) = p.position_of(v) {
                    by_cycle.entry(labels[pos]).or_default().push(s as u32);
                }
            }
            let mut blocks: Vec<Vec<u32>> = by_cycle.into_values().filter(|b| b.len() > 1).collect();
            if blocks.is_empty() {
                return Err(Error::Unbreakable { element: i });
            }
            blocks.sort_unstable();
            distinct.insert(blocks);
        }
        Ok(Self { n: support.len(), blocks: distinct.into_iter().collect() })
    }

    fn survivors(&self, black: &[bool]) -> usize {
        self.blocks
            .iter()
            .filter(|c| c.iter().all(|b| b.iter().all(|&i| black[i as usize] == black[b[0] as usize])))
            .count()
    }

    fn bit_blocks(&self) -> Vec<Vec<u64>> {
        self.blocks
            .iter()
            .map(|c| c.iter().map(|b| b.iter().fold(0u64, |m, &i| m | 1 << (self.n - 1 - i as usize))).collect())
            .collect()
    }
}

fn coloring_from(support: &[VertexId], black: impl Fn(usize) -> bool) -> PartialColoring {
    let b: Vec<VertexId> = support.iter().enumerate().filter(|&(i, _)| black(i)).map(|(_, &v)| v).collect();
    PartialColoring { support: support.to_vec(), black: b }
}

/// Scans colorings as binary integers over the sorted support: the first
/// vertex is the most significant bit, 0 is black, 1 is white.
fn exhaustive(c: &Constraints, support: &[VertexId]) -> Result<SearchOutcome> {
    if c.n > EXHAUSTIVE_MAX {
        return Err(Error::EnumerationLimit { size: c.n, limit: EXHAUSTIVE_MAX });
    }
    let bits = c.bit_blocks();
    let top = 1u64 << c.n;
    let found = (0..top).find(|&mask| bits.iter().all(|blocks| blocks.iter().any(|&b| mask & b != 0 && mask & b != b)));
    match found {
        Some(mask) => Ok(SearchOutcome {
            coloring: coloring_from(support, |i| mask >> (c.n - 1 - i) & 1 == 0),
            stats: SearchStats { strategy: "exhaustive", tries: mask + 1, support: c.n, constraints: c.blocks.len() },
        }),
        None => Err(Error::NoBreakingColoring { support: c.n }),
    }
}

fn randomized(c: &Constraints, support: &[VertexId], seed: u64, max_tries: u64) -> Result<SearchOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut black = vec![false; c.n];
    let mut best = usize::MAX;
    for t in 0..max_tries {
        for b in black.iter_mut() {
            *b = rng.gen();
        }
        let left = c.survivors(&black);
        if left == 0 {
            return Ok(SearchOutcome {
                coloring: coloring_from(support, |i| black[i]),
                stats: SearchStats { strategy: "randomized", tries: t + 1, support: c.n, constraints: c.blocks.len() },
            });
        }
        best = best.min(left);
    }
    Err(Error::RandomizedExhausted { tries: max_tries, best_survivors: best.min(c.blocks.len()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub strategy: &'static str,
    /// Colorings examined, including the successful one.
    pub tries: u64,
    pub support: usize,
    /// Distinct cycle-constancy constraints after deduplication.
    pub constraints: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub coloring: PartialColoring,
    pub stats: SearchStats,
}

/// Finds a partial coloring with support exactly `support` (deduplicated)
/// that no element of `set` preserves. Unless `force` is set, the motion bound
/// must hold first.
pub fn find_breaking_coloring(
    set: &PermSet,
    support: &[VertexId],
    strategy: Strategy,
    force: bool,
) -> Result<PartialColoring> {
    search_breaking_coloring(set, support, strategy, force).map(|o| o.coloring)
}

/// [`find_breaking_coloring`] with search statistics.
pub fn search_breaking_coloring(
    set: &PermSet,
    support: &[VertexId],
    strategy: Strategy,
    force: bool,
) -> Result<SearchOutcome> {
    let support: Vec<VertexId> = support.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if set.is_empty() {
        let n = support.len();
        return Ok(SearchOutcome {
            coloring: PartialColoring::all_black(support),
            stats: SearchStats { strategy: "none", tries: 0, support: n, constraints: 0 },
        });
    }
    if !force {
        let check = bound_check(set, &support)?;
        if !check.holds {
            return Err(Error::BoundNotSatisfied {
                motion: check.group_motion.finite().unwrap_or(usize::MAX),
                threshold: check.threshold,
            });
        }
    }
    let constraints = Constraints::build(set, &support)?;
    match strategy {
        Strategy::Exhaustive => exhaustive(&constraints, &support),
        Strategy::Randomized { seed, max_tries } => randomized(&constraints, &support, seed, max_tries),
        Strategy::Auto { seed, max_tries } => {
            if support.len() <= AUTO_EXHAUSTIVE_LIMIT {
                exhaustive(&constraints, &support)
            } else {
                randomized(&constraints, &support, seed, max_tries)
            }
        }
    }
}
