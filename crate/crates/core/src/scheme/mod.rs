//! The sphere-window scheme: choice of the window length `k`, partition of a
//! window into sphere blocks, motion-threshold classes, and block diagnostics.

mod fixroot;
pub(crate) mod pipeline;

pub use fixroot::{fixroot, is_delta_sparse, FixrootResult};
pub(crate) use pipeline::{break_window, plan_window, WindowChoice, WindowInput};
pub use pipeline::{
    final_verification, run_pipeline, BoundMargin, FixrootSummary, IterationRecord, PipelineOptions, PipelineReport,
    SearchRecord, StopRecord, Verification, WindowPolicy,
};

use std::collections::BTreeSet;
use std::f64::consts::LN_2;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::layered::growth::check_epsilon;
use crate::layered::{growth_exponent, LayeredGraph, VertexId};
use crate::perm::{GroupMotion, PermSet};

/// Default upper end of the search for `k`. The search is logarithmic above
/// the point where every inequality is monotone, so this can be large.
pub const DEFAULT_K_CEILING: u64 = 1 << 40;

/// The four conditions a window length `k` must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    /// `log2 c~ < eps sqrt(k) / 8`
    ConstantTerm,
    /// `log2 k < eps sqrt(k) / 8`
    LogTerm,
    /// `4 sqrt(k) < eps (1 - eps/2) k / 2`
    BlockCount,
    /// `c~ sqrt(k) / 2 < eps k / 4`
    SphereSize,
}

impl Inequality {
    pub const ALL: [Inequality; 4] =
        [Inequality::ConstantTerm, Inequality::LogTerm, Inequality::BlockCount, Inequality::SphereSize];

    pub fn holds(self, k: u64, c_tilde: f64, epsilon: f64) -> bool {
        let kf = k as f64;
        let s = kf.sqrt();
        match self {
            Inequality::ConstantTerm => c_tilde.log2() < epsilon * s / 8.0,
            Inequality::LogTerm => kf.log2() < epsilon * s / 8.0,
            Inequality::BlockCount => 4.0 * s < 0.5 * epsilon * (1.0 - epsilon / 2.0) * kf,
            Inequality::SphereSize => c_tilde * s / 2.0 < epsilon / 4.0 * kf,
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::ConstantTerm => "log2(c~) < eps*sqrt(k)/8",
            Inequality::LogTerm => "log2(k) < eps*sqrt(k)/8",
            Inequality::BlockCount => "4*sqrt(k) < eps*(1-eps/2)*k/2",
            Inequality::SphereSize => "c~*sqrt(k)/2 < eps*k/4",
        })
    }
}

/// First inequality (in declaration order) that `k` violates.
pub fn first_failure(k: u64, c_tilde: f64, epsilon: f64) -> Option<Inequality> {
    Inequality::ALL.into_iter().find(|i| !i.holds(k, c_tilde, epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeParams {
    pub epsilon: f64,
    pub c: f64,
    /// Last sphere already handled.
    pub m: usize,
    pub c_tilde: f64,
    pub k: usize,
    pub k0: u64,
    pub delta: f64,
}

impl SchemeParams {
    /// Fills in `c_tilde`; `k` is taken as given.
    pub fn new(epsilon: f64, c: f64, m: usize, k: usize, k0: u64, delta: f64) -> Self {
        Self { epsilon, c, m, c_tilde: effective_constant(c, m, epsilon), k, k0, delta }
    }
}

/// `c * 2^((1 - eps) sqrt(m) / 2)`: with it every sphere up to `m + k` has
/// fewer than `c~ 2^((1 - eps) sqrt(k) / 2)` vertices.
pub fn effective_constant(c: f64, m: usize, epsilon: f64) -> f64 {
    c * 2f64.powf(growth_exponent(epsilon, m as f64))
}

/// Smallest `k > k0` satisfying all four inequalities.
///
/// Equivalent to a linear scan from `k0 + 1`. Three inequalities have
/// closed-form lower bounds on `k`. `log2 k < eps sqrt(k)/8` has decreasing
/// slack below `K* = (16 / (eps ln 2))^2`, so a failure there persists up to
/// `K*`; above `K*` everything is monotone and bisection applies.
pub fn choose_k(c_tilde: f64, epsilon: f64, k0: u64, ceiling: u64) -> Result<u64> {
    check_epsilon(epsilon)?;
    if !(c_tilde > 0.0 && c_tilde.is_finite()) {
        return Err(Error::InvalidParameter(format!("c~ must be positive, got {c_tilde}")));
    }
    if ceiling <= k0 {
        return Err(Error::InvalidParameter(format!("k ceiling {ceiling} must exceed k0 = {k0}")));
    }
    let fail = |k: u64| first_failure(k, c_tilde, epsilon);
    let roots =
        [8.0 * c_tilde.log2().max(0.0) / epsilon, 8.0 / (epsilon * (1.0 - epsilon / 2.0)), 2.0 * c_tilde / epsilon];
    let root = roots.into_iter().fold(0.0, f64::max);
    let analytic = (root * root).floor() as u64;
    let k_star = (16.0 / (epsilon * LN_2)).powi(2);

    let mut k = (k0 + 1).max(analytic.saturating_sub(1)).max(1);
    let mut last = None;
    while k <= ceiling {
        match fail(k) {
            None => return Ok(k),
            Some(ineq) if (k as f64) < k_star => {
                last = Some(ineq);
                k = if ineq == Inequality::LogTerm { (k + 1).max(k_star.ceil() as u64) } else { k + 1 };
            }
            Some(_) => {
                // Monotone from here on.
                if let Some(ineq) = fail(ceiling) {
                    return Err(Error::ChooseKCeiling { ceiling, last_failed: ineq });
                }
                let (mut lo, mut hi) = (k, ceiling);
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if fail(mid).is_none() {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(hi);
            }
        }
    }
    let last_failed = fail(ceiling).or(last).unwrap_or(Inequality::LogTerm);
    Err(Error::ChooseKCeiling { ceiling, last_failed })
}

/// `(kappa, r)` for window length `k`: `kappa = ceil(2 sqrt(k) (1 - eps/2))`
/// spheres per block and `r = ceil((1 - eps) sqrt(k) / 2) + 1` blocks.
pub fn block_layout(k: usize, epsilon: f64) -> (usize, usize) {
    let s = (k as f64).sqrt();
    let kappa = (2.0 * s * (1.0 - epsilon / 2.0)).ceil() as usize;
    let r = ((1.0 - epsilon) * s / 2.0).ceil() as usize + 1;
    (kappa, r)
}

/// Lower bound (strict) on the number of uncolored spheres in the last block.
pub fn remainder_requirement(k: usize, epsilon: f64) -> f64 {
    epsilon / 2.0 * (1.0 - epsilon / 2.0) * k as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    /// 1-based block index.
    pub index: usize,
    pub spheres: Vec<usize>,
    /// Vertex set of each sphere in `spheres`.
    #[serde(skip)]
    pub sets: Vec<Vec<VertexId>>,
    /// Union of `sets`, sorted.
    #[serde(skip)]
    pub vertices: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockPlan {
    pub m: usize,
    pub k: usize,
    pub epsilon: f64,
    /// Uncolored sphere indices of the window `(m, m + k]`, innermost first.
    pub uncolored: Vec<usize>,
    pub kappa: usize,
    pub r: usize,
    pub blocks: Vec<Block>,
    pub remainder: usize,
    pub remainder_required: f64,
}

/// Block plan for the window `(m, m + k]` of `g`, skipping `colored` spheres.
pub fn compute_blocks(g: &LayeredGraph, params: &SchemeParams, colored: &BTreeSet<usize>) -> Result<BlockPlan> {
    compute_blocks_on(g.spheres(), params.m, params.k, params.epsilon, colored)
}

/// Same as [`compute_blocks`] over arbitrary per-sphere vertex sets; `sets[n]`
/// plays the role of sphere `n`.
pub fn compute_blocks_on(
    sets: &[Vec<VertexId>],
    m: usize,
    k: usize,
    epsilon: f64,
    colored: &BTreeSet<usize>,
) -> Result<BlockPlan> {
    check_epsilon(epsilon)?;
    if k == 0 {
        return Err(Error::InvalidParameter("window length must be positive".into()));
    }
    let radius = sets.len().saturating_sub(1);
    if m + k > radius {
        return Err(Error::TruncationTooShallow { needed: m + k, radius });
    }
    let uncolored: Vec<usize> = (m + 1..=m + k).filter(|n| !colored.contains(n)).collect();
    let l = uncolored.len();
    let required = (1.0 - epsilon) * k as f64;
    if (l as f64) < required {
        return Err(Error::TooFewUncolored { uncolored: l, required });
    }
    let (kappa, r) = block_layout(k, epsilon);
    let remainder = l as i64 - ((r - 1) * kappa) as i64;
    let remainder_required = remainder_requirement(k, epsilon);
    if remainder as f64 <= remainder_required {
        return Err(Error::RemainderTooSmall { remainder, required: remainder_required });
    }
    let block = |index: usize, spheres: &[usize]| {
        let set_list: Vec<Vec<VertexId>> = spheres.iter().map(|&n| sets[n].clone()).collect();
        let mut vertices: Vec<VertexId> = set_list.iter().flatten().copied().collect();
        vertices.sort_unstable();
        vertices.dedup();
        Block { index, spheres: spheres.to_vec(), sets: set_list, vertices }
    };
    let mut blocks: Vec<Block> = (0..r - 1).map(|i| block(i + 1, &uncolored[i * kappa..(i + 1) * kappa])).collect();
    blocks.push(block(r, &uncolored[(r - 1) * kappa..]));
    Ok(BlockPlan { m, k, epsilon, uncolored, kappa, r, blocks, remainder: remainder as usize, remainder_required })
}

fn pow2(i: usize) -> u64 {
    1u64.checked_shl(i as u32).unwrap_or(u64::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutPartition {
    /// `classes[i - 1]` is `A_i`.
    pub classes: Vec<PermSet>,
    /// Positions in the input set of each class's elements.
    pub members: Vec<Vec<usize>>,
    /// `2^i` for `i = 1..=r`.
    pub thresholds: Vec<u64>,
    /// Input positions of elements fixing some window sphere pointwise; they
    /// are left out of every class.
    pub excluded: Vec<usize>,
}

impl AutPartition {
    pub fn class_sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }
}

/// Motion-threshold classes: an element goes to the smallest `i < r` such that
/// some uncolored sphere in a later block `P_j` (`j > i`) sees it move at most
/// `2^i` vertices, and to `A_r` when there is no such `i`.
pub fn classify(set: &PermSet, plan: &BlockPlan) -> AutPartition {
    let r = plan.r;
    let mut members = vec![Vec::new(); r];
    let mut excluded = Vec::new();
    for (e, p) in set.iter().enumerate() {
        let mins: Vec<usize> = plan
            .blocks
            .iter()
            .map(|b| b.sets.iter().map(|s| p.restricted_motion(s)).min().unwrap_or(usize::MAX))
            .collect();
        if mins.contains(&0) {
            excluded.push(e);
            continue;
        }
        // suffix[j] = min motion over blocks j.. (0-based)
        let mut suffix = vec![usize::MAX; r + 1];
        for j in (0..r).rev() {
            suffix[j] = suffix[j + 1].min(mins[j]);
        }
        let class = (1..r).find(|&i| suffix[i] as u64 <= pow2(i)).unwrap_or(r);
        members[class - 1].push(e);
    }
    let classes = members
        .iter()
        .map(|idx| {
            let mut keep = idx.iter().copied().peekable();
            let mut pos = 0;
            set.filter(false, |_| {
                let hit = keep.peek() == Some(&pos);
                if hit {
                    keep.next();
                }
                pos += 1;
                hit
            })
        })
        .collect();
    AutPartition { classes, members, thresholds: (1..=r).map(pow2).collect(), excluded }
}

/// Actual versus analytic size and motion of one nonempty class on its block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockBound {
    pub class: usize,
    pub size: usize,
    /// `|A_i|P_i|`
    pub restricted_size: usize,
    /// `m(A_i)|P_i`
    pub motion: GroupMotion,
    /// `2 log2 |A_i|P_i|`
    pub two_log_size: f64,
    /// `m(A_i)|P_i > 2 log2 |A_i|P_i|`
    pub hypothesis_holds: bool,
    pub log2_size_bound: f64,
    pub size_within_bound: bool,
    pub motion_bound: f64,
    pub motion_above_bound: bool,
}

/// Diagnostics for every nonempty class; empty classes are skipped.
pub fn verify_block_bounds(
    partition: &AutPartition,
    plan: &BlockPlan,
    params: &SchemeParams,
) -> Result<Vec<BlockBound>> {
    let eps = params.epsilon;
    let half_sqrt_k = (plan.k as f64).sqrt() / 2.0;
    let r = plan.r;
    let mut out = Vec::new();
    for (i, class) in partition.classes.iter().enumerate() {
        if class.is_empty() {
            continue;
        }
        let index = i + 1;
        let block = &plan.blocks[i];
        let restricted = class.restrict_set(&block.vertices)?;
        let motion = restricted.group_motion(None);
        let restricted_size = restricted.len();
        let two_log_size = 2.0 * (restricted_size as f64).log2();
        let (log2_size_bound, motion_bound) = if index < r {
            ((1.0 - eps / 2.0) * half_sqrt_k * 2f64.powi(index as i32), plan.kappa as f64 * 2f64.powi(index as i32 - 1))
        } else {
            (
                params.c_tilde * (1.0 - eps / 2.0) * half_sqrt_k * 2f64.powf(growth_exponent(eps, plan.k as f64)),
                remainder_requirement(plan.k, eps) * 2f64.powi(r as i32 - 1),
            )
        };
        out.push(BlockBound {
            class: index,
            size: class.len(),
            restricted_size,
            motion,
            two_log_size,
            hypothesis_holds: motion.exceeds(two_log_size),
            log2_size_bound,
            size_within_bound: (restricted_size as f64).log2() <= log2_size_bound,
            motion_bound,
            motion_above_bound: motion.exceeds(motion_bound),
        });
    }
    Ok(out)
}
