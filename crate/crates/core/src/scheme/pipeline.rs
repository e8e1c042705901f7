//! Iterated window breaking over a whole truncation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    choose_k, classify, compute_blocks_on, effective_constant, fixroot, verify_block_bounds, BlockBound, BlockPlan,
    SchemeParams, DEFAULT_K_CEILING,
};
use crate::error::{Error, Result};
use crate::layered::growth::check_epsilon;
use crate::layered::{growth_check, GrowthBudget, GrowthReport, LayeredGraph, VertexId};
use crate::motion::{preserves_partial, search_breaking_coloring, verify_breaks, PartialColoring, Strategy};
use crate::perm::{automorphisms_with_cap, GroupMotion, PermSet, DEFAULT_GROUP_CAP};
use crate::seed::sub_seed;

pub(crate) const FIXROOT_STREAM: u64 = 0xffff_ffff;

/// How the window length is picked from the inequality-driven value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum WindowPolicy {
    /// Use exactly the smallest admissible `k`; stop when it does not fit.
    Strict,
    /// Use the largest `k` not above the admissible value, the cap, and
    /// giving a valid block layout. The default cap is half the usable radius.
    Capped { max_window: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineOptions {
    pub epsilon: f64,
    /// Growth constant; `None` fits the smallest one to the truncation.
    pub c: Option<f64>,
    pub seed: u64,
    /// Run even if the growth check fails.
    pub force: bool,
    /// Outer spheres left out of every window.
    pub margin: usize,
    pub window: WindowPolicy,
    pub max_tries: u64,
    pub group_cap: usize,
    pub k_ceiling: u64,
}

impl PipelineOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            c: None,
            seed: 0,
            force: false,
            margin: 1,
            window: WindowPolicy::Capped { max_window: None },
            max_tries: 100_000,
            group_cap: DEFAULT_GROUP_CAP,
            k_ceiling: DEFAULT_K_CEILING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundMargin {
    pub class: usize,
    pub motion: GroupMotion,
    pub two_log_size: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchRecord {
    pub class: usize,
    pub strategy: &'static str,
    pub tries: u64,
    pub support: usize,
    pub constraints: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub m: usize,
    pub c_tilde: f64,
    pub k_required: Option<u64>,
    pub k_required_error: Option<String>,
    pub k: usize,
    pub kappa: usize,
    pub r: usize,
    pub uncolored_count: usize,
    pub blocks: Vec<Vec<usize>>,
    pub targets: usize,
    /// Automorphism indices left out of classification.
    pub excluded: Vec<usize>,
    pub class_sizes: Vec<usize>,
    pub bound_margins: Vec<BoundMargin>,
    pub block_bounds: Vec<BlockBound>,
    pub search: Vec<SearchRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StopRecord {
    pub m: usize,
    pub c_tilde: f64,
    pub k_required: Option<u64>,
    pub k_required_error: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixrootSummary {
    pub delta: f64,
    pub k0: u64,
    pub step: usize,
    pub colored_spheres: Vec<usize>,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub m_final: usize,
    /// Nontrivial automorphisms moving the base or a vertex within `m_final`.
    pub checked: usize,
    pub unchecked: usize,
    /// Indices into the sorted automorphism list.
    pub survivors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub epsilon: f64,
    pub c: f64,
    pub c_auto: bool,
    pub radius: usize,
    pub margin: usize,
    pub window: WindowPolicy,
    pub seed: u64,
    pub forced: bool,
    pub growth: GrowthReport,
    pub group_order: usize,
    pub base_movers: usize,
    pub trivially_distinguishable: bool,
    pub fixroot: FixrootSummary,
    pub iterations: Vec<IterationRecord>,
    pub stop: Option<StopRecord>,
    pub verification: Verification,
    pub coloring_support: usize,
    pub coloring_black: usize,
}

pub(crate) struct WindowInput<'a> {
    pub m: usize,
    pub c: f64,
    pub epsilon: f64,
    pub k0: u64,
    pub delta: f64,
    /// Largest sphere index a window may reach.
    pub avail: usize,
    pub policy: WindowPolicy,
    pub k_ceiling: u64,
    pub sets: &'a [Vec<VertexId>],
    pub colored: &'a BTreeSet<usize>,
}

pub(crate) enum WindowChoice {
    Stop(StopRecord),
    Run { params: SchemeParams, plan: BlockPlan, k_required: Option<u64>, k_required_error: Option<String> },
}

pub(crate) fn plan_window(input: &WindowInput<'_>) -> Result<WindowChoice> {
    let eps = input.epsilon;
    let m = input.m;
    let c_tilde = effective_constant(input.c, m, eps);
    let required = choose_k(c_tilde, eps, input.k0, input.k_ceiling);
    let (k_required, k_required_error) = match &required {
        Ok(k) => (Some(*k), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let stop = |reason: String| {
        Ok(WindowChoice::Stop(StopRecord {
            m,
            c_tilde,
            k_required,
            k_required_error: k_required_error.clone(),
            reason,
        }))
    };
    let run = |plan: BlockPlan| {
        Ok(WindowChoice::Run {
            params: SchemeParams { epsilon: eps, c: input.c, m, c_tilde, k: plan.k, k0: input.k0, delta: input.delta },
            plan,
            k_required,
            k_required_error: k_required_error.clone(),
        })
    };
    match input.policy {
        WindowPolicy::Strict => {
            let k = usize::try_from(required?).unwrap_or(usize::MAX);
            if m.saturating_add(k) > input.avail {
                return stop(format!("window of {k} spheres passes sphere {}", input.avail));
            }
            run(compute_blocks_on(input.sets, m, k, eps, input.colored)?)
        }
        WindowPolicy::Capped { max_window } => {
            let cap = max_window.unwrap_or(input.avail / 2);
            let limit = k_required.map_or(cap, |k| usize::try_from(k).unwrap_or(usize::MAX).min(cap));
            if limit == 0 {
                return stop("window cap is zero".into());
            }
            if m + limit > input.avail {
                return stop(format!("window of {limit} spheres passes sphere {}", input.avail));
            }
            for k in (1..=limit).rev() {
                match compute_blocks_on(input.sets, m, k, eps, input.colored) {
                    Ok(plan) => return run(plan),
                    Err(Error::TooFewUncolored { .. } | Error::RemainderTooSmall { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            stop(format!("no window up to {limit} spheres has a valid block layout"))
        }
    }
}

/// Classifies `targets` on `plan` and breaks every nonempty class on its block.
/// `target_ids[i]` is the automorphism index of `targets.elements()[i]`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn break_window(
    plan: &BlockPlan,
    params: &SchemeParams,
    targets: &PermSet,
    target_ids: &[usize],
    seed: u64,
    max_tries: u64,
    k_required: Option<u64>,
    k_required_error: Option<String>,
) -> Result<(PartialColoring, IterationRecord)> {
    let m = params.m;
    let partition = classify(targets, plan);
    let block_bounds = verify_block_bounds(&partition, plan, params)?;
    let mut coloring = PartialColoring::empty();
    let mut search = Vec::new();
    for (i, class) in partition.classes.iter().enumerate() {
        if class.is_empty() {
            continue;
        }
        let index = i + 1;
        let fail = |reason: String| Error::BlockSearchFailed { m, class: index, reason };
        let strategy = Strategy::Auto { seed: sub_seed(seed, m as u64, index as u64), max_tries };
        let out = search_breaking_coloring(class, &plan.blocks[i].vertices, strategy, true)
            .map_err(|e| fail(e.to_string()))?;
        let left = verify_breaks(&out.coloring, class).len();
        if left > 0 {
            return Err(fail(format!("{left} element(s) survive the block coloring")));
        }
        search.push(SearchRecord {
            class: index,
            strategy: out.stats.strategy,
            tries: out.stats.tries,
            support: out.stats.support,
            constraints: out.stats.constraints,
        });
        coloring = coloring.merge(&out.coloring)?;
    }
    let record = IterationRecord {
        m,
        c_tilde: params.c_tilde,
        k_required,
        k_required_error,
        k: plan.k,
        kappa: plan.kappa,
        r: plan.r,
        uncolored_count: plan.uncolored.len(),
        blocks: plan.blocks.iter().map(|b| b.spheres.clone()).collect(),
        targets: targets.len(),
        excluded: partition.excluded.iter().map(|&e| target_ids[e]).collect(),
        class_sizes: partition.class_sizes(),
        bound_margins: block_bounds
            .iter()
            .map(|b| BoundMargin { class: b.class, motion: b.motion, two_log_size: b.two_log_size })
            .collect(),
        block_bounds,
        search,
    };
    Ok((coloring, record))
}

/// Elements of `all` with the given indices, as a set in the same order.
pub(crate) fn subset(all: &PermSet, ids: &[usize]) -> Result<PermSet> {
    PermSet::new(ids.iter().map(|&i| all.elements()[i].clone()).collect(), false, all.cap())
}

/// Survivors of `coloring` among the nontrivial automorphisms that move the
/// base or some vertex at distance at most `m_final`.
pub fn final_verification(g: &LayeredGraph, all: &PermSet, coloring: &PartialColoring, m_final: usize) -> Verification {
    verify_with(g, all, coloring, m_final, |_| false)
}

/// [`final_verification`] that also checks the indices accepted by `always`.
pub(crate) fn verify_with(
    g: &LayeredGraph,
    all: &PermSet,
    coloring: &PartialColoring,
    m_final: usize,
    always: impl Fn(usize) -> bool,
) -> Verification {
    let mut checked = 0;
    let mut unchecked = 0;
    let mut survivors = Vec::new();
    for (i, p) in all.iter().enumerate() {
        if p.is_identity() {
            continue;
        }
        let inner =
            always(i) || p.positions().iter().enumerate().any(|(v, &w)| v != w as usize && g.level_at(v) <= m_final);
        if inner {
            checked += 1;
            if preserves_partial(p, coloring) {
                survivors.push(i);
            }
        } else {
            unchecked += 1;
        }
    }
    Verification { m_final, checked, unchecked, survivors }
}

pub(crate) fn resolve_budget(
    sizes_fit: impl FnOnce(f64) -> Result<GrowthBudget>,
    epsilon: f64,
    c: Option<f64>,
) -> Result<(GrowthBudget, bool)> {
    match c {
        Some(c) => Ok((GrowthBudget::new(epsilon, c)?, false)),
        None => Ok((sizes_fit(epsilon)?, true)),
    }
}

/// Fixroot on base movers, then windows `(m, m + k]` from `m = 0`, each
/// breaking the still unbroken base-fixing automorphisms that act
/// nontrivially on sphere `m`.
pub fn run_pipeline(g: &LayeredGraph, opts: &PipelineOptions) -> Result<(PartialColoring, PipelineReport)> {
    let eps = opts.epsilon;
    check_epsilon(eps)?;
    let (budget, c_auto) = resolve_budget(|e| GrowthBudget::auto_fit(g, e), eps, opts.c)?;
    let growth = growth_check(g, budget);
    if let (Some(first_failure), false) = (growth.first_failure, opts.force) {
        return Err(Error::GrowthRefused { first_failure });
    }
    let all = automorphisms_with_cap(g, opts.group_cap)?;
    let base = g.index_of(g.base()).expect("base is a vertex");
    let mut moving_ids = Vec::new();
    let mut stab_ids = Vec::new();
    for (i, p) in all.iter().enumerate() {
        if p.positions()[base] as usize != base {
            moving_ids.push(i);
        } else if !p.is_identity() {
            stab_ids.push(i);
        }
    }
    let trivially_distinguishable = moving_ids.is_empty() && stab_ids.is_empty();
    let moving = subset(&all, &moving_ids)?;
    let delta = eps / 2.0;
    let fix = fixroot(
        g,
        &moving,
        delta,
        Strategy::Auto { seed: sub_seed(opts.seed, FIXROOT_STREAM, 0), max_tries: opts.max_tries },
    )?;
    let colored: BTreeSet<usize> = fix.colored_spheres.iter().copied().collect();
    let mut coloring = fix.coloring.clone();
    let avail = g.radius().saturating_sub(opts.margin);

    let mut iterations = Vec::new();
    let mut stop = None;
    let mut m = 0;
    let mut m_final = 0;
    while !stab_ids.is_empty() {
        let input = WindowInput {
            m,
            c: budget.c,
            epsilon: eps,
            k0: fix.k0,
            delta,
            avail,
            policy: opts.window,
            k_ceiling: opts.k_ceiling,
            sets: g.spheres(),
            colored: &colored,
        };
        let (params, plan, k_required, k_required_error) = match plan_window(&input)? {
            WindowChoice::Stop(s) => {
                stop = Some(s);
                break;
            }
            WindowChoice::Run { params, plan, k_required, k_required_error } => {
                (params, plan, k_required, k_required_error)
            }
        };
        let sphere_m = &g.spheres()[m];
        let target_ids: Vec<usize> = stab_ids
            .iter()
            .copied()
            .filter(|&i| {
                let p = &all.elements()[i];
                p.restricted_motion(sphere_m) > 0 && preserves_partial(p, &coloring)
            })
            .collect();
        let targets = subset(&all, &target_ids)?;
        let (block_coloring, record) = break_window(
            &plan,
            &params,
            &targets,
            &target_ids,
            opts.seed,
            opts.max_tries,
            k_required,
            k_required_error,
        )?;
        coloring = coloring.merge(&block_coloring)?;
        iterations.push(record);
        m_final = m;
        m += plan.k;
    }

    let verification = final_verification(g, &all, &coloring, m_final);
    let report = PipelineReport {
        epsilon: eps,
        c: budget.c,
        c_auto,
        radius: g.radius(),
        margin: opts.margin,
        window: opts.window,
        seed: opts.seed,
        forced: opts.force,
        growth,
        group_order: all.len(),
        base_movers: moving.len(),
        trivially_distinguishable,
        fixroot: FixrootSummary {
            delta,
            k0: fix.k0,
            step: fix.step,
            colored_spheres: fix.colored_spheres.clone(),
            support: fix.coloring.len(),
        },
        iterations,
        stop,
        verification,
        coloring_support: coloring.len(),
        coloring_black: coloring.black().len(),
    };
    Ok((coloring, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered::{generate, FamilySpec, SyntheticDescription};

    #[test]
    fn trivial_group_needs_no_coloring() {
        // Three branches of lengths 1, 2 and 3 at the base: rigid.
        let desc = SyntheticDescription {
            sphere_sizes: vec![1, 3, 2, 1],
            edges: vec![[0, 1], [0, 2], [0, 3], [1, 4], [2, 5], [5, 6]],
        };
        let g = generate(&FamilySpec::Synthetic(desc), 3).unwrap();
        let (c, report) = run_pipeline(&g, &PipelineOptions::new(0.5)).unwrap();
        assert!(c.is_empty());
        assert!(report.trivially_distinguishable);
        assert!(report.verification.survivors.is_empty());
    }

    #[test]
    fn tree_growth_refused_without_force() {
        let g = generate(&FamilySpec::RegularTree { degree: 3 }, 6).unwrap();
        let mut opts = PipelineOptions::new(0.5);
        opts.c = Some(1.0);
        assert!(matches!(run_pipeline(&g, &opts), Err(Error::GrowthRefused { first_failure: 1 })));
    }

    #[test]
    fn strict_window_stops_immediately_on_small_grid() {
        let g = generate(&FamilySpec::Grid2d, 10).unwrap();
        let mut opts = PipelineOptions::new(0.9);
        opts.window = WindowPolicy::Strict;
        let (_, report) = run_pipeline(&g, &opts).unwrap();
        assert!(report.iterations.is_empty());
        assert!(report.stop.is_some());
    }

    #[test]
    fn grid_pipeline_breaks_everything() {
        let g = generate(&FamilySpec::Grid2d, 12).unwrap();
        let (c, report) = run_pipeline(&g, &PipelineOptions::new(0.9)).unwrap();
        assert_eq!(report.group_order, 8);
        assert!(report.verification.survivors.is_empty());
        assert!(report.verification.checked == 7);
        assert!(!c.is_empty());
    }
}
