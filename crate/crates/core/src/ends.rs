//! Boundary-component trees and the multi-end variant of the window scheme.
//!
//! A truncation cannot see ends directly. The stand-in is the rooted tree of
//! components of `G - B(n - 1)` cut at a few level spheres; each root-to-leaf
//! chain plays the role of one end.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::layered::growth::{check_epsilon, growth_check_sizes};
use crate::layered::{GrowthBudget, LayeredGraph, VertexId};
use crate::motion::{search_breaking_coloring, PartialColoring, Strategy};
use crate::perm::{automorphisms_with_cap, PermSet, Permutation};
use crate::scheme::pipeline::{resolve_budget, subset, verify_with, FIXROOT_STREAM};
use crate::scheme::{
    break_window, fixroot, plan_window, FixrootSummary, IterationRecord, PipelineOptions, StopRecord, Verification,
    WindowChoice, WindowInput, WindowPolicy,
};
use crate::seed::sub_seed;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    /// 1-based position in `levels`.
    pub level: usize,
    pub sphere: usize,
    pub vertices: Vec<VertexId>,
    /// Index of the parent node; `None` below the root.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentTree {
    pub root: VertexId,
    pub levels: Vec<usize>,
    pub nodes: Vec<TreeNode>,
    /// Node index of every vertex on a level sphere, by dense vertex index.
    #[serde(skip)]
    node_of: Vec<u32>,
}

/// Component labels of the subgraph induced on vertices at level `>= n`;
/// `NONE` below `n`. Labels follow the smallest dense index of each component.
fn components_from(g: &LayeredGraph, n: usize) -> Vec<u32> {
    let adj = g.adjacency();
    let mut label = vec![NONE; adj.len()];
    let mut next = 0;
    for s in 0..adj.len() {
        if label[s] != NONE || g.level_at(s) < n {
            continue;
        }
        label[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                let w = w as usize;
                if label[w] == NONE && g.level_at(w) >= n {
                    label[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    label
}

/// Levels `gap, 2 gap, ...` with `gap = ceil(4/eps) + 1`, each pushed past
/// excluded spheres, stopping before the outermost sphere.
pub fn auto_levels(radius: usize, epsilon: f64, exclude: &BTreeSet<usize>) -> Result<Vec<usize>> {
    check_epsilon(epsilon)?;
    let gap = (4.0 / epsilon).ceil() as usize + 1;
    let mut levels = Vec::new();
    let mut n = gap;
    loop {
        while exclude.contains(&n) {
            n += 1;
        }
        if n >= radius {
            break;
        }
        levels.push(n);
        n += gap;
    }
    if levels.len() < 2 {
        return Err(Error::Levels(format!(
            "radius {radius} leaves room for {} level(s) with gap {gap}; need 2",
            levels.len()
        )));
    }
    Ok(levels)
}

fn validate_levels(radius: usize, epsilon: f64, exclude: &BTreeSet<usize>, levels: &[usize]) -> Result<()> {
    check_epsilon(epsilon)?;
    if levels.len() < 2 {
        return Err(Error::Levels("need at least two levels".into()));
    }
    let mut prev = 0;
    for &n in levels {
        if n as f64 - prev as f64 <= 4.0 / epsilon {
            return Err(Error::Levels(format!("gap {prev} -> {n} is not above 4/eps")));
        }
        if n >= radius {
            return Err(Error::Levels(format!("level {n} is not inside the truncation of radius {radius}")));
        }
        if exclude.contains(&n) {
            return Err(Error::Levels(format!("level {n} is already colored")));
        }
        prev = n;
    }
    Ok(())
}

/// Tree on the given level spheres, without spacing checks.
pub fn component_tree_at(g: &LayeredGraph, levels: &[usize]) -> Result<ComponentTree> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] == 0 {
        return Err(Error::Levels("levels must be positive and strictly increasing".into()));
    }
    if let Some(&n) = levels.iter().find(|&&n| n > g.radius()) {
        return Err(Error::RadiusOutOfRange { n, radius: g.radius() });
    }
    let mut node_of = vec![NONE; g.vertex_count()];
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut prev_labels: Option<Vec<u32>> = None;
    for (li, &n) in levels.iter().enumerate() {
        let labels = components_from(g, n);
        let mut groups: Vec<(u32, Vec<usize>)> = Vec::new();
        for &v in &g.spheres()[n] {
            let idx = g.index_of(v).unwrap();
            match groups.iter_mut().find(|(l, _)| *l == labels[idx]) {
                Some((_, members)) => members.push(idx),
                None => groups.push((labels[idx], vec![idx])),
            }
        }
        for (_, members) in groups {
            let parent = match &prev_labels {
                None => None,
                Some(prev) => {
                    let target = prev[members[0]];
                    nodes.iter().position(|node: &TreeNode| {
                        node.level == li && prev[g.index_of(node.vertices[0]).unwrap()] == target
                    })
                }
            };
            let id = nodes.len() as u32;
            for &m in &members {
                node_of[m] = id;
            }
            let mut vertices: Vec<VertexId> = members.iter().map(|&m| g.id_at(m)).collect();
            vertices.sort_unstable();
            nodes.push(TreeNode { level: li + 1, sphere: n, vertices, parent });
        }
        prev_labels = Some(labels);
    }
    Ok(ComponentTree { root: g.base(), levels: levels.to_vec(), nodes, node_of })
}

/// Component tree on explicit `levels`, or automatically spaced ones.
pub fn component_tree(
    g: &LayeredGraph,
    epsilon: f64,
    exclude: &BTreeSet<usize>,
    levels: Option<&[usize]>,
) -> Result<ComponentTree> {
    let levels = match levels {
        Some(l) => {
            validate_levels(g.radius(), epsilon, exclude, l)?;
            l.to_vec()
        }
        None => auto_levels(g.radius(), epsilon, exclude)?,
    };
    component_tree_at(g, &levels)
}

impl ComponentTree {
    pub fn nodes_at(&self, level: usize) -> impl Iterator<Item = (usize, &TreeNode)> {
        self.nodes.iter().enumerate().filter(move |(_, n)| n.level == level)
    }

    /// Root-to-leaf node paths, ordered by leaf index.
    pub fn chains(&self) -> Vec<Vec<usize>> {
        let last = self.levels.len();
        self.nodes_at(last)
            .map(|(leaf, _)| {
                let mut path = vec![leaf];
                while let Some(p) = self.nodes[*path.last().unwrap()].parent {
                    path.push(p);
                }
                path.reverse();
                path
            })
            .collect()
    }

    /// Union of the level spheres.
    pub fn level_vertices(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self.nodes.iter().flat_map(|n| n.vertices.iter().copied()).collect();
        v.sort_unstable();
        v
    }

    /// Whether `p` sends some node onto a different node.
    pub fn moves_nodes(&self, p: &Permutation) -> bool {
        let img = p.positions();
        self.node_of.iter().enumerate().any(|(v, &node)| node != NONE && self.node_of[img[v] as usize] != node)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// `sets[n]` for the chain ending in `leaf`: sphere `n` intersected with the
    /// component of `G - B(n' - 1)` holding the leaf, with `n' = min(n, last level)`.
    pub fn chain_sets(&self, g: &LayeredGraph, leaf: usize) -> Vec<Vec<VertexId>> {
        let last = *self.levels.last().unwrap();
        let anchor = g.index_of(self.nodes[leaf].vertices[0]).unwrap();
        let mut sets = vec![vec![g.base()]];
        let mut labels = Vec::new();
        for n in 1..=g.radius() {
            if n <= last {
                labels = components_from(g, n);
            }
            let want = labels[anchor];
            sets.push(g.spheres()[n].iter().copied().filter(|&v| labels[g.index_of(v).unwrap()] == want).collect());
        }
        sets
    }
}

/// Splits base-fixing elements into those fixing every node (`fixers`) and
/// those permuting the nodes of some level (`movers`).
pub fn end_fixing_split(set: &PermSet, tree: &ComponentTree) -> (PermSet, PermSet) {
    let movers = set.filter(false, |p| tree.moves_nodes(p));
    let fixers = set.filter(false, |p| !tree.moves_nodes(p));
    (fixers, movers)
}

/// Breaks every mover on the union of the level spheres.
pub fn break_end_movers(movers: &PermSet, tree: &ComponentTree, strategy: Strategy) -> Result<PartialColoring> {
    if movers.is_empty() {
        return Ok(PartialColoring::empty());
    }
    Ok(search_breaking_coloring(movers, &tree.level_vertices(), strategy, true)?.coloring)
}

/// Round-robin order over `chains` indices for `horizon` steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub chains: usize,
    pub order: Vec<usize>,
}

impl Schedule {
    pub fn round_robin(chains: usize, horizon: usize) -> Self {
        let order = if chains == 0 { Vec::new() } else { (0..horizon).map(|s| s % chains).collect() };
        Self { chains, order }
    }

    pub fn count(&self, chain: usize) -> usize {
        self.order.iter().filter(|&&c| c == chain).count()
    }

    /// Largest distance between consecutive occurrences of any index.
    pub fn max_gap(&self) -> usize {
        (0..self.chains)
            .map(|c| {
                let pos: Vec<usize> = self.order.iter().enumerate().filter(|(_, &x)| x == c).map(|(i, _)| i).collect();
                pos.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub nodes: Vec<usize>,
    pub c: f64,
    pub growth_pass: bool,
    pub first_failure: Option<usize>,
    pub m_last: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub chain: usize,
    pub iteration: IterationRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStop {
    pub chain: usize,
    pub stop: StopRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndsReport {
    pub epsilon: f64,
    pub c: Option<f64>,
    pub radius: usize,
    pub margin: usize,
    pub window: WindowPolicy,
    pub seed: u64,
    pub forced: bool,
    pub group_order: usize,
    pub base_movers: usize,
    pub trivially_distinguishable: bool,
    pub fixroot: FixrootSummary,
    pub tree: ComponentTree,
    /// Automorphism indices of the node-permuting elements.
    pub end_movers: Vec<usize>,
    pub level_spheres_colored: bool,
    pub phase1_support: usize,
    pub chains: Vec<ChainSummary>,
    pub schedule: Schedule,
    pub steps: Vec<StepRecord>,
    pub stops: Vec<ChainStop>,
    pub verification: Verification,
    pub coloring_support: usize,
    pub coloring_black: usize,
}

/// Phase 1: fixroot with `delta = eps/4`, then the node-permuting elements on
/// the level spheres. Phase 2: one window per step for the scheduled chain,
/// restricted to that chain's sets.
pub fn ends_pipeline(
    g: &LayeredGraph,
    opts: &PipelineOptions,
    levels: Option<&[usize]>,
) -> Result<(PartialColoring, EndsReport)> {
    let eps = opts.epsilon;
    check_epsilon(eps)?;
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
    let delta = eps / 4.0;
    let fix = fixroot(
        g,
        &subset(&all, &moving_ids)?,
        delta,
        Strategy::Auto { seed: sub_seed(opts.seed, FIXROOT_STREAM, 0), max_tries: opts.max_tries },
    )?;
    let mut colored: BTreeSet<usize> = fix.colored_spheres.iter().copied().collect();
    let mut coloring = fix.coloring.clone();

    let tree = component_tree(g, eps, &colored, levels)?;
    let (mover_ids, fixer_ids): (Vec<usize>, Vec<usize>) =
        stab_ids.iter().partition(|&&i| tree.moves_nodes(&all.elements()[i]));
    let movers = subset(&all, &mover_ids)?;
    let phase1 = break_end_movers(
        &movers,
        &tree,
        Strategy::Auto { seed: sub_seed(opts.seed, FIXROOT_STREAM, 1), max_tries: opts.max_tries },
    )?;
    let level_spheres_colored = !movers.is_empty();
    if level_spheres_colored {
        colored.extend(tree.levels.iter().copied());
    }
    let phase1_support = phase1.len();
    coloring = coloring.merge(&phase1)?;

    let chain_nodes = tree.chains();
    let mut chain_sets = Vec::with_capacity(chain_nodes.len());
    let mut chains = Vec::with_capacity(chain_nodes.len());
    for path in &chain_nodes {
        let sets = tree.chain_sets(g, *path.last().unwrap());
        let sizes: Vec<usize> = sets.iter().map(Vec::len).collect();
        let (budget, _) = resolve_budget(|e| GrowthBudget::auto_fit_sizes(&sizes, e), eps, opts.c)?;
        let growth = growth_check_sizes(&sizes, budget);
        if let (Some(first_failure), false) = (growth.first_failure, opts.force) {
            return Err(Error::GrowthRefused { first_failure });
        }
        chains.push(ChainSummary {
            nodes: path.clone(),
            c: budget.c,
            growth_pass: growth.pass,
            first_failure: growth.first_failure,
            m_last: None,
        });
        chain_sets.push(sets);
    }

    let avail = g.radius().saturating_sub(opts.margin);
    let count = chains.len();
    let mut m = vec![0usize; count];
    let mut done = vec![fixer_ids.is_empty(); count];
    let mut order = Vec::new();
    let mut steps = Vec::new();
    let mut stops = Vec::new();
    while done.iter().any(|d| !d) {
        for e in 0..count {
            if done[e] {
                continue;
            }
            let sets = &chain_sets[e];
            let mut chain_colored = colored.clone();
            chain_colored.extend((1..sets.len()).filter(|&n| sets[n].iter().any(|&v| coloring.contains(v))));
            let input = WindowInput {
                m: m[e],
                c: chains[e].c,
                epsilon: eps,
                k0: fix.k0,
                delta,
                avail,
                policy: opts.window,
                k_ceiling: opts.k_ceiling,
                sets,
                colored: &chain_colored,
            };
            let (params, plan, k_required, k_required_error) = match plan_window(&input)? {
                WindowChoice::Stop(stop) => {
                    stops.push(ChainStop { chain: e, stop });
                    done[e] = true;
                    continue;
                }
                WindowChoice::Run { params, plan, k_required, k_required_error } => {
                    (params, plan, k_required, k_required_error)
                }
            };
            let at_m = &sets[m[e]];
            let target_ids: Vec<usize> = fixer_ids
                .iter()
                .copied()
                .filter(|&i| {
                    let p = &all.elements()[i];
                    p.restricted_motion(at_m) > 0 && crate::motion::preserves_partial(p, &coloring)
                })
                .collect();
            let targets = subset(&all, &target_ids)?;
            let step = order.len();
            let (block_coloring, iteration) = break_window(
                &plan,
                &params,
                &targets,
                &target_ids,
                sub_seed(opts.seed, e as u64 + 1, step as u64),
                opts.max_tries,
                k_required,
                k_required_error,
            )?;
            coloring = coloring.merge(&block_coloring)?;
            order.push(e);
            steps.push(StepRecord { step, chain: e, iteration });
            chains[e].m_last = Some(m[e]);
            m[e] += plan.k;
        }
    }

    let m_final =
        if fixer_ids.is_empty() { 0 } else { chains.iter().map(|c| c.m_last.unwrap_or(0)).min().unwrap_or(0) };
    let mover_set: BTreeSet<usize> = mover_ids.iter().copied().collect();
    let verification = verify_with(g, &all, &coloring, m_final, |i| mover_set.contains(&i));
    let report = EndsReport {
        epsilon: eps,
        c: opts.c,
        radius: g.radius(),
        margin: opts.margin,
        window: opts.window,
        seed: opts.seed,
        forced: opts.force,
        group_order: all.len(),
        base_movers: moving_ids.len(),
        trivially_distinguishable,
        fixroot: FixrootSummary {
            delta,
            k0: fix.k0,
            step: fix.step,
            colored_spheres: fix.colored_spheres.clone(),
            support: fix.coloring.len(),
        },
        tree,
        end_movers: mover_ids,
        level_spheres_colored,
        phase1_support,
        chains,
        schedule: Schedule { chains: count, order },
        steps,
        stops,
        verification,
        coloring_support: coloring.len(),
        coloring_black: coloring.black().len(),
    };
    Ok((coloring, report))
}
