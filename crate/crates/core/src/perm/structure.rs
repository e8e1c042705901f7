//! Truncation-scale checks of the structural facts about base-fixing
//! automorphisms: sphere invariance, propagation of nontrivial action to
//! higher spheres, agreement on spheres versus balls, unboundedness of the
//! non-fixed part, and disjoint monotone paths.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use super::{PermSet, Permutation};
use crate::error::{Error, Result};
use crate::layered::{LayeredGraph, VertexId};

const EXAMPLES_KEPT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropagationViolation {
    pub element: usize,
    /// First sphere with positive restricted motion.
    pub from_sphere: usize,
    /// First higher sphere (within the margin) on which the element is trivial.
    pub zero_sphere: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictionViolation {
    pub sphere: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SphereActionReport {
    pub elements: usize,
    pub margin: usize,
    /// Spheres `0..=checked_radius` take part in the propagation and
    /// restriction checks.
    pub checked_radius: usize,
    /// `(element, sphere)` pairs where a sphere is not mapped onto itself.
    pub sphere_fixing_violations: Vec<(usize, usize)>,
    pub propagation_violations: Vec<PropagationViolation>,
    pub restriction_violation_count: usize,
    /// Up to 16 example pairs agreeing on a sphere but not on the ball.
    pub restriction_violations: Vec<RestrictionViolation>,
}

impl SphereActionReport {
    pub fn violations(&self) -> usize {
        self.sphere_fixing_violations.len() + self.propagation_violations.len() + self.restriction_violation_count
    }
}

fn check_domain(p: &Permutation, g: &LayeredGraph) -> Result<()> {
    let d = p.domain();
    if Arc::ptr_eq(d, g.vertex_ids()) || d[..] == g.vertex_ids()[..] {
        Ok(())
    } else {
        Err(Error::DomainMismatch)
    }
}

fn sphere_positions(g: &LayeredGraph) -> Vec<Vec<u32>> {
    g.spheres().iter().map(|s| s.iter().map(|&v| g.index_of(v).unwrap() as u32).collect()).collect()
}

/// Checks, for base-fixing elements of `set`: every sphere is fixed setwise;
/// nontrivial action on a sphere persists on all higher spheres up to
/// `radius - margin`; two elements agree on a sphere iff they agree on the
/// ball of the same radius.
pub fn check_sphere_action(set: &PermSet, g: &LayeredGraph, margin: usize) -> Result<SphereActionReport> {
    let base = g.base();
    for p in set {
        check_domain(p, g)?;
        if p.apply(base)? != base {
            return Err(Error::InvalidParameter("check_sphere_action needs base-fixing elements".into()));
        }
    }
    let spheres = sphere_positions(g);
    let radius = g.radius();
    let top = radius.saturating_sub(margin);

    let mut sphere_fixing_violations = Vec::new();
    let mut propagation_violations = Vec::new();
    for (e, p) in set.iter().enumerate() {
        let img = p.positions();
        for (n, s) in spheres.iter().enumerate() {
            if s.iter().any(|&i| g.level_at(img[i as usize] as usize) != n) {
                sphere_fixing_violations.push((e, n));
            }
        }
        let motions: Vec<usize> = spheres.iter().map(|s| p.restricted_motion_positions(s)).collect();
        if let Some(first) = motions.iter().position(|&m| m > 0) {
            if first < radius {
                if let Some(j) = (first + 1..=top).find(|&j| motions[j] == 0) {
                    propagation_violations.push(PropagationViolation {
                        element: e,
                        from_sphere: first,
                        zero_sphere: j,
                    });
                }
            }
        }
    }

    // Agreement on the ball of radius i is agreement on every sphere <= i, so
    // ball classes refine sphere classes; a violation is a pair in the same
    // sphere class but different ball classes.
    let mut restriction_violation_count = 0;
    let mut restriction_violations = Vec::new();
    let mut ball_class: Vec<u32> = vec![0; set.len()];
    for (i, s) in spheres.iter().enumerate().take(top + 1) {
        let mut sphere_table: HashMap<Vec<u32>, u32> = HashMap::new();
        let sphere_class: Vec<u32> = set
            .iter()
            .map(|p| {
                let key: Vec<u32> = s.iter().map(|&x| p.positions()[x as usize]).collect();
                let next = sphere_table.len() as u32;
                *sphere_table.entry(key).or_insert(next)
            })
            .collect();
        let mut ball_table: HashMap<(u32, u32), u32> = HashMap::new();
        for e in 0..set.len() {
            let next = ball_table.len() as u32;
            ball_class[e] = *ball_table.entry((ball_class[e], sphere_class[e])).or_insert(next);
        }
        let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
        for (e, &c) in sphere_class.iter().enumerate() {
            groups.entry(c).or_default().push(e);
        }
        let mut keys: Vec<u32> = groups.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let members = &groups[&key];
            for (x, &a) in members.iter().enumerate() {
                for &b in &members[x + 1..] {
                    if ball_class[a] != ball_class[b] {
                        restriction_violation_count += 1;
                        if restriction_violations.len() < EXAMPLES_KEPT {
                            restriction_violations.push(RestrictionViolation { sphere: i, a, b });
                        }
                    }
                }
            }
        }
    }

    Ok(SphereActionReport {
        elements: set.len(),
        margin,
        checked_radius: top,
        sphere_fixing_violations,
        propagation_violations,
        restriction_violation_count,
        restriction_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedComponent {
    pub vertices: Vec<VertexId>,
    pub max_level: usize,
    pub touches_outer: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedComponentReport {
    pub components: Vec<FixedComponent>,
    /// The finite analogue of "only infinite components".
    pub all_touch_outer: bool,
}

/// Components of the subgraph induced on the vertices moved by `p`.
pub fn fixed_point_components(p: &Permutation, g: &LayeredGraph) -> Result<FixedComponentReport> {
    check_domain(p, g)?;
    let img = p.positions();
    let moved = |i: usize| img[i] as usize != i;
    let adj = g.adjacency();
    let mut seen = vec![false; adj.len()];
    let mut components = Vec::new();
    for start in 0..adj.len() {
        if seen[start] || !moved(start) {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut members = Vec::new();
        while let Some(v) = queue.pop_front() {
            members.push(v);
            for &w in &adj[v] {
                let w = w as usize;
                if !seen[w] && moved(w) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        let max_level = members.iter().map(|&v| g.level_at(v)).max().unwrap_or(0);
        components.push(FixedComponent {
            vertices: members.iter().map(|&v| g.id_at(v)).collect(),
            max_level,
            touches_outer: max_level == g.radius(),
        });
    }
    let all_touch_outer = components.iter().all(|c| c.touches_outer);
    Ok(FixedComponentReport { components, all_touch_outer })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RayWitness {
    /// Fixed vertex adjacent to the component; the BFS root.
    pub root: VertexId,
    /// Starts at a neighbor of `root`, ends in the outermost sphere; distances
    /// from `root` increase by one along it.
    pub path: Vec<VertexId>,
    pub image: Vec<VertexId>,
}

/// Builds a monotone path through `component` out to the outermost sphere
/// whose image under `p` is vertex-disjoint from it. `Ok(None)` means no such
/// path exists in the truncation.
pub fn disjoint_ray_witness(p: &Permutation, g: &LayeredGraph, component: &[VertexId]) -> Result<Option<RayWitness>> {
    check_domain(p, g)?;
    if p.apply(g.base())? != g.base() {
        return Err(Error::InvalidParameter("disjoint_ray_witness needs a base-fixing element".into()));
    }
    let n = g.vertex_count();
    let mut in_comp = vec![false; n];
    for &v in component {
        in_comp[g.index_of(v).ok_or(Error::NotInDomain(v))?] = true;
    }
    let radius = g.radius();
    if !component.iter().any(|&v| g.level_of(v) == Some(radius)) {
        return Err(Error::InvalidParameter("component does not touch the outermost sphere".into()));
    }
    let img = p.positions();
    let adj = g.adjacency();
    let root = (0..n).find(|&v| !in_comp[v] && img[v] as usize == v && adj[v].iter().any(|&w| in_comp[w as usize]));
    let Some(root) = root else {
        return Ok(None);
    };

    let mut parent = vec![u32::MAX; n];
    let mut dist = vec![u32::MAX; n];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            let w = w as usize;
            if in_comp[w] && dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = v as u32;
                queue.push_back(w);
            }
        }
    }
    let mut targets: Vec<usize> =
        (0..n).filter(|&v| in_comp[v] && g.level_at(v) == radius && dist[v] != u32::MAX).collect();
    targets.sort_by_key(|&v| (dist[v], v));
    for target in targets {
        let mut path = vec![target];
        let mut cur = target;
        while parent[cur] as usize != root {
            cur = parent[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        let on_path: std::collections::HashSet<usize> = path.iter().copied().collect();
        if path.iter().all(|&v| !on_path.contains(&(img[v] as usize))) {
            return Ok(Some(RayWitness {
                root: g.id_at(root),
                path: path.iter().map(|&v| g.id_at(v)).collect(),
                image: path.iter().map(|&v| g.id_at(img[v] as usize)).collect(),
            }));
        }
    }
    Ok(None)
}
