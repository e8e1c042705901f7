//! Explicit automorphism enumeration: iterated degree refinement followed by
//! backtracking along a BFS order, so every vertex after the first of its
//! component has an already mapped anchor neighbor.

use std::collections::{BTreeMap, VecDeque};

use super::{PermSet, Permutation};
use crate::error::{Error, Result};
use crate::layered::LayeredGraph;

pub const DEFAULT_GROUP_CAP: usize = 100_000;

const NONE: u32 = u32::MAX;
const PARTIAL_KEEP: usize = 16;

/// Stable colour refinement. Colours are numbered by sorted signature, so they
/// are invariant under every automorphism.
pub(crate) fn refine_colors(adj: &[Vec<u32>]) -> Vec<u32> {
    let mut colors: Vec<u32> = {
        let mut degrees: Vec<usize> = adj.iter().map(Vec::len).collect();
        degrees.sort_unstable();
        degrees.dedup();
        adj.iter().map(|a| degrees.binary_search(&a.len()).unwrap() as u32).collect()
    };
    let mut classes = colors.iter().max().map_or(0, |&m| m as usize + 1);
    loop {
        let signatures: Vec<(u32, Vec<u32>)> = adj
            .iter()
            .enumerate()
            .map(|(v, nbrs)| {
                let mut s: Vec<u32> = nbrs.iter().map(|&w| colors[w as usize]).collect();
                s.sort_unstable();
                (colors[v], s)
            })
            .collect();
        let mut table: BTreeMap<&(u32, Vec<u32>), u32> = BTreeMap::new();
        for s in &signatures {
            table.insert(s, 0);
        }
        for (i, slot) in table.values_mut().enumerate() {
            *slot = i as u32;
        }
        let next: Vec<u32> = signatures.iter().map(|s| table[s]).collect();
        let next_classes = table.len();
        drop(table);
        colors = next;
        if next_classes == classes {
            return colors;
        }
        classes = next_classes;
    }
}

struct Plan {
    order: Vec<u32>,
    anchor: Vec<u32>,
    /// Neighbors of `order[t]` placed before position `t`.
    earlier: Vec<Vec<u32>>,
}

fn search_plan(adj: &[Vec<u32>], colors: &[u32]) -> Plan {
    let n = adj.len();
    let mut class_size: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in colors {
        *class_size.entry(c).or_default() += 1;
    }
    let mut pos = vec![NONE; n];
    let mut order = Vec::with_capacity(n);
    let mut anchor = Vec::with_capacity(n);
    // Roots: rarest colour first, lowest index breaking ties.
    let mut roots: Vec<u32> = (0..n as u32).collect();
    roots.sort_by_key(|&v| (class_size[&colors[v as usize]], colors[v as usize], v));
    for root in roots {
        if pos[root as usize] != NONE {
            continue;
        }
        pos[root as usize] = order.len() as u32;
        order.push(root);
        anchor.push(NONE);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v as usize] {
                if pos[w as usize] == NONE {
                    pos[w as usize] = order.len() as u32;
                    order.push(w);
                    anchor.push(v);
                    queue.push_back(w);
                }
            }
        }
    }
    let earlier = order
        .iter()
        .enumerate()
        .map(|(t, &v)| adj[v as usize].iter().copied().filter(|&w| (pos[w as usize] as usize) < t).collect())
        .collect();
    Plan { order, anchor, earlier }
}

/// The full automorphism group of `g`, enumerated explicitly and sorted.
pub fn automorphisms(g: &LayeredGraph) -> Result<PermSet> {
    automorphisms_with_cap(g, DEFAULT_GROUP_CAP)
}

pub fn automorphisms_with_cap(g: &LayeredGraph, cap: usize) -> Result<PermSet> {
    let adj = g.adjacency();
    let n = adj.len();
    let colors = refine_colors(adj);
    let mut by_color: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (v, &c) in colors.iter().enumerate() {
        by_color.entry(c).or_default().push(v as u32);
    }
    let plan = search_plan(adj, &colors);

    let mut map = vec![NONE; n];
    let mut used = vec![false; n];
    let mut cand: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut next = vec![0usize; n];
    let mut found: Vec<Permutation> = Vec::new();

    let candidates = |t: usize, map: &[u32], used: &[bool]| -> Vec<u32> {
        let v = plan.order[t] as usize;
        let a = plan.anchor[t];
        if a == NONE {
            by_color[&colors[v]].iter().copied().filter(|&u| !used[u as usize]).collect()
        } else {
            adj[map[a as usize] as usize]
                .iter()
                .copied()
                .filter(|&u| colors[u as usize] == colors[v] && !used[u as usize])
                .collect()
        }
    };

    let consistent = |t: usize, u: u32, map: &[u32], used: &[bool]| -> bool {
        let earlier = &plan.earlier[t];
        let mapped_nbrs = adj[u as usize].iter().filter(|&&x| used[x as usize]).count();
        mapped_nbrs == earlier.len() && earlier.iter().all(|&w| g.has_edge_at(u as usize, map[w as usize] as usize))
    };

    if n == 0 {
        return PermSet::new(Vec::new(), true, cap);
    }
    let mut t: isize = 0;
    cand[0] = candidates(0, &map, &used);
    while t >= 0 {
        let tu = t as usize;
        let v = plan.order[tu] as usize;
        if map[v] != NONE {
            used[map[v] as usize] = false;
            map[v] = NONE;
        }
        let mut placed = false;
        while next[tu] < cand[tu].len() {
            let u = cand[tu][next[tu]];
            next[tu] += 1;
            if consistent(tu, u, &map, &used) {
                map[v] = u;
                used[u as usize] = true;
                placed = true;
                break;
            }
        }
        if !placed {
            next[tu] = 0;
            t -= 1;
            continue;
        }
        if tu + 1 == n {
            if found.len() == cap {
                found.truncate(PARTIAL_KEEP);
                return Err(Error::CapExceeded { cap, partial: found });
            }
            found.push(Permutation::from_positions_unchecked(g.vertex_ids().clone(), map.clone()));
            continue;
        }
        t += 1;
        cand[tu + 1] = candidates(tu + 1, &map, &used);
        next[tu + 1] = 0;
    }
    PermSet::new(found, true, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered::{generate, FamilySpec, VertexId};

    #[test]
    fn line_reflection_only() {
        let g = generate(&FamilySpec::Line, 3).unwrap();
        let a = automorphisms(&g).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a.is_closed());
    }

    #[test]
    fn star_has_order_24() {
        let g = generate(&FamilySpec::Grid2d, 1).unwrap();
        assert_eq!(automorphisms(&g).unwrap().len(), 24);
    }

    #[test]
    fn single_vertex_is_trivial() {
        let g = generate(&FamilySpec::Grid2d, 0).unwrap();
        let a = automorphisms(&g).unwrap();
        assert_eq!(a.len(), 1);
        assert!(a.elements()[0].is_identity());
    }

    #[test]
    fn cap_is_enforced() {
        let g = generate(&FamilySpec::RegularTree { degree: 3 }, 3).unwrap();
        match automorphisms_with_cap(&g, 10) {
            Err(Error::CapExceeded { cap: 10, partial }) => assert!(!partial.is_empty()),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn refinement_separates_grid_center() {
        let g = generate(&FamilySpec::Grid2d, 4).unwrap();
        let colors = refine_colors(g.adjacency());
        let base = g.index_of(VertexId(0)).unwrap();
        assert_eq!(colors.iter().filter(|&&c| c == colors[base]).count(), 1);
    }
}
