//! Sparse coloring breaking the automorphisms that move the base vertex.
//!
//! Every `ceil(2/delta)`-th sphere, starting with sphere 1, is reserved and
//! the base-moving elements are broken on the union of the reserved spheres.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::layered::{LayeredGraph, VertexId};
use crate::motion::{search_breaking_coloring, verify_breaks, PartialColoring, Strategy};
use crate::perm::PermSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixrootResult {
    pub coloring: PartialColoring,
    pub colored_spheres: Vec<usize>,
    pub delta: f64,
    /// Windows longer than `k0` spheres are `delta`-sparse.
    pub k0: u64,
    /// Spacing between reserved spheres; 0 when nothing was reserved.
    pub step: usize,
}

/// `colored` (sphere indices within `0..=radius`) has fewer than `delta * w`
/// members in every window of `w > k0` consecutive indices.
pub fn is_delta_sparse(colored: &[usize], delta: f64, k0: u64, radius: usize) -> bool {
    let mut marks = vec![0usize; radius + 2];
    for &n in colored {
        if n <= radius {
            marks[n + 1] = 1;
        }
    }
    for i in 1..marks.len() {
        marks[i] += marks[i - 1];
    }
    let total = radius + 1;
    (k0 as usize + 1..=total).all(|w| (0..=total - w).all(|s| ((marks[s + w] - marks[s]) as f64) < delta * w as f64))
}

pub fn fixroot(g: &LayeredGraph, moving: &PermSet, delta: f64, strategy: Strategy) -> Result<FixrootResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {delta}")));
    }
    if moving.is_empty() {
        return Ok(FixrootResult {
            coloring: PartialColoring::empty(),
            colored_spheres: Vec::new(),
            delta,
            k0: 0,
            step: 0,
        });
    }
    let step = (2.0 / delta).ceil() as usize;
    let colored_spheres: Vec<usize> = (1..=g.radius()).step_by(step).collect();
    let support: Vec<VertexId> = colored_spheres.iter().flat_map(|&n| g.spheres()[n].iter().copied()).collect();
    let coloring = match search_breaking_coloring(moving, &support, strategy, true) {
        Ok(outcome) => outcome.coloring,
        Err(Error::Unbreakable { .. } | Error::NoBreakingColoring { .. } | Error::RandomizedExhausted { .. }) => {
            // No breaking coloring found on the reserved spheres.
            return Err(Error::FixrootInsufficient { survivors: moving.len() });
        }
        Err(e) => return Err(e),
    };
    let survivors = verify_breaks(&coloring, moving).len();
    if survivors > 0 {
        return Err(Error::FixrootInsufficient { survivors });
    }
    Ok(FixrootResult { coloring, colored_spheres, delta, k0: step as u64, step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered::{generate, FamilySpec, SyntheticDescription};
    use crate::perm::automorphisms;

    /// Base 0 and vertex 4 are exchanged by the only nontrivial automorphism.
    pub(crate) fn swapped_root() -> SyntheticDescription {
        SyntheticDescription {
            sphere_sizes: vec![1, 3, 4, 2],
            edges: vec![[0, 1], [0, 2], [0, 3], [4, 2], [4, 3], [4, 7], [1, 2], [7, 3], [2, 5], [3, 6], [5, 8], [6, 9]],
        }
    }

    #[test]
    fn sparse_checker() {
        assert!(is_delta_sparse(&[1, 4, 7, 10], 0.9, 3, 10));
        assert!(!is_delta_sparse(&[1, 2], 0.5, 1, 10));
        assert!(is_delta_sparse(&[], 0.1, 0, 5));
    }

    #[test]
    fn nothing_to_break() {
        let g = generate(&FamilySpec::Line, 6).unwrap();
        let r = fixroot(&g, &PermSet::empty(), 0.25, Strategy::Exhaustive).unwrap();
        assert!(r.coloring.is_empty());
        assert_eq!(r.k0, 0);
    }

    #[test]
    fn base_swapping_involution() {
        let g = generate(&FamilySpec::Synthetic(swapped_root()), 3).unwrap();
        let all = automorphisms(&g).unwrap();
        assert_eq!(all.len(), 2);
        let moving = all.filter(false, |p| p.apply(VertexId(0)).unwrap() != VertexId(0));
        assert_eq!(moving.len(), 1);
        let r = fixroot(&g, &moving, 0.9, Strategy::Exhaustive).unwrap();
        assert_eq!(r.colored_spheres, vec![1]);
        assert_eq!(r.k0, 3);
        // Support {1, 2, 3}; the involution swaps 2 and 3, so the first
        // coloring in scan order whitens 3.
        assert_eq!(r.coloring.support(), &[VertexId(1), VertexId(2), VertexId(3)]);
        assert_eq!(r.coloring.black(), &[VertexId(1), VertexId(2)]);
        assert!(verify_breaks(&r.coloring, &moving).is_empty());
        assert!(is_delta_sparse(&r.colored_spheres, 0.9, r.k0, g.radius()));
    }
}
