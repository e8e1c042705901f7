//! Permutations of finite vertex sets, explicit permutation sets, and motion.

mod search;
mod structure;

pub use search::{automorphisms, automorphisms_with_cap, DEFAULT_GROUP_CAP};
pub use structure::{
    check_sphere_action, disjoint_ray_witness, fixed_point_components, FixedComponent, FixedComponentReport,
    PropagationViolation, RayWitness, RestrictionViolation, SphereActionReport,
};

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::layered::VertexId;

/// A bijection of a finite, sorted vertex domain onto itself.
///
/// Images are stored as positions into the shared domain slice so that large
/// explicit groups share one copy of the domain.
#[derive(Clone)]
pub struct Permutation {
    domain: Arc<[VertexId]>,
    images: Vec<u32>,
    cycles: OnceLock<Vec<Vec<u32>>>,
}

impl Permutation {
    /// `domain` must be sorted and duplicate free; `images[i]` is the position
    /// of the image of `domain[i]`.
    pub fn from_positions(domain: Arc<[VertexId]>, images: Vec<u32>) -> Result<Self> {
        if images.len() != domain.len() {
            return Err(Error::InvalidParameter("image count differs from domain size".into()));
        }
        if domain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("domain must be sorted and distinct".into()));
        }
        let mut seen = vec![false; domain.len()];
        for &i in &images {
            let slot =
                seen.get_mut(i as usize).ok_or_else(|| Error::InvalidParameter("image outside domain".into()))?;
            if std::mem::replace(slot, true) {
                return Err(Error::InvalidParameter("mapping is not injective".into()));
            }
        }
        Ok(Self::from_positions_unchecked(domain, images))
    }

    pub(crate) fn from_positions_unchecked(domain: Arc<[VertexId]>, images: Vec<u32>) -> Self {
        Self { domain, images, cycles: OnceLock::new() }
    }

    pub fn identity(domain: Arc<[VertexId]>) -> Self {
        let images = (0..domain.len() as u32).collect();
        Self::from_positions_unchecked(domain, images)
    }

    /// Builds a permutation from `(v, image)` pairs; the domain is the set of
    /// keys.
    pub fn from_map(map: &BTreeMap<VertexId, VertexId>) -> Result<Self> {
        let domain: Arc<[VertexId]> = map.keys().copied().collect();
        let images = map
            .values()
            .map(|w| domain.binary_search(w).map(|p| p as u32).map_err(|_| Error::NotInDomain(*w)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_positions(domain, images)
    }

    /// Product of disjoint cycles over `domain`; unlisted points are fixed.
    pub fn from_cycles(domain: Arc<[VertexId]>, cycles: &[Vec<VertexId>]) -> Result<Self> {
        let mut images: Vec<u32> = (0..domain.len() as u32).collect();
        let mut touched = HashSet::new();
        for cycle in cycles {
            let pos = cycle
                .iter()
                .map(|v| domain.binary_search(v).map(|p| p as u32).map_err(|_| Error::NotInDomain(*v)))
                .collect::<Result<Vec<_>>>()?;
            for (i, &p) in pos.iter().enumerate() {
                if !touched.insert(p) {
                    return Err(Error::InvalidParameter("cycles are not disjoint".into()));
                }
                images[p as usize] = pos[(i + 1) % pos.len()];
            }
        }
        Self::from_positions(domain, images)
    }

    pub fn domain(&self) -> &Arc<[VertexId]> {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn positions(&self) -> &[u32] {
        &self.images
    }

    pub fn position_of(&self, v: VertexId) -> Option<usize> {
        self.domain.binary_search(&v).ok()
    }

    pub fn apply(&self, v: VertexId) -> Result<VertexId> {
        let p = self.position_of(v).ok_or(Error::NotInDomain(v))?;
        Ok(self.domain[self.images[p] as usize])
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    /// Cycle decomposition over positions, fixed points included as singletons.
    /// Cycles start at their smallest position and are listed in that order.
    pub fn cycles(&self) -> &[Vec<u32>] {
        self.cycles.get_or_init(|| {
            let mut seen = vec![false; self.images.len()];
            let mut out = Vec::new();
            for start in 0..self.images.len() {
                if seen[start] {
                    continue;
                }
                let mut cycle = vec![start as u32];
                seen[start] = true;
                let mut next = self.images[start] as usize;
                while next != start {
                    seen[next] = true;
                    cycle.push(next as u32);
                    next = self.images[next] as usize;
                }
                out.push(cycle);
            }
            out
        })
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// Cycle index of every domain position.
    pub fn cycle_labels(&self) -> Vec<u32> {
        let mut label = vec![0u32; self.images.len()];
        for (c, cycle) in self.cycles().iter().enumerate() {
            for &p in cycle {
                label[p as usize] = c as u32;
            }
        }
        label
    }

    pub fn motion(&self) -> usize {
        self.images.iter().enumerate().filter(|&(i, &j)| i as u32 != j).count()
    }

    /// Number of vertices of `set` moved by this permutation. Vertices outside
    /// the domain count as fixed.
    pub fn restricted_motion(&self, set: &[VertexId]) -> usize {
        set.iter().filter_map(|&v| self.position_of(v)).filter(|&p| self.images[p] as usize != p).count()
    }

    pub(crate) fn restricted_motion_positions(&self, positions: &[u32]) -> usize {
        positions.iter().filter(|&&p| self.images[p as usize] != p).count()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_domain(other)?;
        let images = other.images.iter().map(|&j| self.images[j as usize]).collect();
        Ok(Self::from_positions_unchecked(self.domain.clone(), images))
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0u32; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j as usize] = i as u32;
        }
        Self::from_positions_unchecked(self.domain.clone(), images)
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.domain, &other.domain) || self.domain == other.domain {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    /// The permutation induced on `set`, which must be fixed setwise.
    pub fn restrict(&self, set: &[VertexId]) -> Result<Self> {
        let mut sub: Vec<VertexId> = set.to_vec();
        sub.sort_unstable();
        sub.dedup();
        let sub: Arc<[VertexId]> = sub.into();
        self.restrict_to_domain(&sub)
    }

    /// Like [`Permutation::restrict`] with a prebuilt sorted domain, so that
    /// many restrictions can share it.
    pub fn restrict_to_domain(&self, sub: &Arc<[VertexId]>) -> Result<Self> {
        let mut images = Vec::with_capacity(sub.len());
        for &v in sub.iter() {
            let p = self.position_of(v).ok_or(Error::NotInDomain(v))?;
            let w = self.domain[self.images[p] as usize];
            let q = sub.binary_search(&w).map_err(|_| Error::NotSetwiseFixed(v))?;
            images.push(q as u32);
        }
        Ok(Self::from_positions_unchecked(sub.clone(), images))
    }

    /// Whether `set` is mapped onto itself.
    pub fn fixes_setwise(&self, set: &[VertexId]) -> bool {
        let members: HashSet<VertexId> = set.iter().copied().collect();
        set.iter().all(|&v| self.apply(v).is_ok_and(|w| members.contains(&w)))
    }

    pub fn to_map(&self) -> BTreeMap<VertexId, VertexId> {
        self.domain.iter().zip(&self.images).map(|(&v, &j)| (v, self.domain[j as usize])).collect()
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Permutation(")?;
        let mut first = true;
        for cycle in self.cycles().iter().filter(|c| c.len() > 1) {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            let ids: Vec<String> = cycle.iter().map(|&p| self.domain[p as usize].to_string()).collect();
            write!(f, "({})", ids.join(" "))?;
        }
        if first {
            f.write_str("id")?;
        }
        write!(f, " on {} points)", self.domain.len())
    }
}

impl PartialEq for Permutation {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images && (Arc::ptr_eq(&self.domain, &other.domain) || self.domain == other.domain)
    }
}

impl Eq for Permutation {}

impl Hash for Permutation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.images.hash(state);
    }
}

impl PartialOrd for Permutation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Permutation {
    /// Lexicographic on the image sequence (in domain order).
    fn cmp(&self, other: &Self) -> Ordering {
        let same = Arc::ptr_eq(&self.domain, &other.domain) || self.domain == other.domain;
        if !same {
            return self.domain.cmp(&other.domain);
        }
        self.images.cmp(&other.images)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<VertexId, VertexId>::deserialize(deserializer)?;
        Permutation::from_map(&map).map_err(serde::de::Error::custom)
    }
}

/// Minimum motion over a set of permutations; the empty minimum is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupMotion {
    Finite(usize),
    Infinite,
}

impl GroupMotion {
    pub fn finite(self) -> Option<usize> {
        match self {
            GroupMotion::Finite(m) => Some(m),
            GroupMotion::Infinite => None,
        }
    }

    /// Strict comparison against a real threshold.
    pub fn exceeds(self, threshold: f64) -> bool {
        match self {
            GroupMotion::Finite(m) => m as f64 > threshold,
            GroupMotion::Infinite => true,
        }
    }
}

impl fmt::Display for GroupMotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupMotion::Finite(m) => write!(f, "{m}"),
            GroupMotion::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for GroupMotion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GroupMotion::Finite(m) => serializer.serialize_u64(*m as u64),
            GroupMotion::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// An explicitly enumerated set of distinct permutations on a common domain,
/// kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermSet {
    elements: Vec<Permutation>,
    closed: bool,
    cap: usize,
}

impl PermSet {
    /// Sorts and deduplicates. `closed` is taken on trust; see
    /// [`PermSet::is_closed_exhaustive`].
    pub fn new(mut elements: Vec<Permutation>, closed: bool, cap: usize) -> Result<Self> {
        if let Some(first) = elements.first() {
            for e in &elements[1..] {
                first.check_domain(e)?;
            }
        }
        elements.sort();
        elements.dedup();
        Ok(Self { elements, closed, cap })
    }

    pub fn from_elements(elements: Vec<Permutation>) -> Result<Self> {
        Self::new(elements, false, DEFAULT_GROUP_CAP)
    }

    pub fn empty() -> Self {
        Self { elements: Vec::new(), closed: false, cap: DEFAULT_GROUP_CAP }
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Permutation> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Permutation> {
        self.elements.iter()
    }

    /// Elements satisfying `keep`; closure is preserved only if the caller says so.
    pub fn filter(&self, closed: bool, mut keep: impl FnMut(&Permutation) -> bool) -> Self {
        let elements = self.elements.iter().filter(|p| keep(p)).cloned().collect();
        Self { elements, closed, cap: self.cap }
    }

    /// Elements fixing `v`.
    pub fn stabilizer(&self, v: VertexId) -> Result<Self> {
        let mut out = Vec::new();
        for p in &self.elements {
            if p.apply(v)? == v {
                out.push(p.clone());
            }
        }
        Ok(Self { elements: out, closed: self.closed, cap: self.cap })
    }

    /// Distinct restrictions to `set`, which every element must fix setwise.
    pub fn restrict_set(&self, set: &[VertexId]) -> Result<Self> {
        let mut sub: Vec<VertexId> = set.to_vec();
        sub.sort_unstable();
        sub.dedup();
        let sub: Arc<[VertexId]> = sub.into();
        let elements = self.elements.iter().map(|p| p.restrict_to_domain(&sub)).collect::<Result<Vec<_>>>()?;
        Self::new(elements, self.closed, self.cap)
    }

    /// `m(A)`, or `m(A)|S` when `set` is given.
    pub fn group_motion(&self, set: Option<&[VertexId]>) -> GroupMotion {
        self.elements
            .iter()
            .map(|p| match set {
                Some(s) => p.restricted_motion(s),
                None => p.motion(),
            })
            .min()
            .map_or(GroupMotion::Infinite, GroupMotion::Finite)
    }

    /// Exhaustive closure check under composition and inversion.
    pub fn is_closed_exhaustive(&self) -> bool {
        self.elements.iter().all(|a| {
            self.contains(&a.inverse()) && self.elements.iter().all(|b| a.compose(b).is_ok_and(|c| self.contains(&c)))
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.elements)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let elements: Vec<Permutation> = serde_json::from_str(s)?;
        Self::from_elements(elements)
    }
}

impl<'a> IntoIterator for &'a PermSet {
    type Item = &'a Permutation;
    type IntoIter = std::slice::Iter<'a, Permutation>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

/// Motion of a single permutation.
pub fn motion(p: &Permutation) -> usize {
    p.motion()
}

/// Number of points of `set` moved by `p`.
pub fn restricted_motion(p: &Permutation, set: &[VertexId]) -> usize {
    p.restricted_motion(set)
}

/// `m(A)|S`, infinite for the empty set.
pub fn group_motion(set: &PermSet, support: &[VertexId]) -> GroupMotion {
    set.group_motion(Some(support))
}
