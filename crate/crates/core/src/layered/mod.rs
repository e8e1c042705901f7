//! Finite truncations of infinite graph families, stratified into spheres
//! around a base vertex.

mod family;
pub(crate) mod growth;

pub use family::{generate, grid2d_id, ladder_id, line_id, FamilySpec, SyntheticDescription};
pub use growth::{
    growth_check, growth_exponent, sphere_to_ball_diagnostic, DiagnosticPoint, GrowthBudget, GrowthReport, GrowthRow,
    SphereBallReport,
};

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque vertex identifier. Ids of a family are stable across truncation radii.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite graph whose vertices are partitioned into the spheres
/// `S(0) = {base}, S(1), ..., S(radius)`.
///
/// Construction validates the BFS layering: edges join equal or consecutive
/// spheres and every vertex of `S(n+1)` has a neighbor in `S(n)`. Together these
/// make the sphere index of a vertex equal to its distance from the base.
#[derive(Debug, Clone)]
pub struct LayeredGraph {
    base: VertexId,
    spheres: Vec<Vec<VertexId>>,
    edges: Vec<(VertexId, VertexId)>,
    ids: Arc<[VertexId]>,
    adj: Vec<Vec<u32>>,
    level: Vec<u32>,
}

impl PartialEq for LayeredGraph {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.spheres == other.spheres && self.edges == other.edges
    }
}

impl Eq for LayeredGraph {}

impl LayeredGraph {
    pub fn from_parts(
        base: VertexId,
        spheres: Vec<Vec<VertexId>>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InconsistentLayering(msg));
        if spheres.first().map(|s| s.as_slice()) != Some(&[base][..]) {
            return bad(format!("sphere 0 must be exactly {{{base}}}"));
        }
        let mut spheres = spheres;
        for s in &mut spheres {
            s.sort_unstable();
        }
        let mut level_of: HashMap<VertexId, u32> = HashMap::new();
        for (n, s) in spheres.iter().enumerate() {
            if n > 0 && s.is_empty() {
                return bad(format!("sphere {n} is empty"));
            }
            for &v in s {
                if level_of.insert(v, n as u32).is_some() {
                    return bad(format!("vertex {v} appears twice"));
                }
            }
        }
        let mut ids: Vec<VertexId> = level_of.keys().copied().collect();
        ids.sort_unstable();
        let index: HashMap<VertexId, u32> = ids.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();

        let mut edge_set = BTreeSet::new();
        for (u, v) in edges {
            let (Some(&lu), Some(&lv)) = (level_of.get(&u), level_of.get(&v)) else {
                return bad(format!("edge {{{u},{v}}} references an unknown vertex"));
            };
            if u == v {
                return bad(format!("self-loop at {u}"));
            }
            if lu.abs_diff(lv) > 1 {
                return bad(format!("edge {{{u},{v}}} skips a sphere ({lu} -> {lv})"));
            }
            edge_set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<_> = edge_set.into_iter().collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for &(u, v) in &edges {
            let (iu, iv) = (index[&u], index[&v]);
            adj[iu as usize].push(iv);
            adj[iv as usize].push(iu);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let level: Vec<u32> = ids.iter().map(|v| level_of[v]).collect();
        for (i, &v) in ids.iter().enumerate() {
            let l = level[i];
            if l > 0 && !adj[i].iter().any(|&w| level[w as usize] + 1 == l) {
                return bad(format!("vertex {v} in sphere {l} has no neighbor in sphere {}", l - 1));
            }
        }
        Ok(Self { base, spheres, edges, ids: ids.into(), adj, level })
    }

    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn radius(&self) -> usize {
        self.spheres.len() - 1
    }

    pub fn spheres(&self) -> &[Vec<VertexId>] {
        &self.spheres
    }

    pub fn sphere(&self, n: usize) -> Result<&[VertexId]> {
        self.spheres.get(n).map(|s| s.as_slice()).ok_or(Error::RadiusOutOfRange { n, radius: self.radius() })
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        self.spheres.iter().map(Vec::len).collect()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    /// All vertex ids in ascending order; the position of an id in this slice is
    /// its dense index.
    pub fn vertex_ids(&self) -> &Arc<[VertexId]> {
        &self.ids
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.ids.binary_search(&v).ok()
    }

    pub fn id_at(&self, index: usize) -> VertexId {
        self.ids[index]
    }

    pub fn level_at(&self, index: usize) -> usize {
        self.level[index] as usize
    }

    pub fn level_of(&self, v: VertexId) -> Option<usize> {
        self.index_of(v).map(|i| self.level_at(i))
    }

    /// Dense-index adjacency lists, sorted.
    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adj
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let i = self.index_of(v);
        i.into_iter().flat_map(move |i| self.adj[i].iter().map(|&w| self.ids[w as usize]))
    }

    pub fn has_edge_at(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&(b as u32)).is_ok()
    }

    /// Vertices at distance at most `n` from the base.
    pub fn ball(&self, n: usize) -> Result<Vec<VertexId>> {
        if n > self.radius() {
            return Err(Error::RadiusOutOfRange { n, radius: self.radius() });
        }
        let mut out: Vec<VertexId> = self.spheres[..=n].iter().flatten().copied().collect();
        out.sort_unstable();
        Ok(out)
    }

    pub fn ball_size(&self, n: usize) -> Result<usize> {
        if n > self.radius() {
            return Err(Error::RadiusOutOfRange { n, radius: self.radius() });
        }
        Ok(self.spheres[..=n].iter().map(Vec::len).sum())
    }

    /// Restriction to the ball of radius `n`.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n > self.radius() {
            return Err(Error::RadiusOutOfRange { n, radius: self.radius() });
        }
        let keep = |v: &VertexId| self.level_of(*v).is_some_and(|l| l <= n);
        let edges = self.edges.iter().copied().filter(|(u, v)| keep(u) && keep(v));
        Self::from_parts(self.base, self.spheres[..=n].to_vec(), edges)
    }

    /// Distances from `source` (dense index) by plain BFS; `u32::MAX` if unreachable.
    pub fn bfs_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.ids.len()];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[v] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        dist
    }

    pub fn to_file(&self) -> LayeredGraphFile {
        LayeredGraphFile {
            base: self.base,
            spheres: self.spheres.clone(),
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }

    pub fn from_file(file: LayeredGraphFile) -> Result<Self> {
        Self::from_parts(file.base, file.spheres, file.edges.into_iter().map(|[u, v]| (u, v)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// On-disk layout: `{"base": id, "spheres": [[ids],...], "edges": [[u,v],...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredGraphFile {
    pub base: VertexId,
    pub spheres: Vec<Vec<VertexId>>,
    pub edges: Vec<[VertexId; 2]>,
}
