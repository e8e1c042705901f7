use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{LayeredGraph, VertexId};
use crate::error::{Error, Result};

/// Which infinite (or explicitly described) graph to truncate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FamilySpec {
    /// The two-way infinite path.
    Line,
    /// Two parallel two-way infinite paths joined by rungs.
    TwoWayLadder,
    /// The square lattice Z^2.
    Grid2d,
    /// The infinite d-regular tree.
    RegularTree {
        degree: usize,
    },
    Synthetic(SyntheticDescription),
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Line => f.write_str("line"),
            FamilySpec::TwoWayLadder => f.write_str("two-way-ladder"),
            FamilySpec::Grid2d => f.write_str("grid2d"),
            FamilySpec::RegularTree { degree } => write!(f, "regular-tree:{degree}"),
            FamilySpec::Synthetic(d) => write!(f, "synthetic({} spheres)", d.sphere_sizes.len()),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    /// Parses the built-in families. Synthetic descriptions come from files and
    /// are handled by the caller.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("line", None) => Ok(FamilySpec::Line),
            ("ladder" | "two-way-ladder", None) => Ok(FamilySpec::TwoWayLadder),
            ("grid2d" | "grid", None) => Ok(FamilySpec::Grid2d),
            ("tree" | "regular-tree", Some(d)) => {
                let degree = d.parse().map_err(|_| Error::InvalidFamily(format!("bad tree degree `{d}`")))?;
                Ok(FamilySpec::RegularTree { degree })
            }
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

/// A finite layered graph given directly: vertex ids are `0..total`, assigned
/// sphere by sphere, so sphere 0 is `{0}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticDescription {
    pub sphere_sizes: Vec<usize>,
    pub edges: Vec<[u64; 2]>,
}

impl SyntheticDescription {
    /// `strands` disjoint paths of length `depth` hanging off the base; the
    /// base stabilizer acts as the full symmetric group on the strands.
    pub fn threads(strands: usize, depth: usize) -> Self {
        let mut edges = Vec::new();
        let id = |s: usize, n: usize| (1 + (n - 1) * strands + s) as u64;
        for s in 0..strands {
            edges.push([0, id(s, 1)]);
            for n in 1..depth {
                edges.push([id(s, n), id(s, n + 1)]);
            }
        }
        let mut sphere_sizes = vec![1];
        sphere_sizes.extend(std::iter::repeat_n(strands, depth));
        Self { sphere_sizes, edges }
    }

    pub fn depth(&self) -> usize {
        self.sphere_sizes.len().saturating_sub(1)
    }

    fn build(&self, radius: usize) -> Result<LayeredGraph> {
        if self.sphere_sizes.first() != Some(&1) {
            return Err(Error::InconsistentLayering("sphere 0 must have exactly one vertex".into()));
        }
        if radius > self.depth() {
            return Err(Error::InvalidFamily(format!("radius {radius} exceeds synthetic depth {}", self.depth())));
        }
        let mut spheres = Vec::with_capacity(self.sphere_sizes.len());
        let mut next = 0u64;
        for &size in &self.sphere_sizes {
            spheres.push((next..next + size as u64).map(VertexId).collect::<Vec<_>>());
            next += size as u64;
        }
        let full = LayeredGraph::from_parts(
            VertexId(0),
            spheres,
            self.edges.iter().map(|&[u, v]| (VertexId(u), VertexId(v))),
        )?;
        full.truncate(radius)
    }
}

fn zigzag(z: i64) -> u64 {
    if z >= 0 {
        (z as u64) * 2
    } else {
        (-z as u64) * 2 - 1
    }
}

fn cantor(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

/// BFS over an implicit graph, keeping the ball of the given radius.
fn bfs_truncation<C, N, I>(start: C, radius: usize, neighbors: N, id: I) -> Result<LayeredGraph>
where
    C: Clone + Eq + Hash,
    N: Fn(&C) -> Vec<C>,
    I: Fn(&C) -> u64,
{
    let mut dist: HashMap<C, usize> = HashMap::from([(start.clone(), 0)]);
    let mut order = vec![start.clone()];
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        if d == radius {
            continue;
        }
        for n in neighbors(&c) {
            if !dist.contains_key(&n) {
                dist.insert(n.clone(), d + 1);
                order.push(n.clone());
                queue.push_back(n);
            }
        }
    }
    let mut spheres = vec![Vec::new(); radius + 1];
    let mut edges = Vec::new();
    for c in &order {
        spheres[dist[c]].push(VertexId(id(c)));
        for n in neighbors(c) {
            if dist.contains_key(&n) {
                edges.push((VertexId(id(c)), VertexId(id(&n))));
            }
        }
    }
    LayeredGraph::from_parts(VertexId(id(&start)), spheres, edges)
}

fn regular_tree(degree: usize, radius: usize) -> Result<LayeredGraph> {
    if degree < 2 {
        return Err(Error::InvalidFamily(format!("regular tree needs degree >= 2, got {degree}")));
    }
    // Ids follow the BFS numbering of the infinite tree, so a larger radius
    // only appends ids.
    let mut spheres = vec![vec![VertexId(0)]];
    let mut edges = Vec::new();
    let mut next = 1u64;
    for n in 0..radius {
        let children = if n == 0 { degree } else { degree - 1 };
        let mut layer = Vec::with_capacity(spheres[n].len() * children);
        for &parent in &spheres[n] {
            for _ in 0..children {
                let child = VertexId(next);
                next += 1;
                edges.push((parent, child));
                layer.push(child);
            }
        }
        spheres.push(layer);
    }
    LayeredGraph::from_parts(VertexId(0), spheres, edges)
}

/// BFS stratification of `spec` truncated to the ball of `radius` around the
/// family's canonical base vertex.
pub fn generate(spec: &FamilySpec, radius: usize) -> Result<LayeredGraph> {
    match spec {
        FamilySpec::Line => bfs_truncation(0i64, radius, |&z| vec![z - 1, z + 1], |&z| zigzag(z)),
        FamilySpec::TwoWayLadder => bfs_truncation(
            (0i64, 0u8),
            radius,
            |&(z, s)| vec![(z - 1, s), (z + 1, s), (z, 1 - s)],
            |&(z, s)| zigzag(z) * 2 + s as u64,
        ),
        FamilySpec::Grid2d => bfs_truncation(
            (0i64, 0i64),
            radius,
            |&(x, y)| vec![(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)],
            |&(x, y)| cantor(zigzag(x), zigzag(y)),
        ),
        FamilySpec::RegularTree { degree } => regular_tree(*degree, radius),
        FamilySpec::Synthetic(desc) => desc.build(radius),
    }
}

/// Id of the lattice point `(x, y)` in [`FamilySpec::Grid2d`] truncations.
pub fn grid2d_id(x: i64, y: i64) -> VertexId {
    VertexId(cantor(zigzag(x), zigzag(y)))
}

/// Id of the integer `z` in [`FamilySpec::Line`] truncations.
pub fn line_id(z: i64) -> VertexId {
    VertexId(zigzag(z))
}

/// Id of `(z, side)` in [`FamilySpec::TwoWayLadder`] truncations.
pub fn ladder_id(z: i64, side: u8) -> VertexId {
    VertexId(zigzag(z) * 2 + side as u64)
}
