//! 2-Mapper: the 2-skeleton of the nerve of a cluster cover.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::clustering::{ClusterCover, ClusterNode};
use crate::exec::Execution;
use crate::persistence::betti_numbers;
use crate::simplex::Simplex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexInfo {
    pub id: usize,
    pub index: Vec<usize>,
    pub local: usize,
    pub size: usize,
}

impl From<&ClusterNode> for VertexInfo {
    fn from(n: &ClusterNode) -> Self {
        VertexInfo {
            id: n.id,
            index: n.cover_index.clone(),
            local: n.local,
            size: n.members.len(),
        }
    }
}

/// Vertices, edges and triangles, each sorted lexicographically by ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoMapperComplex {
    pub vertices: Vec<VertexInfo>,
    pub edges: Vec<[usize; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

impl TwoMapperComplex {
    pub fn simplices(&self) -> Vec<Simplex> {
        let mut out: Vec<Simplex> = self.vertices.iter().map(|v| Simplex::vertex(v.id)).collect();
        out.extend(self.edges.iter().map(|e| Simplex::edge(e[0], e[1])));
        out.extend(self.triangles.iter().map(|t| Simplex::triangle(t[0], t[1], t[2])));
        out
    }

    /// Checks face closure and vertex distinctness.
    pub fn is_closed(&self) -> bool {
        let vs: BTreeSet<usize> = self.vertices.iter().map(|v| v.id).collect();
        let es: BTreeSet<[usize; 2]> = self.edges.iter().copied().collect();
        self.edges.iter().all(|e| e[0] < e[1] && vs.contains(&e[0]) && vs.contains(&e[1]))
            && self.triangles.iter().all(|t| {
                t[0] < t[1]
                    && t[1] < t[2]
                    && es.contains(&[t[0], t[1]])
                    && es.contains(&[t[0], t[2]])
                    && es.contains(&[t[1], t[2]])
            })
    }
}

/// Builds the 2-Mapper complex of `cc`. Noise nodes become vertices only
/// when `include_noise` is set.
pub fn build_two_mapper(cc: &ClusterCover, include_noise: bool) -> TwoMapperComplex {
    build_two_mapper_with(&cc.nodes, include_noise, Execution::default())
}

pub fn build_two_mapper_with(nodes: &[ClusterNode], include_noise: bool, exec: Execution) -> TwoMapperComplex {
    let nodes: Vec<&ClusterNode> = nodes.iter().filter(|n| include_noise || !n.is_noise).collect();
    let by_id: HashMap<usize, &ClusterNode> = nodes.iter().map(|n| (n.id, *n)).collect();

    // Point -> nodes containing it; pairs sharing a point are edges.
    let mut owners: HashMap<usize, Vec<usize>> = HashMap::new();
    for n in &nodes {
        for &p in &n.members {
            owners.entry(p).or_default().push(n.id);
        }
    }
    let mut edges: BTreeSet<[usize; 2]> = BTreeSet::new();
    for list in owners.values() {
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i + 1..] {
                edges.insert([a.min(b), a.max(b)]);
            }
        }
    }

    // Triangles of the edge graph, confirmed by a triple intersection.
    let mut adj: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for e in &edges {
        adj.entry(e[0]).or_default().insert(e[1]);
        adj.entry(e[1]).or_default().insert(e[0]);
    }
    let edge_list: Vec<[usize; 2]> = edges.iter().copied().collect();
    let found = exec.map(&edge_list, |&[a, b]| {
        let (na, nb) = (&adj[&a], &adj[&b]);
        let common: Vec<usize> = na.range(b + 1..).filter(|c| nb.contains(c)).copied().collect();
        if common.is_empty() {
            return Vec::new();
        }
        let ab = intersect(&by_id[&a].members, &by_id[&b].members);
        common
            .into_iter()
            .filter(|c| ab.iter().any(|&p| by_id[c].contains(p)))
            .map(|c| [a, b, c])
            .collect::<Vec<_>>()
    });
    let triangles: Vec<[usize; 3]> = found.into_iter().flatten().collect::<BTreeSet<_>>().into_iter().collect();

    let mut vertices: Vec<VertexInfo> = nodes.iter().map(|n| VertexInfo::from(*n)).collect();
    vertices.sort_by_key(|v| v.id);
    TwoMapperComplex {
        vertices,
        edges: edge_list,
        triangles,
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// The Mapper graph: same vertices and edges, no triangles.
pub fn one_skeleton(complex: &TwoMapperComplex) -> TwoMapperComplex {
    TwoMapperComplex {
        triangles: Vec::new(),
        ..complex.clone()
    }
}

/// Z/2 Betti numbers up to `up_to_dim` (at most 2).
pub fn betti(complex: &TwoMapperComplex, up_to_dim: usize) -> Vec<usize> {
    let b = betti_numbers(&complex.simplices());
    b[..=up_to_dim.min(2)].to_vec()
}
