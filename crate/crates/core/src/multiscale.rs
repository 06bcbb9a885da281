//! Multiscale 2-Mapper.
//!
//! Consecutive 2-Mapper complexes of a tower are aligned by Jaccard
//! best-matching of clusters with the same cover index. Global vertex ids
//! travel along the matching: a matched cluster inherits the id of its
//! predecessor, and when several predecessors collapse into one cluster the
//! largest keeps the id while the others are re-inserted with cone simplices
//! (see [`align`]). The union over stages is a filtered complex indexed by the
//! tower scale.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::clustering::{cluster_cover_with, ClusterCover, ClusterNode, DbscanParams};
use crate::cover::{Tower, TowerMode};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::nerve::build_two_mapper_with;
use crate::pointcloud::{PointCloud, Points};
use crate::simplex::{FilteredComplex, Simplex};

/// Anything with a cover index and a member set.
pub trait Cluster: Sync {
    fn cover_index(&self) -> &[usize];
    fn members(&self) -> &[usize];
}

impl Cluster for ClusterNode {
    fn cover_index(&self) -> &[usize] {
        &self.cover_index
    }
    fn members(&self) -> &[usize] {
        &self.members
    }
}

/// A vertex of an aligned stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageNode {
    pub id: usize,
    pub cover_index: Vec<usize>,
    /// Position among the stage's own clusters; `None` for re-inserted vertices.
    pub local: Option<usize>,
    pub members: Vec<usize>,
    pub reinserted: bool,
}

impl Cluster for StageNode {
    fn cover_index(&self) -> &[usize] {
        &self.cover_index
    }
    fn members(&self) -> &[usize] {
        &self.members
    }
}

/// One aligned 2-Mapper complex, in global vertex ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub scale: f64,
    pub nodes: Vec<StageNode>,
    pub simplices: BTreeSet<Simplex>,
}

impl Stage {
    /// The first stage: non-noise clusters get ids `0..n` in node order.
    pub fn initial(nodes: &[ClusterNode], scale: f64, exec: Execution) -> Stage {
        let clusters = renumber(nodes);
        let complex = build_two_mapper_with(&clusters, false, exec);
        Stage {
            scale,
            nodes: clusters
                .into_iter()
                .map(|n| StageNode {
                    id: n.id,
                    cover_index: n.cover_index,
                    local: Some(n.local),
                    members: n.members,
                    reinserted: false,
                })
                .collect(),
            simplices: complex.simplices().into_iter().collect(),
        }
    }

    pub fn adjacency(&self) -> HashMap<usize, BTreeSet<usize>> {
        let mut adj: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        for e in self.simplices.iter().filter(|s| s.dim() == 1) {
            let [a, b] = [e.vertices()[0], e.vertices()[1]];
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }
}

/// Non-noise nodes renumbered `0..n` in their original order.
fn renumber(nodes: &[ClusterNode]) -> Vec<ClusterNode> {
    nodes
        .iter()
        .filter(|n| !n.is_noise)
        .enumerate()
        .map(|(id, n)| ClusterNode { id, ..n.clone() })
        .collect()
}

/// Sparse Jaccard matrix; entries exist only for pairs sharing a cover index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JaccardMatrix {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col, |A ∩ B| / |A ∪ B|)`, sorted by row then column.
    pub entries: Vec<(usize, usize, f64)>,
    pub pair_evaluations: usize,
}

impl JaccardMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries
            .iter()
            .find(|e| e.0 == row && e.1 == col)
            .map(|e| e.2)
            .unwrap_or(0.0)
    }

    /// Row-wise argmax among positive entries; ties go to the lowest column.
    pub fn row_argmax(&self) -> Vec<Option<usize>> {
        let mut best: Vec<Option<(usize, f64)>> = vec![None; self.rows];
        for &(r, c, v) in &self.entries {
            if v <= 0.0 {
                continue;
            }
            match best[r] {
                Some((bc, bv)) if bv > v || (bv == v && bc < c) => {}
                _ => best[r] = Some((c, v)),
            }
        }
        best.into_iter().map(|b| b.map(|(c, _)| c)).collect()
    }
}

fn overlap(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let inter = overlap(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn jaccard_matrix<A: Cluster, B: Cluster>(rows: &[A], cols: &[B], exec: Execution) -> JaccardMatrix {
    let mut by_index: HashMap<&[usize], Vec<usize>> = HashMap::new();
    for (j, m) in cols.iter().enumerate() {
        by_index.entry(m.cover_index()).or_default().push(j);
    }
    let per_row = exec.map(rows, |n| {
        by_index
            .get(n.cover_index())
            .map(|cands| {
                cands
                    .iter()
                    .map(|&j| (j, jaccard(n.members(), cols[j].members())))
                    .collect::<Vec<_>>()
            })
            .unwrap_or_default()
    });
    let mut entries = Vec::new();
    for (i, row) in per_row.into_iter().enumerate() {
        entries.extend(row.into_iter().map(|(j, v)| (i, j, v)));
    }
    JaccardMatrix {
        rows: rows.len(),
        cols: cols.len(),
        pair_evaluations: entries.len(),
        entries,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseRecord {
    /// The id kept by the target cluster (the largest predecessor).
    pub kept: usize,
    pub reinserted: Vec<usize>,
    pub inserted: Vec<Simplex>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubleCollapse {
    pub edge: [usize; 2],
    pub targets: [usize; 2],
    pub inserted: Vec<Simplex>,
}

/// The matching from stage `stage` to stage `stage + 1`, in global ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentMap {
    pub stage: usize,
    pub phi: BTreeMap<usize, usize>,
    pub collapses: Vec<CollapseRecord>,
    pub double_collapses: Vec<DoubleCollapse>,
    /// Clusters of the next stage with no predecessor.
    pub fresh: Vec<usize>,
    pub pair_evaluations: usize,
    /// Simplices of the previous stage that had to be copied forward because
    /// the next stage did not already contain them. Zero on a valid tower.
    pub carried: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub map: AlignmentMap,
    /// The next stage after repair.
    pub stage: Stage,
    /// The next stage's own 2-Mapper complex, relabelled, before repair.
    pub unrepaired: BTreeSet<Simplex>,
}

/// Aligns `prev` with the clusters of the next tower level.
///
/// `next_nodes` are the next level's non-noise clusters (ids are ignored).
/// Fresh ids are drawn from `next_id`. For each next-stage cluster `m` whose
/// preimage under the best-match map holds two or more vertices, the largest
/// (`n_M`) gives `m` its id and every other `n` is re-inserted with
/// * the edge `(n, m)`,
/// * triangles `(o, n, m)` for each previous-stage neighbour `o` of `n`,
/// * triangles `(o1, o2, n)` for each previous-stage edge whose endpoints
///   both neighbour `n`.
///
/// Here `o` stands for its current image: its target, or itself once it has
/// been re-inserted. Fibers are processed in target order, members by id.
///
/// A previous-stage edge between two re-inserted vertices `n1`, `n2` with
/// distinct targets `t1`, `t2` also adds `(t1, t2, n1)` and `(t1, t2, n2)`.
pub fn align(
    prev: &Stage,
    prev_index: usize,
    next_nodes: &[ClusterNode],
    scale: f64,
    next_id: &mut usize,
    exec: Execution,
) -> Result<Alignment> {
    let next_nodes = renumber(next_nodes);
    let raw = build_two_mapper_with(&next_nodes, false, exec);

    let jac = jaccard_matrix(&prev.nodes, &next_nodes, exec);
    let best = jac.row_argmax();
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); next_nodes.len()];
    for (row, b) in best.iter().enumerate() {
        match b {
            Some(col) => fibers[*col].push(row),
            None => {
                return Err(Error::UnmatchedNode {
                    stage: prev_index,
                    node: prev.nodes[row].id,
                })
            }
        }
    }

    // Ids for next-stage clusters, and which previous vertices collapse.
    let mut target_id = vec![0usize; next_nodes.len()];
    let mut fresh = Vec::new();
    let mut collapsed: Vec<(usize, Vec<usize>)> = Vec::new();
    for (col, fiber) in fibers.iter().enumerate() {
        if fiber.is_empty() {
            target_id[col] = *next_id;
            fresh.push(*next_id);
            *next_id += 1;
            continue;
        }
        let keep = *fiber
            .iter()
            .max_by(|&&a, &&b| {
                let (na, nb) = (&prev.nodes[a], &prev.nodes[b]);
                na.members.len().cmp(&nb.members.len()).then(nb.id.cmp(&na.id))
            })
            .expect("nonempty fiber");
        target_id[col] = prev.nodes[keep].id;
        if fiber.len() >= 2 {
            let mut others: Vec<usize> = fiber.iter().filter(|&&r| r != keep).map(|&r| prev.nodes[r].id).collect();
            others.sort_unstable();
            collapsed.push((col, others));
        }
    }

    let mut phi = BTreeMap::new();
    for (row, b) in best.iter().enumerate() {
        phi.insert(prev.nodes[row].id, target_id[b.expect("checked above")]);
    }
    let mut reinserted_target: BTreeMap<usize, usize> = BTreeMap::new();
    for (col, others) in &collapsed {
        for &n in others {
            phi.insert(n, n);
            reinserted_target.insert(n, target_id[*col]);
        }
    }

    let unrepaired: BTreeSet<Simplex> = raw
        .simplices()
        .iter()
        .map(|s| s.map(|v| target_id[v]))
        .collect();
    let mut simplices = unrepaired.clone();
    let mut add = |s: Simplex, log: &mut Vec<Simplex>| {
        for f in s.faces() {
            simplices.insert(f);
        }
        log.push(s);
    };

    let adj = prev.adjacency();
    let empty = BTreeSet::new();
    let prev_edges: Vec<[usize; 2]> = prev
        .simplices
        .iter()
        .filter(|s| s.dim() == 1)
        .map(|s| [s.vertices()[0], s.vertices()[1]])
        .collect();

    // Where each previous vertex currently lives in the next stage. A
    // re-inserted vertex maps to itself from the moment it is processed, so
    // later cones see it rather than its target.
    let mut current: BTreeMap<usize, usize> = best
        .iter()
        .enumerate()
        .map(|(row, b)| (prev.nodes[row].id, target_id[b.expect("checked above")]))
        .collect();
    let mut collapses = Vec::new();
    for (col, others) in &collapsed {
        let m = target_id[*col];
        let mut inserted = Vec::new();
        for &n in others {
            current.insert(n, n);
            let nbrs = adj.get(&n).unwrap_or(&empty);
            add(Simplex::vertex(n), &mut inserted);
            add(Simplex::edge(n, m), &mut inserted);
            for &o in nbrs {
                add(Simplex::triangle(current[&o], n, m), &mut inserted);
            }
            for &[o1, o2] in &prev_edges {
                if nbrs.contains(&o1) && nbrs.contains(&o2) {
                    add(Simplex::triangle(current[&o1], current[&o2], n), &mut inserted);
                }
            }
        }
        collapses.push(CollapseRecord {
            kept: m,
            reinserted: others.clone(),
            inserted,
        });
    }

    let mut double_collapses = Vec::new();
    for &[n1, n2] in &prev_edges {
        if let (Some(&t1), Some(&t2)) = (reinserted_target.get(&n1), reinserted_target.get(&n2)) {
            if t1 == t2 {
                continue;
            }
            let mut inserted = Vec::new();
            add(Simplex::triangle(t1, t2, n1), &mut inserted);
            add(Simplex::triangle(t1, t2, n2), &mut inserted);
            double_collapses.push(DoubleCollapse {
                edge: [n1, n2],
                targets: [t1, t2],
                inserted,
            });
        }
    }

    let before = simplices.len();
    simplices.extend(prev.simplices.iter().cloned());
    let carried = simplices.len() - before;

    let mut nodes: Vec<StageNode> = next_nodes
        .into_iter()
        .enumerate()
        .map(|(col, n)| StageNode {
            id: target_id[col],
            cover_index: n.cover_index,
            local: Some(n.local),
            members: n.members,
            reinserted: false,
        })
        .collect();
    for p in &prev.nodes {
        if reinserted_target.contains_key(&p.id) {
            nodes.push(StageNode {
                reinserted: true,
                local: None,
                ..p.clone()
            });
        }
    }
    nodes.sort_by_key(|n| n.id);

    Ok(Alignment {
        map: AlignmentMap {
            stage: prev_index,
            phi,
            collapses,
            double_collapses,
            fresh,
            pair_evaluations: jac.pair_evaluations,
            carried,
        },
        stage: Stage {
            scale,
            nodes,
            simplices,
        },
        unrepaired,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// A cluster of the first stage.
    Initial,
    /// A cluster with no predecessor at a later stage.
    Fresh,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineageEntry {
    pub stage: usize,
    pub cover_index: Vec<usize>,
    pub local: Option<usize>,
    pub reinserted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexRecord {
    pub first_stage: usize,
    pub birth: f64,
    pub origin: Origin,
    pub lineage: Vec<LineageEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleResult {
    pub mode: TowerMode,
    pub scales: Vec<f64>,
    pub filtered: FilteredComplex,
    pub stages: Vec<Stage>,
    pub alignments: Vec<AlignmentMap>,
    pub registry: BTreeMap<usize, VertexRecord>,
    pub cluster_covers: Vec<ClusterCover>,
    pub stage_times: Vec<Duration>,
}

impl MultiscaleResult {
    /// Filtering at each stage scale reproduces that stage exactly.
    pub fn slices_consistent(&self) -> bool {
        self.stages
            .iter()
            .all(|st| self.filtered.slice(st.scale) == st.simplices)
    }

    /// Every vertex of stage `i + 1` is exactly one of: a φ-image, a
    /// re-inserted vertex, or a fresh vertex.
    pub fn vertex_partition_holds(&self) -> bool {
        self.alignments.iter().all(|a| {
            let next = &self.stages[a.stage + 1];
            let reinserted: BTreeSet<usize> = a.collapses.iter().flat_map(|c| c.reinserted.iter().copied()).collect();
            let images: BTreeSet<usize> = a
                .phi
                .iter()
                .filter(|(n, _)| !reinserted.contains(n))
                .map(|(_, &m)| m)
                .collect();
            let fresh: BTreeSet<usize> = a.fresh.iter().copied().collect();
            let disjoint = images.is_disjoint(&reinserted) && images.is_disjoint(&fresh) && reinserted.is_disjoint(&fresh);
            let union: BTreeSet<usize> = images.union(&reinserted).chain(fresh.iter()).copied().collect();
            let vertices: BTreeSet<usize> = next.nodes.iter().map(|n| n.id).collect();
            disjoint && union == vertices
        })
    }
}

/// Builds the multiscale 2-Mapper of `cloud` over `tower`. Noise clusters are
/// dropped; the DBSCAN parameters are shared by every level.
pub fn build_multiscale<P: Points + ?Sized>(
    cloud: &PointCloud,
    image: &P,
    tower: &Tower,
    params: &DbscanParams,
) -> Result<MultiscaleResult> {
    build_multiscale_with(cloud, image, tower, params, Execution::default())
}

pub fn build_multiscale_with<P: Points + ?Sized>(
    cloud: &PointCloud,
    image: &P,
    tower: &Tower,
    params: &DbscanParams,
    exec: Execution,
) -> Result<MultiscaleResult> {
    let mut stages: Vec<Stage> = Vec::with_capacity(tower.levels.len());
    let mut alignments = Vec::new();
    let mut registry: BTreeMap<usize, VertexRecord> = BTreeMap::new();
    let mut filtered = FilteredComplex::new();
    let mut covers = Vec::new();
    let mut stage_times = Vec::new();
    let mut next_id = 0;

    for (i, level) in tower.levels.iter().enumerate() {
        let started = Instant::now();
        let cc = cluster_cover_with(cloud, image, level, params, exec).map_err(|e| e.at_stage(i))?;
        let stage = if i == 0 {
            let st = Stage::initial(&cc.nodes, level.scale, exec);
            next_id = st.nodes.len();
            for n in &st.nodes {
                registry.insert(
                    n.id,
                    VertexRecord {
                        first_stage: 0,
                        birth: level.scale,
                        origin: Origin::Initial,
                        lineage: Vec::new(),
                    },
                );
            }
            st
        } else {
            let a = align(&stages[i - 1], i - 1, &cc.nodes, level.scale, &mut next_id, exec)
                .map_err(|e| e.at_stage(i))?;
            for &f in &a.map.fresh {
                registry.insert(
                    f,
                    VertexRecord {
                        first_stage: i,
                        birth: level.scale,
                        origin: Origin::Fresh,
                        lineage: Vec::new(),
                    },
                );
            }
            alignments.push(a.map);
            a.stage
        };
        for n in &stage.nodes {
            if let Some(rec) = registry.get_mut(&n.id) {
                rec.lineage.push(LineageEntry {
                    stage: i,
                    cover_index: n.cover_index.clone(),
                    local: n.local,
                    reinserted: n.reinserted,
                });
            }
        }
        for s in &stage.simplices {
            filtered.insert(s, level.scale);
        }
        covers.push(cc);
        stages.push(stage);
        stage_times.push(started.elapsed());
    }
    filtered.validate()?;
    Ok(MultiscaleResult {
        mode: tower.mode,
        scales: tower.levels.iter().map(|l| l.scale).collect(),
        filtered,
        stages,
        alignments,
        registry,
        cluster_covers: covers,
        stage_times,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub stages: usize,
    pub nodes_per_stage: Vec<usize>,
    pub pair_evaluations: Vec<usize>,
    pub total_pair_evaluations: usize,
    pub max_nodes: usize,
    pub mean_nodes: f64,
    /// `(stages - 1) · max_nodes²`.
    pub bound: usize,
    pub within_bound: bool,
    pub wall_time_ms: f64,
}

pub fn complexity_probe(result: &MultiscaleResult) -> ComplexityReport {
    let nodes: Vec<usize> = result.stages.iter().map(|s| s.nodes.len()).collect();
    let pairs: Vec<usize> = result.alignments.iter().map(|a| a.pair_evaluations).collect();
    let total: usize = pairs.iter().sum();
    let max = nodes.iter().copied().max().unwrap_or(0);
    let n = nodes.len();
    let bound = n.saturating_sub(1) * max * max;
    ComplexityReport {
        stages: n,
        mean_nodes: if n == 0 { 0.0 } else { nodes.iter().sum::<usize>() as f64 / n as f64 },
        nodes_per_stage: nodes,
        pair_evaluations: pairs,
        total_pair_evaluations: total,
        max_nodes: max,
        bound,
        within_bound: total <= bound,
        wall_time_ms: result.stage_times.iter().map(|d| d.as_secs_f64() * 1e3).sum(),
    }
}
