//! DBSCAN over cover-set preimages and the resulting cluster covers.
//!
//! Clustering happens in the ambient space of the cloud, never in lens space.
//! A point is *core* when at least `min_pts` points (itself included) lie
//! within `radius`. Clusters are the connected components of core points;
//! a non-core point within `radius` of some core point joins the cluster of
//! its lowest-id core neighbour; everything else is noise.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cover::{sample_subset, trial_seeds, SubsetTrials, TowerLevel, Witness};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pointcloud::{diameter_with, dist2, subset_diameter, Diameter, PointCloud, Points};

/// The constant of the cluster-cover goodness guarantee.
pub const CLUSTER_GOOD_C: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DbscanParams {
    pub radius: f64,
    pub min_pts: usize,
}

impl DbscanParams {
    pub fn new(radius: f64, min_pts: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(format!("DBSCAN radius must be positive, got {radius}")));
        }
        if min_pts == 0 {
            return Err(Error::param("min_pts must be >= 1"));
        }
        Ok(DbscanParams { radius, min_pts })
    }

    /// `min_pts = 2`, where every clustered point is a core point.
    pub fn with_radius(radius: f64) -> Result<Self> {
        Self::new(radius, 2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    /// Per input point: cluster label or `None` for noise.
    pub labels: Vec<Option<usize>>,
    pub core: Vec<bool>,
    pub n_clusters: usize,
}

impl Labeling {
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(c) = l {
                out[*c].push(i);
            }
        }
        out
    }

    pub fn noise(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i].is_none()).collect()
    }
}

/// Uniform grid over (up to) the first three coordinates with cell size
/// `radius`. Distances in the full space dominate the projected ones, so
/// the 3^g surrounding cells hold every neighbour.
struct Grid {
    cell: f64,
    axes: usize,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl Grid {
    fn new<P: Points + ?Sized>(points: &P, ids: &[usize], cell: f64) -> Grid {
        let axes = points.dim().min(3);
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (local, &id) in ids.iter().enumerate() {
            buckets
                .entry(Self::key(points.point(id), cell, axes))
                .or_default()
                .push(local);
        }
        Grid { cell, axes, buckets }
    }

    fn key(p: &[f64], cell: f64, axes: usize) -> [i64; 3] {
        let mut k = [0i64; 3];
        for (a, slot) in k.iter_mut().enumerate().take(axes) {
            *slot = (p[a] / cell).floor() as i64;
        }
        k
    }

    fn for_each_candidate(&self, p: &[f64], mut f: impl FnMut(usize)) {
        let base = Self::key(p, self.cell, self.axes);
        let span = |a: usize| if a < self.axes { -1..=1 } else { 0..=0 };
        for dx in span(0) {
            for dy in span(1) {
                for dz in span(2) {
                    if let Some(b) = self.buckets.get(&[base[0] + dx, base[1] + dy, base[2] + dz]) {
                        b.iter().for_each(|&j| f(j));
                    }
                }
            }
        }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

struct DbscanRun {
    labeling: Labeling,
    neighbours: Vec<Vec<usize>>,
}

fn run_dbscan<P: Points + ?Sized>(points: &P, ids: &[usize], params: &DbscanParams) -> Result<DbscanRun> {
    if ids.is_empty() {
        return Err(Error::EmptyInput("DBSCAN input"));
    }
    let n = ids.len();
    let r2 = params.radius * params.radius;
    let grid = Grid::new(points, ids, params.radius);
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let p = points.point(ids[i]);
            let mut nb = Vec::new();
            grid.for_each_candidate(p, |j| {
                if j != i && dist2(p, points.point(ids[j])) <= r2 {
                    nb.push(j);
                }
            });
            nb.sort_unstable();
            nb
        })
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() + 1 >= params.min_pts).collect();

    let mut parent: Vec<usize> = (0..n).collect();
    for i in (0..n).filter(|&i| core[i]) {
        for &j in neighbours[i].iter().filter(|&&j| core[j] && j > i) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut root: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if core[i] {
            root[i] = Some(find(&mut parent, i));
        } else if let Some(&c) = neighbours[i].iter().find(|&&j| core[j]) {
            root[i] = Some(find(&mut parent, c));
        }
    }
    // Label clusters in order of their smallest member.
    let mut relabel: HashMap<usize, usize> = HashMap::new();
    let labels: Vec<Option<usize>> = root
        .iter()
        .map(|r| {
            r.map(|r| {
                let next = relabel.len();
                *relabel.entry(r).or_insert(next)
            })
        })
        .collect();
    Ok(DbscanRun {
        labeling: Labeling {
            labels,
            core,
            n_clusters: relabel.len(),
        },
        neighbours,
    })
}

/// DBSCAN on the points `ids` (ascending) of `points`. Labels align with `ids`.
pub fn dbscan<P: Points + ?Sized>(points: &P, ids: &[usize], params: &DbscanParams) -> Result<Labeling> {
    Ok(run_dbscan(points, ids, params)?.labeling)
}

/// Border points within `radius` of core points from two or more clusters.
/// Returned as point ids. Always empty for `min_pts <= 2`.
pub fn detect_free_border_points<P: Points + ?Sized>(
    points: &P,
    ids: &[usize],
    params: &DbscanParams,
) -> Result<Vec<usize>> {
    let run = run_dbscan(points, ids, params)?;
    let lab = &run.labeling;
    let mut out = Vec::new();
    for i in 0..ids.len() {
        if lab.core[i] {
            continue;
        }
        let mut seen: Option<usize> = None;
        for &j in run.neighbours[i].iter().filter(|&&j| lab.core[j]) {
            let c = lab.labels[j].expect("core points are labelled");
            match seen {
                None => seen = Some(c),
                Some(s) if s != c => {
                    out.push(ids[i]);
                    break;
                }
                _ => {}
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterNode {
    pub id: usize,
    pub cover_index: Vec<usize>,
    pub local: usize,
    /// Point ids, ascending.
    pub members: Vec<usize>,
    pub is_noise: bool,
}

impl ClusterNode {
    pub fn contains(&self, point: usize) -> bool {
        self.members.binary_search(&point).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterCover {
    /// The tower scale of the level this cover was built from.
    pub scale: f64,
    /// Diameter of the underlying cover sets.
    pub resolution: f64,
    pub params: DbscanParams,
    pub nodes: Vec<ClusterNode>,
}

impl ClusterCover {
    pub fn clusters(&self) -> impl Iterator<Item = &ClusterNode> {
        self.nodes.iter().filter(|n| !n.is_noise)
    }
}

/// Point ids whose lens values lie in each set of `level`.
pub fn preimages<P: Points + ?Sized>(image: &P, level: &TowerLevel, exec: Execution) -> Vec<Vec<usize>> {
    exec.map(&level.sets, |set| {
        (0..image.len()).filter(|&i| set.contains(image.point(i))).collect()
    })
}

pub fn cluster_cover<P: Points + ?Sized>(
    cloud: &PointCloud,
    image: &P,
    level: &TowerLevel,
    params: &DbscanParams,
) -> Result<ClusterCover> {
    cluster_cover_with(cloud, image, level, params, Execution::default())
}

pub fn cluster_cover_with<P: Points + ?Sized>(
    cloud: &PointCloud,
    image: &P,
    level: &TowerLevel,
    params: &DbscanParams,
    exec: Execution,
) -> Result<ClusterCover> {
    if cloud.len() != image.len() {
        return Err(Error::param("lens image is not aligned with the point cloud"));
    }
    let pre = preimages(image, level, exec);
    let labelled = exec.map_range(level.sets.len(), |s| {
        if pre[s].is_empty() {
            Ok(None)
        } else {
            dbscan(cloud, &pre[s], params).map(Some)
        }
    });
    let mut nodes = Vec::new();
    for (s, lab) in labelled.into_iter().enumerate() {
        let Some(lab) = lab? else { continue };
        let index = &level.sets[s].index;
        let mut groups: Vec<(Vec<usize>, bool)> = lab
            .clusters()
            .into_iter()
            .map(|c| (c.into_iter().map(|i| pre[s][i]).collect(), false))
            .collect();
        let noise: Vec<usize> = lab.noise().into_iter().map(|i| pre[s][i]).collect();
        if !noise.is_empty() {
            groups.push((noise, true));
        }
        for (local, (members, is_noise)) in groups.into_iter().enumerate() {
            nodes.push(ClusterNode {
                id: nodes.len(),
                cover_index: index.clone(),
                local,
                members,
                is_noise,
            });
        }
    }
    Ok(ClusterCover {
        scale: level.scale,
        resolution: level.resolution(),
        params: *params,
        nodes,
    })
}

/// Containment map between cluster covers at two scales of one tower.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterMap {
    pub map: BTreeMap<usize, usize>,
}

impl ClusterMap {
    /// `other ∘ self`.
    pub fn then(&self, other: &ClusterMap) -> Option<ClusterMap> {
        let mut map = BTreeMap::new();
        for (&a, b) in &self.map {
            map.insert(a, *other.map.get(b)?);
        }
        Some(ClusterMap { map })
    }
}

/// Maps each non-noise cluster of `from` to the cluster of `to` with the same
/// cover index that contains all of its members.
pub fn cluster_map(from: &ClusterCover, to: &ClusterCover) -> Result<ClusterMap> {
    let mut owner: HashMap<&[usize], HashMap<usize, usize>> = HashMap::new();
    for n in to.clusters() {
        let slot = owner.entry(n.cover_index.as_slice()).or_default();
        for &p in &n.members {
            slot.insert(p, n.id);
        }
    }
    let mut map = BTreeMap::new();
    for n in from.clusters() {
        let violation = || Error::ContainmentViolation {
            cluster: n.id,
            index: n.cover_index.clone(),
        };
        let slot = owner.get(n.cover_index.as_slice()).ok_or_else(violation)?;
        let mut target = None;
        for p in &n.members {
            let t = slot.get(p).ok_or_else(violation)?;
            if *target.get_or_insert(*t) != *t {
                return Err(violation());
            }
        }
        map.insert(n.id, target.ok_or_else(violation)?);
    }
    Ok(ClusterMap { map })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterGoodReport {
    pub c: f64,
    /// Largest lens-space diameter of a base-level cluster.
    pub cluster_resolution: f64,
    /// Resolution of the underlying cubical tower.
    pub cover_resolution: f64,
    pub diameter: Diameter,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub condition_ii_detail: Option<String>,
    pub condition_iii: SubsetTrials,
}

impl ClusterGoodReport {
    pub fn passed(&self) -> bool {
        self.condition_i && self.condition_ii && self.condition_iii.ok()
    }
}

/// Goodness of a tower of cluster covers (ordered by increasing scale).
/// Diameters are taken in lens space, where the cover sets live.
pub fn check_cluster_cover_good<P: Points + ?Sized>(
    levels: &[ClusterCover],
    image: &P,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<ClusterGoodReport> {
    let base = levels.first().ok_or(Error::EmptyInput("cluster cover tower"))?;
    let diameter = diameter_with(image, exec)?;
    let c = CLUSTER_GOOD_C;

    let mut detail = None;
    let mut s_prime = 0.0f64;
    for (li, level) in levels.iter().enumerate() {
        let clusters: Vec<&ClusterNode> = level.clusters().collect();
        let diams = exec.map(&clusters, |n| subset_diameter(image, &n.members));
        if li == 0 {
            s_prime = diams.iter().copied().fold(0.0, f64::max);
        }
        if detail.is_none() {
            if let Some((n, d)) = clusters
                .iter()
                .zip(&diams)
                .find(|(_, &d)| d > level.resolution * (1.0 + 1e-12))
            {
                detail = Some(format!(
                    "cluster {} at scale {} has diameter {d} > {}",
                    n.id, level.scale, level.resolution
                ));
            }
        }
    }

    let mut covered: Vec<usize> = base.clusters().flat_map(|n| n.members.iter().copied()).collect();
    covered.sort_unstable();
    covered.dedup();
    let outcomes = exec.map(&trial_seeds(seed, trials), |&ts| {
        let mut rng = ChaCha8Rng::seed_from_u64(ts);
        let mut t = SubsetTrials {
            requested: 1,
            ..Default::default()
        };
        let Some((ids, d)) = sample_subset(&mut rng, &covered, image, s_prime) else {
            t.no_candidate = 1;
            return t;
        };
        let target = c * d;
        let witness = Witness {
            point_ids: ids.clone(),
            diameter: d,
            target_scale: target,
        };
        // Resolutions are recomputed from set widths and can sit an ulp below
        // the nominal scale.
        match levels.iter().find(|l| l.resolution >= target * (1.0 - 1e-12)) {
            None => {
                t.skipped = 1;
                t.witness = Some(witness);
            }
            Some(level) => {
                t.evaluated = 1;
                if level.clusters().any(|n| ids.iter().all(|&p| n.contains(p))) {
                    t.passed = 1;
                } else {
                    t.failed = 1;
                    t.witness = Some(witness);
                }
            }
        }
        t
    });
    let condition_iii = outcomes
        .into_iter()
        .fold(SubsetTrials::default(), SubsetTrials::merge);
    let s = base.resolution;
    Ok(ClusterGoodReport {
        c,
        cluster_resolution: s_prime,
        cover_resolution: s,
        diameter,
        condition_i: s_prime <= s && s <= diameter.value,
        condition_ii: detail.is_none(),
        condition_ii_detail: detail,
        condition_iii,
    })
}

/// Mean distance to the third nearest neighbour, used when no DBSCAN radius
/// is given.
pub fn knn_radius(cloud: &PointCloud, exec: Execution) -> Result<f64> {
    crate::pointcloud::mean_knn_distance(cloud, 3, exec)
}
