//! Brute-force reference implementations shared by the integration tests.
//! None of them call into the library's algorithms.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rank over Z/2 of a matrix given as rows of bits.
pub fn rank_z2(mut rows: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let words = rows.first().map_or(0, |r| r.len());
    for col in 0..words * 64 {
        let (w, b) = (col / 64, col % 64);
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] >> b & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] >> b & 1 == 1 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of the boundary map from `dim`-simplices to `(dim-1)`-simplices.
fn boundary_rank(by_dim: &[Vec<Vec<usize>>], dim: usize) -> usize {
    if dim == 0 || dim >= by_dim.len() || by_dim[dim].is_empty() {
        return 0;
    }
    let faces: BTreeMap<&Vec<usize>, usize> = by_dim[dim - 1].iter().enumerate().map(|(i, f)| (f, i)).collect();
    let words = faces.len().div_ceil(64).max(1);
    let rows = by_dim[dim]
        .iter()
        .map(|s| {
            let mut row = vec![0u64; words];
            for skip in 0..s.len() {
                let face: Vec<usize> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                let i = faces[&face];
                row[i / 64] ^= 1 << (i % 64);
            }
            row
        })
        .collect();
    rank_z2(rows)
}

/// Z/2 Betti numbers β₀..β₂ of a face-closed complex of sorted vertex lists,
/// by β_p = n_p − rank ∂_p − rank ∂_{p+1}.
pub fn betti_oracle(simplices: &[Vec<usize>]) -> [usize; 3] {
    let mut by_dim: Vec<Vec<Vec<usize>>> = vec![Vec::new(); 4];
    let set: BTreeSet<Vec<usize>> = simplices.iter().cloned().collect();
    for s in set {
        by_dim[s.len() - 1].push(s);
    }
    let ranks: Vec<usize> = (0..4).map(|d| boundary_rank(&by_dim, d)).collect();
    [0, 1, 2].map(|p| by_dim[p].len() - ranks[p] - ranks[p + 1])
}

/// Every nonempty proper-or-equal face of each simplex, added.
pub fn close_faces(simplices: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = BTreeSet::new();
    for s in simplices {
        let n = s.len();
        for mask in 1u32..(1 << n) {
            out.insert((0..n).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect::<Vec<_>>());
        }
    }
    out.into_iter().collect()
}

/// A random monotone filtration on at most `max_vertices` vertices with at
/// most `max_simplices` simplices of dimension <= 2 (and some of
/// dimension 3, so that β₂ classes die). Births are small integers.
pub fn random_filtration(seed: u64, max_vertices: usize, max_simplices: usize) -> Vec<(Vec<usize>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = rng.gen_range(1..=max_vertices);
    let mut births: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let tops = rng.gen_range(1..=12);
    for _ in 0..tops {
        let dim = rng.gen_range(0..=3usize).min(nv - 1);
        let mut vs: Vec<usize> = rand::seq::index::sample(&mut rng, nv, dim + 1).into_vec();
        vs.sort_unstable();
        let candidate = close_faces(&[vs.clone()]);
        let fresh = candidate.iter().filter(|f| !births.contains_key(*f)).count();
        if births.len() + fresh > max_simplices {
            continue;
        }
        let b = rng.gen_range(0..6) as f64;
        for f in candidate {
            let e = births.entry(f).or_insert(b);
            if b < *e {
                *e = b;
            }
        }
    }
    // Faces never later than cofaces: push births down to faces.
    let mut keys: Vec<Vec<usize>> = births.keys().cloned().collect();
    keys.sort_by_key(|k| std::cmp::Reverse(k.len()));
    for k in keys {
        let b = births[&k];
        for f in close_faces(&[k.clone()]) {
            let e = births.get_mut(&f).unwrap();
            if b < *e {
                *e = b;
            }
        }
    }
    births.into_iter().collect()
}

/// Edges and triangles of the nerve of `members`, by checking every pair and
/// every triple.
pub fn nerve_oracle(members: &[Vec<usize>]) -> (BTreeSet<[usize; 2]>, BTreeSet<[usize; 3]>) {
    let sets: Vec<BTreeSet<usize>> = members.iter().map(|m| m.iter().copied().collect()).collect();
    let n = sets.len();
    let mut edges = BTreeSet::new();
    let mut triangles = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            let ab: BTreeSet<usize> = sets[a].intersection(&sets[b]).copied().collect();
            if ab.is_empty() {
                continue;
            }
            edges.insert([a, b]);
            for c in b + 1..n {
                if ab.iter().any(|p| sets[c].contains(p)) {
                    triangles.insert([a, b, c]);
                }
            }
        }
    }
    (edges, triangles)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn brute_diameter(points: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max(dist(&points[i], &points[j]));
        }
    }
    d
}

/// DBSCAN by reachability closure: core points are those with at least
/// `min_pts` points (inclusive) within `radius`; clusters are the closures of
/// core points under direct density-reachability between cores; a non-core
/// point within `radius` of a core joins the cluster of its lowest-index
/// core neighbour. Returns clusters as sorted index lists ordered by their
/// smallest element, and the noise points.
pub fn dbscan_oracle(points: &[Vec<f64>], radius: f64, min_pts: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = points.len();
    let near = |i: usize, j: usize| dist(&points[i], &points[j]) <= radius;
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();
    let mut comp: Vec<Option<usize>> = vec![None; n];
    let mut n_comp = 0;
    for start in 0..n {
        if !core[start] || comp[start].is_some() {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = Some(n_comp);
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if core[j] && comp[j].is_none() && near(i, j) {
                    comp[j] = Some(n_comp);
                    stack.push(j);
                }
            }
        }
        n_comp += 1;
    }
    let mut label = comp.clone();
    for i in (0..n).filter(|&i| !core[i]) {
        label[i] = (0..n).find(|&j| core[j] && near(i, j)).and_then(|j| comp[j]);
    }
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); n_comp];
    let mut noise = Vec::new();
    for i in 0..n {
        match label[i] {
            Some(c) => clusters[c].push(i),
            None => noise.push(i),
        }
    }
    clusters.retain(|c| !c.is_empty());
    clusters.sort();
    (clusters, noise)
}

/// Non-core points adjacent to cores of at least two different clusters.
pub fn free_border_oracle(points: &[Vec<f64>], radius: f64, min_pts: usize) -> Vec<usize> {
    let n = points.len();
    let near = |i: usize, j: usize| dist(&points[i], &points[j]) <= radius;
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();
    let (clusters, _) = dbscan_oracle(points, radius, min_pts);
    let owner = |p: usize| clusters.iter().position(|c| c.contains(&p));
    (0..n)
        .filter(|&i| !core[i])
        .filter(|&i| {
            let owners: BTreeSet<Option<usize>> = (0..n).filter(|&j| core[j] && near(i, j)).map(owner).collect();
            owners.len() >= 2
        })
        .collect()
}

/// Endpoints `[lo, hi]` of interval `a` (0-based) on one axis, straight from
/// the cubical cover formula, without clamping.
pub fn interval(min: f64, max: f64, k: usize, g: f64, a: usize) -> (f64, f64) {
    let l = (max - min) / (k as f64 - (k as f64 - 1.0) * g);
    let center = min + a as f64 * (1.0 - g) * l + l / 2.0;
    (center - l / 2.0, center + l / 2.0)
}

pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect()
}

/// Points scattered around a few random centres, so that DBSCAN finds
/// several clusters and some noise.
pub fn clumpy_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let count = rng.gen_range(1..=4);
    let centres = random_cloud(rng, count, dim, 3.0);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.1) {
                (0..dim).map(|_| rng.gen_range(-4.0..4.0)).collect()
            } else {
                let c = &centres[rng.gen_range(0..centres.len())];
                c.iter().map(|x| x + rng.gen_range(-0.6..0.6)).collect()
            }
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A two-stage collapse instance: `(cover index, members)` clusters of a
/// stage and of a coarser stage whose clusters are unions of same-index
/// clusters of the first. At least one pair of clusters merges. The first
/// stage has at most `max_nodes` clusters.
pub fn collapse_instance(seed: u64, max_nodes: usize) -> (Vec<(usize, Vec<usize>)>, Vec<(usize, Vec<usize>)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let points = rng.gen_range(8..40);
        let indices = rng.gen_range(2..=8);
        let mut fine = Vec::new();
        let mut coarse = Vec::new();
        let mut merged = false;
        for a in 0..indices {
            let size = rng.gen_range(2..=points.min(12));
            let mut set = rand::seq::index::sample(&mut rng, points, size).into_vec();
            set.sort_unstable();
            let parts = rng.gen_range(1..=size.min(4));
            let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); parts];
            for (i, &p) in set.iter().enumerate() {
                let c = if i < parts { i } else { rng.gen_range(0..parts) };
                clusters[c].push(p);
            }
            let groups = rng.gen_range(1..=parts);
            let mut unions: Vec<Vec<usize>> = vec![Vec::new(); groups];
            for (i, c) in clusters.iter().enumerate() {
                let g = if i < groups { i } else { rng.gen_range(0..groups) };
                unions[g].extend(c);
            }
            merged |= groups < parts;
            for c in clusters {
                fine.push((a, c));
            }
            for mut u in unions {
                u.sort_unstable();
                coarse.push((a, u));
            }
        }
        if merged && fine.len() <= max_nodes {
            return (fine, coarse);
        }
    }
}
