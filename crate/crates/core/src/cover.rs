//! Cubical covers of a lens image and towers of them.
//!
//! A cubical cover with `k` intervals per axis and overlap fraction `g` over
//! the box `∏[m_i, M_i]` uses per-axis width `l_i = (M_i - m_i) / (k - (k-1) g)`
//! and centers `m_i + a (1-g) l_i + l_i / 2` for `a = 0..k`. Multi-indices are
//! 0-based throughout the crate.
//!
//! Two towers are supported:
//! * overlap mode: fixed `k`, an increasing schedule of overlap fractions;
//! * epsilon mode: a base `(k, g)` cover whose sets are grown symmetrically
//!   until each set has diameter `ε`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pointcloud::{diameter_with, subset_diameter, Diameter, Points};

const PAD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundingBox {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl BoundingBox {
    pub fn new(mins: Vec<f64>, maxs: Vec<f64>) -> Result<Self> {
        if mins.len() != maxs.len() || mins.is_empty() {
            return Err(Error::param("bounding box needs matching, nonempty min/max vectors"));
        }
        if mins.iter().zip(&maxs).any(|(a, b)| !(a <= b)) {
            return Err(Error::param("bounding box has min > max"));
        }
        Ok(BoundingBox { mins, maxs })
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn extents(&self) -> Vec<f64> {
        self.mins.iter().zip(&self.maxs).map(|(a, b)| b - a).collect()
    }

    /// Widens zero-length axes by `max(1e-9, 1e-9 |m_i|)` on each side and
    /// returns the padded axes.
    pub fn padded(&self) -> (BoundingBox, Vec<usize>) {
        let mut out = self.clone();
        let mut axes = Vec::new();
        for i in 0..self.dim() {
            if self.maxs[i] - self.mins[i] <= 0.0 {
                let pad = PAD.max(PAD * self.mins[i].abs());
                out.mins[i] -= pad;
                out.maxs[i] += pad;
                axes.push(i);
            }
        }
        (out, axes)
    }
}

pub fn bounding_box<P: Points + ?Sized>(values: &P) -> Result<BoundingBox> {
    if values.is_empty() {
        return Err(Error::EmptyInput("bounding box of an empty image"));
    }
    let d = values.dim();
    let mut mins = vec![f64::INFINITY; d];
    let mut maxs = vec![f64::NEG_INFINITY; d];
    for i in 0..values.len() {
        for (j, &x) in values.point(i).iter().enumerate() {
            mins[j] = mins[j].min(x);
            maxs[j] = maxs[j].max(x);
        }
    }
    BoundingBox::new(mins, maxs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicalCoverSpec {
    pub k: usize,
    pub g: f64,
    pub dim: usize,
}

impl CubicalCoverSpec {
    pub fn new(k: usize, g: f64, dim: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be >= 1"));
        }
        if !(0.0..1.0).contains(&g) {
            return Err(Error::param(format!("overlap fraction {g} not in [0, 1)")));
        }
        if dim == 0 {
            return Err(Error::param("cover dimension must be >= 1"));
        }
        Ok(CubicalCoverSpec { k, g, dim })
    }

    /// `k < √n`: the cubical goodness theorem does not apply.
    pub fn below_sqrt_dim(&self) -> bool {
        ((self.k * self.k) as f64) < self.dim as f64
    }

    pub fn width_divisor(&self) -> f64 {
        self.k as f64 - (self.k as f64 - 1.0) * self.g
    }
}

/// An axis-aligned closed box `∏[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverSet {
    pub index: Vec<usize>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CoverSet {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn contains_set(&self, other: &CoverSet, slack: f64) -> bool {
        (0..self.lo.len())
            .all(|i| self.lo[i] <= other.lo[i] + slack && other.hi[i] <= self.hi[i] + slack)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).collect()
    }

    pub fn diameter(&self) -> f64 {
        norm2(&self.widths())
    }
}

/// One cover of a tower. `scale` is `ε` in epsilon mode and `g` in overlap mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TowerLevel {
    pub scale: f64,
    #[serde(skip)]
    pub widths: Vec<f64>,
    pub sets: Vec<CoverSet>,
}

impl TowerLevel {
    /// Common set diameter.
    pub fn resolution(&self) -> f64 {
        norm2(&self.widths)
    }

    pub fn sets_containing<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = &'a CoverSet> + 'a {
        self.sets.iter().filter(move |s| s.contains(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicalCover {
    pub spec: CubicalCoverSpec,
    /// The box actually covered (after padding degenerate axes).
    pub bbox: BoundingBox,
    pub widths: Vec<f64>,
    pub sets: Vec<CoverSet>,
    pub padded_axes: Vec<usize>,
}

impl CubicalCover {
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.spec.below_sqrt_dim() {
            w.push(format!(
                "k = {} is below sqrt(n) = {:.3}; the (3,s)-good guarantee does not apply",
                self.spec.k,
                (self.spec.dim as f64).sqrt()
            ));
        }
        if !self.padded_axes.is_empty() {
            w.push(format!(
                "degenerate bounding box on axes {:?}; padded",
                self.padded_axes
            ));
        }
        w
    }

    pub fn into_level(self, scale: f64) -> TowerLevel {
        TowerLevel {
            scale,
            widths: self.widths,
            sets: self.sets,
        }
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// All multi-indices of `{0..k}^n` in lexicographic order.
pub fn multi_indices(k: usize, n: usize) -> Vec<Vec<usize>> {
    let total = k.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        out.push(idx.clone());
        for axis in (0..n).rev() {
            idx[axis] += 1;
            if idx[axis] < k {
                break;
            }
            idx[axis] = 0;
        }
    }
    out
}

/// Builds a level whose axis-`i` intervals are the base intervals widened
/// symmetrically to `widths[i]`, with the outermost endpoints never inside
/// the box.
fn product_level(
    bbox: &BoundingBox,
    k: usize,
    g: f64,
    base_widths: &[f64],
    widths: Vec<f64>,
    scale: f64,
) -> TowerLevel {
    let n = bbox.dim();
    let axis: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|i| {
            (0..k)
                .map(|a| {
                    // Left edge of the base interval, grown symmetrically.
                    let left = bbox.mins[i] + a as f64 * (1.0 - g) * base_widths[i];
                    let mut lo = left - 0.5 * (widths[i] - base_widths[i]);
                    let mut hi = lo + widths[i];
                    if a == 0 {
                        lo = lo.min(bbox.mins[i]);
                    }
                    if a + 1 == k {
                        // Unwidened, the last interval ends at the box edge.
                        hi = if widths[i] == base_widths[i] { bbox.maxs[i] } else { hi.max(bbox.maxs[i]) };
                    }
                    (lo, hi)
                })
                .collect()
        })
        .collect();
    let sets = multi_indices(k, n)
        .into_iter()
        .map(|index| {
            let (lo, hi) = index.iter().enumerate().map(|(i, &a)| axis[i][a]).unzip();
            CoverSet { index, lo, hi }
        })
        .collect();
    TowerLevel {
        scale,
        widths,
        sets,
    }
}

pub fn build_cubical_cover(bbox: &BoundingBox, spec: &CubicalCoverSpec) -> Result<CubicalCover> {
    if bbox.dim() != spec.dim {
        return Err(Error::param(format!(
            "cover dimension {} does not match bounding box dimension {}",
            spec.dim,
            bbox.dim()
        )));
    }
    let (bbox, padded_axes) = bbox.padded();
    let widths: Vec<f64> = bbox
        .extents()
        .iter()
        .map(|e| e / spec.width_divisor())
        .collect();
    let level = product_level(&bbox, spec.k, spec.g, &widths, widths.clone(), spec.g);
    Ok(CubicalCover {
        spec: *spec,
        bbox,
        widths,
        sets: level.sets,
        padded_axes,
    })
}

/// Euclidean norm of the common width vector.
pub fn resolution(cover: &[CoverSet]) -> Result<f64> {
    let first = cover.first().ok_or(Error::EmptyInput("resolution of an empty cover"))?;
    let w0 = first.widths();
    for s in cover {
        for (a, b) in s.widths().iter().zip(&w0) {
            if (a - b).abs() > 1e-9 * b.abs().max(1.0) {
                return Err(Error::NonUniformCover(format!(
                    "set {:?} has widths {:?}, expected {:?}",
                    s.index,
                    s.widths(),
                    w0
                )));
            }
        }
    }
    Ok(norm2(&w0))
}

/// The per-axis growth `ε'` with `‖(l_1+ε', …, l_n+ε')‖₂ = ε`, the positive
/// root of `n ε'² + 2‖l‖₁ ε' - (ε² - s²) = 0`.
pub fn epsilon_prime(widths: &[f64], s: f64, eps: f64) -> Result<f64> {
    let n = widths.len() as f64;
    let tol = 1e-12 * s.max(1.0);
    if eps < s - tol {
        return Err(Error::Scale { eps, resolution: s });
    }
    let l1: f64 = widths.iter().sum();
    let rhs = (eps * eps - s * s).max(0.0);
    // Rationalised form of -l1/n + sqrt(l1²/n² + rhs/n); no cancellation.
    Ok(rhs / (l1 + (l1 * l1 + n * rhs).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerMode {
    Epsilon,
    Overlap,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// Diameters `ε`, each at least the base resolution.
    Epsilon(Vec<f64>),
    /// Overlap fractions `g` for a fixed `k`.
    Overlap(Vec<f64>),
}

impl Schedule {
    pub fn values(&self) -> &[f64] {
        match self {
            Schedule::Epsilon(v) | Schedule::Overlap(v) => v,
        }
    }

    pub fn mode(&self) -> TowerMode {
        match self {
            Schedule::Epsilon(_) => TowerMode::Epsilon,
            Schedule::Overlap(_) => TowerMode::Overlap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tower {
    pub mode: TowerMode,
    /// Base cover parameters; in overlap mode `g` is the first scheduled value.
    pub spec: CubicalCoverSpec,
    pub bbox: BoundingBox,
    #[serde(skip)]
    base_widths: Vec<f64>,
    pub levels: Vec<TowerLevel>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl Tower {
    /// The tower resolution `s`: diameter of the smallest level's sets.
    pub fn resolution(&self) -> f64 {
        self.levels[0].resolution()
    }

    pub fn max_scale(&self) -> f64 {
        self.levels.last().map(|l| l.scale).unwrap_or(0.0)
    }

    /// Epsilon mode only: the cover at an arbitrary `ε ≥ s`.
    pub fn level_at(&self, eps: f64) -> Result<TowerLevel> {
        if self.mode != TowerMode::Epsilon {
            return Err(Error::param("level_at is only defined for epsilon towers"));
        }
        let s = norm2(&self.base_widths);
        let grow = epsilon_prime(&self.base_widths, s, eps)?;
        let widths = self.base_widths.iter().map(|l| l + grow).collect();
        Ok(product_level(
            &self.bbox,
            self.spec.k,
            self.spec.g,
            &self.base_widths,
            widths,
            eps,
        ))
    }
}

pub fn build_tower(bbox: &BoundingBox, spec: &CubicalCoverSpec, schedule: &Schedule) -> Result<Tower> {
    let values = schedule.values();
    if values.is_empty() {
        return Err(Error::param("tower schedule is empty"));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param(format!(
            "tower schedule must be strictly increasing, got {values:?}"
        )));
    }
    match schedule {
        Schedule::Overlap(gs) => {
            let first = CubicalCoverSpec::new(spec.k, gs[0], spec.dim)?;
            let base = build_cubical_cover(bbox, &first)?;
            let warnings = base.warnings();
            let bbox = base.bbox.clone();
            let base_widths = base.widths.clone();
            let mut levels = Vec::with_capacity(gs.len());
            for &g in gs {
                let s = CubicalCoverSpec::new(spec.k, g, spec.dim)?;
                levels.push(build_cubical_cover(&bbox, &s)?.into_level(g));
            }
            Ok(Tower {
                mode: TowerMode::Overlap,
                spec: first,
                bbox,
                base_widths,
                levels,
                warnings,
            })
        }
        Schedule::Epsilon(eps) => {
            let base = build_cubical_cover(bbox, spec)?;
            let mut tower = Tower {
                mode: TowerMode::Epsilon,
                spec: *spec,
                warnings: base.warnings(),
                bbox: base.bbox,
                base_widths: base.widths,
                levels: Vec::new(),
            };
            for &e in eps {
                let level = tower.level_at(e)?;
                tower.levels.push(level);
            }
            Ok(tower)
        }
    }
}

// ---------------------------------------------------------------------------
// (c, s)-good checks
// ---------------------------------------------------------------------------

/// A subset `O` that falsified condition (iii), or was skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point_ids: Vec<usize>,
    pub diameter: f64,
    pub target_scale: f64,
}

/// Outcome of the randomized containment trials for condition (iii).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SubsetTrials {
    pub requested: usize,
    pub evaluated: usize,
    pub passed: usize,
    pub failed: usize,
    /// `c · diam(O)` exceeded the largest level.
    pub skipped: usize,
    /// No subset with `diam(O) > s` was found.
    pub no_candidate: usize,
    pub witness: Option<Witness>,
}

impl SubsetTrials {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.skipped == 0
    }

    pub fn merge(mut self, other: SubsetTrials) -> SubsetTrials {
        self.requested += other.requested;
        self.evaluated += other.evaluated;
        self.passed += other.passed;
        self.failed += other.failed;
        self.skipped += other.skipped;
        self.no_candidate += other.no_candidate;
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        self
    }

    fn single(outcome: SubsetOutcome) -> SubsetTrials {
        let mut t = SubsetTrials {
            requested: 1,
            ..Default::default()
        };
        match outcome {
            SubsetOutcome::Contained { .. } => {
                t.evaluated = 1;
                t.passed = 1;
            }
            SubsetOutcome::NotContained(w) => {
                t.evaluated = 1;
                t.failed = 1;
                t.witness = Some(w);
            }
            SubsetOutcome::Skipped(w) => {
                t.skipped = 1;
                t.witness = Some(w);
            }
            SubsetOutcome::NoCandidate => t.no_candidate = 1,
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubsetOutcome {
    /// Index of the first set containing the subset, and the level scale used.
    Contained { set: usize, scale: f64 },
    NotContained(Witness),
    Skipped(Witness),
    NoCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodCoverReport {
    pub c: f64,
    pub resolution: f64,
    pub diameter: Diameter,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub condition_ii_detail: Option<String>,
    pub condition_iii: SubsetTrials,
}

impl GoodCoverReport {
    pub fn passed(&self) -> bool {
        self.condition_i && self.condition_ii && self.condition_iii.ok()
    }
}

pub(crate) const MAX_SUBSET: usize = 8;
const SUBSET_ATTEMPTS: usize = 200;

/// Draws a random subset of `candidates` (2 to 8 points) with diameter
/// strictly greater than `min_diam`.
pub(crate) fn sample_subset<P: Points + ?Sized>(
    rng: &mut ChaCha8Rng,
    candidates: &[usize],
    image: &P,
    min_diam: f64,
) -> Option<(Vec<usize>, f64)> {
    if candidates.len() < 2 {
        return None;
    }
    let max = MAX_SUBSET.min(candidates.len());
    for _ in 0..SUBSET_ATTEMPTS {
        let size = rng.gen_range(2..=max);
        let mut ids: Vec<usize> = rand::seq::index::sample(rng, candidates.len(), size)
            .into_iter()
            .map(|i| candidates[i])
            .collect();
        ids.sort_unstable();
        let d = subset_diameter(image, &ids);
        if d > min_diam {
            return Some((ids, d));
        }
    }
    None
}

pub(crate) fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.gen()).collect()
}

fn level_for(tower: &Tower, target: f64) -> Option<TowerLevel> {
    match tower.mode {
        TowerMode::Epsilon => {
            if target <= tower.max_scale() * (1.0 + 1e-12) {
                tower.level_at(target.max(tower.resolution())).ok()
            } else {
                None
            }
        }
        TowerMode::Overlap => tower
            .levels
            .iter()
            .find(|l| l.resolution() >= target)
            .cloned(),
    }
}

/// Index of the first set in `level` containing every point of `ids`.
pub fn containing_set<P: Points + ?Sized>(level: &TowerLevel, image: &P, ids: &[usize]) -> Option<usize> {
    level
        .sets
        .iter()
        .position(|s| ids.iter().all(|&i| s.contains(image.point(i))))
}

/// Condition (iii) for one subset: `O` must lie in a single set of the level
/// at scale `c · diam(O)`.
pub fn check_subset<P: Points + ?Sized>(tower: &Tower, image: &P, ids: &[usize], c: f64) -> SubsetOutcome {
    let d = subset_diameter(image, ids);
    let target = c * d;
    let witness = Witness {
        point_ids: ids.to_vec(),
        diameter: d,
        target_scale: target,
    };
    match level_for(tower, target) {
        None => SubsetOutcome::Skipped(witness),
        Some(level) => match containing_set(&level, image, ids) {
            Some(set) => SubsetOutcome::Contained {
                set,
                scale: level.scale,
            },
            None => SubsetOutcome::NotContained(witness),
        },
    }
}

fn check_level_diameters(tower: &Tower) -> Option<String> {
    for level in &tower.levels {
        match tower.mode {
            TowerMode::Epsilon => {
                for s in &level.sets {
                    if (s.diameter() - level.scale).abs() > 1e-6 {
                        return Some(format!(
                            "set {:?} at ε = {} has diameter {}",
                            s.index,
                            level.scale,
                            s.diameter()
                        ));
                    }
                }
            }
            TowerMode::Overlap => {
                if let Err(e) = resolution(&level.sets) {
                    return Some(format!("level g = {}: {e}", level.scale));
                }
            }
        }
    }
    None
}

pub fn check_good_tower<P: Points + ?Sized>(
    tower: &Tower,
    image: &P,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<GoodCoverReport> {
    check_good_tower_with(tower, image, c, trials, seed, Execution::default())
}

pub fn check_good_tower_with<P: Points + ?Sized>(
    tower: &Tower,
    image: &P,
    c: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<GoodCoverReport> {
    let diameter = diameter_with(image, exec)?;
    let s = tower.resolution();
    let detail = check_level_diameters(tower);
    let candidates: Vec<usize> = (0..image.len()).collect();
    let outcomes = exec.map(&trial_seeds(seed, trials), |&ts| {
        let mut rng = ChaCha8Rng::seed_from_u64(ts);
        match sample_subset(&mut rng, &candidates, image, s) {
            None => SubsetOutcome::NoCandidate,
            Some((ids, _)) => check_subset(tower, image, &ids, c),
        }
    });
    let condition_iii = outcomes
        .into_iter()
        .map(SubsetTrials::single)
        .fold(SubsetTrials::default(), SubsetTrials::merge);
    Ok(GoodCoverReport {
        c,
        resolution: s,
        diameter,
        condition_i: s <= diameter.value,
        condition_ii: detail.is_none(),
        condition_ii_detail: detail,
        condition_iii,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::PointCloud;

    fn bbox1(a: f64, b: f64) -> BoundingBox {
        BoundingBox::new(vec![a], vec![b]).unwrap()
    }

    #[test]
    fn bbox_of_points() {
        let c = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap();
        let b = bounding_box(&c).unwrap();
        assert_eq!(b.mins, vec![0.0, 0.0]);
        assert_eq!(b.maxs, vec![1.0, 2.0]);
        let c = PointCloud::new(vec![vec![3.0, -1.0]]).unwrap();
        let b = bounding_box(&c).unwrap();
        assert_eq!(b.mins, b.maxs);
    }

    #[test]
    fn single_interval_covers_everything() {
        let cov = build_cubical_cover(&bbox1(0.0, 1.0), &CubicalCoverSpec::new(1, 0.5, 1).unwrap()).unwrap();
        assert_eq!(cov.sets.len(), 1);
        assert_eq!((cov.sets[0].lo[0], cov.sets[0].hi[0]), (0.0, 1.0));
        assert_eq!(cov.widths, vec![1.0]);
    }

    #[test]
    fn two_intervals_half_overlap() {
        let cov = build_cubical_cover(&bbox1(0.0, 2.0), &CubicalCoverSpec::new(2, 0.5, 1).unwrap()).unwrap();
        let l = 4.0 / 3.0;
        assert!((cov.widths[0] - l).abs() < 1e-15);
        let (a, b) = (&cov.sets[0], &cov.sets[1]);
        assert!((a.lo[0] - 0.0).abs() < 1e-15 && (a.hi[0] - l).abs() < 1e-15);
        assert!((b.lo[0] - 2.0 / 3.0).abs() < 1e-15 && (b.hi[0] - 2.0).abs() < 1e-15);
        assert!(((a.hi[0] - b.lo[0]) - 0.5 * l).abs() < 1e-12);
    }

    #[test]
    fn degenerate_axis_is_padded() {
        let b = BoundingBox::new(vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        let cov = build_cubical_cover(&b, &CubicalCoverSpec::new(2, 0.3, 2).unwrap()).unwrap();
        assert_eq!(cov.padded_axes, vec![0]);
        assert!(cov.widths[0] > 0.0);
        assert!(cov.warnings().iter().any(|w| w.contains("degenerate")));
        assert!(cov.sets.iter().any(|s| s.contains(&[1.0, 0.5])));
    }

    #[test]
    fn resolution_examples() {
        let s = CoverSet { index: vec![0], lo: vec![0.0], hi: vec![1.0] };
        assert_eq!(resolution(&[s]).unwrap(), 1.0);
        let s = CoverSet { index: vec![0, 0], lo: vec![0.0, 0.0], hi: vec![3.0, 4.0] };
        assert_eq!(resolution(&[s.clone()]).unwrap(), 5.0);
        let t = CoverSet { index: vec![0, 1], lo: vec![0.0, 0.0], hi: vec![3.0, 5.0] };
        assert!(matches!(resolution(&[s, t]), Err(Error::NonUniformCover(_))));
    }

    #[test]
    fn epsilon_prime_examples() {
        assert_eq!(epsilon_prime(&[1.0], 1.0, 1.0).unwrap(), 0.0);
        assert!((epsilon_prime(&[1.0], 1.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let s = 2f64.sqrt();
        assert!((epsilon_prime(&[1.0, 1.0], s, 2.0 * s).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(epsilon_prime(&[1.0], 1.0, 0.5), Err(Error::Scale { .. })));
    }

    #[test]
    fn overlap_tower_nests() {
        let spec = CubicalCoverSpec::new(2, 0.25, 1).unwrap();
        let t = build_tower(&bbox1(0.0, 2.0), &spec, &Schedule::Overlap(vec![0.25, 0.5])).unwrap();
        let (a, b) = (&t.levels[0], &t.levels[1]);
        assert!((a.sets[0].hi[0] - 8.0 / 7.0).abs() < 1e-12);
        assert!((a.sets[1].lo[0] - 6.0 / 7.0).abs() < 1e-12);
        for (x, y) in a.sets.iter().zip(&b.sets) {
            assert!(y.contains_set(x, 1e-12));
        }
    }

    #[test]
    fn epsilon_tower_base_level_matches_cover() {
        let b = BoundingBox::new(vec![0.0, -1.0], vec![2.0, 3.0]).unwrap();
        let spec = CubicalCoverSpec::new(3, 0.4, 2).unwrap();
        let cov = build_cubical_cover(&b, &spec).unwrap();
        let s = norm2(&cov.widths);
        let t = build_tower(&b, &spec, &Schedule::Epsilon(vec![s])).unwrap();
        for (x, y) in cov.sets.iter().zip(&t.levels[0].sets) {
            for i in 0..2 {
                assert!((x.lo[i] - y.lo[i]).abs() < 1e-12);
                assert!((x.hi[i] - y.hi[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn schedule_must_increase() {
        let spec = CubicalCoverSpec::new(2, 0.25, 1).unwrap();
        assert!(build_tower(&bbox1(0.0, 1.0), &spec, &Schedule::Overlap(vec![0.5, 0.25])).is_err());
        assert!(build_tower(&bbox1(0.0, 1.0), &spec, &Schedule::Overlap(vec![0.5, 0.5])).is_err());
    }

    #[test]
    fn sqrt_dim_warning() {
        assert!(CubicalCoverSpec::new(1, 0.0, 4).unwrap().below_sqrt_dim());
        assert!(!CubicalCoverSpec::new(2, 0.0, 4).unwrap().below_sqrt_dim());
        assert!(CubicalCoverSpec::new(0, 0.0, 1).is_err());
        assert!(CubicalCoverSpec::new(2, 1.0, 1).is_err());
    }
}
