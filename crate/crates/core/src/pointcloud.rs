//! Point clouds, synthetic manifold samplers, lenses and diameters.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Inputs above this size get the approximate diameter.
pub const EXACT_DIAMETER_LIMIT: usize = 5000;

/// Read access shared by point clouds and lens images.
pub trait Points: Sync {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn point(&self, i: usize) -> &[f64];

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A finite set of points in R^n, stored row-major. Point ids are the row
/// indices `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyInput("point cloud"))?.len();
        if dim == 0 {
            return Err(Error::param("points must have dimension >= 1"));
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::param(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("points must have dimension >= 1"));
        }
        if coords.is_empty() {
            return Err(Error::EmptyInput("point cloud"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::param(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Writes the cloud in the same comma-separated dialect `load_csv` reads.
    /// Lines starting with `#` are comments.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl Points for PointCloud {
    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

/// Lens values f(x), aligned by point id with the source cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct LensImage {
    values: PointCloud,
}

impl LensImage {
    pub fn values(&self) -> &PointCloud {
        &self.values
    }
}

impl Points for LensImage {
    fn dim(&self) -> usize {
        self.values.dim
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn point(&self, i: usize) -> &[f64] {
        self.values.point(i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lens {
    /// Keep the listed coordinates, in order.
    Projection(Vec<usize>),
    Identity,
}

impl Lens {
    pub fn output_dim(&self, input_dim: usize) -> usize {
        match self {
            Lens::Projection(axes) => axes.len(),
            Lens::Identity => input_dim,
        }
    }

    pub fn validate(&self, input_dim: usize) -> Result<()> {
        if let Lens::Projection(axes) = self {
            if axes.is_empty() {
                return Err(Error::param("projection lens needs at least one axis"));
            }
            for (i, &a) in axes.iter().enumerate() {
                if a >= input_dim {
                    return Err(Error::param(format!(
                        "lens axis {a} out of range for dimension {input_dim}"
                    )));
                }
                if axes[..i].contains(&a) {
                    return Err(Error::param(format!("lens axis {a} repeated")));
                }
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for Lens {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Lens::Identity => write!(f, "identity"),
            Lens::Projection(axes) => {
                let s: Vec<String> = axes.iter().map(|a| a.to_string()).collect();
                write!(f, "{}", s.join(","))
            }
        }
    }
}

pub fn apply_lens(cloud: &PointCloud, lens: &Lens) -> Result<LensImage> {
    lens.validate(cloud.dim)?;
    let values = match lens {
        Lens::Identity => cloud.clone(),
        Lens::Projection(axes) => {
            let mut coords = Vec::with_capacity(axes.len() * cloud.len());
            for p in cloud.iter() {
                coords.extend(axes.iter().map(|&a| p[a]));
            }
            PointCloud {
                dim: axes.len(),
                coords,
            }
        }
    };
    Ok(LensImage { values })
}

fn check_radii(major: f64, minor: f64) -> Result<()> {
    if !(minor > 0.0 && minor.is_finite() && major.is_finite()) {
        return Err(Error::param("radii must be positive and finite"));
    }
    if minor >= major {
        return Err(Error::param(format!(
            "minor radius {minor} must be smaller than major radius {major} (self-intersecting torus)"
        )));
    }
    Ok(())
}

fn sample_angles(n_points: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n_points == 0 {
        return Err(Error::param("n_points must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_points)
        .map(|_| (rng.gen::<f64>() * TAU, rng.gen::<f64>() * TAU))
        .collect())
}

/// Torus in R^3 with (u, v) drawn uniformly from [0, 2π)².
pub fn generate_torus(n_points: usize, major: f64, minor: f64, seed: u64) -> Result<PointCloud> {
    check_radii(major, minor)?;
    let mut coords = Vec::with_capacity(3 * n_points);
    for (u, v) in sample_angles(n_points, seed)? {
        let ring = major + minor * v.cos();
        coords.extend_from_slice(&[ring * u.cos(), ring * u.sin(), minor * v.sin()]);
    }
    Ok(PointCloud { dim: 3, coords })
}

/// Klein bottle in R^4:
/// ((R + r cos v) cos u, (R + r cos v) sin u, r sin v cos(u/2), r sin v sin(u/2)).
pub fn generate_klein_bottle(
    n_points: usize,
    major: f64,
    minor: f64,
    seed: u64,
) -> Result<PointCloud> {
    check_radii(major, minor)?;
    let mut coords = Vec::with_capacity(4 * n_points);
    for (u, v) in sample_angles(n_points, seed)? {
        let ring = major + minor * v.cos();
        let (hs, hc) = (u / 2.0).sin_cos();
        coords.extend_from_slice(&[
            ring * u.cos(),
            ring * u.sin(),
            minor * v.sin() * hc,
            minor * v.sin() * hs,
        ]);
    }
    Ok(PointCloud { dim: 4, coords })
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, &path.display().to_string(), has_header)
}

/// Parses comma-separated rows of floats. Blank lines and lines starting
/// with `#` are skipped; row numbers in errors are 1-based line numbers.
pub fn parse_csv(text: &str, name: &str, has_header: bool) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut dim = None;
    let mut coords = Vec::new();
    let mut header_pending = has_header;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: name.to_string(),
            row: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            value: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if header_pending {
            header_pending = false;
            continue;
        }
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                path: name.to_string(),
                row,
                expected,
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: name.to_string(),
                row,
                column: col + 1,
                value: field.to_string(),
            })?;
            coords.push(value);
        }
    }
    match dim {
        None => Err(Error::EmptyInput("csv file has no data rows")),
        Some(d) => PointCloud::from_flat(d, coords),
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diameter {
    pub value: f64,
    /// False when computed by the double farthest-point sweep, which
    /// returns a lower bound no smaller than half the true diameter.
    pub exact: bool,
}

pub fn diameter<P: Points + ?Sized>(points: &P) -> Result<Diameter> {
    diameter_with(points, Execution::default())
}

pub fn diameter_with<P: Points + ?Sized>(points: &P, exec: Execution) -> Result<Diameter> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyInput("diameter of an empty set"));
    }
    if n <= EXACT_DIAMETER_LIMIT {
        let d2 = exec.max_range(n, |i| {
            let p = points.point(i);
            (i + 1..n)
                .map(|j| dist2(p, points.point(j)))
                .fold(0.0, f64::max)
        });
        return Ok(Diameter {
            value: d2.sqrt(),
            exact: true,
        });
    }
    let farthest = |from: usize| {
        let p = points.point(from);
        (0..n)
            .map(|j| (dist2(p, points.point(j)), j))
            .fold((0.0, from), |best, c| if c.0 > best.0 { c } else { best })
    };
    let (_, a) = farthest(0);
    let (d2, _) = farthest(a);
    Ok(Diameter {
        value: d2.sqrt(),
        exact: false,
    })
}

/// Diameter of the subset `ids` (always exact).
pub fn subset_diameter<P: Points + ?Sized>(points: &P, ids: &[usize]) -> f64 {
    let mut best = 0.0f64;
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            best = best.max(dist2(points.point(a), points.point(b)));
        }
    }
    best.sqrt()
}

/// Mean distance from each point to its `k`-th nearest neighbour.
pub fn mean_knn_distance(cloud: &PointCloud, k: usize, exec: Execution) -> Result<f64> {
    let n = cloud.len();
    if k == 0 || n <= k {
        return Err(Error::param(format!(
            "need more than {k} points for a {k}-nearest-neighbour radius"
        )));
    }
    let kth = exec.map_range(n, |i| {
        let p = cloud.point(i);
        let mut best = vec![f64::INFINITY; k];
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = dist2(p, cloud.point(j));
            if d < best[k - 1] {
                let pos = best.partition_point(|&b| b <= d);
                best.insert(pos, d);
                best.pop();
            }
        }
        best[k - 1].sqrt()
    });
    Ok(kth.iter().sum::<f64>() / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows_and_header() {
        let c = parse_csv("0,0\n1,1\n", "t", false).unwrap();
        assert_eq!((c.len(), c.dim()), (2, 2));
        assert_eq!(c.point(1), &[1.0, 1.0]);
        let c = parse_csv("x,y\n3,4\n", "t", true).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.point(0), &[3.0, 4.0]);
    }

    #[test]
    fn csv_errors() {
        match parse_csv("0,0\n1,1,1\n", "t", false) {
            Err(Error::RaggedRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_csv("0,0\n1,zz\n", "t", false) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_csv("", "t", false), Err(Error::EmptyInput(_))));
        assert!(matches!(
            parse_csv("x,y\n", "t", true),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn csv_comments_are_skipped() {
        let c = parse_csv("# meta\n1,2\n", "t", false).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn lens_projection_and_identity() {
        let c = PointCloud::new(vec![vec![1.0, 2.0, 3.0]]).unwrap();
        let img = apply_lens(&c, &Lens::Projection(vec![0, 1])).unwrap();
        assert_eq!(img.point(0), &[1.0, 2.0]);
        let img = apply_lens(&c, &Lens::Projection(vec![2])).unwrap();
        assert_eq!(img.point(0), &[3.0]);
        let img = apply_lens(&c, &Lens::Identity).unwrap();
        assert_eq!(img.values(), &c);
        assert!(apply_lens(&c, &Lens::Projection(vec![3])).is_err());
        assert!(apply_lens(&c, &Lens::Projection(vec![1, 1])).is_err());
    }

    #[test]
    fn diameter_small_cases() {
        let c = PointCloud::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(diameter(&c).unwrap().value, 5.0);
        let c = PointCloud::new(vec![vec![1.0, 1.0]]).unwrap();
        assert_eq!(diameter(&c).unwrap().value, 0.0);
    }

    #[test]
    fn single_torus_point_in_annulus() {
        let c = generate_torus(1, 2.0, 1.0, 0).unwrap();
        let p = c.point(0);
        let rho2 = p[0] * p[0] + p[1] * p[1];
        assert!((1.0..=9.0).contains(&rho2));
    }

    #[test]
    fn self_intersecting_torus_rejected() {
        assert!(generate_torus(10, 1.0, 1.0, 0).is_err());
        assert!(generate_klein_bottle(10, 1.0, 2.0, 0).is_err());
        assert!(generate_torus(0, 2.0, 1.0, 0).is_err());
    }

    #[test]
    fn klein_point_identity() {
        let c = generate_klein_bottle(1, 2.0, 1.0, 0).unwrap();
        let p = c.point(0);
        assert!(p[2] * p[2] + p[3] * p[3] <= 1.0 + 1e-12);
    }

    #[test]
    fn knn_on_a_line() {
        let c = PointCloud::new((0..5).map(|i| vec![i as f64]).collect()).unwrap();
        // 3rd neighbours: 0->3, 1->2, 2->2, 3->2, 4->3
        let m = mean_knn_distance(&c, 3, Execution::Sequential).unwrap();
        assert!((m - 12.0 / 5.0).abs() < 1e-12);
    }
}
