//! Z/2 persistent homology by the standard column reduction.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::Result;
use crate::simplex::{FilteredComplex, Simplex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for essential classes.
    pub death: f64,
}

impl Interval {
    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    /// Born and killed at the same filtration value; kept so that Betti
    /// counts read off the barcode stay exact.
    pub fn is_zero_length(&self) -> bool {
        self.death == self.birth
    }

    pub fn contains(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Barcode {
    /// Sorted by (dim, birth, death).
    pub intervals: Vec<Interval>,
}

impl Barcode {
    pub fn of_dim(&self, dim: usize) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(move |i| i.dim == dim)
    }

    /// Number of `dim` intervals with `birth <= t < death`.
    pub fn betti_at(&self, t: f64, dim: usize) -> usize {
        self.of_dim(dim).filter(|i| i.contains(t)).count()
    }

    pub fn betti_curve(&self, dim: usize, scales: &[f64]) -> BettiCurve {
        BettiCurve {
            dim,
            samples: scales.iter().map(|&t| (t, self.betti_at(t, dim))).collect(),
        }
    }
}

pub fn betti_at(barcode: &Barcode, t: f64, dim: usize) -> usize {
    barcode.betti_at(t, dim)
}

pub fn betti_curve(barcode: &Barcode, dim: usize, scales: &[f64]) -> BettiCurve {
    barcode.betti_curve(dim, scales)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BettiCurve {
    pub dim: usize,
    pub samples: Vec<(f64, usize)>,
}

/// A maximal run of consecutive samples with the same Betti number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleRange {
    pub from: f64,
    pub to: f64,
    pub samples: usize,
}

impl BettiCurve {
    pub fn runs(&self) -> Vec<(usize, ScaleRange)> {
        let mut out: Vec<(usize, ScaleRange)> = Vec::new();
        for &(t, b) in &self.samples {
            match out.last_mut() {
                Some((v, r)) if *v == b => {
                    r.to = t;
                    r.samples += 1;
                }
                _ => out.push((b, ScaleRange { from: t, to: t, samples: 1 })),
            }
        }
        out
    }

    /// The longest run (by sample count, earliest on ties) where β = `target`.
    pub fn longest_range(&self, target: usize) -> Option<ScaleRange> {
        self.runs()
            .into_iter()
            .filter(|(v, _)| *v == target)
            .map(|(_, r)| r)
            .fold(None, |best: Option<ScaleRange>, r| match best {
                Some(b) if b.samples >= r.samples => Some(b),
                _ => Some(r),
            })
    }

    /// The longest range for every value the curve takes.
    pub fn selection(&self) -> BTreeMap<usize, ScaleRange> {
        let mut out = BTreeMap::new();
        for (v, _) in self.runs() {
            out.entry(v).or_insert_with(|| self.longest_range(v).expect("value occurs"));
        }
        out
    }
}

fn add_columns(target: &mut Vec<usize>, other: &[usize]) {
    let mut out = Vec::with_capacity(target.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < other.len() {
        match target[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                out.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&target[i..]);
    out.extend_from_slice(&other[j..]);
    *target = out;
}

pub fn reduce(filtered: &FilteredComplex) -> Result<Barcode> {
    filtered.validate()?;
    let order = filtered.sorted();
    let index: HashMap<&Simplex, usize> = order.iter().enumerate().map(|(i, (s, _))| (s, i)).collect();
    let mut columns: Vec<Vec<usize>> = order
        .iter()
        .map(|(s, _)| {
            let mut col: Vec<usize> = s.boundary().iter().map(|f| index[f]).collect();
            col.sort_unstable();
            col
        })
        .collect();

    let n = order.len();
    let mut pivot_col: Vec<Option<usize>> = vec![None; n];
    let mut paired = vec![false; n];
    let mut intervals = Vec::new();
    for j in 0..n {
        let mut col = std::mem::take(&mut columns[j]);
        while let Some(&low) = col.last() {
            match pivot_col[low] {
                Some(k) => add_columns(&mut col, &columns[k]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_col[low] = Some(j);
            paired[low] = true;
            paired[j] = true;
            intervals.push(Interval {
                dim: order[low].0.dim(),
                birth: order[low].1,
                death: order[j].1,
            });
        }
        columns[j] = col;
    }
    for i in 0..n {
        if !paired[i] {
            intervals.push(Interval {
                dim: order[i].0.dim(),
                birth: order[i].1,
                death: f64::INFINITY,
            });
        }
    }
    intervals.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
    });
    Ok(Barcode { intervals })
}

/// Z/2 Betti numbers (β₀, β₁, β₂) of a face-closed complex.
pub fn betti_numbers<'a>(simplices: impl IntoIterator<Item = &'a Simplex>) -> [usize; 3] {
    let mut f = FilteredComplex::new();
    for s in simplices {
        f.insert(s, 0.0);
    }
    let bars = reduce(&f).expect("constant filtrations are monotone");
    [0, 1, 2].map(|d| bars.betti_at(0.0, d))
}
