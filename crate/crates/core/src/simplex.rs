//! Simplices and filtered complexes with simplex-tree semantics: every face
//! of a stored simplex is stored too, born no later than the simplex.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};

/// A simplex as its sorted, distinct vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts and deduplicates `vertices`; the result may have lower dimension
    /// than the input length suggests.
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        assert!(!vertices.is_empty(), "a simplex needs at least one vertex");
        Simplex(vertices)
    }

    pub fn vertex(v: usize) -> Self {
        Simplex(vec![v])
    }

    pub fn edge(a: usize, b: usize) -> Self {
        Simplex::new(vec![a, b])
    }

    pub fn triangle(a: usize, b: usize, c: usize) -> Self {
        Simplex::new(vec![a, b, c])
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Codimension-one faces, in lexicographic order.
    pub fn boundary(&self) -> Vec<Simplex> {
        if self.0.len() == 1 {
            return Vec::new();
        }
        let mut out: Vec<Simplex> = (0..self.0.len())
            .map(|skip| {
                Simplex(
                    self.0
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect(),
                )
            })
            .collect();
        out.sort();
        out
    }

    /// Every nonempty face, the simplex itself included.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        (1u32..(1 << n))
            .map(|mask| {
                Simplex(
                    (0..n)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| self.0[i])
                        .collect(),
                )
            })
            .collect()
    }

    /// Relabels vertices through `f`; repeated images collapse the dimension.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> Simplex {
        Simplex::new(self.0.iter().map(|&v| f(v)).collect())
    }
}

impl From<&[usize]> for Simplex {
    fn from(v: &[usize]) -> Self {
        Simplex::new(v.to_vec())
    }
}

/// Filtration order: birth, then dimension, then vertex ids.
pub fn filtration_cmp(a: &(Simplex, f64), b: &(Simplex, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then(a.0.dim().cmp(&b.0.dim()))
        .then_with(|| a.0.cmp(&b.0))
}

/// Simplices (dimension <= 2 in practice) with their birth values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilteredComplex {
    births: BTreeMap<Simplex, f64>,
}

impl FilteredComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores entries verbatim, without face completion. Used to feed
    /// externally built filtrations through validation.
    pub fn from_entries(entries: impl IntoIterator<Item = (Simplex, f64)>) -> Self {
        FilteredComplex {
            births: entries.into_iter().collect(),
        }
    }

    /// Inserts `simplex` and any missing face at `birth`. A simplex already
    /// present keeps the earlier of its two births.
    pub fn insert(&mut self, simplex: &Simplex, birth: f64) {
        for face in simplex.faces() {
            let e = self.births.entry(face).or_insert(birth);
            if birth < *e {
                *e = birth;
            }
        }
    }

    pub fn birth(&self, simplex: &Simplex) -> Option<f64> {
        self.births.get(simplex).copied()
    }

    pub fn len(&self) -> usize {
        self.births.len()
    }

    pub fn is_empty(&self) -> bool {
        self.births.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, f64)> {
        self.births.iter().map(|(s, b)| (s, *b))
    }

    /// Entries in filtration order.
    pub fn sorted(&self) -> Vec<(Simplex, f64)> {
        let mut v: Vec<(Simplex, f64)> = self.births.iter().map(|(s, b)| (s.clone(), *b)).collect();
        v.sort_by(filtration_cmp);
        v
    }

    /// Simplices born at or before `t`.
    pub fn slice(&self, t: f64) -> BTreeSet<Simplex> {
        self.births
            .iter()
            .filter(|(_, &b)| b <= t)
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Distinct birth values, ascending.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.births.values().copied().collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Every face present and born no later than its cofaces.
    pub fn validate(&self) -> Result<()> {
        for (s, &b) in &self.births {
            for face in s.boundary() {
                match self.births.get(&face) {
                    Some(&fb) if fb <= b => {}
                    other => {
                        return Err(Error::NonMonotone {
                            simplex: s.vertices().to_vec(),
                            birth: b,
                            face: face.vertices().to_vec(),
                            face_birth: other.copied().unwrap_or(f64::NAN),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    /// Counts of (vertices, edges, triangles) alive at `t`.
    pub fn counts_at(&self, t: f64) -> [usize; 3] {
        let mut c = [0; 3];
        for (s, &b) in &self.births {
            if b <= t && s.dim() <= 2 {
                c[s.dim()] += 1;
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        assert_eq!(Simplex::triangle(3, 1, 2).vertices(), &[1, 2, 3]);
        assert_eq!(Simplex::triangle(1, 1, 2), Simplex::edge(1, 2));
    }

    #[test]
    fn faces_and_boundary() {
        let t = Simplex::triangle(0, 1, 2);
        assert_eq!(t.faces().len(), 7);
        assert_eq!(
            t.boundary(),
            vec![Simplex::edge(0, 1), Simplex::edge(0, 2), Simplex::edge(1, 2)]
        );
        assert!(Simplex::vertex(4).boundary().is_empty());
    }

    #[test]
    fn insert_completes_faces() {
        let mut f = FilteredComplex::new();
        f.insert(&Simplex::edge(0, 1), 0.0);
        f.insert(&Simplex::triangle(0, 1, 2), 1.0);
        assert_eq!(f.len(), 7);
        assert_eq!(f.birth(&Simplex::vertex(2)), Some(1.0));
        assert_eq!(f.birth(&Simplex::vertex(0)), Some(0.0));
        f.validate().unwrap();
        assert_eq!(f.counts_at(0.0), [2, 1, 0]);
        assert_eq!(f.critical_values(), vec![0.0, 1.0]);
    }

    #[test]
    fn validate_rejects_early_coface() {
        let f = FilteredComplex::from_entries([
            (Simplex::vertex(0), 0.0),
            (Simplex::vertex(1), 2.0),
            (Simplex::edge(0, 1), 1.0),
        ]);
        match f.validate() {
            Err(Error::NonMonotone { simplex, .. }) => assert_eq!(simplex, vec![0, 1]),
            other => panic!("{other:?}"),
        }
    }
}
