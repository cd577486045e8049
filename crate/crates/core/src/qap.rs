//! Instances, solution encoding and objective evaluation for QAP and mQAP.

use std::fmt;

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Objective value type. Exact integer arithmetic throughout.
pub type Cost = i64;

/// Dense square matrix of non-negative integers, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    data: Vec<Cost>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0; n * n],
        }
    }

    /// Builds an `n x n` matrix from row-major data; rejects negative entries.
    pub fn from_row_major(n: usize, data: Vec<Cost>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid(format!(
                "matrix data has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        if let Some(pos) = data.iter().position(|&v| v < 0) {
            return Err(Error::invalid(format!(
                "negative matrix entry {} at ({}, {})",
                data[pos],
                pos / n,
                pos % n
            )));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<Cost>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::invalid(format!(
                "row of length {} in a matrix with {} rows",
                bad.len(),
                n
            )));
        }
        Self::from_row_major(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cost {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Cost) {
        self.data[i * self.n + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Cost] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[Cost] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }
}

/// Assignment of facilities to locations: `self[i]` is the location of facility `i`.
///
/// Always a bijection on `0..n`. External formats are 1-based for QAPLIB
/// solutions; conversion happens in [`crate::io`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        if !is_bijection(&mapping) {
            return Err(Error::invalid(format!(
                "{:?} is not a permutation of 0..{}",
                mapping,
                mapping.len()
            )));
        }
        Ok(Self(mapping))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn random(n: usize, rng: &mut RandomSource) -> Self {
        let mut p: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut p);
        Self(p)
    }

    /// Wraps a mapping the caller has already guaranteed to be a bijection.
    pub(crate) fn from_vec_unchecked(mapping: Vec<usize>) -> Self {
        debug_assert!(is_bijection(&mapping));
        Self(mapping)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Exchanges the locations of facilities `r` and `s`.
    pub fn swap(&mut self, r: usize, s: usize) {
        self.0.swap(r, s);
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [usize] {
        &mut self.0
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

pub fn is_bijection(mapping: &[usize]) -> bool {
    let n = mapping.len();
    let mut seen = vec![false; n];
    for &v in mapping {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// Vector of objective values, one per flow matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectiveVector(pub Vec<Cost>);

impl ObjectiveVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Cost] {
        &self.0
    }
}

impl From<Vec<Cost>> for ObjectiveVector {
    fn from(v: Vec<Cost>) -> Self {
        Self(v)
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Single-objective Koopmans-Beckmann instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QapInstance {
    flow: Matrix,
    distance: Matrix,
}

impl QapInstance {
    pub fn new(flow: Matrix, distance: Matrix) -> Result<Self> {
        if flow.n() != distance.n() {
            return Err(Error::invalid(format!(
                "flow is {0}x{0} but distance is {1}x{1}",
                flow.n(),
                distance.n()
            )));
        }
        if flow.n() < 2 {
            return Err(Error::invalid(format!("n = {} < 2", flow.n())));
        }
        Ok(Self { flow, distance })
    }

    pub fn n(&self) -> usize {
        self.flow.n()
    }

    pub fn flow(&self) -> &Matrix {
        &self.flow
    }

    pub fn distance(&self) -> &Matrix {
        &self.distance
    }

    fn check(&self, perm: &Permutation) -> Result<()> {
        if perm.len() != self.n() {
            return Err(Error::invalid(format!(
                "permutation of size {} for instance of size {}",
                perm.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// Full double-sum cost `sum_ij f_ij * d_{p(i) p(j)}`.
    pub fn evaluate(&self, perm: &Permutation) -> Result<Cost> {
        self.check(perm)?;
        Ok(self.cost(perm.as_slice()))
    }

    /// Cost change from exchanging the locations of facilities `r` and `s`, in O(n).
    pub fn delta_swap(&self, perm: &Permutation, r: usize, s: usize) -> Result<Cost> {
        self.check(perm)?;
        let n = self.n();
        if r >= n || s >= n {
            return Err(Error::invalid(format!(
                "swap indices ({r}, {s}) out of range for n = {n}"
            )));
        }
        if r == s {
            return Err(Error::invalid(format!(
                "swap indices must differ, got ({r}, {s})"
            )));
        }
        Ok(self.swap_delta(perm.as_slice(), r, s))
    }

    #[inline]
    pub(crate) fn cost(&self, p: &[usize]) -> Cost {
        flow_cost(&self.flow, &self.distance, p)
    }

    #[inline]
    pub(crate) fn swap_delta(&self, p: &[usize], r: usize, s: usize) -> Cost {
        flow_swap_delta(&self.flow, &self.distance, p, r, s)
    }
}

pub(crate) fn flow_cost(flow: &Matrix, dist: &Matrix, p: &[usize]) -> Cost {
    let mut total = 0;
    for (i, &pi) in p.iter().enumerate() {
        let frow = flow.row(i);
        let drow = dist.row(pi);
        for (j, &pj) in p.iter().enumerate() {
            total += frow[j] * drow[pj];
        }
    }
    total
}

/// General (asymmetric) O(n) swap delta.
pub(crate) fn flow_swap_delta(a: &Matrix, b: &Matrix, p: &[usize], r: usize, s: usize) -> Cost {
    let (pr, ps) = (p[r], p[s]);
    let mut d = (a.get(r, r) - a.get(s, s)) * (b.get(ps, ps) - b.get(pr, pr))
        + (a.get(r, s) - a.get(s, r)) * (b.get(ps, pr) - b.get(pr, ps));
    for (k, &pk) in p.iter().enumerate() {
        if k == r || k == s {
            continue;
        }
        d += (a.get(k, r) - a.get(k, s)) * (b.get(pk, ps) - b.get(pk, pr))
            + (a.get(r, k) - a.get(s, k)) * (b.get(ps, pk) - b.get(pr, pk));
    }
    d
}

/// Multiobjective instance: `m` flow matrices sharing one distance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MqapInstance {
    flows: Vec<Matrix>,
    distance: Matrix,
}

impl MqapInstance {
    pub fn new(flows: Vec<Matrix>, distance: Matrix) -> Result<Self> {
        if flows.is_empty() {
            return Err(Error::invalid(
                "an mQAP instance needs at least one flow matrix",
            ));
        }
        let n = distance.n();
        if n < 2 {
            return Err(Error::invalid(format!("n = {n} < 2")));
        }
        if let Some((p, f)) = flows.iter().enumerate().find(|(_, f)| f.n() != n) {
            return Err(Error::invalid(format!(
                "flow {} is {1}x{1} but distance is {2}x{2}",
                p,
                f.n(),
                n
            )));
        }
        Ok(Self { flows, distance })
    }

    pub fn n(&self) -> usize {
        self.distance.n()
    }

    /// Number of objectives.
    pub fn m(&self) -> usize {
        self.flows.len()
    }

    pub fn flows(&self) -> &[Matrix] {
        &self.flows
    }

    pub fn distance(&self) -> &Matrix {
        &self.distance
    }

    /// The single-objective instance for flow `p`.
    pub fn objective(&self, p: usize) -> Result<QapInstance> {
        let flow = self.flows.get(p).ok_or_else(|| {
            Error::invalid(format!("objective {p} out of range for m = {}", self.m()))
        })?;
        QapInstance::new(flow.clone(), self.distance.clone())
    }

    pub fn evaluate_multi(&self, perm: &Permutation) -> Result<ObjectiveVector> {
        if perm.len() != self.n() {
            return Err(Error::invalid(format!(
                "permutation of size {} for instance of size {}",
                perm.len(),
                self.n()
            )));
        }
        Ok(self.costs(perm.as_slice()))
    }

    pub(crate) fn costs(&self, p: &[usize]) -> ObjectiveVector {
        ObjectiveVector(
            self.flows
                .iter()
                .map(|f| flow_cost(f, &self.distance, p))
                .collect(),
        )
    }

    /// Objective vector after swapping `r` and `s`, given the current vector.
    pub(crate) fn swapped_costs(
        &self,
        p: &[usize],
        current: &ObjectiveVector,
        r: usize,
        s: usize,
    ) -> ObjectiveVector {
        ObjectiveVector(
            self.flows
                .iter()
                .zip(&current.0)
                .map(|(f, &c)| c + flow_swap_delta(f, &self.distance, p, r, s))
                .collect(),
        )
    }
}
