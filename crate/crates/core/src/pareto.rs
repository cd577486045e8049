//! Dominance, nondominated sorting, the solution archive and quality metrics.
//!
//! All objectives are minimized.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::qap::{Cost, MqapInstance, ObjectiveVector, Permutation};

/// Largest `n` accepted by [`brute_force_front`].
pub const BRUTE_FORCE_LIMIT: usize = 11;

/// `a` dominates `b`: no worse in every objective, strictly better in one.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "objective vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(dominates_slice(a.as_slice(), b.as_slice()))
}

#[inline]
pub(crate) fn dominates_slice(a: &[Cost], b: &[Cost]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

fn check_lengths(vectors: &[ObjectiveVector]) -> Result<usize> {
    let m = vectors
        .first()
        .ok_or_else(|| Error::invalid("empty set of objective vectors"))?
        .len();
    if let Some(v) = vectors.iter().find(|v| v.len() != m) {
        return Err(Error::invalid(format!(
            "mixed objective counts {} and {}",
            m,
            v.len()
        )));
    }
    Ok(m)
}

/// Rank of each vector (0 = nondominated), aligned with the input order.
pub fn fast_nondominated_sort(vectors: &[ObjectiveVector]) -> Result<Vec<usize>> {
    check_lengths(vectors)?;
    Ok(nondominated_ranks(vectors))
}

pub(crate) fn nondominated_ranks(vectors: &[ObjectiveVector]) -> Vec<usize> {
    let n = vectors.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (vectors[i].as_slice(), vectors[j].as_slice());
            if dominates_slice(a, b) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_slice(b, a) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }

    let mut rank = vec![0usize; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut r = 0;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            rank[i] = r;
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        front = next;
        r += 1;
    }
    rank
}

/// Crowding distance of each member of `front` (indices into `vectors`),
/// aligned with `front`. Boundary points get `f64::INFINITY`.
pub fn crowding_distance(vectors: &[ObjectiveVector], front: &[usize]) -> Vec<f64> {
    let k = front.len();
    let mut dist = vec![0.0; k];
    if k == 0 {
        return dist;
    }
    if k <= 2 {
        return vec![f64::INFINITY; k];
    }
    let m = vectors[front[0]].len();
    let mut order: Vec<usize> = (0..k).collect();
    for obj in 0..m {
        let value = |pos: usize| vectors[front[pos]].0[obj];
        order.sort_by_key(|&pos| (value(pos), pos));
        let lo = value(order[0]);
        let hi = value(order[k - 1]);
        dist[order[0]] = f64::INFINITY;
        dist[order[k - 1]] = f64::INFINITY;
        let spread = (hi - lo) as f64;
        if spread <= 0.0 {
            continue;
        }
        for w in 1..k - 1 {
            let gap = (value(order[w + 1]) - value(order[w - 1])) as f64;
            dist[order[w]] += gap / spread;
        }
    }
    dist
}

/// Indices of `vectors` sorted best-first by (rank ascending, crowding
/// descending, index ascending). Ties resolve by input position so the order
/// is deterministic.
pub fn rank_crowding_order(vectors: &[ObjectiveVector]) -> Vec<usize> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let ranks = nondominated_ranks(vectors);
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let mut crowd = vec![0.0; vectors.len()];
    for r in 0..=max_rank {
        let front: Vec<usize> = (0..vectors.len()).filter(|&i| ranks[i] == r).collect();
        for (pos, d) in front.iter().zip(crowding_distance(vectors, &front)) {
            crowd[*pos] = d;
        }
    }
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| {
        ranks[a]
            .cmp(&ranks[b])
            .then_with(|| crowd[b].partial_cmp(&crowd[a]).unwrap_or(Ordering::Equal))
            .then_with(|| a.cmp(&b))
    });
    order
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchiveMember {
    pub objectives: ObjectiveVector,
    pub perm: Permutation,
    /// Set once local search has scanned this member's neighbourhood.
    pub explored: bool,
}

/// Mutually nondominated set of (objective vector, permutation) pairs.
/// Objective-vector duplicates collapse onto the first member seen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoArchive {
    m: usize,
    capacity: Option<usize>,
    members: Vec<ArchiveMember>,
}

impl ParetoArchive {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            capacity: None,
            members: Vec::new(),
        }
    }

    /// Archive that prunes its most crowded member whenever it grows past `capacity`.
    pub fn with_capacity(m: usize, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("archive capacity must be positive"));
        }
        Ok(Self {
            m,
            capacity: Some(capacity),
            members: Vec::new(),
        })
    }

    pub fn objective_count(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ArchiveMember] {
        &self.members
    }

    pub(crate) fn members_mut(&mut self) -> &mut [ArchiveMember] {
        &mut self.members
    }

    /// Objective vectors in lexicographic order.
    pub fn objective_set(&self) -> Vec<ObjectiveVector> {
        let mut v: Vec<ObjectiveVector> =
            self.members.iter().map(|m| m.objectives.clone()).collect();
        v.sort();
        v
    }

    /// Inserts `candidate` unless some member dominates or equals it; evicts
    /// every member it dominates. Returns whether it was inserted.
    pub fn insert(&mut self, objectives: ObjectiveVector, perm: Permutation) -> Result<bool> {
        if objectives.len() != self.m {
            return Err(Error::invalid(format!(
                "candidate has {} objectives, archive has {}",
                objectives.len(),
                self.m
            )));
        }
        Ok(self.offer(objectives, perm))
    }

    pub(crate) fn offer(&mut self, objectives: ObjectiveVector, perm: Permutation) -> bool {
        let v = objectives.as_slice();
        if self
            .members
            .iter()
            .any(|m| m.objectives.as_slice() == v || dominates_slice(m.objectives.as_slice(), v))
        {
            return false;
        }
        self.members
            .retain(|m| !dominates_slice(v, m.objectives.as_slice()));
        self.members.push(ArchiveMember {
            objectives,
            perm,
            explored: false,
        });
        if let Some(cap) = self.capacity {
            while self.members.len() > cap {
                self.evict_most_crowded();
            }
        }
        true
    }

    /// Cheap pre-check: would `v` be rejected?
    pub(crate) fn covers(&self, v: &[Cost]) -> bool {
        self.members
            .iter()
            .any(|m| m.objectives.as_slice() == v || dominates_slice(m.objectives.as_slice(), v))
    }

    fn evict_most_crowded(&mut self) {
        let vectors: Vec<ObjectiveVector> =
            self.members.iter().map(|m| m.objectives.clone()).collect();
        let all: Vec<usize> = (0..vectors.len()).collect();
        let crowd = crowding_distance(&vectors, &all);
        let victim = (0..crowd.len())
            .min_by(|&a, &b| {
                crowd[a]
                    .partial_cmp(&crowd[b])
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| b.cmp(&a))
            })
            .expect("archive over capacity is nonempty");
        self.members.remove(victim);
    }

    /// Merges every member of `other` into `self`.
    pub fn absorb(&mut self, other: &ParetoArchive) -> Result<()> {
        for m in &other.members {
            self.insert(m.objectives.clone(), m.perm.clone())?;
        }
        Ok(())
    }
}

/// Van Veldhuizen generational distance: `sqrt(sum d_i^2) / |front|`, with
/// `d_i` the Euclidean distance from front point `i` to its nearest reference point.
pub fn generational_distance(
    front: &[ObjectiveVector],
    reference: &[ObjectiveVector],
) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::invalid("reference front is empty"));
    }
    let m = check_lengths(front)?;
    if reference.iter().any(|r| r.len() != m) {
        return Err(Error::invalid(
            "front and reference differ in objective count",
        ));
    }
    let sum_sq: f64 = front
        .iter()
        .map(|a| {
            reference
                .iter()
                .map(|r| {
                    a.0.iter()
                        .zip(&r.0)
                        .map(|(x, y)| {
                            let d = (x - y) as f64;
                            d * d
                        })
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(sum_sq.sqrt() / front.len() as f64)
}

/// Exact Pareto front by enumerating all `n!` permutations.
pub fn brute_force_front(instance: &MqapInstance) -> Result<ParetoArchive> {
    let n = instance.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut archive = ParetoArchive::new(instance.m());
    let mut p: Vec<usize> = (0..n).collect();
    // Heap's algorithm, iterative form; each step visits a new permutation.
    let mut c = vec![0usize; n];
    let visit = |p: &[usize], archive: &mut ParetoArchive| {
        let v = instance.costs(p);
        if !archive.covers(v.as_slice()) {
            archive.offer(v, Permutation::from_vec_unchecked(p.to_vec()));
        }
    };
    visit(&p, &mut archive);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            visit(&p, &mut archive);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(archive)
}
