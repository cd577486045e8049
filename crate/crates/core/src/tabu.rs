//! Tabu search over the 2-exchange neighbourhood, and its Pareto local
//! search counterpart for the multiobjective archive.

use crate::error::{Error, Result};
use crate::pareto::ParetoArchive;
use crate::qap::{Cost, MqapInstance, Permutation, QapInstance};
use crate::rng::RandomSource;

/// Tabu search parameters. Tenure is drawn per move from `tenure_low..=tenure_high`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TabuParams {
    pub tenure_low: usize,
    pub tenure_high: usize,
    pub max_iters: usize,
    pub aspiration: bool,
}

impl TabuParams {
    /// Tenure in `[0.9n, 1.1n]`, `10 n^2` iterations, aspiration on.
    pub fn for_size(n: usize) -> Self {
        let nf = n as f64;
        Self {
            tenure_low: (0.9 * nf).round() as usize,
            tenure_high: (1.1 * nf).round() as usize,
            max_iters: 10 * n * n,
            aspiration: true,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tenure_low > self.tenure_high {
            return Err(Error::invalid(format!(
                "tenure range [{}, {}] is empty",
                self.tenure_low, self.tenure_high
            )));
        }
        Ok(())
    }
}

/// Short-term memory: move `(r, s)` is tabu while `iter < until(r, s)`.
#[derive(Debug, Clone)]
pub struct TabuState {
    n: usize,
    until: Vec<usize>,
}

impl TabuState {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            until: vec![0; n * n],
        }
    }

    pub fn is_tabu(&self, r: usize, s: usize, iter: usize) -> bool {
        iter < self.until[r * self.n + s]
    }

    pub fn expiry(&self, r: usize, s: usize) -> usize {
        self.until[r * self.n + s]
    }

    pub fn forbid(&mut self, r: usize, s: usize, until: usize) {
        self.until[r * self.n + s] = until;
        self.until[s * self.n + r] = until;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabuOutcome {
    pub perm: Permutation,
    pub cost: Cost,
    /// Neighbour evaluations performed (moves scanned).
    pub evaluations: u64,
}

/// Runs `params.max_iters` tabu iterations from `start` and returns the best
/// permutation visited. Never worse than `start`.
pub fn tabu_improve(
    instance: &QapInstance,
    start: &Permutation,
    params: &TabuParams,
    rng: &mut RandomSource,
) -> Result<TabuOutcome> {
    params.validate()?;
    let start_cost = instance.evaluate(start)?;
    let n = instance.n();

    let mut p = start.clone().into_vec();
    let mut current = start_cost;
    let mut best = p.clone();
    let mut best_cost = start_cost;
    let mut state = TabuState::new(n);
    let mut delta = vec![0 as Cost; n * n];
    for r in 0..n {
        for s in r + 1..n {
            delta[r * n + s] = instance.swap_delta(&p, r, s);
        }
    }
    let moves_per_iter = (n * (n - 1) / 2) as u64;
    let mut evaluations = 0u64;

    for iter in 0..params.max_iters {
        let mut chosen: Option<(usize, usize)> = None;
        let mut chosen_delta = Cost::MAX;
        let mut ties = 0u32;
        let mut fallback: Option<(usize, usize)> = None;
        let mut fallback_expiry = usize::MAX;
        for r in 0..n {
            for s in r + 1..n {
                let d = delta[r * n + s];
                let admissible =
                    !state.is_tabu(r, s, iter) || (params.aspiration && current + d < best_cost);
                if admissible {
                    if d < chosen_delta {
                        chosen = Some((r, s));
                        chosen_delta = d;
                        ties = 1;
                    } else if d == chosen_delta {
                        ties += 1;
                        if rng.index(ties as usize) == 0 {
                            chosen = Some((r, s));
                        }
                    }
                } else if state.expiry(r, s) < fallback_expiry {
                    fallback = Some((r, s));
                    fallback_expiry = state.expiry(r, s);
                }
            }
        }
        evaluations += moves_per_iter;
        let Some((r, s)) = chosen.or(fallback) else {
            break;
        };

        current += delta[r * n + s];
        p.swap(r, s);
        let tenure = rng.between(params.tenure_low, params.tenure_high);
        state.forbid(r, s, iter + 1 + tenure);
        update_deltas(instance, &p, &mut delta, r, s);

        if current < best_cost {
            best_cost = current;
            best.copy_from_slice(&p);
        }
    }

    debug_assert_eq!(instance.cost(&best), best_cost);
    Ok(TabuOutcome {
        perm: Permutation::from_vec_unchecked(best),
        cost: best_cost,
        evaluations,
    })
}

/// Refreshes the upper-triangular delta table after swapping `(r, s)` in `p`
/// (`p` already swapped). Moves disjoint from `{r, s}` update in O(1); the
/// rest are recomputed in O(n).
fn update_deltas(instance: &QapInstance, p: &[usize], delta: &mut [Cost], r: usize, s: usize) {
    let n = p.len();
    let a = instance.flow();
    let b = instance.distance();
    let (pr, ps) = (p[r], p[s]);
    for i in 0..n {
        for j in i + 1..n {
            if i == r || i == s || j == r || j == s {
                delta[i * n + j] = instance.swap_delta(p, i, j);
            } else {
                let (pi, pj) = (p[i], p[j]);
                delta[i * n + j] += (a.get(r, i) - a.get(r, j) + a.get(s, j) - a.get(s, i))
                    * (b.get(ps, pi) - b.get(ps, pj) + b.get(pr, pj) - b.get(pr, pi))
                    + (a.get(i, r) - a.get(j, r) + a.get(j, s) - a.get(i, s))
                        * (b.get(pi, ps) - b.get(pj, ps) + b.get(pj, pr) - b.get(pi, pr));
            }
        }
    }
}

/// Pareto local search: scans the 2-exchange neighbourhood of unexplored
/// archive members and offers every neighbour to the archive, until `budget`
/// neighbour evaluations are spent or every member is explored.
pub fn pareto_local_search(
    instance: &MqapInstance,
    archive: ParetoArchive,
    budget: u64,
    rng: &mut RandomSource,
) -> Result<ParetoArchive> {
    pareto_local_search_counted(instance, archive, budget, rng).map(|(a, _)| a)
}

/// As [`pareto_local_search`], also returning the evaluations spent.
pub fn pareto_local_search_counted(
    instance: &MqapInstance,
    mut archive: ParetoArchive,
    budget: u64,
    rng: &mut RandomSource,
) -> Result<(ParetoArchive, u64)> {
    if archive.is_empty() {
        return Err(Error::invalid("local search needs a nonempty archive"));
    }
    if archive.objective_count() != instance.m() {
        return Err(Error::invalid(format!(
            "archive has {} objectives, instance has {}",
            archive.objective_count(),
            instance.m()
        )));
    }
    if let Some(bad) = archive
        .members()
        .iter()
        .find(|m| m.perm.len() != instance.n())
    {
        return Err(Error::invalid(format!(
            "archive member of size {} for instance of size {}",
            bad.perm.len(),
            instance.n()
        )));
    }

    let n = instance.n();
    let mut spent = 0u64;
    while spent < budget {
        let open: Vec<usize> = archive
            .members()
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.explored)
            .map(|(i, _)| i)
            .collect();
        if open.is_empty() {
            break;
        }
        let pick = &archive.members()[open[rng.index(open.len())]];
        let (centre, centre_obj) = (pick.perm.clone(), pick.objectives.clone());

        let mut complete = true;
        'scan: for r in 0..n {
            for s in r + 1..n {
                if spent >= budget {
                    complete = false;
                    break 'scan;
                }
                spent += 1;
                let v = instance.swapped_costs(centre.as_slice(), &centre_obj, r, s);
                if !archive.covers(v.as_slice()) {
                    let mut q = centre.clone();
                    q.swap(r, s);
                    archive.offer(v, q);
                }
            }
        }
        if complete {
            if let Some(m) = archive
                .members_mut()
                .iter_mut()
                .find(|m| m.objectives == centre_obj)
            {
                m.explored = true;
            }
        }
    }
    Ok((archive, spent))
}
