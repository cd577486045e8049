//! Multiobjective bacterial foraging optimization (MOBFO) for mQAP.
//!
//! Same loop skeleton as [`crate::bfo`], with these changes:
//! - chemotaxis pairs bacteria at random, produces one ULX child per pair and
//!   mutates every parent and child; old and new solutions are pooled and the
//!   best `S` by (rank, crowding distance) survive;
//! - reproduction ranks by (rank, crowding) instead of scalar health;
//! - every evaluated solution is offered to an unbounded nondominated archive;
//! - each elimination-dispersal round ends with Pareto local search on the archive.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use crate::bfo::{BfoConfig, Evaluations};
use crate::error::{Error, Result};
use crate::pareto::{rank_crowding_order, ParetoArchive};
use crate::qap::{MqapInstance, ObjectiveVector, Permutation};
use crate::rng::RandomSource;
use crate::tabu::pareto_local_search_counted;
use crate::variation::{crossover_ulx, MutationKind};

#[derive(Debug, Clone, PartialEq)]
pub struct MobfoConfig {
    pub base: BfoConfig,
    /// Objective count M; must match the instance.
    pub objectives: usize,
    /// Neighbour evaluations per Pareto local search call; `None` means
    /// `100 * n(n-1)/2`.
    pub pls_budget: Option<u64>,
}

impl MobfoConfig {
    pub fn new(base: BfoConfig, objectives: usize) -> Self {
        Self {
            base,
            objectives,
            pls_budget: None,
        }
    }

    pub fn validate(&self, instance: &MqapInstance) -> Result<()> {
        self.base.validate()?;
        if self.objectives < 2 {
            return Err(Error::invalid(format!("M = {} < 2", self.objectives)));
        }
        if self.objectives != instance.m() {
            return Err(Error::invalid(format!(
                "config has M = {} but instance has {} flows",
                self.objectives,
                instance.m()
            )));
        }
        Ok(())
    }

    pub fn pls_budget_for(&self, n: usize) -> u64 {
        self.pls_budget.unwrap_or(100 * (n * (n - 1) / 2) as u64)
    }

    pub fn for_era(&self, era: usize) -> Self {
        Self {
            base: self.base.for_era(era),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub perm: Permutation,
    pub objectives: ObjectiveVector,
}

#[derive(Debug, Clone)]
pub struct MobfoReport {
    pub seed: u64,
    pub evaluations: Evaluations,
    pub wall_time: Duration,
    /// `(evaluations so far, archive size)` after each elimination-dispersal round.
    pub trace: Vec<(u64, usize)>,
}

/// Observation hooks for loop-boundary invariants.
pub trait MobfoObserver {
    fn after_chemotaxis(&mut self, _population: &[Member], _archive: &ParetoArchive) {}
    fn after_reproduction(&mut self, _population: &[Member], _archive: &ParetoArchive) {}
    fn after_round(&mut self, _population: &[Member], _archive: &ParetoArchive) {}
}

impl MobfoObserver for () {}

pub fn mobfo_solve(
    instance: &MqapInstance,
    config: &MobfoConfig,
) -> Result<(ParetoArchive, MobfoReport)> {
    run(instance, config, true, &mut ())
}

pub fn mobfo_solve_observed(
    instance: &MqapInstance,
    config: &MobfoConfig,
    observer: &mut impl MobfoObserver,
) -> Result<(ParetoArchive, MobfoReport)> {
    run(instance, config, true, observer)
}

/// Reconstruction of a plain multiobjective BFO for comparison: swap-only
/// mutation with rank-based survival, no crossover and no local search.
pub fn mbfo_baseline_solve(
    instance: &MqapInstance,
    config: &MobfoConfig,
) -> Result<(ParetoArchive, MobfoReport)> {
    run(instance, config, false, &mut ())
}

fn evaluate(instance: &MqapInstance, perm: Permutation) -> Member {
    let objectives = instance.costs(perm.as_slice());
    Member { perm, objectives }
}

fn run(
    instance: &MqapInstance,
    config: &MobfoConfig,
    proposed: bool,
    observer: &mut impl MobfoObserver,
) -> Result<(ParetoArchive, MobfoReport)> {
    config.validate(instance)?;
    let base = &config.base;
    let n = instance.n();
    let mutation = if proposed {
        base.mutation
    } else {
        MutationKind::Swap
    };
    if n < mutation.min_size() {
        return Err(Error::invalid(format!(
            "{mutation} mutation needs n >= {}",
            mutation.min_size()
        )));
    }
    let started = Instant::now();
    let mut rng = RandomSource::new(base.seed);
    let mut evals = Evaluations::default();
    let mut archive = ParetoArchive::new(instance.m());
    let s = base.population;

    let mut population: Vec<Member> = (0..s)
        .map(|_| evaluate(instance, Permutation::random(n, &mut rng)))
        .collect();
    evals.initial = s as u64;
    for m in &population {
        archive.offer(m.objectives.clone(), m.perm.clone());
    }

    let pls_budget = config.pls_budget_for(n);
    let mut trace = Vec::new();

    for _ell in 0..base.elimination_steps {
        for _k in 0..base.reproduction_steps {
            for _j in 0..base.chemotactic_steps {
                let mut offspring = Vec::with_capacity(s + s / 2);
                if proposed {
                    let mut order: Vec<usize> = (0..s).collect();
                    rng.shuffle(&mut order);
                    for pair in order.chunks_exact(2) {
                        let child = crossover_ulx(
                            &population[pair[0]].perm,
                            &population[pair[1]].perm,
                            &mut rng,
                        )?;
                        offspring.push(mutation.apply(&child, &mut rng)?);
                    }
                }
                for m in &population {
                    offspring.push(mutation.apply(&m.perm, &mut rng)?);
                }

                let mut pool = population.clone();
                for perm in offspring {
                    let m = evaluate(instance, perm);
                    evals.chemotactic += 1;
                    archive.offer(m.objectives.clone(), m.perm.clone());
                    pool.push(m);
                }
                population = truncate(pool, s);
                observer.after_chemotaxis(&population, &archive);
            }

            let order = rank_crowding_order(&objectives_of(&population));
            let better: Vec<Member> = order[..s / 2]
                .iter()
                .map(|&i| population[i].clone())
                .collect();
            population.clear();
            population.extend(better.iter().cloned());
            population.extend(better);
            observer.after_reproduction(&population, &archive);
        }

        for m in population.iter_mut() {
            if rng.unit() < base.dispersal_prob {
                *m = evaluate(instance, Permutation::random(n, &mut rng));
                evals.dispersal += 1;
                archive.offer(m.objectives.clone(), m.perm.clone());
            }
        }

        if proposed {
            let (a, spent) = pareto_local_search_counted(instance, archive, pls_budget, &mut rng)?;
            archive = a;
            evals.local_search += spent;
        }
        trace.push((evals.total(), archive.len()));
        observer.after_round(&population, &archive);
    }

    Ok((
        archive,
        MobfoReport {
            seed: base.seed,
            evaluations: evals,
            wall_time: started.elapsed(),
            trace,
        },
    ))
}

fn objectives_of(members: &[Member]) -> Vec<ObjectiveVector> {
    members.iter().map(|m| m.objectives.clone()).collect()
}

/// Best `keep` members of `pool` by (rank, crowding), ties by pool position.
/// Repeated permutations queue behind every distinct one, so copies only
/// survive when the pool has fewer than `keep` distinct members.
fn truncate(pool: Vec<Member>, keep: usize) -> Vec<Member> {
    let order = rank_crowding_order(&objectives_of(&pool));
    let mut seen = HashSet::with_capacity(pool.len());
    let (distinct, repeats): (Vec<usize>, Vec<usize>) =
        order.into_iter().partition(|&i| seen.insert(&pool[i].perm));
    let mut slots: Vec<Option<Member>> = pool.into_iter().map(Some).collect();
    distinct
        .into_iter()
        .chain(repeats)
        .take(keep)
        .map(|i| slots[i].take().expect("indices are unique"))
        .collect()
}
