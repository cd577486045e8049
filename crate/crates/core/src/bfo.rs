//! Single-objective bacterial foraging optimization over permutations.
//!
//! The loop nests elimination-dispersal rounds, reproduction rounds and
//! chemotactic steps. Chemotaxis is a mutation per bacterium, reproduction
//! sorts by accumulated cost ("health") and clones the healthier half,
//! dispersal re-randomizes bacteria with probability `dispersal_prob`, and
//! each elimination-dispersal round ends with tabu search from the best
//! solution found so far.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::qap::{Cost, Permutation, QapInstance};
use crate::rng::RandomSource;
use crate::tabu::{tabu_improve, TabuParams};
use crate::variation::MutationKind;

/// Solver parameters. Defaults are S=50, Nc=10, Nre=4, Ned=10, Ped=0.25,
/// swap mutation, 10 eras.
#[derive(Debug, Clone, PartialEq)]
pub struct BfoConfig {
    /// Population size S; must be even.
    pub population: usize,
    /// Chemotactic steps Nc per reproduction round.
    pub chemotactic_steps: usize,
    /// Reproduction rounds Nre per elimination-dispersal round.
    pub reproduction_steps: usize,
    /// Elimination-dispersal rounds Ned.
    pub elimination_steps: usize,
    /// Per-bacterium dispersal probability Ped.
    pub dispersal_prob: f64,
    pub mutation: MutationKind,
    /// Independent replicate runs.
    pub eras: usize,
    pub seed: u64,
    /// Tabu iterations per invocation; `None` means `10 n^2`.
    pub tabu_iters: Option<usize>,
}

impl Default for BfoConfig {
    fn default() -> Self {
        Self {
            population: 50,
            chemotactic_steps: 10,
            reproduction_steps: 4,
            elimination_steps: 10,
            dispersal_prob: 0.25,
            mutation: MutationKind::Swap,
            eras: 10,
            seed: 0,
            tabu_iters: None,
        }
    }
}

impl BfoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || !self.population.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "population S = {} must be even and at least 2",
                self.population
            )));
        }
        for (name, v) in [
            ("Nc", self.chemotactic_steps),
            ("Nre", self.reproduction_steps),
            ("Ned", self.elimination_steps),
            ("era", self.eras),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.dispersal_prob) {
            return Err(Error::invalid(format!(
                "Ped = {} outside [0, 1]",
                self.dispersal_prob
            )));
        }
        Ok(())
    }

    /// Chemotactic evaluations per run: `S * Nc * Nre * Ned`.
    pub fn chemotactic_budget(&self) -> u64 {
        (self.population
            * self.chemotactic_steps
            * self.reproduction_steps
            * self.elimination_steps) as u64
    }

    pub(crate) fn tabu_params(&self, n: usize) -> TabuParams {
        let p = TabuParams::for_size(n);
        match self.tabu_iters {
            Some(iters) => p.with_max_iters(iters),
            None => p,
        }
    }

    /// Config for replicate `era` of a batch: same parameters, derived seed.
    pub fn for_era(&self, era: usize) -> Self {
        Self {
            seed: crate::rng::replicate_seed(self.seed, era as u64),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bacterium {
    pub perm: Permutation,
    pub cost: Cost,
    /// Cost accumulated over the current reproduction round.
    pub health: Cost,
}

/// Evaluation counts broken down by phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Evaluations {
    pub initial: u64,
    pub chemotactic: u64,
    pub dispersal: u64,
    /// Neighbour evaluations inside tabu search or Pareto local search.
    pub local_search: u64,
}

impl Evaluations {
    pub fn total(&self) -> u64 {
        self.initial + self.chemotactic + self.dispersal + self.local_search
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub seed: u64,
    pub best_cost: Cost,
    pub best_perm: Permutation,
    pub evaluations: Evaluations,
    pub wall_time: Duration,
    /// `(evaluations so far, best so far)` at every improvement.
    pub trace: Vec<(u64, Cost)>,
}

impl RunReport {
    /// Equality on everything except wall-clock time.
    pub fn same_outcome(&self, other: &RunReport) -> bool {
        self.seed == other.seed
            && self.best_cost == other.best_cost
            && self.best_perm == other.best_perm
            && self.evaluations == other.evaluations
            && self.trace == other.trace
    }
}

/// Observation hooks, used by tests to check loop-boundary invariants.
pub trait BfoObserver {
    fn after_chemotaxis(&mut self, _population: &[Bacterium], _best: Cost) {}
    fn after_reproduction(&mut self, _before: &[Bacterium], _after: &[Bacterium]) {}
    fn after_dispersal(&mut self, _population: &[Bacterium], _best: Cost) {}
    fn after_local_search(&mut self, _best: Cost) {}
}

impl BfoObserver for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    Proposed,
    Baseline,
}

/// Proposed solver: greedy per-bacterium acceptance and tabu refinement.
pub fn bfo_solve(instance: &QapInstance, config: &BfoConfig) -> Result<RunReport> {
    run(instance, config, Variant::Proposed, &mut ())
}

/// Stripped reconstruction: unconditional acceptance, swap-only moves, no tabu.
pub fn bfo_baseline_solve(instance: &QapInstance, config: &BfoConfig) -> Result<RunReport> {
    run(instance, config, Variant::Baseline, &mut ())
}

pub fn bfo_solve_observed(
    instance: &QapInstance,
    config: &BfoConfig,
    observer: &mut impl BfoObserver,
) -> Result<RunReport> {
    run(instance, config, Variant::Proposed, observer)
}

pub fn bfo_baseline_solve_observed(
    instance: &QapInstance,
    config: &BfoConfig,
    observer: &mut impl BfoObserver,
) -> Result<RunReport> {
    run(instance, config, Variant::Baseline, observer)
}

struct Incumbent {
    perm: Permutation,
    cost: Cost,
    trace: Vec<(u64, Cost)>,
}

impl Incumbent {
    fn offer(&mut self, perm: &Permutation, cost: Cost, evals: u64) {
        if cost < self.cost {
            self.cost = cost;
            self.perm = perm.clone();
            self.trace.push((evals, cost));
        }
    }
}

fn run(
    instance: &QapInstance,
    config: &BfoConfig,
    variant: Variant,
    observer: &mut impl BfoObserver,
) -> Result<RunReport> {
    config.validate()?;
    let n = instance.n();
    let mutation = match variant {
        Variant::Proposed => config.mutation,
        Variant::Baseline => MutationKind::Swap,
    };
    if n < mutation.min_size() {
        return Err(Error::invalid(format!(
            "{mutation} mutation needs n >= {}",
            mutation.min_size()
        )));
    }
    let started = Instant::now();
    let mut rng = RandomSource::new(config.seed);
    let mut evals = Evaluations::default();
    let s = config.population;

    let mut population: Vec<Bacterium> = (0..s)
        .map(|_| {
            let perm = Permutation::random(n, &mut rng);
            let cost = instance.cost(perm.as_slice());
            Bacterium {
                perm,
                cost,
                health: 0,
            }
        })
        .collect();
    evals.initial = s as u64;

    let first = population
        .iter()
        .min_by_key(|b| b.cost)
        .expect("population is nonempty");
    let mut best = Incumbent {
        perm: first.perm.clone(),
        cost: first.cost,
        trace: vec![(evals.total(), first.cost)],
    };

    let tabu = config.tabu_params(n);

    for _ell in 0..config.elimination_steps {
        for _k in 0..config.reproduction_steps {
            for b in population.iter_mut() {
                b.health = 0;
            }
            for _j in 0..config.chemotactic_steps {
                for b in population.iter_mut() {
                    let mutant = mutation.apply(&b.perm, &mut rng)?;
                    let cost = instance.cost(mutant.as_slice());
                    evals.chemotactic += 1;
                    best.offer(&mutant, cost, evals.total());
                    let accept = match variant {
                        Variant::Proposed => cost <= b.cost,
                        Variant::Baseline => true,
                    };
                    if accept {
                        b.perm = mutant;
                        b.cost = cost;
                    }
                    b.health += b.cost;
                }
                observer.after_chemotaxis(&population, best.cost);
            }

            let before = population.clone();
            reproduce(&mut population);
            observer.after_reproduction(&before, &population);
        }

        for b in population.iter_mut() {
            if rng.unit() < config.dispersal_prob {
                b.perm = Permutation::random(n, &mut rng);
                b.cost = instance.cost(b.perm.as_slice());
                b.health = 0;
                evals.dispersal += 1;
                best.offer(&b.perm, b.cost, evals.total());
            }
        }
        observer.after_dispersal(&population, best.cost);

        if variant == Variant::Proposed {
            let out = tabu_improve(instance, &best.perm, &tabu, &mut rng)?;
            evals.local_search += out.evaluations;
            best.offer(&out.perm, out.cost, evals.total());
            observer.after_local_search(best.cost);
        }
    }

    Ok(RunReport {
        seed: config.seed,
        best_cost: best.cost,
        best_perm: best.perm,
        evaluations: evals,
        wall_time: started.elapsed(),
        trace: best.trace,
    })
}

/// Keeps the half with the lowest accumulated health (ties by position) and
/// duplicates it over the other half.
fn reproduce(population: &mut Vec<Bacterium>) {
    let half = population.len() / 2;
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by_key(|&i| (population[i].health, i));
    let survivors: Vec<Bacterium> = order[..half]
        .iter()
        .map(|&i| Bacterium {
            health: 0,
            ..population[i].clone()
        })
        .collect();
    population.clear();
    population.extend(survivors.iter().cloned());
    population.extend(survivors);
}
