//! Oracles and invariant checks shared by the property suites and the
//! acceptance harness. Each check returns `Err(description)` on violation.

#![allow(dead_code)]

use bfo_qap::bfo::{bfo_baseline_solve_observed, bfo_solve_observed, Bacterium, BfoObserver};
use bfo_qap::generate::{uniform_mqap, uniform_qap};
use bfo_qap::mobfo::{mbfo_baseline_solve, mobfo_solve_observed, Member, MobfoObserver};
use bfo_qap::pareto::{crowding_distance, rank_crowding_order};
use bfo_qap::variation::crossover_ulx;
use bfo_qap::{
    bfo_solve, brute_force_front, dominates, fast_nondominated_sort, generational_distance,
    mobfo_solve, BfoConfig, Cost, MobfoConfig, MqapInstance, MutationKind, ObjectiveVector,
    ParetoArchive, Permutation, QapInstance, RandomSource,
};

pub type Check = Result<(), String>;

/// Calls `f` on every permutation of `0..n`.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn naive_cost(inst: &QapInstance, p: &[usize]) -> Cost {
    let (f, d) = (inst.flow(), inst.distance());
    let n = p.len();
    let mut c = 0;
    for i in 0..n {
        for j in 0..n {
            c += f.get(i, j) * d.get(p[i], p[j]);
        }
    }
    c
}

pub fn exhaustive_optimum(inst: &QapInstance) -> Cost {
    let mut best = Cost::MAX;
    for_each_permutation(inst.n(), |p| best = best.min(naive_cost(inst, p)));
    best
}

/// Peeling oracle: the first front is everything nobody dominates; remove and repeat.
pub fn peel_ranks(vs: &[ObjectiveVector]) -> Vec<usize> {
    let mut rank = vec![usize::MAX; vs.len()];
    let mut r = 0;
    while rank.contains(&usize::MAX) {
        let open: Vec<usize> = (0..vs.len()).filter(|&i| rank[i] == usize::MAX).collect();
        let front: Vec<usize> = open
            .iter()
            .copied()
            .filter(|&i| !open.iter().any(|&j| dominates(&vs[j], &vs[i]).unwrap()))
            .collect();
        for i in front {
            rank[i] = r;
        }
        r += 1;
    }
    rank
}

pub fn tiny_config(seed: u64) -> BfoConfig {
    BfoConfig {
        population: 10,
        chemotactic_steps: 4,
        reproduction_steps: 3,
        elimination_steps: 3,
        seed,
        ..BfoConfig::default()
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn check_delta_exhaustive(n: usize, seed: u64) -> Check {
    let inst = uniform_qap(n, 30, seed);
    let mut result = Ok(());
    for_each_permutation(n, |p| {
        if result.is_err() {
            return;
        }
        let perm = Permutation::new(p.to_vec()).unwrap();
        let base = naive_cost(&inst, p);
        for r in 0..n {
            for s in r + 1..n {
                let mut q = p.to_vec();
                q.swap(r, s);
                let want = naive_cost(&inst, &q) - base;
                let got = inst.delta_swap(&perm, r, s).unwrap();
                if got != want {
                    result = Err(format!(
                        "n={n} seed={seed} p={p:?} ({r},{s}): {got} != {want}"
                    ));
                    return;
                }
            }
        }
    });
    result
}

pub fn check_delta_random(n: usize, seed: u64) -> Check {
    let inst = uniform_qap(n, 1000, seed);
    let mut rng = RandomSource::new(seed ^ 0xd1);
    for _ in 0..20 {
        let perm = Permutation::random(n, &mut rng);
        let (r, s) = rng.distinct_pair(n);
        let mut q = perm.clone();
        q.swap(r, s);
        let want = inst.evaluate(&q).unwrap() - inst.evaluate(&perm).unwrap();
        let got = inst.delta_swap(&perm, r, s).unwrap();
        ensure(got == want, || {
            format!("n={n} seed={seed} ({r},{s}): {got} != {want}")
        })?;
    }
    Ok(())
}

fn is_bijection(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter()
        .all(|&v| v < p.len() && !std::mem::replace(&mut seen[v], true))
}

pub fn check_operators(n: usize, seed: u64) -> Check {
    let mut rng = RandomSource::new(seed);
    let a = Permutation::random(n, &mut rng);
    let b = Permutation::random(n, &mut rng);
    for kind in MutationKind::ALL {
        if n < kind.min_size() {
            continue;
        }
        let m = kind.apply(&a, &mut rng).map_err(|e| e.to_string())?;
        ensure(is_bijection(m.as_slice()), || {
            format!("{kind} on n={n} gave {m}")
        })?;
        let changed = (0..n)
            .filter(|&i| m.as_slice()[i] != a.as_slice()[i])
            .count();
        match kind {
            MutationKind::Swap => {
                ensure(changed == 2, || format!("swap changed {changed} positions"))?
            }
            MutationKind::PThird => {
                ensure(changed >= 2, || format!("p3 changed {changed} positions"))?
            }
            MutationKind::Inversion => {}
        }
    }
    let child = crossover_ulx(&a, &b, &mut rng).map_err(|e| e.to_string())?;
    ensure(is_bijection(child.as_slice()), || {
        format!("ULX gave {child}")
    })?;
    for i in 0..n {
        if a.as_slice()[i] == b.as_slice()[i] {
            ensure(child.as_slice()[i] == a.as_slice()[i], || {
                format!("ULX lost agreement at {i}: {a} x {b} -> {child}")
            })?;
        }
    }
    Ok(())
}

fn random_vectors(seed: u64, len: usize, m: usize, range: usize) -> Vec<ObjectiveVector> {
    let mut rng = RandomSource::new(seed);
    (0..len)
        .map(|_| ObjectiveVector((0..m).map(|_| rng.index(range) as Cost).collect()))
        .collect()
}

pub fn check_sort_vs_peeling(seed: u64) -> Check {
    let mut rng = RandomSource::new(seed);
    let len = rng.between(1, 40);
    let m = rng.between(2, 3);
    let vs = random_vectors(seed, len, m, 8);
    let got = fast_nondominated_sort(&vs).unwrap();
    let want = peel_ranks(&vs);
    ensure(got == want, || format!("seed={seed}: {got:?} != {want:?}"))
}

pub fn check_archive_order(seed: u64) -> Check {
    let mut rng = RandomSource::new(seed);
    let len = rng.between(1, 40);
    let mut vs = random_vectors(seed, len, 2, 12);
    let build = |vs: &[ObjectiveVector]| {
        let mut a = ParetoArchive::new(2);
        for v in vs {
            a.insert(v.clone(), Permutation::identity(2)).unwrap();
        }
        a.objective_set()
    };
    let first = build(&vs);
    rng.shuffle(&mut vs);
    let second = build(&vs);
    ensure(first == second, || {
        format!("seed={seed}: {first:?} vs {second:?}")
    })?;
    let ranks = fast_nondominated_sort(&vs).unwrap();
    let mut front: Vec<ObjectiveVector> = vs
        .iter()
        .zip(&ranks)
        .filter(|(_, &r)| r == 0)
        .map(|(v, _)| v.clone())
        .collect();
    front.sort();
    front.dedup();
    ensure(front == first, || {
        format!("seed={seed}: archive != batch front")
    })
}

pub fn check_gd(seed: u64) -> Check {
    let ov = |a: Cost, b: Cost| ObjectiveVector(vec![a, b]);
    let gd = |a: &[ObjectiveVector], r: &[ObjectiveVector]| generational_distance(a, r).unwrap();
    ensure(gd(&[ov(3, 4)], &[ov(0, 0)]) == 5.0, || {
        "GD hand case 5.0".into()
    })?;
    ensure(
        gd(&[ov(0, 0), ov(3, 4)], &[ov(0, 0), ov(6, 8)]) == 2.5,
        || "GD hand case 2.5".into(),
    )?;
    let vs = random_vectors(seed, 12, 2, 50);
    ensure(gd(&vs, &vs) == 0.0, || {
        format!("seed={seed}: GD(A, A) != 0")
    })?;
    let sub = &vs[..6];
    ensure(gd(sub, &vs) == 0.0, || {
        format!("seed={seed}: GD of a subset != 0")
    })?;
    let crowd = crowding_distance(&vs, &(0..vs.len()).collect::<Vec<_>>());
    ensure(crowd.iter().all(|c| *c >= 0.0), || {
        "negative crowding distance".into()
    })?;
    let order = rank_crowding_order(&vs);
    let mut sorted = order.clone();
    sorted.sort();
    ensure(sorted == (0..vs.len()).collect::<Vec<_>>(), || {
        "rank-crowding order is not a permutation".into()
    })
}

#[derive(Default)]
struct BfoWatch {
    size: usize,
    last_best: Option<Cost>,
    violations: Vec<String>,
}

impl BfoWatch {
    fn best(&mut self, best: Cost, at: &str) {
        if let Some(prev) = self.last_best {
            if best > prev {
                self.violations
                    .push(format!("best rose {prev} -> {best} after {at}"));
            }
        }
        self.last_best = Some(best);
    }

    fn size(&mut self, pop: &[Bacterium], at: &str) {
        if pop.len() != self.size {
            self.violations.push(format!(
                "population {} != {} after {at}",
                pop.len(),
                self.size
            ));
        }
    }
}

impl BfoObserver for BfoWatch {
    fn after_chemotaxis(&mut self, pop: &[Bacterium], best: Cost) {
        self.size(pop, "chemotaxis");
        self.best(best, "chemotaxis");
    }
    fn after_reproduction(&mut self, _before: &[Bacterium], after: &[Bacterium]) {
        self.size(after, "reproduction");
    }
    fn after_dispersal(&mut self, pop: &[Bacterium], best: Cost) {
        self.size(pop, "dispersal");
        self.best(best, "dispersal");
    }
    fn after_local_search(&mut self, best: Cost) {
        self.best(best, "local search");
    }
}

struct MobfoWatch {
    size: usize,
    violations: Vec<String>,
}

impl MobfoObserver for MobfoWatch {
    fn after_chemotaxis(&mut self, pop: &[Member], _a: &ParetoArchive) {
        if pop.len() != self.size {
            self.violations
                .push(format!("population {} after chemotaxis", pop.len()));
        }
    }
    fn after_reproduction(&mut self, pop: &[Member], _a: &ParetoArchive) {
        if pop.len() != self.size {
            self.violations
                .push(format!("population {} after reproduction", pop.len()));
        }
    }
    fn after_round(&mut self, pop: &[Member], archive: &ParetoArchive) {
        if pop.len() != self.size {
            self.violations
                .push(format!("population {} after dispersal", pop.len()));
        }
        let ms = archive.members();
        for a in ms {
            if ms
                .iter()
                .any(|b| dominates(&b.objectives, &a.objectives).unwrap())
            {
                self.violations
                    .push(format!("archive holds dominated {}", a.objectives));
            }
        }
    }
}

pub fn check_population_and_best(n: usize, seed: u64) -> Check {
    let inst = uniform_qap(n, 50, seed);
    let mut rng = RandomSource::new(seed);
    let mut config = tiny_config(seed);
    config.population = 2 * rng.between(1, 8);
    config.dispersal_prob = rng.unit();
    for baseline in [false, true] {
        let mut w = BfoWatch {
            size: config.population,
            ..BfoWatch::default()
        };
        let report = if baseline {
            bfo_baseline_solve_observed(&inst, &config, &mut w)
        } else {
            bfo_solve_observed(&inst, &config, &mut w)
        }
        .map_err(|e| e.to_string())?;
        ensure(w.violations.is_empty(), || {
            format!("seed={seed} baseline={baseline}: {:?}", w.violations)
        })?;
        ensure(
            inst.evaluate(&report.best_perm).unwrap() == report.best_cost,
            || format!("seed={seed}: reported cost does not match its permutation"),
        )?;
        let monotone = report
            .trace
            .windows(2)
            .all(|w| w[0].0 <= w[1].0 && w[1].1 <= w[0].1);
        ensure(monotone, || format!("seed={seed}: trace not monotone"))?;
    }

    let minst = uniform_mqap(n, 2, 50, seed);
    let mconfig = MobfoConfig::new(config.clone(), 2);
    let mut w = MobfoWatch {
        size: config.population,
        violations: Vec::new(),
    };
    mobfo_solve_observed(&minst, &mconfig, &mut w).map_err(|e| e.to_string())?;
    ensure(w.violations.is_empty(), || {
        format!("seed={seed} mobfo: {:?}", w.violations)
    })
}

pub fn check_reruns(n: usize, seed: u64) -> Check {
    let inst = uniform_qap(n, 50, seed);
    let config = tiny_config(seed);
    let a = bfo_solve(&inst, &config).map_err(|e| e.to_string())?;
    let b = bfo_solve(&inst, &config).map_err(|e| e.to_string())?;
    ensure(a.same_outcome(&b), || {
        format!("seed={seed}: bfo reruns differ")
    })?;

    let minst = uniform_mqap(n, 2, 50, seed);
    let mconfig = MobfoConfig::new(config, 2);
    for baseline in [false, true] {
        let run = || {
            if baseline {
                mbfo_baseline_solve(&minst, &mconfig)
            } else {
                mobfo_solve(&minst, &mconfig)
            }
        };
        let (x, rx) = run().map_err(|e| e.to_string())?;
        let (y, ry) = run().map_err(|e| e.to_string())?;
        ensure(
            x == y && rx.trace == ry.trace && rx.evaluations == ry.evaluations,
            || format!("seed={seed} baseline={baseline}: mobfo reruns differ"),
        )?;
    }
    Ok(())
}

/// Single-objective oracle: default parameters, one run.
pub fn check_bfo_optimum(n: usize, seed: u64) -> Check {
    let inst = uniform_qap(n, 99, seed);
    let want = exhaustive_optimum(&inst);
    let report = bfo_solve(
        &inst,
        &BfoConfig {
            seed,
            ..BfoConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    ensure(report.best_cost == want, || {
        format!(
            "n={n} seed={seed}: found {} but optimum is {want}",
            report.best_cost
        )
    })
}

/// Multiobjective oracle: default parameters, one run, exact front.
pub fn check_mobfo_front(n: usize, seed: u64) -> Check {
    let inst: MqapInstance = uniform_mqap(n, 2, 99, seed);
    let want = brute_force_front(&inst).unwrap().objective_set();
    let config = MobfoConfig::new(
        BfoConfig {
            seed,
            ..BfoConfig::default()
        },
        2,
    );
    let (archive, _) = mobfo_solve(&inst, &config).map_err(|e| e.to_string())?;
    let got = archive.objective_set();
    ensure(got == want, || {
        format!(
            "n={n} seed={seed}: archive has {} points, front has {}",
            got.len(),
            want.len()
        )
    })
}
