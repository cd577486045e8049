//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers or strings and returns a JSON string, so
//! the same functions run natively under `cargo test`. Failures come back as
//! `{"error": "..."}`.

use bfo_qap::generate::{uniform_mqap, uniform_qap};
use bfo_qap::mobfo::mbfo_baseline_solve;
use bfo_qap::pareto::BRUTE_FORCE_LIMIT;
use bfo_qap::variation::crossover_ulx;
use bfo_qap::{
    bfo_baseline_solve, bfo_solve, brute_force_front, generational_distance, mobfo_solve,
    BfoConfig, MobfoConfig, MutationKind, ParetoArchive, Permutation, RandomSource,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest instance the convergence demo accepts; keeps a run interactive.
pub const MAX_DEMO_N: usize = 40;

fn respond(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn demo_config(population: usize, rounds: usize, mutation: MutationKind, seed: u64) -> BfoConfig {
    BfoConfig {
        population,
        chemotactic_steps: 10,
        reproduction_steps: 4,
        elimination_steps: rounds,
        mutation,
        seed,
        ..BfoConfig::default()
    }
}

fn front_points(archive: &ParetoArchive) -> Value {
    archive.objective_set().iter().map(|v| json!(v.0)).collect()
}

fn convergence(
    n: usize,
    seed: u64,
    population: usize,
    rounds: usize,
    mutation: &str,
) -> Result<Value, String> {
    if !(3..=MAX_DEMO_N).contains(&n) {
        return Err(format!("n must be in 3..={MAX_DEMO_N}"));
    }
    let mutation: MutationKind = mutation
        .parse()
        .map_err(|e: bfo_qap::Error| e.to_string())?;
    let inst = uniform_qap(n, 99, seed);
    let config = demo_config(population, rounds, mutation, seed);
    let proposed = bfo_solve(&inst, &config).map_err(|e| e.to_string())?;
    let baseline = bfo_baseline_solve(&inst, &config).map_err(|e| e.to_string())?;
    Ok(json!({
        "n": n,
        "proposed": {
            "best": proposed.best_cost,
            "perm": proposed.best_perm.as_slice(),
            "evaluations": proposed.evaluations.total(),
            "trace": proposed.trace,
        },
        "baseline": {
            "best": baseline.best_cost,
            "perm": baseline.best_perm.as_slice(),
            "evaluations": baseline.evaluations.total(),
            "trace": baseline.trace,
        },
    }))
}

/// Runs the proposed solver and the stripped baseline on one random QAP
/// instance. `trace` lists `[evaluations, best cost]` improvement points.
#[wasm_bindgen]
pub fn bfo_convergence(
    n: usize,
    seed: u64,
    population: usize,
    rounds: usize,
    mutation: &str,
) -> String {
    respond(convergence(n, seed, population, rounds, mutation))
}

fn fronts(n: usize, seed: u64, rounds: usize) -> Result<Value, String> {
    if !(3..=BRUTE_FORCE_LIMIT.min(9)).contains(&n) {
        return Err("n must be in 3..=9 for the exact front".into());
    }
    let inst = uniform_mqap(n, 2, 99, seed);
    let exact = brute_force_front(&inst).map_err(|e| e.to_string())?;
    let config = MobfoConfig::new(demo_config(20, rounds, MutationKind::Swap, seed), 2);
    let (proposed, _) = mobfo_solve(&inst, &config).map_err(|e| e.to_string())?;
    let (baseline, _) = mbfo_baseline_solve(&inst, &config).map_err(|e| e.to_string())?;
    let reference = exact.objective_set();
    let gd = |a: &ParetoArchive| {
        generational_distance(&a.objective_set(), &reference).map_err(|e| e.to_string())
    };
    Ok(json!({
        "n": n,
        "exact": front_points(&exact),
        "proposed": { "front": front_points(&proposed), "gd": gd(&proposed)? },
        "baseline": { "front": front_points(&baseline), "gd": gd(&baseline)? },
    }))
}

/// Exact Pareto front of a random bi-objective instance next to the fronts
/// found by MOBFO and the baseline, with their generational distances.
#[wasm_bindgen]
pub fn pareto_fronts(n: usize, seed: u64, rounds: usize) -> String {
    respond(fronts(n, seed, rounds))
}

fn operators(n: usize, seed: u64) -> Result<Value, String> {
    if !(3..=64).contains(&n) {
        return Err("n must be in 3..=64".into());
    }
    let mut rng = RandomSource::new(seed);
    let parent = Permutation::random(n, &mut rng);
    let mut mutants = serde_json::Map::new();
    for kind in MutationKind::ALL {
        let m = kind.apply(&parent, &mut rng).map_err(|e| e.to_string())?;
        mutants.insert(kind.to_string(), json!(m.as_slice()));
    }
    // a second parent that agrees with the first on roughly half the positions
    let mut other = parent.clone();
    for _ in 0..n / 4 {
        let (a, b) = rng.distinct_pair(n);
        other.swap(a, b);
    }
    let child = crossover_ulx(&parent, &other, &mut rng).map_err(|e| e.to_string())?;
    Ok(json!({
        "parent": parent.as_slice(),
        "mutants": mutants,
        "ulx": { "a": parent.as_slice(), "b": other.as_slice(), "child": child.as_slice() },
    }))
}

/// One application of each mutation operator and one ULX crossover.
#[wasm_bindgen]
pub fn operator_preview(n: usize, seed: u64) -> String {
    respond(operators(n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn convergence_traces_decrease() {
        let v = parse(&bfo_convergence(12, 3, 10, 2, "swap"));
        for side in ["proposed", "baseline"] {
            let trace = v[side]["trace"].as_array().unwrap();
            assert!(!trace.is_empty());
            let costs: Vec<i64> = trace.iter().map(|p| p[1].as_i64().unwrap()).collect();
            assert!(costs.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(*costs.last().unwrap(), v[side]["best"].as_i64().unwrap());
        }
        assert_eq!(
            bfo_convergence(12, 3, 10, 2, "swap"),
            bfo_convergence(12, 3, 10, 2, "swap")
        );
    }

    #[test]
    fn bad_input_reports_error() {
        assert!(parse(&bfo_convergence(2, 0, 10, 1, "swap"))["error"].is_string());
        assert!(parse(&bfo_convergence(8, 0, 10, 1, "shuffle"))["error"].is_string());
        assert!(parse(&bfo_convergence(8, 0, 7, 1, "swap"))["error"].is_string());
        assert!(parse(&pareto_fronts(12, 0, 1))["error"].is_string());
        assert!(parse(&operator_preview(2, 0))["error"].is_string());
    }

    #[test]
    fn fronts_are_consistent() {
        let v = parse(&pareto_fronts(6, 4, 4));
        let exact = v["exact"].as_array().unwrap();
        assert!(!exact.is_empty());
        assert!(v["proposed"]["gd"].as_f64().unwrap() >= 0.0);
        if v["proposed"]["gd"].as_f64().unwrap() == 0.0 {
            for p in v["proposed"]["front"].as_array().unwrap() {
                assert!(exact.contains(p));
            }
        }
    }

    #[test]
    fn preview_keeps_bijections_and_agreements() {
        let v = parse(&operator_preview(10, 9));
        let as_vec = |x: &Value| -> Vec<usize> {
            x.as_array()
                .unwrap()
                .iter()
                .map(|e| e.as_u64().unwrap() as usize)
                .collect()
        };
        for kind in ["swap", "p3", "inversion"] {
            let mut m = as_vec(&v["mutants"][kind]);
            m.sort();
            assert_eq!(m, (0..10).collect::<Vec<_>>());
        }
        let (a, b, c) = (
            as_vec(&v["ulx"]["a"]),
            as_vec(&v["ulx"]["b"]),
            as_vec(&v["ulx"]["child"]),
        );
        for i in 0..10 {
            if a[i] == b[i] {
                assert_eq!(c[i], a[i]);
            }
        }
    }
}
