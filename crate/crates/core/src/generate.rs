//! Random instance generators for tests, demos and smoke runs.

use crate::qap::{Cost, Matrix, MqapInstance, QapInstance};
use crate::rng::RandomSource;

/// Symmetric matrix with zero diagonal and entries uniform in `0..=max`.
pub fn symmetric_matrix(n: usize, max: Cost, rng: &mut RandomSource) -> Matrix {
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.between(0, max as usize) as Cost;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

/// Dense matrix with entries uniform in `0..=max` (diagonal included).
pub fn uniform_matrix(n: usize, max: Cost, rng: &mut RandomSource) -> Matrix {
    let data = (0..n * n)
        .map(|_| rng.between(0, max as usize) as Cost)
        .collect();
    Matrix::from_row_major(n, data).expect("generated entries are non-negative")
}

pub fn uniform_qap(n: usize, max: Cost, seed: u64) -> QapInstance {
    let mut rng = RandomSource::new(seed);
    let flow = uniform_matrix(n, max, &mut rng);
    let dist = uniform_matrix(n, max, &mut rng);
    QapInstance::new(flow, dist).expect("n >= 2")
}

/// Symmetric mQAP with `m` flows over one distance matrix.
pub fn uniform_mqap(n: usize, m: usize, max: Cost, seed: u64) -> MqapInstance {
    let mut rng = RandomSource::new(seed);
    let dist = symmetric_matrix(n, max, &mut rng);
    let flows = (0..m).map(|_| symmetric_matrix(n, max, &mut rng)).collect();
    MqapInstance::new(flows, dist).expect("n >= 2, m >= 1")
}
