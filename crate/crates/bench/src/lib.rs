//! Fixtures shared by the criterion benches.

use splitfix::problems::{random_instance, InstanceExtras, ProblemInstance, ProblemKind};
use splitfix::{AlgorithmConfig, RelaxationSchedule, Rng, StopRule, Vector};

pub fn gaussian(seed: u64, n: usize) -> Vector {
    Rng::new(seed).gaussian_vector(n)
}

pub fn instance(kind: ProblemKind, seed: u64, m: usize, n: usize) -> ProblemInstance {
    random_instance(seed, kind, m, n, &InstanceExtras::default()).expect("seeded instance builds")
}

/// Fixed iteration count with no early stop.
pub fn fixed_steps(gamma: f64, lambda: f64, steps: usize) -> AlgorithmConfig {
    AlgorithmConfig::new(
        gamma,
        RelaxationSchedule::Constant(lambda),
        StopRule::new(0.0, steps),
    )
}
