//! Operator splitting methods for monotone inclusions `0 ∈ Az + Bz + Cz`:
//! relaxed proximal point, forward–backward, Douglas–Rachford and Davis–Yin
//! iterations, together with closed-form linear-rate bounds, empirical rate
//! estimation and numeric audits of the underlying fixed-point identities.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod problems;
pub mod splitting;
pub mod suites;

pub use analysis::{
    check_averaged, check_drs_ppa_identity, check_fejer, empirical_rate, rate_bound, residual_R,
    subregularity_transfer, verify_fixed_point_map, EmpiricalRate, FixedPointCase, Provenance,
    RateBound, RateCase, SubregularityWitness,
};
pub use error::{Error, Result};
pub use linalg::{Matrix, Rng, Vector};
pub use operators::{Certificate, ForwardOperator, Groups, NormOrder, ProxOperator};
pub use problems::{
    build_l1l1, build_linear_monotone, build_lp_lsq, random_instance, reference_solve,
    InstanceExtras, ProblemInstance, ProblemKind, ReferenceMethod, ReferenceSolution,
};
pub use splitting::{
    drs_as_ppa_run, drs_run, dys_run, fbs_run, gppa_run, km_run, schedule_validate, Algorithm,
    AlgorithmConfig, IterateTrace, RelaxationSchedule, Splitting, StopRule, Termination,
};
