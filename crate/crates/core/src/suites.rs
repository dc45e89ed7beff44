//! Fixed-seed property suites run by `splitfix verify`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{
    check_averaged, check_drs_ppa_identity, check_fejer, empirical_rate, rate_bound,
    subregularity_transfer, verify_fixed_point_map, zero_residual, FixedPointCase, Provenance,
    RateCase, TransferInputs, AUDIT_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Rng, Vector};
use crate::operators::{
    project_box, project_l1_ball, prox_group_lp, prox_l1, prox_linf, Groups, NormOrder,
    ProxOperator,
};
use crate::problems::{
    build_linear_monotone, random_instance, InstanceExtras, ProblemInstance, ProblemKind,
};
use crate::splitting::{
    drs_as_ppa_run, drs_run, dys_run, fbs_run, gppa_run, Algorithm, AlgorithmConfig, IterateTrace,
    RelaxationSchedule, StopRule,
};

/// Seed of the strongly monotone linear toy.
pub const TOY_SEED: u64 = 19;
/// Dimension of the strongly monotone linear toy.
pub const TOY_DIM: usize = 8;
/// Seed of the `ℓ₁/ℓ₁` instance.
pub const L1L1_SEED: u64 = 13;
/// Seed of the small lasso instance.
pub const LASSO_SEED: u64 = 11;

/// `M = I + (G − Gᵀ)/2`, Gaussian `q`.
pub fn linear_toy() -> Result<ProblemInstance> {
    random_instance(
        TOY_SEED,
        ProblemKind::LinearMonotone,
        TOY_DIM,
        TOY_DIM,
        &InstanceExtras::default(),
    )
}

/// `m = 20`, `n = 10`, unit regularization.
pub fn l1l1_instance() -> Result<ProblemInstance> {
    random_instance(
        L1L1_SEED,
        ProblemKind::L1L1,
        20,
        10,
        &InstanceExtras::default(),
    )
}

/// `m = 10`, `n = 3`, unit regularization.
pub fn lasso_instance() -> Result<ProblemInstance> {
    random_instance(
        LASSO_SEED,
        ProblemKind::Lasso,
        10,
        3,
        &InstanceExtras::default(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Proxes,
    Reductions,
    Fejer,
    Lemmas,
    Bounds,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Proxes,
        Suite::Reductions,
        Suite::Fejer,
        Suite::Lemmas,
        Suite::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Proxes => "proxes",
            Self::Reductions => "reductions",
            Self::Fejer => "fejer",
            Self::Lemmas => "lemmas",
            Self::Bounds => "bounds",
        }
    }

    pub fn run(self) -> SuiteReport {
        let checks = match self {
            Self::Proxes => proxes(),
            Self::Reductions => reductions(),
            Self::Fejer => fejer(),
            Self::Lemmas => lemmas(),
            Self::Bounds => bounds(),
        };
        SuiteReport {
            suite: self.name(),
            checks,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_result(name: impl Into<String>, r: Result<(bool, String)>) -> Self {
        let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

// ---------------------------------------------------------------------------
// Numeric minimization oracles.

const GOLDEN_ITERS: usize = 90;

/// Golden-section minimizer of a unimodal `f` on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer of a jointly convex `f(u₁, u₂)` over `u₁ ∈ [lo, hi]`,
/// `u₂ ∈ inner(u₁)`, by nested golden-section search.
pub fn golden_section_2d(
    f: impl Fn(f64, f64) -> f64,
    lo: f64,
    hi: f64,
    inner: impl Fn(f64) -> (f64, f64),
) -> (f64, f64) {
    let best_u2 = |u1: f64| {
        let (a, b) = inner(u1);
        golden_section(|u2| f(u1, u2), a, b)
    };
    let u1 = golden_section(|u1| f(u1, best_u2(u1)), lo, hi);
    (u1, best_u2(u1))
}

const PROX_POINTS: usize = 100;
const PROX_TOL: f64 = 1e-6;

fn prox_check(
    name: &str,
    seed: u64,
    dim: usize,
    closed: impl Fn(&Vector, f64) -> Vector,
    oracle: impl Fn(&Vector, f64) -> Vector,
) -> Check {
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..PROX_POINTS {
        let z = rng.gaussian_vector(dim) * 2.0;
        let tau = 0.1 + 1.9 * rng.uniform();
        let gap = (closed(&z, tau) - oracle(&z, tau)).amax();
        worst = worst.max(gap);
    }
    Check {
        name: format!("{name} matches minimization oracle"),
        passed: worst <= PROX_TOL,
        detail: format!("max deviation {worst:.3e} over {PROX_POINTS} points"),
    }
}

fn quad(u: &[f64], z: &Vector) -> f64 {
    u.iter()
        .zip(z.iter())
        .map(|(a, b)| 0.5 * (a - b) * (a - b))
        .sum()
}

fn bracket(z: &Vector, tau: f64) -> f64 {
    z.amax() + tau + 1.0
}

fn proxes() -> Vec<Check> {
    let mut checks = vec![
        prox_check("l1 prox", 101, 1, prox_l1, |z, t| {
            let r = bracket(z, t);
            Vector::from_element(
                1,
                golden_section(|u| t * u.abs() + 0.5 * (u - z[0]).powi(2), -r, r),
            )
        }),
        prox_check("box projection", 102, 1, project_box, |z, t| {
            Vector::from_element(1, golden_section(|u| 0.5 * (u - z[0]).powi(2), -t, t))
        }),
        prox_check(
            "group-l2 prox",
            103,
            2,
            |z, t| {
                prox_group_lp(z, &Groups::whole(2), &[1.0], t, NormOrder::Two).expect("valid group")
            },
            |z, t| {
                let r = bracket(z, t);
                let (a, b) = golden_section_2d(
                    |a, b| t * (a * a + b * b).sqrt() + quad(&[a, b], z),
                    -r,
                    r,
                    |_| (-r, r),
                );
                Vector::from_column_slice(&[a, b])
            },
        ),
        prox_check("l-inf prox (Moreau)", 104, 2, prox_linf, |z, t| {
            let r = bracket(z, t);
            let (a, b) = golden_section_2d(
                |a, b| t * a.abs().max(b.abs()) + quad(&[a, b], z),
                -r,
                r,
                |_| (-r, r),
            );
            Vector::from_column_slice(&[a, b])
        }),
        prox_check(
            "l1-ball projection",
            105,
            2,
            |z, t| Vector::from_vec(project_l1_ball(z.as_slice(), t)),
            |z, t| {
                let (a, b) = golden_section_2d(
                    |a, b| quad(&[a, b], z),
                    -t,
                    t,
                    |a| (-(t - a.abs()), t - a.abs()),
                );
                Vector::from_column_slice(&[a, b])
            },
        ),
    ];
    checks.extend(resolvent_laws());
    checks
}

/// Operators whose resolvents are audited for firm nonexpansiveness.
pub fn audited_operators() -> Result<Vec<(String, ProxOperator)>> {
    let mut rng = Rng::new(201);
    let d = crate::linalg::rng_gaussian(&mut rng, 4, 3);
    let b = rng.gaussian_vector(4);
    let toy = linear_toy()?;
    let groups = Groups::new(6, vec![vec![0, 1], vec![2, 3, 4], vec![5]])?;
    Ok(vec![
        ("l1".into(), ProxOperator::l1(5, 0.8)?),
        (
            "group-l2".into(),
            ProxOperator::group_lp(groups.clone(), vec![1.0, 0.5, 2.0], 0.7, NormOrder::Two)?,
        ),
        (
            "group-linf".into(),
            ProxOperator::group_lp(groups, vec![1.0, 0.5, 2.0], 0.7, NormOrder::Inf)?,
        ),
        (
            "linear toy".into(),
            toy.orientations.ppa.expect("linear toy has a PPA form"),
        ),
        ("skew coupling".into(), ProxOperator::skew_primal_dual(&d)?),
        (
            "shifted l1 conjugate".into(),
            ProxOperator::shifted_l1_conjugate(&b, 1.0)?,
        ),
        (
            "least-squares gradient".into(),
            ProxOperator::least_squares_gradient(&d, &b)?,
        ),
    ])
}

fn resolvent_laws() -> Vec<Check> {
    let mut checks = Vec::new();
    let ops = match audited_operators() {
        Ok(ops) => ops,
        Err(e) => {
            return vec![Check::from_result("operator construction", Err(e))];
        }
    };
    for (i, (name, op)) in ops.iter().enumerate() {
        let mut rng = Rng::new(300 + i as u64);
        let r = check_averaged(|x| op.resolvent(0.9, x), op.dim(), 0.5, 1000, &mut rng).map(|r| {
            (
                r.passed(),
                format!("worst slack {:.3e} over {} pairs", r.worst_slack, r.pairs),
            )
        });
        checks.push(Check::from_result(
            format!("resolvent of {name} is firmly nonexpansive"),
            r,
        ));
    }
    checks.push(moreau_identity());
    checks
}

/// `z = prox_{γg}(z) + γ prox_{g*/γ}(z/γ)` for `g = ‖· − b‖₁`, with the
/// conjugate side evaluated as a box projection.
fn moreau_identity() -> Check {
    let mut rng = Rng::new(401);
    let dim = 6;
    let b = rng.gaussian_vector(dim);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let z = rng.gaussian_vector(dim) * 3.0;
        let gamma = 0.05 + 4.0 * rng.uniform();
        let primal = &b + prox_l1(&(&z - &b), gamma);
        let dual = project_box(&(&z / gamma - &b / gamma), 1.0);
        let r = (&z - primal - dual * gamma).amax();
        worst = worst.max(r);
    }
    Check {
        name: "Moreau identity for the shifted l1 norm".into(),
        passed: worst <= 1e-12,
        detail: format!("max residual {worst:.3e} over 1000 points"),
    }
}

// ---------------------------------------------------------------------------
// Reductions.

/// Whether two traces agree bit for bit in residuals, relaxation parameters
/// and every recorded iterate.
pub fn bitwise_equal(a: &IterateTrace, b: &IterateTrace) -> bool {
    let bits = |v: &Vector| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let recs = a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(x, y)| {
            x.k == y.k
                && x.lambda.to_bits() == y.lambda.to_bits()
                && x.residual.to_bits() == y.residual.to_bits()
        });
    let snaps = match (&a.snapshots, &b.snapshots) {
        (Some(x), Some(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| bits(&p.w) == bits(&q.w))
        }
        (None, None) => true,
        _ => false,
    };
    recs && snaps && bits(&a.last) == bits(&b.last)
}

fn hundred(gamma: f64, lambda: f64) -> AlgorithmConfig {
    AlgorithmConfig::new(
        gamma,
        RelaxationSchedule::Constant(lambda),
        StopRule::new(0.0, 100),
    )
    .with_snapshots()
}

/// The four reduction identities on seeded instances, as
/// `(name, left, right)` trace pairs.
pub fn reduction_pairs() -> Result<Vec<(&'static str, IterateTrace, IterateTrace)>> {
    let l1 = l1l1_instance()?;
    let lasso = lasso_instance()?;
    let mut rng = Rng::new(501);
    let x_l1 = rng.gaussian_vector(l1.dim());
    let x_lasso = rng.gaussian_vector(lasso.dim());

    let drs = l1.splitting(Algorithm::Drs)?;
    let dys = l1.splitting(Algorithm::Dys)?;
    let cfg = hundred(1.0, 1.3);
    let dys_c0 = dys_run(&dys.a, &dys.b, &dys.c, &cfg, &x_l1)?;
    let drs_l1 = drs_run(&drs.a, &drs.b, &cfg, &x_l1)?;

    let fbs = lasso.splitting(Algorithm::Fbs)?;
    let dys = lasso.splitting(Algorithm::Dys)?;
    let theta = fbs
        .c
        .cocoercivity()
        .expect("least-squares loss is cocoercive");
    let cfg_fb = hundred(theta, 1.2);
    let dys_b0 = dys_run(&dys.a, &dys.b, &dys.c, &cfg_fb, &x_lasso)?;
    let fbs_t = fbs_run(&fbs.a, &fbs.c, &cfg_fb, &x_lasso)?;

    let zero = ProxOperator::zero(lasso.dim());
    let cfg_p = hundred(0.7, 1.5);
    let drs_b0 = drs_run(&fbs.a, &zero, &cfg_p, &x_lasso)?;
    let gppa = gppa_run(&fbs.a, &cfg_p, &x_lasso)?;

    let as_ppa = drs_as_ppa_run(&drs.a, &drs.b, &cfg, &x_l1)?;

    Ok(vec![
        ("dys_run(C=0) == drs_run", dys_c0, drs_l1.clone()),
        ("dys_run(B=0) == fbs_run", dys_b0, fbs_t),
        ("drs_run(B=0) == gppa_run", drs_b0, gppa),
        ("drs_as_ppa_run == drs_run", as_ppa, drs_l1),
    ])
}

fn reductions() -> Vec<Check> {
    match reduction_pairs() {
        Ok(pairs) => pairs
            .into_iter()
            .map(|(name, a, b)| {
                let ok = bitwise_equal(&a, &b);
                Check {
                    name: name.into(),
                    passed: ok && a.records.len() > 1,
                    detail: format!("{} iterations compared bitwise", a.iterations()),
                }
            })
            .collect(),
        Err(e) => vec![Check::from_result("reduction instances", Err(e))],
    }
}

// ---------------------------------------------------------------------------
// Fejér audits.

/// Step size and relaxation used for each algorithm on the linear toy.
pub fn toy_parameters(alg: Algorithm) -> (f64, f64) {
    match alg {
        Algorithm::Fbs => (1.0, 1.2),
        Algorithm::Dys => (1.0, 1.5),
        _ => (1.0, 1.0),
    }
}

/// Quantified Fejér audit of `alg` on the linear toy over 200 iterations.
pub fn toy_fejer_audit(alg: Algorithm) -> Result<(bool, String)> {
    let toy = linear_toy()?;
    let z_star = &toy
        .reference
        .as_ref()
        .expect("linear toy has a reference")
        .z_star;
    let (gamma, lambda) = toy_parameters(alg);
    let w_ref = toy.driving_fixed_point(alg, gamma, z_star)?;
    let cfg = AlgorithmConfig::new(
        gamma,
        RelaxationSchedule::Constant(lambda),
        StopRule::new(0.0, 200),
    )
    .with_snapshots();
    let x0 = Rng::new(601).gaussian_vector(toy.dim()) * 5.0;
    let trace = toy.run(alg, &cfg, &x0)?;
    let alpha = toy.averagedness(alg, gamma)?;
    let report = check_fejer(&trace, &w_ref, alpha)?;
    Ok((
        report.passed(),
        format!(
            "{} steps, alpha = {alpha:.4}, worst slack {:.3e}, violations {:?}",
            report.slacks.len(),
            report.worst_slack,
            report.violations
        ),
    ))
}

fn fejer() -> Vec<Check> {
    [
        Algorithm::Gppa,
        Algorithm::Fbs,
        Algorithm::Drs,
        Algorithm::Dys,
    ]
    .into_iter()
    .map(|alg| {
        Check::from_result(
            format!("Fejer inequality for {alg} on linear toy"),
            toy_fejer_audit(alg),
        )
    })
    .collect()
}

// ---------------------------------------------------------------------------
// Lemma verifiers.

/// Largest DRS/PPA identity residual over `probes` Gaussian points.
pub fn drs_identity_max(
    problem: &ProblemInstance,
    gamma: f64,
    probes: usize,
    seed: u64,
) -> Result<f64> {
    let s = problem.splitting(Algorithm::Drs)?;
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let x = rng.gaussian_vector(problem.dim()) * 3.0;
        worst = worst.max(check_drs_ppa_identity(&s.a, &s.b, gamma, &x)?.max_residual());
    }
    Ok(worst)
}

fn lemmas() -> Vec<Check> {
    let mut checks = Vec::new();
    let instances: Result<Vec<(&str, ProblemInstance)>> = (|| {
        Ok(vec![
            ("l1/l1 seed 13", l1l1_instance()?),
            ("lasso seed 11", lasso_instance()?),
            ("linear toy", linear_toy()?),
        ])
    })();
    let instances = match instances {
        Ok(i) => i,
        Err(e) => return vec![Check::from_result("lemma instances", Err(e))],
    };
    for (name, inst) in &instances {
        checks.push(Check::from_result(
            format!("DRS map is the resolvent of S ({name})"),
            drs_identity_max(inst, 1.0, 100, 17).map(|w| {
                (
                    w <= AUDIT_TOL,
                    format!("max residual {w:.3e} over 100 probes"),
                )
            }),
        ));
    }
    let toy = &instances[2].1;
    let z_star = &toy
        .reference
        .as_ref()
        .expect("linear toy has a reference")
        .z_star;
    for case in FixedPointCase::ALL {
        let alg = if case.is_dys() {
            Algorithm::Dys
        } else {
            Algorithm::Drs
        };
        let r = toy
            .splitting(alg)
            .and_then(|s| verify_fixed_point_map(case, &s, 0.8, z_star));
        checks.push(Check::from_result(
            format!("fixed-point construction {case} on linear toy"),
            r.map(|r| {
                (
                    r.passed(),
                    format!(
                        "|Tx - x| = {:.3e}, |J_B x - z*| = {}",
                        r.fixed_point_residual,
                        r.resolvent_gap.map_or("n/a".into(), |g| format!("{g:.3e}"))
                    ),
                )
            }),
        ));
    }
    checks.push(Check::from_result(
        "residual R vanishes at the toy solution",
        toy.splitting(Algorithm::Drs)
            .and_then(|s| zero_residual(&s, 1.0, z_star))
            .map(|r| (r <= 1e-12, format!("|R(z*)| = {r:.3e}"))),
    ));
    checks
}

// ---------------------------------------------------------------------------
// Bound formulas.

/// `(γ, λ, L, ϑ)` tuples with `λ` strictly inside the case's admissible range.
pub fn bound_grid(case: RateCase, n: usize, seed: u64) -> Vec<(f64, f64, f64, f64)> {
    let mut rng = Rng::new(seed);
    (0..n)
        .map(|_| {
            let theta = 0.1 + 5.0 * rng.uniform();
            let gamma = if case.needs_cocoercivity() {
                2.0 * theta * (0.02 + 0.96 * rng.uniform())
            } else {
                0.05 + 10.0 * rng.uniform()
            };
            let lip = 5.0 * rng.uniform();
            let ub = case.relaxation_bound(gamma, Some(theta));
            let lambda = ub * (0.01 + 0.98 * rng.uniform());
            (gamma, lambda, lip, theta)
        })
        .collect()
}

/// Whether the factor is nondecreasing in `κ` over a 100-tuple grid.
pub fn kappa_monotone(case: RateCase) -> Result<(bool, String)> {
    let mut rng = Rng::new(701);
    let kappas = [0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0];
    let mut worst = f64::NEG_INFINITY;
    for (gamma, lambda, lip, theta) in bound_grid(case, 100, 700 + case as u64) {
        let jitter = rng.uniform();
        let mut prev = -1.0;
        for &k in &kappas {
            let f = rate_bound(
                case,
                gamma,
                k * (1.0 + jitter),
                lambda,
                Some(lip),
                Some(theta),
            )?
            .factor;
            worst = worst.max(prev - f);
            prev = f;
        }
    }
    Ok((worst <= 0.0, format!("largest decrease {worst:.3e}")))
}

/// Empirical rate of the proximal point method on `Fz = μz` against the
/// GPPA bound with `κ = 1/μ`.
pub fn exact_rate_toy(mu: f64, gamma: f64, lambda: f64) -> Result<(f64, f64)> {
    let n = 4;
    let inst = build_linear_monotone(&(Matrix::identity(n, n) * mu), &Vector::zeros(n))?;
    let cfg = AlgorithmConfig::new(
        gamma,
        RelaxationSchedule::Constant(lambda),
        StopRule::new(1e-14, 100_000),
    )
    .with_reference(Vector::zeros(n));
    let x0 = Vector::from_fn(n, |i, _| 1.0 + i as f64);
    let trace = inst.run(Algorithm::Gppa, &cfg, &x0)?;
    let rate = empirical_rate(&trace, 0.5)?.rate;
    let kappa = inst.kappa.expect("scaled identity is strongly monotone");
    let bound = rate_bound(RateCase::Gppa, gamma, kappa, lambda, None, None)?.factor;
    Ok((rate, bound))
}

fn bounds() -> Vec<Check> {
    let mut checks = Vec::new();
    for case in [RateCase::Gppa, RateCase::DrsPpa] {
        let r = (|| {
            let mut worst = 0.0f64;
            for lambda in [0.1, 0.5, 1.0, 1.5, 1.9] {
                let f = rate_bound(case, 1.0, 0.0, lambda, None, None)?.factor;
                worst = worst.max((f - (1.0 - lambda * (2.0 - lambda)).sqrt()).abs());
            }
            Ok((worst <= 1e-12, format!("max deviation {worst:.3e}")))
        })();
        checks.push(Check::from_result(format!("{case} at kappa = 0"), r));
    }
    for case in RateCase::ALL {
        checks.push(Check::from_result(
            format!("{case} factor nondecreasing in kappa"),
            kappa_monotone(case),
        ));
    }
    let r = (|| {
        let (rate, bound) = exact_rate_toy(1.0, 1.0, 1.0)?;
        Ok((
            (rate - 0.5).abs() <= 1e-6
                && (bound - 3f64.sqrt() / 2.0).abs() <= 1e-9
                && rate <= bound,
            format!("empirical {rate:.9}, bound {bound:.9}"),
        ))
    })();
    checks.push(Check::from_result("exact rate on F = I with gamma = 1", r));
    let r = (|| {
        let mut worst = f64::NEG_INFINITY;
        for gamma in [0.1, 1.0, 10.0] {
            for lambda in [0.5, 1.0, 1.5] {
                let (rate, bound) = exact_rate_toy(1.0, gamma, lambda)?;
                worst = worst.max(rate - bound);
            }
        }
        Ok((
            worst <= 1e-6,
            format!("max(empirical - bound) = {worst:.3e}"),
        ))
    })();
    checks.push(Check::from_result(
        "empirical rate below GPPA bound on F = I",
        r,
    ));
    let r = (|| {
        let mut worst = f64::INFINITY;
        let mut rng = Rng::new(801);
        for _ in 0..100 {
            let gamma = 0.05 + 5.0 * rng.uniform();
            let kappa = 5.0 * rng.uniform();
            let lip = 5.0 * rng.uniform();
            let r = subregularity_transfer(
                Provenance::FToR,
                &TransferInputs::new(gamma, kappa).lipschitz(lip),
            )?;
            let f = subregularity_transfer(Provenance::RToF, &TransferInputs::new(gamma, r.kappa))?;
            let expected = gamma + kappa * (1.0 + gamma * lip);
            if (f.kappa - expected).abs() > 1e-12 * expected {
                return Ok((
                    false,
                    format!("composition gave {} instead of {expected}", f.kappa),
                ));
            }
            worst = worst.min(f.kappa - kappa);
        }
        Ok((
            worst >= 0.0,
            format!("min(kappa_out - kappa_in) = {worst:.3e}"),
        ))
    })();
    checks.push(Check::from_result("F_TO_R then R_TO_F composition", r));
    checks
}
