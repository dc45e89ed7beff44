//! Krasnosel'skii–Mann engine and the four splitting iterations built on it.
//!
//! Every algorithm is a relaxed fixed-point iteration
//! `w^{k+1} = w^k + λ_k (T w^k − w^k)` for an averaged operator `T`:
//!
//! | algorithm | `T`                                               | `λ_k` bound          |
//! |-----------|---------------------------------------------------|----------------------|
//! | PPA       | `J_{γF}`                                          | `2`                  |
//! | FBS       | `J_{γA}(I − γC)`                                  | `min(1, ϑ/γ) + ½`    |
//! | DRS       | `½((2J_{γA} − I)(2J_{γB} − I) + I)`               | `2`                  |
//! | DYS       | `I − J_{γB} + J_{γA}(2J_{γB} − I − γC J_{γB})`    | `(4ϑ − γ)/(2ϑ)`      |
//!
//! The step direction `T w − w` is computed once per iteration and reused
//! both for the update and for the recorded fixed-point residual.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ensure_len, Vector};
use crate::operators::{ForwardOperator, ProxOperator};

/// Residual above which a run is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Slack allowed when comparing a relaxation parameter with its bound.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gppa,
    Fbs,
    Drs,
    DrsAsPpa,
    Dys,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Gppa,
        Algorithm::Fbs,
        Algorithm::Drs,
        Algorithm::DrsAsPpa,
        Algorithm::Dys,
    ];

    /// Upper bound on `λ_k`, i.e. `1/α` for the `α`-averaged operator `T`.
    /// `theta` is the cocoercivity of the forward operator where one takes part.
    pub fn relaxation_bound(self, gamma: f64, theta: Option<f64>) -> Result<f64> {
        match self {
            Self::Gppa | Self::Drs | Self::DrsAsPpa => Ok(2.0),
            Self::Fbs => {
                let theta = require_theta(self, theta)?;
                check_step_cocoercive(self, gamma, theta)?;
                Ok(fbs_delta(gamma, theta))
            }
            Self::Dys => {
                let theta = require_theta(self, theta)?;
                check_step_cocoercive(self, gamma, theta)?;
                Ok(dys_bound(gamma, theta))
            }
        }
    }

    /// Averagedness constant `α` of the iteration operator.
    pub fn averagedness(self, gamma: f64, theta: Option<f64>) -> Result<f64> {
        Ok(1.0 / self.relaxation_bound(gamma, theta)?)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gppa => "gppa",
            Self::Fbs => "fbs",
            Self::Drs => "drs",
            Self::DrsAsPpa => "drs_as_ppa",
            Self::Dys => "dys",
        })
    }
}

/// `δ = min(1, ϑ/γ) + ½`.
pub fn fbs_delta(gamma: f64, theta: f64) -> f64 {
    (theta / gamma).min(1.0) + 0.5
}

/// `(4ϑ − γ)/(2ϑ)`, written as `2 − γ/(2ϑ)` so that `ϑ = ∞` gives 2.
pub fn dys_bound(gamma: f64, theta: f64) -> f64 {
    2.0 - gamma / (2.0 * theta)
}

fn require_theta(alg: Algorithm, theta: Option<f64>) -> Result<f64> {
    theta.ok_or_else(|| {
        Error::Config(format!(
            "{alg} requires a cocoercive forward operator (cocoercivity constant theta missing)"
        ))
    })
}

fn check_step_cocoercive(alg: Algorithm, gamma: f64, theta: f64) -> Result<()> {
    if !(gamma > 0.0) || !(gamma < 2.0 * theta) {
        return Err(Error::Config(format!(
            "{alg}: step size gamma = {gamma} violates gamma in (0, 2*theta) = (0, {}) \
             required by cocoercivity of the forward operator",
            2.0 * theta
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationSchedule {
    /// `λ_k = λ`.
    Constant(f64),
    /// `λ_k = top − c/(k + 1)`.
    Vanishing { top: f64, c: f64 },
    /// Explicit values; the last one repeats.
    Explicit(Vec<f64>),
}

impl RelaxationSchedule {
    pub fn lambda(&self, k: usize) -> f64 {
        match self {
            Self::Constant(l) => *l,
            Self::Vanishing { top, c } => top - c / (k as f64 + 1.0),
            Self::Explicit(v) => v.get(k).or(v.last()).copied().unwrap_or(0.0),
        }
    }

    /// `(inf, sup)` over all emitted values, where known in closed form.
    fn range(&self) -> Option<(f64, f64)> {
        match self {
            Self::Constant(l) => Some((*l, *l)),
            Self::Vanishing { top, c } => {
                if *c >= 0.0 {
                    Some((top - c, *top))
                } else {
                    Some((*top, top - c))
                }
            }
            Self::Explicit(_) => None,
        }
    }

    fn check_value(lambda: f64, k: usize, ub: f64) -> Result<()> {
        if !(lambda >= 0.0) || lambda > ub + BOUND_SLACK {
            return Err(Error::Config(format!(
                "relaxation parameter lambda_{k} = {lambda} outside [0, {ub}]"
            )));
        }
        Ok(())
    }

    /// Checks that every emitted value lies in `[0, ub]`.
    pub fn check_bounds(&self, ub: f64) -> Result<()> {
        match self.range() {
            Some((lo, hi)) => {
                Self::check_value(lo, 0, ub)?;
                Self::check_value(hi, usize::MAX, ub)
            }
            None => Ok(()),
        }
    }
}

/// Outcome of [`schedule_validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleVerdict {
    pub ok: bool,
    pub diagnostic: String,
}

/// Decides whether `Σ λ_k (ub − λ_k) = +∞` for the schedule family.
pub fn schedule_validate(schedule: &RelaxationSchedule, ub: f64) -> Result<ScheduleVerdict> {
    if !(ub > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relaxation bound must be positive, got {ub}"
        )));
    }
    let verdict = match *schedule {
        RelaxationSchedule::Constant(l) => {
            if l > 0.0 && l < ub {
                ScheduleVerdict {
                    ok: true,
                    diagnostic: format!("constant terms {l}*({ub} - {l}) > 0 sum to infinity"),
                }
            } else {
                ScheduleVerdict {
                    ok: false,
                    diagnostic: format!("constant lambda = {l} must lie strictly inside (0, {ub})"),
                }
            }
        }
        RelaxationSchedule::Vanishing { top, c } => {
            if !(c > 0.0) || c > top {
                ScheduleVerdict {
                    ok: false,
                    diagnostic: format!(
                        "vanishing schedule needs 0 < c <= top, got c = {c}, top = {top}"
                    ),
                }
            } else if top > ub {
                ScheduleVerdict {
                    ok: false,
                    diagnostic: format!("vanishing schedule limit {top} exceeds bound {ub}"),
                }
            } else if top < ub {
                ScheduleVerdict {
                    ok: true,
                    diagnostic: format!(
                        "terms tend to {top}*({ub} - {top}) > 0 and sum to infinity"
                    ),
                }
            } else {
                ScheduleVerdict {
                    ok: true,
                    diagnostic:
                        "terms (ub - c/(k+1))*c/(k+1) dominate a multiple of the harmonic series"
                            .to_string(),
                }
            }
        }
        RelaxationSchedule::Explicit(_) => {
            return Err(Error::UnsupportedSchedule(
                "explicit sequences admit no series analysis",
            ))
        }
    };
    Ok(verdict)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Stop once `‖T w^k − w^k‖ ≤ residual_tol`.
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl StopRule {
    pub fn new(residual_tol: f64, max_iter: usize) -> Self {
        Self {
            residual_tol,
            max_iter,
        }
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self::new(1e-10, 10_000)
    }
}

/// What a run records besides residuals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceOptions {
    /// Keep every iterate (and the auxiliary sequences for DRS/DYS).
    pub snapshots: bool,
    /// Reference solution. Distances are taken from `z^k` for DRS and DYS
    /// and from the driving iterate otherwise.
    pub reference: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    pub gamma: f64,
    pub schedule: RelaxationSchedule,
    pub stop: StopRule,
    pub trace: TraceOptions,
}

impl AlgorithmConfig {
    pub fn new(gamma: f64, schedule: RelaxationSchedule, stop: StopRule) -> Self {
        Self {
            gamma,
            schedule,
            stop,
            trace: TraceOptions::default(),
        }
    }

    pub fn with_snapshots(mut self) -> Self {
        self.trace.snapshots = true;
        self
    }

    pub fn with_reference(mut self, reference: Vector) -> Self {
        self.trace.reference = Some(reference);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub k: usize,
    pub lambda: f64,
    /// `‖T w^k − w^k‖`.
    pub residual: f64,
    pub dist_to_ref: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub w: Vector,
    /// `(z^k, y^k)` for DRS and DYS.
    pub aux: Option<(Vector, Vector)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
}

/// Per-iteration record of a run. Record `k` describes `w^k`; the update
/// with `λ_k` leads to record `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateTrace {
    pub label: String,
    pub records: Vec<IterRecord>,
    pub snapshots: Option<Vec<Snapshot>>,
    pub termination: Termination,
    /// Driving iterate at termination.
    pub last: Vector,
    /// `(z, y)` at termination for DRS and DYS.
    pub last_aux: Option<(Vector, Vector)>,
}

impl IterateTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.residual)
    }

    pub fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.residual)
    }

    pub fn distances(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.dist_to_ref).collect()
    }

    /// The point the trace attributes to the solution set: `z` for DRS/DYS,
    /// otherwise the driving iterate.
    pub fn solution_estimate(&self) -> &Vector {
        self.last_aux.as_ref().map_or(&self.last, |(z, _)| z)
    }
}

/// One evaluation of the iteration operator at `w`.
pub struct Step {
    /// `T w − w`.
    pub direction: Vector,
    pub aux: Option<(Vector, Vector)>,
}

fn run_engine(
    label: String,
    mut step: impl FnMut(&Vector) -> Result<Step>,
    w0: &Vector,
    schedule: &RelaxationSchedule,
    ub: f64,
    stop: &StopRule,
    opts: &TraceOptions,
) -> Result<IterateTrace> {
    if !(stop.residual_tol >= 0.0) {
        return Err(Error::Config(format!(
            "residual tolerance must be nonnegative, got {}",
            stop.residual_tol
        )));
    }
    if let Some(r) = &opts.reference {
        ensure_len(r, w0.len(), "reference point")?;
    }
    schedule.check_bounds(ub)?;
    if w0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteIterate { iteration: 0 });
    }

    let mut w = w0.clone();
    let mut records = Vec::new();
    let mut snapshots = opts.snapshots.then(Vec::new);
    let mut k = 0usize;
    loop {
        let Step { direction, aux } = step(&w)?;
        let residual = direction.norm();
        if !residual.is_finite() {
            return Err(Error::NonFiniteIterate { iteration: k });
        }
        if residual > DIVERGENCE_THRESHOLD {
            return Err(Error::Diverged {
                iteration: k,
                residual,
            });
        }
        let lambda = schedule.lambda(k);
        RelaxationSchedule::check_value(lambda, k, ub)?;
        let dist_to_ref = opts.reference.as_ref().map(|r| {
            let point = aux.as_ref().map_or(&w, |(z, _)| z);
            (point - r).norm()
        });
        records.push(IterRecord {
            k,
            lambda,
            residual,
            dist_to_ref,
        });
        if let Some(s) = snapshots.as_mut() {
            s.push(Snapshot {
                w: w.clone(),
                aux: aux.clone(),
            });
        }

        let termination = if residual <= stop.residual_tol {
            Some(Termination::Converged)
        } else if k >= stop.max_iter {
            Some(Termination::MaxIter)
        } else {
            None
        };
        if let Some(termination) = termination {
            return Ok(IterateTrace {
                label,
                records,
                snapshots,
                termination,
                last: w,
                last_aux: aux,
            });
        }

        w += direction * lambda;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIterate { iteration: k + 1 });
        }
        k += 1;
    }
}

/// Relaxed fixed-point iteration `w^{k+1} = w^k + μ_k(T w^k − w^k)` for an
/// operator `T` assumed `avg_bound`-averaged; `μ_k` must stay in
/// `[0, 1/avg_bound]`.
pub fn km_run(
    mut t: impl FnMut(&Vector) -> Result<Vector>,
    w0: &Vector,
    schedule: &RelaxationSchedule,
    avg_bound: f64,
    stop: &StopRule,
    opts: &TraceOptions,
) -> Result<IterateTrace> {
    if !(avg_bound > 0.0 && avg_bound <= 1.0) {
        return Err(Error::Config(format!(
            "averagedness constant must lie in (0, 1], got {avg_bound}"
        )));
    }
    run_engine(
        "km".into(),
        |w| {
            let tw = t(w)?;
            ensure_len(&tw, w.len(), "fixed-point map output")?;
            Ok(Step {
                direction: tw - w,
                aux: None,
            })
        },
        w0,
        schedule,
        1.0 / avg_bound,
        stop,
        opts,
    )
}

/// Relaxed proximal point iteration `z^{k+1} = z^k + λ_k(J_{γF} z^k − z^k)`.
pub fn gppa_run(f: &ProxOperator, cfg: &AlgorithmConfig, z0: &Vector) -> Result<IterateTrace> {
    ensure_len(z0, f.dim(), "initial point")?;
    let gamma = check_gamma(cfg.gamma)?;
    let ub = Algorithm::Gppa.relaxation_bound(gamma, None)?;
    run_engine(
        "gppa".into(),
        |z| {
            let jz = f.resolvent(gamma, z)?;
            Ok(Step {
                direction: jz - z,
                aux: None,
            })
        },
        z0,
        &cfg.schedule,
        ub,
        &cfg.stop,
        &cfg.trace,
    )
}

/// Over-relaxed forward–backward iteration
/// `z^{k+1} = z^k + λ_k(J_{γA}(z^k − γC z^k) − z^k)`.
pub fn fbs_run(
    a: &ProxOperator,
    c: &ForwardOperator,
    cfg: &AlgorithmConfig,
    z0: &Vector,
) -> Result<IterateTrace> {
    ensure_len(z0, a.dim(), "initial point")?;
    check_dims(a.dim(), c.dim(), "forward operator")?;
    let gamma = check_gamma(cfg.gamma)?;
    let ub = Algorithm::Fbs.relaxation_bound(gamma, c.cocoercivity())?;
    run_engine(
        "fbs".into(),
        |z| {
            let cz = c.apply(z)?;
            let t = a.resolvent(gamma, &(z - cz * gamma))?;
            Ok(Step {
                direction: t - z,
                aux: None,
            })
        },
        z0,
        &cfg.schedule,
        ub,
        &cfg.stop,
        &cfg.trace,
    )
}

/// `z = J_{γB}x`, `y = J_{γA}(2z − x)`.
pub fn drs_step(
    a: &ProxOperator,
    b: &ProxOperator,
    gamma: f64,
    x: &Vector,
) -> Result<(Vector, Vector)> {
    let z = b.resolvent(gamma, x)?;
    let y = a.resolvent(gamma, &(&z * 2.0 - x))?;
    Ok((z, y))
}

/// `z = J_{γB}x`, `y = J_{γA}(2z − x − γCz)`.
pub fn dys_step(
    a: &ProxOperator,
    b: &ProxOperator,
    c: &ForwardOperator,
    gamma: f64,
    x: &Vector,
) -> Result<(Vector, Vector)> {
    let z = b.resolvent(gamma, x)?;
    let cz = c.apply(&z)?;
    let y = a.resolvent(gamma, &((&z * 2.0 - x) - cz * gamma))?;
    Ok((z, y))
}

/// DRS fixed-point map `T x = x + (y − z)`.
pub fn drs_operator(a: &ProxOperator, b: &ProxOperator, gamma: f64, x: &Vector) -> Result<Vector> {
    let (z, y) = drs_step(a, b, gamma, x)?;
    Ok(x + (y - z))
}

/// Davis–Yin fixed-point map `T x = x + (y − z)`.
pub fn dys_operator(
    a: &ProxOperator,
    b: &ProxOperator,
    c: &ForwardOperator,
    gamma: f64,
    x: &Vector,
) -> Result<Vector> {
    let (z, y) = dys_step(a, b, c, gamma, x)?;
    Ok(x + (y - z))
}

fn drs_like(
    label: &str,
    a: &ProxOperator,
    b: &ProxOperator,
    cfg: &AlgorithmConfig,
    x0: &Vector,
) -> Result<IterateTrace> {
    ensure_len(x0, b.dim(), "initial point")?;
    check_dims(a.dim(), b.dim(), "operator A")?;
    let gamma = check_gamma(cfg.gamma)?;
    let ub = Algorithm::Drs.relaxation_bound(gamma, None)?;
    run_engine(
        label.into(),
        |x| {
            let (z, y) = drs_step(a, b, gamma, x)?;
            let direction = &y - &z;
            Ok(Step {
                direction,
                aux: Some((z, y)),
            })
        },
        x0,
        &cfg.schedule,
        ub,
        &cfg.stop,
        &cfg.trace,
    )
}

/// Generalized Douglas–Rachford iteration
/// `z^k = J_{γB}x^k`, `y^k = J_{γA}(2z^k − x^k)`, `x^{k+1} = x^k + λ_k(y^k − z^k)`.
pub fn drs_run(
    a: &ProxOperator,
    b: &ProxOperator,
    cfg: &AlgorithmConfig,
    x0: &Vector,
) -> Result<IterateTrace> {
    drs_like("drs", a, b, cfg, x0)
}

/// The DRS recursion read as a proximal point iteration on the operator `S`
/// whose resolvent is the DRS map; numerically identical to [`drs_run`].
pub fn drs_as_ppa_run(
    a: &ProxOperator,
    b: &ProxOperator,
    cfg: &AlgorithmConfig,
    x0: &Vector,
) -> Result<IterateTrace> {
    drs_like("drs_as_ppa", a, b, cfg, x0)
}

/// Davis–Yin three-operator iteration
/// `z^k = J_{γB}x^k`, `y^k = J_{γA}(2z^k − x^k − γCz^k)`,
/// `x^{k+1} = x^k + λ_k(y^k − z^k)`.
pub fn dys_run(
    a: &ProxOperator,
    b: &ProxOperator,
    c: &ForwardOperator,
    cfg: &AlgorithmConfig,
    x0: &Vector,
) -> Result<IterateTrace> {
    ensure_len(x0, b.dim(), "initial point")?;
    check_dims(a.dim(), b.dim(), "operator A")?;
    check_dims(c.dim(), b.dim(), "forward operator")?;
    let gamma = check_gamma(cfg.gamma)?;
    let ub = Algorithm::Dys.relaxation_bound(gamma, c.cocoercivity())?;
    run_engine(
        "dys".into(),
        |x| {
            let (z, y) = dys_step(a, b, c, gamma, x)?;
            let direction = &y - &z;
            Ok(Step {
                direction,
                aux: Some((z, y)),
            })
        },
        x0,
        &cfg.schedule,
        ub,
        &cfg.stop,
        &cfg.trace,
    )
}

/// Operator triple for the inclusion `0 ∈ A z + B z + C z`; `C` is the zero
/// operator for two-operator splittings.
#[derive(Debug, Clone)]
pub struct Splitting {
    pub a: ProxOperator,
    pub b: ProxOperator,
    pub c: ForwardOperator,
}

impl Splitting {
    pub fn new(a: ProxOperator, b: ProxOperator, c: ForwardOperator) -> Result<Self> {
        check_dims(a.dim(), b.dim(), "operator A")?;
        check_dims(c.dim(), b.dim(), "forward operator")?;
        Ok(Self { a, b, c })
    }

    pub fn pair(a: ProxOperator, b: ProxOperator) -> Result<Self> {
        let c = ForwardOperator::zero(b.dim());
        Self::new(a, b, c)
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn has_forward(&self) -> bool {
        !self.c.is_zero()
    }
}

fn check_gamma(gamma: f64) -> Result<f64> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(gamma)
    } else {
        Err(Error::Config(format!(
            "step size gamma must be positive and finite, got {gamma}"
        )))
    }
}

fn check_dims(found: usize, expected: usize, context: &'static str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn cfg(gamma: f64, lambda: f64, max_iter: usize) -> AlgorithmConfig {
        AlgorithmConfig::new(
            gamma,
            RelaxationSchedule::Constant(lambda),
            StopRule::new(0.0, max_iter),
        )
    }

    #[test]
    fn km_constant_map_one_step() {
        let c = v(&[1.0, -2.0]);
        let cc = c.clone();
        let trace = km_run(
            move |_| Ok(cc.clone()),
            &v(&[5.0, 5.0]),
            &RelaxationSchedule::Constant(1.0),
            1.0,
            &StopRule::new(0.0, 5),
            &TraceOptions {
                snapshots: true,
                reference: None,
            },
        )
        .unwrap();
        let snaps = trace.snapshots.as_ref().unwrap();
        assert_eq!(snaps[1].w, c);
        assert_eq!(trace.records[1].residual, 0.0);
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.records.len(), 2);
    }

    #[test]
    fn km_identity_is_stationary() {
        let w0 = v(&[0.3, 0.7]);
        let trace = km_run(
            |w| Ok(w.clone()),
            &w0,
            &RelaxationSchedule::Constant(1.0),
            1.0,
            &StopRule::new(-0.0, 3),
            &TraceOptions::default(),
        )
        .unwrap();
        assert_eq!(trace.last, w0);
        assert!(trace.residuals().all(|r| r == 0.0));
    }

    #[test]
    fn km_halving_is_geometric() {
        let trace = km_run(
            |w| Ok(w * 0.5),
            &v(&[1.0]),
            &RelaxationSchedule::Constant(1.0),
            1.0,
            &StopRule::new(0.0, 20),
            &TraceOptions {
                snapshots: true,
                reference: None,
            },
        )
        .unwrap();
        for (k, s) in trace.snapshots.unwrap().iter().enumerate() {
            assert_eq!(s.w[0], 2f64.powi(-(k as i32)));
        }
    }

    #[test]
    fn km_rejects_nan_with_index() {
        let mut calls = 0;
        let err = km_run(
            |w| {
                calls += 1;
                Ok(if calls == 3 { w * f64::NAN } else { w * 0.5 })
            },
            &v(&[1.0]),
            &RelaxationSchedule::Constant(1.0),
            1.0,
            &StopRule::new(0.0, 10),
            &TraceOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::NonFiniteIterate { iteration: 2 });
    }

    #[test]
    fn km_divergence_guard() {
        let err = km_run(
            |w| Ok(w * 10.0),
            &v(&[1.0]),
            &RelaxationSchedule::Constant(1.0),
            1.0,
            &StopRule::new(0.0, 100),
            &TraceOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn km_schedule_must_respect_averagedness() {
        let err = km_run(
            |w| Ok(w * 0.5),
            &v(&[1.0]),
            &RelaxationSchedule::Constant(1.5),
            1.0,
            &StopRule::new(0.0, 10),
            &TraceOptions::default(),
        );
        assert!(matches!(err, Err(Error::Config(_))));
        let err = km_run(
            |w| Ok(w * 0.5),
            &v(&[1.0]),
            &RelaxationSchedule::Explicit(vec![1.0, 1.0, 3.0]),
            0.5,
            &StopRule::new(0.0, 10),
            &TraceOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("lambda_2"));
    }

    fn scaled_identity(mu: f64, n: usize) -> ProxOperator {
        ProxOperator::linear(&(Matrix::identity(n, n) * mu), &Vector::zeros(n)).unwrap()
    }

    #[test]
    fn gppa_scaled_identity_halves() {
        let f = scaled_identity(2.0, 1);
        let trace = gppa_run(&f, &cfg(0.5, 1.0, 30).with_snapshots(), &v(&[1.0])).unwrap();
        for (k, s) in trace.snapshots.unwrap().iter().enumerate() {
            assert!((s.w[0] - 2f64.powi(-(k as i32))).abs() <= 1e-15 * s.w[0].abs().max(1e-300));
        }
    }

    #[test]
    fn gppa_fixed_point_and_zero_relaxation() {
        let f = scaled_identity(1.0, 2);
        let trace = gppa_run(&f, &cfg(1.0, 1.0, 5), &Vector::zeros(2)).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.last, Vector::zeros(2));
        let trace = gppa_run(&f, &cfg(1.0, 0.0, 5), &v(&[1.0, 2.0])).unwrap();
        assert_eq!(trace.last, v(&[1.0, 2.0]));
        assert!(gppa_run(&f, &cfg(1.0, 2.5, 5), &v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn fbs_step_zero_for_identity_gradient() {
        let a = ProxOperator::zero(2);
        let c = ForwardOperator::new("id", 2, |x: &Vector| x.clone())
            .with_lipschitz(1.0)
            .with_cocoercivity(1.0);
        let trace = fbs_run(&a, &c, &cfg(1.0, 1.0, 3).with_snapshots(), &v(&[3.0, -1.0])).unwrap();
        assert_eq!(trace.snapshots.unwrap()[1].w, Vector::zeros(2));
    }

    #[test]
    fn fbs_rejects_large_step() {
        let a = ProxOperator::zero(1);
        let c = ForwardOperator::new("id", 1, |x: &Vector| x.clone()).with_cocoercivity(1.0);
        let err = fbs_run(&a, &c, &cfg(3.0, 1.0, 3), &v(&[1.0])).unwrap_err();
        assert!(err.to_string().contains("2*theta"), "{err}");
        // delta = min(1, 1/1.5) + 0.5 ≈ 1.1667 < 1.2
        let err = fbs_run(&a, &c, &cfg(1.5, 1.2, 3), &v(&[1.0])).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn fbs_lasso_identity_design_soft_thresholds() {
        let b = v(&[2.0, -0.3, 0.9, -1.7]);
        let reg = 0.5;
        let a = ProxOperator::l1(4, reg).unwrap();
        let c = ForwardOperator::least_squares(&Matrix::identity(4, 4), &b).unwrap();
        for gamma in [0.3, 1.0, 1.7] {
            let trace = fbs_run(
                &a,
                &c,
                &AlgorithmConfig::new(
                    gamma,
                    RelaxationSchedule::Constant(1.0),
                    StopRule::new(1e-14, 10_000),
                ),
                &Vector::zeros(4),
            )
            .unwrap();
            let expected = crate::operators::prox_l1(&b, reg);
            assert!((&trace.last - expected).amax() < 1e-8);
        }
    }

    #[test]
    fn drs_trivial_operators() {
        let z = ProxOperator::zero(3);
        let x0 = v(&[1.0, 2.0, 3.0]);
        let trace = drs_run(&z, &z, &cfg(1.0, 1.5, 10), &x0).unwrap();
        assert_eq!(trace.last, x0);
    }

    #[test]
    fn dys_accepts_zero_forward_with_relaxation_two() {
        let a = scaled_identity(1.0, 2);
        let b = ProxOperator::zero(2);
        let c = ForwardOperator::zero(2);
        assert!(dys_run(&a, &b, &c, &cfg(100.0, 2.0, 5), &v(&[1.0, 1.0])).is_ok());
        let c = ForwardOperator::new("id", 2, |x: &Vector| x.clone()).with_cocoercivity(1.0);
        // (4 - 1)/2 = 1.5
        assert!(dys_run(&a, &b, &c, &cfg(1.0, 1.6, 5), &v(&[1.0, 1.0])).is_err());
        assert!(dys_run(&a, &b, &c, &cfg(1.0, 1.5, 5), &v(&[1.0, 1.0])).is_ok());
        assert!(dys_run(&a, &b, &c, &cfg(2.0, 1.0, 5), &v(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn schedule_validation_cases() {
        let ok = |s: RelaxationSchedule, ub| schedule_validate(&s, ub).unwrap().ok;
        assert!(ok(RelaxationSchedule::Constant(1.0), 2.0));
        assert!(!ok(RelaxationSchedule::Constant(2.0), 2.0));
        assert!(!ok(RelaxationSchedule::Constant(0.0), 2.0));
        assert!(ok(RelaxationSchedule::Vanishing { top: 2.0, c: 1.0 }, 2.0));
        assert!(ok(RelaxationSchedule::Vanishing { top: 2.0, c: 2.0 }, 2.0));
        assert!(!ok(RelaxationSchedule::Vanishing { top: 2.0, c: 2.5 }, 2.0));
        assert!(!ok(RelaxationSchedule::Vanishing { top: 2.5, c: 1.0 }, 2.0));
        assert!(matches!(
            schedule_validate(&RelaxationSchedule::Explicit(vec![1.0]), 2.0),
            Err(Error::UnsupportedSchedule(_))
        ));
    }

    #[test]
    fn vanishing_schedule_values() {
        let s = RelaxationSchedule::Vanishing { top: 2.0, c: 1.0 };
        assert_eq!(s.lambda(0), 1.0);
        assert_eq!(s.lambda(1), 1.5);
        assert!(s.check_bounds(2.0).is_ok());
        assert!(RelaxationSchedule::Vanishing { top: 2.0, c: 3.0 }
            .check_bounds(2.0)
            .is_err());
    }

    #[test]
    fn trace_length_bounded_by_cap() {
        let f = scaled_identity(1.0, 1);
        let trace = gppa_run(&f, &cfg(1.0, 1.0, 7), &v(&[1.0])).unwrap();
        assert_eq!(trace.records.len(), 8);
        assert_eq!(trace.termination, Termination::MaxIter);
        assert!(trace.snapshots.is_none());
    }
}
