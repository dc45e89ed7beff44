//! Test instances for the splittings and independent reference solutions.
//!
//! Three families are supported:
//!
//! * `L1L1`: `min ‖Ax − b‖₁ + λ‖x‖₁` in saddle-point form on `(x, y)`,
//!   with the skew coupling `(Aᵀy, −Ax)` as `B` and the separable
//!   subdifferentials `(λ∂‖·‖₁, ∂g*)` as `A`.
//! * `LASSO`: `min ½‖Ax − b‖² + λ‖x‖_p` (optionally group-wise), in a
//!   forward–backward and a Douglas–Rachford orientation.
//! * `LINEAR_MONOTONE`: `Fz = Mz + q` with `M + Mᵀ ⪰ 0`.

use std::fmt;

use nalgebra::SVD;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{fixed_point_from_solution, residual_R, FixedPointCase};
use crate::error::{Error, Result};
use crate::linalg::{
    ensure_len, rng_gaussian, serde_rows, serde_vector, LuFactor, Matrix, Rng, SpdFactor, Vector,
};
use crate::operators::{
    min_symmetric_eigenvalue, project_box, prox_l1, symmetrize, ForwardOperator, Groups, NormOrder,
    ProxOperator,
};
use crate::splitting::{
    drs_as_ppa_run, drs_run, dys_run, fbs_run, gppa_run, Algorithm, AlgorithmConfig, IterateTrace,
    RelaxationSchedule, Splitting, StopRule,
};

/// Largest dimension the sign-pattern oracle accepts.
pub const SIGN_ENUM_MAX_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "L1L1")]
    L1L1,
    #[serde(rename = "LASSO")]
    Lasso,
    #[serde(rename = "LINEAR_MONOTONE")]
    LinearMonotone,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::L1L1 => "L1L1",
            Self::Lasso => "LASSO",
            Self::LinearMonotone => "LINEAR_MONOTONE",
        })
    }
}

/// Sufficient condition under which `F = A + B (+ C)` is metrically
/// subregular at its zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label")]
pub enum SubregularityCertificate {
    /// `F` strongly monotone with constant `alpha`.
    C1 { alpha: f64 },
    /// Affine single-valued part plus a polyhedral operator.
    C2,
    /// Least-squares loss plus an `ℓ_p` regularizer, `p ∈ {1, 2, ∞}`.
    C3 { p: NormOrder },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReferenceMethod {
    SignEnum,
    CrossAlgorithm,
    ClosedForm,
    LinearSolve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceSolution {
    /// A zero of `F`, in the space the algorithms iterate on.
    #[serde(with = "serde_vector")]
    pub z_star: Vector,
    pub tol: f64,
    /// Optimality residual at `z_star` when computed.
    pub residual: f64,
    pub method: ReferenceMethod,
}

/// Problem data the operators were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProblemData {
    #[serde(rename = "L1L1")]
    L1L1 {
        #[serde(with = "serde_rows")]
        a: Matrix,
        #[serde(with = "serde_vector")]
        b: Vector,
        reg: f64,
    },
    #[serde(rename = "LASSO")]
    Lasso {
        #[serde(with = "serde_rows")]
        a: Matrix,
        #[serde(with = "serde_vector")]
        b: Vector,
        reg: f64,
        p: NormOrder,
        groups: Groups,
    },
    #[serde(rename = "LINEAR_MONOTONE")]
    LinearMonotone {
        #[serde(with = "serde_rows")]
        m: Matrix,
        #[serde(with = "serde_vector")]
        q: Vector,
    },
}

impl ProblemData {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Self::L1L1 { .. } => ProblemKind::L1L1,
            Self::Lasso { .. } => ProblemKind::Lasso,
            Self::LinearMonotone { .. } => ProblemKind::LinearMonotone,
        }
    }
}

/// The operator triples each algorithm runs on.
#[derive(Debug, Clone, Default)]
pub struct Orientations {
    pub ppa: Option<ProxOperator>,
    /// `b` is the zero operator; `c` the cocoercive part.
    pub fbs: Option<Splitting>,
    /// `c` is the zero operator.
    pub drs: Option<Splitting>,
    pub dys: Option<Splitting>,
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub data: ProblemData,
    pub seed: Option<u64>,
    /// `(n, m)`: unknowns and measurements (`m = n` for linear instances).
    pub dims: (usize, usize),
    pub orientations: Orientations,
    pub certificate: Option<SubregularityCertificate>,
    /// Exact subregularity modulus where known.
    pub kappa: Option<f64>,
    pub reference: Option<ReferenceSolution>,
}

impl ProblemInstance {
    pub fn kind(&self) -> ProblemKind {
        self.data.kind()
    }

    /// Dimension of the space the algorithms iterate on.
    pub fn dim(&self) -> usize {
        match self.kind() {
            ProblemKind::L1L1 => self.dims.0 + self.dims.1,
            _ => self.dims.0,
        }
    }

    /// Splitting used by `alg`; the proximal point method runs on `ppa` with
    /// `B = C = 0`.
    pub fn splitting(&self, alg: Algorithm) -> Result<Splitting> {
        let o = &self.orientations;
        let found = match alg {
            Algorithm::Gppa => o
                .ppa
                .as_ref()
                .map(|f| Splitting::pair(f.clone(), ProxOperator::zero(f.dim())))
                .transpose()?,
            Algorithm::Fbs => o.fbs.clone(),
            Algorithm::Drs | Algorithm::DrsAsPpa => o.drs.clone(),
            Algorithm::Dys => o.dys.clone(),
        };
        found.ok_or_else(|| {
            Error::Config(format!(
                "{} instances have no {alg} orientation",
                self.kind()
            ))
        })
    }

    /// Cocoercivity constant of the forward part used by `alg`.
    pub fn cocoercivity(&self, alg: Algorithm) -> Result<Option<f64>> {
        Ok(match alg {
            Algorithm::Fbs | Algorithm::Dys => self.splitting(alg)?.c.cocoercivity(),
            _ => None,
        })
    }

    /// `α` for which the iteration operator of `alg` is `α`-averaged.
    pub fn averagedness(&self, alg: Algorithm, gamma: f64) -> Result<f64> {
        alg.averagedness(gamma, self.cocoercivity(alg)?)
    }

    pub fn run(&self, alg: Algorithm, cfg: &AlgorithmConfig, x0: &Vector) -> Result<IterateTrace> {
        let s = self.splitting(alg)?;
        match alg {
            Algorithm::Gppa => gppa_run(&s.a, cfg, x0),
            Algorithm::Fbs => fbs_run(&s.a, &s.c, cfg, x0),
            Algorithm::Drs => drs_run(&s.a, &s.b, cfg, x0),
            Algorithm::DrsAsPpa => drs_as_ppa_run(&s.a, &s.b, cfg, x0),
            Algorithm::Dys => dys_run(&s.a, &s.b, &s.c, cfg, x0),
        }
    }

    /// Fixed point of the iteration operator of `alg` corresponding to the
    /// zero `z_star`.
    pub fn driving_fixed_point(
        &self,
        alg: Algorithm,
        gamma: f64,
        z_star: &Vector,
    ) -> Result<Vector> {
        match alg {
            Algorithm::Gppa | Algorithm::Fbs => Ok(z_star.clone()),
            Algorithm::Drs | Algorithm::DrsAsPpa => {
                let s = self.splitting(alg)?;
                let case = if s.b.is_single_valued() {
                    FixedPointCase::DrsA
                } else {
                    FixedPointCase::DrsB
                };
                fixed_point_from_solution(case, &s, gamma, z_star)
            }
            Algorithm::Dys => {
                let s = self.splitting(alg)?;
                let case = if s.b.is_single_valued() {
                    FixedPointCase::DysA
                } else {
                    FixedPointCase::DysB
                };
                fixed_point_from_solution(case, &s, gamma, z_star)
            }
        }
    }

    /// Natural residual of the optimality system at `z`:
    /// `‖Mz + q‖` for linear instances, the prox-gradient residual for
    /// `LASSO`, and the larger of the two componentwise KKT residuals for
    /// `L1L1`.
    pub fn optimality_residual(&self, z: &Vector) -> Result<f64> {
        ensure_len(z, self.dim(), "candidate solution")?;
        match &self.data {
            ProblemData::LinearMonotone { m, q } => Ok((m * z + q).norm()),
            ProblemData::Lasso { .. } => {
                let s = self.splitting(Algorithm::Fbs)?;
                Ok(residual_R(&s.a, &s.c, 1.0, z)?.norm())
            }
            ProblemData::L1L1 { a, b, reg } => {
                let (x, y) = split_primal_dual(z, a.ncols());
                let rx = &x - prox_l1(&(&x - a.tr_mul(&y)), *reg);
                let ry = &y - project_box(&(&y + (a * &x - b)), 1.0);
                Ok(rx.norm().max(ry.norm()))
            }
        }
    }

    /// Primal part of a point in the iteration space.
    pub fn primal<'a>(&self, z: &'a Vector) -> nalgebra::DVectorView<'a, f64> {
        z.rows(0, self.dims.0)
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDocument {
            schema: 1,
            seed: self.seed,
            data: self.data.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("instance document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: InstanceDocument = serde_json::from_str(s)
            .map_err(|e| Error::Config(format!("instance document: {e}")))?;
        if doc.schema != 1 {
            return Err(Error::Config(format!(
                "unsupported instance schema {}",
                doc.schema
            )));
        }
        let mut inst = from_data(doc.data)?;
        inst.seed = doc.seed;
        Ok(inst)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceDocument {
    schema: u32,
    seed: Option<u64>,
    #[serde(flatten)]
    data: ProblemData,
}

fn from_data(data: ProblemData) -> Result<ProblemInstance> {
    match data {
        ProblemData::L1L1 { a, b, reg } => build_l1l1(&a, &b, reg),
        ProblemData::Lasso {
            a,
            b,
            reg,
            p,
            groups,
        } => build_lp_lsq(&a, &b, reg, p.p(), Some(groups)),
        ProblemData::LinearMonotone { m, q } => build_linear_monotone(&m, &q),
    }
}

fn split_primal_dual(z: &Vector, n: usize) -> (Vector, Vector) {
    let m = z.len() - n;
    (z.rows(0, n).into_owned(), z.rows(n, m).into_owned())
}

fn check_shapes(a: &Matrix, b: &Vector) -> Result<()> {
    ensure_len(b, a.nrows(), "observation vector")?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidParameter(format!(
            "design matrix must be nonempty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn check_reg(reg: f64, strict: bool) -> Result<()> {
    let ok = reg.is_finite() && if strict { reg > 0.0 } else { reg >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "regularization weight must be {}, got {reg}",
            if strict { "positive" } else { "nonnegative" }
        )))
    }
}

/// Saddle-point form of `min ‖Ax − b‖₁ + reg‖x‖₁`.
pub fn build_l1l1(a: &Matrix, b: &Vector, reg: f64) -> Result<ProblemInstance> {
    check_shapes(a, b)?;
    check_reg(reg, true)?;
    let (m, n) = a.shape();
    let coupling = ProxOperator::skew_primal_dual(a)?;
    let separable = ProxOperator::product(
        &ProxOperator::l1(n, reg)?,
        &ProxOperator::shifted_l1_conjugate(b, 1.0)?,
    )
    .with_label("(reg*d|.|_1) x d(|. - b|_1)*");
    let drs = Splitting::pair(separable, coupling)?;
    Ok(ProblemInstance {
        data: ProblemData::L1L1 {
            a: a.clone(),
            b: b.clone(),
            reg,
        },
        seed: None,
        dims: (n, m),
        orientations: Orientations {
            ppa: None,
            fbs: None,
            dys: Some(drs.clone()),
            drs: Some(drs),
        },
        certificate: Some(SubregularityCertificate::C2),
        kappa: None,
        reference: None,
    })
}

/// `min ½‖Ax − b‖² + reg·Σ_J ‖x_J‖_p` over the given partition (one group
/// by default).
pub fn build_lp_lsq(
    a: &Matrix,
    b: &Vector,
    reg: f64,
    p: f64,
    groups: Option<Groups>,
) -> Result<ProblemInstance> {
    check_shapes(a, b)?;
    check_reg(reg, false)?;
    let order = NormOrder::from_p(p).map_err(|_| {
        Error::Config(format!(
            "p = {p} is not covered by certificate C3, which requires p in {{1, 2, inf}}"
        ))
    })?;
    let n = a.ncols();
    let groups = groups.unwrap_or_else(|| Groups::whole(n));
    if groups.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "group partition",
            expected: n,
            found: groups.dim(),
        });
    }
    let prox = ProxOperator::group_lp(groups.clone(), vec![1.0; groups.len()], reg, order)?;
    let loss = ForwardOperator::least_squares(a, b)?;
    let fbs = Splitting::new(prox.clone(), ProxOperator::zero(n), loss.clone())?;
    let drs = Splitting::pair(prox.clone(), ProxOperator::least_squares_gradient(a, b)?)?;
    Ok(ProblemInstance {
        data: ProblemData::Lasso {
            a: a.clone(),
            b: b.clone(),
            reg,
            p: order,
            groups,
        },
        seed: None,
        dims: (n, a.nrows()),
        orientations: Orientations {
            ppa: None,
            dys: Some(fbs.clone()),
            fbs: Some(fbs),
            drs: Some(drs),
        },
        certificate: Some(SubregularityCertificate::C3 { p: order }),
        kappa: None,
        reference: None,
    })
}

/// `Fz = Mz + q` with `M + Mᵀ ⪰ 0`. With `S = (M + Mᵀ)/2` and
/// `K = (M − Mᵀ)/2` the splittings use `A = S/2 + K + q` together with
/// `S/2` as `B` (DRS) or `C` (FBS), and `S/4` as each of `B`, `C` for DYS.
pub fn build_linear_monotone(m: &Matrix, q: &Vector) -> Result<ProblemInstance> {
    let f = ProxOperator::linear(m, q)?;
    let n = m.nrows();
    let sym = symmetrize(&((m + m.transpose()) * 0.5));
    let skew = (m - m.transpose()) * 0.5;
    let half = &sym * 0.5;
    let quarter = &sym * 0.25;
    let zero = Vector::zeros(n);

    let lam_min = min_symmetric_eigenvalue(&sym);
    let scale = sym.amax().max(1.0);
    if lam_min < -1e-9 * scale {
        return Err(Error::Config(format!(
            "M + M^T is not positive semidefinite (smallest eigenvalue of the symmetric part {lam_min:e})"
        )));
    }
    let a = ProxOperator::linear(&(&half + &skew), q)?.with_label("A = S/2 + K + q");
    let fbs = Splitting::new(
        a.clone(),
        ProxOperator::zero(n),
        ForwardOperator::affine(&half, &zero)?,
    )?;
    let drs = Splitting::pair(
        a.clone(),
        ProxOperator::linear(&half, &zero)?.with_label("B = S/2"),
    )?;
    let dys = Splitting::new(
        a,
        ProxOperator::linear(&quarter, &zero)?.with_label("B = S/4"),
        ForwardOperator::affine(&quarter, &zero)?,
    )?;

    let strongly = lam_min > 1e-12 * scale;
    let z_star = solve_linear(m, q)?;
    let residual = (m * &z_star + q).norm();
    Ok(ProblemInstance {
        data: ProblemData::LinearMonotone {
            m: m.clone(),
            q: q.clone(),
        },
        seed: None,
        dims: (n, n),
        orientations: Orientations {
            ppa: Some(f),
            fbs: Some(fbs),
            drs: Some(drs),
            dys: Some(dys),
        },
        certificate: strongly.then_some(SubregularityCertificate::C1 { alpha: lam_min }),
        kappa: strongly.then(|| 1.0 / lam_min),
        reference: Some(ReferenceSolution {
            z_star,
            tol: residual.max(f64::EPSILON),
            residual,
            method: ReferenceMethod::LinearSolve,
        }),
    })
}

fn solve_linear(m: &Matrix, q: &Vector) -> Result<Vector> {
    let rhs = -q;
    if let Ok(lu) = LuFactor::new(m) {
        if let Ok(z) = lu.solve(&rhs) {
            if z.iter().all(|v| v.is_finite()) {
                return Ok(z);
            }
        }
    }
    let scale = m.amax().max(q.amax()).max(1.0);
    let svd = SVD::new(m.clone(), true, true);
    let z = svd
        .solve(&rhs, 1e-12 * scale)
        .map_err(|e| Error::NoSolution(e.to_string()))?;
    let residual = (m * &z + q).norm();
    if residual > 1e-9 * scale {
        return Err(Error::NoSolution(format!(
            "M is singular and q is not in its range (least-squares residual {residual:e})"
        )));
    }
    Ok(z)
}

/// Knobs for [`random_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceExtras {
    /// Regularization weight.
    pub reg: f64,
    pub p: NormOrder,
    /// Fraction of nonzeros in the ground-truth signal.
    pub sparsity: f64,
    /// Noise standard deviation relative to `‖A x_true‖`.
    pub noise: f64,
    /// Diagonal shift `μ` of linear instances.
    pub mu: f64,
    /// Scale of the skew part of linear instances.
    pub skew: f64,
}

impl Default for InstanceExtras {
    fn default() -> Self {
        Self {
            reg: 1.0,
            p: NormOrder::One,
            sparsity: 0.1,
            noise: 0.01,
            mu: 1.0,
            skew: 1.0,
        }
    }
}

/// Seeded instance. `ℓ₁` kinds use a Gaussian design scaled by `1/√m`, a
/// sparse Gaussian signal and Gaussian noise; linear instances use
/// `M = μI + s(G − Gᵀ)/2` and Gaussian `q` (with `m` ignored).
pub fn random_instance(
    seed: u64,
    kind: ProblemKind,
    m: usize,
    n: usize,
    extras: &InstanceExtras,
) -> Result<ProblemInstance> {
    if n == 0 || (m == 0 && kind != ProblemKind::LinearMonotone) {
        return Err(Error::InvalidParameter(format!(
            "instance dimensions must be positive, got m = {m}, n = {n}"
        )));
    }
    let mut rng = Rng::new(seed);
    let mut inst = match kind {
        ProblemKind::LinearMonotone => {
            let g = rng_gaussian(&mut rng, n, n);
            let mat =
                Matrix::identity(n, n) * extras.mu + (&g - g.transpose()) * (0.5 * extras.skew);
            let q = rng.gaussian_vector(n);
            build_linear_monotone(&mat, &q)?
        }
        ProblemKind::L1L1 | ProblemKind::Lasso => {
            let a = rng_gaussian(&mut rng, m, n) / (m as f64).sqrt();
            let x_true = sparse_signal(&mut rng, n, extras.sparsity);
            let clean = &a * &x_true;
            let sigma = extras.noise * clean.norm();
            let b = &clean + rng.gaussian_vector(m) * sigma;
            if kind == ProblemKind::L1L1 {
                build_l1l1(&a, &b, extras.reg)?
            } else {
                build_lp_lsq(&a, &b, extras.reg, extras.p.p(), None)?
            }
        }
    };
    inst.seed = Some(seed);
    Ok(inst)
}

fn sparse_signal(rng: &mut Rng, n: usize, fraction: f64) -> Vector {
    let k = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.below(n - i);
        idx.swap(i, j);
    }
    let mut x = Vector::zeros(n);
    for &i in &idx[..k] {
        x[i] = rng.gaussian();
    }
    x
}

/// Unique minimizer of `½‖Ax − b‖² + reg‖x‖₁` by enumerating all `3ⁿ`
/// sign patterns.
pub fn sign_enum(a: &Matrix, b: &Vector, reg: f64) -> Result<Vector> {
    check_shapes(a, b)?;
    check_reg(reg, false)?;
    let n = a.ncols();
    if n > SIGN_ENUM_MAX_DIM {
        return Err(Error::NoOracle(format!(
            "sign enumeration is limited to n <= {SIGN_ENUM_MAX_DIM}, got n = {n}"
        )));
    }
    let gram = symmetrize(&a.tr_mul(a));
    let atb = a.tr_mul(b);
    let scale = gram.amax().max(atb.amax()).max(reg).max(1.0);
    let tol = 1e-10 * scale;
    let patterns = 3usize.pow(n as u32);

    let verified: Vec<Vector> = (0..patterns)
        .into_par_iter()
        .filter_map(|code| {
            let signs = decode_pattern(code, n);
            let support: Vec<usize> = (0..n).filter(|&i| signs[i] != 0.0).collect();
            let mut x = Vector::zeros(n);
            if !support.is_empty() {
                let k = support.len();
                let sub = Matrix::from_fn(k, k, |i, j| gram[(support[i], support[j])]);
                let rhs = Vector::from_fn(k, |i, _| atb[support[i]] - reg * signs[support[i]]);
                let xs = SpdFactor::new(&sub).ok()?.solve(&rhs).ok()?;
                for (i, &s) in support.iter().enumerate() {
                    if !(xs[i] * signs[s] > 0.0) {
                        return None;
                    }
                    x[s] = xs[i];
                }
            }
            let corr = &atb - &gram * &x;
            let off_support_ok = (0..n)
                .filter(|&i| signs[i] == 0.0)
                .all(|i| corr[i].abs() <= reg + tol);
            off_support_ok.then_some(x)
        })
        .collect();

    match verified.len() {
        0 => Err(Error::NoSolution(
            "no sign pattern satisfies the optimality conditions".into(),
        )),
        1 => Ok(verified.into_iter().next().unwrap()),
        _ => Err(Error::OracleDisagreement {
            distance: (&verified[0] - &verified[1]).norm(),
            tol: 0.0,
            first: verified[0].iter().copied().collect(),
            second: verified[1].iter().copied().collect(),
        }),
    }
}

fn decode_pattern(mut code: usize, n: usize) -> Vec<f64> {
    let mut s = vec![0.0; n];
    for v in s.iter_mut() {
        *v = match code % 3 {
            0 => 0.0,
            1 => 1.0,
            _ => -1.0,
        };
        code /= 3;
    }
    s
}

/// Settings of the two DRS runs behind the cross-algorithm oracle.
pub const CROSS_SETTINGS: [(f64, f64); 2] = [(1.0, 1.0), (0.5, 1.5)];

/// Fixed-point residual the cross-algorithm runs iterate to.
pub const CROSS_RESIDUAL: f64 = 1e-12;

/// Iteration cap for each cross-algorithm run.
pub const CROSS_MAX_ITER: usize = 500_000;

/// Runs DRS at the two [`CROSS_SETTINGS`] and requires their primal parts to
/// agree within `tol`.
pub fn cross_algorithm(problem: &ProblemInstance, tol: f64) -> Result<ReferenceSolution> {
    let x0 = Vector::zeros(problem.dim());
    let solve = |(gamma, lambda): (f64, f64)| -> Result<Vector> {
        let cfg = AlgorithmConfig::new(
            gamma,
            RelaxationSchedule::Constant(lambda),
            StopRule::new(CROSS_RESIDUAL, CROSS_MAX_ITER),
        );
        let trace = problem.run(Algorithm::Drs, &cfg, &x0)?;
        Ok(trace.solution_estimate().clone())
    };
    let first = solve(CROSS_SETTINGS[0])?;
    let second = solve(CROSS_SETTINGS[1])?;
    let p1 = problem.primal(&first).into_owned();
    let p2 = problem.primal(&second).into_owned();
    let distance = (&p1 - &p2).norm();
    if !(distance <= tol) {
        return Err(Error::OracleDisagreement {
            distance,
            tol,
            first: p1.iter().copied().collect(),
            second: p2.iter().copied().collect(),
        });
    }
    let residual = problem.optimality_residual(&first)?;
    Ok(ReferenceSolution {
        z_star: first,
        tol,
        residual,
        method: ReferenceMethod::CrossAlgorithm,
    })
}

fn is_identity(a: &Matrix) -> bool {
    a.is_square() && *a == Matrix::identity(a.nrows(), a.ncols())
}

/// Closed-form minimizer where one exists: soft/block shrinkage of `b` for
/// `LASSO` with `A = I`.
pub fn closed_form(problem: &ProblemInstance) -> Option<Vector> {
    match &problem.data {
        ProblemData::Lasso { a, b, .. } if is_identity(a) => {
            let s = problem.splitting(Algorithm::Fbs).ok()?;
            s.a.resolvent(1.0, b).ok()
        }
        _ => None,
    }
}

/// Reference zero of `F` from the most direct oracle available: the linear
/// solve, sign enumeration for small `ℓ₁` lasso, otherwise two DRS runs.
pub fn reference_solve(problem: &ProblemInstance, tol: f64) -> Result<ReferenceSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference tolerance must be positive, got {tol}"
        )));
    }
    let (z_star, method) = match &problem.data {
        ProblemData::LinearMonotone { m, q } => (solve_linear(m, q)?, ReferenceMethod::LinearSolve),
        ProblemData::Lasso {
            a,
            b,
            reg,
            p,
            groups,
            ..
        } if a.ncols() <= SIGN_ENUM_MAX_DIM
            && (*p == NormOrder::One || groups.len() == groups.dim()) =>
        {
            (sign_enum(a, b, *reg)?, ReferenceMethod::SignEnum)
        }
        ProblemData::Lasso { a, .. } if is_identity(a) => (
            closed_form(problem).expect("identity design has a closed form"),
            ReferenceMethod::ClosedForm,
        ),
        _ => return cross_algorithm(problem, tol),
    };
    let residual = problem.optimality_residual(&z_star)?;
    if !(residual <= tol) {
        return Err(Error::NotAZero { residual, tol });
    }
    Ok(ReferenceSolution {
        z_star,
        tol,
        residual,
        method,
    })
}
