//! Maximal monotone operators exposed through their resolvents, and
//! single-valued operators exposed through direct evaluation.
//!
//! A [`ProxOperator`] is anything whose resolvent `J_{γT} = (I + γT)⁻¹` can
//! be evaluated at every `γ > 0`. Subdifferentials of norms, affine monotone
//! maps, the skew primal–dual coupling and block products are provided;
//! arbitrary resolvents can be wrapped with [`ProxOperator::new`].
//!
//! A [`ForwardOperator`] is a single-valued map with optional Lipschitz
//! constant `L` and cocoercivity constant `ϑ`. Only `L` is ever stored;
//! formulas written in terms of a reciprocal modulus convert at the call
//! site.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_symmetric, ensure_finite_matrix, ensure_finite_vector, ensure_len, operator_norm,
    LuFactor, Matrix, Rng, SpdFactor, Vector,
};

/// Norm order supported by the closed-form proximal maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormOrder {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl NormOrder {
    pub fn from_p(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Self::One)
        } else if p == 2.0 {
            Ok(Self::Two)
        } else if p == f64::INFINITY {
            Ok(Self::Inf)
        } else {
            Err(Error::UnsupportedNorm(p))
        }
    }

    pub fn p(self) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Two => 2.0,
            Self::Inf => f64::INFINITY,
        }
    }

    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            Self::One => x.iter().map(|v| v.abs()).sum(),
            Self::Two => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Self::Inf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::One => f.write_str("1"),
            Self::Two => f.write_str("2"),
            Self::Inf => f.write_str("inf"),
        }
    }
}

/// Structural fact about an operator that guarantees metric subregularity of
/// sums it takes part in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    StronglyMonotone(f64),
    Polyhedral,
    LpSubdifferential(NormOrder),
}

type ResolventFn = dyn Fn(f64, &Vector) -> Result<Vector> + Send + Sync;
type EvalFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// Single-valued operator `C`.
#[derive(Clone)]
pub struct ForwardOperator {
    label: String,
    dim: usize,
    eval: Arc<EvalFn>,
    lipschitz: Option<f64>,
    cocoercivity: Option<f64>,
    zero: bool,
}

impl fmt::Debug for ForwardOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForwardOperator")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("cocoercivity", &self.cocoercivity)
            .finish()
    }
}

impl ForwardOperator {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        eval: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            dim,
            eval: Arc::new(eval),
            lipschitz: None,
            cocoercivity: None,
            zero: false,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_cocoercivity(mut self, theta: f64) -> Self {
        self.cocoercivity = Some(theta);
        self
    }

    /// The zero map, cocoercive with `ϑ = +∞`.
    pub fn zero(dim: usize) -> Self {
        Self {
            label: "0".into(),
            dim,
            eval: Arc::new(move |x: &Vector| Vector::zeros(x.len())),
            lipschitz: Some(0.0),
            cocoercivity: Some(f64::INFINITY),
            zero: true,
        }
    }

    /// `x ↦ Mx + q`. Lipschitz constant `‖M‖`; when `M` is symmetric positive
    /// semidefinite the map is also `1/‖M‖`-cocoercive.
    pub fn affine(m: &Matrix, q: &Vector) -> Result<Self> {
        check_square(m, "affine operator")?;
        ensure_len(q, m.nrows(), "affine operator offset")?;
        ensure_finite_matrix(m, "affine operator matrix")?;
        ensure_finite_vector(q, "affine operator offset")?;
        let norm = operator_norm(m, 1e-12)?;
        let symmetric_psd = check_symmetric(m).is_ok() && min_symmetric_eigenvalue(m) >= -1e-12;
        let (mm, qq) = (m.clone(), q.clone());
        let mut op =
            Self::new("affine", m.nrows(), move |x: &Vector| &mm * x + &qq).with_lipschitz(norm);
        if symmetric_psd {
            op = op.with_cocoercivity(if norm == 0.0 {
                f64::INFINITY
            } else {
                1.0 / norm
            });
        }
        Ok(op)
    }

    /// `x ↦ Aᵀ(Ax − b)`, with `L = ‖A‖²` and `ϑ = 1/‖A‖²`.
    pub fn least_squares(a: &Matrix, b: &Vector) -> Result<Self> {
        ensure_len(b, a.nrows(), "least-squares data")?;
        ensure_finite_matrix(a, "least-squares matrix")?;
        ensure_finite_vector(b, "least-squares data")?;
        let s = operator_norm(a, 1e-12)?;
        let l = s * s;
        let (aa, bb) = (a.clone(), b.clone());
        Ok(
            Self::new("least-squares gradient", a.ncols(), move |x: &Vector| {
                grad_least_squares_unchecked(&aa, &bb, x)
            })
            .with_lipschitz(l)
            .with_cocoercivity(if l == 0.0 { f64::INFINITY } else { 1.0 / l }),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn cocoercivity(&self) -> Option<f64> {
        self.cocoercivity
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        ensure_len(x, self.dim, "forward operator argument")?;
        Ok((self.eval)(x))
    }
}

/// Maximal monotone operator represented by its resolvent.
#[derive(Clone)]
pub struct ProxOperator {
    label: String,
    dim: usize,
    resolvent: Arc<ResolventFn>,
    certificate: Option<Certificate>,
    single_valued: Option<ForwardOperator>,
    identity_resolvent: bool,
}

impl fmt::Debug for ProxOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProxOperator")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("certificate", &self.certificate)
            .field("single_valued", &self.single_valued.is_some())
            .finish()
    }
}

impl ProxOperator {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        resolvent: impl Fn(f64, &Vector) -> Result<Vector> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            dim,
            resolvent: Arc::new(resolvent),
            certificate: None,
            single_valued: None,
            identity_resolvent: false,
        }
    }

    pub fn with_certificate(mut self, certificate: Certificate) -> Self {
        self.certificate = Some(certificate);
        self
    }

    /// Attaches a forward evaluation, declaring the operator single-valued.
    pub fn with_forward(mut self, forward: ForwardOperator) -> Self {
        self.single_valued = Some(forward);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The zero operator; its resolvent is the identity.
    pub fn zero(dim: usize) -> Self {
        let mut op = Self::new("0", dim, |_, z| Ok(z.clone()))
            .with_certificate(Certificate::Polyhedral)
            .with_forward(ForwardOperator::zero(dim));
        op.identity_resolvent = true;
        op
    }

    /// `∂(w‖·‖₁)`.
    pub fn l1(dim: usize, weight: f64) -> Result<Self> {
        check_weight(weight)?;
        Ok(Self::new(format!("{weight}*d|.|_1"), dim, move |gamma, z| {
            Ok(prox_l1(z, gamma * weight))
        })
        .with_certificate(Certificate::LpSubdifferential(NormOrder::One)))
    }

    /// `∂(λ Σ_J w_J ‖x_J‖_p)`.
    pub fn group_lp(groups: Groups, weights: Vec<f64>, scale: f64, p: NormOrder) -> Result<Self> {
        check_weight(scale)?;
        if weights.len() != groups.len() {
            return Err(Error::DimensionMismatch {
                context: "group weights",
                expected: groups.len(),
                found: weights.len(),
            });
        }
        for &w in &weights {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "group weights must be positive, got {w}"
                )));
            }
        }
        let dim = groups.dim();
        Ok(
            Self::new(format!("{scale}*d(group l{p})"), dim, move |gamma, z| {
                prox_group_lp(z, &groups, &weights, gamma * scale, p)
            })
            .with_certificate(Certificate::LpSubdifferential(p)),
        )
    }

    /// `z ↦ Mz + q` for monotone `M`. Resolvent systems `(I + γM)` are
    /// factored once per `γ` and cached.
    pub fn linear(m: &Matrix, q: &Vector) -> Result<Self> {
        check_square(m, "linear operator")?;
        ensure_len(q, m.nrows(), "linear operator offset")?;
        ensure_finite_matrix(m, "linear operator matrix")?;
        ensure_finite_vector(q, "linear operator offset")?;
        check_monotone_sampled(m)?;
        debug_assert!(
            min_symmetric_eigenvalue(&((m + m.transpose()) * 0.5)) >= -1e-9,
            "symmetric part of M is not positive semidefinite"
        );
        let forward = ForwardOperator::affine(m, q)?;
        let solver = Arc::new(LinearResolvent::new(m.clone(), q.clone()));
        let dim = m.nrows();
        Ok(Self::new("linear", dim, move |gamma, z| solver.apply(gamma, z)).with_forward(forward))
    }

    /// Gradient of `½‖Ax − b‖²` viewed as a maximal monotone operator.
    pub fn least_squares_gradient(a: &Matrix, b: &Vector) -> Result<Self> {
        ensure_len(b, a.nrows(), "least-squares data")?;
        let gram = symmetrize(&a.tr_mul(a));
        let q = -a.tr_mul(b);
        let forward = ForwardOperator::least_squares(a, b)?;
        let solver = Arc::new(LinearResolvent::new(gram, q));
        Ok(
            Self::new("least-squares gradient", a.ncols(), move |gamma, z| {
                solver.apply(gamma, z)
            })
            .with_forward(forward),
        )
    }

    /// The skew coupling `T₁(x, y) = (Dᵀy, −Dx)` on `Rⁿ × Rᵐ` for `D: Rⁿ → Rᵐ`.
    pub fn skew_primal_dual(d: &Matrix) -> Result<Self> {
        ensure_finite_matrix(d, "coupling matrix")?;
        let (m, n) = d.shape();
        let norm = operator_norm(d, 1e-12)?;
        let solver = Arc::new(SkewPrimalDual::new(d.clone()));
        let dd = d.clone();
        let forward = ForwardOperator::new("skew coupling", n + m, move |w: &Vector| {
            let x = w.rows(0, n).into_owned();
            let y = w.rows(n, m).into_owned();
            let top = dd.tr_mul(&y);
            let bottom = -(&dd * &x);
            concat(&top, &bottom)
        })
        .with_lipschitz(norm);
        Ok(Self::new("skew coupling", n + m, move |gamma, w| {
            let x = w.rows(0, n).into_owned();
            let y = w.rows(n, m).into_owned();
            let pd = solver.apply(gamma, &x, &y)?;
            Ok(concat(&pd.x, &pd.y))
        })
        .with_certificate(Certificate::Polyhedral)
        .with_forward(forward))
    }

    /// `∂g*` for `g(u) = w‖u − b‖₁`: its resolvent is the projection of
    /// `z − γb` onto the box `[−w, w]ᵐ`.
    pub fn shifted_l1_conjugate(b: &Vector, weight: f64) -> Result<Self> {
        check_weight(weight)?;
        ensure_finite_vector(b, "shift")?;
        let bb = b.clone();
        Ok(Self::new(
            format!("d({weight}*|. - b|_1)*"),
            b.len(),
            move |gamma, z| Ok(project_box(&(z - &bb * gamma), weight)),
        )
        .with_certificate(Certificate::Polyhedral))
    }

    /// `∂g*` through Moreau's identity, given `∂g`.
    pub fn conjugate(g: &ProxOperator) -> Self {
        let inner = g.clone();
        let mut op = Self::new(format!("({})*", g.label), g.dim, move |gamma, z| {
            prox_conjugate(&inner, z, gamma)
        });
        // conjugates of polyhedral functions are polyhedral
        op.certificate = g
            .certificate
            .filter(|&c| polyhedral_like(c))
            .map(|_| Certificate::Polyhedral);
        op
    }

    /// Block-diagonal operator `(x, y) ↦ (T₁x, T₂y)`.
    pub fn product(first: &ProxOperator, second: &ProxOperator) -> Self {
        let n = first.dim;
        let m = second.dim;
        let (f, s) = (first.clone(), second.clone());
        let certificate = match (first.certificate, second.certificate) {
            (Some(a), Some(b)) if polyhedral_like(a) && polyhedral_like(b) => {
                Some(Certificate::Polyhedral)
            }
            _ => None,
        };
        let mut op = Self::new(
            format!("({}) x ({})", first.label, second.label),
            n + m,
            move |gamma, w| {
                let x = f.resolvent(gamma, &w.rows(0, n).into_owned())?;
                let y = s.resolvent(gamma, &w.rows(n, m).into_owned())?;
                Ok(concat(&x, &y))
            },
        );
        op.certificate = certificate;
        if let (Some(a), Some(b)) = (&first.single_valued, &second.single_valued) {
            let (a, b) = (a.clone(), b.clone());
            let lip = match (a.lipschitz, b.lipschitz) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            };
            let mut fw = ForwardOperator::new("product", n + m, move |w: &Vector| {
                concat(
                    &(a.eval)(&w.rows(0, n).into_owned()),
                    &(b.eval)(&w.rows(n, m).into_owned()),
                )
            });
            fw.lipschitz = lip;
            op.single_valued = Some(fw);
        }
        op
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn certificate(&self) -> Option<Certificate> {
        self.certificate
    }

    pub fn forward(&self) -> Option<&ForwardOperator> {
        self.single_valued.as_ref()
    }

    pub fn is_single_valued(&self) -> bool {
        self.single_valued.is_some()
    }

    /// True when the resolvent is the identity map for every `γ`.
    pub fn has_identity_resolvent(&self) -> bool {
        self.identity_resolvent
    }

    /// `J_{γT}(z)`.
    pub fn resolvent(&self, gamma: f64, z: &Vector) -> Result<Vector> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "resolvent step must be positive and finite, got {gamma}"
            )));
        }
        ensure_len(z, self.dim, "resolvent argument")?;
        (self.resolvent)(gamma, z)
    }

    /// Forward evaluation, failing for set-valued operators.
    pub fn apply(&self, z: &Vector) -> Result<Vector> {
        self.single_valued
            .as_ref()
            .ok_or_else(|| Error::NotSingleValued(self.label.clone()))?
            .apply(z)
    }
}

fn polyhedral_like(c: Certificate) -> bool {
    matches!(
        c,
        Certificate::Polyhedral
            | Certificate::LpSubdifferential(NormOrder::One)
            | Certificate::LpSubdifferential(NormOrder::Inf)
    )
}

fn check_weight(w: f64) -> Result<()> {
    if w >= 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "regularization weight must be nonnegative and finite, got {w}"
        )))
    }
}

fn check_square(m: &Matrix, context: &'static str) -> Result<()> {
    if m.nrows() == m.ncols() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected: m.nrows(),
            found: m.ncols(),
        })
    }
}

pub(crate) fn concat(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

pub(crate) fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub(crate) fn min_symmetric_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetrize(m).symmetric_eigenvalues().min()
}

/// Rejects `M` when `dᵀMd < −1e-10·‖M‖_max·‖d‖²` for one of 100 sampled
/// directions.
fn check_monotone_sampled(m: &Matrix) -> Result<()> {
    let n = m.nrows();
    let mut rng = Rng::new(0x4D4F_4E4F);
    let scale = m.amax().max(1.0);
    for _ in 0..100 {
        let d = rng.gaussian_vector(n);
        let q = d.dot(&(m * &d));
        if q < -1e-10 * scale * d.norm_squared() {
            return Err(Error::Config(format!(
                "matrix is not monotone: sampled direction gives <d, Md> = {q:e}"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Closed-form proximal maps.

/// Componentwise soft-threshold `sign(z)·max(|z| − τ, 0)`.
pub fn prox_l1(z: &Vector, tau: f64) -> Vector {
    z.map(|v| soft(v, tau))
}

#[inline]
fn soft(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Projection onto `[−r, r]ⁿ`.
pub fn project_box(z: &Vector, radius: f64) -> Vector {
    z.map(|v| v.clamp(-radius, radius))
}

/// Euclidean projection onto `{x : ‖x‖₁ ≤ r}` by the sort-based exact
/// algorithm (sort magnitudes, locate the threshold, soft-threshold).
pub fn project_l1_ball(z: &[f64], radius: f64) -> Vec<f64> {
    let l1: f64 = z.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return z.to_vec();
    }
    if radius <= 0.0 {
        return vec![0.0; z.len()];
    }
    let mut mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (j + 1) as f64;
        if u > t {
            theta = t;
        } else {
            break;
        }
    }
    z.iter().map(|&v| soft(v, theta)).collect()
}

/// Non-overlapping partition of `0..n` into index groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Groups {
    dim: usize,
    groups: Vec<Vec<usize>>,
}

impl Groups {
    pub fn new(dim: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; dim];
        for g in &groups {
            for &i in g {
                if i >= dim || seen[i] {
                    return Err(Error::InvalidGroups { n: dim, index: i });
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGroups {
                n: dim,
                index: missing,
            });
        }
        Ok(Self { dim, groups })
    }

    pub fn singletons(dim: usize) -> Self {
        Self {
            dim,
            groups: (0..dim).map(|i| vec![i]).collect(),
        }
    }

    pub fn whole(dim: usize) -> Self {
        Self {
            dim,
            groups: vec![(0..dim).collect()],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.groups.iter().map(|g| g.as_slice())
    }
}

/// Blockwise prox of `τ Σ_J w_J ‖x_J‖_p`.
///
/// * `p = 1`: soft-threshold at `τ w_J`;
/// * `p = 2`: block shrinkage `x_J · max(1 − τ w_J / ‖x_J‖₂, 0)`;
/// * `p = ∞`: `x_J − P(x_J)` with `P` the projection onto the ℓ₁ ball of
///   radius `τ w_J`.
pub fn prox_group_lp(
    z: &Vector,
    groups: &Groups,
    weights: &[f64],
    tau: f64,
    p: NormOrder,
) -> Result<Vector> {
    ensure_len(z, groups.dim(), "group prox argument")?;
    if weights.len() != groups.len() {
        return Err(Error::DimensionMismatch {
            context: "group weights",
            expected: groups.len(),
            found: weights.len(),
        });
    }
    let mut out = z.clone();
    for (idx, &w) in groups.iter().zip(weights) {
        let t = tau * w;
        let block: Vec<f64> = idx.iter().map(|&i| z[i]).collect();
        let shrunk = match p {
            NormOrder::One => block.iter().map(|&v| soft(v, t)).collect(),
            NormOrder::Two => {
                let norm = NormOrder::Two.norm(&block);
                let factor = if norm > t { 1.0 - t / norm } else { 0.0 };
                block.iter().map(|v| v * factor).collect()
            }
            NormOrder::Inf => {
                let proj = project_l1_ball(&block, t);
                block
                    .iter()
                    .zip(&proj)
                    .map(|(v, q)| v - q)
                    .collect::<Vec<_>>()
            }
        };
        for (&i, v) in idx.iter().zip(shrunk) {
            out[i] = v;
        }
    }
    Ok(out)
}

/// Prox of `τ‖·‖_∞` on the whole vector.
pub fn prox_linf(z: &Vector, tau: f64) -> Vector {
    let proj = project_l1_ball(z.as_slice(), tau);
    Vector::from_iterator(z.len(), z.iter().zip(&proj).map(|(v, q)| v - q))
}

/// Resolvent of `γ∂g*` at `z`, from the resolvent of `∂g` by Moreau's identity
/// `J_{γ∂g*}(z) = z − γ J_{γ⁻¹∂g}(z/γ)`.
pub fn prox_conjugate(g_prox: &ProxOperator, z: &Vector, gamma: f64) -> Result<Vector> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "conjugate prox step must be positive, got {gamma}"
        )));
    }
    let scaled = z / gamma;
    let inner = g_prox.resolvent(1.0 / gamma, &scaled)?;
    Ok(z - inner * gamma)
}

/// `Aᵀ(Ax − b)`.
pub fn grad_least_squares(a: &Matrix, b: &Vector, x: &Vector) -> Result<Vector> {
    ensure_len(b, a.nrows(), "least-squares data")?;
    ensure_len(x, a.ncols(), "least-squares argument")?;
    Ok(grad_least_squares_unchecked(a, b, x))
}

fn grad_least_squares_unchecked(a: &Matrix, b: &Vector, x: &Vector) -> Vector {
    a.tr_mul(&(a * x - b))
}

enum Factor {
    Spd(SpdFactor),
    Lu(LuFactor),
}

impl Factor {
    fn solve(&self, r: &Vector) -> Result<Vector> {
        match self {
            Self::Spd(f) => f.solve(r),
            Self::Lu(f) => f.solve(r),
        }
    }
}

struct LinearResolvent {
    m: Matrix,
    q: Vector,
    symmetric: bool,
    cache: Mutex<HashMap<u64, Arc<Factor>>>,
}

impl LinearResolvent {
    fn new(m: Matrix, q: Vector) -> Self {
        let symmetric = check_symmetric(&m).is_ok();
        Self {
            m,
            q,
            symmetric,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn factor(&self, gamma: f64) -> Result<Arc<Factor>> {
        let key = gamma.to_bits();
        if let Some(f) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(f.clone());
        }
        let f = Arc::new(factor_shifted(&self.m, gamma, self.symmetric)?);
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(key, f.clone());
        Ok(f)
    }

    fn apply(&self, gamma: f64, z: &Vector) -> Result<Vector> {
        let rhs = z - &self.q * gamma;
        self.factor(gamma)?.solve(&rhs)
    }
}

fn factor_shifted(m: &Matrix, gamma: f64, symmetric: bool) -> Result<Factor> {
    let n = m.nrows();
    let sys = Matrix::identity(n, n) + m * gamma;
    if symmetric {
        match SpdFactor::new(&symmetrize(&sys)) {
            Ok(f) => return Ok(Factor::Spd(f)),
            Err(Error::NotPositiveDefinite { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    LuFactor::new(&sys)
        .map(Factor::Lu)
        .map_err(|_| Error::Singular {
            context: Some("I + gamma*M is singular; M is not monotone"),
        })
}

/// Solves `(I + γM)v = z − γq`.
pub fn resolvent_linear(m: &Matrix, q: &Vector, gamma: f64, z: &Vector) -> Result<Vector> {
    check_square(m, "linear resolvent")?;
    ensure_len(q, m.nrows(), "linear resolvent offset")?;
    ensure_len(z, m.nrows(), "linear resolvent argument")?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "resolvent step must be positive, got {gamma}"
        )));
    }
    let f = factor_shifted(m, gamma, check_symmetric(m).is_ok())?;
    f.solve(&(z - q * gamma))
}

/// Primal–dual pair `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    pub x: Vector,
    pub y: Vector,
}

impl PrimalDualPoint {
    pub fn stacked(&self) -> Vector {
        concat(&self.x, &self.y)
    }
}

/// Resolvent of the skew coupling with the Gram factor `I + γ²DᵀD` cached
/// per `γ`.
pub struct SkewPrimalDual {
    d: Matrix,
    cache: Mutex<HashMap<u64, Arc<SpdFactor>>>,
}

impl SkewPrimalDual {
    pub fn new(d: Matrix) -> Self {
        Self {
            d,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn gram(&self, gamma: f64) -> Result<Arc<SpdFactor>> {
        let key = gamma.to_bits();
        if let Some(f) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(f.clone());
        }
        let f = Arc::new(skew_gram_factor(&self.d, gamma)?);
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(key, f.clone());
        Ok(f)
    }

    pub fn apply(&self, gamma: f64, z1: &Vector, z2: &Vector) -> Result<PrimalDualPoint> {
        let f = self.gram(gamma)?;
        skew_solve(&self.d, &f, gamma, z1, z2)
    }
}

fn skew_gram_factor(d: &Matrix, gamma: f64) -> Result<SpdFactor> {
    let n = d.ncols();
    let gram = Matrix::identity(n, n) + symmetrize(&d.tr_mul(d)) * (gamma * gamma);
    SpdFactor::new(&gram)
}

fn skew_solve(
    d: &Matrix,
    gram: &SpdFactor,
    gamma: f64,
    z1: &Vector,
    z2: &Vector,
) -> Result<PrimalDualPoint> {
    ensure_len(z1, d.ncols(), "primal block")?;
    ensure_len(z2, d.nrows(), "dual block")?;
    let rhs = z1 - d.tr_mul(z2) * gamma;
    let x = gram.solve(&rhs)?;
    let y = z2 + (d * &x) * gamma;
    Ok(PrimalDualPoint { x, y })
}

/// `x = (I + γ²DᵀD)⁻¹(z₁ − γDᵀz₂)`, `y = z₂ + γDx`: the unique solution of
/// `x + γDᵀy = z₁`, `y − γDx = z₂`.
pub fn resolvent_skew_primal_dual(
    d: &Matrix,
    gamma: f64,
    z1: &Vector,
    z2: &Vector,
) -> Result<PrimalDualPoint> {
    let gram = skew_gram_factor(d, gamma)?;
    skew_solve(d, &gram, gamma, z1, z2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn soft_threshold_values() {
        assert_eq!(prox_l1(&v(&[3.0, -0.5]), 1.0), v(&[2.0, 0.0]));
        assert_eq!(prox_l1(&Vector::zeros(3), 2.5), Vector::zeros(3));
        assert!(close(
            &prox_l1(&v(&[1.5, -2.0]), 1e-12),
            &v(&[1.5, -2.0]),
            1e-9
        ));
    }

    #[test]
    fn group_l2_shrinkage() {
        let g = Groups::whole(2);
        let out = prox_group_lp(&v(&[3.0, 4.0]), &g, &[1.0], 1.0, NormOrder::Two).unwrap();
        assert!(close(&out, &v(&[2.4, 3.2]), 1e-15));
        let out = prox_group_lp(&v(&[0.3, 0.4]), &g, &[1.0], 1.0, NormOrder::Two).unwrap();
        assert_eq!(out, Vector::zeros(2));
    }

    #[test]
    fn group_linf_scalar() {
        let g = Groups::whole(1);
        let out = prox_group_lp(&v(&[0.5]), &g, &[1.0], 1.0, NormOrder::Inf).unwrap();
        assert_eq!(out, v(&[0.0]));
        let out = prox_group_lp(&v(&[2.5]), &g, &[1.0], 1.0, NormOrder::Inf).unwrap();
        assert!(close(&out, &v(&[1.5]), 1e-15));
    }

    #[test]
    fn group_l1_matches_soft_threshold() {
        let g = Groups::new(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        let z = v(&[3.0, -1.0, 0.2, -4.0]);
        let out = prox_group_lp(&z, &g, &[1.0, 2.0], 0.5, NormOrder::One).unwrap();
        assert_eq!(out, v(&[2.5, 0.0, 0.0, -3.0]));
    }

    #[test]
    fn overlapping_groups_rejected() {
        assert!(matches!(
            Groups::new(3, vec![vec![0, 1], vec![1, 2]]),
            Err(Error::InvalidGroups { index: 1, .. })
        ));
        assert!(Groups::new(3, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn unsupported_p_rejected() {
        let err = NormOrder::from_p(1.5).unwrap_err();
        assert!(matches!(err, Error::UnsupportedNorm(p) if p == 1.5));
        assert!(err.to_string().contains("{1, 2, inf}"));
    }

    #[test]
    fn l1_ball_projection() {
        assert_eq!(project_l1_ball(&[0.2, -0.3], 1.0), vec![0.2, -0.3]);
        let p = project_l1_ball(&[3.0, 1.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
        let p = project_l1_ball(&[2.0, -2.0, 0.5], 2.0);
        let l1: f64 = p.iter().map(|x| x.abs()).sum();
        assert!((l1 - 2.0).abs() < 1e-14);
        assert!((p[0] - 1.0).abs() < 1e-14 && (p[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn conjugate_of_l1_is_box_projection() {
        let g = ProxOperator::l1(2, 1.0).unwrap();
        let out = prox_conjugate(&g, &v(&[0.5, -2.0]), 1.0).unwrap();
        assert!(close(&out, &v(&[0.5, -1.0]), 1e-15));
        let zero = prox_conjugate(&g, &Vector::zeros(2), 0.7).unwrap();
        assert_eq!(zero, Vector::zeros(2));
    }

    #[test]
    fn least_squares_gradient_trivial_cases() {
        let a = Matrix::identity(3, 3);
        let x = v(&[1.0, -2.0, 0.5]);
        assert_eq!(grad_least_squares(&a, &Vector::zeros(3), &x).unwrap(), x);
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let x = v(&[1.0, 1.0]);
        let b = &a * &x;
        assert_eq!(grad_least_squares(&a, &b, &x).unwrap(), Vector::zeros(2));
        assert!(grad_least_squares(&a, &v(&[1.0]), &x).is_err());
    }

    #[test]
    fn least_squares_finite_difference() {
        let mut rng = Rng::new(5);
        let a = crate::linalg::rng_gaussian(&mut rng, 6, 4);
        let b = rng.gaussian_vector(6);
        let x = rng.gaussian_vector(4);
        let d = rng.gaussian_vector(4);
        let f = |x: &Vector| 0.5 * (&a * x - &b).norm_squared();
        let h = 1e-5;
        let fd = (f(&(&x + &d * h)) - f(&(&x - &d * h))) / (2.0 * h);
        let g = grad_least_squares(&a, &b, &x).unwrap();
        assert!((fd - g.dot(&d)).abs() < 1e-6, "{fd} vs {}", g.dot(&d));
    }

    #[test]
    fn linear_resolvent_cases() {
        let m = Matrix::identity(2, 2) * 2.0;
        let out = resolvent_linear(&m, &Vector::zeros(2), 0.5, &v(&[2.0, -4.0])).unwrap();
        assert!(close(&out, &v(&[1.0, -2.0]), 1e-15));
        let z = v(&[1.0, 2.0]);
        let out = resolvent_linear(&m, &Vector::zeros(2), 1e-14, &z).unwrap();
        assert!(close(&out, &z, 1e-12));
        let q = v(&[0.5, -1.0]);
        let out = resolvent_linear(&Matrix::zeros(2, 2), &q, 0.3, &z).unwrap();
        assert!(close(&out, &(&z - &q * 0.3), 1e-15));
        // nonsymmetric monotone
        let rot = Matrix::from_row_slice(2, 2, &[1.0, 3.0, -3.0, 1.0]);
        let out = resolvent_linear(&rot, &q, 0.7, &z).unwrap();
        let back = &out + (&rot * &out + &q) * 0.7;
        assert!(close(&back, &z, 1e-13));
    }

    #[test]
    fn non_monotone_linear_rejected() {
        let m = Matrix::from_diagonal(&v(&[1.0, -1.0]));
        assert!(matches!(
            ProxOperator::linear(&m, &Vector::zeros(2)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn skew_resolvent_cases() {
        let d0 = Matrix::zeros(2, 3);
        let z1 = v(&[1.0, 2.0, 3.0]);
        let z2 = v(&[-1.0, 4.0]);
        let pd = resolvent_skew_primal_dual(&d0, 0.8, &z1, &z2).unwrap();
        assert_eq!((pd.x, pd.y), (z1, z2));

        let d = Matrix::from_element(1, 1, 1.0);
        let pd = resolvent_skew_primal_dual(&d, 1.0, &v(&[2.0]), &v(&[0.0])).unwrap();
        assert!((pd.x[0] - 1.0).abs() < 1e-15 && (pd.y[0] - 1.0).abs() < 1e-15);

        let mut rng = Rng::new(9);
        let d = crate::linalg::rng_gaussian(&mut rng, 4, 3);
        let z1 = rng.gaussian_vector(3);
        let z2 = rng.gaussian_vector(4);
        let gamma = 0.7;
        let pd = resolvent_skew_primal_dual(&d, gamma, &z1, &z2).unwrap();
        let r1 = &pd.x + d.tr_mul(&pd.y) * gamma - &z1;
        let r2 = &pd.y - (&d * &pd.x) * gamma - &z2;
        assert!(r1.norm() <= 1e-12 && r2.norm() <= 1e-12);
    }

    #[test]
    fn skew_operator_matches_free_function() {
        let mut rng = Rng::new(21);
        let d = crate::linalg::rng_gaussian(&mut rng, 3, 2);
        let op = ProxOperator::skew_primal_dual(&d).unwrap();
        let w = rng.gaussian_vector(5);
        let a = op.resolvent(1.3, &w).unwrap();
        let b = resolvent_skew_primal_dual(
            &d,
            1.3,
            &w.rows(0, 2).into_owned(),
            &w.rows(2, 3).into_owned(),
        )
        .unwrap();
        assert!(close(&a, &b.stacked(), 1e-15));
        // second call hits the cache and is bitwise identical
        assert_eq!(a, op.resolvent(1.3, &w).unwrap());
    }

    #[test]
    fn shifted_conjugate_moreau() {
        let b = v(&[0.5, -1.0, 2.0]);
        let conj = ProxOperator::shifted_l1_conjugate(&b, 1.0).unwrap();
        let z = v(&[3.0, -0.2, 1.0]);
        let gamma = 0.6;
        // prox of gamma*|u - b|_1 is b + soft(z - b, gamma)
        let primal = &b + prox_l1(&(&z - &b), gamma);
        let dual = conj.resolvent(1.0 / gamma, &(&z / gamma)).unwrap();
        assert!(close(&(primal + dual * gamma), &z, 1e-14));
    }

    #[test]
    fn resolvent_rejects_bad_step() {
        let op = ProxOperator::zero(2);
        assert!(op.resolvent(0.0, &Vector::zeros(2)).is_err());
        assert!(op.resolvent(-1.0, &Vector::zeros(2)).is_err());
        assert!(op.resolvent(1.0, &Vector::zeros(3)).is_err());
    }
}
