//! Linear-rate bounds under metric subregularity, transfer of subregularity
//! moduli between related operators, empirical rate fits and numeric audits
//! of the averagedness and fixed-point identities behind the splittings.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ensure_len, Rng, Vector};
use crate::operators::{ForwardOperator, ProxOperator};
use crate::splitting::{dys_step, fbs_delta, IterateTrace, Splitting};

/// Tolerance used by the audits in this module.
pub const AUDIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RateCase {
    Gppa,
    Fbs,
    /// DRS with `A` single-valued and `L`-Lipschitz.
    DrsLipA,
    /// DRS with `B` single-valued and `L`-Lipschitz.
    DrsLipB,
    /// DRS read as a proximal point method on `S`, `κ` the modulus of `S`.
    DrsPpa,
    DysLipA,
    DysLipB,
}

impl RateCase {
    pub const ALL: [RateCase; 7] = [
        RateCase::Gppa,
        RateCase::Fbs,
        RateCase::DrsLipA,
        RateCase::DrsLipB,
        RateCase::DrsPpa,
        RateCase::DysLipA,
        RateCase::DysLipB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gppa => "GPPA",
            Self::Fbs => "FBS",
            Self::DrsLipA => "DRS_LIP_A",
            Self::DrsLipB => "DRS_LIP_B",
            Self::DrsPpa => "DRS_PPA",
            Self::DysLipA => "DYS_LIP_A",
            Self::DysLipB => "DYS_LIP_B",
        }
    }

    pub fn needs_lipschitz(self) -> bool {
        matches!(
            self,
            Self::DrsLipA | Self::DrsLipB | Self::DysLipA | Self::DysLipB
        )
    }

    pub fn needs_cocoercivity(self) -> bool {
        matches!(self, Self::Fbs | Self::DysLipA | Self::DysLipB)
    }

    /// Largest admissible relaxation parameter.
    pub fn relaxation_bound(self, gamma: f64, theta: Option<f64>) -> f64 {
        let theta = theta.unwrap_or(f64::INFINITY);
        match self {
            Self::Fbs => fbs_delta(gamma, theta),
            Self::DysLipA | Self::DysLipB => 2.0 - gamma / (2.0 * theta),
            _ => 2.0,
        }
    }
}

impl fmt::Display for RateCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RateCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown rate case `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateInputs {
    pub gamma: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub lipschitz: Option<f64>,
    pub cocoercivity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBound {
    pub case: RateCase,
    pub inputs: RateInputs,
    /// `ϱ` as given by the case formula.
    pub rho: f64,
    /// Per-step contraction `sqrt(1 − ϱ)`, clamped to `[0, 1]`.
    pub factor: f64,
    /// Set when `1 − ϱ` fell outside `[0, 1]`.
    pub clamped: bool,
}

/// Contraction factor of `dist(w^{k+1}, ·) ≤ factor · dist(w^k, ·)` for the
/// given case. `lipschitz` is `L = 1/β`; `cocoercivity` is `ϑ` (may be `∞`).
pub fn rate_bound(
    case: RateCase,
    gamma: f64,
    kappa: f64,
    lambda: f64,
    lipschitz: Option<f64>,
    cocoercivity: Option<f64>,
) -> Result<RateBound> {
    let inputs = RateInputs {
        gamma,
        kappa,
        lambda,
        lipschitz,
        cocoercivity,
    };
    let rho = rate_rho(case, &inputs, false)?;
    Ok(finish(case, inputs, rho))
}

/// The `DYS_LIP_B` bound with the factor `(1 + γL)` in the denominator
/// squared, as the distance estimate it comes from would give.
pub fn rate_bound_dys_lip_b_strict(
    gamma: f64,
    kappa: f64,
    lambda: f64,
    lipschitz: f64,
    cocoercivity: f64,
) -> Result<RateBound> {
    let inputs = RateInputs {
        gamma,
        kappa,
        lambda,
        lipschitz: Some(lipschitz),
        cocoercivity: Some(cocoercivity),
    };
    let rho = rate_rho(RateCase::DysLipB, &inputs, true)?;
    Ok(finish(RateCase::DysLipB, inputs, rho))
}

fn finish(case: RateCase, inputs: RateInputs, rho: f64) -> RateBound {
    let sq = 1.0 - rho;
    let clamped = !(0.0..=1.0).contains(&sq);
    RateBound {
        case,
        inputs,
        rho,
        factor: sq.clamp(0.0, 1.0).sqrt(),
        clamped,
    }
}

fn rate_rho(case: RateCase, p: &RateInputs, strict: bool) -> Result<f64> {
    let RateInputs {
        gamma: g,
        kappa: k,
        lambda: l,
        ..
    } = *p;
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{case}: gamma must be positive and finite, got {g}"
        )));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{case}: kappa must be nonnegative and finite, got {k}"
        )));
    }
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{case}: lambda must be nonnegative and finite, got {l}"
        )));
    }
    let lip = if case.needs_lipschitz() {
        let lip = p.lipschitz.ok_or(Error::MissingParameter {
            case: case.name(),
            name: "L (Lipschitz constant)",
        })?;
        if !(lip >= 0.0 && lip.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{case}: Lipschitz constant must be nonnegative and finite, got {lip}"
            )));
        }
        lip
    } else {
        0.0
    };
    // `r = γ/ϑ`, zero for ϑ = ∞.
    let r = if case.needs_cocoercivity() {
        let theta = p.cocoercivity.ok_or(Error::MissingParameter {
            case: case.name(),
            name: "theta (cocoercivity)",
        })?;
        if !(theta > 0.0) || !(g < 2.0 * theta) {
            return Err(Error::InvalidParameter(format!(
                "{case}: need theta > 0 and gamma < 2*theta, got gamma = {g}, theta = {theta}"
            )));
        }
        g / theta
    } else {
        0.0
    };

    let rho = match case {
        RateCase::Gppa => l * (2.0 - l) * g * g / ((g + k) * (g + k)),
        RateCase::Fbs => {
            let delta = fbs_delta(g, g / r);
            g * g * l * (delta - l) / ((g + k) * (g + k))
        }
        RateCase::DrsLipA => {
            let d = 2.0 + (1.0 + g * g * lip * lip).sqrt() * (1.0 + k * (1.0 / g + lip));
            l * (2.0 - l) / (d * d)
        }
        RateCase::DrsLipB => {
            let s = 1.0 + g * lip;
            let t = 1.0 + k * (1.0 / (g * g) + lip * lip).sqrt();
            l * (2.0 - l) / (s * s * t * t)
        }
        RateCase::DrsPpa => l * (2.0 - l) / ((1.0 + k) * (1.0 + k)),
        RateCase::DysLipA => {
            let d =
                (2.0 + r) + (r + (1.0 + g * g * lip * lip).sqrt()) * (1.0 + k * (1.0 / g + lip));
            // λ(4ϑ − γ − 2ϑλ)/(2ϑ d²) with numerator and denominator divided by ϑ
            l * (4.0 - r - 2.0 * l) / (2.0 * d * d)
        }
        RateCase::DysLipB => {
            let s = 1.0 + g * lip;
            let s = if strict { s * s } else { s };
            let inner = (r * r - 2.0 * r).max(0.0);
            let t = 1.0 + k * (lip + (1.0 + inner).sqrt() / g);
            l * (4.0 - r - 2.0 * l) / (2.0 * s * t * t)
        }
    };
    Ok(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    /// From the modulus `κ'` of the residual map `R` to the modulus of `F`.
    RToF,
    /// From the modulus of `F` to that of `R`.
    FToR,
    /// Projection-type error bound on `R`.
    ErrorBound,
    /// Modulus of the DRS operator `S` when `F` is strongly monotone.
    StrongMonoS,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Radius {
    Finite(f64),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubregularityWitness {
    pub kappa: f64,
    pub radius: Radius,
    pub provenance: Provenance,
}

impl SubregularityWitness {
    pub fn user(kappa: f64, radius: Radius) -> Result<Self> {
        positive("kappa", kappa)?;
        if let Radius::Finite(r) = radius {
            positive("radius", r)?;
        }
        Ok(Self {
            kappa,
            radius,
            provenance: Provenance::User,
        })
    }
}

/// Inputs for [`subregularity_transfer`]. `lipschitz` is `L_B` (or `L` of
/// the single-valued part for `StrongMonoS`); `alpha` the strong
/// monotonicity constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferInputs {
    pub gamma: f64,
    pub kappa: f64,
    pub radius: Radius,
    pub lipschitz: Option<f64>,
    pub alpha: Option<f64>,
}

impl TransferInputs {
    pub fn new(gamma: f64, kappa: f64) -> Self {
        Self {
            gamma,
            kappa,
            radius: Radius::Unbounded,
            lipschitz: None,
            alpha: None,
        }
    }

    pub fn radius(mut self, r: f64) -> Self {
        self.radius = Radius::Finite(r);
        self
    }

    pub fn lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn alpha(mut self, a: f64) -> Self {
        self.alpha = Some(a);
        self
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && !v.is_nan() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be nonnegative and finite, got {v}"
        )))
    }
}

pub fn subregularity_transfer(
    case: Provenance,
    p: &TransferInputs,
) -> Result<SubregularityWitness> {
    let gamma = positive("gamma", p.gamma)?;
    if let Radius::Finite(r) = p.radius {
        positive("radius", r)?;
    }
    let lip = |case: &'static str| -> Result<f64> {
        let l = p.lipschitz.ok_or(Error::MissingParameter {
            case,
            name: "L (Lipschitz constant)",
        })?;
        nonnegative("L", l)
    };
    let shrink = |by: f64| match p.radius {
        Radius::Finite(r) => Radius::Finite(r / by),
        Radius::Unbounded => Radius::Unbounded,
    };
    let (kappa, radius) = match case {
        Provenance::RToF => (gamma * positive("kappa'", p.kappa)?, p.radius),
        Provenance::FToR => {
            let kappa = nonnegative("kappa", p.kappa)?;
            let l = lip("F_TO_R")?;
            (1.0 + kappa * (1.0 / gamma + l), shrink(1.0 + gamma * l))
        }
        Provenance::ErrorBound => {
            let kappa = positive("kappa", p.kappa)?;
            let l = lip("ERROR_BOUND")?;
            (kappa, shrink(2.0 + gamma * l))
        }
        Provenance::StrongMonoS => {
            let alpha = positive(
                "alpha",
                p.alpha.ok_or(Error::MissingParameter {
                    case: "STRONG_MONO_S",
                    name: "alpha (strong monotonicity)",
                })?,
            )?;
            let l = lip("STRONG_MONO_S")?;
            (
                (1.0 + gamma * l) * (1.0 / gamma + l) / alpha + gamma * l,
                Radius::Unbounded,
            )
        }
        Provenance::User => return SubregularityWitness::user(p.kappa, p.radius),
    };
    Ok(SubregularityWitness {
        kappa,
        radius,
        provenance: case,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalRate {
    /// Per-step ratio `exp(slope)`.
    pub rate: f64,
    pub r_squared: f64,
    /// Iteration indices used in the fit.
    pub window: Range<usize>,
}

/// Least-squares fit of `log(values[i])` against `i`.
pub fn fit_log_linear(values: &[f64]) -> Result<EmpiricalRate> {
    fit_window(values, 0)
}

fn fit_window(values: &[f64], offset: usize) -> Result<EmpiricalRate> {
    if values.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            found: values.len(),
        });
    }
    if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveSample {
            index: offset + i,
            value: v,
        });
    }
    let n = values.len() as f64;
    let xbar = (n - 1.0) / 2.0;
    // Shifting by the first log keeps an exactly constant sequence exactly flat.
    let first = values[0].ln();
    let logs: Vec<f64> = values.iter().map(|v| v.ln() - first).collect();
    let ybar = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (i, y) in logs.iter().enumerate() {
        let dx = i as f64 - xbar;
        let dy = y - ybar;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let sse: f64 = logs
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let e = y - (ybar + slope * (i as f64 - xbar));
            e * e
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(EmpiricalRate {
        rate: slope.exp(),
        r_squared,
        window: offset..offset + values.len(),
    })
}

/// Minimum number of samples [`empirical_rate`] fits.
pub const MIN_RATE_SAMPLES: usize = 10;

/// Default tail fraction for [`empirical_rate`].
pub const DEFAULT_RATE_WINDOW: f64 = 0.25;

/// Fits the tail fraction `window` of the distance-to-reference sequence,
/// widened to [`MIN_RATE_SAMPLES`] samples when the trace allows.
pub fn empirical_rate(trace: &IterateTrace, window: f64) -> Result<EmpiricalRate> {
    let dists = trace.distances().ok_or_else(|| {
        Error::InvalidParameter("trace carries no distance-to-reference samples".into())
    })?;
    empirical_rate_tail(&dists, window)
}

/// [`empirical_rate`] over a bare distance sequence, e.g. one read back from
/// a trace file.
pub fn empirical_rate_tail(dists: &[f64], window: f64) -> Result<EmpiricalRate> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "window fraction must lie in (0, 1], got {window}"
        )));
    }
    let take = ((dists.len() as f64 * window).ceil() as usize)
        .max(MIN_RATE_SAMPLES)
        .min(dists.len());
    let start = dists.len() - take;
    empirical_rate_samples(&dists[start..], start)
}

/// Fit over explicit samples whose first element is iterate `offset`.
pub fn empirical_rate_samples(samples: &[f64], offset: usize) -> Result<EmpiricalRate> {
    if samples.len() < MIN_RATE_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_RATE_SAMPLES,
            found: samples.len(),
        });
    }
    fit_window(samples, offset)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FejerReport {
    /// Slack of step `k`: `‖w^k−w‖² − μ_k(1/α − μ_k)‖Tw^k−w^k‖² − ‖w^{k+1}−w‖²`.
    pub slacks: Vec<f64>,
    /// Indices `j` whose iterate `w^j` breaks the inequality against `w^{j−1}`.
    pub violations: Vec<usize>,
    pub worst_slack: f64,
}

impl FejerReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits the quantified Fejér inequality for an `α`-averaged iteration,
/// using the relaxation parameters and residuals recorded in the trace.
pub fn check_fejer(trace: &IterateTrace, w_ref: &Vector, alpha: f64) -> Result<FejerReport> {
    let snaps = trace.snapshots.as_ref().ok_or(Error::MissingSnapshots)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "averagedness constant must lie in (0, 1], got {alpha}"
        )));
    }
    let mut slacks = Vec::with_capacity(snaps.len().saturating_sub(1));
    let mut violations = Vec::new();
    for (k, pair) in snaps.windows(2).enumerate() {
        ensure_len(&pair[0].w, w_ref.len(), "Fejér reference")?;
        let rec = &trace.records[k];
        let mu = rec.lambda;
        let before = (&pair[0].w - w_ref).norm_squared();
        let after = (&pair[1].w - w_ref).norm_squared();
        let slack = before - mu * (1.0 / alpha - mu) * rec.residual * rec.residual - after;
        if slack < -AUDIT_TOL {
            violations.push(k + 1);
        }
        slacks.push(slack);
    }
    let worst_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(FejerReport {
        slacks,
        violations,
        worst_slack,
    })
}

/// `‖x−y‖² − ((1−α)/α)‖(x−Tx)−(y−Ty)‖² − ‖Tx−Ty‖²`; nonnegative for every
/// pair iff `T` is `α`-averaged.
pub fn averaged_slack(x: &Vector, y: &Vector, tx: &Vector, ty: &Vector, alpha: f64) -> f64 {
    let d = x - y;
    let td = tx - ty;
    let rd = &d - &td;
    d.norm_squared() - (1.0 - alpha) / alpha * rd.norm_squared() - td.norm_squared()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragedReport {
    pub pairs: usize,
    pub worst_slack: f64,
    pub violations: usize,
}

impl AveragedReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `n_pairs` Gaussian pairs and audits [`averaged_slack`].
pub fn check_averaged(
    t: impl Fn(&Vector) -> Result<Vector>,
    dim: usize,
    alpha: f64,
    n_pairs: usize,
    rng: &mut Rng,
) -> Result<AveragedReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "averagedness constant must lie in (0, 1], got {alpha}"
        )));
    }
    let mut worst_slack = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..n_pairs {
        let x = rng.gaussian_vector(dim);
        let y = rng.gaussian_vector(dim);
        let s = averaged_slack(&x, &y, &t(&x)?, &t(&y)?, alpha);
        if s < -AUDIT_TOL {
            violations += 1;
        }
        worst_slack = worst_slack.min(s);
    }
    Ok(AveragedReport {
        pairs: n_pairs,
        worst_slack,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrsPpaReport {
    pub tx: Vector,
    /// `‖(v + γa) − (u − γb)‖`, `‖Tx − (v + γb)‖`, `‖(x − Tx) − (u − v)‖`.
    pub residuals: [f64; 3],
}

impl DrsPpaReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= AUDIT_TOL
    }
}

/// Reconstructs `(u, b) ∈ gph B`, `(v, a) ∈ gph A` from one DRS step at `x`
/// and checks that `(Tx, x − Tx)` lies on the graph of the operator whose
/// resolvent is the DRS map.
pub fn check_drs_ppa_identity(
    a: &ProxOperator,
    b: &ProxOperator,
    gamma: f64,
    x: &Vector,
) -> Result<DrsPpaReport> {
    let z = b.resolvent(gamma, x)?;
    let y = a.resolvent(gamma, &(&z * 2.0 - x))?;
    let tx = x + (&y - &z);
    let u = &z;
    let bv = (x - &z) / gamma;
    let v = &y;
    let av = (&z * 2.0 - x - &y) / gamma;
    let r1 = ((v + &av * gamma) - (u - &bv * gamma)).norm();
    let r2 = (&tx - (v + &bv * gamma)).norm();
    let r3 = ((x - &tx) - (u - v)).norm();
    Ok(DrsPpaReport {
        tx,
        residuals: [r1, r2, r3],
    })
}

/// `R(z) = z − J_{γA}(z − γBz)`.
#[allow(non_snake_case)]
pub fn residual_R(a: &ProxOperator, b: &ForwardOperator, gamma: f64, z: &Vector) -> Result<Vector> {
    let bz = b.apply(z)?;
    Ok(z - a.resolvent(gamma, &(z - bz * gamma))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointCase {
    /// `x = z* + γBz*`.
    DrsA,
    /// `x = z* − γAz*`.
    DrsB,
    /// `x = z* + γBz*`.
    DysA,
    /// `x = z* − γ(A + C)z*`.
    DysB,
}

impl FixedPointCase {
    pub const ALL: [FixedPointCase; 4] = [Self::DrsA, Self::DrsB, Self::DysA, Self::DysB];

    pub fn is_dys(self) -> bool {
        matches!(self, Self::DysA | Self::DysB)
    }
}

impl fmt::Display for FixedPointCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DrsA => "DRS-a",
            Self::DrsB => "DRS-b",
            Self::DysA => "DYS-a",
            Self::DysB => "DYS-b",
        })
    }
}

fn single_valued<'a>(
    op: &'a ProxOperator,
    case: FixedPointCase,
    role: &str,
) -> Result<&'a ForwardOperator> {
    op.forward().ok_or_else(|| {
        Error::NotSingleValued(format!(
            "{} ({case} needs operator {role} single-valued)",
            op.label()
        ))
    })
}

/// `‖z − J(z − γ·rest(z))‖` for whichever of `A`, `B` is single-valued,
/// with `C` folded into the forward part. Zero iff `0 ∈ (A + B + C)z`.
pub fn zero_residual(s: &Splitting, gamma: f64, z: &Vector) -> Result<f64> {
    let cz = s.c.apply(z)?;
    let (prox, fwd) = if let Some(bf) = s.b.forward() {
        (&s.a, bf.apply(z)? + cz)
    } else if let Some(af) = s.a.forward() {
        (&s.b, af.apply(z)? + cz)
    } else {
        return Err(Error::NotSingleValued(format!(
            "neither {} nor {} is single-valued; no computable zero residual",
            s.a.label(),
            s.b.label()
        )));
    };
    Ok((z - prox.resolvent(gamma, &(z - fwd * gamma))?).norm())
}

/// Point of `Fix T` generated from a zero `z*` by the case's construction.
pub fn fixed_point_from_solution(
    case: FixedPointCase,
    s: &Splitting,
    gamma: f64,
    z_star: &Vector,
) -> Result<Vector> {
    ensure_len(z_star, s.dim(), "candidate zero")?;
    Ok(match case {
        FixedPointCase::DrsA | FixedPointCase::DysA => {
            z_star + single_valued(&s.b, case, "B")?.apply(z_star)? * gamma
        }
        FixedPointCase::DrsB => z_star - single_valued(&s.a, case, "A")?.apply(z_star)? * gamma,
        FixedPointCase::DysB => {
            let az = single_valued(&s.a, case, "A")?.apply(z_star)?;
            z_star - (az + s.c.apply(z_star)?) * gamma
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub case: FixedPointCase,
    pub x: Vector,
    pub zero_residual: f64,
    /// `‖Tx − x‖`.
    pub fixed_point_residual: f64,
    /// `‖J_{γB}x − z*‖` for the a-cases.
    pub resolvent_gap: Option<f64>,
}

impl FixedPointReport {
    pub fn passed(&self) -> bool {
        self.fixed_point_residual <= AUDIT_TOL && self.resolvent_gap.is_none_or(|g| g <= AUDIT_TOL)
    }
}

/// Builds the candidate fixed point from a zero `z*` and checks it is fixed
/// by the DRS (`C` ignored) or DYS map.
pub fn verify_fixed_point_map(
    case: FixedPointCase,
    s: &Splitting,
    gamma: f64,
    z_star: &Vector,
) -> Result<FixedPointReport> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    let x = fixed_point_from_solution(case, s, gamma, z_star)?;
    let zero = if case.is_dys() {
        s.clone()
    } else {
        Splitting::pair(s.a.clone(), s.b.clone())?
    };
    let zero_res = zero_residual(&zero, gamma, z_star)?;
    if zero_res > AUDIT_TOL {
        return Err(Error::NotAZero {
            residual: zero_res,
            tol: AUDIT_TOL,
        });
    }
    let (z, y) = dys_step(&zero.a, &zero.b, &zero.c, gamma, &x)?;
    let fixed_point_residual = (&y - &z).norm();
    let resolvent_gap =
        matches!(case, FixedPointCase::DrsA | FixedPointCase::DysA).then(|| (&z - z_star).norm());
    Ok(FixedPointReport {
        case,
        x,
        zero_residual: zero_res,
        fixed_point_residual,
        resolvent_gap,
    })
}
