//! Dense linear algebra, deterministic random streams and spectral helpers.
//!
//! Vectors and matrices are plain `nalgebra` dynamic types over `f64`.
//! Everything that touches user data checks for non-finite entries at the
//! boundary; the iteration engine re-checks every iterate.

use nalgebra::{DMatrix, DVector};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative tolerance used to accept a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn ensure_finite_vector(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn ensure_finite_matrix(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_len(v: &Vector, n: usize, context: &'static str) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected: n,
            found: v.len(),
        })
    }
}

/// Checks `|M_ij - M_ji| <= SYMMETRY_TOL * max(1, max|M|)` for every pair.
pub fn check_symmetric(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "symmetric matrix (columns)",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    gap,
                });
            }
        }
    }
    Ok(())
}

/// Lower-triangular Cholesky factor `M = L Lᵀ` of a symmetric positive
/// definite matrix, computed without pivoting.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    lower: Matrix,
}

impl SpdFactor {
    pub fn new(m: &Matrix) -> Result<Self> {
        ensure_finite_matrix(m, "SPD matrix")?;
        check_symmetric(m)?;
        let n = m.nrows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = m[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn solve(&self, r: &Vector) -> Result<Vector> {
        let n = self.dim();
        ensure_len(r, n, "SPD solve right-hand side")?;
        let l = &self.lower;
        // L y = r
        let mut y = r.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        // Lᵀ v = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        Ok(y)
    }
}

/// Solves `M v = r` for symmetric positive definite `M`.
///
/// Repeated solves against the same matrix should keep an [`SpdFactor`]
/// instead.
pub fn solve_spd(m: &Matrix, r: &Vector) -> Result<Vector> {
    if m.nrows() != r.len() {
        return Err(Error::DimensionMismatch {
            context: "solve_spd",
            expected: m.nrows(),
            found: r.len(),
        });
    }
    SpdFactor::new(m)?.solve(r)
}

/// LU factorization with partial pivoting for general square systems.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl LuFactor {
    pub fn new(m: &Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                context: "LU factorization (columns)",
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        ensure_finite_matrix(m, "LU matrix")?;
        let lu = m.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::Singular { context: None });
        }
        Ok(Self { lu, n: m.nrows() })
    }

    pub fn solve(&self, r: &Vector) -> Result<Vector> {
        ensure_len(r, self.n, "LU solve right-hand side")?;
        let v = self.lu.solve(r).ok_or(Error::Singular { context: None })?;
        ensure_finite_vector(&v, "LU solution")?;
        Ok(v)
    }
}

const POWER_ITERATION_CAP: usize = 100_000;
const POWER_START_SEED: u64 = 0x005E_ED0F_5EED;

/// Largest singular value of `a` by power iteration on `AᵀA`.
///
/// The start vector is drawn from a fixed-seed Gaussian stream so that the
/// result is deterministic and the start is not orthogonal to structured
/// singular vectors. Iteration stops once the eigen-residual
/// `‖AᵀA v − ρ v‖` drops below `tol · ρ`, which bounds the relative error of
/// `ρ = σ²` by `tol`.
pub fn operator_norm(a: &Matrix, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "operator_norm tolerance must be positive, got {tol}"
        )));
    }
    ensure_finite_matrix(a, "operator_norm input")?;
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 || a.amax() == 0.0 {
        return Ok(0.0);
    }
    let mut rng = Rng::new(POWER_START_SEED);
    let mut v = Vector::from_iterator(n, (0..n).map(|_| rng.gaussian()));
    v /= v.norm();
    let mut rayleigh = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        let av = a * &v;
        let w = a.tr_mul(&av);
        rayleigh = av.norm_squared();
        let residual = (&w - &v * rayleigh).norm();
        if rayleigh == 0.0 {
            // start landed in the kernel; restart along the column of largest norm
            let col = (0..n)
                .max_by(|&i, &j| a.column(i).norm().total_cmp(&a.column(j).norm()))
                .unwrap_or(0);
            v = Vector::zeros(n);
            v[col] = 1.0;
            continue;
        }
        if residual <= tol * rayleigh {
            return Ok(rayleigh.sqrt());
        }
        v = &w / w.norm();
    }
    Err(Error::PowerIterationStalled {
        iterations: POWER_ITERATION_CAP,
        rayleigh,
    })
}

/// SplitMix64 output function; also used to derive child seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random stream.
///
/// * Generator: xoshiro256** whose 256-bit state is filled by four
///   consecutive SplitMix64 outputs of the 64-bit seed.
/// * Uniforms: `(next_u64 >> 11) · 2⁻⁵³`, in `[0, 1)`.
/// * Normals: Box–Muller on a pair of uniforms `(u1, u2)`:
///   `r = sqrt(−2 ln(1 − u1))`, emitting `r cos(2π u2)` then `r sin(2π u2)`.
/// * Children: `child(i)` is seeded with `splitmix64(seed ^ splitmix64(i))`.
///
/// The same seed produces the same stream on every platform.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn child(&self, index: u64) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(index)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn gaussian_vector(&mut self, n: usize) -> Vector {
        Vector::from_iterator(n, (0..n).map(|_| self.gaussian()))
    }

    /// Index in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }
}

/// `m × n` matrix of standard normals, filled in row-major order.
pub fn rng_gaussian(rng: &mut Rng, m: usize, n: usize) -> Matrix {
    Matrix::from_row_iterator(m, n, (0..m * n).map(|_| rng.gaussian()))
}

/// Random symmetric positive definite matrix `GᵀG/n + shift·I`.
pub fn random_spd(rng: &mut Rng, n: usize, shift: f64) -> Matrix {
    let g = rng_gaussian(rng, n, n);
    let mut m = g.tr_mul(&g) / n as f64;
    for i in 0..n {
        m[(i, i)] += shift;
    }
    // exact symmetry
    for i in 0..n {
        for j in (i + 1)..n {
            m[(j, i)] = m[(i, j)];
        }
    }
    m
}

/// Serializes a vector as a plain JSON array.
pub mod serde_vector {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

/// Serializes a matrix as a list of rows.
pub mod serde_rows {
    use super::Matrix;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            m.row_iter()
                .map(|r| r.iter().copied().collect::<Vec<f64>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("matrix rows have unequal lengths"));
        }
        Ok(Matrix::from_row_iterator(
            rows.len(),
            ncols,
            rows.into_iter().flatten(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dvec(v: &[f64]) -> Vector {
        Vector::from_column_slice(v)
    }

    #[test]
    fn identity_system() {
        let v = solve_spd(&Matrix::identity(3, 3), &dvec(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(v, dvec(&[1.0, 2.0, 3.0]));
    }

    #[test]
    fn scaled_identity_system() {
        let m = Matrix::identity(2, 2) * 2.0;
        let v = solve_spd(&m, &dvec(&[2.0, 4.0])).unwrap();
        assert!((v - dvec(&[1.0, 2.0])).amax() < 1e-15);
    }

    #[test]
    fn random_spd_residual() {
        let mut rng = Rng::new(7);
        let m = random_spd(&mut rng, 5, 0.5);
        let r = rng.gaussian_vector(5);
        let v = solve_spd(&m, &r).unwrap();
        assert!((&m * &v - &r).norm() <= 1e-10 * (1.0 + r.norm()));
    }

    #[test]
    fn indefinite_names_pivot() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match SpdFactor::new(&m) {
            Err(Error::NotPositiveDefinite { pivot, value }) => {
                assert_eq!(pivot, 1);
                assert!((value + 3.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn asymmetric_rejected() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        assert!(matches!(
            SpdFactor::new(&m),
            Err(Error::NotSymmetric { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn norms_of_simple_matrices() {
        assert!((operator_norm(&Matrix::identity(4, 4), 1e-12).unwrap() - 1.0).abs() < 1e-12);
        let d = Matrix::from_diagonal(&dvec(&[3.0, 1.0]));
        assert!((operator_norm(&d, 1e-12).unwrap() - 3.0).abs() < 1e-10);
        assert_eq!(operator_norm(&Matrix::zeros(3, 2), 1e-8).unwrap(), 0.0);
        // start vector orthogonal to ones must not matter
        let a = Matrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert!((operator_norm(&a, 1e-12).unwrap() - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn gaussian_determinism_and_shape() {
        let a = rng_gaussian(&mut Rng::new(1), 4, 6);
        let b = rng_gaussian(&mut Rng::new(1), 4, 6);
        assert_eq!(a, b);
        let c = rng_gaussian(&mut Rng::new(1), 5, 7);
        assert_eq!(c.shape(), (5, 7));
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::new(2);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn streams_reproducible() {
        let mut a = Rng::new(99);
        let mut b = Rng::new(99);
        for _ in 0..10_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_ne!(
            Rng::new(99).child(0).next_u64(),
            Rng::new(99).child(1).next_u64()
        );
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the SplitMix64 stream started at 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn lu_nonsymmetric() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, -2.0, 1.0]);
        let lu = LuFactor::new(&m).unwrap();
        let v = lu.solve(&dvec(&[3.0, -1.0])).unwrap();
        assert!((&m * &v - dvec(&[3.0, -1.0])).norm() < 1e-14);
        assert!(LuFactor::new(&Matrix::zeros(2, 2)).is_err());
    }
}
