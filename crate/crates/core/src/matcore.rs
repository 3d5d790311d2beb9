//! Hermitian matrix kernels: eigendecomposition, spectral functions, Schatten
//! norms, the Thompson metric and the Petz-Rényi divergence.
//!
//! Everything here is a pure function of its inputs. Matrices are dense
//! `nalgebra` complex matrices wrapped in [`HermitianMatrix`] and
//! [`DensityMatrix`] newtypes that carry their invariants.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Complex = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<Complex>;

/// Numerical thresholds shared by the matrix kernels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Max entrywise `|H - H*|` accepted as Hermitian.
    pub hermitian: f64,
    /// Most negative eigenvalue accepted on a density matrix.
    pub psd: f64,
    /// Max `|Tr ρ - 1|` accepted on a density matrix.
    pub trace: f64,
    /// Eigenvalues in `[-clip, 0)` are clipped to zero before fractional powers.
    pub clip: f64,
    /// Minimum eigenvalue for a matrix to count as positive definite.
    pub positive_definite: f64,
    /// Iteration cap handed to the eigensolver.
    pub eig_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        DEFAULT_TOLERANCES
    }
}

pub const DEFAULT_TOLERANCES: Tolerances = Tolerances {
    hermitian: 1e-12,
    psd: 1e-10,
    trace: 1e-10,
    clip: 1e-12,
    positive_definite: 1e-14,
    eig_max_iter: 10_000,
};

/// Largest entrywise deviation of `m` from its conjugate transpose.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// A square complex matrix equal to its conjugate transpose.
///
/// The stored entries are exactly Hermitian: constructors symmetrize after
/// the tolerance check, so downstream eigensolves never see skew noise.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::new_with(m, &DEFAULT_TOLERANCES)
    }

    pub fn new_with(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::invalid(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let defect = hermiticity_defect(&m);
        if defect > tol.hermitian {
            return Err(Error::invalid(format!(
                "matrix is not Hermitian (max |H - H*| = {defect:e})"
            )));
        }
        Ok(Self(hermitian_part(&m)))
    }

    /// Hermitian part `(M + M*)/2` of an arbitrary square matrix.
    pub fn hermitian_part_of(m: &CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix required");
        Self(hermitian_part(m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex::new(diag[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        }))
    }

    pub fn scaled_identity(d: usize, c: f64) -> Self {
        Self(CMatrix::identity(d, d).scale(c))
    }

    pub fn identity(d: usize) -> Self {
        Self::scaled_identity(d, 1.0)
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.scale(c))
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &HermitianMatrix) {
        self.0.zip_apply(&other.0, |a, b| *a += b * c);
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn content_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.dim().hash(&mut h);
        for z in self.0.iter() {
            z.re.to_bits().hash(&mut h);
            z.im.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// `Re Tr[A B]` for Hermitian `A`, `B`; the imaginary part vanishes exactly
/// in exact arithmetic and is dropped.
pub fn trace_product(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    // Tr[AB] = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij)
    a.0.iter().zip(b.0.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Unit-trace positive-semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        Self::new_with(h, &DEFAULT_TOLERANCES)
    }

    pub fn new_with(h: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let tr = h.trace();
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::invalid(format!(
                "density matrix trace is {tr} (deviation {:e})",
                (tr - 1.0).abs()
            )));
        }
        let eig = herm_eig(&h)?;
        if eig.min() < -tol.psd {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {:e}",
                eig.min()
            )));
        }
        Ok(Self(h))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag))
    }

    /// `|ψ⟩⟨ψ|` for a unit vector `ψ` (normalized here).
    pub fn pure(psi: &[Complex]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || norm == 0.0 {
            return Err(Error::invalid("pure state vector must be non-zero"));
        }
        let d = psi.len();
        let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(HermitianMatrix(hermitian_part(&m)))
    }

    /// `|k⟩⟨k|` in dimension `d`.
    pub fn basis_state(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::invalid(format!("basis index {k} out of range for d={d}")));
        }
        let mut diag = vec![0.0; d];
        diag[k] = 1.0;
        Self::from_real_diagonal(&diag)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(HermitianMatrix::scaled_identity(d, 1.0 / d as f64))
    }

    /// Wraps a matrix the caller has already validated.
    pub(crate) fn new_unchecked(h: HermitianMatrix) -> Self {
        Self(h)
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;

    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}

/// Spectral decomposition `H = U diag(λ) U*` with `λ` ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `U diag(f(λ)) U*` without any domain checks.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col.scale_mut(f(self.values[j]));
        }
        let m = scaled * self.vectors.adjoint();
        HermitianMatrix(hermitian_part(&m))
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(|x| x)
    }

    /// Fractional power of a positive-semidefinite spectrum, with the
    /// clipping rule applied to slightly negative eigenvalues.
    pub fn psd_pow(&self, r: f64, tol: &Tolerances) -> Result<HermitianMatrix> {
        let clipped = clip_spectrum(&self.values, tol)?;
        if r < 0.0 {
            if let Some(&bad) = clipped.iter().find(|&&x| x <= 0.0) {
                return Err(Error::singular(format!("negative power {r} of eigenvalue {bad:e}")));
            }
        }
        let powered = Eigen {
            values: clipped.iter().map(|&x| x.powf(r)).collect(),
            vectors: self.vectors.clone(),
        };
        Ok(powered.reconstruct())
    }
}

fn clip_spectrum(values: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&x| {
            if x >= 0.0 {
                Ok(x)
            } else if x >= -tol.clip {
                Ok(0.0)
            } else {
                Err(Error::singular(format!(
                    "eigenvalue {x:e} below clipping threshold -{:e} on a PSD input",
                    tol.clip
                )))
            }
        })
        .collect()
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn herm_eig(h: &HermitianMatrix) -> Result<Eigen> {
    herm_eig_with(h, &DEFAULT_TOLERANCES)
}

pub fn herm_eig_with(h: &HermitianMatrix, tol: &Tolerances) -> Result<Eigen> {
    let eig =
        h.0.clone()
            .try_symmetric_eigen(f64::EPSILON, tol.eig_max_iter)
            .ok_or_else(|| Error::EigenFailure {
                hash: h.content_hash(),
                dim: h.dim(),
            })?;
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    Ok(Eigen { values, vectors })
}

/// `f(H) = Σ f(λ_i) u_i u_i*`. Fails if `f` is not finite on the spectrum.
pub fn mat_fun(h: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let eig = herm_eig(h)?;
    let mut mapped = Vec::with_capacity(eig.values.len());
    for &x in &eig.values {
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::singular(format!("function is not finite at eigenvalue {x:e}")));
        }
        mapped.push(y);
    }
    Ok(Eigen {
        values: mapped,
        vectors: eig.vectors,
    }
    .reconstruct())
}

/// `H^r` for positive-semidefinite `H`, clipping roundoff-negative eigenvalues.
pub fn mat_pow(h: &HermitianMatrix, r: f64) -> Result<HermitianMatrix> {
    mat_pow_with(h, r, &DEFAULT_TOLERANCES)
}

pub fn mat_pow_with(h: &HermitianMatrix, r: f64, tol: &Tolerances) -> Result<HermitianMatrix> {
    herm_eig_with(h, tol)?.psd_pow(r, tol)
}

/// Schatten `r`-norm; pass `f64::INFINITY` for the operator norm.
pub fn schatten_norm(h: &HermitianMatrix, r: f64) -> Result<f64> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::invalid(format!("Schatten order must be >= 1, got {r}")));
    }
    let eig = herm_eig(h)?;
    let abs = eig.values.iter().map(|x| x.abs());
    if r.is_infinite() {
        return Ok(abs.fold(0.0, f64::max));
    }
    // scale by the largest modulus to keep |λ|^r representable
    let top = eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    Ok(top * abs.map(|x| (x / top).powf(r)).sum::<f64>().powf(1.0 / r))
}

/// Thompson metric `d_T(V, U) = max_i |log μ_i|`, `μ` the spectrum of `V^{-1/2} U V^{-1/2}`.
pub fn thompson_metric(v: &HermitianMatrix, u: &HermitianMatrix) -> Result<f64> {
    if v.dim() != u.dim() {
        return Err(Error::invalid("Thompson metric arguments differ in dimension"));
    }
    let u_eig = herm_eig(u)?;
    if u_eig.min() <= DEFAULT_TOLERANCES.positive_definite {
        return Err(Error::singular(format!(
            "Thompson metric needs positive definite inputs; second argument has eigenvalue {:e}",
            u_eig.min()
        )));
    }
    thompson_metric_from(&herm_eig(v)?, u)
}

/// Thompson metric with the first argument given in spectral form.
pub(crate) fn thompson_metric_from(v_eig: &Eigen, u: &HermitianMatrix) -> Result<f64> {
    if v_eig.min() <= DEFAULT_TOLERANCES.positive_definite {
        return Err(Error::singular(format!(
            "Thompson metric needs positive definite inputs; first argument has eigenvalue {:e}",
            v_eig.min()
        )));
    }
    let inv_sqrt = v_eig.reconstruct_with(|x| x.powf(-0.5));
    let sandwich = HermitianMatrix::hermitian_part_of(&(inv_sqrt.as_matrix() * u.as_matrix() * inv_sqrt.as_matrix()));
    let mu = herm_eig(&sandwich)?;
    if mu.min() <= 0.0 {
        return Err(Error::singular(format!(
            "Thompson metric needs positive definite inputs; relative spectrum reaches {:e}",
            mu.min()
        )));
    }
    Ok(mu.min().ln().abs().max(mu.max().ln().abs()))
}

/// Value of a divergence that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn finite(self) -> Option<f64> {
        match self {
            Divergence::Finite(x) => Some(x),
            Divergence::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Divergence::Infinite)
    }
}

pub(crate) fn check_order(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha == 1.0 {
        return Err(Error::invalid(format!(
            "Rényi order must lie in (0,1) ∪ (1,∞), got {alpha}"
        )));
    }
    Ok(())
}

/// Converts `Tr[A^α Q^{1-α}]` into `D_α(A‖Q)`.
pub(crate) fn divergence_from_trace(trace: f64, alpha: f64) -> Divergence {
    if trace > 0.0 && trace.is_finite() {
        Divergence::Finite(trace.ln() / (alpha - 1.0))
    } else {
        Divergence::Infinite
    }
}

/// Petz-Rényi divergence `D_α(A‖Q) = log(Tr[A^α Q^{1-α}]) / (α-1)`.
///
/// Returns [`Divergence::Infinite`] when the trace term is not positive, or
/// for `α > 1` when `A` has weight outside the support of `Q`.
pub fn petz_renyi_divergence(a: &DensityMatrix, q: &HermitianMatrix, alpha: f64) -> Result<Divergence> {
    check_order(alpha)?;
    if a.dim() != q.dim() {
        return Err(Error::invalid("divergence arguments differ in dimension"));
    }
    let tol = DEFAULT_TOLERANCES;
    let a_pow = mat_pow(a, alpha)?;
    let q_eig = herm_eig(q)?;
    let q_spec = clip_spectrum(&q_eig.values, &tol)?;
    let q_pow = if alpha < 1.0 {
        Eigen {
            values: q_spec.iter().map(|&x| x.powf(1.0 - alpha)).collect(),
            vectors: q_eig.vectors,
        }
        .reconstruct()
    } else {
        let kernel: Vec<bool> = q_spec.iter().map(|&x| x <= tol.positive_definite).collect();
        if kernel.iter().any(|&k| k) {
            let projector = Eigen {
                values: kernel.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect(),
                vectors: q_eig.vectors.clone(),
            }
            .reconstruct();
            if trace_product(a, &projector) > tol.psd {
                return Ok(Divergence::Infinite);
            }
        }
        Eigen {
            values: q_spec
                .iter()
                .zip(&kernel)
                .map(|(&x, &k)| if k { 0.0 } else { x.powf(1.0 - alpha) })
                .collect(),
            vectors: q_eig.vectors,
        }
        .reconstruct()
    };
    Ok(divergence_from_trace(trace_product(&a_pow, &q_pow), alpha))
}
