//! Dense complex matrix kernel: Hermitian eigendecomposition, products,
//! traces, expectations and variances.
//!
//! Everything here is a pure function of immutable inputs; the wrapper
//! types validate their invariants once at construction and are freely
//! shareable afterwards.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::consts;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square complex matrix. Row-major construction, finite entries only.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Build from row-major entries. Length must be `dim * dim`.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let m = DMatrix::from_row_slice(dim, dim, entries);
        Self::from_dmatrix(m)
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self { inner: m })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { inner: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ||self - other||_max without forming the difference.
    pub fn max_dist(&self, other: &Self) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Deviation from Hermiticity, ||A - A^dag||_max.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.inner[(i, j)] - self.inner[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Deviation from unitarity, ||A^dag A - I||_max.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let p = self.inner.adjoint() * &self.inner;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((p[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { inner: &self.inner * &other.inner })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { inner: &self.inner + &other.inner })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { inner: self.inner.clone() * c }
    }

    /// Kronecker product, self on the most significant side.
    pub fn kron(&self, other: &Self) -> Self {
        Self { inner: self.inner.kronecker(&other.inner) }
    }

    /// A -> U A U^dag.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        self.check_dim(u)?;
        Ok(Self { inner: &u.inner * &self.inner * u.inner.adjoint() })
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }
}

/// A validated Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > consts::HERMITIAN_TOL {
            return Err(Error::InvalidMatrix(format!(
                "Hermiticity defect {defect:.3e} exceeds {:.0e}",
                consts::HERMITIAN_TOL
            )));
        }
        Ok(Self { matrix })
    }

    /// Symmetrize (A + A^dag)/2 first; for inputs that are Hermitian up to
    /// rounding this removes the defect instead of rejecting it.
    pub fn new_symmetrized(matrix: ComplexMatrix) -> Result<Self> {
        let m = matrix.as_dmatrix();
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        Self::new(ComplexMatrix::from_dmatrix(sym)?)
    }

    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_rows(dim, entries)?)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim) }
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let herm = HermitianOperator::new(matrix)?;
        let tr = herm.matrix().trace();
        if (tr.re - 1.0).abs() > consts::TRACE_TOL || tr.im.abs() > consts::TRACE_TOL {
            return Err(Error::InvalidMatrix(format!("trace {tr} is not 1")));
        }
        let eig = eig_hermitian(&herm)?;
        let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
        if min < -consts::PSD_TOL {
            return Err(Error::InvalidMatrix(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix: herm.matrix.clone() })
    }

    /// Pure state rho = |psi><psi| from a (normalized) state vector.
    pub fn from_state_vector(psi: &[C64]) -> Result<Self> {
        let n = psi.len();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMatrix(format!("state norm^2 = {norm}")));
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = psi[i] * psi[j].conj() / C64::new(norm, 0.0);
            }
        }
        Self::new(ComplexMatrix::from_dmatrix(m)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0));
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator { matrix: self.matrix.clone() }
    }
}

/// Sorted eigensystem of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column i is the eigenvector of eigenvalues[i]; orthonormal set.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Reassemble V diag(lambda) V^dag.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.eigenvectors.as_dmatrix();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&x| C64::new(x, 0.0)),
        ));
        ComplexMatrix { inner: v * d * v.adjoint() }
    }
}

/// Eigendecomposition with deterministic ordering: eigenvalues ascending,
/// each eigenvector's largest-magnitude component made real positive.
///
/// The fast QR path is verified by reconstruction; on failure (it can
/// silently lose accuracy on badly conditioned inputs) the decomposition
/// is redone with cyclic Jacobi rotations, which always converge.
pub fn eig_hermitian(a: &HermitianOperator) -> Result<EigenDecomposition> {
    let eig = nalgebra::SymmetricEigen::new(a.matrix.inner.clone());
    let dec = finalize_eigen(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors);
    let tol = crate::consts::EIG_RESIDUAL_TOL * a.matrix.max_norm().max(1.0);
    if dec.reconstruct().max_dist(a.matrix()) <= tol {
        return Ok(dec);
    }
    let (values, vectors) = jacobi_hermitian(&a.matrix.inner, 100);
    let dec = finalize_eigen(values, vectors);
    if dec.reconstruct().max_dist(a.matrix()) <= tol {
        return Ok(dec);
    }
    Err(Error::InvalidMatrix(
        "eigendecomposition failed to converge".into(),
    ))
}

fn finalize_eigen(values_raw: Vec<f64>, vectors_raw: DMatrix<C64>) -> EigenDecomposition {
    let n = values_raw.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values_raw[i].partial_cmp(&values_raw[j]).unwrap());

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(values_raw[src]);
        let col = vectors_raw.column(src);
        // Phase fix: rotate so the largest-magnitude component is real positive.
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (k, z) in col.iter().enumerate() {
            if z.norm() > best_mag {
                best_mag = z.norm();
                best = k;
            }
        }
        let phase = if best_mag > 0.0 {
            let z = col[best];
            (z / z.norm()).conj()
        } else {
            C64::new(1.0, 0.0)
        };
        for k in 0..n {
            vectors[(k, dst)] = col[k] * phase;
        }
    }
    EigenDecomposition {
        eigenvalues: values,
        eigenvectors: ComplexMatrix { inner: vectors },
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix: repeatedly zero
/// the largest off-diagonal entries with unitary plane rotations. Returns
/// unsorted eigenvalues and the accumulated eigenvector columns.
fn jacobi_hermitian(a0: &DMatrix<C64>, max_sweeps: usize) -> (Vec<f64>, DMatrix<C64>) {
    let n = a0.nrows();
    let mut a = a0.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a0.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= 1e-18 * scale {
                    continue;
                }
                // Factor out the phase of a_pq, then a real rotation by the
                // classic angle zeroes the pair.
                let phase = apq / C64::new(b, 0.0);
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * b);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let wpp = C64::new(c, 0.0);
                let wpq = C64::new(s, 0.0);
                let wqp = -phase.conj() * s;
                let wqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * wpp + akq * wqp;
                    a[(k, q)] = akp * wpq + akq * wqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * wpp.conj() + aqk * wqp.conj();
                    a[(q, k)] = apk * wpq.conj() + aqk * wqq.conj();
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * wpp + vkq * wqp;
                    v[(k, q)] = vkp * wpq + vkq * wqq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// (AB + BA)/2.
pub fn jordan_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(a.dim(), b.dim()));
    }
    let p = a.matrix.as_dmatrix() * b.matrix.as_dmatrix();
    let q = b.matrix.as_dmatrix() * a.matrix.as_dmatrix();
    let m = (p + q) * C64::new(0.5, 0.0);
    HermitianOperator::new_symmetrized(ComplexMatrix::from_dmatrix(m)?)
}

/// tr(rho O); the imaginary residue must vanish at 1e-10 and is discarded.
pub fn expectation(rho: &DensityMatrix, o: &HermitianOperator) -> Result<f64> {
    if rho.dim() != o.dim() {
        return Err(Error::DimMismatch(rho.dim(), o.dim()));
    }
    // tr(rho O) = sum_ij rho_ij O_ji, no full product needed.
    let n = rho.dim();
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            tr += rho.matrix.get(i, j) * o.matrix.get(j, i);
        }
    }
    let scale = 1.0 + rho.matrix.max_norm() * o.matrix.max_norm() * n as f64;
    debug_assert!(tr.im.abs() <= 1e-10 * scale, "imaginary residue {:.3e}", tr.im);
    Ok(tr.re)
}

/// <O^2> - <O>^2, clamped to [0, inf).
pub fn variance(rho: &DensityMatrix, o: &HermitianOperator) -> Result<f64> {
    if rho.dim() != o.dim() {
        return Err(Error::DimMismatch(rho.dim(), o.dim()));
    }
    let o2 = jordan_product(o, o)?;
    let mean = expectation(rho, o)?;
    let mean_sq = expectation(rho, &o2)?;
    let var = mean_sq - mean * mean;
    debug_assert!(var >= -1e-9, "variance {var:.3e} below -1e-9");
    Ok(var.max(0.0))
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}
