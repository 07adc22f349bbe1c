//! Quantum Fisher information for symmetric states, in two independent
//! ways: the closed form over the block parameterization, and a numeric
//! oracle built from symmetric logarithmic derivatives. On top of both sit
//! the Cramer-Rao bound, the identity connecting it to (Delta Y)^2, and
//! the minimal sample count.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::commutant::{
    build_state, decompose_commutant_seeded, random_symmetric_state, su_generators,
    BlockStructure, SymmetricStateParams,
};
use crate::consts;
use crate::error::{Error, Result};
use crate::groups::GroupRep;
use crate::linalg::{
    eig_hermitian, expectation, jordan_product, variance, ComplexMatrix, DensityMatrix,
    HermitianOperator, C64,
};
use crate::rng;
use crate::twirl::twirl_dense;

/// Which parameters survive the weight threshold and where each sector
/// lives in the flattened parameter vector. The q-sector comes first
/// (all retained blocks except the last, which is eliminated by the
/// normalization constraint), followed by one r-sector per retained block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    /// Indices into `BlockStructure::blocks` with q above the threshold,
    /// in canonical block order.
    pub retained: Vec<usize>,
    /// Parameter-vector offset and length of each retained block's
    /// r-sector (length n_alpha^2 - 1, possibly 0).
    pub r_sectors: Vec<(usize, usize)>,
    /// Number of free q parameters, retained.len() - 1.
    pub q_params: usize,
    /// Total parameter count.
    pub total: usize,
}

/// Build the layout for the given weights, dropping blocks with
/// q <= WEIGHT_THRESHOLD.
pub fn param_layout(bs: &BlockStructure, params: &SymmetricStateParams) -> Result<ParamLayout> {
    params.validate_shape(bs)?;
    let retained: Vec<usize> = (0..bs.num_blocks())
        .filter(|&a| params.q[a] > consts::WEIGHT_THRESHOLD)
        .collect();
    let q_params = retained.len().saturating_sub(1);
    let mut offset = q_params;
    let mut r_sectors = Vec::with_capacity(retained.len());
    for &a in &retained {
        let n = bs.blocks()[a].multiplicity;
        let len = n * n - 1;
        r_sectors.push((offset, len));
        offset += len;
    }
    Ok(ParamLayout { retained, r_sectors, q_params, total: offset })
}

/// The quantum Fisher information matrix together with its layout.
#[derive(Debug, Clone)]
pub struct QfiMatrix {
    pub matrix: DMatrix<f64>,
    pub layout: ParamLayout,
}

impl QfiMatrix {
    pub fn dim_params(&self) -> usize {
        self.layout.total
    }

    /// Max deviation from symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let p = self.matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Per-block scalars of a commutant observable: Y_a = a_a I + b_a . lambda_a.
#[derive(Debug, Clone)]
pub struct BlockObservable {
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
}

/// Extract (a_a, b_a) of a twirled observable from its multiplicity-space
/// blocks: a_a = tr(Y_a)/n_a, b_{a,i} = tr(Y_a lambda_i)/2.
pub fn block_observable(y: &HermitianOperator, bs: &BlockStructure) -> Result<BlockObservable> {
    let defect = bs.pattern_defect(y.matrix())?;
    if defect > consts::COMMUTANT_TOL {
        return Err(Error::NotSymmetricObservable(defect));
    }
    let tilde = bs.to_block_basis(y.matrix())?;
    let mut a = Vec::with_capacity(bs.num_blocks());
    let mut b = Vec::with_capacity(bs.num_blocks());
    for (alpha, blk) in bs.blocks().iter().enumerate() {
        let n = blk.multiplicity;
        let ya = bs.multiplicity_block(&tilde, alpha);
        a.push(ya.trace().re / n as f64);
        if n == 1 {
            b.push(Vec::new());
            continue;
        }
        let gens = su_generators(n)?;
        let mut bv = Vec::with_capacity(n * n - 1);
        for i in 0..gens.count() {
            let mut tr = C64::new(0.0, 0.0);
            for x in 0..n {
                for yy in 0..n {
                    tr += ya[(x, yy)] * gens.lambda(i).get(yy, x);
                }
            }
            bv.push(tr.re / 2.0);
        }
        b.push(bv);
    }
    Ok(BlockObservable { a, b })
}

/// Reconstruct the dense observable from its block scalars (inverse of
/// `block_observable`, used by tests).
pub fn block_observable_dense(
    bo: &BlockObservable,
    bs: &BlockStructure,
) -> Result<HermitianOperator> {
    let mut blocks = Vec::with_capacity(bs.num_blocks());
    for (alpha, blk) in bs.blocks().iter().enumerate() {
        let n = blk.multiplicity;
        let mut m = DMatrix::<C64>::identity(n, n) * C64::new(bo.a[alpha], 0.0);
        if n > 1 {
            let gens = su_generators(n)?;
            m += su_linear(&gens, &bo.b[alpha])?;
        }
        blocks.push(m);
    }
    HermitianOperator::new_symmetrized(bs.assemble(&blocks)?)
}

fn su_linear(
    gens: &crate::commutant::SuGenerators,
    coeffs: &[f64],
) -> Result<DMatrix<C64>> {
    Ok(gens.linear_combination(coeffs)?.into_dmatrix())
}

/// beta(theta) = sum_a q_a l_a with l_a = a_a + b_a . r_a.
pub fn beta_value(
    bo: &BlockObservable,
    params: &SymmetricStateParams,
    layout: &ParamLayout,
) -> f64 {
    layout
        .retained
        .iter()
        .map(|&a| params.q[a] * block_l(bo, params, a))
        .sum()
}

fn block_l(bo: &BlockObservable, params: &SymmetricStateParams, alpha: usize) -> f64 {
    bo.a[alpha]
        + bo.b[alpha]
            .iter()
            .zip(&params.r[alpha])
            .map(|(x, y)| x * y)
            .sum::<f64>()
}

/// Gradient of beta with respect to theta:
/// (l_a - l_s for the free q's, then q_a b_a per retained block).
pub fn grad_beta(
    bo: &BlockObservable,
    params: &SymmetricStateParams,
    layout: &ParamLayout,
) -> Result<Vec<f64>> {
    if bo.a.len() != params.q.len() {
        return Err(Error::ShapeMismatch(format!(
            "observable has {} blocks, params have {}",
            bo.a.len(),
            params.q.len()
        )));
    }
    let mut grad = Vec::with_capacity(layout.total);
    if layout.q_params > 0 {
        let last = *layout.retained.last().unwrap();
        let l_s = block_l(bo, params, last);
        for &a in &layout.retained[..layout.q_params] {
            grad.push(block_l(bo, params, a) - l_s);
        }
    }
    for &a in &layout.retained {
        for bi in &bo.b[a] {
            grad.push(params.q[a] * bi);
        }
    }
    debug_assert_eq!(grad.len(), layout.total);
    Ok(grad)
}

/// Moore-Penrose pseudo-inverse of a real symmetric matrix, via the
/// reconstruction-verified Hermitian eigensolver.
pub fn sym_pinv(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut cm = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            cm[(i, j)] = C64::new(0.5 * (m[(i, j)] + m[(j, i)]), 0.0);
        }
    }
    let h = HermitianOperator::new_symmetrized(ComplexMatrix::from_dmatrix(cm).expect("finite"))
        .expect("symmetrized real matrix is Hermitian");
    let eig = eig_hermitian(&h).expect("eigendecomposition of a finite symmetric matrix");
    let max_abs = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    let cutoff = tol * max_abs.max(1.0);
    let v = eig.eigenvectors.as_dmatrix();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        if lam.abs() <= cutoff {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += (v[(i, k)] * v[(j, k)].conj()).re / lam;
            }
        }
    }
    out
}

/// Closed-form QFI: H(q) = diag(1/q) + (1/q_s) e^T e on the free q's;
/// H(r_a) = q_a [R_a - r_a^T r_a + (2/n_a) I]^+ per retained block.
pub fn qfi_closed_form(bs: &BlockStructure, params: &SymmetricStateParams) -> Result<QfiMatrix> {
    let layout = param_layout(bs, params)?;
    for &a in &layout.retained {
        if params.q[a] <= consts::WEIGHT_THRESHOLD {
            return Err(Error::DegenerateWeight(a, params.q[a]));
        }
    }
    let p = layout.total;
    let mut h = DMatrix::<f64>::zeros(p, p);
    if layout.q_params > 0 {
        let last = *layout.retained.last().unwrap();
        let q_s = params.q[last];
        for i in 0..layout.q_params {
            for j in 0..layout.q_params {
                let mut v = 1.0 / q_s;
                if i == j {
                    v += 1.0 / params.q[layout.retained[i]];
                }
                h[(i, j)] = v;
            }
        }
    }
    for (slot, &a) in layout.retained.iter().enumerate() {
        let (off, len) = layout.r_sectors[slot];
        if len == 0 {
            continue;
        }
        let n = bs.blocks()[a].multiplicity;
        let gens = su_generators(n)?;
        let r = &params.r[a];
        let mut m = gens.r_matrix(r);
        for i in 0..len {
            for j in 0..len {
                m[(i, j)] -= r[i] * r[j];
            }
            m[(i, i)] += 2.0 / n as f64;
        }
        let h_r = sym_pinv(&m, consts::PINV_TOL) * params.q[a];
        for i in 0..len {
            for j in 0..len {
                h[(off + i, off + j)] = h_r[(i, j)];
            }
        }
    }
    Ok(QfiMatrix { matrix: h, layout })
}

/// Solve d rho = L o rho for Hermitian L in the eigenbasis of rho:
/// L_mn = 2 (d rho)_mn / (p_m + p_n), zeroed where p_m + p_n <= pinv_tol.
pub fn sld_numeric(
    rho: &DensityMatrix,
    drho: &HermitianOperator,
    pinv_tol: f64,
) -> Result<HermitianOperator> {
    if rho.dim() != drho.dim() {
        return Err(Error::DimMismatch(rho.dim(), drho.dim()));
    }
    let eig = eig_hermitian(&rho.as_hermitian())?;
    sld_in_eigenbasis(&eig, drho, pinv_tol)
}

fn sld_in_eigenbasis(
    eig: &crate::linalg::EigenDecomposition,
    drho: &HermitianOperator,
    pinv_tol: f64,
) -> Result<HermitianOperator> {
    let n = eig.dim();
    let v = eig.eigenvectors.as_dmatrix();
    let d = v.adjoint() * drho.matrix().as_dmatrix() * v;
    let mut l = DMatrix::<C64>::zeros(n, n);
    for m in 0..n {
        for k in 0..n {
            let denom = eig.eigenvalues[m] + eig.eigenvalues[k];
            if denom > pinv_tol {
                l[(m, k)] = d[(m, k)] * Complex64::new(2.0 / denom, 0.0);
            }
        }
    }
    let back = v * l * v.adjoint();
    HermitianOperator::new_symmetrized(ComplexMatrix::from_dmatrix(back)?)
}

/// Analytic partial derivatives of rho(theta) in the original basis, in
/// layout order: block-alpha-minus-block-s patterns for the q-sector,
/// q_a lambda_i (x) I/(2 d_a) for each r component.
pub fn rho_derivatives(
    bs: &BlockStructure,
    params: &SymmetricStateParams,
    layout: &ParamLayout,
) -> Result<Vec<HermitianOperator>> {
    let zero_blocks: Vec<DMatrix<C64>> = bs
        .blocks()
        .iter()
        .map(|b| DMatrix::<C64>::zeros(b.multiplicity, b.multiplicity))
        .collect();
    let block_density = |alpha: usize| -> Result<DMatrix<C64>> {
        let n = bs.blocks()[alpha].multiplicity;
        let mut m = DMatrix::<C64>::identity(n, n) * C64::new(1.0 / n as f64, 0.0);
        if n > 1 {
            let gens = su_generators(n)?;
            m += su_linear(&gens, &params.r[alpha])? * C64::new(0.5, 0.0);
        }
        Ok(m)
    };

    let mut out = Vec::with_capacity(layout.total);
    if layout.q_params > 0 {
        let last = *layout.retained.last().unwrap();
        for &a in &layout.retained[..layout.q_params] {
            let mut blocks = zero_blocks.clone();
            blocks[a] = block_density(a)? * C64::new(1.0 / bs.blocks()[a].irrep_dim as f64, 0.0);
            blocks[last] = block_density(last)?
                * C64::new(-1.0 / bs.blocks()[last].irrep_dim as f64, 0.0);
            out.push(HermitianOperator::new_symmetrized(bs.assemble(&blocks)?)?);
        }
    }
    for (slot, &a) in layout.retained.iter().enumerate() {
        let (_, len) = layout.r_sectors[slot];
        if len == 0 {
            continue;
        }
        let n = bs.blocks()[a].multiplicity;
        let d = bs.blocks()[a].irrep_dim as f64;
        let gens = su_generators(n)?;
        for i in 0..len {
            let mut blocks = zero_blocks.clone();
            blocks[a] = gens.lambda(i).as_dmatrix() * C64::new(params.q[a] / (2.0 * d), 0.0);
            out.push(HermitianOperator::new_symmetrized(bs.assemble(&blocks)?)?);
        }
    }
    Ok(out)
}

/// Numeric QFI oracle: H_kl = tr[rho (L_k o L_l)] with every SLD obtained
/// from `sld_numeric` on the analytic state derivatives.
pub fn qfi_numeric(bs: &BlockStructure, params: &SymmetricStateParams) -> Result<QfiMatrix> {
    let layout = param_layout(bs, params)?;
    for &a in &layout.retained {
        if params.q[a] <= consts::WEIGHT_THRESHOLD {
            return Err(Error::DegenerateWeight(a, params.q[a]));
        }
    }
    let rho = build_state(bs, params)?;
    let eig = eig_hermitian(&rho.as_hermitian())?;
    let derivs = rho_derivatives(bs, params, &layout)?;
    let slds: Vec<HermitianOperator> = derivs
        .iter()
        .map(|d| sld_in_eigenbasis(&eig, d, consts::PINV_TOL))
        .collect::<Result<_>>()?;
    let p = layout.total;
    let mut h = DMatrix::<f64>::zeros(p, p);
    for k in 0..p {
        for l in k..p {
            let jp = jordan_product(&slds[k], &slds[l])?;
            let v = expectation(&rho, &jp)?;
            h[(k, l)] = v;
            h[(l, k)] = v;
        }
    }
    Ok(QfiMatrix { matrix: h, layout })
}

/// The Cramer-Rao quadratic form grad H^+ grad^T.
pub fn qcrb_value(grad: &[f64], h: &QfiMatrix) -> Result<f64> {
    if grad.len() != h.matrix.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "gradient length {} vs QFI dimension {}",
            grad.len(),
            h.matrix.nrows()
        )));
    }
    if grad.is_empty() {
        return Ok(0.0);
    }
    let hinv = sym_pinv(&h.matrix, consts::PINV_TOL);
    let g = nalgebra::DVector::from_column_slice(grad);
    let v = (g.transpose() * hinv * g)[(0, 0)];
    Ok(v.max(0.0))
}

/// An estimation problem: observable, symmetry group, target precision.
#[derive(Debug, Clone)]
pub struct EstimationTask {
    pub x: HermitianOperator,
    pub rep: GroupRep,
    pub epsilon: f64,
}

impl EstimationTask {
    pub fn new(x: HermitianOperator, rep: GroupRep, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidPrecision(epsilon));
        }
        if x.dim() != rep.dim() {
            return Err(Error::DimMismatch(x.dim(), rep.dim()));
        }
        Ok(Self { x, rep, epsilon })
    }
}

/// Outcome of the identity check grad H^-1 grad^T = (Delta Y)^2.
#[derive(Debug, Clone, Copy)]
pub struct Eq3Report {
    /// max over trials and both QFI routes of |LHS - (Delta Y)^2|.
    pub max_residual: f64,
    /// max over trials of ||H_closed - H_numeric||_max.
    pub max_qfi_disagreement: f64,
}

/// Check the identity on random symmetric states, computing the QFI both
/// in closed form and through the numeric SLD oracle.
pub fn verify_eq3(task: &EstimationTask, seed: u64, trials: usize) -> Result<Eq3Report> {
    let bs = decompose_commutant_seeded(&task.rep, consts::CLUSTER_TOL, rng::mix_seed(seed, 0))?;
    let y = twirl_dense(&task.x, &task.rep)?;
    let bo = block_observable(&y, &bs)?;
    let mut report = Eq3Report { max_residual: 0.0, max_qfi_disagreement: 0.0 };
    for t in 0..trials {
        let params = random_symmetric_state(&bs, rng::mix_seed(seed, 1 + t as u64));
        let rho = build_state(&bs, &params)?;
        let layout = param_layout(&bs, &params)?;
        let grad = grad_beta(&bo, &params, &layout)?;
        let h_closed = qfi_closed_form(&bs, &params)?;
        let h_numeric = qfi_numeric(&bs, &params)?;
        let lhs_closed = qcrb_value(&grad, &h_closed)?;
        let lhs_numeric = qcrb_value(&grad, &h_numeric)?;
        let rhs = variance(&rho, &y)?;
        report.max_residual = report
            .max_residual
            .max((lhs_closed - rhs).abs())
            .max((lhs_numeric - rhs).abs());
        let mut hdiff = 0.0f64;
        for i in 0..layout.total {
            for j in 0..layout.total {
                hdiff = hdiff
                    .max((h_closed.matrix[(i, j)] - h_numeric.matrix[(i, j)]).abs());
            }
        }
        report.max_qfi_disagreement = report.max_qfi_disagreement.max(hdiff);
    }
    Ok(report)
}

/// Minimal sample count max(1, ceil(varY / epsilon)).
///
/// The literal ceiling formula gives 0 for a zero-variance observable; at
/// least one measurement is still needed to read the value, hence the
/// floor of 1.
pub fn min_samples(var_y: f64, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidPrecision(epsilon));
    }
    if var_y <= 0.0 {
        return Ok(1);
    }
    Ok(((var_y / epsilon).ceil() as u64).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commutant::decompose_commutant;
    use crate::groups::{sigma_z, z2_qubit_rep};
    use crate::linalg::cr;

    fn z2_setup(p: f64) -> (BlockStructure, SymmetricStateParams) {
        let bs = decompose_commutant(&z2_qubit_rep(), consts::CLUSTER_TOL).unwrap();
        // Map the weight p onto whichever block carries |0><0|.
        let rho = DensityMatrix::new(
            ComplexMatrix::from_rows(2, &[cr(p), cr(0.0), cr(0.0), cr(1.0 - p)]).unwrap(),
        )
        .unwrap();
        let params = crate::commutant::extract_params(&rho, &bs).unwrap();
        (bs, params)
    }

    #[test]
    fn z2_block_observable() {
        let bs = decompose_commutant(&z2_qubit_rep(), consts::CLUSTER_TOL).unwrap();
        let a = 0.4;
        let bz = 0.9;
        let y = HermitianOperator::from_rows(
            2,
            &[cr(a + bz), cr(0.0), cr(0.0), cr(a - bz)],
        )
        .unwrap();
        let bo = block_observable(&y, &bs).unwrap();
        let mut ls: Vec<f64> = bo.a.clone();
        ls.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((ls[0] - (a - bz)).abs() < 1e-9);
        assert!((ls[1] - (a + bz)).abs() < 1e-9);
    }

    #[test]
    fn block_observable_rejects_noncommutant() {
        let bs = decompose_commutant(&z2_qubit_rep(), consts::CLUSTER_TOL).unwrap();
        let x = crate::groups::sigma_x();
        assert!(matches!(
            block_observable(&x, &bs),
            Err(Error::NotSymmetricObservable(_))
        ));
    }

    #[test]
    fn block_observable_roundtrip_random() {
        let rep = crate::groups::permutation_rep(3).unwrap();
        let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
        let mut rng = rng::rng_from_seed(31);
        for _ in 0..10 {
            let y = twirl_dense(&rng::random_hermitian(8, &mut rng), &rep).unwrap();
            let bo = block_observable(&y, &bs).unwrap();
            let back = block_observable_dense(&bo, &bs).unwrap();
            assert!(back.matrix().max_dist(y.matrix()) < 1e-9);
        }
    }

    #[test]
    fn z2_grad_and_qfi() {
        let p = 0.25;
        let (bs, params) = z2_setup(p);
        let y = twirl_dense(&sigma_z(), &z2_qubit_rep()).unwrap();
        let bo = block_observable(&y, &bs).unwrap();
        let layout = param_layout(&bs, &params).unwrap();
        let grad = grad_beta(&bo, &params, &layout).unwrap();
        assert_eq!(grad.len(), 1);
        assert!((grad[0].abs() - 2.0).abs() < 1e-9, "l1 - l2 = +-2 b_z with b_z = 1");

        let h = qfi_closed_form(&bs, &params).unwrap();
        assert_eq!(h.dim_params(), 1);
        assert!((h.matrix[(0, 0)] - (1.0 / 0.25 + 1.0 / 0.75)).abs() < 1e-9);

        let hn = qfi_numeric(&bs, &params).unwrap();
        assert!((hn.matrix[(0, 0)] - h.matrix[(0, 0)]).abs() < 1e-8);

        // QCRB = 4 p (1 - p) = (Delta Y)^2.
        let v = qcrb_value(&grad, &h).unwrap();
        assert!((v - 4.0 * p * (1.0 - p)).abs() < 1e-9);
        assert!((v - 0.75).abs() < 1e-9);
    }

    #[test]
    fn grad_beta_zero_for_identity() {
        let (bs, params) = z2_setup(0.3);
        let bo = block_observable(&HermitianOperator::identity(2), &bs).unwrap();
        let layout = param_layout(&bs, &params).unwrap();
        let grad = grad_beta(&bo, &params, &layout).unwrap();
        assert!(grad.iter().all(|&g| g.abs() < 1e-12));
    }

    #[test]
    fn grad_beta_finite_difference() {
        let rep = crate::groups::permutation_rep(3).unwrap();
        let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
        let mut rng = rng::rng_from_seed(77);
        for t in 0..5u64 {
            let params = random_symmetric_state(&bs, 1000 + t);
            let y = twirl_dense(&rng::random_hermitian(8, &mut rng), &rep).unwrap();
            let bo = block_observable(&y, &bs).unwrap();
            let layout = param_layout(&bs, &params).unwrap();
            let grad = grad_beta(&bo, &params, &layout).unwrap();
            let h = 1e-5;
            for idx in 0..layout.total {
                let perturbed = |sign: f64| {
                    let mut p = params.clone();
                    if idx < layout.q_params {
                        let a = layout.retained[idx];
                        let last = *layout.retained.last().unwrap();
                        p.q[a] += sign * h;
                        p.q[last] -= sign * h;
                    } else {
                        for (slot, &a) in layout.retained.iter().enumerate() {
                            let (off, len) = layout.r_sectors[slot];
                            if idx >= off && idx < off + len {
                                p.r[a][idx - off] += sign * h;
                            }
                        }
                    }
                    beta_value(&bo, &p, &layout)
                };
                let fd = (perturbed(1.0) - perturbed(-1.0)) / (2.0 * h);
                assert!(
                    (grad[idx] - fd).abs() < 1e-6,
                    "param {idx}: analytic {} vs fd {fd}",
                    grad[idx]
                );
            }
        }
    }

    #[test]
    fn sym_pinv_ill_conditioned_weight_matrix() {
        // diag(1/q) + (1/q_s) has the exact inverse diag(q) - q q^T on the
        // first s-1 weights. This instance silently defeats the fast
        // eigensolver path and must be caught by the Jacobi fallback.
        let q = [
            0.510647236707716,
            0.013271565338544818,
            0.06944224074152147,
            0.015565296972455367,
            0.17993515009722974,
            0.0007896299052113157,
            0.0211499818227039,
            0.18919889841461746,
        ];
        let s = q.len();
        let p = s - 1;
        let mut h = DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                h[(i, j)] = 1.0 / q[s - 1] + if i == j { 1.0 / q[i] } else { 0.0 };
            }
        }
        let pinv = sym_pinv(&h, consts::PINV_TOL);
        for i in 0..p {
            for j in 0..p {
                let want = if i == j { q[i] - q[i] * q[i] } else { -q[i] * q[j] };
                assert!(
                    (pinv[(i, j)] - want).abs() < 1e-10,
                    "entry ({i},{j}): {} vs {want}",
                    pinv[(i, j)]
                );
            }
        }
    }

    #[test]
    fn sld_examples() {
        // rho = I/2, drho = sigma_z/2 -> L = sigma_z.
        let rho = DensityMatrix::maximally_mixed(2);
        let dz = HermitianOperator::new(sigma_z().matrix().scale(cr(0.5))).unwrap();
        let l = sld_numeric(&rho, &dz, consts::PINV_TOL).unwrap();
        assert!(l.matrix().max_dist(sigma_z().matrix()) < 1e-10);

        // rho = |0><0|, drho = sigma_x/2 -> L = sigma_x.
        let ket0 = DensityMatrix::from_state_vector(&[cr(1.0), cr(0.0)]).unwrap();
        let dx = HermitianOperator::new(crate::groups::sigma_x().matrix().scale(cr(0.5))).unwrap();
        let l = sld_numeric(&ket0, &dx, consts::PINV_TOL).unwrap();
        assert!(l.matrix().max_dist(crate::groups::sigma_x().matrix()) < 1e-10);

        // drho = 0 -> L = 0.
        let l = sld_numeric(&rho, &HermitianOperator::zeros(2), consts::PINV_TOL).unwrap();
        assert!(l.matrix().max_norm() < 1e-12);
    }

    #[test]
    fn sld_residual_on_support() {
        let rep = crate::groups::permutation_rep(3).unwrap();
        let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
        let params = random_symmetric_state(&bs, 5);
        let rho = build_state(&bs, &params).unwrap();
        let layout = param_layout(&bs, &params).unwrap();
        for d in rho_derivatives(&bs, &params, &layout).unwrap() {
            let l = sld_numeric(&rho, &d, consts::PINV_TOL).unwrap();
            let lr = jordan_product(&l, &rho.as_hermitian()).unwrap();
            assert!(lr.matrix().max_dist(d.matrix()) < 1e-8);
        }
    }

    #[test]
    fn single_full_block_qfi_identity() {
        // One (2,1) block with r = 0: H(r) = I_3.
        let rep = crate::groups::GroupRep::from_elements(vec![ComplexMatrix::identity(2)])
            .unwrap();
        let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
        let params = SymmetricStateParams { q: vec![1.0], r: vec![vec![0.0, 0.0, 0.0]] };
        let h = qfi_closed_form(&bs, &params).unwrap();
        assert_eq!(h.dim_params(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((h.matrix[(i, j)] - want).abs() < 1e-9);
            }
        }
        let hn = qfi_numeric(&bs, &params).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((hn.matrix[(i, j)] - h.matrix[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn verify_eq3_z2() {
        let task =
            EstimationTask::new(rng::random_hermitian(2, &mut rng::rng_from_seed(2)), z2_qubit_rep(), 0.01)
                .unwrap();
        let report = verify_eq3(&task, 17, 20).unwrap();
        assert!(report.max_residual < 1e-8, "residual {:.3e}", report.max_residual);
        assert!(report.max_qfi_disagreement < 1e-6);
    }

    #[test]
    fn min_samples_contract() {
        assert_eq!(min_samples(0.5, 0.01).unwrap(), 50);
        assert_eq!(min_samples(0.0, 0.3).unwrap(), 1);
        assert_eq!(min_samples(1.0, 1.0).unwrap(), 1);
        assert!(matches!(min_samples(0.5, 0.0), Err(Error::InvalidPrecision(_))));
        assert!(matches!(min_samples(0.5, -1.0), Err(Error::InvalidPrecision(_))));
    }
}
