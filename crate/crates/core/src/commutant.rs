//! Decomposition of the commutant algebra {A : [A, U_g] = 0} into blocks
//! L(C^{n_a}) (x) I_{d_a}, the Bloch parameterization of symmetric states
//! over those blocks, and generalized Gell-Mann generators of su(n) with
//! their structure constants.
//!
//! The decomposition is the standard randomized method: twirl a random
//! Hermitian probe to land in the commutant, cluster its spectrum, link
//! clusters through a second independent probe, and align multiplicity
//! frames so every commutant element takes the A (x) I pattern.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::consts;
use crate::error::{Error, Result};
use crate::groups::GroupRep;
use crate::linalg::{eig_hermitian, ComplexMatrix, DensityMatrix, HermitianOperator, C64};
use crate::rng::{self, CoreRng};
use crate::twirl::twirl_dense;

/// Generalized Gell-Mann generators of su(n) with structure constants.
///
/// Ordering: symmetric pair matrices (j < k, lexicographic), then
/// antisymmetric pairs, then the diagonal ladder. For n = 2 this is
/// (sigma_x, sigma_y, sigma_z).
#[derive(Debug, Clone)]
pub struct SuGenerators {
    n: usize,
    lambdas: Vec<ComplexMatrix>,
    /// Antisymmetric structure tensor, flattened (i*m + j)*m + k.
    f: Vec<f64>,
    /// Symmetric structure tensor, same layout.
    g: Vec<f64>,
}

impl SuGenerators {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generators, n^2 - 1.
    pub fn count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda(&self, i: usize) -> &ComplexMatrix {
        &self.lambdas[i]
    }

    pub fn lambdas(&self) -> &[ComplexMatrix] {
        &self.lambdas
    }

    pub fn f(&self, i: usize, j: usize, k: usize) -> f64 {
        let m = self.count();
        self.f[(i * m + j) * m + k]
    }

    pub fn g(&self, i: usize, j: usize, k: usize) -> f64 {
        let m = self.count();
        self.g[(i * m + j) * m + k]
    }

    /// sum_i r_i lambda_i.
    pub fn linear_combination(&self, r: &[f64]) -> Result<ComplexMatrix> {
        if r.len() != self.count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                self.count(),
                r.len()
            )));
        }
        let mut acc = DMatrix::<C64>::zeros(self.n, self.n);
        for (i, &ri) in r.iter().enumerate() {
            acc += self.lambdas[i].as_dmatrix() * C64::new(ri, 0.0);
        }
        ComplexMatrix::from_dmatrix(acc)
    }

    /// R_jk = sum_i r_i g_ijk as a dense symmetric matrix.
    pub fn r_matrix(&self, r: &[f64]) -> DMatrix<f64> {
        let m = self.count();
        DMatrix::from_fn(m, m, |j, k| {
            (0..m).map(|i| r[i] * self.g(i, j, k)).sum()
        })
    }
}

/// Generalized Gell-Mann set for su(n), 2 <= n <= 16.
pub fn su_generators(n: usize) -> Result<SuGenerators> {
    if !(2..=16).contains(&n) {
        return Err(Error::UnsupportedSize(format!("su(n) needs 2 <= n <= 16, got {n}")));
    }
    let mut lambdas = Vec::with_capacity(n * n - 1);
    let zero = C64::new(0.0, 0.0);
    // Symmetric pairs E_jk + E_kj.
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = DMatrix::from_element(n, n, zero);
            m[(j, k)] = C64::new(1.0, 0.0);
            m[(k, j)] = C64::new(1.0, 0.0);
            lambdas.push(ComplexMatrix::from_dmatrix(m)?);
        }
    }
    // Antisymmetric pairs -i E_jk + i E_kj.
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = DMatrix::from_element(n, n, zero);
            m[(j, k)] = C64::new(0.0, -1.0);
            m[(k, j)] = C64::new(0.0, 1.0);
            lambdas.push(ComplexMatrix::from_dmatrix(m)?);
        }
    }
    // Diagonal ladder sqrt(2/(l(l+1))) (E_00 + ... + E_{l-1,l-1} - l E_ll).
    for l in 1..n {
        let norm = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut m = DMatrix::from_element(n, n, zero);
        for d in 0..l {
            m[(d, d)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        lambdas.push(ComplexMatrix::from_dmatrix(m)?);
    }

    let count = lambdas.len();
    let mut f = vec![0.0; count * count * count];
    let mut g = vec![0.0; count * count * count];
    for i in 0..count {
        for j in 0..count {
            let li_lj = lambdas[i].mul(&lambdas[j])?;
            let lj_li = lambdas[j].mul(&lambdas[i])?;
            for k in 0..count {
                // f = tr([li, lj] lk) / 4i, g = tr({li, lj} lk) / 4.
                let mut comm_tr = C64::new(0.0, 0.0);
                let mut anti_tr = C64::new(0.0, 0.0);
                for a in 0..n {
                    for b in 0..n {
                        let lk = lambdas[k].get(b, a);
                        comm_tr += (li_lj.get(a, b) - lj_li.get(a, b)) * lk;
                        anti_tr += (li_lj.get(a, b) + lj_li.get(a, b)) * lk;
                    }
                }
                // tr([li,lj]lk) is purely imaginary, so tr/(4i) = im/4.
                debug_assert!(comm_tr.re.abs() < 1e-9);
                f[(i * count + j) * count + k] = comm_tr.im / 4.0;
                g[(i * count + j) * count + k] = anti_tr.re / 4.0;
            }
        }
    }
    Ok(SuGenerators { n, lambdas, f, g })
}

/// One irreducible sector of the commutant: multiplicity n_alpha, irrep
/// dimension d_alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub multiplicity: usize,
    pub irrep_dim: usize,
}

impl Block {
    pub fn size(&self) -> usize {
        self.multiplicity * self.irrep_dim
    }
}

/// The commutant decomposition: blocks (n_a, d_a) and a unitary basis in
/// which every commutant element is block diagonal with the A (x) I_{d_a}
/// pattern. Basis columns are ordered block by block, multiplicity index
/// major within each block.
#[derive(Debug, Clone)]
pub struct BlockStructure {
    dim: usize,
    blocks: Vec<Block>,
    basis: ComplexMatrix,
}

impl BlockStructure {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Column offset of block alpha in the basis ordering.
    pub fn offset(&self, alpha: usize) -> usize {
        self.blocks[..alpha].iter().map(|b| b.size()).sum()
    }

    /// Conjugate into the block basis: basis^dag M basis.
    pub fn to_block_basis(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        m.conjugate_by(&self.basis.adjoint())
    }

    /// Conjugate out of the block basis: basis M basis^dag.
    pub fn from_block_basis(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        m.conjugate_by(&self.basis)
    }

    /// Extract the multiplicity-space matrix A of block alpha from a
    /// matrix already in the block basis, averaging over the irrep index.
    pub fn multiplicity_block(&self, in_basis: &ComplexMatrix, alpha: usize) -> DMatrix<C64> {
        let b = self.blocks[alpha];
        let off = self.offset(alpha);
        let mut a = DMatrix::<C64>::zeros(b.multiplicity, b.multiplicity);
        for m in 0..b.multiplicity {
            for mp in 0..b.multiplicity {
                let mut acc = C64::new(0.0, 0.0);
                for d in 0..b.irrep_dim {
                    acc += in_basis.get(off + m * b.irrep_dim + d, off + mp * b.irrep_dim + d);
                }
                a[(m, mp)] = acc / C64::new(b.irrep_dim as f64, 0.0);
            }
        }
        a
    }

    /// How far a matrix (in the original basis) is from the commutant
    /// pattern (+) A_a (x) I_{d_a}: the max-norm deviation between the
    /// conjugated matrix and its pattern projection.
    pub fn pattern_defect(&self, m: &ComplexMatrix) -> Result<f64> {
        let tilde = self.to_block_basis(m)?;
        let projected = self.project_pattern(&tilde);
        Ok(tilde.max_dist(&projected))
    }

    /// Project a matrix in the block basis onto the exact pattern.
    fn project_pattern(&self, tilde: &ComplexMatrix) -> ComplexMatrix {
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        for (alpha, b) in self.blocks.iter().enumerate() {
            let off = self.offset(alpha);
            let a = self.multiplicity_block(tilde, alpha);
            for m in 0..b.multiplicity {
                for mp in 0..b.multiplicity {
                    for d in 0..b.irrep_dim {
                        out[(off + m * b.irrep_dim + d, off + mp * b.irrep_dim + d)] = a[(m, mp)];
                    }
                }
            }
        }
        ComplexMatrix::from_dmatrix(out).expect("finite")
    }

    /// Assemble (+) q_a (A_a (x) I_{d_a}/d_a) in the original basis from
    /// per-block multiplicity matrices.
    pub fn assemble(&self, blocks: &[DMatrix<C64>]) -> Result<ComplexMatrix> {
        if blocks.len() != self.blocks.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} block matrices, got {}",
                self.blocks.len(),
                blocks.len()
            )));
        }
        let mut tilde = DMatrix::<C64>::zeros(self.dim, self.dim);
        for (alpha, b) in self.blocks.iter().enumerate() {
            let a = &blocks[alpha];
            if a.nrows() != b.multiplicity {
                return Err(Error::ShapeMismatch(format!(
                    "block {alpha} expects multiplicity {}, got {}",
                    b.multiplicity,
                    a.nrows()
                )));
            }
            let off = self.offset(alpha);
            for m in 0..b.multiplicity {
                for mp in 0..b.multiplicity {
                    for d in 0..b.irrep_dim {
                        tilde[(off + m * b.irrep_dim + d, off + mp * b.irrep_dim + d)] =
                            a[(m, mp)];
                    }
                }
            }
        }
        self.from_block_basis(&ComplexMatrix::from_dmatrix(tilde)?)
    }
}

/// State parameters theta = (q, r_1 ... r_s): block weights plus one Bloch
/// vector per block (empty when n_alpha = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricStateParams {
    pub q: Vec<f64>,
    pub r: Vec<Vec<f64>>,
}

impl SymmetricStateParams {
    pub fn validate_shape(&self, bs: &BlockStructure) -> Result<()> {
        if self.q.len() != bs.num_blocks() || self.r.len() != bs.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} blocks, got q: {}, r: {}",
                bs.num_blocks(),
                self.q.len(),
                self.r.len()
            )));
        }
        for (alpha, b) in bs.blocks().iter().enumerate() {
            let want = b.multiplicity * b.multiplicity - 1;
            if self.r[alpha].len() != want {
                return Err(Error::ShapeMismatch(format!(
                    "block {alpha} expects {} Bloch components, got {}",
                    want,
                    self.r[alpha].len()
                )));
            }
        }
        let total: f64 = self.q.iter().sum();
        if self.q.iter().any(|&q| q < -1e-12) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::ShapeMismatch(format!(
                "q must be a probability vector (sum {total})"
            )));
        }
        Ok(())
    }
}

struct Cluster {
    /// Column indices into the probe eigendecomposition.
    columns: Vec<usize>,
    mean_eigenvalue: f64,
}

/// Decompose the commutant of `rep` using the default internal seed.
pub fn decompose_commutant(rep: &GroupRep, tol: f64) -> Result<BlockStructure> {
    decompose_commutant_seeded(rep, tol, 0x5EED_0001)
}

/// Seeded variant; deterministic given (rep, tol, seed).
pub fn decompose_commutant_seeded(rep: &GroupRep, tol: f64, seed: u64) -> Result<BlockStructure> {
    let dim = rep.dim();
    if dim > consts::MAX_DECOMPOSE_DIM {
        return Err(Error::UnsupportedSize(format!(
            "decomposition needs dim <= {}, got {dim}",
            consts::MAX_DECOMPOSE_DIM
        )));
    }
    let mut last_err = String::new();
    for attempt in 0..consts::DECOMPOSITION_RETRIES {
        let mut rng = rng::rng_from_seed(rng::mix_seed(seed, attempt as u64));
        match try_decompose(rep, tol, &mut rng) {
            Ok(bs) => return Ok(bs),
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(Error::DecompositionFailed(format!(
        "no separation after {} retries: {last_err}",
        consts::DECOMPOSITION_RETRIES
    )))
}

fn try_decompose(rep: &GroupRep, tol: f64, rng: &mut CoreRng) -> Result<BlockStructure> {
    let dim = rep.dim();
    let probe1 = twirl_dense(&rng::random_hermitian(dim, rng), rep)?;
    let probe2 = twirl_dense(&rng::random_hermitian(dim, rng), rep)?;
    let probe3 = twirl_dense(&rng::random_hermitian(dim, rng), rep)?;

    let eig = eig_hermitian(&probe1)?;
    let spread = eig.eigenvalues[dim - 1] - eig.eigenvalues[0];
    let gap_tol = tol * spread.max(f64::MIN_POSITIVE);

    // Cluster the sorted spectrum of the first probe.
    let mut clusters: Vec<Cluster> = Vec::new();
    for i in 0..dim {
        let start_new = match clusters.last() {
            None => true,
            Some(c) => {
                let prev = *c.columns.last().unwrap();
                eig.eigenvalues[i] - eig.eigenvalues[prev] > gap_tol
            }
        };
        if start_new {
            clusters.push(Cluster { columns: vec![i], mean_eigenvalue: eig.eigenvalues[i] });
        } else {
            let c = clusters.last_mut().unwrap();
            c.columns.push(i);
            let k = c.columns.len() as f64;
            c.mean_eigenvalue += (eig.eigenvalues[i] - c.mean_eigenvalue) / k;
        }
    }

    // Second probe in the eigenbasis of the first.
    let v = &eig.eigenvectors;
    let c2 = probe2.matrix().conjugate_by(&v.adjoint())?;
    let link_tol = 1e-6 * probe2.matrix().max_norm().max(1e-12);

    // Union-find over clusters, linking those coupled by the second probe.
    let nc = clusters.len();
    let mut parent: Vec<usize> = (0..nc).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..nc {
        for b in (a + 1)..nc {
            let mut coupled = false;
            'outer: for &i in &clusters[a].columns {
                for &j in &clusters[b].columns {
                    if c2.get(i, j).norm() > link_tol {
                        coupled = true;
                        break 'outer;
                    }
                }
            }
            if coupled {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                parent[ra] = rb;
            }
        }
    }

    // Collect components, keeping clusters in ascending-eigenvalue order.
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; nc];
    for c in 0..nc {
        let r = find(&mut parent, c);
        match root_of[r] {
            Some(idx) => components[idx].push(c),
            None => {
                root_of[r] = Some(components.len());
                components.push(vec![c]);
            }
        }
    }

    // Each component is one block; cluster sizes give the irrep dimension.
    struct RawBlock {
        multiplicity: usize,
        irrep_dim: usize,
        mean_eigenvalue: f64,
        /// Aligned basis columns, multiplicity major.
        columns: DMatrix<C64>,
    }
    let mut raw = Vec::with_capacity(components.len());
    for comp in &components {
        let d = clusters[comp[0]].columns.len();
        if comp.iter().any(|&c| clusters[c].columns.len() != d) {
            return Err(Error::DecompositionFailed(
                "cluster sizes differ within a linked component".into(),
            ));
        }
        let n_mult = comp.len();
        let mut cols = DMatrix::<C64>::zeros(dim, n_mult * d);
        // Reference frame: first cluster, as produced by the eigensolver.
        let ref_cols = &clusters[comp[0]].columns;
        for (m, &cidx) in comp.iter().enumerate() {
            let these = &clusters[cidx].columns;
            let q = if m == 0 {
                DMatrix::<C64>::identity(d, d)
            } else {
                // M = V_m^dag C2 V_ref is a scalar times a unitary frame
                // change; its unitary polar factor aligns the frames.
                let mut mm = DMatrix::<C64>::zeros(d, d);
                for (r, &i) in these.iter().enumerate() {
                    for (c, &j) in ref_cols.iter().enumerate() {
                        mm[(r, c)] = c2.get(i, j);
                    }
                }
                let svd = mm.svd(true, true);
                let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
                let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
                if smin <= link_tol || (smax - smin) > 1e-5 * smax.max(1e-12) {
                    return Err(Error::DecompositionFailed(format!(
                        "coupling block is not scalar-unitary (sv range {smin:.3e}..{smax:.3e})"
                    )));
                }
                svd.u.unwrap() * svd.v_t.unwrap()
            };
            // Aligned frame W_m = V_m Q_m.
            for dd in 0..d {
                for row in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for (r, &i) in these.iter().enumerate() {
                        acc += v.get(row, i) * q[(r, dd)];
                    }
                    cols[(row, m * d + dd)] = acc;
                }
            }
        }
        let mean = comp.iter().map(|&c| clusters[c].mean_eigenvalue).sum::<f64>()
            / comp.len() as f64;
        raw.push(RawBlock {
            multiplicity: n_mult,
            irrep_dim: d,
            mean_eigenvalue: mean,
            columns: cols,
        });
    }

    // Canonical ordering: descending n*d, ties by descending n, then by
    // ascending mean probe eigenvalue.
    raw.sort_by(|a, b| {
        (b.multiplicity * b.irrep_dim)
            .cmp(&(a.multiplicity * a.irrep_dim))
            .then(b.multiplicity.cmp(&a.multiplicity))
            .then(a.mean_eigenvalue.partial_cmp(&b.mean_eigenvalue).unwrap())
    });

    let mut basis = DMatrix::<C64>::zeros(dim, dim);
    let mut col = 0usize;
    let mut blocks = Vec::with_capacity(raw.len());
    for rb in &raw {
        for c in 0..rb.columns.ncols() {
            for r in 0..dim {
                basis[(r, col)] = rb.columns[(r, c)];
            }
            col += 1;
        }
        blocks.push(Block { multiplicity: rb.multiplicity, irrep_dim: rb.irrep_dim });
    }
    debug_assert_eq!(col, dim);

    let basis = ComplexMatrix::from_dmatrix(basis)?;
    let udef = basis.unitarity_defect();
    if udef > consts::UNITARY_TOL {
        return Err(Error::DecompositionFailed(format!("basis unitarity defect {udef:.3e}")));
    }
    let bs = BlockStructure { dim, blocks, basis };

    // Validate with an independent probe: the pattern must hold, and every
    // group element must be I_{n_a} (x) V in the block basis.
    let defect = bs.pattern_defect(probe3.matrix())?;
    if defect > 1e-7 * probe3.matrix().max_norm().max(1.0) {
        return Err(Error::DecompositionFailed(format!(
            "validation probe pattern defect {defect:.3e}"
        )));
    }
    let gdef = group_pattern_defect(&bs, rep)?;
    if gdef > 1e-7 {
        return Err(Error::DecompositionFailed(format!(
            "group element pattern defect {gdef:.3e}"
        )));
    }
    Ok(bs)
}

/// Deviation of all conjugated group elements from the I_{n_a} (x) V
/// block pattern.
pub fn group_pattern_defect(bs: &BlockStructure, rep: &GroupRep) -> Result<f64> {
    let mut worst = 0.0f64;
    for u in rep.elements() {
        let tilde = bs.to_block_basis(&u)?;
        // Project onto the I (x) V pattern and compare.
        let mut projected = DMatrix::<C64>::zeros(bs.dim(), bs.dim());
        for (alpha, b) in bs.blocks().iter().enumerate() {
            let off = bs.offset(alpha);
            // Average V over multiplicity copies.
            let mut vblk = DMatrix::<C64>::zeros(b.irrep_dim, b.irrep_dim);
            for d in 0..b.irrep_dim {
                for dp in 0..b.irrep_dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for m in 0..b.multiplicity {
                        acc += tilde.get(off + m * b.irrep_dim + d, off + m * b.irrep_dim + dp);
                    }
                    vblk[(d, dp)] = acc / C64::new(b.multiplicity as f64, 0.0);
                }
            }
            for m in 0..b.multiplicity {
                for d in 0..b.irrep_dim {
                    for dp in 0..b.irrep_dim {
                        projected[(off + m * b.irrep_dim + d, off + m * b.irrep_dim + dp)] =
                            vblk[(d, dp)];
                    }
                }
            }
        }
        worst = worst.max(tilde.max_dist(&ComplexMatrix::from_dmatrix(projected)?));
    }
    Ok(worst)
}

/// rho = basis [ (+) q_a (I/n_a + r_a . lambda_a / 2) (x) I_{d_a}/d_a ] basis^dag.
pub fn build_state(bs: &BlockStructure, params: &SymmetricStateParams) -> Result<DensityMatrix> {
    params.validate_shape(bs)?;
    let mut block_mats = Vec::with_capacity(bs.num_blocks());
    for (alpha, b) in bs.blocks().iter().enumerate() {
        let n = b.multiplicity;
        let mut rho_a = DMatrix::<C64>::identity(n, n) * C64::new(1.0 / n as f64, 0.0);
        if n > 1 {
            let gens = su_generators(n)?;
            let combo = gens.linear_combination(&params.r[alpha])?;
            rho_a += combo.as_dmatrix() * C64::new(0.5, 0.0);
        }
        // PSD check of the block before scaling by q.
        let herm = HermitianOperator::new_symmetrized(ComplexMatrix::from_dmatrix(rho_a.clone())?)?;
        let eig = eig_hermitian(&herm)?;
        if eig.eigenvalues.first().copied().unwrap_or(0.0) < -1e-9 {
            return Err(Error::InvalidBloch(format!(
                "block {alpha} minimum eigenvalue {:.3e}",
                eig.eigenvalues[0]
            )));
        }
        let scale = params.q[alpha].max(0.0) / b.irrep_dim as f64;
        block_mats.push(rho_a * C64::new(scale, 0.0));
    }
    let full = bs.assemble(&block_mats)?;
    // Kill the rounding left by the basis conjugation before validating.
    let herm = HermitianOperator::new_symmetrized(full)?;
    DensityMatrix::new(herm.matrix().clone())
}

/// Inverse of `build_state`: q from block traces, Bloch components from
/// tr(rho_a lambda_i).
pub fn extract_params(rho: &DensityMatrix, bs: &BlockStructure) -> Result<SymmetricStateParams> {
    if rho.dim() != bs.dim() {
        return Err(Error::DimMismatch(rho.dim(), bs.dim()));
    }
    let defect = bs.pattern_defect(rho.matrix())?;
    if defect > 1e-7 {
        return Err(Error::NotSymmetric(defect));
    }
    let tilde = bs.to_block_basis(rho.matrix())?;
    let mut q = Vec::with_capacity(bs.num_blocks());
    let mut r = Vec::with_capacity(bs.num_blocks());
    for (alpha, b) in bs.blocks().iter().enumerate() {
        let a = bs.multiplicity_block(&tilde, alpha);
        // Block of rho is (q/d) rho_a (x) I_d, so A = (q/d) rho_a.
        let weight = a.trace().re * b.irrep_dim as f64;
        q.push(weight.max(0.0));
        let m = b.multiplicity;
        if m == 1 {
            r.push(Vec::new());
            continue;
        }
        if weight <= consts::WEIGHT_THRESHOLD {
            r.push(vec![0.0; m * m - 1]);
            continue;
        }
        let rho_a = a * C64::new(b.irrep_dim as f64 / weight, 0.0);
        let gens = su_generators(m)?;
        let mut bloch = Vec::with_capacity(m * m - 1);
        for i in 0..gens.count() {
            let mut tr = C64::new(0.0, 0.0);
            for x in 0..m {
                for y in 0..m {
                    tr += rho_a[(x, y)] * gens.lambda(i).get(y, x);
                }
            }
            bloch.push(tr.re);
        }
        r.push(bloch);
    }
    Ok(SymmetricStateParams { q, r })
}

/// Random symmetric state: flat-Dirichlet weights, per-block normalized
/// random PSD matrices converted to Bloch form. Deterministic given seed.
pub fn random_symmetric_state(bs: &BlockStructure, seed: u64) -> SymmetricStateParams {
    let mut rng = rng::rng_from_seed(seed);
    let q = rng::flat_dirichlet(bs.num_blocks(), &mut rng);
    let mut r = Vec::with_capacity(bs.num_blocks());
    for b in bs.blocks() {
        let n = b.multiplicity;
        if n == 1 {
            r.push(Vec::new());
            continue;
        }
        let g = DMatrix::from_fn(n, n, |_, _| rng::random_complex_gaussian(&mut rng));
        let psd = &g * g.adjoint();
        let tr = psd.trace().re;
        let rho_a = psd * Complex64::new(1.0 / tr, 0.0);
        let gens = su_generators(n).expect("n within range");
        let mut bloch = Vec::with_capacity(n * n - 1);
        for i in 0..gens.count() {
            let mut t = C64::new(0.0, 0.0);
            for x in 0..n {
                for y in 0..n {
                    t += rho_a[(x, y)] * gens.lambda(i).get(y, x);
                }
            }
            bloch.push(t.re);
        }
        r.push(bloch);
    }
    SymmetricStateParams { q, r }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{permutation_rep, translation_rep, z2_qubit_rep};
    use crate::linalg::cr;

    #[test]
    fn su2_is_pauli_with_levi_civita() {
        let gens = su_generators(2).unwrap();
        assert_eq!(gens.count(), 3);
        assert!(gens.lambda(0).max_dist(crate::groups::sigma_x().matrix()) < 1e-12);
        assert!(gens.lambda(1).max_dist(crate::groups::sigma_y().matrix()) < 1e-12);
        assert!(gens.lambda(2).max_dist(crate::groups::sigma_z().matrix()) < 1e-12);
        assert!((gens.f(0, 1, 2) - 1.0).abs() < 1e-12);
        assert!((gens.f(1, 0, 2) + 1.0).abs() < 1e-12);
        assert!(gens.f(0, 0, 1).abs() < 1e-12);
        // g vanishes identically for su(2).
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!(gens.g(i, j, k).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn su3_trace_orthonormal() {
        let gens = su_generators(3).unwrap();
        assert_eq!(gens.count(), 8);
        for i in 0..8 {
            assert!(gens.lambda(i).trace().norm() < 1e-12);
            for j in 0..8 {
                let p = gens.lambda(i).mul(gens.lambda(j)).unwrap();
                let target = if i == j { 2.0 } else { 0.0 };
                assert!((p.trace().re - target).abs() < 1e-10);
                assert!(p.trace().im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn su3_g118() {
        let gens = su_generators(3).unwrap();
        // Index 0 is the (0,1) symmetric pair, index 7 the second diagonal.
        assert!((gens.g(0, 0, 7) - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn su_structure_reproduces_products() {
        for n in [2usize, 3, 4] {
            let gens = su_generators(n).unwrap();
            let m = gens.count();
            for i in 0..m {
                for j in 0..m {
                    let prod = gens.lambda(i).mul(gens.lambda(j)).unwrap();
                    // lambda_i lambda_j = (2 delta_ij / n) I + sum_k (g + i f) lambda_k
                    let mut expect = DMatrix::<C64>::identity(n, n)
                        * C64::new(if i == j { 2.0 / n as f64 } else { 0.0 }, 0.0);
                    for k in 0..m {
                        expect += gens.lambda(k).as_dmatrix()
                            * C64::new(gens.g(i, j, k), gens.f(i, j, k));
                    }
                    let dist = prod
                        .max_dist(&ComplexMatrix::from_dmatrix(expect).unwrap());
                    assert!(dist < 1e-9, "n={n} i={i} j={j} dist={dist:.3e}");
                }
            }
        }
    }

    #[test]
    fn z2_decomposition() {
        let bs = decompose_commutant(&z2_qubit_rep(), consts::CLUSTER_TOL).unwrap();
        assert_eq!(bs.blocks().len(), 2);
        assert!(bs.blocks().iter().all(|b| b.multiplicity == 1 && b.irrep_dim == 1));
    }

    #[test]
    fn translation_decomposition_all_singletons() {
        for n in [2usize, 3] {
            let rep = translation_rep(n).unwrap();
            let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
            assert_eq!(bs.blocks().len(), 1 << n);
            assert!(bs.blocks().iter().all(|b| b.multiplicity == 1 && b.irrep_dim == 1));
        }
    }

    #[test]
    fn permutation3_schur_weyl_blocks() {
        let rep = permutation_rep(3).unwrap();
        let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
        let mut dims: Vec<(usize, usize)> =
            bs.blocks().iter().map(|b| (b.multiplicity, b.irrep_dim)).collect();
        dims.sort();
        assert_eq!(dims, vec![(2, 2), (4, 1)]);
        // Canonical ordering puts (4,1) first (larger n*d).
        assert_eq!(bs.blocks()[0].multiplicity, 4);
    }

    #[test]
    fn decomposition_completeness_and_group_pattern() {
        for rep in [z2_qubit_rep(), translation_rep(3).unwrap(), permutation_rep(4).unwrap()] {
            let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
            let total: usize = bs.blocks().iter().map(|b| b.size()).sum();
            assert_eq!(total, rep.dim());
            assert!(group_pattern_defect(&bs, &rep).unwrap() < 1e-7);
            // A fresh twirled random Hermitian fits the pattern.
            let mut rng = crate::rng::rng_from_seed(99);
            let probe = twirl_dense(&crate::rng::random_hermitian(rep.dim(), &mut rng), &rep)
                .unwrap();
            assert!(bs.pattern_defect(probe.matrix()).unwrap() < 1e-7);
        }
    }

    #[test]
    fn z2_build_state_is_diagonal() {
        let rep = z2_qubit_rep();
        let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
        let p = 0.3;
        let params = SymmetricStateParams { q: vec![p, 1.0 - p], r: vec![vec![], vec![]] };
        let rho = build_state(&bs, &params).unwrap();
        // Diagonal in the computational basis with entries {p, 1-p}.
        assert!(rho.matrix().get(0, 1).norm() < 1e-9);
        let d0 = rho.matrix().get(0, 0).re;
        assert!((d0 - p).abs() < 1e-9 || (d0 - (1.0 - p)).abs() < 1e-9);
        let back = extract_params(&rho, &bs).unwrap();
        let mut qs = back.q.clone();
        qs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((qs[0] - 0.3).abs() < 1e-9 && (qs[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn maximally_mixed_single_full_block() {
        // The trivial one-element rep has a single (dim, 1) block.
        let rep = crate::groups::GroupRep::from_elements(vec![ComplexMatrix::identity(2)])
            .unwrap();
        let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
        assert_eq!(bs.blocks().len(), 1);
        assert_eq!(bs.blocks()[0].multiplicity, 2);
        let params = SymmetricStateParams { q: vec![1.0], r: vec![vec![0.0, 0.0, 0.0]] };
        let rho = build_state(&bs, &params).unwrap();
        assert!(rho.matrix().max_dist(&ComplexMatrix::identity(2).scale(cr(0.5))) < 1e-9);
    }

    #[test]
    fn mixed_on_permutation2_weights() {
        let rep = permutation_rep(2).unwrap();
        let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
        let rho = DensityMatrix::maximally_mixed(4);
        let params = extract_params(&rho, &bs).unwrap();
        // Triplet (3,1) and singlet (1,1) sectors: q = (3/4, 1/4).
        let mut blocks: Vec<(usize, f64)> = bs
            .blocks()
            .iter()
            .zip(&params.q)
            .map(|(b, &q)| (b.multiplicity, q))
            .collect();
        blocks.sort_by_key(|&(m, _)| m);
        assert_eq!(blocks[0].0, 1);
        assert!((blocks[0].1 - 0.25).abs() < 1e-9);
        assert_eq!(blocks[1].0, 3);
        assert!((blocks[1].1 - 0.75).abs() < 1e-9);
        // The triplet Bloch vector of the maximally mixed state vanishes.
        for (b, r) in bs.blocks().iter().zip(&params.r) {
            if b.multiplicity == 3 {
                assert!(r.iter().all(|&x| x.abs() < 1e-9));
            }
        }
    }

    #[test]
    fn build_extract_roundtrip_random() {
        for (rep, seed0) in [
            (z2_qubit_rep(), 100u64),
            (translation_rep(2).unwrap(), 200),
            (permutation_rep(3).unwrap(), 300),
        ] {
            let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
            for t in 0..20u64 {
                let params = random_symmetric_state(&bs, seed0 + t);
                params.validate_shape(&bs).unwrap();
                let rho = build_state(&bs, &params).unwrap();
                assert!(crate::groups::verify_symmetry(&rho, &rep, 1e-8).unwrap());
                let back = extract_params(&rho, &bs).unwrap();
                for (a, b) in params.q.iter().zip(&back.q) {
                    assert!((a - b).abs() < 1e-9);
                }
                for (ra, rb) in params.r.iter().zip(&back.r) {
                    for (a, b) in ra.iter().zip(rb) {
                        assert!((a - b).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn random_state_determinism() {
        let bs = decompose_commutant(&permutation_rep(3).unwrap(), consts::CLUSTER_TOL).unwrap();
        let a = random_symmetric_state(&bs, 42);
        let b = random_symmetric_state(&bs, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_bloch_rejected() {
        let rep = crate::groups::GroupRep::from_elements(vec![ComplexMatrix::identity(2)])
            .unwrap();
        let bs = decompose_commutant(&rep, consts::CLUSTER_TOL).unwrap();
        // |r| = 4 is far outside the Bloch ball.
        let params = SymmetricStateParams { q: vec![1.0], r: vec![vec![4.0, 0.0, 0.0]] };
        assert!(matches!(build_state(&bs, &params), Err(Error::InvalidBloch(_))));
    }
}
