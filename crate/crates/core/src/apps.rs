//! The two worked applications (translation-invariant product
//! observables, permutation-twirled Pauli strings on GHZ states), the
//! typical-Pauli census, and the Cramer-Rao identity suite, each emitting
//! a serializable report whose headline inequalities are re-checked at
//! emit time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{
    ghz_state, pauli_matrix, sigma_x, sigma_z, translation_rep, z2_qubit_rep, GroupRep,
    PauliString,
};
use crate::linalg::{variance, DensityMatrix, HermitianOperator};
use crate::metrology::{verify_eq3, EstimationTask};
use crate::rng::{self, mix_seed, random_hermitian, rng_from_seed};
use crate::twirl::{binomial, sym_pauli_dense, twirl_sn_pauli, twirl_translation_product};
use rand::Rng;

/// One random (or boundary) translation-invariant state in the first
/// application: spectrum-based variances of the raw product observable X
/// and its twirl Y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct App1Trial {
    pub var_x: f64,
    pub var_y: f64,
    /// var_x - var_y.
    pub gap: f64,
    /// Residual of the identity var_x - var_y = 2^n - sum_j p_j X_jj^2.
    pub gap_residual: f64,
    /// 2^n - 1 <= var_x <= 2^n and 0 <= var_y <= 1, within tolerance.
    pub bounds_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct App1Summary {
    pub min_var_x: f64,
    pub max_var_x: f64,
    pub max_var_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct App1Report {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Two deterministic pure-Fourier boundary cases, then the random trials.
    pub records: Vec<App1Trial>,
    pub summary: App1Summary,
}

/// One (|k|, parity of |l|) class of the per-weight GHZ variance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct App2Row {
    pub n: usize,
    pub k_weight: usize,
    /// 0 = even |l|, 1 = odd |l|.
    pub l_parity: u8,
    pub var_x: f64,
    /// varY as the exact fraction var_y_num / var_y_den.
    pub var_y_num: u64,
    pub var_y_den: u64,
    pub var_y_float: f64,
    /// var_x / var_y; 0 for the zero-variance classes.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub n: usize,
    pub delta: f64,
    /// Number of Pauli strings whose |k| lies strictly inside the window.
    pub typical_count: u64,
    /// Chebyshev lower bound 4^n (1 - 1/(n delta^2)); may be negative.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct App2Report {
    pub n: usize,
    pub delta: f64,
    pub table: Vec<App2Row>,
    pub census: CensusRecord,
    pub ratio_bound_value: f64,
    /// true when the dense GHZ cross-check ran (n <= 7).
    pub dense_checked: bool,
}

/// Strict open typicality window (1-delta) n/2 < |k| < (1+delta) n/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityWindow {
    pub n: usize,
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TypicalityWindow {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidDelta(delta));
        }
        let half = n as f64 / 2.0;
        Ok(Self { n, delta, lower: (1.0 - delta) * half, upper: (1.0 + delta) * half })
    }

    /// Strict inequalities on both sides; integer endpoints are excluded.
    pub fn contains(&self, k_weight: usize) -> bool {
        let m = k_weight as f64;
        m > self.lower && m < self.upper
    }
}

/// Closed-form (varX, varY) of a Pauli string on the n-qubit GHZ state,
/// for odd n: both vanish when k is uniform (all 0 or all 1) and |l| is
/// even; otherwise varX = 1 and varY = 1/C(n, |k|).
pub fn ghz_pauli_variances(n: usize, p: &PauliString) -> Result<(f64, f64)> {
    if n % 2 == 0 {
        return Err(Error::OddOnly(n));
    }
    if p.n() != n {
        return Err(Error::DimMismatch(p.n(), n));
    }
    let kw = p.k_weight();
    if ghz_variance_vanishes(n, kw, p.l_weight() % 2 == 0) {
        return Ok((0.0, 0.0));
    }
    Ok((1.0, 1.0 / binomial(n, kw) as f64))
}

fn ghz_variance_vanishes(n: usize, k_weight: usize, l_even: bool) -> bool {
    (k_weight == 0 || k_weight == n) && l_even
}

/// Count the Pauli strings whose X-weight |k| falls strictly inside the
/// typicality window, against the Chebyshev lower bound.
pub fn pauli_census(n: usize, delta: f64) -> Result<CensusRecord> {
    if n == 0 || n > 14 {
        return Err(Error::UnsupportedSize(format!(
            "census enumerates binomial sums for 1 <= n <= 14, got {n}"
        )));
    }
    let window = TypicalityWindow::new(n, delta)?;
    let mut weights: u128 = 0;
    for m in 0..=n {
        if window.contains(m) {
            weights += binomial(n, m);
        }
    }
    let typical_count = weights
        .checked_mul(1u128 << n)
        .and_then(|v| u64::try_from(v).ok())
        .ok_or_else(|| Error::TooLarge("census count exceeds u64".into()))?;
    let bound = 4f64.powi(n as i32) * (1.0 - 1.0 / (n as f64 * delta * delta));
    if (typical_count as f64) < bound {
        return Err(Error::BoundViolation(format!(
            "typical count {typical_count} below Chebyshev bound {bound}"
        )));
    }
    Ok(CensusRecord { n, delta, typical_count, bound })
}

/// The explicit lower bound on the X/Y variance ratio for typical Pauli
/// measurements:
/// sqrt(2/(n pi (1-delta^2))) [4/((1-delta)^{1-delta}(1+delta)^{1+delta})]^{n/2}.
pub fn ratio_bound(n: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let d = delta;
    let prefactor = (2.0 / (n as f64 * std::f64::consts::PI * (1.0 - d * d))).sqrt();
    let base = 4.0 / ((1.0 - d).powf(1.0 - d) * (1.0 + d).powf(1.0 + d));
    let value = prefactor * base.powf(n as f64 / 2.0);

    // The bound must undercut every typical binomial coefficient.
    let window = TypicalityWindow::new(n, delta)?;
    for m in 0..=n {
        if window.contains(m) && (binomial(n, m) as f64) < value {
            return Err(Error::BoundViolation(format!(
                "ratio bound {value} exceeds C({n},{m}) = {}",
                binomial(n, m)
            )));
        }
    }
    Ok(value)
}

/// First application: random translation-invariant states versus the
/// product observable X = (sigma_x + sigma_z)^{(x) n}. varY comes from
/// the Fourier-diagonal form alone; varX from the dense matrix.
pub fn run_app1(n: usize, trials: usize, seed: u64) -> Result<App1Report> {
    if n < 2 || n > 10 {
        return Err(Error::UnsupportedSize(format!(
            "application 1 supports 2 <= n <= 10, got {n}"
        )));
    }
    let dim = 1usize << n;
    let factor = HermitianOperator::new(sigma_x().matrix().add(sigma_z().matrix())?)?;
    let factors = vec![factor.clone(); n];
    let fd = twirl_translation_product(n, &factors)?;

    // Dense route, computed once: X, then the Fourier-basis diagonals of X
    // and X^2 via the Fourier matrix F.
    let mut x = HermitianOperator::identity(1);
    for _ in 0..n {
        x = HermitianOperator::new(x.matrix().kron(factor.matrix()))?;
    }
    let mut f = nalgebra::DMatrix::<crate::linalg::C64>::zeros(dim, dim);
    for j in 0..dim {
        let col = crate::groups::fourier_state(n, j)?;
        for i in 0..dim {
            f[(i, j)] = col[i];
        }
    }
    let xf = x.matrix().as_dmatrix() * &f;
    let x2f = x.matrix().as_dmatrix() * &xf;
    let diag_of = |m: &nalgebra::DMatrix<crate::linalg::C64>| -> Vec<f64> {
        (0..dim)
            .map(|j| {
                let mut acc = num_complex::Complex64::new(0.0, 0.0);
                for i in 0..dim {
                    acc += f[(i, j)].conj() * m[(i, j)];
                }
                acc.re
            })
            .collect()
    };
    let dx = diag_of(&xf);
    let dx2 = diag_of(&x2f);
    for j in 0..dim {
        if (dx[j] - fd.diag()[j]).abs() > 1e-7 {
            return Err(Error::BoundViolation(format!(
                "Fourier diagonal mismatch at j = {j}: dense {} vs product {}",
                dx[j],
                fd.diag()[j]
            )));
        }
    }

    let two_n = dim as f64;
    let evaluate = |p: &[f64]| -> App1Trial {
        let mean_x: f64 = p.iter().zip(&dx).map(|(pi, di)| pi * di).sum();
        let mean_x2: f64 = p.iter().zip(&dx2).map(|(pi, di)| pi * di).sum();
        let var_x = (mean_x2 - mean_x * mean_x).max(0.0);
        let mean_y: f64 = p.iter().zip(fd.diag()).map(|(pi, di)| pi * di).sum();
        let mean_y2: f64 = p.iter().zip(fd.diag()).map(|(pi, di)| pi * di * di).sum();
        let var_y = (mean_y2 - mean_y * mean_y).max(0.0);
        let gap = var_x - var_y;
        let gap_residual = (gap - (two_n - mean_y2)).abs();
        let bounds_ok = var_x >= two_n - 1.0 - 1e-7
            && var_x <= two_n + 1e-7
            && var_y >= -1e-9
            && var_y <= 1.0 + 1e-7
            && gap_residual <= 1e-6;
        App1Trial { var_x, var_y, gap, gap_residual, bounds_ok }
    };

    let mut records = Vec::with_capacity(trials + 2);
    // Deterministic boundary cases: the pure Fourier states j = 0 and j = 1.
    for j in [0usize, 1] {
        let mut p = vec![0.0; dim];
        p[j] = 1.0;
        records.push(evaluate(&p));
    }
    for t in 0..trials {
        let mut trng = rng_from_seed(mix_seed(seed, t as u64));
        let p = rng::flat_dirichlet(dim, &mut trng);
        records.push(evaluate(&p));
    }

    // Boundary case j = 0 is an eigenstate of Y: varY = 0, varX = 2^n - 1.
    if records[0].var_y.abs() > 1e-9 || (records[0].var_x - (two_n - 1.0)).abs() > 1e-7 {
        return Err(Error::BoundViolation(format!(
            "pure Fourier boundary case violated: varX {}, varY {}",
            records[0].var_x, records[0].var_y
        )));
    }
    if let Some(bad) = records.iter().position(|r| !r.bounds_ok) {
        return Err(Error::BoundViolation(format!(
            "trial {bad}: varX {} or varY {} outside the proven range",
            records[bad].var_x, records[bad].var_y
        )));
    }
    let summary = App1Summary {
        min_var_x: records.iter().map(|r| r.var_x).fold(f64::INFINITY, f64::min),
        max_var_x: records.iter().map(|r| r.var_x).fold(f64::NEG_INFINITY, f64::max),
        max_var_y: records.iter().map(|r| r.var_y).fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(App1Report { n, trials, seed, records, summary })
}

/// Second application: per-weight GHZ variance table, typical-Pauli
/// census, and ratio bound, with a dense cross-check for n <= 7.
pub fn run_app2(n: usize, delta: f64) -> Result<App2Report> {
    if n % 2 == 0 {
        return Err(Error::OddOnly(n));
    }
    if n < 3 || n > 13 {
        return Err(Error::UnsupportedSize(format!(
            "application 2 supports odd 3 <= n <= 13, got {n}"
        )));
    }
    let mut table = Vec::with_capacity(2 * (n + 1));
    for k_weight in 0..=n {
        for l_parity in [0u8, 1] {
            let row = if ghz_variance_vanishes(n, k_weight, l_parity == 0) {
                App2Row {
                    n,
                    k_weight,
                    l_parity,
                    var_x: 0.0,
                    var_y_num: 0,
                    var_y_den: 1,
                    var_y_float: 0.0,
                    ratio: 0.0,
                }
            } else {
                let den = u64::try_from(binomial(n, k_weight))
                    .map_err(|_| Error::TooLarge("binomial exceeds u64".into()))?;
                App2Row {
                    n,
                    k_weight,
                    l_parity,
                    var_x: 1.0,
                    var_y_num: 1,
                    var_y_den: den,
                    var_y_float: 1.0 / den as f64,
                    ratio: den as f64,
                }
            };
            table.push(row);
        }
    }
    let census = pauli_census(n, delta)?;
    let ratio_bound_value = ratio_bound(n, delta)?;

    let dense_checked = n <= 7;
    if dense_checked {
        dense_ghz_cross_check(n, 30, 0xA220_0001)?;
    }
    Ok(App2Report { n, delta, table, census, ratio_bound_value, dense_checked })
}

/// Compare the closed-form GHZ variances against brute-force dense
/// variances of the raw and permutation-twirled Pauli matrices.
fn dense_ghz_cross_check(n: usize, strings: usize, seed: u64) -> Result<()> {
    let rho = DensityMatrix::from_state_vector(&ghz_state(n)?)?;
    let mut rng = rng_from_seed(seed);
    for _ in 0..strings {
        let k: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
        let l: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
        let p = PauliString::new(k, l)?;
        let (var_x, var_y) = ghz_pauli_variances(n, &p)?;
        let x = pauli_matrix(&p)?;
        let dense_x = variance(&rho, &x)?;
        let y = sym_pauli_dense(&twirl_sn_pauli(&p))?;
        let dense_y = variance(&rho, &y)?;
        if (dense_x - var_x).abs() > 1e-9 || (dense_y - var_y).abs() > 1e-9 {
            return Err(Error::BoundViolation(format!(
                "dense GHZ check failed for {p}: varX {dense_x} vs {var_x}, varY {dense_y} vs {var_y}"
            )));
        }
    }
    Ok(())
}

/// Symmetry group selector for the identity suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupSelector {
    Z2,
    Translation,
    Permutation,
}

impl GroupSelector {
    pub fn build(self, n: usize) -> Result<GroupRep> {
        match self {
            GroupSelector::Z2 => Ok(z2_qubit_rep()),
            GroupSelector::Translation => translation_rep(n),
            GroupSelector::Permutation => crate::groups::permutation_rep(n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupSelector::Z2 => "z2",
            GroupSelector::Translation => "translation",
            GroupSelector::Permutation => "permutation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcrbSuiteReport {
    pub group: String,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// max over trials and both QFI routes of |grad H^+ grad^T - (Delta Y)^2|.
    pub max_residual: f64,
    pub max_qfi_disagreement: f64,
    pub pass: bool,
}

/// Run the Cramer-Rao identity check with a fresh random observable per
/// trial and one random symmetric state each.
pub fn run_qcrb_suite(
    group: GroupSelector,
    n: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<QcrbSuiteReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidPrecision(tol));
    }
    let rep = group.build(n)?;
    let dim = rep.dim();
    let mut max_residual = 0.0f64;
    let mut max_disagreement = 0.0f64;
    for t in 0..trials {
        let trial_seed = mix_seed(seed, t as u64);
        let x = random_hermitian(dim, &mut rng_from_seed(mix_seed(trial_seed, 0)));
        let task = EstimationTask::new(x, rep.clone(), 1.0)?;
        let report = verify_eq3(&task, mix_seed(trial_seed, 1), 1)?;
        max_residual = max_residual.max(report.max_residual);
        max_disagreement = max_disagreement.max(report.max_qfi_disagreement);
    }
    Ok(QcrbSuiteReport {
        group: group.name().to_string(),
        n,
        trials,
        seed,
        tol,
        max_residual,
        max_qfi_disagreement: max_disagreement,
        pass: max_residual <= tol,
    })
}
