//! Seeded simulation of projective measurements and the sample-mean
//! estimator, plus an empirical head-to-head of measuring the raw
//! observable X versus its twirled counterpart Y.

use serde::{Deserialize, Serialize};

use crate::consts;
use crate::error::{Error, Result};
use crate::groups::{symmetry_defect, GroupRep};
use crate::linalg::{
    eig_hermitian, expectation, variance, DensityMatrix, HermitianOperator,
};
use crate::rng::{mix_seed, rng_from_seed};
use crate::twirl::twirl_dense;
use rand::Rng;

/// Distinct measurement outcomes of an observable on a fixed state,
/// ascending, with their Born probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementPlan {
    /// Distinct outcome values after degenerate-eigenvalue merging.
    pub eigenvalues: Vec<f64>,
    /// p_y = tr(Pi_y rho), clamped to [0, inf) and renormalized.
    pub probabilities: Vec<f64>,
}

/// One simulated measurement run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub observable_tag: String,
    /// Number of shots M.
    pub shots: u64,
    /// Sample mean over the M outcomes.
    pub estimate: f64,
    pub seed: u64,
    /// (outcome value, count) pairs in outcome order; counts sum to M.
    pub outcomes_summary: Vec<(f64, u64)>,
}

/// Diagonalize the observable on the state: merge eigenvalues closer than
/// the merge gap into single outcomes and accumulate their projector
/// probabilities.
pub fn plan_measurement(rho: &DensityMatrix, o: &HermitianOperator) -> Result<MeasurementPlan> {
    if rho.dim() != o.dim() {
        return Err(Error::DimMismatch(rho.dim(), o.dim()));
    }
    let eig = eig_hermitian(o)?;
    let dim = rho.dim();
    // Probability mass on each eigenvector: <v_k| rho |v_k>.
    let v = eig.eigenvectors.as_dmatrix();
    let weights: Vec<f64> = (0..dim)
        .map(|k| {
            let col = v.column(k);
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for i in 0..dim {
                for j in 0..dim {
                    acc += col[i].conj() * rho.matrix().get(i, j) * col[j];
                }
            }
            acc.re
        })
        .collect();

    let scale = eig
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let gap = consts::OUTCOME_MERGE_GAP * scale;

    // Eigenvalues arrive ascending; sweep once, merging near-coincident
    // values into probability-pooled outcomes.
    let mut outcomes: Vec<f64> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    let mut cluster_sum = 0.0f64;
    let mut cluster_len = 0usize;
    let mut cluster_p = 0.0f64;
    for k in 0..dim {
        let lam = eig.eigenvalues[k];
        if cluster_len > 0 && lam - eig.eigenvalues[k - 1] > gap {
            outcomes.push(cluster_sum / cluster_len as f64);
            probs.push(cluster_p);
            cluster_sum = 0.0;
            cluster_len = 0;
            cluster_p = 0.0;
        }
        cluster_sum += lam;
        cluster_len += 1;
        cluster_p += weights[k];
    }
    outcomes.push(cluster_sum / cluster_len as f64);
    probs.push(cluster_p);

    for p in &mut probs {
        if *p < -1e-12 {
            return Err(Error::InvalidMatrix(format!(
                "outcome probability {p} below tolerance"
            )));
        }
        *p = p.max(0.0);
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMatrix(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(MeasurementPlan { eigenvalues: outcomes, probabilities: probs })
}

/// Draw M outcomes by inverse-CDF over the plan's fixed outcome order and
/// apply the sample-mean estimator. Deterministic for a given seed.
pub fn simulate(plan: &MeasurementPlan, shots: u64, seed: u64) -> Result<RunRecord> {
    if shots == 0 {
        return Err(Error::InvalidShots);
    }
    let mut rng = rng_from_seed(seed);
    let mut counts = vec![0u64; plan.eigenvalues.len()];
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>();
        let mut acc = 0.0f64;
        let mut pick = plan.eigenvalues.len() - 1;
        for (idx, &p) in plan.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                pick = idx;
                break;
            }
        }
        counts[pick] += 1;
    }
    let mut sum = 0.0f64;
    let mut summary = Vec::with_capacity(counts.len());
    for (idx, &c) in counts.iter().enumerate() {
        sum += plan.eigenvalues[idx] * c as f64;
        summary.push((plan.eigenvalues[idx], c));
    }
    Ok(RunRecord {
        observable_tag: String::new(),
        shots,
        estimate: sum / shots as f64,
        seed,
        outcomes_summary: summary,
    })
}

/// Per-strategy aggregate of a strategy comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyStats {
    pub observable_tag: String,
    /// Mean of the per-repetition sample means.
    pub mean_estimate: f64,
    /// Unbiased variance of the per-repetition sample means.
    pub empirical_variance: f64,
    /// (Delta O)^2 / M.
    pub theoretical_variance: f64,
    /// z-score of |mean - true value| against the theoretical spread.
    pub mean_z_score: f64,
}

/// Side-by-side result of estimating <X> by measuring X directly versus
/// measuring the twirled observable Y.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyComparison {
    pub shots: u64,
    pub repetitions: u64,
    pub seed: u64,
    /// <Y>_rho = <X>_rho, the quantity both strategies estimate.
    pub target_value: f64,
    pub x_strategy: StrategyStats,
    pub y_strategy: StrategyStats,
}

fn run_strategy(
    tag: &str,
    plan: &MeasurementPlan,
    target: f64,
    var_theory_per_shot: f64,
    shots: u64,
    reps: u64,
    master_seed: u64,
    stream: u64,
) -> Result<StrategyStats> {
    let mut estimates = Vec::with_capacity(reps as usize);
    for rep in 0..reps {
        let seed = mix_seed(master_seed, 2 * rep + stream);
        estimates.push(simulate(plan, shots, seed)?.estimate);
    }
    let mean = estimates.iter().sum::<f64>() / reps as f64;
    let emp_var = if reps > 1 {
        estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps - 1) as f64
    } else {
        0.0
    };
    let theory = var_theory_per_shot / shots as f64;
    let spread = (theory / reps as f64).sqrt();
    let z = if spread > 0.0 { (mean - target).abs() / spread } else { 0.0 };
    if z > 6.0 {
        log::warn!("strategy {tag}: sample mean deviates by {z:.1} standard errors");
    }
    Ok(StrategyStats {
        observable_tag: tag.to_string(),
        mean_estimate: mean,
        empirical_variance: emp_var,
        theoretical_variance: theory,
        mean_z_score: z,
    })
}

/// Run `reps` independent simulations of measuring X and of measuring
/// Y = T(X) on a symmetric state, M shots each, and report empirical
/// versus theoretical estimator variances.
pub fn strategy_comparison(
    rho: &DensityMatrix,
    x: &HermitianOperator,
    rep: &GroupRep,
    shots: u64,
    repetitions: u64,
    seed: u64,
) -> Result<StrategyComparison> {
    let defect = symmetry_defect(rho, rep)?;
    if defect > consts::SYMMETRY_TOL {
        return Err(Error::NotSymmetric(defect));
    }
    if shots == 0 || repetitions == 0 {
        return Err(Error::InvalidShots);
    }
    let y = twirl_dense(x, rep)?;
    let target = expectation(rho, &y)?;
    let var_x = variance(rho, x)?;
    let var_y = variance(rho, &y)?;
    let plan_x = plan_measurement(rho, x)?;
    let plan_y = plan_measurement(rho, &y)?;
    let x_stats = run_strategy("X", &plan_x, target, var_x, shots, repetitions, seed, 0)?;
    let y_stats = run_strategy("Y", &plan_y, target, var_y, shots, repetitions, seed, 1)?;
    Ok(StrategyComparison {
        shots,
        repetitions,
        seed,
        target_value: target,
        x_strategy: x_stats,
        y_strategy: y_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{
        fourier_state, ghz_state, pauli_matrix, sigma_x, sigma_z, translation_rep, z2_qubit_rep,
        PauliString,
    };
    use crate::linalg::{cr, ComplexMatrix, C64};

    fn ket0_density() -> DensityMatrix {
        DensityMatrix::from_state_vector(&[cr(1.0), cr(0.0)]).unwrap()
    }

    #[test]
    fn plan_ket0_sigma_z() {
        let plan = plan_measurement(&ket0_density(), &sigma_z()).unwrap();
        assert_eq!(plan.eigenvalues.len(), 2);
        assert!((plan.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((plan.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!(plan.probabilities[0].abs() < 1e-12);
        assert!((plan.probabilities[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plan_mixed_sigma_z() {
        let plan = plan_measurement(&DensityMatrix::maximally_mixed(2), &sigma_z()).unwrap();
        assert!((plan.probabilities[0] - 0.5).abs() < 1e-12);
        assert!((plan.probabilities[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn plan_ghz_xxx_deterministic() {
        let rho = DensityMatrix::from_state_vector(&ghz_state(3).unwrap()).unwrap();
        let xxx = pauli_matrix(&PauliString::parse("XXX").unwrap()).unwrap();
        let plan = plan_measurement(&rho, &xxx).unwrap();
        // XXX has outcomes -1 and +1; GHZ is the +1 eigenstate.
        let (idx, _) = plan
            .eigenvalues
            .iter()
            .enumerate()
            .find(|(_, &v)| (v - 1.0).abs() < 1e-9)
            .unwrap();
        assert!((plan.probabilities[idx] - 1.0).abs() < 1e-10);
        assert!(plan.probabilities.iter().sum::<f64>() - 1.0 < 1e-12);
    }

    #[test]
    fn plan_merges_degenerate_outcomes() {
        let plan =
            plan_measurement(&DensityMatrix::maximally_mixed(2), &HermitianOperator::identity(2))
                .unwrap();
        assert_eq!(plan.eigenvalues.len(), 1);
        assert!((plan.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((plan.probabilities[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simulate_deterministic_plan() {
        let plan = MeasurementPlan { eigenvalues: vec![0.75], probabilities: vec![1.0] };
        for (m, seed) in [(1u64, 0u64), (17, 5), (1000, 99)] {
            let rec = simulate(&plan, m, seed).unwrap();
            assert!((rec.estimate - 0.75).abs() < 1e-15);
            assert_eq!(rec.outcomes_summary, vec![(0.75, m)]);
        }
    }

    #[test]
    fn simulate_same_seed_identical() {
        let plan = plan_measurement(&DensityMatrix::maximally_mixed(2), &sigma_z()).unwrap();
        let a = simulate(&plan, 500, 42).unwrap();
        let b = simulate(&plan, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate(&plan, 500, 43).unwrap();
        assert_ne!(a.outcomes_summary, c.outcomes_summary);
    }

    #[test]
    fn simulate_fair_coin_mean() {
        let plan = plan_measurement(&DensityMatrix::maximally_mixed(2), &sigma_z()).unwrap();
        let rec = simulate(&plan, 100_000, 7).unwrap();
        let total: u64 = rec.outcomes_summary.iter().map(|&(_, c)| c).sum();
        assert_eq!(total, 100_000);
        // ~6.3 standard errors of the binomial spread 1/sqrt(M).
        assert!(rec.estimate.abs() <= 0.02, "estimate {}", rec.estimate);
    }

    #[test]
    fn simulate_rejects_zero_shots() {
        let plan = MeasurementPlan { eigenvalues: vec![1.0], probabilities: vec![1.0] };
        assert!(matches!(simulate(&plan, 0, 1), Err(Error::InvalidShots)));
    }

    #[test]
    fn comparison_rejects_asymmetric_state() {
        let rho = ket0_density();
        let rep = z2_qubit_rep();
        // |+><+| is not invariant under I/Z conjugation.
        let plus = DensityMatrix::from_state_vector(&[
            cr(std::f64::consts::FRAC_1_SQRT_2),
            cr(std::f64::consts::FRAC_1_SQRT_2),
        ])
        .unwrap();
        assert!(matches!(
            strategy_comparison(&plus, &sigma_x(), &rep, 10, 10, 1),
            Err(Error::NotSymmetric(_))
        ));
        assert!(strategy_comparison(&rho, &sigma_x(), &rep, 10, 10, 1).is_ok());
    }

    #[test]
    fn comparison_zero_variance_y_is_exact() {
        // On a sigma_z eigenstate with Z2 symmetry, Y = T(sigma_z) = sigma_z
        // and the estimate is deterministic.
        let cmp =
            strategy_comparison(&ket0_density(), &sigma_z(), &z2_qubit_rep(), 5, 50, 3).unwrap();
        assert_eq!(cmp.y_strategy.empirical_variance, 0.0);
        assert!((cmp.y_strategy.mean_estimate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn comparison_variance_matches_theory() {
        // rho = I/2, X = sigma_x under Z2: Y = 0, while measuring X directly
        // has (Delta X)^2 = 1.
        let cmp = strategy_comparison(
            &DensityMatrix::maximally_mixed(2),
            &sigma_x(),
            &z2_qubit_rep(),
            10,
            2000,
            11,
        )
        .unwrap();
        assert!((cmp.x_strategy.theoretical_variance - 0.1).abs() < 1e-12);
        let rel = (cmp.x_strategy.empirical_variance - 0.1).abs() / 0.1;
        assert!(rel < 0.15, "relative deviation {rel}");
        assert!(cmp.y_strategy.empirical_variance.abs() < 1e-3);
        assert!(cmp.x_strategy.mean_z_score < 6.0);
    }

    #[test]
    fn comparison_translation_gap() {
        // Translation-invariant state concentrated on one Fourier mode:
        // the twirled strategy needs far fewer shots than raw X.
        let n = 4;
        let dim = 1usize << n;
        let rep = translation_rep(n).unwrap();
        let mut weights = vec![0.01 / (dim - 1) as f64; dim];
        weights[0] = 0.99;
        let mut rho_m = nalgebra::DMatrix::<C64>::zeros(dim, dim);
        for (j, &w) in weights.iter().enumerate() {
            let f = fourier_state(n, j).unwrap();
            for a in 0..dim {
                for b in 0..dim {
                    rho_m[(a, b)] += f[a] * f[b].conj() * cr(w);
                }
            }
        }
        let rho = DensityMatrix::new(ComplexMatrix::from_dmatrix(rho_m).unwrap()).unwrap();
        let mut x = HermitianOperator::identity(1);
        let factor = sigma_x().matrix().add(sigma_z().matrix()).unwrap();
        for _ in 0..n {
            x = HermitianOperator::new(x.matrix().kron(&factor)).unwrap();
        }
        let cmp = strategy_comparison(&rho, &x, &rep, 50, 400, 21).unwrap();
        assert!(cmp.y_strategy.theoretical_variance * 50.0 <= 0.1);
        assert!(
            cmp.x_strategy.empirical_variance >= 10.0 * cmp.y_strategy.empirical_variance,
            "ratio {}",
            cmp.x_strategy.empirical_variance / cmp.y_strategy.empirical_variance
        );
    }
}
