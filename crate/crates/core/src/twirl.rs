//! The symmetrization map Y = T(X): generic group average over a finite
//! representation, plus closed-form fast paths for the translation group
//! (Fourier-diagonal via the product representation) and the permutation
//! group (Pauli type classes).
//!
//! The brute-force average is the oracle of record; the closed forms are
//! cross-checked against it in the tests.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::consts;
use crate::error::{Error, Result};
use crate::groups::{fourier_state, GroupRep, PauliString};
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};

/// Y = |G|^-1 sum_g U_g X U_g^dag, summed in element-index order.
pub fn twirl_dense(x: &HermitianOperator, rep: &GroupRep) -> Result<HermitianOperator> {
    if x.dim() != rep.dim() {
        return Err(Error::DimMismatch(x.dim(), rep.dim()));
    }
    let work = rep.order() as f64 * (x.dim() as f64).powi(3);
    if work > consts::TWIRL_WORK_GUARD {
        return Err(Error::TooLarge(format!(
            "|G| * dim^3 = {work:.3e} exceeds the {:.0e} guard",
            consts::TWIRL_WORK_GUARD
        )));
    }
    let mut acc = ComplexMatrix::zeros(x.dim());
    for u in rep.elements() {
        acc = acc.add(&x.matrix().conjugate_by(&u)?)?;
    }
    let y = acc.scale(Complex64::new(1.0 / rep.order() as f64, 0.0));
    HermitianOperator::new_symmetrized(y)
}

/// max_g ||[Y, U_g]||_max.
pub fn commutation_defect(y: &HermitianOperator, rep: &GroupRep) -> Result<f64> {
    if y.dim() != rep.dim() {
        return Err(Error::DimMismatch(y.dim(), rep.dim()));
    }
    let mut worst = 0.0f64;
    for u in rep.elements() {
        let yu = y.matrix().mul(&u)?;
        let uy = u.mul(y.matrix())?;
        worst = worst.max(yu.max_dist(&uy));
    }
    Ok(worst)
}

/// Diagonal of a translation-twirled product observable in the Fourier
/// basis: Y = sum_j diag[j] |f_j><f_j|.
#[derive(Debug, Clone)]
pub struct FourierDiagonal {
    n: usize,
    diag: Vec<f64>,
}

impl FourierDiagonal {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Materialize sum_j diag[j] |f_j><f_j| (cross-check path).
    pub fn dense(&self) -> Result<HermitianOperator> {
        if self.n > consts::MAX_DENSE_QUBITS {
            return Err(Error::TooLarge(format!(
                "dense Fourier diagonal needs n <= {}",
                consts::MAX_DENSE_QUBITS
            )));
        }
        let dim = 1usize << self.n;
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for (j, &w) in self.diag.iter().enumerate() {
            let f = fourier_state(self.n, j)?;
            for r in 0..dim {
                for c in 0..dim {
                    m[(r, c)] += C64::new(w, 0.0) * f[r] * f[c].conj();
                }
            }
        }
        HermitianOperator::new_symmetrized(ComplexMatrix::from_dmatrix(m)?)
    }
}

const MAX_FOURIER_QUBITS: usize = 20;

/// Translation twirl of a product observable X = A_1 x ... x A_n without
/// forming any dense matrix. Entry j of the result is
/// X_jj = prod_l <phi_l(j)| A_l |phi_l(j)>, where factor l sees the phase
/// 2 pi (j mod 2^l) / 2^l from the product form of the Fourier basis.
pub fn twirl_translation_product(
    n: usize,
    factors: &[HermitianOperator],
) -> Result<FourierDiagonal> {
    if n == 0 || n > MAX_FOURIER_QUBITS {
        return Err(Error::UnsupportedSize(format!(
            "diagonal-only path needs 1 <= n <= {MAX_FOURIER_QUBITS}, got {n}"
        )));
    }
    if factors.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "expected {n} factors, got {}",
            factors.len()
        )));
    }
    for f in factors {
        if f.dim() != 2 {
            return Err(Error::InvalidFactor);
        }
    }
    let dim = 1usize << n;
    let mut diag = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut prod = 1.0f64;
        for (idx, a) in factors.iter().enumerate() {
            let l = idx + 1;
            let mask = (1usize << l) - 1;
            let phase = TAU * ((j & mask) as f64) / (1usize << l) as f64;
            let a00 = a.matrix().get(0, 0).re;
            let a11 = a.matrix().get(1, 1).re;
            let a01 = a.matrix().get(0, 1);
            let mean = 0.5 * (a00 + a11) + (a01 * C64::new(phase.cos(), phase.sin())).re;
            prod *= mean;
        }
        diag.push(prod);
    }
    Ok(FourierDiagonal { n, diag })
}

/// Permutation twirl of a Pauli string, represented by its letter type
/// counts. The dense form is `phase` times the uniform average over all
/// sigma_x^k sigma_z^l strings with these counts; equivalently the plain
/// average over the corresponding I/X/Y/Z letter strings, because the
/// i^{k.l} phase cancels the per-site sigma_x sigma_z = -i sigma_y factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrizedPauli {
    n: usize,
    /// (t_I, t_X, t_Y, t_Z), summing to n.
    type_counts: (usize, usize, usize, usize),
    /// i^{k.l} as an exponent mod 4.
    phase_quarter_turns: u8,
}

impl SymmetrizedPauli {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn type_counts(&self) -> (usize, usize, usize, usize) {
        self.type_counts
    }

    /// The i^{k.l} phase as a complex number.
    pub fn phase(&self) -> C64 {
        match self.phase_quarter_turns {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// Number of distinct letter strings in the class (multinomial).
    pub fn class_size(&self) -> u128 {
        let (ti, tx, ty, tz) = self.type_counts;
        multinomial(self.n, &[ti, tx, ty, tz])
    }
}

fn multinomial(n: usize, parts: &[usize]) -> u128 {
    debug_assert_eq!(parts.iter().sum::<usize>(), n);
    let mut result: u128 = 1;
    let mut remaining = n;
    for &p in parts {
        result *= binomial(remaining, p);
        remaining -= p;
    }
    result
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    for i in 0..k {
        num = num * (n - i) as u128 / (i + 1) as u128;
    }
    num
}

/// Type-class form of T(X_kl) under the full permutation group.
pub fn twirl_sn_pauli(p: &PauliString) -> SymmetrizedPauli {
    let mut counts = (0usize, 0usize, 0usize, 0usize);
    for i in 0..p.n() {
        match p.letter(i) {
            'I' => counts.0 += 1,
            'X' => counts.1 += 1,
            'Y' => counts.2 += 1,
            _ => counts.3 += 1,
        }
    }
    SymmetrizedPauli {
        n: p.n(),
        type_counts: counts,
        phase_quarter_turns: (p.kl_dot() % 4) as u8,
    }
}

const MAX_SYM_PAULI_DENSE_QUBITS: usize = 10;

/// Materialize a type class as the multinomial-normalized sum of its letter
/// strings. Used as the cross-check path against `twirl_dense`.
pub fn sym_pauli_dense(s: &SymmetrizedPauli) -> Result<HermitianOperator> {
    if s.n > MAX_SYM_PAULI_DENSE_QUBITS {
        return Err(Error::TooLarge(format!(
            "dense type-class materialization needs n <= {MAX_SYM_PAULI_DENSE_QUBITS}"
        )));
    }
    let dim = 1usize << s.n;
    let mut acc = nalgebra::DMatrix::<C64>::zeros(dim, dim);
    let mut count: u128 = 0;
    let mut letters = Vec::with_capacity(s.n);
    enumerate_strings(s.n, s.type_counts, &mut letters, &mut |string| {
        let m = crate::groups::pauli_matrix(&PauliString::parse(
            &string.iter().collect::<String>(),
        )?)?;
        acc += m.matrix().as_dmatrix();
        count += 1;
        Ok(())
    })?;
    debug_assert_eq!(count, s.class_size());
    let avg = acc * C64::new(1.0 / count as f64, 0.0);
    // Averaging letter strings is manifestly Hermitian; the constructor
    // still asserts it.
    HermitianOperator::new(ComplexMatrix::from_dmatrix(avg)?)
}

fn enumerate_strings(
    n: usize,
    remaining: (usize, usize, usize, usize),
    prefix: &mut Vec<char>,
    visit: &mut dyn FnMut(&[char]) -> Result<()>,
) -> Result<()> {
    if prefix.len() == n {
        return visit(prefix);
    }
    let (ti, tx, ty, tz) = remaining;
    for (letter, left) in [
        ('I', (ti.wrapping_sub(1), tx, ty, tz)),
        ('X', (ti, tx.wrapping_sub(1), ty, tz)),
        ('Y', (ti, tx, ty.wrapping_sub(1), tz)),
        ('Z', (ti, tx, ty, tz.wrapping_sub(1))),
    ] {
        let available = match letter {
            'I' => ti,
            'X' => tx,
            'Y' => ty,
            _ => tz,
        };
        if available == 0 {
            continue;
        }
        prefix.push(letter);
        enumerate_strings(n, left, prefix, visit)?;
        prefix.pop();
    }
    Ok(())
}
