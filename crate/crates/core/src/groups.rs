//! Concrete finite unitary representations (translation, permutation,
//! Pauli strings, the two-element Z2 qubit example) and the state
//! constructors used by the applications (Fourier basis, GHZ).

use std::f64::consts::TAU;
use std::fmt;

use itertools::Itertools;
use num_complex::Complex64;

use crate::consts;
use crate::error::{Error, Result};
use crate::linalg::{cr, ComplexMatrix, DensityMatrix, HermitianOperator, C64};

pub fn sigma_x() -> HermitianOperator {
    HermitianOperator::from_rows(2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]).unwrap()
}

pub fn sigma_y() -> HermitianOperator {
    HermitianOperator::from_rows(
        2,
        &[cr(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), cr(0.0)],
    )
    .unwrap()
}

pub fn sigma_z() -> HermitianOperator {
    HermitianOperator::from_rows(2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]).unwrap()
}

/// A permutation of {0..n-1}. `map[i] = s(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &x in &map {
            if x >= n || seen[x] {
                return Err(Error::InvalidMatrix("not a bijection".into()));
            }
            seen[x] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    /// (self . other)(i) = self(other(i)).
    pub fn compose(&self, other: &Self) -> Self {
        Self { map: (0..self.n()).map(|i| self.map[other.map[i]]).collect() }
    }
}

/// Pauli string in symplectic (k, l) bit form:
/// X_kl = i^{k.l} prod_i sigma_x^{k_i} sigma_z^{l_i}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    k: Vec<u8>,
    l: Vec<u8>,
}

impl PauliString {
    pub fn new(k: Vec<u8>, l: Vec<u8>) -> Result<Self> {
        if k.len() != l.len() {
            return Err(Error::DimMismatch(k.len(), l.len()));
        }
        if k.iter().chain(l.iter()).any(|&b| b > 1) {
            return Err(Error::PauliParse("bits must be 0 or 1".into()));
        }
        Ok(Self { n: k.len(), k, l })
    }

    /// Parse the letter form, e.g. "XZI" -> k=(1,0,0), l=(0,1,0).
    pub fn parse(s: &str) -> Result<Self> {
        let mut k = Vec::with_capacity(s.len());
        let mut l = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let (kb, lb) = match ch {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                other => return Err(Error::PauliParse(format!("unexpected letter {other:?}"))),
            };
            k.push(kb);
            l.push(lb);
        }
        if k.is_empty() {
            return Err(Error::PauliParse("empty string".into()));
        }
        Self::new(k, l)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> &[u8] {
        &self.k
    }

    pub fn l(&self) -> &[u8] {
        &self.l
    }

    /// |k| = sum k_i.
    pub fn k_weight(&self) -> usize {
        self.k.iter().map(|&b| b as usize).sum()
    }

    pub fn l_weight(&self) -> usize {
        self.l.iter().map(|&b| b as usize).sum()
    }

    /// k . l mod 4 exponent base for the i^{k.l} phase.
    pub fn kl_dot(&self) -> usize {
        self.k.iter().zip(&self.l).map(|(&a, &b)| (a & b) as usize).sum()
    }

    /// Letter at site i.
    pub fn letter(&self, i: usize) -> char {
        match (self.k[i], self.l[i]) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "{}", self.letter(i))?;
        }
        Ok(())
    }
}

/// Which concrete family a representation belongs to. Translation and
/// permutation elements are generated lazily; an explicit list stores its
/// matrices up front.
#[derive(Debug, Clone)]
enum RepKind {
    Explicit(Vec<ComplexMatrix>),
    Translation { n: usize },
    Permutation { n: usize },
}

/// A finite unitary representation {U_g}. Element 0 is the identity and
/// uniform weights 1/|G| realize the normalized Haar measure.
#[derive(Debug, Clone)]
pub struct GroupRep {
    dim: usize,
    order: usize,
    kind: RepKind,
}

impl GroupRep {
    /// Build from an explicit matrix list; element 0 must be the identity
    /// and every element unitary at 1e-9.
    pub fn from_elements(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::InvalidMatrix("empty representation".into()))?
            .dim();
        for (idx, u) in elements.iter().enumerate() {
            if u.dim() != dim {
                return Err(Error::DimMismatch(u.dim(), dim));
            }
            let defect = u.unitarity_defect();
            if defect > consts::UNITARY_TOL {
                return Err(Error::InvalidMatrix(format!(
                    "element {idx} unitarity defect {defect:.3e}"
                )));
            }
        }
        if elements[0].max_dist(&ComplexMatrix::identity(dim)) > consts::UNITARY_TOL {
            return Err(Error::InvalidMatrix("element 0 is not the identity".into()));
        }
        let order = elements.len();
        Ok(Self { dim, order, kind: RepKind::Explicit(elements) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The i-th element in the fixed iteration order (powers of T ascending
    /// for translation, lexicographic permutations for S_n).
    pub fn element(&self, i: usize) -> ComplexMatrix {
        assert!(i < self.order, "element index {i} out of range {}", self.order);
        match &self.kind {
            RepKind::Explicit(list) => list[i].clone(),
            RepKind::Translation { n } => translation_power(*n, i),
            RepKind::Permutation { n } => permutation_matrix(&unrank_lexicographic(*n, i)),
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = ComplexMatrix> + '_ {
        (0..self.order).map(move |i| self.element(i))
    }
}

fn shift_matrix(dim: usize, by: usize) -> ComplexMatrix {
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for j in 0..dim {
        m[((j + by) % dim, j)] = Complex64::new(1.0, 0.0);
    }
    ComplexMatrix::from_dmatrix(m).unwrap()
}

fn translation_power(n: usize, i: usize) -> ComplexMatrix {
    shift_matrix(1 << n, i)
}

/// Lexicographically i-th permutation of {0..n-1} (factorial number system).
fn unrank_lexicographic(n: usize, mut i: usize) -> Permutation {
    let mut factorials = vec![1usize; n];
    for k in 1..n {
        factorials[k] = factorials[k - 1] * k;
    }
    let mut pool: Vec<usize> = (0..n).collect();
    let mut map = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let idx = i / factorials[k];
        i %= factorials[k];
        map.push(pool.remove(idx));
    }
    Permutation::new(map).unwrap()
}

/// Qubit-register matrix of P_s: slot i of the output carries what slot
/// s(i) carried, i.e. P_s |b> = |c> with c_i = b_{s(i)}. Qubit 0 is the
/// most significant bit of the basis index.
pub fn permutation_matrix(s: &Permutation) -> ComplexMatrix {
    let n = s.n();
    let dim = 1usize << n;
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let mut c = 0usize;
        for i in 0..n {
            let bit = (b >> (n - 1 - s.apply(i))) & 1;
            c |= bit << (n - 1 - i);
        }
        m[(c, b)] = Complex64::new(1.0, 0.0);
    }
    ComplexMatrix::from_dmatrix(m).unwrap()
}

/// Cyclic translation group {T^i} on n qubits, T|j> = |j+1 mod 2^n>.
pub fn translation_rep(n: usize) -> Result<GroupRep> {
    if n == 0 || n > consts::MAX_DENSE_QUBITS {
        return Err(Error::UnsupportedSize(format!(
            "translation group needs 1 <= n <= {}, got {n}",
            consts::MAX_DENSE_QUBITS
        )));
    }
    Ok(GroupRep { dim: 1 << n, order: 1 << n, kind: RepKind::Translation { n } })
}

/// Full symmetric group S_n acting by qubit-register permutations,
/// enumerated in lexicographic order.
pub fn permutation_rep(n: usize) -> Result<GroupRep> {
    if n == 0 || n > consts::MAX_PERMUTATION_QUBITS {
        return Err(Error::UnsupportedSize(format!(
            "full S_n enumeration needs 1 <= n <= {}, got {n}",
            consts::MAX_PERMUTATION_QUBITS
        )));
    }
    let order = (1..=n).product();
    Ok(GroupRep { dim: 1 << n, order, kind: RepKind::Permutation { n } })
}

/// The two-element qubit example {I, sigma_z}.
pub fn z2_qubit_rep() -> GroupRep {
    let elements = vec![ComplexMatrix::identity(2), sigma_z().matrix().clone()];
    GroupRep::from_elements(elements).unwrap()
}

/// Dense matrix of a Pauli string. Each site contributes the letter matrix
/// (the i^{k.l} phase cancels against the per-site sigma_x sigma_z = -i
/// sigma_y factors, leaving the plain I/X/Y/Z tensor product).
pub fn pauli_matrix(p: &PauliString) -> Result<HermitianOperator> {
    if p.n() > consts::MAX_DENSE_QUBITS {
        return Err(Error::UnsupportedSize(format!(
            "dense Pauli needs n <= {}, got {}",
            consts::MAX_DENSE_QUBITS,
            p.n()
        )));
    }
    let mut m = ComplexMatrix::identity(1);
    for i in 0..p.n() {
        let factor = match p.letter(i) {
            'I' => ComplexMatrix::identity(2),
            'X' => sigma_x().matrix().clone(),
            'Y' => sigma_y().matrix().clone(),
            _ => sigma_z().matrix().clone(),
        };
        m = m.kron(&factor);
    }
    HermitianOperator::new(m)
}

/// |f_j> = sum_k e^{2 pi i jk/2^n} |k> / sqrt(2^n), the eigenbasis of T.
pub fn fourier_state(n: usize, j: usize) -> Result<Vec<C64>> {
    let dim = 1usize << n;
    if j >= dim {
        return Err(Error::IndexOutOfRange { index: j, limit: dim });
    }
    let norm = 1.0 / (dim as f64).sqrt();
    Ok((0..dim)
        .map(|k| {
            let phase = TAU * (j as f64) * (k as f64) / dim as f64;
            C64::new(phase.cos() * norm, phase.sin() * norm)
        })
        .collect())
}

/// (|0...0> + |1...1>)/sqrt(2).
pub fn ghz_state(n: usize) -> Result<Vec<C64>> {
    if n == 0 || n > consts::MAX_DENSE_QUBITS {
        return Err(Error::UnsupportedSize(format!(
            "GHZ needs 1 <= n <= {}, got {n}",
            consts::MAX_DENSE_QUBITS
        )));
    }
    let dim = 1usize << n;
    let amp = C64::new(1.0 / 2f64.sqrt(), 0.0);
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    psi[0] = amp;
    psi[dim - 1] = amp;
    Ok(psi)
}

/// True iff max_g ||U_g rho U_g^dag - rho||_max <= tol.
pub fn verify_symmetry(rho: &DensityMatrix, rep: &GroupRep, tol: f64) -> Result<bool> {
    Ok(symmetry_defect(rho, rep)? <= tol)
}

/// max_g ||U_g rho U_g^dag - rho||_max.
pub fn symmetry_defect(rho: &DensityMatrix, rep: &GroupRep) -> Result<f64> {
    if rho.dim() != rep.dim() {
        return Err(Error::DimMismatch(rho.dim(), rep.dim()));
    }
    let mut worst = 0.0f64;
    for u in rep.elements() {
        let conj = rho.matrix().conjugate_by(&u)?;
        worst = worst.max(conj.max_dist(rho.matrix()));
    }
    Ok(worst)
}

/// All permutations of S_n in the rep's lexicographic iteration order.
pub fn lexicographic_permutations(n: usize) -> impl Iterator<Item = Permutation> {
    (0..n).permutations(n).map(|map| Permutation::new(map).unwrap())
}
