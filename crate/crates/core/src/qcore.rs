//! Basis indexing, pure and mixed states, partial trace and Hermitian
//! eigendecomposition.
//!
//! Qubits are numbered `1..=N` and qubit 1 is the most significant bit of a
//! basis index. Every subsystem operation takes 1-based positions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance on `||psi||^2 - 1` after normalization and on density-matrix traces.
pub const NORM_TOL: f64 = 1e-10;
/// Entrywise Hermiticity tolerance for density matrices.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
/// Entrywise Hermiticity tolerance accepted by [`hermitian_eig`].
pub const EIG_HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are floating-point dust and get clipped to 0.
pub const PSD_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Bit mask of qubit `pos` (1-based) in an `n`-qubit index.
#[inline]
pub fn qubit_mask(n: usize, pos: usize) -> usize {
    1 << (n - pos)
}

/// Encodes a ket such as `|011>` as its basis index.
pub fn basis_index(bits: &[u8]) -> Result<usize> {
    if bits.is_empty() {
        return Err(Error::invalid("empty bit string"));
    }
    if bits.len() >= usize::BITS as usize {
        return Err(Error::invalid("bit string too long"));
    }
    bits.iter().try_fold(0usize, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | b as usize),
        other => Err(Error::invalid(format!("digit {other} is not binary"))),
    })
}

/// Inverse of [`basis_index`].
pub fn index_bits(index: usize, n: usize) -> Vec<u8> {
    (1..=n).map(|p| ((index & qubit_mask(n, p)) != 0) as u8).collect()
}

/// Number of up qubits in a basis index.
#[inline]
pub fn weight(index: usize) -> u32 {
    index.count_ones()
}

/// Validated split of an `n`-qubit register into kept and traced qubits.
///
/// `keep_offsets[a] | rest_offsets[r]` is the full index of the basis state
/// whose kept qubits read `a` (in the requested order) and whose remaining
/// qubits read `r` (in ascending position order).
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub keep_offsets: Vec<usize>,
    pub rest_offsets: Vec<usize>,
}

impl Split {
    pub fn new(n: usize, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::invalid("no qubits to keep"));
        }
        let mut seen = vec![false; n + 1];
        for &p in keep {
            if p == 0 || p > n {
                return Err(Error::invalid(format!("qubit {p} outside 1..={n}")));
            }
            if seen[p] {
                return Err(Error::invalid(format!("qubit {p} listed twice")));
            }
            seen[p] = true;
        }
        let keep_masks: Vec<usize> = keep.iter().map(|&p| qubit_mask(n, p)).collect();
        let rest_masks: Vec<usize> = (1..=n)
            .filter(|&p| !seen[p])
            .map(|p| qubit_mask(n, p))
            .collect();
        Ok(Split {
            keep_offsets: offsets(&keep_masks),
            rest_offsets: offsets(&rest_masks),
        })
    }
}

fn offsets(masks: &[usize]) -> Vec<usize> {
    let width = masks.len();
    (0..1usize << width)
        .map(|v| {
            masks
                .iter()
                .enumerate()
                .filter(|(k, _)| v & (1 << (width - 1 - k)) != 0)
                .fold(0, |acc, (_, m)| acc | m)
        })
        .collect()
}

fn check_register(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits >= 32 {
        return Err(Error::invalid(format!("unsupported qubit count {num_qubits}")));
    }
    Ok(())
}

/// Complex amplitudes over the `2^N` computational basis.
///
/// Amplitudes are not required to be normalized; [`StateVector::normalize`]
/// brings the squared norm to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(num_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(num_qubits, CVector::from_vec(amplitudes))
    }

    pub fn from_vector(num_qubits: usize, amplitudes: CVector) -> Result<Self> {
        check_register(num_qubits)?;
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::invalid(format!(
                "{} amplitudes for {num_qubits} qubits",
                amplitudes.len()
            )));
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_real(num_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            num_qubits,
            amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect(),
        )
    }

    pub fn zeros(num_qubits: usize) -> Result<Self> {
        check_register(num_qubits)?;
        Self::from_vector(num_qubits, CVector::zeros(1 << num_qubits))
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        let mut psi = Self::zeros(num_qubits)?;
        if index >= psi.dim() {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        psi.amplitudes[index] = ONE;
        Ok(psi)
    }

    /// `|b_1 b_2 ... b_N>`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Self::basis_state(bits.len(), basis_index(bits)?)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "cannot normalize a vector of norm {norm}"
            )));
        }
        self.amplitudes.unscale_mut(norm);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scale(&mut self, factor: C64) {
        self.amplitudes *= factor;
    }

    fn same_register(&self, other: &Self) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::invalid(format!(
                "register mismatch: {} vs {} qubits",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.same_register(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|<a|b>|^2 / (<a|a><b|b>)`, insensitive to global phase and scale.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let overlap = self.inner(other)?.norm_sqr();
        Ok(overlap / (self.norm_sqr() * other.norm_sqr()))
    }

    pub fn apply(&self, op: &CMatrix) -> Result<Self> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::invalid(format!(
                "{}x{} operator on a {}-dimensional state",
                op.nrows(),
                op.ncols(),
                self.dim()
            )));
        }
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amplitudes: op * &self.amplitudes,
        })
    }

    /// Reorders qubits: qubit `k` of the result is qubit `order[k-1]` of `self`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<Self> {
        let n = self.num_qubits;
        if order.len() != n {
            return Err(Error::invalid("permutation must list every qubit"));
        }
        let split = Split::new(n, order)?;
        let mut out = CVector::zeros(self.dim());
        for (new_index, &old_index) in split.keep_offsets.iter().enumerate() {
            out[new_index] = self.amplitudes[old_index];
        }
        Ok(StateVector {
            num_qubits: n,
            amplitudes: out,
        })
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        let d = other.dim();
        let amplitudes =
            CVector::from_fn(self.dim() * d, |i, _| self.amplitudes[i / d] * other.amplitudes[i % d]);
        StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amplitudes,
        }
    }

    /// Marginal on `keep` of the normalized pure state, without forming the
    /// full `2^N x 2^N` projector.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let split = Split::new(self.num_qubits, keep)?;
        let norm = self.norm_sqr();
        if norm == 0.0 {
            return Err(Error::NumericalFailure("zero state".into()));
        }
        let dk = split.keep_offsets.len();
        let mut rho = CMatrix::zeros(dk, dk);
        for &r in &split.rest_offsets {
            for (a, &ka) in split.keep_offsets.iter().enumerate() {
                let amp_a = self.amplitudes[ka | r];
                if amp_a == ZERO {
                    continue;
                }
                for (b, &kb) in split.keep_offsets.iter().enumerate() {
                    rho[(a, b)] += amp_a * self.amplitudes[kb | r].conj();
                }
            }
        }
        rho.unscale_mut(norm);
        Ok(DensityMatrix::from_trusted(keep.len(), rho))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(self)
    }
}

/// Hermitian, positive semidefinite, unit-trace operator on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    elements: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(num_qubits: usize, elements: CMatrix) -> Result<Self> {
        if num_qubits == 0 || num_qubits >= 16 {
            return Err(Error::invalid(format!("unsupported qubit count {num_qubits}")));
        }
        let dim = 1usize << num_qubits;
        if elements.nrows() != dim || elements.ncols() != dim {
            return Err(Error::invalid(format!(
                "{}x{} matrix for {num_qubits} qubits",
                elements.nrows(),
                elements.ncols()
            )));
        }
        let asym = hermiticity_defect(&elements);
        if asym > DENSITY_HERMITIAN_TOL {
            return Err(Error::invalid(format!("not Hermitian (defect {asym:e})")));
        }
        let tr = elements.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::invalid(format!("trace {tr} is not 1")));
        }
        let rho = DensityMatrix {
            num_qubits,
            elements,
        };
        let min = rho.raw_eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(Error::invalid(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// For matrices that are valid by construction (marginals, mixtures of
    /// projectors).
    pub(crate) fn from_trusted(num_qubits: usize, elements: CMatrix) -> Self {
        debug_assert_eq!(elements.nrows(), 1 << num_qubits);
        DensityMatrix {
            num_qubits,
            elements,
        }
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm_sqr();
        if norm == 0.0 {
            return Err(Error::NumericalFailure("zero state".into()));
        }
        let a = psi.amplitudes();
        let mut m = a * a.adjoint();
        m.unscale_mut(norm);
        Ok(Self::from_trusted(psi.num_qubits(), m))
    }

    /// `1 / 2^n` times the identity.
    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        Self::from_trusted(
            num_qubits,
            CMatrix::identity(dim, dim).unscale(dim as f64),
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn trace(&self) -> C64 {
        self.elements.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending eigenvalues, unclipped.
    pub fn raw_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.elements.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Ascending eigenvalues with `[-PSD_TOL, 0)` clipped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.raw_eigenvalues()
            .into_iter()
            .map(|p| clip_psd(p, "density matrix"))
            .collect()
    }

    /// Trace over every qubit not in `keep`; the result lists the kept qubits
    /// in the given order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let split = Split::new(self.num_qubits, keep)?;
        let dk = split.keep_offsets.len();
        let m = &self.elements;
        let rho = CMatrix::from_fn(dk, dk, |a, b| {
            let (ka, kb) = (split.keep_offsets[a], split.keep_offsets[b]);
            split
                .rest_offsets
                .iter()
                .map(|&r| m[(ka | r, kb | r)])
                .sum()
        });
        Ok(Self::from_trusted(keep.len(), rho))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.elements, &other.elements)
    }
}

/// Applies the positivity convention: dust in `[-PSD_TOL, 0)` becomes 0 and
/// anything more negative is a numerical failure.
pub fn clip_psd(value: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -PSD_TOL {
        Ok(0.0)
    } else {
        Err(Error::NumericalFailure(format!(
            "{what} has eigenvalue {value:e} below -{PSD_TOL:e}"
        )))
    }
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `max |H_ij - conj(H_ji)|`.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Ascending eigenvalues with matching unit eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl EigenSystem {
    /// Sorts an unsorted decomposition by eigenvalue.
    pub(crate) fn from_unsorted(values: Vec<f64>, vectors: CMatrix) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues = order.iter().map(|&k| values[k]).collect();
        let eigenvectors = vectors.select_columns(order.iter());
        EigenSystem {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `V diag(E) V^dagger`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(e);
        }
        scaled * v.adjoint()
    }

    /// `max_k ||H v_k - E_k v_k||`.
    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.eigenvectors.column(k);
                (h * v - v * C64::from(self.eigenvalues[k])).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max |V^dagger V - 1|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.eigenvectors.adjoint() * &self.eigenvectors;
        let id = CMatrix::identity(g.nrows(), g.ncols());
        max_abs_diff(&g, &id)
    }

    /// Indices of every eigenvalue within `tol` of eigenvalue `k`.
    pub fn cluster(&self, k: usize, tol: f64) -> Vec<usize> {
        let e = self.eigenvalues[k];
        (0..self.len())
            .filter(|&j| (self.eigenvalues[j] - e).abs() <= tol)
            .collect()
    }
}

/// Dense eigendecomposition of a complex Hermitian matrix.
pub fn hermitian_eig(h: &CMatrix) -> Result<EigenSystem> {
    if h.nrows() != h.ncols() {
        return Err(Error::invalid(format!(
            "{}x{} matrix is not square",
            h.nrows(),
            h.ncols()
        )));
    }
    let defect = hermiticity_defect(h);
    if defect > EIG_HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::invalid(format!("not Hermitian (defect {defect:e})")));
    }
    let eig = SymmetricEigen::new(h.clone());
    Ok(EigenSystem::from_unsorted(
        eig.eigenvalues.iter().copied().collect(),
        eig.eigenvectors,
    ))
}

/// Ascending eigenvalues and eigenvectors of a real symmetric matrix.
pub(crate) fn real_symmetric_eig(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    (values, eig.eigenvectors.select_columns(order.iter()))
}

/// Ascending eigenvalues of a real symmetric matrix, without eigenvectors.
pub(crate) fn real_symmetric_eigenvalues(h: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Single-qubit operators.
pub mod ops {
    use super::{CMatrix, C64};

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(C64::from))
    }

    pub fn pauli_y() -> CMatrix {
        let i = C64::i();
        CMatrix::from_row_slice(2, 2, &[C64::from(0.0), -i, i, C64::from(0.0)])
    }

    /// `sz|1> = +|1>`, `sz|0> = -|0>`.
    pub fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0].map(C64::from))
    }

    pub fn hadamard() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[h, h, h, -h].map(C64::from))
    }

    pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a.kronecker(b)
    }

    /// `op ⊗ op ⊗ ... ⊗ op` on `n` qubits.
    pub fn kron_power(op: &CMatrix, n: usize) -> CMatrix {
        (1..n).fold(op.clone(), |acc, _| acc.kronecker(op))
    }
}
