//! The Ising ring Hamiltonian, its symmetries, spectra and ground states.
//!
//! The Hamiltonian commutes with the parity `(-1)^K` (K = number of up
//! qubits), so every dense solve is done separately on the even and odd
//! sectors. Eigenvectors coming out of this module are therefore always
//! parity eigenstates.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::qcore::{self, qubit_mask, CMatrix, CVector, EigenSystem, StateVector};

/// Largest register the dense routines accept.
pub const MAX_DENSE_QUBITS: usize = 14;

/// Absolute degeneracy threshold at unit coupling; see [`IsingParams::degeneracy_tol`].
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingParams {
    num_qubits: usize,
    lambda: f64,
    energy_scale: f64,
}

impl IsingParams {
    pub fn new(num_qubits: usize, lambda: f64) -> Result<Self> {
        if num_qubits < 2 {
            return Err(Error::invalid(format!("ring needs N >= 2, got {num_qubits}")));
        }
        if num_qubits > 30 {
            return Err(Error::ResourceLimit(format!("N = {num_qubits} is too large")));
        }
        if !lambda.is_finite() {
            return Err(Error::invalid(format!("lambda must be finite, got {lambda}")));
        }
        Ok(IsingParams {
            num_qubits,
            lambda,
            energy_scale: 1.0,
        })
    }

    pub fn with_energy_scale(mut self, energy_scale: f64) -> Result<Self> {
        if !(energy_scale > 0.0 && energy_scale.is_finite()) {
            return Err(Error::invalid(format!(
                "energy scale must be positive, got {energy_scale}"
            )));
        }
        self.energy_scale = energy_scale;
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn energy_scale(&self) -> f64 {
        self.energy_scale
    }

    /// Transverse field `B = E`.
    pub fn field(&self) -> f64 {
        self.energy_scale
    }

    /// Ising coupling `C_I = lambda * E`.
    pub fn coupling(&self) -> f64 {
        self.lambda * self.energy_scale
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// Energies are O(N * max(1, |lambda|) * E); the degeneracy threshold
    /// scales with the coupling so that large-lambda roundoff is not mistaken
    /// for a gap.
    pub fn degeneracy_tol(&self) -> f64 {
        DEGENERACY_TOL * self.lambda.abs().max(1.0) * self.energy_scale
    }
}

/// `sx_n sx_{n+1}` flip masks for every bond of the ring, `n = 1..=N`.
fn bond_masks(n: usize) -> Vec<usize> {
    (1..=n)
        .map(|p| qubit_mask(n, p) | qubit_mask(n, p % n + 1))
        .collect()
}

/// `sum_n sz_n` on a basis state: `2K - N`.
#[inline]
fn field_energy(index: usize, n: usize) -> f64 {
    2.0 * qcore::weight(index) as f64 - n as f64
}

/// Dense real form of the Hamiltonian.
pub fn build_real_hamiltonian(p: &IsingParams) -> DMatrix<f64> {
    let n = p.num_qubits;
    let dim = p.dim();
    let bonds = bond_masks(n);
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] += p.field() * field_energy(i, n);
        for &m in &bonds {
            h[(i ^ m, i)] -= p.coupling();
        }
    }
    h
}

/// `H = E (-lambda sum_n sx_n sx_{n+1} + sum_n sz_n)` on the cyclic ring.
pub fn build_hamiltonian(p: &IsingParams) -> CMatrix {
    build_real_hamiltonian(p).map(C64::from)
}

/// `H |psi>` without forming the matrix.
pub fn apply_hamiltonian(p: &IsingParams, psi: &StateVector) -> Result<StateVector> {
    let n = p.num_qubits;
    if psi.num_qubits() != n {
        return Err(Error::invalid(format!(
            "{}-qubit state for an {n}-qubit Hamiltonian",
            psi.num_qubits()
        )));
    }
    let bonds = bond_masks(n);
    let a = psi.amplitudes();
    let out = CVector::from_fn(a.len(), |i, _| {
        let hop: C64 = bonds.iter().map(|&m| a[i ^ m]).sum();
        a[i] * (p.field() * field_energy(i, n)) - hop * p.coupling()
    });
    StateVector::from_vector(n, out)
}

/// Diagonal of `(-1)^K`.
pub fn parity_operator(n: usize) -> Vec<i8> {
    (0..1usize << n)
        .map(|i| if qcore::weight(i).is_multiple_of(2) { 1 } else { -1 })
        .collect()
}

/// Basis index after moving the content of qubit `k` to qubit `k + 1` (mod N).
#[inline]
pub fn translate_index(index: usize, n: usize) -> usize {
    (index >> 1) | ((index & 1) << (n - 1))
}

/// Basis index after the reflection `k -> N - k + 1`.
#[inline]
pub fn invert_index(index: usize, n: usize) -> usize {
    let mut out = 0;
    for k in 0..n {
        if index & (1 << k) != 0 {
            out |= 1 << (n - 1 - k);
        }
    }
    out
}

fn permutation_matrix(n: usize, map: impl Fn(usize) -> usize) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(map(i), i)] = C64::from(1.0);
    }
    m
}

pub fn translation_operator(n: usize) -> CMatrix {
    permutation_matrix(n, |i| translate_index(i, n))
}

pub fn inversion_operator(n: usize) -> CMatrix {
    permutation_matrix(n, |i| invert_index(i, n))
}

/// Applies a basis permutation to a state.
pub fn permute_state(psi: &StateVector, map: impl Fn(usize) -> usize) -> StateVector {
    let a = psi.amplitudes();
    let mut out = CVector::zeros(a.len());
    for (i, &amp) in a.iter().enumerate() {
        out[map(i)] = amp;
    }
    StateVector::from_vector(psi.num_qubits(), out).expect("same register")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(index: usize) -> Self {
        if qcore::weight(index).is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

/// Eigen-decomposition of one parity block.
#[derive(Debug, Clone)]
pub(crate) struct SectorEigen {
    pub parity: Parity,
    /// Full-register basis indices spanned by the block, ascending.
    pub basis: Vec<usize>,
    pub values: Vec<f64>,
    /// Real eigenvectors in block coordinates, one per column.
    pub vectors: Option<DMatrix<f64>>,
}

impl SectorEigen {
    pub fn embed(&self, k: usize, n: usize) -> StateVector {
        let v = self.vectors.as_ref().expect("eigenvectors were computed");
        let mut amps = CVector::zeros(1 << n);
        for (row, &idx) in self.basis.iter().enumerate() {
            amps[idx] = C64::from(v[(row, k)]);
        }
        StateVector::from_vector(n, amps).expect("register size")
    }
}

fn sector_basis(n: usize, parity: Parity) -> Vec<usize> {
    (0..1usize << n).filter(|&i| Parity::of(i) == parity).collect()
}

fn sector_block(p: &IsingParams, basis: &[usize]) -> DMatrix<f64> {
    let n = p.num_qubits;
    let dim = 1usize << n;
    let mut position = vec![usize::MAX; dim];
    for (row, &idx) in basis.iter().enumerate() {
        position[idx] = row;
    }
    let bonds = bond_masks(n);
    let mut h = DMatrix::zeros(basis.len(), basis.len());
    for (col, &i) in basis.iter().enumerate() {
        h[(col, col)] += p.field() * field_energy(i, n);
        for &m in &bonds {
            h[(position[i ^ m], col)] -= p.coupling();
        }
    }
    h
}

pub(crate) fn sector_eigen(p: &IsingParams, parity: Parity, with_vectors: bool) -> SectorEigen {
    let basis = sector_basis(p.num_qubits, parity);
    let block = sector_block(p, &basis);
    let (values, vectors) = if with_vectors {
        let (v, w) = qcore::real_symmetric_eig(block);
        (v, Some(w))
    } else {
        (qcore::real_symmetric_eigenvalues(block), None)
    };
    SectorEigen {
        parity,
        basis,
        values,
        vectors,
    }
}

pub(crate) fn sector_eigens(
    p: &IsingParams,
    with_vectors: bool,
    exec: Execution,
) -> [SectorEigen; 2] {
    let (even, odd) = exec.join(
        || sector_eigen(p, Parity::Even, with_vectors),
        || sector_eigen(p, Parity::Odd, with_vectors),
    );
    [even, odd]
}

/// Sorted spectrum of `H` (eigenvalues only).
pub fn spectrum(p: &IsingParams) -> Vec<f64> {
    let [even, odd] = sector_eigens(p, false, Execution::Sequential);
    let mut all = even.values;
    all.extend(odd.values);
    all.sort_by(f64::total_cmp);
    all
}

/// Full eigensystem of `H`, with parity-pure eigenvectors.
pub fn eigensystem(p: &IsingParams) -> EigenSystem {
    let n = p.num_qubits;
    let dim = p.dim();
    let sectors = sector_eigens(p, true, Execution::Sequential);
    let mut values = Vec::with_capacity(dim);
    let mut vectors = CMatrix::zeros(dim, dim);
    let mut col = 0;
    for s in &sectors {
        let v = s.vectors.as_ref().expect("vectors requested");
        for (k, &e) in s.values.iter().enumerate() {
            values.push(e);
            for (row, &idx) in s.basis.iter().enumerate() {
                vectors[(idx, col)] = C64::from(v[(row, k)]);
            }
            col += 1;
        }
    }
    debug_assert_eq!(col, dim);
    let _ = n;
    EigenSystem::from_unsorted(values, vectors)
}

/// Lowest eigenvector. A degenerate lowest level is resolved by returning
/// its unique even-parity member, the state that continues to the
/// `lambda -> infinity` GHZ-like ground state.
pub fn ground_state(p: &IsingParams) -> Result<StateVector> {
    let n = p.num_qubits;
    let sectors = sector_eigens(p, true, Execution::Sequential);
    let e0 = sectors
        .iter()
        .map(|s| s.values[0])
        .fold(f64::INFINITY, f64::min);
    let tol = p.degeneracy_tol();
    let lowest: Vec<(usize, usize)> = sectors
        .iter()
        .enumerate()
        .flat_map(|(si, s)| {
            s.values
                .iter()
                .enumerate()
                .take_while(move |(_, &e)| e - e0 <= tol)
                .map(move |(k, _)| (si, k))
        })
        .collect();
    let pick = if lowest.len() == 1 {
        lowest[0]
    } else {
        let even: Vec<_> = lowest
            .iter()
            .copied()
            .filter(|&(si, _)| sectors[si].parity == Parity::Even)
            .collect();
        match even.as_slice() {
            [one] => *one,
            [] => {
                return Err(Error::ConventionViolation(format!(
                    "{}-fold degenerate ground level at lambda = {} has no even-parity member",
                    lowest.len(),
                    p.lambda
                )))
            }
            many => {
                return Err(Error::ConventionViolation(format!(
                    "ground level at lambda = {} has {} even-parity members",
                    p.lambda,
                    many.len()
                )))
            }
        }
    };
    let (si, k) = pick;
    sectors[si].embed(k, n).normalized()
}

pub fn ground_energy(p: &IsingParams) -> f64 {
    spectrum(p)[0]
}

/// A sign change between two continued branches of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    /// Crossing point, linearly interpolated between grid points (or the grid
    /// point itself when the two branches touch on the grid).
    pub lambda: f64,
    /// Branch labels, lower branch (before the crossing) first.
    pub branches: (usize, usize),
}

/// Spectra over a coupling grid, with branches continued by eigenvector
/// overlap.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTable {
    pub num_qubits: usize,
    pub lambda_grid: Vec<f64>,
    /// Ascending eigenvalues per grid point.
    pub levels: Vec<Vec<f64>>,
    /// `labels[k][j]` is the branch carrying `levels[k][j]`. Branches are
    /// numbered by their rank at the first grid point.
    pub labels: Vec<Vec<usize>>,
    pub crossings: Vec<Crossing>,
}

impl SpectrumTable {
    /// Number of levels at grid point `k` within `tol` of `energy`.
    pub fn multiplicity(&self, k: usize, energy: f64, tol: f64) -> usize {
        self.levels[k]
            .iter()
            .filter(|&&e| (e - energy).abs() <= tol)
            .count()
    }
}

pub fn spectrum_sweep(n: usize, lambda_grid: &[f64]) -> Result<SpectrumTable> {
    spectrum_sweep_with(n, lambda_grid, Execution::default())
}

/// Grid points solved concurrently per batch; bounds the number of
/// eigenvector sets held at once.
const SWEEP_BATCH: usize = 32;

pub fn spectrum_sweep_with(
    n: usize,
    lambda_grid: &[f64],
    exec: Execution,
) -> Result<SpectrumTable> {
    if lambda_grid.is_empty() {
        return Err(Error::invalid("empty lambda grid"));
    }
    if lambda_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::invalid("lambda grid must be strictly ascending"));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::ResourceLimit(format!("N = {n} exceeds {MAX_DENSE_QUBITS}")));
    }
    let params = lambda_grid
        .iter()
        .map(|&l| IsingParams::new(n, l))
        .collect::<Result<Vec<_>>>()?;

    let dim = 1usize << n;
    let mut tracker = BranchTracker::new(dim);
    let mut levels = Vec::with_capacity(params.len());
    let mut labels = Vec::with_capacity(params.len());
    for chunk in params.chunks(SWEEP_BATCH) {
        let solved = exec.map(chunk, |p| sector_eigens(p, true, Execution::Sequential));
        for (p, sectors) in chunk.iter().zip(solved) {
            let branch_energy = tracker.advance(p, sectors);
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&a, &b| branch_energy[a].total_cmp(&branch_energy[b]));
            levels.push(order.iter().map(|&b| branch_energy[b]).collect());
            labels.push(order);
        }
    }
    Ok(SpectrumTable {
        num_qubits: n,
        lambda_grid: lambda_grid.to_vec(),
        levels,
        labels,
        crossings: tracker.crossings,
    })
}

/// Sequential continuation of spectral branches across grid points.
struct BranchTracker {
    dim: usize,
    /// Previous sector data and the branch id of each sector level.
    previous: Option<([SectorEigen; 2], [Vec<usize>; 2])>,
    /// Last strictly signed `E_a - E_b` per pair (a < b), with its lambda.
    last_sign: Vec<i8>,
    last_diff: Vec<f64>,
    last_lambda: Vec<f64>,
    /// First grid point where the pair touched since the last signed point.
    touch: Vec<f64>,
    crossings: Vec<Crossing>,
}

impl BranchTracker {
    fn new(dim: usize) -> Self {
        let pairs = dim * dim;
        BranchTracker {
            dim,
            previous: None,
            last_sign: vec![0; pairs],
            last_diff: vec![0.0; pairs],
            last_lambda: vec![f64::NAN; pairs],
            touch: vec![f64::NAN; pairs],
            crossings: Vec::new(),
        }
    }

    /// Labels the new levels and returns the energy of every branch.
    fn advance(&mut self, p: &IsingParams, sectors: [SectorEigen; 2]) -> Vec<f64> {
        let ids: [Vec<usize>; 2] = match &self.previous {
            None => {
                let mut all: Vec<(f64, usize, usize)> = sectors
                    .iter()
                    .enumerate()
                    .flat_map(|(si, s)| s.values.iter().enumerate().map(move |(k, &e)| (e, si, k)))
                    .collect();
                all.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut ids = [vec![0; sectors[0].values.len()], vec![0; sectors[1].values.len()]];
                for (rank, &(_, si, k)) in all.iter().enumerate() {
                    ids[si][k] = rank;
                }
                ids
            }
            Some((prev, prev_ids)) => [0, 1].map(|si| {
                match_by_overlap(&prev[si], &sectors[si])
                    .into_iter()
                    .map(|old| prev_ids[si][old])
                    .collect()
            }),
        };
        let mut energy = vec![0.0; self.dim];
        for (si, s) in sectors.iter().enumerate() {
            for (k, &e) in s.values.iter().enumerate() {
                energy[ids[si][k]] = e;
            }
        }
        self.record_crossings(p, &energy);
        self.previous = Some((sectors, ids));
        energy
    }

    fn record_crossings(&mut self, p: &IsingParams, energy: &[f64]) {
        let tol = p.degeneracy_tol();
        let lambda = p.lambda();
        for a in 0..self.dim {
            for b in (a + 1)..self.dim {
                let slot = a * self.dim + b;
                let diff = energy[a] - energy[b];
                let sign = if diff.abs() <= tol { 0 } else { diff.signum() as i8 };
                if sign == 0 {
                    if self.last_sign[slot] != 0 && self.touch[slot].is_nan() {
                        self.touch[slot] = lambda;
                    }
                    continue;
                }
                let prev = self.last_sign[slot];
                if prev != 0 && prev != sign {
                    let at = if self.touch[slot].is_nan() {
                        let (l0, d0) = (self.last_lambda[slot], self.last_diff[slot]);
                        l0 + (lambda - l0) * d0 / (d0 - diff)
                    } else {
                        self.touch[slot]
                    };
                    let branches = if prev < 0 { (a, b) } else { (b, a) };
                    self.crossings.push(Crossing {
                        lambda: at,
                        branches,
                    });
                }
                self.last_sign[slot] = sign;
                self.last_diff[slot] = diff;
                self.last_lambda[slot] = lambda;
                self.touch[slot] = f64::NAN;
            }
        }
    }
}

/// For each level of `next`, the index of the `prev` level it continues.
/// Greedy assignment by descending squared overlap.
fn match_by_overlap(prev: &SectorEigen, next: &SectorEigen) -> Vec<usize> {
    let (pv, nv) = (
        prev.vectors.as_ref().expect("vectors"),
        next.vectors.as_ref().expect("vectors"),
    );
    let overlap = pv.transpose() * nv;
    let m = overlap.ncols();
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            entries.push((overlap[(i, j)].powi(2), i, j));
        }
    }
    entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_prev = vec![false; m];
    let mut assigned = vec![usize::MAX; m];
    let mut left = m;
    for (_, i, j) in entries {
        if left == 0 {
            break;
        }
        if used_prev[i] || assigned[j] != usize::MAX {
            continue;
        }
        used_prev[i] = true;
        assigned[j] = i;
        left -= 1;
    }
    assigned
}
