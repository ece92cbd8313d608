//! Closed-form special states of the ring.
//!
//! * the `lambda -> infinity` ground state (uniform superposition of
//!   even-weight basis states), which is a GHZ state in the `sx` basis;
//! * the zero-energy X-state of an odd ring `N = 2n + 1` at `lambda = 1`,
//!   `|X> = sum_{even sets} (-1)^{sum_{i<j} d(i,j)} |{i, j, ...}>`;
//! * its decomposition `|X> = sum_c |c>_O |alpha_c>` over a block `O` of `n`
//!   neighbouring qubits, and the unitary on the other `n + 1` qubits that
//!   turns `|X>` into `n` Bell pairs.
//!
//! Positions are 1-based; "contiguous" always includes blocks that wrap
//! around the ring.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{self, IsingParams, MAX_DENSE_QUBITS};
use crate::qcore::{self, max_abs, CMatrix, CVector, DensityMatrix, StateVector};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RingGeometry {
    num_qubits: usize,
}

impl RingGeometry {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits < 2 {
            return Err(Error::invalid(format!("ring needs N >= 2, got {num_qubits}")));
        }
        Ok(RingGeometry { num_qubits })
    }

    /// Odd ring `N = 2n + 1`.
    pub fn odd(num_qubits: usize) -> Result<Self> {
        if num_qubits < 3 || num_qubits.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "need an odd ring with N >= 3, got {num_qubits}"
            )));
        }
        Ok(RingGeometry { num_qubits })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// `n = (N - 1) / 2`.
    pub fn half(&self) -> usize {
        (self.num_qubits - 1) / 2
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<usize> {
        ring_distance(i, j, self.num_qubits)
    }

    /// `len` positions starting at `start`, wrapping around.
    pub fn block(&self, start: usize, len: usize) -> Result<Vec<usize>> {
        let n = self.num_qubits;
        if !(1..=n).contains(&start) || len > n {
            return Err(Error::invalid(format!(
                "block of {len} from {start} on a ring of {n}"
            )));
        }
        Ok((0..len).map(|k| (start - 1 + k) % n + 1).collect())
    }

    /// Reorders a set of positions into ring order starting at the block's
    /// first site. Fails if the positions do not form one arc.
    pub fn arc(&self, positions: &[usize]) -> Result<Vec<usize>> {
        let n = self.num_qubits;
        let mut inside = vec![false; n + 1];
        for &p in positions {
            if !(1..=n).contains(&p) || inside[p] {
                return Err(Error::invalid(format!("bad or repeated position {p}")));
            }
            inside[p] = true;
        }
        if positions.is_empty() {
            return Err(Error::invalid("empty block"));
        }
        if positions.len() == n {
            return self.block(1, n);
        }
        let starts: Vec<usize> = (1..=n)
            .filter(|&p| inside[p] && !inside[(p + n - 2) % n + 1])
            .collect();
        if starts.len() != 1 {
            return Err(Error::invalid(format!(
                "positions {positions:?} are not contiguous on the ring"
            )));
        }
        self.block(starts[0], positions.len())
    }
}

/// Shortest arc between positions `i` and `j` on a ring of `n` sites.
pub fn ring_distance(i: usize, j: usize, n: usize) -> Result<usize> {
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::invalid(format!(
            "positions ({i},{j}) outside 1..={n}"
        )));
    }
    let d = i.abs_diff(j);
    Ok(d.min(n - d))
}

/// Sum of `d(i,j)` over unordered pairs of `positions`.
fn distance_sum(positions: &[usize], n: usize) -> usize {
    let mut s = 0;
    for (a, &i) in positions.iter().enumerate() {
        for &j in &positions[a + 1..] {
            s += ring_distance(i, j, n).expect("positions in range");
        }
    }
    s
}

/// Sum of `d(a,b)` over `a` in `left`, `b` in `right`.
fn cross_distance_sum(left: &[usize], right: &[usize], n: usize) -> usize {
    left.iter()
        .flat_map(|&a| right.iter().map(move |&b| ring_distance(a, b, n).expect("in range")))
        .sum()
}

fn sign(exponent: usize) -> f64 {
    if exponent.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Positions (from `sites`) of the up qubits in `config`, a `sites.len()`-bit
/// index with `sites[0]` as the most significant bit.
fn up_positions(config: usize, sites: &[usize]) -> Vec<usize> {
    let w = sites.len();
    sites
        .iter()
        .enumerate()
        .filter(|(k, _)| config >> (w - 1 - k) & 1 == 1)
        .map(|(_, &p)| p)
        .collect()
}

fn ring_sites(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

fn dense_guard(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS + 6 {
        return Err(Error::ResourceLimit(format!("N = {n} is too large")));
    }
    Ok(())
}

/// Uniform superposition of every even-weight basis state, the
/// `lambda -> infinity` ground state.
pub fn ghz_limit_state(n: usize) -> Result<StateVector> {
    RingGeometry::new(n)?;
    dense_guard(n)?;
    let amp = 1.0 / ((1usize << (n - 1)) as f64).sqrt();
    let amps = (0..1usize << n)
        .map(|i| if qcore::weight(i).is_multiple_of(2) { amp } else { 0.0 })
        .collect::<Vec<_>>();
    StateVector::from_real(n, &amps)
}

/// `H^{⊗N}` by the fast Walsh-Hadamard transform.
pub fn hadamard_all(psi: &StateVector) -> StateVector {
    let mut a: CVector = psi.amplitudes().clone();
    let dim = a.len();
    let mut h = 1;
    while h < dim {
        for block in (0..dim).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (a[i], a[i + h]);
                a[i] = x + y;
                a[i + h] = x - y;
            }
        }
        h *= 2;
    }
    a.unscale_mut((dim as f64).sqrt());
    StateVector::from_vector(psi.num_qubits(), a).expect("same register")
}

/// `(|0...0> + |1...1>) / sqrt 2`.
pub fn ghz_standard(n: usize) -> Result<StateVector> {
    let mut psi = StateVector::zeros(n)?;
    let dim = psi.dim();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = psi.amplitudes().clone();
    amps[0] = C64::from(h);
    amps[dim - 1] = C64::from(h);
    psi = StateVector::from_vector(n, amps)?;
    Ok(psi)
}

/// `|<GHZ| H^{⊗N} |psi>|^2`: rotates every qubit from the `sx` to the `sz`
/// basis and compares with the standard GHZ state.
pub fn ghz_equivalence_check(psi: &StateVector) -> Result<f64> {
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > qcore::NORM_TOL {
        return Err(Error::invalid(format!("state is not normalized (|psi|^2 = {norm})")));
    }
    let rotated = hadamard_all(psi);
    Ok(ghz_standard(psi.num_qubits())?.inner(&rotated)?.norm_sqr())
}

/// Normalized X-state of an odd ring. The amplitude on `|0...0>` is
/// `+1 / 2^n`.
pub fn xstate(n: usize) -> Result<StateVector> {
    let ring = RingGeometry::odd(n)?;
    dense_guard(n)?;
    let sites = ring_sites(n);
    let scale = 1.0 / (1usize << ring.half()) as f64;
    let amps: Vec<f64> = (0..1usize << n)
        .map(|i| {
            if qcore::weight(i) % 2 == 1 {
                return 0.0;
            }
            scale * sign(distance_sum(&up_positions(i, &sites), n))
        })
        .collect();
    StateVector::from_real(n, &amps)
}

/// `max |rho_block - 1/2^k|` for a contiguous block of `k <= n` qubits of an
/// `N = 2n + 1` qubit state.
pub fn verify_block_mixedness(psi: &StateVector, block: &[usize]) -> Result<f64> {
    let ring = RingGeometry::odd(psi.num_qubits())?;
    let arc = ring.arc(block)?;
    if arc.len() > ring.half() {
        return Err(Error::invalid(format!(
            "block of {} qubits exceeds n = {}",
            arc.len(),
            ring.half()
        )));
    }
    let rho = psi.reduced_density(&arc)?;
    Ok(rho.max_abs_diff(&DensityMatrix::maximally_mixed(arc.len())))
}

/// Largest deviation from maximal mixedness over every contiguous block of
/// size `k`, `1 <= k <= n`. Entry `k - 1` belongs to size `k`.
pub fn all_block_deviations(psi: &StateVector) -> Result<Vec<f64>> {
    let ring = RingGeometry::odd(psi.num_qubits())?;
    (1..=ring.half())
        .map(|k| {
            (1..=ring.num_qubits())
                .map(|start| verify_block_mixedness(psi, &ring.block(start, k)?))
                .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
        })
        .collect()
}

/// Components of the X-state relative to a block `O` of `n` neighbouring
/// qubits.
#[derive(Debug, Clone)]
pub struct AlphaFamily {
    num_qubits: usize,
    /// `O` in ring order.
    region: Vec<usize>,
    /// The other `n + 1` positions, in ring order following `O`.
    complement: Vec<usize>,
    /// `vectors[c]` is the unnormalized `|alpha_c>` on the complement;
    /// `c` is an `n`-bit configuration of `O`, first site most significant.
    vectors: Vec<StateVector>,
}

impl AlphaFamily {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn region(&self) -> &[usize] {
        &self.region
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn gram(&self) -> CMatrix {
        let m = self.vectors.len();
        CMatrix::from_fn(m, m, |a, b| {
            self.vectors[a].inner(&self.vectors[b]).expect("same register")
        })
    }

    /// `max |G - 2^n 1|`.
    pub fn gram_deviation(&self) -> f64 {
        let g = self.gram();
        let m = g.nrows();
        max_abs(&(g - CMatrix::identity(m, m) * C64::from(m as f64)))
    }

    /// `sum_c |c>_O |alpha_c>`, unnormalized, in ring order.
    pub fn reassemble(&self) -> Result<StateVector> {
        let stacked = self.stacked()?;
        let order: Vec<usize> = self.region.iter().chain(&self.complement).copied().collect();
        // qubit k of `stacked` sits at ring position order[k-1]; invert
        let mut back = vec![0; self.num_qubits];
        for (k, &pos) in order.iter().enumerate() {
            back[pos - 1] = k + 1;
        }
        stacked.permute_qubits(&back)
    }

    /// `sum_c |c>_O |alpha_c>` with `O` leading.
    fn stacked(&self) -> Result<StateVector> {
        let d = 1usize << self.complement.len();
        let mut amps = CVector::zeros(d * self.vectors.len());
        for (c, v) in self.vectors.iter().enumerate() {
            amps.rows_mut(c * d, d).copy_from(v.amplitudes());
        }
        StateVector::from_vector(self.num_qubits, amps)
    }
}

/// The family `{|alpha_c>}` for region `O`, built from
/// `(-1)^{d_c + d_k + d_{c,k}}` over complement configurations `k` of the
/// same weight parity as `c`.
pub fn alpha_family(n: usize, region: &[usize]) -> Result<AlphaFamily> {
    let ring = RingGeometry::odd(n)?;
    dense_guard(n)?;
    if region.len() != ring.half() {
        return Err(Error::invalid(format!(
            "region has {} sites, need n = {}",
            region.len(),
            ring.half()
        )));
    }
    let region = ring.arc(region)?;
    let last = *region.last().expect("n >= 1");
    let complement = ring.block(last % n + 1, n - region.len())?;
    let vectors = (0..1usize << region.len())
        .map(|c| {
            let ups_o = up_positions(c, &region);
            let d_in = distance_sum(&ups_o, n);
            let amps: Vec<f64> = (0..1usize << complement.len())
                .map(|k| {
                    if (qcore::weight(k) + qcore::weight(c)) % 2 == 1 {
                        return 0.0;
                    }
                    let ups_b = up_positions(k, &complement);
                    sign(d_in + distance_sum(&ups_b, n) + cross_distance_sum(&ups_o, &ups_b, n))
                })
                .collect();
            StateVector::from_real(complement.len(), &amps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaFamily {
        num_qubits: n,
        region,
        complement,
        vectors,
    })
}

/// Orthogonality threshold on the normalized alpha Gram matrix.
const ALPHA_ORTHO_TOL: f64 = 1e-9;

/// Unitary on the `n + 1` complement qubits sending `|alpha_c> / 2^{n/2}` to
/// `|c> ⊗ |0>`. The orthogonal complement, obtained by Gram-Schmidt on the
/// computational basis in index order, goes to `|k> ⊗ |1>`.
pub fn bob_extraction_unitary(family: &AlphaFamily) -> Result<CMatrix> {
    let m = family.vectors.len();
    let dim = 2 * m;
    let scale = (m as f64).sqrt();
    let mut basis: Vec<CVector> = family
        .vectors
        .iter()
        .map(|v| v.amplitudes().unscale(scale))
        .collect();
    let g = CMatrix::from_fn(m, m, |a, b| basis[a].dotc(&basis[b]));
    if max_abs(&(g - CMatrix::identity(m, m))) > ALPHA_ORTHO_TOL {
        return Err(Error::InternalConsistency(
            "alpha vectors are not orthonormal after scaling".into(),
        ));
    }
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = CVector::zeros(dim);
        v[e] = C64::from(1.0);
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v.unscale(norm));
        }
    }
    if basis.len() != dim {
        return Err(Error::InternalConsistency("orthonormal completion failed".into()));
    }
    // U = sum_j |target_j><basis_j|; alpha_c -> 2c (|c>|0>), extra k -> 2k + 1
    let mut u = CMatrix::zeros(dim, dim);
    for (j, b) in basis.iter().enumerate() {
        let target = if j < m { 2 * j } else { 2 * (j - m) + 1 };
        for col in 0..dim {
            u[(target, col)] = b[col].conj();
        }
    }
    Ok(u)
}

/// `(1 ⊗ U_B) |X>` with qubits ordered `[O..., complement...]`.
pub fn apply_extraction(family: &AlphaFamily, u: &CMatrix) -> Result<StateVector> {
    let x = xstate(family.num_qubits)?;
    let order: Vec<usize> = family.region.iter().chain(&family.complement).copied().collect();
    let x = x.permute_qubits(&order)?;
    let d = 1usize << family.complement.len();
    let mut out = x.amplitudes().clone();
    for c in 0..family.vectors.len() {
        let slice = x.amplitudes().rows(c * d, d).into_owned();
        out.rows_mut(c * d, d).copy_from(&(u * slice));
    }
    StateVector::from_vector(family.num_qubits, out)
}

/// `sum_c |c>_A |c> |0> / 2^{n/2}`: `n` Bell pairs between Alice's block and
/// the first `n` of Bob's qubits, Bob's last qubit in `|0>`.
pub fn shared_bell_pairs(n_pairs: usize) -> Result<StateVector> {
    let m = 1usize << n_pairs;
    let mut amps = CVector::zeros(m * m * 2);
    let a = 1.0 / (m as f64).sqrt();
    for c in 0..m {
        amps[c * 2 * m + 2 * c] = C64::from(a);
    }
    StateVector::from_vector(2 * n_pairs + 1, amps)
}

/// Fidelity of the extracted state with `n` Bell pairs ⊗ `|0>`.
pub fn bell_extraction_fidelity(family: &AlphaFamily) -> Result<f64> {
    let u = bob_extraction_unitary(family)?;
    let out = apply_extraction(family, &u)?;
    out.fidelity(&shared_bell_pairs(family.region.len())?)
}

/// One tracked eigenstate per grid point.
#[derive(Debug, Clone)]
pub struct XTrack {
    pub num_qubits: usize,
    pub lambdas: Vec<f64>,
    pub energies: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `|<previous|current>|` at each step; 1 at the seed point.
    pub overlaps: Vec<f64>,
}

impl XTrack {
    pub fn pair_concurrence(&self, i: usize, j: usize) -> Result<Vec<f64>> {
        self.states
            .iter()
            .map(|s| crate::entanglement::pair_concurrence(s, i, j))
            .collect()
    }
}

/// Two candidate overlaps closer than this make continuation ambiguous.
const TRACK_AMBIGUITY: f64 = 1e-6;

/// Follows the X-state away from `lambda = 1` by maximal overlap.
///
/// At each grid point the eigenvectors are grouped into degenerate levels
/// and the level with the largest projection of the previous state wins; the
/// new state is that projection, normalized and phased so that
/// `<previous|current> > 0`.
pub fn xstate_track(n: usize, lambda_grid: &[f64]) -> Result<XTrack> {
    RingGeometry::odd(n)?;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::ResourceLimit(format!("N = {n} exceeds {MAX_DENSE_QUBITS}")));
    }
    if lambda_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::invalid("lambda grid must be strictly ascending"));
    }
    let seed = lambda_grid
        .iter()
        .position(|&l| (l - 1.0).abs() < 1e-12)
        .ok_or_else(|| Error::invalid("grid must contain lambda = 1"))?;

    let len = lambda_grid.len();
    let mut states: Vec<Option<(f64, StateVector, f64)>> = vec![None; len];
    let x = xstate(n)?;
    states[seed] = Some(step(n, lambda_grid[seed], &x)?);
    states[seed].as_mut().expect("just set").2 = 1.0;
    for k in seed + 1..len {
        let prev = states[k - 1].as_ref().expect("filled").1.clone();
        states[k] = Some(step(n, lambda_grid[k], &prev)?);
    }
    for k in (0..seed).rev() {
        let prev = states[k + 1].as_ref().expect("filled").1.clone();
        states[k] = Some(step(n, lambda_grid[k], &prev)?);
    }
    let mut track = XTrack {
        num_qubits: n,
        lambdas: lambda_grid.to_vec(),
        energies: Vec::with_capacity(len),
        states: Vec::with_capacity(len),
        overlaps: Vec::with_capacity(len),
    };
    for s in states {
        let (e, psi, o) = s.expect("every grid point visited");
        track.energies.push(e);
        track.states.push(psi);
        track.overlaps.push(o);
    }
    Ok(track)
}

fn step(n: usize, lambda: f64, prev: &StateVector) -> Result<(f64, StateVector, f64)> {
    let p = IsingParams::new(n, lambda)?;
    let es = hamiltonian::eigensystem(&p);
    let tol = p.degeneracy_tol();
    let values = es.eigenvalues();
    // (projection norm, level mean energy, projected vector)
    let mut candidates: Vec<(f64, f64, CVector)> = Vec::new();
    let mut k = 0;
    while k < values.len() {
        let mut end = k + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        let mut proj = CVector::zeros(prev.dim());
        for j in k..end {
            let v = es.vector(j);
            proj += &v * v.dotc(prev.amplitudes());
        }
        let mean = values[k..end].iter().sum::<f64>() / (end - k) as f64;
        candidates.push((proj.norm(), mean, proj));
        k = end;
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    if candidates.len() > 1 && candidates[0].0 - candidates[1].0 < TRACK_AMBIGUITY {
        return Err(Error::TrackingFailure(format!(
            "at lambda = {lambda}: overlaps {:.3e} and {:.3e} at energies {} and {} are indistinguishable",
            candidates[0].0, candidates[1].0, candidates[0].1, candidates[1].1
        )));
    }
    let (overlap, energy, proj) = candidates.swap_remove(0);
    let mut psi = StateVector::from_vector(n, proj)?.normalized()?;
    let phase = psi.inner(prev)?;
    psi.scale(phase / phase.norm());
    Ok((energy, psi, overlap / prev.norm_sqr().sqrt()))
}

/// Residual `||H(lambda = 1) |X>||`.
pub fn xstate_residual(n: usize) -> Result<f64> {
    let x = xstate(n)?;
    let p = IsingParams::new(n, 1.0)?;
    Ok(hamiltonian::apply_hamiltonian(&p, &x)?.norm_sqr().sqrt())
}
