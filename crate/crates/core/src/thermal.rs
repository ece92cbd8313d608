//! Gibbs states `rho(T) = sum_i w_i |e_i><e_i|`, `w_i ∝ exp(-E_i / T)`,
//! with Boltzmann constant 1.

use serde::Serialize;

use crate::entanglement;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hamiltonian::{self, IsingParams, MAX_DENSE_QUBITS};
use crate::qcore::{CMatrix, DensityMatrix, EigenSystem, StateVector};
use crate::sweep::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalParams {
    ising: IsingParams,
    temperature: f64,
}

impl ThermalParams {
    pub fn new(ising: IsingParams, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        Ok(ThermalParams { ising, temperature })
    }

    pub fn ising(&self) -> &IsingParams {
        &self.ising
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!(
            "temperature must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// Normalized Boltzmann weights. Energies are shifted by their minimum
/// before exponentiation so that small `T` cannot overflow.
pub fn boltzmann_weights(energies: &[f64], temperature: f64) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    if energies.is_empty() {
        return Err(Error::invalid("no energy levels"));
    }
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = energies
        .iter()
        .map(|&e| (-(e - e_min) / temperature).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    Ok(w)
}

pub fn gibbs_state(p: &ThermalParams) -> Result<DensityMatrix> {
    dense_guard(p.ising.num_qubits())?;
    gibbs_from_eigensystem(&hamiltonian::eigensystem(&p.ising), p.temperature)
}

/// `V diag(w) V^dagger` for the eigenbasis `V` of any Hamiltonian.
pub fn gibbs_from_eigensystem(es: &EigenSystem, temperature: f64) -> Result<DensityMatrix> {
    let w = boltzmann_weights(es.eigenvalues(), temperature)?;
    let v = es.eigenvectors();
    let mut scaled: CMatrix = v.clone();
    for (k, &wk) in w.iter().enumerate() {
        scaled.column_mut(k).scale_mut(wk);
    }
    let n = es.len().trailing_zeros() as usize;
    DensityMatrix::new(n, scaled * v.adjoint())
}

/// Two-qubit marginal of the Gibbs state, accumulated level by level
/// without forming the full `2^N x 2^N` matrix.
pub fn gibbs_pair_marginal(
    es: &EigenSystem,
    temperature: f64,
    i: usize,
    j: usize,
) -> Result<DensityMatrix> {
    let w = boltzmann_weights(es.eigenvalues(), temperature)?;
    let n = es.len().trailing_zeros() as usize;
    let mut acc = CMatrix::zeros(4, 4);
    for (k, &wk) in w.iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        let psi = StateVector::from_vector(n, es.vector(k))?;
        acc += psi.reduced_density(&[i, j])?.elements() * crate::C64::from(wk);
    }
    DensityMatrix::new(2, acc)
}

fn dense_guard(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "N = {n} exceeds the dense limit of {MAX_DENSE_QUBITS} qubits"
        )));
    }
    Ok(())
}

fn check_pair(n: usize, (i, j): (usize, usize)) -> Result<()> {
    if i == j || !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::invalid(format!("pair ({i},{j}) invalid for {n} qubits")));
    }
    Ok(())
}

/// Pair concurrence over a `(lambda, T)` grid. Rows are `(lambda, T, C)`,
/// lambda-major.
pub fn thermal_sweep(
    n: usize,
    lambda_grid: &[f64],
    t_grid: &[f64],
    pair: (usize, usize),
) -> Result<SweepResult> {
    thermal_sweep_with(n, lambda_grid, t_grid, pair, Execution::default())
}

pub fn thermal_sweep_with(
    n: usize,
    lambda_grid: &[f64],
    t_grid: &[f64],
    pair: (usize, usize),
    exec: Execution,
) -> Result<SweepResult> {
    if lambda_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    dense_guard(n)?;
    check_pair(n, pair)?;
    for &t in t_grid {
        check_temperature(t)?;
    }
    let params = lambda_grid
        .iter()
        .map(|&l| IsingParams::new(n, l))
        .collect::<Result<Vec<_>>>()?;
    let blocks = exec.try_map(&params, |p| {
        let es = hamiltonian::eigensystem(p);
        t_grid
            .iter()
            .map(|&t| entanglement::concurrence(&gibbs_pair_marginal(&es, t, pair.0, pair.1)?))
            .collect::<Result<Vec<f64>>>()
    })?;

    let mut out = SweepResult::new("thermal", &["lambda", "temperature", "concurrence"])
        .with_meta("num_qubits", n)
        .with_meta("pair", format!("{},{}", pair.0, pair.1))
        .with_meta("lambda_points", lambda_grid.len())
        .with_meta("temperature_points", t_grid.len());
    for (&lambda, cs) in lambda_grid.iter().zip(blocks) {
        for (&t, c) in t_grid.iter().zip(cs) {
            out.push(vec![lambda.into(), t.into(), c.into()])?;
        }
    }
    out.check_row_count(lambda_grid.len() * t_grid.len())?;
    Ok(out)
}
