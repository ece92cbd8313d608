//! Concurrence, tangle, three-tangle and von Neumann entropy.

use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{clip_psd, ops, CMatrix, DensityMatrix, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Concurrence,
    Tangle,
    ThreeTangle,
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureValue {
    pub kind: MeasureKind,
    pub value: f64,
}

impl MeasureValue {
    /// Checks the range of the measure: `[0, 1]` for the first three kinds,
    /// non-negative for entropy.
    pub fn new(kind: MeasureKind, value: f64) -> Result<Self> {
        const SLACK: f64 = 1e-9;
        let ok = match kind {
            MeasureKind::Entropy => value >= -SLACK,
            _ => (-SLACK..=1.0 + SLACK).contains(&value),
        };
        if !ok || !value.is_finite() {
            return Err(Error::NumericalFailure(format!("{kind:?} out of range: {value}")));
        }
        Ok(MeasureValue { kind, value })
    }
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.num_qubits() != 2 {
        return Err(Error::invalid(format!(
            "expected a two-qubit density matrix, got {} qubits",
            rho.num_qubits()
        )));
    }
    Ok(())
}

/// `(sy ⊗ sy) rho* (sy ⊗ sy)`.
pub fn spin_flip(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_two_qubits(rho)?;
    let yy = ops::kron(&ops::pauli_y(), &ops::pauli_y());
    let flipped = &yy * rho.elements().conjugate() * &yy;
    Ok(DensityMatrix::from_trusted(2, flipped))
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

/// Wootters concurrence `max(0, s_1 - s_2 - s_3 - s_4)`, where `s_k^2` are
/// the eigenvalues of `rho rho~` in decreasing order.
///
/// `rho rho~` is similar to the Hermitian `sqrt(rho) rho~ sqrt(rho) = A A^dagger`
/// with `A = sqrt(rho) sqrt(rho~)`, so the `s_k` are the singular values of
/// `A`. Taking them from an SVD keeps roundoff in the small `s_k` at machine
/// precision instead of its square root.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let eig = SymmetricEigen::new(hermitian_part(rho.elements()));
    let mut sqrt_rho = eig.eigenvectors.clone();
    for (k, &p) in eig.eigenvalues.iter().enumerate() {
        let p = clip_psd(p, "density matrix")?;
        sqrt_rho.column_mut(k).scale_mut(p.sqrt());
    }
    let sqrt_rho = sqrt_rho * eig.eigenvectors.adjoint();
    let yy = ops::kron(&ops::pauli_y(), &ops::pauli_y());
    let sqrt_flipped = &yy * sqrt_rho.conjugate() * &yy;
    let mut roots: Vec<f64> = (sqrt_rho * sqrt_flipped)
        .singular_values()
        .iter()
        .copied()
        .collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    let c = roots[0] - roots[1] - roots[2] - roots[3];
    Ok(c.clamp(0.0, 1.0))
}

/// `4 det rho_A` of qubit `qubit` of a pure state.
pub fn tangle(psi: &StateVector, qubit: usize) -> Result<f64> {
    let rho = psi.reduced_density(&[qubit])?;
    let m = rho.elements();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    Ok((4.0 * det).clamp(0.0, 1.0))
}

/// Concurrence of the pair `(i, j)` of a pure state.
pub fn pair_concurrence(psi: &StateVector, i: usize, j: usize) -> Result<f64> {
    concurrence(&psi.reduced_density(&[i, j])?)
}

/// Residual entanglement `tau_A - C_AB^2 - C_AC^2` with `A` = qubit 1.
pub fn three_tangle(psi: &StateVector) -> Result<f64> {
    three_tangle_anchored(psi, 1)
}

/// Residual entanglement anchored on an arbitrary qubit of a three-qubit
/// pure state.
pub fn three_tangle_anchored(psi: &StateVector, anchor: usize) -> Result<f64> {
    if psi.num_qubits() != 3 {
        return Err(Error::invalid(format!(
            "three-tangle needs 3 qubits, got {}",
            psi.num_qubits()
        )));
    }
    if !(1..=3).contains(&anchor) {
        return Err(Error::invalid(format!("anchor qubit {anchor} outside 1..=3")));
    }
    let others: Vec<usize> = (1..=3).filter(|&q| q != anchor).collect();
    let tau = tangle(psi, anchor)?;
    let c1 = pair_concurrence(psi, anchor, others[0])?;
    let c2 = pair_concurrence(psi, anchor, others[1])?;
    Ok(tau - c1 * c1 - c2 * c2)
}

/// `-sum p ln p` over the spectrum (natural log, `0 ln 0 = 0`).
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho
        .eigenvalues()?
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

/// Convenience: `(|00> + |11>) / sqrt 2`.
pub fn bell_state() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::new(
        2,
        vec![C64::from(h), C64::from(0.0), C64::from(0.0), C64::from(h)],
    )
    .expect("two qubits")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::CVector;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn mixed4() -> DensityMatrix {
        DensityMatrix::maximally_mixed(2)
    }

    #[test]
    fn spin_flip_examples() {
        let id = mixed4();
        assert!(spin_flip(&id).unwrap().max_abs_diff(&id) < 1e-15);
        let bell = bell_state().to_density().unwrap();
        assert!(spin_flip(&bell).unwrap().max_abs_diff(&bell) < 1e-15);
        // corners and centre block of 1/4
        let mut m = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3), (1, 1), (1, 2), (2, 1), (2, 2)] {
            m[(i, j)] = C64::from(0.25);
        }
        let ghz_pair = DensityMatrix::new(2, m).unwrap();
        assert!(spin_flip(&ghz_pair).unwrap().max_abs_diff(&ghz_pair) < 1e-15);
    }

    #[test]
    fn spin_flip_wrong_size() {
        let one = DensityMatrix::maximally_mixed(1);
        assert!(matches!(spin_flip(&one), Err(Error::InvalidInput(_))));
        assert!(concurrence(&one).is_err());
    }

    #[test]
    fn concurrence_examples() {
        let bell = bell_state().to_density().unwrap();
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        assert!(concurrence(&mixed4()).unwrap().abs() < 1e-12);
        let product = StateVector::from_bits(&[0, 1]).unwrap().to_density().unwrap();
        assert!(concurrence(&product).unwrap().abs() < 1e-12);
    }

    #[test]
    fn werner_state_concurrence() {
        // p |Bell><Bell| + (1 - p) 1/4 has C = max(0, (3p - 1) / 2).
        let bell = bell_state().to_density().unwrap();
        for &p in &[0.2, 1.0 / 3.0, 0.5, 0.8] {
            let m = bell.elements() * C64::from(p) + mixed4().elements() * C64::from(1.0 - p);
            let c = concurrence(&DensityMatrix::new(2, m).unwrap()).unwrap();
            assert!((c - ((3.0 * p - 1.0) / 2.0).max(0.0)).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn tangle_examples() {
        let product = StateVector::from_bits(&[0, 0, 0]).unwrap();
        assert!(tangle(&product, 1).unwrap().abs() < 1e-15);
        let g1 = StateVector::from_real(3, &[0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!((tangle(&g1, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(tangle(&g1, 4).is_err());
    }

    #[test]
    fn three_tangle_examples() {
        let product = StateVector::from_bits(&[0, 0, 0]).unwrap();
        assert!(three_tangle(&product).unwrap().abs() < 1e-12);
        let s = 1.0 / 3f64.sqrt();
        let w = StateVector::from_real(3, &[0.0, s, s, 0.0, s, 0.0, 0.0, 0.0]).unwrap();
        // tangle 8/9, each pair concurrence 2/3
        assert!((tangle(&w, 1).unwrap() - 8.0 / 9.0).abs() < 1e-12);
        assert!((pair_concurrence(&w, 1, 2).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert!(three_tangle(&w).unwrap().abs() < 1e-9);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ghz = StateVector::from_real(3, &[h, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, h]).unwrap();
        assert!((three_tangle(&ghz).unwrap() - 1.0).abs() < 1e-9);
        assert!(three_tangle(&bell_state()).is_err());
    }

    #[test]
    fn entropy_examples() {
        let pure = bell_state().to_density().unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        for n in 1..=3 {
            let s = von_neumann_entropy(&DensityMatrix::maximally_mixed(n)).unwrap();
            assert!((s - n as f64 * LN_2).abs() < 1e-12);
        }
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::from(0.75), C64::from(0.25)]));
        let s = von_neumann_entropy(&DensityMatrix::new(1, d).unwrap()).unwrap();
        assert!((s - (-0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn measure_value_ranges() {
        assert!(MeasureValue::new(MeasureKind::Concurrence, 0.5).is_ok());
        assert!(MeasureValue::new(MeasureKind::Tangle, 1.5).is_err());
        assert!(MeasureValue::new(MeasureKind::Entropy, 3.0).is_ok());
        assert!(MeasureValue::new(MeasureKind::Entropy, -0.1).is_err());
    }

    fn arb_state(n: usize) -> impl Strategy<Value = StateVector> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
            "nonzero",
            move |v| {
                let psi = StateVector::new(n, v.into_iter().map(|(r, i)| C64::new(r, i)).collect())
                    .ok()?;
                (psi.norm_sqr() > 1e-3).then(|| psi.normalized().unwrap())
            },
        )
    }

    /// Random SU(2) element from Euler angles.
    fn su2(a: f64, b: f64, c: f64) -> CMatrix {
        let (s, co) = (b / 2.0).sin_cos();
        let e = |t: f64| C64::from_polar(1.0, t);
        CMatrix::from_row_slice(
            2,
            2,
            &[
                e(-(a + c) / 2.0) * co,
                -e(-(a - c) / 2.0) * s,
                e((a - c) / 2.0) * s,
                e((a + c) / 2.0) * co,
            ],
        )
    }

    proptest! {
        #[test]
        fn pure_two_qubit_tangle_is_squared_concurrence(psi in arb_state(2)) {
            let c = concurrence(&psi.to_density().unwrap()).unwrap();
            let t = tangle(&psi, 1).unwrap();
            prop_assert!((t - c * c).abs() < 1e-9);
        }

        #[test]
        fn three_tangle_permutation_invariant(psi in arb_state(3)) {
            let base = three_tangle(&psi).unwrap();
            prop_assert!(base >= -1e-9);
            for anchor in 2..=3 {
                prop_assert!((three_tangle_anchored(&psi, anchor).unwrap() - base).abs() < 1e-9);
            }
            for order in [[1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]] {
                let permuted = psi.permute_qubits(&order).unwrap();
                prop_assert!((three_tangle(&permuted).unwrap() - base).abs() < 1e-9);
            }
        }

        #[test]
        fn local_unitary_invariance(
            psi in arb_state(3),
            angles in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 9),
        ) {
            let u = (0..3)
                .map(|k| su2(angles[3 * k], angles[3 * k + 1], angles[3 * k + 2]))
                .reduce(|a, b| ops::kron(&a, &b))
                .unwrap();
            let phi = psi.apply(&u).unwrap();
            for (i, j) in [(1, 2), (1, 3), (2, 3)] {
                let a = pair_concurrence(&psi, i, j).unwrap();
                let b = pair_concurrence(&phi, i, j).unwrap();
                prop_assert!((a - b).abs() < 1e-9);
            }
            for q in 1..=3 {
                prop_assert!((tangle(&psi, q).unwrap() - tangle(&phi, q).unwrap()).abs() < 1e-9);
            }
        }

        #[test]
        fn spin_flip_is_an_involution(psi in arb_state(3)) {
            let rho = psi.reduced_density(&[1, 3]).unwrap();
            let back = spin_flip(&spin_flip(&rho).unwrap()).unwrap();
            prop_assert!(back.max_abs_diff(&rho) < 1e-12);
        }
    }
}
