//! Exact spectral and entanglement analysis of the finite transverse-field
//! Ising ring
//!
//! ```text
//! H = E * ( -lambda * sum_n sx_n sx_{n+1} + sum_n sz_n ),   sx_{N+1} = sx_1
//! ```
//!
//! The crate provides two independent routes to the spectrum (dense
//! diagonalization in [`hamiltonian`] and the Jordan-Wigner free-fermion
//! solution in [`freefermion`]), the standard entanglement measures in
//! [`entanglement`], Gibbs states in [`thermal`] and the closed-form special
//! states (GHZ limit, zero-energy X-state, Bell-pair extraction) in
//! [`specialstates`].
//!
//! Qubit 1 is the most significant bit of a basis index, so `|011>` of a
//! three-qubit register is index 3. A qubit that is "up" is `|1>`, the `+1`
//! eigenstate of `sz`.

pub mod cli;
pub mod entanglement;
pub mod error;
pub mod exec;
pub mod freefermion;
pub mod hamiltonian;
pub mod qcore;
pub mod specialstates;
pub mod sweep;
pub mod thermal;

pub use error::{Error, Result};
pub use exec::Execution;
pub use hamiltonian::IsingParams;
pub use qcore::{DensityMatrix, EigenSystem, StateVector};

pub use num_complex::Complex64 as C64;
