//! Analytic spectrum of the Ising ring from the Jordan-Wigner solution.
//!
//! After the Jordan-Wigner and Fourier transformations the Hamiltonian
//! splits into independent momentum blocks. Paired momenta `(q, 2pi - q)`
//! give a 4x4 block on `{eta_q^+|0>, eta_{2pi-q}^+|0>, |0>, eta_{2pi-q}^+ eta_q^+|0>}`;
//! `q = 0` and `q = pi` give 2x2 blocks on `{|0>, eta_q^+|0>}`.
//!
//! Odd fermion number goes with the cyclic momentum grid `q = 2 pi l / N`,
//! even fermion number with the anticyclic grid `q = pi (2l + 1) / N`. Only
//! block selections whose total fermion parity matches the grid are
//! eigenstates; together the two sectors give all `2^N` levels.
//!
//! The module works with `E = 1`; multiply by the energy scale otherwise.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sector {
    /// `e^{iqN} = 1`, odd fermion number.
    Cyclic,
    /// `e^{iqN} = -1`, even fermion number.
    Anticyclic,
}

impl Sector {
    /// Fermion-number parity (0 even, 1 odd) of the states this grid describes.
    pub fn fermion_parity(self) -> u8 {
        match self {
            Sector::Cyclic => 1,
            Sector::Anticyclic => 0,
        }
    }
}

/// A momentum stored as `q = pi * numerator / N`, `numerator` in `0..2N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Momentum {
    pub numerator: usize,
    pub num_sites: usize,
}

impl Momentum {
    pub fn value(self) -> f64 {
        PI * self.numerator as f64 / self.num_sites as f64
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn is_pi(self) -> bool {
        self.numerator == self.num_sites
    }

    /// `2 pi - q`, reduced to `[0, 2 pi)`.
    pub fn partner(self) -> Momentum {
        Momentum {
            numerator: (2 * self.num_sites - self.numerator) % (2 * self.num_sites),
            num_sites: self.num_sites,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumSector {
    pub sector: Sector,
    pub momenta: Vec<Momentum>,
}

impl MomentumSector {
    /// Momentum values in `[0, 2 pi)`.
    pub fn q_values(&self) -> Vec<f64> {
        self.momenta.iter().map(|m| m.value()).collect()
    }
}

pub fn momentum_values(n: usize, sector: Sector) -> Result<MomentumSector> {
    if n < 2 {
        return Err(Error::invalid(format!("ring needs N >= 2, got {n}")));
    }
    let momenta = (0..n)
        .map(|l| Momentum {
            numerator: match sector {
                Sector::Cyclic => 2 * l,
                Sector::Anticyclic => 2 * l + 1,
            },
            num_sites: n,
        })
        .collect();
    Ok(MomentumSector { sector, momenta })
}

/// Eigendata of one momentum block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockEigenData {
    pub q: f64,
    /// `[a_1, a_2, a_3, a_4]` for paired momenta, `[a_1, a_2]` for `q in {0, pi}`.
    pub eigenvalues: Vec<f64>,
    /// Fermions carried by each eigenvector: 1 for the one-fermion states;
    /// 0 or 2 (the dominant component) for the `|0>`/two-fermion mixtures.
    pub occupations: Vec<u8>,
    /// `(d_j, e_j)` amplitudes of `a_3`, `a_4` on `(|0>, eta^+ eta^+|0>)`.
    /// Empty for `q in {0, pi}`.
    pub mixing: Vec<(C64, C64)>,
}

impl BlockEigenData {
    pub fn fermion_parities(&self) -> impl Iterator<Item = u8> + '_ {
        self.occupations.iter().map(|o| o % 2)
    }
}

/// Closed-form eigenvalues and eigenvectors of the block at momentum `q`.
pub fn block_eigenvalues(q: f64, lambda: f64) -> Result<BlockEigenData> {
    if !(0.0..2.0 * PI).contains(&q) {
        return Err(Error::invalid(format!("q = {q} outside [0, 2pi)")));
    }
    const SPECIAL: f64 = 1e-12;
    if q.abs() < SPECIAL {
        return Ok(single_block(0.0, -2.0 * lambda + 1.0));
    }
    if (q - PI).abs() < SPECIAL {
        return Ok(single_block(PI, 2.0 * lambda + 1.0));
    }
    let (s, c) = q.sin_cos();
    let one = -2.0 * lambda * c;
    let root = ((lambda - 1.0).powi(2) + 2.0 * lambda * (1.0 - c)).sqrt();
    let a3 = 2.0 * (-lambda * c + root);
    let a4 = 2.0 * (-lambda * c - root);
    let mixing = vec![mixed_vector(a3, lambda, s, c), mixed_vector(a4, lambda, s, c)];
    let occupations = vec![
        1,
        1,
        if mixing[0].0.norm() >= mixing[0].1.norm() { 0 } else { 2 },
        if mixing[1].0.norm() >= mixing[1].1.norm() { 0 } else { 2 },
    ];
    Ok(BlockEigenData {
        q,
        eigenvalues: vec![one, one, a3, a4],
        occupations,
        mixing,
    })
}

fn single_block(q: f64, occupied: f64) -> BlockEigenData {
    BlockEigenData {
        q,
        eigenvalues: vec![-1.0, occupied],
        occupations: vec![0, 1],
        mixing: Vec::new(),
    }
}

/// Unit eigenvector `(d, e)` of
/// `[[-2, -2 i lambda sin q], [2 i lambda sin q, 2 - 4 lambda cos q]]`
/// for eigenvalue `a`.
fn mixed_vector(a: f64, lambda: f64, s: f64, c: f64) -> (C64, C64) {
    let off = C64::new(0.0, 2.0 * lambda * s);
    let (d, e) = if (a + 2.0).abs() >= (2.0 - 4.0 * lambda * c - a).abs() {
        // first row: (-2 - a) d - off e = 0
        (-off / (a + 2.0), C64::from(1.0))
    } else {
        // second row: off d + (2 - 4 lambda c - a) e = 0
        (C64::from(1.0), -off / (2.0 - 4.0 * lambda * c - a))
    };
    let norm = (d.norm_sqr() + e.norm_sqr()).sqrt();
    (d / norm, e / norm)
}

/// Blocks of one sector: every momentum with `q <= pi` represents its block.
fn sector_blocks(n: usize, sector: Sector, lambda: f64) -> Result<Vec<BlockEigenData>> {
    momentum_values(n, sector)?
        .momenta
        .into_iter()
        .filter(|m| m.numerator <= n)
        .map(|m| block_eigenvalues(m.value(), lambda))
        .collect()
}

/// Energies of one sector: all parity-matching selections of block levels.
pub fn sector_spectrum(n: usize, sector: Sector, lambda: f64) -> Result<Vec<f64>> {
    let blocks = sector_blocks(n, sector, lambda)?;
    let want = sector.fermion_parity();
    let mut out = Vec::with_capacity(1 << (n - 1));
    let sizes: Vec<usize> = blocks.iter().map(|b| b.eigenvalues.len()).collect();
    let mut choice = vec![0usize; blocks.len()];
    loop {
        let parity = blocks
            .iter()
            .zip(&choice)
            .map(|(b, &k)| b.occupations[k])
            .sum::<u8>()
            % 2;
        if parity == want {
            out.push(blocks.iter().zip(&choice).map(|(b, &k)| b.eigenvalues[k]).sum());
        }
        // mixed-radix increment
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(out);
            }
            choice[pos] += 1;
            if choice[pos] < sizes[pos] {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// All `2^N` energies (unit energy scale), sorted ascending.
pub fn assemble_spectrum(n: usize, lambda: f64) -> Result<Vec<f64>> {
    assemble_spectrum_with(n, lambda, Execution::default())
}

pub fn assemble_spectrum_with(n: usize, lambda: f64, exec: Execution) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid(format!("ring needs N >= 2, got {n}")));
    }
    if n > 24 {
        return Err(Error::ResourceLimit(format!("N = {n} is too large to enumerate")));
    }
    let (odd, even) = exec.join(
        || sector_spectrum(n, Sector::Cyclic, lambda),
        || sector_spectrum(n, Sector::Anticyclic, lambda),
    );
    let mut all = odd?;
    all.extend(even?);
    if all.len() != 1 << n {
        return Err(Error::InternalConsistency(format!(
            "assembled {} levels for N = {n}, expected {}",
            all.len(),
            1usize << n
        )));
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// The eight three-site levels `E_1 ... E_8` in closed form.
pub fn three_site_levels(lambda: f64) -> [f64; 8] {
    let l = lambda;
    let plus = (1.0 + l + l * l).sqrt();
    let minus = (1.0 - l + l * l).sqrt();
    [
        l + 1.0,
        l + 1.0,
        l - 1.0,
        l - 1.0,
        1.0 - l - 2.0 * plus,
        1.0 - l + 2.0 * plus,
        -1.0 - l - 2.0 * minus,
        -1.0 - l + 2.0 * minus,
    ]
}

/// Energy of `eta_0^+ eta_{2pi/5}^+ eta_{4pi/5}^+ |0>` on the five-site ring.
pub fn five_site_example_energy(lambda: f64) -> f64 {
    (1.0 - 2.0 * lambda)
        - 2.0 * lambda * (2.0 * PI / 5.0).cos()
        - 2.0 * lambda * (4.0 * PI / 5.0).cos()
}

/// Largest entrywise gap between two sorted spectra.
pub fn max_sorted_deviation(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
