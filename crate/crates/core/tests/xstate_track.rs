//! Continuation of the X-state away from lambda = 1.

use isingring::entanglement::tangle;
use isingring::specialstates::xstate_track;

const H: f64 = 1e-3;

fn fine_grid(half_width: usize) -> Vec<f64> {
    (0..=2 * half_width)
        .map(|k| 1.0 + H * (k as f64 - half_width as f64))
        .collect()
}

fn first_differences(xs: &[f64]) -> Vec<f64> {
    xs.windows(2).map(|w| (w[1] - w[0]) / H).collect()
}

/// Largest jump between consecutive first divided differences.
fn max_slope_jump(xs: &[f64]) -> (usize, f64) {
    first_differences(xs)
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .enumerate()
        .fold((0, 0.0), |best, (k, j)| if j > best.1 { (k, j) } else { best })
}

#[test]
fn three_site_concurrence_has_a_kink_at_unit_coupling() {
    let grid = fine_grid(20);
    let track = xstate_track(3, &grid).unwrap();
    let c = track.pair_concurrence(1, 2).unwrap();
    assert!(c[20] < 1e-12, "C(1) = {}", c[20]);
    // continuous: neighbouring values differ by O(h)
    assert!(c.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-3));
    let d1 = first_differences(&c);
    // slope about -1/2 on the left, +1/2 on the right
    assert!(d1[19] < -0.45 && d1[20] > 0.45, "{} {}", d1[19], d1[20]);
    let d2: Vec<f64> = d1.windows(2).map(|w| (w[1] - w[0]) / H).collect();
    // second differences change sign across the kink, with a 1/h spike at it
    assert!(d2[18] > 0.0 && d2[20] < 0.0);
    assert!(d2[19] > 0.5 / H);
    let (at, jump) = max_slope_jump(&c);
    assert_eq!(at, 19);
    assert!(jump > 0.9);
}

#[test]
fn five_site_entanglement_is_smooth_through_unit_coupling() {
    let grid = fine_grid(20);
    let track = xstate_track(5, &grid).unwrap();
    assert!(track.overlaps.iter().all(|&o| o > 0.999));
    assert!(track.energies[20].abs() < 1e-9);
    for (i, j) in [(1, 2), (1, 3)] {
        let c = track.pair_concurrence(i, j).unwrap();
        let (_, jump) = max_slope_jump(&c);
        assert!(jump < 1e-2, "pair ({i},{j}): slope jump {jump}");
    }
    let tau: Vec<f64> = track.states.iter().map(|s| tangle(s, 1).unwrap()).collect();
    let (_, jump) = max_slope_jump(&tau);
    assert!(jump < 1e-2, "tangle slope jump {jump}");
}

#[test]
fn track_stays_an_eigenstate() {
    let grid: Vec<f64> = (0..=30).map(|k| 0.7 + 0.02 * k as f64).collect();
    for n in [3, 5, 7] {
        let track = xstate_track(n, &grid).unwrap();
        for (l, psi) in grid.iter().zip(&track.states) {
            let p = isingring::IsingParams::new(n, *l).unwrap();
            let hpsi = isingring::hamiltonian::apply_hamiltonian(&p, psi).unwrap();
            let e = psi.inner(&hpsi).unwrap().re;
            let mut r = hpsi.amplitudes().clone();
            r -= psi.amplitudes() * isingring::C64::from(e);
            assert!(r.norm() < 1e-9, "N = {n}, lambda = {l}");
        }
    }
}
