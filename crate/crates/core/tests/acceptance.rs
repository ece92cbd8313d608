//! Acceptance gate. Runs every primary criterion at its stated tolerance and
//! prints one `[PASS]`/`[FAIL]` line per criterion; exits nonzero if any fail.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use isingring::entanglement::{self, concurrence, pair_concurrence, tangle, three_tangle, three_tangle_anchored};
use isingring::hamiltonian::{self, IsingParams};
use isingring::specialstates::{self, RingGeometry};
use isingring::{freefermion, thermal, StateVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| min + (max - min) * k as f64 / (points - 1) as f64)
        .collect()
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(format!("{detail}; {took:.2?}"))
}

fn three_site_closed_form(l: f64) -> [f64; 8] {
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

fn closed_form_spectrum() -> Outcome {
    timed(Duration::from_secs(1), || {
        let mut worst = 0.0f64;
        for l in grid(0.0, 5.0, 50) {
            let mut want = three_site_closed_form(l).to_vec();
            want.sort_by(f64::total_cmp);
            let got = hamiltonian::spectrum(&IsingParams::new(3, l).map_err(|e| e.to_string())?);
            for (a, b) in got.iter().zip(&want) {
                worst = worst.max((a - b).abs());
            }
        }
        ensure(worst < 1e-10, || format!("max deviation {worst:e}"))?;
        Ok(format!("max deviation {worst:.1e} over 50 points"))
    })
}

fn oracle_equivalence() -> Outcome {
    timed(Duration::from_secs(120), || {
        let mut worst = 0.0f64;
        for n in 2..=10 {
            for &l in &[0.0, 0.5, 1.0, 2.0, 5.0] {
                let dense = hamiltonian::spectrum(&IsingParams::new(n, l).map_err(|e| e.to_string())?);
                let ff = freefermion::assemble_spectrum(n, l).map_err(|e| e.to_string())?;
                ensure(dense.len() == ff.len(), || format!("N = {n}: level counts differ"))?;
                let d = freefermion::max_sorted_deviation(&dense, &ff);
                ensure(d < 1e-8, || format!("N = {n}, lambda = {l}: deviation {d:e}"))?;
                worst = worst.max(d);
            }
        }
        Ok(format!("max deviation {worst:.1e}"))
    })
}

fn zero_multiplicity(n: usize) -> Result<usize, String> {
    let s = hamiltonian::spectrum(&IsingParams::new(n, 1.0).map_err(|e| e.to_string())?);
    Ok(s.iter().filter(|e| e.abs() <= 1e-9).count())
}

fn level_crossing() -> Outcome {
    let m3 = zero_multiplicity(3)?;
    ensure(m3 == 3, || format!("N = 3: multiplicity {m3}"))?;
    let mut found = vec![format!("N=3: {m3}")];
    for n in [5, 7, 9] {
        let m = zero_multiplicity(n)?;
        let need = (1 << ((n - 1) / 2)) + 1;
        ensure(m >= need, || format!("N = {n}: multiplicity {m} < {need}"))?;
        found.push(format!("N={n}: {m}"));
    }
    Ok(found.join(", "))
}

fn xstate_zero_energy() -> Outcome {
    let mut worst = 0.0f64;
    for n in [3, 5, 7, 9, 11] {
        let r = specialstates::xstate_residual(n).map_err(|e| e.to_string())?;
        ensure(r < 1e-9, || format!("N = {n}: residual {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("max residual {worst:.1e}"))
}

fn block_mixedness() -> Outcome {
    let (mut dev, mut ent) = (0.0f64, 0.0f64);
    for n in [5, 7, 9] {
        let x = specialstates::xstate(n).map_err(|e| e.to_string())?;
        let ring = RingGeometry::odd(n).map_err(|e| e.to_string())?;
        for k in 1..=ring.half() {
            for start in 1..=n {
                let block = ring.block(start, k).map_err(|e| e.to_string())?;
                let d = specialstates::verify_block_mixedness(&x, &block).map_err(|e| e.to_string())?;
                ensure(d < 1e-10, || format!("N = {n}, block {block:?}: {d:e}"))?;
                let rho = x.reduced_density(&block).map_err(|e| e.to_string())?;
                let s = entanglement::von_neumann_entropy(&rho).map_err(|e| e.to_string())?;
                let e = (s - k as f64 * 2f64.ln()).abs();
                ensure(e < 1e-9, || format!("N = {n}, block {block:?}: entropy off by {e:e}"))?;
                dev = dev.max(d);
                ent = ent.max(e);
            }
        }
    }
    Ok(format!("max block deviation {dev:.1e}, max entropy error {ent:.1e}"))
}

fn alpha_family_and_extraction() -> Outcome {
    let (mut gram, mut infid) = (0.0f64, 0.0f64);
    for n in [3, 5, 7] {
        let ring = RingGeometry::odd(n).map_err(|e| e.to_string())?;
        let region = ring.block(1, ring.half()).map_err(|e| e.to_string())?;
        let fam = specialstates::alpha_family(n, &region).map_err(|e| e.to_string())?;
        let g = fam.gram_deviation();
        ensure(g < 1e-9, || format!("N = {n}: Gram deviation {g:e}"))?;
        let f = specialstates::bell_extraction_fidelity(&fam).map_err(|e| e.to_string())?;
        ensure(f >= 1.0 - 1e-9, || format!("N = {n}: Bell fidelity {f}"))?;
        gram = gram.max(g);
        infid = infid.max(1.0 - f);
    }
    Ok(format!("max Gram deviation {gram:.1e}, max infidelity {infid:.1e}"))
}

fn ghz_limit() -> Outcome {
    let (mut c_max, mut t_min, mut f_err) = (0.0f64, 1.0f64, 0.0f64);
    for n in [3, 5, 7] {
        let g = specialstates::ghz_limit_state(n).map_err(|e| e.to_string())?;
        for i in 1..=n {
            let t = tangle(&g, i).map_err(|e| e.to_string())?;
            ensure(t > 1.0 - 1e-10, || format!("N = {n}: tangle of {i} is {t}"))?;
            t_min = t_min.min(t);
            for j in i + 1..=n {
                let c = pair_concurrence(&g, i, j).map_err(|e| e.to_string())?;
                ensure(c < 1e-10, || format!("N = {n}: C({i},{j}) = {c:e}"))?;
                c_max = c_max.max(c);
            }
        }
        let f = specialstates::ghz_equivalence_check(&g).map_err(|e| e.to_string())?;
        ensure((f - 1.0).abs() < 1e-10, || format!("N = {n}: GHZ fidelity {f}"))?;
        f_err = f_err.max((f - 1.0).abs());
    }
    Ok(format!(
        "max pair C {c_max:.1e}, min tangle {t_min:.12}, fidelity error {f_err:.1e}"
    ))
}

fn ground(n: usize, l: f64) -> Result<StateVector, String> {
    hamiltonian::ground_state(&IsingParams::new(n, l).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())
}

fn argmax(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &x)| if x > best.1 { (k, x) } else { best })
        .0
}

fn ground_state_shape() -> Outcome {
    let lambdas = grid(0.0, 10.0, 300);
    let mut c = Vec::with_capacity(lambdas.len());
    let mut tau = Vec::with_capacity(lambdas.len());
    for &l in &lambdas {
        let g = ground(3, l)?;
        c.push(pair_concurrence(&g, 1, 2).map_err(|e| e.to_string())?);
        tau.push(tangle(&g, 1).map_err(|e| e.to_string())?);
    }
    ensure(c[0] < 1e-10, || format!("C(0) = {:e}", c[0]))?;
    let star = lambdas[argmax(&c)];
    ensure((0.7..=1.5).contains(&star), || format!("argmax at lambda = {star}"))?;
    let g50 = ground(3, 50.0)?;
    let c50 = pair_concurrence(&g50, 1, 2).map_err(|e| e.to_string())?;
    ensure(c50 < 0.05, || format!("C(50) = {c50}"))?;
    for (k, w) in tau.windows(2).enumerate() {
        ensure(w[1] >= w[0] - 1e-9, || {
            format!("tangle drops at lambda = {}: {} -> {}", lambdas[k + 1], w[0], w[1])
        })?;
    }
    let t3 = three_tangle(&g50).map_err(|e| e.to_string())?;
    ensure(t3 > 0.95, || format!("three-tangle(50) = {t3}"))?;
    Ok(format!(
        "lambda* = {star:.4}, C max = {:.4}, C(50) = {c50:.2e}, three-tangle(50) = {t3:.4}",
        c[argmax(&c)]
    ))
}

fn thermal_properties() -> Outcome {
    let es = hamiltonian::eigensystem(&IsingParams::new(3, 1.0).map_err(|e| e.to_string())?);
    let pair_c = |es: &isingring::EigenSystem, t: f64, i, j| -> Result<f64, String> {
        concurrence(&thermal::gibbs_pair_marginal(es, t, i, j).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())
    };
    let ts = [0.1, 0.5, 1.0, 2.0, 4.0];
    let cs = ts
        .iter()
        .map(|&t| pair_c(&es, t, 1, 2))
        .collect::<Result<Vec<_>, _>>()?;
    for w in cs.windows(2) {
        ensure(w[1] <= w[0] + 1e-9, || format!("not monotone: {cs:?}"))?;
    }
    let hot = pair_c(&es, 1e6, 1, 2)?;
    ensure(hot < 1e-5, || format!("C(T = 1e6) = {hot:e}"))?;

    let mut asym = 0.0f64;
    let mut temps = ts.to_vec();
    temps.push(1e6);
    temps.extend(grid(0.01, 3.0, 20));
    for l in grid(0.0, 3.0, 20).into_iter().chain([1.0]) {
        let es = hamiltonian::eigensystem(&IsingParams::new(3, l).map_err(|e| e.to_string())?);
        for &t in &temps {
            let c12 = pair_c(&es, t, 1, 2)?;
            let c13 = pair_c(&es, t, 1, 3)?;
            let c23 = pair_c(&es, t, 2, 3)?;
            let d = (c12 - c13).abs().max((c12 - c23).abs());
            ensure(d < 1e-9, || format!("lambda = {l}, T = {t}: pairs differ by {d:e}"))?;
            asym = asym.max(d);
        }
    }
    Ok(format!(
        "C(T) = {:?}, C(1e6) = {hot:.1e}, max pair asymmetry {asym:.1e}",
        cs.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>()
    ))
}

fn distance_profile() -> Outcome {
    let g1 = ground(7, 1.0)?;
    let at_one = (1..=3)
        .map(|d| pair_concurrence(&g1, 1, 1 + d).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    ensure(at_one[0] > at_one[1] && at_one[1] > at_one[2], || {
        format!("C by distance at lambda = 1: {at_one:?}")
    })?;
    let lambdas = grid(0.0, 5.0, 200);
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    for &l in &lambdas {
        let g = ground(7, l)?;
        d1.push(pair_concurrence(&g, 1, 2).map_err(|e| e.to_string())?);
        d2.push(pair_concurrence(&g, 1, 3).map_err(|e| e.to_string())?);
    }
    let (p1, p2) = (lambdas[argmax(&d1)], lambdas[argmax(&d2)]);
    ensure(p2 > p1, || format!("argmax d=2 at {p2} not beyond d=1 at {p1}"))?;
    Ok(format!(
        "C(lambda=1) by distance = [{:.4}, {:.4}, {:.2e}], argmax d1 = {p1:.3}, d2 = {p2:.3}",
        at_one[0], at_one[1], at_one[2]
    ))
}

fn random_state(rng: &mut ChaCha8Rng) -> StateVector {
    let amps: Vec<C64> = (0..8)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::new(3, amps).unwrap().normalized().unwrap()
}

fn monogamy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x15_1A6);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let psi = random_state(&mut rng);
        for anchor in 1..=3 {
            let r = three_tangle_anchored(&psi, anchor).map_err(|e| e.to_string())?;
            worst = worst.min(r);
        }
    }
    ensure(worst >= -1e-9, || format!("minimum residual {worst:e}"))?;
    Ok(format!("minimum residual {worst:.2e} over 1000 states x 3 anchors"))
}

fn run_cli(args: &[&str], out: &PathBuf) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_isingring"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("{args:?} exited with {status}"))?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("isingring-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let commands: [&[&str]; 7] = [
        &["spectrum", "-n", "5", "--lambda-steps", "41"],
        &["ground-entanglement", "-n", "3", "--measure", "concurrence", "--lambda-steps", "50"],
        &["ground-entanglement", "-n", "7", "--distances", "--lambda-steps", "20", "--format", "json"],
        &["ground-entanglement", "-n", "3", "--measure", "three-tangle"],
        &["thermal", "-n", "3", "--lambda-steps", "10", "--temp-steps", "10"],
        &["xstate-verify", "-n", "7"],
        &["crosscheck", "--n-min", "2", "--n-max", "8"],
    ];
    for (k, args) in commands.iter().enumerate() {
        let a = run_cli(args, &dir.join(format!("{k}-a")))?;
        let b = run_cli(args, &dir.join(format!("{k}-b")))?;
        ensure(!a.is_empty() && a == b, || format!("{args:?}: outputs differ"))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands, byte-identical reruns", commands.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("three-site closed-form spectrum", closed_form_spectrum),
        ("free-fermion vs dense spectra", oracle_equivalence),
        ("level crossing at lambda = 1", level_crossing),
        ("X-state zero energy", xstate_zero_energy),
        ("X-state block mixedness and entropy", block_mixedness),
        ("alpha family and Bell extraction", alpha_family_and_extraction),
        ("GHZ limit", ghz_limit),
        ("ground-state entanglement shape (N = 3)", ground_state_shape),
        ("thermal concurrence properties", thermal_properties),
        ("distance-resolved concurrence (N = 7)", distance_profile),
        ("monogamy of random three-qubit states", monogamy),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
