//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (`harness = false`).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use disentangle::config::{GridConfig, RunConfig};
use disentangle::sweep::run_sweep;
use disentangle::verify::{FIRST_EXAMPLE, FIRST_EXAMPLE_FINAL, SECOND_EXAMPLE};
use disentangle_core::basin::{classify_basin, run_state, Basin, DEFAULT_BASIN_TOL};
use disentangle_core::dynamics::{evolve, evolve_final, EvolutionConfig, Integrator};
use disentangle_core::entanglement::{
    apply_q, dense_q, tau, EntanglementReport, PairSelector, SubsystemBases, QUBIT_ETA,
};
use disentangle_core::gellmann::GellMannBasis;
use disentangle_core::hilbert::{fidelity, Operator, StateVector, SubsystemDims};
use disentangle_core::matrix::CMatrix;
use disentangle_core::sampling::{haar_state, product_state, random_local_unitaries};
use disentangle_core::statelib::{bell, build_state, ghz, parse_state_expr};
use disentangle_core::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ORDERED_PAIRS: [(usize, usize); 6] = [(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];
const CYCLIC_PAIRS: [(usize, usize); 3] = [(2, 3), (3, 1), (1, 2)];

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn(&Ctx) -> Outcome);

struct Ctx {
    dims: SubsystemDims,
    bases: SubsystemBases,
}

impl Ctx {
    fn new() -> Self {
        let dims = SubsystemDims::qubits(3).unwrap();
        Self {
            bases: SubsystemBases::new(&dims),
            dims,
        }
    }

    fn pair(&self, a: usize, b: usize) -> PairSelector {
        PairSelector::new(a, b, QUBIT_ETA).unwrap()
    }

    fn protocol(&self) -> EvolutionConfig {
        EvolutionConfig::new(self.pair(1, 2))
    }

    fn state(&self, text: &str) -> StateVector {
        build_state(&parse_state_expr(text).unwrap(), &self.dims).unwrap()
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn first_example(c: &Ctx) -> Outcome {
    let started = Instant::now();
    let last = evolve(&c.state(FIRST_EXAMPLE), &c.bases, &c.protocol()).map_err(err)?.final_sample().clone();
    let secs = started.elapsed().as_secs_f64();
    let r = &last.report;
    let f = fidelity(&last.state, &c.state(FIRST_EXAMPLE_FINAL)).map_err(err)?;
    let k = |n| r.k(n).unwrap();
    let t = |a, b| r.tau(a, b).unwrap();
    let ok = f >= 0.99
        && k(2) >= 0.999
        && (k(1) - k(3)).abs() <= 1e-3
        && t(1, 2) <= 1e-3
        && t(2, 3) <= 1e-3
        && t(3, 1) >= 0.99
        && secs <= 10.0;
    Ok((
        ok,
        format!(
            "F = {f:.6}, k2 = {:.6}, |k1 - k3| = {:.1e}, tau12 = {:.1e}, tau23 = {:.1e}, tau31 = {:.6}, {secs:.2} s",
            k(2),
            (k(1) - k(3)).abs(),
            t(1, 2),
            t(2, 3),
            t(3, 1)
        ),
    ))
}

fn second_example(c: &Ctx) -> Outcome {
    let started = Instant::now();
    let config = c.protocol();
    let last = evolve_final(&c.state(SECOND_EXAMPLE), &c.bases, &config).map_err(err)?;
    let secs = started.elapsed().as_secs_f64();
    let report = EntanglementReport::compute(&last, &c.bases, config.duration, &[]).map_err(err)?;
    let basin = classify_basin(&report, config.pair, DEFAULT_BASIN_TOL);
    let f = fidelity(&last, &bell(2, -FRAC_PI_2).map_err(err)?).map_err(err)?;
    Ok((
        f >= 0.99 && basin == Basin::Subsystem(2) && secs <= 10.0,
        format!("F = {f:.6}, basin {basin}, {secs:.2} s"),
    ))
}

fn basin_map(c: &Ctx) -> Outcome {
    let started = Instant::now();
    let config = RunConfig {
        workers: Some(8),
        ..RunConfig::default()
    };
    let spec = config.sweep_spec().map_err(err)?;
    let n = spec.grid1.count;
    let cells = run_sweep(&spec, config.workers);
    let secs = started.elapsed().as_secs_f64();
    let labels: Vec<Basin> = cells.iter().map(|cell| cell.basin()).collect();
    let count = |b| labels.iter().filter(|&&l| l == b).count();
    let (b1, b2) = (count(Basin::Subsystem(1)), count(Basin::Subsystem(2)));
    let unresolved = count(Basin::Unresolved);

    // the reference cell is not a grid point, so it is evaluated directly
    let psi = spec.initial_state(-1e-5, -5.2e-4).map_err(err)?;
    let (_, reference) = run_state(&psi, &c.bases, &spec.evolution, spec.basin_tol).map_err(err)?;

    let center = n * (n / 2) + n / 2;
    let (i, j) = spec.cell_indices(center);
    let (x, y) = (spec.grid1.value(i), spec.grid2.value(j));
    let neighbours = [center - n, center + n, center - 1, center + 1];
    let boundary = neighbours.iter().any(|&m| labels[m] != labels[center]);
    let center_ok = labels[center] == Basin::Unresolved || boundary;
    Ok((
        b1 > 0 && b2 > 0 && reference == Basin::Subsystem(2) && center_ok && x == 0.0 && y == 0.0 && secs <= 300.0,
        format!(
            "{n}x{n}: B1 {b1}, B2 {b2}, unresolved {unresolved}; reference cell {reference}; (0,0) {}{}; {secs:.1} s",
            labels[center],
            if boundary { " next to a basin change" } else { "" }
        ),
    ))
}

fn monotone(c: &Ctx) -> Outcome {
    let config = c.protocol();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_rise = 0.0_f64;
    let mut worst_final = 0.0_f64;
    for _ in 0..50 {
        let mut psi = haar_state(&c.dims, &mut rng);
        let mut integrator = Integrator::new(&c.bases, &config).map_err(err)?;
        let mut previous = integrator.flow_mut().tau(psi.amplitudes());
        for n in 0..config.step_count() {
            integrator.advance(psi.amplitudes_mut(), n as f64 * config.step).map_err(err)?;
            let now = integrator.flow_mut().tau(psi.amplitudes());
            worst_rise = worst_rise.max(now - previous);
            previous = now;
        }
        worst_final = worst_final.max(previous);
    }
    Ok((
        worst_rise <= 1e-8 && worst_final <= 1e-3,
        format!("50 states, every step: max rise {worst_rise:.1e}, max tau12(50) {worst_final:.1e}"),
    ))
}

fn product_fixed_point(c: &Ctx) -> Outcome {
    let config = c.protocol();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_q = 0.0_f64;
    let mut worst_drift = 0.0_f64;
    for _ in 0..100 {
        let psi = product_state(&c.dims, &mut rng);
        for (a, b) in ORDERED_PAIRS {
            worst_q = worst_q.max(apply_q(&psi, c.pair(a, b), &c.bases).map_err(err)?.norm());
        }
        let last = evolve_final(&psi, &c.bases, &config).map_err(err)?;
        worst_drift = worst_drift.max((1.0 - fidelity(&last, &psi).map_err(err)?).abs());
    }
    Ok((
        worst_q <= 1e-10 && worst_drift <= 1e-10,
        format!("100 states: max |Q psi| {worst_q:.1e}, max 1 - F {worst_drift:.1e}"),
    ))
}

fn local_unitary(c: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let psi = haar_state(&c.dims, &mut rng);
        let rotated = random_local_unitaries(&psi, &mut rng).map_err(err)?;
        for (a, b) in CYCLIC_PAIRS {
            let p = c.pair(a, b);
            let delta = tau(&psi, p, &c.bases).map_err(err)? - tau(&rotated, p, &c.bases).map_err(err)?;
            worst = worst.max(delta.abs());
        }
    }
    Ok((worst <= 1e-10, format!("100 states x 3 pairs: max |dtau| {worst:.1e}")))
}

fn oracle_equivalence(c: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for (a, b) in ORDERED_PAIRS {
        for _ in 0..50 {
            let psi = haar_state(&c.dims, &mut rng);
            let fast = apply_q(&psi, c.pair(a, b), &c.bases).map_err(err)?;
            let dense = dense_q(&psi, c.pair(a, b), &c.bases).and_then(|q| q.apply(&psi)).map_err(err)?;
            worst = worst.max(fast.distance(&dense) / dense.norm().max(f64::MIN_POSITIVE));
        }
    }
    Ok((worst <= 1e-12, format!("6 pairs x 50 states: max relative gap {worst:.1e}")))
}

fn norm_conservation(c: &Ctx) -> Outcome {
    let mut config = c.protocol();
    config.renormalize_each_step = false;
    let mut psi = c.state(FIRST_EXAMPLE);
    let mut integrator = Integrator::new(&c.bases, &config).map_err(err)?;
    let mut worst = 0.0_f64;
    for n in 0..config.step_count() {
        integrator.advance(psi.amplitudes_mut(), n as f64 * config.step).map_err(err)?;
        worst = worst.max(integrator.last_norm_drift());
    }
    Ok((worst <= 1e-6, format!("max ||psi| - 1| over [0, 50]: {worst:.1e}")))
}

/// Brute-force qubit oracle: Pauli matrices written out by hand and
/// expectations summed over basis indices, bit `n - 1` holding subsystem `n`.
mod oracle {
    use super::*;

    fn paulis() -> [[[C64; 2]; 2]; 3] {
        let c = |re, im| C64::new(re, im);
        let o = c(0.0, 0.0);
        [
            [[o, c(1.0, 0.0)], [c(1.0, 0.0), o]],
            [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]],
            [[c(1.0, 0.0), o], [o, c(-1.0, 0.0)]],
        ]
    }

    fn bit(index: usize, n: usize) -> usize {
        (index >> (n - 1)) & 1
    }

    /// `⟨ψ| ⊗_n ops[n] |ψ⟩` with identity where `ops[n]` is `None`.
    fn expect(psi: &[C64], ops: &[(usize, [[C64; 2]; 2])]) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        for (i, x) in psi.iter().enumerate() {
            for (j, y) in psi.iter().enumerate() {
                let mask: usize = ops.iter().map(|(n, _)| 1 << (n - 1)).sum();
                if i & !mask != j & !mask {
                    continue;
                }
                let m: C64 = ops.iter().map(|(n, p)| p[bit(i, *n)][bit(j, *n)]).product();
                sum += x.conj() * m * y;
            }
        }
        sum
    }

    pub fn tau(psi: &[C64], a: usize, b: usize) -> f64 {
        let p = paulis();
        let mut sum = 0.0;
        for pa in &p {
            for pb in &p {
                let joint = expect(psi, &[(a, *pa), (b, *pb)]).re;
                let c = joint - expect(psi, &[(a, *pa)]).re * expect(psi, &[(b, *pb)]).re;
                sum += c * c;
            }
        }
        sum / 3.0
    }

    pub fn k(psi: &[C64], n: usize) -> f64 {
        paulis().iter().map(|p| expect(psi, &[(n, *p)]).re.powi(2)).sum::<f64>().sqrt()
    }
}

fn measure_values(c: &Ctx) -> Outcome {
    let h = FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    // |000> - |111>
    let ghz_amps = [C64::new(h, 0.0), z, z, z, z, z, z, C64::new(-h, 0.0)];
    // |000> + e^{iπ}|011>
    let bell_amps = [C64::new(h, 0.0), z, z, C64::new(-h, 0.0), z, z, z, z];
    let g = ghz();
    let b = bell(3, PI).map_err(err)?;
    let mut worst = 0.0_f64;
    for (x, y) in g.amplitudes().iter().zip(&ghz_amps).chain(b.amplitudes().iter().zip(&bell_amps)) {
        worst = worst.max((x - y).norm());
    }
    for (a, bb) in ORDERED_PAIRS {
        let expected = oracle::tau(&ghz_amps, a, bb);
        worst = worst.max((expected - 1.0 / 3.0).abs());
        worst = worst.max((tau(&g, c.pair(a, bb), &c.bases).map_err(err)? - expected).abs());
    }
    let expected = oracle::tau(&bell_amps, 1, 2);
    worst = worst.max((expected - 1.0).abs());
    worst = worst.max((tau(&b, c.pair(1, 2), &c.bases).map_err(err)? - expected).abs());
    let report = EntanglementReport::compute(&g, &c.bases, 0.0, &[]).map_err(err)?;
    for n in 1..=3 {
        let expected = oracle::k(&ghz_amps, n);
        worst = worst.max(expected.abs()).max((report.k(n).unwrap() - expected).abs());
    }
    Ok((
        worst <= 1e-12,
        format!("tau(GHZ) = 1/3, tau(bell3(pi)) = 1, k(GHZ) = 0: max gap {worst:.1e}"),
    ))
}

fn gellmann_suite(_: &Ctx) -> Outcome {
    let mut worst = 0.0_f64;
    for d in 2..=5 {
        let basis = GellMannBasis::generate(d).map_err(err)?;
        for (x, mx) in basis.matrices().iter().enumerate() {
            worst = worst.max(mx.hermiticity_deviation()).max(mx.trace().norm());
            for (y, my) in basis.matrices().iter().enumerate() {
                let expected = if x == y { 2.0 } else { 0.0 };
                worst = worst.max(((mx * my).trace() - C64::new(expected, 0.0)).norm());
            }
        }
    }
    let c = |re, im| C64::new(re, im);
    let o = c(0.0, 0.0);
    let pauli = [
        [o, c(1.0, 0.0), c(1.0, 0.0), o],
        [o, c(0.0, -1.0), c(0.0, 1.0), o],
        [c(1.0, 0.0), o, o, c(-1.0, 0.0)],
    ]
    .map(|e| CMatrix::from_row_major(2, 2, e.to_vec()).unwrap());
    let exact = GellMannBasis::generate(2).map_err(err)?.matrices() == pauli;
    Ok((
        worst <= 1e-12 && exact,
        format!("d = 2..5: max deviation {worst:.1e}; d = 2 is the Pauli triple: {exact}"),
    ))
}

fn determinism(_: &Ctx) -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let config = dir.path().join("grid.toml");
    let mut run_config = RunConfig::default();
    let grid = GridConfig {
        min: -1e-3,
        max: 1e-3,
        count: 9,
    };
    run_config.sweep.eps1 = grid;
    run_config.sweep.eps2 = grid;
    fs::write(&config, toml::to_string(&run_config).map_err(err)?).map_err(err)?;
    let mut outputs = Vec::new();
    for (n, workers) in ["1", "8", "8"].iter().enumerate() {
        let out = dir.path().join(format!("sweep{n}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_disentangle"))
            .args(["sweep", "--config"])
            .arg(&config)
            .args(["--workers", workers, "--out"])
            .arg(&out)
            .output()
            .map_err(err)?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        let text = fs::read_to_string(&out).map_err(err)?;
        outputs.push(text.lines().skip(1).map(String::from).collect::<Vec<_>>());
    }
    let rows = outputs[0].len();
    Ok((
        rows == 81 && outputs[1] == outputs[0] && outputs[2] == outputs[0],
        format!("9x9 CSV, workers 1 / 8 / 8: {rows} data rows, identical: {}", outputs[1] == outputs[0] && outputs[2] == outputs[0]),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("first example reproduces", first_example),
        ("second example reproduces", second_example),
        ("basin map at desk scale", basin_map),
        ("monotone disentanglement", monotone),
        ("product-state fixed point", product_fixed_point),
        ("local-unitary invariance", local_unitary),
        ("oracle equivalence", oracle_equivalence),
        ("norm conservation", norm_conservation),
        ("measure values", measure_values),
        ("Gell-Mann suite", gellmann_suite),
        ("sweep determinism", determinism),
    ];
    let ctx = Ctx::new();
    let mut failures = 0;
    for (n, (name, criterion)) in criteria.iter().enumerate() {
        let (passed, detail) = criterion(&ctx).unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!passed);
        println!("{} {:>2}. {name}: {detail}", if passed { "PASS" } else { "FAIL" }, n + 1);
    }
    println!("{}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
