//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. Every
//! criterion also produces a JSON report; the whole suite is run twice and
//! the two sets of report files are compared byte for byte.

use std::path::Path;
use std::time::{Duration, Instant};

use perispec::checks::{ktz_check, theorem1_check, theorem3_check, ScanConfig};
use perispec::corpus::{sequence_corpus, system_corpus, Category};
use perispec::dynamics::{simulate_delay, theorem6_verify, theorem7_probe, DelaySystem, ForcingSpec};
use perispec::eigen::{cayley_hamilton_residual, eigenvalues, gelfand_radius_estimate, spectrum_info};
use perispec::io::write_json;
use perispec::linalg::operator_norm;
use perispec::random;
use perispec::resolvent::{cauchy_coefficient, isometry_bound_check, pole_order_probe, resolvent_direct, resolvent_neumann};
use perispec::sequence::{extract_modes, BoundedSeq, DecaySpec, ModeSpec, SequenceSpec};
use perispec::{c, CMatrix, CVector, Complex};
use rand::Rng;
use serde_json::{json, Value};

const SEED: u64 = 20_240_917;
const HORIZON: usize = 16_384;
const GRID: usize = 4096;

struct Outcome {
    pass: bool,
    summary: String,
    report: Value,
}

fn outcome(pass: bool, summary: String, report: Value) -> Outcome {
    Outcome { pass, summary, report }
}

fn seeded_disk(rng: &mut random::SeededRng, dims: &[usize], i: usize) -> CMatrix {
    random::disk_matrix(rng, dims[i % dims.len()])
}

fn cayley_hamilton(elapsed: &mut Duration) -> Outcome {
    let start = Instant::now();
    let mut rng = random::rng(SEED);
    let mut worst_ratio: f64 = 0.0;
    let mut failures = 0;
    for i in 0..100 {
        let a = seeded_disk(&mut rng, &[2, 3, 4, 5, 6], i);
        let bound = 1e-8 * (1.0 + operator_norm(&a).unwrap()).powi(a.dim() as i32);
        let r = cayley_hamilton_residual(&a).unwrap();
        worst_ratio = worst_ratio.max(r / bound);
        if r > bound {
            failures += 1;
        }
    }
    *elapsed = start.elapsed();
    let fast = *elapsed < Duration::from_secs(1);
    outcome(
        failures == 0 && fast,
        format!("100 matrices, worst residual/bound {worst_ratio:.2e}, {:.3}s", elapsed.as_secs_f64()),
        json!({"matrices": 100, "failures": failures, "worst_residual_over_bound": worst_ratio}),
    )
}

fn gelfand(elapsed: &mut Duration) -> Outcome {
    let start = Instant::now();
    let mut rng = random::rng(SEED + 1);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut rows = Vec::new();
    for i in 0..50 {
        let dim = 2 + i % 5;
        let eigs: Vec<Complex> = (0..dim).map(|_| random::unit_disk(&mut rng) * 1.5).collect();
        let rho = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let a = random::diagonalizable(&mut rng, &eigs, 10.0);
        let r = gelfand_radius_estimate(&a, 512).unwrap();
        let err = (r.estimate - rho).abs();
        let tol = 0.05 * (1.0 + rho);
        worst = worst.max(err / tol);
        if err > tol {
            failures += 1;
        }
        rows.push(json!({"rho": rho, "estimate": r.estimate}));
    }
    *elapsed = start.elapsed();
    let fast = *elapsed < Duration::from_secs(5);
    outcome(
        failures == 0 && fast,
        format!("50 matrices, worst error/tolerance {worst:.3}, {:.3}s", elapsed.as_secs_f64()),
        json!({"failures": failures, "worst_error_over_tol": worst, "cases": rows}),
    )
}

fn resolvent_consistency() -> Outcome {
    let mut rng = random::rng(SEED + 2);
    let mut worst_neumann: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for i in 0..50 {
        let a = seeded_disk(&mut rng, &[2, 3, 4, 5, 6], i);
        let rho = spectrum_info(&a, 1e-8).unwrap().spectral_radius;
        let lambda = Complex::from_polar(2.0 * rho + 0.1, rng.gen_range(0.0..std::f64::consts::TAU));
        let direct = resolvent_direct(&a, lambda).unwrap();
        let neumann = resolvent_neumann(&a, lambda, 200).unwrap();
        worst_neumann = worst_neumann.max(operator_norm(&(&direct - &neumann.sum)).unwrap());

        let mu = Complex::from_polar(2.0 * rho + 0.5, rng.gen_range(0.0..std::f64::consts::TAU));
        let rm = resolvent_direct(&a, mu).unwrap();
        let lhs = &direct - &rm;
        let rhs = (&direct * &rm).scale(mu - lambda);
        let scale = 1.0 + operator_norm(&direct).unwrap() * operator_norm(&rm).unwrap();
        worst_identity = worst_identity.max(operator_norm(&(&lhs - &rhs)).unwrap() / scale);
    }
    outcome(
        worst_neumann <= 1e-8 && worst_identity <= 1e-9,
        format!("Neumann vs direct {worst_neumann:.2e}, scaled identity residual {worst_identity:.2e}"),
        json!({"worst_neumann_gap": worst_neumann, "worst_identity_residual": worst_identity}),
    )
}

fn cauchy_recovery() -> Outcome {
    let mut rng = random::rng(SEED + 3);
    let mut worst_coeff: f64 = 0.0;
    for trial in 0..10 {
        let deg = trial;
        let coeffs: Vec<CVector> = (0..=deg).map(|_| random::disk_vector(&mut rng, 3)).collect();
        let f = |z: Complex| {
            let mut acc = CVector::zeros(3);
            for v in coeffs.iter().rev() {
                acc = acc.scale(z);
                acc.axpy(c(1.0, 0.0), v);
            }
            acc
        };
        for k in 0..=10 {
            let got = cauchy_coefficient(f, k, 1.0, 64).unwrap();
            let want = coeffs.get(k).cloned().unwrap_or_else(|| CVector::zeros(3));
            worst_coeff = worst_coeff.max(got.distance(&want));
        }
    }
    let constant = random::disk_vector(&mut rng, 3);
    let mut worst_liouville: f64 = 0.0;
    for radius in [0.5, 1.0, 2.0] {
        for k in 1..=10 {
            let got = cauchy_coefficient(|_| constant.clone(), k, radius, 64).unwrap();
            worst_liouville = worst_liouville.max(got.norm());
        }
    }
    outcome(
        worst_coeff <= 1e-12 && worst_liouville <= 1e-13,
        format!("worst coefficient error {worst_coeff:.2e}, constant oracle {worst_liouville:.2e}"),
        json!({"worst_coefficient_error": worst_coeff, "worst_constant_coefficient": worst_liouville}),
    )
}

fn isometry(rng_seed: u64) -> Outcome {
    let mut rng = random::rng(rng_seed);
    let mut violations = 0;
    let mut worst_slack = f64::INFINITY;
    let mut orders = Vec::new();
    for i in 0..20 {
        let u = random::unitary(&mut rng, 2 + i % 5);
        let samples: Vec<Complex> = (0..1000)
            .map(|j| {
                let r = if j % 2 == 0 { rng.gen_range(0.2..0.99) } else { rng.gen_range(1.01..3.0) };
                Complex::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let rep = isometry_bound_check(&u, &samples).unwrap();
        violations += rep.violations;
        worst_slack = worst_slack.min(rep.worst_slack);

        let eigs = eigenvalues(&u).unwrap();
        for (j, &theta) in eigs.iter().enumerate() {
            let gap = eigs
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, e)| (e - theta).norm())
                .fold(f64::INFINITY, f64::min);
            if gap < 1e-3 {
                continue;
            }
            let r_max = (0.25 * gap).min(0.1);
            let radii: Vec<f64> = (0..8).map(|k| r_max * 10f64.powf(-0.5 * k as f64)).collect();
            orders.push(pole_order_probe(&u, theta, &radii).unwrap().fitted_order);
        }
    }
    let order_ok = orders.iter().all(|o| (0.9..=1.1).contains(o));
    let (lo, hi) = orders
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &o| (l.min(o), h.max(o)));
    outcome(
        violations == 0 && order_ok && !orders.is_empty(),
        format!(
            "20000 samples, {violations} violations, worst slack {worst_slack:.2e}; {} poles, orders in [{lo:.6}, {hi:.6}]",
            orders.len()
        ),
        json!({"violations": violations, "worst_slack": worst_slack, "pole_orders": orders}),
    )
}

fn sequence_consistency() -> Outcome {
    let cfg = ScanConfig {
        grid_size: GRID,
        ..ScanConfig::default()
    };
    let corpus = sequence_corpus(SEED + 5, 30, HORIZON);
    let mut disagreements = Vec::new();
    let mut rows = Vec::new();
    for member in &corpus {
        let x = BoundedSeq::from_spec(&member.spec).unwrap();
        let t1 = theorem1_check(&x, &cfg).unwrap();
        let theta = member.planted.first().copied().unwrap_or(c(1.0, 0.0));
        let t3 = theorem3_check(&x, theta, &cfg).unwrap();
        let expect_vanishing = member.category == Category::Vanishing;
        let expect_single = matches!(member.category, Category::SingleMode | Category::ModePlusDecay);
        let planted_found = member.planted.len() == t1.detected.len();
        let ok = t1.consistent
            && t3.consistent
            && t1.vanishing == expect_vanishing
            && (t3.difference_vanishes == (expect_single || expect_vanishing))
            && planted_found;
        if !ok {
            disagreements.push(member.name.clone());
        }
        rows.push(json!({
            "name": member.name,
            "category": member.category,
            "tail_sup": t1.tail.tail_sup,
            "vanishing": t1.vanishing,
            "detected": t1.detected.len(),
            "difference_tail_sup": t3.difference_tail.tail_sup,
            "theorem1_consistent": t1.consistent,
            "theorem3_consistent": t3.consistent,
        }));
    }
    outcome(
        disagreements.is_empty(),
        format!("{} members, disagreements: {:?}", corpus.len(), disagreements),
        json!({"members": rows, "disagreements": disagreements}),
    )
}

fn mode_recovery(elapsed: &mut Duration) -> Outcome {
    let start = Instant::now();
    let mut rng = random::rng(SEED + 6);
    let (mut worst_short, mut worst_long): (f64, f64) = (0.0, 0.0);
    let mut cases = Vec::new();
    for k in 1..=4 {
        for decay in [DecaySpec::geometric(0.8), DecaySpec::power(1.0)] {
            let mut thetas: Vec<Complex> = Vec::new();
            while thetas.len() < k {
                let t = random::unimodular(&mut rng);
                if thetas.iter().all(|&s| (t * s.conj()).arg().abs() >= 0.1) {
                    thetas.push(t);
                }
            }
            let vs: Vec<CVector> = thetas
                .iter()
                .map(|_| {
                    let v = random::disk_vector(&mut rng, 2);
                    let target = rng.gen_range(0.5..1.0);
                    v.scale(c(target / v.norm(), 0.0))
                })
                .collect();
            let spec = SequenceSpec::ModesPlusDecay {
                d: Some(2),
                modes: thetas.iter().zip(&vs).map(|(&theta, v)| ModeSpec { theta, v: v.clone() }).collect(),
                decay,
                horizon: 40_000,
                seed: rng.gen(),
            };
            let x = BoundedSeq::from_spec(&spec).unwrap();
            let err = |n_used: usize| {
                let m = extract_modes(&x, &thetas, n_used).unwrap();
                m.modes.iter().zip(&vs).map(|(m, v)| m.v.distance(v)).fold(0.0, f64::max)
            };
            let (short, long) = (err(10_000), err(40_000));
            worst_short = worst_short.max(short);
            worst_long = worst_long.max(long);
            cases.push(json!({"k": k, "decay": decay, "error_1e4": short, "error_4e4": long}));
        }
    }
    *elapsed = start.elapsed();
    let fast = *elapsed < Duration::from_secs(10);
    outcome(
        worst_short <= 1e-2 && worst_long <= 2.5e-3 && fast,
        format!(
            "worst error {worst_short:.2e} at 1e4, {worst_long:.2e} at 4e4 (ratio {:.2}), {:.3}s",
            worst_short / worst_long,
            elapsed.as_secs_f64()
        ),
        json!({"worst_error_1e4": worst_short, "worst_error_4e4": worst_long, "cases": cases}),
    )
}

fn difference_equation() -> Outcome {
    let mut rows = Vec::new();
    let mut ok = true;
    for sys in system_corpus(SEED + 7, HORIZON) {
        let system = sys.spec.system().unwrap();
        let traj = simulate_delay(&system, sys.spec.horizon).unwrap();
        let v = theorem6_verify(&system.b, &traj.seq, 1e-8).unwrap();
        let residual_ok = v.decomposition.residual.tail_sup < 1e-6;
        let needs_limit = sys.peripheral.iter().all(|&p| (p - 1.0).norm() < 1e-12);
        let limit_ok = !needs_limit || v.limit_test.as_ref().is_some_and(|l| l.passes);
        let found_ok = v.peripheral.len() == sys.peripheral.len();
        ok &= residual_ok && limit_ok && found_ok;
        rows.push(json!({
            "name": sys.name,
            "peripheral": v.peripheral,
            "residual_tail_sup": v.decomposition.residual.tail_sup,
            "limit_test": v.limit_test,
        }));
    }
    let worst = rows
        .iter()
        .map(|r| r["residual_tail_sup"].as_f64().unwrap())
        .fold(0.0, f64::max);
    outcome(ok, format!("4 systems, worst residual tail {worst:.2e}"), json!({"systems": rows}))
}

fn power_bounded_differences() -> Outcome {
    let mut rng = random::rng(SEED + 8);
    let mut worst: f64 = 0.0;
    let mut all_met = true;
    for i in 0..10 {
        let dim = 2 + i % 4;
        let theta = random::unimodular(&mut rng);
        let mut eigs = vec![theta];
        while eigs.len() < dim {
            eigs.push(random::unit_disk(&mut rng) * 0.9);
        }
        let t = random::diagonalizable(&mut rng, &eigs, 10.0);
        let v = ktz_check(&t, theta, 400).unwrap();
        all_met &= v.hypotheses_met && v.limit_attained;
        worst = worst.max(v.final_difference_norm.unwrap_or(f64::INFINITY));
    }
    let jordan = ktz_check(&CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]), c(1.0, 0.0), 400).unwrap();
    outcome(
        all_met && worst <= 1e-8 && !jordan.hypotheses_met,
        format!(
            "10 matrices, worst difference at n=400 {worst:.2e}; Jordan block hypotheses met: {}",
            jordan.hypotheses_met
        ),
        json!({"worst_final_difference": worst, "jordan_hypotheses_met": jordan.hypotheses_met, "jordan_growth": jordan.power.growth}),
    )
}

fn delay_probe() -> Outcome {
    let cfg = ScanConfig {
        grid_size: GRID,
        ..ScanConfig::default()
    };
    let sys = DelaySystem::new(
        CMatrix::identity(1),
        vec![CVector::from_real(&[1.0]), CVector::from_real(&[-1.0])],
        ForcingSpec::zero(),
    )
    .unwrap();
    let mut ok = true;
    let mut rows = Vec::new();
    for horizon in [16, 17, 31, 64, 100, 1024, 4096, HORIZON] {
        let r = theorem7_probe(&sys, horizon, 1e-8, &cfg).unwrap();
        let stated = r.stated_tail.map(|t| t.tail_sup).unwrap_or(f64::NAN);
        let p_step = r.p_step_tail.map(|t| t.tail_sup).unwrap_or(f64::NAN);
        ok &= r.hypotheses_met && (stated - 2.0).abs() <= 1e-12 && p_step <= 1e-12;
        rows.push(json!({"horizon": horizon, "stated": stated, "p_step": p_step,
                         "detected_at_pth_roots": r.detected_at_pth_roots}));
    }
    outcome(
        ok,
        "B = I, p = 2, initial (1, -1): statistic (i) = 2, (ii) = 0 at 8 horizons from 16 to 16384".to_string(),
        json!({"runs": rows}),
    )
}

fn run_suite(dir: &Path) -> Vec<(&'static str, Outcome)> {
    let mut t1 = Duration::ZERO;
    let mut t2 = Duration::ZERO;
    let mut t7 = Duration::ZERO;
    let results = vec![
        ("cayley-hamilton", cayley_hamilton(&mut t1)),
        ("gelfand-radius", gelfand(&mut t2)),
        ("resolvent-consistency", resolvent_consistency()),
        ("cauchy-recovery", cauchy_recovery()),
        ("isometry-resolvent-bound", isometry(SEED + 4)),
        ("sequence-spectrum-consistency", sequence_consistency()),
        ("mode-recovery", mode_recovery(&mut t7)),
        ("difference-equation-modes", difference_equation()),
        ("power-bounded-differences", power_bounded_differences()),
        ("delay-equation-probe", delay_probe()),
    ];
    for (name, o) in &results {
        write_json(&dir.join(format!("{name}.json")), &json!({"criterion": name, "pass": o.pass, "report": o.report}))
            .unwrap();
    }
    results
}

fn main() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let results = run_suite(a.path());
    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        all &= o.pass;
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.summary);
    }

    run_suite(b.path());
    let mut differing = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in &names {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        if x != y {
            differing.push(name.to_string_lossy().into_owned());
        }
    }
    let deterministic = differing.is_empty() && names.len() == results.len();
    all &= deterministic;
    println!(
        "{} 11 determinism: {} report files, byte-identical across two runs{}",
        if deterministic { "PASS" } else { "FAIL" },
        names.len(),
        if differing.is_empty() { String::new() } else { format!("; differing: {differing:?}") }
    );

    if !all {
        std::process::exit(1);
    }
}
