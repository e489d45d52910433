//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use discinterp::cli::Document;
use discinterp::constants::{
    cnr_sweep, interp_constant, witness_function, witness_lower_bound, BoundReport, ConstantOptions, SweepOptions,
};
use discinterp::discfun::{CoeffSeries, SigmaSet, C64};
use discinterp::extremal::{cs_min_norm, pick_min_norm, quotient_norm, PickProblem};
use discinterp::modelspace::{
    bernstein_bound, bernstein_ratio, derivative_operator_norm, malmquist_basis, project, t_operator_norm,
};
use discinterp::spaces::{min_norm_trace, norm, power_inequality_check, reproducing_kernel, SpaceSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Box<dyn FnOnce() -> Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn point(rng: &mut ChaCha8Rng, r_max: f64) -> C64 {
    C64::from_polar(rng.random_range(0.0..=r_max), rng.random_range(-PI..PI))
}

fn random_sigma(rng: &mut ChaCha8Rng, n_max: usize, r_max: f64) -> SigmaSet {
    let n = rng.random_range(1..=n_max);
    SigmaSet::new((0..n).map(|_| point(rng, r_max)).collect()).unwrap()
}

/// Distinct points at least `gap` apart.
fn random_distinct(rng: &mut ChaCha8Rng, n_max: usize, r_max: f64, gap: f64) -> SigmaSet {
    let n = rng.random_range(1..=n_max);
    let mut pts: Vec<C64> = Vec::new();
    while pts.len() < n {
        let z = point(rng, r_max);
        if pts.iter().all(|p| (p - z).norm() >= gap) {
            pts.push(z);
        }
    }
    SigmaSet::new(pts).unwrap()
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> CoeffSeries {
    let d = rng.random_range(0..=max_degree);
    CoeffSeries::new(
        (0..=d)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!("{} [{:.2}s]", out.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            out.pass = false;
            out.detail = format!("{} exceeds {:?}", out.detail, limit);
        }
    }
    out
}

fn malmquist_orthonormality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let mut sigma = random_sigma(&mut rng, 8, 0.95);
        if trial % 10 == 0 {
            // exercise repeated points as well
            let p = sigma.points()[0];
            sigma = SigmaSet::repeated(p, 1 + trial % 7).unwrap();
        }
        let g = malmquist_basis(&sigma, None).unwrap().gram();
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - C64::new(delta, 0.0)).norm());
            }
        }
    }
    outcome(worst <= 1e-8, format!("max |<e_j,e_k> - δ| = {worst:.2e} (≤ 1e-8)"))
}

fn interpolation_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut sigmas: Vec<SigmaSet> = (0..40).map(|_| random_sigma(&mut rng, 6, 0.9)).collect();
    sigmas.push(SigmaSet::repeated(C64::new(0.4, -0.3), 3).unwrap());
    sigmas.push(SigmaSet::repeated(C64::new(0.0, 0.0), 3).unwrap());
    sigmas.push(SigmaSet::repeated(C64::new(-0.85, 0.1), 3).unwrap());
    let mut worst: f64 = 0.0;
    for sigma in &sigmas {
        let basis = malmquist_basis(sigma, None).unwrap();
        let f = random_poly(&mut rng, 32);
        let tf = project(&basis, &f);
        let (jf, jt) = (sigma.jet_of(&f), sigma.jet_of(&tf));
        let scale = jf.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        let err = jf.iter().zip(&jt).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
        worst = worst.max(err);
    }
    outcome(
        worst <= 1e-7,
        format!("max relative jet error = {worst:.2e} over {} σ (≤ 1e-7)", sigmas.len()),
    )
}

fn bernstein_first_order() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..200 {
        let sigma = random_sigma(&mut rng, 10, 0.9);
        let ratio = bernstein_ratio(&sigma).unwrap();
        let bound = 2.5 * sigma.n() as f64 / (1.0 - sigma.r());
        worst_ratio = worst_ratio.max(ratio / bound);
        if ratio > bound {
            violations += 1;
        }
    }
    let mut floor_ok = true;
    for n in 1..=10 {
        let ratio = bernstein_ratio(&SigmaSet::repeated(C64::new(0.0, 0.0), n).unwrap()).unwrap();
        floor_ok &= ratio >= n as f64 - 1.0 - 1e-12;
    }
    outcome(
        violations == 0 && floor_ok,
        format!("{violations} violations, max ratio/bound = {worst_ratio:.3}; z^n floor n-1 holds: {floor_ok}"),
    )
}

fn bernstein_iterated() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let sigma = random_sigma(&mut rng, 6, 0.9);
        for k in [2, 3] {
            let v = derivative_operator_norm(&sigma, k).unwrap();
            let b = bernstein_bound(sigma.n(), sigma.r(), k);
            worst = worst.max(v / b);
            if v > b {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations, max norm/bound = {worst:.3}"),
    )
}

fn caratheodory_schur() -> Outcome {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let one = C64::new(1.0, 0.0);
    let cs = cs_min_norm(&[one, one]).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let lambda = point(&mut rng, 0.8);
        let f = random_poly(&mut rng, 6);
        let mu = lambda + 1e-3;
        let pick = pick_min_norm(
            &PickProblem::new(vec![lambda, mu], vec![f.eval(lambda), f.eval(mu)]).unwrap(),
            1e-12,
        )
        .unwrap()
        .value;
        let quotient = quotient_norm(&f, &SigmaSet::repeated(lambda, 2).unwrap(), 1e-12)
            .unwrap()
            .value;
        worst = worst.max((pick - quotient).abs() / quotient);
    }
    let cs_err = (cs - golden).abs();
    outcome(
        cs_err <= 1e-9 && worst <= 1e-2,
        format!("|cs(1,1) - golden| = {cs_err:.1e}; max coalescence gap = {worst:.2e} (≤ 1e-2)"),
    )
}

fn dirichlet_fejer_chain() -> Outcome {
    let h2 = SpaceSpec::hardy2();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [4usize, 9, 16, 25] {
        let w = witness_lower_bound(&h2, C64::new(0.0, 0.0), n).unwrap();
        let peak = witness_function(&h2, C64::new(0.0, 0.0), n)
            .unwrap()
            .eval(C64::new(1.0, 0.0));
        let exact = (n as f64 + 1.0) / 2.0;
        pass &= w >= 0.5 * (n as f64).sqrt() && (peak - exact).norm() <= 1e-12 * exact;
        parts.push(format!("n={n}: {w:.4} ≥ {:.4}", 0.5 * (n as f64).sqrt()));
    }
    outcome(pass, format!("{}; (p_n⋆K_n)(1) = (n+1)/2", parts.join(", ")))
}

fn hardy_lower_side() -> Outcome {
    let h2 = SpaceSpec::hardy2();
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for n in [4usize, 8, 16, 32] {
        for r in [0.0, 0.5, 0.9] {
            let w = witness_lower_bound(&h2, C64::new(r, 0.0), n).unwrap();
            let bound = (n as f64 / (1.0 - r) / 32.0).sqrt();
            min_margin = min_margin.min(w / bound);
            if w < bound {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations, min witness/bound = {min_margin:.3}"),
    )
}

fn slope_of(space: SpaceSpec, target: f64, band: f64) -> Outcome {
    let opts = SweepOptions {
        estimate_max_n: 0,
        ..Default::default()
    };
    let rep = cnr_sweep(&space, &[4, 8, 16, 32, 64], &[0.5], &opts).unwrap();
    let slope = rep.slope_witness.unwrap_or(f64::NAN);
    outcome(
        (slope - target).abs() <= band,
        format!("slope = {slope:.4} (target {target} ± {band})"),
    )
}

fn sandwich() -> Outcome {
    let h2 = SpaceSpec::hardy2();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = 0;
    let mut tightest: f64 = f64::INFINITY;
    for trial in 0..30 {
        let sigma = random_distinct(&mut rng, 5, 0.8, 0.05);
        let opts = ConstantOptions {
            seed: trial,
            ..Default::default()
        };
        let est = interp_constant(&h2, &sigma, &opts).unwrap().value;
        let t = t_operator_norm(&h2, &sigma).unwrap();
        // probes, through the explicit interpolant and the Pick solver
        let mut probe: f64 = 0.0;
        for &lambda in sigma.points() {
            let k = reproducing_kernel(&h2, lambda).unwrap();
            let q = quotient_norm(&k, &sigma, 1e-10).unwrap().value;
            probe = probe.max(q / norm(&h2, &k).unwrap());
        }
        for _ in 0..4 {
            let a: Vec<C64> = (0..sigma.n())
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let m = min_norm_trace(&h2, &sigma, &a).unwrap();
            let q = quotient_norm(&m.interpolant, &sigma, 1e-10).unwrap().value;
            probe = probe.max(q / m.norm);
        }
        tightest = tightest.min(t - est);
        if probe > est * (1.0 + 1e-6) || est > t + 1e-6 {
            failures += 1;
        }
    }
    let single = interp_constant(
        &h2,
        &SigmaSet::new(vec![C64::new(0.8, 0.0)]).unwrap(),
        &ConstantOptions::default(),
    )
    .unwrap()
    .value;
    let single_ok = (single - 5.0 / 3.0).abs() <= 1e-4;
    outcome(
        failures == 0 && single_ok,
        format!("{failures} sandwich failures (min T-norm slack {tightest:.2e}); c({{0.8}}) = {single:.6}"),
    )
}

fn power_inequality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for alpha in [1.0, 1.5, 2.0] {
        for _ in 0..100 {
            let f = random_poly(&mut rng, 12);
            let (lhs, rhs) = power_inequality_check(alpha, &f).unwrap();
            worst = worst.max(lhs - rhs);
            if lhs > rhs + 1e-9 * rhs.max(1.0) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in 300 checks, max lhs - rhs = {worst:.2e}"),
    )
}

fn run_cli(args: &[&str], threads: Option<&str>) -> Result<String, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_discinterp"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("DISCINTERP_THREADS", t);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let args = [
        "sweep", "--n-grid", "1,2,3,8", "--r-grid", "0,0.5", "--seed", "42", "--budget", "12",
    ];
    let runs: Result<Vec<String>, String> = [None, None, Some("1")].iter().map(|t| run_cli(&args, *t)).collect();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let bodies: Vec<String> = runs.iter().map(|r| csv_body(r)).collect();
    let identical = bodies.iter().all(|b| *b == bodies[0]) && bodies[0].lines().count() == 9;

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json", "--reproducible"]);
    let round_trip = run_cli(&json_args, None)
        .ok()
        .and_then(|text| serde_json::from_str::<Document<BoundReport>>(&text).ok())
        .is_some_and(|doc| {
            let opts = SweepOptions {
                budget: 12,
                seed: 42,
                ..Default::default()
            };
            let direct = cnr_sweep(&SpaceSpec::hardy2(), &[1, 2, 3, 8], &[0.0, 0.5], &opts).unwrap();
            doc.records == direct.rows
        });
    outcome(
        identical && round_trip,
        format!("3 sweep runs (one single-threaded) identical: {identical}; json records round-trip: {round_trip}"),
    )
}

fn main() {
    let criteria: Vec<(&str, Check)> = vec![
        (
            "1 Malmquist orthonormality",
            Box::new(|| timed(Some(Duration::from_secs(10)), malmquist_orthonormality)),
        ),
        (
            "2 interpolation property of T",
            Box::new(|| timed(None, interpolation_property)),
        ),
        (
            "3 Bernstein inequality, first order",
            Box::new(|| timed(Some(Duration::from_secs(30)), bernstein_first_order)),
        ),
        (
            "4 Bernstein inequality, orders 2 and 3",
            Box::new(|| timed(None, bernstein_iterated)),
        ),
        (
            "5 Caratheodory-Schur oracle and coalescence",
            Box::new(|| timed(None, caratheodory_schur)),
        ),
        (
            "6 Dirichlet-Fejer witness chain",
            Box::new(|| timed(None, dirichlet_fejer_chain)),
        ),
        (
            "7 Hardy lower side",
            Box::new(|| timed(Some(Duration::from_secs(60)), hardy_lower_side)),
        ),
        (
            "8 Hardy(2) scaling slope",
            Box::new(|| timed(None, || slope_of(SpaceSpec::hardy2(), 0.5, 0.15))),
        ),
        (
            "9 SeqWeighted(2, 1.5) scaling slope",
            Box::new(|| {
                timed(None, || {
                    slope_of(SpaceSpec::SeqWeighted { p: 2.0, alpha: 1.5 }, 1.0, 0.2)
                })
            }),
        ),
        ("10 sandwich", Box::new(|| timed(None, sandwich))),
        ("11 power inequality", Box::new(|| timed(None, power_inequality))),
        ("12 determinism", Box::new(|| timed(None, determinism))),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let out = check();
        if !out.pass {
            failed += 1;
        }
        println!("[{}] {name}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
