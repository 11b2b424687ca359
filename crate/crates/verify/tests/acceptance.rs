//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line, followed
//! by indented detail lines; the process exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use clap::Parser;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use mhjump::finite::{make_m1, make_m2, mix, random_chain};
use mhjump::harness::{
    compare_ensembles, folded_normal_moment, gaussian_abs_moment, generator_convergence_probe,
    ks_decreases_with_epsilon, moment_report, TestFunction,
};
use mhjump::kernel::{log_rate_density, rate_density};
use mhjump::langevin::{simulate_langevin, SdeConfig, SdeVariant};
use mhjump::quadrature::{integrate_with, QuadOptions};
use mhjump::rng::{domain, stream_rng, PathRng};
use mhjump::simulate::{simulate_ensemble, JumpSimulator};
use mhjump::stats::{chi_square_gof, loglog_slope};
use mhjump::{CoordinateMove, GeneratorKind, ProposalSpec, TargetPotential};
use mhjump_cli::commands::chain_geometry;
use mhjump_cli::Cli;
use mhjump_verify::{report, Criterion, Outcome};

const SEED: u64 = 20_240_601;
const KINDS: [GeneratorKind; 3] = [GeneratorKind::M1, GeneratorKind::M2, GeneratorKind::Mix(0.5)];
const SLOPE_LO: f64 = 0.35;
const SLOPE_HI: f64 = 0.65;

fn in_window(s: f64) -> bool {
    (SLOPE_LO..=SLOPE_HI).contains(&s)
}

fn quad() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-11,
        rel_tol: 0.0,
        max_intervals: 4000,
    }
}

fn ac1_geometry() -> Outcome {
    let mut out = Outcome::new();
    let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let (mut eq_gap, mut adv_gap) = (0.0_f64, f64::INFINITY);
    for c in 0..100u64 {
        let chain = random_chain(5, &mut stream_rng(SEED, domain::AUX, c));
        let mut rng = stream_rng(SEED, domain::AUX, (1 << 32) + c);
        let geo = chain_geometry(&chain, &alphas, 10_000, &mut rng).expect("geometry");
        for d in &geo.mix_distances {
            eq_gap = eq_gap.max((d - geo.optimum).abs());
        }
        adv_gap = adv_gap.min(geo.random_min - geo.optimum);
    }
    out.expect(eq_gap <= 1e-12, format!("max |d(Q, mix(alpha)) - d(Q, M1)| = {eq_gap:.3e} <= 1e-12"));
    out.expect(adv_gap >= -1e-12, format!("min d(Q, R) - d(Q, M1) = {adv_gap:.3e} >= -1e-12"));
    out.summary = format!("equality gap {eq_gap:.2e}, adversarial margin {adv_gap:.2e}");
    out
}

fn ac2_reversibility() -> Outcome {
    let mut out = Outcome::new();
    let mut finite = 0.0_f64;
    for c in 0..100u64 {
        let chain = random_chain(5, &mut stream_rng(SEED, domain::AUX, 7 << 40 | c));
        let (m1, m2) = (make_m1(&chain), make_m2(&chain));
        let m = mix(&m1, &m2, 0.5).expect("mix");
        for a in [&m1, &m2, &m] {
            finite = finite.max(chain.reversibility_defect(a));
        }
    }
    out.expect(finite <= 1e-14, format!("finite chains: max |mu(x)M(x,y) - mu(y)M(y,x)| = {finite:.3e} <= 1e-14"));

    let cases = [
        ("double_well d=3", TargetPotential::double_well(3, 1.0, 2.0).unwrap()),
        ("quadratic d=2", TargetPotential::quadratic(2, 1.0).unwrap()),
    ];
    let mut worst = 0.0_f64;
    for (name, target) in &cases {
        let proposal = ProposalSpec::new(target.dim(), 0.1).unwrap();
        let mut rng = stream_rng(SEED, domain::AUX, 8 << 40);
        for kind in KINDS {
            let mut w = 0.0_f64;
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..target.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
                let i = rng.random_range(0..target.dim());
                let y = CoordinateMove::new(i, rng.random_range(-3.0..3.0));
                let yx = y.apply(&x);
                let lhs = -target.energy(&x).unwrap() / target.temperature()
                    + log_rate_density(kind, target, &proposal, &x, y).unwrap();
                let rhs = -target.energy(&yx).unwrap() / target.temperature()
                    + log_rate_density(kind, target, &proposal, &yx, y.reverse(&x)).unwrap();
                w = w.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));
            }
            out.note(format!("{name} {kind}: max relative log-density defect {w:.3e}"));
            worst = worst.max(w);
        }
    }
    out.expect(worst <= 1e-12, format!("continuous kernels: max relative defect {worst:.3e} <= 1e-12"));
    out.summary = format!("finite {finite:.2e}, continuous {worst:.2e}");
    out
}

fn moment_grid(dim: usize) -> Vec<Vec<f64>> {
    let rest = [0.7, -0.45];
    [-1.7, -0.6, 0.4, 1.3, 2.2]
        .iter()
        .map(|&v| std::iter::once(v).chain(rest.iter().copied()).take(dim).collect())
        .collect()
}

const LIMIT_EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

fn ac3_moment_orders() -> Outcome {
    let mut out = Outcome::new();
    let mut worst_q = 0.0_f64;
    for dim in [1, 3] {
        let targets = [
            ("double_well", TargetPotential::double_well(dim, 1.0, 2.0).unwrap()),
            ("quadratic", TargetPotential::quadratic(dim, 1.0).unwrap()),
        ];
        for (name, target) in &targets {
            for kind in KINDS {
                let r = moment_report(kind, target, &moment_grid(dim), 0, &LIMIT_EPS, quad()).expect("moments");
                worst_q = worst_q.max(r.max_quadrature_error());
                let [s1, s2, s3] = r.slopes;
                out.expect(
                    in_window(s1) && in_window(s2) && s3 >= SLOPE_LO,
                    format!("{name} d={dim} {kind}: slopes drift {s1:.3}, volatility {s2:.3} in [0.35, 0.65]; third {s3:.3} >= 0.35"),
                );
            }
        }
    }
    out.expect(worst_q <= 1e-10, format!("max quadrature error {worst_q:.2e} <= 1e-10"));
    out.summary = "drift/volatility slopes in [0.35, 0.65], third-moment slope >= 0.35".into();
    out
}

fn ac4_folded_moments() -> Outcome {
    let mut out = Outcome::new();
    let grid = [1e-4, 1e-5, 1e-6, 1e-7];
    for t in [0.0, 1.0, 5.0] {
        for (k, order) in [(3u32, 1.5), (4, 2.0)] {
            let est: Vec<_> = grid.iter().map(|&e| folded_normal_moment(t, k, e).unwrap()).collect();
            let slope = loglog_slope(&grid, &est.iter().map(|e| e.value).collect::<Vec<_>>());
            out.expect(
                (slope - order).abs() <= 0.05,
                format!("t={t} k={k}: slope {slope:.5} within {order} +- 0.05"),
            );
            if t == 0.0 {
                for (e, &eps) in grid.iter().enumerate() {
                    let closed = if k == 3 {
                        2.0 * (2.0 / std::f64::consts::PI).sqrt() * eps.powf(1.5)
                    } else {
                        3.0 * eps * eps
                    };
                    let rel = (est[e].value / closed - 1.0).abs();
                    out.expect(rel <= 1e-10, format!("t=0 k={k} eps={eps:e}: relative gap {rel:.2e} <= 1e-10"));
                }
            }
        }
    }
    // Cross-check the two closed forms against the gamma-function moment.
    for k in [3, 4] {
        let g = gaussian_abs_moment(k, 1.0);
        let c = if k == 3 { 2.0 * (2.0 / std::f64::consts::PI).sqrt() } else { 3.0 };
        out.note(format!("E|N(0,1)|^{k}: gamma form {g:.15}, closed {c:.15}"));
    }
    out.summary = "slopes 1.5 and 2.0 within 0.05, t=0 closed forms to 1e-10".into();
    out
}

fn ac5_generator_convergence() -> Outcome {
    let mut out = Outcome::new();
    let targets = [
        ("double_well", TargetPotential::double_well(1, 1.0, 2.0).unwrap()),
        ("quadratic", TargetPotential::quadratic(1, 1.0).unwrap()),
    ];
    let functions = TestFunction::library(0.3, 2.5).unwrap();
    for (name, target) in &targets {
        for kind in KINDS {
            for f in &functions {
                let r = generator_convergence_probe(kind, target, f, &moment_grid(1), &LIMIT_EPS, quad()).expect("probe");
                out.expect(
                    in_window(r.slope),
                    format!("{name} {kind} {:?}: sup-gap slope {:.3} in 0.5 +- 0.15", f.shape, r.slope),
                );
            }
        }
    }
    out.summary = "sup-gap slope in 0.5 +- 0.15 for M1, M2, Mix(0.5) and three bumps".into();
    out
}

fn ac6_universality() -> Outcome {
    let mut out = Outcome::new();
    let n = 10_000;
    let target = TargetPotential::quadratic(1, 1.0).unwrap();
    let grid = [0.5, 1.0];
    let x0 = [1.0];
    let sde = SdeConfig::new(1e-4, SdeVariant::Rescaled).unwrap();
    let reference = simulate_langevin(&target, &x0, &grid, n, sde, SEED).unwrap();
    let epsilons = [1e-1, 1e-2, 1e-3];
    for (ki, kind) in KINDS.into_iter().enumerate() {
        let mut per_time: Vec<Vec<(f64, f64)>> = vec![Vec::new(); grid.len()];
        let mut noise = 0.0;
        for (ei, &eps) in epsilons.iter().enumerate() {
            let proposal = ProposalSpec::new(1, eps).unwrap();
            let seed = SEED + 1 + 16 * ki as u64 + ei as u64;
            let jump = simulate_ensemble(kind, &target, &proposal, &x0, &grid, n, seed).unwrap();
            let rep = compare_ensembles(&jump, &reference).unwrap();
            noise = rep.ks_noise();
            for (g, &t) in grid.iter().enumerate() {
                let m = rep.gap_at(t, 0).unwrap();
                per_time[g].push((eps, m.ks));
                if eps == 1e-3 {
                    out.expect(
                        m.ks < m.ks_critical,
                        format!("{kind} t={t} eps=1e-3: KS {:.4} < {:.4}", m.ks, m.ks_critical),
                    );
                } else {
                    out.note(format!("{kind} t={t} eps={eps:e}: KS {:.4}", m.ks));
                }
            }
        }
        for (g, &t) in grid.iter().enumerate() {
            out.expect(
                ks_decreases_with_epsilon(&per_time[g], noise, 2.0),
                format!("{kind} t={t}: KS non-increasing in eps up to 2 x {noise:.4}"),
            );
        }
    }
    out.summary = "all rescaled jump ensembles within the 95% KS critical value of Langevin".into();
    out
}

/// Exact draw from `exp(-U)` for the 1-d smoothed double well at `T = 1`,
/// using `U(v) >= |v|` and a Laplace envelope.
fn gibbs_draw(target: &TargetPotential, rng: &mut PathRng) -> f64 {
    loop {
        let e: f64 = Exp1.sample(rng);
        let v = if rng.random::<bool>() { e } else { -e };
        let excess = target.energy(&[v]).unwrap() - v.abs();
        if rng.random::<f64>() < (-excess).exp() {
            return v;
        }
    }
}

fn gibbs_cells(target: &TargetPotential, edges: &[f64]) -> Vec<f64> {
    let density = |v: f64| target.energy(&[v]).map(|u| (-u / target.temperature()).exp());
    let opts = QuadOptions::absolute(1e-14);
    let bounds: Vec<f64> = std::iter::once(-60.0)
        .chain(edges.iter().copied())
        .chain(std::iter::once(60.0))
        .collect();
    bounds
        .windows(2)
        .map(|w| integrate_with(density, w[0], w[1], &[], opts).unwrap().value)
        .collect()
}

fn ac7_stationarity() -> Outcome {
    let mut out = Outcome::new();
    let target = TargetPotential::double_well(1, 1.0, 2.0).unwrap();
    let proposal = ProposalSpec::new(1, 1.0).unwrap();
    let edges: Vec<f64> = (1..50).map(|j| -4.0 + 8.0 * j as f64 / 50.0).collect();
    let probs = gibbs_cells(&target, &edges);
    let (paths, horizon) = (100_000u64, 25.0);
    for kind in [GeneratorKind::M1, GeneratorKind::M2] {
        let sim = JumpSimulator::new(kind, &target, &proposal).unwrap();
        let mut counts = vec![0u64; probs.len()];
        let mut jumps = 0;
        for p in 0..paths {
            let mut rng = stream_rng(SEED, domain::JUMP, p);
            let x0 = [gibbs_draw(&target, &mut rng)];
            let mut x = [0.0];
            jumps += sim.observe(&x0, &[horizon], 1.0, &mut rng, &mut x).unwrap().jumps;
            counts[edges.partition_point(|&e| e <= x[0])] += 1;
        }
        let chi = chi_square_gof(&counts, &probs, 5.0);
        out.expect(jumps >= 1_000_000, format!("{kind}: {jumps} accepted jumps >= 1e6"));
        out.expect(
            chi.p_value > 1e-3,
            format!("{kind}: chi-square {:.1} on {} dof, p = {:.4} > 0.001", chi.statistic, chi.dof, chi.p_value),
        );
    }
    out.summary = "occupation at the horizon matches the Gibbs density on 50 bins".into();
    out
}

fn displacement_cells(target: &TargetPotential, proposal: &ProposalSpec, x: &[f64], edges: &[f64]) -> Vec<f64> {
    let rate = |z: f64| rate_density(GeneratorKind::M2, target, proposal, x, CoordinateMove::by(x, 0, z));
    let sd = proposal.epsilon().sqrt();
    let opts = QuadOptions::absolute(1e-14);
    let bounds: Vec<f64> = std::iter::once(-40.0 * sd)
        .chain(edges.iter().copied())
        .chain(std::iter::once(40.0 * sd))
        .collect();
    // s2 has a kink where U(x + z) = U(x), which includes z = 0.
    let kinks = [0.0, -2.0 * x[0]];
    bounds
        .windows(2)
        .map(|w| integrate_with(rate, w[0], w[1], &kinks, opts).unwrap().value)
        .collect()
}

fn ac8_thinning() -> Outcome {
    let mut out = Outcome::new();
    let eps: f64 = 1e-2;
    let sd = eps.sqrt();
    let proposal = ProposalSpec::new(1, eps).unwrap();
    let edges: Vec<f64> = (0..=60).map(|j| sd * (-3.0 + 0.1 * j as f64)).collect();
    let cases = [
        ("double_well x=0.6", TargetPotential::double_well(1, 1.0, 2.0).unwrap(), 0.6),
        ("quadratic x=1.5", TargetPotential::quadratic(1, 1.0).unwrap(), 1.5),
    ];
    for (name, target, x) in &cases {
        let probs = displacement_cells(target, &proposal, &[*x], &edges);
        let sim = JumpSimulator::new(GeneratorKind::M2, target, &proposal).unwrap();
        let mut rng = stream_rng(SEED, domain::AUX, 9 << 40);
        let mut counts = vec![0u64; probs.len()];
        for _ in 0..1_000_000 {
            let z = sim.first_jump(&[*x], &mut rng).unwrap().displacement;
            counts[edges.partition_point(|&e| e <= z)] += 1;
        }
        let chi = chi_square_gof(&counts, &probs, 5.0);
        out.expect(
            chi.p_value > 1e-3,
            format!("{name}: chi-square {:.1} on {} dof, p = {:.4} > 0.001", chi.statistic, chi.dof, chi.p_value),
        );
    }
    out.summary = "M2 first-jump displacements match the normalised rate density".into();
    out
}

fn run_cli(dir: &Path, threads: usize, sub: &str) {
    let config = dir.join("config.json");
    let out = dir.join("out").join(sub);
    let threads = threads.to_string();
    let args = ["mhjump", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let cli = Cli::parse_from(args.into_iter().chain(["--threads", &threads, "--seed", "17", "--quiet", sub]));
    assert_eq!(mhjump_cli::run(&cli), 0, "mhjump {sub} failed");
}

/// Every file under `dir/<sub>`, with the manifests' timestamps removed.
fn artifacts(dir: &Path, subs: &[&str], files: &mut BTreeMap<String, Vec<u8>>) {
    for entry in subs.iter().flat_map(|s| fs::read_dir(dir.join(s)).unwrap()) {
        let path = entry.unwrap().path();
        let name = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
        let mut bytes = fs::read(&path).unwrap();
        if name.ends_with("manifest.json") {
            let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
            let obj = v.as_object_mut().unwrap();
            obj.remove("started_unix");
            obj.remove("finished_unix");
            bytes = serde_json::to_vec(&v).unwrap();
        }
        files.insert(name, bytes);
    }
}

fn ac9_determinism() -> Outcome {
    let mut out = Outcome::new();
    let config = r#"{
        "potential": {"name": "double_well", "params": [2.0]},
        "kind": "mix:0.5",
        "epsilon": 0.01,
        "obs_grid": [0.25, 0.5, 1.0],
        "x0": [0.5],
        "paths": 4000,
        "reference_paths": 4000,
        "dt": 0.001,
        "geometry": {"chains": 5, "reversible_draws": 200}
    }"#;
    let subs = ["simulate", "langevin", "verify-geometry"];
    let mut runs = Vec::new();
    for threads in [1, 1, 4] {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("config.json"), config).unwrap();
        for sub in subs {
            run_cli(dir.path(), threads, sub);
        }
        let mut files = BTreeMap::new();
        artifacts(&dir.path().join("out"), &subs, &mut files);
        runs.push(files);
    }
    out.note(format!("artifacts compared: {}", runs[0].keys().cloned().collect::<Vec<_>>().join(", ")));
    out.expect(runs[0].len() > 1, format!("{} artifacts written", runs[0].len()));
    out.expect(runs[0] == runs[1], "two runs with threads=1 are byte-identical".into());
    out.expect(runs[0] == runs[2], "threads=1 and threads=4 are byte-identical".into());
    out.summary = "repeat runs and thread counts 1, 4 give byte-identical artifacts".into();
    out
}

/// Numbers printed next to the suite, not pass/fail criteria: the order of
/// the Mix(0.5) errors, whose sqrt(eps) terms cancel.
fn mix_half_order() {
    let target = TargetPotential::double_well(1, 1.0, 2.0).unwrap();
    let r = moment_report(GeneratorKind::Mix(0.5), &target, &moment_grid(1), 0, &LIMIT_EPS, quad()).unwrap();
    println!(
        "info mix:0.5 double_well d=1 moment error slopes: drift {:.3}, volatility {:.3}, third {:.3}",
        r.slopes[0], r.slopes[1], r.slopes[2]
    );
    let f = &TestFunction::library(0.3, 2.5).unwrap()[0];
    let p = generator_convergence_probe(GeneratorKind::Mix(0.5), &target, f, &moment_grid(1), &LIMIT_EPS, quad()).unwrap();
    println!("info mix:0.5 double_well {:?} generator gap slope {:.3}", f.shape, p.slope);
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let criteria = [
        Criterion { id: "AC1", name: "finite-geometry optimality", budget: minutes(1), run: ac1_geometry },
        Criterion { id: "AC2", name: "reversibility", budget: None, run: ac2_reversibility },
        Criterion { id: "AC3", name: "generator moment orders", budget: minutes(5), run: ac3_moment_orders },
        Criterion { id: "AC4", name: "folded normal moment orders", budget: None, run: ac4_folded_moments },
        Criterion { id: "AC5", name: "generator convergence", budget: minutes(5), run: ac5_generator_convergence },
        Criterion { id: "AC6", name: "universality against Langevin", budget: minutes(15), run: ac6_universality },
        Criterion { id: "AC7", name: "stationarity", budget: None, run: ac7_stationarity },
        Criterion { id: "AC8", name: "thinning correctness", budget: None, run: ac8_thinning },
        Criterion { id: "AC9", name: "determinism", budget: None, run: ac9_determinism },
    ];
    let failed = report(&criteria);
    mix_half_order();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: {} of {} criteria failed: {}", failed.len(), criteria.len(), failed.join(", "));
        std::process::exit(1);
    }
}
