//! Subcommand bodies. Each takes a resolved [`RunContext`], writes its
//! artifacts into the output directory and records numerical checks.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mhjump::ensemble::ObservedEnsemble;
use mhjump::finite::{
    d_mu, half_space_masses, make_m1, make_m2, mix, random_chain, random_reversible, FiniteChain,
};
use mhjump::harness::{
    compare_ensembles, folded_normal_moment, generator_convergence_probe, ks_decreases_with_epsilon,
    moment_report, s_bound_check, write_report_csv, ReportRow, MOMENT_TOL,
};
use mhjump::langevin::{simulate_langevin, SdeConfig, SdeVariant};
use mhjump::quadrature::QuadOptions;
use mhjump::rng::{domain, stream_rng, PathRng};
use mhjump::simulate::simulate_ensemble;
use mhjump::stats::loglog_slope;
use mhjump::{GeneratorKind, ProposalSpec};

use crate::checks::{Check, CheckLog, Tolerance};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::plots::{emit_plot_data, PlotPoint};

/// Window for the log-log slope of `O(sqrt(eps))` errors.
pub const HALF_ORDER_WINDOW: Tolerance = Tolerance::Within { lo: 0.35, hi: 0.65 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Langevin,
    VerifyLimit,
    VerifyGeometry,
    Moments,
    SBound,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Langevin => "langevin",
            Command::VerifyLimit => "verify-limit",
            Command::VerifyGeometry => "verify-geometry",
            Command::Moments => "moments",
            Command::SBound => "sbound",
        }
    }

    /// Files the command writes, relative to the output directory.
    pub fn outputs(&self, cfg: &ExperimentConfig) -> Result<Vec<String>, CliError> {
        Ok(match self {
            Command::Simulate => {
                let tag = file_tag(cfg.generator()?);
                vec![format!("jump_{tag}.csv"), format!("jump_{tag}.bin")]
            }
            Command::Langevin => vec!["langevin.csv".into(), "langevin.bin".into()],
            Command::VerifyLimit => [
                "moments.csv",
                "generator_gap.csv",
                "ks.csv",
                "drift.csv",
                "volatility.csv",
                "ks_vs_eps.csv",
            ]
            .map(String::from)
            .to_vec(),
            Command::VerifyGeometry => vec!["geometry.csv".into(), "dmu_alpha.csv".into()],
            Command::Moments => vec!["folded_moments.csv".into()],
            Command::SBound => vec!["sbound.csv".into()],
        })
    }
}

pub fn file_tag(kind: GeneratorKind) -> String {
    kind.to_string().replace(':', "_")
}

pub struct RunContext {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub quiet: bool,
    pub log: CheckLog,
}

impl RunContext {
    fn check(&mut self, c: Check) {
        if !c.passed() {
            eprintln!("{c}");
        } else if !self.quiet {
            println!("{c}");
        }
        self.log.push(c);
    }

    fn create(&self, name: &str) -> Result<BufWriter<fs::File>, CliError> {
        let path = self.out_dir.join(name);
        let f = fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(BufWriter::new(f))
    }

    fn quad(&self) -> QuadOptions {
        self.config.quadrature.into()
    }
}

fn write_ensemble(ctx: &RunContext, stem: &str, ens: &ObservedEnsemble) -> Result<(), CliError> {
    let mut csv = ctx.create(&format!("{stem}.csv"))?;
    ens.write_csv(&mut csv)?;
    csv.flush()?;
    let mut bin = ctx.create(&format!("{stem}.bin"))?;
    ens.write_binary(&mut bin)?;
    bin.flush()?;
    Ok(())
}

fn reference(ctx: &RunContext) -> Result<ObservedEnsemble, CliError> {
    let cfg = &ctx.config;
    let sde = SdeConfig::new(cfg.dt, SdeVariant::Rescaled)?;
    Ok(simulate_langevin(&cfg.target()?, &cfg.x0, &cfg.obs_grid, cfg.reference_paths, sde, ctx.seed)?)
}

pub fn simulate(ctx: &mut RunContext) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let kind = cfg.generator()?;
    let target = cfg.target()?;
    let proposal = ProposalSpec::new(cfg.dim, cfg.epsilon)?;
    let ens = simulate_ensemble(kind, &target, &proposal, &cfg.x0, &cfg.obs_grid, cfg.paths, ctx.seed)?;
    write_ensemble(ctx, &format!("jump_{}", file_tag(kind)), &ens)
}

pub fn langevin(ctx: &mut RunContext) -> Result<(), CliError> {
    let ens = reference(ctx)?;
    write_ensemble(ctx, "langevin", &ens)
}

fn write_rows(ctx: &RunContext, name: &str, rows: &[ReportRow]) -> Result<(), CliError> {
    let mut w = ctx.create(name)?;
    write_report_csv(rows, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn verify_limit(ctx: &mut RunContext) -> Result<(), CliError> {
    let cfg = ctx.config.clone();
    let target = cfg.target()?;
    let kinds = cfg.limit_kinds()?;
    let opts = ctx.quad();
    const MODULE: &str = "verification-harness";
    if cfg.paths != cfg.reference_paths {
        return Err(CliError::Config("verify-limit compares ensembles of equal size: set paths = reference_paths".into()));
    }

    let mut moment_rows = Vec::new();
    let mut drift = Vec::new();
    let mut vol = Vec::new();
    for &kind in &kinds {
        let r = moment_report(kind, &target, &cfg.limit.x_grid, cfg.limit.coord, &cfg.limit.epsilon_grid, opts)?;
        ctx.check(Check::new(
            MODULE,
            "generator_moment",
            format!("{kind} max quadrature error"),
            r.max_quadrature_error(),
            Tolerance::AtMost(MOMENT_TOL),
        ));
        for (k, name) in ["drift", "volatility"].iter().enumerate() {
            ctx.check(Check::new(MODULE, "generator_moment", format!("{kind} {name} error slope"), r.slopes[k], HALF_ORDER_WINDOW));
        }
        ctx.check(Check::new(
            MODULE,
            "generator_moment",
            format!("{kind} third moment slope"),
            r.slopes[2],
            Tolerance::AtLeast(0.35),
        ));
        let qerr = r.max_quadrature_error();
        for (e, &eps) in r.epsilons.iter().enumerate() {
            drift.push(PlotPoint::new(eps, r.sup_errors[e][0], qerr, kind.to_string()));
            vol.push(PlotPoint::new(eps, r.sup_errors[e][1], qerr, kind.to_string()));
        }
        moment_rows.extend(r.to_rows().into_iter().map(|mut row| {
            row.quantity = format!("{kind}:{}", row.quantity);
            row
        }));
    }
    write_rows(ctx, "moments.csv", &moment_rows)?;
    emit_plot_data(&ctx.out_dir, "drift.csv", &drift)?;
    emit_plot_data(&ctx.out_dir, "volatility.csv", &vol)?;

    let mut gap_rows = Vec::new();
    for &kind in &kinds {
        for f in cfg.test_functions()? {
            let r = generator_convergence_probe(kind, &target, &f, &cfg.limit.x_grid, &cfg.limit.epsilon_grid, opts)?;
            ctx.check(Check::new(
                MODULE,
                "generator_convergence_probe",
                format!("{kind} {:?} sup gap slope", f.shape).to_lowercase(),
                r.slope,
                HALF_ORDER_WINDOW,
            ));
            gap_rows.extend(r.to_rows().into_iter().map(|mut row| {
                row.quantity = format!("{kind}:{}", row.quantity);
                row
            }));
        }
    }
    write_rows(ctx, "generator_gap.csv", &gap_rows)?;

    let reference = reference(ctx)?;
    let mut ks_rows = Vec::new();
    let mut ks_plot = Vec::new();
    let eps_min = cfg.epsilon_grid.iter().copied().fold(f64::INFINITY, f64::min);
    for (ki, &kind) in kinds.iter().enumerate() {
        let mut per_time: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.obs_grid.len()];
        let mut noise = 0.0;
        for (ei, &eps) in cfg.epsilon_grid.iter().enumerate() {
            let proposal = ProposalSpec::new(cfg.dim, eps)?;
            let seed = ctx.seed.wrapping_add(1 + 16 * ki as u64 + ei as u64);
            let jump = simulate_ensemble(kind, &target, &proposal, &cfg.x0, &cfg.obs_grid, cfg.paths, seed)?;
            let rep = compare_ensembles(&jump, &reference)?;
            noise = rep.ks_noise();
            for (g, &t) in cfg.obs_grid.iter().enumerate() {
                let ks = (0..cfg.dim).map(|c| rep.gap_at(t, c).map_or(0.0, |m| m.ks)).fold(0.0, f64::max);
                let crit = rep.gap_at(t, 0).map_or(f64::NAN, |m| m.ks_critical);
                per_time[g].push((eps, ks));
                ks_rows.push(ReportRow {
                    epsilon: eps,
                    quantity: format!("{kind}:ks@t={t}"),
                    value: ks,
                    error: noise,
                    target: crit,
                    slope: f64::NAN,
                });
                ks_plot.push(PlotPoint::new(eps, ks, noise, format!("{kind}@t={t}")));
                if eps == eps_min {
                    ctx.check(Check::new(
                        MODULE,
                        "compare_ensembles",
                        format!("{kind} KS at t={t}, eps={eps}"),
                        ks,
                        Tolerance::AtMost(crit),
                    ));
                }
            }
        }
        for (g, &t) in cfg.obs_grid.iter().enumerate() {
            let ok = ks_decreases_with_epsilon(&per_time[g], noise, 2.0);
            ctx.check(Check::new(
                MODULE,
                "compare_ensembles",
                format!("{kind} KS non-increasing as eps shrinks at t={t} (1 = yes)"),
                if ok { 1.0 } else { 0.0 },
                Tolerance::AtLeast(1.0),
            ));
        }
    }
    write_rows(ctx, "ks.csv", &ks_rows)?;
    emit_plot_data(&ctx.out_dir, "ks_vs_eps.csv", &ks_plot)?;
    Ok(())
}

/// `(d_mu(Q, mix(alpha)) - d_mu(Q, M1))` per alpha plus the adversarial
/// minimum over random reversible generators.
pub struct ChainGeometry {
    pub optimum: f64,
    pub mix_distances: Vec<f64>,
    pub random_min: f64,
    pub max_reversibility_defect: f64,
    pub half_spaces: (f64, f64),
}

pub fn chain_geometry(
    chain: &FiniteChain,
    alphas: &[f64],
    draws: usize,
    rng: &mut PathRng,
) -> Result<ChainGeometry, CliError> {
    let q = chain.rates();
    let m1 = make_m1(chain);
    let m2 = make_m2(chain);
    let optimum = d_mu(chain, q, &m1)?;
    let mut defect = chain.reversibility_defect(&m1).max(chain.reversibility_defect(&m2));
    let mut mix_distances = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let m = mix(&m1, &m2, a)?;
        defect = defect.max(chain.reversibility_defect(&m));
        mix_distances.push(d_mu(chain, q, &m)?);
    }
    let mut random_min = f64::INFINITY;
    for _ in 0..draws {
        let r = random_reversible(chain, rng);
        random_min = random_min.min(d_mu(chain, q, &r)?);
    }
    Ok(ChainGeometry {
        optimum,
        mix_distances,
        random_min,
        max_reversibility_defect: defect,
        half_spaces: half_space_masses(chain),
    })
}

pub fn verify_geometry(ctx: &mut RunContext) -> Result<(), CliError> {
    let g = ctx.config.geometry.clone();
    const MODULE: &str = "finite-geometry";
    let chains: Vec<FiniteChain> = match &g.chain_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            vec![FiniteChain::parse(&text)?]
        }
        None => (0..g.chains)
            .map(|c| random_chain(g.states, &mut stream_rng(ctx.seed, domain::AUX, c as u64)))
            .collect(),
    };
    let mut table = ctx.create("geometry.csv")?;
    writeln!(table, "chain,alpha,d_mix,d_m1,min_random_reversible")?;
    let mut plot = Vec::new();
    let (mut eq_gap, mut adv_gap, mut defect, mut half_gap) = (0.0_f64, f64::INFINITY, 0.0_f64, 0.0_f64);
    for (c, chain) in chains.iter().enumerate() {
        let mut rng = stream_rng(ctx.seed, domain::AUX, (1 << 32) + c as u64);
        let geo = chain_geometry(chain, &g.alphas, g.reversible_draws, &mut rng)?;
        for (&a, &d) in g.alphas.iter().zip(&geo.mix_distances) {
            eq_gap = eq_gap.max((d - geo.optimum).abs());
            writeln!(table, "{c},{a},{d:e},{:e},{:e}", geo.optimum, geo.random_min)?;
            plot.push(PlotPoint::new(a, d, 0.0, format!("chain{c}")));
        }
        if g.reversible_draws > 0 {
            adv_gap = adv_gap.min(geo.random_min - geo.optimum);
        }
        defect = defect.max(geo.max_reversibility_defect);
        let (lo, hi) = geo.half_spaces;
        half_gap = half_gap.max((lo - hi).abs()).max((lo - geo.optimum).abs());
    }
    table.flush()?;
    emit_plot_data(&ctx.out_dir, "dmu_alpha.csv", &plot)?;
    ctx.check(Check::new(MODULE, "d_mu", "max |d(Q, mix) - d(Q, M1)|", eq_gap, Tolerance::AtMost(1e-12)));
    if adv_gap.is_finite() {
        ctx.check(Check::new(
            MODULE,
            "random_reversible",
            "min d(Q, R) - d(Q, M1)",
            adv_gap,
            Tolerance::AtLeast(-1e-12),
        ));
    }
    ctx.check(Check::new(MODULE, "mix", "max reversibility defect", defect, Tolerance::AtMost(1e-14)));
    ctx.check(Check::new(MODULE, "half_space_masses", "max half-space mismatch", half_gap, Tolerance::AtMost(1e-12)));
    Ok(())
}

pub fn moments(ctx: &mut RunContext) -> Result<(), CliError> {
    let m = ctx.config.moments.clone();
    const MODULE: &str = "verification-harness";
    let mut rows = Vec::new();
    for &t in &m.tilts {
        for (k, order) in [(3u32, 1.5), (4, 2.0)] {
            let est = m
                .epsilon_grid
                .iter()
                .map(|&eps| folded_normal_moment(t, k, eps))
                .collect::<Result<Vec<_>, _>>()?;
            let values: Vec<f64> = est.iter().map(|e| e.value).collect();
            let slope = loglog_slope(&m.epsilon_grid, &values);
            ctx.check(Check::new(
                MODULE,
                "folded_normal_moment",
                format!("slope of E[exp(t|Z|)|Z|^{k}] at t={t}"),
                slope,
                Tolerance::around(order, 0.05),
            ));
            for (e, &eps) in m.epsilon_grid.iter().enumerate() {
                let closed = if t == 0.0 {
                    let c = mhjump::harness::gaussian_abs_moment(k, eps);
                    ctx.check(Check::new(
                        MODULE,
                        "folded_normal_moment",
                        format!("relative gap to E|Z|^{k} at eps={eps}"),
                        (est[e].value / c - 1.0).abs(),
                        Tolerance::AtMost(1e-10),
                    ));
                    c
                } else {
                    f64::NAN
                };
                rows.push(ReportRow {
                    epsilon: eps,
                    quantity: format!("folded[t={t};k={k}]"),
                    value: est[e].value,
                    error: est[e].error,
                    target: closed,
                    slope,
                });
            }
        }
    }
    write_rows(ctx, "folded_moments.csv", &rows)
}

pub fn sbound(ctx: &mut RunContext) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let target = cfg.target()?;
    let r = s_bound_check(&target, cfg.sbound.pairs, &cfg.sbound.scales, ctx.seed)?;
    write_rows(ctx, "sbound.csv", &r.to_rows())?;
    for (&s, &ratio) in r.scales.iter().zip(&r.max_ratio) {
        ctx.check(Check::new(
            "target-and-proposal",
            "s_hat_m2",
            format!("max |s - s_hat| / (exp(M|D|/T) D^2) at D={s}"),
            ratio,
            Tolerance::AtMost(r.c1),
        ));
    }
    Ok(())
}

pub fn dispatch(cmd: Command, ctx: &mut RunContext) -> Result<(), CliError> {
    match cmd {
        Command::Simulate => simulate(ctx),
        Command::Langevin => langevin(ctx),
        Command::VerifyLimit => verify_limit(ctx),
        Command::VerifyGeometry => verify_geometry(ctx),
        Command::Moments => moments(ctx),
        Command::SBound => sbound(ctx),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}
