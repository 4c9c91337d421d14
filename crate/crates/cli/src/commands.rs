// SPDX-License-Identifier: Apache-2.0
//! One function per subcommand. Each returns whether every requested check
//! passed; commands without checks return `true`.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sisnet_core::analysis::{
    convergence_sweep, extract_martingale, martingale_variance_check, mean_zero_check, sweep_replica_index,
    variance_exponents, ConvergenceConfig, MIN_ENSEMBLE,
};
use sisnet_core::ctmc::{
    build_generator, simulate_macro, simulate_micro, total_variation, transient_distribution, SimConfig,
};
use sisnet_core::io::{fmt17, write_sampled_csv, write_trajectory_csv};
use sisnet_core::meanfield::{fixed_point, integrate, IntegratorConfig, NewtonOptions, Stability};
use sisnet_core::rng::stream_seed;
use sisnet_core::topology::superneighbors;
use sisnet_core::{MeanFieldSystem, MicroState, SizeSchedule, Trajectory};

use crate::config::{
    fractions, ConvergeBlock, ExactBlock, MartingaleBlock, MeanfieldBlock, RunFile, SimulateBlock, SimulatorKind,
    MANIFEST_TOOL,
};
use crate::error::CliError;
use crate::output::OutDir;

pub const MANIFEST: &str = "manifest.json";

/// Everything a command needs besides its own block.
pub struct Context {
    pub run: RunFile,
    pub seed: u64,
    pub out: OutDir,
}

impl Context {
    fn manifest(&self, command: &str, config: Value, replica_seeds: Value) -> Value {
        json!({
            "tool": MANIFEST_TOOL,
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": self.seed,
            "config": config,
            "replica_seeds": replica_seeds,
        })
    }

    fn seeds(&self, indices: impl Iterator<Item = u64>) -> Value {
        Value::from(indices.map(|r| stream_seed(self.seed, r)).collect::<Vec<_>>())
    }
}

fn report_check(name: &str, pass: bool, detail: &str) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn replica_file(r: usize) -> String {
    format!("replica_{r:04}.csv")
}

/// `simulate` and `micro`: one trajectory CSV per replica.
pub fn simulate(ctx: &Context, micro: bool) -> Result<bool, CliError> {
    let key = if micro { "micro" } else { "simulate" };
    let block: SimulateBlock = ctx.run.block(key)?;
    let sizes = ctx.run.sizes_or_default(&block.sizes)?;
    let mut block = block;
    block.sizes = Some(sizes.clone());
    let initial = block.initial().resolve(&ctx.run.network, &sizes)?;
    if block.replicas == 0 {
        return Err(CliError::InvalidParameter("replicas must be >= 1".into()));
    }
    let files: Vec<String> = (0..block.replicas).map(replica_file).chain([MANIFEST.to_string()]).collect();
    ctx.out.prepare(&files)?;

    let config = SimConfig::new(block.horizon).with_event_cap(block.event_cap);
    let net = &ctx.run.network;
    let trajectories: Vec<Trajectory> = (0..block.replicas)
        .into_par_iter()
        .map(|r| {
            if micro {
                let start = MicroState::from_macro(&initial, &sizes)?;
                simulate_micro(net, &start, &config, ctx.seed, r as u64)
            } else {
                simulate_macro(net, &sizes, &initial, &config, ctx.seed, r as u64)
            }
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::from)?;
    for (r, traj) in trajectories.iter().enumerate() {
        ctx.out.write_with(&replica_file(r), |w| write_trajectory_csv(w, traj))?;
    }
    let manifest = ctx.manifest(key, ctx.run.resolved(key, &block, ctx.seed), ctx.seeds(0..block.replicas as u64));
    ctx.out.write_json(MANIFEST, &manifest)?;
    Ok(true)
}

#[derive(Serialize)]
struct EquilibriumOut {
    state: Vec<Vec<f64>>,
    residual: f64,
    iterations: usize,
    spectral_abscissa: f64,
    stability: &'static str,
}

pub fn meanfield(ctx: &Context) -> Result<bool, CliError> {
    let mut block: MeanfieldBlock = ctx.run.block("meanfield")?;
    let net = &ctx.run.network;
    let sys = match &block.alpha {
        Some(alpha) => MeanFieldSystem::from_alpha(net, alpha)?,
        None => {
            let sizes = ctx.run.sizes_or_default(&block.sizes)?;
            block.sizes = Some(sizes.clone());
            MeanFieldSystem::from_sizes(net, &sizes)?
        }
    };
    let y0 = fractions(&block.y0, net)?;
    let guess = block.equilibrium_guess.as_ref().map(|g| fractions(g, net)).transpose()?;
    let mut files = vec!["meanfield.csv", MANIFEST];
    if guess.is_some() {
        files.push("equilibrium.json");
    }
    ctx.out.prepare(&files)?;

    let out = integrate(&sys, &y0, block.horizon, &IntegratorConfig::new(block.step).with_stride(block.stride))?;
    ctx.out.write_with("meanfield.csv", |w| write_sampled_csv(w, &out.path, net.num_strains(), "y"))?;
    if out.projections > 0 {
        eprintln!("note: {} step(s) projected back onto the feasible set", out.projections);
    }
    if let Some(guess) = guess {
        let fp = fixed_point(&sys, &guess, 1e-12, &NewtonOptions::default())?;
        let stability = match fp.stability {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        };
        ctx.out.write_json(
            "equilibrium.json",
            &EquilibriumOut {
                state: fp.state.rows(),
                residual: fp.residual,
                iterations: fp.iterations,
                spectral_abscissa: fp.spectral_abscissa,
                stability,
            },
        )?;
    }
    let manifest = ctx.manifest("meanfield", ctx.run.resolved("meanfield", &block, ctx.seed), Value::Null);
    ctx.out.write_json(MANIFEST, &manifest)?;
    Ok(true)
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

pub fn converge(ctx: &Context) -> Result<bool, CliError> {
    let block: ConvergeBlock = ctx.run.block("converge")?;
    let net = &ctx.run.network;
    let mut schedule = SizeSchedule::new(block.schedule.clone());
    if let Some(alpha) = &block.alpha {
        schedule = schedule.with_alpha(alpha.clone());
    }
    schedule.validate(net, block.ratio_tolerance)?;
    let y0 = fractions(&block.y0, net)?;
    let files = ["report.json", "report.csv", "summary.json", MANIFEST];
    ctx.out.prepare(&files)?;

    let mut cfg = ConvergenceConfig::new(block.horizon, block.stride, block.replicas, ctx.seed);
    cfg.step = block.step;
    cfg.event_cap = block.event_cap;
    cfg.checkpoints = block.checkpoints.clone();
    cfg.bound_form = block.bound;
    let report = convergence_sweep(net, &schedule, &y0, &cfg)?;

    let medians = report.medians();
    let mut checks = Vec::new();
    if block.require_decreasing {
        let pass = report.medians_strictly_decreasing();
        checks.push(Check { name: "medians_decreasing".into(), pass, detail: format!("medians {medians:?}") });
    }
    if let (Some(limit), Some(first), Some(last)) = (block.max_final_ratio, medians.first(), medians.last()) {
        let ratio = last / first;
        checks.push(Check {
            name: "final_ratio".into(),
            pass: ratio <= limit,
            detail: format!("last/first median ratio {ratio} (limit {limit})"),
        });
    }
    if let Some([lo, hi]) = block.beta_band {
        let pass = report.beta.is_some_and(|b| (lo..=hi).contains(&b));
        checks.push(Check { name: "beta".into(), pass, detail: format!("beta {:?} (band [{lo}, {hi}])", report.beta) });
    }
    for entry in &report.entries {
        for v in &entry.var_checks {
            if let Some(pass) = v.pass {
                checks.push(Check {
                    name: format!("variance N={:?} t={} Y_{}_{}", entry.sizes, v.t, v.island, v.strain),
                    pass,
                    detail: format!("variance {} bound {} se {}", v.variance, v.bound, v.std_error),
                });
            }
        }
    }
    for c in &checks {
        report_check(&c.name, c.pass, &c.detail);
    }
    let pass = checks.iter().all(|c| c.pass);

    ctx.out.write_json("report.json", &report)?;
    ctx.out.write_with("report.csv", |w| report.write_csv(w))?;
    ctx.out.write_json("summary.json", &json!({ "pass": pass, "beta": report.beta, "medians": medians, "checks": checks }))?;
    let streams: Vec<Value> = (0..block.schedule.len())
        .map(|e| ctx.seeds((0..block.replicas).map(|r| sweep_replica_index(e, r))))
        .collect();
    let manifest = ctx.manifest("converge", ctx.run.resolved("converge", &block, ctx.seed), Value::from(streams));
    ctx.out.write_json(MANIFEST, &manifest)?;
    Ok(pass)
}

#[derive(Serialize)]
struct TimeCheck {
    t: f64,
    tv: f64,
    threshold: f64,
    pass: bool,
}

pub fn exact(ctx: &Context) -> Result<bool, CliError> {
    let mut block: ExactBlock = ctx.run.block("exact")?;
    let net = &ctx.run.network;
    let sizes = ctx.run.sizes_or_default(&block.sizes)?;
    block.sizes = Some(sizes.clone());
    let initial = crate::config::Initial { initial_counts: Some(block.initial_counts.clone()), y0: None }
        .resolve(net, &sizes)?;
    if block.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(CliError::InvalidParameter("times must be finite and non-negative".into()));
    }
    if block.replicas == 0 {
        return Err(CliError::InvalidParameter("replicas must be >= 1".into()));
    }
    let gen = build_generator(net, &sizes, block.state_cap)?;
    let mut files = vec!["exact.json", MANIFEST];
    if block.export_generator {
        files.push("generator.txt");
    }
    ctx.out.prepare(&files)?;

    let start = gen.point_mass(&initial).ok_or_else(|| CliError::Internal("initial state not enumerated".into()))?;
    let horizon = block.times.iter().copied().fold(0.0, f64::max);
    let config = SimConfig::new(horizon).with_event_cap(u64::MAX);
    let start_index = gen.index_of(&initial).expect("point mass exists");
    let tally: Vec<Vec<usize>> = if horizon > 0.0 {
        (0..block.replicas)
            .into_par_iter()
            .map(|r| -> Result<Vec<usize>, CliError> {
                let traj = match block.simulator {
                    SimulatorKind::Macro => simulate_macro(net, &sizes, &initial, &config, ctx.seed, r as u64)?,
                    SimulatorKind::Micro => {
                        simulate_micro(net, &MicroState::from_macro(&initial, &sizes)?, &config, ctx.seed, r as u64)?
                    }
                };
                block
                    .times
                    .iter()
                    .map(|&t| gen.index_of_counts(traj.state_at(t)).ok_or_else(|| CliError::Internal("unknown state".into())))
                    .collect()
            })
            .collect::<Result<_, _>>()?
    } else {
        vec![vec![start_index; block.times.len()]; block.replicas]
    };

    let mut checks = Vec::new();
    for (n, &t) in block.times.iter().enumerate() {
        let exact = transient_distribution(&gen, &start, t, block.tail_tolerance)?;
        let mut empirical = vec![0.0; gen.len()];
        for row in &tally {
            empirical[row[n]] += 1.0;
        }
        let scale = 1.0 / block.replicas as f64;
        empirical.iter_mut().for_each(|p| *p *= scale);
        let tv = total_variation(&exact, &empirical);
        let pass = tv <= block.tv_threshold;
        report_check(&format!("exact t={t}"), pass, &format!("tv {tv} (threshold {})", block.tv_threshold));
        checks.push(TimeCheck { t, tv, threshold: block.tv_threshold, pass });
    }
    let pass = checks.iter().all(|c| c.pass);
    ctx.out.write_json(
        "exact.json",
        &json!({ "states": gen.len(), "replicas": block.replicas, "simulator": block.simulator, "checks": checks, "pass": pass }),
    )?;
    if block.export_generator {
        ctx.out.write_with("generator.txt", |w| gen.write_coordinate_list(w))?;
    }
    let manifest = ctx.manifest(
        "exact",
        ctx.run.resolved("exact", &block, ctx.seed),
        json!({ "rule": "replica r uses stream index r", "first": stream_seed(ctx.seed, 0) }),
    );
    ctx.out.write_json(MANIFEST, &manifest)?;
    Ok(pass)
}

pub fn martingale(ctx: &Context) -> Result<bool, CliError> {
    let block: MartingaleBlock = ctx.run.block("martingale")?;
    let net = &ctx.run.network;
    if block.replicas < MIN_ENSEMBLE {
        return Err(CliError::EnsembleTooSmall(format!(
            "{} replicas given, variance checks need at least {MIN_ENSEMBLE}",
            block.replicas
        )));
    }
    if !(block.t > 0.0 && block.t.is_finite()) {
        return Err(CliError::InvalidParameter(format!("t must be positive, got {}", block.t)));
    }
    SizeSchedule::new(block.schedule.clone()).validate(net, f64::INFINITY)?;
    let initials = block
        .schedule
        .iter()
        .map(|sizes| block.initial().resolve(net, sizes))
        .collect::<Result<Vec<_>, _>>()?;
    let files = ["martingale.csv", "summary.json", MANIFEST];
    ctx.out.prepare(&files)?;

    let config = SimConfig::new(block.t).with_event_cap(block.event_cap);
    let grid = [block.t];
    let k = net.num_strains();
    let mut var_checks = Vec::new();
    let mut mean_checks = Vec::new();
    for (e, (sizes, initial)) in block.schedule.iter().zip(&initials).enumerate() {
        let paths = (0..block.replicas)
            .into_par_iter()
            .map(|r| -> Result<_, CliError> {
                let traj = simulate_macro(net, sizes, initial, &config, ctx.seed, sweep_replica_index(e, r))?;
                Ok(extract_martingale(net, sizes, &traj, &grid)?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        var_checks.push(martingale_variance_check(net, sizes, &paths, block.t, block.bound)?);
        mean_checks.push(mean_zero_check(&paths, k, block.t)?);
    }

    let mut pass = true;
    for check in &var_checks {
        for v in &check.entries {
            report_check(
                &format!("variance N={:?} Y_{}_{}", check.sizes, v.island, v.strain),
                v.pass,
                &format!("variance {} bound {} se {}", v.variance, v.bound, v.std_error),
            );
            pass &= v.pass;
        }
    }
    let exponents = variance_exponents(&var_checks);
    if let (Some([lo, hi]), true) = (block.exponent_band, var_checks.len() >= 2) {
        for (c, exp) in exponents.iter().enumerate() {
            // a coordinate with zero variance has no exponent and nothing to check
            if let Some(b) = exp {
                let ok = (lo..=hi).contains(b);
                report_check(&format!("exponent Y_{}_{}", c / k, c % k), ok, &format!("{b} (band [{lo}, {hi}])"));
                pass &= ok;
            }
        }
    }

    ctx.out.write_with("martingale.csv", |w| {
        use std::io::Write;
        let m = net.num_islands();
        let size_cols: Vec<String> = (0..m).map(|i| format!("N_{i}")).collect();
        writeln!(w, "{},t,island,strain,mean,variance,std_error,bound,pass", size_cols.join(","))?;
        for check in &var_checks {
            let sizes: Vec<String> = check.sizes.iter().map(u32::to_string).collect();
            for v in &check.entries {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    sizes.join(","),
                    fmt17(check.time),
                    v.island,
                    v.strain,
                    fmt17(v.mean),
                    fmt17(v.variance),
                    fmt17(v.std_error),
                    fmt17(v.bound),
                    v.pass
                )?;
            }
        }
        Ok(())
    })?;
    ctx.out.write_json(
        "summary.json",
        &json!({
            "result": if pass { "PASS" } else { "FAIL" },
            "bound": block.bound,
            "variance_checks": var_checks,
            "exponents": exponents,
            "exponent_band": block.exponent_band,
            "mean_checks": mean_checks,
        }),
    )?;
    let streams: Vec<Value> = (0..block.schedule.len())
        .map(|e| ctx.seeds((0..block.replicas).map(|r| sweep_replica_index(e, r))))
        .collect();
    let manifest = ctx.manifest("martingale", ctx.run.resolved("martingale", &block, ctx.seed), Value::from(streams));
    ctx.out.write_json(MANIFEST, &manifest)?;
    Ok(pass)
}

/// Prints island-level structure of a valid network to stdout.
pub fn validate(run: &RunFile) -> Result<bool, CliError> {
    let net = &run.network;
    let neighborhoods = (0..net.num_islands())
        .map(|i| superneighbors(net, i).map(|s| s.into_iter().collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    let degrees: Vec<usize> = neighborhoods.iter().map(Vec::len).collect();
    let out = json!({
        "valid": true,
        "islands": net.num_islands(),
        "strains": net.num_strains(),
        "sizes": net.island_sizes,
        "superneighbors": neighborhoods,
        "superdegrees": degrees,
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(|e| CliError::Internal(e.to_string()))?);
    Ok(true)
}
