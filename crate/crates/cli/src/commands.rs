use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cheeger_core::consistency::{ustat_concentration, EpsilonRule};
use cheeger_core::harness::{emit_plot_data, load_config, parse_config, run_experiment, ConfigError, PlotKind, RunOptions};
use cheeger_core::nonlocal::{
    check_bias, check_functional_form, check_monotonicity, check_smoothing_chain, FamilyIndicator, QuadratureGrid,
};
use cheeger_core::{continuum_cheeger, sample, solve_with, Manifold, Objective, PointCloud, ProximityGraph, SolverKind};
use serde::Serialize;

use crate::{Check, Cli, CliError, Command, ConvergeArgs, Method, ObjectiveArgs, ObjectiveName, PlotKindArg};

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn parse_manifold(name: &str) -> Result<Manifold, CliError> {
    name.parse().map_err(config_err)
}

fn method_kind(m: Method) -> SolverKind {
    match m {
        Method::Exact => SolverKind::Exact,
        Method::ArcSweep => SolverKind::ArcSweep,
        Method::SpectralSweep => SolverKind::SpectralSweep,
        Method::LocalSearch => SolverKind::LocalSearch,
        Method::Pipeline => SolverKind::Pipeline,
    }
}

fn objective(name: ObjectiveName, gamma: f64) -> Objective {
    match name {
        ObjectiveName::Cheeger => Objective::CheegerRatio,
        ObjectiveName::Ratio => Objective::RatioCut,
        ObjectiveName::Modularity => Objective::Modularity { gamma },
    }
}

/// Pretty JSON to `out`, or to stdout when no path is given.
fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(runtime_err)?;
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| runtime_err(format!("{}: {e}", path.display()))),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(runtime_err(e)),
            _ => Ok(()),
        },
    }
}

fn workers(cli_workers: Option<usize>) -> usize {
    cli_workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let workers = workers(cli.workers);
    // global pool for the data-parallel kernels; the sweep runner builds its own
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    let out = cli.out.as_deref();
    match cli.command {
        Command::Sample { manifold, n } => {
            let m = parse_manifold(&manifold)?;
            if n == 0 {
                return Err(CliError::Config("n must be positive".into()));
            }
            let path = out.map_or_else(|| PathBuf::from("cloud.csv"), Path::to_path_buf);
            sample::<f64>(m, n, cli.seed).write_csv(&path).map_err(runtime_err)?;
            eprintln!("wrote {n} points on {m} to {}", path.display());
            Ok(())
        }
        Command::BuildGraph { cloud, epsilon } => {
            if !(epsilon > 0.0 && epsilon.is_finite()) {
                return Err(CliError::Config(format!("epsilon must be positive, got {epsilon}")));
            }
            let points = PointCloud::<f64>::read_csv(&cloud).map_err(runtime_err)?;
            let graph = ProximityGraph::build(points, epsilon).map_err(config_err)?;
            let path = out.map_or_else(|| PathBuf::from("graph.csv"), Path::to_path_buf);
            graph.write_edge_list(&path, Some(cloud.display().to_string())).map_err(runtime_err)?;
            eprintln!("wrote {} edges to {}", graph.edge_count(), path.display());
            Ok(())
        }
        Command::Solve { graph, cloud, method, objective: ObjectiveArgs { objective: name, gamma } } => {
            let (g, meta) = ProximityGraph::<f64>::read_edge_list(&graph).map_err(runtime_err)?;
            let cloud_path = cloud.or_else(|| {
                let r = PathBuf::from(meta.cloud_ref.as_ref()?);
                if r.exists() || r.is_absolute() {
                    Some(r)
                } else {
                    graph.parent().map(|d| d.join(&r)).filter(|p| p.exists())
                }
            });
            let g = match cloud_path {
                Some(p) => {
                    let points = PointCloud::<f64>::read_csv(&p).map_err(runtime_err)?;
                    if points.len() != g.len() {
                        return Err(CliError::Config(format!(
                            "cloud {} has {} points, graph has {}",
                            p.display(),
                            points.len(),
                            g.len()
                        )));
                    }
                    g.with_cloud(Arc::new(points))
                }
                None => g,
            };
            let result = solve_with(&g, method_kind(method), objective(name, gamma), cli.seed).map_err(runtime_err)?;
            emit_json(&result, out)
        }
        Command::NonlocalCheck { manifold, check, h, a, nodes_per_h } => {
            let m = parse_manifold(&manifold)?;
            let f = FamilyIndicator(continuum_cheeger(m).canonical_member());
            let first = |v: &[f64], name: &str| {
                v.first().copied().ok_or_else(|| CliError::Config(format!("--{name} needs at least one value")))
            };
            let report = match check {
                Check::Bias => serde_json::to_value(check_bias(&f, &h, nodes_per_h).map_err(config_err)?),
                Check::Monotonicity => {
                    serde_json::to_value(check_monotonicity(&f, first(&h, "h")?, &a, nodes_per_h).map_err(config_err)?)
                }
                Check::Smoothing => serde_json::to_value(
                    check_smoothing_chain(&f, first(&h, "h")?, first(&a, "a")?, nodes_per_h).map_err(config_err)?,
                ),
                Check::FunctionalForm => {
                    let grid = QuadratureGrid::with_spacing(m, first(&h, "h")? / nodes_per_h);
                    serde_json::to_value(check_functional_form(&f, &grid, 0.02).map_err(config_err)?)
                }
            }
            .map_err(runtime_err)?;
            emit_json(&report, out)
        }
        Command::Converge(args) => converge(args, cli.seed, workers, out),
        Command::Ustat { manifold, n, trials, epsilon_c, epsilon_exponent, zeta } => {
            let m = parse_manifold(&manifold)?;
            let rule = EpsilonRule::Power {
                c: epsilon_c,
                exponent: epsilon_exponent.unwrap_or(1.0 / m.intrinsic_dim() as f64),
                log_power: 0.0,
            };
            for (pos, &size) in n.iter().enumerate() {
                let eps = rule.epsilon(size, pos).unwrap_or(f64::NAN);
                if !(eps > 0.0 && eps <= m.epsilon_0()) {
                    return Err(CliError::Config(format!("epsilon({size}) = {eps} is outside (0, {}]", m.epsilon_0())));
                }
            }
            let f = FamilyIndicator(continuum_cheeger(m).canonical_member());
            let report = ustat_concentration(&f, &n, &rule, trials, cli.seed, &zeta).map_err(config_err)?;
            emit_json(&report, out)
        }
        Command::Plot { input, kind } => {
            let kind = match kind {
                PlotKindArg::RateLoglog => PlotKind::RateLoglog,
                PlotKindArg::CutError => PlotKind::CutError,
                PlotKindArg::Concentration => PlotKind::Concentration,
            };
            let dir = out
                .map(Path::to_path_buf)
                .unwrap_or_else(|| input.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf));
            let data = emit_plot_data(&input, kind, &dir).map_err(|e| match e {
                cheeger_core::harness::HarnessError::MissingColumns { .. } => config_err(e),
                other => runtime_err(other),
            })?;
            eprintln!("wrote {} and {}", data.tsv.display(), data.svg.display());
            emit_json(
                &serde_json::json!({
                    "rows": data.rows.len(),
                    "slope": data.slope,
                    "monotone_nonincreasing": data.monotone_nonincreasing,
                }),
                None,
            )
        }
        Command::Validate { config } => {
            let resolved = load_config(&config).map_err(config_error)?;
            emit_json(&resolved, out)
        }
    }
}

fn config_error(e: ConfigError) -> CliError {
    match e {
        ConfigError::Io { .. } => CliError::Config(e.to_string()),
        ConfigError::Invalid(_) => CliError::Config(e.to_string()),
    }
}

fn converge(args: ConvergeArgs, seed: u64, workers: usize, out: Option<&Path>) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => load_config(path).map_err(config_error)?,
        None => {
            let manifold = args.manifold.clone().ok_or_else(|| CliError::Config("--manifold or --config required".into()))?;
            let mut schedule = serde_json::Map::new();
            match args.schedule.as_str() {
                "standard" => {
                    schedule.insert("kind".into(), "power".into());
                }
                other => return Err(CliError::Config(format!("unknown schedule `{other}` (expected standard)"))),
            }
            if let Some(c) = args.epsilon_c {
                schedule.insert("c".into(), c.into());
            }
            if let Some(k) = args.epsilon_exponent {
                schedule.insert("exponent".into(), k.into());
            }
            let text = serde_json::json!({
                "manifold": manifold,
                "n_list": args.n,
                "trials": args.trials,
                "seed": seed,
                "schedule": schedule,
                "solver": method_kind(args.method),
                "objective": objective(args.objective, 1.0),
                "record_timings": args.record_timings,
            });
            parse_config(&text.to_string()).map_err(config_error)?
        }
    };
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.out.clone())
        .ok_or_else(|| CliError::Config("--out (or `out` in the config) required".into()))?;
    config.out = Some(dir.clone());
    let outcome = run_experiment(&config, &RunOptions { out: dir.clone(), workers }).map_err(runtime_err)?;
    eprintln!(
        "{} records ({} reused), {} failures, digest {}",
        outcome.records.len(),
        outcome.reused,
        outcome.failures.len(),
        outcome.digest
    );
    emit_json(&outcome.rates, None)
}
