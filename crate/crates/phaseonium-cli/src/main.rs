//! Scenario front end for the two-polarization propagation library.
//!
//! Verbs: `run` (execute a scenario and write tables), `validate` (compare
//! the analytic and finite-difference engines), `sweep` (scan one parameter)
//! and `presets` (list or export the built-in scenarios).

mod config;
mod scenario;

use clap::{Args, Parser, Subcommand};
use config::{preset, Engine, ScenarioConfig, PRESET_NAMES};
use scenario::{
    compare_profiles, engines_to_run, profile_table, protocol_name, run_analytic,
    run_numeric, write_outputs, Summary, ValidationReport,
};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ENGINE: u8 = 3;

#[derive(Parser)]
#[command(name = "phaseonium", version, about = "Phaseonium propagation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Selector {
    /// Scenario configuration file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name (fig2, fig3, fig4).
    #[arg(long)]
    preset: Option<String>,
    /// Override the engine choice of the configuration.
    #[arg(long, value_parser = parse_engine)]
    engine: Option<Engine>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the engines (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and write profile tables, summary and manifest.
    Run(Selector),
    /// Run both engines and report their agreement.
    Validate {
        #[command(flatten)]
        selector: Selector,
        /// Maximum allowed deviation of the normalized intensity profiles.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
    /// Scan one parameter and tabulate the protocol metrics.
    Sweep {
        #[command(flatten)]
        selector: Selector,
        /// Parameter to scan: optical_depth, theta, phi12 or mixing_angle.
        #[arg(long)]
        parameter: String,
        /// Comma-separated parameter values.
        #[arg(long)]
        values: String,
    },
    /// List the built-in presets (or export them with --out).
    Presets {
        /// Write each preset as <name>.toml into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    match s {
        "analytic" => Ok(Engine::Analytic),
        "numeric" => Ok(Engine::Numeric),
        "both" => Ok(Engine::Both),
        _ => Err(format!(
            "unknown engine {s:?} (expected analytic, numeric or both)"
        )),
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn config_err(message: String) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message,
    }
}

fn engine_err(message: String) -> Failure {
    Failure {
        code: EXIT_ENGINE,
        message,
    }
}

fn load_config(sel: &Selector) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match (&sel.config, &sel.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                config_err(format!("cannot read {}: {e}", path.display()))
            })?;
            ScenarioConfig::from_toml(&text).map_err(config_err)?
        }
        (None, Some(name)) => preset(name)
            .ok_or_else(|| config_err(format!("unknown preset {name:?}")))?,
        (None, None) => {
            return Err(config_err(
                "either --config or --preset is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    if let Some(engine) = sel.engine {
        cfg.engine = engine;
    }
    Ok(cfg)
}

fn init_threads(sel: &Selector) {
    if let Some(n) = sel.threads {
        // Ignore a second initialization (tests may share a process).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn cmd_run(sel: &Selector) -> Result<(), Failure> {
    init_threads(sel);
    let cfg = load_config(sel)?;
    let scn = cfg.build().map_err(config_err)?;
    let started = Instant::now();
    let (want_analytic, want_numeric) = engines_to_run(cfg.engine);
    let mut tables = Vec::new();
    let mut engines = Vec::new();
    if want_analytic {
        let out = run_analytic(&scn).map_err(engine_err)?;
        tables.push(("profile_analytic.dat".to_string(), profile_table(&out.profile)));
        engines.push(out.metrics);
    }
    if want_numeric {
        let out = run_numeric(&scn).map_err(engine_err)?;
        tables.push(("profile_numeric.dat".to_string(), profile_table(&out.profile)));
        engines.push(out.metrics);
    }
    let summary = Summary {
        protocol: protocol_name(cfg.protocol).to_string(),
        engines,
    };
    let manifest = write_outputs(
        &sel.out,
        "run",
        &cfg,
        &tables,
        &summary,
        started.elapsed().as_secs_f64(),
    )
    .map_err(engine_err)?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn cmd_validate(sel: &Selector, tolerance: f64) -> Result<(), Failure> {
    init_threads(sel);
    let cfg = load_config(sel)?;
    let scn = cfg.build().map_err(config_err)?;
    let started = Instant::now();
    let numeric = run_numeric(&scn).map_err(engine_err)?;
    let pop_dev = numeric.metrics.max_pop_dev.unwrap_or(f64::NAN);
    let sig_dev = numeric.metrics.max_sig12_dev.unwrap_or(f64::NAN);
    let weak_field_ok = pop_dev < 1e-6 && sig_dev < 1e-6;
    let (max_dev, notice, analytic_out) = if scn.analytic_supported() {
        let analytic = run_analytic(&scn).map_err(engine_err)?;
        let dev = compare_profiles(&analytic.profile, &numeric.profile);
        (dev, None, Some(analytic))
    } else {
        (
            f64::NAN,
            Some(
                "scenario outside analytic validity (phase gradient with unbalanced \
                 populations); numeric-only report"
                    .to_string(),
            ),
            None,
        )
    };
    let pass = weak_field_ok && (max_dev.is_nan() || max_dev < tolerance);
    let report = ValidationReport {
        max_profile_deviation: max_dev,
        tolerance,
        max_pop_dev: pop_dev,
        max_sig12_dev: sig_dev,
        weak_field_ok,
        pass,
        notice: notice.clone(),
    };
    let mut tables = vec![(
        "profile_numeric.dat".to_string(),
        profile_table(&numeric.profile),
    )];
    let mut engines = vec![numeric.metrics];
    if let Some(a) = analytic_out {
        tables.push(("profile_analytic.dat".to_string(), profile_table(&a.profile)));
        engines.insert(0, a.metrics);
    }
    let report_text = toml::to_string_pretty(&report)
        .map_err(|e| engine_err(format!("report serialization: {e}")))?;
    tables.push(("validation.toml".to_string(), report_text));
    let summary = Summary {
        protocol: protocol_name(cfg.protocol).to_string(),
        engines,
    };
    write_outputs(
        &sel.out,
        "validate",
        &cfg,
        &tables,
        &summary,
        started.elapsed().as_secs_f64(),
    )
    .map_err(engine_err)?;
    if let Some(n) = notice {
        println!("notice: {n}");
    }
    if pass {
        println!(
            "validation passed: max profile deviation {max_dev:.3e} (tolerance {tolerance:.3e}), \
             pop dev {pop_dev:.3e}, coherence dev {sig_dev:.3e}"
        );
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VALIDATION,
            message: format!(
                "validation failed: max profile deviation {max_dev:.3e} (tolerance \
                 {tolerance:.3e}), pop dev {pop_dev:.3e}, coherence dev {sig_dev:.3e}"
            ),
        })
    }
}

fn apply_sweep_value(
    cfg: &ScenarioConfig,
    parameter: &str,
    value: f64,
) -> Result<ScenarioConfig, Failure> {
    let mut c = cfg.clone();
    match parameter {
        "optical_depth" => c.medium.optical_depth = value,
        "theta" => c.preparation.theta = value,
        "phi12" => c.preparation.phi12 = value,
        "mixing_angle" => {
            c.pulse.intensity_l = value.cos().powi(2);
            c.pulse.intensity_r = value.sin().powi(2);
        }
        other => {
            return Err(config_err(format!(
                "unknown sweep parameter {other:?} (expected optical_depth, theta, phi12 \
                 or mixing_angle)"
            )))
        }
    }
    Ok(c)
}

fn cmd_sweep(sel: &Selector, parameter: &str, values: &str) -> Result<(), Failure> {
    init_threads(sel);
    let cfg = load_config(sel)?;
    let values: Vec<f64> = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| config_err(format!("bad sweep value {v:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(config_err("sweep needs at least one value".into()));
    }
    let started = Instant::now();
    let numeric = cfg.engine == Engine::Numeric;
    let mut table = String::from(
        "# value p_forward p_backward efficiency fidelity transmitted retrieved\n",
    );
    let mut engines = Vec::new();
    for &v in &values {
        let point = apply_sweep_value(&cfg, parameter, v)?;
        let scn = point.build().map_err(config_err)?;
        let out = if numeric {
            run_numeric(&scn).map_err(engine_err)?
        } else {
            run_analytic(&scn).map_err(engine_err)?
        };
        let m = &out.metrics;
        table.push_str(&format!(
            "{:+.10e} {:+.10e} {:+.10e} {:+.10e} {:+.10e} {:+.10e} {:+.10e}\n",
            v,
            m.p_forward,
            m.p_backward,
            m.efficiency,
            m.fidelity,
            m.transmitted_fraction,
            m.retrieved_fraction
        ));
        engines.push(out.metrics);
    }
    let summary = Summary {
        protocol: protocol_name(cfg.protocol).to_string(),
        engines,
    };
    let tables = vec![("sweep.dat".to_string(), table)];
    let manifest = write_outputs(
        &sel.out,
        &format!("sweep {parameter}"),
        &cfg,
        &tables,
        &summary,
        started.elapsed().as_secs_f64(),
    )
    .map_err(engine_err)?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn cmd_presets(out: Option<PathBuf>) -> Result<(), Failure> {
    match out {
        None => {
            for name in PRESET_NAMES {
                let cfg = preset(name).expect("all listed presets exist");
                println!(
                    "{name}: protocol={}, engine={:?}",
                    protocol_name(cfg.protocol),
                    cfg.engine
                );
            }
        }
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| {
                config_err(format!("cannot create {}: {e}", dir.display()))
            })?;
            for name in PRESET_NAMES {
                let cfg = preset(name).expect("all listed presets exist");
                let path = dir.join(format!("{name}.toml"));
                std::fs::write(&path, cfg.to_toml()).map_err(|e| {
                    engine_err(format!("cannot write {}: {e}", path.display()))
                })?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(sel) => cmd_run(sel),
        Command::Validate {
            selector,
            tolerance,
        } => cmd_validate(selector, *tolerance),
        Command::Sweep {
            selector,
            parameter,
            values,
        } => cmd_sweep(selector, parameter, values),
        Command::Presets { out } => cmd_presets(out.clone()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
