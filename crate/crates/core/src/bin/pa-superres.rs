use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pa_superres::attenuation::{conversion_formula, np_m_rad_to_db_cm_mhz_y, AttenuationLaw, Dispersion};
use pa_superres::error::{Error, Result};
use pa_superres::experiment::benchmark::{benchmark_separations, run_benchmark_at};
use pa_superres::experiment::forward::noise_reference;
use pa_superres::experiment::{emit_plot_data, generate_phantom, run_forward, ExperimentConfig};
use pa_superres::operator::ForwardOperator;
use pa_superres::resolution::{cutoff_frequency, ResolutionReport};
use pa_superres::signal::Signal;
use pa_superres::solvers::{dr_reconstruct, tsvd_reconstruct, DrConfig, SolverResult, TsvdConfig};

/// Attenuation compensation and resolution benchmarks for 1D photoacoustic signals.
#[derive(Debug, Parser)]
#[command(name = "pa-superres", version)]
struct Cli {
    /// Print unit conversions and progress to stderr.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Forward-simulate the configured phantom at every distance.
    ///
    /// Writes phantom.csv, measurement_<k>.csv (k indexes r_list) and simulate.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cut-off frequency and linear resolution limit.
    ///
    /// Prints key=value blocks, or a JSON array with --json. With --out also
    /// writes cutoff.txt and cutoff.json.
    Cutoff {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Attenuation prefactor, dB/cm/MHz^y (overrides the config).
        #[arg(long)]
        alpha_db: Option<f64>,
        #[arg(long)]
        y: Option<f64>,
        /// m/s
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long)]
        f_ref: Option<f64>,
        #[arg(long, value_enum)]
        dispersion: Option<DispersionArg>,
        /// Distance in m; repeatable. Defaults to the config's r_list.
        #[arg(long)]
        r: Vec<f64>,
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct a measured `t,p` CSV.
    ///
    /// Writes reconstruction.csv (or --output) and diagnostics.csv.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "tsvd")]
        method: Method,
        /// Distance in m; defaults to the largest configured distance.
        #[arg(long)]
        r: Option<f64>,
        /// T-SVD truncation level.
        #[arg(long)]
        snr: Option<f64>,
        /// T-SVD brick-wall cut-off in Hz instead of the SNR rule.
        #[arg(long)]
        cut_hz: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        relaxation: Option<f64>,
    },
    /// Two-source resolution benchmark.
    ///
    /// Writes benchmark.csv/.json for the largest distance and
    /// benchmark_r<k>.csv/.json for every entry of r_list.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise realizations per separation; rows report the resolve rate.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Normalized plot data (CSV and SVG).
    ///
    /// Without --signal: fig_tsvd.* (measurements and T-SVD per distance) and
    /// fig_dr.* (T-SVD and DR at the largest distance). With --signal
    /// LABEL=PATH (repeatable): plot.* of the given signals.
    Plotdata {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "signal")]
        signals: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Tsvd,
    Dr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DispersionArg {
    On,
    Off,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", json!({ "error": "usage", "message": first }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Simulate { config, out, seed } => {
            let mut cfg = load(&config, verbose)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            simulate(&cfg, &out_dir(out, &cfg)?)
        }
        Command::Cutoff {
            config,
            alpha_db,
            y,
            c0,
            f_ref,
            dispersion,
            r,
            snr,
            json,
            out,
        } => {
            let cfg = config.as_deref().map(|p| load(p, false)).transpose()?;
            let base = cfg.as_ref().map(|c| c.law);
            let pick = |flag: Option<f64>, from_cfg: Option<f64>, name: &str| {
                flag.or(from_cfg)
                    .ok_or_else(|| Error::InvalidInput(format!("--{name} is required without --config")))
            };
            let y_val = pick(y, base.map(|l| l.exponent()), "y")?;
            let alpha_db_val = pick(
                alpha_db,
                base.map(|l| np_m_rad_to_db_cm_mhz_y(l.alpha0(), l.exponent())),
                "alpha-db",
            )?;
            let c0_val = pick(c0, base.map(|l| l.c0()), "c0")?;
            let f_ref_val = f_ref
                .or(base.map(|l| l.omega_ref() / (2.0 * std::f64::consts::PI)))
                .unwrap_or(pa_superres::attenuation::DEFAULT_F_REF_HZ);
            let disp = match dispersion {
                Some(DispersionArg::On) => Dispersion::On,
                Some(DispersionArg::Off) => Dispersion::Off,
                None => base.map(|l| l.dispersion()).unwrap_or(Dispersion::On),
            };
            if verbose {
                eprintln!("{}", conversion_formula(alpha_db_val, y_val));
            }
            let law = AttenuationLaw::from_db_cm_mhz_y(alpha_db_val, y_val, c0_val, f_ref_val, disp)?;
            let rs = if r.is_empty() {
                cfg.as_ref()
                    .map(|c| c.r_list.clone())
                    .ok_or_else(|| Error::InvalidInput("--r is required without --config".into()))?
            } else {
                r
            };
            let snr = pick(snr, cfg.as_ref().map(|c| c.snr), "snr")?;
            let reports = rs
                .iter()
                .map(|&r| cutoff_frequency(&law, r, snr))
                .collect::<Result<Vec<_>>>()?;
            let text = key_values(&reports);
            let json_text = to_json(&reports)?;
            print!("{}", if json { &json_text } else { &text });
            if let Some(dir) = out {
                ensure_dir(&dir)?;
                write(&dir.join("cutoff.txt"), &text)?;
                write(&dir.join("cutoff.json"), &json_text)?;
            }
            Ok(())
        }
        Command::Reconstruct {
            config,
            input,
            output,
            out,
            method,
            r,
            snr,
            cut_hz,
            lambda,
            tau,
            iters,
            tol,
            relaxation,
        } => {
            let cfg = load(&config, verbose)?;
            let p = Signal::read_csv(&input)?;
            let r = r.unwrap_or_else(|| cfg.largest_r());
            let op = ForwardOperator::build(&cfg.law, r, p.grid(), cfg.ir.as_ref())?;
            let result = match method {
                Method::Tsvd => {
                    let tc = match cut_hz {
                        Some(f) => TsvdConfig::with_cut(2.0 * std::f64::consts::PI * f)?,
                        None => TsvdConfig::new(snr.or(cfg.tsvd.snr).unwrap_or(cfg.snr))?,
                    };
                    tsvd_reconstruct(&op, &p, &tc)?
                }
                Method::Dr => {
                    let its = iters.unwrap_or(*cfg.dr.iterations.last().expect("validated nonempty"));
                    let base = cfg.dr_config(&op, &p, its)?;
                    let dc = DrConfig {
                        lambda: lambda.unwrap_or(base.lambda),
                        tau: tau.unwrap_or(base.tau),
                        relaxation: relaxation.unwrap_or(base.relaxation),
                        tol: tol.unwrap_or(base.tol),
                        ..base
                    };
                    if verbose {
                        eprintln!("dr: {dc:?}");
                    }
                    dr_reconstruct(&op, &p, &dc)?
                }
            };
            let dir = out_dir(out, &cfg)?;
            let target = output.unwrap_or_else(|| dir.join("reconstruction.csv"));
            result.reconstruction.write_csv(&target)?;
            write(&dir.join("diagnostics.csv"), &result.diagnostics_csv())?;
            print_summary(&result);
            Ok(())
        }
        Command::Benchmark {
            config,
            out,
            repeats,
            seed,
        } => {
            let mut cfg = load(&config, verbose)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out_dir(out, &cfg)?;
            let seps = benchmark_separations(&cfg)?;
            let rmax = cfg.largest_r();
            for (k, &r) in cfg.r_list.iter().enumerate() {
                let result = run_benchmark_at(&cfg, k, &seps, repeats)?;
                result.write(&dir, &format!("benchmark_r{k}"))?;
                if r == rmax {
                    result.write(&dir, "benchmark")?;
                    for s in &result.summary {
                        println!(
                            "{}: smallest resolved separation = {}",
                            s.method,
                            s.smallest_resolved_s.map_or("none".to_string(), |v| format!("{v:e} s"))
                        );
                    }
                    println!("delta_limit = {:e} s ({:e} m)", result.delta_limit_s, result.delta_limit_m);
                }
            }
            Ok(())
        }
        Command::Plotdata { config, out, signals } => {
            if !signals.is_empty() {
                let dir = match (&out, &config) {
                    (Some(d), _) => d.clone(),
                    (None, Some(c)) => load(c, verbose)?.output_dir,
                    (None, None) => return Err(Error::InvalidInput("--out is required".into())),
                };
                ensure_dir(&dir)?;
                let labelled = signals
                    .iter()
                    .map(|s| {
                        let (label, path) = s.split_once('=').ok_or_else(|| {
                            Error::InvalidInput(format!("--signal expects LABEL=PATH, got `{s}`"))
                        })?;
                        Ok((label.to_string(), Signal::read_csv(path)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                emit_plot_data(&labelled, dir.join("plot.csv"))?;
                return Ok(());
            }
            let config = config.ok_or_else(|| Error::InvalidInput("--config or --signal is required".into()))?;
            let cfg = load(&config, verbose)?;
            figures(&cfg, &out_dir(out, &cfg)?)
        }
    }
}

fn load(path: &Path, verbose: bool) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path)?;
    if verbose {
        let y = cfg.law.exponent();
        eprintln!("{}", conversion_formula(np_m_rad_to_db_cm_mhz_y(cfg.law.alpha0(), y), y));
    }
    Ok(cfg)
}

fn out_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = flag.unwrap_or_else(|| cfg.output_dir.clone());
    ensure_dir(&dir)?;
    Ok(dir)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn key_values(reports: &[ResolutionReport]) -> String {
    reports
        .iter()
        .map(|r| r.to_key_values())
        .collect::<Vec<_>>()
        .join("\n")
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Internal(e.to_string()))
}

fn print_summary(result: &SolverResult) {
    println!("iterations_run={}", result.iterations_run);
    println!("converged={}", result.converged);
    if let Some(r) = result.residual_norm_history.last() {
        println!("residual={r:e}");
    }
    if let Some(w) = result.effective_cutoff {
        println!("effective_cutoff_hz={:e}", w / (2.0 * std::f64::consts::PI));
    }
}

fn simulate(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let phantom = generate_phantom(&cfg.phantom, cfg.grid)?;
    phantom.write_csv(dir.join("phantom.csv"))?;
    let measurements = run_forward(cfg, &phantom)?;
    let mut files = Vec::new();
    for (k, m) in measurements.iter().enumerate() {
        let name = format!("measurement_{k}.csv");
        m.signal.write_csv(dir.join(&name))?;
        files.push(json!({ "r": m.r, "file": name }));
    }
    let manifest = json!({
        "n": cfg.grid.n,
        "dt": cfg.grid.dt,
        "snr": cfg.snr,
        "seed": cfg.seed,
        "noise_reference": noise_reference(&phantom),
        "measurements": files,
    });
    write(&dir.join("simulate.json"), &to_json(&manifest)?)
}

fn figures(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let phantom = generate_phantom(&cfg.phantom, cfg.grid)?;
    let tsvd_cfg = cfg.tsvd_config()?;
    let measurements = run_forward(cfg, &phantom)?;
    let mut first = vec![("phantom".to_string(), phantom.clone())];
    for m in &measurements {
        let mm = m.r * 1e3;
        let rec = tsvd_reconstruct(&cfg.operator(m.r)?, &m.signal, &tsvd_cfg)?;
        first.push((format!("measured_{mm}mm"), m.signal.clone()));
        first.push((format!("tsvd_{mm}mm"), rec.reconstruction));
    }
    emit_plot_data(&first, dir.join("fig_tsvd.csv"))?;

    let r = cfg.largest_r();
    let op = cfg.operator(r)?;
    let p = &measurements
        .iter()
        .find(|m| m.r == r)
        .expect("largest r is in r_list")
        .signal;
    let mut second = vec![
        ("phantom".to_string(), phantom.clone()),
        ("tsvd".to_string(), tsvd_reconstruct(&op, p, &tsvd_cfg)?.reconstruction),
    ];
    for &it in &cfg.dr.iterations {
        let rec = dr_reconstruct(&op, p, &cfg.dr_config(&op, p, it)?)?;
        second.push((format!("dr{it}"), rec.reconstruction));
    }
    emit_plot_data(&second, dir.join("fig_dr.csv"))?;
    Ok(())
}
