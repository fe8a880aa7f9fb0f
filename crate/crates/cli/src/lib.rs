//! `sdt` command-line front end.
//!
//! Every command reads defaults from [`Config`], optionally overlaid by a
//! TOML file (`--config`) and then by flags. Stochastic commands require a
//! seed; target `i` draws from ChaCha8 stream `i` of that seed, so results do
//! not depend on how many other targets are run alongside it.
//!
//! Exit codes: 0 on success, 1 when a computation or write fails, 2 for
//! usage and configuration errors. Files are written atomically, and none is
//! left behind when any output of the command fails.

pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdt_core::expsim::{fringe_scan, read_counts_csv, write_counts_csv, write_fringe_csv, CountRecord};
use sdt_core::infogeo::{
    fidelity_table, qubit_outcome_region_fraction, qutrit_outcome_region_fraction, sudakov_packing_bounds,
    volume_table, Estimate,
};
use sdt_core::pipeline::{analyze_counts, run_pipeline, PipelineConfig, Weighting};
use sdt_core::protocols::{
    equimodular_state, resource_profile, sdt_correction, EquimodularPhases, ExperimentalPhases, Protocol,
};
use sdt_core::qcore::fidelity;
use sdt_core::tomography::{bootstrap_phase_uncertainty, density_to_json, write_report_csv, MleOptions, ReportRow};
use serde_json::json;

pub use config::Config;
use config::{BoundsTable, Convention, CountsKind, Format, LikelihoodKind, PhaseName};

/// A problem with the invocation or the configuration (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(
    name = "sdt",
    version,
    about = "Superdense teleportation simulator",
    arg_required_else_help = true
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    show_config: bool,
    /// RNG seed; required by commands that sample.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Spatial-mode crosstalk probability on Alice's photon.
    #[arg(long, global = true, value_name = "P", allow_hyphen_values = true)]
    noise_crosstalk_a: Option<f64>,
    /// Spatial-mode crosstalk probability on Bob's photon.
    #[arg(long, global = true, value_name = "P", allow_hyphen_values = true)]
    noise_crosstalk_b: Option<f64>,
    /// Depolarizing strength on Bob's photon.
    #[arg(long, global = true, value_name = "LAMBDA", allow_hyphen_values = true)]
    noise_depolarizing: Option<f64>,
    /// Trials per tomography setting.
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Monte Carlo samples (bounds, region).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline for each target and print one report row per target.
    Simulate {
        /// Target phases in degrees, `p1,p2,p3`; repeatable. Defaults to the nine reference targets.
        #[arg(long = "target", value_parser = parse_triple, allow_hyphen_values = true)]
        targets: Vec<[f64; 3]>,
        #[arg(long, value_enum)]
        convention: Option<Convention>,
        /// Use exact expected counts instead of sampling.
        #[arg(long)]
        analytic: bool,
        #[arg(long, value_enum)]
        likelihood: Option<LikelihoodKind>,
        /// Also write the generated counts (all targets, one file per target if several).
        #[arg(long, value_name = "FILE")]
        counts_out: Option<PathBuf>,
    },
    /// Reconstruct Bob's state from a counts CSV.
    Tomo {
        input: PathBuf,
        /// Canonical target phases in degrees, for a fidelity figure.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        target: Option<[f64; 3]>,
        /// Parametric bootstrap resamples for phase error bars.
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long, value_enum)]
        likelihood: Option<LikelihoodKind>,
    },
    /// Classical fidelity limits, volume ratios or packing bounds.
    Bounds {
        #[arg(long, value_enum)]
        table: Option<BoundsTable>,
        /// Dimensions for the fidelity table.
        #[arg(long, value_delimiter = ',')]
        d: Vec<usize>,
        /// Sizes for the volume (odd n) or packing table.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Sudakov constant.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Fringe probabilities while one experimental phase is scanned.
    Fringes {
        #[arg(long, value_enum)]
        vary: Option<PhaseName>,
        /// Fixed experimental phases `a,b,c` in degrees.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        base: Option<[f64; 3]>,
        /// Scan step in degrees.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Fraction of the outcome octant reached by equimodular qutrits (or the qubit analogue).
    Region {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Resource table for sending N parameters.
    Resources {
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
    },
}

fn parse_triple(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated degrees, got `{s}`"));
    }
    let mut out = [0.0f64; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
        if !o.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

/// Merges file and flags into the effective configuration.
fn effective_config(cli: &Cli) -> Result<Config> {
    let mut c = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if cli.seed.is_some() {
        c.seed = cli.seed;
    }
    if let Some(f) = cli.format {
        c.format = f;
    }
    if let Some(v) = cli.noise_crosstalk_a {
        c.noise.crosstalk_a = v;
    }
    if let Some(v) = cli.noise_crosstalk_b {
        c.noise.crosstalk_b = v;
    }
    if let Some(v) = cli.noise_depolarizing {
        c.noise.depolarizing = v;
    }
    if let Some(v) = cli.shots {
        c.simulate.shots = v;
    }
    match &cli.command {
        Some(Command::Simulate {
            targets,
            convention,
            analytic,
            likelihood,
            ..
        }) => {
            if !targets.is_empty() {
                c.simulate.targets = targets
                    .iter()
                    .enumerate()
                    .map(|(i, p)| config::Target {
                        label: (i + 1).to_string(),
                        phases_deg: *p,
                    })
                    .collect();
            }
            if let Some(v) = convention {
                c.simulate.convention = *v;
            }
            if *analytic {
                c.simulate.counts = CountsKind::Analytic;
            }
            if let Some(v) = likelihood {
                c.simulate.likelihood = *v;
            }
        }
        Some(Command::Tomo {
            bootstrap, likelihood, ..
        }) => {
            if let Some(v) = bootstrap {
                c.tomo.bootstrap = *v;
            }
            if let Some(v) = likelihood {
                c.tomo.likelihood = *v;
            }
        }
        Some(Command::Bounds { table, d, n, c: cc }) => {
            if let Some(v) = table {
                c.bounds.table = *v;
            }
            if !d.is_empty() {
                c.bounds.d = d.clone();
            }
            if !n.is_empty() {
                match c.bounds.table {
                    BoundsTable::Packing => c.bounds.packing_n = n.clone(),
                    _ => c.bounds.volume_n = n.clone(),
                }
            }
            if let Some(v) = cc {
                c.bounds.c = *v;
            }
            if let Some(v) = cli.samples {
                c.bounds.samples = v;
            }
        }
        Some(Command::Fringes { vary, base, step }) => {
            if let Some(v) = vary {
                c.fringes.vary = *v;
            }
            if let Some(v) = base {
                c.fringes.base_deg = *v;
            }
            if let Some(v) = step {
                c.fringes.step_deg = *v;
            }
        }
        Some(Command::Region { dim, resolution }) => {
            if let Some(v) = dim {
                c.region.dim = *v;
            }
            if let Some(v) = resolution {
                c.region.resolution = *v;
            }
            if let Some(v) = cli.samples {
                c.region.samples = v;
            }
        }
        Some(Command::Resources { n }) if !n.is_empty() => c.resources.n = n.clone(),
        Some(Command::Resources { .. }) | None => {}
    }
    c.validate()?;
    Ok(c)
}

fn require_seed(c: &Config, command: &str) -> Result<u64> {
    c.seed
        .ok_or_else(|| UsageError(format!("--seed is required for `{command}` (it draws random samples)")).into())
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Output destined for a file or for stdout.
struct Artifact {
    path: Option<PathBuf>,
    bytes: Vec<u8>,
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let config = effective_config(&cli)?;
    if cli.show_config {
        out.write_all(config.to_toml().as_bytes())?;
        return Ok(());
    }
    let Some(command) = &cli.command else {
        return Err(UsageError("no command given (try --help)".into()).into());
    };
    let (main, mut extra) = match command {
        Command::Simulate { counts_out, .. } => cmd_simulate(&config, counts_out.as_deref(), err)?,
        Command::Tomo { input, target, .. } => (cmd_tomo(&config, input, target.as_ref())?, Vec::new()),
        Command::Bounds { .. } => (cmd_bounds(&config)?, Vec::new()),
        Command::Fringes { .. } => (cmd_fringes(&config)?, Vec::new()),
        Command::Region { .. } => (cmd_region(&config)?, Vec::new()),
        Command::Resources { .. } => (cmd_resources(&config, err)?, Vec::new()),
    };
    extra.push(Artifact {
        path: cli.out.clone(),
        bytes: main,
    });
    commit(extra, out)
}

/// Writes every file artifact atomically, then stdout. If any file fails,
/// the ones already placed are removed.
fn commit(artifacts: Vec<Artifact>, out: &mut dyn Write) -> Result<()> {
    let mut placed: Vec<PathBuf> = Vec::new();
    let mut stdout_parts = Vec::new();
    for a in artifacts {
        match a.path {
            None => stdout_parts.push(a.bytes),
            Some(path) => {
                if let Err(e) = write_atomic(&path, &a.bytes) {
                    for p in &placed {
                        let _ = std::fs::remove_file(p);
                    }
                    return Err(e);
                }
                placed.push(path);
            }
        }
    }
    for b in stdout_parts {
        out.write_all(&b)?;
    }
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write {}", path.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s.into_bytes()
}

fn target_phases(convention: Convention, deg: &[f64; 3]) -> Result<EquimodularPhases> {
    Ok(match convention {
        Convention::Canonical => EquimodularPhases::from_degrees(deg)?,
        Convention::Experimental => ExperimentalPhases::from_degrees(deg[0], deg[1], deg[2]).to_equimodular(),
    })
}

fn cmd_simulate(c: &Config, counts_out: Option<&Path>, err: &mut dyn Write) -> Result<(Vec<u8>, Vec<Artifact>)> {
    let s = &c.simulate;
    let seed = match s.counts {
        CountsKind::Sampled => require_seed(c, "simulate")?,
        CountsKind::Analytic => c.seed.unwrap_or(0),
    };
    let cfg = PipelineConfig {
        noise: c.noise.model(),
        shots: s.shots,
        mode: s.counts.into(),
        mle: MleOptions {
            likelihood: s.likelihood.into(),
            ..MleOptions::default()
        },
    };
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut converged = Vec::new();
    let mut counts: Vec<(String, Vec<CountRecord>)> = Vec::new();
    for (i, t) in s.targets.iter().enumerate() {
        let phases = target_phases(s.convention, &t.phases_deg)?;
        let res = run_pipeline(&phases, &cfg, &mut stream(seed, i as u64))
            .with_context(|| format!("target `{}`", t.label))?;
        let mut row = res.report_row().with_label(t.label.clone());
        if s.convention == Convention::Experimental {
            row.target_deg = t.phases_deg.to_vec();
            row.measured_deg = {
                let e = ExperimentalPhases::from_equimodular(&res.estimate().phases)?;
                [e.a, e.b, e.c].iter().map(|x| x.to_degrees()).collect()
            };
        }
        converged.push(res.analysis.outcomes.iter().all(|o| o.reconstruction.converged));
        rows.push(row);
        counts.push((t.label.clone(), res.counts));
    }
    if converged.iter().any(|c| !c) {
        writeln!(err, "warning: some reconstructions hit the iteration limit")?;
    }

    let main = match c.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_report_csv(&rows, &mut buf)?;
            buf
        }
        Format::Json => json_bytes(&json!({
            "metadata": {
                "seed": c.seed,
                "shots": s.shots,
                "counts": s.counts,
                "likelihood": s.likelihood,
                "convention": s.convention,
                "weighting": Weighting::OutcomeProbability,
                "noise": c.noise,
            },
            "rows": rows.iter().zip(&converged).map(|(r, conv)| json!({
                "label": r.label,
                "target_deg": r.target_deg,
                "measured_deg": r.measured_deg,
                "fidelity_pct": r.fidelity_percent(),
                "converged": conv,
            })).collect::<Vec<_>>(),
        })),
    };

    let mut extra = Vec::new();
    if let Some(path) = counts_out {
        if counts.len() == 1 {
            let mut buf = Vec::new();
            write_counts_csv(&counts[0].1, &mut buf)?;
            extra.push(Artifact {
                path: Some(path.to_path_buf()),
                bytes: buf,
            });
        } else {
            for (label, recs) in &counts {
                let mut buf = Vec::new();
                write_counts_csv(recs, &mut buf)?;
                extra.push(Artifact {
                    path: Some(with_label(path, label)),
                    bytes: buf,
                });
            }
        }
    }
    Ok((main, extra))
}

/// `counts.csv` + `a` → `counts_a.csv`.
fn with_label(path: &Path, label: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{label}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{label}"),
    };
    path.with_file_name(name)
}

fn cmd_tomo(c: &Config, input: &Path, target: Option<&[f64; 3]>) -> Result<Vec<u8>> {
    let seed = if c.tomo.bootstrap > 0 {
        Some(require_seed(c, "tomo --bootstrap")?)
    } else {
        None
    };
    let file = std::fs::File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
    let records = read_counts_csv(file).with_context(|| format!("reading {}", input.display()))?;
    let opts = MleOptions {
        likelihood: c.tomo.likelihood.into(),
        ..MleOptions::default()
    };
    let analysis = analyze_counts(&records, None, &opts)?;
    let phases_deg = analysis.estimate.degrees();
    let fid = match target {
        Some(t) => Some(fidelity(
            &analysis.averaged,
            &equimodular_state(&EquimodularPhases::from_degrees(t)?),
        )?),
        None => None,
    };
    let sigma_deg = if let Some(seed) = seed {
        let groups: Vec<Vec<CountRecord>> = analysis
            .outcomes
            .iter()
            .map(|o| records.iter().filter(|r| r.outcome == o.outcome).copied().collect())
            .collect();
        let us = analysis
            .outcomes
            .iter()
            .map(|o| sdt_correction(o.outcome))
            .collect::<sdt_core::Result<Vec<_>>>()?;
        let ws = vec![1.0; us.len()];
        let sd = bootstrap_phase_uncertainty(&groups, &us, &ws, c.tomo.bootstrap, &opts, &mut stream(seed, 0))?;
        Some(sd.iter().map(|s| s.to_degrees()).collect::<Vec<_>>())
    } else {
        None
    };

    Ok(match c.format {
        Format::Json => json_bytes(&json!({
            "metadata": {
                "records": records.len(),
                "likelihood": c.tomo.likelihood,
                "weighting": analysis.weighting,
                "bootstrap": c.tomo.bootstrap,
            },
            "outcomes": analysis.outcomes.iter().map(|o| json!({
                "outcome": o.outcome,
                "neg_log_likelihood": o.reconstruction.neg_log_likelihood,
                "iterations": o.reconstruction.iterations,
                "converged": o.reconstruction.converged,
                "rho": density_to_json(&o.reconstruction.rho),
            })).collect::<Vec<_>>(),
            "averaged": density_to_json(&analysis.averaged),
            "phases_deg": phases_deg,
            "phase_sigma_deg": sigma_deg,
            "fidelity": fid,
        })),
        Format::Csv => {
            let n = phases_deg.len();
            let mut header: Vec<String> = (1..=n).map(|j| format!("measured_phi{j}_deg")).collect();
            let mut row: Vec<String> = phases_deg.iter().map(|x| format!("{x:.4}")).collect();
            if let Some(sd) = &sigma_deg {
                header.extend((1..=n).map(|j| format!("sigma_phi{j}_deg")));
                row.extend(sd.iter().map(|x| format!("{x:.4}")));
            }
            if let Some(f) = fid {
                header.push("fidelity_pct".into());
                row.push(format!("{:.4}", 100.0 * f));
            }
            header.push("weighting".into());
            row.push("uniform".into());
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_bytes(&h, &[row])
        }
    })
}

fn estimate_cells(e: Option<Estimate>) -> [String; 2] {
    match e {
        Some(e) => [e.value.to_string(), e.standard_error.to_string()],
        None => [String::new(), String::new()],
    }
}

fn cmd_bounds(c: &Config) -> Result<Vec<u8>> {
    let b = &c.bounds;
    match b.table {
        BoundsTable::Fidelity => {
            let seed = if b.samples > 0 {
                Some(require_seed(c, "bounds")?)
            } else {
                None
            };
            let mut rows = Vec::new();
            for &d in &b.d {
                let (row, mc) = match seed {
                    Some(s) => {
                        let r = fidelity_table(&[d], b.samples, &mut stream(s, d as u64))?.remove(0);
                        (r, Some(r.mc))
                    }
                    None => (fidelity_table(&[d], 1, &mut stream(0, 0))?.remove(0), None),
                };
                rows.push((row, mc));
            }
            Ok(match c.format {
                Format::Csv => {
                    let body: Vec<Vec<String>> = rows
                        .iter()
                        .map(|(r, mc)| {
                            let [v, se] = estimate_cells(*mc);
                            vec![
                                r.d.to_string(),
                                r.n_params.to_string(),
                                r.general.to_string(),
                                r.equimodular.to_string(),
                                v,
                                se,
                            ]
                        })
                        .collect();
                    csv_bytes(
                        &["d", "N", "F_general", "F_equimodular", "mc_estimate", "mc_stderr"],
                        &body,
                    )
                }
                Format::Json => json_bytes(&json!({
                    "metadata": { "seed": seed, "samples": b.samples, "estimator": "strategy" },
                    "rows": rows.iter().map(|(r, mc)| json!({
                        "d": r.d,
                        "N": r.n_params,
                        "F_general": r.general,
                        "F_equimodular": r.equimodular,
                        "mc_estimate": mc.map(|e| e.value),
                        "mc_stderr": mc.map(|e| e.standard_error),
                    })).collect::<Vec<_>>(),
                })),
            })
        }
        BoundsTable::Volume => {
            let rows = volume_table(&b.volume_n)?;
            Ok(match c.format {
                Format::Csv => {
                    let body: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.n.to_string(),
                                r.vol_torus.to_string(),
                                r.vol_projective.to_string(),
                                r.ratio.to_string(),
                                r.log_ratio.to_string(),
                            ]
                        })
                        .collect();
                    csv_bytes(&["n", "vol_torus", "vol_projective", "ratio", "log_ratio"], &body)
                }
                Format::Json => json_bytes(&serde_json::to_value(&rows)?),
            })
        }
        BoundsTable::Packing => {
            let rows = b
                .packing_n
                .iter()
                .map(|&n| sudakov_packing_bounds(n, b.c))
                .collect::<sdt_core::Result<Vec<_>>>()?;
            Ok(match c.format {
                Format::Csv => {
                    let body: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.n.to_string(),
                                r.c.to_string(),
                                r.delta_threshold.to_string(),
                                r.lower_log2.to_string(),
                                r.upper_ln.to_string(),
                            ]
                        })
                        .collect();
                    csv_bytes(&["n", "C", "delta_threshold", "lower_log2", "upper_ln"], &body)
                }
                Format::Json => json_bytes(&serde_json::to_value(&rows)?),
            })
        }
    }
}

fn cmd_fringes(c: &Config) -> Result<Vec<u8>> {
    let f = &c.fringes;
    let steps = (360.0 / f.step_deg).floor() as usize;
    let angles: Vec<f64> = (0..=steps).map(|i| i as f64 * f.step_deg).collect();
    let base = ExperimentalPhases::from_degrees(f.base_deg[0], f.base_deg[1], f.base_deg[2]);
    let scan = fringe_scan(f.vary.into(), base, &angles, &c.noise.model())?;
    Ok(match c.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_fringe_csv(&scan, &mut buf)?;
            buf
        }
        Format::Json => json_bytes(&json!({
            "metadata": { "vary": f.vary, "base_deg": f.base_deg, "noise": c.noise },
            "points": scan.points,
        })),
    })
}

fn cmd_region(c: &Config) -> Result<Vec<u8>> {
    let r = &c.region;
    let seed = require_seed(c, "region")?;
    let mut rng = stream(seed, 0);
    let e = match r.dim {
        2 => qubit_outcome_region_fraction(r.samples, r.resolution, &mut rng)?,
        _ => qutrit_outcome_region_fraction(r.samples, r.resolution, &mut rng)?,
    };
    Ok(match c.format {
        Format::Csv => csv_bytes(
            &["dim", "fraction", "stderr", "cells_hit", "cells_total", "samples"],
            &[vec![
                r.dim.to_string(),
                e.fraction.to_string(),
                e.standard_error.to_string(),
                e.cells_hit.to_string(),
                e.cells_total.to_string(),
                e.samples.to_string(),
            ]],
        ),
        Format::Json => json_bytes(&json!({ "dim": r.dim, "seed": seed, "estimate": e })),
    })
}

fn cmd_resources(c: &Config, err: &mut dyn Write) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for &n in &c.resources.n {
        for proto in Protocol::ALL {
            match resource_profile(proto, n) {
                Ok(p) => rows.push(p),
                Err(e) => writeln!(err, "note: {e}")?,
            }
        }
    }
    Ok(match c.format {
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|p| {
                    vec![
                        p.n_params.to_string(),
                        p.protocol.name().to_string(),
                        p.state_dim.to_string(),
                        p.success_probability.to_string(),
                        p.classical_bits.to_string(),
                        p.alice_detectors.to_string(),
                        p.bob_transformations.to_string(),
                        serde_json::to_value(p.charles_knowledge)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_string))
                            .unwrap_or_default(),
                    ]
                })
                .collect();
            csv_bytes(
                &[
                    "N",
                    "protocol",
                    "state_dim",
                    "success_probability",
                    "classical_bits",
                    "alice_detectors",
                    "bob_transformations",
                    "known_to_charles",
                ],
                &body,
            )
        }
        Format::Json => json_bytes(&serde_json::to_value(&rows)?),
    })
}
