use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rflink_core::desense::{emit_desense_csv, round2, DesenseError};
use rflink_core::io::{read_iq_file, read_text, write_atomic, IoError};
use rflink_core::modulation::{ideal_points, ModulationScheme, NormalizationMode};
use rflink_core::plot::constellation_svg;
use rflink_core::sweep::{simulate_link, sweep_csv, SweepConfig, SweepConfigDoc, SweepError};
use rflink_core::{compute_desense, evm_report, parse_sensitivity_csv, run_sweep, summarize, theory_point, RatioDb};

/// Desense, EVM and Rx-sweep tooling for QPSK/QAM receivers.
#[derive(Debug, Parser)]
#[command(name = "rflink", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute EVM between a reference and a measured IQ file (`i,q` CSV).
    Evm(EvmArgs),
    /// Compute desense (aggressor ON minus OFF) from two sensitivity logs.
    Desense(DesenseArgs),
    /// Run an Rx power sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Render a constellation with AWGN at a given SNR to SVG.
    Constellation(ConstellationArgs),
}

#[derive(Debug, Args)]
struct EvmArgs {
    /// Reference (ideal) symbols.
    #[arg(long = "ref", value_name = "FILE")]
    ref_file: PathBuf,
    /// Measured symbols.
    #[arg(long = "meas", value_name = "FILE")]
    meas_file: PathBuf,
    /// Normalizing RMS magnitude; defaults to the RMS of the reference file.
    #[arg(long)]
    ref_rms: Option<f64>,
}

#[derive(Debug, Args)]
struct DesenseArgs {
    /// Sensitivity log with the aggressor off.
    #[arg(long = "off", value_name = "FILE")]
    off_file: PathBuf,
    /// Sensitivity log with the aggressor on.
    #[arg(long = "on", value_name = "FILE")]
    on_file: PathBuf,
    /// Desense CSV to write.
    #[arg(long = "out", value_name = "FILE")]
    out_file: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep config (JSON).
    #[arg(long = "config", value_name = "FILE")]
    config_file: PathBuf,
    /// Directory for sweep.csv and the constellation SVGs.
    #[arg(long = "out-dir", value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ConstellationArgs {
    /// QPSK, QAM16, QAM64 or QAM256.
    #[arg(long)]
    scheme: ModulationScheme,
    /// Per-symbol SNR in dB; omit for ideal points only.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Number of noisy symbols to draw.
    #[arg(long, default_value_t = 2000)]
    symbols: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// raw or unit-power.
    #[arg(long, default_value = "unit-power")]
    mode: NormalizationMode,
    /// SVG file to write.
    #[arg(long = "out", value_name = "FILE")]
    out_file: PathBuf,
}

#[derive(Debug)]
enum CliError {
    /// Bad input data (exit 1).
    Input(String),
    /// Bad configuration (exit 2).
    Config(String),
    /// Anything else (exit 3).
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Config(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Config(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Format { .. } => CliError::Input(e.to_string()),
            IoError::File { .. } => CliError::Internal(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Evm(args) => cmd_evm(&args),
        Command::Desense(args) => cmd_desense(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Constellation(args) => cmd_constellation(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_evm(args: &EvmArgs) -> Result<(), CliError> {
    let reference = read_iq_file(&args.ref_file)?;
    let meas = read_iq_file(&args.meas_file)?;
    if reference.len() != meas.len() {
        return Err(CliError::Input(format!(
            "row count mismatch: reference {} has {} symbols, measured {} has {}",
            args.ref_file.display(),
            reference.len(),
            args.meas_file.display(),
            meas.len()
        )));
    }
    let ref_rms = match args.ref_rms {
        Some(v) => v,
        None => reference.rms().ok_or_else(|| CliError::Input("reference file has no symbols".into()))?,
    };
    let report = evm_report(&meas, &reference, ref_rms).map_err(|e| CliError::Input(e.to_string()))?;

    println!("symbols: {}", report.num_symbols);
    println!("ref_rms: {:.6}", report.ref_rms);
    for (k, e) in report.per_symbol_error.iter().enumerate() {
        println!("error[{k}]: {e:.6}");
    }
    println!("evm_rms: {:.6}", report.evm_rms);
    println!("evm_percent: {:.4}", report.evm_percent);
    println!("evm_db: {:.4}", report.evm_db);
    Ok(())
}

fn cmd_desense(args: &DesenseArgs) -> Result<(), CliError> {
    let parse = |path: &Path| -> Result<_, CliError> {
        let text = read_text(path)?;
        parse_sensitivity_csv(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    };
    let off = parse(&args.off_file)?;
    let on = parse(&args.on_file)?;
    let rows = compute_desense(&off, &on).map_err(|e| match e {
        DesenseError::Pairing { problems } => {
            let mut msg = String::from("cannot pair the two logs:");
            for p in problems {
                msg.push_str("\n  ");
                msg.push_str(&p);
            }
            CliError::Input(msg)
        }
        other => CliError::Input(other.to_string()),
    })?;
    let summary = summarize(&rows).map_err(|e| CliError::Input(e.to_string()))?;
    write_atomic(&args.out_file, emit_desense_csv(&rows).as_bytes())?;

    println!("{} desense rows written to {}", rows.len(), args.out_file.display());
    println!("antenna   min_db   mean_db   max_db   worst");
    for a in &summary.antennas {
        println!(
            "{:<8} {:>7.2} {:>9.2} {:>8.2}   {}@{}",
            a.antenna,
            round2(a.min_db),
            round2(a.mean_db),
            round2(a.max_db),
            a.worst_band,
            a.worst_freq_mhz
        );
    }
    println!("worst antenna: {}", summary.worst_antenna);
    Ok(())
}

fn load_sweep_config(path: &Path) -> Result<SweepConfig, CliError> {
    let text = read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let doc: SweepConfigDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::Config(format!("{}: {field}: {}", path.display(), e.inner()))
    })?;
    SweepConfig::try_from(doc).map_err(|e| match e {
        SweepError::Config { .. } => CliError::Config(format!("{}: {e}", path.display())),
        other => CliError::Internal(other.to_string()),
    })
}

/// Writes every file or none of them.
fn write_all_or_nothing(files: &[(PathBuf, Vec<u8>)]) -> Result<(), CliError> {
    for (k, (path, contents)) in files.iter().enumerate() {
        if let Err(e) = write_atomic(path, contents) {
            for (written, _) in &files[..k] {
                let _ = std::fs::remove_file(written);
            }
            return Err(e.into());
        }
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let config = load_sweep_config(&args.config_file)?;
    let results = run_sweep(&config).map_err(|e| CliError::Internal(e.to_string()))?;
    let spec = ideal_points(config.scheme, config.mode);

    let mut files = vec![(args.out_dir.join("sweep.csv"), sweep_csv(config.scheme, &results).into_bytes())];
    let tag: String = config.labels.iter().map(|(k, v)| format!(", {k}={v}")).collect();
    for r in &results {
        let title = format!("{} at {} dBm (SNR {:.2} dB{tag})", config.scheme, r.rx_power.value(), r.snr.value());
        let svg = constellation_svg(spec.points(), r.sampled_points.samples(), &title);
        files.push((args.out_dir.join(format!("constellation_{}.svg", r.rx_power.value())), svg.into_bytes()));
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Internal(format!("{}: {e}", args.out_dir.display())))?;
    write_all_or_nothing(&files)?;

    println!("rx_dbm    snr_db   evm_da_%  evm_dd_%  ser         ber         ser_theory");
    for r in &results {
        let t = theory_point(config.scheme, r.snr);
        println!(
            "{:>7.2} {:>8.3} {:>9.4} {:>9.4}  {:<10.4e}  {:<10.4e}  {:.4e}",
            r.rx_power.value(),
            r.snr.value(),
            r.evm_percent_data_aided,
            r.evm_percent_decision_directed,
            r.ser,
            r.ber,
            t.ser_theory
        );
    }
    println!("wrote {} files to {}", files.len(), args.out_dir.display());
    Ok(())
}

fn cmd_constellation(args: &ConstellationArgs) -> Result<(), CliError> {
    let spec = ideal_points(args.scheme, args.mode);
    let (samples, title) = match args.snr_db {
        Some(snr_db) => {
            let snr = if snr_db == f64::INFINITY {
                RatioDb::infinite()
            } else {
                RatioDb::new(snr_db).map_err(|e| CliError::Config(format!("--snr-db: {e}")))?
            };
            if args.symbols == 0 {
                return Err(CliError::Config("--symbols: must be at least 1".into()));
            }
            let snap = simulate_link(&spec, snr, args.symbols, args.seed, args.symbols)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            let title = format!(
                "{} at {snr_db} dB SNR (EVM {:.2}%)",
                args.scheme, snap.evm_percent_data_aided
            );
            (snap.sampled_points.into_samples(), title)
        }
        None => (Vec::new(), format!("{} ideal constellation", args.scheme)),
    };
    write_atomic(&args.out_file, constellation_svg(spec.points(), &samples, &title).as_bytes())?;
    println!("{title}");
    println!("wrote {}", args.out_file.display());
    Ok(())
}
