use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use switchbf::channel::{generate_seeded, read_channel_dump, write_channel_dump, MeanAngleLaw};
use switchbf::connectivity::ConnectivitySpec;
use switchbf::linalg::CMatrix;
use switchbf::metrics::{mutual_information, optimal_precoder, truncated_channel, LinkBudget};
use switchbf::nm::{design_shd_nm, NmConfig};
use switchbf::qrqu::{design_shd_qrqu, QrquConfig};
use switchbf::DesignReport;
use switchbf_experiment::summary::{read_summary_csv, write_summary_csv, SUMMARY_HEADER};
use switchbf_experiment::sweep::{read_records_csv, CSV_HEADER};
use switchbf_experiment::{
    emit_plot, run_sweep, summarize, write_records_csv, ConnectivityRef, ExperimentConfig, ExperimentError, Method,
    Result,
};

#[derive(Parser)]
#[command(name = "switchbf", version, about = "Switch-based hybrid precoder design and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design one precoder for one channel and write the report as JSON.
    Design(DesignArgs),
    /// Run a Monte-Carlo sweep and write one CSV row per trial, method, SNR
    /// and stream count.
    ///
    /// Every trial draws one channel shared by all methods and SNR points.
    /// SHD-NM scores candidates by mutual information, which depends on the
    /// SNR, so it is redesigned at every SNR point. The SHD-QRQU analog stage
    /// does not depend on the SNR; it is designed once per trial and stream
    /// count and evaluated at every SNR.
    Sweep(SweepArgs),
    /// Plot a record CSV or a summary CSV as SVG.
    Plot(PlotArgs),
    /// Check a CONNSPEC1 connectivity file.
    ValidateSpec(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Confined,
    Gated,
}

impl From<LawArg> for MeanAngleLaw {
    fn from(l: LawArg) -> Self {
        match l {
            LawArg::Confined => MeanAngleLaw::Confined,
            LawArg::Gated => MeanAngleLaw::Gated,
        }
    }
}

#[derive(Args)]
struct DesignArgs {
    /// TOML experiment config supplying the channel model and design settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Channel dump (MMWCH1) to design for; otherwise a channel is generated.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Seed of the generated channel.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "SHD-NM", value_parser = parse_method)]
    method: Method,
    #[arg(long, default_value_t = 2)]
    ns: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr: f64,
    #[arg(long)]
    k_t: Option<usize>,
    /// `subset`, `interleaved:<period>`, `full` or a CONNSPEC1 file.
    #[arg(long, value_parser = parse_connectivity)]
    connectivity: Option<ConnectivityRef>,
    /// Seed of the design's own randomness.
    #[arg(long, default_value_t = 0)]
    design_seed: u64,
    #[arg(long, value_enum)]
    mean_law: Option<LawArg>,
    /// Also write the channel as an MMWCH1 dump.
    #[arg(long)]
    dump_channel: Option<PathBuf>,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML experiment config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated SNR points in dB.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr: Option<Vec<f64>>,
    /// Comma-separated stream counts.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    k_t: Option<usize>,
    /// Comma-separated subset of UOP, SHD-NM, SHD-QRQU, SHD-NM-PC, SHD-QRQU-PC.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    /// `subset`, `interleaved:<period>`, `full` or a CONNSPEC1 file.
    #[arg(long, value_parser = parse_connectivity)]
    connectivity: Option<ConnectivityRef>,
    #[arg(long, value_enum)]
    mean_law: Option<LawArg>,
    /// Record design wall-clock time (makes the CSV non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Record CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-(method, SNR, N_s) summary CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Record CSV from `sweep` or a summary CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    path: PathBuf,
    /// Also check that the mask can reach N_s streams of this channel dump.
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    ns: usize,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: ExperimentError| e.to_string())
}

fn parse_connectivity(s: &str) -> std::result::Result<ConnectivityRef, String> {
    s.parse().map_err(|e: ExperimentError| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    path.map_or_else(|| Ok(ExperimentConfig::default()), ExperimentConfig::load)
}

fn read_dump(path: &Path) -> Result<CMatrix> {
    let file = File::open(path).map_err(|e| ExperimentError::Config(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_channel_dump(BufReader::new(file))?.0)
}

fn write_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => f(&mut std::io::stdout().lock())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct DesignOutput<'a> {
    method: Method,
    snr_db: f64,
    n_s: usize,
    k_t: usize,
    channel_seed: Option<u64>,
    report: &'a DesignReport,
}

fn design(args: DesignArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(law) = args.mean_law {
        config.channel.mean_law = law.into();
    }
    let k_t = args.k_t.unwrap_or(config.k_t);
    let (h, channel_seed) = match &args.channel {
        Some(path) => (read_dump(path)?, None),
        None => {
            config.channel.seed = args.seed;
            (generate_seeded(&config.channel)?.h, Some(args.seed))
        }
    };
    if let Some(path) = &args.dump_channel {
        write_channel_dump(BufWriter::new(File::create(path)?), &h, channel_seed.unwrap_or(0))?;
    }
    let budget = LinkBudget::from_snr_db(args.snr, args.ns);
    let mask = if args.method.partially_connected() {
        let c = args.connectivity.as_ref().ok_or_else(|| {
            ExperimentError::Config(format!("{} needs --connectivity", args.method))
        })?;
        Some(c.resolve(h.ncols(), k_t)?)
    } else {
        None
    };
    let report = match args.method {
        Method::Uop => {
            let precoder = optimal_precoder(&h, args.ns)?;
            let mi = mutual_information(&h, &precoder, &budget)?;
            DesignReport {
                precoder,
                mutual_information: mi,
                mi_trace: vec![mi],
                surrogate_trace: Vec::new(),
                column_traces: Vec::new(),
                outer_iters: 0,
                random_draws: 0,
                converged: true,
                psd_repaired: false,
            }
        }
        Method::ShdNm | Method::ShdNmPc => {
            let nm = NmConfig { seed: args.design_seed, ..config.nm.clone() };
            design_shd_nm(&h, &budget, k_t, &nm, mask.as_ref())?
        }
        Method::ShdQrqu | Method::ShdQrquPc => {
            let qr = QrquConfig { seed: args.design_seed, ..config.qrqu.clone() };
            design_shd_qrqu(&h, &budget, k_t, &qr, mask.as_ref())?
        }
    };
    eprintln!(
        "{}: {:.6} bits/s/Hz at {} dB, N_s = {}, k_t = {k_t}",
        args.method, report.mutual_information, args.snr, args.ns
    );
    let out = DesignOutput { method: args.method, snr_db: args.snr, n_s: args.ns, k_t, channel_seed, report: &report };
    write_output(args.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &out).map_err(|e| ExperimentError::Io(e.into()))?;
        writeln!(w)?;
        Ok(())
    })
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(v) = args.seed {
        config.master_seed = v;
    }
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.snr {
        config.snr_db_list = v;
    }
    if let Some(v) = args.ns {
        config.n_s_list = v;
    }
    if let Some(v) = args.k_t {
        config.k_t = v;
    }
    if let Some(v) = args.methods {
        config.methods = v;
    }
    if let Some(v) = args.connectivity {
        config.connectivity = Some(v);
    }
    if let Some(law) = args.mean_law {
        config.channel.mean_law = law.into();
    }
    config.timing |= args.timing;
    let out = args.out.or_else(|| config.output_path.clone());
    let records = run_sweep(&config)?;
    write_output(out.as_deref(), |w| write_records_csv(w, &records))?;
    if let Some(path) = &args.summary {
        let rows = summarize(&records)?;
        write_output(Some(path), |w| write_summary_csv(w, &rows))?;
    }
    eprintln!("{} records from {} trials", records.len(), config.trials);
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    let mut text = String::new();
    File::open(&args.input)
        .map_err(|e| ExperimentError::Config(format!("cannot open {}: {e}", args.input.display())))?
        .read_to_string(&mut text)?;
    let header = text.lines().next().unwrap_or_default();
    let summary = if header == CSV_HEADER.join(",") {
        summarize(&read_records_csv(text.as_bytes())?)?
    } else if header == SUMMARY_HEADER.join(",") {
        read_summary_csv(text.as_bytes())?
    } else {
        return Err(ExperimentError::Config(format!("{} is neither a record nor a summary CSV", args.input.display())));
    };
    emit_plot(&summary, &args.out)
}

fn validate_spec(args: ValidateArgs) -> Result<()> {
    let file = File::open(&args.path)
        .map_err(|e| ExperimentError::Config(format!("cannot open {}: {e}", args.path.display())))?;
    let spec = ConnectivitySpec::read_from(BufReader::new(file))?;
    if let Err(violations) = spec.validate() {
        for v in &violations {
            println!("violation: {v}");
        }
        return Err(ExperimentError::Infeasible(format!("{} violations", violations.len())));
    }
    if let Some(path) = &args.channel {
        let h = read_dump(path)?;
        spec.check_feasible(&truncated_channel(&h, args.ns)?, args.ns, switchbf::linalg::DEFAULT_RANK_TOL)?;
    }
    println!(
        "ok: N_t = {}, k_t = {}, s_t = {}, c_t = {}, connections = {}",
        spec.n_t(),
        spec.k_t(),
        spec.s_t,
        spec.c_t,
        spec.connections()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Design(a) => design(a),
        Command::Sweep(a) => sweep(a),
        Command::Plot(a) => plot(a),
        Command::ValidateSpec(a) => validate_spec(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
