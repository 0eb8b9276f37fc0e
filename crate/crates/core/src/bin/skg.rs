use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use skg::config::{Scenario, SessionConfig};
use skg::harness::{
    direct_bound, emit_results, estimate_fano_inputs, relay_bound, run_campaign, CampaignConfig,
    ChannelMode, SweepAxis,
};
use skg::security::{fano_bound, nist_core_tests, semantic_bound, BoundReport, NistParams};
use skg::{BitSeq, SkgError};

#[derive(Parser)]
#[command(
    name = "skg",
    version,
    about = "Secret key generation with induced randomness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and write its result files.
    Run(RunArgs),
    /// Evaluate the attack-probability bound of a scenario.
    Bounds(BoundsArgs),
    /// Run the randomness tests on a key stream file.
    Nist(NistArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Direct,
    Relay,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Direct => Scenario::Direct,
            ScenarioArg::Relay => Scenario::Relay,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimationArg {
    Perfect,
    ProbeBased,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelModeArg {
    Static,
    PerSession,
}

/// Session parameters; each overrides the configuration file.
#[derive(Args)]
struct SessionArgs {
    #[arg(long)]
    scenario: Option<ScenarioArg>,
    #[arg(long)]
    n_subcarriers: Option<usize>,
    #[arg(long)]
    qam_order: Option<usize>,
    #[arg(long)]
    delta: Option<u32>,
    #[arg(long)]
    eve_distance: Option<f64>,
    #[arg(long)]
    relay_snr_db: Option<f64>,
    #[arg(long)]
    probe_snr_db: Option<f64>,
    #[arg(long)]
    estimation: Option<EstimationArg>,
    #[arg(long)]
    eve_noiseless: bool,
    #[arg(long)]
    sigma_h2: Option<f64>,
    #[arg(long)]
    sigma_g2: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key/value campaign file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    session: SessionArgs,
    /// SNR values in dB; several values sweep SNR.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_db: Option<Vec<f64>>,
    /// Reciprocity correlation; several values sweep ζ.
    #[arg(long, value_delimiter = ',')]
    zeta: Option<Vec<f64>>,
    /// Eve correlation; several values sweep ρ.
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    channel_mode: Option<ChannelModeArg>,
    #[arg(long)]
    max_sessions_per_key: Option<usize>,
    /// Channel coefficient trace for the direct scenario.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip bound evaluation.
    #[arg(long)]
    no_bounds: bool,
    /// Samples for the relay bound's Monte Carlo estimates.
    #[arg(long)]
    bound_samples: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Eve correlation; defaults to the spatial correlation at the Eve distance.
    #[arg(long)]
    rho: Option<f64>,
    /// Eve's information per subcarrier in bits, replacing the computed value.
    #[arg(long)]
    mi: Option<f64>,
    /// Quantizer entropy per subcarrier for the relay bound, with `--mi`.
    #[arg(long)]
    h_q: Option<f64>,
    /// Samples for the relay Monte Carlo estimates.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
}

#[derive(Args)]
struct NistArgs {
    /// Binary file, bits taken most significant first.
    #[arg(long)]
    keystream: PathBuf,
}

fn apply_session(table: &mut toml::Table, args: &SessionArgs) {
    let mut set = |key: &str, value: toml::Value| {
        table.insert(key.to_string(), value);
    };
    if let Some(s) = args.scenario {
        set("scenario", Scenario::from(s).to_string().into());
    }
    if let Some(v) = args.n_subcarriers {
        set("n_subcarriers", (v as i64).into());
    }
    if let Some(v) = args.qam_order {
        set("qam_order", (v as i64).into());
    }
    if let Some(v) = args.delta {
        set("delta", i64::from(v).into());
    }
    for (key, v) in [
        ("eve_distance", args.eve_distance),
        ("relay_snr_db", args.relay_snr_db),
        ("probe_snr_db", args.probe_snr_db),
        ("sigma_h2", args.sigma_h2),
        ("sigma_g2", args.sigma_g2),
    ] {
        if let Some(v) = v {
            set(key, v.into());
        }
    }
    if let Some(e) = args.estimation {
        let name = match e {
            EstimationArg::Perfect => "perfect",
            EstimationArg::ProbeBased => "probe-based",
        };
        set("estimation", name.into());
    }
    if args.eve_noiseless {
        set("eve_noiseless", true.into());
    }
    if let Some(v) = args.seed {
        set("seed", (v as i64).into());
    }
}

fn session_config(args: &SessionArgs) -> Result<SessionConfig, SkgError> {
    let mut table = toml::Table::new();
    apply_session(&mut table, args);
    Ok(CampaignConfig::from_toml(&table.to_string())?.template)
}

fn run(args: RunArgs) -> Result<(), SkgError> {
    let mut table: toml::Table = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| SkgError::Io {
                path: path.clone(),
                source: e,
            })?;
            text.parse().map_err(|e: toml::de::Error| {
                SkgError::InvalidConfig(format!("{}: {e}", path.display()))
            })?
        }
        None => toml::Table::new(),
    };
    apply_session(&mut table, &args.session);
    let mut cfg = CampaignConfig::from_toml(&table.to_string())?;
    if let Some(v) = &args.snr_db {
        cfg.override_axis(SweepAxis::SnrDb, v);
    }
    if let Some(v) = &args.zeta {
        cfg.override_axis(SweepAxis::Zeta, v);
    }
    if let Some(v) = &args.rho {
        cfg.override_axis(SweepAxis::Rho, v);
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(m) = args.channel_mode {
        cfg.channel_mode = match m {
            ChannelModeArg::Static => ChannelMode::Static,
            ChannelModeArg::PerSession => ChannelMode::PerSession,
        };
    }
    if let Some(m) = args.max_sessions_per_key {
        cfg.max_sessions_per_key = m;
    }
    if args.trace.is_some() {
        cfg.trace = args.trace;
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if args.no_bounds {
        cfg.bounds = false;
    }
    if let Some(n) = args.bound_samples {
        cfg.estimator.n_samples = n;
    }

    let results = run_campaign(&cfg)?;
    let files = emit_results(&results, &cfg.out)?;
    println!(
        "{:>10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}",
        cfg.sweep_axis.name(),
        "bmr_bob",
        "bmr_eve",
        "ber_bob",
        "ber_eve",
        "accept",
        "sessions"
    );
    for row in results.rows() {
        println!(
            "{:>10} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>10.3}",
            row.sweep_value,
            row.bmr_bob,
            row.bmr_eve,
            row.ber_bob,
            row.ber_eve,
            row.accept_rate,
            row.avg_sessions
        );
    }
    println!("wrote {}", files.metrics.display());
    println!("wrote {}", files.eve_ber_cdf.display());
    println!("wrote {}", files.bounds.display());
    println!("wrote {}", files.keystream.display());
    Ok(())
}

fn print_report(r: &BoundReport) {
    println!("scenario       {}", r.scenario);
    println!("N, delta       {}, {}", r.n_subcarriers, r.delta);
    println!("I              {:.6} bits", r.mi);
    if let Some(h) = r.h_q {
        println!("H(q)           {h:.6} bits");
    }
    println!("guessing term  2^{:.2}", r.log2_guessing());
    println!("hash term      2^{:.2}", r.log2_hash());
    println!(
        "bound          2^{:.2}{}",
        r.log2_bound(),
        if r.vacuous { " (vacuous)" } else { "" }
    );
}

fn bounds(args: BoundsArgs) -> Result<(), SkgError> {
    let mut cfg = session_config(&args.session)?;
    if let Some(s) = args.snr_db {
        cfg.snr_db = s;
    }
    if args.rho.is_some() {
        cfg.rho = args.rho;
    }
    let n = cfg.n_subcarriers as u32;
    let report = match (cfg.scenario, args.mi, args.h_q) {
        (Scenario::Direct, Some(mi), _) => semantic_bound(Scenario::Direct, n, cfg.delta, mi)?,
        (Scenario::Direct, None, _) => direct_bound(&cfg)?,
        (Scenario::Relay, Some(mi), Some(h)) => {
            fano_bound(Scenario::Relay, n, cfg.delta, h, mi, 1 << (2 * cfg.delta))?
        }
        (Scenario::Relay, None, None) => {
            let est = skg::security::EstimatorConfig {
                n_samples: args.samples,
                seed: cfg.seed,
                ..Default::default()
            };
            let inputs = estimate_fano_inputs(&cfg, &est)?;
            println!("samples        {}", inputs.mi.n_samples);
            relay_bound(&cfg, &inputs)?
        }
        (Scenario::Relay, _, _) => {
            return Err(SkgError::InvalidConfig(
                "the relay bound takes both --mi and --h-q, or neither".into(),
            ))
        }
    };
    print_report(&report);
    Ok(())
}

fn nist(args: NistArgs) -> Result<bool, SkgError> {
    let bytes = std::fs::read(&args.keystream).map_err(|e| SkgError::Io {
        path: args.keystream.clone(),
        source: e,
    })?;
    let bits = BitSeq::from_bytes(&bytes);
    println!("{} bits", bits.len());
    let results = nist_core_tests(&bits, &NistParams::default());
    let mut all = true;
    for r in &results {
        let status = match (&r.skipped, r.passed()) {
            (Some(reason), _) => format!("skipped ({reason})"),
            (None, true) => "pass".to_string(),
            (None, false) => "FAIL".to_string(),
        };
        let p: Vec<String> = r.p_values.iter().map(|p| format!("{p:.6}")).collect();
        println!("{:<24} {:<20} {}", r.name, p.join(" "), status);
        all &= r.passed();
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::Bounds(a) => bounds(a).map(|_| true),
        Command::Nist(a) => nist(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
