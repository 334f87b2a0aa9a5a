use clap::{Args, Parser, Subcommand};
use gkvcs::model::SectorId;
use gkvcs::verify::VerificationReport;
use gkvcs_cli::campaign::{self, Job, Selection};
use gkvcs_cli::config::{self, CampaignConfig, Format, SpectrumVariant};
use gkvcs_cli::report::{self, Meta, Tally};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gkvcs", version, about = "Spectra and Gazeau-Klauder coherent-state checks on truncated Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Campaign configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Also fail on report-only failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every block of a configuration.
    Run(Common),
    /// Compare numeric and closed-form spectra.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Sector as a bit string, e.g. 101.
        #[arg(long)]
        sector: Option<String>,
    },
    /// Run the coherent-state checks of the configured families.
    VcsVerify {
        #[command(flatten)]
        common: Common,
        /// Only families whose report name matches, e.g. two-sector-n-degenerate.
        #[arg(long)]
        family: Option<String>,
    },
    /// Quadrature moments of the radial measures.
    Moments {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        q: usize,
        /// Highest degenerate-measure order.
        #[arg(long, default_value_t = 10)]
        orders: usize,
        /// Mode count entering d(n).
        #[arg(long, default_value_t = 2)]
        modes: usize,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
    /// Merge NDJSON result files into one deterministically ordered file.
    ReportMerge {
        files: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Diag,
    CmDiag,
    Extradiag,
    General,
}

impl From<VariantArg> for SpectrumVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Diag => SpectrumVariant::Diag,
            VariantArg::CmDiag => SpectrumVariant::CmDiag,
            VariantArg::Extradiag => SpectrumVariant::Extradiag,
            VariantArg::General => SpectrumVariant::General,
        }
    }
}

enum Failure {
    Usage(String),
    Io(String),
}

fn load(path: &Path) -> Result<CampaignConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let cfg = config::parse(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    let errors = config::validate(&cfg);
    if !errors.is_empty() {
        return Err(Failure::Usage(config::ConfigError(errors).to_string()));
    }
    Ok(cfg)
}

fn finish(cfg: &CampaignConfig, common: &Common, reports: &[VerificationReport]) -> Result<i32, Failure> {
    let meta = Meta::of(cfg);
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let format = common.format.or(cfg.output.format).unwrap_or_default();
    let written = report::write_outputs(&dir, &meta, reports, format).map_err(|e| Failure::Io(e.to_string()))?;
    for p in written {
        log::info!("wrote {}", p.display());
    }
    let t = Tally::of(reports);
    println!(
        "{}: {} records, {} passed, {} failed, {} failed (report-only)",
        if cfg.name.is_empty() { "campaign" } else { &cfg.name },
        t.total,
        t.passed,
        t.failed,
        t.failed_report_only
    );
    for r in reports.iter().filter(|r| !r.passed) {
        println!(
            "  {} {} {}: metric {:.3e} > {:.1e}",
            if r.report_only { "report-only" } else { "FAIL" },
            r.property,
            r.variant,
            r.metric,
            r.tolerance
        );
    }
    Ok(t.exit_code(common.strict))
}

fn execute(cfg: &CampaignConfig, jobs: &[Job], workers: usize) -> Result<Vec<VerificationReport>, Failure> {
    log::info!("{} jobs on {} workers", jobs.len(), workers);
    campaign::execute(cfg, jobs, workers).map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Run(common) => {
            let cfg = load(&common.config)?;
            let jobs = campaign::plan(&cfg, Selection::ALL).map_err(|e| Failure::Usage(e.to_string()))?;
            let reports = execute(&cfg, &jobs, common.parallel)?;
            finish(&cfg, &common, &reports)
        }
        Command::Spectrum { common, variant, sector } => {
            let mut cfg = load(&common.config)?;
            let sector = sector
                .map(|s| {
                    let bits: Vec<u8> = s.bytes().map(|b| b.wrapping_sub(b'0')).collect();
                    SectorId::from_bits(&bits).map_err(|e| Failure::Usage(e.to_string()))
                })
                .transpose()?;
            let Some(sp) = cfg.spectrum.as_mut() else {
                return Err(Failure::Usage("configuration has no spectrum block".into()));
            };
            if let Some(v) = variant {
                sp.variants = vec![v.into()];
            }
            let sel = Selection { spectrum: true, families: false, moments: false };
            let jobs: Vec<Job> = campaign::plan(&cfg, sel)
                .map_err(|e| Failure::Usage(e.to_string()))?
                .into_iter()
                .filter(|j| match (j, sector) {
                    (Job::Spectrum { sector: Some(k), .. }, Some(want)) => *k == want,
                    (Job::Degeneracy { sector: k, .. }, Some(want)) => *k == want,
                    _ => true,
                })
                .collect();
            let reports = execute(&cfg, &jobs, common.parallel)?;
            for r in reports.iter().filter(|r| r.property == "spectrum") {
                println!("# {} sector={}", r.variant, r.parameters.get("sector").map_or("-", String::as_str));
                println!("{:<28} {:>20} {:>20}", "label", "analytic", "numeric");
                for s in &r.samples {
                    println!("{:<28} {:>20.12} {:>20.12}", s.label, s.target.unwrap_or(f64::NAN), s.value);
                }
            }
            finish(&cfg, &common, &reports)
        }
        Command::VcsVerify { common, family } => {
            let mut cfg = load(&common.config)?;
            if let Some(name) = family {
                cfg.families.retain(|f| f.spec().name() == name);
                if cfg.families.is_empty() {
                    return Err(Failure::Usage(format!("no configured family is named {name}")));
                }
            }
            let sel = Selection { spectrum: false, families: true, moments: false };
            let jobs = campaign::plan(&cfg, sel).map_err(|e| Failure::Usage(e.to_string()))?;
            let reports = execute(&cfg, &jobs, common.parallel)?;
            finish(&cfg, &common, &reports)
        }
        Command::Moments { config, q, orders, modes, tolerance, out, strict } => {
            let reports = match &config {
                Some(path) => {
                    let cfg = load(path)?;
                    let sel = Selection { spectrum: false, families: false, moments: true };
                    let jobs = campaign::plan(&cfg, sel).map_err(|e| Failure::Usage(e.to_string()))?;
                    execute(&cfg, &jobs, 1)?
                }
                None => campaign::moment_reports(q, orders, modes, tolerance, false).map_err(|e| Failure::Usage(e.to_string()))?,
            };
            for r in &reports {
                println!("{:<10} {:<20} {:<18} metric={:.3e} tol={:.1e}", r.property, r.variant, report::status(r), r.metric, r.tolerance);
            }
            if let Some(dir) = out {
                let meta = Meta { name: "moments".into(), config_hash: String::new(), version: env!("CARGO_PKG_VERSION").into() };
                report::write_outputs(&dir, &meta, &reports, Format::Both).map_err(|e| Failure::Io(e.to_string()))?;
            }
            Ok(Tally::of(&reports).exit_code(strict))
        }
        Command::ReportMerge { files, out } => {
            if files.is_empty() {
                return Err(Failure::Usage("no input files".into()));
            }
            let inputs = files
                .iter()
                .map(|f| report::read_ndjson(f).map_err(|e| Failure::Usage(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let merged = report::merge(inputs);
            let mut f = std::fs::File::create(&out).map_err(|e| Failure::Io(e.to_string()))?;
            report::write_ndjson(&mut f, &merged).map_err(|e| Failure::Io(e.to_string()))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GKVCS_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(1)
        }
    }
}
