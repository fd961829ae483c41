use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use toric_ech::capacity::CapacityConfig;
use toric_ech::distance::KPolicy;
use toric_ech::domain::{Domain, DomainSpec};
use toric_ech::experiments::{self as ex, Format, RunReport};
use toric_ech::quasiflat::{self, Padding, ParameterVector, SnapMode};
use toric_ech::weights::{realize_with, weight_expansion_with, WeightConfig};
use toric_ech::Scalar;

#[derive(Parser)]
#[command(name = "toric-ech", version, about = "ECH capacities, quasi-flats and distance bounds for toric domains")]
struct Cli {
    #[command(flatten)]
    opts: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Largest capacity index to evaluate.
    #[arg(long, global = true)]
    kmax: Option<u64>,
    /// Snapping of chart coordinates.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Working precision in bits for logarithms and exponentials.
    #[arg(long, global = true, default_value_t = 200)]
    precision: usize,
    /// Lower bound on every B_k for admissibility.
    #[arg(long, global = true, default_value = "64", value_parser = ["8", "64"])]
    threshold: String,
    /// Largest 2k handed to the dynamic-programming oracle.
    #[arg(long, global = true, default_value_t = 400_000)]
    oracle_limit: u64,
    /// Directory receiving <command>.json and <command>.csv (must exist).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Parameter vector, e.g. 64,4096.
    #[arg(long, global = true, value_delimiter = ',')]
    params: Option<Vec<String>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Approx,
}

#[derive(Subcommand)]
enum Cmd {
    /// c_k of a domain file for one k or for every k up to --kmax.
    Capacity {
        domain: PathBuf,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Weight expansion of a domain file.
    Weights {
        domain: PathBuf,
        /// Also print the recursion trace.
        #[arg(long)]
        trace: bool,
    },
    /// A moment profile with the weights of a domain file.
    Realize { domain: PathBuf },
    /// Weights and admissibility of the quasi-flat domain for --params.
    BuildFlat {
        #[arg(long)]
        padding_count: Option<u64>,
        #[arg(long)]
        padding_bound: Option<String>,
    },
    /// Push points through the chart and fit quasi-isometry constants.
    Chart {
        /// CSV with a header row, one point per row.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Use this many seeded random points instead of the default grid.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Lower and upper bounds on the distance of two domain files.
    Distance {
        u: PathBuf,
        v: PathBuf,
        #[arg(long, default_value_t = 64)]
        per_decade: u32,
    },
    /// Bounds for every pair of charted points on the canonical grid.
    Certificate {
        /// Comma-separated source points in one dimension.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<String>>,
        #[arg(long, default_value_t = 64)]
        per_decade: u32,
    },
    /// Capacity growth sweep c_k / sqrt(k B_M).
    LemmaCap {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        kmin: Option<u64>,
        #[arg(long, default_value_t = 64)]
        per_decade: u32,
        #[arg(long, default_value_t = 0.25)]
        lo: f64,
        #[arg(long, default_value_t = 4.0)]
        hi: f64,
        #[arg(long, default_value_t = 0.05)]
        max_gap: f64,
    },
    /// Warm-up inequality c_k0(X) <= c_k0(B(1)) + 1.
    Ched {
        #[arg(long, default_value = "1/1024")]
        eps: String,
        #[arg(long, default_value = "1000")]
        volume: String,
        #[arg(long, default_value_t = 1.0)]
        weyl_constant: f64,
    },
    /// Inclusion distance against capacity ratios for B(1) and X_2(eps).
    Notsame {
        #[arg(long, default_value = "1/4")]
        eps: String,
        #[arg(long, default_value_t = 0.01)]
        slack: f64,
    },
    /// Weyl ratio c_k^2 / (4 k area) of a domain file (default B(1)).
    Weyl {
        domain: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
}

fn load(path: &Path, wcfg: &WeightConfig) -> Result<Domain> {
    let spec = DomainSpec::read(path)?;
    Ok(Domain::from_spec(&spec, wcfg).with_context(|| format!("building {}", path.display()))?)
}

fn params(g: &Global) -> Result<ParameterVector> {
    let Some(raw) = &g.params else { bail!("--params is required") };
    let values = raw.iter().map(|s| s.parse::<Scalar>()).collect::<toric_ech::Result<Vec<_>>>()?;
    Ok(ParameterVector::new(values)?)
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn finish(report: RunReport, out: Option<&Path>) -> Result<ExitCode> {
    match out {
        Some(dir) => {
            for p in ex::emit_report(&report, dir, &[Format::Json, Format::Csv])? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => print_json(&report)?,
    }
    for v in &report.verdicts {
        eprintln!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn read_points(path: &Path) -> Result<Vec<Vec<BigRational>>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pts = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        let p = rec.iter().map(ex::parse_signed).collect::<toric_ech::Result<Vec<_>>>();
        pts.push(p.with_context(|| format!("{}: row {}", path.display(), i + 1))?);
    }
    Ok(pts)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let g = &cli.opts;
    let ccfg = CapacityConfig { oracle_limit: g.oracle_limit, ..Default::default() };
    let wcfg = WeightConfig::default();
    let threshold: Scalar = g.threshold.parse()?;
    let mode = match g.mode {
        Mode::Exact => SnapMode::Exact,
        Mode::Approx => SnapMode::Approx,
    };
    let out = g.out.as_deref();
    if let Some(dir) = out {
        if !dir.is_dir() {
            bail!("{}: output directory does not exist", dir.display());
        }
    }
    match cli.cmd {
        Cmd::Capacity { domain, k } => {
            let d = load(&domain, &wcfg)?;
            let ks: Vec<u64> = match (k, g.kmax) {
                (Some(k), _) => vec![k],
                (None, Some(m)) => (0..=m).collect(),
                (None, None) => bail!("give --k or --kmax"),
            };
            return finish(ex::run_capacity(&d, &ks, &ccfg)?, out);
        }
        Cmd::Weights { domain, trace } => {
            let spec = DomainSpec::read(&domain)?;
            if let (DomainSpec::Profile { vertices }, true) = (&spec, trace) {
                let (w, t) = weight_expansion_with(vertices, &wcfg)?;
                print_json(&serde_json::json!({"weights": w, "trace": t}))?;
            } else {
                print_json(&Domain::from_spec(&spec, &wcfg)?.weights())?;
            }
        }
        Cmd::Realize { domain } => {
            let d = load(&domain, &wcfg)?;
            print_json(&realize_with(&d.weights(), &wcfg)?)?;
        }
        Cmd::BuildFlat { padding_count, padding_bound } => {
            let v = params(g)?;
            let padding = match (padding_count, padding_bound) {
                (Some(count), Some(b)) => Some(Padding { count, bound: b.parse()? }),
                (None, None) => None,
                _ => bail!("--padding-count and --padding-bound go together"),
            };
            let adm = v.validate(&threshold);
            let w = quasiflat::build_weights(&v, padding.as_ref())?;
            print_json(&serde_json::json!({"params": v, "admissibility": adm, "area": w.area(), "weights": w}))?;
        }
        Cmd::Chart { points, random, dim } => {
            let pts = match (points, random) {
                (Some(p), _) => read_points(&p)?,
                (None, Some(n)) => ex::random_points(dim, n, g.seed),
                (None, None) => ex::chart_grid(),
            };
            let cfg = ex::ChartConfig { points: pts, mode, precision: g.precision, ..Default::default() };
            return finish(ex::run_chart(&cfg)?, out);
        }
        Cmd::Distance { u, v, per_decade } => {
            let (du, dv) = (load(&u, &wcfg)?, load(&v, &wcfg)?);
            let pv = |p: &Path| match DomainSpec::read(p) {
                Ok(DomainSpec::Quasiflat { params, .. }) => Some(params),
                _ => None,
            };
            let (pu, pw) = (pv(&u), pv(&v));
            let both = pu.as_ref().zip(pw.as_ref());
            let rep = ex::run_distance(&du, &dv, both, g.kmax.unwrap_or(10_000), per_decade, &ccfg, &wcfg)?;
            return finish(rep, out);
        }
        Cmd::Certificate { grid, per_decade } => {
            let mut cfg = ex::CertificateConfig { precision: g.precision, capacity: ccfg, ..Default::default() };
            if let Some(grid) = grid {
                cfg.points = grid.iter().map(|s| Ok(vec![ex::parse_signed(s)?])).collect::<Result<_>>()?;
            }
            cfg.policy = KPolicy { cap: g.kmax.unwrap_or(KPolicy::default().cap), per_decade };
            return finish(ex::run_certificate(&cfg)?, out);
        }
        Cmd::LemmaCap { m, kmin, per_decade, lo, hi, max_gap } => {
            let mut cfg = ex::LemmaCapConfig::canonical();
            if g.params.is_some() {
                cfg.params = params(g)?;
                if cfg.params != ex::LemmaCapConfig::canonical().params {
                    cfg.anchor = None;
                }
            }
            cfg.m = m;
            cfg.kmin = kmin;
            cfg.kmax = g.kmax;
            cfg.per_decade = per_decade;
            cfg.window = (lo, hi);
            cfg.max_gap = max_gap;
            cfg.threshold = threshold;
            cfg.capacity = ccfg;
            return finish(ex::run_lemma_cap_sweep(&cfg)?, out);
        }
        Cmd::Ched { eps, volume, weyl_constant } => {
            let cfg = ex::ChedConfig {
                eps: eps.parse()?,
                volume: volume.parse()?,
                k0_max: g.kmax.unwrap_or(100),
                weyl_constant,
                capacity: ccfg,
                weights: wcfg,
            };
            return finish(ex::run_ched_warmup(&cfg)?, out);
        }
        Cmd::Notsame { eps, slack } => {
            let mut cfg = ex::NotsameConfig::new(eps.parse()?);
            cfg.kmax = g.kmax.unwrap_or(2000);
            cfg.slack = slack;
            cfg.capacity = ccfg;
            return finish(ex::run_notsame(&cfg)?, out);
        }
        Cmd::Weyl { domain, tolerance } => {
            let (d, label) = match domain {
                Some(p) => (load(&p, &wcfg)?, p.display().to_string()),
                None => (Domain::Ball(Scalar::one()), "B(1)".to_string()),
            };
            let kmax = g.kmax.unwrap_or(10_000);
            let ks = toric_ech::distance::k_schedule(kmax, 16);
            let cfg = ex::WeylConfig { domain: d, label, ks, tolerance, capacity: ccfg };
            return finish(ex::run_weyl(&cfg)?, out);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    };
    eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    code
}
