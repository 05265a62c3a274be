use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use proxsampler::config::parse_config;
use proxsampler::error::{Error, Result};
use proxsampler::experiment::run_experiment;
use proxsampler::gaussian::{gaussian_step, kl_gauss, w2_gauss, GaussianState};
use proxsampler::potential::builtin;
use proxsampler::proxopt::prox_point_run;
use proxsampler::rates::{write_curve_csv, RateBound, Theorem, LOI_CONSTANT_STATED};
use proxsampler::report::write_report;

/// Proximal sampler experiments: run configured experiments, print rate
/// bounds, and evaluate the closed-form Gaussian and proximal point paths.
#[derive(Parser)]
#[command(name = "proxsampler", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file and write its report CSV.
    Run {
        config: PathBuf,
        /// Report path; overrides the file's `output` key.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Directory for reports whose path is not given explicitly.
        #[arg(long, env = "PROXSAMPLER_OUT_DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Print a bound curve `k,bound` for one theorem.
    ///
    /// Parameters are `name=value` pairs: `d0` (initial divergence: W2 for
    /// SLC and LC, KL, chi-squared or Renyi otherwise), `alpha`, `eta`, `q`,
    /// `r`, `loi_constant`, and `h0` (LC's optional initial KL).
    Rates {
        theorem: String,
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        k_min: u64,
        #[arg(long, default_value_t = 20)]
        k_max: u64,
    },
    /// Closed-form 1-D Gaussian iteration from N(m0, sigma0) towards N(0, sigma).
    GaussianExact {
        /// Initial variance.
        #[arg(long)]
        sigma0: f64,
        #[arg(long)]
        m0: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        k: usize,
        /// Target variance.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    /// Proximal point iterates for a built-in potential.
    ProxPoint {
        #[arg(long)]
        potential: String,
        /// Potential parameters, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
        #[arg(long)]
        eta: f64,
        /// Starting point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x0: Vec<f64>,
        #[arg(long)]
        k: usize,
    },
}

fn stdout_err(source: io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn run_config(config: PathBuf, output: Option<PathBuf>, out_dir: Option<PathBuf>) -> Result<()> {
    let text = std::fs::read_to_string(&config).map_err(|source| Error::Io {
        path: config.clone(),
        source,
    })?;
    let cfg = parse_config(&text).map_err(|e| e.context(config.display().to_string()))?;
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    let path = output.unwrap_or_else(|| cfg.output_path(out_dir.as_deref(), &stem));
    let rows = run_experiment(&cfg)?;
    write_report(&rows, &path)?;
    let violated = rows.iter().filter(|r| r.satisfied() == Some(false)).count();
    let checked = rows.iter().filter(|r| r.satisfied().is_some()).count();
    println!(
        "wrote {} rows to {} ({checked} bound checks, {violated} violated)",
        rows.len(),
        path.display()
    );
    Ok(())
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("parameter '{item}' is not name=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("parameter '{k}' has non-numeric value '{v}'")))?;
        out.insert(k.trim().to_ascii_lowercase(), v);
    }
    Ok(out)
}

fn rate_bound(theorem: Theorem, p: &BTreeMap<String, f64>) -> Result<RateBound> {
    let allowed: &[&str] = match theorem {
        Theorem::Lc => &["d0", "h0", "eta"],
        Theorem::LsiRenyi | Theorem::PiRenyi => &["d0", "alpha", "eta", "q"],
        Theorem::Loi => &["d0", "alpha", "eta", "q", "r", "loi_constant"],
        _ => &["d0", "alpha", "eta"],
    };
    if let Some(extra) = p.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Config(format!(
            "{theorem} does not take '{extra}' (parameters: {})",
            allowed.join(", ")
        )));
    }
    let get = |name: &str| {
        p.get(name)
            .copied()
            .ok_or_else(|| Error::Config(format!("{theorem} needs parameter '{name}'")))
    };
    Ok(match theorem {
        Theorem::Slc => RateBound::Slc {
            w2_0: get("d0")?,
            alpha: get("alpha")?,
            eta: get("eta")?,
        },
        Theorem::Lc => RateBound::Lc {
            w2_0: get("d0")?,
            h_0: p.get("h0").copied(),
            eta: get("eta")?,
        },
        Theorem::LsiKl => RateBound::LsiKl {
            h_0: get("d0")?,
            alpha: get("alpha")?,
            eta: get("eta")?,
        },
        Theorem::LsiRenyi => RateBound::LsiRenyi {
            r_0: get("d0")?,
            alpha: get("alpha")?,
            eta: get("eta")?,
            q: get("q")?,
        },
        Theorem::PiChi2 => RateBound::PiChi2 {
            chi2_0: get("d0")?,
            alpha: get("alpha")?,
            eta: get("eta")?,
        },
        Theorem::PiRenyi => RateBound::PiRenyi {
            r_0: get("d0")?,
            alpha: get("alpha")?,
            eta: get("eta")?,
            q: get("q")?,
        },
        Theorem::Loi => RateBound::Loi {
            r_0: get("d0")?,
            alpha: get("alpha")?,
            eta: get("eta")?,
            q: get("q")?,
            r: get("r")?,
            loi_constant: p.get("loi_constant").copied().unwrap_or(LOI_CONSTANT_STATED),
        },
        Theorem::EpsGeneralized => RateBound::EpsGeneralized {
            h_0: get("d0")?,
            alpha: get("alpha")?,
            eta: get("eta")?,
        },
    })
}

fn rates(theorem: &str, params: &[String], k_min: u64, k_max: u64) -> Result<()> {
    if k_min > k_max {
        return Err(Error::Config(format!("k-min {k_min} exceeds k-max {k_max}")));
    }
    let theorem: Theorem = theorem.parse()?;
    let bound = rate_bound(theorem, &parse_params(params)?)?;
    let curve = bound.curve(k_min, k_max)?;
    let mut out = io::stdout().lock();
    write_curve_csv(&mut out, &curve).map_err(stdout_err)
}

fn gaussian_exact(sigma0: f64, m0: f64, eta: f64, k: usize, sigma: f64) -> Result<()> {
    let target = GaussianState::scalar(0.0, sigma)?;
    let mut s = GaussianState::scalar(m0, sigma0)?;
    let mut out = io::stdout().lock();
    let mut line = |k: usize, s: &GaussianState| -> Result<()> {
        writeln!(
            out,
            "{k},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.mean[0],
            s.cov[(0, 0)],
            kl_gauss(s, &target)?,
            w2_gauss(s, &target)?
        )
        .map_err(stdout_err)
    };
    println!("k,mean,variance,kl,w2");
    line(0, &s)?;
    for i in 1..=k {
        s = gaussian_step(&s, &target.cov, eta)?;
        line(i, &s)?;
    }
    Ok(())
}

fn prox_point(potential: &str, params: &[f64], eta: f64, x0: &[f64], k: usize) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::Validation(format!("eta must be positive, got {eta}")));
    }
    let f = builtin(potential, params)?;
    let tr = prox_point_run(&f, eta, x0, k)?;
    io::stdout().lock().write_all(tr.to_csv().as_bytes()).map_err(stdout_err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            output,
            out_dir,
        } => run_config(config, output, out_dir),
        Command::Rates {
            theorem,
            params,
            k_min,
            k_max,
        } => rates(&theorem, &params, k_min, k_max),
        Command::GaussianExact {
            sigma0,
            m0,
            eta,
            k,
            sigma,
        } => gaussian_exact(sigma0, m0, eta, k, sigma),
        Command::ProxPoint {
            potential,
            params,
            eta,
            x0,
            k,
        } => prox_point(&potential, &params, eta, &x0, k),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
