use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ttring", version, about = "Two-ring chiral ring, pairing, coupling operator and Toda solver")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,

    /// Flat `key = value` file; keys mirror long flags, explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Basis elements in monomial coordinates.
    Ring {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Basis::Monomial)]
        basis: Basis,
    },
    /// Residue pairing matrix.
    Eta {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Basis::Monomial)]
        basis: Basis,
    },
    /// Matrix of multiplication by the coupling element.
    Cmatrix {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = CBasis::Monomial)]
        basis: CBasis,
        /// Multiply the matrix by the coupling prefactor `-2nt/(2n+1)`.
        #[arg(long)]
        with_prefactor: bool,
    },
    /// Chebyshev coefficients of the second kind, ascending powers of t.
    Chebyshev {
        #[arg(long)]
        k: usize,
        /// Tilde family: `U~_{k+1} = -2t U~_k + U~_{k-1}`, `U~_1 = -2t`.
        #[arg(long)]
        tilde: bool,
    },
    /// Solve the radial block Toda system.
    Solve(SolveArgs),
    /// Run identity suites.
    Verify {
        #[arg(value_name = "SUITE", default_value = "all")]
        suite: String,
        #[command(flatten)]
        model: ModelArgs,
        /// Largest degree for the division-lemma suite.
        #[arg(long, default_value_t = 12)]
        dmax: usize,
        #[arg(long, default_value_t = ttring::verify::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Deformation; decimal or `p/q`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub c: String,
    /// Coupling, e.g. `1`, `2+1i`, `-0.5i`.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub t: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Monomial,
    Shifted,
    Delta,
    Interleaved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CBasis {
    Monomial,
    Interleaved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Twist {
    Identity,
    Coupling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Diagonal,
    NonDiagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Newton,
    GaussSeidel,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `r_min:r_max:points`.
    #[arg(long, default_value = "1:2:129")]
    pub grid: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Boundary (and optional initial) data as JSON.
    #[arg(long, value_name = "FILE", conflicts_with = "manufactured")]
    pub bc: Option<PathBuf>,
    /// Use a closed-form family for boundary data and source instead of `--bc`.
    #[arg(long, value_enum)]
    pub manufactured: Option<Family>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = SolveMethod::Newton)]
    pub method: SolveMethod,
    #[arg(long, value_enum, default_value_t = Twist::Identity)]
    pub twist: Twist,
    /// Fold the coupling prefactor into the twist.
    #[arg(long)]
    pub with_prefactor: bool,
    /// Overwrite mirrored boundary blocks so the data satisfies the reality constraint.
    #[arg(long)]
    pub impose_reality: bool,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    pub damping: f64,
    #[arg(long)]
    pub renormalize_det: bool,
    /// Write `PREFIX.csv`, `PREFIX.json` and `PREFIX.report.json`.
    #[arg(long, value_name = "PREFIX")]
    pub output: Option<PathBuf>,
}

const SUBCOMMANDS: [&str; 6] = ["ring", "eta", "cmatrix", "chebyshev", "solve", "verify"];

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Turns `key = value` lines into flags. `#` starts a comment; booleans
/// become bare flags when true and are dropped when false.
pub fn config_tokens(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", lineno + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key", lineno + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => out.push(format!("--{key}={v}")),
        }
    }
    Ok(out)
}

/// Splices config-file flags in right after the subcommand so that flags
/// given on the command line, which come later, override them.
pub fn merged_argv(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config `{path}`: {e}"))?;
    let tokens = config_tokens(&text)?;
    let Some(pos) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let mut out = argv[..=pos].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}
