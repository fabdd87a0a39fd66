use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Deserialize;
use serde_json::{json, Value};
use ttring::toda::curvature::{impose_reality, reality_along, reflection_block};
use ttring::toda::{self, BoundaryCondition, FamilyKind, ManufacturedFamily, MetricBlock, Method, RadialGrid, SolverConfig, TodaOperator, TodaState};
use ttring::verify::{self, Suite, VerifyOptions};
use ttring::{chebyshev, crt, pairing, BasisTag, ChiralRing, ModelParams, Rational, RootBranch};

use crate::args::{Basis, CBasis, Family, Format, ModelArgs, SolveArgs, SolveMethod, Twist};
use crate::output::{self, block_from_json, complex_json, envelope, matrix_csv, matrix_json, matrix_pretty, Cx, CxIn};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, parameters or input files: exit code 2.
    Usage(String),
    /// A computation or verification failed: exit code 1, with an optional
    /// machine-readable report.
    Failure(String, Option<Value>),
}

impl From<ttring::Error> for CliError {
    fn from(e: ttring::Error) -> Self {
        use ttring::Error as E;
        match e {
            E::InvalidParams(_) | E::ComplexDeformation(_) | E::InvalidConfig(_) | E::UnsupportedBasis(_) | E::DimensionMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failure(other.to_string(), None),
        }
    }
}

pub type CliResult = Result<String, CliError>;

/// Accepts `2`, `-1.5`, `i`, `-0.5i`, `2+1i`, `1e-3-2i`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(x) = s.parse::<f64>() {
        return Some(Complex64::new(x, 0.0));
    }
    let body = s.strip_suffix('i').or_else(|| s.strip_suffix('j'))?;
    let imag = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        t => t.parse::<f64>().ok(),
    };
    // Split at the last sign that is not a leading sign or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

struct Model {
    params: ModelParams,
    c_exact: Rational,
}

fn model(m: &ModelArgs) -> Result<Model, CliError> {
    let c_exact = ttring::parse_rational(&m.c).ok_or_else(|| CliError::Usage(format!("cannot parse c = `{}`", m.c)))?;
    let c = c_exact.to_f64().ok_or_else(|| CliError::Usage("c out of range".into()))?;
    let t = parse_complex(&m.t).ok_or_else(|| CliError::Usage(format!("cannot parse t = `{}`", m.t)))?;
    let params = ModelParams::new(m.n, c, t)?;
    Ok(Model { params, c_exact })
}

fn params_json(p: &ModelParams) -> Value {
    json!({ "n": p.n, "c": p.c, "t": complex_json(p.t) })
}

fn to_tag(b: Basis) -> BasisTag {
    match b {
        Basis::Monomial => BasisTag::Monomial,
        Basis::Shifted => BasisTag::Shifted,
        Basis::Delta => BasisTag::Delta,
        Basis::Interleaved => BasisTag::Interleaved,
    }
}

fn basis_name(b: BasisTag) -> &'static str {
    match b {
        BasisTag::Monomial => "monomial",
        BasisTag::Shifted => "shifted",
        BasisTag::Delta => "delta",
        BasisTag::Interleaved => "interleaved",
    }
}

fn labels(basis: BasisTag, n: usize) -> Vec<String> {
    (0..2 * n)
        .map(|k| match basis {
            BasisTag::Monomial => format!("x^{k}"),
            BasisTag::Shifted if k < n => format!("x^{k}"),
            BasisTag::Shifted => format!("x^{k} + c x^{}", k - n),
            BasisTag::Delta if k < n => format!("delta_{k}"),
            BasisTag::Delta => format!("delta'_{}", k - n),
            BasisTag::Interleaved if k % 2 == 0 => format!("phi_{}", k / 2),
            BasisTag::Interleaved => format!("phi'_{}", k / 2),
        })
        .collect()
}

fn emit_matrix(format: Format, command: &str, mut payload: Value, m: &DMatrix<Complex64>) -> String {
    match format {
        Format::Json => {
            payload["matrix"] = matrix_json(m);
            output::to_string(&envelope(command, payload))
        }
        Format::Csv => matrix_csv(m),
        Format::Pretty => matrix_pretty(m),
    }
}

pub fn ring(format: Format, m: &ModelArgs, basis: Basis) -> CliResult {
    let Model { params, .. } = model(m)?;
    let tag = to_tag(basis);
    let n = params.n;
    let coords = match tag {
        BasisTag::Monomial => DMatrix::identity(2 * n, 2 * n),
        BasisTag::Shifted => pairing::shift_matrix(n, &Complex64::new(params.c, 0.0)),
        BasisTag::Delta => crt::delta_coordinate_matrix(&params)?,
        BasisTag::Interleaved => ttring::interleaved_basis(&params, RootBranch::default())?.change,
    };
    let names = labels(tag, n);
    match format {
        Format::Json => {
            let payload = json!({
                "params": params_json(&params),
                "basis": basis_name(tag),
                "labels": names,
                "coordinates": matrix_json(&coords),
            });
            Ok(output::to_string(&envelope("ring", payload)))
        }
        Format::Csv => Ok(matrix_csv(&coords)),
        Format::Pretty => {
            let mut out = String::new();
            for (i, name) in names.iter().enumerate() {
                let row: Vec<String> = (0..2 * n).map(|j| output::fmt_complex(coords[(i, j)])).collect();
                writeln!(out, "{name:>14} = [{}]", row.join(", ")).unwrap();
            }
            Ok(out.trim_end().to_string())
        }
    }
}

pub fn eta(format: Format, m: &ModelArgs, basis: Basis) -> CliResult {
    let Model { params, c_exact } = model(m)?;
    let tag = to_tag(basis);
    let (matrix, backend, exact) = match tag {
        BasisTag::Monomial | BasisTag::Shifted => {
            // The block forms do not depend on t, so the exact backend applies
            // whenever c is rational.
            let ring = ChiralRing::new(params.n, c_exact)?;
            let e = pairing::eta_matrix_exact(&ring, tag)?.entries;
            let strings: Vec<Vec<String>> = (0..e.nrows()).map(|i| (0..e.ncols()).map(|j| e[(i, j)].to_string()).collect()).collect();
            let float = e.map(|q| Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0));
            (float, "exact", Some(strings))
        }
        BasisTag::Delta => (pairing::eta_matrix(tag, &params)?.entries, "float", None),
        BasisTag::Interleaved => {
            let ib = ttring::interleaved_basis(&params, RootBranch::default())?;
            (ib.eta(&params)?.entries, "float", None)
        }
    };
    let mut payload = json!({ "params": params_json(&params), "basis": basis_name(tag), "backend": backend });
    if let Some(s) = exact {
        payload["exact"] = json!(s);
    }
    Ok(emit_matrix(format, "eta", payload, &matrix))
}

pub fn cmatrix(format: Format, m: &ModelArgs, basis: CBasis, with_prefactor: bool) -> CliResult {
    let Model { params, .. } = model(m)?;
    let tag = match basis {
        CBasis::Monomial => BasisTag::Monomial,
        CBasis::Interleaved => BasisTag::Interleaved,
    };
    let op = ttring::c_operator_in(&params, tag, RootBranch::default())?;
    let matrix = if with_prefactor { op.scaled_matrix() } else { op.matrix.clone() };
    let eigen = op.eigen.as_ref().map(|e| {
        json!({
            "lambda": complex_json(e.lambda),
            "mu": complex_json(e.mu),
            "lambda_root": complex_json(e.lambda_root),
            "mu_root": complex_json(e.mu_root),
        })
    });
    let payload = json!({
        "params": params_json(&params),
        "basis": basis_name(tag),
        "prefactor": complex_json(op.prefactor),
        "prefactor_applied": with_prefactor,
        "closure": { "a": complex_json(op.closure.a), "b": complex_json(op.closure.b) },
        "eigen": eigen,
    });
    Ok(emit_matrix(format, "cmatrix", payload, &matrix))
}

pub fn chebyshev(format: Format, k: usize, tilde: bool) -> CliResult {
    let p = if tilde { chebyshev::u_tilde_poly(k) } else { chebyshev::u_poly(k) };
    let mut coeffs: Vec<Value> = p.coeffs().iter().map(|c| c.to_i64().map_or_else(|| json!(c.to_string()), |v| json!(v))).collect();
    if coeffs.is_empty() {
        coeffs.push(json!(0));
    }
    let text: Vec<String> = coeffs.iter().map(|v| v.to_string().trim_matches('"').to_string()).collect();
    Ok(match format {
        Format::Json => output::to_string(&envelope("chebyshev", json!({ "k": k, "tilde": tilde, "coefficients": coeffs }))),
        Format::Csv => {
            let mut out = String::from("power,coefficient\n");
            for (i, c) in text.iter().enumerate() {
                writeln!(out, "{i},{c}").unwrap();
            }
            out
        }
        Format::Pretty => format!("[{}]", text.join(", ")),
    })
}

pub fn verify(format: Format, suite: &str, m: &ModelArgs, dmax: usize, seed: u64, threads: usize) -> CliResult {
    let suite: Suite = suite.parse().map_err(CliError::Usage)?;
    let Model { params, c_exact } = model(m)?;
    let mut opts = VerifyOptions::new(params.n, c_exact);
    opts.t = params.t;
    opts.dmax = dmax;
    opts.seed = seed;
    opts.threads = threads;
    let reports = verify::run(suite, &opts)?;
    let passed = reports.iter().all(|r| r.passed);
    if !passed {
        let failures: Vec<Value> = reports
            .iter()
            .flat_map(|r| r.failures().map(move |c| json!({ "suite": r.suite, "check": c })))
            .collect();
        let report = envelope(
            "verify",
            json!({ "status": "fail", "params": params_json(&params), "seed": seed, "failures": failures }),
        );
        return Err(CliError::Failure(format!("{} check(s) failed", failures.len()), Some(report)));
    }
    Ok(match format {
        Format::Json => output::to_string(&envelope(
            "verify",
            json!({ "status": "pass", "params": params_json(&params), "seed": seed, "suites": reports }),
        )),
        Format::Csv => {
            let mut out = String::from("suite,module,operation,identity,backend,tolerance,observed,passed\n");
            for r in &reports {
                for c in &r.checks {
                    let suite = serde_json::to_value(r.suite).unwrap();
                    let backend = serde_json::to_value(c.backend).unwrap();
                    writeln!(
                        out,
                        "{},{},{},\"{}\",{},{:e},{:e},{}",
                        suite.as_str().unwrap_or(""),
                        c.module,
                        c.operation,
                        c.identity.replace('"', "'"),
                        backend.as_str().unwrap_or(""),
                        c.tolerance,
                        c.observed,
                        c.passed
                    )
                    .unwrap();
                }
            }
            out
        }
        Format::Pretty => {
            let mut out = String::new();
            for r in &reports {
                let worst = r.checks.iter().map(|c| c.observed / c.tolerance.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
                let suite = serde_json::to_value(r.suite).unwrap();
                writeln!(out, "{:<8} PASS  {:>4} checks, worst observed/tolerance {worst:.2e}", suite.as_str().unwrap_or(""), r.checks.len()).unwrap();
            }
            out.trim_end().to_string()
        }
    })
}

#[derive(Deserialize)]
struct BoundaryFile {
    inner: Vec<[[CxIn; 2]; 2]>,
    outer: Vec<[[CxIn; 2]; 2]>,
    /// Optional starting guess, indexed `[j][point]`.
    #[serde(default)]
    initial: Option<Vec<Vec<[[CxIn; 2]; 2]>>>,
}

fn blocks(raw: Vec<[[CxIn; 2]; 2]>, what: &str) -> Result<Vec<MetricBlock>, CliError> {
    raw.into_iter()
        .enumerate()
        .map(|(j, b)| MetricBlock::new(block_from_json(b)).map_err(|e| CliError::Usage(format!("{what} block {j}: {e}"))))
        .collect()
}

/// Inner blocks, outer blocks and an optional starting state.
type BoundaryData = (Vec<MetricBlock>, Vec<MetricBlock>, Option<TodaState>);

fn read_boundary(path: &Path, n: usize, grid: RadialGrid) -> Result<BoundaryData, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read `{}`: {e}", path.display())))?;
    let file: BoundaryFile = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed boundary file: {e}")))?;
    let inner = blocks(file.inner, "inner")?;
    let outer = blocks(file.outer, "outer")?;
    if inner.len() != n || outer.len() != n {
        return Err(CliError::Usage(format!("boundary file has {}/{} blocks, expected {n}", inner.len(), outer.len())));
    }
    let initial = match file.initial {
        None => None,
        Some(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != grid.points) {
                return Err(CliError::Usage(format!("initial data must be {n} rows of {} blocks", grid.points)));
            }
            let rows: Vec<Vec<MetricBlock>> = rows.into_iter().map(|r| blocks(r, "initial")).collect::<Result<_, _>>()?;
            Some(TodaState::new(rows, grid)?)
        }
    };
    Ok((inner, outer, initial))
}

fn solution_csv(state: &TodaState, residual: &[Vec<f64>]) -> String {
    let mut out = String::from("r,j,g11_re,g11_im,g12_re,g12_im,g21_re,g21_im,g22_re,g22_im,residual\n");
    for (j, (row, res)) in state.blocks.iter().zip(residual).enumerate() {
        for (i, (b, r)) in row.iter().zip(res).enumerate() {
            let g = b.g;
            write!(out, "{:.17e},{j}", state.grid.r(i)).unwrap();
            for z in [g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]] {
                write!(out, ",{:.17e},{:.17e}", z.re, z.im).unwrap();
            }
            writeln!(out, ",{r:e}").unwrap();
        }
    }
    out
}

fn solution_json(state: &TodaState, residual: &[Vec<f64>]) -> Value {
    let r: Vec<f64> = (0..state.points()).map(|i| state.grid.r(i)).collect();
    let blocks: Vec<Vec<[[Cx; 2]; 2]>> = state
        .blocks
        .iter()
        .map(|row| row.iter().map(|b| [[b.g[(0, 0)].into(), b.g[(0, 1)].into()], [b.g[(1, 0)].into(), b.g[(1, 1)].into()]]).collect())
        .collect();
    envelope("solve", json!({ "r": r, "blocks": blocks, "residual": residual }))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Failure(format!("cannot write `{}`: {e}", path.display()), None))
}

pub fn solve(format: Format, a: &SolveArgs) -> CliResult {
    let Model { params, .. } = model(&a.model)?;
    let n = params.n;
    let grid: RadialGrid = a.grid.parse().map_err(CliError::Usage)?;

    let ib = ttring::interleaved_basis(&params, RootBranch::default()).ok();
    let mut twist = match a.twist {
        Twist::Identity => nalgebra::Matrix2::identity(),
        Twist::Coupling => ib
            .as_ref()
            .map(|b| b.d_block())
            .ok_or_else(|| CliError::Usage("coupling twist needs a non-degenerate eigen-splitting (c != 0 or n > 0)".into()))?,
    };
    if a.with_prefactor {
        twist *= params.coupling_prefactor();
    }

    let (bc_mode, start, exact) = match (a.manufactured, &a.bc) {
        (Some(kind), _) => {
            let kind = match kind {
                Family::Diagonal => FamilyKind::Diagonal,
                Family::NonDiagonal => FamilyKind::NonDiagonal,
            };
            let fam = ManufacturedFamily::standard(kind, n);
            let inner: Vec<MetricBlock> = (0..n).map(|j| fam.block(j, grid.r_min)).collect();
            let outer: Vec<MetricBlock> = (0..n).map(|j| fam.block(j, grid.r_max)).collect();
            let start = TodaState::interpolate(grid, &inner, &outer)?;
            let exact = fam.state(grid)?;
            (BoundaryCondition::Manufactured(fam), start, Some(exact))
        }
        (None, Some(path)) => {
            let (mut inner, mut outer, initial) = read_boundary(path, n, grid)?;
            if a.impose_reality {
                let ib = ib.as_ref().ok_or_else(|| CliError::Usage("reality constraint needs the interleaved basis".into()))?;
                let (nb, _) = reflection_block(ib, &params)?;
                impose_reality(&mut inner, &nb)?;
                impose_reality(&mut outer, &nb)?;
            }
            let start = match initial {
                Some(mut s) => {
                    for j in 0..n {
                        s.blocks[j][0] = inner[j];
                        s.blocks[j][grid.points - 1] = outer[j];
                    }
                    s
                }
                None => TodaState::interpolate(grid, &inner, &outer)?,
            };
            (BoundaryCondition::UserSupplied { inner, outer }, start, None)
        }
        (None, None) => return Err(CliError::Usage("either --bc FILE or --manufactured FAMILY is required".into())),
    };

    let mut cfg = SolverConfig::new(bc_mode);
    cfg.tol = a.tol;
    cfg.max_iter = a.max_iter;
    cfg.damping = a.damping;
    cfg.twist = twist;
    cfg.threads = a.threads;
    cfg.renormalize_det = a.renormalize_det;
    cfg.method = match a.method {
        SolveMethod::Newton => Method::Newton,
        SolveMethod::GaussSeidel => Method::GaussSeidel,
    };

    let (sol, report) = toda::solve(&start, &cfg)?;

    let mut op = TodaOperator::new(grid).with_twist(twist);
    if let Some(ex) = &exact {
        let source = op.hermitian_field(&ex.matrices())?;
        op = op.with_source(source);
    }
    let residual = op.residual_field(&sol)?.values;

    let reality = match &ib {
        Some(b) => reflection_block(b, &params).and_then(|(_, eta)| reality_along(&sol, &eta)).ok(),
        None => None,
    };
    let report_json = envelope(
        "solve",
        json!({
            "params": params_json(&params),
            "grid": grid,
            "twist": [[complex_json(twist[(0, 0)]), complex_json(twist[(0, 1)])], [complex_json(twist[(1, 0)]), complex_json(twist[(1, 1)])]],
            "manufactured": exact.is_some(),
            "convergence": report,
            "reality_residual": reality,
            "error_vs_manufactured": exact.as_ref().map(|ex| sol.sup_distance(ex)),
        }),
    );

    if let Some(prefix) = &a.output {
        let with_ext = |ext: &str| {
            let mut p = prefix.clone().into_os_string();
            p.push(ext);
            std::path::PathBuf::from(p)
        };
        write_file(&with_ext(".csv"), &solution_csv(&sol, &residual))?;
        write_file(&with_ext(".json"), &output::to_string(&solution_json(&sol, &residual)))?;
        write_file(&with_ext(".report.json"), &output::to_string(&report_json))?;
    }

    if !report.converged {
        return Err(CliError::Failure(
            format!("solver stopped after {} iterations at residual {:e}", report.iterations, report.final_residual),
            Some(report_json),
        ));
    }

    Ok(match format {
        Format::Json if a.output.is_some() => output::to_string(&report_json),
        Format::Json => {
            let mut v = report_json;
            v["solution"] = solution_json(&sol, &residual);
            output::to_string(&v)
        }
        Format::Csv => solution_csv(&sol, &residual),
        Format::Pretty => format!(
            "converged in {} iterations: residual {:.3e} -> {:.3e}, det drift {:.3e}, hermiticity drift {:.3e}, min eigenvalue {:.3e}{}",
            report.iterations,
            report.initial_residual,
            report.final_residual,
            report.det_drift,
            report.hermiticity_drift,
            report.min_eigenvalue,
            reality.map(|r| format!(", reality residual {r:.3e}")).unwrap_or_default()
        ),
    })
}
