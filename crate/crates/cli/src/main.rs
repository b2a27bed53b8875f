//! `cwq`: command-line access to the quantization maps, Curie-Weiss ground
//! states, and coherent-state diagnostics of `cwq-core`.
//!
//! Every subcommand writes its data files plus a JSON run manifest into the
//! output directory (`--out-dir`, default `./out`).  CSV artifacts carry 17
//! significant digits and identical invocations produce byte-identical CSV
//! files: all sampling is seeded and all reductions are order-fixed, so the
//! worker-thread count never changes a result.
//!
//! Exit codes: 0 on success, 1 on a numerical failure (with a diagnostic
//! JSON object on stderr) or a failed verification, 2 on usage errors.

mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use cwq_core::acceptance::{run_all, CriterionReport, POLY_SEED};
use cwq_core::numerics::factorial_u128;
use cwq_core::{
    classical_limit_sweep, dgr_sweep, fwhm_scan, ground_state, husimi_profile, membership,
    p3_fraction, perm_count, poisson_bracket_signed, quantize, quantize_words, table1_integral,
    table2_integral, table3_integrals, Convention, CwqError, GroundStateResult, Polynomial,
    Result, StateCoordinates, SuBasis, SweepResult, DEFAULT_BRACKET_SIGN, NORM_SEED,
    RESOLUTION_SEED,
};

use manifest::Runner;

#[derive(Parser)]
#[command(
    name = "cwq",
    version,
    about = "Quantization maps and coherent-state diagnostics for the mean-field Curie-Weiss model"
)]
struct Cli {
    /// Directory for data files and run manifests
    #[arg(long, global = true, default_value = "./out")]
    out_dir: PathBuf,

    /// Worker threads (falls back to CWQ_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the su(k) generator basis and structure constants as JSON
    SuBasis(SuBasisArgs),
    /// Test whether Bloch-style coordinates describe a state
    Membership(MembershipArgs),
    /// Lie-Poisson bracket of two polynomials
    Bracket(BracketArgs),
    /// Quantize a polynomial onto N sites
    Quantize(QuantizeArgs),
    /// Commutator-defect sweep over system sizes
    DgrSweep(DgrSweepArgs),
    /// Curie-Weiss ground state in the symmetric sector
    CwGround(CwGroundArgs),
    /// Husimi density profile of the ground state
    Husimi(HusimiArgs),
    /// Diagnostic tables 1-3 of the coherent-state integrals
    Tables(TablesArgs),
    /// Ground-state expectations against the classical minima
    ClassicalLimit(ClassicalLimitArgs),
    /// Husimi peak widths at half maximum across sizes
    Fwhm(FwhmArgs),
    /// Permutation class counts behind the symmetrizer bounds
    Combinatorics(CombinatoricsArgs),
    /// Run the full verification suite
    VerifyAll(VerifyAllArgs),
}

/// Generator basis convention.
#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    /// Orthonormal generators, tr(b_i b_j) = delta_ij
    Orthonormal,
    /// Pauli matrices (k = 2 only)
    Pauli,
}

impl ConventionArg {
    fn to_core(self) -> Convention {
        match self {
            ConventionArg::Orthonormal => Convention::Orthonormal,
            ConventionArg::Pauli => Convention::Pauli,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ConventionArg::Orthonormal => "orthonormal",
            ConventionArg::Pauli => "pauli",
        }
    }
}

#[derive(Args)]
struct SuBasisArgs {
    /// Matrix size k of su(k)
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = ConventionArg::Orthonormal)]
    convention: ConventionArg,
    /// Output file name inside the output directory
    #[arg(long, default_value = "su_basis.json")]
    out: String,
    #[arg(long, value_parser = ["json"], default_value = "json")]
    format: String,
}

#[derive(Args)]
struct MembershipArgs {
    /// Matrix size k
    #[arg(long)]
    k: usize,
    /// Coordinates x1,...,x(k^2-1), comma separated
    #[arg(long)]
    x: FloatList,
    #[arg(long, value_enum, default_value_t = ConventionArg::Orthonormal)]
    convention: ConventionArg,
}

#[derive(Args)]
struct BracketArgs {
    /// Matrix size k
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = ConventionArg::Orthonormal)]
    convention: ConventionArg,
    /// First polynomial, e.g. "x3^2 - 0.5*x1*x2"
    #[arg(long)]
    f: String,
    /// Second polynomial
    #[arg(long)]
    g: String,
    /// Overall sign of the bracket
    #[arg(long, default_value_t = DEFAULT_BRACKET_SIGN)]
    sign: f64,
}

#[derive(Args)]
struct QuantizeArgs {
    /// Matrix size k
    #[arg(long)]
    k: usize,
    /// Number of sites
    #[arg(long = "N")]
    n: usize,
    /// Polynomial to quantize
    #[arg(long)]
    f: String,
    #[arg(long, value_enum, default_value_t = ConventionArg::Orthonormal)]
    convention: ConventionArg,
    /// Also emit the dense matrix (little-endian f64 re/im interleaved,
    /// row-major) under this file name, with a JSON header sidecar
    #[arg(long = "emit-matrix")]
    emit_matrix: Option<String>,
}

#[derive(Args)]
struct DgrSweepArgs {
    /// First polynomial in x1, x2, x3
    #[arg(long)]
    f: String,
    /// Second polynomial
    #[arg(long)]
    g: String,
    /// Sizes N, comma separated and strictly increasing
    #[arg(long = "N-list", default_value = "4,5,6,7,8,9,10,11,12")]
    n_list: SizeList,
}

#[derive(Args)]
struct CwGroundArgs {
    /// Number of sites
    #[arg(long = "N")]
    n: usize,
    /// Ferromagnetic coupling
    #[arg(long = "J", default_value_t = 1.0)]
    coupling: f64,
    /// Transverse field
    #[arg(long = "B", default_value_t = 0.5)]
    field: f64,
    /// Output file name inside the output directory
    #[arg(long, default_value = "cw_ground.json")]
    out: String,
    /// Also emit a two-column k,c(k) CSV
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct HusimiArgs {
    /// Number of sites
    #[arg(long = "N")]
    n: usize,
    /// Scaling power, 1 or 0.5
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    /// Grid sizes "n_theta,n_phi" (default N+2, 2N+4)
    #[arg(long)]
    grid: Option<GridSpec>,
    #[arg(long = "J", default_value_t = 1.0)]
    coupling: f64,
    #[arg(long = "B", default_value_t = 0.5)]
    field: f64,
    /// Output file name inside the output directory
    #[arg(long, default_value = "husimi.csv")]
    out: String,
}

#[derive(Args)]
struct TablesArgs {
    /// Which diagnostic table to compute
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    which: u8,
    /// Sizes N, comma separated (defaults to the built-in row set of the table)
    #[arg(long = "N-list")]
    n_list: Option<SizeList>,
    #[arg(long = "J", default_value_t = 1.0)]
    coupling: f64,
    #[arg(long = "B", default_value_t = 0.5)]
    field: f64,
}

#[derive(Args)]
struct ClassicalLimitArgs {
    /// Polynomial observable in x1, x2, x3
    #[arg(long)]
    f: String,
    #[arg(long = "N-list", default_value = "100,200,400,800")]
    n_list: SizeList,
    #[arg(long = "J", default_value_t = 1.0)]
    coupling: f64,
    #[arg(long = "B", default_value_t = 0.5)]
    field: f64,
}

#[derive(Args)]
struct FwhmArgs {
    #[arg(long = "N-list", default_value = "50,100,200,400")]
    n_list: SizeList,
    /// Scaling power, 1 or 0.5
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    #[arg(long = "J", default_value_t = 1.0)]
    coupling: f64,
    #[arg(long = "B", default_value_t = 0.5)]
    field: f64,
}

#[derive(Args)]
struct CombinatoricsArgs {
    /// Number of symbols
    #[arg(long = "N")]
    n: u64,
    /// Size of the first position block
    #[arg(long = "L")]
    l: u64,
    /// Size of the second position block
    #[arg(long = "M")]
    m: u64,
}

#[derive(Args)]
struct VerifyAllArgs {
    /// Shrink sweep ranges for a fast smoke run (tolerances unchanged)
    #[arg(long)]
    quick: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            let diagnostic = serde_json::json!({
                "error": error_kind(&e),
                "message": e.to_string(),
            });
            eprintln!("{diagnostic}");
            ExitCode::from(1)
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let from_env = std::env::var("CWQ_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok());
    if let Some(n) = flag.or(from_env) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn error_kind(e: &CwqError) -> &'static str {
    match e {
        CwqError::Dimension(_) => "dimension",
        CwqError::NotAState(_) => "not-a-state",
        CwqError::Size(_) => "size",
        CwqError::Overflow(_) => "overflow",
        CwqError::Scan(_) => "scan",
        CwqError::Parse(_) => "parse",
        CwqError::Numerical(_) => "numerical",
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::SuBasis(args) => cmd_su_basis(cli, args)?,
        Command::Membership(args) => cmd_membership(cli, args)?,
        Command::Bracket(args) => cmd_bracket(cli, args)?,
        Command::Quantize(args) => cmd_quantize(cli, args)?,
        Command::DgrSweep(args) => cmd_dgr_sweep(cli, args)?,
        Command::CwGround(args) => cmd_cw_ground(cli, args)?,
        Command::Husimi(args) => cmd_husimi(cli, args)?,
        Command::Tables(args) => cmd_tables(cli, args)?,
        Command::ClassicalLimit(args) => cmd_classical_limit(cli, args)?,
        Command::Fwhm(args) => cmd_fwhm(cli, args)?,
        Command::Combinatorics(args) => cmd_combinatorics(cli, args)?,
        Command::VerifyAll(args) => return cmd_verify_all(cli, args),
    }
    Ok(ExitCode::SUCCESS)
}

/// 17 significant digits, locale-independent.
fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Comma-separated sizes, e.g. "10,20,30".
#[derive(Clone)]
struct SizeList(Vec<usize>);

impl std::str::FromStr for SizeList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad size '{t}': {e}")))
            .collect::<std::result::Result<Vec<usize>, String>>()
            .map(SizeList)
    }
}

/// Comma-separated coordinates, e.g. "0.5,0,0.8".
#[derive(Clone)]
struct FloatList(Vec<f64>);

impl std::str::FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}")))
            .collect::<std::result::Result<Vec<f64>, String>>()
            .map(FloatList)
    }
}

/// Grid sizes "n_theta,n_phi".
#[derive(Clone, Copy)]
struct GridSpec(usize, usize);

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts = SizeList::from_str(s)?.0;
        if parts.len() != 2 {
            return Err(format!("grid needs exactly two sizes, got {}", parts.len()));
        }
        Ok(GridSpec(parts[0], parts[1]))
    }
}

#[derive(Serialize)]
struct GeneratorJson {
    index: usize,
    /// Row-major re/im pairs.
    matrix: Vec<f64>,
}

#[derive(Serialize)]
struct TripletJson {
    indices: [usize; 3],
    value: f64,
}

#[derive(Serialize)]
struct SuBasisJson {
    k: usize,
    convention: String,
    dim: usize,
    generators: Vec<GeneratorJson>,
    structure_constants: Vec<TripletJson>,
}

fn cmd_su_basis(cli: &Cli, args: &SuBasisArgs) -> Result<()> {
    let mut runner = Runner::new("su-basis", &cli.out_dir)?;
    runner.param("k", args.k);
    runner.param("convention", args.convention.label());
    runner.param("format", &args.format);

    let basis = SuBasis::new(args.k, args.convention.to_core())?;
    let constants = basis.structure_constants()?;
    let generators = basis
        .generators()
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let mut flat = Vec::with_capacity(2 * args.k * args.k);
            for i in 0..args.k {
                for jj in 0..args.k {
                    let z = m[(i, jj)];
                    flat.push(z.re);
                    flat.push(z.im);
                }
            }
            GeneratorJson { index: j + 1, matrix: flat }
        })
        .collect();
    let structure_constants = constants
        .nonzero()
        .iter()
        .map(|&(r, s, l, v)| TripletJson { indices: [r + 1, s + 1, l + 1], value: v })
        .collect();
    let payload = SuBasisJson {
        k: args.k,
        convention: args.convention.label().to_string(),
        dim: basis.dim(),
        generators,
        structure_constants,
    };
    let mut body = serde_json::to_vec_pretty(&payload)
        .map_err(|e| CwqError::Numerical(format!("serialization failed: {e}")))?;
    body.push(b'\n');
    runner.write_artifact(&args.out, &body)?;
    runner.finish()
}

fn cmd_membership(cli: &Cli, args: &MembershipArgs) -> Result<()> {
    let mut runner = Runner::new("membership", &cli.out_dir)?;
    runner.param("k", args.k);
    runner.param("convention", args.convention.label());
    runner.param("x", &args.x.0);

    let basis = SuBasis::new(args.k, args.convention.to_core())?;
    let coords = StateCoordinates::new(args.k, args.x.0.clone())?;
    let result = membership(&coords, &basis)?;
    let payload = serde_json::json!({
        "k": args.k,
        "convention": args.convention.label(),
        "x": args.x.0,
        "is_state": result.is_state,
        "margin": result.margin,
        "coefficients": result.coefficients,
    });
    let body = format!("{payload:#}\n");
    println!("{payload:#}");
    runner.write_artifact("membership.json", body.as_bytes())?;
    runner.finish()
}

fn cmd_bracket(cli: &Cli, args: &BracketArgs) -> Result<()> {
    let mut runner = Runner::new("bracket", &cli.out_dir)?;
    runner.param("k", args.k);
    runner.param("convention", args.convention.label());
    runner.param("f", &args.f);
    runner.param("g", &args.g);
    runner.param("sign", args.sign);

    let basis = SuBasis::new(args.k, args.convention.to_core())?;
    let constants = basis.structure_constants()?;
    let nvars = basis.dim();
    let f = Polynomial::parse(nvars, &args.f)?;
    let g = Polynomial::parse(nvars, &args.g)?;
    let bracket = poisson_bracket_signed(&f, &g, &constants, args.sign)?;
    let rendered = bracket.to_string();
    println!("{rendered}");
    runner.write_artifact("bracket.txt", format!("{rendered}\n").as_bytes())?;
    runner.finish()
}

#[derive(Serialize)]
struct MatrixHeaderJson {
    k: usize,
    #[serde(rename = "N")]
    n: usize,
    convention: String,
    f: String,
    dim: usize,
    layout: &'static str,
    element: &'static str,
}

fn cmd_quantize(cli: &Cli, args: &QuantizeArgs) -> Result<()> {
    let mut runner = Runner::new("quantize", &cli.out_dir)?;
    runner.param("k", args.k);
    runner.param("N", args.n);
    runner.param("convention", args.convention.label());
    runner.param("f", &args.f);

    let basis = SuBasis::new(args.k, args.convention.to_core())?;
    let f = Polynomial::parse(basis.dim(), &args.f)?;
    let words = quantize_words(&f, args.n, &basis)?;
    let summary = serde_json::json!({
        "k": args.k,
        "N": args.n,
        "convention": args.convention.label(),
        "f": args.f,
        "dim": words.dim(),
    });
    runner.write_artifact("quantize.json", format!("{summary:#}\n").as_bytes())?;

    if let Some(name) = &args.emit_matrix {
        runner.param("emit-matrix", name);
        let dense = quantize(&f, args.n, &basis)?;
        let m = dense.matrix();
        let dim = words.dim();
        let mut bytes = Vec::with_capacity(dim * dim * 16);
        for i in 0..dim {
            for j in 0..dim {
                let z: Complex64 = m[(i, j)];
                bytes.extend_from_slice(&z.re.to_le_bytes());
                bytes.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        runner.write_artifact(name, &bytes)?;
        let header = MatrixHeaderJson {
            k: args.k,
            n: args.n,
            convention: args.convention.label().to_string(),
            f: args.f.clone(),
            dim,
            layout: "row-major",
            element: "complex as two little-endian f64 (re, im)",
        };
        let mut body = serde_json::to_vec_pretty(&header)
            .map_err(|e| CwqError::Numerical(format!("serialization failed: {e}")))?;
        body.push(b'\n');
        runner.write_artifact(&format!("{name}.json"), &body)?;
    }
    runner.finish()
}

fn cmd_dgr_sweep(cli: &Cli, args: &DgrSweepArgs) -> Result<()> {
    let mut runner = Runner::new("dgr-sweep", &cli.out_dir)?;
    runner.param("k", 2);
    runner.param("convention", "pauli");
    runner.param("f", &args.f);
    runner.param("g", &args.g);
    runner.param("N-list", &args.n_list.0);
    runner.param("bracket-sign", DEFAULT_BRACKET_SIGN);
    runner.seed("lanczos", NORM_SEED);

    let basis = SuBasis::new(2, Convention::Pauli)?;
    let f = Polynomial::parse(3, &args.f)?;
    let g = Polynomial::parse(3, &args.g)?;
    let sweep = dgr_sweep(&f, &g, &args.n_list.0, &basis)?;
    let mut csv = String::from("N,defect\n");
    for &(n, d) in &sweep.points {
        csv.push_str(&format!("{n},{}\n", sig17(d)));
    }
    runner.write_artifact("dgr_sweep.csv", csv.as_bytes())?;
    match sweep.fit {
        Some((slope, _)) => println!("log-log slope {slope:.6}"),
        None => println!("log-log slope unavailable (non-positive defects)"),
    }
    runner.finish()
}

#[derive(Serialize)]
struct CwGroundJson {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "J")]
    coupling: f64,
    #[serde(rename = "B")]
    field: f64,
    energy: f64,
    gap: f64,
    purified: bool,
    c: Vec<f64>,
}

fn cmd_cw_ground(cli: &Cli, args: &CwGroundArgs) -> Result<()> {
    let mut runner = Runner::new("cw-ground", &cli.out_dir)?;
    runner.param("N", args.n);
    runner.param("J", args.coupling);
    runner.param("B", args.field);

    let gs = ground_state(args.n, args.coupling, args.field)?;
    let payload = CwGroundJson {
        n: gs.n,
        coupling: gs.coupling,
        field: gs.field,
        energy: gs.energy,
        gap: gs.gap,
        purified: gs.purified,
        c: gs.c.clone(),
    };
    let mut body = serde_json::to_vec_pretty(&payload)
        .map_err(|e| CwqError::Numerical(format!("serialization failed: {e}")))?;
    body.push(b'\n');
    runner.write_artifact(&args.out, &body)?;
    if args.csv {
        let mut csv = String::from("k,c\n");
        for (k, &ck) in gs.c.iter().enumerate() {
            csv.push_str(&format!("{k},{}\n", sig17(ck)));
        }
        runner.write_artifact("cw_ground.csv", csv.as_bytes())?;
    }
    println!(
        "N={} energy {:.12} gap {:.3e} purified {}",
        gs.n, gs.energy, gs.gap, gs.purified
    );
    runner.finish()
}

fn cmd_husimi(cli: &Cli, args: &HusimiArgs) -> Result<()> {
    let mut runner = Runner::new("husimi", &cli.out_dir)?;
    let GridSpec(n_theta, n_phi) = args.grid.unwrap_or(GridSpec(args.n + 2, 2 * args.n + 4));
    runner.param("N", args.n);
    runner.param("J", args.coupling);
    runner.param("B", args.field);
    runner.param("ell", args.ell);
    runner.param("grid", [n_theta, n_phi]);

    let gs = ground_state(args.n, args.coupling, args.field)?;
    let profile = husimi_profile(&gs.c, args.ell, n_theta, n_phi)?;
    let mut csv = String::from("theta,phi,value\n");
    for (i, &theta) in profile.thetas().iter().enumerate() {
        for (j, &phi) in profile.phis().iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{}\n",
                sig17(theta),
                sig17(phi),
                sig17(profile.value(i, j))
            ));
        }
    }
    runner.write_artifact(&args.out, csv.as_bytes())?;
    runner.finish()
}

fn table_ground_states(n_list: &[usize], coupling: f64, field: f64) -> Result<Vec<GroundStateResult>> {
    n_list
        .par_iter()
        .map(|&n| ground_state(n, coupling, field))
        .collect()
}

fn cmd_tables(cli: &Cli, args: &TablesArgs) -> Result<()> {
    let mut runner = Runner::new("tables", &cli.out_dir)?;
    let rows: Vec<usize> = match &args.n_list {
        Some(list) => list.0.clone(),
        None => match args.which {
            1 => vec![10, 20, 30, 60, 90, 120, 150, 180],
            2 => (10..=150).step_by(10).collect(),
            _ => (10..=140).step_by(10).collect(),
        },
    };
    runner.param("which", args.which);
    runner.param("N-list", &rows);
    runner.param("J", args.coupling);
    runner.param("B", args.field);
    runner.param("convention", "pauli");
    runner.param("quadrature", "trapezoid, (N+1) x (N+1) on [0,pi] x [-pi,pi]");

    let states = table_ground_states(&rows, args.coupling, args.field)?;
    let csv = match args.which {
        1 => {
            let values = rows
                .par_iter()
                .zip(&states)
                .map(|(&n, gs)| table1_integral(n, gs))
                .collect::<Result<Vec<f64>>>()?;
            let mut csv = String::from("N,value\n");
            for (&n, v) in rows.iter().zip(&values) {
                csv.push_str(&format!("{n},{}\n", sig17(*v)));
            }
            csv
        }
        2 => {
            let values = rows
                .par_iter()
                .zip(&states)
                .map(|(&n, gs)| {
                    let one = table2_integral(n, 1.0, gs)?;
                    let half = table2_integral(n, 0.5, gs)?;
                    Ok((one, half))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut csv = String::from("N,ell1,ellhalf\n");
            for (&n, (one, half)) in rows.iter().zip(&values) {
                csv.push_str(&format!("{n},{},{}\n", sig17(*one), sig17(*half)));
            }
            csv
        }
        _ => {
            let values = rows
                .par_iter()
                .zip(&states)
                .map(|(&n, gs)| {
                    let (a_half, b_half) = table3_integrals(n, 0.5, gs)?;
                    let (a_one, b_one) = table3_integrals(n, 1.0, gs)?;
                    Ok((a_half, b_half, a_one, b_one))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut csv = String::from("N,A_ellhalf,B_ellhalf,A_ell1,B_ell1\n");
            for (&n, (ah, bh, ao, bo)) in rows.iter().zip(&values) {
                csv.push_str(&format!(
                    "{n},{},{},{},{}\n",
                    sig17(*ah),
                    sig17(*bh),
                    sig17(*ao),
                    sig17(*bo)
                ));
            }
            csv
        }
    };
    runner.write_artifact(&format!("table{}.csv", args.which), csv.as_bytes())?;
    runner.finish()
}

fn cmd_classical_limit(cli: &Cli, args: &ClassicalLimitArgs) -> Result<()> {
    let mut runner = Runner::new("classical-limit", &cli.out_dir)?;
    runner.param("f", &args.f);
    runner.param("N-list", &args.n_list.0);
    runner.param("J", args.coupling);
    runner.param("B", args.field);
    runner.param("convention", "pauli");

    let f = Polynomial::parse(3, &args.f)?;
    let sweep = classical_limit_sweep(&f, &args.n_list.0, args.coupling, args.field)?;
    let mut csv = String::from("N,value,target,error\n");
    for (&(n, value), &(_, error)) in sweep.values.points.iter().zip(&sweep.errors.points) {
        csv.push_str(&format!(
            "{n},{},{},{}\n",
            sig17(value),
            sig17(sweep.target),
            sig17(error)
        ));
    }
    runner.write_artifact("classical_limit.csv", csv.as_bytes())?;
    println!("classical target {}", sig17(sweep.target));
    if let Some((slope, _)) = sweep.errors.fit {
        println!("error log-log slope {slope:.6}");
    }
    runner.finish()
}

fn cmd_fwhm(cli: &Cli, args: &FwhmArgs) -> Result<()> {
    let mut runner = Runner::new("fwhm", &cli.out_dir)?;
    runner.param("N-list", &args.n_list.0);
    runner.param("ell", args.ell);
    runner.param("J", args.coupling);
    runner.param("B", args.field);

    let widths = args
        .n_list
        .0
        .par_iter()
        .map(|&n| {
            let gs = ground_state(n, args.coupling, args.field)?;
            fwhm_scan(n, args.ell, &gs).map(|w| (n, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("N,theta_width,phi_width\n");
    for &(n, (t, p)) in &widths {
        csv.push_str(&format!("{n},{},{}\n", sig17(t), sig17(p)));
    }
    runner.write_artifact("fwhm.csv", csv.as_bytes())?;
    let theta_fit =
        SweepResult::fitted("theta width", widths.iter().map(|&(n, (t, _))| (n, t)).collect())?;
    let phi_fit =
        SweepResult::fitted("phi width", widths.iter().map(|&(n, (_, p))| (n, p)).collect())?;
    if let Some((slope, _)) = theta_fit.fit {
        println!("theta-width log-log slope {slope:.6}");
    }
    if let Some((slope, _)) = phi_fit.fit {
        println!("phi-width log-log slope {slope:.6}");
    }
    runner.finish()
}

fn cmd_combinatorics(cli: &Cli, args: &CombinatoricsArgs) -> Result<()> {
    let mut runner = Runner::new("combinatorics", &cli.out_dir)?;
    runner.param("N", args.n);
    runner.param("L", args.l);
    runner.param("M", args.m);

    let k_lo = (args.l + args.m).saturating_sub(args.n);
    let mut csv = String::from("K,count\n");
    let mut total: u128 = 0;
    for k in k_lo..=args.l {
        let count = perm_count(args.n, args.l, args.m, k)?;
        total = total
            .checked_add(count)
            .ok_or_else(|| CwqError::Overflow("class sum exceeds u128".into()))?;
        csv.push_str(&format!("{k},{count}\n"));
    }
    runner.write_artifact("combinatorics.csv", csv.as_bytes())?;
    let reference = factorial_u128(args.n)
        .ok_or_else(|| CwqError::Overflow(format!("{}! exceeds u128", args.n)))?;
    println!("sum of class counts {total}");
    println!("N! {reference}");
    if total != reference {
        return Err(CwqError::Numerical(format!(
            "class counts sum to {total}, expected {reference}"
        )));
    }
    if args.n > args.l + args.m {
        println!("multi-coincidence fraction {}", sig17(p3_fraction(args.n, args.l, args.m)?));
    }
    runner.finish()
}

#[derive(Serialize)]
struct CheckJson {
    label: String,
    passed: bool,
    gating: bool,
}

#[derive(Serialize)]
struct CriterionJson {
    index: usize,
    title: String,
    passed: bool,
    seconds: f64,
    checks: Vec<CheckJson>,
}

#[derive(Serialize)]
struct VerifyReportJson {
    quick: bool,
    all_passed: bool,
    criteria: Vec<CriterionJson>,
}

fn cmd_verify_all(cli: &Cli, args: &VerifyAllArgs) -> Result<ExitCode> {
    let mut runner = Runner::new("verify-all", &cli.out_dir)?;
    runner.param("quick", args.quick);
    runner.param("J", 1.0);
    runner.param("B", 0.5);
    runner.seed("lanczos", NORM_SEED);
    runner.seed("resolution", RESOLUTION_SEED);
    runner.seed("polynomials", POLY_SEED);

    let reports = run_all(args.quick);
    for report in &reports {
        println!("{}", report.render());
    }
    let all_passed = reports.iter().all(|r| r.passed);
    let payload = VerifyReportJson {
        quick: args.quick,
        all_passed,
        criteria: reports
            .iter()
            .map(|r: &CriterionReport| CriterionJson {
                index: r.index,
                title: r.title.to_string(),
                passed: r.passed,
                seconds: r.seconds,
                checks: r
                    .checks
                    .iter()
                    .map(|c| CheckJson {
                        label: c.label.clone(),
                        passed: c.passed,
                        gating: c.gating,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut body = serde_json::to_vec_pretty(&payload)
        .map_err(|e| CwqError::Numerical(format!("serialization failed: {e}")))?;
    body.push(b'\n');
    runner.write_artifact("verify_report.json", &body)?;
    runner.finish()?;
    if all_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.index).collect();
        eprintln!("verify-all: criteria {failed:?} failed");
        Ok(ExitCode::from(1))
    }
}
