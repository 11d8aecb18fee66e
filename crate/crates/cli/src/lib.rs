//! Command-line front end: argument model, command dispatch and CSV export.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cubacode_core::constellation::catalog::phase_symmetry_order;
use cubacode_core::constellation::file::read_code;
use cubacode_core::constellation::{
    build_catalog_code, catalog_names, normalize_energy, CodeSpec, Params, Rotation,
};
use cubacode_core::fock::{
    evaluate_point, linear_grid, optimal_scale, poisson_tail, BenchPoint, FockSpace, DEFAULT_DIM_BUDGET,
};
use cubacode_core::klcheck::{code_params, kl_report, DEFAULT_CEILING};
use cubacode_core::moments::{code_bounds, design_degree, moment_match_degree, MomentMatcher, MOMENT_TOL};
use cubacode_core::stabilizer::{
    containment_witness, parse_polynomials, verify_xtype, verify_ztype, ztype_polynomials, AnnihilationPolynomial,
};
use cubacode_core::Error;
use rayon::prelude::*;

/// Environment variable overriding the Fock dimension budget.
pub const DIM_BUDGET_ENV: &str = "CUBACODE_DIM_BUDGET";
/// Dimension budget granted by `--big`.
pub const BIG_DIM_BUDGET: usize = 1 << 16;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit status 2.
    Validation(String),
    /// Numerical failure: exit status 1.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => write!(f, "{}", m.replace('\n', " ")),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(format!("csv error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Parser, Debug, Clone)]
#[command(name = "cubacode", version, about = "Coherent-state cubature codes: construction, verification, benchmarks")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// List catalog entries.
    Catalog,
    /// Describe a code.
    Show(CodeArgs),
    /// Print ((n, K, d_E, <t,d,d>)).
    Params {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        opts: MomentOpts,
    },
    /// Moment-matching table per total degree.
    Moments {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        opts: MomentOpts,
        /// Highest total degree |p|+|q| listed.
        #[arg(long, default_value_t = 12)]
        max_degree: u32,
    },
    /// Design-size bounds per logical constellation.
    Bounds {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = MOMENT_TOL)]
        tol: f64,
    },
    /// Finite-energy Knill–Laflamme report for pure loss.
    Kl {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Largest total number of losses |q|.
        #[arg(long, default_value_t = 2)]
        max_loss: u32,
    },
    /// Z- and X-type stabilizer residuals.
    Stab {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Fock cutoff per mode (default: chosen from degree and amplitude).
        #[arg(long)]
        cutoff: Option<usize>,
        /// JSON file with annihilation polynomials [{"terms": [{"u": [..], "re": .., "im": ..}]}].
        #[arg(long)]
        poly: Option<PathBuf>,
    },
    /// Pure-loss benchmarks.
    #[command(subcommand)]
    Bench(Bench),
}

#[derive(Subcommand, Debug, Clone)]
pub enum Bench {
    /// Fidelity against amplitude scale at fixed gamma.
    SweepAlpha {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        /// Scale grid a:b:n.
        #[arg(long, default_value = "0.5:5:46")]
        grid: String,
        #[command(flatten)]
        bench: BenchOpts,
    },
    /// Fidelity against gamma at a fixed or optimized scale.
    SweepGamma {
        #[command(flatten)]
        code: CodeArgs,
        /// Scale, or "auto" to optimize at --gamma-ref.
        #[arg(long, default_value = "auto")]
        alpha_op: String,
        #[arg(long, default_value_t = 0.1)]
        gamma_ref: f64,
        /// Gamma values a:b:n or a comma list.
        #[arg(long, default_value = "0:0.2:11")]
        gammas: String,
        #[arg(long, default_value = "0.5:5:46")]
        grid: String,
        #[command(flatten)]
        bench: BenchOpts,
    },
    /// Infidelity ratio (1−F_QSC)/(1−F_QCC) with scales optimized at --gamma-ref.
    Pair {
        /// Single-shell code: catalog name or code file.
        #[arg(long)]
        qsc: String,
        /// Cubature code: catalog name or code file.
        #[arg(long)]
        qcc: String,
        #[arg(long, default_value = "0.05,0.1,0.15,0.2")]
        gammas: String,
        #[arg(long, default_value_t = 0.1)]
        gamma_ref: f64,
        #[arg(long, default_value = "0.5:5:46")]
        grid: String,
        /// Allow multimode pairs and their dimension budget.
        #[arg(long)]
        big: bool,
        #[command(flatten)]
        bench: BenchOpts,
    },
}

#[derive(Args, Debug, Clone)]
pub struct BenchOpts {
    /// Fock cutoff per mode.
    #[arg(long, default_value_t = 40)]
    pub cutoff: usize,
    /// Rescale codes to this mean photon number first, so the scale is the amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub nbar: f64,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct MomentOpts {
    #[arg(long, default_value_t = DEFAULT_CEILING)]
    pub ceiling: u32,
    #[arg(long, default_value_t = MOMENT_TOL)]
    pub tol: f64,
}

/// Exactly one code source: a positional catalog name or file, `--catalog`, or `--file`.
#[derive(Args, Debug, Clone, Default)]
pub struct CodeArgs {
    /// Catalog name or path to a code file.
    pub code: Option<String>,
    /// Same as the positional argument.
    #[arg(long = "code", value_name = "CODE")]
    pub code_flag: Option<String>,
    #[arg(long)]
    pub catalog: Option<String>,
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated shell radii.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long = "D")]
    pub d: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    /// Rescale to this mean photon number.
    #[arg(long)]
    pub normalize: Option<f64>,
}

impl CodeArgs {
    fn params(&self) -> Params {
        let mut p = Params::new();
        for (key, v) in [("m", self.m), ("K", self.k), ("p", self.p), ("D", self.d), ("tau", self.tau), ("r1", self.r1), ("r2", self.r2)] {
            if let Some(v) = v {
                p.insert(key, vec![v]);
            }
        }
        if let Some(r) = &self.radii {
            p.insert("radii", r.clone());
        }
        p
    }

    pub fn load(&self) -> CliResult<CodeSpec> {
        let sources = [self.code.is_some(), self.code_flag.is_some(), self.catalog.is_some(), self.file.is_some()];
        match sources.iter().filter(|&&s| s).count() {
            0 => return Err(invalid("no code given: pass a catalog name, --catalog NAME or --file PATH")),
            1 => {}
            _ => return Err(invalid("give exactly one code source")),
        }
        let code = if let Some(path) = &self.file {
            self.no_params()?;
            read_code(path)?
        } else {
            let name = self.catalog.as_ref().or(self.code.as_ref()).or(self.code_flag.as_ref()).unwrap();
            load_named(name, &self.params(), self.catalog.is_some())?
        };
        match self.normalize {
            Some(n) => Ok(normalize_energy(&code, n)?.0),
            None => Ok(code),
        }
    }

    fn no_params(&self) -> CliResult<()> {
        if self.params().is_empty() {
            Ok(())
        } else {
            Err(invalid("catalog parameters cannot be combined with --file"))
        }
    }

    fn describe_source(&self) -> String {
        let mut s = match (&self.catalog, &self.file, self.code.as_ref().or(self.code_flag.as_ref())) {
            (Some(c), _, _) => c.clone(),
            (_, Some(f), _) => f.display().to_string(),
            (_, _, Some(c)) => c.clone(),
            _ => String::new(),
        };
        for (k, v) in self.params().iter() {
            s.push_str(&format!(" {k}={}", join(v)));
        }
        if let Some(n) = self.normalize {
            s.push_str(&format!(" normalize={n}"));
        }
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// A catalog name, or else a readable file.
fn load_named(name: &str, params: &Params, catalog_only: bool) -> CliResult<CodeSpec> {
    let known = catalog_names().iter().any(|(n, _)| *n == name);
    if !known && !catalog_only && Path::new(name).is_file() {
        if !params.is_empty() {
            return Err(invalid("catalog parameters cannot be combined with a code file"));
        }
        return Ok(read_code(Path::new(name))?);
    }
    Ok(build_catalog_code(name, params)?)
}

fn dim_budget() -> CliResult<usize> {
    match std::env::var(DIM_BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("{DIM_BUDGET_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_DIM_BUDGET),
    }
}

fn space(modes: usize, cutoff: usize) -> CliResult<FockSpace> {
    Ok(FockSpace::with_budget(modes, cutoff, dim_budget()?)?)
}

/// `a:b:n` evenly spaced, or an explicit comma list.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = || invalid(format!("grid '{s}' is neither a:b:n nor a comma list"));
    let parts: Vec<&str> = s.split(':').collect();
    let out = if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if n == 0 || b < a {
            return Err(bad());
        }
        linear_grid(a, b, n)
    } else if parts.len() == 1 {
        s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<CliResult<Vec<_>>>()?
    } else {
        return Err(bad());
    };
    if out.is_empty() || out.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(out)
}

/// Human-readable summary of a catalog entry.
pub fn describe(code: &CodeSpec) -> String {
    let counts: Vec<usize> = code.logicals().iter().map(|c| c.len()).collect();
    let points = if counts.iter().all(|&c| c == counts[0]) {
        format!("{} points each", counts[0])
    } else {
        format!("{} points", counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("/"))
    };
    let shells = if code.is_single_shell() {
        "single shell".to_string()
    } else {
        format!("{} shells", code.union_radii().len())
    };
    let mut out = format!(
        "{}: {} mode{}, {} codewords, {points}, {shells}\n",
        code.name(),
        code.modes(),
        if code.modes() == 1 { "" } else { "s" },
        code.dimension()
    );
    out.push_str(&format!(
        "shell radii: {}\n",
        code.union_radii().iter().map(|r| format!("{r:.6}")).collect::<Vec<_>>().join(", ")
    ));
    for (k, c) in code.logicals().iter().enumerate() {
        let masses = c.shell_masses();
        out.push_str(&format!(
            "codeword {k}: nbar {:.6}, shell masses {}\n",
            c.mean_photon_number(),
            masses.iter().map(|(r, m)| format!("{m:.6}@{r:.4}")).collect::<Vec<_>>().join(" ")
        ));
    }
    match code.claimed_degree() {
        Some(t) => out.push_str(&format!("claimed degree: {t}\n")),
        None => out.push_str("claimed degree: none\n"),
    }
    if let Some(r) = &code.reference {
        out.push_str(&format!("reference parameters: {r}\n"));
    }
    for w in &code.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out
}

const CSV_HEADER: [&str; 9] = ["code", "gamma", "scale", "nbar", "fidelity", "infidelity", "cutoff", "tail_mass", "kraus_lmax"];

fn fmt_f(x: f64) -> String {
    format!("{x:.11e}")
}

fn bench_record(name: &str, p: &BenchPoint) -> Vec<String> {
    vec![
        name.to_string(),
        fmt_f(p.gamma),
        fmt_f(p.scale),
        fmt_f(p.nbar),
        fmt_f(p.fidelity),
        fmt_f(p.infidelity()),
        p.cutoff.to_string(),
        fmt_f(p.tail_mass),
        p.kraus_lmax.to_string(),
    ]
}

fn write_records<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    write_records(std::fs::File::create(path)?, header, rows)
}

fn print_rows(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    write_records(out, header, rows)
}

fn bench_code(code: CodeSpec, nbar: f64) -> CliResult<CodeSpec> {
    Ok(normalize_energy(&code, nbar)?.0)
}

fn threads(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(invalid("--jobs must be at least 1"));
        }
        b = b.num_threads(j);
    }
    b.build().map_err(|e| invalid(format!("thread pool: {e}")))
}

/// Skips scales whose codewords do not fit the cutoff.
fn sweep_points(pool: &rayon::ThreadPool, code: &CodeSpec, gamma: f64, grid: &[f64], s: &FockSpace) -> CliResult<Vec<BenchPoint>> {
    let results: Vec<_> = pool.install(|| grid.par_iter().map(|&x| evaluate_point(code, gamma, x, s)).collect());
    let mut out = Vec::new();
    for r in results {
        match r {
            Ok(p) => out.push(p),
            Err(Error::CutoffTooSmall { .. }) | Err(Error::DegenerateCodewords(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if out.is_empty() {
        return Err(Error::NoAdmissibleScale.into());
    }
    Ok(out)
}

fn gamma_sweep(pool: &rayon::ThreadPool, code: &CodeSpec, gammas: &[f64], scale: f64, s: &FockSpace) -> CliResult<Vec<BenchPoint>> {
    let results: Vec<_> = pool.install(|| gammas.par_iter().map(|&g| evaluate_point(code, g, scale, s)).collect());
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

/// Pair benchmark rows: `[gamma, qsc_scale, qcc_scale, qsc_infidelity, qcc_infidelity, r_infidelity]`.
pub fn pair_bench(
    qsc: &CodeSpec,
    qcc: &CodeSpec,
    gammas: &[f64],
    gamma_ref: f64,
    grid: &[f64],
    space: &FockSpace,
    pool: &rayon::ThreadPool,
) -> CliResult<Vec<[f64; 6]>> {
    if qsc.dimension() != qcc.dimension() {
        return Err(invalid(format!("pair codes encode K = {} and K = {}", qsc.dimension(), qcc.dimension())));
    }
    if qsc.modes() != qcc.modes() {
        return Err(invalid(format!("pair codes have {} and {} modes", qsc.modes(), qcc.modes())));
    }
    let (a, b) = pool.install(|| {
        rayon::join(|| optimal_scale(qsc, gamma_ref, space, grid), || optimal_scale(qcc, gamma_ref, space, grid))
    });
    let (a, b) = (a?, b?);
    let fs = gamma_sweep(pool, qsc, gammas, a.scale, space)?;
    let fc = gamma_sweep(pool, qcc, gammas, b.scale, space)?;
    Ok(gammas
        .iter()
        .zip(fs.iter().zip(&fc))
        .map(|(&g, (s, c))| [g, a.scale, b.scale, s.infidelity(), c.infidelity(), s.infidelity() / c.infidelity()])
        .collect())
}

/// Smallest cutoff at which `a^degree` acts on every scaled coherent
/// component with truncation tail below `1e−24`.
fn auto_stab_cutoff(code: &CodeSpec, scale: f64, degree: u32) -> usize {
    let r2 = (code.max_radius() * scale).powi(2);
    (2..4096).find(|&n| n > degree as usize && poisson_tail(r2, n - degree as usize) < 1e-24).unwrap_or(4096)
}

fn header(out: &mut dyn Write, cmd: &str, fields: &[(&str, String)]) -> CliResult<()> {
    let parts: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "# cubacode {cmd} | {}", parts.join(" "))?;
    Ok(())
}

/// Runs one command, writing the report to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let pool = threads(config.jobs)?;
    let jobs = config.jobs.map(|j| j.to_string()).unwrap_or_else(|| "auto".into());
    match &config.command {
        Command::Catalog => {
            for (name, summary) in catalog_names() {
                writeln!(out, "{name:<20} {summary}")?;
            }
        }
        Command::Show(args) => {
            let code = args.load()?;
            write!(out, "{}", describe(&code))?;
        }
        Command::Params { code: args, opts } => {
            let code = args.load()?;
            header(out, "params", &[("code", args.describe_source()), ("ceiling", opts.ceiling.to_string()), ("tol", opts.tol.to_string())])?;
            let p = code_params(&code, opts.ceiling, opts.tol)?;
            writeln!(out, "{p}")?;
            if let Some(r) = &code.reference {
                writeln!(out, "reference {r}")?;
            }
        }
        Command::Moments { code: args, opts, max_degree } => {
            let code = args.load()?;
            header(
                out,
                "moments",
                &[
                    ("code", args.describe_source()),
                    ("ceiling", opts.ceiling.to_string()),
                    ("tol", opts.tol.to_string()),
                    ("max_degree", max_degree.to_string()),
                ],
            )?;
            let t = moment_match_degree(&code, opts.ceiling, opts.tol)?;
            writeln!(out, "moment_match_degree {t}")?;
            for (k, c) in code.logicals().iter().enumerate() {
                writeln!(out, "codeword {k} design_degree {}", design_degree(c, opts.ceiling, opts.tol)?)?;
            }
            let m = MomentMatcher::new(&code, *max_degree, opts.tol)?;
            writeln!(out, "degree,max_deviation")?;
            let n = code.modes();
            for level in 0..=*max_degree {
                let mut worst = 0.0f64;
                for a in 0..=level {
                    for p in cubacode_core::moments::indices_of_degree(n, a) {
                        for q in cubacode_core::moments::indices_of_degree(n, level - a) {
                            worst = worst.max(m.deviation(&p, &q));
                        }
                    }
                }
                writeln!(out, "{level},{}", fmt_f(worst))?;
            }
        }
        Command::Bounds { code: args, tol } => {
            let code = args.load()?;
            header(out, "bounds", &[("code", args.describe_source()), ("tol", tol.to_string())])?;
            writeln!(out, "codeword,domain,t,fisher_min,moller_min,tchakaloff_max,actual,tight,conservative")?;
            for (k, b) in code_bounds(&code, *tol)?.iter().enumerate() {
                writeln!(
                    out,
                    "{k},{},{},{},{},{},{},{},{}",
                    b.domain,
                    b.t,
                    b.fisher_min,
                    b.moller_min.map(|x| x.to_string()).unwrap_or_else(|| "-".into()),
                    b.tchakaloff_max,
                    b.actual,
                    b.tight,
                    b.conservative
                )?;
            }
        }
        Command::Kl { code: args, scale, max_loss } => {
            let code = args.load()?;
            header(out, "kl", &[("code", args.describe_source()), ("scale", scale.to_string()), ("max_loss", max_loss.to_string())])?;
            let r = kl_report(&code, *max_loss, *scale)?;
            writeln!(out, "errors: {} ({})", r.errors.len(), r.error_set_label)?;
            writeln!(out, "off_diag_max {}", fmt_f(r.off_diag_max))?;
            writeln!(out, "diag_spread_max {}", fmt_f(r.diag_spread_max))?;
            writeln!(out, "diag_spread_raw {}", fmt_f(r.diag_spread_raw))?;
        }
        Command::Stab { code: args, scale, cutoff, poly } => {
            let code = args.load()?;
            let polys: Vec<AnnihilationPolynomial> = match poly {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                    parse_polynomials(&text).map_err(|e| match e {
                        Error::Format { path: field, message } => {
                            invalid(format!("{}: {field}: {message}", path.display()))
                        }
                        other => other.into(),
                    })?
                }
                None => ztype_polynomials(&code)?,
            };
            let degree = polys.iter().map(|p| p.degree()).max().unwrap_or(0);
            let cutoff = cutoff.unwrap_or_else(|| auto_stab_cutoff(&code, *scale, degree));
            header(
                out,
                "stab",
                &[("code", args.describe_source()), ("scale", scale.to_string()), ("cutoff", cutoff.to_string())],
            )?;
            let s = space(code.modes(), cutoff)?;
            let z = verify_ztype(&code, &polys, *scale, &s)?;
            writeln!(out, "ztype,polynomial,degree,{}", (0..code.dimension()).map(|k| format!("codeword_{k}")).collect::<Vec<_>>().join(","))?;
            for (i, (p, row)) in polys.iter().zip(&z.residuals).enumerate() {
                writeln!(out, "z,{i},{},{}", p.degree(), row.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(","))?;
            }
            for w in &z.warnings {
                writeln!(out, "warning: {w}")?;
            }
            let order = code.logicals().iter().map(phase_symmetry_order).min().unwrap_or(1);
            let sym = Rotation::global_phase(code.modes(), 2.0 * PI / order as f64);
            match verify_xtype(&code, &sym, *scale, &s) {
                Ok(x) => writeln!(
                    out,
                    "xtype,phase 2pi/{order},{:?},{}",
                    x.method,
                    x.residuals.iter().map(|r| fmt_f(*r)).collect::<Vec<_>>().join(",")
                )?,
                Err(Error::SymmetryMismatch(k)) => writeln!(out, "xtype,phase 2pi/{order},codeword {k} not preserved")?,
                Err(e) => return Err(e.into()),
            }
            if !code.is_single_shell() {
                match containment_witness(&code, *scale, &s) {
                    Ok(w) => writeln!(
                        out,
                        "witness,z {},x {},outside {}",
                        fmt_f(w.z_residual),
                        fmt_f(w.x_residual),
                        fmt_f(w.outside_norm)
                    )?,
                    Err(e) if e.is_validation() => writeln!(out, "witness,none ({e})")?,
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Command::Bench(b) => run_bench(b, &pool, &jobs, out)?,
    }
    Ok(())
}

fn run_bench(b: &Bench, pool: &rayon::ThreadPool, jobs: &str, out: &mut dyn Write) -> CliResult<()> {
    match b {
        Bench::SweepAlpha { code: args, gamma, grid, bench } => {
            let code = bench_code(args.load()?, bench.nbar)?;
            let grid_v = parse_grid(grid)?;
            header(
                out,
                "bench sweep-alpha",
                &[
                    ("code", args.describe_source()),
                    ("gamma", gamma.to_string()),
                    ("grid", grid.clone()),
                    ("cutoff", bench.cutoff.to_string()),
                    ("nbar", bench.nbar.to_string()),
                    ("jobs", jobs.to_string()),
                ],
            )?;
            let s = space(code.modes(), bench.cutoff)?;
            let points = sweep_points(pool, &code, *gamma, &grid_v, &s)?;
            let rows: Vec<_> = points.iter().map(|p| bench_record(code.name(), p)).collect();
            emit(out, &CSV_HEADER, &rows, bench.out.as_deref())?;
        }
        Bench::SweepGamma { code: args, alpha_op, gamma_ref, gammas, grid, bench } => {
            let code = bench_code(args.load()?, bench.nbar)?;
            let gammas_v = parse_grid(gammas)?;
            let grid_v = parse_grid(grid)?;
            let s = space(code.modes(), bench.cutoff)?;
            let scale = if alpha_op == "auto" {
                pool.install(|| optimal_scale(&code, *gamma_ref, &s, &grid_v))?.scale
            } else {
                alpha_op.parse::<f64>().map_err(|_| invalid(format!("--alpha-op '{alpha_op}' is neither auto nor a number")))?
            };
            header(
                out,
                "bench sweep-gamma",
                &[
                    ("code", args.describe_source()),
                    ("alpha_op", alpha_op.clone()),
                    ("gamma_ref", gamma_ref.to_string()),
                    ("gammas", gammas.clone()),
                    ("grid", grid.clone()),
                    ("cutoff", bench.cutoff.to_string()),
                    ("nbar", bench.nbar.to_string()),
                    ("jobs", jobs.to_string()),
                    ("scale", fmt_f(scale)),
                ],
            )?;
            let points = gamma_sweep(pool, &code, &gammas_v, scale, &s)?;
            let rows: Vec<_> = points.iter().map(|p| bench_record(code.name(), p)).collect();
            emit(out, &CSV_HEADER, &rows, bench.out.as_deref())?;
        }
        Bench::Pair { qsc, qcc, gammas, gamma_ref, grid, big, bench } => {
            let load = |s: &str| -> CliResult<CodeSpec> { bench_code(load_named(s, &Params::new(), false)?, bench.nbar) };
            let (a, c) = (load(qsc)?, load(qcc)?);
            let gammas_v = parse_grid(gammas)?;
            let grid_v = parse_grid(grid)?;
            let modes = a.modes().max(c.modes());
            if modes > 1 && !big {
                return Err(invalid(format!(
                    "dimension budget: a {modes}-mode pair at cutoff {} spans {} states; pass --big",
                    bench.cutoff,
                    bench.cutoff.saturating_pow(modes as u32)
                )));
            }
            let budget = if *big { dim_budget()?.max(BIG_DIM_BUDGET) } else { dim_budget()? };
            let s = FockSpace::with_budget(modes, bench.cutoff, budget)?;
            header(
                out,
                "bench pair",
                &[
                    ("qsc", qsc.clone()),
                    ("qcc", qcc.clone()),
                    ("gammas", gammas.clone()),
                    ("gamma_ref", gamma_ref.to_string()),
                    ("grid", grid.clone()),
                    ("cutoff", bench.cutoff.to_string()),
                    ("nbar", bench.nbar.to_string()),
                    ("big", big.to_string()),
                    ("jobs", jobs.to_string()),
                ],
            )?;
            let rows: Vec<Vec<String>> = pair_bench(&a, &c, &gammas_v, *gamma_ref, &grid_v, &s, pool)?
                .iter()
                .map(|r| {
                    let mut v = vec![format!("{}/{}", a.name(), c.name())];
                    v.extend(r.iter().map(|x| fmt_f(*x)));
                    v
                })
                .collect();
            let head = ["pair", "gamma", "qsc_scale", "qcc_scale", "qsc_infidelity", "qcc_infidelity", "r_infidelity"];
            emit(out, &head, &rows, bench.out.as_deref())?;
        }
    }
    Ok(())
}

fn emit(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>], path: Option<&Path>) -> CliResult<()> {
    print_rows(out, header, rows)?;
    if let Some(p) = path {
        write_csv(p, header, rows)?;
    }
    Ok(())
}
