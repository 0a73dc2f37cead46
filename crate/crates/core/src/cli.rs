//! Command-line driver: `assemble`, `spectrum`, `convergence`, `condition`
//! and `dispersion`. Every command writes CSV files into `--out`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use crate::assembly::{
    assemble_dc, assemble_standard, default_rule, refine_spectrum, MatrixPair, PenaltyConfig,
    ProblemKind,
};
use crate::closedform::{
    boundary_leading_constants, constraint_reduce, dispersion_boundary_rows, dispersion_interior,
    dispersion_sweep, expand_constrained, infinite_penalty_constraints, taylor_coefficient,
    Constraint, DispersionCase,
};
use crate::eigensolve::{gevp, Spectrum};
use crate::error::{Error, Result};
use crate::metrics::{
    condition_from_extremes, convergence_rates, eigenfunction_errors, eigenvalue_errors,
    exact_spectrum, fmt_f64, write_spectrum_csv,
};
use crate::splines::{BreakpointGrid, SplineSpace};
use crate::tensorize::{kron_sum_matrices, separable_spectrum, TensorSystem, DEFAULT_DENSE_CAP};

#[derive(Debug, Parser)]
#[command(name = "dciga", version, about = "Boundary-penalized spline eigenvalue experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write stiffness and mass matrices as CSV.
    Assemble(CommonArgs),
    /// Solve and write eigenvalue (and 1D eigenfunction) errors.
    Spectrum(SpectrumArgs),
    /// Error table and least-squares rates over a list of 1D meshes.
    Convergence(ConvergenceArgs),
    /// Condition numbers of the standard and corrected problems.
    Condition(CommonArgs),
    /// Dispersion relations of the two model discretizations.
    Dispersion(DispersionArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DcMode {
    Off,
    On,
    Both,
    Infinite,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, default_value = "dirichlet")]
    pub problem: String,
    /// Degree per axis (one value is broadcast).
    #[arg(short = 'p', long = "degree", value_delimiter = ',', default_value = "3")]
    pub degree: Vec<usize>,
    /// Elements per axis (one value is broadcast).
    #[arg(short = 'N', long = "elements", value_delimiter = ',')]
    pub elements: Vec<usize>,
    /// Breakpoint file per axis (one value is broadcast).
    #[arg(long = "mesh-file", value_delimiter = ',')]
    pub mesh_file: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Correction variant; the default depends on the command.
    #[arg(long, value_enum)]
    pub dc: Option<DcMode>,
    #[arg(long = "eta-a", value_delimiter = ',', allow_negative_numbers = true)]
    pub eta_a: Vec<f64>,
    #[arg(long = "eta-b", value_delimiter = ',', allow_negative_numbers = true)]
    pub eta_b: Vec<f64>,
    #[arg(short = 'o', long = "out", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of lowest modes to write (default: all).
    #[arg(long)]
    pub modes: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// 1-based modes to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "1,6")]
    pub modes: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DispersionArgs {
    #[arg(long = "case", default_value = "cubic-dirichlet")]
    pub case: String,
    #[arg(long = "omega-min", default_value_t = 0.05, allow_negative_numbers = true)]
    pub omega_min: f64,
    #[arg(long = "omega-max", default_value_t = std::f64::consts::PI, allow_negative_numbers = true)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(short = 'o', long = "out", default_value = ".")]
    pub out: PathBuf,
}

/// Discretization variant of one solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Standard,
    Corrected,
    Infinite,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Standard => "std",
            Variant::Corrected => "dc",
            Variant::Infinite => "inf",
        }
    }
}

fn variants(mode: DcMode) -> Vec<Variant> {
    match mode {
        DcMode::Off => vec![Variant::Standard],
        DcMode::On => vec![Variant::Corrected],
        DcMode::Both => vec![Variant::Standard, Variant::Corrected],
        DcMode::Infinite => vec![Variant::Infinite],
    }
}

/// Resolved per-axis settings.
#[derive(Debug, Clone)]
pub struct AxisConfig {
    pub degree: usize,
    pub grid: BreakpointGrid,
    pub mesh_file: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub dim: usize,
    pub axes: Vec<AxisConfig>,
    pub eta_a: Option<Vec<f64>>,
    pub eta_b: Option<Vec<f64>>,
    pub dc: DcMode,
    pub out: PathBuf,
}

fn broadcast<T: Clone>(v: &[T], dim: usize, what: &str) -> Result<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); dim]),
        n if n == dim => Ok(v.to_vec()),
        n => Err(Error::InvalidArgument(format!(
            "{what} takes 1 or {dim} values, got {n}"
        ))),
    }
}

impl ExperimentConfig {
    pub fn from_args(args: &CommonArgs, default_dc: DcMode) -> Result<Self> {
        let problem: ProblemKind = args.problem.parse()?;
        if !(1..=3).contains(&args.dim) {
            return Err(Error::InvalidArgument(format!("--dim must be 1, 2 or 3, got {}", args.dim)));
        }
        let dim = args.dim;
        let degrees = broadcast(&args.degree, dim, "--degree")?;
        if let Some(p) = degrees.iter().find(|p| **p == 0) {
            return Err(Error::InvalidArgument(format!("degree must be >= 1, got {p}")));
        }
        let axes = if args.mesh_file.is_empty() {
            if args.elements.is_empty() {
                return Err(Error::InvalidArgument("give -N or --mesh-file".into()));
            }
            let ns = broadcast(&args.elements, dim, "--elements")?;
            degrees
                .iter()
                .zip(ns)
                .map(|(&degree, n)| {
                    Ok(AxisConfig {
                        degree,
                        grid: BreakpointGrid::uniform(n)?,
                        mesh_file: None,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            let files = broadcast(&args.mesh_file, dim, "--mesh-file")?;
            let ns = if args.elements.is_empty() {
                None
            } else {
                Some(broadcast(&args.elements, dim, "--elements")?)
            };
            let mut axes = Vec::with_capacity(dim);
            for (axis, (&degree, file)) in degrees.iter().zip(files).enumerate() {
                let grid = BreakpointGrid::read(&file).map_err(|e| match e {
                    Error::Io(io) => Error::InvalidArgument(format!("{}: {io}", file.display())),
                    other => Error::InvalidArgument(format!("{}: {other}", file.display())),
                })?;
                if let Some(ns) = &ns {
                    if ns[axis] != grid.elements() {
                        return Err(Error::InvalidArgument(format!(
                            "-N {} disagrees with {} ({} elements)",
                            ns[axis],
                            file.display(),
                            grid.elements()
                        )));
                    }
                }
                axes.push(AxisConfig {
                    degree,
                    grid,
                    mesh_file: Some(file),
                });
            }
            axes
        };
        let opt = |v: &Vec<f64>| if v.is_empty() { None } else { Some(v.clone()) };
        let cfg = Self {
            problem,
            dim,
            axes,
            eta_a: opt(&args.eta_a),
            eta_b: opt(&args.eta_b),
            dc: args.dc.unwrap_or(default_dc),
            out: args.out.clone(),
        };
        for axis in &cfg.axes {
            cfg.penalty(axis.degree).validate(axis.degree)?;
        }
        Ok(cfg)
    }

    /// Penalty for an axis of degree `p`; given lists apply to every axis.
    pub fn penalty(&self, p: usize) -> PenaltyConfig {
        let base = PenaltyConfig::default_for(self.problem, p);
        PenaltyConfig::with_coefficients(
            self.problem,
            self.eta_a.clone().unwrap_or(base.eta_a),
            self.eta_b.clone().unwrap_or(base.eta_b),
        )
    }

    pub fn spaces(&self) -> Vec<SplineSpace> {
        self.axes
            .iter()
            .map(|a| SplineSpace::new(a.degree, a.grid.clone()))
            .collect()
    }

    /// `#` header lines shared by every output.
    pub fn metadata(&self, command: &str) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(",");
        let mut meta = vec![
            ("command".to_string(), command.to_string()),
            ("problem".to_string(), self.problem.to_string()),
            ("dim".to_string(), self.dim.to_string()),
            (
                "degree".to_string(),
                join(self.axes.iter().map(|a| a.degree.to_string()).collect()),
            ),
            (
                "elements".to_string(),
                join(self.axes.iter().map(|a| a.grid.elements().to_string()).collect()),
            ),
        ];
        if self.axes.iter().any(|a| a.mesh_file.is_some()) {
            meta.push((
                "mesh_file".to_string(),
                join(
                    self.axes
                        .iter()
                        .map(|a| a.mesh_file.as_ref().map(|p| p.display().to_string()).unwrap_or_default())
                        .collect(),
                ),
            ));
        }
        meta.push(("dc".to_string(), format!("{:?}", self.dc).to_lowercase()));
        let penalties: Vec<String> = self.axes.iter().map(|a| self.penalty(a.degree).describe()).collect();
        meta.push(("penalties".to_string(), penalties.join(" | ")));
        meta
    }
}

/// Solved 1D problem of one axis.
#[derive(Debug, Clone)]
pub struct AxisSolution {
    pub space: SplineSpace,
    pub pair: MatrixPair,
    /// Eigenvectors hold retained coefficients (constraints re-expanded).
    pub spectrum: Spectrum,
    pub constraints: Option<Vec<Constraint>>,
}

/// Assembles and solves one axis. With `refine`, eigenvalues are replaced
/// by energy-form Rayleigh quotients of the computed eigenvectors.
pub fn solve_axis(
    space: &SplineSpace,
    kind: ProblemKind,
    variant: Variant,
    penalty: &PenaltyConfig,
    refine: bool,
) -> Result<AxisSolution> {
    let rule = default_rule(space)?;
    let (pair, constraints) = match variant {
        Variant::Standard => (assemble_standard(space, kind, &rule)?, None),
        Variant::Corrected => (assemble_dc(space, penalty, &rule)?, None),
        Variant::Infinite => {
            let c = infinite_penalty_constraints(space, kind)?;
            let reduced = constraint_reduce(&assemble_standard(space, kind, &rule)?, &c)?;
            (reduced, Some(c))
        }
    };
    let mut spectrum = gevp(&pair, true)?;
    if let Some(c) = &constraints {
        let u = spectrum.vectors.as_ref().expect("vectors requested");
        let full_dim = kind.dofs(space);
        let cols = (0..u.ncols())
            .map(|j| {
                let col: Vec<f64> = u.column(j).iter().copied().collect();
                expand_constrained(&col, full_dim, c).map(nalgebra::DVector::from_vec)
            })
            .collect::<Result<Vec<_>>>()?;
        spectrum.vectors = Some(DMatrix::from_columns(&cols));
    }
    if refine {
        let pen = (variant == Variant::Corrected).then_some(penalty);
        spectrum = refine_spectrum(space, kind, pen, &spectrum)?;
    }
    Ok(AxisSolution {
        space: space.clone(),
        pair,
        spectrum,
        constraints,
    })
}

fn solve_axes(cfg: &ExperimentConfig, variant: Variant, refine: bool) -> Result<Vec<AxisSolution>> {
    cfg.spaces()
        .iter()
        .map(|s| solve_axis(s, cfg.problem, variant, &cfg.penalty(s.degree()), refine))
        .collect()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Dense CSV with a one-line header.
pub fn write_matrix_csv(out: &mut impl Write, a: &DMatrix<f64>, pair: &MatrixPair) -> Result<()> {
    writeln!(
        out,
        "# rows={} cols={} kind={} degree={} elements={} corrected={}",
        a.nrows(),
        a.ncols(),
        pair.meta.kind,
        pair.meta.degree,
        pair.meta.elements,
        pair.meta.corrected
    )?;
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| fmt_f64(a[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn global_pair(cfg: &ExperimentConfig, variant: Variant) -> Result<MatrixPair> {
    let mut pairs = Vec::with_capacity(cfg.dim);
    for space in cfg.spaces() {
        let rule = default_rule(&space)?;
        let pair = match variant {
            Variant::Standard => assemble_standard(&space, cfg.problem, &rule)?,
            Variant::Corrected => assemble_dc(&space, &cfg.penalty(space.degree()), &rule)?,
            Variant::Infinite => {
                let c = infinite_penalty_constraints(&space, cfg.problem)?;
                constraint_reduce(&assemble_standard(&space, cfg.problem, &rule)?, &c)?
            }
        };
        pairs.push(pair);
    }
    if pairs.len() == 1 {
        return Ok(pairs.pop().expect("one axis"));
    }
    kron_sum_matrices(&TensorSystem::new(pairs)?, DEFAULT_DENSE_CAP)
}

pub fn cmd_assemble(args: &CommonArgs) -> Result<Vec<PathBuf>> {
    let cfg = ExperimentConfig::from_args(args, DcMode::Off)?;
    let mut written = Vec::new();
    for variant in variants(cfg.dc) {
        let pair = global_pair(&cfg, variant)?;
        let suffix = match variant {
            Variant::Standard => "",
            Variant::Corrected => "_dc",
            Variant::Infinite => "_inf",
        };
        for (name, a) in [("K", &pair.stiffness), ("M", &pair.mass)] {
            let file = format!("{name}{suffix}.csv");
            let mut w = create(&cfg.out, &file)?;
            write_matrix_csv(&mut w, a, &pair)?;
            w.flush()?;
            written.push(cfg.out.join(file));
        }
    }
    Ok(written)
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<Vec<PathBuf>> {
    let cfg = ExperimentConfig::from_args(&args.common, DcMode::Off)?;
    let mut written = Vec::new();
    for variant in variants(cfg.dc) {
        let axes = solve_axes(&cfg, variant, true)?;
        let sys = TensorSystem::new(axes.iter().map(|a| a.pair.clone()).collect())?;
        let spectra: Vec<Spectrum> = axes.iter().map(|a| a.spectrum.clone()).collect();
        let sep = separable_spectrum(&sys, &spectra)?;
        let count = args.modes.unwrap_or(sep.len()).min(sep.len());
        let exact = exact_spectrum(cfg.problem, cfg.dim, sep.len())?;
        let mut report = eigenvalue_errors(&sep.values[..count], &exact)?;
        if cfg.dim == 1 {
            let vectors = axes[0].spectrum.vectors.as_ref().expect("vectors requested");
            eigenfunction_errors(&axes[0].space, cfg.problem, vectors, &exact, &mut report, &[])?;
        }
        let mut meta = cfg.metadata("spectrum");
        meta.push(("variant".into(), variant.as_str().into()));
        meta.push(("modes".into(), format!("{count} of {}", sep.len())));
        let ambiguous: Vec<String> = report
            .modes
            .iter()
            .filter(|m| m.ambiguous)
            .map(|m| m.j.to_string())
            .collect();
        if !ambiguous.is_empty() {
            meta.push(("ambiguous_sign_modes".into(), ambiguous.join(";")));
        }
        let file = format!("spectrum_{}.csv", variant.as_str());
        let mut w = create(&cfg.out, &file)?;
        write_spectrum_csv(&mut w, &meta, &report)?;
        w.flush()?;
        written.push(cfg.out.join(file));
    }
    Ok(written)
}

struct ConvergenceRow {
    variant: Variant,
    n: usize,
    mode: usize,
    /// lambda_exact, lambda_h, rel_err, h1_err, l2_err
    values: [f64; 5],
}

pub fn cmd_convergence(args: &ConvergenceArgs) -> Result<Vec<PathBuf>> {
    let common = &args.common;
    if common.dim != 1 {
        return Err(Error::InvalidArgument("convergence runs in 1D only".into()));
    }
    if !common.mesh_file.is_empty() {
        return Err(Error::InvalidArgument(
            "convergence takes a list of uniform element counts, not mesh files".into(),
        ));
    }
    if common.elements.is_empty() {
        return Err(Error::InvalidArgument("give -N as a list of element counts".into()));
    }
    if args.modes.is_empty() || args.modes.contains(&0) {
        return Err(Error::InvalidArgument("--modes are 1-based".into()));
    }
    let levels = common.elements.clone();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut cfg0 = None;
    for &n in &levels {
        let mut single = common.clone();
        single.elements = vec![n];
        let cfg = ExperimentConfig::from_args(&single, DcMode::On)?;
        for variant in variants(cfg.dc) {
            let axes = solve_axes(&cfg, variant, true)?;
            let spec = &axes[0].spectrum;
            let exact = exact_spectrum(cfg.problem, 1, spec.len())?;
            let mut report = eigenvalue_errors(&spec.values, &exact)?;
            let modes: Vec<usize> = args.modes.iter().copied().filter(|&j| j <= spec.len()).collect();
            if modes.len() != args.modes.len() {
                return Err(Error::InvalidArgument(format!(
                    "N={n} has only {} modes",
                    spec.len()
                )));
            }
            let vectors = spec.vectors.as_ref().expect("vectors requested");
            eigenfunction_errors(&axes[0].space, cfg.problem, vectors, &exact, &mut report, &modes)?;
            for &j in &modes {
                let m = &report.modes[j - 1];
                rows.push(ConvergenceRow {
                    variant,
                    n,
                    mode: j,
                    values: [
                        m.lambda_exact,
                        m.lambda_h,
                        m.rel_err,
                        m.h1.unwrap_or(f64::NAN),
                        m.l2.unwrap_or(f64::NAN),
                    ],
                });
            }
        }
        cfg0.get_or_insert(cfg);
    }
    let cfg = cfg0.expect("at least one level");
    let mut meta = cfg.metadata("convergence");
    meta.retain(|(k, _)| k != "elements");
    meta.push((
        "elements".into(),
        levels.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
    ));
    let mut written = Vec::new();
    let mut w = create(&cfg.out, "convergence.csv")?;
    for (k, v) in &meta {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "variant,N,mode,lambda_exact,lambda_h,rel_err,h1_err,l2_err")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.variant.as_str(),
            r.n,
            r.mode,
            r.values.map(fmt_f64).join(",")
        )?;
    }
    w.flush()?;
    written.push(cfg.out.join("convergence.csv"));

    let mut distinct = levels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() >= 2 {
        let mut w = create(&cfg.out, "rates.csv")?;
        for (k, v) in &meta {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "variant,mode,quantity,rate,excluded_levels")?;
        for variant in variants(cfg.dc) {
            for &j in &args.modes {
                let sel: Vec<_> = rows.iter().filter(|r| r.variant == variant && r.mode == j).collect();
                let ns: Vec<usize> = sel.iter().map(|r| r.n).collect();
                for (name, vals) in [
                    ("rel_err", sel.iter().map(|r| r.values[2].abs()).collect::<Vec<_>>()),
                    ("h1_err", sel.iter().map(|r| r.values[3]).collect()),
                    ("l2_err", sel.iter().map(|r| r.values[4]).collect()),
                ] {
                    let fit = convergence_rates(&ns, &vals)?;
                    let excluded: Vec<String> = fit.excluded.iter().map(|&i| ns[i].to_string()).collect();
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        variant.as_str(),
                        j,
                        name,
                        fit.rate.map(fmt_f64).unwrap_or_default(),
                        excluded.join(";")
                    )?;
                }
            }
        }
        w.flush()?;
        written.push(cfg.out.join("rates.csv"));
    }
    Ok(written)
}

pub fn cmd_condition(args: &CommonArgs) -> Result<Vec<PathBuf>> {
    let cfg = ExperimentConfig::from_args(args, DcMode::Both)?;
    if cfg.problem == ProblemKind::Neumann {
        return Err(Error::InvalidArgument(
            "condition numbers need a positive smallest eigenvalue; the Neumann problem has the constant \
             mode with eigenvalue 0"
                .into(),
        ));
    }
    let corrected = match cfg.dc {
        DcMode::Infinite => Variant::Infinite,
        _ => Variant::Corrected,
    };
    let extremes = |variant| -> Result<(f64, f64)> {
        let axes = solve_axes(&cfg, variant, true)?;
        Ok(axes
            .iter()
            .fold((0.0, 0.0), |(lo, hi), a| (lo + a.spectrum.min(), hi + a.spectrum.max())))
    };
    let (min, max) = extremes(Variant::Standard)?;
    let (min_dc, max_dc) = extremes(corrected)?;
    let r = condition_from_extremes(min, max, min_dc, max_dc)?;
    let mut w = create(&cfg.out, "condition.csv")?;
    for (k, v) in cfg.metadata("condition") {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(
        w,
        "lambda_min,lambda_max,lambda_min_dc,lambda_max_dc,gamma,gamma_dc,rho,varrho_percent"
    )?;
    let vals = [
        r.lambda_min,
        r.lambda_max,
        r.lambda_min_dc,
        r.lambda_max_dc,
        r.gamma,
        r.gamma_dc,
        r.rho,
        r.varrho,
    ];
    writeln!(w, "{}", vals.map(fmt_f64).join(","))?;
    w.flush()?;
    Ok(vec![cfg.out.join("condition.csv")])
}

/// Fitted and limiting coefficients reported by `dispersion`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionFit {
    pub relation: String,
    pub quantity: &'static str,
    pub value: f64,
}

pub fn dispersion_fits(case: DispersionCase) -> Result<Vec<DispersionFit>> {
    let mut fits = Vec::new();
    let interior = |t: f64| dispersion_interior(case, t).expect("t in range");
    match case {
        DispersionCase::CubicDirichlet => {
            fits.push(DispersionFit {
                relation: "interior".into(),
                quantity: "coefficient_of_Lambda^4",
                value: taylor_coefficient(interior, 4, 1.0),
            });
            for (i, c) in boundary_leading_constants(case).into_iter().enumerate() {
                fits.push(DispersionFit {
                    relation: format!("boundary_row_{}", i + 1),
                    quantity: "limit_Lambda->0",
                    value: c,
                });
            }
        }
        DispersionCase::QuadraticNeumann => {
            fits.push(DispersionFit {
                relation: "interior".into(),
                quantity: "coefficient_of_Lambda^3",
                value: taylor_coefficient(interior, 3, 1.0),
            });
            for row in 0..case.boundary_rows() {
                let f = |t: f64| dispersion_boundary_rows(case, t).expect("t in range")[row];
                fits.push(DispersionFit {
                    relation: format!("boundary_row_{}", row + 1),
                    quantity: "coefficient_of_Lambda^2",
                    value: taylor_coefficient(f, 2, 1.0),
                });
            }
        }
    }
    Ok(fits)
}

pub fn cmd_dispersion(args: &DispersionArgs) -> Result<Vec<PathBuf>> {
    let case: DispersionCase = args.case.parse()?;
    let rows = dispersion_sweep(case, args.omega_min, args.omega_max, args.samples)?;
    let fits = dispersion_fits(case)?;
    let mut w = create(&args.out, "dispersion.csv")?;
    writeln!(w, "# command=dispersion")?;
    writeln!(w, "# case={case}")?;
    writeln!(
        w,
        "# omega_min={} omega_max={} samples={}",
        args.omega_min, args.omega_max, args.samples
    )?;
    for f in &fits {
        writeln!(w, "# {} {}={}", f.relation, f.quantity, fmt_f64(f.value))?;
    }
    let mut header = vec!["omega_h".to_string(), "Lambda".into(), "LambdaH_interior".into()];
    header.extend((1..=case.boundary_rows()).map(|i| format!("LambdaH_boundary_row_{i}")));
    writeln!(w, "{}", header.join(","))?;
    for r in &rows {
        let mut vals = vec![fmt_f64(r.omega_h), fmt_f64(r.lambda), fmt_f64(r.interior)];
        vals.extend(r.boundary.iter().map(|v| fmt_f64(*v)));
        writeln!(w, "{}", vals.join(","))?;
    }
    w.flush()?;
    Ok(vec![args.out.join("dispersion.csv")])
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    match &cli.command {
        Command::Assemble(a) => cmd_assemble(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Convergence(a) => cmd_convergence(a),
        Command::Condition(a) => cmd_condition(a),
        Command::Dispersion(a) => cmd_dispersion(a),
    }
}

/// Exit status for a failed run: 3 for numerical failures, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
