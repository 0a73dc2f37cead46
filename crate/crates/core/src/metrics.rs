//! Exact spectra of the Laplacian on `[0,1]^d` and the error, rate and
//! conditioning measures used to judge discrete spectra.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use nalgebra::DMatrix;

use crate::assembly::{full_coefficients, ProblemKind};
use crate::eigensolve::Spectrum;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::splines::SplineSpace;

/// Points per element for error integrals of non-polynomial integrands.
pub const ERROR_QUADRATURE_POINTS: usize = 12;

/// Inner products below this (after normalization) make the sign ambiguous.
const AMBIGUOUS_OVERLAP: f64 = 1e-2;

/// Exact eigenvalues `pi^2 |k|^2` with per-axis wavenumbers `k`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSpectrum {
    pub kind: ProblemKind,
    pub dim: usize,
    pub values: Vec<f64>,
    /// Per-axis wavenumbers: `>= 1` for Dirichlet, `>= 0` for Neumann.
    pub wavenumbers: Vec<Vec<usize>>,
}

/// First `count` exact eigenvalues; ties ordered lexicographically by
/// wavenumber tuple.
pub fn exact_spectrum(kind: ProblemKind, dim: usize, count: usize) -> Result<ExactSpectrum> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!("dimension must be 1..=3, got {dim}")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let lo = match kind {
        ProblemKind::Dirichlet => 1usize,
        ProblemKind::Neumann => 0usize,
    };
    // Every tuple with sum of squares <= bound^2 has all entries <= bound, so
    // the candidates are complete once the count-th one lies within bound^2.
    let mut bound = (count as f64).powf(1.0 / dim as f64).ceil() as usize + lo;
    loop {
        let mut tuples: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut t = vec![lo; dim];
        'odometer: loop {
            tuples.push((t.iter().map(|k| k * k).sum(), t.clone()));
            let mut axis = dim;
            loop {
                if axis == 0 {
                    break 'odometer;
                }
                axis -= 1;
                t[axis] += 1;
                if t[axis] <= bound {
                    break;
                }
                t[axis] = lo;
            }
        }
        tuples.sort();
        if tuples.len() >= count && tuples[count - 1].0 <= bound * bound {
            tuples.truncate(count);
            return Ok(ExactSpectrum {
                kind,
                dim,
                values: tuples.iter().map(|(s, _)| PI * PI * *s as f64).collect(),
                wavenumbers: tuples.into_iter().map(|(_, t)| t).collect(),
            });
        }
        bound *= 2;
    }
}

/// Value and derivative of the normalized 1D eigenfunction of wavenumber `k`.
pub fn eigenfunction_1d(kind: ProblemKind, k: usize, x: f64) -> (f64, f64) {
    let w = k as f64 * PI;
    match kind {
        ProblemKind::Dirichlet => (SQRT_2 * (w * x).sin(), SQRT_2 * w * (w * x).cos()),
        ProblemKind::Neumann if k == 0 => (1.0, 0.0),
        ProblemKind::Neumann => (SQRT_2 * (w * x).cos(), -SQRT_2 * w * (w * x).sin()),
    }
}

/// Error measures of one mode (1-based `j` in ascending order).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeError {
    pub j: usize,
    pub lambda_exact: f64,
    pub lambda_h: f64,
    /// `(lambda_h - lambda) / lambda`, or `lambda_h - lambda` if `absolute`.
    pub rel_err: f64,
    /// Exact eigenvalue is zero, so the error is absolute.
    pub absolute: bool,
    /// `|u - u_h|_1`.
    pub h1: Option<f64>,
    /// `||u - u_h||_0`.
    pub l2: Option<f64>,
    /// `|u - u_h|_1 / lambda`.
    pub scaled_h1: Option<f64>,
    /// Discrete and exact eigenfunctions are nearly orthogonal.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub modes: Vec<ModeError>,
}

impl ErrorReport {
    pub fn rel_errors(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.rel_err).collect()
    }

    pub fn has_eigenfunction_errors(&self) -> bool {
        self.modes.iter().any(|m| m.h1.is_some())
    }

    /// Largest `|rel_err|` over modes with index `> from` (0-based),
    /// skipping absolute-error modes.
    pub fn max_abs_rel_error_from(&self, from: usize) -> f64 {
        self.modes
            .iter()
            .skip(from)
            .filter(|m| !m.absolute)
            .map(|m| m.rel_err.abs())
            .fold(0.0, f64::max)
    }
}

/// Signed relative errors pairing discrete and exact values in sorted order.
pub fn eigenvalue_errors(values: &[f64], exact: &ExactSpectrum) -> Result<ErrorReport> {
    if values.len() > exact.values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} discrete eigenvalues but only {} exact ones",
            values.len(),
            exact.values.len()
        )));
    }
    let modes = values
        .iter()
        .zip(&exact.values)
        .enumerate()
        .map(|(i, (&lh, &l))| {
            let absolute = l == 0.0;
            ModeError {
                j: i + 1,
                lambda_exact: l,
                lambda_h: lh,
                rel_err: if absolute { lh - l } else { (lh - l) / l },
                absolute,
                h1: None,
                l2: None,
                scaled_h1: None,
                ambiguous: false,
            }
        })
        .collect();
    Ok(ErrorReport { modes })
}

/// Adds H1-seminorm, L2 and scaled H1 errors for the 1-based `modes` (all
/// modes when empty). Columns of `vectors` hold retained coefficients.
pub fn eigenfunction_errors(
    space: &SplineSpace,
    kind: ProblemKind,
    vectors: &DMatrix<f64>,
    exact: &ExactSpectrum,
    report: &mut ErrorReport,
    modes: &[usize],
) -> Result<()> {
    if exact.dim != 1 || exact.kind != kind {
        return Err(Error::InvalidArgument(
            "eigenfunction errors are defined for matching 1D problems".into(),
        ));
    }
    let selected: Vec<usize> = if modes.is_empty() {
        (1..=report.modes.len()).collect()
    } else {
        modes.to_vec()
    };
    let rule = gauss_legendre(ERROR_QUADRATURE_POINTS)?;
    let p = space.degree();
    let nodes = space.grid().nodes();
    for &j in &selected {
        if j == 0 || j > report.modes.len() || j > vectors.ncols() {
            return Err(Error::InvalidArgument(format!("mode {j} out of range")));
        }
        let col: Vec<f64> = vectors.column(j - 1).iter().copied().collect();
        let c = full_coefficients(space, kind, &col)?;
        let k = exact.wavenumbers[j - 1][0];

        // Pass 1: norm of u_h and overlap with u. Pass 2: the errors.
        let (mut nn, mut ip) = (0.0, 0.0);
        let mut samples = Vec::new();
        for e in 0..space.elements() {
            let mapped = rule.map_to_element(nodes[e], nodes[e + 1])?;
            for (&x, &w) in mapped.points.iter().zip(&mapped.weights) {
                let ders = space.derivatives_on_element(e, x, 1);
                let uh: f64 = (0..=p).map(|i| ders[0][i] * c[e + i]).sum();
                let duh: f64 = (0..=p).map(|i| ders[1][i] * c[e + i]).sum();
                let (u, du) = eigenfunction_1d(kind, k, x);
                nn += w * uh * uh;
                ip += w * u * uh;
                samples.push((w, u, du, uh, duh));
            }
        }
        if nn <= 0.0 {
            return Err(Error::InvalidArgument(format!("mode {j} has a zero eigenvector")));
        }
        let scale = 1.0 / nn.sqrt();
        let overlap = ip * scale;
        let s = if overlap < 0.0 { -scale } else { scale };
        let (mut h1, mut l2) = (0.0, 0.0);
        for (w, u, du, uh, duh) in samples {
            h1 += w * (du - s * duh).powi(2);
            l2 += w * (u - s * uh).powi(2);
        }
        let m = &mut report.modes[j - 1];
        m.h1 = Some(h1.sqrt());
        m.l2 = Some(l2.sqrt());
        m.scaled_h1 = if m.lambda_exact > 0.0 {
            Some(h1.sqrt() / m.lambda_exact)
        } else {
            None
        };
        m.ambiguous = overlap.abs() < AMBIGUOUS_OVERLAP;
    }
    Ok(())
}

/// Least-squares convergence order.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Negated slope of `log(err)` against `log(N)`; `None` with < 2 levels.
    pub rate: Option<f64>,
    /// Positions of non-positive or non-finite errors left out of the fit.
    pub excluded: Vec<usize>,
}

/// Fits `err ~ C N^{-rate}` over all usable levels.
pub fn convergence_rates(elements: &[usize], errors: &[f64]) -> Result<RateFit> {
    if elements.len() != errors.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} mesh levels and {} errors",
            elements.len(),
            errors.len()
        )));
    }
    let mut excluded = Vec::new();
    let mut pts = Vec::new();
    for (i, (&n, &e)) in elements.iter().zip(errors).enumerate() {
        if e > 0.0 && e.is_finite() && n > 0 {
            pts.push(((n as f64).ln(), e.ln()));
        } else {
            excluded.push(i);
        }
    }
    let distinct = pts.iter().any(|p| p.0 != pts[0].0);
    if pts.len() < 2 || !distinct {
        return Ok(RateFit { rate: None, excluded });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(RateFit {
        rate: Some(-sxy / sxx),
        excluded,
    })
}

/// Spectral condition numbers of a standard and a corrected discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_min_dc: f64,
    pub lambda_max_dc: f64,
    /// `lambda_max / lambda_min`.
    pub gamma: f64,
    pub gamma_dc: f64,
    /// `gamma / gamma_dc`.
    pub rho: f64,
    /// `100 (1 - 1 / rho)`, percent.
    pub varrho: f64,
}

pub fn condition_from_extremes(min: f64, max: f64, min_dc: f64, max_dc: f64) -> Result<ConditionReport> {
    if !(min > 0.0 && min_dc > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "condition numbers need positive smallest eigenvalues, got {min} and {min_dc}"
        )));
    }
    let gamma = max / min;
    let gamma_dc = max_dc / min_dc;
    let rho = gamma / gamma_dc;
    Ok(ConditionReport {
        lambda_min: min,
        lambda_max: max,
        lambda_min_dc: min_dc,
        lambda_max_dc: max_dc,
        gamma,
        gamma_dc,
        rho,
        varrho: 100.0 * (1.0 - 1.0 / rho),
    })
}

pub fn condition_report(spec_std: &Spectrum, spec_dc: &Spectrum) -> Result<ConditionReport> {
    if spec_std.is_empty() || spec_dc.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    condition_from_extremes(spec_std.min(), spec_std.max(), spec_dc.min(), spec_dc.max())
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `j,lambda_exact,lambda_h,rel_err[,h1_err,l2_err]` rows after a
/// `#`-prefixed metadata block.
pub fn write_spectrum_csv(out: &mut impl Write, meta: &[(String, String)], report: &ErrorReport) -> Result<()> {
    for (k, v) in meta {
        writeln!(out, "# {k}={v}")?;
    }
    let zero: Vec<String> = report
        .modes
        .iter()
        .filter(|m| m.absolute)
        .map(|m| m.j.to_string())
        .collect();
    if !zero.is_empty() {
        writeln!(out, "# absolute_error_modes={}", zero.join(";"))?;
    }
    let ef = report.has_eigenfunction_errors();
    if ef {
        writeln!(out, "j,lambda_exact,lambda_h,rel_err,h1_err,l2_err")?;
    } else {
        writeln!(out, "j,lambda_exact,lambda_h,rel_err")?;
    }
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for m in &report.modes {
        write!(
            out,
            "{},{},{},{}",
            m.j,
            fmt_f64(m.lambda_exact),
            fmt_f64(m.lambda_h),
            fmt_f64(m.rel_err)
        )?;
        if ef {
            write!(out, ",{},{}", opt(m.h1), opt(m.l2))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
