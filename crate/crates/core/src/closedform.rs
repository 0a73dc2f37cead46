//! Closed-form results for two uniform-grid model discretizations: C2 cubic
//! splines with Dirichlet conditions and C1 quadratic splines with Neumann
//! conditions.
//!
//! Contents:
//! - Toeplitz-plus-boundary matrices and their analytical eigenpairs.
//! - The explicit standard and constraint-reduced matrix pairs.
//! - Constraint reduction for the infinite-penalty limit.
//! - Dispersion relations of interior and boundary rows.
//!
//! Row tables hold `h K` and `M / h` so they are mesh independent. Printed
//! indices in doc comments are 1-based; code is 0-based.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::assembly::{MatrixPair, PairMeta, ProblemKind};
use crate::eigensolve::Spectrum;
use crate::error::{Error, Result};
use crate::splines::SplineSpace;

const CUBIC_K_STENCIL: [f64; 4] = [2.0 / 3.0, -1.0 / 8.0, -1.0 / 5.0, -1.0 / 120.0];
const CUBIC_M_STENCIL: [f64; 4] = [151.0 / 315.0, 397.0 / 1680.0, 1.0 / 42.0, 1.0 / 5040.0];

const CUBIC_K_ROWS: [&[f64]; 4] = [
    &[3.0 / 2.0, 3.0 / 80.0, -1.0 / 4.0, -1.0 / 80.0],
    &[3.0 / 80.0, 27.0 / 40.0, -1.0 / 30.0, -47.0 / 240.0, -1.0 / 120.0],
    &[-1.0 / 4.0, -1.0 / 30.0, 2.0 / 3.0, -1.0 / 8.0, -1.0 / 5.0, -1.0 / 120.0],
    &[-1.0 / 80.0, -47.0 / 240.0, -1.0 / 8.0, 2.0 / 3.0, -1.0 / 8.0, -1.0 / 5.0, -1.0 / 120.0],
];
const CUBIC_M_ROWS: [&[f64]; 4] = [
    &[31.0 / 140.0, 5.0 / 32.0, 29.0 / 840.0, 1.0 / 3360.0],
    &[5.0 / 32.0, 183.0 / 560.0, 283.0 / 1260.0, 239.0 / 10080.0, 1.0 / 5040.0],
    &[29.0 / 840.0, 283.0 / 1260.0, 151.0 / 315.0, 397.0 / 1680.0, 1.0 / 42.0, 1.0 / 5040.0],
    &[
        1.0 / 3360.0,
        239.0 / 10080.0,
        397.0 / 1680.0,
        151.0 / 315.0,
        397.0 / 1680.0,
        1.0 / 42.0,
        1.0 / 5040.0,
    ],
];

const QUAD_K_STENCIL: [f64; 3] = [1.0, -1.0 / 3.0, -1.0 / 6.0];
const QUAD_M_STENCIL: [f64; 3] = [11.0 / 20.0, 13.0 / 60.0, 1.0 / 120.0];

const QUAD_K_ROWS: [&[f64]; 3] = [
    &[4.0 / 3.0, -1.0, -1.0 / 3.0],
    &[-1.0, 4.0 / 3.0, -1.0 / 6.0, -1.0 / 6.0],
    &[-1.0 / 3.0, -1.0 / 6.0, 1.0, -1.0 / 3.0, -1.0 / 6.0],
];
const QUAD_M_ROWS: [&[f64]; 3] = [
    &[1.0 / 5.0, 7.0 / 60.0, 1.0 / 60.0],
    &[7.0 / 60.0, 1.0 / 3.0, 5.0 / 24.0, 1.0 / 120.0],
    &[1.0 / 60.0, 5.0 / 24.0, 11.0 / 20.0, 13.0 / 60.0, 1.0 / 120.0],
];

const REDUCED_CUBIC_K_ROWS: [&[f64]; 2] = [
    &[13.0 / 15.0, -7.0 / 60.0, -1.0 / 5.0, -1.0 / 120.0],
    &[-7.0 / 60.0, 2.0 / 3.0, -1.0 / 8.0, -1.0 / 5.0, -1.0 / 120.0],
];
const REDUCED_CUBIC_M_ROWS: [&[f64]; 2] = [
    &[41.0 / 90.0, 17.0 / 72.0, 1.0 / 42.0, 1.0 / 5040.0],
    &[17.0 / 72.0, 151.0 / 315.0, 397.0 / 1680.0, 1.0 / 42.0, 1.0 / 5040.0],
];

const REDUCED_QUAD_K_ROWS: [&[f64]; 2] = [
    &[2.0 / 3.0, -1.0 / 2.0, -1.0 / 6.0],
    &[-1.0 / 2.0, 1.0, -1.0 / 3.0, -1.0 / 6.0],
];
const REDUCED_QUAD_M_ROWS: [&[f64]; 2] = [
    &[23.0 / 30.0, 9.0 / 40.0, 1.0 / 120.0],
    &[9.0 / 40.0, 11.0 / 20.0, 13.0 / 60.0, 1.0 / 120.0],
];

/// Symmetric banded matrix from an interior stencil `(a_0, a_1, ...)` with
/// the leading rows replaced and mirrored persymmetrically.
fn banded_with_boundary(n: usize, stencil: &[f64], rows: &[&[f64]], scale: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for (d, &v) in stencil.iter().enumerate() {
            if i + d < n {
                a[(i, i + d)] = v;
                a[(i + d, i)] = v;
            }
        }
    }
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            a[(r, c)] = v;
            a[(c, r)] = v;
            a[(n - 1 - r, n - 1 - c)] = v;
            a[(n - 1 - c, n - 1 - r)] = v;
        }
    }
    a * scale
}

fn model_pair(
    kind: ProblemKind,
    degree: usize,
    elements: usize,
    n: usize,
    k: (&[f64], &[&[f64]]),
    m: (&[f64], &[&[f64]]),
    corrected: bool,
) -> Result<MatrixPair> {
    let h = 1.0 / elements as f64;
    MatrixPair::new(
        banded_with_boundary(n, k.0, k.1, 1.0 / h),
        banded_with_boundary(n, m.0, m.1, h),
        PairMeta {
            kind,
            degree,
            elements,
            corrected,
            h,
        },
    )
}

fn require_elements(n_el: usize, min: usize, what: &str) -> Result<()> {
    if n_el < min {
        return Err(Error::InvalidArgument(format!(
            "{what} needs at least {min} elements, got {n_el}"
        )));
    }
    Ok(())
}

/// `(N+1) x (N+1)` C2 cubic Dirichlet pair on a uniform grid.
pub fn cubic_dirichlet_pair(n_el: usize) -> Result<MatrixPair> {
    require_elements(n_el, 7, "cubic Dirichlet pair")?;
    model_pair(
        ProblemKind::Dirichlet,
        3,
        n_el,
        n_el + 1,
        (&CUBIC_K_STENCIL, &CUBIC_K_ROWS),
        (&CUBIC_M_STENCIL, &CUBIC_M_ROWS),
        false,
    )
}

/// `(N+2) x (N+2)` C1 quadratic Neumann pair on a uniform grid.
pub fn quadratic_neumann_pair(n_el: usize) -> Result<MatrixPair> {
    require_elements(n_el, 5, "quadratic Neumann pair")?;
    model_pair(
        ProblemKind::Neumann,
        2,
        n_el,
        n_el + 2,
        (&QUAD_K_STENCIL, &QUAD_K_ROWS),
        (&QUAD_M_STENCIL, &QUAD_M_ROWS),
        false,
    )
}

/// `(N-1) x (N-1)` cubic Dirichlet pair with `3 U_1 = U_2` and
/// `3 U_{N+1} = U_N` imposed.
pub fn reduced_cubic_dirichlet(n_el: usize) -> Result<MatrixPair> {
    require_elements(n_el, 6, "reduced cubic Dirichlet pair")?;
    model_pair(
        ProblemKind::Dirichlet,
        3,
        n_el,
        n_el - 1,
        (&CUBIC_K_STENCIL, &REDUCED_CUBIC_K_ROWS),
        (&CUBIC_M_STENCIL, &REDUCED_CUBIC_M_ROWS),
        true,
    )
}

/// `N x N` quadratic Neumann pair with `U_1 = U_2` and `U_{N+2} = U_{N+1}`
/// imposed.
pub fn reduced_quadratic_neumann(n_el: usize) -> Result<MatrixPair> {
    require_elements(n_el, 5, "reduced quadratic Neumann pair")?;
    model_pair(
        ProblemKind::Neumann,
        2,
        n_el,
        n_el,
        (&QUAD_K_STENCIL, &REDUCED_QUAD_K_ROWS),
        (&QUAD_M_STENCIL, &REDUCED_QUAD_M_ROWS),
        true,
    )
}

// ---------------------------------------------------------------------------
// Toeplitz-plus-boundary matrices

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCase {
    /// `A = G - H`, `H_{j,k} = xi_{j+k}` for `j < m`, `k <= m - j`; sine modes.
    Subtract,
    /// `A = G + H`, `H_{j,k} = xi_{j+k-1}` for `j <= m`, `k <= m - j + 1`; cosine modes.
    Add,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzBoundarySpec {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub n: usize,
    pub case: BoundaryCase,
}

impl ToeplitzBoundarySpec {
    pub fn new(mu: Vec<f64>, nu: Vec<f64>, n: usize, case: BoundaryCase) -> Result<Self> {
        if mu.len() < 2 || mu.len() != nu.len() {
            return Err(Error::InvalidArgument(format!(
                "symbols need equal lengths >= 2, got {} and {}",
                mu.len(),
                nu.len()
            )));
        }
        let m = mu.len() - 1;
        if n <= 2 * m {
            return Err(Error::InvalidArgument(format!(
                "dimension {n} must exceed twice the half-bandwidth {m}"
            )));
        }
        Ok(Self { mu, nu, n, case })
    }

    /// Half-bandwidth.
    pub fn m(&self) -> usize {
        self.mu.len() - 1
    }

    fn matrix(&self, xi: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let m = self.m();
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            for (d, &v) in xi.iter().enumerate() {
                if j + d < n {
                    a[(j, j + d)] = v;
                    a[(j + d, j)] = v;
                }
            }
        }
        // 1-based (j, k) with the index rule of each case.
        let (sign, rows, offset) = match self.case {
            BoundaryCase::Subtract => (-1.0, m.saturating_sub(1), 0usize),
            BoundaryCase::Add => (1.0, m, 1usize),
        };
        for j in 1..=rows {
            for k in 1..=(m + offset - j) {
                let v = sign * xi[j + k - offset];
                a[(j - 1, k - 1)] += v;
                a[(n - j, n - k)] += v;
            }
        }
        a
    }

    /// Trigonometric argument scale `h`: `1/(n+1)` or `1/n`.
    pub fn h(&self) -> f64 {
        match self.case {
            BoundaryCase::Subtract => 1.0 / (self.n as f64 + 1.0),
            BoundaryCase::Add => 1.0 / self.n as f64,
        }
    }
}

/// `(A, B)` with `A` built from `mu` and `B` from `nu`.
pub fn build_toeplitz_boundary(spec: &ToeplitzBoundarySpec) -> (DMatrix<f64>, DMatrix<f64>) {
    (spec.matrix(&spec.mu), spec.matrix(&spec.nu))
}

fn symbol(xi: &[f64], t: f64) -> f64 {
    xi[0] + 2.0 * xi[1..]
        .iter()
        .enumerate()
        .map(|(l, &v)| v * ((l + 1) as f64 * t).cos())
        .sum::<f64>()
}

/// Eigenpairs of `A x = lambda B x` from the symbol ratio, ascending, with
/// unit Euclidean norm and the largest entry positive.
pub fn analytical_eigenpairs(spec: &ToeplitzBoundarySpec) -> Result<Spectrum> {
    let n = spec.n;
    let h = spec.h();
    let modes: Vec<usize> = match spec.case {
        BoundaryCase::Subtract => (1..=n).collect(),
        BoundaryCase::Add => (0..n).collect(),
    };
    let scale = spec.nu.iter().map(|v| v.abs()).sum::<f64>();
    let mut pairs = Vec::with_capacity(n);
    for &j in &modes {
        let t = j as f64 * PI * h;
        let den = symbol(&spec.nu, t);
        if den.abs() <= 1e-12 * scale {
            return Err(Error::Hypothesis(format!(
                "mass symbol vanishes at mode {j}"
            )));
        }
        let value = symbol(&spec.mu, t) / den;
        let v: Vec<f64> = (1..=n)
            .map(|k| match spec.case {
                BoundaryCase::Subtract => (t * k as f64).sin(),
                BoundaryCase::Add => (t * (k as f64 - 0.5)).cos(),
            })
            .collect();
        pairs.push((value, unit_with_sign(DVector::from_vec(v))));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<_> = pairs.into_iter().map(|p| p.1).collect();
    Ok(Spectrum {
        values,
        vectors: Some(DMatrix::from_columns(&cols)),
        source: "analytical toeplitz-plus-boundary".into(),
    })
}

fn unit_with_sign(mut v: DVector<f64>) -> DVector<f64> {
    let norm = v.norm();
    v /= norm;
    let big = v.iamax();
    if v[big] < 0.0 {
        v.neg_mut();
    }
    v
}

/// Closed-form spectrum of [`reduced_cubic_dirichlet`]: `N - 1` sine modes.
pub fn analytical_spectrum_cubic_dirichlet(n_el: usize) -> Result<Spectrum> {
    require_elements(n_el, 2, "cubic Dirichlet spectrum")?;
    let n2 = (n_el * n_el) as f64;
    let h = 1.0 / n_el as f64;
    let mut values = Vec::with_capacity(n_el - 1);
    let mut cols = Vec::with_capacity(n_el - 1);
    for j in 1..n_el {
        let t = j as f64 * PI * h;
        values.push(cubic_interior(t) * n2);
        let v: Vec<f64> = (1..n_el).map(|k| (t * k as f64).sin()).collect();
        cols.push(unit_with_sign(DVector::from_vec(v)));
    }
    let mut s = Spectrum {
        values,
        vectors: Some(DMatrix::from_columns(&cols)),
        source: format!("analytical cubic dirichlet N={n_el}"),
    };
    s.sort();
    Ok(s)
}

/// Closed-form spectrum of [`reduced_quadratic_neumann`]: `N` cosine modes,
/// the first being the constant with eigenvalue 0.
pub fn analytical_spectrum_quadratic_neumann(n_el: usize) -> Result<Spectrum> {
    require_elements(n_el, 2, "quadratic Neumann spectrum")?;
    let n2 = (n_el * n_el) as f64;
    let h = 1.0 / n_el as f64;
    let mut values = Vec::with_capacity(n_el);
    let mut cols = Vec::with_capacity(n_el);
    for j in 0..n_el {
        let t = j as f64 * PI * h;
        // Exact zero for the constant mode; the formula cancels to round-off.
        values.push(if j == 0 { 0.0 } else { quadratic_interior(t) * n2 });
        let v: Vec<f64> = (1..=n_el).map(|k| (t * (k as f64 - 0.5)).cos()).collect();
        cols.push(unit_with_sign(DVector::from_vec(v)));
    }
    let mut s = Spectrum {
        values,
        vectors: Some(DMatrix::from_columns(&cols)),
        source: format!("analytical quadratic neumann N={n_el}"),
    };
    s.sort();
    Ok(s)
}

// ---------------------------------------------------------------------------
// Constraint reduction

/// `coeff * U[eliminate] - U[keep] = 0`, 0-based indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub eliminate: usize,
    pub keep: usize,
    pub coeff: f64,
}

fn check_constraints(n: usize, constraints: &[Constraint]) -> Result<()> {
    let mut seen = vec![false; n];
    for c in constraints {
        if c.eliminate >= n || c.keep >= n {
            return Err(Error::InvalidArgument(format!(
                "constraint index out of range for dimension {n}"
            )));
        }
        if c.eliminate == c.keep || c.coeff == 0.0 || !c.coeff.is_finite() {
            return Err(Error::InvalidArgument(format!("degenerate constraint {c:?}")));
        }
        if seen[c.eliminate] {
            return Err(Error::InvalidArgument(format!(
                "index {} constrained twice",
                c.eliminate
            )));
        }
        seen[c.eliminate] = true;
    }
    if constraints.iter().any(|c| seen[c.keep]) {
        return Err(Error::InvalidArgument(
            "a kept index is itself eliminated".into(),
        ));
    }
    Ok(())
}

/// Symmetric congruence `T^T A T` for `U = T U_reduced`: column `i` scaled
/// by `1 / c` is added to column `j`, likewise for rows, then `i` is removed.
pub fn constraint_reduce(pair: &MatrixPair, constraints: &[Constraint]) -> Result<MatrixPair> {
    let n = pair.dim();
    check_constraints(n, constraints)?;
    let fold = |a: &DMatrix<f64>| {
        let mut a = a.clone();
        for c in constraints {
            let (i, j, s) = (c.eliminate, c.keep, 1.0 / c.coeff);
            for r in 0..n {
                a[(r, j)] += s * a[(r, i)];
            }
            for col in 0..n {
                a[(j, col)] += s * a[(i, col)];
            }
        }
        let mut drop: Vec<usize> = constraints.iter().map(|c| c.eliminate).collect();
        drop.sort_unstable();
        a.remove_rows_at(&drop).remove_columns_at(&drop)
    };
    let mut meta = pair.meta.clone();
    meta.corrected = true;
    MatrixPair::new(fold(&pair.stiffness), fold(&pair.mass), meta)
}

/// Re-inserts eliminated entries, `U[i] = U[j] / c`.
pub fn expand_constrained(reduced: &[f64], full_dim: usize, constraints: &[Constraint]) -> Result<Vec<f64>> {
    check_constraints(full_dim, constraints)?;
    if reduced.len() + constraints.len() != full_dim {
        return Err(Error::DimensionMismatch(format!(
            "{} reduced entries and {} constraints for dimension {full_dim}",
            reduced.len(),
            constraints.len()
        )));
    }
    let mut eliminated = vec![false; full_dim];
    for c in constraints {
        eliminated[c.eliminate] = true;
    }
    let mut full = vec![0.0; full_dim];
    let mut it = reduced.iter();
    for (i, slot) in full.iter_mut().enumerate() {
        if !eliminated[i] {
            *slot = *it.next().expect("length checked");
        }
    }
    for c in constraints {
        full[c.eliminate] = full[c.keep] / c.coeff;
    }
    Ok(full)
}

/// Constraints enforced by an infinite penalty: the penalized boundary
/// derivative must vanish. Only defined where each end involves exactly two
/// unknowns, i.e. C2 cubic Dirichlet and C1 quadratic Neumann.
pub fn infinite_penalty_constraints(space: &SplineSpace, kind: ProblemKind) -> Result<Vec<Constraint>> {
    let p = space.degree();
    let supported = matches!((kind, p), (ProblemKind::Dirichlet, 3) | (ProblemKind::Neumann, 2));
    if !supported {
        return Err(Error::Unsupported(format!(
            "infinite penalty is available for cubic Dirichlet and quadratic Neumann only \
             (got degree {p} {kind}); other degrees need a boundary basis reconstruction"
        )));
    }
    let rows = space.boundary_derivative_row(kind.penalty_order(1))?;
    let n = space.dim();
    let (left, right) = match kind {
        ProblemKind::Dirichlet => (rows.left[1..n - 1].to_vec(), rows.right[1..n - 1].to_vec()),
        ProblemKind::Neumann => (rows.left, rows.right),
    };
    let dim = left.len();
    let end = |g: &[f64], i: usize, j: usize| {
        let nz = g.iter().filter(|v| **v != 0.0).count();
        if nz != 2 || g[i] == 0.0 || g[j] == 0.0 {
            return Err(Error::Unsupported(
                "boundary row does not couple exactly two unknowns".into(),
            ));
        }
        Ok(Constraint {
            eliminate: i,
            keep: j,
            coeff: -g[i] / g[j],
        })
    };
    Ok(vec![end(&left, 0, 1)?, end(&right, dim - 1, dim - 2)?])
}

// ---------------------------------------------------------------------------
// Dispersion

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionCase {
    CubicDirichlet,
    QuadraticNeumann,
}

impl DispersionCase {
    pub fn as_str(self) -> &'static str {
        match self {
            DispersionCase::CubicDirichlet => "cubic-dirichlet",
            DispersionCase::QuadraticNeumann => "quadratic-neumann",
        }
    }

    /// Number of distinct boundary rows at each end.
    pub fn boundary_rows(self) -> usize {
        match self {
            DispersionCase::CubicDirichlet => 4,
            DispersionCase::QuadraticNeumann => 2,
        }
    }

    /// Mode shape entry `U_k` (1-based `k`) at frequency `omega_h`.
    pub fn mode(self, k: usize, omega_h: f64) -> f64 {
        match self {
            DispersionCase::CubicDirichlet => (omega_h * k as f64).sin(),
            DispersionCase::QuadraticNeumann => (omega_h * (k as f64 - 1.5)).cos(),
        }
    }

    fn rows(self) -> (&'static [&'static [f64]], &'static [&'static [f64]]) {
        match self {
            DispersionCase::CubicDirichlet => (&CUBIC_K_ROWS, &CUBIC_M_ROWS),
            DispersionCase::QuadraticNeumann => (&QUAD_K_ROWS, &QUAD_M_ROWS),
        }
    }
}

impl fmt::Display for DispersionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DispersionCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cubic-dirichlet" => Ok(DispersionCase::CubicDirichlet),
            "quadratic-neumann" => Ok(DispersionCase::QuadraticNeumann),
            other => Err(Error::InvalidArgument(format!(
                "unknown dispersion case {other:?} (cubic-dirichlet, quadratic-neumann)"
            ))),
        }
    }
}

/// Which row relation a dispersion value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowClass {
    Interior,
    /// 1-based boundary row.
    Boundary(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    /// `(omega h)^2`.
    pub lambda: f64,
    /// `h^2 lambda^h`.
    pub lambda_h: f64,
    pub row_class: RowClass,
}

fn check_omega(omega_h: f64) -> Result<()> {
    if !(omega_h > 0.0 && omega_h <= PI) {
        return Err(Error::InvalidArgument(format!(
            "omega*h must lie in (0, pi], got {omega_h}"
        )));
    }
    Ok(())
}

fn cubic_interior(t: f64) -> f64 {
    let (c1, c2, c3) = (t.cos(), (2.0 * t).cos(), (3.0 * t).cos());
    -42.0 + 1008.0 * (52.0 + 49.0 * c1 + 4.0 * c2) / (1208.0 + 1191.0 * c1 + 120.0 * c2 + c3)
}

fn quadratic_interior(t: f64) -> f64 {
    let (c1, c2) = (t.cos(), (2.0 * t).cos());
    -20.0 + 240.0 * (3.0 + 2.0 * c1) / (33.0 + 26.0 * c1 + c2)
}

/// `h^2 lambda^h` of an interior row at frequency `omega_h`.
pub fn dispersion_interior(case: DispersionCase, omega_h: f64) -> Result<f64> {
    check_omega(omega_h)?;
    Ok(match case {
        DispersionCase::CubicDirichlet => cubic_interior(omega_h),
        DispersionCase::QuadraticNeumann => quadratic_interior(omega_h),
    })
}

/// `h^2 (K U)_k / (M U)_k` for 1-based boundary row `row` of the standard
/// pair and the case's mode shape.
pub fn row_dispersion(case: DispersionCase, row: usize, omega_h: f64) -> Result<f64> {
    check_omega(omega_h)?;
    let (k_rows, m_rows) = case.rows();
    if row == 0 || row > case.boundary_rows() {
        return Err(Error::InvalidArgument(format!(
            "{case} has boundary rows 1..={}",
            case.boundary_rows()
        )));
    }
    let dot = |r: &[f64]| -> f64 {
        r.iter()
            .enumerate()
            .map(|(l, v)| v * case.mode(l + 1, omega_h))
            .sum()
    };
    Ok(dot(k_rows[row - 1]) / dot(m_rows[row - 1]))
}

/// `h^2 (K U)_row / (M U)_row` for any pair and mode vector (0-based row).
pub fn matrix_row_dispersion(pair: &MatrixPair, row: usize, mode: &[f64]) -> Result<f64> {
    if mode.len() != pair.dim() || row >= pair.dim() {
        return Err(Error::DimensionMismatch(format!(
            "row {row} and mode of length {} for dimension {}",
            mode.len(),
            pair.dim()
        )));
    }
    let u = DVector::from_column_slice(mode);
    let k = pair.stiffness.row(row).dot(&u.transpose());
    let m = pair.mass.row(row).dot(&u.transpose());
    Ok(pair.meta.h * pair.meta.h * k / m)
}

/// Boundary-row dispersion values, rows `1..=boundary_rows()`.
///
/// Rows with a fully known closed form are evaluated from it; the others
/// from the matrix rows, which is algebraically identical. Values are
/// ordered by matrix row: for the Neumann case row 1 has the
/// `Lambda - Lambda^2 / 30` expansion and row 2 the `Lambda + Lambda^2 / 60` one.
pub fn dispersion_boundary_rows(case: DispersionCase, omega_h: f64) -> Result<Vec<f64>> {
    check_omega(omega_h)?;
    let t = omega_h;
    let (c1, c2, c3, c4) = (t.cos(), (2.0 * t).cos(), (3.0 * t).cos(), (4.0 * t).cos());
    Ok(match case {
        DispersionCase::CubicDirichlet => vec![
            -42.0 + 2016.0 * (10.0 + 11.0 * c1 + 2.0 * c2) / (430.0 + 526.0 * c1 + 116.0 * c2 + c3),
            -42.0
                + 4032.0 * (40.0 + 76.0 * c1 + 47.0 * c2 + 4.0 * c3)
                    / (3841.0 + 7066.0 * c1 + 4532.0 * c2 + 478.0 * c3 + 4.0 * c4),
            row_dispersion(case, 3, t)?,
            row_dispersion(case, 4, t)?,
        ],
        DispersionCase::QuadraticNeumann => vec![
            -20.0 + 200.0 / (9.0 + c1),
            40.0 * t.sin().powi(2) / (15.0 + 24.0 * c1 + c2),
        ],
    })
}

/// Exact `omega h -> 0` limits of the boundary-row relations.
///
/// With `sin(l t) ~ l t` the ratio tends to `sum_l l (hK)_l / sum_l l (M/h)_l`
/// for the sine modes; the cosine modes tend to `sum (hK)_l / sum (M/h)_l`.
pub fn boundary_leading_constants(case: DispersionCase) -> Vec<f64> {
    let (k_rows, m_rows) = case.rows();
    let weight = |l: usize| match case {
        DispersionCase::CubicDirichlet => l as f64,
        DispersionCase::QuadraticNeumann => 1.0,
    };
    k_rows
        .iter()
        .zip(m_rows)
        .map(|(k, m)| {
            let num: f64 = k.iter().enumerate().map(|(l, v)| weight(l + 1) * v).sum();
            let den: f64 = m.iter().enumerate().map(|(l, v)| weight(l + 1) * v).sum();
            num / den
        })
        .collect()
}

/// Richardson-extrapolated limit of `(f(t) - t^2) / t^(2 power)` as `t -> 0`,
/// i.e. the coefficient `c` in `f = L + c L^power + O(L^{power+1})`, `L = t^2`.
///
/// Samples at `t = t0, t0/2, t0/4`; each halving divides `L` by 4.
pub fn taylor_coefficient(f: impl Fn(f64) -> f64, power: i32, t0: f64) -> f64 {
    let g = |t: f64| {
        let l = t * t;
        (f(t) - l) / l.powi(power)
    };
    let (g0, g1, g2) = (g(t0), g(0.5 * t0), g(0.25 * t0));
    let r0 = (4.0 * g1 - g0) / 3.0;
    let r1 = (4.0 * g2 - g1) / 3.0;
    (16.0 * r1 - r0) / 15.0
}

/// One line of a frequency sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionRow {
    pub omega_h: f64,
    pub lambda: f64,
    pub interior: f64,
    pub boundary: Vec<f64>,
}

impl DispersionRow {
    pub fn samples(&self) -> Vec<DispersionSample> {
        let mut out = vec![DispersionSample {
            lambda: self.lambda,
            lambda_h: self.interior,
            row_class: RowClass::Interior,
        }];
        out.extend(self.boundary.iter().enumerate().map(|(i, &v)| DispersionSample {
            lambda: self.lambda,
            lambda_h: v,
            row_class: RowClass::Boundary(i + 1),
        }));
        out
    }
}

/// Evenly spaced sweep over `[omega_min, omega_max]`.
pub fn dispersion_sweep(
    case: DispersionCase,
    omega_min: f64,
    omega_max: f64,
    samples: usize,
) -> Result<Vec<DispersionRow>> {
    check_omega(omega_min)?;
    check_omega(omega_max)?;
    if omega_min > omega_max || samples == 0 || (samples == 1 && omega_min != omega_max) {
        return Err(Error::InvalidArgument(format!(
            "invalid sweep [{omega_min}, {omega_max}] with {samples} samples"
        )));
    }
    (0..samples)
        .map(|i| {
            let t = if samples == 1 {
                omega_min
            } else {
                omega_min + (omega_max - omega_min) * i as f64 / (samples - 1) as f64
            };
            Ok(DispersionRow {
                omega_h: t,
                lambda: t * t,
                interior: dispersion_interior(case, t)?,
                boundary: dispersion_boundary_rows(case, t)?,
            })
        })
        .collect()
}
