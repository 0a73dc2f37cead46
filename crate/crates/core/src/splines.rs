//! Open-knot B-spline spaces of maximal smoothness on 1D breakpoint grids.
//!
//! Basis functions are indexed `0..n` with `n = N + p`. Matrices printed in
//! the literature are 1-based, so printed index `k` maps to `k - 1` here; for
//! Dirichlet problems the first and last functions are dropped, so printed
//! `U_k` is retained index `k - 1`, i.e. basis function `k`.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Ascending breakpoints `0 = x_0 < x_1 < ... < x_N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointGrid {
    nodes: Vec<f64>,
}

impl BreakpointGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first node must be 0, got {}",
                nodes[0]
            )));
        }
        let last = nodes[nodes.len() - 1];
        if last != 1.0 {
            return Err(Error::InvalidGrid(format!(
                "last node must be 1, got {last}"
            )));
        }
        if let Some(w) = nodes.windows(2).find(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidGrid(format!(
                "nodes must be strictly ascending ({} followed by {})",
                w[0], w[1]
            )));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidGrid("need at least one element".into()));
        }
        let nodes = (0..=elements)
            .map(|i| i as f64 / elements as f64)
            .collect();
        Self::new(nodes)
    }

    /// Parses the mesh file format: one breakpoint per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let x: f64 = line.parse().map_err(|_| {
                Error::InvalidGrid(format!("line {}: cannot parse {line:?}", lineno + 1))
            })?;
            nodes.push(x);
        }
        Self::new(nodes)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Largest element diameter.
    pub fn h_max(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn is_uniform(&self) -> bool {
        let h = 1.0 / self.elements() as f64;
        self.nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h)
    }

    /// Index of the element containing `x`; `x = 1` belongs to the last element.
    pub fn element_of(&self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let idx = self.nodes.partition_point(|&t| t <= x);
        Ok(idx.saturating_sub(1).min(self.elements() - 1))
    }
}

impl FromStr for BreakpointGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Open knot vector: `0` and `1` repeated `p + 1` times, interior breakpoints once.
pub fn open_knot_vector(p: usize, grid: &BreakpointGrid) -> Vec<f64> {
    let nodes = grid.nodes();
    let mut knots = Vec::with_capacity(nodes.len() + 2 * p + 1);
    knots.extend(std::iter::repeat_n(0.0, p + 1));
    knots.extend_from_slice(&nodes[1..nodes.len() - 1]);
    knots.extend(std::iter::repeat_n(1.0, p + 1));
    knots
}

/// Values of the `p + 1` basis functions active at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValues {
    /// Global index of the first active function.
    pub first: usize,
    pub values: Vec<f64>,
}

/// Derivative values of every basis function at `x = 0` and `x = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRows {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// C^{p-1} spline space of degree `p` over a breakpoint grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpace {
    degree: usize,
    grid: BreakpointGrid,
    knots: Vec<f64>,
}

impl SplineSpace {
    pub fn new(degree: usize, grid: BreakpointGrid) -> Self {
        let knots = open_knot_vector(degree, &grid);
        Self {
            degree,
            grid,
            knots,
        }
    }

    pub fn uniform(degree: usize, elements: usize) -> Result<Self> {
        Ok(Self::new(degree, BreakpointGrid::uniform(elements)?))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid(&self) -> &BreakpointGrid {
        &self.grid
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn elements(&self) -> usize {
        self.grid.elements()
    }

    /// Number of basis functions, `N + p`.
    pub fn dim(&self) -> usize {
        self.grid.elements() + self.degree
    }

    /// Space of degree `p - 1` on the same grid; its open knot vector is the
    /// knot vector of `self` with one end knot removed on each side.
    pub fn derivative_space(&self) -> Option<SplineSpace> {
        (self.degree > 0).then(|| SplineSpace::new(self.degree - 1, self.grid.clone()))
    }

    /// Basis values (`r = 0`) or `r`-th derivatives of the active functions at `x`.
    pub fn eval_basis(&self, x: f64, r: usize) -> Result<BasisValues> {
        let (first, mut ders) = self.eval_derivatives(x, r)?;
        Ok(BasisValues {
            first,
            values: ders.swap_remove(r),
        })
    }

    /// All derivatives `0..=max_order` of the active functions at `x`.
    /// `ders[k][i]` is the `k`-th derivative of function `first + i`.
    pub fn eval_derivatives(&self, x: f64, max_order: usize) -> Result<(usize, Vec<Vec<f64>>)> {
        let element = self.grid.element_of(x)?;
        Ok((element, self.derivatives_on_element(element, x, max_order)))
    }

    /// Cox-de Boor values and knot-difference derivatives on a known element.
    pub(crate) fn derivatives_on_element(
        &self,
        element: usize,
        x: f64,
        max_order: usize,
    ) -> Vec<Vec<f64>> {
        let p = self.degree;
        let t = &self.knots;
        let span = element + p;

        // ndu holds basis values in its upper triangle and knot differences below.
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; max_order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let top = max_order.min(p);
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=top {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    let rk = rk as usize;
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                    d = a[s2][0] * ndu[rk][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let col = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][col];
                    d += a[s2][j] * ndu[col][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for (k, row) in ders.iter_mut().enumerate().take(top + 1).skip(1) {
            for v in row.iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }

    /// `r`-th derivatives of all `n` basis functions at both endpoints.
    pub fn boundary_derivative_row(&self, r: usize) -> Result<BoundaryRows> {
        if r == 0 || r > self.degree {
            return Err(Error::InvalidArgument(format!(
                "boundary derivative order must lie in 1..={}, got {r}",
                self.degree
            )));
        }
        let n = self.dim();
        let mut left = vec![0.0; n];
        let mut right = vec![0.0; n];
        let at0 = self.eval_basis(0.0, r)?;
        let at1 = self.eval_basis(1.0, r)?;
        for (i, v) in at0.values.into_iter().enumerate() {
            left[at0.first + i] = v;
        }
        for (i, v) in at1.values.into_iter().enumerate() {
            right[at1.first + i] = v;
        }
        Ok(BoundaryRows { left, right })
    }

    /// Evaluates `sum_i coeffs[i] * theta_i^{(r)}(x)`.
    pub fn eval_function(&self, coeffs: &[f64], x: f64, r: usize) -> Result<f64> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                self.dim(),
                coeffs.len()
            )));
        }
        let b = self.eval_basis(x, r)?;
        Ok(b
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * coeffs[b.first + i])
            .sum())
    }
}
