//! Dense symmetric-definite generalized eigenproblems `K u = lambda M u`.
//!
//! `M = L L^T` is factored, the standard problem `L^{-1} K L^{-T}` is solved by
//! a symmetric tridiagonal QR eigensolver, and eigenvectors are mapped back
//! through `L^{-T}`, which makes them `M`-orthonormal.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::assembly::{relative_asymmetry, MatrixPair};
use crate::error::{Error, Result};

/// Relative asymmetry accepted as round-off.
const SYMMETRY_TOL: f64 = 1e-10;

/// Ascending eigenvalues with optional column eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<f64>>,
    pub source: String,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// Sorts ascending (stable), permuting eigenvectors alongside.
    pub fn sort(&mut self) {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.values = order.iter().map(|&i| self.values[i]).collect();
        if let Some(v) = &self.vectors {
            let cols: Vec<_> = order.iter().map(|&i| v.column(i).into_owned()).collect();
            self.vectors = Some(DMatrix::from_columns(&cols));
        }
    }

    /// Largest entry of `|U^T M U - I|` and of `|U^T K U - diag(values)|`
    /// relative to `max |lambda|`.
    pub fn orthonormality_defect(&self, pair: &MatrixPair) -> Option<(f64, f64)> {
        let u = self.vectors.as_ref()?;
        let mm = u.transpose() * &pair.mass * u;
        let kk = u.transpose() * &pair.stiffness * u;
        let n = self.values.len();
        let scale = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let (mut dm, mut dk) = (0.0f64, 0.0f64);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                dm = dm.max((mm[(i, j)] - id).abs());
                dk = dk.max((kk[(i, j)] - id * self.values[i]).abs() / scale);
            }
        }
        Some((dm, dk))
    }
}

/// Flips the sign so the first entry of largest magnitude is positive.
fn normalize_sign(mut v: nalgebra::DVectorViewMut<'_, f64>) {
    let mut best = 0usize;
    for i in 0..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Full spectrum of `K u = lambda M u` for symmetric `K` and SPD `M`.
pub fn gevp(pair: &MatrixPair, want_vectors: bool) -> Result<Spectrum> {
    let k = &pair.stiffness;
    let m = &pair.mass;
    for (which, a) in [("stiffness", k), ("mass", m)] {
        let asym = relative_asymmetry(a);
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { which, asym });
        }
    }
    let chol = Cholesky::new(m.clone()).ok_or(Error::IllPosedMass)?;
    let l = chol.l();

    // C = L^{-1} K L^{-T}
    let y = l
        .solve_lower_triangular(k)
        .ok_or(Error::IllPosedMass)?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::IllPosedMass)?;
    let c = (&c + c.transpose()) * 0.5;

    let eig = SymmetricEigen::new(c);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let vectors = if want_vectors {
        let cols: Vec<DVector<f64>> = order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect();
        let z = DMatrix::from_columns(&cols);
        let mut u = l
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or(Error::IllPosedMass)?;
        for mut col in u.column_iter_mut() {
            normalize_sign(col.as_view_mut());
        }
        Some(u)
    } else {
        None
    };

    Ok(Spectrum {
        values,
        vectors,
        source: format!(
            "{} p={} N={} corrected={}",
            pair.meta.kind, pair.meta.degree, pair.meta.elements, pair.meta.corrected
        ),
    })
}

/// `|K u - lambda M u| / ((|K|_F + |lambda| |M|_F) |u|)`.
pub fn rayleigh_residual(pair: &MatrixPair, lambda: f64, u: &DVector<f64>) -> Result<f64> {
    if u.len() != pair.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for pair of dimension {}",
            u.len(),
            pair.dim()
        )));
    }
    let un = u.norm();
    if un == 0.0 {
        return Err(Error::InvalidArgument("zero vector".into()));
    }
    let r = &pair.stiffness * u - (&pair.mass * u) * lambda;
    let denom = (pair.stiffness.norm() + lambda.abs() * pair.mass.norm()) * un;
    Ok(r.norm() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{PairMeta, ProblemKind};

    fn pair(k: DMatrix<f64>, m: DMatrix<f64>) -> MatrixPair {
        MatrixPair::new(
            k,
            m,
            PairMeta {
                kind: ProblemKind::Neumann,
                degree: 1,
                elements: 1,
                corrected: false,
                h: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn scalar_problem() {
        let s = gevp(&pair(DMatrix::from_element(1, 1, 2.0), DMatrix::identity(1, 1)), true).unwrap();
        assert_eq!(s.values.len(), 1);
        assert!((s.values[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_problem_has_unit_vectors() {
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        let s = gevp(&pair(k, DMatrix::identity(2, 2)), true).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-15 && (s.values[1] - 3.0).abs() < 1e-15);
        let u = s.vectors.unwrap();
        assert!((u[(1, 0)] - 1.0).abs() < 1e-15 && u[(0, 0)].abs() < 1e-15);
        assert!((u[(0, 1)] - 1.0).abs() < 1e-15 && u[(1, 1)].abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            gevp(&pair(k, DMatrix::identity(2, 2)), false),
            Err(Error::NotSymmetric { .. })
        ));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            gevp(&pair(DMatrix::identity(2, 2), m), false),
            Err(Error::IllPosedMass)
        ));
    }

    #[test]
    fn residuals() {
        let k = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 2.0, 0.5, 0.0, 0.5, 2.0]);
        let p = pair(k, m);
        let s = gevp(&p, true).unwrap();
        let u = s.vectors.as_ref().unwrap();
        for j in 0..3 {
            let col = u.column(j).into_owned();
            assert!(rayleigh_residual(&p, s.values[j], &col).unwrap() <= 1e-9);
            let off = rayleigh_residual(&p, s.values[j] + 1.0, &col).unwrap();
            assert!(off > 1e-4, "{off}");
        }
        let w = DVector::from_vec(vec![0.3, -0.2, 0.9]);
        assert!(rayleigh_residual(&p, 0.0, &w).unwrap() > 0.0);
        assert!(rayleigh_residual(&p, 1.0, &DVector::zeros(3)).is_err());
        let (dm, dk) = s.orthonormality_defect(&p).unwrap();
        assert!(dm < 1e-12 && dk < 1e-12);
    }

    #[test]
    fn sign_convention() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let s = gevp(&pair(k, DMatrix::identity(2, 2)), true).unwrap();
        let u = s.vectors.unwrap();
        for j in 0..2 {
            let col = u.column(j);
            let big = col.iter().cloned().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            assert!(big > 0.0);
        }
    }
}
