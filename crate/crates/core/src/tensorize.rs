//! Tensor-product eigenproblems on `[0,1]^d` from per-axis 1D pairs.
//!
//! Global unknowns are ordered with the first axis slowest, so in 2D the
//! index of `(i, j)` is `i * n_y + j` and `K = K_x (x) M_y + M_x (x) K_y`.

use nalgebra::{DMatrix, DVector};

use crate::assembly::{MatrixPair, PairMeta};
use crate::eigensolve::{gevp, Spectrum};
use crate::error::{Error, Result};

/// Default limit on the explicit global dimension.
pub const DEFAULT_DENSE_CAP: usize = 4096;

#[derive(Debug, Clone)]
pub struct TensorSystem {
    pairs: Vec<MatrixPair>,
}

impl TensorSystem {
    pub fn new(pairs: Vec<MatrixPair>) -> Result<Self> {
        if pairs.is_empty() || pairs.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "tensor systems have 1 to 3 axes, got {}",
                pairs.len()
            )));
        }
        let kind = pairs[0].meta.kind;
        if pairs.iter().any(|p| p.meta.kind != kind) {
            return Err(Error::InvalidArgument(
                "all axes must share the problem kind".into(),
            ));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[MatrixPair] {
        &self.pairs
    }

    pub fn axes(&self) -> usize {
        self.pairs.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.pairs.iter().map(MatrixPair::dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }
}

/// Explicit global pair. Intended for verification at small sizes.
pub fn kron_sum_matrices(sys: &TensorSystem, cap: usize) -> Result<MatrixPair> {
    let total = sys.total_dim();
    if total > cap {
        return Err(Error::DimensionCap { dim: total, cap });
    }
    let pairs = sys.pairs();
    let mut mass = pairs[0].mass.clone();
    for p in &pairs[1..] {
        mass = mass.kronecker(&p.mass);
    }
    let mut stiffness = DMatrix::zeros(total, total);
    for axis in 0..pairs.len() {
        let pick = |a: usize| {
            if a == axis {
                &pairs[a].stiffness
            } else {
                &pairs[a].mass
            }
        };
        let mut term = pick(0).clone();
        for a in 1..pairs.len() {
            term = term.kronecker(pick(a));
        }
        stiffness += term;
    }
    let first = &pairs[0].meta;
    MatrixPair::new(
        stiffness,
        mass,
        PairMeta {
            kind: first.kind,
            degree: first.degree,
            elements: first.elements,
            corrected: pairs.iter().all(|p| p.meta.corrected),
            h: pairs.iter().map(|p| p.meta.h).fold(0.0, f64::max),
        },
    )
}

/// Eigenvalues of a tensor system as sums of per-axis eigenvalues.
#[derive(Debug, Clone)]
pub struct SeparableSpectrum {
    /// Ascending; ties ordered by the multi-index.
    pub values: Vec<f64>,
    /// Zero-based per-axis mode indices of each value.
    pub indices: Vec<Vec<usize>>,
    axis_vectors: Vec<Option<DMatrix<f64>>>,
}

impl SeparableSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Kronecker product of the per-axis eigenvectors of mode `k`.
    pub fn eigenvector(&self, k: usize) -> Option<DVector<f64>> {
        let idx = self.indices.get(k)?;
        let mut v: Option<DVector<f64>> = None;
        for (axis, &j) in idx.iter().enumerate() {
            let col = self.axis_vectors[axis].as_ref()?.column(j).into_owned();
            v = Some(match v {
                None => col,
                Some(acc) => acc.kronecker(&col),
            });
        }
        v
    }

    /// Plain spectrum, optionally materializing every eigenvector.
    pub fn to_spectrum(&self, with_vectors: bool) -> Spectrum {
        let vectors = if with_vectors && self.axis_vectors.iter().all(Option::is_some) {
            let cols: Vec<_> = (0..self.len())
                .map(|k| self.eigenvector(k).expect("vectors present"))
                .collect();
            Some(DMatrix::from_columns(&cols))
        } else {
            None
        };
        Spectrum {
            values: self.values.clone(),
            vectors,
            source: format!("separable {}D", self.axis_vectors.len()),
        }
    }
}

/// Combines complete per-axis spectra into the spectrum of the tensor system.
pub fn separable_spectrum(sys: &TensorSystem, spectra: &[Spectrum]) -> Result<SeparableSpectrum> {
    if spectra.len() != sys.axes() {
        return Err(Error::DimensionMismatch(format!(
            "{} spectra for {} axes",
            spectra.len(),
            sys.axes()
        )));
    }
    for (axis, (s, p)) in spectra.iter().zip(sys.pairs()).enumerate() {
        if s.len() != p.dim() {
            return Err(Error::InvalidArgument(format!(
                "axis {axis}: spectrum has {} of {} eigenvalues",
                s.len(),
                p.dim()
            )));
        }
    }
    let dims = sys.dims();
    let total: usize = dims.iter().product();
    let mut entries: Vec<(f64, Vec<usize>)> = Vec::with_capacity(total);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..total {
        let value = idx
            .iter()
            .enumerate()
            .map(|(axis, &j)| spectra[axis].values[j])
            .sum();
        entries.push((value, idx.clone()));
        for axis in (0..dims.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < dims[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let (values, indices) = entries.into_iter().unzip();
    Ok(SeparableSpectrum {
        values,
        indices,
        axis_vectors: spectra.iter().map(|s| s.vectors.clone()).collect(),
    })
}

/// Solves each axis densely and combines the results.
pub fn solve_separable(sys: &TensorSystem, want_vectors: bool) -> Result<SeparableSpectrum> {
    let spectra = sys
        .pairs()
        .iter()
        .map(|p| gevp(p, want_vectors))
        .collect::<Result<Vec<_>>>()?;
    separable_spectrum(sys, &spectra)
}
