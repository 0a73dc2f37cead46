//! Gauss-Legendre rules on [-1, 1] and their affine images.

use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        2 * self.len() - 1
    }

    /// Points and weights mapped to `[a, b]`.
    pub fn map_to_element(&self, a: f64, b: f64) -> Result<MappedRule> {
        if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidArgument(format!(
                "empty interval [{a}, {b}]"
            )));
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Ok(MappedRule {
            points: self.points.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappedRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MappedRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre polynomial `P_q(x)` and its derivative.
fn legendre(q: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `q`-point Gauss-Legendre rule, nodes by Newton iteration on `P_q`.
pub fn gauss_legendre(q: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_POINTS).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "quadrature point count must lie in 1..={MAX_POINTS}, got {q}"
        )));
    }
    if q == 1 {
        return Ok(QuadratureRule {
            points: vec![0.0],
            weights: vec![2.0],
        });
    }
    let mut points = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(q, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(q, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        points[q / 2] = 0.0;
    }
    Ok(QuadratureRule { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_and_two_point() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.points, vec![0.0]);
        assert_eq!(r.weights, vec![2.0]);
        let r = gauss_legendre(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.points[0] + s).abs() < 1e-15 && (r.points[1] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(17).is_err());
    }

    #[test]
    fn weights_sum_to_two_and_exactness() {
        for q in 1..=MAX_POINTS {
            let r = gauss_legendre(q).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "q={q}");
            assert!(r.weights.iter().all(|w| *w > 0.0));
            assert!(r.points.windows(2).all(|w| w[0] < w[1]));
            for deg in 0..=r.exactness() {
                let got: f64 = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "q={q} deg={deg}");
            }
        }
    }

    #[test]
    fn five_points_integrate_x8() {
        let r = gauss_legendre(5).unwrap();
        let m = r.map_to_element(-1.0, 1.0).unwrap();
        assert!((m.integrate(|x| x.powi(8)) - 2.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn mapped_rules() {
        let m = gauss_legendre(1).unwrap().map_to_element(0.0, 1.0).unwrap();
        assert_eq!(m.points, vec![0.5]);
        assert_eq!(m.weights, vec![1.0]);
        let m = gauss_legendre(3).unwrap().map_to_element(0.25, 0.5).unwrap();
        assert!((m.weights.iter().sum::<f64>() - 0.25).abs() < 1e-15);
        let exact = (0.5f64.powi(3) - 0.25f64.powi(3)) / 3.0;
        assert!((m.integrate(|x| x * x) - exact).abs() < 1e-14);
        assert!(gauss_legendre(2).unwrap().map_to_element(0.5, 0.5).is_err());
    }
}
