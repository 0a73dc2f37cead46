use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use dciga::assembly::{
    assemble_dc, assemble_standard, default_rule, MatrixPair, PairMeta, PenaltyConfig, ProblemKind,
};
use dciga::closedform::{
    analytical_eigenpairs, analytical_spectrum_cubic_dirichlet, build_toeplitz_boundary,
    dispersion_interior, reduced_cubic_dirichlet, BoundaryCase, DispersionCase, ToeplitzBoundarySpec,
};
use dciga::eigensolve::gevp;
use dciga::metrics::{eigenvalue_errors, exact_spectrum};
use dciga::quadrature::gauss_legendre;
use dciga::splines::{BreakpointGrid, SplineSpace};
use dciga::tensorize::{kron_sum_matrices, solve_separable, TensorSystem, DEFAULT_DENSE_CAP};

fn grid_strategy() -> impl Strategy<Value = BreakpointGrid> {
    prop::collection::vec(0.02f64..0.98, 2..10).prop_map(|mut inner| {
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|a, b| (*a - *b).abs() < 1e-2);
        let mut nodes = vec![0.0];
        nodes.extend(inner);
        nodes.push(1.0);
        BreakpointGrid::new(nodes).unwrap()
    })
}

/// Uniform grid with each interior node moved by up to 30% of `h`; keeps
/// the penalized mass matrix well conditioned.
fn quasi_uniform_grid_strategy() -> impl Strategy<Value = BreakpointGrid> {
    (2usize..=16)
        .prop_flat_map(|n| prop::collection::vec(-0.3f64..0.3, n - 1))
        .prop_map(|shifts| {
            let n = shifts.len() + 1;
            let h = 1.0 / n as f64;
            let mut nodes = vec![0.0];
            nodes.extend(shifts.iter().enumerate().map(|(i, s)| (i + 1) as f64 * h + s * h));
            nodes.push(1.0);
            BreakpointGrid::new(nodes).unwrap()
        })
}

/// Quasi-uniform grid symmetric about 1/2.
fn mirrored_grid_strategy() -> impl Strategy<Value = BreakpointGrid> {
    (2usize..=16)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(-0.3f64..0.3, (n - 1) / 2)))
        .prop_map(|(n, shifts)| {
            let h = 1.0 / n as f64;
            let left: Vec<f64> = shifts.iter().enumerate().map(|(i, s)| (i + 1) as f64 * h + s * h).collect();
            let mut nodes = vec![0.0];
            nodes.extend(left.iter().copied());
            if n % 2 == 0 {
                nodes.push(0.5);
            }
            nodes.extend(left.iter().rev().map(|x| 1.0 - x));
            nodes.push(1.0);
            BreakpointGrid::new(nodes).unwrap()
        })
}

fn spd(n: usize, entries: &[f64], shift: f64) -> DMatrix<f64> {
    let a = DMatrix::from_iterator(n, n, entries.iter().copied());
    &a * a.transpose() + DMatrix::identity(n, n) * shift
}

fn sym(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_iterator(n, n, entries.iter().copied());
    (&a + a.transpose()) * 0.5
}

fn meta(n: usize) -> PairMeta {
    PairMeta {
        kind: ProblemKind::Dirichlet,
        degree: 1,
        elements: n,
        corrected: false,
        h: 1.0,
    }
}

fn random_pair(n: usize) -> impl Strategy<Value = MatrixPair> {
    (
        prop::collection::vec(-1.0f64..1.0, n * n),
        prop::collection::vec(-1.0f64..1.0, n * n),
    )
        .prop_map(move |(k, m)| MatrixPair::new(sym(n, &k), spd(n, &m, 0.5), meta(n)).unwrap())
}

/// Number of eigenvalues of `K u = lambda M u` below `sigma`, from the
/// inertia of `K - sigma M` (negative pivots of an unpivoted LDL^T).
fn count_below(k: &DMatrix<f64>, m: &DMatrix<f64>, sigma: f64) -> usize {
    let mut a = k - m * sigma;
    let n = a.nrows();
    let mut negative = 0;
    for i in 0..n {
        let d = a[(i, i)];
        if d < 0.0 {
            negative += 1;
        }
        for r in i + 1..n {
            let f = a[(r, i)] / d;
            for c in i + 1..n {
                a[(r, c)] -= f * a[(i, c)];
            }
        }
    }
    negative
}

/// Eigenvalues by inertia bisection on the generalized characteristic polynomial.
fn bisection_eigenvalues(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let bound = 1e3;
    (0..k.nrows())
        .map(|j| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(k, m, mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn spec_strategy(case: BoundaryCase) -> impl Strategy<Value = ToeplitzBoundarySpec> {
    (1usize..=3, 5usize..=9)
        .prop_filter("n > 2m", |(m, n)| *n > 2 * m)
        .prop_flat_map(move |(m, n)| {
            (
                prop::collection::vec(-1.0f64..1.0, m + 1),
                prop::collection::vec(-0.4f64..0.4, m),
                Just(n),
            )
        })
        .prop_map(move |(mu, tail, n)| {
            let m = tail.len() as f64;
            let mut nu = vec![1.0];
            nu.extend(tail.iter().map(|v| v / m));
            ToeplitzBoundarySpec::new(mu, nu, n, case).unwrap()
        })
}

fn check_theorem(spec: &ToeplitzBoundarySpec) -> Result<(), TestCaseError> {
    let (a, b) = build_toeplitz_boundary(spec);
    let exact = analytical_eigenpairs(spec).unwrap();
    let brute = gevp(&MatrixPair::new(a.clone(), b.clone(), meta(spec.n)).unwrap(), false).unwrap();
    let scale = brute.values.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let u = exact.vectors.as_ref().unwrap();
    for j in 0..spec.n {
        prop_assert!((exact.values[j] - brute.values[j]).abs() <= 1e-8 * scale);
        let x = u.column(j);
        let res = (&a * x - (&b * x) * exact.values[j]).norm();
        prop_assert!(res <= 1e-8 * scale, "mode {j} residual {res:e}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn partition_of_unity_and_nonnegativity(p in 1usize..=6, grid in grid_strategy(), xs in prop::collection::vec(0.0f64..=1.0, 40)) {
        let space = SplineSpace::new(p, grid);
        for x in xs {
            let b = space.eval_basis(x, 0).unwrap();
            prop_assert!((b.values.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(b.values.iter().all(|v| *v >= -1e-14));
            let d = space.eval_basis(x, 1).unwrap();
            prop_assert!(d.values.iter().sum::<f64>().abs() <= 1e-9 * (1.0 + d.values.iter().map(|v| v.abs()).sum::<f64>()));
        }
    }

    #[test]
    fn local_support(p in 1usize..=6, grid in grid_strategy(), x in 0.0f64..=1.0) {
        let space = SplineSpace::new(p, grid);
        let b = space.eval_basis(x, 0).unwrap();
        let knots = space.knots();
        for (i, v) in b.values.iter().enumerate() {
            let j = b.first + i;
            if *v != 0.0 {
                prop_assert!(knots[j] <= x && x <= knots[j + p + 1]);
            }
        }
    }

    #[test]
    fn mirror_symmetry(p in 1usize..=6, n in 1usize..=12, x in 0.0f64..=1.0) {
        let space = SplineSpace::uniform(p, n).unwrap();
        let dim = space.dim();
        for j in 0..dim {
            let mut c = vec![0.0; dim];
            c[j] = 1.0;
            let mut c_rev = vec![0.0; dim];
            c_rev[dim - 1 - j] = 1.0;
            let a = space.eval_function(&c, x, 0).unwrap();
            let b = space.eval_function(&c_rev, 1.0 - x, 0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference(p in 2usize..=6, grid in grid_strategy(), seed in 0.0f64..1.0) {
        let space = SplineSpace::new(p, grid.clone());
        let nodes = grid.nodes();
        let e = ((seed * grid.elements() as f64) as usize).min(grid.elements() - 1);
        let (a, b) = (nodes[e], nodes[e + 1]);
        let x = a + (b - a) * (0.25 + 0.5 * seed);
        let step = 1e-6 * (b - a);
        let dim = space.dim();
        for j in 0..dim {
            let mut c = vec![0.0; dim];
            c[j] = 1.0;
            let d = space.eval_function(&c, x, 1).unwrap();
            let fd = (space.eval_function(&c, x + step, 0).unwrap() - space.eval_function(&c, x - step, 0).unwrap()) / (2.0 * step);
            prop_assert!((d - fd).abs() <= 1e-5 * d.abs().max(1.0));
        }
    }

    #[test]
    fn assembly_invariant_under_richer_quadrature(p in 1usize..=6, grid in grid_strategy(), neumann in any::<bool>()) {
        let kind = if neumann { ProblemKind::Neumann } else { ProblemKind::Dirichlet };
        let space = SplineSpace::new(p, grid);
        prop_assume!(kind.dofs(&space) > 0);
        let a = assemble_standard(&space, kind, &gauss_legendre(p + 1).unwrap()).unwrap();
        let b = assemble_standard(&space, kind, &gauss_legendre(p + 3).unwrap()).unwrap();
        let rel = |x: &DMatrix<f64>, y: &DMatrix<f64>| (x - y).amax() / y.amax();
        prop_assert!(rel(&a.stiffness, &b.stiffness) <= 1e-13);
        prop_assert!(rel(&a.mass, &b.mass) <= 1e-13);
    }

    #[test]
    fn symmetric_and_persymmetric(p in 1usize..=6, grid in mirrored_grid_strategy(), neumann in any::<bool>(), dc in any::<bool>()) {
        let kind = if neumann { ProblemKind::Neumann } else { ProblemKind::Dirichlet };
        let space = SplineSpace::new(p, grid);
        prop_assume!(kind.dofs(&space) > 0);
        let rule = default_rule(&space).unwrap();
        let pair = if dc {
            assemble_dc(&space, &PenaltyConfig::default_for(kind, p), &rule).unwrap()
        } else {
            assemble_standard(&space, kind, &rule).unwrap()
        };
        prop_assert!(pair.asymmetry() <= 1e-14);
        prop_assert!(pair.persymmetry_defect() <= 1e-12);
    }

    #[test]
    fn neumann_constants_stay_in_kernel(p in 2usize..=6, grid in quasi_uniform_grid_strategy()) {
        let kind = ProblemKind::Neumann;
        let space = SplineSpace::new(p, grid);
        let rule = default_rule(&space).unwrap();
        let plain = assemble_standard(&space, kind, &rule).unwrap();
        let pair = assemble_dc(&space, &PenaltyConfig::default_for(kind, p), &rule).unwrap();
        let ones = DVector::from_element(pair.dim(), 1.0);
        prop_assert!((&pair.stiffness * &ones).amax() <= 1e-12 * pair.stiffness.amax());
        let scale = (&pair.mass - &plain.mass).amax().max(plain.mass.amax());
        prop_assert!((&pair.mass * &ones - &plain.mass * &ones).amax() <= 1e-12 * scale);
    }

    #[test]
    fn neumann_zero_mode_survives_correction(p in 2usize..=6, n in 2usize..=40) {
        let kind = ProblemKind::Neumann;
        let space = SplineSpace::uniform(p, n).unwrap();
        let pair = assemble_dc(&space, &PenaltyConfig::default_for(kind, p), &default_rule(&space).unwrap()).unwrap();
        let s = gevp(&pair, false).unwrap();
        prop_assert!(s.values[0].abs() <= 1e-10 * s.max(), "{:e} vs {:e}", s.values[0], s.max());
    }

    #[test]
    fn uncorrected_eigenvalues_bound_exact_from_above(p in 1usize..=5, n in 4usize..=24, neumann in any::<bool>()) {
        let kind = if neumann { ProblemKind::Neumann } else { ProblemKind::Dirichlet };
        let space = SplineSpace::uniform(p, n).unwrap();
        let pair = assemble_standard(&space, kind, &default_rule(&space).unwrap()).unwrap();
        let s = gevp(&pair, false).unwrap();
        let exact = exact_spectrum(kind, 1, s.len()).unwrap();
        let report = eigenvalue_errors(&s.values, &exact).unwrap();
        for m in report.modes.iter().filter(|m| !m.absolute) {
            prop_assert!(m.rel_err > -1e-10, "mode {} error {:e}", m.j, m.rel_err);
        }
    }

    #[test]
    fn eigenvectors_are_m_orthonormal(pair in (2usize..=8).prop_flat_map(random_pair)) {
        let s = gevp(&pair, true).unwrap();
        let (dm, dk) = s.orthonormality_defect(&pair).unwrap();
        prop_assert!(dm <= 1e-10 && dk <= 1e-10);
    }

    #[test]
    fn solver_matches_inertia_bisection(pair in random_pair(6)) {
        let s = gevp(&pair, false).unwrap();
        let oracle = bisection_eigenvalues(&pair.stiffness, &pair.mass);
        let scale = oracle.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (a, b) in s.values.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn kronecker_sum_is_separable(pairs in prop::collection::vec((1usize..=4).prop_flat_map(random_pair), 2..=3)) {
        let sys = TensorSystem::new(pairs).unwrap();
        let sep = solve_separable(&sys, false).unwrap();
        let dense = gevp(&kron_sum_matrices(&sys, DEFAULT_DENSE_CAP).unwrap(), false).unwrap();
        let scale = dense.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (a, b) in sep.values.iter().zip(&dense.values) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn subtract_case_closed_form(spec in spec_strategy(BoundaryCase::Subtract)) {
        check_theorem(&spec)?;
    }

    #[test]
    fn add_case_closed_form(spec in spec_strategy(BoundaryCase::Add)) {
        check_theorem(&spec)?;
    }

    #[test]
    fn interior_dispersion_matches_reduced_spectrum(n in 6usize..=40, frac in 0.0f64..1.0) {
        let exact = analytical_spectrum_cubic_dirichlet(n).unwrap();
        let j = 1 + ((frac * (n - 1) as f64) as usize).min(n - 2);
        let h = 1.0 / n as f64;
        let t = j as f64 * PI * h;
        let lambda_h = dispersion_interior(DispersionCase::CubicDirichlet, t).unwrap() / (h * h);
        prop_assert!((lambda_h - exact.values[j - 1]).abs() <= 1e-10 * exact.values[j - 1]);
    }
}

#[test]
fn degenerate_pairs_are_kept() {
    let space = SplineSpace::uniform(3, 6).unwrap();
    let pair = assemble_standard(&space, ProblemKind::Dirichlet, &default_rule(&space).unwrap()).unwrap();
    let sys = TensorSystem::new(vec![pair.clone(), pair]).unwrap();
    let s = solve_separable(&sys, false).unwrap();
    let a = s.indices.iter().position(|i| i == &vec![0, 1]).unwrap();
    let b = s.indices.iter().position(|i| i == &vec![1, 0]).unwrap();
    assert_eq!(b, a + 1);
    assert_eq!(s.values[a], s.values[b]);
}

#[test]
fn reduced_cubic_spectrum_is_monotone() {
    for n in (6..=512).step_by(13) {
        let s = analytical_spectrum_cubic_dirichlet(n).unwrap();
        assert!(s.values.windows(2).all(|w| w[0] < w[1]), "N={n}");
        // Closed-form and assembled values agree on the way.
        if n <= 60 {
            let g = gevp(&reduced_cubic_dirichlet(n).unwrap(), false).unwrap();
            for (a, b) in g.values.iter().zip(&s.values) {
                assert!((a - b).abs() <= 1e-9 * b);
            }
        }
    }
}

#[test]
fn correction_keeps_low_modes_accurate() {
    let kind = ProblemKind::Dirichlet;
    for p in 3..=6 {
        let space = SplineSpace::uniform(p, 64).unwrap();
        let rule = default_rule(&space).unwrap();
        let exact = exact_spectrum(kind, 1, 3).unwrap();
        let plain = gevp(&assemble_standard(&space, kind, &rule).unwrap(), true).unwrap();
        let penalty = PenaltyConfig::default_for(kind, p);
        let dc = gevp(&assemble_dc(&space, &penalty, &rule).unwrap(), true).unwrap();
        // Rayleigh quotients lift the comparison above solver roundoff.
        let plain = dciga::assembly::refine_spectrum(&space, kind, None, &plain).unwrap();
        let dc = dciga::assembly::refine_spectrum(&space, kind, Some(&penalty), &dc).unwrap();
        for j in 0..3 {
            let e_plain = (plain.values[j] - exact.values[j]).abs() / exact.values[j];
            let e_dc = (dc.values[j] - exact.values[j]).abs() / exact.values[j];
            let floor = 1e-13;
            assert!(e_dc <= 2.0 * e_plain.max(floor), "p={p} mode {}: {e_plain:e} vs {e_dc:e}", j + 1);
        }
    }
}
