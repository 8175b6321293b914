use std::sync::Arc;

use gbhe_core::memory::{memory_quadratic_form, KernelSpec};
use gbhe_core::mesh::Mesh;
use gbhe_core::polybasis::{
    gauss_legendre, legendre_eval, simplex_quadrature, ElementFamily, SpatialBasis, MAX_SIMPLEX_DEGREE,
    MAX_SPATIAL_DEGREE,
};
use gbhe_core::space_fem::{reaction, FunctionSpace};
use gbhe_core::timestepper::{temporal_coupling_matrices, TimePartition};
use proptest::prelude::*;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_legendre_integrates_polynomials(n in 1usize..12, coeffs in prop::collection::vec(-2.0f64..2.0, 24)) {
        let deg = 2 * n - 1;
        let poly = |x: f64| coeffs[..=deg].iter().rev().fold(0.0, |acc, c| acc * x + c);
        let exact: f64 = (0..=deg).step_by(2).map(|k| 2.0 * coeffs[k] / (k + 1) as f64).sum();
        let rule = gauss_legendre(n);
        let got = rule.integrate_1d(poly);
        prop_assert!((got - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn triangle_rules_integrate_monomials(degree in 0usize..=MAX_SIMPLEX_DEGREE, a in 0usize..8, b in 0usize..8) {
        prop_assume!(a + b <= degree);
        let rule = simplex_quadrature(ElementFamily::Triangle, degree).unwrap();
        let got = rule.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
        let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        prop_assert!((got - exact).abs() <= 1e-14);
    }

    #[test]
    fn temporal_matrices_satisfy_integration_by_parts(p in 0usize..8, k in 0.01f64..2.0) {
        // C + C^T = phi(1) phi(1)^T + phi(-1) phi(-1)^T
        let (c, t) = temporal_coupling_matrices(p, k);
        let n = p + 1;
        let left = legendre_eval(p, -1.0).0;
        let right = legendre_eval(p, 1.0).0;
        for l in 0..n {
            for m in 0..n {
                let sym = c[l * n + m] + c[m * n + l];
                prop_assert!((sym - right[l] * right[m] - left[l] * left[m]).abs() < 1e-12);
                let tm = if l == m { k / (2 * l + 1) as f64 } else { 0.0 };
                prop_assert!((t[l * n + m] - tm).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lagrange_bases_form_partition_of_unity(degree in 1usize..=MAX_SPATIAL_DEGREE, tri in any::<bool>(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let family = if tri { ElementFamily::Triangle } else { ElementFamily::Interval };
        let basis = SpatialBasis::new(family, degree).unwrap();
        let p = if tri { [x * (1.0 - y), y] } else { [x, 0.0] };
        let v = basis.values(p);
        let g = basis.grads(p);
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(g.iter().map(|d| d[0]).sum::<f64>().abs() < 1e-10);
        prop_assert!(g.iter().map(|d| d[1]).sum::<f64>().abs() < 1e-10);
        for (i, node) in basis.nodes().iter().enumerate() {
            let vi = basis.values(*node);
            for (j, val) in vi.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((val - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reaction_derivative_matches_difference(u in -1.5f64..1.5, delta in 1u32..4, gamma in 0.0f64..1.0) {
        let (c, dc) = reaction(u, delta, gamma);
        let direct = u * (1.0 - u.powi(delta as i32)) * (u.powi(delta as i32) - gamma);
        prop_assert!((c - direct).abs() < 1e-13);
        let h = 1e-6;
        let fd = (reaction(u + h, delta, gamma).0 - reaction(u - h, delta, gamma).0) / (2.0 * h);
        prop_assert!((dc - fd).abs() < 1e-6 * (1.0 + dc.abs()));
    }

    #[test]
    fn memory_form_is_nonnegative(
        steps in prop::collection::vec(0.05f64..1.0, 1..10),
        values in prop::collection::vec(-1.0f64..1.0, 10),
        sigma in 0.2f64..0.8,
    ) {
        let mut nodes = vec![0.0];
        for s in &steps {
            nodes.push(nodes.last().unwrap() + s);
        }
        let part = TimePartition::new(nodes, vec![0; steps.len()]).unwrap();
        let kernel = KernelSpec::power(sigma, 1.0).unwrap();
        let q = memory_quadratic_form(&part, &kernel, &values[..steps.len()]).unwrap();
        prop_assert!(q >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_and_stiffness_invariants(n in 1usize..6, degree in 1usize..=MAX_SPATIAL_DEGREE, tri in any::<bool>(), dg in any::<bool>()) {
        let mesh = if tri {
            Mesh::unit_square_triangulation(n, [0.0, 2.0], [0.0, 1.0]).unwrap()
        } else {
            Mesh::interval(n, -1.0, 2.0).unwrap()
        };
        let measure = if tri { 2.0 } else { 3.0 };
        let mesh = Arc::new(mesh);
        let space = if dg {
            FunctionSpace::discontinuous(mesh, degree).unwrap()
        } else {
            FunctionSpace::continuous(mesh, degree).unwrap()
        };
        let ones = vec![1.0; space.n_dof()];
        let mass = space.assemble_mass();
        prop_assert!((mass.bilinear(&ones, &ones) - measure).abs() < 1e-12);
        prop_assert!(mass.asymmetry() <= 1e-15 * mass.max_abs());
        let stiff = space.assemble_stiffness();
        prop_assert!(stiff.matvec(&ones).iter().all(|r| r.abs() < 1e-10));
        // the linear function x has energy |Omega|
        let x = space.interpolate(&|p| p[0]);
        prop_assert!((stiff.bilinear(&x, &x) - measure).abs() < 1e-10);
    }
}
