use std::sync::OnceLock;

use mixed_christoffel::algebra::{mixed_discriminant, SymMatrix};
use mixed_christoffel::bodies::{
    weingarten_form, BodySpec, IdentityTensor, PerturbedIdentity, ScaledTensor, SymTensorField, TensorFunction,
    WeightedBody,
};
use mixed_christoffel::conditions::{check_cond_l, check_cond_n2, check_gm, CheckOptions};
use mixed_christoffel::diagnostics::rank_profile;
use mixed_christoffel::jets::ScalarField;
use mixed_christoffel::solver::{operator_apply, solve, SolveOptions};
use mixed_christoffel::sphere::{
    build_grid, rotate_frame, sh_analysis, sh_count, sh_synthesis, FramedGrid, NodalField, SphericalField,
};
use nalgebra::{DMatrix, Matrix2, Matrix3};
use proptest::prelude::*;

fn grid16() -> &'static FramedGrid {
    static G: OnceLock<FramedGrid> = OnceLock::new();
    G.get_or_init(|| build_grid(16, 32).unwrap())
}

fn grid8() -> &'static FramedGrid {
    static G: OnceLock<FramedGrid> = OnceLock::new();
    G.get_or_init(|| build_grid(8, 16).unwrap())
}

fn sym(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| SymMatrix::symmetrize(DMatrix::from_vec(n, n, v)))
}

fn spd(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| {
        let b = DMatrix::from_vec(n, n, v);
        SymMatrix::symmetrize(&b * b.transpose() + DMatrix::identity(n, n) * 0.1)
    })
}

fn tuple() -> impl Strategy<Value = Vec<SymMatrix>> {
    (2usize..=5).prop_flat_map(|n| prop::collection::vec(sym(n), n))
}

/// Band-limited field with the given degrees, coefficients in [-amp, amp].
fn field(l_min: usize, l_max: usize, amp: f64) -> impl Strategy<Value = SphericalField> {
    prop::collection::vec(-amp..amp, sh_count(l_max)).prop_map(move |c| {
        let mut f = SphericalField::from_coeffs(l_max, c).unwrap();
        for l in 0..l_min {
            for m in -(l as i64)..=(l as i64) {
                f.set_coeff(l, m, 0.0);
            }
        }
        f
    })
}

fn ellipsoid() -> impl Strategy<Value = BodySpec> {
    (0.7..1.4f64, 0.7..1.4f64, 0.7..1.4f64).prop_map(|(a, b, c)| BodySpec::ellipsoid(a, b, c))
}

fn sym3() -> impl Strategy<Value = Matrix3<f64>> {
    prop::collection::vec(-1.0..1.0f64, 9).prop_map(|v| {
        let m = Matrix3::from_vec(v);
        (m + m.transpose()) * 0.5
    })
}

/// `P(I + h S)P` with small `h`, elliptic on S².
fn elliptic_tensor() -> impl Strategy<Value = PerturbedIdentity> {
    (field(0, 3, 0.15), sym3()).prop_map(|(h, s)| PerturbedIdentity { terms: vec![(h, s)] })
}

/// `1/f = 1 + ψ` with `ψ` a small degree 2..4 field, so `f > 0`.
fn density() -> impl Strategy<Value = ScalarField> {
    field(2, 4, 0.08).prop_map(|psi| {
        ScalarField::reciprocal(ScalarField::sum(vec![ScalarField::constant(1.0), ScalarField::harmonic(psi)]))
    })
}

/// As [`density`] but with `ψ` even, so `f` is even and compatible.
fn even_density() -> impl Strategy<Value = ScalarField> {
    field(2, 4, 0.08).prop_map(|mut psi| {
        for m in -3..=3 {
            psi.set_coeff(3, m, 0.0);
        }
        ScalarField::reciprocal(ScalarField::sum(vec![ScalarField::constant(1.0), ScalarField::harmonic(psi)]))
    })
}

fn fast_opts() -> CheckOptions {
    CheckOptions {
        n_dirs: 8,
        frames_per_node: 4,
        n_samples: 128,
        ..CheckOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analysis_inverts_synthesis_and_preserves_energy(f in field(0, 12, 1.0)) {
        let grid = grid16();
        let values = sh_synthesis(&f, grid).unwrap();
        let back = sh_analysis(&values, grid, 12).unwrap();
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let energy: f64 = f.coeffs().iter().map(|c| c * c).sum();
        let quad = grid.integrate(&values.iter().map(|v| v * v).collect::<Vec<_>>()).unwrap();
        prop_assert!((energy - quad).abs() <= 1e-8 * energy.max(1.0));
    }

    #[test]
    fn discriminant_is_symmetric(ms in tuple(), seed in any::<u64>()) {
        let mut perm = ms.clone();
        let n = perm.len();
        for i in (1..n).rev() {
            perm.swap(i, (seed as usize).wrapping_add(i * 7919) % (i + 1));
        }
        let a = mixed_discriminant(&ms).unwrap();
        let b = mixed_discriminant(&perm).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn discriminant_is_multilinear(ms in tuple(), alpha in -2.0..2.0f64, beta in -2.0..2.0f64, slot in 0usize..5) {
        let n = ms.len();
        let slot = slot % n;
        let other = SymMatrix::symmetrize(ms[0].matrix().transpose() * ms[n - 1].matrix());
        let mut combined = ms.clone();
        combined[slot] = ms[slot].scaled(alpha).add(&other.scaled(beta));
        let mut replaced = ms.clone();
        replaced[slot] = other;
        let lhs = mixed_discriminant(&combined).unwrap();
        let rhs = alpha * mixed_discriminant(&ms).unwrap() + beta * mixed_discriminant(&replaced).unwrap();
        let scale = 1.0 + alpha.abs() + beta.abs();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale * 10.0);
    }

    #[test]
    fn discriminant_of_repeated_matrix_is_det(m in (2usize..=5).prop_flat_map(sym)) {
        let n = m.n();
        let d = mixed_discriminant(&vec![m.clone(); n]).unwrap();
        prop_assert!((d - m.det()).abs() <= 1e-10);
    }

    #[test]
    fn discriminant_is_positive_on_spd_tuples(ms in (2usize..=5).prop_flat_map(|n| prop::collection::vec(spd(n), n))) {
        prop_assert!(mixed_discriminant(&ms).unwrap() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weingarten_form_ignores_translation(r in 0.3..3.0f64, v in prop::array::uniform3(-2.0..2.0f64)) {
        let grid = grid16();
        let a = weingarten_form(&BodySpec::ball(r), grid).unwrap();
        let b = weingarten_form(&BodySpec::TranslatedBall { r, v }, grid).unwrap();
        for i in 0..grid.len() {
            prop_assert!((a.at(i) - b.at(i)).amax() <= 1e-10);
        }
    }

    #[test]
    fn contraction_is_frame_independent(body in ellipsoid(), w in ellipsoid(), angle in 0.0..6.3f64) {
        let grid = grid8();
        let a = mixed_christoffel::bodies::CofactorTensor::new(std::slice::from_ref(&body)).unwrap();
        for i in 0..grid.len() {
            let x = grid.node(i);
            let f1 = *grid.frame(i);
            let f2 = rotate_frame(&f1, angle);
            let t1 = a.in_frame(x, &f1).component_mul(&w.jet(x).in_frame(&f1)).sum();
            let t2 = a.in_frame(x, &f2).component_mul(&w.jet(x).in_frame(&f2)).sum();
            prop_assert!((t1 - t2).abs() <= 1e-10);
        }
    }

    #[test]
    fn weingarten_form_is_linear_under_minkowski_sums(a in ellipsoid(), b in ellipsoid(), s in 0.1..2.0f64, t in 0.1..2.0f64) {
        let grid = grid8();
        let sum = BodySpec::MinkowskiSum {
            parts: vec![WeightedBody { body: a.clone(), weight: s }, WeightedBody { body: b.clone(), weight: t }],
        };
        let ws = weingarten_form(&sum, grid).unwrap();
        let wa = weingarten_form(&a, grid).unwrap();
        let wb = weingarten_form(&b, grid).unwrap();
        for i in 0..grid.len() {
            prop_assert!((ws.at(i) - (wa.at(i) * s + wb.at(i) * t)).amax() <= 1e-10);
        }
    }

    #[test]
    fn linear_functions_are_in_the_kernel(tensor in elliptic_tensor(), v in prop::array::uniform3(-1.0..1.0f64)) {
        let grid = grid8();
        let a = tensor.sample(grid);
        let norm = a.values().iter().map(|m| m.amax()).fold(0.0, f64::max);
        let mut u = SphericalField::zeros(1);
        for (m, c) in [(1, v[0]), (-1, v[1]), (0, v[2])] {
            u.set_coeff(1, m, c);
        }
        let out = operator_apply(&a, &u, grid).unwrap();
        prop_assert!(out.max_abs() <= 1e-10 * norm.max(1.0));
    }

    #[test]
    fn residual_does_not_grow_with_degree(tensor in elliptic_tensor(), f in field(2, 10, 1.0), c in 1.0..3.0f64) {
        let grid = grid16();
        let a = tensor.sample(grid);
        let mut f = f;
        f.set_coeff(0, 0, c * 10.0);
        let values = NodalField::new(grid.nodes().iter().map(|x| f.value_at(x)).collect());
        let opts = SolveOptions { residual_tol: 1e300, ..SolveOptions::default() };
        let mut last = f64::INFINITY;
        for l in [2, 4, 6, 8, 10, 12] {
            let r = solve(&a, &values, grid, l, &opts).unwrap();
            prop_assert!(r.residual_l2 <= last + 1e-12);
            last = r.residual_l2;
        }
    }

    #[test]
    fn cond_n2_reduces_to_gm_for_identity(f in density()) {
        let grid = grid8();
        let opts = fast_opts();
        let gm = check_gm(&f, grid, opts.tol).unwrap();
        let n2 = check_cond_n2(&IdentityTensor, &f, grid, &opts).unwrap();
        prop_assert_eq!(gm.pass, n2.pass);
        prop_assert!((gm.margin - n2.margin).abs() <= 1e-8);
    }

    #[test]
    fn more_frames_never_raise_the_margin(tensor in elliptic_tensor(), f in density(), seed in any::<u64>()) {
        let grid = grid8();
        let mut margins_n2 = Vec::new();
        let mut margins_l = Vec::new();
        for k in [2, 4, 8] {
            let opts = CheckOptions { n_dirs: k, frames_per_node: k, seed, ..fast_opts() };
            margins_n2.push(check_cond_n2(&tensor, &f, grid, &opts).unwrap().margin);
            margins_l.push(check_cond_l(&tensor, &f, grid, &opts).unwrap().margin);
        }
        for w in margins_n2.windows(2).chain(margins_l.windows(2)) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn scaling_a_and_f_together_changes_nothing(tensor in elliptic_tensor(), f in density(), c in 0.1..10.0f64) {
        let grid = grid8();
        let opts = fast_opts();
        let scaled_a = ScaledTensor { scale: ScalarField::constant(c), inner: tensor.clone() };
        let scaled_f = ScalarField::Scaled { factor: c, of: Box::new(f.clone()) };
        let n2 = check_cond_n2(&tensor, &f, grid, &opts).unwrap();
        let n2s = check_cond_n2(&scaled_a, &scaled_f, grid, &opts).unwrap();
        let l = check_cond_l(&tensor, &f, grid, &opts).unwrap();
        let ls = check_cond_l(&scaled_a, &scaled_f, grid, &opts).unwrap();
        prop_assert_eq!(n2.pass, n2s.pass);
        prop_assert_eq!(l.pass, ls.pass);
        prop_assert!((n2.margin - n2s.margin).abs() <= 1e-10);
        prop_assert!((l.margin - ls.margin).abs() <= 1e-10);
    }

    #[test]
    fn admissible_data_gives_full_rank(f in even_density()) {
        let grid = grid16();
        let opts = fast_opts();
        let gm = check_gm(&f, grid, opts.tol).unwrap();
        let n2 = check_cond_n2(&IdentityTensor, &f, grid, &opts).unwrap();
        prop_assume!(gm.pass && n2.pass);
        let a = SymTensorField::identity(grid);
        let values = NodalField::new(grid.nodes().iter().map(|x| {
            use mixed_christoffel::jets::SphereFunction;
            f.value(x)
        }).collect());
        let opts = SolveOptions { residual_tol: 1e-4, ..SolveOptions::default() };
        let r = solve(&a, &values, grid, 16, &opts).unwrap();
        let w = mixed_christoffel::solver::solution_weingarten(&r.u_coeffs, grid);
        prop_assert!(rank_profile(&w, None).unwrap().min_eig > 0.0);
    }

    #[test]
    fn phi_vanishes_exactly_on_low_rank_nodes(
        diag in prop::collection::vec((0.0..2.0f64, 0.0..2.0f64, 0.0..1.0f64, 0usize..3), 128)
    ) {
        let grid = grid8();
        let values: Vec<Matrix2<f64>> = diag.iter().map(|&(a, b, angle, zeros)| {
            let (a, b) = match zeros { 0 => (0.0, 0.0), 1 => (0.0, 0.5 + b), _ => (0.5 + a, 0.5 + b) };
            let r = nalgebra::Rotation2::new(angle * std::f64::consts::PI).into_inner();
            r * Matrix2::new(a, 0.0, 0.0, b) * r.transpose()
        }).collect();
        let w = SymTensorField::new(values.iter().map(|m| (m + m.transpose()) * 0.5).collect(), grid).unwrap();
        let p = rank_profile(&w, Some(1e-9)).unwrap();
        if let Some(phi) = &p.phi {
            for (v, &r) in phi.iter().zip(&p.ranks) {
                prop_assert!(*v >= 0.0);
                prop_assert_eq!(*v == 0.0, r <= p.l);
            }
        }
    }
}
