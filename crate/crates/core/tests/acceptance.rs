//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any fails.

use std::time::Instant;

use mixed_christoffel::algebra::{mixed_cofactor, mixed_discriminant, cofactor_matrix, sigma_k, SymMatrix};
use mixed_christoffel::bodies::{
    codazzi_defect, weingarten_form, BodySpec, CofactorTensor, IdentityTensor, SymTensorField, TensorFunction,
    WeightedBody,
};
use mixed_christoffel::conditions::{
    check_cond_l, check_cond_n2, check_gm, check_matrix_convexity, check_new_form_3d, CheckOptions,
};
use mixed_christoffel::diagnostics::{
    body_density, density_moments, minkowski_identity_check, mixed_volume_pairing, rank_profile, recovered_density,
};
use mixed_christoffel::jets::ScalarField;
use mixed_christoffel::solver::{operator_apply, solution_weingarten, solve, SolveOptions};
use mixed_christoffel::sphere::{build_grid, real_harmonic, rotate_frame, NodalField, SphericalField};
use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    SymMatrix::symmetrize(DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// (1/n!) Σ_{∅≠S⊆[n]} (−1)^{n−|S|} det(Σ_{i∈S} Mᵢ)
fn inclusion_exclusion(ms: &[SymMatrix]) -> f64 {
    let n = ms.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut sum = DMatrix::zeros(n, n);
        for (i, m) in ms.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum += m.matrix();
            }
        }
        let sign = if (n - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * sum.determinant();
    }
    total / factorial(n)
}

fn christoffel_ball() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let (rep, grid) = pool.install(|| {
        let grid = build_grid(16, 32).unwrap();
        let a = IdentityTensor.sample(&grid);
        let f = NodalField::new(vec![2.0; grid.len()]);
        (solve(&a, &f, &grid, 16, &SolveOptions::default()), grid)
    });
    let elapsed = start.elapsed().as_secs_f64();
    let rep = rep.map_err(|e| e.to_string())?;
    // check on the solve grid and on a finer one
    let fine = build_grid(40, 80).unwrap();
    let err = grid
        .nodes()
        .iter()
        .chain(fine.nodes())
        .map(|x| (rep.u_coeffs.value_at(x) - 1.0).abs())
        .fold(0.0, f64::max);
    check(
        err <= 1e-8 && elapsed <= 10.0,
        format!("|u - 1|_inf = {err:.2e} (<= 1e-8), single-thread time {elapsed:.2} s (<= 10 s)"),
    )
}

fn spectral_operator() -> Outcome {
    let grid = build_grid(32, 64).unwrap();
    let a = SymTensorField::identity(&grid);
    let mut worst: f64 = 0.0;
    for l in 0..=12usize {
        for m in -(l as i64)..=(l as i64) {
            let out = operator_apply(&a, &SphericalField::single(l, m, 1.0), &grid).map_err(|e| e.to_string())?;
            let factor = 2.0 - (l * (l + 1)) as f64;
            for (i, v) in out.values().iter().enumerate() {
                worst = worst.max((v - factor * real_harmonic(l, m, grid.node(i))).abs());
            }
        }
    }
    check(worst <= 1e-8, format!("max node error {worst:.2e} over l <= 12, all m (<= 1e-8)"))
}

fn discriminant_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_rel: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    for t in 0..200 {
        let n = 2 + t % 4;
        let ms: Vec<_> = (0..n).map(|_| random_sym(&mut rng, n)).collect();
        let a = mixed_discriminant(&ms).unwrap();
        let b = inclusion_exclusion(&ms);
        let scale: f64 = ms.iter().map(|m| m.matrix().amax()).product();
        worst_rel = worst_rel.max((a - b).abs() / scale);
        let d = mixed_discriminant(&vec![ms[0].clone(); n]).unwrap();
        worst_diag = worst_diag.max((d - ms[0].det()).abs() / ms[0].matrix().amax().powi(n as i32));
    }
    check(
        worst_rel <= 1e-10 && worst_diag <= 1e-10,
        format!("200 tuples n=2..5: relative error {worst_rel:.2e}, D(M,..,M) vs det {worst_diag:.2e} (<= 1e-10)"),
    )
}

fn cofactor_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for n in 2..=5 {
        for _ in 0..20 {
            let ms: Vec<_> = (0..n - 1).map(|_| random_sym(&mut rng, n)).collect();
            let m = random_sym(&mut rng, n);
            let c = mixed_cofactor(&ms).unwrap();
            let contracted = c.matrix().component_mul(m.matrix()).sum();
            let mut all = ms.clone();
            all.push(m);
            worst = worst.max((contracted - mixed_discriminant(&all).unwrap()).abs());
        }
    }
    let identity_exact = (2..=5).all(|n| cofactor_matrix(&vec![SymMatrix::identity(n); n - 1]).unwrap() == SymMatrix::identity(n));
    let mut adj_exact = true;
    for _ in 0..50 {
        let b = random_sym(&mut rng, 2);
        let bm = b.to_matrix2();
        let adj = Matrix2::new(bm[(1, 1)], -bm[(0, 1)], -bm[(1, 0)], bm[(0, 0)]);
        adj_exact &= cofactor_matrix(&[b]).unwrap().to_matrix2() == adj;
    }
    check(
        worst <= 1e-10 && identity_exact && adj_exact,
        format!(
            "sum c_ij m_ij vs D: {worst:.2e} (<= 1e-10); cofactor_matrix(I..I) = I exactly: {identity_exact}; n=2 adjugate exact: {adj_exact}"
        ),
    )
}

fn sigma_polarization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for n in 1..=5 {
        for _ in 0..10 {
            let m = random_sym(&mut rng, n);
            for k in 0..=n {
                let mut args = vec![m.clone(); k];
                args.extend(vec![SymMatrix::identity(n); n - k]);
                let lhs = binomial(n, k) * mixed_discriminant(&args).unwrap();
                worst = worst.max((lhs - sigma_k(&m, k).unwrap()).abs());
            }
        }
    }
    check(worst <= 1e-10, format!("max |C(n,k) D(M^k, I^(n-k)) - sigma_k(M)| = {worst:.2e}, n <= 5 (<= 1e-10)"))
}

fn roundtrip() -> Outcome {
    let grid = build_grid(32, 64).unwrap();
    let body = BodySpec::ellipsoid(1.0, 1.1, 1.2);
    let a = CofactorTensor::new(std::slice::from_ref(&body)).unwrap().sample(&grid);
    let target = SphericalField::constant(1.0).add(&SphericalField::single(3, 2, 0.1));
    let f = operator_apply(&a, &target, &grid).map_err(|e| e.to_string())?;
    let rep = solve(&a, &f, &grid, 24, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let mut padded = target.clone();
    padded.resize(24);
    let diff: f64 = rep.u_coeffs.coeffs().iter().zip(padded.coeffs()).map(|(a, b)| (a - b).powi(2)).sum();
    let norm: f64 = padded.coeffs().iter().map(|c| c * c).sum();
    let rel = (diff / norm).sqrt();
    let recovered = recovered_density(&[body], &rep.u_coeffs, &grid).unwrap();
    let dens_rel = recovered.l2_distance(&f, &grid).unwrap() / f.l2_norm(&grid).unwrap();
    let profile = rank_profile(&solution_weingarten(&rep.u_coeffs, &grid), None).unwrap();
    check(
        rel <= 1e-6 && dens_rel <= 1e-6 && profile.min_eig > 0.0,
        format!(
            "relative L2 error {rel:.2e}, recovered density error {dens_rel:.2e} (<= 1e-6), min eig W[u] = {:.4}",
            profile.min_eig
        ),
    )
}

fn condition_calibration() -> Outcome {
    let grid = build_grid(32, 64).unwrap();
    let one = ScalarField::constant(1.0);
    let opts = CheckOptions::default();
    let gm = check_gm(&one, &grid, opts.tol).unwrap();
    let n2 = check_cond_n2(&IdentityTensor, &one, &grid, &opts).unwrap();
    let cl = check_cond_l(&IdentityTensor, &one, &grid, &opts).unwrap();
    let unit_ok = [&gm, &n2, &cl].iter().all(|v| v.pass && (v.margin - 1.0).abs() <= 1e-8);
    let bad = ScalarField::reciprocal(ScalarField::one_plus_zonal(2, 0.6));
    let v = check_gm(&bad, &grid, opts.tol).unwrap();
    let x = grid.node(v.witness.node);
    let pole_deg = x.z.abs().acos().to_degrees();
    check(
        unit_ok && !v.pass && (v.margin + 0.2).abs() <= 0.02 && pole_deg <= 5.0,
        format!(
            "unit margins gm {:.10} cond_n2 {:.10} cond_l {:.10}; 1/f = 1 + 0.6 P2: pass={} margin {:.4}, witness {pole_deg:.2} deg from pole",
            gm.margin, n2.margin, cl.margin, v.pass, v.margin
        ),
    )
}

fn reduction_consistency() -> Outcome {
    let grid = build_grid(16, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = CheckOptions::default();
    let mut agree = 0;
    let mut passes = 0;
    for t in 0..10 {
        let amp = 0.1 + 0.06 * t as f64;
        let mut psi = SphericalField::zeros(4);
        for l in 2..=4 {
            for m in -(l as i64)..=(l as i64) {
                psi.set_coeff(l, m, amp * rng.random_range(-1.0..1.0) / l as f64);
            }
        }
        let f = ScalarField::reciprocal(ScalarField::sum(vec![ScalarField::constant(1.0), ScalarField::harmonic(psi)]));
        let gm = check_gm(&f, &grid, opts.tol).unwrap();
        let n2 = check_cond_n2(&IdentityTensor, &f, &grid, &opts).unwrap();
        passes += gm.pass as usize;
        if gm.pass == n2.pass && gm.witness.node == n2.witness.node && (gm.margin - n2.margin).abs() <= 1e-8 {
            agree += 1;
        }
    }
    check(agree == 10, format!("{agree}/10 random f agree on verdict, margin and witness node ({passes} pass gm)"))
}

fn catalog() -> Vec<(&'static str, BodySpec)> {
    vec![
        ("ball", BodySpec::ball(1.0)),
        ("translated_ball", BodySpec::TranslatedBall { r: 1.0, v: [0.2, -0.1, 0.3] }),
        ("ellipsoid_1_1.1_1.2", BodySpec::ellipsoid(1.0, 1.1, 1.2)),
        ("ellipsoid_1_1_3", BodySpec::ellipsoid(1.0, 1.0, 3.0)),
        ("perturbation_0.02_Y2", BodySpec::perturbation(1.0, SphericalField::single(2, 1, 0.02))),
        ("perturbation_0.05_Y3", BodySpec::perturbation(1.0, SphericalField::single(3, -2, 0.05))),
        (
            "minkowski_sum",
            BodySpec::MinkowskiSum {
                parts: vec![
                    WeightedBody { body: BodySpec::ellipsoid(1.0, 1.3, 0.8), weight: 0.5 },
                    WeightedBody { body: BodySpec::ball(1.0), weight: 1.0 },
                ],
            },
        ),
    ]
}

fn implication_suite() -> Outcome {
    let grid = build_grid(16, 32).unwrap();
    let one = ScalarField::constant(1.0);
    let opts = CheckOptions::default();
    let mut matrix_passes = 0;
    let mut violations = Vec::new();
    let mut new_form_passes = 0;
    for (name, body) in catalog() {
        let mc = check_matrix_convexity(&body, &one, &grid, &opts).unwrap();
        let nf = check_new_form_3d(&body, &one, &grid, &opts).unwrap();
        matrix_passes += mc.pass as usize;
        new_form_passes += nf.pass as usize;
        if mc.pass && !nf.pass {
            violations.push(name);
        }
    }
    check(
        violations.is_empty(),
        format!(
            "{} bodies: matrix convexity passes {matrix_passes}, fourth-order condition passes {new_form_passes}, implication violations {violations:?}",
            catalog().len()
        ),
    )
}

fn structural_invariants() -> Outcome {
    let grid = build_grid(16, 32).unwrap();
    // balls have ∇W ≡ 0, where only the absolute defect is meaningful
    let mut worst_codazzi: f64 = 0.0;
    for (_, body) in catalog() {
        let (defect, norm) = codazzi_defect(&body, &grid);
        worst_codazzi = worst_codazzi.max(if norm > 1e-8 { defect / norm } else { defect });
    }
    let ball = weingarten_form(&BodySpec::ball(1.3), &grid).unwrap();
    let moved = weingarten_form(&BodySpec::TranslatedBall { r: 1.3, v: [0.4, -0.5, 0.2] }, &grid).unwrap();
    let translation = (0..grid.len()).map(|i| (ball.at(i) - moved.at(i)).amax()).fold(0.0, f64::max);
    let a = CofactorTensor::new(&[BodySpec::ellipsoid(1.0, 1.4, 0.9)]).unwrap();
    let w = BodySpec::perturbation(1.0, SphericalField::single(3, 1, 0.05));
    let mut frame_gap: f64 = 0.0;
    for i in 0..grid.len() {
        let x = grid.node(i);
        let f1 = *grid.frame(i);
        let f2 = rotate_frame(&f1, 0.37 + i as f64 * 0.01);
        let t1 = a.in_frame(x, &f1).component_mul(&w.jet(x).in_frame(&f1)).sum();
        let t2 = a.in_frame(x, &f2).component_mul(&w.jet(x).in_frame(&f2)).sum();
        frame_gap = frame_gap.max((t1 - t2).abs());
    }
    check(
        worst_codazzi <= 1e-6 && translation <= 1e-10 && frame_gap <= 1e-10,
        format!(
            "Codazzi defect {worst_codazzi:.2e} relative (<= 1e-6), translation {translation:.2e}, frame invariance {frame_gap:.2e} (<= 1e-10)"
        ),
    )
}

fn minkowski_identity() -> Outcome {
    let grid = build_grid(32, 64).unwrap();
    let e = minkowski_identity_check(&BodySpec::ellipsoid(1.0, 1.1, 1.2), 1, &grid).unwrap();
    let p = minkowski_identity_check(&BodySpec::perturbation(1.0, SphericalField::single(3, 0, 0.05)), 1, &grid).unwrap();
    check(
        (e.constant - 2.0).abs() <= 1e-12 && e.residual <= 1e-8 && p.residual <= 1e-8,
        format!(
            "C_21 = {:.14}; residual ellipsoid {:.2e}, perturbation {:.2e} (<= 1e-8)",
            e.constant, e.residual, p.residual
        ),
    )
}

fn random_body(rng: &mut ChaCha8Rng) -> BodySpec {
    match rng.random_range(0..4) {
        0 => BodySpec::ball(rng.random_range(0.5..2.0)),
        1 => BodySpec::ellipsoid(
            rng.random_range(0.8..1.3),
            rng.random_range(0.8..1.3),
            rng.random_range(0.8..1.3),
        ),
        2 => {
            let mut psi = SphericalField::zeros(3);
            for l in 2..=3 {
                for m in -(l as i64)..=(l as i64) {
                    psi.set_coeff(l, m, rng.random_range(-0.02..0.02));
                }
            }
            BodySpec::perturbation(rng.random_range(0.8..1.5), psi)
        }
        _ => BodySpec::TranslatedBall {
            r: 1.0,
            v: [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)],
        },
    }
}

fn pairing_and_moments() -> Outcome {
    let grid = build_grid(32, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst_pair: f64 = 0.0;
    let mut worst_moment: f64 = 0.0;
    for _ in 0..20 {
        let b1 = random_body(&mut rng);
        let omega = random_body(&mut rng);
        let omega_prime = random_body(&mut rng);
        let p = mixed_volume_pairing(std::slice::from_ref(&b1), &omega, &omega_prime, &grid).unwrap();
        worst_pair = worst_pair.max(p.relative);
        let d = body_density(&[b1, omega], &grid).unwrap();
        let mass = grid.integrate(&d.values().iter().map(|v| v.abs()).collect::<Vec<_>>()).unwrap();
        let m = density_moments(&d, &grid).unwrap();
        worst_moment = worst_moment.max(m.iter().fold(0.0f64, |a, v| a.max(v.abs())) / mass);
    }
    check(
        worst_pair <= 1e-8 && worst_moment <= 1e-9,
        format!("20 random pairs: pairing symmetry {worst_pair:.2e} (<= 1e-8), density moments {worst_moment:.2e} (<= 1e-9) relative"),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("christoffel_ball", christoffel_ball),
        ("spectral_operator_identity", spectral_operator),
        ("mixed_discriminant_oracle", discriminant_oracle),
        ("cofactor_identities", cofactor_identities),
        ("sigma_k_polarization", sigma_polarization),
        ("ellipsoid_roundtrip", roundtrip),
        ("condition_checker_calibration", condition_calibration),
        ("reduction_consistency", reduction_consistency),
        ("implication_suite", implication_suite),
        ("codazzi_translation_frame_invariance", structural_invariants),
        ("minkowski_identity", minkowski_identity),
        ("pairing_symmetry_and_moments", pairing_and_moments),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}) [{secs:.1} s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail}) [{secs:.1} s]", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
