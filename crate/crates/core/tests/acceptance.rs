//! Acceptance suite: every criterion the toolkit must meet, one test per
//! criterion, each printing a pass line with its measured runtime.
//! Run with `cargo test -p parinv-core --test acceptance`.

mod common;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use common::{random_cone, random_system, Conformance};
use parinv_core::bodies::{cone_normal_matrix, ConvexBody};
use parinv_core::criterion::{
    check_cone, check_theorem, structural_check, SampleGrid, VerdictStatus,
};
use parinv_core::linalg::{eigen_align, similarity_diagonalize};
use parinv_core::parabolicity::{
    min_real_eig, petrovskii_margin, symbol_matrix, MarginSampling,
};
use parinv_core::simulate::{
    falsify, frequency_samples, propagator_alignment, random_in_body, run_monitored,
    spectral_run, stability_gate, step_explicit, Grid, Scheme, SimConfig, SolutionField,
};
use parinv_core::system::Coefficients;

const TOL: f64 = 1e-9;

fn pass(id: u32, start: Instant, budget_s: f64, desc: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("ACCEPTANCE {id:02} PASS ({elapsed:.2}s): {desc}");
    // Budgets describe the optimized artifact; debug builds get slack.
    let budget = if cfg!(debug_assertions) { budget_s * 10.0 } else { budget_s };
    assert!(
        elapsed < budget,
        "criterion {id} exceeded its {budget_s}s budget: {elapsed:.2}s"
    );
}

fn upper_triangular_2x2(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            rng.random_range(0.5..2.0),
            rng.random_range(-1.0..1.0),
            0.0,
            rng.random_range(0.5..2.0),
        ],
    )
}

#[test]
fn acceptance_01_half_plane_triangular_criterion() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let body = ConvexBody::polyhedral_angle(2, vec![(1, -0.25)]).unwrap();
    let grid = SampleGrid::for_constant(2);

    // All matrices upper triangular: invariant.
    let second = vec![
        ((0, 0), upper_triangular_2x2(&mut rng)),
        ((0, 1), upper_triangular_2x2(&mut rng) * 0.1),
        ((1, 1), upper_triangular_2x2(&mut rng)),
    ];
    let first = vec![(0, upper_triangular_2x2(&mut rng)), (1, upper_triangular_2x2(&mut rng))];
    let sys = Coefficients::constant(2, 2, second.clone(), first.clone()).unwrap();
    let verdict = check_theorem(&sys, &body, &grid, TOL).unwrap();
    assert_eq!(verdict.status, VerdictStatus::Invariant);

    // One lower-left entry breaks it; the witness residual equals |A21|.
    let a21 = 0.37;
    let mut broken = second;
    broken[0].1[(1, 0)] = a21;
    let sys = Coefficients::constant(2, 2, broken, first).unwrap();
    let verdict = check_theorem(&sys, &body, &grid, TOL).unwrap();
    assert_eq!(verdict.status, VerdictStatus::NotInvariant);
    let w = verdict
        .witnesses
        .iter()
        .find(|w| !w.alignment.aligned)
        .expect("failing witness");
    assert!((w.alignment.residual - a21).abs() <= 1e-12);

    // Witness validity: re-evaluating the witness reproduces the failure.
    let sys_at = sys.evaluate(&w.location.x, w.location.t);
    let again = eigen_align(
        sys_at.second_order(0, 0),
        &DVector::from_row_slice(&w.normal),
        TOL,
    )
    .unwrap();
    assert!(!again.aligned);
    assert_eq!(again.residual, w.alignment.residual);

    pass(1, start, 1.0, "half-plane triangular criterion with exact |A21| residual");
}

#[test]
fn acceptance_02_shortcut_generic_agreement() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut trials = 0;
    while trials < 200 {
        let n = rng.random_range(1..=2);
        let conforming = trials % 2 == 0;
        let family = trials % 5;
        let (body, system) = match family {
            0 | 1 => {
                // Polyhedral angle / cylinder over a random index set.
                let m = rng.random_range(2..=4);
                let count = rng.random_range(1..=m);
                let mut idx: Vec<usize> = (0..m).collect();
                idx.shuffle(&mut rng);
                idx.truncate(count);
                idx.sort_unstable();
                let body = if family == 0 {
                    ConvexBody::polyhedral_angle(m, idx.iter().map(|&i| (i, -1.0)).collect())
                        .unwrap()
                } else {
                    ConvexBody::polyhedral_cylinder(
                        m,
                        idx.iter().map(|&i| (i, -1.0, 1.0)).collect(),
                    )
                    .unwrap()
                };
                let conf = if conforming { Conformance::ZeroRows } else { Conformance::Generic };
                (body, random_system(&mut rng, n, m, conf, &idx, None))
            }
            2 => {
                let m = rng.random_range(2..=4);
                let count = rng.random_range(1..=m);
                let mut idx: Vec<usize> = (0..m).collect();
                idx.shuffle(&mut rng);
                idx.truncate(count);
                idx.sort_unstable();
                let body = ConvexBody::spherical_cylinder(m, idx.clone(), 1.0).unwrap();
                let conf = if conforming {
                    Conformance::ZeroRowsEqualDiag
                } else {
                    Conformance::Generic
                };
                (body, random_system(&mut rng, n, m, conf, &idx, None))
            }
            3 => {
                let m = rng.random_range(2..=4);
                let orthant = ConvexBody::polyhedral_cone(
                    DVector::zeros(m),
                    (0..m)
                        .map(|i| {
                            let mut v = DVector::zeros(m);
                            v[i] = -1.0;
                            v
                        })
                        .collect(),
                )
                .unwrap();
                let n_mat = cone_normal_matrix(&orthant).unwrap();
                let conf = if conforming { Conformance::ConeDiagonal } else { Conformance::Generic };
                let sys = random_system(&mut rng, n, m, conf, &[], Some(&n_mat));
                (orthant, sys)
            }
            _ => {
                // p = m + 1 cones need room: m >= 3.
                let m = rng.random_range(3..=4);
                let cone = random_cone(&mut rng, m, m + 1);
                let conf = if conforming { Conformance::Scalar } else { Conformance::Generic };
                (cone, random_system(&mut rng, n, m, conf, &[], None))
            }
        };
        let grid = SampleGrid::for_constant(n);
        let generic = check_theorem(&system, &body, &grid, TOL).unwrap();
        let shortcut = structural_check(&system, &body, &grid, TOL)
            .unwrap()
            .expect("every family here has a shortcut");
        assert_eq!(
            generic.status, shortcut.status,
            "family {family} conforming={conforming} disagreed (trial {trials})"
        );
        trials += 1;
    }
    pass(2, start, 30.0, "200 randomized systems: structural vs generic verdicts agree");
}

#[test]
fn acceptance_03_cone_representation_roundtrip() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for trial in 0..100 {
        let m = rng.random_range(2..=4);
        let n = rng.random_range(1..=2);
        let cone = random_cone(&mut rng, m, m);
        let n_mat = cone_normal_matrix(&cone).unwrap();
        let nt = n_mat.transpose();
        let nt_inv = nt.clone().try_inverse().unwrap();

        let mut second = Vec::new();
        let mut expected = Vec::new();
        for j in 0..n {
            for k in j..n {
                let d = DVector::from_fn(m, |_, _| rng.random_range(0.5..3.0));
                let a = &nt_inv * DMatrix::from_diagonal(&d) * &nt;
                second.push(((j, k), a));
                expected.push(d);
            }
        }
        let sys = Coefficients::constant(n, m, second.clone(), vec![]).unwrap();
        let verdict = check_cone(&sys, &cone, &SampleGrid::for_constant(n), TOL).unwrap();
        assert_eq!(verdict.status, VerdictStatus::Invariant, "trial {trial}");

        for ((_, a), d) in second.iter().zip(&expected) {
            let recovered = similarity_diagonalize(a, &n_mat, TOL).unwrap().unwrap();
            let err = (&recovered - d).amax();
            assert!(err <= 1e-10, "trial {trial}: recovery error {err:.3e}");
            // Reassembly identity within 10x the tolerance scale.
            let reassembled = &nt_inv * DMatrix::from_diagonal(&recovered) * &nt;
            assert!((a - reassembled).norm() <= 10.0 * TOL * (1.0 + a.norm()));
        }
    }
    pass(3, start, 600.0, "100 cone systems rebuilt from diagonals, D recovered to 1e-10");
}

#[test]
fn acceptance_04_cone_normal_independence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..1000 {
        let m = rng.random_range(2..=6);
        let cone = random_cone(&mut rng, m, m);
        let n_mat = cone_normal_matrix(&cone).unwrap();
        assert!(n_mat.determinant().abs() > 1e-10);
    }
    // Duplicate normals are rejected outright.
    let dup = ConvexBody::polyhedral_cone(
        DVector::zeros(3),
        vec![
            DVector::from_row_slice(&[-1.0, 0.0, 0.0]),
            DVector::from_row_slice(&[-1.0, 0.0, 0.0]),
            DVector::from_row_slice(&[0.0, -1.0, 0.0]),
        ],
    );
    assert!(dup.is_err());
    pass(4, start, 600.0, "1000 random m-facet cones all nonsingular; duplicates rejected");
}

#[test]
fn acceptance_05_parabolicity_margins() {
    let start = Instant::now();

    let identity = Coefficients::heat(1, 2);
    let rep = petrovskii_margin(&identity, &MarginSampling::for_constant(1)).unwrap();
    assert!(rep.parabolic);
    assert!((rep.margin - 1.0).abs() <= 1e-12);

    let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let sys = Coefficients::constant(1, 2, vec![((0, 0), rot)], vec![]).unwrap();
    let rep = petrovskii_margin(&sys, &MarginSampling::for_constant(1)).unwrap();
    assert!(!rep.parabolic);

    // Cross-coupled n = 2 example against an independent 10^4-point oracle.
    let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    let c = DMatrix::identity(2, 2) * 0.1;
    let sys = Coefficients::constant(
        2,
        2,
        vec![((0, 0), d.clone()), ((1, 1), d), ((0, 1), c)],
        vec![],
    )
    .unwrap();
    let set = sys.evaluate(&[0.0, 0.0], 0.0);
    let mut oracle = f64::INFINITY;
    for i in 0..10_000 {
        let th = 2.0 * std::f64::consts::PI * i as f64 / 10_000.0;
        let sigma = DVector::from_row_slice(&[th.cos(), th.sin()]);
        oracle = oracle.min(min_real_eig(&symbol_matrix(&set, &sigma).unwrap()).unwrap());
    }
    let rep = petrovskii_margin(&sys, &MarginSampling::for_constant(2)).unwrap();
    assert!((rep.margin - 0.9).abs() <= 1e-3, "margin {}", rep.margin);
    assert!((rep.margin - oracle).abs() <= 1e-3);

    pass(5, start, 5.0, "identity / rotation / cross-coupled margins match oracles");
}

#[test]
fn acceptance_06_constant_data_conservation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for trial in 0..20 {
        let n = if trial % 4 == 0 { 2 } else { 1 };
        let m = rng.random_range(1..=3);
        let sys = random_system(&mut rng, n, m, Conformance::Generic, &[], None);
        let grid = if n == 1 {
            Grid::new(vec![1.0], vec![8]).unwrap()
        } else {
            Grid::new(vec![1.0, 1.0], vec![4, 4]).unwrap()
        };
        let v = DVector::from_fn(m, |_, _| rng.random_range(-2.0..2.0f64));
        let mut u = SolutionField::constant(grid, &v);
        let baseline = u.as_slice().to_vec();
        for _ in 0..10_000 {
            u = step_explicit(&u, &sys, 1e-3).unwrap();
        }
        assert_eq!(u.as_slice(), &baseline[..], "trial {trial} drifted");
    }
    pass(6, start, 600.0, "constant data bit-identical over 10^4 steps x 20 systems");
}

#[test]
fn acceptance_07_explicit_vs_spectral_convergence() {
    let start = Instant::now();
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.0, 2.0]);
    let b = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.0, -0.2]);
    let sys = Coefficients::constant(1, 2, vec![((0, 0), a)], vec![(0, b)]).unwrap();
    let t_end = 0.1;
    let l = 2.0 * std::f64::consts::PI;

    let mut gaps = Vec::new();
    for &points in &[64usize, 128, 256] {
        let grid = Grid::new(vec![l], vec![points]).unwrap();
        let psi = SolutionField::from_fn(grid, 2, |x| {
            DVector::from_row_slice(&[x[0].sin(), 0.3 * (2.0 * x[0]).cos()])
        });
        // dt scales with dx^2 so the time error refines alongside.
        let dt = 1e-3 * (64.0 / points as f64).powi(2);
        let mut u = psi.clone();
        while u.time < t_end - 1e-12 {
            u = step_explicit(&u, &sys, dt.min(t_end - u.time)).unwrap();
        }
        let exact = spectral_run(&sys, &psi, t_end).unwrap();
        gaps.push(u.linf_diff(&exact));
    }
    let order_1 = (gaps[0] / gaps[1]).log2();
    let order_2 = (gaps[1] / gaps[2]).log2();
    println!("gaps {gaps:?}, orders {order_1:.2} / {order_2:.2}");
    assert!(order_1 >= 1.9 && order_2 >= 1.9);
    assert!(gaps[2] <= 1e-4, "finest gap {:.3e}", gaps[2]);
    pass(7, start, 10.0, "FD vs spectral: order >= 1.9, finest gap <= 1e-4");
}

#[test]
fn acceptance_08_invariant_verdicts_corroborated() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let triangular = Coefficients::constant(
        1,
        2,
        vec![((0, 0), DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 2.0]))],
        vec![],
    )
    .unwrap();
    let spherical = Coefficients::constant(
        1,
        3,
        vec![(
            (0, 0),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.5, -0.2, 0.0, 5.0, 0.0, 0.0, 0.0, 5.0]),
        )],
        vec![],
    )
    .unwrap();
    let diagonal = Coefficients::constant(
        1,
        2,
        vec![((0, 0), DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 5.0]))],
        vec![],
    )
    .unwrap();
    let orthant = ConvexBody::polyhedral_cone(
        DVector::zeros(2),
        vec![
            DVector::from_row_slice(&[-1.0, 0.0]),
            DVector::from_row_slice(&[0.0, -1.0]),
        ],
    )
    .unwrap();
    let fixtures: Vec<(&str, Coefficients, ConvexBody)> = vec![
        (
            "triangular half-plane",
            triangular,
            ConvexBody::polyhedral_angle(2, vec![(1, 0.0)]).unwrap(),
        ),
        (
            "heat ball",
            Coefficients::heat(1, 2),
            ConvexBody::ball(DVector::zeros(2), 1.0).unwrap(),
        ),
        (
            "conforming spherical cylinder",
            spherical,
            ConvexBody::spherical_cylinder(3, vec![1, 2], 1.0).unwrap(),
        ),
        ("diagonal orthant cone", diagonal, orthant),
    ];

    for (name, sys, body) in &fixtures {
        let verdict = check_theorem(sys, body, &SampleGrid::for_constant(1), TOL).unwrap();
        assert_eq!(verdict.status, VerdictStatus::Invariant, "{name}");

        let grid = Grid::new(vec![2.0 * std::f64::consts::PI], vec![32]).unwrap();
        let mut config = SimConfig {
            grid: grid.clone(),
            dt: 1e-3,
            horizon: 0.5,
            scheme: Scheme::ExplicitCentral,
            monitor_stride: 10,
        };
        let gate = stability_gate(sys, &config).unwrap();
        config.dt = 0.9 * gate.dt_limit;
        for run in 0..100 {
            let psi = random_in_body(body, &grid, &mut rng, 3, 0.6).unwrap();
            let out = run_monitored(sys, &psi, body, &config).unwrap();
            assert!(
                out.max_violation <= out.solver_tolerance,
                "{name} run {run}: violation {:.3e} > tolerance {:.3e}",
                out.max_violation,
                out.solver_tolerance
            );
        }
    }
    pass(8, start, 60.0, "4 invariant fixtures x 100 random in-body fields stay inside");
}

#[test]
fn acceptance_09_falsification_of_not_invariant_fixtures() {
    let start = Instant::now();
    let config = SimConfig {
        grid: Grid::new(vec![2.0 * std::f64::consts::PI], vec![512]).unwrap(),
        dt: 2e-4,
        horizon: 1.0,
        scheme: Scheme::SpectralExact,
        monitor_stride: 50,
    };

    let triangular = Coefficients::constant(
        1,
        2,
        vec![((0, 0), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 2.0]))],
        vec![],
    )
    .unwrap();
    let pyramid = ConvexBody::polyhedral_cone(
        DVector::zeros(3),
        vec![
            DVector::from_row_slice(&[1.0, 0.0, 1.0]),
            DVector::from_row_slice(&[-1.0, 0.0, 1.0]),
            DVector::from_row_slice(&[0.0, 1.0, 1.0]),
            DVector::from_row_slice(&[0.0, -1.0, 1.0]),
        ],
    )
    .unwrap();
    let nonscalar = Coefficients::constant(
        1,
        3,
        vec![(
            (0, 0),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 5.0]),
        )],
        vec![],
    )
    .unwrap();
    let unequal = Coefficients::constant(
        1,
        3,
        vec![(
            (0, 0),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 5.0]),
        )],
        vec![],
    )
    .unwrap();

    let fixtures: Vec<(&str, Coefficients, ConvexBody, u64)> = vec![
        (
            "triangular vs half-plane",
            triangular,
            ConvexBody::polyhedral_angle(2, vec![(1, 0.0)]).unwrap(),
            42,
        ),
        ("non-scalar vs p>m cone", nonscalar, pyramid, 43),
        (
            "unequal diagonals vs spherical cylinder",
            unequal,
            ConvexBody::spherical_cylinder(3, vec![1, 2], 1.0).unwrap(),
            44,
        ),
    ];

    for (name, sys, body, seed) in &fixtures {
        // The curved boundary's exit margin is quadratically small, so the
        // spherical fixture gets a finer grid to shrink the threshold.
        let config = if name.contains("spherical") {
            SimConfig {
                grid: Grid::new(vec![2.0 * std::f64::consts::PI], vec![3072]).unwrap(),
                ..config.clone()
            }
        } else {
            config.clone()
        };
        let report = falsify(sys, body, &config, 200, *seed).unwrap();
        let w = report.witness.unwrap_or_else(|| panic!("{name}: no witness in budget"));
        assert!(
            w.exit_margin > report.threshold,
            "{name}: margin {:.3e} vs threshold {:.3e}",
            w.exit_margin,
            report.threshold
        );
        assert!(w.initial.max_violation(body) <= 0.0, "{name}: witness leaves the body at t=0");
        println!(
            "  {name}: candidate {} exits at t = {:.3} with margin {:.3e} (threshold {:.3e})",
            w.candidate, w.first_exit, w.exit_margin, report.threshold
        );
    }
    pass(9, start, 120.0, "all three NotInvariant fixtures falsified within budget");
}

#[test]
fn acceptance_10_propagator_alignment_shadow() {
    let start = Instant::now();
    let sigmas = frequency_samples(1, 256, 4.0);
    assert!(sigmas.len() >= 256);

    // Aligned fixtures: every body normal keeps residual <= 1e-9.
    let triangular = Coefficients::constant(
        1,
        2,
        vec![((0, 0), DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 2.0]))],
        vec![],
    )
    .unwrap();
    let half_plane = ConvexBody::polyhedral_angle(2, vec![(1, 0.0)]).unwrap();
    let heat = Coefficients::heat(1, 2);
    let ball = ConvexBody::ball(DVector::zeros(2), 1.0).unwrap();
    for (sys, body) in [(&triangular, &half_plane), (&heat, &ball)] {
        for t in [0.1, 1.0] {
            for nu in body.normal_set(64).unwrap().iter_all() {
                let out = propagator_alignment(sys, nu, t, &sigmas, 1e-9).unwrap();
                assert!(
                    out.within_tol,
                    "aligned residual {:.3e} at t = {t}",
                    out.max_residual
                );
            }
        }
    }

    // The A21 = 0.5 perturbation leaks visibly.
    let perturbed = Coefficients::constant(
        1,
        2,
        vec![((0, 0), DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.5, 2.0]))],
        vec![],
    )
    .unwrap();
    let nu = DVector::from_row_slice(&[0.0, -1.0]);
    for t in [0.1, 1.0] {
        let out = propagator_alignment(&perturbed, &nu, t, &sigmas, 1e-9).unwrap();
        assert!(out.max_residual > 1e-3, "t = {t}: residual {:.3e}", out.max_residual);
    }
    pass(10, start, 600.0, "propagator residual <= 1e-9 aligned, > 1e-3 perturbed");
}
