use hessianfr::linalg::{
    cg_solve_spd, dg_update, eig_sym, fd_hvp_yx, hessianfr_rhs_cg, spectral_radius, squared_system_cg,
    CgParams, DgState,
};
use hessianfr::problem::{full_batch_equivalence, grad_check};
use hessianfr::problems::finite_sum::FiniteSumSpec;
use hessianfr::problems::{
    make_finite_sum_quadratic, make_g1, make_g2, make_g3, make_mixture_gan, make_quadratic,
    FiniteSumQuadratic, GanArch,
};
use hessianfr::problems::quadratic::random_strict_minimax;
use hessianfr::{Matrix, MinimaxProblem, PointXY, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn pt(x: f64, y: f64) -> PointXY {
    PointXY::from_slices(&[x], &[y]).unwrap()
}

fn v(xs: &[f64]) -> Vector {
    Vector::from_vec(xs.to_vec())
}

#[test]
fn cg_small_systems() {
    let p = CgParams::new(10, 1e-12, 0.0).unwrap();
    let s = cg_solve_spd(|x| x.clone(), &v(&[1.0, 2.0, 3.0]), &p).unwrap();
    assert_eq!(s.iters, 1);
    assert!((s.solution - v(&[1.0, 2.0, 3.0])).norm() < 1e-15);

    let a = Matrix::from_diagonal(&v(&[2.0, 4.0]));
    let s = cg_solve_spd(|x| &a * x, &v(&[2.0, 4.0]), &p).unwrap();
    assert!(s.iters <= 2 && s.residual < 1e-12);
    assert!((s.solution - v(&[1.0, 1.0])).norm() < 1e-12);
}

#[test]
fn squared_system_on_g1() {
    // H_yy = −2, H_yx ∇_x f = 4·(−2): (H_yy²) b = H_yy·(−H_yx∇_x f) gives b = −4.
    let p = CgParams::default();
    let s = squared_system_cg(|x| Ok(x * -2.0), &v(&[8.0]), &p).unwrap();
    assert!((s.solution[0] - (-4.0)).abs() < 1e-12);
    let b = hessianfr_rhs_cg(&make_g1(), &pt(1.0, 1.0), 0.0, &p, None).unwrap();
    assert!((b[0] - (-4.0)).abs() < 1e-6);
}

#[test]
fn hessianfr_rhs_examples() {
    let p = CgParams::default();
    let b = hessianfr_rhs_cg(&make_g1(), &pt(0.0, 0.0), 1.0, &p, None).unwrap();
    assert_eq!(b[0], 0.0);

    let q = make_quadratic(Matrix::zeros(1, 1), Matrix::zeros(1, 2), Matrix::from_diagonal(&v(&[-1.0, -2.0])))
        .unwrap()
        .with_linear(Vector::zeros(1), v(&[1.0, 2.0]))
        .unwrap();
    let at = PointXY::zeros(1, 2);
    let b = hessianfr_rhs_cg(&q, &at, 1.0, &p, None).unwrap();
    assert!((b - v(&[-1.0, -1.0])).norm() < 1e-10);
}

#[test]
fn fd_cross_product_on_g1() {
    let r = fd_hvp_yx(&make_g1(), &pt(1.0, 1.0), Some(1e-6)).unwrap();
    assert!((r[0] - (-8.0)).abs() < 1e-6);
    let zero = fd_hvp_yx(&make_g1(), &pt(0.0, 0.0), Some(0.3)).unwrap();
    assert_eq!(zero[0], 0.0);
}

#[test]
fn fd_cross_product_exact_on_quadratics() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for _ in 0..20 {
        let q = random_strict_minimax(3, 4, (0.5, 2.0), (0.5, 2.0), 1.0, &mut rng);
        let p = PointXY::new(
            Vector::from_fn(3, |_, _| rng.random_range(-2.0..2.0)),
            Vector::from_fn(4, |_, _| rng.random_range(-2.0..2.0)),
        )
        .unwrap();
        let want = q.b.transpose() * q.grad_x(&p);
        let got = fd_hvp_yx(&q, &p, None).unwrap();
        assert!((&got - &want).norm() <= 1e-9 * want.norm().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn dg_scalar_quadratic() {
    // f = −y²: ∇_y f = −2y, so y 1 → 0.5 moves the gradient −2 → −1.
    let s0 = DgState::default();
    assert_eq!(s0.scale, 1.0);
    let s1 = dg_update(&s0, &v(&[-2.0]), &v(&[1.0]));
    assert_eq!(s1.scale, 1.0);
    let s2 = dg_update(&s1, &v(&[-1.0]), &v(&[0.5]));
    assert_eq!(s2.scale, -0.5);
    let s3 = dg_update(&s2, &v(&[-1.0]), &v(&[0.7]));
    assert_eq!(s3.scale, -0.5);
}

#[test]
fn eigen_examples() {
    let e = eig_sym(&Matrix::from_row_slice(2, 2, &[-6.0, 4.0, 4.0, -2.0])).unwrap();
    let r5 = 5f64.sqrt();
    assert!((e.min() - (-4.0 - 2.0 * r5)).abs() < 1e-12);
    assert!((e.max() - (-4.0 + 2.0 * r5)).abs() < 1e-12);
    let rot = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    assert!((spectral_radius(&rot).unwrap() - 1.0).abs() < 1e-14);
}

// Golden values from a symbolic differentiation of g3:
// (f, f_x, f_y, f_xx, f_xy, f_yy) at selected points.
const G3_GOLDEN: [((f64, f64), [f64; 6]); 5] = [
    ((0.0, 0.0), [0.0, 0.0, 0.0, -10.0, 6.0, -2.0]),
    (
        (1.0, 1.0),
        [
            9.55693706474086413e-02,
            -3.05523025476349108e+00,
            3.42878396916069539e+00,
            -6.81464601861596098e+00,
            5.57962313581230251e+00,
            -3.27573672850925179e+00,
        ],
    ),
    (
        (0.5, -0.25),
        [
            -2.03468634731566800e+00,
            -6.29161614984890960e+00,
            3.47267564108333637e+00,
            -8.83478425236396525e+00,
            5.84022670407403943e+00,
            -1.99305439577435228e+00,
        ],
    ),
    (
        (-2.0, 3.0),
        [
            -5.80069841666122841e+01,
            1.98779731270072979e+01,
            -2.11062530157789787e+01,
            8.81423763841922536e+00,
            2.03871279816722772e+00,
            -7.33790632755765770e+00,
        ],
    ),
    (
        (4.0, -1.5),
        [
            -3.54905413889321437e+01,
            1.92029897178669806e+01,
            1.72236866925588892e+01,
            2.45263805435156677e+01,
            1.12839029511857730e-01,
            -2.14079430988093788e+00,
        ],
    ),
];

#[test]
fn g3_matches_golden_derivatives() {
    let g3 = make_g3();
    for ((x, y), want) in G3_GOLDEN {
        let p = pt(x, y);
        let (gx, gy) = g3.grads(&p);
        let h = g3.hessian_blocks(&p).unwrap();
        let got = [g3.value(&p), gx[0], gy[0], h.hxx[(0, 0)], h.hxy[(0, 0)], h.hyy[(0, 0)]];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()), "at ({x}, {y}): {g} vs {w}");
        }
        assert_eq!(h.hxy[(0, 0)], h.hyx[(0, 0)]);
    }
}

#[test]
fn toy_hessians_are_constant_for_quadratic_toys() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let expect = [(make_g1(), [-6.0, 4.0, -2.0]), (make_g2(), [6.0, 4.0, 2.0])];
    for (g, [a, b, c]) in expect {
        for _ in 0..10 {
            let p = pt(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let h = g.hessian_blocks(&p).unwrap();
            assert_eq!((h.hxx[(0, 0)], h.hxy[(0, 0)], h.hyy[(0, 0)]), (a, b, c));
        }
    }
    assert_eq!(make_g1().value(&pt(1.0, 1.0)), 0.0);
}

#[test]
fn grad_checks_pass() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for g in [make_g1(), make_g2(), make_g3()] {
        for _ in 0..10 {
            let p = pt(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            assert!(grad_check(&g, &p, 1e-5).unwrap().max_rel_error <= 1e-5);
        }
    }
    assert!(grad_check(&make_g1(), &pt(1.0, 1.0), 1e-5).unwrap().max_rel_error < 1e-6);

    let arch = GanArch {
        noise_dim: 3,
        gen_hidden: vec![8],
        disc_hidden: vec![8],
    };
    let gan = make_mixture_gan(arch, 16, 16, 4, 1e-4).unwrap();
    let view = hessianfr::BatchView::full(&gan);
    let p = gan.initial_point(7);
    assert!(grad_check(&view, &p, 1e-5).unwrap().max_rel_error <= 1e-5);
    assert!(grad_check(&gan, &p, 1e-5).unwrap().max_rel_error <= 1e-5);
}

#[test]
fn constant_payoff_has_zero_error() {
    let z = Matrix::zeros(1, 1);
    let zero = make_quadratic(z.clone(), z.clone(), z).unwrap();
    assert_eq!(grad_check(&zero, &pt(3.0, -1.0), 1e-5).unwrap().max_rel_error, 0.0);
}

#[test]
fn full_batch_views_match_averages() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let q = random_strict_minimax(2, 2, (0.5, 2.0), (0.5, 2.0), 1.0, &mut rng);
    let p = PointXY::from_slices(&[0.3, -0.2], &[1.0, 0.5]).unwrap();
    let single = FiniteSumQuadratic::new(vec![q.clone()]).unwrap();
    assert!(full_batch_equivalence(&single, &p));
    let same = FiniteSumQuadratic::new(vec![q.clone(), q.clone(), q]).unwrap();
    assert!(full_batch_equivalence(&same, &p));
    let distinct = FiniteSumQuadratic::new(
        (0..4)
            .map(|_| random_strict_minimax(2, 2, (0.5, 2.0), (0.5, 2.0), 1.0, &mut rng))
            .collect(),
    )
    .unwrap();
    assert!(full_batch_equivalence(&distinct, &p));

    let gan = make_mixture_gan(GanArch::default(), 32, 16, 0, 1e-4).unwrap();
    assert!(full_batch_equivalence(&gan, &gan.initial_point(3)));
}

#[test]
fn finite_sum_constants() {
    let fs = make_finite_sum_quadratic(FiniteSumSpec::default()).unwrap();
    let p = PointXY::from_slices(&[0.1, 0.2, 0.3], &[-0.1, 0.0, 0.4]).unwrap();
    let k = fs.assumption_constants(&p).unwrap();
    let max_c = fs
        .components
        .iter()
        .map(|c| hessianfr::linalg::spectral_norm(&c.c).unwrap())
        .fold(0.0, f64::max);
    assert_eq!(k.rho_yy, max_c);

    let flat = make_finite_sum_quadratic(FiniteSumSpec {
        perturbation: 0.0,
        linear_noise: 0.0,
        ..FiniteSumSpec::default()
    })
    .unwrap();
    assert!(flat.components.windows(2).all(|w| w[0].a == w[1].a && w[0].c == w[1].c));
}
