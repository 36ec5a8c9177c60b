//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with its pinned tolerance and runtime budget.

use modcurv::exact::{RatExpr, Weight};
use modcurv::geometry;
use modcurv::hfamily::{self, Ctx};
use modcurv::numeric::{self, QuadratureConfig};
use modcurv::ops;
use modcurv::report::Status;
use modcurv::spectral::{Atom, Node, SpectralExpr};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn line(ok: bool, name: &str, detail: &str) {
    println!("[{}] {}: {}", if ok { "PASS" } else { "FAIL" }, name, detail);
    assert!(ok, "{name}: {detail}");
}

const GRID7: [f64; 7] = [-1.17, -0.83, -0.41, 0.23, 0.52, 0.89, 1.31];

#[test]
fn criterion_1_verify_t_k() {
    let start = Instant::now();
    let r = geometry::verify_t_vs_k(&Ctx::symbolic()).unwrap();
    let elapsed = start.elapsed();
    let ok = r.status == Status::ExactZero
        && r.notes.iter().any(|n| n.contains("((m-4)/12)"))
        && elapsed.as_secs() < 10;
    line(
        ok,
        "criterion 1 (verify-t-k, symbolic m)",
        &format!(
            "(1+sigma_{{-m/2-1}})(T) - ((m-2)/2)K exact zero; intermediate ((m-4)/12)(m H11+2z H12-2G); {} ms",
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_2_verify_cm_k() {
    let start = Instant::now();
    let r_sym = geometry::verify_h_vs_k(&Ctx::symbolic()).unwrap();
    let r_m2 = geometry::verify_h_vs_k(&Ctx::fixed(2)).unwrap();
    let elapsed = start.elapsed();
    let inner_ok = r_sym
        .notes
        .iter()
        .any(|n| n.contains("constant in z"));
    let ok = r_sym.status == Status::ExactZero
        && r_m2.status == Status::ExactZero
        && inner_ok
        && elapsed.as_secs() < 30;
    line(
        ok,
        "criterion 2 (verify-cm-k, symbolic m and m=2)",
        &format!(
            "CM relation exact zero; inner expression m z H11+2z^2 H12-2z H12-2 H11 constant before divided differencing; {} ms",
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_3_verify_ops() {
    let start = Instant::now();
    let r = geometry::verify_ops().unwrap();
    let cfg = QuadratureConfig::default();
    let [lemma, k_match, _, diff] = geometry::verify_ops_numeric(2.0, 0.3, cfg).unwrap();
    let elapsed = start.elapsed();
    let boundary_ok = r.notes.iter().any(|n| n.contains("1/6"));
    let ok = r.status == Status::ExactZero
        && boundary_ok
        && lemma < 1e-8
        && k_match < 1e-8
        && diff < 1e-10
        && elapsed.as_secs() < 10;
    line(
        ok,
        "criterion 3 (verify-ops, m=2)",
        &format!(
            "differentiated identity exact zero, boundary value 1/6 both sides; raw-integral residuals {:.2e}/{:.2e}; {} ms",
            lemma, k_match, elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_4_gauss_bonnet() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let grid: Vec<f64> = (1..=10)
        .flat_map(|k| {
            let x = 0.14 * k as f64;
            [x, -x]
        })
        .collect();
    assert_eq!(grid.len(), 20);
    let r = geometry::verify_gauss_bonnet(&grid, 1e-9, cfg).unwrap();
    let elapsed = start.elapsed();
    let ok = r.status == Status::ExactZero;
    line(
        ok,
        "criterion 4 (verify-gauss-bonnet)",
        &format!(
            "K_EH = H_EH = 0 exactly at m=2; (1+tau_0)(Ttilde) = 0 on 20 grid points within 1e-9; {} ms",
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_5_verify_cm_h() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let r = geometry::verify_cm_h(&[2.0, 3.0, 4.0, 6.0], &GRID7, 1e-8, cfg).unwrap();
    let elapsed = start.elapsed();
    let ok = r.status == Status::WithinTolerance && elapsed.as_secs() < 60;
    let worst = match r.residual {
        modcurv::report::Residual::MaxAbsError { value, .. } => value,
        _ => f64::NAN,
    };
    line(
        ok,
        "criterion 5 (verify-cm-h)",
        &format!(
            "|HS - (1+tau-tau^2) tri+(KS)| < 1e-8 on 7x7 grid, m in {{2,3,4,6}}; worst {:.2e}; {} ms",
            worst,
            elapsed.as_millis()
        ),
    );
}

fn random_one_var(rng: &mut ChaCha8Rng) -> SpectralExpr {
    let mut e = SpectralExpr::zero();
    for _ in 0..rng.gen_range(1..4) {
        let a = rng.gen_range(1..=5u32);
        let b = rng.gen_range(1..=(6 - a).min(5));
        let c = RatExpr::from_ratio(rng.gen_range(-6..7).max(1), rng.gen_range(1..5));
        e = e.add_term(Atom::h1(a, b), c);
    }
    if rng.gen_bool(0.3) {
        e = e.add_term(Atom::G { node: Node::Z }, RatExpr::from_int(rng.gen_range(1..4)));
    }
    if rng.gen_bool(0.3) {
        e = e.add_term(Atom::H02 { node: Node::Z }, RatExpr::from_int(rng.gen_range(1..4)));
    }
    e
}

fn random_two_var(rng: &mut ChaCha8Rng) -> SpectralExpr {
    let mut e = SpectralExpr::zero();
    for _ in 0..rng.gen_range(1..3) {
        let a = rng.gen_range(1..=4u32);
        let b = rng.gen_range(1..=(5 - a).min(4));
        let c = rng.gen_range(1..=(6 - a - b).max(1));
        let k = RatExpr::from_ratio(rng.gen_range(-6..7).max(1), rng.gen_range(1..5));
        e = e.add_term(Atom::h2(a, b, c), k);
    }
    e
}

#[test]
fn criterion_6_backend_redundancy() {
    let start = Instant::now();
    let ctx = Ctx::symbolic();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6EED);
    let mut agreements = 0usize;
    let total = 500usize;
    for trial in 0..total {
        let two_var = trial % 2 == 1;
        let (e, reduced) = if two_var {
            let e = random_two_var(&mut rng);
            let r = hfamily::reduce_two_var(&ctx, &e).unwrap();
            (e, hfamily::expand_to_divdiff(&ctx, &r).unwrap())
        } else {
            let e = random_one_var(&mut rng);
            (e.clone(), hfamily::reduce_one_var(&ctx, &e).unwrap())
        };
        // half the corpus is an exact zero (e - reduce(e)); the other half
        // is deliberately skewed off zero
        let expect_zero = trial % 4 < 2;
        let candidate = if expect_zero {
            e.sub(&reduced)
        } else {
            e.sub(&reduced).add(&SpectralExpr::constant(
                RatExpr::gamma().mul(&RatExpr::from_ratio(1, 1 + (trial as i64 % 9))),
            ))
        };
        let rw = hfamily::is_zero_rewrite(&ctx, &candidate).unwrap();
        let cf = hfamily::is_zero_closed(&ctx, &candidate).unwrap();
        if rw == cf && rw == expect_zero {
            agreements += 1;
        }
    }
    let elapsed = start.elapsed();
    line(
        agreements == total,
        "criterion 6 (backend redundancy)",
        &format!(
            "rewrite and closed-form zero tests agree on {}/{} randomized expressions (a+b <= 6, a+b+c <= 6); {} ms",
            agreements,
            total,
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_7_numeric_oracle() {
    let start = Instant::now();
    let ctx = Ctx::symbolic();
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    // one-variable: series vs quadrature vs reduced-symbolic, 5 points each
    let points = [(0.3, 3.0), (-0.6, 2.5), (0.55, 4.0), (0.1, 6.2), (-2.0, 5.0)];
    for (a, b) in [(2u32, 1u32), (3, 1), (4, 1), (2, 3), (1, 4), (3, 3)] {
        let red = hfamily::reduce_one_var(&ctx, &SpectralExpr::atom(Atom::h1(a, b))).unwrap();
        for &(z, m) in &points {
            let s = numeric::eval_h1_series(a, b, z, m, &cfg).unwrap();
            let q = numeric::eval_h1_quadrature(a, b, z, m, &cfg).unwrap();
            let v = numeric::eval_spectral(&ctx, &red, z, 0.0, 0.0, m, &cfg).unwrap();
            let scale = s.abs().max(1.0);
            worst = worst.max((s - q).abs() / scale).max((s - v).abs() / scale);
        }
    }
    // two-variable sample
    let pts2 = [
        (0.2, 0.45, 3.7),
        (0.25, 0.5, 3.0),
        (-0.4, 0.3, 5.0),
        (0.1, -0.2, 2.4),
        (0.6, 0.35, 4.0),
    ];
    for (a, b, c) in [(2u32, 1u32, 1u32), (3, 1, 1), (2, 2, 1), (1, 2, 2)] {
        let red = hfamily::reduce_two_var(&ctx, &SpectralExpr::atom(Atom::h2(a, b, c))).unwrap();
        for &(z1, z2, m) in &pts2 {
            let q = numeric::eval_h2(a, b, c, z1, z2, m, &cfg).unwrap();
            let v = numeric::eval_spectral(&ctx, &red, 0.0, z1, z2, m, &cfg).unwrap();
            worst = worst.max((q - v).abs() / q.abs().max(1.0));
        }
    }
    // K(1; m) = Gamma(m/2)(4-m)/12 at m in {2,3,4,5}: 1/6 at m=2, 0 at m=4
    let mut k_vals = Vec::new();
    for m in [2.0f64, 3.0, 4.0, 5.0] {
        let k = geometry::k_num(m, cfg);
        let got = k(1.0);
        let want = numeric::gamma(m / 2.0) * (4.0 - m) / 12.0;
        worst = worst.max((got - want).abs());
        k_vals.push(format!("K(1;{}) = {:.6}", m, got));
        if m == 2.0 {
            worst = worst.max((got - 1.0 / 6.0).abs());
        }
        if m == 4.0 {
            worst = worst.max(got.abs());
        }
    }
    // 200 random atoms (a+b <= 8) x 5 points, reduction vs quadrature;
    // sample away from z = 0 where the reduced coefficients carry z^{-k}
    // poles that amplify float cancellation beyond the check's meaning
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    for _ in 0..200 {
        let a = rng.gen_range(1..=6u32);
        let b = rng.gen_range(1..=(8 - a).min(6));
        let red = hfamily::reduce_one_var(&ctx, &SpectralExpr::atom(Atom::h1(a, b))).unwrap();
        let mut done = 0;
        while done < 5 {
            let z: f64 = rng.gen_range(-0.5..0.8);
            let m: f64 = rng.gen_range(2.05..8.0);
            if z.abs() < 0.1 {
                continue;
            }
            done += 1;
            let direct = numeric::eval_h1(a, b, z, m, &cfg).unwrap();
            let v = numeric::eval_spectral(&ctx, &red, z, 0.0, 0.0, m, &cfg).unwrap();
            worst = worst.max((direct - v).abs() / direct.abs().max(1.0));
        }
    }
    let elapsed = start.elapsed();
    line(
        worst <= 1e-8,
        "criterion 7 (numeric oracle)",
        &format!(
            "dual-path quadrature/series/symbolic agreement <= 1e-8 relative; worst {:.2e}; {}; {} ms",
            worst,
            k_vals.join(", "),
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_8_matrix_model() {
    let start = Instant::now();
    let r = modcurv::matrixmodel::run_suite(&[2, 3, 4, 5, 6, 7, 8], 20, 20260810, 1e-9).unwrap();
    let elapsed = start.elapsed();
    let ok = r.status == Status::WithinTolerance && elapsed.as_secs() < 60;
    let worst = match r.residual {
        modcurv::report::Residual::MaxAbsError { value, .. } => value,
        _ => f64::NAN,
    };
    line(
        ok,
        "criterion 8 (matrix model)",
        &format!(
            "all modular-operator identities at N in 2..=8, 20 seeded trials each, residual < 1e-9 (worst {:.2e}); {} ms",
            worst,
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_9_operator_laws() {
    let start = Instant::now();
    let ctx = Ctx::symbolic();
    let p = |s: &str| modcurv::exact::parse_expr(s).unwrap();
    let mut ok = true;
    let mut details: Vec<String> = Vec::new();

    // Leibniz rule (binary case)
    let f = SpectralExpr::constant(p("z"));
    let g = SpectralExpr::atom(Atom::h1(2, 1));
    let split = modcurv::divdiff::leibniz_split(&ctx, &f, &g, &[Node::Z1, Node::Z2]).unwrap();
    let direct = modcurv::divdiff::divided_difference(
        &ctx,
        &SpectralExpr::term(Atom::h1(2, 1), p("z")),
        &[Node::Z1, Node::Z2],
    )
    .unwrap();
    ok &= split == direct;
    details.push("Leibniz".into());

    // Composition rule on a degree-6 polynomial body
    let body = SpectralExpr::constant(p("z^6-2*z^4+z"));
    let nested = SpectralExpr::atom(Atom::Dd {
        body: Box::new(body.clone()),
        nodes: vec![Node::Zero, Node::Z],
    });
    let lhs = modcurv::divdiff::divided_difference(&ctx, &nested, &[Node::Z1, Node::Z2]).unwrap();
    let rhs =
        modcurv::divdiff::divided_difference(&ctx, &body, &[Node::Zero, Node::Z1, Node::Z2])
            .unwrap();
    ok &= lhs == rhs;
    details.push("composition".into());

    // Confluent rule: f[z1,z1] = f'(z1) on the H-family
    let conf = modcurv::divdiff::divided_difference(
        &ctx,
        &SpectralExpr::atom(Atom::h1(1, 1)),
        &[Node::Z1, Node::Z1],
    )
    .unwrap();
    ok &= conf == SpectralExpr::atom(Atom::H1 { a: 1, b: 2, node: Node::Z1 });
    details.push("confluent".into());

    // sigma cyclicity: order two on one variable, order three on two
    let j = Weight::minus_half_m_plus(-1);
    let e = hfamily::reduce_one_var(&ctx, &SpectralExpr::atom(Atom::h1(2, 1))).unwrap();
    let s2 = ops::sigma_one(&ctx, &j, &ops::sigma_one(&ctx, &j, &e).unwrap()).unwrap();
    ok &= hfamily::is_zero_both(&ctx, &s2.sub(&e)).unwrap();
    let j2 = Weight::minus_half_m_plus(-2);
    let e2 = hfamily::reduce_two_var(&ctx, &SpectralExpr::atom(Atom::h2(2, 1, 1))).unwrap();
    let s3 = ops::sigma_two(
        &ctx,
        &j2,
        &ops::sigma_two(&ctx, &j2, &ops::sigma_two(&ctx, &j2, &e2).unwrap()).unwrap(),
    )
    .unwrap();
    ok &= s3 == e2;
    details.push("sigma orders".into());

    // tau cyclicity numerically
    let f2 = ops::fn2(|x1: f64, x2: f64| (0.4 * x1).sin() + x2 / (3.0 + x1 * x1));
    let t3 = ops::tau2(-0.7, &ops::tau2(-0.7, &ops::tau2(-0.7, &f2)));
    let mut worst: f64 = 0.0;
    for (u, v) in [(0.3, -0.7), (1.2, 0.4)] {
        worst = worst.max((t3(u, v) - f2(u, v)).abs());
    }
    ok &= worst < 1e-10;
    details.push("tau orders".into());

    // internal relations: exact on rational test functions, numeric on
    // closures
    let mode = ctx.mode();
    for jj in [3i64, -2, 1] {
        let j = Weight::from_ints(jj, 0);
        for f in [p("(1-z)^2"), p("(1)/(2-z)"), p("z^3-4*z")] {
            ok &= ops::internal_relation_residual_rat(mode, &j, &f)
                .unwrap()
                .is_zero();
        }
    }
    let jn = 0.5;
    let fc = ops::fn1(|x: f64| (0.3 * x).exp() / (1.5 + x.sin()));
    let lhs1 = ops::tri_zero(jn, &fc);
    let lhs2 = ops::tri_minus(&fc);
    let rhs = ops::tau2(jn, &ops::tri_plus(&ops::tau1(jn, &fc)));
    let mut worst2: f64 = 0.0;
    for (u, v) in [(0.3, 0.9), (1.1, -0.4), (-0.6, -0.2)] {
        worst2 = worst2.max((lhs1(u, v) - lhs2(u, v) - rhs(u, v)).abs());
    }
    ok &= worst2 < 1e-10;
    details.push(format!("internal relations (numeric worst {:.1e})", worst2));

    let elapsed = start.elapsed();
    line(
        ok,
        "criterion 9 (operator-law suite)",
        &format!("{}; {} ms", details.join(", "), elapsed.as_millis()),
    );
}
