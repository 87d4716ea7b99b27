//! Integration tests for the plane-cubic geometry layer: tangency solves,
//! numeric Jonquieres involutions, hypothesis predicates, curve distance,
//! and the geometric derivation of combinatorial configurations.

use autsurf::blancgeom::{
    curve_point_from_spec, derive_config, distance_to_curve, hypothesis_check,
    invariant_conic_is_ellipse, invariant_conic_value, jonquieres_apply, reference_configuration,
    tangency_points, tangency_points_from_spec, CubicCurve, GeomError, JonquieresMap, ProjPoint,
    RationalPointSpec,
};
use autsurf::nsaction::{default_k3_config, ConfigDescriptor, Pt};
use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;

fn ref3() -> (CubicCurve, Vec<(f64, f64)>) {
    reference_configuration(3).unwrap()
}

// --- independent test-side oracles -------------------------------------------------

fn poly_eval(coeffs: &[C], z: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Durand-Kerner simultaneous iteration for a monic polynomial given by
/// ascending coefficients (last = 1). Independent of the library's
/// companion-matrix eigenvalue route.
fn dk_roots(coeffs: &[C]) -> Vec<C> {
    let n = coeffs.len() - 1;
    assert!((coeffs[n] - C::new(1.0, 0.0)).norm() < 1e-12, "monic input expected");
    let seed = C::new(0.4, 0.9);
    let mut z: Vec<C> = (0..n).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = C::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            let step = poly_eval(coeffs, z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 {
            break;
        }
    }
    z
}

/// Deflate an ascending-coefficient polynomial by a root (synthetic
/// division, remainder discarded).
fn deflate(coeffs: &[f64], root: f64) -> Vec<f64> {
    let n = coeffs.len();
    let mut out = vec![0.0; n - 1];
    let mut carry = coeffs[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = carry;
        carry = coeffs[i] + root * carry;
    }
    out
}

/// Independent tangency oracle: the x-coordinates of the tangency points of
/// lines through q are the roots of the sextic
/// `S(X) = R(X)^2 - 4 y_q^2 g(X)` with `R(X) = 2 g(X) + g'(X)(x_q - X)`,
/// after removing the double root at `x_q`; signs recovered from
/// `y = R(x)/(2 y_q)`.
fn sextic_oracle(curve: &CubicCurve, q: (f64, f64)) -> Vec<(C, C)> {
    let (u, v, w) = curve.coefficients();
    let (xq, yq) = q;
    // R = [2w + v*xq, v + 2u*xq, 3*xq, -1]
    let r = [2.0 * w + v * xq, v + 2.0 * u * xq, 3.0 * xq, -1.0];
    // S = R^2 - 4 yq^2 * g, g = [w, v, u, 1]
    let mut s = [0.0f64; 7];
    for i in 0..4 {
        for j in 0..4 {
            s[i + j] += r[i] * r[j];
        }
    }
    let y2 = 4.0 * yq * yq;
    for (i, gi) in [w, v, u, 1.0].iter().enumerate() {
        s[i] -= y2 * gi;
    }
    let quintic = deflate(&s, xq);
    let quartic = deflate(&quintic, xq);
    assert!((quartic[4] - 1.0).abs() < 1e-9, "sextic oracle must stay monic");
    let coeffs: Vec<C> = quartic.iter().map(|&c| C::new(c, 0.0)).collect();
    let roots = dk_roots(&coeffs);
    roots
        .into_iter()
        .map(|x| {
            let rx = poly_eval(&r.map(|c| C::new(c, 0.0)), x);
            (x, rx / C::new(2.0 * yq, 0.0))
        })
        .collect()
}

fn sort_points(mut pts: Vec<(C, C)>) -> Vec<(C, C)> {
    pts.sort_by(|a, b| {
        a.0.re
            .total_cmp(&b.0.re)
            .then(a.0.im.total_cmp(&b.0.im))
    });
    pts
}

/// Brute-force distance oracle: refine an x-mesh over the valid locus in
/// three stages and include the branch endpoints found by bisection.
fn mesh_distance_oracle(curve: &CubicCurve, p: (f64, f64)) -> f64 {
    let (px, py) = p;
    let bound = px.abs() + py.abs() + 12.0;
    let g = |x: f64| curve.g(x);
    let dist_at = |x: f64| -> f64 {
        let gx = g(x);
        if gx < 0.0 {
            return f64::INFINITY;
        }
        let y = gx.sqrt();
        let d1 = ((x - px).powi(2) + (y - py).powi(2)).sqrt();
        let d2 = ((x - px).powi(2) + (-y - py).powi(2)).sqrt();
        d1.min(d2)
    };
    let mut best = f64::INFINITY;
    let mut best_x = 0.0;
    // stage 1: global
    let n1 = 400_000;
    for i in 0..=n1 {
        let x = -bound + 2.0 * bound * (i as f64) / (n1 as f64);
        let d = dist_at(x);
        if d < best {
            best = d;
            best_x = x;
        }
    }
    // stages 2 and 3: zoom
    for half in [1e-2, 1e-5] {
        let n = 200_000;
        let lo = best_x - half;
        let hi = best_x + half;
        for i in 0..=n {
            let x = lo + (hi - lo) * (i as f64) / (n as f64);
            let d = dist_at(x);
            if d < best {
                best = d;
                best_x = x;
            }
        }
    }
    // endpoints of the valid locus by sign-change bisection
    let scan = 40_000;
    let mut prev_x = -bound;
    let mut prev_g = g(prev_x);
    for i in 1..=scan {
        let x = -bound + 2.0 * bound * (i as f64) / (scan as f64);
        let gx = g(x);
        if (prev_g < 0.0) != (gx < 0.0) {
            let (mut a, mut b) = (prev_x, x);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if (g(a) < 0.0) != (g(m) < 0.0) {
                    b = m;
                } else {
                    a = m;
                }
            }
            let root = 0.5 * (a + b);
            let d = ((root - px).powi(2) + py.powi(2)).sqrt();
            best = best.min(d);
        }
        prev_x = x;
        prev_g = gx;
    }
    best
}

fn rand_curve<R: Rng>(rng: &mut R) -> CubicCurve {
    loop {
        let u = rng.random_range(-1.5..1.5);
        let v = rng.random_range(-1.5..1.5);
        let w = rng.random_range(-1.5..1.5);
        if let Ok(c) = CubicCurve::new(u, v, w) {
            if c.discriminant().abs() > 1e-3 {
                return c;
            }
        }
    }
}

fn rand_point_on<R: Rng>(curve: &CubicCurve, rng: &mut R) -> (f64, f64) {
    loop {
        let x = rng.random_range(-3.0..3.0);
        if curve.g(x) < 0.05 {
            continue;
        }
        let y = curve.g(x).sqrt() * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        // keep a safe margin from inflexion points so thresholds stay crisp
        let (u, _, _) = curve.coefficients();
        let a = 3.0 * x + u;
        let mt = curve.g_prime(x) / (2.0 * y);
        if (mt * mt - a).abs() > 1e-3 {
            return (x, y);
        }
    }
}

// --- curve basics -------------------------------------------------------------

#[test]
fn discriminant_separates_connected_and_two_component_curves() {
    let one = CubicCurve::new(0.0, 1.0, 1.0).unwrap();
    assert!((one.discriminant() - (-31.0)).abs() < 1e-12);
    assert!(one.is_real_connected());
    let two = CubicCurve::new(0.0, -1.0, 0.0).unwrap();
    assert!((two.discriminant() - 4.0).abs() < 1e-12);
    assert!(!two.is_real_connected());
}

#[test]
fn singular_curves_are_rejected() {
    assert!(matches!(
        CubicCurve::new(0.0, 0.0, 0.0),
        Err(GeomError::SingularCurve(_))
    ));
    // (x-1)^2 (x+2) = x^3 - 3x + 2
    assert!(matches!(
        CubicCurve::new(0.0, -3.0, 2.0),
        Err(GeomError::SingularCurve(_))
    ));
}

#[test]
fn real_roots_match_the_polynomial() {
    let two = CubicCurve::new(0.0, -1.0, 0.0).unwrap();
    let roots = two.real_roots_of_g();
    assert_eq!(roots.len(), 3);
    for (r, expect) in roots.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((r - expect).abs() < 1e-12);
    }
    let one = CubicCurve::new(0.0, 1.0, 1.0).unwrap();
    let roots = one.real_roots_of_g();
    assert_eq!(roots.len(), 1);
    assert!(one.g(roots[0]).abs() < 1e-12);
}

#[test]
fn points_above_sit_on_the_curve() {
    let (curve, qs) = ref3();
    for (x, y) in qs {
        assert!(curve.contains(x, y, 1e-12));
        assert!(y > 0.0);
    }
    assert!(matches!(
        curve.point_above(-0.9, 1),
        Err(GeomError::Invalid(_))
    ));
}

#[test]
fn rational_point_spec_matches_float_construction() {
    let curve = CubicCurve::from_rationals(
        Rational64::new(0, 1),
        Rational64::new(1, 1),
        Rational64::new(1, 1),
    )
    .unwrap();
    let spec = RationalPointSpec {
        x: Rational64::new(-7, 20),
        y_sign: 1,
    };
    let (x, y) = curve_point_from_spec(&curve, &spec).unwrap();
    let (xf, yf) = curve.point_above(-0.35, 1).unwrap();
    assert!((x - xf).abs() < 1e-15);
    assert!((y - yf).abs() < 1e-15);
}

// --- tangency points ------------------------------------------------------------

#[test]
fn tangencies_have_double_contact_residuals() {
    let (curve, qs) = ref3();
    for q in qs {
        let pts = tangency_points(&curve, q).unwrap();
        for p in &pts {
            let scale = 1.0f64.max(p.x.norm().powi(3));
            let on_curve = (p.y * p.y - curve.g_complex(p.x)).norm();
            let m = (p.y - C::new(q.1, 0.0)) / (p.x - C::new(q.0, 0.0));
            let tangent = (2.0 * m * p.y - curve.g_prime_complex(p.x)).norm();
            assert!(on_curve < 1e-10 * scale, "value residual {on_curve}");
            assert!(tangent < 1e-10 * scale, "derivative residual {tangent}");
        }
    }
}

#[test]
fn tangencies_split_into_two_real_and_a_conjugate_pair() {
    let (curve, qs) = ref3();
    for q in qs {
        let pts = tangency_points(&curve, q).unwrap();
        let real: Vec<_> = pts.iter().filter(|p| p.is_real()).collect();
        let complex: Vec<_> = pts.iter().filter(|p| !p.is_real()).collect();
        assert_eq!(real.len(), 2);
        assert_eq!(complex.len(), 2);
        let conj_err = (complex[0].x.conj() - complex[1].x).norm()
            + (complex[0].y.conj() - complex[1].y).norm();
        assert!(conj_err < 1e-10);
    }
}

#[test]
fn tangencies_agree_with_the_point_sextic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e71c);
    let mut done = 0;
    while done < 100 {
        let curve = rand_curve(&mut rng);
        let q = rand_point_on(&curve, &mut rng);
        let pts = match tangency_points(&curve, q) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let got: Vec<(C, C)> = pts.iter().map(|p| (p.x, p.y)).collect();
        let mut want = sextic_oracle(&curve, q);
        for g in &got {
            // greedy nearest-point matching: lexicographic sorting is not
            // stable for conjugate pairs whose real parts tie at 1e-16
            let (j, _) = want
                .iter()
                .enumerate()
                .min_by(|a, b| (g.0 - a.1 .0).norm().total_cmp(&(g.0 - b.1 .0).norm()))
                .expect("oracle returns four points");
            let w = want.swap_remove(j);
            let scale = 1.0f64.max(w.0.norm());
            assert!(
                (g.0 - w.0).norm() < 1e-6 * scale,
                "x mismatch: {:?} vs {:?}",
                g.0,
                w.0
            );
            assert!(
                (g.1 - w.1).norm() < 1e-6 * scale.powi(2),
                "y mismatch: {:?} vs {:?}",
                g.1,
                w.1
            );
        }
        done += 1;
    }
}

#[test]
fn inflexion_base_point_is_rejected() {
    // (0, 1) is an inflexion of y^2 = x^3 + 1
    let curve = CubicCurve::new(0.0, 0.0, 1.0).unwrap();
    assert!(matches!(
        tangency_points(&curve, (0.0, 1.0)),
        Err(GeomError::InflexionPoint(_))
    ));
    assert!(matches!(
        JonquieresMap::new(&curve, (0.0, 1.0)),
        Err(GeomError::InflexionPoint(_))
    ));
}

#[test]
fn rational_mode_tangencies_match_float_mode() {
    let curve = CubicCurve::from_rationals(
        Rational64::new(0, 1),
        Rational64::new(1, 1),
        Rational64::new(1, 1),
    )
    .unwrap();
    let spec = RationalPointSpec {
        x: Rational64::new(-7, 20),
        y_sign: 1,
    };
    let exact = tangency_points_from_spec(&curve, &spec).unwrap();
    let q = curve_point_from_spec(&curve, &spec).unwrap();
    let float = tangency_points(&curve, q).unwrap();
    let a = sort_points(exact.iter().map(|p| (p.x, p.y)).collect());
    let b = sort_points(float.iter().map(|p| (p.x, p.y)).collect());
    for (x, y) in a.iter().zip(b.iter()) {
        assert!((x.0 - y.0).norm() < 1e-9);
        assert!((x.1 - y.1).norm() < 1e-9);
    }
}

// --- projective points ------------------------------------------------------------

#[test]
fn proj_points_normalize_and_measure_distance() {
    let p = ProjPoint::from_affine(2.0, -3.0);
    assert_eq!(p.to_affine(), Some((2.0, -3.0)));
    let q = ProjPoint::new(4.0, -6.0, 2.0).unwrap();
    assert!(p.chordal_distance(&q) < 1e-15, "scaling must not matter");
    assert!(ProjPoint::new(0.0, 0.0, 0.0).is_err());
    let inf = ProjPoint::new(0.0, 1.0, 0.0).unwrap();
    assert_eq!(inf.to_affine(), None);
    assert!(p.chordal_distance(&inf) > 0.1);
}

// --- Jonquieres involutions -----------------------------------------------------

#[test]
fn map_has_five_base_points() {
    let (curve, qs) = ref3();
    let map = JonquieresMap::new(&curve, qs[0]).unwrap();
    assert_eq!(map.base_points().len(), 4);
    for p in map.base_points() {
        let d = (p.x - C::new(qs[0].0, 0.0)).norm() + (p.y - C::new(qs[0].1, 0.0)).norm();
        assert!(d > 1e-3, "base tangency must differ from q");
    }
}

#[test]
fn curve_points_are_fixed() {
    let (curve, qs) = ref3();
    let map = JonquieresMap::new(&curve, qs[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 100 {
        let (x, y) = rand_point_on(&curve, &mut rng);
        let p = ProjPoint::from_affine(x, y);
        match jonquieres_apply(&map, &p) {
            Ok(img) => {
                assert!(
                    p.chordal_distance(&img) < 1e-8,
                    "curve point moved by {}",
                    p.chordal_distance(&img)
                );
                checked += 1;
            }
            Err(GeomError::BaseLocus(_)) | Err(GeomError::TangentLine(_)) => continue,
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }
}

#[test]
fn involution_squares_to_identity_off_the_base_locus() {
    let (curve, qs) = ref3();
    let map = JonquieresMap::new(&curve, qs[1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ok = 0;
    let mut tried = 0;
    while tried < 1000 {
        tried += 1;
        let p = ProjPoint::from_affine(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let img = match jonquieres_apply(&map, &p) {
            Ok(i) => i,
            Err(_) => continue,
        };
        let back = match jonquieres_apply(&map, &img) {
            Ok(b) => b,
            Err(_) => continue,
        };
        assert!(
            p.chordal_distance(&back) < 1e-8,
            "double application drifted by {}",
            p.chordal_distance(&back)
        );
        ok += 1;
    }
    assert!(ok > 800, "too many rejected samples: {ok}/1000");
}

#[test]
fn images_stay_on_the_line_through_q() {
    let (curve, qs) = ref3();
    let map = JonquieresMap::new(&curve, qs[2]).unwrap();
    let qh = ProjPoint::from_affine(qs[2].0, qs[2].1).normalized();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    while checked < 300 {
        let p = ProjPoint::from_affine(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let img = match jonquieres_apply(&map, &p) {
            Ok(i) => i,
            Err(_) => continue,
        };
        let a = p.normalized();
        let b = img.normalized();
        let det = qh.x() * (a.y() * b.z() - a.z() * b.y())
            - qh.y() * (a.x() * b.z() - a.z() * b.x())
            + qh.z() * (a.x() * b.y() - a.y() * b.x());
        assert!(det.abs() < 1e-10, "collinearity residual {det}");
        checked += 1;
    }
}

#[test]
fn base_locus_and_tangent_lines_are_rejected() {
    let (curve, qs) = ref3();
    let map = JonquieresMap::new(&curve, qs[0]).unwrap();
    let q = ProjPoint::from_affine(qs[0].0, qs[0].1);
    assert!(matches!(
        jonquieres_apply(&map, &q),
        Err(GeomError::BaseLocus(_))
    ));
    let real_base = map.base_points().iter().find(|p| p.is_real()).unwrap();
    let pb = ProjPoint::from_affine(real_base.x.re, real_base.y.re);
    assert!(matches!(
        jonquieres_apply(&map, &pb),
        Err(GeomError::BaseLocus(_))
    ));
    // a point further out on the tangent line (q, p): line is tangent to C
    let t = 3.0;
    let on_tangent = ProjPoint::from_affine(
        qs[0].0 + t * (real_base.x.re - qs[0].0),
        qs[0].1 + t * (real_base.y.re - qs[0].1),
    );
    assert!(matches!(
        jonquieres_apply(&map, &on_tangent),
        Err(GeomError::TangentLine(_))
    ));
    // rotating the direction well away from tangency makes it fine again
    let off_tangent = ProjPoint::from_affine(
        qs[0].0 + t * (real_base.x.re - qs[0].0) + 1e-1,
        qs[0].1 + t * (real_base.y.re - qs[0].1),
    );
    assert!(jonquieres_apply(&map, &off_tangent).is_ok());
}

#[test]
fn vertical_lines_and_infinity_are_handled() {
    let (curve, qs) = ref3();
    let map = JonquieresMap::new(&curve, qs[0]).unwrap();
    // a point on the vertical line through q: the image must stay on it
    let p = ProjPoint::from_affine(qs[0].0, qs[0].1 + 2.0);
    let img = jonquieres_apply(&map, &p).unwrap();
    let (ix, _) = img.to_affine().expect("image should be finite here");
    assert!((ix - qs[0].0).abs() < 1e-10);
    let back = jonquieres_apply(&map, &img).unwrap();
    assert!(p.chordal_distance(&back) < 1e-9);
    // the vertical direction at infinity lies on the cubic and is fixed
    let vert_inf = ProjPoint::new(0.0, 1.0, 0.0).unwrap();
    let img = jonquieres_apply(&map, &vert_inf).unwrap();
    assert!(vert_inf.chordal_distance(&img) < 1e-9);
    // a generic direction at infinity is mapped with involution intact
    let dir = ProjPoint::new(1.0, 2.0, 0.0).unwrap();
    let img = jonquieres_apply(&map, &dir).unwrap();
    let back = jonquieres_apply(&map, &img).unwrap();
    assert!(dir.chordal_distance(&back) < 1e-9);
}

#[test]
fn no_spurious_fixed_points_off_the_curve() {
    let (curve, qs) = ref3();
    let map = JonquieresMap::new(&curve, qs[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let (x, y) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let p = ProjPoint::from_affine(x, y);
        if let Ok(img) = jonquieres_apply(&map, &p) {
            if p.chordal_distance(&img) < 1e-8 {
                assert!(
                    distance_to_curve(&curve, (x, y)) < 1e-5,
                    "fixed point away from the curve at ({x}, {y})"
                );
            }
        }
    }
}

// --- hypothesis predicates ---------------------------------------------------------

#[test]
fn reference_configurations_satisfy_all_hypotheses() {
    for k in [3usize, 4] {
        let (curve, qs) = reference_configuration(k).unwrap();
        let report = hypothesis_check(&curve, &qs);
        assert!(
            report.all_hold(),
            "k={k} report: {:?}",
            report.witnesses
        );
    }
}

#[test]
fn duplicated_base_points_fail_hyp2() {
    let (curve, qs) = ref3();
    let dup = vec![qs[0], qs[0], qs[2]];
    let report = hypothesis_check(&curve, &dup);
    assert!(!report.hyp2);
    assert!(!report.witnesses.is_empty());
    assert!(!report.all_hold());
}

#[test]
fn generic_random_configurations_satisfy_all_hypotheses() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut done = 0;
    while done < 20 {
        let curve = rand_curve(&mut rng);
        let q1 = rand_point_on(&curve, &mut rng);
        let q2 = rand_point_on(&curve, &mut rng);
        let q3 = rand_point_on(&curve, &mut rng);
        if tangency_points(&curve, q1).is_err()
            || tangency_points(&curve, q2).is_err()
            || tangency_points(&curve, q3).is_err()
        {
            continue;
        }
        let report = hypothesis_check(&curve, &[q1, q2, q3]);
        assert!(report.all_hold(), "witnesses: {:?}", report.witnesses);
        done += 1;
    }
}

#[test]
#[should_panic(expected = "on the curve")]
fn off_curve_base_points_are_a_precondition_violation() {
    let (curve, _) = ref3();
    let _ = hypothesis_check(&curve, &[(0.0, 5.0)]);
}

// --- distance to the real locus ----------------------------------------------------

#[test]
fn on_curve_points_have_zero_distance() {
    let (curve, _) = ref3();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..30 {
        let p = rand_point_on(&curve, &mut rng);
        assert!(distance_to_curve(&curve, p) < 1e-8);
    }
    // the branch endpoint itself
    let root = curve.real_roots_of_g()[0];
    assert!(distance_to_curve(&curve, (root, 0.0)) < 1e-10);
}

#[test]
fn distance_is_symmetric_under_curve_symmetry() {
    let (curve, _) = ref3();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let (x, y) = (rng.random_range(-2.0..2.0), rng.random_range(0.0..2.0));
        let d1 = distance_to_curve(&curve, (x, y));
        let d2 = distance_to_curve(&curve, (x, -y));
        assert!((d1 - d2).abs() < 1e-9 * (1.0 + d1));
    }
}

#[test]
fn distance_agrees_with_dense_mesh_oracle() {
    let connected = CubicCurve::new(0.0, 1.0, 1.0).unwrap();
    let oval = CubicCurve::new(0.0, -1.0, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for i in 0..100 {
        let curve = if i % 2 == 0 { &connected } else { &oval };
        let p = (rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
        let got = distance_to_curve(curve, p);
        let want = mesh_distance_oracle(curve, p);
        assert!(
            (got - want).abs() < 1e-4,
            "point {p:?}: got {got}, oracle {want}"
        );
    }
}

#[test]
fn two_component_curves_use_both_components() {
    let oval = CubicCurve::new(0.0, -1.0, 0.0).unwrap();
    // query between the oval and the unbounded branch, nearer the oval edge
    let d = distance_to_curve(&oval, (-0.2, 0.0));
    assert!((d - 0.2).abs() < 1e-9, "nearest point is the oval tip at x=0, got {d}");
    let d2 = distance_to_curve(&oval, (0.9, 0.0));
    assert!((d2 - 0.1).abs() < 1e-9, "nearest point is the branch tip at x=1, got {d2}");
}

// --- invariant conic and configuration derivation -----------------------------------

#[test]
fn invariant_conic_passes_through_all_five_base_points() {
    let (curve, qs) = ref3();
    for q in &qs {
        assert!(invariant_conic_is_ellipse(&curve, *q));
        let at_q = invariant_conic_value(&curve, *q, C::new(q.0, 0.0), C::new(q.1, 0.0));
        assert!(at_q.norm() < 1e-12);
        for p in tangency_points(&curve, *q).unwrap().iter() {
            let val = invariant_conic_value(&curve, *q, p.x, p.y);
            assert!(val.norm() < 1e-9, "conic residual {} at {:?}", val.norm(), p.x);
        }
    }
    // on the far side of the ellipse condition the conic opens up
    let q_right = curve.point_above(0.5, 1).unwrap();
    assert!(!invariant_conic_is_ellipse(&curve, q_right));
}

#[test]
fn derived_configuration_matches_the_combinatorial_default() {
    let (curve, qs) = ref3();
    let cfg = derive_config(&curve, &qs).unwrap();
    assert_eq!(cfg, default_k3_config());
}

#[test]
fn derived_k4_configuration_has_the_expected_order() {
    let (curve, qs) = reference_configuration(4).unwrap();
    let cfg = derive_config(&curve, &qs).unwrap();
    let expect = ConfigDescriptor::from_curve_order(
        4,
        vec![
            Pt::P(1, 2),
            Pt::P(4, 2),
            Pt::P(2, 2),
            Pt::P(3, 2),
            Pt::Q(3),
            Pt::Q(2),
            Pt::Q(4),
            Pt::Q(1),
            Pt::P(1, 1),
            Pt::P(4, 1),
            Pt::P(2, 1),
            Pt::P(3, 1),
        ],
    )
    .unwrap();
    assert_eq!(cfg, expect);
}

#[test]
fn disconnected_curves_cannot_derive_configurations() {
    let oval = CubicCurve::new(0.0, -1.0, 0.0).unwrap();
    let q = oval.point_above(1.5, 1).unwrap();
    assert!(matches!(
        derive_config(&oval, &[q]),
        Err(GeomError::Invalid(_))
    ));
}
