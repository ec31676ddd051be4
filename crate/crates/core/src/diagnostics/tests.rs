use super::*;
use approx::assert_relative_eq;

fn circle(m: usize, r: f64, c: PlanePoint) -> Curve {
    Curve::from_fn(m, 0, |t| c + PlanePoint::new(r * t.cos(), r * t.sin())).unwrap()
}

fn front(m: usize, h: f64) -> Curve {
    Curve::from_fn(m, 1, |t| PlanePoint::new(t / (2.0 * PI), h)).unwrap()
}

#[test]
fn unit_circle_chord_arc() {
    let ch = Chain::single(circle(64, 1.0, PlanePoint::ZERO));
    let f = chord_arc_f(&ch, 3, true).unwrap();
    assert!((f.f0_inf - PI / 2.0).abs() < 1e-6);
    // β = 0 column is the diagonal 1/|γ'| = 1
    let half = 32;
    for i in 0..64 {
        assert_relative_eq!(f.grid[0][i * 64 + half - 1], 1.0, epsilon = 1e-12);
    }
    // the lattice part never exceeds F
    assert!(f.lattice_inf <= f.f_inf);
}

#[test]
fn unit_circle_refinement_off_grid() {
    // odd number of cells per half period puts β = π off the interior nodes
    let ch = Chain::single(circle(50, 1.0, PlanePoint::ZERO));
    let f = chord_arc_f(&ch, 3, true).unwrap();
    assert!((f.f0_inf - PI / 2.0).abs() < 1e-6, "{}", f.f0_inf);
}

#[test]
fn flat_front_chord_arc() {
    let ch = Chain::single(front(64, 0.3));
    let f = chord_arc_f(&ch, 3, true).unwrap();
    assert_relative_eq!(f.f0_inf, 2.0 * PI, max_relative = 1e-12);
    assert_relative_eq!(f.lattice_inf, 2.0, max_relative = 1e-12);
    assert_relative_eq!(f.f_inf, 2.0 * PI, max_relative = 1e-12);
}

#[test]
fn self_intersection_is_infinite() {
    let eight = Curve::from_fn(64, 0, |t| PlanePoint::new(0.2 * t.sin(), 0.1 * (2.0 * t).sin())).unwrap();
    let f = chord_arc_f(&Chain::single(eight), 3, false).unwrap();
    assert!(f.f_inf > 1e12);
    let mut nodes = circle(16, 0.2, PlanePoint::ZERO).nodes().to_vec();
    nodes[9] = nodes[2];
    let pinched = Chain::single(Curve::new(nodes, 0).unwrap());
    assert!(chord_arc_f(&pinched, 3, false).unwrap().f_inf.is_infinite());
}

#[test]
fn chord_arc_bounds_lattice_terms_pointwise() {
    let c = Curve::from_fn(64, 1, |t| PlanePoint::new(t / (2.0 * PI) + 0.1 * t.sin(), 0.2 * t.cos())).unwrap();
    let f = chord_arc_f(&Chain::single(c.clone()), 3, false).unwrap();
    let s = CurveSampler::new(&c).unwrap();
    for i in (0..64).step_by(7) {
        for col in 0..64 {
            let j = col as i64 - 31;
            let delta = if j == 0 { PlanePoint::ZERO } else { s.grid_delta(i, j) };
            let (_, fl) = chord_values(j as f64 * s.h, delta, s.speed[i], 3);
            assert!(fl <= f.grid[0][i * 64 + col]);
        }
    }
}

#[test]
fn weights_examples() {
    let a = Alpha::new(0.5).unwrap();
    assert_eq!(weights_s(0, 1.0, 0.0, a), 1.0);
    let expected = 6.0 * 2f64.sqrt() + 2.0;
    assert_relative_eq!(weights_s(2, 2.0, 1.0, a), expected, max_relative = 1e-15);
    let mut last = 0.0;
    for n in 1..6 {
        let v = weights_s(n, 1.7, 0.8, a);
        assert!(v >= last);
        last = v;
    }
}

#[test]
fn blowup_examples() {
    assert_eq!(blowup_bound_t(1.0, 3, 1.0), 0.125);
    let t1 = blowup_bound_t(0.7, 3, 1.0);
    let t2 = blowup_bound_t(1.4, 3, 1.0);
    assert_relative_eq!(t1 / t2, 2f64.powi(8), max_relative = 1e-13);
    assert_eq!(energy_bound(1.3, 3, 1.0, 0.0), 1.3);
    assert!(energy_bound(1.0, 3, 1.0, 0.2).is_infinite());
    assert!(energy_bound(1.0, 3, 1.0, 0.1) > 1.0);
}

#[test]
fn epsilon0_examples() {
    assert_eq!(epsilon0_from(1.0, 1.0, 1.0).unwrap(), 1.0);
    assert_eq!(epsilon0_from(2.0, 2.0, 1.0).unwrap(), 1.0 / 32.0);
    assert_relative_eq!(epsilon0_from(2.0, 2.0, 3.0).unwrap(), 3.0 / 32.0);
    assert!(epsilon0_from(1.0, 0.0, 1.0).is_err());
    let zero = Chain::single(Curve::new(vec![PlanePoint::ZERO; 16], 0).unwrap());
    assert!(epsilon0(&zero, 1.0).is_err());
    let ch = Chain::single(circle(64, 1.0, PlanePoint::ZERO));
    let h3 = chain_sobolev_norm(&ch, 3).unwrap();
    assert_relative_eq!(epsilon0(&ch, 1.0).unwrap(), epsilon0_from(PI / 2.0, h3, 1.0).unwrap(), max_relative = 1e-6);
}

#[test]
fn separation_examples() {
    let layer = Chain::new(vec![front(64, 0.3), front(64, -0.3)]).unwrap();
    assert_relative_eq!(separation(&layer), 0.6, max_relative = 1e-12);
    let two = Chain::new(vec![circle(64, 0.1, PlanePoint::new(0.0, 0.5)), circle(64, 0.1, PlanePoint::new(0.0, -0.5))]).unwrap();
    assert_relative_eq!(separation(&two), 0.8, max_relative = 1e-12);
    let one = Chain::single(circle(64, 0.4, PlanePoint::ZERO));
    assert!(separation(&one).is_infinite());
    // the periodic translate is closer than the direct copy
    let side = Chain::new(vec![circle(64, 0.1, PlanePoint::new(-0.35, 0.0)), circle(64, 0.1, PlanePoint::new(0.35, 0.0))]).unwrap();
    assert_relative_eq!(separation(&side), 0.1, max_relative = 1e-9);
}

#[test]
fn separation_refines_off_grid() {
    let two = Chain::new(vec![
        circle(32, 0.1, PlanePoint::new(0.0, 0.5)),
        circle(32, 0.1, PlanePoint::new(0.05, -0.5)).rotate_index(3),
    ])
    .unwrap();
    let centre_gap = (0.05f64 * 0.05 + 1.0).sqrt();
    assert_relative_eq!(separation(&two), centre_gap - 0.2, max_relative = 1e-9);
}

#[test]
fn area_examples() {
    let ch = Chain::single(circle(64, 1.0, PlanePoint::new(0.3, -0.2)));
    assert_relative_eq!(patch_area(&ch).unwrap()[0], PI, max_relative = 1e-13);
    let rev = Chain::single(ch.curves()[0].reversed());
    assert_relative_eq!(patch_area(&rev).unwrap()[0], -PI, max_relative = 1e-13);
    let fr = Chain::single(front(32, 0.3));
    assert_relative_eq!(patch_area(&fr).unwrap()[0], -0.3, max_relative = 1e-13);
    let layer = Chain::new(vec![
        Curve::from_fn(64, -1, |t| PlanePoint::new(-t / (2.0 * PI), 0.25)).unwrap(),
        Curve::from_fn(64, 1, |t| PlanePoint::new(t / (2.0 * PI), -0.25)).unwrap(),
    ])
    .unwrap();
    let a = patch_area(&layer).unwrap();
    assert_relative_eq!(a[0] + a[1], 0.5, max_relative = 1e-13);
    let wavy = Curve::from_fn(64, 1, |t| PlanePoint::new(t / (2.0 * PI) + 0.05 * t.sin(), 0.3 + 0.02 * (2.0 * t).cos())).unwrap();
    let a = patch_area(&Chain::single(wavy.clone())).unwrap()[0];
    assert!((patch_area(&Chain::single(wavy.rotate_index(11))).unwrap()[0] - a).abs() < 1e-10);
    assert!((patch_area(&Chain::single(wavy.resample(128).unwrap())).unwrap()[0] - a).abs() < 1e-10);
}

#[test]
fn modulus_examples() {
    assert_relative_eq!(modulus_mu(1.0), 1.0 / E);
    assert_relative_eq!(modulus_mu((-2.0f64).exp()), 2.0 / E, max_relative = 1e-15);
    assert_eq!(modulus_mu(0.0), 0.0);
    for k in 1..100 {
        let a = k as f64 / 100.0 / E;
        assert!((modulus_mu(a) - (-E * a * a.ln())).abs() <= 1e-12);
        assert_eq!(modulus_mu(a), min_gives_ll(a));
    }
    assert_eq!(min_gives_ll(0.5), 1.0);
    assert_relative_eq!(modulus_mu(0.5), 0.5 / E);
}

#[test]
fn bound_coefficient() {
    let a = Alpha::new(0.5).unwrap();
    let zero = Chain::single(Curve::new(vec![PlanePoint::ZERO; 32], 0).unwrap());
    let s = weights_s_chain(&zero, 2, 1.5, a);
    assert_eq!(bound_coefficient_am(&zero, 2, a, 1.5).unwrap(), s);
    // front: hand-computed S_2 and H^3 norm
    let fr = Chain::single(front(32, 0.3));
    let l2 = (2.0 * PI * (0.25 + 0.09)).sqrt();
    let h3 = (l2 * l2 + 0.5 / PI).sqrt();
    let f = 2.0 * PI;
    let s2 = f.powf(1.5) + l2 + f.powf(2.5) + l2 * l2;
    let expected = s2 * (1.0 + h3 + h3 * h3 + h3 * h3 * h3);
    assert_relative_eq!(bound_coefficient_am(&fr, 2, a, f).unwrap(), expected, max_relative = 1e-12);
    let big = Chain::single(Curve::from_fn(32, 0, |t| PlanePoint::new(0.3 * t.cos(), 0.3 * t.sin())).unwrap());
    assert!(bound_coefficient_am(&big, 2, a, f).unwrap() > bound_coefficient_am(&zero, 2, a, f).unwrap());
}

#[test]
fn record_csv_and_json() {
    let a = Alpha::new(0.5).unwrap();
    let ch = Chain::single(circle(64, 0.2, PlanePoint::ZERO));
    let r = DiagnosticsRecord::compute(&ch, 0.0, a, crate::contour::SobolevIndex::new(3).unwrap(), &DiagnosticsConfig::default()).unwrap();
    assert_eq!(
        DiagnosticsRecord::csv_header(3, 1),
        "time,F_inf,F0_inf,sobolev_m,energy_S,separation,A_m,S_0,S_1,S_2,S_3,area_0"
    );
    let row = r.csv_row();
    assert_eq!(row.split(',').count(), 12);
    assert!(row.contains(",inf,"));
    let j = r.to_json();
    assert!(j["separation"].is_null());
    assert_relative_eq!(j["area"][0].as_f64().unwrap(), PI * 0.04, max_relative = 1e-12);
    assert_relative_eq!(r.energy_s, r.f_inf + r.sobolev_m.powi(2));
}

#[test]
fn crossing_components_are_detected() {
    let c = |x: f64| Curve::from_fn(32, 0, move |t| PlanePoint::new(x + 0.2 * t.cos(), 0.2 * t.sin())).unwrap();
    assert!(components_intersect(&Chain::new(vec![c(0.0), c(0.1)]).unwrap()));
    assert!(!components_intersect(&Chain::new(vec![c(0.0), c(0.45)]).unwrap()));
    // crossing through the periodic seam
    assert!(components_intersect(&Chain::new(vec![c(-0.45), c(0.4)]).unwrap()));
}
