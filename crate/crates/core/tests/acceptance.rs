//! End-to-end acceptance criteria. Each criterion prints one line to stderr;
//! the test fails if any criterion fails.

use std::f64::consts::{E, PI};
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqg_patch::cde::{
    cde_velocity, free_space_pairing_with_scale, pairing, velocity_at_point, Coupling, QuadratureConfig,
};
use sqg_patch::contour::{Chain, Curve};
use sqg_patch::diagnostics::{
    blowup_bound_t, chord_arc_f, epsilon0_from, modulus_mu, separation,
};
use sqg_patch::evolution::{run, step, CdeField, PointwiseField, StopReason, VelocityField};
use sqg_patch::kernel::{green_periodic, r_alpha, KernelConfig};
use sqg_patch::mollifier::MollifierConfig;
use sqg_patch::oracle::{r_alpha_path_integral, velocity_area_integral, AreaQuadratureConfig};
use sqg_patch::scenario::ScenarioConfig;
use sqg_patch::PlanePoint;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn report(n: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = budget.map_or(true, |b| elapsed <= b);
    let pass = out.pass && in_time;
    let budget_note = match budget {
        Some(b) if !in_time => format!(" (over budget {:.0}s)", b.as_secs_f64()),
        _ => String::new(),
    };
    let line = format!(
        "criterion {n:>2} {} {name}: {} [{:.1}s]{budget_note}\n",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    pass
}

fn scenario(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    ScenarioConfig::load(&path).unwrap()
}

fn ellipse(m: usize, a: f64, b: f64) -> Chain {
    Chain::single(Curve::from_fn(m, 0, |t| PlanePoint::new(a * t.cos(), b * t.sin())).unwrap())
}

fn circle(m: usize, r: f64, c: PlanePoint) -> Curve {
    Curve::from_fn(m, 0, |t| c + PlanePoint::new(r * t.cos(), r * t.sin())).unwrap()
}

fn max_dist(a: &Chain, b: &Chain) -> f64 {
    a.flatten().iter().zip(b.flatten()).map(|(p, q)| (*p - q).norm()).fold(0.0, f64::max)
}

/// Least-squares slope of log e against log n.
fn loglog_slope(ns: &[f64], es: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn kernel_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let cfg = KernelConfig::with_alpha(alpha).unwrap();
        for x1 in [-0.4, -0.2, 0.0, 0.2, 0.4] {
            for x2 in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let x = PlanePoint::new(x1, x2);
                let a = r_alpha(x, &cfg).unwrap();
                let b = r_alpha_path_integral(x, alpha, 1e-9).unwrap();
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(worst <= 1e-6, format!("max |R series - R path| = {worst:.2e} (tol 1e-6)"))
}

fn periodicity_and_evenness() -> Outcome {
    let cfg = KernelConfig::with_alpha(0.5).unwrap();
    let tol = 2.0 * cfg.tail_tolerance();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 10_000 {
        let x = PlanePoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(-2.0..2.0));
        if x.norm() < 1e-3 {
            continue;
        }
        n += 1;
        let g = green_periodic(x, &cfg).unwrap();
        worst = worst.max((g - green_periodic(-x, &cfg).unwrap()).abs());
        let k = rng.gen_range(-3i64..=3);
        let xk = x + PlanePoint::new(k as f64, 0.0);
        worst = worst.max((g - green_periodic(xk, &cfg).unwrap()).abs());
    }
    check(worst <= tol, format!("max error {worst:.2e} over {n} points (tol {tol:.0e})"))
}

fn constitutive_law() -> Outcome {
    let alpha = 0.5;
    let chain = ellipse(256, 0.3, 0.15);
    let kernel = KernelConfig::with_alpha(alpha).unwrap();
    let quad = QuadratureConfig::default();
    let points: Vec<PlanePoint> = (0..10)
        .map(|i| {
            let t = 2.0 * PI * (i as f64 + 0.25) / 10.0;
            PlanePoint::new(0.42 * t.cos(), 0.3 * t.sin())
        })
        .collect();
    let reference: Vec<PlanePoint> = points.iter().map(|&x| velocity_at_point(x, &chain, &kernel, &quad).unwrap()).collect();
    let rel_at = |cells: usize, pts: &[usize]| -> f64 {
        let cfg = AreaQuadratureConfig { cells_per_unit: cells, ..AreaQuadratureConfig::default() };
        pts.iter()
            .map(|&i| {
                let v = velocity_area_integral(points[i], &chain, alpha, &cfg).unwrap();
                (v - reference[i]).norm() / reference[i].norm()
            })
            .fold(0.0, f64::max)
    };
    let all: Vec<usize> = (0..10).collect();
    let rel = rel_at(AreaQuadratureConfig::default().cells_per_unit, &all);
    let levels = [256usize, 512, 1024, 2048];
    let errs: Vec<f64> = levels.iter().map(|&n| rel_at(n, &[0, 3])).collect();
    let ns: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    let slope = -loglog_slope(&ns, &errs);
    check(
        rel <= 1e-3 && slope >= 1.0,
        format!(
            "max rel error {rel:.2e} at default resolution (tol 1e-3); refinement errors {:?}, fitted order {slope:.2}",
            errs.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn steady_layer() -> Outcome {
    let h = 0.3;
    let m = 128;
    let layer = Chain::new(vec![
        Curve::from_fn(m, -1, |t| PlanePoint::new(-t / (2.0 * PI), h)).unwrap(),
        Curve::from_fn(m, 1, |t| PlanePoint::new(t / (2.0 * PI), -h)).unwrap(),
    ])
    .unwrap();
    let kernel = KernelConfig::with_alpha(0.5).unwrap();
    let self_only = QuadratureConfig { coupling: Coupling::SelfOnly, ..QuadratureConfig::default() };
    let l = cde_velocity(&layer, &kernel, &self_only).unwrap().max_norm();
    let tol = 1e-12 * layer.max_abs().max(1.0);
    let chain_wide = cde_velocity(&layer, &kernel, &QuadratureConfig::default()).unwrap();
    let normal = chain_wide.flatten().iter().map(|v| v.x2.abs()).fold(0.0, f64::max);
    check(
        l <= tol,
        format!("max |L| per boundary {l:.2e} (tol {tol:.1e}); chain-wide normal velocity {normal:.1e}"),
    )
}

fn perfect_derivative() -> Outcome {
    let kernel = KernelConfig::with_alpha(0.5).unwrap();
    let p = |m: usize| free_space_pairing_with_scale(&ellipse(m, 0.3, 0.15), m / 2, &kernel).unwrap();
    let (p256, scale) = p(256);
    let (p512, _) = p(512);
    let err = (p256 - p512).abs().max(64.0 * f64::EPSILON * scale);
    let small = p256.abs() <= 10.0 * err;
    let coarse = [16usize, 24, 32, 48];
    let vals: Vec<f64> = coarse.iter().map(|&m| p(m).0.abs()).collect();
    let ns: Vec<f64> = coarse.iter().map(|&m| m as f64).collect();
    let order = -loglog_slope(&ns, &vals);
    check(
        small && order >= 1.5,
        format!(
            "|P(256)| = {:.2e}, error estimate {err:.2e}; coarse values {:?}, fitted order {order:.2}",
            p256.abs(),
            vals.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn symmetry_identity() -> Outcome {
    let chain = ellipse(256, 0.3, 0.15);
    let kernel = KernelConfig::with_alpha(0.5).unwrap();
    let quad = QuadratureConfig::default();
    let self_only = QuadratureConfig { coupling: Coupling::SelfOnly, ..QuadratureConfig::default() };
    let l = Curve::new(cde_velocity(&chain, &kernel, &self_only).unwrap().per_curve[0].clone(), 0).unwrap();
    let curve = &chain.curves()[0];
    let h = 2.0 * PI / 256.0;
    let norm = |v: &[PlanePoint]| (h * v.iter().map(|p| p.norm_sq()).sum::<f64>()).sqrt();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for m in 0..=1u32 {
        let p = pairing(&chain, m, &kernel, &quad).unwrap();
        let scale = if m == 0 {
            norm(curve.nodes()) * norm(l.nodes())
        } else {
            norm(&curve.derivative(1).unwrap()) * norm(&l.derivative(1).unwrap())
        };
        let rel = (p.direct - p.symmetric).abs() / scale;
        parts.push(format!("m={m}: {rel:.1e}"));
        worst = worst.max(rel);
    }
    check(worst <= 1e-6, format!("|direct - symmetric| / (‖∂^mγ‖‖∂^mL‖): {} (tol 1e-6)", parts.join(", ")))
}

fn area_conservation() -> Outcome {
    let cfg = scenario("perturbed_front.json");
    let chain = cfg.initial_chain().unwrap();
    let field = cfg.velocity_field().unwrap();
    let settings = cfg.run_settings().unwrap();
    let out = run(chain, &field, &settings, &mut |_| Ok(())).unwrap();
    let drift = out
        .initial_record
        .area
        .iter()
        .zip(&out.final_record.area)
        .map(|(a, b)| ((b - a) / a).abs())
        .fold(0.0, f64::max);
    check(
        out.reason == StopReason::Completed && drift <= 1e-4,
        format!(
            "relative area drift {drift:.2e} after {} steps to t = {} (tol 1e-4, target 1e-6 {})",
            out.steps,
            out.final_time,
            if drift <= 1e-6 { "met" } else { "missed" }
        ),
    )
}

fn temporal_order() -> Outcome {
    let front = Chain::single(Curve::from_fn(128, 1, |t| PlanePoint::new(t / (2.0 * PI), 0.3 + 0.01 * t.cos())).unwrap());
    let field = CdeField::new(KernelConfig::with_alpha(0.5).unwrap(), QuadratureConfig::default(), None).unwrap();
    let finals: Vec<Chain> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dt| {
            let n = (0.1 / dt as f64).round() as usize;
            (0..n).fold(front.clone(), |c, _| step(&c, dt, &field as &dyn VelocityField).unwrap())
        })
        .collect();
    let (e1, e2) = (max_dist(&finals[0], &finals[1]), max_dist(&finals[1], &finals[2]));
    let order = (e1 / e2).log2();
    check(order >= 3.5, format!("self-convergence order {order:.3} (differences {e1:.2e}, {e2:.2e}; M = 128, t = 0.1)"))
}

fn mollifier_contract() -> Outcome {
    let mut mass_err: f64 = 0.0;
    let mut adjoint_err: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &m in &[64usize, 256, 1024] {
        for &eps in &[0.05, 0.3, 1.0] {
            let mol = MollifierConfig::new(eps).unwrap();
            mass_err = mass_err.max((mol.weights(m).iter().sum::<f64>() - 1.0).abs());
            let f: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / m as f64;
            adjoint_err = adjoint_err.max((dot(&mol.apply_scalar(&f), &g) - dot(&f, &mol.apply_scalar(&g))).abs());
        }
    }
    let m = 4096;
    let f: Vec<f64> = (0..m).map(|i| (2.0 * PI * i as f64 / m as f64).sin()).collect();
    let mut bound_ok = true;
    let mut ratios = Vec::new();
    for eps in [0.1, 0.01] {
        let g = MollifierConfig::new(eps).unwrap().apply_scalar(&f);
        let dev = f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let bound = 2.0 * PI * eps;
        bound_ok &= dev <= bound;
        ratios.push(format!("ε={eps}: {dev:.1e} ≤ {bound:.1e}"));
    }
    check(
        mass_err <= 1e-12 && adjoint_err <= 1e-12 && bound_ok,
        format!("mass error {mass_err:.1e}, adjointness error {adjoint_err:.1e}; {}", ratios.join(", ")),
    )
}

fn closed_forms() -> Outcome {
    let mut worst_f0: f64 = 0.0;
    for m in [50usize, 64, 96] {
        let f = chord_arc_f(&Chain::single(circle(m, 1.0, PlanePoint::ZERO)), 3, true).unwrap();
        worst_f0 = worst_f0.max((f.f0_inf - PI / 2.0).abs());
    }
    let mu_err = (1..1000)
        .map(|k| {
            let a = k as f64 / 1000.0 / E;
            (modulus_mu(a) + E * a * a.ln()).abs()
        })
        .fold(0.0, f64::max);
    let t_star = blowup_bound_t(1.0, 3, 1.0);
    let eps_ok = epsilon0_from(1.0, 1.0, 1.0).unwrap() == 1.0 && epsilon0_from(2.0, 2.0, 1.0).unwrap() == 1.0 / 32.0;
    check(
        worst_f0 <= 1e-6 && mu_err <= 1e-12 && t_star == 0.125 && eps_ok,
        format!("|sup F₀ - π/2| = {worst_f0:.1e}, μ error {mu_err:.1e}, T*(1,3,1) = {t_star}, ε₀ plug-ins exact: {eps_ok}"),
    )
}

fn separation_guard() -> Outcome {
    let cfg = scenario("two_circles.json");
    let floor = cfg.separation_floor;
    let settings = cfg.run_settings().unwrap();
    let mut seen = Vec::new();
    let still = run(cfg.initial_chain().unwrap(), &cfg.velocity_field().unwrap(), &settings, &mut |f| {
        seen.push(f.record.separation);
        Ok(())
    })
    .unwrap();
    let min_static = seen.iter().copied().fold(f64::INFINITY, f64::min);
    let static_ok = still.reason == StopReason::Completed;

    // the components drift towards each other
    let approach = PointwiseField(|p: PlanePoint| PlanePoint::new(0.0, -0.7 * p.x2.signum()));
    let mut settings = settings;
    settings.stepper.t_end = 0.1;
    let mut trace = Vec::new();
    let moving = run(cfg.initial_chain().unwrap(), &approach, &settings, &mut |f| {
        trace.push(f.record.separation);
        Ok(())
    })
    .unwrap();
    let last = moving.final_record.separation;
    let before = trace.iter().rev().nth(1).copied().unwrap_or(f64::INFINITY);
    let exact = separation(&moving.final_chain);
    let moving_ok = moving.reason == StopReason::SeparationFloor && last < floor && before >= floor && exact == last;
    check(
        static_ok && moving_ok,
        format!(
            "static run: {} (min r = {min_static:.4}); approaching run: {} at t = {:.3} with r = {last:.4} (previous {before:.4}, floor {floor})",
            still.reason,
            moving.reason,
            moving.final_time
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let s = Duration::from_secs;
    let results = [
        report(1, "kernel oracle equivalence", Some(s(120)), kernel_oracle),
        report(2, "periodicity and evenness of G_p", Some(s(60)), periodicity_and_evenness),
        report(3, "constitutive-law equivalence", Some(s(300)), constitutive_law),
        report(4, "exact steady flat layer", Some(s(10)), steady_layer),
        report(5, "perfect-derivative identity", None, perfect_derivative),
        report(6, "symmetry identity", None, symmetry_identity),
        report(7, "area conservation", Some(s(600)), area_conservation),
        report(8, "temporal order", None, temporal_order),
        report(9, "mollifier contract", None, mollifier_contract),
        report(10, "diagnostics closed forms", None, closed_forms),
        report(11, "component separation guard", None, separation_guard),
    ];
    let passed = results.iter().filter(|p| **p).count();
    assert_eq!(passed, results.len(), "{passed} of {} criteria passed", results.len());
}
