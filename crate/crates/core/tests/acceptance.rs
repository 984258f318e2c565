//! Acceptance suite. The criteria run one after another so that runtime
//! limits are measured without contention; each prints one PASS/FAIL line
//! and the test fails at the end if any criterion failed.

use std::f64::consts::{E, PI};
use std::time::{Duration, Instant};

use entropy_lab::flow::{
    analytic_shrinking_sphere, evolve, monotonicity_report, slice_at, FlowScheme, MONOTONICITY_TOL, Verdict,
};
use entropy_lab::functionals::{
    entropy, f_functional, f_gradient, local_entropy, rescaled_local_entropy_check, EntropyOptions, ScaleWindow,
    SpatialDomain,
};
use entropy_lab::geometry::fixtures::{circle, concentric_spheres, ellipsoid, icosphere, neck_shell};
use entropy_lab::geometry::{build_normal_graph, geodesic_distance, DiscreteSurface, PerturbationField};
use entropy_lab::instability::{
    entropy_drop_ladder, graph_area_defect, graph_isotopy, localize_field, CollarProfile, CutoffSpec, IsotopyParams,
};
use entropy_lab::layers::{default_probe_radius, layer_report, multiplicity_estimate, sheet_decomposition};
use entropy_lab::pipeline::run_pipeline;
use entropy_lab::{Error, RunConfig, Vec3, WeightedSurfaceMeasure};
use nalgebra::Rotation3;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Golden-section maximum of a unimodal function on [lo, hi].
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (a, b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    f(0.5 * (lo + hi))
}

fn pole(s: &DiscreteSurface, dir: Vec3) -> usize {
    (0..s.n_vertices())
        .max_by(|&a, &b| s.vertices()[a].dot(&dir).total_cmp(&s.vertices()[b].dot(&dir)))
        .unwrap()
}

fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

fn sphere_entropy() -> Outcome {
    let start = Instant::now();
    let s = icosphere(4, 2.0);
    let o = EntropyOptions::default();
    let one = entropy(&s.clone().into(), &o).map_err(err)?;
    let elapsed = start.elapsed();
    let oracle = golden_max(|t| 4.0 / t * (-1.0 / t).exp(), 0.1, 10.0);
    check((oracle - 4.0 / E).abs() < 1e-12, || format!("oracle {oracle}"))?;
    let rel = (one.value - oracle).abs() / oracle;
    check(rel < 0.01, || format!("lambda {} vs {oracle}", one.value))?;
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    for m in [2u32, 3] {
        let v = entropy(&WeightedSurfaceMeasure::single(s.clone(), m).map_err(err)?, &o).map_err(err)?.value;
        check(v == m as f64 * one.value, || format!("m = {m}: {v} != {} x {}", m, one.value))?;
    }
    Ok(format!("lambda = {:.6} (rel err {rel:.2e}) in {elapsed:.1?}; multiples exact", one.value))
}

fn circle_entropy() -> Outcome {
    let start = Instant::now();
    let r = 2f64.sqrt();
    let v = entropy(&circle(512, r).into(), &EntropyOptions::default()).map_err(err)?.value;
    let elapsed = start.elapsed();
    let oracle = golden_max(|t| r * (PI / t).sqrt() * (-r * r / (4.0 * t)).exp(), 0.05, 10.0);
    check((oracle - (2.0 * PI / E).sqrt()).abs() < 1e-12, || format!("oracle {oracle}"))?;
    let rel = (v - oracle).abs() / oracle;
    check(rel < 0.005, || format!("lambda {v} vs {oracle}"))?;
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("lambda = {v:.6} (rel err {rel:.2e}) in {elapsed:.1?}"))
}

fn gradient_probes(rng: &mut StdRng) -> Outcome {
    let fixtures: [WeightedSurfaceMeasure; 2] = [icosphere(3, 2.0).into(), ellipsoid(3, [2.0, 1.5, 1.0]).into()];
    let mut worst = 0.0f64;
    for k in 0..20 {
        let mu = &fixtures[k % 2];
        let x = Vec3::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.0..1.0));
        let t = rng.random_range(0.3..3.0);
        let (gx, gt) = f_gradient(mu, &x, t).map_err(err)?;
        let h = 1e-5;
        let f = |x: &Vec3, t: f64| f_functional(mu, x, t).unwrap();
        let mut fd = [0.0; 4];
        for a in 0..3 {
            let mut e = Vec3::zeros();
            e[a] = h;
            fd[a] = (f(&(x + e), t) - f(&(x - e), t)) / (2.0 * h);
        }
        fd[3] = (f(&x, t + h) - f(&x, t - h)) / (2.0 * h);
        let g = [gx.x, gx.y, gx.z, gt];
        let num: f64 = (0..4).map(|i| (g[i] - fd[i]).powi(2)).sum::<f64>().sqrt();
        let den: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = num / den;
        worst = worst.max(rel);
        check(rel < 1e-5, || format!("probe {k} at {x:?}, t = {t}: rel err {rel:e}"))?;
    }
    Ok(format!("20 probes, worst rel err {worst:.2e}"))
}

fn rescaling_identity(rng: &mut StdRng) -> Outcome {
    let mu: WeightedSurfaceMeasure = ellipsoid(3, [2.0, 1.5, 1.2]).into();
    let o = EntropyOptions::default();
    let mut worst = 0.0f64;
    for alpha in [0.5, 2.0, 7.0] {
        let y = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let c = rescaled_local_entropy_check(&mu, alpha, &y, 0.8, &o).map_err(err)?;
        worst = worst.max(c.defect);
        check(c.defect < 1e-8, || format!("alpha {alpha}: defect {:e}", c.defect))?;
    }
    Ok(format!("worst defect {worst:.2e}"))
}

fn monotonicity(rng: &mut StdRng) -> Outcome {
    let times: Vec<f64> = (0..10).map(|k| 0.09 * k as f64).collect();
    let traj = analytic_shrinking_sphere(2.0, 2, &times, 4).map_err(err)?;
    let rep = monotonicity_report(&traj, &Vec3::zeros(), 1.0).map_err(err)?;
    for (t, f) in &rep.samples {
        check((f - 4.0 / E).abs() < 0.01 * 4.0 / E, || format!("sphere F = {f} at t = {t}"))?;
    }
    let evolved = evolve(&ellipsoid(3, [1.4, 1.1, 0.9]), 2e-4, 500, FlowScheme::Explicit).map_err(err)?;
    let t_last = evolved.last().t;
    for k in 0..10 {
        let x0 = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let t_ref = t_last + rng.random_range(0.05..1.0);
        let rep = monotonicity_report(&evolved, &x0, t_ref).map_err(err)?;
        check(rep.is_monotone(), || format!("probe {k}: increases at samples {:?}", rep.violations))?;
    }
    Ok(format!(
        "sphere constant within 1%; ellipsoid non-increasing (tol {MONOTONICITY_TOL:e}) for 10 probes"
    ))
}

fn local_entropy_flow(rng: &mut StdRng) -> Outcome {
    let traj = evolve(&ellipsoid(3, [1.4, 1.1, 0.9]), 2e-4, 500, FlowScheme::Explicit).map_err(err)?;
    let o = EntropyOptions::default();
    let t_end = traj.last().t;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..5 {
        let t1 = rng.random_range(0.0..0.5 * t_end);
        let t2 = rng.random_range(t1 + 0.01..t_end);
        let a = (t2 - t1) + rng.random_range(0.05..0.5);
        let b = a + rng.random_range(0.1..2.0);
        let (m1, _) = slice_at(&traj, t1).map_err(err)?;
        let (m2, _) = slice_at(&traj, t2).map_err(err)?;
        let lhs_w = ScaleWindow::bounded(a + t1 - t2, b + t1 - t2).map_err(err)?;
        let rhs_w = ScaleWindow::bounded(a, b).map_err(err)?;
        let lhs = local_entropy(&m2.into(), &lhs_w, &SpatialDomain::All, &o).map_err(err)?.value;
        let rhs = local_entropy(&m1.into(), &rhs_w, &SpatialDomain::All, &o).map_err(err)?.value;
        worst = worst.max(lhs - rhs);
        check(lhs <= rhs + 1e-3, || format!("pair {k}: {lhs} > {rhs} + 1e-3 (t1 {t1}, t2 {t2}, [{a}, {b}])"))?;
    }
    Ok(format!("5 pairs, max lhs - rhs = {worst:.2e}"))
}

fn entropy_drop() -> Outcome {
    let start = Instant::now();
    let s = icosphere(4, 2.0);
    let f = PerturbationField::constant(s.n_vertices(), 1.0);
    let ladder = [0.2, 0.1, 0.05];
    let lad = entropy_drop_ladder(&s, 2, &f, &ladder, None, &EntropyOptions::default()).map_err(err)?;
    let elapsed = start.elapsed();
    let margins: Vec<f64> = lad.entries.iter().map(|e| e.report.as_ref().map_or(f64::NAN, |r| r.margin)).collect();
    check(margins.iter().all(|m| *m > 0.0), || format!("margins {margins:?}"))?;
    check(lad.monotone && margins.windows(2).all(|w| w[1] < w[0]), || format!("not monotone: {margins:?}"))?;
    check(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "margins {:?} for eps {ladder:?}; largest working eps {:?}; {elapsed:.1?}",
        margins.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>(),
        lad.largest_working
    ))
}

fn localization() -> Outcome {
    let s = icosphere(4, 2.0);
    let (p, q) = (pole(&s, Vec3::z()), pole(&s, -Vec3::z()));
    let r = 0.3;
    let f = PerturbationField::new(s.vertices().iter().map(|v| 1.0 + 0.25 * v.x).collect());
    let fr = localize_field(&s, &f, &CutoffSpec::new(vec![p, q], r)).map_err(err)?;
    let dp = geodesic_distance(&s, p).map_err(err)?;
    let dq = geodesic_distance(&s, q).map_err(err)?;
    for i in 0..s.n_vertices() {
        let d = dp[i].min(dq[i]);
        check(fr.values[i] >= 0.0, || format!("(1) fails at {i}"))?;
        check(d > r || fr.values[i] == 0.0, || format!("(2) fails at {i}"))?;
        check(d < 2.0 * r || fr.values[i] == f.values[i], || format!("(3) fails at {i}"))?;
    }
    let fine = icosphere(5, 2.0);
    let p = pole(&fine, Vec3::z());
    let one = PerturbationField::constant(fine.n_vertices(), 1.0);
    let radii = [0.4, 0.2, 0.1];
    let defects = radii
        .iter()
        .map(|&r| {
            let fr = localize_field(&fine, &one, &CutoffSpec::new(vec![p], r))?;
            graph_area_defect(&fine, &one, &fr, 0.05)
        })
        .collect::<Result<Vec<f64>, Error>>()
        .map_err(err)?;
    let slope = log_log_slope(&radii, &defects);
    check(slope >= 0.9, || format!("slope {slope} from {defects:?}"))?;
    Ok(format!("properties (1)-(3) exact on {} vertices; area defect slope {slope:.2}", s.n_vertices()))
}

fn isotopy() -> Outcome {
    let s = icosphere(3, 2.0);
    let f = PerturbationField::new(s.vertices().iter().map(|p| 0.05 + 0.02 * p.z / 2.0).collect());
    let params = IsotopyParams::new(0.1, 0.4).map_err(err)?;
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let img = graph_isotopy(&s, &f, t, &params).map_err(err)?;
        check(img.injective, || format!("not injective at t = {t}"))?;
    }
    let eps = 0.9;
    let img = graph_isotopy(&s, &f, eps, &params).map_err(err)?;
    let g = build_normal_graph(&s, &f, eps).map_err(err)?;
    let gap = img
        .surface
        .vertices()
        .iter()
        .zip(g.vertices())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    check(gap < 1e-12, || format!("zero fiber differs by {gap:e}"))?;
    let steep = IsotopyParams::with_profile(0.1, 0.4, CollarProfile { inner: 0.1, outer: 0.15 }).map_err(err)?;
    match graph_isotopy(&s, &f, 1.0, &steep) {
        Err(Error::IsotopyBound(v)) => Ok(format!("injective at 5 times; zero fiber gap {gap:.1e}; steep profile rejected ({v:.3})")),
        other => Err(format!("steep profile accepted: {:?}", other.map(|i| i.sup_dphi))),
    }
}

fn layers() -> Outcome {
    let reference = icosphere(4, 2.0);
    let two = concentric_spheres(3, &[2.0, 2.05]);
    let r = default_probe_radius(&two);
    let m = multiplicity_estimate(&two, &reference, 3.0, r).map_err(err)?;
    check(m == 2, || format!("concentric spheres gave {m}"))?;

    let neck = neck_shell(2.0, 2.08, 0.15, 48, 64);
    let plain = sheet_decomposition(&neck, &reference, &[]).map_err(err)?;
    check(plain.multiplicity == 1, || format!("neck without exclusion gave {}", plain.multiplicity))?;
    let rep = layer_report(&neck, &reference, 3.0, default_probe_radius(&neck)).map_err(err)?;
    check(rep.concentration.len() == 1, || format!("{} concentration points", rep.concentration.len()))?;
    check(rep.multiplicity == 2, || format!("neck with exclusion gave {}", rep.multiplicity))?;

    let rot = Rotation3::from_euler_angles(0.7, -0.4, 1.9);
    let shift = Vec3::new(-3.0, 1.0, 4.0);
    let moved = multiplicity_estimate(&two.rigid_motion(&rot, &shift), &reference.rigid_motion(&rot, &shift), 3.0, r)
        .map_err(err)?;
    check(moved == m, || format!("rigid motion changed {m} to {moved}"))?;
    let neck_moved = multiplicity_estimate(
        &neck.rigid_motion(&rot, &shift),
        &reference.rigid_motion(&rot, &shift),
        3.0,
        default_probe_radius(&neck),
    )
    .map_err(err)?;
    check(neck_moved == 2, || format!("moved neck gave {neck_moved}"))?;
    Ok("concentric 2; neck 1 then 2 with the detected ball excluded; invariant under rigid motion".into())
}

fn pipeline() -> Outcome {
    let start = Instant::now();
    let config = RunConfig::default();
    let rep = run_pipeline(&icosphere(4, 2.0), 2, &config).map_err(|f| err(f.error))?;
    let elapsed = start.elapsed();
    let drop = rep.drop.as_ref().ok_or("no drop report")?;
    check(drop.margin > 0.0, || format!("margin {}", drop.margin))?;
    let c = rep.certificate.as_ref().ok_or("no certificate")?;
    let target = 8.0 / E;
    check(c.verdict == Verdict::Excluded, || format!("verdict {:?}: {} vs {}", c.verdict, c.value, c.target))?;
    check((c.target - target).abs() < 0.01 * target, || format!("target {}", c.target))?;
    check(c.value < target, || format!("value {} not below 8/e", c.value))?;
    let (a, alpha, t_sing) = (config.window.a, config.alpha, config.singular_time);
    let expected = t_sing + (a - 1.0) / (alpha * alpha);
    check(a == 0.25 && c.excluded == Some((expected, None)), || format!("excluded {:?}", c.excluded))?;
    let ext = rep.extinction.as_ref().ok_or("no extinction bound")?;
    let quarter = ext.gamma * ext.gamma / 4.0;
    check((ext.delta - quarter).abs() <= 0.1 * quarter, || format!("delta {} vs {quarter}", ext.delta))?;
    check((ext.gamma - 2.0).abs() < 0.1, || format!("gamma {}", ext.gamma))?;
    check(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "margin {:.3e} at eps {}; lambda^[a,inf) = {:.5} < {:.5} (8/e = {target:.5}); excluded on [{expected}, inf); gamma {:.4}, delta {:.4}; {elapsed:.1?}",
        drop.margin, drop.epsilon, c.value, c.target, ext.gamma, ext.delta
    ))
}

#[test]
fn acceptance_suite() {
    let mut rng = StdRng::seed_from_u64(20240607);
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut StdRng) -> Outcome>)> = vec![
        ("1 sphere entropy", Box::new(|_| sphere_entropy())),
        ("2 circle entropy", Box::new(|_| circle_entropy())),
        ("3 gradient vs finite differences", Box::new(gradient_probes)),
        ("4 rescaling identity", Box::new(rescaling_identity)),
        ("5 Huisken monotonicity", Box::new(monotonicity)),
        ("6 local entropy along the flow", Box::new(local_entropy_flow)),
        ("7 entropy drop", Box::new(|_| entropy_drop())),
        ("8 localization", Box::new(|_| localization())),
        ("9 isotopy", Box::new(|_| isotopy())),
        ("10 layers", Box::new(|_| layers())),
        ("11 pipeline", Box::new(|_| pipeline())),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run(&mut rng) {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                println!("FAIL  {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
