//! Aggregated invariant suite.
//!
//! Runs every module-level invariant as a named check and stops at the first
//! failure, carrying a serializable counterexample. The CLI `property-suite`
//! command is a thin wrapper around [`run_property_suite`].

use crate::extended::Extended;
use crate::group::{validate_group_norm, GroupElement, NormedGroupSample, SampleEntry, TOL_ID};
use crate::matrix::{self, Matrix};
use crate::space::{convexity_slack, counterexample_space, HolonomicSpace, RadiusBracket};
use crate::spaceform::{
    build_fiber_space, fiber_distance, isoperimetric_residual, length_norm, length_norm_numeric,
    manifold_holonomy_radius,
};
use crate::transport::{
    angle_difference, gauss_bonnet_residual, holonomy_angle, sphere_latitude_transport,
    transport_rotation, GeodesicCircle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::{PI, TAU};

/// Knobs of the suite; the defaults match the documented budgets.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub pair_budget: usize,
    pub triple_budget: usize,
    pub n_angles: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 42, pair_budget: 10_000, triple_budget: 10_000, n_angles: 512 }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<serde_json::Value>,
}

/// Runs the checks in order, stopping after the first failure.
pub fn run_property_suite(config: &SuiteConfig) -> Vec<CheckResult> {
    let checks: Vec<(&'static str, Box<dyn Fn(&SuiteConfig) -> Result<String, Failure>>)> = vec![
        ("group-norm-axioms-rotation-grid", Box::new(check_rotation_grid_axioms)),
        ("operator-norm-metric", Box::new(check_operator_norm_metric)),
        ("left-invariant-distance", Box::new(check_left_invariance)),
        ("metric-axioms-fiber", Box::new(check_metric_axioms)),
        ("distance-dominated-by-euclidean", Box::new(check_distance_upper_bound)),
        ("norm-recovery-and-rays", Box::new(check_norm_recovery)),
        ("local-isometry-inside-radius", Box::new(check_local_isometry)),
        ("holonomy-radius-dual-route", Box::new(check_radius_dual_route)),
        ("radius-ordering-and-displacement", Box::new(check_radius_ordering)),
        ("trivial-group-infinite-radius", Box::new(check_trivial_infinite)),
        ("lipschitz-bound-on-sample", Box::new(check_lipschitz_bound)),
        ("convexity-sharpness", Box::new(check_convexity_sharpness)),
        ("radius-bracket-at-origin", Box::new(check_radius_bracket)),
        ("transport-triple-oracle", Box::new(check_transport_oracles)),
        ("curvature-residuals", Box::new(check_residuals)),
        ("length-norm-closed-vs-numeric", Box::new(check_length_norm_routes)),
        ("counterexample-radii", Box::new(check_counterexample_radii)),
        ("fiber-norm-boundedness", Box::new(check_boundedness)),
    ];
    let mut results = Vec::with_capacity(checks.len());
    for (name, check) in checks {
        match check(config) {
            Ok(detail) => {
                results.push(CheckResult { name, passed: true, detail, counterexample: None })
            }
            Err(failure) => {
                results.push(CheckResult {
                    name,
                    passed: false,
                    detail: failure.detail,
                    counterexample: Some(failure.counterexample),
                });
                break; // fail fast
            }
        }
    }
    results
}

struct Failure {
    detail: String,
    counterexample: serde_json::Value,
}

fn fail(detail: impl Into<String>, counterexample: serde_json::Value) -> Failure {
    Failure { detail: detail.into(), counterexample }
}

fn fiber(config: &SuiteConfig) -> HolonomicSpace {
    build_fiber_space(1.0, config.n_angles).expect("unit-curvature fiber space builds")
}

fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    vec![
        (rng.random::<f64>() - 0.5) * 2.0 * scale,
        (rng.random::<f64>() - 0.5) * 2.0 * scale,
    ]
}

fn check_rotation_grid_axioms(_: &SuiteConfig) -> Result<String, Failure> {
    let sample = crate::group::rotation_sample(50);
    let report = validate_group_norm(&sample, 1e-9);
    if !report.is_valid() {
        return Err(fail(
            format!("{} violations on the rotation grid", report.violations.len()),
            serde_json::to_value(&report).expect("report serializes"),
        ));
    }
    Ok(format!("101 rotations, {} closed pairs, 0 violations", report.checked_pairs))
}

fn check_operator_norm_metric(config: &SuiteConfig) -> Result<String, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let identity = Matrix::identity(2);
    for trial in 0..500 {
        let a = Matrix::rotation2(rng.random::<f64>() * TAU - PI);
        let b = Matrix::rotation2(rng.random::<f64>() * TAU - PI);
        let c = Matrix::rotation2(rng.random::<f64>() * TAU - PI);
        let ab = matrix::spectral_norm(&a.sub(&b));
        let ac = matrix::spectral_norm(&a.sub(&c));
        let cb = matrix::spectral_norm(&c.sub(&b));
        if ab > ac + cb + 1e-12 {
            return Err(fail(
                "triangle inequality failed for the operator-norm metric",
                json!({"trial": trial, "ab": ab, "ac": ac, "cb": cb}),
            ));
        }
        let from_id = matrix::spectral_norm(&identity.sub(&a));
        if from_id > 2.0 + 1e-12 {
            return Err(fail(
                "an isometry sits farther than 2 from the identity",
                json!({"trial": trial, "norm": from_id}),
            ));
        }
    }
    Ok("500 random isometry triples".into())
}

fn check_left_invariance(config: &SuiteConfig) -> Result<String, Failure> {
    let sample = crate::group::rotation_sample(12);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6c65_6674);
    let entries = sample.entries();
    for trial in 0..300 {
        let pick = |rng: &mut ChaCha8Rng| {
            entries[(rng.random::<f64>() * entries.len() as f64) as usize % entries.len()]
                .element
                .clone()
        };
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let d_ab = crate::group::left_invariant_distance(&sample, &a, &b)
            .expect("grid is closed under products");
        let d_ba = crate::group::left_invariant_distance(&sample, &b, &a).expect("closed");
        let d_shift =
            crate::group::left_invariant_distance(&sample, &c.compose(&a), &c.compose(&b))
                .expect("closed");
        if (d_ab - d_ba).abs() > 1e-10 || (d_ab - d_shift).abs() > 1e-10 {
            return Err(fail(
                "left-invariant distance is not symmetric/invariant",
                json!({"trial": trial, "d_ab": d_ab, "d_ba": d_ba, "d_shift": d_shift}),
            ));
        }
    }
    Ok("300 sampled triples".into())
}

fn check_metric_axioms(config: &SuiteConfig) -> Result<String, Failure> {
    let space = fiber(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x7472_6970);
    for trial in 0..config.triple_budget {
        let scale = if trial % 3 == 0 { 0.5 } else { 8.0 };
        let u = random_vec(&mut rng, scale);
        let v = random_vec(&mut rng, scale);
        let w = random_vec(&mut rng, scale);
        let duv = space.distance(&u, &v).expect("dims match");
        let dvu = space.distance(&v, &u).expect("dims match");
        let duw = space.distance(&u, &w).expect("dims match");
        let dvw = space.distance(&v, &w).expect("dims match");
        let duu = space.distance(&u, &u).expect("dims match");
        if duu.abs() > 1e-12 || (duv - dvu).abs() > 1e-10 || duw > duv + dvw + 1e-9 {
            return Err(fail(
                "metric axiom failed for the fiber distance",
                json!({"trial": trial, "u": u, "v": v, "w": w,
                       "duv": duv, "dvu": dvu, "duw": duw, "dvw": dvw, "duu": duu}),
            ));
        }
    }
    Ok(format!("{} random triples", config.triple_budget))
}

fn check_distance_upper_bound(config: &SuiteConfig) -> Result<String, Failure> {
    let space = fiber(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x7570);
    for trial in 0..2000 {
        let u = random_vec(&mut rng, 20.0);
        let v = random_vec(&mut rng, 20.0);
        let d = space.distance(&u, &v).expect("dims match");
        if d > matrix::distance(&u, &v) + 1e-12 {
            return Err(fail(
                "d_L exceeded the Euclidean distance",
                json!({"trial": trial, "u": u, "v": v, "d": d}),
            ));
        }
    }
    Ok("2000 random pairs".into())
}

fn check_norm_recovery(config: &SuiteConfig) -> Result<String, Failure> {
    let space = fiber(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6e6f_726d);
    for trial in 0..2000 {
        let v = random_vec(&mut rng, 50.0);
        let recovered = space.recover_norm(&v).expect("dims match");
        let expected = matrix::norm(&v);
        if (recovered - expected).abs() > 1e-12 * expected.max(1.0) {
            return Err(fail(
                "norm recovery drifted",
                json!({"trial": trial, "v": v, "recovered": recovered, "norm": expected}),
            ));
        }
    }
    // rays from the origin are geodesics: d_L(s e, t e) = |s - t|
    let e = [0.6, 0.8];
    for trial in 0..500 {
        let s = rng.random::<f64>() * 30.0;
        let t = rng.random::<f64>() * 30.0;
        let d = space
            .distance(&matrix::scale(&e, s), &matrix::scale(&e, t))
            .expect("dims match");
        if (d - (s - t).abs()).abs() > 1e-12 * (s - t).abs().max(1.0) {
            return Err(fail(
                "ray-geodesic identity failed",
                json!({"trial": trial, "s": s, "t": t, "d": d}),
            ));
        }
    }
    Ok("2000 recoveries + 500 ray pairs".into())
}

fn check_local_isometry(config: &SuiteConfig) -> Result<String, Failure> {
    let space = fiber(config);
    let rho = space
        .holonomy_radius_origin()
        .finite()
        .expect("fiber space is nontrivial");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6973_6f6d);
    for trial in 0..1000 {
        let mut u = random_vec(&mut rng, 1.0);
        let mut v = random_vec(&mut rng, 1.0);
        matrix::normalize(&mut u);
        matrix::normalize(&mut v);
        let u = matrix::scale(&u, rng.random::<f64>() * 0.99 * rho);
        let v = matrix::scale(&v, rng.random::<f64>() * 0.99 * rho);
        let d = space.distance(&u, &v).expect("dims match");
        let continuous = fiber_distance(1.0, &[u[0], u[1]], &[v[0], v[1]])
            .expect("positive curvature")
            .d;
        let euclid = matrix::distance(&u, &v);
        if (d - euclid).abs() > 1e-10 || (continuous - euclid).abs() > 1e-8 {
            return Err(fail(
                "d_L differs from the Euclidean distance inside the radius",
                json!({"trial": trial, "u": u, "v": v, "d": d,
                       "continuous": continuous, "euclid": euclid}),
            ));
        }
    }
    Ok("1000 pairs inside 0.99 rho_0, discrete and continuous routes".into())
}

fn check_radius_dual_route(config: &SuiteConfig) -> Result<String, Failure> {
    let closed = manifold_holonomy_radius(1.0).expect("nonflat").value;
    let discrete = fiber(config)
        .holonomy_radius_origin()
        .finite()
        .expect("nontrivial");
    // the discrete infimum converges to the continuum value from above
    let gap = discrete - closed;
    if !(-1e-12..=1e-2).contains(&gap) {
        return Err(fail(
            "fiber-space radius strayed from the closed-form minimization",
            json!({"closed_form": closed, "fiber": discrete, "gap": gap}),
        ));
    }
    Ok(format!("closed {closed:.6} vs fiber {discrete:.6}"))
}

fn check_radius_ordering(config: &SuiteConfig) -> Result<String, Failure> {
    let space = fiber(config);
    let sample = space.sample().expect("fiber space is discrete");
    let identity = Matrix::identity(2);
    for (i, e) in sample.entries().iter().enumerate() {
        if e.element.is_identity(TOL_ID) {
            continue;
        }
        let sigma = matrix::spectral_norm(&identity.sub(e.element.matrix()));
        let hol = e.l_value / (2.0 * sigma).sqrt();
        let cvx = e.l_value / sigma;
        if cvx < hol - 1e-12 {
            return Err(fail(
                "per-element convexity ratio dipped below the holonomy ratio",
                json!({"entry": i, "sigma": sigma, "hol": hol, "cvx": cvx}),
            ));
        }
    }
    // displacement bound inside the convexity radius: ||u - au|| <= L(a)
    let cvx = space.convexity_radius().finite().expect("nontrivial");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6476);
    for trial in 0..500 {
        let mut u = random_vec(&mut rng, 1.0);
        matrix::normalize(&mut u);
        let u = matrix::scale(&u, rng.random::<f64>() * cvx);
        for e in sample.entries() {
            let moved = e.element.apply(&u);
            if matrix::distance(&u, &moved) > e.l_value + 1e-9 {
                return Err(fail(
                    "displacement exceeded L inside the convexity radius",
                    json!({"trial": trial, "u": u, "l": e.l_value}),
                ));
            }
        }
    }
    Ok("per-element ordering + 500 displacement probes".into())
}

fn check_trivial_infinite(config: &SuiteConfig) -> Result<String, Failure> {
    let trivial = HolonomicSpace::trivial(2);
    if trivial.holonomy_radius_origin() != Extended::Infinite
        || trivial.convexity_radius() != Extended::Infinite
    {
        return Err(fail("trivial group must have infinite radii", json!({})));
    }
    let nontrivial = fiber(config);
    if !nontrivial.holonomy_radius_origin().is_finite() {
        return Err(fail("nontrivial group must have a finite radius", json!({})));
    }
    Ok("both directions".into())
}

fn check_lipschitz_bound(config: &SuiteConfig) -> Result<String, Failure> {
    let space = fiber(config);
    let entries = space.sample().expect("discrete").entries().to_vec();
    for (i, a) in entries.iter().enumerate() {
        for (j, b) in entries.iter().enumerate() {
            let gap = space
                .lipschitz_gap(&a.element, &b.element)
                .expect("products stay on the grid");
            if gap < -1e-9 {
                return Err(fail(
                    "Lipschitz bound violated",
                    json!({"a": i, "b": j, "gap": gap}),
                ));
            }
        }
    }
    Ok(format!("{} ordered pairs", entries.len() * entries.len()))
}

fn check_convexity_sharpness(config: &SuiteConfig) -> Result<String, Failure> {
    let space = fiber(config);
    let rho = space.holonomy_radius_origin().finite().expect("nontrivial");
    let origin = [0.0, 0.0];
    if let Some(violation) = space
        .check_convexity(&origin, 0.99 * rho, config.pair_budget, config.seed)
        .expect("valid arguments")
    {
        return Err(fail(
            "violation found strictly inside the holonomy radius",
            serde_json::to_value(&violation).expect("violation serializes"),
        ));
    }
    let violation = space
        .check_convexity(&origin, 1.2 * rho, config.pair_budget, config.seed)
        .expect("valid arguments");
    match violation {
        None => Err(fail("no violation found beyond the holonomy radius", json!({}))),
        Some(v) => {
            let direct = convexity_slack(&v.v, &v.w, v.element.matrix(), v.l_value);
            if direct <= 0.0 {
                return Err(fail(
                    "reported violation does not reproduce",
                    serde_json::to_value(&v).expect("violation serializes"),
                ));
            }
            Ok(format!("clean at 0.99 rho, slack {:.3e} at 1.2 rho", v.slack))
        }
    }
}

fn check_radius_bracket(config: &SuiteConfig) -> Result<String, Failure> {
    let space = build_fiber_space(1.0, 128).expect("fiber space builds");
    let rho = space.holonomy_radius_origin().finite().expect("nontrivial");
    let budget = (config.pair_budget / 5).max(500);
    let tol = 1e-3;
    match space
        .holonomy_radius_at(&[0.0, 0.0], tol, budget, config.seed)
        .expect("valid arguments")
    {
        RadiusBracket::Unbounded => Err(fail("bracket must be bounded", json!({}))),
        RadiusBracket::Bracketed { lo, hi } => {
            if lo - tol > rho || rho > hi + tol {
                return Err(fail(
                    "closed-form radius escaped the bracket",
                    json!({"lo": lo, "hi": hi, "rho": rho}),
                ));
            }
            // 1-Lipschitz midpoints under a small displacement
            let delta = 0.05 * rho;
            match space
                .holonomy_radius_at(&[delta, 0.0], tol, budget, config.seed)
                .expect("valid arguments")
            {
                RadiusBracket::Unbounded => Err(fail("shifted bracket must be bounded", json!({}))),
                RadiusBracket::Bracketed { lo: lo2, hi: hi2 } => {
                    let drift = (0.5 * (lo + hi) - 0.5 * (lo2 + hi2)).abs();
                    if drift > delta + 2.0 * tol {
                        return Err(fail(
                            "midpoints moved faster than 1-Lipschitz",
                            json!({"drift": drift, "delta": delta}),
                        ));
                    }
                    Ok(format!("bracket [{lo:.4}, {hi:.4}] contains {rho:.4}"))
                }
            }
        }
    }
}

fn check_transport_oracles(_: &SuiteConfig) -> Result<String, Failure> {
    for &r in &[PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0] {
        let circle = GeodesicCircle::new(1.0, r).expect("inside chart");
        let spec = circle.loop_spec();
        let ode = transport_rotation(&spec, 1024).expect("valid loop");
        let gb = holonomy_angle(&spec, 1024).expect("valid loop");
        let extrinsic = sphere_latitude_transport(r, 4096).expect("not a pole");
        let closed = circle.holonomy_angle_closed();
        let worst = [
            angle_difference(ode.rotation, gb).abs(),
            angle_difference(gb, extrinsic).abs(),
            angle_difference(extrinsic, closed).abs(),
            ode.frame_norm_error,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if worst > 1e-6 {
            return Err(fail(
                "transport oracles disagree",
                json!({"r": r, "ode": ode.rotation, "gauss_bonnet": gb,
                       "extrinsic": extrinsic, "closed": closed, "worst": worst}),
            ));
        }
    }
    Ok("four radii, three oracles within 1e-6".into())
}

fn check_residuals(_: &SuiteConfig) -> Result<String, Failure> {
    for &(k, r) in &[
        (1.0, PI / 3.0),
        (1.0, 0.2),
        (4.0, 0.5),
        (-1.0, 1.5f64.acosh()),
        (-0.25, 2.0),
    ] {
        let circle = GeodesicCircle::new(k, r).expect("valid circle");
        let iso = isoperimetric_residual(k, r).expect("valid circle");
        let ell2 = circle.circumference().powi(2);
        let gb = gauss_bonnet_residual(&circle);
        if iso.abs() > 1e-9 * ell2.max(1.0) || gb.abs() > 1e-9 {
            return Err(fail(
                "curvature residual did not vanish",
                json!({"k": k, "r": r, "isoperimetric": iso, "gauss_bonnet": gb}),
            ));
        }
    }
    Ok("isoperimetric and angle-defect residuals vanish".into())
}

fn check_length_norm_routes(_: &SuiteConfig) -> Result<String, Failure> {
    let mut worst = 0.0f64;
    for &k in &[1.0, -1.0, 4.0, -0.25] {
        for i in 0..99 {
            let theta = -PI + TAU * i as f64 / 98.0;
            let closed = length_norm(k, theta).expect("theta in domain");
            let numeric = length_norm_numeric(k, theta, 1024).expect("theta in domain");
            let err = (closed - numeric.length).abs();
            worst = worst.max(err);
            if err > 1e-8 || !numeric.complete {
                return Err(fail(
                    "closed form and circle-family oracle disagree",
                    json!({"k": k, "theta": theta,
                           "closed": closed, "numeric": numeric.length, "err": err}),
                ));
            }
        }
    }
    Ok(format!("4 curvatures x 99 angles, worst gap {worst:.2e}"))
}

fn check_counterexample_radii(_: &SuiteConfig) -> Result<String, Failure> {
    let space = counterexample_space(1e-6, 100.0).expect("valid range");
    let cvx = space.convexity_radius().finite().expect("finite");
    let hol = space.holonomy_radius_origin().finite().expect("finite");
    if !(0.70710..=0.70720).contains(&cvx) {
        return Err(fail(
            "convexity radius strayed from 1/sqrt(2)",
            json!({"cvx": cvx}),
        ));
    }
    let family = space.family().expect("family-backed");
    let a = family.element_at(1e-4).expect("orthogonal");
    let sigma = matrix::spectral_norm(&Matrix::identity(4).sub(a.matrix()));
    let ratio = family.l_at(1e-4) / (2.0 * sigma).sqrt();
    if hol >= ratio || ratio >= 0.006 {
        return Err(fail(
            "holonomy ratio does not shrink toward zero",
            json!({"hol": hol, "ratio_at_1e-4": ratio}),
        ));
    }
    Ok(format!("cvx {cvx:.6}, hol-ratio(1e-4) {ratio:.3e}"))
}

fn check_boundedness(config: &SuiteConfig) -> Result<String, Failure> {
    let space = fiber(config);
    let max_l = space
        .sample()
        .expect("discrete")
        .entries()
        .iter()
        .map(|e| e.l_value)
        .fold(0.0, f64::max);
    let expected = PI * 3.0f64.sqrt();
    if (max_l - expected).abs() > 1e-10 {
        return Err(fail(
            "norm maximum drifted from pi sqrt(3)",
            json!({"max_l": max_l, "expected": expected}),
        ));
    }
    Ok(format!("max L = {max_l:.12}"))
}

/// Builds a small defective sample; used to exercise the failure path in
/// tests and demos.
pub fn defective_sample() -> NormedGroupSample {
    NormedGroupSample::new(
        2,
        vec![
            SampleEntry { element: GroupElement::identity(2), l_value: 0.0 },
            SampleEntry { element: GroupElement::rotation2(1.0), l_value: 0.0 },
            SampleEntry { element: GroupElement::rotation2(-1.0), l_value: 0.0 },
        ],
    )
    .expect("structurally valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_with_reduced_budgets() {
        let config = SuiteConfig { seed: 7, pair_budget: 600, triple_budget: 400, n_angles: 64 };
        let results = run_property_suite(&config);
        for r in &results {
            assert!(r.passed, "{} failed: {}", r.name, r.detail);
        }
        assert_eq!(results.len(), 18);
    }

    #[test]
    fn defective_sample_fails_validation() {
        let report = validate_group_norm(&defective_sample(), 1e-9);
        assert!(!report.is_valid());
    }
}
