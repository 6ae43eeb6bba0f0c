//! Length norms and holonomy radii for the nonflat constant-curvature
//! surfaces, and the induced fiber holonomic space.
//!
//! On the surface of curvature K != 0 the holonomy element of a loop is the
//! rotation by K times the enclosed area, and isoperimetric equality for
//! metric circles pins the shortest loop realizing a given rotation. That
//! yields the closed form
//!
//!   L(theta) = sqrt(4 pi |theta| -+ theta^2) / sqrt(|K|),   |theta| <= pi,
//!
//! with the sign opposite to the curvature. The independent numeric route
//! recovers the same value by root-finding the circle radius whose holonomy
//! matches theta (over both orientations and all angle wrappings in reach)
//! and taking the shortest circumference.

use crate::group::{GroupElement, SampleEntry};
use crate::matrix::Matrix;
use crate::search::{self, cmp_by_value_then_abs_x, Minimum};
use crate::space::{HolonomicSpace, SpaceError, SEARCH_REL_TOL};
use crate::transport::{GeodesicCircle, TransportError};
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceFormError {
    #[error("space forms require nonzero finite curvature")]
    FlatCurvature,
    #[error("angle {0} is outside the norm domain [-pi, pi]")]
    AngleOutOfDomain(f64),
    #[error("grid must have at least 256 points, got {0}")]
    GridTooCoarse(usize),
    #[error("fiber spaces need at least 8 angles, got {0}")]
    TooFewAngles(usize),
    #[error("fiber spaces are built for K > 0 only (compact holonomy)")]
    NegativeCurvatureFiber,
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A nonflat space form, identified by its curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceForm {
    k: f64,
}

impl SpaceForm {
    pub fn new(k: f64) -> Result<Self, SpaceFormError> {
        if !(k.is_finite() && k != 0.0) {
            return Err(SpaceFormError::FlatCurvature);
        }
        Ok(SpaceForm { k })
    }

    pub fn curvature(&self) -> f64 {
        self.k
    }
}

/// The length norm on rotation angles theta in [-pi, pi] for a space form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleNorm {
    form: SpaceForm,
}

impl AngleNorm {
    pub fn new(k: f64) -> Result<Self, SpaceFormError> {
        Ok(AngleNorm { form: SpaceForm::new(k)? })
    }

    /// sqrt(4 pi |theta| - theta^2)/sqrt(K) for K > 0,
    /// sqrt(4 pi |theta| + theta^2)/sqrt(|K|) for K < 0.
    pub fn eval(&self, theta: f64) -> Result<f64, SpaceFormError> {
        if !theta.is_finite() || theta.abs() > PI + 1e-12 {
            return Err(SpaceFormError::AngleOutOfDomain(theta));
        }
        let t = theta.abs().min(PI);
        let k = self.form.k;
        let radicand = if k > 0.0 { 4.0 * PI * t - t * t } else { 4.0 * PI * t + t * t };
        Ok((radicand / k.abs()).sqrt())
    }
}

/// Closed-form length norm; see [`AngleNorm::eval`].
pub fn length_norm(k: f64, theta: f64) -> Result<f64, SpaceFormError> {
    AngleNorm::new(k)?.eval(theta)
}

/// Result of the circle-family minimization.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NumericNorm {
    pub length: f64,
    /// Geodesic radius of the shortest attaining circle (0 for theta = 0).
    pub attaining_radius: f64,
    /// False when some wrapping representative could not be attained by a
    /// circle in the chart; the value is then an infimum over the rest.
    pub complete: bool,
}

/// Independent oracle for [`length_norm`]: minimizes the circumference over
/// geodesic circles whose holonomy angle matches `theta`, considering both
/// orientations and angle wrapping. `grid` controls root isolation.
pub fn length_norm_numeric(
    k: f64,
    theta: f64,
    grid: usize,
) -> Result<NumericNorm, SpaceFormError> {
    let form = SpaceForm::new(k)?;
    if !theta.is_finite() || theta.abs() > PI + 1e-12 {
        return Err(SpaceFormError::AngleOutOfDomain(theta));
    }
    if grid < 256 {
        return Err(SpaceFormError::GridTooCoarse(grid));
    }
    let target = theta.abs().min(PI);
    if target == 0.0 {
        return Ok(NumericNorm { length: 0.0, attaining_radius: 0.0, complete: true });
    }
    let s = form.k.abs().sqrt();

    // Raw (unwrapped, unsigned) rotation magnitudes that reduce to the
    // target under wrapping and orientation reversal.
    let representatives = [target, TAU - target, TAU + target, 2.0 * TAU - target];

    let mut best: Option<(f64, f64)> = None;
    let mut complete = true;
    for &raw in &representatives {
        // raw rotation magnitude of the circle with scaled radius x:
        //   K > 0: 2 pi (1 - cos x), x in (0, pi)
        //   K < 0: 2 pi (cosh x - 1), x in (0, inf)
        let (f, x_hi): (Box<dyn Fn(f64) -> f64>, f64) = if form.k > 0.0 {
            (Box::new(|x: f64| TAU * (1.0 - x.cos())), PI)
        } else {
            // raw <= 4 pi here, so cosh x <= 3 covers every representative
            (Box::new(|x: f64| TAU * (x.cosh() - 1.0)), 3.0f64.acosh() + 0.5)
        };
        if form.k < 0.0 && raw > TAU * ((x_hi).cosh() - 1.0) {
            complete = false;
            continue;
        }
        match bisect_increasing(&f, raw, 0.0, x_hi, grid) {
            None => complete = false,
            Some(x) => {
                let circumference = if form.k > 0.0 {
                    TAU * x.sin() / s
                } else {
                    TAU * x.sinh() / s
                };
                // near-ties (e.g. theta = pi, attained at both pi/3 and
                // 2 pi/3 on the sphere) break toward the smaller radius
                let improves = best.map_or(true, |(len, r)| {
                    circumference < len - 1e-9 * len.max(1.0)
                        || ((circumference - len).abs() <= 1e-9 * len.max(1.0) && x / s < r)
                });
                if improves {
                    best = Some((circumference, x / s));
                }
            }
        }
    }

    let (length, attaining_radius) = best.expect("at least one representative is attainable");
    Ok(NumericNorm { length, attaining_radius, complete })
}

/// Root of f(x) = target on [lo, hi] for increasing f: grid isolation then
/// bisection to near machine precision.
fn bisect_increasing(
    f: &dyn Fn(f64) -> f64,
    target: f64,
    lo: f64,
    hi: f64,
    grid: usize,
) -> Option<f64> {
    let step = (hi - lo) / grid as f64;
    let mut bracket = None;
    for i in 0..grid {
        let a = lo + i as f64 * step;
        let b = if i + 1 == grid { hi } else { a + step };
        if f(a) - target <= 0.0 && f(b) - target >= 0.0 {
            bracket = Some((a, b));
            break;
        }
    }
    let (mut a, mut b) = bracket?;
    for _ in 0..90 {
        let mid = 0.5 * (a + b);
        if f(mid) - target <= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    Some(0.5 * (a + b))
}

/// ell^2 - (4 pi A - K A^2) for the circle; identically zero in exact
/// arithmetic (circles achieve isoperimetric equality).
pub fn isoperimetric_residual(k: f64, r: f64) -> Result<f64, SpaceFormError> {
    let circle = GeodesicCircle::new(k, r)?;
    let ell = circle.circumference();
    let area = circle.area();
    Ok(ell * ell - (4.0 * PI * area - k * area * area))
}

/// Holonomy radius of a space form with the attaining angle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadiusEstimate {
    pub value: f64,
    pub theta_star: f64,
}

/// Grid resolution of [`manifold_holonomy_radius`].
pub const RADIUS_GRID: usize = 100_000;

/// Holonomy radius of the space form of curvature K at any point:
/// the infimum over theta in (0, pi] of
/// sqrt((4 pi theta -+ theta^2) / (4 |K| sin(theta/2))), using
/// ||id - R_theta|| = 2 sin(theta/2). Grid of 1e5 points plus golden-section,
/// punctured at 0 where the ratio is a 0/0 limit.
pub fn manifold_holonomy_radius(k: f64) -> Result<RadiusEstimate, SpaceFormError> {
    let form = SpaceForm::new(k)?;
    let objective = |theta: f64| {
        let radicand = if form.k > 0.0 {
            4.0 * PI * theta - theta * theta
        } else {
            4.0 * PI * theta + theta * theta
        };
        (radicand / (form.k.abs() * 4.0 * (0.5 * theta).sin())).sqrt()
    };
    let Minimum { x, value } = search::grid_then_golden(
        objective,
        1e-12,
        PI,
        RADIUS_GRID,
        SEARCH_REL_TOL,
        cmp_by_value_then_abs_x,
    )
    .expect("objective is finite on the punctured range");
    Ok(RadiusEstimate { value, theta_star: x })
}

/// Discrete fiber holonomic space of the sphere of curvature K > 0:
/// rotations on a uniform angle grid of [-pi, pi] normed by the closed-form
/// length norm. The angle count is rounded up to odd so the grid contains
/// 0 and +-pi exactly and is closed under composition with wrapping.
pub fn build_fiber_space(k: f64, n_angles: usize) -> Result<HolonomicSpace, SpaceFormError> {
    if !(k.is_finite() && k > 0.0) {
        return Err(SpaceFormError::NegativeCurvatureFiber);
    }
    if n_angles < 8 {
        return Err(SpaceFormError::TooFewAngles(n_angles));
    }
    let norm = AngleNorm::new(k)?;
    let half = n_angles / 2; // 2*half + 1 >= n_angles points
    let entries = (-(half as i64)..=half as i64)
        .map(|j| {
            let theta = PI * j as f64 / half as f64;
            Ok(SampleEntry {
                element: GroupElement::with_label(
                    Matrix::rotation2(theta),
                    format!("R({theta:.6})"),
                )
                .expect("rotations are orthogonal"),
                l_value: norm.eval(theta)?,
            })
        })
        .collect::<Result<Vec<_>, SpaceFormError>>()?;
    let sample = crate::group::NormedGroupSample::new(2, entries)
        .expect("fiber sample is structurally valid");
    Ok(HolonomicSpace::from_sample(sample)?)
}

/// Fiber distance report; serializes with the attaining angle.
#[derive(Debug, Clone, Serialize)]
pub struct FiberDistance {
    pub k: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub d: f64,
    pub theta_star: f64,
}

/// Grid resolution of [`fiber_distance`].
pub const FIBER_DISTANCE_GRID: usize = 4097;

/// Distance in the fiber over a point of the sphere of curvature K > 0:
/// minimizes sqrt(L(theta)^2 + ||R_theta u - v||^2) over theta in [-pi, pi]
/// by grid scan plus golden-section, ties broken toward smaller |theta|.
/// Inside the holonomy radius this equals the Euclidean distance.
pub fn fiber_distance(k: f64, u: &[f64; 2], v: &[f64; 2]) -> Result<FiberDistance, SpaceFormError> {
    if !(k.is_finite() && k > 0.0) {
        return Err(SpaceFormError::NegativeCurvatureFiber);
    }
    let norm = AngleNorm::new(k)?;
    let objective = |theta: f64| {
        let l = norm.eval(theta.clamp(-PI, PI)).expect("theta stays in domain");
        let (s, c) = theta.sin_cos();
        let moved = [c * u[0] - s * u[1], s * u[0] + c * u[1]];
        let dx = moved[0] - v[0];
        let dy = moved[1] - v[1];
        (l * l + dx * dx + dy * dy).sqrt()
    };
    let Minimum { x, value } = search::grid_then_golden(
        objective,
        -PI,
        PI,
        FIBER_DISTANCE_GRID,
        SEARCH_REL_TOL,
        cmp_by_value_then_abs_x,
    )
    .expect("objective is finite on [-pi, pi]");
    Ok(FiberDistance { k, u: u.to_vec(), v: v.to_vec(), d: value, theta_star: x })
}
