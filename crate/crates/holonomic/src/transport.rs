//! Parallel transport along loops on surfaces.
//!
//! Three mutually independent routes to the holonomy of a loop:
//!
//! * intrinsic: integrate the frame equations a' = k b, b' = -k a with
//!   fixed-step classical RK4 and read the rotation off the final frame;
//! * closed form: the holonomy angle is 2 pi minus the integral of the
//!   geodesic curvature (composite Simpson quadrature);
//! * extrinsic (unit sphere only): transport an ambient vector along a
//!   latitude circle, projecting out the normal drift each step.
//!
//! Orientation convention: the frame {gamma', J(gamma')} is right-handed,
//! angles are reduced to (-pi, pi] with the boundary mapped to +pi, and for
//! circles J points toward the enclosed center, so their geodesic curvature
//! is positive.

use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("integration needs at least 16 steps, got {0}")]
    TooFewSteps(usize),
    #[error("curvature sample at t = {0} is not finite")]
    NonFiniteCurvature(f64),
    #[error("loop length must be positive and finite")]
    InvalidLength,
    #[error("geodesic circles on the sphere require sqrt(K) r < pi (got sqrt(K) r = {0})")]
    OutOfChart(f64),
    #[error("curvature K and radius r must be finite, K nonzero, r positive")]
    InvalidCircle,
    #[error("latitude transport needs a polar angle strictly between 0 and pi")]
    DegenerateLoop,
}

/// Reduce an angle to (-pi, pi], boundary mapped to +pi.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Signed circular difference of two angles, in (-pi, pi].
pub fn angle_difference(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// A closed curve on a surface, described intrinsically by its arc length
/// and signed geodesic curvature.
#[derive(Clone)]
pub struct LoopSpec {
    length: f64,
    curvature: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for LoopSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LoopSpec").field("length", &self.length).finish()
    }
}

impl LoopSpec {
    pub fn new(
        length: f64,
        curvature: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self, TransportError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(TransportError::InvalidLength);
        }
        Ok(LoopSpec { length, curvature })
    }

    pub fn constant(k: f64, length: f64) -> Result<Self, TransportError> {
        Self::new(length, Arc::new(move |_| k))
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn curvature_at(&self, t: f64) -> f64 {
        (self.curvature)(t)
    }

    /// The same loop traversed backwards: the signed curvature flips and the
    /// parametrization reverses, so the holonomy angle negates (mod 2 pi).
    pub fn reversed(&self) -> LoopSpec {
        let len = self.length;
        let k = Arc::clone(&self.curvature);
        LoopSpec { length: len, curvature: Arc::new(move |t| -k(len - t)) }
    }
}

/// Coefficients of a parallel field in the frame {gamma', J(gamma')};
/// a^2 + b^2 is conserved by exact transport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameState {
    pub a: f64,
    pub b: f64,
}

/// Result of intrinsic transport around a loop.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransportResult {
    /// Rotation angle of the frame map, reduced to (-pi, pi].
    pub rotation: f64,
    /// Raw curvature integral over the loop (composite Simpson, unreduced).
    pub curvature_integral: f64,
    /// |a^2 + b^2 - 1| after transport; integrator drift diagnostic.
    pub frame_norm_error: f64,
    /// Final frame coefficients.
    pub frame: FrameState,
}

/// Integrates the frame equations a' = k b, b' = -k a around the loop with
/// classical RK4 at uniform step, starting from (1, 0). The rotation angle
/// and the quadrature of -k agree to fourth order in the step.
pub fn transport_rotation(spec: &LoopSpec, steps: usize) -> Result<TransportResult, TransportError> {
    if steps < 16 {
        return Err(TransportError::TooFewSteps(steps));
    }
    let h = spec.length / steps as f64;
    let sample = |t: f64| -> Result<f64, TransportError> {
        let k = spec.curvature_at(t);
        if !k.is_finite() {
            return Err(TransportError::NonFiniteCurvature(t));
        }
        Ok(k)
    };
    let mut a = 1.0f64;
    let mut b = 0.0f64;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = sample(t)?;
        let k2 = sample(t + 0.5 * h)?;
        let k4 = sample(t + h)?;
        // derivative at (a, b) for curvature k: (k b, -k a)
        let (da1, db1) = (k1 * b, -k1 * a);
        let (a2, b2) = (a + 0.5 * h * da1, b + 0.5 * h * db1);
        let (da2, db2) = (k2 * b2, -k2 * a2);
        let (a3, b3) = (a + 0.5 * h * da2, b + 0.5 * h * db2);
        let (da3, db3) = (k2 * b3, -k2 * a3);
        let (a4, b4) = (a + h * da3, b + h * db3);
        let (da4, db4) = (k4 * b4, -k4 * a4);
        a += h * (da1 + 2.0 * da2 + 2.0 * da3 + da4) / 6.0;
        b += h * (db1 + 2.0 * db2 + 2.0 * db3 + db4) / 6.0;
    }
    let curvature_integral = simpson_curvature(spec, steps)?;
    Ok(TransportResult {
        rotation: wrap_angle(b.atan2(a)),
        curvature_integral,
        frame_norm_error: (a * a + b * b - 1.0).abs(),
        frame: FrameState { a, b },
    })
}

/// Composite Simpson quadrature of the loop's curvature.
fn simpson_curvature(spec: &LoopSpec, steps: usize) -> Result<f64, TransportError> {
    let m = steps + steps % 2; // even interval count
    let h = spec.length / m as f64;
    let mut total = 0.0;
    for i in 0..=m {
        let t = if i == m { spec.length } else { i as f64 * h };
        let k = spec.curvature_at(t);
        if !k.is_finite() {
            return Err(TransportError::NonFiniteCurvature(t));
        }
        let weight = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        total += weight * k;
    }
    Ok(total * h / 3.0)
}

/// Holonomy angle of the loop: (2 pi - integral of k) reduced to (-pi, pi].
pub fn holonomy_angle(spec: &LoopSpec, steps: usize) -> Result<f64, TransportError> {
    if steps < 16 {
        return Err(TransportError::TooFewSteps(steps));
    }
    Ok(wrap_angle(TAU - simpson_curvature(spec, steps)?))
}

/// Metric circle of geodesic radius `r` in the complete simply connected
/// surface of constant curvature `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicCircle {
    k: f64,
    r: f64,
}

impl GeodesicCircle {
    pub fn new(k: f64, r: f64) -> Result<Self, TransportError> {
        if !(k.is_finite() && k != 0.0 && r.is_finite() && r > 0.0) {
            return Err(TransportError::InvalidCircle);
        }
        if k > 0.0 {
            let x = k.sqrt() * r;
            if x >= PI {
                return Err(TransportError::OutOfChart(x));
            }
        }
        Ok(GeodesicCircle { k, r })
    }

    pub fn curvature_constant(&self) -> f64 {
        self.k
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    /// Circumference: 2 pi sin(sqrt(K) r)/sqrt(K) for K > 0, the sinh
    /// analogue for K < 0.
    pub fn circumference(&self) -> f64 {
        let s = self.k.abs().sqrt();
        if self.k > 0.0 {
            TAU * (s * self.r).sin() / s
        } else {
            TAU * (s * self.r).sinh() / s
        }
    }

    /// Geodesic curvature: sqrt(K) cot(sqrt(K) r), or the coth analogue.
    pub fn geodesic_curvature(&self) -> f64 {
        let s = self.k.abs().sqrt();
        if self.k > 0.0 {
            s / (s * self.r).tan()
        } else {
            s / (s * self.r).tanh()
        }
    }

    /// Enclosed area: 2 pi (1 - cos(sqrt(K) r))/K, or the cosh analogue.
    pub fn area(&self) -> f64 {
        let s = self.k.abs().sqrt();
        if self.k > 0.0 {
            TAU * (1.0 - (s * self.r).cos()) / self.k
        } else {
            TAU * ((s * self.r).cosh() - 1.0) / self.k.abs()
        }
    }

    /// The circle as an intrinsic loop (constant geodesic curvature).
    pub fn loop_spec(&self) -> LoopSpec {
        LoopSpec::constant(self.geodesic_curvature(), self.circumference())
            .expect("circle circumference is positive inside the chart")
    }

    /// Closed-form holonomy angle K * A, reduced to (-pi, pi].
    pub fn holonomy_angle_closed(&self) -> f64 {
        wrap_angle(self.k * self.area())
    }
}

/// (2 pi - integral of k) - K A; identically zero in exact arithmetic.
pub fn gauss_bonnet_residual(circle: &GeodesicCircle) -> f64 {
    let total_curvature = circle.circumference() * circle.geodesic_curvature();
    (TAU - total_curvature) - circle.k * circle.area()
}

/// Extrinsic transport on the unit sphere embedded in 3-space: integrates
/// P' = -<P, gamma'> gamma along the latitude circle at polar angle `alpha`
/// (geodesic radius alpha from the pole), projecting tangency drift after
/// each step. Independent cross-check for the intrinsic routes.
pub fn sphere_latitude_transport(alpha: f64, steps: usize) -> Result<f64, TransportError> {
    if steps < 16 {
        return Err(TransportError::TooFewSteps(steps));
    }
    if !(alpha.is_finite() && alpha > 1e-9 && alpha < PI - 1e-9) {
        return Err(TransportError::DegenerateLoop);
    }
    let sin_a = alpha.sin();
    let cos_a = alpha.cos();
    let length = TAU * sin_a;
    // unit-speed eastward latitude; phi is the azimuth
    let position = |t: f64| {
        let phi = t / sin_a;
        [sin_a * phi.cos(), sin_a * phi.sin(), cos_a]
    };
    let velocity = |t: f64| {
        let phi = t / sin_a;
        [-phi.sin(), phi.cos(), 0.0]
    };
    let derivative = |t: f64, p: &[f64; 3]| {
        let gamma = position(t);
        let gdot = velocity(t);
        let coeff = -(p[0] * gdot[0] + p[1] * gdot[1] + p[2] * gdot[2]);
        [coeff * gamma[0], coeff * gamma[1], coeff * gamma[2]]
    };

    let h = length / steps as f64;
    let mut p = velocity(0.0); // start from the tangent direction
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = derivative(t, &p);
        let mut q = [0.0; 3];
        for j in 0..3 {
            q[j] = p[j] + 0.5 * h * k1[j];
        }
        let k2 = derivative(t + 0.5 * h, &q);
        for j in 0..3 {
            q[j] = p[j] + 0.5 * h * k2[j];
        }
        let k3 = derivative(t + 0.5 * h, &q);
        for j in 0..3 {
            q[j] = p[j] + h * k3[j];
        }
        let k4 = derivative(t + h, &q);
        for j in 0..3 {
            p[j] += h * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0;
        }
        // project out normal drift and renormalize
        let gamma = position(t + h);
        let radial = p[0] * gamma[0] + p[1] * gamma[1] + p[2] * gamma[2];
        for j in 0..3 {
            p[j] -= radial * gamma[j];
        }
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        for j in 0..3 {
            p[j] /= norm;
        }
    }

    // angle of the transported vector in the right-handed start basis
    // {gamma'(0), gamma(0) x gamma'(0)}
    let e1 = velocity(0.0);
    let g0 = position(0.0);
    let e2 = [
        g0[1] * e1[2] - g0[2] * e1[1],
        g0[2] * e1[0] - g0[0] * e1[2],
        g0[0] * e1[1] - g0[1] * e1[0],
    ];
    let x = p[0] * e1[0] + p[1] * e1[1] + p[2] * e1[2];
    let y = p[0] * e2[0] + p[1] * e2[1] + p[2] * e2[2];
    Ok(wrap_angle(y.atan2(x)))
}
