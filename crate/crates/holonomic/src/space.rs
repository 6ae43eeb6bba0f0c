//! Holonomic spaces: a normed vector space together with a group of linear
//! isometries carrying a group-norm, and the modified metric
//!
//!   d_L(u, v) = inf over a of sqrt(L(a)^2 + ||u - a v||^2).
//!
//! The group is either a finite `NormedGroupSample` or a `OneParamFamily`
//! (a curve of isometries, searched by grid scan plus golden-section
//! refinement). Closed-form radii:
//!
//!   convexity radius        = inf L(a) / ||id - a||
//!   holonomy radius at 0    = inf L(a) / sqrt(2 ||id - a||)
//!
//! with the infimum over non-identity elements and +infinity for the trivial
//! group. Away from the origin the holonomy radius has no closed form and is
//! bracketed by bisection over a sampled convexity check.

use crate::extended::Extended;
use crate::group::{
    operator_norm, validate_group_norm, GroupElement, GroupError, NormedGroupSample, SampleEntry,
    ValidationReport, TOL_ID,
};
use crate::matrix::{self, Matrix};
use crate::search::{self, cmp_by_value_then_x, Minimum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::f64::consts::SQRT_2;
use std::sync::Arc;
use thiserror::Error;

/// Default parameter-grid resolution for one-parameter-family searches.
pub const DEFAULT_FAMILY_GRID: usize = 4096;
/// Relative tolerance of golden-section refinement.
pub const SEARCH_REL_TOL: f64 = 1e-10;
/// Families are never evaluated closer to the identity parameter than this.
pub const MIN_PUNCTURE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("expected vectors of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("group-norm validation failed with {} violation(s)", .0.violations.len())]
    InvalidGroupNorm(ValidationReport),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("parameter range must satisfy 0 < t_min < t_max with both finite")]
    InvalidRange,
    #[error("radius and tolerance arguments must be positive and finite")]
    InvalidRadius,
    #[error("pair budget must be at least 1")]
    InvalidBudget,
    #[error("family element map must send 0 to the identity and L(0) to 0")]
    InvalidFamily,
    #[error("holonomy radius at the origin is infinite (trivial group)")]
    InfiniteHolonomyRadius,
    #[error(
        "holonomy radius at the origin vanishes at the search boundary; \
         the Lipschitz bound is vacuous"
    )]
    ZeroHolonomyRadius,
    #[error("unknown family id {0:?}")]
    UnknownFamily(String),
}

/// One-parameter curve of isometries t -> element(t) with norm values L(t),
/// on the symmetric range [-t_max, t_max]; element(0) is the identity and
/// L is even. Searches exclude the puncture |t| < t_min where the ratio
/// formulas degenerate to 0/0.
#[derive(Clone)]
pub struct OneParamFamily {
    dimension: usize,
    t_max: f64,
    puncture: f64,
    eval_grid: usize,
    element_fn: Arc<dyn Fn(f64) -> Matrix + Send + Sync>,
    l_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    tag: Option<FamilyTag>,
}

impl std::fmt::Debug for OneParamFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OneParamFamily")
            .field("dimension", &self.dimension)
            .field("t_max", &self.t_max)
            .field("puncture", &self.puncture)
            .field("eval_grid", &self.eval_grid)
            .field("tag", &self.tag)
            .finish()
    }
}

/// Serializable name of a builder-defined family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTag {
    pub family: String,
    pub t_min: f64,
    pub t_max: f64,
}

impl OneParamFamily {
    pub fn new(
        dimension: usize,
        t_max: f64,
        puncture: f64,
        eval_grid: usize,
        element_fn: Arc<dyn Fn(f64) -> Matrix + Send + Sync>,
        l_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self, SpaceError> {
        if !(t_max.is_finite() && t_max > 0.0 && puncture > 0.0 && puncture < t_max) {
            return Err(SpaceError::InvalidRange);
        }
        let family = OneParamFamily {
            dimension,
            t_max,
            puncture: puncture.max(MIN_PUNCTURE),
            eval_grid: eval_grid.max(8),
            element_fn,
            l_fn,
            tag: None,
        };
        // spot-check the family invariants
        let at_zero = (family.element_fn)(0.0);
        if at_zero.dim() != dimension
            || at_zero.max_abs_diff(&Matrix::identity(dimension)) > TOL_ID
            || (family.l_fn)(0.0).abs() > 1e-12
        {
            return Err(SpaceError::InvalidFamily);
        }
        for k in 1..=4 {
            let t = t_max * k as f64 / 4.0;
            if ((family.l_fn)(t) - (family.l_fn)(-t)).abs() > 1e-9 * (1.0 + (family.l_fn)(t)) {
                return Err(SpaceError::InvalidFamily);
            }
            GroupElement::new((family.element_fn)(t))?;
        }
        Ok(family)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn puncture(&self) -> f64 {
        self.puncture
    }

    pub fn tag(&self) -> Option<&FamilyTag> {
        self.tag.as_ref()
    }

    pub fn element_at(&self, t: f64) -> Result<GroupElement, GroupError> {
        GroupElement::new((self.element_fn)(t))
    }

    pub fn l_at(&self, t: f64) -> f64 {
        (self.l_fn)(t)
    }

    fn raw_element(&self, t: f64) -> Matrix {
        (self.element_fn)(t)
    }

    /// Odd, symmetric grid over [-t_max, t_max]; always contains 0.
    fn grid_params(&self, count: usize) -> Vec<f64> {
        let half = (count.max(3) - 1) / 2;
        (-(half as i64)..=half as i64)
            .map(|j| self.t_max * j as f64 / half as f64)
            .collect()
    }

    /// Discretization into a finite sample, used for validation and for
    /// element sweeps.
    pub fn discretize(&self, count: usize) -> Result<NormedGroupSample, GroupError> {
        let entries = self
            .grid_params(count)
            .into_iter()
            .map(|t| {
                Ok(SampleEntry {
                    element: GroupElement::with_label(self.raw_element(t), format!("t={t}"))?,
                    l_value: self.l_at(t),
                })
            })
            .collect::<Result<Vec<_>, GroupError>>()?;
        NormedGroupSample::new(self.dimension, entries)
    }
}

/// The group carried by a holonomic space.
#[derive(Debug, Clone)]
pub enum GroupModel {
    Sample(NormedGroupSample),
    Family(OneParamFamily),
}

/// A witnessed failure of the local convexity inequality
/// ||v - w||^2 - ||v - a w||^2 <= L(a)^2.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityViolation {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub element: GroupElement,
    pub l_value: f64,
    pub slack: f64,
}

/// Outcome of bracketing the holonomy radius at a point.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusBracket {
    /// No violation exists (trivial group) or none was found at the budget.
    Unbounded,
    /// `lo` passed the sampled check, `hi` carries a witnessed violation.
    Bracketed { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy)]
struct RadiusSearch {
    value: Extended,
    at_puncture: bool,
}

fn hol_ratio(l: f64, sigma: f64) -> f64 {
    l / (2.0 * sigma).sqrt()
}

fn cvx_ratio(l: f64, sigma: f64) -> f64 {
    l / sigma
}

/// The desk-scale triplet (V, H, L) with the Euclidean norm on V.
#[derive(Debug, Clone)]
pub struct HolonomicSpace {
    dimension: usize,
    group: GroupModel,
}

impl HolonomicSpace {
    /// Builds from a finite sample; the group-norm axioms must validate.
    pub fn from_sample(sample: NormedGroupSample) -> Result<Self, SpaceError> {
        let report = validate_group_norm(&sample, 1e-9);
        if !report.is_valid() {
            return Err(SpaceError::InvalidGroupNorm(report));
        }
        Ok(HolonomicSpace { dimension: sample.dimension(), group: GroupModel::Sample(sample) })
    }

    /// Builds from a one-parameter family; a 65-point discretization must
    /// validate.
    pub fn from_family(family: OneParamFamily) -> Result<Self, SpaceError> {
        let sample = family.discretize(65)?;
        let report = validate_group_norm(&sample, 1e-9);
        if !report.is_valid() {
            return Err(SpaceError::InvalidGroupNorm(report));
        }
        Ok(HolonomicSpace { dimension: family.dimension(), group: GroupModel::Family(family) })
    }

    /// The space whose group is just the identity; d_L is the original norm.
    pub fn trivial(dimension: usize) -> Self {
        HolonomicSpace {
            dimension,
            group: GroupModel::Sample(NormedGroupSample::trivial(dimension)),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn sample(&self) -> Option<&NormedGroupSample> {
        match &self.group {
            GroupModel::Sample(s) => Some(s),
            GroupModel::Family(_) => None,
        }
    }

    pub fn family(&self) -> Option<&OneParamFamily> {
        match &self.group {
            GroupModel::Family(f) => Some(f),
            GroupModel::Sample(_) => None,
        }
    }

    fn check_dims(&self, v: &[f64]) -> Result<(), SpaceError> {
        if v.len() != self.dimension {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dimension,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// The modified distance d_L(u, v). Never exceeds ||u - v|| (identity
    /// witness).
    pub fn distance(&self, u: &[f64], v: &[f64]) -> Result<f64, SpaceError> {
        self.check_dims(u)?;
        self.check_dims(v)?;
        Ok(match &self.group {
            GroupModel::Sample(sample) => sample
                .entries()
                .iter()
                .map(|e| {
                    let moved = e.element.apply(v);
                    (e.l_value * e.l_value + matrix::dot(&matrix::sub(u, &moved), &matrix::sub(u, &moved))).sqrt()
                })
                .fold(f64::INFINITY, f64::min),
            GroupModel::Family(family) => {
                let objective = |t: f64| {
                    let l = family.l_at(t);
                    let moved = family.raw_element(t).matvec(v);
                    let diff = matrix::sub(u, &moved);
                    (l * l + matrix::dot(&diff, &diff)).sqrt()
                };
                let grid = family.eval_grid | 1;
                search::grid_then_golden(
                    objective,
                    -family.t_max,
                    family.t_max,
                    grid,
                    SEARCH_REL_TOL,
                    cmp_by_value_then_x,
                )
                .map(|m| m.value)
                .unwrap_or(f64::INFINITY)
            }
        })
    }

    /// d_L(v, 0); equal to ||v|| because every witness pays at least ||v||.
    pub fn recover_norm(&self, v: &[f64]) -> Result<f64, SpaceError> {
        let origin = vec![0.0; self.dimension];
        self.distance(v, &origin)
    }

    fn radius_search(&self, ratio: fn(f64, f64) -> f64) -> RadiusSearch {
        match &self.group {
            GroupModel::Sample(sample) => {
                let identity = Matrix::identity(self.dimension);
                let mut best: Option<f64> = None;
                for e in sample.entries() {
                    if e.element.is_identity(TOL_ID) {
                        continue;
                    }
                    let sigma = matrix::spectral_norm(&identity.sub(e.element.matrix()));
                    let r = ratio(e.l_value, sigma);
                    if best.map_or(true, |b| r < b) {
                        best = Some(r);
                    }
                }
                match best {
                    None => RadiusSearch { value: Extended::Infinite, at_puncture: false },
                    Some(r) => RadiusSearch { value: Extended::Finite(r), at_puncture: false },
                }
            }
            GroupModel::Family(family) => {
                let identity = Matrix::identity(self.dimension);
                let objective = |t: f64| {
                    let a = family.raw_element(t);
                    if a.max_abs_diff(&identity) <= TOL_ID {
                        return f64::NAN; // skipped by the grid scan
                    }
                    ratio(family.l_at(t), matrix::spectral_norm(&identity.sub(&a)))
                };
                let half_grid = (family.eval_grid / 2).max(16);
                let positive = search::grid_then_golden(
                    &objective,
                    family.puncture,
                    family.t_max,
                    half_grid,
                    SEARCH_REL_TOL,
                    cmp_by_value_then_x,
                );
                let negative = search::grid_then_golden(
                    &objective,
                    -family.t_max,
                    -family.puncture,
                    half_grid,
                    SEARCH_REL_TOL,
                    cmp_by_value_then_x,
                );
                let best = match (positive, negative) {
                    (Some(p), Some(n)) => Some(if cmp_by_value_then_x(&p, &n) == Ordering::Greater { n } else { p }),
                    (p, n) => p.or(n),
                };
                match best {
                    None => RadiusSearch { value: Extended::Infinite, at_puncture: false },
                    Some(Minimum { x, value }) => {
                        let cell = (family.t_max - family.puncture) / (half_grid - 1) as f64;
                        RadiusSearch {
                            value: Extended::Finite(value),
                            at_puncture: x.abs() <= family.puncture + 2.0 * cell,
                        }
                    }
                }
            }
        }
    }

    /// Holonomy radius at the origin: inf L(a) / sqrt(2 ||id - a||) over
    /// non-identity elements; infinite for the trivial group. For families
    /// this is a grid infimum over the punctured parameter range.
    pub fn holonomy_radius_origin(&self) -> Extended {
        self.radius_search(hol_ratio).value
    }

    /// Convexity radius: inf L(a) / ||id - a||, same search strategy.
    pub fn convexity_radius(&self) -> Extended {
        self.radius_search(cvx_ratio).value
    }

    /// Group elements as (matrix, L) pairs; families are discretized on
    /// their evaluation grid.
    fn element_list(&self) -> Vec<(Matrix, f64)> {
        match &self.group {
            GroupModel::Sample(sample) => sample
                .entries()
                .iter()
                .map(|e| (e.element.matrix().clone(), e.l_value))
                .collect(),
            GroupModel::Family(family) => family
                .grid_params(family.eval_grid | 1)
                .into_iter()
                .map(|t| (family.raw_element(t), family.l_at(t)))
                .collect(),
        }
    }

    /// Elements most likely to violate convexity first: smallest values of
    /// the two radius ratios.
    fn adversarial_elements(&self, count: usize) -> Vec<(Matrix, f64)> {
        let identity = Matrix::identity(self.dimension);
        let elements = self.element_list();
        let mut scored: Vec<(usize, f64, f64)> = elements
            .iter()
            .enumerate()
            .filter_map(|(i, (m, l))| {
                if m.max_abs_diff(&identity) <= TOL_ID {
                    return None;
                }
                let sigma = matrix::spectral_norm(&identity.sub(m));
                Some((i, hol_ratio(*l, sigma), cvx_ratio(*l, sigma)))
            })
            .collect();
        let mut picked = Vec::new();
        scored.sort_by(|a, b| a.1.total_cmp(&b.1));
        picked.extend(scored.iter().take(count).map(|s| s.0));
        scored.sort_by(|a, b| a.2.total_cmp(&b.2));
        picked.extend(scored.iter().take(count).map(|s| s.0));
        picked.sort_unstable();
        picked.dedup();
        picked.into_iter().map(|i| elements[i].clone()).collect()
    }

    /// Searches for a violation of the convexity inequality on the open ball
    /// of radius `r` around `u`.
    ///
    /// Tests `pair_budget` random pairs (uniform in the ball, deterministic
    /// from `seed`) plus deterministic extremal pairs built from the worst
    /// group elements by alternating maximization of the bilinear slack.
    /// Returns the violation with maximal slack, ties broken by candidate
    /// order.
    pub fn check_convexity(
        &self,
        u: &[f64],
        r: f64,
        pair_budget: usize,
        seed: u64,
    ) -> Result<Option<ConvexityViolation>, SpaceError> {
        self.check_dims(u)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(SpaceError::InvalidRadius);
        }
        if pair_budget == 0 {
            return Err(SpaceError::InvalidBudget);
        }

        let elements = self.element_list();
        let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(pair_budget + 64);
        for (m, _) in self.adversarial_elements(3) {
            pairs.extend(extremal_pairs(u, r, &m));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..pair_budget {
            let v = sample_in_ball(&mut rng, u, r);
            let w = sample_in_ball(&mut rng, u, r);
            pairs.push((v, w));
        }

        let best = pairs
            .par_iter()
            .enumerate()
            .filter_map(|(pair_idx, (v, w))| {
                let mut local: Option<(f64, usize)> = None;
                for (elem_idx, (m, l)) in elements.iter().enumerate() {
                    let slack = convexity_slack(v, w, m, *l);
                    if slack > 0.0 && local.map_or(true, |(s, _)| slack > s) {
                        local = Some((slack, elem_idx));
                    }
                }
                local.map(|(slack, elem_idx)| (slack, pair_idx, elem_idx))
            })
            .reduce_with(|a, b| {
                // max slack; ties to the earlier candidate
                match a.0.total_cmp(&b.0) {
                    Ordering::Less => b,
                    Ordering::Greater => a,
                    Ordering::Equal => {
                        if (a.1, a.2) <= (b.1, b.2) {
                            a
                        } else {
                            b
                        }
                    }
                }
            });

        Ok(best.map(|(slack, pair_idx, elem_idx)| {
            let (m, l) = &elements[elem_idx];
            ConvexityViolation {
                v: pairs[pair_idx].0.clone(),
                w: pairs[pair_idx].1.clone(),
                element: GroupElement::new(m.clone()).expect("group elements are orthogonal"),
                l_value: *l,
                slack,
            }
        }))
    }

    /// Brackets the holonomy radius at `u` by bisection on the sampled
    /// convexity check. The returned interval has width at most
    /// `bracket_tol`; the lower end passed the check at the given budget and
    /// the upper end carries a witnessed violation.
    pub fn holonomy_radius_at(
        &self,
        u: &[f64],
        bracket_tol: f64,
        pair_budget: usize,
        seed: u64,
    ) -> Result<RadiusBracket, SpaceError> {
        self.check_dims(u)?;
        if !(bracket_tol > 0.0 && bracket_tol.is_finite()) {
            return Err(SpaceError::InvalidRadius);
        }
        let origin_radius = match self.holonomy_radius_origin() {
            Extended::Infinite => return Ok(RadiusBracket::Unbounded),
            Extended::Finite(r) => r,
        };
        // 1-Lipschitz continuity bounds the radius at u by rho_0 + ||u||;
        // start above that and expand until a violation is witnessed.
        let mut hi = (origin_radius + 2.0 * matrix::norm(u)).max(bracket_tol) * (1.0 + 1e-6);
        let mut witnessed = false;
        for _ in 0..64 {
            if self.check_convexity(u, hi, pair_budget, seed)?.is_some() {
                witnessed = true;
                break;
            }
            hi *= 1.25;
        }
        if !witnessed {
            return Ok(RadiusBracket::Unbounded);
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            if hi - lo <= bracket_tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.check_convexity(u, mid, pair_budget, seed)?.is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(RadiusBracket::Bracketed { lo, hi })
    }

    /// Slack of the Lipschitz bound sqrt(2 ||a - b||) <= L(a^-1 b) / rho_0:
    /// returns L(a^-1 b) / rho_0 - sqrt(2 ||a - b||), which is >= 0 up to
    /// numerical noise whenever the bound applies.
    pub fn lipschitz_gap(&self, a: &GroupElement, b: &GroupElement) -> Result<f64, SpaceError> {
        if a.dim() != self.dimension || b.dim() != self.dimension {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dimension,
                got: a.dim().max(b.dim()),
            });
        }
        let radius = self.radius_search(hol_ratio);
        let rho0 = match radius.value {
            Extended::Infinite => return Err(SpaceError::InfiniteHolonomyRadius),
            Extended::Finite(r) => r,
        };
        // A grid minimum sitting on the puncture boundary means the true
        // infimum is a parameter limit the grid cannot certify (possibly 0).
        if radius.at_puncture || rho0 <= 0.0 {
            return Err(SpaceError::ZeroHolonomyRadius);
        }
        let product = a.inverse().compose(b);
        let (l, resolved) = self.resolve_element(product.matrix())?;
        // ||a - b|| = ||id - a^-1 b|| by isometry invariance; evaluating on
        // the resolved element keeps L and the norm on the same element
        // instead of amplifying matching noise through the square root.
        let sigma = operator_norm(&Matrix::identity(self.dimension).sub(&resolved))?;
        Ok(l / rho0 - (2.0 * sigma).sqrt())
    }

    /// Canonical (L, matrix) of a given group element, by sample lookup or
    /// by parameter search in the family.
    fn resolve_element(&self, m: &Matrix) -> Result<(f64, Matrix), SpaceError> {
        match &self.group {
            GroupModel::Sample(sample) => {
                let idx = sample.find(m, TOL_ID).ok_or(GroupError::ElementNotInSample)?;
                let entry = &sample.entries()[idx];
                Ok((entry.l_value, entry.element.matrix().clone()))
            }
            GroupModel::Family(family) => {
                let objective = |t: f64| {
                    let a = family.raw_element(t);
                    let mut s = 0.0;
                    for (x, y) in a.entries().iter().zip(m.entries()) {
                        s += (x - y) * (x - y);
                    }
                    s
                };
                let found = search::grid_then_golden(
                    objective,
                    -family.t_max,
                    family.t_max,
                    family.eval_grid | 1,
                    SEARCH_REL_TOL,
                    cmp_by_value_then_x,
                )
                .ok_or(GroupError::ElementNotInSample)?;
                let resolved = family.raw_element(found.x);
                if resolved.max_abs_diff(m) > TOL_ID {
                    return Err(GroupError::ElementNotInSample.into());
                }
                Ok((family.l_at(found.x), resolved))
            }
        }
    }
}

/// Direct evaluation of the convexity inequality defect
/// ||v - w||^2 - ||v - a w||^2 - L(a)^2.
pub fn convexity_slack(v: &[f64], w: &[f64], a: &Matrix, l: f64) -> f64 {
    let straight = matrix::sub(v, w);
    let moved = matrix::sub(v, &a.matvec(w));
    matrix::dot(&straight, &straight) - matrix::dot(&moved, &moved) - l * l
}

/// Uniform sample from the open ball of radius `r` around `center`:
/// Gaussian direction (Box-Muller) scaled by r * U^(1/n).
fn sample_in_ball(rng: &mut ChaCha8Rng, center: &[f64], r: f64) -> Vec<f64> {
    let n = center.len();
    let mut dir = Vec::with_capacity(n + 1);
    while dir.len() < n {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let mag = (-2.0 * u1.max(1e-300).ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        dir.push(mag * c);
        dir.push(mag * s);
    }
    dir.truncate(n);
    match matrix::unit(&dir) {
        Some(d) => dir = d,
        None => {
            dir = vec![0.0; n];
            dir[0] = 1.0;
        }
    }
    let radius = r * rng.random::<f64>().powf(1.0 / n as f64);
    matrix::add(center, &matrix::scale(&dir, radius))
}

/// Deterministic near-extremal candidate pairs for one group element:
/// alternating maximization of <v, (a - id) w> over the closed ball of
/// radius r(1 - 1e-9), which reproduces the worst-case construction used to
/// prove the origin radius formula when u = 0.
fn extremal_pairs(u: &[f64], r: f64, a: &Matrix) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = a.dim();
    let rho = r * (1.0 - 1e-9);
    let d = a.sub(&Matrix::identity(n));
    let dt = d.transpose();
    let Some(top) = top_singular_direction(&d) else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(6);
    for sign in [1.0, -1.0] {
        let mut y = matrix::scale(&top, sign * rho);
        let mut x = y.clone();
        for _ in 0..4 {
            let Some(dx) = matrix::unit(&d.matvec(&matrix::add(u, &y))) else { break };
            x = matrix::scale(&dx, rho);
            let Some(dy) = matrix::unit(&dt.matvec(&matrix::add(u, &x))) else { break };
            y = matrix::scale(&dy, rho);
        }
        out.push((matrix::add(u, &x), matrix::add(u, &y)));
        // antipodal boundary pair along the top direction
        out.push((
            matrix::add(u, &matrix::scale(&top, sign * rho)),
            matrix::add(u, &matrix::scale(&top, -sign * rho)),
        ));
    }
    out
}

/// Top right-singular direction of `m` (power iteration on m^T m).
fn top_singular_direction(m: &Matrix) -> Option<Vec<f64>> {
    let n = m.dim();
    let b = m.transpose().mul(m);
    for start in 0..=n {
        let mut v = vec![0.0; n];
        if start == 0 {
            v.iter_mut().for_each(|x| *x = 1.0);
        } else {
            v[start - 1] = 1.0;
        }
        matrix::normalize(&mut v);
        let mut alive = true;
        for _ in 0..50 {
            let w = b.matvec(&v);
            if matrix::norm(&w) < 1e-300 {
                alive = false;
                break;
            }
            v = w;
            matrix::normalize(&mut v);
        }
        if alive && matrix::norm(&b.matvec(&v)) > 1e-300 {
            return Some(v);
        }
    }
    None
}

/// The standard separating example: block rotations on R^4 with
/// incommensurate frequencies 1 and sqrt(2), normed by L(t) = |t|.
///
/// Its convexity radius is 1/sqrt(2) while the holonomy radius at the origin
/// vanishes in the t -> 0 limit; radius searches report grid minima over the
/// punctured range [t_min, t_max].
pub fn counterexample_space(t_min: f64, t_max: f64) -> Result<HolonomicSpace, SpaceError> {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(SpaceError::InvalidRange);
    }
    let mut family = OneParamFamily::new(
        4,
        t_max,
        t_min,
        DEFAULT_FAMILY_GRID,
        Arc::new(|t| Matrix::block_diag(&[Matrix::rotation2(t), Matrix::rotation2(SQRT_2 * t)])),
        Arc::new(|t: f64| t.abs()),
    )?;
    family.tag = Some(FamilyTag { family: "counterexample".into(), t_min, t_max });
    HolonomicSpace::from_family(family)
}

// --- serialization: discrete spaces embed the sample, families are named ---

impl Serialize for HolonomicSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.group {
            GroupModel::Sample(sample) => sample.serialize(serializer),
            GroupModel::Family(family) => match &family.tag {
                Some(tag) => tag.serialize(serializer),
                None => Err(serde::ser::Error::custom(
                    "only builder-tagged families are serializable",
                )),
            },
        }
    }
}

impl<'de> Deserialize<'de> for HolonomicSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Family(FamilyTag),
            Discrete(NormedGroupSample),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Family(tag) => {
                if tag.family != "counterexample" {
                    return Err(D::Error::custom(format!("unknown family {:?}", tag.family)));
                }
                counterexample_space(tag.t_min, tag.t_max).map_err(D::Error::custom)
            }
            Repr::Discrete(sample) => HolonomicSpace::from_sample(sample).map_err(D::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn small_rotation_space() -> HolonomicSpace {
        HolonomicSpace::from_sample(crate::group::rotation_sample(8)).unwrap()
    }

    #[test]
    fn trivial_group_distance_is_euclidean() {
        let space = HolonomicSpace::trivial(3);
        let u = [1.0, -2.0, 0.5];
        let v = [0.3, 4.0, -1.0];
        assert_eq!(
            space.distance(&u, &v).unwrap(),
            matrix::distance(&u, &v),
        );
    }

    #[test]
    fn norm_recovery_is_exact() {
        let space = small_rotation_space();
        for v in [[3.0, 4.0], [0.0, 0.0], [1e6, -2.0]] {
            assert_eq!(space.recover_norm(&v).unwrap(), matrix::norm(&v));
        }
    }

    #[test]
    fn distance_never_exceeds_euclidean() {
        let space = small_rotation_space();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u = [rng.random::<f64>() * 8.0 - 4.0, rng.random::<f64>() * 8.0 - 4.0];
            let v = [rng.random::<f64>() * 8.0 - 4.0, rng.random::<f64>() * 8.0 - 4.0];
            let d = space.distance(&u, &v).unwrap();
            assert!(d <= matrix::distance(&u, &v) + 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let space = small_rotation_space();
        assert!(matches!(
            space.distance(&[1.0, 2.0, 3.0], &[0.0, 0.0]),
            Err(SpaceError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trivial_group_radii_are_infinite() {
        let space = HolonomicSpace::trivial(2);
        assert_eq!(space.holonomy_radius_origin(), Extended::Infinite);
        assert_eq!(space.convexity_radius(), Extended::Infinite);
        assert!(matches!(
            space.holonomy_radius_at(&[0.0, 0.0], 1e-3, 10, 1).unwrap(),
            RadiusBracket::Unbounded
        ));
    }

    #[test]
    fn rotation_space_radii_match_direct_minimum() {
        // L(theta) = |theta| over 17 rotations: radii are element-wise minima
        let space = small_rotation_space();
        let mut hol = f64::INFINITY;
        let mut cvx = f64::INFINITY;
        for e in space.sample().unwrap().entries() {
            if e.element.is_identity(TOL_ID) {
                continue;
            }
            let sigma =
                matrix::spectral_norm(&Matrix::identity(2).sub(e.element.matrix()));
            hol = hol.min(e.l_value / (2.0 * sigma).sqrt());
            cvx = cvx.min(e.l_value / sigma);
        }
        assert_relative_eq!(
            space.holonomy_radius_origin().finite().unwrap(),
            hol,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            space.convexity_radius().finite().unwrap(),
            cvx,
            max_relative = 1e-14
        );
    }

    #[test]
    fn counterexample_family_shape() {
        let space = counterexample_space(1e-6, 10.0).unwrap();
        let family = space.family().unwrap();
        // element(0) = identity with L(0) = 0
        assert!(family.element_at(0.0).unwrap().is_identity(1e-15));
        assert_eq!(family.l_at(0.0), 0.0);
        // element(2pi) is not the identity: the second block is R(2 sqrt2 pi)
        let a = family.element_at(2.0 * PI).unwrap();
        assert!(!a.is_identity(1e-3));
        let sigma = operator_norm(&Matrix::identity(4).sub(a.matrix())).unwrap();
        assert_relative_eq!(sigma, 2.0 * (SQRT_2 * PI).sin().abs(), max_relative = 1e-9);
    }

    #[test]
    fn counterexample_rejects_bad_range() {
        assert!(matches!(counterexample_space(0.0, 1.0), Err(SpaceError::InvalidRange)));
        assert!(matches!(counterexample_space(2.0, 1.0), Err(SpaceError::InvalidRange)));
    }

    #[test]
    fn counterexample_convexity_radius_near_inv_sqrt2() {
        let space = counterexample_space(1e-6, 10.0).unwrap();
        let cvx = space.convexity_radius().finite().unwrap();
        assert!((0.70710..0.70720).contains(&cvx), "got {cvx}");
        // the holonomy ratio at the same scale is already far smaller
        let hol = space.holonomy_radius_origin().finite().unwrap();
        assert!(hol < 6e-4, "got {hol}");
    }

    #[test]
    fn convexity_check_trivial_space_finds_nothing() {
        let space = HolonomicSpace::trivial(2);
        let found = space.check_convexity(&[0.0, 0.0], 50.0, 500, 3).unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn convexity_check_is_sharp_at_origin_radius() {
        let space = small_rotation_space();
        let rho = space.holonomy_radius_origin().finite().unwrap();
        let inside = space
            .check_convexity(&[0.0, 0.0], 0.99 * rho, 2000, 11)
            .unwrap();
        assert!(inside.is_none(), "violation inside the certified ball: {inside:?}");
        let outside = space
            .check_convexity(&[0.0, 0.0], 1.2 * rho, 2000, 11)
            .unwrap();
        let violation = outside.expect("violation must be found beyond the radius");
        assert!(violation.slack > 0.0);
        // the witnessed pair really violates the inequality
        let direct = convexity_slack(
            &violation.v,
            &violation.w,
            violation.element.matrix(),
            violation.l_value,
        );
        assert_relative_eq!(direct, violation.slack, max_relative = 1e-12);
    }

    #[test]
    fn radius_bracket_contains_closed_form_at_origin() {
        let space = small_rotation_space();
        let rho = space.holonomy_radius_origin().finite().unwrap();
        match space.holonomy_radius_at(&[0.0, 0.0], 1e-3, 2000, 5).unwrap() {
            RadiusBracket::Bracketed { lo, hi } => {
                assert!(hi - lo <= 1e-3 + 1e-12);
                assert!(lo - 1e-3 <= rho && rho <= hi + 1e-3, "rho={rho} not in [{lo}, {hi}]");
            }
            RadiusBracket::Unbounded => panic!("nontrivial space must bracket"),
        }
    }

    #[test]
    fn lipschitz_gap_zero_for_equal_elements() {
        let space = small_rotation_space();
        let a = GroupElement::rotation2(PI / 4.0);
        let gap = space.lipschitz_gap(&a, &a).unwrap();
        assert_relative_eq!(gap, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lipschitz_gap_nonnegative_on_sample_pairs() {
        let space = small_rotation_space();
        let entries = space.sample().unwrap().entries().to_vec();
        for a in &entries {
            for b in &entries {
                let gap = space.lipschitz_gap(&a.element, &b.element).unwrap();
                assert!(gap >= -1e-9, "gap {gap} for {:?} {:?}", a.element.label(), b.element.label());
            }
        }
    }

    #[test]
    fn lipschitz_gap_flags_vanishing_radius() {
        let space = counterexample_space(1e-6, 10.0).unwrap();
        let family = space.family().unwrap();
        let a = family.element_at(0.0).unwrap();
        let b = family.element_at(1.0).unwrap();
        assert!(matches!(
            space.lipschitz_gap(&a, &b),
            Err(SpaceError::ZeroHolonomyRadius)
        ));
    }

    #[test]
    fn lipschitz_gap_infinite_radius_for_trivial_group() {
        let space = HolonomicSpace::trivial(2);
        let id = GroupElement::identity(2);
        assert!(matches!(
            space.lipschitz_gap(&id, &id),
            Err(SpaceError::InfiniteHolonomyRadius)
        ));
    }

    #[test]
    fn family_space_serializes_by_tag() {
        let space = counterexample_space(1e-4, 5.0).unwrap();
        let json = serde_json::to_value(&space).unwrap();
        assert_eq!(json["family"], "counterexample");
        assert_eq!(json["t_max"], 5.0);
        let back: HolonomicSpace = serde_json::from_value(json).unwrap();
        assert!(back.family().is_some());
        assert_eq!(back.dimension(), 4);
    }

    #[test]
    fn discrete_space_serializes_as_sample() {
        let space = small_rotation_space();
        let json = serde_json::to_value(&space).unwrap();
        assert!(json["entries"].is_array());
        let back: HolonomicSpace = serde_json::from_value(json).unwrap();
        assert_eq!(back.dimension(), 2);
        assert!(back.sample().is_some());
    }

    #[test]
    fn ball_sampler_is_deterministic_and_inside() {
        let mut rng1 = ChaCha8Rng::seed_from_u64(99);
        let mut rng2 = ChaCha8Rng::seed_from_u64(99);
        let center = [1.0, 2.0, 3.0];
        for _ in 0..100 {
            let a = sample_in_ball(&mut rng1, &center, 2.0);
            let b = sample_in_ball(&mut rng2, &center, 2.0);
            assert_eq!(a, b);
            assert!(matrix::distance(&a, &center) < 2.0);
        }
    }
}
