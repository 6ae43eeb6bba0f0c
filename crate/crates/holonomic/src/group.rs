//! Orthogonal group elements, finite norm samples, and group-norm axiom
//! validation.
//!
//! A `NormedGroupSample` is a finite stand-in for a normed isometry group
//! (H, L): a list of orthogonal matrices, each paired with a nonnegative
//! norm value. A finite sample of an infinite group cannot certify the
//! subadditivity axiom globally, so validation checks it only on pairs whose
//! product lands back in the sample and counts the rest as unchecked rather
//! than reporting false violations.

use crate::matrix::{self, Matrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Max-entry tolerance for matching two group elements.
pub const TOL_ID: f64 = 1e-9;
/// Max-entry tolerance for the orthogonality defect of a group element.
pub const TOL_ORTHO: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("matrix entries must be finite")]
    NonFiniteInput,
    #[error("matrix is not orthogonal: max |A^T A - I| = {defect:.3e} exceeds {TOL_ORTHO:.0e}")]
    NotOrthogonal { defect: f64 },
    #[error("element does not preserve the Euclidean norm (relative error {error:.3e})")]
    NotNormPreserving { error: f64 },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sample must be nonempty")]
    EmptySample,
    #[error("no sample element matches the requested product within {TOL_ID:.0e}")]
    ElementNotInSample,
    #[error("composition function must satisfy f(0) = 0, got f(0) = {0}")]
    FunctionNotVanishingAtZero(f64),
    #[error("composition function is not nondecreasing on the sampled values: f({lo}) = {f_lo} > f({hi}) = {f_hi}")]
    FunctionNotMonotone { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
}

/// A norm-preserving linear isometry, stored as an orthogonal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawElement", into = "RawElement")]
pub struct GroupElement {
    matrix: Matrix,
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawElement {
    matrix: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl From<GroupElement> for RawElement {
    fn from(e: GroupElement) -> RawElement {
        RawElement { matrix: e.matrix, label: e.label }
    }
}

impl TryFrom<RawElement> for GroupElement {
    type Error = GroupError;
    fn try_from(raw: RawElement) -> Result<Self, GroupError> {
        let mut e = GroupElement::new(raw.matrix)?;
        e.label = raw.label;
        Ok(e)
    }
}

impl GroupElement {
    /// Validates finiteness, orthogonality, and norm preservation on a fixed
    /// set of probe vectors (basis vectors plus the all-ones direction).
    pub fn new(matrix: Matrix) -> Result<Self, GroupError> {
        if !matrix.is_finite() {
            return Err(GroupError::NonFiniteInput);
        }
        let defect = matrix.orthogonality_defect();
        if defect > TOL_ORTHO {
            return Err(GroupError::NotOrthogonal { defect });
        }
        let n = matrix.dim();
        let mut probes: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        probes.push(vec![1.0; n]);
        for v in &probes {
            let image = matrix.matvec(v);
            let vn = matrix::norm(v);
            let error = (matrix::norm(&image) - vn).abs() / vn;
            if error > 1e-10 {
                return Err(GroupError::NotNormPreserving { error });
            }
        }
        Ok(GroupElement { matrix, label: None })
    }

    pub fn with_label(matrix: Matrix, label: impl Into<String>) -> Result<Self, GroupError> {
        let mut e = Self::new(matrix)?;
        e.label = Some(label.into());
        Ok(e)
    }

    pub fn identity(n: usize) -> Self {
        GroupElement { matrix: Matrix::identity(n), label: Some("id".into()) }
    }

    pub fn rotation2(theta: f64) -> Self {
        GroupElement {
            matrix: Matrix::rotation2(theta),
            label: Some(format!("R({theta})")),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Group inverse; the transpose, since elements are orthogonal.
    pub fn inverse(&self) -> GroupElement {
        GroupElement { matrix: self.matrix.transpose(), label: None }
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement { matrix: self.matrix.mul(&other.matrix), label: None }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.matrix.max_abs_diff(&Matrix::identity(self.dim())) <= tol
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.matvec(v)
    }
}

/// Operator norm (largest singular value) induced by the Euclidean norm.
pub fn operator_norm(m: &Matrix) -> Result<f64, GroupError> {
    if !m.is_finite() {
        return Err(GroupError::NonFiniteInput);
    }
    Ok(matrix::spectral_norm(m))
}

/// One (element, norm value) pair of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEntry {
    pub element: GroupElement,
    pub l_value: f64,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    matrix: Matrix,
    #[serde(rename = "L")]
    l_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSample {
    dimension: usize,
    entries: Vec<RawEntry>,
}

/// Finite list of group elements with norm values; a discrete (H, L).
///
/// Construction checks structure only (dimensions, finiteness); the
/// group-norm axioms themselves are checked by [`validate_group_norm`], which
/// reports findings instead of failing, so that defective samples can be
/// built and diagnosed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample", into = "RawSample")]
pub struct NormedGroupSample {
    dimension: usize,
    entries: Vec<SampleEntry>,
    contains_identity: bool,
    // (first matrix entry, index) pairs sorted by key, for tolerance lookups
    sorted_by_key: Vec<(f64, u32)>,
}

impl From<NormedGroupSample> for RawSample {
    fn from(s: NormedGroupSample) -> RawSample {
        RawSample {
            dimension: s.dimension,
            entries: s
                .entries
                .into_iter()
                .map(|e| RawEntry {
                    matrix: e.element.matrix,
                    l_value: e.l_value,
                    label: e.element.label,
                })
                .collect(),
        }
    }
}

impl TryFrom<RawSample> for NormedGroupSample {
    type Error = GroupError;
    fn try_from(raw: RawSample) -> Result<Self, GroupError> {
        let entries = raw
            .entries
            .into_iter()
            .map(|e| {
                let element = match e.label {
                    Some(label) => GroupElement::with_label(e.matrix, label),
                    None => GroupElement::new(e.matrix),
                }?;
                Ok(SampleEntry { element, l_value: e.l_value })
            })
            .collect::<Result<Vec<_>, GroupError>>()?;
        NormedGroupSample::new(raw.dimension, entries)
    }
}

impl NormedGroupSample {
    pub fn new(dimension: usize, entries: Vec<SampleEntry>) -> Result<Self, GroupError> {
        if entries.is_empty() {
            return Err(GroupError::EmptySample);
        }
        for e in &entries {
            if e.element.dim() != dimension {
                return Err(GroupError::DimensionMismatch {
                    expected: dimension,
                    got: e.element.dim(),
                });
            }
            if !e.l_value.is_finite() {
                return Err(GroupError::NonFiniteInput);
            }
        }
        let contains_identity = entries.iter().any(|e| e.element.is_identity(TOL_ID));
        let mut sorted_by_key: Vec<(f64, u32)> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.element.matrix.entries()[0], i as u32))
            .collect();
        sorted_by_key.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(NormedGroupSample { dimension, entries, contains_identity, sorted_by_key })
    }

    /// Sample containing only the identity with norm value zero.
    pub fn trivial(dimension: usize) -> Self {
        NormedGroupSample::new(
            dimension,
            vec![SampleEntry { element: GroupElement::identity(dimension), l_value: 0.0 }],
        )
        .expect("trivial sample is structurally valid")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[SampleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    /// Index of the entry whose matrix is closest to `m`, provided the
    /// max-entry distance is within `tol`.
    pub fn find(&self, m: &Matrix, tol: f64) -> Option<usize> {
        let key = m.entries()[0];
        let start = self.sorted_by_key.partition_point(|&(k, _)| k < key - tol);
        let mut best: Option<(usize, f64)> = None;
        for &(k, i) in &self.sorted_by_key[start..] {
            if k > key + tol {
                break;
            }
            let d = self.entries[i as usize].element.matrix.max_abs_diff(m);
            if d <= tol && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i as usize, d));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// One reported axiom violation.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxiomViolation {
    /// L < 0.
    Positivity { index: usize, l_value: f64 },
    /// L = 0 away from the identity, L > 0 at the identity, or the identity
    /// is missing or duplicated.
    NonDegeneracy { index: Option<usize>, detail: String },
    /// Inverse missing from the sample, or present with a different value.
    Symmetry { index: usize, detail: String },
    /// L(ab) > L(a) + L(b) on a closed pair.
    Subadditivity { a: usize, b: usize, product: usize, excess: f64 },
}

/// Findings of [`validate_group_norm`]. `unchecked_pairs` counts pairs whose
/// product is absent from the sample; those are never violations.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<AxiomViolation>,
    pub checked_pairs: usize,
    pub unchecked_pairs: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the group-norm axioms on a finite sample.
///
/// Positivity, non-degeneracy, and symmetry are checked entry by entry.
/// Subadditivity is checked for every ordered pair whose product matches a
/// sample element within [`TOL_ID`]; `tol` is the numeric slack applied to
/// the value comparisons.
pub fn validate_group_norm(sample: &NormedGroupSample, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let entries = sample.entries();

    let identity_indices: Vec<usize> = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.element.is_identity(TOL_ID))
        .map(|(i, _)| i)
        .collect();
    if identity_indices.is_empty() {
        violations.push(AxiomViolation::NonDegeneracy {
            index: None,
            detail: "sample does not contain the identity".into(),
        });
    }

    for (i, e) in entries.iter().enumerate() {
        if e.l_value < -tol {
            violations.push(AxiomViolation::Positivity { index: i, l_value: e.l_value });
        }
        let is_id = identity_indices.contains(&i);
        if is_id && e.l_value.abs() > tol {
            violations.push(AxiomViolation::NonDegeneracy {
                index: Some(i),
                detail: format!("identity entry has L = {} instead of 0", e.l_value),
            });
        }
        if !is_id && e.l_value.abs() <= tol {
            violations.push(AxiomViolation::NonDegeneracy {
                index: Some(i),
                detail: "L vanishes on a non-identity element".into(),
            });
        }
    }

    // Symmetry: the inverse (transpose) must be sampled with the same value.
    for (i, e) in entries.iter().enumerate() {
        let inverse = e.element.matrix().transpose();
        match sample.find(&inverse, TOL_ID) {
            None => violations.push(AxiomViolation::Symmetry {
                index: i,
                detail: "inverse element is not in the sample".into(),
            }),
            Some(j) => {
                let gap = (entries[j].l_value - e.l_value).abs();
                if gap > tol {
                    violations.push(AxiomViolation::Symmetry {
                        index: i,
                        detail: format!(
                            "L(a) = {} but L(a^-1) = {} (entry {j})",
                            e.l_value, entries[j].l_value
                        ),
                    });
                }
            }
        }
    }

    // Subadditivity on closed pairs. Row-parallel; per-row results are
    // concatenated in row order so the report is deterministic.
    let per_row: Vec<(Vec<AxiomViolation>, usize, usize)> = (0..entries.len())
        .into_par_iter()
        .map(|i| {
            let mut row_violations = Vec::new();
            let mut checked = 0usize;
            let mut unchecked = 0usize;
            let mut product = Matrix::zeros(sample.dimension());
            for j in 0..entries.len() {
                entries[i]
                    .element
                    .matrix()
                    .mul_into(entries[j].element.matrix(), &mut product);
                match sample.find(&product, TOL_ID) {
                    None => unchecked += 1,
                    Some(k) => {
                        checked += 1;
                        let excess =
                            entries[k].l_value - entries[i].l_value - entries[j].l_value;
                        if excess > tol {
                            row_violations.push(AxiomViolation::Subadditivity {
                                a: i,
                                b: j,
                                product: k,
                                excess,
                            });
                        }
                    }
                }
            }
            (row_violations, checked, unchecked)
        })
        .collect();

    let mut checked_pairs = 0;
    let mut unchecked_pairs = 0;
    for (row_violations, checked, unchecked) in per_row {
        violations.extend(row_violations);
        checked_pairs += checked;
        unchecked_pairs += unchecked;
    }

    ValidationReport { violations, checked_pairs, unchecked_pairs }
}

/// Left-invariant distance d(a, b) = L(a^-1 b), read off the sample.
pub fn left_invariant_distance(
    sample: &NormedGroupSample,
    a: &GroupElement,
    b: &GroupElement,
) -> Result<f64, GroupError> {
    if a.dim() != sample.dimension() || b.dim() != sample.dimension() {
        return Err(GroupError::DimensionMismatch {
            expected: sample.dimension(),
            got: a.dim().max(b.dim()),
        });
    }
    let product = a.inverse().compose(b);
    let idx = sample
        .find(product.matrix(), TOL_ID)
        .ok_or(GroupError::ElementNotInSample)?;
    Ok(sample.entries()[idx].l_value)
}

/// Post-composition with a nondecreasing subadditive `f`, `f(0) = 0`; the
/// result is again a group-norm. `f(0)` is checked exactly and monotonicity
/// is spot-checked on the sample's own values.
pub fn compose_norm_with_subadditive<F>(
    sample: &NormedGroupSample,
    f: F,
) -> Result<NormedGroupSample, GroupError>
where
    F: Fn(f64) -> f64,
{
    let at_zero = f(0.0);
    if at_zero.abs() > 1e-15 {
        return Err(GroupError::FunctionNotVanishingAtZero(at_zero));
    }
    let mut values: Vec<f64> = sample.entries().iter().map(|e| e.l_value).collect();
    values.sort_by(f64::total_cmp);
    for pair in values.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if f(lo) > f(hi) + 1e-15 {
            return Err(GroupError::FunctionNotMonotone { lo, hi, f_lo: f(lo), f_hi: f(hi) });
        }
    }
    let entries = sample
        .entries()
        .iter()
        .map(|e| SampleEntry { element: e.element.clone(), l_value: f(e.l_value) })
        .collect();
    NormedGroupSample::new(sample.dimension(), entries)
}

/// Uniform rotation sample on [-pi, pi] with `half_count` angles per side
/// plus the identity, normed by L(theta) = |theta|.
pub fn rotation_sample(half_count: usize) -> NormedGroupSample {
    let m = half_count.max(1);
    let mut entries = Vec::with_capacity(2 * m + 1);
    for j in -(m as i64)..=(m as i64) {
        let theta = std::f64::consts::PI * (j as f64) / (m as f64);
        entries.push(SampleEntry {
            element: GroupElement::rotation2(theta),
            l_value: theta.abs(),
        });
    }
    NormedGroupSample::new(2, entries).expect("rotation sample is structurally valid")
}
