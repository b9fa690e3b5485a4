//! Decompositions `A = Σ σ_k w_1^k ⊗ ⋯ ⊗ w_p^k` and strong orthogonality.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dominant_index, orthonormal_complement, TIE_TOL};
use crate::tensor::{one_form, DenseTensor, MultiVector, Shape};

pub const DEFAULT_TOL_ORTH: f64 = 1e-8;
pub const DEFAULT_TOL_ZERO: f64 = 1e-12;

/// One weighted one-form `σ · w_1 ⊗ ⋯ ⊗ w_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub sigma: f64,
    #[serde(with = "bare_parts")]
    pub factors: MultiVector,
}

/// Factors serialize as a plain list of per-mode vectors.
mod bare_parts {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::tensor::MultiVector;

    pub fn serialize<S: Serializer>(mv: &MultiVector, s: S) -> Result<S::Ok, S::Error> {
        mv.parts().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MultiVector, D::Error> {
        let parts = Vec::<Vec<f64>>::deserialize(d)?;
        MultiVector::new(parts).map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
struct RawDecomposition {
    shape: Shape,
    terms: Vec<Term>,
}

/// An ordered list of terms over a fixed shape.
///
/// Construction only checks that every factor conforms to the shape. Unit
/// norms, ordering and strong orthogonality are reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDecomposition")]
pub struct Decomposition {
    shape: Shape,
    terms: Vec<Term>,
}

impl TryFrom<RawDecomposition> for Decomposition {
    type Error = Error;

    fn try_from(raw: RawDecomposition) -> Result<Self> {
        Decomposition::new(raw.shape, raw.terms)
    }
}

impl Decomposition {
    pub fn new(shape: Shape, terms: Vec<Term>) -> Result<Self> {
        for term in &terms {
            if term.factors.dims() != shape.dims() {
                return Err(Error::ShapeMismatch {
                    expected: shape.dims().to_vec(),
                    found: term.factors.dims(),
                });
            }
            if !term.sigma.is_finite() {
                return Err(Error::NonFinite(0));
            }
        }
        Ok(Decomposition { shape, terms })
    }

    pub fn empty(shape: Shape) -> Self {
        Decomposition {
            shape,
            terms: Vec::new(),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.sigma).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffendingPair {
    pub k: usize,
    pub l: usize,
    /// `None` when every mode is ±1-or-0 but no mode is 0, so the one-forms
    /// are not orthogonal.
    pub mode: Option<usize>,
    pub inner: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub is_sod: bool,
    pub max_norm_error: f64,
    pub max_pairwise_violation: f64,
    pub offending_pairs: Vec<OffendingPair>,
    pub ordering_ok: bool,
}

fn distance_to_sign_set(x: f64) -> f64 {
    x.abs().min((x.abs() - 1.0).abs())
}

/// Checks unit norms, descending positive weights and pairwise strong
/// orthogonality.
pub fn validate(d: &Decomposition, tol_orth: f64) -> ValidationReport {
    let terms = d.terms();
    let max_norm_error = terms
        .iter()
        .map(|t| t.factors.unit_norm_error())
        .fold(0.0, f64::max);
    let sigma_scale = terms.first().map_or(1.0, |t| t.sigma.abs().max(1.0));
    let ordering_ok = terms.iter().all(|t| t.sigma > 0.0)
        && terms
            .windows(2)
            .all(|w| w[1].sigma - w[0].sigma <= tol_orth * sigma_scale);

    let mut offending_pairs = Vec::new();
    let mut max_violation = 0.0_f64;
    for k in 0..terms.len() {
        for l in k + 1..terms.len() {
            let dots = terms[k].factors.mode_dots(&terms[l].factors);
            let mut pair_ok = true;
            for (mode, &inner) in dots.iter().enumerate() {
                let v = distance_to_sign_set(inner);
                max_violation = max_violation.max(v);
                if v > tol_orth {
                    pair_ok = false;
                    offending_pairs.push(OffendingPair {
                        k,
                        l,
                        mode: Some(mode),
                        inner,
                    });
                }
            }
            let min_abs = dots.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
            max_violation = max_violation.max(min_abs);
            if pair_ok && min_abs > tol_orth {
                offending_pairs.push(OffendingPair {
                    k,
                    l,
                    mode: None,
                    inner: dots.iter().product(),
                });
            }
        }
    }
    ValidationReport {
        is_sod: offending_pairs.is_empty() && ordering_ok && max_norm_error <= tol_orth,
        max_norm_error,
        max_pairwise_violation: max_violation,
        offending_pairs,
        ordering_ok,
    }
}

/// Makes every weight positive with an odd sign flip of the last mode, then
/// applies even flips so that the dominant entry of each of the modes
/// `1..p-1` is positive. One-forms `σ_k W_k` are unchanged.
pub fn normalize_signs(d: &Decomposition) -> Result<Decomposition> {
    let p = d.shape().order();
    let mut terms = d.terms.clone();
    for (k, term) in terms.iter_mut().enumerate() {
        if term.sigma == 0.0 {
            return Err(Error::DegenerateTerm(k));
        }
        if term.sigma < 0.0 {
            term.sigma = -term.sigma;
            term.factors.negate_mode(p - 1);
        }
        for j in 0..p.saturating_sub(1) {
            let part = term.factors.part(j);
            if part[dominant_index(part)] < 0.0 {
                term.factors.negate_mode(j);
                term.factors.negate_mode(p - 1);
            }
        }
    }
    Ok(Decomposition {
        shape: d.shape.clone(),
        terms,
    })
}

fn compare_factors(a: &MultiVector, b: &MultiVector) -> Ordering {
    for (pa, pb) in a.parts().iter().zip(b.parts()) {
        for (x, y) in pa.iter().zip(pb) {
            if (x - y).abs() > TIE_TOL {
                return x.partial_cmp(y).unwrap_or(Ordering::Equal);
            }
        }
    }
    Ordering::Equal
}

/// Sorts by descending weight; weights within `1e-9·σ_max` of each other
/// are ordered lexicographically by factor entries, mode 1 first.
pub(crate) fn sort_terms(terms: &mut [Term]) {
    terms.sort_by(|a, b| b.sigma.partial_cmp(&a.sigma).unwrap_or(Ordering::Equal));
    let scale = terms.first().map_or(0.0, |t| t.sigma.abs());
    let mut start = 0;
    while start < terms.len() {
        let mut end = start + 1;
        while end < terms.len() && terms[end - 1].sigma - terms[end].sigma <= TIE_TOL * scale {
            end += 1;
        }
        terms[start..end].sort_by(|a, b| compare_factors(&a.factors, &b.factors));
        start = end;
    }
}

/// Sign normalization followed by the deterministic sort.
pub(crate) fn canonicalize(d: &Decomposition) -> Result<Decomposition> {
    let mut out = normalize_signs(d)?;
    sort_terms(&mut out.terms);
    Ok(out)
}

fn check_orthogonal(q: &DMatrix<f64>, n: usize, mode: usize) -> Result<()> {
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::NotOrthogonal {
            mode,
            deviation: f64::INFINITY,
        });
    }
    let gram = q.transpose() * q;
    let deviation = (gram - DMatrix::<f64>::identity(n, n)).amax();
    if deviation > 1e-10 {
        return Err(Error::NotOrthogonal { mode, deviation });
    }
    Ok(())
}

/// SOD obtained by expanding `A` in the product basis given by the columns of
/// the orthogonal matrices `q`. Coefficients with `|c| ≤ tol_zero·max|c|`
/// are dropped.
pub fn basis_expansion_sod(a: &DenseTensor, q: &[DMatrix<f64>], tol_zero: f64) -> Result<Decomposition> {
    if q.len() != a.order() {
        return Err(Error::ShapeMismatch {
            expected: vec![a.order()],
            found: vec![q.len()],
        });
    }
    for (mode, (qj, &n)) in q.iter().zip(a.dims()).enumerate() {
        check_orthogonal(qj, n, mode)?;
    }
    // B_α = A[Q_1 e_{α_1}, …, Q_p e_{α_p}] for all α at once.
    let mut coeffs = a.clone();
    for (mode, qj) in q.iter().enumerate() {
        let rows: Vec<Vec<f64>> = (0..qj.ncols())
            .map(|c| qj.column(c).iter().copied().collect())
            .collect();
        coeffs = coeffs.mode_product(mode, &rows)?;
    }
    let cutoff = tol_zero * coeffs.max_abs();
    let mut terms = Vec::new();
    for (flat, &c) in coeffs.coeffs().iter().enumerate() {
        if c == 0.0 || c.abs() <= cutoff {
            continue;
        }
        let index = a.shape().multi_index(flat);
        let parts = index
            .iter()
            .zip(q)
            .map(|(&i, qj)| qj.column(i).iter().copied().collect())
            .collect();
        terms.push(Term {
            sigma: c,
            factors: MultiVector::new(parts)?,
        });
    }
    canonicalize(&Decomposition {
        shape: a.shape().clone(),
        terms,
    })
}

/// `Σ_k σ_k one_form(w^k)`, accumulated in term order.
pub fn reconstruct(d: &Decomposition) -> DenseTensor {
    let mut out = DenseTensor::zeros(d.shape().clone());
    for term in d.terms() {
        out.add_scaled(term.sigma, &one_form(&term.factors))
            .expect("terms conform to the decomposition shape");
    }
    out
}

/// Distinct directions (up to sign) among the mode-`mode` factors, each
/// sign-canonical, plus for every term the index of its direction.
pub(crate) fn mode_directions(
    d: &Decomposition,
    mode: usize,
    tol_orth: f64,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    let mut assignment = Vec::with_capacity(d.len());
    for (k, term) in d.terms().iter().enumerate() {
        let w = term.factors.part(mode);
        let found = dirs
            .iter()
            .position(|v| crate::tensor::dot(v, w).abs() >= 1.0 - tol_orth);
        let idx = match found {
            Some(i) => i,
            None => {
                if let Some(v) = dirs
                    .iter()
                    .find(|v| crate::tensor::dot(v, w).abs() > tol_orth)
                {
                    return Err(Error::NotStronglyOrthogonal(format!(
                        "term {k} mode {mode}: inner product {} with an earlier direction",
                        crate::tensor::dot(v, w)
                    )));
                }
                let mut v = w.to_vec();
                if v[dominant_index(&v)] < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                dirs.push(v);
                dirs.len() - 1
            }
        };
        assignment.push(idx);
    }
    Ok((dirs, assignment))
}

/// Orthogonal matrices `Q_j` whose columns contain every factor direction of
/// `d` (up to sign), completed by Gram–Schmidt on canonical vectors.
pub fn complete_to_basis(d: &Decomposition, tol_orth: f64) -> Result<Vec<DMatrix<f64>>> {
    let report = validate(d, tol_orth);
    if !report.is_sod {
        return Err(Error::NotStronglyOrthogonal(format!(
            "{} offending pairs, max norm error {:e}, ordering ok: {}",
            report.offending_pairs.len(),
            report.max_norm_error,
            report.ordering_ok
        )));
    }
    (0..d.shape().order())
        .map(|mode| {
            let n = d.shape().dim(mode);
            let (mut dirs, _) = mode_directions(d, mode, tol_orth)?;
            let completion = orthonormal_complement(&dirs, n);
            dirs.extend(completion);
            Ok(DMatrix::from_fn(n, n, |r, c| dirs[c][r]))
        })
        .collect()
}
