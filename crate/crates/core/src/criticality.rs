//! Critical points of the multilinear form on the torus.
//!
//! `u` is critical when every gradient component is parallel to its factor,
//! `z_j(u) = λ u_j`, with the common multiplier `λ = A[u]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dominant_index, orthonormal_complement};
use crate::oracle::{newton_critical_point, oracle_start, power_fixed_point};
use crate::sod::{validate, Decomposition, DEFAULT_TOL_ORTH};
use crate::solver::{gsod, SolverOptions};
use crate::tensor::{apply_sign, inner_product, norm, one_form, DenseTensor, MultiVector, SignDistribution};

pub const DEFAULT_TOL_CRIT: f64 = 1e-8;
/// Torus membership required by [`criticality_residual`].
pub const TORUS_TOL: f64 = 1e-10;
/// Relative gap below which two weights count as equal.
pub const SIGMA_TIE_TOL: f64 = 1e-9;
pub const DEDUP_TOL: f64 = 1e-6;
pub const AUDIT_STARTS: usize = 200;

fn scale(a: &DenseTensor) -> f64 {
    a.frobenius_norm().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalityReport {
    pub lambda: f64,
    /// `‖z_j − λ u_j‖₂` per mode.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub is_critical: bool,
}

/// Residuals of the critical-point equations at `u`. Passes when the largest
/// is at most `tol_crit · max(1, ‖A‖_F)`.
pub fn criticality_residual(a: &DenseTensor, u: &MultiVector, tol_crit: f64) -> Result<CriticalityReport> {
    let z = a.gradient_components(u)?;
    for (mode, n) in u.norms().into_iter().enumerate() {
        if (n - 1.0).abs() > TORUS_TOL {
            return Err(Error::OffTorus { mode, norm: n });
        }
    }
    let lambda = a.evaluate(u)?;
    let residuals: Vec<f64> = (0..u.order())
        .map(|j| {
            let r: Vec<f64> = z.part(j).iter().zip(u.part(j)).map(|(zi, ui)| zi - lambda * ui).collect();
            norm(&r)
        })
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(CriticalityReport {
        lambda,
        residuals,
        max_residual,
        is_critical: max_residual <= tol_crit * scale(a),
    })
}

fn require_sod_of(d: &Decomposition, a: &DenseTensor) -> Result<()> {
    if d.shape() != a.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.dims().to_vec(),
            found: d.shape().dims().to_vec(),
        });
    }
    let report = validate(d, DEFAULT_TOL_ORTH);
    if !report.is_sod {
        return Err(Error::NotStronglyOrthogonal(format!(
            "{} offending pairs, max norm error {:e}, ordering ok: {}",
            report.offending_pairs.len(),
            report.max_norm_error,
            report.ordering_ok
        )));
    }
    Ok(())
}

/// Component `k` (0-based) is critical iff `A[w^k with mode j replaced by w]`
/// vanishes for every mode `j` and every `w ⟂ w_j^k`. Checked on an
/// orthonormal basis of each complement.
pub fn component_lemma_check(d: &Decomposition, k: usize, a: &DenseTensor, tol: f64) -> Result<bool> {
    if k >= d.len() {
        return Err(Error::ComponentOutOfRange { index: k, count: d.len() });
    }
    require_sod_of(d, a)?;
    let w = &d.terms()[k].factors;
    let bound = tol * scale(a);
    for j in 0..w.order() {
        for b in orthonormal_complement(&[w.part(j).to_vec()], a.dims()[j]) {
            let mut parts = w.parts().to_vec();
            parts[j] = b;
            if a.evaluate(&MultiVector::new(parts)?)?.abs() > bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff every component passes [`component_lemma_check`].
pub fn is_critical_decomposition(d: &Decomposition, a: &DenseTensor, tol: f64) -> Result<bool> {
    require_sod_of(d, a)?;
    for k in 0..d.len() {
        if !component_lemma_check(d, k, a, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanMembership {
    /// `⟨U, W_k⟩ = ∏_j u_j · w_j^k`.
    pub coefficients: Vec<f64>,
    /// `‖U − Σ_k ⟨U, W_k⟩ W_k‖_F`.
    pub residual: f64,
}

/// Projection of the one-form of `u` onto the span of the components' one-forms.
pub fn span_membership(d: &Decomposition, u: &MultiVector) -> Result<SpanMembership> {
    let target = one_form(u);
    if target.shape() != d.shape() {
        return Err(Error::ShapeMismatch {
            expected: d.shape().dims().to_vec(),
            found: target.dims().to_vec(),
        });
    }
    let mut rest = target;
    let mut coefficients = Vec::with_capacity(d.len());
    for t in d.terms() {
        let w = one_form(&t.factors);
        let c = u.one_form_dot(&t.factors);
        rest.add_scaled(-c, &w)?;
        coefficients.push(c);
    }
    Ok(SpanMembership {
        coefficients,
        residual: inner_product(&rest, &rest)?.max(0.0).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub epsilon: SignDistribution,
    /// 0-based component index.
    pub k: usize,
    /// `parity(ε) · σ_k`.
    pub value: f64,
    #[serde(with = "parts_list")]
    pub parts: MultiVector,
    pub residual: f64,
}

mod parts_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::tensor::MultiVector;

    pub fn serialize<S: Serializer>(mv: &MultiVector, s: S) -> Result<S::Ok, S::Error> {
        mv.parts().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MultiVector, D::Error> {
        MultiVector::new(Vec::<Vec<f64>>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// The sign orbits of the GSOD components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub rank: usize,
    pub p: usize,
    pub sigmas: Vec<f64>,
    /// Two weights coincide within [`SIGMA_TIE_TOL`]; the finite count is
    /// then not guaranteed.
    pub degenerate: bool,
    pub points: Vec<CriticalPoint>,
}

impl CriticalSet {
    /// Expands a decomposition of `a` into `2^p · r` signed points, ε in
    /// mask order (bit j negates mode j) within each component.
    pub fn from_decomposition(d: &Decomposition, a: &DenseTensor, tol_crit: f64) -> Result<Self> {
        let p = d.shape().order();
        let sigmas = d.sigmas();
        let mut points = Vec::with_capacity(d.len() << p);
        for (k, t) in d.terms().iter().enumerate() {
            for eps in SignDistribution::all(p) {
                let parts = apply_sign(&t.factors, &eps)?;
                let residual = criticality_residual(a, &parts, tol_crit)?.max_residual;
                points.push(CriticalPoint {
                    value: f64::from(eps.parity()) * t.sigma,
                    epsilon: eps,
                    k,
                    parts,
                    residual,
                });
            }
        }
        Ok(CriticalSet {
            rank: d.len(),
            p,
            degenerate: has_tied_sigmas(&sigmas),
            sigmas,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|x| x.residual).fold(0.0, f64::max)
    }
}

fn has_tied_sigmas(sigmas: &[f64]) -> bool {
    let top = sigmas.first().copied().unwrap_or(0.0).abs();
    sigmas.windows(2).any(|w| (w[0] - w[1]).abs() <= SIGMA_TIE_TOL * top)
}

/// All sign variants of the GSOD components of `a`.
pub fn critical_points(a: &DenseTensor, opts: &SolverOptions) -> Result<CriticalSet> {
    let res = gsod(a, opts)?;
    CriticalSet::from_decomposition(&res.decomposition, a, DEFAULT_TOL_CRIT)
}

/// Even-parity points (value `+σ_k`) and odd-parity points (value `−σ_k`).
pub fn extrema_split(cs: &CriticalSet) -> (Vec<&CriticalPoint>, Vec<&CriticalPoint>) {
    cs.points.iter().partition(|x| x.epsilon.is_even())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestRankOne {
    pub sigma: f64,
    #[serde(serialize_with = "serialize_components")]
    pub components: Vec<MultiVector>,
    pub unique: bool,
}

fn serialize_components<S: serde::Serializer>(c: &[MultiVector], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(c.iter().map(|m| m.parts()))
}

/// GSOD components whose weight is within `1e-9 · σ_1` of `σ_1`. Empty for
/// the zero tensor.
pub fn best_rank_one(a: &DenseTensor, opts: &SolverOptions) -> Result<BestRankOne> {
    let d = gsod(a, opts)?.decomposition;
    Ok(best_rank_one_of(&d))
}

pub fn best_rank_one_of(d: &Decomposition) -> BestRankOne {
    let sigma = d.terms().first().map_or(0.0, |t| t.sigma);
    let components: Vec<MultiVector> = d
        .terms()
        .iter()
        .filter(|t| sigma - t.sigma <= SIGMA_TIE_TOL * sigma)
        .map(|t| t.factors.clone())
        .collect();
    BestRankOne {
        sigma,
        unique: components.len() == 1,
        components,
    }
}

/// Per-mode sign flip making each dominant entry positive.
fn sign_canonical(u: &MultiVector) -> MultiVector {
    let mut out = u.clone();
    for j in 0..u.order() {
        if u.part(j)[dominant_index(u.part(j))] < 0.0 {
            out.negate_mode(j);
        }
    }
    out
}

/// Some sign distribution maps `a` onto `b` within `tol` per entry.
pub fn same_up_to_signs(a: &MultiVector, b: &MultiVector, tol: f64) -> bool {
    a.order() == b.order()
        && a.parts().iter().zip(b.parts()).all(|(x, y)| {
            x.len() == y.len() && {
                let plus = x.iter().zip(y).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
                let minus = x.iter().zip(y).fold(0.0_f64, |m, (p, q)| m.max((p + q).abs()));
                plus.min(minus) <= tol
            }
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditPoint {
    #[serde(serialize_with = "serialize_parts")]
    pub parts: MultiVector,
    pub value: f64,
    pub residual: f64,
    /// Index of the matching component, if any.
    pub component: Option<usize>,
    pub span_residual: f64,
    /// Number of starts that landed on this orbit.
    pub hits: usize,
}

fn serialize_parts<S: serde::Serializer>(m: &MultiVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.parts().serialize(s)
}

/// How the independent search drives each start to a critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMethod {
    /// Power iteration to a fixed point. Only reaches local maxima of `|A|`.
    PowerIteration,
    /// Newton on the Lagrange system. Reaches saddle points as well.
    Newton,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub method: AuditMethod,
    pub starts: usize,
    /// Starts whose fixed point passed the criticality test.
    pub critical_runs: usize,
    /// Distinct sign orbits found.
    pub points: Vec<AuditPoint>,
    pub off_set: usize,
    pub max_span_residual: f64,
}

/// Independent critical-point search: seeded power iteration from `starts`
/// cube points to a fixed point, kept when critical at `tol_crit`, merged up
/// to sign distributions at [`DEDUP_TOL`], and matched against `d`.
pub fn audit_critical_points(
    a: &DenseTensor,
    d: &Decomposition,
    starts: usize,
    seed: u64,
    tol_crit: f64,
) -> Result<AuditReport> {
    audit_critical_points_with(a, d, starts, seed, tol_crit, AuditMethod::PowerIteration)
}

/// [`audit_critical_points`] with a choice of local solver.
pub fn audit_critical_points_with(
    a: &DenseTensor,
    d: &Decomposition,
    starts: usize,
    seed: u64,
    tol_crit: f64,
    method: AuditMethod,
) -> Result<AuditReport> {
    if d.shape() != a.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.dims().to_vec(),
            found: d.shape().dims().to_vec(),
        });
    }
    let dims = a.dims().to_vec();
    let mut found = Vec::new();
    for i in 0..starts {
        let start = oracle_start(&dims, seed, i);
        let candidate = match method {
            AuditMethod::PowerIteration => Some(power_fixed_point(a, &start, 5000, 1e-14).point),
            AuditMethod::Newton => newton_critical_point(a, &start, 100),
        };
        let Some(Ok(point)) = candidate.map(crate::tensor::TorusPoint::normalize) else {
            continue;
        };
        let point = point.into_multivector();
        let report = criticality_residual(a, &point, tol_crit)?;
        if report.is_critical {
            found.push((sign_canonical(&point), report));
        }
    }
    let critical_runs = found.len();
    found.sort_by(|x, y| {
        let xs = x.0.parts().iter().flatten();
        let ys = y.0.parts().iter().flatten();
        xs.zip(ys)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut points: Vec<AuditPoint> = Vec::new();
    for (u, report) in found {
        if let Some(existing) = points.iter_mut().find(|e| same_up_to_signs(&e.parts, &u, DEDUP_TOL)) {
            existing.hits += 1;
            continue;
        }
        let component = d
            .terms()
            .iter()
            .position(|t| same_up_to_signs(&t.factors, &u, DEDUP_TOL));
        let span_residual = span_membership(d, &u)?.residual;
        points.push(AuditPoint {
            value: report.lambda,
            residual: report.max_residual,
            parts: u,
            component,
            span_residual,
            hits: 1,
        });
    }
    Ok(AuditReport {
        method,
        starts,
        critical_runs,
        off_set: points.iter().filter(|x| x.component.is_none()).count(),
        max_span_residual: points.iter().map(|x| x.span_residual).fold(0.0, f64::max),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{diagonal_example, make_fixture, paper_example};
    use crate::sod::{reconstruct, Term};
    use crate::tensor::Shape;

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    fn diag53() -> DenseTensor {
        DenseTensor::from_entries(shape(&[2, 2]), &[(vec![0, 0], 5.0), (vec![1, 1], 3.0)]).unwrap()
    }

    fn mv(parts: Vec<Vec<f64>>) -> MultiVector {
        MultiVector::new(parts).unwrap()
    }

    #[test]
    fn residual_examples() {
        let r = criticality_residual(&diag53(), &mv(vec![vec![1.0, 0.0]; 2]), DEFAULT_TOL_CRIT).unwrap();
        assert_eq!((r.lambda, r.max_residual, r.is_critical), (5.0, 0.0, true));

        let x = std::f64::consts::FRAC_1_SQRT_2;
        let r = criticality_residual(&diag53(), &mv(vec![vec![x, x]; 2]), DEFAULT_TOL_CRIT).unwrap();
        assert!((r.lambda - 4.0).abs() < 1e-12);
        assert!(r.residuals.iter().all(|x| (x - 1.0).abs() < 1e-12));
        assert!(!r.is_critical);

        let p = paper_example().tensor;
        let u = mv(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        let r = criticality_residual(&p, &u, DEFAULT_TOL_CRIT).unwrap();
        assert_eq!(r.lambda, 1.0);
        assert!(r.is_critical);
    }

    #[test]
    fn residual_rejects_off_torus_points() {
        let err = criticality_residual(&diag53(), &mv(vec![vec![2.0, 0.0], vec![1.0, 0.0]]), 1e-8);
        assert!(matches!(err, Err(Error::OffTorus { mode: 0, .. })));
    }

    #[test]
    fn lemma_check_on_the_four_term_sod() {
        let f = paper_example();
        for k in 0..4 {
            assert!(component_lemma_check(&f.truth, k, &f.tensor, DEFAULT_TOL_CRIT).unwrap());
        }
        assert!(is_critical_decomposition(&f.truth, &f.tensor, DEFAULT_TOL_CRIT).unwrap());
        assert!(matches!(
            component_lemma_check(&f.truth, 4, &f.tensor, 1e-8),
            Err(Error::ComponentOutOfRange { index: 4, count: 4 })
        ));
    }

    #[test]
    fn lemma_check_on_two_components_sharing_a_factor() {
        // (e1,e1,e1) and (e1,e2,e2): replacing mode 2 of the first by e2
        // gives A[e1,e2,e1] = 0, and every other replacement vanishes too.
        let e = |i: usize| {
            let mut v = vec![0.0; 2];
            v[i] = 1.0;
            v
        };
        let d = Decomposition::new(
            shape(&[2, 2, 2]),
            vec![
                Term { sigma: 1.0, factors: mv(vec![e(0), e(0), e(0)]) },
                Term { sigma: 1.0, factors: mv(vec![e(0), e(1), e(1)]) },
            ],
        )
        .unwrap();
        let a = reconstruct(&d);
        for k in 0..2 {
            let lemma = component_lemma_check(&d, k, &a, 1e-8).unwrap();
            let direct = criticality_residual(&a, &d.terms()[k].factors, 1e-8).unwrap().is_critical;
            assert!(lemma && direct);
        }
    }

    #[test]
    fn single_term_is_always_critical() {
        let u = mv(vec![vec![0.6, 0.8], vec![0.0, 0.6, 0.8]]);
        let d = Decomposition::new(shape(&[2, 3]), vec![Term { sigma: 2.0, factors: u }]).unwrap();
        assert!(component_lemma_check(&d, 0, &reconstruct(&d), 1e-8).unwrap());
    }

    #[test]
    fn lemma_check_rejects_non_sod() {
        let x = std::f64::consts::FRAC_1_SQRT_2;
        let d = Decomposition::new(
            shape(&[2, 2]),
            vec![
                Term { sigma: 1.0, factors: mv(vec![vec![1.0, 0.0]; 2]) },
                Term { sigma: 0.5, factors: mv(vec![vec![x, x]; 2]) },
            ],
        )
        .unwrap();
        assert!(matches!(
            component_lemma_check(&d, 0, &reconstruct(&d), 1e-8),
            Err(Error::NotStronglyOrthogonal(_))
        ));
    }

    #[test]
    fn span_membership_of_components_and_signs() {
        let f = paper_example();
        let w = &f.truth.terms()[0].factors;
        let s = span_membership(&f.truth, w).unwrap();
        assert_eq!(s.coefficients, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.residual, 0.0);
        let even = apply_sign(w, &SignDistribution::new(vec![-1, -1, 1]).unwrap()).unwrap();
        let s = span_membership(&f.truth, &even).unwrap();
        assert_eq!(s.coefficients[0], 1.0);
        assert!(s.residual < 1e-15);
    }

    #[test]
    fn critical_sets_of_named_tensors() {
        let cs = critical_points(&diag53(), &SolverOptions::default()).unwrap();
        assert_eq!((cs.len(), cs.rank, cs.p), (8, 2, 2));
        let (max, min) = extrema_split(&cs);
        assert_eq!((max.len(), min.len()), (4, 4));
        assert!(cs.max_residual() < 1e-12);

        let cs = critical_points(&diagonal_example().tensor, &SolverOptions::default()).unwrap();
        assert_eq!(cs.len(), 16);
        assert!(!cs.degenerate);
        assert!(cs.points.iter().all(|x| x.value.abs() == cs.sigmas[x.k]));

        let cs = critical_points(&paper_example().tensor, &SolverOptions::default()).unwrap();
        assert_eq!(cs.len(), 16);
        assert!(cs.degenerate);
    }

    #[test]
    fn extrema_halves_swap_under_one_flip() {
        let cs = critical_points(&diagonal_example().tensor, &SolverOptions::default()).unwrap();
        let (max, min) = extrema_split(&cs);
        for x in &max {
            let mut y = x.parts.clone();
            y.negate_mode(1);
            assert!(min.iter().any(|m| m.parts == y && m.value == -x.value));
        }
    }

    #[test]
    fn critical_set_json_layout() {
        let cs = critical_points(&diag53(), &SolverOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&cs).unwrap();
        assert_eq!(v["rank"], 2);
        assert_eq!(v["p"], 2);
        let first = &v["points"][0];
        assert_eq!(first["epsilon"], serde_json::json!([1, 1]));
        assert_eq!(first["k"], 0);
        assert_eq!(first["value"], 5.0);
        assert_eq!(first["parts"], serde_json::json!([[1.0, 0.0], [1.0, 0.0]]));
        let back: CriticalSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, cs);
    }

    #[test]
    fn best_rank_one_examples() {
        let b = best_rank_one(&diag53(), &SolverOptions::default()).unwrap();
        assert!(b.unique);
        assert_eq!(b.sigma, 5.0);
        assert!(same_up_to_signs(&b.components[0], &mv(vec![vec![1.0, 0.0]; 2]), 1e-12));

        let b = best_rank_one(&paper_example().tensor, &SolverOptions::default()).unwrap();
        assert!(!b.unique);
        assert_eq!(b.components.len(), 2);

        let z = best_rank_one(&DenseTensor::zeros(shape(&[2, 2])), &SolverOptions::default()).unwrap();
        assert!(z.components.is_empty());
    }

    #[test]
    fn audit_finds_nothing_off_set_on_diagonal_tensor() {
        let f = diagonal_example();
        let d = gsod(&f.tensor, &SolverOptions::default()).unwrap().decomposition;
        let audit = audit_critical_points(&f.tensor, &d, 50, 3, DEFAULT_TOL_CRIT).unwrap();
        assert_eq!(audit.off_set, 0);
        assert!(audit.critical_runs > 0);
        assert!(audit.max_span_residual < 1e-8);
    }

    #[test]
    fn newton_audit_finds_saddles_of_the_diagonal_tensor() {
        // u_j = (2,3)/√13 in every mode solves z_j = λ u_j for 3 e1⊗³ + 2 e2⊗³
        // but is no sign variant of e1⊗³ or e2⊗³.
        let f = diagonal_example();
        let v = vec![2.0 / 13f64.sqrt(), 3.0 / 13f64.sqrt()];
        let saddle = mv(vec![v.clone(), v.clone(), v]);
        assert!(criticality_residual(&f.tensor, &saddle, DEFAULT_TOL_CRIT).unwrap().is_critical);
        assert!(span_membership(&f.truth, &saddle).unwrap().residual > 0.5);

        let audit = audit_critical_points_with(&f.tensor, &f.truth, 200, 0, DEFAULT_TOL_CRIT, AuditMethod::Newton).unwrap();
        assert!(audit.off_set > 0);
        assert!(audit.points.iter().any(|x| same_up_to_signs(&x.parts, &saddle, 1e-8)));
        let power = audit_critical_points(&f.tensor, &f.truth, 200, 0, DEFAULT_TOL_CRIT).unwrap();
        assert_eq!(power.off_set, 0);
    }

    #[test]
    fn audit_on_a_fixture() {
        let f = make_fixture(&shape(&[3, 3, 2]), 3, 4).unwrap();
        let d = gsod(&f.tensor, &SolverOptions::default()).unwrap().decomposition;
        let audit = audit_critical_points(&f.tensor, &d, 40, 9, DEFAULT_TOL_CRIT).unwrap();
        assert_eq!(audit.off_set, 0, "{audit:?}");
    }
}
