//! The greedy strongly orthogonal decomposition (GSOD).
//!
//! Step 1 maximizes `A[u]` over the torus. Every later step maximizes over
//! the points strongly orthogonal to all accepted components, by searching
//! each feasible [`Pattern`] separately: pinned modes are contracted away,
//! complement modes are re-coordinatized in an orthonormal basis of the
//! complement, and the reduced tensor goes through [`spectral_max`].

mod options;
mod patterns;
mod power;

use serde::Serialize;

pub use options::SolverOptions;
pub use patterns::{enumerate_patterns, Frames, ModeChoice, Pattern};
pub use power::{spectral_max, SpectralMax, Start};

pub(crate) use power::kkt_residual;

use crate::error::Result;
use crate::linalg::orthonormal_complement;
use crate::sod::{canonicalize, Decomposition, Term};
use crate::tensor::{DenseTensor, MultiVector, TorusPoint};

/// Candidates within this multiple of `‖A‖_F` of the incumbent count as tied;
/// the earlier pattern is kept.
const PATTERN_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ConstrainedMax {
    /// Zero when no feasible pattern has a positive value.
    pub sigma: f64,
    pub point: Option<TorusPoint>,
    pub pattern: Option<Pattern>,
    pub patterns_searched: usize,
    pub search: Option<SpectralMax>,
}

/// Maximum of `A[u]` over torus points strongly orthogonal to every
/// component recorded in `frames`.
pub fn constrained_max(a: &DenseTensor, frames: &Frames, opts: &SolverOptions) -> Result<ConstrainedMax> {
    opts.validate()?;
    let p = a.order();
    let complements: Vec<Vec<Vec<f64>>> = (0..p)
        .map(|j| orthonormal_complement(frames.directions(j), a.dims()[j]))
        .collect();
    let patterns = enumerate_patterns(frames);
    let tie = PATTERN_TIE_TOL * a.frobenius_norm();

    let mut best = ConstrainedMax {
        sigma: 0.0,
        point: None,
        pattern: None,
        patterns_searched: patterns.len(),
        search: None,
    };
    for pattern in patterns {
        let (value, point, pattern, search) = if pattern.all_pinned() {
            let parts = pattern
                .choices()
                .iter()
                .enumerate()
                .map(|(j, c)| match *c {
                    ModeChoice::Pinned { direction, .. } => frames.directions(j)[direction].clone(),
                    ModeChoice::Complement => unreachable!(),
                })
                .collect();
            let mut point = MultiVector::new(parts)?;
            let mut pattern = pattern;
            let mut value = a.evaluate(&point)?;
            if value < 0.0 {
                value = -value;
                point.negate_mode(p - 1);
                if let Some(ModeChoice::Pinned { sign, .. }) = pattern.0.last_mut() {
                    *sign = -*sign;
                }
            }
            (value, point, pattern, None)
        } else {
            let mut reduced = a.clone();
            for j in (0..p).rev() {
                reduced = match pattern.choices()[j] {
                    ModeChoice::Pinned { direction, .. } => {
                        reduced.contract_mode(j, &frames.directions(j)[direction])?
                    }
                    ModeChoice::Complement => reduced.mode_product(j, &complements[j])?,
                };
            }
            let search = spectral_max(&reduced, opts)?;
            let mut reduced_parts = search.point.parts().iter();
            let parts = pattern
                .choices()
                .iter()
                .enumerate()
                .map(|(j, c)| match *c {
                    ModeChoice::Pinned { direction, .. } => frames.directions(j)[direction].clone(),
                    ModeChoice::Complement => {
                        let y = reduced_parts.next().expect("one reduced part per complement mode");
                        let mut w = vec![0.0; a.dims()[j]];
                        for (coef, basis) in y.iter().zip(&complements[j]) {
                            for (wi, bi) in w.iter_mut().zip(basis) {
                                *wi += coef * bi;
                            }
                        }
                        w
                    }
                })
                .collect();
            let point = MultiVector::new(parts)?;
            let value = a.evaluate(&point)?;
            (value, point, pattern, Some(search))
        };
        if value > best.sigma + tie {
            best.sigma = value;
            best.point = Some(TorusPoint::normalize(point)?);
            best.pattern = Some(pattern);
            best.search = search;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub sigma: f64,
    pub pattern: Pattern,
    pub patterns_searched: usize,
    pub power_iterations: usize,
    /// `None` for all-pinned patterns, which need no search.
    pub start: Option<Start>,
    pub kkt_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct GsodResult {
    /// Canonical form (sign-normalized, deterministically sorted).
    pub decomposition: Decomposition,
    pub rank: usize,
    /// One entry per greedy step, in step order.
    pub steps: Vec<StepDiagnostics>,
}

impl GsodResult {
    /// False if some step's search had no power-iteration run that met the
    /// stopping rule before the iteration cap.
    pub fn all_converged(&self) -> bool {
        self.steps.iter().all(|s| s.converged)
    }
}

/// Runs the greedy loop until `σ_{k+1} ≤ sigma_cutoff · σ_1` or `n` steps.
pub fn gsod(a: &DenseTensor, opts: &SolverOptions) -> Result<GsodResult> {
    opts.validate()?;
    let shape = a.shape().clone();
    if a.is_zero() {
        return Ok(GsodResult {
            decomposition: Decomposition::empty(shape),
            rank: 0,
            steps: Vec::new(),
        });
    }
    let mut frames = Frames::new(&shape);
    let mut terms = Vec::new();
    let mut steps = Vec::new();
    let mut sigma_1 = 0.0;
    while terms.len() < shape.size() {
        let found = constrained_max(a, &frames, opts)?;
        let threshold = if terms.is_empty() { 0.0 } else { opts.sigma_cutoff * sigma_1 };
        if found.sigma <= threshold {
            break;
        }
        let (Some(point), Some(pattern)) = (found.point, found.pattern) else {
            break;
        };
        let w = frames.record(&point, &pattern);
        let sigma = a.evaluate(&w)?;
        if terms.is_empty() {
            sigma_1 = sigma;
        }
        steps.push(StepDiagnostics {
            step: steps.len(),
            sigma,
            pattern,
            patterns_searched: found.patterns_searched,
            power_iterations: found.search.as_ref().map_or(0, |s| s.iterations),
            start: found.search.as_ref().map(|s| s.start),
            kkt_residual: kkt_residual(a, &w),
            converged: found.search.as_ref().map_or(true, |s| s.converged),
        });
        terms.push(Term { sigma, factors: w });
    }
    let decomposition = canonicalize(&Decomposition::new(shape, terms)?)?;
    Ok(GsodResult {
        rank: decomposition.len(),
        decomposition,
        steps,
    })
}

/// Strong rank `r(A)`: the number of GSOD terms.
pub fn strong_rank(a: &DenseTensor, opts: &SolverOptions) -> Result<usize> {
    Ok(gsod(a, opts)?.rank)
}

/// Sign-normalizes and sorts `d` (σ descending, ties broken
/// lexicographically on the canonical factors).
pub fn canonical_form(d: &Decomposition) -> Result<Decomposition> {
    canonicalize(d)
}
