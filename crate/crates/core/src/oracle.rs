//! Reference computations that do not share code paths with the solver.
//!
//! * [`svd_reference`]: one-sided (Hestenes) Jacobi SVD.
//! * [`brute_force_max`] and [`power_fixed_point`]: power iteration written
//!   against explicit multi-index enumeration, with starts drawn uniformly
//!   from the cube instead of from a Gaussian.
//! * [`finite_difference_gradient`]: central differences of `evaluate`.
//! * [`make_fixture`]: random tensors with a known GSOD.
//!
//! # Ground-truth fixtures
//!
//! A fixture is `A = Σ_k σ_k (Q_1 e_{α_1(k)}) ⊗ ⋯ ⊗ (Q_p e_{α_p(k)})` with
//! random orthogonal `Q_j` and distinct weights. In the rotated coordinates
//! `|A[u]| ≤ Σ_k σ_k t_k(u)` with `t_k(u) = ∏_j |u_{j,α_j(k)}|`. The index set
//! is accepted only if a recursive certificate proves `Σ_k t_k ≤ 1` on the
//! torus: group the indices by their value in one mode, require the groups
//! to use pairwise disjoint values in a second mode, and certify each group
//! on the remaining modes (Cauchy–Schwarz in the first mode, then in the
//! second). With distinct weights this pins every greedy step to the next
//! component, so the truth is the GSOD. Pairwise Hamming distance ≥ 2 alone
//! is not enough: the indices `(0,0,0), (0,1,1), (1,0,1)` with weights near
//! 1 have a maximum above `σ_1`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::orthonormal_complement;
use crate::sod::{canonicalize, reconstruct, Decomposition, Term};
use crate::tensor::{DenseTensor, MultiVector, Shape};

pub const FIXTURE_SCHEMA: &str = "fixture-v1";
const MIN_SIGMA: f64 = 0.5;
const MAX_SIGMA: f64 = 2.0;
const MIN_SIGMA_GAP: f64 = 0.05;
const SEARCH_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct SvdReference {
    /// Descending.
    pub sigmas: Vec<f64>,
    /// `m × k` left singular vectors, `k = min(m, n)`.
    pub u: DMatrix<f64>,
    /// `n × k` right singular vectors.
    pub v: DMatrix<f64>,
}

/// Thin SVD by one-sided Jacobi rotations on the columns.
pub fn svd_reference(m: &DMatrix<f64>) -> SvdReference {
    if m.nrows() < m.ncols() {
        let t = svd_reference(&m.transpose());
        return SvdReference {
            sigmas: t.sigmas,
            u: t.v,
            v: t.u,
        };
    }
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut w = m.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = w.column(p).norm_squared();
                let beta: f64 = w.column(q).norm_squared();
                let gamma: f64 = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..cols {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|c| w.column(c).norm()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let sigmas: Vec<f64> = order.iter().map(|&c| norms[c]).collect();
    let scale = sigmas.first().copied().unwrap_or(0.0);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for &c in &order {
        if norms[c] > f64::EPSILON * scale * rows as f64 && norms[c] > 0.0 {
            u_cols.push(w.column(c).iter().map(|x| x / norms[c]).collect());
        }
    }
    let filled = u_cols.len();
    u_cols.extend(orthonormal_complement(&u_cols, rows).into_iter().take(cols - filled));
    let u = DMatrix::from_fn(rows, cols, |r, c| u_cols[c][r]);
    let v_sorted = DMatrix::from_fn(cols, cols, |r, c| v[(r, order[c])]);
    SvdReference {
        sigmas,
        u,
        v: v_sorted,
    }
}

/// `z_j(u)` by looping over every multi-index.
fn gradient_by_enumeration(a: &DenseTensor, u: &[Vec<f64>], mode: usize) -> Vec<f64> {
    let dims = a.dims();
    let mut z = vec![0.0; dims[mode]];
    let mut index = vec![0usize; dims.len()];
    for &coeff in a.coeffs() {
        if coeff != 0.0 {
            let mut prod = coeff;
            for (j, &i) in index.iter().enumerate() {
                if j != mode {
                    prod *= u[j][i];
                }
            }
            z[index[mode]] += prod;
        }
        for j in (0..dims.len()).rev() {
            index[j] += 1;
            if index[j] < dims[j] {
                break;
            }
            index[j] = 0;
        }
    }
    z
}

fn value_by_enumeration(a: &DenseTensor, u: &[Vec<f64>]) -> f64 {
    let z = gradient_by_enumeration(a, u, 0);
    z.iter().zip(&u[0]).map(|(x, y)| x * y).sum()
}

fn cube_start(dims: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    dims.iter()
        .map(|&n| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len == 0.0 {
                v[0] = 1.0;
            } else {
                v.iter_mut().for_each(|x| *x /= len);
            }
            v
        })
        .collect()
}

/// Result of one oracle power-iteration run.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub point: MultiVector,
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// Power iteration until no factor moves by more than `step_tol` in a sweep.
pub fn power_fixed_point(
    a: &DenseTensor,
    start: &MultiVector,
    max_sweeps: usize,
    step_tol: f64,
) -> FixedPoint {
    let mut u: Vec<Vec<f64>> = start.parts().to_vec();
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut moved = 0.0_f64;
        for j in 0..u.len() {
            let z = gradient_by_enumeration(a, &u, j);
            let len = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len == 0.0 {
                continue;
            }
            for (old, new) in u[j].iter_mut().zip(&z) {
                let next = new / len;
                moved = moved.max((next - *old).abs());
                *old = next;
            }
        }
        if moved <= step_tol {
            converged = true;
            break;
        }
    }
    let value = value_by_enumeration(a, &u);
    FixedPoint {
        point: MultiVector::new(u).expect("finite parts"),
        value,
        sweeps,
        converged,
    }
}

/// Newton's method on `z_j(u) − μ_j u_j = 0`, `(‖u_j‖² − 1)/2 = 0` from
/// `start`, with `μ_j` initialized to `z_j · u_j`. Unlike power iteration
/// this converges to saddle points too. Returns the normalized point when
/// the residual drops below `1e-13 · max(1, ‖A‖_F)` within `max_iters`.
pub fn newton_critical_point(a: &DenseTensor, start: &MultiVector, max_iters: usize) -> Option<MultiVector> {
    let dims = a.dims().to_vec();
    let p = dims.len();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    let total: usize = dims.iter().sum();
    let size = total + p;
    let scale = a.frobenius_norm().max(1.0);

    let mut u: Vec<Vec<f64>> = start.parts().to_vec();
    let mut mu: Vec<f64> = (0..p)
        .map(|j| {
            gradient_by_enumeration(a, &u, j)
                .iter()
                .zip(&u[j])
                .map(|(x, y)| x * y)
                .sum()
        })
        .collect();
    for _ in 0..max_iters {
        let z: Vec<Vec<f64>> = (0..p).map(|j| gradient_by_enumeration(a, &u, j)).collect();
        let mut f = nalgebra::DVector::<f64>::zeros(size);
        for j in 0..p {
            for i in 0..dims[j] {
                f[offsets[j] + i] = z[j][i] - mu[j] * u[j][i];
            }
            f[total + j] = 0.5 * (u[j].iter().map(|x| x * x).sum::<f64>() - 1.0);
        }
        if f.amax() <= 1e-13 * scale {
            let parts = u
                .iter()
                .map(|v| {
                    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / len).collect()
                })
                .collect();
            return MultiVector::new(parts).ok();
        }
        let mut jac = DMatrix::<f64>::zeros(size, size);
        for j in 0..p {
            for i in 0..dims[j] {
                jac[(offsets[j] + i, offsets[j] + i)] = -mu[j];
                jac[(offsets[j] + i, total + j)] = -u[j][i];
                jac[(total + j, offsets[j] + i)] = u[j][i];
            }
        }
        // ∂z_j/∂u_k by enumeration over all multi-indices.
        let mut index = vec![0usize; p];
        for &coeff in a.coeffs() {
            if coeff != 0.0 {
                for j in 0..p {
                    for k in 0..p {
                        if j == k {
                            continue;
                        }
                        let mut prod = coeff;
                        for (m, &im) in index.iter().enumerate() {
                            if m != j && m != k {
                                prod *= u[m][im];
                            }
                        }
                        jac[(offsets[j] + index[j], offsets[k] + index[k])] += prod;
                    }
                }
            }
            for m in (0..p).rev() {
                index[m] += 1;
                if index[m] < dims[m] {
                    break;
                }
                index[m] = 0;
            }
        }
        let step = jac.lu().solve(&f)?;
        if !step.iter().all(|x| x.is_finite()) {
            return None;
        }
        for j in 0..p {
            for i in 0..dims[j] {
                u[j][i] -= step[offsets[j] + i];
            }
            mu[j] -= step[total + j];
        }
        if u.iter().flatten().any(|x| x.abs() > 1e6) {
            return None;
        }
    }
    None
}

/// Seeded start `i` of the oracle's start distribution.
pub fn oracle_start(dims: &[usize], seed: u64, i: usize) -> MultiVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64));
    MultiVector::new(cube_start(dims, &mut rng)).expect("finite parts")
}

/// Multistart power iteration used to certify the solver's maximum.
/// Returns `(σ, w)` with `σ = A[w] ≥ 0`.
pub fn brute_force_max(a: &DenseTensor, starts: usize, seed: u64) -> (f64, MultiVector) {
    let dims = a.dims().to_vec();
    let mut best: Option<FixedPoint> = None;
    for i in 0..starts.max(1) {
        let run = power_fixed_point(a, &oracle_start(&dims, seed, i), 2000, 1e-14);
        if best.as_ref().map_or(true, |b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    let mut point = best.point;
    let mut value = best.value;
    if value < 0.0 {
        value = -value;
        point.negate_mode(dims.len() - 1);
    }
    (value, point)
}

/// Central differences of `t ↦ A[u + t e]` for every coordinate. `h` should
/// lie in `[1e-8, 1e-4]`.
pub fn finite_difference_gradient(a: &DenseTensor, u: &MultiVector, h: f64) -> MultiVector {
    let parts = (0..u.order())
        .map(|j| {
            (0..u.part(j).len())
                .map(|i| {
                    let shifted = |delta: f64| {
                        let mut parts = u.parts().to_vec();
                        parts[j][i] += delta;
                        let mv = MultiVector::new(parts).expect("finite");
                        a.evaluate(&mv).expect("conforming")
                    };
                    (shifted(h) - shifted(-h)) / (2.0 * h)
                })
                .collect()
        })
        .collect();
    MultiVector::new(parts).expect("finite")
}

/// A tensor together with its known GSOD.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthFixture {
    pub name: Option<String>,
    pub seed: u64,
    pub shape: Shape,
    pub r: usize,
    /// Multi-index of each truth component in the product basis, in the
    /// order the truth terms were drawn (descending σ).
    pub indices: Vec<Vec<usize>>,
    pub tensor: DenseTensor,
    pub truth: Decomposition,
}

#[derive(Serialize, Deserialize)]
struct FixtureFile {
    schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    seed: u64,
    shape: Shape,
    r: usize,
    indices: Vec<Vec<usize>>,
    tensor: DenseTensor,
    truth: Decomposition,
}

impl GroundTruthFixture {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&FixtureFile {
            schema: FIXTURE_SCHEMA.into(),
            name: self.name.clone(),
            seed: self.seed,
            shape: self.shape.clone(),
            r: self.r,
            indices: self.indices.clone(),
            tensor: self.tensor.clone(),
            truth: self.truth.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FixtureFile = serde_json::from_str(text)?;
        if file.schema != FIXTURE_SCHEMA {
            return Err(Error::Serialization(format!(
                "unsupported fixture schema {:?}",
                file.schema
            )));
        }
        if file.tensor.shape() != &file.shape || file.truth.shape() != &file.shape {
            return Err(Error::Serialization("fixture shapes disagree".into()));
        }
        Ok(GroundTruthFixture {
            name: file.name,
            seed: file.seed,
            shape: file.shape,
            r: file.r,
            indices: file.indices,
            tensor: file.tensor,
            truth: file.truth,
        })
    }
}

fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Proves `Σ_k ∏_{j∈modes} |u_{j,α_j(k)}| ≤ 1` on the torus for the index
/// set, or gives up. Sound, not complete.
pub fn norm_certificate(indices: &[Vec<usize>], modes: &[usize]) -> bool {
    if indices.len() <= 1 {
        return true;
    }
    if modes.len() < 2 {
        return false;
    }
    for &j in modes {
        let mut groups: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        for idx in indices {
            groups.entry(idx[j]).or_default().push(idx.clone());
        }
        let rest: Vec<usize> = modes.iter().copied().filter(|&m| m != j).collect();
        for &second in &rest {
            let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
            let disjoint = groups.iter().all(|(&g, members)| {
                members
                    .iter()
                    .all(|idx| *seen.entry(idx[second]).or_insert(g) == g)
            });
            if disjoint && groups.values().all(|members| norm_certificate(members, &rest)) {
                return true;
            }
        }
    }
    false
}

fn admissible(indices: &[Vec<usize>], order: usize) -> bool {
    let all_modes: Vec<usize> = (0..order).collect();
    indices
        .iter()
        .enumerate()
        .all(|(k, a)| indices[..k].iter().all(|b| hamming(a, b) >= 2))
        && norm_certificate(indices, &all_modes)
}

fn search_indices(
    grid: &[Vec<usize>],
    r: usize,
    order: usize,
    chosen: &mut Vec<Vec<usize>>,
    from: usize,
    budget: &mut usize,
) -> Option<bool> {
    if chosen.len() == r {
        return Some(true);
    }
    for pos in from..grid.len() {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        chosen.push(grid[pos].clone());
        if admissible(chosen, order) {
            match search_indices(grid, r, order, chosen, pos + 1, budget) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
        }
        chosen.pop();
    }
    Some(false)
}

/// Seeded orthogonal matrix: QR of a Gaussian matrix with `diag(R) > 0`.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for c in 0..n {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).iter_mut().for_each(|x| *x = -*x);
        }
    }
    q
}

/// Draws a random fixture with `r` components on `shape`.
pub fn make_fixture(shape: &Shape, r: usize, seed: u64) -> Result<GroundTruthFixture> {
    if r == 0 {
        return Err(Error::InfeasibleFixture("r must be at least 1".into()));
    }
    if (r - 1) as f64 * MIN_SIGMA_GAP > MAX_SIGMA - MIN_SIGMA {
        return Err(Error::InfeasibleFixture(format!(
            "{r} weights with gaps ≥ {MIN_SIGMA_GAP} do not fit in [{MIN_SIGMA}, {MAX_SIGMA}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q: Vec<DMatrix<f64>> = shape
        .dims()
        .iter()
        .map(|&n| random_orthogonal(n, &mut rng))
        .collect();

    let mut grid: Vec<Vec<usize>> = shape.indices().collect();
    grid.shuffle(&mut rng);
    let mut chosen = Vec::with_capacity(r);
    let mut budget = SEARCH_BUDGET;
    match search_indices(&grid, r, shape.order(), &mut chosen, 0, &mut budget) {
        Some(true) => {}
        Some(false) => {
            return Err(Error::InfeasibleFixture(format!(
                "no {r} certified multi-indices exist in shape {:?}",
                shape.dims()
            )))
        }
        None => {
            return Err(Error::InfeasibleFixture(format!(
                "index search budget exhausted for r = {r} in shape {:?}",
                shape.dims()
            )))
        }
    }

    let span = MAX_SIGMA - MIN_SIGMA - (r - 1) as f64 * MIN_SIGMA_GAP;
    let mut offsets: Vec<f64> = (0..r).map(|_| rng.gen_range(0.0..=span)).collect();
    offsets.sort_by(f64::total_cmp);
    let mut sigmas: Vec<f64> = offsets
        .iter()
        .enumerate()
        .map(|(i, x)| MIN_SIGMA + x + i as f64 * MIN_SIGMA_GAP)
        .collect();
    sigmas.reverse();

    let mut fixture = fixture_from_parts(shape, &chosen, &q, &sigmas, seed)?;
    fixture.indices = chosen;
    Ok(fixture)
}

/// Builds a fixture from explicit indices, bases and weights. Requires
/// pairwise Hamming distance ≥ 2; the norm certificate is not required here,
/// so named examples may be built with it.
pub fn fixture_from_parts(
    shape: &Shape,
    indices: &[Vec<usize>],
    q: &[DMatrix<f64>],
    sigmas: &[f64],
    seed: u64,
) -> Result<GroundTruthFixture> {
    if indices.len() != sigmas.len() || q.len() != shape.order() {
        return Err(Error::InfeasibleFixture("mismatched fixture parts".into()));
    }
    for (k, a) in indices.iter().enumerate() {
        if a.len() != shape.order() || a.iter().zip(shape.dims()).any(|(&i, &n)| i >= n) {
            return Err(Error::InfeasibleFixture(format!("index {a:?} outside shape")));
        }
        if let Some(b) = indices[..k].iter().find(|b| hamming(a, b) < 2) {
            return Err(Error::InfeasibleFixture(format!(
                "indices {b:?} and {a:?} differ in fewer than 2 modes"
            )));
        }
    }
    let terms = indices
        .iter()
        .zip(sigmas)
        .map(|(a, &sigma)| {
            let parts = a
                .iter()
                .zip(q)
                .map(|(&i, qj)| qj.column(i).iter().copied().collect())
                .collect();
            Ok(Term {
                sigma,
                factors: MultiVector::new(parts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = canonicalize(&Decomposition::new(shape.clone(), terms)?)?;
    let tensor = reconstruct(&truth);
    Ok(GroundTruthFixture {
        name: None,
        seed,
        shape: shape.clone(),
        r: indices.len(),
        indices: indices.to_vec(),
        tensor,
        truth,
    })
}

fn identity_bases(shape: &Shape) -> Vec<DMatrix<f64>> {
    shape
        .dims()
        .iter()
        .map(|&n| DMatrix::identity(n, n))
        .collect()
}

/// `3 e1⊗e1⊗e1 + 2 e2⊗e2⊗e2` on `(2,2,2)`.
pub fn diagonal_example() -> GroundTruthFixture {
    let shape = Shape::new(vec![2, 2, 2]).expect("valid shape");
    let mut f = fixture_from_parts(
        &shape,
        &[vec![0, 0, 0], vec![1, 1, 1]],
        &identity_bases(&shape),
        &[3.0, 2.0],
        0,
    )
    .expect("valid example");
    f.name = Some("diagonal-example".into());
    f
}

/// The four-term critical SOD `v⊗v⊗v + v⊗w⊗w + w⊗v⊗w + w⊗w⊗v` with
/// `v = e1`, `w = e2`. The stored truth is that SOD. It is NOT the GSOD of
/// the tensor, which is `√2 (h0⊗h0⊗h0 + h1⊗h1⊗h1)` with
/// `h0 = (1,1)/√2`, `h1 = (1,−1)/√2`.
pub fn paper_example() -> GroundTruthFixture {
    let shape = Shape::new(vec![2, 2, 2]).expect("valid shape");
    let mut f = fixture_from_parts(
        &shape,
        &[vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]],
        &identity_bases(&shape),
        &[1.0; 4],
        0,
    )
    .expect("valid example");
    f.name = Some("paper-example".into());
    f
}
