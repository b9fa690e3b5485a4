//! Multistart higher-order power iteration over the torus.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::tensor::{dot, norm, DenseTensor, MultiVector, TorusPoint};

use super::SolverOptions;

/// Canonical-basis starts are added when the tensor has at most this many
/// coefficients.
const CANONICAL_START_LIMIT: usize = 64;

/// Where the winning power-iteration run was started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Hosvd,
    /// Flat index of the canonical multi-index `(e_{α_1}, …, e_{α_p})`.
    Canonical(usize),
    /// Random restart `i`, seeded with `seed ^ i`.
    Random(usize),
}

#[derive(Debug, Clone)]
pub struct SpectralMax {
    /// `|A[w]| ≥ 0`; zero for the zero tensor.
    pub sigma: f64,
    pub point: TorusPoint,
    pub start: Start,
    pub iterations: usize,
    pub starts_run: usize,
    /// At least one run met the stopping criterion before the iteration cap.
    pub converged: bool,
    pub kkt_residual: f64,
}

pub(crate) struct PowerRun {
    pub point: MultiVector,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Cyclic updates `u_j ← z_j(u) / ‖z_j(u)‖` until the relative change of
/// `A[u]` drops below `value_tol` or `max_iters` sweeps are done.
pub(crate) fn power_iterate(
    a: &DenseTensor,
    mut u: MultiVector,
    max_iters: usize,
    value_tol: f64,
) -> PowerRun {
    let p = a.order();
    let mut value = f64::NAN;
    for iter in 1..=max_iters {
        let mut last = 0.0;
        for j in 0..p {
            let z = a.contract_except(&u, &[j]).coeffs().to_vec();
            let n = norm(&z);
            if n > 0.0 {
                *u.part_mut(j) = z.into_iter().map(|x| x / n).collect();
            }
            last = n;
        }
        let prev = value;
        value = last;
        if p == 1 || (iter > 1 && (value - prev).abs() <= value_tol * value.abs().max(f64::MIN_POSITIVE)) {
            return PowerRun {
                point: u,
                value,
                iterations: iter,
                converged: true,
            };
        }
    }
    let value = a.evaluate(&u).unwrap_or(value);
    PowerRun {
        point: u,
        value,
        iterations: max_iters,
        converged: false,
    }
}

/// `max_j ‖z_j(u) − A[u]·u_j‖₂`.
pub(crate) fn kkt_residual(a: &DenseTensor, u: &MultiVector) -> f64 {
    let lambda = a.evaluate(u).expect("conforming point");
    let z = a.gradient_components(u).expect("conforming point");
    (0..u.order())
        .map(|j| {
            z.part(j)
                .iter()
                .zip(u.part(j))
                .map(|(zj, uj)| (zj - lambda * uj).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Dominant left singular vector of every unfolding.
pub(crate) fn hosvd_start(a: &DenseTensor) -> MultiVector {
    let dims = a.dims();
    let shape = a.shape();
    let parts = (0..a.order())
        .map(|j| {
            let nj = dims[j];
            let mut gram = DMatrix::<f64>::zeros(nj, nj);
            // Rows of the mode-j unfolding, indexed by the remaining modes.
            let cols = shape.size() / nj;
            let mut unfolding = DMatrix::<f64>::zeros(nj, cols);
            let mut col_of = vec![0usize; nj];
            for (flat, &c) in a.coeffs().iter().enumerate() {
                let i = shape.multi_index(flat)[j];
                unfolding[(i, col_of[i])] = c;
                col_of[i] += 1;
            }
            gram.gemm(1.0, &unfolding, &unfolding.transpose(), 0.0);
            let eig = SymmetricEigen::new(gram);
            let best = eig.eigenvalues.imax();
            let mut v: Vec<f64> = eig.eigenvectors.column(best).iter().copied().collect();
            let n = norm(&v);
            if n == 0.0 || !n.is_finite() {
                v = vec![0.0; nj];
                v[0] = 1.0;
            } else {
                v.iter_mut().for_each(|x| *x /= n);
            }
            v
        })
        .collect();
    MultiVector::new(parts).expect("nonempty finite parts")
}

pub(crate) fn random_torus_point(dims: &[usize], seed: u64) -> MultiVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts = dims
        .iter()
        .map(|&n| {
            let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let len = norm(&v);
            if len == 0.0 {
                v[0] = 1.0;
            } else {
                v.iter_mut().for_each(|x| *x /= len);
            }
            v
        })
        .collect();
    MultiVector::new(parts).expect("nonempty finite parts")
}

/// Newton's method on `z_j(u) = λ_j u_j`, `‖u_j‖² = 1`. Returns the polished
/// point if it lowers the KKT residual without leaving a small neighbourhood
/// of `u`.
pub(crate) fn newton_polish(a: &DenseTensor, u: &MultiVector, max_steps: usize) -> MultiVector {
    let p = a.order();
    if p < 2 {
        return u.clone();
    }
    let dims = a.dims().to_vec();
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

    let mut best = u.clone();
    let mut best_res = kkt_residual(a, u);
    let mut current = u.clone();
    for _ in 0..max_steps {
        if best_res <= 1e-15 * a.frobenius_norm().max(1.0) {
            break;
        }
        let z = a.gradient_components(&current).expect("conforming point");
        let lambda = a.evaluate(&current).expect("conforming point");
        let mut jac = DMatrix::<f64>::zeros(size, size);
        let mut rhs = DVector::<f64>::zeros(size);
        for j in 0..p {
            let uj = current.part(j);
            for a_idx in 0..dims[j] {
                let row = offsets[j] + a_idx;
                rhs[row] = -(z.part(j)[a_idx] - lambda * uj[a_idx]);
                jac[(row, offsets[j] + a_idx)] = -lambda;
                jac[(row, total + j)] = -uj[a_idx];
            }
            let norm_row = total + j;
            rhs[norm_row] = -0.5 * (dot(uj, uj) - 1.0);
            for b in 0..dims[j] {
                jac[(norm_row, offsets[j] + b)] = uj[b];
            }
            for i in 0..p {
                if i == j {
                    continue;
                }
                let (lo, hi) = (i.min(j), i.max(j));
                let block = a.contract_except(&current, &[lo, hi]);
                let c = block.coeffs();
                for a_idx in 0..dims[j] {
                    for b in 0..dims[i] {
                        let v = if j < i {
                            c[a_idx * dims[i] + b]
                        } else {
                            c[b * dims[j] + a_idx]
                        };
                        jac[(offsets[j] + a_idx, offsets[i] + b)] = v;
                    }
                }
            }
        }
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        if step.iter().any(|x| !x.is_finite()) {
            break;
        }
        let mut next = current.clone();
        for j in 0..p {
            let part = next.part_mut(j);
            for (a_idx, x) in part.iter_mut().enumerate() {
                *x += step[offsets[j] + a_idx];
            }
            let n = norm(part);
            if n == 0.0 {
                return best;
            }
            part.iter_mut().for_each(|x| *x /= n);
        }
        let moved = (0..p)
            .map(|j| {
                next.part(j)
                    .iter()
                    .zip(u.part(j))
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if moved > 1e-3 {
            break;
        }
        let res = kkt_residual(a, &next);
        current = next;
        if res < best_res {
            best_res = res;
            best = current.clone();
        } else {
            break;
        }
    }
    best
}

/// Best-effort global maximum of `A[u]` over the torus.
///
/// Runs power iteration from the HOSVD point, from every canonical-basis
/// point when the tensor has at most 64 coefficients, and from
/// `opts.restarts` seeded random points. The best run is polished by Newton
/// steps and its sign is fixed so that the returned `sigma` is nonnegative.
pub fn spectral_max(a: &DenseTensor, opts: &SolverOptions) -> Result<SpectralMax> {
    opts.validate()?;
    let shape = a.shape();
    if a.is_zero() {
        let point = TorusPoint::new(MultiVector::canonical(shape, &vec![0; a.order()]))?;
        return Ok(SpectralMax {
            sigma: 0.0,
            point,
            start: Start::Hosvd,
            iterations: 0,
            starts_run: 0,
            converged: true,
            kkt_residual: 0.0,
        });
    }

    let mut starts: Vec<(Start, MultiVector)> = vec![(Start::Hosvd, hosvd_start(a))];
    if shape.size() <= CANONICAL_START_LIMIT {
        for flat in 0..shape.size() {
            starts.push((
                Start::Canonical(flat),
                MultiVector::canonical(shape, &shape.multi_index(flat)),
            ));
        }
    }
    for i in 0..opts.restarts {
        starts.push((Start::Random(i), random_torus_point(a.dims(), opts.seed ^ i as u64)));
    }

    let starts_run = starts.len();
    let mut converged_any = false;
    let mut best: Option<(Start, PowerRun)> = None;
    for (label, start) in starts {
        let run = power_iterate(a, start, opts.max_power_iters, opts.value_tol);
        converged_any |= run.converged;
        let better = match &best {
            None => true,
            Some((_, b)) => run.value > b.value,
        };
        if better {
            best = Some((label, run));
        }
    }
    let (start, run) = best.expect("at least one start");

    let mut point = newton_polish(a, &run.point, 8);
    let mut sigma = a.evaluate(&point)?;
    if sigma < 0.0 {
        sigma = -sigma;
        point.negate_mode(a.order() - 1);
    }
    let kkt = kkt_residual(a, &point);
    Ok(SpectralMax {
        sigma,
        point: TorusPoint::normalize(point)?,
        start,
        iterations: run.iterations,
        starts_run,
        converged: converged_any,
        kkt_residual: kkt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Shape;

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn dominant_singular_value_of_diagonal_matrix() {
        let a = DenseTensor::from_entries(shape(&[2, 2]), &[(vec![0, 0], 5.0), (vec![1, 1], 3.0)])
            .unwrap();
        let m = spectral_max(&a, &SolverOptions::default()).unwrap();
        assert!((m.sigma - 5.0).abs() < 1e-12);
        assert!((m.point.part(0)[0].abs() - 1.0).abs() < 1e-12);
        assert!((m.point.part(1)[0].abs() - 1.0).abs() < 1e-12);
        assert!(m.point.part(0)[0] * m.point.part(1)[0] > 0.0);
    }

    #[test]
    fn zero_tensor_signals_zero() {
        let m = spectral_max(&DenseTensor::zeros(shape(&[2, 3])), &SolverOptions::default()).unwrap();
        assert_eq!(m.sigma, 0.0);
    }

    #[test]
    fn linear_form_maximum_is_its_norm() {
        let a = DenseTensor::new(shape(&[3]), vec![3.0, 0.0, -4.0]).unwrap();
        let m = spectral_max(&a, &SolverOptions::default()).unwrap();
        assert!((m.sigma - 5.0).abs() < 1e-14);
        assert!((m.point.part(0)[2] + 0.8).abs() < 1e-14);
    }

    #[test]
    fn paper_tensor_maximum_is_sqrt_two() {
        let a = DenseTensor::from_entries(
            shape(&[2, 2, 2]),
            &[
                (vec![0, 0, 0], 1.0),
                (vec![0, 1, 1], 1.0),
                (vec![1, 0, 1], 1.0),
                (vec![1, 1, 0], 1.0),
            ],
        )
        .unwrap();
        let m = spectral_max(&a, &SolverOptions::default()).unwrap();
        assert!((m.sigma - std::f64::consts::SQRT_2).abs() < 1e-12, "{}", m.sigma);
        assert!(m.kkt_residual < 1e-12);
    }

    #[test]
    fn newton_polish_sharpens_a_rough_point() {
        let a = DenseTensor::from_entries(
            shape(&[2, 2, 2]),
            &[(vec![0, 0, 0], 3.0), (vec![1, 1, 1], 2.0)],
        )
        .unwrap();
        let rough = MultiVector::new(vec![vec![1.0, 1e-4], vec![1.0, -2e-4], vec![1.0, 3e-4]]).unwrap();
        let rough = TorusPoint::normalize(rough).unwrap().into_multivector();
        let polished = newton_polish(&a, &rough, 8);
        assert!(kkt_residual(&a, &polished) < 1e-14);
        assert!(kkt_residual(&a, &rough) > 1e-5);
    }

    #[test]
    fn seeded_starts_are_reproducible() {
        assert_eq!(random_torus_point(&[3, 2], 7), random_torus_point(&[3, 2], 7));
        assert_ne!(random_torus_point(&[3, 2], 7), random_torus_point(&[3, 2], 8));
    }
}
