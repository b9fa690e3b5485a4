//! Small dense vector helpers shared by the decomposition code.

use crate::tensor::{dot, norm};

/// Relative tolerance for deciding that two entries tie in magnitude.
pub(crate) const TIE_TOL: f64 = 1e-9;

/// Index of the largest-magnitude entry; among entries within `TIE_TOL`
/// (relative) of the maximum, the lowest index wins.
pub fn dominant_index(v: &[f64]) -> usize {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    v.iter()
        .position(|x| x.abs() >= max * (1.0 - TIE_TOL))
        .unwrap_or(0)
}

/// Removes the components of `v` along the orthonormal `basis`, twice.
pub(crate) fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
}

/// Orthonormal basis of `span(basis)^⊥` in `R^n`, from Gram–Schmidt on the
/// canonical vectors `e_1, …, e_n` in order. `basis` must be orthonormal.
pub fn orthonormal_complement(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let target = n.saturating_sub(basis.len());
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    let mut out = Vec::with_capacity(target);
    for i in 0..n {
        if out.len() == target {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        project_out(&mut v, &all);
        let len = norm(&v);
        // e_i has unit length, so anything this short is (numerically) inside the span.
        if len > 1e-6 {
            v.iter_mut().for_each(|x| *x /= len);
            all.push(v.clone());
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_index_breaks_near_ties_low() {
        assert_eq!(dominant_index(&[0.1, -0.9, 0.3]), 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(dominant_index(&[s * (1.0 - 1e-15), -s]), 0);
        assert_eq!(dominant_index(&[0.0, 0.0]), 0);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal_to_basis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let basis = vec![vec![s, s, 0.0]];
        let comp = orthonormal_complement(&basis, 3);
        assert_eq!(comp.len(), 2);
        for (i, c) in comp.iter().enumerate() {
            assert!((norm(c) - 1.0).abs() < 1e-14);
            assert!(dot(c, &basis[0]).abs() < 1e-14);
            for d in &comp[..i] {
                assert!(dot(c, d).abs() < 1e-14);
            }
        }
        assert!(orthonormal_complement(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).is_empty());
        assert_eq!(orthonormal_complement(&[], 2), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }
}
