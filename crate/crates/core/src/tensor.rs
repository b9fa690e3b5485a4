//! Dense real p-tensors viewed as multilinear forms.
//!
//! Coefficients are stored row-major with the last index varying fastest.
//! Multi-indices are 0-based everywhere in code and in the JSON interchange
//! format.
//!
//! Every contraction routine in this module contracts the highest-numbered
//! remaining mode first, so repeated evaluations are bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `‖u_j‖₂ - 1` accepted by [`TorusPoint::new`].
pub const TOL_UNIT: f64 = 1e-12;

/// Mode sizes `(n_1, …, n_p)` of a tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("order must be at least 1".into()));
        }
        if let Some(pos) = dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("mode {pos} has size 0")));
        }
        Ok(Shape(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Total coefficient count `n = n_1 ⋯ n_p`.
    pub fn size(&self) -> usize {
        self.0.iter().product()
    }

    pub fn dim(&self, mode: usize) -> usize {
        self.0[mode]
    }

    /// Row-major strides (last mode has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for j in (0..self.0.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.0[j + 1];
        }
        strides
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.0)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.0.len()];
        for j in (0..self.0.len()).rev() {
            index[j] = flat % self.0[j];
            flat /= self.0[j];
        }
        index
    }

    /// All multi-indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size()).map(move |flat| self.multi_index(flat))
    }

    fn check_conforms(&self, mv: &MultiVector) -> Result<()> {
        if mv.dims() != self.0 {
            return Err(Error::ShapeMismatch {
                expected: self.0.clone(),
                found: mv.dims(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Shape::new(dims)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(shape: Shape) -> Self {
        shape.0
    }
}

#[derive(Deserialize)]
struct RawTensor {
    shape: Shape,
    coeffs: Vec<f64>,
}

/// A dense real tensor `A` with coefficients `a_α`, `α ≤ ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct DenseTensor {
    shape: Shape,
    coeffs: Vec<f64>,
}

impl TryFrom<RawTensor> for DenseTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        DenseTensor::new(raw.shape, raw.coeffs)
    }
}

impl DenseTensor {
    pub fn new(shape: Shape, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != shape.size() {
            return Err(Error::CoeffCount {
                expected: shape.size(),
                found: coeffs.len(),
            });
        }
        if let Some(pos) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(DenseTensor { shape, coeffs })
    }

    pub fn zeros(shape: Shape) -> Self {
        let coeffs = vec![0.0; shape.size()];
        DenseTensor { shape, coeffs }
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let coeffs = shape.indices().map(|idx| f(&idx)).collect();
        DenseTensor::new(shape, coeffs)
    }

    /// Tensor with the listed (index, value) entries and zeros elsewhere.
    pub fn from_entries(shape: Shape, entries: &[(Vec<usize>, f64)]) -> Result<Self> {
        let mut tensor = DenseTensor::zeros(shape);
        for (index, value) in entries {
            if index.len() != tensor.order()
                || index.iter().zip(tensor.shape.dims()).any(|(&i, &n)| i >= n)
            {
                return Err(Error::InvalidShape(format!(
                    "index {index:?} outside shape {:?}",
                    tensor.shape.dims()
                )));
            }
            let flat = tensor.shape.flat_index(index);
            tensor.coeffs[flat] = *value;
        }
        if let Some(pos) = tensor.coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(tensor)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.coeffs[self.shape.flat_index(index)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// `self += scale * other`, coefficient-wise.
    pub fn add_scaled(&mut self, scale: f64, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.dims().to_vec(),
                found: other.shape.dims().to_vec(),
            });
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
        Ok(())
    }

    /// `‖self - other‖_F`.
    pub fn distance(&self, other: &DenseTensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.dims().to_vec(),
                found: other.shape.dims().to_vec(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// The multilinear form `A[u_1, …, u_p]`.
    pub fn evaluate(&self, u: &MultiVector) -> Result<f64> {
        self.shape.check_conforms(u)?;
        let mut dims = self.shape.dims().to_vec();
        let mut data = self.coeffs.clone();
        for j in (0..dims.len()).rev() {
            data = contract_axis(&data, &dims, j, u.part(j));
            dims.pop();
        }
        Ok(data[0])
    }

    /// Gradient components `z_j(u) = Σ_ℓ A[u_1,…,e_ℓ,…,u_p] e_ℓ`.
    pub fn gradient_components(&self, u: &MultiVector) -> Result<MultiVector> {
        self.shape.check_conforms(u)?;
        let parts = (0..self.order())
            .map(|j| self.contract_except(u, &[j]).coeffs)
            .collect();
        Ok(MultiVector { parts })
    }

    /// Contracts every mode not listed in `keep` against the matching part of
    /// `u`. The result has the kept modes in increasing order. `keep` must be
    /// nonempty and `u` must conform; both are the caller's responsibility.
    pub(crate) fn contract_except(&self, u: &MultiVector, keep: &[usize]) -> DenseTensor {
        let mut dims = self.shape.dims().to_vec();
        let mut data = self.coeffs.clone();
        for j in (0..self.order()).rev() {
            if keep.contains(&j) {
                continue;
            }
            data = contract_axis(&data, &dims, j, u.part(j));
            dims.remove(j);
        }
        DenseTensor {
            shape: Shape(dims),
            coeffs: data,
        }
    }

    /// Contracts a single mode against `v`, lowering the order by one.
    pub fn contract_mode(&self, mode: usize, v: &[f64]) -> Result<DenseTensor> {
        if self.order() < 2 {
            return Err(Error::InvalidShape(
                "cannot contract the only mode of an order-1 tensor".into(),
            ));
        }
        if mode >= self.order() || v.len() != self.dims()[mode] {
            return Err(Error::InvalidShape(format!(
                "mode {mode} contraction with a vector of length {}",
                v.len()
            )));
        }
        let data = contract_axis(&self.coeffs, self.dims(), mode, v);
        let mut dims = self.dims().to_vec();
        dims.remove(mode);
        Ok(DenseTensor {
            shape: Shape(dims),
            coeffs: data,
        })
    }

    /// Mode-`mode` product with the `rows × n_mode` matrix whose rows are
    /// given: the result has size `rows.len()` in that mode.
    pub fn mode_product(&self, mode: usize, rows: &[Vec<f64>]) -> Result<DenseTensor> {
        let dims = self.dims();
        if mode >= dims.len() || rows.is_empty() || rows.iter().any(|r| r.len() != dims[mode]) {
            return Err(Error::InvalidShape(format!(
                "mode {mode} product needs nonempty rows of length {}",
                dims.get(mode).copied().unwrap_or(0)
            )));
        }
        let n = dims[mode];
        let m = rows.len();
        let inner: usize = dims[mode + 1..].iter().product();
        let outer: usize = dims[..mode].iter().product();
        let mut out = vec![0.0; outer * m * inner];
        for o in 0..outer {
            for (a, row) in rows.iter().enumerate() {
                let dst = &mut out[(o * m + a) * inner..(o * m + a + 1) * inner];
                for (l, &r) in row.iter().enumerate() {
                    if r == 0.0 {
                        continue;
                    }
                    let src = &self.coeffs[(o * n + l) * inner..(o * n + l + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += r * s;
                    }
                }
            }
        }
        let mut new_dims = dims.to_vec();
        new_dims[mode] = m;
        Ok(DenseTensor {
            shape: Shape(new_dims),
            coeffs: out,
        })
    }
}

/// Contracts axis `axis` of a row-major array with dimensions `dims`.
fn contract_axis(data: &[f64], dims: &[usize], axis: usize, v: &[f64]) -> Vec<f64> {
    let n = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut out = vec![0.0; outer * inner];
    if inner == 1 {
        for (o, chunk) in data.chunks_exact(n).enumerate() {
            out[o] = chunk.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        return out;
    }
    for o in 0..outer {
        let dst = &mut out[o * inner..(o + 1) * inner];
        for (l, &vl) in v.iter().enumerate() {
            let src = &data[(o * n + l) * inner..(o * n + l + 1) * inner];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += vl * s;
            }
        }
    }
    out
}

#[derive(Deserialize)]
struct RawMultiVector {
    parts: Vec<Vec<f64>>,
}

/// A tuple `u = (u_1, …, u_p)` with one vector per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMultiVector")]
pub struct MultiVector {
    parts: Vec<Vec<f64>>,
}

impl TryFrom<RawMultiVector> for MultiVector {
    type Error = Error;

    fn try_from(raw: RawMultiVector) -> Result<Self> {
        MultiVector::new(raw.parts)
    }
}

impl MultiVector {
    pub fn new(parts: Vec<Vec<f64>>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidShape("multivector needs at least one part".into()));
        }
        if let Some(j) = parts.iter().position(|p| p.is_empty()) {
            return Err(Error::InvalidShape(format!("part {j} is empty")));
        }
        let mut offset = 0;
        for part in &parts {
            if let Some(pos) = part.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(offset + pos));
            }
            offset += part.len();
        }
        Ok(MultiVector { parts })
    }

    /// `(e_{α_1}, …, e_{α_p})` for the given shape and 0-based multi-index.
    pub fn canonical(shape: &Shape, index: &[usize]) -> Self {
        let parts = shape
            .dims()
            .iter()
            .zip(index)
            .map(|(&n, &i)| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        MultiVector { parts }
    }

    pub fn order(&self) -> usize {
        self.parts.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    pub fn part(&self, mode: usize) -> &[f64] {
        &self.parts[mode]
    }

    pub fn parts(&self) -> &[Vec<f64>] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Vec<f64>> {
        self.parts
    }

    pub(crate) fn part_mut(&mut self, mode: usize) -> &mut Vec<f64> {
        &mut self.parts[mode]
    }

    pub fn norms(&self) -> Vec<f64> {
        self.parts.iter().map(|p| norm(p)).collect()
    }

    /// Per-mode inner products `u_j · v_j`.
    pub fn mode_dots(&self, other: &MultiVector) -> Vec<f64> {
        self.parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| dot(a, b))
            .collect()
    }

    /// `⟨U, V⟩ = ∏_j u_j · v_j`.
    pub fn one_form_dot(&self, other: &MultiVector) -> f64 {
        self.mode_dots(other).iter().product()
    }

    pub fn negate_mode(&mut self, mode: usize) {
        for x in &mut self.parts[mode] {
            *x = -*x;
        }
    }

    /// Largest per-mode deviation `|‖u_j‖₂ - 1|`.
    pub fn unit_norm_error(&self) -> f64 {
        self.norms().iter().fold(0.0, |m, n| m.max((n - 1.0).abs()))
    }
}

/// A multivector with unit-norm parts, i.e. a point of the torus `T^ν`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TorusPoint(MultiVector);

impl TorusPoint {
    pub fn new(mv: MultiVector) -> Result<Self> {
        for (mode, n) in mv.norms().into_iter().enumerate() {
            if (n - 1.0).abs() > TOL_UNIT {
                return Err(Error::OffTorus { mode, norm: n });
            }
        }
        Ok(TorusPoint(mv))
    }

    /// Normalizes every part; fails if a part is zero.
    pub fn normalize(mut mv: MultiVector) -> Result<Self> {
        for mode in 0..mv.order() {
            let n = norm(mv.part(mode));
            if n == 0.0 {
                return Err(Error::OffTorus { mode, norm: 0.0 });
            }
            mv.part_mut(mode).iter_mut().for_each(|x| *x /= n);
        }
        Ok(TorusPoint(mv))
    }

    pub fn as_multivector(&self) -> &MultiVector {
        &self.0
    }

    pub fn into_multivector(self) -> MultiVector {
        self.0
    }
}

impl std::ops::Deref for TorusPoint {
    type Target = MultiVector;

    fn deref(&self) -> &MultiVector {
        &self.0
    }
}

/// A vector `ε ∈ {−1, +1}^p` of per-mode signs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignDistribution(Vec<i8>);

impl SignDistribution {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidShape(format!(
                "sign distribution must be a nonempty list of ±1, got {signs:?}"
            )));
        }
        Ok(SignDistribution(signs))
    }

    pub fn identity(order: usize) -> Self {
        SignDistribution(vec![1; order])
    }

    /// Bit `j` of `mask` set means mode `j` is negated.
    pub fn from_mask(order: usize, mask: u64) -> Self {
        SignDistribution(
            (0..order)
                .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    /// All `2^p` sign distributions, in mask order.
    pub fn all(order: usize) -> impl Iterator<Item = SignDistribution> {
        assert!(order < 64, "order too large to enumerate sign distributions");
        (0..1u64 << order).map(move |mask| SignDistribution::from_mask(order, mask))
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn parity(&self) -> i8 {
        self.0.iter().product()
    }

    pub fn is_even(&self) -> bool {
        self.parity() == 1
    }
}

impl TryFrom<Vec<i8>> for SignDistribution {
    type Error = Error;

    fn try_from(signs: Vec<i8>) -> Result<Self> {
        SignDistribution::new(signs)
    }
}

impl From<SignDistribution> for Vec<i8> {
    fn from(eps: SignDistribution) -> Self {
        eps.0
    }
}

/// `⟨A, B⟩ = Σ_α a_α b_α`.
pub fn inner_product(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch {
            expected: a.dims().to_vec(),
            found: b.dims().to_vec(),
        });
    }
    Ok(dot(&a.coeffs, &b.coeffs))
}

/// The rank-one tensor `w_1 ⊗ ⋯ ⊗ w_p`.
pub fn one_form(w: &MultiVector) -> DenseTensor {
    let mut coeffs = vec![1.0];
    for part in w.parts() {
        let mut next = Vec::with_capacity(coeffs.len() * part.len());
        for &c in &coeffs {
            next.extend(part.iter().map(|&x| c * x));
        }
        coeffs = next;
    }
    DenseTensor {
        shape: Shape(w.dims()),
        coeffs,
    }
}

/// Scales part `j` of `u` by `ε_j`.
pub fn apply_sign(u: &MultiVector, eps: &SignDistribution) -> Result<MultiVector> {
    if eps.order() != u.order() {
        return Err(Error::ShapeMismatch {
            expected: vec![u.order()],
            found: vec![eps.order()],
        });
    }
    let mut out = u.clone();
    for (mode, &s) in eps.signs().iter().enumerate() {
        if s < 0 {
            out.negate_mode(mode);
        }
    }
    Ok(out)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
