//! Finite-dimensional C*-algebra kernel.
//!
//! Three families of algebras are realized concretely: bounded functions on a
//! finite set (diagonal / commutative case), full matrix algebras, and finite
//! direct sums of either. All elements are dense complex payloads; positivity,
//! order, square roots, and regularized inverses are computed spectrally.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CsipError, Result};

/// Tolerances shared by equality, positivity, and optimizer convergence tests.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct NumericPolicy {
    /// Relative tolerance for element equality.
    #[serde(default = "default_tol_eq")]
    pub tol_eq: f64,
    /// Eigenvalue positivity slack, relative to `1 + norm`.
    #[serde(default = "default_tol_pos")]
    pub tol_pos: f64,
    /// Convergence threshold for derivative-free minimization.
    #[serde(default = "default_tol_opt")]
    pub tol_opt: f64,
}

fn default_tol_eq() -> f64 {
    1e-9
}
fn default_tol_pos() -> f64 {
    1e-9
}
fn default_tol_opt() -> f64 {
    1e-8
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            tol_eq: default_tol_eq(),
            tol_pos: default_tol_pos(),
            tol_opt: default_tol_opt(),
        }
    }
}

impl NumericPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.tol_eq < 0.0 || self.tol_pos < 0.0 || self.tol_opt < 0.0 {
            return Err(CsipError::Domain(
                "tolerances must be nonnegative".to_string(),
            ));
        }
        Ok(())
    }
}

/// Structural description of a finite-dimensional C*-algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraDescriptor {
    /// Bounded complex functions on a set of `m` points.
    Functions { m: usize },
    /// Full algebra of `n x n` complex matrices.
    Matrices { n: usize },
    /// Direct sum with blockwise operations and max norm.
    DirectSum { parts: Vec<AlgebraDescriptor> },
}

impl AlgebraDescriptor {
    pub fn functions(m: usize) -> Self {
        AlgebraDescriptor::Functions { m }
    }

    pub fn matrices(n: usize) -> Self {
        AlgebraDescriptor::Matrices { n }
    }

    pub fn direct_sum(parts: Vec<AlgebraDescriptor>) -> Self {
        AlgebraDescriptor::DirectSum { parts }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgebraDescriptor::Functions { m } => {
                if *m == 0 {
                    return Err(CsipError::ShapeMismatch("Functions needs m >= 1".into()));
                }
            }
            AlgebraDescriptor::Matrices { n } => {
                if *n == 0 {
                    return Err(CsipError::ShapeMismatch("Matrices needs n >= 1".into()));
                }
            }
            AlgebraDescriptor::DirectSum { parts } => {
                if parts.is_empty() {
                    return Err(CsipError::ShapeMismatch(
                        "DirectSum needs at least one part".into(),
                    ));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Real dimension of the self-adjoint part (`m` for functions, `n^2` for
    /// matrices). This is the span target for fullness checks.
    pub fn self_adjoint_dim(&self) -> usize {
        match self {
            AlgebraDescriptor::Functions { m } => *m,
            AlgebraDescriptor::Matrices { n } => n * n,
            AlgebraDescriptor::DirectSum { parts } => {
                parts.iter().map(|p| p.self_adjoint_dim()).sum()
            }
        }
    }

    /// True when every block is commutative (no matrix block of size > 1).
    pub fn is_commutative(&self) -> bool {
        match self {
            AlgebraDescriptor::Functions { .. } => true,
            AlgebraDescriptor::Matrices { n } => *n == 1,
            AlgebraDescriptor::DirectSum { parts } => parts.iter().all(|p| p.is_commutative()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            AlgebraDescriptor::Functions { m } => format!("functions({m})"),
            AlgebraDescriptor::Matrices { n } => format!("matrices({n})"),
            AlgebraDescriptor::DirectSum { parts } => {
                let inner: Vec<String> = parts.iter().map(|p| p.label()).collect();
                format!("direct_sum({})", inner.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum AlgebraData {
    Functions(Vec<Complex64>),
    Matrices(DMatrix<Complex64>),
    DirectSum(Vec<AlgebraElement>),
}

/// An element of a finite-dimensional C*-algebra.
///
/// The payload shape always matches the descriptor; constructors and literal
/// parsing enforce this, so arithmetic only revalidates descriptor equality.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    desc: AlgebraDescriptor,
    data: AlgebraData,
}

impl AlgebraElement {
    pub fn from_functions(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(CsipError::ShapeMismatch("empty function payload".into()));
        }
        ensure_finite(values.iter())?;
        Ok(Self {
            desc: AlgebraDescriptor::functions(values.len()),
            data: AlgebraData::Functions(values),
        })
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(CsipError::ShapeMismatch(format!(
                "matrix payload must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        ensure_finite(m.iter())?;
        Ok(Self {
            desc: AlgebraDescriptor::matrices(m.nrows()),
            data: AlgebraData::Matrices(m),
        })
    }

    pub fn from_blocks(blocks: Vec<AlgebraElement>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(CsipError::ShapeMismatch("empty direct sum".into()));
        }
        let desc =
            AlgebraDescriptor::direct_sum(blocks.iter().map(|b| b.descriptor().clone()).collect());
        Ok(Self {
            desc,
            data: AlgebraData::DirectSum(blocks),
        })
    }

    pub fn zero(desc: &AlgebraDescriptor) -> Self {
        let data = match desc {
            AlgebraDescriptor::Functions { m } => {
                AlgebraData::Functions(vec![Complex64::ZERO; *m])
            }
            AlgebraDescriptor::Matrices { n } => AlgebraData::Matrices(DMatrix::zeros(*n, *n)),
            AlgebraDescriptor::DirectSum { parts } => {
                AlgebraData::DirectSum(parts.iter().map(AlgebraElement::zero).collect())
            }
        };
        Self {
            desc: desc.clone(),
            data,
        }
    }

    /// The multiplicative unit (all algebras here are unital).
    pub fn unit(desc: &AlgebraDescriptor) -> Self {
        let data = match desc {
            AlgebraDescriptor::Functions { m } => {
                AlgebraData::Functions(vec![Complex64::ONE; *m])
            }
            AlgebraDescriptor::Matrices { n } => AlgebraData::Matrices(DMatrix::identity(*n, *n)),
            AlgebraDescriptor::DirectSum { parts } => {
                AlgebraData::DirectSum(parts.iter().map(AlgebraElement::unit).collect())
            }
        };
        Self {
            desc: desc.clone(),
            data,
        }
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        &self.desc
    }

    pub(crate) fn data(&self) -> &AlgebraData {
        &self.data
    }

    pub fn function_values(&self) -> Option<&[Complex64]> {
        match &self.data {
            AlgebraData::Functions(v) => Some(v),
            _ => None,
        }
    }

    pub fn matrix(&self) -> Option<&DMatrix<Complex64>> {
        match &self.data {
            AlgebraData::Matrices(m) => Some(m),
            _ => None,
        }
    }

    pub fn blocks(&self) -> Option<&[AlgebraElement]> {
        match &self.data {
            AlgebraData::DirectSum(b) => Some(b),
            _ => None,
        }
    }

    fn check_same_descriptor(&self, other: &Self) -> Result<()> {
        if self.desc != other.desc {
            return Err(CsipError::DescriptorMismatch(format!(
                "{} vs {}",
                self.desc.label(),
                other.desc.label()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_descriptor(other)?;
        Ok(self.zip(other, |a, b| a + b, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_descriptor(other)?;
        Ok(self.zip(other, |a, b| a - b, |a, b| a - b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_descriptor(other)?;
        let data = match (&self.data, &other.data) {
            (AlgebraData::Functions(a), AlgebraData::Functions(b)) => {
                AlgebraData::Functions(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            (AlgebraData::Matrices(a), AlgebraData::Matrices(b)) => AlgebraData::Matrices(a * b),
            (AlgebraData::DirectSum(a), AlgebraData::DirectSum(b)) => AlgebraData::DirectSum(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.mul(y))
                    .collect::<Result<_>>()?,
            ),
            _ => unreachable!("descriptor equality implies matching payloads"),
        };
        Ok(Self {
            desc: self.desc.clone(),
            data,
        })
    }

    /// The involution: complex conjugate / conjugate transpose, blockwise.
    pub fn star(&self) -> Self {
        let data = match &self.data {
            AlgebraData::Functions(v) => {
                AlgebraData::Functions(v.iter().map(|z| z.conj()).collect())
            }
            AlgebraData::Matrices(m) => AlgebraData::Matrices(m.adjoint()),
            AlgebraData::DirectSum(b) => {
                AlgebraData::DirectSum(b.iter().map(|x| x.star()).collect())
            }
        };
        Self {
            desc: self.desc.clone(),
            data,
        }
    }

    pub fn scalar_mul(&self, lambda: Complex64) -> Self {
        let data = match &self.data {
            AlgebraData::Functions(v) => {
                AlgebraData::Functions(v.iter().map(|z| lambda * z).collect())
            }
            AlgebraData::Matrices(m) => AlgebraData::Matrices(m * lambda),
            AlgebraData::DirectSum(b) => {
                AlgebraData::DirectSum(b.iter().map(|x| x.scalar_mul(lambda)).collect())
            }
        };
        Self {
            desc: self.desc.clone(),
            data,
        }
    }

    /// The C*-norm: max modulus for functions, largest singular value for
    /// matrices, max over blocks for direct sums.
    pub fn cstar_norm(&self) -> f64 {
        match &self.data {
            AlgebraData::Functions(v) => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
            AlgebraData::Matrices(m) => {
                let gram = m.adjoint() * m;
                let top = hermitian_eigenvalues(&gram)
                    .into_iter()
                    .fold(0.0, f64::max);
                top.max(0.0).sqrt()
            }
            AlgebraData::DirectSum(b) => b.iter().map(|x| x.cstar_norm()).fold(0.0, f64::max),
        }
    }

    /// Euclidean norm of the raw coordinates; used for degeneracy checks only.
    pub fn coordinate_norm(&self) -> f64 {
        match &self.data {
            AlgebraData::Functions(v) => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            AlgebraData::Matrices(m) => m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            AlgebraData::DirectSum(b) => b
                .iter()
                .map(|x| x.coordinate_norm().powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.cstar_norm())
    }

    /// Relative equality at `tol_eq`.
    pub fn approx_eq(&self, other: &Self, policy: &NumericPolicy) -> Result<bool> {
        let d = self.distance(other)?;
        let scale = 1.0 + self.cstar_norm().max(other.cstar_norm());
        Ok(d <= policy.tol_eq * scale)
    }

    pub fn is_self_adjoint(&self, policy: &NumericPolicy) -> bool {
        let d = self
            .sub(&self.star())
            .expect("star preserves descriptor")
            .cstar_norm();
        d <= policy.tol_eq * (1.0 + self.cstar_norm())
    }

    /// Self-adjoint part `(a + a*)/2`.
    pub fn re(&self) -> Self {
        self.add(&self.star())
            .expect("star preserves descriptor")
            .scalar_mul(Complex64::new(0.5, 0.0))
    }

    /// Smallest spectral point, taken over all blocks. For function blocks the
    /// spectrum is the entry values (real parts; the self-adjointness gate is
    /// applied separately); for matrix blocks the Hermitian part is
    /// symmetrized before eigensolving.
    pub fn min_spectrum(&self) -> f64 {
        match &self.data {
            AlgebraData::Functions(v) => v.iter().map(|z| z.re).fold(f64::INFINITY, f64::min),
            AlgebraData::Matrices(m) => {
                let herm = (m + m.adjoint()).scale(0.5);
                hermitian_eigenvalues(&herm)
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
            }
            AlgebraData::DirectSum(b) => b
                .iter()
                .map(|x| x.min_spectrum())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Largest spectral point over all blocks (same conventions as
    /// [`Self::min_spectrum`]).
    pub fn max_spectrum(&self) -> f64 {
        match &self.data {
            AlgebraData::Functions(v) => v.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
            AlgebraData::Matrices(m) => {
                let herm = (m + m.adjoint()).scale(0.5);
                hermitian_eigenvalues(&herm)
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            AlgebraData::DirectSum(b) => b
                .iter()
                .map(|x| x.max_spectrum())
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Positivity: self-adjoint within `tol_eq` and spectrum bounded below by
    /// `-tol_pos * (1 + norm)`.
    pub fn is_positive(&self, policy: &NumericPolicy) -> bool {
        if !self.is_self_adjoint(policy) {
            return false;
        }
        // For functions, imaginary parts passed the self-adjointness gate;
        // the spectrum test below uses real parts only.
        self.min_spectrum() >= -policy.tol_pos * (1.0 + self.cstar_norm())
    }

    /// The order `a <= b` iff `b - a` is positive.
    pub fn leq(&self, other: &Self, policy: &NumericPolicy) -> Result<bool> {
        Ok(other.sub(self)?.is_positive(policy))
    }

    /// Signed slack of `self <= other`: the smallest spectral point of the
    /// difference, `-inf` on descriptor mismatch avoided by the caller.
    pub fn leq_margin(&self, other: &Self) -> Result<f64> {
        Ok(other.sub(self)?.min_spectrum())
    }

    /// Spectral map `f` applied to a self-adjoint element. Eigenvalues are
    /// passed through `f` as-is; callers clip as needed.
    fn spectral_map(&self, f: &impl Fn(f64) -> f64) -> Self {
        let data = match &self.data {
            AlgebraData::Functions(v) => {
                AlgebraData::Functions(v.iter().map(|z| Complex64::new(f(z.re), 0.0)).collect())
            }
            AlgebraData::Matrices(m) => {
                let herm = (m + m.adjoint()).scale(0.5);
                let eig = herm.symmetric_eigen();
                let n = m.nrows();
                let mut diag = DMatrix::<Complex64>::zeros(n, n);
                for i in 0..n {
                    diag[(i, i)] = Complex64::new(f(eig.eigenvalues[i]), 0.0);
                }
                let v = eig.eigenvectors;
                AlgebraData::Matrices(&v * diag * v.adjoint())
            }
            AlgebraData::DirectSum(b) => {
                AlgebraData::DirectSum(b.iter().map(|x| x.spectral_map(f)).collect())
            }
        };
        Self {
            desc: self.desc.clone(),
            data,
        }
    }

    /// Unique positive square root of a positive element. Tiny negative
    /// eigenvalues (floating-point residue of `[x, x]` computations) are
    /// clipped to zero before the root.
    pub fn sqrt_positive(&self, policy: &NumericPolicy) -> Result<Self> {
        if !self.is_positive(policy) {
            return Err(CsipError::Domain(
                "sqrt_positive requires a positive element".into(),
            ));
        }
        Ok(self.spectral_map(&|t: f64| t.max(0.0).sqrt()))
    }

    /// `(a + eps)^(-1/2)` for positive `a` and `eps > 0`; the shift keeps the
    /// spectrum at or above `eps`, so the inverse root is always defined.
    pub fn regularized_inv_sqrt(&self, eps: f64, policy: &NumericPolicy) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(CsipError::Domain(format!(
                "regularization must be positive, got {eps}"
            )));
        }
        if !self.is_positive(policy) {
            return Err(CsipError::Domain(
                "regularized_inv_sqrt requires a positive element".into(),
            ));
        }
        Ok(self.spectral_map(&|t: f64| 1.0 / (t.max(0.0) + eps).sqrt()))
    }

    /// `|a| = (a* a)^(1/2)`.
    pub fn abs(&self, policy: &NumericPolicy) -> Result<Self> {
        self.star().mul(self)?.sqrt_positive(policy)
    }

    /// `a* a`, exact (no eigensolve).
    pub fn abs_squared(&self) -> Self {
        self.star().mul(self).expect("same descriptor")
    }

    /// Checks `||a^3|| = ||a||^3` for self-adjoint `a`.
    pub fn cube_norm_identity_check(&self, policy: &NumericPolicy) -> Result<bool> {
        if !self.is_self_adjoint(policy) {
            return Err(CsipError::Precondition(
                "cube norm identity requires a self-adjoint element".into(),
            ));
        }
        let cubed = self.mul(self)?.mul(self)?;
        let lhs = cubed.cstar_norm();
        let rhs = self.cstar_norm().powi(3);
        Ok((lhs - rhs).abs() <= policy.tol_eq * (1.0 + rhs))
    }

    /// Flattens the self-adjoint coordinates: real entry values for function
    /// blocks; real diagonal plus (re, im) of the strict upper triangle for
    /// matrix blocks. Used by the fullness rank test.
    pub fn self_adjoint_coordinates(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.desc.self_adjoint_dim());
        self.push_sa_coords(&mut out);
        out
    }

    fn push_sa_coords(&self, out: &mut Vec<f64>) {
        match &self.data {
            AlgebraData::Functions(v) => out.extend(v.iter().map(|z| z.re)),
            AlgebraData::Matrices(m) => {
                let n = m.nrows();
                for i in 0..n {
                    out.push(m[(i, i)].re);
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        out.push(m[(i, j)].re);
                        out.push(m[(i, j)].im);
                    }
                }
            }
            AlgebraData::DirectSum(b) => {
                for x in b {
                    x.push_sa_coords(out);
                }
            }
        }
    }

    fn zip(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64 + Copy,
        fm: impl Fn(&DMatrix<Complex64>, &DMatrix<Complex64>) -> DMatrix<Complex64> + Copy,
    ) -> Self {
        let data = match (&self.data, &other.data) {
            (AlgebraData::Functions(a), AlgebraData::Functions(b)) => {
                AlgebraData::Functions(a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            }
            (AlgebraData::Matrices(a), AlgebraData::Matrices(b)) => {
                AlgebraData::Matrices(fm(a, b))
            }
            (AlgebraData::DirectSum(a), AlgebraData::DirectSum(b)) => {
                AlgebraData::DirectSum(a.iter().zip(b).map(|(x, y)| x.zip(y, f, fm)).collect())
            }
            _ => unreachable!("descriptor equality implies matching payloads"),
        };
        Self {
            desc: self.desc.clone(),
            data,
        }
    }
}

fn ensure_finite<'a>(values: impl Iterator<Item = &'a Complex64>) -> Result<()> {
    for z in values {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(CsipError::Domain("non-finite entry".into()));
        }
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix (the caller symmetrizes).
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    m.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn func(values: &[(f64, f64)]) -> AlgebraElement {
        AlgebraElement::from_functions(values.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    fn mat2(rows: [[Complex64; 2]; 2]) -> AlgebraElement {
        AlgebraElement::from_matrix(DMatrix::from_row_slice(
            2,
            2,
            &[rows[0][0], rows[0][1], rows[1][0], rows[1][1]],
        ))
        .unwrap()
    }

    #[test]
    fn add_is_componentwise() {
        let a = func(&[(1.0, 0.0), (2.0, 0.0)]);
        let b = func(&[(3.0, 0.0), (-2.0, 0.0)]);
        let s = a.add(&b).unwrap();
        assert_eq!(s.function_values().unwrap(), &[c(4.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn add_identity_matrices_1x1() {
        let a = AlgebraElement::from_matrix(DMatrix::from_element(1, 1, c(5.0, 0.0))).unwrap();
        let z = AlgebraElement::zero(a.descriptor());
        assert_eq!(a.add(&z).unwrap(), a);
    }

    #[test]
    fn add_blockwise_direct_sum() {
        let a = AlgebraElement::from_blocks(vec![
            func(&[(1.0, 0.0)]),
            AlgebraElement::from_matrix(DMatrix::from_element(1, 1, c(2.0, 0.0))).unwrap(),
        ])
        .unwrap();
        let b = AlgebraElement::from_blocks(vec![
            func(&[(1.0, 0.0)]),
            AlgebraElement::from_matrix(DMatrix::from_element(1, 1, c(-2.0, 0.0))).unwrap(),
        ])
        .unwrap();
        let s = a.add(&b).unwrap();
        let blocks = s.blocks().unwrap();
        assert_eq!(blocks[0].function_values().unwrap(), &[c(2.0, 0.0)]);
        assert_eq!(blocks[1].matrix().unwrap()[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn add_rejects_descriptor_mismatch() {
        let a = func(&[(1.0, 0.0), (2.0, 0.0)]);
        let b = func(&[(1.0, 0.0)]);
        assert!(matches!(
            a.add(&b),
            Err(CsipError::DescriptorMismatch(_))
        ));
    }

    #[test]
    fn star_conjugates_functions() {
        let a = func(&[(0.0, 1.0), (1.0, 0.0)]);
        assert_eq!(
            a.star().function_values().unwrap(),
            &[c(0.0, -1.0), c(1.0, 0.0)]
        );
    }

    #[test]
    fn star_transposes_matrices() {
        let a = mat2([
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let s = a.star();
        let m = s.matrix().unwrap();
        assert_eq!(m[(0, 1)], c(0.0, 0.0));
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
    }

    #[test]
    fn mul_is_pointwise_on_functions() {
        let a = func(&[(2.0, 0.0), (3.0, 0.0)]);
        let b = func(&[(1.0, 0.0), (0.0, 0.0)]);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.function_values().unwrap(), &[c(2.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn cstar_norm_examples() {
        assert_relative_eq!(func(&[(0.0, 3.0), (-4.0, 0.0)]).cstar_norm(), 4.0);
        let diag = mat2([
            [c(3.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-4.0, 0.0)],
        ]);
        assert_relative_eq!(diag.cstar_norm(), 4.0, max_relative = 1e-12);
        let ds = AlgebraElement::from_blocks(vec![func(&[(2.0, 0.0)]), func(&[(5.0, 0.0)])])
            .unwrap();
        assert_relative_eq!(ds.cstar_norm(), 5.0);
    }

    #[test]
    fn re_and_self_adjointness() {
        let policy = NumericPolicy::default();
        let a = func(&[(1.0, 2.0), (3.0, 0.0)]);
        assert_eq!(
            a.re().function_values().unwrap(),
            &[c(1.0, 0.0), c(3.0, 0.0)]
        );
        let b = mat2([
            [c(0.0, 0.0), c(2.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let h = b.re();
        let m = h.matrix().unwrap();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
        assert!(h.is_self_adjoint(&policy));
        assert!(!func(&[(0.0, 1.0)]).is_self_adjoint(&policy));
    }

    #[test]
    fn positivity_on_functions() {
        let policy = NumericPolicy::default();
        assert!(func(&[(1.0, 0.0), (2.0, 0.0)]).is_positive(&policy));
        assert!(!func(&[(1.0, 0.0), (-0.5, 0.0)]).is_positive(&policy));
    }

    #[test]
    fn positivity_on_matrices_eigenvalue_oracle() {
        // Characteristic polynomial oracle for [[2,1],[1,2]]:
        // lambda = ((a+d) +- sqrt((a-d)^2 + 4bc)) / 2 = 1, 3.
        let (a, b, cc, d) = (2.0, 1.0, 1.0, 2.0);
        let disc = ((a - d) * (a - d) + 4.0 * b * cc).sqrt();
        let lo = (a + d - disc) / 2.0;
        let hi = (a + d + disc) / 2.0;
        assert_relative_eq!(lo, 1.0);
        assert_relative_eq!(hi, 3.0);

        let policy = NumericPolicy::default();
        let m = mat2([
            [c(2.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(2.0, 0.0)],
        ]);
        assert!(m.is_positive(&policy));
        assert_relative_eq!(m.min_spectrum(), lo, max_relative = 1e-12);
    }

    #[test]
    fn leq_examples() {
        let policy = NumericPolicy::default();
        let a = func(&[(1.0, 0.0), (1.0, 0.0)]);
        let b = func(&[(2.0, 0.0), (1.0, 0.0)]);
        assert!(a.leq(&b, &policy).unwrap());

        let d13 = mat2([
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(3.0, 0.0)],
        ]);
        let d22 = mat2([
            [c(2.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(2.0, 0.0)],
        ]);
        assert!(!d13.leq(&d22, &policy).unwrap());
        assert!(d13.leq(&d13, &policy).unwrap());
    }

    #[test]
    fn sqrt_positive_pointwise_and_identity() {
        let policy = NumericPolicy::default();
        let a = func(&[(4.0, 0.0), (9.0, 0.0)]);
        let r = a.sqrt_positive(&policy).unwrap();
        assert_eq!(r.function_values().unwrap(), &[c(2.0, 0.0), c(3.0, 0.0)]);

        let id = AlgebraElement::unit(&AlgebraDescriptor::matrices(2));
        let rid = id.sqrt_positive(&policy).unwrap();
        assert!(rid.approx_eq(&id, &policy).unwrap());
    }

    #[test]
    fn sqrt_positive_spectral_oracle() {
        // Spectral oracle for [[2,1],[1,2]]: eigenpairs (1, (1,-1)/sqrt2),
        // (3, (1,1)/sqrt2) give sqrt = (1/2)[[1+s3, s3-1],[s3-1, 1+s3]].
        let s3 = 3.0_f64.sqrt();
        let policy = NumericPolicy::default();
        let m = mat2([
            [c(2.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(2.0, 0.0)],
        ]);
        let r = m.sqrt_positive(&policy).unwrap();
        let rm = r.matrix().unwrap();
        assert_relative_eq!(rm[(0, 0)].re, (1.0 + s3) / 2.0, max_relative = 1e-10);
        assert_relative_eq!(rm[(0, 1)].re, (s3 - 1.0) / 2.0, max_relative = 1e-10);
        assert_relative_eq!(rm[(1, 0)].re, (s3 - 1.0) / 2.0, max_relative = 1e-10);
        assert_relative_eq!(rm[(1, 1)].re, (1.0 + s3) / 2.0, max_relative = 1e-10);
        // Round trip.
        assert!(r.mul(&r).unwrap().approx_eq(&m, &policy).unwrap());
    }

    #[test]
    fn sqrt_rejects_non_positive() {
        let policy = NumericPolicy::default();
        assert!(matches!(
            func(&[(-1.0, 0.0)]).sqrt_positive(&policy),
            Err(CsipError::Domain(_))
        ));
    }

    #[test]
    fn regularized_inv_sqrt_examples() {
        let policy = NumericPolicy::default();
        let a = func(&[(3.0, 0.0)]);
        let r = a.regularized_inv_sqrt(1.0, &policy).unwrap();
        assert_relative_eq!(r.function_values().unwrap()[0].re, 0.5);

        let z = func(&[(0.0, 0.0), (0.0, 0.0)]);
        let r = z.regularized_inv_sqrt(4.0, &policy).unwrap();
        assert_eq!(r.function_values().unwrap(), &[c(0.5, 0.0), c(0.5, 0.0)]);

        let d = mat2([
            [c(3.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(8.0, 0.0)],
        ]);
        let r = d.regularized_inv_sqrt(1.0, &policy).unwrap();
        let rm = r.matrix().unwrap();
        assert_relative_eq!(rm[(0, 0)].re, 0.5, max_relative = 1e-12);
        assert_relative_eq!(rm[(1, 1)].re, 1.0 / 3.0, max_relative = 1e-12);

        assert!(matches!(
            a.regularized_inv_sqrt(0.0, &policy),
            Err(CsipError::Domain(_))
        ));
    }

    #[test]
    fn regularized_inv_sqrt_inverts_shifted_element() {
        let policy = NumericPolicy::default();
        let a = mat2([
            [c(2.0, 0.0), c(1.0, 0.5)],
            [c(1.0, -0.5), c(3.0, 0.0)],
        ]);
        let eps = 0.7;
        let r = a.regularized_inv_sqrt(eps, &policy).unwrap();
        let shifted = a
            .add(&AlgebraElement::unit(a.descriptor()).scalar_mul(c(eps, 0.0)))
            .unwrap();
        let prod = r.mul(&shifted).unwrap().mul(&r).unwrap();
        assert!(prod
            .approx_eq(&AlgebraElement::unit(a.descriptor()), &policy)
            .unwrap());
    }

    #[test]
    fn cube_norm_identity_examples() {
        let policy = NumericPolicy::default();
        assert!(func(&[(1.0, 0.0), (-2.0, 0.0)])
            .cube_norm_identity_check(&policy)
            .unwrap());
        let flip = mat2([
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(0.0, 0.0)],
        ]);
        assert!(flip.cube_norm_identity_check(&policy).unwrap());
        assert!(matches!(
            func(&[(0.0, 1.0)]).cube_norm_identity_check(&policy),
            Err(CsipError::Precondition(_))
        ));
    }

    #[test]
    fn cube_norm_identity_hermitian_3x3_eigen_oracle() {
        // Independent oracle: eigenvalues of a real symmetric 3x3 via the
        // trigonometric solution of the characteristic cubic.
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.3, 0.0),
                c(0.4, 0.0),
                c(-0.2, 0.0),
                c(0.4, 0.0),
                c(-0.7, 0.0),
                c(0.9, 0.0),
                c(-0.2, 0.0),
                c(0.9, 0.0),
                c(0.5, 0.0),
            ],
        );
        let a = AlgebraElement::from_matrix(m.clone()).unwrap();
        let policy = NumericPolicy::default();
        assert!(a.cube_norm_identity_check(&policy).unwrap());

        // Oracle eigenvalues.
        let q = (m[(0, 0)].re + m[(1, 1)].re + m[(2, 2)].re) / 3.0;
        let shifted: Vec<f64> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].re - if i == j { q } else { 0.0 })
            .collect();
        let p2: f64 = shifted.iter().map(|v| v * v).sum::<f64>() / 6.0;
        let p = p2.sqrt();
        let b: Vec<f64> = shifted.iter().map(|v| v / p).collect();
        // det(B)/2 for the 3x3 row-major b.
        let det_b = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6])
            + b[2] * (b[3] * b[7] - b[4] * b[6]);
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let eig1 = q + 2.0 * p * phi.cos();
        let eig3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let eig2 = 3.0 * q - eig1 - eig3;
        let max_abs = eig1.abs().max(eig2.abs()).max(eig3.abs());
        assert_relative_eq!(a.cstar_norm(), max_abs, max_relative = 1e-9);
        let cubed = a.mul(&a).unwrap().mul(&a).unwrap();
        assert_relative_eq!(cubed.cstar_norm(), max_abs.powi(3), max_relative = 1e-9);
    }

    #[test]
    fn self_adjoint_coordinate_dim_matches_descriptor() {
        let desc = AlgebraDescriptor::direct_sum(vec![
            AlgebraDescriptor::functions(2),
            AlgebraDescriptor::matrices(3),
        ]);
        let z = AlgebraElement::zero(&desc);
        assert_eq!(z.self_adjoint_coordinates().len(), desc.self_adjoint_dim());
        assert_eq!(desc.self_adjoint_dim(), 2 + 9);
    }

    #[test]
    fn descriptor_validation() {
        assert!(AlgebraDescriptor::functions(0).validate().is_err());
        assert!(AlgebraDescriptor::matrices(0).validate().is_err());
        assert!(AlgebraDescriptor::direct_sum(vec![]).validate().is_err());
        assert!(AlgebraDescriptor::direct_sum(vec![AlgebraDescriptor::functions(1)])
            .validate()
            .is_ok());
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(AlgebraElement::from_functions(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(AlgebraElement::from_functions(vec![c(0.0, f64::INFINITY)]).is_err());
    }
}
