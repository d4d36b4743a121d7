//! Classical Lumer-Giles semi-inner products on finite-dimensional complex
//! vectors.
//!
//! Two families: the Hilbert pairing and the Giles pairing on l^p (p > 1).
//! The project-wide convention is linearity in the SECOND argument and
//! conjugate homogeneity in the first, so for l^p
//!
//! ```text
//! [x, y] = ( sum_i conj(sgn(x_i)) |x_i|^(p-1) y_i ) / ||x||_p^(p-2)
//! ```
//!
//! with `sgn(z) = z/|z|` for `z != 0`, `sgn(0) = 0`, and `[0, y] = 0`. The
//! pairing need not be conjugate-symmetric; for p != 2 it generally is not.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CsipError, Result};

/// Descriptor of a classical semi-inner-product space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SipSpaceDescriptor {
    Hilbert { d: usize },
    #[serde(rename = "lp")]
    LpGiles { d: usize, p: f64 },
}

impl SipSpaceDescriptor {
    pub fn hilbert(d: usize) -> Self {
        SipSpaceDescriptor::Hilbert { d }
    }

    pub fn lp_giles(d: usize, p: f64) -> Self {
        SipSpaceDescriptor::LpGiles { d, p }
    }

    pub fn dim(&self) -> usize {
        match self {
            SipSpaceDescriptor::Hilbert { d } => *d,
            SipSpaceDescriptor::LpGiles { d, .. } => *d,
        }
    }

    /// p = 1 and p = infinity admit no Giles pairing of this form and are
    /// rejected here.
    pub fn validate(&self) -> Result<()> {
        match self {
            SipSpaceDescriptor::Hilbert { d } => {
                if *d == 0 {
                    return Err(CsipError::ShapeMismatch("Hilbert needs d >= 1".into()));
                }
            }
            SipSpaceDescriptor::LpGiles { d, p } => {
                if *d == 0 {
                    return Err(CsipError::ShapeMismatch("LpGiles needs d >= 1".into()));
                }
                if !(p.is_finite() && *p > 1.0) {
                    return Err(CsipError::Domain(format!(
                        "LpGiles exponent must satisfy 1 < p < inf, got {p}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            SipSpaceDescriptor::Hilbert { d } => format!("hilbert({d})"),
            SipSpaceDescriptor::LpGiles { d, p } => format!("lp({d},{p})"),
        }
    }
}

/// A vector tagged with the space it lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct SipVector {
    space: SipSpaceDescriptor,
    coords: Vec<Complex64>,
}

impl SipVector {
    pub fn new(space: SipSpaceDescriptor, coords: Vec<Complex64>) -> Result<Self> {
        space.validate()?;
        if coords.len() != space.dim() {
            return Err(CsipError::ShapeMismatch(format!(
                "vector of length {} in space {}",
                coords.len(),
                space.label()
            )));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CsipError::Domain("non-finite coordinate".into()));
        }
        Ok(Self { space, coords })
    }

    pub fn zero(space: SipSpaceDescriptor) -> Self {
        let d = space.dim();
        Self {
            space,
            coords: vec![Complex64::ZERO; d],
        }
    }

    pub fn space(&self) -> &SipSpaceDescriptor {
        &self.space
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(CsipError::DescriptorMismatch(format!(
                "{} vs {}",
                self.space.label(),
                other.space.label()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scalar_mul(&self, lambda: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            coords: self.coords.iter().map(|z| lambda * z).collect(),
        }
    }

    pub fn coordinate_norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn sgn(z: Complex64) -> Complex64 {
    let n = z.norm();
    if n == 0.0 {
        Complex64::ZERO
    } else {
        z / n
    }
}

fn lp_norm(coords: &[Complex64], p: f64) -> f64 {
    coords
        .iter()
        .map(|z| z.norm().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// The semi-inner product `[x, y]`, linear in `y`.
pub fn sip(x: &SipVector, y: &SipVector) -> Result<Complex64> {
    x.check_same_space(y)?;
    match x.space() {
        SipSpaceDescriptor::Hilbert { .. } => Ok(x
            .coords
            .iter()
            .zip(&y.coords)
            .map(|(a, b)| a.conj() * b)
            .sum()),
        SipSpaceDescriptor::LpGiles { p, .. } => {
            let nx = lp_norm(&x.coords, *p);
            if nx == 0.0 {
                return Ok(Complex64::ZERO);
            }
            let num: Complex64 = x
                .coords
                .iter()
                .zip(&y.coords)
                .map(|(a, b)| sgn(*a).conj() * a.norm().powf(p - 1.0) * b)
                .sum();
            Ok(num / nx.powf(p - 2.0))
        }
    }
}

/// `sqrt(Re [x, x])`; coincides with the Euclidean norm (Hilbert) or the
/// l^p norm (Giles).
pub fn sip_norm(x: &SipVector) -> f64 {
    let v = sip(x, x).expect("same space");
    v.re.max(0.0).sqrt()
}

/// Samples `Re [x + t y, y]` along a grid of real step sizes; the
/// orthogonality module uses this to certify continuity of the pairing.
pub fn sip_continuity_probe(x: &SipVector, y: &SipVector, t_grid: &[f64]) -> Result<Vec<f64>> {
    x.check_same_space(y)?;
    if t_grid.is_empty() {
        return Err(CsipError::Domain("empty continuity grid".into()));
    }
    t_grid
        .iter()
        .map(|&t| {
            let shifted = x.add(&y.scalar_mul(Complex64::new(t, 0.0)))?;
            Ok(sip(&shifted, y)?.re)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vector(space: SipSpaceDescriptor, coords: &[(f64, f64)]) -> SipVector {
        SipVector::new(space, coords.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn hilbert_orthonormal_basis() {
        let h2 = SipSpaceDescriptor::hilbert(2);
        let e1 = vector(h2.clone(), &[(1.0, 0.0), (0.0, 0.0)]);
        let e2 = vector(h2, &[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(sip(&e1, &e2).unwrap(), Complex64::ZERO);
    }

    #[test]
    fn giles_self_pairing_is_norm_squared() {
        let lp = SipSpaceDescriptor::lp_giles(2, 3.0);
        let x = vector(lp, &[(1.0, 0.0), (1.0, 0.0)]);
        let v = sip(&x, &x).unwrap();
        assert_relative_eq!(v.re, 2.0_f64.powf(2.0 / 3.0), max_relative = 1e-14);
        assert_relative_eq!(v.im, 0.0);
    }

    #[test]
    fn giles_formula_hand_value() {
        // [(1,1), (1,0)] over l^3: numerator 1, denominator 2^(1/3).
        let lp = SipSpaceDescriptor::lp_giles(2, 3.0);
        let x = vector(lp.clone(), &[(1.0, 0.0), (1.0, 0.0)]);
        let y = vector(lp, &[(1.0, 0.0), (0.0, 0.0)]);
        let v = sip(&x, &y).unwrap();
        assert_relative_eq!(v.re, 2.0_f64.powf(-1.0 / 3.0), max_relative = 1e-14);
        assert_relative_eq!(v.re, 0.7937005259840998, max_relative = 1e-12);
        assert_relative_eq!(v.im, 0.0);
    }

    #[test]
    fn sip_norm_examples() {
        let h2 = SipSpaceDescriptor::hilbert(2);
        assert_relative_eq!(sip_norm(&vector(h2.clone(), &[(3.0, 0.0), (4.0, 0.0)])), 5.0);
        let lp = SipSpaceDescriptor::lp_giles(2, 3.0);
        assert_relative_eq!(
            sip_norm(&vector(lp.clone(), &[(1.0, 0.0), (1.0, 0.0)])),
            2.0_f64.powf(1.0 / 3.0),
            max_relative = 1e-14
        );
        assert_eq!(sip_norm(&SipVector::zero(lp)), 0.0);
        assert_eq!(sip_norm(&SipVector::zero(h2)), 0.0);
    }

    #[test]
    fn continuity_probe_scalar_case() {
        let h1 = SipSpaceDescriptor::hilbert(1);
        let x = vector(h1.clone(), &[(1.0, 0.0)]);
        let y = vector(h1, &[(1.0, 0.0)]);
        let probe = sip_continuity_probe(&x, &y, &[0.1, 0.01]).unwrap();
        assert_relative_eq!(probe[0], 1.1);
        assert_relative_eq!(probe[1], 1.01);
    }

    #[test]
    fn continuity_probe_converges_for_giles() {
        let lp = SipSpaceDescriptor::lp_giles(2, 3.0);
        let x = vector(lp.clone(), &[(1.0, 0.0), (1.0, 0.0)]);
        let y = vector(lp, &[(1.0, 0.0), (-1.0, 0.0)]);
        // [x, y] = 0, so the probe must tend to 0.
        let grid = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
        let probe = sip_continuity_probe(&x, &y, &grid).unwrap();
        for w in probe.windows(2) {
            assert!(w[1].abs() <= w[0].abs() + 1e-12);
        }
        assert!(probe.last().unwrap().abs() < 1e-4);
    }

    #[test]
    fn continuity_probe_zero_direction() {
        let lp = SipSpaceDescriptor::lp_giles(2, 1.5);
        let x = vector(lp.clone(), &[(1.0, 0.0), (2.0, 0.0)]);
        let y = SipVector::zero(lp);
        let probe = sip_continuity_probe(&x, &y, &[0.1, 0.01]).unwrap();
        assert_eq!(probe, vec![0.0, 0.0]);
    }

    #[test]
    fn continuity_probe_rejects_empty_grid() {
        let h1 = SipSpaceDescriptor::hilbert(1);
        let x = vector(h1.clone(), &[(1.0, 0.0)]);
        let y = vector(h1, &[(1.0, 0.0)]);
        assert!(sip_continuity_probe(&x, &y, &[]).is_err());
    }

    #[test]
    fn descriptor_validation_rejects_bad_p() {
        assert!(SipSpaceDescriptor::lp_giles(2, 1.0).validate().is_err());
        assert!(SipSpaceDescriptor::lp_giles(2, f64::INFINITY).validate().is_err());
        assert!(SipSpaceDescriptor::lp_giles(2, 0.5).validate().is_err());
        assert!(SipSpaceDescriptor::lp_giles(2, 1.5).validate().is_ok());
        assert!(SipSpaceDescriptor::hilbert(0).validate().is_err());
    }

    #[test]
    fn space_mismatch_is_structural_error() {
        let x = vector(SipSpaceDescriptor::hilbert(2), &[(1.0, 0.0), (0.0, 0.0)]);
        let y = vector(
            SipSpaceDescriptor::lp_giles(2, 3.0),
            &[(1.0, 0.0), (0.0, 0.0)],
        );
        assert!(sip(&x, &y).is_err());
    }

    #[test]
    fn non_hermitian_witness_for_p_not_2() {
        let lp = SipSpaceDescriptor::lp_giles(2, 3.0);
        let x = vector(lp.clone(), &[(1.0, 0.0), (1.0, 0.0)]);
        let y = vector(lp, &[(1.0, 0.0), (0.0, 0.0)]);
        let xy = sip(&x, &y).unwrap();
        let yx = sip(&y, &x).unwrap();
        assert!((xy - yx.conj()).norm() > 0.01);
    }

    #[test]
    fn sgn_zero_rule_keeps_pairing_defined() {
        let lp = SipSpaceDescriptor::lp_giles(3, 2.5);
        let x = vector(lp.clone(), &[(1.0, 0.0), (0.0, 0.0), (2.0, 0.0)]);
        let y = vector(lp, &[(0.5, 0.5), (7.0, -1.0), (0.0, 1.0)]);
        let v = sip(&x, &y).unwrap();
        assert!(v.re.is_finite() && v.im.is_finite());
        // The middle coordinate of x contributes nothing.
        let expected = (x.coords()[0].conj() * 1.0_f64.powf(1.5) * y.coords()[0]
            + (x.coords()[2] / 2.0).conj() * 2.0_f64.powf(1.5) * y.coords()[2])
            / lp_norm(x.coords(), 2.5).powf(0.5);
        assert_relative_eq!(v.re, expected.re, max_relative = 1e-13);
        assert_relative_eq!(v.im, expected.im, max_relative = 1e-13);
    }
}
