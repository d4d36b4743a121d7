//! C*-semi-inner-product module constructions.
//!
//! Four constructions are realized:
//!
//! - `Bundle`: sections through a finite family of classical s.i.p. fibers,
//!   a module over functions on the index set with pointwise pairing;
//! - `MatrixSelf`: the matrix algebra viewed as a module over itself with
//!   `[x, y] = x* y` (a Hilbert C*-module);
//! - `DirectSum`: blockwise sums over the direct-sum algebra;
//! - `Transported`: a module re-read over an isomorphic algebra, with
//!   `[., .]_B = psi([., .]_A)` and action through `psi^{-1}`.
//!
//! The transported pairing applies `psi` lazily at pairing time, so the
//! defining identity holds exactly rather than approximately.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{AlgebraDescriptor, AlgebraElement, NumericPolicy};
use crate::error::{CsipError, Result};
use crate::sip::{sip, SipSpaceDescriptor, SipVector};

/// A *-isomorphism between finite-dimensional C*-algebras.
#[derive(Clone, Debug, PartialEq)]
pub enum IsoDescriptor {
    /// Relabels the points of a finite set: `psi(a)_t = a_{perm[t]}`.
    PermuteOmega { perm: Vec<usize> },
    /// Conjugation by a unitary: `psi(a) = u a u*`.
    UnitaryConj { u: DMatrix<Complex64> },
}

impl IsoDescriptor {
    pub fn validate(&self, policy: &NumericPolicy) -> Result<()> {
        match self {
            IsoDescriptor::PermuteOmega { perm } => {
                let m = perm.len();
                if m == 0 {
                    return Err(CsipError::ShapeMismatch("empty permutation".into()));
                }
                let mut seen = vec![false; m];
                for &i in perm {
                    if i >= m || seen[i] {
                        return Err(CsipError::Domain(format!(
                            "not a bijection of 0..{m}: {perm:?}"
                        )));
                    }
                    seen[i] = true;
                }
            }
            IsoDescriptor::UnitaryConj { u } => {
                let n = u.nrows();
                if n == 0 || u.ncols() != n {
                    return Err(CsipError::ShapeMismatch("unitary must be square".into()));
                }
                let defect = (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n))
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if defect > policy.tol_eq * (n as f64) {
                    return Err(CsipError::Domain(format!(
                        "matrix is not unitary within tolerance (defect {defect:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Algebra this isomorphism acts on (domain and codomain coincide
    /// structurally for both kinds).
    pub fn algebra(&self) -> AlgebraDescriptor {
        match self {
            IsoDescriptor::PermuteOmega { perm } => AlgebraDescriptor::functions(perm.len()),
            IsoDescriptor::UnitaryConj { u } => AlgebraDescriptor::matrices(u.nrows()),
        }
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if *a.descriptor() != self.algebra() {
            return Err(CsipError::DescriptorMismatch(format!(
                "iso on {} applied to {}",
                self.algebra().label(),
                a.descriptor().label()
            )));
        }
        match self {
            IsoDescriptor::PermuteOmega { perm } => {
                let v = a.function_values().expect("functions payload");
                AlgebraElement::from_functions(perm.iter().map(|&i| v[i]).collect())
            }
            IsoDescriptor::UnitaryConj { u } => {
                let m = a.matrix().expect("matrix payload");
                AlgebraElement::from_matrix(u * m * u.adjoint())
            }
        }
    }

    pub fn apply_inv(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        if *b.descriptor() != self.algebra() {
            return Err(CsipError::DescriptorMismatch(format!(
                "iso on {} applied to {}",
                self.algebra().label(),
                b.descriptor().label()
            )));
        }
        match self {
            IsoDescriptor::PermuteOmega { perm } => {
                let v = b.function_values().expect("functions payload");
                let mut out = vec![Complex64::ZERO; v.len()];
                for (t, &i) in perm.iter().enumerate() {
                    out[i] = v[t];
                }
                AlgebraElement::from_functions(out)
            }
            IsoDescriptor::UnitaryConj { u } => {
                let m = b.matrix().expect("matrix payload");
                AlgebraElement::from_matrix(u.adjoint() * m * u)
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            IsoDescriptor::PermuteOmega { .. } => "permute",
            IsoDescriptor::UnitaryConj { .. } => "unitary",
        }
    }
}

/// Structural description of a C*-s.i.p. module.
#[derive(Clone, Debug, PartialEq)]
pub enum ModuleDescriptor {
    Bundle { fibers: Vec<SipSpaceDescriptor> },
    MatrixSelf { n: usize },
    DirectSum { parts: Vec<ModuleDescriptor> },
    Transported { base: Box<ModuleDescriptor>, iso: IsoDescriptor },
}

impl ModuleDescriptor {
    pub fn bundle(fibers: Vec<SipSpaceDescriptor>) -> Self {
        ModuleDescriptor::Bundle { fibers }
    }

    pub fn matrix_self(n: usize) -> Self {
        ModuleDescriptor::MatrixSelf { n }
    }

    pub fn direct_sum(parts: Vec<ModuleDescriptor>) -> Self {
        ModuleDescriptor::DirectSum { parts }
    }

    pub fn transported(base: ModuleDescriptor, iso: IsoDescriptor) -> Self {
        ModuleDescriptor::Transported {
            base: Box::new(base),
            iso,
        }
    }

    /// The coefficient algebra of the module.
    pub fn algebra(&self) -> AlgebraDescriptor {
        match self {
            ModuleDescriptor::Bundle { fibers } => AlgebraDescriptor::functions(fibers.len()),
            ModuleDescriptor::MatrixSelf { n } => AlgebraDescriptor::matrices(*n),
            ModuleDescriptor::DirectSum { parts } => {
                AlgebraDescriptor::direct_sum(parts.iter().map(|p| p.algebra()).collect())
            }
            ModuleDescriptor::Transported { iso, .. } => iso.algebra(),
        }
    }

    pub fn validate(&self, policy: &NumericPolicy) -> Result<()> {
        match self {
            ModuleDescriptor::Bundle { fibers } => {
                if fibers.is_empty() {
                    return Err(CsipError::ShapeMismatch(
                        "bundle needs at least one fiber".into(),
                    ));
                }
                for f in fibers {
                    f.validate()?;
                }
            }
            ModuleDescriptor::MatrixSelf { n } => {
                if *n == 0 {
                    return Err(CsipError::ShapeMismatch("MatrixSelf needs n >= 1".into()));
                }
            }
            ModuleDescriptor::DirectSum { parts } => {
                if parts.is_empty() {
                    return Err(CsipError::ShapeMismatch(
                        "DirectSum needs at least one part".into(),
                    ));
                }
                for p in parts {
                    p.validate(policy)?;
                }
            }
            ModuleDescriptor::Transported { base, iso } => {
                base.validate(policy)?;
                iso.validate(policy)?;
                if base.algebra() != iso.algebra() {
                    return Err(CsipError::DescriptorMismatch(format!(
                        "iso over {} cannot transport a module over {}",
                        iso.algebra().label(),
                        base.algebra().label()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            ModuleDescriptor::Bundle { fibers } => {
                let inner: Vec<String> = fibers.iter().map(|f| f.label()).collect();
                format!("bundle({})", inner.join(","))
            }
            ModuleDescriptor::MatrixSelf { n } => format!("matrix_self({n})"),
            ModuleDescriptor::DirectSum { parts } => {
                let inner: Vec<String> = parts.iter().map(|p| p.label()).collect();
                format!("direct_sum({})", inner.join(";"))
            }
            ModuleDescriptor::Transported { base, iso } => {
                format!("transported({},{})", base.label(), iso.label())
            }
        }
    }

    /// True when every fiber of every bundle below is Hilbert (the module is
    /// then an honest Hilbert C*-module).
    pub fn is_hilbert(&self) -> bool {
        match self {
            ModuleDescriptor::Bundle { fibers } => fibers
                .iter()
                .all(|f| matches!(f, SipSpaceDescriptor::Hilbert { .. })),
            ModuleDescriptor::MatrixSelf { .. } => true,
            ModuleDescriptor::DirectSum { parts } => parts.iter().all(|p| p.is_hilbert()),
            ModuleDescriptor::Transported { base, .. } => base.is_hilbert(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum ModulePayload {
    Bundle(Vec<SipVector>),
    Matrix(DMatrix<Complex64>),
    DirectSum(Vec<ModuleElement>),
    Transported(Box<ModuleElement>),
}

/// An element of a C*-s.i.p. module.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    desc: ModuleDescriptor,
    payload: ModulePayload,
}

impl ModuleElement {
    pub fn from_sections(fibers: Vec<SipVector>) -> Result<Self> {
        if fibers.is_empty() {
            return Err(CsipError::ShapeMismatch("empty section list".into()));
        }
        let desc = ModuleDescriptor::bundle(fibers.iter().map(|f| f.space().clone()).collect());
        Ok(Self {
            desc,
            payload: ModulePayload::Bundle(fibers),
        })
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(CsipError::ShapeMismatch(
                "matrix module element must be square".into(),
            ));
        }
        let desc = ModuleDescriptor::matrix_self(m.nrows());
        Ok(Self {
            desc,
            payload: ModulePayload::Matrix(m),
        })
    }

    pub fn from_parts(parts: Vec<ModuleElement>) -> Result<Self> {
        if parts.is_empty() {
            return Err(CsipError::ShapeMismatch("empty direct sum".into()));
        }
        let desc =
            ModuleDescriptor::direct_sum(parts.iter().map(|p| p.descriptor().clone()).collect());
        Ok(Self {
            desc,
            payload: ModulePayload::DirectSum(parts),
        })
    }

    /// Wraps a base element as an element of the transported module.
    pub fn transported(base: ModuleElement, iso: IsoDescriptor) -> Result<Self> {
        if base.descriptor().algebra() != iso.algebra() {
            return Err(CsipError::DescriptorMismatch(
                "iso does not act on the base module's algebra".into(),
            ));
        }
        let desc = ModuleDescriptor::transported(base.descriptor().clone(), iso);
        Ok(Self {
            desc,
            payload: ModulePayload::Transported(Box::new(base)),
        })
    }

    pub fn zero(desc: &ModuleDescriptor) -> Self {
        let payload = match desc {
            ModuleDescriptor::Bundle { fibers } => ModulePayload::Bundle(
                fibers.iter().map(|f| SipVector::zero(f.clone())).collect(),
            ),
            ModuleDescriptor::MatrixSelf { n } => ModulePayload::Matrix(DMatrix::zeros(*n, *n)),
            ModuleDescriptor::DirectSum { parts } => {
                ModulePayload::DirectSum(parts.iter().map(ModuleElement::zero).collect())
            }
            ModuleDescriptor::Transported { base, .. } => {
                ModulePayload::Transported(Box::new(ModuleElement::zero(base)))
            }
        };
        Self {
            desc: desc.clone(),
            payload,
        }
    }

    pub fn descriptor(&self) -> &ModuleDescriptor {
        &self.desc
    }

    pub(crate) fn payload(&self) -> &ModulePayload {
        &self.payload
    }

    pub fn sections(&self) -> Option<&[SipVector]> {
        match &self.payload {
            ModulePayload::Bundle(s) => Some(s),
            _ => None,
        }
    }

    pub fn matrix(&self) -> Option<&DMatrix<Complex64>> {
        match &self.payload {
            ModulePayload::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn parts(&self) -> Option<&[ModuleElement]> {
        match &self.payload {
            ModulePayload::DirectSum(p) => Some(p),
            _ => None,
        }
    }

    pub fn base(&self) -> Option<&ModuleElement> {
        match &self.payload {
            ModulePayload::Transported(b) => Some(b),
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
        let payload = match (&self.payload, &other.payload) {
            (ModulePayload::Bundle(a), ModulePayload::Bundle(b)) => ModulePayload::Bundle(
                a.iter().zip(b).map(|(x, y)| x.add(y)).collect::<Result<_>>()?,
            ),
            (ModulePayload::Matrix(a), ModulePayload::Matrix(b)) => ModulePayload::Matrix(a + b),
            (ModulePayload::DirectSum(a), ModulePayload::DirectSum(b)) => ModulePayload::DirectSum(
                a.iter().zip(b).map(|(x, y)| x.add(y)).collect::<Result<_>>()?,
            ),
            (ModulePayload::Transported(a), ModulePayload::Transported(b)) => {
                ModulePayload::Transported(Box::new(a.add(b)?))
            }
            _ => unreachable!("descriptor equality implies matching payloads"),
        };
        Ok(Self {
            desc: self.desc.clone(),
            payload,
        })
    }

    pub fn scalar_mul(&self, lambda: Complex64) -> Self {
        let payload = match &self.payload {
            ModulePayload::Bundle(s) => {
                ModulePayload::Bundle(s.iter().map(|f| f.scalar_mul(lambda)).collect())
            }
            ModulePayload::Matrix(m) => ModulePayload::Matrix(m * lambda),
            ModulePayload::DirectSum(p) => {
                ModulePayload::DirectSum(p.iter().map(|x| x.scalar_mul(lambda)).collect())
            }
            ModulePayload::Transported(b) => {
                ModulePayload::Transported(Box::new(b.scalar_mul(lambda)))
            }
        };
        Self {
            desc: self.desc.clone(),
            payload,
        }
    }

    /// `self + lambda * other`.
    pub fn plus_scaled(&self, lambda: Complex64, other: &Self) -> Result<Self> {
        self.add(&other.scalar_mul(lambda))
    }

    pub fn coordinate_norm(&self) -> f64 {
        match &self.payload {
            ModulePayload::Bundle(s) => s
                .iter()
                .map(|f| f.coordinate_norm().powi(2))
                .sum::<f64>()
                .sqrt(),
            ModulePayload::Matrix(m) => m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            ModulePayload::DirectSum(p) => p
                .iter()
                .map(|x| x.coordinate_norm().powi(2))
                .sum::<f64>()
                .sqrt(),
            ModulePayload::Transported(b) => b.coordinate_norm(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coordinate_norm().is_finite()
    }
}

/// The algebra-valued pairing `[x, y]`, linear in `y`.
pub fn csip(x: &ModuleElement, y: &ModuleElement) -> Result<AlgebraElement> {
    x.check_same_descriptor(y)?;
    match (x.payload(), y.payload()) {
        (ModulePayload::Bundle(a), ModulePayload::Bundle(b)) => {
            let values: Result<Vec<Complex64>> =
                a.iter().zip(b).map(|(f, g)| sip(f, g)).collect();
            AlgebraElement::from_functions(values?)
        }
        (ModulePayload::Matrix(a), ModulePayload::Matrix(b)) => {
            AlgebraElement::from_matrix(a.adjoint() * b)
        }
        (ModulePayload::DirectSum(a), ModulePayload::DirectSum(b)) => {
            let blocks: Result<Vec<AlgebraElement>> =
                a.iter().zip(b).map(|(u, v)| csip(u, v)).collect();
            AlgebraElement::from_blocks(blocks?)
        }
        (ModulePayload::Transported(a), ModulePayload::Transported(b)) => {
            let iso = match x.descriptor() {
                ModuleDescriptor::Transported { iso, .. } => iso,
                _ => unreachable!(),
            };
            iso.apply(&csip(a, b)?)
        }
        _ => unreachable!("descriptor equality implies matching payloads"),
    }
}

/// The right action `x . a` of the coefficient algebra.
pub fn module_action(x: &ModuleElement, a: &AlgebraElement) -> Result<ModuleElement> {
    let expected = x.descriptor().algebra();
    if *a.descriptor() != expected {
        return Err(CsipError::DescriptorMismatch(format!(
            "module over {} acted on by {}",
            expected.label(),
            a.descriptor().label()
        )));
    }
    let payload = match x.payload() {
        ModulePayload::Bundle(s) => {
            let values = a.function_values().expect("functions payload");
            ModulePayload::Bundle(
                s.iter()
                    .zip(values)
                    .map(|(f, &v)| f.scalar_mul(v))
                    .collect(),
            )
        }
        ModulePayload::Matrix(m) => {
            ModulePayload::Matrix(m * a.matrix().expect("matrix payload"))
        }
        ModulePayload::DirectSum(p) => {
            let blocks = a.blocks().expect("direct sum payload");
            ModulePayload::DirectSum(
                p.iter()
                    .zip(blocks)
                    .map(|(x, b)| module_action(x, b))
                    .collect::<Result<_>>()?,
            )
        }
        ModulePayload::Transported(b) => {
            let iso = match x.descriptor() {
                ModuleDescriptor::Transported { iso, .. } => iso,
                _ => unreachable!(),
            };
            ModulePayload::Transported(Box::new(module_action(b, &iso.apply_inv(a)?)?))
        }
    };
    Ok(ModuleElement {
        desc: x.descriptor().clone(),
        payload,
    })
}

/// The induced norm `|||x||| = ||[x, x]||^(1/2)`.
pub fn triple_norm(x: &ModuleElement) -> f64 {
    csip(x, x)
        .expect("self pairing")
        .cstar_norm()
        .max(0.0)
        .sqrt()
}

/// The pre-Finsler map `rho(x) = [x, x]^(1/2)`; when the algebra is
/// commutative this is also the cone norm.
pub fn rho(x: &ModuleElement, policy: &NumericPolicy) -> Result<AlgebraElement> {
    csip(x, x)?.sqrt_positive(policy)
}

///`||[x, y] - [y, x]*||`: zero exactly for Hilbert C*-modules, generically
/// positive for l^p fibers with p != 2.
pub fn hermitian_defect(x: &ModuleElement, y: &ModuleElement) -> Result<f64> {
    let xy = csip(x, y)?;
    let yx_star = csip(y, x)?.star();
    xy.distance(&yx_star)
}
