//! JSON literal formats.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major nested
//! arrays, and elements are `{"descriptor": ..., "data": ...}` objects whose
//! data shape mirrors the descriptor. Descriptors are tagged by `"kind"`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::algebra::{AlgebraDescriptor, AlgebraElement};
use crate::error::{CsipError, Result};
use crate::module::{IsoDescriptor, ModuleDescriptor, ModuleElement};
use crate::operators::ModuleOperator;
use crate::sip::SipVector;

pub fn complex_to_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn parse_complex(v: &Value) -> Result<Complex64> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| CsipError::Literal(format!("expected [re, im], got {v}")))?;
    let re = arr[0]
        .as_f64()
        .ok_or_else(|| CsipError::Literal("non-numeric real part".into()))?;
    let im = arr[1]
        .as_f64()
        .ok_or_else(|| CsipError::Literal("non-numeric imaginary part".into()))?;
    Ok(Complex64::new(re, im))
}

pub fn complex_vec_to_value(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|&z| complex_to_value(z)).collect())
}

pub fn parse_complex_vec(v: &Value) -> Result<Vec<Complex64>> {
    v.as_array()
        .ok_or_else(|| CsipError::Literal(format!("expected array of [re, im], got {v}")))?
        .iter()
        .map(parse_complex)
        .collect()
}

pub fn matrix_to_value(m: &DMatrix<Complex64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_value(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn parse_matrix(v: &Value) -> Result<DMatrix<Complex64>> {
    let rows = v
        .as_array()
        .ok_or_else(|| CsipError::Literal("expected array of rows".into()))?;
    if rows.is_empty() {
        return Err(CsipError::Literal("empty matrix".into()));
    }
    let parsed: Vec<Vec<Complex64>> = rows
        .iter()
        .map(parse_complex_vec)
        .collect::<Result<_>>()?;
    let ncols = parsed[0].len();
    if ncols == 0 || parsed.iter().any(|r| r.len() != ncols) {
        return Err(CsipError::Literal("ragged matrix rows".into()));
    }
    let nrows = parsed.len();
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| parsed[i][j]))
}

// ---------------------------------------------------------------------------
// Algebra elements
// ---------------------------------------------------------------------------

pub fn algebra_data_to_value(e: &AlgebraElement) -> Value {
    if let Some(v) = e.function_values() {
        complex_vec_to_value(v)
    } else if let Some(m) = e.matrix() {
        matrix_to_value(m)
    } else {
        Value::Array(
            e.blocks()
                .expect("exhaustive payloads")
                .iter()
                .map(algebra_data_to_value)
                .collect(),
        )
    }
}

pub fn algebra_element_from_literal(
    desc: &AlgebraDescriptor,
    data: &Value,
) -> Result<AlgebraElement> {
    desc.validate()?;
    match desc {
        AlgebraDescriptor::Functions { m } => {
            let v = parse_complex_vec(data)?;
            if v.len() != *m {
                return Err(CsipError::Literal(format!(
                    "functions({m}) data of length {}",
                    v.len()
                )));
            }
            AlgebraElement::from_functions(v)
        }
        AlgebraDescriptor::Matrices { n } => {
            let mat = parse_matrix(data)?;
            if mat.nrows() != *n || mat.ncols() != *n {
                return Err(CsipError::Literal(format!(
                    "matrices({n}) data of shape {}x{}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
            AlgebraElement::from_matrix(mat)
        }
        AlgebraDescriptor::DirectSum { parts } => {
            let items = data
                .as_array()
                .ok_or_else(|| CsipError::Literal("direct sum data must be an array".into()))?;
            if items.len() != parts.len() {
                return Err(CsipError::Literal(format!(
                    "direct sum of {} parts, data has {} blocks",
                    parts.len(),
                    items.len()
                )));
            }
            let blocks: Vec<AlgebraElement> = parts
                .iter()
                .zip(items)
                .map(|(p, d)| algebra_element_from_literal(p, d))
                .collect::<Result<_>>()?;
            AlgebraElement::from_blocks(blocks)
        }
    }
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let v = json!({
            "descriptor": self.descriptor(),
            "data": algebra_data_to_value(self),
        });
        v.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Lit {
            descriptor: AlgebraDescriptor,
            data: Value,
        }
        let lit = Lit::deserialize(deserializer)?;
        algebra_element_from_literal(&lit.descriptor, &lit.data)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Module descriptors and elements
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum IsoLit {
    Permute { perm: Vec<usize> },
    Unitary { u: Vec<Vec<[f64; 2]>> },
}

impl From<&IsoDescriptor> for IsoLit {
    fn from(iso: &IsoDescriptor) -> Self {
        match iso {
            IsoDescriptor::PermuteOmega { perm } => IsoLit::Permute { perm: perm.clone() },
            IsoDescriptor::UnitaryConj { u } => IsoLit::Unitary {
                u: (0..u.nrows())
                    .map(|i| (0..u.ncols()).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect())
                    .collect(),
            },
        }
    }
}

impl TryFrom<IsoLit> for IsoDescriptor {
    type Error = CsipError;

    fn try_from(lit: IsoLit) -> Result<Self> {
        match lit {
            IsoLit::Permute { perm } => Ok(IsoDescriptor::PermuteOmega { perm }),
            IsoLit::Unitary { u } => {
                let nrows = u.len();
                if nrows == 0 || u.iter().any(|r| r.len() != nrows) {
                    return Err(CsipError::Literal("unitary must be square".into()));
                }
                let m = DMatrix::from_fn(nrows, nrows, |i, j| {
                    Complex64::new(u[i][j][0], u[i][j][1])
                });
                Ok(IsoDescriptor::UnitaryConj { u: m })
            }
        }
    }
}

impl Serialize for IsoDescriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        IsoLit::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IsoDescriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        IsoDescriptor::try_from(IsoLit::deserialize(deserializer)?)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModuleDescLit {
    Bundle {
        fibers: Vec<crate::sip::SipSpaceDescriptor>,
    },
    MatrixSelf {
        n: usize,
    },
    DirectSum {
        parts: Vec<ModuleDescLit>,
    },
    Transported {
        base: Box<ModuleDescLit>,
        iso: IsoLit,
    },
}

impl From<&ModuleDescriptor> for ModuleDescLit {
    fn from(d: &ModuleDescriptor) -> Self {
        match d {
            ModuleDescriptor::Bundle { fibers } => ModuleDescLit::Bundle {
                fibers: fibers.clone(),
            },
            ModuleDescriptor::MatrixSelf { n } => ModuleDescLit::MatrixSelf { n: *n },
            ModuleDescriptor::DirectSum { parts } => ModuleDescLit::DirectSum {
                parts: parts.iter().map(ModuleDescLit::from).collect(),
            },
            ModuleDescriptor::Transported { base, iso } => ModuleDescLit::Transported {
                base: Box::new(ModuleDescLit::from(base.as_ref())),
                iso: IsoLit::from(iso),
            },
        }
    }
}

impl TryFrom<ModuleDescLit> for ModuleDescriptor {
    type Error = CsipError;

    fn try_from(lit: ModuleDescLit) -> Result<Self> {
        Ok(match lit {
            ModuleDescLit::Bundle { fibers } => ModuleDescriptor::Bundle { fibers },
            ModuleDescLit::MatrixSelf { n } => ModuleDescriptor::MatrixSelf { n },
            ModuleDescLit::DirectSum { parts } => ModuleDescriptor::DirectSum {
                parts: parts
                    .into_iter()
                    .map(ModuleDescriptor::try_from)
                    .collect::<Result<_>>()?,
            },
            ModuleDescLit::Transported { base, iso } => ModuleDescriptor::Transported {
                base: Box::new(ModuleDescriptor::try_from(*base)?),
                iso: IsoDescriptor::try_from(iso)?,
            },
        })
    }
}

impl Serialize for ModuleDescriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ModuleDescLit::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModuleDescriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        ModuleDescriptor::try_from(ModuleDescLit::deserialize(deserializer)?)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

pub fn module_data_to_value(e: &ModuleElement) -> Value {
    if let Some(sections) = e.sections() {
        Value::Array(
            sections
                .iter()
                .map(|f| complex_vec_to_value(f.coords()))
                .collect(),
        )
    } else if let Some(m) = e.matrix() {
        matrix_to_value(m)
    } else if let Some(parts) = e.parts() {
        Value::Array(parts.iter().map(module_data_to_value).collect())
    } else {
        module_data_to_value(e.base().expect("exhaustive payloads"))
    }
}

pub fn module_element_from_literal(
    desc: &ModuleDescriptor,
    data: &Value,
) -> Result<ModuleElement> {
    match desc {
        ModuleDescriptor::Bundle { fibers } => {
            let items = data
                .as_array()
                .ok_or_else(|| CsipError::Literal("bundle data must be an array".into()))?;
            if items.len() != fibers.len() {
                return Err(CsipError::Literal(format!(
                    "bundle with {} fibers, data has {} sections",
                    fibers.len(),
                    items.len()
                )));
            }
            let sections: Vec<SipVector> = fibers
                .iter()
                .zip(items)
                .map(|(space, item)| SipVector::new(space.clone(), parse_complex_vec(item)?))
                .collect::<Result<_>>()?;
            ModuleElement::from_sections(sections)
        }
        ModuleDescriptor::MatrixSelf { n } => {
            let m = parse_matrix(data)?;
            if m.nrows() != *n || m.ncols() != *n {
                return Err(CsipError::Literal(format!(
                    "matrix_self({n}) data of shape {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            ModuleElement::from_matrix(m)
        }
        ModuleDescriptor::DirectSum { parts } => {
            let items = data
                .as_array()
                .ok_or_else(|| CsipError::Literal("direct sum data must be an array".into()))?;
            if items.len() != parts.len() {
                return Err(CsipError::Literal(format!(
                    "direct sum of {} parts, data has {} blocks",
                    parts.len(),
                    items.len()
                )));
            }
            let elems: Vec<ModuleElement> = parts
                .iter()
                .zip(items)
                .map(|(p, d)| module_element_from_literal(p, d))
                .collect::<Result<_>>()?;
            ModuleElement::from_parts(elems)
        }
        ModuleDescriptor::Transported { base, iso } => {
            let inner = module_element_from_literal(base, data)?;
            ModuleElement::transported(inner, iso.clone())
        }
    }
}

impl Serialize for ModuleElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let v = json!({
            "descriptor": self.descriptor(),
            "data": module_data_to_value(self),
        });
        v.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModuleElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Lit {
            descriptor: ModuleDescriptor,
            data: Value,
        }
        let lit = Lit::deserialize(deserializer)?;
        module_element_from_literal(&lit.descriptor, &lit.data)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum OperatorLit {
    Fibered {
        domain: ModuleDescriptor,
        codomain: ModuleDescriptor,
        blocks: Vec<Value>,
    },
    #[serde(rename = "leftmult")]
    LeftMult {
        n: usize,
        c: Value,
    },
    Dual {
        y: ModuleElement,
    },
}

impl Serialize for ModuleOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let lit = match self {
            ModuleOperator::Fibered {
                domain,
                codomain,
                blocks,
            } => OperatorLit::Fibered {
                domain: domain.clone(),
                codomain: codomain.clone(),
                blocks: blocks.iter().map(matrix_to_value).collect(),
            },
            ModuleOperator::LeftMult { c } => OperatorLit::LeftMult {
                n: c.nrows(),
                c: matrix_to_value(c),
            },
            ModuleOperator::DualFunctional { y } => OperatorLit::Dual { y: y.clone() },
        };
        lit.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModuleOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let lit = OperatorLit::deserialize(deserializer)?;
        let op = match lit {
            OperatorLit::Fibered {
                domain,
                codomain,
                blocks,
            } => {
                let blocks: Vec<DMatrix<Complex64>> = blocks
                    .iter()
                    .map(parse_matrix)
                    .collect::<Result<_>>()
                    .map_err(|e| D::Error::custom(e.to_string()))?;
                ModuleOperator::fibered(domain, codomain, blocks)
                    .map_err(|e| D::Error::custom(e.to_string()))?
            }
            OperatorLit::LeftMult { n, c } => {
                let c = parse_matrix(&c).map_err(|e| D::Error::custom(e.to_string()))?;
                if c.nrows() != n || c.ncols() != n {
                    return Err(D::Error::custom(format!(
                        "leftmult({n}) with matrix of shape {}x{}",
                        c.nrows(),
                        c.ncols()
                    )));
                }
                ModuleOperator::left_mult(c).map_err(|e| D::Error::custom(e.to_string()))?
            }
            OperatorLit::Dual { y } => ModuleOperator::dual_functional(y),
        };
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sip::SipSpaceDescriptor;

    #[test]
    fn algebra_element_roundtrip() {
        let desc = AlgebraDescriptor::direct_sum(vec![
            AlgebraDescriptor::functions(2),
            AlgebraDescriptor::matrices(2),
        ]);
        let json = json!({
            "descriptor": {"kind": "direct_sum", "parts": [
                {"kind": "functions", "m": 2},
                {"kind": "matrices", "n": 2},
            ]},
            "data": [
                [[1.0, 0.0], [0.0, -2.0]],
                [[[1.0, 0.0], [0.5, 0.5]], [[0.0, 0.0], [3.0, 0.0]]],
            ],
        });
        let e: AlgebraElement = serde_json::from_value(json.clone()).unwrap();
        assert_eq!(e.descriptor(), &desc);
        let back = serde_json::to_value(&e).unwrap();
        assert_eq!(back, json);
    }

    #[test]
    fn module_element_roundtrip_bundle() {
        let json = json!({
            "descriptor": {"kind": "bundle", "fibers": [
                {"kind": "hilbert", "d": 2},
                {"kind": "lp", "d": 2, "p": 3.0},
            ]},
            "data": [
                [[1.0, 0.0], [0.0, 1.0]],
                [[0.5, 0.0], [1.0, -1.0]],
            ],
        });
        let e: ModuleElement = serde_json::from_value(json.clone()).unwrap();
        assert_eq!(
            e.descriptor(),
            &ModuleDescriptor::bundle(vec![
                SipSpaceDescriptor::hilbert(2),
                SipSpaceDescriptor::lp_giles(2, 3.0),
            ])
        );
        assert_eq!(serde_json::to_value(&e).unwrap(), json);
    }

    #[test]
    fn module_element_roundtrip_transported() {
        let json = json!({
            "descriptor": {"kind": "transported",
                "base": {"kind": "matrix_self", "n": 2},
                "iso": {"kind": "unitary", "u": [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]},
            },
            "data": [[[1.0, 0.0], [2.0, 0.0]], [[3.0, 0.0], [4.0, 0.0]]],
        });
        let e: ModuleElement = serde_json::from_value(json.clone()).unwrap();
        assert!(e.base().is_some());
        assert_eq!(serde_json::to_value(&e).unwrap(), json);
    }

    #[test]
    fn shape_errors_are_reported() {
        let bad = json!({
            "descriptor": {"kind": "functions", "m": 3},
            "data": [[1.0, 0.0]],
        });
        assert!(serde_json::from_value::<AlgebraElement>(bad).is_err());

        let ragged = json!({
            "descriptor": {"kind": "matrices", "n": 2},
            "data": [[[1.0, 0.0], [0.0, 0.0]], [[1.0, 0.0]]],
        });
        assert!(serde_json::from_value::<AlgebraElement>(ragged).is_err());
    }

    #[test]
    fn operator_roundtrip() {
        let json = json!({
            "kind": "fibered",
            "domain": {"kind": "bundle", "fibers": [{"kind": "hilbert", "d": 2}]},
            "codomain": {"kind": "bundle", "fibers": [{"kind": "hilbert", "d": 2}]},
            "blocks": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [2.0, 0.0]]]],
        });
        let op: ModuleOperator = serde_json::from_value(json.clone()).unwrap();
        assert_eq!(serde_json::to_value(&op).unwrap(), json);
    }
}
