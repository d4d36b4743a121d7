//! Runtime property verifiers: pairing axioms, induced-norm laws, Finsler
//! structure, and fullness.
//!
//! Each verifier draws seeded random elements and returns one report per
//! sub-property. Failures are report entries, never panics. Fault injection
//! wraps the model seen by a single verifier so negative controls trip
//! exactly the suite under test.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{AlgebraElement, NumericPolicy};
use crate::error::{CsipError, Result};
use crate::module::{csip, module_action, triple_norm, ModuleDescriptor, ModuleElement};
use crate::report::{skipped_report, PropertyTracker, VerificationReport};
use crate::sampling::{random_algebra_element, random_module_element, random_scalar, trial_rng};

/// Deliberate defects for negative-control runs. Each mode is injected only
/// into its target suite, so a control run must fail that suite and no other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultMode {
    /// Negates the pairing: breaks positivity (axiom suite).
    SignFlipSip,
    /// Scales the module action by 1.5: breaks the Finsler identity.
    BreakAction,
    /// Rotates operator output across fibers: breaks A-linearity (operators).
    MixFibers,
    /// Scales the transporting isomorphism by 2: breaks norm preservation
    /// under transport (norms suite).
    NonIsometricIso,
}

impl FaultMode {
    pub const ALL: [FaultMode; 4] = [
        FaultMode::SignFlipSip,
        FaultMode::BreakAction,
        FaultMode::MixFibers,
        FaultMode::NonIsometricIso,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FaultMode::SignFlipSip => "sign-flip-sip",
            FaultMode::BreakAction => "break-action",
            FaultMode::MixFibers => "mix-fibers",
            FaultMode::NonIsometricIso => "non-isometric-iso",
        }
    }
}

impl FromStr for FaultMode {
    type Err = CsipError;

    fn from_str(s: &str) -> Result<Self> {
        FaultMode::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                CsipError::Domain(format!(
                    "unknown fault mode {s:?}; expected one of {:?}",
                    FaultMode::ALL.map(|m| m.name())
                ))
            })
    }
}

/// The module operations as one verifier sees them, with an optional fault.
#[derive(Clone, Copy)]
pub(crate) struct SuiteModel<'a> {
    pub desc: &'a ModuleDescriptor,
    pub fault: Option<FaultMode>,
}

impl<'a> SuiteModel<'a> {
    pub fn clean(desc: &'a ModuleDescriptor) -> Self {
        Self { desc, fault: None }
    }

    pub fn with_fault(desc: &'a ModuleDescriptor, fault: Option<FaultMode>) -> Self {
        Self { desc, fault }
    }

    pub fn csip(&self, x: &ModuleElement, y: &ModuleElement) -> Result<AlgebraElement> {
        let v = csip(x, y)?;
        Ok(match self.fault {
            Some(FaultMode::SignFlipSip) => v.scalar_mul(Complex64::new(-1.0, 0.0)),
            Some(FaultMode::NonIsometricIso)
                if matches!(self.desc, ModuleDescriptor::Transported { .. }) =>
            {
                v.scalar_mul(Complex64::new(2.0, 0.0))
            }
            _ => v,
        })
    }

    pub fn action(&self, x: &ModuleElement, a: &AlgebraElement) -> Result<ModuleElement> {
        let v = module_action(x, a)?;
        Ok(match self.fault {
            Some(FaultMode::BreakAction) => v.scalar_mul(Complex64::new(1.5, 0.0)),
            _ => v,
        })
    }

    pub fn triple_norm(&self, x: &ModuleElement) -> f64 {
        self.csip(x, x)
            .expect("self pairing")
            .cstar_norm()
            .max(0.0)
            .sqrt()
    }

    pub fn rho(&self, x: &ModuleElement, policy: &NumericPolicy) -> Result<AlgebraElement> {
        self.csip(x, x)?.sqrt_positive(policy)
    }
}

fn equality_margin(lhs: &AlgebraElement, rhs: &AlgebraElement) -> f64 {
    let err = lhs.sub(rhs).expect("same descriptor").cstar_norm();
    let scale = 1.0 + lhs.cstar_norm().max(rhs.cstar_norm());
    -err / scale
}

fn positivity_margin(c: &AlgebraElement, scale: f64) -> f64 {
    c.min_spectrum() / (1.0 + scale)
}

fn pair_witness(x: &ModuleElement, y: &ModuleElement) -> serde_json::Value {
    json!({"x": x, "y": y})
}

/// Checks Def 2.1 (i)-(iv) plus scalar compatibility; for transported
/// modules also the defining transport identity.
pub fn verify_axioms(
    desc: &ModuleDescriptor,
    sample_count: u64,
    seed: u64,
    policy: &NumericPolicy,
) -> Vec<VerificationReport> {
    verify_axioms_with(SuiteModel::clean(desc), sample_count, seed, 0, policy)
}

pub(crate) fn verify_axioms_with(
    model: SuiteModel<'_>,
    sample_count: u64,
    seed: u64,
    construction_index: usize,
    policy: &NumericPolicy,
) -> Vec<VerificationReport> {
    let desc = model.desc;
    let label = desc.label();
    let is_transported = matches!(desc, ModuleDescriptor::Transported { .. });

    let mut positive = PropertyTracker::new("axiom_i_positive_definite", &label, policy.tol_pos);
    let mut linear = PropertyTracker::new("axiom_ii_linear_second", &label, policy.tol_eq);
    let mut action_right = PropertyTracker::new("axiom_iii_action_right", &label, policy.tol_eq);
    let mut action_star = PropertyTracker::new("axiom_iii_action_star", &label, policy.tol_eq);
    let mut cs_operator = PropertyTracker::new("axiom_iv_operator_cs", &label, 1e-8);
    let mut cs_scalar = PropertyTracker::new("axiom_iv_scalar_cs", &label, 1e-8);
    let mut scalar_compat = PropertyTracker::new("scalar_compatibility", &label, policy.tol_eq);
    let mut transport = is_transported
        .then(|| PropertyTracker::new("transport_identity", &label, 1e-12));

    // Definiteness at the zero element, once.
    let zero = ModuleElement::zero(desc);
    let zz = model.csip(&zero, &zero).expect("same descriptor");
    positive.record(-zz.cstar_norm(), || json!({"x": zero}));

    let algebra = desc.algebra();
    for trial in 0..sample_count {
        let mut rng = trial_rng(seed, "axioms", construction_index, trial);
        let x = random_module_element(desc, &mut rng);
        let y = random_module_element(desc, &mut rng);
        let z = random_module_element(desc, &mut rng);
        let a = random_algebra_element(&algebra, &mut rng);
        let alpha = random_scalar(&mut rng);
        let beta = random_scalar(&mut rng);

        // (i) [x, x] >= 0.
        let xx = model.csip(&x, &x).expect("same descriptor");
        positive.record(positivity_margin(&xx, xx.cstar_norm()), || json!({"x": x}));

        // (ii) [x, alpha y + beta z] = alpha [x, y] + beta [x, z].
        let comb = y.scalar_mul(alpha).add(&z.scalar_mul(beta)).expect("same");
        let lhs = model.csip(&x, &comb).expect("same descriptor");
        let rhs = model
            .csip(&x, &y)
            .expect("same")
            .scalar_mul(alpha)
            .add(&model.csip(&x, &z).expect("same").scalar_mul(beta))
            .expect("same");
        linear.record(equality_margin(&lhs, &rhs), || pair_witness(&x, &y));

        // (iii) [x, y a] = [x, y] a and [x a, y] = a* [x, y].
        let ya = model.action(&y, &a).expect("algebra matches");
        let lhs = model.csip(&x, &ya).expect("same");
        let rhs = model.csip(&x, &y).expect("same").mul(&a).expect("same");
        action_right.record(equality_margin(&lhs, &rhs), || pair_witness(&x, &y));

        let xa = model.action(&x, &a).expect("algebra matches");
        let lhs = model.csip(&xa, &y).expect("same");
        let rhs = a
            .star()
            .mul(&model.csip(&x, &y).expect("same"))
            .expect("same");
        action_star.record(equality_margin(&lhs, &rhs), || pair_witness(&x, &y));

        // (iv) operator reading: [y, x]* [y, x] <= ||[y, y]|| [x, x].
        let yx = model.csip(&y, &x).expect("same");
        let yy_norm = model.csip(&y, &y).expect("same").cstar_norm();
        let xx_norm = xx.cstar_norm();
        let bound = xx.scalar_mul(Complex64::new(yy_norm, 0.0));
        let diff = bound.sub(&yx.abs_squared()).expect("same");
        cs_operator.record(positivity_margin(&diff, yy_norm * xx_norm), || {
            pair_witness(&x, &y)
        });

        // (iv) scalar consequence: ||[y, x]||^2 <= ||[y, y]|| ||[x, x]||.
        let slack = yy_norm * xx_norm - yx.cstar_norm().powi(2);
        cs_scalar.record(slack / (1.0 + yy_norm * xx_norm), || pair_witness(&x, &y));

        // Unital scalar compatibility: [lambda x, y] = conj(lambda) [x, y].
        let lx = x.scalar_mul(alpha);
        let lhs = model.csip(&lx, &y).expect("same");
        let rhs = model.csip(&x, &y).expect("same").scalar_mul(alpha.conj());
        scalar_compat.record(equality_margin(&lhs, &rhs), || pair_witness(&x, &y));

        // Transport identity: [x, y]_B = psi([x, y]_A), exact by construction.
        if let (Some(t), ModuleDescriptor::Transported { iso, .. }) = (&mut transport, desc) {
            let base_pairing = csip(x.base().expect("transported"), y.base().expect("transported"))
                .expect("same");
            let lhs = iso.apply(&base_pairing).expect("algebra matches");
            let rhs = model.csip(&x, &y).expect("same");
            t.record(equality_margin(&lhs, &rhs), || pair_witness(&x, &y));
        }
    }

    let mut reports = vec![
        positive.finish(),
        linear.finish(),
        action_right.finish(),
        action_star.finish(),
        cs_operator.finish(),
        cs_scalar.finish(),
        scalar_compat.finish(),
    ];
    if let Some(t) = transport {
        reports.push(t.finish());
    }
    reports
}

/// Checks the induced norm `|||x||| = ||[x, x]||^(1/2)`: norm axioms,
/// submultiplicativity, the cubic identity, and norm preservation under
/// transport.
pub fn verify_norm_properties(
    desc: &ModuleDescriptor,
    sample_count: u64,
    seed: u64,
    policy: &NumericPolicy,
) -> Vec<VerificationReport> {
    verify_norm_properties_with(SuiteModel::clean(desc), sample_count, seed, 0, policy)
}

pub(crate) fn verify_norm_properties_with(
    model: SuiteModel<'_>,
    sample_count: u64,
    seed: u64,
    construction_index: usize,
    policy: &NumericPolicy,
) -> Vec<VerificationReport> {
    let desc = model.desc;
    let label = desc.label();
    let is_transported = matches!(desc, ModuleDescriptor::Transported { .. });

    let mut triangle = PropertyTracker::new("norm_triangle", &label, 1e-9);
    let mut homogeneity = PropertyTracker::new("norm_homogeneity", &label, 1e-9);
    let mut separates = PropertyTracker::new("norm_separates_points", &label, 1e-9);
    let mut submult = PropertyTracker::new("norm_submultiplicative", &label, 1e-9);
    let mut cubic = PropertyTracker::new("norm_cubic_identity", &label, 1e-9);
    let mut transport = is_transported
        .then(|| PropertyTracker::new("transport_norm_preserved", &label, 1e-10));

    // Zero vector: all norms vanish.
    let zero = ModuleElement::zero(desc);
    separates.record(-model.triple_norm(&zero), || json!({"x": zero}));

    let algebra = desc.algebra();
    for trial in 0..sample_count {
        let mut rng = trial_rng(seed, "norms", construction_index, trial);
        let x = random_module_element(desc, &mut rng);
        let y = random_module_element(desc, &mut rng);
        let a = random_algebra_element(&algebra, &mut rng);
        let lambda = random_scalar(&mut rng);

        let nx = model.triple_norm(&x);
        let ny = model.triple_norm(&y);

        // Triangle inequality.
        let nxy = model.triple_norm(&x.add(&y).expect("same"));
        triangle.record((nx + ny - nxy) / (1.0 + nx + ny), || pair_witness(&x, &y));

        // Absolute homogeneity over complex scalars.
        let nlx = model.triple_norm(&x.scalar_mul(lambda));
        let expected = lambda.norm() * nx;
        homogeneity.record(-(nlx - expected).abs() / (1.0 + expected), || {
            json!({"x": x, "lambda": [lambda.re, lambda.im]})
        });

        // Point separation: generic nonzero elements have nonzero norm.
        let coord = x.coordinate_norm();
        let sep_margin = if nx <= policy.tol_eq * (1.0 + coord) && coord > 1e-6 {
            -1.0
        } else {
            nx / (1.0 + coord)
        };
        separates.record(sep_margin, || json!({"x": x}));

        // Submultiplicativity |||x a||| <= |||x||| ||a||.
        let na = a.cstar_norm();
        let nxa = model.triple_norm(&model.action(&x, &a).expect("algebra matches"));
        submult.record((nx * na - nxa) / (1.0 + nx * na), || {
            json!({"x": x, "a": a})
        });

        // Cubic identity ||x [x, x]|| = |||x|||^3.
        let gram = model.csip(&x, &x).expect("same");
        let xg = model.action(&x, &gram).expect("algebra matches");
        let lhs = model.triple_norm(&xg);
        let rhs = nx.powi(3);
        cubic.record(-(lhs - rhs).abs() / (1.0 + rhs), || json!({"x": x}));

        // Norm preservation under transport.
        if let Some(t) = &mut transport {
            let base_norm = triple_norm(x.base().expect("transported"));
            let here = model.triple_norm(&x);
            t.record(-(here - base_norm).abs() / (1.0 + base_norm), || {
                json!({"x": x})
            });
        }
    }

    let mut reports = vec![
        triangle.finish(),
        homogeneity.finish(),
        separates.finish(),
        submult.finish(),
        cubic.finish(),
    ];
    if let Some(t) = transport {
        reports.push(t.finish());
    }
    reports
}

/// Checks the pre-Finsler identity `rho(x a)^2 = a* rho(x)^2 a` everywhere,
/// and the operator triangle inequality for commutative coefficient algebras.
pub fn verify_finsler(
    desc: &ModuleDescriptor,
    sample_count: u64,
    seed: u64,
    policy: &NumericPolicy,
) -> Vec<VerificationReport> {
    verify_finsler_with(SuiteModel::clean(desc), sample_count, seed, 0, policy)
}

pub(crate) fn verify_finsler_with(
    model: SuiteModel<'_>,
    sample_count: u64,
    seed: u64,
    construction_index: usize,
    policy: &NumericPolicy,
) -> Vec<VerificationReport> {
    let desc = model.desc;
    let label = desc.label();
    let algebra = desc.algebra();
    let commutative = algebra.is_commutative();

    let mut finsler = PropertyTracker::new("finsler_action_identity", &label, 1e-9);
    let mut triangle = commutative
        .then(|| PropertyTracker::new("finsler_triangle", &label, 1e-9));

    for trial in 0..sample_count {
        let mut rng = trial_rng(seed, "finsler", construction_index, trial);
        let x = random_module_element(desc, &mut rng);
        let y = random_module_element(desc, &mut rng);
        let a = random_algebra_element(&algebra, &mut rng);

        // rho(x a)^2 = a* rho(x)^2 a.
        let xa = model.action(&x, &a).expect("algebra matches");
        let rho_xa = model.rho(&xa, policy).expect("positive pairing");
        let lhs = rho_xa.mul(&rho_xa).expect("same");
        let rho_x = model.rho(&x, policy).expect("positive pairing");
        let rhs = a
            .star()
            .mul(&rho_x.mul(&rho_x).expect("same"))
            .expect("same")
            .mul(&a)
            .expect("same");
        finsler.record(equality_margin(&lhs, &rhs), || json!({"x": x, "a": a}));

        // Prop 2.7: rho(x + y) <= rho(x) + rho(y) over commutative algebras.
        if let Some(t) = &mut triangle {
            let rho_sum = model
                .rho(&x.add(&y).expect("same"), policy)
                .expect("positive pairing");
            let bound = model
                .rho(&x, policy)
                .expect("positive pairing")
                .add(&model.rho(&y, policy).expect("positive pairing"))
                .expect("same");
            let diff = bound.sub(&rho_sum).expect("same");
            t.record(positivity_margin(&diff, bound.cstar_norm()), || {
                pair_witness(&x, &y)
            });
        }
    }

    let mut reports = vec![finsler.finish()];
    match triangle {
        Some(t) => reports.push(t.finish()),
        None => reports.push(skipped_report(
            "finsler_triangle",
            &label,
            "requires a commutative coefficient algebra",
        )),
    }
    reports
}

/// Real span dimension of a set of self-adjoint coordinate vectors, via the
/// eigenvalues of the Gram matrix with a relative singular-value cutoff.
pub fn span_dimension(vectors: &[Vec<f64>], tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let dim = vectors[0].len();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for v in vectors {
        for i in 0..dim {
            for j in 0..dim {
                gram[(i, j)] += v[i] * v[j];
            }
        }
    }
    let eigs = gram.symmetric_eigen().eigenvalues;
    let max = eigs.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0;
    }
    // Gram eigenvalues are squared singular values.
    let cutoff = (tol * tol) * max;
    eigs.iter().filter(|&&l| l > cutoff).count()
}

/// Rank of the real span of `{[x, x]}` among sampled elements, compared to
/// the self-adjoint dimension of the coefficient algebra.
pub fn fullness_check(
    desc: &ModuleDescriptor,
    sample_count: u64,
    seed: u64,
    policy: &NumericPolicy,
) -> bool {
    let samples: Vec<Vec<f64>> = (0..sample_count)
        .map(|trial| {
            let mut rng = trial_rng(seed, "fullness", 0, trial);
            let x = random_module_element(desc, &mut rng);
            csip(&x, &x)
                .expect("same descriptor")
                .self_adjoint_coordinates()
        })
        .collect();
    let target = desc.algebra().self_adjoint_dim();
    span_dimension(&samples, policy.tol_eq.max(1e-12).sqrt() * 1e-3) == target
}

/// Fullness wrapped as a report, with the relative rank margin.
pub(crate) fn fullness_report(
    desc: &ModuleDescriptor,
    sample_count: u64,
    seed: u64,
    construction_index: usize,
    policy: &NumericPolicy,
) -> VerificationReport {
    let label = desc.label();
    let samples: Vec<Vec<f64>> = (0..sample_count)
        .map(|trial| {
            let mut rng = trial_rng(seed, "fullness", construction_index, trial);
            let x = random_module_element(desc, &mut rng);
            csip(&x, &x)
                .expect("same descriptor")
                .self_adjoint_coordinates()
        })
        .collect();
    let target = desc.algebra().self_adjoint_dim();
    let rank = span_dimension(&samples, policy.tol_eq.max(1e-12).sqrt() * 1e-3);
    let mut t = PropertyTracker::new("fullness_span", &label, 0.0);
    t.record(rank as f64 - target as f64, || {
        json!({"rank": rank, "target": target})
    });
    t.note(format!("span rank {rank} of {target} over {sample_count} samples"));
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sip::SipSpaceDescriptor;
    use crate::sip::SipVector;

    fn policy() -> NumericPolicy {
        NumericPolicy::default()
    }

    fn hilbert_bundle() -> ModuleDescriptor {
        ModuleDescriptor::bundle(vec![
            SipSpaceDescriptor::hilbert(2),
            SipSpaceDescriptor::hilbert(2),
        ])
    }

    fn lp_bundle() -> ModuleDescriptor {
        ModuleDescriptor::bundle(vec![
            SipSpaceDescriptor::lp_giles(2, 3.0),
            SipSpaceDescriptor::lp_giles(2, 3.0),
        ])
    }

    #[test]
    fn axioms_pass_on_hilbert_bundle() {
        let reports = verify_axioms(&hilbert_bundle(), 1000, 42, &policy());
        for r in &reports {
            assert_eq!(r.failures, 0, "{} failed: {:?}", r.property, r.witness);
        }
    }

    #[test]
    fn axioms_pass_on_lp_bundle() {
        let reports = verify_axioms(&lp_bundle(), 1000, 42, &policy());
        for r in &reports {
            assert_eq!(r.failures, 0, "{} failed: {:?}", r.property, r.witness);
        }
    }

    #[test]
    fn sign_flipped_pairing_fails_axiom_i_with_witness() {
        let desc = hilbert_bundle();
        let model = SuiteModel::with_fault(&desc, Some(FaultMode::SignFlipSip));
        let reports = verify_axioms_with(model, 50, 7, 0, &policy());
        let pos = reports
            .iter()
            .find(|r| r.property == "axiom_i_positive_definite")
            .unwrap();
        assert!(pos.failures > 0);
        assert!(pos.witness.is_some());
    }

    #[test]
    fn norm_properties_pass_on_matrix_self() {
        let desc = ModuleDescriptor::matrix_self(2);
        let reports = verify_norm_properties(&desc, 1000, 3, &policy());
        for r in &reports {
            assert_eq!(r.failures, 0, "{} failed: {:?}", r.property, r.witness);
        }
    }

    #[test]
    fn finsler_triangle_skipped_on_noncommutative() {
        let desc = ModuleDescriptor::matrix_self(2);
        let reports = verify_finsler(&desc, 100, 3, &policy());
        let tri = reports
            .iter()
            .find(|r| r.property == "finsler_triangle")
            .unwrap();
        assert!(tri.skipped);
        let act = reports
            .iter()
            .find(|r| r.property == "finsler_action_identity")
            .unwrap();
        assert_eq!(act.failures, 0);
    }

    #[test]
    fn finsler_passes_on_lp_bundle_with_triangle() {
        let reports = verify_finsler(&lp_bundle(), 500, 11, &policy());
        for r in &reports {
            assert!(!r.skipped);
            assert_eq!(r.failures, 0, "{} failed", r.property);
        }
    }

    #[test]
    fn fullness_holds_for_generic_samples() {
        assert!(fullness_check(&hilbert_bundle(), 64, 42, &policy()));
        assert!(fullness_check(&ModuleDescriptor::matrix_self(2), 64, 42, &policy()));
    }

    #[test]
    fn fullness_fails_with_single_sample_in_two_point_bundle() {
        let desc = ModuleDescriptor::bundle(vec![
            SipSpaceDescriptor::hilbert(1),
            SipSpaceDescriptor::hilbert(1),
        ]);
        assert!(!fullness_check(&desc, 1, 42, &policy()));
    }

    #[test]
    fn fullness_rank_drops_for_sections_vanishing_at_a_point() {
        // Sections forced to vanish at the first point span at most the
        // complementary coordinate.
        let desc = ModuleDescriptor::bundle(vec![
            SipSpaceDescriptor::hilbert(1),
            SipSpaceDescriptor::hilbert(1),
        ]);
        let mut samples = Vec::new();
        for trial in 0..16u64 {
            let mut rng = trial_rng(9, "restricted", 0, trial);
            let mut x = random_module_element(&desc, &mut rng);
            let sections = x.sections().unwrap();
            let restricted = vec![
                SipVector::zero(sections[0].space().clone()),
                sections[1].clone(),
            ];
            x = ModuleElement::from_sections(restricted).unwrap();
            samples.push(csip(&x, &x).unwrap().self_adjoint_coordinates());
        }
        assert_eq!(span_dimension(&samples, 1e-9), 1);
    }
}
