//! Bounded A-linear operators between C*-s.i.p. modules.
//!
//! Three A-linear families: fiberwise matrices between bundles, left
//! multiplications on the matrix self-module, and the dual functionals
//! `f_y(x) = [y, x]` into the coefficient algebra. Norm and least-K
//! estimation combine closed forms (where the construction admits one)
//! with seeded sampling plus hill-climbing refinement.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{AlgebraElement, NumericPolicy};
use crate::error::{CsipError, Result};
use crate::module::{csip, module_action, triple_norm, ModuleDescriptor, ModuleElement};
use crate::report::{PropertyTracker, VerificationReport};
use crate::sampling::{random_algebra_element, random_module_element, trial_rng};
use crate::sip::SipSpaceDescriptor;
use crate::verify::FaultMode;

/// An A-linear operator; A-linearity holds structurally for every variant.
#[derive(Clone, Debug, PartialEq)]
pub enum ModuleOperator {
    /// Per-point matrices `T_t : X_t -> Y_t` between bundles over one index
    /// set.
    Fibered {
        domain: ModuleDescriptor,
        codomain: ModuleDescriptor,
        blocks: Vec<DMatrix<Complex64>>,
    },
    /// `x -> c x` on the matrix self-module.
    LeftMult { c: DMatrix<Complex64> },
    /// The dual functional `f_y : X -> A`, `x -> [y, x]`.
    DualFunctional { y: ModuleElement },
}

/// Operator output: a module element, or an algebra element for dual
/// functionals (the algebra is itself an A-module with `[a, b] = a* b`).
#[derive(Clone, Debug, PartialEq)]
pub enum OpValue {
    Module(ModuleElement),
    Algebra(AlgebraElement),
}

impl OpValue {
    /// The norm of the codomain: induced module norm or C*-norm.
    pub fn norm(&self) -> f64 {
        match self {
            OpValue::Module(x) => triple_norm(x),
            OpValue::Algebra(a) => a.cstar_norm(),
        }
    }

    /// Right action of the coefficient algebra on the codomain.
    pub fn act(&self, a: &AlgebraElement) -> Result<OpValue> {
        Ok(match self {
            OpValue::Module(x) => OpValue::Module(module_action(x, a)?),
            OpValue::Algebra(b) => OpValue::Algebra(b.mul(a)?),
        })
    }

    /// The codomain pairing `[y, out]`.
    pub fn pair(&self, out: &OpValue) -> Result<AlgebraElement> {
        match (self, out) {
            (OpValue::Module(y), OpValue::Module(x)) => csip(y, x),
            (OpValue::Algebra(y), OpValue::Algebra(b)) => y.star().mul(b),
            _ => Err(CsipError::DescriptorMismatch(
                "pairing a module element with an algebra element".into(),
            )),
        }
    }

    pub fn distance(&self, other: &OpValue) -> Result<f64> {
        match (self, other) {
            (OpValue::Module(a), OpValue::Module(b)) => {
                Ok(a.add(&b.scalar_mul(Complex64::new(-1.0, 0.0)))?
                    .coordinate_norm())
            }
            (OpValue::Algebra(a), OpValue::Algebra(b)) => a.distance(b),
            _ => Err(CsipError::DescriptorMismatch(
                "comparing a module element with an algebra element".into(),
            )),
        }
    }
}

/// Norm and least-K bounds for an operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    /// Largest sampled `||T x|| / ||x||`, including analytic witnesses.
    pub op_norm_lb: f64,
    /// Closed-form operator norm when the construction admits one.
    pub op_norm_exact: Option<f64>,
    /// Least K with `[Tx, Tx] <= K [x, x]`: exact when available, otherwise
    /// a sampled estimate validated on fresh draws.
    pub k_min_est: f64,
    /// Domain element attaining the reported lower bound.
    pub witness: Option<ModuleElement>,
}

impl ModuleOperator {
    pub fn fibered(
        domain: ModuleDescriptor,
        codomain: ModuleDescriptor,
        blocks: Vec<DMatrix<Complex64>>,
    ) -> Result<Self> {
        let (dom_fibers, cod_fibers) = match (&domain, &codomain) {
            (
                ModuleDescriptor::Bundle { fibers: df },
                ModuleDescriptor::Bundle { fibers: cf },
            ) => (df, cf),
            _ => {
                return Err(CsipError::ShapeMismatch(
                    "fibered operators act between bundles".into(),
                ))
            }
        };
        if dom_fibers.len() != cod_fibers.len() || blocks.len() != dom_fibers.len() {
            return Err(CsipError::ShapeMismatch(format!(
                "{} blocks for {} -> {} fibers",
                blocks.len(),
                dom_fibers.len(),
                cod_fibers.len()
            )));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.nrows() != cod_fibers[i].dim() || b.ncols() != dom_fibers[i].dim() {
                return Err(CsipError::ShapeMismatch(format!(
                    "block {i} is {}x{}, fibers need {}x{}",
                    b.nrows(),
                    b.ncols(),
                    cod_fibers[i].dim(),
                    dom_fibers[i].dim()
                )));
            }
        }
        Ok(ModuleOperator::Fibered {
            domain,
            codomain,
            blocks,
        })
    }

    pub fn left_mult(c: DMatrix<Complex64>) -> Result<Self> {
        if c.nrows() != c.ncols() || c.nrows() == 0 {
            return Err(CsipError::ShapeMismatch(
                "left multiplication needs a square matrix".into(),
            ));
        }
        Ok(ModuleOperator::LeftMult { c })
    }

    pub fn dual_functional(y: ModuleElement) -> Self {
        ModuleOperator::DualFunctional { y }
    }

    pub fn domain(&self) -> ModuleDescriptor {
        match self {
            ModuleOperator::Fibered { domain, .. } => domain.clone(),
            ModuleOperator::LeftMult { c } => ModuleDescriptor::matrix_self(c.nrows()),
            ModuleOperator::DualFunctional { y } => y.descriptor().clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModuleOperator::Fibered { .. } => "fibered",
            ModuleOperator::LeftMult { .. } => "leftmult",
            ModuleOperator::DualFunctional { .. } => "dual",
        }
    }

    /// Rescaled copy `T / s` (dual functionals rescale their defining
    /// element).
    pub fn scaled(&self, factor: f64) -> Self {
        let f = Complex64::new(factor, 0.0);
        match self {
            ModuleOperator::Fibered {
                domain,
                codomain,
                blocks,
            } => ModuleOperator::Fibered {
                domain: domain.clone(),
                codomain: codomain.clone(),
                blocks: blocks.iter().map(|b| b * f).collect(),
            },
            ModuleOperator::LeftMult { c } => ModuleOperator::LeftMult { c: c * f },
            ModuleOperator::DualFunctional { y } => ModuleOperator::DualFunctional {
                y: y.scalar_mul(f.conj()),
            },
        }
    }

    /// Closed-form operator norm where available: `|||y|||` for dual
    /// functionals, the largest block singular value for left multiplications
    /// and Hilbert-fiber bundles.
    pub fn exact_norm(&self) -> Option<f64> {
        match self {
            ModuleOperator::DualFunctional { y } => Some(triple_norm(y)),
            ModuleOperator::LeftMult { c } => Some(sigma_max(c)),
            ModuleOperator::Fibered {
                domain,
                codomain,
                blocks,
            } => {
                let hilbert = |d: &ModuleDescriptor| match d {
                    ModuleDescriptor::Bundle { fibers } => fibers
                        .iter()
                        .all(|f| matches!(f, SipSpaceDescriptor::Hilbert { .. })),
                    _ => false,
                };
                if hilbert(domain) && hilbert(codomain) {
                    Some(
                        blocks
                            .iter()
                            .map(sigma_max)
                            .fold(0.0, f64::max),
                    )
                } else {
                    None
                }
            }
        }
    }

    /// A guaranteed upper bound on the operator norm, used for rescaling
    /// when no closed form exists. For fiber maps between l^p spaces the
    /// Frobenius norm times sqrt(d_in d_out) dominates every p -> q norm.
    pub fn norm_upper_bound(&self) -> f64 {
        match self.exact_norm() {
            Some(v) => v,
            None => match self {
                ModuleOperator::Fibered { blocks, .. } => blocks
                    .iter()
                    .map(|b| {
                        let fro = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                        fro * ((b.nrows() * b.ncols()) as f64).sqrt()
                    })
                    .fold(0.0, f64::max),
                _ => unreachable!("non-fibered operators have exact norms"),
            },
        }
    }

    pub fn apply(&self, x: &ModuleElement) -> Result<OpValue> {
        if *x.descriptor() != self.domain() {
            return Err(CsipError::DescriptorMismatch(format!(
                "operator on {} applied to {}",
                self.domain().label(),
                x.descriptor().label()
            )));
        }
        match self {
            ModuleOperator::Fibered {
                codomain, blocks, ..
            } => {
                let sections = x.sections().expect("bundle payload");
                let cod_fibers = match codomain {
                    ModuleDescriptor::Bundle { fibers } => fibers,
                    _ => unreachable!("validated at construction"),
                };
                let out: Vec<crate::sip::SipVector> = sections
                    .iter()
                    .zip(blocks)
                    .zip(cod_fibers)
                    .map(|((f, b), space)| {
                        let v = nalgebra::DVector::from_column_slice(f.coords());
                        let w = b * v;
                        crate::sip::SipVector::new(space.clone(), w.iter().copied().collect())
                    })
                    .collect::<Result<_>>()?;
                Ok(OpValue::Module(ModuleElement::from_sections(out)?))
            }
            ModuleOperator::LeftMult { c } => {
                let m = x.matrix().expect("matrix payload");
                Ok(OpValue::Module(ModuleElement::from_matrix(c * m)?))
            }
            ModuleOperator::DualFunctional { y } => Ok(OpValue::Algebra(csip(y, x)?)),
        }
    }
}

fn sigma_max(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    crate::algebra::hermitian_eigenvalues(&gram)
        .into_iter()
        .fold(0.0, f64::max)
        .max(0.0)
        .sqrt()
}

/// Applies the operator with an optional injected fault. The fiber-mixing
/// fault rotates the output sections of a uniform bundle by one position,
/// which is no longer A-linear.
pub(crate) fn apply_with_fault(
    op: &ModuleOperator,
    x: &ModuleElement,
    fault: Option<FaultMode>,
) -> Result<OpValue> {
    let out = op.apply(x)?;
    if fault != Some(FaultMode::MixFibers) {
        return Ok(out);
    }
    match out {
        OpValue::Module(m) => {
            if let Some(sections) = m.sections() {
                let uniform = sections
                    .windows(2)
                    .all(|w| w[0].space() == w[1].space());
                if uniform && sections.len() > 1 {
                    let mut rotated = sections.to_vec();
                    rotated.rotate_left(1);
                    return Ok(OpValue::Module(ModuleElement::from_sections(rotated)?));
                }
            }
            Ok(OpValue::Module(m))
        }
        other => Ok(other),
    }
}

/// Verifies `T(x a) = (T x) a` on seeded samples.
pub fn check_a_linear(
    op: &ModuleOperator,
    sample_count: u64,
    seed: u64,
    policy: &NumericPolicy,
) -> VerificationReport {
    check_a_linear_with(op, None, sample_count, seed, 0, policy)
}

pub(crate) fn check_a_linear_with(
    op: &ModuleOperator,
    fault: Option<FaultMode>,
    sample_count: u64,
    seed: u64,
    construction_index: usize,
    policy: &NumericPolicy,
) -> VerificationReport {
    let domain = op.domain();
    let algebra = domain.algebra();
    let mut tracker = PropertyTracker::new(
        &format!("{}_a_linearity", op.label()),
        &domain.label(),
        policy.tol_eq,
    );
    for trial in 0..sample_count {
        let mut rng = trial_rng(seed, "a-linear", construction_index, trial);
        let x = random_module_element(&domain, &mut rng);
        let a = random_algebra_element(&algebra, &mut rng);
        let xa = module_action(&x, &a).expect("algebra matches");
        let lhs = apply_with_fault(op, &xa, fault).expect("domain matches");
        let rhs = apply_with_fault(op, &x, fault)
            .expect("domain matches")
            .act(&a)
            .expect("algebra matches");
        let err = lhs.distance(&rhs).expect("same codomain");
        let scale = 1.0 + lhs.norm().max(rhs.norm());
        tracker.record(-err / scale, || json!({"x": x, "a": a}));
    }
    tracker.finish()
}

/// Least K with `a <= K b` for positive `a`, `b`, by blocks; infinite when
/// `b` vanishes where `a` does not.
fn k_ratio(a: &AlgebraElement, b: &AlgebraElement, policy: &NumericPolicy) -> f64 {
    if let (Some(av), Some(bv)) = (a.function_values(), b.function_values()) {
        let a_scale = 1.0 + a.cstar_norm();
        let b_scale = 1.0 + b.cstar_norm();
        let mut k: f64 = 0.0;
        for (x, y) in av.iter().zip(bv) {
            if y.re <= 1e-14 * b_scale {
                if x.re > 1e-10 * a_scale {
                    return f64::INFINITY;
                }
            } else {
                k = k.max(x.re / y.re);
            }
        }
        k
    } else if a.matrix().is_some() {
        let delta = 1e-12 * (1.0 + b.cstar_norm());
        let c = b
            .regularized_inv_sqrt(delta, policy)
            .expect("b is positive up to round-off");
        let m = c.mul(a).and_then(|t| t.mul(&c)).expect("same descriptor");
        m.max_spectrum().max(0.0)
    } else {
        a.blocks()
            .expect("exhaustive payloads")
            .iter()
            .zip(b.blocks().expect("same descriptor"))
            .map(|(x, y)| k_ratio(x, y, policy))
            .fold(0.0, f64::max)
    }
}

fn sample_ratio(op: &ModuleOperator, x: &ModuleElement) -> f64 {
    let nx = triple_norm(x);
    if nx == 0.0 {
        return 0.0;
    }
    op.apply(x).expect("domain matches").norm() / nx
}

fn sample_k(op: &ModuleOperator, x: &ModuleElement, policy: &NumericPolicy) -> f64 {
    let gram_out = match op.apply(x).expect("domain matches") {
        OpValue::Module(tx) => csip(&tx, &tx).expect("same descriptor"),
        OpValue::Algebra(b) => b.abs_squared(),
    };
    let gram_in = csip(x, x).expect("same descriptor");
    k_ratio(&gram_out, &gram_in, policy)
}

fn hill_climb(
    op: &ModuleOperator,
    objective: impl Fn(&ModuleOperator, &ModuleElement) -> f64,
    mut best: ModuleElement,
    seed: u64,
    iterations: u64,
) -> (ModuleElement, f64) {
    let domain = op.domain();
    let mut best_value = objective(op, &best);
    for it in 0..iterations {
        let mut rng = trial_rng(seed, "ascent", 0, it);
        let step = 0.5 * 0.97f64.powi(it as i32);
        let g = random_module_element(&domain, &mut rng);
        let scale = step * best.coordinate_norm() / (1.0 + g.coordinate_norm());
        let cand = best
            .plus_scaled(Complex64::new(scale, 0.0), &g)
            .expect("same descriptor");
        let v = objective(op, &cand);
        if v > best_value {
            best_value = v;
            best = cand;
        }
    }
    (best, best_value)
}

/// Analytic lower-bound witnesses: `y / |||y|||` for dual functionals, the
/// unit for left multiplications, the top singular section for Hilbert
/// bundles.
fn analytic_witness(op: &ModuleOperator) -> Option<ModuleElement> {
    match op {
        ModuleOperator::DualFunctional { y } => {
            let n = triple_norm(y);
            (n > 0.0).then(|| y.scalar_mul(Complex64::new(1.0 / n, 0.0)))
        }
        ModuleOperator::LeftMult { c } => Some(
            ModuleElement::from_matrix(DMatrix::identity(c.nrows(), c.nrows()))
                .expect("well-formed"),
        ),
        ModuleOperator::Fibered {
            domain, blocks, ..
        } => {
            if op.exact_norm().is_none() {
                return None;
            }
            // Section supported on the best fiber along its top right
            // singular direction.
            let (best_t, _) = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| (i, sigma_max(b)))
                .max_by(|a, b| a.1.total_cmp(&b.1))?;
            let b = &blocks[best_t];
            let gram = b.adjoint() * b;
            let eig = gram.symmetric_eigen();
            let top = (0..eig.eigenvalues.len())
                .max_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))?;
            let v = eig.eigenvectors.column(top);
            let fibers = match domain {
                ModuleDescriptor::Bundle { fibers } => fibers,
                _ => unreachable!(),
            };
            let sections: Vec<crate::sip::SipVector> = fibers
                .iter()
                .enumerate()
                .map(|(i, space)| {
                    if i == best_t {
                        crate::sip::SipVector::new(space.clone(), v.iter().copied().collect())
                    } else {
                        Ok(crate::sip::SipVector::zero(space.clone()))
                    }
                })
                .collect::<Result<_>>()
                .ok()?;
            ModuleElement::from_sections(sections).ok()
        }
    }
}

/// Operator norm bounds: sampled lower bound with ascent refinement and
/// analytic witnesses, closed form where available.
pub fn op_norm(
    op: &ModuleOperator,
    sample_count: u64,
    seed: u64,
    policy: &NumericPolicy,
) -> BoundReport {
    let domain = op.domain();
    let mut best = ModuleElement::zero(&domain);
    let mut best_ratio = 0.0f64;

    if let Some(w) = analytic_witness(op) {
        let r = sample_ratio(op, &w);
        if r > best_ratio {
            best_ratio = r;
            best = w;
        }
    }
    for trial in 0..sample_count {
        let mut rng = trial_rng(seed, "opnorm", 0, trial);
        let x = random_module_element(&domain, &mut rng);
        let r = sample_ratio(op, &x);
        if r > best_ratio {
            best_ratio = r;
            best = x;
        }
    }
    let (witness, lb) = hill_climb(op, sample_ratio, best, seed ^ 0x5eed, 200);

    let exact = op.exact_norm();
    let k_est = match exact {
        Some(v) => v * v,
        None => sample_k(op, &witness, policy),
    };
    BoundReport {
        op_norm_lb: lb,
        op_norm_exact: exact,
        k_min_est: k_est,
        witness: Some(witness),
    }
}

/// Least-K estimation for `[Tx, Tx] <= K [x, x]`. Exact for the closed-form
/// families; otherwise the sampled estimate is raised until a fresh
/// validation batch satisfies the inequality at `K (1 + tol_pos)`.
pub fn min_k(
    op: &ModuleOperator,
    sample_count: u64,
    seed: u64,
    policy: &NumericPolicy,
) -> BoundReport {
    let domain = op.domain();
    let norm_report = op_norm(op, sample_count.min(200), seed, policy);
    let exact = op.exact_norm();

    let (witness, mut k) = match exact {
        Some(v) => (norm_report.witness.clone(), v * v),
        None => {
            let mut best = norm_report
                .witness
                .clone()
                .unwrap_or_else(|| ModuleElement::zero(&domain));
            let mut best_k = sample_k(op, &best, policy);
            for trial in 0..sample_count {
                let mut rng = trial_rng(seed, "mink", 0, trial);
                let x = random_module_element(&domain, &mut rng);
                let v = sample_k(op, &x, policy);
                if v > best_k {
                    best_k = v;
                    best = x;
                }
            }
            let (w, k) = hill_climb(
                op,
                |op, x| sample_k(op, x, policy),
                best,
                seed ^ 0xca11,
                200,
            );
            (Some(w), k)
        }
    };

    // Fresh validation batch; an infeasible draw raises the estimate.
    for trial in 0..sample_count {
        let mut rng = trial_rng(seed ^ 0xf00d, "mink-validate", 0, trial);
        let x = random_module_element(&domain, &mut rng);
        let needed = sample_k(op, &x, policy);
        if needed > k * (1.0 + policy.tol_pos) && needed.is_finite() {
            k = needed;
        }
    }

    BoundReport {
        op_norm_lb: norm_report.op_norm_lb,
        op_norm_exact: exact,
        k_min_est: k.max(norm_report.op_norm_lb.powi(2)),
        witness,
    }
}

/// `x_n = x ([x, x] + 1/n)^(-1/2)`; contracts every element into the unit
/// ball.
pub fn regularized_normalize(
    x: &ModuleElement,
    n: u64,
    policy: &NumericPolicy,
) -> Result<ModuleElement> {
    if n == 0 {
        return Err(CsipError::Domain("regularization index must be >= 1".into()));
    }
    let gram = csip(x, x)?;
    let a_n = gram.regularized_inv_sqrt(1.0 / n as f64, policy)?;
    module_action(x, &a_n)
}

/// The map `r(a) = [y, T(x a)]` must satisfy `r(a) = r(1) a`, and, after
/// normalizing `T`, the chain `r(a)* r(a) <= ||y||^2 ||x||^2 a* a`.
pub fn johnson_property_check(
    op: &ModuleOperator,
    y: &OpValue,
    sample_count: u64,
    seed: u64,
    policy: &NumericPolicy,
) -> Vec<VerificationReport> {
    johnson_property_check_with(op, y, None, sample_count, seed, 0, policy)
}

pub(crate) fn johnson_property_check_with(
    op: &ModuleOperator,
    y: &OpValue,
    fault: Option<FaultMode>,
    sample_count: u64,
    seed: u64,
    construction_index: usize,
    policy: &NumericPolicy,
) -> Vec<VerificationReport> {
    let domain = op.domain();
    let algebra = domain.algebra();
    let label = domain.label();
    // Normalize so that [Tz, Tz] <= [z, z] genuinely holds.
    let bound = op.norm_upper_bound();
    let scaled = if bound > 0.0 {
        op.scaled(1.0 / bound)
    } else {
        op.clone()
    };
    let ny = y.norm();

    let mut identity = PropertyTracker::new("johnson_r_identity", &label, policy.tol_eq);
    let mut chain = PropertyTracker::new("johnson_inequality_chain", &label, 1e-8);

    let unit = AlgebraElement::unit(&algebra);
    for trial in 0..sample_count {
        let mut rng = trial_rng(seed, "johnson", construction_index, trial);
        let x = random_module_element(&domain, &mut rng);
        let a = random_algebra_element(&algebra, &mut rng);
        let nx = triple_norm(&x);

        let r_of = |b: &AlgebraElement| -> AlgebraElement {
            let xb = module_action(&x, b).expect("algebra matches");
            let out = apply_with_fault(&scaled, &xb, fault).expect("domain matches");
            y.pair(&out).expect("same codomain")
        };

        let r_a = r_of(&a);
        let r_1_a = r_of(&unit).mul(&a).expect("same descriptor");
        let err = r_a.distance(&r_1_a).expect("same descriptor");
        let scale = 1.0 + r_a.cstar_norm().max(r_1_a.cstar_norm());
        identity.record(-err / scale, || json!({"x": x, "a": a}));

        // r(a)* r(a) <= ||y||^2 ||x||^2 a* a.
        let lhs = r_a.abs_squared();
        let rhs = a
            .abs_squared()
            .scalar_mul(Complex64::new(ny * ny * nx * nx, 0.0));
        let diff = rhs.sub(&lhs).expect("same descriptor");
        chain.record(
            diff.min_spectrum() / (1.0 + rhs.cstar_norm()),
            || json!({"x": x, "a": a}),
        );
    }
    vec![identity.finish(), chain.finish()]
}
