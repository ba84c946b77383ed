pub mod lp;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cones::{chain_length, fr_membership, ConeError};
use crate::frseq::{
    is_pre_strict, regfr_violation, reverse_indices, rotate_to_regfr_checked, FrSeqError, PivotMode, DEFAULT_TOLERANCE,
};
use crate::instance::{
    CertificateBundle, DualInfeasibleWitness, DualInstance, Instance, InstanceError, PrimalInstance,
    PrimalNotStrongWitness, SeqForm, SeqWitness, VectorDual, VectorPrimal,
};
use crate::linalg::{
    apply_adjoint, congruence, determinant, dot, inner_product, rank_of_vectors, rat, LinalgError, Rat, RatMatrix,
    SymRatMatrix,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    FrSeq(#[from] FrSeqError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn shape(msg: impl Into<String>) -> VerifyError {
    VerifyError::Shape(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Proven,
    Rejected,
    // every exact check passed, but membership rests on the floating-point rotation
    NumericallySupported,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Proven => "proven",
            Status::Rejected => "rejected",
            Status::NumericallySupported => "numerically-supported",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub exact: bool,
    // exact residual for equations; None for structural checks
    pub residual: Option<Rat>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub claim: &'static str,
    pub status: Status,
    pub reason: Option<String>,
    pub transcript: Vec<Check>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn is_proven(&self) -> bool {
        self.status == Status::Proven
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .transcript
            .iter()
            .map(|c| {
                json!({
                    "check": c.name,
                    "passed": c.passed,
                    "exact": c.exact,
                    "residual": c.residual.as_ref().map(ToString::to_string),
                    "detail": c.detail,
                })
            })
            .collect();
        json!({
            "claim": self.claim,
            "status": self.status.name(),
            "reason": self.reason,
            "notes": self.notes,
            "transcript": checks,
        })
    }
}

struct Recorder {
    claim: &'static str,
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl Recorder {
    fn new(claim: &'static str) -> Self {
        Self { claim, checks: Vec::new(), notes: Vec::new() }
    }

    fn residual(&mut self, name: impl Into<String>, residual: Rat) -> bool {
        let passed = residual.is_zero();
        self.checks.push(Check {
            name: name.into(),
            passed,
            exact: true,
            detail: format!("max |lhs - rhs| = {residual}"),
            residual: Some(residual),
        });
        passed
    }

    fn flag(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check { name: name.into(), passed, exact: true, residual: None, detail: detail.into() });
        passed
    }

    fn approx(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check { name: name.into(), passed, exact: false, residual: None, detail: detail.into() });
        passed
    }

    fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn finish(self) -> Verdict {
        let failed = self.checks.iter().find(|c| !c.passed).map(|c| c.name.clone());
        let status = match failed {
            Some(_) => Status::Rejected,
            None if self.checks.iter().all(|c| c.exact) => Status::Proven,
            None => Status::NumericallySupported,
        };
        Verdict { claim: self.claim, status, reason: failed, transcript: self.checks, notes: self.notes }
    }
}

fn max_abs_diff(lhs: &[Rat], rhs: &[Rat]) -> Rat {
    lhs.iter().zip(rhs).map(|(a, b)| (a - b).abs()).max().unwrap_or_else(Rat::zero)
}

fn check_square(name: &str, m: &RatMatrix, n: usize) -> Result<(), VerifyError> {
    if m.rows() != n || m.cols() != n {
        return Err(shape(format!("{name} is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
    }
    Ok(())
}

fn invertible(rec: &mut Recorder, name: &str, m: &RatMatrix) -> bool {
    let det = determinant(m).unwrap_or_else(Rat::zero);
    rec.flag(format!("{name} invertible"), !det.is_zero(), format!("det = {det}"))
}

fn check_orders(what: &str, mats: &[SymRatMatrix], n: usize) -> Result<(), VerifyError> {
    match mats.iter().position(|y| y.order() != n) {
        Some(i) => Err(shape(format!("{what} {i} has order {}, expected {n}", mats[i].order()))),
        None => Ok(()),
    }
}

fn describe_violation(v: Option<(usize, usize, usize)>) -> String {
    match v {
        None => "pattern holds".into(),
        Some((i, r, c)) => format!("member {i} breaks the pattern at ({r}, {c})"),
    }
}

// Exact staircase check of s^T y_i s, or the rotation path for unstructured input.
fn sequence_membership(rec: &mut Recorder, label: &str, w: &SeqWitness, tolerance: f64) -> Result<(), VerifyError> {
    let n = w.ys.first().map_or(0, SymRatMatrix::order);
    check_square("rotation s", &w.s, n)?;
    if w.form == SeqForm::General {
        match rotate_to_regfr_checked(&w.ys, tolerance) {
            Ok(rot) => {
                rec.approx(
                    format!("{label} in FR(psd) via rotation"),
                    true,
                    format!("sizes {:?}, residual {:e}", rot.sizes, rot.residual),
                );
            }
            Err(e) => {
                rec.approx(format!("{label} in FR(psd) via rotation"), false, e.to_string());
            }
        }
        return Ok(());
    }
    if w.ys.len() != w.sizes.len() {
        return Err(shape(format!("{} members but {} block sizes", w.ys.len(), w.sizes.len())));
    }
    if !invertible(rec, "rotation s", &w.s) {
        return Ok(());
    }
    let mut structured = w.ys.iter().map(|y| congruence(&w.s, y)).collect::<Result<Vec<_>, _>>()?;
    if w.form == SeqForm::Revregfr {
        structured = structured.iter().map(reverse_indices).collect();
    }
    let v = regfr_violation(&structured, &w.sizes, PivotMode::PositiveDefinite)?;
    rec.flag(format!("{label} in {} with sizes {:?}", w.form.name(), w.sizes), v.is_none(), describe_violation(v));
    Ok(())
}

pub fn verify_dual_infeasible(inst: &DualInstance, w: &DualInfeasibleWitness) -> Result<Verdict, VerifyError> {
    let (n, m) = (inst.n, inst.m());
    check_square("row operation matrix M", &w.m, m)?;
    check_square("rotation t", &w.t, n)?;
    let k1 = w.sizes.len();
    if k1 == 0 || k1 > m {
        return Err(shape(format!("staircase length {k1} must be in 1..={m}")));
    }
    let k = k1 - 1;
    let mut rec = Recorder::new("dual infeasible");
    let ok_m = invertible(&mut rec, "M", &w.m);
    let ok_t = invertible(&mut rec, "t", &w.t);
    if !(ok_m && ok_t) {
        return Ok(rec.finish());
    }
    let r = inst.reformulate(&w.m, &w.t)?;
    let mut target = vec![Rat::zero(); k];
    target.push(rat(-1));
    rec.residual("c' = (0, .., 0, -1, *)", max_abs_diff(&r.c[..k1], &target));
    let v = regfr_violation(&r.a[..k1], &w.sizes, PivotMode::PositiveDefinite)?;
    rec.flag(format!("(a'_1..a'_{k1}) in regfr with sizes {:?}", w.sizes), v.is_none(), describe_violation(v));
    rec.flag("pre-strict", is_pre_strict(&w.sizes), format!("sizes {:?}", w.sizes));
    rec.flag("k <= n - 1", k < n, format!("k = {k}, n = {n}"));
    Ok(rec.finish())
}

pub fn verify_dual_not_strongly_infeasible(inst: &DualInstance, w: &SeqWitness) -> Result<Verdict, VerifyError> {
    verify_dual_not_strongly_infeasible_tol(inst, w, DEFAULT_TOLERANCE)
}

pub fn verify_dual_not_strongly_infeasible_tol(
    inst: &DualInstance,
    w: &SeqWitness,
    tolerance: f64,
) -> Result<Verdict, VerifyError> {
    let n = inst.n;
    if w.ys.is_empty() {
        return Err(shape("empty y sequence"));
    }
    check_orders("y", &w.ys, n)?;
    let l = w.ys.len() - 1;
    let mut rec = Recorder::new("dual not strongly infeasible");
    let zeros = vec![Rat::zero(); inst.m()];
    for (i, y) in w.ys[..l].iter().enumerate() {
        rec.residual(format!("A*y_{} = 0", i + 1), max_abs_diff(&apply_adjoint(&inst.a, y)?, &zeros));
    }
    rec.residual(format!("A*y_{} = c", l + 1), max_abs_diff(&apply_adjoint(&inst.a, &w.ys[l])?, &inst.c));
    sequence_membership(&mut rec, "(y_j)", w, tolerance)?;
    rec.flag("l <= n - 1", l < n.max(1), format!("l = {l}, n = {n}"));
    if l == 0 && rec.all_passed() {
        rec.notes.push("l = 0: y_1 is psd with A*y_1 = c, so the system is actually feasible".into());
    }
    Ok(rec.finish())
}

pub fn verify_primal_infeasible(inst: &PrimalInstance, w: &SeqWitness) -> Result<Verdict, VerifyError> {
    verify_primal_infeasible_tol(inst, w, DEFAULT_TOLERANCE)
}

pub fn verify_primal_infeasible_tol(
    inst: &PrimalInstance,
    w: &SeqWitness,
    tolerance: f64,
) -> Result<Verdict, VerifyError> {
    let n = inst.n;
    if w.ys.is_empty() {
        return Err(shape("empty y sequence"));
    }
    check_orders("y", &w.ys, n)?;
    let k = w.ys.len() - 1;
    let mut rec = Recorder::new("primal infeasible");
    let zeros = vec![Rat::zero(); inst.m()];
    for (i, y) in w.ys.iter().enumerate() {
        rec.residual(format!("A*y_{} = 0", i + 1), max_abs_diff(&apply_adjoint(&inst.a, y)?, &zeros));
        let target = if i == k { rat(-1) } else { Rat::zero() };
        let by = inner_product(&inst.b, y)?;
        rec.residual(format!("b*y_{} = {target}", i + 1), (by - target).abs());
    }
    sequence_membership(&mut rec, "(y_j)", w, tolerance)?;
    rec.flag("k <= n - 1", k < n, format!("k = {k}, n = {n}"));
    Ok(rec.finish())
}

pub fn verify_primal_not_strongly_infeasible(
    inst: &PrimalInstance,
    w: &PrimalNotStrongWitness,
) -> Result<Verdict, VerifyError> {
    let (n, m) = (inst.n, inst.m());
    check_square("column operation matrix M", &w.m, m)?;
    check_square("rotation t", &w.t, n)?;
    if w.mu.len() != m {
        return Err(shape(format!("shift mu has length {}, expected {m}", w.mu.len())));
    }
    if w.sizes.is_empty() {
        return Err(shape("empty block size list"));
    }
    let l = w.sizes.len() - 1;
    if l > m {
        return Err(shape(format!("l = {l} exceeds m = {m}")));
    }
    let mut rec = Recorder::new("primal not strongly infeasible");
    let ok_m = invertible(&mut rec, "M", &w.m);
    let ok_t = invertible(&mut rec, "t", &w.t);
    if !(ok_m && ok_t) {
        return Ok(rec.finish());
    }
    let r = inst.reformulate(&w.m, &w.mu, &w.t)?;
    let mut seq: Vec<SymRatMatrix> = r.a[..l].to_vec();
    seq.push(r.b.clone());
    let v = regfr_violation(&seq, &w.sizes, PivotMode::PositiveDefinite)?;
    rec.flag(format!("(a'_1..a'_{l}, b') in regfr with sizes {:?}", w.sizes), v.is_none(), describe_violation(v));
    rec.flag("pre-strict", is_pre_strict(&w.sizes), format!("sizes {:?}", w.sizes));
    rec.flag("l <= min(m, n - 1)", l <= m && l < n, format!("l = {l}, m = {m}, n = {n}"));
    if l == 0 && rec.all_passed() {
        rec.notes.push("l = 0: b' is psd, so x = 0 is feasible after the shift".into());
    }
    Ok(rec.finish())
}

fn svecs(mats: &[SymRatMatrix]) -> Vec<Vec<Rat>> {
    mats.iter().map(SymRatMatrix::svec).collect()
}

// The a-witness and y-witness of a nonclosed linear image A*K*.
pub fn verify_nonclosedness_witness(
    a_list: &[SymRatMatrix],
    aseq: &SeqWitness,
    yseq: &SeqWitness,
) -> Result<Verdict, VerifyError> {
    let n = a_list.first().map_or(0, SymRatMatrix::order);
    check_orders("constraint", a_list, n)?;
    check_orders("a", &aseq.ys, n)?;
    check_orders("y", &yseq.ys, n)?;
    let mut rec = Recorder::new("image of the dual cone is not closed");
    if aseq.ys.len() < 2 || yseq.ys.len() < 2 {
        rec.flag("k >= 1 and l >= 1", false, format!("{} a-members, {} y-members", aseq.ys.len(), yseq.ys.len()));
        return Ok(rec.finish());
    }
    let (k, l) = (aseq.ys.len() - 1, yseq.ys.len() - 1);
    let base = svecs(a_list);
    let r0 = rank_of_vectors(&base);
    for (i, ai) in aseq.ys.iter().enumerate() {
        let mut ext = base.clone();
        ext.push(ai.svec());
        let r1 = rank_of_vectors(&ext);
        rec.flag(format!("a_{} in range(A)", i + 1), r1 == r0, format!("rank {r0} -> {r1}"));
    }
    let zeros = vec![Rat::zero(); a_list.len()];
    for (j, y) in yseq.ys[..l].iter().enumerate() {
        rec.residual(format!("y_{} in null(A*)", j + 1), max_abs_diff(&apply_adjoint(a_list, y)?, &zeros));
    }
    let last = &yseq.ys[l];
    let products = aseq.ys.iter().map(|a| inner_product(a, last)).collect::<Result<Vec<_>, _>>()?;
    let mut target = vec![Rat::zero(); k];
    target.push(rat(-1));
    rec.residual(format!("<a_i, y_{}> = (0, .., 0, -1)", l + 1), max_abs_diff(&products, &target));
    sequence_membership(&mut rec, "(a_i)", aseq, DEFAULT_TOLERANCE)?;
    sequence_membership(&mut rec, "(y_j)", yseq, DEFAULT_TOLERANCE)?;
    Ok(rec.finish())
}

pub fn verify_vector_dual_infeasible(inst: &VectorDual, m: &RatMatrix, k: usize) -> Result<Verdict, VerifyError> {
    check_square("row operation matrix M", m, inst.m())?;
    if k + 1 > inst.m() {
        return Err(shape(format!("k + 1 = {} exceeds m = {}", k + 1, inst.m())));
    }
    let mut rec = Recorder::new("dual infeasible");
    if !invertible(&mut rec, "M", m) {
        return Ok(rec.finish());
    }
    let r = inst.reformulate(m)?;
    let mut target = vec![Rat::zero(); k];
    target.push(rat(-1));
    rec.residual("c' = (0, .., 0, -1, *)", max_abs_diff(&r.c[..=k], &target));
    let member = fr_membership(&r.a[..=k], &inst.cone)?;
    rec.flag(format!("(a'_1..a'_{}) in FR of the dual of the variable cone", k + 1), member, "exact face tracking");
    let bound = chain_length(&inst.cone) - 1;
    rec.flag("k <= chain length - 1", k <= bound, format!("k = {k}, bound {bound}"));
    Ok(rec.finish())
}

pub fn verify_vector_dual_not_strongly_infeasible(inst: &VectorDual, ys: &[Vec<Rat>]) -> Result<Verdict, VerifyError> {
    if ys.is_empty() {
        return Err(shape("empty y sequence"));
    }
    if let Some(i) = ys.iter().position(|y| y.len() != inst.dim()) {
        return Err(shape(format!("y_{} has length {}, expected {}", i + 1, ys[i].len(), inst.dim())));
    }
    let l = ys.len() - 1;
    let mut rec = Recorder::new("dual not strongly infeasible");
    let zeros = vec![Rat::zero(); inst.m()];
    for (i, y) in ys[..l].iter().enumerate() {
        rec.residual(format!("A*y_{} = 0", i + 1), max_abs_diff(&inst.adjoint(y), &zeros));
    }
    rec.residual(format!("A*y_{} = c", l + 1), max_abs_diff(&inst.adjoint(&ys[l]), &inst.c));
    let member = fr_membership(ys, &inst.cone.dual())?;
    rec.flag("(y_j) in FR with y_1 in the variable cone", member, "exact face tracking");
    let bound = chain_length(&inst.cone) - 1;
    rec.flag("l <= chain length - 1", l <= bound, format!("l = {l}, bound {bound}"));
    if l == 0 && rec.all_passed() {
        rec.notes.push("l = 0: y_1 is feasible, so the system is actually feasible".into());
    }
    Ok(rec.finish())
}

pub fn verify_vector_primal_infeasible(inst: &VectorPrimal, ys: &[Vec<Rat>]) -> Result<Verdict, VerifyError> {
    if ys.is_empty() {
        return Err(shape("empty y sequence"));
    }
    let d = inst.cone.ambient_dim();
    if let Some(i) = ys.iter().position(|y| y.len() != d) {
        return Err(shape(format!("y_{} has length {}, expected {d}", i + 1, ys[i].len())));
    }
    let k = ys.len() - 1;
    let mut rec = Recorder::new("primal infeasible");
    let zeros = vec![Rat::zero(); inst.m()];
    for (i, y) in ys.iter().enumerate() {
        let ay: Vec<Rat> = inst.a.iter().map(|a| dot(a, y)).collect();
        rec.residual(format!("A*y_{} = 0", i + 1), max_abs_diff(&ay, &zeros));
        let target = if i == k { rat(-1) } else { Rat::zero() };
        rec.residual(format!("b*y_{} = {target}", i + 1), (dot(&inst.b, y) - target).abs());
    }
    let member = fr_membership(ys, &inst.cone)?;
    rec.flag("(y_j) in FR of the slack cone", member, "exact face tracking");
    let bound = chain_length(&inst.cone) - 1;
    rec.flag("k <= chain length - 1", k <= bound, format!("k = {k}, bound {bound}"));
    Ok(rec.finish())
}

pub fn verify_vector_primal_not_strongly_infeasible(
    inst: &VectorPrimal,
    m: &RatMatrix,
    mu: &[Rat],
    l: usize,
) -> Result<Verdict, VerifyError> {
    check_square("column operation matrix M", m, inst.m())?;
    if mu.len() != inst.m() || l > inst.m() {
        return Err(shape("shift or l out of range"));
    }
    let mut rec = Recorder::new("primal not strongly infeasible");
    if !invertible(&mut rec, "M", m) {
        return Ok(rec.finish());
    }
    let as_dual = VectorDual { a: inst.a.clone(), c: vec![Rat::zero(); inst.m()], cone: inst.cone.clone() };
    let mut seq: Vec<Vec<Rat>> = (0..l).map(|i| as_dual.apply(&m.column(i))).collect();
    let shift = as_dual.apply(mu);
    seq.push(inst.b.iter().zip(&shift).map(|(b, s)| b + s).collect());
    let member = fr_membership(&seq, &inst.cone.dual())?;
    rec.flag(format!("(a'_1..a'_{l}, b') in FR with first member in the slack cone"), member, "exact face tracking");
    let bound = (chain_length(&inst.cone) - 1).min(inst.m());
    rec.flag("l <= min(m, chain length - 1)", l <= bound, format!("l = {l}, bound {bound}"));
    Ok(rec.finish())
}

// Every verdict the bundle supports for this instance.
pub fn verify_bundle(instance: &Instance, bundle: &CertificateBundle) -> Result<Vec<Verdict>, VerifyError> {
    verify_bundle_tol(instance, bundle, DEFAULT_TOLERANCE)
}

// The tolerance only affects sequences checked through the rotation path.
pub fn verify_bundle_tol(
    instance: &Instance,
    bundle: &CertificateBundle,
    tolerance: f64,
) -> Result<Vec<Verdict>, VerifyError> {
    let mut out = Vec::new();
    match instance {
        Instance::Dual(d) => {
            if let Some(w) = &bundle.dual_infeasible {
                out.push(verify_dual_infeasible(d, w)?);
            }
            if let Some(w) = &bundle.dual_not_strong {
                out.push(verify_dual_not_strongly_infeasible_tol(d, w, tolerance)?);
            }
        }
        Instance::Primal(p) => {
            if let Some(w) = &bundle.primal_infeasible {
                out.push(verify_primal_infeasible_tol(p, w, tolerance)?);
            }
            if let Some(w) = &bundle.primal_not_strong {
                out.push(verify_primal_not_strongly_infeasible(p, w)?);
            }
        }
        Instance::VectorDual(_) | Instance::VectorPrimal(_) => {}
    }
    Ok(out)
}

// Infeasible and not strongly infeasible, both exactly.
pub fn verify_weakly_infeasible(inst: &DualInstance, bundle: &CertificateBundle) -> Result<bool, VerifyError> {
    let (Some(inf), Some(ns)) = (&bundle.dual_infeasible, &bundle.dual_not_strong) else {
        return Ok(false);
    };
    Ok(verify_dual_infeasible(inst, inf)?.is_proven() && verify_dual_not_strongly_infeasible(inst, ns)?.is_proven())
}

pub fn identity_witness(n: usize, m: usize, sizes: Vec<usize>) -> DualInfeasibleWitness {
    DualInfeasibleWitness { m: RatMatrix::identity(m), t: RatMatrix::identity(n), sizes }
}
