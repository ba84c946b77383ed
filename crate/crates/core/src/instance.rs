use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::cones::{ConeError, ConeSpec};
use crate::linalg::{congruence, dot, linear_combination, LinalgError, Rat, RatMatrix, SymRatMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("constraint {index} has order {found}, expected {expected}")]
    OrderMismatch { index: usize, expected: usize, found: usize },
    #[error("{constraints} constraint matrices but {rhs} right-hand sides")]
    RhsLength { constraints: usize, rhs: usize },
    #[error("constraint {index} has length {found}, cone ambient dimension is {expected}")]
    VectorLength { index: usize, expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

fn check_orders(a: &[SymRatMatrix], n: usize) -> Result<(), InstanceError> {
    for (index, ai) in a.iter().enumerate() {
        if ai.order() != n {
            return Err(InstanceError::OrderMismatch { index, expected: n, found: ai.order() });
        }
    }
    Ok(())
}

// inf <b, y>  s.t.  <a_i, y> = c_i,  y psd
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualInstance {
    pub n: usize,
    pub a: Vec<SymRatMatrix>,
    pub c: Vec<Rat>,
    pub objective: SymRatMatrix,
}

impl DualInstance {
    pub fn new(a: Vec<SymRatMatrix>, c: Vec<Rat>) -> Result<Self, InstanceError> {
        let n = a.first().map_or(0, SymRatMatrix::order);
        Self::with_objective(a, c, SymRatMatrix::identity(n))
    }

    pub fn with_objective(a: Vec<SymRatMatrix>, c: Vec<Rat>, objective: SymRatMatrix) -> Result<Self, InstanceError> {
        let n = objective.order();
        check_orders(&a, n)?;
        if a.len() != c.len() {
            return Err(InstanceError::RhsLength { constraints: a.len(), rhs: c.len() });
        }
        Ok(Self { n, a, c, objective })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn cone(&self) -> ConeSpec {
        ConeSpec::psd(self.n)
    }

    // a'_i = t^T (sum_j M_ji a_j) t,  c' = M^T c
    pub fn reformulate(&self, m: &RatMatrix, t: &RatMatrix) -> Result<DualInstance, InstanceError> {
        let a = combine_columns(&self.a, m)?.iter().map(|x| congruence(t, x)).collect::<Result<Vec<_>, _>>()?;
        let c = m.transpose().mul_vec(&self.c)?;
        let objective = congruence(t, &self.objective)?;
        Ok(DualInstance { n: t.cols(), a, c, objective })
    }
}

// sup <c, x>  s.t.  sum_i x_i a_i <= b  in the psd order
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimalInstance {
    pub n: usize,
    pub a: Vec<SymRatMatrix>,
    pub b: SymRatMatrix,
    pub c: Vec<Rat>,
}

impl PrimalInstance {
    pub fn new(a: Vec<SymRatMatrix>, b: SymRatMatrix) -> Result<Self, InstanceError> {
        let c = vec![Rat::zero(); a.len()];
        Self::with_objective(a, b, c)
    }

    pub fn with_objective(a: Vec<SymRatMatrix>, b: SymRatMatrix, c: Vec<Rat>) -> Result<Self, InstanceError> {
        let n = b.order();
        check_orders(&a, n)?;
        if a.len() != c.len() {
            return Err(InstanceError::RhsLength { constraints: a.len(), rhs: c.len() });
        }
        Ok(Self { n, a, b, c })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn slack(&self, x: &[Rat]) -> Result<SymRatMatrix, InstanceError> {
        Ok(self.b.sub(&linear_combination(x, &self.a)?)?)
    }

    // a'_i = t^T (sum_j M_ji a_j) t,  b' = t^T (b + sum_j mu_j a_j) t
    pub fn reformulate(&self, m: &RatMatrix, mu: &[Rat], t: &RatMatrix) -> Result<PrimalInstance, InstanceError> {
        let a = combine_columns(&self.a, m)?.iter().map(|x| congruence(t, x)).collect::<Result<Vec<_>, _>>()?;
        let shifted = self.b.add(&linear_combination(mu, &self.a)?)?;
        let b = congruence(t, &shifted)?;
        let c = m.transpose().mul_vec(&self.c)?;
        Ok(PrimalInstance { n: t.cols(), a, b, c })
    }
}

pub fn combine_columns(a: &[SymRatMatrix], m: &RatMatrix) -> Result<Vec<SymRatMatrix>, InstanceError> {
    if m.rows() != a.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: format!("{} rows", a.len()),
            found: m.rows().to_string(),
        }
        .into());
    }
    (0..m.cols()).map(|i| Ok(linear_combination(&m.column(i), a)?)).collect()
}

// Dual-form system over a product of vector cones: <a_i, y> = c_i, y in cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorDual {
    pub a: Vec<Vec<Rat>>,
    pub c: Vec<Rat>,
    pub cone: ConeSpec,
}

impl VectorDual {
    pub fn new(a: Vec<Vec<Rat>>, c: Vec<Rat>, cone: ConeSpec) -> Result<Self, InstanceError> {
        check_lengths(&a, &cone)?;
        if a.len() != c.len() {
            return Err(InstanceError::RhsLength { constraints: a.len(), rhs: c.len() });
        }
        Ok(Self { a, c, cone })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        self.cone.ambient_dim()
    }

    pub fn adjoint(&self, y: &[Rat]) -> Vec<Rat> {
        self.a.iter().map(|ai| dot(ai, y)).collect()
    }

    // A x as a vector in the ambient space
    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.dim()];
        for (xi, ai) in x.iter().zip(&self.a) {
            if xi.is_zero() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(ai) {
                *o += xi * v;
            }
        }
        out
    }

    pub fn reformulate(&self, m: &RatMatrix) -> Result<VectorDual, InstanceError> {
        let a = (0..m.cols()).map(|i| self.apply(&m.column(i))).collect::<Vec<_>>();
        let c = m.transpose().mul_vec(&self.c)?;
        Ok(VectorDual { a, c, cone: self.cone.clone() })
    }
}

// Primal-form system over a product of vector cones: b - sum x_i a_i in cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorPrimal {
    pub a: Vec<Vec<Rat>>,
    pub b: Vec<Rat>,
    pub cone: ConeSpec,
}

impl VectorPrimal {
    pub fn new(a: Vec<Vec<Rat>>, b: Vec<Rat>, cone: ConeSpec) -> Result<Self, InstanceError> {
        check_lengths(&a, &cone)?;
        if b.len() != cone.ambient_dim() {
            return Err(InstanceError::VectorLength { index: a.len(), expected: cone.ambient_dim(), found: b.len() });
        }
        Ok(Self { a, b, cone })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }
}

fn check_lengths(a: &[Vec<Rat>], cone: &ConeSpec) -> Result<(), InstanceError> {
    let d = cone.ambient_dim();
    for (index, ai) in a.iter().enumerate() {
        if ai.len() != d {
            return Err(InstanceError::VectorLength { index, expected: d, found: ai.len() });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqForm {
    Regfr,
    Revregfr,
    // no claimed structure: checked through the floating-point rotation
    General,
}

impl SeqForm {
    pub fn name(&self) -> &'static str {
        match self {
            SeqForm::Regfr => "regfr",
            SeqForm::Revregfr => "revregfr",
            SeqForm::General => "general",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "regfr" => Some(SeqForm::Regfr),
            "revregfr" => Some(SeqForm::Revregfr),
            "general" => Some(SeqForm::General),
            _ => None,
        }
    }
}

// Row operations M and rotation t bringing the constraints to staircase form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualInfeasibleWitness {
    pub m: RatMatrix,
    pub t: RatMatrix,
    pub sizes: Vec<usize>,
}

// A facial reduction sequence of psd matrices; s^T y_i s carries the claimed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqWitness {
    pub ys: Vec<SymRatMatrix>,
    pub s: RatMatrix,
    pub sizes: Vec<usize>,
    pub form: SeqForm,
}

impl SeqWitness {
    pub fn plain(ys: Vec<SymRatMatrix>, sizes: Vec<usize>, form: SeqForm) -> Self {
        let n = ys.first().map_or(0, SymRatMatrix::order);
        Self { ys, s: RatMatrix::identity(n), sizes, form }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimalNotStrongWitness {
    pub m: RatMatrix,
    pub mu: Vec<Rat>,
    pub t: RatMatrix,
    pub sizes: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    pub entries: BTreeMap<String, String>,
}

impl Provenance {
    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CertificateBundle {
    pub dual_infeasible: Option<DualInfeasibleWitness>,
    pub dual_not_strong: Option<SeqWitness>,
    pub primal_infeasible: Option<SeqWitness>,
    pub primal_not_strong: Option<PrimalNotStrongWitness>,
    pub provenance: Provenance,
}

impl CertificateBundle {
    pub fn is_empty(&self) -> bool {
        self.dual_infeasible.is_none()
            && self.dual_not_strong.is_none()
            && self.primal_infeasible.is_none()
            && self.primal_not_strong.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Dual(DualInstance),
    Primal(PrimalInstance),
    VectorDual(VectorDual),
    VectorPrimal(VectorPrimal),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Dual(_) => "dual-sdp",
            Instance::Primal(_) => "primal-sdp",
            Instance::VectorDual(_) => "dual-vector",
            Instance::VectorPrimal(_) => "primal-vector",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratq};

    #[test]
    fn reformulation_matches_row_operations() {
        let a = vec![
            SymRatMatrix::from_i64(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]]),
            SymRatMatrix::from_i64(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]),
            SymRatMatrix::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]),
        ];
        let inst = DualInstance::new(a, vec![rat(0), rat(-2), rat(1)]).unwrap();
        let m = RatMatrix::from_rows(vec![
            vec![rat(1), rat(0), rat(0)],
            vec![rat(0), ratq(2, 3), rat(0)],
            vec![rat(0), ratq(1, 3), rat(1)],
        ])
        .unwrap();
        let r = inst.reformulate(&m, &RatMatrix::identity(3)).unwrap();
        assert_eq!(r.c, vec![rat(0), rat(-1), rat(1)]);
        assert_eq!(r.a[1].get(0, 0), &ratq(1, 3));
        assert_eq!(r.a[1].get(0, 2), &ratq(2, 3));
        assert_eq!(r.a[1].get(1, 1), &rat(1));
    }

    #[test]
    fn order_mismatch_is_reported() {
        let err = DualInstance::new(vec![SymRatMatrix::zeros(2), SymRatMatrix::zeros(3)], vec![rat(0), rat(0)]);
        assert!(matches!(err, Err(InstanceError::OrderMismatch { index: 1, .. })));
    }

    #[test]
    fn vector_reformulation_applies_columns() {
        let inst = VectorDual::new(
            vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]],
            vec![rat(2), rat(3)],
            ConeSpec::orthant(2),
        )
        .unwrap();
        let m = RatMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let r = inst.reformulate(&m).unwrap();
        assert_eq!(r.a[1], vec![rat(1), rat(1)]);
        assert_eq!(r.c, vec![rat(2), rat(5)]);
    }
}
