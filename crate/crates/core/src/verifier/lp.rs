use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cones::{is_psd, BlockKind, ConeSpec};
use crate::instance::{DualInstance, VectorDual, VectorPrimal};
use crate::linalg::{dot, linear_combination, rat, rref, scale_to_primitive_integers, Rat, RatMatrix};

pub const DEFAULT_ROW_LIMIT: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("elimination produced more than {0} inequalities")]
    SizeGuard(usize),
    #[error("cone block {0} is not polyhedral")]
    NotPolyhedral(BlockKind),
    #[error("coefficient row has length {found}, expected {expected}")]
    Width { expected: usize, found: usize },
    #[error("neither the system nor its alternative is feasible; this indicates a bug")]
    AlternativeFailed,
}

// coeffs . z >= rhs, or > when strict
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
    pub strict: bool,
}

#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub nvars: usize,
    pub equalities: Vec<(Vec<Rat>, Rat)>,
    pub inequalities: Vec<Inequality>,
}

impl LinearSystem {
    pub fn new(nvars: usize) -> Self {
        Self { nvars, ..Self::default() }
    }

    pub fn eq(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        self.equalities.push((coeffs, rhs));
    }

    pub fn ge(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        self.inequalities.push(Inequality { coeffs, rhs, strict: false });
    }

    pub fn gt(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        self.inequalities.push(Inequality { coeffs, rhs, strict: true });
    }

    pub fn unit(&self, j: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.nvars];
        v[j] = Rat::one();
        v
    }

    pub fn is_satisfied_by(&self, z: &[Rat]) -> bool {
        self.equalities.iter().all(|(a, b)| &dot(a, z) == b)
            && self.inequalities.iter().all(|q| {
                let v = dot(&q.coeffs, z);
                if q.strict {
                    v > q.rhs
                } else {
                    v >= q.rhs
                }
            })
    }
}

fn normalize(q: Inequality) -> Inequality {
    let mut all = q.coeffs.clone();
    all.push(q.rhs.clone());
    if all.iter().all(Zero::is_zero) {
        return q;
    }
    let mut scaled = scale_to_primitive_integers(&all);
    let rhs = scaled.pop().expect("nonempty");
    Inequality { coeffs: scaled, rhs, strict: q.strict }
}

fn dedupe(rows: Vec<Inequality>) -> Vec<Inequality> {
    let mut seen: HashMap<(Vec<Rat>, Rat), bool> = HashMap::new();
    let mut order = Vec::new();
    for q in rows.into_iter().map(normalize) {
        let key = (q.coeffs, q.rhs);
        match seen.get_mut(&key) {
            Some(s) => *s |= q.strict,
            None => {
                order.push(key.clone());
                seen.insert(key, q.strict);
            }
        }
    }
    order
        .into_iter()
        .map(|key| {
            let strict = seen[&key];
            Inequality { coeffs: key.0, rhs: key.1, strict }
        })
        .collect()
}

// Each free variable's inequalities, recorded at elimination time for back-substitution.
struct Level {
    var: usize,
    rows: Vec<Inequality>,
}

fn pick_value(lo: Option<(Rat, bool)>, hi: Option<(Rat, bool)>) -> Rat {
    let inside = |x: &Rat| {
        lo.as_ref().is_none_or(|(l, s)| if *s { x > l } else { x >= l })
            && hi.as_ref().is_none_or(|(h, s)| if *s { x < h } else { x <= h })
    };
    let zero = Rat::zero();
    if inside(&zero) {
        return zero;
    }
    match (&lo, &hi) {
        (Some((l, ls)), Some((h, _))) => {
            if !ls && inside(l) {
                return l.clone();
            }
            let c = l.ceil();
            if inside(&c) {
                return c;
            }
            (l + h) / rat(2)
        }
        (Some((l, s)), None) => {
            if *s {
                l.floor() + Rat::one()
            } else {
                l.ceil()
            }
        }
        (None, Some((h, s))) => {
            if *s {
                h.ceil() - Rat::one()
            } else {
                h.floor()
            }
        }
        (None, None) => zero,
    }
}

// Exact Fourier-Motzkin elimination; returns a feasible point or None.
pub fn fm_solve(sys: &LinearSystem, row_limit: usize) -> Result<Option<Vec<Rat>>, LpError> {
    let nv = sys.nvars;
    for (a, _) in &sys.equalities {
        if a.len() != nv {
            return Err(LpError::Width { expected: nv, found: a.len() });
        }
    }
    for q in &sys.inequalities {
        if q.coeffs.len() != nv {
            return Err(LpError::Width { expected: nv, found: q.coeffs.len() });
        }
    }
    // equalities: z_pivot = rhs - sum over free columns
    let mut aug = RatMatrix::zeros(sys.equalities.len(), nv + 1);
    for (i, (a, b)) in sys.equalities.iter().enumerate() {
        for (j, v) in a.iter().enumerate() {
            aug.set(i, j, v.clone());
        }
        aug.set(i, nv, b.clone());
    }
    let r = rref(&aug);
    if r.pivots.contains(&nv) {
        return Ok(None);
    }
    let free: Vec<usize> = (0..nv).filter(|j| !r.pivots.contains(j)).collect();
    let nf = free.len();
    // z = base + sum_f basis_f * w_f
    let mut base = vec![Rat::zero(); nv];
    let mut basis = vec![vec![Rat::zero(); nv]; nf];
    for (fi, &f) in free.iter().enumerate() {
        basis[fi][f] = Rat::one();
    }
    for (row, &p) in r.pivots.iter().enumerate() {
        base[p] = r.matrix.get(row, nv).clone();
        for (fi, &f) in free.iter().enumerate() {
            basis[fi][p] = -r.matrix.get(row, f).clone();
        }
    }
    let mut rows: Vec<Inequality> = sys
        .inequalities
        .iter()
        .map(|q| Inequality {
            coeffs: basis.iter().map(|b| dot(&q.coeffs, b)).collect(),
            rhs: &q.rhs - dot(&q.coeffs, &base),
            strict: q.strict,
        })
        .collect();
    let mut remaining: BTreeSet<usize> = (0..nf).collect();
    let mut levels = Vec::new();
    loop {
        rows = dedupe(rows);
        let mut kept = Vec::with_capacity(rows.len());
        for q in rows {
            if q.coeffs.iter().all(Zero::is_zero) {
                let ok = if q.strict { q.rhs.is_negative() } else { !q.rhs.is_positive() };
                if !ok {
                    return Ok(None);
                }
            } else {
                kept.push(q);
            }
        }
        rows = kept;
        let Some(&var) = remaining.iter().min_by_key(|&&j| {
            let pos = rows.iter().filter(|q| q.coeffs[j].is_positive()).count();
            let neg = rows.iter().filter(|q| q.coeffs[j].is_negative()).count();
            pos * neg
        }) else {
            break;
        };
        remaining.remove(&var);
        let (touch, rest): (Vec<_>, Vec<_>) = rows.into_iter().partition(|q| !q.coeffs[var].is_zero());
        let mut next = rest;
        for p in touch.iter().filter(|q| q.coeffs[var].is_positive()) {
            for q in touch.iter().filter(|q| q.coeffs[var].is_negative()) {
                let (a, b) = (&p.coeffs[var], -&q.coeffs[var]);
                let coeffs = p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| &b * x + a * y).collect();
                next.push(Inequality { coeffs, rhs: &b * &p.rhs + a * &q.rhs, strict: p.strict || q.strict });
            }
        }
        if next.len() > row_limit {
            return Err(LpError::SizeGuard(row_limit));
        }
        levels.push(Level { var, rows: touch });
        rows = next;
    }
    let mut w = vec![Rat::zero(); nf];
    for level in levels.iter().rev() {
        let j = level.var;
        let mut lo: Option<(Rat, bool)> = None;
        let mut hi: Option<(Rat, bool)> = None;
        for q in &level.rows {
            let a = &q.coeffs[j];
            let others: Rat =
                q.coeffs.iter().zip(&w).enumerate().filter(|(i, _)| *i != j).map(|(_, (c, x))| c * x).sum();
            let bound = (&q.rhs - others) / a;
            if a.is_positive() {
                let tighter = match &lo {
                    None => true,
                    Some((l, s)) => bound > *l || (bound == *l && q.strict && !s),
                };
                if tighter {
                    lo = Some((bound, q.strict));
                }
            } else {
                let tighter = match &hi {
                    None => true,
                    Some((h, s)) => bound < *h || (bound == *h && q.strict && !s),
                };
                if tighter {
                    hi = Some((bound, q.strict));
                }
            }
        }
        w[j] = pick_value(lo, hi);
    }
    let mut z = base;
    for (wf, b) in w.iter().zip(&basis) {
        if wf.is_zero() {
            continue;
        }
        for (zi, bi) in z.iter_mut().zip(b) {
            *zi += wf * bi;
        }
    }
    debug_assert!(sys.is_satisfied_by(&z));
    Ok(Some(z))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpVerdict {
    Feasible(Vec<Rat>),
    // polyhedral systems are never weakly infeasible: the alternative system is solvable
    StronglyInfeasible { alternative: Vec<Rat> },
}

impl LpVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpVerdict::Feasible(_))
    }
}

// Sign pattern per coordinate of a polyhedral cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    Nonneg,
    Zero,
    Free,
}

pub fn coordinate_kinds(cone: &ConeSpec) -> Result<Vec<Coord>, LpError> {
    let mut out = Vec::with_capacity(cone.ambient_dim());
    for b in cone.blocks() {
        let kind = match b.kind {
            BlockKind::Orthant => Coord::Nonneg,
            BlockKind::SecondOrder if b.dim == 1 => Coord::Nonneg,
            BlockKind::Zero => Coord::Zero,
            BlockKind::Free => Coord::Free,
            k => return Err(LpError::NotPolyhedral(k)),
        };
        out.extend(std::iter::repeat_n(kind, b.dim));
    }
    Ok(out)
}

fn add_membership(sys: &mut LinearSystem, rows: &[Vec<Rat>], consts: &[Rat], kinds: &[Coord]) {
    // rows[j] . z + consts[j] lies in the cone coordinate j
    for (j, kind) in kinds.iter().enumerate() {
        match kind {
            Coord::Nonneg => sys.ge(rows[j].clone(), -consts[j].clone()),
            Coord::Zero => sys.eq(rows[j].clone(), -consts[j].clone()),
            Coord::Free => {}
        }
    }
}

pub fn dual_system(inst: &VectorDual) -> Result<LinearSystem, LpError> {
    let kinds = coordinate_kinds(&inst.cone)?;
    let d = inst.dim();
    let mut sys = LinearSystem::new(d);
    for (a, c) in inst.a.iter().zip(&inst.c) {
        sys.eq(a.clone(), c.clone());
    }
    let units: Vec<Vec<Rat>> = (0..d).map(|j| sys.unit(j)).collect();
    add_membership(&mut sys, &units, &vec![Rat::zero(); d], &kinds);
    Ok(sys)
}

// A x in the dual cone, <c, x> = -1
pub fn dual_alternative_system(inst: &VectorDual) -> Result<LinearSystem, LpError> {
    let kinds: Vec<Coord> = coordinate_kinds(&inst.cone.dual())?;
    let m = inst.m();
    let mut sys = LinearSystem::new(m);
    sys.eq(inst.c.clone(), rat(-1));
    let rows: Vec<Vec<Rat>> = (0..inst.dim()).map(|j| inst.a.iter().map(|a| a[j].clone()).collect()).collect();
    add_membership(&mut sys, &rows, &vec![Rat::zero(); inst.dim()], &kinds);
    Ok(sys)
}

pub fn lp_feasibility_oracle(inst: &VectorDual) -> Result<LpVerdict, LpError> {
    if let Some(y) = fm_solve(&dual_system(inst)?, DEFAULT_ROW_LIMIT)? {
        return Ok(LpVerdict::Feasible(y));
    }
    match fm_solve(&dual_alternative_system(inst)?, DEFAULT_ROW_LIMIT)? {
        Some(x) => Ok(LpVerdict::StronglyInfeasible { alternative: x }),
        None => Err(LpError::AlternativeFailed),
    }
}

// b - A x in the cone
pub fn primal_system(inst: &VectorPrimal) -> Result<LinearSystem, LpError> {
    let kinds = coordinate_kinds(&inst.cone)?;
    let m = inst.m();
    let mut sys = LinearSystem::new(m);
    let rows: Vec<Vec<Rat>> =
        (0..inst.cone.ambient_dim()).map(|j| inst.a.iter().map(|a| -a[j].clone()).collect()).collect();
    add_membership(&mut sys, &rows, &inst.b, &kinds);
    Ok(sys)
}

// y in the dual cone, A*y = 0, <b, y> = -1
pub fn primal_alternative_system(inst: &VectorPrimal) -> Result<LinearSystem, LpError> {
    let kinds = coordinate_kinds(&inst.cone.dual())?;
    let d = inst.cone.ambient_dim();
    let mut sys = LinearSystem::new(d);
    for a in &inst.a {
        sys.eq(a.clone(), Rat::zero());
    }
    sys.eq(inst.b.clone(), rat(-1));
    let units: Vec<Vec<Rat>> = (0..d).map(|j| sys.unit(j)).collect();
    add_membership(&mut sys, &units, &vec![Rat::zero(); d], &kinds);
    Ok(sys)
}

pub fn lp_feasibility_oracle_primal(inst: &VectorPrimal) -> Result<LpVerdict, LpError> {
    if let Some(x) = fm_solve(&primal_system(inst)?, DEFAULT_ROW_LIMIT)? {
        return Ok(LpVerdict::Feasible(x));
    }
    match fm_solve(&primal_alternative_system(inst)?, DEFAULT_ROW_LIMIT)? {
        Some(y) => Ok(LpVerdict::StronglyInfeasible { alternative: y }),
        None => Err(LpError::AlternativeFailed),
    }
}

// Orthant coordinates that vanish on every feasible point; None when infeasible.
pub fn implicit_zero_coordinates(inst: &VectorDual) -> Result<Option<BTreeSet<usize>>, LpError> {
    let base = dual_system(inst)?;
    if fm_solve(&base, DEFAULT_ROW_LIMIT)?.is_none() {
        return Ok(None);
    }
    let kinds = coordinate_kinds(&inst.cone)?;
    let mut out = BTreeSet::new();
    for (j, kind) in kinds.iter().enumerate() {
        if *kind != Coord::Nonneg {
            continue;
        }
        let mut sys = base.clone();
        sys.gt(sys.unit(j), Rat::zero());
        if fm_solve(&sys, DEFAULT_ROW_LIMIT)?.is_none() {
            out.insert(j);
        }
    }
    Ok(Some(out))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AltResult {
    // x with sum x_i a_i psd and <c, x> = -1: the system is strongly infeasible
    AltFeasible(Vec<Rat>),
    // nothing found at the searched scale; this proves nothing
    NotFoundAtScale,
}

// Small integer enumeration, then an exact search over diagonally dominant slacks.
pub fn alt_system_check(inst: &DualInstance, radius: i64) -> Result<AltResult, LpError> {
    let m = inst.m();
    if inst.c.iter().all(Zero::is_zero) {
        return Ok(AltResult::NotFoundAtScale);
    }
    if (2 * radius + 1).checked_pow(m as u32).is_some_and(|count| count <= 200_000) {
        let mut x = vec![-radius; m];
        loop {
            let xr: Vec<Rat> = x.iter().map(|&v| rat(v)).collect();
            if dot(&xr, &inst.c) == rat(-1) {
                let s = linear_combination(&xr, &inst.a).expect("orders checked at construction");
                if is_psd(&s) {
                    return Ok(AltResult::AltFeasible(xr));
                }
            }
            let mut i = 0;
            while i < m && x[i] == radius {
                x[i] = -radius;
                i += 1;
            }
            if i == m {
                break;
            }
            x[i] += 1;
        }
    }
    let n = inst.n;
    // variables: x (m), then s_ij >= |M_ij| for i < j
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let nv = m + pairs.len();
    if nv > 14 {
        return Ok(AltResult::NotFoundAtScale);
    }
    let mut sys = LinearSystem::new(nv);
    let mut cx = inst.c.clone();
    cx.resize(nv, Rat::zero());
    sys.eq(cx, rat(-1));
    let entry = |i: usize, j: usize| -> Vec<Rat> {
        let mut v: Vec<Rat> = inst.a.iter().map(|a| a.get(i, j).clone()).collect();
        v.resize(nv, Rat::zero());
        v
    };
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let e = entry(i, j);
        let mut up: Vec<Rat> = e.iter().map(|v| -v.clone()).collect();
        up[m + p] = Rat::one();
        sys.ge(up, Rat::zero());
        let mut down = e;
        down[m + p] = Rat::one();
        sys.ge(down, Rat::zero());
    }
    for i in 0..n {
        let mut row = entry(i, i);
        for (p, &(a, b)) in pairs.iter().enumerate() {
            if a == i || b == i {
                row[m + p] = rat(-1);
            }
        }
        sys.ge(row, Rat::zero());
    }
    match fm_solve(&sys, DEFAULT_ROW_LIMIT) {
        Ok(Some(z)) => {
            let x = z[..m].to_vec();
            debug_assert!(is_psd(&linear_combination(&x, &inst.a).expect("orders")));
            Ok(AltResult::AltFeasible(x))
        }
        Ok(None) | Err(LpError::SizeGuard(_)) => Ok(AltResult::NotFoundAtScale),
        Err(e) => Err(e),
    }
}
