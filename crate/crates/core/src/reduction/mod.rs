use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::cones::{BlockKind, ConeBlock, ConeError, ConeSpec, OrthantFace};
use crate::instance::{InstanceError, VectorDual};
use crate::linalg::{dot, rank_of_vectors, Rat, RatMatrix};
use crate::verifier::lp::{coordinate_kinds, dual_system, fm_solve, Coord, LpError, DEFAULT_ROW_LIMIT};

pub mod ramana;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("the system is infeasible, so there is no minimal face to find")]
    Infeasible,
    #[error("the reduced system has no relative interior point; this indicates a bug")]
    NoInteriorPoint,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionResult {
    // orthant coordinates that stay free to be positive
    pub minimal_face: OrthantFace,
    // reducing vectors y_i = A x_i with <c, x_i> = 0
    pub sequence: Vec<Vec<Rat>>,
    pub multipliers: Vec<Vec<Rat>>,
    pub steps: usize,
    // a feasible point positive on every surviving orthant coordinate
    pub interior_point: Vec<Rat>,
}

impl ReductionResult {
    // steps is an upper bound on the singularity degree
    pub fn step_bound(inst: &VectorDual) -> usize {
        let range_dim = rank_of_vectors(&inst.a);
        let zero_c = inst.c.iter().all(Zero::is_zero);
        let h_perp = if zero_c { range_dim } else { range_dim.saturating_sub(1) };
        (crate::cones::chain_length(&inst.cone) - 1).min(h_perp)
    }
}

fn orthant_coords(kinds: &[Coord]) -> BTreeSet<usize> {
    kinds.iter().enumerate().filter(|(_, k)| **k == Coord::Nonneg).map(|(i, _)| i).collect()
}

// x with <c, x> = 0, A x in the dual of the current face, and (A x)_j >= 1.
fn reducing_multiplier(
    inst: &VectorDual,
    kinds: &[Coord],
    support: &BTreeSet<usize>,
    j: usize,
) -> Result<Option<Vec<Rat>>, LpError> {
    let m = inst.m();
    let mut sys = crate::verifier::lp::LinearSystem::new(m);
    sys.eq(inst.c.clone(), Rat::zero());
    for (i, kind) in kinds.iter().enumerate() {
        let row: Vec<Rat> = inst.a.iter().map(|a| a[i].clone()).collect();
        match kind {
            Coord::Free => sys.eq(row, Rat::zero()),
            Coord::Nonneg if i == j => sys.ge(row, Rat::one()),
            Coord::Nonneg if support.contains(&i) => sys.ge(row, Rat::zero()),
            _ => {}
        }
    }
    fm_solve(&sys, DEFAULT_ROW_LIMIT)
}

fn interior_point(inst: &VectorDual, support: &BTreeSet<usize>, kinds: &[Coord]) -> Result<Option<Vec<Rat>>, LpError> {
    let mut sys = dual_system(inst)?;
    for (i, kind) in kinds.iter().enumerate() {
        if *kind != Coord::Nonneg {
            continue;
        }
        if support.contains(&i) {
            sys.gt(sys.unit(i), Rat::zero());
        } else {
            sys.eq(sys.unit(i), Rat::zero());
        }
    }
    fm_solve(&sys, DEFAULT_ROW_LIMIT)
}

// Each step removes every orthant coordinate some reducing vector can expose,
// which is the maximal-support choice.
pub fn facial_reduce_polyhedral(inst: &VectorDual) -> Result<ReductionResult, ReductionError> {
    let kinds = coordinate_kinds(&inst.cone)?;
    if fm_solve(&dual_system(inst)?, DEFAULT_ROW_LIMIT)?.is_none() {
        return Err(ReductionError::Infeasible);
    }
    let mut support = orthant_coords(&kinds);
    let mut sequence = Vec::new();
    let mut multipliers = Vec::new();
    loop {
        let mut total = vec![Rat::zero(); inst.m()];
        let mut exposed = BTreeSet::new();
        for &j in &support {
            if let Some(x) = reducing_multiplier(inst, &kinds, &support, j)? {
                for (t, v) in total.iter_mut().zip(&x) {
                    *t += v;
                }
                exposed.insert(j);
            }
        }
        if exposed.is_empty() {
            break;
        }
        let y = inst.apply(&total);
        debug_assert!(support.iter().all(|&j| exposed.contains(&j) != y[j].is_zero()));
        support = &support - &exposed;
        sequence.push(y);
        multipliers.push(total);
    }
    let interior_point = interior_point(inst, &support, &kinds)?.ok_or(ReductionError::NoInteriorPoint)?;
    Ok(ReductionResult {
        minimal_face: OrthantFace {
            dim: inst.dim(),
            support,
            free: kinds.iter().enumerate().filter(|(_, k)| **k == Coord::Free).map(|(i, _)| i).collect(),
        },
        steps: sequence.len(),
        sequence,
        multipliers,
        interior_point,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reformulation {
    pub m: RatMatrix,
    // constraints built from the reducing vectors; their right-hand sides are 0
    pub leading_zero_rows: usize,
    // the reformulated system over the minimal face
    pub system: VectorDual,
    pub interior_point: Vec<Rat>,
}

fn face_cone(kinds: &[Coord], support: &BTreeSet<usize>) -> Result<ConeSpec, ConeError> {
    let mut blocks: Vec<ConeBlock> = Vec::new();
    for (i, k) in kinds.iter().enumerate() {
        let kind = match k {
            Coord::Nonneg if support.contains(&i) => BlockKind::Orthant,
            Coord::Free => BlockKind::Free,
            _ => BlockKind::Zero,
        };
        match blocks.last_mut() {
            Some(b) if b.kind == kind => b.dim += 1,
            _ => blocks.push(ConeBlock { kind, dim: 1 }),
        }
    }
    ConeSpec::new(blocks)
}

// Columns x_1..x_k of M come from the reduction, the rest are unit vectors.
pub fn strictly_feasible_reformulation(
    inst: &VectorDual,
    result: &ReductionResult,
) -> Result<Reformulation, ReductionError> {
    let m = inst.m();
    let mut cols: Vec<Vec<Rat>> = result.multipliers.clone();
    for j in 0..m {
        if cols.len() == m {
            break;
        }
        let mut e = vec![Rat::zero(); m];
        e[j] = Rat::one();
        cols.push(e);
        if rank_of_vectors(&cols) < cols.len() {
            cols.pop();
        }
    }
    let mm = RatMatrix::from_columns(&cols).map_err(InstanceError::from)?;
    let mut system = inst.reformulate(&mm)?;
    let kinds = coordinate_kinds(&inst.cone)?;
    system.cone = face_cone(&kinds, &result.minimal_face.support)?;
    let k = result.multipliers.len();
    debug_assert!(system.c[..k].iter().all(Zero::is_zero));
    let point =
        interior_point(&system, &result.minimal_face.support, &kinds)?.ok_or(ReductionError::NoInteriorPoint)?;
    debug_assert!(result.minimal_face.contains_relative_interior(&point));
    debug_assert_eq!(system.adjoint(&point), system.c);
    debug_assert!(dot(&system.c, &system.c) >= Rat::zero());
    Ok(Reformulation { m: mm, leading_zero_rows: k, system, interior_point: point })
}
