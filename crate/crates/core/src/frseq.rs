use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::cones::is_pd;
use crate::linalg::{RatMatrix, SymRatMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrSeqError {
    #[error("block sizes sum to {sum}, exceeding the matrix order {order}")]
    SizesExceedOrder { sum: usize, order: usize },
    #[error("{matrices} matrices but {sizes} block sizes")]
    LengthMismatch { matrices: usize, sizes: usize },
    #[error("matrix {index} has order {found}, expected {expected}")]
    OrderMismatch { index: usize, expected: usize, found: usize },
    #[error("matrix {index} is not a facial reduction step: trailing eigenvalue {value:e} is negative")]
    NegativeEigenvalue { index: usize, value: f64 },
    #[error("accumulated rotation became singular at step {0}")]
    SingularRotation(usize),
    #[error("rotated sequence deviates from the staircase pattern by {residual:e} (tolerance {tolerance:e})")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
}

// How the leading block of each matrix is checked: the definition asks for an
// identity, but any positive definite block can be brought to identity by a
// block-diagonal congruence, so certificates may use either.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotMode {
    #[default]
    Identity,
    PositiveDefinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reverse,
}

fn check_shape(seq: &[SymRatMatrix], sizes: &[usize]) -> Result<usize, FrSeqError> {
    if seq.len() != sizes.len() {
        return Err(FrSeqError::LengthMismatch { matrices: seq.len(), sizes: sizes.len() });
    }
    let n = seq.first().map_or(0, SymRatMatrix::order);
    for (index, y) in seq.iter().enumerate() {
        if y.order() != n {
            return Err(FrSeqError::OrderMismatch { index, expected: n, found: y.order() });
        }
    }
    let sum: usize = sizes.iter().sum();
    if sum > n {
        return Err(FrSeqError::SizesExceedOrder { sum, order: n });
    }
    Ok(n)
}

// First structural violation, as (matrix index, row, col), if any.
pub fn regfr_violation(
    seq: &[SymRatMatrix],
    sizes: &[usize],
    mode: PivotMode,
) -> Result<Option<(usize, usize, usize)>, FrSeqError> {
    let n = check_shape(seq, sizes)?;
    let mut s = 0;
    for (idx, (y, &p)) in seq.iter().zip(sizes).enumerate() {
        let end = s + p;
        for r in s..n {
            for c in r..n {
                let v = y.get(r, c);
                let in_block = r < end && c < end;
                let ok = match (in_block, mode) {
                    (true, PivotMode::Identity) => {
                        if r == c {
                            v.is_one()
                        } else {
                            v.is_zero()
                        }
                    }
                    (true, PivotMode::PositiveDefinite) => true,
                    (false, _) => v.is_zero(),
                };
                if !ok {
                    return Ok(Some((idx, r, c)));
                }
            }
        }
        if mode == PivotMode::PositiveDefinite && p > 0 {
            let mut block = SymRatMatrix::zeros(p);
            for r in 0..p {
                for c in r..p {
                    block.set(r, c, y.get(s + r, s + c).clone());
                }
            }
            if !is_pd(&block) {
                return Ok(Some((idx, s, s)));
            }
        }
        s = end;
    }
    Ok(None)
}

pub fn validate_regfr_mode(seq: &[SymRatMatrix], sizes: &[usize], mode: PivotMode) -> Result<bool, FrSeqError> {
    Ok(regfr_violation(seq, sizes, mode)?.is_none())
}

pub fn validate_regfr(seq: &[SymRatMatrix], sizes: &[usize]) -> Result<bool, FrSeqError> {
    validate_regfr_mode(seq, sizes, PivotMode::Identity)
}

pub fn reverse_indices(y: &SymRatMatrix) -> SymRatMatrix {
    let n = y.order();
    let mut out = SymRatMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            out.set(n - 1 - i, n - 1 - j, y.get(i, j).clone());
        }
    }
    out
}

pub fn validate_revregfr_mode(seq: &[SymRatMatrix], sizes: &[usize], mode: PivotMode) -> Result<bool, FrSeqError> {
    let rev: Vec<SymRatMatrix> = seq.iter().map(reverse_indices).collect();
    validate_regfr_mode(&rev, sizes, mode)
}

pub fn validate_revregfr(seq: &[SymRatMatrix], sizes: &[usize]) -> Result<bool, FrSeqError> {
    validate_revregfr_mode(seq, sizes, PivotMode::Identity)
}

pub fn is_strict(sizes: &[usize]) -> bool {
    sizes.iter().all(|&p| p > 0)
}

pub fn is_pre_strict(sizes: &[usize]) -> bool {
    match sizes.split_last() {
        Some((_, init)) => is_strict(init),
        None => true,
    }
}

// 0-based index sets P_i (forward) or Q_j (reverse).
pub fn blocks(sizes: &[usize], n: usize, direction: Direction) -> Result<Vec<Vec<usize>>, FrSeqError> {
    let sum: usize = sizes.iter().sum();
    if sum > n {
        return Err(FrSeqError::SizesExceedOrder { sum, order: n });
    }
    let mut out = Vec::with_capacity(sizes.len());
    let mut s = 0;
    for &p in sizes {
        let set: Vec<usize> = match direction {
            Direction::Forward => (s..s + p).collect(),
            Direction::Reverse => (n - s - p..n - s).collect(),
        };
        out.push(set);
        s += p;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Rotation {
    pub t: DMatrix<f64>,
    pub rotated: Vec<DMatrix<f64>>,
    pub sizes: Vec<usize>,
    pub residual: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

fn is_identity_then_zero(w: &DMatrix<f64>, tol: f64) -> Option<usize> {
    let k = w.nrows();
    let p = (0..k).take_while(|&i| (w[(i, i)] - 1.0).abs() <= tol).count();
    let ok = (0..k).all(|i| {
        (0..k).all(|j| {
            let target = if i == j && i < p { 1.0 } else { 0.0 };
            (w[(i, j)] - target).abs() <= tol
        })
    });
    ok.then_some(p)
}

fn structural_residual(rotated: &[DMatrix<f64>], sizes: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    let mut s = 0;
    for (y, &p) in rotated.iter().zip(sizes) {
        let n = y.nrows();
        for r in s..n {
            for c in s..n {
                let target = if r == c && r < s + p { 1.0 } else { 0.0 };
                worst = worst.max((y[(r, c)] - target).abs());
            }
        }
        s += p;
    }
    worst
}

// Finds t with t^T y_i t in staircase form, one eigendecomposition per step.
pub fn rotate_to_regfr(seq: &[SymRatMatrix], tolerance: f64) -> Result<Rotation, FrSeqError> {
    let n = seq.first().map_or(0, SymRatMatrix::order);
    for (index, y) in seq.iter().enumerate() {
        if y.order() != n {
            return Err(FrSeqError::OrderMismatch { index, expected: n, found: y.order() });
        }
    }
    let ys: Vec<DMatrix<f64>> = seq.iter().map(SymRatMatrix::to_f64).collect();
    let mut t = DMatrix::<f64>::identity(n, n);
    let mut sizes = Vec::with_capacity(seq.len());
    let mut s = 0;
    for (index, y) in ys.iter().enumerate() {
        let z = t.transpose() * y * &t;
        let k = n - s;
        let w = z.view((s, s), (k, k)).clone_owned();
        let w = (&w + w.transpose()) * 0.5;
        let scale = w.amax().max(1.0);
        if let Some(p) = is_identity_then_zero(&w, tolerance * scale) {
            sizes.push(p);
            s += p;
            continue;
        }
        let eig = SymmetricEigen::new(w);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut q = DMatrix::<f64>::zeros(k, k);
        let mut p = 0;
        for (col, &e) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[e];
            if lambda < -tolerance * scale {
                return Err(FrSeqError::NegativeEigenvalue { index, value: lambda });
            }
            let mut v = eig.eigenvectors.column(e).clone_owned();
            let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                v = -v;
            }
            if lambda > tolerance * scale {
                v /= lambda.sqrt();
                p += 1;
            }
            q.set_column(col, &v);
        }
        let mut v = DMatrix::<f64>::identity(n, n);
        v.view_mut((s, s), (k, k)).copy_from(&q);
        t = &t * v;
        if t.determinant().abs() < f64::EPSILON {
            return Err(FrSeqError::SingularRotation(index));
        }
        sizes.push(p);
        s += p;
    }
    let rotated: Vec<DMatrix<f64>> = ys.iter().map(|y| t.transpose() * y * &t).collect();
    let residual = structural_residual(&rotated, &sizes);
    Ok(Rotation { t, rotated, sizes, residual })
}

// Same as rotate_to_regfr, but an error when the residual exceeds the tolerance.
pub fn rotate_to_regfr_checked(seq: &[SymRatMatrix], tolerance: f64) -> Result<Rotation, FrSeqError> {
    let r = rotate_to_regfr(seq, tolerance)?;
    let scale = seq.iter().map(|y| y.to_f64().amax()).fold(1.0f64, f64::max);
    if r.residual > tolerance * scale.max(1.0) * 1e3 {
        return Err(FrSeqError::ResidualTooLarge { residual: r.residual, tolerance });
    }
    Ok(r)
}

pub fn reversal_matrix(n: usize) -> RatMatrix {
    let mut j = RatMatrix::zeros(n, n);
    for i in 0..n {
        j.set(i, n - 1 - i, num_traits::One::one());
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{congruence, rank_of_vectors, rat, ratq, Rat};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(rows: &[&[i64]]) -> SymRatMatrix {
        SymRatMatrix::from_i64(rows)
    }

    fn two_by_two_seq(alpha: i64) -> Vec<SymRatMatrix> {
        vec![sym(&[&[1, 0], &[0, 0]]), sym(&[&[0, 1], &[1, alpha]])]
    }

    fn three_matrix_seq() -> Vec<SymRatMatrix> {
        vec![
            sym(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]]),
            sym(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]]),
            sym(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]),
        ]
    }

    fn order_five_seq() -> Vec<SymRatMatrix> {
        vec![
            SymRatMatrix::unit(5, 4, 4),
            sym(&[&[0, 0, 0, 0, 1], &[0, 0, 0, 0, 2], &[0, 0, 0, 0, 1], &[0, 0, 0, 1, 0], &[1, 2, 1, 0, 0]]),
            sym(&[&[0, 0, 0, 0, 3], &[0, 0, 0, 1, 5], &[0, 0, 0, 4, 1], &[0, 1, 4, 1, 2], &[3, 5, 1, 2, 3]]),
        ]
    }

    #[test]
    fn two_by_two_block_sizes() {
        // a_2(2,2) = alpha, so the second identity block only exists when alpha = 1
        assert!(validate_regfr(&two_by_two_seq(0), &[1, 0]).unwrap());
        assert!(!validate_regfr(&two_by_two_seq(0), &[1, 1]).unwrap());
        assert!(validate_regfr(&two_by_two_seq(1), &[1, 1]).unwrap());
    }

    #[test]
    fn three_matrix_system_sizes() {
        assert!(validate_regfr(&three_matrix_seq(), &[1, 0, 1]).unwrap());
        assert!(!validate_regfr(&three_matrix_seq(), &[1, 1, 1]).unwrap());
    }

    #[test]
    fn identity_block_violation() {
        assert!(!validate_regfr(&[sym(&[&[2, 0], &[0, 0]])], &[1]).unwrap());
        assert!(validate_regfr_mode(&[sym(&[&[2, 0], &[0, 0]])], &[1], PivotMode::PositiveDefinite).unwrap());
        assert!(!validate_regfr_mode(&[sym(&[&[-2, 0], &[0, 0]])], &[1], PivotMode::PositiveDefinite).unwrap());
        // nonzero entry right of the block
        assert!(!validate_regfr(&[sym(&[&[1, 1], &[1, 0]])], &[1]).unwrap());
    }

    #[test]
    fn size_errors() {
        assert_eq!(validate_regfr(&two_by_two_seq(0), &[2, 1]), Err(FrSeqError::SizesExceedOrder { sum: 3, order: 2 }));
        assert!(matches!(validate_regfr(&two_by_two_seq(0), &[1]), Err(FrSeqError::LengthMismatch { .. })));
    }

    #[test]
    fn reversed_sequences() {
        assert!(validate_revregfr(&order_five_seq(), &[1, 1, 0]).unwrap());
        let y1 = sym(&[&[0, 0], &[0, 1]]);
        let y2 = SymRatMatrix::from_rows(vec![vec![rat(0), ratq(-1, 2)], vec![ratq(-1, 2), rat(0)]]).unwrap();
        assert!(validate_revregfr(&[y1.clone(), y2.clone()], &[1, 0]).unwrap());
        // anchored at the wrong corner
        assert!(!validate_revregfr(&[sym(&[&[1, 0], &[0, 0]])], &[1]).unwrap());
        assert!(!validate_regfr(&[y1], &[1]).unwrap());
    }

    #[test]
    fn strictness() {
        assert!(is_strict(&[1, 1]));
        assert!(!is_pre_strict(&[1, 0, 1]));
        assert!(is_pre_strict(&[1, 1, 0]));
        assert!(!is_strict(&[1, 1, 0]));
        assert!(is_strict(&[]));
        assert!(is_pre_strict(&[]));
    }

    #[test]
    fn block_index_sets() {
        assert_eq!(blocks(&[1, 1, 1], 5, Direction::Forward).unwrap(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(blocks(&[1, 1, 0], 5, Direction::Reverse).unwrap(), vec![vec![4], vec![3], vec![]]);
        assert_eq!(blocks(&[2], 2, Direction::Forward).unwrap(), vec![vec![0, 1]]);
        assert_eq!(blocks(&[2, 1], 5, Direction::Reverse).unwrap(), vec![vec![3, 4], vec![2]]);
        assert!(blocks(&[3, 3], 5, Direction::Forward).is_err());
    }

    #[test]
    fn rotation_of_regfr_input_is_identity() {
        let r = rotate_to_regfr(&three_matrix_seq(), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.t, DMatrix::identity(3, 3));
        assert_eq!(r.sizes, vec![1, 0, 1]);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn rotation_recovers_swap() {
        let seq = vec![sym(&[&[0, 0], &[0, 1]]), sym(&[&[0, 1], &[1, 0]])];
        let r = rotate_to_regfr(&seq, DEFAULT_TOLERANCE).unwrap();
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((&r.t - swap).amax() < 1e-12);
        assert_eq!(r.sizes, vec![1, 0]);
        for (got, want) in r.rotated.iter().zip(two_by_two_seq(0)) {
            assert!((got - want.to_f64()).amax() < 1e-12);
        }
    }

    #[test]
    fn rotation_rejects_indefinite_step() {
        let r = rotate_to_regfr(&[sym(&[&[1, 0], &[0, -1]])], DEFAULT_TOLERANCE);
        assert!(matches!(r, Err(FrSeqError::NegativeEigenvalue { index: 0, .. })));
    }

    pub(crate) fn random_regfr(rng: &mut ChaCha8Rng, n: usize, sizes: &[usize]) -> Vec<SymRatMatrix> {
        let mut out = Vec::new();
        let mut s = 0;
        for &p in sizes {
            let mut y = SymRatMatrix::zeros(n);
            for r in 0..s {
                for c in r..n {
                    y.set(r, c, rat(rng.random_range(-2..=2)));
                }
            }
            for d in s..s + p {
                y.set(d, d, Rat::one());
            }
            out.push(y);
            s += p;
        }
        out
    }

    #[test]
    fn strict_sequences_are_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(2..=6);
            let k = rng.random_range(1..=n);
            let mut sizes = vec![1; k];
            let mut left = n - k;
            for p in sizes.iter_mut() {
                let extra = rng.random_range(0..=left);
                *p += extra;
                left -= extra;
            }
            let seq = random_regfr(&mut rng, n, &sizes);
            assert!(validate_regfr(&seq, &sizes).unwrap());
            let vecs: Vec<Vec<Rat>> = seq.iter().map(SymRatMatrix::svec).collect();
            assert_eq!(rank_of_vectors(&vecs), seq.len());
        }
    }

    #[test]
    fn rotation_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = rng.random_range(3..=6);
            let sizes = vec![1, rng.random_range(1..=(n - 2).min(2)), 1];
            let seq = random_regfr(&mut rng, n, &sizes);
            let v = loop {
                let v = RatMatrix::new(n, n, (0..n * n).map(|_| rat(rng.random_range(-2..=2))).collect()).unwrap();
                if crate::linalg::invert(&v).is_some() {
                    break v;
                }
            };
            let scrambled: Vec<SymRatMatrix> = seq.iter().map(|y| congruence(&v, y).unwrap()).collect();
            let r = rotate_to_regfr_checked(&scrambled, DEFAULT_TOLERANCE).unwrap();
            assert_eq!(r.sizes, sizes);
            assert!(r.residual < 1e-8, "residual {}", r.residual);
        }
    }
}
