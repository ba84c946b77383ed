use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::linalg::{dot, Rat, SymRatMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("block dimension must be at least 1")]
    EmptyBlock,
    #[error("sequence length mismatch across blocks: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("exact facial reduction membership is not available for {0} blocks")]
    Unsupported(BlockKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    Zero,
    // dual of Zero: the whole space
    Free,
    Orthant,
    SecondOrder,
    Psd,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BlockKind::Zero => "zero",
            BlockKind::Free => "free",
            BlockKind::Orthant => "orthant",
            BlockKind::SecondOrder => "soc",
            BlockKind::Psd => "psd",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for BlockKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(BlockKind::Zero),
            "free" => Ok(BlockKind::Free),
            "orthant" => Ok(BlockKind::Orthant),
            "soc" => Ok(BlockKind::SecondOrder),
            "psd" => Ok(BlockKind::Psd),
            other => Err(format!("unknown cone block kind '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConeBlock {
    pub kind: BlockKind,
    // vector length, or the matrix order for PSD blocks
    pub dim: usize,
}

impl ConeBlock {
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            BlockKind::Psd => self.dim * (self.dim + 1) / 2,
            _ => self.dim,
        }
    }

    pub fn chain_length(&self) -> usize {
        match self.kind {
            BlockKind::Zero | BlockKind::Free => 1,
            BlockKind::Orthant | BlockKind::Psd => self.dim + 1,
            BlockKind::SecondOrder if self.dim == 1 => 2,
            BlockKind::SecondOrder => 3,
        }
    }

    pub fn dual(&self) -> ConeBlock {
        let kind = match self.kind {
            BlockKind::Zero => BlockKind::Free,
            BlockKind::Free => BlockKind::Zero,
            k => k,
        };
        ConeBlock { kind, dim: self.dim }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConeSpec {
    blocks: Vec<ConeBlock>,
}

impl ConeSpec {
    pub fn new(blocks: Vec<ConeBlock>) -> Result<Self, ConeError> {
        if blocks.iter().any(|b| b.dim == 0) {
            return Err(ConeError::EmptyBlock);
        }
        Ok(Self { blocks })
    }

    pub fn single(kind: BlockKind, dim: usize) -> Result<Self, ConeError> {
        Self::new(vec![ConeBlock { kind, dim }])
    }

    pub fn psd(n: usize) -> Self {
        Self::single(BlockKind::Psd, n).expect("positive order")
    }

    pub fn orthant(n: usize) -> Self {
        Self::single(BlockKind::Orthant, n).expect("positive dimension")
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    pub fn ambient_dim(&self) -> usize {
        self.blocks.iter().map(ConeBlock::ambient_dim).sum()
    }

    pub fn dual(&self) -> ConeSpec {
        ConeSpec { blocks: self.blocks.iter().map(ConeBlock::dual).collect() }
    }

    pub fn is_polyhedral(&self) -> bool {
        self.blocks.iter().all(|b| {
            matches!(b.kind, BlockKind::Zero | BlockKind::Free | BlockKind::Orthant)
                || (b.kind == BlockKind::SecondOrder && b.dim == 1)
        })
    }

    pub fn single_psd_order(&self) -> Option<usize> {
        match self.blocks.as_slice() {
            [ConeBlock { kind: BlockKind::Psd, dim }] => Some(*dim),
            _ => None,
        }
    }

    pub fn split<'a>(&self, x: &'a [Rat]) -> Result<Vec<&'a [Rat]>, ConeError> {
        if x.len() != self.ambient_dim() {
            return Err(ConeError::DimensionMismatch { expected: self.ambient_dim(), found: x.len() });
        }
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut at = 0;
        for b in &self.blocks {
            out.push(&x[at..at + b.ambient_dim()]);
            at += b.ambient_dim();
        }
        Ok(out)
    }
}

impl fmt::Display for ConeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| format!("{}:{}", b.kind, b.dim)).collect();
        f.write_str(&parts.join(" "))
    }
}

pub fn chain_length(k: &ConeSpec) -> usize {
    k.blocks.iter().map(|b| b.chain_length() - 1).sum::<usize>() + 1
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrthantFace {
    pub dim: usize,
    pub support: BTreeSet<usize>,
    // coordinates without a sign constraint
    pub free: BTreeSet<usize>,
}

impl OrthantFace {
    pub fn whole(dim: usize) -> Self {
        Self { dim, support: (0..dim).collect(), free: BTreeSet::new() }
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        x.len() == self.dim
            && x.iter().enumerate().all(|(i, v)| {
                if self.free.contains(&i) {
                    true
                } else if self.support.contains(&i) {
                    !v.is_negative()
                } else {
                    v.is_zero()
                }
            })
    }

    pub fn contains_relative_interior(&self, x: &[Rat]) -> bool {
        self.contains(x) && self.support.iter().all(|&i| x[i].is_positive())
    }
}

pub fn is_soc_member(x: &[Rat]) -> bool {
    let Some((x0, rest)) = x.split_first() else {
        return false;
    };
    !x0.is_negative() && x0 * x0 >= dot(rest, rest)
}

fn is_soc_interior(x: &[Rat]) -> bool {
    let (x0, rest) = x.split_first().expect("nonempty");
    x0.is_positive() && x0 * x0 > dot(rest, rest)
}

// Symmetric pivoting with rational arithmetic. Returns the pivots taken when
// the matrix is psd, or None at the first certificate of indefiniteness.
pub fn psd_pivots(a: &SymRatMatrix) -> Option<Vec<Rat>> {
    let n = a.order();
    let mut w: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j).clone()).collect()).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::with_capacity(n);
    while !alive.is_empty() {
        for &i in &alive {
            let d = &w[i][i];
            if d.is_negative() {
                return None;
            }
            if d.is_zero() && alive.iter().any(|&j| !w[i][j].is_zero()) {
                return None;
            }
        }
        let Some(pos) = alive.iter().position(|&i| w[i][i].is_positive()) else {
            pivots.extend(std::iter::repeat_n(Rat::zero(), alive.len()));
            return Some(pivots);
        };
        let p = alive.remove(pos);
        let piv = w[p][p].clone();
        for &i in &alive {
            if w[i][p].is_zero() {
                continue;
            }
            let f = &w[i][p] / &piv;
            for &j in &alive {
                if !w[p][j].is_zero() {
                    let v = &w[i][j] - &f * &w[p][j];
                    w[i][j] = v;
                }
            }
        }
        pivots.push(piv);
    }
    Some(pivots)
}

pub fn is_psd(a: &SymRatMatrix) -> bool {
    psd_pivots(a).is_some()
}

pub fn is_pd(a: &SymRatMatrix) -> bool {
    psd_pivots(a).is_some_and(|p| p.iter().all(Signed::is_positive))
}

fn sym_from_upper(n: usize, x: &[Rat]) -> SymRatMatrix {
    SymRatMatrix::from_upper(n, x.to_vec()).expect("split by ambient dim")
}

fn block_member(b: &ConeBlock, x: &[Rat]) -> bool {
    match b.kind {
        BlockKind::Zero => x.iter().all(Zero::is_zero),
        BlockKind::Free => true,
        BlockKind::Orthant => x.iter().all(|v| !v.is_negative()),
        BlockKind::SecondOrder => is_soc_member(x),
        BlockKind::Psd => is_psd(&sym_from_upper(b.dim, x)),
    }
}

pub fn cone_membership(x: &[Rat], k: &ConeSpec) -> Result<bool, ConeError> {
    let parts = k.split(x)?;
    Ok(k.blocks.iter().zip(parts).all(|(b, p)| block_member(b, p)))
}

// PSD blocks are read as their upper triangle in row order.
pub fn dual_cone_membership(x: &[Rat], k: &ConeSpec) -> Result<bool, ConeError> {
    cone_membership(x, &k.dual())
}

fn check_lengths(seq: &[Vec<Rat>], n: usize) -> Result<(), ConeError> {
    match seq.iter().find(|y| y.len() != n) {
        Some(y) => Err(ConeError::DimensionMismatch { expected: n, found: y.len() }),
        None => Ok(()),
    }
}

pub fn fr_membership_orthant(seq: &[Vec<Rat>], n: usize) -> Result<bool, ConeError> {
    check_lengths(seq, n)?;
    let mut support: Vec<usize> = (0..n).collect();
    for y in seq {
        if support.iter().any(|&j| y[j].is_negative()) {
            return Ok(false);
        }
        support.retain(|&j| y[j].is_zero());
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum SocFace {
    Whole,
    Ray(Vec<Rat>),
    Origin,
}

pub fn fr_membership_soc(seq: &[Vec<Rat>], n: usize) -> Result<bool, ConeError> {
    check_lengths(seq, n)?;
    if n == 1 {
        return fr_membership_orthant(seq, 1);
    }
    let mut face = SocFace::Whole;
    for y in seq {
        face = match face {
            SocFace::Origin => SocFace::Origin,
            SocFace::Whole => {
                if !is_soc_member(y) {
                    return Ok(false);
                }
                if y.iter().all(Zero::is_zero) {
                    SocFace::Whole
                } else if is_soc_interior(y) {
                    SocFace::Origin
                } else {
                    let mut r = Vec::with_capacity(n);
                    r.push(y[0].clone());
                    r.extend(y[1..].iter().map(|v| -v.clone()));
                    SocFace::Ray(r)
                }
            }
            SocFace::Ray(r) => {
                let s = dot(y, &r);
                if s.is_negative() {
                    return Ok(false);
                }
                if s.is_zero() {
                    SocFace::Ray(r)
                } else {
                    SocFace::Origin
                }
            }
        };
    }
    Ok(true)
}

fn fr_membership_block(b: &ConeBlock, seq: &[Vec<Rat>]) -> Result<bool, ConeError> {
    match b.kind {
        BlockKind::Orthant => fr_membership_orthant(seq, b.dim),
        BlockKind::SecondOrder => fr_membership_soc(seq, b.dim),
        BlockKind::Zero => {
            // FR_k({0}) is the whole space
            check_lengths(seq, b.dim)?;
            Ok(true)
        }
        BlockKind::Free => {
            check_lengths(seq, b.dim)?;
            Ok(seq.iter().all(|y| y.iter().all(Zero::is_zero)))
        }
        BlockKind::Psd => Err(ConeError::Unsupported(BlockKind::Psd)),
    }
}

// Membership of (y_1..y_k) in FR_k(K) given per-block sequences.
pub fn fr_membership_product(per_block: &[Vec<Vec<Rat>>], k: &ConeSpec) -> Result<bool, ConeError> {
    if per_block.len() != k.blocks.len() {
        return Err(ConeError::LengthMismatch(k.blocks.len(), per_block.len()));
    }
    let len = per_block.first().map_or(0, Vec::len);
    for s in per_block {
        if s.len() != len {
            return Err(ConeError::LengthMismatch(len, s.len()));
        }
    }
    let mut ok = true;
    for (b, s) in k.blocks.iter().zip(per_block) {
        ok &= fr_membership_block(b, s)?;
    }
    Ok(ok)
}

pub fn split_sequence(seq: &[Vec<Rat>], k: &ConeSpec) -> Result<Vec<Vec<Vec<Rat>>>, ConeError> {
    let mut per_block = vec![Vec::with_capacity(seq.len()); k.blocks.len()];
    for y in seq {
        for (i, part) in k.split(y)?.into_iter().enumerate() {
            per_block[i].push(part.to_vec());
        }
    }
    Ok(per_block)
}

// Membership of a sequence of full-length vectors.
pub fn fr_membership(seq: &[Vec<Rat>], k: &ConeSpec) -> Result<bool, ConeError> {
    fr_membership_product(&split_sequence(seq, k)?, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratq};
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    // Longest chain in a finite poset given by elements and a strict order.
    fn longest_chain<T>(elems: &[T], lt: impl Fn(&T, &T) -> bool) -> usize {
        let mut order: Vec<usize> = (0..elems.len()).collect();
        let below = |i: usize| (0..elems.len()).filter(|&j| lt(&elems[j], &elems[i])).count();
        order.sort_by_key(|&i| below(i));
        let mut best = vec![1usize; elems.len()];
        for (pos, &i) in order.iter().enumerate() {
            for &j in &order[..pos] {
                if lt(&elems[j], &elems[i]) {
                    best[i] = best[i].max(best[j] + 1);
                }
            }
        }
        best.into_iter().max().unwrap_or(0)
    }

    // Faces encoded as bitsets over a representative generator set per block:
    // orthant and psd use coordinate faces, soc uses {0}, two rays, K.
    fn face_codes(b: &ConeBlock) -> Vec<u32> {
        match b.kind {
            BlockKind::Zero | BlockKind::Free => vec![0],
            BlockKind::Orthant | BlockKind::Psd => (0..1u32 << b.dim).collect(),
            BlockKind::SecondOrder if b.dim == 1 => vec![0, 1],
            BlockKind::SecondOrder => vec![0, 1, 2, 3],
        }
    }

    fn brute_chain(k: &ConeSpec) -> usize {
        let mut faces: Vec<Vec<u32>> = vec![vec![]];
        for b in k.blocks() {
            let codes = face_codes(b);
            faces = faces.into_iter().flat_map(|f| codes.iter().map(move |&c| [f.clone(), vec![c]].concat())).collect();
        }
        let kinds: Vec<BlockKind> = k.blocks().iter().map(|b| b.kind).collect();
        let le = |a: u32, b: u32, kind: BlockKind| match kind {
            // soc: 0 < ray1, ray2 < 3; rays incomparable
            BlockKind::SecondOrder => a == b || a == 0 || b == 3,
            _ => a & b == a,
        };
        longest_chain(&faces, |x, y| x != y && x.iter().zip(y).zip(&kinds).all(|((&a, &b), &kd)| le(a, b, kd)))
    }

    #[test]
    fn chain_length_examples() {
        assert_eq!(chain_length(&ConeSpec::psd(3)), 4);
        assert_eq!(chain_length(&ConeSpec::orthant(1)), 2);
        let prod = ConeSpec::new(vec![
            ConeBlock { kind: BlockKind::Orthant, dim: 2 },
            ConeBlock { kind: BlockKind::Psd, dim: 2 },
        ])
        .unwrap();
        assert_eq!(chain_length(&prod), 5);
        assert_eq!(brute_chain(&prod), 5);
        assert_eq!(chain_length(&ConeSpec::single(BlockKind::SecondOrder, 3).unwrap()), 3);
        assert_eq!(chain_length(&ConeSpec::single(BlockKind::Zero, 4).unwrap()), 1);
    }

    #[test]
    fn chain_length_matches_face_enumeration() {
        let kinds = [BlockKind::Zero, BlockKind::Orthant, BlockKind::SecondOrder, BlockKind::Psd];
        for &k1 in &kinds {
            for &k2 in &kinds {
                for d1 in 1..=3 {
                    for d2 in 1..=2 {
                        let k = ConeSpec::new(vec![ConeBlock { kind: k1, dim: d1 }, ConeBlock { kind: k2, dim: d2 }])
                            .unwrap();
                        assert_eq!(chain_length(&k), brute_chain(&k), "{k}");
                    }
                }
            }
        }
    }

    #[test]
    fn empty_block_rejected() {
        assert_eq!(ConeSpec::single(BlockKind::Orthant, 0), Err(ConeError::EmptyBlock));
    }

    #[test]
    fn orthant_fr_examples() {
        assert!(fr_membership_orthant(&[v(&[1, 0]), v(&[-5, 0])], 2).unwrap());
        assert!(!fr_membership_orthant(&[v(&[0, 0]), v(&[-1, 0])], 2).unwrap());
        assert!(fr_membership_orthant(&[v(&[1, 1])], 2).unwrap());
        assert!(!fr_membership_orthant(&[v(&[1, -1])], 2).unwrap());
        assert!(fr_membership_orthant(&[v(&[0, 0]), v(&[1, 2])], 2).unwrap());
        assert!(matches!(fr_membership_orthant(&[v(&[1])], 2), Err(ConeError::DimensionMismatch { .. })));
    }

    #[test]
    fn soc_fr_examples() {
        assert!(fr_membership_soc(&[v(&[2, 1, 0]), v(&[-7, 3, 1])], 3).unwrap());
        // y_1 exposes the ray (1,1,0); the dual of the ray is {z : z_0 + z_1 >= 0}
        assert!(!fr_membership_soc(&[v(&[1, -1, 0]), v(&[-1, -1, 0])], 3).unwrap());
        assert!(fr_membership_soc(&[v(&[1, -1, 0]), v(&[-1, 2, 5])], 3).unwrap());
        assert!(!fr_membership_soc(&[v(&[1, 1]), v(&[0, 1])], 2).unwrap());
        assert!(fr_membership_soc(&[v(&[1, 0]), v(&[3, -1]), v(&[0, -1])], 2).unwrap());
        assert!(!fr_membership_soc(&[v(&[-1, 0, 0])], 3).unwrap());
        assert!(fr_membership_soc(&[v(&[1, -1, 0]), v(&[-1, 1, 5]), v(&[-3, 4, 0])], 3).unwrap());
    }

    #[test]
    fn soc_ray_dual_agrees_with_sampled_ray() {
        let r = v(&[1, 1, 0]);
        for z in [v(&[-1, -1, 0]), v(&[-1, 2, 5]), v(&[0, 0, 9]), v(&[3, -4, 1])] {
            let sampled = (1..10).all(|s| !dot(&z, &r.iter().map(|x| x * rat(s)).collect::<Vec<_>>()).is_negative());
            assert_eq!(fr_membership_soc(&[v(&[1, -1, 0]), z], 3).unwrap(), sampled);
        }
    }

    #[test]
    fn product_examples() {
        let k = ConeSpec::new(vec![
            ConeBlock { kind: BlockKind::Orthant, dim: 2 },
            ConeBlock { kind: BlockKind::Orthant, dim: 2 },
        ])
        .unwrap();
        assert!(fr_membership(&[v(&[1, 0, 0, 1]), v(&[-3, 2, 4, -1])], &k).unwrap());
        assert!(!fr_membership(&[v(&[1, 0, 0, 1]), v(&[-3, -2, 4, -1])], &k).unwrap());
        let kz = ConeSpec::new(vec![
            ConeBlock { kind: BlockKind::Orthant, dim: 2 },
            ConeBlock { kind: BlockKind::Zero, dim: 1 },
        ])
        .unwrap();
        assert!(fr_membership(&[v(&[1, 0, -9]), v(&[-1, 0, 4])], &kz).unwrap());
        assert!(matches!(fr_membership_product(&[vec![v(&[1, 0])], vec![]], &kz), Err(ConeError::LengthMismatch(..))));
        let kp = ConeSpec::psd(2);
        assert_eq!(fr_membership(&[v(&[1, 0, 0])], &kp), Err(ConeError::Unsupported(BlockKind::Psd)));
    }

    #[test]
    fn free_block_forces_zero() {
        let k = ConeSpec::single(BlockKind::Free, 2).unwrap();
        assert!(fr_membership(&[v(&[0, 0]), v(&[0, 0])], &k).unwrap());
        assert!(!fr_membership(&[v(&[0, 1])], &k).unwrap());
    }

    #[test]
    fn dual_membership_examples() {
        let k = ConeSpec::psd(3);
        assert!(dual_cone_membership(&SymRatMatrix::identity(3).svec(), &k).unwrap());
        assert!(!is_psd(&SymRatMatrix::from_i64(&[&[0, 1], &[1, 0]])));
        let m = SymRatMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        assert_eq!(psd_pivots(&m).unwrap(), vec![rat(2), ratq(1, 2)]);
        assert!(is_pd(&m));
        assert!(is_psd(&SymRatMatrix::from_i64(&[&[0, 0], &[0, 3]])));
        assert!(!is_pd(&SymRatMatrix::from_i64(&[&[0, 0], &[0, 3]])));
        assert!(!is_psd(&SymRatMatrix::from_i64(&[&[1, 2], &[2, 1]])));
        let z = ConeSpec::single(BlockKind::Zero, 2).unwrap();
        assert!(dual_cone_membership(&v(&[-4, 7]), &z).unwrap());
        assert!(dual_cone_membership(&v(&[1]), &z).is_err());
        let s = ConeSpec::single(BlockKind::SecondOrder, 3).unwrap();
        assert!(dual_cone_membership(&v(&[5, 3, 4]), &s).unwrap());
        assert!(!dual_cone_membership(&v(&[5, 3, 5]), &s).unwrap());
    }

    fn det2(a: &SymRatMatrix) -> Rat {
        a.get(0, 0) * a.get(1, 1) - a.get(0, 1) * a.get(0, 1)
    }

    proptest! {
        #[test]
        fn psd_matches_minor_criterion_2x2(x in -4i64..=4, y in -4i64..=4, z in -4i64..=4) {
            let a = SymRatMatrix::from_i64(&[&[x, y], &[y, z]]);
            let minors = x >= 0 && z >= 0 && !det2(&a).is_negative();
            prop_assert_eq!(is_psd(&a), minors);
        }

        #[test]
        fn gram_matrices_are_psd(rows in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 4), 1..4)) {
            // B^T B is psd for any B
            let n = 4;
            let mut g = SymRatMatrix::zeros(n);
            for r in &rows {
                for i in 0..n {
                    for j in i..n {
                        let v = g.get(i, j) + rat(r[i] * r[j]);
                        g.set(i, j, v);
                    }
                }
            }
            prop_assert!(is_psd(&g));
        }

        #[test]
        fn fr1_is_dual_cone(y in proptest::collection::vec(-3i64..=3, 3)) {
            let y = v(&y);
            let s = ConeSpec::single(BlockKind::SecondOrder, 3).unwrap();
            prop_assert_eq!(fr_membership(std::slice::from_ref(&y), &s).unwrap(), dual_cone_membership(&y, &s).unwrap());
            let o = ConeSpec::orthant(3);
            prop_assert_eq!(fr_membership(std::slice::from_ref(&y), &o).unwrap(), dual_cone_membership(&y, &o).unwrap());
        }

        #[test]
        fn zero_padding_preserves_membership(a in proptest::collection::vec(-2i64..=2, 3), b in proptest::collection::vec(-2i64..=2, 3)) {
            let k = ConeSpec::orthant(3);
            let seq = vec![v(&a), v(&b)];
            let before = fr_membership(&seq, &k).unwrap();
            let mut padded = vec![v(&[0, 0, 0])];
            padded.extend(seq.clone());
            prop_assert_eq!(fr_membership(&padded, &k).unwrap(), before);
            let mut tail = seq;
            tail.push(v(&[0, 0, 0]));
            prop_assert_eq!(fr_membership(&tail, &k).unwrap(), before);
        }
    }
}
