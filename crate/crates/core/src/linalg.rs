use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => x.to_f64().unwrap_or(f64::NAN),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("ragged rows: row {row} has {len} entries, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
}

fn mismatch(expected: impl fmt::Display, found: impl fmt::Display) -> LinalgError {
    LinalgError::DimensionMismatch { expected: expected.to_string(), found: found.to_string() }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rat>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(mismatch(rows * cols, entries.len()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut entries = Vec::with_capacity(r * c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(LinalgError::Ragged { row: i, len: row.len(), expected: c });
            }
            entries.extend(row);
        }
        Ok(Self { rows: r, cols: c, entries })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
            .expect("rectangular literal")
    }

    pub fn from_columns(cols: &[Vec<Rat>]) -> Result<Self, LinalgError> {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != r {
                return Err(LinalgError::Ragged { row: j, len: col.len(), expected: r });
            }
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(mismatch(format!("inner dimension {}", self.cols), format!("{}", other.rows)));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.entries[idx] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>, LinalgError> {
        if v.len() != self.cols {
            return Err(mismatch(self.cols, v.len()));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn sub(&self, other: &RatMatrix) -> Result<RatMatrix, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(mismatch(format!("{}x{}", self.rows, self.cols), format!("{}x{}", other.rows, other.cols)));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| rat_to_f64(self.get(i, j)))
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

// Upper triangle stored row by row: (0,0),(0,1),..,(0,n-1),(1,1),...
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymRatMatrix {
    order: usize,
    entries: Vec<Rat>,
}

impl SymRatMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { order: n, entries: vec![Rat::zero(); n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.set(i, j, Rat::one());
        m
    }

    pub fn from_upper(n: usize, entries: Vec<Rat>) -> Result<Self, LinalgError> {
        if entries.len() != n * (n + 1) / 2 {
            return Err(mismatch(n * (n + 1) / 2, entries.len()));
        }
        Ok(Self { order: n, entries })
    }

    pub fn from_full(m: &RatMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(mismatch("square", format!("{}x{}", m.rows(), m.cols())));
        }
        let n = m.rows();
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                if m.get(i, j) != m.get(j, i) {
                    return Err(LinalgError::NotSymmetric(i, j));
                }
                s.set(i, j, m.get(i, j).clone());
            }
        }
        Ok(s)
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self, LinalgError> {
        Self::from_full(&RatMatrix::from_rows(rows)?)
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_full(&RatMatrix::from_i64(rows)).expect("symmetric literal")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn upper(&self) -> &[Rat] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[self.offset(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        let k = self.offset(i, j);
        self.entries[k] = v;
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.order;
        i * n - i * (i + 1) / 2 + j
    }

    pub fn to_full(&self) -> RatMatrix {
        let n = self.order;
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self { order: self.order, entries: self.entries.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        check_order(self, other)?;
        Ok(Self { order: self.order, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        check_order(self, other)?;
        Ok(Self { order: self.order, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect() })
    }

    pub fn add_scaled(&mut self, s: &Rat, other: &Self) -> Result<(), LinalgError> {
        check_order(self, other)?;
        if s.is_zero() {
            return Ok(());
        }
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            if !b.is_zero() {
                *a += s * b;
            }
        }
        Ok(())
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        let n = self.order;
        nalgebra::DMatrix::from_fn(n, n, |i, j| rat_to_f64(self.get(i, j)))
    }

    // Coordinates in which the trace inner product is the euclidean one, up to
    // the factor 2 on off-diagonal terms. Used for rank computations only.
    pub fn svec(&self) -> Vec<Rat> {
        self.entries.clone()
    }
}

impl fmt::Display for SymRatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_full())
    }
}

fn check_order(a: &SymRatMatrix, b: &SymRatMatrix) -> Result<(), LinalgError> {
    if a.order != b.order {
        return Err(mismatch(format!("order {}", a.order), format!("order {}", b.order)));
    }
    Ok(())
}

pub fn linear_combination(coeffs: &[Rat], mats: &[SymRatMatrix]) -> Result<SymRatMatrix, LinalgError> {
    if coeffs.len() != mats.len() {
        return Err(mismatch(mats.len(), coeffs.len()));
    }
    let n = mats.first().map_or(0, |m| m.order());
    let mut out = SymRatMatrix::zeros(n);
    for (c, m) in coeffs.iter().zip(mats) {
        out.add_scaled(c, m)?;
    }
    Ok(out)
}

pub fn inner_product(a: &SymRatMatrix, b: &SymRatMatrix) -> Result<Rat, LinalgError> {
    check_order(a, b)?;
    let n = a.order;
    let two = rat(2);
    let mut diag = Rat::zero();
    let mut off = Rat::zero();
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let (x, y) = (&a.entries[k], &b.entries[k]);
            if !x.is_zero() && !y.is_zero() {
                if i == j {
                    diag += x * y;
                } else {
                    off += x * y;
                }
            }
            k += 1;
        }
    }
    Ok(diag + off * two)
}

pub fn apply_adjoint(a_list: &[SymRatMatrix], y: &SymRatMatrix) -> Result<Vec<Rat>, LinalgError> {
    a_list.iter().map(|a| inner_product(a, y)).collect()
}

pub fn congruence(t: &RatMatrix, a: &SymRatMatrix) -> Result<SymRatMatrix, LinalgError> {
    let n = a.order();
    if t.rows() != n {
        return Err(mismatch(format!("{n} rows"), t.rows()));
    }
    let at = a.to_full().mul(t)?;
    let tt = t.transpose();
    let k = t.cols();
    let mut out = SymRatMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            out.set(i, j, dot(tt.row(i), &at.column(j)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: RatMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

pub fn rref(m: &RatMatrix) -> Rref {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.entries.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = a.get(r, c).recip();
        for j in c..cols {
            let v = a.get(r, j) * &inv;
            a.set(r, j, v);
        }
        for i in 0..rows {
            if i == r || a.get(i, c).is_zero() {
                continue;
            }
            let f = a.get(i, c).clone();
            for j in c..cols {
                let rv = a.get(r, j);
                if !rv.is_zero() {
                    let v = a.get(i, j) - &f * rv;
                    a.set(i, j, v);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { matrix: a, rank: r, pivots }
}

pub fn rank(m: &RatMatrix) -> usize {
    rref(m).rank
}

pub fn rank_of_vectors(vs: &[Vec<Rat>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    RatMatrix::from_rows(vs.to_vec()).map(|m| rank(&m)).unwrap_or(0)
}

pub fn scale_to_primitive_integers(v: &[Rat]) -> Vec<Rat> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Rat::from_integer(x / &g)).collect()
}

pub fn kernel_basis(m: &RatMatrix) -> Vec<Vec<Rat>> {
    let r = rref(m);
    let cols = m.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !r.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (row, &p) in r.pivots.iter().enumerate() {
                v[p] = -r.matrix.get(row, f).clone();
            }
            scale_to_primitive_integers(&v)
        })
        .collect()
}

pub fn solve_linear(m: &RatMatrix, rhs: &[Rat]) -> Result<Option<Vec<Rat>>, LinalgError> {
    if rhs.len() != m.rows() {
        return Err(mismatch(m.rows(), rhs.len()));
    }
    let cols = m.cols();
    let mut aug = RatMatrix::zeros(m.rows(), cols + 1);
    for (i, b) in rhs.iter().enumerate() {
        for j in 0..cols {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, cols, b.clone());
    }
    let r = rref(&aug);
    if r.pivots.contains(&cols) {
        return Ok(None);
    }
    let mut x = vec![Rat::zero(); cols];
    for (row, &p) in r.pivots.iter().enumerate() {
        x[p] = r.matrix.get(row, cols).clone();
    }
    Ok(Some(x))
}

pub fn invert(m: &RatMatrix) -> Option<RatMatrix> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows();
    let mut aug = RatMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, n + i, Rat::one());
    }
    let r = rref(&aug);
    if r.rank < n || r.pivots[..n].iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    let mut inv = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv.set(i, j, r.matrix.get(i, n + j).clone());
        }
    }
    Some(inv)
}

pub fn determinant(m: &RatMatrix) -> Option<Rat> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut det = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a.get(i, c).is_zero()) else {
            return Some(Rat::zero());
        };
        if p != c {
            for j in 0..n {
                a.entries.swap(p * n + j, c * n + j);
            }
            det = -det;
        }
        let piv = a.get(c, c).clone();
        det *= &piv;
        for i in c + 1..n {
            if a.get(i, c).is_zero() {
                continue;
            }
            let f = a.get(i, c) / &piv;
            for j in c..n {
                let v = a.get(i, j) - &f * a.get(c, j);
                a.set(i, j, v);
            }
        }
    }
    Some(det)
}

pub fn is_integer_vec(v: &[Rat]) -> bool {
    v.iter().all(|x| x.is_integer())
}

pub fn max_denominator<'a>(it: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    it.into_iter().map(|x| x.denom().clone()).max().unwrap_or_else(BigInt::one)
}

pub fn abs_max<'a>(it: impl IntoIterator<Item = &'a Rat>) -> Rat {
    it.into_iter().map(|x| x.abs()).max().unwrap_or_else(Rat::zero)
}
