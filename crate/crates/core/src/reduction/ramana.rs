use num_traits::{One, Zero};
use thiserror::Error;

use crate::cones::is_psd;
use crate::instance::PrimalInstance;
use crate::linalg::{rat, Rat, RatMatrix, SymRatMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RamanaError {
    #[error("k = {k} is out of range 0..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("point has length {found}, expected {expected}")]
    PointLength { expected: usize, found: usize },
    #[error("decomposition needs {expected} parts, got {found}")]
    Parts { expected: usize, found: usize },
}

// One term of an affine matrix block; var None is the constant part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmiEntry {
    pub var: Option<usize>,
    pub row: usize,
    pub col: usize,
    pub value: Rat,
}

// Upper-triangle terms of an affine symmetric matrix that must be psd.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmiBlock {
    pub name: String,
    pub size: usize,
    pub entries: Vec<LmiEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearEquality {
    pub name: String,
    pub coeffs: Vec<(usize, Rat)>,
    pub rhs: Rat,
}

// minimize objective . z  s.t.  equalities, every block psd
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmiProgram {
    pub var_names: Vec<String>,
    pub objective: Vec<(usize, Rat)>,
    pub equalities: Vec<LinearEquality>,
    pub blocks: Vec<LmiBlock>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmiEvaluation {
    pub objective: Rat,
    pub equality_residuals: Vec<Rat>,
    pub block_psd: Vec<bool>,
}

impl LmiEvaluation {
    pub fn is_feasible(&self) -> bool {
        self.equality_residuals.iter().all(Zero::is_zero) && self.block_psd.iter().all(|&b| b)
    }
}

impl LmiProgram {
    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn block_value(&self, block: &LmiBlock, z: &[Rat]) -> SymRatMatrix {
        let mut out = SymRatMatrix::zeros(block.size);
        for e in &block.entries {
            let term = match e.var {
                Some(v) if z[v].is_zero() => continue,
                Some(v) => &e.value * &z[v],
                None => e.value.clone(),
            };
            let cur = out.get(e.row, e.col) + term;
            out.set(e.row, e.col, cur);
        }
        out
    }

    pub fn evaluate(&self, z: &[Rat]) -> Result<LmiEvaluation, RamanaError> {
        if z.len() != self.nvars() {
            return Err(RamanaError::PointLength { expected: self.nvars(), found: z.len() });
        }
        let lin = |coeffs: &[(usize, Rat)]| coeffs.iter().map(|(v, c)| c * &z[*v]).sum::<Rat>();
        Ok(LmiEvaluation {
            objective: lin(&self.objective),
            equality_residuals: self.equalities.iter().map(|e| lin(&e.coeffs) - &e.rhs).collect(),
            block_psd: self.blocks.iter().map(|b| is_psd(&self.block_value(b, z))).collect(),
        })
    }
}

// The extended dual over FR_{k+1}(psd): y_i = u_i + w_i + w_i^T with u_i psd and
// w_i in the tangent space of u_1 + .. + u_{i-1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamanaDual {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub program: LmiProgram,
}

fn tri(n: usize) -> usize {
    n * (n + 1) / 2
}

fn upper_index(n: usize, r: usize, c: usize) -> usize {
    let (r, c) = if r <= c { (r, c) } else { (c, r) };
    r * n - r * (r + 1) / 2 + c
}

impl RamanaDual {
    // (scalar variables, equalities, psd blocks) as closed forms
    pub fn expected_counts(n: usize, m: usize, k: usize) -> (usize, usize, usize) {
        ((k + 1) * tri(n) + k * n * n + k, k * (m + 1) + m, 2 * k + 1)
    }

    fn u_var(&self, i: usize, r: usize, c: usize) -> usize {
        i * tri(self.n) + upper_index(self.n, r, c)
    }

    // w_i exists for i >= 1 (0-based)
    fn w_var(&self, i: usize, r: usize, c: usize) -> usize {
        (self.k + 1) * tri(self.n) + (i - 1) * self.n * self.n + r * self.n + c
    }

    fn beta_var(&self, i: usize) -> usize {
        (self.k + 1) * tri(self.n) + self.k * self.n * self.n + i - 1
    }

    // Coefficients of <a, y_i> in the flat variables.
    fn functional(&self, a: &SymRatMatrix, i: usize) -> Vec<(usize, Rat)> {
        let n = self.n;
        let mut out = Vec::new();
        for r in 0..n {
            for c in r..n {
                let v = a.get(r, c);
                if v.is_zero() {
                    continue;
                }
                out.push((self.u_var(i, r, c), if r == c { v.clone() } else { v * rat(2) }));
            }
        }
        if i > 0 {
            for r in 0..n {
                for c in 0..n {
                    let v = a.get(r, c);
                    if !v.is_zero() {
                        out.push((self.w_var(i, r, c), v * rat(2)));
                    }
                }
            }
        }
        out
    }

    pub fn pack(&self, u: &[SymRatMatrix], w: &[RatMatrix], beta: &[Rat]) -> Result<Vec<Rat>, RamanaError> {
        let k = self.k;
        for (expected, found) in [(k + 1, u.len()), (k, w.len()), (k, beta.len())] {
            if expected != found {
                return Err(RamanaError::Parts { expected, found });
            }
        }
        let n = self.n;
        let mut z = vec![Rat::zero(); self.program.nvars()];
        for (i, ui) in u.iter().enumerate() {
            for r in 0..n {
                for c in r..n {
                    z[self.u_var(i, r, c)] = ui.get(r, c).clone();
                }
            }
        }
        for (i, wi) in w.iter().enumerate() {
            for r in 0..n {
                for c in 0..n {
                    z[self.w_var(i + 1, r, c)] = wi.get(r, c).clone();
                }
            }
        }
        for (i, b) in beta.iter().enumerate() {
            z[self.beta_var(i + 1)] = b.clone();
        }
        Ok(z)
    }

    // y_i (0-based) at a flat point
    pub fn y(&self, z: &[Rat], i: usize) -> SymRatMatrix {
        let n = self.n;
        let mut y = SymRatMatrix::zeros(n);
        for r in 0..n {
            for c in r..n {
                let mut v = z[self.u_var(i, r, c)].clone();
                if i > 0 {
                    v += &z[self.w_var(i, r, c)] + &z[self.w_var(i, c, r)];
                }
                y.set(r, c, v);
            }
        }
        y
    }
}

pub fn build_ramana_dual(inst: &PrimalInstance, k: usize) -> Result<RamanaDual, RamanaError> {
    let (n, m) = (inst.n, inst.m());
    if k + 1 > n.max(1) {
        return Err(RamanaError::KOutOfRange { k, max: n.saturating_sub(1) });
    }
    let (nvars, _, _) = RamanaDual::expected_counts(n, m, k);
    let mut names = vec![String::new(); nvars];
    let mut rd = RamanaDual {
        n,
        m,
        k,
        program: LmiProgram {
            var_names: Vec::new(),
            objective: Vec::new(),
            equalities: Vec::new(),
            blocks: Vec::new(),
        },
    };
    for i in 0..=k {
        for r in 0..n {
            for c in r..n {
                names[rd.u_var(i, r, c)] = format!("u{}[{},{}]", i + 1, r + 1, c + 1);
            }
        }
    }
    for i in 1..=k {
        for r in 0..n {
            for c in 0..n {
                names[rd.w_var(i, r, c)] = format!("w{}[{},{}]", i + 1, r + 1, c + 1);
            }
        }
        names[rd.beta_var(i)] = format!("beta{}", i + 1);
    }
    let mut equalities = Vec::new();
    for i in 0..=k {
        for (j, a) in inst.a.iter().enumerate() {
            let rhs = if i == k { inst.c[j].clone() } else { Rat::zero() };
            equalities.push(LinearEquality {
                name: format!("<a{}, y{}>", j + 1, i + 1),
                coeffs: rd.functional(a, i),
                rhs,
            });
        }
        if i < k {
            equalities.push(LinearEquality {
                name: format!("<b, y{}>", i + 1),
                coeffs: rd.functional(&inst.b, i),
                rhs: Rat::zero(),
            });
        }
    }
    let mut blocks = Vec::new();
    for i in 0..=k {
        let mut entries = Vec::new();
        for r in 0..n {
            for c in r..n {
                entries.push(LmiEntry { var: Some(rd.u_var(i, r, c)), row: r, col: c, value: Rat::one() });
            }
        }
        blocks.push(LmiBlock { name: format!("u{}", i + 1), size: n, entries });
    }
    for i in 1..=k {
        let mut entries = Vec::new();
        for r in 0..n {
            for c in r..n {
                for j in 0..i {
                    entries.push(LmiEntry { var: Some(rd.u_var(j, r, c)), row: r, col: c, value: Rat::one() });
                }
            }
            for c in 0..n {
                entries.push(LmiEntry { var: Some(rd.w_var(i, r, c)), row: r, col: n + c, value: Rat::one() });
            }
            entries.push(LmiEntry { var: Some(rd.beta_var(i)), row: n + r, col: n + r, value: Rat::one() });
        }
        blocks.push(LmiBlock { name: format!("tangent{}", i + 1), size: 2 * n, entries });
    }
    rd.program = LmiProgram { var_names: names, objective: rd.functional(&inst.b, k), equalities, blocks };
    Ok(rd)
}
