use num_traits::{One, Zero};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::frseq::{blocks, Direction};
use crate::instance::{
    combine_columns, CertificateBundle, DualInfeasibleWitness, DualInstance, InstanceError, Provenance, SeqForm,
    SeqWitness,
};
use crate::linalg::{
    congruence, determinant, inner_product, invert, kernel_basis, rat, LinalgError, Rat, RatMatrix, SymRatMatrix,
};
use crate::verifier::identity_witness;

pub mod suite;

const MAX_DRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("m = {requested} needs {needed} kernel directions but only {available} exist; the largest feasible m is {max_m}")]
    KernelTooSmall { requested: usize, needed: usize, available: usize, max_m: usize },
    #[error("no invertible matrix after {0} draws")]
    ResampleExhausted(usize),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub n: usize,
    pub m: usize,
    pub p: Vec<usize>,
    pub q: Vec<usize>,
    pub entry_range: i64,
    pub seed: u64,
    pub mess: bool,
}

impl GenParams {
    pub fn k(&self) -> usize {
        self.p.len().saturating_sub(1)
    }

    pub fn l(&self) -> usize {
        self.q.len().saturating_sub(1)
    }

    // n = 10, k = 2, p = (2, 3, 2); the weak family adds l = 1, q = (2, 1)
    pub fn preset(name: &str) -> Option<Self> {
        let m = match name {
            "m10" => 10,
            "m20" => 20,
            _ => return None,
        };
        Some(Self { n: 10, m, p: vec![2, 3, 2], q: vec![2, 1], entry_range: 2, seed: 0, mess: false })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check_common(&self) -> Result<(), GenError> {
        let bad = |s: String| Err(GenError::InvalidParams(s));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.p.len() < 2 {
            return bad("p needs k + 1 >= 2 block sizes".into());
        }
        if self.p[..self.k()].contains(&0) {
            return bad(format!("p = {:?}: only the last block may be empty", self.p));
        }
        if self.k() + 1 > self.m {
            return bad(format!("k + 1 = {} exceeds m = {}", self.k() + 1, self.m));
        }
        if self.entry_range < 1 {
            return bad("entry range must be at least 1".into());
        }
        Ok(())
    }

    pub fn validate_infeasible(&self) -> Result<(), GenError> {
        self.check_common()?;
        let sum: usize = self.p.iter().sum();
        if sum > self.n {
            return Err(GenError::InvalidParams(format!("sum of p = {sum} exceeds n = {}", self.n)));
        }
        if self.k() + 1 > self.n {
            return Err(GenError::InvalidParams(format!("k = {} exceeds n - 1", self.k())));
        }
        Ok(())
    }

    pub fn validate_weak(&self) -> Result<(), GenError> {
        self.check_common()?;
        if self.q.len() < 2 {
            return Err(GenError::InvalidParams("q needs l + 1 >= 2 block sizes".into()));
        }
        if self.q[..self.l()].contains(&0) {
            return Err(GenError::InvalidParams(format!("q = {:?}: only the last block may be empty", self.q)));
        }
        let sum: usize = self.p.iter().chain(&self.q).sum();
        if sum > self.n {
            return Err(GenError::InvalidParams(format!("sum of p and q = {sum} exceeds n = {}", self.n)));
        }
        Ok(())
    }

    fn provenance(&self, generator: &str) -> Provenance {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut p = Provenance::default();
        p.insert("generator", generator);
        p.insert("seed", self.seed);
        p.insert("n", self.n);
        p.insert("m", self.m);
        p.insert("p", list(&self.p));
        if generator == "weak" {
            p.insert("q", list(&self.q));
            p.insert("label", "weakly-infeasible");
        } else {
            // strong versus weak is not decided at generation time
            p.insert("label", "infeasible-unclassified");
        }
        p.insert("entry_range", self.entry_range);
        p
    }
}

fn draw(rng: &mut ChaCha8Rng, range: i64) -> Rat {
    rat(rng.random_range(-range..=range))
}

fn draw_nonzero(rng: &mut ChaCha8Rng) -> Rat {
    let v = rng.random_range(1..=2);
    rat(if rng.random_bool(0.5) { v } else { -v })
}

// Block index of each coordinate; coordinates outside every block get usize::MAX.
fn levels(sets: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut lev = vec![usize::MAX; n];
    for (s, set) in sets.iter().enumerate() {
        for &x in set {
            lev[x] = s;
        }
    }
    lev
}

// Member i of a staircase sequence: identity on its own block, random in the rows
// of earlier blocks, zero elsewhere.
fn staircase_member(rng: &mut ChaCha8Rng, lev: &[usize], i: usize, range: i64) -> SymRatMatrix {
    let n = lev.len();
    let mut y = SymRatMatrix::zeros(n);
    for r in 0..n {
        for c in r..n {
            let low = lev[r].min(lev[c]);
            if low < i {
                y.set(r, c, draw(rng, range));
            } else if r == c && lev[r] == i {
                y.set(r, c, Rat::one());
            }
        }
    }
    y
}

pub fn gen_infeasible(params: &GenParams) -> Result<(DualInstance, CertificateBundle), GenError> {
    params.validate_infeasible()?;
    let (n, m, k, range) = (params.n, params.m, params.k(), params.entry_range);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let lev = levels(&blocks(&params.p, n, Direction::Forward).expect("validated"), n);
    let mut a: Vec<SymRatMatrix> = (0..=k).map(|i| staircase_member(&mut rng, &lev, i, range)).collect();
    for _ in k + 1..m {
        a.push(staircase_member(&mut rng, &vec![0; n], 1, range));
    }
    let mut c = vec![Rat::zero(); m];
    c[k] = rat(-1);
    for ci in c.iter_mut().skip(k + 1) {
        *ci = draw(&mut rng, range);
    }
    let inst = DualInstance::new(a, c)?;
    let bundle = CertificateBundle {
        dual_infeasible: Some(identity_witness(n, m, params.p.clone())),
        provenance: params.provenance("infeasible"),
        ..CertificateBundle::default()
    };
    finish(params, inst, bundle)
}

fn finish(
    params: &GenParams,
    inst: DualInstance,
    bundle: CertificateBundle,
) -> Result<(DualInstance, CertificateBundle), GenError> {
    if params.mess {
        let (inst, mut bundle) = mess(&inst, &bundle, params.seed ^ 0x6d65_7373)?;
        bundle.provenance.insert("messed", "true");
        Ok((inst, bundle))
    } else {
        Ok((inst, bundle))
    }
}

// Sets a(pb, qb) and y(qb, pb) so that <a, y> = target; the pivot is the first
// entry of the block pair. Entries outside the block pair are untouched.
pub fn step_star(
    a: &mut SymRatMatrix,
    y: &mut SymRatMatrix,
    target: &Rat,
    pb: &[usize],
    qb: &[usize],
    range: i64,
    rng: &mut ChaCha8Rng,
) -> Result<(), GenError> {
    let (Some(&pr), Some(&qr)) = (pb.first(), qb.first()) else {
        return Err(GenError::InvalidParams("step needs nonempty blocks".into()));
    };
    for &r in pb {
        for &c in qb {
            let (av, yv) = if (r, c) == (pr, qr) {
                (draw_nonzero(rng), Rat::zero())
            } else {
                (draw(rng, range), draw(rng, range))
            };
            a.set(r, c, av);
            y.set(r, c, yv);
        }
    }
    let rest = inner_product(a, y)?;
    let piv = (target - rest) / (rat(2) * a.get(pr, qr));
    y.set(pr, qr, piv);
    debug_assert_eq!(&inner_product(a, y)?, target);
    Ok(())
}

// Integer matrices b with <b, y_t> = 0 for every t, as upper-triangle coordinates.
fn orthogonal_complement(ys: &[SymRatMatrix], n: usize) -> Result<Vec<Vec<Rat>>, GenError> {
    let dim = n * (n + 1) / 2;
    let mut map = RatMatrix::zeros(ys.len(), dim);
    for (t, y) in ys.iter().enumerate() {
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let w = if i == j { y.get(i, j).clone() } else { y.get(i, j) * rat(2) };
                map.set(t, k, w);
                k += 1;
            }
        }
    }
    Ok(kernel_basis(&map))
}

pub fn gen_weak(params: &GenParams) -> Result<(DualInstance, CertificateBundle), GenError> {
    params.validate_weak()?;
    let (n, m, k, l, range) = (params.n, params.m, params.k(), params.l(), params.entry_range);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pset = blocks(&params.p, n, Direction::Forward).expect("validated");
    let qset = blocks(&params.q, n, Direction::Reverse).expect("validated");
    let (plev, qlev) = (levels(&pset, n), levels(&qset, n));
    let mut a: Vec<SymRatMatrix> = (0..=k).map(|i| staircase_member(&mut rng, &plev, i, range)).collect();
    let mut y: Vec<SymRatMatrix> = (0..=l).map(|j| staircase_member(&mut rng, &qlev, j, range)).collect();
    // 0-based: member i meets member j only on blocks (P_s, Q_t) with s < i, t < j
    for i in 1..=k {
        for j in 1..=l {
            let target = if (i, j) == (k, l) { rat(-1) } else { Rat::zero() };
            let (ai, yj) = (&mut a[i], &mut y[j]);
            step_star(ai, yj, &target, &pset[i - 1], &qset[j - 1], range, &mut rng)?;
        }
    }
    let needed = m - (k + 1);
    if needed > 0 {
        let kernel = orthogonal_complement(&y[..l], n)?;
        if needed > kernel.len() {
            return Err(GenError::KernelTooSmall {
                requested: m,
                needed,
                available: kernel.len(),
                max_m: k + 1 + kernel.len(),
            });
        }
        for _ in 0..needed {
            let mut coords = vec![Rat::zero(); n * (n + 1) / 2];
            while coords.iter().all(Zero::is_zero) {
                for b in &kernel {
                    let w = draw(&mut rng, 2);
                    if !w.is_zero() {
                        for (x, v) in coords.iter_mut().zip(b) {
                            *x += &w * v;
                        }
                    }
                }
            }
            a.push(SymRatMatrix::from_upper(n, coords)?);
        }
    }
    let mut c = vec![Rat::zero(); m];
    c[k] = rat(-1);
    for i in k + 1..m {
        c[i] = inner_product(&a[i], &y[l])?;
    }
    let inst = DualInstance::new(a, c)?;
    let bundle = CertificateBundle {
        dual_infeasible: Some(identity_witness(n, m, params.p.clone())),
        dual_not_strong: Some(SeqWitness::plain(y, params.q.clone(), SeqForm::Revregfr)),
        provenance: params.provenance("weak"),
        ..CertificateBundle::default()
    };
    finish(params, inst, bundle)
}

pub fn random_invertible(rng: &mut ChaCha8Rng, size: usize, range: i64) -> Result<RatMatrix, GenError> {
    for _ in 0..MAX_DRAWS {
        let rows = (0..size).map(|_| (0..size).map(|_| draw(rng, range)).collect()).collect();
        let t = RatMatrix::from_rows(rows)?;
        if determinant(&t).is_some_and(|d| !d.is_zero()) {
            return Ok(t);
        }
    }
    Err(GenError::ResampleExhausted(MAX_DRAWS))
}

pub fn mess(
    inst: &DualInstance,
    bundle: &CertificateBundle,
    seed: u64,
) -> Result<(DualInstance, CertificateBundle), GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = random_invertible(&mut rng, inst.m(), 2)?;
    let v = random_invertible(&mut rng, inst.n, 2)?;
    let (inst, mut bundle) = mess_with(inst, bundle, &t, &v)?;
    bundle.provenance.insert("mess_seed", seed);
    Ok((inst, bundle))
}

// a'_i = v^T (sum_j t_ij a_j) v and c' = t c; witnesses follow so they still verify.
pub fn mess_with(
    inst: &DualInstance,
    bundle: &CertificateBundle,
    t: &RatMatrix,
    v: &RatMatrix,
) -> Result<(DualInstance, CertificateBundle), GenError> {
    let singular = || GenError::InvalidParams("mess matrices must be invertible".into());
    let t_inv = invert(t).ok_or_else(singular)?;
    let v_inv = invert(v).ok_or_else(singular)?;
    let a =
        combine_columns(&inst.a, &t.transpose())?.iter().map(|x| congruence(v, x)).collect::<Result<Vec<_>, _>>()?;
    let c = t.mul_vec(&inst.c)?;
    let out = DualInstance::with_objective(a, c, inst.objective.clone())?;
    let v_inv_t = v_inv.transpose();
    let mut nb = CertificateBundle { provenance: bundle.provenance.clone(), ..CertificateBundle::default() };
    if let Some(w) = &bundle.dual_infeasible {
        nb.dual_infeasible = Some(DualInfeasibleWitness {
            m: t_inv.transpose().mul(&w.m)?,
            t: v_inv.mul(&w.t)?,
            sizes: w.sizes.clone(),
        });
    }
    if let Some(w) = &bundle.dual_not_strong {
        nb.dual_not_strong = Some(SeqWitness {
            ys: w.ys.iter().map(|y| congruence(&v_inv_t, y)).collect::<Result<_, _>>()?,
            s: v.transpose().mul(&w.s)?,
            sizes: w.sizes.clone(),
            form: w.form,
        });
    }
    Ok((out, nb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::{verify_dual_infeasible, verify_dual_not_strongly_infeasible, verify_weakly_infeasible};

    fn small(seed: u64) -> GenParams {
        GenParams { n: 5, m: 6, p: vec![1, 1, 1], q: vec![1, 1], entry_range: 2, seed, mess: false }
    }

    #[test]
    fn weak_small_verifies() {
        for seed in 0..20 {
            let (inst, bundle) = gen_weak(&small(seed)).unwrap();
            assert!(verify_weakly_infeasible(&inst, &bundle).unwrap(), "seed {seed}");
            assert!(inst.a.iter().all(|a| a.upper().iter().all(|x| x.is_integer())));
        }
    }

    #[test]
    fn minimal_case_is_two_by_two() {
        let p = GenParams { n: 2, m: 2, p: vec![1, 0], q: vec![1, 0], entry_range: 2, seed: 3, mess: false };
        let (inst, bundle) = gen_weak(&p).unwrap();
        assert_eq!(inst.a[0], SymRatMatrix::from_i64(&[&[1, 0], &[0, 0]]));
        assert_eq!(inst.c, vec![rat(0), rat(-1)]);
        assert!(verify_weakly_infeasible(&inst, &bundle).unwrap());
    }

    #[test]
    fn determinism() {
        let p = GenParams::preset("m10").unwrap().with_seed(9);
        assert_eq!(gen_weak(&p).unwrap(), gen_weak(&p).unwrap());
        assert_eq!(gen_infeasible(&p).unwrap(), gen_infeasible(&p).unwrap());
    }

    #[test]
    fn infeasible_verifies() {
        for seed in 0..10 {
            let p = GenParams::preset("m10").unwrap().with_seed(seed);
            let (inst, bundle) = gen_infeasible(&p).unwrap();
            assert!(verify_dual_infeasible(&inst, bundle.dual_infeasible.as_ref().unwrap()).unwrap().is_proven());
        }
    }

    #[test]
    fn block_diagonal_staircase() {
        let p = GenParams { n: 3, m: 2, p: vec![1, 0], q: vec![], entry_range: 2, seed: 1, mess: false };
        let (inst, bundle) = gen_infeasible(&p).unwrap();
        assert!(verify_dual_infeasible(&inst, bundle.dual_infeasible.as_ref().unwrap()).unwrap().is_proven());
    }

    #[test]
    fn step_keeps_earlier_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let (inst, bundle) = gen_weak(&small(rng.random_range(0..1000))).unwrap();
            let ys = &bundle.dual_not_strong.unwrap().ys;
            for (i, a) in inst.a.iter().enumerate() {
                for (j, y) in ys.iter().enumerate() {
                    let v = inner_product(a, y).unwrap();
                    let want = if j + 1 == ys.len() { inst.c[i].clone() } else { Rat::zero() };
                    assert_eq!(v, want, "({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn zero_target_with_zero_context() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut a, mut y) = (SymRatMatrix::zeros(3), SymRatMatrix::zeros(3));
        step_star(&mut a, &mut y, &Rat::zero(), &[0], &[2], 2, &mut rng).unwrap();
        assert!(y.is_zero());
        assert!(!a.get(0, 2).is_zero());
    }

    #[test]
    fn kernel_bound_reported() {
        let p = GenParams { n: 2, m: 5, p: vec![1, 0], q: vec![1, 0], entry_range: 2, seed: 0, mess: false };
        match gen_weak(&p) {
            Err(GenError::KernelTooSmall { max_m, .. }) => assert_eq!(max_m, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = small(0);
        p.q = vec![3, 3];
        assert!(matches!(gen_weak(&p), Err(GenError::InvalidParams(_))));
        p = small(0);
        p.m = 2;
        assert!(gen_weak(&p).is_err());
        p = small(0);
        p.p = vec![1, 0, 1];
        assert!(gen_weak(&p).is_err());
    }

    #[test]
    fn identity_mess_is_identity() {
        let (inst, bundle) = gen_weak(&small(4)).unwrap();
        let (i2, b2) = mess_with(&inst, &bundle, &RatMatrix::identity(6), &RatMatrix::identity(5)).unwrap();
        assert_eq!(inst, i2);
        assert_eq!(bundle, b2);
    }

    #[test]
    fn messed_bundles_verify() {
        for seed in 0..10 {
            let (inst, bundle) = gen_weak(&small(seed)).unwrap();
            let (mi, mb) = mess(&inst, &bundle, seed + 100).unwrap();
            assert!(mi.a.iter().all(|a| a.upper().iter().all(|x| x.is_integer())));
            let inf = verify_dual_infeasible(&mi, mb.dual_infeasible.as_ref().unwrap()).unwrap();
            let ns = verify_dual_not_strongly_infeasible(&mi, mb.dual_not_strong.as_ref().unwrap()).unwrap();
            assert!(inf.is_proven() && ns.is_proven(), "seed {seed}");
        }
    }
}
