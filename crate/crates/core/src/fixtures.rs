// Small hand-checked systems with exact certificates.
use crate::instance::{
    CertificateBundle, DualInfeasibleWitness, DualInstance, PrimalInstance, PrimalNotStrongWitness, SeqForm, SeqWitness,
};
use crate::linalg::{rat, ratq, Rat, RatMatrix, SymRatMatrix};

fn sym(rows: &[&[Rat]]) -> SymRatMatrix {
    SymRatMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).expect("fixture is symmetric")
}

fn ints(xs: &[i64]) -> Vec<Rat> {
    xs.iter().map(|&x| rat(x)).collect()
}

// <e11, y> = 0, <[[0,1],[1,alpha]], y> = -1, y psd. Weakly infeasible at alpha = 0.
pub fn two_by_two(alpha: i64) -> DualInstance {
    DualInstance::new(
        vec![SymRatMatrix::from_i64(&[&[1, 0], &[0, 0]]), SymRatMatrix::from_i64(&[&[0, 1], &[1, alpha]])],
        ints(&[0, -1]),
    )
    .expect("consistent")
}

pub fn two_by_two_bundle() -> CertificateBundle {
    let half = ratq(-1, 2);
    let ys = vec![SymRatMatrix::from_i64(&[&[0, 0], &[0, 1]]), sym(&[&[rat(0), half.clone()], &[half, rat(0)]])];
    CertificateBundle {
        dual_infeasible: Some(DualInfeasibleWitness {
            m: RatMatrix::identity(2),
            t: RatMatrix::identity(2),
            sizes: vec![1, 0],
        }),
        dual_not_strong: Some(SeqWitness::plain(ys, vec![1, 0], SeqForm::Revregfr)),
        ..CertificateBundle::default()
    }
}

// Three constraints that need row operations to expose the staircase.
pub fn row_operations() -> DualInstance {
    DualInstance::new(
        vec![
            SymRatMatrix::unit(3, 0, 0),
            SymRatMatrix::from_i64(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]),
            SymRatMatrix::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]),
        ],
        ints(&[0, -2, 1]),
    )
    .expect("consistent")
}

pub fn row_operations_bundle() -> CertificateBundle {
    let m = RatMatrix::from_rows(vec![
        ints(&[1, 0, 0]),
        vec![rat(0), ratq(2, 3), rat(0)],
        vec![rat(0), ratq(1, 3), rat(1)],
    ])
    .expect("square");
    let h = ratq(-3, 2);
    let z = rat(0);
    let ys = vec![
        SymRatMatrix::unit(3, 2, 2),
        sym(&[&[z.clone(), z.clone(), h.clone()], &[z.clone(), rat(1), z.clone()], &[h, z.clone(), z]]),
    ];
    CertificateBundle {
        dual_infeasible: Some(DualInfeasibleWitness { m, t: RatMatrix::identity(3), sizes: vec![1, 1] }),
        dual_not_strong: Some(SeqWitness::plain(ys, vec![1, 1], SeqForm::Revregfr)),
        ..CertificateBundle::default()
    }
}

// x_1 e11 + x_2 (e12 + e21) <= antidiagonal(1, 1, 1): weakly infeasible primal.
pub fn primal_three() -> PrimalInstance {
    PrimalInstance::new(
        vec![SymRatMatrix::unit(3, 0, 0), SymRatMatrix::from_i64(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]])],
        SymRatMatrix::from_i64(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]),
    )
    .expect("consistent")
}

pub fn primal_three_bundle() -> CertificateBundle {
    let z = rat(0);
    let h = ratq(-1, 2);
    let ys = vec![
        SymRatMatrix::unit(3, 2, 2),
        SymRatMatrix::from_i64(&[&[0, 0, -1], &[0, 2, 0], &[-1, 0, 0]]),
        sym(&[&[z.clone(), z.clone(), h.clone()], &[z.clone(), z.clone(), z.clone()], &[h, z.clone(), z]]),
    ];
    CertificateBundle {
        primal_infeasible: Some(SeqWitness::plain(ys, vec![1, 1, 0], SeqForm::Revregfr)),
        primal_not_strong: Some(PrimalNotStrongWitness {
            m: RatMatrix::identity(2),
            mu: ints(&[0, 0]),
            t: RatMatrix::identity(3),
            sizes: vec![1, 1],
        }),
        ..CertificateBundle::default()
    }
}

// Feasible primal whose only feasible slack is singular; objective x_1.
pub fn ramana_example() -> PrimalInstance {
    PrimalInstance::with_objective(
        vec![
            SymRatMatrix::from_i64(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]]),
            SymRatMatrix::from_i64(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]),
        ],
        SymRatMatrix::unit(3, 0, 0),
        ints(&[1, 0]),
    )
    .expect("consistent")
}

// Dual tuple for the above: y_1, y_2 reduce the face, A* y_3 = c.
pub fn ramana_example_tuple() -> Vec<SymRatMatrix> {
    let z = rat(0);
    let h = ratq(1, 2);
    vec![
        SymRatMatrix::unit(3, 2, 2),
        SymRatMatrix::from_i64(&[&[0, 0, -1], &[0, 2, 0], &[-1, 0, 0]]),
        sym(&[&[z.clone(), h.clone(), z.clone()], &[h, z.clone(), z.clone()], &[z.clone(), z.clone(), z]]),
    ]
}

// Order-5 weak system with block sizes p = (1, 1, 1), q = (1, 1, 0).
pub fn order_five() -> DualInstance {
    let h = ratq(1, 2);
    let a3 = sym(&[
        &ints(&[3, 2, 1, 3, -2]),
        &[rat(2), rat(0), rat(0), h.clone(), rat(1)],
        &ints(&[1, 0, 1, 0, 0]),
        &[rat(3), h, rat(0), rat(0), rat(0)],
        &ints(&[-2, 1, 0, 0, 0]),
    ]);
    DualInstance::new(
        vec![
            SymRatMatrix::unit(5, 0, 0),
            SymRatMatrix::from_i64(&[
                &[5, 1, 2, 2, 0],
                &[1, 1, 0, 0, 0],
                &[2, 0, 0, 0, 0],
                &[2, 0, 0, 0, 0],
                &[0, 0, 0, 0, 0],
            ]),
            a3,
        ],
        ints(&[0, 0, -1]),
    )
    .expect("consistent")
}

pub fn order_five_bundle() -> CertificateBundle {
    let ys = vec![
        SymRatMatrix::unit(5, 4, 4),
        SymRatMatrix::from_i64(&[
            &[0, 0, 0, 0, 1],
            &[0, 0, 0, 0, 2],
            &[0, 0, 0, 0, 1],
            &[0, 0, 0, 1, 0],
            &[1, 2, 1, 0, 0],
        ]),
        SymRatMatrix::from_i64(&[
            &[0, 0, 0, 0, 3],
            &[0, 0, 0, 1, 5],
            &[0, 0, 0, 4, 1],
            &[0, 1, 4, 1, 2],
            &[3, 5, 1, 2, 3],
        ]),
    ];
    CertificateBundle {
        dual_infeasible: Some(DualInfeasibleWitness {
            m: RatMatrix::identity(3),
            t: RatMatrix::identity(5),
            sizes: vec![1, 1, 1],
        }),
        dual_not_strong: Some(SeqWitness::plain(ys, vec![1, 1, 0], SeqForm::Revregfr)),
        ..CertificateBundle::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::mess_with;
    use crate::instance::Instance;
    use crate::linalg::{apply_adjoint, inner_product};
    use crate::verifier::{verify_bundle, verify_weakly_infeasible};

    #[test]
    fn two_by_two_is_weak() {
        assert!(verify_weakly_infeasible(&two_by_two(0), &two_by_two_bundle()).unwrap());
        assert!(!verify_weakly_infeasible(&two_by_two(1), &two_by_two_bundle()).unwrap());
    }

    #[test]
    fn row_operations_verify() {
        let inst = row_operations();
        let b = row_operations_bundle();
        let r = inst.reformulate(&b.dual_infeasible.as_ref().unwrap().m, &RatMatrix::identity(3)).unwrap();
        assert_eq!(r.c, vec![rat(0), rat(-1), rat(1)]);
        assert!(verify_weakly_infeasible(&inst, &b).unwrap());
    }

    #[test]
    fn primal_three_verifies() {
        let v = verify_bundle(&Instance::Primal(primal_three()), &primal_three_bundle()).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|x| x.is_proven()), "{v:?}");
    }

    #[test]
    fn order_five_products() {
        let inst = order_five();
        let ys = order_five_bundle().dual_not_strong.unwrap().ys;
        let mut minus_ones = 0;
        for (i, a) in inst.a.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                let v = inner_product(a, y).unwrap();
                if (i, j) == (2, 2) {
                    assert_eq!(v, rat(-1));
                    minus_ones += 1;
                } else {
                    assert_eq!(v, rat(0), "({i}, {j})");
                }
            }
        }
        assert_eq!(minus_ones, 1);
        assert!(verify_weakly_infeasible(&inst, &order_five_bundle()).unwrap());
    }

    #[test]
    fn ramana_tuple_is_consistent() {
        let inst = ramana_example();
        let ys = ramana_example_tuple();
        assert_eq!(apply_adjoint(&inst.a, &ys[0]).unwrap(), vec![rat(0), rat(0)]);
        assert_eq!(inner_product(&inst.b, &ys[0]).unwrap(), rat(0));
        assert_eq!(apply_adjoint(&inst.a, &ys[2]).unwrap(), inst.c);
    }

    #[test]
    fn permutation_mess_gives_rotated_form() {
        let swap = RatMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        let (inst, bundle) = mess_with(&two_by_two(0), &two_by_two_bundle(), &RatMatrix::identity(2), &swap).unwrap();
        assert_eq!(inst.a[0], SymRatMatrix::unit(2, 1, 1));
        assert_eq!(inst.a[1], two_by_two(0).a[1]);
        let ys = &bundle.dual_not_strong.as_ref().unwrap().ys;
        assert_eq!(ys[0], SymRatMatrix::unit(2, 0, 0));
        assert_eq!(ys[1], two_by_two_bundle().dual_not_strong.unwrap().ys[1]);
        assert!(verify_weakly_infeasible(&inst, &bundle).unwrap());
    }
}
