use frcert::generator::{gen_infeasible, gen_weak, mess, GenParams};
use frcert::instance::Instance;
use frcert::io::native::{read_native, write_native};
use frcert::io::sdpa::{export_sdpa, import_sdpa};
use frcert::io::NativeDocument;
use frcert::linalg::rat;
use frcert::verifier::{verify_bundle, verify_weakly_infeasible};
use proptest::prelude::*;

fn small_weak(seed: u64, mess: bool) -> GenParams {
    GenParams { n: 6, m: 5, p: vec![1, 2, 1], q: vec![1, 1], entry_range: 2, seed, mess }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn native_round_trip(seed in any::<u64>(), messy in any::<bool>()) {
        let (inst, bundle) = gen_weak(&small_weak(seed, messy)).unwrap();
        let doc = NativeDocument::new(Instance::Dual(inst), bundle);
        let text = write_native(&doc);
        let back = read_native(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(write_native(&back), text);
    }

    #[test]
    fn sdpa_round_trip_keeps_integer_data(seed in any::<u64>()) {
        let (inst, bundle) = gen_infeasible(&small_weak(seed, true)).unwrap();
        let sdpa = export_sdpa(&inst);
        prop_assert!(!sdpa.lossy);
        let back = import_sdpa(&sdpa.text).unwrap();
        prop_assert_eq!(&back.a, &inst.a);
        prop_assert_eq!(&back.c, &inst.c);
        prop_assert!(verify_bundle(&Instance::Dual(back), &bundle).unwrap().iter().all(|v| v.is_proven()));
    }

    #[test]
    fn mess_is_deterministic_and_sound(seed in any::<u64>(), mess_seed in any::<u64>()) {
        let (inst, bundle) = gen_weak(&small_weak(seed, false)).unwrap();
        let a = mess(&inst, &bundle, mess_seed).unwrap();
        let b = mess(&inst, &bundle, mess_seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(verify_weakly_infeasible(&a.0, &a.1).unwrap());
    }

    #[test]
    fn tampered_rhs_is_rejected(seed in any::<u64>(), index in 0usize..5, delta in 1i64..3) {
        let (mut inst, bundle) = gen_weak(&small_weak(seed, false)).unwrap();
        inst.c[index] += rat(delta);
        let verdicts = verify_bundle(&Instance::Dual(inst), &bundle).unwrap();
        prop_assert!(verdicts.iter().any(|v| !v.is_proven()));
    }
}

#[test]
fn presets_generate_at_full_size() {
    for preset in ["m10", "m20"] {
        let params = GenParams::preset(preset).unwrap().with_seed(1);
        let (inst, bundle) = gen_weak(&params).unwrap();
        assert_eq!((inst.n, inst.m()), (10, params.m));
        assert!(verify_weakly_infeasible(&inst, &bundle).unwrap());
    }
}
