use lpjacobi::DyadicInt;
use proptest::prelude::*;

const M: usize = 40;

fn residue_of(n: i64) -> u64 {
    (n as u64) & ((1u64 << M) - 1)
}

fn digits() -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..2, M)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn arithmetic_matches_integers(n in -(1i64 << 38)..(1i64 << 38), k in -1000i64..1000) {
        let d = DyadicInt::from_integer(n, M).unwrap();
        prop_assert_eq!(d.residue(M), residue_of(n));
        prop_assert_eq!(d.add_int(k).residue(M), residue_of(n + k));
        prop_assert_eq!(d.negate().residue(M), residue_of(-n));
        prop_assert_eq!(d.double().truncate(M).unwrap().residue(M), residue_of(2 * n));
        prop_assert_eq!(d.shift().unwrap().residue(M - 1), residue_of(n >> 1) & ((1 << (M - 1)) - 1));
    }

    #[test]
    fn modified_shift_is_conjugate_to_shift(bits in digits()) {
        let d = DyadicInt::from_digits(&bits).unwrap();
        prop_assert_eq!(d.modified_shift().unwrap(), d.negate().shift().unwrap().negate());
        // ŝϰ = ⌈ϰ/2⌉ on representatives
        let r = d.residue(M);
        prop_assert_eq!(d.modified_shift().unwrap().residue(M - 1), r.div_ceil(2) & ((1 << (M - 1)) - 1));
    }

    #[test]
    fn kappa_commutes_with_shifts(bits in digits()) {
        let d = DyadicInt::from_digits(&bits).unwrap();
        let n = M - 3;
        prop_assert_eq!(d.modified_shift().unwrap().kappa_map(n).unwrap(), d.kappa_map(n + 1).unwrap().shift().unwrap());
    }

    #[test]
    fn kappa_flips_digits_after_first_one(bits in digits()) {
        let d = DyadicInt::from_digits(&bits).unwrap();
        let k = d.kappa_map(M - 1).unwrap();
        match bits.iter().position(|&b| b == 1) {
            None => prop_assert!(k.digits().iter().all(|&b| b == 0)),
            Some(n0) => {
                prop_assert_eq!(&k.digits()[..=n0], &bits[..=n0]);
                for j in n0 + 1..M - 1 {
                    prop_assert_eq!(k.digit(j), 1 - bits[j]);
                }
            }
        }
    }

    #[test]
    fn f_windows_map_into_next_window(seed in any::<u64>(), n in 1usize..4) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = DyadicInt::sample_f(&mut rng, n, M).unwrap();
        prop_assert!(d.run_profile(M).unwrap().within_f(n));
        prop_assert!(d.kappa_map(M - 1).unwrap().run_profile(M - 1).unwrap().within_f(n + 1));
    }

    #[test]
    fn display_round_trips(bits in digits()) {
        let d = DyadicInt::from_digits(&bits).unwrap();
        prop_assert_eq!(DyadicInt::parse(&d.to_string(), M).unwrap(), d);
    }
}
