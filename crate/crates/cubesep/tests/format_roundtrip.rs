//! Property tests for the text formats: parse ∘ write = identity on
//! canonical forms, across the generator corpus and random voltages.

use proptest::prelude::*;

use cubesep::covers::Voltage;
use cubesep::generators;
use cubesep::io::{read_ccx, read_cov, write_ccx, write_cov};

fn arb_complex() -> impl Strategy<Value = cubesep::complex::CubeComplex> {
    prop_oneof![
        (1usize..5).prop_map(generators::segment),
        (2usize..5).prop_map(generators::cycle),
        (1usize..4).prop_map(generators::cube),
        (1usize..4).prop_map(generators::theta),
        (2usize..4, 2usize..4).prop_map(|(m, n)| generators::torus(m, n)),
        (1usize..3, 1usize..3).prop_map(|(m, n)| generators::grid(m, n)),
        (2usize..5).prop_map(generators::necklace),
        Just(generators::salvetti_k2()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ccx_roundtrip_is_identity(x in arb_complex()) {
        let text = write_ccx(&x, &[]);
        let (back, _) = read_ccx(&text).unwrap();
        prop_assert_eq!(&back, &x);
        prop_assert_eq!(write_ccx(&back, &[]), text);
    }

    #[test]
    fn cov_roundtrip_is_identity(
        x in arb_complex(),
        degree in 1usize..4,
        shifts in proptest::collection::vec(0usize..4, 0..32),
    ) {
        let mut volt = Voltage::identity(x.num_edges(), degree);
        for (e, &s) in shifts.iter().enumerate().take(x.num_edges()) {
            let shift = s % degree;
            volt.perms[e] = (0..degree).map(|i| (i + shift) % degree).collect();
        }
        let text = write_cov(&x, &volt);
        let back = read_cov(&text, &x).unwrap();
        prop_assert_eq!(back, volt);
    }
}
