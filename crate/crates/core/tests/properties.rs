mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nbmlc::codes::{peg_construct, read_alist, write_alist, DegreeProfile};
use nbmlc::galois::Field;
use nbmlc::messages::{convolve, scale_permute, wht, Dist};
use nbmlc::modem::{Constellation, LevelPartition};

fn field_strategy() -> impl Strategy<Value = Field> {
    (1u32..=8).prop_map(|m| Field::new(m, None).unwrap())
}

fn dist_pair(q: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (common::random_distribution(&mut rng, q), common::random_distribution(&mut rng, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_multiplication_matches_carryless_product(f in field_strategy(), a in any::<u8>(), b in any::<u8>()) {
        let mask = (f.q() - 1) as u8;
        let (a, b) = (a & mask, b & mask);
        prop_assert_eq!(f.mul(a, b), common::gf_mul_slow(a, b, f.m(), f.poly()));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn wht_applied_twice_scales_by_q(log_q in 0u32..=8, seed in any::<u64>()) {
        let q = 1usize << log_q;
        let (x, _) = dist_pair(q, seed);
        let back = wht(&wht(&x));
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a / q as f64 - b).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_is_commutative_and_normalised(log_q in 1u32..=8, seed in any::<u64>()) {
        let (a, b) = dist_pair(1 << log_q, seed);
        let (a, b) = (Dist::new(a).unwrap(), Dist::new(b).unwrap());
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        for (x, y) in ab.probs().iter().zip(ba.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((ab.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_permute_is_undone_by_the_inverse(f in field_strategy(), h in 1u8..=255, seed in any::<u64>()) {
        let h = ((h as usize - 1) % (f.q() - 1) + 1) as u8;
        let (p, _) = dist_pair(f.q(), seed);
        let d = Dist::new(p).unwrap();
        let there = scale_permute(&f, h, &d).unwrap();
        let back = scale_permute(&f, f.inv(h).unwrap(), &there).unwrap();
        prop_assert_eq!(back.probs(), d.probs());
        for x in 0..f.q() {
            prop_assert_eq!(there.probs()[f.mul(h, x as u8) as usize], d.probs()[x]);
        }
    }

    #[test]
    fn level_demapper_outputs_are_distributions(
        split in 0usize..4,
        re in -1.5f64..1.5,
        im in -1.5f64..1.5,
        log_n0 in -4.0f64..1.0,
        lower in any::<u8>(),
    ) {
        let (bits, widths): (u32, &[u32]) = [(6, &[6][..]), (6, &[4, 2]), (8, &[4, 4]), (8, &[2, 6])][split];
        let Ok(p) = LevelPartition::new(Constellation::square(bits).unwrap(), widths) else {
            return Ok(());
        };
        let y = Complex64::new(re, im);
        let n0 = 10f64.powf(log_n0);
        let d0 = p.demap_level(y, n0, 0, &[]).unwrap();
        prop_assert!((d0.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(d0.probs().iter().all(|v| v.is_finite() && *v >= 0.0));
        if widths.len() == 2 {
            let s0 = lower & ((1u8 << widths[0]) - 1);
            let d1 = p.demap_level(y, n0, 1, &[s0]).unwrap();
            prop_assert!((d1.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn encoder_output_has_zero_syndrome(m in 1u32..=6, n in 24usize..64, seed in any::<u64>()) {
        let field = Field::new(m, None).unwrap();
        let checks = n / 3;
        let Ok(code) = peg_construct(&field, &DegreeProfile::regular(n, checks, 2), seed) else {
            return Ok(());
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..field.q()) as u8).collect();
        let word = code.encode(&info).unwrap();
        prop_assert!(code.syndrome(&word).unwrap().iter().all(|&s| s == 0));
        prop_assert_eq!(code.extract_info(&word), info);
    }

    #[test]
    fn alist_round_trip_preserves_the_code(m in 1u32..=8, n in 16usize..48, seed in any::<u64>()) {
        let field = Field::new(m, None).unwrap();
        let Ok(code) = peg_construct(&field, &DegreeProfile::regular(n, n / 2, 3), seed) else {
            return Ok(());
        };
        let mut text = Vec::new();
        write_alist(&code, &mut text).unwrap();
        let back = read_alist(&text[..]).unwrap();
        prop_assert_eq!(&back, &code);
    }
}
