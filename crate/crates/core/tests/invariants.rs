//! Property tests over randomized inputs.

use dbicm_core::capacity::{bicm_capacity, cm_capacity, dbicm_capacity};
use dbicm_core::constellation::{gray_pam, gray_qam, DelayScheme};
use dbicm_core::ldpc::{
    check_count, constrained_peg, project_lambda, repair_assignment, round_assignment, BitChannelTypes,
    ChannelAssignment,
};
use dbicm_core::sim::{demap, BitKnowledge, Encoder, FrameTally, LLR_CLAMP};
use dbicm_core::NoiseModel;
use num_complex::Complex64;
use proptest::prelude::*;

const DEGREES: [usize; 9] = [2, 3, 4, 5, 6, 7, 8, 9, 10];

fn random_assignment(raw_lambda: &[f64], raw_p: &[f64], rate: f64, dc: usize, qam64: bool) -> ChannelAssignment {
    let mean = (1.0 - rate) * dc as f64;
    let lambda = project_lambda(raw_lambda, &DEGREES, mean).unwrap();
    let (c, scheme) = if qam64 {
        (gray_qam(64).unwrap(), DelayScheme::parse("1,0,1,1,0,1").unwrap())
    } else {
        (gray_qam(16).unwrap(), DelayScheme::parse("0,1,0,1").unwrap())
    };
    let types = BitChannelTypes::symmetric(&c, &scheme);
    let rows: Vec<f64> = (0..types.len()).map(|i| types.share(i)).collect();
    let start: Vec<Vec<f64>> = (0..types.len())
        .map(|i| (0..DEGREES.len()).map(|j| raw_p[i * DEGREES.len() + j] + 1e-3).collect())
        .collect();
    let p = repair_assignment(&start, &rows, &lambda, 1e-12).unwrap();
    ChannelAssignment::new(types, DEGREES.to_vec(), p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn projection_lands_on_constraint_set(
        x in prop::collection::vec(-1.0f64..2.0, 9),
        mean in 2.2f64..9.5,
    ) {
        let l = project_lambda(&x, &DEGREES, mean).unwrap();
        prop_assert!(l.iter().all(|&v| v >= -1e-12));
        prop_assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let m: f64 = l.iter().zip(&DEGREES).map(|(v, &d)| v * d as f64).sum();
        prop_assert!((m - mean).abs() < 1e-9);
        let again = project_lambda(&l, &DEGREES, mean).unwrap();
        for (a, b) in l.iter().zip(&again) {
            prop_assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn repair_hits_marginals(
        raw in prop::collection::vec(0.0f64..1.0, 27),
        cols in prop::collection::vec(0.05f64..1.0, 9),
    ) {
        let cs: f64 = cols.iter().sum();
        let cols: Vec<f64> = cols.iter().map(|c| c / cs).collect();
        let rows = [1.0 / 3.0; 3];
        let p: Vec<Vec<f64>> = raw.chunks(9).map(|r| r.iter().map(|v| v + 1e-3).collect()).collect();
        let q = repair_assignment(&p, &rows, &cols, 1e-10).unwrap();
        for (i, r) in q.iter().enumerate() {
            prop_assert!((r.iter().sum::<f64>() - rows[i]).abs() < 1e-9);
            prop_assert!(r.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
        for j in 0..9 {
            let s: f64 = q.iter().map(|r| r[j]).sum();
            prop_assert!((s - cols[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn rounding_preserves_rows_and_edges(
        raw_lambda in prop::collection::vec(0.0f64..1.0, 9),
        raw_p in prop::collection::vec(0.0f64..1.0, 27),
        qam64 in any::<bool>(),
        blocks in 4usize..40,
    ) {
        let a = random_assignment(&raw_lambda, &raw_p, 0.25, 4, qam64);
        let m = if qam64 { 6 } else { 4 };
        let n = blocks * 4 * m;
        let edges = check_count(n, 0.25).unwrap() * 4;
        let counts = round_assignment(&a, n, Some(edges)).unwrap();
        for (i, row) in counts.iter().enumerate() {
            prop_assert_eq!(row.iter().sum::<usize>(), n * a.types().multiplicity(i) / m);
        }
        let total: usize = counts.iter().flat_map(|r| r.iter().zip(&DEGREES).map(|(c, d)| c * d)).sum();
        prop_assert_eq!(total, edges);
    }

    #[test]
    fn constructed_graph_matches_rounded_counts(
        raw_lambda in prop::collection::vec(0.0f64..1.0, 9),
        raw_p in prop::collection::vec(0.0f64..1.0, 18),
        seed in any::<u64>(),
    ) {
        let a = random_assignment(&raw_lambda, &raw_p, 0.5, 7, false);
        let n = 480;
        let code = constrained_peg(&a, n, 0.5, 7, seed).unwrap();
        let counts = round_assignment(&a, n, Some(code.checks() * 7)).unwrap();
        let measured = ChannelAssignment::measure(&code, a.types(), &DEGREES).unwrap();
        for (i, row) in counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                prop_assert!((measured.rows()[i][j] - c as f64 / n as f64).abs() < 1e-12);
            }
        }
        prop_assert!(code.check_degrees().iter().all(|&d| d == 7));
    }

    #[test]
    fn encoder_output_satisfies_checks(
        raw_lambda in prop::collection::vec(0.0f64..1.0, 9),
        raw_p in prop::collection::vec(0.0f64..1.0, 18),
        seed in any::<u64>(),
        info_seed in any::<u64>(),
    ) {
        let a = random_assignment(&raw_lambda, &raw_p, 0.5, 7, false);
        let code = constrained_peg(&a, 240, 0.5, 7, seed).unwrap();
        let enc = Encoder::new(&code);
        prop_assert!(enc.k() >= 120);
        let info: Vec<u8> = (0..enc.k()).map(|i| ((info_seed >> (i % 64)) & 1) as u8 ^ (i % 3 == 0) as u8).collect();
        let cw = enc.encode(&info);
        prop_assert!(code.is_codeword(&cw));
        prop_assert_eq!(enc.extract(&cw), info);
    }

    #[test]
    fn demapper_side_information_rules(
        re in -2.0f64..2.0, im in -2.0f64..2.0,
        snr in -3.0f64..15.0,
        known_pos in 0usize..4, known_bit in 0u8..2,
        prior in -6.0f64..6.0,
    ) {
        let c = gray_qam(16).unwrap();
        let nm = NoiseModel::from_es_n0_db(snr);
        let y = Complex64::new(re, im);
        let mut plain = [0.0; 4];
        demap(&c, y, nm, &[BitKnowledge::Unknown; 4], &mut plain);
        // a zero-LLR prior carries no information
        let mut flat = [0.0; 4];
        demap(&c, y, nm, &[BitKnowledge::Prior(0.0); 4], &mut flat);
        for i in 0..4 {
            prop_assert!((plain[i] - flat[i]).abs() < 1e-9);
        }
        // a bit's own prior is excluded from its output
        let mut k = [BitKnowledge::Unknown; 4];
        k[known_pos] = BitKnowledge::Prior(prior);
        let mut own = [0.0; 4];
        demap(&c, y, nm, &k, &mut own);
        prop_assert!((own[known_pos] - plain[known_pos]).abs() < 1e-9);
        // hard knowledge is reported at the clamp
        k[known_pos] = BitKnowledge::Known(known_bit);
        let mut hard = [0.0; 4];
        demap(&c, y, nm, &k, &mut hard);
        let want = if known_bit == 0 { LLR_CLAMP } else { -LLR_CLAMP };
        prop_assert_eq!(hard[known_pos], want);
        // a very confident prior approaches hard knowledge
        let strong = if known_bit == 0 { 400.0 } else { -400.0 };
        k[known_pos] = BitKnowledge::Prior(strong);
        let mut soft = [0.0; 4];
        demap(&c, y, nm, &k, &mut soft);
        for i in (0..4).filter(|&i| i != known_pos) {
            prop_assert!((soft[i] - hard[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn tallies_add_componentwise(a in prop::array::uniform10(0u64..1000), b in prop::array::uniform10(0u64..1000)) {
        let mk = |v: [u64; 10]| FrameTally {
            frames: v[0], codewords: v[1], codeword_errors: v[2], info_bits: v[3], bit_errors: v[4],
            decodes: v[5], decode_successes: v[6], initial_demaps: v[7], refined_demaps: v[8], bp_iterations: v[9],
        };
        let mut s = mk(a);
        s += mk(b);
        let sum: [u64; 10] = core::array::from_fn(|i| a[i] + b[i]);
        prop_assert_eq!(s, mk(sum));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn delay_sits_between_bicm_and_cm(
        delays in prop::collection::vec(0u32..2, 4),
        snr in -2.0f64..14.0,
        seed in any::<u64>(),
    ) {
        let c = gray_qam(16).unwrap();
        let nm = NoiseModel::from_es_n0_db(snr);
        let mut delays = delays;
        if delays.iter().all(|&d| d == 1) {
            delays[0] = 0;
        }
        let scheme = DelayScheme::new(delays).unwrap();
        let b = bicm_capacity(&c, nm, 20_000, seed).unwrap();
        let d = dbicm_capacity(&c, &scheme, nm, 20_000, seed).unwrap();
        let x = cm_capacity(&c, nm, 20_000, seed).unwrap();
        prop_assert!(b.le_within(&d, 3.0), "{b:?} {d:?}");
        prop_assert!(d.le_within(&x, 3.0), "{d:?} {x:?}");
        prop_assert!(x.value <= 4.0 + 3.0 * x.stderr);
    }

    #[test]
    fn full_staircase_reaches_cm_for_pam(snr in -2.0f64..20.0, seed in any::<u64>()) {
        let c = gray_pam(4).unwrap();
        let nm = NoiseModel::from_es_n0_db(snr);
        let d = dbicm_capacity(&c, &DelayScheme::parse("0,1").unwrap(), nm, 20_000, seed).unwrap();
        let x = cm_capacity(&c, nm, 20_000, seed).unwrap();
        prop_assert!(d.eq_within(&x, 3.0), "{d:?} {x:?}");
    }
}
