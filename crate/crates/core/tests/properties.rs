mod common;

use common::{fixtures, smf, Track};
use notezipf::note_tokenizer::{tokenize, TokenizeOptions};
use notezipf::simon_fit::{fit_counts, forward_counts, scan_objective, solve_n0, RankLaw};
use notezipf::stat_math::chi_square_sf;
use notezipf::{count_tokens, parse_smf, spectrum, tokenize_text, FitOptions, RawNote};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parser_never_panics_on_noise(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
        let _ = parse_smf(&bytes);
        let mut with_magic = b"MThd\0\0\0\x06".to_vec();
        with_magic.extend_from_slice(&bytes);
        let _ = parse_smf(&with_magic);
    }

    #[test]
    fn parser_never_panics_on_mutated_fixtures(
        which in 0usize..64,
        edits in proptest::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..6),
        cut in any::<prop::sample::Index>(),
    ) {
        let all = fixtures();
        let mut bytes = all[which % all.len()].bytes.clone();
        if bytes.is_empty() {
            return Ok(());
        }
        for (i, b) in edits {
            let at = i.index(bytes.len());
            bytes[at] = b;
        }
        let _ = parse_smf(&bytes);
        bytes.truncate(cut.index(bytes.len() + 1));
        let _ = parse_smf(&bytes);
    }

    #[test]
    fn delta_times_round_trip(
        events in proptest::collection::vec((0u32..(1 << 28), 0u8..128, 1u8..128), 1..40)
    ) {
        let mut track = Track::new();
        for &(delta, key, vel) in &events {
            track = track.on(delta, 0, key, vel);
        }
        let parsed = parse_smf(&smf(0, 96, &[track.end(0)])).unwrap();
        let got: Vec<(u64, u8)> = parsed.tracks[0].events.iter().map(|e| (e.tick, e.key)).collect();
        let mut tick = 0u64;
        let want: Vec<(u64, u8)> = events
            .iter()
            .map(|&(d, k, _)| {
                tick += u64::from(d);
                (tick, k)
            })
            .collect();
        prop_assert_eq!(got, want);
        prop_assert_eq!(parsed.tracks[0].end_tick, tick);
    }

    #[test]
    fn spectrum_sums(tokens in proptest::collection::vec(0u16..300, 1..2000)) {
        let table = count_tokens(tokens.iter().copied()).unwrap();
        let spec = spectrum(&table);
        let v: u64 = spec.pairs().map(|(_, w)| w).sum();
        let t: u64 = spec.pairs().map(|(n, w)| n * w).sum();
        prop_assert_eq!(v, table.distinct() as u64);
        prop_assert_eq!(t, tokens.len() as u64);
        prop_assert_eq!(table.total(), tokens.len() as u64);
        prop_assert!(table.counts().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn counting_ignores_order(
        (tokens, shuffled) in proptest::collection::vec(0u8..50, 1..500)
            .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle()))
    ) {
        let a = count_tokens(tokens).unwrap();
        let b = count_tokens(shuffled).unwrap();
        prop_assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn tokens_invariant_under_division_scaling(
        notes in proptest::collection::vec((0u8..128, 0u64..10_000, 1u64..4000), 1..60),
        division in 1u16..500,
        k in 1u16..20,
        min_ticks in 0u64..200,
    ) {
        let raw: Vec<RawNote> = notes
            .iter()
            .map(|&(pitch, onset, duration)| RawNote { pitch, onset, duration, track: 0, channel: 0 })
            .collect();
        let scaled: Vec<RawNote> = raw
            .iter()
            .map(|n| RawNote { onset: n.onset * u64::from(k), duration: n.duration * u64::from(k), ..*n })
            .collect();
        let opts = TokenizeOptions { min_ticks, ..Default::default() };
        let opts_k = TokenizeOptions { min_ticks: min_ticks * u64::from(k), ..Default::default() };
        let a = tokenize(&raw, division, &opts);
        let b = tokenize(&scaled, division * k, &opts_k);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.tokens, &b.tokens);
                prop_assert_eq!(a.tokens.len() + a.dropped, raw.len());
            }
            (Err(_), Err(_)) => prop_assert!(raw.iter().all(|n| n.duration < min_ticks)),
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn chi_square_tail_is_a_survival_function(k in 1u64..400, x in 0.0f64..2000.0, dx in 0.0f64..50.0) {
        let p = chi_square_sf(x, k).unwrap();
        let q = chi_square_sf(x + dx, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(q <= p + 1e-12, "k={k} x={x}: {p} then {q}");
    }

    #[test]
    fn text_tokenizer_is_idempotent(text in "[a-zA-Z' \\-.,;!?0-9\n]{0,200}") {
        let once: Vec<String> = tokenize_text(&text).iter().map(|w| w.to_string()).collect();
        let twice: Vec<String> = tokenize_text(&once.join(" ")).iter().map(|w| w.to_string()).collect();
        prop_assert_eq!(&once, &twice);
        let upper: Vec<String> = tokenize_text(&text.to_uppercase()).iter().map(|w| w.to_string()).collect();
        prop_assert_eq!(&once, &upper);
        prop_assert!(once.iter().all(|w| !w.is_empty() && !w.starts_with(['\'', '-']) && !w.ends_with(['\'', '-'])));
    }

    #[test]
    fn rank_law_identities(ratio in 1.1f64..200.0, distinct in 2u64..100_000, nu in 0.02f64..0.98) {
        let total = (ratio * distinct as f64).round() as u64;
        prop_assume!(total > distinct);
        let law = RankLaw::<f64>::new(total, distinct, nu).unwrap();
        prop_assert!((law.a + law.b * distinct as f64 - 1.0).abs() < 1e-12);
        prop_assert!((law.predict(0.0) / law.n0 - 1.0).abs() < 1e-9);
        prop_assert!((law.predict(distinct as f64) - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_ignores_labels(counts in proptest::collection::vec(1u64..500, 3..80), salt in any::<u32>()) {
        prop_assume!(counts.iter().min() != counts.iter().max());
        let stream: Vec<u32> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i as u32, c as usize))
            .collect();
        let relabeled: Vec<u32> = stream.iter().map(|&t| t.wrapping_mul(2_654_435_761).wrapping_add(salt)).collect();
        let a = count_tokens(stream).unwrap();
        let b = count_tokens(relabeled).unwrap();
        let opts = FitOptions::default();
        let fa = fit_counts::<f64>(&a.counts(), &opts).unwrap();
        let fb = fit_counts::<f64>(&b.counts(), &opts).unwrap();
        prop_assert_eq!(fa.nu, fb.nu);
        prop_assert_eq!(fa.chi2, fb.chi2);
    }

    /// The discrete sum tracks `T` only while the top rank holds a small
    /// share of the corpus; the domain is `n0 <= T / 20`.
    #[test]
    fn predicted_counts_sum_to_total(ratio in 1.1f64..200.0, distinct in 200u64..20_000, nu in 0.02f64..0.98) {
        let total = (ratio * distinct as f64).round() as u64;
        let n0 = solve_n0::<f64>(total, distinct, nu).unwrap();
        prop_assume!(n0 <= total as f64 / 20.0);
        let law = RankLaw::from_n0(n0, total, distinct, nu);
        let sum: f64 = (1..=distinct).map(|r| law.predict(r as f64)).sum();
        prop_assert!((sum / total as f64 - 1.0).abs() < 0.05, "sum {sum} vs T {total}");
    }

    #[test]
    fn objective_has_one_minimum(nu in 0.1f64..0.9, distinct in 100u64..1500, log_n0 in 2.0f64..9.0) {
        let counts = forward_counts(nu, log_n0.exp(), distinct);
        prop_assume!(counts.first() != counts.last());
        let grid = scan_objective::<f64>(&counts, &FitOptions::default()).unwrap();
        let minima = grid
            .windows(3)
            .filter(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1)
            .count();
        let at_edge = grid[0].1 < grid[1].1 || grid[grid.len() - 1].1 < grid[grid.len() - 2].1;
        prop_assert_eq!(minima + usize::from(at_edge), 1, "nu {}", nu);
    }

    #[test]
    fn every_grid_nu_satisfies_identities(counts in proptest::collection::vec(1u64..1000, 3..300)) {
        let mut counts = counts;
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let total: u64 = counts.iter().sum();
        let distinct = counts.len() as u64;
        prop_assume!(total > distinct);
        for (nu, _) in scan_objective::<f64>(&counts, &FitOptions::default()).unwrap() {
            let law = RankLaw::<f64>::new(total, distinct, nu).unwrap();
            prop_assert!((law.a + law.b * distinct as f64 - 1.0).abs() < 1e-9);
            prop_assert!((law.predict(0.0) / law.n0 - 1.0).abs() < 1e-9);
        }
    }
}
