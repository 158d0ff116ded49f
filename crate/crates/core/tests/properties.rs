use latin_mate::baselines::{backtrack_mate, random_latin_rectangle, BacktrackLimits};
use latin_mate::exec::Exec;
use latin_mate::latin::{extract_transversals, verify_orthogonal, LatinRectangle, LineClass};
use latin_mate::matching::{
    birkhoff_decompose, build_fractional_matching, max_terms, EtaPolicy, RowDistribution,
};
use latin_mate::process::{
    advance_state, check_gamma, check_gamma_with, init_state, kill_mask, run_process,
    GammaConstants, ProcessConfig,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rect(n: usize, m: usize, seed: u64) -> LatinRectangle {
    random_latin_rectangle(n, m, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn perm(n: usize, seed: u64) -> Vec<u32> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

/// Per-symbol normalized weights with random sparsity.
fn distribution(n: usize, seed: u64) -> RowDistribution {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let density: f64 = r.gen_range(0.2..1.0);
    let mut w = vec![0.0; n * n];
    for g in 0..n {
        let k0 = r.gen_range(0..n);
        w[k0 * n + g] = r.gen::<f64>() + 0.01;
        for k in 0..n {
            if r.gen::<f64>() < density {
                w[k * n + g] += r.gen::<f64>();
            }
        }
        let s: f64 = (0..n).map(|k| w[k * n + g]).sum();
        (0..n).for_each(|k| w[k * n + g] /= s);
    }
    RowDistribution::from_normalized(n, w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orthogonality_is_symmetric(n in 2usize..7, seed in any::<u64>()) {
        let a = rect(n, n, seed);
        let b = rect(n, n, seed ^ 0x5555);
        prop_assert_eq!(verify_orthogonal(&a, &b).unwrap().ok, verify_orthogonal(&b, &a).unwrap().ok);
    }

    #[test]
    fn text_and_json_round_trip(n in 1usize..9, seed in any::<u64>()) {
        let m = 1 + (seed as usize) % n;
        let j = rect(n, m, seed);
        prop_assert_eq!(&LatinRectangle::parse(&j.to_text()).unwrap(), &j);
        let json = serde_json::to_string(&j).unwrap();
        prop_assert_eq!(&serde_json::from_str::<LatinRectangle>(&json).unwrap(), &j);
    }

    #[test]
    fn transversals_partition_the_cells(seed in any::<u64>()) {
        let j = rect(5, 3, seed);
        let found = backtrack_mate(&j, BacktrackLimits::default()).unwrap();
        prop_assert!(found.is_some());
        if let Some(mate) = found {
            let classes = extract_transversals(&mate, &j).unwrap();
            prop_assert_eq!(classes.len(), 5);
            let mut seen = [false; 15];
            for c in &classes {
                prop_assert_eq!(c.len(), 3);
                prop_assert!(c.is_valid_for(&j));
                for &(i, k) in &c.cells {
                    prop_assert!(!seen[i * 5 + k]);
                    seen[i * 5 + k] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn kills_at_most_two_per_local_line(n in 2usize..12, seed in any::<u64>()) {
        let m = 2 + (seed as usize) % (n - 1);
        let m = m.min(n);
        let j = rect(n, m, seed);
        let t = (seed as usize >> 8) % (m - 1);
        let mask = kill_mask(&perm(n, seed), t, &j);
        prop_assert!(mask.max_per_local_line(LineClass::RC) <= 2);
        prop_assert!(mask.max_per_local_line(LineClass::RS) <= 2);
    }

    #[test]
    fn flow_respects_slack_and_is_doubly_stochastic(n in 2usize..10, seed in any::<u64>(), eta in 0.0f64..1.0) {
        let d = distribution(n, seed);
        if let Ok((q, used)) = build_fractional_matching(&d, EtaPolicy::Doubling, eta, 64.0) {
            prop_assert!(used >= eta - 1e-12);
            prop_assert!(q.stochastic_error() <= 1e-9);
            for (a, b) in q.entries().iter().zip(d.weights()) {
                prop_assert!(*a >= -1e-12);
                prop_assert!(*a <= (1.0 + used) * b + 1e-9);
            }
            let dec = birkhoff_decompose(&q).unwrap();
            prop_assert!(dec.len() <= max_terms(n));
            let err = dec.reconstruct().iter().zip(q.entries()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-9);
        }
    }

    #[test]
    fn update_grows_survivors_and_absorbs_zeros(n in 5usize..12, seed in any::<u64>()) {
        let j = rect(n, n / 2 + 1, seed);
        let s = init_state::<f64>(j.shape());
        let d = latin_mate::matching::normalize_row(&s, 0).unwrap();
        let (q, _) = build_fractional_matching(&d, EtaPolicy::Doubling, 0.5, 64.0).unwrap();
        let row = perm(n, seed ^ 1);
        let next = advance_state(&s, &q, &row, &j).unwrap();
        let next2 = {
            let d2 = latin_mate::matching::normalize_row(&next, 1).unwrap();
            let (q2, _) = build_fractional_matching(&d2, EtaPolicy::Doubling, 0.5, 64.0).unwrap();
            let dec = birkhoff_decompose(&q2).unwrap();
            advance_state(&next, &q2, &dec.terms()[0].permutation, &j).ok()
        };
        let nn = n * n;
        prop_assert_eq!(&next.masses()[..nn], &s.masses()[..nn]);
        for (a, b) in next.masses()[nn..].iter().zip(&s.masses()[nn..]) {
            prop_assert!(*a == 0.0 || a >= b);
        }
        if let Some(next2) = next2 {
            for (a, b) in next2.masses().iter().zip(next.masses()) {
                if *b == 0.0 {
                    prop_assert_eq!(*a, 0.0);
                }
            }
        }
    }

    #[test]
    fn gamma_check_is_mode_independent(n in 4usize..14, seed in any::<u64>()) {
        let j = rect(n, n / 2, seed);
        let s = init_state::<f64>(j.shape());
        let d = latin_mate::matching::normalize_row(&s, 0).unwrap();
        let (q, _) = build_fractional_matching(&d, EtaPolicy::Doubling, 0.5, 64.0).unwrap();
        let next = advance_state(&s, &q, &perm(n, seed), &j).unwrap();
        let c = GammaConstants::default();
        let a = check_gamma_with(&next, 0.5, &c, Exec::Sequential);
        let b = check_gamma_with(&next, 0.5, &c, Exec::Parallel);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &check_gamma(&next, 0.5));
    }

    #[test]
    fn runs_are_reproducible(seed in any::<u64>()) {
        let j = rect(10, 5, seed);
        let cfg = ProcessConfig { record_trajectory: true, ..ProcessConfig::default() };
        let a = run_process(&j, 0.5, seed, &cfg).unwrap();
        let b = run_process(&j, 0.5, seed, &ProcessConfig { exec: Exec::Parallel, ..cfg }).unwrap();
        prop_assert_eq!(a, b);
    }
}
