mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{members, random_oracle, Oracle};
use ratshare::async_game::AsyncGame;
use ratshare::equilibrium::{
    best_response, enumerate_pure_ne, predicted_equilibria, CommonGoodGame, ResponseKind,
};
use ratshare::field::{interpolate_at_zero, poly_eval};
use ratshare::game::{expected_utility, f_gamma, g_gamma, pivot_probabilities};
use ratshare::{
    AccessStructure, Coalition, CommonGoodUtilities, GreedyUtilities, PrimeField, StrategyProfile,
};

const PRIMES: [u64; 6] = [2, 3, 5, 7, 101, 4_294_967_291];

fn structure(o: &Oracle) -> AccessStructure {
    let gens: Vec<Coalition> = o
        .generators
        .iter()
        .map(|&g| Coalition::from_mask(g))
        .collect();
    AccessStructure::general(o.n, &gens).unwrap()
}

fn arb_oracle(max_n: usize) -> impl Strategy<Value = Oracle> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(1u32..1 << n, 1..=4)
            .prop_map(move |generators| Oracle { n, generators })
    })
}

/// A structure, a participant and probabilities for everyone.
fn arb_instance(max_n: usize) -> impl Strategy<Value = (Oracle, usize, Vec<f64>)> {
    arb_oracle(max_n).prop_flat_map(|o| {
        let n = o.n;
        (Just(o), 0..n, prop::collection::vec(0.0..=1.0f64, n))
    })
}

fn others(alpha: &[f64], i: usize) -> Vec<f64> {
    alpha
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &a)| a)
        .collect()
}

proptest! {
    #[test]
    fn interpolation_recovers_constant_term(
        p_idx in 0..PRIMES.len(),
        raw in prop::collection::vec(any::<u64>(), 1..6),
        x_seed in any::<u64>(),
    ) {
        let p = PRIMES[p_idx];
        let field = PrimeField::new(p).unwrap();
        let k = raw.len().min(p as usize - 1);
        let coeffs: Vec<_> = raw[..k].iter().map(|&v| field.element(v)).collect();
        // k distinct nonzero points
        let mut xs: Vec<u64> = Vec::new();
        let mut next = x_seed % (p - 1);
        while xs.len() < k {
            let x = next % (p - 1) + 1;
            if !xs.contains(&x) {
                xs.push(x);
            }
            next = next.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407) >> 1;
        }
        let points: Vec<_> = xs
            .iter()
            .map(|&x| (field.element(x), poly_eval(&coeffs, field.element(x)).unwrap()))
            .collect();
        prop_assert_eq!(interpolate_at_zero(&points).unwrap(), coeffs[0]);
    }

    #[test]
    fn authorization_is_monotone(o in arb_oracle(12)) {
        let gamma = structure(&o);
        for s in 0u32..1 << o.n {
            let auth = gamma.is_authorized(Coalition::from_mask(s)).unwrap();
            prop_assert_eq!(auth, o.authorized(s));
            if auth {
                for j in 0..o.n {
                    prop_assert!(gamma.is_authorized(Coalition::from_mask(s | 1 << j)).unwrap());
                }
            }
        }
    }

    #[test]
    fn minimal_coalitions_round_trip(o in arb_oracle(8)) {
        let gamma = structure(&o);
        let mins: Vec<u32> = gamma.min_coalitions().iter().map(|c| c.mask()).collect();
        prop_assert_eq!(&mins, &o.minimal());
        let again = AccessStructure::general(o.n, gamma.min_coalitions()).unwrap();
        prop_assert_eq!(again.min_coalitions(), gamma.min_coalitions());
    }

    #[test]
    fn pivot_probabilities_partition((o, i, alpha) in arb_instance(6)) {
        let gamma = structure(&o);
        let rest = others(&alpha, i);
        let pivot = pivot_probabilities(&gamma, i + 1, &rest).unwrap();
        prop_assert!((pivot.pivotal + pivot.already + pivot.never - 1.0).abs() <= 1e-12);
        prop_assert!((pivot.pivotal - o.pivotal(&alpha, i)).abs() <= 1e-12);
        prop_assert!(pivot.never >= -1e-12);
    }

    #[test]
    fn expected_utility_is_linear_with_pivotal_slope(
        (o, i, alpha) in arb_instance(6),
        values in prop::collection::vec(0.1..5.0f64, 6),
        cost in 0.1..2.0f64,
    ) {
        let gamma = structure(&o);
        let values = values[..o.n].to_vec();
        let u = CommonGoodUtilities::new(values.clone(), cost).unwrap();
        let profile = StrategyProfile::new(alpha.clone()).unwrap();
        let e = |x: f64| expected_utility(&gamma, &u, &profile, i + 1, x).unwrap();
        let (e0, eh, e1) = (e(0.0), e(0.5), e(1.0));
        prop_assert!((eh - (e0 + e1) / 2.0).abs() <= 1e-12);
        let f = f_gamma(&gamma, i + 1, &others(&alpha, i)).unwrap();
        prop_assert!((e1 - e0 - (f * values[i] - cost)).abs() <= 1e-12);
        for x in [0.0, 0.5, 1.0] {
            let mut a = alpha.clone();
            a[i] = x;
            prop_assert!((e(x) - o.expected(&a, &values, cost, i)).abs() <= 1e-12);
        }
    }

    #[test]
    fn recovery_without_me_grows_with_disclosure((o, i, alpha) in arb_instance(6), j_seed in any::<usize>(), bump in 0.0..1.0f64) {
        prop_assume!(o.n >= 2);
        let gamma = structure(&o);
        let rest = others(&alpha, i);
        let j = j_seed % rest.len();
        let mut raised = rest.clone();
        raised[j] = (raised[j] + bump).min(1.0);
        prop_assert!(g_gamma(&gamma, i + 1, &raised).unwrap() >= g_gamma(&gamma, i + 1, &rest).unwrap() - 1e-12);
    }

    #[test]
    fn equilibria_respect_structure(o in arb_oracle(5), picks in prop::collection::vec(0usize..3, 5)) {
        let values: Vec<f64> = picks[..o.n].iter().map(|&p| [0.5, 2.0, 5.0][p]).collect();
        let gamma = structure(&o);
        let u = CommonGoodUtilities::new(values.clone(), 1.0).unwrap();
        let ne = enumerate_pure_ne(&CommonGoodGame::new(&gamma, &u).unwrap()).unwrap();
        let minimal = o.minimal();
        for s in &ne {
            let m = s.mask();
            prop_assert!(!minimal.iter().any(|&x| x & m == x && x != m), "superset of minimal: {:?}", members(m));
            prop_assert!(m == 0 || o.authorized(m), "unauthorized revealers: {:?}", members(m));
        }
        let predicted = predicted_equilibria(&gamma, &u).unwrap();
        prop_assert_eq!(&ne, &predicted);
        for m in 0u32..1 << o.n {
            let profile = StrategyProfile::pure(Coalition::from_mask(m), o.n);
            let consistent = (1..=o.n).all(|i| {
                let br = best_response(&gamma, &u, &profile, i).unwrap();
                match br.kind {
                    ResponseKind::Inessential => true,
                    ResponseKind::Reveal => m & (1 << (i - 1)) != 0,
                    ResponseKind::Abstain => m & (1 << (i - 1)) == 0,
                }
            });
            prop_assert_eq!(consistent, ne.contains(&Coalition::from_mask(m)), "profile {:?}", members(m));
        }
    }

    #[test]
    fn knowledge_only_grows_along_play(
        (n, k) in prop::sample::select(vec![(2usize, 2usize), (3, 2), (3, 3)]),
        choices in prop::collection::vec(any::<prop::sample::Index>(), 6),
    ) {
        let game = AsyncGame::new(n, k, 6, GreedyUtilities::default_for(n)).unwrap();
        let mut node = game.root();
        for choice in choices {
            if node.terminal.is_some() {
                let learners = node.knowledge.learners(k);
                prop_assert!(node.depth == 0 || !learners.is_empty() || node.depth == 6);
                break;
            }
            let moves = game.moves(&node);
            let m = moves[choice.index(moves.len())];
            let mover = node.mover;
            let next = game.apply_move(&node, m).unwrap();
            prop_assert!(next.knowledge.extends(&node.knowledge));
            prop_assert_eq!(next.knowledge.known_by(mover), node.knowledge.known_by(mover));
            if next.terminal.is_some() && !next.knowledge.learners(k).is_empty() {
                prop_assert!(!next.knowledge.learners(k).contains(mover));
            }
            node = next;
        }
    }
}

#[test]
fn threshold_authorizes_exactly_large_sets() {
    for n in 1..=12 {
        for k in 1..=n {
            let gamma = AccessStructure::threshold(n, k).unwrap();
            for s in 0u32..1 << n {
                assert_eq!(
                    gamma.is_authorized(Coalition::from_mask(s)).unwrap(),
                    s.count_ones() as usize >= k
                );
            }
        }
    }
}

#[test]
fn sampled_general_structures_are_monotone_and_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let o = random_oracle(&mut rng, 12);
        let gamma = structure(&o);
        for s in 0u32..1 << o.n {
            assert_eq!(
                gamma.is_authorized(Coalition::from_mask(s)).unwrap(),
                o.authorized(s)
            );
        }
    }
}
