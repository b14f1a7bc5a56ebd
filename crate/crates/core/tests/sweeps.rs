use num_rational::Rational64;
use proptest::prelude::*;

use genlimit::adversary::{
    canonical_enumeration, intersection_first_attack, validate_script, with_junk,
};
use genlimit::generators::{canonical_int, ObliviousGenerator, ObliviousKind};
use genlimit::harness::{
    build_table, cmd_simulate, cmd_verify, noisy_window, AttackKind, GeneratorKind, Setup,
    SimulateOptions,
};
use genlimit::oracle::{
    oracle_mstar, oracle_noisy_table, oracle_repr_table, pareto_dominance, random_collection,
    DominanceVerdict,
};
use genlimit::procedures::{procedure1, procedure2, procedure3, GroupPartition};
use genlimit::setalg::{SetExpr, Token};

fn halves(c: &genlimit::Collection) -> GroupPartition {
    let upper = SetExpr::at_least(0).union(&SetExpr::universe(&c.registry).atom_part());
    GroupPartition::new(vec![upper, SetExpr::at_most(-1)], &c.registry).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plain_table_matches_oracle(seed in 0u64..10_000, n in 1usize..7) {
        let c = random_collection(seed, n);
        prop_assert_eq!(procedure1(&c, n).unwrap().m_star(), oracle_mstar(&c, n).unwrap().m_star());
    }

    #[test]
    fn repr_table_matches_oracle(seed in 0u64..10_000, n in 1usize..5, q in 1i64..5) {
        let c = random_collection(seed, n);
        let p = halves(&c);
        let alpha = Rational64::new(1, q);
        let fast = procedure3(&c, &p, alpha, n).unwrap().m_star();
        let slow = oracle_repr_table(&c, &p, alpha, n).unwrap().m_star();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn optimal_generator_meets_bound(seed in 0u64..10_000) {
        let c = random_collection(seed, 4);
        let opts = SimulateOptions {
            targets: Vec::new(),
            attack: AttackKind::IntersectionFirst,
            horizon: None,
            generator: GeneratorKind::Optimal,
        };
        let (_, reports) = cmd_simulate(&c, &Setup::plain(), &opts).unwrap();
        for r in reports {
            prop_assert!(r.passed, "target {} firstStable {} bound {:?}", r.target, r.first_stable, r.bound);
        }
    }

    #[test]
    fn dominance_is_antisymmetric(a in prop::collection::vec(1u64..6, 1..6), b in prop::collection::vec(1u64..6, 1..6)) {
        let n = a.len().min(b.len());
        let (a, b) = (&a[..n], &b[..n]);
        let ab = pareto_dominance(a, b).unwrap();
        prop_assert_eq!(ab.mirror(), pareto_dominance(b, a).unwrap());
        prop_assert_eq!(ab == DominanceVerdict::Equal, a == b);
    }
}

#[test]
fn noisy_table_matches_oracle() {
    for seed in 0..12 {
        let c = random_collection(seed, 2);
        let table = procedure2(&c, 2).unwrap();
        let budget: u64 = table.entries.iter().map(|e| e.cell.budget()).sum();
        let oracle = oracle_noisy_table(&c, 2, &noisy_window(&c, budget)).unwrap();
        for (cell, m) in oracle {
            let e = table.entry_for(cell.index, cell.level).unwrap();
            assert_eq!(e.m_star, m, "seed {seed} cell {cell:?}");
        }
    }
}

#[test]
fn noisy_verify_on_random_pairs() {
    for seed in 0..8 {
        let c = random_collection(100 + seed, 3);
        let report = cmd_verify(&c, &Setup::noisy(1)).unwrap();
        assert!(
            report.passed(),
            "seed {seed}: {:?}",
            report
                .results
                .iter()
                .filter(|r| !r.passed)
                .collect::<Vec<_>>()
        );
    }
}

#[test]
fn adversary_scripts_are_enumerations() {
    for seed in 0..20 {
        let c = random_collection(seed, 5);
        let table = build_table(&c, &Setup::plain()).unwrap();
        for i in 0..c.len() {
            let s = canonical_enumeration(&c, i, 30).unwrap();
            assert!(validate_script(&s, &c).is_ok());
            if let Ok(s) = intersection_first_attack(&table, &c, i, 30) {
                assert!(validate_script(&s, &c).is_ok());
                let noisy = with_junk(s, &c, &[0]);
                assert_eq!(noisy.noise_level, 1);
                assert!(!c.set(i).contains(&noisy.tokens[0]));
            }
        }
    }
}

#[test]
fn canonical_integers_cover_each_value_once() {
    let v: Vec<i64> = (1..=7).map(canonical_int).collect();
    assert_eq!(v, vec![0, 1, -1, 2, -2, 3, -3]);
}

#[test]
fn oblivious_generator_rejects_zero_times() {
    assert!(ObliviousGenerator::new(ObliviousKind::Cominus, vec![1, 0, 2]).is_err());
    let mut g = ObliviousGenerator::new(ObliviousKind::Cominus, vec![1, 2, 3]).unwrap();
    let out = g.step(Token::Int(5));
    assert_ne!(out, Token::Int(5));
}
