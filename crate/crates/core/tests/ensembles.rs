use std::f64::consts::PI;

use brentlab::ensembles::{ensemble_census, enumerate_pairs, geometric_ladder, mean_cost, sweep, EnsembleId};
use brentlab::gcd::{binary_gcd_trace, CostFunction};

const MU_S: f64 = 1.0185012157601112;

#[test]
fn census_limits_at_one_hundred_thousand() {
    let one = ensemble_census(EnsembleId::OddCoprime, 100_000).unwrap();
    let two = ensemble_census(EnsembleId::Odd, 100_000).unwrap();
    assert!((one.ratio * PI * PI - 1.0).abs() < 0.005, "{}", one.ratio);
    assert!((two.ratio / 0.125 - 1.0).abs() < 0.005, "{}", two.ratio);
    assert_eq!(two.count, 50_000 * 49_999 / 2);
}

#[test]
fn census_matches_enumeration() {
    for id in EnsembleId::ALL {
        for n in [1, 2, 3, 10, 97, 300] {
            let c = ensemble_census(id, n).unwrap();
            assert_eq!(c.count, enumerate_pairs(id, n).count() as u64, "{id} {n}");
        }
    }
}

#[test]
fn per_trace_cost_ordering() {
    let (s, t, e) = (CostFunction::steps(), CostFunction::shifts(), CostFunction::exchanges());
    for (u, v) in enumerate_pairs(EnsembleId::All, 200) {
        let tr = binary_gcd_trace(u, v).unwrap();
        let (cs, ct, ce) = (tr.cost(&s).unwrap(), tr.cost(&t).unwrap(), tr.cost(&e).unwrap());
        assert!(ce <= cs && cs <= ct, "({u}, {v})");
        assert!(cs <= 2.0 * (v as f64).log2() + 2.0);
    }
}

#[test]
fn ladder_sweep_agrees_with_single_bounds() {
    let costs = [CostFunction::steps(), CostFunction::exchanges()];
    let ladder = [50, 333, 1000];
    let all = sweep(&EnsembleId::ALL, &costs, &ladder, 0).unwrap();
    for (i, &n) in ladder.iter().enumerate() {
        for (e, &id) in EnsembleId::ALL.iter().enumerate() {
            for (c, cost) in costs.iter().enumerate() {
                let single = mean_cost(id, n, cost).unwrap();
                let got = all.get(i, e, c);
                assert_eq!(got.count, single.count);
                assert!((got.sum_cost() - single.sum_cost()).abs() <= 1e-9 * single.sum_cost());
            }
        }
    }
}

#[test]
fn sweep_results_do_not_depend_on_threads() {
    let costs = [CostFunction::shifts()];
    let a = sweep(&[EnsembleId::Coprime], &costs, &[2000], 1).unwrap();
    let b = sweep(&[EnsembleId::Coprime], &costs, &[2000], 3).unwrap();
    assert_eq!(a.rows(), b.rows());
}

#[test]
fn linear_combination_of_costs() {
    let (s, e) = (CostFunction::steps(), CostFunction::exchanges());
    let combo = CostFunction::linear_combination(1.5, &s, 0.5, &e).unwrap();
    for id in EnsembleId::ALL {
        let m = |c: &CostFunction| mean_cost(id, 700, c).unwrap().mean();
        assert!((m(&combo) - (1.5 * m(&s) + 0.5 * m(&e))).abs() < 1e-12);
    }
}

#[test]
fn second_moment_ratio_rises_toward_the_squared_constant() {
    let r = sweep(&[EnsembleId::Odd], &[CostFunction::steps()], &geometric_ladder(6, 12), 0).unwrap();
    let ratios: Vec<f64> = (0..r.ladder.len())
        .map(|i| {
            let l = (r.ladder[i] as f64).ln();
            r.get(i, 0, 0).second_moment() / (l * l * MU_S * MU_S)
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    assert!(ratios.iter().all(|&x| x < 1.0));
}

#[test]
#[ignore = "fails: at n = 1e5 the ratio is 0.870, outside the 10% band; convergence in ln n is too slow"]
fn second_moment_within_ten_percent_at_one_hundred_thousand() {
    let s = mean_cost(EnsembleId::Odd, 100_000, &CostFunction::steps()).unwrap();
    let l = (100_000f64).ln();
    let ratio = s.second_moment() / (l * l * MU_S * MU_S);
    assert!((ratio - 1.0).abs() <= 0.10, "{ratio}");
}
