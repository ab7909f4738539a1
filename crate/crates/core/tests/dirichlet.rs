use brentlab::dirichlet::{pole_check, series_truncated, verify_convolution, verify_numthy, zeta, SeriesQuery};
use brentlab::ensembles::EnsembleId;
use brentlab::gcd::CostFunction;

fn query(ensemble: EnsembleId, s: f64, p: u32, v_max: u64) -> SeriesQuery {
    SeriesQuery { ensemble, s, p, cost: CostFunction::steps(), v_max }
}

#[test]
fn zeta_of_three() {
    assert!((zeta(3.0).unwrap() - 1.2020569031595942).abs() < 1e-12);
    assert!((zeta(1.1).unwrap() - 10.58444846495081).abs() < 1e-12);
}

#[test]
fn zeta_closed_forms_for_counts() {
    let r = verify_numthy(1.5, 1_000_000).unwrap();
    assert!(r.passed());
    assert!(r.odd.residual <= 3e-7);
    let r = verify_numthy(2.0, 10_000).unwrap();
    assert!(r.passed());
    assert!(r.odd.residual <= 1e-8 && r.odd_coprime.residual <= 1e-8);
    let r = verify_numthy(1.25, 50).unwrap();
    assert!(r.passed() && r.odd.residual > 1e-3);
}

#[test]
fn convolution_identity_for_counts_and_steps() {
    let r = verify_convolution(1.5, 100_000, 0, &CostFunction::steps()).unwrap();
    assert!(r.passed, "{r:?}");
    let r = verify_convolution(1.5, 20_000, 1, &CostFunction::steps()).unwrap();
    assert!(r.passed, "{r:?}");
    let r = verify_convolution(2.0, 5_000, 1, &CostFunction::shifts()).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn convolution_at_zero_order_reuses_the_count_sums() {
    let c = verify_convolution(2.0, 3_000, 0, &CostFunction::exchanges()).unwrap();
    let n = verify_numthy(2.0, 3_000).unwrap();
    assert_eq!(c.odd_sum, n.odd.truncated);
    assert_eq!(c.odd_coprime_sum, n.odd_coprime.truncated);
}

#[test]
fn counts_do_not_depend_on_the_cost() {
    let mut q = query(EnsembleId::OddCoprime, 1.7, 0, 999);
    let a = series_truncated(&q).unwrap();
    q.cost = CostFunction::shifts();
    assert_eq!(a, series_truncated(&q).unwrap());
}

#[test]
fn truncations_increase_and_tails_are_honest() {
    for (id, p) in
        [(EnsembleId::Odd, 0), (EnsembleId::OddCoprime, 0), (EnsembleId::Odd, 1), (EnsembleId::OddCoprime, 1)]
    {
        let mut last = 0.0;
        for v_max in [25, 100, 400] {
            let small = series_truncated(&query(id, 1.4, p, v_max)).unwrap();
            let big = series_truncated(&query(id, 1.4, p, 4 * v_max)).unwrap();
            assert!(small.value >= last);
            assert!(big.value >= small.value);
            assert!(big.value - small.value <= small.tail_bound, "{id} p={p} v_max={v_max}");
            last = small.value;
        }
    }
}

#[test]
fn scaled_sum_approaches_one_eighth_near_the_pole() {
    let rows: Vec<_> = [1.05, 1.02, 1.01].iter().map(|&s| pole_check(s).unwrap()).collect();
    assert!(rows.windows(2).all(|w| (w[1].scaled - 0.125).abs() < (w[0].scaled - 0.125).abs()));
    assert!((rows[2].scaled / 0.125 - 1.0).abs() < 0.10);
    for r in &rows {
        assert!((r.scaled - r.closed_form_scaled).abs() < 1e-6 * r.closed_form_scaled);
    }
}
