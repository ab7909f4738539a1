use std::f64::consts::PI;
use std::sync::OnceLock;

use brentlab::constants::{
    constants_report, lambda_omega, lambda_s_three_ways, mu_of_cost, mu_via_lambda, ConstantsReport,
};
use brentlab::density::{solve_distribution, solve_xi, GridSpec, SingularDensity};
use brentlab::gcd::{Branch, CostFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture() -> &'static (SingularDensity, ConstantsReport) {
    static CELL: OnceLock<(SingularDensity, ConstantsReport)> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = GridSpec::default();
        let (d, _) = solve_xi(&spec, 1e-12).unwrap();
        let (f, _) = solve_distribution(&spec, 1e-12).unwrap();
        let r = constants_report(&d, &f).unwrap();
        (d, r)
    })
}

#[test]
fn every_residual_passes() {
    let (_, r) = fixture();
    for res in &r.residuals {
        assert!(res.passed, "{res:?}");
    }
}

#[test]
fn lambda_four_ways() {
    let (d, r) = fixture();
    let ls = lambda_s_three_ways(d).unwrap();
    let all = [ls.v1.value, ls.v2.value, ls.v3, r.lambda_s_from_xi];
    for a in all {
        for b in all {
            assert!((a - b).abs() <= 1e-5);
        }
        assert!((a + 1.96367).abs() < 1e-5, "{a}");
    }
}

#[test]
fn subtraction_constant_chain() {
    let (_, r) = fixture();
    let from_reference = 4.0 / (PI * PI * 0.3979226811883166);
    for v in [r.mu_s, 1.0 / r.beta, 1.0 / r.beta_tilde] {
        assert!((v - from_reference).abs() <= 1e-5, "{v}");
        assert!((v - 1.01850).abs() < 5e-6);
    }
    assert_eq!(r.mu_t, 2.0 * r.mu_s);
    assert!(r.exchange_factor > 0.5 && r.exchange_factor < 0.6);
}

#[test]
fn mean_cost_routes_agree_on_random_tables() {
    let (d, _) = fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for t in 0..5 {
        let bound = rng.gen_range(0.5..3.0);
        let values: Vec<[f64; 2]> = (0..64).map(|_| [rng.gen_range(0.0..bound), rng.gen_range(0.0..bound)]).collect();
        let cost = CostFunction::new(format!("random{t}"), bound, move |b, k| {
            let slot = if b == Branch::Exchange { 0 } else { 1 };
            values[k as usize][slot] * f64::from(k)
        })
        .unwrap();
        let a = mu_of_cost(d, &cost).unwrap().value;
        let b = mu_via_lambda(d, &cost).unwrap().value;
        assert!((a - b).abs() <= 1e-8, "{t}: {a} {b}");
        assert!(lambda_omega(d, &cost).unwrap().value > 0.0);
    }
}
