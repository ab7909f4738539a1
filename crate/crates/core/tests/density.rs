use std::sync::OnceLock;

use brentlab::density::{
    apply_transfer, solve_distribution, solve_xi, ConvergenceRecord, DistributionGrid, Grid, GridSpec, SingularDensity,
};

const TOL: f64 = 1e-12;

fn solved() -> &'static (SingularDensity, ConvergenceRecord) {
    static CELL: OnceLock<(SingularDensity, ConvergenceRecord)> = OnceLock::new();
    CELL.get_or_init(|| solve_xi(&GridSpec::default(), TOL).unwrap())
}

fn distribution() -> &'static (DistributionGrid, ConvergenceRecord) {
    static CELL: OnceLock<(DistributionGrid, ConvergenceRecord)> = OnceLock::new();
    CELL.get_or_init(|| solve_distribution(&GridSpec::default(), TOL).unwrap())
}

#[test]
fn xi_at_one_to_five_digits() {
    let xi1 = solved().0.xi_at_one();
    assert!((xi1 / 0.3979226811883166 - 1.0).abs() <= 5e-6, "{xi1}");
}

#[test]
fn transfer_preserves_integrals() {
    let (xi, _) = solved();
    let grid = xi.grid_arc();
    let probes =
        [SingularDensity::uniform(grid.clone()), SingularDensity::from_fn(grid, 0.0, |x| 2.0 * x).unwrap(), xi.clone()];
    for p in &probes {
        let drift = apply_transfer(p).unwrap().integral() - p.integral();
        assert!(drift.abs() <= 1e-8, "{drift:e}");
    }
}

#[test]
fn distribution_derivative_matches_density() {
    let (xi, _) = solved();
    let (f, _) = distribution();
    for x in [0.25, 0.5, 0.75, 1.0] {
        let d = f.derivative(x, 1.0 / 256.0).unwrap();
        let target = xi.xi(x).unwrap();
        assert!((d / target - 1.0).abs() < 1e-4, "{x}: {d} vs {target}");
    }
}

#[test]
fn distribution_endpoints_and_monotonicity() {
    let (f, _) = distribution();
    f.check_invariants().unwrap();
    assert_eq!(f.eval(0.0).unwrap(), 0.0);
    assert!((f.eval(1.0).unwrap() - 1.0).abs() <= 1e-14);
    assert!(f.eval(1.5).is_err());
}

#[test]
fn density_is_positive_with_the_predicted_log_coefficient() {
    let (xi, _) = solved();
    assert!(xi.node_values().iter().all(|&v| v > 0.0));
    assert!((xi.alpha() - 1.5 * xi.xi_at_one()).abs() <= 10.0 * TOL);
}

#[test]
fn both_iterations_contract_geometrically() {
    for rec in [&solved().1, &distribution().1] {
        assert!(rec.theta_hat < 1.0, "{}", rec.theta_hat);
        assert!(rec.max_ratio_after(8) < 1.0, "{:?}", rec.deltas);
    }
}

#[test]
fn refining_the_grid_barely_moves_xi_at_one() {
    let fine = GridSpec::default().refined(2);
    let (d, _) = solve_xi(&fine, TOL).unwrap();
    let coarse = solved().0.xi_at_one();
    assert!((d.xi_at_one() / coarse - 1.0).abs() < 1e-6);
    assert_eq!(Grid::new(&fine).unwrap().len(), 2 * Grid::new(&GridSpec::default()).unwrap().len());
}
