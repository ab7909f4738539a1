//! Mean-cost constants and every identity between them, from one solve.

use brentlab::constants::{constants_report, mu_of_cost, stationarity_check, StationarityWeight};
use brentlab::density::{solve_distribution, solve_xi, GridSpec};
use brentlab::gcd::CostFunction;

fn main() -> brentlab::Result<()> {
    let spec = GridSpec::default();
    let (d, _) = solve_xi(&spec, 1e-12)?;
    let (f, _) = solve_distribution(&spec, 1e-12)?;
    let r = constants_report(&d, &f)?;

    println!("mu_S {:.12}  mu_T {:.12}  mu_E {:.12}", r.mu_s, r.mu_t, r.mu_e);
    println!("lambda_s {:.12} {:.12} {:.12} {:.12}", r.lambda_s_v1, r.lambda_s_v2, r.lambda_s_v3, r.lambda_s_from_xi);
    println!("1/beta {:.12}  1/beta~ {:.12}  knuth {:.12}", 1.0 / r.beta, 1.0 / r.beta_tilde, r.knuth);
    for res in &r.residuals {
        println!("  {:<36} {:+.3e}  {}", res.name, res.value, if res.passed { "ok" } else { "FAIL" });
    }

    // any regular cost, here the steps that shift by exactly one bit
    let one_bit = CostFunction::new("k=1", 1.0, |_, k| if k == 1 { 1.0 } else { 0.0 })?;
    println!("\nmu(k=1) = {:.12}", mu_of_cost(&d, &one_bit)?.value);
    for w in StationarityWeight::ALL {
        println!("stationarity {w}: {:+.3e}", stationarity_check(&d, w)?.value);
    }
    Ok(())
}
