//! Exhaustive mean costs over all four ensembles and their growth per ln n.
//!
//! `cargo run --release --example mean_cost_slopes -- 14` sweeps up to 2^14.

use std::f64::consts::PI;

use brentlab::ensembles::{geometric_ladder, mean_cost_sampled, sweep, EnsembleId};
use brentlab::gcd::CostFunction;
use brentlab::report::XI_ONE_REFERENCE;

fn main() -> brentlab::Result<()> {
    let hi: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(13);
    let costs = [CostFunction::steps(), CostFunction::shifts(), CostFunction::exchanges()];
    let ladder = geometric_ladder(8, hi);
    let result = sweep(&EnsembleId::ALL, &costs, &ladder, 0)?;

    for row in result.rows().iter().filter(|r| r.n == *ladder.last().unwrap()) {
        println!(
            "ens {} n {} cost {} mean {:.4} mean/ln n {:.4}",
            row.ensemble, row.n, row.cost, row.mean, row.mean_over_logn
        );
    }

    let mu = 4.0 / (PI * PI * XI_ONE_REFERENCE);
    println!("\nslopes (S target {mu:.5}, T target {:.5})", 2.0 * mu);
    for (e, id) in EnsembleId::ALL.iter().enumerate() {
        let s: Vec<String> = (0..costs.len())
            .map(|c| result.slope(e, c).map(|f| format!("{} {:.4}", costs[c].name(), f.slope)))
            .collect::<Result<_, _>>()?;
        println!("  ensemble {id}: {}", s.join("  "));
    }

    // far beyond exhaustive reach
    let s = mean_cost_sampled(EnsembleId::Odd, 1 << 40, &costs[0], 200_000, 42)?;
    println!(
        "\nsampled n = 2^40: mean S {:.3} +- {:.3}, per ln n {:.4}",
        s.stats.mean(),
        s.std_error,
        s.stats.mean_over_log()
    );
    Ok(())
}
