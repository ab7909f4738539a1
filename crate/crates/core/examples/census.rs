//! Exact ensemble sizes against their limiting densities.

use brentlab::ensembles::{ensemble_census, EnsembleId};

fn main() -> brentlab::Result<()> {
    println!("{:>3} {:>9} {:>14} {:>12} {:>12}", "ens", "n", "count", "count/n^2", "limit");
    for n in [1_000, 10_000, 100_000, 1_000_000] {
        for id in EnsembleId::ALL {
            let c = ensemble_census(id, n)?;
            println!("{:>3} {:>9} {:>14} {:>12.8} {:>12.8}", id, n, c.count, c.ratio, id.density_limit());
        }
    }
    Ok(())
}
