//! Pairs needing exactly n steps, rebuilt from compositions of the inverse
//! branches.

use brentlab::ensembles::{theta_enumerate, verify_theta};
use brentlab::gcd::{binary_gcd_trace, CostFunction};

fn main() -> brentlab::Result<()> {
    let e = CostFunction::exchanges();
    for entry in theta_enumerate(2, 15, &e)? {
        let steps = binary_gcd_trace(entry.u, entry.v)?.to_string();
        println!("{:>2}/{:<2} word {:<10} exchanges {}  trace {steps}", entry.u, entry.v, entry.word, entry.cost);
    }
    for n in 1..=6 {
        let r = verify_theta(n, 500, &CostFunction::shifts())?;
        println!("n <= {n}: {} ({} mismatches)", r.status, r.mismatches.len());
    }
    Ok(())
}
