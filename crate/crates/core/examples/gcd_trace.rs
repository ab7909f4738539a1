//! Steps of the binary algorithm on a few pairs, under the built-in costs
//! and a cost table read from text.

use brentlab::gcd::{binary_gcd_trace, fraction_orbit, CostFunction};

const TABLE: &str = "\
#cost-table C=2 extend=linear
1 1 2.0
2 1 1.0
";

fn main() -> brentlab::Result<()> {
    let costs = [
        CostFunction::steps(),
        CostFunction::shifts(),
        CostFunction::exchanges(),
        CostFunction::from_table_text("weighted", TABLE)?,
    ];
    for (u, v) in [(91, 35), (3, 5), (1_000_001, 999_999_937), (48, 180)] {
        let t = binary_gcd_trace(u, v)?;
        println!("gcd({u}, {v}) = {}  odd pair {}", t.gcd(), t.pair());
        println!("  trace {t}");
        for c in &costs {
            println!("  {:<9} {}", c.name(), t.cost(c)?);
        }
    }

    // the same run read off the fraction u/v
    println!("T-map exponents for 35/91: {:?}", fraction_orbit(35, 91)?);
    Ok(())
}
