//! Truncated Dirichlet series over the odd ensembles next to their zeta
//! closed forms.

use brentlab::dirichlet::{pole_check, series_report, verify_convolution, verify_numthy, zeta, SeriesQuery};
use brentlab::ensembles::EnsembleId;
use brentlab::gcd::CostFunction;

fn main() -> brentlab::Result<()> {
    println!("zeta(3) = {:.15}", zeta(3.0)?);
    for (s, v_max) in [(1.25, 10_000), (1.5, 1_000_000), (2.0, 10_000)] {
        let r = verify_numthy(s, v_max)?;
        println!(
            "s={s} v_max={v_max}: odd residual {:.2e} (tail {:.2e}), odd coprime residual {:.2e}",
            r.odd.residual, r.odd.tail_bound, r.odd_coprime.residual
        );
    }

    let steps = CostFunction::steps();
    for p in [0, 1] {
        let c = verify_convolution(1.5, 20_000, p, &steps)?;
        println!("convolution p={p}: residual {:.2e} <= {:.2e} {}", c.residual, c.tail_bound, c.passed);
    }

    let q = SeriesQuery { ensemble: EnsembleId::OddCoprime, s: 2.0, p: 1, cost: CostFunction::shifts(), v_max: 5_000 };
    println!("{}", serde_json::to_string(&series_report(&q)?)?);

    for s in [1.05, 1.02, 1.01] {
        let r = pole_check(s)?;
        println!("(s-1) sum at s={s}: {:.6} (closed form {:.6}, limit 0.125)", r.scaled, r.closed_form_scaled);
    }
    Ok(())
}
