//! Fixed points of the transfer operator: the density and the limiting
//! distribution function, each with its convergence history.

use brentlab::density::{solve_distribution, solve_xi, write_grid_csv, GridSpec};

fn main() -> brentlab::Result<()> {
    let spec = GridSpec::default();
    let (xi, rec) = solve_xi(&spec, 1e-12)?;
    println!("xi(1)      = {:.16}", xi.xi_at_one());
    println!("alpha      = {:.16} (1.5 xi(1) = {:.16})", xi.alpha(), 1.5 * xi.xi_at_one());
    println!("iterations = {}, contraction ~ {:.3}", rec.iterations, rec.theta_hat);

    let (f, rec_f) = solve_distribution(&spec, 1e-12)?;
    println!("F solved in {} iterations, contraction ~ {:.3}", rec_f.iterations, rec_f.theta_hat);
    println!("\n{:>6} {:>18} {:>18} {:>18}", "x", "F(x)", "F'(x)", "xi(x)");
    for x in [1.0 / 64.0, 0.125, 0.25, 0.5, 0.75, 1.0] {
        println!("{x:>6.4} {:>18.12} {:>18.12} {:>18.12}", f.eval(x)?, f.derivative(x, 1.0 / 256.0)?, xi.xi(x)?);
    }

    if let Some(path) = std::env::args().nth(1) {
        write_grid_csv(std::fs::File::create(&path)?, &f, &xi)?;
        println!("\ngrid written to {path}");
    }
    Ok(())
}
