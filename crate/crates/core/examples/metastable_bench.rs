//! Steady-state solve versus direct integration on a qubit-resonator
//! ladder with one very slow decay channel.

use arwa::bench::{metastable_model, run};
use arwa::{ArwaConfig, OracleConfig};

fn main() -> arwa::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let (model, obs) = metastable_model(3, 5, 1e-6, seed)?;
    let r = run(&model, &obs, &ArwaConfig::default(), &OracleConfig::default(), 1e-3)?;
    println!("D = {}, slowest rate 1e-6", r.dim);
    println!("steady state      {:.3} s in {} iterations", r.arwa_seconds, r.arwa_iterations);
    println!(
        "integration       {:.3} s for t = {:.1e} ({} steps)",
        r.oracle_seconds, r.measured_horizon, r.oracle_steps
    );
    println!(
        "extrapolated      {:.1} s for t = {:.1e}",
        r.extrapolated_oracle_seconds, r.target_horizon
    );
    println!("speedup           {:.0}x", r.speedup);
    Ok(())
}
