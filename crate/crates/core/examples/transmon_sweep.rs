//! Vacuum Rabi splitting of a two-level transmon in a resonator, swept
//! across `omega_r +- 2g`, printed as CSV.

use arwa::model::{transmon_resonator, TransmonResonator};
use arwa::{expectation_magnitude, solve, ArwaConfig};

fn main() -> arwa::Result<()> {
    let g = 0.05;
    let mut p = TransmonResonator {
        omega_r: 1.0,
        qubit_energies: vec![0.0, 1.0],
        couplings: vec![g],
        zeta: 0.002,
        omega_d: 1.0,
        photon_levels: 6,
        dim: None,
        kappa: 0.02,
        qubit_decay: 0.0,
        temperature: 0.0,
    };
    println!("omega_d,transmission,iterations,dashed");
    for k in 0..=40 {
        p.omega_d = 1.0 - 2.0 * g + 0.1 * g * k as f64;
        let sys = transmon_resonator(&p)?;
        let res = solve(&sys.model, &ArwaConfig::default())?;
        let t = expectation_magnitude(&res, &sys.transmission())?;
        println!("{:.5},{t:.10e},{},{}", p.omega_d, res.iteration_count(), res.dashed_count());
    }
    Ok(())
}
