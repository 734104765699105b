//! Fluxonium-resonator model from user-supplied qubit energies and charge
//! matrix elements. Without selection rules the drive graph has cycles that
//! cannot all be satisfied, so some terms end up dashed.

use arwa::model::{fluxonium_resonator, CouplingForm, FluxoniumResonator};
use arwa::{expectation_magnitude, solve, ArwaConfig, C64};
use nalgebra::DMatrix;

fn main() -> arwa::Result<()> {
    let c = |re: f64, im: f64| C64::new(re, im);
    #[rustfmt::skip]
    let charge = DMatrix::from_row_slice(4, 4, &[
        c(0.0, 0.0),   c(0.62, 0.0),   c(0.0, 0.21),  c(0.35, 0.0),
        c(0.62, 0.0),  c(0.0, 0.0),    c(0.48, 0.0),  c(0.0, -0.17),
        c(0.0, -0.21), c(0.48, 0.0),   c(0.0, 0.0),   c(0.71, 0.0),
        c(0.35, 0.0),  c(0.0, 0.17),   c(0.71, 0.0),  c(0.0, 0.0),
    ]);
    let mut p = FluxoniumResonator {
        omega_r: 1.0,
        qubit_energies: vec![0.0, 0.13, 1.21, 1.64],
        charge_matrix: charge,
        g: 0.03,
        zeta: 0.002,
        omega_d: 1.0,
        photon_levels: 4,
        dim: None,
        kappa: 0.01,
        qubit_decay: 1e-3,
        temperature: 0.0,
        coupling: CouplingForm::Full,
    };
    println!("{:>8} {:>12} {:>5} {:>6}", "w_d", "|<a>|", "iter", "dashed");
    for k in 0..=10 {
        p.omega_d = 0.97 + 0.006 * k as f64;
        let sys = fluxonium_resonator(&p)?;
        let res = solve(&sys.model, &ArwaConfig::default())?;
        let t = expectation_magnitude(&res, &sys.transmission())?;
        println!(
            "{:>8.4} {t:>12.5e} {:>5} {:>6}",
            p.omega_d,
            res.iteration_count(),
            res.dashed_count()
        );
    }
    Ok(())
}
