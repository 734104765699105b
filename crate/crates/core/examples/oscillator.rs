//! Driven damped oscillator: the steady-state amplitude against the
//! closed-form Lorentzian `zeta / sqrt(delta^2 + kappa^2/4)`.

use arwa::model::{driven_oscillator, lowering_operator};
use arwa::{expectation_magnitude, solve, ArwaConfig, ObservableSpec};

fn main() -> arwa::Result<()> {
    let (zeta, kappa, levels) = (1e-3, 0.02, 9);
    let a = ObservableSpec::new("a", lowering_operator(levels));
    println!("{:>8} {:>14} {:>14} {:>10} {:>5}", "delta", "|<a>|", "analytic", "rel err", "iter");
    for k in -4..=4 {
        let delta = 0.25 * k as f64 * kappa * 2.0;
        let model = driven_oscillator(1.0, zeta, 1.0 + delta, levels, kappa, 0.0)?;
        let res = solve(&model, &ArwaConfig::default())?;
        let x = expectation_magnitude(&res, &a)?;
        let want = zeta / (delta * delta + kappa * kappa / 4.0).sqrt();
        println!(
            "{delta:>8.4} {x:>14.8e} {want:>14.8e} {:>10.2e} {:>5}",
            (x - want).abs() / want,
            res.iteration_count()
        );
    }
    Ok(())
}
