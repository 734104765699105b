//! Equally spaced three-level system with all three transitions driven.
//! With equal drives the two-photon term is the one left out and the
//! rotating-frame result tracks direct integration; tripling it makes the
//! omission visible away from resonance.

use arwa::model::{three_level, ThreeLevelRates};
use arwa::{expectation_magnitude, long_time_average, solve, ArwaConfig, ObservableSpec, OracleConfig, C64};

fn main() -> arwa::Result<()> {
    let rates = ThreeLevelRates {
        gamma_10: 1e-3,
        gamma_20: 0.0,
        gamma_21: 1e-3,
        dephasing: 0.0,
        temperature: 0.0,
    };
    let v = C64::new(4e-3, 0.0);
    for (name, v02) in [("equal drives", v), ("tripled V02", v * 3.0)] {
        println!("{name}");
        println!("{:>8} {:>12} {:>12} {:>8}  dashed", "w_d", "arwa", "oracle", "diff");
        for w in [0.985, 0.995, 0.999, 1.0, 1.001, 1.005, 1.015] {
            let model = three_level([0.0, 1.0, 2.0], v, v02, v, &rates, w)?;
            let obs = ObservableSpec::new("V", model.drive_operator());
            let res = solve(&model, &ArwaConfig::default())?;
            let x = expectation_magnitude(&res, &obs)?;
            let o = long_time_average(&model, &[obs], &OracleConfig::default())?.values[0];
            let dashed: Vec<_> = res.graph.dashed_edges().map(|e| (e.n, e.m)).collect();
            println!("{w:>8.3} {x:>12.5e} {o:>12.5e} {:>8.2e}  {dashed:?}", (x - o).abs());
        }
    }
    Ok(())
}
