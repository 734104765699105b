//! Direct integration of a driven, damped qubit. Prints the time-averaged
//! `|<V>|` next to the steady-state value and writes the trajectory to
//! `qubit_trajectory.csv` in the system temp directory.

use arwa::model::{with_detailed_balance, Channel};
use arwa::oracle::{long_time_average, write_trajectory_csv};
use arwa::{expectation_magnitude, solve, ArwaConfig, LindbladModel, ObservableSpec, OracleConfig, C64};

fn main() -> arwa::Result<()> {
    let e = vec![0.0, 1.0];
    let channels = with_detailed_balance(vec![Channel::transition(&e, 0, 1, 0.05)], f64::INFINITY);
    let model = LindbladModel::new(e, [(0, 1, C64::new(0.01, 0.0))], channels, 0.0, 1.02)?;
    let obs = ObservableSpec::new("V", model.drive_operator());

    let avg = long_time_average(&model, std::slice::from_ref(&obs), &OracleConfig::default())?;
    let res = solve(&model, &ArwaConfig::default())?;
    println!("transient skipped  {:.1}", avg.transient);
    println!("window             {:.1}", avg.window);
    println!("steps (rejected)   {} ({})", avg.trajectory.steps, avg.trajectory.rejected);
    println!("oracle  |<V>|      {:.10e}", avg.values[0]);
    println!("steady  |<V>|      {:.10e}", expectation_magnitude(&res, &obs)?);

    let path = std::env::temp_dir().join("qubit_trajectory.csv");
    let f = std::fs::File::create(&path)?;
    write_trajectory_csv(&avg.trajectory, std::io::BufWriter::new(f))?;
    println!("trajectory         {}", path.display());
    Ok(())
}
