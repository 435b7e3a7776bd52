//! Runs one Monte Carlo cell and prints its summary.
//!
//! `cargo run --release -p plcoh --example quick_cell -- dmca 21 5000 0.9 200`

use std::time::Instant;

use plcoh::{run_cell, ExperimentConfig, Method, MethodConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method: Method = args.first().map(|s| s.parse().unwrap()).unwrap_or(Method::Dmca);
    let option: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(21);
    let length: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(5000);
    let rho: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.9);
    let reps: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(100);

    let config = match method {
        Method::Dcca => MethodConfig::dcca(option),
        Method::Dmca => MethodConfig::dmca(option),
        Method::Hxa => MethodConfig::hxa_jackknife(option),
    };
    let mut experiment = ExperimentConfig::new(vec![config]);
    experiment.repetitions = reps;
    let start = Instant::now();
    let cell = run_cell(&experiment, length, rho, &config).unwrap();
    println!(
        "{method} {}={option} T={length} rho={rho} R={reps}: bias {:.4} sd {:.4} mse {:.4} ({} failures) in {:.1?}",
        config.option_name(),
        cell.bias,
        cell.sd,
        cell.mse,
        cell.failures,
        start.elapsed()
    );
}
