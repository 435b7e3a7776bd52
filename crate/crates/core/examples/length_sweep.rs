//! Variance decay of the three estimators across series lengths at perfectly
//! correlated innovations.
//!
//! `cargo run --release -p plcoh --example length_sweep -- 300 500 2000 8000 32000`

use std::time::Instant;

use plcoh::{run_length_sweep, Method, Preset};

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().unwrap()).collect();
    let mut experiment = Preset::Figure1.experiment(false);
    if let Some((&reps, lengths)) = args.split_first() {
        experiment.repetitions = reps;
        if !lengths.is_empty() {
            experiment.lengths = lengths.to_vec();
        }
    }
    let start = Instant::now();
    let sweep = run_length_sweep(&experiment).unwrap();
    for method in Method::ALL {
        for c in sweep.cells_for(method) {
            println!(
                "{method} T={:>6} mean {:+.4} bias {:.4} var {:.3e} mse {:.4}",
                c.length, c.mean, c.bias, c.variance(), c.mse
            );
        }
        if let Some(d) = sweep.decay_for(method) {
            println!("{method} variance decay exponent {:.3}", d.exponent);
        }
    }
    println!("elapsed {:.1?}", start.elapsed());
}
