//! The three update rules on a badly conditioned quadratic, to compare how
//! they move. Each prints the loss every few steps.
//!
//!     cargo run --example optimizers

use mvpred::fcnn::{OptimizerConfig, OptimizerState};

/// f(w) = 0.5 * (w0^2 + 25 * w1^2)
fn grad(w: &[f64]) -> Vec<f64> {
    vec![w[0], 25.0 * w[1]]
}

fn loss(w: &[f64]) -> f64 {
    0.5 * (w[0] * w[0] + 25.0 * w[1] * w[1])
}

fn main() -> mvpred::Result<()> {
    let configs = [
        ("momentum", OptimizerConfig::momentum(0.01, 0.9)),
        ("rmsprop", OptimizerConfig::rmsprop(0.05, 0.9)),
        ("adam", OptimizerConfig::adam(0.1)),
    ];
    for (name, config) in configs {
        let mut w = vec![3.0, 1.0];
        let mut state = OptimizerState::new(config, w.len());
        print!("{name:>8}:");
        for step in 0..=100 {
            if step % 20 == 0 {
                print!(" {:9.2e}", loss(&w));
            }
            let g = grad(&w);
            state.apply(&mut w, &g)?;
        }
        println!();
    }
    Ok(())
}
