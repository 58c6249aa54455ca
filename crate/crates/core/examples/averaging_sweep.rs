//! ε sweep of the distance-power(β = −1) + γ-linear(0.5) rule set against
//! its averaged ODE.
//!
//! ```text
//! cargo run --release --example averaging_sweep -- [out_dir] [M] [eps,eps,...]
//! ```

use stargrowth::experiments::{averaging_sweep, write_sweep, GridSpec, SweepConfig};
use stargrowth::ode::Estimator;
use stargrowth::process::Clock;
use stargrowth::rules::{HittingRule, RuleConfig, TransportRule};
use stargrowth::shapes::ShapeSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args.first().cloned().unwrap_or_else(|| "sweep_out".into());
    let m: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(16384);
    let epsilons: Vec<f64> = match args.get(2) {
        Some(s) => s.split(',').map(str::parse).collect::<Result<_, _>>()?,
        None => vec![1e-2, 1e-3, 1e-4],
    };

    let cfg = SweepConfig {
        rules: RuleConfig::new(
            HittingRule::DistancePower { beta: -1.0 },
            TransportRule::GammaLinear { gamma: 0.5 },
        ),
        r0: ShapeSpec::Fourier {
            a0: 1.0,
            cos: vec![0.0, 0.0, 0.2],
            sin: vec![],
        },
        x0: None,
        epsilons,
        seeds: vec![1, 2, 3, 4, 5],
        horizon: 1.0,
        grid: GridSpec::new(2, m),
        samples: 20,
        estimator: Estimator::Stationary { nodes: 512 },
        dt: None,
        clock: Clock::Exponential,
        expect: None,
    };
    let start = std::time::Instant::now();
    let res = averaging_sweep(&cfg)?;
    std::fs::create_dir_all(&out)?;
    write_sweep(std::path::Path::new(&out), &res)?;
    for s in &res.summary.per_epsilon {
        println!(
            "eps={:.0e}  median sup-L2={:.4e}  IQR=[{:.4e}, {:.4e}]  triggered={}",
            s.epsilon, s.stats.median, s.stats.q1, s.stats.q3, s.triggered_runs
        );
    }
    for t in &res.summary.sign_tests {
        println!(
            "{:.0e} -> {:.0e}: {}/{} seeds decrease, p={:.4}",
            t.from, t.to, t.decreases, t.pairs, t.p_value
        );
    }
    println!(
        "medians decreasing: {}  ({:.1?})",
        res.summary.medians_decreasing,
        start.elapsed()
    );
    Ok(())
}
