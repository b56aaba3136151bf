//! Time evolution of the original and reduced equations.
use std::f64::consts::PI;

use kg_reduce::evolution::{conjugacy_check, evolve_original, Integrator, EvolutionConfig};
use kg_reduce::fourier::LatticeBox;
use kg_reduce::pipeline::{run_pipeline, KGCoefficients, PipelineConfig};

fn main() -> kg_reduce::Result<()> {
    let bx = LatticeBox::new(1, 6, 8)?;
    let omega = [PI / 10.0];
    let c = KGCoefficients::reference(bx, 1e-3, 1.0)?;
    let st = run_pipeline(&c, &omega, PipelineConfig::default())?;

    let mut cfg = EvolutionConfig::with_default_data(bx.k_x, 50.0, 1e-2);
    cfg.s_report = vec![2.0, 3.0];
    let cj = conjugacy_check(&st, &cfg)?;
    println!("sup norm ratios {:.4?}", cj.trajectory.sup_ratios());
    println!("max distance to the reduced flow {:.3e}", cj.max_error);

    cfg.integrator = Integrator::Rk4;
    cfg.dt = 2e-3;
    let tr = evolve_original(&c, &omega, &cfg)?;
    println!("plain RK4, {} steps: sup ratios {:.4?}", tr.steps, tr.sup_ratios());
    Ok(())
}
