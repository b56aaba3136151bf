//! Dense eigenvalues of the truncated Floquet operator against the reduced spectrum.
use std::f64::consts::PI;

use kg_reduce::evolution::{brute_force_spectrum, compare_spectrum, DIMENSION_CAP};
use kg_reduce::fourier::LatticeBox;
use kg_reduce::pipeline::{run_pipeline, KGCoefficients, PipelineConfig};

fn main() -> kg_reduce::Result<()> {
    let bx = LatticeBox::new(1, 6, 8)?;
    let omega = [PI / 10.0];
    let c = KGCoefficients::reference(bx, 1e-3, 1.0)?;
    let st = run_pipeline(&c, &omega, PipelineConfig::default())?;

    let ev = brute_force_spectrum(&st.t0, &omega, DIMENSION_CAP)?;
    println!("{} eigenvalues", ev.len());
    let cmp = compare_spectrum(&ev, &st.normal, &omega, bx, 3, 4);
    println!(
        "matched {} interior modes, max relative mismatch {:.3e}, pairing defect {:.3e}",
        cmp.matched, cmp.max_relative_mismatch, cmp.pairing_defect
    );
    Ok(())
}
