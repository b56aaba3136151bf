//! Spectral agreement under box refinement.

use std::f64::consts::PI;

use kg_reduce::evolution::{brute_force_spectrum, compare_spectrum, DIMENSION_CAP};
use kg_reduce::fourier::LatticeBox;
use kg_reduce::pipeline::{run_pipeline, KGCoefficients, PipelineConfig};

fn mismatch(k_phi: usize, k_x: usize) -> f64 {
    let bx = LatticeBox::new(1, k_phi, k_x).unwrap();
    let om = [PI / 10.0];
    let c = KGCoefficients::reference(bx, 1e-3, 1.0).unwrap();
    let st = run_pipeline(&c, &om, PipelineConfig::default()).unwrap();
    let ev = brute_force_spectrum(&st.t0, &om, DIMENSION_CAP).unwrap();
    compare_spectrum(&ev, &st.normal, &om, bx, 4, 6).max_relative_mismatch
}

#[test]
fn agreement_does_not_degrade_on_a_larger_box() {
    let coarse = mismatch(8, 12);
    let fine = mismatch(12, 16);
    eprintln!("mismatch (8,12) = {coarse:e}, (12,16) = {fine:e}");
    // Both sit at rounding level; allow for its noise.
    assert!(fine <= coarse.max(1e-12), "{fine} > {coarse}");
}
