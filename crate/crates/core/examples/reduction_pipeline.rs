//! Full reduction of the reference operator on a small box.
use std::f64::consts::PI;

use kg_reduce::fourier::LatticeBox;
use kg_reduce::pipeline::{assemble_conjugator, run_pipeline, KGCoefficients, PipelineConfig};

fn main() -> kg_reduce::Result<()> {
    let bx = LatticeBox::new(1, 6, 8)?;
    let omega = [PI / 10.0];
    let c = KGCoefficients::reference(bx, 1e-3, 1.0)?;
    let st = run_pipeline(&c, &omega, PipelineConfig::default())?;

    for r in &st.records {
        println!("{:<32} perturbation {:.3e}  structure {:.1e}", r.label, r.perturbation_max, r.structure.max_violation());
    }
    if let Some(k) = &st.kam {
        let e: Vec<String> = k.eps_sequence.iter().map(|v| format!("{v:.2e}")).collect();
        println!("eps sequence: [{}]", e.join(", "));
    }
    for e in st.normal.eigenvalues().iter().take(4) {
        println!("j={} lambda+={:.12} lambda-={:?}", e.j, e.plus, e.minus);
    }
    let cj = assemble_conjugator(&st)?;
    println!("conjugation residual {:.3e}, |FF^-1 - I| {:.3e}", cj.residual, cj.inverse_defect);
    Ok(())
}
