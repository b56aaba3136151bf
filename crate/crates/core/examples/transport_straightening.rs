//! Removing the x-dependence of a first-order coefficient.
use kg_reduce::fourier::{LatticeBox, TorusFunction};
use kg_reduce::transport::straighten_first_order;

fn main() -> kg_reduce::Result<()> {
    let bx = LatticeBox::new(1, 6, 10)?;
    let omega = [std::f64::consts::PI / 10.0];
    // a = 1e-3 cos φ cos x
    let a = TorusFunction::trig(bx, 1e-3, &[1], true, 1, true)?;
    let s = straighten_first_order(&a, &omega, 0.01, 7.0, 6.0)?;
    let t = &s.straightening;
    println!("constant coefficient 1 + {:.6e}", t.a_frak);
    println!("transport residuals {:.3e} / {:.3e} after {} iterations", t.residual, t.residual_minus, t.iterations);
    println!("leading x-dependence left: {:.3e}", s.leading_defect);
    println!("remainder norm: {:.3e}", s.remainder_norm);
    Ok(())
}
