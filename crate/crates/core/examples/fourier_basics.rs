//! Truncated Fourier series on the torus: construction, products, norms.
use kg_reduce::fourier::{LatticeBox, TorusFunction};
use kg_reduce::C64;

fn main() -> kg_reduce::Result<()> {
    let bx = LatticeBox::new(1, 4, 8)?;
    // cos φ cos 2x and cos φ sin x
    let a = TorusFunction::trig(bx, 1.0, &[1], true, 2, true)?;
    let b = TorusFunction::trig(bx, 1.0, &[1], true, 1, false)?;
    let ab = a.multiply(&b)?;
    println!("mean of a*b = {:.3e}", ab.mean().re);
    for s in [0.0, 1.0, 2.0] {
        println!("H^{s} norm of a = {:.6}", a.sobolev_norm(s));
    }
    println!("symmetry of a: {:?}", a.symmetry_check());
    let shifted = a.add(&TorusFunction::mode(bx, &[0], 0, C64::new(0.5, 0.0))?)?;
    println!("value at (φ,x)=(0,0): {:.6}", shifted.eval(&[0.0], 0.0).re);
    println!("{} nonzero records", shifted.to_records().len());
    Ok(())
}
