//! Symbols, the sharp product, and quantization.
use kg_reduce::fourier::{LatticeBox, TorusFunction};
use kg_reduce::pseudo::{compose_sharp, SharpMode, Symbol};
use kg_reduce::C64;

fn main() -> kg_reduce::Result<()> {
    let bx = LatticeBox::new(1, 3, 10)?;
    let k_xi = Symbol::default_k_xi(&bx);
    let u = TorusFunction::trig(bx, 0.2, &[1], true, 1, true)?;
    // a(φ,x,ξ) = u(φ,x)·ξ and b(ξ) = ξ
    let a = Symbol::product(&u, k_xi, 1.0, |xi| C64::new(xi, 0.0));
    let b = Symbol::multiplier(bx, k_xi, 1.0, |xi| C64::new(xi, 0.0));

    let ab = compose_sharp(&a, &b, SharpMode::Full)?;
    let prod = a.quantize().compose(&b.quantize())?;
    println!("Op(a#b) vs Op(a)Op(b): {:.3e}", ab.quantize().max_diff_interior(&prod, 1, 6));

    let lead = compose_sharp(&a, &b, SharpMode::Graded(0))?;
    println!("|a#b - ab| = {:.3e}", ab.sub(&lead)?.max_abs());
    println!("symbol norm of a: {:.6}", a.symbol_norm(1.0, 2)?);
    Ok(())
}
