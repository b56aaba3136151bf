//! Splitting an operator into a Bony part and a smoothing remainder.
use kg_reduce::bony::{bony_split, dense_max_abs, BonyCouple};
use kg_reduce::fourier::{LatticeBox, TorusFunction};
use kg_reduce::toeplitz::ToeplitzOperator;

fn main() -> kg_reduce::Result<()> {
    let bx = LatticeBox::new(1, 3, 8)?;
    let u = TorusFunction::trig(bx, 1e-3, &[1], true, 2, true)?;
    let a = ToeplitzOperator::multiplication(&u);
    let c = bony_split(&a, 6.0);
    println!("|M| = {:.3e}, |R| = {:.3e}", dense_max_abs(&c.m), dense_max_abs(&c.r));
    println!("couple norm at s* = {}: {:.6}", c.s_star, c.norm(c.s_star)?);

    let p = c.product(&c)?;
    println!("couple norm of the square: {:.6}", p.norm(c.s_star)?);
    let inv = BonyCouple::identity(bx, 6.0).add(&c)?.invert()?;
    println!("Neumann inverse: {} terms, bound {:.6}", inv.terms, inv.bound);
    Ok(())
}
