//! Multiplication operators as Toeplitz-in-time matrices.
use kg_reduce::fourier::{LatticeBox, TorusFunction};
use kg_reduce::toeplitz::ToeplitzOperator;

fn main() -> kg_reduce::Result<()> {
    let bx = LatticeBox::new(1, 4, 8)?;
    let u = TorusFunction::trig(bx, 0.1, &[1], true, 1, true)?;
    let v = TorusFunction::trig(bx, 0.1, &[0], true, 2, false)?;
    let mu = ToeplitzOperator::multiplication(&u);
    let mv = ToeplitzOperator::multiplication(&v);

    // Composing multiplications agrees with multiplying the functions
    // on modes far from the truncation edge.
    let lhs = mu.compose(&mv)?;
    let rhs = ToeplitzOperator::multiplication(&u.multiply(&v)?);
    println!("interior defect = {:.3e}", lhs.max_diff_interior(&rhs, 2, 4));

    let est = mu.op_norm(1.0, 1.0);
    println!("operator norm estimate {:.6} after {} iterations (converged {})", est.value, est.iterations, est.converged);
    println!("decay norm at s=1: {:.6}", mu.decay_norm(1.0));
    Ok(())
}
