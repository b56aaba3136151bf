//! Inverting x -> x + α(φ,x) and checking the composition operators.
use kg_reduce::diffeo::{composition_pair, invert_diffeo};
use kg_reduce::fourier::{LatticeBox, TorusFunction};
use kg_reduce::toeplitz::ToeplitzOperator;
use kg_reduce::transport::{principal_defect, ClosedSymbol};

fn main() -> kg_reduce::Result<()> {
    let bx = LatticeBox::new(1, 2, 16)?;
    let alpha = TorusFunction::trig(bx, 1e-2, &[0], true, 1, false)?;
    let d = invert_diffeo(&alpha)?;
    println!("Newton residual of the inverse: {:.3e}", d.newton_residual);

    let (c, ci) = composition_pair(&d)?;
    let id = ToeplitzOperator::identity(bx);
    println!("|C C^-1 - I| on the interior: {:.3e}", c.compose(&ci)?.max_diff_interior(&id, 0, 10));

    // Conjugating the Fourier multiplier ξ: the principal symbol is transported exactly.
    let xi = ClosedSymbol::multiplier(1.0, |x| x);
    let p = principal_defect(&xi, &d, 4..=10)?;
    println!("principal defect: max ratio {:.3e}, slope {:?}", p.max_ratio, p.slope);
    Ok(())
}
