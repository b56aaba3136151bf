//! Membership in the non-resonant set and the measure of its complement.
use kg_reduce::cantor::{gamma_sweep, in_cantor, single_set_estimate, EigenSource, FrequencyWindow, Sampler};

fn main() -> kg_reduce::Result<()> {
    let eigen = EigenSource::Unperturbed { c_frak: 0.0, mass: 1.0 };
    let w = FrequencyWindow::new(1, 0.01, 7.0, 8, 8, eigen)?;
    for omega in [0.1 * std::f64::consts::PI, 0.5] {
        let v = in_cantor(&[omega], &w)?;
        println!("omega={omega:.6}: in set = {}, witness {:?}", v.ok, v.witness);
    }

    let sampler = Sampler::MonteCarlo { n: 20_000, seed: 1 };
    let sweep = gamma_sweep(&w, &[0.04, 0.02, 0.01], sampler)?;
    for e in &sweep.estimates {
        println!("gamma={:<5} excluded {:.4} ± {:.4}", e.gamma, e.excluded_fraction, e.sigma);
    }
    println!("log-log slope {:?}", sweep.slope);

    let one = single_set_estimate(&[3], 0.01, Sampler::Halton { n: 20_000 })?;
    println!("single set l={:?}: estimate {:.5}, exact {:.5}", one.l, one.estimate, one.exact);
    Ok(())
}
