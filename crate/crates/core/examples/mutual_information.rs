//! Estimated against closed-form information of complex Gaussian pairs
//! whose real and imaginary parts each have correlation ρ.

use skg::security::{estimate_mi, mi_gaussian, EstimatorConfig, Samples};
use skg::signal::draw_cscg_vector;
use skg::Rng;

fn main() -> skg::Result<()> {
    let mut rng = Rng::seeded(5);
    let n = 20_000;
    let est = EstimatorConfig::default();
    println!("rho   closed form  estimate");
    for rho in [0.3, 0.5, 0.8, 0.95] {
        let a = draw_cscg_vector(&mut rng, 0.5, n);
        let w = draw_cscg_vector(&mut rng, 0.5, n);
        let b = a.zip_with(&w, |a, w| a * rho + w * (1.0 - rho * rho).sqrt());
        let m = estimate_mi(
            &Samples::from_complex_columns(&[a.as_slice()])?,
            &Samples::from_complex_columns(&[b.as_slice()])?,
            &est,
        )?;
        println!("{rho:<5} {:>11.4}  {:>8.4}", mi_gaussian(rho)?, m.bits);
    }
    Ok(())
}
