//! The local bound from the 16 deterministic strategies against the quantum
//! optimum for the EPR pair and for a product state.

use std::error::Error;
use std::f64::consts::PI;

use qcausal::bell::{chsh_value, lhv_chsh_bound, make_phi_plus, make_product, optimize_chsh};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let lhv = lhv_chsh_bound();
    println!(
        "LHV: max |S| = {} over {} strategies, {} reach it",
        lhv.max_abs,
        lhv.strategies,
        lhv.maximizers.len()
    );

    let phi = make_phi_plus();
    let s = chsh_value(&phi, 0.0, PI / 4.0, PI / 8.0, 3.0 * PI / 8.0)?;
    println!("Phi+ at (0, pi/4, pi/8, 3pi/8): S = {:.12}", s.signed);

    let best = optimize_chsh(&phi, 24)?;
    println!("Phi+ optimum |S| = {:.12} at {:?}", best.value.abs, best.angles);
    assert!(best.value.abs > 2.0 * 2f64.sqrt() - 1e-6);

    let product = optimize_chsh(&make_product(0.3, 1.1), 24)?;
    println!("product optimum |S| = {:.12}", product.value.abs);
    assert!(product.value.abs <= 2.0 + 1e-6);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
