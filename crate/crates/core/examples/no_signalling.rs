//! Marginals do not depend on the distant setting, for the EPR pair and for
//! random two-qubit states; a deliberately wrong marginal rule is caught.

use std::error::Error;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcausal::bell::{make_phi_plus, verify_no_signalling, verify_no_signalling_with, MarginalRule};
use qcausal::sampling::random_state;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let grid: Vec<f64> = (0..8).map(|k| k as f64 * PI / 8.0).collect();
    let phi = make_phi_plus();
    let report = verify_no_signalling(&phi, &grid, &grid, 1e-12)?;
    println!("Phi+: passed={} alice_gap={:.1e} bob_gap={:.1e}", report.passed, report.alice_gap, report.bob_gap);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let rho = random_state(&mut rng, vec![2, 2]);
        let r = verify_no_signalling(&rho, &grid, &grid, 1e-12)?;
        worst = worst.max(r.alice_gap).max(r.bob_gap);
    }
    println!("20 random states: worst gap {worst:.1e}");

    let control = verify_no_signalling_with(&phi, &grid, &grid, 1e-12, MarginalRule::ConditionOnPartnerPar)?;
    println!("conditioning on the partner's outcome: passed={} gap={:.3}", control.passed, control.alice_gap);
    assert!(report.passed && !control.passed);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
