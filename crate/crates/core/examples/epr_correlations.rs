//! Joint and conditional polarization statistics of the EPR pair, and how
//! far they are from factorizing.

use std::error::Error;
use std::f64::consts::PI;

use qcausal::bell::{correlation, correlation_report, make_phi_plus, quantum_joint};
use qcausal::quantum::{conditional_probability, Given};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let phi = make_phi_plus();

    println!("{:>8} {:>10} {:>10} {:>12}", "b-a", "P(par,par)", "E(a,b)", "P(Y=par|X=par)");
    for k in 0..=8 {
        let b = k as f64 * PI / 16.0;
        let joint = quantum_joint(&phi, 0.0, b)?;
        let cond = conditional_probability(&joint, Given::B(0))?;
        println!(
            "{:>8.4} {:>10.6} {:>10.6} {:>12.6}",
            b,
            joint.get(0, 0),
            correlation(&joint),
            cond[0]
        );
        assert!((cond[0] - b.cos().powi(2)).abs() < 1e-12);
    }

    let report = correlation_report(&phi, &[0.0, PI / 4.0], &[0.0, PI / 8.0])?;
    for row in &report.rows {
        println!(
            "a={:.4} b={:.4}  fact_gap={:.4} oi_gap={:.4} pi_gap={:.1e}",
            row.a, row.b, row.fact_gap, row.oi_gap, row.pi_gap
        );
    }
    let same = &report.rows[0];
    assert!((same.joint[0] + same.joint[3] - 1.0).abs() < 1e-12);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
