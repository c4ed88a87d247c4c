//! A four-site qubit net: spacelike regions get commuting algebras, nested
//! regions nested ones, and entangled sites still violate CHSH.

use std::collections::BTreeSet;
use std::error::Error;

use qcausal::bell::make_phi_plus;
use qcausal::microcausality::{
    check_algebraic_microcausality, check_isotony, net_bell_correlation, LatticeNet,
};
use qcausal::quantum::DensityOperator;
use qcausal::spacetime::{Event, Region};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = LatticeNet::chain(4, 2.0)?;
    let site = |k: usize| Region::new(Event::at(0.0, 2.0 * k as f64), vec![0.1, 0.2]);
    let left = Region::new(Event::at(0.0, 1.0), vec![0.2, 1.3])?;

    for i in 0..4 {
        for j in i + 1..4 {
            let v = check_algebraic_microcausality(&net, &site(i)?, &site(j)?, 1e-12)?;
            println!("sites {i},{j}: {v:?}");
        }
    }
    println!("site 0 inside left: isotony {}", check_isotony(&net, &site(0)?, &left)?);

    let phi = make_phi_plus();
    let state = DensityOperator::product(&[&phi, &phi]);
    let bell = net_bell_correlation(&net, &site(0)?, &site(1)?, &state, 1)?;
    println!("CHSH between sites 0 and 1: {:.6}", bell.value);

    // Claiming site 1 for a region around site 0 breaks microcausality.
    let bad = net.clone().with_support_override(site(0)?, BTreeSet::from([0, 1]));
    let v = check_algebraic_microcausality(&bad, &site(0)?, &site(1)?, 1e-12)?;
    println!("mislabeled net, sites 0,1: {v:?}");
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
