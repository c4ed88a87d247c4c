//! Applying spacelike-separated updates in either order: commuting
//! operators agree, non-commuting ones on one photon disagree, and
//! anticommuting single-outcome unitaries agree despite failing to commute.

use std::error::Error;
use std::f64::consts::PI;

use qcausal::agents::{charlie_consistency, polarization_event, MeasurementEvent, Scenario};
use qcausal::bell::make_phi_plus;
use qcausal::linalg::ComplexMatrix;
use qcausal::microcausality::check_strong_microcausality;
use qcausal::quantum::{DensityOperator, MeasurementModel, Target};
use qcausal::spacetime::{Event, Region};

fn report(name: &str, scenario: &Scenario) -> Result<(), Box<dyn Error>> {
    let charlie = Event::at(5.0, 0.0);
    let check = charlie_consistency(scenario, &charlie, 1e-10)?;
    let strong = check_strong_microcausality(scenario, 1e-10)?;
    println!(
        "{name:<14} consistent={:<5} distance={:.3e} commute={} anticommuting={}",
        check.consistent,
        check.distance,
        strong.holds,
        !strong.holds && strong.all_violations_anticommute()
    );
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let prep = Region::square(0.0, 0.0, 0.5)?;
    let left = Event::at(2.0, -2.0);
    let right = Event::at(2.0, 2.0);

    let commuting = Scenario::new(
        make_phi_plus(),
        prep.clone(),
        vec![
            polarization_event("A", left.clone(), 0.0, 0, 0)?,
            polarization_event("B", right.clone(), PI / 8.0, 1, 0)?,
        ],
        vec![],
    )?;
    report("two photons", &commuting)?;

    let h = DensityOperator::pure(&qcausal::quantum::polarization_ket(0.0), vec![2])?;
    let noncommuting = Scenario::new(
        h.clone(),
        prep.clone(),
        vec![
            polarization_event("A", left.clone(), PI / 4.0, 0, 0)?,
            polarization_event("B", right.clone(), PI / 8.0, 0, 0)?,
        ],
        vec![],
    )?;
    report("one photon", &noncommuting)?;

    let unitary = |label: &str, m: ComplexMatrix, at: Event| -> Result<MeasurementEvent, Box<dyn Error>> {
        let model = MeasurementModel::new(label, vec![("u".into(), m)], Target::Subsystem(0))?;
        Ok(MeasurementEvent::new(label, at, model, 0)?)
    };
    let anticommuting = Scenario::new(
        h,
        prep,
        vec![
            unitary("X", ComplexMatrix::pauli_x(), left)?,
            unitary("Z", ComplexMatrix::pauli_z(), right)?,
        ],
        vec![],
    )?;
    report("anticommuting", &anticommuting)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
