//! Two spacelike measurements on an EPR pair and the states assigned along
//! three world-lines: each agent updates only on events in its past cone.

use std::error::Error;
use std::f64::consts::PI;

use qcausal::agents::{assign_state, polarization_event, probability_at, OrderPolicy, Scenario};
use qcausal::bell::make_phi_plus;
use qcausal::quantum::MeasurementModel;
use qcausal::quantum::Target;
use qcausal::spacetime::{Event, Region, WorldLine};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let a = polarization_event("A", Event::at(2.0, -2.0), 0.0, 0, 0)?;
    let b = polarization_event("B", Event::at(2.0, 2.0), PI / 8.0, 1, 0)?;
    let line = |x0: f64, x1: f64| {
        WorldLine::new(vec![Event::at(1.0, x0), Event::at(3.0, x0), Event::at(6.5, x1)])
    };
    let scenario = Scenario::new(
        make_phi_plus(),
        Region::square(0.0, 0.0, 0.5)?,
        vec![a, b],
        vec![
            ("alice".into(), line(-2.0, -1.0)?),
            ("bob".into(), line(2.0, 1.0)?),
            ("charlie".into(), line(0.0, 0.0)?),
        ],
    )?;

    // Bob's photon, measured along his own axis.
    let probe = MeasurementModel::polarization(PI / 8.0, Target::Subsystem(1));
    for (name, worldline) in scenario.agents() {
        for p in worldline.points() {
            let trace = assign_state(&scenario, p, OrderPolicy::Lexicographic)?;
            let pb = probability_at(&scenario, p, &probe, 0)?;
            println!(
                "{name:>8} at t={:<4} x={:<5} applied {:<10} P(B=par) = {pb:.6}",
                p.t,
                p.x[0],
                format!("{:?}", trace.applied)
            );
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
