// Each cargo example runs to completion.

#[allow(dead_code)]
#[path = "../examples/epr_correlations.rs"]
mod epr_correlations;

#[test]
fn epr_correlations_runs() {
    epr_correlations::run_example().unwrap();
}

#[allow(dead_code)]
#[path = "../examples/chsh_bounds.rs"]
mod chsh_bounds;

#[test]
fn chsh_bounds_runs() {
    chsh_bounds::run_example().unwrap();
}

#[allow(dead_code)]
#[path = "../examples/no_signalling.rs"]
mod no_signalling;

#[test]
fn no_signalling_runs() {
    no_signalling::run_example().unwrap();
}

#[allow(dead_code)]
#[path = "../examples/lightcone_assignment.rs"]
mod lightcone_assignment;

#[test]
fn lightcone_assignment_runs() {
    lightcone_assignment::run_example().unwrap();
}

#[allow(dead_code)]
#[path = "../examples/order_consistency.rs"]
mod order_consistency;

#[test]
fn order_consistency_runs() {
    order_consistency::run_example().unwrap();
}

#[allow(dead_code)]
#[path = "../examples/interventions.rs"]
mod interventions;

#[test]
fn interventions_runs() {
    interventions::run_example().unwrap();
}

#[allow(dead_code)]
#[path = "../examples/lattice_net.rs"]
mod lattice_net;

#[test]
fn lattice_net_runs() {
    lattice_net::run_example().unwrap();
}

#[allow(dead_code)]
#[path = "../examples/run_config.rs"]
mod run_config;

#[test]
fn run_config_runs() {
    run_config::run_example().unwrap();
}
