//! Conditioning on one EPR outcome fixes the other; intervening on it does
//! not. A local hidden-variable model shows no such gap.

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcausal::bell::{make_phi_plus, make_product, LhvModel};
use qcausal::causal::{
    build_model, condition, intervene, preparation_intervention, stability_report, CausalModel,
    InterventionSpec, Variable,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let model = build_model(&make_phi_plus(), 0.0, 0.0)?;
    let seen = condition(&model, Variable::BobOutcome, 0)?.probability(Variable::AliceOutcome, 0);
    let forced = intervene(&model, InterventionSpec::new(Variable::BobOutcome, 0))?
        .probability(Variable::AliceOutcome, 0);
    println!("P(Y=par | X=par) = {seen:.6}, P(Y=par | do X=par) = {forced:.6}");
    println!("quantum model: {}", stability_report(&model, 1e-12)?.verdict());

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lhv = LhvModel::random(&mut rng, 4, vec![0.0, 0.8], vec![0.3, 1.2]);
    let lhv_model = CausalModel::from_lhv(&lhv);
    println!("random LHV model: {}", stability_report(&lhv_model, 1e-12)?.verdict());

    let two = CausalModel::quantum(
        vec![
            ("phi_plus".into(), make_phi_plus()),
            ("product".into(), make_product(0.0, std::f64::consts::FRAC_PI_2)),
        ],
        vec![0.0],
        vec![0.0],
    )?;
    let cmp = preparation_intervention(&two, 0, 1, 0, 0, 1e-12)?;
    println!(
        "do(Lambda = {}) -> do(Lambda = {}): E {:.3} -> {:.3}",
        cmp.from, cmp.to, cmp.correlation_from, cmp.correlation_to
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
