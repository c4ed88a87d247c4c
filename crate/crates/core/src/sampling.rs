//! Seeded random states, measurement models and scenarios, and Born-rule
//! sampling of recorded outcomes.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::agents::{MeasurementEvent, Scenario};
use crate::error::Result;
use crate::linalg::{inverse_sqrt, ComplexMatrix, ComplexVector, C64};
use crate::quantum::{
    apply_operator, outcome_distribution, DensityOperator, MeasurementModel, Target,
};
use crate::spacetime::{is_spacelike, CausalOrder, Event, Region};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::new(rows, cols, (0..rows * cols).map(|_| gaussian(rng)).collect())
        .expect("finite entries")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dims: Vec<usize>) -> DensityOperator {
    let total = dims.iter().product();
    let ket = ComplexVector::new((0..total).map(|_| gaussian(rng)).collect()).expect("finite");
    DensityOperator::from_trusted(ket.normalized().projector(), dims)
}

/// Full-rank mixed state `GG† / Tr(GG†)` from a square Ginibre matrix.
pub fn random_mixed_state<R: Rng + ?Sized>(rng: &mut R, dims: Vec<usize>) -> DensityOperator {
    let total = dims.iter().product();
    let g = ginibre(rng, total, total);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let m = m.scale_real(1.0 / tr);
    DensityOperator::from_trusted((&m + &m.adjoint()).scale_real(0.5), dims)
}

/// Mixed or pure with equal odds.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dims: Vec<usize>) -> DensityOperator {
    if rng.gen_bool(0.5) {
        random_pure_state(rng, dims)
    } else {
        random_mixed_state(rng, dims)
    }
}

/// Random generalized measurement `Mᵢ = Gᵢ S^{-1/2}` with `S = Σ Gᵢ†Gᵢ`.
pub fn random_measurement_model<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    outcomes: usize,
    target: Target,
) -> Result<MeasurementModel> {
    let gs: Vec<ComplexMatrix> = (0..outcomes).map(|_| ginibre(rng, dim, dim)).collect();
    let s = gs
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, g| &acc + &(&g.adjoint() * g));
    let s = (&s + &s.adjoint()).scale_real(0.5);
    let root = inverse_sqrt(&s)?;
    let ops = gs
        .iter()
        .enumerate()
        .map(|(k, g)| (format!("m{k}"), g * &root))
        .collect();
    MeasurementModel::new("random", ops, target)
}

/// Random projective measurement in a random orthonormal basis.
pub fn random_projective_model<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    target: Target,
) -> Result<MeasurementModel> {
    let h = random_hermitian(rng, dim);
    let eig = crate::linalg::hermitian_eigensystem(&h)?;
    let ops = eig
        .projectors
        .into_iter()
        .enumerate()
        .map(|(k, p)| (format!("p{k}"), p))
        .collect();
    MeasurementModel::new("random-projective", ops, target)
}

/// Draws recorded outcomes for every event by sequential Born sampling in
/// causal order (input order among spacelike events).
pub fn sample_outcomes<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<Vec<usize>> {
    let events = scenario.events();
    let locs: Vec<&Event> = events.iter().map(|e| &e.location).collect();
    let order = CausalOrder::new(&locs).stable_order();
    let mut outcomes = vec![0; events.len()];
    let mut rho = scenario.initial_state().clone();
    for i in order {
        let ev = &events[i];
        let probs = outcome_distribution(&rho, &ev.model)?;
        let u: f64 = rng.gen::<f64>() * probs.iter().sum::<f64>();
        let mut acc = 0.0;
        let mut pick = probs.len() - 1;
        for (k, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc && *p > 0.0 {
                pick = k;
                break;
            }
        }
        // never record a null outcome
        if probs[pick] <= crate::tolerance::ZERO_PROBABILITY_EPS {
            pick = (0..probs.len())
                .max_by(|&a, &b| probs[a].total_cmp(&probs[b]))
                .unwrap_or(0);
        }
        outcomes[i] = pick;
        let m = &scenario.embedded_operators(i)[pick];
        rho = apply_operator(&rho, m, &ev.model.operators()[pick].id)?;
    }
    Ok(outcomes)
}

/// Spacetime layout used by [`random_commuting_scenario`]: preparation box at
/// the origin, events in `t ∈ [1, 4]`, `x ∈ [−3, 3]`.
pub fn preparation_box() -> Region {
    Region::square(0.0, 0.0, 0.5).expect("valid region")
}

/// A point that sees every event of [`random_commuting_scenario`].
pub fn late_observer() -> Event {
    Event::at(20.0, 0.0)
}

/// Random scenario on three qubits whose mutually spacelike events act on
/// different qubits, so their measurement operators commute. The first two
/// events are always spacelike separated. Outcomes are Born-sampled.
pub fn random_commuting_scenario<R: Rng + ?Sized>(rng: &mut R) -> Result<Scenario> {
    const QUBITS: usize = 3;
    let dims = vec![2; QUBITS];
    let state = random_state(rng, dims);
    let n_events = rng.gen_range(2..=4);

    let prep = preparation_box();
    let draw = |rng: &mut R| loop {
        let e = Event::at(rng.gen_range(1.0..4.0), rng.gen_range(-3.0..3.0));
        if prep.in_causal_past_of(&e) {
            break e;
        }
    };
    let mut locations: Vec<Event> = vec![draw(rng)];
    let second = loop {
        let e = draw(rng);
        if is_spacelike(&locations[0], &e) {
            break e;
        }
    };
    locations.push(second);
    for _ in 2..n_events {
        locations.push(draw(rng));
    }

    let mut targets: Vec<usize> = Vec::new();
    let mut events = Vec::new();
    for (k, loc) in locations.into_iter().enumerate() {
        let free: Vec<usize> = (0..QUBITS)
            .filter(|q| {
                !events
                    .iter()
                    .zip(&targets)
                    .any(|(e, t): (&MeasurementEvent, &usize)| t == q && is_spacelike(&e.location, &loc))
            })
            .collect();
        if free.is_empty() {
            continue;
        }
        let target = free[rng.gen_range(0..free.len())];
        let model = if rng.gen_bool(0.5) {
            random_projective_model(rng, 2, Target::Subsystem(target))?
        } else {
            let outcomes = rng.gen_range(2..=3);
            random_measurement_model(rng, 2, outcomes, Target::Subsystem(target))?
        };
        targets.push(target);
        events.push(MeasurementEvent::new(format!("e{k}"), loc, model, 0)?);
    }
    let scenario = Scenario::new(state, prep, events, vec![])?;
    let outcomes = sample_outcomes(&scenario, rng)?;
    scenario.with_outcomes(&outcomes)
}
