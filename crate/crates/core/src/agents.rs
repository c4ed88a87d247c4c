//! Light-cone-relative state assignment.
//!
//! An agent at point `p` starts from the prepared state and applies, in causal
//! order, the updates for every measurement event in the closed past cone of
//! `p`. Mutually spacelike events have no causal order; the [`OrderPolicy`]
//! picks one, and the consistency checks compare all of them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{commutator, trace_norm_distance, ComplexMatrix};
use crate::quantum::{apply_operator, born_probability, DensityOperator, MeasurementModel, Target};
use crate::spacetime::{in_backward_lightcone, CausalOrder, Event, Region, WorldLine};
use crate::tolerance::MAX_PERMUTED_EVENTS;

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementEvent {
    pub label: String,
    pub location: Event,
    pub model: MeasurementModel,
    /// Index into `model`'s outcomes.
    pub outcome: usize,
    pub setting_label: String,
}

impl MeasurementEvent {
    pub fn new(
        label: impl Into<String>,
        location: Event,
        model: MeasurementModel,
        outcome: usize,
    ) -> Result<Self> {
        if outcome >= model.len() {
            return Err(Error::UnknownOutcome(outcome.to_string()));
        }
        Ok(Self {
            label: label.into(),
            location,
            setting_label: model.label().to_string(),
            model,
            outcome,
        })
    }

    pub fn with_setting_label(mut self, setting: impl Into<String>) -> Self {
        self.setting_label = setting.into();
        self
    }

    pub fn outcome_id(&self) -> &str {
        &self.model.operators()[self.outcome].id
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    initial_state: DensityOperator,
    preparation_region: Region,
    events: Vec<MeasurementEvent>,
    agents: Vec<(String, WorldLine)>,
    /// Measurement operators of each event, embedded in the full register.
    embedded: Vec<Vec<ComplexMatrix>>,
}

impl Scenario {
    pub fn new(
        initial_state: DensityOperator,
        preparation_region: Region,
        events: Vec<MeasurementEvent>,
        agents: Vec<(String, WorldLine)>,
    ) -> Result<Self> {
        let dims = preparation_region.spatial_dims();
        let mut embedded = Vec::with_capacity(events.len());
        for (i, ev) in events.iter().enumerate() {
            if events[..i].iter().any(|other| other.label == ev.label) {
                return Err(Error::Precondition(format!("duplicate event label `{}`", ev.label)));
            }
            if ev.location.spatial_dims() != dims || !ev.location.is_finite() {
                return Err(Error::Dimension(format!(
                    "event `{}` has {} spatial coordinates, scenario uses {dims}",
                    ev.label,
                    ev.location.spatial_dims()
                )));
            }
            if !preparation_region.in_causal_past_of(&ev.location) {
                return Err(Error::Precondition(format!(
                    "event `{}` is outside the forward light cone of the preparation region",
                    ev.label
                )));
            }
            let ops = (0..ev.model.len())
                .map(|k| ev.model.embedded_operator(k, initial_state.dims()))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Dimension(format!("event `{}`: {e}", ev.label)))?;
            embedded.push(ops);
        }
        for (name, line) in &agents {
            if line.points().iter().any(|p| p.spatial_dims() != dims) {
                return Err(Error::Dimension(format!(
                    "agent `{name}` world-line has the wrong spatial dimension"
                )));
            }
        }
        Ok(Self {
            initial_state,
            preparation_region,
            events,
            agents,
            embedded,
        })
    }

    pub fn initial_state(&self) -> &DensityOperator {
        &self.initial_state
    }

    pub fn preparation_region(&self) -> &Region {
        &self.preparation_region
    }

    pub fn events(&self) -> &[MeasurementEvent] {
        &self.events
    }

    pub fn agents(&self) -> &[(String, WorldLine)] {
        &self.agents
    }

    pub fn event(&self, label: &str) -> Option<&MeasurementEvent> {
        self.events.iter().find(|e| e.label == label)
    }

    /// All measurement operators of event `index`, at full register dimension.
    pub fn embedded_operators(&self, index: usize) -> &[ComplexMatrix] {
        &self.embedded[index]
    }

    /// Same geometry and models with different recorded outcomes.
    pub fn with_outcomes(&self, outcomes: &[usize]) -> Result<Self> {
        if outcomes.len() != self.events.len() {
            return Err(Error::Dimension(format!(
                "{} outcomes for {} events",
                outcomes.len(),
                self.events.len()
            )));
        }
        let mut next = self.clone();
        for (ev, &o) in next.events.iter_mut().zip(outcomes) {
            if o >= ev.model.len() {
                return Err(Error::UnknownOutcome(format!("{o} at event `{}`", ev.label)));
            }
            ev.outcome = o;
        }
        Ok(next)
    }

    /// Indices of the events in the closed past cone of `p`, in input order.
    pub fn past_of(&self, p: &Event) -> Vec<usize> {
        (0..self.events.len())
            .filter(|&i| in_backward_lightcone(&self.events[i].location, p))
            .collect()
    }

    fn order_of(&self, indices: &[usize]) -> CausalOrder {
        let locs: Vec<&Event> = indices.iter().map(|&i| &self.events[i].location).collect();
        CausalOrder::new(&locs)
    }

    fn check_point(&self, p: &Event) -> Result<()> {
        if p.spatial_dims() != self.preparation_region.spatial_dims() {
            return Err(Error::Dimension("agent point has the wrong spatial dimension".into()));
        }
        if !self.preparation_region.in_causal_past_of(p) {
            return Err(Error::Precondition(format!(
                "point (t={}, x={:?}) is outside the forward light cone of the preparation region",
                p.t, p.x
            )));
        }
        Ok(())
    }

    /// Folds the recorded updates of `sequence` (event indices) over the initial state.
    pub fn apply_sequence(&self, sequence: &[usize]) -> Result<DensityOperator> {
        let mut rho = self.initial_state.clone();
        for &i in sequence {
            let ev = &self.events[i];
            rho = apply_operator(&rho, &self.embedded[i][ev.outcome], ev.outcome_id())
                .map_err(|e| e.at_event(&ev.label))?;
        }
        Ok(rho)
    }
}

/// How mutually spacelike events in a past cone are ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrderPolicy {
    /// By event label.
    Lexicographic,
    /// By position in the scenario's event list.
    AsListed,
    /// Every causally admissible ordering; the result records their spread.
    BothOrders,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentTrace {
    pub point: Event,
    /// Labels of the applied events, in application order.
    pub applied: Vec<String>,
    pub state: DensityOperator,
    /// Number of orderings evaluated (1 unless `BothOrders`).
    pub orderings: usize,
    /// Largest trace distance between the state above and any other evaluated ordering.
    pub spread: f64,
}

pub fn assign_state(scenario: &Scenario, p: &Event, policy: OrderPolicy) -> Result<AssignmentTrace> {
    scenario.check_point(p)?;
    let past = scenario.past_of(p);
    let order = scenario.order_of(&past);
    let to_global = |seq: Vec<usize>| -> Vec<usize> { seq.into_iter().map(|k| past[k]).collect() };

    let (sequence, orderings, spread) = match policy {
        OrderPolicy::AsListed => (to_global(order.stable_order()), 1, 0.0),
        OrderPolicy::Lexicographic => {
            let seq = order.sort_by_key(|k| scenario.events[past[k]].label.clone());
            (to_global(seq), 1, 0.0)
        }
        OrderPolicy::BothOrders => {
            let extensions = all_orderings(scenario, &past, &order)?;
            let first = scenario.apply_sequence(&extensions[0])?;
            let mut spread = 0.0_f64;
            for seq in &extensions[1..] {
                let other = scenario.apply_sequence(seq)?;
                spread = spread.max(trace_norm_distance(first.matrix(), other.matrix())?);
            }
            let n = extensions.len();
            (extensions.into_iter().next().unwrap_or_default(), n, spread)
        }
    };
    let state = scenario.apply_sequence(&sequence)?;
    Ok(AssignmentTrace {
        point: p.clone(),
        applied: sequence
            .iter()
            .map(|&i| scenario.events[i].label.clone())
            .collect(),
        state,
        orderings,
        spread,
    })
}

fn all_orderings(scenario: &Scenario, past: &[usize], order: &CausalOrder) -> Result<Vec<Vec<usize>>> {
    let mut involved: Vec<usize> = order
        .incomparable_pairs()
        .into_iter()
        .flat_map(|(a, b)| [a, b])
        .collect();
    involved.sort_unstable();
    involved.dedup();
    if involved.len() > MAX_PERMUTED_EVENTS {
        let labels: Vec<&str> = involved
            .iter()
            .map(|&k| scenario.events[past[k]].label.as_str())
            .collect();
        return Err(Error::Precondition(format!(
            "{} mutually unordered events ({}) exceed the limit of {MAX_PERMUTED_EVENTS}",
            involved.len(),
            labels.join(", ")
        )));
    }
    Ok(order
        .linear_extensions()
        .into_iter()
        .map(|seq| seq.into_iter().map(|k| past[k]).collect())
        .collect())
}

/// Born probability the state assigned at `p` gives to `outcome` of `model`.
pub fn probability_at(
    scenario: &Scenario,
    p: &Event,
    model: &MeasurementModel,
    outcome: usize,
) -> Result<f64> {
    let trace = assign_state(scenario, p, OrderPolicy::AsListed)?;
    let effect = model.embedded_effect(outcome, trace.state.dims())?;
    born_probability(&trace.state, &effect)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyCheck {
    pub consistent: bool,
    /// Largest trace distance from `rho_ab` over all causally admissible orderings.
    pub distance: f64,
    /// Spacelike events applied in listed order.
    pub rho_ab: DensityOperator,
    /// Spacelike events applied in reverse listed order.
    pub rho_ba: DensityOperator,
    pub orderings: usize,
    /// Labels of the mutually spacelike events seen from the point.
    pub permuted: Vec<String>,
}

/// Compares the states obtained from different orderings of the mutually
/// spacelike events in the past of `p`.
pub fn charlie_consistency(scenario: &Scenario, p: &Event, tol: f64) -> Result<ConsistencyCheck> {
    scenario.check_point(p)?;
    let past = scenario.past_of(p);
    let order = scenario.order_of(&past);
    let pairs = order.incomparable_pairs();
    if pairs.is_empty() {
        return Err(Error::Precondition(format!(
            "point (t={}, x={:?}) sees no pair of mutually spacelike events",
            p.t, p.x
        )));
    }
    let mut permuted: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    permuted.sort_unstable();
    permuted.dedup();

    let forward: Vec<usize> = order.stable_order().into_iter().map(|k| past[k]).collect();
    let backward: Vec<usize> = order
        .reverse_stable_order()
        .into_iter()
        .map(|k| past[k])
        .collect();
    let rho_ab = scenario.apply_sequence(&forward)?;
    let rho_ba = scenario.apply_sequence(&backward)?;

    let mut distance = trace_norm_distance(rho_ab.matrix(), rho_ba.matrix())?;
    let mut orderings = 2;
    if permuted.len() <= MAX_PERMUTED_EVENTS {
        let all = all_orderings(scenario, &past, &order)?;
        orderings = all.len();
        for seq in &all {
            let other = scenario.apply_sequence(seq)?;
            distance = distance.max(trace_norm_distance(rho_ab.matrix(), other.matrix())?);
        }
    }
    Ok(ConsistencyCheck {
        consistent: distance <= tol,
        distance,
        rho_ab,
        rho_ba,
        orderings,
        permuted: permuted
            .iter()
            .map(|&k| scenario.events[past[k]].label.clone())
            .collect(),
    })
}

/// A pair of mutually spacelike events whose recorded operators fail to commute.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub first: String,
    pub second: String,
    pub commutator_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointAudit {
    pub point: Event,
    pub orderings: usize,
    pub spread: f64,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub passed: bool,
    pub points: Vec<PointAudit>,
}

/// Checks that the assigned state at every sample point is independent of
/// how spacelike events are ordered, naming a non-commuting pair on failure.
pub fn order_independence_audit(scenario: &Scenario, points: &[Event], tol: f64) -> Result<AuditReport> {
    let mut audits = Vec::with_capacity(points.len());
    for p in points {
        let trace = assign_state(scenario, p, OrderPolicy::BothOrders)?;
        let passed = trace.spread <= tol;
        let witness = if passed {
            None
        } else {
            worst_noncommuting_pair(scenario, &scenario.past_of(p))?
        };
        audits.push(PointAudit {
            point: p.clone(),
            orderings: trace.orderings,
            spread: trace.spread,
            passed,
            witness,
        });
    }
    Ok(AuditReport {
        passed: audits.iter().all(|a| a.passed),
        points: audits,
    })
}

fn worst_noncommuting_pair(scenario: &Scenario, past: &[usize]) -> Result<Option<Witness>> {
    let order = scenario.order_of(past);
    let mut worst: Option<Witness> = None;
    for (a, b) in order.incomparable_pairs() {
        let (i, j) = (past[a], past[b]);
        let ma = &scenario.embedded[i][scenario.events[i].outcome];
        let mb = &scenario.embedded[j][scenario.events[j].outcome];
        let norm = commutator(ma, mb)?.max_abs();
        if worst.as_ref().is_none_or(|w| norm > w.commutator_norm) {
            worst = Some(Witness {
                first: scenario.events[i].label.clone(),
                second: scenario.events[j].label.clone(),
                commutator_norm: norm,
            });
        }
    }
    Ok(worst)
}

/// Convenience for two-party scenarios: targets each measurement at its own photon.
pub fn polarization_event(
    label: &str,
    location: Event,
    theta: f64,
    photon: usize,
    outcome: usize,
) -> Result<MeasurementEvent> {
    Ok(
        MeasurementEvent::new(label, location, MeasurementModel::polarization(theta, Target::Subsystem(photon)), outcome)?
            .with_setting_label(format!("{theta}")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::make_phi_plus;
    use crate::linalg::tensor_product;
    use crate::quantum::polarization_ket;

    const A: f64 = 0.3;
    const B: f64 = 1.1;

    fn fig4(outcome_a: usize, outcome_b: usize) -> Scenario {
        Scenario::new(
            make_phi_plus(),
            Region::square(0.0, 0.0, 0.5).unwrap(),
            vec![
                polarization_event("alice", Event::at(1.0, -1.0), A, 0, outcome_a).unwrap(),
                polarization_event("bob", Event::at(1.0, 1.0), B, 1, outcome_b).unwrap(),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn before_measurements_state_is_unchanged() {
        let s = fig4(0, 0);
        let trace = assign_state(&s, &Event::at(0.5, -1.0), OrderPolicy::AsListed).unwrap();
        assert!(trace.applied.is_empty());
        assert_eq!(&trace.state, s.initial_state());
    }

    #[test]
    fn bob_assigns_product_after_his_record() {
        let s = fig4(0, 0);
        let trace = assign_state(&s, &Event::at(2.0, 1.0), OrderPolicy::AsListed).unwrap();
        assert_eq!(trace.applied, ["bob"]);
        let b = polarization_ket(B).projector();
        let expected = tensor_product(&b, &b);
        assert!(trace.state.matrix().approx_eq(&expected, 1e-12));
    }

    #[test]
    fn charlie_gets_same_state_either_way() {
        let s = fig4(0, 1);
        let c = charlie_consistency(&s, &Event::at(3.0, 0.0), 1e-12).unwrap();
        assert!(c.consistent, "distance {}", c.distance);
        assert_eq!(c.permuted, ["alice", "bob"]);
        assert_eq!(c.orderings, 2);
        let a = polarization_ket(A).projector();
        let b_perp = polarization_ket(B + std::f64::consts::FRAC_PI_2).projector();
        assert!(c.rho_ab.matrix().approx_eq(&tensor_product(&a, &b_perp), 1e-12));
    }

    #[test]
    fn charlie_needs_two_spacelike_events() {
        let s = fig4(0, 0);
        let err = charlie_consistency(&s, &Event::at(2.0, 1.0), 1e-12).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn zero_probability_names_the_event() {
        // equal settings make (par, perp) impossible
        let s = Scenario::new(
            make_phi_plus(),
            Region::square(0.0, 0.0, 0.5).unwrap(),
            vec![
                polarization_event("alice", Event::at(1.0, -1.0), A, 0, 0).unwrap(),
                polarization_event("bob", Event::at(1.0, 1.0), A, 1, 1).unwrap(),
            ],
            vec![],
        )
        .unwrap();
        let err = assign_state(&s, &Event::at(3.0, 0.0), OrderPolicy::AsListed).unwrap_err();
        match err {
            Error::ZeroProbabilityOutcome { context, .. } => assert_eq!(context.as_deref(), Some("bob")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn events_outside_preparation_cone_rejected() {
        let err = Scenario::new(
            make_phi_plus(),
            Region::square(0.0, 0.0, 0.5).unwrap(),
            vec![polarization_event("early", Event::at(0.0, 5.0), 0.0, 0, 0).unwrap()],
            vec![],
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn audit_with_no_events_passes() {
        let s = Scenario::new(make_phi_plus(), Region::square(0.0, 0.0, 0.5).unwrap(), vec![], vec![]).unwrap();
        let r = order_independence_audit(&s, &[Event::at(1.0, 0.0), Event::at(4.0, 2.0)], 1e-10).unwrap();
        assert!(r.passed);
        assert!(r.points.iter().all(|p| p.orderings == 1));
    }

    #[test]
    fn lexicographic_policy_orders_by_label() {
        let s = Scenario::new(
            make_phi_plus(),
            Region::square(0.0, 0.0, 0.5).unwrap(),
            vec![
                polarization_event("zed", Event::at(1.0, -1.0), A, 0, 0).unwrap(),
                polarization_event("amy", Event::at(1.0, 1.0), B, 1, 0).unwrap(),
            ],
            vec![],
        )
        .unwrap();
        let p = Event::at(3.0, 0.0);
        let lex = assign_state(&s, &p, OrderPolicy::Lexicographic).unwrap();
        assert_eq!(lex.applied, ["amy", "zed"]);
        let listed = assign_state(&s, &p, OrderPolicy::AsListed).unwrap();
        assert_eq!(listed.applied, ["zed", "amy"]);
    }
}
