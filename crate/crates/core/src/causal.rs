//! Structural causal model over the two-wing polarization experiment.
//!
//! Variables: `Λ` (which state was prepared), Alice's setting `a`, Bob's
//! setting `b`, Bob's outcome `X` and Alice's outcome `Y`. Outcome value 0 is
//! `par`, 1 is `perp`. Graph: `Λ → X, Λ → Y, a → Y, b → X`, with the quantum
//! coupling of `X` and `Y` carried by a single joint kernel `P(X, Y | Λ, a, b)`.
//! There is no `X → Y` or `Y → X` edge, so intervening on one outcome replaces
//! its kernel by a point mass and leaves the other with its marginal kernel.

use serde::Serialize;

use crate::bell::{correlation, quantum_joint, LhvModel};
use crate::error::{Error, Result};
use crate::quantum::{DensityOperator, JointTable, PAR, PERP};
use crate::tolerance::ZERO_PROBABILITY_EPS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Variable {
    Preparation,
    AliceSetting,
    BobSetting,
    /// `X`: Bob's outcome.
    BobOutcome,
    /// `Y`: Alice's outcome.
    AliceOutcome,
}

impl Variable {
    pub const ALL: [Variable; 5] = [
        Variable::Preparation,
        Variable::AliceSetting,
        Variable::BobSetting,
        Variable::BobOutcome,
        Variable::AliceOutcome,
    ];

    fn axis(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Variable::Preparation => "Λ",
            Variable::AliceSetting => "a",
            Variable::BobSetting => "b",
            Variable::BobOutcome => "X",
            Variable::AliceOutcome => "Y",
        }
    }

    pub fn is_outcome(self) -> bool {
        matches!(self, Variable::BobOutcome | Variable::AliceOutcome)
    }
}

/// `do(target = value)`; `value` indexes the target's domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InterventionSpec {
    pub target: Variable,
    pub value: usize,
}

impl InterventionSpec {
    pub fn new(target: Variable, value: usize) -> Self {
        Self { target, value }
    }
}

/// `P(X = x, Y = y | Λ, a, b)` stored as `[x][y]`.
type OutcomeKernel = [[f64; 2]; 2];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CausalModel {
    preparations: Vec<String>,
    alice_settings: Vec<f64>,
    bob_settings: Vec<f64>,
    prior_preparation: Vec<f64>,
    prior_alice: Vec<f64>,
    prior_bob: Vec<f64>,
    /// Indexed `[Λ][a][b]`.
    kernel: Vec<Vec<Vec<OutcomeKernel>>>,
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn kernel_from_table(t: &JointTable) -> OutcomeKernel {
    // table rows are Alice (Y), columns Bob (X)
    [
        [t.probs[0][0], t.probs[1][0]],
        [t.probs[0][1], t.probs[1][1]],
    ]
}

impl CausalModel {
    /// Quantum model with exogenous, uniformly distributed preparation and settings.
    pub fn quantum(
        preparations: Vec<(String, DensityOperator)>,
        alice_settings: Vec<f64>,
        bob_settings: Vec<f64>,
    ) -> Result<Self> {
        if preparations.is_empty() || alice_settings.is_empty() || bob_settings.is_empty() {
            return Err(Error::Precondition("every variable needs a non-empty domain".into()));
        }
        let kernel = preparations
            .iter()
            .map(|(_, rho)| {
                alice_settings
                    .iter()
                    .map(|&a| {
                        bob_settings
                            .iter()
                            .map(|&b| Ok(kernel_from_table(&quantum_joint(rho, a, b)?)))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            prior_preparation: uniform(preparations.len()),
            prior_alice: uniform(alice_settings.len()),
            prior_bob: uniform(bob_settings.len()),
            preparations: preparations.into_iter().map(|(l, _)| l).collect(),
            alice_settings,
            bob_settings,
            kernel,
        })
    }

    /// Local hidden-variable model: `Λ` ranges over hidden values with the
    /// model's weights, and the outcome kernel factorizes given the parents.
    pub fn from_lhv(model: &LhvModel) -> Self {
        let n = model.weights().len();
        let kernel = (0..n)
            .map(|l| {
                (0..model.alice_settings().len())
                    .map(|ka| {
                        (0..model.bob_settings().len())
                            .map(|kb| kernel_from_table(&model.joint_given_lambda(l, ka, kb)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            preparations: (0..n).map(|l| format!("λ{l}")).collect(),
            alice_settings: model.alice_settings().to_vec(),
            bob_settings: model.bob_settings().to_vec(),
            prior_preparation: model.weights().to_vec(),
            prior_alice: uniform(model.alice_settings().len()),
            prior_bob: uniform(model.bob_settings().len()),
            kernel,
        }
    }

    pub fn preparations(&self) -> &[String] {
        &self.preparations
    }

    pub fn alice_settings(&self) -> &[f64] {
        &self.alice_settings
    }

    pub fn bob_settings(&self) -> &[f64] {
        &self.bob_settings
    }

    pub fn domain_size(&self, var: Variable) -> usize {
        match var {
            Variable::Preparation => self.preparations.len(),
            Variable::AliceSetting => self.alice_settings.len(),
            Variable::BobSetting => self.bob_settings.len(),
            Variable::BobOutcome | Variable::AliceOutcome => 2,
        }
    }

    fn shape(&self) -> [usize; 5] {
        Variable::ALL.map(|v| self.domain_size(v))
    }

    fn check_value(&self, var: Variable, value: usize) -> Result<()> {
        if value >= self.domain_size(var) {
            return Err(Error::Precondition(format!(
                "value {value} outside the domain of {} (size {})",
                var.symbol(),
                self.domain_size(var)
            )));
        }
        Ok(())
    }

    /// Outcome kernel at a parent configuration, `[x][y]`.
    pub fn outcome_kernel(&self, prep: usize, a: usize, b: usize) -> [[f64; 2]; 2] {
        self.kernel[prep][a][b]
    }

    /// Observational joint distribution over all five variables.
    pub fn joint(&self) -> Distribution {
        self.truncated(None)
    }

    /// Truncated factorization, optionally replacing one mechanism by a point mass.
    fn truncated(&self, spec: Option<InterventionSpec>) -> Distribution {
        let point = |var: Variable, prior: &[f64]| -> Vec<f64> {
            match spec {
                Some(s) if s.target == var => {
                    (0..prior.len()).map(|k| f64::from(k == s.value)).collect()
                }
                _ => prior.to_vec(),
            }
        };
        let pl = point(Variable::Preparation, &self.prior_preparation);
        let pa = point(Variable::AliceSetting, &self.prior_alice);
        let pb = point(Variable::BobSetting, &self.prior_bob);
        let mut dist = Distribution::zeros(self.shape());
        for (l, &wl) in pl.iter().enumerate() {
            for (ia, &wa) in pa.iter().enumerate() {
                for (ib, &wb) in pb.iter().enumerate() {
                    let k = self.kernel[l][ia][ib];
                    let outcomes: OutcomeKernel = match spec {
                        Some(InterventionSpec {
                            target: Variable::BobOutcome,
                            value,
                        }) => {
                            let y_marginal = [k[0][0] + k[1][0], k[0][1] + k[1][1]];
                            let mut o = [[0.0; 2]; 2];
                            o[value] = y_marginal;
                            o
                        }
                        Some(InterventionSpec {
                            target: Variable::AliceOutcome,
                            value,
                        }) => {
                            let x_marginal = [k[0][0] + k[0][1], k[1][0] + k[1][1]];
                            let mut o = [[0.0; 2]; 2];
                            o[0][value] = x_marginal[0];
                            o[1][value] = x_marginal[1];
                            o
                        }
                        _ => k,
                    };
                    for (x, row) in outcomes.iter().enumerate() {
                        for (y, &p) in row.iter().enumerate() {
                            *dist.at_mut([l, ia, ib, x, y]) = wl * wa * wb * p;
                        }
                    }
                }
            }
        }
        dist
    }

    /// Whether the kernel of outcome `child` varies with exogenous `parent`.
    pub fn kernel_depends_on(&self, child: Variable, parent: Variable, tol: f64) -> Result<bool> {
        if !child.is_outcome() || parent.is_outcome() {
            return Err(Error::Precondition(format!(
                "kernel inspection needs an outcome child and exogenous parent, got {} ← {}",
                child.symbol(),
                parent.symbol()
            )));
        }
        let marginal = |l: usize, ia: usize, ib: usize| -> f64 {
            let k = self.kernel[l][ia][ib];
            match child {
                Variable::BobOutcome => k[0][0] + k[0][1],
                _ => k[0][0] + k[1][0],
            }
        };
        let [nl, na, nb, _, _] = self.shape();
        for l in 0..nl {
            for ia in 0..na {
                for ib in 0..nb {
                    let base = marginal(l, ia, ib);
                    let varied = match parent {
                        Variable::Preparation => (0..nl).map(|v| marginal(v, ia, ib)).collect::<Vec<_>>(),
                        Variable::AliceSetting => (0..na).map(|v| marginal(l, v, ib)).collect(),
                        _ => (0..nb).map(|v| marginal(l, ia, v)).collect(),
                    };
                    if varied.iter().any(|p| (p - base).abs() > tol) {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }
}

/// Dense joint distribution over `(Λ, a, b, X, Y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Distribution {
    shape: [usize; 5],
    probs: Vec<f64>,
}

impl Distribution {
    fn zeros(shape: [usize; 5]) -> Self {
        Self {
            shape,
            probs: vec![0.0; shape.iter().product()],
        }
    }

    fn offset(&self, idx: [usize; 5]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    fn at_mut(&mut self, idx: [usize; 5]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.probs[o]
    }

    fn indices(&self) -> impl Iterator<Item = [usize; 5]> + '_ {
        let shape = self.shape;
        (0..self.probs.len()).map(move |mut flat| {
            let mut idx = [0; 5];
            for k in (0..5).rev() {
                idx[k] = flat % shape[k];
                flat /= shape[k];
            }
            idx
        })
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn marginal(&self, var: Variable) -> Vec<f64> {
        let mut out = vec![0.0; self.shape[var.axis()]];
        for (idx, p) in self.indices().zip(&self.probs) {
            out[idx[var.axis()]] += p;
        }
        out
    }

    /// `P(var = value)`.
    pub fn probability(&self, var: Variable, value: usize) -> f64 {
        self.marginal(var).get(value).copied().unwrap_or(0.0)
    }

    /// Bayesian conditioning on `var = value`.
    pub fn given(&self, var: Variable, value: usize) -> Result<Distribution> {
        let p = self.probability(var, value);
        if p <= ZERO_PROBABILITY_EPS {
            return Err(Error::ZeroProbabilityOutcome {
                outcome: format!("{}={value}", var.symbol()),
                probability: p,
                context: None,
            });
        }
        let probs = self
            .indices()
            .zip(&self.probs)
            .map(|(idx, &q)| if idx[var.axis()] == value { q / p } else { 0.0 })
            .collect();
        Ok(Distribution {
            shape: self.shape,
            probs,
        })
    }

    /// `P(X = x, Y = y)`, indexed `[x][y]`.
    pub fn outcome_joint(&self) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for (idx, p) in self.indices().zip(&self.probs) {
            out[idx[3]][idx[4]] += p;
        }
        out
    }
}

pub fn build_model(state: &DensityOperator, a: f64, b: f64) -> Result<CausalModel> {
    CausalModel::quantum(vec![("state".into(), state.clone())], vec![a], vec![b])
}

pub fn condition(model: &CausalModel, var: Variable, value: usize) -> Result<Distribution> {
    model.check_value(var, value)?;
    model.joint().given(var, value)
}

pub fn intervene(model: &CausalModel, spec: InterventionSpec) -> Result<Distribution> {
    model.check_value(spec.target, spec.value)?;
    Ok(model.truncated(Some(spec)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityRow {
    pub preparation: usize,
    pub alice_setting: usize,
    pub bob_setting: usize,
    /// Value forced or observed on the cause.
    pub cause_value: usize,
    /// `P(effect = par | cause = value, context)`.
    pub conditioned: f64,
    /// `P(effect = par | do(cause = value), context)`.
    pub intervened: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionReport {
    pub name: &'static str,
    pub cause: Variable,
    pub effect: Variable,
    /// Outcome interventions have no physical realization; they are evaluated conceptually.
    pub conceptual: bool,
    pub rows: Vec<StabilityRow>,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub directions: Vec<DirectionReport>,
    pub tolerance: f64,
}

impl StabilityReport {
    pub fn verdict(&self) -> &'static str {
        if self.directions.iter().all(|d| d.stable) {
            "causal-stable"
        } else {
            "not causal-stable"
        }
    }
}

/// Compares conditioning and intervening on one outcome, for its effect on the
/// other, at every parent configuration and in both directions: `(Same)` is
/// `X → Y`, `(Same*)` is `Y → X`.
pub fn stability_report(model: &CausalModel, tol: f64) -> Result<StabilityReport> {
    let directions = [
        ("(Same)", Variable::BobOutcome, Variable::AliceOutcome),
        ("(Same*)", Variable::AliceOutcome, Variable::BobOutcome),
    ]
    .into_iter()
    .map(|(name, cause, effect)| direction(model, name, cause, effect, tol))
    .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport {
        directions,
        tolerance: tol,
    })
}

fn direction(
    model: &CausalModel,
    name: &'static str,
    cause: Variable,
    effect: Variable,
    tol: f64,
) -> Result<DirectionReport> {
    let [nl, na, nb, _, _] = model.shape();
    let observed = model.joint();
    let mut rows = Vec::new();
    for l in 0..nl {
        for ia in 0..na {
            for ib in 0..nb {
                let context = |d: &Distribution| -> Result<Distribution> {
                    d.given(Variable::Preparation, l)?
                        .given(Variable::AliceSetting, ia)?
                        .given(Variable::BobSetting, ib)
                };
                let Ok(in_context) = context(&observed) else {
                    continue;
                };
                for value in 0..2 {
                    let Ok(conditioned) = in_context.given(cause, value) else {
                        continue;
                    };
                    let intervened = context(&intervene(model, InterventionSpec::new(cause, value))?)?;
                    let c = conditioned.probability(effect, 0);
                    let i = intervened.probability(effect, 0);
                    rows.push(StabilityRow {
                        preparation: l,
                        alice_setting: ia,
                        bob_setting: ib,
                        cause_value: value,
                        conditioned: c,
                        intervened: i,
                        stable: (c - i).abs() <= tol,
                    });
                }
            }
        }
    }
    Ok(DirectionReport {
        name,
        cause,
        effect,
        conceptual: cause.is_outcome(),
        stable: rows.iter().all(|r| r.stable),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreparationComparison {
    pub from: String,
    pub to: String,
    /// `P(X, Y)` under `do(Λ = from)` and `do(Λ = to)` at the given settings.
    pub joint_from: [[f64; 2]; 2],
    pub joint_to: [[f64; 2]; 2],
    pub correlation_from: f64,
    pub correlation_to: f64,
    /// Largest change of any joint entry.
    pub delta: f64,
    pub common_cause: bool,
}

/// Intervenes on the preparation and reports whether the outcome statistics move.
pub fn preparation_intervention(
    model: &CausalModel,
    from: usize,
    to: usize,
    alice_setting: usize,
    bob_setting: usize,
    tol: f64,
) -> Result<PreparationComparison> {
    let joint_for = |l: usize| -> Result<[[f64; 2]; 2]> {
        Ok(intervene(model, InterventionSpec::new(Variable::Preparation, l))?
            .given(Variable::AliceSetting, alice_setting)?
            .given(Variable::BobSetting, bob_setting)?
            .outcome_joint())
    };
    let jf = joint_for(from)?;
    let jt = joint_for(to)?;
    let as_table = |k: [[f64; 2]; 2]| JointTable {
        outcomes_a: vec![PAR.into(), PERP.into()],
        outcomes_b: vec![PAR.into(), PERP.into()],
        probs: vec![vec![k[0][0], k[1][0]], vec![k[0][1], k[1][1]]],
    };
    let delta = (0..2)
        .flat_map(|x| (0..2).map(move |y| (x, y)))
        .map(|(x, y)| (jf[x][y] - jt[x][y]).abs())
        .fold(0.0, f64::max);
    Ok(PreparationComparison {
        from: model.preparations[from].clone(),
        to: model.preparations[to].clone(),
        joint_from: jf,
        joint_to: jt,
        correlation_from: correlation(&as_table(jf)),
        correlation_to: correlation(&as_table(jt)),
        delta,
        common_cause: delta > tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{make_phi_plus, make_product};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn parallel_settings_are_perfectly_correlated() {
        let m = build_model(&make_phi_plus(), 0.4, 0.4).unwrap();
        let j = m.joint().outcome_joint();
        assert!((j[0][0] + j[1][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditioning_vs_intervening_on_bob() {
        let m = build_model(&make_phi_plus(), 0.0, 0.0).unwrap();
        let cond = condition(&m, Variable::BobOutcome, 0).unwrap();
        assert!((cond.probability(Variable::AliceOutcome, 0) - 1.0).abs() < 1e-12);
        let int = intervene(&m, InterventionSpec::new(Variable::BobOutcome, 0)).unwrap();
        assert!((int.probability(Variable::AliceOutcome, 0) - 0.5).abs() < 1e-12);
        assert!((int.probability(Variable::BobOutcome, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_settings_leave_alice_unchanged() {
        let m = build_model(&make_phi_plus(), 0.0, FRAC_PI_4).unwrap();
        let cond = condition(&m, Variable::BobOutcome, 0).unwrap();
        assert!((cond.probability(Variable::AliceOutcome, 0) - 0.5).abs() < 1e-12);
        let r = stability_report(&m, 1e-12).unwrap();
        assert_eq!(r.verdict(), "causal-stable");
    }

    #[test]
    fn stability_verdicts() {
        let r = stability_report(&build_model(&make_phi_plus(), 0.2, 0.2).unwrap(), 1e-12).unwrap();
        assert!(r.directions.iter().all(|d| !d.stable && d.conceptual));
        assert_eq!(r.verdict(), "not causal-stable");

        let r = stability_report(&build_model(&make_product(0.3, 1.0), 0.2, 0.7).unwrap(), 1e-12).unwrap();
        assert!(r.directions.iter().all(|d| d.stable));
    }

    #[test]
    fn setting_conditioning_selects_marginal() {
        let m = CausalModel::quantum(
            vec![("phi".into(), make_product(0.0, 0.0))],
            vec![0.0, FRAC_PI_4],
            vec![0.0],
        )
        .unwrap();
        let c = condition(&m, Variable::AliceSetting, 0).unwrap();
        assert!((c.probability(Variable::AliceOutcome, 0) - 1.0).abs() < 1e-12);
        let c = condition(&m, Variable::AliceSetting, 1).unwrap();
        assert!((c.probability(Variable::AliceOutcome, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn preparation_is_a_common_cause() {
        let m = CausalModel::quantum(
            vec![("phi+".into(), make_phi_plus()), ("product".into(), make_product(0.0, 0.0))],
            vec![FRAC_PI_4],
            vec![FRAC_PI_4],
        )
        .unwrap();
        let cmp = preparation_intervention(&m, 0, 1, 0, 0, 1e-12).unwrap();
        assert!(cmp.common_cause);
        assert!((cmp.correlation_from - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_cross_setting_dependence() {
        let grid: Vec<f64> = (0..6).map(|k| k as f64 * 0.5).collect();
        let m = CausalModel::quantum(vec![("phi".into(), make_phi_plus())], grid.clone(), grid).unwrap();
        assert!(!m.kernel_depends_on(Variable::AliceOutcome, Variable::BobSetting, 1e-12).unwrap());
        assert!(!m.kernel_depends_on(Variable::BobOutcome, Variable::AliceSetting, 1e-12).unwrap());
        let p = CausalModel::quantum(vec![("p".into(), make_product(0.0, 0.0))], vec![0.0, 1.0], vec![0.0]).unwrap();
        assert!(p.kernel_depends_on(Variable::AliceOutcome, Variable::AliceSetting, 1e-12).unwrap());
    }

    #[test]
    fn out_of_domain_intervention_rejected() {
        let m = build_model(&make_phi_plus(), 0.0, 0.0).unwrap();
        assert!(intervene(&m, InterventionSpec::new(Variable::BobSetting, 3)).is_err());
        assert!(condition(&m, Variable::AliceOutcome, 2).is_err());
    }
}
