//! Two-photon polarization correlations: factorizability, outcome and
//! parameter independence, CHSH values and the deterministic local bound.
//!
//! Photon L (subsystem 0) belongs to Alice, photon R (subsystem 1) to Bob.
//! Outcome index 0 is "parallel to the axis" (`par`), 1 is "perpendicular" (`perp`).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ComplexVector;
use crate::optimize::nelder_mead;
use crate::quantum::{
    joint_distribution, outcome_distribution, DensityOperator, JointTable, MeasurementModel,
    Target, PAR, PERP,
};
use crate::tolerance::ZERO_PROBABILITY_EPS;

/// `(|HH⟩ + |VV⟩)/√2`.
pub fn make_phi_plus() -> DensityOperator {
    let ket = ComplexVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
    DensityOperator::pure(&ket, vec![2, 2]).expect("Φ⁺ is a valid state")
}

/// Product of linear polarization states at angles `theta_l`, `theta_r`.
pub fn make_product(theta_l: f64, theta_r: f64) -> DensityOperator {
    let l = ComplexVector::from_real(&[theta_l.cos(), theta_l.sin()]);
    let r = ComplexVector::from_real(&[theta_r.cos(), theta_r.sin()]);
    DensityOperator::pure(&l.tensor(&r), vec![2, 2]).expect("product state is valid")
}

fn check_two_qubit(state: &DensityOperator) -> Result<()> {
    if state.dims() != [2, 2] {
        return Err(Error::Dimension(format!(
            "expected a 2⊗2 state, got dims {:?}",
            state.dims()
        )));
    }
    Ok(())
}

/// Quantum joint table for polarizers at `a` (Alice, L) and `b` (Bob, R).
pub fn quantum_joint(state: &DensityOperator, a: f64, b: f64) -> Result<JointTable> {
    check_two_qubit(state)?;
    joint_distribution(
        state,
        &MeasurementModel::polarization(a, Target::Subsystem(0)),
        &MeasurementModel::polarization(b, Target::Subsystem(1)),
    )
}

/// Finite local hidden-variable model with settings drawn from fixed lists.
///
/// `alice[λ][k]` is `P(par | a = alice_settings[k], λ)`; likewise for Bob.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LhvModel {
    weights: Vec<f64>,
    alice_settings: Vec<f64>,
    bob_settings: Vec<f64>,
    alice: Vec<Vec<f64>>,
    bob: Vec<Vec<f64>>,
}

impl LhvModel {
    pub fn new(
        weights: Vec<f64>,
        alice_settings: Vec<f64>,
        bob_settings: Vec<f64>,
        alice: Vec<Vec<f64>>,
        bob: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = weights.len();
        if n == 0 || alice.len() != n || bob.len() != n {
            return Err(Error::Dimension(format!(
                "{n} hidden values but {} / {} response rows",
                alice.len(),
                bob.len()
            )));
        }
        if weights.iter().any(|&w| !(0.0..=1.0).contains(&w))
            || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(Error::Precondition("weights must be a probability vector".into()));
        }
        let rows_ok = |rows: &[Vec<f64>], k: usize| {
            rows.iter()
                .all(|r| r.len() == k && r.iter().all(|p| (0.0..=1.0).contains(p)))
        };
        if !rows_ok(&alice, alice_settings.len()) || !rows_ok(&bob, bob_settings.len()) {
            return Err(Error::Precondition(
                "responses must give a probability per setting".into(),
            ));
        }
        Ok(Self {
            weights,
            alice_settings,
            bob_settings,
            alice,
            bob,
        })
    }

    /// Single hidden value with ±1 responses; `+1` maps to `par`.
    pub fn deterministic(
        alice_settings: Vec<f64>,
        bob_settings: Vec<f64>,
        alice: &[i8],
        bob: &[i8],
    ) -> Result<Self> {
        let to_p = |v: &[i8]| v.iter().map(|&s| if s > 0 { 1.0 } else { 0.0 }).collect();
        Self::new(
            vec![1.0],
            alice_settings,
            bob_settings,
            vec![to_p(alice)],
            vec![to_p(bob)],
        )
    }

    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        hidden_values: usize,
        alice_settings: Vec<f64>,
        bob_settings: Vec<f64>,
    ) -> Self {
        let raw: Vec<f64> = (0..hidden_values).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let drift: f64 = 1.0 - weights.iter().sum::<f64>();
        weights[0] += drift;
        let alice = (0..hidden_values)
            .map(|_| alice_settings.iter().map(|_| rng.gen()).collect())
            .collect();
        let bob = (0..hidden_values)
            .map(|_| bob_settings.iter().map(|_| rng.gen()).collect())
            .collect();
        Self {
            weights,
            alice_settings,
            bob_settings,
            alice,
            bob,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alice_settings(&self) -> &[f64] {
        &self.alice_settings
    }

    pub fn bob_settings(&self) -> &[f64] {
        &self.bob_settings
    }

    /// `P(par | a = alice_settings[k], λ)`.
    pub fn alice_response(&self, lambda: usize, k: usize) -> f64 {
        self.alice[lambda][k]
    }

    pub fn bob_response(&self, lambda: usize, k: usize) -> f64 {
        self.bob[lambda][k]
    }

    fn setting_index(settings: &[f64], angle: f64, who: &str) -> Result<usize> {
        settings
            .iter()
            .position(|&s| (s - angle).abs() <= 1e-12)
            .ok_or_else(|| Error::Precondition(format!("{who} setting {angle} not in the model")))
    }

    /// Joint table at setting indices, conditioned on a single hidden value.
    pub fn joint_given_lambda(&self, lambda: usize, ka: usize, kb: usize) -> JointTable {
        let pa = self.alice[lambda][ka];
        let pb = self.bob[lambda][kb];
        polarization_table(vec![
            vec![pa * pb, pa * (1.0 - pb)],
            vec![(1.0 - pa) * pb, (1.0 - pa) * (1.0 - pb)],
        ])
    }

    pub fn joint_at(&self, ka: usize, kb: usize) -> JointTable {
        let mut probs = vec![vec![0.0; 2]; 2];
        for (lambda, w) in self.weights.iter().enumerate() {
            let t = self.joint_given_lambda(lambda, ka, kb);
            for i in 0..2 {
                for j in 0..2 {
                    probs[i][j] += w * t.probs[i][j];
                }
            }
        }
        polarization_table(probs)
    }

    pub fn joint(&self, a: f64, b: f64) -> Result<JointTable> {
        let ka = Self::setting_index(&self.alice_settings, a, "alice")?;
        let kb = Self::setting_index(&self.bob_settings, b, "bob")?;
        Ok(self.joint_at(ka, kb))
    }
}

fn polarization_table(probs: Vec<Vec<f64>>) -> JointTable {
    JointTable {
        outcomes_a: vec![PAR.into(), PERP.into()],
        outcomes_b: vec![PAR.into(), PERP.into()],
        probs,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BellScenario {
    pub state: DensityOperator,
    pub setting_a: f64,
    pub setting_b: f64,
    pub hidden_model: Option<LhvModel>,
}

impl BellScenario {
    pub fn new(state: DensityOperator, setting_a: f64, setting_b: f64) -> Result<Self> {
        check_two_qubit(&state)?;
        Ok(Self {
            state,
            setting_a,
            setting_b,
            hidden_model: None,
        })
    }

    /// Uses `model` instead of the quantum state to generate statistics.
    pub fn with_hidden_model(mut self, model: LhvModel) -> Self {
        self.hidden_model = Some(model);
        self
    }

    pub fn at(&self, a: f64, b: f64) -> Self {
        Self {
            setting_a: a,
            setting_b: b,
            ..self.clone()
        }
    }

    pub fn joint_at(&self, a: f64, b: f64) -> Result<JointTable> {
        match &self.hidden_model {
            Some(m) => m.joint(a, b),
            None => quantum_joint(&self.state, a, b),
        }
    }

    pub fn joint(&self) -> Result<JointTable> {
        self.joint_at(self.setting_a, self.setting_b)
    }
}

/// Verdict of a single independence check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Check {
    pub holds: bool,
    pub max_gap: f64,
}

impl Check {
    fn from_gap(max_gap: f64, tol: f64) -> Self {
        Self {
            holds: max_gap <= tol,
            max_gap,
        }
    }
}

/// `max |P(A,B) − P(A)P(B)|`.
pub fn factorizability_gap(joint: &JointTable) -> f64 {
    let pa = joint.marginal_a();
    let pb = joint.marginal_b();
    let mut gap = 0.0_f64;
    for (i, row) in joint.probs.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            gap = gap.max((p - pa[i] * pb[j]).abs());
        }
    }
    gap
}

pub fn check_factorizability(s: &BellScenario, tol: f64) -> Result<Check> {
    Ok(Check::from_gap(factorizability_gap(&s.joint()?), tol))
}

/// `max |P(A|B) − P(A)|` and `max |P(B|A) − P(B)|`.
///
/// With `skip_null`, conditioning outcomes of probability ≤ ε are skipped
/// instead of raising `ZeroProbabilityOutcome`.
pub fn outcome_independence_gap(joint: &JointTable, skip_null: bool) -> Result<f64> {
    let pa = joint.marginal_a();
    let pb = joint.marginal_b();
    let mut gap = 0.0_f64;
    for (j, &pbj) in pb.iter().enumerate() {
        if pbj <= ZERO_PROBABILITY_EPS {
            if skip_null {
                continue;
            }
            return Err(Error::ZeroProbabilityOutcome {
                outcome: format!("B={}", joint.outcomes_b[j]),
                probability: pbj,
                context: None,
            });
        }
        for (i, &pai) in pa.iter().enumerate() {
            gap = gap.max((joint.probs[i][j] / pbj - pai).abs());
        }
    }
    for (i, &pai) in pa.iter().enumerate() {
        if pai <= ZERO_PROBABILITY_EPS {
            if skip_null {
                continue;
            }
            return Err(Error::ZeroProbabilityOutcome {
                outcome: format!("A={}", joint.outcomes_a[i]),
                probability: pai,
                context: None,
            });
        }
        for (j, &pbj) in pb.iter().enumerate() {
            gap = gap.max((joint.probs[i][j] / pai - pbj).abs());
        }
    }
    Ok(gap)
}

pub fn check_outcome_independence(s: &BellScenario, tol: f64) -> Result<Check> {
    Ok(Check::from_gap(outcome_independence_gap(&s.joint()?, false)?, tol))
}

fn max_spread(values: impl IntoIterator<Item = Vec<f64>>) -> f64 {
    let values: Vec<Vec<f64>> = values.into_iter().collect();
    let mut gap = 0.0_f64;
    for v in &values {
        for w in &values {
            for (x, y) in v.iter().zip(w) {
                gap = gap.max((x - y).abs());
            }
        }
    }
    gap
}

/// Alice's marginal at `s.setting_a` must not depend on Bob's setting over
/// `grid`, and symmetrically for Bob at `s.setting_b`.
pub fn check_parameter_independence(s: &BellScenario, grid: &[f64], tol: f64) -> Result<Check> {
    let alice = grid
        .iter()
        .map(|&b| Ok(s.joint_at(s.setting_a, b)?.marginal_a()))
        .collect::<Result<Vec<_>>>()?;
    let bob = grid
        .iter()
        .map(|&a| Ok(s.joint_at(a, s.setting_b)?.marginal_b()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Check::from_gap(max_spread(alice).max(max_spread(bob)), tol))
}

/// `E = P(same) − P(different)`.
pub fn correlation(joint: &JointTable) -> f64 {
    joint.probs[0][0] + joint.probs[1][1] - joint.probs[0][1] - joint.probs[1][0]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshValue {
    pub signed: f64,
    pub abs: f64,
}

fn chsh_combination(e_ab: f64, e_ab2: f64, e_a2b: f64, e_a2b2: f64) -> ChshValue {
    let signed = e_ab - e_ab2 + e_a2b + e_a2b2;
    ChshValue {
        signed,
        abs: signed.abs(),
    }
}

/// `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)`.
pub fn chsh_value(state: &DensityOperator, a: f64, a2: f64, b: f64, b2: f64) -> Result<ChshValue> {
    let e = |x, y| -> Result<f64> { Ok(correlation(&quantum_joint(state, x, y)?)) };
    Ok(chsh_combination(e(a, b)?, e(a, b2)?, e(a2, b)?, e(a2, b2)?))
}

pub fn lhv_chsh_value(model: &LhvModel, a: f64, a2: f64, b: f64, b2: f64) -> Result<ChshValue> {
    let e = |x, y| -> Result<f64> { Ok(correlation(&model.joint(x, y)?)) };
    Ok(chsh_combination(e(a, b)?, e(a, b2)?, e(a2, b)?, e(a2, b2)?))
}

/// Deterministic local strategy: ±1 response for each of two settings per side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Strategy {
    pub alice: [i8; 2],
    pub bob: [i8; 2],
}

impl Strategy {
    pub fn chsh(&self) -> f64 {
        let e = |i: usize, j: usize| f64::from(self.alice[i] * self.bob[j]);
        e(0, 0) - e(0, 1) + e(1, 0) + e(1, 1)
    }
}

/// All 16 deterministic response pairs for two binary-outcome settings per side.
pub fn deterministic_strategies() -> Vec<Strategy> {
    let responses = [[1, 1], [1, -1], [-1, 1], [-1, -1]];
    responses
        .iter()
        .flat_map(|&alice| responses.iter().map(move |&bob| Strategy { alice, bob }))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LhvBound {
    pub max_abs: f64,
    pub strategies: usize,
    pub maximizers: Vec<Strategy>,
}

/// Max `|S|` over all deterministic local strategies; mixtures cannot exceed it.
pub fn lhv_chsh_bound() -> LhvBound {
    let all = deterministic_strategies();
    let max_abs = all.iter().map(|s| s.chsh().abs()).fold(0.0, f64::max);
    let maximizers = all
        .iter()
        .copied()
        .filter(|s| s.chsh().abs() == max_abs)
        .collect();
    LhvBound {
        max_abs,
        strategies: all.len(),
        maximizers,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshOptimum {
    pub value: ChshValue,
    /// `[a, a′, b, b′]`.
    pub angles: [f64; 4],
}

/// Maximizes `|S|` over polarizer angles: exhaustive `grid⁴` search on `[0, π)`
/// followed by a Nelder–Mead polish.
pub fn optimize_chsh(state: &DensityOperator, grid: usize) -> Result<ChshOptimum> {
    check_two_qubit(state)?;
    let angles: Vec<f64> = (0..grid).map(|k| PI * k as f64 / grid as f64).collect();
    let table = angles
        .iter()
        .map(|&a| {
            angles
                .iter()
                .map(|&b| Ok(correlation(&quantum_joint(state, a, b)?)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for i in 0..grid {
        for i2 in 0..grid {
            for j in 0..grid {
                let base = table[i][j] + table[i2][j];
                for j2 in 0..grid {
                    let s = (base - table[i][j2] + table[i2][j2]).abs();
                    if s > best.0 {
                        best = (s, [i, i2, j, j2]);
                    }
                }
            }
        }
    }

    let start: Vec<f64> = best.1.iter().map(|&k| angles[k]).collect();
    let objective = |p: &[f64]| {
        chsh_value(state, p[0], p[1], p[2], p[3])
            .map(|v| -v.abs)
            .unwrap_or(f64::INFINITY)
    };
    let (point, _) = nelder_mead(objective, &start, PI / (4.0 * grid as f64), 2000, 1e-15);
    let polished = chsh_value(state, point[0], point[1], point[2], point[3])?;
    let grid_value = chsh_value(state, start[0], start[1], start[2], start[3])?;
    let (value, p) = if polished.abs >= grid_value.abs {
        (polished, point)
    } else {
        (grid_value, start)
    };
    Ok(ChshOptimum {
        value,
        angles: [p[0], p[1], p[2], p[3]].map(|x| x.rem_euclid(PI)),
    })
}

/// How a party's outcome distribution is derived from the joint table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginalRule {
    /// Sum over the partner's outcomes.
    SumOverPartner,
    /// Negative control: renormalizes by the partner's `par` outcome.
    ConditionOnPartnerPar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoSignallingReport {
    pub passed: bool,
    /// Largest deviation of Alice's distribution over Bob's choices (incl. no measurement).
    pub alice_gap: f64,
    pub bob_gap: f64,
    pub tolerance: f64,
}

pub fn verify_no_signalling(
    state: &DensityOperator,
    a_grid: &[f64],
    b_grid: &[f64],
    tol: f64,
) -> Result<NoSignallingReport> {
    verify_no_signalling_with(state, a_grid, b_grid, tol, MarginalRule::SumOverPartner)
}

pub fn verify_no_signalling_with(
    state: &DensityOperator,
    a_grid: &[f64],
    b_grid: &[f64],
    tol: f64,
    rule: MarginalRule,
) -> Result<NoSignallingReport> {
    check_two_qubit(state)?;
    let alice_side = |joint: &JointTable| -> Vec<f64> {
        match rule {
            MarginalRule::SumOverPartner => joint.marginal_a(),
            MarginalRule::ConditionOnPartnerPar => {
                let pb = joint.marginal_b()[0].max(ZERO_PROBABILITY_EPS);
                joint.probs.iter().map(|r| r[0] / pb).collect()
            }
        }
    };
    let bob_side = |joint: &JointTable| -> Vec<f64> {
        match rule {
            MarginalRule::SumOverPartner => joint.marginal_b(),
            MarginalRule::ConditionOnPartnerPar => {
                let pa = joint.marginal_a()[0].max(ZERO_PROBABILITY_EPS);
                joint.probs[0].iter().map(|p| p / pa).collect()
            }
        }
    };
    let alone = |target: usize, theta: f64| -> Result<Vec<f64>> {
        let reduced = state.reduced(&[target])?;
        outcome_distribution(&reduced, &MeasurementModel::polarization(theta, Target::Full))
    };

    let mut alice_gap = 0.0_f64;
    for &a in a_grid {
        let mut dists = vec![alone(0, a)?];
        for &b in b_grid {
            dists.push(alice_side(&quantum_joint(state, a, b)?));
        }
        alice_gap = alice_gap.max(max_spread(dists));
    }
    let mut bob_gap = 0.0_f64;
    for &b in b_grid {
        let mut dists = vec![alone(1, b)?];
        for &a in a_grid {
            dists.push(bob_side(&quantum_joint(state, a, b)?));
        }
        bob_gap = bob_gap.max(max_spread(dists));
    }
    Ok(NoSignallingReport {
        passed: alice_gap <= tol && bob_gap <= tol,
        alice_gap,
        bob_gap,
        tolerance: tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub a: f64,
    pub b: f64,
    /// `[par/par, par/perp, perp/par, perp/perp]`, Alice first.
    pub joint: [f64; 4],
    pub p_a: f64,
    pub p_b: f64,
    /// `P(A = par | B = par)`; `None` when Bob's `par` outcome is null.
    pub cond: Option<f64>,
    pub fact_gap: f64,
    pub oi_gap: f64,
    pub pi_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
    /// CHSH value at the first two Alice and first two Bob angles, when available.
    pub chsh: Option<ChshValue>,
}

/// Tabulates every `(a, b)` pair of the grids. The PI gap of a row is the
/// spread of Alice's marginal at `a` over `b_grid` plus "no measurement",
/// combined with the symmetric spread for Bob at `b` over `a_grid`.
pub fn correlation_report(
    state: &DensityOperator,
    a_grid: &[f64],
    b_grid: &[f64],
) -> Result<CorrelationReport> {
    check_two_qubit(state)?;
    let mut rows = Vec::with_capacity(a_grid.len() * b_grid.len());
    for &a in a_grid {
        let alice_ns = verify_no_signalling(state, &[a], b_grid, f64::INFINITY)?;
        for &b in b_grid {
            let bob_ns = verify_no_signalling(state, a_grid, &[b], f64::INFINITY)?;
            let joint = quantum_joint(state, a, b)?;
            let pa = joint.marginal_a();
            let pb = joint.marginal_b();
            let cond = (pb[0] > ZERO_PROBABILITY_EPS).then(|| joint.probs[0][0] / pb[0]);
            rows.push(CorrelationRow {
                a,
                b,
                joint: [
                    joint.probs[0][0],
                    joint.probs[0][1],
                    joint.probs[1][0],
                    joint.probs[1][1],
                ],
                p_a: pa[0],
                p_b: pb[0],
                cond,
                fact_gap: factorizability_gap(&joint),
                oi_gap: outcome_independence_gap(&joint, true)?,
                pi_gap: alice_ns.alice_gap.max(bob_ns.bob_gap),
            });
        }
    }
    let chsh = if a_grid.len() >= 2 && b_grid.len() >= 2 {
        Some(chsh_value(state, a_grid[0], a_grid[1], b_grid[0], b_grid[1])?)
    } else {
        None
    };
    Ok(CorrelationReport { rows, chsh })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};

    #[test]
    fn phi_plus_amplitudes() {
        let rho = make_phi_plus();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
        // ⟨HH|Φ⁺⟩⟨Φ⁺|HH⟩ = 1/2, ⟨HV|…|HV⟩ = 0
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(0, 3)].re - 0.5).abs() < 1e-15);
        assert_eq!(rho.matrix()[(1, 1)].re, 0.0);
    }

    #[test]
    fn factorizability_examples() {
        let product = BellScenario::new(make_product(0.2, 1.1), 0.3, 0.9).unwrap();
        let c = check_factorizability(&product, 1e-12).unwrap();
        assert!(c.holds && c.max_gap <= 1e-12);

        let same = BellScenario::new(make_phi_plus(), 0.7, 0.7).unwrap();
        let c = check_factorizability(&same, 1e-12).unwrap();
        assert!(!c.holds);
        assert!((c.max_gap - 0.25).abs() < 1e-12);

        let diagonal = BellScenario::new(make_phi_plus(), 0.1, 0.1 + FRAC_PI_4).unwrap();
        assert!(check_factorizability(&diagonal, 1e-12).unwrap().holds);
    }

    #[test]
    fn outcome_independence_examples() {
        let product = BellScenario::new(make_product(0.2, 1.1), 0.3, 0.9).unwrap();
        assert!(check_outcome_independence(&product, 1e-12).unwrap().holds);

        let same = BellScenario::new(make_phi_plus(), 0.0, 0.0).unwrap();
        let c = check_outcome_independence(&same, 1e-12).unwrap();
        assert!((c.max_gap - 0.5).abs() < 1e-12);

        let diagonal = BellScenario::new(make_phi_plus(), 0.0, FRAC_PI_4).unwrap();
        assert!(check_outcome_independence(&diagonal, 1e-12).unwrap().holds);
    }

    #[test]
    fn outcome_independence_null_conditioning() {
        // |H⟩|H⟩ measured at 0: Bob never sees perp.
        let s = BellScenario::new(make_product(0.0, 0.0), 0.0, 0.0).unwrap();
        assert!(matches!(
            check_outcome_independence(&s, 1e-12),
            Err(Error::ZeroProbabilityOutcome { .. })
        ));
    }

    #[test]
    fn parameter_independence_holds_for_phi_plus() {
        let s = BellScenario::new(make_phi_plus(), 0.3, 1.2).unwrap();
        let grid: Vec<f64> = (0..12).map(|k| k as f64 * PI / 12.0).collect();
        let c = check_parameter_independence(&s, &grid, 1e-12).unwrap();
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn tsirelson_angles() {
        let v = chsh_value(&make_phi_plus(), 0.0, FRAC_PI_4, FRAC_PI_8, 3.0 * FRAC_PI_8).unwrap();
        assert!((v.signed - 2.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn degenerate_settings_give_two() {
        let v = chsh_value(&make_phi_plus(), 0.5, 0.5, 0.5, 0.5).unwrap();
        assert!((v.signed - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lhv_enumeration() {
        let bound = lhv_chsh_bound();
        assert_eq!(bound.strategies, 16);
        assert_eq!(bound.max_abs, 2.0);
        let anti = Strategy {
            alice: [1, 1],
            bob: [-1, -1],
        };
        assert_eq!(anti.chsh(), -2.0);
    }

    #[test]
    fn deterministic_model_matches_strategy() {
        let settings = vec![0.0, 1.0];
        let m = LhvModel::deterministic(settings.clone(), settings, &[1, 1], &[-1, -1]).unwrap();
        let v = lhv_chsh_value(&m, 0.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(v.signed, -2.0);
    }

    #[test]
    fn lhv_rejects_unknown_setting() {
        let m = LhvModel::deterministic(vec![0.0], vec![0.0], &[1], &[1]).unwrap();
        assert!(m.joint(0.5, 0.0).is_err());
    }

    #[test]
    fn no_signalling_negative_control_fails() {
        let grid: Vec<f64> = (0..8).map(|k| k as f64 * PI / 8.0).collect();
        let good = verify_no_signalling(&make_phi_plus(), &grid, &grid, 1e-12).unwrap();
        assert!(good.passed);
        let broken = verify_no_signalling_with(
            &make_phi_plus(),
            &grid,
            &grid,
            1e-12,
            MarginalRule::ConditionOnPartnerPar,
        )
        .unwrap();
        assert!(!broken.passed);
    }

    #[test]
    fn rejects_non_two_qubit_state() {
        let rho = DensityOperator::maximally_mixed(vec![4]);
        assert!(BellScenario::new(rho, 0.0, 0.0).is_err());
    }
}
