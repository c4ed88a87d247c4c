//! States, generalized measurements, Born probabilities and the state-update rule.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    embed, hermitian_eigensystem, partial_trace_keep, tensor_product, ComplexMatrix,
    ComplexVector, C64,
};
use crate::tolerance::{
    HERMITICITY_TOL, NORMALIZATION_TOL, PROBABILITY_SLACK, ZERO_PROBABILITY_EPS,
};

/// Positive, unit-trace Hermitian operator on a register with subsystem sizes `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || !matrix.is_square() || matrix.rows() != total {
            return Err(Error::Dimension(format!(
                "{}x{} matrix does not match subsystem dims {:?}",
                matrix.rows(),
                matrix.cols(),
                dims
            )));
        }
        let eig = hermitian_eigensystem(&matrix)?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > NORMALIZATION_TOL || trace.im.abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        if let Some(&low) = eig.eigenvalues.first() {
            if low < -NORMALIZATION_TOL {
                return Err(Error::InvalidState(format!(
                    "negative eigenvalue {low:e}"
                )));
            }
        }
        Ok(Self { matrix, dims })
    }

    /// Skips validation; for results of operations that preserve validity.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }

    pub fn pure(ket: &ComplexVector, dims: Vec<usize>) -> Result<Self> {
        let n = ket.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(ket.normalized().projector(), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let total: usize = dims.iter().product();
        Self {
            matrix: ComplexMatrix::identity(total).scale_real(1.0 / total as f64),
            dims,
        }
    }

    /// Tensor product of the given states, left-factor-major.
    pub fn product(factors: &[&DensityOperator]) -> Self {
        let mut matrix = ComplexMatrix::identity(1);
        let mut dims = Vec::new();
        for f in factors {
            matrix = tensor_product(&matrix, &f.matrix);
            dims.extend_from_slice(&f.dims);
        }
        Self { matrix, dims }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Reduced state on the listed subsystems.
    pub fn reduced(&self, keep: &[usize]) -> Result<Self> {
        let matrix = partial_trace_keep(&self.matrix, &self.dims, keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(Self { matrix, dims })
    }

    /// `Tr(Aρ)` for any operator of matching dimension.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} operator on a {}-dimensional state",
                op.rows(),
                op.cols(),
                self.dim()
            )));
        }
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += op[(i, j)] * self.matrix[(j, i)];
            }
        }
        Ok(acc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Target {
    Full,
    Subsystem(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOperator {
    pub id: String,
    pub operator: ComplexMatrix,
}

/// Indexed family `{Mᵢ}` with `Σ Mᵢ†Mᵢ = I`.
///
/// Operators are stored at the dimension of their target and embedded with
/// identities on the other subsystems when applied.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementModel {
    label: String,
    operators: Vec<MeasurementOperator>,
    target: Target,
}

impl MeasurementModel {
    pub fn new(
        label: impl Into<String>,
        operators: Vec<(String, ComplexMatrix)>,
        target: Target,
    ) -> Result<Self> {
        let label = label.into();
        let Some((_, first)) = operators.first() else {
            return Err(Error::InvalidModel(format!("{label}: no operators")));
        };
        let dim = first.rows();
        let mut completeness = ComplexMatrix::zeros(dim, dim);
        for (id, op) in &operators {
            if !op.is_square() || op.rows() != dim {
                return Err(Error::Dimension(format!(
                    "{label}: operator `{id}` is {}x{}, expected {dim}x{dim}",
                    op.rows(),
                    op.cols()
                )));
            }
            completeness = &completeness + &(&op.adjoint() * op);
        }
        let defect = (&completeness - &ComplexMatrix::identity(dim)).max_abs();
        if defect > NORMALIZATION_TOL {
            return Err(Error::InvalidModel(format!(
                "{label}: effects do not sum to the identity (max deviation {defect:e})"
            )));
        }
        for (i, (id, _)) in operators.iter().enumerate() {
            if operators[..i].iter().any(|(other, _)| other == id) {
                return Err(Error::InvalidModel(format!("{label}: duplicate outcome `{id}`")));
            }
        }
        Ok(Self {
            label,
            operators: operators
                .into_iter()
                .map(|(id, operator)| MeasurementOperator { id, operator })
                .collect(),
            target,
        })
    }

    /// Ideal polarization measurement along the axis at angle `theta` (radians, mod π).
    ///
    /// Outcome `par` projects onto `(cos θ, sin θ)`, `perp` onto `(−sin θ, cos θ)`.
    pub fn polarization(theta: f64, target: Target) -> Self {
        let (par, perp) = polarization_projectors(theta);
        Self {
            label: format!("polarization({theta})"),
            operators: vec![
                MeasurementOperator {
                    id: PAR.into(),
                    operator: par,
                },
                MeasurementOperator {
                    id: PERP.into(),
                    operator: perp,
                },
            ],
            target,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[MeasurementOperator] {
        &self.operators
    }

    pub fn outcome_ids(&self) -> Vec<&str> {
        self.operators.iter().map(|m| m.id.as_str()).collect()
    }

    pub fn outcome_index(&self, id: &str) -> Result<usize> {
        self.operators
            .iter()
            .position(|m| m.id == id)
            .ok_or_else(|| Error::UnknownOutcome(id.to_string()))
    }

    pub fn operator(&self, outcome: usize) -> Result<&ComplexMatrix> {
        self.operators
            .get(outcome)
            .map(|m| &m.operator)
            .ok_or_else(|| Error::UnknownOutcome(outcome.to_string()))
    }

    /// `Eᵢ = Mᵢ†Mᵢ` at the target's dimension.
    pub fn effect(&self, outcome: usize) -> Result<ComplexMatrix> {
        let m = self.operator(outcome)?;
        Ok(&m.adjoint() * m)
    }

    /// Embeds a target-level operator into a register with subsystem sizes `dims`.
    pub fn embed_into(&self, op: &ComplexMatrix, dims: &[usize]) -> Result<ComplexMatrix> {
        match self.target {
            Target::Full => {
                let total: usize = dims.iter().product();
                if op.rows() != total {
                    return Err(Error::Dimension(format!(
                        "{}: operator dimension {} vs register dimension {total}",
                        self.label,
                        op.rows()
                    )));
                }
                Ok(op.clone())
            }
            Target::Subsystem(k) => embed(op, dims, k),
        }
    }

    pub fn embedded_operator(&self, outcome: usize, dims: &[usize]) -> Result<ComplexMatrix> {
        self.embed_into(self.operator(outcome)?, dims)
    }

    pub fn embedded_effect(&self, outcome: usize, dims: &[usize]) -> Result<ComplexMatrix> {
        self.embed_into(&self.effect(outcome)?, dims)
    }

    /// True iff the model acts on a subsystem disjoint from `other`'s.
    pub fn disjoint_from(&self, other: &MeasurementModel) -> bool {
        matches!((self.target, other.target), (Target::Subsystem(a), Target::Subsystem(b)) if a != b)
    }
}

pub const PAR: &str = "par";
pub const PERP: &str = "perp";

pub fn polarization_ket(theta: f64) -> ComplexVector {
    ComplexVector::from_real(&[theta.cos(), theta.sin()])
}

/// `(|θ⟩⟨θ|, |θ⊥⟩⟨θ⊥|)` for the polarization axis at `theta`.
pub fn polarization_projectors(theta: f64) -> (ComplexMatrix, ComplexMatrix) {
    let (s, c) = theta.sin_cos();
    let par = ComplexVector::from_real(&[c, s]).projector();
    let perp = ComplexVector::from_real(&[-s, c]).projector();
    (par, perp)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    name: String,
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(name: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::Hermiticity(defect));
        }
        Ok(Self {
            name: name.into(),
            matrix,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Born probability `Tr(Eρ)` of an effect, clamped into `[0, 1]`.
pub fn born_probability(rho: &DensityOperator, effect: &ComplexMatrix) -> Result<f64> {
    if !effect.is_square() || effect.rows() != rho.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} effect on a {}-dimensional state",
            effect.rows(),
            effect.cols(),
            rho.dim()
        )));
    }
    let eig = hermitian_eigensystem(effect).map_err(|e| match e {
        Error::Hermiticity(d) => Error::Effect(format!("not Hermitian (defect {d:e})")),
        other => other,
    })?;
    let (lo, hi) = (eig.eigenvalues[0], eig.eigenvalues[eig.eigenvalues.len() - 1]);
    if lo < -NORMALIZATION_TOL || hi > 1.0 + NORMALIZATION_TOL {
        return Err(Error::Effect(format!(
            "spectrum [{lo}, {hi}] outside [0, 1]"
        )));
    }
    Ok(clamp_probability(rho.expectation(effect)?.re))
}

pub(crate) fn clamp_probability(p: f64) -> f64 {
    debug_assert!(
        (-PROBABILITY_SLACK * 1e3..=1.0 + PROBABILITY_SLACK * 1e3).contains(&p),
        "probability {p} far outside [0, 1]"
    );
    p.clamp(0.0, 1.0)
}

/// Born probabilities of every outcome of `model` in state `rho`.
pub fn outcome_distribution(rho: &DensityOperator, model: &MeasurementModel) -> Result<Vec<f64>> {
    (0..model.len())
        .map(|i| {
            let e = model.embedded_effect(i, rho.dims())?;
            Ok(clamp_probability(rho.expectation(&e)?.re))
        })
        .collect()
}

/// `ρ → MᵢρMᵢ† / Tr[MᵢρMᵢ†]`.
pub fn update_state(
    rho: &DensityOperator,
    model: &MeasurementModel,
    outcome: usize,
) -> Result<DensityOperator> {
    let m = model.embedded_operator(outcome, rho.dims())?;
    apply_operator(rho, &m, &model.operators[outcome].id)
}

/// Applies a single (already embedded) measurement operator and renormalizes.
pub(crate) fn apply_operator(
    rho: &DensityOperator,
    m: &ComplexMatrix,
    outcome_id: &str,
) -> Result<DensityOperator> {
    let unnormalized = m.sandwich(rho.matrix())?;
    let p = unnormalized.trace().re;
    if p <= ZERO_PROBABILITY_EPS {
        return Err(Error::ZeroProbabilityOutcome {
            outcome: outcome_id.to_string(),
            probability: p,
            context: None,
        });
    }
    let scaled = unnormalized.scale_real(1.0 / p);
    // Restore exact Hermiticity lost to rounding.
    let hermitian = (&scaled + &scaled.adjoint()).scale_real(0.5);
    Ok(DensityOperator::from_trusted(hermitian, rho.dims().to_vec()))
}

/// Ideal projective measurement built from the spectral projectors of `obs`.
/// Outcome ids are the eigenvalues.
pub fn spectral_measurement(obs: &Observable, target: Target) -> Result<MeasurementModel> {
    let eig = hermitian_eigensystem(&obs.matrix)?;
    let operators = eig
        .eigenvalues
        .iter()
        .zip(eig.projectors)
        .map(|(l, p)| (format_eigenvalue(*l), p))
        .collect();
    MeasurementModel::new(format!("spectral({})", obs.name), operators, target)
}

fn format_eigenvalue(l: f64) -> String {
    let rounded = (l * 1e9).round() / 1e9;
    // avoid "-0"
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

/// `P(i, j)` for two compatible measurements on disjoint subsystems.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointTable {
    pub outcomes_a: Vec<String>,
    pub outcomes_b: Vec<String>,
    /// `probs[i][j] = P(A = i, B = j)`.
    pub probs: Vec<Vec<f64>>,
}

impl JointTable {
    pub fn marginal_a(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.outcomes_b.len())
            .map(|j| self.probs.iter().map(|row| row[j]).sum())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i][j]
    }
}

pub fn joint_distribution(
    rho: &DensityOperator,
    model_a: &MeasurementModel,
    model_b: &MeasurementModel,
) -> Result<JointTable> {
    if !model_a.disjoint_from(model_b) {
        return Err(Error::Compatibility(format!(
            "`{}` targets {:?} and `{}` targets {:?}",
            model_a.label, model_a.target, model_b.label, model_b.target
        )));
    }
    let effects_b: Vec<ComplexMatrix> = (0..model_b.len())
        .map(|j| model_b.embedded_effect(j, rho.dims()))
        .collect::<Result<_>>()?;
    let mut probs = Vec::with_capacity(model_a.len());
    for i in 0..model_a.len() {
        let ea = model_a.embedded_effect(i, rho.dims())?;
        let row = effects_b
            .iter()
            .map(|eb| Ok(clamp_probability(rho.expectation(&(&ea * eb))?.re)))
            .collect::<Result<Vec<f64>>>()?;
        probs.push(row);
    }
    Ok(JointTable {
        outcomes_a: model_a.outcome_ids().into_iter().map(String::from).collect(),
        outcomes_b: model_b.outcome_ids().into_iter().map(String::from).collect(),
        probs,
    })
}

/// Which side's outcome is conditioned on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Given {
    A(usize),
    B(usize),
}

/// `P(· | given) = P(·, given) / P(given)`, as a distribution over the other side.
pub fn conditional_probability(joint: &JointTable, given: Given) -> Result<Vec<f64>> {
    let (row, label): (Vec<f64>, &str) = match given {
        Given::B(j) => (
            joint.probs.iter().map(|r| r[j]).collect(),
            &joint.outcomes_b[j],
        ),
        Given::A(i) => (joint.probs[i].clone(), &joint.outcomes_a[i]),
    };
    let total: f64 = row.iter().sum();
    if total <= ZERO_PROBABILITY_EPS {
        return Err(Error::ZeroProbabilityOutcome {
            outcome: label.to_string(),
            probability: total,
            context: None,
        });
    }
    Ok(row.into_iter().map(|p| p / total).collect())
}
