//! Commutation checks across spacelike separation: measurement operators of
//! scenario events, and a finite lattice net of local matrix algebras.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agents::Scenario;
use crate::error::{Error, Result};
use crate::linalg::{anticommutator, commutator, embed, tensor_all, ComplexMatrix, C64};
use crate::optimize::nelder_mead;
use crate::quantum::DensityOperator;
use crate::spacetime::{is_spacelike, regions_spacelike_separated, Event, Region};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutationViolation {
    pub first_event: String,
    pub second_event: String,
    pub first_outcome: String,
    pub second_outcome: String,
    /// Max entry of `[M_i, M_j]`.
    pub commutator_norm: f64,
    /// True when `{M_i, M_j}` vanishes within tolerance.
    pub anticommutes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongMicrocausality {
    pub holds: bool,
    pub violations: Vec<CommutationViolation>,
}

impl StrongMicrocausality {
    /// True when every violating pair anticommutes.
    pub fn all_violations_anticommute(&self) -> bool {
        self.violations.iter().all(|v| v.anticommutes)
    }
}

/// Every measurement operator of each spacelike-separated pair of events
/// must commute with every operator of the other.
pub fn check_strong_microcausality(scenario: &Scenario, tol: f64) -> Result<StrongMicrocausality> {
    let events = scenario.events();
    let mut violations = Vec::new();
    for i in 0..events.len() {
        for j in i + 1..events.len() {
            if !is_spacelike(&events[i].location, &events[j].location) {
                continue;
            }
            let ops_i = scenario.embedded_operators(i);
            let ops_j = scenario.embedded_operators(j);
            for (a, ma) in ops_i.iter().enumerate() {
                for (b, mb) in ops_j.iter().enumerate() {
                    let norm = commutator(ma, mb)?.max_abs();
                    if norm > tol {
                        violations.push(CommutationViolation {
                            first_event: events[i].label.clone(),
                            second_event: events[j].label.clone(),
                            first_outcome: events[i].model.operators()[a].id.clone(),
                            second_outcome: events[j].model.operators()[b].id.clone(),
                            commutator_norm: norm,
                            anticommutes: anticommutator(ma, mb)?.max_abs() <= tol,
                        });
                    }
                }
            }
        }
    }
    Ok(StrongMicrocausality {
        holds: violations.is_empty(),
        violations,
    })
}

/// Generators of a local algebra, each embedded in the full net register.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizedOperatorSet {
    pub region: Region,
    pub operators: Vec<ComplexMatrix>,
    pub site_support: BTreeSet<usize>,
}

/// Finite net: each region is assigned the full matrix algebra of the sites it contains.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeNet {
    sites: Vec<Event>,
    site_dim: usize,
    overrides: Vec<(Region, BTreeSet<usize>)>,
}

pub const MAX_NET_DIMENSION: usize = 64;

impl LatticeNet {
    pub fn new(sites: Vec<Event>, site_dim: usize) -> Result<Self> {
        if site_dim < 2 {
            return Err(Error::Precondition("site dimension must be at least 2".into()));
        }
        let total = u32::try_from(sites.len())
            .ok()
            .and_then(|n| site_dim.checked_pow(n));
        if total.is_none_or(|d| d > MAX_NET_DIMENSION) {
            return Err(Error::Dimension(format!(
                "{} sites of dimension {site_dim} exceed {MAX_NET_DIMENSION}",
                sites.len()
            )));
        }
        if let Some(first) = sites.first() {
            if sites.iter().any(|s| s.spatial_dims() != first.spatial_dims()) {
                return Err(Error::Dimension("sites with mixed spatial dimension".into()));
            }
        }
        Ok(Self {
            sites,
            site_dim,
            overrides: Vec::new(),
        })
    }

    /// Qubit sites on a line at `t = 0`, positions `x = 0, spacing, 2·spacing, …`.
    pub fn chain(n: usize, spacing: f64) -> Result<Self> {
        Self::new(
            (0..n).map(|k| Event::at(0.0, k as f64 * spacing)).collect(),
            2,
        )
    }

    /// Forces the support of `region`, regardless of which sites it contains.
    /// Used to build deliberately mislabeled nets.
    pub fn with_support_override(mut self, region: Region, sites: BTreeSet<usize>) -> Self {
        self.overrides.push((region, sites));
        self
    }

    pub fn sites(&self) -> &[Event] {
        &self.sites
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.site_dim; self.sites.len()]
    }

    pub fn dimension(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn support(&self, region: &Region) -> BTreeSet<usize> {
        if let Some((_, s)) = self.overrides.iter().find(|(r, _)| r == region) {
            return s.clone();
        }
        (0..self.sites.len())
            .filter(|&k| region.contains(&self.sites[k]))
            .collect()
    }

    /// Matrix units `|j⟩⟨k|` on every supported site; they span the local algebra.
    pub fn local_generators(&self, region: &Region) -> Result<LocalizedOperatorSet> {
        let dims = self.dims();
        let site_support = self.support(region);
        let mut operators = Vec::new();
        for &site in &site_support {
            for j in 0..self.site_dim {
                for k in 0..self.site_dim {
                    let mut unit = ComplexMatrix::zeros(self.site_dim, self.site_dim);
                    unit[(j, k)] = C64::new(1.0, 0.0);
                    operators.push(embed(&unit, &dims, site)?);
                }
            }
        }
        Ok(LocalizedOperatorSet {
            region: region.clone(),
            operators,
            site_support,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AlgebraicVerdict {
    Holds,
    Violated,
    /// The regions are not spacelike separated.
    NotApplicable,
}

/// `[A, B] = 0` for all `A ∈ 𝔄(r1)`, `B ∈ 𝔄(r2)`, checked on generators
/// (sufficient by bilinearity).
pub fn check_algebraic_microcausality(
    net: &LatticeNet,
    r1: &Region,
    r2: &Region,
    tol: f64,
) -> Result<AlgebraicVerdict> {
    if !regions_spacelike_separated(r1, r2)? {
        return Ok(AlgebraicVerdict::NotApplicable);
    }
    let g1 = net.local_generators(r1)?;
    let g2 = net.local_generators(r2)?;
    for a in &g1.operators {
        for b in &g2.operators {
            if commutator(a, b)?.max_abs() > tol {
                return Ok(AlgebraicVerdict::Violated);
            }
        }
    }
    Ok(AlgebraicVerdict::Holds)
}

/// For `r1 ⊆ r2`, whether `𝔄(r1) ⊆ 𝔄(r2)` (site support inclusion).
pub fn check_isotony(net: &LatticeNet, r1: &Region, r2: &Region) -> Result<bool> {
    if !r2.contains_region(r1) {
        return Err(Error::Precondition("isotony needs the first region inside the second".into()));
    }
    Ok(net.support(r1).is_subset(&net.support(r2)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetBellResult {
    /// Best `|S|` found.
    pub value: f64,
    /// Bloch angles `(θ, φ)` per supported site for `A, A′, B, B′`.
    pub settings: [Vec<(f64, f64)>; 4],
}

fn bloch_observable(theta: f64, phi: f64) -> ComplexMatrix {
    // U(θ,φ) σz U† = n·σ
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(s, -phi);
    ComplexMatrix::new(2, 2, vec![C64::new(c, 0.0), e, e.conj(), C64::new(-c, 0.0)])
        .expect("finite entries")
}

fn region_observable(net: &LatticeNet, support: &[usize], params: &[f64]) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = (0..net.sites.len())
        .map(|site| match support.iter().position(|&s| s == site) {
            Some(k) => bloch_observable(params[2 * k], params[2 * k + 1]),
            None => ComplexMatrix::identity(net.site_dim),
        })
        .collect();
    tensor_all(factors.iter())
}

/// Best CHSH value over dichotomic product observables `⊗ n·σ` drawn from the
/// two regions' algebras, found by seeded multistart Nelder–Mead.
pub fn net_bell_correlation(
    net: &LatticeNet,
    r1: &Region,
    r2: &Region,
    state: &DensityOperator,
    seed: u64,
) -> Result<NetBellResult> {
    if net.site_dim != 2 {
        return Err(Error::Precondition("dichotomic search is defined for qubit sites".into()));
    }
    if !regions_spacelike_separated(r1, r2)? {
        return Err(Error::Precondition("regions are not spacelike separated".into()));
    }
    if state.dim() != net.dimension() {
        return Err(Error::Dimension(format!(
            "state dimension {} vs net dimension {}",
            state.dim(),
            net.dimension()
        )));
    }
    let s1: Vec<usize> = net.support(r1).into_iter().collect();
    let s2: Vec<usize> = net.support(r2).into_iter().collect();
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::Precondition("each region must contain a site".into()));
    }
    let (n1, n2) = (2 * s1.len(), 2 * s2.len());
    let split = |p: &[f64]| -> [ComplexMatrix; 4] {
        [
            region_observable(net, &s1, &p[..n1]),
            region_observable(net, &s1, &p[n1..2 * n1]),
            region_observable(net, &s2, &p[2 * n1..2 * n1 + n2]),
            region_observable(net, &s2, &p[2 * n1 + n2..]),
        ]
    };
    let chsh = |p: &[f64]| -> f64 {
        let [a, a2, b, b2] = split(p);
        let e = |x: &ComplexMatrix, y: &ComplexMatrix| state.expectation(&(x * y)).map(|z| z.re).unwrap_or(0.0);
        (e(&a, &b) - e(&a, &b2) + e(&a2, &b) + e(&a2, &b2)).abs()
    };

    let dim = 2 * (n1 + n2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: (f64, Vec<f64>) = (f64::NEG_INFINITY, vec![0.0; dim]);
    for _ in 0..8 {
        let start: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let (point, value) = nelder_mead(|p| -chsh(p), &start, 0.4, 4000, 1e-13);
        if -value > best.0 {
            best = (-value, point);
        }
    }
    let p = best.1;
    let pairs = |slice: &[f64]| -> Vec<(f64, f64)> { slice.chunks(2).map(|c| (c[0], c[1])).collect() };
    Ok(NetBellResult {
        value: best.0,
        settings: [
            pairs(&p[..n1]),
            pairs(&p[n1..2 * n1]),
            pairs(&p[2 * n1..2 * n1 + n2]),
            pairs(&p[2 * n1 + n2..]),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{polarization_event, MeasurementEvent};
    use crate::bell::make_phi_plus;
    use crate::quantum::{MeasurementModel, Target};

    fn site_region(x: f64) -> Region {
        Region::new(Event::at(0.0, x), vec![0.1, 0.2]).unwrap()
    }

    #[test]
    fn pauli_observables() {
        assert!(bloch_observable(0.0, 0.0).approx_eq(&ComplexMatrix::pauli_z(), 1e-15));
        let x = bloch_observable(std::f64::consts::FRAC_PI_2, 0.0);
        assert!(x.approx_eq(&ComplexMatrix::pauli_x(), 1e-15));
        let y = bloch_observable(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        assert!(y.approx_eq(&ComplexMatrix::pauli_y(), 1e-15));
    }

    #[test]
    fn fig4_polarizers_commute() {
        let s = Scenario::new(
            make_phi_plus(),
            Region::square(0.0, 0.0, 0.5).unwrap(),
            vec![
                polarization_event("alice", Event::at(1.0, -1.0), 0.2, 0, 0).unwrap(),
                polarization_event("bob", Event::at(1.0, 1.0), 0.9, 1, 0).unwrap(),
            ],
            vec![],
        )
        .unwrap();
        assert!(check_strong_microcausality(&s, 1e-10).unwrap().holds);
    }

    #[test]
    fn shared_factor_pauli_pair_violates() {
        let x = MeasurementModel::new("X", vec![("x".into(), ComplexMatrix::pauli_x())], Target::Full).unwrap();
        let z = MeasurementModel::new("Z", vec![("z".into(), ComplexMatrix::pauli_z())], Target::Full).unwrap();
        let rho = DensityOperator::maximally_mixed(vec![2]);
        let spacelike = Scenario::new(
            rho.clone(),
            Region::square(0.0, 0.0, 0.5).unwrap(),
            vec![
                MeasurementEvent::new("a", Event::at(1.0, -1.0), x.clone(), 0).unwrap(),
                MeasurementEvent::new("b", Event::at(1.0, 1.0), z.clone(), 0).unwrap(),
            ],
            vec![],
        )
        .unwrap();
        let report = check_strong_microcausality(&spacelike, 1e-10).unwrap();
        assert!(!report.holds);
        assert_eq!(report.violations.len(), 1);
        assert!((report.violations[0].commutator_norm - 2.0).abs() < 1e-12);
        assert!(report.all_violations_anticommute());

        let timelike = Scenario::new(
            rho,
            Region::square(0.0, 0.0, 0.5).unwrap(),
            vec![
                MeasurementEvent::new("a", Event::at(1.0, 0.0), x, 0).unwrap(),
                MeasurementEvent::new("b", Event::at(3.0, 0.0), z, 0).unwrap(),
            ],
            vec![],
        )
        .unwrap();
        assert!(check_strong_microcausality(&timelike, 1e-10).unwrap().holds);
    }

    #[test]
    fn disjoint_sites_commute() {
        let net = LatticeNet::chain(4, 1.0).unwrap();
        let v = check_algebraic_microcausality(&net, &site_region(0.0), &site_region(3.0), 1e-12).unwrap();
        assert_eq!(v, AlgebraicVerdict::Holds);
    }

    #[test]
    fn mislabeled_shared_site_violates() {
        let r1 = site_region(0.0);
        let r2 = site_region(3.0);
        let net = LatticeNet::chain(4, 1.0)
            .unwrap()
            .with_support_override(r2.clone(), BTreeSet::from([0, 3]));
        let v = check_algebraic_microcausality(&net, &r1, &r2, 1e-12).unwrap();
        assert_eq!(v, AlgebraicVerdict::Violated);
    }

    #[test]
    fn empty_region_is_trivial() {
        let net = LatticeNet::chain(4, 1.0).unwrap();
        let empty = site_region(10.0);
        assert!(net.support(&empty).is_empty());
        let v = check_algebraic_microcausality(&net, &site_region(0.0), &empty, 1e-12).unwrap();
        assert_eq!(v, AlgebraicVerdict::Holds);
    }

    #[test]
    fn timelike_regions_not_applicable() {
        let net = LatticeNet::chain(2, 1.0).unwrap();
        let a = Region::square(0.0, 0.0, 0.5).unwrap();
        let b = Region::square(5.0, 0.0, 0.5).unwrap();
        assert_eq!(
            check_algebraic_microcausality(&net, &a, &b, 1e-12).unwrap(),
            AlgebraicVerdict::NotApplicable
        );
    }

    #[test]
    fn isotony_examples() {
        let net = LatticeNet::chain(4, 1.0).unwrap();
        let big = Region::new(Event::at(0.0, 1.5), vec![1.0, 2.0]).unwrap();
        let small = Region::new(Event::at(0.0, 1.0), vec![0.5, 0.5]).unwrap();
        assert!(check_isotony(&net, &small, &big).unwrap());
        assert!(check_isotony(&net, &big, &big).unwrap());
        assert!(net.support(&small).len() < net.support(&big).len());
        assert!(matches!(check_isotony(&net, &big, &small), Err(Error::Precondition(_))));
    }

    #[test]
    fn net_too_large_rejected() {
        assert!(LatticeNet::chain(7, 1.0).is_err());
        assert!(LatticeNet::chain(6, 1.0).is_ok());
    }

    #[test]
    fn bell_correlation_on_phi_plus_pair() {
        let net = LatticeNet::chain(2, 3.0).unwrap();
        let r = net_bell_correlation(&net, &site_region(0.0), &site_region(3.0), &make_phi_plus(), 7).unwrap();
        assert!(r.value >= 2.8, "{}", r.value);
        assert!(r.value <= 2.0 * std::f64::consts::SQRT_2 + 1e-9);
    }
}
