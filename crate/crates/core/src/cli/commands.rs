use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{lookup_region, ConfigError, ScenarioConfig};
use super::report::{format_short, Cell, Provenance, Report, Table};
use crate::agents::{assign_state, charlie_consistency, OrderPolicy};
use crate::bell::{
    chsh_value, correlation_report, lhv_chsh_bound, optimize_chsh, verify_no_signalling,
};
use crate::causal::{
    build_model, intervene, preparation_intervention, stability_report, CausalModel,
    InterventionSpec, Variable,
};
use crate::microcausality::{
    check_algebraic_microcausality, check_isotony, check_strong_microcausality,
    net_bell_correlation, AlgebraicVerdict,
};
use crate::quantum::DensityOperator;
use crate::spacetime::{is_spacelike, regions_spacelike_separated};
use crate::Error;

const DEFAULT_CHSH_GRID: usize = 32;
const DEFAULT_CHSH_SAMPLES: usize = 10_000;

/// Anything that stops a command before it can produce a report.
#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Library(Error),
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::Config(e) => write!(f, "config error {e}"),
            CommandError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError::Library(e)
    }
}

type CmdResult = Result<Report, CommandError>;

fn two_photon_state(config: &ScenarioConfig) -> Result<DensityOperator, ConfigError> {
    let state = config.state()?;
    if state.dims() != [2, 2] {
        return Err(ConfigError::new(
            "preparation.state",
            format!("needs a two-photon state, got factors {:?}", state.dims()),
        ));
    }
    Ok(state)
}

/// Joint and conditional tables with factorizability, outcome-independence and
/// parameter-independence gaps over the configured angle grids.
pub fn cmd_epr(config: &ScenarioConfig, prov: Provenance) -> CmdResult {
    let tol = prov.tolerance;
    let state = two_photon_state(config)?;
    let a_grid = config.alice_angles()?;
    let b_grid = config.bob_angles()?;
    let corr = correlation_report(&state, &a_grid, &b_grid)?;

    let mut report = Report::new("epr", prov);
    let mut table = Table::new(
        "epr",
        &[
            "a",
            "b",
            "P_par_par",
            "P_par_perp",
            "P_perp_par",
            "P_perp_perp",
            "P_A",
            "P_B",
            "cond",
            "fact_gap",
            "oi_gap",
            "pi_gap",
        ],
    );
    for r in &corr.rows {
        let mut row: Vec<Cell> = vec![r.a.into(), r.b.into()];
        row.extend(r.joint.iter().map(|&p| Cell::from(p)));
        row.extend([r.p_a.into(), r.p_b.into(), r.cond.into()]);
        row.extend([r.fact_gap.into(), r.oi_gap.into(), r.pi_gap.into()]);
        table.push(row);
    }
    report.tables.push(table);

    let max = |f: fn(&crate::bell::CorrelationRow) -> f64| corr.rows.iter().map(f).fold(0.0, f64::max);
    let pi_gap = max(|r| r.pi_gap);
    let norm_gap = max(|r| (r.joint.iter().sum::<f64>() - 1.0).abs());
    report.check(
        "normalization",
        norm_gap <= tol,
        format!("max |Σ P - 1| = {}", format_short(norm_gap)),
    );
    report.check(
        "parameter_independence",
        pi_gap <= tol,
        format!("max PI gap {} over {} rows", format_short(pi_gap), corr.rows.len()),
    );
    let ns = verify_no_signalling(&state, &a_grid, &b_grid, tol)?;
    report.check(
        "no_signalling",
        ns.passed,
        format!(
            "Alice gap {}, Bob gap {}",
            format_short(ns.alice_gap),
            format_short(ns.bob_gap)
        ),
    );
    report.note(format!("max factorizability gap {}", format_short(max(|r| r.fact_gap))));
    report.note(format!("max outcome-independence gap {}", format_short(max(|r| r.oi_gap))));
    if let Some(s) = corr.chsh {
        report.note(format!("CHSH over the 2x2 grid: S = {}", format_short(s.signed)));
    }
    Ok(report)
}

/// LHV bound by enumeration, optimized quantum value, and a seeded random
/// scan against the Tsirelson bound.
pub fn cmd_chsh(config: &ScenarioConfig, prov: Provenance) -> CmdResult {
    let tol = prov.tolerance;
    let seed = prov.seed;
    let state = two_photon_state(config)?;
    let grid = config.analysis.chsh_grid.unwrap_or(DEFAULT_CHSH_GRID).max(2);
    let samples = config.analysis.chsh_samples.unwrap_or(DEFAULT_CHSH_SAMPLES);

    let lhv = lhv_chsh_bound();
    let opt = optimize_chsh(&state, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scan_max = 0.0_f64;
    for _ in 0..samples {
        let [a, a2, b, b2] = [(); 4].map(|_| rng.gen_range(0.0..PI));
        scan_max = scan_max.max(chsh_value(&state, a, a2, b, b2)?.abs);
    }
    let tsirelson = 2.0 * SQRT_2;

    let mut report = Report::new("chsh", prov);
    let mut table = Table::new("chsh", &["quantity", "value"]);
    let rows: [(&str, f64); 8] = [
        ("lhv_bound", lhv.max_abs),
        ("quantum_optimum", opt.value.abs),
        ("a", opt.angles[0]),
        ("a_prime", opt.angles[1]),
        ("b", opt.angles[2]),
        ("b_prime", opt.angles[3]),
        ("random_scan_max", scan_max),
        ("tsirelson", tsirelson),
    ];
    for (name, v) in rows {
        table.push(vec![name.into(), v.into()]);
    }
    report.tables.push(table);

    report.check(
        "lhv_bound",
        (lhv.max_abs - 2.0).abs() <= tol && lhv.strategies == 16,
        format!(
            "max |S| = {} over {} deterministic strategies ({} maximizers)",
            format_short(lhv.max_abs),
            lhv.strategies,
            lhv.maximizers.len()
        ),
    );
    let worst = opt.value.abs.max(scan_max);
    report.check(
        "tsirelson",
        worst <= tsirelson + tol,
        format!(
            "optimum {}, random scan max {} over {samples} settings",
            format_short(opt.value.abs),
            format_short(scan_max)
        ),
    );
    let exceeds = opt.value.abs > lhv.max_abs + tol;
    report.note(format!(
        "quantum optimum {} the LHV bound",
        if exceeds { "exceeds" } else { "does not exceed" }
    ));
    Ok(report)
}

/// Per-agent-point consistency of light-cone state assignment, plus the
/// commutator audit of spacelike-separated events.
pub fn cmd_consistency(config: &ScenarioConfig, prov: Provenance) -> CmdResult {
    let tol = prov.tolerance;
    let scenario = config.scenario()?;
    let strong = check_strong_microcausality(&scenario, tol)?;

    let mut report = Report::new("consistency", prov);
    let mut commutators = Table::new(
        "commutators",
        &[
            "first_event",
            "second_event",
            "first_outcome",
            "second_outcome",
            "commutator_norm",
            "anticommutes",
        ],
    );
    for v in &strong.violations {
        commutators.push(vec![
            v.first_event.as_str().into(),
            v.second_event.as_str().into(),
            v.first_outcome.as_str().into(),
            v.second_outcome.as_str().into(),
            v.commutator_norm.into(),
            v.anticommutes.into(),
        ]);
    }

    let mut points = Table::new(
        "points",
        &["agent", "t", "x", "applied", "orderings", "distance", "consistent"],
    );
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, line) in scenario.agents() {
        for (k, p) in line.points().iter().enumerate() {
            checked += 1;
            let past = scenario.past_of(p);
            let has_spacelike_pair = past.iter().enumerate().any(|(i, &e)| {
                past[i + 1..].iter().any(|&f| {
                    is_spacelike(&scenario.events()[e].location, &scenario.events()[f].location)
                })
            });
            let x: Vec<String> = p.x.iter().map(|v| format_short(*v)).collect();
            let (applied, orderings, distance, consistent, permuted) = if has_spacelike_pair {
                let trace = assign_state(&scenario, p, OrderPolicy::Lexicographic)?;
                let c = charlie_consistency(&scenario, p, tol)?;
                (trace.applied, c.orderings, c.distance, c.consistent, c.permuted)
            } else {
                let trace = assign_state(&scenario, p, OrderPolicy::Lexicographic)?;
                (trace.applied, 1, 0.0, true, Vec::new())
            };
            if !consistent {
                let witnesses: Vec<String> = strong
                    .violations
                    .iter()
                    .filter(|v| permuted.contains(&v.first_event) && permuted.contains(&v.second_event))
                    .map(|v| format!("{}/{}", v.first_event, v.second_event))
                    .fold(Vec::new(), |mut acc, w| {
                        if !acc.contains(&w) {
                            acc.push(w);
                        }
                        acc
                    });
                failures.push(format!(
                    "{name}[{k}] distance {} (non-commuting pair {})",
                    format_short(distance),
                    if witnesses.is_empty() { "-".into() } else { witnesses.join(", ") }
                ));
            }
            points.push(vec![
                name.as_str().into(),
                p.t.into(),
                x.join(";").into(),
                applied.join(" ").into(),
                orderings.into(),
                distance.into(),
                consistent.into(),
            ]);
        }
    }
    report.tables.push(points);
    report.tables.push(commutators);

    report.check(
        "consistency",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checked} agent points, all orderings agree")
        } else {
            format!("inconsistent at {}", failures.join("; "))
        },
    );
    let anticommuting = !strong.holds && strong.all_violations_anticommute();
    report.check(
        "strong_microcausality",
        strong.holds || anticommuting,
        if strong.holds {
            "spacelike-separated operators commute".to_string()
        } else if anticommuting {
            format!(
                "{} non-commuting pairs, all anticommuting (flag: anticommuting)",
                strong.violations.len()
            )
        } else {
            format!("{} non-commuting operator pairs", strong.violations.len())
        },
    );
    if anticommuting {
        report.note("flag: anticommuting");
    }
    Ok(report)
}

/// Conditioning versus intervening on outcomes, settings and the preparation.
pub fn cmd_intervene(config: &ScenarioConfig, prov: Provenance) -> CmdResult {
    let tol = prov.tolerance;
    let state = two_photon_state(config)?;
    let a = config.alice_angles()?[0];
    let b = config.bob_angles()?[0];
    let mut report = Report::new("intervene", prov);

    let model = build_model(&state, a, b)?;
    let stability = stability_report(&model, tol)?;
    let mut table = Table::new(
        "stability",
        &["direction", "cause", "effect", "cause_value", "conceptual", "conditioned", "intervened", "stable"],
    );
    for d in &stability.directions {
        for r in &d.rows {
            table.push(vec![
                d.name.into(),
                d.cause.symbol().into(),
                d.effect.symbol().into(),
                outcome_name(r.cause_value).into(),
                d.conceptual.into(),
                r.conditioned.into(),
                r.intervened.into(),
                r.stable.into(),
            ]);
        }
        if let Some(r) = d.rows.iter().find(|r| r.cause_value == 0) {
            report.note(format!(
                "{}: P({e}|{c})={}, P({e}|do {c})={} → {}",
                d.name,
                format_short(r.conditioned),
                format_short(r.intervened),
                if d.stable { "CAUSAL-STABLE" } else { "NOT CAUSAL-STABLE" },
                e = d.effect.symbol(),
                c = d.cause.symbol(),
            ));
        }
    }
    report.tables.push(table);
    report.note(format!("verdict: {}", stability.verdict()));

    // Interventions on X leave Y at its observational marginal.
    let marginal_y = model.joint().probability(Variable::AliceOutcome, 0);
    let mut drift = 0.0_f64;
    for value in 0..2 {
        let d = intervene(&model, InterventionSpec::new(Variable::BobOutcome, value))?;
        drift = drift.max((d.probability(Variable::AliceOutcome, 0) - marginal_y).abs());
    }
    report.check(
        "outcome_intervention_marginal",
        drift <= tol,
        format!("max |P(Y|do X) - P(Y)| = {}", format_short(drift)),
    );

    let sweep = match &config.analysis.b_sweep {
        Some(spec) => spec.expand("analysis.b_sweep")?,
        None => config.bob_angles()?,
    };
    let sweep_model = CausalModel::quantum(vec![("state".into(), state.clone())], vec![a], sweep.clone())?;
    let mut setting_table = Table::new("setting_sweep", &["b", "P_Y_par"]);
    let mut column = Vec::with_capacity(sweep.len());
    for (k, &bk) in sweep.iter().enumerate() {
        let p = intervene(&sweep_model, InterventionSpec::new(Variable::BobSetting, k))?
            .probability(Variable::AliceOutcome, 0);
        column.push(p);
        setting_table.push(vec![bk.into(), p.into()]);
    }
    report.tables.push(setting_table);
    let spread = column.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - column.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    report.check(
        "setting_intervention_marginal",
        spread <= tol,
        format!("Alice marginal spread under do(b) over {} settings: {}", sweep.len(), format_short(spread)),
    );

    if let Some(alt) = &config.preparation()?.alternative {
        let alt_state = alt.build("preparation.alternative")?;
        if alt_state.dims() != [2, 2] {
            return Err(ConfigError::new("preparation.alternative", "needs a two-photon state").into());
        }
        let prep_model = CausalModel::quantum(
            vec![
                (config.preparation()?.state.name(), state),
                (alt.name(), alt_state),
            ],
            vec![a],
            vec![b],
        )?;
        let cmp = preparation_intervention(&prep_model, 0, 1, 0, 0, tol)?;
        let mut prep_table = Table::new("preparation", &["preparation", "P_par_par", "P_par_perp", "P_perp_par", "P_perp_perp", "correlation"]);
        for (name, j, c) in [
            (&cmp.from, cmp.joint_from, cmp.correlation_from),
            (&cmp.to, cmp.joint_to, cmp.correlation_to),
        ] {
            // joint is indexed [x][y]; columns are Alice-outcome major.
            prep_table.push(vec![
                name.as_str().into(),
                j[0][0].into(),
                j[1][0].into(),
                j[0][1].into(),
                j[1][1].into(),
                c.into(),
            ]);
        }
        report.tables.push(prep_table);
        report.note(format!(
            "do(Λ: {} → {}): correlation delta {}, max joint change {} ({})",
            cmp.from,
            cmp.to,
            format_short(cmp.correlation_to - cmp.correlation_from),
            format_short(cmp.delta),
            if cmp.common_cause { "preparation acts as common cause" } else { "no change" }
        ));
    }
    Ok(report)
}

fn outcome_name(k: usize) -> &'static str {
    if k == 0 {
        crate::quantum::PAR
    } else {
        crate::quantum::PERP
    }
}

/// Algebraic microcausality for every region pair, isotony for nested pairs,
/// and Bell searches on the configured pairs.
pub fn cmd_net(config: &ScenarioConfig, prov: Provenance) -> CmdResult {
    let tol = prov.tolerance;
    let seed = prov.seed;
    let net_config = config.net()?;
    let (net, regions) = net_config.build()?;
    let mut report = Report::new("net", prov);

    let mut pairs = Table::new("pairs", &["first", "second", "spacelike", "shared_sites", "verdict"]);
    let mut violated = Vec::new();
    let mut applicable = 0;
    let mut iso = Table::new("isotony", &["inner", "outer", "holds"]);
    let mut iso_failures = Vec::new();
    for (i, (n1, r1)) in regions.iter().enumerate() {
        for (n2, r2) in &regions[i + 1..] {
            let spacelike = regions_spacelike_separated(r1, r2)?;
            let shared = net.support(r1).intersection(&net.support(r2)).count();
            let verdict = check_algebraic_microcausality(&net, r1, r2, tol)?;
            if verdict != AlgebraicVerdict::NotApplicable {
                applicable += 1;
            }
            if verdict == AlgebraicVerdict::Violated {
                violated.push(format!("{n1}/{n2}"));
            }
            let label = match verdict {
                AlgebraicVerdict::Holds => "holds",
                AlgebraicVerdict::Violated => "violated",
                AlgebraicVerdict::NotApplicable => "not applicable",
            };
            pairs.push(vec![
                n1.as_str().into(),
                n2.as_str().into(),
                spacelike.into(),
                shared.into(),
                label.into(),
            ]);
        }
        for (n2, r2) in &regions {
            if n1 == n2 || !r2.contains_region(r1) {
                continue;
            }
            let holds = check_isotony(&net, r1, r2)?;
            if !holds {
                iso_failures.push(format!("{n1}⊆{n2}"));
            }
            iso.push(vec![n1.as_str().into(), n2.as_str().into(), holds.into()]);
        }
    }
    report.tables.push(pairs);
    report.tables.push(iso);
    report.check(
        "microcausality",
        violated.is_empty(),
        if violated.is_empty() {
            format!("{applicable} spacelike pairs commute")
        } else {
            format!("violated for {}", violated.join(", "))
        },
    );
    report.check(
        "isotony",
        iso_failures.is_empty(),
        if iso_failures.is_empty() {
            "nested regions have nested algebras".to_string()
        } else {
            format!("fails for {}", iso_failures.join(", "))
        },
    );

    if !net_config.bell_pairs.is_empty() {
        let Some(state) = net_config.state(&net)? else {
            return Err(ConfigError::new("net.state", "bell_pairs need a state").into());
        };
        let mut bell = Table::new("bell", &["first", "second", "value"]);
        let mut low = Vec::new();
        let mut over = Vec::new();
        for (k, [n1, n2]) in net_config.bell_pairs.iter().enumerate() {
            let r1 = lookup_region(&regions, n1, &format!("net.bell_pairs[{k}][0]"))?;
            let r2 = lookup_region(&regions, n2, &format!("net.bell_pairs[{k}][1]"))?;
            let result = net_bell_correlation(&net, r1, r2, &state, seed)?;
            if net_config.bell_min.is_some_and(|m| result.value < m) {
                low.push(format!("{n1}/{n2}"));
            }
            if result.value > 2.0 * SQRT_2 + tol {
                over.push(format!("{n1}/{n2}"));
            }
            bell.push(vec![n1.as_str().into(), n2.as_str().into(), result.value.into()]);
        }
        report.tables.push(bell);
        report.check(
            "bell_tsirelson",
            over.is_empty(),
            if over.is_empty() {
                "all Bell values within 2√2".to_string()
            } else {
                format!("above 2√2 for {}", over.join(", "))
            },
        );
        if let Some(m) = net_config.bell_min {
            report.check(
                "bell_minimum",
                low.is_empty(),
                if low.is_empty() {
                    format!("all Bell values at least {}", format_short(m))
                } else {
                    format!("below {} for {}", format_short(m), low.join(", "))
                },
            );
        }
    }
    Ok(report)
}
