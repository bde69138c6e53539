use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{field_relative_error, tau_v_formula, TAU_P_KEEP_ALL};
use super::quantum::{PhaseOperator, QuantumEngine, Spectra, Truncation};
use super::simulation::{run_with_engine, EngineKind, Setup, SimulationPlan};
use crate::circuit::GateCensus;
use crate::error::{Error, Result};
use crate::synthesis::TruncationPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vary {
    Potential,
    Kinetic,
}

impl std::str::FromStr for Vary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potential" => Ok(Vary::Potential),
            "kinetic" => Ok(Vary::Kinetic),
            other => Err(Error::param(
                "vary",
                format!("expected potential or kinetic, got '{other}'"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub epsilon: f64,
    pub s: usize,
    pub one_qubit_gates: u64,
    pub two_qubit_gates: u64,
}

fn policy(tau: f64, field: &'static str) -> Result<TruncationPolicy> {
    TruncationPolicy::new(tau).map_err(|_| Error::param(field, format!("{tau} is outside [0, 1)")))
}

/// Error and kept-term count for each threshold on one operator, the other
/// operator keeping all nonzero terms. The reference is the untruncated
/// quantum run; a `tau = 0` row reuses it, so its error is exactly zero.
pub fn truncation_sweep(setup: &Setup, thresholds: &[f64], vary: Vary) -> Result<Vec<SweepRow>> {
    let field = match vary {
        Vary::Potential => "tau_v",
        Vary::Kinetic => "tau_p",
    };
    let policies = thresholds
        .iter()
        .map(|&t| policy(t, field))
        .collect::<Result<Vec<_>>>()?;
    let spectra = Spectra::compute(&setup.stack)?;
    let exact_potentials = spectra
        .potentials()
        .iter()
        .map(|s| PhaseOperator::synthesize(s, &TruncationPolicy::EXACT))
        .collect::<Result<Vec<_>>>()?;
    let exact_kinetic = PhaseOperator::synthesize(spectra.kinetic(), &TruncationPolicy::EXACT)?;
    let plan = SimulationPlan::new(EngineKind::QuantumTruncated);
    let reference_engine = QuantumEngine::from_operators(&spectra, exact_potentials.clone(), exact_kinetic.clone())?;
    let reference = run_with_engine(setup, &plan, &reference_engine)?.final_probability();

    policies
        .par_iter()
        .map(|p| {
            let engine = match vary {
                Vary::Potential => {
                    let potentials = spectra
                        .potentials()
                        .iter()
                        .map(|s| PhaseOperator::synthesize(s, p))
                        .collect::<Result<Vec<_>>>()?;
                    QuantumEngine::from_operators(&spectra, potentials, exact_kinetic.clone())?
                }
                Vary::Kinetic => QuantumEngine::from_operators(
                    &spectra,
                    exact_potentials.clone(),
                    PhaseOperator::synthesize(spectra.kinetic(), p)?,
                )?,
            };
            let epsilon = if p.tau() == 0.0 {
                0.0
            } else {
                field_relative_error(&run_with_engine(setup, &plan, &engine)?.final_probability(), &reference)?
            };
            let census = engine.simulation_census();
            Ok(SweepRow {
                tau: p.tau(),
                epsilon,
                s: match vary {
                    Vary::Potential => engine.s_v(),
                    Vary::Kinetic => engine.s_p(),
                },
                one_qubit_gates: census.one_qubit,
                two_qubit_gates: census.two_qubit,
            })
        })
        .collect()
}

/// `count` thresholds spaced evenly in log between `a` and `b` inclusive.
pub fn logrange(a: f64, b: f64, count: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::param("logrange", "bounds must be positive"));
    }
    match count {
        0 => Err(Error::param("logrange", "count must be at least 1")),
        1 => Ok(vec![a]),
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            Ok((0..count)
                .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
                .collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionRow {
    pub n: u32,
    pub tau_v: f64,
    pub kept: usize,
    pub total: usize,
    pub fraction: f64,
}

/// Kept fraction of the strongest slice's potential terms at the empirical
/// threshold, one row per grid size.
pub fn remaining_fraction<F>(n_values: &[u32], build: F) -> Result<Vec<FractionRow>>
where
    F: Fn(u32) -> Result<Setup> + Sync,
{
    n_values
        .par_iter()
        .map(|&n| {
            let setup = build(n)?;
            let spectra = Spectra::compute(&setup.stack)?;
            let tau_v = tau_v_formula(n);
            let kept = spectra.s_v(&policy(tau_v, "tau_v")?);
            let total = (1usize << (2 * n)) - 1;
            Ok(FractionRow {
                n,
                tau_v,
                kept,
                total,
                fraction: kept as f64 / total as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub tau_v: f64,
    pub tau_p: f64,
    pub untruncated: GateCensus,
    pub truncated: GateCensus,
    pub ratio: f64,
}

/// Whole-simulation gate counts without truncation and at `truncation`.
pub fn gate_report_with(setup: &Setup, truncation: &Truncation) -> Result<GateReport> {
    let spectra = Spectra::compute(&setup.stack)?;
    let untruncated = QuantumEngine::from_spectra(&spectra, &Truncation::EXACT)?.simulation_census();
    let truncated = QuantumEngine::from_spectra(&spectra, truncation)?.simulation_census();
    let total = |c: &GateCensus| (c.one_qubit + c.two_qubit) as f64;
    Ok(GateReport {
        tau_v: truncation.tau_v,
        tau_p: truncation.tau_p,
        ratio: total(&untruncated) / total(&truncated),
        untruncated,
        truncated,
    })
}

/// Gate report at the empirical thresholds for this grid.
pub fn gate_report(setup: &Setup) -> Result<GateReport> {
    let truncation = Truncation::new(tau_v_formula(setup.grid.bits()), TAU_P_KEEP_ALL)?;
    gate_report_with(setup, &truncation)
}
