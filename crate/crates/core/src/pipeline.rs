//! End-to-end SDT run: encode, add noise, sample tomography counts for each
//! heralded outcome, reconstruct, correct, average and read out the phases.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsim::{counts_from_branches, heralded_branches, CountMode, CountRecord, NoiseModel, PHOTON_DIM};
use crate::protocols::{equimodular_state, sdt_correction, EquimodularPhases};
use crate::qcore::{fidelity, DensityMatrix, UnitaryOp};
use crate::tomography::{
    correct_and_average, extract_phases, mle_reconstruct, report_row, MleOptions, PhaseEstimate, ReconstructionResult,
    ReportRow,
};

/// How the four corrected states are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Weight by the heralding probability of each outcome.
    #[default]
    OutcomeProbability,
    /// Equal weights, for count files that carry no heralding rates.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub noise: NoiseModel,
    pub shots: u64,
    pub mode: CountMode,
    pub mle: MleOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            noise: NoiseModel::noiseless(),
            shots: 10_000,
            mode: CountMode::Sampled,
            mle: MleOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeReconstruction {
    pub outcome: usize,
    pub weight: f64,
    pub reconstruction: ReconstructionResult,
    pub corrected: DensityMatrix,
}

/// Reconstruction of a whole count file.
#[derive(Debug, Clone, PartialEq)]
pub struct CountAnalysis {
    pub outcomes: Vec<OutcomeReconstruction>,
    pub weighting: Weighting,
    pub averaged: DensityMatrix,
    pub estimate: PhaseEstimate,
}

/// Groups `records` by Alice outcome, reconstructs each group and averages the
/// corrected states. `weights[k]` is used for outcome `k` when given,
/// otherwise all present outcomes weigh the same.
pub fn analyze_counts(records: &[CountRecord], weights: Option<&[f64]>, options: &MleOptions) -> Result<CountAnalysis> {
    let mut groups: Vec<Vec<CountRecord>> = vec![Vec::new(); PHOTON_DIM];
    for r in records {
        groups
            .get_mut(r.outcome)
            .ok_or(Error::OutcomeOutOfRange {
                outcome: r.outcome,
                count: PHOTON_DIM,
            })?
            .push(*r);
    }
    if let Some(w) = weights {
        if w.len() != PHOTON_DIM {
            return Err(Error::DimensionMismatch {
                expected: PHOTON_DIM,
                found: w.len(),
            });
        }
    }
    let mut outcomes = Vec::new();
    for (k, recs) in groups.iter().enumerate().filter(|(_, g)| !g.is_empty()) {
        let reconstruction = mle_reconstruct(recs, options)?;
        let corrected = sdt_correction(k)?.conjugate(&reconstruction.rho)?;
        outcomes.push(OutcomeReconstruction {
            outcome: k,
            weight: weights.map_or(1.0, |w| w[k]),
            reconstruction,
            corrected,
        });
    }
    if outcomes.is_empty() {
        return Err(Error::InsufficientSettings {
            rank: 0,
            required: PHOTON_DIM * PHOTON_DIM,
        });
    }
    let rhos: Vec<DensityMatrix> = outcomes.iter().map(|o| o.reconstruction.rho.clone()).collect();
    let us: Vec<UnitaryOp> = outcomes
        .iter()
        .map(|o| sdt_correction(o.outcome))
        .collect::<Result<_>>()?;
    let ws: Vec<f64> = outcomes.iter().map(|o| o.weight).collect();
    let averaged = correct_and_average(&rhos, &us, &ws)?;
    let estimate = extract_phases(&averaged)?;
    Ok(CountAnalysis {
        outcomes,
        weighting: if weights.is_some() {
            Weighting::OutcomeProbability
        } else {
            Weighting::Uniform
        },
        averaged,
        estimate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub target: EquimodularPhases,
    pub counts: Vec<CountRecord>,
    pub analysis: CountAnalysis,
    /// `⟨ψ|ρ̄|ψ⟩` of the averaged corrected state.
    pub fidelity: f64,
    /// Fidelity of each corrected branch, in outcome order.
    pub branch_fidelities: Vec<f64>,
}

impl PipelineResult {
    pub fn estimate(&self) -> &PhaseEstimate {
        &self.analysis.estimate
    }

    pub fn report_row(&self) -> ReportRow {
        report_row(&self.target, &self.analysis.estimate, self.fidelity)
    }
}

/// Runs one target through the simulated experiment.
pub fn run_pipeline<R: Rng + ?Sized>(
    target: &EquimodularPhases,
    config: &PipelineConfig,
    rng: &mut R,
) -> Result<PipelineResult> {
    let branches = heralded_branches(target, &config.noise)?;
    let counts = counts_from_branches(&branches, config.shots, config.mode, rng)?;
    let weights: Vec<f64> = branches.iter().map(|b| b.probability).collect();
    let analysis = analyze_counts(&counts, Some(&weights), &config.mle)?;
    let psi = equimodular_state(target);
    let branch_fidelities = analysis
        .outcomes
        .iter()
        .map(|o| fidelity(&o.corrected, &psi))
        .collect::<Result<_>>()?;
    Ok(PipelineResult {
        target: target.clone(),
        fidelity: fidelity(&analysis.averaged, &psi)?,
        counts,
        analysis,
        branch_fidelities,
    })
}
