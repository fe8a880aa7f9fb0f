//! Exact simulation of superdense teleportation (SDT), qubit teleportation
//! (QT) and probabilistic qubit remote state preparation (RSP), plus the
//! resource accounting for all four protocol variants.
//!
//! Ququart labels follow the polarization ⊗ spatial-mode ordering
//! `|0⟩ = |Hr⟩, |1⟩ = |Hl⟩, |2⟩ = |Vr⟩, |3⟩ = |Vl⟩` on both photons. The
//! physical r/l reversal between Alice's and Bob's photons is not modelled:
//! it permutes labels without changing any fidelity or probability.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{project_outcome, tensor, MeasurementBasis, PureState, UnitaryOp, C64};

/// Reduces an angle into `[0, 2π)`.
pub fn canonical_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// The `d − 1` relative phases of an equimodular qudit, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquimodularPhases {
    phases: Vec<f64>,
}

impl EquimodularPhases {
    /// Phases in radians, canonicalized mod 2π. The qudit dimension is `phases.len() + 1`.
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "phases",
                reason: format!("non-finite phase {bad}"),
            });
        }
        Ok(Self {
            phases: phases.into_iter().map(canonical_angle).collect(),
        })
    }

    pub fn from_degrees(degrees: &[f64]) -> Result<Self> {
        Self::new(degrees.iter().map(|d| d.to_radians()).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            phases: vec![0.0; dim.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.phases.len() + 1
    }

    pub fn radians(&self) -> &[f64] {
        &self.phases
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.phases.iter().map(|p| p.to_degrees()).collect()
    }

    /// `φ_j` with the reference `φ_0 = 0` prepended.
    fn with_reference(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(0.0).chain(self.phases.iter().copied())
    }
}

/// The three phases Charles sets in the ququart experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalPhases {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Which of the experimental phases a scan varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentalPhase {
    A,
    B,
    C,
}

impl ExperimentalPhases {
    pub fn from_degrees(a: f64, b: f64, c: f64) -> Self {
        Self {
            a: a.to_radians(),
            b: b.to_radians(),
            c: c.to_radians(),
        }
    }

    /// `φ₁ = φ_a + φ_b`, `φ₂ = φ_b + π/2`, `φ₃ = φ_c − π/2`.
    pub fn to_equimodular(&self) -> EquimodularPhases {
        EquimodularPhases::new(vec![self.a + self.b, self.b + FRAC_PI_2, self.c - FRAC_PI_2])
            .expect("finite experimental phases")
    }

    /// `φ_a = φ₁ − φ₂ + π/2`, `φ_b = φ₂ − π/2`, `φ_c = φ₃ + π/2`, each canonicalized.
    pub fn from_equimodular(p: &EquimodularPhases) -> Result<Self> {
        let [p1, p2, p3] = <[f64; 3]>::try_from(p.radians()).map_err(|_| Error::DimensionMismatch {
            expected: 4,
            found: p.dim(),
        })?;
        Ok(Self {
            a: canonical_angle(p1 - p2 + FRAC_PI_2),
            b: canonical_angle(p2 - FRAC_PI_2),
            c: canonical_angle(p3 + FRAC_PI_2),
        })
    }

    pub fn get(&self, which: ExperimentalPhase) -> f64 {
        match which {
            ExperimentalPhase::A => self.a,
            ExperimentalPhase::B => self.b,
            ExperimentalPhase::C => self.c,
        }
    }

    pub fn with(mut self, which: ExperimentalPhase, value: f64) -> Self {
        match which {
            ExperimentalPhase::A => self.a = value,
            ExperimentalPhase::B => self.b = value,
            ExperimentalPhase::C => self.c = value,
        }
        self
    }
}

/// `(|0⟩ + e^{iφ₁}|1⟩ + … + e^{iφ_{d−1}}|d−1⟩)/√d`.
pub fn equimodular_state(p: &EquimodularPhases) -> PureState {
    let scale = 1.0 / (p.dim() as f64).sqrt();
    let amps = p.with_reference().map(|phi| C64::from_polar(scale, phi)).collect();
    PureState::new(amps).expect("equimodular amplitudes are normalized")
}

/// `Σ_j e^{iφ_j}|jj⟩/√d`: Charles' phases applied to a maximally entangled pair.
pub fn encode_on_entangled(p: &EquimodularPhases) -> PureState {
    let d = p.dim();
    let scale = 1.0 / (d as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for (j, phi) in p.with_reference().enumerate() {
        amps[j * d + j] = C64::from_polar(scale, phi);
    }
    PureState::new(amps).expect("encoded amplitudes are normalized")
}

/// Discrete Fourier basis `|k⟩ = Σ_j e^{2πijk/d}|j⟩/√d`.
pub fn fourier_mub(d: usize) -> MeasurementBasis {
    let scale = 1.0 / (d as f64).sqrt();
    let vectors = (0..d)
        .map(|k| {
            let amps = (0..d)
                .map(|j| C64::from_polar(scale, TAU * ((j * k) % d) as f64 / d as f64))
                .collect();
            PureState::new(amps).expect("Fourier vectors are normalized")
        })
        .collect();
    MeasurementBasis::new(vectors).expect("DFT columns are orthonormal")
}

/// Alice's four outcomes, in wire order 0..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinOrbitOutcome {
    APlus,
    AMinus,
    BPlus,
    BMinus,
}

impl SpinOrbitOutcome {
    pub const ALL: [SpinOrbitOutcome; 4] = [Self::APlus, Self::AMinus, Self::BPlus, Self::BMinus];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(k: usize) -> Result<Self> {
        Self::ALL
            .get(k)
            .copied()
            .ok_or(Error::OutcomeOutOfRange { outcome: k, count: 4 })
    }

    /// Basis level whose sign the heralded branch flips.
    ///
    /// Projecting `Σ_j e^{iφ_j}|jj⟩/2` onto `a⁺ = (|0⟩+|1⟩+|2⟩−|3⟩)/2` leaves Bob
    /// with the target up to a minus sign on `|3⟩`; likewise `a⁻` flips `|1⟩`,
    /// `b⁺` flips `|2⟩` and `b⁻` flips `|0⟩` (up to a global sign).
    pub fn flipped_level(self) -> usize {
        match self {
            Self::APlus => 3,
            Self::AMinus => 1,
            Self::BPlus => 2,
            Self::BMinus => 0,
        }
    }
}

impl fmt::Display for SpinOrbitOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::APlus => "a+",
            Self::AMinus => "a-",
            Self::BPlus => "b+",
            Self::BMinus => "b-",
        })
    }
}

/// Alice's spin-orbit basis `a^± = (|Dr⟩ ± |Al⟩)/√2`, `b^± = (|Ar⟩ ± |Dl⟩)/√2`
/// with `D = (H+V)/√2`, `A = (H−V)/√2`.
pub fn spin_orbit_basis() -> MeasurementBasis {
    let v = |s: [f64; 4]| PureState::new(s.iter().map(|&x| C64::new(x / 2.0, 0.0)).collect()).unwrap();
    MeasurementBasis::new(vec![
        v([1.0, 1.0, 1.0, -1.0]),
        v([1.0, -1.0, 1.0, 1.0]),
        v([1.0, 1.0, -1.0, 1.0]),
        v([1.0, -1.0, -1.0, -1.0]),
    ])
    .expect("spin-orbit basis is orthonormal")
}

/// Bob's correction for spin-orbit outcome `k`: a π phase on the flipped level.
pub fn sdt_correction(outcome: usize) -> Result<UnitaryOp> {
    let o = SpinOrbitOutcome::from_index(outcome)?;
    let mut phases = [0.0; 4];
    phases[o.flipped_level()] = PI;
    Ok(UnitaryOp::diagonal_phases(&phases))
}

/// Bob's correction `diag(e^{2πijk/d})` for Fourier outcome `k`.
pub fn fourier_correction(d: usize, outcome: usize) -> Result<UnitaryOp> {
    if outcome >= d {
        return Err(Error::OutcomeOutOfRange { outcome, count: d });
    }
    let phases: Vec<f64> = (0..d).map(|j| TAU * ((j * outcome) % d) as f64 / d as f64).collect();
    Ok(UnitaryOp::diagonal_phases(&phases))
}

/// Alice's measurement for SDT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdtBasis {
    /// The ququart spin-orbit basis; only valid for `d = 4`.
    SpinOrbit,
    /// The discrete Fourier basis; any `d`.
    Fourier,
}

impl SdtBasis {
    pub fn measurement(self, d: usize) -> Result<MeasurementBasis> {
        match self {
            SdtBasis::SpinOrbit if d != 4 => Err(Error::DimensionMismatch { expected: 4, found: d }),
            SdtBasis::SpinOrbit => Ok(spin_orbit_basis()),
            SdtBasis::Fourier => Ok(fourier_mub(d)),
        }
    }

    pub fn correction(self, d: usize, outcome: usize) -> Result<UnitaryOp> {
        match self {
            SdtBasis::SpinOrbit if d != 4 => Err(Error::DimensionMismatch { expected: 4, found: d }),
            SdtBasis::SpinOrbit => sdt_correction(outcome),
            SdtBasis::Fourier => fourier_correction(d, outcome),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "SDT")]
    Sdt,
    #[serde(rename = "QT")]
    Qt,
    #[serde(rename = "RSP_prob")]
    RspProbabilistic,
    #[serde(rename = "RSP_det")]
    RspDeterministic,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Self::Qt, Self::RspProbabilistic, Self::RspDeterministic, Self::Sdt];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Sdt => "SDT",
            Protocol::Qt => "QT",
            Protocol::RspProbabilistic => "RSP_prob",
            Protocol::RspDeterministic => "RSP_det",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bits needed to announce one of `outcomes` results.
pub fn message_bits(outcomes: usize) -> u32 {
    outcomes.max(1).next_power_of_two().trailing_zeros()
}

/// One protocol run. Field order follows the feed-forward sequence:
/// Alice measures, sends her outcome, then Bob corrects.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTranscript {
    pub protocol: Protocol,
    pub target: PureState,
    pub encoded_joint: PureState,
    pub alice_outcome: usize,
    pub outcome_probability: f64,
    pub classical_bits: u32,
    pub correction: UnitaryOp,
    pub bob_final: PureState,
    pub succeeded: bool,
}

/// Line-oriented JSON form of a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub protocol: Protocol,
    pub phases_deg: Vec<f64>,
    pub outcome: usize,
    pub bits: u32,
    pub fidelity: f64,
    pub succeeded: bool,
}

impl ProtocolTranscript {
    /// `|⟨target|bob_final⟩|²`.
    pub fn fidelity(&self) -> f64 {
        self.target.overlap(&self.bob_final).unwrap_or(0.0)
    }

    /// Relative phases `arg(t_j) − arg(t_0)` of the target, in degrees.
    pub fn target_phases_deg(&self) -> Vec<f64> {
        let amps = self.target.amplitudes();
        let ref_arg = amps[0].arg();
        amps[1..]
            .iter()
            .map(|a| canonical_angle(a.arg() - ref_arg).to_degrees())
            .collect()
    }

    pub fn record(&self) -> TranscriptRecord {
        TranscriptRecord {
            protocol: self.protocol,
            phases_deg: self.target_phases_deg(),
            outcome: self.alice_outcome,
            bits: self.classical_bits,
            fidelity: self.fidelity(),
            succeeded: self.succeeded,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.record()).expect("record serializes")
    }
}

fn sdt_transcript(
    p: &EquimodularPhases,
    basis: SdtBasis,
    joint: &PureState,
    measurement: &MeasurementBasis,
    outcome: usize,
) -> Result<ProtocolTranscript> {
    let d = p.dim();
    let branch = project_outcome(joint, measurement, outcome)?;
    let heralded = branch.state.ok_or(Error::InvalidParameter {
        name: "outcome",
        reason: "null SDT branch".into(),
    })?;
    let correction = basis.correction(d, outcome)?;
    let bob_final = correction.apply(&heralded)?;
    Ok(ProtocolTranscript {
        protocol: Protocol::Sdt,
        target: equimodular_state(p),
        encoded_joint: joint.clone(),
        alice_outcome: outcome,
        outcome_probability: branch.probability,
        classical_bits: message_bits(d),
        correction,
        bob_final,
        succeeded: true,
    })
}

/// Runs SDT once for every possible Alice outcome.
pub fn run_sdt_exhaustive(p: &EquimodularPhases, basis: SdtBasis) -> Result<Vec<ProtocolTranscript>> {
    let d = p.dim();
    let measurement = basis.measurement(d)?;
    let joint = encode_on_entangled(p);
    (0..d)
        .map(|k| sdt_transcript(p, basis, &joint, &measurement, k))
        .collect()
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    WeightedIndex::new(probs)
        .expect("branch probabilities are a distribution")
        .sample(rng)
}

/// Runs SDT once with Alice's outcome drawn from the Born rule.
pub fn run_sdt_sampled<R: Rng + ?Sized>(
    p: &EquimodularPhases,
    basis: SdtBasis,
    rng: &mut R,
) -> Result<ProtocolTranscript> {
    let d = p.dim();
    let measurement = basis.measurement(d)?;
    let joint = encode_on_entangled(p);
    let probs: Vec<f64> = (0..d)
        .map(|k| project_outcome(&joint, &measurement, k).map(|b| b.probability))
        .collect::<Result<_>>()?;
    let k = sample_index(&probs, rng);
    sdt_transcript(p, basis, &joint, &measurement, k)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn phi_plus() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap()
}

/// Bell basis in outcome order Φ⁺, Ψ⁺, Φ⁻, Ψ⁻.
pub fn bell_basis() -> MeasurementBasis {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: [f64; 4]| PureState::new(a.iter().map(|&x| c(x * s, 0.0)).collect()).unwrap();
    MeasurementBasis::new(vec![
        v([1.0, 0.0, 0.0, 1.0]),
        v([0.0, 1.0, 1.0, 0.0]),
        v([1.0, 0.0, 0.0, -1.0]),
        v([0.0, 1.0, -1.0, 0.0]),
    ])
    .expect("Bell basis is orthonormal")
}

/// Pauli corrections `I, X, Z, XZ` matching [`bell_basis`] order.
pub fn qt_correction(outcome: usize) -> Result<UnitaryOp> {
    let o = c(1.0, 0.0);
    let z = c(0.0, 0.0);
    let m = match outcome {
        0 => [o, z, z, o],
        1 => [z, o, o, z],
        2 => [o, z, z, -o],
        3 => [z, -o, o, z],
        _ => return Err(Error::OutcomeOutOfRange { outcome, count: 4 }),
    };
    Ok(UnitaryOp::new(nalgebra::DMatrix::from_row_slice(2, 2, &m)).expect("Pauli products are unitary"))
}

fn check_qubit(psi: &PureState) -> Result<()> {
    if psi.dim() == 2 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 2,
            found: psi.dim(),
        })
    }
}

fn qt_transcript(input: &PureState, joint: &PureState, outcome: usize) -> Result<ProtocolTranscript> {
    let branch = project_outcome(joint, &bell_basis(), outcome)?;
    let heralded = branch.state.ok_or(Error::InvalidParameter {
        name: "outcome",
        reason: "null QT branch".into(),
    })?;
    let correction = qt_correction(outcome)?;
    let bob_final = correction.apply(&heralded)?;
    Ok(ProtocolTranscript {
        protocol: Protocol::Qt,
        target: input.clone(),
        encoded_joint: joint.clone(),
        alice_outcome: outcome,
        outcome_probability: branch.probability,
        classical_bits: message_bits(4),
        correction,
        bob_final,
        succeeded: true,
    })
}

/// Qubit teleportation for each Bell outcome. The joint ordering is
/// (input, Alice's half, Bob's half).
pub fn run_qt_qubit_exhaustive(input: &PureState) -> Result<Vec<ProtocolTranscript>> {
    check_qubit(input)?;
    let joint = tensor(input, &phi_plus());
    (0..4).map(|k| qt_transcript(input, &joint, k)).collect()
}

pub fn run_qt_qubit_sampled<R: Rng + ?Sized>(input: &PureState, rng: &mut R) -> Result<ProtocolTranscript> {
    check_qubit(input)?;
    let joint = tensor(input, &phi_plus());
    let basis = bell_basis();
    let probs: Vec<f64> = (0..4)
        .map(|k| project_outcome(&joint, &basis, k).map(|b| b.probability))
        .collect::<Result<_>>()?;
    qt_transcript(input, &joint, sample_index(&probs, rng))
}

/// Charles' rotation on Alice's half of Φ⁺ mapping `|ψ*⟩ → |0⟩` and `|ψ*⊥⟩ → |1⟩`.
fn rsp_rotation(target: &PureState) -> UnitaryOp {
    let t = target.amplitudes();
    // rows ⟨ψ*| and ⟨ψ*⊥|, with ψ* = conj(ψ) and ψ*⊥ = (−ψ₁, ψ₀)
    let m = nalgebra::DMatrix::from_row_slice(2, 2, &[t[0], t[1], -t[1].conj(), t[0].conj()]);
    UnitaryOp::new(m).expect("rows are orthonormal")
}

fn rsp_transcript(target: &PureState, joint: &PureState, outcome: usize) -> Result<ProtocolTranscript> {
    let branch = project_outcome(joint, &MeasurementBasis::computational(2), outcome)?;
    let bob_final = branch.state.ok_or(Error::InvalidParameter {
        name: "outcome",
        reason: "null RSP branch".into(),
    })?;
    Ok(ProtocolTranscript {
        protocol: Protocol::RspProbabilistic,
        target: target.clone(),
        encoded_joint: joint.clone(),
        alice_outcome: outcome,
        outcome_probability: branch.probability,
        classical_bits: message_bits(2),
        correction: UnitaryOp::identity(2),
        bob_final,
        succeeded: outcome == 0,
    })
}

fn rsp_joint(target: &PureState) -> Result<PureState> {
    check_qubit(target)?;
    rsp_rotation(target).kron(&UnitaryOp::identity(2)).apply(&phi_plus())
}

/// Probabilistic qubit RSP: outcome 0 heralds Bob holding the target, outcome 1
/// leaves him with its orthogonal complement (failure).
pub fn run_rsp_qubit_probabilistic<R: Rng + ?Sized>(target: &PureState, rng: &mut R) -> Result<ProtocolTranscript> {
    let joint = rsp_joint(target)?;
    let basis = MeasurementBasis::computational(2);
    let probs: Vec<f64> = (0..2)
        .map(|k| project_outcome(&joint, &basis, k).map(|b| b.probability))
        .collect::<Result<_>>()?;
    rsp_transcript(target, &joint, sample_index(&probs, rng))
}

pub fn run_rsp_qubit_exhaustive(target: &PureState) -> Result<Vec<ProtocolTranscript>> {
    let joint = rsp_joint(target)?;
    (0..2).map(|k| rsp_transcript(target, &joint, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharlesKnowledge {
    Optional,
    Required,
}

/// Resources needed to send `N` state parameters with unit fidelity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceProfile {
    pub protocol: Protocol,
    pub n_params: usize,
    pub state_dim: usize,
    pub success_probability: f64,
    pub classical_bits: f64,
    pub alice_detectors: usize,
    pub bob_transformations: usize,
    pub charles_knowledge: CharlesKnowledge,
}

/// Resource accounting per protocol. QT is the linear-optics qubit case
/// (`N = 2` only); RSP needs `N` even so that `(N+2)/2` is integral.
pub fn resource_profile(protocol: Protocol, n: usize) -> Result<ResourceProfile> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            reason: "at least one state parameter".into(),
        });
    }
    let rsp_dim = || {
        if n.is_multiple_of(2) {
            Ok((n + 2) / 2)
        } else {
            Err(Error::UnsupportedParameterCount {
                protocol: protocol.name(),
                n,
                reason: "state dimension (N+2)/2 is not integral",
            })
        }
    };
    let profile = match protocol {
        Protocol::Qt => {
            if n != 2 {
                return Err(Error::UnsupportedParameterCount {
                    protocol: "QT",
                    n,
                    reason: "linear-optics teleportation is limited to qubits (N = 2)",
                });
            }
            ResourceProfile {
                protocol,
                n_params: n,
                state_dim: 2,
                success_probability: 0.5,
                classical_bits: 2.0,
                alice_detectors: 4,
                bob_transformations: 4,
                charles_knowledge: CharlesKnowledge::Optional,
            }
        }
        Protocol::RspProbabilistic => {
            let d = rsp_dim()?;
            ResourceProfile {
                protocol,
                n_params: n,
                state_dim: d,
                success_probability: 2.0 / (n as f64 + 2.0),
                classical_bits: 1.0,
                alice_detectors: 1,
                bob_transformations: 1,
                charles_knowledge: CharlesKnowledge::Required,
            }
        }
        Protocol::RspDeterministic => {
            let d = rsp_dim()?;
            ResourceProfile {
                protocol,
                n_params: n,
                state_dim: d,
                success_probability: 1.0,
                classical_bits: 2.0 * (d as f64).log2(),
                alice_detectors: d * d,
                bob_transformations: d * d,
                charles_knowledge: CharlesKnowledge::Required,
            }
        }
        Protocol::Sdt => ResourceProfile {
            protocol,
            n_params: n,
            state_dim: n + 1,
            success_probability: 1.0,
            classical_bits: ((n + 1) as f64).log2(),
            alice_detectors: n + 1,
            bob_transformations: n + 1,
            charles_knowledge: CharlesKnowledge::Required,
        },
    };
    Ok(profile)
}

/// Classical message length as a continuous function of `N`, as plotted
/// against parameter count. General-state QT and deterministic RSP both need
/// `log₂ d²` bits with `d = (N+2)/2`.
pub fn classical_bits_curve(protocol: Protocol, n: f64) -> f64 {
    match protocol {
        Protocol::Sdt => (n + 1.0).log2(),
        Protocol::Qt | Protocol::RspDeterministic => 2.0 * ((n + 2.0) / 2.0).log2(),
        Protocol::RspProbabilistic => 1.0,
    }
}

/// Bits for deterministic RSP divided by bits for SDT at equal `N`.
pub fn bits_ratio_rsp_to_sdt(n: f64) -> f64 {
    classical_bits_curve(Protocol::RspDeterministic, n) / classical_bits_curve(Protocol::Sdt, n)
}

/// Target phases (degrees) of the nine ququarts a–i in the reported experiment.
pub const REFERENCE_TARGETS: [(char, [f64; 3]); 9] = [
    ('a', [112.0, 180.0, 278.0]),
    ('b', [270.0, 90.0, 324.0]),
    ('c', [112.0, 277.0, 119.0]),
    ('d', [180.0, 180.0, 137.0]),
    ('e', [26.0, 202.0, 145.0]),
    ('f', [270.0, 90.0, 184.0]),
    ('g', [211.0, 158.0, 185.0]),
    ('h', [268.0, 148.0, 209.0]),
    ('i', [180.0, 277.0, 223.0]),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{born_probabilities, pure_state_distance, random_pure_state};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn row_a() -> EquimodularPhases {
        EquimodularPhases::from_degrees(&REFERENCE_TARGETS[0].1).unwrap()
    }

    #[test]
    fn phases_are_canonicalized() {
        let p = EquimodularPhases::new(vec![-FRAC_PI_2, TAU, 3.0 * TAU + 1.0]).unwrap();
        assert_abs_diff_eq!(p.radians()[0], 3.0 * FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(p.radians()[1], 0.0);
        assert_abs_diff_eq!(p.radians()[2], 1.0, epsilon = 1e-14);
        assert!(EquimodularPhases::new(vec![f64::NAN]).is_err());
        assert_eq!(EquimodularPhases::zeros(1).dim(), 1);
    }

    #[test]
    fn equimodular_state_examples() {
        let s = equimodular_state(&EquimodularPhases::zeros(4));
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }

        let s = equimodular_state(&row_a());
        let expected = [0.0_f64, 112.0, 180.0, 278.0];
        for (a, deg) in s.amplitudes().iter().zip(expected) {
            let e = C64::from_polar(0.5, deg.to_radians());
            assert_abs_diff_eq!((a - e).norm(), 0.0, epsilon = 1e-15);
        }

        let minus = equimodular_state(&EquimodularPhases::new(vec![PI]).unwrap());
        assert_abs_diff_eq!(minus.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(minus.amplitudes()[1].re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(minus.amplitudes()[1].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn encoded_state_examples() {
        let bell = encode_on_entangled(&EquimodularPhases::zeros(2));
        let expected = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
        for (a, e) in bell.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
        }

        // (|HH⟩+|VV⟩)(|rl⟩+|lr⟩)/2 with Bob's r/l labels reversed is Σ|jj⟩/2.
        let zero = encode_on_entangled(&EquimodularPhases::zeros(4));
        let mut hyper = vec![C64::new(0.0, 0.0); 16];
        for pol in 0..2 {
            for (sa, sb) in [(0, 1), (1, 0)] {
                let bob_relabelled = 1 - sb;
                hyper[(pol * 2 + sa) * 4 + pol * 2 + bob_relabelled] = C64::new(0.5, 0.0);
            }
        }
        let hyper = PureState::new(hyper).unwrap();
        assert!(pure_state_distance(&hyper, &zero).unwrap() < 1e-15);

        let p = row_a();
        let joint = encode_on_entangled(&p);
        let target = equimodular_state(&p);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j {
                    target.amplitudes()[j]
                } else {
                    C64::new(0.0, 0.0)
                };
                assert_abs_diff_eq!((joint.amplitudes()[i * 4 + j] - expected).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn fourier_examples() {
        let h = fourier_mub(2);
        assert_abs_diff_eq!(h.vectors()[1].amplitudes()[1].re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        let f4 = fourier_mub(4);
        let expected = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ];
        for (a, e) in f4.vectors()[1].amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!((a - e * 0.5).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn spin_orbit_is_unbiased_to_computational() {
        let b = spin_orbit_basis();
        for v in b.vectors() {
            for j in 0..4 {
                let e = PureState::basis(4, j).unwrap();
                assert_abs_diff_eq!(v.overlap(&e).unwrap(), 0.25, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(b.vectors()[0].inner(&b.vectors()[1]).unwrap().norm(), 0.0);
    }

    #[test]
    fn heralded_branches_and_corrections() {
        let p = row_a();
        let joint = encode_on_entangled(&p);
        let target = equimodular_state(&p);
        let basis = spin_orbit_basis();
        for o in SpinOrbitOutcome::ALL {
            let b = project_outcome(&joint, &basis, o.index()).unwrap();
            assert_abs_diff_eq!(b.probability, 0.25, epsilon = 1e-12);
            let heralded = b.state.unwrap();
            // the branch is the target with exactly one sign flipped
            let mut amps = target.amplitudes().to_vec();
            amps[o.flipped_level()] = -amps[o.flipped_level()];
            assert!(heralded.same_ray(&PureState::new(amps).unwrap(), 1e-12));
            let corrected = sdt_correction(o.index()).unwrap().apply(&heralded).unwrap();
            assert!(corrected.same_ray(&target, 1e-12));
        }
        assert_eq!(
            sdt_correction(0).unwrap(),
            UnitaryOp::diagonal_phases(&[0.0, 0.0, 0.0, PI])
        );
        assert!(sdt_correction(4).is_err());
    }

    #[test]
    fn corrections_are_involutions() {
        for k in 0..4 {
            let u = sdt_correction(k).unwrap();
            let sq = u.then(&u).unwrap();
            let dev = (sq.matrix() - UnitaryOp::identity(4).matrix()).norm();
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn sdt_exhaustive_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2usize, 3, 4, 8] {
            for _ in 0..100 {
                let p = EquimodularPhases::new((1..d).map(|_| rng.random::<f64>() * TAU).collect()).unwrap();
                let runs = run_sdt_exhaustive(&p, SdtBasis::Fourier).unwrap();
                assert_eq!(runs.len(), d);
                for t in &runs {
                    assert!(t.fidelity() >= 1.0 - 1e-10);
                    assert_abs_diff_eq!(t.outcome_probability, 1.0 / d as f64, epsilon = 1e-12);
                    assert_eq!(t.classical_bits, message_bits(d));
                }
            }
        }
    }

    #[test]
    fn fourier_and_spin_orbit_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let p = EquimodularPhases::new((0..3).map(|_| rng.random::<f64>() * TAU).collect()).unwrap();
            let f = run_sdt_exhaustive(&p, SdtBasis::Fourier).unwrap();
            let s = run_sdt_exhaustive(&p, SdtBasis::SpinOrbit).unwrap();
            for (a, b) in f.iter().zip(&s) {
                assert!(a.bob_final.same_ray(&b.bob_final, 1e-10));
            }
        }
        assert!(run_sdt_exhaustive(&EquimodularPhases::zeros(3), SdtBasis::SpinOrbit).is_err());
    }

    #[test]
    fn qubit_sdt_uses_one_bit() {
        let p = EquimodularPhases::new(vec![PI]).unwrap();
        for t in run_sdt_exhaustive(&p, SdtBasis::Fourier).unwrap() {
            assert_eq!(t.classical_bits, 1);
            assert!(t.fidelity() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn sampled_sdt_outcomes_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = row_a();
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let t = run_sdt_sampled(&p, SdtBasis::SpinOrbit, &mut rng).unwrap();
            assert!(t.fidelity() > 1.0 - 1e-10);
            counts[t.alice_outcome] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn qubit_teleportation() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let zero = PureState::basis(2, 0).unwrap();
        for t in run_qt_qubit_exhaustive(&zero).unwrap() {
            assert!(t.bob_final.same_ray(&zero, 1e-12));
            assert_eq!(t.classical_bits, 2);
        }
        for _ in 0..50 {
            let psi = random_pure_state(2, &mut rng);
            let runs = run_qt_qubit_exhaustive(&psi).unwrap();
            assert_eq!(runs.len(), 4);
            for t in runs {
                assert!(t.fidelity() > 1.0 - 1e-12);
                assert_abs_diff_eq!(t.outcome_probability, 0.25, epsilon = 1e-12);
            }
        }
        assert!(run_qt_qubit_exhaustive(&PureState::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn rsp_success_rate_is_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let target = random_pure_state(2, &mut rng);
        let n = 100_000;
        let mut ok = 0usize;
        for _ in 0..n {
            let t = run_rsp_qubit_probabilistic(&target, &mut rng).unwrap();
            assert_eq!(t.classical_bits, 1);
            if t.succeeded {
                ok += 1;
                assert!(t.fidelity() > 1.0 - 1e-12);
            } else {
                assert!(t.fidelity() < 1e-12);
            }
        }
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ok as f64 - n as f64 / 2.0).abs() < 3.0 * sigma);

        let both = run_rsp_qubit_exhaustive(&target).unwrap();
        assert_abs_diff_eq!(both[0].outcome_probability, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(both[1].outcome_probability, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn resource_rows() {
        let sdt = resource_profile(Protocol::Sdt, 3).unwrap();
        assert_eq!((sdt.state_dim, sdt.alice_detectors, sdt.bob_transformations), (4, 4, 4));
        assert_eq!(sdt.classical_bits, 2.0);
        assert_eq!(sdt.success_probability, 1.0);

        let qt = resource_profile(Protocol::Qt, 2).unwrap();
        assert_eq!(qt.success_probability, 0.5);
        assert_eq!(qt.classical_bits, 2.0);
        assert_eq!((qt.alice_detectors, qt.bob_transformations), (4, 4));
        assert_eq!(qt.charles_knowledge, CharlesKnowledge::Optional);

        assert!(matches!(
            resource_profile(Protocol::RspDeterministic, 3),
            Err(Error::UnsupportedParameterCount { .. })
        ));
        assert!(resource_profile(Protocol::Qt, 4).is_err());
        assert!(resource_profile(Protocol::Sdt, 0).is_err());

        let det = resource_profile(Protocol::RspDeterministic, 6).unwrap();
        assert_eq!((det.state_dim, det.alice_detectors), (4, 16));
        assert_eq!(det.classical_bits, 4.0);
    }

    #[test]
    fn bits_ratio_approaches_two() {
        let mut prev = 0.0;
        for k in 2..=20 {
            let n = (1u64 << k) as f64 - 1.0;
            let r = bits_ratio_rsp_to_sdt(n);
            assert!(r > prev && r < 2.0);
            prev = r;
        }
        assert!(bits_ratio_rsp_to_sdt(1e120) > 1.99);
        for n in (2..200).step_by(2) {
            let sdt = resource_profile(Protocol::Sdt, n).unwrap();
            let det = resource_profile(Protocol::RspDeterministic, n).unwrap();
            assert!(det.classical_bits >= sdt.classical_bits);
        }
    }

    #[test]
    fn phase_map_examples() {
        let zero = ExperimentalPhases { a: 0.0, b: 0.0, c: 0.0 }.to_equimodular();
        assert_abs_diff_eq!(zero.radians()[0], 0.0);
        assert_abs_diff_eq!(zero.radians()[1], FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(zero.radians()[2], 3.0 * FRAC_PI_2, epsilon = 1e-15);

        let p = row_a();
        let e = ExperimentalPhases::from_equimodular(&p).unwrap();
        let back = e.to_equimodular();
        for (x, y) in back.radians().iter().zip(p.radians()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        assert!(ExperimentalPhases::from_equimodular(&EquimodularPhases::zeros(3)).is_err());
    }

    #[test]
    fn transcript_json_line() {
        let t = &run_sdt_exhaustive(&row_a(), SdtBasis::SpinOrbit).unwrap()[2];
        let line = t.to_json_line();
        let rec: TranscriptRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(rec.protocol, Protocol::Sdt);
        assert_eq!(rec.outcome, 2);
        assert_eq!(rec.bits, 2);
        assert!(rec.succeeded);
        assert_abs_diff_eq!(rec.fidelity, 1.0, epsilon = 1e-10);
        for (x, y) in rec.phases_deg.iter().zip([112.0, 180.0, 278.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-9);
        }
        assert!(line.starts_with("{\"protocol\":\"SDT\",\"phases_deg\":["));
    }

    #[test]
    fn equimodular_gives_uniform_computational_statistics() {
        let p = row_a();
        let probs = born_probabilities(&equimodular_state(&p), &MeasurementBasis::computational(4)).unwrap();
        for x in probs {
            assert_abs_diff_eq!(x, 0.25, epsilon = 1e-15);
        }
        let a = equimodular_state(&p);
        assert_eq!(pure_state_distance(&a, &a).unwrap(), 0.0);
    }
}
