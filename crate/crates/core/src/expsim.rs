//! Noisy-experiment simulation for the ququart SDT setup.
//!
//! The noise model has two parts. Spatial-mode crosstalk flips `r ↔ l` on a
//! photon with probability `ε`, independently for Alice's and Bob's photons,
//! before either is measured. Depolarization of Bob's photon with strength
//! `λ` replaces his state by `I/4`. Both are CPTP and reduce to the identity
//! channel at `ε_A = ε_B = λ = 0`.
//!
//! Tomography settings are the 6 × 6 product of polarization projectors
//! `{H, V, D, A, R, L}` and spatial projectors `{h, v, d, a, r, l}`, with
//! `h = (r+l)/√2`, `v = (r−l)/√2`, `d = (r+il)/√2`, `a = (r−il)/√2`, and for
//! polarization `D = (H+V)/√2`, `A = (H−V)/√2`, `R = (H−iV)/√2`,
//! `L = (H+iV)/√2`. Setting `i` in [`tomography_settings`] is
//! `6 · pol + spatial` in those listed orders.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::{
    encode_on_entangled, sdt_correction, spin_orbit_basis, EquimodularPhases, ExperimentalPhase, ExperimentalPhases,
};
use crate::qcore::{project_outcome_mixed, tensor, BornState, DensityMatrix, PureState, UnitaryOp, C64};

/// Dimension of one photon (polarization ⊗ spatial mode).
pub const PHOTON_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Probability of an r ↔ l flip on Alice's photon.
    pub crosstalk_alice: f64,
    /// Probability of an r ↔ l flip on Bob's photon.
    pub crosstalk_bob: f64,
    /// Depolarizing strength on Bob's photon.
    pub depolarizing: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn new(crosstalk_alice: f64, crosstalk_bob: f64, depolarizing: f64) -> Result<Self> {
        let m = Self {
            crosstalk_alice,
            crosstalk_bob,
            depolarizing,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless() -> Self {
        Self {
            crosstalk_alice: 0.0,
            crosstalk_bob: 0.0,
            depolarizing: 0.0,
        }
    }

    /// Equal crosstalk on both photons, no depolarization.
    pub fn crosstalk(eps: f64) -> Result<Self> {
        Self::new(eps, eps, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("crosstalk_alice", self.crosstalk_alice),
            ("crosstalk_bob", self.crosstalk_bob),
            ("depolarizing", self.depolarizing),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is outside [0, 1]"),
                });
            }
        }
        Ok(())
    }
}

/// `r ↔ l` on one photon: swaps levels 0 ↔ 1 and 2 ↔ 3.
fn spatial_flip() -> DMatrix<C64> {
    let mut m = DMatrix::zeros(PHOTON_DIM, PHOTON_DIM);
    for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
        m[(i, j)] = C64::new(1.0, 0.0);
    }
    m
}

fn flip_channel(rho: &DMatrix<C64>, flip: &DMatrix<C64>, eps: f64) -> DMatrix<C64> {
    if eps == 0.0 {
        return rho.clone();
    }
    rho.scale(1.0 - eps) + (flip * rho * flip.adjoint()).scale(eps)
}

/// Applies the noise channel to Bob's photon (dim 4) or to the joint
/// Alice ⊗ Bob state (dim 16). On a single photon only `ε_B` and `λ` act.
pub fn apply_noise(rho: &DensityMatrix, model: &NoiseModel) -> Result<DensityMatrix> {
    model.validate()?;
    let x = spatial_flip();
    let id = DMatrix::<C64>::identity(PHOTON_DIM, PHOTON_DIM);
    let lambda = model.depolarizing;
    let out = match rho.dim() {
        PHOTON_DIM => {
            let m = flip_channel(rho.matrix(), &x, model.crosstalk_bob);
            m.scale(1.0 - lambda) + id.unscale(PHOTON_DIM as f64).scale(lambda)
        }
        n if n == PHOTON_DIM * PHOTON_DIM => {
            let m = flip_channel(rho.matrix(), &x.kronecker(&id), model.crosstalk_alice);
            let m = flip_channel(&m, &id.kronecker(&x), model.crosstalk_bob);
            if lambda == 0.0 {
                m
            } else {
                let alice = DMatrix::from_fn(PHOTON_DIM, PHOTON_DIM, |a, a2| {
                    (0..PHOTON_DIM)
                        .map(|b| m[(a * PHOTON_DIM + b, a2 * PHOTON_DIM + b)])
                        .sum::<C64>()
                });
                m.scale(1.0 - lambda) + alice.kronecker(&id.unscale(PHOTON_DIM as f64)).scale(lambda)
            }
        }
        found => {
            return Err(Error::DimensionMismatch {
                expected: PHOTON_DIM * PHOTON_DIM,
                found,
            })
        }
    };
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Bob's conditional state for one of Alice's outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedBranch {
    pub outcome: usize,
    pub probability: f64,
    pub state: DensityMatrix,
    pub correction: UnitaryOp,
}

/// Encodes `phases`, applies the noise and splits on Alice's spin-orbit outcome.
pub fn heralded_branches(phases: &EquimodularPhases, noise: &NoiseModel) -> Result<Vec<HeraldedBranch>> {
    if phases.dim() != PHOTON_DIM {
        return Err(Error::DimensionMismatch {
            expected: PHOTON_DIM,
            found: phases.dim(),
        });
    }
    let joint = apply_noise(&encode_on_entangled(phases).projector(), noise)?;
    let basis = spin_orbit_basis();
    (0..PHOTON_DIM)
        .map(|k| {
            let b = project_outcome_mixed(&joint, &basis, k)?;
            let state = b.state.ok_or(Error::InvalidParameter {
                name: "outcome",
                reason: format!("null branch for outcome {k}"),
            })?;
            Ok(HeraldedBranch {
                outcome: k,
                probability: b.probability,
                state,
                correction: sdt_correction(k)?,
            })
        })
        .collect()
}

/// Bob's state after applying the heralded correction, averaged over Alice's outcomes.
pub fn corrected_bob_state(phases: &EquimodularPhases, noise: &NoiseModel) -> Result<DensityMatrix> {
    let corrected: Vec<(f64, DensityMatrix)> = heralded_branches(phases, noise)?
        .into_iter()
        .map(|b| Ok((b.probability, b.correction.conjugate(&b.state)?)))
        .collect::<Result<_>>()?;
    let parts: Vec<(f64, &DensityMatrix)> = corrected.iter().map(|(w, r)| (*w, r)).collect();
    DensityMatrix::mixture(&parts)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    D,
    A,
    R,
    L,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpatialMode {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Polarization {
    pub const ALL: [Polarization; 6] = [Self::H, Self::V, Self::D, Self::A, Self::R, Self::L];

    /// Amplitudes on (H, V).
    pub fn amplitudes(self) -> [C64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            Self::H => [c(1.0, 0.0), c(0.0, 0.0)],
            Self::V => [c(0.0, 0.0), c(1.0, 0.0)],
            Self::D => [c(s, 0.0), c(s, 0.0)],
            Self::A => [c(s, 0.0), c(-s, 0.0)],
            Self::R => [c(s, 0.0), c(0.0, -s)],
            Self::L => [c(s, 0.0), c(0.0, s)],
        }
    }

    pub fn symbol(self) -> &'static str {
        ["H", "V", "D", "A", "R", "L"][self as usize]
    }
}

impl SpatialMode {
    pub const ALL: [SpatialMode; 6] = [Self::H, Self::V, Self::D, Self::A, Self::R, Self::L];

    /// Amplitudes on (r, l).
    pub fn amplitudes(self) -> [C64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            Self::H => [c(s, 0.0), c(s, 0.0)],
            Self::V => [c(s, 0.0), c(-s, 0.0)],
            Self::D => [c(s, 0.0), c(0.0, s)],
            Self::A => [c(s, 0.0), c(0.0, -s)],
            Self::R => [c(1.0, 0.0), c(0.0, 0.0)],
            Self::L => [c(0.0, 0.0), c(1.0, 0.0)],
        }
    }

    pub fn symbol(self) -> &'static str {
        ["h", "v", "d", "a", "r", "l"][self as usize]
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl fmt::Display for SpatialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.symbol() == s)
            .ok_or_else(|| Error::Format(format!("unknown polarization `{s}`")))
    }
}

impl FromStr for SpatialMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.symbol() == s)
            .ok_or_else(|| Error::Format(format!("unknown spatial mode `{s}`")))
    }
}

/// One of Bob's 36 product projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub polarization: Polarization,
    pub spatial: SpatialMode,
}

impl MeasurementSetting {
    pub fn new(polarization: Polarization, spatial: SpatialMode) -> Self {
        Self { polarization, spatial }
    }

    /// `|pol⟩ ⊗ |spatial⟩` in the `|Hr⟩, |Hl⟩, |Vr⟩, |Vl⟩` labels.
    pub fn state(&self) -> PureState {
        let p = PureState::new(self.polarization.amplitudes().to_vec()).expect("unit vector");
        let s = PureState::new(self.spatial.amplitudes().to_vec()).expect("unit vector");
        tensor(&p, &s)
    }

    pub fn index(&self) -> usize {
        6 * self.polarization as usize + self.spatial as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        if i >= 36 {
            return Err(Error::OutcomeOutOfRange { outcome: i, count: 36 });
        }
        Ok(Self::new(Polarization::ALL[i / 6], SpatialMode::ALL[i % 6]))
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.polarization, self.spatial)
    }
}

/// The 36 settings in index order (polarization-major).
pub fn tomography_settings() -> Vec<MeasurementSetting> {
    (0..36).map(|i| MeasurementSetting::from_index(i).unwrap()).collect()
}

/// `⟨s|ρ|s⟩`.
pub fn setting_probability(rho: &DensityMatrix, s: &MeasurementSetting) -> Result<f64> {
    if rho.dim() != PHOTON_DIM {
        return Err(Error::DimensionMismatch {
            expected: PHOTON_DIM,
            found: rho.dim(),
        });
    }
    Ok(rho.projector_expectation(&s.state()).clamp(0.0, 1.0))
}

/// Coincidence counts for one (Alice outcome, Bob setting) pair.
///
/// `counts` is an integer for sampled data and `shots · p` for analytic
/// pseudo-counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord {
    pub outcome: usize,
    pub setting: MeasurementSetting,
    pub counts: f64,
    pub shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// Binomial draws with `shots` trials per setting.
    Sampled,
    /// Infinite-shot limit: `counts = shots · p` exactly.
    Analytic,
}

/// Counts for every Alice outcome and every tomography setting, outcome-major.
pub fn simulate_counts<R: Rng + ?Sized>(
    phases: &EquimodularPhases,
    noise: &NoiseModel,
    shots: u64,
    mode: CountMode,
    rng: &mut R,
) -> Result<Vec<CountRecord>> {
    let branches = heralded_branches(phases, noise)?;
    counts_from_branches(&branches, shots, mode, rng)
}

/// Samples the tomography schedule on already-computed heralded branches.
pub fn counts_from_branches<R: Rng + ?Sized>(
    branches: &[HeraldedBranch],
    shots: u64,
    mode: CountMode,
    rng: &mut R,
) -> Result<Vec<CountRecord>> {
    let mut out = Vec::with_capacity(branches.len() * 36);
    for b in branches {
        out.extend(tomography_counts(&b.state, b.outcome, shots, mode, rng)?);
    }
    Ok(out)
}

/// Counts for all 36 settings measured on `rho`, tagged with Alice's `outcome`.
pub fn tomography_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    outcome: usize,
    shots: u64,
    mode: CountMode,
    rng: &mut R,
) -> Result<Vec<CountRecord>> {
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            reason: "must be at least 1".into(),
        });
    }
    tomography_settings()
        .into_iter()
        .map(|setting| {
            let p = setting_probability(rho, &setting)?;
            let counts = match mode {
                CountMode::Analytic => shots as f64 * p,
                CountMode::Sampled => Binomial::new(shots, p)
                    .map_err(|e| Error::InvalidParameter {
                        name: "probability",
                        reason: e.to_string(),
                    })?
                    .sample(rng) as f64,
            };
            Ok(CountRecord {
                outcome,
                setting,
                counts,
                shots,
            })
        })
        .collect()
}

pub const COUNTS_HEADER: [&str; 5] = ["outcome", "pol", "spatial", "counts", "shots"];

/// Writes records as CSV with header `outcome,pol,spatial,counts,shots`.
pub fn write_counts_csv<W: Write>(records: &[CountRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COUNTS_HEADER)?;
    for r in records {
        w.write_record([
            r.outcome.to_string(),
            r.setting.polarization.to_string(),
            r.setting.spatial.to_string(),
            r.counts.to_string(),
            r.shots.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

pub fn read_counts_csv<R: Read>(input: R) -> Result<Vec<CountRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(COUNTS_HEADER) {
        return Err(Error::Format(format!(
            "expected header `{}`, found `{}`",
            COUNTS_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let bad = |what: &str| Error::Format(format!("row {}: invalid {what}", line + 1));
        let outcome: usize = field(0).parse().map_err(|_| bad("outcome"))?;
        if outcome >= PHOTON_DIM {
            return Err(bad("outcome"));
        }
        let polarization = field(1).parse()?;
        let spatial = field(2).parse()?;
        let counts: f64 = field(3).parse().map_err(|_| bad("counts"))?;
        let shots: u64 = field(4).parse().map_err(|_| bad("shots"))?;
        if counts.is_nan() || counts < 0.0 || counts > shots as f64 {
            return Err(bad("counts (must lie in [0, shots])"));
        }
        out.push(CountRecord {
            outcome,
            setting: MeasurementSetting::new(polarization, spatial),
            counts,
            shots,
        });
    }
    Ok(out)
}

/// The three phase-sensitive probabilities at one scan angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub angle_deg: f64,
    pub p_hh: f64,
    pub p_dr: f64,
    pub p_dl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub varied: ExperimentalPhase,
    pub base: ExperimentalPhases,
    pub points: Vec<FringePoint>,
}

/// The projectors `|Hh⟩`, `|Dr⟩`, `|Dl⟩` tracked in fringe scans.
pub fn fringe_settings() -> [MeasurementSetting; 3] {
    [
        MeasurementSetting::new(Polarization::H, SpatialMode::H),
        MeasurementSetting::new(Polarization::D, SpatialMode::R),
        MeasurementSetting::new(Polarization::D, SpatialMode::L),
    ]
}

/// Varies one experimental phase over `angles_deg` with the others held at `base`,
/// evaluating the fringe probabilities on Bob's corrected state.
pub fn fringe_scan(
    varied: ExperimentalPhase,
    base: ExperimentalPhases,
    angles_deg: &[f64],
    noise: &NoiseModel,
) -> Result<FringeScan> {
    if angles_deg.is_empty() {
        return Err(Error::InvalidParameter {
            name: "angles",
            reason: "grid is empty".into(),
        });
    }
    let [hh, dr, dl] = fringe_settings();
    let points = angles_deg
        .iter()
        .map(|&angle_deg| {
            let phases = base.with(varied, angle_deg.to_radians()).to_equimodular();
            let rho = corrected_bob_state(&phases, noise)?;
            Ok(FringePoint {
                angle_deg,
                p_hh: setting_probability(&rho, &hh)?,
                p_dr: setting_probability(&rho, &dr)?,
                p_dl: setting_probability(&rho, &dl)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(FringeScan { varied, base, points })
}

/// Writes a scan as CSV with header `angle_deg,p_Hh,p_Dr,p_Dl`.
pub fn write_fringe_csv<W: Write>(scan: &FringeScan, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["angle_deg", "p_Hh", "p_Dr", "p_Dl"])?;
    for p in &scan.points {
        w.write_record([
            p.angle_deg.to_string(),
            p.p_hh.to_string(),
            p.p_dr.to_string(),
            p.p_dl.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
