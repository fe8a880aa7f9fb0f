//! Classical fidelity limits, state-space volumes and packing bounds.
//!
//! Volumes are evaluated in log space; `(2π)^{n−1}` alone overflows an `f64`
//! near `n ≈ 400`. The plain-valued functions exponentiate the log forms.
//!
//! Conventions:
//! - `volume_ball(k)` is the unit ball in `ℝ^k`, so `volume_ball(2) = π`.
//! - `volume_sphere(d)` is the unit `d`-sphere in `ℝ^{d+1}`, so `volume_sphere(1) = 2π`.
//! - `volume_equimodular(n)` is the torus `n^{−1/2} T^n` modulo the global phase.
//! - `volume_projective(m)` is the closed form used for `ℂP^{m−1}`.

use std::f64::consts::{LN_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Densest lattice packing density on the line.
pub const PACKING_DENSITY_1D: f64 = 1.0;
/// Densest lattice packing density in the plane, `π/√18`.
pub const PACKING_DENSITY_2D: f64 = 0.740_480_489_693_061;

fn require(cond: bool, name: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: reason.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    General,
    Equimodular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityBound {
    pub d: usize,
    /// Real parameters describing the state: `2d − 2` general, `d − 1` equimodular.
    pub n_params: usize,
    pub value: f64,
    pub kind: BoundKind,
}

/// Best average fidelity of measure-and-prepare transfer of a Haar-random qudit, `2/(1+d)`.
pub fn classical_fidelity_general(d: usize) -> Result<f64> {
    require(d >= 1, "d", "must be at least 1")?;
    Ok(2.0 / (1.0 + d as f64))
}

/// Best average fidelity of measure-and-prepare transfer of an equimodular qudit, `(2d² − d)/d³`.
pub fn classical_fidelity_equimodular(d: usize) -> Result<f64> {
    require(d >= 1, "d", "must be at least 1")?;
    let d = d as f64;
    Ok((2.0 * d * d - d) / (d * d * d))
}

pub fn fidelity_bound(kind: BoundKind, d: usize) -> Result<FidelityBound> {
    let (value, n_params) = match kind {
        BoundKind::General => (classical_fidelity_general(d)?, 2 * d - 2),
        BoundKind::Equimodular => (classical_fidelity_equimodular(d)?, d - 1),
    };
    Ok(FidelityBound {
        d,
        n_params,
        value,
        kind,
    })
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
}

impl Estimate {
    fn from_moments(sum: f64, sum_sq: f64, n: usize) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let standard_error = if n > 1 {
            let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        } else {
            f64::INFINITY
        };
        Self {
            value: mean,
            standard_error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McEstimator {
    /// Measure in the Fourier basis, re-prepare the detected state: `Σ_k p_k²`.
    Strategy,
    /// The closed integrand `|Σ_j e^{iφ_j}|⁴ / d³`.
    Integrand,
}

/// Monte Carlo estimate of the equimodular classical limit with `φ_0 = 0` and
/// the other phases uniform on `[0, 2π)`.
pub fn mc_classical_fidelity_equimodular<R: Rng + ?Sized>(
    d: usize,
    samples: usize,
    estimator: McEstimator,
    rng: &mut R,
) -> Result<Estimate> {
    require(d >= 1, "d", "must be at least 1")?;
    require(samples >= 1, "samples", "must be at least 1")?;
    if d == 1 {
        return Ok(Estimate {
            value: 1.0,
            standard_error: 0.0,
        });
    }
    let df = d as f64;
    // e^{−2πi jk/d} table for the Fourier probabilities
    let twiddle: Vec<(f64, f64)> = (0..d * d)
        .map(|jk| {
            let a = -TAU * ((jk / d) * (jk % d) % d) as f64 / df;
            (a.cos(), a.sin())
        })
        .collect();
    let mut phase = vec![(1.0, 0.0); d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        for p in phase.iter_mut().skip(1) {
            let a = rng.random::<f64>() * TAU;
            *p = (a.cos(), a.sin());
        }
        let x = match estimator {
            McEstimator::Integrand => {
                let (re, im) = phase.iter().fold((0.0, 0.0), |(r, i), &(c, s)| (r + c, i + s));
                let m2 = re * re + im * im;
                m2 * m2 / (df * df * df)
            }
            McEstimator::Strategy => (0..d)
                .map(|k| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (j, &(c, s)) in phase.iter().enumerate() {
                        let (tc, ts) = twiddle[j * d + k];
                        re += c * tc - s * ts;
                        im += c * ts + s * tc;
                    }
                    let p = (re * re + im * im) / (df * df);
                    p * p
                })
                .sum(),
        };
        sum += x;
        sum_sq += x * x;
    }
    Ok(Estimate::from_moments(sum, sum_sq, samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityRow {
    pub d: usize,
    /// Equimodular parameter count `d − 1`.
    pub n_params: usize,
    pub general: f64,
    pub equimodular: f64,
    pub mc: Estimate,
}

/// One row per `d` with both closed forms and the strategy Monte Carlo estimate.
pub fn fidelity_table<R: Rng + ?Sized>(ds: &[usize], samples: usize, rng: &mut R) -> Result<Vec<FidelityRow>> {
    ds.iter()
        .map(|&d| {
            Ok(FidelityRow {
                d,
                n_params: d.saturating_sub(1),
                general: classical_fidelity_general(d)?,
                equimodular: classical_fidelity_equimodular(d)?,
                mc: mc_classical_fidelity_equimodular(d, samples, McEstimator::Strategy, rng)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Torus,
    Sphere,
    Ball,
    Projective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeForm {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub space: Space,
    pub n: usize,
    pub form: VolumeForm,
    pub ln_volume: f64,
}

impl VolumeReport {
    pub fn volume(&self) -> f64 {
        self.ln_volume.exp()
    }
}

/// `ln[(2π)^{n−1} n^{−(n−1)/2}]`.
pub fn ln_volume_equimodular(n: usize) -> Result<f64> {
    require(n >= 1, "n", "must be at least 1")?;
    let k = (n - 1) as f64;
    Ok(k * TAU.ln() - 0.5 * k * (n as f64).ln())
}

pub fn volume_equimodular(n: usize) -> Result<f64> {
    ln_volume_equimodular(n).map(f64::exp)
}

/// `ln[π^{k/2} / Γ(k/2 + 1)]` for the unit ball in `ℝ^k`.
pub fn ln_volume_ball(k: usize) -> Result<f64> {
    require(k >= 1, "dim", "must be at least 1")?;
    let h = k as f64 / 2.0;
    Ok(h * PI.ln() - ln_gamma(h + 1.0))
}

pub fn volume_ball(k: usize) -> Result<f64> {
    ln_volume_ball(k).map(f64::exp)
}

/// `ln[(d+1) · volume_ball(d+1)]`, the unit `d`-sphere.
pub fn ln_volume_sphere(d: usize) -> Result<f64> {
    require(d >= 1, "d", "must be at least 1")?;
    Ok(((d + 1) as f64).ln() + ln_volume_ball(d + 1)?)
}

pub fn volume_sphere(d: usize) -> Result<f64> {
    ln_volume_sphere(d).map(f64::exp)
}

/// `ln[√2 (2πe)^{d/2} d^{−d/2}]`.
pub fn ln_volume_sphere_asymptotic(d: usize) -> Result<f64> {
    require(d >= 1, "d", "must be at least 1")?;
    let h = d as f64 / 2.0;
    Ok(0.5 * LN_2 + h * (TAU.ln() + 1.0) - h * (d as f64).ln())
}

pub fn volume_sphere_asymptotic(d: usize) -> Result<f64> {
    ln_volume_sphere_asymptotic(d).map(f64::exp)
}

/// `ln[(2m−1) π^{(2m−3)/2} / (2 · m!)]`; undefined below `m = 2`.
pub fn ln_volume_projective(m: usize) -> Result<f64> {
    require(m >= 2, "m", "must be at least 2")?;
    let mf = m as f64;
    Ok((2.0 * mf - 1.0).ln() + (mf - 1.5) * PI.ln() - LN_2 - ln_gamma(mf + 1.0))
}

pub fn volume_projective(m: usize) -> Result<f64> {
    ln_volume_projective(m).map(f64::exp)
}

pub fn volume_report(space: Space, n: usize, form: VolumeForm) -> Result<VolumeReport> {
    let ln_volume = match (space, form) {
        (Space::Torus, VolumeForm::Exact) => ln_volume_equimodular(n)?,
        (Space::Ball, VolumeForm::Exact) => ln_volume_ball(n)?,
        (Space::Sphere, VolumeForm::Exact) => ln_volume_sphere(n)?,
        (Space::Sphere, VolumeForm::Asymptotic) => ln_volume_sphere_asymptotic(n)?,
        (Space::Projective, VolumeForm::Exact) => ln_volume_projective(n)?,
        (s, VolumeForm::Asymptotic) => {
            return Err(Error::InvalidParameter {
                name: "form",
                reason: format!("no asymptotic form for {s:?}"),
            })
        }
    };
    Ok(VolumeReport {
        space,
        n,
        form,
        ln_volume,
    })
}

/// Per-step growth base of the volume ratio, `2π/√(2πe)`.
pub fn ratio_asymptotic_base() -> f64 {
    TAU / (TAU * std::f64::consts::E).sqrt()
}

/// `ln[volume_equimodular(n) / volume_projective(1 + (n−1)/2)]` for odd `n ≥ 3`.
pub fn ln_volume_ratio(n: usize) -> Result<f64> {
    require(n >= 3 && n % 2 == 1, "n", format!("{n} is not odd and at least 3"))?;
    Ok(ln_volume_equimodular(n)? - ln_volume_projective(1 + (n - 1) / 2)?)
}

pub fn volume_ratio(n: usize) -> Result<f64> {
    ln_volume_ratio(n).map(f64::exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub n: usize,
    pub vol_torus: f64,
    pub vol_projective: f64,
    pub ratio: f64,
    pub log_ratio: f64,
}

pub fn volume_table(ns: &[usize]) -> Result<Vec<VolumeRow>> {
    ns.iter()
        .map(|&n| {
            let log_ratio = ln_volume_ratio(n)?;
            Ok(VolumeRow {
                n,
                vol_torus: volume_equimodular(n)?,
                vol_projective: volume_projective(1 + (n - 1) / 2)?,
                ratio: log_ratio.exp(),
                log_ratio,
            })
        })
        .collect()
}

/// `log₂ (1 + 2/ε)^n`.
pub fn log2_entropy_number_bound(n: usize, eps: f64) -> Result<f64> {
    require(eps > 0.0, "eps", "must be positive")?;
    Ok(n as f64 * (1.0 + 2.0 / eps).log2())
}

/// `(1 + 2/ε)^n`; overflows to infinity for large `n`, see the log form.
pub fn entropy_number_bound(n: usize, eps: f64) -> Result<f64> {
    log2_entropy_number_bound(n, eps).map(f64::exp2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingBounds {
    pub n: usize,
    pub c: f64,
    /// Largest `δ` at which the lower bound holds, `ln 2 / (32π C²)`.
    pub delta_threshold: f64,
    /// `log₂ P ≥ n / (8π C²)`.
    pub lower_log2: f64,
    /// `ln P ≤ 2n/δ` at `δ = delta_threshold`.
    pub upper_ln: f64,
}

impl PackingBounds {
    /// The upper bound `2n/δ` at another packing radius.
    pub fn upper_ln_at(&self, delta: f64) -> f64 {
        2.0 * self.n as f64 / delta
    }

    pub fn lower_ln(&self) -> f64 {
        self.lower_log2 * LN_2
    }
}

pub fn sudakov_packing_bounds(n: usize, c: f64) -> Result<PackingBounds> {
    require(n >= 1, "n", "must be at least 1")?;
    require(c > 0.0 && c.is_finite(), "C", "must be positive")?;
    let delta_threshold = LN_2 / (32.0 * PI * c * c);
    Ok(PackingBounds {
        n,
        c,
        delta_threshold,
        lower_log2: n as f64 / (8.0 * PI * c * c),
        upper_ln: 2.0 * n as f64 / delta_threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionEstimate {
    pub fraction: f64,
    /// Binomial error of the occupied-cell count.
    pub standard_error: f64,
    pub cells_hit: usize,
    pub cells_total: usize,
    pub samples: usize,
}

pub const MIN_REGION_SAMPLES: usize = 10_000;

/// Fourier-basis outcome probabilities of `(|0⟩ + e^{iφ₁}|1⟩ + e^{iφ₂}|2⟩)/√3`.
pub fn qutrit_fourier_probabilities(phi1: f64, phi2: f64) -> [f64; 3] {
    let mut p = [0.0; 3];
    for (k, pk) in p.iter_mut().enumerate() {
        let a1 = phi1 - TAU * k as f64 / 3.0;
        let a2 = phi2 - TAU * (2 * k) as f64 / 3.0;
        let re = 1.0 + a1.cos() + a2.cos();
        let im = a1.sin() + a2.sin();
        *pk = (re * re + im * im) / 9.0;
    }
    p
}

fn check_region_args(samples: usize, resolution: usize) -> Result<()> {
    require(
        samples >= MIN_REGION_SAMPLES,
        "samples",
        format!("need at least {MIN_REGION_SAMPLES}"),
    )?;
    require(resolution >= 1, "resolution", "grid needs at least one cell per axis")
}

fn region_estimate(hit: &[bool], samples: usize) -> RegionEstimate {
    let cells_total = hit.len();
    let cells_hit = hit.iter().filter(|&&h| h).count();
    let f = cells_hit as f64 / cells_total as f64;
    RegionEstimate {
        fraction: f,
        standard_error: (f * (1.0 - f) / cells_total as f64).sqrt(),
        cells_hit,
        cells_total,
        samples,
    }
}

/// Fraction of the positive octant of the unit sphere reached by
/// `(√p₀, √p₁, √p₂)` for equimodular qutrits measured in the Fourier basis.
///
/// The octant is cut into `resolution²` equal-area cells: uniform bins in
/// `z = √p₂` (equal-area by Archimedes) times uniform bins in the azimuth
/// `atan2(√p₁, √p₀) ∈ [0, π/2]`. The estimate is the share of cells that
/// received at least one sample.
pub fn qutrit_outcome_region_fraction<R: Rng + ?Sized>(
    samples: usize,
    resolution: usize,
    rng: &mut R,
) -> Result<RegionEstimate> {
    check_region_args(samples, resolution)?;
    let r = resolution;
    let mut hit = vec![false; r * r];
    for _ in 0..samples {
        let p = qutrit_fourier_probabilities(rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
        let [x, y, z] = p.map(|v| v.max(0.0).sqrt());
        let iz = ((z * r as f64) as usize).min(r - 1);
        let ia = ((y.atan2(x) / (PI / 2.0) * r as f64) as usize).min(r - 1);
        hit[iz * r + ia] = true;
    }
    Ok(region_estimate(&hit, samples))
}

/// The qubit analogue on the quarter circle `(√p₀, √p₁)`, binned by angle.
pub fn qubit_outcome_region_fraction<R: Rng + ?Sized>(
    samples: usize,
    resolution: usize,
    rng: &mut R,
) -> Result<RegionEstimate> {
    check_region_args(samples, resolution)?;
    let mut hit = vec![false; resolution];
    for _ in 0..samples {
        let phi = rng.random::<f64>() * TAU;
        let p0 = (1.0 + phi.cos()) / 2.0;
        let angle = (1.0 - p0).max(0.0).sqrt().atan2(p0.sqrt());
        let i = ((angle / (PI / 2.0) * resolution as f64) as usize).min(resolution - 1);
        hit[i] = true;
    }
    Ok(region_estimate(&hit, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fidelity_limits() {
        assert_eq!(classical_fidelity_general(2).unwrap(), 2.0 / 3.0);
        assert_eq!(classical_fidelity_general(1).unwrap(), 1.0);
        assert_abs_diff_eq!(classical_fidelity_general(4).unwrap(), 0.4, epsilon = 1e-15);
        assert_eq!(classical_fidelity_equimodular(4).unwrap(), 0.4375);
        assert_eq!(classical_fidelity_equimodular(1).unwrap(), 1.0);
        let d = 100_000;
        assert_relative_eq!(
            classical_fidelity_equimodular(d).unwrap() * (d - 1) as f64 / 2.0,
            1.0,
            epsilon = 1e-4
        );
        assert!(classical_fidelity_general(0).is_err());
        let b = fidelity_bound(BoundKind::General, 3).unwrap();
        assert_eq!(b.n_params, 4);
        assert_eq!(fidelity_bound(BoundKind::Equimodular, 3).unwrap().n_params, 2);
    }

    #[test]
    fn equimodular_below_general_at_equal_parameters() {
        for n in (2..=1000).step_by(2) {
            let eq = classical_fidelity_equimodular(n + 1).unwrap();
            let gen = classical_fidelity_general((n + 2) / 2).unwrap();
            assert!(eq < gen, "N={n}");
        }
        let r = classical_fidelity_equimodular(1001).unwrap() / classical_fidelity_general(501).unwrap();
        assert_abs_diff_eq!(r, 0.5, epsilon = 0.005);
    }

    #[test]
    fn mc_estimators_small_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = mc_classical_fidelity_equimodular(1, 10, McEstimator::Strategy, &mut rng).unwrap();
        assert_eq!(e.value, 1.0);
        for d in [2, 3] {
            let exact = classical_fidelity_equimodular(d).unwrap();
            for est in [McEstimator::Strategy, McEstimator::Integrand] {
                let e = mc_classical_fidelity_equimodular(d, 100_000, est, &mut rng).unwrap();
                assert!((e.value - exact).abs() < 4.0 * e.standard_error, "{d} {est:?} {e:?}");
            }
        }
        assert!(mc_classical_fidelity_equimodular(3, 0, McEstimator::Strategy, &mut rng).is_err());
    }

    #[test]
    fn volume_examples() {
        assert_relative_eq!(
            volume_equimodular(3).unwrap(),
            4.0 * PI * PI / 3.0,
            max_relative = 1e-13
        );
        assert_eq!(volume_equimodular(1).unwrap(), 1.0);
        assert_relative_eq!(volume_equimodular(2).unwrap(), PI * 2f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(volume_ball(2).unwrap(), PI, max_relative = 1e-13);
        assert_relative_eq!(volume_ball(3).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-13);
        assert_relative_eq!(volume_sphere(1).unwrap(), TAU, max_relative = 1e-13);
        assert_relative_eq!(volume_sphere(2).unwrap(), 4.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(volume_projective(2).unwrap(), 0.75 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(
            volume_projective(3).unwrap(),
            5.0 * PI.powf(1.5) / 12.0,
            max_relative = 1e-13
        );
        assert!(volume_projective(1).is_err());
        let r = volume_sphere(200).unwrap() / volume_sphere_asymptotic(200).unwrap();
        assert!((r - 1.0).abs() < 0.01);
        assert!(volume_report(Space::Torus, 3, VolumeForm::Asymptotic).is_err());
        assert_relative_eq!(
            volume_report(Space::Ball, 2, VolumeForm::Exact).unwrap().volume(),
            PI,
            max_relative = 1e-13
        );
    }

    #[test]
    fn log_space_survives_large_n() {
        // (2π)^{n−1} alone would overflow; the product underflows instead
        assert!(TAU.powi(1000).is_infinite());
        let ln = ln_volume_equimodular(1001).unwrap();
        assert!(ln.is_finite() && ln < -700.0);
        assert_eq!(volume_equimodular(1001).unwrap(), 0.0);
        assert!(ln_volume_ratio(1001).unwrap().is_finite());
    }

    #[test]
    fn ratio_examples() {
        assert_relative_eq!(
            volume_ratio(3).unwrap(),
            (4.0 * PI * PI / 3.0) / (0.75 * PI.sqrt()),
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(volume_ratio(3).unwrap(), 9.899, epsilon = 1e-3);
        assert!(volume_ratio(4).is_err());
        assert!(volume_ratio(1).is_err());
        let mut prev = f64::NEG_INFINITY;
        for n in (3..=41).step_by(2) {
            let l = ln_volume_ratio(n).unwrap();
            assert!(l > 0.0 && l > prev);
            prev = l;
        }
        // successive ratios approach 2π/e slowly
        let step = ln_volume_ratio(100_001).unwrap() - ln_volume_ratio(99_999).unwrap();
        assert_abs_diff_eq!(step, (TAU / std::f64::consts::E).ln(), epsilon = 1e-3);
        assert_abs_diff_eq!(
            2.0 * ratio_asymptotic_base().ln(),
            (TAU / std::f64::consts::E).ln(),
            epsilon = 1e-14
        );
        let t = volume_table(&[3, 5]).unwrap();
        assert_eq!(t[1].n, 5);
        assert_relative_eq!(t[0].ratio, t[0].vol_torus / t[0].vol_projective, max_relative = 1e-12);
    }

    #[test]
    fn entropy_and_packing() {
        assert_relative_eq!(entropy_number_bound(1, 2.0).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(
            entropy_number_bound(10, 0.5).unwrap(),
            5f64.powi(10),
            max_relative = 1e-13
        );
        assert!(entropy_number_bound(3, 0.0).is_err());
        let a = log2_entropy_number_bound(7, 0.3).unwrap();
        let b = log2_entropy_number_bound(14, 0.3).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-15);

        let p = sudakov_packing_bounds(100, 1.0).unwrap();
        assert_relative_eq!(p.delta_threshold, 0.006897, max_relative = 1e-3);
        assert_relative_eq!(p.delta_threshold, LN_2 / (32.0 * PI), max_relative = 1e-15);
        assert_abs_diff_eq!(p.lower_log2, 3.9789, epsilon = 1e-4);
        assert_relative_eq!(
            sudakov_packing_bounds(200, 1.0).unwrap().lower_log2,
            2.0 * p.lower_log2,
            max_relative = 1e-15
        );
        for n in 1..=1000 {
            let b = sudakov_packing_bounds(n, 1.0).unwrap();
            assert!(b.lower_ln() <= b.upper_ln);
        }
        assert!(sudakov_packing_bounds(0, 1.0).is_err());
        assert!(sudakov_packing_bounds(3, -1.0).is_err());
    }

    #[test]
    fn qutrit_probabilities_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let p = qutrit_fourier_probabilities(rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
            assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert!(p.iter().all(|&v| v >= -1e-15));
        }
        assert_abs_diff_eq!(qutrit_fourier_probabilities(0.0, 0.0)[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn region_fractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = qubit_outcome_region_fraction(100_000, 200, &mut rng).unwrap();
        assert_eq!(q.fraction, 1.0);
        let t = qutrit_outcome_region_fraction(200_000, 100, &mut rng).unwrap();
        assert!(t.fraction > 0.2 && t.fraction < 0.45, "{t:?}");
        assert!(qutrit_outcome_region_fraction(9_999, 100, &mut rng).is_err());
        assert!(qutrit_outcome_region_fraction(10_000, 0, &mut rng).is_err());
    }
}
