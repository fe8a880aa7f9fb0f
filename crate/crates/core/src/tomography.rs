//! Maximum-likelihood state reconstruction, numerical correction and phase readout.
//!
//! The density matrix is parameterized as `ρ = T†T / tr(T†T)` with `T` lower
//! triangular: the `d` diagonal entries are real and the `d(d−1)/2` strictly
//! lower entries complex, `d²` real parameters in all. Every parameter vector
//! therefore maps to a valid state and the search is unconstrained.
//!
//! Two objectives are available. The default is the Gaussian approximation
//! `Σ_s (N_s p_s − n_s)² / (2 N_s p_s)`; the binomial negative log-likelihood
//! is the exact alternative. Both are minimized with BFGS and a backtracking
//! Armijo line search, starting from `T = I/2`.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsim::{CountRecord, PHOTON_DIM};
use crate::protocols::{canonical_angle, EquimodularPhases};
use crate::qcore::{DensityMatrix, PureState, UnitaryOp, C64};

/// Coherences at or below this magnitude carry no phase.
pub const COHERENCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Likelihood {
    #[default]
    Gaussian,
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub likelihood: Likelihood,
    pub max_iterations: usize,
    /// Relative objective change below which the search may stop.
    pub objective_tol: f64,
    /// Parameter step norm below which the search may stop.
    pub step_tol: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            likelihood: Likelihood::Gaussian,
            max_iterations: 10_000,
            objective_tol: 1e-10,
            step_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    pub neg_log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial point.
    /// Restarts contribute only the iterates that beat the previous best.
    pub objective_trace: Vec<f64>,
}

/// One projective measurement: `counts` of `shots` trials landed on `state`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub state: PureState,
    pub counts: f64,
    pub shots: f64,
}

/// The reconstruction objective over Cholesky-style parameters.
#[derive(Debug, Clone)]
pub struct MleProblem {
    dim: usize,
    observations: Vec<Observation>,
    likelihood: Likelihood,
}

impl MleProblem {
    /// Validates the data: consistent dimension, positive shots, non-zero
    /// total counts and a projector set spanning all `d²` Hermitian directions.
    pub fn new(observations: Vec<Observation>, likelihood: Likelihood) -> Result<Self> {
        let dim = observations.first().map(|o| o.state.dim()).unwrap_or(0);
        let required = dim * dim;
        let observations: Vec<Observation> = observations.into_iter().filter(|o| o.shots > 0.0).collect();
        for o in &observations {
            if o.state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: o.state.dim(),
                });
            }
            if !(o.counts >= 0.0 && o.counts <= o.shots) {
                return Err(Error::Format(format!("counts {} outside [0, {}]", o.counts, o.shots)));
            }
        }
        let rank = projector_rank(&observations, dim);
        if observations.is_empty() || rank < required {
            return Err(Error::InsufficientSettings {
                rank,
                required: required.max(1),
            });
        }
        if observations.iter().all(|o| o.counts == 0.0) {
            return Err(Error::AllZeroCounts);
        }
        Ok(Self {
            dim,
            observations,
            likelihood,
        })
    }

    /// Builds the problem from tomography records sharing one Alice outcome.
    pub fn from_records(records: &[CountRecord], likelihood: Likelihood) -> Result<Self> {
        if let Some(first) = records.first() {
            if let Some(other) = records.iter().find(|r| r.outcome != first.outcome) {
                return Err(Error::MixedOutcomes(first.outcome, other.outcome));
            }
        }
        let obs = records
            .iter()
            .map(|r| Observation {
                state: r.setting.state(),
                counts: r.counts,
                shots: r.shots as f64,
            })
            .collect();
        Self::new(obs, likelihood)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_params(&self) -> usize {
        self.dim * self.dim
    }

    /// Parameters of `T = I/2`, the maximally mixed state.
    pub fn initial_params(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_params()];
        for i in 0..self.dim {
            x[param_index(i, i)] = 0.5;
        }
        x
    }

    pub fn density(&self, params: &[f64]) -> DensityMatrix {
        params_to_density(self.dim, params)
    }

    pub fn objective(&self, params: &[f64]) -> f64 {
        self.evaluate(params, false).0
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        self.evaluate(params, true).1
    }

    /// Objective and (optionally) its analytic gradient.
    fn evaluate(&self, params: &[f64], want_grad: bool) -> (f64, Vec<f64>) {
        let d = self.dim;
        let t = lower_triangular(d, params);
        let z: f64 = t.iter().map(|c| c.norm_sqr()).sum();
        let mut f = 0.0;
        let mut grad = vec![0.0; if want_grad { d * d } else { 0 }];
        for o in &self.observations {
            let s = o.state.vector();
            let u = &t * s;
            let q = u.norm_squared();
            let p = q / z;
            let (term, dfdp) = match self.likelihood {
                Likelihood::Gaussian => gaussian_term(p, o.counts, o.shots),
                Likelihood::Binomial => binomial_term(p, o.counts, o.shots),
            };
            f += term;
            if !want_grad || dfdp == 0.0 {
                continue;
            }
            for i in 0..d {
                for j in 0..=i {
                    let w = u[i].conj() * s[j];
                    let k = param_index(i, j);
                    let dq_re = 2.0 * w.re;
                    grad[k] += dfdp * (dq_re - p * 2.0 * params[k]) / z;
                    if i > j {
                        let dq_im = -2.0 * w.im;
                        grad[k + 1] += dfdp * (dq_im - p * 2.0 * params[k + 1]) / z;
                    }
                }
            }
        }
        (f, grad)
    }
}

/// `(N p − n)² / (2 N p)` written so that `n = 0` needs no division.
fn gaussian_term(p: f64, n: f64, shots: f64) -> (f64, f64) {
    let np = shots * p;
    if n == 0.0 {
        return (np / 2.0, shots / 2.0);
    }
    if np <= 0.0 {
        return (f64::INFINITY, 0.0);
    }
    (np / 2.0 - n + n * n / (2.0 * np), shots / 2.0 - n * n / (2.0 * np * p))
}

/// Binomial negative log-likelihood without the constant combinatorial term.
fn binomial_term(p: f64, n: f64, shots: f64) -> (f64, f64) {
    let miss = shots - n;
    let mut f = 0.0;
    let mut g = 0.0;
    if n > 0.0 {
        f -= n * p.ln();
        g -= n / p;
    }
    if miss > 0.0 {
        f -= miss * (1.0 - p).ln();
        g += miss / (1.0 - p);
    }
    if f.is_nan() {
        f = f64::INFINITY;
    }
    (f, g)
}

/// Position of `Re T_ij` in the parameter vector; `Im T_ij` (for `i > j`) follows it.
fn param_index(i: usize, j: usize) -> usize {
    // rows before i hold i² parameters; within row i, each j < i takes two
    i * i + 2 * j
}

fn lower_triangular(d: usize, params: &[f64]) -> DMatrix<C64> {
    let mut t = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let k = param_index(i, j);
            let im = if i > j { params[k + 1] } else { 0.0 };
            t[(i, j)] = C64::new(params[k], im);
        }
    }
    t
}

/// `T†T / tr(T†T)` for a parameter vector of length `d²`. A zero vector maps
/// to the maximally mixed state.
pub fn params_to_density(dim: usize, params: &[f64]) -> DensityMatrix {
    assert_eq!(params.len(), dim * dim, "parameter vector length");
    let t = lower_triangular(dim, params);
    let m = t.adjoint() * &t;
    let tr = m.trace().re;
    if tr <= 0.0 {
        return DensityMatrix::maximally_mixed(dim);
    }
    let m = m.unscale(tr);
    let herm = (&m + m.adjoint()).scale(0.5);
    DensityMatrix::from_matrix_unchecked(herm)
}

/// Rank of the real span of the projectors `|s⟩⟨s|`.
fn projector_rank(obs: &[Observation], dim: usize) -> usize {
    if obs.is_empty() || dim == 0 {
        return 0;
    }
    let cols = 2 * dim * dim;
    let mut a = DMatrix::<f64>::zeros(obs.len().max(cols), cols);
    for (r, o) in obs.iter().enumerate() {
        let proj = o.state.projector();
        for (k, c) in proj.matrix().iter().enumerate() {
            a[(r, 2 * k)] = c.re;
            a[(r, 2 * k + 1)] = c.im;
        }
    }
    let sv = a.singular_values();
    let max = sv.max();
    sv.iter().filter(|&&s| s > 1e-9 * max.max(1.0)).count()
}

/// Reconstructs Bob's state from the records of a single Alice outcome.
pub fn mle_reconstruct(records: &[CountRecord], options: &MleOptions) -> Result<ReconstructionResult> {
    let problem = MleProblem::from_records(records, options.likelihood)?;
    Ok(minimize(&problem, options))
}

/// Minimizes the objective from `T = I/2`.
///
/// Each BFGS run can stall on a rank-deficient `T`, where the gradient along
/// a vanished row is zero although the objective is convex in ρ. After every
/// run the search restarts from the current estimate mixed with a little
/// `I/d`, and keeps the restart only if it ends lower.
pub fn minimize(problem: &MleProblem, options: &MleOptions) -> ReconstructionResult {
    const MAX_RESTARTS: usize = 20;
    const REMIX: f64 = 1e-2;

    let mut run = bfgs(
        problem,
        DVector::from_vec(problem.initial_params()),
        options.max_iterations,
        options,
    );
    let mut trace = run.trace.clone();
    let mut iterations = run.iterations;
    for _ in 0..MAX_RESTARTS {
        let budget = options.max_iterations.saturating_sub(iterations);
        if budget == 0 {
            break;
        }
        let rho = problem.density(run.x.as_slice());
        let id = DMatrix::<C64>::identity(problem.dim, problem.dim).unscale(problem.dim as f64);
        let mixed = rho.matrix().scale(1.0 - REMIX) + id.scale(REMIX);
        let Some(x0) = density_to_params(&mixed) else { break };
        let next = bfgs(problem, x0, budget, options);
        iterations += next.iterations;
        let gain = run.f - next.f;
        if gain <= options.objective_tol * run.f.abs().max(1.0) {
            break;
        }
        trace.extend(next.trace.iter().copied().filter(|&v| v < run.f));
        run = next;
    }
    ReconstructionResult {
        rho: problem.density(run.x.as_slice()),
        neg_log_likelihood: run.f,
        iterations,
        converged: run.converged,
        objective_trace: trace,
    }
}

struct Run {
    x: DVector<f64>,
    f: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

/// Lower-triangular `T` with `T†T = ρ` for positive-definite ρ, as parameters.
fn density_to_params(rho: &DMatrix<C64>) -> Option<DVector<f64>> {
    let d = rho.nrows();
    // reversing the basis turns the usual L L† factor into the T†T form
    let flipped = DMatrix::from_fn(d, d, |i, j| rho[(d - 1 - i, d - 1 - j)]);
    let l = nalgebra::Cholesky::new(flipped)?.unpack();
    let t = DMatrix::from_fn(d, d, |i, j| l[(d - 1 - j, d - 1 - i)].conj());
    let mut x = DVector::zeros(d * d);
    for i in 0..d {
        for j in 0..=i {
            let k = param_index(i, j);
            x[k] = t[(i, j)].re;
            if i > j {
                x[k + 1] = t[(i, j)].im;
            }
        }
    }
    Some(x)
}

/// BFGS with a monotone Armijo line search.
fn bfgs(problem: &MleProblem, x0: DVector<f64>, max_iterations: usize, options: &MleOptions) -> Run {
    const ARMIJO: f64 = 1e-4;
    const MAX_HALVINGS: usize = 60;

    let n = problem.n_params();
    let mut x = x0;
    let (mut f, g) = problem.evaluate(x.as_slice(), true);
    let mut g = DVector::from_vec(g);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut trace = vec![f];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iterations {
        iterations += 1;
        let mut dir = -(&h * &g);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            h.fill_with_identity();
            dir = -g.clone();
            slope = -g.norm_squared();
        }
        if slope == 0.0 {
            converged = true;
            break;
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = &x + &dir * alpha;
            let ft = problem.objective(trial.as_slice());
            if ft.is_finite() && ft <= f + ARMIJO * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no representable descent left along the search direction
            converged = g.amax() <= 1e-6 * f.abs().max(1.0);
            break;
        };

        let g_new = DVector::from_vec(problem.gradient(x_new.as_slice()));
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ, expanded
            h += (&s * s.transpose()) * (rho * (1.0 + rho * yhy)) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }

        let df = (f - f_new).abs();
        let step = s.norm();
        x = x_new;
        f = f_new;
        g = g_new;
        trace.push(f);
        if df <= options.objective_tol * f.abs().max(1.0) && step <= options.step_tol {
            converged = true;
            break;
        }
    }

    Run {
        x,
        f,
        iterations,
        converged,
        trace,
    }
}

/// `Σ_k w_k U_k ρ_k U_k† / Σ_k w_k`.
pub fn correct_and_average(
    rhos: &[DensityMatrix],
    corrections: &[UnitaryOp],
    weights: &[f64],
) -> Result<DensityMatrix> {
    if corrections.len() != rhos.len() {
        return Err(Error::DimensionMismatch {
            expected: rhos.len(),
            found: corrections.len(),
        });
    }
    if weights.len() != rhos.len() {
        return Err(Error::DimensionMismatch {
            expected: rhos.len(),
            found: weights.len(),
        });
    }
    let corrected: Vec<DensityMatrix> = rhos
        .iter()
        .zip(corrections)
        .map(|(r, u)| u.conjugate(r))
        .collect::<Result<_>>()?;
    let parts: Vec<(f64, &DensityMatrix)> = weights.iter().copied().zip(corrected.iter()).collect();
    DensityMatrix::mixture(&parts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub phases: EquimodularPhases,
    /// Per-phase standard deviation in radians, when a bootstrap was run.
    pub uncertainty: Option<Vec<f64>>,
}

impl PhaseEstimate {
    pub fn degrees(&self) -> Vec<f64> {
        self.phases.degrees()
    }
}

/// `φ_j = arg ρ_{j0}` mapped into `[0, 2π)`.
pub fn extract_phases(rho: &DensityMatrix) -> Result<PhaseEstimate> {
    if rho.dim() < 2 {
        return Err(Error::DimensionMismatch {
            expected: PHOTON_DIM,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let phases = (1..rho.dim())
        .map(|j| {
            let c = m[(j, 0)];
            if c.norm() <= COHERENCE_FLOOR {
                return Err(Error::UndefinedPhase {
                    index: j,
                    magnitude: c.norm(),
                });
            }
            Ok(canonical_angle(c.arg()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseEstimate {
        phases: EquimodularPhases::new(phases)?,
        uncertainty: None,
    })
}

/// Circular standard deviation `√(−2 ln R)` of angle samples.
pub fn circular_std(angles: &[f64]) -> f64 {
    if angles.is_empty() {
        return f64::NAN;
    }
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    let r = (s * s + c * c).sqrt() / angles.len() as f64;
    (-2.0 * r.min(1.0).ln()).max(0.0).sqrt()
}

/// Statistical phase uncertainty by parametric resampling of the counts.
///
/// Each resample redraws every record as `Binomial(shots, counts/shots)`,
/// reconstructs all outcomes, applies the corrections and reads the phases.
pub fn bootstrap_phase_uncertainty<R: Rng + ?Sized>(
    records_by_outcome: &[Vec<CountRecord>],
    corrections: &[UnitaryOp],
    weights: &[f64],
    resamples: usize,
    options: &MleOptions,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if resamples < 2 {
        return Err(Error::InvalidParameter {
            name: "resamples",
            reason: "need at least 2".into(),
        });
    }
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut rhos = Vec::with_capacity(records_by_outcome.len());
        for recs in records_by_outcome {
            let redrawn = recs
                .iter()
                .map(|r| {
                    let p = (r.counts / r.shots as f64).clamp(0.0, 1.0);
                    let b = Binomial::new(r.shots, p).map_err(|e| Error::InvalidParameter {
                        name: "counts",
                        reason: e.to_string(),
                    })?;
                    Ok(CountRecord {
                        counts: b.sample(rng) as f64,
                        ..*r
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rhos.push(mle_reconstruct(&redrawn, options)?.rho);
        }
        let avg = correct_and_average(&rhos, corrections, weights)?;
        samples.push(extract_phases(&avg)?.phases.radians().to_vec());
    }
    let n_phases = samples[0].len();
    Ok((0..n_phases)
        .map(|j| circular_std(&samples.iter().map(|s| s[j]).collect::<Vec<_>>()))
        .collect())
}

/// One line of the results table: target phases, measured phases, fidelity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: Option<String>,
    pub target_deg: Vec<f64>,
    pub measured_deg: Vec<f64>,
    pub fidelity: f64,
}

pub fn report_row(target: &EquimodularPhases, estimate: &PhaseEstimate, fidelity: f64) -> ReportRow {
    ReportRow {
        label: None,
        target_deg: target.degrees(),
        measured_deg: estimate.degrees(),
        fidelity,
    }
}

fn join<T: fmt::Display>(xs: impl Iterator<Item = T>) -> String {
    xs.map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Rounds away float noise in degree values that came from exact integers.
fn tidy_degrees(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x
    }
}

impl ReportRow {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn fidelity_percent(&self) -> f64 {
        100.0 * self.fidelity
    }

    /// `112, 180, 278 | 112.0, 180.0, 278.0 | 100.0`
    pub fn table_line(&self) -> String {
        format!(
            "{} | {} | {:.1}",
            join(self.target_deg.iter().map(|&x| tidy_degrees(x))),
            join(self.measured_deg.iter().map(|x| format!("{x:.1}"))),
            self.fidelity_percent()
        )
    }
}

impl fmt::Display for ReportRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table_line())
    }
}

/// CSV with columns `label, target_phi1.., measured_phi1.., fidelity_pct`.
pub fn write_report_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let n = rows.first().map(|r| r.target_deg.len()).unwrap_or(3);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string()];
    header.extend((1..=n).map(|j| format!("target_phi{j}_deg")));
    header.extend((1..=n).map(|j| format!("measured_phi{j}_deg")));
    header.push("fidelity_pct".into());
    w.write_record(&header)?;
    for r in rows {
        if r.target_deg.len() != n || r.measured_deg.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.target_deg.len().max(r.measured_deg.len()),
            });
        }
        let mut rec = vec![r.label.clone().unwrap_or_default()];
        rec.extend(r.target_deg.iter().map(|&x| tidy_degrees(x).to_string()));
        rec.extend(r.measured_deg.iter().map(|x| format!("{x:.1}")));
        rec.push(format!("{:.1}", r.fidelity_percent()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

/// `{"dim": d, "rows": [[[re, im], ...], ...]}` with rows in order.
pub fn density_to_json(rho: &DensityMatrix) -> serde_json::Value {
    let m = rho.matrix();
    let rows: Vec<Vec<[f64; 2]>> = (0..rho.dim())
        .map(|i| (0..rho.dim()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    serde_json::json!({ "dim": rho.dim(), "rows": rows })
}

pub fn density_from_json(v: &serde_json::Value) -> Result<DensityMatrix> {
    #[derive(Deserialize)]
    struct Repr {
        dim: usize,
        rows: Vec<Vec<[f64; 2]>>,
    }
    let r: Repr = serde_json::from_value(v.clone()).map_err(|e| Error::Format(e.to_string()))?;
    if r.rows.len() != r.dim || r.rows.iter().any(|row| row.len() != r.dim) {
        return Err(Error::Format(format!("expected a {0}x{0} matrix", r.dim)));
    }
    DensityMatrix::new(DMatrix::from_fn(r.dim, r.dim, |i, j| {
        C64::new(r.rows[i][j][0], r.rows[i][j][1])
    }))
}
