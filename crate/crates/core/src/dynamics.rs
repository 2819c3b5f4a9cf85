//! Time-dependent protocols: linear field ramps, sudden quenches and the
//! Loschmidt echo, time-resolved QFI and estimator precision, and the
//! speed-limit bound.
//!
//! Propagation uses a per-step Krylov-subspace exponential of the
//! midpoint Hamiltonian. The projected step is exactly unitary for a
//! Hermitian operator, so norms are preserved to machine precision; the
//! step count is verified by doubling until the relevant overlaps move by
//! less than 1e-8.

use num_complex::Complex64;

use crate::eig;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrology::{fidelity_pure, ObservableTag, PrecisionResult};
use crate::model::{build_h1, build_hamiltonian, ChainParams, PureState, SparseHermitian};
use crate::scaling::TimeSeries;

/// Per-step tolerance of the Krylov exponential.
pub const KRYLOV_TOL: f64 = 1e-12;

/// Largest Krylov subspace per step before the step is split.
const KRYLOV_MAX_DIM: usize = 48;

/// Convergence target for step doubling: final overlaps must move less
/// than this when the step count doubles.
const STEP_DOUBLING_TOL: f64 = 1e-8;

const MAX_STEPS: usize = 1 << 20;

/// Linear ramp of the field shift over a total evolution time.
#[derive(Debug, Clone, Copy)]
pub enum RampProfile {
    Linear,
}

#[derive(Debug, Clone, Copy)]
pub struct RampProtocol {
    /// Final field shift delta_lambda reached at the end of the ramp.
    pub delta_lambda: f64,
    /// Total evolution time (inverse-energy units).
    pub total_time: f64,
    pub profile: RampProfile,
    /// Initial time discretization; propagation code doubles this until
    /// converged.
    pub steps: usize,
}

impl RampProtocol {
    pub fn linear(delta_lambda: f64, total_time: f64, steps: usize) -> Self {
        assert!(total_time > 0.0 && total_time.is_finite());
        assert!(steps >= 1);
        assert!(delta_lambda.is_finite());
        RampProtocol {
            delta_lambda,
            total_time,
            profile: RampProfile::Linear,
            steps,
        }
    }

    /// Quench rate tau_Q = t / delta_lambda (infinite for a stationary
    /// protocol with delta_lambda = 0).
    pub fn quench_rate(&self) -> f64 {
        self.total_time / self.delta_lambda
    }

    /// Normalized time average of the profile; 1/2 for a linear ramp.
    pub fn zeta(&self) -> f64 {
        match self.profile {
            RampProfile::Linear => 0.5,
        }
    }

    /// Field shift at intermediate time `t_prime`.
    pub fn shift_at(&self, t_prime: f64) -> f64 {
        match self.profile {
            RampProfile::Linear => self.delta_lambda * t_prime / self.total_time,
        }
    }
}

/// Drive protocols accepted by the time-resolved precision sweep.
#[derive(Debug, Clone, Copy)]
pub enum Drive {
    /// Linear ramp reaching `delta_lambda` at each requested time.
    Ramp { delta_lambda: f64 },
    /// Sudden quench of the field by `delta_lambda` at t = 0.
    Sudden { delta_lambda: f64 },
}

/// Krylov propagator for H(lambda + c * H_1) acting on complex states.
struct Propagator<'a> {
    h0: &'a SparseHermitian,
    h1: &'a SparseHermitian,
    scratch: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    fn new(h0: &'a SparseHermitian, h1: &'a SparseHermitian) -> Self {
        let dim = h0.dim();
        Propagator {
            h0,
            h1,
            scratch: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    fn apply(&mut self, coeff: f64, x: &[Complex64], y: &mut [Complex64]) {
        self.h0.apply_complex(x, y);
        if coeff != 0.0 {
            self.h1.apply_complex(x, &mut self.scratch);
            for (yi, si) in y.iter_mut().zip(&self.scratch) {
                *yi += si * coeff;
            }
        }
    }

    /// psi <- exp(-i tau (H0 + coeff H1)) psi via a Lanczos subspace,
    /// splitting the step in half whenever the subspace cap is hit.
    fn step(&mut self, psi: &mut Vec<Complex64>, coeff: f64, tau: f64) {
        let dim = psi.len();
        let norm0: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm0 == 0.0 || tau == 0.0 {
            return;
        }
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(16);
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        basis.push(psi.iter().map(|a| a / norm0).collect());

        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        loop {
            let j = basis.len() - 1;
            // w = H q_j  (borrow juggling: take the vector out briefly)
            let qj = std::mem::take(&mut basis[j]);
            self.apply(coeff, &qj, &mut w);
            basis[j] = qj;

            let a: f64 = basis[j]
                .iter()
                .zip(&w)
                .map(|(q, wi)| (q.conj() * wi).re)
                .sum();
            alpha.push(a);
            for (wi, qi) in w.iter_mut().zip(&basis[j]) {
                *wi -= qi * a;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wi, qi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= qi * b;
                }
            }
            // one reorthogonalization pass keeps the short recurrence clean
            for q in &basis {
                let c: Complex64 = q.iter().zip(&w).map(|(qi, wi)| qi.conj() * wi).sum();
                if c.norm() > 0.0 {
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= qi * c;
                    }
                }
            }
            let b: f64 = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();

            let m = alpha.len();
            let happy = b < 1e-14;
            if happy || m >= 4 {
                let u = expi_tridiag(&alpha, &beta, tau);
                let err = if happy { 0.0 } else { b * u[m - 1].norm() * tau.abs() };
                if err <= KRYLOV_TOL || happy {
                    for (i, p) in psi.iter_mut().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (k, q) in basis.iter().enumerate() {
                            acc += q[i] * u[k];
                        }
                        *p = acc * norm0;
                    }
                    return;
                }
            }
            if m >= KRYLOV_MAX_DIM.min(dim) {
                // subspace cap: split the step
                self.step(psi, coeff, tau / 2.0);
                self.step(psi, coeff, tau / 2.0);
                return;
            }
            beta.push(b);
            let q: Vec<Complex64> = w.iter().map(|x| x / b).collect();
            basis.push(q);
        }
    }
}

/// u = exp(-i tau T) e_1 for the real symmetric tridiagonal T.
fn expi_tridiag(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = Matrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i > 0 {
            t[(i, i - 1)] = beta[i - 1];
            t[(i - 1, i)] = beta[i - 1];
        }
    }
    let (vals, vecs) = t.eigh().expect("tridiagonal eigendecomposition");
    let mut u = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        let phase = Complex64::from_polar(1.0, -tau * vals[k]);
        let w = vecs[(0, k)];
        for i in 0..m {
            u[i] += phase * (w * vecs[(i, k)]);
        }
    }
    u
}

/// Evolve `s0` through the ramp with exactly `r.steps` midpoint steps.
pub fn evolve_ramp(s0: &PureState, p: &ChainParams, r: &RampProtocol) -> Result<PureState> {
    if s0.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            left: p.dim(),
            right: s0.dim(),
        });
    }
    let h0 = build_hamiltonian(p)?;
    let h1 = build_h1(p)?;
    let mut prop = Propagator::new(&h0, &h1);
    let mut psi: Vec<Complex64> = s0.amplitudes().to_vec();
    let tau = r.total_time / r.steps as f64;
    for k in 0..r.steps {
        let t_mid = (k as f64 + 0.5) * tau;
        prop.step(&mut psi, r.shift_at(t_mid), tau);
    }
    PureState::new(psi)
}

/// Evolve through the ramp, doubling the step count until the final state
/// stops moving (overlap drift below 1e-8). Returns the state and the
/// step count that converged.
pub fn evolve_ramp_converged(
    s0: &PureState,
    p: &ChainParams,
    r: &RampProtocol,
) -> Result<(PureState, usize)> {
    let mut steps = r.steps.max(1);
    let mut prev = evolve_ramp(s0, p, &RampProtocol { steps, ..*r })?;
    while steps <= MAX_STEPS / 2 {
        let steps2 = steps * 2;
        let next = evolve_ramp(s0, p, &RampProtocol { steps: steps2, ..*r })?;
        let drift = (1.0 - fidelity_pure(&prev, &next)?).abs();
        if drift < STEP_DOUBLING_TOL {
            return Ok((next, steps2));
        }
        prev = next;
        steps = steps2;
    }
    Err(Error::PropagationNotConverged {
        steps,
        drift: f64::NAN,
    })
}

/// Time-resolved QFI of the ramp protocol: G(lambda, t) = 8 (1 - F) /
/// delta_lambda^2 with F the overlap between the ramped state and the
/// same initial ground state evolved under the unperturbed Hamiltonian.
pub fn qfi_time(p: &ChainParams, r: &RampProtocol) -> Result<f64> {
    let h = build_hamiltonian(p)?;
    let gs = eig::ground_state(&h, eig::DEFAULT_TOL)?;
    let psi0 = gs.ground_state().clone();

    let (ramped, steps) = evolve_ramp_converged(&psi0, p, r)?;
    let reference = evolve_ramp(
        &psi0,
        p,
        &RampProtocol {
            delta_lambda: 0.0,
            steps,
            ..*r
        },
    )?;
    let f = fidelity_pure(&reference, &ramped)?;
    let deficit = (1.0 - f).max(0.0);
    if deficit >= 0.1 {
        return Err(Error::RegimeViolation {
            delta: r.delta_lambda,
            one_minus_f: deficit,
        });
    }
    Ok(8.0 * deficit / (r.delta_lambda * r.delta_lambda))
}

/// Right-hand side of the speed-limit bound
/// G^(1/2) <= t * 2 zeta * std(H_1), with the standard deviation taken in
/// the initial ground state.
pub fn speed_limit_bound(p: &ChainParams, r: &RampProtocol) -> Result<f64> {
    Ok(speed_limit_rhs(p, r.total_time, r.zeta())?)
}

/// Same bound for a sudden quench, where zeta = 1.
pub fn sudden_speed_limit_bound(p: &ChainParams, t: f64) -> Result<f64> {
    speed_limit_rhs(p, t, 1.0)
}

fn speed_limit_rhs(p: &ChainParams, t: f64, zeta: f64) -> Result<f64> {
    Ok(t * 2.0 * zeta * h1_std(p)?)
}

/// std(H_1) in the ground state at the chain's field.
pub fn h1_std(p: &ChainParams) -> Result<f64> {
    let h = build_hamiltonian(p)?;
    let gs = eig::ground_state(&h, eig::DEFAULT_TOL)?;
    let h1 = build_h1(p)?;
    let (mean, sq) = h1.moments_complex(gs.ground_state().amplitudes());
    Ok((sq - mean * mean).max(0.0).sqrt())
}

/// Which evaluation route the Loschmidt echo takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoschmidtMethod {
    /// Spectral sum over the full eigenbasis of the quenched Hamiltonian.
    Dense,
    /// Krylov step propagation.
    Propagation,
}

/// F_LE(t) = |<psi_0| exp(-i H(lambda + delta) t) |psi_0>| over the grid,
/// with psi_0 the ground state of H(lambda). Dispatches to the dense
/// spectral route for small systems.
pub fn loschmidt_echo(p: &ChainParams, delta: f64, t_grid: &[f64]) -> Result<TimeSeries> {
    let method = if p.dim() <= eig::DENSE_DISPATCH_DIM {
        LoschmidtMethod::Dense
    } else {
        LoschmidtMethod::Propagation
    };
    loschmidt_echo_with_method(p, delta, t_grid, method)
}

pub fn loschmidt_echo_with_method(
    p: &ChainParams,
    delta: f64,
    t_grid: &[f64],
    method: LoschmidtMethod,
) -> Result<TimeSeries> {
    validate_grid(t_grid)?;
    let h = build_hamiltonian(p)?;
    let gs = eig::ground_state(&h, eig::DEFAULT_TOL)?;
    let psi0 = gs.ground_state();

    let values = match method {
        LoschmidtMethod::Dense => {
            let hq = build_hamiltonian(&p.with_field(p.field + delta))?;
            let full = eig::full_diagonalize_with_cutoff(&hq, eig::DEFAULT_DENSE_CUTOFF)?;
            let weights: Vec<f64> = full
                .vectors
                .iter()
                .map(|v| v.overlap(psi0).expect("dims match").re.powi(2))
                .collect();
            t_grid
                .iter()
                .map(|&t| {
                    let amp: Complex64 = full
                        .values
                        .iter()
                        .zip(&weights)
                        .map(|(&e, &w)| Complex64::from_polar(w, -e * t))
                        .sum();
                    amp.norm()
                })
                .collect()
        }
        LoschmidtMethod::Propagation => {
            let hq = build_hamiltonian(&p.with_field(p.field + delta))?;
            let h1 = build_h1(p)?;
            let mut prop = Propagator::new(&hq, &h1);
            let mut psi: Vec<Complex64> = psi0.amplitudes().to_vec();
            let mut now = 0.0;
            let mut values = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                let mut remaining = t - now;
                while remaining > 0.0 {
                    let tau = remaining.min(0.5);
                    prop.step(&mut psi, 0.0, tau);
                    remaining -= tau;
                }
                now = t;
                let overlap: Complex64 = psi0
                    .amplitudes()
                    .iter()
                    .zip(&psi)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                values.push(overlap.norm());
            }
            values
        }
    };
    Ok(TimeSeries::new(t_grid.to_vec(), values, format!("F_LE delta={delta}"))
        .with_size(p.n_sites))
}

/// QFI of the sudden quench, G_LE(t) = 8 (1 - F_LE(t)) / delta^2.
pub fn qfi_loschmidt(p: &ChainParams, delta: f64, t_grid: &[f64]) -> Result<TimeSeries> {
    let echo = loschmidt_echo(p, delta, t_grid)?;
    let mut values = Vec::with_capacity(echo.values.len());
    for &f in &echo.values {
        let deficit = (1.0 - f).max(0.0);
        if deficit >= 0.1 {
            return Err(Error::RegimeViolation {
                delta,
                one_minus_f: deficit,
            });
        }
        values.push(8.0 * deficit / (delta * delta));
    }
    Ok(TimeSeries::new(echo.times, values, format!("G_LE delta={delta}")).with_size(p.n_sites))
}

/// Time-resolved error propagation: the standard deviation of the
/// observable in the unperturbed reference evolution over the central
/// finite difference of its expectation across the +-delta/2 drives.
pub fn precision_time(
    p: &ChainParams,
    drive: &Drive,
    observable: &SparseHermitian,
    tag: ObservableTag,
    t_grid: &[f64],
) -> Result<TimeSeries> {
    validate_grid(t_grid)?;
    let h = build_hamiltonian(p)?;
    let gs = eig::ground_state(&h, eig::DEFAULT_TOL)?;
    let psi0 = gs.ground_state();

    let points: Vec<PrecisionResult> = match drive {
        Drive::Sudden { delta_lambda } => {
            let stds = sudden_walk(p, 0.0, psi0, t_grid, observable, Moment::Std)?;
            let plus = sudden_walk(p, delta_lambda / 2.0, psi0, t_grid, observable, Moment::Mean)?;
            let minus =
                sudden_walk(p, -delta_lambda / 2.0, psi0, t_grid, observable, Moment::Mean)?;
            t_grid
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    precision_of(stds[i], (plus[i] - minus[i]) / delta_lambda, tag)
                })
                .collect::<Result<Vec<_>>>()?
        }
        Drive::Ramp { delta_lambda } => {
            let mut out = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                if t == 0.0 {
                    return Err(Error::InsensitiveObservable {
                        susceptibility: 0.0,
                    });
                }
                let base_steps = (2.0 * t).ceil().max(16.0) as usize;
                let make = |d: f64| RampProtocol::linear(d, t, base_steps);
                let (ref_state, steps) = evolve_ramp_converged(psi0, p, &make(0.0))?;
                let (mean_ref, sq) = observable.moments_complex(ref_state.amplitudes());
                let std = (sq - mean_ref * mean_ref).max(0.0).sqrt();
                let plus = evolve_ramp(
                    psi0,
                    p,
                    &RampProtocol {
                        steps,
                        ..make(delta_lambda / 2.0)
                    },
                )?;
                let minus = evolve_ramp(
                    psi0,
                    p,
                    &RampProtocol {
                        steps,
                        ..make(-delta_lambda / 2.0)
                    },
                )?;
                let (mp, _) = observable.moments_complex(plus.amplitudes());
                let (mm, _) = observable.moments_complex(minus.amplitudes());
                out.push(precision_of(std, (mp - mm) / delta_lambda, tag)?);
            }
            out
        }
    };
    Ok(TimeSeries::new(
        t_grid.to_vec(),
        points.iter().map(|r| r.delta).collect(),
        "precision(t)",
    )
    .with_size(p.n_sites))
}

enum Moment {
    Mean,
    Std,
}

/// Walk the time grid once under the constant Hamiltonian H(lambda +
/// shift), recording the requested moment of the observable.
fn sudden_walk(
    p: &ChainParams,
    shift: f64,
    psi0: &PureState,
    t_grid: &[f64],
    observable: &SparseHermitian,
    which: Moment,
) -> Result<Vec<f64>> {
    let h = build_hamiltonian(&p.with_field(p.field + shift))?;
    let h1 = build_h1(p)?;
    let mut prop = Propagator::new(&h, &h1);
    let mut psi: Vec<Complex64> = psi0.amplitudes().to_vec();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut remaining = t - now;
        while remaining > 0.0 {
            let tau = remaining.min(0.5);
            prop.step(&mut psi, 0.0, tau);
            remaining -= tau;
        }
        now = t;
        let (mean, sq) = observable.moments_complex(&psi);
        out.push(match which {
            Moment::Mean => mean,
            Moment::Std => (sq - mean * mean).max(0.0).sqrt(),
        });
    }
    Ok(out)
}

fn precision_of(std_dev: f64, susceptibility: f64, tag: ObservableTag) -> Result<PrecisionResult> {
    if susceptibility.abs() < 1e-12 {
        return Err(Error::InsensitiveObservable { susceptibility });
    }
    Ok(PrecisionResult {
        delta: std_dev / susceptibility.abs(),
        std_dev,
        susceptibility,
        observable: tag,
    })
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    let ascending = t_grid.windows(2).all(|w| w[1] > w[0]);
    if t_grid.is_empty() || !ascending || t_grid[0] < 0.0 {
        return Err(Error::BadTimeGrid);
    }
    Ok(())
}

/// Geometrically spaced time grid, the natural sampling for log-log
/// figures.
pub fn geometric_times(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && points >= 2);
    let ratio = (t_max / t_min).powf(1.0 / (points - 1) as f64);
    (0..points).map(|k| t_min * ratio.powi(k as i32)).collect()
}
