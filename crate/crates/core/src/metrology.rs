//! Static (adiabatic-limit) metrology: ground-state fidelity, fidelity
//! susceptibility and QFI, estimator precision via error propagation,
//! the two-copy swap estimator, and the time-norm bound check.
//!
//! Two independent routes to the susceptibility are kept side by side:
//! a symmetric finite difference of the ground-state fidelity and the
//! second-order perturbation sum over the exact spectrum. They cross-check
//! each other in the tests and in the acceptance suite.

use crate::eig;
use crate::error::{Error, Result};
use crate::model::{
    build_h1, build_hamiltonian, build_local_h, build_swap, build_sxsx, ChainParams, PureState,
    SparseHermitian,
};
use crate::scaling::{fit_power_law, PowerLawFit};

/// Default finite-difference step in the field.
pub const DEFAULT_DELTA: f64 = 1e-4;

/// Relative drift between a step and its half step above which the step
/// is halved automatically.
const RICHARDSON_DRIFT: f64 = 1e-3;

/// Largest fidelity deficit still inside the quadratic expansion regime.
const REGIME_LIMIT: f64 = 0.1;

/// How the susceptibility was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiMethod {
    FiniteDifference,
    PerturbationSum,
}

/// Fidelity susceptibility and the QFI it implies (G = 4 chi_F).
#[derive(Debug, Clone, Copy)]
pub struct SusceptibilityResult {
    pub chi_f: f64,
    pub qfi: f64,
    /// Step actually used; 0 for the perturbation sum.
    pub delta_used: f64,
    pub method: ChiMethod,
}

impl SusceptibilityResult {
    fn from_chi(chi_f: f64, delta_used: f64, method: ChiMethod) -> Self {
        SusceptibilityResult {
            chi_f,
            qfi: 4.0 * chi_f,
            delta_used,
            method,
        }
    }
}

/// Which estimator observable a precision value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableTag {
    /// Summed magnetization M_x.
    MxSum,
    /// Central on-site magnetization m_x.
    MxLocal,
    Custom,
}

/// Error-propagation value Delta = std / |d<A>/d lambda|.
#[derive(Debug, Clone, Copy)]
pub struct PrecisionResult {
    pub delta: f64,
    pub std_dev: f64,
    pub susceptibility: f64,
    pub observable: ObservableTag,
}

/// |<a|b>|, gauge independent.
pub fn fidelity_pure(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.overlap(b)?.norm())
}

/// Ground state of the chain at field `lambda`.
pub fn ground_state_at(p: &ChainParams, lambda: f64) -> Result<PureState> {
    let h = build_hamiltonian(&p.with_field(lambda))?;
    let r = eig::ground_state(&h, eig::DEFAULT_TOL)?;
    Ok(r.vectors.into_iter().next().expect("one eigenpair"))
}

/// One symmetric-pair susceptibility estimate at step `delta`:
/// chi = 2 (1 - F(lambda - delta/2, lambda + delta/2)) / delta^2, without
/// the automatic step halving of [`chi_finite_difference`].
pub fn chi_symmetric_pair(p: &ChainParams, delta: f64) -> Result<f64> {
    chi_pair(p, delta)
}

fn chi_pair(p: &ChainParams, delta: f64) -> Result<f64> {
    assert!(delta > 0.0);
    let minus = ground_state_at(p, p.field - delta / 2.0)?;
    let plus = ground_state_at(p, p.field + delta / 2.0)?;
    let f = fidelity_pure(&minus, &plus)?;
    let deficit = 1.0 - f;
    if deficit >= REGIME_LIMIT {
        return Err(Error::RegimeViolation {
            delta,
            one_minus_f: deficit,
        });
    }
    Ok(2.0 * deficit / (delta * delta))
}

/// Susceptibility from the symmetric fidelity pair around the chain's
/// field, with automatic step halving when the estimate at `delta` and at
/// `delta / 2` drift apart by more than 1e-3 relative.
pub fn chi_finite_difference(p: &ChainParams, delta: f64) -> Result<SusceptibilityResult> {
    let mut step = delta;
    let mut chi = chi_pair(p, step)?;
    let mut drift = f64::INFINITY;
    for _ in 0..4 {
        let half = chi_pair(p, step / 2.0)?;
        drift = (chi - half).abs() / half.abs().max(f64::MIN_POSITIVE);
        if drift <= RICHARDSON_DRIFT {
            return Ok(SusceptibilityResult::from_chi(
                chi,
                step,
                ChiMethod::FiniteDifference,
            ));
        }
        step /= 2.0;
        chi = half;
    }
    Err(Error::FiniteDifferenceUnstable { delta: step, drift })
}

/// Second-order perturbation sum over the exact spectrum:
/// chi_F = sum_{n>0} |<n|H_1|0>|^2 / (E_n - E_0)^2. Dense, exact to solver
/// precision; the independent oracle for the finite-difference route.
pub fn chi_perturbation_sum(p: &ChainParams) -> Result<SusceptibilityResult> {
    let h = build_hamiltonian(p)?;
    let full = eig::full_diagonalize(&h)?;
    let gap = full.gap().expect("dim >= 2");
    if gap.abs() < 1e-9 {
        return Err(Error::DegenerateGroundState { gap });
    }
    let h1 = build_h1(p)?;
    let w = h1.apply(full.ground_state())?;
    let e0 = full.ground_energy();
    let mut chi = 0.0;
    for n in 1..full.values.len() {
        let amp: num_complex::Complex64 = full.vectors[n]
            .amplitudes()
            .iter()
            .zip(&w)
            .map(|(v, wi)| v.conj() * wi)
            .sum();
        chi += amp.norm_sqr() / (full.values[n] - e0).powi(2);
    }
    Ok(SusceptibilityResult::from_chi(
        chi,
        0.0,
        ChiMethod::PerturbationSum,
    ))
}

/// Error propagation for a Hermitian estimator observable: standard
/// deviation in the ground state at the chain's field over the central
/// finite difference of its expectation across lambda +- delta/2.
pub fn error_propagation(
    p: &ChainParams,
    observable: &SparseHermitian,
    tag: ObservableTag,
    delta: f64,
) -> Result<PrecisionResult> {
    assert!(delta > 0.0);
    debug_assert_eq!(observable.max_asymmetry(), 0.0, "observable must be Hermitian");
    let center = ground_state_at(p, p.field)?;
    let minus = ground_state_at(p, p.field - delta / 2.0)?;
    let plus = ground_state_at(p, p.field + delta / 2.0)?;
    precision_from_states(observable, tag, delta, &center, &minus, &plus)
}

fn precision_from_states(
    observable: &SparseHermitian,
    tag: ObservableTag,
    delta: f64,
    center: &PureState,
    minus: &PureState,
    plus: &PureState,
) -> Result<PrecisionResult> {
    let (mean, sq) = observable.moments_complex(center.amplitudes());
    let std_dev = (sq - mean * mean).max(0.0).sqrt();
    let (mean_p, _) = observable.moments_complex(plus.amplitudes());
    let (mean_m, _) = observable.moments_complex(minus.amplitudes());
    let susceptibility = (mean_p - mean_m) / delta;
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

/// Precision of the summed magnetization M_x.
pub fn precision_mx(p: &ChainParams, delta: f64) -> Result<PrecisionResult> {
    error_propagation(p, &build_h1(p)?, ObservableTag::MxSum, delta)
}

/// Precision of the central on-site magnetization m_x.
pub fn precision_mx_local(p: &ChainParams, delta: f64) -> Result<PrecisionResult> {
    let obs = build_local_h(p, p.center_site())?;
    error_propagation(p, &obs, ObservableTag::MxLocal, delta)
}

/// Everything the static sweeps need at one (N, J_z, lambda) point,
/// computed from a single set of three ground-state solves. The
/// susceptibility here is the plain symmetric-pair estimate at `delta`
/// (no step halving), which the sweep layer prefers for speed.
#[derive(Debug, Clone)]
pub struct StaticPoint {
    pub susceptibility: SusceptibilityResult,
    pub precision_mx: PrecisionResult,
    pub precision_mx_local: PrecisionResult,
}

pub fn static_point(p: &ChainParams, delta: f64) -> Result<StaticPoint> {
    let center = ground_state_at(p, p.field)?;
    let minus = ground_state_at(p, p.field - delta / 2.0)?;
    let plus = ground_state_at(p, p.field + delta / 2.0)?;

    let f = fidelity_pure(&minus, &plus)?;
    let deficit = 1.0 - f;
    if deficit >= REGIME_LIMIT {
        return Err(Error::RegimeViolation {
            delta,
            one_minus_f: deficit,
        });
    }
    let chi = SusceptibilityResult::from_chi(
        2.0 * deficit / (delta * delta),
        delta,
        ChiMethod::FiniteDifference,
    );

    let h1 = build_h1(p)?;
    let local = build_local_h(p, p.center_site())?;
    let precision_mx =
        precision_from_states(&h1, ObservableTag::MxSum, delta, &center, &minus, &plus)?;
    let precision_mx_local = precision_from_states(
        &local,
        ObservableTag::MxLocal,
        delta,
        &center,
        &minus,
        &plus,
    )?;
    Ok(StaticPoint {
        susceptibility: chi,
        precision_mx,
        precision_mx_local,
    })
}

/// Largest chain size the doubled-register swap estimator accepts.
pub const SWAP_MAX_SITES: usize = 6;

/// Precision of the two-copy swap estimator A_swap = S^(tensor N) measured
/// on |Psi(lambda)> (x) |Psi(lambda + delta)>. Its expectation equals the
/// squared fidelity; A_swap^2 = 1 fixes the variance to 1 - <A_swap>^2.
pub fn swap_estimator(p: &ChainParams, delta: f64) -> Result<PrecisionResult> {
    assert!(delta > 0.0);
    if p.n_sites > SWAP_MAX_SITES {
        return Err(Error::Capacity {
            n_sites: 2 * p.n_sites,
            max_sites: 2 * SWAP_MAX_SITES,
        });
    }
    let swap = build_swap(p.n_sites)?;
    let reference = ground_state_at(p, p.field)?;

    let expectation_at = |shift: f64| -> Result<f64> {
        let shifted = ground_state_at(p, p.field + shift)?;
        let phi = reference.tensor(&shifted);
        let y = swap.apply(&phi)?;
        let e: num_complex::Complex64 = phi
            .amplitudes()
            .iter()
            .zip(&y)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(e.re)
    };

    let mean = expectation_at(delta)?;
    let std_dev = (1.0 - mean * mean).max(0.0).sqrt();
    let h = delta / 2.0;
    let susceptibility = (expectation_at(delta + h)? - expectation_at(delta - h)?) / (2.0 * h);
    if susceptibility.abs() < 1e-12 {
        return Err(Error::InsensitiveObservable { susceptibility });
    }
    Ok(PrecisionResult {
        delta: std_dev / susceptibility.abs(),
        std_dev,
        susceptibility,
        observable: ObservableTag::Custom,
    })
}

/// The time-norm bound G^(-1/2) >= 1 / (t ||H_1||) with ||H_1|| = N,
/// evaluated against the static QFI, alongside the adiabatic time scale
/// t_hat = N^(z/d) (z = d = 1 here).
#[derive(Debug, Clone, Copy)]
pub struct HeisenbergBoundReport {
    pub qfi: f64,
    pub qfi_inv_sqrt: f64,
    pub h1_norm: f64,
    pub time: f64,
    /// Right-hand side 1 / (t ||H_1||).
    pub bound: f64,
    pub satisfied: bool,
    pub adiabatic_time: f64,
}

pub fn heisenberg_bound_check(p: &ChainParams, t: f64) -> Result<HeisenbergBoundReport> {
    assert!(t > 0.0);
    let chi = chi_finite_difference(p, DEFAULT_DELTA)?;
    let qfi_inv_sqrt = chi.qfi.powf(-0.5);
    let h1_norm = p.n_sites as f64;
    let bound = 1.0 / (t * h1_norm);
    Ok(HeisenbergBoundReport {
        qfi: chi.qfi,
        qfi_inv_sqrt,
        h1_norm,
        time: t,
        bound,
        satisfied: qfi_inv_sqrt >= bound,
        adiabatic_time: p.n_sites as f64,
    })
}

/// Connected ground-state correlator <sx_a sx_b> - <sx_a><sx_b>.
pub fn connected_sx_correlator(p: &ChainParams, a: usize, b: usize) -> Result<f64> {
    let gs = ground_state_at(p, p.field)?;
    let pair = build_sxsx(p, a, b)?;
    let (cab, _) = pair.moments_complex(gs.amplitudes());
    let (ca, _) = build_local_h(p, a)?.moments_complex(gs.amplitudes());
    let (cb, _) = build_local_h(p, b)?.moments_complex(gs.amplitudes());
    Ok(cab - ca * cb)
}

/// Diagnostic fit of |C(r)| ~ r^(-2[h]) over r in [2, N/4], pairs centered
/// in the bulk. Small-N accuracy is limited; this is a sanity probe, not a
/// gate.
pub fn correlation_decay_diagnostic(p: &ChainParams) -> Result<PowerLawFit> {
    let r_max = (p.n_sites / 4).max(4);
    let mut rs = Vec::new();
    let mut cs = Vec::new();
    for r in 2..=r_max {
        let a = ((p.n_sites - r) / 2).max(1);
        let b = a + r;
        let c = connected_sx_correlator(p, a, b)?;
        if c.abs() > 0.0 {
            rs.push(r as f64);
            cs.push(c.abs());
        }
    }
    fit_power_law(&rs, &cs, (1.5, r_max as f64 + 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, j_z: f64, field: f64) -> ChainParams {
        ChainParams::new(n, j_z, field).unwrap()
    }

    #[test]
    fn fidelity_identity_and_orthogonality() {
        let s = PureState::basis_state(8, 3);
        assert_eq!(fidelity_pure(&s, &s).unwrap(), 1.0);
        let t = PureState::basis_state(8, 5);
        assert_eq!(fidelity_pure(&s, &t).unwrap(), 0.0);
        let small = PureState::basis_state(4, 0);
        assert!(fidelity_pure(&s, &small).is_err());
    }

    #[test]
    fn fidelity_matches_dense_oracle_ground_states() {
        // independent route: raw eigh of the dense matrices
        let p = params(2, 0.0, 0.0);
        let h0 = build_hamiltonian(&p).unwrap().to_matrix();
        let h1 = build_hamiltonian(&p.with_field(0.1)).unwrap().to_matrix();
        let (_, v0) = h0.eigh().unwrap();
        let (_, v1) = h1.eigh().unwrap();
        let oracle: f64 = v0
            .column(0)
            .iter()
            .zip(v1.column(0))
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .abs();

        let a = ground_state_at(&p, 0.0).unwrap();
        let b = ground_state_at(&p, 0.1).unwrap();
        let f = fidelity_pure(&a, &b).unwrap();
        assert!((f - oracle).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_in_its_arguments() {
        let p = params(4, 0.3, 0.0);
        let a = ground_state_at(&p, -0.05).unwrap();
        let b = ground_state_at(&p, 0.05).unwrap();
        assert_eq!(
            fidelity_pure(&a, &b).unwrap(),
            fidelity_pure(&b, &a).unwrap()
        );
    }

    #[test]
    fn two_site_perturbation_sum_is_one() {
        // Hand value: ground state (|01> + |10>)/sqrt(2) at E = -2; M_x
        // connects it only to the zero-energy pair, each with weight 2,
        // so chi = (2 + 2) / (0 - (-2))^2 = 1.
        let r = chi_perturbation_sum(&params(2, 0.0, 0.0)).unwrap();
        assert!((r.chi_f - 1.0).abs() < 1e-12);
        assert_eq!(r.qfi, 4.0 * r.chi_f);
        assert_eq!(r.method, ChiMethod::PerturbationSum);
    }

    #[test]
    fn finite_difference_agrees_with_perturbation_sum() {
        let p = params(2, 0.0, 0.0);
        let fd = chi_finite_difference(&p, 1e-3).unwrap();
        let ps = chi_perturbation_sum(&p).unwrap();
        assert!((fd.chi_f - ps.chi_f).abs() / ps.chi_f < 1e-6);

        for n in [4usize, 6] {
            for j_z in [-0.5, 0.0, 0.5] {
                for lambda in [0.0, 0.05] {
                    let p = params(n, j_z, lambda);
                    let fd = chi_finite_difference(&p, 1e-4).unwrap();
                    let ps = chi_perturbation_sum(&p).unwrap();
                    let rel = (fd.chi_f - ps.chi_f).abs() / ps.chi_f;
                    assert!(rel < 1e-5, "N={n} J_z={j_z} lambda={lambda}: rel={rel:.2e}");
                    assert!(ps.chi_f >= 0.0);
                }
            }
        }
    }

    #[test]
    fn chi_drift_shrinks_quadratically_in_the_step() {
        let p = params(4, 0.0, 0.0);
        let base = chi_symmetric_pair(&p, 1e-3).unwrap();
        let d1 = (chi_symmetric_pair(&p, 4e-2).unwrap() - base).abs() / base;
        let d2 = (chi_symmetric_pair(&p, 2e-2).unwrap() - base).abs() / base;
        let ratio = d1 / d2;
        assert!(
            (2.5..6.0).contains(&ratio),
            "expected O(delta^2) drift, got {d1:.3e} vs {d2:.3e}"
        );
        // the checked variant stays consistent under a halved request
        let a = chi_finite_difference(&p, 1e-3).unwrap().chi_f;
        let b = chi_finite_difference(&p, 5e-4).unwrap().chi_f;
        assert!((a - b).abs() / b < 1e-3);
    }

    #[test]
    fn degenerate_ground_state_is_rejected() {
        // ferromagnetic Heisenberg point: triplet ground multiplet
        let err = chi_perturbation_sum(&params(2, 1.0, 0.0));
        assert!(matches!(err, Err(Error::DegenerateGroundState { .. })));
    }

    #[test]
    fn identity_observable_is_insensitive() {
        let p = params(4, 0.0, 0.0);
        let id = SparseHermitian::identity(p.dim());
        let err = error_propagation(&p, &id, ObservableTag::Custom, 1e-3);
        assert!(matches!(err, Err(Error::InsensitiveObservable { .. })));
    }

    #[test]
    fn cramer_rao_holds_on_a_small_grid() {
        for n in [4usize, 6] {
            for j_z in [-0.5, 0.0, 0.5] {
                for lambda in [0.0, 0.05] {
                    let p = params(n, j_z, lambda);
                    let point = static_point(&p, 1e-4).unwrap();
                    let floor = point.susceptibility.qfi.powf(-0.5) * (1.0 - 1e-3);
                    assert!(
                        point.precision_mx.delta >= floor,
                        "M_x violates Cramer-Rao at N={n} J_z={j_z} lambda={lambda}"
                    );
                    assert!(
                        point.precision_mx_local.delta >= floor,
                        "m_x violates Cramer-Rao at N={n} J_z={j_z} lambda={lambda}"
                    );
                }
            }
        }
    }

    #[test]
    fn precision_result_is_ratio_by_construction() {
        let p = params(6, 0.0, 0.0);
        let r = precision_mx(&p, 1e-4).unwrap();
        assert_eq!(r.delta, r.std_dev / r.susceptibility.abs());
        assert_eq!(r.observable, ObservableTag::MxSum);
        let l = precision_mx_local(&p, 1e-4).unwrap();
        assert_eq!(l.observable, ObservableTag::MxLocal);
        // the local estimator is never better than the summed one here
        assert!(l.delta >= r.delta);
    }

    #[test]
    fn swap_expectation_equals_squared_fidelity() {
        let p = params(3, 0.0, 0.0);
        let delta = 0.05;
        let a = ground_state_at(&p, 0.0).unwrap();
        let b = ground_state_at(&p, delta).unwrap();
        let f = fidelity_pure(&a, &b).unwrap();

        let swap = build_swap(3).unwrap();
        let phi = a.tensor(&b);
        let y = swap.apply(&phi).unwrap();
        let e: num_complex::Complex64 = phi
            .amplitudes()
            .iter()
            .zip(&y)
            .map(|(x, z)| x.conj() * z)
            .sum();
        assert!((e.re - f * f).abs() < 1e-10);
        assert!(e.im.abs() < 1e-14);
    }

    #[test]
    fn swap_estimator_reaches_its_small_step_limit() {
        let p = params(4, 0.0, 0.0);
        let g = chi_perturbation_sum(&p).unwrap().qfi;
        let expect = (2.0 / g).sqrt();
        let r = swap_estimator(&p, 1e-3).unwrap();
        assert!(
            (r.delta / expect - 1.0).abs() < 0.01,
            "swap precision {} vs sqrt(2/G) {}",
            r.delta,
            expect
        );
        assert!(matches!(
            swap_estimator(&params(8, 0.0, 0.0), 1e-3),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn heisenberg_bound_report() {
        let p = params(4, 0.0, 0.0);
        // wide-open time limit
        let r = heisenberg_bound_check(&p, 1e9).unwrap();
        assert!(r.satisfied);
        // at the adiabatic time scale
        let r = heisenberg_bound_check(&p, r.adiabatic_time).unwrap();
        assert!(r.satisfied);
        // t = 1: fields are mutually consistent
        let r = heisenberg_bound_check(&p, 1.0).unwrap();
        assert_eq!(r.h1_norm, 4.0);
        assert_eq!(r.bound, 0.25);
        assert_eq!(r.qfi_inv_sqrt, r.qfi.powf(-0.5));
        assert_eq!(r.satisfied, r.qfi_inv_sqrt >= r.bound);
        let direct = chi_finite_difference(&p, DEFAULT_DELTA).unwrap();
        assert!((r.qfi - direct.qfi).abs() < 1e-12 * direct.qfi.abs());
    }

    #[test]
    fn correlator_diagnostic_runs_in_the_bulk() {
        let p = params(12, 0.0, 0.0);
        let c2 = connected_sx_correlator(&p, 5, 7).unwrap();
        assert!(c2.abs() > 1e-3, "bulk correlator should not vanish");
        let fit = correlation_decay_diagnostic(&params(16, 0.0, 0.0)).unwrap();
        // expected decay exponent -2[h] = -1/2; desk sizes are rough
        assert!(fit.exponent < 0.0, "correlator must decay, got {fit:?}");
    }
}
