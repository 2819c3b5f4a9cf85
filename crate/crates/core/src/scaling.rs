//! Critical exponents of the XXZ chain in a transverse field, power-law
//! fitting, data-collapse transforms and crossover predictions.
//!
//! For |J_z| < 1 the chain has a continuous critical point at lambda = 0
//! with dynamical exponent z = 1; the correlation-length exponent follows
//! from the scaling dimension of sigma^x:
//!
//! ```text
//! [h] = arccos(J_z) / 2 pi        nu = 2 / (4 - arccos(J_z)/pi)
//! ```
//!
//! so that nu = 1/(d + z - [h]) (hyperscaling) holds identically.

use serde::Serialize;

use crate::error::{Error, Result};

/// Theoretical critical exponents and the derived scaling exponents used
/// across the crate for a given anisotropy.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentSet {
    pub j_z: f64,
    /// Correlation-length exponent nu.
    pub nu: f64,
    /// Dynamical exponent, fixed at 1 for this model.
    pub z: f64,
    /// Spatial dimension, fixed at 1.
    pub d: f64,
    /// Scaling dimension [h] of sigma^x.
    pub h_dim: f64,
    /// Susceptibility exponent theta = 1 - [h] nu.
    pub theta: f64,
    /// G^(1/2) ~ N^(1/d nu): system-size exponent of the QFI amplitude.
    pub exp_qfi: f64,
    /// Precision exponent of the summed magnetization, same as exp_qfi.
    pub exp_mx_sum: f64,
    /// Precision exponent of the central on-site magnetization,
    /// 1/(d nu) - [h]/d.
    pub exp_mx_local: f64,
    /// Adiabatic time scale t ~ N^(z/d).
    pub exp_time: f64,
    /// Short-time growth of std(H_1): N^(1 - [h]/d).
    pub exp_short_time_var: f64,
}

/// Closed-form exponents for anisotropy `j_z`, valid for |j_z| < 1.
pub fn exponents_for(j_z: f64) -> Result<ExponentSet> {
    if !(j_z.abs() < 1.0) {
        return Err(Error::JzOutOfRange(j_z));
    }
    let (d, z) = (1.0, 1.0);
    let h_dim = j_z.acos() / (2.0 * std::f64::consts::PI);
    let nu = 2.0 / (4.0 - j_z.acos() / std::f64::consts::PI);
    let theta = 1.0 - h_dim * nu;
    Ok(ExponentSet {
        j_z,
        nu,
        z,
        d,
        h_dim,
        theta,
        exp_qfi: 1.0 / (d * nu),
        exp_mx_sum: 1.0 / (d * nu),
        exp_mx_local: 1.0 / (d * nu) - h_dim / d,
        exp_time: z / d,
        exp_short_time_var: 1.0 - h_dim / d,
    })
}

/// Least-squares power-law fit on log-log data.
#[derive(Debug, Clone, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor_log: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
}

/// Ordinary least squares of log y against log x over the points whose
/// abscissa falls inside `window` (inclusive).
pub fn fit_power_law(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<PowerLawFit> {
    assert_eq!(xs.len(), ys.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, _)| x >= window.0 && x <= window.1)
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints(pts.len()));
    }
    if pts.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::NonPositiveData);
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    let r_squared = if ss_tot > 1e-300 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(PowerLawFit {
        exponent: slope,
        prefactor_log: intercept,
        stderr,
        window,
        r_squared,
    })
}

/// A labelled curve over an ascending time grid, optionally tagged with
/// the system size it came from.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
    pub n_sites: Option<usize>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Self {
        assert_eq!(times.len(), values.len());
        assert!(times.windows(2).all(|w| w[1] > w[0]), "times must increase");
        TimeSeries {
            times,
            values,
            label: label.into(),
            n_sites: None,
        }
    }

    pub fn with_size(mut self, n_sites: usize) -> Self {
        self.n_sites = Some(n_sites);
        self
    }
}

/// Which figure's rescaling convention to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseMode {
    /// Smooth-ramp QFI curves.
    Fig2Time,
    /// Loschmidt-echo QFI curves.
    Fig3Le,
}

/// Rescale a curve of amplitude-like ordinates (G^(1/2), a speed-limit
/// bound, ...) for data collapse: the abscissa becomes t / N^(z/d) and the
/// ordinate is divided by N^(1/d nu). Precision curves rescale with the
/// inverse factor; see [`rescale_precision`].
pub fn collapse_transform(
    series: &TimeSeries,
    e: &ExponentSet,
    mode: CollapseMode,
) -> Result<TimeSeries> {
    let n = series.n_sites.ok_or(Error::MissingMetadata)? as f64;
    let t_scale = n.powf(e.exp_time);
    let v_scale = n.powf(e.exp_qfi);
    let suffix = match mode {
        CollapseMode::Fig2Time => "collapsed",
        CollapseMode::Fig3Le => "collapsed-le",
    };
    Ok(TimeSeries {
        times: series.times.iter().map(|t| t / t_scale).collect(),
        values: series.values.iter().map(|v| v / v_scale).collect(),
        label: format!("{} [{}]", series.label, suffix),
        n_sites: series.n_sites,
    })
}

/// Collapse companion for precision (error-propagation) ordinates, which
/// scale like the inverse of the QFI amplitude.
pub fn rescale_precision(series: &TimeSeries, e: &ExponentSet) -> Result<TimeSeries> {
    let n = series.n_sites.ok_or(Error::MissingMetadata)? as f64;
    let t_scale = n.powf(e.exp_time);
    let v_scale = n.powf(e.exp_qfi);
    Ok(TimeSeries {
        times: series.times.iter().map(|t| t / t_scale).collect(),
        values: series.values.iter().map(|v| v * v_scale).collect(),
        label: format!("{} [collapsed]", series.label),
        n_sites: series.n_sites,
    })
}

/// Regime of the crossover predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrossoverRegime {
    /// Fixed detuning |lambda - lambda_c| >> N^(-1/nu).
    Detuned,
    /// Finite temperature at the critical field, T >> N^(-z/d).
    Thermal,
}

/// Closed-form exponents in the far-from-critical branch. `ctrl` is the
/// control variable of the regime: |lambda - lambda_c| when detuned, T
/// when thermal.
#[derive(Debug, Clone, Serialize)]
pub struct CrossoverTable {
    pub regime: CrossoverRegime,
    /// G^(1/2): exponents of N and of the control variable.
    pub g_half_n: f64,
    pub g_half_ctrl: f64,
    /// chi_F: exponents of N and of the control variable.
    pub chi_n: f64,
    pub chi_ctrl: f64,
    /// Precision of the summed magnetization.
    pub delta_mx_sum_n: f64,
    pub delta_mx_sum_ctrl: f64,
    /// Precision of the central on-site magnetization.
    pub delta_mx_local_n: f64,
    pub delta_mx_local_ctrl: f64,
    /// Exponent of the crossover length: xi ~ ctrl^(xi_ctrl).
    pub xi_ctrl: f64,
}

/// Crossover-branch exponents derived from an [`ExponentSet`].
///
/// The precision of the local magnetization grows as the control variable
/// grows (std stays O(1) while the susceptibility decays), so its control
/// exponent is +theta detuned and +theta/(z nu) thermal, matching the
/// fitted values the model reports at J_z = 0 (1.25, 1.5).
pub fn crossover_predictions(e: &ExponentSet, regime: CrossoverRegime) -> CrossoverTable {
    let dnu = e.d * e.nu;
    match regime {
        CrossoverRegime::Detuned => CrossoverTable {
            regime,
            g_half_n: 0.5,
            g_half_ctrl: dnu / 2.0 - 1.0,
            chi_n: 1.0,
            chi_ctrl: dnu - 2.0,
            delta_mx_sum_n: -0.5,
            delta_mx_sum_ctrl: 1.0 - dnu / 2.0,
            delta_mx_local_n: 0.0,
            delta_mx_local_ctrl: e.theta,
            xi_ctrl: -e.nu,
        },
        CrossoverRegime::Thermal => {
            let znu = e.z * e.nu;
            CrossoverTable {
                regime,
                g_half_n: 0.5,
                g_half_ctrl: (dnu - 2.0) / (2.0 * znu),
                chi_n: 1.0,
                chi_ctrl: (dnu - 2.0) / znu,
                delta_mx_sum_n: -0.5,
                delta_mx_sum_ctrl: (1.0 - dnu / 2.0) / znu,
                delta_mx_local_n: 0.0,
                delta_mx_local_ctrl: e.theta / znu,
                xi_ctrl: -1.0 / e.z,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_fermion_point_exponents_are_exact() {
        let e = exponents_for(0.0).unwrap();
        assert!((e.nu - 4.0 / 7.0).abs() < 1e-15);
        assert!((e.h_dim - 0.25).abs() < 1e-15);
        assert!((e.exp_qfi - 1.75).abs() < 1e-15);
        assert!((e.exp_mx_sum - 1.75).abs() < 1e-15);
        assert!((e.exp_mx_local - 1.5).abs() < 1e-15);
        assert!((e.theta - 6.0 / 7.0).abs() < 1e-15);
        assert!((e.exp_short_time_var - 0.75).abs() < 1e-15);
        assert!((e.exp_time - 1.0).abs() < 1e-15);
    }

    #[test]
    fn isotropic_limit_of_nu() {
        let e = exponents_for(-1.0 + 1e-12).unwrap();
        assert!((e.nu - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn hyperscaling_identity_holds() {
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 1.98 - 0.99
        };
        for _ in 0..20 {
            let j_z = next();
            let e = exponents_for(j_z).unwrap();
            assert!((e.nu * (e.d + e.z - e.h_dim) - 1.0).abs() < 1e-12);
            assert!(e.theta >= 0.0);
            assert!(e.d * e.nu < 1.0, "super-Heisenberg condition at {j_z}");
            assert!((e.z + e.d) * e.nu >= 1.0);
            assert!((e.exp_mx_local - (e.exp_qfi - e.h_dim / e.d)).abs() < 1e-14);
            assert!((e.exp_mx_sum - e.exp_qfi).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_boundary_is_rejected() {
        assert!(matches!(exponents_for(1.0), Err(Error::JzOutOfRange(_))));
        assert!(matches!(exponents_for(-1.0), Err(Error::JzOutOfRange(_))));
        assert!(matches!(exponents_for(1.5), Err(Error::JzOutOfRange(_))));
        assert!(exponents_for(0.99).is_ok());
    }

    #[test]
    fn exact_power_law_is_fit_exactly() {
        let xs: Vec<f64> = (1..=12).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(2.5)).collect();
        let f = fit_power_law(&xs, &ys, (0.5, 20.0)).unwrap();
        assert!((f.exponent - 2.5).abs() < 1e-12);
        assert!((f.prefactor_log - 3.0f64.ln()).abs() < 1e-12);
        assert!(f.stderr < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corrections_fade_as_window_grows() {
        let xs: Vec<f64> = (1..=400).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * (1.0 + 0.1 / x)).collect();
        let mut last_err = f64::INFINITY;
        for wmin in [1.0, 10.0, 100.0] {
            let f = fit_power_law(&xs, &ys, (wmin, 400.0)).unwrap();
            let err = (f.exponent - 2.0).abs();
            assert!(err < last_err);
            last_err = err;
        }
        assert!(last_err < 1e-3);
    }

    #[test]
    fn constant_data_fits_exponent_zero() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys = [5.0, 5.0, 5.0, 5.0];
        let f = fit_power_law(&xs, &ys, (0.5, 10.0)).unwrap();
        assert!(f.exponent.abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_thin_windows_and_bad_data() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            fit_power_law(&xs, &ys, (3.5, 10.0)),
            Err(Error::InsufficientPoints(1))
        ));
        let bad = [1.0, -2.0, 3.0, 4.0];
        assert!(matches!(
            fit_power_law(&xs, &bad, (0.0, 10.0)),
            Err(Error::NonPositiveData)
        ));
    }

    #[test]
    fn fit_is_scale_equivariant() {
        let xs: Vec<f64> = (2..=10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(1.3) * (1.0 + 0.01 * x.sin())).collect();
        let f1 = fit_power_law(&xs, &ys, (1.0, 11.0)).unwrap();
        let scaled: Vec<f64> = ys.iter().map(|y| 7.0 * y).collect();
        let f2 = fit_power_law(&xs, &scaled, (1.0, 11.0)).unwrap();
        assert!((f1.exponent - f2.exponent).abs() < 1e-13);
        assert!((f2.prefactor_log - f1.prefactor_log - 7.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn collapse_is_identity_at_unit_size() {
        let e = exponents_for(0.0).unwrap();
        let s = TimeSeries::new(vec![1.0, 2.0], vec![3.0, 4.0], "g").with_size(1);
        let c = collapse_transform(&s, &e, CollapseMode::Fig2Time).unwrap();
        assert_eq!(c.times, s.times);
        assert_eq!(c.values, s.values);
    }

    #[test]
    fn synthetic_master_curve_collapses_exactly() {
        // master amplitude curve M(s) = s / (1 + s): curves for two sizes
        // generated by un-rescaling must collapse back onto each other
        let e = exponents_for(0.0).unwrap();
        let master = |s: f64| s / (1.0 + s);
        let s_grid = [0.25, 0.5, 1.0, 2.0, 4.0];
        let mut collapsed = Vec::new();
        for n in [8usize, 16] {
            let nf = n as f64;
            let times: Vec<f64> = s_grid.iter().map(|s| s * nf.powf(e.exp_time)).collect();
            let values: Vec<f64> = s_grid
                .iter()
                .map(|&s| master(s) * nf.powf(e.exp_qfi))
                .collect();
            let series = TimeSeries::new(times, values, "synthetic").with_size(n);
            collapsed.push(collapse_transform(&series, &e, CollapseMode::Fig2Time).unwrap());
        }
        for i in 0..s_grid.len() {
            assert!((collapsed[0].times[i] - collapsed[1].times[i]).abs() < 1e-12);
            assert!((collapsed[0].values[i] - collapsed[1].values[i]).abs() < 1e-12);
            assert!((collapsed[0].values[i] - master(s_grid[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn collapse_requires_metadata() {
        let e = exponents_for(0.0).unwrap();
        let s = TimeSeries::new(vec![1.0], vec![1.0], "g");
        assert!(matches!(
            collapse_transform(&s, &e, CollapseMode::Fig3Le),
            Err(Error::MissingMetadata)
        ));
    }

    #[test]
    fn thermal_crossover_matches_reported_fits() {
        let e = exponents_for(0.0).unwrap();
        let t = crossover_predictions(&e, CrossoverRegime::Thermal);
        assert!((t.delta_mx_sum_ctrl - 1.25).abs() < 1e-12);
        assert!((t.delta_mx_local_ctrl - 1.5).abs() < 1e-12);
        assert!((t.delta_mx_sum_n + 0.5).abs() < 1e-12);
        assert!((t.delta_mx_local_n).abs() < 1e-12);
        assert!((t.chi_ctrl + 2.5).abs() < 1e-12);
        assert!((t.chi_n - 1.0).abs() < 1e-12);
        assert!((t.xi_ctrl + 1.0).abs() < 1e-12);
    }

    #[test]
    fn detuned_crossover_exponents() {
        let e = exponents_for(0.0).unwrap();
        let t = crossover_predictions(&e, CrossoverRegime::Detuned);
        // G^(1/2) ~ N^(1/2) |lambda|^(d nu/2 - 1)
        assert!((t.g_half_n - 0.5).abs() < 1e-12);
        assert!((t.g_half_ctrl - (2.0 / 7.0 - 1.0)).abs() < 1e-12);
        assert!((t.delta_mx_sum_ctrl - 5.0 / 7.0).abs() < 1e-12);
        // local magnetization: precision degrades as |lambda|^theta with
        // theta = 6/7 at J_z = 0
        assert!((t.delta_mx_local_ctrl - 6.0 / 7.0).abs() < 1e-12);
        assert!((t.xi_ctrl + 4.0 / 7.0).abs() < 1e-12);
    }
}
