//! Regime scan harness: sweeps (eta, Omega/nu, t) grids, comparing the
//! analytic chain against the exact oracle point by point, with a
//! truncation-doubling convergence check and order-stable parallel output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{fidelity, AnalyticPipeline, ExactPipeline};
use crate::error::Result;
use crate::hamiltonian::Spin;
use crate::params::IonParams;
use crate::protocols::{conditional_measure, displace_to_qubit, initial_state};

/// Two runs at dim and dim + [`DIM_STEP`] must agree on the fidelity to this
/// tolerance for a point to count as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Truncation increment of the convergence double-run.
pub const DIM_STEP: usize = 32;

/// Grid specification for a scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Lamb-Dicke values, strictly increasing.
    pub etas: Vec<f64>,
    /// Omega/nu ratios, strictly increasing.
    pub omega_ratios: Vec<f64>,
    /// Evolution times in units of 1/nu, strictly increasing.
    pub times: Vec<f64>,
    /// Base truncation; each point also runs at dim + DIM_STEP.
    pub dim: usize,
    pub guard: usize,
    pub nu: f64,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let increasing = |g: &[f64]| g.windows(2).all(|w| w[0] < w[1]);
        if self.etas.is_empty() || !increasing(&self.etas) {
            return Err(crate::Error::InvalidParameter {
                name: "etas",
                value: f64::NAN,
                constraint: "grid must be nonempty and strictly increasing",
            });
        }
        if self.omega_ratios.is_empty() || !increasing(&self.omega_ratios) {
            return Err(crate::Error::InvalidParameter {
                name: "omega_ratios",
                value: f64::NAN,
                constraint: "grid must be nonempty and strictly increasing",
            });
        }
        if self.times.is_empty() || !increasing(&self.times) {
            return Err(crate::Error::InvalidParameter {
                name: "times",
                value: f64::NAN,
                constraint: "grid must be nonempty and strictly increasing",
            });
        }
        if self.dim < 16 {
            return Err(crate::Error::InvalidDimension { dim: self.dim });
        }
        Ok(())
    }
}

/// One (eta, Omega/nu, t) point of a scan. The column set is the stable
/// tabular contract consumed by the CLI; every row is self-describing
/// through the derived (epsilon, lambda, Delta).
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ScanRecord {
    pub eta: f64,
    pub omega_ratio: f64,
    pub time: f64,
    /// Finer of the two truncations actually used.
    pub dim: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub delta: f64,
    pub beta_minus_abs: f64,
    /// 1 - F between the analytic chain and the exact oracle.
    pub infidelity: f64,
    /// |infidelity(dim) - infidelity(dim + DIM_STEP)|.
    pub infidelity_delta: f64,
    /// Qubit leakage of the exact pipeline after the excited-outcome
    /// displacement.
    pub leakage: f64,
    pub p_excited: f64,
    /// Guard-band mass of the exact evolved state at the finer truncation.
    pub tail: f64,
    pub converged: bool,
    /// Empty on success; otherwise the per-point failure, recorded in-row.
    pub error: String,
}

impl ScanRecord {
    pub const CSV_HEADER: &'static str = "eta,omega_ratio,time,dim,epsilon,lambda,delta,\
beta_minus_abs,infidelity,infidelity_delta,leakage,p_excited,tail,converged,error";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.eta,
            self.omega_ratio,
            self.time,
            self.dim,
            self.epsilon,
            self.lambda,
            self.delta,
            self.beta_minus_abs,
            self.infidelity,
            self.infidelity_delta,
            self.leakage,
            self.p_excited,
            self.tail,
            self.converged,
            self.error
        )
    }
}

struct PointMetrics {
    infidelity: f64,
    leakage: f64,
    p_excited: f64,
    tail: f64,
}

/// Metrics of one (params, t) point at one truncation. The exact propagator
/// is built once per (params, dim) by the caller and shared across times.
fn point_metrics(
    params: &IonParams,
    exact: &ExactPipeline,
    analytic: &AnalyticPipeline,
    t: f64,
    dim: usize,
    guard: usize,
) -> Result<PointMetrics> {
    let psi0 = initial_state(params, dim)?;
    let reference = exact.evolve(&psi0, t)?;
    let approx = analytic.evolve(&psi0, t)?;
    let infidelity = 1.0 - fidelity(&approx, &reference)?;
    let rec = conditional_measure(&reference, Spin::Excited)?;
    let (_, qubit) = displace_to_qubit(&rec, params)?;
    Ok(PointMetrics {
        infidelity,
        leakage: qubit.leakage,
        p_excited: rec.probability,
        tail: reference.tail_mass(guard),
    })
}

/// Run the scan. Points are independent work units: each (eta, Omega/nu)
/// pair builds its propagators once (at both truncations of the convergence
/// check) and sweeps the time grid; pairs run on the worker pool and output
/// order matches grid order regardless of completion order.
pub fn regime_scan(config: &ScanConfig) -> Result<Vec<ScanRecord>> {
    config.validate()?;
    let pairs: Vec<(f64, f64)> = config
        .etas
        .iter()
        .flat_map(|&eta| config.omega_ratios.iter().map(move |&r| (eta, r)))
        .collect();

    let per_pair: Vec<Vec<ScanRecord>> = pairs
        .par_iter()
        .map(|&(eta, ratio)| scan_pair(config, eta, ratio))
        .collect();

    Ok(per_pair.into_iter().flatten().collect())
}

fn scan_pair(config: &ScanConfig, eta: f64, ratio: f64) -> Vec<ScanRecord> {
    let dim_hi = config.dim + DIM_STEP;
    let base = ScanRecord {
        eta,
        omega_ratio: ratio,
        time: f64::NAN,
        dim: dim_hi,
        epsilon: f64::NAN,
        lambda: f64::NAN,
        delta: f64::NAN,
        beta_minus_abs: f64::NAN,
        infidelity: f64::NAN,
        infidelity_delta: f64::NAN,
        leakage: f64::NAN,
        p_excited: f64::NAN,
        tail: f64::NAN,
        converged: false,
        error: String::new(),
    };

    let params = match IonParams::resonant(config.nu, ratio * config.nu, eta) {
        Ok(p) => p,
        Err(e) => {
            return config
                .times
                .iter()
                .map(|&t| ScanRecord {
                    time: t,
                    error: e.to_string(),
                    ..base.clone()
                })
                .collect();
        }
    };
    let d = params.derive();
    let base = ScanRecord {
        epsilon: d.epsilon,
        lambda: d.lambda_eff,
        delta: d.delta_jcm,
        beta_minus_abs: d.beta_minus.norm(),
        ..base
    };

    let pipelines = (|| -> Result<_> {
        let exact_lo = ExactPipeline::with_guard(&params, config.dim, config.guard)?;
        let exact_hi = ExactPipeline::with_guard(&params, dim_hi, config.guard)?;
        let analytic_lo = AnalyticPipeline::new(&params, config.dim)?;
        let analytic_hi = AnalyticPipeline::new(&params, dim_hi)?;
        Ok((exact_lo, exact_hi, analytic_lo, analytic_hi))
    })();
    let (exact_lo, exact_hi, analytic_lo, analytic_hi) = match pipelines {
        Ok(p) => p,
        Err(e) => {
            return config
                .times
                .iter()
                .map(|&t| ScanRecord {
                    time: t,
                    error: e.to_string(),
                    ..base.clone()
                })
                .collect();
        }
    };

    config
        .times
        .iter()
        .map(|&t| {
            // grid times are nu t; the propagators take absolute time
            let t_abs = t / config.nu;
            let out = point_metrics(
                &params,
                &exact_lo,
                &analytic_lo,
                t_abs,
                config.dim,
                config.guard,
            )
            .and_then(|lo| {
                let hi = point_metrics(
                    &params,
                    &exact_hi,
                    &analytic_hi,
                    t_abs,
                    dim_hi,
                    config.guard,
                )?;
                Ok((lo, hi))
            });
            match out {
                Ok((lo, hi)) => {
                    let delta = (lo.infidelity - hi.infidelity).abs();
                    ScanRecord {
                        time: t,
                        infidelity: hi.infidelity,
                        infidelity_delta: delta,
                        leakage: hi.leakage,
                        p_excited: hi.p_excited,
                        tail: hi.tail,
                        converged: delta < CONVERGENCE_TOL,
                        ..base.clone()
                    }
                }
                Err(e) => ScanRecord {
                    time: t,
                    error: e.to_string(),
                    ..base.clone()
                },
            }
        })
        .collect()
}
