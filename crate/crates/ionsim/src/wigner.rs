//! Wigner quasiprobability on a phase-space grid, evaluated from Fock
//! amplitudes through displaced-parity overlaps:
//! W(alpha) = (2/pi) sum_n (-1)^n |<n| D^dag(alpha) |psi>|^2.
//!
//! Grid convention: x = Re(alpha), p = Im(alpha), so a coherent state |beta>
//! peaks at (Re beta, Im beta) with peak value 2/pi, and the grid integral
//! uses the plain dx dp measure.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{adjoint, eigh_columns, ladder, tail_mass, ModeState, DEFAULT_GUARD};

/// States handed to the Wigner sampler must be contained to this tail mass.
pub const WIGNER_TAIL_TOL: f64 = 1e-8;

/// Real-valued Wigner samples on a rectangular (x, p) grid;
/// `values[[i, j]]` belongs to (x[i], p[j]).
#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Array2<f64>,
}

impl WignerGrid {
    /// Riemann integral over the grid; close to 1 for well-contained states
    /// on a grid that covers them.
    pub fn grid_mass(&self) -> f64 {
        if self.x.len() < 2 || self.p.len() < 2 {
            return f64::NAN;
        }
        let dx = self.x[1] - self.x[0];
        let dp = self.p[1] - self.p[0];
        self.values.sum() * dx * dp
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluate the Wigner function of a mode state on the given grid.
///
/// Every displacement on the grid shares the eigenbasis of the Hermitian
/// momentum-like generator i(a^dag - a); one decomposition per call serves
/// all grid points, with the direction of alpha entering through a number-
/// basis phase rotation.
pub fn wigner(state: &ModeState, x: &[f64], p: &[f64]) -> Result<WignerGrid> {
    let tail = tail_mass(state, DEFAULT_GUARD.min(state.dim() - 1));
    if tail > WIGNER_TAIL_TOL {
        return Err(Error::TruncationExceeded {
            time: 0.0,
            tail,
            limit: WIGNER_TAIL_TOL,
        });
    }
    let dim = state.dim();
    let lad = ladder(dim)?;
    // D(r e^{i theta}) = R(theta) exp(r (a^dag - a)) R(theta)^dag with
    // R(theta) = exp(i theta n); diagonalize the radial generator once
    let radial = (lad.raising.matrix() - lad.lowering.matrix()).mapv(|z| z * C64::i());
    let (mu, v) = eigh_columns(&radial)?;
    let vh = adjoint(&v);

    let mut values = Array2::<f64>::zeros((x.len(), p.len()));
    for (i, &xi) in x.iter().enumerate() {
        for (j, &pj) in p.iter().enumerate() {
            let alpha = C64::new(xi, pj);
            let displaced = displace_state(state, -alpha, &mu, &v, &vh);
            let parity_sum: f64 = displaced
                .iter()
                .enumerate()
                .map(|(n, z)| if n % 2 == 0 { z.norm_sqr() } else { -z.norm_sqr() })
                .sum();
            values[[i, j]] = parity_sum * 2.0 / std::f64::consts::PI;
        }
    }
    Ok(WignerGrid {
        x: x.to_vec(),
        p: p.to_vec(),
        values,
    })
}

/// Apply D(beta) to the state through the cached radial eigenbasis.
fn displace_state(
    state: &ModeState,
    beta: C64,
    mu: &Array1<f64>,
    v: &Array2<C64>,
    vh: &Array2<C64>,
) -> Array1<C64> {
    let r = beta.norm();
    if r == 0.0 {
        return state.amplitudes().clone();
    }
    let theta = beta.arg();
    // R(theta)^dag |psi>
    let mut work: Array1<C64> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, &a)| a * C64::new(0.0, -theta * n as f64).exp())
        .collect();
    // exp(r (a^dag - a)) = V exp(-i r mu) V^dag
    work = vh.dot(&work);
    for (w, &m) in work.iter_mut().zip(mu.iter()) {
        *w *= C64::new(0.0, -r * m).exp();
    }
    work = v.dot(&work);
    // R(theta)
    for (n, w) in work.iter_mut().enumerate() {
        *w *= C64::new(0.0, theta * n as f64).exp();
    }
    work
}

/// Uniform grid helper: `points` samples spanning [-extent, extent].
pub fn symmetric_grid(extent: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "symmetric_grid: need at least two points");
    let step = 2.0 * extent / (points - 1) as f64;
    (0..points).map(|k| -extent + k as f64 * step).collect()
}
