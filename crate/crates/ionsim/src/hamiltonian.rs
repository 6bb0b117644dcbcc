//! Spin (x) mode operators and the four Hamiltonians of the transformation
//! chain: the full ion-laser coupling, its linearized form, the exact
//! small-rotation form, and the effective Jaynes-Cummings model.
//!
//! Basis convention, fixed repository-wide: the excited spin block comes
//! first, so a spin-boson vector is ordered (e,0..N-1, g,0..N-1) and a
//! spin-boson operator is a 2x2 grid of NxN mode blocks.

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use std::fmt;

use crate::error::{Error, Result};
use crate::fock::{
    adjoint, displacement, frobenius_norm, hermitian_function, hermiticity_residual, ladder,
    ModeOperator, HERMITIAN_TOL,
};
use crate::params::IonParams;

/// Internal state of the two-level ion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Excited,
    Ground,
}

impl Spin {
    pub fn block_index(self) -> usize {
        match self {
            Spin::Excited => 0,
            Spin::Ground => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Spin::Excited => "e",
            Spin::Ground => "g",
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Dense operator on the spin (x) mode space (2N x 2N).
#[derive(Clone, Debug)]
pub struct SpinBosonOperator {
    mode_dim: usize,
    matrix: Array2<C64>,
    hermitian: bool,
}

impl SpinBosonOperator {
    /// Wrap a general 2N x 2N matrix.
    pub fn general(matrix: Array2<C64>) -> Result<Self> {
        let mode_dim = checked_spin_boson(&matrix)?;
        Ok(Self {
            mode_dim,
            matrix,
            hermitian: false,
        })
    }

    /// Wrap a matrix that must be Hermitian within [`HERMITIAN_TOL`].
    pub fn hermitian(matrix: Array2<C64>) -> Result<Self> {
        let mode_dim = checked_spin_boson(&matrix)?;
        let residual = hermiticity_residual(&matrix);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                residual,
                tol: HERMITIAN_TOL,
            });
        }
        Ok(Self {
            mode_dim,
            matrix,
            hermitian: true,
        })
    }

    pub fn mode_dim(&self) -> usize {
        self.mode_dim
    }

    /// Full dimension 2N.
    pub fn dim(&self) -> usize {
        2 * self.mode_dim
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mode_dim: self.mode_dim,
            matrix: adjoint(&self.matrix),
            hermitian: self.hermitian,
        }
    }

    /// View of one N x N mode block.
    pub fn block(&self, row: Spin, col: Spin) -> Array2<C64> {
        let n = self.mode_dim;
        let r = row.block_index() * n;
        let c = col.block_index() * n;
        self.matrix.slice(s![r..r + n, c..c + n]).to_owned()
    }
}

/// Stitch four N x N mode blocks into a 2N x 2N spin-boson matrix.
pub fn assemble_blocks(
    ee: &Array2<C64>,
    eg: &Array2<C64>,
    ge: &Array2<C64>,
    gg: &Array2<C64>,
) -> Array2<C64> {
    let n = ee.nrows();
    let mut m = Array2::<C64>::zeros((2 * n, 2 * n));
    m.slice_mut(s![..n, ..n]).assign(ee);
    m.slice_mut(s![..n, n..]).assign(eg);
    m.slice_mut(s![n.., ..n]).assign(ge);
    m.slice_mut(s![n.., n..]).assign(gg);
    m
}

/// Zero out rows and columns whose mode index lies inside the guard band,
/// in both spin blocks.
pub fn guarded(m: &Array2<C64>, guard: usize) -> Array2<C64> {
    let n = m.nrows() / 2;
    assert!(guard < n, "guarded: guard must be smaller than the mode dim");
    let keep = n - guard;
    let mut out = m.clone();
    let banned = |i: usize| (i % n) >= keep;
    for i in 0..2 * n {
        for j in 0..2 * n {
            if banned(i) || banned(j) {
                out[[i, j]] = C64::new(0.0, 0.0);
            }
        }
    }
    out
}

/// Frobenius distance between two matrices restricted to the guarded subspace.
pub fn guarded_distance(a: &Array2<C64>, b: &Array2<C64>, guard: usize) -> f64 {
    frobenius_norm(&guarded(&(a - b), guard))
}

/// Full ion-laser Hamiltonian
/// H = nu n + (delta/2) sigma_z + Omega (sigma_- e^{-i eta(a+a^dag)} + h.c.),
/// with the exponentials built as displacement operators since
/// e^{i eta(a+a^dag)} = D(i eta). Accepts any detuning; this is the operator
/// the exact oracle propagates.
pub fn full_hamiltonian(params: &IonParams, dim: usize) -> Result<SpinBosonOperator> {
    let lad = ladder(dim)?;
    let disp = displacement(C64::new(0.0, params.eta), dim)?;
    let nu_n = lad.number.matrix().mapv(|z| z * params.nu);
    let half_delta = Array2::<C64>::eye(dim).mapv(|z| z * (params.delta / 2.0));
    let ee = &nu_n + &half_delta;
    let gg = &nu_n - &half_delta;
    let eg = disp.matrix().mapv(|z| z * params.omega_rabi);
    let ge = adjoint(&eg);
    SpinBosonOperator::hermitian(assemble_blocks(&ee, &eg, &ge, &gg))
}

/// Linearized Hamiltonian
/// H1 = nu n + Omega sigma_z + i(eta nu/2)(a - a^dag) sigma_x + nu eta^2/4.
/// Only defined on resonance.
pub fn linearized_hamiltonian(params: &IonParams, dim: usize) -> Result<SpinBosonOperator> {
    require_resonance(params)?;
    let lad = ladder(dim)?;
    let nu_n = lad.number.matrix().mapv(|z| z * params.nu);
    let constant = params.nu * params.eta.powi(2) / 4.0;
    let eye = Array2::<C64>::eye(dim);
    let ee = &nu_n + &eye.mapv(|z| z * (params.omega_rabi + constant));
    let gg = &nu_n + &eye.mapv(|z| z * (-params.omega_rabi + constant));
    // i (eta nu / 2)(a - a^dag), Hermitian as a whole block
    let coupling = (lad.lowering.matrix() - lad.raising.matrix())
        .mapv(|z| z * C64::new(0.0, params.eta * params.nu / 2.0));
    SpinBosonOperator::hermitian(assemble_blocks(&ee, &coupling, &coupling, &gg))
}

/// Exact small-rotation Hamiltonian
/// H2 = nu (n + i eps (a - a^dag) sigma_x + eps^2)
///    + Omega (sigma_z cos[2 eps (a+a^dag)] + i (sigma_- - sigma_+) sin[2 eps (a+a^dag)])
///    + i (eta nu/2)(a - a^dag) sigma_x + nu eps eta^2/4,
/// with the operator trigonometry evaluated spectrally. Only defined on
/// resonance. With the sign convention of the small-rotation amplitude used
/// here, this operator equals the conjugation of H1 by the rotation applied
/// from the right (T2^dag H1 T2) up to an identity shift.
pub fn rotated_hamiltonian(params: &IonParams, dim: usize) -> Result<SpinBosonOperator> {
    rotated_hamiltonian_impl(params, dim, false)
}

/// First-order expansion of [`rotated_hamiltonian`] in the rotation
/// amplitude: cos -> 1, sin -> argument. This is the operator whose
/// counter-rotating coefficients cancel when epsilon takes its derived value.
pub fn rotated_hamiltonian_first_order(
    params: &IonParams,
    dim: usize,
) -> Result<SpinBosonOperator> {
    rotated_hamiltonian_impl(params, dim, true)
}

fn rotated_hamiltonian_impl(
    params: &IonParams,
    dim: usize,
    first_order: bool,
) -> Result<SpinBosonOperator> {
    require_resonance(params)?;
    let d = params.derive();
    let eps = d.epsilon;
    let nu = params.nu;
    let omega = params.omega_rabi;
    let eta = params.eta;

    let lad = ladder(dim)?;
    let eye = Array2::<C64>::eye(dim);
    let x = lad.lowering.matrix() + lad.raising.matrix();

    let (cos_2ex, sin_2ex) = if first_order {
        (eye.clone(), x.mapv(|z| z * (2.0 * eps)))
    } else {
        let arg = ModeOperator::hermitian(x.mapv(|z| z * (2.0 * eps)))?;
        let cos = hermitian_function(&arg, |v| C64::new(v.cos(), 0.0))?;
        let sin = hermitian_function(&arg, |v| C64::new(v.sin(), 0.0))?;
        (cos.into_matrix(), sin.into_matrix())
    };

    let nu_n = lad.number.matrix().mapv(|z| z * nu);
    let constant = nu * eps.powi(2) + nu * eps * eta.powi(2) / 4.0;
    let omega_cos = cos_2ex.mapv(|z| z * omega);
    let ee = &(&nu_n + &omega_cos) + &eye.mapv(|z| z * constant);
    let gg = &(&nu_n - &omega_cos) + &eye.mapv(|z| z * constant);

    // i (nu eps + eta nu / 2)(a - a^dag) on sigma_x, plus the sigma_y-like
    // sin term entering the off-diagonal blocks with opposite signs
    let x_coupling = (lad.lowering.matrix() - lad.raising.matrix())
        .mapv(|z| z * C64::new(0.0, nu * eps + eta * nu / 2.0));
    let omega_sin = sin_2ex.mapv(|z| z * C64::new(0.0, omega));
    let eg = &x_coupling - &omega_sin;
    let ge = &x_coupling + &omega_sin;

    SpinBosonOperator::hermitian(assemble_blocks(&ee, &eg, &ge, &gg))
}

/// Effective Jaynes-Cummings Hamiltonian
/// H = nu n + Omega sigma_z + i lambda (sigma_+ a - a^dag sigma_-),
/// the first-order result of the small rotation. Only defined on resonance.
pub fn jaynes_cummings_hamiltonian(params: &IonParams, dim: usize) -> Result<SpinBosonOperator> {
    require_resonance(params)?;
    let d = params.derive();
    let lad = ladder(dim)?;
    let nu_n = lad.number.matrix().mapv(|z| z * params.nu);
    let eye = Array2::<C64>::eye(dim);
    let ee = &nu_n + &eye.mapv(|z| z * params.omega_rabi);
    let gg = &nu_n - &eye.mapv(|z| z * params.omega_rabi);
    let eg = lad
        .lowering
        .matrix()
        .mapv(|z| z * C64::new(0.0, d.lambda_eff));
    let ge = lad
        .raising
        .matrix()
        .mapv(|z| z * C64::new(0.0, -d.lambda_eff));
    SpinBosonOperator::hermitian(assemble_blocks(&ee, &eg, &ge, &gg))
}

fn require_resonance(params: &IonParams) -> Result<()> {
    if !params.is_resonant() {
        return Err(Error::UnsupportedDetuning {
            delta: params.delta,
        });
    }
    Ok(())
}

fn checked_spin_boson(m: &Array2<C64>) -> Result<usize> {
    let dim = m.nrows();
    if m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: m.ncols(),
        });
    }
    if dim < 4 || dim % 2 != 0 {
        return Err(Error::InvalidDimension { dim });
    }
    Ok(dim / 2)
}
