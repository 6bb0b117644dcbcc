//! Truncated Fock-space linear algebra: ladder operators, spectral operator
//! functions, displacement operators, and special states.
//!
//! Everything here is dense. Truncations stay small enough (N <= 256) that a
//! single Hermitian eigendecomposition is the workhorse for every operator
//! function, which keeps one testable code path for exp, cos, and sin.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Construction tolerance for Hermitian-flagged operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on |norm^2 - 1| for the normalized flag on states.
pub const NORM_TOL: f64 = 1e-10;

/// Fock levels reserved as a truncation buffer at the top of the space.
/// Population reaching the guard band invalidates a run rather than
/// silently losing norm.
pub const DEFAULT_GUARD: usize = 8;

/// Dense operator on the truncated vibrational mode.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    dim: usize,
    matrix: Array2<C64>,
    hermitian: bool,
}

impl ModeOperator {
    /// Wrap a general (not necessarily Hermitian) matrix.
    pub fn general(matrix: Array2<C64>) -> Result<Self> {
        let dim = checked_square(&matrix)?;
        Ok(Self {
            dim,
            matrix,
            hermitian: false,
        })
    }

    /// Wrap a matrix that must be Hermitian within [`HERMITIAN_TOL`].
    pub fn hermitian(matrix: Array2<C64>) -> Result<Self> {
        let dim = checked_square(&matrix)?;
        let residual = hermiticity_residual(&matrix);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                residual,
                tol: HERMITIAN_TOL,
            });
        }
        Ok(Self {
            dim,
            matrix,
            hermitian: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: adjoint(&self.matrix),
            hermitian: self.hermitian,
        }
    }

    /// Apply to a state vector.
    pub fn apply(&self, state: &ModeState) -> Result<ModeState> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: state.dim(),
            });
        }
        ModeState::from_amplitudes(self.matrix.dot(&state.amplitudes))
    }
}

/// Amplitude vector on the truncated vibrational mode.
#[derive(Clone, Debug)]
pub struct ModeState {
    dim: usize,
    amplitudes: Array1<C64>,
    normalized: bool,
}

impl ModeState {
    /// Build from raw amplitudes; the normalized flag is detected.
    pub fn from_amplitudes(amplitudes: Array1<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 {
            return Err(Error::InvalidDimension { dim });
        }
        let normalized = (norm_sqr(&amplitudes) - 1.0).abs() <= NORM_TOL;
        Ok(Self {
            dim,
            amplitudes,
            normalized,
        })
    }

    /// Number state |k>.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim });
        }
        if k >= dim {
            return Err(Error::TruncationRisk {
                level: k,
                dim,
                guard: 0,
            });
        }
        let mut amplitudes = Array1::<C64>::zeros(dim);
        amplitudes[k] = C64::new(1.0, 0.0);
        Ok(Self {
            dim,
            amplitudes,
            normalized: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product <self|other>.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Expectation value of the number operator.
    pub fn mean_occupation(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    /// Return a unit-norm copy.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter {
                name: "norm",
                value: 0.0,
                constraint: "cannot normalize the zero vector",
            });
        }
        let amplitudes = self.amplitudes.mapv(|z| z / n);
        Ok(Self {
            dim: self.dim,
            amplitudes,
            normalized: true,
        })
    }
}

/// Ladder operators on the truncated mode.
///
/// The commutator identity [a, a^dag] = 1 holds exactly away from the
/// truncation edge; the number operator is built directly as an exact
/// diagonal rather than as a product of rounded square roots.
pub struct Ladder {
    pub lowering: ModeOperator,
    pub raising: ModeOperator,
    pub number: ModeOperator,
}

/// Construct the annihilation, creation, and number operators.
pub fn ladder(dim: usize) -> Result<Ladder> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    let mut lowering = Array2::<C64>::zeros((dim, dim));
    for n in 1..dim {
        lowering[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    let raising = adjoint(&lowering);
    let mut number = Array2::<C64>::zeros((dim, dim));
    for n in 0..dim {
        number[[n, n]] = C64::new(n as f64, 0.0);
    }
    Ok(Ladder {
        lowering: ModeOperator::general(lowering)?,
        raising: ModeOperator::general(raising)?,
        number: ModeOperator::hermitian(number)?,
    })
}

/// Evaluate f(op) through the spectral decomposition op = V diag(lambda) V^dag.
///
/// The result is Hermitian whenever f is real-valued on the spectrum; the
/// Hermitian flag is re-detected on the output.
pub fn hermitian_function(op: &ModeOperator, f: impl Fn(f64) -> C64) -> Result<ModeOperator> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian {
            residual: hermiticity_residual(op.matrix()),
            tol: HERMITIAN_TOL,
        });
    }
    let out = matrix_function_of_hermitian(op.matrix(), &f)?;
    if hermiticity_residual(&out) <= HERMITIAN_TOL {
        ModeOperator::hermitian(out)
    } else {
        ModeOperator::general(out)
    }
}

/// Core spectral evaluation on a raw Hermitian matrix.
pub(crate) fn matrix_function_of_hermitian(
    m: &Array2<C64>,
    f: &dyn Fn(f64) -> C64,
) -> Result<Array2<C64>> {
    let (vals, vecs) = eigh_columns(m)?;
    let mut scaled = vecs.clone();
    for (mut col, &v) in scaled.columns_mut().into_iter().zip(vals.iter()) {
        let fv = f(v);
        col.mapv_inplace(|z| z * fv);
    }
    Ok(scaled.dot(&adjoint(&vecs)))
}

/// Hermitian eigendecomposition with eigenvectors as columns of the returned
/// matrix, i.e. m = V diag(vals) V^dag.
///
/// `eigh` hands LAPACK the raw buffer, so what gets diagonalized depends on
/// the memory layout: a row-major buffer reads as the transposed
/// (= conjugated) matrix. The layout is pinned to row-major here and the
/// resulting conjugation undone on the vectors.
pub(crate) fn eigh_columns(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let pinned = m.as_standard_layout();
    let (vals, vecs) = pinned
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(e.to_string()))?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// Displacement operator D(beta) = exp(beta a^dag - beta* a).
///
/// The generator is anti-Hermitian, so the operator is computed as
/// exp(-i H) of the Hermitian H = i (beta a^dag - beta* a). Unitary on the
/// guarded subspace; truncation effects live at the Fock edge.
pub fn displacement(beta: C64, dim: usize) -> Result<ModeOperator> {
    let lad = ladder(dim)?;
    let g = lad.raising.matrix() * beta - lad.lowering.matrix() * beta.conj();
    let h = g.mapv(|z| z * C64::i());
    let u = matrix_function_of_hermitian(&h, &|x| C64::new(0.0, -x).exp())?;
    ModeOperator::general(u)
}

/// Displaced number state D(beta)|k>.
///
/// Rejects k inside the guard band: a displaced state seeded that close to
/// the truncation edge cannot be trusted.
pub fn displaced_number_state(beta: C64, k: usize, dim: usize) -> Result<ModeState> {
    if k + DEFAULT_GUARD > dim {
        return Err(Error::TruncationRisk {
            level: k,
            dim,
            guard: DEFAULT_GUARD,
        });
    }
    let d = displacement(beta, dim)?;
    d.apply(&ModeState::basis(dim, k)?)
}

/// Coherent state |beta> = D(beta)|0>.
pub fn coherent_state(beta: C64, dim: usize) -> Result<ModeState> {
    displaced_number_state(beta, 0, dim)
}

/// Population in the top `guard` Fock levels. Pure diagnostic.
pub fn tail_mass(state: &ModeState, guard: usize) -> f64 {
    assert!(
        guard > 0 && guard < state.dim(),
        "tail_mass: guard must satisfy 0 < guard < dim"
    );
    let start = state.dim() - guard;
    state
        .amplitudes()
        .iter()
        .skip(start)
        .map(|a| a.norm_sqr())
        .sum()
}

/// Zero out all rows and columns with mode index inside the guard band.
pub fn guarded_mode(m: &Array2<C64>, guard: usize) -> Array2<C64> {
    let n = m.nrows();
    assert!(guard < n, "guarded_mode: guard must be smaller than dim");
    let keep = n - guard;
    let mut out = m.clone();
    for i in 0..n {
        for j in 0..n {
            if i >= keep || j >= keep {
                out[[i, j]] = C64::new(0.0, 0.0);
            }
        }
    }
    out
}

/// Frobenius norm of a complex matrix.
pub fn frobenius_norm(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry magnitude of a complex matrix.
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// max |M - M^dag| over all entries.
pub fn hermiticity_residual(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let d = (m[[i, j]] - m[[j, i]].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub(crate) fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub(crate) fn norm_sqr(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn checked_square(m: &Array2<C64>) -> Result<usize> {
    let dim = m.nrows();
    if m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: m.ncols(),
        });
    }
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    Ok(dim)
}
