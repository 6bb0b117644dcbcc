//! The unitaries of the transformation chain: the displacement-built
//! linearizing transform, the small spin-mode rotation, and their
//! composition in both operator-product and closed form.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::fock::{displacement, ladder, matrix_function_of_hermitian};
use crate::hamiltonian::{assemble_blocks, SpinBosonOperator};
use crate::params::IonParams;

/// The transforms of the chain for one parameter set.
///
/// `composed_product` is the literal operator product (rotation after
/// linearization); `composed_closed` is the same object written as a single
/// displacement-built transform with the shifted amplitude `beta_minus`.
/// For purely imaginary displacement amplitudes the two coincide up to
/// truncation-edge effects, and the analytic evolution pipeline uses the
/// closed form.
pub struct TransformSet {
    pub linearizing: SpinBosonOperator,
    pub rotation: SpinBosonOperator,
    pub composed_product: SpinBosonOperator,
    pub composed_closed: SpinBosonOperator,
    /// Displacement amplitude of the linearizing transform, i eta/2.
    pub beta: C64,
    /// Displacement amplitude of the composed transform, i(eta/2 - epsilon).
    pub beta_minus: C64,
    /// Small-rotation amplitude.
    pub epsilon: f64,
}

/// Spin-conditional displacement transform with amplitude beta:
/// (1/sqrt 2) ( (1/2)[D^dag + D] I + (1/2)[D^dag - D] sigma_z
///              - D^dag sigma_- + D sigma_+ ),
/// assembled blockwise as (1/sqrt 2) [[D^dag, D], [-D^dag, D]].
pub fn displaced_spin_transform(beta: C64, dim: usize) -> Result<SpinBosonOperator> {
    let d = displacement(beta, dim)?;
    let dagger = d.adjoint();
    let w = 1.0 / 2.0_f64.sqrt();
    let ee = dagger.matrix().mapv(|z| z * w);
    let eg = d.matrix().mapv(|z| z * w);
    let ge = dagger.matrix().mapv(|z| z * (-w));
    let gg = d.matrix().mapv(|z| z * w);
    SpinBosonOperator::general(assemble_blocks(&ee, &eg, &ge, &gg))
}

/// Linearizing transform: [`displaced_spin_transform`] at beta = i eta/2.
pub fn linearizing_transform(params: &IonParams, dim: usize) -> Result<SpinBosonOperator> {
    displaced_spin_transform(C64::new(0.0, params.eta / 2.0), dim)
}

/// Small rotation exp(-i epsilon (a + a^dag) sigma_x), computed as the
/// spectral exponential of its Hermitian generator.
pub fn small_rotation(params: &IonParams, dim: usize) -> Result<SpinBosonOperator> {
    let d = params.derive();
    let lad = ladder(dim)?;
    let x = (lad.lowering.matrix() + lad.raising.matrix()).mapv(|z| z * d.epsilon);
    let zero = Array2::<C64>::zeros((dim, dim));
    let generator = assemble_blocks(&zero, &x, &x, &zero);
    let u = matrix_function_of_hermitian(&generator, &|v| C64::new(0.0, -v).exp())?;
    SpinBosonOperator::general(u)
}

/// The composed transform, returned as (operator product, closed form).
pub fn composed_transform(
    params: &IonParams,
    dim: usize,
) -> Result<(SpinBosonOperator, SpinBosonOperator)> {
    let t1 = linearizing_transform(params, dim)?;
    let t2 = small_rotation(params, dim)?;
    let product = SpinBosonOperator::general(t2.matrix().dot(t1.matrix()))?;
    let closed = displaced_spin_transform(params.derive().beta_minus, dim)?;
    Ok((product, closed))
}

/// Frobenius distance between the product and closed forms of the composed
/// transform on the guarded subspace. Reported by sweeps as evidence for the
/// closed form's validity.
pub fn composed_form_discrepancy(params: &IonParams, dim: usize, guard: usize) -> Result<f64> {
    let (product, closed) = composed_transform(params, dim)?;
    Ok(crate::hamiltonian::guarded_distance(
        product.matrix(),
        closed.matrix(),
        guard,
    ))
}

/// Build every transform of the chain for one parameter set.
pub fn transform_set(params: &IonParams, dim: usize) -> Result<TransformSet> {
    let d = params.derive();
    let linearizing = linearizing_transform(params, dim)?;
    let rotation = small_rotation(params, dim)?;
    let composed_product =
        SpinBosonOperator::general(rotation.matrix().dot(linearizing.matrix()))?;
    let composed_closed = displaced_spin_transform(d.beta_minus, dim)?;
    Ok(TransformSet {
        linearizing,
        rotation,
        composed_product,
        composed_closed,
        beta: C64::new(0.0, params.eta / 2.0),
        beta_minus: d.beta_minus,
        epsilon: d.epsilon,
    })
}
