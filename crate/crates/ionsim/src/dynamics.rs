//! Time evolution: an exact spectral propagator for any Hermitian spin-boson
//! Hamiltonian, the analytic blockwise propagator of the effective
//! Jaynes-Cummings model, and the full analytic pipeline
//! (transform, propagate, transform back).

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{adjoint, eigh_columns, norm_sqr, ModeState, HERMITIAN_TOL, NORM_TOL};
use crate::hamiltonian::{full_hamiltonian, Spin, SpinBosonOperator};
use crate::params::{DerivedParams, IonParams};
use crate::transforms::displaced_spin_transform;

/// Initial states fed to the exact oracle must keep their guard-band mass
/// below this.
pub const INITIAL_TAIL_TOL: f64 = 1e-10;

/// Guard-band population along a trajectory beyond this limit aborts the run
/// instead of silently losing norm.
pub const TAIL_LIMIT: f64 = 1e-8;

/// Amplitude vector on the spin (x) mode space, ordered
/// (e,0..N-1, g,0..N-1).
#[derive(Clone, Debug)]
pub struct SpinBosonState {
    mode_dim: usize,
    amplitudes: Array1<C64>,
    normalized: bool,
}

impl SpinBosonState {
    pub fn from_amplitudes(amplitudes: Array1<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 4 || len % 2 != 0 {
            return Err(Error::InvalidDimension { dim: len });
        }
        let normalized = (norm_sqr(&amplitudes) - 1.0).abs() <= NORM_TOL;
        Ok(Self {
            mode_dim: len / 2,
            amplitudes,
            normalized,
        })
    }

    /// Product state |spin> (x) |mode>.
    pub fn product(spin: Spin, mode: &ModeState) -> Self {
        let n = mode.dim();
        let mut amplitudes = Array1::<C64>::zeros(2 * n);
        let offset = spin.block_index() * n;
        for (k, &a) in mode.amplitudes().iter().enumerate() {
            amplitudes[offset + k] = a;
        }
        let normalized = (norm_sqr(&amplitudes) - 1.0).abs() <= NORM_TOL;
        Self {
            mode_dim: n,
            amplitudes,
            normalized,
        }
    }

    /// Basis state |spin, k>.
    pub fn basis(spin: Spin, k: usize, mode_dim: usize) -> Result<Self> {
        Ok(Self::product(spin, &ModeState::basis(mode_dim, k)?))
    }

    pub fn mode_dim(&self) -> usize {
        self.mode_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.mode_dim
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

    /// Amplitudes of one spin block as a mode-space vector.
    pub fn spin_block(&self, spin: Spin) -> Array1<C64> {
        let n = self.mode_dim;
        let offset = spin.block_index() * n;
        self.amplitudes
            .slice(ndarray::s![offset..offset + n])
            .to_owned()
    }

    /// Population of one spin block.
    pub fn spin_population(&self, spin: Spin) -> f64 {
        let n = self.mode_dim;
        let offset = spin.block_index() * n;
        self.amplitudes
            .iter()
            .skip(offset)
            .take(n)
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Expectation of the mode number operator across both spin blocks.
    pub fn mean_occupation(&self) -> f64 {
        let n = self.mode_dim;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| (i % n) as f64 * z.norm_sqr())
            .sum()
    }

    /// Population in the top `guard` mode levels, summed over spin blocks.
    pub fn tail_mass(&self, guard: usize) -> f64 {
        let n = self.mode_dim;
        assert!(
            guard > 0 && guard < n,
            "tail_mass: guard must satisfy 0 < guard < mode_dim"
        );
        let keep = n - guard;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i % n) >= keep)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter {
                name: "norm",
                value: 0.0,
                constraint: "cannot normalize the zero vector",
            });
        }
        Ok(Self {
            mode_dim: self.mode_dim,
            amplitudes: self.amplitudes.mapv(|z| z / n),
            normalized: true,
        })
    }
}

/// State trajectory with per-sample norm and guard-band diagnostics.
#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    pub states: Vec<SpinBosonState>,
    pub norms: Vec<f64>,
    pub tails: Vec<f64>,
}

/// Cached eigendecomposition of a Hermitian spin-boson Hamiltonian.
///
/// One decomposition serves every evolution time; the struct is immutable
/// and safe to share across parallel workers.
pub struct SpectralPropagator {
    mode_dim: usize,
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<C64>,
}

impl SpectralPropagator {
    pub fn new(h: &SpinBosonOperator) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian {
                residual: crate::fock::hermiticity_residual(h.matrix()),
                tol: HERMITIAN_TOL,
            });
        }
        let (eigenvalues, eigenvectors) = eigh_columns(h.matrix())?;
        Ok(Self {
            mode_dim: h.mode_dim(),
            eigenvalues,
            eigenvectors,
        })
    }

    /// U(t) = V exp(-i Lambda t) V^dag as a full matrix.
    pub fn matrix(&self, t: f64) -> SpinBosonOperator {
        let mut scaled = self.eigenvectors.clone();
        for (mut col, &v) in scaled
            .columns_mut()
            .into_iter()
            .zip(self.eigenvalues.iter())
        {
            let phase = C64::new(0.0, -v * t).exp();
            col.mapv_inplace(|z| z * phase);
        }
        let u = scaled.dot(&adjoint(&self.eigenvectors));
        SpinBosonOperator::general(u).expect("propagator inherits a valid dimension")
    }

    /// Apply U(t) to a state through the eigenbasis (two matrix-vector
    /// products instead of a full matrix build).
    pub fn apply(&self, t: f64, psi: &SpinBosonState) -> Result<SpinBosonState> {
        if psi.mode_dim() != self.mode_dim {
            return Err(Error::DimensionMismatch {
                left: 2 * self.mode_dim,
                right: psi.dim(),
            });
        }
        let mut coeffs = adjoint(&self.eigenvectors).dot(psi.amplitudes());
        for (c, &v) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= C64::new(0.0, -v * t).exp();
        }
        SpinBosonState::from_amplitudes(self.eigenvectors.dot(&coeffs))
    }
}

/// One-shot exact propagator U(t) for a Hermitian Hamiltonian.
pub fn exact_propagator(h: &SpinBosonOperator, t: f64) -> Result<SpinBosonOperator> {
    Ok(SpectralPropagator::new(h)?.matrix(t))
}

/// (cos alpha t, sin(alpha t)/alpha) with the analytic limit (1, t) at
/// alpha = 0.
pub fn cos_sinc(alpha: f64, t: f64) -> (f64, f64) {
    if alpha == 0.0 {
        (1.0, t)
    } else {
        let x = alpha * t;
        (x.cos(), x.sin() / alpha)
    }
}

/// Analytic propagator of the effective Jaynes-Cummings model, assembled
/// blockwise from diagonal functions of the number operator:
/// a free-phase prefactor exp(-i t (nu n + nu sigma_z/2)) times the
/// interaction-sector rotation built from the generalized Rabi frequencies
/// alpha_n = sqrt(Delta^2 + lambda^2 n).
///
/// Unitary on the truncated space except for the single cut coupling at the
/// top Fock level, which the guard band excludes.
pub fn jcm_propagator(d: &DerivedParams, t: f64, dim: usize) -> Result<SpinBosonOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    let nu = d.nu;
    let delta = d.delta_jcm;
    let lambda = d.lambda_eff;
    let mut m = Array2::<C64>::zeros((2 * dim, 2 * dim));
    for n in 0..dim {
        let (c_up, s_up) = cos_sinc(d.alpha(n + 1), t);
        let (c_dn, s_dn) = cos_sinc(d.alpha(n), t);
        let pre_e = C64::new(0.0, -t * nu * (n as f64 + 0.5)).exp();
        let pre_g = C64::new(0.0, -t * nu * (n as f64 - 0.5)).exp();
        // excited diagonal: cos(alpha_{n+1} t) - i Delta sinc
        m[[n, n]] = pre_e * C64::new(c_up, -delta * s_up);
        // ground diagonal: cos(alpha_n t) + i Delta sinc
        m[[dim + n, dim + n]] = pre_g * C64::new(c_dn, delta * s_dn);
        if n + 1 < dim {
            let root = ((n + 1) as f64).sqrt();
            // |g,n+1> -> |e,n>
            m[[n, dim + n + 1]] = pre_e * C64::new(lambda * root * s_up, 0.0);
            // |e,n> -> |g,n+1>; the row prefactor at mode n+1 equals pre_e
            m[[dim + n + 1, n]] = pre_e * C64::new(-lambda * root * s_up, 0.0);
        }
    }
    SpinBosonOperator::general(m)
}

/// Evolve through the analytic chain: closed-form composed transform in,
/// Jaynes-Cummings propagator, composed transform back out. No
/// renormalization is applied; the returned norm is a diagnostic.
pub fn evolve_analytic(
    psi0: &SpinBosonState,
    t: f64,
    params: &IonParams,
    dim: usize,
) -> Result<SpinBosonState> {
    let pipeline = AnalyticPipeline::new(params, dim)?;
    pipeline.evolve(psi0, t)
}

/// The analytic chain with its transform built once and reused across times.
pub struct AnalyticPipeline {
    derived: DerivedParams,
    transform: Array2<C64>,
    transform_dag: Array2<C64>,
    dim: usize,
}

impl AnalyticPipeline {
    pub fn new(params: &IonParams, dim: usize) -> Result<Self> {
        if !params.is_resonant() {
            return Err(Error::UnsupportedDetuning {
                delta: params.delta,
            });
        }
        let derived = params.derive();
        let t = displaced_spin_transform(derived.beta_minus, dim)?;
        let transform = t.matrix().clone();
        let transform_dag = adjoint(&transform);
        Ok(Self {
            derived,
            transform,
            transform_dag,
            dim,
        })
    }

    pub fn derived(&self) -> &DerivedParams {
        &self.derived
    }

    pub fn evolve(&self, psi0: &SpinBosonState, t: f64) -> Result<SpinBosonState> {
        if psi0.mode_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: 2 * self.dim,
                right: psi0.dim(),
            });
        }
        let u = jcm_propagator(&self.derived, t, self.dim)?;
        let moved = self.transform.dot(psi0.amplitudes());
        let evolved = u.matrix().dot(&moved);
        SpinBosonState::from_amplitudes(self.transform_dag.dot(&evolved))
    }

    pub fn trajectory(
        &self,
        psi0: &SpinBosonState,
        times: &[f64],
        guard: usize,
    ) -> Result<PropagationResult> {
        let mut result = PropagationResult {
            times: Vec::with_capacity(times.len()),
            states: Vec::with_capacity(times.len()),
            norms: Vec::with_capacity(times.len()),
            tails: Vec::with_capacity(times.len()),
        };
        for &t in times {
            let state = self.evolve(psi0, t)?;
            result.times.push(t);
            result.norms.push(state.norm());
            result.tails.push(state.tail_mass(guard));
            result.states.push(state);
        }
        Ok(result)
    }
}

/// Evolve under the full Hamiltonian with the exact spectral propagator.
/// The initial state must be well contained: guard-band mass at most
/// [`INITIAL_TAIL_TOL`].
pub fn evolve_exact(
    psi0: &SpinBosonState,
    t: f64,
    params: &IonParams,
    dim: usize,
) -> Result<SpinBosonState> {
    let oracle = ExactPipeline::new(params, dim)?;
    oracle.evolve(psi0, t)
}

/// Exact-oracle pipeline with its eigendecomposition built once.
pub struct ExactPipeline {
    propagator: SpectralPropagator,
    guard: usize,
}

impl ExactPipeline {
    pub fn new(params: &IonParams, dim: usize) -> Result<Self> {
        Self::with_guard(params, dim, crate::fock::DEFAULT_GUARD)
    }

    pub fn with_guard(params: &IonParams, dim: usize, guard: usize) -> Result<Self> {
        let h = full_hamiltonian(params, dim)?;
        Ok(Self {
            propagator: SpectralPropagator::new(&h)?,
            guard,
        })
    }

    pub fn propagator(&self) -> &SpectralPropagator {
        &self.propagator
    }

    fn check_initial(&self, psi0: &SpinBosonState) -> Result<()> {
        let tail = psi0.tail_mass(self.guard);
        if tail > INITIAL_TAIL_TOL {
            return Err(Error::TruncationExceeded {
                time: 0.0,
                tail,
                limit: INITIAL_TAIL_TOL,
            });
        }
        Ok(())
    }

    pub fn evolve(&self, psi0: &SpinBosonState, t: f64) -> Result<SpinBosonState> {
        self.check_initial(psi0)?;
        self.propagator.apply(t, psi0)
    }

    /// Trajectory with per-sample diagnostics; aborts with the offending
    /// time if the guard band fills beyond [`TAIL_LIMIT`].
    pub fn trajectory(&self, psi0: &SpinBosonState, times: &[f64]) -> Result<PropagationResult> {
        self.check_initial(psi0)?;
        let mut result = PropagationResult {
            times: Vec::with_capacity(times.len()),
            states: Vec::with_capacity(times.len()),
            norms: Vec::with_capacity(times.len()),
            tails: Vec::with_capacity(times.len()),
        };
        for &t in times {
            let state = self.propagator.apply(t, psi0)?;
            let tail = state.tail_mass(self.guard);
            if tail > TAIL_LIMIT {
                return Err(Error::TruncationExceeded {
                    time: t,
                    tail,
                    limit: TAIL_LIMIT,
                });
            }
            result.times.push(t);
            result.norms.push(state.norm());
            result.tails.push(tail);
            result.states.push(state);
        }
        Ok(result)
    }
}

/// |<s1|s2>|^2 with defensive renormalization, clamped to [0, 1].
pub fn fidelity(s1: &SpinBosonState, s2: &SpinBosonState) -> Result<f64> {
    let a = s1.normalized()?;
    let b = s2.normalized()?;
    let f = a.overlap(&b)?.norm_sqr();
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, frobenius_norm, DEFAULT_GUARD};
    use crate::hamiltonian::{guarded, jaynes_cummings_hamiltonian};
    use ndarray::Array2;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params_ref() -> IonParams {
        IonParams::resonant(1.0, 2.0, 0.3).unwrap()
    }

    fn random_hamiltonian(mode_dim: usize, seed: u64) -> SpinBosonOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 * mode_dim;
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        let h = (&m + &adjoint(&m)).mapv(|z| z * 0.5);
        SpinBosonOperator::hermitian(h).unwrap()
    }

    #[test]
    fn propagator_at_zero_time_is_identity() {
        let h = random_hamiltonian(8, 1);
        let u = exact_propagator(&h, 0.0).unwrap();
        let diff = u.matrix() - &Array2::<C64>::eye(16);
        assert!(frobenius_norm(&diff) < 1e-12);
    }

    #[test]
    fn propagator_is_unitary() {
        let h = random_hamiltonian(8, 2);
        let u = exact_propagator(&h, 1.7).unwrap();
        let prod = u.matrix().dot(&adjoint(u.matrix()));
        let diff = &prod - &Array2::<C64>::eye(16);
        assert!(frobenius_norm(&diff) < 1e-10);
    }

    #[test]
    fn propagator_group_property() {
        let h = random_hamiltonian(8, 3);
        let prop = SpectralPropagator::new(&h).unwrap();
        let u1 = prop.matrix(0.9);
        let u2 = prop.matrix(1.4);
        let u12 = prop.matrix(2.3);
        let diff = u1.matrix().dot(u2.matrix()) - u12.matrix();
        assert!(frobenius_norm(&diff) < 1e-9);
    }

    #[test]
    fn propagator_rejects_non_hermitian() {
        let lad = crate::fock::ladder(8).unwrap();
        let zero = Array2::<C64>::zeros((8, 8));
        let m = crate::hamiltonian::assemble_blocks(
            lad.lowering.matrix(),
            &zero,
            &zero,
            lad.lowering.matrix(),
        );
        let op = SpinBosonOperator::general(m).unwrap();
        assert!(matches!(
            SpectralPropagator::new(&op),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn cos_sinc_limits() {
        let (c0, s0) = cos_sinc(0.0, 2.5);
        assert_eq!((c0, s0), (1.0, 2.5));
        let (c1, s1) = cos_sinc(1.3, 0.0);
        assert_eq!((c1, s1), (1.0, 0.0));
        // half period of the n = 1 sector at the reference point
        let d = params_ref().derive();
        let a1 = d.alpha(1);
        let (cp, sp) = cos_sinc(a1, std::f64::consts::PI / a1);
        assert!((cp + 1.0).abs() < 1e-12);
        assert!(sp.abs() < 1e-12);
    }

    #[test]
    fn jcm_propagator_at_zero_time_is_identity() {
        let d = params_ref().derive();
        let u = jcm_propagator(&d, 0.0, 16).unwrap();
        let diff = u.matrix() - &Array2::<C64>::eye(32);
        assert!(frobenius_norm(&diff) < 1e-13);
    }

    #[test]
    fn jcm_propagator_matches_spectral_oracle() {
        let p = params_ref();
        let dim = 64;
        let d = p.derive();
        let h = jaynes_cummings_hamiltonian(&p, dim).unwrap();
        let spectral = SpectralPropagator::new(&h).unwrap();
        for &t in &[1.0, 5.0, 10.0] {
            let blocks = jcm_propagator(&d, t, dim).unwrap();
            let oracle = spectral.matrix(t);
            let diff = guarded(&(blocks.matrix() - oracle.matrix()), DEFAULT_GUARD);
            assert!(
                frobenius_norm(&diff) < 1e-9,
                "t = {t}: propagator mismatch {}",
                frobenius_norm(&diff)
            );
        }
    }

    #[test]
    fn jcm_propagator_ground_state_phase() {
        // |g,0> is decoupled and only picks up exp(i Omega t)
        let p = params_ref();
        let d = p.derive();
        let t = 3.7;
        let u = jcm_propagator(&d, t, 16).unwrap();
        let psi = SpinBosonState::basis(Spin::Ground, 0, 16).unwrap();
        let out = u.matrix().dot(psi.amplitudes());
        let expected = C64::new(0.0, p.omega_rabi * t).exp();
        assert!((out[16] - expected).norm() < 1e-12);
    }

    #[test]
    fn jcm_propagator_guarded_unitarity() {
        let d = params_ref().derive();
        let dim = 64;
        let u = jcm_propagator(&d, 4.0, dim).unwrap();
        let prod = adjoint(u.matrix()).dot(u.matrix());
        let diff = guarded(&(&prod - &Array2::<C64>::eye(2 * dim)), DEFAULT_GUARD);
        assert!(frobenius_norm(&diff) < 1e-10);
    }

    #[test]
    fn evolve_analytic_at_zero_time_is_identity() {
        let p = params_ref();
        let dim = 64;
        let beta = p.derive().beta_minus;
        let psi0 = SpinBosonState::product(Spin::Excited, &coherent_state(beta, dim).unwrap());
        let out = evolve_analytic(&psi0, 0.0, &p, dim).unwrap();
        let f = fidelity(&psi0, &out).unwrap();
        assert!(1.0 - f < 1e-9);
    }

    #[test]
    fn evolve_analytic_norm_drift_stays_small() {
        let p = IonParams::resonant(1.0, 2.0, 0.1).unwrap();
        let dim = 96;
        let psi0 = SpinBosonState::product(
            Spin::Excited,
            &coherent_state(p.derive().beta_minus, dim).unwrap(),
        );
        let pipeline = AnalyticPipeline::new(&p, dim).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
        let result = pipeline.trajectory(&psi0, &times, DEFAULT_GUARD).unwrap();
        for (t, n) in result.times.iter().zip(result.norms.iter()) {
            assert!(
                (n - 1.0).abs() <= 1e-8,
                "norm drift {} at t = {t}",
                (n - 1.0).abs()
            );
        }
    }

    #[test]
    fn evolve_exact_without_drive_keeps_populations() {
        let p = IonParams::new(1.0, 0.0, 0.3, 0.0).unwrap();
        let dim = 32;
        let psi0 = SpinBosonState::basis(Spin::Excited, 0, dim).unwrap();
        let out = evolve_exact(&psi0, 2.3, &p, dim).unwrap();
        assert!((out.spin_population(Spin::Excited) - 1.0).abs() < 1e-12);
        assert!((out.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolve_exact_rabi_oscillation_at_zero_eta() {
        // eta = 0 decouples the mode; populations oscillate at 2 Omega
        let p = IonParams::resonant(1.0, 2.0, 0.0).unwrap();
        let dim = 16;
        let psi0 = SpinBosonState::basis(Spin::Excited, 0, dim).unwrap();
        let oracle = ExactPipeline::new(&p, dim).unwrap();
        for &t in &[0.3, 0.8, 1.7] {
            let out = oracle.evolve(&psi0, t).unwrap();
            let expected = (p.omega_rabi * t).cos().powi(2);
            assert!(
                (out.spin_population(Spin::Excited) - expected).abs() < 1e-10,
                "t = {t}"
            );
        }
    }

    #[test]
    fn evolve_exact_conserves_norm_and_energy() {
        let p = params_ref();
        let dim = 64;
        let psi0 = SpinBosonState::product(
            Spin::Excited,
            &coherent_state(p.derive().beta_minus, dim).unwrap(),
        );
        let h = full_hamiltonian(&p, dim).unwrap();
        let oracle = ExactPipeline::new(&p, dim).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| k as f64).collect();
        let result = oracle.trajectory(&psi0, &times).unwrap();
        let energy = |s: &SpinBosonState| -> f64 {
            let hv = h.matrix().dot(s.amplitudes());
            s.amplitudes()
                .iter()
                .zip(hv.iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum()
        };
        let e0 = energy(&result.states[0]);
        for (state, norm) in result.states.iter().zip(result.norms.iter()) {
            assert!((norm - 1.0).abs() <= 1e-10);
            assert!((energy(state) - e0).abs() <= 1e-8);
        }
    }

    #[test]
    fn evolve_exact_rejects_marginal_truncation() {
        let p = params_ref();
        let dim = 16;
        // seed the state right at the guard edge
        let psi0 = SpinBosonState::basis(Spin::Excited, dim - 1, dim).unwrap();
        assert!(matches!(
            evolve_exact(&psi0, 1.0, &p, dim),
            Err(Error::TruncationExceeded { .. })
        ));
    }

    #[test]
    fn fidelity_basics() {
        let dim = 16;
        let e0 = SpinBosonState::basis(Spin::Excited, 0, dim).unwrap();
        let g0 = SpinBosonState::basis(Spin::Ground, 0, dim).unwrap();
        assert!((fidelity(&e0, &e0).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity(&e0, &g0).unwrap() < 1e-14);
        let mut amps = Array1::<C64>::zeros(2 * dim);
        amps[0] = c(1.0 / 2.0_f64.sqrt(), 0.0);
        amps[dim] = c(1.0 / 2.0_f64.sqrt(), 0.0);
        let plus = SpinBosonState::from_amplitudes(amps).unwrap();
        assert!((fidelity(&e0, &plus).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn fidelity_rejects_dimension_mismatch() {
        let a = SpinBosonState::basis(Spin::Excited, 0, 8).unwrap();
        let b = SpinBosonState::basis(Spin::Excited, 0, 16).unwrap();
        assert!(matches!(
            fidelity(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(12))]

            /// The analytic and blockwise propagators stay consistent across
            /// the tested regime eta <= 0.3, Omega/nu <= 4, nu t <= 20.
            #[test]
            fn jcm_blocks_match_spectral_over_regime(
                eta in 0.05_f64..0.3,
                omega in 0.5_f64..4.0,
                t in 0.1_f64..20.0,
            ) {
                let p = IonParams::resonant(1.0, omega, eta).unwrap();
                let dim = 48;
                let h = jaynes_cummings_hamiltonian(&p, dim).unwrap();
                let spectral = SpectralPropagator::new(&h).unwrap().matrix(t);
                let blocks = jcm_propagator(&p.derive(), t, dim).unwrap();
                let diff = guarded(
                    &(blocks.matrix() - spectral.matrix()),
                    DEFAULT_GUARD,
                );
                prop_assert!(frobenius_norm(&diff) < 1e-9);
            }
        }
    }
}
