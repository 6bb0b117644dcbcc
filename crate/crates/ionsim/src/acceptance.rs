//! The acceptance suite: one self-contained check per release criterion,
//! runnable from the test harness and from the command line. Every
//! tolerance is pinned here; the scaling bounds were calibrated once
//! against the exact oracle and frozen as regression limits.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::dynamics::{fidelity, AnalyticPipeline, ExactPipeline, SpectralPropagator};
use crate::fock::{adjoint, frobenius_norm, ladder, DEFAULT_GUARD};
use crate::hamiltonian::{
    assemble_blocks, full_hamiltonian, guarded, jaynes_cummings_hamiltonian,
    linearized_hamiltonian, rotated_hamiltonian, rotated_hamiltonian_first_order, Spin,
};
use crate::params::IonParams;
use crate::protocols::{
    cat_state, conditional_measure, displace_to_qubit, evolved_state_closed_form, initial_state,
    qubit_closed_form, sample_measurement,
};
use crate::scan::{regime_scan, ScanConfig, ScanRecord};
use crate::transforms::{linearizing_transform, small_rotation};

/// Infidelity regression bounds for the scaling criterion, frozen at 1.25x
/// the values measured against the exact oracle at N = 128
/// (3.1254e-3, 1.3775e-3, 3.4954e-4, 8.7893e-5 for eta = 0.3, 0.2, 0.1, 0.05
/// at Omega/nu = 2, nu t = 10).
pub const SCALING_ETAS: [f64; 4] = [0.3, 0.2, 0.1, 0.05];
pub const SCALING_BOUNDS: [f64; 4] = [3.91e-3, 1.73e-3, 4.37e-4, 1.10e-4];

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Results of the whole suite.
#[derive(Clone, Debug)]
pub struct AcceptanceReport {
    pub outcomes: Vec<CriterionOutcome>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

/// Run every criterion. The seed feeds the determinism check only.
pub fn run_all(seed: u64) -> AcceptanceReport {
    let outcomes = vec![
        criterion_1_epsilon(),
        criterion_2_counter_rotating(),
        criterion_3_conjugations(),
        criterion_4_propagator(),
        criterion_5_closed_form(),
        criterion_6_scaling(),
        criterion_7_cat(),
        criterion_8_qubit(),
        criterion_9_determinism(seed),
    ];
    AcceptanceReport { outcomes }
}

fn outcome(id: usize, name: &'static str, passed: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
    }
}

fn fail(id: usize, name: &'static str, err: impl std::fmt::Display) -> CriterionOutcome {
    outcome(id, name, false, format!("errored: {err}"))
}

fn criterion_1_epsilon() -> CriterionOutcome {
    const NAME: &str = "epsilon-reproduction";
    let d = match IonParams::resonant(1.0, 2.0, 0.3) {
        Ok(p) => p.derive(),
        Err(e) => return fail(1, NAME, e),
    };
    let err = (d.epsilon + 0.03).abs();
    outcome(
        1,
        NAME,
        err < 1e-15,
        format!("eta 0.3, Omega/nu 2 gives epsilon = {} (|err| = {:.2e})", d.epsilon, err),
    )
}

/// Hilbert-Schmidt coefficient of `basis` inside `op`, both restricted to
/// the guarded subspace.
fn hs_coefficient(op: &Array2<C64>, basis: &Array2<C64>, guard: usize) -> C64 {
    let op_g = guarded(op, guard);
    let basis_g = guarded(basis, guard);
    let inner: C64 = basis_g
        .iter()
        .zip(op_g.iter())
        .map(|(b, o)| b.conj() * o)
        .sum();
    let weight: f64 = basis_g.iter().map(|b| b.norm_sqr()).sum();
    inner / weight
}

fn criterion_2_counter_rotating() -> CriterionOutcome {
    const NAME: &str = "counter-rotating-cancellation";
    let dim = 64;
    let run = || -> crate::Result<(f64, f64, f64)> {
        let p = IonParams::resonant(1.0, 2.0, 0.3)?;
        let d = p.derive();
        let h_lin = rotated_hamiltonian_first_order(&p, dim)?;
        let lad = ladder(dim)?;
        let zero = Array2::<C64>::zeros((dim, dim));
        // basis operators a sigma-, a sigma+, a+ sigma+ as spin-block matrices
        let a_sm = assemble_blocks(&zero, &zero, lad.lowering.matrix(), &zero);
        let a_sp = assemble_blocks(&zero, lad.lowering.matrix(), &zero, &zero);
        let ad_sp = assemble_blocks(&zero, lad.raising.matrix(), &zero, &zero);
        let c_rot1 = hs_coefficient(h_lin.matrix(), &a_sm, DEFAULT_GUARD);
        let c_rot2 = hs_coefficient(h_lin.matrix(), &ad_sp, DEFAULT_GUARD);
        let c_keep = hs_coefficient(h_lin.matrix(), &a_sp, DEFAULT_GUARD);
        let target = C64::new(0.0, d.lambda_eff);
        Ok((c_rot1.norm(), c_rot2.norm(), (c_keep - target).norm()))
    };
    match run() {
        Ok((r1, r2, keep_err)) => outcome(
            2,
            NAME,
            r1 <= 1e-10 && r2 <= 1e-10 && keep_err <= 1e-10,
            format!(
                "|a sigma-| = {r1:.2e}, |a+ sigma+| = {r2:.2e}, |a sigma+ - i lambda| = {keep_err:.2e}"
            ),
        ),
        Err(e) => fail(2, NAME, e),
    }
}

fn criterion_3_conjugations() -> CriterionOutcome {
    const NAME: &str = "conjugation-identities";
    let dim = 96;
    let run = || -> crate::Result<(f64, f64, C64)> {
        let p = IonParams::resonant(1.0, 2.0, 0.2)?;
        let t1 = linearizing_transform(&p, dim)?;
        let h = full_hamiltonian(&p, dim)?;
        let h1 = linearized_hamiltonian(&p, dim)?;
        let conj1 = t1.matrix().dot(h.matrix()).dot(&adjoint(t1.matrix()));
        let res1 = frobenius_norm(&guarded(&(&conj1 - h1.matrix()), DEFAULT_GUARD));

        // the rotation enters from the right in the convention that matches
        // the derived sign of epsilon
        let t2 = small_rotation(&p, dim)?;
        let h2 = rotated_hamiltonian(&p, dim)?;
        let conj2 = adjoint(t2.matrix()).dot(h1.matrix()).dot(t2.matrix());
        let diff = &conj2 - h2.matrix();
        let keep = (dim - DEFAULT_GUARD) as f64;
        let trace: C64 = (0..2 * dim)
            .filter(|i| (i % dim) < dim - DEFAULT_GUARD)
            .map(|i| diff[[i, i]])
            .sum();
        let fitted = trace / (2.0 * keep);
        let eye = Array2::<C64>::eye(2 * dim);
        let res2 = frobenius_norm(&guarded(
            &(&diff - &eye.mapv(|z| z * fitted)),
            DEFAULT_GUARD,
        ));
        Ok((res1, res2, fitted))
    };
    match run() {
        Ok((res1, res2, fitted)) => outcome(
            3,
            NAME,
            res1 <= 1e-8 && res2 <= 1e-8,
            format!(
                "linearization residual {res1:.2e}, rotation residual {res2:.2e} (fitted constant {:.6e})",
                fitted.re
            ),
        ),
        Err(e) => fail(3, NAME, e),
    }
}

fn criterion_4_propagator() -> CriterionOutcome {
    const NAME: &str = "propagator-equivalence";
    let dim = 64;
    let run = || -> crate::Result<f64> {
        let p = IonParams::resonant(1.0, 2.0, 0.3)?;
        let d = p.derive();
        let h = jaynes_cummings_hamiltonian(&p, dim)?;
        let spectral = SpectralPropagator::new(&h)?;
        let mut worst = 0.0_f64;
        for &t in &[1.0, 5.0, 10.0] {
            let blocks = crate::dynamics::jcm_propagator(&d, t, dim)?;
            let oracle = spectral.matrix(t);
            let dist = frobenius_norm(&guarded(
                &(blocks.matrix() - oracle.matrix()),
                DEFAULT_GUARD,
            ));
            worst = worst.max(dist);
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => outcome(
            4,
            NAME,
            worst <= 1e-9,
            format!("worst guarded block-vs-spectral distance {worst:.2e} over nu t in {{1, 5, 10}}"),
        ),
        Err(e) => fail(4, NAME, e),
    }
}

fn criterion_5_closed_form() -> CriterionOutcome {
    const NAME: &str = "closed-form-consistency";
    let dim = 64;
    let run = || -> crate::Result<f64> {
        let p = IonParams::resonant(1.0, 2.0, 0.3)?;
        let psi0 = initial_state(&p, dim)?;
        let pipeline = AnalyticPipeline::new(&p, dim)?;
        let mut worst = 0.0_f64;
        for &t in &[1.0, 5.0, 10.0] {
            let closed = evolved_state_closed_form(&p, t, dim)?;
            let evolved = pipeline.evolve(&psi0, t)?;
            worst = worst.max(1.0 - fidelity(&closed, &evolved)?);
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => outcome(
            5,
            NAME,
            worst <= 1e-8,
            format!("worst fidelity deficit {worst:.2e} over nu t in {{1, 5, 10}}"),
        ),
        Err(e) => fail(5, NAME, e),
    }
}

fn criterion_6_scaling() -> CriterionOutcome {
    const NAME: &str = "approximation-scaling";
    let run = || -> crate::Result<(Vec<f64>, f64, bool, bool)> {
        let mut infidelities = Vec::new();
        let mut converged = true;
        for &eta in SCALING_ETAS.iter() {
            let p = IonParams::resonant(1.0, 2.0, eta)?;
            let mut both = [0.0_f64; 2];
            for (k, &dim) in [96_usize, 128].iter().enumerate() {
                let psi0 = initial_state(&p, dim)?;
                let exact = ExactPipeline::new(&p, dim)?.evolve(&psi0, 10.0)?;
                let approx = AnalyticPipeline::new(&p, dim)?.evolve(&psi0, 10.0)?;
                both[k] = 1.0 - fidelity(&approx, &exact)?;
            }
            converged &= (both[0] - both[1]).abs() < crate::scan::CONVERGENCE_TOL;
            infidelities.push(both[1]);
        }
        let monotone = infidelities.windows(2).all(|w| w[0] > w[1]);
        let pts: Vec<(f64, f64)> = SCALING_ETAS
            .iter()
            .zip(infidelities.iter())
            .map(|(&e, &i)| (e.ln(), i.ln()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        Ok((infidelities, slope, monotone, converged))
    };
    match run() {
        Ok((inf, slope, monotone, converged)) => {
            let within_bounds = inf
                .iter()
                .zip(SCALING_BOUNDS.iter())
                .all(|(&i, &b)| i <= b);
            let slope_ok = (1.5..=2.5).contains(&slope);
            outcome(
                6,
                NAME,
                monotone && slope_ok && within_bounds && converged,
                format!(
                    "1-F = [{:.3e}, {:.3e}, {:.3e}, {:.3e}] over eta = [0.3, 0.2, 0.1, 0.05], slope {slope:.3}, monotone {monotone}, converged {converged}",
                    inf[0], inf[1], inf[2], inf[3]
                ),
            )
        }
        Err(e) => fail(6, NAME, e),
    }
}

fn criterion_7_cat() -> CriterionOutcome {
    const NAME: &str = "cat-state-checks";
    let dim = 64;
    let run = || -> crate::Result<(f64, f64, f64)> {
        let p = IonParams::resonant(1.0, 2.0, 0.3)?;
        let (cat, t_cat) = cat_state(&p, dim)?;
        let norm_err = (cat.norm() - 1.0).abs();
        let closed = evolved_state_closed_form(&p, t_cat, dim)?;
        let deficit = 1.0 - fidelity(&cat, &closed)?;
        let qubit = qubit_closed_form(&p, t_cat)?;
        let c1 = qubit.c1.norm();
        Ok((norm_err, deficit, c1))
    };
    match run() {
        Ok((norm_err, deficit, c1)) => outcome(
            7,
            NAME,
            norm_err <= 1e-12 && deficit <= 1e-9 && c1 <= 1e-10,
            format!(
                "norm error {norm_err:.2e}, fidelity deficit vs evolved state {deficit:.2e}, |c1|(t_cat) = {c1:.2e}"
            ),
        ),
        Err(e) => fail(7, NAME, e),
    }
}

fn criterion_8_qubit() -> CriterionOutcome {
    const NAME: &str = "qubit-protocol";
    let run = || -> crate::Result<(f64, f64, Vec<f64>, bool)> {
        let p = IonParams::resonant(1.0, 2.0, 0.3)?;
        let dim = 64;

        // probability completeness over a time sweep
        let mut completeness = 0.0_f64;
        for &t in &[0.5, 2.0, 5.0, 12.0] {
            let s = evolved_state_closed_form(&p, t, dim)?;
            let p_e = s.spin_population(Spin::Excited) / s.norm_sqr();
            let p_g = s.spin_population(Spin::Ground) / s.norm_sqr();
            completeness = completeness.max((p_e + p_g - 1.0).abs());
        }

        // the analytic pipeline leaves nothing outside the qubit span
        let psi0 = initial_state(&p, dim)?;
        let evolved = AnalyticPipeline::new(&p, dim)?.evolve(&psi0, 5.0)?;
        let rec = conditional_measure(&evolved, Spin::Excited)?;
        let (_, qubit) = displace_to_qubit(&rec, &p)?;
        let analytic_leak = qubit.leakage.abs();

        // exact-pipeline leakage shrinks with the coupling
        let mut leaks = Vec::new();
        for &eta in &[0.3, 0.15, 0.075] {
            let pe = IonParams::resonant(1.0, 2.0, eta)?;
            let dim_e = 96;
            let s0 = initial_state(&pe, dim_e)?;
            let exact = ExactPipeline::new(&pe, dim_e)?.evolve(&s0, 5.0)?;
            let rec = conditional_measure(&exact, Spin::Excited)?;
            let (_, q) = displace_to_qubit(&rec, &pe)?;
            leaks.push(q.leakage);
        }
        let monotone = leaks.windows(2).all(|w| w[0] > w[1]);
        Ok((completeness, analytic_leak, leaks, monotone))
    };
    match run() {
        Ok((completeness, analytic_leak, leaks, monotone)) => outcome(
            8,
            NAME,
            completeness <= 1e-10 && analytic_leak <= 1e-10 && monotone,
            format!(
                "completeness error {completeness:.2e}, analytic leakage {analytic_leak:.2e}, exact leakage [{:.3e}, {:.3e}, {:.3e}] monotone {monotone}",
                leaks[0], leaks[1], leaks[2]
            ),
        ),
        Err(e) => fail(8, NAME, e),
    }
}

fn criterion_9_determinism(seed: u64) -> CriterionOutcome {
    const NAME: &str = "determinism";
    let run = || -> crate::Result<bool> {
        let config = ScanConfig {
            etas: vec![0.1, 0.3],
            omega_ratios: vec![2.0],
            times: vec![1.0, 5.0],
            dim: 32,
            guard: 8,
            nu: 1.0,
        };
        let render = |records: &[ScanRecord]| -> String {
            let mut s = String::from(ScanRecord::CSV_HEADER);
            for r in records {
                s.push('\n');
                s.push_str(&r.csv_row());
            }
            s
        };
        let first = render(&regime_scan(&config)?);
        let second = render(&regime_scan(&config)?);

        let p = IonParams::resonant(1.0, 2.0, 0.3)?;
        let state = evolved_state_closed_form(&p, 2.0, 64)?;
        let m1 = sample_measurement(&state, seed)?;
        let m2 = sample_measurement(&state, seed)?;
        Ok(first == second && m1.outcome == m2.outcome && m1.probability == m2.probability)
    };
    match run() {
        Ok(identical) => outcome(
            9,
            NAME,
            identical,
            format!("repeated scan and seeded measurement (seed {seed}) byte-identical: {identical}"),
        ),
        Err(e) => fail(9, NAME, e),
    }
}
