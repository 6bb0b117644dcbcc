//! Approximation-quality scaling in the strong-drive regime (Omega >> nu),
//! complementing the moderate-drive regime covered by the acceptance suite.
//! Bounds frozen at 1.25x the oracle values measured at N = 128.

use ionsim::dynamics::{fidelity, AnalyticPipeline, ExactPipeline};
use ionsim::protocols::initial_state;
use ionsim::IonParams;

const ETAS: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];
const BOUNDS: [f64; 4] = [5.10e-4, 7.09e-5, 1.42e-5, 3.33e-6];

#[test]
fn strong_drive_regime_scaling() {
    let dim = 96;
    let t = 10.0;
    let mut infidelities = Vec::new();
    for (&eta, &bound) in ETAS.iter().zip(BOUNDS.iter()) {
        let p = IonParams::resonant(1.0, 20.0, eta).unwrap();
        let psi0 = initial_state(&p, dim).unwrap();
        let exact = ExactPipeline::new(&p, dim)
            .unwrap()
            .evolve(&psi0, t)
            .unwrap();
        let approx = AnalyticPipeline::new(&p, dim)
            .unwrap()
            .evolve(&psi0, t)
            .unwrap();
        let infidelity = 1.0 - fidelity(&approx, &exact).unwrap();
        assert!(
            infidelity <= bound,
            "eta = {eta}: infidelity {infidelity:.3e} above frozen bound {bound:.3e}"
        );
        infidelities.push(infidelity);
    }
    assert!(
        infidelities.windows(2).all(|w| w[0] > w[1]),
        "infidelity not monotone in eta: {infidelities:?}"
    );
    let pts: Vec<(f64, f64)> = ETAS
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
    assert!(
        (1.5..=2.5).contains(&slope),
        "log-log slope {slope:.3} outside [1.5, 2.5]"
    );
}
