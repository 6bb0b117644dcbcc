//! Flat JSON run configuration: one object, scalar or numeric-array values,
//! unknown keys rejected, every violation reported with the offending key.
//! Units follow the dimensionless convention: frequencies in units of nu,
//! times in units of 1/nu.

use ionsim::IonParams;
use serde::Deserialize;

/// Schema version covered by docs/file-formats.md.
pub const CONFIG_SCHEMA_VERSION: &str = "v1";

pub const DEFAULT_NU: f64 = 1.0;
pub const DEFAULT_DIM: usize = 64;
pub const DEFAULT_GUARD: usize = 8;
pub const DEFAULT_WIGNER_EXTENT: f64 = 4.0;
pub const DEFAULT_WIGNER_POINTS: usize = 81;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Evolve,
    Qubit,
    Cat,
    Scan,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Evolve => "evolve",
            Mode::Qubit => "qubit",
            Mode::Cat => "cat",
            Mode::Scan => "scan",
            Mode::Validate => "validate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    Exact,
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeChoice {
    Excited,
    Ground,
    Sampled,
}

/// Validated run configuration with defaults applied.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: IonParams,
    /// nu t grid for evolve and qubit tables.
    pub times: Vec<f64>,
    /// Scan grids.
    pub etas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub dim: usize,
    pub guard: usize,
    pub seed: Option<u64>,
    pub pipeline: Pipeline,
    pub outcome: OutcomeChoice,
    pub wigner_extent: f64,
    pub wigner_points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<String>,
    eta: Option<f64>,
    omega: Option<f64>,
    nu: Option<f64>,
    delta: Option<f64>,
    times: Option<Vec<f64>>,
    etas: Option<Vec<f64>>,
    omegas: Option<Vec<f64>>,
    dim: Option<usize>,
    guard: Option<usize>,
    seed: Option<u64>,
    pipeline: Option<String>,
    outcome: Option<String>,
    wigner_extent: Option<f64>,
    wigner_points: Option<usize>,
}

fn err(key: &str, what: &str) -> ConfigError {
    ConfigError(format!("config key '{key}': {what}"))
}

fn check_grid(key: &str, grid: &[f64]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return Err(err(key, "grid must be nonempty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(err(key, "grid entries must be finite"));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(err(key, "grid must be strictly increasing"));
    }
    Ok(())
}

fn default_times() -> Vec<f64> {
    // nu t from 0 to 10, fine enough to resolve the exchange dynamics
    (0..=100).map(|k| k as f64 * 0.1).collect()
}

/// Parse and validate a flat JSON config for the given CLI subcommand.
pub fn parse_config(text: &str, cli_mode: Mode) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
    validate(raw, cli_mode)
}

fn validate(raw: RawConfig, cli_mode: Mode) -> Result<RunConfig, ConfigError> {
    // field-level invariants first, in schema order
    if let Some(eta) = raw.eta {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(err("eta", "must be a finite non-negative number"));
        }
    }
    if let Some(omega) = raw.omega {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(err("omega", "must be a finite non-negative number"));
        }
    }
    let nu = raw.nu.unwrap_or(DEFAULT_NU);
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(err("nu", "must be a finite positive number"));
    }
    let delta = raw.delta.unwrap_or(0.0);
    if !delta.is_finite() {
        return Err(err("delta", "must be finite"));
    }
    if let Some(ref times) = raw.times {
        check_grid("times", times)?;
    }
    if let Some(ref etas) = raw.etas {
        check_grid("etas", etas)?;
        if etas.iter().any(|&e| e < 0.0) {
            return Err(err("etas", "entries must be non-negative"));
        }
    }
    if let Some(ref omegas) = raw.omegas {
        check_grid("omegas", omegas)?;
        if omegas.iter().any(|&o| o < 0.0) {
            return Err(err("omegas", "entries must be non-negative"));
        }
    }
    let dim = raw.dim.unwrap_or(DEFAULT_DIM);
    if dim < 16 {
        return Err(err("dim", "must be at least 16"));
    }
    let guard = raw.guard.unwrap_or(DEFAULT_GUARD);
    if guard < 4 || guard > dim / 4 {
        return Err(err("guard", "must lie in [4, dim/4]"));
    }
    let pipeline = match raw.pipeline.as_deref() {
        None => None,
        Some("exact") => Some(Pipeline::Exact),
        Some("analytic") => Some(Pipeline::Analytic),
        Some(other) => {
            return Err(err(
                "pipeline",
                &format!("unknown value '{other}' (expected 'exact' or 'analytic')"),
            ))
        }
    };
    let outcome = match raw.outcome.as_deref() {
        None => OutcomeChoice::Excited,
        Some("e") => OutcomeChoice::Excited,
        Some("g") => OutcomeChoice::Ground,
        Some("sampled") => OutcomeChoice::Sampled,
        Some(other) => {
            return Err(err(
                "outcome",
                &format!("unknown value '{other}' (expected 'e', 'g', or 'sampled')"),
            ))
        }
    };
    let wigner_extent = raw.wigner_extent.unwrap_or(DEFAULT_WIGNER_EXTENT);
    if !(wigner_extent > 0.0) || !wigner_extent.is_finite() {
        return Err(err("wigner_extent", "must be a finite positive number"));
    }
    let wigner_points = raw.wigner_points.unwrap_or(DEFAULT_WIGNER_POINTS);
    if wigner_points < 2 {
        return Err(err("wigner_points", "must be at least 2"));
    }

    // the mode itself
    let mode = match raw.mode.as_deref() {
        None => return Err(err("mode", "required (evolve | qubit | cat | scan | validate)")),
        Some("evolve") => Mode::Evolve,
        Some("qubit") => Mode::Qubit,
        Some("cat") => Mode::Cat,
        Some("scan") => Mode::Scan,
        Some("validate") => Mode::Validate,
        Some(other) => return Err(err("mode", &format!("unknown mode '{other}'"))),
    };
    if mode != cli_mode {
        return Err(err(
            "mode",
            &format!(
                "config says '{}' but the subcommand is '{}'",
                mode.name(),
                cli_mode.name()
            ),
        ));
    }

    // mode-specific requirements
    let needs_point_params = matches!(mode, Mode::Evolve | Mode::Qubit | Mode::Cat);
    let (eta, omega) = if needs_point_params {
        let eta = raw.eta.ok_or_else(|| err("eta", "required for this mode"))?;
        let omega = raw
            .omega
            .ok_or_else(|| err("omega", "required for this mode"))?;
        (eta, omega)
    } else {
        (raw.eta.unwrap_or(0.0), raw.omega.unwrap_or(0.0))
    };

    let pipeline = pipeline.unwrap_or(match mode {
        Mode::Evolve => Pipeline::Exact,
        _ => Pipeline::Analytic,
    });

    if delta != 0.0 && !(mode == Mode::Evolve && pipeline == Pipeline::Exact) {
        return Err(err(
            "delta",
            "nonzero detuning is supported only by the exact evolve pipeline",
        ));
    }
    if outcome == OutcomeChoice::Sampled && raw.seed.is_none() {
        return Err(err("seed", "required when outcome = 'sampled'"));
    }

    let (etas, omegas) = if mode == Mode::Scan {
        let etas = raw.etas.ok_or_else(|| err("etas", "required for scan"))?;
        let omegas = raw
            .omegas
            .ok_or_else(|| err("omegas", "required for scan"))?;
        (etas, omegas)
    } else {
        (Vec::new(), Vec::new())
    };

    // frequencies are given in units of nu
    let params = IonParams::new(nu, omega * nu, eta, delta * nu)
        .map_err(|e| ConfigError(format!("config: {e}")))?;

    Ok(RunConfig {
        mode,
        params,
        times: raw.times.unwrap_or_else(default_times),
        etas,
        omegas,
        dim,
        guard,
        seed: raw.seed,
        pipeline,
        outcome,
        wigner_extent,
        wigner_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_qubit_config_is_valid() {
        let cfg = parse_config(r#"{"mode":"qubit","eta":0.3,"omega":2.0}"#, Mode::Qubit).unwrap();
        assert_eq!(cfg.dim, 64);
        assert_eq!(cfg.guard, 8);
        let d = cfg.params.derive();
        assert!((d.epsilon + 0.03).abs() < 1e-15);
        assert!(!cfg.times.is_empty());
    }

    #[test]
    fn negative_eta_is_rejected_before_missing_mode() {
        let e = parse_config(r#"{"eta":-0.1}"#, Mode::Qubit).unwrap_err();
        assert!(e.0.contains("eta"), "message: {}", e.0);
    }

    #[test]
    fn empty_config_demands_a_mode() {
        let e = parse_config("{}", Mode::Qubit).unwrap_err();
        assert!(e.0.contains("mode"), "message: {}", e.0);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = parse_config(r#"{"mode":"qubit","frobnicate":1}"#, Mode::Qubit).unwrap_err();
        assert!(e.0.contains("frobnicate"), "message: {}", e.0);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let e = parse_config(r#"{"mode":"cat","eta":0.3,"omega":2.0}"#, Mode::Qubit).unwrap_err();
        assert!(e.0.contains("subcommand"), "message: {}", e.0);
    }

    #[test]
    fn detuning_needs_the_exact_pipeline() {
        let e = parse_config(
            r#"{"mode":"qubit","eta":0.3,"omega":2.0,"delta":0.1}"#,
            Mode::Qubit,
        )
        .unwrap_err();
        assert!(e.0.contains("delta"), "message: {}", e.0);
        let ok = parse_config(
            r#"{"mode":"evolve","eta":0.3,"omega":2.0,"delta":0.1,"pipeline":"exact"}"#,
            Mode::Evolve,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn decreasing_grid_is_rejected() {
        let e = parse_config(
            r#"{"mode":"evolve","eta":0.3,"omega":2.0,"times":[2.0,1.0]}"#,
            Mode::Evolve,
        )
        .unwrap_err();
        assert!(e.0.contains("times"), "message: {}", e.0);
    }

    #[test]
    fn sampled_outcome_requires_a_seed() {
        let e = parse_config(
            r#"{"mode":"qubit","eta":0.3,"omega":2.0,"outcome":"sampled"}"#,
            Mode::Qubit,
        )
        .unwrap_err();
        assert!(e.0.contains("seed"), "message: {}", e.0);
    }
}
