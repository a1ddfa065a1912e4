//! One function per subcommand; each writes its artifacts through a [`Run`].

use rayon::prelude::*;
use serde::Serialize;
use spinboson::ansatz::{ansatz_critical_omega0, ansatz_ground_state, ansatz_polarizations};
use spinboson::circuit::{critical_cavity_frequency, renormalize_circuit};
use spinboson::ed::{
    build_hamiltonian, cached_ground_state, order_parameters, spectroscopy_experiment, ExperimentOptions,
    GroundStateCache, LanczosOptions,
};
use spinboson::excitations::{band_scan, critical_path, fit_exponents, Theory};
use spinboson::fmt17;
use spinboson::ising::{dispersive_critical_omega0, dispersive_polarizations};
use spinboson::meanfield::{mf_critical_omega0, mf_polarizations, solve_mf};
use spinboson::model::{derive_scales, momentum_grid, Boundary, ModelParams};
use spinboson::spectroscopy::analytic_response;

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::Run;

/// Theories that can fill a phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseTheory {
    MeanField,
    Dispersive,
    Ansatz,
    Ed,
}

impl PhaseTheory {
    fn name(self) -> &'static str {
        match self {
            PhaseTheory::MeanField => "mean_field",
            PhaseTheory::Dispersive => "dispersive",
            PhaseTheory::Ansatz => "ansatz",
            PhaseTheory::Ed => "ed",
        }
    }
}

/// Commas would break the CSV row; messages are free text otherwise.
fn csv_safe(message: &str) -> String {
    message.replace([',', '\n'], ";")
}

struct PointOutcome {
    sx: f64,
    a: f64,
    cache_hit: bool,
}

fn phase_point(
    theory: PhaseTheory,
    params: &ModelParams,
    config: &Config,
    cache: &GroundStateCache,
) -> spinboson::Result<PointOutcome> {
    let scales = derive_scales(params)?;
    let analytic = |(sx, a): (f64, f64)| PointOutcome {
        sx: sx.abs(),
        a: a.abs(),
        cache_hit: false,
    };
    match theory {
        PhaseTheory::MeanField => Ok(analytic(mf_polarizations(
            &solve_mf(&scales, params.n_sites),
            &scales,
            0,
        ))),
        PhaseTheory::Dispersive => Ok(analytic(dispersive_polarizations(&scales, 0))),
        PhaseTheory::Ansatz => Ok(analytic(ansatz_polarizations(&ansatz_ground_state(params)?, 0))),
        PhaseTheory::Ed => {
            let ring = ModelParams {
                n_sites: config.phase_diagram.ed_n_sites,
                boundary: Boundary::Periodic,
                ..*params
            };
            let opts = LanczosOptions::default();
            let (gs, cache_hit) = cached_ground_state(&ring, &config.truncation, &opts, Some(cache))?;
            let h = build_hamiltonian(&ring, &config.truncation, None)?;
            let op = order_parameters(&h, &gs.complex_vector())?;
            Ok(PointOutcome {
                sx: op.spin_order,
                a: op.cavity_order,
                cache_hit,
            })
        }
    }
}

pub fn phase_diagram(
    run: &mut Run,
    config: &Config,
    theories: &[PhaseTheory],
    cache: &GroundStateCache,
) -> Result<(), CliError> {
    let couplings = config.phase_diagram.g.samples();
    let omega0s = &config.phase_diagram.omega0.samples();
    let points: Vec<(PhaseTheory, f64, f64)> = theories
        .iter()
        .flat_map(|&t| {
            couplings
                .iter()
                .flat_map(move |&g| omega0s.iter().map(move |&w| (t, g, w)))
        })
        .collect();
    let outcomes: Vec<spinboson::Result<PointOutcome>> = points
        .par_iter()
        .map(|&(theory, g, omega0)| {
            let params = ModelParams {
                g,
                omega0,
                ..config.model
            };
            phase_point(theory, &params, config, cache)
        })
        .collect();

    let mut csv = String::from("theory,g_over_omega,omega0_over_omega,sx,a,status\n");
    let (mut failures, mut hits) = (0usize, 0usize);
    for (&(theory, g, omega0), outcome) in points.iter().zip(&outcomes) {
        let (sx, a, status) = match outcome {
            Ok(p) => {
                hits += usize::from(p.cache_hit);
                (fmt17(p.sx), fmt17(p.a), "ok".to_owned())
            }
            Err(e) => {
                failures += 1;
                (String::new(), String::new(), csv_safe(&e.to_string()))
            }
        };
        csv.push_str(&format!(
            "{},{},{},{sx},{a},{status}\n",
            theory.name(),
            fmt17(g),
            fmt17(omega0)
        ));
    }
    run.write("phase_diagram.csv", &csv)?;

    let lines = [
        ("mean_field", mf_critical_omega0 as fn(f64) -> f64),
        ("dispersive", dispersive_critical_omega0),
        ("ansatz", ansatz_critical_omega0),
    ];
    for (name, line) in lines {
        let mut trace = String::from("g_over_omega,omega0_over_omega\n");
        for &g in &couplings {
            trace.push_str(&format!("{},{}\n", fmt17(g), fmt17(line(g))));
        }
        run.write(&format!("critical_line_{name}.csv"), &trace)?;
    }
    if failures > 0 {
        run.note(format!("{failures} grid points failed; see the status column"));
    }
    if hits > 0 {
        run.note(format!("{hits} ground states served from the cache"));
    }
    Ok(())
}

pub fn bands(run: &mut Run, config: &Config, theories: &[Theory]) -> Result<(), CliError> {
    let grid = momentum_grid(config.model.n_sites, config.model.boundary)?;
    for &theory in theories {
        let scan = band_scan(&config.model, theory, config.convention, &grid)?;
        run.write(&format!("bands_{}.csv", theory.name()), &scan.to_csv())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    Ed,
}

pub fn spectroscopy(
    run: &mut Run,
    config: &Config,
    engine: Engine,
    n_sites: usize,
    cache: &GroundStateCache,
) -> Result<(), CliError> {
    let params = ModelParams {
        n_sites,
        boundary: Boundary::Open,
        ..config.model
    };
    let settings = &config.spectroscopy;
    let nu = settings.nu.samples();
    let result = match engine {
        Engine::Analytic => {
            let grid = momentum_grid(n_sites, Boundary::Open)?;
            analytic_response(&params, &config.probe, &grid, &nu, settings.eta, config.convention)?
        }
        Engine::Ed => {
            let options = ExperimentOptions {
                propagator: settings.propagator,
                transform: settings.transform,
                cache: Some(cache),
                ..ExperimentOptions::default()
            };
            let result = spectroscopy_experiment(
                &params,
                &config.probe,
                &config.truncation,
                &settings.times(),
                &nu,
                &options,
            )?;
            if result.metadata["cache_hit"] == true {
                run.note("ground state served from the cache");
            }
            result
        }
    };
    if result.coarse_grid {
        run.note("frequency grid is coarser than the spectral resolution");
    }
    run.write("spectroscopy.csv", &result.to_csv())?;
    run.write_json("spectroscopy.json", &result.sidecar())
}

#[derive(Serialize)]
#[serde(untagged)]
enum FitOutcome {
    Fitted { z: f64, z_nu: f64 },
    Failed { error: String },
}

pub fn exponents(run: &mut Run, config: &Config, theories: &[Theory]) -> Result<(), CliError> {
    let mut summary = serde_json::Map::new();
    let mut failed = Vec::new();
    for &theory in theories {
        let path = critical_path(theory, &config.model, &config.fit);
        let outcome = match fit_exponents(&path, theory, config.convention, &config.fit) {
            Ok(fit) => {
                let mut csv = String::from("series,distance,gap\n");
                let rows = fit
                    .gap_series
                    .iter()
                    .map(|p| ("gap", p))
                    .chain(fit.dispersion_series.iter().map(|p| ("dispersion", p)));
                for (series, &(d, gap)) in rows {
                    csv.push_str(&format!("{series},{},{}\n", fmt17(d), fmt17(gap)));
                }
                run.write(&format!("exponents_{}.csv", theory.name()), &csv)?;
                FitOutcome::Fitted {
                    z: fit.z,
                    z_nu: fit.z_nu,
                }
            }
            Err(e) => {
                failed.push(format!("{}: {e}", theory.name()));
                FitOutcome::Failed { error: e.to_string() }
            }
        };
        summary.insert(
            theory.name().to_owned(),
            serde_json::to_value(outcome).map_err(spinboson::Error::from)?,
        );
    }
    run.write_json("exponents.json", &summary)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(failed.join("; ")))
    }
}

#[derive(Serialize)]
struct CircuitReport {
    g_rel: f64,
    /// Critical ω̃/ω₀ at this g_rel.
    critical_cavity_over_omega0: f64,
    /// Renormalized parameters in rad/s, present when a circuit is configured.
    si: Option<spinboson::circuit::EffectiveModel>,
    /// The same circuit in units of ω̃.
    model: Option<ModelParams>,
    critical_cavity_rad_per_s: Option<f64>,
}

/// Returns the line printed to stdout.
pub fn circuit(run: &mut Run, config: &Config, g_rel: Option<f64>, si: bool) -> Result<String, CliError> {
    let effective = config.circuit.as_ref().map(renormalize_circuit).transpose()?;
    let g_rel = match (g_rel, &effective) {
        (Some(g), _) => g,
        (None, Some(m)) => m.g_rel(),
        (None, None) => return Err(CliError::Config("circuit needs --g-rel or a `circuit` section".into())),
    };
    let ratio = critical_cavity_frequency(g_rel)?;
    let report = CircuitReport {
        g_rel,
        critical_cavity_over_omega0: ratio,
        si: effective,
        model: effective.map(|m| m.to_model_params(config.model.n_sites)),
        critical_cavity_rad_per_s: effective.map(|m| ratio * m.omega0),
    };
    run.write_json("circuit.json", &report)?;
    match (si, report.critical_cavity_rad_per_s) {
        (false, _) => Ok(format!("{ratio}")),
        (true, Some(rad)) => Ok(format!("{} Hz", rad / (2.0 * std::f64::consts::PI))),
        (true, None) => Err(CliError::Config(
            "--si needs a `circuit` section for the qubit frequency".into(),
        )),
    }
}
