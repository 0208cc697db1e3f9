//! Subcommand implementations. Each writes its artifacts under the
//! configured output directory and returns the file list.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::adiabatic::{
    adiabatic_check, analyze_path, bloch_trajectory, delta_e_fast, delta_e_slow, StateMode,
};
use crate::cli::config::{Averaging, RunConfig, StateChoice};
use crate::cli::svg;
use crate::error::{Error, Result};
use crate::path::sample_path;
use crate::spin::{band_surface, diabolical_scan, DegeneracyComponent};
use crate::verify::{run_all, VerifySettings};

/// All floats are emitted with 17 significant digits so round trips are
/// lossless and runs are byte-comparable.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn provenance(config: &RunConfig) -> String {
    format!(
        "# config_sha256: {}\n# averaging: {}\n# state: {}\n",
        config.digest(),
        match config.averaging {
            Averaging::Paper => "paper",
            Averaging::Corrected => "corrected",
        },
        match config.state {
            StateChoice::Fixed => "fixed",
            StateChoice::Ground => "ground",
        },
    )
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config_sha256: String,
    averaging: &'a Averaging,
    state: &'a StateChoice,
    #[serde(flatten)]
    body: T,
}

fn json_report<T: Serialize>(config: &RunConfig, body: T) -> String {
    let report = Report {
        config_sha256: config.digest(),
        averaging: &config.averaging,
        state: &config.state,
        body,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    text
}

/// Band surfaces over the parameter square: CSV plus an |B| heatmap.
pub fn cmd_bands(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let c = config.protocol.potentials().drive_constants()?;
    let surface = band_surface(c, config.grid_n, config.omega, config.inertia)?;
    let mut csv = provenance(config);
    csv.push_str("alpha,beta,e_minus,e_plus,b_mag\n");
    for node in &surface.nodes {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            num(node.alpha),
            num(node.beta),
            num(node.e_minus),
            num(node.e_plus),
            num(node.b_mag)
        );
    }
    let dir = Path::new(&config.out_dir);
    Ok(vec![
        write_file(dir, "bands.csv", &csv)?,
        write_file(dir, "field.svg", &svg::heatmap(&surface, &config.digest()))?,
    ])
}

/// Degeneracy scan: component-classified CSV of gapless points and loci.
pub fn cmd_scan(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let c = config.protocol.potentials().drive_constants()?;
    let scan = diabolical_scan(c, config.grid_n.max(16), 1e-10)?;
    let mut csv = provenance(config);
    let _ = writeln!(csv, "# degenerate_everywhere: {}", scan.degenerate_everywhere);
    csv.push_str("component_id,component_type,alpha,beta\n");
    for (id, component) in scan.components.iter().enumerate() {
        match component {
            DegeneracyComponent::Point { alpha, beta } => {
                let _ = writeln!(csv, "{id},point,{},{}", num(*alpha), num(*beta));
            }
            DegeneracyComponent::Curve { points } => {
                for &(alpha, beta) in points {
                    let _ = writeln!(csv, "{id},curve,{},{}", num(alpha), num(beta));
                }
            }
        }
    }
    let dir = Path::new(&config.out_dir);
    Ok(vec![write_file(dir, "degeneracies.csv", &csv)?])
}

/// Path pipeline: trajectory CSV, analysis report JSON, and the SVG pair.
pub fn cmd_path(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let c = config.protocol.potentials().drive_constants()?;
    let path = config.path.build()?;
    let mode = match config.state {
        StateChoice::Fixed => StateMode::Fixed,
        StateChoice::Ground => StateMode::InstantaneousGround,
    };
    let spinor = config.fixed_spinor()?;
    let traj = bloch_trajectory(&path, c, config.samples)?;
    let report = analyze_path(&path, c, config.omega, config.samples, mode, spinor.as_ref())?;

    let mut csv = provenance(config);
    csv.push_str("tau,alpha,beta,nx,ny,nz\n");
    for s in &traj.samples {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            num(s.tau),
            num(s.alpha),
            num(s.beta),
            num(s.n[0]),
            num(s.n[1]),
            num(s.n[2])
        );
    }

    let dir = Path::new(&config.out_dir);
    let digest = config.digest();
    let samples = sample_path(&path, config.samples)?;
    Ok(vec![
        write_file(dir, "trajectory.csv", &csv)?,
        write_file(dir, "path_report.json", &json_report(config, &report))?,
        write_file(dir, "path.svg", &svg::parameter_path(&samples, &digest))?,
        write_file(dir, "bloch.svg", &svg::bloch_projection(&traj, &digest))?,
    ])
}

#[derive(Serialize)]
struct VerifyBody {
    settings: VerifySettings,
    checks: Vec<crate::verify::CheckResult>,
    all_passed: bool,
}

/// Identity/oracle/anchor checks; the returned flag drives the exit code.
pub fn cmd_verify(config: &RunConfig) -> Result<(Vec<PathBuf>, bool)> {
    config.validate()?;
    let settings = VerifySettings {
        cases: config.verify.cases,
        j_max: config.verify.j_max,
        kick_j_max: config.verify.kick_j_max,
        omega: config.omega,
        seed: config.verify.seed,
    };
    let checks = run_all(&settings)?;
    let all_passed = checks.iter().all(|c| c.passed);
    for check in &checks {
        println!(
            "{}: {} (residual {:.3e}, threshold {:.3e})",
            check.id,
            if check.passed { "pass" } else { "FAIL" },
            check.residual,
            check.threshold
        );
    }
    let body = VerifyBody {
        settings,
        checks,
        all_passed,
    };
    let dir = Path::new(&config.out_dir);
    let file = write_file(dir, "verify_report.json", &json_report(config, &body))?;
    Ok((vec![file], all_passed))
}

#[derive(Serialize)]
struct EnergiesBody {
    alpha0: f64,
    beta0: f64,
    omega: f64,
    rotor_offset: f64,
    delta_e_fast: f64,
    delta_e_slow: f64,
    separation_ratio: f64,
    timescales_separated: bool,
}

/// Slow/fast energy costs along the configured path.
pub fn cmd_energies(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let c = config.protocol.potentials().drive_constants()?;
    let path = config.path.build()?;
    let mode = match config.state {
        StateChoice::Fixed => StateMode::Fixed,
        StateChoice::Ground => StateMode::InstantaneousGround,
    };
    let spinor = config.fixed_spinor()?;
    let (t0, _) = path.tau_domain();
    let (alpha0, beta0) = path.point(t0);
    let state = match spinor {
        Some(s) => s,
        None => {
            let b = crate::spin::synthetic_field(alpha0, beta0, c);
            if b.magnitude < crate::adiabatic::DIABOLICAL_GUARD {
                return Err(Error::NearDiabolical {
                    tau: t0,
                    magnitude: b.magnitude,
                });
            }
            crate::adiabatic::aligned_spinor(b.direction().expect("guarded"))
        }
    };
    let fast = delta_e_fast(&state, alpha0, beta0, c)?;
    let slow = delta_e_slow(mode, spinor.as_ref(), &path, c, config.omega, config.samples)?;
    let (ratio, separated) = adiabatic_check(fast, slow);
    let body = EnergiesBody {
        alpha0,
        beta0,
        omega: config.omega,
        rotor_offset: 3.0 / (8.0 * config.inertia),
        delta_e_fast: fast,
        delta_e_slow: slow,
        separation_ratio: ratio,
        timescales_separated: separated,
    };
    let dir = Path::new(&config.out_dir);
    Ok(vec![write_file(
        dir,
        "energies.json",
        &json_report(config, &body),
    )?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::PathSpec;

    fn temp_config(dir: &tempfile::TempDir) -> RunConfig {
        let mut config = RunConfig::default();
        config.out_dir = dir.path().to_string_lossy().into_owned();
        config.grid_n = 16;
        config.samples = 201;
        config
    }

    #[test]
    fn bands_writes_grid_and_heatmap() {
        let dir = tempfile::tempdir().unwrap();
        let config = temp_config(&dir);
        let files = cmd_bands(&config).unwrap();
        assert_eq!(files.len(), 2);
        let csv = fs::read_to_string(&files[0]).unwrap();
        assert!(csv.starts_with("# config_sha256: "));
        let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(rows, 16 * 16 + 1); // header + grid
    }

    #[test]
    fn scan_classifies_components() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = temp_config(&dir);
        config.grid_n = 48;
        let files = cmd_scan(&config).unwrap();
        let csv = fs::read_to_string(&files[0]).unwrap();
        assert!(csv.contains("# degenerate_everywhere: false"));
        assert_eq!(csv.matches(",point,").count(), 4);
    }

    #[test]
    fn path_pipeline_writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = temp_config(&dir);
        config.samples = 2001;
        let files = cmd_path(&config).unwrap();
        assert_eq!(files.len(), 4);
        let report = fs::read_to_string(&files[1]).unwrap();
        let value: serde_json::Value = serde_json::from_str(&report).unwrap();
        assert_eq!(value["loop_count"], 2);
        assert_eq!(value["self_intersections"], 1);
    }

    #[test]
    fn path_near_degeneracy_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = temp_config(&dir);
        config.protocol = crate::cli::config::ProtocolDescriptor::FourStep {
            alpha: 0.5,
            beta: 0.5,
            potentials: crate::cli::config::PotentialSpec::SpinC {
                constants: [0.0, 1.0, 0.0, 1.0],
            },
        };
        assert!(matches!(
            cmd_path(&config),
            Err(Error::NearDiabolical { .. })
        ));
    }

    #[test]
    fn energies_report_fields() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = temp_config(&dir);
        config.path = PathSpec::Builtin {
            builtin: "fig4c".into(),
        };
        config.samples = 5001;
        let files = cmd_energies(&config).unwrap();
        let value: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(value["alpha0"], 0.25);
        assert_eq!(value["rotor_offset"], 0.375);
        assert!(value["delta_e_fast"].is_number());
    }

    #[test]
    fn verify_small_run_passes() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = temp_config(&dir);
        config.verify.cases = 8;
        let (files, passed) = cmd_verify(&config).unwrap();
        assert!(passed);
        let text = fs::read_to_string(&files[0]).unwrap();
        assert!(text.contains("\"all_passed\": true"));
    }
}
