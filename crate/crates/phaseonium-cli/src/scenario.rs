//! Scenario execution: analytic and finite-difference engines, tabular
//! outputs, summaries and manifests.

use crate::config::{Engine, Protocol, Scenario, ScenarioConfig};
use phaseonium::analytic::{
    propagate_forward_longitudinal, propagate_forward_uniform,
    retrieve_backward_longitudinal, retrieve_backward_uniform, sample_pulse, to_spectrum,
    to_time, FieldGrid, SpectralField, TimeField,
};
use phaseonium::blochsim::{check_weak_field, run_memory_protocol};
use phaseonium::protocols::{memory_metrics, splitter};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One row of the z-profile table: peak intensities along the medium,
/// normalized to the input peak intensity.
#[derive(Debug, Clone, Copy)]
pub struct ProfileRow {
    pub alpha_z: f64,
    pub i13_fwd: f64,
    pub i23_fwd: f64,
    pub i13_bwd: f64,
    pub i23_bwd: f64,
    /// Relative phase arg(O13) - arg(O23) of the retrieved field at its
    /// temporal peak (constant along z for these scenarios).
    pub rel_phase: f64,
}

/// Scalar metrics of a completed scenario.
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub engine: String,
    pub p_forward: f64,
    pub p_backward: f64,
    pub transmitted_fraction: f64,
    pub retrieved_fraction: f64,
    pub efficiency: f64,
    pub fidelity: f64,
    pub correlation13: f64,
    pub correlation23: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_pop_dev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sig12_dev: Option<f64>,
}

/// Output of one engine run.
pub struct EngineOutput {
    pub profile: Vec<ProfileRow>,
    pub metrics: Metrics,
}

fn peak_intensities(field: &TimeField) -> (f64, f64) {
    let p13 = field.comp13.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let p23 = field.comp23.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    (p13, p23)
}

fn peak_relative_phase(field: &TimeField) -> f64 {
    let mut best = 0usize;
    let mut best_val = 0.0;
    for i in 0..field.grid.n {
        let v = field.comp13[i].norm_sqr() + field.comp23[i].norm_sqr();
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let a = field.comp13[best];
    let b = field.comp23[best];
    if a.norm() == 0.0 || b.norm() == 0.0 {
        0.0
    } else {
        (a / b).arg()
    }
}

/// Run the closed-form engine: spectral transfer per z node, peak
/// intensities from the reconstructed envelopes.
pub fn run_analytic(scn: &Scenario) -> Result<EngineOutput, String> {
    if !scn.analytic_supported() {
        return Err(
            "analytic engine: a phase gradient requires balanced populations (pop1 = 0.5)"
                .into(),
        );
    }
    let medium = &scn.medium;
    let depth = medium.optical_depth;
    let longitudinal = medium.preparation.theta != 0.0;
    let grid = FieldGrid::standard(&scn.pulse);
    let input = to_spectrum(&sample_pulse(&scn.pulse, grid))
        .map_err(|e| format!("analytic engine: {e}"))?;
    let norm = scn.pulse.peak_rabi * scn.pulse.peak_rabi;
    let forward = |spec: &SpectralField, alpha_z: f64| {
        if longitudinal {
            propagate_forward_longitudinal(spec, medium, alpha_z)
        } else {
            propagate_forward_uniform(spec, medium, alpha_z)
        }
    };
    let backward = |spec: &SpectralField, alpha_z: f64| {
        if longitudinal {
            retrieve_backward_longitudinal(spec, medium, alpha_z)
        } else {
            retrieve_backward_uniform(spec, medium, alpha_z)
        }
    };
    let n_rows = scn.sim_grid.n_z + 1;
    let mut profile = Vec::with_capacity(n_rows);
    let mut fwd_out_energy = 0.0;
    let mut bwd_field_at_0: Option<TimeField> = None;
    for i in 0..n_rows {
        let alpha_z = depth * i as f64 / (n_rows - 1) as f64;
        let fwd = forward(&input, alpha_z).map_err(|e| format!("analytic engine: {e}"))?;
        let bwd = backward(&input, alpha_z).map_err(|e| format!("analytic engine: {e}"))?;
        let fwd_t = to_time(&fwd);
        let bwd_t = to_time(&bwd);
        let (f13, f23) = peak_intensities(&fwd_t);
        let (b13, b23) = peak_intensities(&bwd_t);
        let rel_phase = peak_relative_phase(&bwd_t);
        if i == n_rows - 1 {
            fwd_out_energy = fwd_t.energy();
        }
        if i == 0 {
            bwd_field_at_0 = Some(bwd_t);
        }
        profile.push(ProfileRow {
            alpha_z,
            i13_fwd: f13 / norm,
            i23_fwd: f23 / norm,
            i13_bwd: b13 / norm,
            i23_bwd: b23 / norm,
            rel_phase,
        });
    }
    let bwd_at_0 = bwd_field_at_0.expect("at least one profile row");
    let input_energy = scn.pulse.energy();
    let transmitted = fwd_out_energy / input_energy;
    let retrieved = bwd_at_0.energy() / input_energy;
    // The echo is the time reverse of the input around the switch; with the
    // standard grid the switch sits at t = 0, so the echo peaks at -center.
    let mm = memory_metrics(&scn.pulse, &bwd_at_0, Some(-scn.pulse.center));
    let mut metrics = Metrics {
        engine: "analytic".into(),
        p_forward: transmitted,
        p_backward: retrieved,
        transmitted_fraction: transmitted,
        retrieved_fraction: retrieved,
        efficiency: mm.efficiency,
        fidelity: mm.fidelity,
        correlation13: mm.correlation13,
        correlation23: mm.correlation23,
        max_pop_dev: None,
        max_sig12_dev: None,
    };
    if matches!(
        scn.config.protocol,
        Protocol::Filter | Protocol::Sieve | Protocol::Splitter
    ) {
        // Deep-medium protocol probabilities from the mode projections.
        let r = splitter(&scn.qubit(), &medium.preparation);
        metrics.p_forward = r.p_forward;
        metrics.p_backward = r.p_backward;
        metrics.fidelity = r.fidelity;
    }
    Ok(EngineOutput { profile, metrics })
}

/// Run the finite-difference engine.
pub fn run_numeric(scn: &Scenario) -> Result<EngineOutput, String> {
    let record = run_memory_protocol(&scn.pulse, &scn.medium, &scn.sim_grid)
        .map_err(|e| format!("numeric engine: {e}"))?;
    let norm = scn.pulse.peak_rabi * scn.pulse.peak_rabi;
    let depth = scn.medium.optical_depth;
    let boundary = record.retrieval.boundary_field();
    let rel_phase = peak_relative_phase(&boundary);
    let profile = record
        .absorption
        .z
        .iter()
        .enumerate()
        .map(|(i, &z)| ProfileRow {
            alpha_z: depth * z,
            i13_fwd: record.absorption.peak13[i] / norm,
            i23_fwd: record.absorption.peak23[i] / norm,
            i13_bwd: record.retrieval.peak13[i] / norm,
            i23_bwd: record.retrieval.peak23[i] / norm,
            rel_phase,
        })
        .collect();
    // Echo arrival: the input center mirrored about the switch time.
    let echo_center = 2.0 * scn.sim_grid.t_switch - scn.pulse.center;
    let mm = memory_metrics(&scn.pulse, &boundary, Some(echo_center));
    let diag = check_weak_field(&record);
    Ok(EngineOutput {
        profile,
        metrics: Metrics {
            engine: "numeric".into(),
            p_forward: record.transmitted_fraction,
            p_backward: record.retrieved_fraction,
            transmitted_fraction: record.transmitted_fraction,
            retrieved_fraction: record.retrieved_fraction,
            efficiency: mm.efficiency,
            fidelity: mm.fidelity,
            correlation13: mm.correlation13,
            correlation23: mm.correlation23,
            max_pop_dev: Some(diag.max_pop_dev),
            max_sig12_dev: Some(diag.max_sig12_dev),
        },
    })
}

/// Fixed-format profile table (deterministic byte-for-byte).
pub fn profile_table(rows: &[ProfileRow]) -> String {
    let mut s = String::new();
    s.push_str(
        "# alpha_z i13_fwd i23_fwd i13_bwd i23_bwd phase13_minus_phase23\n\
         # peak intensities normalized to the input peak; phase in radians\n",
    );
    for r in rows {
        writeln!(
            s,
            "{:+.10e} {:+.10e} {:+.10e} {:+.10e} {:+.10e} {:+.10e}",
            r.alpha_z, r.i13_fwd, r.i23_fwd, r.i13_bwd, r.i23_bwd, r.rel_phase
        )
        .expect("writing to a String cannot fail");
    }
    s
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub protocol: String,
    pub engines: Vec<Metrics>,
}

pub fn protocol_name(p: Protocol) -> &'static str {
    match p {
        Protocol::Filter => "filter",
        Protocol::Sieve => "sieve",
        Protocol::Splitter => "splitter",
        Protocol::Memory => "memory",
    }
}

#[derive(Debug, Serialize)]
pub struct ManifestRun {
    pub command: String,
    pub package_version: String,
    pub wall_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub run: ManifestRun,
    pub config: ScenarioConfig,
    /// Output file name -> SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(data);
    let digest = h.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        write!(s, "{b:02x}").expect("writing to a String cannot fail");
    }
    s
}

/// Write a scenario's outputs into `out_dir`; returns the manifest path.
pub fn write_outputs(
    out_dir: &Path,
    command: &str,
    config: &ScenarioConfig,
    tables: &[(String, String)],
    summary: &Summary,
    wall_seconds: f64,
) -> Result<PathBuf, String> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| format!("cannot create output directory {}: {e}", out_dir.display()))?;
    let mut files = BTreeMap::new();
    let mut emit = |name: &str, contents: &str| -> Result<(), String> {
        let path = out_dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        files.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    };
    for (name, contents) in tables {
        emit(name, contents)?;
    }
    let summary_text = toml::to_string_pretty(summary)
        .map_err(|e| format!("summary serialization: {e}"))?;
    emit("summary.toml", &summary_text)?;
    let manifest = Manifest {
        run: ManifestRun {
            command: command.to_string(),
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_seconds,
        },
        config: config.clone(),
        files,
    };
    let manifest_text = toml::to_string_pretty(&manifest)
        .map_err(|e| format!("manifest serialization: {e}"))?;
    let manifest_path = out_dir.join("manifest.toml");
    std::fs::write(&manifest_path, manifest_text)
        .map_err(|e| format!("cannot write {}: {e}", manifest_path.display()))?;
    Ok(manifest_path)
}

/// Engine-agreement report for `validate`.
#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub max_profile_deviation: f64,
    pub tolerance: f64,
    pub max_pop_dev: f64,
    pub max_sig12_dev: f64,
    pub weak_field_ok: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}

/// Compare the two engines' normalized peak-intensity profiles on the
/// numeric z nodes (the analytic profile is computed on the same nodes).
pub fn compare_profiles(analytic: &[ProfileRow], numeric: &[ProfileRow]) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "profiles use the same z nodes");
    let mut max_dev = 0.0f64;
    for (a, b) in analytic.iter().zip(numeric) {
        max_dev = max_dev
            .max((a.i13_fwd - b.i13_fwd).abs())
            .max((a.i23_fwd - b.i23_fwd).abs())
            .max((a.i13_bwd - b.i13_bwd).abs())
            .max((a.i23_bwd - b.i23_bwd).abs());
    }
    max_dev
}

pub fn engines_to_run(engine: Engine) -> (bool, bool) {
    match engine {
        Engine::Analytic => (true, false),
        Engine::Numeric => (false, true),
        Engine::Both => (true, true),
    }
}
