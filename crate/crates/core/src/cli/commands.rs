//! The subcommands. Each writes its files below the output directory and
//! returns their paths in write order.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{CouplingPreset, CouplingSection, ExperimentKind, GhzSection, ProfilesSection, RunConfig};
use crate::cluster::{
    braunstein_rotation, complete_matrix, decompose_coupling, entangled_mode_profiles, ghz_covariance,
    joint_variances, match_spectrum_to_kernel, ppt_pair, ring4_matrix, CouplingMatrix, JointVariances,
    MatchOutcome,
};
use crate::error::{Error, Result};
use crate::export::{create, ensure_dir, fmt_f64, write_json, write_table};
use crate::kernellab::{build_modulated, build_temporal, realistic_spopo_kernel, KernelMatrix, TemporalCrystal};
use crate::numerics::make_uniform_axis;
use crate::opodyn::{squeezing_db, squeezing_report_from_values, threshold_from_values, Quadrature};
use crate::supermodes::{
    compare_values, group_magnitudes, group_values, magnitude_spread, predict_modulated_spectrum, solve_fredholm_with,
    ComparisonReport, DegenerateGroup, SolveOptions,
};
use crate::transverse::{
    chi_overlap, chi_set, mixed_pump, mixing_angle_null, mixing_angle_opposite, ratio_sweep, Grid2d, LGFamily,
};

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub grid_n: Option<usize>,
    pub verbose: bool,
}

impl RunOptions {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("squeezelab: {}", msg.as_ref());
        }
    }
}

const DEFAULT_MODULATED_N: usize = 512;
const DEFAULT_SPOPO_N: usize = 1024;
const KERNEL_CSV_SIDE: usize = 256;

fn out_dir(cfg: &RunConfig, opts: &RunOptions) -> Result<PathBuf> {
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set [output] dir".into()))?;
    ensure_dir(&dir)?;
    Ok(dir)
}

fn expect_kind(cfg: &RunConfig, allowed: &[ExperimentKind], command: &str) -> Result<()> {
    if allowed.contains(&cfg.experiment) {
        return Ok(());
    }
    let names: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
    Err(Error::Config(format!(
        "experiment `{}` is not handled by `{command}` (expects {})",
        cfg.experiment.name(),
        names.join(" or ")
    )))
}

/// Dispatch on the config's experiment kind.
pub fn run_config(cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    match cfg.experiment {
        ExperimentKind::ModulatedKernel | ExperimentKind::Spopo => cmd_kernel(cfg, opts),
        ExperimentKind::TransverseSweep => cmd_transverse(cfg, opts),
        ExperimentKind::ClusterSynthesis | ExperimentKind::Ghz => cmd_cluster(cfg, opts),
    }
}

/// Every shipped figure config into `<out>/<name>/`.
pub fn run_figures(opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let root = opts.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    let mut written = Vec::new();
    for name in super::config::FIGURE_SUITE {
        opts.log(format!("figure {name}"));
        let cfg = RunConfig::builtin(name)?;
        let sub = RunOptions {
            out: Some(root.join(name)),
            ..opts.clone()
        };
        written.extend(run_config(&cfg, &sub)?);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
struct GridReport {
    n: usize,
    half_span: f64,
    label: String,
}

#[derive(Debug, Serialize)]
struct SpreadReport {
    count: usize,
    /// Eigenvalues above the floor; when fewer than `count`, the missing
    /// ones count as zero and the spread is 1.
    available: usize,
    relative_spread: f64,
}

#[derive(Debug, Serialize)]
struct AnalyticReport {
    valid: bool,
    resolved: bool,
    /// `√(π / 8σ₊σ₋)`.
    unit: f64,
    predicted: Vec<f64>,
    /// Leading numeric eigenvalues over `unit`, as many as predicted.
    normalized_leading: Vec<f64>,
    comparison: ComparisonReport,
}

#[derive(Debug, Serialize)]
struct SqueezeRow {
    mode: usize,
    eigenvalue: f64,
    r: f64,
    v_minus_0: f64,
    squeezing_db: f64,
    quadrature: Quadrature,
}

#[derive(Debug, Serialize)]
struct SqueezingSummary {
    pump_fraction: f64,
    modes: Vec<SqueezeRow>,
}

#[derive(Debug, Serialize)]
struct KernelReport {
    experiment: &'static str,
    grid: GridReport,
    eigenvalue_count: usize,
    leading: Vec<f64>,
    threshold_pump: f64,
    groups: Vec<DegenerateGroup>,
    magnitude_groups: Vec<DegenerateGroup>,
    spread: Option<SpreadReport>,
    analytic: Option<AnalyticReport>,
    squeezing: Option<SqueezingSummary>,
}

/// kernel.csv, supermodes.csv and spectrum.json.
pub fn cmd_kernel(cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    expect_kind(cfg, &[ExperimentKind::ModulatedKernel, ExperimentKind::Spopo], "kernel")?;
    let dir = out_dir(cfg, opts)?;
    let (kernel, analytic_spec) = build_kernel(cfg, opts)?;
    let want_modes = cfg.output.eigenfunctions.unwrap_or(true);
    opts.log(format!("solving n = {}", kernel.dim()));
    let set = solve_fredholm_with(
        &kernel,
        &SolveOptions {
            floor: cfg.tolerance.floor,
            eigenfunctions: want_modes,
            max_modes: None,
        },
    )?;
    let values = set.eigenvalues();
    let mut written = Vec::new();

    let path = dir.join("kernel.csv");
    let stride = cfg
        .output
        .kernel_stride
        .unwrap_or_else(|| kernel.dim().div_ceil(KERNEL_CSV_SIDE))
        .max(1);
    kernel.write_csv(create(&path)?, stride)?;
    written.push(path);

    let path = dir.join("supermodes.csv");
    if set.has_eigenfunctions() {
        set.write_modes_csv(create(&path)?, cfg.output.modes.unwrap_or(8), 1)?;
    } else {
        set.write_eigenvalues_csv(create(&path)?)?;
    }
    written.push(path);

    let report_count = cfg.output.report_count.unwrap_or(16).min(values.len());
    let leading = values[..report_count].to_vec();
    let analytic = match &analytic_spec {
        Some(spec) => {
            let pred = predict_modulated_spectrum(spec)?;
            let predicted = pred.significant_values(set.truncation_floor());
            let unit = (std::f64::consts::PI / (8.0 * spec.sigma_plus * spec.sigma_minus)).sqrt();
            Some(AnalyticReport {
                valid: pred.valid,
                resolved: pred.resolved,
                unit,
                normalized_leading: values.iter().take(predicted.len()).map(|v| v / unit).collect(),
                comparison: compare_values(values, &predicted),
                predicted,
            })
        }
        None => None,
    };
    let squeezing = match &cfg.squeezing {
        Some(s) => {
            let rep = squeezing_report_from_values(values, s.pump_fraction, &[])?;
            Some(SqueezingSummary {
                pump_fraction: s.pump_fraction,
                modes: rep
                    .modes
                    .iter()
                    .take(s.modes.unwrap_or(8))
                    .map(|m| SqueezeRow {
                        mode: m.mode,
                        eigenvalue: m.eigenvalue,
                        r: m.r,
                        v_minus_0: m.v_minus_0,
                        squeezing_db: squeezing_db(m.v_minus_0).unwrap_or(f64::INFINITY),
                        quadrature: m.squeezed,
                    })
                    .collect(),
            })
        }
        None => None,
    };
    let count = cfg.tolerance.spread_count;
    let report = KernelReport {
        experiment: cfg.experiment.name(),
        grid: GridReport {
            n: kernel.dim(),
            half_span: kernel.axis().half_span(),
            label: kernel.axis().label().to_string(),
        },
        eigenvalue_count: values.len(),
        threshold_pump: threshold_from_values(values)?,
        groups: group_values(&leading, cfg.tolerance.degeneracy)?,
        magnitude_groups: group_magnitudes(&leading, cfg.tolerance.degeneracy)?,
        spread: spread_report(values, count),
        leading,
        analytic,
        squeezing,
    };
    let path = dir.join("spectrum.json");
    write_json(&path, &report)?;
    written.push(path);
    Ok(written)
}

fn spread_report(values: &[f64], count: usize) -> Option<SpreadReport> {
    if values.is_empty() || count == 0 {
        return None;
    }
    let relative_spread = magnitude_spread(values, count).unwrap_or(1.0);
    Some(SpreadReport {
        count,
        available: values.len(),
        relative_spread,
    })
}

fn build_kernel(
    cfg: &RunConfig,
    opts: &RunOptions,
) -> Result<(KernelMatrix, Option<crate::kernellab::ModulatedKernelSpec>)> {
    if let Some(m) = &cfg.modulated {
        let spec = m.to_spec()?;
        let n = opts.grid_n.or(cfg.grid.n).unwrap_or(DEFAULT_MODULATED_N);
        let axis = match cfg.grid.x_max {
            Some(x) => make_uniform_axis(x, n)?,
            None => spec.default_axis(n)?,
        };
        return Ok((build_modulated(&spec, &axis)?, Some(spec)));
    }
    let s = cfg.spopo.as_ref().expect("checked by RunConfig");
    let n = opts.grid_n.or(cfg.grid.n).unwrap_or(DEFAULT_SPOPO_N);
    let kernel = match cfg.grid.x_max {
        None => realistic_spopo_kernel(s.tau1, &s.pump, n)?,
        Some(x) => {
            let axis = make_uniform_axis(x, n)?;
            build_temporal(&TemporalCrystal::single(1.0), &s.pump.rescaled_time(1.0 / s.tau1), &axis)?
        }
    };
    Ok((kernel, None))
}

/// chi_sweep.csv, rth.csv and, with mixing pairs configured, mixing.csv.
pub fn cmd_transverse(cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    expect_kind(cfg, &[ExperimentKind::TransverseSweep], "transverse")?;
    let t = cfg.transverse.as_ref().expect("checked by RunConfig");
    let dir = out_dir(cfg, opts)?;
    let rhos = t.rhos()?;
    let mut chi_rows = Vec::new();
    let mut rth_rows = Vec::new();
    for &f in &t.families {
        opts.log(format!("sweeping family f = {f}"));
        let fam = LGFamily::with_spot_size(f, t.w_s)?;
        for row in ratio_sweep(&fam, &rhos)? {
            let chis = chi_set(&fam, &crate::transverse::MultiGaussPump::single(row.rho)?)?;
            for e in &chis.entries {
                chi_rows.push(vec![
                    f.to_string(),
                    fmt_f64(row.rho),
                    e.l.to_string(),
                    fmt_f64(e.re),
                    fmt_f64(row.ratios[&e.l]),
                ]);
            }
            rth_rows.push(vec![f.to_string(), fmt_f64(row.rho), fmt_f64(row.r_th)]);
        }
    }
    let mut written = Vec::new();
    let path = dir.join("chi_sweep.csv");
    write_table(&path, &["f", "rho", "l", "chi", "ratio"], &chi_rows)?;
    written.push(path);
    let path = dir.join("rth.csv");
    write_table(&path, &["f", "rho", "r_th"], &rth_rows)?;
    written.push(path);

    let mut mix_rows = Vec::new();
    let fam3 = LGFamily::with_spot_size(3, t.w_s)?;
    for (kind, pair) in [("null", t.null_pair), ("opposite", t.opposite_pair)] {
        let Some([a, b]) = pair else { continue };
        let theta = if kind == "null" {
            mixing_angle_null(a, b)?
        } else {
            mixing_angle_opposite(a, b)?
        };
        let pump = mixed_pump(a, b, theta)?;
        let (c1, c3) = (chi_overlap(&fam3, 1, &pump)?, chi_overlap(&fam3, 3, &pump)?);
        let residual = if kind == "null" { c1.abs() } else { (c1 + c3).abs() } / c3.abs();
        mix_rows.push(vec![
            kind.to_string(),
            fmt_f64(a),
            fmt_f64(b),
            fmt_f64(theta),
            fmt_f64(c1),
            fmt_f64(c3),
            fmt_f64(residual),
        ]);
    }
    if !mix_rows.is_empty() {
        let path = dir.join("mixing.csv");
        write_table(&path, &["kind", "rho_a", "rho_b", "theta", "chi_1", "chi_3", "residual"], &mix_rows)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
struct CouplingReport {
    matrix: Vec<Vec<f64>>,
    spectrum: Vec<f64>,
    basis: Vec<Vec<f64>>,
    reconstruction_error: f64,
}

#[derive(Debug, Serialize)]
struct PredictedReport {
    valid: bool,
    resolved: bool,
    /// Analytic spectrum of the synthesized kernel divided by the scale.
    values: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct PumpReport {
    sigma: f64,
    target: Vec<f64>,
    result: MatchOutcome,
    predicted: Option<PredictedReport>,
}

#[derive(Debug, Serialize)]
struct PairReport {
    a: usize,
    b: usize,
    min_symplectic_eigenvalue: f64,
    separable: bool,
}

#[derive(Debug, Serialize)]
struct GhzEntry {
    modes: usize,
    r: f64,
    input_squeezing_db: f64,
    joint: JointVariances,
    /// `Var(ΣX) / n`: the vacuum value is 1.
    sum_x_to_vacuum: f64,
    /// `max Var(P_j − P_{j+1}) / 2`.
    p_diff_to_vacuum: f64,
    uncertainty_margin: f64,
    determinant: f64,
    pairs: Vec<PairReport>,
}

/// spectrum.json and pump_spec.json for a coupling target, ghz_report.json
/// for a [ghz] section and profiles/*.csv for a [profiles] section.
pub fn cmd_cluster(cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    expect_kind(cfg, &[ExperimentKind::ClusterSynthesis, ExperimentKind::Ghz], "cluster")?;
    let dir = out_dir(cfg, opts)?;
    let mut written = Vec::new();
    if let Some(c) = &cfg.coupling {
        written.extend(synthesis(c, &dir, opts)?);
    }
    if let Some(g) = &cfg.ghz {
        let path = dir.join("ghz_report.json");
        write_json(&path, &ghz_report(g)?)?;
        written.push(path);
    }
    if let Some(p) = &cfg.profiles {
        written.extend(profiles(p, &dir, opts)?);
    }
    Ok(written)
}

fn coupling_matrix(c: &CouplingSection) -> Result<CouplingMatrix> {
    match (c.preset, &c.matrix) {
        (Some(CouplingPreset::Ring4), _) => Ok(ring4_matrix()),
        (Some(CouplingPreset::Complete), _) => complete_matrix(
            c.n.expect("checked by RunConfig"),
            c.weight.expect("checked by RunConfig"),
        ),
        (None, Some(rows)) => {
            CouplingMatrix::from_rows(rows).map_err(|e| Error::Config(format!("[coupling] matrix: {e}")))
        }
        (None, None) => unreachable!("checked by RunConfig"),
    }
}

fn synthesis(c: &CouplingSection, dir: &Path, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let k = coupling_matrix(c)?;
    let mut dec = decompose_coupling(&k)?;
    if let Some(p) = &c.permutation {
        dec = dec.permuted(p).map_err(|e| Error::Config(format!("[coupling] permutation: {e}")))?;
    }
    let back = dec.reconstruct();
    let reconstruction_error = k
        .to_rows()
        .iter()
        .flatten()
        .zip(back.iter().flatten())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let mut written = Vec::new();
    let path = dir.join("spectrum.json");
    write_json(
        &path,
        &CouplingReport {
            matrix: k.to_rows(),
            spectrum: dec.spectrum.clone(),
            basis: dec.basis.clone(),
            reconstruction_error,
        },
    )?;
    written.push(path);

    opts.log("matching spectrum to a modulated kernel");
    let result = match_spectrum_to_kernel(&dec.spectrum, c.sigma)?;
    let chosen = match &result {
        MatchOutcome::Exact(m) => Some(m),
        MatchOutcome::Infeasible(inf) => inf.closest_spec.as_ref(),
    };
    let predicted = match chosen {
        Some(m) => {
            let pred = predict_modulated_spectrum(&m.spec)?;
            Some(PredictedReport {
                valid: pred.valid,
                resolved: pred.resolved,
                values: pred.significant_values(1e-12).iter().map(|v| v / m.scale).collect(),
            })
        }
        None => None,
    };
    let path = dir.join("pump_spec.json");
    write_json(
        &path,
        &PumpReport {
            sigma: c.sigma,
            target: dec.spectrum,
            result,
            predicted,
        },
    )?;
    written.push(path);
    Ok(written)
}

fn ghz_report(g: &GhzSection) -> Result<Vec<GhzEntry>> {
    let r = g.squeeze_parameter()?;
    g.modes
        .iter()
        .map(|&n| {
            let v = ghz_covariance(n, r)?;
            let joint = joint_variances(&v);
            let mut pairs = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    let p = ppt_pair(&v, a, b)?;
                    pairs.push(PairReport {
                        a,
                        b,
                        min_symplectic_eigenvalue: p.min_symplectic_eigenvalue,
                        separable: p.separable,
                    });
                }
            }
            Ok(GhzEntry {
                modes: n,
                r,
                input_squeezing_db: 20.0 * r / std::f64::consts::LN_10,
                sum_x_to_vacuum: joint.var_sum_x / n as f64,
                p_diff_to_vacuum: joint.max_var_p_diff / 2.0,
                joint,
                uncertainty_margin: v.uncertainty_margin()?,
                determinant: v.det()?,
                pairs,
            })
        })
        .collect()
}

fn profiles(p: &ProfilesSection, dir: &Path, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let sub = dir.join("profiles");
    ensure_dir(&sub)?;
    let grid = Grid2d::symmetric(p.half_width, p.grid_n)?;
    let mut written = Vec::new();
    for &f in &p.families {
        opts.log(format!("entangled-mode profiles for f = {f}"));
        let fam = LGFamily::with_spot_size(f, p.w_s)?;
        let maps = entangled_mode_profiles(&fam, &braunstein_rotation(f + 1)?, &grid)?;
        for (j, map) in maps.iter().enumerate() {
            let path = sub.join(format!("f{f}_mode{}.csv", j + 1));
            grid.write_csv(map, create(&path)?)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(dir: &Path) -> RunOptions {
        RunOptions {
            out: Some(dir.to_path_buf()),
            ..RunOptions::default()
        }
    }

    #[test]
    fn kernel_command_small_grid() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::builtin("fig1a").unwrap();
        let o = RunOptions {
            grid_n: Some(200),
            ..opts(dir.path())
        };
        let files = cmd_kernel(&cfg, &o).unwrap();
        let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
        assert_eq!(names, ["kernel.csv", "supermodes.csv", "spectrum.json"]);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
        assert_eq!(json["grid"]["n"], 200);
        let norm = json["analytic"]["normalized_leading"].as_array().unwrap();
        assert_eq!(norm.len(), 4);
    }

    #[test]
    fn wrong_command_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::builtin("fig3").unwrap();
        assert!(matches!(cmd_kernel(&cfg, &opts(dir.path())), Err(Error::Config(_))));
        assert!(matches!(cmd_transverse(&cfg, &RunOptions::default()), Err(Error::Config(_))));
    }

    #[test]
    fn transverse_and_cluster_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let files = cmd_transverse(&RunConfig::builtin("fig3").unwrap(), &opts(dir.path())).unwrap();
        assert_eq!(files.len(), 3);
        let mixing = std::fs::read_to_string(dir.path().join("mixing.csv")).unwrap();
        for line in mixing.lines().skip(1) {
            let residual: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!(residual < 1e-8, "{line}");
        }

        let dir = tempfile::tempdir().unwrap();
        let files = cmd_cluster(&RunConfig::builtin("fig4").unwrap(), &opts(dir.path())).unwrap();
        // ghz report + 2 + 3 + 4 profile maps
        assert_eq!(files.len(), 10);
        let dir = tempfile::tempdir().unwrap();
        cmd_cluster(&RunConfig::builtin("ring4").unwrap(), &opts(dir.path())).unwrap();
        let pump: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("pump_spec.json")).unwrap()).unwrap();
        assert_eq!(pump["result"]["outcome"], "exact");
    }
}
