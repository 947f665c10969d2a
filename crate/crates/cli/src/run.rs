use std::path::{Path, PathBuf};
use std::time::Instant;

use hdmd::dictionary::{constant_dictionary, evaluate_snapshots, linear_dictionary};
use hdmd::schrodinger::{
    assemble_streaming, exact_spectrum, exact_spike_weights, reference_observable, GaussianGridSpec,
    HarmonicOscillatorProblem,
};
use hdmd::spectral::probes::{
    basis_vector, diagonal_reference, free_jacobi, moment_convergence_probe, resolvent_convergence_probe,
    weak_convergence_probe, TestFunction,
};
use hdmd::{
    assemble_gram_pair, c64, cluster_atoms, edmd, eigendecompose, hermitian_dmd, project_observable,
    spectral_measure, AxisBox, Dictionary, GaussianDictionary, KoopmanEig, KoopmanMatrix, ObservableCoefficients,
    Points, QuadratureRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{CustomDictionary, Experiment, ExperimentConfig, QuadratureKind};
use crate::output::OutDir;
use crate::{CliError, HERMITICITY_LIMIT};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output_dir` from the config.
    pub out: Option<PathBuf>,
    pub full_grid: bool,
}

fn out_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<OutDir, CliError> {
    let path = opts
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("hdmd-out"));
    OutDir::create(&path)
}

fn check_experiment(cfg: &ExperimentConfig, want: Experiment) -> Result<(), CliError> {
    match cfg.experiment {
        Some(e) if e != want => Err(CliError::Config(format!(
            "experiment: config says {} but the {} subcommand was run",
            e.name(),
            want.name()
        ))),
        _ => Ok(()),
    }
}

/// Shortest round-trip form; switches to exponent notation for tiny values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn hermiticity(k: &KoopmanMatrix<'_>) -> f64 {
    let r = k.hermiticity_residual();
    log::info!("hermiticity residual {r:e}");
    r
}

fn fail_if_not_hermitian(residual: f64) -> Result<(), CliError> {
    if residual > HERMITICITY_LIMIT {
        return Err(CliError::Numerical(format!(
            "hermiticity residual {residual:e} exceeds {HERMITICITY_LIMIT:e}"
        )));
    }
    Ok(())
}

fn eig_stats(eig: &KoopmanEig<'_>) -> serde_json::Value {
    json!({
        "count": eig.len(),
        "max_pencil_residual": eig.max_residual(),
        "g_orthonormality_defect": eig.orthonormality_defect(),
    })
}

fn benchmark_quadrature(
    cfg: &ExperimentConfig,
    problem: &HarmonicOscillatorProblem,
    grid: [usize; 2],
) -> Result<QuadratureRule, CliError> {
    Ok(match cfg.quadrature {
        QuadratureKind::Trapezoid => QuadratureRule::tensor_trapezoid(&problem.domain, &grid)?,
        QuadratureKind::MonteCarlo => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let (lo, hi) = (problem.domain.lower(), problem.domain.upper());
            let m = grid[0] * grid[1];
            let coords = (0..m)
                .flat_map(|_| [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])])
                .collect();
            QuadratureRule::monte_carlo(Points::new(coords, 2)?, problem.domain.volume())?
        }
    })
}

/// The harmonic oscillator benchmark: eigenvalues against `m + n + 1` and
/// the clustered spectral measure of `sin(πx/5) sin(πy/5)`.
pub fn run_schrodinger(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(), CliError> {
    check_experiment(cfg, Experiment::Schrodinger)?;
    let start = Instant::now();
    let out = out_dir(cfg, opts)?;
    let d = &cfg.dictionary;
    let problem = HarmonicOscillatorProblem {
        dictionary: GaussianGridSpec {
            centers_lower: d.lower,
            centers_upper: d.upper,
            per_axis: d.per_axis,
            width: d.width,
            amplitude: d.amplitude(),
        },
        ..HarmonicOscillatorProblem::default()
    };
    let grid = cfg.benchmark_grid(opts.full_grid);
    let quad = benchmark_quadrature(cfg, &problem, grid)?;
    log::info!("assembling {}x{} grid, {} dictionary functions", grid[0], grid[1], d.per_axis * d.per_axis);

    let f = |x: &[f64]| reference_observable([x[0], x[1]]);
    let (pair, moments) = assemble_streaming(&problem, &quad, &[&f], cfg.block_rows, cfg.rank_tolerance)?;
    let k = hermitian_dmd(&pair);
    let residual = hermiticity(&k);
    let eig = eigendecompose(&k)?;
    let obs = ObservableCoefficients::from_moments(&moments[0], &pair)?;
    let measure = spectral_measure(&eig, &obs)?;
    let refs: Vec<f64> = (1..=cfg.energy_cutoff).map(|e| e as f64).collect();
    let clustered = cluster_atoms(&measure, &refs, cfg.cluster_radius, cfg.cluster_center)?;
    let exact_weights = exact_spike_weights(&problem, cfg.energy_cutoff, &reference_observable, cfg.exact_resolution)?;

    // enough exact levels to pair with every computed eigenvalue
    let mut levels = 1;
    while levels * (levels + 1) / 2 < eig.len() {
        levels += 1;
    }
    let exact = exact_spectrum(levels);
    let eig_rows: Vec<Vec<String>> = eig
        .eigenvalues()
        .iter()
        .zip(&exact)
        .enumerate()
        .map(|(j, (&lam, e))| vec![(j + 1).to_string(), num(lam), num(e.energy), num(lam - e.energy)])
        .collect();
    out.table("eigenvalues.csv", &["index", "computed", "exact", "error"], &eig_rows)?;
    out.measure("measure.csv", &measure)?;

    let clustered_rows: Vec<Vec<String>> = clustered
        .atoms()
        .iter()
        .map(|a| {
            if a.unmatched {
                return vec![String::new(), num(a.location), num(a.weight), String::new()];
            }
            let e = refs
                .iter()
                .copied()
                .find(|&e| (a.location - e).abs() <= cfg.cluster_radius)
                .expect("matched atoms lie near a reference");
            let exact_w = exact_weights.atoms()[e as usize - 1].weight;
            vec![num(e), num(a.location), num(a.weight), num(exact_w)]
        })
        .collect();
    out.table("clustered.csv", &["energy", "location", "weight", "exact_weight"], &clustered_rows)?;

    let spectrum_rows: Vec<Vec<String>> = exact_spectrum(cfg.energy_cutoff)
        .iter()
        .map(|p| vec![p.m.to_string(), p.n.to_string(), num(p.energy)])
        .collect();
    out.table("exact_spectrum.csv", &["m", "n", "energy"], &spectrum_rows)?;
    out.measure("exact_weights.csv", &exact_weights)?;

    let summary = json!({
        "experiment": "schrodinger",
        "grid": grid,
        "quadrature": cfg.quadrature,
        "seed": cfg.seed,
        "cluster_center": cfg.cluster_center,
        "snapshots": quad.len(),
        "dictionary_size": pair.size(),
        "retained_rank": pair.retained_rank(),
        "rank_deficient": pair.is_rank_deficient(),
        "gram_eigen_range": [pair.g_eigen_floor(), pair.g_eigen_max()],
        "hermiticity_residual": residual,
        "eigenpairs": eig_stats(&eig),
        "total_mass": measure.total_mass(),
        "observable_gram_norm_sq": obs.gram_norm_sq(),
        "runtime_seconds": start.elapsed().as_secs_f64(),
    });
    out.json("summary.json", &summary)?;
    fail_if_not_hermitian(residual)
}

/// Finite-section probe tables for the free Jacobi matrix and a diagonal
/// matrix with the same spectral range.
pub fn run_probes(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(), CliError> {
    check_experiment(cfg, Experiment::Probes)?;
    let start = Instant::now();
    let out = out_dir(cfg, opts)?;
    let p = &cfg.probe;
    let n_ref = p.reference_size;
    let z = c64::new(p.z_re, p.z_im);
    let v = basis_vector(n_ref, 0);
    let test_fns = || {
        vec![
            TestFunction::new("re_resolvent", move |x| (1.0 / (c64::new(x, 0.0) - z)).re),
            TestFunction::new("im_resolvent", move |x| (1.0 / (c64::new(x, 0.0) - z)).im),
            TestFunction::new("gaussian", |x| (-x * x).exp()),
        ]
    };
    let diag: Vec<f64> = (0..n_ref).map(|i| -2.0 + 4.0 * i as f64 / (n_ref - 1) as f64).collect();

    let mut summary = serde_json::Map::new();
    for (label, reference) in [("jacobi", free_jacobi(n_ref)), ("diagonal", diagonal_reference(&diag))] {
        log::info!("probing {label} reference of size {n_ref}");
        let res = resolvent_convergence_probe(reference.as_ref(), &v, z, &p.sizes)?;
        let mom = moment_convergence_probe(reference.as_ref(), &v, p.max_moment, &p.sizes)?;
        let weak = weak_convergence_probe(reference.as_ref(), &v, &test_fns(), &p.sizes)?;
        out.probe(&format!("{label}_resolvent.csv"), &res)?;
        out.probe(&format!("{label}_moments.csv"), &mom)?;
        out.probe(&format!("{label}_weak.csv"), &weak)?;
        let last = *p.sizes.last().unwrap();
        summary.insert(
            label.to_string(),
            json!({
                "largest_section": last,
                "resolvent_gap": res.gap(last, "resolvent"),
                "resolvent_floor": res.floor("resolvent"),
                "weak_re_resolvent_gap": weak.gap(last, "re_resolvent"),
            }),
        );
    }
    summary.insert("experiment".into(), json!("probes"));
    summary.insert("reference_size".into(), json!(n_ref));
    summary.insert("z".into(), json!([p.z_re, p.z_im]));
    summary.insert("runtime_seconds".into(), json!(start.elapsed().as_secs_f64()));
    out.json("summary.json", &serde_json::Value::Object(summary))
}

fn read_snapshot_file(path: &Path) -> Result<Points, CliError> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    let rows = hdmd::io::read_real_rows(file).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if rows.is_empty() || rows[0].is_empty() {
        return Err(CliError::Input(format!("{}: no snapshots", path.display())));
    }
    Points::from_rows(&rows).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// EDMD and Hermitian DMD on user snapshot pairs `(x_m, y_m)`, one state per
/// CSV row, with uniform weights `1/M`.
pub fn run_custom(cfg: &ExperimentConfig, opts: &RunOptions, x_path: &Path, y_path: &Path) -> Result<(), CliError> {
    check_experiment(cfg, Experiment::CustomSnapshots)?;
    let start = Instant::now();
    let x = read_snapshot_file(x_path)?;
    let y = read_snapshot_file(y_path)?;
    if x.len() != y.len() || x.dim() != y.dim() {
        return Err(CliError::Input(format!(
            "snapshot files disagree: {} rows of {} values vs {} rows of {} values",
            x.len(),
            x.dim(),
            y.len(),
            y.dim()
        )));
    }
    let dim = x.dim();
    if cfg.custom_observable >= dim {
        return Err(CliError::Config(format!(
            "custom.observable: index {} but snapshots have {dim} columns",
            cfg.custom_observable
        )));
    }
    let out = out_dir(cfg, opts)?;
    let d = &cfg.dictionary;
    let dict: Box<dyn Dictionary> = match cfg.custom_dictionary {
        CustomDictionary::Constant => Box::new(constant_dictionary(dim)),
        CustomDictionary::Linear => Box::new(linear_dictionary(dim)),
        CustomDictionary::Gaussian => {
            let b = AxisBox::closed(vec![d.lower; dim], vec![d.upper; dim])?;
            Box::new(GaussianDictionary::grid(&b, d.per_axis, d.width, d.amplitude())?)
        }
    };
    let m = x.len();
    let quad = QuadratureRule::new(x.clone(), vec![1.0 / m as f64; m])?;
    let feats = evaluate_snapshots(dict.as_ref(), &x, &y)?.with_rank_tolerance(cfg.rank_tolerance);
    let pair = assemble_gram_pair(&feats, &quad)?;
    let k_edmd = edmd(&pair);
    let k = hermitian_dmd(&pair);
    let residual = hermiticity(&k);
    let eig = eigendecompose(&k)?;
    let samples: Vec<c64> = x.iter().map(|p| c64::new(p[cfg.custom_observable], 0.0)).collect();
    let obs = project_observable(&samples, &feats, &quad, &pair)?;
    let measure = spectral_measure(&eig, &obs)?;

    out.matrix("k_edmd.csv", k_edmd.k())?;
    out.matrix("k_hermitian.csv", k.k())?;
    let eig_rows: Vec<Vec<String>> = eig
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(j, &lam)| vec![(j + 1).to_string(), num(lam)])
        .collect();
    out.table("eigenvalues.csv", &["index", "computed"], &eig_rows)?;
    out.measure("measure.csv", &measure)?;
    let summary = json!({
        "experiment": "custom-snapshots",
        "snapshots": m,
        "state_dimension": dim,
        "dictionary": cfg.custom_dictionary,
        "dictionary_size": pair.size(),
        "retained_rank": pair.retained_rank(),
        "rank_deficient": pair.is_rank_deficient(),
        "gram_eigen_range": [pair.g_eigen_floor(), pair.g_eigen_max()],
        "hermiticity_residual": residual,
        "edmd_hermiticity_residual": k_edmd.hermiticity_residual(),
        "eigenpairs": eig_stats(&eig),
        "observable": cfg.custom_observable,
        "total_mass": measure.total_mass(),
        "observable_gram_norm_sq": obs.gram_norm_sq(),
        "runtime_seconds": start.elapsed().as_secs_f64(),
    });
    out.json("summary.json", &summary)?;
    fail_if_not_hermitian(residual)
}
