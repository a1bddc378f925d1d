//! Experiment pipelines: each run writes one CSV data file (header line,
//! comma separators, 17 significant digits) and one JSON report embedding
//! the full effective configuration. At a fixed worker count of 1 the same
//! configuration and seed reproduce both files byte for byte; ensemble tasks
//! are keyed by (seed, task index) and reduced in task order, so results are
//! scheduling-independent at any worker count.

use crate::config::ExperimentConfig;
use crate::report::{CheckRow, ReportRecord};
use crate::ConfigError;
use anyhow::{Context, Result};
use mbm_core::field::{mbm_path_fft, mbm_sample, MbmPath, QuadratureConfig};
use mbm_core::fractal::{est_boxdim_local, est_pboxdim_local, level_set_boxdim};
use mbm_core::gauss::lnd_slope;
use mbm_core::grid::{SampledPath, Samples1D, TimeGrid};
use mbm_core::hurst::{build_chirp, hurst_from_str, ChirpTarget, HurstFunction, TheoryFrontier};
use mbm_core::noise::gen_brownian;
use mbm_core::regularity::{est_exponents, est_frontier, DyadicScales, FrontierCurve};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

pub struct RunOutput {
    pub csv_path: PathBuf,
    pub report_path: PathBuf,
    pub record: ReportRecord,
}

/// Renders a float with 17 significant digits so the CSV round-trips the
/// full 64-bit value.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn snap_down(x: f64, step: f64) -> f64 {
    (x / step).floor() * step
}

fn snap_up(x: f64, step: f64) -> f64 {
    (x / step).ceil() * step
}

enum Target {
    Path,
    Chirp(ChirpTarget),
}

fn parse_target(cfg: &ExperimentConfig) -> Result<Target, ConfigError> {
    if cfg.target == "path" {
        return Ok(Target::Path);
    }
    let rest = cfg.target.strip_prefix("chirp").unwrap_or_default();
    let rest = rest.strip_prefix(':').unwrap_or(rest);
    let mut alpha = 0.5;
    let mut beta = 1.0;
    if !rest.trim().is_empty() {
        for part in rest.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("field 'target': expected key=value, got '{part}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| ConfigError(format!("field 'target': {k}: {e}")))?;
            match k.trim() {
                "alpha" => alpha = v,
                "beta" => beta = v,
                other => {
                    return Err(ConfigError(format!(
                        "field 'target': unknown chirp parameter '{other}'"
                    )))
                }
            }
        }
    }
    let chirp = build_chirp(alpha, beta)
        .map_err(|e| ConfigError(format!("field 'target': {e}")))?;
    Ok(Target::Chirp(chirp))
}

fn build_hurst(cfg: &ExperimentConfig) -> Result<HurstFunction, ConfigError> {
    let support = (cfg.t_min - cfg.rho - 1.0, cfg.t_max + cfg.rho + 1.0);
    hurst_from_str(&cfg.hurst, support, cfg.step())
        .map_err(|e| ConfigError(format!("field 'hurst': {e}")))
}

fn quad_config(cfg: &ExperimentConfig, max_abs_t: f64) -> QuadratureConfig {
    let mut q = QuadratureConfig::for_max_abs_t(max_abs_t);
    if let Some(v) = cfg.quad_u_trunc {
        q.u_trunc = v;
    }
    if let Some(v) = cfg.quad_tail_tol {
        q.tail_tol = v;
    }
    if let Some(v) = cfg.quad_anchor_delta {
        q.anchor_delta = v;
    }
    if let Some(v) = cfg.quad_fd_step {
        q.fd_step = v;
    }
    q
}

fn analysis_grid(cfg: &ExperimentConfig) -> Result<TimeGrid> {
    let step = cfg.step();
    Ok(TimeGrid::new(snap_down(cfg.t_min, step), snap_up(cfg.t_max, step), step)?)
}

/// Synthesizes the multifractional path for one ensemble task.
fn synth_path(cfg: &ExperimentConfig, hurst: &HurstFunction, seed: u64) -> Result<MbmPath> {
    let step = cfg.step();
    let grid = analysis_grid(cfg)?;
    if cfg.method == "quadrature" {
        let q = quad_config(cfg, grid.t_min().abs().max(grid.t_max().abs()));
        let u = snap_up(q.u_trunc, step);
        let bm = gen_brownian(&TimeGrid::new(-u, u, step)?, seed);
        return Ok(mbm_sample(&grid, hurst, cfg.a_plus, cfg.a_minus, &bm, &q)?);
    }
    let n_lo = snap_down(grid.t_min() - cfg.noise_margin, step);
    let bm = gen_brownian(&TimeGrid::new(n_lo, grid.t_max(), step)?, seed);
    Ok(mbm_path_fft(&grid, hurst, cfg.a_plus, cfg.a_minus, &bm)?)
}

fn task_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.n_seeds as u64).map(|k| cfg.seed.wrapping_add(k)).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Theory frontier for the analysis target at probe time `t`, when one is
/// known in closed form.
fn known_frontier(target: &Target, hurst: &HurstFunction, t: f64) -> Option<TheoryFrontier> {
    match target {
        Target::Chirp(c) => (t.abs() < 1e-12).then(|| c.frontier_at_origin()),
        Target::Path => match hurst.eval(t) {
            Ok(h) if hurst.kind_name() == "constant" => Some(TheoryFrontier::FbmLike { h }),
            _ => None,
        },
    }
}

fn deltas(cfg: &ExperimentConfig) -> Vec<f64> {
    (cfg.delta_coarse..=cfg.delta_fine)
        .map(|j| 2f64.powi(-(j as i32)))
        .collect()
}

fn scales(cfg: &ExperimentConfig) -> Result<DyadicScales> {
    Ok(DyadicScales::new(cfg.scale_coarse, cfg.scale_fine)?)
}

/// Runs the configured pipeline and writes `<out_dir>/<out_stem>.csv` and
/// `<out_dir>/<out_stem>.json`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    workers: usize,
) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("building the worker pool")?;
    let mut record = ReportRecord::new(
        format!("experiment-{}", cfg.pipeline),
        cfg.as_value(),
        cfg.seed,
        workers.max(1),
    );
    let csv = pool.install(|| execute(cfg, &mut record))?;

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let csv_path = out_dir.join(format!("{}.csv", cfg.out_stem));
    let report_path = out_dir.join(format!("{}.json", cfg.out_stem));
    std::fs::write(&csv_path, &csv)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    std::fs::write(&report_path, record.to_json())
        .with_context(|| format!("writing {}", report_path.display()))?;
    Ok(RunOutput { csv_path, report_path, record })
}

fn execute(cfg: &ExperimentConfig, record: &mut ReportRecord) -> Result<String> {
    let target = parse_target(cfg)?;
    let hurst = build_hurst(cfg)?;
    match cfg.pipeline.as_str() {
        "simulate" => simulate(cfg, &target, &hurst),
        "exponents" => exponents(cfg, &target, &hurst, record),
        "frontier" => frontier(cfg, &target, &hurst, record),
        "boxdim" => boxdim(cfg, &target, &hurst, record),
        "pboxdim" => pboxdim(cfg, &target, &hurst),
        "levelset" => levelset(cfg, &target, &hurst, record),
        "gauss" => gauss(cfg, &target, &hurst, record),
        other => Err(ConfigError(format!("field 'pipeline': unknown pipeline '{other}'")).into()),
    }
}

/// The sampled target for non-ensemble analysis: the chirp is deterministic,
/// so one sample serves every seed.
fn chirp_samples(cfg: &ExperimentConfig, chirp: &ChirpTarget) -> Result<Samples1D> {
    Ok(chirp.sample_on(&analysis_grid(cfg)?))
}

fn simulate(cfg: &ExperimentConfig, target: &Target, hurst: &HurstFunction) -> Result<String> {
    let mut csv = String::from("t,x\n");
    match target {
        Target::Chirp(c) => {
            let s = chirp_samples(cfg, c)?;
            for (i, t) in s.grid().points().enumerate() {
                csv.push_str(&format!("{},{}\n", csv_float(t), csv_float(s.values()[i])));
            }
        }
        Target::Path => {
            let path = synth_path(cfg, hurst, cfg.seed)?;
            for (i, t) in path.grid().points().enumerate() {
                csv.push_str(&format!("{},{}\n", csv_float(t), csv_float(path.values()[i])));
            }
        }
    }
    Ok(csv)
}

fn exponents(
    cfg: &ExperimentConfig,
    target: &Target,
    hurst: &HurstFunction,
    record: &mut ReportRecord,
) -> Result<String> {
    let sc = scales(cfg)?;
    let per_seed: Vec<Vec<(f64, f64, f64)>> = match target {
        Target::Chirp(c) => {
            let s = chirp_samples(cfg, c)?;
            let row = cfg
                .probes
                .iter()
                .map(|&t| {
                    let e = est_exponents(&s, t, sc)?;
                    Ok((e.pointwise.value(), e.local.value(), e.fit_r2))
                })
                .collect::<Result<Vec<_>>>()?;
            vec![row]
        }
        Target::Path => task_seeds(cfg)
            .par_iter()
            .map(|&seed| {
                let path = synth_path(cfg, hurst, seed)?;
                cfg.probes
                    .iter()
                    .map(|&t| {
                        let e = est_exponents(&path, t, sc)?;
                        Ok((e.pointwise.value(), e.local.value(), e.fit_r2))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let mut csv = String::from("t,pointwise,local,fit_r2\n");
    for (k, &t) in cfg.probes.iter().enumerate() {
        let pw = mean(&per_seed.iter().map(|r| r[k].0).collect::<Vec<_>>());
        let loc = mean(&per_seed.iter().map(|r| r[k].1).collect::<Vec<_>>());
        let r2 = mean(&per_seed.iter().map(|r| r[k].2).collect::<Vec<_>>());
        csv.push_str(&format!(
            "{},{},{},{}\n",
            csv_float(t),
            csv_float(pw),
            csv_float(loc),
            csv_float(r2)
        ));
        if let Some(th) = known_frontier(target, hurst, t) {
            record.push(CheckRow::distance(
                format!("pointwise-exponent t={t}"),
                th.pointwise_exp(),
                pw,
                cfg.tolerance,
            ));
            record.push(CheckRow::distance(
                format!("local-exponent t={t}"),
                th.local_exp(),
                loc,
                cfg.tolerance,
            ));
        }
    }
    Ok(csv)
}

/// Largest |estimate - theory| over the s' points where the theory curve is
/// inside the estimator's observable band [0, cap].
fn frontier_gap(curve_s: &[f64], curve_vals: &[f64], cap: f64, th: &TheoryFrontier) -> f64 {
    let mut worst = 0.0f64;
    for (&sp, &sg) in curve_s.iter().zip(curve_vals) {
        let want = th.eval(sp);
        if (0.0..=cap).contains(&want) {
            worst = worst.max((sg - want).abs());
        }
    }
    worst
}

fn frontier(
    cfg: &ExperimentConfig,
    target: &Target,
    hurst: &HurstFunction,
    record: &mut ReportRecord,
) -> Result<String> {
    let sc = scales(cfg)?;
    let t = cfg.probes[0];
    let sgrid = FrontierCurve::default_sprime_grid();
    let curves: Vec<FrontierCurve> = match target {
        Target::Chirp(c) => vec![est_frontier(&chirp_samples(cfg, c)?, t, &sgrid, sc)?],
        Target::Path => task_seeds(cfg)
            .par_iter()
            .map(|&seed| {
                let path = synth_path(cfg, hurst, seed)?;
                Ok(est_frontier(&path, t, &sgrid, sc)?)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let sigma_mean: Vec<f64> = (0..sgrid.len())
        .map(|i| mean(&curves.iter().map(|c| c.sigma()[i]).collect::<Vec<_>>()))
        .collect();

    let theory = known_frontier(target, hurst, t);
    let mut csv = String::from("s_prime,sigma_hat,sigma_theory\n");
    for (i, &sp) in sgrid.iter().enumerate() {
        let th = theory.as_ref().map_or(f64::NAN, |f| f.eval(sp));
        csv.push_str(&format!(
            "{},{},{}\n",
            csv_float(sp),
            csv_float(sigma_mean[i]),
            csv_float(th)
        ));
    }
    if let Some(th) = theory {
        let cap = curves[0].cap();
        record.push(CheckRow::distance(
            format!("max-frontier-gap t={t}"),
            0.0,
            frontier_gap(&sgrid, &sigma_mean, cap, &th),
            cfg.tolerance,
        ));
    }
    Ok(csv)
}

fn boxdim(
    cfg: &ExperimentConfig,
    target: &Target,
    hurst: &HurstFunction,
    record: &mut ReportRecord,
) -> Result<String> {
    let ds = deltas(cfg);
    let per_seed: Vec<Vec<(f64, f64, f64, f64)>> = match target {
        Target::Chirp(c) => {
            let s = chirp_samples(cfg, c)?;
            let row = cfg
                .probes
                .iter()
                .map(|&t| {
                    let e = est_boxdim_local(&s, t, cfg.rho, &ds)?;
                    Ok((e.value, e.lower, e.upper, e.fit_r2))
                })
                .collect::<Result<Vec<_>>>()?;
            vec![row]
        }
        Target::Path => task_seeds(cfg)
            .par_iter()
            .map(|&seed| {
                let path = synth_path(cfg, hurst, seed)?;
                cfg.probes
                    .iter()
                    .map(|&t| {
                        let e = est_boxdim_local(&path, t, cfg.rho, &ds)?;
                        Ok((e.value, e.lower, e.upper, e.fit_r2))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let mut csv = String::from("t,dim,lower,upper,fit_r2\n");
    for (k, &t) in cfg.probes.iter().enumerate() {
        let dim = mean(&per_seed.iter().map(|r| r[k].0).collect::<Vec<_>>());
        let lo = mean(&per_seed.iter().map(|r| r[k].1).collect::<Vec<_>>());
        let hi = mean(&per_seed.iter().map(|r| r[k].2).collect::<Vec<_>>());
        let r2 = mean(&per_seed.iter().map(|r| r[k].3).collect::<Vec<_>>());
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_float(t),
            csv_float(dim),
            csv_float(lo),
            csv_float(hi),
            csv_float(r2)
        ));
        let predicted = match target {
            Target::Chirp(c) if t.abs() < 1e-12 => Some(c.boxdim_at_origin()),
            Target::Path if hurst.kind_name() == "constant" => Some(2.0 - hurst.eval(t)?),
            _ => None,
        };
        if let Some(p) = predicted {
            record.push(CheckRow::distance(
                format!("graph-boxdim t={t}"),
                p,
                dim,
                cfg.tolerance,
            ));
        }
    }
    Ok(csv)
}

fn pboxdim(cfg: &ExperimentConfig, target: &Target, hurst: &HurstFunction) -> Result<String> {
    let ds = deltas(cfg);
    let metrics = cfg
        .probes
        .iter()
        .map(|&t| hurst.eval(t))
        .collect::<mbm_core::Result<Vec<_>>>()?;
    let per_seed: Vec<Vec<(f64, f64, f64, f64)>> = match target {
        Target::Chirp(c) => {
            let s = chirp_samples(cfg, c)?;
            let row = cfg
                .probes
                .iter()
                .zip(&metrics)
                .map(|(&t, &h)| {
                    let e = est_pboxdim_local(&s, t, cfg.rho, h, &ds)?;
                    Ok((e.value, e.lower, e.upper, e.fit_r2))
                })
                .collect::<Result<Vec<_>>>()?;
            vec![row]
        }
        Target::Path => task_seeds(cfg)
            .par_iter()
            .map(|&seed| {
                let path = synth_path(cfg, hurst, seed)?;
                cfg.probes
                    .iter()
                    .zip(&metrics)
                    .map(|(&t, &h)| {
                        let e = est_pboxdim_local(&path, t, cfg.rho, h, &ds)?;
                        Ok((e.value, e.lower, e.upper, e.fit_r2))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let mut csv = String::from("t,h_metric,pdim,lower,upper,fit_r2\n");
    for (k, &t) in cfg.probes.iter().enumerate() {
        let dim = mean(&per_seed.iter().map(|r| r[k].0).collect::<Vec<_>>());
        let lo = mean(&per_seed.iter().map(|r| r[k].1).collect::<Vec<_>>());
        let hi = mean(&per_seed.iter().map(|r| r[k].2).collect::<Vec<_>>());
        let r2 = mean(&per_seed.iter().map(|r| r[k].3).collect::<Vec<_>>());
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_float(t),
            csv_float(metrics[k]),
            csv_float(dim),
            csv_float(lo),
            csv_float(hi),
            csv_float(r2)
        ));
    }
    Ok(csv)
}

fn levelset(
    cfg: &ExperimentConfig,
    target: &Target,
    hurst: &HurstFunction,
    record: &mut ReportRecord,
) -> Result<String> {
    let ds = deltas(cfg);
    let estimates: Vec<(u64, f64, f64, f64, f64, bool)> = match target {
        Target::Chirp(c) => {
            let s = chirp_samples(cfg, c)?;
            let window = (s.grid().t_min(), s.grid().t_max());
            let e = level_set_boxdim(&s, cfg.level, window, &ds)?;
            vec![(cfg.seed, e.dim.value, e.dim.lower, e.dim.upper, e.dim.fit_r2, e.empty)]
        }
        Target::Path => task_seeds(cfg)
            .par_iter()
            .map(|&seed| {
                let path = synth_path(cfg, hurst, seed)?;
                let window = (path.grid().t_min(), path.grid().t_max());
                let e = level_set_boxdim(&path, cfg.level, window, &ds)?;
                Ok((seed, e.dim.value, e.dim.lower, e.dim.upper, e.dim.fit_r2, e.empty))
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let mut csv = String::from("seed,dim,lower,upper,fit_r2,empty\n");
    for &(seed, dim, lo, hi, r2, empty) in &estimates {
        csv.push_str(&format!(
            "{seed},{},{},{},{},{empty}\n",
            csv_float(dim),
            csv_float(lo),
            csv_float(hi),
            csv_float(r2)
        ));
    }
    if matches!(target, Target::Path) && hurst.kind_name() == "constant" {
        let h = hurst.eval(0.5 * (cfg.t_min + cfg.t_max))?;
        let dims: Vec<f64> = estimates.iter().map(|e| e.1).collect();
        record.push(CheckRow::distance(
            "level-set-dim",
            1.0 - h,
            mean(&dims),
            cfg.tolerance,
        ));
    }
    Ok(csv)
}

fn gauss(
    cfg: &ExperimentConfig,
    target: &Target,
    hurst: &HurstFunction,
    record: &mut ReportRecord,
) -> Result<String> {
    if !matches!(target, Target::Path) {
        return Err(ConfigError("field 'target': the gauss pipeline analyzes 'path' only".into()).into());
    }
    let radii: Vec<f64> = (cfg.radius_coarse..=cfg.radius_fine)
        .map(|j| 2f64.powi(-(j as i32)))
        .collect();
    let seeds = task_seeds(cfg);
    let mut csv = String::from("t,slope,two_h\n");
    for &t in &cfg.probes {
        let slope = lnd_slope(hurst, t, &radii, &seeds)?;
        let two_h = 2.0 * hurst.eval(t)?;
        csv.push_str(&format!(
            "{},{},{}\n",
            csv_float(t),
            csv_float(slope),
            csv_float(two_h)
        ));
        record.push(CheckRow::bracket(
            format!("lnd-slope-bound t={t}"),
            0.0,
            two_h + 0.3,
            slope,
        ));
    }
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_render_with_17_significant_digits() {
        assert_eq!(csv_float(0.5), "5.0000000000000000e-1");
        let x = 0.1234567890123456789;
        let back: f64 = csv_float(x).parse().unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn chirp_target_parses_and_rejects() {
        let mut cfg = ExperimentConfig::default();
        cfg.target = "chirp:alpha=0.5,beta=1".into();
        assert!(matches!(parse_target(&cfg).unwrap(), Target::Chirp(_)));
        cfg.target = "chirp:gamma=2".into();
        assert!(parse_target(&cfg).is_err());
        cfg.target = "path".into();
        assert!(matches!(parse_target(&cfg).unwrap(), Target::Path));
    }

    #[test]
    fn simulate_is_deterministic() {
        let dir = std::env::temp_dir().join("mbm-cli-sim-test");
        let mut cfg = ExperimentConfig::default();
        cfg.step_log2 = 6;
        cfg.out_stem = "sim".into();
        let a = run_experiment(&cfg, &dir, 1).unwrap();
        let first = std::fs::read(&a.csv_path).unwrap();
        let b = run_experiment(&cfg, &dir, 1).unwrap();
        let second = std::fs::read(&b.csv_path).unwrap();
        assert_eq!(first, second);
        assert!(a.record.rows.is_empty());
        let report = std::fs::read_to_string(&a.report_path).unwrap();
        let parsed = ReportRecord::from_json(&report).unwrap();
        assert_eq!(parsed.to_json(), report);
        std::fs::remove_dir_all(&dir).ok();
    }
}
