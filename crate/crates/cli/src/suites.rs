//! Named verification suites. Each suite is a self-contained check with
//! registered parameters; it reports one [`CheckRow`] per claim so a run
//! prints exactly which quantitative statement held or failed. The registry
//! is the single list the `verify` subcommand dispatches on.

use crate::report::{CheckRow, ReportRecord};
use crate::ConfigError;
use anyhow::Result;
use mbm_core::field::{
    fbf_deriv_path_fft, fbf_eval, fbf_path_fft, fbf_wb, mbm_path_fft, mbm_sample,
    mbm_stochint_oracle, verify_wb_relation, MbmPath, QuadratureConfig, Side,
};
use mbm_core::fractal::{
    dim_bounds_from_frontier, est_boxdim_local, est_pboxdim_local, level_set_boxdim,
    parabolic_transfer_bounds, predict_hausdim_graph,
};
use mbm_core::gauss::lnd_slope;
use mbm_core::grid::{SampledPath, Samples1D, TimeGrid};
use mbm_core::hurst::{build_chirp, hurst_from_str, HurstFunction, TheoryFrontier};
use mbm_core::noise::{gen_brownian, gen_fbm};
use mbm_core::regularity::{
    est_exponents, est_frontier, multiplicity_hat, predict_frontier_mbm, predict_pointwise_mbm,
    DyadicScales, FrontierCurve, Multiplicity,
};
use mbm_core::stats::{covariance, linear_fit, mean, variance};
use serde_json::json;
use std::time::Instant;

pub struct Suite {
    pub name: &'static str,
    /// Acceptance criterion number this suite settles, 1 through 12.
    pub criterion: usize,
    pub summary: &'static str,
    run: fn() -> Result<ReportRecord>,
}

impl Suite {
    pub fn run(&self) -> Result<ReportRecord> {
        (self.run)()
    }
}

static REGISTRY: [Suite; 12] = [
    Suite {
        name: "representation-equivalence",
        criterion: 1,
        summary: "kernel quadrature agrees with the stochastic-integral oracle and improves under refinement",
        run: s01_representation_equivalence,
    },
    Suite {
        name: "brownian-collapse",
        criterion: 2,
        summary: "both field branches at index 1/2 reduce to plus/minus the driving Brownian path",
        run: s02_brownian_collapse,
    },
    Suite {
        name: "span-independence",
        criterion: 3,
        summary: "field values do not depend on the anchoring window of the kernel",
        run: s03_span_independence,
    },
    Suite {
        name: "well-balanced",
        criterion: 4,
        summary: "well-balanced field: renormalized branch sum, log-kernel relation, index-1/2 covariance",
        run: s04_well_balanced,
    },
    Suite {
        name: "chirp-calibration",
        criterion: 5,
        summary: "frontier, local box dimension, and dimension bounds on the closed-form chirp",
        run: s05_chirp_calibration,
    },
    Suite {
        name: "fbm-regularity",
        criterion: 6,
        summary: "exponents and frontier of a rough constant-index path and of its index-derivative field",
        run: s06_fbm_regularity,
    },
    Suite {
        name: "irregular-hurst",
        criterion: 7,
        summary: "multiplicity, frontier, and pointwise exponents under a rough sampled index function",
        run: s07_irregular_hurst,
    },
    Suite {
        name: "graph-dimension",
        criterion: 8,
        summary: "graph box dimension driven by the rougher of path index and index-function regularity",
        run: s08_graph_dimension,
    },
    Suite {
        name: "parabolic-dimension",
        criterion: 9,
        summary: "parabolic box counting, metric-change sandwich, and the dimension transfer formula",
        run: s09_parabolic_dimension,
    },
    Suite {
        name: "jump-law",
        criterion: 10,
        summary: "variance of field increments in the index argument scales with the squared index gap",
        run: s10_jump_law,
    },
    Suite {
        name: "lnd-optimality",
        criterion: 11,
        summary: "conditional-variance decay rate at level-matching points",
        run: s11_lnd_optimality,
    },
    Suite {
        name: "level-sets",
        criterion: 12,
        summary: "level-set box dimension of Brownian and constant-index paths",
        run: s12_level_sets,
    },
];

pub fn registry() -> &'static [Suite; 12] {
    &REGISTRY
}

pub fn run_suite(name: &str) -> Result<ReportRecord> {
    match REGISTRY.iter().find(|s| s.name == name) {
        Some(s) => s.run(),
        None => {
            let known: Vec<&str> = REGISTRY.iter().map(|s| s.name).collect();
            Err(ConfigError(format!(
                "unknown suite '{name}'; available suites: {}",
                known.join(", ")
            ))
            .into())
        }
    }
}

fn tg(lo: f64, hi: f64, step_exp: i32) -> Result<TimeGrid> {
    Ok(TimeGrid::new(lo, hi, 2f64.powi(step_exp))?)
}

/// Largest |curve - theory| over the s' points of `fr` inside `range`.
fn worst_gap(fr_sprime: &[f64], fr_sigma: &[f64], range: (f64, f64), theory: impl Fn(f64) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for (&sp, &sg) in fr_sprime.iter().zip(fr_sigma) {
        if (range.0..=range.1).contains(&sp) {
            worst = worst.max((sg - theory(sp)).abs());
        }
    }
    worst
}

fn sup_rel_err(sample: &MbmPath, oracle: &MbmPath) -> f64 {
    let scale = oracle.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    sample
        .values()
        .iter()
        .zip(oracle.values())
        .fold(0.0f64, |m, (s, o)| m.max((s - o).abs()))
        / scale
}

fn s01_representation_equivalence() -> Result<ReportRecord> {
    let started = Instant::now();
    let seed = 11;
    let params = json!({
        "hursts": [0.3, 0.7],
        "step_log2": 13,
        "noise_span": 21.0,
        "seed": seed,
        "eval_window": [0.953125, 1.0],
    });
    let mut rec = ReportRecord::new("representation-equivalence", params, seed, 1);

    let bm_fine = gen_brownian(&tg(-21.0, 21.0, -14)?, seed);
    let bm = bm_fine.restrict_by(2)?;
    let q = QuadratureConfig::default();
    let eval = tg(0.953125, 1.0, -13)?;
    let eval_fine = tg(0.953125, 1.0, -14)?;
    for &h in &[0.3, 0.7] {
        let hurst = hurst_from_str(&format!("constant:h={h}"), (0.0, 1.0), eval.step())?;
        let coarse = sup_rel_err(
            &mbm_sample(&eval, &hurst, 1.0, 0.0, &bm, &q)?,
            &mbm_stochint_oracle(&eval, &hurst, 1.0, 0.0, &bm)?,
        );
        let fine = sup_rel_err(
            &mbm_sample(&eval_fine, &hurst, 1.0, 0.0, &bm_fine, &q)?,
            &mbm_stochint_oracle(&eval_fine, &hurst, 1.0, 0.0, &bm_fine)?,
        );
        rec.push(CheckRow::distance(
            format!("sup-rel-err h={h}"),
            0.0,
            coarse,
            5e-2,
        ));
        rec.push(CheckRow::bracket(
            format!("refinement-ratio h={h}"),
            0.0,
            1.0 - 1e-9,
            fine / coarse,
        ));
    }
    rec.push(CheckRow::bracket(
        "runtime-seconds",
        0.0,
        60.0,
        started.elapsed().as_secs_f64(),
    ));
    Ok(rec)
}

fn s02_brownian_collapse() -> Result<ReportRecord> {
    let seed = 2;
    let params = json!({"step_log2": 7, "noise_span": 21.0, "seed": seed, "points": 100});
    let mut rec = ReportRecord::new("brownian-collapse", params, seed, 1);
    let bm = gen_brownian(&tg(-21.0, 21.0, -7)?, seed);
    let q = QuadratureConfig::default();
    let mut worst_plus = 0.0f64;
    let mut worst_minus = 0.0f64;
    for k in 1..=100 {
        let t = k as f64 * 2f64.powi(-7);
        let b = bm.value_at(t)?;
        worst_plus = worst_plus.max((fbf_eval(Side::Plus, t, 0.5, &bm, &q)? - b).abs());
        worst_minus = worst_minus.max((fbf_eval(Side::Minus, t, 0.5, &bm, &q)? + b).abs());
    }
    rec.push(CheckRow::distance("plus-branch-max-gap", 0.0, worst_plus, 1e-10));
    rec.push(CheckRow::distance("minus-branch-max-gap", 0.0, worst_minus, 1e-10));
    Ok(rec)
}

fn s03_span_independence() -> Result<ReportRecord> {
    let seed = 17;
    let params = json!({
        "step_log2": 8, "noise_span": 21.0, "seed": seed,
        "anchor_windows": [1.0, 2.0], "hursts": [0.2, 0.4], "times": [0.5, 1.0],
    });
    let mut rec = ReportRecord::new("span-independence", params, seed, 1);
    let bm = gen_brownian(&tg(-21.0, 21.0, -8)?, seed);
    let q1 = QuadratureConfig::default();
    let q2 = QuadratureConfig { anchor_delta: 2.0, ..QuadratureConfig::default() };
    for &h in &[0.2, 0.4] {
        for &t in &[0.5, 1.0] {
            let a = fbf_eval(Side::Plus, t, h, &bm, &q1)?;
            let b = fbf_eval(Side::Plus, t, h, &bm, &q2)?;
            rec.push(CheckRow::distance(
                format!("anchor-rel-diff h={h} t={t}"),
                0.0,
                ((a - b) / a).abs(),
                1e-8,
            ));
        }
    }
    Ok(rec)
}

fn s04_well_balanced() -> Result<ReportRecord> {
    let params = json!({
        "branch_sum": {"seed": 41, "step_log2": 8, "h": 0.7, "t": 0.7},
        "pathwise": {"seed": 7, "step_log2": 13, "h": 0.7, "t": 0.7},
        "covariance": {"seeds": 500, "seed_base": 1000, "step_log2": 10, "probes": [0.5, 0.75, 1.0]},
    });
    let mut rec = ReportRecord::new("well-balanced", params, 41, 1);
    let q = QuadratureConfig::default();

    let bm = gen_brownian(&tg(-21.0, 21.0, -8)?, 41);
    let wb = fbf_wb(0.7, 0.7, &bm, &q)?;
    let plus = fbf_eval(Side::Plus, 0.7, 0.7, &bm, &q)?;
    let minus = fbf_eval(Side::Minus, 0.7, 0.7, &bm, &q)?;
    let sum = (plus + minus) / (0.7 - 0.5);
    rec.push(CheckRow::distance(
        "renormalized-branch-sum-rel-gap",
        0.0,
        (wb - sum).abs() / wb.abs().max(1.0),
        1e-7,
    ));

    let bm13 = gen_brownian(&tg(-21.0, 21.0, -13)?, 7);
    let rel = verify_wb_relation(0.7, 0.7, &bm13, &q)?;
    rec.push(CheckRow::distance(
        "log-kernel-relation-rel-gap",
        0.0,
        rel.gap / rel.lhs.abs().max(1e-12),
        0.10,
    ));

    let probes = [0.5, 0.75, 1.0];
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); probes.len()];
    for seed in 0..500 {
        let path = gen_brownian(&tg(-21.0, 21.0, -10)?, 1000 + seed);
        for (k, &t) in probes.iter().enumerate() {
            samples[k].push(fbf_wb(t, 0.5, &path, &q)?);
        }
    }
    let mut ratios = Vec::new();
    for i in 0..probes.len() {
        for j in i..probes.len() {
            ratios.push(covariance(&samples[i], &samples[j]) / probes[i].min(probes[j]));
        }
    }
    rec.push(CheckRow::distance(
        "half-index-covariance-spread",
        0.0,
        variance(&ratios).sqrt() / mean(&ratios),
        0.10,
    ));
    Ok(rec)
}

fn s05_chirp_calibration() -> Result<ReportRecord> {
    let started = Instant::now();
    let params = json!({
        "alpha": 0.5, "beta": 1.0,
        "frontier": {"step_log2": 16, "scales": [3, 12], "sprime_range": [-0.5, 1.0]},
        "boxdim": {"step_log2": 20, "delta_log2": [12, 18], "rho": 0.1},
    });
    let mut rec = ReportRecord::new("chirp-calibration", params, 0, 1);
    let chirp = build_chirp(0.5, 1.0)?;

    let f = chirp.sample_on(&tg(-0.1875, 0.1875, -16)?);
    let sc = DyadicScales::new(3, 12)?;
    let fr = est_frontier(&f, 0.0, &FrontierCurve::default_sprime_grid(), sc)?;
    let theory = chirp.frontier_at_origin();
    rec.push(CheckRow::distance(
        "frontier-max-gap",
        0.0,
        worst_gap(fr.sprime(), fr.sigma(), (-0.5, 1.0), |sp| theory.eval(sp)),
        0.1,
    ));

    let fine = chirp.sample_on(&tg(-0.1875, 0.1875, -20)?);
    let deltas: Vec<f64> = (12..=18).map(|j| 2f64.powi(-j)).collect();
    let est = est_boxdim_local(&fine, 0.0, 0.1, &deltas)?;
    rec.push(CheckRow::distance(
        "local-boxdim-at-origin",
        chirp.boxdim_at_origin(),
        est.value,
        0.1,
    ));

    let (box_upper, haus_upper) = dim_bounds_from_frontier(
        fr.eval(1.0),
        fr.eval(fr.sprime()[fr.sprime().len() - 1]),
    );
    rec.push(CheckRow::distance(
        "frontier-boxdim-bound-attained",
        chirp.boxdim_at_origin(),
        box_upper,
        0.1,
    ));
    rec.push(CheckRow::distance("frontier-hausdim-bound-attained", 1.0, haus_upper, 0.1));
    rec.push(CheckRow::bracket(
        "runtime-seconds",
        0.0,
        120.0,
        started.elapsed().as_secs_f64(),
    ));
    Ok(rec)
}

fn s06_fbm_regularity() -> Result<ReportRecord> {
    let seed = 5;
    let params = json!({
        "h": 0.3, "step_log2": 16, "seed": seed, "t": 0.5,
        "scales": [2, 12], "sprime_range": [-0.3, 1.0],
        "derivative_noise_span": 4.0, "derivative_seed": 22,
        "derivative_scales": [3, 12],
    });
    let mut rec = ReportRecord::new("fbm-regularity", params, seed, 1);
    let sc = DyadicScales::new(2, 12)?;
    let sgrid = FrontierCurve::default_sprime_grid();
    let theory = TheoryFrontier::FbmLike { h: 0.3 };

    let f = gen_fbm(&tg(0.0, 1.0, -16)?, 0.3, seed)?;
    let est = est_exponents(&f, 0.5, sc)?;
    rec.push(CheckRow::distance("pointwise-exponent", 0.3, est.pointwise.value(), 0.1));
    rec.push(CheckRow::distance("local-exponent", 0.3, est.local.value(), 0.1));
    let fr = est_frontier(&f, 0.5, &sgrid, sc)?;
    rec.push(CheckRow::distance(
        "frontier-max-gap",
        0.0,
        worst_gap(fr.sprime(), fr.sigma(), (-0.3, 1.0), |sp| theory.eval(sp)),
        0.1,
    ));

    let sc_d = DyadicScales::new(3, 12)?;
    let bm = gen_brownian(&tg(-4.0, 4.0, -16)?, 22);
    let df = fbf_deriv_path_fft(Side::Plus, &bm, 0.3)?;
    let est_d = est_exponents(&df, 0.5, sc_d)?;
    rec.push(CheckRow::distance(
        "derivative-pointwise-exponent",
        0.3,
        est_d.pointwise.value(),
        0.1,
    ));
    rec.push(CheckRow::distance(
        "derivative-local-exponent",
        0.3,
        est_d.local.value(),
        0.1,
    ));
    let fr_d = est_frontier(&df, 0.5, &sgrid, sc_d)?;
    rec.push(CheckRow::distance(
        "derivative-frontier-max-gap",
        0.0,
        worst_gap(fr_d.sprime(), fr_d.sigma(), (-0.3, 1.0), |sp| theory.eval(sp)),
        0.1,
    ));
    Ok(rec)
}

fn s07_irregular_hurst() -> Result<ReportRecord> {
    let params = json!({
        "hurst": "fbm:a=0.375,lo=0.5,hi=0.75,seed=42",
        "support": [0.0, 1.0],
        "step_log2": 16, "noise_span": 3.0, "seeds": 10, "seed_base": 300,
        "probes": [0.38, 0.48, 0.62, 0.78, 0.90], "scales": [7, 12],
    });
    let mut rec = ReportRecord::new("irregular-hurst", params, 300, 1);
    let step = 2f64.powi(-16);
    let hurst = hurst_from_str("fbm:a=0.375,lo=0.5,hi=0.75,seed=42", (0.0, 1.0), step)?;
    let grid = tg(0.0, 1.0, -16)?;
    let sc = DyadicScales::new(7, 12)?;
    let probes = [0.38, 0.48, 0.62, 0.78, 0.90];
    let sgrid = FrontierCurve::default_sprime_grid();
    let n_seeds = 10u64;

    let mut sigma_acc: Vec<Vec<f64>> = vec![vec![0.0; sgrid.len()]; probes.len()];
    let mut pw_acc = vec![0.0f64; probes.len()];
    for seed in 0..n_seeds {
        let bm = gen_brownian(&tg(-3.0, 1.0, -16)?, 300 + seed);
        let x = mbm_path_fft(&grid, &hurst, 1.0, 0.0, &bm)?;
        for (k, &t) in probes.iter().enumerate() {
            let fr = est_frontier(&x, t, &sgrid, sc)?;
            for (i, &s) in fr.sigma().iter().enumerate() {
                sigma_acc[k][i] += s / n_seeds as f64;
            }
            pw_acc[k] += est_exponents(&x, t, sc)?.pointwise.value() / n_seeds as f64;
        }
    }

    let q = QuadratureConfig { u_trunc: 3.0, ..QuadratureConfig::default() };
    let bm_quad = gen_brownian(&tg(-3.0, 3.0, -16)?, 300).restrict_by(16)?;
    let frontier_h = FrontierCurve::from_fn(&sgrid, 1.0, |sp| {
        TheoryFrontier::FbmLike { h: 0.375 }.eval(sp)
    })?;
    for (k, &t) in probes.iter().enumerate() {
        let h_t = hurst.eval(t)?;
        let m = multiplicity_hat(t, h_t, 1.0, 0.0, &bm_quad, &q)?;
        let m_num = match m {
            Multiplicity::Finite(j) => j as f64,
            Multiplicity::Infinite => f64::INFINITY,
        };
        rec.push(CheckRow::distance(format!("multiplicity t={t}"), 1.0, m_num, 0.5));

        let (pred, _exact) = predict_frontier_mbm(h_t, &frontier_h, Multiplicity::Finite(1))?;
        let mut worst = 0.0f64;
        for (i, &sp) in sgrid.iter().enumerate() {
            let want = pred.eval(sp);
            if want >= 0.0 {
                worst = worst.max((sigma_acc[k][i] - want).abs());
            }
        }
        rec.push(CheckRow::distance(format!("frontier-max-gap t={t}"), 0.0, worst, 0.15));

        rec.push(CheckRow::distance(
            format!("pointwise-exponent t={t}"),
            predict_pointwise_mbm(h_t, 0.375, Multiplicity::Finite(1)),
            pw_acc[k],
            0.1,
        ));
    }
    Ok(rec)
}

/// Shared ensemble for the rough-index dimension suites: sampled-index
/// multifractional paths on [0, 1].
fn rough_index_paths(
    spec: &str,
    step_exp: i32,
    noise_lo: f64,
    seed_base: u64,
    n_seeds: u64,
) -> Result<(HurstFunction, Vec<MbmPath>)> {
    let step = 2f64.powi(step_exp);
    let hurst = hurst_from_str(spec, (-0.5, 1.5), step)?;
    let grid = tg(0.0, 1.0, step_exp)?;
    let mut paths = Vec::with_capacity(n_seeds as usize);
    for seed in 0..n_seeds {
        let bm = gen_brownian(&TimeGrid::new(noise_lo, 1.0, step)?, seed_base + seed);
        paths.push(mbm_path_fft(&grid, &hurst, 1.0, 0.0, &bm)?);
    }
    Ok((hurst, paths))
}

fn s08_graph_dimension() -> Result<ReportRecord> {
    let params = json!({
        "hurst": "fbm:a=0.3,lo=0.5,hi=0.9,seed=12",
        "step_log2": 17, "noise_lo": -3.0, "seeds": 10, "seed_base": 800,
        "probes": [0.6, 0.65, 0.75, 0.8, 0.85], "delta_log2": [8, 13], "rho": 0.1,
    });
    let mut rec = ReportRecord::new("graph-dimension", params, 800, 1);
    let (hurst, paths) =
        rough_index_paths("fbm:a=0.3,lo=0.5,hi=0.9,seed=12", -17, -3.0, 800, 10)?;
    let probes = [0.6, 0.65, 0.75, 0.8, 0.85];
    let deltas: Vec<f64> = (8..=13).map(|j| 2f64.powi(-j)).collect();
    for &t in &probes {
        let mut acc = 0.0;
        for x in &paths {
            acc += est_boxdim_local(x, t, 0.1, &deltas)?.value;
        }
        let h_t = hurst.eval(t)?;
        rec.push(CheckRow::distance(
            format!("graph-boxdim t={t}"),
            (2.0 - 0.3f64).max(2.0 - h_t),
            acc / paths.len() as f64,
            0.15,
        ));
    }
    Ok(rec)
}

fn s09_parabolic_dimension() -> Result<ReportRecord> {
    let params = json!({
        "segment": {"step_log2": 13, "h": [0.5, 0.8], "delta_log2": [1, 6]},
        "fbm_graphs": [
            {"a": 0.5, "h_metric": 0.8, "step_log2": 16, "delta_log2": [4, 9], "seeds": 5, "seed_base": 100},
            {"a": 0.3, "h_metric": 0.5, "step_log2": 16, "delta_log2": [1, 6], "seeds": 5, "seed_base": 200},
        ],
        "sandwich": {"h_pair": [0.8, 0.5], "weierstrass": [0.4, 13]},
        "transfer": {"hurst": "fbm:a=0.3,lo=0.5,hi=0.9,seed=12", "step_log2": 16,
                      "seeds": 5, "seed_base": 800, "probes": [0.65, 0.75, 0.85]},
    });
    let mut rec = ReportRecord::new("parabolic-dimension", params, 100, 1);

    let seg_grid = tg(0.0, 1.0, -13)?;
    let segment = Samples1D::from_fn(seg_grid.clone(), |_| 0.0);
    let line = Samples1D::from_fn(seg_grid.clone(), |u| u);
    let weier = Samples1D::from_fn(seg_grid, |u| {
        (0..19)
            .map(|k| 2f64.powf(-0.4 * k as f64) * (std::f64::consts::TAU * 2f64.powi(k) * u).cos())
            .sum()
    });
    let d_coarse: Vec<f64> = (1..=6).map(|j| 2f64.powi(-j)).collect();
    let d_fine: Vec<f64> = (4..=9).map(|j| 2f64.powi(-j)).collect();
    for &h in &[0.5, 0.8] {
        let est = est_pboxdim_local(&segment, 0.5, 0.5, h, &d_coarse)?;
        rec.push(CheckRow::distance(
            format!("segment-pboxdim h={h}"),
            1.0 / h,
            est.value,
            0.1,
        ));
    }

    for &(a, h_metric, dlo, dhi, seed_base, want) in &[
        (0.5f64, 0.8f64, 4i32, 9i32, 100u64, 1.625f64),
        (0.3, 0.5, 1, 6, 200, 2.4),
    ] {
        let ds: Vec<f64> = (dlo..=dhi).map(|j| 2f64.powi(-j)).collect();
        let grid = tg(0.0, 1.0, -16)?;
        let mut acc = 0.0;
        for seed in 0..5 {
            let f = gen_fbm(&grid, a, seed_base + seed)?;
            acc += est_pboxdim_local(&f, 0.5, 0.5, h_metric, &ds)?.value;
        }
        rec.push(CheckRow::distance(
            format!("fbm-graph-pboxdim a={a} h={h_metric}"),
            want,
            acc / 5.0,
            0.2,
        ));
    }

    let (h2, h1) = (0.5, 0.8);
    for (name, f) in [("segment", &segment), ("line", &line), ("weierstrass", &weier)] {
        let d2 = est_pboxdim_local(f, 0.5, 0.5, h2, &d_coarse)?.value;
        let d1 = est_pboxdim_local(f, 0.5, 0.5, h1, &d_fine)?.value;
        let (lo, hi) = parabolic_transfer_bounds(d2, h1, h2)?;
        rec.push(CheckRow::bracket(
            format!("transfer-sandwich-{name}"),
            lo - 0.1,
            hi + 0.1,
            d1,
        ));
    }

    let (hurst, paths) =
        rough_index_paths("fbm:a=0.3,lo=0.5,hi=0.9,seed=12", -16, -3.0, 800, 5)?;
    let box_deltas: Vec<f64> = (7..=12).map(|j| 2f64.powi(-j)).collect();
    let pbox_deltas: Vec<f64> = (3..=8).map(|j| 2f64.powi(-j)).collect();
    for &t in &[0.65, 0.75, 0.85] {
        let h_t = hurst.eval(t)?;
        let mut pdim = 0.0;
        let mut bdim = 0.0;
        for x in &paths {
            pdim += est_pboxdim_local(x, t, 0.25, h_t, &pbox_deltas)?.value / paths.len() as f64;
            bdim += est_boxdim_local(x, t, 0.1, &box_deltas)?.value / paths.len() as f64;
        }
        rec.push(CheckRow::distance(
            format!("hausdim-transfer t={t}"),
            predict_hausdim_graph(h_t, pdim)?,
            bdim,
            0.2,
        ));
    }
    Ok(rec)
}

fn s10_jump_law() -> Result<ReportRecord> {
    let params = json!({
        "base_h": 0.4, "dh": [0.05, 0.1, 0.2], "t": 1.0,
        "step_log2": 8, "noise_range": [-6.0, 1.0], "seeds": 500, "seed_base": 7000,
    });
    let mut rec = ReportRecord::new("jump-law", params, 7000, 1);
    let grid = tg(-6.0, 1.0, -8)?;
    let dhs = [0.05, 0.1, 0.2];
    let mut diffs: Vec<Vec<f64>> = vec![Vec::new(); dhs.len()];
    for seed in 0..500 {
        let bm = gen_brownian(&grid, 7000 + seed);
        let x0 = fbf_path_fft(Side::Plus, &bm, 0.4)?.value_at(1.0)?;
        for (i, &dh) in dhs.iter().enumerate() {
            let xi = fbf_path_fft(Side::Plus, &bm, 0.4 + dh)?.value_at(1.0)?;
            diffs[i].push(xi - x0);
        }
    }
    let xs: Vec<f64> = dhs.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = diffs.iter().map(|d| variance(d).ln()).collect();
    let (slope, _, _) = linear_fit(&xs, &ys);
    rec.push(CheckRow::distance("jump-variance-slope", 2.0, slope, 0.2));
    Ok(rec)
}

fn s11_lnd_optimality() -> Result<ReportRecord> {
    let params = json!({
        "constant": {"h": 0.3, "t": 0.5, "radius_log2": [4, 8]},
        "oscillating": {"hurst": "chirp-hurst:center=0.5", "t": 0.5, "radius_log2": [4, 7]},
        "seeds": 1000, "seed_base": 4000,
    });
    let mut rec = ReportRecord::new("lnd-optimality", params, 4000, 1);
    let seeds: Vec<u64> = (0..1000).map(|k| 4000 + k).collect();

    let hc = hurst_from_str("constant:h=0.3", (0.0, 1.0), 2f64.powi(-12))?;
    let radii: Vec<f64> = (4..=8).map(|j| 2f64.powi(-j)).collect();
    let slope = lnd_slope(&hc, 0.5, &radii, &seeds)?;
    rec.push(CheckRow::distance("constant-index-slope", 0.6, slope, 0.3));

    let hosc = hurst_from_str("chirp-hurst:center=0.5", (0.0, 1.0), 2f64.powi(-12))?;
    let radii_osc: Vec<f64> = (4..=7).map(|j| 2f64.powi(-j)).collect();
    let slope_osc = lnd_slope(&hosc, 0.5, &radii_osc, &seeds)?;
    let bound = 2.0 * hosc.eval(0.5)? + 0.3;
    rec.push(CheckRow::bracket("oscillating-index-slope", 0.0, bound, slope_osc));
    Ok(rec)
}

fn s12_level_sets() -> Result<ReportRecord> {
    let params = json!({
        "step_log2": 16, "delta_log2": [4, 10], "seeds": 10, "seed_base": 9000,
        "constant_h": [0.3, 0.7],
    });
    let mut rec = ReportRecord::new("level-sets", params, 9000, 1);
    let grid = tg(0.0, 1.0, -16)?;
    let deltas: Vec<f64> = (4..=10).map(|j| 2f64.powi(-j)).collect();
    let n = 10u64;

    let mut acc = 0.0;
    for seed in 0..n {
        let b = gen_brownian(&grid, 9000 + seed);
        acc += level_set_boxdim(&b, 0.0, (0.0, 1.0), &deltas)?.dim.value / n as f64;
    }
    rec.push(CheckRow::distance("brownian-zero-set-dim", 0.5, acc, 0.15));

    for &h in &[0.3, 0.7] {
        let mut acc = 0.0;
        for seed in 0..n {
            let f = gen_fbm(&grid, h, 9100 + seed)?;
            let level = f.value_at(0.5)?;
            acc += level_set_boxdim(&f, level, (0.0, 1.0), &deltas)?.dim.value / n as f64;
        }
        rec.push(CheckRow::bracket(
            format!("constant-index-level-set h={h}"),
            1.0 - h - 0.15,
            1.0 - h + 0.15,
            acc,
        ));
    }
    Ok(rec)
}
