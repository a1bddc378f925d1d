//! Empirical second-order diagnostics: ensemble covariance with a guarded
//! positive-semidefinite projection, Gaussian conditional variance through
//! Schur complements with a pseudo-inverse, the local-nondeterminism slope
//! check on level-matching conditioning points, and the incremental-variance
//! equivalence ratio.

use crate::error::{Error, Result};
use crate::field::mbm_path_fft;
use crate::grid::{SampledPath, TimeGrid};
use crate::hurst::HurstFunction;
use crate::noise::{gen_brownian, gen_fbm};
use crate::stats::linear_fit;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Minimum ensemble size accepted by the covariance estimator.
pub const MIN_SEEDS: usize = 100;

/// Probe counts are capped to keep the empirical covariance well-conditioned
/// at a few hundred to a few thousand seeds.
pub const MAX_PROBES: usize = 20;

/// Empirical covariance of a path ensemble at fixed probe times, symmetrized
/// and projected onto the positive-semidefinite cone. Construction fails when
/// the input is further from that cone than estimation noise explains.
#[derive(Debug, Clone)]
pub struct CovMatrix {
    probe_times: Vec<f64>,
    entries: DMatrix<f64>,
    n_seeds: usize,
}

impl CovMatrix {
    pub fn new(probe_times: Vec<f64>, entries: DMatrix<f64>, n_seeds: usize) -> Result<Self> {
        let m = probe_times.len();
        if m == 0 || m > MAX_PROBES {
            return Err(Error::Argument(format!(
                "probe count must lie in 1..={MAX_PROBES}, got {m}"
            )));
        }
        if entries.nrows() != m || entries.ncols() != m {
            return Err(Error::Argument(format!(
                "covariance is {}x{} but there are {m} probes",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if probe_times.iter().any(|t| !t.is_finite())
            || probe_times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Argument("probe times must be finite and increasing".into()));
        }
        let scale = entries.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        for i in 0..m {
            for j in (i + 1)..m {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-9 * scale.max(1e-12) {
                    return Err(Error::Argument(format!(
                        "entries ({i}, {j}) and ({j}, {i}) break symmetry"
                    )));
                }
            }
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l));
        let floor = -1e-10 * lam_max.max(1.0);
        if eig.eigenvalues.iter().any(|&l| l < floor) {
            return Err(Error::Statistics(format!(
                "matrix is far from positive semidefinite (eigenvalue {})",
                eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        let clipped = DVector::from_iterator(m, eig.eigenvalues.iter().map(|&l| l.max(0.0)));
        let projected = &eig.eigenvectors
            * DMatrix::from_diagonal(&clipped)
            * eig.eigenvectors.transpose();
        Ok(CovMatrix { probe_times, entries: projected, n_seeds })
    }

    pub fn probe_times(&self) -> &[f64] {
        &self.probe_times
    }

    pub fn n_seeds(&self) -> usize {
        self.n_seeds
    }

    pub fn dim(&self) -> usize {
        self.probe_times.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

fn cov_from_rows(rows: &[Vec<f64>], probe_times: &[f64]) -> Result<CovMatrix> {
    let n = rows.len();
    if n < MIN_SEEDS {
        return Err(Error::Statistics(format!(
            "covariance estimation needs at least {MIN_SEEDS} seeds, got {n}"
        )));
    }
    let m = probe_times.len();
    let mut means = vec![0.0; m];
    for row in rows {
        for (acc, &v) in means.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for acc in &mut means {
        *acc /= n as f64;
    }
    let mut cov = DMatrix::zeros(m, m);
    for row in rows {
        for i in 0..m {
            let di = row[i] - means[i];
            for j in i..m {
                cov[(i, j)] += di * (row[j] - means[j]);
            }
        }
    }
    for i in 0..m {
        for j in i..m {
            let v = cov[(i, j)] / (n as f64 - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    CovMatrix::new(probe_times.to_vec(), cov, n)
}

/// Unbiased sample covariance of the ensemble values at `probe_times`,
/// symmetrized and PSD-projected.
pub fn empirical_cov<P: SampledPath>(ensemble: &[P], probe_times: &[f64]) -> Result<CovMatrix> {
    if probe_times.is_empty() || probe_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("probe times must be nonempty and increasing".into()));
    }
    let rows = ensemble
        .iter()
        .map(|p| probe_times.iter().map(|&t| p.value_at(t)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    cov_from_rows(&rows, probe_times)
}

/// Gaussian conditional variance of the probe `target` given the probes in
/// `conditioners`, via the Schur complement with an eigenvalue pseudo-inverse
/// of the conditioner block (so repeated or linearly dependent conditioners
/// are harmless).
pub fn cond_var(cov: &CovMatrix, target: usize, conditioners: &[usize]) -> Result<f64> {
    let d = cov.dim();
    if target >= d || conditioners.iter().any(|&k| k >= d) {
        return Err(Error::Argument(format!(
            "probe indices must lie below {d}"
        )));
    }
    let s_tt = cov.entry(target, target);
    if conditioners.is_empty() {
        return Ok(s_tt);
    }
    let m = conditioners.len();
    let block = DMatrix::from_fn(m, m, |i, j| cov.entry(conditioners[i], conditioners[j]));
    let cross = DVector::from_fn(m, |i, _| cov.entry(target, conditioners[i]));
    let eig = SymmetricEigen::new(block);
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l));
    let tol = 1e-12 * lam_max.max(1e-300);
    let rotated = eig.eigenvectors.transpose() * cross;
    let mut explained = 0.0;
    for i in 0..m {
        if eig.eigenvalues[i] > tol {
            explained += rotated[i] * rotated[i] / eig.eigenvalues[i];
        }
    }
    Ok((s_tt - explained).max(0.0))
}

/// Grid and ensemble plumbing shared by the Monte Carlo diagnostics: sample
/// the process behind `hurst` at the probe times for every seed. Constant
/// Hurst functions use the circulant-embedding fBm generator (the slope
/// diagnostics are invariant to the section's overall normalization);
/// anything else gets a genuine multifractional path from the FFT sampler.
fn ensemble_rows(hurst: &HurstFunction, probes: &[f64], seeds: &[u64]) -> Result<Vec<Vec<f64>>> {
    if probes.is_empty() {
        return Err(Error::Argument("need at least one probe".into()));
    }
    let lo = probes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = probes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut min_gap = f64::INFINITY;
    let mut sorted = probes.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in sorted.windows(2) {
        if w[1] > w[0] {
            min_gap = min_gap.min(w[1] - w[0]);
        }
    }
    if !min_gap.is_finite() {
        min_gap = (hi - lo).max(1e-3);
    }
    // resolve the tightest probe gap and keep interpolation error negligible
    let step = 2f64.powi(((min_gap / 8.0).log2().floor() as i32).min(-12));
    let pad = 8.0 * step;
    let g_lo = ((lo - pad) / step).floor() * step;
    let g_hi = ((hi + pad) / step).ceil() * step;
    let grid = TimeGrid::new(g_lo, g_hi, step)?;

    let constant_level = {
        let h0 = hurst.eval(probes[0])?;
        let mut all_same = true;
        for i in 0..grid.len() {
            if (hurst.eval(grid.point(i))? - h0).abs() > 1e-12 {
                all_same = false;
                break;
            }
        }
        all_same.then_some(h0)
    };

    let mut rows = Vec::with_capacity(seeds.len());
    if let Some(h) = constant_level {
        // the fBm generator anchors its path at the time origin
        let span = TimeGrid::new(g_lo.min(0.0), g_hi.max(0.0), step)?;
        for &seed in seeds {
            let path = gen_fbm(&span, h, seed)?;
            rows.push(
                probes.iter().map(|&t| path.value_at(t)).collect::<Result<Vec<f64>>>()?,
            );
        }
    } else {
        let n_lo = ((g_lo - 2.0) / step).floor() * step;
        let noise_grid = TimeGrid::new(n_lo, g_hi, step)?;
        for &seed in seeds {
            let bm = gen_brownian(&noise_grid, seed);
            let path = mbm_path_fft(&grid, hurst, 1.0, 0.0, &bm)?;
            rows.push(
                probes.iter().map(|&t| path.value_at(t)).collect::<Result<Vec<f64>>>()?,
            );
        }
    }
    Ok(rows)
}

/// Local-nondeterminism slope at `t`: for each radius, conditions the path
/// value at `t` on its value at a level-matching point of the Hurst function
/// at that distance, and returns the regression slope of `log2` conditional
/// variance against `log2` radius. A slope materially above `2 H(t)` would
/// mean the conditioning points improve on the generic local-nondeterminism
/// rate, which the level-matching construction rules out.
pub fn lnd_slope(
    hurst: &HurstFunction,
    t: f64,
    radii: &[f64],
    seeds: &[u64],
) -> Result<f64> {
    if radii.len() < 3 {
        return Err(Error::Argument(format!(
            "need at least 3 radii for a slope, got {}",
            radii.len()
        )));
    }
    if radii.len() + 1 > MAX_PROBES {
        return Err(Error::Argument(format!(
            "at most {} radii fit the probe cap",
            MAX_PROBES - 1
        )));
    }
    for &r in radii {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Argument(format!("radius {r} must be positive")));
        }
        let l = r.log2();
        if (l - l.round()).abs() > 1e-9 {
            return Err(Error::Argument(format!("radius {r} is not a power of two")));
        }
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Argument("radii must be strictly decreasing".into()));
    }
    hurst.eval(t)?;
    let mut matches = Vec::with_capacity(radii.len());
    for &r in radii {
        let s = hurst.level_matching_point(t, r).ok_or_else(|| {
            Error::Applicability(format!(
                "no level-matching point at radius {r} for this Hurst function"
            ))
        })?;
        matches.push(s);
    }
    let mut probes: Vec<f64> = std::iter::once(t).chain(matches.iter().cloned()).collect();
    probes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    probes.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    if probes.len() != radii.len() + 1 {
        return Err(Error::Applicability(
            "distinct radii collapse onto the same level-matching point".into(),
        ));
    }
    let target = probes.iter().position(|&p| p == t).expect("t is a probe");
    let rows = ensemble_rows(hurst, &probes, seeds)?;
    let cov = cov_from_rows(&rows, &probes)?;

    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    for (&r, &s) in radii.iter().zip(&matches) {
        let k = probes.iter().position(|&p| p == s).expect("matching point is a probe");
        let cv = cond_var(&cov, target, &[k])?;
        if cv <= 0.0 {
            return Err(Error::Statistics(format!(
                "degenerate conditional variance at radius {r}"
            )));
        }
        xs.push(r.log2());
        ys.push(cv.log2());
    }
    let (slope, _, _) = linear_fit(&xs, &ys);
    Ok(slope)
}

/// Extremes of the empirical ratio between increment second moments and the
/// local model `|u - v|^{2 H(t)} + |H(u) - H(v)|^2` over probe pairs inside
/// `B(t, rho)`.
#[derive(Debug, Clone, Copy)]
pub struct RatioInterval {
    pub min: f64,
    pub max: f64,
}

pub fn incr_var_check(
    hurst: &HurstFunction,
    t: f64,
    rho: f64,
    seeds: &[u64],
) -> Result<RatioInterval> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Argument(format!("radius {rho} must be positive")));
    }
    let h_t = hurst.eval(t)?;
    let probes: Vec<f64> = (-4..=4).map(|k| t + k as f64 * rho / 4.0).collect();
    let h_vals = probes.iter().map(|&u| hurst.eval(u)).collect::<Result<Vec<f64>>>()?;
    let rows = ensemble_rows(hurst, &probes, seeds)?;
    if rows.len() < MIN_SEEDS {
        return Err(Error::Statistics(format!(
            "increment check needs at least {MIN_SEEDS} seeds, got {}",
            rows.len()
        )));
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for i in 0..probes.len() {
        for j in (i + 1)..probes.len() {
            let mut second = 0.0;
            for row in &rows {
                let d = row[i] - row[j];
                second += d * d;
            }
            second /= rows.len() as f64;
            let model = (probes[i] - probes[j]).abs().powf(2.0 * h_t)
                + (h_vals[i] - h_vals[j]).powi(2);
            let ratio = second / model;
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
        }
    }
    Ok(RatioInterval { min: min_ratio, max: max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brownian_ensemble(n: usize, grid: &TimeGrid) -> Vec<crate::noise::BrownianPath> {
        (0..n).map(|k| gen_brownian(grid, 7000 + k as u64)).collect()
    }

    #[test]
    fn brownian_covariance_and_conditionals_match_the_oracle() {
        let grid = TimeGrid::new(0.0, 1.0, 2f64.powi(-8)).unwrap();
        let ensemble = brownian_ensemble(500, &grid);
        let probes = [0.25, 0.5, 0.75, 1.0];
        let cov = empirical_cov(&ensemble, &probes).unwrap();
        assert_eq!(cov.dim(), 4);
        assert_eq!(cov.n_seeds(), 500);
        // min(s, t) oracle
        assert!((cov.entry(1, 3) - 0.5).abs() <= 0.1, "cov(0.5, 1.0) read {}", cov.entry(1, 3));
        for i in 0..4 {
            assert!(cov.entry(i, i) >= 0.0);
        }

        // conditional variances: Var(B_1 | B_0.5) = 0.5, nonincreasing in the
        // conditioner set, zero once the target conditions on itself
        let v = cond_var(&cov, 3, &[1]).unwrap();
        assert!((v - 0.5).abs() <= 0.1, "Var(B_1 | B_half) read {v}");
        let full = cond_var(&cov, 3, &[]).unwrap();
        assert!((full - 1.0).abs() <= 0.15, "Var(B_1) read {full}");
        let v12 = cond_var(&cov, 3, &[1, 2]).unwrap();
        let v012 = cond_var(&cov, 3, &[0, 1, 2]).unwrap();
        assert!(v12 <= v + 1e-12 && v012 <= v12 + 1e-12);
        let single_min = [0usize, 1, 2]
            .iter()
            .map(|&k| cond_var(&cov, 3, &[k]).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(v012 <= single_min + 1e-12);
        assert!(cond_var(&cov, 2, &[0, 2]).unwrap() <= 1e-10);
        assert!(cond_var(&cov, 2, &[2, 2, 2]).unwrap() <= 1e-10);
        assert!(cond_var(&cov, 5, &[0]).is_err());
        assert!(cond_var(&cov, 0, &[9]).is_err());
    }

    #[test]
    fn covariance_construction_guards_its_invariants() {
        let times = vec![0.1, 0.2];
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(CovMatrix::new(times.clone(), asym, 100).is_err());
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            CovMatrix::new(times.clone(), indef, 100),
            Err(Error::Statistics(_))
        ));
        let ok = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        assert!(CovMatrix::new(vec![0.2, 0.1], ok.clone(), 100).is_err());
        assert!(CovMatrix::new(vec![0.1], ok.clone(), 100).is_err());
        let too_many: Vec<f64> = (0..21).map(|k| k as f64).collect();
        assert!(CovMatrix::new(too_many, DMatrix::zeros(21, 21), 100).is_err());
        // tiny negative eigenvalues are clipped to zero
        let eps = 1e-12;
        let near = DMatrix::from_row_slice(2, 2, &[eps, 2.0 * eps, 2.0 * eps, eps]);
        let cov = CovMatrix::new(times.clone(), near, 100).unwrap();
        let eig = SymmetricEigen::new(cov.matrix().clone());
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-16));
        // constant ensembles give the zero matrix
        let grid = TimeGrid::new(0.0, 1.0, 0.25).unwrap();
        let flat: Vec<_> = (0..120)
            .map(|_| crate::grid::Samples1D::from_fn(grid.clone(), |_| 3.0))
            .collect();
        let cov = empirical_cov(&flat, &[0.25, 0.75]).unwrap();
        assert!(cov.matrix().iter().all(|&v| v.abs() <= 1e-15));
        // and too few seeds are rejected
        let short: Vec<_> = flat[..50].to_vec();
        assert!(matches!(
            empirical_cov(&short, &[0.25, 0.75]),
            Err(Error::Statistics(_))
        ));
    }

    #[test]
    fn conditional_variance_slope_on_the_analytic_fbm_covariance() {
        // deterministic check of the regression machinery: exact fBm
        // covariance, conditional variance against a single point at
        // distance r decays like r^{2h}
        let h = 0.35;
        let t0 = 0.5;
        let radii: Vec<f64> = (3..=9).map(|j| 2f64.powi(-j)).collect();
        let mut probes = vec![t0];
        probes.extend(radii.iter().map(|&r| t0 + r));
        probes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cov_fn = |s: f64, t: f64| {
            0.5 * (s.abs().powf(2.0 * h) + t.abs().powf(2.0 * h) - (s - t).abs().powf(2.0 * h))
        };
        let m = probes.len();
        let entries = DMatrix::from_fn(m, m, |i, j| cov_fn(probes[i], probes[j]));
        let cov = CovMatrix::new(probes.clone(), entries, MIN_SEEDS).unwrap();
        let target = probes.iter().position(|&p| p == t0).unwrap();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &r in &radii {
            let k = probes.iter().position(|&p| p == t0 + r).unwrap();
            let cv = cond_var(&cov, target, &[k]).unwrap();
            xs.push(r.log2());
            ys.push(cv.log2());
        }
        let (slope, _, r2) = linear_fit(&xs, &ys);
        assert!(
            (slope - 2.0 * h).abs() <= 0.05,
            "analytic conditional slope {slope} misses {}",
            2.0 * h
        );
        assert!(r2 > 0.999);
        // scale locality: dropping the coarsest radius leaves the regression
        // on unchanged data, so the slope barely moves
        let (sub, _, _) = linear_fit(&xs[1..], &ys[1..]);
        assert!((sub - slope).abs() <= 0.05);
    }

    #[test]
    fn lnd_slope_recovers_the_constant_level_rate() {
        let hurst = HurstFunction::constant(0.3).unwrap();
        let radii: Vec<f64> = (4..=8).map(|j| 2f64.powi(-j)).collect();
        let seeds: Vec<u64> = (0..200).collect();
        let slope = lnd_slope(&hurst, 0.5, &radii, &seeds).unwrap();
        assert!(
            (slope - 0.6).abs() <= 0.3,
            "constant-level slope {slope} misses 2h = 0.6"
        );
    }

    #[test]
    fn lnd_slope_on_the_oscillating_level_stays_at_the_generic_rate() {
        let hurst = HurstFunction::chirp_hurst_at(0.5);
        let radii: Vec<f64> = (4..=7).map(|j| 2f64.powi(-j)).collect();
        let seeds: Vec<u64> = (0..200).collect();
        let slope = lnd_slope(&hurst, 0.5, &radii, &seeds).unwrap();
        assert!(
            slope <= 2.0 * 0.75 + 0.3,
            "oscillating-level slope {slope} beats the generic rate"
        );
        assert!(slope > 0.0, "conditional variance should still shrink with the radius");
        // away from the oscillation center there is no matching sequence
        assert!(matches!(
            lnd_slope(&hurst, 0.55, &radii, &seeds),
            Err(Error::Applicability(_))
        ));
    }

    #[test]
    fn lnd_slope_validates_its_inputs() {
        let hurst = HurstFunction::constant(0.5).unwrap();
        let seeds: Vec<u64> = (0..MIN_SEEDS as u64).collect();
        assert!(lnd_slope(&hurst, 0.5, &[0.25, 0.125], &seeds).is_err());
        assert!(lnd_slope(&hurst, 0.5, &[0.25, 0.2, 0.1], &seeds).is_err());
        assert!(lnd_slope(&hurst, 0.5, &[0.125, 0.25, 0.5], &seeds).is_err());
        let many: Vec<f64> = (1..=20).map(|j| 2f64.powi(-j)).collect();
        assert!(lnd_slope(&hurst, 0.5, &many, &seeds).is_err());
    }

    #[test]
    fn increment_ratios_stay_within_a_decade() {
        let seeds: Vec<u64> = (0..300).collect();
        let flat = HurstFunction::constant(0.4).unwrap();
        let ri = incr_var_check(&flat, 0.5, 0.05, &seeds).unwrap();
        assert!(ri.min > 0.0);
        assert!(
            ri.max / ri.min <= 10.0,
            "constant-level ratio spread {} too wide",
            ri.max / ri.min
        );
        let wavy = HurstFunction::smooth_sine(0.6, 0.15, 2.0).unwrap();
        let ri = incr_var_check(&wavy, 0.5, 0.05, &seeds).unwrap();
        assert!(
            ri.max / ri.min <= 10.0,
            "smooth-level ratio spread {} too wide",
            ri.max / ri.min
        );
        assert!(incr_var_check(&flat, 0.5, -0.1, &seeds).is_err());
    }

    proptest! {
        #[test]
        fn conditioning_never_increases_variance(entries in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let a = DMatrix::from_fn(4, 3, |i, j| entries[3 * i + j]);
            let gram = &a * a.transpose();
            let times = vec![0.1, 0.2, 0.3, 0.4];
            let cov = CovMatrix::new(times, gram, MIN_SEEDS).unwrap();
            let v1 = cond_var(&cov, 0, &[1]).unwrap();
            let v12 = cond_var(&cov, 0, &[1, 2]).unwrap();
            let v123 = cond_var(&cov, 0, &[1, 2, 3]).unwrap();
            prop_assert!(v12 <= v1 + 1e-9);
            prop_assert!(v123 <= v12 + 1e-9);
            let mins = [1usize, 2, 3]
                .iter()
                .map(|&k| cond_var(&cov, 0, &[k]).unwrap())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(v123 <= mins + 1e-9);
        }
    }
}
