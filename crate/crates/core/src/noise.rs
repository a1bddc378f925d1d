//! Driving noise synthesis: the two-sided Brownian path that feeds the
//! moving-average field, and exact fractional Brownian samples used to build
//! irregular Hurst functions.

use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};
use crate::rng::{stream_rng, streams};
use rand_distr::{Distribution, Normal, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Largest grid the dense Cholesky fallback will factor.
const CHOLESKY_MAX_POINTS: usize = 4096;

/// A two-sided Brownian path anchored at the origin.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    grid: TimeGrid,
    values: Vec<f64>,
    seed: u64,
}

impl BrownianPath {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Wraps externally produced driving-path samples (for example the
    /// log-kernel conjugate path). The samples must be finite and anchored at
    /// zero at the origin, like every generated path.
    pub fn from_values(grid: TimeGrid, values: Vec<f64>, seed: u64) -> Result<BrownianPath> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("driving path contains non-finite values".into()));
        }
        if values[grid.zero_index()] != 0.0 {
            return Err(Error::Argument("driving path must vanish at the origin".into()));
        }
        Ok(BrownianPath { grid, values, seed })
    }

    /// Restriction to every `factor`-th grid point (same underlying noise on
    /// a coarser lattice). `factor` must be a power of two and the grid
    /// bounds must stay on the coarse lattice.
    pub fn restrict_by(&self, factor: usize) -> Result<BrownianPath> {
        let coarse = self.grid.coarsen(factor)?;
        let values: Vec<f64> = self.values.iter().step_by(factor).copied().collect();
        debug_assert_eq!(values.len(), coarse.len());
        Ok(BrownianPath { grid: coarse, values, seed: self.seed })
    }

    /// Path with the time axis negated: value at t equals the original value
    /// at -t. Used to evaluate the backward branch of the field through the
    /// forward-branch code.
    pub fn reflected(&self) -> BrownianPath {
        let mut values: Vec<f64> = self.values.iter().rev().copied().collect();
        let grid = self.grid.reflected();
        // keep the origin anchored exactly
        let z = grid.zero_index();
        debug_assert_eq!(values[z], 0.0);
        values[z] = 0.0;
        BrownianPath { grid, values, seed: self.seed }
    }
}

impl SampledPath for BrownianPath {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A fractional Brownian motion sample anchored at the origin.
#[derive(Debug, Clone)]
pub struct FbmPath {
    grid: TimeGrid,
    values: Vec<f64>,
    hurst: f64,
    seed: u64,
}

impl FbmPath {
    pub fn hurst(&self) -> f64 {
        self.hurst
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl SampledPath for FbmPath {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Generates a two-sided Brownian path on `grid`: independent centered
/// Gaussian increments of variance `step`, summed outward from the origin in
/// both directions. Deterministic in (grid, seed).
pub fn gen_brownian(grid: &TimeGrid, seed: u64) -> BrownianPath {
    let z = grid.zero_index();
    let n = grid.len();
    let normal = Normal::new(0.0, grid.step().sqrt()).expect("positive step");
    let mut values = vec![0.0; n];

    let mut rng = stream_rng(seed, streams::BROWNIAN_POS);
    let mut acc = 0.0;
    for v in values.iter_mut().skip(z + 1) {
        acc += normal.sample(&mut rng);
        *v = acc;
    }

    let mut rng = stream_rng(seed, streams::BROWNIAN_NEG);
    let mut acc = 0.0;
    for v in values.iter_mut().take(z).rev() {
        acc += normal.sample(&mut rng);
        *v = acc;
    }

    BrownianPath { grid: grid.clone(), values, seed }
}

/// Generates an exact fractional Brownian sample on `grid` with the given
/// Hurst exponent: circulant embedding of the increment covariance, falling
/// back to a dense Cholesky factorization when the embedding fails.
/// Deterministic in (grid, hurst, seed).
pub fn gen_fbm(grid: &TimeGrid, hurst: f64, seed: u64) -> Result<FbmPath> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Domain(format!(
            "hurst exponent must lie in (0, 1), got {hurst}"
        )));
    }
    let mut rng = stream_rng(seed, streams::FBM);
    let n = grid.len();
    let m = n - 1;

    let one_sided = match circulant_fgn(m, hurst, &mut rng) {
        Some(incs) => cumsum(&incs, grid.step().powf(hurst)),
        None => {
            let mut rng = stream_rng(seed, streams::FBM_FALLBACK);
            cholesky_fbm(grid, hurst, &mut rng)?
        }
    };

    // One-sided fBm has stationary increments, so shifting the anchor to the
    // grid origin preserves the covariance in grid coordinates.
    let z = grid.zero_index();
    let anchor = one_sided[z];
    let mut values: Vec<f64> = one_sided.iter().map(|v| v - anchor).collect();
    values[z] = 0.0;

    Ok(FbmPath { grid: grid.clone(), values, hurst, seed })
}

/// Autocovariance of unit-lag fractional Gaussian noise.
fn fgn_autocov(lag: f64, hurst: f64) -> f64 {
    let p = 2.0 * hurst;
    0.5 * ((lag + 1.0).abs().powf(p) - 2.0 * lag.abs().powf(p) + (lag - 1.0).abs().powf(p))
}

/// Davies-Harte sampler: `m` unit-lag fractional Gaussian noise values, or
/// None when the circulant embedding has a meaningfully negative eigenvalue.
fn circulant_fgn<R: rand::Rng>(m: usize, hurst: f64, rng: &mut R) -> Option<Vec<f64>> {
    let big = (2 * m).next_power_of_two().max(2);
    let half = big / 2;

    let mut row: Vec<Complex64> = (0..big)
        .map(|j| {
            let lag = if j <= half { j } else { big - j } as f64;
            Complex64::new(fgn_autocov(lag, hurst), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(big).process(&mut row);

    let lambda_max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
    let floor = -1e-8 * lambda_max.max(1.0);
    let mut lambda = Vec::with_capacity(big);
    for c in &row {
        if c.re < floor {
            return None;
        }
        lambda.push(c.re.max(0.0));
    }

    let scale = 1.0 / big as f64;
    let mut spectral = vec![Complex64::new(0.0, 0.0); big];
    let draw = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };
    spectral[0] = Complex64::new((lambda[0] * scale).sqrt() * draw(rng), 0.0);
    spectral[half] = Complex64::new((lambda[half] * scale).sqrt() * draw(rng), 0.0);
    for j in 1..half {
        let sd = (0.5 * lambda[j] * scale).sqrt();
        let re = sd * draw(rng);
        let im = sd * draw(rng);
        spectral[j] = Complex64::new(re, im);
        spectral[big - j] = Complex64::new(re, -im);
    }

    planner.plan_fft_forward(big).process(&mut spectral);
    Some(spectral.iter().take(m).map(|c| c.re).collect())
}

fn cumsum(increments: &[f64], scale: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for inc in increments {
        acc += inc * scale;
        out.push(acc);
    }
    out
}

/// Dense fallback: factor the exact value covariance on the one-sided index
/// lattice (origin row dropped, it is identically zero).
fn cholesky_fbm<R: rand::Rng>(grid: &TimeGrid, hurst: f64, rng: &mut R) -> Result<Vec<f64>> {
    let n = grid.len();
    if n > CHOLESKY_MAX_POINTS {
        return Err(Error::Synthesis(format!(
            "circulant embedding failed and the grid ({n} points) exceeds the \
             dense factorization limit ({CHOLESKY_MAX_POINTS})"
        )));
    }
    let p = 2.0 * hurst;
    let step = grid.step();
    let m = n - 1;
    let cov = nalgebra::DMatrix::from_fn(m, m, |i, j| {
        let s = (i + 1) as f64 * step;
        let t = (j + 1) as f64 * step;
        0.5 * (s.powf(p) + t.powf(p) - (s - t).abs().powf(p))
    });
    let mut attempt = cov.clone();
    let mut jitter = 0.0;
    let chol = loop {
        match nalgebra::Cholesky::new(attempt) {
            Some(c) => break c,
            None => {
                jitter = if jitter == 0.0 { 1e-12 } else { jitter * 100.0 };
                if jitter > 1e-6 {
                    return Err(Error::Synthesis(
                        "covariance factorization failed even with jitter".into(),
                    ));
                }
                attempt = cov.clone() + nalgebra::DMatrix::identity(m, m) * jitter;
            }
        }
    };
    let z = nalgebra::DVector::from_fn(m, |_, _| StandardNormal.sample(rng));
    let x = chol.l() * z;
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    out.extend(x.iter().copied());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{covariance, variance};
    use proptest::prelude::*;

    fn grid(t_min: f64, t_max: f64, step: f64) -> TimeGrid {
        TimeGrid::new(t_min, t_max, step).unwrap()
    }

    #[test]
    fn brownian_is_anchored_at_origin() {
        let g = grid(-2.0, 2.0, 2f64.powi(-10));
        let b = gen_brownian(&g, 1);
        assert_eq!(b.values()[g.zero_index()], 0.0);
    }

    #[test]
    fn brownian_is_reproducible_bitwise() {
        let g = grid(-1.0, 1.0, 2f64.powi(-6));
        let a = gen_brownian(&g, 42);
        let b = gen_brownian(&g, 42);
        assert_eq!(a.values(), b.values());
        let c = gen_brownian(&g, 43);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn brownian_unit_time_variance_matches_monte_carlo() {
        let g = grid(-1.0, 2.0, 2f64.powi(-8));
        let vals: Vec<f64> = (0..1000)
            .map(|seed| gen_brownian(&g, seed).value_at(1.0).unwrap())
            .collect();
        let v = variance(&vals);
        assert!((v - 1.0).abs() < 0.15, "sample variance {v}");
    }

    #[test]
    fn disjoint_increments_are_uncorrelated() {
        let g = grid(-1.0, 2.0, 2f64.powi(-8));
        let mut first = Vec::new();
        let mut second = Vec::new();
        for seed in 0..1000 {
            let b = gen_brownian(&g, seed);
            first.push(b.value_at(0.5).unwrap() - b.value_at(0.0).unwrap());
            second.push(b.value_at(1.5).unwrap() - b.value_at(1.0).unwrap());
        }
        let r = covariance(&first, &second) / (variance(&first) * variance(&second)).sqrt();
        assert!(r.abs() <= 0.1, "correlation {r}");
    }

    #[test]
    fn restriction_halves_resolution_and_keeps_values() {
        let g = grid(-1.0, 1.0, 2f64.powi(-8));
        let b = gen_brownian(&g, 7);
        let r = b.restrict_by(2).unwrap();
        assert_eq!(r.grid().len(), (b.grid().len() - 1) / 2 + 1);
        for i in 0..r.grid().len() {
            assert_eq!(r.values()[i], b.values()[2 * i]);
            assert_eq!(r.grid().point(i), b.grid().point(2 * i));
        }
    }

    #[test]
    fn restricted_increments_have_doubled_variance() {
        let g = grid(-1.0, 1.0, 2f64.powi(-8));
        let step = g.step();
        let mut incs = Vec::new();
        for seed in 0..800 {
            let r = gen_brownian(&g, seed).restrict_by(2).unwrap();
            let vals = r.values();
            let k = r.grid().zero_index();
            incs.push(vals[k + 1] - vals[k]);
        }
        let v = variance(&incs);
        let target = 2.0 * step;
        assert!((v - target).abs() < 0.2 * target, "variance {v} vs {target}");
    }

    #[test]
    fn reflection_swaps_sides() {
        let g = grid(-1.0, 2.0, 0.25);
        let b = gen_brownian(&g, 3);
        let r = b.reflected();
        assert_eq!(r.value_at(-2.0).unwrap(), b.value_at(2.0).unwrap());
        assert_eq!(r.value_at(1.0).unwrap(), b.value_at(-1.0).unwrap());
        assert_eq!(r.value_at(0.0).unwrap(), 0.0);
    }

    #[test]
    fn fbm_is_anchored_and_reproducible() {
        let g = grid(-1.0, 1.0, 2f64.powi(-6));
        for &h in &[0.2, 0.5, 0.8] {
            let a = gen_fbm(&g, h, 11).unwrap();
            assert_eq!(a.values()[g.zero_index()], 0.0);
            let b = gen_fbm(&g, h, 11).unwrap();
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn fbm_rejects_bad_hurst() {
        let g = grid(-1.0, 1.0, 0.25);
        assert!(gen_fbm(&g, 0.0, 1).is_err());
        assert!(gen_fbm(&g, 1.0, 1).is_err());
        assert!(gen_fbm(&g, -0.3, 1).is_err());
    }

    #[test]
    fn fbm_halves_brownian_covariance() {
        // hurst = 1/2 reduces to Brownian motion: cov(value(0.5), value(1)) = 0.5
        let g = grid(-1.0, 2.0, 2f64.powi(-8));
        let mut a = Vec::new();
        let mut b = Vec::new();
        for seed in 0..500 {
            let p = gen_fbm(&g, 0.5, seed).unwrap();
            a.push(p.value_at(0.5).unwrap());
            b.push(p.value_at(1.0).unwrap());
        }
        let c = covariance(&a, &b);
        assert!((c - 0.5).abs() < 0.1, "covariance {c}");
    }

    #[test]
    fn fbm_covariance_matches_closed_form() {
        // hurst = 0.3: cov(value(0.5), value(2)) = (0.5^0.6 + 2^0.6 - 1.5^0.6)/2 = 0.450
        let g = grid(-1.0, 2.0, 2f64.powi(-8));
        let mut a = Vec::new();
        let mut b = Vec::new();
        for seed in 0..500 {
            let p = gen_fbm(&g, 0.3, seed).unwrap();
            a.push(p.value_at(0.5).unwrap());
            b.push(p.value_at(2.0).unwrap());
        }
        let c = covariance(&a, &b);
        assert!((c - 0.450).abs() < 0.1, "covariance {c}");
    }

    #[test]
    fn fbm_variance_scales_self_similarly() {
        let g = grid(-1.0, 2.0, 2f64.powi(-8));
        for &h in &[0.3, 0.5, 0.7] {
            let probes = [0.25, 0.5, 1.0, 2.0];
            let mut samples: Vec<Vec<f64>> = vec![Vec::new(); probes.len()];
            for seed in 0..500 {
                let p = gen_fbm(&g, h, seed).unwrap();
                for (k, &t) in probes.iter().enumerate() {
                    samples[k].push(p.value_at(t).unwrap());
                }
            }
            let ratios: Vec<f64> = probes
                .iter()
                .zip(&samples)
                .map(|(&t, s)| variance(s) / t.powf(2.0 * h))
                .collect();
            let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
            let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
            assert!(hi / lo < 1.3, "h={h}: normalized variances {ratios:?}");
        }
    }

    #[test]
    fn cholesky_fallback_agrees_with_embedding_statistics() {
        // force the fallback and check the same closed-form covariance
        let g = grid(-0.5, 2.0, 2f64.powi(-4));
        let mut a = Vec::new();
        let mut b = Vec::new();
        for seed in 0..500 {
            let mut rng = stream_rng(seed, streams::FBM_FALLBACK);
            let vals = cholesky_fbm(&g, 0.3, &mut rng).unwrap();
            let z = g.zero_index();
            let at = |t: f64| vals[g.index_of(t).unwrap()] - vals[z];
            a.push(at(0.5));
            b.push(at(2.0));
        }
        let c = covariance(&a, &b);
        assert!((c - 0.450).abs() < 0.1, "fallback covariance {c}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn fbm_is_deterministic_for_any_seed(seed in any::<u64>(), h in 0.05f64..0.95) {
            let g = grid(-0.5, 0.5, 2f64.powi(-5));
            let a = gen_fbm(&g, h, seed).unwrap();
            let b = gen_fbm(&g, h, seed).unwrap();
            prop_assert_eq!(a.values(), b.values());
        }
    }
}
