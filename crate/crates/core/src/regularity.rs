//! Hölder exponent estimation and the 2-microlocal frontier.
//!
//! Everything here works on plain sampled paths. Oscillations are measured
//! over dyadic balls and annuli around the target time, log-log slopes are
//! extracted as lower envelopes (the estimated quantities are defined by
//! "for all scales" bounds, so a least-squares mean fit would be biased by
//! the loosest scales), and estimated frontiers are projected onto the cone
//! of admissible curves: nondecreasing, concave, slopes between 0 and 1.
//!
//! The second half of the module contains the closed-form predictions for
//! multifractional fields: given the frontier of the Hurst function and the
//! order of the first non-vanishing field derivative, produce the predicted
//! frontier and pointwise exponent of the sampled path.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::field::{fbf_partial, QuadratureConfig, Side};
use crate::grid::SampledPath;
use crate::noise::BrownianPath;
use crate::stats::{linear_fit, project_concave_monotone};

/// Exponent estimates saturate here: a sampled path cannot witness more
/// regularity than Lipschitz, so anything at or above the cap only means
/// "at least this smooth".
pub const DEFAULT_CAP: f64 = 1.0;

/// Minimum number of dyadic scales an estimator needs.
pub const MIN_SCALES: usize = 6;

/// Minimum number of samples the smallest ball must contain.
pub const MIN_BALL_SAMPLES: usize = 16;

/// An estimated exponent, which is either a genuine value or a lower bound
/// when the measurement ran into the resolution cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExponentValue {
    Estimate(f64),
    AtCap(f64),
}

impl ExponentValue {
    fn from_raw(raw: f64, cap: f64) -> ExponentValue {
        if raw >= cap || !raw.is_finite() {
            ExponentValue::AtCap(cap)
        } else {
            ExponentValue::Estimate(raw)
        }
    }

    /// The numeric value (the cap itself for saturated estimates).
    pub fn value(&self) -> f64 {
        match *self {
            ExponentValue::Estimate(v) => v,
            ExponentValue::AtCap(c) => c,
        }
    }

    pub fn is_capped(&self) -> bool {
        matches!(self, ExponentValue::AtCap(_))
    }
}

/// Pointwise and local Hölder exponents measured at one time point.
#[derive(Clone, Debug)]
pub struct ExponentEstimate {
    /// Slope of log ball-oscillation against log radius (least squares).
    pub pointwise: ExponentValue,
    /// Lower-envelope slope of log oscillation against log separation,
    /// measured inside a fixed neighbourhood.
    pub local: ExponentValue,
    /// r^2 of the pointwise least-squares fit (1 when degenerate).
    pub fit_r2: f64,
    /// (smallest, largest) radius used.
    pub scales_used: (f64, f64),
}

/// A dyadic range of scales 2^-coarse, ..., 2^-fine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicScales {
    coarse: u32,
    fine: u32,
}

impl DyadicScales {
    pub fn new(coarse: u32, fine: u32) -> Result<DyadicScales> {
        if fine <= coarse {
            return Err(Error::Argument(format!(
                "scale range 2^-{coarse}..2^-{fine} is empty"
            )));
        }
        Ok(DyadicScales { coarse, fine })
    }

    pub fn coarse(&self) -> u32 {
        self.coarse
    }

    pub fn fine(&self) -> u32 {
        self.fine
    }

    pub fn count(&self) -> usize {
        (self.fine - self.coarse + 1) as usize
    }

    pub fn rho(&self, j: u32) -> f64 {
        2f64.powi(-(j as i32))
    }

    pub fn rho_max(&self) -> f64 {
        self.rho(self.coarse)
    }

    pub fn rho_min(&self) -> f64 {
        self.rho(self.fine)
    }
}

/// An estimated or theoretical 2-microlocal frontier: sigma as a function of
/// s' on a uniform grid, saturating at `cap`.
#[derive(Clone, Debug)]
pub struct FrontierCurve {
    sprime: Vec<f64>,
    sigma: Vec<f64>,
    cap: f64,
}

impl FrontierCurve {
    pub fn new(sprime: Vec<f64>, sigma: Vec<f64>, cap: f64) -> Result<FrontierCurve> {
        if sprime.len() != sigma.len() || sprime.len() < 2 {
            return Err(Error::Argument(format!(
                "frontier needs matching grids of at least 2 points, got {} and {}",
                sprime.len(),
                sigma.len()
            )));
        }
        if !(cap > 0.0) || !cap.is_finite() {
            return Err(Error::Argument(format!("cap {cap} must be positive")));
        }
        if sprime.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("s' grid must be strictly increasing".into()));
        }
        if sprime.iter().chain(sigma.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Argument("frontier values must be finite".into()));
        }
        Ok(FrontierCurve { sprime, sigma, cap })
    }

    /// Builds a curve by evaluating `f` on the grid, clipped at `cap`.
    pub fn from_fn(sprime: &[f64], cap: f64, f: impl Fn(f64) -> f64) -> Result<FrontierCurve> {
        let sigma = sprime.iter().map(|&s| f(s).min(cap)).collect();
        FrontierCurve::new(sprime.to_vec(), sigma, cap)
    }

    /// The standard estimation grid: s' from -1 to 2 in steps of 0.05.
    pub fn default_sprime_grid() -> Vec<f64> {
        (0..=60).map(|k| -1.0 + 0.05 * k as f64).collect()
    }

    pub fn sprime(&self) -> &[f64] {
        &self.sprime
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Linear interpolation, extended by the end values outside the grid.
    pub fn eval(&self, s: f64) -> f64 {
        let n = self.sprime.len();
        if s <= self.sprime[0] {
            return self.sigma[0];
        }
        if s >= self.sprime[n - 1] {
            return self.sigma[n - 1];
        }
        let k = self.sprime.partition_point(|&x| x < s);
        let (s0, s1) = (self.sprime[k - 1], self.sprime[k]);
        let w = (s - s0) / (s1 - s0);
        self.sigma[k - 1] * (1.0 - w) + self.sigma[k] * w
    }

    /// The pointwise exponent encoded by the frontier: -inf{s' : sigma > 0},
    /// read off by linear interpolation of the zero crossing. Returns the
    /// negated grid edge when the crossing falls outside the grid.
    pub fn pointwise_readoff(&self) -> f64 {
        if self.sigma[0] > 0.0 {
            return -self.sprime[0];
        }
        for k in 1..self.sprime.len() {
            if self.sigma[k] > 0.0 {
                let (z0, z1) = (self.sigma[k - 1], self.sigma[k]);
                let (s0, s1) = (self.sprime[k - 1], self.sprime[k]);
                if z1 > z0 {
                    return -(s0 + (0.0 - z0) * (s1 - s0) / (z1 - z0));
                }
                return -s0;
            }
        }
        -self.sprime[self.sprime.len() - 1]
    }

    /// Worst violation of the admissible-cone constraints: monotonicity,
    /// slope at most 1, concavity. Zero (up to rounding) for valid curves.
    pub fn max_shape_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        let mut slopes = Vec::with_capacity(self.sprime.len() - 1);
        for k in 0..self.sprime.len() - 1 {
            let sl = (self.sigma[k + 1] - self.sigma[k]) / (self.sprime[k + 1] - self.sprime[k]);
            defect = defect.max(-sl).max(sl - 1.0);
            slopes.push(sl);
        }
        for w in slopes.windows(2) {
            defect = defect.max(w[1] - w[0]);
        }
        defect
    }
}

fn check_target<P: SampledPath + ?Sized>(f: &P, t: f64, scales: DyadicScales) -> Result<()> {
    let g = f.grid();
    if t < g.t_min() || t > g.t_max() {
        return Err(Error::Support(format!(
            "time {t} outside the sampled range [{}, {}]",
            g.t_min(),
            g.t_max()
        )));
    }
    if scales.count() < MIN_SCALES {
        return Err(Error::Estimation(format!(
            "need at least {MIN_SCALES} dyadic scales, got {}",
            scales.count()
        )));
    }
    let rho = scales.rho_min();
    let count = match clip_range(g.t_min(), g.step(), g.len(), t - rho, t + rho) {
        Some((lo, hi)) => hi - lo + 1,
        None => 0,
    };
    if count < MIN_BALL_SAMPLES {
        return Err(Error::Estimation(format!(
            "smallest ball (radius {rho}) contains {count} samples, need at least {MIN_BALL_SAMPLES}"
        )));
    }
    Ok(())
}

/// Index range of the time interval [a, b] on a uniform grid, clipped to the
/// sampled window. None when the intersection is empty.
fn clip_range(t_min: f64, step: f64, n: usize, a: f64, b: f64) -> Option<(usize, usize)> {
    let lo_f = ((a - t_min) / step - 1e-9).ceil();
    let hi_f = ((b - t_min) / step + 1e-9).floor();
    let lo = lo_f.max(0.0) as usize;
    if hi_f < lo_f || hi_f < 0.0 {
        return None;
    }
    let hi = (hi_f as usize).min(n - 1);
    if lo > hi {
        return None;
    }
    Some((lo, hi))
}

/// Max minus min over values[lo..=hi].
fn range_osc(values: &[f64], lo: usize, hi: usize) -> f64 {
    let mut mx = f64::NEG_INFINITY;
    let mut mn = f64::INFINITY;
    for &v in &values[lo..=hi] {
        mx = mx.max(v);
        mn = mn.min(v);
    }
    mx - mn
}

/// Largest oscillation over pairs at most `w` samples apart inside
/// values[lo..=hi]: sliding-window extrema via monotone deques.
fn window_osc(values: &[f64], lo: usize, hi: usize, w: usize) -> f64 {
    let mut best = 0.0f64;
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    for i in lo..=hi {
        while maxq.back().is_some_and(|&b| values[b] <= values[i]) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&b| values[b] >= values[i]) {
            minq.pop_back();
        }
        minq.push_back(i);
        let cut = i.saturating_sub(w);
        while *maxq.front().unwrap() < cut {
            maxq.pop_front();
        }
        while *minq.front().unwrap() < cut {
            minq.pop_front();
        }
        let osc = values[*maxq.front().unwrap()] - values[*minq.front().unwrap()];
        best = best.max(osc);
    }
    best
}

/// Lower-envelope slope of log2-oscillation against scale index: the infimum
/// of secant slopes (y[a] - y[b]) / (j[b] - j[a]) over pairs j[b] > j[a].
///
/// Pairs are restricted to the finer half of the available range, and to gaps
/// of at least three quarters of that half. Coarse scales often sit in a
/// rollover regime where the oscillation has saturated, so secants into that
/// region read as spuriously flat; short gaps are dominated by single
/// oscillation features that plateau across neighbouring scales. The
/// restriction is relaxed stepwise when the range is too short to support it.
/// Points are (scale index j, log2 oscillation at 2^-j), sorted by j. None
/// when fewer than two points survive.
fn envelope_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let j_lo = pts[0].0;
    let j_hi = pts[pts.len() - 1].0;
    let mid = 0.5 * (j_lo + j_hi);
    let wide = (0.75 * (j_hi - mid)).max(2.0);
    for (cutoff, min_gap) in [(mid, wide), (mid, 2.0), (j_lo, 2.0), (j_lo, 1.0)] {
        let mut best: Option<f64> = None;
        for a in 0..pts.len() {
            if pts[a].0 < cutoff - 1e-9 {
                continue;
            }
            for b in a + 1..pts.len() {
                let gap = pts[b].0 - pts[a].0;
                if gap < min_gap - 1e-9 {
                    continue;
                }
                let slope = (pts[a].1 - pts[b].1) / gap;
                best = Some(best.map_or(slope, |cur: f64| cur.min(slope)));
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

/// Estimates the pointwise and local Hölder exponents of `f` at `t`.
///
/// Pointwise: least-squares slope of log sup-oscillation over the ball
/// B(t, rho) against log rho. Local: lower-envelope slope of the largest
/// oscillation at separation delta inside the fixed ball B(t, rho_max),
/// against log delta. Both saturate at the cap.
pub fn est_exponents<P: SampledPath + ?Sized>(
    f: &P,
    t: f64,
    scales: DyadicScales,
) -> Result<ExponentEstimate> {
    check_target(f, t, scales)?;
    let g = f.grid();
    let v = f.values();
    let (t_min, step, n) = (g.t_min(), g.step(), g.len());

    let mut ball_pts = Vec::with_capacity(scales.count());
    for j in scales.coarse..=scales.fine {
        let rho = scales.rho(j);
        if let Some((lo, hi)) = clip_range(t_min, step, n, t - rho, t + rho) {
            let osc = range_osc(v, lo, hi);
            if osc > 0.0 {
                ball_pts.push((-(j as f64), osc.log2()));
            }
        }
    }
    let (pointwise_raw, fit_r2) = if ball_pts.len() < 2 {
        (f64::INFINITY, 1.0)
    } else {
        let xs: Vec<f64> = ball_pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = ball_pts.iter().map(|p| p.1).collect();
        let (slope, _, r2) = linear_fit(&xs, &ys);
        (slope, r2)
    };

    let rho_max = scales.rho_max();
    let local_raw = match clip_range(t_min, step, n, t - rho_max, t + rho_max) {
        None => f64::INFINITY,
        Some((blo, bhi)) => {
            let mut pts = Vec::with_capacity(scales.count());
            for j in scales.coarse..=scales.fine {
                let w = ((scales.rho(j) / step).round() as usize).max(1);
                let osc = window_osc(v, blo, bhi, w);
                if osc > 0.0 {
                    pts.push((j as f64, osc.log2()));
                }
            }
            envelope_slope(&pts).unwrap_or(f64::INFINITY)
        }
    };

    Ok(ExponentEstimate {
        pointwise: ExponentValue::from_raw(pointwise_raw, DEFAULT_CAP),
        local: ExponentValue::from_raw(local_raw, DEFAULT_CAP),
        fit_r2,
        scales_used: (scales.rho_min(), rho_max),
    })
}

/// Estimates the 2-microlocal frontier of `f` at `t` on the given s' grid.
///
/// The estimator tabulates M[i][j], the largest oscillation over pairs at
/// separation about 2^-j whose distance to t is about 2^-i (dyadic annuli,
/// both sides; only i <= j is admissible). Each cell encodes the constraint
/// log2 M <= c - sigma * j + s' * i, so for fixed s' the frontier value is
/// the lower-envelope slope of max_i (log2 M[i][j] - s' * i) against j. The
/// raw curve is clipped at the cap and projected onto the admissible cone
/// (nondecreasing, concave, slopes in [0, 1]).
pub fn est_frontier<P: SampledPath + ?Sized>(
    f: &P,
    t: f64,
    sprime_grid: &[f64],
    scales: DyadicScales,
) -> Result<FrontierCurve> {
    check_target(f, t, scales)?;
    if sprime_grid.len() < 2 {
        return Err(Error::Argument("s' grid needs at least 2 points".into()));
    }
    let ds = sprime_grid[1] - sprime_grid[0];
    if !(ds > 0.0)
        || sprime_grid
            .windows(2)
            .any(|w| ((w[1] - w[0]) - ds).abs() > 1e-9 * ds.max(1.0))
    {
        return Err(Error::Argument(
            "s' grid must be uniformly spaced and increasing".into(),
        ));
    }
    let g = f.grid();
    let v = f.values();
    let (t_min, step, n) = (g.t_min(), g.step(), g.len());

    // cells (i, j, log2 M_ij) over dyadic annuli; the ring at distance scale
    // 2^-i is widened by one separation so pairs with one foot just outside
    // still count (the slack only shifts the constant, not the slope)
    let mut cells: Vec<(f64, f64, f64)> = Vec::new();
    for i in scales.coarse..=scales.fine {
        let r_out = scales.rho(i);
        let r_in = 0.5 * r_out;
        for j in i..=scales.fine {
            let delta = scales.rho(j);
            let w = ((delta / step).round() as usize).max(1);
            let mut osc = 0.0f64;
            if let Some((lo, hi)) = clip_range(t_min, step, n, t + r_in - delta, t + r_out + delta)
            {
                osc = osc.max(window_osc(v, lo, hi, w));
            }
            if let Some((lo, hi)) = clip_range(t_min, step, n, t - r_out - delta, t - r_in + delta)
            {
                osc = osc.max(window_osc(v, lo, hi, w));
            }
            if osc > 0.0 {
                cells.push((i as f64, j as f64, osc.log2()));
            }
        }
    }

    let mut sigma = Vec::with_capacity(sprime_grid.len());
    for &sp in sprime_grid {
        let mut env: Vec<(f64, f64)> = Vec::new();
        for &(i, j, lm) in &cells {
            let y = lm - sp * i;
            match env.iter_mut().find(|p| p.0 == j) {
                Some(p) => p.1 = p.1.max(y),
                None => env.push((j, y)),
            }
        }
        env.sort_by(|a, b| a.0.total_cmp(&b.0));
        let raw = envelope_slope(&env).unwrap_or(f64::INFINITY);
        sigma.push(raw.min(DEFAULT_CAP));
    }

    let projected = project_concave_monotone(&sigma, ds, 1.0);
    let clipped = projected.into_iter().map(|x| x.min(DEFAULT_CAP)).collect();
    FrontierCurve::new(sprime_grid.to_vec(), clipped, DEFAULT_CAP)
}

/// Order of the first non-vanishing derivative of the field in its Hurst
/// argument, as far as it can be detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplicity {
    Finite(u32),
    /// No derivative up to the probed order is significant.
    Infinite,
}

impl Multiplicity {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Multiplicity::Finite(k) => k as f64,
            Multiplicity::Infinite => f64::INFINITY,
        }
    }
}

/// Detects the multiplicity of the combined field a+ B+(t, h) + a- B-(t, h)
/// at (t, h): the smallest k (up to 3) whose h-derivative exceeds a small
/// fraction of the local field scale (|a+| + |a-|)(1 + |t|).
pub fn multiplicity_hat(
    t: f64,
    h: f64,
    a_plus: f64,
    a_minus: f64,
    bm: &BrownianPath,
    q: &QuadratureConfig,
) -> Result<Multiplicity> {
    let scale = (a_plus.abs() + a_minus.abs()) * (1.0 + t.abs());
    for k in 1..=q.max_deriv.min(3) {
        let mut d = 0.0;
        if a_plus != 0.0 {
            d += a_plus * fbf_partial(Side::Plus, t, h, k, bm, q)?;
        }
        if a_minus != 0.0 {
            d += a_minus * fbf_partial(Side::Minus, t, h, k, bm, q)?;
        }
        if d.abs() > 1e-3 * scale {
            return Ok(Multiplicity::Finite(k));
        }
    }
    Ok(Multiplicity::Infinite)
}

/// Predicted 2-microlocal frontier of a multifractional path at a time where
/// the Hurst function takes the value `h_t`, has frontier `frontier_h`, and
/// the field has multiplicity `m`. Returns the lower-bound curve and whether
/// it is exact (it is precisely when m = 1).
///
/// The bound is the pointwise minimum of (s' + h_t), h_t, the Hurst frontier
/// shifted by h_t, and m * frontier_h(s'/m); the last term drops out for
/// infinite multiplicity.
pub fn predict_frontier_mbm(
    h_t: f64,
    frontier_h: &FrontierCurve,
    m: Multiplicity,
) -> Result<(FrontierCurve, bool)> {
    if !(h_t > 0.0 && h_t < 1.0) {
        return Err(Error::Domain(format!("hurst value {h_t} outside (0, 1)")));
    }
    if m == Multiplicity::Finite(0) {
        return Err(Error::Argument("multiplicity must be at least 1".into()));
    }
    let cap = frontier_h.cap();
    let mut sigma = Vec::with_capacity(frontier_h.sprime().len());
    for &sp in frontier_h.sprime() {
        let mut val = (sp + h_t).min(h_t);
        val = val.min(frontier_h.eval(sp + h_t));
        if let Multiplicity::Finite(k) = m {
            let mf = k as f64;
            val = val.min(mf * frontier_h.eval(sp / mf));
        }
        sigma.push(val.min(cap));
    }
    let curve = FrontierCurve::new(frontier_h.sprime().to_vec(), sigma, cap)?;
    Ok((curve, m == Multiplicity::Finite(1)))
}

/// Predicted pointwise Hölder exponent of a multifractional path: the Hurst
/// value capped by m times the pointwise exponent of the Hurst function.
/// `alpha_h` may be infinite for a smooth Hurst function.
pub fn predict_pointwise_mbm(h_t: f64, alpha_h: f64, m: Multiplicity) -> f64 {
    let scaled = match m {
        Multiplicity::Finite(k) => k as f64 * alpha_h,
        Multiplicity::Infinite => f64::INFINITY,
    };
    h_t.min(scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Samples1D, TimeGrid};
    use crate::hurst::{build_chirp, TheoryFrontier};
    use crate::noise::{gen_brownian, gen_fbm};

    fn scales(coarse: u32, fine: u32) -> DyadicScales {
        DyadicScales::new(coarse, fine).unwrap()
    }

    #[test]
    fn linear_function_reports_the_cap() {
        let grid = TimeGrid::new(0.0, 1.0, 2f64.powi(-12)).unwrap();
        let f = Samples1D::from_fn(grid, |u| 2.0 * u - 0.25);
        let est = est_exponents(&f, 0.5, scales(3, 9)).unwrap();
        assert!(est.pointwise.is_capped(), "pointwise {:?}", est.pointwise);
        assert!(est.local.is_capped(), "local {:?}", est.local);
        assert!((est.pointwise.value() - DEFAULT_CAP).abs() < 1e-12);
    }

    #[test]
    fn constant_function_reports_cap_everywhere() {
        let grid = TimeGrid::new(0.0, 1.0, 2f64.powi(-12)).unwrap();
        let f = Samples1D::from_fn(grid, |_| 3.25);
        let est = est_exponents(&f, 0.5, scales(3, 9)).unwrap();
        assert!(est.pointwise.is_capped());
        assert!(est.local.is_capped());
        let grid_s = FrontierCurve::default_sprime_grid();
        let fr = est_frontier(&f, 0.5, &grid_s, scales(3, 9)).unwrap();
        for &s in fr.sigma() {
            assert!((s - DEFAULT_CAP).abs() < 1e-9, "sigma {s}");
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        let grid = TimeGrid::new(0.0, 1.0, 2f64.powi(-6)).unwrap();
        let f = Samples1D::from_fn(grid, |u| u);
        match est_exponents(&f, 0.5, scales(3, 7)) {
            Err(Error::Estimation(msg)) => assert!(msg.contains("scales"), "{msg}"),
            other => panic!("expected a scale-count error, got {other:?}"),
        }
        match est_exponents(&f, 0.5, scales(6, 12)) {
            Err(Error::Estimation(msg)) => assert!(msg.contains("samples"), "{msg}"),
            other => panic!("expected a sample-count error, got {other:?}"),
        }
        assert!(matches!(
            est_exponents(&f, 2.0, scales(3, 9)),
            Err(Error::Support(_))
        ));
        let grid_s = FrontierCurve::default_sprime_grid();
        assert!(est_frontier(&f, 0.5, &grid_s[..1], scales(1, 9)).is_err());
        let warped = vec![-1.0, 0.0, 0.5];
        assert!(est_frontier(&f, 0.5, &warped, scales(1, 9)).is_err());
    }

    #[test]
    fn fbm_exponents_and_frontier_match_theory() {
        let grid = TimeGrid::new(0.0, 1.0, 2f64.powi(-16)).unwrap();
        let f = gen_fbm(&grid, 0.3, 5).unwrap();
        let sc = scales(2, 12);
        let t = 0.5;

        let est = est_exponents(&f, t, sc).unwrap();
        assert!(
            (est.pointwise.value() - 0.3).abs() <= 0.1,
            "pointwise {:?}",
            est.pointwise
        );
        assert!(
            (est.local.value() - 0.3).abs() <= 0.1,
            "local {:?}",
            est.local
        );
        assert!(est.fit_r2 > 0.9, "r2 {}", est.fit_r2);
        assert_eq!(est.scales_used, (2f64.powi(-12), 2f64.powi(-2)));

        let grid_s = FrontierCurve::default_sprime_grid();
        let fr = est_frontier(&f, t, &grid_s, sc).unwrap();
        let theory = TheoryFrontier::FbmLike { h: 0.3 };
        for (&sp, &sg) in fr.sprime().iter().zip(fr.sigma()) {
            if (-0.3..=1.0).contains(&sp) {
                assert!(
                    (sg - theory.eval(sp)).abs() <= 0.1,
                    "sigma({sp}) = {sg}, theory {}",
                    theory.eval(sp)
                );
            }
        }
        assert!(fr.max_shape_defect() < 1e-8);

        // consistency between the three views of the same regularity
        assert!((est.local.value() - fr.eval(0.0)).abs() <= 0.1);
        assert!((est.pointwise.value() - fr.pointwise_readoff()).abs() <= 0.15);

        // a constant Hurst function has an everywhere-saturated frontier, so
        // the multifractional prediction collapses to the one-parameter curve
        let flat = FrontierCurve::from_fn(&grid_s, DEFAULT_CAP, |_| DEFAULT_CAP).unwrap();
        let (pred, exact) = predict_frontier_mbm(0.3, &flat, Multiplicity::Finite(1)).unwrap();
        assert!(exact);
        for (&sp, &sg) in fr.sprime().iter().zip(fr.sigma()) {
            if (-0.3..=1.0).contains(&sp) {
                let p = pred.eval(sp);
                assert!(sg >= p - 0.15, "estimate {sg} under bound {p} at {sp}");
                assert!((sg - p).abs() <= 0.15, "estimate {sg} vs exact {p} at {sp}");
            }
        }
    }

    #[test]
    fn chirp_exponents_and_frontier_match_theory() {
        let chirp = build_chirp(0.5, 1.0).unwrap();
        let grid = TimeGrid::new(-0.1875, 0.1875, 2f64.powi(-16)).unwrap();
        let f = chirp.sample_on(&grid);
        let sc = scales(3, 12);

        let est = est_exponents(&f, 0.0, sc).unwrap();
        assert!(
            (est.pointwise.value() - 0.5).abs() <= 0.1,
            "pointwise {:?}",
            est.pointwise
        );
        assert!(
            (est.local.value() - 0.25).abs() <= 0.1,
            "local {:?}",
            est.local
        );

        let grid_s = FrontierCurve::default_sprime_grid();
        let fr = est_frontier(&f, 0.0, &grid_s, sc).unwrap();
        let theory = chirp.frontier_at_origin();
        for (&sp, &sg) in fr.sprime().iter().zip(fr.sigma()) {
            if (-0.5..=1.0).contains(&sp) {
                assert!(
                    (sg - theory.eval(sp)).abs() <= 0.1,
                    "sigma({sp}) = {sg}, theory {}",
                    theory.eval(sp)
                );
            }
        }
        assert!(fr.max_shape_defect() < 1e-8);
        assert!((est.local.value() - fr.eval(0.0)).abs() <= 0.1);
        assert!((est.pointwise.value() - fr.pointwise_readoff()).abs() <= 0.15);
    }

    #[test]
    fn frontier_stays_below_nearby_local_exponents() {
        // The frontier at t is bounded by the liminf of local exponents at
        // nearby points. Probed with balls that exclude the target time, so
        // the probes see the function away from its singular point.
        let grid = TimeGrid::new(0.0, 1.0, 2f64.powi(-16)).unwrap();
        let f = gen_fbm(&grid, 0.3, 5).unwrap();
        let sc = scales(2, 12);
        let fr = est_frontier(&f, 0.5, &FrontierCurve::default_sprime_grid(), sc).unwrap();
        let probes = [0.5 - 2f64.powi(-3), 0.5 + 2f64.powi(-3)];
        let liminf_est = probes
            .iter()
            .map(|&u| est_exponents(&f, u, sc).unwrap().local.value())
            .fold(f64::INFINITY, f64::min);
        for &sg in fr.sigma() {
            assert!(
                sg <= liminf_est + 0.15,
                "sigma {sg} above nearby local bound {liminf_est}"
            );
        }

        let chirp = build_chirp(0.5, 1.0).unwrap();
        let cgrid = TimeGrid::new(-0.1875, 0.1875, 2f64.powi(-16)).unwrap();
        let cf = chirp.sample_on(&cgrid);
        let cfr = est_frontier(&cf, 0.0, &FrontierCurve::default_sprime_grid(), scales(3, 12))
            .unwrap();
        // probe balls of radius 2^-5 around +-3*2^-5 avoid the origin
        let cprobes = [-0.09375, 0.09375];
        let climinf = cprobes
            .iter()
            .map(|&u| est_exponents(&cf, u, scales(5, 12)).unwrap().local.value())
            .fold(f64::INFINITY, f64::min);
        for &sg in cfr.sigma() {
            assert!(sg <= climinf + 0.15, "sigma {sg} above bound {climinf}");
        }
    }

    #[test]
    fn predicted_frontier_matches_catalog_cases() {
        let grid_s = FrontierCurve::default_sprime_grid();
        let sigma_h =
            FrontierCurve::from_fn(&grid_s, DEFAULT_CAP, |s| (s + 0.375).min(0.375)).unwrap();

        // multiplicity 1: the prediction is exact and equals the minimum of
        // the shifted line, the plateau, and the Hurst frontier itself
        let (curve, exact) = predict_frontier_mbm(0.6, &sigma_h, Multiplicity::Finite(1)).unwrap();
        assert!(exact);
        for (&sp, &sg) in curve.sprime().iter().zip(curve.sigma()) {
            let want = (sp + 0.6).min(0.6).min((sp + 0.375).min(0.375));
            assert!((sg - want).abs() < 1e-12, "m=1 at {sp}: {sg} vs {want}");
        }

        // multiplicity >= 2 relaxes the Hurst-frontier term to its plateau
        for m in [2, 3] {
            let (curve, exact) =
                predict_frontier_mbm(0.6, &sigma_h, Multiplicity::Finite(m)).unwrap();
            assert!(!exact);
            for (&sp, &sg) in curve.sprime().iter().zip(curve.sigma()) {
                let want = (sp + 0.6).min(0.375);
                assert!((sg - want).abs() < 1e-12, "m={m} at {sp}: {sg} vs {want}");
            }
        }

        // infinite multiplicity with a strictly increasing Hurst frontier
        let sigma_h2 =
            FrontierCurve::from_fn(&grid_s, DEFAULT_CAP, |s| (s + 1.0) / 3.0).unwrap();
        let (curve, exact) =
            predict_frontier_mbm(0.75, &sigma_h2, Multiplicity::Infinite).unwrap();
        assert!(!exact);
        for (&sp, &sg) in curve.sprime().iter().zip(curve.sigma()) {
            let want = (sp + 0.75).min(sp / 3.0 + 7.0 / 12.0).min(0.75);
            assert!((sg - want).abs() < 1e-12, "m=inf at {sp}: {sg} vs {want}");
        }

        assert!(predict_frontier_mbm(0.0, &sigma_h, Multiplicity::Finite(1)).is_err());
        assert!(predict_frontier_mbm(0.5, &sigma_h, Multiplicity::Finite(0)).is_err());
    }

    #[test]
    fn predicted_pointwise_exponent_handles_multiplicity() {
        assert_eq!(
            predict_pointwise_mbm(0.6, 0.375, Multiplicity::Finite(1)),
            0.375
        );
        assert_eq!(
            predict_pointwise_mbm(0.6, 0.375, Multiplicity::Finite(2)),
            0.6
        );
        assert_eq!(
            predict_pointwise_mbm(0.25, f64::INFINITY, Multiplicity::Finite(1)),
            0.25
        );
        assert_eq!(
            predict_pointwise_mbm(0.7, 0.2, Multiplicity::Infinite),
            0.7
        );
    }

    #[test]
    fn multiplicity_detection_sees_the_first_derivative() {
        let grid = TimeGrid::new(-21.0, 21.0, 2f64.powi(-6)).unwrap();
        let bm = gen_brownian(&grid, 42);
        let q = QuadratureConfig::default();
        let m = multiplicity_hat(0.375, 0.6, 1.0, 0.0, &bm, &q).unwrap();
        assert_eq!(m, Multiplicity::Finite(1));
        // a zero field vanishes to every order we can probe
        let m0 = multiplicity_hat(0.375, 0.6, 0.0, 0.0, &bm, &q).unwrap();
        assert_eq!(m0, Multiplicity::Infinite);
    }

    #[test]
    fn frontier_curve_accessors_behave() {
        let s = vec![-1.0, 0.0, 1.0];
        let c = FrontierCurve::new(s, vec![-0.5, 0.5, 0.5], 1.0).unwrap();
        assert_eq!(c.eval(-2.0), -0.5);
        assert_eq!(c.eval(2.0), 0.5);
        assert!((c.eval(-0.5) - 0.0).abs() < 1e-12);
        assert!((c.pointwise_readoff() - 0.5).abs() < 1e-12);
        assert!(c.max_shape_defect() < 1e-12);

        let bad = FrontierCurve::new(vec![0.0, 0.0], vec![0.1, 0.2], 1.0);
        assert!(bad.is_err());
        let kinked = FrontierCurve::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.1, 0.9], 1.0).unwrap();
        assert!(kinked.max_shape_defect() > 0.5);
    }
}
