//! Box-counting estimators for graph, parabolic-graph and level-set
//! dimensions, together with the closed-form predictors they are checked
//! against.
//!
//! Euclidean counting covers the graph of a sampled function with square
//! cells organised in columns. Parabolic counting replaces the squares by
//! anisotropic cells `[t - d^{1/h}, t + d^{1/h}] x [x - d, x + d]`, the ball
//! shape of the metric `max(|u - v|^h, |x - y|)`; graph dimensions taken in
//! that metric transfer to euclidean Hausdorff dimensions through
//! [`predict_hausdim_graph`] and [`parabolic_transfer_bounds`]. Level-set
//! counting tallies the width-`d` columns in which the sampled path crosses a
//! fixed level.

use crate::error::{Error, Result};
use crate::grid::SampledPath;
use crate::stats::linear_fit;

/// Default localisation radius for the local dimension estimators.
pub const DEFAULT_RHO: f64 = 0.1;

/// Minimum number of scales accepted by the regression-based estimators.
pub const MIN_SCALES: usize = 6;

/// Default dyadic scale range `2^-4 ..= 2^-10` for box-count regressions.
pub fn default_deltas() -> Vec<f64> {
    (4..=10).map(|j| 2f64.powi(-j)).collect()
}

/// Box counts organised by scale: `deltas` is a decreasing sequence of dyadic
/// cell sizes and `counts[i]` the number of cells of size `deltas[i]` needed
/// to cover the set. Counts never decrease as the cells shrink.
#[derive(Debug, Clone)]
pub struct ScaleTable {
    deltas: Vec<f64>,
    counts: Vec<u64>,
}

impl ScaleTable {
    pub fn new(deltas: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if deltas.is_empty() || deltas.len() != counts.len() {
            return Err(Error::Argument(
                "scale table needs matching, nonempty delta and count vectors".into(),
            ));
        }
        for &d in &deltas {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Argument("cell sizes must be positive".into()));
            }
            let l = d.log2();
            if (l - l.round()).abs() > 1e-9 {
                return Err(Error::Argument(format!(
                    "cell size {d} is not a power of two"
                )));
            }
        }
        if deltas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Argument("cell sizes must be strictly decreasing".into()));
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::Argument("cell counts must be positive".into()));
        }
        if counts.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Argument(
                "cell counts must not decrease as cells shrink".into(),
            ));
        }
        Ok(ScaleTable { deltas, counts })
    }

    /// Euclidean graph counts of `f` over `window` at each scale.
    pub fn euclidean<S: SampledPath + ?Sized>(
        f: &S,
        window: (f64, f64),
        deltas: &[f64],
    ) -> Result<Self> {
        let counts = deltas
            .iter()
            .map(|&d| box_count(f, window, d))
            .collect::<Result<Vec<_>>>()?;
        ScaleTable::new(deltas.to_vec(), counts)
    }

    /// Graph counts of `f` over `window` in the parabolic metric
    /// `max(|u - v|^h, |x - y|)`.
    pub fn parabolic<S: SampledPath + ?Sized>(
        f: &S,
        window: (f64, f64),
        h_metric: f64,
        deltas: &[f64],
    ) -> Result<Self> {
        let counts = deltas
            .iter()
            .map(|&d| pbox_count(f, window, h_metric, d))
            .collect::<Result<Vec<_>>>()?;
        ScaleTable::new(deltas.to_vec(), counts)
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Regression coordinates: `(-log2 delta, log2 count)` per scale.
    pub fn log_points(&self) -> (Vec<f64>, Vec<f64>) {
        let xs = self.deltas.iter().map(|d| -d.log2()).collect();
        let ys = self.counts.iter().map(|&c| (c as f64).log2()).collect();
        (xs, ys)
    }
}

/// A dimension read off a log-log regression. `value` is the least-squares
/// slope over the full scale range; `lower`/`upper` bracket it with the
/// extreme slopes seen over sliding three-scale windows, standing in for the
/// liminf/limsup the limit definitions would take.
#[derive(Debug, Clone, Copy)]
pub struct DimEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub fit_r2: f64,
}

/// Level-set dimension estimate; `empty` flags a level the sampled path never
/// attains, in which case the dimension is reported as zero.
#[derive(Debug, Clone, Copy)]
pub struct LevelSetEstimate {
    pub dim: DimEstimate,
    pub empty: bool,
}

fn check_window<S: SampledPath + ?Sized>(f: &S, window: (f64, f64)) -> Result<()> {
    let g = f.grid();
    let (a, b) = window;
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(Error::Argument("window must be a nondegenerate interval".into()));
    }
    let slack = 1e-9 * g.step();
    if a < g.t_min() - slack || b > g.t_max() + slack {
        return Err(Error::Support(format!(
            "window [{a}, {b}] leaves the sampled support [{}, {}]",
            g.t_min(),
            g.t_max()
        )));
    }
    Ok(())
}

/// Inclusive sample-index range covering `[x0, x1]`; columns that share an
/// edge grid point share that sample, so oscillations stay subadditive under
/// column splitting.
fn column_indices<S: SampledPath + ?Sized>(f: &S, x0: f64, x1: f64) -> Option<(usize, usize)> {
    let g = f.grid();
    let n = g.len();
    let i0 = (((x0 - g.t_min()) / g.step()) - 1e-9).ceil().max(0.0) as usize;
    let i1 = ((((x1 - g.t_min()) / g.step()) + 1e-9).floor()).min((n - 1) as f64) as usize;
    if i1 < i0 || i0 >= n {
        None
    } else {
        Some((i0, i1))
    }
}

fn for_each_column<S: SampledPath + ?Sized>(
    f: &S,
    window: (f64, f64),
    width: f64,
    mut visit: impl FnMut(Option<(usize, usize)>),
) {
    let (a, b) = window;
    let ncols = ((b - a) / width - 1e-9).ceil().max(1.0) as usize;
    for k in 0..ncols {
        let x0 = a + k as f64 * width;
        let x1 = (x0 + width).min(b);
        visit(column_indices(f, x0, x1));
    }
}

fn osc_in(values: &[f64], i0: usize, i1: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in &values[i0..=i1] {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

fn count_columns<S: SampledPath + ?Sized>(f: &S, window: (f64, f64), width: f64, unit: f64) -> u64 {
    let values = f.values();
    let mut total = 0u64;
    for_each_column(f, window, width, |range| {
        let cells = match range {
            Some((i0, i1)) => {
                let osc = osc_in(values, i0, i1);
                ((osc / unit - 1e-9).ceil() as u64).max(1)
            }
            None => 1,
        };
        total += cells;
    });
    total
}

/// Number of side-`delta` cells covering the graph of `f` over `window`,
/// organised in columns of width `delta`: each column contributes one cell
/// per `delta` of oscillation, at least one.
pub fn box_count<S: SampledPath + ?Sized>(f: &S, window: (f64, f64), delta: f64) -> Result<u64> {
    check_window(f, window)?;
    let step = f.grid().step();
    if !(delta > 0.0) || delta < 2.0 * step - 1e-12 * step {
        return Err(Error::Scale(format!(
            "cell size {delta} is below twice the grid step {step}"
        )));
    }
    Ok(count_columns(f, window, delta, delta))
}

/// Number of parabolic cells `[t - delta^{1/h}, t + delta^{1/h}] x [x - delta,
/// x + delta]` covering the graph of `f` over `window`: columns of width
/// `delta^{1/h}`, one cell per `delta` of oscillation, at least one.
pub fn pbox_count<S: SampledPath + ?Sized>(
    f: &S,
    window: (f64, f64),
    h_metric: f64,
    delta: f64,
) -> Result<u64> {
    check_window(f, window)?;
    if !(h_metric > 0.0 && h_metric < 1.0) {
        return Err(Error::Domain(format!(
            "parabolic index {h_metric} must lie in (0, 1)"
        )));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Scale(format!("cell size {delta} must be positive")));
    }
    let step = f.grid().step();
    let width = delta.powf(1.0 / h_metric);
    if width < 2.0 * step - 1e-12 * step {
        return Err(Error::Scale(format!(
            "column width {width} is below twice the grid step {step}"
        )));
    }
    Ok(count_columns(f, window, width, delta))
}

fn validate_deltas(deltas: &[f64], window_len: f64) -> Result<()> {
    if deltas.len() < MIN_SCALES {
        return Err(Error::Scale(format!(
            "need at least {MIN_SCALES} scales, got {}",
            deltas.len()
        )));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Scale("scales must be strictly decreasing".into()));
    }
    if deltas[0] > window_len + 1e-12 {
        return Err(Error::Scale(format!(
            "coarsest scale {} exceeds the window length {window_len}",
            deltas[0]
        )));
    }
    Ok(())
}

fn est_from_table(table: &ScaleTable, lo: f64, hi: f64) -> DimEstimate {
    let (xs, ys) = table.log_points();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    let mut min3 = f64::INFINITY;
    let mut max3 = f64::NEG_INFINITY;
    for w in 0..=xs.len() - 3 {
        let (s, _, _) = linear_fit(&xs[w..w + 3], &ys[w..w + 3]);
        min3 = min3.min(s);
        max3 = max3.max(s);
    }
    let value = slope.clamp(lo, hi);
    DimEstimate {
        value,
        lower: min3.clamp(lo, hi).min(value),
        upper: max3.clamp(lo, hi).max(value),
        fit_r2: r2,
    }
}

fn local_window<S: SampledPath + ?Sized>(f: &S, t: f64, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Argument(format!("radius {rho} must be positive")));
    }
    let g = f.grid();
    if !g.contains(t) {
        return Err(Error::Support(format!(
            "probe time {t} leaves the sampled support [{}, {}]",
            g.t_min(),
            g.t_max()
        )));
    }
    Ok(((t - rho).max(g.t_min()), (t + rho).min(g.t_max())))
}

/// Local box dimension of the graph of `f` near `t`: least-squares slope of
/// `log2 N_delta` against `-log2 delta` over `B(t, rho)`, with sliding
/// three-scale slopes as lower/upper brackets. Values are clamped to the
/// planar-graph range `[1, 2]`.
pub fn est_boxdim_local<S: SampledPath + ?Sized>(
    f: &S,
    t: f64,
    rho: f64,
    deltas: &[f64],
) -> Result<DimEstimate> {
    let window = local_window(f, t, rho)?;
    validate_deltas(deltas, window.1 - window.0)?;
    let table = ScaleTable::euclidean(f, window, deltas)?;
    Ok(est_from_table(&table, 1.0, 2.0))
}

/// Local graph dimension in the parabolic metric `max(|u - v|^h, |x - y|)`,
/// same regression contract as [`est_boxdim_local`]. Values are clamped to
/// `[0, 1 + 1/h]`, the attainable parabolic range.
pub fn est_pboxdim_local<S: SampledPath + ?Sized>(
    f: &S,
    t: f64,
    rho: f64,
    h_metric: f64,
    deltas: &[f64],
) -> Result<DimEstimate> {
    let window = local_window(f, t, rho)?;
    if deltas.len() < MIN_SCALES {
        return Err(Error::Scale(format!(
            "need at least {MIN_SCALES} scales, got {}",
            deltas.len()
        )));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Scale("scales must be strictly decreasing".into()));
    }
    let table = ScaleTable::parabolic(f, window, h_metric, deltas)?;
    Ok(est_from_table(&table, 0.0, 1.0 + 1.0 / h_metric))
}

/// Box dimension of the level set `{u : f(u) = level}` within `window`:
/// counts width-`delta` columns in which the sampled path brackets the level.
/// A level the samples never bracket yields the `empty` flag and dimension 0.
pub fn level_set_boxdim<S: SampledPath + ?Sized>(
    f: &S,
    level: f64,
    window: (f64, f64),
    deltas: &[f64],
) -> Result<LevelSetEstimate> {
    check_window(f, window)?;
    validate_deltas(deltas, window.1 - window.0)?;
    let step = f.grid().step();
    if deltas[deltas.len() - 1] < 2.0 * step - 1e-12 * step {
        return Err(Error::Scale(format!(
            "finest scale {} is below twice the grid step {step}",
            deltas[deltas.len() - 1]
        )));
    }
    let values = f.values();
    let mut counts = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let mut crossings = 0u64;
        for_each_column(f, window, d, |range| {
            if let Some((i0, i1)) = range {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &v in &values[i0..=i1] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if lo <= level && level <= hi {
                    crossings += 1;
                }
            }
        });
        counts.push(crossings);
    }
    if counts.iter().all(|&c| c == 0) {
        return Ok(LevelSetEstimate {
            dim: DimEstimate { value: 0.0, lower: 0.0, upper: 0.0, fit_r2: 1.0 },
            empty: true,
        });
    }
    let table = ScaleTable::new(deltas.to_vec(), counts)?;
    Ok(LevelSetEstimate { dim: est_from_table(&table, 0.0, 1.0), empty: false })
}

/// Graph box dimension of a multifractional path at `t` from the local Hurst
/// value and the graph dimension of the Hurst function itself:
/// `max(2 - H_t, dim_grH)`.
pub fn predict_boxdim_graph(h_t: f64, dim_grh: f64) -> Result<f64> {
    if !(h_t > 0.0 && h_t <= 1.0) {
        return Err(Error::Domain(format!("Hurst value {h_t} must lie in (0, 1]")));
    }
    if !(1.0..=2.0).contains(&dim_grh) {
        return Err(Error::Domain(format!(
            "graph dimension {dim_grh} must lie in [1, 2]"
        )));
    }
    Ok((2.0 - h_t).max(dim_grh))
}

/// Hausdorff dimension of the path graph at `t` from the parabolic graph
/// dimension of the Hurst function: `1 + H_t (pdim_grH - 1)`.
pub fn predict_hausdim_graph(h_t: f64, pdim_grh: f64) -> Result<f64> {
    if !(h_t > 0.0 && h_t <= 1.0) {
        return Err(Error::Domain(format!("Hurst value {h_t} must lie in (0, 1]")));
    }
    if pdim_grh < 1.0 {
        return Err(Error::Domain(format!(
            "parabolic graph dimension {pdim_grh} must be at least 1"
        )));
    }
    Ok(1.0 + h_t * (pdim_grh - 1.0))
}

/// Dimension of the image of a compact set under the path, from the parabolic
/// dimension of the graph of the Hurst function restricted to it: capped at 1.
pub fn predict_image_dim(pdim_grhf: f64) -> Result<f64> {
    if !(pdim_grhf >= 0.0) {
        return Err(Error::Domain(format!(
            "parabolic dimension {pdim_grhf} must be nonnegative"
        )));
    }
    Ok(pdim_grhf.min(1.0))
}

/// Sandwich for a set's dimension under the metric of index `h1` given its
/// dimension `d2` under the finer metric of index `h2 < h1`:
/// `d2 + 1/h1 - 1/h2 <= d1 <= 1 + (h2/h1)(d2 - 1)`. The two bounds meet at
/// `d2 = 1 + 1/h2`, the top of the parabolic range.
pub fn parabolic_transfer_bounds(d2: f64, h1: f64, h2: f64) -> Result<(f64, f64)> {
    if !(h2 > 0.0 && h1 > h2 && h1 <= 1.0) {
        return Err(Error::Argument(format!(
            "metric indices need 0 < h2 < h1 <= 1, got h1 = {h1}, h2 = {h2}"
        )));
    }
    if !(0.0..=1.0 + 1.0 / h2 + 1e-9).contains(&d2) {
        return Err(Error::Argument(format!(
            "dimension {d2} leaves the parabolic range [0, {}]",
            1.0 + 1.0 / h2
        )));
    }
    let lower = d2 + 1.0 / h1 - 1.0 / h2;
    let upper = 1.0 + (h2 / h1) * (d2 - 1.0);
    Ok((lower, upper))
}

/// Upper bounds on local graph dimensions read off an estimated 2-microlocal
/// frontier: box dimension from the frontier at `s' = 1`, Hausdorff dimension
/// from its value at the far end of the grid (standing in for `s' -> +inf`).
pub fn dim_bounds_from_frontier(sigma_at_1: f64, sigma_at_inf: f64) -> (f64, f64) {
    (2.0 - sigma_at_1.min(1.0), 2.0 - sigma_at_inf.min(1.0))
}
