//! Pathwise evaluation of the fractional Brownian field B±(t, h) from a
//! single driving Brownian path, together with its derivatives in h, the
//! well-balanced variant, multifractional path assembly, and the Riemann-sum
//! stochastic-integral oracle that certifies the deterministic forms.
//!
//! All evaluators integrate the piecewise-linear interpolant of the driving
//! path against the singular moving-average kernels in closed form per cell,
//! truncated to [-U, U]. A boundary compensation term makes each evaluator
//! equal the stochastic integral truncated to the same window, so the
//! discrepancy against the Riemann-sum oracle is pure quadrature error.

use crate::error::{Error, Result};
use crate::grid::{SampledPath, Samples1D, TimeGrid};
use crate::hurst::HurstFunction;
use crate::noise::BrownianPath;
use crate::quad::{cell_linear_power, cell_linear_power_log, pow_moment};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::function::gamma::{digamma, gamma};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

/// Which branch of the two-sided field to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Controls for the kernel quadrature shared by every field evaluator.
#[derive(Clone, Debug)]
pub struct QuadratureConfig {
    /// Truncation radius: the driving path is integrated over [-U, U].
    pub u_trunc: f64,
    /// Declared budget for the neglected |u| > U contribution. It is checked
    /// a posteriori through `tail_bound`, not enforced per evaluation.
    pub tail_tol: f64,
    /// Half-length of the window on which the low-regularity branch
    /// subtracts the value at t from the path before integrating.
    pub anchor_delta: f64,
    /// Base step for finite differences in h.
    pub fd_step: f64,
    /// Largest admissible derivative order (at most 3).
    pub max_deriv: u32,
}

impl QuadratureConfig {
    /// Default configuration sized for evaluation times up to `max_abs_t`.
    pub fn for_max_abs_t(max_abs_t: f64) -> Self {
        QuadratureConfig {
            u_trunc: 20.0 + max_abs_t,
            tail_tol: 1e-6,
            anchor_delta: 1.0,
            fd_step: 1e-3,
            max_deriv: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_trunc > 0.0) || !self.u_trunc.is_finite() {
            return Err(Error::Argument(format!("u_trunc {} must be positive", self.u_trunc)));
        }
        if !(self.anchor_delta > 0.0) || !self.anchor_delta.is_finite() {
            return Err(Error::Argument(format!(
                "anchor_delta {} must be positive",
                self.anchor_delta
            )));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Argument(format!("tail_tol {} must be positive", self.tail_tol)));
        }
        if !(self.fd_step > 0.0) || self.fd_step >= 0.25 {
            return Err(Error::Argument(format!("fd_step {} out of range", self.fd_step)));
        }
        if self.max_deriv > 3 {
            return Err(Error::Argument(format!("max_deriv {} exceeds 3", self.max_deriv)));
        }
        if self.u_trunc <= self.anchor_delta {
            return Err(Error::Argument(
                "u_trunc must exceed anchor_delta to leave room for evaluation".into(),
            ));
        }
        Ok(())
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig::for_max_abs_t(1.0)
    }
}

/// A multifractional Brownian motion sample, together with the ingredients
/// that produced it.
#[derive(Clone, Debug)]
pub struct MbmPath {
    grid: TimeGrid,
    values: Vec<f64>,
    hurst: HurstFunction,
    a_plus: f64,
    a_minus: f64,
    noise_seed: u64,
}

impl MbmPath {
    pub fn hurst(&self) -> &HurstFunction {
        &self.hurst
    }
    pub fn a_plus(&self) -> f64 {
        self.a_plus
    }
    pub fn a_minus(&self) -> f64 {
        self.a_minus
    }
    pub fn noise_seed(&self) -> u64 {
        self.noise_seed
    }
}

impl SampledPath for MbmPath {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Both sides of the conjugate-path identity for the well-balanced field.
#[derive(Clone, Copy, Debug)]
pub struct WbRelation {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Cheap view of a driving path for the cell walkers.
struct PathCells<'a> {
    values: &'a [f64],
    step: f64,
    t_min: f64,
    n: usize,
}

impl<'a> PathCells<'a> {
    fn new(path: &'a BrownianPath) -> Self {
        let g = path.grid();
        PathCells { values: path.values(), step: g.step(), t_min: g.t_min(), n: g.len() }
    }

    #[inline]
    fn point(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.step
    }

    #[inline]
    fn cell_of(&self, u: f64) -> usize {
        let i = ((u - self.t_min) / self.step).floor();
        (i.max(0.0) as usize).min(self.n - 2)
    }

    /// Interpolated value inside cell i, exact at the cell endpoints so that
    /// anchored differences vanish bitwise at singular kernel points.
    #[inline]
    fn value_in_cell(&self, i: usize, u: f64) -> f64 {
        let ga = self.point(i);
        if u == ga {
            return self.values[i];
        }
        let gb = self.point(i + 1);
        if u == gb {
            return self.values[i + 1];
        }
        self.values[i] + (self.values[i + 1] - self.values[i]) * ((u - ga) / self.step)
    }

    #[inline]
    fn value_at(&self, u: f64) -> f64 {
        self.value_in_cell(self.cell_of(u), u)
    }

    /// First index at or right of -u and last index at or left of +u.
    fn window(&self, u: f64) -> (usize, usize) {
        let lo = snap_up((-u - self.t_min) / self.step).max(0) as usize;
        let hi = (snap_down((u - self.t_min) / self.step).max(0) as usize).min(self.n - 1);
        (lo, hi)
    }
}

fn snap_up(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as i64
    } else {
        x.ceil() as i64
    }
}

fn snap_down(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as i64
    } else {
        x.floor() as i64
    }
}

/// Integral of (B(u) - anchor) * (x0 - u)^(q1 - 1) over [lo, hi], hi <= x0,
/// optionally weighted by ln(x0 - u). Exact per cell for the interpolant.
fn int_left(p: &PathCells, lo: f64, hi: f64, x0: f64, q1: f64, anchor: f64, log_w: bool) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let mut acc = 0.0;
    let i0 = p.cell_of(lo);
    let i1 = p.cell_of(hi);
    for i in i0..=i1 {
        let ga = p.point(i);
        let gb = p.point(i + 1);
        let a = if ga > lo { ga } else { lo };
        let b = if gb < hi { gb } else { hi };
        if !(b > a) {
            continue;
        }
        let va = p.value_in_cell(i, a);
        let vb = p.value_in_cell(i, b);
        let w_lo = x0 - b;
        let w_hi = x0 - a;
        let beta = (va - vb) / (w_hi - w_lo);
        let alpha = (vb - anchor) - beta * w_lo;
        acc += if log_w {
            cell_linear_power_log(alpha, beta, w_hi, w_lo, q1)
        } else {
            cell_linear_power(alpha, beta, w_hi, w_lo, q1)
        };
    }
    acc
}

/// Integral of (B(u) - anchor) * (u - x0)^(q1 - 1) over [lo, hi], lo >= x0.
fn int_right(p: &PathCells, lo: f64, hi: f64, x0: f64, q1: f64, anchor: f64, log_w: bool) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let mut acc = 0.0;
    let i0 = p.cell_of(lo);
    let i1 = p.cell_of(hi);
    for i in i0..=i1 {
        let ga = p.point(i);
        let gb = p.point(i + 1);
        let a = if ga > lo { ga } else { lo };
        let b = if gb < hi { gb } else { hi };
        if !(b > a) {
            continue;
        }
        let va = p.value_in_cell(i, a);
        let vb = p.value_in_cell(i, b);
        let w_lo = a - x0;
        let w_hi = b - x0;
        let beta = (vb - va) / (w_hi - w_lo);
        let alpha = (va - anchor) - beta * w_lo;
        acc += if log_w {
            cell_linear_power_log(alpha, beta, w_hi, w_lo, q1)
        } else {
            cell_linear_power(alpha, beta, w_hi, w_lo, q1)
        };
    }
    acc
}

/// Memo for the t-independent origin-kernel integral over [l, 0], keyed by
/// the kernel exponent. Path sampling at constant Hurst reuses it across all
/// evaluation times.
struct ZeroPieceCache(Mutex<HashMap<u64, f64>>);

impl ZeroPieceCache {
    fn new() -> Self {
        ZeroPieceCache(Mutex::new(HashMap::new()))
    }

    fn get(&self, p: &PathCells, l: f64, q1: f64) -> f64 {
        let key = q1.to_bits();
        if let Some(v) = self.0.lock().unwrap().get(&key) {
            return *v;
        }
        let v = int_left(p, l, 0.0, 0.0, q1, 0.0, false);
        self.0.lock().unwrap().insert(key, v);
        v
    }
}

fn check_point(t: f64, h: f64, q: &QuadratureConfig) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("evaluation time {t} is not finite")));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("hurst value {h} outside (0, 1)")));
    }
    if t.abs() + q.anchor_delta > q.u_trunc {
        return Err(Error::Domain(format!(
            "truncation radius {} too small for |t| = {} plus anchor_delta {}",
            q.u_trunc,
            t.abs(),
            q.anchor_delta
        )));
    }
    Ok(())
}

fn check_support(bm: &BrownianPath, q: &QuadratureConfig) -> Result<()> {
    let g = bm.grid();
    let slack = 1e-9 * q.u_trunc.max(1.0);
    if g.t_min() > -q.u_trunc + slack || g.t_max() < q.u_trunc - slack {
        return Err(Error::Support(format!(
            "driving path on [{}, {}] does not cover the truncation window [-{}, {}]",
            g.t_min(),
            g.t_max(),
            q.u_trunc,
            q.u_trunc
        )));
    }
    Ok(())
}

/// Forward-branch evaluation; the backward branch is handled by reflection.
fn fbf_plus(
    p: &PathCells,
    t: f64,
    h: f64,
    q: &QuadratureConfig,
    memo: Option<&ZeroPieceCache>,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if h == 0.5 {
        return Ok(p.value_at(t));
    }
    let (i_lo, _) = p.window(q.u_trunc);
    let l = p.point(i_lo);
    let b_lo = p.values[i_lo];
    let q1 = h - 0.5;
    let g = 1.0 / gamma(h + 0.5);
    // value dropped at the truncation edge by the integration by parts
    let comp = b_lo * ((t - l).powf(q1) - (-l).powf(q1)) * g;
    let origin_piece = match memo {
        Some(c) => c.get(p, l, q1),
        None => int_left(p, l, 0.0, 0.0, q1, 0.0, false),
    };
    let det = if h > 0.5 {
        int_left(p, l, t, t, q1, 0.0, false) - origin_piece
    } else {
        let t_win = t - q.anchor_delta;
        if t_win < l {
            return Err(Error::Domain(format!(
                "anchor window start {t_win} falls below the truncation edge {l}"
            )));
        }
        let bt = p.value_at(t);
        int_left(p, l, t_win, t, q1, 0.0, false) + int_left(p, t_win, t, t, q1, bt, false)
            - origin_piece
    };
    let mut out = q1 * g * det - comp;
    if h < 0.5 {
        out += p.value_at(t) * q.anchor_delta.powf(q1) * g;
    }
    Ok(out)
}

/// Evaluates the fractional Brownian field B±(t, h) driven by `bm`.
pub fn fbf_eval(side: Side, t: f64, h: f64, bm: &BrownianPath, q: &QuadratureConfig) -> Result<f64> {
    q.validate()?;
    check_support(bm, q)?;
    check_point(t, h, q)?;
    match side {
        Side::Plus => fbf_plus(&PathCells::new(bm), t, h, q, None),
        Side::Minus => {
            let r = bm.reflected();
            Ok(-fbf_plus(&PathCells::new(&r), -t, h, q, None)?)
        }
    }
}

/// k-th partial derivative of the field in h via Richardson-extrapolated
/// central differences. k = 0 reduces to `fbf_eval`.
pub fn fbf_partial(
    side: Side,
    t: f64,
    h: f64,
    k: u32,
    bm: &BrownianPath,
    q: &QuadratureConfig,
) -> Result<f64> {
    q.validate()?;
    check_support(bm, q)?;
    check_point(t, h, q)?;
    if k > q.max_deriv {
        return Err(Error::Argument(format!(
            "derivative order {k} exceeds max_deriv {}",
            q.max_deriv
        )));
    }
    if k == 0 {
        return fbf_eval(side, t, h, bm, q);
    }
    let e = q.fd_step;
    let span = if k == 3 { 2.0 * e } else { e };
    if h - span <= 0.0 || h + span >= 1.0 {
        return Err(Error::Step(format!(
            "stencil h +/- {span} leaves (0, 1) at h = {h}"
        )));
    }
    let reflected;
    let (path, tt, sgn) = match side {
        Side::Plus => (bm, t, 1.0),
        Side::Minus => {
            reflected = bm.reflected();
            (&reflected, -t, -1.0)
        }
    };
    let cells = PathCells::new(path);
    let f = |off: f64| -> Result<f64> { Ok(sgn * fbf_plus(&cells, tt, h + off, q, None)?) };
    let out = match k {
        1 => {
            let coarse = (f(e)? - f(-e)?) / (2.0 * e);
            let fine = (f(0.5 * e)? - f(-0.5 * e)?) / e;
            (4.0 * fine - coarse) / 3.0
        }
        2 => {
            let f0 = f(0.0)?;
            let coarse = (f(e)? - 2.0 * f0 + f(-e)?) / (e * e);
            let he = 0.5 * e;
            let fine = (f(he)? - 2.0 * f0 + f(-he)?) / (he * he);
            (4.0 * fine - coarse) / 3.0
        }
        _ => {
            let (p2, p1, m1, m2) = (f(2.0 * e)?, f(e)?, f(-e)?, f(-2.0 * e)?);
            let coarse = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * e * e * e);
            let he = 0.5 * e;
            let (ph, mh) = (f(he)?, f(-he)?);
            let fine = (p1 - 2.0 * ph + 2.0 * mh - m1) / (2.0 * he * he * he);
            (4.0 * fine - coarse) / 3.0
        }
    };
    Ok(out)
}

/// First h-derivative through the log-weighted kernel integral, available on
/// the smooth branch h > 1/2. Serves as an independent check of the
/// finite-difference path.
pub fn fbf_partial_analytic(
    side: Side,
    t: f64,
    h: f64,
    bm: &BrownianPath,
    q: &QuadratureConfig,
) -> Result<f64> {
    q.validate()?;
    check_support(bm, q)?;
    check_point(t, h, q)?;
    if h <= 0.5 {
        return Err(Error::Domain(format!(
            "analytic derivative requires h > 1/2, got {h}"
        )));
    }
    match side {
        Side::Plus => analytic_plus(&PathCells::new(bm), t, h),
        Side::Minus => {
            let r = bm.reflected();
            Ok(-analytic_plus(&PathCells::new(&r), -t, h)?)
        }
    }
}

fn analytic_plus(p: &PathCells, t: f64, h: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let u = p.t_min.abs().min(p.point(p.n - 1));
    let (i_lo, _) = p.window(u);
    let l = p.point(i_lo);
    let b_lo = p.values[i_lo];
    let q1 = h - 0.5;
    let g = 1.0 / gamma(h + 0.5);
    let psi = digamma(h + 0.5);
    let i0 = int_left(p, l, t, t, q1, 0.0, false) - int_left(p, l, 0.0, 0.0, q1, 0.0, false);
    let i1 = int_left(p, l, t, t, q1, 0.0, true) - int_left(p, l, 0.0, 0.0, q1, 0.0, true);
    let a = (t - l).powf(q1);
    let b = (-l).powf(q1);
    let comp_d = b_lo * g * (a * (t - l).ln() - b * (-l).ln() - (a - b) * psi);
    Ok(g * (1.0 - q1 * psi) * i0 + q1 * g * i1 - comp_d)
}

/// Signed-kernel contribution around the center t, integrated as symmetric
/// pairs so the odd singularity cancels: the paired integrand is
/// D(w) = B(t-w) - B(t+w) with D(0) = 0 exactly.
fn paired_center(p: &PathCells, t: f64, r_p: f64, q1: f64) -> f64 {
    if !(r_p > 0.0) {
        return 0.0;
    }
    let kc = p.cell_of(t);
    let mut kl = if p.point(kc) == t { kc as i64 - 1 } else { kc as i64 };
    let mut kr = kc + 1;
    let mut acc = 0.0;
    let mut w_prev = 0.0;
    let mut d_prev = p.value_at(t) - p.value_at(t);
    loop {
        let wl = if kl >= 0 { t - p.point(kl as usize) } else { f64::INFINITY };
        let wr = if kr < p.n { p.point(kr) - t } else { f64::INFINITY };
        let w = wl.min(wr).min(r_p);
        if w > w_prev {
            let d = p.value_at(t - w) - p.value_at(t + w);
            let beta = (d - d_prev) / (w - w_prev);
            let alpha = d_prev - beta * w_prev;
            acc += cell_linear_power(alpha, beta, w, w_prev, q1);
            w_prev = w;
            d_prev = d;
        }
        if w >= r_p {
            break;
        }
        if wl <= wr {
            kl -= 1;
        }
        if wr <= wl {
            kr += 1;
        }
    }
    acc
}

/// Evaluates the well-balanced field: the renormalized sum of the two
/// branches, computed directly from its signed-power kernel. At h = 1/2 the
/// kernel continues into the logarithmic case.
pub fn fbf_wb(t: f64, h: f64, bm: &BrownianPath, q: &QuadratureConfig) -> Result<f64> {
    q.validate()?;
    check_support(bm, q)?;
    check_point(t, h, q)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let p = PathCells::new(bm);
    let (i_lo, i_hi) = p.window(q.u_trunc);
    let l = p.point(i_lo);
    let r = p.point(i_hi);
    let b_lo = p.values[i_lo];
    let b_hi = p.values[i_hi];
    let q1 = h - 0.5;
    let g = 1.0 / gamma(h + 0.5);
    let comp = (b_lo * pow_moment(t - l, -l, q1) - b_hi * pow_moment(r - t, r, q1)) * g;
    let r_p = (t - l).min(r - t);
    let center = paired_center(&p, t, r_p, q1) + int_left(&p, l, t - r_p, t, q1, 0.0, false)
        - int_right(&p, t + r_p, r, t, q1, 0.0, false);
    let origin = -int_left(&p, l, 0.0, 0.0, q1, 0.0, false)
        + int_right(&p, 0.0, r, 0.0, q1, 0.0, false);
    Ok((center + origin) * g - comp)
}

/// Continuation factor relating the well-balanced field to the fields driven
/// by the conjugate log-kernel path; equals 1 at h = 1/2.
pub fn wb_normalizer(h: f64) -> f64 {
    let phi = (h - 0.5) * PI / 2.0;
    if phi.abs() < 1e-4 {
        1.0 - phi * phi / 3.0
    } else {
        phi / phi.tan()
    }
}

/// Builds the conjugate driving path by midpoint Riemann sums of the
/// log-difference kernel against the increments of `bm`, via one linear
/// convolution. The result is anchored at zero at the origin.
pub fn log_kernel_path(bm: &BrownianPath, q: &QuadratureConfig) -> Result<BrownianPath> {
    q.validate()?;
    check_support(bm, q)?;
    let g = bm.grid();
    let n = g.len();
    let step = g.step();
    let vals = bm.values();
    let p = PathCells::new(bm);
    let (c0, c_hi) = p.window(q.u_trunc);
    let m = c_hi - c0;
    if m < 2 {
        return Err(Error::Argument("truncation window holds no quadrature cells".into()));
    }

    let incr: Vec<f64> = (c0..c_hi).map(|c| vals[c + 1] - vals[c]).collect();
    // midpoint offsets: t_j - mid_c = (j - c - 1/2) * step, never zero
    let k_len = n + m - 1;
    let fft_len = (m + k_len - 1).next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); fft_len];
    let mut fb = vec![Complex64::new(0.0, 0.0); fft_len];
    for (i, d) in incr.iter().enumerate() {
        fa[i] = Complex64::new(*d, 0.0);
    }
    let k_min = 1 - c_hi as i64;
    for idx in 0..k_len {
        let k = k_min + idx as i64;
        fb[idx] = Complex64::new((step * (k as f64 - 0.5).abs()).ln(), 0.0);
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(fft_len);
    let inv = planner.plan_fft_inverse(fft_len);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (a, b) in fa.iter_mut().zip(fb.iter()) {
        *a *= *b;
    }
    inv.process(&mut fa);
    let scale = 1.0 / fft_len as f64;

    let s: f64 = incr
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let mid = p.point(c0 + i) + 0.5 * step;
            mid.abs().ln() * d
        })
        .sum();
    let shift = (c0 as i64 + k_min) as isize;
    let mut values: Vec<f64> = (0..n)
        .map(|j| 0.5 * (fa[(j as isize - shift) as usize].re * scale - s))
        .collect();
    let z = g.zero_index();
    let off = values[z];
    for v in values.iter_mut() {
        *v -= off;
    }
    values[z] = 0.0;
    BrownianPath::from_values(g.clone(), values, bm.seed())
}

/// Causal midpoint convolution: out[j] = sum over k >= 1 of
/// kernel(k) * incr[j - k], for j = 0..=m where m = incr.len().
/// kernel receives the integer offset k and is evaluated once per lag.
fn causal_conv(incr: &[f64], kernel: impl Fn(usize) -> f64) -> Vec<f64> {
    let m = incr.len();
    let fft_len = (2 * m).next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); fft_len];
    let mut fb = vec![Complex64::new(0.0, 0.0); fft_len];
    for (i, d) in incr.iter().enumerate() {
        fa[i] = Complex64::new(*d, 0.0);
    }
    for k in 1..=m {
        fb[k - 1] = Complex64::new(kernel(k), 0.0);
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(fft_len);
    let inv = planner.plan_fft_inverse(fft_len);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (a, b) in fa.iter_mut().zip(fb.iter()) {
        *a *= *b;
    }
    inv.process(&mut fa);
    let scale = 1.0 / fft_len as f64;
    let mut out = Vec::with_capacity(m + 1);
    out.push(0.0);
    for j in 1..=m {
        out.push(fa[j - 1].re * scale);
    }
    out
}

/// One-sided-field section along the grid: sum over cells below t of
/// kernel(lag) * dB, minus the same sum anchored at t = 0, for every grid
/// point t. `kernel` maps the integer lag between the evaluation point and
/// the cell to the kernel weight for that cell.
fn plus_section(bm: &BrownianPath, kernel: impl Fn(usize) -> f64) -> Vec<f64> {
    let vals = bm.values();
    let m = bm.grid().len() - 1;
    let incr: Vec<f64> = (0..m).map(|c| vals[c + 1] - vals[c]).collect();
    let fwd = causal_conv(&incr, kernel);
    let z = bm.grid().zero_index();
    let origin = fwd[z];
    fwd.into_iter().map(|v| v - origin).collect()
}

/// Samples a constant-Hurst section of the one-sided field on the grid of
/// the driving path, in O(n log n) via FFT convolution.
///
/// This computes the same midpoint Riemann approximation as
/// `mbm_stochint_oracle` with a constant Hurst function, including its
/// truncation at the grid edge, so the fine-scale behaviour matches the
/// pointwise quadrature down to the grid step. Use it when a whole section
/// path is needed (regularity estimation, dimension counts) rather than a
/// handful of values.
pub fn fbf_path_fft(side: Side, bm: &BrownianPath, h: f64) -> Result<Samples1D> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("hurst value {h} outside (0, 1)")));
    }
    let q1 = h - 0.5;
    let gam = gamma(h + 0.5);
    let step = bm.grid().step();
    match side {
        Side::Plus => {
            let vals: Vec<f64> = plus_section(bm, |k| (step * (k as f64 - 0.5)).powf(q1))
                .into_iter()
                .map(|v| v / gam)
                .collect();
            Samples1D::new(bm.grid().clone(), vals)
        }
        Side::Minus => {
            let r = bm.reflected();
            let refl = fbf_path_fft(Side::Plus, &r, h)?;
            let rv = refl.values();
            let n = rv.len();
            let vals: Vec<f64> = (0..n).map(|j| -rv[n - 1 - j]).collect();
            Samples1D::new(bm.grid().clone(), vals)
        }
    }
}

/// Samples the first Hurst-derivative of the one-sided field along a
/// constant-Hurst section, on the grid of the driving path. The derivative
/// of the normalized kernel x^(h - 1/2) / Gamma(h + 1/2) in h is
/// x^(h - 1/2) (ln x - digamma(h + 1/2)) / Gamma(h + 1/2). The log factor
/// makes midpoint tags inaccurate on the cell touching the singularity, so
/// each cell uses the exact average of the kernel over the cell instead
/// (equivalent to integrating the piecewise-linear interpolation of the
/// driving path exactly); truncation is still the grid edge.
pub fn fbf_deriv_path_fft(side: Side, bm: &BrownianPath, h: f64) -> Result<Samples1D> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("hurst value {h} outside (0, 1)")));
    }
    let gam = gamma(h + 0.5);
    let psi = digamma(h + 0.5);
    let p = h + 0.5;
    // antiderivative of x^(h-1/2) (ln x - psi): x^p ((ln x - psi)/p - 1/p^2)
    let anti = move |x: f64| -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x.powf(p) * ((x.ln() - psi) / p - 1.0 / (p * p))
        }
    };
    let step = bm.grid().step();
    match side {
        Side::Plus => {
            let vals: Vec<f64> = plus_section(bm, |k| {
                (anti(step * k as f64) - anti(step * (k as f64 - 1.0))) / step
            })
            .into_iter()
            .map(|v| v / gam)
            .collect();
            Samples1D::new(bm.grid().clone(), vals)
        }
        Side::Minus => {
            let r = bm.reflected();
            let refl = fbf_deriv_path_fft(Side::Plus, &r, h)?;
            let rv = refl.values();
            let n = rv.len();
            let vals: Vec<f64> = (0..n).map(|j| -rv[n - 1 - j]).collect();
            Samples1D::new(bm.grid().clone(), vals)
        }
    }
}

/// Largest Hurst gap between neighbouring ladder nodes in [`mbm_path_fft`].
const MBM_FFT_NODE_GAP: f64 = 0.01;

/// FFT-accelerated multifractional sampler: evaluates the one-sided sections
/// on a ladder of Hurst levels spanning the range of `hurst` over `grid`,
/// then interpolates quadratically across the level at each grid time. A
/// constant Hurst function collapses the ladder to one exact section.
///
/// `grid` must lie on the lattice of the driving path, whose support doubles
/// as the kernel truncation exactly as in [`fbf_path_fft`].
pub fn mbm_path_fft(
    grid: &TimeGrid,
    hurst: &HurstFunction,
    a_plus: f64,
    a_minus: f64,
    bm: &BrownianPath,
) -> Result<MbmPath> {
    if a_plus == 0.0 && a_minus == 0.0 {
        return Err(Error::Argument("at least one of a_plus, a_minus must be nonzero".into()));
    }
    let bg = bm.grid();
    if (grid.step() - bg.step()).abs() > 1e-12 * bg.step() {
        return Err(Error::GridAlignment(format!(
            "output step {} must match the driving step {}",
            grid.step(),
            bg.step()
        )));
    }
    let offset = bg.index_of(grid.t_min()).ok_or_else(|| {
        Error::GridAlignment(format!(
            "output grid start {} is not a point of the driving lattice",
            grid.t_min()
        ))
    })?;
    if grid.t_max() > bg.t_max() + 1e-9 * bg.step() {
        return Err(Error::Support(format!(
            "output grid end {} leaves the driving support {}",
            grid.t_max(),
            bg.t_max()
        )));
    }
    let hs: Vec<f64> = grid.points().map(|t| hurst.eval(t)).collect::<Result<_>>()?;
    let mut h_lo = 1.0f64;
    let mut h_hi = 0.0f64;
    for &h in &hs {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::Domain(format!("hurst value {h} outside (0, 1)")));
        }
        h_lo = h_lo.min(h);
        h_hi = h_hi.max(h);
    }

    let section = |h: f64| -> Result<Vec<f64>> {
        let mut acc = vec![0.0; grid.len()];
        if a_plus != 0.0 {
            let p = fbf_path_fft(Side::Plus, bm, h)?;
            let pv = p.values();
            for (i, a) in acc.iter_mut().enumerate() {
                *a += a_plus * pv[offset + i];
            }
        }
        if a_minus != 0.0 {
            let m = fbf_path_fft(Side::Minus, bm, h)?;
            let mv = m.values();
            for (i, a) in acc.iter_mut().enumerate() {
                *a += a_minus * mv[offset + i];
            }
        }
        Ok(acc)
    };

    let values = if h_hi - h_lo <= 1e-12 {
        section(h_lo)?
    } else {
        let n_nodes = (((h_hi - h_lo) / MBM_FFT_NODE_GAP).ceil() as usize + 1).max(3);
        let gap = (h_hi - h_lo) / (n_nodes - 1) as f64;
        let nodes: Vec<Vec<f64>> = (0..n_nodes)
            .map(|k| section(h_lo + k as f64 * gap))
            .collect::<Result<_>>()?;
        let mut vals = vec![0.0; grid.len()];
        for (i, v) in vals.iter_mut().enumerate() {
            let u = (hs[i] - h_lo) / gap;
            let j = (u.round() as usize).clamp(1, n_nodes - 2);
            let d = u - j as f64;
            let w_prev = 0.5 * d * (d - 1.0);
            let w_mid = 1.0 - d * d;
            let w_next = 0.5 * d * (d + 1.0);
            *v = w_prev * nodes[j - 1][i] + w_mid * nodes[j][i] + w_next * nodes[j + 1][i];
        }
        vals
    };
    Ok(MbmPath {
        grid: grid.clone(),
        values,
        hurst: hurst.clone(),
        a_plus,
        a_minus,
        noise_seed: bm.seed(),
    })
}

/// Evaluates both sides of the conjugate-path identity
/// wb(t, h) = (tilde_plus - tilde_minus) / wb_normalizer(h)
/// where the tilde fields are driven by the log-kernel path of `bm`.
pub fn verify_wb_relation(
    t: f64,
    h: f64,
    bm: &BrownianPath,
    q: &QuadratureConfig,
) -> Result<WbRelation> {
    let tilde = log_kernel_path(bm, q)?;
    let lhs = fbf_wb(t, h, bm, q)?;
    let plus = fbf_eval(Side::Plus, t, h, &tilde, q)?;
    let minus = fbf_eval(Side::Minus, t, h, &tilde, q)?;
    let rhs = (plus - minus) / wb_normalizer(h);
    Ok(WbRelation { lhs, rhs, gap: (lhs - rhs).abs() })
}

/// Assembles a multifractional path X_t = a+ B+(t, H(t)) + a- B-(t, H(t))
/// on `grid`, one kernel quadrature per grid point.
pub fn mbm_sample(
    grid: &TimeGrid,
    hurst: &HurstFunction,
    a_plus: f64,
    a_minus: f64,
    bm: &BrownianPath,
    q: &QuadratureConfig,
) -> Result<MbmPath> {
    if a_plus == 0.0 && a_minus == 0.0 {
        return Err(Error::Argument("at least one of a_plus, a_minus must be nonzero".into()));
    }
    q.validate()?;
    check_support(bm, q)?;
    let reflected = if a_minus != 0.0 { Some(bm.reflected()) } else { None };
    let fwd_memo = ZeroPieceCache::new();
    let bwd_memo = ZeroPieceCache::new();
    let values: Result<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let t = grid.point(i);
            let h = hurst.eval(t)?;
            check_point(t, h, q)?;
            let mut x = 0.0;
            if a_plus != 0.0 {
                x += a_plus * fbf_plus(&PathCells::new(bm), t, h, q, Some(&fwd_memo))?;
            }
            if let Some(refl) = &reflected {
                x -= a_minus * fbf_plus(&PathCells::new(refl), -t, h, q, Some(&bwd_memo))?;
            }
            Ok(x)
        })
        .collect();
    Ok(MbmPath {
        grid: grid.clone(),
        values: values?,
        hurst: hurst.clone(),
        a_plus,
        a_minus,
        noise_seed: bm.seed(),
    })
}

/// Midpoint-tagged Riemann sums of the moving-average stochastic integral
/// over the increments of `bm`: the independent oracle for the deterministic
/// evaluators. Truncation is the support of `bm` itself.
pub fn mbm_stochint_oracle(
    grid: &TimeGrid,
    hurst: &HurstFunction,
    a_plus: f64,
    a_minus: f64,
    bm_increments: &BrownianPath,
) -> Result<MbmPath> {
    if a_plus == 0.0 && a_minus == 0.0 {
        return Err(Error::Argument("at least one of a_plus, a_minus must be nonzero".into()));
    }
    let g = bm_increments.grid();
    let vals = bm_increments.values();
    let half = 0.5 * g.step();
    let us: Vec<f64> = (0..g.len() - 1).map(|i| g.point(i) + half).collect();
    let dbs: Vec<f64> = (0..g.len() - 1).map(|i| vals[i + 1] - vals[i]).collect();
    // the kernel pieces anchored at the origin do not depend on t; memoize
    // their sums per kernel exponent and skip tags where a kernel vanishes
    let split = us.partition_point(|&u| u < 0.0);
    let fwd_origin: Mutex<HashMap<u64, f64>> = Mutex::new(HashMap::new());
    let bwd_origin: Mutex<HashMap<u64, f64>> = Mutex::new(HashMap::new());
    let origin_sum = |memo: &Mutex<HashMap<u64, f64>>, q1: f64, backward: bool| -> f64 {
        let key = q1.to_bits();
        if let Some(v) = memo.lock().unwrap().get(&key) {
            return *v;
        }
        let v = if backward {
            us[split..].iter().zip(&dbs[split..]).map(|(u, db)| u.powf(q1) * db).sum()
        } else {
            us[..split].iter().zip(&dbs[..split]).map(|(u, db)| (-u).powf(q1) * db).sum()
        };
        memo.lock().unwrap().insert(key, v);
        v
    };
    let values: Result<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let t = grid.point(i);
            let h = hurst.eval(t)?;
            let q1 = h - 0.5;
            let cut = us.partition_point(|&u| u < t);
            let mut acc = 0.0;
            if a_plus != 0.0 {
                let mut s = 0.0;
                for (u, db) in us[..cut].iter().zip(&dbs[..cut]) {
                    s += (t - u).powf(q1) * db;
                }
                acc += a_plus * (s - origin_sum(&fwd_origin, q1, false));
            }
            if a_minus != 0.0 {
                let cut_hi = us.partition_point(|&u| u <= t);
                let mut s = 0.0;
                for (u, db) in us[cut_hi..].iter().zip(&dbs[cut_hi..]) {
                    s += (u - t).powf(q1) * db;
                }
                acc += a_minus * (s - origin_sum(&bwd_origin, q1, true));
            }
            Ok(acc / gamma(h + 0.5))
        })
        .collect();
    Ok(MbmPath {
        grid: grid.clone(),
        values: values?,
        hurst: hurst.clone(),
        a_plus,
        a_minus,
        noise_seed: bm_increments.seed(),
    })
}

/// A-posteriori envelope bound on the forward-branch contribution neglected
/// beyond the truncation radius, computed from the realized growth of the
/// driving path and the decay of the kernel difference.
pub fn tail_bound(t: f64, h: f64, bm: &BrownianPath, u_trunc: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let (growth, margin) = if h < 0.88 { (0.6, 0.9 - h) } else { (0.51, 0.99 - h) };
    if margin <= 0.0 {
        return f64::INFINITY;
    }
    let tt = t.abs();
    let u = u_trunc;
    if u <= tt {
        return f64::INFINITY;
    }
    let g = bm.grid();
    let mut env: f64 = 0.0;
    for (i, v) in bm.values().iter().enumerate() {
        let x = v.abs() / (1.0 + g.point(i).abs()).powf(growth);
        if x > env {
            env = x;
        }
    }
    let q1 = h - 0.5;
    let gam = 1.0 / gamma(h + 0.5);
    let kernel_decay = (1.0 + 1.0 / u).powf(growth) * (1.0 - tt / u).powf(h - 2.5);
    let term_int =
        q1.abs() * gam * env * tt * (1.5 - h) * kernel_decay * u.powf(growth + h - 1.5) / margin;
    let p = PathCells::new(bm);
    let (i_lo, _) = p.window(u);
    let l = p.point(i_lo);
    let term_edge = (p.values[i_lo] * ((t - l).powf(q1) - (-l).powf(q1)) * gam).abs();
    term_int + term_edge
}
