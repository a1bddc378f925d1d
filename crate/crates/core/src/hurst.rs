//! Catalog of Hurst functions with ground-truth regularity metadata, plus the
//! chirp calibration target used to validate the regularity estimators.

use crate::error::{Error, Result};
use crate::grid::{SampledPath, Samples1D, TimeGrid};
use crate::noise::FbmPath;

/// Closed-form 2-microlocal frontier shapes attached to catalog entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TheoryFrontier {
    /// sigma(s') = (s' + h) followed by the plateau at h.
    FbmLike { h: f64 },
    /// sigma(s') = (s' + alpha) / (1 + beta).
    Chirp { alpha: f64, beta: f64 },
}

impl TheoryFrontier {
    pub fn eval(&self, sprime: f64) -> f64 {
        match *self {
            TheoryFrontier::FbmLike { h } => (sprime + h).min(h),
            TheoryFrontier::Chirp { alpha, beta } => (sprime + alpha) / (1.0 + beta),
        }
    }

    /// Pointwise exponent encoded by the frontier: -inf{s' : sigma(s') >= 0}.
    pub fn pointwise_exp(&self) -> f64 {
        match *self {
            TheoryFrontier::FbmLike { h } => h,
            TheoryFrontier::Chirp { alpha, .. } => alpha,
        }
    }

    /// Local exponent encoded by the frontier: sigma(0).
    pub fn local_exp(&self) -> f64 {
        self.eval(0.0)
    }
}

/// Where on the time axis a piece of metadata applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TSpan<T> {
    Everywhere(T),
    /// Applies at one time point; the function is smooth elsewhere.
    At(f64, T),
}

impl<T: Copy> TSpan<T> {
    pub fn at(&self, t: f64) -> Option<T> {
        match *self {
            TSpan::Everywhere(v) => Some(v),
            TSpan::At(t0, v) if (t - t0).abs() < 1e-12 => Some(v),
            TSpan::At(..) => None,
        }
    }
}

/// Ground-truth regularity attached to a catalog entry. Fields are None when
/// no closed form is known (or the entry is smooth and the quantity is
/// effectively infinite).
#[derive(Debug, Clone)]
pub struct RegularityMeta {
    pub frontier: Option<TSpan<TheoryFrontier>>,
    pub pointwise_exp: Option<TSpan<f64>>,
    pub local_exp: Option<TSpan<f64>>,
    pub graph_boxdim: Option<f64>,
    /// Regularity exceeds every exponent the estimators consider.
    pub smooth: bool,
}

impl RegularityMeta {
    fn smooth_entry() -> Self {
        RegularityMeta {
            frontier: None,
            pointwise_exp: None,
            local_exp: None,
            graph_boxdim: Some(1.0),
            smooth: true,
        }
    }
}

#[derive(Debug, Clone)]
enum HurstKind {
    Constant { h: f64 },
    SmoothSine { base: f64, amp: f64, freq: f64 },
    ChirpHurst { center: f64 },
    FbmSample { samples: Samples1D, a: f64, lo: f64, hi: f64, seed: u64 },
    Weierstrass { hw: f64, lambda: f64, n_terms: u32, offset: f64, scale: f64 },
    GenericSamples { samples: Samples1D },
}

/// A Hurst function: deterministic map t -> (0,1) with regularity metadata.
#[derive(Debug, Clone)]
pub struct HurstFunction {
    kind: HurstKind,
    support: Option<(f64, f64)>,
    meta: RegularityMeta,
}

/// Half-width of the interval on which the chirp Hurst function stays inside
/// (0, 1).
pub const CHIRP_HURST_SUPPORT: f64 = 0.2;

impl HurstFunction {
    pub fn constant(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::Domain(format!("constant level {h} outside (0, 1)")));
        }
        Ok(HurstFunction {
            kind: HurstKind::Constant { h },
            support: None,
            meta: RegularityMeta::smooth_entry(),
        })
    }

    pub fn smooth_sine(base: f64, amp: f64, freq: f64) -> Result<Self> {
        if !(base - amp.abs() > 0.0 && base + amp.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "sine range [{}, {}] leaves (0, 1)",
                base - amp.abs(),
                base + amp.abs()
            )));
        }
        if !(freq > 0.0) {
            return Err(Error::Domain(format!("frequency must be positive, got {freq}")));
        }
        Ok(HurstFunction {
            kind: HurstKind::SmoothSine { base, amp, freq },
            support: None,
            meta: RegularityMeta::smooth_entry(),
        })
    }

    /// H(t) = 3/4 + t sin(1/t^2) on |t| <= CHIRP_HURST_SUPPORT. At the origin
    /// the frontier is (s' + 1)/3; away from it the function is smooth.
    pub fn chirp_hurst() -> Self {
        Self::chirp_hurst_at(0.0)
    }

    /// The chirp Hurst function translated so its oscillation accumulates at
    /// `center`: H(t) = 3/4 + (t - center) sin(1/(t - center)^2).
    pub fn chirp_hurst_at(center: f64) -> Self {
        let frontier = TheoryFrontier::Chirp { alpha: 1.0, beta: 2.0 };
        HurstFunction {
            kind: HurstKind::ChirpHurst { center },
            support: Some((center - CHIRP_HURST_SUPPORT, center + CHIRP_HURST_SUPPORT)),
            meta: RegularityMeta {
                frontier: Some(TSpan::At(center, frontier)),
                pointwise_exp: Some(TSpan::At(center, frontier.pointwise_exp())),
                local_exp: Some(TSpan::At(center, frontier.local_exp())),
                // box dimension of the graph over any window containing the center
                graph_boxdim: Some(2.0 - (2.0f64 / 3.0).min(1.0)),
                smooth: false,
            },
        }
    }

    /// Affine rescale of a fractional Brownian sample into [lo, hi]. The
    /// rescaled function keeps the sample's exponents (equal to its Hurst
    /// parameter everywhere) and graph box dimension 2 - a.
    pub fn fbm_sample(noise: &FbmPath, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(Error::Domain(format!(
                "rescale target [{lo}, {hi}] not inside (0, 1)"
            )));
        }
        let a = noise.hurst();
        let vals = noise.values();
        let (mut vmin, mut vmax) = (f64::MAX, f64::MIN);
        for &v in vals {
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
        if vmax <= vmin {
            return Err(Error::Domain("sample range is degenerate".into()));
        }
        let s = (hi - lo) / (vmax - vmin);
        let rescaled: Vec<f64> = vals.iter().map(|v| lo + s * (v - vmin)).collect();
        let samples = Samples1D::new(noise.grid().clone(), rescaled)?;
        let support = (noise.grid().t_min(), noise.grid().t_max());
        Ok(HurstFunction {
            kind: HurstKind::FbmSample { samples, a, lo, hi, seed: noise.seed() },
            support: Some(support),
            meta: RegularityMeta {
                frontier: Some(TSpan::Everywhere(TheoryFrontier::FbmLike { h: a })),
                pointwise_exp: Some(TSpan::Everywhere(a)),
                local_exp: Some(TSpan::Everywhere(a)),
                graph_boxdim: Some(2.0 - a),
                smooth: false,
            },
        })
    }

    /// Truncated Weierstrass series sum lambda^(-n hw) cos(lambda^n t),
    /// affinely rescaled into [lo, hi] by its analytic sup bound. The number
    /// of terms is chosen so that doubling it moves no value by more than
    /// 1e-8.
    pub fn weierstrass(hw: f64, lambda: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(hw > 0.0 && hw < 1.0) {
            return Err(Error::Domain(format!("roughness index {hw} outside (0, 1)")));
        }
        if !(lambda > 1.0) {
            return Err(Error::Domain(format!("lacunary base must exceed 1, got {lambda}")));
        }
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(Error::Domain(format!(
                "rescale target [{lo}, {hi}] not inside (0, 1)"
            )));
        }
        let r = lambda.powf(-hw);
        // geometric tail r^(n+1)/(1-r) below 1e-9 before rescaling
        let n_terms = ((1e9 / (1.0 - r)).ln() / -r.ln()).ceil() as u32;
        let sup = (1.0 - r.powi(n_terms as i32 + 1)) / (1.0 - r);
        let scale = (hi - lo) / (2.0 * sup);
        let offset = 0.5 * (lo + hi);
        Ok(HurstFunction {
            kind: HurstKind::Weierstrass { hw, lambda, n_terms, offset, scale },
            support: None,
            meta: RegularityMeta {
                frontier: None,
                pointwise_exp: Some(TSpan::Everywhere(hw)),
                local_exp: Some(TSpan::Everywhere(hw)),
                graph_boxdim: Some(2.0 - hw),
                smooth: false,
            },
        })
    }

    /// Wraps externally supplied samples (linear interpolation, no metadata).
    pub fn from_samples(samples: Samples1D) -> Result<Self> {
        for &v in samples.values() {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("sampled value {v} outside (0, 1)")));
            }
        }
        let support = (samples.grid().t_min(), samples.grid().t_max());
        Ok(HurstFunction {
            kind: HurstKind::GenericSamples { samples },
            support: Some(support),
            meta: RegularityMeta {
                frontier: None,
                pointwise_exp: None,
                local_exp: None,
                graph_boxdim: None,
                smooth: false,
            },
        })
    }

    pub fn meta(&self) -> &RegularityMeta {
        &self.meta
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    /// Evaluates the function. Errors when t leaves the declared support; the
    /// result is always inside (0, 1) — constructors rescale, evaluation
    /// never clamps.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if let Some((lo, hi)) = self.support {
            if t < lo || t > hi {
                return Err(Error::Support(format!(
                    "t = {t} outside declared support [{lo}, {hi}]"
                )));
            }
        }
        match &self.kind {
            HurstKind::Constant { h } => Ok(*h),
            HurstKind::SmoothSine { base, amp, freq } => Ok(base + amp * (freq * t).sin()),
            HurstKind::ChirpHurst { center } => {
                let u = t - center;
                if u == 0.0 {
                    Ok(0.75)
                } else {
                    Ok(0.75 + u * (1.0 / (u * u)).sin())
                }
            }
            HurstKind::FbmSample { samples, .. } => samples.value_at(t),
            HurstKind::Weierstrass { hw, lambda, n_terms, offset, scale } => {
                let mut acc = 0.0;
                for n in 0..=*n_terms {
                    acc += lambda.powf(-(n as f64) * hw) * ((lambda.powi(n as i32) * t).cos());
                }
                Ok(offset + scale * acc)
            }
            HurstKind::GenericSamples { samples } => samples.value_at(t),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            HurstKind::Constant { .. } => "constant",
            HurstKind::SmoothSine { .. } => "smooth-sine",
            HurstKind::ChirpHurst { .. } => "chirp-hurst",
            HurstKind::FbmSample { .. } => "fbm-sample",
            HurstKind::Weierstrass { .. } => "weierstrass",
            HurstKind::GenericSamples { .. } => "generic-samples",
        }
    }

    /// A point at distance about `r` from `t` where the function retakes its
    /// value at `t` exactly, when the catalog geometry provides one. Constant
    /// functions match everywhere; the chirp revisits its central value along
    /// the sequence center + (k pi)^{-1/2}; the sine retakes a level one
    /// period away. `None` when the kind carries no usable matching point at
    /// that radius.
    pub fn level_matching_point(&self, t: f64, r: f64) -> Option<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return None;
        }
        let within = |s: f64| match self.support {
            Some((lo, hi)) => s >= lo && s <= hi,
            None => true,
        };
        match &self.kind {
            HurstKind::Constant { .. } => {
                let s = t + r;
                if within(s) {
                    Some(s)
                } else if within(t - r) {
                    Some(t - r)
                } else {
                    None
                }
            }
            HurstKind::ChirpHurst { center } => {
                if (t - center).abs() > 1e-12 {
                    return None;
                }
                // sin(1/u^2) vanishes at u = (k pi)^{-1/2}; pick k so the
                // distance hugs r while staying inside the support
                let k_min = (1.0 / (std::f64::consts::PI * CHIRP_HURST_SUPPORT.powi(2))).ceil();
                let k = (1.0 / (std::f64::consts::PI * r * r)).round().max(k_min).max(1.0);
                let s = center + (k * std::f64::consts::PI).powf(-0.5);
                within(s).then_some(s)
            }
            HurstKind::SmoothSine { freq, .. } => {
                let period = std::f64::consts::TAU / freq;
                let n = (r / period).round().max(1.0);
                let dist = n * period;
                if (dist - r).abs() > 0.5 * r {
                    return None;
                }
                let s = t + dist;
                if within(s) {
                    Some(s)
                } else if within(t - dist) {
                    Some(t - dist)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

impl std::fmt::Display for HurstFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            HurstKind::Constant { h } => write!(f, "constant(h={h})"),
            HurstKind::SmoothSine { base, amp, freq } => {
                write!(f, "smooth-sine(base={base}, amp={amp}, freq={freq})")
            }
            HurstKind::ChirpHurst { center } => write!(f, "chirp-hurst(center={center})"),
            HurstKind::FbmSample { a, lo, hi, seed, .. } => {
                write!(f, "fbm-sample(a={a}, range=[{lo}, {hi}], seed={seed})")
            }
            HurstKind::Weierstrass { hw, lambda, .. } => {
                write!(f, "weierstrass(hw={hw}, lambda={lambda})")
            }
            HurstKind::GenericSamples { .. } => write!(f, "generic-samples"),
        }
    }
}

/// Free-function form of [`HurstFunction::eval`].
pub fn hurst_eval(h: &HurstFunction, t: f64) -> Result<f64> {
    h.eval(t)
}

/// Deterministic oscillating calibration target |x|^alpha sin(|x|^-beta)
/// with a known frontier and box dimension at the origin. Not a Hurst
/// function: its range is not confined to (0, 1).
#[derive(Debug, Clone, Copy)]
pub struct ChirpTarget {
    pub alpha: f64,
    pub beta: f64,
}

impl ChirpTarget {
    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            let a = x.abs();
            a.powf(self.alpha) * (a.powf(-self.beta)).sin()
        }
    }

    pub fn sample_on(&self, grid: &TimeGrid) -> Samples1D {
        Samples1D::from_fn(grid.clone(), |t| self.eval(t))
    }

    pub fn frontier_at_origin(&self) -> TheoryFrontier {
        TheoryFrontier::Chirp { alpha: self.alpha, beta: self.beta }
    }

    /// Box dimension of the graph over a window containing the origin.
    pub fn boxdim_at_origin(&self) -> f64 {
        2.0 - ((1.0 + self.alpha) / (1.0 + self.beta)).min(1.0)
    }

    /// Hausdorff dimension of the graph (rectifiable away from the origin).
    pub fn hausdorff_dim(&self) -> f64 {
        1.0
    }
}

pub fn build_chirp(alpha: f64, beta: f64) -> Result<ChirpTarget> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Domain(format!(
            "chirp parameters must be positive, got alpha={alpha}, beta={beta}"
        )));
    }
    Ok(ChirpTarget { alpha, beta })
}

/// Parsed catalog address, e.g. "fbm:a=0.3,lo=0.5,hi=0.9,seed=7".
#[derive(Debug, Clone, PartialEq)]
pub enum HurstSpec {
    Constant { h: f64 },
    SmoothSine { base: f64, amp: f64, freq: f64 },
    ChirpHurst { center: f64 },
    FbmSample { a: f64, lo: f64, hi: f64, seed: u64 },
    Weierstrass { hw: f64, lambda: f64, lo: f64, hi: f64 },
}

impl HurstSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (text.trim(), ""),
        };
        let mut kv = std::collections::BTreeMap::new();
        if !rest.is_empty() {
            for part in rest.split(',') {
                let (k, v) = part.split_once('=').ok_or_else(|| {
                    Error::Argument(format!("expected key=value, got '{part}'"))
                })?;
                kv.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        fn take(kv: &mut std::collections::BTreeMap<String, String>, key: &str) -> Result<f64> {
            kv.remove(key)
                .ok_or_else(|| Error::Argument(format!("missing required parameter '{key}'")))?
                .parse::<f64>()
                .map_err(|e| Error::Argument(format!("parameter '{key}': {e}")))
        }
        fn take_or(
            kv: &mut std::collections::BTreeMap<String, String>,
            key: &str,
            default: f64,
        ) -> Result<f64> {
            if kv.contains_key(key) {
                take(kv, key)
            } else {
                Ok(default)
            }
        }
        let spec = match name {
            "constant" => HurstSpec::Constant { h: take(&mut kv, "h")? },
            "smooth-sine" => HurstSpec::SmoothSine {
                base: take(&mut kv, "base")?,
                amp: take(&mut kv, "amp")?,
                freq: take(&mut kv, "freq")?,
            },
            "chirp-hurst" => HurstSpec::ChirpHurst { center: take_or(&mut kv, "center", 0.0)? },
            "fbm" => {
                let a = take(&mut kv, "a")?;
                let lo = take(&mut kv, "lo")?;
                let hi = take(&mut kv, "hi")?;
                let seed = take(&mut kv, "seed")? as u64;
                HurstSpec::FbmSample { a, lo, hi, seed }
            }
            "weierstrass" => {
                let hw = take(&mut kv, "hw")?;
                let lambda = take(&mut kv, "lambda")?;
                let lo = take_or(&mut kv, "lo", 0.25)?;
                let hi = take_or(&mut kv, "hi", 0.75)?;
                HurstSpec::Weierstrass { hw, lambda, lo, hi }
            }
            other => {
                return Err(Error::Argument(format!("unknown Hurst kind '{other}'")));
            }
        };
        if let Some(stray) = kv.keys().next() {
            return Err(Error::Argument(format!(
                "unknown parameter '{stray}' for kind '{name}'"
            )));
        }
        Ok(spec)
    }
}

/// Builds a catalog entry from its parsed spec. The fbm-sample kind draws on
/// the supplied noise path; all other kinds ignore it.
pub fn build_hurst(spec: &HurstSpec, noise: Option<&FbmPath>) -> Result<HurstFunction> {
    match *spec {
        HurstSpec::Constant { h } => HurstFunction::constant(h),
        HurstSpec::SmoothSine { base, amp, freq } => HurstFunction::smooth_sine(base, amp, freq),
        HurstSpec::ChirpHurst { center } => Ok(HurstFunction::chirp_hurst_at(center)),
        HurstSpec::FbmSample { a, lo, hi, .. } => {
            let path = noise.ok_or_else(|| {
                Error::Argument("fbm-sample kind requires a backing noise path".into())
            })?;
            if (path.hurst() - a).abs() > 1e-9 {
                return Err(Error::Argument(format!(
                    "backing path has exponent {} but the spec asks for {a}",
                    path.hurst()
                )));
            }
            HurstFunction::fbm_sample(path, lo, hi)
        }
        HurstSpec::Weierstrass { hw, lambda, lo, hi } => {
            HurstFunction::weierstrass(hw, lambda, lo, hi)
        }
    }
}

/// One-stop construction from a catalog address: synthesizes backing noise
/// on a grid covering `support` when the kind requires it.
pub fn hurst_from_str(text: &str, support: (f64, f64), step: f64) -> Result<HurstFunction> {
    let spec = HurstSpec::parse(text)?;
    let noise = match spec {
        HurstSpec::FbmSample { a, seed, .. } => {
            let t_min = support.0.min(-step);
            let t_max = support.1.max(step);
            let grid = TimeGrid::new(t_min, t_max, step)?;
            Some(crate::noise::gen_fbm(&grid, a, seed)?)
        }
        _ => None,
    };
    build_hurst(&spec, noise.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::gen_fbm;
    use proptest::prelude::*;

    fn fbm_noise(a: f64, seed: u64) -> FbmPath {
        let grid = TimeGrid::new(-1.0, 1.0, 2f64.powi(-8)).unwrap();
        gen_fbm(&grid, a, seed).unwrap()
    }

    #[test]
    fn constant_evaluates_anywhere() {
        let h = HurstFunction::constant(0.3).unwrap();
        assert_eq!(h.eval(7.0).unwrap(), 0.3);
        assert_eq!(hurst_eval(&h, -123.0).unwrap(), 0.3);
        assert!(h.meta().smooth);
    }

    #[test]
    fn chirp_hurst_matches_closed_form() {
        let h = HurstFunction::chirp_hurst();
        assert_eq!(h.eval(0.0).unwrap(), 0.75);
        let t = 0.1f64;
        let expect = 0.75 + t * (1.0 / (t * t)).sin();
        assert!((h.eval(t).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn chirp_hurst_support_is_restricted() {
        // at t = sqrt(2/pi) the raw formula exits (0, 1), so the support
        // must exclude it
        let h = HurstFunction::chirp_hurst();
        let t = (2.0 / std::f64::consts::PI).sqrt();
        assert!(0.75 + t > 1.0);
        assert!(matches!(h.eval(t), Err(Error::Support(_))));
    }

    #[test]
    fn fbm_sample_rescales_into_target_interval() {
        let noise = fbm_noise(0.375, 7);
        let h = HurstFunction::fbm_sample(&noise, 0.5, 0.75).unwrap();
        let grid = noise.grid();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for i in 0..grid.len() {
            let v = h.eval(grid.point(i)).unwrap();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert!(lo >= 0.5 && hi <= 0.75, "range [{lo}, {hi}]");
        // the rescale is tight: both ends are attained
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.75).abs() < 1e-12);
    }

    #[test]
    fn fbm_sample_frontier_value_at_zero_is_a() {
        let noise = fbm_noise(0.375, 7);
        let h = HurstFunction::fbm_sample(&noise, 0.5, 0.75).unwrap();
        let fr = h.meta().frontier.unwrap().at(0.33).unwrap();
        assert_eq!(fr.eval(0.0), 0.375);
    }

    #[test]
    fn rescale_target_outside_unit_interval_is_rejected() {
        let noise = fbm_noise(0.5, 1);
        assert!(HurstFunction::fbm_sample(&noise, 0.5, 1.2).is_err());
        assert!(HurstFunction::fbm_sample(&noise, -0.1, 0.5).is_err());
        assert!(HurstFunction::weierstrass(0.4, 2.0, 0.0, 0.8).is_err());
    }

    #[test]
    fn weierstrass_truncation_is_stable_under_doubling() {
        let h = HurstFunction::weierstrass(0.4, 2.0, 0.25, 0.75).unwrap();
        let (n_terms, offset, scale) = match h.kind {
            HurstKind::Weierstrass { n_terms, offset, scale, .. } => (n_terms, offset, scale),
            _ => unreachable!(),
        };
        let eval_n = |t: f64, n: u32| -> f64 {
            let mut acc = 0.0;
            for k in 0..=n {
                acc += 2f64.powf(-(k as f64) * 0.4) * ((2f64.powi(k as i32) * t).cos());
            }
            offset + scale * acc
        };
        for i in 0..200 {
            let t = -1.0 + i as f64 * 0.01;
            let delta = (eval_n(t, n_terms) - eval_n(t, 2 * n_terms)).abs();
            assert!(delta <= 1e-8, "t={t}: doubling moved the value by {delta}");
        }
    }

    #[test]
    fn metadata_frontier_and_exponents_are_consistent() {
        // alpha = -inf{s' : sigma(s') >= 0} and alpha~ = sigma(0) on a dense grid
        let entries = vec![
            HurstFunction::chirp_hurst(),
            HurstFunction::fbm_sample(&fbm_noise(0.3, 5), 0.5, 0.9).unwrap(),
            HurstFunction::fbm_sample(&fbm_noise(0.7, 9), 0.2, 0.4).unwrap(),
        ];
        for h in &entries {
            let meta = h.meta();
            let Some(fr_span) = meta.frontier else { continue };
            let t_probe = match fr_span {
                TSpan::Everywhere(_) => 0.25,
                TSpan::At(t0, _) => t0,
            };
            let fr = fr_span.at(t_probe).unwrap();
            let mut root = f64::NAN;
            let mut s = -2.0;
            while s <= 2.0 {
                if fr.eval(s) >= 0.0 {
                    root = s;
                    break;
                }
                s += 1e-3;
            }
            let alpha = meta.pointwise_exp.unwrap().at(t_probe).unwrap();
            let local = meta.local_exp.unwrap().at(t_probe).unwrap();
            assert!((-root - alpha).abs() < 2e-3, "{h}: alpha {alpha} vs {}", -root);
            assert!((fr.eval(0.0) - local).abs() < 1e-12, "{h}");
        }
    }

    #[test]
    fn chirp_target_matches_published_values() {
        let c = build_chirp(0.5, 1.0).unwrap();
        assert_eq!(c.eval(0.0), 0.0);
        assert!((c.frontier_at_origin().eval(0.0) - 0.25).abs() < 1e-15);
        assert!((c.boxdim_at_origin() - 1.25).abs() < 1e-15);
        assert_eq!(c.hausdorff_dim(), 1.0);
        assert!(build_chirp(0.0, 1.0).is_err());
    }

    #[test]
    fn chirp_target_is_even_with_known_envelope() {
        let c = build_chirp(0.5, 1.0).unwrap();
        for &x in &[0.01, 0.1, 0.5, 1.0] {
            assert_eq!(c.eval(x), c.eval(-x));
            assert!(c.eval(x).abs() <= x.abs().powf(0.5) + 1e-15);
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        let s = HurstSpec::parse("fbm:a=0.3,lo=0.5,hi=0.9,seed=7").unwrap();
        assert_eq!(s, HurstSpec::FbmSample { a: 0.3, lo: 0.5, hi: 0.9, seed: 7 });
        let s = HurstSpec::parse("constant:h=0.6").unwrap();
        assert_eq!(s, HurstSpec::Constant { h: 0.6 });
        let s = HurstSpec::parse("chirp-hurst").unwrap();
        assert_eq!(s, HurstSpec::ChirpHurst { center: 0.0 });
        let s = HurstSpec::parse("chirp-hurst:center=0.5").unwrap();
        assert_eq!(s, HurstSpec::ChirpHurst { center: 0.5 });
        let s = HurstSpec::parse("weierstrass:hw=0.4,lambda=2").unwrap();
        assert_eq!(s, HurstSpec::Weierstrass { hw: 0.4, lambda: 2.0, lo: 0.25, hi: 0.75 });
        assert!(HurstSpec::parse("fbm:a=0.3").is_err());
        assert!(HurstSpec::parse("constant:h=0.6,bogus=1").is_err());
        assert!(HurstSpec::parse("nope:x=1").is_err());
    }

    #[test]
    fn string_construction_builds_working_functions() {
        let h = hurst_from_str("fbm:a=0.3,lo=0.5,hi=0.9,seed=7", (-1.0, 1.0), 2f64.powi(-8))
            .unwrap();
        let v = h.eval(0.5).unwrap();
        assert!(v >= 0.5 && v <= 0.9);
        let h2 = hurst_from_str("fbm:a=0.3,lo=0.5,hi=0.9,seed=7", (-1.0, 1.0), 2f64.powi(-8))
            .unwrap();
        assert_eq!(h.eval(0.25).unwrap(), h2.eval(0.25).unwrap());
    }

    #[test]
    fn generic_samples_validate_range() {
        let grid = TimeGrid::new(-1.0, 1.0, 0.5).unwrap();
        let good = Samples1D::new(grid.clone(), vec![0.2, 0.4, 0.6, 0.5, 0.3]).unwrap();
        assert!(HurstFunction::from_samples(good).is_ok());
        let bad = Samples1D::new(grid, vec![0.2, 0.4, 1.6, 0.5, 0.3]).unwrap();
        assert!(HurstFunction::from_samples(bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn catalog_values_stay_inside_unit_interval(
            seed in any::<u64>(),
            pick in 0usize..4,
            t_idx in 0usize..200,
        ) {
            let h = match pick {
                0 => HurstFunction::constant(0.3).unwrap(),
                1 => HurstFunction::smooth_sine(0.6, 0.2, 3.0).unwrap(),
                2 => HurstFunction::chirp_hurst(),
                _ => HurstFunction::fbm_sample(&fbm_noise(0.4, seed), 0.3, 0.8).unwrap(),
            };
            let (lo, hi) = h.support().unwrap_or((-1.0, 1.0));
            let t = lo + (hi - lo) * (t_idx as f64) / 199.0;
            let v = h.eval(t).unwrap();
            prop_assert!(v > 0.0 && v < 1.0, "{} at {}: {}", h, t, v);
        }
    }
}
