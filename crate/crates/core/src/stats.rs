//! Small numerical helpers: least squares on log-log data, sample moments,
//! isotonic regression and the concave-monotone curve projection used by the
//! frontier estimator.

/// Ordinary least squares y = a + b x. Returns (slope, intercept, r2).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
}

/// Pool-adjacent-violators fit of a nonincreasing sequence (L2, unit weights).
pub fn pava_nonincreasing(v: &[f64]) -> Vec<f64> {
    // Blocks of (sum, count); merging whenever the nonincreasing order breaks.
    let mut sums: Vec<f64> = Vec::with_capacity(v.len());
    let mut counts: Vec<usize> = Vec::with_capacity(v.len());
    for &x in v {
        sums.push(x);
        counts.push(1);
        while sums.len() > 1 {
            let k = sums.len();
            let last = sums[k - 1] / counts[k - 1] as f64;
            let prev = sums[k - 2] / counts[k - 2] as f64;
            if prev >= last {
                break;
            }
            let s = sums.pop().unwrap();
            let c = counts.pop().unwrap();
            sums[k - 2] += s;
            counts[k - 2] += c;
        }
    }
    let mut out = Vec::with_capacity(v.len());
    for (s, c) in sums.iter().zip(&counts) {
        let m = s / *c as f64;
        out.extend(std::iter::repeat(m).take(*c));
    }
    out
}

/// L2 projection of `z` (sampled on a uniform abscissa of spacing `ds`) onto
/// the cone of concave, nondecreasing curves with slopes in [0, max_slope].
///
/// Parameterized by intercept + slope sequence; the slope sequence lives in
/// the box-bounded monotone cone, whose exact projection is clip(PAVA).
/// FISTA on the profiled objective converges comfortably for the short
/// curves (tens of points) this is used on.
pub fn project_concave_monotone(z: &[f64], ds: f64, max_slope: f64) -> Vec<f64> {
    let k = z.len();
    if k <= 1 {
        return z.to_vec();
    }
    let nslopes = k - 1;
    let project = |s: &[f64]| -> Vec<f64> {
        pava_nonincreasing(s)
            .into_iter()
            .map(|x| x.clamp(0.0, max_slope))
            .collect()
    };
    let curve = |s: &[f64]| -> (Vec<f64>, f64) {
        // cumulative curve with the intercept chosen optimally (mean residual)
        let mut c = Vec::with_capacity(k);
        let mut acc = 0.0;
        c.push(0.0);
        for &sl in s {
            acc += sl * ds;
            c.push(acc);
        }
        let sigma0 = z
            .iter()
            .zip(&c)
            .map(|(zi, ci)| zi - ci)
            .sum::<f64>()
            / k as f64;
        for ci in c.iter_mut() {
            *ci += sigma0;
        }
        (c, sigma0)
    };

    let lip = ds * ds * (k * k) as f64 + 1.0;
    let mut s = project(&vec![0.0; nslopes]);
    let mut y = s.clone();
    let mut t_acc: f64 = 1.0;
    for _ in 0..4000 {
        let (c, _) = curve(&y);
        // gradient of the profiled objective wrt each slope
        let mut grad = vec![0.0; nslopes];
        let mut tail = 0.0;
        for l in (0..nslopes).rev() {
            tail += c[l + 1] - z[l + 1];
            grad[l] = ds * tail;
        }
        let mut snew: Vec<f64> = y
            .iter()
            .zip(&grad)
            .map(|(yi, gi)| yi - gi / lip)
            .collect();
        snew = project(&snew);
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t_acc * t_acc).sqrt());
        let momentum = (t_acc - 1.0) / t_new;
        y = snew
            .iter()
            .zip(&s)
            .map(|(n, o)| n + momentum * (n - o))
            .collect();
        let delta: f64 = snew
            .iter()
            .zip(&s)
            .map(|(n, o)| (n - o).abs())
            .fold(0.0f64, f64::max);
        s = snew;
        t_acc = t_new;
        if delta < 1e-12 {
            break;
        }
    }
    curve(&s).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pava_pools_violators() {
        let fitted = pava_nonincreasing(&[3.0, 1.0, 2.0, 0.5]);
        assert_eq!(fitted, vec![3.0, 1.5, 1.5, 0.5]);
        // already nonincreasing is a fixed point
        let ok = pava_nonincreasing(&[2.0, 2.0, 1.0]);
        assert_eq!(ok, vec![2.0, 2.0, 1.0]);
    }

    #[test]
    fn projection_is_identity_on_feasible_curves() {
        let ds = 0.05;
        let z: Vec<f64> = (0..40).map(|i| (i as f64 * ds + 0.3).min(0.7)).collect();
        let p = project_concave_monotone(&z, ds, 1.0);
        for (a, b) in z.iter().zip(&p) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn projection_enforces_constraints() {
        let ds = 0.1;
        let z = vec![0.0, 0.5, 0.1, 0.9, 0.3, 1.4, 0.2];
        let p = project_concave_monotone(&z, ds, 1.0);
        for w in p.windows(2) {
            let slope = (w[1] - w[0]) / ds;
            assert!(slope >= -1e-9 && slope <= 1.0 + 1e-9, "slope {slope}");
        }
        for w in p.windows(3) {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            assert!(d2 <= d1 + 1e-9, "not concave: {d1} then {d2}");
        }
    }
}
