//! Exact per-cell antiderivatives for the power kernels that appear in the
//! moving-average representations. Each quadrature cell carries the path as a
//! linear interpolant `alpha + beta * w` in the kernel variable `w`, so the
//! cell integral reduces to power moments that are evaluated in closed form.

/// Integral of w^(q-1) over [w2, w1]; equals (w1^q - w2^q)/q, with the q = 0
/// case continuing to ln(w1/w2). Both endpoints must be nonnegative, and
/// w2 = 0 is only admissible for q > 0.
pub fn pow_moment(w1: f64, w2: f64, q: f64) -> f64 {
    debug_assert!(w1 >= 0.0 && w2 >= 0.0);
    if q == 0.0 {
        return (w1 / w2).ln();
    }
    if w2 == 0.0 {
        debug_assert!(q > 0.0, "divergent moment: w2 = 0 with q = {q}");
        return w1.powf(q) / q;
    }
    (w1.powf(q) - w2.powf(q)) / q
}

/// Integral of w^(q-1) ln(w) over [w2, w1]. Antiderivative w^q (q ln w - 1)/q^2,
/// with the q = 0 case continuing to ln(w)^2 / 2.
pub fn pow_log_moment(w1: f64, w2: f64, q: f64) -> f64 {
    debug_assert!(w1 >= 0.0 && w2 >= 0.0);
    let prim = |w: f64| -> f64 {
        if w == 0.0 {
            debug_assert!(q > 0.0, "divergent log moment at w = 0 with q = {q}");
            return 0.0;
        }
        if q == 0.0 {
            let l = w.ln();
            0.5 * l * l
        } else {
            w.powf(q) * (q * w.ln() - 1.0) / (q * q)
        }
    };
    prim(w1) - prim(w2)
}

/// Integral of (alpha + beta w) w^(q1 - 1) over [w2, w1] with 0 <= w2 < w1.
///
/// `q1` is the kernel exponent plus one; the linear part shifts it by one
/// more. When the cell touches w = 0 with a nonpositive exponent the
/// constant part must vanish (the caller arranges alpha = 0 exactly there).
pub fn cell_linear_power(alpha: f64, beta: f64, w1: f64, w2: f64, q1: f64) -> f64 {
    debug_assert!(w2 < w1 && w2 >= 0.0);
    let p1 = w1.powf(q1);
    let p2 = if w2 > 0.0 { w2.powf(q1) } else { 0.0 };
    let constant = if alpha == 0.0 {
        0.0
    } else if q1 == 0.0 {
        alpha * (w1 / w2).ln()
    } else {
        debug_assert!(w2 > 0.0 || q1 > 0.0, "divergent moment: w2 = 0 with q1 = {q1}");
        alpha * (p1 - p2) / q1
    };
    constant + beta * (p1 * w1 - p2 * w2) / (q1 + 1.0)
}

/// Integral of (alpha + beta w) w^(q1 - 1) ln(w) over [w2, w1].
pub fn cell_linear_power_log(alpha: f64, beta: f64, w1: f64, w2: f64, q1: f64) -> f64 {
    debug_assert!(w2 < w1 && w2 >= 0.0);
    let q2 = q1 + 1.0;
    let l1 = w1.ln();
    let p1 = w1.powf(q1);
    let prim1_const = if q1 == 0.0 { 0.5 * l1 * l1 } else { p1 * (q1 * l1 - 1.0) / (q1 * q1) };
    let prim1_lin = p1 * w1 * (q2 * l1 - 1.0) / (q2 * q2);
    let (prim2_const, prim2_lin) = if w2 > 0.0 {
        let l2 = w2.ln();
        let p2 = w2.powf(q1);
        let c = if q1 == 0.0 { 0.5 * l2 * l2 } else { p2 * (q1 * l2 - 1.0) / (q1 * q1) };
        (c, p2 * w2 * (q2 * l2 - 1.0) / (q2 * q2))
    } else {
        debug_assert!(alpha == 0.0 || q1 > 0.0, "divergent log moment at w = 0 with q1 = {q1}");
        (0.0, 0.0)
    };
    let constant = if alpha == 0.0 { 0.0 } else { alpha * (prim1_const - prim2_const) };
    constant + beta * (prim1_lin - prim2_lin)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn power_moment_matches_quadrature() {
        for &q in &[-0.4, -0.2, 0.3, 0.7, 1.0, 1.8] {
            let exact = pow_moment(2.5, 0.5, q);
            let num = simpson(|w| w.powf(q - 1.0), 0.5, 2.5, 20_000);
            assert!((exact - num).abs() < 1e-9, "q={q}: {exact} vs {num}");
        }
    }

    #[test]
    fn zero_exponent_gives_logarithm() {
        let exact = pow_moment(3.0, 1.5, 0.0);
        assert!((exact - 2.0f64.ln()).abs() < 1e-14);
        let num = simpson(|w| 1.0 / w, 1.5, 3.0, 20_000);
        assert!((exact - num).abs() < 1e-10);
    }

    #[test]
    fn log_moment_matches_quadrature() {
        for &q in &[-0.3, 0.0, 0.4, 1.2] {
            let exact = pow_log_moment(2.0, 0.25, q);
            let num = simpson(|w| w.powf(q - 1.0) * w.ln(), 0.25, 2.0, 40_000);
            assert!((exact - num).abs() < 1e-8, "q={q}: {exact} vs {num}");
        }
    }

    #[test]
    fn linear_cell_matches_quadrature() {
        let (alpha, beta, q1) = (0.7, -1.3, -0.2);
        let exact = cell_linear_power(alpha, beta, 1.75, 0.25, q1);
        let num = simpson(|w| (alpha + beta * w) * w.powf(q1 - 1.0), 0.25, 1.75, 40_000);
        assert!((exact - num).abs() < 1e-9, "{exact} vs {num}");
    }

    #[test]
    fn singular_cell_with_vanishing_constant_part() {
        // q1 <= 0 at w2 = 0 is integrable once the constant part vanishes
        let (beta, q1) = (2.0, -0.2);
        let exact = cell_linear_power(0.0, beta, 1.0, 0.0, q1);
        // integral of beta * w^q1 over (0, 1] = beta / (q1 + 1)
        assert!((exact - beta / (q1 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn log_cell_near_zero_converges() {
        // beta * w^q1 ln(w) on (0, 1] with q1 + 1 > 0 is integrable:
        // the closed-form integral is -beta / (q1+1)^2
        let (beta, q1) = (1.0, -0.2);
        let exact = cell_linear_power_log(0.0, beta, 1.0, 0.0, q1);
        assert!((exact + beta / ((q1 + 1.0) * (q1 + 1.0))).abs() < 1e-12);
        // away from the singular endpoint the primitive matches quadrature
        let tail = cell_linear_power_log(0.0, beta, 1.0, 0.05, q1);
        let num = simpson(|w| beta * w.powf(q1) * w.ln(), 0.05, 1.0, 200_000);
        assert!((tail - num).abs() < 1e-9, "{tail} vs {num}");
    }
}
