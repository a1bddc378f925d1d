use crate::error::{Error, Result};

/// Uniform time lattice `{ (i_lo + i) * step : i = 0..n }` aligned so that 0
/// is an exact lattice point (though not necessarily inside the grid).
///
/// Points are produced as `integer * step` rather than by accumulating sums,
/// so with dyadic steps every lattice point (including 0) is exact in f64.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    step: f64,
    i_lo: i64,
    n: usize,
}

impl TimeGrid {
    /// Builds the lattice covering [t_min, t_max] with the given step.
    /// Both bounds must sit on the lattice spanned by `step` through 0.
    pub fn new(t_min: f64, t_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::GridAlignment(format!("step {step} must be positive and finite")));
        }
        if !(t_min < t_max) {
            return Err(Error::GridAlignment(format!("t_min {t_min} must be below t_max {t_max}")));
        }
        let i_lo_f = t_min / step;
        let i_hi_f = t_max / step;
        let i_lo = i_lo_f.round() as i64;
        let i_hi = i_hi_f.round() as i64;
        let tol = 1e-6;
        if (i_lo as f64 - i_lo_f).abs() > tol || (i_hi as f64 - i_hi_f).abs() > tol {
            return Err(Error::GridAlignment(format!(
                "bounds [{t_min}, {t_max}] are not multiples of step {step}"
            )));
        }
        Ok(TimeGrid { step, i_lo, n: (i_hi - i_lo) as usize + 1 })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_min(&self) -> f64 {
        self.i_lo as f64 * self.step
    }

    pub fn t_max(&self) -> f64 {
        (self.i_lo + self.n as i64 - 1) as f64 * self.step
    }

    pub fn point(&self, i: usize) -> f64 {
        (self.i_lo + i as i64) as f64 * self.step
    }

    /// Index of the lattice point 0. Driving-noise grids must contain the
    /// origin; evaluation windows need not.
    pub fn zero_index(&self) -> usize {
        assert!(
            self.i_lo <= 0 && (-self.i_lo as usize) < self.n,
            "grid [{}, {}] does not contain 0",
            self.t_min(),
            self.t_max()
        );
        (-self.i_lo) as usize
    }

    /// Index of `t` if it is a lattice point (within a small tolerance).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i_f = t / self.step - self.i_lo as f64;
        let i = i_f.round();
        if (i_f - i).abs() > 1e-6 || i < 0.0 || i >= self.n as f64 {
            None
        } else {
            Some(i as usize)
        }
    }

    /// Largest index whose point is <= t (assuming t within range).
    pub fn floor_index(&self, t: f64) -> usize {
        let i_f = (t / self.step - self.i_lo as f64).floor();
        (i_f.max(0.0) as usize).min(self.n - 1)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min() - 1e-12 && t <= self.t_max() + 1e-12
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Grid mirrored through 0 (covering [-t_max, -t_min]).
    pub fn reflected(&self) -> TimeGrid {
        TimeGrid { step: self.step, i_lo: -(self.i_lo + self.n as i64 - 1), n: self.n }
    }

    /// Sub-lattice keeping every 2^k-th point. Bounds must stay aligned.
    pub fn coarsen(&self, factor: usize) -> Result<TimeGrid> {
        if factor == 0 || !factor.is_power_of_two() {
            return Err(Error::Argument(format!("coarsening factor {factor} must be a power of two")));
        }
        let f = factor as i64;
        if self.i_lo % f != 0 || (self.i_lo + self.n as i64 - 1) % f != 0 {
            return Err(Error::GridAlignment(
                "grid bounds are not aligned with the coarsening factor".into(),
            ));
        }
        Ok(TimeGrid {
            step: self.step * factor as f64,
            i_lo: self.i_lo / f,
            n: (self.n - 1) / factor + 1,
        })
    }
}

/// Anything sampled on a uniform grid: noise paths, synthesized fields,
/// deterministic calibration targets.
pub trait SampledPath {
    fn grid(&self) -> &TimeGrid;
    fn values(&self) -> &[f64];

    /// Piecewise-linear evaluation; errors outside the grid range.
    fn value_at(&self, t: f64) -> Result<f64> {
        let g = self.grid();
        if !g.contains(t) {
            return Err(Error::Support(format!(
                "t = {t} outside sampled range [{}, {}]",
                g.t_min(),
                g.t_max()
            )));
        }
        let i = g.floor_index(t).min(g.len() - 2);
        let x1 = g.point(i);
        let v = self.values();
        let s = (v[i + 1] - v[i]) / g.step();
        Ok(v[i] + s * (t - x1))
    }
}

/// Plain samples of a scalar function on a grid.
#[derive(Debug, Clone)]
pub struct Samples1D {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl Samples1D {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Samples1D { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        Samples1D { grid, values }
    }
}

impl SampledPath for Samples1D {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn values(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_contains_exact_zero() {
        let g = TimeGrid::new(-21.0, 21.0, 2f64.powi(-13)).unwrap();
        assert_eq!(g.point(g.zero_index()), 0.0);
        assert_eq!(g.len(), 2 * 21 * 8192 + 1);
        assert_eq!(g.t_min(), -21.0);
        assert_eq!(g.t_max(), 21.0);
    }

    #[test]
    fn rejects_misaligned_bounds() {
        assert!(TimeGrid::new(-1.0, 1.0, 0.3).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, -0.5).is_err());
        // windows away from the origin are fine as long as they stay on the lattice
        let w = TimeGrid::new(0.5, 1.0, 0.25).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.t_min(), 0.5);
    }

    #[test]
    fn reflection_mirrors_points() {
        let g = TimeGrid::new(-0.5, 2.0, 0.25).unwrap();
        let r = g.reflected();
        assert_eq!(r.t_min(), -2.0);
        assert_eq!(r.t_max(), 0.5);
        assert_eq!(r.len(), g.len());
    }

    #[test]
    fn coarsen_keeps_alignment() {
        let g = TimeGrid::new(-2.0, 2.0, 0.125).unwrap();
        let c = g.coarsen(4).unwrap();
        assert_eq!(c.step(), 0.5);
        assert_eq!(c.len(), 9);
        assert_eq!(c.point(c.zero_index()), 0.0);
    }

    #[test]
    fn linear_interpolation_between_points() {
        let g = TimeGrid::new(0.0, 1.0, 0.5).unwrap();
        let s = Samples1D::new(g, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(s.value_at(0.25).unwrap(), 0.5);
        assert!(s.value_at(1.5).is_err());
    }
}
