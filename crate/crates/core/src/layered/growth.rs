use serde::Serialize;

use super::LayeredGraph;
use crate::error::{Error, Result};

/// Subexponential ball-size budget `c * 2^((1 - epsilon) sqrt(n) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthBudget {
    pub epsilon: f64,
    pub c: f64,
}

/// `(1 - epsilon) sqrt(n) / 2`, the base-2 exponent shared by all growth bounds.
pub fn growth_exponent(epsilon: f64, n: f64) -> f64 {
    (1.0 - epsilon) * n.sqrt() / 2.0
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {epsilon}")))
    }
}

impl GrowthBudget {
    pub fn new(epsilon: f64, c: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        Ok(Self { epsilon, c })
    }

    /// Smallest `c` for which every ball of `g` fits the budget.
    pub fn auto_fit(g: &LayeredGraph, epsilon: f64) -> Result<Self> {
        Self::auto_fit_sizes(&g.sphere_sizes(), epsilon)
    }

    /// Same as [`GrowthBudget::auto_fit`] but from per-sphere sizes.
    pub fn auto_fit_sizes(sphere_sizes: &[usize], epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let mut ball = 0usize;
        let mut c: f64 = 0.0;
        for (n, &s) in sphere_sizes.iter().enumerate() {
            ball += s;
            c = c.max(ball as f64 / 2f64.powf(growth_exponent(epsilon, n as f64)));
        }
        Self::new(epsilon, c.max(f64::MIN_POSITIVE))
    }

    pub fn bound(&self, n: usize) -> f64 {
        self.c * 2f64.powf(growth_exponent(self.epsilon, n as f64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub ball: usize,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub budget: GrowthBudget,
    pub rows: Vec<GrowthRow>,
    pub pass: bool,
    pub first_failure: Option<usize>,
}

/// Compares `|B(n)|` with the budget for every `n <= g.radius()`.
pub fn growth_check(g: &LayeredGraph, budget: GrowthBudget) -> GrowthReport {
    growth_check_sizes(&g.sphere_sizes(), budget)
}

pub(crate) fn growth_check_sizes(sphere_sizes: &[usize], budget: GrowthBudget) -> GrowthReport {
    let mut ball = 0;
    let rows: Vec<GrowthRow> = sphere_sizes
        .iter()
        .enumerate()
        .map(|(n, &s)| {
            ball += s;
            let bound = budget.bound(n);
            GrowthRow { n, ball, bound, pass: ball as f64 <= bound }
        })
        .collect();
    let first_failure = rows.iter().find(|r| !r.pass).map(|r| r.n);
    GrowthReport { budget, pass: first_failure.is_none(), first_failure, rows }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticPoint {
    pub n: usize,
    /// `log2 sum_{k=1..n} 2^((1-eps) sqrt(k)/2)`.
    pub log2_sum: f64,
    /// `(1 - eps/2) sqrt(n) / 2`.
    pub log2_ball_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereBallReport {
    pub epsilon: f64,
    pub n_max: usize,
    pub points: Vec<DiagnosticPoint>,
    /// Smallest `n0` with the inequality holding on all of `n0..=n_max`.
    pub threshold: Option<usize>,
}

fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (1.0 + 2f64.powf(lo - hi)).log2()
}

/// Checks that summing the sphere bound up to `n` stays below the ball bound
/// with `epsilon / 2`, for every `n <= n_max`. Computed in the log domain.
pub fn sphere_to_ball_diagnostic(epsilon: f64, n_max: usize) -> Result<SphereBallReport> {
    check_epsilon(epsilon)?;
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let mut acc = f64::NEG_INFINITY;
    let mut points = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        acc = log2_add(acc, growth_exponent(epsilon, n as f64));
        let rhs = (1.0 - epsilon / 2.0) * (n as f64).sqrt() / 2.0;
        points.push(DiagnosticPoint { n, log2_sum: acc, log2_ball_bound: rhs, holds: acc <= rhs });
    }
    let threshold = match points.iter().rposition(|p| !p.holds) {
        None => Some(1),
        Some(i) if i + 1 < points.len() => Some(points[i + 1].n),
        Some(_) => None,
    };
    Ok(SphereBallReport { epsilon, n_max, points, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered::{generate, FamilySpec};

    #[test]
    fn bound_is_positive_and_nondecreasing() {
        let b = GrowthBudget::new(0.3, 0.5).unwrap();
        let mut prev = 0.0;
        for n in 0..500 {
            let x = b.bound(n);
            assert!(x > 0.0 && x >= prev);
            prev = x;
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GrowthBudget::new(1.0, 1.0).is_err());
        assert!(GrowthBudget::new(0.0, 1.0).is_err());
        assert!(GrowthBudget::new(0.5, 0.0).is_err());
        assert!(sphere_to_ball_diagnostic(0.5, 0).is_err());
    }

    #[test]
    fn large_c_passes_everything() {
        let g = generate(&FamilySpec::RegularTree { degree: 3 }, 6).unwrap();
        let c = g.ball_size(6).unwrap() as f64;
        assert!(growth_check(&g, GrowthBudget::new(0.5, c).unwrap()).pass);
    }

    #[test]
    fn auto_fit_is_tight() {
        let g = generate(&FamilySpec::Grid2d, 10).unwrap();
        let b = GrowthBudget::auto_fit(&g, 0.5).unwrap();
        assert!(growth_check(&g, b).pass);
        let smaller = GrowthBudget::new(0.5, b.c * 0.999).unwrap();
        assert!(!growth_check(&g, smaller).pass);
    }

    #[test]
    fn single_point_diagnostic() {
        let r = sphere_to_ball_diagnostic(0.5, 1).unwrap();
        assert_eq!(r.points.len(), 1);
        // 2^0.25 <= 2^0.375
        assert!(r.points[0].holds);
        assert_eq!(r.threshold, Some(1));
    }
}
