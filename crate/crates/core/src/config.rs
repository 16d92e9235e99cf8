/// Numerical tolerances shared by every engine.
///
/// All thresholds used across the crate are derived from this one record so
/// a caller (or the CLI `--tol` flag) can tighten or relax them in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute tolerance for quadrature and identity checks.
    pub abs: f64,
    /// Relative tolerance for adaptive steps (ODE, root refinement).
    pub rel: f64,
    /// Rank-space event localization tolerance (log-time bisection).
    pub event: f64,
    /// Root-finding tolerance for monotone inversions such as (c')^{-1}.
    pub root: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abs: 1e-10,
            rel: 1e-8,
            event: 1e-12,
            root: 1e-12,
        }
    }
}

impl Tolerances {
    /// Scale the absolute/relative pair, keeping localization tolerances.
    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }
}

/// Default number of interior samples emitted by the free-boundary solver.
pub const FBVP_SAMPLES: usize = 1024;

/// Default rank-space grid for menu construction.
pub const MENU_GRID: usize = 512;

/// Default sample count when an analytic quantile segment must be
/// discretized into linear pieces (rank-band restriction of a segment that
/// has no closed form under the remap).
pub const ANALYTIC_SAMPLES: usize = 4096;

/// Default quantile discretization for smooth mean-preserving spreads.
pub const MPS_GRID: usize = 4096;
