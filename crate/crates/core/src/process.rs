//! Intensity and filtering models for a filtered non-homogeneous Poisson
//! process on [0, 1], plus the sampler for the detected points of one sweep.
//!
//! Both model types validate on construction (and on deserialization, which
//! goes through the same constructors), so every model in circulation
//! satisfies its invariants: rates are nonnegative, filter values lie in
//! [0, 1] and are nonincreasing.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};

/// Serialized form of an [`IntensityModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntensitySpec {
    /// λ(x) = c0 + c1·x.
    Linear { c0: f64, c1: f64 },
    /// Piecewise-constant rate: `values[i]` on `[breakpoints[i], breakpoints[i+1])`.
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
    /// Rate tabulated on `grid`, linearly interpolated.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
enum IntensityKind {
    Linear { c0: f64, c1: f64 },
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64>, cumulative: Vec<f64> },
    Tabulated { grid: Vec<f64>, values: Vec<f64>, cumulative: Vec<f64> },
}

/// Rate function λ of the underlying NHPP, in events per unit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntensitySpec", into = "IntensitySpec")]
pub struct IntensityModel {
    kind: IntensityKind,
}

fn check_grid(name: &str, grid: &[f64], values: usize) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidModel(format!("{name}: need at least two grid points")));
    }
    if grid.len() != values {
        return Err(Error::InvalidModel(format!(
            "{name}: {} grid points but {values} values",
            grid.len()
        )));
    }
    if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
        return Err(Error::InvalidModel(format!("{name}: grid must start at 0 and end at 1")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidModel(format!("{name}: grid must be strictly increasing")));
    }
    Ok(())
}

/// Index `i` of the grid segment `[grid[i], grid[i+1])` holding `x`; the last
/// segment is closed on the right.
fn segment(grid: &[f64], x: f64) -> usize {
    let i = grid.partition_point(|&g| g <= x);
    i.saturating_sub(1).min(grid.len() - 2)
}

impl IntensityModel {
    pub fn linear(c0: f64, c1: f64) -> Result<Self> {
        Self::try_from(IntensitySpec::Linear { c0, c1 })
    }

    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::try_from(IntensitySpec::Piecewise { breakpoints, values })
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::try_from(IntensitySpec::Tabulated { grid, values })
    }

    /// Constant rate `c` on [0, 1].
    pub fn constant(c: f64) -> Result<Self> {
        Self::linear(c, 0.0)
    }

    /// λ(x), right-continuous at piecewise breakpoints.
    pub fn rate(&self, x: f64) -> f64 {
        match &self.kind {
            IntensityKind::Linear { c0, c1 } => c0 + c1 * x,
            IntensityKind::Piecewise { breakpoints, values, .. } => {
                values[segment(breakpoints, x)]
            }
            IntensityKind::Tabulated { grid, values, .. } => {
                let i = segment(grid, x);
                let w = (x - grid[i]) / (grid[i + 1] - grid[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        }
    }

    /// Supremum of λ over [0, 1].
    pub fn max_rate(&self) -> f64 {
        match &self.kind {
            IntensityKind::Linear { c0, c1 } => c0.max(c0 + c1),
            IntensityKind::Piecewise { values, .. } | IntensityKind::Tabulated { values, .. } => {
                values.iter().copied().fold(0.0, f64::max)
            }
        }
    }

    /// Λ(y) = ∫₀^y λ.
    pub fn cif(&self, y: f64) -> Result<f64> {
        check_unit(y)?;
        Ok(self.cif_unchecked(y))
    }

    pub(crate) fn cif_unchecked(&self, y: f64) -> f64 {
        match &self.kind {
            IntensityKind::Linear { c0, c1 } => c0 * y + 0.5 * c1 * y * y,
            IntensityKind::Piecewise { breakpoints, values, cumulative } => {
                let i = segment(breakpoints, y);
                cumulative[i] + values[i] * (y - breakpoints[i])
            }
            IntensityKind::Tabulated { grid, values, cumulative } => {
                // trapezoid over the partial segment; exact for the interpolant
                let i = segment(grid, y);
                let h = y - grid[i];
                let at_y = self.rate(y);
                cumulative[i] + 0.5 * h * (values[i] + at_y)
            }
        }
    }

    /// Smallest u with Λ(u) = q, for 0 < q ≤ Λ(1). Only defined for the
    /// kinds with a closed-form inverse.
    fn cif_inverse(&self, q: f64) -> Option<f64> {
        match &self.kind {
            IntensityKind::Linear { c0, c1 } => {
                let disc = (c0 * c0 + 2.0 * c1 * q).max(0.0);
                let denom = c0 + disc.sqrt();
                Some(if denom > 0.0 { 2.0 * q / denom } else { 0.0 })
            }
            IntensityKind::Piecewise { breakpoints, values, cumulative } => {
                let k = cumulative.partition_point(|&c| c < q).saturating_sub(1);
                let k = k.min(values.len() - 1);
                if values[k] > 0.0 {
                    Some(breakpoints[k] + (q - cumulative[k]) / values[k])
                } else {
                    Some(breakpoints[k])
                }
            }
            IntensityKind::Tabulated { .. } => None,
        }
    }

    /// One location from the density λ(·)/Λ(endpoint) on [0, endpoint].
    fn sample_location<R: Rng + ?Sized>(&self, rng: &mut R, endpoint: f64, cif_end: f64) -> f64 {
        if let Some(u) = self.cif_inverse(rng.random::<f64>() * cif_end) {
            return u.clamp(0.0, endpoint);
        }
        let bound = self.max_rate();
        loop {
            let u = rng.random::<f64>() * endpoint;
            if rng.random::<f64>() * bound <= self.rate(u) {
                return u;
            }
        }
    }
}

impl TryFrom<IntensitySpec> for IntensityModel {
    type Error = Error;

    fn try_from(spec: IntensitySpec) -> Result<Self> {
        let kind = match spec {
            IntensitySpec::Linear { c0, c1 } => {
                if !(c0.is_finite() && c1.is_finite()) {
                    return Err(Error::InvalidModel("linear: non-finite coefficient".into()));
                }
                if c0 < 0.0 || c0 + c1 < 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "linear: rate {c0} + {c1}·x is negative somewhere on [0, 1]"
                    )));
                }
                IntensityKind::Linear { c0, c1 }
            }
            IntensitySpec::Piecewise { breakpoints, values } => {
                check_grid("piecewise", &breakpoints, values.len() + 1)?;
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidModel("piecewise: rates must be finite and >= 0".into()));
                }
                let mut cumulative = Vec::with_capacity(breakpoints.len());
                cumulative.push(0.0);
                for (i, v) in values.iter().enumerate() {
                    let last = cumulative[i];
                    cumulative.push(last + v * (breakpoints[i + 1] - breakpoints[i]));
                }
                IntensityKind::Piecewise { breakpoints, values, cumulative }
            }
            IntensitySpec::Tabulated { grid, values } => {
                check_grid("tabulated", &grid, values.len())?;
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidModel("tabulated: rates must be finite and >= 0".into()));
                }
                let mut cumulative = Vec::with_capacity(grid.len());
                cumulative.push(0.0);
                for i in 0..grid.len() - 1 {
                    let last = cumulative[i];
                    cumulative.push(last + 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]));
                }
                IntensityKind::Tabulated { grid, values, cumulative }
            }
        };
        Ok(Self { kind })
    }
}

impl From<IntensityModel> for IntensitySpec {
    fn from(m: IntensityModel) -> Self {
        match m.kind {
            IntensityKind::Linear { c0, c1 } => IntensitySpec::Linear { c0, c1 },
            IntensityKind::Piecewise { breakpoints, values, .. } => {
                IntensitySpec::Piecewise { breakpoints, values }
            }
            IntensityKind::Tabulated { grid, values, .. } => IntensitySpec::Tabulated { grid, values },
        }
    }
}

/// Serialized form of a [`FilterModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterSpec {
    Constant { gamma: f64 },
    /// γ(x) = exp(−x/scale).
    Exponential { scale: f64 },
    /// Linear interpolation between `(breakpoints[i], values[i])`.
    PiecewiseLinear { breakpoints: Vec<f64>, values: Vec<f64> },
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

/// Known detection probability γ(y) for a sweep ending at y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FilterSpec", into = "FilterSpec")]
pub struct FilterModel {
    spec: FilterSpec,
}

impl FilterModel {
    pub fn constant(gamma: f64) -> Result<Self> {
        Self::try_from(FilterSpec::Constant { gamma })
    }

    pub fn exponential(scale: f64) -> Result<Self> {
        Self::try_from(FilterSpec::Exponential { scale })
    }

    pub fn piecewise_linear(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::try_from(FilterSpec::PiecewiseLinear { breakpoints, values })
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::try_from(FilterSpec::Tabulated { grid, values })
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    /// γ(y), with a domain check.
    pub fn gamma(&self, y: f64) -> Result<f64> {
        check_unit(y)?;
        Ok(self.gamma_unchecked(y))
    }

    pub(crate) fn gamma_unchecked(&self, y: f64) -> f64 {
        match &self.spec {
            FilterSpec::Constant { gamma } => *gamma,
            FilterSpec::Exponential { scale } => (-y / scale).exp(),
            FilterSpec::PiecewiseLinear { breakpoints: grid, values }
            | FilterSpec::Tabulated { grid, values } => {
                let i = segment(grid, y);
                let w = (y - grid[i]) / (grid[i + 1] - grid[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        }
    }

    /// inf{γ(y) > 0 : y ∈ (0, 1]}. Exact when γ(1) > 0, otherwise the
    /// smallest positive value on a 10⁴-point grid.
    pub fn gamma_min(&self) -> f64 {
        let at_one = self.gamma_unchecked(1.0);
        if at_one > 0.0 {
            return at_one;
        }
        (1..=10_000)
            .map(|i| self.gamma_unchecked(i as f64 / 10_000.0))
            .filter(|g| *g > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<FilterSpec> for FilterModel {
    type Error = Error;

    fn try_from(spec: FilterSpec) -> Result<Self> {
        match &spec {
            FilterSpec::Constant { gamma } => {
                if !(0.0..=1.0).contains(gamma) {
                    return Err(Error::InvalidModel(format!("constant filter {gamma} not in [0, 1]")));
                }
            }
            FilterSpec::Exponential { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::InvalidModel(format!("exponential filter scale {scale} must be > 0")));
                }
            }
            FilterSpec::PiecewiseLinear { breakpoints: grid, values }
            | FilterSpec::Tabulated { grid, values } => {
                check_grid("filter", grid, values.len())?;
                if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidModel("filter values must lie in [0, 1]".into()));
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::InvalidModel("filter must be nonincreasing".into()));
                }
            }
        }
        Ok(Self { spec })
    }
}

impl From<FilterModel> for FilterSpec {
    fn from(m: FilterModel) -> Self {
        m.spec
    }
}

/// Sorted locations of detected events from one sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSample {
    locations: Vec<f64>,
}

impl PointSample {
    pub fn new(locations: Vec<f64>) -> Result<Self> {
        if locations.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Consistency("point sample not sorted".into()));
        }
        if locations.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Consistency("point sample outside [0, 1]".into()));
        }
        Ok(Self { locations })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Number of locations `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.locations.partition_point(|&p| p <= x)
    }
}

pub fn cif_eval(intensity: &IntensityModel, y: f64) -> Result<f64> {
    intensity.cif(y)
}

pub fn filter_eval(filter: &FilterModel, y: f64) -> Result<f64> {
    filter.gamma(y)
}

/// Expected reward γ(y)·Λ(y) of sweeping [0, y].
pub fn objective(intensity: &IntensityModel, filter: &FilterModel, y: f64) -> Result<f64> {
    check_unit(y)?;
    Ok(filter.gamma_unchecked(y) * intensity.cif_unchecked(y))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximiser of γΛ on [0, 1]: uniform grid scan, then golden-section search
/// on the two grid cells around the best grid point.
pub fn argmax_objective(intensity: &IntensityModel, filter: &FilterModel, grid_size: usize) -> (f64, f64) {
    let n = grid_size.max(2);
    let f = |y: f64| filter.gamma_unchecked(y) * intensity.cif_unchecked(y);
    let grid = |i: usize| if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 };

    let (mut best_i, mut best_v) = (0, f(0.0));
    for i in 1..n {
        let v = f(grid(i));
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let mut lo = grid(best_i.saturating_sub(1));
    let mut hi = grid((best_i + 1).min(n - 1));
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-12 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut best = (grid(best_i), best_v);
    for y in [mid, lo, hi] {
        let v = f(y);
        if v > best.1 {
            best = (y, v);
        }
    }
    best
}

/// Detected events of one sweep of [0, endpoint] with detection probability
/// `gamma_value`: N ~ Poisson(γΛ(endpoint)) then N i.i.d. locations with
/// density λ/Λ(endpoint). This is the law of the Bernoulli-thinned NHPP
/// restricted to [0, endpoint].
pub fn sample_detected_events<R: Rng + ?Sized>(
    rng: &mut R,
    intensity: &IntensityModel,
    cif_at_endpoint: f64,
    gamma_value: f64,
    endpoint: f64,
) -> PointSample {
    let mean = gamma_value * cif_at_endpoint;
    if endpoint <= 0.0 || !(mean > 0.0) {
        return PointSample::empty();
    }
    let count = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    let mut locations: Vec<f64> = (0..count)
        .map(|_| intensity.sample_location(rng, endpoint, cif_at_endpoint))
        .collect();
    locations.sort_by(f64::total_cmp);
    PointSample { locations }
}

/// Largest slope |γΛ(b) − γΛ(a)|/(b − a) between consecutive points of a
/// uniform grid with `grid_size` points.
pub fn lipschitz_estimate(intensity: &IntensityModel, filter: &FilterModel, grid_size: usize) -> f64 {
    let n = grid_size.max(2);
    let h = 1.0 / (n - 1) as f64;
    let f = |y: f64| filter.gamma_unchecked(y) * intensity.cif_unchecked(y);
    let mut prev = f(0.0);
    let mut worst: f64 = 0.0;
    for i in 1..n {
        let y = if i == n - 1 { 1.0 } else { i as f64 * h };
        let v = f(y);
        worst = worst.max((v - prev).abs() / h);
        prev = v;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn experiment_two_filter() -> FilterModel {
        FilterModel::piecewise_linear(vec![0.0, 0.25, 0.5, 0.8, 1.0], vec![1.0, 1.0, 0.5, 0.5, 0.3]).unwrap()
    }

    /// Composite Simpson with many panels; independent of the closed forms.
    fn quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn linear_cif_matches_quadrature() {
        let lam = IntensityModel::linear(20.0, -20.0).unwrap();
        assert_eq!(lam.cif(0.0).unwrap(), 0.0);
        for y in [0.125, 0.5, 1.0] {
            let oracle = quadrature(|x| 20.0 - 20.0 * x, 0.0, y);
            assert_abs_diff_eq!(lam.cif(y).unwrap(), oracle, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(lam.cif(0.125).unwrap(), 2.34375, epsilon = 1e-12);
        assert_abs_diff_eq!(lam.cif(1.0).unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn piecewise_and_tabulated_cif() {
        let pc = IntensityModel::piecewise_constant(vec![0.0, 0.5, 1.0], vec![2.0, 6.0]).unwrap();
        assert_abs_diff_eq!(pc.cif(0.25).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pc.cif(0.75).unwrap(), 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pc.cif(1.0).unwrap(), 4.0, epsilon = 1e-12);

        let tab = IntensityModel::tabulated(vec![0.0, 0.5, 1.0], vec![0.0, 10.0, 0.0]).unwrap();
        let oracle = quadrature(|x| tab.rate(x), 0.0, 0.7);
        assert_abs_diff_eq!(tab.cif(0.7).unwrap(), oracle, epsilon = 1e-6);
        assert_abs_diff_eq!(tab.cif(1.0).unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn domain_errors() {
        let lam = IntensityModel::linear(1.0, 0.0).unwrap();
        let g = FilterModel::constant(0.7).unwrap();
        assert_eq!(lam.cif(1.5), Err(Error::Domain(1.5)));
        assert_eq!(g.gamma(-0.1), Err(Error::Domain(-0.1)));
        assert!(objective(&lam, &g, 2.0).is_err());
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(IntensityModel::linear(1.0, -2.0).is_err());
        assert!(IntensityModel::piecewise_constant(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(IntensityModel::tabulated(vec![0.0, 0.6, 0.5, 1.0], vec![1.0; 4]).is_err());
        assert!(FilterModel::constant(1.2).is_err());
        assert!(FilterModel::exponential(0.0).is_err());
        assert!(FilterModel::tabulated(vec![0.0, 1.0], vec![0.2, 0.4]).is_err());
    }

    #[test]
    fn filter_values() {
        assert_eq!(FilterModel::exponential(1.0).unwrap().gamma(0.0).unwrap(), 1.0);
        assert_eq!(FilterModel::constant(0.7).unwrap().gamma(0.3).unwrap(), 0.7);
        let g = experiment_two_filter();
        assert_abs_diff_eq!(g.gamma(0.6).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.gamma(0.1).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.gamma(0.3).unwrap(), 1.5 - 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(g.gamma(0.9).unwrap(), 1.3 - 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(g.gamma_min(), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn objective_values() {
        let lam = IntensityModel::linear(20.0, -20.0).unwrap();
        let g1 = FilterModel::exponential(1.0).unwrap();
        assert_eq!(objective(&lam, &g1, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(objective(&lam, &g1, 0.586).unwrap(), 4.61, epsilon = 0.005);
        assert_abs_diff_eq!(objective(&lam, &experiment_two_filter(), 0.8).unwrap(), 4.8, epsilon = 1e-12);
    }

    #[test]
    fn argmax_examples() {
        let lam = IntensityModel::linear(20.0, -20.0).unwrap();
        let (z, v) = argmax_objective(&lam, &FilterModel::exponential(1.0).unwrap(), 10_000);
        // stationary point of (20x − 10x²)e^{−x}: x² − 4x + 2 = 0
        assert_abs_diff_eq!(z, 2.0 - 2f64.sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(v, 4.61, epsilon = 0.005);

        let (z, v) = argmax_objective(&lam, &experiment_two_filter(), 10_000);
        assert_abs_diff_eq!(z, 0.8, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 4.8, epsilon = 1e-9);

        let unit = IntensityModel::constant(1.0).unwrap();
        let (z, v) = argmax_objective(&unit, &FilterModel::constant(1.0).unwrap(), 10_000);
        assert_eq!((z, v), (1.0, 1.0));
    }

    #[test]
    fn sampler_degenerate_cases() {
        let mut rng = seeded(1);
        let lam = IntensityModel::linear(20.0, -20.0).unwrap();
        assert!(sample_detected_events(&mut rng, &lam, 0.0, 0.5, 0.0).is_empty());
        assert!(sample_detected_events(&mut rng, &lam, 10.0, 0.0, 1.0).is_empty());
    }

    fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    fn check_sampler(lam: &IntensityModel, gamma: f64, endpoint: f64, seed: u64) {
        let mut rng = seeded(seed);
        let cif_end = lam.cif(endpoint).unwrap();
        let mean = gamma * cif_end;
        let draws = 100_000;
        let mut total = 0usize;
        let mut pooled = Vec::new();
        for _ in 0..draws {
            let s = sample_detected_events(&mut rng, lam, cif_end, gamma, endpoint);
            assert!(s.locations().windows(2).all(|w| w[0] <= w[1]));
            assert!(s.locations().iter().all(|&x| (0.0..=endpoint).contains(&x)));
            total += s.len();
            if pooled.len() < 20_000 {
                pooled.extend_from_slice(s.locations());
            }
        }
        let emp = total as f64 / draws as f64;
        let se = (mean / draws as f64).sqrt();
        assert!((emp - mean).abs() < 4.0 * se, "mean {emp} vs {mean}");
        let d = ks_statistic(pooled.clone(), |x| lam.cif_unchecked(x) / cif_end);
        let crit = 1.628 / (pooled.len() as f64).sqrt();
        assert!(d < crit, "KS {d} >= {crit}");
    }

    #[test]
    fn sampler_linear_matches_count_and_shape() {
        let lam = IntensityModel::linear(20.0, -20.0).unwrap();
        check_sampler(&lam, (-1.0f64).exp(), 1.0, 11);
        check_sampler(&lam, 0.5, 0.6, 12);
    }

    #[test]
    fn sampler_piecewise_and_tabulated() {
        let pc = IntensityModel::piecewise_constant(vec![0.0, 0.3, 0.5, 1.0], vec![4.0, 0.0, 8.0]).unwrap();
        check_sampler(&pc, 0.8, 0.9, 13);
        let tab = IntensityModel::tabulated(vec![0.0, 0.4, 1.0], vec![1.0, 9.0, 3.0]).unwrap();
        check_sampler(&tab, 0.6, 0.75, 14);
    }

    #[test]
    fn lipschitz_of_first_experiment_is_twenty() {
        let lam = IntensityModel::linear(20.0, -20.0).unwrap();
        let g = FilterModel::exponential(1.0).unwrap();
        let l = lipschitz_estimate(&lam, &g, 10_001);
        assert!(l <= 20.0 && l > 19.9, "{l}");
    }

    #[test]
    fn serde_round_trip_validates() {
        let lam: IntensityModel = serde_json::from_str(r#"{"kind":"linear","c0":20,"c1":-20}"#).unwrap();
        assert_eq!(lam, IntensityModel::linear(20.0, -20.0).unwrap());
        assert!(serde_json::from_str::<IntensityModel>(r#"{"kind":"linear","c0":1,"c1":-5}"#).is_err());
        assert!(serde_json::from_str::<FilterModel>(r#"{"kind":"constant","gamma":1,"extra":2}"#).is_err());
        let g = experiment_two_filter();
        let back: FilterModel = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    fn any_intensity() -> impl Strategy<Value = IntensityModel> {
        prop_oneof![
            (0.0..30.0f64, 0.0..1.0f64).prop_map(|(c0, t)| IntensityModel::linear(c0, -c0 * t).unwrap()),
            prop::collection::vec(0.0..20.0f64, 1..6).prop_map(|v| {
                let n = v.len();
                let bp = (0..=n).map(|i| i as f64 / n as f64).collect();
                IntensityModel::piecewise_constant(bp, v).unwrap()
            }),
            prop::collection::vec(0.0..20.0f64, 2..6).prop_map(|v| {
                let n = v.len();
                let g = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
                IntensityModel::tabulated(g, v).unwrap()
            }),
        ]
    }

    fn any_filter() -> impl Strategy<Value = FilterModel> {
        prop_oneof![
            (0.0..=1.0f64).prop_map(|g| FilterModel::constant(g).unwrap()),
            (0.05..10.0f64).prop_map(|s| FilterModel::exponential(s).unwrap()),
            prop::collection::vec(0.0..=1.0f64, 2..6).prop_map(|mut v| {
                v.sort_by(|a, b| b.total_cmp(a));
                let n = v.len();
                let g = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
                FilterModel::piecewise_linear(g, v).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn cif_nondecreasing(lam in any_intensity(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(lam.cif(hi).unwrap() >= lam.cif(lo).unwrap() - 1e-12);
        }

        #[test]
        fn filter_nonincreasing(g in any_filter(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(g.gamma(hi).unwrap() <= g.gamma(lo).unwrap() + 1e-12);
        }

        #[test]
        fn objective_below_rate_bound(lam in any_intensity(), g in any_filter(), y in 0.0..=1.0f64) {
            prop_assert!(objective(&lam, &g, y).unwrap() <= lam.max_rate() * y + 1e-9);
        }
    }
}
