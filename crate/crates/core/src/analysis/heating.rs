use crate::engine::TimeSeries;
use crate::error::{Error, Result};

/// Default lifetime threshold, 1/e of the initial value.
pub fn default_threshold() -> f64 {
    (-1.0f64).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rectify {
    None,
    /// Track `|value|`, for period-doubled traces whose sign alternates.
    Absolute,
}

/// A heating time expressed in fast kicks, physical time and Floquet cycles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lifetime {
    pub kicks: f64,
    pub time: f64,
    pub cycles: f64,
}

/// Fractional sample position of the first downward crossing of
/// `threshold·|values[0]|`, interpolated linearly between samples.
pub fn first_crossing(values: &[f64], threshold: f64, rectify: Rectify) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty series".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let v = |i: usize| match rectify {
        Rectify::None => values[i],
        Rectify::Absolute => values[i].abs(),
    };
    let level = threshold * values[0].abs();
    if !(v(0) > level) {
        return Err(Error::InvalidParameter("initial value must be positive".into()));
    }
    for i in 1..values.len() {
        let (prev, cur) = (v(i - 1), v(i));
        if cur <= level {
            return Ok((i - 1) as f64 + (prev - level) / (prev - cur));
        }
    }
    Err(Error::ThresholdNotReached { last: v(values.len() - 1) })
}

fn interpolate(xs: &[f64], position: f64) -> f64 {
    let i = position.floor() as usize;
    if i + 1 >= xs.len() {
        return xs[xs.len() - 1];
    }
    let frac = position - i as f64;
    xs[i] + frac * (xs[i + 1] - xs[i])
}

/// Heating time of the x̂-magnetization, read from the samples taken just
/// before each slow kick.
pub fn heating_time(series: &TimeSeries, threshold: f64, rectify: Rectify) -> Result<Lifetime> {
    let samples = series.cycle_samples();
    let values: Vec<f64> = samples.iter().map(|r| r.x).collect();
    let position = first_crossing(&values, threshold, rectify)?;
    let kicks: Vec<f64> = samples.iter().map(|r| r.kick_index as f64).collect();
    let times: Vec<f64> = samples.iter().map(|r| r.time).collect();
    let kicks = interpolate(&kicks, position);
    Ok(Lifetime { kicks, time: interpolate(&times, position), cycles: kicks / series.protocol.fast_pulses as f64 })
}

/// Parameters of `Γ = (g/N) ε^λ + Γ_min`, rates in inverse fast kicks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatingFit {
    pub g: f64,
    pub lambda: f64,
    pub gamma_min: f64,
    /// Euclidean norm of the log-space residuals at the optimum.
    pub residual_norm: f64,
    pub fast_pulses: usize,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub stderr: f64,
    pub prefactor: f64,
}

struct LineFit {
    slope: f64,
    intercept: f64,
    residual_norm: f64,
    slope_stderr: f64,
}

fn least_squares_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = if x.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LineFit { slope, intercept, residual_norm: ssr.sqrt(), slope_stderr }
}

fn distinct(x: &[f64]) -> bool {
    x.iter().any(|&a| a != x[0])
}

/// Least-squares slope of `ln y` against `ln x`, with its standard error.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DegenerateFit("need at least two (x, y) pairs".into()));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit("power-law fits need positive finite data".into()));
    }
    if !distinct(x) {
        return Err(Error::DegenerateFit("all x values are equal".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let line = least_squares_line(&lx, &ly);
    Ok(PowerLawFit { exponent: line.slope, stderr: line.slope_stderr, prefactor: line.intercept.exp() })
}

/// Fits `Γ = (g/N) ε^λ + Γ_min` to rates `Γ = 1/lifetime` (lifetimes in
/// fast kicks). `Γ_min` is profiled: for each trial value the remaining
/// two parameters follow from a straight-line fit of `ln(Γ − Γ_min)`
/// against `ln ε`. A grid over `[0, min Γ)`, uniform plus geometrically
/// refined toward `min Γ`, locates the optimum; golden-section search then
/// refines it.
pub fn fit_combined_heating(epsilons: &[f64], lifetimes: &[f64], fast_pulses: usize) -> Result<HeatingFit> {
    const GRID: usize = 400;
    if epsilons.len() != lifetimes.len() || epsilons.len() < 4 {
        return Err(Error::DegenerateFit("need at least four (ε, lifetime) pairs".into()));
    }
    if fast_pulses == 0 {
        return Err(Error::DegenerateFit("N must be at least 1".into()));
    }
    if epsilons.iter().chain(lifetimes).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit("ε and lifetimes must be positive and finite".into()));
    }
    if !distinct(epsilons) {
        return Err(Error::DegenerateFit("all ε values are equal".into()));
    }
    let rates: Vec<f64> = lifetimes.iter().map(|t| 1.0 / t).collect();
    let log_eps: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = min_rate * (1.0 - 1e-12);
    let profile = |u: f64| -> LineFit {
        let y: Vec<f64> = rates.iter().map(|r| (r - u).ln()).collect();
        least_squares_line(&log_eps, &y)
    };
    let objective = |u: f64| profile(u).residual_norm;

    // uniform in Γ_min, plus geometric steps toward min Γ where the
    // log-residual valley narrows
    let mut grid: Vec<f64> = (0..GRID).map(|k| upper * k as f64 / GRID as f64).collect();
    grid.extend((1..=GRID).map(|k| min_rate * (1.0 - 10f64.powf(-12.0 * k as f64 / GRID as f64))));
    grid.retain(|&u| u <= upper);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let best = (0..grid.len())
        .min_by(|&a, &b| objective(grid[a]).total_cmp(&objective(grid[b])))
        .expect("grid is nonempty");
    let mut lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let mut hi = if best + 1 < grid.len() { grid[best + 1] } else { upper };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (objective(a), objective(b));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * upper.max(f64::MIN_POSITIVE) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = objective(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = objective(b);
        }
    }
    let candidates = [lo, hi, a, b, grid[best]];
    let u = candidates.into_iter().min_by(|&x, &y| objective(x).total_cmp(&objective(y))).expect("nonempty");
    let line = profile(u);
    Ok(HeatingFit {
        g: fast_pulses as f64 * line.intercept.exp(),
        lambda: line.slope,
        gamma_min: u,
        residual_norm: line.residual_norm,
        fast_pulses,
        points: epsilons.len(),
    })
}
