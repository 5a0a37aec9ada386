//! Complex fields on a periodized line: transforms, multipliers, projectors and norms.
//!
//! The continuous transform `f̂(ξ) = ∫ e^{-ixξ} f(x) dx` is approximated on the
//! lattice `ξ_k = 2πk/L` by an FFT scaled by `L/M`. Spectra are stored in FFT
//! order, so storage slot `m` holds the signed index `k = m` for `m < M/2` and
//! `k = m - M` otherwise.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::numerics::zeta;
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid size {0} must be a power of two and at least 16")]
    BadSize(usize),
    #[error("period length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("dispersion exponent must be positive, got {0}")]
    BadBeta(f64),
    #[error("window width {a} is not a multiple of the lattice spacing {dxi}")]
    Misaligned { a: f64, dxi: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} samples, got {got}")]
    Length { expected: usize, got: usize },
}

/// Uniform periodic grid `x_j = -L/2 + jL/M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    length: f64,
    points: usize,
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Self, SpectralError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::BadLength(length));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(SpectralError::BadSize(points));
        }
        Ok(Grid { length, points })
    }

    /// Grid whose frequency spacing is exactly `dxi`.
    pub fn with_spacing(dxi: f64, points: usize) -> Result<Self, SpectralError> {
        Grid::new(2.0 * PI / dxi, points)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Signed lattice index stored in slot `m`.
    pub fn index(&self, m: usize) -> i64 {
        signed_index(m, self.points)
    }

    pub fn xi(&self, m: usize) -> f64 {
        self.index(m) as f64 * self.dxi()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.points).map(|m| self.xi(m)).collect()
    }

    /// Storage slot of signed index `k`, if it is representable.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.points / 2) as i64;
        if k < -half || k >= half {
            None
        } else {
            Some(k.rem_euclid(self.points as i64) as usize)
        }
    }

    /// Number of lattice cells in `width`, or an error when it is not an integer.
    pub fn lattice_count(&self, width: f64) -> Result<i64, SpectralError> {
        let r = width / self.dxi();
        let n = r.round();
        if n < 1.0 || (r - n).abs() > 1e-9 * r.max(1.0) {
            return Err(SpectralError::Misaligned {
                a: width,
                dxi: self.dxi(),
            });
        }
        Ok(n as i64)
    }
}

pub(crate) fn signed_index(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let mut planner = PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .expect("fft planner poisoned");
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// Physical samples to scaled spectrum on a grid of period `length`.
pub fn to_spectrum(values: &[C64], length: f64) -> Vec<C64> {
    let n = values.len();
    let mut buf = values.to_vec();
    plan(n, false).process(&mut buf);
    let scale = length / n as f64;
    for (m, v) in buf.iter_mut().enumerate() {
        *v *= if m % 2 == 0 { scale } else { -scale };
    }
    buf
}

/// Scaled spectrum back to physical samples.
pub fn to_values(spectrum: &[C64], length: f64) -> Vec<C64> {
    let n = spectrum.len();
    let scale = 1.0 / length;
    let mut buf: Vec<C64> = spectrum
        .iter()
        .enumerate()
        .map(|(m, v)| if m % 2 == 0 { v * scale } else { -v * scale })
        .collect();
    plan(n, true).process(&mut buf);
    buf
}

/// `μ|u|²u` of the field with spectrum `spec`, returned as a spectrum. With
/// `dealias` the product is formed on a twice-longer grid and truncated back,
/// which removes all aliasing of a cubic term.
pub fn cubic_spectrum(spec: &[C64], length: f64, mu: f64, dealias: bool) -> Vec<C64> {
    let n = spec.len();
    if !dealias {
        let vals = to_values(spec, length);
        let cube: Vec<C64> = vals.iter().map(|u| u * (mu * u.norm_sqr())).collect();
        return to_spectrum(&cube, length);
    }
    let p = 2 * n;
    let padded = pad_spectrum(spec, p);
    let vals = to_values(&padded, length);
    let cube: Vec<C64> = vals.iter().map(|u| u * (mu * u.norm_sqr())).collect();
    truncate_spectrum(&to_spectrum(&cube, length), n)
}

/// Embeds an FFT-ordered spectrum of length `n` into length `p ≥ n`.
pub fn pad_spectrum(spec: &[C64], p: usize) -> Vec<C64> {
    let n = spec.len();
    let mut out = vec![C64::new(0.0, 0.0); p];
    for (m, v) in spec.iter().enumerate() {
        let k = signed_index(m, n);
        out[k.rem_euclid(p as i64) as usize] = *v;
    }
    out
}

/// Keeps the signed indices `[-n/2, n/2)` of an FFT-ordered spectrum.
pub fn truncate_spectrum(spec: &[C64], n: usize) -> Vec<C64> {
    let p = spec.len();
    (0..n)
        .map(|m| {
            let k = signed_index(m, n);
            spec[k.rem_euclid(p as i64) as usize]
        })
        .collect()
}

/// A complex field sampled on a [`Grid`], with lazily synchronized caches of
/// its physical samples and its spectrum.
#[derive(Debug)]
pub struct SpectralField {
    grid: Grid,
    values: OnceLock<Vec<C64>>,
    spectrum: OnceLock<Vec<C64>>,
}

impl Clone for SpectralField {
    fn clone(&self) -> Self {
        let values = OnceLock::new();
        if let Some(v) = self.values.get() {
            let _ = values.set(v.clone());
        }
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        SpectralField {
            grid: self.grid,
            values,
            spectrum,
        }
    }
}

impl SpectralField {
    pub fn from_values(grid: Grid, values: Vec<C64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::Length {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let cell = OnceLock::new();
        let _ = cell.set(values);
        Ok(SpectralField {
            grid,
            values: cell,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_spectrum(grid: Grid, spectrum: Vec<C64>) -> Result<Self, SpectralError> {
        if spectrum.len() != grid.len() {
            return Err(SpectralError::Length {
                expected: grid.len(),
                got: spectrum.len(),
            });
        }
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Ok(SpectralField {
            grid,
            values: OnceLock::new(),
            spectrum: cell,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Self {
        let vals = grid.xs().into_iter().map(f).collect();
        SpectralField::from_values(grid, vals).expect("length matches grid")
    }

    /// Field whose spectrum at lattice frequency `ξ` is `g(ξ)`.
    pub fn from_spectrum_fn(grid: Grid, g: impl Fn(f64) -> C64) -> Self {
        let spec = grid.xis().into_iter().map(g).collect();
        SpectralField::from_spectrum(grid, spec).expect("length matches grid")
    }

    pub fn zeros(grid: Grid) -> Self {
        SpectralField::from_spectrum(grid, vec![C64::new(0.0, 0.0); grid.len()]).expect("length")
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        self.values.get_or_init(|| {
            let spec = self.spectrum.get().expect("field holds values or spectrum");
            to_values(spec, self.grid.length)
        })
    }

    pub fn spectrum(&self) -> &[C64] {
        self.spectrum.get_or_init(|| {
            let vals = self.values.get().expect("field holds values or spectrum");
            to_spectrum(vals, self.grid.length)
        })
    }

    /// Forces the spectrum cache; returns a field whose spectrum is current.
    pub fn forward_transform(&self) -> SpectralField {
        let _ = self.spectrum();
        self.clone()
    }

    pub fn map_spectrum(&self, f: impl Fn(f64, C64) -> C64) -> SpectralField {
        let g = self.grid;
        let spec = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(m, v)| f(g.xi(m), *v))
            .collect();
        SpectralField::from_spectrum(g, spec).expect("length")
    }

    pub fn map_values(&self, f: impl Fn(f64, C64) -> C64) -> SpectralField {
        let g = self.grid;
        let vals = self
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| f(g.x(j), *v))
            .collect();
        SpectralField::from_values(g, vals).expect("length")
    }

    pub fn scale(&self, c: C64) -> SpectralField {
        if let Some(s) = self.spectrum.get() {
            return SpectralField::from_spectrum(self.grid, s.iter().map(|v| v * c).collect()).expect("length");
        }
        SpectralField::from_values(self.grid, self.values().iter().map(|v| v * c).collect()).expect("length")
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.combine(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.combine(other, C64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &SpectralField, c: C64) -> Result<SpectralField, SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        let spec = self
            .spectrum()
            .iter()
            .zip(other.spectrum())
            .map(|(a, b)| a + c * b)
            .collect();
        SpectralField::from_spectrum(self.grid, spec)
    }

    /// Multiplies the spectrum by `exp(-i t |ξ|^β)`.
    pub fn apply_dispersion(&self, beta: f64, t: f64) -> Result<SpectralField, SpectralError> {
        if !(beta > 0.0) {
            return Err(SpectralError::BadBeta(beta));
        }
        Ok(self.map_spectrum(|xi, v| v * C64::from_polar(1.0, -t * xi.abs().powf(beta))))
    }

    /// Translation `f(· - shift)` as the multiplier `exp(-i ξ shift)`.
    pub fn translate(&self, shift: f64) -> SpectralField {
        self.map_spectrum(|xi, v| v * C64::from_polar(1.0, -xi * shift))
    }

    /// Szegő projector: keeps `ξ ≥ 0`.
    pub fn szego_project(&self) -> SpectralField {
        self.map_spectrum(|xi, v| if xi >= 0.0 { v } else { C64::new(0.0, 0.0) })
    }

    /// `μ|f|²f` sampled pointwise, no dealiasing.
    pub fn pointwise_cubic(&self, mu: f64) -> SpectralField {
        self.map_values(|_, u| u * (mu * u.norm_sqr()))
    }

    /// `μ|f|²f` with optional 2x zero-padding.
    pub fn cubic(&self, mu: f64, dealias: bool) -> SpectralField {
        let spec = cubic_spectrum(self.spectrum(), self.grid.length, mu, dealias);
        SpectralField::from_spectrum(self.grid, spec).expect("length")
    }

    /// `Σ|f(x_j)|² L/M`.
    pub fn mass(&self) -> f64 {
        self.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// `(1/2π) Σ|f̂(ξ_k)|² 2π/L`, the frequency side of Parseval.
    pub fn spectral_mass(&self) -> f64 {
        self.spectrum().iter().map(|v| v.norm_sqr()).sum::<f64>() / self.grid.length
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|ξ|` whose coefficient exceeds `rel` times the spectral maximum.
    pub fn populated_bandwidth(&self, rel: f64) -> f64 {
        let spec = self.spectrum();
        let peak = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        spec.iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > rel * peak)
            .map(|(m, _)| self.grid.xi(m).abs())
            .fold(0.0, f64::max)
    }

    /// Band-limited interpolation at arbitrary points (direct sum).
    pub fn sample_at(&self, xs: &[f64]) -> Vec<C64> {
        let g = self.grid;
        let spec = self.spectrum();
        let terms: Vec<(f64, C64)> = spec
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm_sqr() > 0.0)
            .map(|(m, v)| (g.xi(m), *v))
            .collect();
        xs.iter()
            .map(|&x| {
                let mut acc = C64::new(0.0, 0.0);
                for (xi, v) in &terms {
                    acc += v * C64::from_polar(1.0, xi * x);
                }
                acc / g.length
            })
            .collect()
    }

    /// `L²` inner product `∫ f ḡ` evaluated on the frequency side.
    pub fn inner(&self, other: &SpectralField) -> Result<C64, SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        let s: C64 = self
            .spectrum()
            .iter()
            .zip(other.spectrum())
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s / self.grid.length)
    }

    pub fn norm(&self, spec: NormSpec) -> Result<NormValue, SpectralError> {
        norm(self, spec)
    }
}

/// Which norm functional to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    L2,
    Sobolev { s: f64 },
    Homogeneous { s: f64 },
    Modulation { a: f64 },
}

/// Result of a norm evaluation. Divergent homogeneous norms are flagged rather
/// than reported as an infinite number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormValue {
    Finite(f64),
    NonConvergent,
}

impl NormValue {
    pub fn value(self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::NonConvergent => None,
        }
    }

    pub fn is_convergent(self) -> bool {
        matches!(self, NormValue::Finite(_))
    }
}

/// Norm functional on the frequency lattice.
///
/// Sobolev-type norms carry the `1/√(2π)` prefactor and are lattice sums with
/// weight `2π/L`. Two situations need more than a plain sum: the integrable
/// singularity of `|ξ|^{2s}` for `s < 0`, and spectra with a jump at `ξ = 0`
/// (Hardy-space fields). There each half-line is summed over `ξ ≠ 0` and closed
/// by the generalized Euler–Maclaurin terms for `∫_0^∞ ξ^α G(ξ) dξ`, with
/// `G(0±)` and its first two derivatives read off a quartic through the first
/// five lattice points on that side.
pub fn norm(f: &SpectralField, spec: NormSpec) -> Result<NormValue, SpectralError> {
    let g = f.grid();
    let h = g.dxi();
    let coeffs = f.spectrum();
    let finite = |acc: f64| NormValue::Finite((acc / (2.0 * PI)).max(0.0).sqrt());
    match spec {
        NormSpec::Modulation { a } => {
            let m = g.lattice_count(a)?;
            let mut windows: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
            for (slot, v) in coeffs.iter().enumerate() {
                let k = g.index(slot);
                let w = (2 * k + m).div_euclid(2 * m);
                *windows.entry(w).or_insert(0.0) += v.norm_sqr() * h;
            }
            Ok(NormValue::Finite(windows.values().map(|e| e.sqrt()).sum()))
        }
        NormSpec::L2 => Ok(finite(smooth_weight_sum(g, coeffs, |_| 1.0))),
        NormSpec::Sobolev { s } => Ok(finite(smooth_weight_sum(g, coeffs, |xi| (1.0 + xi * xi).powf(s)))),
        NormSpec::Homogeneous { s } => {
            let alpha = 2.0 * s;
            if s == 0.0 {
                return Ok(finite(smooth_weight_sum(g, coeffs, |_| 1.0)));
            }
            if alpha <= -1.0 {
                let mut acc = 0.0;
                for sign in [1i64, -1] {
                    match singular_half_line_sum(&side_values(g, coeffs, &|_| 1.0, sign), h, alpha) {
                        Some(v) => acc += v,
                        None => return Ok(NormValue::NonConvergent),
                    }
                }
                return Ok(finite(acc));
            }
            let mut acc = 0.0;
            for sign in [1i64, -1] {
                acc += half_line_sum(&side_values(g, coeffs, &|_| 1.0, sign), h, alpha);
            }
            Ok(finite(acc))
        }
    }
}

/// Lattice sum for a smooth weight: plain when the spectrum is continuous at the
/// origin, one-sided with end corrections when it jumps there.
fn smooth_weight_sum(g: Grid, coeffs: &[C64], weight: impl Fn(f64) -> f64) -> f64 {
    let h = g.dxi();
    let right = side_values(g, coeffs, &weight, 1);
    let left = side_values(g, coeffs, &weight, -1);
    let (r0, _, _) = origin_jet(&right, h);
    let (l0, _, _) = origin_jet(&left, h);
    let peak = right.iter().chain(&left).fold(0.0f64, |a, b| a.max(*b));
    if peak > 0.0 && (r0 - l0).abs() > 1e-3 * peak {
        return half_line_sum(&right, h, 0.0) + half_line_sum(&left, h, 0.0);
    }
    coeffs
        .iter()
        .enumerate()
        .map(|(m, v)| weight(g.xi(m)) * v.norm_sqr())
        .sum::<f64>()
        * h
}

fn side_values(g: Grid, coeffs: &[C64], weight: &impl Fn(f64) -> f64, sign: i64) -> Vec<f64> {
    let half = (g.len() / 2) as i64;
    (1..half)
        .map(|k| {
            let slot = g.slot(sign * k).expect("inside band");
            weight(g.xi(slot)) * coeffs[slot].norm_sqr()
        })
        .collect()
}

/// `(G(0), G'(0), G''(0))` of the quartic through `G(h), …, G(5h)`.
fn origin_jet(vals: &[f64], h: f64) -> (f64, f64, f64) {
    let s1: f64 = (1..=5).map(|m| 1.0 / m as f64).sum();
    let s2: f64 = (1..=5).map(|m| 1.0 / (m * m) as f64).sum();
    let (mut g0, mut g1, mut g2) = (0.0, 0.0, 0.0);
    for i in 1..=5usize {
        let mut l0 = 1.0;
        for m in 1..=5usize {
            if m != i {
                l0 *= m as f64 / (m as f64 - i as f64);
            }
        }
        let inv = 1.0 / i as f64;
        let a = s1 - inv;
        let b = s2 - inv * inv;
        let v = vals[i - 1];
        g0 += l0 * v;
        g1 += -l0 * a * v;
        g2 += l0 * (a * a - b) * v;
    }
    (g0, g1 / h, g2 / (h * h))
}

/// `∫_0^∞ ξ^α G` for `α ≤ -1`: finite only if `G` vanishes at 0 to an order
/// above `-1-α`, read off the origin jet; vanishing jet terms are dropped from
/// the end correction.
fn singular_half_line_sum(vals: &[f64], h: f64, alpha: f64) -> Option<f64> {
    let scale = vals[..5].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (g0, g1, g2) = origin_jet(vals, h);
    let tiny = 1e-3 * scale;
    let order = if scale == 0.0 {
        2.0
    } else if g0.abs() > tiny {
        0.0
    } else if (g1 * 5.0 * h).abs() > tiny {
        1.0
    } else {
        2.0
    };
    if alpha + order <= -1.0 {
        return None;
    }
    let mut acc = 0.0;
    for (i, v) in vals.iter().enumerate() {
        acc += ((i + 1) as f64 * h).powf(alpha) * v;
    }
    acc *= h;
    if order < 1.0 {
        acc -= zeta(-alpha) * h.powf(1.0 + alpha) * g0;
    }
    if order < 2.0 {
        acc -= zeta(-alpha - 1.0) * h.powf(2.0 + alpha) * g1;
    }
    Some(acc - zeta(-alpha - 2.0) * h.powf(3.0 + alpha) * g2 * 0.5)
}

/// `∫_0^∞ ξ^α G` from `G(kh)`, `k ≥ 1`, closed by the zeta-function end terms.
fn half_line_sum(vals: &[f64], h: f64, alpha: f64) -> f64 {
    let mut acc = 0.0;
    for (i, v) in vals.iter().enumerate() {
        let xi = (i + 1) as f64 * h;
        acc += xi.powf(alpha) * v;
    }
    acc *= h;
    let (g0, g1, g2) = origin_jet(vals, h);
    acc - zeta(-alpha) * h.powf(1.0 + alpha) * g0
        - zeta(-alpha - 1.0) * h.powf(2.0 + alpha) * g1
        - zeta(-alpha - 2.0) * h.powf(3.0 + alpha) * g2 * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid) -> SpectralField {
        SpectralField::from_fn(grid, |x| C64::new((-0.5 * x * x).exp(), 0.0))
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(10.0, 15).is_err());
        assert!(Grid::new(10.0, 8).is_err());
        assert!(Grid::new(-1.0, 64).is_err());
        let g = Grid::new(2.0 * PI, 16).unwrap();
        assert_eq!(g.index(8), -8);
        assert_eq!(g.slot(-8), Some(8));
        assert_eq!(g.slot(8), None);
        assert!((g.dxi() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_self_transform() {
        let g = Grid::new(200.0, 4096).unwrap();
        let f = gaussian(g);
        for (m, v) in f.spectrum().iter().enumerate() {
            let xi = g.xi(m);
            let exact = (2.0 * PI).sqrt() * (-0.5 * xi * xi).exp();
            assert!((v - C64::new(exact, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_field_everything_zero() {
        let g = Grid::new(50.0, 64).unwrap();
        let z = SpectralField::zeros(g);
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
        for spec in [
            NormSpec::L2,
            NormSpec::Sobolev { s: -0.3 },
            NormSpec::Homogeneous { s: 0.2 },
            NormSpec::Modulation { a: g.dxi() * 4.0 },
        ] {
            assert_eq!(z.norm(spec).unwrap(), NormValue::Finite(0.0));
        }
    }

    #[test]
    fn dispersion_identity_and_schrodinger() {
        let g = Grid::new(40.0, 256).unwrap();
        let f = gaussian(g);
        let same = f.apply_dispersion(1.3, 0.0).unwrap();
        for (a, b) in same.spectrum().iter().zip(f.spectrum()) {
            assert!((a - b).norm() < 1e-15);
        }
        let t = 0.7;
        let d = f.apply_dispersion(2.0, t).unwrap();
        for (m, (a, b)) in d.spectrum().iter().zip(f.spectrum()).enumerate() {
            let xi = g.xi(m);
            assert!((a - b * C64::from_polar(1.0, -t * xi * xi)).norm() < 1e-14);
        }
        assert!(f.apply_dispersion(0.0, 1.0).is_err());
    }

    #[test]
    fn modulation_rejects_misaligned_width() {
        let g = Grid::new(2.0 * PI, 64).unwrap();
        let f = gaussian(g);
        assert!(matches!(
            f.norm(NormSpec::Modulation { a: 2.5 }),
            Err(SpectralError::Misaligned { .. })
        ));
    }

    #[test]
    fn projector_idempotent() {
        let g = Grid::new(30.0, 512).unwrap();
        let f = gaussian(g);
        let p = f.szego_project();
        let pp = p.szego_project();
        for (a, b) in p.spectrum().iter().zip(pp.spectrum()) {
            assert_eq!(a, b);
        }
        for (m, v) in p.spectrum().iter().enumerate() {
            if g.xi(m) < 0.0 {
                assert_eq!(*v, C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn dealiased_cubic_of_single_mode() {
        let g = Grid::new(2.0 * PI, 32).unwrap();
        let f = SpectralField::from_fn(g, |x| C64::from_polar(0.5, 3.0 * x));
        let c = f.cubic(1.0, true);
        for (j, v) in c.values().iter().enumerate() {
            let u = f.values()[j];
            assert!((v - u * u.norm_sqr()).norm() < 1e-14);
        }
    }

    #[test]
    fn parseval_gaussian() {
        let g = Grid::new(40.0, 512).unwrap();
        let f = gaussian(g);
        assert!((f.mass() - f.spectral_mass()).abs() < 1e-12 * f.mass());
        // ∫ e^{-x²} = √π
        let l2 = f.norm(NormSpec::L2).unwrap().value().unwrap();
        assert!((l2 * l2 - PI.sqrt()).abs() < 1e-9);
    }
}
