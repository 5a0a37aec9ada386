//! Exact solution families and closed-form identities: Cauchy kernels, Szegő
//! traveling waves, scaling, and the explicit trilinear half-wave term.

use std::f64::consts::PI;

use thiserror::Error;

use crate::numerics::{gamma, integrate, QuadError};
use crate::profiles::QBetaProfile;
use crate::spectral::{Grid, NormSpec, SpectralError, SpectralField};
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("wave drifted to {drift:.3} which is beyond a quarter period {limit:.3}")]
    WindowOverflow { drift: f64, limit: f64 },
    #[error("rescaled field needs bandwidth {needed:.3e} beyond Nyquist {nyquist:.3e}")]
    BandwidthOverflow { needed: f64, nyquist: f64 },
    #[error("pole height {p:e} is below eight grid spacings ({dx:e})")]
    Resolution { p: f64, dx: f64 },
    #[error("Sobolev index {0} ≤ -1/2: the kernel is not in the space")]
    NotInSpace(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Cauchy-kernel traveling wave `α e^{iφ} e^{-iωt} / (x - ct + a + ip)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalProfile {
    pub alpha: f64,
    pub p: f64,
    pub c: f64,
    pub omega: f64,
    pub shift_a: f64,
    pub phase_phi: f64,
}

impl RationalProfile {
    /// Speed and frequency follow from `c = α²/(2p)`, `ω = α²/(4p²)`.
    pub fn new(alpha: f64, p: f64, shift_a: f64, phase_phi: f64) -> Result<Self, ClosedFormError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ClosedFormError::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(ClosedFormError::Parameter(format!("pole height must be positive, got {p}")));
        }
        Ok(RationalProfile {
            alpha,
            p,
            c: alpha * alpha / (2.0 * p),
            omega: alpha * alpha / (4.0 * p * p),
            shift_a,
            phase_phi,
        })
    }

    pub fn simple(alpha: f64, p: f64) -> Result<Self, ClosedFormError> {
        RationalProfile::new(alpha, p, 0.0, 0.0)
    }

    fn amplitude(&self, t: f64) -> C64 {
        C64::from_polar(self.alpha, self.phase_phi - self.omega * t)
    }

    /// Closed form on the line.
    pub fn value(&self, t: f64, x: f64) -> C64 {
        self.amplitude(t) / C64::new(x - self.c * t + self.shift_a, self.p)
    }

    /// Analytic `∂_t` on the line.
    pub fn time_derivative(&self, t: f64, x: f64) -> C64 {
        let z = C64::new(x - self.c * t + self.shift_a, self.p);
        self.amplitude(t) * (C64::new(0.0, -self.omega) / z + self.c / (z * z))
    }

    /// Exact transform at time `t`.
    pub fn fourier(&self, t: f64, xi: f64) -> C64 {
        self.amplitude(t) * C64::from_polar(1.0, self.shift_a * xi) * cauchy_fourier(self.c, self.p, t, xi)
    }
}

/// Transform of `1/(x - ct + ip)`: `-2πi e^{-ictξ} e^{-pξ}` for `ξ > 0`, zero for
/// `ξ < 0` and the half value `-πi` at the origin.
pub fn cauchy_fourier(c: f64, p: f64, t: f64, xi: f64) -> C64 {
    if xi > 0.0 {
        C64::new(0.0, -2.0 * PI) * C64::from_polar((-p * xi).exp(), -c * t * xi)
    } else if xi == 0.0 {
        C64::new(0.0, -PI)
    } else {
        C64::new(0.0, 0.0)
    }
}

/// `‖1/(x+ip)‖_{Ḣ^s} = √(2πΓ(2s+1)) / (2p)^{s+1/2}`.
pub fn cauchy_hs_norm(p: f64, s: f64) -> Result<f64, ClosedFormError> {
    if s <= -0.5 {
        return Err(ClosedFormError::NotInSpace(s));
    }
    if !(p > 0.0) {
        return Err(ClosedFormError::Parameter(format!("pole height must be positive, got {p}")));
    }
    Ok((2.0 * PI * gamma(2.0 * s + 1.0)).sqrt() / (2.0 * p).powf(s + 0.5))
}

fn check_drift(prof: &RationalProfile, t: f64, grid: Grid) -> Result<(), ClosedFormError> {
    let drift = (prof.c * t).abs();
    let limit = 0.25 * grid.length();
    if drift >= limit {
        return Err(ClosedFormError::WindowOverflow { drift, limit });
    }
    Ok(())
}

/// Samples the wave on the grid as the `L`-periodic image sum
/// `Σ_n 1/(z + nL) = (π/L) cot(πz/L)`. Its lattice spectrum equals the line
/// transform at every `ξ_k` (half value at the origin included), so norms of
/// the sampled field carry no truncation error from the slow `1/x` tails.
pub fn eval_rational(prof: &RationalProfile, t: f64, grid: Grid) -> Result<SpectralField, ClosedFormError> {
    check_drift(prof, t, grid)?;
    let l = grid.length();
    let amp = prof.amplitude(t);
    Ok(SpectralField::from_fn(grid, |x| {
        let w = C64::new(x - prof.c * t + prof.shift_a, prof.p) * (PI / l);
        amp * (PI / l) * w.cos() / w.sin()
    }))
}

/// Analytic time derivative of [`eval_rational`].
pub fn eval_rational_dt(prof: &RationalProfile, t: f64, grid: Grid) -> Result<SpectralField, ClosedFormError> {
    check_drift(prof, t, grid)?;
    let l = grid.length();
    let amp = prof.amplitude(t);
    let k = PI / l;
    Ok(SpectralField::from_fn(grid, |x| {
        let w = C64::new(x - prof.c * t + prof.shift_a, prof.p) * k;
        let cot = w.cos() / w.sin();
        let dcot = -k * k / (w.sin() * w.sin());
        amp * (C64::new(0.0, -prof.omega) * k * cot - prof.c * dcot)
    }))
}

/// Plain samples of the line closed form (no periodization).
pub fn eval_rational_truncated(prof: &RationalProfile, t: f64, grid: Grid) -> Result<SpectralField, ClosedFormError> {
    check_drift(prof, t, grid)?;
    Ok(SpectralField::from_fn(grid, |x| prof.value(t, x)))
}

/// Traveling wave of the Szegő equation on the circle of length `L` that shares
/// the pole, amplitude, shift and phase of `prof`:
/// `b e^{-iω_L t} / (1 - q e^{2πi(x - c_L t + a)/L})` with `q = e^{-2πp/L}` and
/// `b = -2πi α e^{iφ}/L`. Its speed and frequency
/// `c_L = α²(2π/L)/(1-q²)`, `ω_L = α²(2π/L)²/(1-q²)²` tend to `α²/2p`,
/// `α²/4p²` as `L → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicWave {
    pub profile: RationalProfile,
    pub length: f64,
    pub q: f64,
    pub c: f64,
    pub omega: f64,
}

impl PeriodicWave {
    pub fn new(profile: RationalProfile, length: f64) -> Self {
        let q = (-2.0 * PI * profile.p / length).exp();
        let k = 2.0 * PI / length;
        let d = 1.0 - q * q;
        let a2 = profile.alpha * profile.alpha;
        PeriodicWave {
            profile,
            length,
            q,
            c: a2 * k / d,
            omega: a2 * k * k / (d * d),
        }
    }

    fn b(&self) -> C64 {
        C64::new(0.0, -2.0 * PI / self.length) * C64::from_polar(self.profile.alpha, self.profile.phase_phi)
    }

    pub fn value(&self, t: f64, x: f64) -> C64 {
        let k = 2.0 * PI / self.length;
        let w = C64::from_polar(self.q, k * (x - self.c * t + self.profile.shift_a));
        self.b() * C64::from_polar(1.0, -self.omega * t) / (1.0 - w)
    }

    pub fn time_derivative(&self, t: f64, x: f64) -> C64 {
        let k = 2.0 * PI / self.length;
        let w = C64::from_polar(self.q, k * (x - self.c * t + self.profile.shift_a));
        let dw = w * C64::new(0.0, -k * self.c);
        let e = self.b() * C64::from_polar(1.0, -self.omega * t);
        e * (C64::new(0.0, -self.omega) / (1.0 - w) + dw / ((1.0 - w) * (1.0 - w)))
    }

    pub fn field(&self, t: f64, grid: Grid) -> SpectralField {
        SpectralField::from_fn(grid, |x| self.value(t, x))
    }

    pub fn field_dt(&self, t: f64, grid: Grid) -> SpectralField {
        SpectralField::from_fn(grid, |x| self.time_derivative(t, x))
    }
}

/// Relative residual `‖i∂_tV - Π₊(|V|²V)‖ / ‖V‖` given samples of `V` and `∂_tV`.
pub fn szego_residual(v: &SpectralField, dv: &SpectralField) -> Result<f64, ClosedFormError> {
    let rhs = v.cubic(1.0, true).szego_project();
    let lhs = dv.scale(C64::new(0.0, 1.0));
    let diff = lhs.sub(&rhs)?;
    let num = diff.mass().sqrt();
    let den = v.mass().sqrt();
    Ok(if den == 0.0 { num } else { num / den })
}

/// Pair of traveling waves used by the uniform-continuity constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePair {
    pub first: RationalProfile,
    pub second: RationalProfile,
    pub epsilon: f64,
}

fn log_factor(eps: f64) -> Result<f64, ClosedFormError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ClosedFormError::Parameter(format!("epsilon must lie in (0,1), got {eps}")));
    }
    Ok(1.0 + eps.ln().abs().powf(-0.5))
}

impl WavePair {
    /// `p = 1`, `α₁ = ε`, `α₂ = ε(1 + |log ε|^{-1/2})`.
    pub fn basic(eps: f64) -> Result<Self, ClosedFormError> {
        let f = log_factor(eps)?;
        Ok(WavePair {
            first: RationalProfile::simple(eps, 1.0)?,
            second: RationalProfile::simple(eps * f, 1.0)?,
            epsilon: eps,
        })
    }

    /// `p = ε`, `α₁ = ε^{1/2}`, `α₂ = ε^{1/2}(1 + |log ε|^{-1/2})`.
    pub fn l2(eps: f64) -> Result<Self, ClosedFormError> {
        let f = log_factor(eps)?;
        let a = eps.sqrt();
        Ok(WavePair {
            first: RationalProfile::simple(a, eps)?,
            second: RationalProfile::simple(a * f, eps)?,
            epsilon: eps,
        })
    }

    /// `p = ε`, `α₁ = ε^{s+1/2}`, `α₂ = ε^{s+1/2}(1 + |log ε|^{-1/2})`.
    pub fn scaled(eps: f64, s: f64) -> Result<Self, ClosedFormError> {
        let f = log_factor(eps)?;
        let a = eps.powf(s + 0.5);
        Ok(WavePair {
            first: RationalProfile::simple(a, eps)?,
            second: RationalProfile::simple(a * f, eps)?,
            epsilon: eps,
        })
    }

    /// Applies `u_λ(t,x) = λ^{1/2} u(λt, λx)` to both waves.
    pub fn rescaled(&self, lambda: f64) -> Result<Self, ClosedFormError> {
        Ok(WavePair {
            first: scale_profile(&self.first, lambda)?,
            second: scale_profile(&self.second, lambda)?,
            epsilon: self.epsilon,
        })
    }
}

/// `λ^{1/2} V(λt, λx)` is again a Cauchy wave with `α' = α λ^{-1/2}`, `p' = p/λ`.
pub fn scale_profile(prof: &RationalProfile, lambda: f64) -> Result<RationalProfile, ClosedFormError> {
    if !(lambda > 0.0) {
        return Err(ClosedFormError::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    RationalProfile::new(
        prof.alpha / lambda.sqrt(),
        prof.p / lambda,
        prof.shift_a / lambda,
        prof.phase_phi,
    )
}

/// Which Sobolev weight a frequency-side distance uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Inhomogeneous,
    Homogeneous,
}

/// `‖V₁(t) - V₂(t)‖` in `H^s` or `Ḣ^s`, by quadrature of the exact transforms.
pub fn pair_distance(pair: &WavePair, t: f64, s: f64, weight: Weight) -> Result<f64, ClosedFormError> {
    let (f1, f2) = (pair.first, pair.second);
    let scale = f1.p.min(f2.p);
    let w = move |xi: f64| match weight {
        Weight::Inhomogeneous => (1.0 + xi * xi).powf(s),
        Weight::Homogeneous => xi.powf(2.0 * s),
    };
    let integrand = |eta: f64| {
        if eta <= 0.0 {
            return 0.0;
        }
        let xi = eta / scale;
        let d = f1.fourier(t, xi) - f2.fourier(t, xi);
        w(xi) * d.norm_sqr() / scale
    };
    let mut total = 0.0;
    for piece in 0..80 {
        let a = piece as f64;
        total += integrate(&integrand, a, a + 1.0, 1e-13)?;
        if piece > 8 && total.abs() > 0.0 && (-2.0 * a).exp() < 1e-18 {
            break;
        }
    }
    Ok((total / (2.0 * PI)).max(0.0).sqrt())
}

/// Closed form of the interference term
/// `4πα₁α₂ Re(e^{i(ω₂-ω₁)t} Γ(2s+1) / (2p - i(c₂-c₁)t)^{2s+1})`.
pub fn interference_closed(pair: &WavePair, t: f64, s: f64) -> f64 {
    let (a, b) = (pair.first, pair.second);
    let z = C64::new(2.0 * a.p, -(b.c - a.c) * t);
    let val = C64::from_polar(1.0, (b.omega - a.omega) * t) * gamma(2.0 * s + 1.0) / z.powf(2.0 * s + 1.0);
    4.0 * PI * a.alpha * b.alpha * val.re
}

/// The same interference term by adaptive quadrature of its frequency integral.
pub fn interference_quadrature(pair: &WavePair, t: f64, s: f64) -> Result<f64, ClosedFormError> {
    let (a, b) = (pair.first, pair.second);
    let k = (b.c - a.c) * t;
    let p = a.p;
    let re = |xi: f64| xi.powf(2.0 * s) * (-2.0 * p * xi).exp() * (k * xi).cos();
    let im = |xi: f64| xi.powf(2.0 * s) * (-2.0 * p * xi).exp() * (k * xi).sin();
    let mut sr = 0.0;
    let mut si = 0.0;
    let step = 0.5 / p;
    for piece in 0..120 {
        let lo = piece as f64 * step;
        sr += integrate(&re, lo, lo + step, 1e-15)?;
        si += integrate(&im, lo, lo + step, 1e-15)?;
    }
    let val = C64::from_polar(1.0, (b.omega - a.omega) * t) * C64::new(sr, si);
    Ok(4.0 * PI * a.alpha * b.alpha * val.re)
}

/// `λ^{β/2} f(λ·)` on the same grid.
pub fn rescale(f: &SpectralField, lambda: f64, beta: f64) -> Result<SpectralField, ClosedFormError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ClosedFormError::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(beta > 0.0) {
        return Err(ClosedFormError::Parameter(format!("beta must be positive, got {beta}")));
    }
    let g = f.grid();
    let amp = lambda.powf(0.5 * beta);
    if lambda == 1.0 {
        return Ok(f.clone());
    }
    let needed = f.populated_bandwidth(1e-13) * lambda;
    if needed >= g.nyquist() {
        return Err(ClosedFormError::BandwidthOverflow {
            needed,
            nyquist: g.nyquist(),
        });
    }
    let n = g.len();
    let inv = 1.0 / lambda;
    if (inv - inv.round()).abs() < 1e-12 && inv.round() >= 2.0 {
        // spreading by an integer factor: exact on the frequency lattice
        let stride = inv.round() as i64;
        let tail = tail_fraction(f, 0.5 * g.length() * lambda);
        if tail > 1e-12 {
            return Err(ClosedFormError::WindowOverflow {
                drift: 0.5 * g.length() * lambda,
                limit: 0.5 * g.length() * lambda,
            });
        }
        let spec = f.spectrum();
        let out: Vec<C64> = (0..n)
            .map(|m| {
                let k = g.index(m) * stride;
                g.slot(k).map(|s| spec[s] * (amp * inv)).unwrap_or_default()
            })
            .collect();
        return Ok(SpectralField::from_spectrum(g, out)?);
    }
    let vals = f.values();
    if (lambda - lambda.round()).abs() < 1e-12 {
        // compression by an integer factor: exact sample reuse
        let r = lambda.round() as i64;
        let half = (n / 2) as i64;
        let out: Vec<C64> = (0..n as i64)
            .map(|j| {
                let idx = r * (j - half) + half;
                if (0..n as i64).contains(&idx) {
                    vals[idx as usize] * amp
                } else {
                    C64::default()
                }
            })
            .collect();
        return Ok(SpectralField::from_values(g, out)?);
    }
    let pts: Vec<f64> = g.xs().iter().map(|x| x * lambda).collect();
    let inside: Vec<usize> = (0..n).filter(|&j| pts[j].abs() <= 0.5 * g.length()).collect();
    let sampled = f.sample_at(&inside.iter().map(|&j| pts[j]).collect::<Vec<_>>());
    let mut out = vec![C64::default(); n];
    for (j, v) in inside.into_iter().zip(sampled) {
        out[j] = v * amp;
    }
    Ok(SpectralField::from_values(g, out)?)
}

fn tail_fraction(f: &SpectralField, radius: f64) -> f64 {
    let g = f.grid();
    let total = f.mass();
    if total == 0.0 {
        return 0.0;
    }
    let outside: f64 = f
        .values()
        .iter()
        .enumerate()
        .filter(|(j, _)| g.x(*j).abs() > radius)
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        * g.dx();
    outside / total
}

/// `|f|²f` for `f = 1/(x+iε)` through its partial fractions.
pub fn cube_partial_fractions(eps: f64, x: f64) -> C64 {
    let f = C64::new(1.0, 0.0) / C64::new(x, eps);
    let g = C64::new(1.0, 0.0) / C64::new(x, -eps);
    f / (4.0 * eps * eps) - f * f / C64::new(0.0, 2.0 * eps) - g / (4.0 * eps * eps)
}

/// The trilinear Duhamel term of the half-wave flow at data `f_ε = 1/(x+iε)`.
#[derive(Debug, Clone)]
pub struct TrilinearTerm {
    pub plus: SpectralField,
    pub minus: SpectralField,
    pub field: SpectralField,
    pub l2_value: f64,
}

/// `∫_0^t e^{-i(t-τ)|D|}(|e^{-iτ|D|}f_ε|² e^{-iτ|D|}f_ε) dτ`, assembled on the
/// frequency side: the positive-frequency part is `t Π₊(|f_ε|²f_ε)(x - t)`, the
/// negative-frequency part integrates the reflected kernel in closed form.
pub fn trilinear_halfwave(eps: f64, t: f64, grid: Grid) -> Result<TrilinearTerm, ClosedFormError> {
    if !(eps > 0.0) {
        return Err(ClosedFormError::Parameter(format!("epsilon must be positive, got {eps}")));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(ClosedFormError::Parameter(format!("time must lie in (0,1], got {t}")));
    }
    if eps < 8.0 * grid.dx() {
        return Err(ClosedFormError::Resolution { p: eps, dx: grid.dx() });
    }
    let inv4 = 1.0 / (4.0 * eps * eps);
    let plus = SpectralField::from_spectrum_fn(grid, |xi| {
        if xi < 0.0 {
            return C64::default();
        }
        let base = C64::new(0.0, -2.0 * PI * t) * C64::from_polar((-eps * xi).exp(), -t * xi);
        if xi == 0.0 {
            base * (0.5 * inv4)
        } else {
            base * (inv4 + xi / (2.0 * eps))
        }
    });
    let minus = SpectralField::from_spectrum_fn(grid, |xi| {
        if xi > 0.0 {
            return C64::default();
        }
        if xi == 0.0 {
            return C64::new(0.0, -inv4 * 2.0 * PI * t * 0.5);
        }
        let num = C64::from_polar(1.0, t * xi) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, -2.0 * t * xi));
        num * (-inv4 * 2.0 * PI * (eps * xi).exp() / (2.0 * xi))
    });
    let field = plus.add(&minus)?;
    let l2_value = field.norm(NormSpec::L2)?.value().unwrap_or(f64::NAN);
    Ok(TrilinearTerm {
        plus,
        minus,
        field,
        l2_value,
    })
}

/// Half-wave traveling wave `Q_β((x - βt)/(1-β)) e^{it}` on `grid`. When `grid`
/// is the profile grid contracted by `1-β` the samples are reused exactly;
/// otherwise the profile is interpolated.
pub fn halfwave_traveling_wave(
    profile: &QBetaProfile,
    t: f64,
    grid: Grid,
) -> Result<SpectralField, ClosedFormError> {
    let beta = profile.beta_speed;
    let sigma = 1.0 - beta;
    let drift = beta * t;
    let limit = 0.25 * grid.length();
    if drift.abs() >= limit {
        return Err(ClosedFormError::WindowOverflow { drift, limit });
    }
    let q = &profile.field;
    let qg = q.grid();
    let base = if qg.len() == grid.len() && ((qg.length() * sigma - grid.length()).abs() <= 1e-12 * grid.length()) {
        SpectralField::from_values(grid, q.values().to_vec())?
    } else {
        let pts: Vec<f64> = grid.xs().iter().map(|x| x / sigma).collect();
        let inside: Vec<usize> = (0..grid.len()).filter(|&j| pts[j].abs() <= 0.5 * qg.length()).collect();
        let sampled = q.sample_at(&inside.iter().map(|&j| pts[j]).collect::<Vec<_>>());
        let mut out = vec![C64::default(); grid.len()];
        for (j, v) in inside.into_iter().zip(sampled) {
            out[j] = v;
        }
        SpectralField::from_values(grid, out)?
    };
    Ok(base.translate(drift).scale(C64::from_polar(1.0, t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_and_frequency() {
        let p = RationalProfile::simple(1.0, 1.0).unwrap();
        assert_eq!(p.c, 0.5);
        assert_eq!(p.omega, 0.25);
        assert!(RationalProfile::simple(1.0, 0.0).is_err());
        assert!(RationalProfile::simple(-1.0, 1.0).is_err());
    }

    #[test]
    fn fourier_values() {
        let v = cauchy_fourier(0.0, 1.0, 0.0, 1.0);
        let e = C64::new(0.0, -2.0 * PI * (-1.0f64).exp());
        assert!((v - e).norm() < 1e-15);
        assert_eq!(cauchy_fourier(0.0, 1.0, 0.0, -1.0), C64::new(0.0, 0.0));
        let w = cauchy_fourier(2.0, 1.0, 0.5, 1.0);
        let e2 = C64::new(0.0, -2.0 * PI) * C64::from_polar((-1.0f64).exp(), -1.0);
        assert!((w - e2).norm() < 1e-15);
        assert_eq!(cauchy_fourier(0.3, 2.0, 1.0, 0.0), C64::new(0.0, -PI));
    }

    #[test]
    fn hs_norm_values() {
        assert!((cauchy_hs_norm(1.0, 0.0).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((cauchy_hs_norm(0.5, 0.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-14);
        assert!(matches!(cauchy_hs_norm(1.0, -0.5), Err(ClosedFormError::NotInSpace(_))));
    }

    #[test]
    fn partial_fraction_identity_pointwise() {
        for eps in [0.05, 0.3, 1.0] {
            for x in [-3.0, -0.1, 0.0, 0.2, 7.0] {
                let f = C64::new(1.0, 0.0) / C64::new(x, eps);
                let direct = f * f.norm_sqr();
                let pf = cube_partial_fractions(eps, x);
                assert!((direct - pf).norm() <= 1e-10 * direct.norm().max(1.0));
            }
        }
    }

    #[test]
    fn drift_guard() {
        let g = Grid::new(100.0, 256).unwrap();
        let p = RationalProfile::simple(4.0, 1.0).unwrap();
        assert!(matches!(eval_rational(&p, 10.0, g), Err(ClosedFormError::WindowOverflow { .. })));
    }

    #[test]
    fn initial_samples_are_the_closed_form() {
        let g = Grid::new(400.0, 1024).unwrap();
        let p = RationalProfile::simple(0.7, 1.0).unwrap();
        let f = eval_rational_truncated(&p, 0.0, g).unwrap();
        for (j, v) in f.values().iter().enumerate() {
            let x = g.x(j);
            assert!((v - C64::new(0.7, 0.0) / C64::new(x, 1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn periodic_wave_limits() {
        let p = RationalProfile::simple(1.0, 1.0).unwrap();
        let w = PeriodicWave::new(p, 1e6);
        assert!((w.c - 0.5).abs() < 1e-5);
        assert!((w.omega - 0.25).abs() < 1e-5);
    }
}
