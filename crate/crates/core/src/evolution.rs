//! Time integration of fractional NLS and the Szegő equation, and the Picard
//! iterates `U_k[φ]` of the Duhamel expansion.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::numerics::TimeLattice;
use crate::spectral::{cubic_spectrum, Grid, NormSpec, SpectralError, SpectralField};
use crate::C64;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dt·|ξ|^β = {value:.3} exceeds 0.5 (bandwidth {bandwidth:.3e})")]
    PhaseResolution { value: f64, bandwidth: f64 },
    #[error("non-finite values at t = {t}")]
    NonFinite { t: f64 },
    #[error("suspected focusing blow-up at t = {t}: max|u| = {max:.3e}")]
    BlowUp { t: f64, max: f64 },
    #[error("sample time {0} outside [0, t_final]")]
    SampleTime(f64),
    #[error("order cap {0} must be odd and at least 1")]
    OrderCap(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("snapshot output: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    StrangSplit,
    Rk4InteractionPicture,
}

/// `i∂_t u - |D|^β u = μ|u|²u`, or `i∂_t u = μΠ₊(|u|²u)` when `szego` is set.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub beta: f64,
    pub mu: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    pub szego: bool,
}

impl IntegratorConfig {
    pub fn new(beta: f64, mu: f64, dt: f64) -> Self {
        IntegratorConfig {
            beta,
            mu,
            dt,
            scheme: Scheme::StrangSplit,
            dealias: true,
            szego: false,
        }
    }

    pub fn szego(dt: f64) -> Self {
        IntegratorConfig {
            beta: 1.0,
            mu: 1.0,
            dt,
            scheme: Scheme::Rk4InteractionPicture,
            dealias: true,
            szego: true,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    /// Checks `dt·(max populated |ξ|)^β ≤ 0.5` for the given state.
    pub fn validate(&self, u: &SpectralField) -> Result<(), EvolutionError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(EvolutionError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !self.szego && !(self.beta > 0.0) {
            return Err(EvolutionError::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if self.szego {
            return Ok(());
        }
        let bandwidth = u.populated_bandwidth(1e-12);
        let value = self.dt * bandwidth.powf(self.beta);
        if value > 0.5 {
            return Err(EvolutionError::PhaseResolution { value, bandwidth });
        }
        Ok(())
    }
}

fn nonlinear(u: &[C64], grid: Grid, cfg: &IntegratorConfig) -> Vec<C64> {
    // -iμ|u|²u, projected for the Szegő flow
    let mut out = cubic_spectrum(u, grid.length(), cfg.mu, cfg.dealias);
    for (m, v) in out.iter_mut().enumerate() {
        if cfg.szego && grid.index(m) < 0 {
            *v = C64::default();
        } else {
            *v *= C64::new(0.0, -1.0);
        }
    }
    out
}

fn dispersion_phase(cfg: &IntegratorConfig, xi: f64, t: f64) -> C64 {
    if cfg.szego {
        C64::new(1.0, 0.0)
    } else {
        C64::from_polar(1.0, -t * xi.abs().powf(cfg.beta))
    }
}

/// Exact flow of `i∂_t u = μ|u|²u` over `h`: `u·exp(-iμ|u|²h)`, optionally
/// evaluated on a twice-padded grid.
pub fn nonlinear_substep(u: &SpectralField, mu: f64, h: f64, dealias: bool) -> Result<SpectralField, SpectralError> {
    if !dealias {
        return Ok(u.map_values(|_, v| v * C64::from_polar(1.0, -mu * v.norm_sqr() * h)));
    }
    let g = u.grid();
    let padded_grid = Grid::new(g.length(), 2 * g.len())?;
    let padded = SpectralField::from_spectrum(padded_grid, crate::spectral::pad_spectrum(u.spectrum(), 2 * g.len()))?;
    let r = padded.map_values(|_, v| v * C64::from_polar(1.0, -mu * v.norm_sqr() * h));
    SpectralField::from_spectrum(g, crate::spectral::truncate_spectrum(r.spectrum(), g.len()))
}

fn strang(u: &SpectralField, cfg: &IntegratorConfig, dt: f64) -> Result<SpectralField, SpectralError> {
    let half = u.map_spectrum(|xi, v| v * dispersion_phase(cfg, xi, 0.5 * dt));
    let rotated = nonlinear_substep(&half, cfg.mu, dt, cfg.dealias)?;
    Ok(rotated.map_spectrum(|xi, v| v * dispersion_phase(cfg, xi, 0.5 * dt)))
}

fn rk4(u: &SpectralField, cfg: &IntegratorConfig, dt: f64) -> SpectralField {
    // interaction picture over one step: w(τ) = e^{iτL}u(τ), w(0) = û
    let g = u.grid();
    let xis = g.xis();
    let u0 = u.spectrum().to_vec();
    let rhs = |w: &[C64], tau: f64| -> Vec<C64> {
        let spec: Vec<C64> = w
            .iter()
            .zip(&xis)
            .map(|(v, &xi)| v * dispersion_phase(cfg, xi, tau))
            .collect();
        let n = nonlinear(&spec, g, cfg);
        n.iter()
            .zip(&xis)
            .map(|(v, &xi)| v * dispersion_phase(cfg, xi, tau).conj())
            .collect()
    };
    let axpy = |a: &[C64], b: &[C64], c: f64| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x + y * c).collect() };
    let k1 = rhs(&u0, 0.0);
    let k2 = rhs(&axpy(&u0, &k1, 0.5 * dt), 0.5 * dt);
    let k3 = rhs(&axpy(&u0, &k2, 0.5 * dt), 0.5 * dt);
    let k4 = rhs(&axpy(&u0, &k3, dt), dt);
    let w: Vec<C64> = (0..u0.len())
        .map(|m| u0[m] + (k1[m] + (k2[m] + k3[m]) * 2.0 + k4[m]) * (dt / 6.0))
        .collect();
    let out: Vec<C64> = w
        .iter()
        .zip(&xis)
        .map(|(v, &xi)| v * dispersion_phase(cfg, xi, dt))
        .collect();
    SpectralField::from_spectrum(g, out).expect("same grid")
}

fn advance(u: &SpectralField, cfg: &IntegratorConfig, dt: f64) -> Result<SpectralField, EvolutionError> {
    Ok(match cfg.scheme {
        Scheme::StrangSplit if !cfg.szego => strang(u, cfg, dt)?,
        _ => rk4(u, cfg, dt),
    })
}

/// One step of size `cfg.dt`. The Szegő flow always uses the interaction-picture
/// RK4 since its projected nonlinearity has no exact pointwise flow.
pub fn step(u: &SpectralField, cfg: &IntegratorConfig) -> Result<SpectralField, EvolutionError> {
    cfg.validate(u)?;
    let next = advance(u, cfg, cfg.dt)?;
    if next.values().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(EvolutionError::NonFinite { t: cfg.dt });
    }
    Ok(next)
}

/// Integrates to `t_final` and returns the state at every requested sample
/// time (sorted). Steps are shortened to land exactly on sample times.
pub fn evolve(
    u0: &SpectralField,
    cfg: &IntegratorConfig,
    t_final: f64,
    sample_times: &[f64],
) -> Result<Vec<(f64, SpectralField)>, EvolutionError> {
    cfg.validate(u0)?;
    let mut samples: Vec<f64> = sample_times.to_vec();
    for &s in &samples {
        if !(0.0..=t_final).contains(&s) {
            return Err(EvolutionError::SampleTime(s));
        }
    }
    samples.sort_by(|a, b| a.total_cmp(b));
    let init_max = u0.max_abs();
    let mut out = Vec::with_capacity(samples.len());
    let mut u = u0.clone();
    let mut t = 0.0;
    for target in samples {
        loop {
            let remaining = target - t;
            if remaining <= 1e-12 * cfg.dt.max(target.abs()) {
                break;
            }
            let h = if remaining < cfg.dt * (1.0 + 1e-9) { remaining } else { cfg.dt };
            u = advance(&u, cfg, h)?;
            t = if h == remaining { target } else { t + h };
            let max = u.max_abs();
            if !max.is_finite() {
                return Err(EvolutionError::NonFinite { t });
            }
            if cfg.mu < 0.0 && init_max > 0.0 && max > 1e6 * init_max {
                return Err(EvolutionError::BlowUp { t, max });
            }
        }
        out.push((target, u.clone()));
    }
    Ok(out)
}

/// `M(u) = ∫|u|²`.
pub fn mass(u: &SpectralField) -> f64 {
    u.mass()
}

/// `E(u) = ∫ ½||D|^{β/2}u|² + (μ/4)|u|⁴`.
pub fn energy(u: &SpectralField, beta: f64, mu: f64) -> f64 {
    let g = u.grid();
    let h = g.dxi() / (2.0 * std::f64::consts::PI);
    let kinetic: f64 = u
        .spectrum()
        .iter()
        .enumerate()
        .map(|(m, v)| g.xi(m).abs().powf(beta) * v.norm_sqr())
        .sum::<f64>()
        * h;
    let quartic: f64 = u.values().iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum::<f64>() * g.dx();
    0.5 * kinetic + 0.25 * mu * quartic
}

/// Snapshot rows `(t, x_j, Re u, Im u)` or, with `spectral`, `(t, ξ_k, Re û, Im û)`.
pub fn write_snapshots(path: &Path, snaps: &[(f64, SpectralField)], spectral: bool) -> Result<(), EvolutionError> {
    let mut out = String::new();
    out.push_str(if spectral { "t,xi,re,im\n" } else { "t,x,re,im\n" });
    for (t, u) in snaps {
        let g = u.grid();
        if spectral {
            for (m, v) in u.spectrum().iter().enumerate() {
                out.push_str(&format!("{t:e},{:e},{:e},{:e}\n", g.xi(m), v.re, v.im));
            }
        } else {
            for (j, v) in u.values().iter().enumerate() {
                out.push_str(&format!("{t:e},{:e},{:e},{:e}\n", g.x(j), v.re, v.im));
            }
        }
    }
    let mut f = fs::File::create(path).map_err(|e| EvolutionError::Io(e.to_string()))?;
    f.write_all(out.as_bytes()).map_err(|e| EvolutionError::Io(e.to_string()))
}

/// `a_1 = 1`, `a_k = 2/(k-1) Σ_{k₁+k₂+k₃=k} a_{k₁}a_{k₂}a_{k₃}`.
pub fn a_sequence(k_max: usize) -> Vec<f64> {
    let mut a = vec![0.0; k_max + 1];
    if k_max >= 1 {
        a[1] = 1.0;
    }
    for k in 2..=k_max {
        let mut s = 0.0;
        for k1 in 1..k {
            for k2 in 1..k - k1 {
                let k3 = k - k1 - k2;
                if k3 >= 1 {
                    s += a[k1] * a[k2] * a[k3];
                }
            }
        }
        a[k] = 2.0 / (k as f64 - 1.0) * s;
    }
    a
}

/// A frequency-side representation with a product rule: spectra are indexed
/// by slots with known frequencies, and cubic products are formed on a padded
/// physical grid large enough to avoid aliasing.
pub trait ProductSpace: Sync {
    /// Frequency of every spectral slot.
    fn freqs(&self) -> &[f64];
    /// Physical samples on the padded grid.
    fn padded_values(&self, spec: &[C64]) -> Vec<C64>;
    /// Spectrum of padded physical samples, truncated to the slot set.
    fn spectrum_of(&self, values: &[C64]) -> Vec<C64>;
}

/// A periodic [`Grid`] with twice-padded products.
pub struct LineSpace {
    grid: Grid,
    big: Grid,
    xis: Vec<f64>,
}

impl LineSpace {
    pub fn new(grid: Grid) -> Result<Self, SpectralError> {
        Ok(LineSpace {
            grid,
            big: Grid::new(grid.length(), 2 * grid.len())?,
            xis: grid.xis(),
        })
    }
}

impl ProductSpace for LineSpace {
    fn freqs(&self) -> &[f64] {
        &self.xis
    }
    fn padded_values(&self, spec: &[C64]) -> Vec<C64> {
        crate::spectral::to_values(&crate::spectral::pad_spectrum(spec, self.big.len()), self.big.length())
    }
    fn spectrum_of(&self, values: &[C64]) -> Vec<C64> {
        crate::spectral::truncate_spectrum(
            &crate::spectral::to_spectrum(values, self.big.length()),
            self.grid.len(),
        )
    }
}

fn phase_vec(freqs: &[f64], beta: f64, szego: bool, tau: f64) -> Vec<C64> {
    freqs
        .iter()
        .map(|&xi| {
            if szego {
                C64::new(1.0, 0.0)
            } else {
                C64::from_polar(1.0, -tau * xi.abs().powf(beta))
            }
        })
        .collect()
}

/// Picard recursion in the interaction picture: with `V_k(τ) = e^{iτL}U_k(τ)`,
/// `V_k(τ_i) = -iμ Σ_j S_ij e^{iτ_jL} N_k(τ_j)` on a Gauss–Legendre lattice and
/// `N_k = Σ_{k₁+k₂+k₃=k} U_{k₁} conj(U_{k₂}) U_{k₃}`. Lower iterates are cached
/// at the nodes. Returns the spectra of `U_1, U_3, …, U_K` at time `t`.
pub fn picard_core<S: ProductSpace>(
    space: &S,
    phi_hat: &[C64],
    cfg: &IntegratorConfig,
    order_cap: usize,
    t: f64,
    nodes: usize,
) -> Result<Vec<Vec<C64>>, EvolutionError> {
    if order_cap == 0 || order_cap.is_multiple_of(2) {
        return Err(EvolutionError::OrderCap(order_cap));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(EvolutionError::Config(format!("time must be nonnegative, got {t}")));
    }
    let freqs = space.freqs();
    let n = freqs.len();
    let lattice = TimeLattice::new(t, nodes);
    let phases: Vec<Vec<C64>> = lattice
        .nodes
        .iter()
        .map(|&tau| phase_vec(freqs, cfg.beta, cfg.szego, tau))
        .collect();
    let final_phase = phase_vec(freqs, cfg.beta, cfg.szego, t);
    let apply = |spec: &[C64], ph: &[C64]| -> Vec<C64> { spec.iter().zip(ph).map(|(a, b)| a * b).collect() };

    // padded physical values of U_k at every node: node_values[k/2][node]
    let mut node_values: Vec<Vec<Vec<C64>>> =
        vec![phases.par_iter().map(|ph| space.padded_values(&apply(phi_hat, ph))).collect()];
    let mut out = vec![apply(phi_hat, &final_phase)];
    let rot = C64::new(0.0, -cfg.mu);
    for k in (3..=order_cap).step_by(2) {
        let integrands: Vec<Vec<C64>> = (0..lattice.len())
            .into_par_iter()
            .map(|j| {
                let vals = |kk: usize| &node_values[kk / 2][j];
                let len = vals(1).len();
                let mut nk = vec![C64::default(); len];
                for k1 in (1..k).step_by(2) {
                    for k2 in (1..k - k1).step_by(2) {
                        let k3 = k - k1 - k2;
                        let (a, b, c) = (vals(k1), vals(k2), vals(k3));
                        for i in 0..len {
                            nk[i] += a[i] * b[i].conj() * c[i];
                        }
                    }
                }
                let mut s = space.spectrum_of(&nk);
                for (m, v) in s.iter_mut().enumerate() {
                    if cfg.szego && freqs[m] < 0.0 {
                        *v = C64::default();
                    } else {
                        *v *= phases[j][m].conj() * rot;
                    }
                }
                s
            })
            .collect();
        if k + 2 <= order_cap {
            let vk_nodes: Vec<Vec<C64>> = (0..lattice.len())
                .into_par_iter()
                .map(|i| {
                    let mut acc = vec![C64::default(); n];
                    for (j, f) in integrands.iter().enumerate() {
                        let w = lattice.cumulative[i][j];
                        for m in 0..n {
                            acc[m] += f[m] * w;
                        }
                    }
                    space.padded_values(&apply(&acc, &phases[i]))
                })
                .collect();
            node_values.push(vk_nodes);
        }
        let mut vt = vec![C64::default(); n];
        for (j, f) in integrands.iter().enumerate() {
            let w = lattice.weights[j];
            for m in 0..n {
                vt[m] += f[m] * w;
            }
        }
        out.push(apply(&vt, &final_phase));
    }
    Ok(out)
}

/// Strang splitting on a [`ProductSpace`]: exact dispersion half steps around
/// the exact pointwise phase rotation on the padded grid.
pub fn split_step_core<S: ProductSpace>(
    space: &S,
    spec: &[C64],
    cfg: &IntegratorConfig,
    t_final: f64,
) -> Result<Vec<C64>, EvolutionError> {
    if !(cfg.dt > 0.0) {
        return Err(EvolutionError::Config(format!("dt must be positive, got {}", cfg.dt)));
    }
    let steps = (t_final / cfg.dt).ceil().max(1.0) as usize;
    let h = t_final / steps as f64;
    let half = phase_vec(space.freqs(), cfg.beta, cfg.szego, 0.5 * h);
    let mut u = spec.to_vec();
    for n in 0..steps {
        for (v, p) in u.iter_mut().zip(&half) {
            *v *= p;
        }
        let mut vals = space.padded_values(&u);
        for v in vals.iter_mut() {
            *v *= C64::from_polar(1.0, -cfg.mu * v.norm_sqr() * h);
        }
        u = space.spectrum_of(&vals);
        for (v, p) in u.iter_mut().zip(&half) {
            *v *= p;
        }
        if u.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(EvolutionError::NonFinite { t: (n + 1) as f64 * h });
        }
    }
    Ok(u)
}

/// Odd-order Picard iterates `U_1, U_3, …, U_K` at time `t`.
#[derive(Debug, Clone)]
pub struct PicardTree {
    pub order_cap: usize,
    pub t: f64,
    /// `iterates[i]` holds `U_{2i+1}(t)`.
    pub iterates: Vec<SpectralField>,
    /// `M_A` norms of the iterates when a window width was supplied.
    pub norms_ma: Vec<Option<f64>>,
}

impl PicardTree {
    pub fn get(&self, k: usize) -> Option<&SpectralField> {
        if k.is_multiple_of(2) {
            return None;
        }
        self.iterates.get(k / 2)
    }

    pub fn partial_sum(&self, k: usize) -> SpectralField {
        let mut acc = self.iterates[0].clone();
        for (i, u) in self.iterates.iter().enumerate().skip(1) {
            if 2 * i + 1 > k {
                break;
            }
            acc = acc.add(u).expect("same grid");
        }
        acc
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PicardOptions {
    pub nodes: usize,
    pub window: Option<f64>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { nodes: 32, window: None }
    }
}

/// Picard iterates of `φ` on its grid, see [`picard_core`].
pub fn picard_iterates(
    phi: &SpectralField,
    cfg: &IntegratorConfig,
    order_cap: usize,
    t: f64,
    opts: PicardOptions,
) -> Result<PicardTree, EvolutionError> {
    let g = phi.grid();
    let space = LineSpace::new(g)?;
    let spectra = picard_core(&space, phi.spectrum(), cfg, order_cap, t, opts.nodes)?;
    let iterates = spectra
        .into_iter()
        .map(|s| SpectralField::from_spectrum(g, s))
        .collect::<Result<Vec<_>, _>>()?;
    let norms_ma = iterates
        .iter()
        .map(|u| {
            opts.window
                .and_then(|a| u.norm(NormSpec::Modulation { a }).ok())
                .and_then(|v| v.value())
        })
        .collect();
    Ok(PicardTree {
        order_cap,
        t,
        iterates,
        norms_ma,
    })
}

/// Lattice measure and number of maximal intervals where `|f̂| > threshold`,
/// scanned in increasing frequency.
pub fn support_count(f: &SpectralField, threshold: f64) -> (f64, usize) {
    let g = f.grid();
    let n = g.len();
    let spec = f.spectrum();
    let mut cells = 0usize;
    let mut count = 0usize;
    let mut inside = false;
    for k in -(n as i64 / 2)..(n as i64 / 2) {
        let m = g.slot(k).expect("in range");
        let on = spec[m].norm() > threshold;
        if on {
            cells += 1;
            if !inside {
                count += 1;
            }
        }
        inside = on;
    }
    (cells as f64 * g.dxi(), count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_sequence_start() {
        let a = a_sequence(7);
        assert_eq!(a[1], 1.0);
        assert_eq!(a[2], 0.0);
        assert_eq!(a[3], 1.0);
        assert_eq!(a[4], 0.0);
        // a_5 = 2/4 · 3 a_1² a_3
        assert!((a[5] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(50.0, 256).unwrap();
        let z = SpectralField::zeros(g);
        let cfg = IntegratorConfig::new(1.0, 1.0, 0.01);
        let out = evolve(&z, &cfg, 0.1, &[0.1]).unwrap();
        assert_eq!(out[0].1.max_abs(), 0.0);
        let tree = picard_iterates(&z, &cfg, 5, 0.1, PicardOptions::default()).unwrap();
        assert!(tree.iterates.iter().all(|u| u.max_abs() == 0.0));
    }

    #[test]
    fn support_of_zero_field() {
        let g = Grid::new(50.0, 256).unwrap();
        assert_eq!(support_count(&SpectralField::zeros(g), 0.0), (0.0, 0));
    }

    #[test]
    fn even_order_cap_rejected() {
        let g = Grid::new(50.0, 256).unwrap();
        let z = SpectralField::zeros(g);
        let cfg = IntegratorConfig::new(1.0, 1.0, 0.01);
        assert!(matches!(
            picard_iterates(&z, &cfg, 4, 0.1, PicardOptions::default()),
            Err(EvolutionError::OrderCap(4))
        ));
    }
}
