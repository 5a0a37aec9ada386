//! Focusing half-wave traveling-wave profiles `Q_β` and the L² distance
//! experiment built on them.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::numerics::{integrate, integrate_to_infinity, QuadError};
use crate::spectral::{Grid, SpectralError, SpectralField};
use crate::C64;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("speed must lie in (0,1), got {0}")]
    BadSpeed(f64),
    #[error("iteration stalled after {iterations} steps with residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("iteration collapsed to the zero profile")]
    Trivial,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("profile cache: {0}")]
    Cache(String),
}

#[derive(Debug, Clone)]
pub struct QBetaProfile {
    pub beta_speed: f64,
    pub field: SpectralField,
    /// `‖LQ - |Q|²Q‖ / ‖Q‖` on the grid.
    pub residual: f64,
    pub iterations: usize,
}

impl QBetaProfile {
    pub fn l2(&self) -> f64 {
        self.field.mass().sqrt()
    }
}

/// Symbol of `(|D| - βD)/(1-β) + 1`.
pub fn profile_symbol(beta: f64, xi: f64) -> f64 {
    (xi.abs() - beta * xi) / (1.0 - beta) + 1.0
}

fn apply_symbol(beta: f64, q: &SpectralField) -> SpectralField {
    q.map_spectrum(|xi, v| v * profile_symbol(beta, xi))
}

/// Relative residual of the profile equation.
pub fn profile_residual(beta: f64, q: &SpectralField) -> f64 {
    let lq = apply_symbol(beta, q);
    let nl = q.pointwise_cubic(1.0);
    let r = lq.sub(&nl).expect("same grid");
    let den = q.mass().sqrt();
    if den == 0.0 {
        f64::INFINITY
    } else {
        r.mass().sqrt() / den
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub exponent: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 20_000,
            exponent: 1.5,
        }
    }
}

/// Petviashvili iteration `Q ← γ^{p} L^{-1}(|Q|²Q)` with
/// `γ = ⟨LQ,Q⟩/⟨|Q|²Q,Q⟩`, starting from `2/(2y+i)`.
pub fn solve_qbeta(beta: f64, grid: Grid, tol: f64) -> Result<QBetaProfile, ProfileError> {
    solve_qbeta_with(
        beta,
        grid,
        SolverOptions {
            tol,
            ..SolverOptions::default()
        },
    )
}

pub fn solve_qbeta_with(beta: f64, grid: Grid, opts: SolverOptions) -> Result<QBetaProfile, ProfileError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ProfileError::BadSpeed(beta));
    }
    let start = SpectralField::from_fn(grid, |y| C64::new(2.0, 0.0) / C64::new(2.0 * y, 1.0));
    let mut exponent = opts.exponent;
    let mut damping = 1.0;
    loop {
        match petviashvili(beta, &start, opts, exponent, damping) {
            Ok(p) => return Ok(p),
            Err(ProfileError::NotConverged { iterations, residual }) => {
                // anneal the stabilizing exponent and damp the update
                if damping < 0.2 {
                    return Err(ProfileError::NotConverged { iterations, residual });
                }
                damping *= 0.5;
                exponent = 0.5 * (exponent + 1.0);
            }
            Err(e) => return Err(e),
        }
    }
}

fn petviashvili(
    beta: f64,
    start: &SpectralField,
    opts: SolverOptions,
    exponent: f64,
    damping: f64,
) -> Result<QBetaProfile, ProfileError> {
    let grid = start.grid();
    let mut q = start.clone();
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;
    for it in 1..=opts.max_iter {
        let nl = q.pointwise_cubic(1.0);
        let lq = apply_symbol(beta, &q);
        let num = lq.inner(&q)?.re;
        let den = nl.inner(&q)?.re;
        if !(den > 0.0) || !num.is_finite() {
            return Err(ProfileError::Trivial);
        }
        let gamma = (num / den).powf(exponent);
        let next = nl.map_spectrum(|xi, v| v * (gamma / profile_symbol(beta, xi)));
        q = if damping < 1.0 {
            q.scale(C64::new(1.0 - damping, 0.0)).add(&next.scale(C64::new(damping, 0.0)))?
        } else {
            SpectralField::from_spectrum(grid, next.spectrum().to_vec())?
        };
        if q.mass() < 1e-20 {
            return Err(ProfileError::Trivial);
        }
        if it % 10 == 0 {
            let r = profile_residual(beta, &q);
            if !r.is_finite() {
                return Err(ProfileError::NotConverged { iterations: it, residual: r });
            }
            if r <= opts.tol {
                let field = gauge_fix(&q);
                let residual = profile_residual(beta, &field);
                return Ok(QBetaProfile {
                    beta_speed: beta,
                    field,
                    residual,
                    iterations: it,
                });
            }
            if r < 0.999 * best {
                best = r;
                since_best = 0;
            } else {
                since_best += 10;
                if since_best > 2000 || r > 1e3 * best {
                    return Err(ProfileError::NotConverged { iterations: it, residual: r });
                }
            }
        }
    }
    Err(ProfileError::NotConverged {
        iterations: opts.max_iter,
        residual: profile_residual(beta, &q),
    })
}

/// Moves the maximum of `|Q|` to `x = 0` and makes `Q(0)` real positive.
pub fn gauge_fix(q: &SpectralField) -> SpectralField {
    let g = q.grid();
    let vals = q.values();
    let (jmax, _) = vals
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (j, v)| if v.norm() > acc.1 { (j, v.norm()) } else { acc });
    // golden-section refinement of the maximum between neighbouring nodes
    let amp = |x: f64| q.sample_at(&[x])[0].norm_sqr();
    let (mut a, mut b) = (g.x(jmax) - g.dx(), g.x(jmax) + g.dx());
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (amp(c), amp(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = amp(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = amp(d);
        }
    }
    let x0 = 0.5 * (a + b);
    let shifted = q.translate(-x0);
    let at0 = shifted.sample_at(&[0.0])[0];
    shifted.scale(C64::from_polar(1.0, -at0.arg()))
}

/// Value of the profile at `x = 0` after gauge fixing.
pub fn value_at_origin(q: &SpectralField) -> C64 {
    q.sample_at(&[0.0])[0]
}

/// `Q⁺(y) = 2/(2y+i)`.
pub fn q_plus(y: f64) -> C64 {
    C64::new(2.0, 0.0) / C64::new(2.0 * y, 1.0)
}

/// `min_{x₀,γ} ‖Q(·-x₀) - e^{iγ}Q⁺‖_{H^{1/2}}`, the phase optimized in closed
/// form and the shift by golden section around the gauge point.
pub fn distance_to_q_plus(q: &SpectralField) -> Result<f64, ProfileError> {
    let g = q.grid();
    let qp = SpectralField::from_spectrum_fn(g, |xi| {
        if xi > 0.0 {
            C64::new(0.0, -2.0 * PI) * (-0.5 * xi).exp()
        } else if xi == 0.0 {
            C64::new(0.0, -PI)
        } else {
            C64::default()
        }
    });
    let w = |xi: f64| (1.0 + xi * xi).sqrt();
    let h = g.dxi() / (2.0 * PI);
    let dist = |x0: f64| {
        let shifted = q.translate(x0);
        let mut cross = C64::default();
        let mut na = 0.0;
        let mut nb = 0.0;
        for (m, (a, b)) in shifted.spectrum().iter().zip(qp.spectrum()).enumerate() {
            let wt = w(g.xi(m)) * h;
            cross += a * b.conj() * wt;
            na += a.norm_sqr() * wt;
            nb += b.norm_sqr() * wt;
        }
        (na + nb - 2.0 * cross.norm()).max(0.0).sqrt()
    };
    let (mut a, mut b) = (-2.0, 2.0);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..50 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if dist(c) < dist(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(dist(0.5 * (a + b)))
}

/// Disk cache of profile spectra keyed by `(β, L, M, tol)`.
#[derive(Debug, Clone)]
pub struct ProfileCache {
    dir: PathBuf,
}

impl ProfileCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        ProfileCache {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    fn path(&self, beta: f64, grid: Grid, tol: f64) -> PathBuf {
        self.dir.join(format!(
            "qbeta_{:016x}_{:016x}_{}_{:016x}.csv",
            beta.to_bits(),
            grid.length().to_bits(),
            grid.len(),
            tol.to_bits()
        ))
    }

    pub fn load_or_solve(&self, beta: f64, grid: Grid, tol: f64) -> Result<QBetaProfile, ProfileError> {
        let path = self.path(beta, grid, tol);
        if let Ok(file) = fs::File::open(&path) {
            let mut spec = Vec::with_capacity(grid.len());
            let mut iterations = 0;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| ProfileError::Cache(e.to_string()))?;
                if n == 0 {
                    iterations = line
                        .trim_start_matches("# iterations=")
                        .parse()
                        .map_err(|_| ProfileError::Cache(format!("bad header in {}", path.display())))?;
                    continue;
                }
                let mut parts = line.split(',');
                let re: f64 = parse_field(parts.next(), &path)?;
                let im: f64 = parse_field(parts.next(), &path)?;
                spec.push(C64::new(re, im));
            }
            let field = SpectralField::from_spectrum(grid, spec)?;
            let residual = profile_residual(beta, &field);
            return Ok(QBetaProfile {
                beta_speed: beta,
                field,
                residual,
                iterations,
            });
        }
        let prof = solve_qbeta(beta, grid, tol)?;
        fs::create_dir_all(&self.dir).map_err(|e| ProfileError::Cache(e.to_string()))?;
        let mut out = String::with_capacity(grid.len() * 48);
        out.push_str(&format!("# iterations={}\n", prof.iterations));
        for v in prof.field.spectrum() {
            out.push_str(&format!("{:e},{:e}\n", v.re, v.im));
        }
        let mut f = fs::File::create(&path).map_err(|e| ProfileError::Cache(e.to_string()))?;
        f.write_all(out.as_bytes()).map_err(|e| ProfileError::Cache(e.to_string()))?;
        Ok(prof)
    }
}

fn parse_field(s: Option<&str>, path: &Path) -> Result<f64, ProfileError> {
    s.and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| ProfileError::Cache(format!("malformed row in {}", path.display())))
}

/// Parameters of the L² distance experiment.
#[derive(Debug, Clone, Copy)]
pub struct L2DistanceParams {
    /// Speed of the faster wave, fixed across ε.
    pub beta2: f64,
    /// `β₂ - β₁ = ε^{gap_power}(1-β₂)`; must lie in `(1, 4/3)`.
    pub gap_power: f64,
    /// Physical window length for `u_β(0)`.
    pub length: f64,
    pub points: usize,
    pub tol: f64,
}

impl Default for L2DistanceParams {
    fn default() -> Self {
        L2DistanceParams {
            beta2: 0.95,
            gap_power: 7.0 / 6.0,
            length: 64.0,
            points: 1 << 15,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct L2DistanceRun {
    pub epsilon: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub time: f64,
    pub shift: f64,
    pub d0: f64,
    pub dt: f64,
    pub interference: f64,
    pub residual1: f64,
    pub residual2: f64,
    pub mass1: f64,
    pub mass2: f64,
    /// Time after the `ε^{-1}u(ε^{-2}t, ε^{-2}x)` rescaling; L² distances are unchanged by it.
    pub rescaled_time: f64,
}

impl L2DistanceRun {
    pub fn d0_over_eps(&self) -> f64 {
        self.d0 / self.epsilon
    }
    pub fn dt_over_root(&self) -> f64 {
        self.dt / (1.0 - self.beta1).sqrt()
    }
}

fn physical_profile(prof: &QBetaProfile, grid: Grid) -> Result<SpectralField, ProfileError> {
    Ok(SpectralField::from_values(grid, prof.field.values().to_vec())?)
}

/// Profiles at `β₁ < β₂` inside the window `ε^{4/3}(1-β₂) < β₂-β₁ < ε(1-β₂)`,
/// with `d₀ = ‖u_{β₁}(0) - u_{β₂}(0)‖` and `d_t` at `t = 1/(√ε(β₂-β₁))`.
/// Both waves carry the phase `e^{it}`, so `d_t` only sees the relative
/// translation `(β₂-β₁)t = ε^{-1/2}`.
pub fn l2_distance_experiment(
    eps: f64,
    params: L2DistanceParams,
    cache: Option<&ProfileCache>,
) -> Result<L2DistanceRun, ProfileError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ProfileError::BadSpeed(eps));
    }
    let beta2 = params.beta2;
    let beta1 = beta2 - eps.powf(params.gap_power) * (1.0 - beta2);
    let xgrid = Grid::new(params.length, params.points)?;
    let solve = |beta: f64| {
        let g = Grid::new(params.length / (1.0 - beta), params.points)?;
        match cache {
            Some(c) => c.load_or_solve(beta, g, params.tol),
            None => solve_qbeta(beta, g, params.tol),
        }
    };
    let (p1, p2) = rayon::join(|| solve(beta1), || solve(beta2));
    let (p1, p2) = (p1?, p2?);
    let u1 = physical_profile(&p1, xgrid)?;
    let u2 = physical_profile(&p2, xgrid)?;
    let d0 = u1.sub(&u2)?.mass().sqrt();
    let time = 1.0 / (eps.sqrt() * (beta2 - beta1));
    let shift = (beta2 - beta1) * time;
    let u1t = u1.translate(-shift);
    let dt = u1t.sub(&u2)?.mass().sqrt();
    let interference = 2.0 * u1t.inner(&u2)?.re;
    Ok(L2DistanceRun {
        epsilon: eps,
        beta1,
        beta2,
        time,
        shift,
        d0,
        dt,
        interference,
        residual1: p1.residual,
        residual2: p2.residual,
        mass1: u1.mass(),
        mass2: u2.mass(),
        rescaled_time: eps * eps * time,
    })
}

/// `K(y) = 1/(⟨y⟩(1 + (1-β)⟨y⟩))`.
pub fn decay_kernel(beta: f64, y: f64) -> f64 {
    let jy = (1.0 + y * y).sqrt();
    1.0 / (jy * (1.0 + (1.0 - beta) * jy))
}

#[derive(Debug, Clone)]
pub struct KernelCheck {
    pub beta: f64,
    pub samples: Vec<(f64, f64, f64)>,
    /// Largest `∫K(x-y)K(y)dy / (|log(1-β)| K(x))` over the samples.
    pub constant: f64,
}

/// Adaptive quadrature of `∫K(x-y)K(y)dy` split at the kernel's transition points.
pub fn kernel_convolution(beta: f64, x: f64) -> Result<f64, ProfileError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ProfileError::BadSpeed(beta));
    }
    let sigma = 1.0 - beta;
    let f = |y: f64| decay_kernel(beta, x - y) * decay_kernel(beta, y);
    let mut pts = vec![0.0, x, -1.0, 1.0, x - 1.0, x + 1.0, -1.0 / sigma, 1.0 / sigma, x - 1.0 / sigma, x + 1.0 / sigma];
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    let lo = pts[0];
    let hi = *pts.last().unwrap();
    let scale = f(0.0).max(f(x)).max(1e-300);
    let tol = 1e-13 * scale;
    let mut total = integrate_to_infinity(&|u: f64| f(lo - (u - lo)), lo, tol)?;
    for w in pts.windows(2) {
        total += integrate(&f, w[0], w[1], tol)?;
    }
    total += integrate_to_infinity(&f, hi, tol)?;
    Ok(total)
}

pub fn verify_kernel_convolution(beta: f64, x_samples: &[f64]) -> Result<KernelCheck, ProfileError> {
    let lg = (1.0 - beta).ln().abs();
    let mut samples = Vec::with_capacity(x_samples.len());
    let mut constant: f64 = 0.0;
    for &x in x_samples {
        let v = kernel_convolution(beta, x)?;
        let ratio = v / (lg * decay_kernel(beta, x));
        constant = constant.max(ratio);
        samples.push((x, v, ratio));
    }
    Ok(KernelCheck {
        beta,
        samples,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_speed() {
        let g = Grid::new(100.0, 256).unwrap();
        assert!(matches!(solve_qbeta(1.0, g, 1e-8), Err(ProfileError::BadSpeed(_))));
        assert!(matches!(solve_qbeta(0.0, g, 1e-8), Err(ProfileError::BadSpeed(_))));
    }

    #[test]
    fn symbol_values() {
        assert_eq!(profile_symbol(0.5, 0.0), 1.0);
        assert!((profile_symbol(0.5, 2.0) - 3.0).abs() < 1e-15);
        assert!((profile_symbol(0.5, -2.0) - 7.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_convolution_is_even() {
        let a = kernel_convolution(0.9, 3.7).unwrap();
        let b = kernel_convolution(0.9, -3.7).unwrap();
        assert!((a - b).abs() <= 1e-8 * a);
    }
}
