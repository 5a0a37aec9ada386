//! Two-bump data, the low-frequency `U₃` window, and the norm-inflation drivers.
//!
//! Large carrier frequencies are handled on a carrier lattice: a field whose
//! spectrum lives near the multiples `jN` is stored as a table over
//! `(j, η)` with `ξ = jN + η`. Cubic products of such fields are 2-D linear
//! convolutions in `(j, η)`, computed with small FFTs whose size does not
//! depend on `N`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::evolution::{a_sequence, picard_core, split_step_core, EvolutionError, IntegratorConfig, ProductSpace};
use crate::feasibility::{self, SystemCase};
use crate::numerics::{integrate, QuadError};
use crate::spectral::{Grid, NormSpec, SpectralError, SpectralField};
use crate::C64;

#[derive(Debug, Error)]
pub enum InflationError {
    #[error("{0} is not aligned with the frequency lattice")]
    Misaligned(&'static str),
    #[error("bump width {a} exceeds a quarter of the carrier {n}")]
    Margin { a: f64, n: f64 },
    #[error("carriers reach {needed:.3e}, beyond Nyquist {nyquist:.3e}")]
    Nyquist { needed: f64, nyquist: f64 },
    #[error("phase condition t ≤ 0.1 N^(-β) violated: t = {t:e}, bound {bound:e}")]
    Phase { t: f64, bound: f64 },
    #[error("exponent budget outside the admissible region")]
    Infeasible,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// `φ̂ = R(1_{N+I_A} + 1_{2N+I_A})`, `I_A = [-A/2, A/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBumpData {
    pub r: f64,
    pub n: f64,
    pub a: f64,
    pub s: f64,
}

impl TwoBumpData {
    /// Lattice cells `(N/h, A/h)`; `A/h` must be an even integer and `A ≤ N/4`.
    pub fn cells(&self, h: f64) -> Result<(i64, i64), InflationError> {
        let nc = self.n / h;
        let ac = self.a / h;
        if (nc - nc.round()).abs() > 1e-9 * nc.max(1.0) {
            return Err(InflationError::Misaligned("carrier N"));
        }
        if (ac - ac.round()).abs() > 1e-9 * ac.max(1.0) || (ac.round() as i64) % 2 != 0 || ac.round() < 2.0 {
            return Err(InflationError::Misaligned("width A"));
        }
        if self.a > 0.25 * self.n {
            return Err(InflationError::Margin { a: self.a, n: self.n });
        }
        Ok((nc.round() as i64, ac.round() as i64))
    }
}

/// The two-bump datum on a periodic grid, with `‖φ‖_{H^s}`.
pub fn make_two_bump(data: &TwoBumpData, grid: Grid) -> Result<(SpectralField, f64), InflationError> {
    let (nc, ac) = data.cells(grid.dxi())?;
    let needed = (2 * nc + ac / 2) as f64 * grid.dxi();
    if 3.0 * data.n + 2.0 * data.a >= grid.nyquist() {
        return Err(InflationError::Nyquist {
            needed: 3.0 * data.n + 2.0 * data.a,
            nyquist: grid.nyquist(),
        });
    }
    let _ = needed;
    let mut spec = vec![C64::default(); grid.len()];
    for center in [nc, 2 * nc] {
        for k in center - ac / 2..center + ac / 2 {
            spec[grid.slot(k).expect("inside Nyquist")] = C64::new(data.r, 0.0);
        }
    }
    let field = SpectralField::from_spectrum(grid, spec)?;
    let hs = field.norm(NormSpec::Sobolev { s: data.s })?.value().unwrap_or(f64::NAN);
    Ok((field, hs))
}

/// Lattice count of `{(ξ₁,ξ₃) ∈ (N+I_A)²: ξ₁+ξ₃-ξ ∈ 2N+I_A}` in cell units,
/// with `ξ = k h`: equals `3a²/4 - k² - k` (half-open cells) for `|k| ≤ a/2`.
pub fn window_count(a_cells: i64, k: i64) -> i64 {
    let half = a_cells / 2;
    let mut count = 0;
    for i in -half..half {
        let lo = (-half + k - i).max(-half);
        let hi = (half + k - i).min(half);
        if hi > lo {
            count += hi - lo;
        }
    }
    count
}

/// Continuous window measure `m(ξ) = 3A²/4 - ξ²` for `|ξ| ≤ A/2`.
pub fn window_measure(a: f64, xi: f64) -> f64 {
    if xi.abs() > 0.5 * a {
        0.0
    } else {
        0.75 * a * a - xi * xi
    }
}

/// `Û₃(t)` on the lattice points of `[0, A/8)`.
#[derive(Debug, Clone)]
pub struct WindowField {
    pub xi: Vec<f64>,
    pub values: Vec<C64>,
}

/// `U₃[φ](t)` restricted to `ξ ∈ [0, A/8)`, computed exactly from the
/// indicator convolution, and its `H^s` norm as a lower bound for
/// `‖U₃(t)‖_{H^s}`. For `β = 1` the resonance phase vanishes on the window;
/// otherwise the time factor `(e^{itΦ}-1)/(iΦ)` is summed over lattice triples.
pub fn u3_lower_bound(
    data: &TwoBumpData,
    h: f64,
    beta: f64,
    mu: f64,
    t: f64,
) -> Result<(WindowField, f64), InflationError> {
    if !(beta > 0.0) {
        return Err(InflationError::Parameter(format!("beta must be positive, got {beta}")));
    }
    let (nc, ac) = data.cells(h)?;
    if (beta - 1.0).abs() > 1e-15 {
        let bound = 0.1 * data.n.powf(-beta);
        if t > bound {
            return Err(InflationError::Phase { t, bound });
        }
    }
    let top = (ac as f64 / 8.0).ceil() as i64;
    let scale = C64::new(0.0, -mu) * (data.r.powi(3) * h * h / (4.0 * PI * PI));
    let mut xi = Vec::new();
    let mut values = Vec::new();
    for k in 0..top {
        let x = k as f64 * h;
        if x >= data.a / 8.0 {
            break;
        }
        let v = if (beta - 1.0).abs() <= 1e-15 {
            C64::from_polar(t, -t * x) * window_count(ac, k) as f64
        } else {
            let half = ac / 2;
            let p = |c: i64| ((c as f64) * h).abs().powf(beta);
            let mut acc = C64::default();
            for i in -half..half {
                for j in -half..half {
                    let k2 = i + j - k;
                    if k2 < -half || k2 >= half {
                        continue;
                    }
                    let (c1, c2, c3) = (nc + i, 2 * nc + k2, nc + j);
                    let phi = p(k) - p(c1) + p(c2) - p(c3);
                    let tp = t * phi;
                    // (e^{itΦ}-1)/(iΦ) with a series near Φ = 0
                    let f = if tp.abs() < 1e-4 {
                        C64::new(t, 0.0) * (C64::new(1.0, 0.0) + C64::new(0.0, 0.5 * tp) - tp * tp / 6.0)
                    } else {
                        (C64::from_polar(1.0, tp) - 1.0) / C64::new(0.0, phi)
                    };
                    acc += f;
                }
            }
            acc * C64::from_polar(1.0, -t * p(k))
        };
        xi.push(x);
        values.push(v * scale);
    }
    let s = data.s;
    let lower = (values
        .iter()
        .zip(&xi)
        .map(|(v, x)| (1.0 + x * x).powf(s) * v.norm_sqr())
        .sum::<f64>()
        * h
        / (2.0 * PI))
        .sqrt();
    Ok((WindowField { xi, values }, lower))
}

/// `‖⟨ξ⟩^s m(ξ) 1_{[0,A/8)}‖_{L²}/(√(2π) A²)`, the `g(A)` factor of the `U₃` bound.
pub fn window_profile(a: f64, s: f64) -> Result<f64, InflationError> {
    let f = |xi: f64| (1.0 + xi * xi).powf(s) * window_measure(a, xi).powi(2);
    let top = a / 8.0;
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = top.min(1.0);
    while lo < top {
        total += integrate(&f, lo, hi, 1e-12 * a.powi(4))?;
        lo = hi;
        hi = (2.0 * hi).min(top);
    }
    Ok((total / (2.0 * PI)).sqrt() / (a * a))
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// Frequencies `ξ = jN + ηh` with `j ∈ [-J/2, J/2)` and `η` on `M` lattice cells.
pub struct CarrierSpace {
    pub h: f64,
    pub carrier_cells: i64,
    pub carriers: usize,
    pub cells: usize,
    freqs: Vec<f64>,
    rows: [Arc<dyn Fft<f64>>; 2],
    cols: [Arc<dyn Fft<f64>>; 2],
}

fn signed(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

impl CarrierSpace {
    pub fn new(h: f64, carrier_cells: i64, carriers: usize, cells: usize) -> Result<Self, InflationError> {
        if !carriers.is_power_of_two() || !cells.is_power_of_two() || carriers < 4 || cells < 16 {
            return Err(InflationError::Parameter("carrier table sizes must be powers of two".into()));
        }
        if (cells as i64) >= carrier_cells {
            return Err(InflationError::Parameter("window wider than the carrier spacing".into()));
        }
        let n = carrier_cells as f64 * h;
        let mut freqs = Vec::with_capacity(carriers * cells);
        for jj in 0..carriers {
            let j = signed(jj, carriers) as f64;
            for m in 0..cells {
                freqs.push(j * n + signed(m, cells) as f64 * h);
            }
        }
        Ok(CarrierSpace {
            h,
            carrier_cells,
            carriers,
            cells,
            freqs,
            rows: [plan(2 * cells, false), plan(2 * cells, true)],
            cols: [plan(2 * carriers, false), plan(2 * carriers, true)],
        })
    }

    /// Slot of `(j, η-cell)`, if representable.
    pub fn slot(&self, j: i64, cell: i64) -> Option<usize> {
        let (jc, mc) = (self.carriers as i64, self.cells as i64);
        if j < -jc / 2 || j >= jc / 2 || cell < -mc / 2 || cell >= mc / 2 {
            return None;
        }
        Some(j.rem_euclid(jc) as usize * self.cells + cell.rem_euclid(mc) as usize)
    }

    /// Integer lattice index `ξ/h` of a slot.
    pub fn lattice_index(&self, slot: usize) -> i128 {
        let j = signed(slot / self.cells, self.carriers) as i128;
        let m = signed(slot % self.cells, self.cells) as i128;
        j * self.carrier_cells as i128 + m
    }

    fn transform(&self, buf: &mut [C64], inverse: bool) {
        let (pr, pc) = (2 * self.carriers, 2 * self.cells);
        let d = usize::from(inverse);
        for row in buf.chunks_mut(pc) {
            self.rows[d].process(row);
        }
        let mut col = vec![C64::default(); pr];
        for c in 0..pc {
            for r in 0..pr {
                col[r] = buf[r * pc + c];
            }
            self.cols[d].process(&mut col);
            for r in 0..pr {
                buf[r * pc + c] = col[r];
            }
        }
    }

    fn period(&self) -> f64 {
        2.0 * PI / self.h
    }

    /// Two-bump spectrum on the carrier table.
    pub fn two_bump(&self, data: &TwoBumpData) -> Result<Vec<C64>, InflationError> {
        let (nc, ac) = data.cells(self.h)?;
        if nc != self.carrier_cells {
            return Err(InflationError::Parameter("carrier differs from the table's carrier".into()));
        }
        let mut spec = vec![C64::default(); self.freqs.len()];
        for j in [1, 2] {
            for cell in -ac / 2..ac / 2 {
                let s = self
                    .slot(j, cell)
                    .ok_or_else(|| InflationError::Parameter("bump wider than the table".into()))?;
                spec[s] = C64::new(data.r, 0.0);
            }
        }
        Ok(spec)
    }

    /// `H^s` norm as a lattice Riemann sum.
    pub fn sobolev(&self, spec: &[C64], s: f64) -> f64 {
        (spec
            .iter()
            .zip(&self.freqs)
            .map(|(v, xi)| (1.0 + xi * xi).powf(s) * v.norm_sqr())
            .sum::<f64>()
            * self.h
            / (2.0 * PI))
            .sqrt()
    }

    /// `M_A` norm with windows `wA + I_A`; `A/h` must be an even integer.
    pub fn modulation(&self, spec: &[C64], a_cells: i64) -> f64 {
        let mut windows: std::collections::BTreeMap<i128, f64> = std::collections::BTreeMap::new();
        let ac = a_cells as i128;
        for (slot, v) in spec.iter().enumerate() {
            if v.norm_sqr() == 0.0 {
                continue;
            }
            let k = self.lattice_index(slot);
            let w = (k + ac / 2).div_euclid(ac);
            *windows.entry(w).or_insert(0.0) += v.norm_sqr() * self.h;
        }
        windows.values().map(|m| m.sqrt()).sum()
    }

    /// Spectrum values on `ξ ∈ [0, A/8)`.
    pub fn window(&self, spec: &[C64], a: f64) -> WindowField {
        let top = (a / 8.0 / self.h).ceil() as i64;
        let mut xi = Vec::new();
        let mut values = Vec::new();
        for k in 0..top {
            if (k as f64) * self.h >= a / 8.0 {
                break;
            }
            let s = self.slot(0, k).expect("window inside the table");
            xi.push(k as f64 * self.h);
            values.push(spec[s]);
        }
        WindowField { xi, values }
    }
}

impl ProductSpace for CarrierSpace {
    fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    fn padded_values(&self, spec: &[C64]) -> Vec<C64> {
        let (pr, pc) = (2 * self.carriers, 2 * self.cells);
        let mut buf = vec![C64::default(); pr * pc];
        let scale = 1.0 / self.period();
        for (slot, v) in spec.iter().enumerate() {
            let j = signed(slot / self.cells, self.carriers);
            let m = signed(slot % self.cells, self.cells);
            buf[j.rem_euclid(pr as i64) as usize * pc + m.rem_euclid(pc as i64) as usize] = v * scale;
        }
        self.transform(&mut buf, true);
        buf
    }

    fn spectrum_of(&self, values: &[C64]) -> Vec<C64> {
        let (pr, pc) = (2 * self.carriers, 2 * self.cells);
        let mut buf = values.to_vec();
        self.transform(&mut buf, false);
        let scale = self.period() / (pc as f64 * pr as f64);
        (0..self.freqs.len())
            .map(|slot| {
                let j = signed(slot / self.cells, self.carriers);
                let m = signed(slot % self.cells, self.cells);
                buf[j.rem_euclid(pr as i64) as usize * pc + m.rem_euclid(pc as i64) as usize] * scale
            })
            .collect()
    }
}

/// Exponents of `RA^{1/2} = N^θ`, `T = N^a`, `R = N^b`, `A = N^{2θ-2b}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflationBudget {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub s: f64,
}

impl InflationBudget {
    pub fn case(&self) -> SystemCase {
        if (self.beta - 1.0).abs() < 1e-15 {
            SystemCase::Halfwave
        } else if self.s <= -0.5 {
            SystemCase::FracLowS
        } else {
            SystemCase::FracMidS
        }
    }

    pub fn is_feasible(&self) -> bool {
        feasibility::point_is_admissible(self.case(), self.theta, self.s, self.beta, self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InflationMode {
    Series,
    Integrator,
    Both,
}

#[derive(Debug, Clone, Copy)]
pub struct InflationSetup {
    /// Lattice spacing of the frequency variable.
    pub h: f64,
    pub order_cap: usize,
    pub nodes: usize,
    pub integrator_steps: usize,
    pub mu: f64,
    pub dominance: f64,
    /// Safety constant in `T ≤ C₃ A^{-1}‖φ‖_{M_A}^{-2}`.
    pub c3: f64,
}

impl Default for InflationSetup {
    fn default() -> Self {
        InflationSetup {
            h: 0.125,
            order_cap: 9,
            nodes: 32,
            integrator_steps: 64,
            mu: 1.0,
            dominance: 10.0,
            c3: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InflationRun {
    pub beta: f64,
    pub s: f64,
    pub n: f64,
    pub a: f64,
    pub r: f64,
    pub t: f64,
    pub norm_phi_hs: f64,
    pub norm_phi_ma: f64,
    pub norm_u1: f64,
    pub norm_u3: f64,
    pub norm_u3_lower: f64,
    /// `‖U_k(T)‖_{H^s}` and `‖U_k(T)‖_{M_A}` for odd `k ≤ K`.
    pub iterate_hs: Vec<f64>,
    pub iterate_ma: Vec<f64>,
    pub c2_measured: f64,
    /// Bound on `Σ_{k>K}‖U_k(T)‖_{H^s}` from the iterate-bound shape.
    pub geometric_tail: f64,
    /// Computed `Σ_{5≤k≤K}‖U_k‖_{H^s}` plus the geometric tail.
    pub tail_bound: f64,
    pub norm_u_series: f64,
    pub norm_u_integrator: Option<f64>,
    /// Difference between the two solutions when both were computed.
    pub series_gap: Option<f64>,
    /// Integrator self-consistency, from halving the step.
    pub integrator_error: Option<f64>,
    pub norm_u_final: f64,
    pub t_star: f64,
}

impl InflationRun {
    pub fn ratio(&self) -> f64 {
        self.norm_u_final / self.norm_phi_hs
    }
}

/// Concrete two-bump parameters for a budget at carrier `N`: `R = N^b`,
/// `T = N^a`, `A` the even lattice width nearest `N^{2θ-2b}`, and `N` moved to
/// the nearest multiple of `A` so the bumps are window-aligned.
pub fn budget_data(budget: &InflationBudget, n: f64, h: f64) -> Result<(TwoBumpData, f64), InflationError> {
    let a_raw = n.powf(2.0 * budget.theta - 2.0 * budget.b);
    let mut ac = (a_raw / h / 2.0).round() as i64 * 2;
    ac = ac.max(16);
    let a = ac as f64 * h;
    let nc = ((n / a).round() as i64).max(1) * ac;
    let n_aligned = nc as f64 * h;
    let data = TwoBumpData {
        r: n_aligned.powf(budget.b),
        n: n_aligned,
        a,
        s: budget.s,
    };
    data.cells(h)?;
    Ok((data, n_aligned.powf(budget.a)))
}

fn carrier_table(data: &TwoBumpData, setup: &InflationSetup) -> Result<CarrierSpace, InflationError> {
    let (nc, ac) = data.cells(setup.h)?;
    let k = setup.order_cap as i64;
    let span = (k + 1) * ac;
    let cells = (span as usize).next_power_of_two().max(64);
    let carriers = (2 * (k as usize + 3) / 2 + 2).next_power_of_two();
    if cells as i64 >= nc {
        return Err(InflationError::Margin { a: data.a, n: data.n });
    }
    CarrierSpace::new(setup.h, nc, carriers, cells)
}

/// Picard series (and optionally the split-step integrator) for the two-bump
/// datum of a budget at carrier `N`, all on a carrier table.
pub fn inflation_experiment(
    budget: &InflationBudget,
    n: f64,
    setup: &InflationSetup,
    mode: InflationMode,
) -> Result<InflationRun, InflationError> {
    if !budget.is_feasible() {
        return Err(InflationError::Infeasible);
    }
    let (data, t) = budget_data(budget, n, setup.h)?;
    run_two_bump(&data, budget.beta, t, setup, mode)
}

/// The same pipeline for explicit `(R, N, A, T)`.
pub fn run_two_bump(
    data: &TwoBumpData,
    beta: f64,
    t: f64,
    setup: &InflationSetup,
    mode: InflationMode,
) -> Result<InflationRun, InflationError> {
    let space = carrier_table(data, setup)?;
    let (_, ac) = data.cells(setup.h)?;
    let phi = space.two_bump(data)?;
    let s = data.s;
    let norm_phi_hs = space.sobolev(&phi, s);
    let norm_phi_ma = space.modulation(&phi, ac);
    let t_star = if norm_phi_ma > 0.0 {
        setup.c3 / (data.a * norm_phi_ma * norm_phi_ma)
    } else {
        f64::INFINITY
    };
    let cfg = IntegratorConfig::new(beta, setup.mu, t.max(1e-300) / setup.integrator_steps as f64);

    let iterates = picard_core(&space, &phi, &cfg, setup.order_cap, t, setup.nodes)?;
    let iterate_hs: Vec<f64> = iterates.iter().map(|u| space.sobolev(u, s)).collect();
    let iterate_ma: Vec<f64> = iterates.iter().map(|u| space.modulation(u, ac)).collect();
    let mut sum = vec![C64::default(); phi.len()];
    for u in &iterates {
        for (a, b) in sum.iter_mut().zip(u) {
            *a += b;
        }
    }
    let norm_u_series = space.sobolev(&sum, s);

    let (_, lower) = if (beta - 1.0).abs() < 1e-15 || t <= 0.1 * data.n.powf(-beta) {
        u3_lower_bound(data, setup.h, beta, setup.mu, t)?
    } else {
        let w = space.window(&iterates[1], data.a);
        let l = (w
            .values
            .iter()
            .zip(&w.xi)
            .map(|(v, x)| (1.0 + x * x).powf(s) * v.norm_sqr())
            .sum::<f64>()
            * setup.h
            / (2.0 * PI))
            .sqrt();
        (w, l)
    };

    // measured shape constant of the iterate bound
    let a_seq = a_sequence(401);
    let base = t.sqrt() * data.a.sqrt() * norm_phi_ma;
    let mut c2: f64 = 0.0;
    for (i, ma) in iterate_ma.iter().enumerate().skip(1) {
        let k = 2 * i + 1;
        let denom = a_seq[k] * base.powi(k as i32 - 1) * norm_phi_ma;
        if denom > 0.0 && *ma > 0.0 {
            c2 = c2.max((ma / denom).powf(1.0 / (k as f64 - 1.0)));
        }
    }
    let geometric_tail = geometric_tail(&a_seq, setup.order_cap, c2 * base, norm_phi_ma);
    let computed_tail: f64 = iterate_hs.iter().skip(2).sum();
    let tail_bound = computed_tail + geometric_tail;

    let (norm_u_integrator, series_gap, integrator_error) = if mode == InflationMode::Series {
        (None, None, None)
    } else {
        let u = split_step_core(&space, &phi, &cfg, t)?;
        let fine = IntegratorConfig { dt: 0.5 * cfg.dt, ..cfg };
        let u2 = split_step_core(&space, &phi, &fine, t)?;
        let diff = |x: &[C64], y: &[C64]| -> f64 {
            let d: Vec<C64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            space.sobolev(&d, s)
        };
        let err = diff(&u, &u2);
        let gap = diff(&u2, &sum);
        (Some(space.sobolev(&u2, s)), Some(gap), Some(err))
    };
    let norm_u_final = match mode {
        InflationMode::Series => norm_u_series,
        _ => norm_u_integrator.unwrap_or(norm_u_series),
    };
    Ok(InflationRun {
        beta,
        s,
        n: data.n,
        a: data.a,
        r: data.r,
        t,
        norm_phi_hs,
        norm_phi_ma,
        norm_u1: iterate_hs[0],
        norm_u3: iterate_hs.get(1).copied().unwrap_or(0.0),
        norm_u3_lower: lower,
        iterate_hs,
        iterate_ma,
        c2_measured: c2,
        geometric_tail,
        tail_bound,
        norm_u_series,
        norm_u_integrator,
        series_gap,
        integrator_error,
        norm_u_final,
        t_star,
    })
}

/// `Σ_{k>K, k odd} a_k q^{k-1} ‖φ‖_{M_A}/√(2π)`, using `H^s ≤ M_A/√(2π)` for
/// `s ≤ 0`. Infinite when the terms stop decaying before `a_k` runs out.
pub fn geometric_tail(a_seq: &[f64], order_cap: usize, q: f64, norm_ma: f64) -> f64 {
    let mut total = 0.0;
    let mut last = f64::INFINITY;
    let mut k = order_cap + 2;
    while k < a_seq.len() {
        let ln = a_seq[k].ln() + (k as f64 - 1.0) * q.ln();
        let term = ln.exp() * norm_ma / (2.0 * PI).sqrt();
        if !term.is_finite() {
            return f64::INFINITY;
        }
        total += term;
        if term < 1e-18 * total.max(1e-300) && term < last {
            return total;
        }
        last = term;
        k += 2;
    }
    if last < 1e-12 * total {
        total
    } else {
        f64::INFINITY
    }
}

/// Dominance of `U₃` over `U₁`, over the higher iterates, and over 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceVerdict {
    pub factor: f64,
    pub u3_over_u1: f64,
    pub u3_over_tail: f64,
    pub u3_over_one: f64,
    pub condition8: bool,
    pub condition9: bool,
    pub condition10: bool,
}

impl DominanceVerdict {
    pub fn all(&self) -> bool {
        self.condition8 && self.condition9 && self.condition10
    }
}

pub fn dominance_check(run: &InflationRun, factor: f64) -> DominanceVerdict {
    let u3 = run.norm_u3_lower;
    let ratio = |den: f64| if den > 0.0 { u3 / den } else if u3 > 0.0 { f64::INFINITY } else { 0.0 };
    let u3_over_u1 = ratio(run.norm_u1);
    let u3_over_tail = ratio(run.tail_bound);
    let u3_over_one = u3;
    DominanceVerdict {
        factor,
        u3_over_u1,
        u3_over_tail,
        u3_over_one,
        condition8: u3 > 0.0 && u3_over_u1 >= factor,
        condition9: u3 > 0.0 && u3_over_tail >= factor,
        condition10: u3 > 0.0 && u3_over_one >= factor,
    }
}

/// Log-corrected parameters at `β = 2`, `s = -1/2`:
/// `T = 1/(N²(log N)^{1/6})`, `R = 1`, `A = N/(log N)^{1/12}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseTwo {
    pub t: f64,
    pub r: f64,
    pub a: f64,
    /// `TR²A²`, equal to `(log N)^{-1/3}`.
    pub series_parameter: f64,
    /// `TR³A²(log A)^{1/2}`, of size `(log N)^{1/6}`.
    pub growth: f64,
}

pub fn case_two_parameters(n: f64) -> Result<CaseTwo, InflationError> {
    if !(n > std::f64::consts::E) {
        return Err(InflationError::Parameter(format!("N must exceed e, got {n}")));
    }
    let l = n.ln();
    let t = 1.0 / (n * n * l.powf(1.0 / 6.0));
    let r = 1.0;
    let a = n / l.powf(1.0 / 12.0);
    Ok(CaseTwo {
        t,
        r,
        a,
        series_parameter: t * r * r * a * a,
        growth: t * r.powi(3) * a * a * a.ln().sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_count_formula() {
        for a in [2, 4, 8, 16, 32] {
            for k in -(a / 2)..=(a / 2) {
                assert_eq!(window_count(a, k), 3 * a * a / 4 - k * k - k, "a={a} k={k}");
            }
        }
    }

    #[test]
    fn misaligned_width_rejected() {
        let d = TwoBumpData { r: 1.0, n: 64.0, a: 7.0, s: -0.5 };
        assert!(matches!(d.cells(1.0), Err(InflationError::Misaligned(_))));
        let wide = TwoBumpData { r: 1.0, n: 64.0, a: 32.0, s: -0.5 };
        assert!(matches!(wide.cells(1.0), Err(InflationError::Margin { .. })));
    }

    #[test]
    fn carrier_table_slots_round_trip() {
        let sp = CarrierSpace::new(0.5, 1000, 8, 64).unwrap();
        let s = sp.slot(2, -5).unwrap();
        assert_eq!(sp.lattice_index(s), 2 * 1000 - 5);
        assert!((sp.freqs()[s] - (2000.0 - 5.0) * 0.5).abs() < 1e-9);
        assert!(sp.slot(4, 0).is_none());
    }

    #[test]
    fn case_two_identities() {
        let c = case_two_parameters(1e8).unwrap();
        let l = 1e8f64.ln();
        assert!((c.series_parameter - l.powf(-1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_time_window_vanishes() {
        let d = TwoBumpData { r: 1.0, n: 64.0, a: 8.0, s: -0.5 };
        let (_, lower) = u3_lower_bound(&d, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(lower, 0.0);
    }
}
