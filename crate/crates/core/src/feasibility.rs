//! Exponent geometry of the norm-inflation parameter choices: linear systems
//! in `(a, b)` parameterized by `(θ, s, β)`, their exact solution polygons, and
//! the `(β, s)` region map.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeasibilityError {
    #[error("case {case:?} does not apply to beta = {beta}, s = {s}")]
    Mismatch { case: String, beta: f64, s: f64 },
    #[error("non-finite parameter")]
    NonFinite,
}

pub type Q = BigRational;

fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite")
}

fn qi(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemCase {
    /// `β = 1`, constraint `a < 0`.
    Halfwave,
    /// `s ≤ -1/2`, constraint `a < -β`.
    FracLowS,
    /// `-1/2 < s < 0`, constraint `a < -β` and `a - (2+2s)b + (5+2s)θ > 0`.
    FracMidS,
}

/// `c_a a + c_b b + c_0 < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub ca: Q,
    pub cb: Q,
    pub c0: Q,
}

impl Inequality {
    fn less(ca: Q, cb: Q, c0: Q) -> Self {
        Inequality { ca, cb, c0 }
    }

    fn greater(ca: Q, cb: Q, c0: Q) -> Self {
        Inequality {
            ca: -ca,
            cb: -cb,
            c0: -c0,
        }
    }

    pub fn eval(&self, a: &Q, b: &Q) -> Q {
        &self.ca * a + &self.cb * b + &self.c0
    }

    pub fn holds(&self, a: &Q, b: &Q) -> bool {
        self.eval(a, b).is_negative()
    }

    fn eval_f64(&self, a: f64, b: f64) -> f64 {
        self.ca.to_f64().unwrap() * a + self.cb.to_f64().unwrap() * b + self.c0.to_f64().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSystem {
    pub case: SystemCase,
    pub theta: Q,
    pub s: Q,
    pub beta: Q,
    /// Side condition `θ < -s`.
    pub theta_admissible: bool,
    pub inequalities: Vec<Inequality>,
}

pub fn build_system(case: SystemCase, theta: f64, s: f64, beta: f64) -> Result<ExponentSystem, FeasibilityError> {
    if !(theta.is_finite() && s.is_finite() && beta.is_finite()) {
        return Err(FeasibilityError::NonFinite);
    }
    build_system_exact(case, q(theta), q(s), q(beta))
}

/// The inequality list of each case:
/// - `a < 0` (half-wave) or `a < -β`,
/// - `max{0, θ-1/2} < b < θ` (the lower bound is `θ-1/2` in the mid range),
/// - `a - 2b + 4θ < 0`,
/// - `a - b + 4θ > 0`, or `a - (2+2s)b + (5+2s)θ > 0` in the mid range.
pub fn build_system_exact(case: SystemCase, theta: Q, s: Q, beta: Q) -> Result<ExponentSystem, FeasibilityError> {
    let half = qi(1, 2);
    let mismatch = || FeasibilityError::Mismatch {
        case: format!("{case:?}"),
        beta: beta.to_f64().unwrap_or(f64::NAN),
        s: s.to_f64().unwrap_or(f64::NAN),
    };
    match case {
        SystemCase::Halfwave if !beta.is_one() => return Err(mismatch()),
        SystemCase::FracLowS if s > -half.clone() => return Err(mismatch()),
        SystemCase::FracMidS if !(s > -half.clone() && s.is_negative()) => return Err(mismatch()),
        _ => {}
    }
    if !beta.is_positive() {
        return Err(mismatch());
    }
    let zero = <Q as Zero>::zero();
    let one = Q::one();
    let mut ineq = Vec::new();
    ineq.push(match case {
        SystemCase::Halfwave => Inequality::less(one.clone(), zero.clone(), zero.clone()),
        _ => Inequality::less(one.clone(), zero.clone(), beta.clone()),
    });
    let lower = match case {
        SystemCase::FracMidS => &theta - &half,
        _ => {
            let t = &theta - &half;
            if t > zero {
                t
            } else {
                zero.clone()
            }
        }
    };
    ineq.push(Inequality::greater(zero.clone(), one.clone(), -lower));
    ineq.push(Inequality::less(zero.clone(), one.clone(), -theta.clone()));
    let four = Q::from_integer(BigInt::from(4));
    let two = Q::from_integer(BigInt::from(2));
    let five = Q::from_integer(BigInt::from(5));
    ineq.push(Inequality::less(one.clone(), -two.clone(), &four * &theta));
    ineq.push(match case {
        SystemCase::FracMidS => Inequality::greater(one.clone(), -(&two + &two * &s), (&five + &two * &s) * &theta),
        _ => Inequality::greater(one.clone(), -one.clone(), &four * &theta),
    });
    Ok(ExponentSystem {
        case,
        theta_admissible: theta < -s.clone(),
        theta,
        s,
        beta,
        inequalities: ineq,
    })
}

/// Open convex polygon, vertices counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Region2D {
    pub vertices: Vec<(Q, Q)>,
    pub open: bool,
}

impl Region2D {
    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn vertices_f64(&self) -> Vec<(f64, f64)> {
        self.vertices
            .iter()
            .map(|(a, b)| (a.to_f64().unwrap(), b.to_f64().unwrap()))
            .collect()
    }

    /// Strict interior membership by edge cross products.
    pub fn contains(&self, a: &Q, b: &Q) -> bool {
        if self.is_empty() {
            return false;
        }
        let n = self.vertices.len();
        (0..n).all(|i| {
            let (x0, y0) = &self.vertices[i];
            let (x1, y1) = &self.vertices[(i + 1) % n];
            let cross = (x1 - x0) * (b - y0) - (y1 - y0) * (a - x0);
            cross.is_positive()
        })
    }

    pub fn centroid(&self) -> Option<(Q, Q)> {
        if self.is_empty() {
            return None;
        }
        let n = Q::from_integer(BigInt::from(self.vertices.len()));
        let sa: Q = self.vertices.iter().map(|v| v.0.clone()).fold(<Q as Zero>::zero(), |x, y| x + y);
        let sb: Q = self.vertices.iter().map(|v| v.1.clone()).fold(<Q as Zero>::zero(), |x, y| x + y);
        Some((sa / &n, sb / n))
    }
}

trait Field: Clone + PartialOrd {
    fn sub(&self, o: &Self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn nil() -> Self;
    fn from_q(x: &Q) -> Self;
}

impl Field for Q {
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn nil() -> Self {
        Zero::zero()
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
}

impl Field for f64 {
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn nil() -> Self {
        0.0
    }
    fn from_q(x: &Q) -> Self {
        x.to_f64().unwrap()
    }
}

/// Clips a counterclockwise polygon to `ca a + cb b + c0 ≤ 0`.
fn clip<T: Field>(poly: &[(T, T)], ca: &T, cb: &T, c0: &T) -> Vec<(T, T)> {
    let val = |p: &(T, T)| ca.mul(&p.0).add(&cb.mul(&p.1)).add(c0);
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    let zero = T::nil();
    for i in 0..n {
        let p = &poly[i];
        let q = &poly[(i + 1) % n];
        let (vp, vq) = (val(p), val(q));
        if vp <= zero {
            out.push(p.clone());
        }
        if (vp < zero && vq > zero) || (vp > zero && vq < zero) {
            let t = vp.div(&vp.sub(&vq));
            out.push((p.0.add(&t.mul(&q.0.sub(&p.0))), p.1.add(&t.mul(&q.1.sub(&p.1)))));
        }
    }
    // drop repeated vertices
    let mut dedup: Vec<(T, T)> = Vec::with_capacity(out.len());
    for v in out {
        if dedup.last().is_none_or(|l| l.0 != v.0 || l.1 != v.1) {
            dedup.push(v);
        }
    }
    while dedup.len() > 1 && dedup[0].0 == dedup[dedup.len() - 1].0 && dedup[0].1 == dedup[dedup.len() - 1].1 {
        dedup.pop();
    }
    dedup
}

fn area2<T: Field>(poly: &[(T, T)]) -> T {
    let n = poly.len();
    let mut acc = T::nil();
    for i in 0..n {
        let (x0, y0) = &poly[i];
        let (x1, y1) = &poly[(i + 1) % n];
        acc = acc.add(&x0.mul(y1).sub(&x1.mul(y0)));
    }
    acc
}

fn drop_collinear(poly: Vec<(Q, Q)>) -> Vec<(Q, Q)> {
    let n = poly.len();
    if n < 3 {
        return poly;
    }
    let keep: Vec<bool> = (0..n)
        .map(|i| {
            let (a0, b0) = &poly[(i + n - 1) % n];
            let (a1, b1) = &poly[i];
            let (a2, b2) = &poly[(i + 1) % n];
            let cross = (a1 - a0) * (b2 - b1) - (b1 - b0) * (a2 - a1);
            !cross.is_zero()
        })
        .collect();
    poly.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect()
}

const BOX: i64 = 1000;

fn bounding_box<T: Field>() -> Vec<(T, T)> {
    let b = Q::from_integer(BigInt::from(BOX));
    let m = -b.clone();
    vec![
        (T::from_q(&m), T::from_q(&m)),
        (T::from_q(&b), T::from_q(&m)),
        (T::from_q(&b), T::from_q(&b)),
        (T::from_q(&m), T::from_q(&b)),
    ]
}

/// Exact half-plane intersection. The open region is the interior of the
/// closed intersection, so it is empty exactly when that has zero area.
pub fn solve_region(sys: &ExponentSystem) -> Region2D {
    if !sys.theta_admissible {
        return Region2D {
            vertices: Vec::new(),
            open: true,
        };
    }
    let mut poly: Vec<(Q, Q)> = bounding_box();
    for c in &sys.inequalities {
        poly = clip(&poly, &c.ca, &c.cb, &c.c0);
        if poly.is_empty() {
            break;
        }
    }
    let poly = drop_collinear(poly);
    let vertices = if poly.len() >= 3 && area2(&poly).is_positive() {
        poly
    } else {
        Vec::new()
    };
    Region2D { vertices, open: true }
}

/// Float-mode emptiness test with every constraint tightened by `margin`
/// (scaled by the coefficient norm); returns an interior witness.
pub fn solve_region_margin(sys: &ExponentSystem, margin: f64) -> Option<(f64, f64)> {
    let theta = sys.theta.to_f64().unwrap();
    let s = sys.s.to_f64().unwrap();
    if theta >= -s - margin {
        return None;
    }
    let mut poly: Vec<(f64, f64)> = bounding_box();
    for c in &sys.inequalities {
        let ca = c.ca.to_f64().unwrap();
        let cb = c.cb.to_f64().unwrap();
        let c0 = c.c0.to_f64().unwrap() + margin * (ca * ca + cb * cb).sqrt();
        poly = clip(&poly, &ca, &cb, &c0);
        if poly.len() < 3 {
            return None;
        }
    }
    if area2(&poly) <= 1e-24 {
        return None;
    }
    let n = poly.len() as f64;
    let ca = poly.iter().map(|p| p.0).sum::<f64>() / n;
    let cb = poly.iter().map(|p| p.1).sum::<f64>() / n;
    Some((ca, cb))
}

/// Whether `(a, b)` satisfies the system of the given case (float inputs
/// converted exactly).
pub fn point_is_admissible(case: SystemCase, theta: f64, s: f64, beta: f64, a: f64, b: f64) -> bool {
    match build_system(case, theta, s, beta) {
        Ok(sys) => sys.theta_admissible && sys.inequalities.iter().all(|c| c.holds(&q(a), &q(b))),
        Err(_) => false,
    }
}

/// `s_crit = (1-β)/2`.
pub fn scaling_critical_index(beta: f64) -> f64 {
    0.5 * (1.0 - beta)
}

/// Which system applies at `(β, s)`.
pub fn case_for(beta: f64, s: f64) -> Option<SystemCase> {
    if s >= 0.0 {
        None
    } else if beta == 1.0 {
        Some(SystemCase::Halfwave)
    } else if s <= -0.5 {
        Some(SystemCase::FracLowS)
    } else {
        Some(SystemCase::FracMidS)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMapEntry {
    pub beta: f64,
    pub s: f64,
    pub feasible: bool,
    /// `(θ, a, b)` of an interior point, when one exists.
    pub witness: Option<(f64, f64, f64)>,
    /// Set for `β = 2`, `s = -1/2`, decided by the log-corrected choice.
    pub special: bool,
}

/// Analytic thresholds `{-s, 1/2, β/4, (2β-1)/6, βs/(2s-1)}`.
pub fn theta_candidates(beta: f64, s: f64) -> Vec<f64> {
    let marks = [-s, 0.5, beta / 4.0, (2.0 * beta - 1.0) / 6.0, beta * s / (2.0 * s - 1.0)];
    let mut out: Vec<f64> = marks.iter().copied().filter(|t| t.is_finite()).collect();
    let mut sorted = out.clone();
    sorted.push(0.0);
    sorted.sort_by(|a, b| a.total_cmp(b));
    for w in sorted.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend((1..=512).map(|i| i as f64 / 513.0));
    out.retain(|t| *t > 0.0 && *t < -s);
    out
}

const MARGIN: f64 = 1e-12;

/// Feasibility of one `(β, s)` pair.
pub fn region_entry(beta: f64, s: f64) -> RegionMapEntry {
    let mut entry = RegionMapEntry {
        beta,
        s,
        feasible: false,
        witness: None,
        special: false,
    };
    if beta == 2.0 && s == -0.5 {
        entry.feasible = true;
        entry.special = true;
        return entry;
    }
    let Some(case) = case_for(beta, s) else {
        return entry;
    };
    for theta in theta_candidates(beta, s) {
        let Ok(sys) = build_system(case, theta, s, beta) else {
            continue;
        };
        if let Some((a, b)) = solve_region_margin(&sys, MARGIN) {
            entry.feasible = true;
            entry.witness = Some((theta, a, b));
            break;
        }
    }
    entry
}

pub fn inflation_region_map(beta_grid: &[f64], s_grid: &[f64]) -> Vec<RegionMapEntry> {
    use rayon::prelude::*;
    let pairs: Vec<(f64, f64)> = beta_grid
        .iter()
        .flat_map(|&b| s_grid.iter().map(move |&s| (b, s)))
        .collect();
    pairs.par_iter().map(|&(b, s)| region_entry(b, s)).collect()
}

/// Closed-form description of the inflation region, for comparison with the map.
pub fn theorem_predicts(beta: f64, s: f64) -> bool {
    if beta <= 0.0 {
        return false;
    }
    if beta < 1.0 {
        s < 0.0
    } else if beta < 2.0 {
        s < scaling_critical_index(beta)
    } else if beta == 2.0 {
        s <= scaling_critical_index(beta)
    } else {
        s < (1.0 - 2.0 * beta) / 6.0
    }
}

/// Monomial `T^t R^r A^a N^n` with rational exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub t: Q,
    pub r: Q,
    pub a: Q,
    pub n: Q,
}

impl Monomial {
    fn new(t: Q, r: Q, a: Q, n: Q) -> Self {
        Monomial { t, r, a, n }
    }

    fn pow(&self, e: &Q) -> Self {
        Monomial::new(&self.t * e, &self.r * e, &self.a * e, &self.n * e)
    }

    fn mul(&self, o: &Monomial) -> Self {
        Monomial::new(&self.t + &o.t, &self.r + &o.r, &self.a + &o.a, &self.n + &o.n)
    }

    fn one() -> Self {
        Monomial::new(<Q as Zero>::zero(), <Q as Zero>::zero(), <Q as Zero>::zero(), <Q as Zero>::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Size {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCase {
    /// `1 < β < 2`, `s = s_crit`.
    FracCrit,
    /// `β > 2`, `s = (1-2β)/6`.
    FracSixth,
}

/// `target = Π factor_i^{e_i}` with each factor forced small or large by the
/// method, so the target is forced to the size opposite to what is required.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub case: BoundaryCase,
    pub beta: Q,
    pub s: Q,
    pub target: Monomial,
    pub factors: Vec<(&'static str, Monomial, Q, Size)>,
    pub identity_holds: bool,
    pub forced: Size,
    pub required: Size,
}

impl Certificate {
    pub fn infeasible(&self) -> bool {
        self.identity_holds && self.forced != self.required
    }
}

/// `E = A/N ≪ 1`, `F = TN^β ≪ 1`, `G = RA^{1/2}N^s ≪ 1`, `H = TR³A² ≫ 1`.
pub fn boundary_infeasibility(case: BoundaryCase, beta: f64) -> Result<Certificate, FeasibilityError> {
    let b = q(beta);
    let one = Q::one();
    let zero = <Q as Zero>::zero();
    let half = qi(1, 2);
    let (s, ok) = match case {
        BoundaryCase::FracCrit => ((&one - &b) * &half, beta > 1.0 && beta < 2.0),
        BoundaryCase::FracSixth => ((&one - qi(2, 1) * &b) / qi(6, 1), beta > 2.0),
    };
    if !ok {
        return Err(FeasibilityError::Mismatch {
            case: format!("{case:?}"),
            beta,
            s: s.to_f64().unwrap(),
        });
    }
    let e = Monomial::new(zero.clone(), zero.clone(), one.clone(), -one.clone());
    let f = Monomial::new(one.clone(), zero.clone(), zero.clone(), b.clone());
    let g = Monomial::new(zero.clone(), one.clone(), half.clone(), s.clone());
    let h = Monomial::new(one.clone(), qi(3, 1), qi(2, 1), zero.clone());
    let (target, factors, forced, required) = match case {
        BoundaryCase::FracCrit => (
            Monomial::new(one.clone(), qi(3, 1), qi(5, 2) + &s, zero.clone()),
            vec![
                ("E", e, &one + &s, Size::Small),
                ("F", f, one.clone(), Size::Small),
                ("G", g, qi(3, 1), Size::Small),
            ],
            Size::Small,
            Size::Large,
        ),
        BoundaryCase::FracSixth => (
            Monomial::new(zero.clone(), one.clone(), half.clone(), s.clone()),
            vec![
                ("E", e, -qi(1, 6), Size::Small),
                ("F", f, -qi(1, 3), Size::Small),
                ("H", h, qi(1, 3), Size::Large),
            ],
            Size::Large,
            Size::Small,
        ),
    };
    let product = factors.iter().fold(Monomial::one(), |acc, (_, m, e, _)| acc.mul(&m.pow(e)));
    // every factor pushes the product the same way: small^(+) and large^(-) are small
    let pushes_small = factors.iter().all(|(_, _, e, size)| match size {
        Size::Small => e.is_positive(),
        Size::Large => e.is_negative(),
    });
    let pushes_large = factors.iter().all(|(_, _, e, size)| match size {
        Size::Small => e.is_negative(),
        Size::Large => e.is_positive(),
    });
    let derived = if pushes_small {
        Size::Small
    } else if pushes_large {
        Size::Large
    } else {
        forced
    };
    Ok(Certificate {
        case,
        beta: b,
        s,
        identity_holds: product == target && derived == forced,
        target,
        factors,
        forced,
        required,
    })
}

/// Monte-Carlo cross-check of polygon membership against direct inequality
/// evaluation on random dyadic points of a box around the region.
pub fn monte_carlo_check(sys: &ExponentSystem, samples: usize, seed: u64) -> (usize, usize) {
    let region = solve_region(sys);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo_a, mut hi_a, mut lo_b, mut hi_b) = (-4.0f64, 1.0f64, -1.0f64, 2.0f64);
    for (a, b) in region.vertices_f64() {
        lo_a = lo_a.min(a - 1.0);
        hi_a = hi_a.max(a + 1.0);
        lo_b = lo_b.min(b - 1.0);
        hi_b = hi_b.max(b + 1.0);
    }
    let denom = Q::from_integer(BigInt::from(1u64 << 40));
    let dyadic = |x: f64| Q::new(BigInt::from_f64((x * (1u64 << 40) as f64).round()).unwrap(), BigInt::one()) / &denom;
    let mut mismatches = 0;
    let mut inside = 0;
    for _ in 0..samples {
        let a = dyadic(rng.gen_range(lo_a..hi_a));
        let b = dyadic(rng.gen_range(lo_b..hi_b));
        let direct = sys.theta_admissible && sys.inequalities.iter().all(|c| c.holds(&a, &b));
        let poly = region.contains(&a, &b);
        if direct != poly {
            mismatches += 1;
        }
        if direct {
            inside += 1;
        }
    }
    (mismatches, inside)
}

/// `(a, b)` value of each inequality at a vertex, for the polygon-correctness check.
pub fn active_constraints(sys: &ExponentSystem, a: &Q, b: &Q) -> (usize, bool) {
    let mut active = 0;
    let mut feasible = true;
    for c in &sys.inequalities {
        let v = c.eval(a, b);
        if v.is_zero() {
            active += 1;
        } else if v.is_positive() {
            feasible = false;
        }
    }
    (active, feasible)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn rational(n: i64, d: i64) -> Q {
    qi(n, d)
}

/// Float evaluation of a constraint, used by plots.
pub fn constraint_value(c: &Inequality, a: f64, b: f64) -> f64 {
    c.eval_f64(a, b)
}
