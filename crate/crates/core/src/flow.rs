//! Integration of `γ' = J B(t) γ`: a Dormand–Prince 5(4) pair with dense
//! output, fundamental solutions, Lagrangian frame transport and
//! monodromy classification.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Complex;

type Complex64 = Complex<f64>;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{self, BlowUpPoint, CentralConfig, HeteroclinicSide};
use crate::symplectic::{
    doubled_to_standard, j_matrix, orthonormalize, symplectic_correct, symplectic_residual,
    LagrangianFrame, Mat, SymplecticMatrix,
};

/// Residual above which the symplectic correction kicks in.
pub const RENORM_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-10 }
    }
}

impl Tolerances {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn scaled(self, f: f64) -> Self {
        Self { abs: self.abs * f, rel: self.rel * f }
    }
}

// ---------------------------------------------------------------------------
// Coefficient paths

/// A symmetric coefficient path `B(t)`, optionally driven by an auxiliary
/// ODE (e.g. the `(q, Q)` orbit in blow-up time) integrated alongside.
pub trait Coefficient: Send + Sync {
    fn half_dim(&self) -> usize;
    fn aux_dim(&self) -> usize {
        0
    }
    /// Auxiliary state at the start of integration.
    fn aux_init(&self) -> Vec<f64> {
        Vec::new()
    }
    fn aux_rhs(&self, _t: f64, _aux: &[f64], _out: &mut [f64]) {}
    fn b(&self, t: f64, aux: &[f64]) -> Mat;
}

#[derive(Debug, Clone)]
pub struct ConstantCoeff(pub Mat);

impl Coefficient for ConstantCoeff {
    fn half_dim(&self) -> usize {
        self.0.nrows() / 2
    }
    fn b(&self, _t: f64, _aux: &[f64]) -> Mat {
        self.0.clone()
    }
}

/// Coefficient given by a closure.
pub struct FnCoeff<F> {
    k: usize,
    f: F,
}

impl<F: Fn(f64) -> Mat + Send + Sync> FnCoeff<F> {
    pub fn new(k: usize, f: F) -> Self {
        Self { k, f }
    }
}

impl<F: Fn(f64) -> Mat + Send + Sync> Coefficient for FnCoeff<F> {
    fn half_dim(&self) -> usize {
        self.k
    }
    fn b(&self, t: f64, _aux: &[f64]) -> Mat {
        (self.f)(t)
    }
}

/// The essential system in true anomaly.
#[derive(Debug, Clone)]
pub struct EssentialCoeff {
    pub cfg: CentralConfig,
    pub e: f64,
}

impl Coefficient for EssentialCoeff {
    fn half_dim(&self) -> usize {
        self.cfg.k()
    }
    fn b(&self, t: f64, _aux: &[f64]) -> Mat {
        models::essential_b_unchecked(t, &self.cfg, self.e)
    }
}

/// The blown-up system along a bounded orbit; the auxiliary state is
/// `(q, Q, t)` with `t' = q` recovering the true anomaly.
#[derive(Debug, Clone)]
pub struct BlowUpOrbitCoeff {
    pub cfg: CentralConfig,
    pub start: BlowUpPoint,
    pub t_start: f64,
}

impl Coefficient for BlowUpOrbitCoeff {
    fn half_dim(&self) -> usize {
        self.cfg.k()
    }
    fn aux_dim(&self) -> usize {
        3
    }
    fn aux_init(&self) -> Vec<f64> {
        vec![self.start.q, self.start.big_q, self.t_start]
    }
    fn aux_rhs(&self, _t: f64, aux: &[f64], out: &mut [f64]) {
        let (dq, dbq) = models::blowup_rhs(BlowUpPoint::new(aux[0], aux[1]));
        out[0] = dq;
        out[1] = dbq;
        out[2] = aux[0];
    }
    fn b(&self, _t: f64, aux: &[f64]) -> Mat {
        models::hat_b(BlowUpPoint::new(aux[0], aux[1]), &self.cfg)
    }
}

/// The blown-up system along `l₀` or `l₊` (explicit heteroclinics).
#[derive(Debug, Clone)]
pub struct HeteroclinicCoeff {
    pub cfg: CentralConfig,
    pub side: HeteroclinicSide,
}

impl Coefficient for HeteroclinicCoeff {
    fn half_dim(&self) -> usize {
        self.cfg.k()
    }
    fn b(&self, t: f64, _aux: &[f64]) -> Mat {
        models::hat_b(models::heteroclinic(self.side, t), &self.cfg)
    }
}

/// `T · diag(0, B) · Tᵀ`: the flow of `Gr(γ(t))` in the doubled space,
/// written in standard coordinates of `ℝ^{4k}`.
pub struct DoubledCoeff {
    inner: Arc<dyn Coefficient>,
    t: Mat,
}

impl DoubledCoeff {
    pub fn new(inner: Arc<dyn Coefficient>) -> Self {
        let t = doubled_to_standard(inner.half_dim());
        Self { inner, t }
    }
}

impl Coefficient for DoubledCoeff {
    fn half_dim(&self) -> usize {
        2 * self.inner.half_dim()
    }
    fn aux_dim(&self) -> usize {
        self.inner.aux_dim()
    }
    fn aux_init(&self) -> Vec<f64> {
        self.inner.aux_init()
    }
    fn aux_rhs(&self, t: f64, aux: &[f64], out: &mut [f64]) {
        self.inner.aux_rhs(t, aux, out)
    }
    fn b(&self, t: f64, aux: &[f64]) -> Mat {
        let n = 2 * self.inner.half_dim();
        let mut d = Mat::zeros(2 * n, 2 * n);
        d.view_mut((n, n), (n, n)).copy_from(&self.inner.b(t, aux));
        &self.t * d * self.t.transpose()
    }
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4)

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output (Hairer's contd5)
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone)]
struct Step {
    t: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

/// Piecewise quartic dense output over accepted steps.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    steps: Vec<Step>,
    t0: f64,
    t1: f64,
    y_end: Vec<f64>,
    dim: usize,
}

impl DenseSolution {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    /// Step boundaries in integration order, `t0` first and `t1` last.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.steps.iter().map(|s| s.t).collect();
        k.push(self.t1);
        k
    }

    /// State at the end, after any post-step modification.
    pub fn end_state(&self) -> &[f64] {
        &self.y_end
    }

    fn locate(&self, t: f64) -> usize {
        let fwd = self.t1 >= self.t0;
        let key = |s: &Step| if fwd { s.t } else { -s.t };
        let tt = if fwd { t } else { -t };
        let idx = self.steps.partition_point(|s| key(s) <= tt);
        idx.saturating_sub(1).min(self.steps.len().saturating_sub(1))
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        if self.steps.is_empty() {
            return self.y_end.clone();
        }
        if t == self.t1 {
            return self.y_end.clone();
        }
        let s = &self.steps[self.locate(t)];
        let th = ((t - s.t) / s.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        (0..self.dim)
            .map(|i| {
                s.r[0][i]
                    + th * (s.r[1][i]
                        + th1 * (s.r[2][i] + th * (s.r[3][i] + th1 * s.r[4][i])))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub tol: Tolerances,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), h_init: None, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: Tolerances) -> Self {
        Self { tol, ..Self::default() }
    }
}

fn err_norm(y0: &[f64], y1: &[f64], e: &[f64], tol: Tolerances) -> f64 {
    let n = y0.len() as f64;
    let s: f64 = y0
        .iter()
        .zip(y1)
        .zip(e)
        .map(|((a, b), d)| {
            let sc = tol.abs + tol.rel * a.abs().max(b.abs());
            (d / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `post` runs after every accepted step and may modify the state (frame
/// re-orthonormalization, symplectic correction); it returns `true` when it
/// did. `stop` ends integration early after a step for which it holds.
pub fn dopri5<F, P, S>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: IntegratorOptions,
    mut post: P,
    mut stop: S,
) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(f64, &mut [f64]) -> bool,
    S: FnMut(f64, &[f64]) -> bool,
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut steps = Vec::new();
    let mut y = y0.to_vec();
    let mut t = t0;
    if span == 0.0 {
        return Ok(DenseSolution { steps, t0, t1, y_end: y, dim: n });
    }
    let tol = opts.tol;
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut yt = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut ev = vec![0.0; n];
    f(t, &y, &mut k1);

    let mut h = match opts.h_init {
        Some(h) => h.abs().min(span),
        None => {
            let d0 = err_norm(&y, &y, &y, Tolerances { abs: tol.abs, rel: tol.rel });
            let d1 = err_norm(&y, &y, &k1, tol);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            h0.min(span).min(opts.h_max).max(1e-12 * span)
        }
    };
    let mut reject_streak = false;
    let mut count = 0usize;
    loop {
        count += 1;
        if count > opts.max_steps {
            return Err(Error::Convergence(format!(
                "step budget exhausted at t = {t} ({} steps)",
                opts.max_steps
            )));
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hmin = 1e-14 * t.abs().max(1.0);
        if h < hmin && !last {
            return Err(Error::Stiffness { t, h });
        }
        let hs = dir * h;
        for i in 0..n {
            yt[i] = y[i] + hs * A21 * k1[i];
        }
        f(t + C2 * hs, &yt, &mut k2);
        for i in 0..n {
            yt[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * hs, &yt, &mut k3);
        for i in 0..n {
            yt[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * hs, &yt, &mut k4);
        for i in 0..n {
            yt[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * hs, &yt, &mut k5);
        for i in 0..n {
            yt[i] = y[i]
                + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let tn = if last { t1 } else { t + hs };
        f(tn, &yt, &mut k6);
        for i in 0..n {
            y1[i] = y[i]
                + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(tn, &y1, &mut k7);
        for i in 0..n {
            ev[i] = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = err_norm(&y, &y1, &ev, tol);
        if !err.is_finite() {
            h *= 0.1;
            reject_streak = true;
            continue;
        }
        if err <= 1.0 {
            let mut r0 = y.clone();
            let mut r1 = vec![0.0; n];
            let mut r2 = vec![0.0; n];
            let mut r3 = vec![0.0; n];
            let mut r4 = vec![0.0; n];
            for i in 0..n {
                r1[i] = y1[i] - y[i];
                r2[i] = hs * k1[i] - r1[i];
                r3[i] = r1[i] - hs * k7[i] - r2[i];
                r4[i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            std::mem::swap(&mut r0, &mut y);
            steps.push(Step { t, h: hs, r: [r0, r1, r2, r3, r4] });
            y.copy_from_slice(&y1);
            t = tn;
            if post(t, &mut y) {
                f(t, &y, &mut k1);
            } else {
                k1.copy_from_slice(&k7);
            }
            if last || stop(t, &y) {
                let t_end = t;
                return Ok(DenseSolution { steps, t0, t1: t_end, y_end: y, dim: n });
            }
            let fac = 0.9 * err.max(1e-10).powf(-0.2);
            let fac = if reject_streak { fac.min(1.0) } else { fac.min(5.0) };
            h = (h * fac.max(0.2)).min(opts.h_max);
            reject_streak = false;
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.1);
            h *= fac;
            reject_streak = true;
        }
    }
}

/// Right-hand side `(vec(J B Z), aux')` for a matrix state `Z` with `m`
/// columns stored column-major.
fn matrix_rhs<'a>(
    coef: &'a dyn Coefficient,
    m: usize,
) -> impl FnMut(f64, &[f64], &mut [f64]) + 'a {
    let n = 2 * coef.half_dim();
    let j = j_matrix(coef.half_dim());
    move |t, y, dy| {
        let nz = n * m;
        let aux = &y[nz..];
        let jb = &j * coef.b(t, aux);
        let z = Mat::from_column_slice(n, m, &y[..nz]);
        let d = jb * z;
        dy[..nz].copy_from_slice(d.as_slice());
        if !aux.is_empty() {
            coef.aux_rhs(t, aux, &mut dy[nz..]);
        }
    }
}

fn initial_state(coef: &dyn Coefficient, z0: &Mat) -> Vec<f64> {
    let mut y = z0.as_slice().to_vec();
    let aux = coef.aux_init();
    debug_assert_eq!(aux.len(), coef.aux_dim());
    y.extend(aux);
    y
}

// ---------------------------------------------------------------------------
// Fundamental solutions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    TrueAnomaly,
    BlowupTau,
    Other,
}

/// Sampled fundamental solution `γ(t)` with `γ(t₀) = I`.
#[derive(Clone)]
pub struct FundamentalPath {
    coef: Arc<dyn Coefficient>,
    sol: DenseSolution,
    k: usize,
    pub domain: Domain,
    pub tol: Tolerances,
    /// Largest symplecticity residual of an accepted state after correction.
    pub drift: f64,
    /// Largest residual relative to `‖γ‖²`.
    pub rel_drift: f64,
}

impl std::fmt::Debug for FundamentalPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FundamentalPath")
            .field("k", &self.k)
            .field("t0", &self.sol.t0)
            .field("t1", &self.sol.t1)
            .field("steps", &self.sol.n_steps())
            .field("domain", &self.domain)
            .field("drift", &self.drift)
            .finish()
    }
}

impl FundamentalPath {
    pub fn half_dim(&self) -> usize {
        self.k
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.sol.t0, self.sol.t1)
    }

    pub fn coefficient(&self) -> Arc<dyn Coefficient> {
        self.coef.clone()
    }

    pub fn knots(&self) -> Vec<f64> {
        self.sol.knots()
    }

    pub fn at(&self, t: f64) -> Mat {
        let n = 2 * self.k;
        Mat::from_column_slice(n, n, &self.sol.eval(t)[..n * n])
    }

    pub fn end(&self) -> Mat {
        let n = 2 * self.k;
        Mat::from_column_slice(n, n, &self.sol.end_state()[..n * n])
    }

    pub fn aux_at(&self, t: f64) -> Vec<f64> {
        let n = 2 * self.k;
        self.sol.eval(t)[n * n..].to_vec()
    }

    pub fn b_at(&self, t: f64) -> Mat {
        self.coef.b(t, &self.aux_at(t))
    }

    /// `(t, γ(t))` at the accepted steps.
    pub fn samples(&self) -> Vec<(f64, Mat)> {
        self.knots().into_iter().map(|t| (t, self.at(t))).collect()
    }

    pub fn monodromy(&self) -> Result<SymplecticMatrix> {
        SymplecticMatrix::with_tol(self.end(), 1e-6)
    }
}

pub fn integrate_fundamental(
    coef: Arc<dyn Coefficient>,
    t0: f64,
    t1: f64,
    tol: Tolerances,
) -> Result<FundamentalPath> {
    integrate_fundamental_tagged(coef, t0, t1, tol, Domain::Other)
}

fn integrate_fundamental_tagged(
    coef: Arc<dyn Coefficient>,
    t0: f64,
    t1: f64,
    tol: Tolerances,
    domain: Domain,
) -> Result<FundamentalPath> {
    let k = coef.half_dim();
    let n = 2 * k;
    let y0 = initial_state(coef.as_ref(), &Mat::identity(n, n));
    let mut drift = 0.0f64;
    let mut rel_drift = 0.0f64;
    let sol = dopri5(
        matrix_rhs(coef.as_ref(), n),
        t0,
        t1,
        &y0,
        IntegratorOptions::with_tol(tol),
        |_, y| {
            let mut g = Mat::from_column_slice(n, n, &y[..n * n]);
            let scale = g.norm_squared().max(1.0);
            let res = symplectic_residual(&g);
            let mut changed = false;
            // the first-order projection only contracts while ‖E‖ < 1
            let after = if res > RENORM_THRESHOLD && res < 0.1 {
                symplectic_correct(&mut g);
                y[..n * n].copy_from_slice(g.as_slice());
                changed = true;
                symplectic_residual(&g)
            } else {
                res
            };
            drift = drift.max(after);
            rel_drift = rel_drift.max(after / scale);
            changed
        },
        |_, _| false,
    )?;
    Ok(FundamentalPath { coef, sol, k, domain, tol, drift, rel_drift })
}

/// A Lagrangian frame transported by the flow and re-orthonormalized after
/// every accepted step.
#[derive(Clone)]
pub struct FrameTrajectory {
    coef: Arc<dyn Coefficient>,
    sol: DenseSolution,
    k: usize,
}

impl std::fmt::Debug for FrameTrajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrameTrajectory")
            .field("k", &self.k)
            .field("t0", &self.sol.t0)
            .field("t1", &self.sol.t1)
            .field("steps", &self.sol.n_steps())
            .finish()
    }
}

impl FrameTrajectory {
    pub fn half_dim(&self) -> usize {
        self.k
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.sol.t0, self.sol.t1)
    }

    pub fn knots(&self) -> Vec<f64> {
        self.sol.knots()
    }

    pub fn raw(&self, t: f64) -> Mat {
        let n = 2 * self.k;
        Mat::from_column_slice(n, self.k, &self.sol.eval(t)[..n * self.k])
    }

    pub fn frame(&self, t: f64) -> LagrangianFrame {
        LagrangianFrame::from_orthonormal(orthonormalize(&self.raw(t)))
    }

    pub fn end_frame(&self) -> LagrangianFrame {
        let n = 2 * self.k;
        let z = Mat::from_column_slice(n, self.k, &self.sol.end_state()[..n * self.k]);
        LagrangianFrame::from_orthonormal(orthonormalize(&z))
    }

    pub fn b_at(&self, t: f64) -> Mat {
        let n = 2 * self.k;
        let y = self.sol.eval(t);
        self.coef.b(t, &y[n * self.k..])
    }
}

pub fn transport_frame(
    coef: Arc<dyn Coefficient>,
    z0: &LagrangianFrame,
    t0: f64,
    t1: f64,
    tol: Tolerances,
) -> Result<FrameTrajectory> {
    let k = coef.half_dim();
    if z0.half_dim() != k {
        return Err(Error::MalformedInput("frame and coefficient dimensions differ".into()));
    }
    let n = 2 * k;
    let y0 = initial_state(coef.as_ref(), z0.columns());
    let sol = dopri5(
        matrix_rhs(coef.as_ref(), k),
        t0,
        t1,
        &y0,
        IntegratorOptions::with_tol(tol),
        |_, y| {
            let z = Mat::from_column_slice(n, k, &y[..n * k]);
            let q = orthonormalize(&z);
            y[..n * k].copy_from_slice(q.as_slice());
            true
        },
        |_, _| false,
    )?;
    Ok(FrameTrajectory { coef, sol, k })
}

// ---------------------------------------------------------------------------
// Monodromy and spectra

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Hyperbolic,
    Elliptic,
    EllipticHyperbolic,
    SpectrallyStableDegenerate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Hyperbolic => "hyperbolic",
            Classification::Elliptic => "elliptic",
            Classification::EllipticHyperbolic => "elliptic_hyperbolic",
            Classification::SpectrallyStableDegenerate => "spectrally_stable_degenerate",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unit-circle tolerance band.
pub const UNIT_BAND: f64 = 1e-7;
/// Radius within which eigenvalues near ±1 are treated as one cluster.
pub const CLUSTER_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonodromyReport {
    #[serde(skip)]
    pub m: Mat,
    pub eigenvalues: Vec<(f64, f64)>,
    pub classification: Classification,
    /// Labels compatible with an ambiguous (clustered) spectrum.
    pub candidates: Vec<Classification>,
    /// `(tr₁, tr₂)` for 4×4 monodromies when both are real.
    pub traces: Option<(f64, f64)>,
    pub det_minus_i: f64,
    pub det_plus_i: f64,
}

impl MonodromyReport {
    pub fn eigenvalues_c(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|&(a, b)| Complex64::new(a, b)).collect()
    }
}

pub fn classify(m: &SymplecticMatrix) -> MonodromyReport {
    classify_matrix(m.matrix())
}

pub(crate) fn classify_matrix(m: &Mat) -> MonodromyReport {
    let n = m.nrows();
    let ev: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    let mut on = 0usize;
    let mut off = 0usize;
    let mut clustered = false;
    for (i, l) in ev.iter().enumerate() {
        let near_pm1 = [1.0, -1.0]
            .iter()
            .any(|&s| (l - Complex64::new(s, 0.0)).norm() < CLUSTER_RADIUS.sqrt());
        let partner = ev
            .iter()
            .enumerate()
            .any(|(j, o)| j != i && (o - l).norm() < CLUSTER_RADIUS.sqrt());
        if near_pm1 && partner {
            clustered = true;
            on += 1;
        } else if (l.norm() - 1.0).abs() < UNIT_BAND {
            on += 1;
        } else {
            off += 1;
        }
    }
    let base = if off == 0 {
        Classification::Elliptic
    } else if on == 0 {
        Classification::Hyperbolic
    } else {
        Classification::EllipticHyperbolic
    };
    let (classification, candidates) = if clustered {
        let alt = if off == 0 { Classification::EllipticHyperbolic } else { base };
        (Classification::SpectrallyStableDegenerate, vec![Classification::Elliptic, alt])
    } else {
        (base, vec![base])
    };
    let traces = if n == 4 {
        let a = m.trace();
        let b = 0.5 * (a * a - (m * m).trace());
        let disc = a * a - 4.0 * (b - 2.0);
        (disc >= 0.0).then(|| {
            let s = disc.sqrt();
            (0.5 * (a - s), 0.5 * (a + s))
        })
    } else {
        None
    };
    let id = Mat::identity(n, n);
    MonodromyReport {
        m: m.clone(),
        eigenvalues: ev.iter().map(|c| (c.re, c.im)).collect(),
        classification,
        candidates,
        traces,
        det_minus_i: (m - &id).determinant().abs(),
        det_plus_i: (m + &id).determinant().abs(),
    }
}

/// `γ_e` over one period in true anomaly, starting at `t_start`.
pub fn fundamental_true_anomaly(
    cfg: &CentralConfig,
    e: f64,
    t_start: f64,
    tol: Tolerances,
) -> Result<FundamentalPath> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!("eccentricity {e} outside [0, 1)")));
    }
    let coef: Arc<dyn Coefficient> = Arc::new(EssentialCoeff { cfg: cfg.clone(), e });
    integrate_fundamental_tagged(coef, t_start, t_start + 2.0 * PI, tol, Domain::TrueAnomaly)
}

pub fn monodromy_true_anomaly(
    cfg: &CentralConfig,
    e: f64,
) -> Result<(MonodromyReport, FundamentalPath)> {
    let path = fundamental_true_anomaly(cfg, e, 0.0, Tolerances::default())?;
    Ok((classify_matrix(&path.end()), path))
}

/// Result of integrating the blow-up system over one period.
#[derive(Debug, Clone)]
pub struct BlowUpFlow {
    pub path: FundamentalPath,
    /// `𝒯`, the blow-up time of one revolution.
    pub period: f64,
    /// `max |E(τ) + ê|` along the orbit.
    pub energy_drift: f64,
}

/// Finds the blow-up time at which the true anomaly has advanced by `2π`
/// from `start`, localized on the dense output to `1e-12`.
pub fn blowup_period(start: BlowUpPoint, tol: Tolerances) -> Result<(f64, f64)> {
    let e_target = start.energy();
    let y0 = [start.q, start.big_q, 0.0];
    let sol = dopri5(
        |_, y, dy| {
            let (a, b) = models::blowup_rhs(BlowUpPoint::new(y[0], y[1]));
            dy[0] = a;
            dy[1] = b;
            dy[2] = y[0];
        },
        0.0,
        1e9,
        &y0,
        IntegratorOptions::with_tol(tol.scaled(0.01)),
        |_, _| false,
        |_, y| y[2] >= 2.0 * PI,
    )?;
    if sol.end_state()[2] < 2.0 * PI {
        return Err(Error::Convergence("true anomaly did not complete a revolution".into()));
    }
    let knots = sol.knots();
    let mut lo = knots[knots.len() - 2];
    let mut hi = sol.t1();
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if sol.eval(mid)[2] < 2.0 * PI {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    let mut drift = 0.0f64;
    for t in knots {
        let y = sol.eval(t);
        drift = drift.max((BlowUpPoint::new(y[0], y[1]).energy() - e_target).abs());
    }
    Ok((0.5 * (lo + hi), drift))
}

/// `γ̂_e` over one period in blow-up time, starting from the orbit point
/// at true anomaly `t_start` (`0` or `π`).
pub fn blowup_flow_from(
    cfg: &CentralConfig,
    e: f64,
    t_start: f64,
    tol: Tolerances,
) -> Result<BlowUpFlow> {
    let start = models::orbit_point(e, t_start)?;
    let (period, energy_drift) = blowup_period(start, tol)?;
    let coef: Arc<dyn Coefficient> =
        Arc::new(BlowUpOrbitCoeff { cfg: cfg.clone(), start, t_start });
    let path = integrate_fundamental_tagged(coef, 0.0, period, tol, Domain::BlowupTau)?;
    Ok(BlowUpFlow { path, period, energy_drift })
}

pub fn blowup_flow(cfg: &CentralConfig, e: f64) -> Result<BlowUpFlow> {
    blowup_flow_from(cfg, e, 0.0, Tolerances::default())
}
