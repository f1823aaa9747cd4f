//! Maslov index of Lagrangian paths.
//!
//! Counting works on the relative unitary `M(t) = G Gᵀ` with
//! `G = U_W^* U_Z` (`U = X + iY` for orthonormal frames), whose eigenvalue
//! `1` has multiplicity `dim(Λ(t) ∩ W)`. Eigen-angles are counted against
//! the level `η` slightly above zero, which realizes the endpoint
//! convention "`m⁺` at the start, `−m⁻` at the end" and treats tangential
//! or persistent intersections without special cases. Between samples the
//! count is trusted only when the chord `‖M₁ − M₀‖` is small compared with
//! the spectral gap around a reference angle `β`; otherwise the interval is
//! bisected.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use nalgebra::linalg::Schur;
use nalgebra::Complex;

type Complex64 = Complex<f64>;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{
    transport_frame, Coefficient, DoubledCoeff, FrameTrajectory, FundamentalPath, Tolerances,
};
use crate::symplectic::{
    doubled_to_standard, intersection_dim, j_matrix, orthonormalize, rotation, unitary_of, CMat,
    LagrangianFrame, Mat,
};

/// A path of Lagrangian subspaces `t ↦ Λ(t)`.
pub trait LagrangianPath {
    fn half_dim(&self) -> usize;
    fn interval(&self) -> (f64, f64);
    /// Sample grid, increasing, containing both endpoints.
    fn knots(&self) -> Vec<f64>;
    /// Orthonormal frame of `Λ(t)`.
    fn frame_at(&self, t: f64) -> Mat;
    /// `(Z(t), B(t))` when the path is generated by `Z' = J B Z`.
    fn coefficient_at(&self, _t: f64) -> Option<Mat> {
        None
    }
    /// Whether a finite-difference derivative may stand in for `B`.
    fn finite_differences(&self) -> bool {
        true
    }
}

impl LagrangianPath for FrameTrajectory {
    fn half_dim(&self) -> usize {
        FrameTrajectory::half_dim(self)
    }
    fn interval(&self) -> (f64, f64) {
        let (a, b) = FrameTrajectory::interval(self);
        (a.min(b), a.max(b))
    }
    fn knots(&self) -> Vec<f64> {
        let mut k = FrameTrajectory::knots(self);
        if k.len() > 1 && k[0] > k[k.len() - 1] {
            k.reverse();
        }
        k
    }
    fn frame_at(&self, t: f64) -> Mat {
        self.frame(t).columns().clone()
    }
    fn coefficient_at(&self, t: f64) -> Option<Mat> {
        Some(self.b_at(t))
    }
}

/// A path given by a frame-valued closure on a grid.
pub struct FnPath<F> {
    k: usize,
    knots: Vec<f64>,
    f: F,
    fd: bool,
}

impl<F: Fn(f64) -> Mat> FnPath<F> {
    /// `knots` must be increasing; derivative data come from finite
    /// differences.
    pub fn new(k: usize, knots: Vec<f64>, f: F) -> Self {
        Self { k, knots, f, fd: true }
    }

    pub fn uniform(k: usize, a: f64, b: f64, n: usize, f: F) -> Self {
        let knots = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        Self::new(k, knots, f)
    }

    /// Same path, but crossing forms are unavailable.
    pub fn without_derivative(mut self) -> Self {
        self.fd = false;
        self
    }
}

impl<F: Fn(f64) -> Mat> LagrangianPath for FnPath<F> {
    fn half_dim(&self) -> usize {
        self.k
    }
    fn interval(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }
    fn knots(&self) -> Vec<f64> {
        self.knots.clone()
    }
    fn frame_at(&self, t: f64) -> Mat {
        orthonormalize(&(self.f)(t))
    }
    fn finite_differences(&self) -> bool {
        self.fd
    }
}

/// Restriction of a path to a subinterval.
pub struct SubPath<'a, P: ?Sized> {
    inner: &'a P,
    a: f64,
    b: f64,
}

impl<'a, P: LagrangianPath + ?Sized> SubPath<'a, P> {
    pub fn new(inner: &'a P, a: f64, b: f64) -> Self {
        Self { inner, a, b }
    }
}

impl<P: LagrangianPath + ?Sized> LagrangianPath for SubPath<'_, P> {
    fn half_dim(&self) -> usize {
        self.inner.half_dim()
    }
    fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }
    fn knots(&self) -> Vec<f64> {
        let mut k = vec![self.a];
        k.extend(self.inner.knots().into_iter().filter(|&t| t > self.a && t < self.b));
        k.push(self.b);
        k
    }
    fn frame_at(&self, t: f64) -> Mat {
        self.inner.frame_at(t)
    }
    fn coefficient_at(&self, t: f64) -> Option<Mat> {
        self.inner.coefficient_at(t)
    }
    fn finite_differences(&self) -> bool {
        self.inner.finite_differences()
    }
}

// ---------------------------------------------------------------------------
// Records

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub time: f64,
    pub kernel_dim: usize,
    pub signature: i64,
    pub m_plus: usize,
    pub m_minus: usize,
    pub regular: bool,
    /// Change of the index attributed to this crossing.
    pub contribution: i64,
    pub endpoint: Option<Endpoint>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub segments: usize,
    pub evaluations: usize,
    pub irregular: usize,
    /// An irregular crossing remained after the level shift.
    pub flagged: bool,
    pub converged: Option<bool>,
    pub final_gap: Option<f64>,
    pub t_max: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub index: i64,
    pub crossings: Vec<CrossingRecord>,
    pub endpoint_contributions: (i64, i64),
    pub diagnostics: Diagnostics,
}

impl IndexReport {
    /// Recomputes the index from the crossing records.
    pub fn recombined(&self) -> i64 {
        self.crossings.iter().map(|c| c.contribution).sum()
    }
}

/// The crossing form on `Λ(t) ∩ W`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingForm {
    pub matrix: Mat,
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    pub m_plus: usize,
    pub m_minus: usize,
    pub regular: bool,
}

impl CrossingForm {
    pub fn signature(&self) -> i64 {
        self.m_plus as i64 - self.m_minus as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOptions {
    /// Level shift of the eigen-angles.
    pub eta: f64,
    /// Largest chord `‖M₁ − M₀‖` accepted without bisection.
    pub chord_max: f64,
    /// Crossing localization width relative to the interval length.
    pub t_tol_rel: f64,
    /// Singular-value threshold for the kernel of `WᵀJZ`.
    pub kernel_tol: f64,
    pub max_depth: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self { eta: 1e-6, chord_max: 0.4, t_tol_rel: 1e-10, kernel_tol: 1e-5, max_depth: 60 }
    }
}

// ---------------------------------------------------------------------------
// Spectral machinery

/// Eigenvalues of a complex square matrix via the complex Schur form.
pub fn complex_eigenvalues(m: &CMat) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

fn angles(m: &CMat, eta: f64) -> Vec<f64> {
    let rot = Complex64::from_polar(1.0, -eta);
    complex_eigenvalues(m).into_iter().map(|l| (l * rot).arg()).collect()
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn count_below(angles: &[f64], beta: f64) -> i64 {
    angles.iter().filter(|&&a| a > 0.0 && a < beta).count() as i64
}

struct Sample {
    m: CMat,
    ang: Vec<f64>,
}

struct Counter<'a, P: LagrangianPath + ?Sized> {
    path: &'a P,
    uw_h: CMat,
    opts: CountOptions,
    cache: HashMap<u64, Arc<Sample>>,
    evaluations: usize,
    segments: usize,
    ttol: f64,
}

impl<'a, P: LagrangianPath + ?Sized> Counter<'a, P> {
    fn sample(&mut self, t: f64) -> Arc<Sample> {
        if let Some(s) = self.cache.get(&t.to_bits()) {
            return s.clone();
        }
        self.evaluations += 1;
        let z = self.path.frame_at(t);
        let g = &self.uw_h * unitary_of(&z);
        let m = &g * g.transpose();
        let ang = angles(&m, self.opts.eta);
        let s = Arc::new(Sample { m, ang });
        self.cache.insert(t.to_bits(), s.clone());
        s
    }

    /// Reference angle maximizing the distance to both spectra.
    fn beta(s0: &Sample, s1: &Sample) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, FRAC_PI_2);
        for i in 0..=32 {
            let b = FRAC_PI_4 + FRAC_PI_2 * i as f64 / 32.0;
            let g = s0
                .ang
                .iter()
                .chain(s1.ang.iter())
                .map(|&a| circ_dist(a, b))
                .fold(f64::INFINITY, f64::min);
            if g > best.0 {
                best = (g, b);
            }
        }
        best
    }

    /// Counts over `[a, b]`, pushing localized crossings.
    fn segment(&mut self, a: f64, b: f64, depth: usize, out: &mut Vec<(f64, i64)>) -> i64 {
        let s0 = self.sample(a);
        let s1 = self.sample(b);
        let d = (&s1.m - &s0.m).norm();
        let (gap, beta) = Self::beta(&s0, &s1);
        let ok = d < self.opts.chord_max && 2.0 * (d.min(2.0) / 2.0).asin() < gap;
        if !ok && depth < self.opts.max_depth && (b - a) > self.ttol * 1e-3 {
            let m = 0.5 * (a + b);
            return self.segment(a, m, depth + 1, out) + self.segment(m, b, depth + 1, out);
        }
        self.segments += 1;
        let n0 = count_below(&s0.ang, beta);
        let n1 = count_below(&s1.ang, beta);
        if n1 != n0 {
            self.localize(a, n0, b, n1, beta, out);
        }
        n1 - n0
    }

    fn localize(&mut self, a: f64, na: i64, b: f64, nb: i64, beta: f64, out: &mut Vec<(f64, i64)>) {
        if b - a <= self.ttol {
            out.push((0.5 * (a + b), nb - na));
            return;
        }
        let m = 0.5 * (a + b);
        let nm = count_below(&self.sample(m).ang, beta);
        if nm != na {
            self.localize(a, na, m, nm, beta, out);
        }
        if nb != nm {
            self.localize(m, nm, b, nb, beta, out);
        }
    }
}

fn kernel_basis(w: &Mat, z: &Mat, tol: f64) -> Mat {
    let k = z.ncols();
    let p = w.transpose() * j_matrix(k) * z;
    let svd = p.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let cols: Vec<_> = (0..k)
        .filter(|&i| svd.singular_values[i] < tol)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        Mat::zeros(k, 0)
    } else {
        Mat::from_columns(&cols)
    }
}

fn form_on_kernel<P: LagrangianPath + ?Sized>(
    path: &P,
    w: &Mat,
    t: f64,
    kernel_tol: f64,
) -> Result<CrossingForm> {
    let z = path.frame_at(t);
    let kb = kernel_basis(w, &z, kernel_tol);
    let dim = kb.ncols();
    if dim == 0 {
        return Err(Error::NoCrossing(t));
    }
    let (q, tol) = if let Some(b) = path.coefficient_at(t) {
        (z.transpose() * &b * &z, 1e-8 * b.norm().max(1.0))
    } else if path.finite_differences() {
        let (lo, hi) = path.interval();
        let h = 1e-6 * (hi - lo).abs().max(1e-3);
        let ta = (t - h).max(lo);
        let tb = (t + h).min(hi);
        // align frames at ta/tb to z so the difference quotient is smooth
        let align = |zz: Mat| -> Mat {
            let o = zz.transpose() * &z;
            let svd = o.svd(true, true);
            let r = svd.u.unwrap() * svd.v_t.unwrap();
            zz * r
        };
        let za = align(path.frame_at(ta));
        let zb = align(path.frame_at(tb));
        let zd = (zb - za) / (tb - ta);
        let q = -(z.transpose() * j_matrix(z.ncols()) * zd);
        (0.5 * (&q + q.transpose()), 1e-5 * q.norm().max(1.0))
    } else {
        return Err(Error::Configuration(
            "crossing form needs a coefficient path or finite differences".into(),
        ));
    };
    let form = kb.transpose() * q * &kb;
    let form = 0.5 * (&form + form.transpose());
    let ev: Vec<f64> = form.symmetric_eigenvalues().iter().copied().collect();
    let m_plus = ev.iter().filter(|&&v| v > tol).count();
    let m_minus = ev.iter().filter(|&&v| v < -tol).count();
    Ok(CrossingForm {
        matrix: form,
        regular: m_plus + m_minus == dim,
        eigenvalues: ev,
        kernel_dim: dim,
        m_plus,
        m_minus,
    })
}

/// Crossing form `Q(v) = −⟨J Ż v, Z v⟩` restricted to `Z(t)⁻¹(Λ(t) ∩ W)`.
pub fn crossing_form<P: LagrangianPath + ?Sized>(
    path: &P,
    w: &LagrangianFrame,
    t: f64,
) -> Result<CrossingForm> {
    form_on_kernel(path, w.columns(), t, CountOptions::default().kernel_tol)
}

pub fn maslov_index<P: LagrangianPath + ?Sized>(path: &P, w: &LagrangianFrame) -> Result<IndexReport> {
    maslov_index_with(path, w, CountOptions::default())
}

pub fn maslov_index_with<P: LagrangianPath + ?Sized>(
    path: &P,
    w: &LagrangianFrame,
    opts: CountOptions,
) -> Result<IndexReport> {
    if w.half_dim() != path.half_dim() {
        return Err(Error::MalformedInput("path and reference dimensions differ".into()));
    }
    let (a, b) = path.interval();
    let knots = path.knots();
    let mut c = Counter {
        path,
        uw_h: w.unitary().adjoint(),
        opts,
        cache: HashMap::new(),
        evaluations: 0,
        segments: 0,
        ttol: opts.t_tol_rel * (b - a).abs().max(1e-300),
    };
    let mut raw = Vec::new();
    let mut index = 0i64;
    for win in knots.windows(2) {
        if win[1] > win[0] {
            index += c.segment(win[0], win[1], 0, &mut raw);
        }
    }
    let wz = w.columns();
    let first_end = knots.get(1).copied().unwrap_or(b);
    let last_start = knots.get(knots.len().saturating_sub(2)).copied().unwrap_or(a);
    let dim_a = kernel_basis(wz, &path.frame_at(a), opts.kernel_tol).ncols();
    let dim_b = kernel_basis(wz, &path.frame_at(b), opts.kernel_tol).ncols();
    let mut crossings = Vec::with_capacity(raw.len());
    let mut diag = Diagnostics::default();
    for (t, contribution) in raw {
        let endpoint = if dim_a > 0 && t <= first_end {
            Some(Endpoint::Start)
        } else if dim_b > 0 && t >= last_start {
            Some(Endpoint::End)
        } else {
            None
        };
        let at = match endpoint {
            Some(Endpoint::Start) => a,
            Some(Endpoint::End) => b,
            None => t,
        };
        let rec = match form_on_kernel(path, wz, at, opts.kernel_tol) {
            Ok(f) => CrossingRecord {
                time: t,
                kernel_dim: f.kernel_dim,
                signature: f.signature(),
                m_plus: f.m_plus,
                m_minus: f.m_minus,
                regular: f.regular,
                contribution,
                endpoint,
            },
            Err(_) => CrossingRecord {
                time: t,
                kernel_dim: 0,
                signature: contribution,
                m_plus: contribution.max(0) as usize,
                m_minus: (-contribution).max(0) as usize,
                regular: false,
                contribution,
                endpoint,
            },
        };
        if !rec.regular {
            diag.irregular += 1;
            diag.flagged = true;
        }
        crossings.push(rec);
    }
    let start: i64 = crossings
        .iter()
        .filter(|c| c.endpoint == Some(Endpoint::Start))
        .map(|c| c.contribution)
        .sum();
    let end: i64 = crossings
        .iter()
        .filter(|c| c.endpoint == Some(Endpoint::End))
        .map(|c| c.contribution)
        .sum();
    diag.segments = c.segments;
    diag.evaluations = c.evaluations;
    Ok(IndexReport { index, crossings, endpoint_contributions: (start, end), diagnostics: diag })
}

/// The half-integer variant with weight `½ sign` at both endpoints:
/// `μ_RS = μ − ½(m⁺ + m⁻)(a) + ½(m⁺ + m⁻)(b)`.
pub fn maslov_rs<P: LagrangianPath + ?Sized>(path: &P, w: &LagrangianFrame) -> Result<f64> {
    let rep = maslov_index(path, w)?;
    let (a, b) = path.interval();
    let tol = CountOptions::default().kernel_tol;
    let weight = |t: f64| match form_on_kernel(path, w.columns(), t, tol) {
        Ok(f) => (f.m_plus + f.m_minus) as f64,
        Err(_) => 0.0,
    };
    Ok(rep.index as f64 - 0.5 * weight(a) + 0.5 * weight(b))
}

// ---------------------------------------------------------------------------
// Hörmander index

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HormanderMethod {
    Formula,
    Path,
}

/// Largest condition number of the graph representations accepted by the
/// signature formula.
pub const HORMANDER_COND_MAX: f64 = 1e8;

fn n_plus(m: &Mat) -> i64 {
    let scale = m.norm().max(1.0);
    m.symmetric_eigenvalues().iter().filter(|&&v| v > 1e-9 * scale).count() as i64
}

/// Symmetric `A` with `F = Gr(A)` over `V_d` after rotating by `rot`, and
/// the condition number of the `X` block.
fn graph_matrix(f: &LagrangianFrame, rot: &Mat) -> Option<(Mat, f64)> {
    let z = rot * f.columns();
    let k = f.half_dim();
    let x = z.rows(0, k).into_owned();
    let y = z.rows(k, k).into_owned();
    let sv = x.clone().singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond >= HORMANDER_COND_MAX {
        return None;
    }
    let a = y * x.try_inverse()?;
    Some((0.5 * (&a + a.transpose()), cond))
}

/// `s(V₀, V₁; L₀, L₁) = μ(V₀, Λ) − μ(V₁, Λ)` for any path `Λ` from `L₀` to
/// `L₁`, with the method that produced it.
pub fn hormander_index_detailed(
    v0: &LagrangianFrame,
    v1: &LagrangianFrame,
    l0: &LagrangianFrame,
    l1: &LagrangianFrame,
) -> Result<(i64, HormanderMethod)> {
    let k = v0.half_dim();
    for f in [v1, l0, l1] {
        if f.half_dim() != k {
            return Err(Error::MalformedInput("frames of different dimension".into()));
        }
    }
    // pick the rotation making all four subspaces best-conditioned graphs
    let mut best: Option<(f64, Vec<Mat>)> = None;
    for i in 0..48 {
        let th = PI * i as f64 / 48.0 + 0.0123;
        let rot = rotation(k, th);
        let reps: Option<Vec<(Mat, f64)>> =
            [v0, v1, l0, l1].iter().map(|f| graph_matrix(f, &rot)).collect();
        if let Some(reps) = reps {
            let worst = reps.iter().map(|r| r.1).fold(0.0, f64::max);
            if best.as_ref().map_or(true, |b| worst < b.0) {
                best = Some((worst, reps.into_iter().map(|r| r.0).collect()));
            }
        }
    }
    if let Some((_, m)) = best {
        let (a0, a1, b0, b1) = (&m[0], &m[1], &m[2], &m[3]);
        let s = (n_plus(&(b1 - a0)) - n_plus(&(b0 - a0))) - (n_plus(&(b1 - a1)) - n_plus(&(b0 - a1)));
        return Ok((s, HormanderMethod::Formula));
    }
    Ok((hormander_by_path(v0, v1, l0, l1)?, HormanderMethod::Path))
}

pub fn hormander_index(
    v0: &LagrangianFrame,
    v1: &LagrangianFrame,
    l0: &LagrangianFrame,
    l1: &LagrangianFrame,
) -> Result<i64> {
    hormander_index_detailed(v0, v1, l0, l1).map(|r| r.0)
}

/// Unitary geodesic `U(s) = U₀ Q diag(e^{i s θ}) Q^*` from `L₀` to `L₁`.
pub fn unitary_geodesic(l0: &LagrangianFrame, l1: &LagrangianFrame) -> impl Fn(f64) -> Mat {
    let u0 = l0.unitary();
    let d = u0.adjoint() * l1.unitary();
    let (q, t) = Schur::new(d).unpack();
    let k = l0.half_dim();
    let th: Vec<f64> = (0..k).map(|i| t[(i, i)].arg()).collect();
    move |s: f64| {
        let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            k,
            th.iter().map(|&a| Complex64::from_polar(1.0, s * a)),
        ));
        let u = &u0 * &q * diag * q.adjoint();
        let mut z = Mat::zeros(2 * k, k);
        for i in 0..k {
            for j in 0..k {
                z[(i, j)] = u[(i, j)].re;
                z[(k + i, j)] = u[(i, j)].im;
            }
        }
        z
    }
}

/// Path-difference evaluation of the Hörmander index.
pub fn hormander_by_path(
    v0: &LagrangianFrame,
    v1: &LagrangianFrame,
    l0: &LagrangianFrame,
    l1: &LagrangianFrame,
) -> Result<i64> {
    let k = v0.half_dim();
    let path = FnPath::uniform(k, 0.0, 1.0, 64, unitary_geodesic(l0, l1));
    Ok(maslov_index(&path, v0)?.index - maslov_index(&path, v1)?.index)
}

// ---------------------------------------------------------------------------
// Maslov-type indices

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmOneReport {
    pub i1: i64,
    pub im1: i64,
    /// `dim ker(γ(T) − I)`.
    pub nu1: usize,
    /// `dim ker(γ(T) + I)`.
    pub num1: usize,
    pub report1: IndexReport,
    pub report_m1: IndexReport,
}

impl PmOneReport {
    pub fn degenerate(&self) -> bool {
        self.nu1 > 0 || self.num1 > 0
    }
}

/// Threshold for endpoint intersection dimensions of transported frames.
pub const NU_TOL: f64 = 1e-6;

/// `Gr(ω I)` as a frame of the standard `ℝ^{4k}`.
pub fn graph_reference(k: usize, omega: f64) -> LagrangianFrame {
    let n = 2 * k;
    let mut z = Mat::zeros(2 * n, n);
    z.view_mut((0, 0), (n, n)).fill_with_identity();
    z.view_mut((n, 0), (n, n)).fill_with_identity();
    if omega < 0.0 {
        z.view_mut((n, 0), (n, n)).neg_mut();
    }
    LagrangianFrame::from_orthonormal(orthonormalize(&(doubled_to_standard(k) * z)))
}

/// `Gr(γ(t))` transported in the doubled space from the diagonal.
pub fn doubled_graph_path(
    coef: Arc<dyn Coefficient>,
    t0: f64,
    t1: f64,
    tol: Tolerances,
) -> Result<FrameTrajectory> {
    let k = coef.half_dim();
    let dc: Arc<dyn Coefficient> = Arc::new(DoubledCoeff::new(coef));
    transport_frame(dc, &graph_reference(k, 1.0), t0, t1, tol)
}

/// `i₁ = μ(Δ, Gr γ) − k` and `i₋₁ = μ(Gr(−I), Gr γ)` for the flow of `coef`
/// over `[t0, t1]`.
pub fn index_pm1_flow(
    coef: Arc<dyn Coefficient>,
    t0: f64,
    t1: f64,
    tol: Tolerances,
) -> Result<PmOneReport> {
    let k = coef.half_dim();
    let traj = doubled_graph_path(coef, t0, t1, tol)?;
    let w1 = graph_reference(k, 1.0);
    let wm1 = graph_reference(k, -1.0);
    let r1 = maslov_index(&traj, &w1)?;
    let rm1 = maslov_index(&traj, &wm1)?;
    let end = traj.end_frame();
    Ok(PmOneReport {
        i1: r1.index - k as i64,
        im1: rm1.index,
        nu1: intersection_dim(&end, &w1, NU_TOL),
        num1: intersection_dim(&end, &wm1, NU_TOL),
        report1: r1,
        report_m1: rm1,
    })
}

/// Maslov-type indices of a fundamental solution. The graph path is
/// re-transported from the path's coefficient, which avoids forming
/// `Gr(γ)` from a possibly ill-conditioned `γ`.
pub fn index_pm1(gamma: &FundamentalPath) -> Result<PmOneReport> {
    let (t0, t1) = gamma.interval();
    index_pm1_flow(gamma.coefficient(), t0, t1, gamma.tol)
}

/// `μ(W, γ(t) V)` for the flow of `coef` over `[t0, t1]`.
pub fn mu_flow(
    coef: Arc<dyn Coefficient>,
    v: &LagrangianFrame,
    w: &LagrangianFrame,
    t0: f64,
    t1: f64,
    tol: Tolerances,
) -> Result<IndexReport> {
    let traj = transport_frame(coef, v, t0, t1, tol)?;
    maslov_index(&traj, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::ConstantCoeff;

    fn rot_path(k: usize, a: f64, b: f64) -> impl LagrangianPath {
        let v = LagrangianFrame::dirichlet(k);
        FnPath::uniform(k, a, b, 40, move |t| rotation(k, t) * v.columns())
    }

    #[test]
    fn complex_schur_eigenvalues() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        );
        let mut ev = complex_eigenvalues(&m);
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn full_rotation_counts_two() {
        let p = rot_path(1, 0.0, 2.0 * PI);
        let r = maslov_index(&p, &LagrangianFrame::dirichlet(1)).unwrap();
        assert_eq!(r.index, 2);
        assert_eq!(r.recombined(), 2);
        assert_eq!(r.endpoint_contributions, (1, 0));
    }

    #[test]
    fn constant_path_is_zero() {
        let v = LagrangianFrame::neumann(2);
        let p = FnPath::uniform(2, 0.0, 1.0, 5, move |_| v.columns().clone());
        assert_eq!(maslov_index(&p, &LagrangianFrame::dirichlet(2)).unwrap().index, 0);
        assert_eq!(maslov_rs(&p, &LagrangianFrame::dirichlet(2)).unwrap(), 0.0);
    }

    #[test]
    fn crossing_form_of_rotation() {
        let coef: Arc<dyn Coefficient> = Arc::new(ConstantCoeff(Mat::identity(2, 2)));
        let vd = LagrangianFrame::dirichlet(1);
        let traj = transport_frame(coef, &vd, 0.0, 1.0, Tolerances::default()).unwrap();
        let f = crossing_form(&traj, &vd, 0.0).unwrap();
        assert_eq!((f.m_plus, f.m_minus, f.kernel_dim, f.regular), (1, 0, 1, true));
        assert!((f.matrix[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(matches!(crossing_form(&traj, &vd, 0.5), Err(Error::NoCrossing(_))));
    }

    #[test]
    fn missing_derivative_is_configuration_error() {
        let v = LagrangianFrame::dirichlet(1);
        let p = FnPath::uniform(1, 0.0, 1.0, 4, move |t| rotation(1, t) * v.columns())
            .without_derivative();
        let r = crossing_form(&p, &LagrangianFrame::dirichlet(1), 0.0);
        assert!(matches!(r, Err(Error::Configuration(_))));
    }

    #[test]
    fn rs_differs_at_a_starting_crossing() {
        let p = rot_path(1, 0.0, 1.0);
        let vd = LagrangianFrame::dirichlet(1);
        let lz = maslov_index(&p, &vd).unwrap().index;
        let rs = maslov_rs(&p, &vd).unwrap();
        assert_eq!(lz, 1);
        assert_eq!(rs - lz as f64, -0.5);
    }

    #[test]
    fn hormander_formula_matches_path() {
        let vd = LagrangianFrame::dirichlet(1);
        let vn = LagrangianFrame::neumann(1);
        let l = LagrangianFrame::new(Mat::from_row_slice(2, 1, &[0.3, 1.0])).unwrap();
        let (s, how) = hormander_index_detailed(&vd, &vn, &vd, &l).unwrap();
        assert_eq!(how, HormanderMethod::Formula);
        assert_eq!(s, hormander_by_path(&vd, &vn, &vd, &l).unwrap());
    }

    #[test]
    fn doubled_reference_frames() {
        let d = graph_reference(2, 1.0);
        assert!((d.columns().transpose() * j_matrix(4) * d.columns()).norm() < 1e-14);
        let a = graph_reference(2, -1.0);
        assert_eq!(intersection_dim(&d, &a, 1e-8), 0);
    }
}
