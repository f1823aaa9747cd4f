//! Stability of elliptic relative equilibria from index data: Morse
//! indices of the Dirichlet/Neumann problems, the hyperbolicity criterion,
//! brake half-period indices, degenerate-curve tracing, sweeps and the
//! near-collision limit table.
//!
//! Periods start at the apocenter (`t = π`) by default; the boundary
//! problems depend on this phase, the `ω`-indices do not.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{heteroclinic_index_lplus, nondegeneracy_probe, ProbeResult, Truncation};
use crate::error::{Error, ErrorClass, Result};
use crate::flow::{
    blowup_period, classify, integrate_fundamental, transport_frame, BlowUpOrbitCoeff,
    Classification, Coefficient, Domain, EssentialCoeff, FundamentalPath, MonodromyReport,
    Tolerances,
};
use crate::maslov::{index_pm1, maslov_index, PmOneReport, NU_TOL};
use crate::models::{build_config, orbit_point, CentralConfig, Family};
use crate::symplectic::{intersection_dim, LagrangianFrame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub tol: Tolerances,
    /// True anomaly at which the period starts.
    pub phase: f64,
    /// Switch to blow-up time when `1 − e` is below this.
    pub blowup_below: f64,
    /// Tolerances used in blow-up time.
    pub blowup_tol: Tolerances,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            phase: PI,
            blowup_below: 1e-3,
            blowup_tol: Tolerances::new(1e-12, 1e-12),
        }
    }
}

impl AnalysisOptions {
    pub fn domain_for(&self, e: f64) -> Domain {
        if 1.0 - e < self.blowup_below {
            Domain::BlowupTau
        } else {
            Domain::TrueAnomaly
        }
    }
}

/// The essential system over one period in a chosen time variable.
#[derive(Clone)]
pub struct PeriodSystem {
    pub coef: Arc<dyn Coefficient>,
    pub t0: f64,
    /// Half-period time (the opposite apsis).
    pub t_half: f64,
    pub t1: f64,
    pub domain: Domain,
    pub tol: Tolerances,
    pub energy_drift: Option<f64>,
}

pub fn period_system(cfg: &CentralConfig, e: f64, opts: &AnalysisOptions) -> Result<PeriodSystem> {
    period_system_in(cfg, e, opts.phase, opts.domain_for(e), opts)
}

/// As [`period_system`] with the time variable forced.
pub fn period_system_in(
    cfg: &CentralConfig,
    e: f64,
    phase: f64,
    domain: Domain,
    opts: &AnalysisOptions,
) -> Result<PeriodSystem> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!("eccentricity {e} outside [0, 1)")));
    }
    match domain {
        Domain::BlowupTau => {
            let start = orbit_point(e, phase)?;
            let (period, drift) = blowup_period(start, opts.blowup_tol)?;
            Ok(PeriodSystem {
                coef: Arc::new(BlowUpOrbitCoeff { cfg: cfg.clone(), start, t_start: phase }),
                t0: 0.0,
                t_half: 0.5 * period,
                t1: period,
                domain,
                tol: opts.blowup_tol,
                energy_drift: Some(drift),
            })
        }
        _ => Ok(PeriodSystem {
            coef: Arc::new(EssentialCoeff { cfg: cfg.clone(), e }),
            t0: phase,
            t_half: phase + PI,
            t1: phase + 2.0 * PI,
            domain: Domain::TrueAnomaly,
            tol: opts.tol,
            energy_drift: None,
        }),
    }
}

impl PeriodSystem {
    pub fn fundamental(&self) -> Result<FundamentalPath> {
        let mut p = integrate_fundamental(self.coef.clone(), self.t0, self.t1, self.tol)?;
        p.domain = self.domain;
        Ok(p)
    }

    /// `μ(W, γ(t)V)` over `[t0, t_end]`, with `dim W ∩ γ(t_end)V`.
    pub fn mu(&self, w: &LagrangianFrame, v: &LagrangianFrame, t_end: f64) -> Result<(i64, usize)> {
        let traj = transport_frame(self.coef.clone(), v, self.t0, t_end, self.tol)?;
        let rep = maslov_index(&traj, w)?;
        Ok((rep.index, intersection_dim(w, &traj.end_frame(), NU_TOL)))
    }
}

// ---------------------------------------------------------------------------
// Morse indices and hyperbolicity

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseIndices {
    /// `μ(V_d, γV_d)` over one period.
    pub mu_d: i64,
    /// `μ(V_n, γV_n)`.
    pub mu_n: i64,
    pub phi_d: i64,
    pub phi_n: i64,
    /// `dim V_d ∩ γ(T)V_d`.
    pub nu_d: usize,
    pub nu_n: usize,
    pub domain: Domain,
}

impl MorseIndices {
    pub fn degenerate(&self) -> bool {
        self.nu_d > 0 || self.nu_n > 0
    }
}

pub fn morse_indices(cfg: &CentralConfig, e: f64, opts: &AnalysisOptions) -> Result<MorseIndices> {
    let sys = period_system(cfg, e, opts)?;
    morse_from(cfg, &sys)
}

fn morse_from(cfg: &CentralConfig, sys: &PeriodSystem) -> Result<MorseIndices> {
    let k = cfg.k();
    let vd = LagrangianFrame::dirichlet(k);
    let vn = LagrangianFrame::neumann(k);
    let (mu_d, nu_d) = sys.mu(&vd, &vd, sys.t1)?;
    let (mu_n, nu_n) = sys.mu(&vn, &vn, sys.t1)?;
    Ok(MorseIndices {
        mu_d,
        mu_n,
        phi_d: mu_d - k as i64,
        phi_n: mu_n,
        nu_d,
        nu_n,
        domain: sys.domain,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityCheck {
    /// `φ_d = φ_n` and `ν_n = 0`.
    pub certified: bool,
    pub morse: MorseIndices,
    pub classification: Classification,
}

/// The index criterion, cross-checked against the monodromy spectrum. A
/// certified case whose spectrum is not hyperbolic is an internal error.
pub fn hyperbolicity_check(cfg: &CentralConfig, e: f64, opts: &AnalysisOptions) -> Result<HyperbolicityCheck> {
    let sys = period_system(cfg, e, opts)?;
    let morse = morse_from(cfg, &sys)?;
    let m = sys.fundamental()?.monodromy()?;
    let classification = classify(&m).classification;
    let certified = morse.phi_d == morse.phi_n && morse.nu_n == 0;
    if certified && classification != Classification::Hyperbolic {
        return Err(Error::Internal(format!(
            "index criterion certifies hyperbolicity at e = {e} but the monodromy is {classification}"
        )));
    }
    Ok(HyperbolicityCheck { certified, morse, classification })
}

// ---------------------------------------------------------------------------
// Brake symmetry on the half period

/// Half-period indices `μ(V^a, γ(t)V^b)`, `t` over half a period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrakeHalf {
    pub pp: i64,
    pub mm: i64,
    /// `μ(V⁺, γV⁻)`; its jumps are the curves `ψ⁺`.
    pub pm: i64,
    /// `μ(V⁻, γV⁺)`; its jumps are the curves `ψ⁻`.
    pub mp: i64,
    pub k: usize,
}

impl BrakeHalf {
    /// `i₁ = μ(V⁺,γV⁺) + μ(V⁻,γV⁻) − k`.
    pub fn i1(&self) -> i64 {
        self.pp + self.mm - self.k as i64
    }

    /// `i₋₁ = μ(V⁺,γV⁻) + μ(V⁻,γV⁺)`.
    pub fn im1(&self) -> i64 {
        self.pm + self.mp
    }
}

pub fn brake_half_indices(cfg: &CentralConfig, e: f64, opts: &AnalysisOptions) -> Result<BrakeHalf> {
    let sys = period_system(cfg, e, opts)?;
    brake_half_from(cfg, &sys)
}

fn brake_half_from(cfg: &CentralConfig, sys: &PeriodSystem) -> Result<BrakeHalf> {
    let (vp, vm) = cfg.brake_subspaces()?;
    let tp = transport_frame(sys.coef.clone(), &vp, sys.t0, sys.t_half, sys.tol)?;
    let tm = transport_frame(sys.coef.clone(), &vm, sys.t0, sys.t_half, sys.tol)?;
    Ok(BrakeHalf {
        pp: maslov_index(&tp, &vp)?.index,
        mm: maslov_index(&tm, &vm)?.index,
        pm: maslov_index(&tm, &vp)?.index,
        mp: maslov_index(&tp, &vm)?.index,
        k: cfg.k(),
    })
}

// ---------------------------------------------------------------------------
// Cells and sweeps

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    DomainError,
    ConvergenceError,
    InternalError,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::DomainError => "domain_error",
            CellStatus::ConvergenceError => "convergence_error",
            CellStatus::InternalError => "internal_error",
        }
    }

    fn from_error(e: &Error) -> Self {
        match e.class() {
            ErrorClass::Domain => CellStatus::DomainError,
            ErrorClass::Convergence => CellStatus::ConvergenceError,
            ErrorClass::Internal => CellStatus::InternalError,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCell {
    pub family: String,
    pub param: f64,
    pub e: f64,
    pub i1: Option<i64>,
    pub im1: Option<i64>,
    pub mu_d: Option<i64>,
    pub mu_n: Option<i64>,
    pub nu1: Option<usize>,
    pub num1: Option<usize>,
    pub nu_d: Option<usize>,
    pub nu_n: Option<usize>,
    pub classification: Option<Classification>,
    pub status: CellStatus,
    pub error: Option<String>,
    /// Largest symplecticity residual of the fundamental solution relative
    /// to `‖γ‖²`.
    pub drift: f64,
    pub domain: Option<Domain>,
    pub flags: Vec<String>,
    pub wall_ms: f64,
}

impl StabilityCell {
    pub fn phi_d(&self, k: usize) -> Option<i64> {
        self.mu_d.map(|m| m - k as i64)
    }

    pub fn phi_n(&self) -> Option<i64> {
        self.mu_n
    }

    fn failed(family: &Family, e: f64, err: &Error, wall_ms: f64) -> Self {
        Self {
            family: family.name().to_string(),
            param: family.param().unwrap_or(f64::NAN),
            e,
            i1: None,
            im1: None,
            mu_d: None,
            mu_n: None,
            nu1: None,
            num1: None,
            nu_d: None,
            nu_n: None,
            classification: None,
            status: CellStatus::from_error(err),
            error: Some(err.to_string()),
            drift: f64::NAN,
            domain: None,
            flags: Vec::new(),
            wall_ms,
        }
    }
}

/// Indices, spectrum and Morse data of one `(family, e)` point, with the
/// monodromy and the `±1` reports.
pub struct CellData {
    pub cell: StabilityCell,
    pub monodromy: MonodromyReport,
    pub pm: PmOneReport,
    pub morse: MorseIndices,
}

pub fn analyze(cfg: &CentralConfig, e: f64, opts: &AnalysisOptions) -> Result<CellData> {
    let started = Instant::now();
    let sys = period_system(cfg, e, opts)?;
    let path = sys.fundamental()?;
    let pm = index_pm1(&path)?;
    let morse = morse_from(cfg, &sys)?;
    let monodromy = classify(&path.monodromy()?);
    let mut flags = Vec::new();
    if pm.nu1 > 0 {
        flags.push(format!("1-degenerate (nu1 = {})", pm.nu1));
    }
    if pm.num1 > 0 {
        flags.push(format!("-1-degenerate (nu-1 = {})", pm.num1));
    }
    if morse.degenerate() {
        flags.push(format!("boundary problem degenerate (nu_d = {}, nu_n = {})", morse.nu_d, morse.nu_n));
    }
    if pm.report1.diagnostics.flagged || pm.report_m1.diagnostics.flagged {
        flags.push("irregular crossing".into());
    }
    if monodromy.candidates.len() > 1 {
        flags.push("clustered spectrum near +-1".into());
    }
    let family = cfg.family();
    let cell = StabilityCell {
        family: family.name().to_string(),
        param: family.param().unwrap_or(f64::NAN),
        e,
        i1: Some(pm.i1),
        im1: Some(pm.im1),
        mu_d: Some(morse.mu_d),
        mu_n: Some(morse.mu_n),
        nu1: Some(pm.nu1),
        num1: Some(pm.num1),
        nu_d: Some(morse.nu_d),
        nu_n: Some(morse.nu_n),
        classification: Some(monodromy.classification),
        status: CellStatus::Ok,
        error: None,
        drift: path.rel_drift,
        domain: Some(sys.domain),
        flags,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok(CellData { cell, monodromy, pm, morse })
}

/// One cell; failures are recorded in the cell rather than returned.
pub fn compute_cell(family: Family, e: f64, opts: &AnalysisOptions) -> StabilityCell {
    let started = Instant::now();
    match build_config(family).and_then(|cfg| analyze(&cfg, e, opts)) {
        Ok(d) => d.cell,
        Err(err) => StabilityCell::failed(&family, e, &err, started.elapsed().as_secs_f64() * 1e3),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Row-major: `e` outer, parameter inner.
    pub cells: Vec<StabilityCell>,
    /// Rows along which an index decreases in the parameter.
    pub violations: Vec<String>,
}

impl SweepResult {
    pub fn ok_fraction(&self) -> f64 {
        if self.cells.is_empty() {
            return 1.0;
        }
        self.cells.iter().filter(|c| c.status == CellStatus::Ok).count() as f64 / self.cells.len() as f64
    }
}

pub fn sweep(family: Family, params: &[f64], es: &[f64], opts: &AnalysisOptions) -> SweepResult {
    let grid: Vec<(f64, f64)> = es.iter().flat_map(|&e| params.iter().map(move |&p| (e, p))).collect();
    let cells: Vec<StabilityCell> = grid
        .par_iter()
        .map(|&(e, p)| compute_cell(family.with_param(p), e, opts))
        .collect();
    let violations = monotonicity_audit(&cells, params.len());
    SweepResult { cells, violations }
}

/// `i_ω` must not decrease along a row as the parameter grows.
pub fn monotonicity_audit(cells: &[StabilityCell], row_len: usize) -> Vec<String> {
    let mut out = Vec::new();
    if row_len == 0 {
        return out;
    }
    for row in cells.chunks(row_len) {
        let ok: Vec<&StabilityCell> = row.iter().filter(|c| c.status == CellStatus::Ok).collect();
        for w in ok.windows(2) {
            for (name, a, b) in [("i1", w[0].i1, w[1].i1), ("im1", w[0].im1, w[1].im1)] {
                if let (Some(a), Some(b)) = (a, b) {
                    if b < a {
                        out.push(format!(
                            "e = {}: {name} drops from {a} to {b} between {} and {}",
                            w[0].e, w[0].param, w[1].param
                        ));
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Degenerate curves (Euler family)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// `φ_j`: eigenvalue `1`.
    OneDegenerate,
    /// `ψ_j⁺`: `V⁺ ∩ γ(2π)V⁻` nontrivial.
    MinusOnePlus,
    /// `ψ_j⁻`: `V⁻ ∩ γ(2π)V⁺` nontrivial.
    MinusOneMinus,
}

impl CurveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::OneDegenerate => "phi",
            CurveKind::MinusOnePlus => "psi_plus",
            CurveKind::MinusOneMinus => "psi_minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub e: f64,
    pub delta: f64,
    /// Width of the final bracket.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateCurve {
    pub kind: CurveKind,
    pub j: usize,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// `None`: 7, or `1/8 − 10⁻⁴` when `1 − e < 10⁻³`.
    pub delta_max: Option<f64>,
    pub delta_min: f64,
    /// Number of scan cells on `[delta_min, delta_max]`.
    pub cells: usize,
    pub width: f64,
    pub j_max: usize,
    pub analysis: AnalysisOptions,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            delta_max: None,
            delta_min: 1e-5,
            cells: 140,
            width: 1e-8,
            j_max: 3,
            analysis: AnalysisOptions::default(),
        }
    }
}

impl TraceOptions {
    pub fn delta_max_for(&self, e: f64) -> f64 {
        self.delta_max.unwrap_or(if 1.0 - e < 1e-3 { 0.125 - 1e-4 } else { 7.0 })
    }
}

/// Roots of one `e` row; each entry is `(j, δ, width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub e: f64,
    pub phi: Vec<(usize, f64, f64)>,
    pub psi_plus: Vec<(usize, f64, f64)>,
    pub psi_minus: Vec<(usize, f64, f64)>,
    /// Brackets that could not be split to single roots.
    pub gaps: Vec<String>,
}

impl TraceRow {
    fn get(v: &[(usize, f64, f64)], j: usize) -> Option<f64> {
        v.iter().find(|r| r.0 == j).map(|r| r.1)
    }

    pub fn phi_j(&self, j: usize) -> Option<f64> {
        Self::get(&self.phi, j)
    }

    pub fn psi_plus_j(&self, j: usize) -> Option<f64> {
        Self::get(&self.psi_plus, j)
    }

    pub fn psi_minus_j(&self, j: usize) -> Option<f64> {
        Self::get(&self.psi_minus, j)
    }

    /// `(ψ_jˢ, ψ_jˡ)`.
    pub fn psi_sl(&self, j: usize) -> Option<(f64, f64)> {
        let a = self.psi_plus_j(j)?;
        let b = self.psi_minus_j(j)?;
        Some((a.min(b), a.max(b)))
    }

    /// `0 < ψ₁ˢ ≤ ψ₁ˡ < φ₁ < ψ₂ˢ ≤ ψ₂ˡ < φ₂ < …` over the labels present.
    pub fn ordering_holds(&self) -> bool {
        let mut seq = Vec::new();
        let jmax = self.phi.iter().map(|r| r.0).max().unwrap_or(0) + 1;
        for j in 1..=jmax {
            let Some((s, l)) = self.psi_sl(j) else { break };
            seq.push((s, false));
            seq.push((l, true));
            match self.phi_j(j) {
                Some(p) => seq.push((p, false)),
                None => break,
            }
        }
        if seq.is_empty() || seq[0].0 <= 0.0 {
            return false;
        }
        // the psi pair may coincide, all other steps are strict
        seq.windows(2).all(|w| if w[1].1 { w[0].0 <= w[1].0 } else { w[0].0 < w[1].0 })
    }
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    d: f64,
    a: i64,
    b: i64,
    c: i64,
}

fn probe_at(e: f64, d: f64, opts: &AnalysisOptions) -> Result<Probe> {
    let cfg = build_config(Family::Euler(d))?;
    let h = brake_half_indices(&cfg, e, opts)?;
    Ok(Probe { d, a: h.pm, b: h.mp, c: h.i1() })
}

/// Splits `[lo, hi]` until every sub-bracket holds a single unit jump of
/// the selected counter, then bisects each to `width`. Pushes
/// `(δ, width, level reached)`.
fn locate(
    e: f64,
    lo: Probe,
    hi: Probe,
    pick: &(dyn Fn(&Probe) -> i64 + Sync),
    opts: &TraceOptions,
    out: &mut Vec<(f64, f64, i64)>,
    gaps: &mut Vec<String>,
) -> Result<()> {
    let jump = pick(&hi) - pick(&lo);
    if jump == 0 {
        return Ok(());
    }
    if jump < 0 {
        gaps.push(format!("e = {e}: counter decreases on [{}, {}]", lo.d, hi.d));
        return Ok(());
    }
    if jump > 1 {
        if hi.d - lo.d <= opts.width {
            gaps.push(format!("e = {e}: {jump} roots unresolved in [{}, {}]", lo.d, hi.d));
            for l in pick(&lo) + 1..=pick(&hi) {
                out.push((0.5 * (lo.d + hi.d), hi.d - lo.d, l));
            }
            return Ok(());
        }
        let n = 4;
        let mut pts = vec![lo];
        for i in 1..n {
            pts.push(probe_at(e, lo.d + (hi.d - lo.d) * i as f64 / n as f64, &opts.analysis)?);
        }
        pts.push(hi);
        for w in pts.windows(2) {
            locate(e, w[0], w[1], pick, opts, out, gaps)?;
        }
        return Ok(());
    }
    let (mut l, mut h) = (lo, hi);
    while h.d - l.d > opts.width {
        let m = probe_at(e, 0.5 * (l.d + h.d), &opts.analysis)?;
        if pick(&m) == pick(&l) {
            l = m;
        } else {
            h = m;
        }
    }
    out.push((0.5 * (l.d + h.d), h.d - l.d, pick(&h)));
    Ok(())
}

/// Traces `φ_j`, `ψ_j^±` for the Euler family at one eccentricity.
pub fn trace_row(e: f64, opts: &TraceOptions) -> Result<TraceRow> {
    let dmax = opts.delta_max_for(e);
    let n = opts.cells.max(2);
    let grid: Vec<f64> = (0..=n)
        .map(|i| opts.delta_min + (dmax - opts.delta_min) * i as f64 / n as f64)
        .collect();
    let probes = grid
        .par_iter()
        .map(|&d| probe_at(e, d, &opts.analysis))
        .collect::<Result<Vec<_>>>()?;
    let base = probes[0];
    let pickers: [Box<dyn Fn(&Probe) -> i64 + Sync>; 3] =
        [Box::new(|p: &Probe| p.c), Box::new(|p: &Probe| p.a), Box::new(|p: &Probe| p.b)];
    let mut lists: Vec<Vec<(usize, f64, f64)>> = Vec::new();
    let mut gaps = Vec::new();
    for (which, pick) in pickers.iter().enumerate() {
        let cells: Vec<(Probe, Probe)> = probes
            .windows(2)
            .filter(|w| pick(&w[0]) != pick(&w[1]))
            .map(|w| (w[0], w[1]))
            .collect();
        let found = cells
            .par_iter()
            .map(|&(lo, hi)| {
                let mut out = Vec::new();
                let mut g = Vec::new();
                locate(e, lo, hi, pick.as_ref(), opts, &mut out, &mut g)?;
                Ok((out, g))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut roots = Vec::new();
        for (o, g) in found {
            roots.extend(o);
            gaps.extend(g);
        }
        roots.sort_by(|a, b| a.0.total_cmp(&b.0));
        let labelled: Vec<(usize, f64, f64)> = if which == 0 {
            // φ_j carries i₁ from 2j + 1 to 2j + 3; its two unit steps are
            // resolved separately and merged
            (1..=opts.j_max)
                .filter_map(|j| {
                    let lv = 2 * j as i64 + 2;
                    let x1 = roots.iter().find(|r| r.2 == lv)?;
                    let x2 = roots.iter().find(|r| r.2 == lv + 1)?;
                    let (a, b) = (x1.0.min(x2.0), x1.0.max(x2.0));
                    Some((j, 0.5 * (a + b), b - a + x1.1.max(x2.1)))
                })
                .collect()
        } else {
            let start = pick(&base);
            roots
                .into_iter()
                .filter_map(|(d, w, after)| {
                    let j = (after - start).max(0) as usize;
                    (j >= 1 && j <= opts.j_max).then_some((j, d, w))
                })
                .collect()
        };
        lists.push(labelled);
    }
    let psi_minus = lists.pop().unwrap_or_default();
    let psi_plus = lists.pop().unwrap_or_default();
    let phi = lists.pop().unwrap_or_default();
    Ok(TraceRow { e, phi, psi_plus, psi_minus, gaps })
}

pub fn trace_degenerate_curves(e_list: &[f64], opts: &TraceOptions) -> Result<(Vec<DegenerateCurve>, Vec<TraceRow>)> {
    let rows = e_list.iter().map(|&e| trace_row(e, opts)).collect::<Result<Vec<_>>>()?;
    let mut curves = Vec::new();
    for kind in [CurveKind::OneDegenerate, CurveKind::MinusOnePlus, CurveKind::MinusOneMinus] {
        for j in 1..=opts.j_max {
            let points: Vec<CurvePoint> = rows
                .iter()
                .filter_map(|r| {
                    let list = match kind {
                        CurveKind::OneDegenerate => &r.phi,
                        CurveKind::MinusOnePlus => &r.psi_plus,
                        CurveKind::MinusOneMinus => &r.psi_minus,
                    };
                    list.iter().find(|x| x.0 == j).map(|x| CurvePoint { e: r.e, delta: x.1, width: x.2 })
                })
                .collect();
            if !points.is_empty() {
                curves.push(DegenerateCurve { kind, j, points });
            }
        }
    }
    Ok((curves, rows))
}

// ---------------------------------------------------------------------------
// Near-collision limits

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitTargets {
    pub mu_d: i64,
    pub mu_n: i64,
    pub i1: i64,
    pub im1: i64,
}

/// Limits as `e → 1` from the collision data: `μ_d → k + i(V_d; l₊)`,
/// `μ_n → 2φ(R) + i(V_d; l₊)`, `i_{±1} → φ(R) + i(V_d; l₊)`.
pub fn limit_targets(cfg: &CentralConfig) -> Result<(LimitTargets, i64)> {
    let lp = heteroclinic_index_lplus(cfg, &LagrangianFrame::dirichlet(cfg.k()))?;
    if lp.diagnostics.converged != Some(true) {
        return Err(Error::Convergence(format!(
            "i(V_d; l+) did not converge: {:?}",
            lp.diagnostics.notes
        )));
    }
    let i = lp.index;
    let k = cfg.k() as i64;
    let phi = cfg.phi() as i64;
    Ok((LimitTargets { mu_d: k + i, mu_n: 2 * phi + i, i1: phi + i, im1: phi + i }, i))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearCollisionRow {
    pub e: f64,
    pub values: Option<LimitTargets>,
    pub matches: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearCollisionReport {
    pub targets: LimitTargets,
    pub i_lplus: i64,
    pub rows: Vec<NearCollisionRow>,
    /// First `e` from which every later row matches.
    pub first_stable: Option<f64>,
    /// Once matched, every later row matches too.
    pub tail_monotone: bool,
    pub probe: Option<ProbeResult>,
    pub notes: Vec<String>,
}

pub fn near_collision_report(
    cfg: &CentralConfig,
    e_seq: &[f64],
    opts: &AnalysisOptions,
    probe: bool,
) -> Result<NearCollisionReport> {
    let (targets, i_lplus) = limit_targets(cfg)?;
    let rows: Vec<NearCollisionRow> = e_seq
        .par_iter()
        .map(|&e| match analyze(cfg, e, opts) {
            Ok(d) => {
                let v = LimitTargets { mu_d: d.morse.mu_d, mu_n: d.morse.mu_n, i1: d.pm.i1, im1: d.pm.im1 };
                NearCollisionRow { e, values: Some(v), matches: v == targets, error: None }
            }
            Err(err) => NearCollisionRow { e, values: None, matches: false, error: Some(err.to_string()) },
        })
        .collect();
    let first_match = rows.iter().position(|r| r.matches);
    let tail_monotone = first_match.is_none_or(|i| rows[i..].iter().all(|r| r.matches));
    let first_stable = rows
        .iter()
        .rposition(|r| !r.matches)
        .map_or(Some(0), |i| (i + 1 < rows.len()).then_some(i + 1))
        .map(|i| rows[i].e);
    let mut notes = Vec::new();
    if first_stable.is_none() {
        notes.push("sequence did not stabilize at the collision targets; the configuration may be collision degenerate".into());
    }
    let probe = if probe {
        let p = nondegeneracy_probe(cfg.family(), Truncation::default());
        if p.status != crate::collision::ProbeStatus::Stable {
            notes.push(format!("nondegeneracy probe: {}", p.status.as_str()));
        }
        Some(p)
    } else {
        None
    };
    Ok(NearCollisionReport { targets, i_lplus, rows, first_stable, tail_monotone, probe, notes })
}

// ---------------------------------------------------------------------------
// Index growth in the non-hyperbolic regime

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    pub epsilon: f64,
    /// `ê = (1 − e²)/2`.
    pub e_hat: f64,
    pub value: f64,
    /// `ê < ε³`, the range where the bound is proved.
    pub in_range: bool,
}

/// `(2/π)√(δ − 1/8)·ln(ε²/√ê) − 6` with `ε = ½·min{δ/(2δ+5), 1/8}`, for
/// `δ ∈ (1/8, 7]`.
pub fn growth_bound(delta: f64, e: f64) -> Result<GrowthBound> {
    if !(delta > 0.125 && delta <= 7.0) {
        return Err(Error::Domain(format!("growth bound needs delta in (1/8, 7], got {delta}")));
    }
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!("eccentricity {e} outside [0, 1)")));
    }
    let epsilon = 0.5 * (delta / (2.0 * delta + 5.0)).min(0.125);
    let e_hat = 0.5 * (1.0 - e * e);
    let value = 2.0 / PI * (delta - 0.125).sqrt() * (epsilon * epsilon / e_hat.sqrt()).ln() - 6.0;
    Ok(GrowthBound { epsilon, e_hat, value, in_range: e_hat < epsilon.powi(3) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_switch() {
        let o = AnalysisOptions::default();
        assert_eq!(o.domain_for(0.999), Domain::TrueAnomaly);
        assert_eq!(o.domain_for(0.9999), Domain::BlowupTau);
    }

    #[test]
    fn kepler_cell() {
        let c = compute_cell(Family::Euler(0.0), 0.3, &AnalysisOptions::default());
        assert_eq!(c.status, CellStatus::Ok, "{:?}", c.error);
        assert_eq!((c.i1, c.im1), (Some(0), Some(2)));
    }

    #[test]
    fn bad_eccentricity_is_domain_error() {
        let c = compute_cell(Family::Euler(0.1), 1.0, &AnalysisOptions::default());
        assert_eq!(c.status, CellStatus::DomainError);
    }

    #[test]
    fn growth_bound_values() {
        let g = growth_bound(1.0, 1.0 - 1e-4).unwrap();
        assert!((g.epsilon - 1.0 / 16.0).abs() < 1e-15);
        assert!(g.in_range);
        assert!(g.value < 0.0);
        assert!(growth_bound(0.1, 0.5).is_err());
    }

    #[test]
    fn ordering_check() {
        let row = TraceRow {
            e: 0.5,
            phi: vec![(1, 1.0, 1e-8)],
            psi_plus: vec![(1, 0.3, 1e-8), (2, 1.5, 1e-8)],
            psi_minus: vec![(1, 0.4, 1e-8), (2, 1.5, 1e-8)],
            gaps: vec![],
        };
        assert!(row.ordering_holds());
        let bad = TraceRow { phi: vec![(1, 0.35, 1e-8)], ..row };
        assert!(!bad.ordering_holds());
    }
}
