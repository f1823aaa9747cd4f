use std::path::Path;
use std::process::ExitCode;

use ere_core::collision::{
    brake_split, default_t_max, exterior_trace, half_clinic_index, l0_analytic_indices, l0_numerical_table,
    nondegeneracy_probe, HalfClinicProblem, ProbeStatus, Side, Truncation,
};
use ere_core::flow::{Domain, Tolerances};
use ere_core::models::{build_config, Family};
use ere_core::stability::{sweep, trace_row, AnalysisOptions, CellStatus, StabilityCell, TraceOptions, TraceRow};
use ere_core::verify::{run_criterion, Level, CRITERIA};
use ere_core::{Error, ErrorClass, LagrangianFrame};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{open, round12, round12_opt, write_rows, Format};
use crate::settings::Settings;

pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_CONVERGENCE: u8 = 3;
pub const EXIT_STRICT: u8 = 4;
pub const EXIT_INTERNAL: u8 = 5;
/// A criterion of `verify` failed.
pub const EXIT_VERIFY: u8 = 1;

#[derive(Debug)]
pub struct Failure {
    code: u8,
    class: &'static str,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_DOMAIN, class: "domain", message: message.into() }
    }

    fn io(e: std::io::Error) -> Self {
        Self { code: EXIT_INTERNAL, class: "io", message: e.to_string() }
    }

    /// Prints the error record on standard error.
    pub fn report(self) -> ExitCode {
        let rec = serde_json::json!({ "error": { "class": self.class, "code": self.code, "message": self.message } });
        eprintln!("{rec}");
        ExitCode::from(self.code)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, class) = match e.class() {
            ErrorClass::Domain => (EXIT_DOMAIN, "domain"),
            ErrorClass::Convergence => (EXIT_CONVERGENCE, "convergence"),
            ErrorClass::Internal => (EXIT_INTERNAL, "internal"),
        };
        Self { code, class, message: e.to_string() }
    }
}

type Outcome = Result<ExitCode, Failure>;

struct Ctx {
    s: Settings,
    format: Format,
    tol: Tolerances,
    timing: bool,
}

impl Ctx {
    fn emit<T: Serialize>(&self, rows: &[T]) -> Result<(), Failure> {
        let w = open(self.s.out.as_deref()).map_err(Failure::io)?;
        write_rows(w, self.format, rows).map_err(Failure::io)
    }

    fn family_name(&self) -> Result<&str, Failure> {
        self.s.family.as_deref().ok_or_else(|| Failure::usage("--family is required"))
    }

    fn list(&self, v: Option<&crate::settings::Grid>, flag: &str) -> Result<Vec<f64>, Failure> {
        match v {
            Some(g) if !g.0.is_empty() => Ok(g.0.clone()),
            _ => Err(Failure::usage(format!("--{flag} is required"))),
        }
    }

    fn families(&self) -> Result<Vec<Family>, Failure> {
        let name = self.family_name()?;
        let params = self.list(self.s.param.as_ref(), "param")?;
        // ranges are checked before anything is computed
        params
            .iter()
            .map(|&p| {
                let f = Family::parse(name, p)?;
                build_config(f)?;
                Ok(f)
            })
            .collect::<ere_core::Result<Vec<_>>>()
            .map_err(Failure::from)
    }

    fn analysis(&self) -> AnalysisOptions {
        AnalysisOptions { tol: self.tol, ..AnalysisOptions::default() }
    }
}

fn jobs(s: &Settings) -> Result<Option<usize>, Failure> {
    if let Some(n) = s.jobs {
        return Ok(Some(n));
    }
    match std::env::var("ERE_JOBS") {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map(Some).map_err(|_| Failure::usage(format!("ERE_JOBS = '{v}' is not a count")))
        }
        _ => Ok(None),
    }
}

pub fn dispatch(command: &str, s: Settings) -> Outcome {
    if let Some(n) = jobs(&s)? {
        if n == 0 {
            return Err(Failure::usage("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { code: EXIT_INTERNAL, class: "internal", message: e.to_string() })?;
    }
    let format = Format::parse(s.format.as_deref().unwrap_or("csv")).map_err(Failure::usage)?;
    let def = Tolerances::default();
    let tol = Tolerances::new(s.tol_abs.unwrap_or(def.abs), s.tol_rel.unwrap_or(def.rel));
    if !(tol.abs > 0.0 && tol.rel > 0.0) {
        return Err(Failure::usage("tolerances must be positive"));
    }
    let timing = !s.no_timing.unwrap_or(false);
    let ctx = Ctx { s, format, tol, timing };
    match command {
        "index" => cmd_index(&ctx),
        "collision" => cmd_collision(&ctx),
        "sweep" => cmd_sweep(&ctx),
        "trace-curves" => cmd_trace_curves(&ctx),
        "verify" => cmd_verify(&ctx),
        other => Err(Failure::usage(format!("unknown command {other}"))),
    }
}

// ---------------------------------------------------------------------------
// index / sweep

fn domain_name(d: Domain) -> &'static str {
    match d {
        Domain::TrueAnomaly => "true_anomaly",
        Domain::BlowupTau => "blowup_tau",
        Domain::Other => "other",
    }
}

#[derive(Serialize)]
struct CellRow {
    family: String,
    param: Option<f64>,
    e: Option<f64>,
    i1: Option<i64>,
    im1: Option<i64>,
    mu_d: Option<i64>,
    mu_n: Option<i64>,
    nu1: Option<usize>,
    num1: Option<usize>,
    classification: Option<&'static str>,
    status: &'static str,
    drift: Option<f64>,
    wall_ms: Option<f64>,
    nu_d: Option<usize>,
    nu_n: Option<usize>,
    converged: bool,
    domain: Option<&'static str>,
    tol_abs: f64,
    tol_rel: f64,
    flags: String,
    error: Option<String>,
}

impl CellRow {
    fn new(c: &StabilityCell, ctx: &Ctx) -> Self {
        Self {
            family: c.family.clone(),
            param: round12_opt(c.param),
            e: round12_opt(c.e),
            i1: c.i1,
            im1: c.im1,
            mu_d: c.mu_d,
            mu_n: c.mu_n,
            nu1: c.nu1,
            num1: c.num1,
            classification: c.classification.map(|k| k.as_str()),
            status: c.status.as_str(),
            drift: round12_opt(c.drift),
            wall_ms: if ctx.timing { round12_opt(c.wall_ms) } else { None },
            nu_d: c.nu_d,
            nu_n: c.nu_n,
            converged: c.status == CellStatus::Ok,
            domain: c.domain.map(domain_name),
            tol_abs: ctx.tol.abs,
            tol_rel: ctx.tol.rel,
            flags: c.flags.join("; "),
            error: c.error.clone(),
        }
    }
}

fn status_code(s: CellStatus) -> u8 {
    match s {
        CellStatus::Ok => 0,
        CellStatus::DomainError => EXIT_DOMAIN,
        CellStatus::ConvergenceError => EXIT_CONVERGENCE,
        CellStatus::InternalError => EXIT_INTERNAL,
    }
}

fn cell_error(c: &StabilityCell) -> Failure {
    let code = status_code(c.status);
    let class = match c.status {
        CellStatus::ConvergenceError => "convergence",
        CellStatus::InternalError => "internal",
        _ => "domain",
    };
    let message = format!("{} {} e = {}: {}", c.family, c.param, c.e, c.error.as_deref().unwrap_or("failed"));
    Failure { code, class, message }
}

/// Cells in row-major order (`e` outer, parameter inner).
fn grid_cells(ctx: &Ctx, check_e: bool) -> Result<(Vec<StabilityCell>, Vec<String>), Failure> {
    let fams = ctx.families()?;
    let es = ctx.list(ctx.s.e.as_ref(), "e")?;
    if check_e {
        if let Some(e) = es.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(Failure::usage(format!("eccentricity {e} outside [0, 1)")));
        }
    }
    let params: Vec<f64> = fams.iter().filter_map(|f| f.param()).collect();
    let r = sweep(fams[0], &params, &es, &ctx.analysis());
    Ok((r.cells, r.violations))
}

fn cmd_index(ctx: &Ctx) -> Outcome {
    let (cells, _) = grid_cells(ctx, true)?;
    let rows: Vec<CellRow> = cells.iter().map(|c| CellRow::new(c, ctx)).collect();
    ctx.emit(&rows)?;
    let mut code = 0;
    for c in cells.iter().filter(|c| c.status != CellStatus::Ok) {
        let f = cell_error(c);
        code = if code == 0 { f.code } else { code };
        f.report();
    }
    Ok(ExitCode::from(code))
}

/// Fraction of cells that must succeed for `sweep` to exit with 0.
const SWEEP_OK_FRACTION: f64 = 0.99;

fn cmd_sweep(ctx: &Ctx) -> Outcome {
    let (cells, violations) = grid_cells(ctx, false)?;
    let rows: Vec<CellRow> = cells.iter().map(|c| CellRow::new(c, ctx)).collect();
    ctx.emit(&rows)?;
    for v in &violations {
        eprintln!("{}", serde_json::json!({ "warning": { "class": "monotonicity", "message": v } }));
    }
    let ok = cells.iter().filter(|c| c.status == CellStatus::Ok).count();
    if (ok as f64) < SWEEP_OK_FRACTION * cells.len() as f64 {
        let first = cells.iter().find(|c| c.status != CellStatus::Ok).expect("some cell failed");
        let mut f = cell_error(first);
        f.message = format!("{} of {} cells failed; first: {}", cells.len() - ok, cells.len(), f.message);
        return Err(f);
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// collision

#[derive(Serialize)]
struct CollisionRow {
    family: &'static str,
    param: Option<f64>,
    quantity: &'static str,
    value: Option<i64>,
    converged: Option<bool>,
    note: String,
    t_max: f64,
    tol_abs: f64,
    tol_rel: f64,
}

#[derive(Serialize)]
struct TraceSample {
    family: &'static str,
    param: Option<f64>,
    tau: f64,
    value: f64,
}

fn collision_rows(ctx: &Ctx, fam: Family, tr: Truncation) -> Result<(Vec<CollisionRow>, ProbeStatus), Failure> {
    let cfg = build_config(fam)?;
    let t_max = tr.t_max.unwrap_or_else(|| default_t_max(&cfg));
    let row = |quantity, value: Option<i64>, converged: Option<bool>, note: String| CollisionRow {
        family: fam.name(),
        param: fam.param().and_then(round12_opt),
        quantity,
        value,
        converged,
        note,
        t_max: round12(t_max),
        tol_abs: ctx.tol.abs,
        tol_rel: ctx.tol.rel,
    };
    let conv = |r: &ere_core::maslov::IndexReport| r.diagnostics.converged;
    let mut rows = Vec::new();

    let (table, reps) = l0_numerical_table(&cfg, tr)?;
    let closed = l0_analytic_indices(&cfg)?.as_array();
    let names = ["l0_minus_d", "l0_minus_n", "l0_plus_dd", "l0_plus_dn", "l0_plus_nd", "l0_plus_nn"];
    for (i, v) in table.as_array().into_iter().enumerate() {
        rows.push(row(names[i], Some(v), conv(&reps[i]), format!("closed form {}", closed[i])));
    }

    let k = cfg.k();
    for (name, v1) in [("i_lplus_d", LagrangianFrame::dirichlet(k)), ("i_lplus_n", LagrangianFrame::neumann(k))] {
        let p = HalfClinicProblem::new(Side::LPlusFull, cfg.clone(), v1).with_truncation(tr).with_tol(ctx.tol);
        let r = half_clinic_index(&p)?;
        rows.push(row(name, Some(r.index), conv(&r), r.diagnostics.notes.join("; ")));
    }

    if cfg.n().is_some() {
        let b = brake_split(&cfg, tr, ctx.tol)?;
        let c = Some(b.converged);
        let ext = |i: usize| match b.lplus_minus_exterior {
            Some(e) => format!("exterior {}", if i == 0 { e.0 } else { e.1 }),
            None => String::new(),
        };
        rows.push(row("brake_lplus_minus_vplus", Some(b.lplus_minus.0), c, ext(0)));
        rows.push(row("brake_lplus_minus_vminus", Some(b.lplus_minus.1), c, ext(1)));
        rows.push(row("brake_l0_vplus_vd", Some(b.l0_plus_d), c, String::new()));
        rows.push(row("brake_l0_vminus_vd", Some(b.l0_minus_d), c, String::new()));
        rows.push(row("brake_l0_vminus_vplus", Some(b.l0_minus_plus), c, String::new()));
        rows.push(row("brake_l0_vplus_vminus", Some(b.l0_plus_minus), c, String::new()));
    } else {
        rows.push(row("brake_split", None, None, "no brake symmetry for this family".into()));
    }

    let probe = nondegeneracy_probe(fam, tr);
    let mut note = probe.status.as_str().to_string();
    if let Some((a, b)) = probe.candidate {
        note.push_str(&format!(" in [{}, {}]", round12(a), round12(b)));
    }
    rows.push(row("probe", None, None, note));
    Ok((rows, probe.status))
}

fn cmd_collision(ctx: &Ctx) -> Outcome {
    let fams = ctx.families()?;
    let tr = Truncation { t_max: ctx.s.tmax, ..Truncation::default() };
    if let Some(t) = tr.t_max {
        if !(t > 0.0) {
            return Err(Failure::usage("--tmax must be positive"));
        }
    }
    let mut rows = Vec::new();
    let mut jump = false;
    for &fam in &fams {
        let (r, status) = collision_rows(ctx, fam, tr)?;
        rows.extend(r);
        jump |= status == ProbeStatus::JumpDetected;
    }
    ctx.emit(&rows)?;
    if let Some(path) = ctx.s.trace.as_deref() {
        write_trace(ctx, &fams, tr, path)?;
    }
    if jump && ctx.s.strict.unwrap_or(false) {
        return Err(Failure {
            code: EXIT_STRICT,
            class: "probe",
            message: "nondegeneracy probe detected an index jump".into(),
        });
    }
    Ok(ExitCode::SUCCESS)
}

fn write_trace(ctx: &Ctx, fams: &[Family], tr: Truncation, path: &Path) -> Result<(), Failure> {
    let mut samples = Vec::new();
    for &fam in fams {
        let cfg = build_config(fam)?;
        if cfg.k() != 2 {
            return Err(Failure::usage(format!("--trace needs a 4-dimensional system, {} has k = {}", fam.name(), cfg.k())));
        }
        let t = tr.t_max.unwrap_or_else(|| default_t_max(&cfg));
        let z = exterior_trace(&cfg, &LagrangianFrame::dirichlet(2), t, ctx.tol)?;
        samples.extend(z.values.iter().map(|&(tau, v)| TraceSample {
            family: fam.name(),
            param: fam.param().and_then(round12_opt),
            tau: round12(tau),
            value: round12(v),
        }));
    }
    let w = open(Some(path)).map_err(Failure::io)?;
    write_rows(w, Format::Csv, &samples).map_err(Failure::io)
}

// ---------------------------------------------------------------------------
// trace-curves

#[derive(Serialize)]
struct CurveRow {
    kind: &'static str,
    j: usize,
    e: f64,
    delta: f64,
    width: f64,
    note: String,
}

/// Relative separation below which `ψ⁺` and `ψ⁻` count as coincident.
const COINCIDE_REL: f64 = 1e-6;

fn curve_rows(r: &TraceRow) -> Vec<CurveRow> {
    let mut rows = Vec::new();
    let mut push = |kind: &'static str, list: &[(usize, f64, f64)], note: &dyn Fn(usize) -> String| {
        for &(j, d, w) in list {
            rows.push(CurveRow { kind, j, e: round12(r.e), delta: round12(d), width: round12(w), note: note(j) });
        }
    };
    // ψ⁺ and ψ⁻ closer than the brackets plus the integration noise floor
    // are reported as one point
    let coincide = |j: usize| {
        let p = r.psi_plus.iter().find(|x| x.0 == j);
        let m = r.psi_minus.iter().find(|x| x.0 == j);
        match (p, m) {
            (Some(a), Some(b)) if (a.1 - b.1).abs() <= a.2 + b.2 + COINCIDE_REL * a.1.abs().max(1.0) => "psi_plus = psi_minus".to_string(),
            _ => String::new(),
        }
    };
    push("phi", &r.phi, &|_| String::new());
    push("psi_plus", &r.psi_plus, &coincide);
    push("psi_minus", &r.psi_minus, &coincide);
    rows
}

fn cmd_trace_curves(ctx: &Ctx) -> Outcome {
    let es = ctx.list(ctx.s.e.as_ref(), "e")?;
    if let Some(e) = es.iter().find(|e| !(0.0..1.0).contains(*e)) {
        return Err(Failure::usage(format!("eccentricity {e} outside [0, 1)")));
    }
    let def = TraceOptions::default();
    let opts = TraceOptions {
        delta_max: ctx.s.delta_max.or(def.delta_max),
        cells: ctx.s.cells.unwrap_or(def.cells),
        j_max: ctx.s.j_max.unwrap_or(def.j_max),
        width: ctx.s.width.unwrap_or(def.width),
        analysis: ctx.analysis(),
        ..def
    };
    let rows_e: Vec<TraceRow> = es.par_iter().map(|&e| trace_row(e, &opts)).collect::<ere_core::Result<_>>()?;
    let mut rows = Vec::new();
    for r in &rows_e {
        for g in &r.gaps {
            eprintln!("{}", serde_json::json!({ "warning": { "class": "bracket", "message": g } }));
        }
        if !r.ordering_holds() {
            let msg = format!("e = {}: curve ordering violated", r.e);
            eprintln!("{}", serde_json::json!({ "warning": { "class": "ordering", "message": msg } }));
        }
        rows.extend(curve_rows(r));
    }
    ctx.emit(&rows)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify

#[derive(Serialize)]
struct VerifyRow {
    id: u8,
    title: String,
    outcome: &'static str,
    elapsed_s: Option<f64>,
    budget_s: f64,
    failed_checks: String,
    skipped: String,
}

fn cmd_verify(ctx: &Ctx) -> Outcome {
    let level = match ctx.s.level.as_deref().unwrap_or("fast") {
        "fast" => Level::Fast,
        "full" => Level::Full,
        other => return Err(Failure::usage(format!("unknown level '{other}' (expected fast or full)"))),
    };
    let ids: Vec<u8> = ctx.s.criteria.clone().unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
    if let Some(bad) = ids.iter().find(|&&i| !(1..=12).contains(&i)) {
        return Err(Failure::usage(format!("no criterion {bad}")));
    }
    let mut reports = Vec::new();
    let csv_like = ctx.s.format.is_some() || ctx.s.out.is_some();
    for &id in &ids {
        let r = run_criterion(id, level);
        if !csv_like {
            println!("{}", r.line());
        }
        reports.push(r);
    }
    if csv_like {
        let rows: Vec<VerifyRow> = reports
            .iter()
            .map(|r| VerifyRow {
                id: r.id,
                title: r.title.clone(),
                outcome: r.outcome.as_str(),
                elapsed_s: ctx.timing.then(|| round12(r.elapsed_s)),
                budget_s: r.budget_s,
                failed_checks: r
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| format!("{}: {}", c.label, c.detail))
                    .collect::<Vec<_>>()
                    .join("; "),
                skipped: r.skipped.join("; "),
            })
            .collect();
        ctx.emit(&rows)?;
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed()).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "{}",
            serde_json::json!({ "error": { "class": "verify", "code": EXIT_VERIFY, "message": format!("failed criteria: {failed:?}") } })
        );
        Ok(ExitCode::from(EXIT_VERIFY))
    }
}
