//! Central-configuration data and the reduced linear systems built from it:
//! the essential system in true anomaly, its Sturm form, the blow-up phase
//! plane with its heteroclinics, and the linearization at `P±`.

use std::f64::consts::SQRT_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{j_matrix, jj, symplectic_sum, LagrangianFrame, Mat};

const SYM_TOL: f64 = 1e-12;
const BRAKE_TOL: f64 = 1e-10;
/// Eigenvalues of `R` with modulus below this count as zero.
pub const ZERO_EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family", content = "param")]
pub enum Family {
    Euler(f64),
    Lagrange(f64),
    Ring3(f64),
    Custom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Euler(_) => "euler",
            Family::Lagrange(_) => "lagrange",
            Family::Ring3(_) => "ring3",
            Family::Custom => "custom",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            Family::Euler(p) | Family::Lagrange(p) | Family::Ring3(p) => Some(p),
            Family::Custom => None,
        }
    }

    /// Same family at another parameter value.
    pub fn with_param(&self, p: f64) -> Family {
        match self {
            Family::Euler(_) => Family::Euler(p),
            Family::Lagrange(_) => Family::Lagrange(p),
            Family::Ring3(_) => Family::Ring3(p),
            Family::Custom => Family::Custom,
        }
    }

    pub fn parse(name: &str, p: f64) -> Result<Family> {
        match name.to_ascii_lowercase().as_str() {
            "euler" => Ok(Family::Euler(p)),
            "lagrange" => Ok(Family::Lagrange(p)),
            "ring3" | "1+3" | "ring" => Ok(Family::Ring3(p)),
            other => Err(Error::Domain(format!("unknown family '{other}'"))),
        }
    }
}

/// Regularized Hessian `R` of a central configuration, optionally with a
/// brake symmetry `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralConfig {
    r: Mat,
    n: Option<Mat>,
    family: Family,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat,
}

impl CentralConfig {
    pub fn custom(r: Mat, n: Option<Mat>) -> Result<Self> {
        Self::assemble(r, n, Family::Custom)
    }

    fn assemble(r: Mat, n: Option<Mat>, family: Family) -> Result<Self> {
        let k = r.nrows();
        if k == 0 || r.ncols() != k {
            return Err(Error::MalformedInput("R must be square and non-empty".into()));
        }
        if (&r - r.transpose()).amax() > SYM_TOL * (1.0 + r.amax()) {
            return Err(Error::SymmetryViolation("R is not symmetric".into()));
        }
        if let Some(n) = &n {
            check_brake(&r, n)?;
        }
        let eig = r.clone().symmetric_eigen();
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = Mat::from_fn(k, k, |i, j| eig.eigenvectors[(i, idx[j])]);
        Ok(Self { r, n, family, eigenvalues, eigenvectors })
    }

    pub fn k(&self) -> usize {
        self.r.nrows()
    }

    pub fn r(&self) -> &Mat {
        &self.r
    }

    pub fn n(&self) -> Option<&Mat> {
        self.n.as_ref()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Eigenvalues of `R` in increasing order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors of `R`, columns ordered like
    /// [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> &Mat {
        &self.eigenvectors
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Number of negative eigenvalues, `φ(R)`.
    pub fn phi(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < -ZERO_EIG_TOL).count()
    }

    pub fn nondegenerate(&self) -> bool {
        self.eigenvalues.iter().all(|l| l.abs() > ZERO_EIG_TOL)
    }

    /// `λ₁(R) > −1/8`: both equilibria `P±` are hyperbolic.
    pub fn hyperbolic_equilibria(&self) -> bool {
        self.lambda1() > -0.125
    }

    /// `η_j = √(1/8 + λ_j)`; NaN where the radicand is negative.
    pub fn eta(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| (0.125 + l).sqrt()).collect()
    }

    /// `N̂ = diag(N, −N)`.
    pub fn n_hat(&self) -> Result<Mat> {
        let n = self
            .n
            .as_ref()
            .ok_or_else(|| Error::BrakeSymmetry("configuration carries no N".into()))?;
        let k = self.k();
        let mut h = Mat::zeros(2 * k, 2 * k);
        h.view_mut((0, 0), (k, k)).copy_from(n);
        h.view_mut((k, k), (k, k)).copy_from(&(-n));
        Ok(h)
    }

    /// `(V⁺(N̂), V⁻(N̂))`, the `±1` eigenspaces of `N̂`.
    pub fn brake_subspaces(&self) -> Result<(LagrangianFrame, LagrangianFrame)> {
        let h = self.n_hat()?;
        let eig = h.symmetric_eigen();
        let n = eig.eigenvalues.len();
        let pick = |sign: f64| -> Result<LagrangianFrame> {
            let cols: Vec<_> = (0..n)
                .filter(|&i| (eig.eigenvalues[i] - sign).abs() < 1e-8)
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect();
            if cols.len() != n / 2 {
                return Err(Error::BrakeSymmetry("N̂ eigenspaces are not half-dimensional".into()));
            }
            let mut z = Mat::from_columns(&cols);
            // canonical orientation: largest-magnitude entry of each column positive
            for mut c in z.column_iter_mut() {
                let i = c.iamax();
                if c[i] < 0.0 {
                    c.neg_mut();
                }
            }
            LagrangianFrame::new(z)
        };
        Ok((pick(1.0)?, pick(-1.0)?))
    }
}

fn check_brake(r: &Mat, n: &Mat) -> Result<()> {
    let k = r.nrows();
    if n.shape() != (k, k) {
        return Err(Error::SymmetryViolation("N has the wrong shape".into()));
    }
    let id = Mat::identity(k, k);
    let j = jj(k);
    let checks = [
        ("N is not symmetric", (n - n.transpose()).norm()),
        ("N^2 != I", (n * n - id).norm()),
        ("N J + J N != 0", (n * &j + &j * n).norm()),
        ("R N != N R", (r * n - n * r).norm()),
    ];
    for (msg, v) in checks {
        if v > BRAKE_TOL {
            return Err(Error::SymmetryViolation(format!("{msg} (residual {v:e})")));
        }
    }
    Ok(())
}

fn brake_n2() -> Mat {
    Mat::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]))
}

/// `(λ₊, λ₋)` of the 1+3-gon blocks `𝒟∓`.
pub fn ring3_lambda(m_c: f64) -> (f64, f64) {
    let s3 = 3f64.sqrt();
    let base = s3 * m_c + (3.0 * s3 + 1.0) / 2.0;
    let rad = (27.0 * (m_c * m_c + 3.0 * m_c) + ((3.0 * s3 - 1.0) / 2.0).powi(2)).sqrt();
    let pre = 0.5 / (1.0 + s3 * m_c);
    (pre * (base + rad), pre * (base - rad))
}

/// The 2×2 block `𝒟∓` (upper sign for `𝒟₋`).
pub fn ring3_block(m_c: f64, minus: bool) -> Mat {
    let s3 = 3f64.sqrt();
    let c = 3.0 * (3.0 * m_c * (3.0 + m_c)).sqrt() / (2.0 * (1.0 + s3 * m_c));
    let d = s3 * (3.0 + m_c) / (2.0 * (1.0 + s3 * m_c));
    let off = if minus { -c } else { c };
    Mat::from_row_slice(2, 2, &[0.5, off, off, d])
}

/// `m_c` where `λ₋` vanishes.
pub fn ring3_mc_zero() -> f64 {
    3f64.sqrt() / 24.0
}

/// `m_c` where `λ₋ = −1`.
pub fn ring3_mc_minus_one() -> f64 {
    (81.0 + 64.0 * 3f64.sqrt()) / 249.0
}

/// Evaluates the family formula for `R` without checking the physical
/// parameter range; only mathematical validity is enforced.
pub fn family_config(family: Family) -> Result<CentralConfig> {
    match family {
        Family::Euler(d) => {
            let r = Mat::from_diagonal(&DVector::from_vec(vec![-d, 2.0 * d + 3.0]));
            CentralConfig::assemble(r, Some(brake_n2()), family)
        }
        Family::Lagrange(b) => {
            if b > 9.0 {
                return Err(Error::Domain(format!(
                    "lagrange beta = {b} > 9 gives complex eigenvalues"
                )));
            }
            let s = (9.0 - b).sqrt();
            let r = Mat::from_diagonal(&DVector::from_vec(vec![(3.0 + s) / 2.0, (3.0 - s) / 2.0]));
            CentralConfig::assemble(r, Some(brake_n2()), family)
        }
        Family::Ring3(m) => {
            if m < 0.0 {
                return Err(Error::Domain(format!("ring3 m_c = {m} < 0")));
            }
            let d = symplectic_sum(&ring3_block(m, true), &ring3_block(m, false))?;
            CentralConfig::assemble(Mat::identity(4, 4) + d, None, family)
        }
        Family::Custom => Err(Error::Domain("custom configs need an explicit R".into())),
    }
}

/// Builds a configuration from a named family, validating its parameter
/// range (`δ ≥ 0`, `0 < β ≤ 9`, `m_c ≥ 0`).
pub fn build_config(family: Family) -> Result<CentralConfig> {
    match family {
        Family::Euler(d) if !(d >= 0.0) => {
            return Err(Error::Domain(format!("euler delta = {d} must be >= 0")))
        }
        Family::Lagrange(b) if !(b > 0.0 && b <= 9.0) => {
            return Err(Error::Domain(format!("lagrange beta = {b} outside (0, 9]")))
        }
        Family::Ring3(m) if !(m >= 0.0) => {
            return Err(Error::Domain(format!("ring3 m_c = {m} must be >= 0")))
        }
        _ => {}
    }
    family_config(family)
}

pub fn essential_b(t: f64, cfg: &CentralConfig, e: f64) -> Result<Mat> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!(
            "eccentricity {e} outside [0, 1); use the blow-up system"
        )));
    }
    Ok(essential_b_unchecked(t, cfg, e))
}

/// `[[I, −𝕁], [𝕁, I − R/(1 + e cos t)]]`.
pub fn essential_b_unchecked(t: f64, cfg: &CentralConfig, e: f64) -> Mat {
    let k = cfg.k();
    let j = jj(k);
    let mut b = Mat::zeros(2 * k, 2 * k);
    b.view_mut((0, 0), (k, k)).fill_with_identity();
    b.view_mut((0, k), (k, k)).copy_from(&(-&j));
    b.view_mut((k, 0), (k, k)).copy_from(&j);
    let lr = Mat::identity(k, k) - cfg.r() / (1.0 + e * t.cos());
    b.view_mut((k, k), (k, k)).copy_from(&lr);
    b
}

/// Coefficients of `−(P ẏ + Q y)˙ + Qᵀ ẏ + R_s(t) y = 0` equivalent to the
/// essential system: `P = I`, `Q = 𝕁` and `R_s = R/(1+e cos t) − I + 𝕁ᵀ𝕁`
/// (the last two terms cancel for even `k`).
#[derive(Debug, Clone)]
pub struct SturmCoeffs {
    cfg: CentralConfig,
    e: f64,
}

impl SturmCoeffs {
    pub fn p(&self) -> Mat {
        Mat::identity(self.cfg.k(), self.cfg.k())
    }

    pub fn q(&self) -> Mat {
        jj(self.cfg.k())
    }

    pub fn potential(&self, t: f64) -> Mat {
        let k = self.cfg.k();
        let j = jj(k);
        self.cfg.r() / (1.0 + self.e * t.cos()) - Mat::identity(k, k) + j.transpose() * j
    }

    /// `[[P⁻¹, −P⁻¹Q], [−QᵀP⁻¹, QᵀP⁻¹Q − R_s]]`.
    pub fn assemble_b(&self, t: f64) -> Mat {
        let k = self.cfg.k();
        let pinv = self.p().try_inverse().expect("P = I is invertible");
        let q = self.q();
        let mut b = Mat::zeros(2 * k, 2 * k);
        b.view_mut((0, 0), (k, k)).copy_from(&pinv);
        b.view_mut((0, k), (k, k)).copy_from(&(-&pinv * &q));
        b.view_mut((k, 0), (k, k)).copy_from(&(-q.transpose() * &pinv));
        b.view_mut((k, k), (k, k)).copy_from(&(q.transpose() * &pinv * &q - self.potential(t)));
        b
    }
}

pub fn sturm_coeffs(cfg: &CentralConfig, e: f64) -> Result<SturmCoeffs> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!("eccentricity {e} outside [0, 1)")));
    }
    Ok(SturmCoeffs { cfg: cfg.clone(), e })
}

/// A point `(q, Q)` of the blow-up phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUpPoint {
    pub q: f64,
    pub big_q: f64,
}

impl BlowUpPoint {
    pub fn new(q: f64, big_q: f64) -> Self {
        Self { q, big_q }
    }

    /// `E = q²(Q²/2 + q²/2 − 1)`.
    pub fn energy(&self) -> f64 {
        let q2 = self.q * self.q;
        q2 * (0.5 * self.big_q * self.big_q + 0.5 * q2 - 1.0)
    }
}

/// `(q', Q') = (−qQ/2, Q²/2 + q² − 1)`.
pub fn blowup_rhs(p: BlowUpPoint) -> (f64, f64) {
    (-0.5 * p.q * p.big_q, 0.5 * p.big_q * p.big_q + p.q * p.q - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeteroclinicSide {
    L0,
    LPlus,
}

/// Explicit heteroclinic solutions on the level set `E = 0`:
/// `l₀: (0, −√2 tanh(√2τ/2))`, `l₊: (√2 sech(√2τ/2), √2 tanh(√2τ/2))`.
pub fn heteroclinic(side: HeteroclinicSide, tau: f64) -> BlowUpPoint {
    let c = SQRT_2 * tau / 2.0;
    match side {
        HeteroclinicSide::L0 => BlowUpPoint::new(0.0, -SQRT_2 * c.tanh()),
        HeteroclinicSide::LPlus => BlowUpPoint::new(SQRT_2 / c.cosh(), SQRT_2 * c.tanh()),
    }
}

/// `B̂ = [[I, (Q/4)I − q𝕁], [(Q/4)I + q𝕁, q²I − R]]`.
pub fn hat_b(p: BlowUpPoint, cfg: &CentralConfig) -> Mat {
    let k = cfg.k();
    let id = Mat::identity(k, k);
    let j = jj(k);
    let mut b = Mat::zeros(2 * k, 2 * k);
    b.view_mut((0, 0), (k, k)).fill_with_identity();
    b.view_mut((0, k), (k, k)).copy_from(&(&id * (p.big_q / 4.0) - &j * p.q));
    b.view_mut((k, 0), (k, k)).copy_from(&(&id * (p.big_q / 4.0) + &j * p.q));
    b.view_mut((k, k), (k, k)).copy_from(&(&id * (p.q * p.q) - cfg.r()));
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqSign {
    Plus,
    Minus,
}

impl EqSign {
    pub fn point(self) -> BlowUpPoint {
        match self {
            EqSign::Plus => BlowUpPoint::new(0.0, SQRT_2),
            EqSign::Minus => BlowUpPoint::new(0.0, -SQRT_2),
        }
    }
}

/// Linearization at `P±` with its unstable and stable Lagrangian frames.
#[derive(Debug, Clone)]
pub struct EquilibriumData {
    pub sign: EqSign,
    /// `D± = J B̂(P±)`.
    pub d: Mat,
    pub eta: Vec<f64>,
    pub v_u: LagrangianFrame,
    pub v_s: LagrangianFrame,
    /// Columns: unstable eigenvectors then stable ones, so that
    /// `P⁻¹ D P = diag(η, −η)`.
    pub p_diag: Mat,
    pub hyperbolic: bool,
}

pub fn equilibrium_data(cfg: &CentralConfig, sign: EqSign) -> Result<EquilibriumData> {
    if !cfg.hyperbolic_equilibria() {
        return Err(Error::NonHyperbolic(cfg.lambda1()));
    }
    let k = cfg.k();
    let d = j_matrix(k) * hat_b(sign.point(), cfg);
    let eta = cfg.eta();
    let shift = match sign {
        EqSign::Minus => SQRT_2 / 4.0,
        EqSign::Plus => -SQRT_2 / 4.0,
    };
    let p = cfg.eigenvectors();
    let mut pd = Mat::zeros(2 * k, 2 * k);
    for j in 0..k {
        let au = shift + eta[j];
        let as_ = shift - eta[j];
        for i in 0..k {
            pd[(i, j)] = au * p[(i, j)];
            pd[(k + i, j)] = p[(i, j)];
            pd[(i, k + j)] = as_ * p[(i, j)];
            pd[(k + i, k + j)] = p[(i, j)];
        }
    }
    let v_u = LagrangianFrame::new(pd.columns(0, k).into_owned())?;
    let v_s = LagrangianFrame::new(pd.columns(k, k).into_owned())?;
    Ok(EquilibriumData { sign, d, eta, v_u, v_s, p_diag: pd, hyperbolic: true })
}

/// `(q, Q)` at true anomaly `t` on the orbit of eccentricity `e`:
/// `q = √(1 + e cos t)`, `Q = −2 dq/dt = e sin t / q`.
pub fn orbit_point(e: f64, t: f64) -> Result<BlowUpPoint> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!("eccentricity {e} outside [0, 1)")));
    }
    let q = (1.0 + e * t.cos()).sqrt();
    Ok(BlowUpPoint::new(q, e * t.sin() / q))
}

/// Start of the orbit at `t = 0` together with its energy `−ê`.
pub fn orbit_initialization(e: f64) -> Result<(BlowUpPoint, f64)> {
    let p = orbit_point(e, 0.0)?;
    Ok((BlowUpPoint::new(p.q, 0.0), -(1.0 - e * e) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_data() {
        let c = build_config(Family::Euler(0.1)).unwrap();
        assert_eq!(c.r()[(0, 0)], -0.1);
        assert!((c.r()[(1, 1)] - 3.2).abs() < 1e-15);
        assert_eq!(c.lambda1(), -0.1);
        assert_eq!(c.phi(), 1);
        assert!(c.hyperbolic_equilibria());
        assert!(build_config(Family::Euler(-0.1)).is_err());
        assert!(family_config(Family::Euler(-0.1)).is_ok());
    }

    #[test]
    fn lagrange_data() {
        let c = build_config(Family::Lagrange(9.0)).unwrap();
        assert_eq!(c.eigenvalues(), &[1.5, 1.5]);
        assert_eq!(c.phi(), 0);
        assert!(matches!(build_config(Family::Lagrange(9.5)), Err(Error::Domain(_))));
    }

    #[test]
    fn ring3_threshold() {
        let c = build_config(Family::Ring3(ring3_mc_zero())).unwrap();
        assert!((c.lambda1() - 1.0).abs() < 1e-12);
        let (lp, lm) = ring3_lambda(0.05);
        let blk = ring3_block(0.05, true).symmetric_eigenvalues();
        let mut b: Vec<f64> = blk.iter().copied().collect();
        b.sort_by(f64::total_cmp);
        assert!((b[0] - lm).abs() < 1e-12 && (b[1] - lp).abs() < 1e-12);
    }

    #[test]
    fn bad_brake_rejected() {
        let r = Mat::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let n = Mat::identity(2, 2);
        assert!(matches!(CentralConfig::custom(r, Some(n)), Err(Error::SymmetryViolation(_))));
    }

    #[test]
    fn essential_b_values() {
        let c = build_config(Family::Euler(0.1)).unwrap();
        let b = essential_b(0.0, &c, 0.5).unwrap();
        assert!((b[(2, 2)] - (1.0 + 0.1 / 1.5)).abs() < 1e-15);
        assert!((b[(3, 3)] - (1.0 - 3.2 / 1.5)).abs() < 1e-15);
        assert!(essential_b(0.0, &c, 1.0).is_err());
        let b0 = essential_b(0.3, &c, 0.0).unwrap();
        assert_eq!(b0, essential_b(2.0, &c, 0.0).unwrap());
    }

    #[test]
    fn blowup_points() {
        for s in [EqSign::Plus, EqSign::Minus] {
            let (a, b) = blowup_rhs(s.point());
            assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
        }
        assert_eq!(blowup_rhs(BlowUpPoint::new(1.0, 0.0)), (0.0, 0.0));
        assert_eq!(blowup_rhs(BlowUpPoint::new(0.0, 0.0)), (0.0, -1.0));
        let p = heteroclinic(HeteroclinicSide::LPlus, 0.0);
        assert!((p.q - SQRT_2).abs() < 1e-15 && p.big_q == 0.0);
        let p = heteroclinic(HeteroclinicSide::LPlus, 80.0);
        assert!(p.q < 1e-20 && (p.big_q - SQRT_2).abs() < 1e-15);
        assert_eq!(heteroclinic(HeteroclinicSide::L0, 0.0), BlowUpPoint::new(0.0, 0.0));
    }

    #[test]
    fn orbit_start() {
        let (p, en) = orbit_initialization(0.0).unwrap();
        assert_eq!((p.q, p.big_q, en), (1.0, 0.0, -0.5));
        let (p, en) = orbit_initialization(0.8).unwrap();
        assert!((p.q - 1.8f64.sqrt()).abs() < 1e-15);
        assert!((en + 0.18).abs() < 1e-15);
        assert!((p.energy() - en).abs() < 1e-15);
        assert!(orbit_initialization(1.0).is_err());
    }

    #[test]
    fn equilibrium_frames() {
        let c = CentralConfig::custom(Mat::from_element(1, 1, 0.5), None).unwrap();
        let eq = equilibrium_data(&c, EqSign::Minus).unwrap();
        let eta = 0.625f64.sqrt();
        assert!((eq.eta[0] - eta).abs() < 1e-15);
        let z = eq.v_u.columns();
        assert!((z[(0, 0)] / z[(1, 0)] - (SQRT_2 / 4.0 + eta)).abs() < 1e-12);
        let bad = CentralConfig::custom(Mat::from_element(1, 1, -0.2), None).unwrap();
        assert!(matches!(equilibrium_data(&bad, EqSign::Minus), Err(Error::NonHyperbolic(_))));
    }
}
