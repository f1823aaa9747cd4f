//! Real symplectic linear algebra: the standard form, Lagrangian frames,
//! the gap metric, symplectic sums and graph embeddings.

use nalgebra::DMatrix;
use nalgebra::Complex;

type Complex64 = Complex<f64>;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Default tolerance on `‖MᵀJM − J‖`.
pub const TOL_SYMP: f64 = 1e-8;
/// Default relative rank tolerance for frames.
pub const RANK_TOL: f64 = 1e-10;
/// Isotropy tolerance for orthonormalized frames.
pub const TOL_ISO: f64 = 1e-8;

/// `[[0, -I], [I, 0]]` of size `2k`.
pub fn j_matrix(k: usize) -> Mat {
    let mut j = Mat::zeros(2 * k, 2 * k);
    for i in 0..k {
        j[(i, k + i)] = -1.0;
        j[(k + i, i)] = 1.0;
    }
    j
}

/// Block diagonal `diag(J₂, …, J₂)` of size `k`. For odd `k` the last
/// diagonal entry is zero, so `k = 1` gives the zero matrix.
pub fn jj(k: usize) -> Mat {
    let mut m = Mat::zeros(k, k);
    for b in 0..k / 2 {
        m[(2 * b, 2 * b + 1)] = -1.0;
        m[(2 * b + 1, 2 * b)] = 1.0;
    }
    m
}

/// `e^{θJ} = cos θ I + sin θ J`.
pub fn rotation(k: usize, theta: f64) -> Mat {
    Mat::identity(2 * k, 2 * k) * theta.cos() + j_matrix(k) * theta.sin()
}

pub fn symplectic_residual(m: &Mat) -> f64 {
    let k = m.nrows() / 2;
    let j = j_matrix(k);
    (m.transpose() * &j * m - j).norm()
}

/// Applies `M ← M(I + ½ J E)` with `E = MᵀJM − J`, a first-order
/// projection back onto Sp(2k). Returns the residual before correction.
pub fn symplectic_correct(m: &mut Mat) -> f64 {
    let k = m.nrows() / 2;
    let j = j_matrix(k);
    let e = m.transpose() * &j * &*m - &j;
    let res = e.norm();
    let corr = Mat::identity(2 * k, 2 * k) + &j * &e * 0.5;
    *m = &*m * corr;
    res
}

/// A `2k × 2k` matrix checked against `MᵀJM = J`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    m: Mat,
    k: usize,
}

impl SymplecticMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        Self::with_tol(m, TOL_SYMP)
    }

    pub fn with_tol(m: Mat, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::MalformedInput(format!(
                "expected an even square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let res = symplectic_residual(&m);
        if !(res <= tol * (1.0 + m.norm_squared())) {
            return Err(Error::InvalidInput(format!(
                "matrix is not symplectic (residual {res:e})"
            )));
        }
        let k = m.nrows() / 2;
        Ok(Self { m, k })
    }

    pub fn identity(k: usize) -> Self {
        Self { m: Mat::identity(2 * k, 2 * k), k }
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn into_matrix(self) -> Mat {
        self.m
    }

    pub fn half_dim(&self) -> usize {
        self.k
    }

    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.m)
    }
}

pub fn standard_j(k: usize) -> Result<SymplecticMatrix> {
    if k == 0 {
        return Err(Error::MalformedInput("k must be positive".into()));
    }
    Ok(SymplecticMatrix { m: j_matrix(k), k })
}

/// The symplectic sum `M1 ⋄ M2`: with `Mi = [[Ai, Bi], [Ci, Di]]` the result
/// is `[[A1, 0, B1, 0], [0, A2, 0, B2], [C1, 0, D1, 0], [0, C2, 0, D2]]`.
pub fn symplectic_sum(m1: &Mat, m2: &Mat) -> Result<Mat> {
    for m in [m1, m2] {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
            return Err(Error::MalformedInput(format!(
                "symplectic sum needs even square blocks, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let (a, b) = (m1.nrows() / 2, m2.nrows() / 2);
    let n = a + b;
    let mut out = Mat::zeros(2 * n, 2 * n);
    // row/col map: first factor occupies (0..a) and (n..n+a)
    let idx1 = |i: usize| if i < a { i } else { n + (i - a) };
    let idx2 = |i: usize| if i < b { a + i } else { n + a + (i - b) };
    for i in 0..2 * a {
        for j in 0..2 * a {
            out[(idx1(i), idx1(j))] = m1[(i, j)];
        }
    }
    for i in 0..2 * b {
        for j in 0..2 * b {
            out[(idx2(i), idx2(j))] = m2[(i, j)];
        }
    }
    Ok(out)
}

/// Thin QR with a positive diagonal in `R`, which makes the result unique
/// and keeps frame orientation continuous along a path.
pub fn orthonormalize(z: &Mat) -> Mat {
    let qr = z.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `X + iY` for a frame `[X; Y]`.
pub fn unitary_of(z: &Mat) -> CMat {
    let k = z.nrows() / 2;
    CMat::from_fn(k, z.ncols(), |i, j| Complex64::new(z[(i, j)], z[(k + i, j)]))
}

/// Orthonormal column frame of a Lagrangian subspace of `ℝ^{2k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    z: Mat,
    k: usize,
}

impl LagrangianFrame {
    pub fn new(columns: Mat) -> Result<Self> {
        Self::with_tol(columns, RANK_TOL)
    }

    pub fn with_tol(columns: Mat, rank_tol: f64) -> Result<Self> {
        let (n, m) = columns.shape();
        if n % 2 != 0 || n != 2 * m || m == 0 {
            return Err(Error::InvalidFrame(format!(
                "expected a 2k x k frame, got {n}x{m}"
            )));
        }
        let mut c = columns;
        for mut col in c.column_iter_mut() {
            let nrm = col.norm();
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(Error::InvalidFrame("zero or non-finite column".into()));
            }
            col /= nrm;
        }
        let sv = c.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if smin <= rank_tol * smax {
            return Err(Error::InvalidFrame(format!(
                "rank deficient (smallest singular value {smin:e})"
            )));
        }
        let z = orthonormalize(&c);
        let iso = (z.transpose() * j_matrix(m) * &z).norm();
        if iso > TOL_ISO {
            return Err(Error::InvalidFrame(format!("not isotropic (residual {iso:e})")));
        }
        Ok(Self { z, k: m })
    }

    /// Wraps columns that are already orthonormal and Lagrangian.
    pub(crate) fn from_orthonormal(z: Mat) -> Self {
        let k = z.ncols();
        Self { z, k }
    }

    /// `V_d = ℝ^k ⊕ 0`.
    pub fn dirichlet(k: usize) -> Self {
        let mut z = Mat::zeros(2 * k, k);
        for i in 0..k {
            z[(i, i)] = 1.0;
        }
        Self { z, k }
    }

    /// `V_n = 0 ⊕ ℝ^k`.
    pub fn neumann(k: usize) -> Self {
        let mut z = Mat::zeros(2 * k, k);
        for i in 0..k {
            z[(k + i, i)] = 1.0;
        }
        Self { z, k }
    }

    /// Frame spanned by the listed standard basis vectors.
    pub fn coordinate(k: usize, axes: &[usize]) -> Result<Self> {
        let mut z = Mat::zeros(2 * k, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            if a >= 2 * k {
                return Err(Error::InvalidFrame(format!("axis {a} out of range")));
            }
            z[(a, j)] = 1.0;
        }
        Self::new(z)
    }

    /// `{(x, A x)}` for symmetric `A`.
    pub fn graph(a: &Mat) -> Result<Self> {
        let k = a.nrows();
        let mut z = Mat::zeros(2 * k, k);
        z.view_mut((0, 0), (k, k)).fill_with_identity();
        z.view_mut((k, 0), (k, k)).copy_from(a);
        Self::new(z)
    }

    pub fn columns(&self) -> &Mat {
        &self.z
    }

    pub fn half_dim(&self) -> usize {
        self.k
    }

    /// Image `M·F`.
    pub fn transform(&self, m: &Mat) -> Result<Self> {
        if m.ncols() != self.z.nrows() || m.nrows() != self.z.nrows() {
            return Err(Error::MalformedInput("dimension mismatch".into()));
        }
        Self::new(m * &self.z)
    }

    pub fn projector(&self) -> Mat {
        &self.z * self.z.transpose()
    }

    pub fn unitary(&self) -> CMat {
        unitary_of(&self.z)
    }
}

/// Direct sum `L1 ⊕ L2 ⊂ ℝ^{2a} ⊕ ℝ^{2b}` in the coordinates used by
/// [`symplectic_sum`].
pub fn frame_sum(f1: &LagrangianFrame, f2: &LagrangianFrame) -> LagrangianFrame {
    let (a, b) = (f1.k, f2.k);
    let n = a + b;
    let mut z = Mat::zeros(2 * n, n);
    for i in 0..a {
        for j in 0..a {
            z[(i, j)] = f1.z[(i, j)];
            z[(n + i, j)] = f1.z[(a + i, j)];
        }
    }
    for i in 0..b {
        for j in 0..b {
            z[(a + i, a + j)] = f2.z[(i, j)];
            z[(n + a + i, a + j)] = f2.z[(b + i, j)];
        }
    }
    LagrangianFrame::from_orthonormal(z)
}

fn check_same_dim(f1: &LagrangianFrame, f2: &LagrangianFrame) -> Result<()> {
    if f1.k != f2.k {
        return Err(Error::MalformedInput(format!(
            "frames live in different spaces (k = {} vs {})",
            f1.k, f2.k
        )));
    }
    Ok(())
}

/// `‖P₁ − P₂‖₂` for the orthogonal projectors.
pub fn subspace_gap(f1: &LagrangianFrame, f2: &LagrangianFrame) -> Result<f64> {
    check_same_dim(f1, f2)?;
    let d = f1.projector() - f2.projector();
    // symmetric: spectral norm = max |eigenvalue|
    let ev = d.symmetric_eigenvalues();
    Ok(ev.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Dimension of `F1 ∩ F2`, counted as the number of singular values of the
/// stacked frame `[Z1 Z2]` below `tol` times the largest one.
pub fn intersection_dim(f1: &LagrangianFrame, f2: &LagrangianFrame, tol: f64) -> usize {
    if f1.k != f2.k {
        return 0;
    }
    let n = f1.z.nrows();
    let mut s = Mat::zeros(n, 2 * f1.k);
    s.view_mut((0, 0), (n, f1.k)).copy_from(&f1.z);
    s.view_mut((0, f1.k), (n, f2.k)).copy_from(&f2.z);
    let sv = s.singular_values();
    let smax = sv.max();
    sv.iter().filter(|&&v| v < tol * smax).count()
}

/// `diag(−J, J)`, the form `−ω ⊕ ω` on `ℝ^{2k} ⊕ ℝ^{2k}`.
pub fn doubled_form(k: usize) -> Mat {
    let j = j_matrix(k);
    let mut f = Mat::zeros(4 * k, 4 * k);
    f.view_mut((0, 0), (2 * k, 2 * k)).copy_from(&(-&j));
    f.view_mut((2 * k, 2 * k), (2 * k, 2 * k)).copy_from(&j);
    f
}

/// Orthogonal `T` with `T diag(−J, J) Tᵀ = J_{4k}`; it maps
/// `(x₁, y₁, x₂, y₂) ↦ (x₁, x₂, −y₁, y₂)`.
pub fn doubled_to_standard(k: usize) -> Mat {
    let mut t = Mat::zeros(4 * k, 4 * k);
    for i in 0..k {
        t[(i, i)] = 1.0;
        t[(k + i, 2 * k + i)] = 1.0;
        t[(2 * k + i, k + i)] = -1.0;
        t[(3 * k + i, 3 * k + i)] = 1.0;
    }
    t
}

/// Lagrangian subspace of `(ℝ^{2k} ⊕ ℝ^{2k}, −ω ⊕ ω)`, stored in the
/// native `(x₁, y₁, x₂, y₂)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledFrame {
    z: Mat,
    k: usize,
}

impl DoubledFrame {
    pub fn new(columns: Mat) -> Result<Self> {
        let (n, m) = columns.shape();
        if n % 4 != 0 || n != 2 * m {
            return Err(Error::InvalidFrame(format!(
                "expected a 4k x 2k frame, got {n}x{m}"
            )));
        }
        let k = n / 4;
        let z = orthonormalize(&columns);
        let res = isotropy_residual(&z, &doubled_form(k));
        if res > TOL_ISO {
            return Err(Error::InvalidFrame(format!(
                "not isotropic for -w+w (residual {res:e})"
            )));
        }
        Ok(Self { z, k })
    }

    /// `Λ₁ ⊕ Λ₂ = {(u, v) : u ∈ Λ₁, v ∈ Λ₂}`.
    pub fn direct_sum(l1: &LagrangianFrame, l2: &LagrangianFrame) -> Result<Self> {
        if l1.k != l2.k {
            return Err(Error::MalformedInput("summands must have equal dimension".into()));
        }
        let n = 2 * l1.k;
        let mut z = Mat::zeros(2 * n, n);
        z.view_mut((0, 0), (n, l1.k)).copy_from(&l1.z);
        z.view_mut((n, l1.k), (n, l2.k)).copy_from(&l2.z);
        Self::new(z)
    }

    pub fn columns(&self) -> &Mat {
        &self.z
    }

    pub fn half_dim(&self) -> usize {
        self.k
    }

    pub fn isotropy_residual(&self) -> f64 {
        isotropy_residual(&self.z, &doubled_form(self.k))
    }

    /// The same subspace as a Lagrangian frame of the standard `ℝ^{4k}`.
    pub fn to_standard(&self) -> LagrangianFrame {
        LagrangianFrame::from_orthonormal(doubled_to_standard(self.k) * &self.z)
    }
}

fn isotropy_residual(z: &Mat, form: &Mat) -> f64 {
    (z.transpose() * form * z).norm()
}

/// `Gr(sign·M) = {(x, sign·M x)}`.
pub fn graph_embed(m: &SymplecticMatrix, sign: f64) -> Result<DoubledFrame> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidInput("sign must be +1 or -1".into()));
    }
    let n = 2 * m.k;
    let mut z = Mat::zeros(2 * n, n);
    z.view_mut((0, 0), (n, n)).fill_with_identity();
    z.view_mut((n, 0), (n, n)).copy_from(&(m.matrix() * sign));
    DoubledFrame::new(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_basics() {
        let j1 = standard_j(1).unwrap();
        assert_eq!(j1.matrix(), &Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        let j2 = j_matrix(2);
        assert!((&j2 * &j2 + Mat::identity(4, 4)).norm() == 0.0);
        let j3 = j_matrix(3);
        assert_eq!(j3.transpose(), -j3);
        assert!(standard_j(0).is_err());
    }

    #[test]
    fn jj_shapes() {
        assert_eq!(jj(1), Mat::zeros(1, 1));
        let m = jj(4);
        assert_eq!(m[(0, 1)], -1.0);
        assert_eq!(m[(3, 2)], 1.0);
        assert_eq!(m[(1, 2)], 0.0);
    }

    #[test]
    fn sum_of_identities() {
        let s = symplectic_sum(&Mat::identity(2, 2), &Mat::identity(2, 2)).unwrap();
        assert_eq!(s, Mat::identity(4, 4));
        assert!(symplectic_sum(&Mat::identity(3, 3), &Mat::identity(2, 2)).is_err());
    }

    #[test]
    fn sum_is_symplectic() {
        let j2 = j_matrix(1);
        let r = rotation(1, 1.0);
        let m = symplectic_sum(&(&j2 * r), &j2).unwrap();
        assert!(symplectic_residual(&m) < 1e-12);
    }

    #[test]
    fn gap_values() {
        let vd = LagrangianFrame::dirichlet(1);
        let vn = LagrangianFrame::neumann(1);
        assert_eq!(subspace_gap(&vd, &vd).unwrap(), 0.0);
        assert!((subspace_gap(&vd, &vn).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn intersections() {
        let vd = LagrangianFrame::dirichlet(2);
        let vn = LagrangianFrame::neumann(2);
        assert_eq!(intersection_dim(&vd, &vn, 1e-8), 0);
        assert_eq!(intersection_dim(&vd, &vd, 1e-8), 2);
        let v1 = LagrangianFrame::dirichlet(1);
        let rot = v1.transform(&rotation(1, std::f64::consts::FRAC_PI_2)).unwrap();
        assert_eq!(intersection_dim(&v1, &rot, 1e-8), 0);
    }

    #[test]
    fn doubled_coordinates() {
        for k in 1..4 {
            let t = doubled_to_standard(k);
            let r = &t * doubled_form(k) * t.transpose() - j_matrix(2 * k);
            assert_eq!(r.norm(), 0.0);
        }
    }

    #[test]
    fn graph_of_identity_is_diagonal() {
        let id = SymplecticMatrix::identity(1);
        let d = graph_embed(&id, 1.0).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expect = Mat::from_row_slice(4, 2, &[s, 0.0, 0.0, s, s, 0.0, 0.0, s]);
        assert!((d.columns() - expect).norm() < 1e-14);
        let a = graph_embed(&id, -1.0).unwrap();
        assert!(a.isotropy_residual() < 1e-14);
        assert!(graph_embed(&id, 0.5).is_err());
    }

    #[test]
    fn rejects_bad_frames() {
        assert!(LagrangianFrame::new(Mat::from_row_slice(2, 1, &[0.0, 0.0])).is_err());
        let z = Mat::from_row_slice(4, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(LagrangianFrame::new(z).is_err());
        // span(e1, e3) is symplectic, not isotropic
        assert!(LagrangianFrame::coordinate(2, &[0, 2]).is_err());
        assert!(LagrangianFrame::coordinate(2, &[0, 3]).is_ok());
    }

    #[test]
    fn correction_reduces_residual() {
        let mut m = rotation(2, 0.3);
        m[(0, 1)] += 1e-6;
        let before = symplectic_correct(&mut m);
        assert!(symplectic_residual(&m) < before * 1e-3);
    }
}
