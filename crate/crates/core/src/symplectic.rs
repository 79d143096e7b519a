//! Linear algebra of the symplectic group: the generators `J`, `D_E`, `V_C`
//! and `A_FT2`, certification predicates, and the Wigner-decomposable
//! factorization `A = V_C A_FT2 D_E` with its derived matrices.
//!
//! Everything here is dimension generic. A "Wigner dimension" `d` means the
//! distribution acts on signals over R^d, so the symplectic matrices are
//! `4d x 4d` and `E` is `2d x 2d`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;

/// Scale-relative tolerance for the certified [`SymplecticMatrix`] invariant.
pub const SYMPLECTIC_CERT_TOL: f64 = 1e-12;
/// Scale-relative tolerance used by [`is_symplectic`].
pub const SYMPLECTIC_CHECK_TOL: f64 = 1e-10;
/// Relative singular-value floor deciding invertibility of `E12`, `E22`.
pub const REGULARITY_FLOOR: f64 = 1e-10;
const INVERTIBLE_FLOOR: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;
const REASSEMBLY_TOL: f64 = 1e-9;

fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Smallest and largest singular values.
fn singular_extremes(m: &Mat) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let hi = sv.iter().cloned().fold(0.0_f64, f64::max);
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (lo, hi)
}

fn invertible(m: &Mat, floor: f64) -> bool {
    let (lo, hi) = singular_extremes(m);
    hi > 0.0 && lo > floor * hi
}

fn checked_inverse(m: &Mat) -> Result<Mat> {
    if !invertible(m, INVERTIBLE_FLOOR) {
        return Err(Error::SingularMatrix);
    }
    m.clone().try_inverse().ok_or(Error::SingularMatrix)
}

/// Row-major nested arrays, the JSON layout used for every matrix.
pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(Mat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// The standard symplectic matrix `[[0, I], [-I, 0]]` of size `2 * half`.
pub fn standard_j(half: usize) -> Mat {
    let mut j = Mat::zeros(2 * half, 2 * half);
    for i in 0..half {
        j[(i, half + i)] = 1.0;
        j[(half + i, i)] = -1.0;
    }
    j
}

/// `||S^T J S - J||_max` for an even-sized square matrix.
pub fn symplectic_residual(s: &Mat) -> Result<f64> {
    if s.nrows() != s.ncols() {
        return Err(Error::NotSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    if !s.nrows().is_multiple_of(2) {
        return Err(Error::OddDimension(s.nrows()));
    }
    let j = standard_j(s.nrows() / 2);
    Ok(max_abs(&(s.transpose() * &j * s - &j)))
}

/// True iff `||S^T J S - J||_max <= 1e-10 (1 + ||S||_max^2)`.
pub fn is_symplectic(s: &Mat) -> Result<bool> {
    let scale = 1.0 + max_abs(s).powi(2);
    Ok(symplectic_residual(s)? <= SYMPLECTIC_CHECK_TOL * scale)
}

/// A real `2k x 2k` matrix certified to satisfy `S^T J S = J`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix {
    m: Mat,
}

impl SymplecticMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        let residual = symplectic_residual(&m)?;
        let scale = 1.0 + max_abs(&m).powi(2);
        if residual > SYMPLECTIC_CERT_TOL * scale {
            return Err(Error::NotSymplectic(residual));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > 1e-9 * scale {
            return Err(Error::NotSymplectic((det - 1.0).abs()));
        }
        Ok(Self { m })
    }

    pub fn identity(size: usize) -> Self {
        Self {
            m: Mat::identity(size, size),
        }
    }

    /// The standard `J` of size `4d`, the one used to certify `Sp(2d, R)`.
    pub fn j(d: usize) -> Self {
        Self {
            m: standard_j(2 * d),
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn compose(&self, rhs: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.size() != rhs.size() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.size(),
                rhs.size()
            )));
        }
        SymplecticMatrix::new(&self.m * &rhs.m)
    }

    /// `S^{-1} = -J S^T J`.
    pub fn inverse(&self) -> SymplecticMatrix {
        let j = standard_j(self.size() / 2);
        SymplecticMatrix {
            m: -(&j * self.m.transpose() * &j),
        }
    }

    /// `d x d` block `(row, col)` of a `4d x 4d` matrix, zero based.
    pub fn block(&self, row: usize, col: usize) -> Result<Mat> {
        let d = self.wigner_dim()?;
        Ok(self.m.view((row * d, col * d), (d, d)).into_owned())
    }

    /// `d` such that the matrix is `4d x 4d`.
    pub fn wigner_dim(&self) -> Result<usize> {
        if !self.size().is_multiple_of(4) {
            return Err(Error::DimensionMismatch(format!(
                "size {} is not a multiple of 4",
                self.size()
            )));
        }
        Ok(self.size() / 4)
    }

    /// The submatrix `[[A11, A13], [A21, A23]]` governing how signal
    /// time-frequency shifts move the distribution.
    pub fn e_a(&self) -> Result<Mat> {
        let d = self.wigner_dim()?;
        let mut out = Mat::zeros(2 * d, 2 * d);
        let pairs = [((0, 0), (0, 0)), ((0, 2), (0, 1)), ((1, 0), (1, 0)), ((1, 2), (1, 1))];
        for ((br, bc), (or, oc)) in pairs {
            let b = self.block(br, bc)?;
            out.view_mut((or * d, oc * d), (d, d)).copy_from(&b);
        }
        Ok(out)
    }
}

/// An invertible `2d x 2d` matrix with `d x d` block access.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix2d {
    full: Mat,
    d: usize,
    condition: f64,
}

impl BlockMatrix2d {
    pub fn new(full: Mat) -> Result<Self> {
        if full.nrows() != full.ncols() {
            return Err(Error::NotSquare {
                rows: full.nrows(),
                cols: full.ncols(),
            });
        }
        if !full.nrows().is_multiple_of(2) || full.nrows() == 0 {
            return Err(Error::OddDimension(full.nrows()));
        }
        let (lo, hi) = singular_extremes(&full);
        if !(hi > 0.0 && lo > INVERTIBLE_FLOOR * hi) {
            return Err(Error::SingularMatrix);
        }
        Ok(Self {
            d: full.nrows() / 2,
            condition: hi / lo,
            full,
        })
    }

    pub fn from_blocks(e11: &Mat, e12: &Mat, e21: &Mat, e22: &Mat) -> Result<Self> {
        let d = e11.nrows();
        for b in [e11, e12, e21, e22] {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::DimensionMismatch("E blocks must all be d x d".into()));
            }
        }
        let mut full = Mat::zeros(2 * d, 2 * d);
        full.view_mut((0, 0), (d, d)).copy_from(e11);
        full.view_mut((0, d), (d, d)).copy_from(e12);
        full.view_mut((d, 0), (d, d)).copy_from(e21);
        full.view_mut((d, d), (d, d)).copy_from(e22);
        Self::new(full)
    }

    /// `d = 1` convenience: `E = [[e11, e12], [e21, e22]]`.
    pub fn scalar(e11: f64, e12: f64, e21: f64, e22: f64) -> Result<Self> {
        Self::new(Mat::from_row_slice(2, 2, &[e11, e12, e21, e22]))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn full(&self) -> &Mat {
        &self.full
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    fn blk(&self, r: usize, c: usize) -> Mat {
        self.full.view((r * self.d, c * self.d), (self.d, self.d)).into_owned()
    }

    pub fn e11(&self) -> Mat {
        self.blk(0, 0)
    }
    pub fn e12(&self) -> Mat {
        self.blk(0, 1)
    }
    pub fn e21(&self) -> Mat {
        self.blk(1, 0)
    }
    pub fn e22(&self) -> Mat {
        self.blk(1, 1)
    }

    pub fn determinant(&self) -> f64 {
        self.full.determinant()
    }
}

/// `D_E = diag(E^{-1}, E^T)`.
pub fn make_de(e: &BlockMatrix2d) -> Result<SymplecticMatrix> {
    let n = e.full().nrows();
    let inv = checked_inverse(e.full())?;
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&inv);
    m.view_mut((n, n), (n, n)).copy_from(&e.full().transpose());
    SymplecticMatrix::new(m)
}

fn symmetrized(c: &Mat) -> Result<Mat> {
    if c.nrows() != c.ncols() {
        return Err(Error::NotSquare {
            rows: c.nrows(),
            cols: c.ncols(),
        });
    }
    let asym = max_abs(&(c - c.transpose()));
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    Ok((c + c.transpose()) * 0.5)
}

/// `V_C = [[I, 0], [C, I]]` for symmetric `C`.
pub fn make_vc(c: &Mat) -> Result<SymplecticMatrix> {
    let c = symmetrized(c)?;
    let n = c.nrows();
    let mut m = Mat::identity(2 * n, 2 * n);
    m.view_mut((n, 0), (n, n)).copy_from(&c);
    SymplecticMatrix::new(m)
}

/// Projection of the partial Fourier transform in the second variables.
pub fn make_aft2(d: usize) -> SymplecticMatrix {
    let mut m = Mat::zeros(4 * d, 4 * d);
    for i in 0..d {
        m[(i, i)] = 1.0;
        m[(d + i, 3 * d + i)] = 1.0;
        m[(2 * d + i, 2 * d + i)] = 1.0;
        m[(3 * d + i, d + i)] = -1.0;
    }
    SymplecticMatrix { m }
}

/// Both `E12` and `E22` clear the relative singular-value floor.
pub fn is_right_regular(e: &BlockMatrix2d) -> bool {
    invertible(&e.e12(), REGULARITY_FLOOR) && invertible(&e.e22(), REGULARITY_FLOOR)
}

/// A Wigner-decomposable symplectic matrix `A = V_C A_FT2 D_E` with `E`
/// right-regular, together with the matrices that describe its atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerFactorization {
    c: Mat,
    e: BlockMatrix2d,
    schur: Mat,
    ea: Mat,
    lattice_map: Mat,
    alpha: f64,
}

pub fn make_factorization(c: &Mat, e: &BlockMatrix2d) -> Result<WignerFactorization> {
    let d = e.d();
    let c = symmetrized(c)?;
    if c.nrows() != 2 * d {
        return Err(Error::DimensionMismatch(format!(
            "C must be {0}x{0}, got {1}x{1}",
            2 * d,
            c.nrows()
        )));
    }
    if !is_right_regular(e) {
        return Err(Error::NotRightRegular);
    }
    let e12 = e.e12();
    let e22 = e.e22();
    let e22_inv = e22.clone().try_inverse().ok_or(Error::NotRightRegular)?;
    let e12_inv = e12.clone().try_inverse().ok_or(Error::NotRightRegular)?;
    let schur = e.e11() - &e12 * &e22_inv * e.e21();
    if !invertible(&schur, INVERTIBLE_FLOOR) {
        return Err(Error::SingularSchur);
    }
    let schur_inv = schur.clone().try_inverse().ok_or(Error::SingularSchur)?;

    let mut ea = Mat::zeros(2 * d, 2 * d);
    ea.view_mut((0, 0), (d, d)).copy_from(&schur_inv);
    ea.view_mut((d, d), (d, d)).copy_from(&e12.transpose());

    // Maps the metaplectic lattice onto the equivalent classical one:
    // translation by schur * x, modulation by E12^{-T} xi.
    let mut lattice_map = Mat::zeros(2 * d, 2 * d);
    lattice_map.view_mut((0, 0), (d, d)).copy_from(&schur);
    lattice_map
        .view_mut((d, d), (d, d))
        .copy_from(&e12_inv.transpose());

    let alpha = e.determinant().abs().sqrt() / (&e22 * &e12).determinant().abs().sqrt();
    Ok(WignerFactorization {
        c,
        e: e.clone(),
        schur,
        ea,
        lattice_map,
        alpha,
    })
}

impl WignerFactorization {
    pub fn d(&self) -> usize {
        self.e.d()
    }
    pub fn c(&self) -> &Mat {
        &self.c
    }
    pub fn e(&self) -> &BlockMatrix2d {
        &self.e
    }
    /// `E11 - E12 E22^{-1} E21`.
    pub fn schur(&self) -> &Mat {
        &self.schur
    }
    /// `E_A = diag(schur^{-1}, E12^T)`.
    pub fn ea(&self) -> &Mat {
        &self.ea
    }
    /// `diag(schur, E12^{-T})`, the inverse of `E_A`.
    pub fn lattice_map(&self) -> &Mat {
        &self.lattice_map
    }
    /// `|det E|^{1/2} |det(E22 E12)|^{-1/2}`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    /// Constant of the inverse atom, `1 / alpha`.
    pub fn alpha_tilde(&self) -> f64 {
        let e = &self.e;
        let e12_inv = e.e12().try_inverse().expect("right-regular");
        let e22_inv = e.e22().try_inverse().expect("right-regular");
        (e.determinant() * e12_inv.determinant() * e22_inv.determinant())
            .abs()
            .powf(-0.5)
    }

    pub fn is_totally_decomposable(&self) -> bool {
        self.c.iter().all(|v| *v == 0.0)
    }

    /// The same `E` with `C = 0`.
    pub fn without_chirp(&self) -> WignerFactorization {
        WignerFactorization {
            c: Mat::zeros(self.c.nrows(), self.c.ncols()),
            ..self.clone()
        }
    }

    /// `V_C A_FT2 D_E` as a `4d x 4d` matrix.
    pub fn assembled(&self) -> Result<SymplecticMatrix> {
        let vc = make_vc(&self.c)?;
        let de = make_de(&self.e)?;
        vc.compose(&make_aft2(self.d()))?.compose(&de)
    }

    /// Ratio `|det(E12 E22)| / |det E|` relating metaplectic and classical
    /// frame bounds.
    pub fn bound_ratio(&self) -> f64 {
        (self.e.e12() * self.e.e22()).determinant().abs() / self.e.determinant().abs()
    }

    /// Rescaling matrix `E22 E12^{-1}` applied to the window inside atoms.
    pub fn window_rescale(&self) -> Mat {
        self.e.e22() * self.e.e12().try_inverse().expect("right-regular")
    }
}

/// `E_ST = [[0, I], [-I, I]]`, giving the STFT.
pub fn stft_factorization_dim(d: usize) -> WignerFactorization {
    let i = Mat::identity(d, d);
    let z = Mat::zeros(d, d);
    let e = BlockMatrix2d::from_blocks(&z, &i, &(-&i), &i).expect("E_ST is invertible");
    make_factorization(&Mat::zeros(2 * d, 2 * d), &e).expect("E_ST is right-regular")
}

pub fn stft_factorization() -> WignerFactorization {
    stft_factorization_dim(1)
}

/// `E_tau = [[I, tau I], [I, -(1 - tau) I]]`, giving the tau-Wigner
/// distribution. Rejects `tau` in `{0, 1}`.
pub fn tau_factorization_dim(tau: f64, d: usize) -> Result<WignerFactorization> {
    if !tau.is_finite() || tau == 0.0 || tau == 1.0 {
        return Err(Error::TauDegenerate(tau));
    }
    let i = Mat::identity(d, d);
    let e = BlockMatrix2d::from_blocks(&i, &(&i * tau), &i, &(&i * -(1.0 - tau)))?;
    make_factorization(&Mat::zeros(2 * d, 2 * d), &e)
}

pub fn tau_factorization(tau: f64) -> Result<WignerFactorization> {
    tau_factorization_dim(tau, 1)
}

/// Recognizes `A = V_C A_FT2 D_E` with right-regular `E`.
///
/// The factorization is not unique: an off-diagonal `d`-block of `C` can be
/// traded for a shear of `E`. The returned representative has
/// block-diagonal `C`. `E` is read from the rows of `A` that `V_C` leaves
/// untouched (`E^T` rows `0..d` sit in the lower-right block, rows `d..2d`
/// in the upper-right block), and `C` from `A (A_FT2 D_E)^{-1}`. The answer
/// is accepted only if reassembly reproduces `A` within `1e-9`.
pub fn try_factor(a: &SymplecticMatrix) -> Option<(Mat, BlockMatrix2d)> {
    let d = a.wigner_dim().ok()?;
    if d == 0 {
        return None;
    }
    let m = a.matrix();
    let n = 2 * d;
    let mut g = Mat::zeros(n, n);
    g.view_mut((0, 0), (d, n))
        .copy_from(&m.view((n, n), (d, n)));
    g.view_mut((d, 0), (d, n))
        .copy_from(&m.view((d, n), (d, n)));
    let e = BlockMatrix2d::new(g.transpose()).ok()?;
    if !is_right_regular(&e) {
        return None;
    }
    let core = make_aft2(d).compose(&make_de(&e).ok()?).ok()?;
    let vc = m * core.inverse().matrix();
    let c = vc.view((n, 0), (n, n)).into_owned();
    let c = (&c + c.transpose()) * 0.5;
    let fac = make_factorization(&c, &e).ok()?;
    let rebuilt = fac.assembled().ok()?;
    let scale = 1.0_f64.max(max_abs(m));
    if max_abs(&(rebuilt.matrix() - m)) <= REASSEMBLY_TOL * scale {
        Some((c, e))
    } else {
        None
    }
}

/// JSON form `{"d": .., "C": [[..]], "E": [[..]]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FactorizationJson {
    pub d: usize,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
}

impl FactorizationJson {
    pub fn from_parts(c: &Mat, e: &BlockMatrix2d) -> Self {
        Self {
            d: e.d(),
            c: to_rows(c),
            e: to_rows(e.full()),
        }
    }

    pub fn build(&self) -> Result<WignerFactorization> {
        let e = BlockMatrix2d::new(from_rows(&self.e)?)?;
        if e.d() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "\"d\" is {} but E is {}x{}",
                self.d,
                2 * e.d(),
                2 * e.d()
            )));
        }
        let c = if self.c.is_empty() {
            Mat::zeros(2 * self.d, 2 * self.d)
        } else {
            from_rows(&self.c)?
        };
        make_factorization(&c, &e)
    }
}

impl From<&WignerFactorization> for FactorizationJson {
    fn from(f: &WignerFactorization) -> Self {
        Self::from_parts(f.c(), f.e())
    }
}

/// Random right-regular `E` with entries in `[-2, 2)`, condition number at
/// most `1e3` and an invertible Schur complement.
pub fn random_right_regular<R: Rng + ?Sized>(rng: &mut R, d: usize) -> BlockMatrix2d {
    loop {
        let m = Mat::from_fn(2 * d, 2 * d, |_, _| rng.gen_range(-2.0..2.0));
        if let Ok(e) = BlockMatrix2d::new(m) {
            if is_right_regular(&e)
                && e.condition_number() <= 1e3
                && make_factorization(&Mat::zeros(2 * d, 2 * d), &e).is_ok()
            {
                return e;
            }
        }
    }
}

/// Random symmetric matrix with entries in `[-1.5, 1.5)`.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let m = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.5..1.5));
    (&m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_mat_close(a: &Mat, b: &Mat, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        let diff = max_abs(&(a - b));
        assert!(diff <= tol, "max diff {diff:e}\n{a}\n{b}");
    }

    #[test]
    fn j_small_case_and_square() {
        assert_eq!(standard_j(1), Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        for half in 1..4 {
            let j = standard_j(half);
            assert_eq!(&j * &j, -Mat::identity(2 * half, 2 * half));
        }
        assert!(is_symplectic(SymplecticMatrix::j(1).matrix()).unwrap());
    }

    #[test]
    fn d_e_examples() {
        let id = BlockMatrix2d::scalar(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(make_de(&id).unwrap().matrix(), &Mat::identity(4, 4));
        let two = BlockMatrix2d::scalar(2.0, 0.0, 0.0, 2.0).unwrap();
        let expected = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.5, 2.0, 2.0]));
        assert_mat_close(make_de(&two).unwrap().matrix(), &expected, 1e-15);
        assert!(matches!(
            BlockMatrix2d::scalar(1.0, 2.0, 2.0, 4.0),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn v_c_examples() {
        assert_eq!(make_vc(&Mat::zeros(1, 1)).unwrap().matrix(), &Mat::identity(2, 2));
        let v = make_vc(&Mat::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(v.matrix(), &Mat::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));
        let c = Mat::from_row_slice(2, 2, &[0.3, -1.0, -1.0, 2.0]);
        let prod = make_vc(&c).unwrap().compose(&make_vc(&(-&c)).unwrap()).unwrap();
        assert_mat_close(prod.matrix(), &Mat::identity(4, 4), 0.0);
        let asym = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(make_vc(&asym), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn a_ft2_layout() {
        let a = make_aft2(1);
        let expected = Mat::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(a.matrix(), &expected);
        assert!(is_symplectic(a.matrix()).unwrap());
        assert_mat_close(
            a.inverse().compose(&a).unwrap().matrix(),
            &Mat::identity(4, 4),
            0.0,
        );
        // A_FT2^2 flips the second variable pair, so A_FT2^4 = I.
        let sq = a.compose(&a).unwrap();
        let fourth = sq.compose(&sq).unwrap();
        assert_mat_close(fourth.matrix(), &Mat::identity(4, 4), 0.0);
        assert!(is_symplectic(make_aft2(3).matrix()).unwrap());
    }

    #[test]
    fn symplectic_predicate() {
        assert!(is_symplectic(&Mat::identity(6, 6)).unwrap());
        let two = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(!is_symplectic(&two).unwrap());
        assert!(matches!(
            is_symplectic(&Mat::identity(3, 3)),
            Err(Error::OddDimension(3))
        ));
        assert!(SymplecticMatrix::new(two).is_err());
    }

    #[test]
    fn right_regularity() {
        let st = BlockMatrix2d::scalar(0.0, 1.0, -1.0, 1.0).unwrap();
        assert!(is_right_regular(&st));
        let tau0 = BlockMatrix2d::scalar(1.0, 0.0, 1.0, -1.0).unwrap();
        assert!(!is_right_regular(&tau0));
        let id = BlockMatrix2d::scalar(1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(!is_right_regular(&id));
        assert!(matches!(
            make_factorization(&Mat::zeros(2, 2), &id),
            Err(Error::NotRightRegular)
        ));
    }

    #[test]
    fn stft_factorization_collapses() {
        let f = stft_factorization();
        assert_mat_close(f.ea(), &Mat::identity(2, 2), 1e-15);
        assert_mat_close(f.lattice_map(), &Mat::identity(2, 2), 1e-15);
        assert_mat_close(&f.window_rescale(), &Mat::identity(1, 1), 1e-15);
        assert_abs_diff_eq!(f.alpha(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.schur()[(0, 0)], 1.0, epsilon = 1e-15);
        assert!(is_symplectic(f.assembled().unwrap().matrix()).unwrap());
    }

    #[test]
    fn tau_half_factorization() {
        let f = tau_factorization(0.5).unwrap();
        assert_mat_close(
            f.ea(),
            &Mat::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]),
            1e-15,
        );
        assert_abs_diff_eq!(f.alpha(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.window_rescale()[(0, 0)], -1.0, epsilon = 1e-15);
        assert_mat_close(
            f.lattice_map(),
            &Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]),
            1e-14,
        );
        assert_abs_diff_eq!(f.bound_ratio(), 0.25, epsilon = 1e-15);
        assert_eq!(f, tau_factorization(0.5).unwrap());
        for tau in [0.0, 1.0] {
            assert!(matches!(tau_factorization(tau), Err(Error::TauDegenerate(_))));
        }
    }

    #[test]
    fn tau_closed_forms() {
        for tau in [0.25, 1.0 / 3.0, 0.75, 2.0, -0.5] {
            let f = tau_factorization(tau).unwrap();
            let schur = 1.0 / (1.0 - tau);
            assert_abs_diff_eq!(f.schur()[(0, 0)], schur, epsilon = 1e-12);
            let alpha = (tau * (1.0 - tau)).abs().powf(-0.5);
            assert_abs_diff_eq!(f.alpha(), alpha, epsilon = 1e-12 * alpha);
        }
    }

    #[test]
    fn ea_matches_submatrix_of_assembled() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [1, 2] {
            for _ in 0..20 {
                let e = random_right_regular(&mut rng, d);
                let c = random_symmetric(&mut rng, 2 * d);
                let f = make_factorization(&c, &e).unwrap();
                let a = f.assembled().unwrap();
                assert_mat_close(&a.e_a().unwrap(), f.ea(), 1e-9);
                assert!(f.ea().determinant().abs() > 0.0);
                assert_mat_close(&(f.ea() * f.lattice_map()), &Mat::identity(2 * d, 2 * d), 1e-9);
            }
        }
    }

    #[test]
    fn alpha_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let e = random_right_regular(&mut rng, 1);
            let f = make_factorization(&Mat::zeros(2, 2), &e).unwrap();
            let det_e = e.determinant().abs();
            let lhs = f.alpha().powi(2) * (e.e12() * e.e22()).determinant().abs();
            assert!((lhs - det_e).abs() <= 1e-10 * det_e);
            assert!((f.alpha() * f.alpha_tilde() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn try_factor_examples() {
        let st = stft_factorization();
        let (c, e) = try_factor(&st.assembled().unwrap()).unwrap();
        assert_mat_close(&c, &Mat::zeros(2, 2), 1e-12);
        assert_mat_close(e.full(), st.e().full(), 1e-12);

        let c0 = Mat::identity(2, 2);
        let tau = tau_factorization(0.5).unwrap();
        let f = make_factorization(&c0, tau.e()).unwrap();
        let (c, e) = try_factor(&f.assembled().unwrap()).unwrap();
        assert_mat_close(&c, &c0, 1e-9);
        assert_mat_close(e.full(), tau.e().full(), 1e-9);

        assert!(try_factor(&SymplecticMatrix::identity(4)).is_none());
        assert!(try_factor(&make_de(&BlockMatrix2d::scalar(1.0, 0.0, 0.0, 1.0).unwrap()).unwrap()).is_none());
    }

    #[test]
    fn off_diagonal_chirp_is_a_shear_of_e() {
        let e = BlockMatrix2d::scalar(0.4, 1.2, -0.7, 0.9).unwrap();
        let c = Mat::from_row_slice(2, 2, &[0.0, 0.6, 0.6, 0.0]);
        let chirped = make_factorization(&c, &e).unwrap();
        let sheared = BlockMatrix2d::new(e.full() * Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.6, 1.0])).unwrap();
        let plain = make_factorization(&Mat::zeros(2, 2), &sheared).unwrap();
        assert_mat_close(
            chirped.assembled().unwrap().matrix(),
            plain.assembled().unwrap().matrix(),
            1e-12,
        );
        let (c_back, e_back) = try_factor(&chirped.assembled().unwrap()).unwrap();
        assert_mat_close(&c_back, &Mat::zeros(2, 2), 1e-9);
        assert_mat_close(e_back.full(), sheared.full(), 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let f = tau_factorization(0.25).unwrap();
        let text = serde_json::to_string(&FactorizationJson::from(&f)).unwrap();
        assert!(text.contains("\"C\"") && text.contains("\"E\"") && text.contains("\"d\""));
        let back: FactorizationJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap(), f);
    }
}
