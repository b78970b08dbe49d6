//! Small dense linear-algebra helpers shared by the solver and the baselines.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Largest absolute column sum.
pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorization of a real square matrix together with its 1-norm
/// reciprocal condition number, computed exactly from the inverse.
pub struct Factorization {
    lu: LU<f64, Dyn, Dyn>,
    rcond: f64,
}

impl Factorization {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let lu = a.clone().lu();
        let rcond = match lu.try_inverse() {
            Some(inv) => {
                let an = norm1(a);
                let inv_n = norm1(&inv);
                if an == 0.0 || !inv_n.is_finite() || inv_n == 0.0 {
                    0.0
                } else {
                    1.0 / (an * inv_n)
                }
            }
            None => 0.0,
        };
        Self { lu, rcond }
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        self.lu.solve(b)
    }
}

/// Reciprocal condition number in the 1-norm; zero for singular input.
pub fn rcond(a: &DMatrix<f64>) -> f64 {
    Factorization::new(a).rcond()
}

/// `a^H b` for two complex slices of equal length.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Rotates `v` so that its largest-magnitude entry (first one on exact ties)
/// is real and nonnegative.
pub fn canonical_phase(v: &CVector) -> CVector {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, x) in v.iter().enumerate() {
        let m = x.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag <= 0.0 {
        return v.clone();
    }
    let rot = v[best].conj() / best_mag;
    v.map(|x| x * rot)
}

/// `min_θ ‖a − e^{iθ} b‖`, the distance between two vectors up to a global phase.
pub fn phase_distance(a: &CVector, b: &CVector) -> f64 {
    // The optimal rotation aligns b with a: θ = arg(b^H a).
    let cross = b.dotc(a);
    let n = cross.norm();
    let rot = if n > 0.0 { cross / n } else { Complex64::new(1.0, 0.0) };
    (a - b.map(|x| x * rot)).norm()
}

/// Unit-norm principal eigenvector of a Hermitian matrix.
///
/// When the top eigenvalue is repeated (within `1e-12` relative), the result is
/// the normalized projection of the all-ones vector onto the dominant
/// eigenspace, falling back to the first basis vector of that space if the
/// projection vanishes. The output is returned in canonical phase.
pub fn principal_eigenvector(s: &CMatrix) -> CVector {
    let n = s.nrows();
    let eig = s.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * top.abs().max(f64::MIN_POSITIVE);
    let dominant: Vec<usize> = (0..n)
        .filter(|&i| (eig.eigenvalues[i] - top).abs() <= tol)
        .collect();

    let ones = CVector::from_element(n, Complex64::new(1.0, 0.0));
    let mut proj = CVector::zeros(n);
    for &i in &dominant {
        let u = eig.eigenvectors.column(i);
        let coeff = u.dotc(&ones);
        proj += u * coeff;
    }
    let pn = proj.norm();
    let v = if pn > 1e-8 * (n as f64).sqrt() {
        proj / Complex64::new(pn, 0.0)
    } else {
        let u = eig.eigenvectors.column(dominant[0]).into_owned();
        let un = u.norm();
        u / Complex64::new(un, 0.0)
    };
    canonical_phase(&v)
}
