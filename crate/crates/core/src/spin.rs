//! Angular-momentum algebra for a single spin `I`.
//!
//! Matrices are dense `(2I+1) x (2I+1)` complex matrices in the `|I, m>`
//! basis ordered with `m` descending, so `|I, I>` is the first basis vector.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const HERMITIAN_RTOL: f64 = 1e-12;

/// Nuclear spin number, stored as `2I` so half-integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    two_i: u32,
}

impl Spin {
    pub fn new(two_i: u32) -> Result<Self> {
        if two_i == 0 {
            return Err(Error::InvalidSpin(two_i));
        }
        Ok(Spin { two_i })
    }

    /// Spin whose Hilbert space has dimension `dim`.
    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpin(dim.saturating_sub(1) as u32));
        }
        Spin::new((dim - 1) as u32)
    }

    pub fn two_i(self) -> u32 {
        self.two_i
    }

    pub fn dim(self) -> usize {
        self.two_i as usize + 1
    }

    /// `I` as a float.
    pub fn i(self) -> f64 {
        f64::from(self.two_i) / 2.0
    }

    /// Eigenvalue `I(I+1)` of the Casimir operator.
    pub fn casimir(self) -> f64 {
        let i = self.i();
        i * (i + 1.0)
    }

    /// Magnetic quantum number of basis vector `index`.
    pub fn m(self, index: usize) -> f64 {
        self.i() - index as f64
    }

    /// `m = I, I-1, …, -I`.
    pub fn m_values(self) -> impl Iterator<Item = f64> {
        (0..self.dim()).map(move |k| self.m(k))
    }
}

/// A dense operator on the spin Hilbert space.
///
/// The `hermitian` flag is derived from the entries at construction time.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    hermitian: bool,
}

impl Operator {
    pub fn new(matrix: CMatrix) -> Self {
        assert!(matrix.is_square(), "operator matrix must be square");
        let hermitian = hermiticity_defect(&matrix) <= HERMITIAN_RTOL * scale(&matrix);
        Operator { matrix, hermitian }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator::new(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator::new(CMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Operator::new(CMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Operator {
        Operator::new(self.matrix.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator::new(self.matrix.scale(factor))
    }

    pub fn scale_complex(&self, factor: Complex64) -> Operator {
        Operator::new(&self.matrix * factor)
    }

    /// `U A U†`.
    pub fn conjugated_by(&self, unitary: &Operator) -> Operator {
        Operator::new(conjugate(&self.matrix, &unitary.matrix))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Borrow the underlying matrix of operator-like values.
pub trait AsMatrix {
    fn as_matrix(&self) -> &CMatrix;
}

impl AsMatrix for CMatrix {
    fn as_matrix(&self) -> &CMatrix {
        self
    }
}

impl AsMatrix for Operator {
    fn as_matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator::new(&self.matrix + &rhs.matrix)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator::new(&self.matrix - &rhs.matrix)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator::new(&self.matrix * &rhs.matrix)
    }
}

fn scale(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `U A U†` on raw matrices.
pub(crate) fn conjugate(a: &CMatrix, u: &CMatrix) -> CMatrix {
    u * a * u.adjoint()
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    /// Wraps `amplitudes`, which must already have unit norm (within 1e-12).
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::param("amplitudes", format!("squared norm {norm2} != 1")));
        }
        Ok(StateVector(amplitudes))
    }

    /// Normalizes `amplitudes`; errors on the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::param("amplitudes", "cannot normalize a zero vector"));
        }
        Ok(StateVector(amplitudes.unscale(norm)))
    }

    /// Basis vector `|I, m>` at position `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0.dotc(&other.0)
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }
}

/// Cartesian and ladder spin operators for one spin.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub spin: Spin,
    pub x: Operator,
    pub y: Operator,
    pub z: Operator,
    pub plus: Operator,
    pub minus: Operator,
}

impl SpinOperators {
    pub fn new(spin: Spin) -> Self {
        let dim = spin.dim();
        let i = spin.i();
        let mut plus = CMatrix::zeros(dim, dim);
        // I+ |m> = sqrt(I(I+1) - m(m+1)) |m+1>; |m+1> sits one row above |m>.
        for col in 1..dim {
            let m = spin.m(col);
            plus[(col - 1, col)] = Complex64::new((i * (i + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
        let minus = plus.adjoint();
        let half = Complex64::new(0.5, 0.0);
        let x = (&plus + &minus) * half;
        let y = (&plus - &minus) * Complex64::new(0.0, -0.5);
        let z = CMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            spin.m_values().map(|m| Complex64::new(m, 0.0)),
        ));
        SpinOperators {
            spin,
            x: Operator::new(x),
            y: Operator::new(y),
            z: Operator::new(z),
            plus: Operator::new(plus),
            minus: Operator::new(minus),
        }
    }

    /// `n · I` for the unit vector `n`.
    pub fn along(&self, direction: Direction) -> Operator {
        let [nx, ny, nz] = direction.unit_vector();
        let m = self.x.matrix.scale(nx) + self.y.matrix.scale(ny) + self.z.matrix.scale(nz);
        Operator::new(m)
    }
}

/// `spin_operators(spin)` as a free function.
pub fn spin_operators(spin: Spin) -> SpinOperators {
    SpinOperators::new(spin)
}

/// A direction on the unit sphere given by polar and azimuthal angles (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub polar: f64,
    pub azimuth: f64,
}

impl Direction {
    pub const X: Direction = Direction {
        polar: std::f64::consts::FRAC_PI_2,
        azimuth: 0.0,
    };
    pub const Y: Direction = Direction {
        polar: std::f64::consts::FRAC_PI_2,
        azimuth: std::f64::consts::FRAC_PI_2,
    };
    pub const MINUS_Y: Direction = Direction {
        polar: std::f64::consts::FRAC_PI_2,
        azimuth: 3.0 * std::f64::consts::FRAC_PI_2,
    };
    pub const Z: Direction = Direction {
        polar: 0.0,
        azimuth: 0.0,
    };

    pub fn new(polar: f64, azimuth: f64) -> Self {
        Direction { polar, azimuth }
    }

    pub fn unit_vector(self) -> [f64; 3] {
        let (st, ct) = self.polar.sin_cos();
        let (sp, cp) = self.azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_dims(a.dim(), b.dim())?;
    Ok(Operator::new(&a.matrix * &b.matrix - &b.matrix * &a.matrix))
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Eigendecomposition `H = V diag(λ) V†` with `λ` ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    /// `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.spectral_function(|lambda| Complex64::from_polar(1.0, -lambda * t))
    }

    /// `V diag(f(λ)) V†`.
    pub fn spectral_function(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let diag: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_diagonal(&diag)
    }

    /// `V diag(d) V†`.
    pub fn with_diagonal(&self, diag: &[Complex64]) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &w) in diag.iter().enumerate() {
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= w);
        }
        scaled * v.adjoint()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(h: &Operator) -> Result<HermitianEigen> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: hermiticity_defect(&h.matrix),
        });
    }
    // Symmetrize so the solver sees an exactly Hermitian matrix.
    let sym = (&h.matrix + h.matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(h.dim(), h.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// `U = exp(-i H t)` for Hermitian `H` in rad/s and `t` in seconds.
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    Ok(Operator::new(eig_hermitian(h)?.propagator(t)))
}

/// Active rotation `exp(-i angle n·I)` about `axis`.
pub fn rotation(spin: Spin, angle: f64, axis: Direction) -> Operator {
    let generator = SpinOperators::new(spin).along(axis);
    propagator(&generator, angle).expect("n·I is Hermitian")
}

/// `Tr(rho O)`.
pub fn expectation(rho: &(impl AsMatrix + ?Sized), o: &Operator) -> Result<Complex64> {
    let rho = rho.as_matrix();
    check_dims(rho.nrows(), o.dim())?;
    Ok(trace_product(rho, &o.matrix))
}

/// `Tr(AB)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const SPINS: [u32; 6] = [1, 2, 3, 4, 5, 6];

    #[test]
    fn spin_half_is_half_pauli() {
        let ops = SpinOperators::new(Spin::new(1).unwrap());
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        let y = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.0)]);
        let z = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert_eq!(ops.x.matrix(), &x);
        assert_eq!(ops.y.matrix(), &y);
        assert_eq!(ops.z.matrix(), &z);
    }

    #[test]
    fn spin_three_halves_iz_diagonal() {
        let ops = SpinOperators::new(Spin::new(3).unwrap());
        let diag: Vec<f64> = (0..4).map(|k| ops.z.matrix()[(k, k)].re).collect();
        assert_eq!(diag, vec![1.5, 0.5, -0.5, -1.5]);
    }

    #[test]
    fn su2_relations_and_casimir() {
        for two_i in SPINS {
            let spin = Spin::new(two_i).unwrap();
            let ops = SpinOperators::new(spin);
            let i = c(0.0, 1.0);
            let xy = commutator(&ops.x, &ops.y).unwrap();
            let yz = commutator(&ops.y, &ops.z).unwrap();
            let zx = commutator(&ops.z, &ops.x).unwrap();
            assert!(xy.max_abs_diff(&ops.z.scale_complex(i)) < 1e-12);
            assert!(yz.max_abs_diff(&ops.x.scale_complex(i)) < 1e-12);
            assert!(zx.max_abs_diff(&ops.y.scale_complex(i)) < 1e-12);
            let casimir = &(&(&ops.x * &ops.x) + &(&ops.y * &ops.y)) + &(&ops.z * &ops.z);
            let expected = Operator::identity(spin.dim()).scale(spin.casimir());
            assert!(casimir.max_abs_diff(&expected) < 1e-12, "2I = {two_i}");
        }
    }

    #[test]
    fn ladder_commutators() {
        let ops = SpinOperators::new(Spin::new(3).unwrap());
        assert!(commutator(&ops.z, &ops.z).unwrap().max_abs() == 0.0);
        let zp = commutator(&ops.z, &ops.plus).unwrap();
        assert!(zp.max_abs_diff(&ops.plus) < 1e-12);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let a = Operator::identity(2);
        let b = Operator::identity(3);
        assert_eq!(
            commutator(&a, &b),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn eig_examples() {
        let ops = SpinOperators::new(Spin::new(3).unwrap());
        let e = eig_hermitian(&ops.z).unwrap();
        assert_eq!(e.eigenvalues, vec![-1.5, -0.5, 0.5, 1.5]);
        let half = SpinOperators::new(Spin::new(1).unwrap());
        let e = eig_hermitian(&half.x).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn eig_reconstructs_and_is_unitary() {
        let ops = SpinOperators::new(Spin::new(5).unwrap());
        let h = &(&ops.x * &ops.z) + &(&ops.z * &ops.x);
        let h = &h + &ops.y.scale(0.3);
        let e = eig_hermitian(&h).unwrap();
        let v = &e.eigenvectors;
        let back = e.spectral_function(|l| c(l, 0.0));
        let err = (&back - h.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-11);
        let vv = v.adjoint() * v;
        let id = CMatrix::identity(6, 6);
        assert!((&vv - &id).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-11);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let ops = SpinOperators::new(Spin::new(3).unwrap());
        assert!(matches!(
            eig_hermitian(&ops.plus),
            Err(Error::NotHermitian { .. })
        ));
        assert!(propagator(&ops.plus, 1.0).is_err());
    }

    #[test]
    fn propagator_examples() {
        let one = Spin::new(2).unwrap();
        let ops = SpinOperators::new(one);
        let u = propagator(&Operator::zeros(3), 1.7).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(3)) < 1e-14);
        let u = propagator(&ops.z, 2.0 * PI).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(3)) < 1e-12);

        let half = SpinOperators::new(Spin::new(1).unwrap());
        let u = propagator(&half.z, PI).unwrap();
        assert_abs_diff_eq!(u.matrix()[(0, 0)].re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u.matrix()[(0, 0)].im, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u.matrix()[(1, 1)].im, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rotation_examples() {
        let spin = Spin::new(3).unwrap();
        let ops = SpinOperators::new(spin);
        let id = Operator::identity(4);
        assert!(rotation(spin, 0.0, Direction::X).max_abs_diff(&id) < 1e-14);
        // Active rotation by +pi/2 about y carries z onto x.
        let r = rotation(spin, PI / 2.0, Direction::Y);
        assert!(ops.z.conjugated_by(&r).max_abs_diff(&ops.x) < 1e-12);
        // The opposite phase carries z onto -x.
        let r = rotation(spin, PI / 2.0, Direction::MINUS_Y);
        assert!(ops.z.conjugated_by(&r).max_abs_diff(&ops.x.scale(-1.0)) < 1e-12);
        let r = rotation(spin, 2.0 * PI, Direction::new(0.4, 1.1));
        assert!(r.max_abs_diff(&id.scale(-1.0)) < 1e-12);
    }

    #[test]
    fn four_pi_rotation_is_identity() {
        for two_i in SPINS {
            let spin = Spin::new(two_i).unwrap();
            let r = rotation(spin, 4.0 * PI, Direction::new(1.2, -0.7));
            assert!(r.max_abs_diff(&Operator::identity(spin.dim())) < 1e-10);
        }
    }

    #[test]
    fn expectation_examples() {
        let spin = Spin::new(3).unwrap();
        let ops = SpinOperators::new(spin);
        let top = StateVector::basis(4, 0).projector();
        assert_abs_diff_eq!(expectation(&top, &ops.z).unwrap().re, 1.5);
        let mixed = CMatrix::identity(4, 4) * c(0.25, 0.0);
        assert_abs_diff_eq!(expectation(&mixed, &ops.z).unwrap().re, 0.0);
        let y2 = &ops.y * &ops.y;
        assert_abs_diff_eq!(expectation(&mixed, &y2).unwrap().re, 1.25, epsilon = 1e-14);
        assert!(expectation(&mixed, &Operator::identity(2)).is_err());
    }

    #[test]
    fn propagator_composes() {
        let ops = SpinOperators::new(Spin::new(3).unwrap());
        let h = &(&ops.z * &ops.z).scale(1.5) + &(&ops.x * &ops.x).scale(0.4);
        let a = propagator(&h, 0.37).unwrap();
        let b = propagator(&h, 1.21).unwrap();
        let ab = propagator(&h, 1.58).unwrap();
        assert!((&a * &b).max_abs_diff(&ab) < 1e-10);
    }

    #[test]
    fn spin_validation() {
        assert_eq!(Spin::new(0), Err(Error::InvalidSpin(0)));
        assert_eq!(Spin::from_dim(4).unwrap().two_i(), 3);
        let s = Spin::new(3).unwrap();
        assert_eq!(s.m_values().collect::<Vec<_>>(), vec![1.5, 0.5, -0.5, -1.5]);
    }
}
