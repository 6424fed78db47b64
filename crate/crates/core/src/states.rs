//! Initial states and state-comparison observables.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spin::{
    conjugate, eig_hermitian, rotation, trace_product, AsMatrix, CMatrix, CVector, Direction, Operator,
    Spin, SpinOperators, StateVector,
};
use crate::sweeps::linspace;

/// Reduced Planck constant, J·s (exact SI).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact SI).
pub const K_B: f64 = 1.380_649e-23;

/// Direction `(theta0, phi0)` of a coherent spin state, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CssParams {
    pub theta0: f64,
    pub phi0: f64,
}

impl CssParams {
    /// The state `|zeta(pi/2, pi)>`, the -x eigenstate used as the squeezing reference.
    pub const MINUS_X: CssParams = CssParams {
        theta0: std::f64::consts::FRAC_PI_2,
        phi0: std::f64::consts::PI,
    };

    pub fn new(theta0: f64, phi0: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta0) {
            return Err(Error::param("theta0", format!("{theta0} not in [0, pi]")));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi0) {
            return Err(Error::param("phi0", format!("{phi0} not in [0, 2pi)")));
        }
        Ok(CssParams { theta0, phi0 })
    }

    pub fn direction(self) -> Direction {
        Direction::new(self.theta0, self.phi0)
    }
}

/// A physical density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensityMatrix("matrix is not square".into()));
        }
        let op = Operator::new(matrix.clone());
        let defect = op.max_abs_diff(&op.adjoint());
        if defect > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let lowest = eig_hermitian(&op)?.eigenvalues[0];
        if lowest < -1e-10 {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {lowest:e}"
            )));
        }
        Ok(DensityMatrix(matrix))
    }

    /// For maps known to preserve the density-matrix invariants.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityMatrix(matrix)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        DensityMatrix(psi.projector())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Deviation from the maximally mixed state, `rho - 1/dim`.
    pub fn deviation(&self) -> CMatrix {
        deviation(&self.0)
    }

    /// `U rho U†`.
    pub fn evolve(&self, unitary: &CMatrix) -> DensityMatrix {
        DensityMatrix(conjugate(&self.0, unitary))
    }
}

impl AsMatrix for DensityMatrix {
    fn as_matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// `m - Tr(m)/dim · 1`.
pub fn deviation(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let shift = m.trace() / Complex64::new(n as f64, 0.0);
    m - CMatrix::identity(n, n) * shift
}

/// Field, temperature and gyromagnetic ratio of the sample environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentSpec {
    /// Tesla.
    pub b0: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Hz/T (cycles, not radians).
    pub gamma_n: f64,
}

impl EnvironmentSpec {
    pub fn new(b0: f64, temperature: f64, gamma_n: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::param("temperature", format!("{temperature} must be > 0")));
        }
        if !(b0 >= 0.0 && b0.is_finite()) {
            return Err(Error::param("B0", format!("{b0} must be >= 0")));
        }
        if !(gamma_n > 0.0 && gamma_n.is_finite()) {
            return Err(Error::param("gamma_n", format!("{gamma_n} must be > 0")));
        }
        Ok(EnvironmentSpec {
            b0,
            temperature,
            gamma_n,
        })
    }

    /// Larmor frequency `2 pi gamma_n B0`, rad/s.
    pub fn omega0(&self) -> f64 {
        std::f64::consts::TAU * self.gamma_n * self.b0
    }
}

/// Coherent spin state pointing along `(theta0, phi0)`.
pub fn css_state(spin: Spin, params: CssParams) -> StateVector {
    let i = spin.i();
    let (s, c) = (params.theta0 / 2.0).sin_cos();
    let amps = CVector::from_iterator(
        spin.dim(),
        (0..spin.dim()).map(|k| {
            // k = I - m lowering steps from |I, I>.
            let up = spin.two_i() - k as u32;
            let weight = binomial(spin.two_i(), up).sqrt() * c.powi(up as i32) * s.powi(k as i32);
            Complex64::from_polar(weight, (i - spin.m(k)) * params.phi0)
        }),
    );
    StateVector::normalized(amps).expect("CSS amplitudes are never all zero")
}

/// `e^{alpha I-} |I, I>`, normalized.
///
/// Evaluated from the terminating power series of the nilpotent `alpha I-`.
pub fn css_exponential(spin: Spin, alpha: Complex64) -> StateVector {
    let ops = SpinOperators::new(spin);
    let lower = ops.minus.matrix() * alpha;
    let mut term = StateVector::basis(spin.dim(), 0).amplitudes().clone();
    let mut sum = term.clone();
    for k in 1..spin.dim() {
        term = (&lower * term) / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    StateVector::normalized(sum).expect("leading amplitude is 1")
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * f64::from(n - j) / f64::from(j + 1))
}

/// `exp(-hbar H / k_B T) / Z` for a Hamiltonian in rad/s, without high-T truncation.
pub fn thermal_state(h_total: &Operator, env: &EnvironmentSpec) -> Result<DensityMatrix> {
    let temperature = env.temperature;
    if !(temperature > 0.0) {
        return Err(Error::param("temperature", format!("{temperature} must be > 0")));
    }
    let eig = eig_hermitian(h_total)?;
    let beta = HBAR / (K_B * temperature);
    let ground = eig.eigenvalues[0];
    // Shift by the ground energy so the largest weight is exactly 1.
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| (-(e - ground) * beta).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let diag: Vec<Complex64> = weights.iter().map(|w| Complex64::new(w / z, 0.0)).collect();
    let rho = eig.with_diagonal(&diag);
    Ok(DensityMatrix(hermitize(rho)))
}

fn hermitize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `hbar omega0 / (k_B T)`; diagnostic only.
pub fn polarization_factor(env: &EnvironmentSpec) -> f64 {
    HBAR * env.omega0() / (K_B * env.temperature)
}

/// The pi/2 pulse applied to thermal states: maps a `+Iz` deviation onto `-Ix`.
pub fn rtes_pulse(spin: Spin) -> Operator {
    rotation(spin, std::f64::consts::FRAC_PI_2, Direction::MINUS_Y)
}

/// Rotated thermal-equilibrium state `R rho R†`.
pub fn rtes(rho_thermal: &DensityMatrix) -> Result<DensityMatrix> {
    let spin = Spin::from_dim(rho_thermal.dim())?;
    let pulse = rtes_pulse(spin);
    Ok(rho_thermal.evolve(pulse.matrix()))
}

/// Normalized Hilbert–Schmidt overlap `Tr(ab) / sqrt(Tr(a^2) Tr(b^2))`.
pub fn fidelity(a: &(impl AsMatrix + ?Sized), b: &(impl AsMatrix + ?Sized)) -> Result<f64> {
    let (a, b) = (a.as_matrix(), b.as_matrix());
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    let aa = trace_product(a, a).re;
    let bb = trace_product(b, b).re;
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let f = trace_product(a, b).re / (aa * bb).sqrt();
    Ok(f.clamp(-1.0, 1.0))
}

/// Fidelity of `reference` against the deviation part `rho - 1/dim` of `rho`.
pub fn fidelity_deviation(reference: &(impl AsMatrix + ?Sized), rho: &DensityMatrix) -> Result<f64> {
    fidelity(reference, &rho.deviation())
}

/// Husimi Q function sampled on a rectangular grid of `alpha = x + iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct HusimiGrid {
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    /// `q_values[ix][iy]`.
    pub q_values: Vec<Vec<f64>>,
}

impl HusimiGrid {
    /// Grid point with the largest Q, as `(x, y, q)`.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (self.x_values[0], self.y_values[0], f64::NEG_INFINITY);
        for (ix, row) in self.q_values.iter().enumerate() {
            for (iy, &q) in row.iter().enumerate() {
                if q > best.2 {
                    best = (self.x_values[ix], self.y_values[iy], q);
                }
            }
        }
        best
    }
}

/// `Q(x, y) = <alpha| rho |alpha>` with `|alpha>` the normalized exponential CSS.
pub fn husimi_q(
    rho: &DensityMatrix,
    x_range: (f64, f64),
    y_range: (f64, f64),
    n_points: usize,
) -> Result<HusimiGrid> {
    if n_points < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            got: n_points,
        });
    }
    let spin = Spin::from_dim(rho.dim())?;
    let x_values = linspace(x_range.0, x_range.1, n_points);
    let y_values = linspace(y_range.0, y_range.1, n_points);
    let q_values = x_values
        .iter()
        .map(|&x| {
            y_values
                .iter()
                .map(|&y| {
                    let alpha = css_exponential(spin, Complex64::new(x, y));
                    let v = alpha.amplitudes();
                    v.dotc(&(rho.matrix() * v)).re
                })
                .collect()
        })
        .collect();
    Ok(HusimiGrid {
        x_values,
        y_values,
        q_values,
    })
}
