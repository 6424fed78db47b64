//! Time evolution of density matrices, with optional T1/T2 relaxation, and
//! free-induction-decay signals.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spin::{eig_hermitian, trace_product, CMatrix, Operator, Spin, SpinOperators};
use crate::states::DensityMatrix;

/// Phenomenological relaxation times in seconds; `None` means no relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelaxationSpec {
    t1: Option<f64>,
    t2: Option<f64>,
}

impl RelaxationSpec {
    pub const NONE: RelaxationSpec = RelaxationSpec { t1: None, t2: None };

    pub fn new(t1: Option<f64>, t2: Option<f64>) -> Result<Self> {
        for (name, value) in [("T1", t1), ("T2", t2)] {
            if let Some(v) = value {
                if !(v > 0.0) {
                    return Err(Error::param(name, format!("{v} must be > 0")));
                }
            }
        }
        if let (Some(t1), Some(t2)) = (t1, t2) {
            if t2 > 2.0 * t1 {
                return Err(Error::param("T2", format!("T2 = {t2} exceeds 2 T1 = {}", 2.0 * t1)));
            }
        }
        Ok(RelaxationSpec { t1, t2 })
    }

    pub fn t1(&self) -> Option<f64> {
        self.t1
    }

    pub fn t2(&self) -> Option<f64> {
        self.t2
    }

    pub fn is_active(&self) -> bool {
        self.t1.is_some() || self.t2.is_some()
    }

    fn decay(time: Option<f64>, dt: f64) -> f64 {
        time.map_or(1.0, |t| (-dt / t).exp())
    }
}

/// Which state populations relax toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelaxationTarget {
    /// `1/dim`.
    #[default]
    MaximallyMixed,
    /// Thermal state of the static Hamiltonian at the configured field and temperature.
    Thermal,
}

/// Uniform sampling `t_k = k dt`, `k = 0..n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("{dt} must be > 0")));
        }
        if n_steps == 0 {
            return Err(Error::param("n_steps", "must be positive"));
        }
        Ok(TimeGrid { dt, n_steps })
    }

    /// `n_samples` points covering `[0, duration]` inclusive.
    pub fn spanning(duration: f64, n_samples: usize) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::TooFewSamples {
                required: 2,
                got: n_samples,
            });
        }
        TimeGrid::new(duration / (n_samples - 1) as f64, n_samples)
    }

    /// Largest step allowed by the resolution rule, `min(T2, 2 pi / omega_Q) / 50`.
    pub fn max_dt(relax: &RelaxationSpec, omega_q: f64) -> f64 {
        let period = if omega_q > 0.0 {
            std::f64::consts::TAU / omega_q
        } else {
            f64::INFINITY
        };
        relax.t2.unwrap_or(f64::INFINITY).min(period) / 50.0
    }

    /// Covers `[0, duration]` with at least `min_samples` points and a step
    /// obeying the resolution rule when relaxation is active.
    pub fn resolved(
        duration: f64,
        min_samples: usize,
        relax: &RelaxationSpec,
        omega_q: f64,
    ) -> Result<Self> {
        let coarse = TimeGrid::spanning(duration, min_samples)?;
        if !relax.is_active() || coarse.dt <= TimeGrid::max_dt(relax, omega_q) {
            return Ok(coarse);
        }
        let dt = TimeGrid::max_dt(relax, omega_q);
        let n = (duration / dt).ceil() as usize + 1;
        TimeGrid::new(dt, n)
    }

    /// Errors if relaxation is active and `dt` breaks the resolution rule.
    pub fn check_resolution(&self, relax: &RelaxationSpec, omega_q: f64) -> Result<()> {
        let limit = TimeGrid::max_dt(relax, omega_q);
        if relax.is_active() && self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::param(
                "dt",
                format!("{:e} s exceeds the resolution limit {limit:e} s", self.dt),
            ));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.n_steps - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_steps).map(|k| k as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn check_dim(rho: &DensityMatrix, h: &Operator) -> Result<()> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: h.dim(),
        });
    }
    Ok(())
}

/// Exact unitary evolution `U_k rho0 U_k†`, `U_k = exp(-i H k dt)`, from one
/// eigendecomposition of `H`.
pub fn propagate_unitary(rho0: &DensityMatrix, h: &Operator, grid: &TimeGrid) -> Result<Trajectory> {
    check_dim(rho0, h)?;
    let eig = eig_hermitian(h)?;
    let v = &eig.eigenvectors;
    let rho_eig = v.adjoint() * rho0.matrix() * v;
    let lambda = &eig.eigenvalues;
    let times = grid.times();
    let states = times
        .iter()
        .map(|&t| {
            let phased = CMatrix::from_fn(rho_eig.nrows(), rho_eig.ncols(), |i, j| {
                rho_eig[(i, j)] * Complex64::from_polar(1.0, -(lambda[i] - lambda[j]) * t)
            });
            DensityMatrix::from_matrix_unchecked(hermitize(&(v * phased * v.adjoint())))
        })
        .collect();
    Ok(Trajectory { times, states })
}

/// One relaxation step in the Iz eigenbasis: populations relax toward the
/// diagonal of `rho_eq` with `exp(-dt/T1)`, coherences decay with `exp(-dt/T2)`.
pub fn relaxation_step(
    rho: &DensityMatrix,
    dt: f64,
    relax: &RelaxationSpec,
    rho_eq: &DensityMatrix,
) -> DensityMatrix {
    let f1 = RelaxationSpec::decay(relax.t1, dt);
    let f2 = RelaxationSpec::decay(relax.t2, dt);
    let r = rho.matrix();
    let eq = rho_eq.matrix();
    let out = CMatrix::from_fn(r.nrows(), r.ncols(), |i, j| {
        if i == j {
            eq[(i, i)] + (r[(i, i)] - eq[(i, i)]) * f1
        } else {
            r[(i, j)] * f2
        }
    });
    DensityMatrix::from_matrix_unchecked(out)
}

/// First-order splitting: exact unitary step of length `dt`, then relaxation.
pub fn propagate_relaxed(
    rho0: &DensityMatrix,
    h: &Operator,
    grid: &TimeGrid,
    relax: &RelaxationSpec,
    rho_eq: &DensityMatrix,
) -> Result<Trajectory> {
    if !relax.is_active() {
        return propagate_unitary(rho0, h, grid);
    }
    check_dim(rho0, h)?;
    check_dim(rho_eq, h)?;
    let limit = relax.t1.into_iter().chain(relax.t2).fold(f64::INFINITY, f64::min) / 50.0;
    if grid.dt > limit * (1.0 + 1e-12) {
        return Err(Error::param(
            "dt",
            format!("{:e} s exceeds the relaxation resolution limit {limit:e} s", grid.dt),
        ));
    }
    let u = eig_hermitian(h)?.propagator(grid.dt);
    let u_dag = u.adjoint();
    let mut states = Vec::with_capacity(grid.n_steps);
    let mut rho = rho0.clone();
    states.push(rho.clone());
    for _ in 1..grid.n_steps {
        let rotated = DensityMatrix::from_matrix_unchecked(hermitize(&(&u * rho.matrix() * &u_dag)));
        rho = relaxation_step(&rotated, grid.dt, relax, rho_eq);
        states.push(rho.clone());
    }
    Ok(Trajectory {
        times: grid.times(),
        states,
    })
}

/// `s(t_k) = Tr(rho(t_k) I+) exp(-t_k / T2)` under unitary evolution by `H`.
pub fn fid(
    rho0: &DensityMatrix,
    h: &Operator,
    grid: &TimeGrid,
    t2: Option<f64>,
) -> Result<Vec<Complex64>> {
    if let Some(t2) = t2 {
        if !(t2 > 0.0) {
            return Err(Error::param("T2", format!("{t2} must be > 0")));
        }
    }
    let spin = Spin::from_dim(rho0.dim())?;
    let plus = SpinOperators::new(spin).plus;
    let traj = propagate_unitary(rho0, h, grid)?;
    Ok(traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, rho)| {
            let envelope = t2.map_or(1.0, |t2| (-t / t2).exp());
            trace_product(rho.matrix(), plus.matrix()) * envelope
        })
        .collect())
}
