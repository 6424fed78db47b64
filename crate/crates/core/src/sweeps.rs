//! Parameter scans: fidelity over field and temperature, squeezing traces
//! over the asymmetry parameter, and the Euler-angle grid.
//!
//! Every grid point is an independent task and results are collected by
//! index, so serial and parallel runs produce identical tables.

use num_complex::Complex64;

use crate::dynamics::{propagate_relaxed, RelaxationSpec, RelaxationTarget, TimeGrid};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    effective_hamiltonian, full_hamiltonian, quadrupole_lab, Frame, HamiltonianSpec,
    PerturbationOrder,
};
use crate::observables::{golden_section_min, squeezing_trace, SqueezingProbe, SqueezingTrace};
use crate::spin::{eig_hermitian, CMatrix, CVector, Operator, Spin};
use crate::states::{
    css_state, fidelity, fidelity_deviation, rtes, thermal_state, CssParams, DensityMatrix,
    EnvironmentSpec,
};

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|k| if k == n - 1 { stop } else { start + step * k as f64 })
                .collect()
        }
    }
}

/// `n` log-spaced values from `start` to `stop` inclusive (both > 0).
pub fn logspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    let (a, b) = (start.log10(), stop.log10());
    linspace(a, b, n)
        .into_iter()
        .enumerate()
        .map(|(k, e)| match k {
            0 => start,
            _ if k == n - 1 => stop,
            _ => 10f64.powf(e),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// Uses the ambient rayon pool; runs serially when built without `parallel`.
    #[default]
    Parallel,
}

/// `(0..n).map(f)` with results in index order regardless of execution mode.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Serial => (0..n).map(f).collect(),
        Execution::Parallel => parallel_map(n, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Like [`map_indexed`], failing with the lowest-index error.
pub fn try_map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(n, exec, f).into_iter().collect()
}

/// Hamiltonian entering the Boltzmann factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalHamiltonian {
    /// Zeeman plus quadrupole coupling.
    #[default]
    Full,
    /// Quadrupole coupling alone.
    Quadrupole,
}

impl ThermalHamiltonian {
    pub fn build(self, spec: &HamiltonianSpec, spin: Spin) -> Operator {
        match self {
            ThermalHamiltonian::Full => full_hamiltonian(spec, spin),
            ThermalHamiltonian::Quadrupole => quadrupole_lab(spec, spin),
        }
    }
}

/// Fidelity of the rotated thermal state with the CSS `|zeta(pi/2, pi)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityMap {
    pub b_values: Vec<f64>,
    pub t_values: Vec<f64>,
    /// `f_full[it][ib]`: fidelity of the full density matrix.
    pub f_full: Vec<Vec<f64>>,
    /// `f_deviation[it][ib]`: fidelity of `rho - 1/dim`.
    pub f_deviation: Vec<Vec<f64>>,
}

impl FidelityMap {
    /// Smallest field at which row `it` of `f_full` reaches `level`, by linear
    /// interpolation; `None` if the row never does.
    pub fn contour_b(&self, it: usize, level: f64) -> Option<f64> {
        let row = &self.f_full[it];
        if row[0] >= level {
            return Some(self.b_values[0]);
        }
        row.windows(2).enumerate().find_map(|(k, w)| {
            (w[0] < level && w[1] >= level).then(|| {
                let (b0, b1) = (self.b_values[k], self.b_values[k + 1]);
                b0 + (b1 - b0) * (level - w[0]) / (w[1] - w[0])
            })
        })
    }
}

/// RTES fidelity over a `(B, T)` grid; `spec.omega0` is replaced per field value.
pub fn fidelity_map(
    b_values: &[f64],
    t_values: &[f64],
    gamma_n: f64,
    spin: Spin,
    spec: &HamiltonianSpec,
    thermal: ThermalHamiltonian,
    exec: Execution,
) -> Result<FidelityMap> {
    if b_values.is_empty() {
        return Err(Error::param("B_values", "empty range"));
    }
    if t_values.is_empty() {
        return Err(Error::param("T_values", "empty range"));
    }
    if let Some(t) = t_values.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::param("temperature", format!("{t} must be > 0")));
    }
    let reference = DensityMatrix::from_pure(&css_state(spin, CssParams::MINUS_X));
    let nb = b_values.len();
    let cells = try_map_indexed(nb * t_values.len(), exec, |idx| {
        let (it, ib) = (idx / nb, idx % nb);
        let env = EnvironmentSpec::new(b_values[ib], t_values[it], gamma_n)?;
        let point = spec.with_omega0(env.omega0())?;
        let rho = rtes(&thermal_state(&thermal.build(&point, spin), &env)?)?;
        Ok((fidelity(&reference, &rho)?, fidelity_deviation(&reference, &rho)?))
    })?;
    let rows = |pick: fn(&(f64, f64)) -> f64| -> Vec<Vec<f64>> {
        cells.chunks(nb).map(|row| row.iter().map(pick).collect()).collect()
    };
    Ok(FidelityMap {
        b_values: b_values.to_vec(),
        t_values: t_values.to_vec(),
        f_full: rows(|c| c.0),
        f_deviation: rows(|c| c.1),
    })
}

/// Starting state of a squeezing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialStateKind {
    Css(CssParams),
    /// Thermal equilibrium, unrotated.
    Thermal,
    /// Thermal equilibrium after the pi/2 pulse.
    Rtes,
}

/// Everything except the asymmetry parameter that defines a squeezing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeSetup {
    pub spin: Spin,
    pub spec: HamiltonianSpec,
    pub env: EnvironmentSpec,
    pub thermal: ThermalHamiltonian,
    pub initial: InitialStateKind,
    pub frame: Frame,
    pub relax: RelaxationSpec,
    pub target: RelaxationTarget,
    pub grid: TimeGrid,
}

impl SqueezeSetup {
    fn thermal_state(&self, spec: &HamiltonianSpec) -> Result<DensityMatrix> {
        thermal_state(&self.thermal.build(spec, self.spin), &self.env)
    }

    pub fn initial_state(&self, spec: &HamiltonianSpec) -> Result<DensityMatrix> {
        match self.initial {
            InitialStateKind::Css(params) => {
                Ok(DensityMatrix::from_pure(&css_state(self.spin, params)))
            }
            InitialStateKind::Thermal => self.thermal_state(spec),
            InitialStateKind::Rtes => rtes(&self.thermal_state(spec)?),
        }
    }

    fn relaxation_target(&self, spec: &HamiltonianSpec) -> Result<DensityMatrix> {
        match self.target {
            RelaxationTarget::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(self.spin.dim())),
            RelaxationTarget::Thermal => self.thermal_state(spec),
        }
    }

    /// Squeezing trace for the setup's own asymmetry parameter.
    pub fn run(&self) -> Result<SqueezingTrace> {
        let spec = &self.spec;
        let rho0 = self.initial_state(spec)?;
        let h = self.frame.hamiltonian(spec, self.spin)?;
        let rho_eq = self.relaxation_target(spec)?;
        let traj = propagate_relaxed(&rho0, &h, &self.grid, &self.relax, &rho_eq)?;
        squeezing_trace(&traj, self.spin)
    }
}

/// One squeezing trace per asymmetry value, in input order, on a shared grid.
pub fn eta_family(
    eta_values: &[f64],
    setup: &SqueezeSetup,
    exec: Execution,
) -> Result<Vec<SqueezingTrace>> {
    for &eta in eta_values {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::param("eta", format!("{eta} not in [0, 1]")));
        }
    }
    try_map_indexed(eta_values.len(), exec, |k| {
        let spec = setup.spec.with_eta(eta_values[k])?;
        SqueezeSetup { spec, ..*setup }.run()
    })
}

/// Minimum squeezing over `[0, 2/nu_Q]` for each `(beta_Q, eta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerGridResult {
    /// Radians.
    pub beta_values: Vec<f64>,
    pub eta_values: Vec<f64>,
    /// `xi_min[ib][ie]`.
    pub xi_min: Vec<Vec<f64>>,
    /// Seconds, `t_argmin[ib][ie]`.
    pub t_argmin: Vec<Vec<f64>>,
    /// Largest `max(|<Iy>|, |<Iz>|)` seen on the time samples, `msv_tilt[ib][ie]`.
    pub msv_tilt: Vec<Vec<f64>>,
}

impl EulerGridResult {
    /// Index of the beta with the smallest `xi_min` at asymmetry index `ie`.
    pub fn argmin_beta(&self, ie: usize) -> usize {
        argmin((0..self.beta_values.len()).map(|ib| self.xi_min[ib][ie]))
    }

    /// Index of the eta with the smallest `xi_min` at beta index `ib`.
    pub fn argmin_eta(&self, ib: usize) -> usize {
        argmin(self.xi_min[ib].iter().copied())
    }
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best })
        .0
}

/// Sampling of the `min_t xi` search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    /// Window length in units of `1/nu_Q`.
    pub periods: f64,
    pub samples: usize,
}

impl Default for SearchWindow {
    fn default() -> Self {
        SearchWindow {
            periods: 2.0,
            samples: 2000,
        }
    }
}

/// Closed-form `xi(t)` and MSV tilt for a pure state under a static Hamiltonian.
struct PureEvolution {
    eigenvalues: Vec<f64>,
    coeffs: CVector,
    /// Observables in the eigenbasis: Ix, Iy, Iz, A, B, C.
    observables: Vec<CMatrix>,
    spin: Spin,
}

impl PureEvolution {
    fn new(h: &Operator, psi0: &CVector, spin: Spin) -> Result<Self> {
        let eig = eig_hermitian(h)?;
        let v = &eig.eigenvectors;
        let probe = SqueezingProbe::new(spin);
        let observables = probe
            .operators()
            .into_iter()
            .map(|o| v.adjoint() * o.matrix() * v)
            .collect();
        Ok(PureEvolution {
            coeffs: v.adjoint() * psi0,
            eigenvalues: eig.eigenvalues,
            observables,
            spin,
        })
    }

    /// `(xi, tilt)` at time `t`.
    fn eval(&self, t: f64) -> (f64, f64) {
        let c: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, &l)| c * Complex64::from_polar(1.0, -l * t))
            .collect();
        let e = |o: &CMatrix| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, ci) in c.iter().enumerate() {
                for (j, cj) in c.iter().enumerate() {
                    acc += ci.conj() * o[(i, j)] * cj;
                }
            }
            acc.re
        };
        let m: Vec<f64> = self.observables.iter().map(e).collect();
        let xi = ((m[5] - m[3].hypot(m[4])) / self.spin.i()).max(0.0).sqrt();
        (xi, m[1].abs().max(m[2].abs()))
    }
}

/// Scans `(beta_Q, eta)` with the effective Hamiltonian of the given order,
/// starting from `|zeta(pi/2, pi)>`. `alpha_Q` and `gamma_Q` must be zero.
pub fn euler_grid(
    beta_values: &[f64],
    eta_values: &[f64],
    base: &HamiltonianSpec,
    spin: Spin,
    order: PerturbationOrder,
    window: SearchWindow,
    exec: Execution,
) -> Result<EulerGridResult> {
    if base.euler.alpha != 0.0 {
        return Err(Error::EulerAngleNotSupported("alpha_Q"));
    }
    if base.euler.gamma != 0.0 {
        return Err(Error::EulerAngleNotSupported("gamma_Q"));
    }
    if window.samples < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            got: window.samples,
        });
    }
    if !(base.omega_q > 0.0) {
        return Err(Error::param("omegaQ", "must be > 0 for a squeezing window"));
    }
    for &eta in eta_values {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::param("eta", format!("{eta} not in [0, 1]")));
        }
    }
    let psi0 = css_state(spin, CssParams::MINUS_X).amplitudes().clone();
    let duration = window.periods / base.nu_q();
    let times = linspace(0.0, duration, window.samples);
    let ne = eta_values.len();

    let cells = try_map_indexed(beta_values.len() * ne, exec, |idx| {
        let (ib, ie) = (idx / ne, idx % ne);
        let mut spec = base.with_eta(eta_values[ie])?;
        spec.euler.beta = beta_values[ib];
        let h = effective_hamiltonian(&spec, spin, order)?;
        let evo = PureEvolution::new(&h, &psi0, spin)?;
        let samples: Vec<(f64, f64)> = times.iter().map(|&t| evo.eval(t)).collect();
        let tilt = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        let k = argmin(samples.iter().map(|s| s.0));
        let lo = times[k.saturating_sub(1)];
        let hi = times[(k + 1).min(times.len() - 1)];
        let (t_best, xi_best) = golden_section_min(|t| evo.eval(t).0, lo, hi, 1e-12 * duration);
        Ok(if xi_best < samples[k].0 {
            (xi_best, t_best, tilt)
        } else {
            (samples[k].0, times[k], tilt)
        })
    })?;

    let rows = |pick: fn(&(f64, f64, f64)) -> f64| -> Vec<Vec<f64>> {
        if ne == 0 {
            return vec![Vec::new(); beta_values.len()];
        }
        cells.chunks(ne).map(|row| row.iter().map(pick).collect()).collect()
    };
    Ok(EulerGridResult {
        beta_values: beta_values.to_vec(),
        eta_values: eta_values.to_vec(),
        xi_min: rows(|c| c.0),
        t_argmin: rows(|c| c.1),
        msv_tilt: rows(|c| c.2),
    })
}
