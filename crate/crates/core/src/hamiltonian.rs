//! Zeeman and quadrupole Hamiltonians, Euler rotation of the EFG principal
//! axes, and rotating-frame effective Hamiltonians.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spin::{commutator, CMatrix, Direction, Operator, Spin, SpinOperators};

/// Active ZYZ Euler angles `(alpha, beta, gamma)` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub const ZERO: EulerAngles = EulerAngles {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }

    pub fn from_degrees(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles::new(alpha.to_radians(), beta.to_radians(), gamma.to_radians())
    }
}

/// Everything that defines the static Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    /// Larmor frequency, rad/s.
    pub omega0: f64,
    /// Quadrupole coupling strength, rad/s.
    pub omega_q: f64,
    /// Asymmetry parameter in `[0, 1]`.
    pub eta: f64,
    pub euler: EulerAngles,
}

impl HamiltonianSpec {
    pub fn new(omega0: f64, omega_q: f64, eta: f64, euler: EulerAngles) -> Result<Self> {
        if !(omega0 >= 0.0 && omega0.is_finite()) {
            return Err(Error::param("omega0", format!("{omega0} must be >= 0")));
        }
        if !(omega_q >= 0.0 && omega_q.is_finite()) {
            return Err(Error::param("omegaQ", format!("{omega_q} must be >= 0")));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::param("eta", format!("{eta} not in [0, 1]")));
        }
        Ok(HamiltonianSpec {
            omega0,
            omega_q,
            eta,
            euler,
        })
    }

    /// Builds a spec from laboratory units: `gamma_n` in Hz/T, `b0` in T and
    /// the satellite splitting `nu_q` in Hz (`omega_Q = 2 pi nu_Q / 3`).
    pub fn from_lab_units(
        gamma_n: f64,
        b0: f64,
        nu_q: f64,
        eta: f64,
        euler: EulerAngles,
    ) -> Result<Self> {
        HamiltonianSpec::new(TAU * gamma_n * b0, omega_q_from_nu_q(nu_q), eta, euler)
    }

    /// `nu_Q = 3 omega_Q / 2 pi` (the I = 3/2, eta = 0 line splitting), Hz.
    pub fn nu_q(&self) -> f64 {
        3.0 * self.omega_q / TAU
    }

    pub fn with_eta(self, eta: f64) -> Result<Self> {
        HamiltonianSpec::new(self.omega0, self.omega_q, eta, self.euler)
    }

    pub fn with_euler(self, euler: EulerAngles) -> Self {
        HamiltonianSpec { euler, ..self }
    }

    pub fn with_omega0(self, omega0: f64) -> Result<Self> {
        HamiltonianSpec::new(omega0, self.omega_q, self.eta, self.euler)
    }
}

/// `omega_Q = 2 pi nu_Q / 3`.
pub fn omega_q_from_nu_q(nu_q: f64) -> f64 {
    TAU * nu_q / 3.0
}

/// `H_Z = -omega0 Iz`; the low-energy level is `m = +I`.
pub fn zeeman_hamiltonian(spec: &HamiltonianSpec, spin: Spin) -> Operator {
    SpinOperators::new(spin).z.scale(-spec.omega0)
}

/// Quadrupole coupling in the principal axis frame,
/// `(omega_Q / 2) [3 Iz^2 - I(I+1) + eta (Ix^2 - Iy^2)]`.
pub fn quadrupole_pas(spec: &HamiltonianSpec, spin: Spin) -> Operator {
    let ops = SpinOperators::new(spin);
    let z2 = &ops.z * &ops.z;
    let x2 = &ops.x * &ops.x;
    let y2 = &ops.y * &ops.y;
    let secular = &z2.scale(3.0) - &Operator::identity(spin.dim()).scale(spin.casimir());
    let asym = (&x2 - &y2).scale(spec.eta);
    (&secular + &asym).scale(spec.omega_q / 2.0)
}

/// `R = exp(-i alpha Iz) exp(-i beta Iy) exp(-i gamma Iz)`.
pub fn euler_rotation(spin: Spin, euler: EulerAngles) -> Operator {
    let rz = |angle: f64| crate::spin::rotation(spin, angle, Direction::Z);
    let ry = crate::spin::rotation(spin, euler.beta, Direction::Y);
    &(&rz(euler.alpha) * &ry) * &rz(euler.gamma)
}

/// `R H R†`: principal-axis operator expressed in the laboratory frame.
pub fn euler_rotate(h_pas: &Operator, euler: EulerAngles, spin: Spin) -> Operator {
    h_pas.conjugated_by(&euler_rotation(spin, euler))
}

/// Quadrupole coupling in the laboratory frame (all terms kept).
pub fn quadrupole_lab(spec: &HamiltonianSpec, spin: Spin) -> Operator {
    euler_rotate(&quadrupole_pas(spec, spin), spec.euler, spin)
}

/// Full static Hamiltonian `H_Z + H_Q^LAB`.
pub fn full_hamiltonian(spec: &HamiltonianSpec, spin: Spin) -> Operator {
    &zeeman_hamiltonian(spec, spin) + &quadrupole_lab(spec, spin)
}

/// Splits `h` into components `V_q` with `[Iz, V_q] = q V_q`.
///
/// `Iz` is diagonal in the working basis, so the eigenspaces of `ad_Iz` are
/// the entries with fixed `m_row - m_col`. Returns `(q, V_q)` for
/// `q = -2I ..= 2I`, including zero components.
pub fn coherence_components(h: &Operator, spin: Spin) -> Vec<(i32, Operator)> {
    let dim = spin.dim();
    let max_q = spin.two_i() as i32;
    (-max_q..=max_q)
        .map(|q| {
            // Row index r has m = I - r, so m_r - m_c = c - r.
            let m = CMatrix::from_fn(dim, dim, |r, c| {
                if c as i32 - r as i32 == q {
                    h.matrix()[(r, c)]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            (q, Operator::new(m))
        })
        .collect()
}

/// Perturbative order of the rotating-frame effective Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationOrder {
    /// Secular part only.
    First,
    /// Secular part plus the second-order van Vleck correction.
    Second,
}

impl TryFrom<u8> for PerturbationOrder {
    type Error = Error;

    fn try_from(order: u8) -> Result<Self> {
        match order {
            1 => Ok(PerturbationOrder::First),
            2 => Ok(PerturbationOrder::Second),
            other => Err(Error::param("order", format!("{other} (expected 1 or 2)"))),
        }
    }
}

/// Rotating-frame effective quadrupole Hamiltonian.
///
/// With `H_Q^LAB = sum_q V_q`, first order keeps `V_0`; second order adds
/// `sum_{q>0} [V_{-q}, V_q] / (q omega0)`, the sign matching `H_Z = -omega0 Iz`.
pub fn effective_hamiltonian(
    spec: &HamiltonianSpec,
    spin: Spin,
    order: PerturbationOrder,
) -> Result<Operator> {
    let lab = quadrupole_lab(spec, spin);
    let parts = coherence_components(&lab, spin);
    let component = |q: i32| &parts[(q + spin.two_i() as i32) as usize].1;
    let secular = component(0).clone();

    let nonsecular = parts
        .iter()
        .filter(|(q, _)| *q != 0)
        .map(|(_, v)| v.max_abs())
        .fold(0.0, f64::max);
    let scale = lab.max_abs().max(f64::MIN_POSITIVE);
    let has_nonsecular = nonsecular > 1e-12 * scale;
    if spec.omega0 == 0.0 && has_nonsecular {
        return Err(Error::NoRotatingFrame);
    }
    if spec.omega0 > 0.0 && spec.omega0 < 10.0 * spec.omega_q {
        log::warn!(
            "omega0/omegaQ = {:.3}: perturbative effective Hamiltonian may be inaccurate",
            spec.omega0 / spec.omega_q
        );
    }

    match order {
        PerturbationOrder::First => Ok(secular),
        PerturbationOrder::Second => {
            if !has_nonsecular {
                return Ok(secular);
            }
            let mut h = secular;
            for q in 1..=spin.two_i() as i32 {
                let c = commutator(component(-q), component(q))?;
                h = &h + &c.scale(1.0 / (f64::from(q) * spec.omega0));
            }
            // The correction is Hermitian analytically; drop rounding residue.
            let m = h.matrix();
            Ok(Operator::new(
                (m + m.adjoint()) * Complex64::new(0.5, 0.0),
            ))
        }
    }
}

/// Which Hamiltonian drives the squeezing dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// The bare quadrupole coupling of the principal-axis form, Euler-rotated,
    /// with no Zeeman term and no secular truncation.
    Quadrupole,
    /// Rotating frame at omega0 with the effective Hamiltonian of given order.
    Rotating(PerturbationOrder),
}

impl Frame {
    pub fn hamiltonian(&self, spec: &HamiltonianSpec, spin: Spin) -> Result<Operator> {
        match *self {
            Frame::Quadrupole => Ok(quadrupole_lab(spec, spin)),
            Frame::Rotating(order) => effective_hamiltonian(spec, spin, order),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::eig_hermitian;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn three_halves() -> Spin {
        Spin::new(3).unwrap()
    }

    fn spec(eta: f64, beta_deg: f64) -> HamiltonianSpec {
        HamiltonianSpec::new(0.0, 1.0, eta, EulerAngles::from_degrees(0.0, beta_deg, 0.0)).unwrap()
    }

    #[test]
    fn zeeman_working_point() {
        let s = HamiltonianSpec::from_lab_units(11.26e6, 7.0, 200e3, 0.0, EulerAngles::ZERO)
            .unwrap();
        assert_abs_diff_eq!(s.omega0 / TAU, 78.82e6, epsilon = 1e-3);
        let h = zeeman_hamiltonian(&s, three_halves());
        let e = eig_hermitian(&h).unwrap().eigenvalues;
        for w in e.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], s.omega0, epsilon = 1e-6);
        }
        let zero = s.with_omega0(0.0).unwrap();
        assert_eq!(zeeman_hamiltonian(&zero, three_halves()).max_abs(), 0.0);
    }

    #[test]
    fn quadrupole_aligned_diagonal() {
        let h = quadrupole_pas(&spec(0.0, 0.0), three_halves());
        let expected = Operator::from_diagonal(&[1.5, -1.5, -1.5, 1.5]);
        assert!(h.max_abs_diff(&expected) < 1e-14);
        assert!(h.is_hermitian());
        assert!(h.trace().norm() < 1e-14);
        let e = eig_hermitian(&h).unwrap().eigenvalues;
        assert_eq!(e, vec![-1.5, -1.5, 1.5, 1.5]);
    }

    #[test]
    fn quadrupole_asymmetry_couples_delta_m_two() {
        let h = &quadrupole_pas(&spec(1.0, 0.0), three_halves())
            - &quadrupole_pas(&spec(0.0, 0.0), three_halves());
        for r in 0..4usize {
            for c in 0..4usize {
                let v = h.matrix()[(r, c)].norm();
                if r.abs_diff(c) == 2 {
                    assert!(v > 0.1);
                } else {
                    assert!(v < 1e-14);
                }
            }
        }
        let zero = HamiltonianSpec::new(0.0, 0.0, 1.0, EulerAngles::ZERO).unwrap();
        assert_eq!(quadrupole_pas(&zero, three_halves()).max_abs(), 0.0);
    }

    #[test]
    fn satellite_splitting_is_nu_q() {
        // Exact diagonalization of H_Z + H_Q, eta = 0: adjacent-line spacing.
        let s = HamiltonianSpec::new(1e3, 1.0, 0.0, EulerAngles::ZERO).unwrap();
        let e = eig_hermitian(&full_hamiltonian(&s, three_halves())).unwrap().eigenvalues;
        let lines: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
        assert_abs_diff_eq!((lines[0] - lines[1]).abs() / TAU, s.nu_q(), epsilon = 1e-9);
        assert_abs_diff_eq!((lines[2] - lines[1]).abs() / TAU, s.nu_q(), epsilon = 1e-9);
    }

    #[test]
    fn euler_rotation_examples() {
        let spin = three_halves();
        let h = quadrupole_pas(&spec(0.6, 0.0), spin);
        assert!(euler_rotate(&h, EulerAngles::ZERO, spin).max_abs_diff(&h) < 1e-14);
        let h0 = quadrupole_pas(&spec(0.0, 0.0), spin);
        let flipped = euler_rotate(&h0, EulerAngles::new(0.0, PI, 0.0), spin);
        assert!(flipped.max_abs_diff(&h0) < 1e-12);
        let before = eig_hermitian(&h).unwrap().eigenvalues;
        let after = eig_hermitian(&euler_rotate(&h, EulerAngles::new(0.3, 1.1, -2.0), spin))
            .unwrap()
            .eigenvalues;
        for (a, b) in before.iter().zip(&after) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-11);
        }
    }

    #[test]
    fn coherence_components_sum_and_commute() {
        let spin = three_halves();
        let ops = SpinOperators::new(spin);
        let h = quadrupole_lab(&spec(0.7, 40.0).with_euler(EulerAngles::new(0.2, 0.7, 0.4)), spin);
        let parts = coherence_components(&h, spin);
        let mut sum = Operator::zeros(4);
        for (q, v) in &parts {
            let c = commutator(&ops.z, v).unwrap();
            assert!(c.max_abs_diff(&v.scale(f64::from(*q))) < 1e-12);
            sum = &sum + v;
        }
        assert!(sum.max_abs_diff(&h) < 1e-14);
    }

    #[test]
    fn aligned_eta_zero_is_already_secular() {
        let spin = three_halves();
        let s = spec(0.0, 0.0).with_omega0(400.0).unwrap();
        let pas = quadrupole_pas(&s, spin);
        for order in [PerturbationOrder::First, PerturbationOrder::Second] {
            let h = effective_hamiltonian(&s, spin, order).unwrap();
            assert!(h.max_abs_diff(&pas) < 1e-14);
        }
    }

    #[test]
    fn aligned_asymmetry_drops_at_first_order() {
        let spin = three_halves();
        let s1 = spec(1.0, 0.0).with_omega0(400.0).unwrap();
        let s0 = spec(0.0, 0.0).with_omega0(400.0).unwrap();
        let h1 = effective_hamiltonian(&s1, spin, PerturbationOrder::First).unwrap();
        let h0 = effective_hamiltonian(&s0, spin, PerturbationOrder::First).unwrap();
        assert!(h1.max_abs_diff(&h0) < 1e-14);
    }

    #[test]
    fn secular_scaling_at_sixty_degrees() {
        let spin = three_halves();
        let aligned = effective_hamiltonian(
            &spec(0.0, 0.0).with_omega0(400.0).unwrap(),
            spin,
            PerturbationOrder::First,
        )
        .unwrap();
        let tilted = effective_hamiltonian(
            &spec(0.0, 60.0).with_omega0(400.0).unwrap(),
            spin,
            PerturbationOrder::First,
        )
        .unwrap();
        assert!(tilted.max_abs_diff(&aligned.scale(-0.125)) < 1e-13);

        // Brute force: exact satellite splitting of H_Z + H_Q at omega0/omegaQ = 400.
        let s = spec(0.0, 60.0).with_omega0(400.0).unwrap();
        let e = eig_hermitian(&full_hamiltonian(&s, spin)).unwrap().eigenvalues;
        let split = (e[3] - e[2]) - (e[1] - e[0]);
        let first_order: f64 = 2.0 * 3.0 * -0.125;
        assert!((split.abs() - first_order.abs()).abs() < 0.02 * first_order.abs());
    }

    #[test]
    fn first_order_commutes_with_iz() {
        let spin = three_halves();
        let ops = SpinOperators::new(spin);
        for (eta, a, b, g) in [(0.3, 0.1, 0.9, 0.4), (1.0, 2.0, 2.4, 1.0), (0.0, 0.0, 0.5, 0.0)] {
            let s = HamiltonianSpec::new(500.0, 1.0, eta, EulerAngles::new(a, b, g)).unwrap();
            let h = effective_hamiltonian(&s, spin, PerturbationOrder::First).unwrap();
            assert!(commutator(&ops.z, &h).unwrap().max_abs() < 1e-11);
        }
    }

    #[test]
    fn second_order_needs_rotating_frame() {
        let spin = three_halves();
        let s = spec(0.0, 30.0);
        assert_eq!(
            effective_hamiltonian(&s, spin, PerturbationOrder::Second),
            Err(Error::NoRotatingFrame)
        );
        assert_eq!(
            effective_hamiltonian(&s, spin, PerturbationOrder::First),
            Err(Error::NoRotatingFrame)
        );
        assert!(effective_hamiltonian(&spec(0.0, 0.0), spin, PerturbationOrder::Second).is_ok());
    }

    fn transition_error(ratio: f64, eta: f64, beta: f64) -> f64 {
        let spin = three_halves();
        let omega0 = 1.0;
        let s = HamiltonianSpec::new(omega0, omega0 / ratio, eta, EulerAngles::new(0.0, beta, 0.0))
            .unwrap();
        let exact = eig_hermitian(&full_hamiltonian(&s, spin)).unwrap().eigenvalues;
        let eff = &zeeman_hamiltonian(&s, spin)
            + &effective_hamiltonian(&s, spin, PerturbationOrder::Second).unwrap();
        let approx = eig_hermitian(&eff).unwrap().eigenvalues;
        exact
            .windows(2)
            .zip(approx.windows(2))
            .map(|(a, b)| ((a[1] - a[0]) - (b[1] - b[0])).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn second_order_error_scales_as_cube() {
        for (eta, beta) in [(0.0, 0.5), (0.5, 1.0), (1.0, 0.95)] {
            let ratio = transition_error(100.0, eta, beta) / transition_error(400.0, eta, beta);
            assert!((32.0..=128.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn diagonal_lab_coupling_has_no_second_order_term() {
        let spin = three_halves();
        let s = spec(0.0, 0.0).with_omega0(50.0).unwrap();
        let h1 = effective_hamiltonian(&s, spin, PerturbationOrder::First).unwrap();
        let h2 = effective_hamiltonian(&s, spin, PerturbationOrder::Second).unwrap();
        assert!(h1.max_abs_diff(&h2) < 1e-11);
    }

    #[test]
    fn spec_validation() {
        assert!(HamiltonianSpec::new(1.0, 1.0, 1.5, EulerAngles::ZERO).is_err());
        assert!(HamiltonianSpec::new(1.0, -1.0, 0.5, EulerAngles::ZERO).is_err());
        assert!(PerturbationOrder::try_from(3).is_err());
        let s = HamiltonianSpec::from_lab_units(11.26e6, 7.0, 200e3, 0.0, EulerAngles::ZERO)
            .unwrap();
        assert_abs_diff_eq!(s.omega_q, TAU * 200e3 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.nu_q(), 200e3, epsilon = 1e-9);
    }
}
