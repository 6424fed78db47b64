//! Squeezing parameter, mean-spin-vector diagnostics and FID spectra.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::spin::{trace_product, AsMatrix, CMatrix, Operator, Spin, SpinOperators};

/// Relative tolerance (in units of `I`) for the MSV lying along x.
pub const MSV_TOLERANCE: f64 = 1e-6;

/// Operators needed for the squeezing closed form, built once per spin.
#[derive(Debug, Clone)]
pub struct SqueezingProbe {
    spin: Spin,
    ops: SpinOperators,
    a_op: Operator,
    b_op: Operator,
    c_op: Operator,
}

impl SqueezingProbe {
    pub fn new(spin: Spin) -> Self {
        let ops = SpinOperators::new(spin);
        let y2 = &ops.y * &ops.y;
        let z2 = &ops.z * &ops.z;
        let a_op = &y2 - &z2;
        let b_op = &(&ops.y * &ops.z) + &(&ops.z * &ops.y);
        let c_op = &y2 + &z2;
        SqueezingProbe {
            spin,
            ops,
            a_op,
            b_op,
            c_op,
        }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    /// `[Ix, Iy, Iz, A, B, C]` as operators.
    pub fn operators(&self) -> [&Operator; 6] {
        [&self.ops.x, &self.ops.y, &self.ops.z, &self.a_op, &self.b_op, &self.c_op]
    }

    /// Moments of `rho`; no precondition is checked.
    pub fn moments(&self, rho: &(impl AsMatrix + ?Sized)) -> Result<SpinMoments> {
        let rho = rho.as_matrix();
        if rho.nrows() != self.spin.dim() {
            return Err(Error::DimensionMismatch {
                left: rho.nrows(),
                right: self.spin.dim(),
            });
        }
        let e = |o: &Operator| trace_product(rho, o.matrix()).re;
        Ok(SpinMoments {
            msv: [e(&self.ops.x), e(&self.ops.y), e(&self.ops.z)],
            a: e(&self.a_op),
            b: e(&self.b_op),
            c: e(&self.c_op),
        })
    }
}

/// Mean spin vector and the second moments `A = <Iy^2 - Iz^2>`,
/// `B = <Iy Iz + Iz Iy>`, `C = <Iy^2 + Iz^2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMoments {
    pub msv: [f64; 3],
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SpinMoments {
    /// `sqrt((C - sqrt(A^2 + B^2)) / I)`, clamped at zero.
    pub fn xi(&self, spin: Spin) -> f64 {
        ((self.c - self.a.hypot(self.b)) / spin.i()).max(0.0).sqrt()
    }

    /// Largest of `|<Iy>|`, `|<Iz>|`.
    pub fn msv_tilt(&self) -> f64 {
        self.msv[1].abs().max(self.msv[2].abs())
    }

    pub fn check_alignment(&self, spin: Spin) -> Result<()> {
        let tolerance = MSV_TOLERANCE * spin.i();
        for (component, value) in [("Iy", self.msv[1]), ("Iz", self.msv[2])] {
            if !(value.abs() < tolerance) {
                return Err(Error::MsvMisaligned {
                    component,
                    value,
                    tolerance,
                });
            }
        }
        Ok(())
    }
}

fn check_spin(rho: &CMatrix, spin: Spin) -> Result<()> {
    if rho.nrows() != spin.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.nrows(),
            right: spin.dim(),
        });
    }
    Ok(())
}

/// Kitagawa–Ueda squeezing parameter for a state whose MSV lies along x.
pub fn squeezing_parameter(rho: &(impl AsMatrix + ?Sized), spin: Spin) -> Result<f64> {
    check_spin(rho.as_matrix(), spin)?;
    let m = SqueezingProbe::new(spin).moments(rho)?;
    m.check_alignment(spin)?;
    Ok(m.xi(spin))
}

/// Minimum over `phi` of `Var(cos(phi) Iy + sin(phi) Iz)` by direct scan and
/// golden-section refinement, reported as `sqrt(2 Var_min / I)`.
pub fn squeezing_bruteforce(rho: &(impl AsMatrix + ?Sized), spin: Spin) -> Result<f64> {
    let rho = rho.as_matrix();
    check_spin(rho, spin)?;
    let probe = SqueezingProbe::new(spin);
    probe.moments(rho)?.check_alignment(spin)?;
    let (y, z) = (probe.ops.y.matrix(), probe.ops.z.matrix());
    let variance = |phi: f64| {
        let o = y * Complex64::new(phi.cos(), 0.0) + z * Complex64::new(phi.sin(), 0.0);
        let mean = trace_product(rho, &o).re;
        trace_product(rho, &(&o * &o)).re - mean * mean
    };

    const SCAN: usize = 721;
    let step = std::f64::consts::PI / SCAN as f64;
    let best = (0..SCAN)
        .map(|k| k as f64 * step)
        .min_by(|&a, &b| variance(a).total_cmp(&variance(b)))
        .expect("scan is non-empty");
    // The variance has period pi in phi, so the bracket may leave [0, pi).
    let v_min = golden_section_min(variance, best - step, best + step, 1e-12).1;
    Ok((2.0 * v_min / spin.i()).max(0.0).sqrt())
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`; returns `(x, f(x))`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    let fx = f(x);
    // Keep the best value seen so a flat bracket never reports worse than a probe.
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("three candidates")
}

/// Squeezing parameter and moments along a trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SqueezingTrace {
    pub times: Vec<f64>,
    pub xi: Vec<f64>,
    pub msv: Vec<[f64; 3]>,
    /// `(A, B, C)` per time.
    pub abc: Vec<[f64; 3]>,
}

impl SqueezingTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Evaluates `xi` at every state; reports the first index violating the MSV precondition.
pub fn squeezing_trace(traj: &Trajectory, spin: Spin) -> Result<SqueezingTrace> {
    let probe = SqueezingProbe::new(spin);
    let mut out = SqueezingTrace {
        times: traj.times.clone(),
        ..SqueezingTrace::default()
    };
    for (index, rho) in traj.states.iter().enumerate() {
        let m = probe
            .moments(rho)
            .and_then(|m| m.check_alignment(spin).map(|()| m))
            .map_err(|e| Error::AtTimeIndex {
                index,
                source: Box::new(e),
            })?;
        out.xi.push(m.xi(spin));
        out.msv.push(m.msv);
        out.abc.push([m.a, m.b, m.c]);
    }
    Ok(out)
}

/// Discrete spectrum of an FID, centred on zero offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Hz, offsets from the carrier, ascending.
    pub freq_offsets: Vec<f64>,
    pub amplitude: Vec<f64>,
    /// Radians.
    pub phase: Vec<f64>,
}

/// Minimum FID length accepted by [`spectrum`].
pub const MIN_FID_SAMPLES: usize = 16;

/// Unitary-normalized DFT of `fid` sampled at `dt`, shifted so offsets run
/// from `-1/(2 dt)` upward with spacing `1/(n dt)`.
pub fn spectrum(fid: &[Complex64], dt: f64) -> Result<Spectrum> {
    let n = fid.len();
    if n < MIN_FID_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_FID_SAMPLES,
            got: n,
        });
    }
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("{dt} must be > 0")));
    }
    let mut buf = fid.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = 1.0 / (n as f64).sqrt();
    let half = n / 2;
    let df = 1.0 / (n as f64 * dt);
    let mut spec = Spectrum {
        freq_offsets: Vec::with_capacity(n),
        amplitude: Vec::with_capacity(n),
        phase: Vec::with_capacity(n),
    };
    for k in 0..n {
        // Bin k of the shifted spectrum holds DFT index (k + n - half) mod n.
        let src = (k + n - half) % n;
        let v = buf[src] * norm;
        spec.freq_offsets.push((k as f64 - half as f64) * df);
        spec.amplitude.push(v.norm());
        spec.phase.push(if v.norm() == 0.0 { 0.0 } else { v.arg() });
    }
    Ok(spec)
}

/// Appends zeros so the length becomes `factor * len`.
pub fn zero_fill(fid: &[Complex64], factor: usize) -> Vec<Complex64> {
    let mut out = fid.to_vec();
    out.resize(fid.len() * factor.max(1), Complex64::new(0.0, 0.0));
    out
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.freq_offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq_offsets.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        self.freq_offsets[1] - self.freq_offsets[0]
    }

    pub fn total_power(&self) -> f64 {
        self.amplitude.iter().map(|a| a * a).sum()
    }

    /// Real part after removing the receiver phase `phase0`.
    pub fn absorption(&self, phase0: f64) -> Vec<f64> {
        self.amplitude
            .iter()
            .zip(&self.phase)
            .map(|(a, p)| a * (p - phase0).cos())
            .collect()
    }

    /// Indices of local amplitude maxima above `rel_threshold * max`.
    pub fn peaks(&self, rel_threshold: f64) -> Vec<usize> {
        local_maxima(&self.amplitude, rel_threshold)
    }
}

/// Indices of strict-left local maxima above `rel_threshold * max(values)`.
pub fn local_maxima(values: &[f64], rel_threshold: f64) -> Vec<usize> {
    let top = values.iter().copied().fold(0.0, f64::max);
    (1..values.len().saturating_sub(1))
        .filter(|&k| {
            values[k] > values[k - 1] && values[k] >= values[k + 1] && values[k] > rel_threshold * top
        })
        .collect()
}

/// Full width at half maximum of the line peaking at `peak`, by linear
/// interpolation of `values` sampled on the uniform axis `axis`.
pub fn fwhm(axis: &[f64], values: &[f64], peak: usize) -> Option<f64> {
    let half = values[peak] / 2.0;
    let crossing = |k_in: usize, k_out: usize| {
        let (v_in, v_out) = (values[k_in], values[k_out]);
        axis[k_in] + (axis[k_out] - axis[k_in]) * (v_in - half) / (v_in - v_out)
    };
    let left = (0..peak).rev().find(|&k| values[k] <= half)?;
    let right = (peak + 1..values.len()).find(|&k| values[k] <= half)?;
    Some(crossing(right - 1, right) - crossing(left + 1, left))
}
