//! One function per subcommand. Each writes its CSV files into the output
//! directory and returns the file records plus a diagnostics object.

use std::f64::consts::PI;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};
use squeezeprobe::dynamics::{fid, RelaxationSpec, TimeGrid};
use squeezeprobe::hamiltonian::{effective_hamiltonian, Frame, PerturbationOrder};
use squeezeprobe::observables::{fwhm, local_maxima, spectrum, zero_fill, SqueezingTrace};
use squeezeprobe::spin::propagator;
use squeezeprobe::states::{
    css_state, fidelity, fidelity_deviation, husimi_q, rtes, thermal_state, CssParams,
    DensityMatrix,
};
use squeezeprobe::sweeps::{
    eta_family, euler_grid, fidelity_map, linspace, logspace, Execution, InitialStateKind,
    SearchWindow, SqueezeSetup,
};

use crate::config::{FrameChoice, InitialKind, Resolved, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, write_csv, FileRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Husimi,
    FidelityMap,
    Squeeze,
    Spectrum,
    EtaFamily,
    EulerGrid,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Husimi => "husimi",
            Command::FidelityMap => "fidelity-map",
            Command::Squeeze => "squeeze",
            Command::Spectrum => "spectrum",
            Command::EtaFamily => "eta-family",
            Command::EulerGrid => "euler-grid",
        }
    }

    /// Effective-Hamiltonian order used when `--order` is not given.
    pub fn default_order(self) -> u8 {
        match self {
            Command::EulerGrid => 2,
            _ => 1,
        }
    }
}

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub resolved: Resolved,
    pub order: PerturbationOrder,
    pub out_dir: &'a Path,
    pub exec: Execution,
}

pub type Output = (Vec<FileRecord>, Value);

impl Context<'_> {
    fn frame(&self) -> Frame {
        match self.config.frame {
            FrameChoice::Quadrupole => Frame::Quadrupole,
            FrameChoice::Rotating => Frame::Rotating(self.order),
        }
    }

    fn initial_state(&self) -> Result<DensityMatrix, CliError> {
        let r = &self.resolved;
        Ok(match r.initial {
            InitialKind::Css(p) => DensityMatrix::from_pure(&css_state(r.spin, p)),
            InitialKind::Thermal => thermal_state(&r.thermal.build(&r.spec, r.spin), &r.env)?,
            InitialKind::Rtes => rtes(&thermal_state(&r.thermal.build(&r.spec, r.spin), &r.env)?)?,
        })
    }

    fn squeeze_setup(&self, initial: InitialStateKind) -> Result<SqueezeSetup, CliError> {
        let r = &self.resolved;
        let c = self.config;
        let duration = c.time_window_periods / r.spec.nu_q();
        let grid = TimeGrid::resolved(duration, c.time_samples, &r.relax, r.spec.omega_q)?;
        Ok(SqueezeSetup {
            spin: r.spin,
            spec: r.spec,
            env: r.env,
            thermal: r.thermal,
            initial,
            frame: self.frame(),
            relax: r.relax,
            target: r.target,
            grid,
        })
    }

    fn configured_initial(&self) -> InitialStateKind {
        match self.resolved.initial {
            InitialKind::Css(p) => InitialStateKind::Css(p),
            InitialKind::Thermal => InitialStateKind::Thermal,
            InitialKind::Rtes => InitialStateKind::Rtes,
        }
    }
}

pub fn execute(command: Command, ctx: &Context) -> Result<Output, CliError> {
    match command {
        Command::Husimi => husimi(ctx),
        Command::FidelityMap => fidelity_map_cmd(ctx),
        Command::Squeeze => squeeze(ctx),
        Command::Spectrum => spectrum_cmd(ctx),
        Command::EtaFamily => eta_family_cmd(ctx),
        Command::EulerGrid => euler_grid_cmd(ctx),
    }
}

fn husimi(ctx: &Context) -> Result<Output, CliError> {
    let r = &ctx.resolved;
    let c = ctx.config;
    let t = c.husimi_time_omega_q_inv / r.spec.omega_q;
    let h = ctx.frame().hamiltonian(&r.spec, r.spin)?;
    let rho = ctx.initial_state()?.evolve(propagator(&h, t)?.matrix());
    let range = (-c.husimi_range, c.husimi_range);
    let grid = husimi_q(&rho, range, range, c.husimi_points)?;
    let rows = grid.x_values.iter().enumerate().flat_map(|(ix, &x)| {
        let q = &grid.q_values[ix];
        grid.y_values
            .iter()
            .enumerate()
            .map(move |(iy, &y)| vec![fmt_f64(x), fmt_f64(y), fmt_f64(q[iy])])
    });
    let file = write_csv(ctx.out_dir, "husimi.csv", &["x", "y", "Q"], rows)?;
    let (x, y, q) = grid.argmax();
    Ok((
        vec![file],
        json!({ "time_s": t, "argmax": { "x": x, "y": y, "Q": q } }),
    ))
}

fn fidelity_map_cmd(ctx: &Context) -> Result<Output, CliError> {
    let r = &ctx.resolved;
    let c = ctx.config;
    let b = linspace(c.map_b_t[0], c.map_b_t[1], c.map_b_points);
    let t = logspace(c.map_t_k[0], c.map_t_k[1], c.map_t_points);
    let map = fidelity_map(&b, &t, c.gamma_n_hz_t(), r.spin, &r.spec, r.thermal, ctx.exec)?;
    let rows = (0..t.len()).flat_map(|it| {
        let map = &map;
        (0..b.len()).map(move |ib| {
            vec![
                fmt_f64(map.b_values[ib]),
                fmt_f64(map.t_values[it]),
                fmt_f64(map.f_full[it][ib]),
                fmt_f64(map.f_deviation[it][ib]),
            ]
        })
    });
    let header = ["B_tesla", "T_kelvin", "F_full_rho", "F_deviation"];
    let main = write_csv(ctx.out_dir, "fidelity_map.csv", &header, rows)?;
    let contour_rows = (0..t.len()).map(|it| {
        vec![
            fmt_f64(t[it]),
            map.contour_b(it, 0.9).map(fmt_f64).unwrap_or_default(),
        ]
    });
    let contour = write_csv(
        ctx.out_dir,
        "fidelity_contour.csv",
        &["T_kelvin", "B_tesla_at_F_0.9"],
        contour_rows,
    )?;

    // The configured field and temperature, evaluated directly.
    let reference = DensityMatrix::from_pure(&css_state(r.spin, CssParams::MINUS_X));
    let rho = rtes(&thermal_state(&r.thermal.build(&r.spec, r.spin), &r.env)?)?;
    Ok((
        vec![main, contour],
        json!({
            "working_point": {
                "B_tesla": c.b0_t,
                "T_kelvin": c.temperature_k,
                "F_full_rho": fidelity(&reference, &rho)?,
                "F_deviation": fidelity_deviation(&reference, &rho)?,
            }
        }),
    ))
}

const TRACE_COLUMNS: [&str; 9] = ["t_seconds", "nuQ_t", "xi", "Ix", "Iy", "Iz", "A", "B", "C"];

fn trace_rows(trace: &SqueezingTrace, nu_q: f64) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..trace.len()).map(move |k| {
        let t = trace.times[k];
        let [ix, iy, iz] = trace.msv[k];
        let [a, b, c] = trace.abc[k];
        [t, nu_q * t, trace.xi[k], ix, iy, iz, a, b, c]
            .into_iter()
            .map(fmt_f64)
            .collect()
    })
}

fn trace_summary(eta: f64, trace: &SqueezingTrace) -> Value {
    let (k, xi_min) = trace
        .xi
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (k, v)| if v < b.1 { (k, v) } else { b });
    json!({ "eta": eta, "xi_0": trace.xi[0], "xi_min": xi_min, "t_at_xi_min_s": trace.times[k] })
}

fn max_abs_difference(a: &SqueezingTrace, b: &SqueezingTrace) -> f64 {
    a.xi.iter().zip(&b.xi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn squeeze(ctx: &Context) -> Result<Output, CliError> {
    let c = ctx.config;
    let nu_q = ctx.resolved.spec.nu_q();
    let setup = ctx.squeeze_setup(ctx.configured_initial())?;
    let traces = eta_family(&c.eta_values, &setup, ctx.exec)?;
    let rows = c.eta_values.iter().zip(&traces).flat_map(|(&eta, trace)| {
        trace_rows(trace, nu_q).map(move |mut row| {
            row.insert(0, fmt_f64(eta));
            row
        })
    });
    let mut header = vec!["eta"];
    header.extend(TRACE_COLUMNS);
    let file = write_csv(ctx.out_dir, "squeeze.csv", &header, rows)?;
    let summary: Vec<Value> = c
        .eta_values
        .iter()
        .zip(&traces)
        .map(|(&eta, t)| trace_summary(eta, t))
        .collect();
    Ok((vec![file], json!({ "dt_s": setup.grid.dt(), "traces": summary })))
}

fn eta_family_cmd(ctx: &Context) -> Result<Output, CliError> {
    let c = ctx.config;
    let nu_q = ctx.resolved.spec.nu_q();
    let kinds = [
        ("sss", InitialStateKind::Css(CssParams::MINUS_X)),
        ("sts", InitialStateKind::Rtes),
    ];
    let mut families = Vec::new();
    let mut dt = 0.0;
    for (label, kind) in kinds {
        let setup = ctx.squeeze_setup(kind)?;
        dt = setup.grid.dt();
        families.push((label, eta_family(&c.eta_values, &setup, ctx.exec)?));
    }
    let rows = families.iter().flat_map(|(label, traces)| {
        c.eta_values.iter().zip(traces).flat_map(move |(&eta, trace)| {
            trace_rows(trace, nu_q).map(move |mut row| {
                row.splice(0..0, [label.to_string(), fmt_f64(eta)]);
                row
            })
        })
    });
    let mut header = vec!["state", "eta"];
    header.extend(TRACE_COLUMNS);
    let file = write_csv(ctx.out_dir, "eta_family.csv", &header, rows)?;

    let mut diagnostics = serde_json::Map::new();
    for (label, traces) in &families {
        let spread = traces
            .iter()
            .flat_map(|a| traces.iter().map(move |b| max_abs_difference(a, b)))
            .fold(0.0, f64::max);
        let summary: Vec<Value> =
            c.eta_values.iter().zip(traces).map(|(&e, t)| trace_summary(e, t)).collect();
        diagnostics.insert(
            (*label).to_string(),
            json!({ "max_eta_discrimination": spread, "traces": summary }),
        );
    }
    diagnostics.insert("dt_s".into(), json!(dt));
    Ok((vec![file], Value::Object(diagnostics)))
}

fn spectrum_cmd(ctx: &Context) -> Result<Output, CliError> {
    let r = &ctx.resolved;
    let c = ctx.config;
    let t2 = c.fid_t2.seconds(r.spec.omega_q);
    let dt = TimeGrid::max_dt(&RelaxationSpec::new(None, Some(t2))?, r.spec.omega_q);
    let n = (c.fid_acquisition_t2 * t2 / dt).ceil() as usize;
    let grid = TimeGrid::new(dt, n)?;
    let h = effective_hamiltonian(&r.spec, r.spin, ctx.order)?;
    let signal = fid(&ctx.initial_state()?, &h, &grid, Some(t2))?;
    let spec = spectrum(&zero_fill(&signal, c.zero_fill), dt)?;
    let rows = (0..spec.len()).map(|k| {
        vec![
            fmt_f64(spec.freq_offsets[k]),
            fmt_f64(spec.amplitude[k]),
            fmt_f64(spec.phase[k]),
        ]
    });
    let file = write_csv(ctx.out_dir, "spectrum.csv", &["offset_Hz", "amplitude", "phase_rad"], rows)?;

    let absorption = spec.absorption(signal[0].arg());
    let peaks: Vec<Value> = local_maxima(&absorption, 0.05)
        .into_iter()
        .map(|k| {
            json!({
                "offset_Hz": spec.freq_offsets[k],
                "amplitude": spec.amplitude[k],
                "fwhm_Hz": fwhm(&spec.freq_offsets, &absorption, k),
            })
        })
        .collect();
    Ok((
        vec![file],
        json!({
            "fid_T2_s": t2,
            "dt_s": dt,
            "fid_samples": n,
            "bin_Hz": spec.bin_width(),
            "expected_fwhm_Hz": 1.0 / (PI * t2),
            "peaks": peaks,
        }),
    ))
}

fn euler_grid_cmd(ctx: &Context) -> Result<Output, CliError> {
    let r = &ctx.resolved;
    let c = ctx.config;
    let betas_deg = linspace(c.grid_beta_deg[0], c.grid_beta_deg[1], c.grid_beta_points);
    let betas: Vec<f64> = betas_deg.iter().map(|b| b.to_radians()).collect();
    let etas = linspace(c.grid_eta[0], c.grid_eta[1], c.grid_eta_points);
    let window = SearchWindow {
        periods: c.grid_window_periods,
        samples: c.grid_samples,
    };
    let g = euler_grid(&betas, &etas, &r.spec, r.spin, ctx.order, window, ctx.exec)?;
    let rows = (0..betas.len()).flat_map(|ib| {
        let g = &g;
        let betas_deg = &betas_deg;
        (0..g.eta_values.len()).map(move |ie| {
            vec![
                fmt_f64(betas_deg[ib]),
                fmt_f64(g.eta_values[ie]),
                fmt_f64(g.xi_min[ib][ie]),
                fmt_f64(g.t_argmin[ib][ie]),
            ]
        })
    });
    let header = ["betaQ_deg", "eta", "xi_min", "t_argmin_s"];
    let file = write_csv(ctx.out_dir, "euler_grid.csv", &header, rows)?;

    let tilt = g.msv_tilt.iter().flatten().copied().fold(0.0, f64::max);
    let mut diagnostics = json!({ "max_msv_tilt": tilt });
    if let Some(ie) = etas.iter().position(|&e| e == 1.0) {
        if !betas.is_empty() {
            diagnostics["eta_1_argmin_betaQ_deg"] = json!(betas_deg[g.argmin_beta(ie)]);
        }
    }
    if let Some(ib) = betas_deg.iter().position(|&b| (b - 60.0).abs() < 1e-9) {
        if !etas.is_empty() {
            diagnostics["betaQ_60_argmin_eta"] = json!(etas[g.argmin_eta(ib)]);
        }
    }
    Ok((vec![file], diagnostics))
}
