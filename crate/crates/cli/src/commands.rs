#![allow(non_snake_case)]

use std::path::Path;

use anyhow::{Context as _, Result};
use serde::Serialize;

use ndspin::coherent::{branch_state, ramsey_phase, ramsey_phase_from_couplings, sample_times, tilted_branch_phase};
use ndspin::dd::{dd_asymmetry, dd_asymmetry_ode, dd_piecewise_ode_reference, dd_trace};
use ndspin::entanglement::protocol_duration;
use ndspin::magnetostatics::{field_map, CoilAssembly};
use ndspin::model::{FieldConfig, TrapModel};
use ndspin::optimize::optimize_tmin;
use ndspin::trajectory::{
    delta_scan, integrate, sensitivity_scan, Dynamics, FieldSource, Trajectory, TrajectoryState, UniformGradient,
};
use ndspin::vec::{Mat3, Vec3};
use ndspin::{Scenario, Spin};

use crate::config::{Config, FieldSourceKind};
use crate::output::{to_json, Artifacts, Axes};

pub struct Context<'a> {
    pub config: &'a Config,
    pub out: &'a Path,
    pub seed: Option<u64>,
}

impl Context<'_> {
    fn artifacts(&self) -> Result<Artifacts> {
        Artifacts::create(self.out).with_context(|| format!("creating {}", self.out.display()))
    }

    fn finish(&self, artifacts: Artifacts, command: &str) -> Result<()> {
        let mut config = serde_json::to_value(self.config)?;
        if let Some(map) = config.as_object_mut() {
            map.remove("output");
        }
        let path = artifacts.finish(command, self.seed, &config)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

/// Field of the trajectory integrations, chosen in the config.
enum Source {
    Coil(CoilAssembly<f64>),
    Uniform(UniformGradient<f64>),
}

impl FieldSource<f64> for Source {
    fn field(&self, p: Vec3<f64>) -> ndspin::Result<Vec3<f64>> {
        match self {
            Source::Coil(c) => c.field(p),
            Source::Uniform(u) => u.field(p),
        }
    }

    fn jacobian(&self, p: Vec3<f64>) -> ndspin::Result<Mat3<f64>> {
        match self {
            Source::Coil(c) => c.jacobian(p),
            Source::Uniform(u) => u.jacobian(p),
        }
    }
}

fn source(config: &Config, kind: FieldSourceKind) -> Result<Source> {
    Ok(match kind {
        FieldSourceKind::Coil => Source::Coil(config.coil()?),
        FieldSourceKind::UniformGradient => Source::Uniform(UniformGradient {
            b0: config.field.B0_T,
            bprime: config.field.Bprime_T_per_m,
        }),
    })
}

fn spin_of(sign: i8) -> Spin {
    if sign < 0 {
        Spin::Minus
    } else {
        Spin::Plus
    }
}

fn spin_name(spin: Spin) -> &'static str {
    match spin {
        Spin::Plus => "plus",
        Spin::Minus => "minus",
        Spin::Zero => "zero",
    }
}

const TRAJECTORY_HEADER: [&str; 8] = ["t_s", "x_m", "y_m", "z_m", "vx_mps", "vy_mps", "vz_mps", "spin"];

fn trajectory_rows(t: &Trajectory<f64>) -> Vec<[f64; 8]> {
    t.samples
        .iter()
        .map(|s| {
            [
                s.t,
                s.q[0],
                s.q[1],
                s.q[2],
                s.v[0],
                s.v[1],
                s.v[2],
                f64::from(s.spin.sign()),
            ]
        })
        .collect()
}

fn write_trajectory(a: &mut Artifacts, name: &str, what: &str, t: &Trajectory<f64>) -> Result<()> {
    a.csv(
        name,
        what,
        &TRAJECTORY_HEADER,
        Some(Axes::new("t_s", &["x_m", "y_m", "z_m"])),
        trajectory_rows(t),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ProtocolReport {
    scenario: Scenario,
    t_total_s: f64,
    t_hold_s: f64,
    period_s: f64,
    delta_phi_bd_rad: f64,
    delta_phi_hold_rad: f64,
    d_used_m: f64,
    below_min_distance: bool,
}

#[derive(Serialize)]
struct DeriveReport {
    mass_kg: f64,
    diameter_m: f64,
    volume_m3: f64,
    omega_rad_per_s: f64,
    period_s: f64,
    x_zpf_m: f64,
    p_zpf_kg_m_per_s: f64,
    lambda: f64,
    lambda0: f64,
    lambda_g: f64,
    equilibrium_plus_m: f64,
    equilibrium_minus_m: f64,
    max_separation_m: f64,
    casimir_polder_m: f64,
    d_min_m: f64,
    protocol: ProtocolReport,
}

fn derive_report(config: &Config) -> Result<DeriveReport> {
    let model = config.trap_model()?;
    let protocol = config.protocol_config()?;
    let r = protocol_duration(&model, &protocol)?;
    let o = &model.osc;
    Ok(DeriveReport {
        mass_kg: model.nd.mass(),
        diameter_m: model.nd.diameter(),
        volume_m3: model.nd.volume(),
        omega_rad_per_s: o.omega,
        period_s: model.period(),
        x_zpf_m: o.x_zpf,
        p_zpf_kg_m_per_s: o.p_zpf,
        lambda: o.lambda,
        lambda0: o.lambda0,
        lambda_g: o.lambda_g,
        equilibrium_plus_m: model.equilibrium(Spin::Plus),
        equilibrium_minus_m: model.equilibrium(Spin::Minus),
        max_separation_m: r.max_separation,
        casimir_polder_m: r.casimir_polder,
        d_min_m: r.d_min,
        protocol: ProtocolReport {
            scenario: protocol.scenario,
            t_total_s: r.t_total,
            t_hold_s: r.t_hold,
            period_s: r.period,
            delta_phi_bd_rad: r.delta_phi_bd,
            delta_phi_hold_rad: r.delta_phi_hold,
            d_used_m: r.d_used,
            below_min_distance: r.below_min_distance,
        },
    })
}

pub fn derive(ctx: &Context, write_files: bool) -> Result<()> {
    let report = derive_report(ctx.config)?;
    print!("{}", to_json(&report)?);
    if write_files {
        let mut a = ctx.artifacts()?;
        a.json("derive.json", "derived trap and protocol parameters", &report)?;
        ctx.finish(a, "derive")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BranchSummary {
    initial_spin: i8,
    accepted_steps: usize,
    rejected_steps: usize,
    max_error_ratio: f64,
    flips: usize,
    final_position_m: [f64; 3],
    final_velocity_m_per_s: [f64; 3],
    max_abs_x_m: f64,
}

#[derive(Serialize)]
struct TrajectorySummary {
    field_source: FieldSourceKind,
    omega_rad_per_s: f64,
    period_s: f64,
    t_end_s: f64,
    max_separation_m: f64,
    branches: Vec<BranchSummary>,
}

pub fn trajectory(ctx: &Context) -> Result<()> {
    let cfg = ctx.config;
    let t = &cfg.trajectory;
    let mut a = ctx.artifacts()?;

    let base = cfg.field_config()?;
    let sweep = t.B0_sweep_T.clone().unwrap_or_else(|| vec![base.b0]);
    let mut rows = Vec::new();
    for &b0 in &sweep {
        let field = FieldConfig::new(b0, base.bprime, base.tilt)?;
        let model = cfg.trap_model_with(field)?;
        let times = sample_times(t.periods * model.period(), t.n_samples);
        for &s in &t.spins {
            let spin = spin_of(s);
            for &time in &times {
                let (x, p) = branch_state(&model, time, spin).expectation(&model);
                rows.push([b0, f64::from(s), time, x, p]);
            }
        }
    }
    a.csv(
        "branches.csv",
        "analytic branch trajectories <x>(t), <p>(t) per bias field and spin",
        &["B0_T", "spin", "t_s", "x_m", "p_kg_m_per_s"],
        Some(Axes::new("t_s", &["x_m"]).grouped("B0_T")),
        rows,
    )?;

    let field = source(cfg, t.field_source)?;
    let dynamics = Dynamics {
        field: &field,
        nd: cfg.nanodiamond()?,
        constants: cfg.constants()?,
        moment: t.moment,
    };
    let omega = dynamics.omega()?;
    let period = std::f64::consts::TAU / omega;
    let t_end = t.periods * period;
    let times = sample_times(t_end, t.n_samples);
    let schedule = cfg.flip_schedule("trajectory.decoupling", t.decoupling.as_ref(), omega)?;
    let initial = TrajectoryState {
        t: 0.0,
        q: Vec3(t.start_m),
        v: Vec3(t.velocity_m_per_s),
    };
    let integrator = cfg.integrator()?;
    let mut branches = Vec::new();
    for &s in &t.spins {
        let spin = spin_of(s);
        let run = integrate(&dynamics, initial, spin, schedule.as_ref(), t_end, &times, &integrator)?;
        write_trajectory(
            &mut a,
            &format!("trajectory_spin_{}.csv", spin_name(spin)),
            "integrated centre-of-mass trajectory",
            &run,
        )?;
        let last = run.samples.last().expect("at least two samples");
        branches.push(BranchSummary {
            initial_spin: s,
            accepted_steps: run.accepted_steps,
            rejected_steps: run.rejected_steps,
            max_error_ratio: run.max_error_ratio,
            flips: run.events.len(),
            final_position_m: last.q.0,
            final_velocity_m_per_s: last.v.0,
            max_abs_x_m: run.samples.iter().map(|s| s.q.x().abs()).fold(0.0, f64::max),
        });
    }
    let summary = TrajectorySummary {
        field_source: t.field_source,
        omega_rad_per_s: omega,
        period_s: period,
        t_end_s: t_end,
        max_separation_m: dynamics.max_separation()?,
        branches,
    };
    a.json("trajectory_summary.json", "integration statistics per branch", &summary)?;
    ctx.finish(a, "trajectory")
}

#[derive(Serialize)]
struct DdRun {
    N: usize,
    asymmetry: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    asymmetry_ode: Option<f64>,
    /// max |x_recursion − x_ode| / Δx_max over the sampled period.
    #[serde(skip_serializing_if = "Option::is_none")]
    ode_deviation: Option<f64>,
}

#[derive(Serialize)]
struct DdSummary {
    B0_T: f64,
    period_s: f64,
    max_separation_m: f64,
    asymmetry_without_dd: f64,
    runs: Vec<DdRun>,
}

const DD_HEADER: [&str; 6] = [
    "N",
    "t_s",
    "x_plus_m",
    "p_plus_kg_m_per_s",
    "x_minus_m",
    "p_minus_kg_m_per_s",
];

fn phase_space(model: &TrapModel<f64>, cfg: Option<&ndspin::DdConfig>, times: &[f64]) -> Result<[Vec<(f64, f64)>; 2]> {
    let branch = |spin| -> Result<Vec<(f64, f64)>> {
        Ok(match cfg {
            Some(c) => dd_trace(model, spin, c, times)?
                .iter()
                .map(|s| s.expectation(model))
                .collect(),
            None => times
                .iter()
                .map(|&t| branch_state(model, t, spin).expectation(model))
                .collect(),
        })
    };
    Ok([branch(Spin::Plus)?, branch(Spin::Minus)?])
}

fn dd_rows(n: usize, times: &[f64], branches: &[Vec<(f64, f64)>; 2]) -> Vec<[f64; 6]> {
    times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (p, m) = (branches[0][i], branches[1][i]);
            [n as f64, t, p.0, p.1, m.0, m.1]
        })
        .collect()
}

pub fn dd(ctx: &Context) -> Result<()> {
    let cfg = ctx.config;
    let d = &cfg.dd;
    let model = cfg.trap_model()?;
    let times = sample_times(model.period(), d.n_samples);
    let scale = model.max_separation();
    let mut a = ctx.artifacts()?;

    let reference = phase_space(&model, None, &times)?;
    a.csv(
        "dd_reference.csv",
        "branch phase-space curves without decoupling (N = 0)",
        &DD_HEADER,
        Some(Axes::new("x_plus_m", &["p_plus_kg_m_per_s"])),
        dd_rows(0, &times, &reference),
    )?;

    let mut recursion_rows = Vec::new();
    let mut ode_rows = Vec::new();
    let mut runs = Vec::new();
    for &n in &d.N_values {
        let dd_cfg = cfg.dd_config(n)?;
        let branches = phase_space(&model, Some(&dd_cfg), &times)?;
        recursion_rows.extend(dd_rows(n, &times, &branches));
        let mut run = DdRun {
            N: n,
            asymmetry: dd_asymmetry(&model, Some(&dd_cfg), d.n_samples)?,
            asymmetry_ode: None,
            ode_deviation: None,
        };
        if d.ode_reference {
            let plus = dd_piecewise_ode_reference(&model, Spin::Plus, &dd_cfg, &times, d.ode_rel_tol)?;
            let minus = dd_piecewise_ode_reference(&model, Spin::Minus, &dd_cfg, &times, d.ode_rel_tol)?;
            let deviation = branches[0]
                .iter()
                .zip(&plus)
                .chain(branches[1].iter().zip(&minus))
                .map(|(r, o)| (r.0 - o.0).abs())
                .fold(0.0, f64::max);
            run.ode_deviation = Some(deviation / scale);
            run.asymmetry_ode = Some(dd_asymmetry_ode(&model, &dd_cfg, d.n_samples, d.ode_rel_tol)?);
            ode_rows.extend(dd_rows(n, &times, &[plus, minus]));
        }
        runs.push(run);
    }
    a.csv(
        "dd.csv",
        "branch phase-space curves under decoupling, one block per N",
        &DD_HEADER,
        Some(Axes::new("x_plus_m", &["p_plus_kg_m_per_s"]).grouped("N")),
        recursion_rows,
    )?;
    if d.ode_reference {
        a.csv(
            "dd_ode.csv",
            "piecewise classical integration of the same branches",
            &DD_HEADER,
            Some(Axes::new("x_plus_m", &["p_plus_kg_m_per_s"]).grouped("N")),
            ode_rows,
        )?;
    }
    let summary = DdSummary {
        B0_T: model.field.b0,
        period_s: model.period(),
        max_separation_m: scale,
        asymmetry_without_dd: dd_asymmetry(&model, None, d.n_samples)?,
        runs,
    };
    a.json("dd_summary.json", "excursion asymmetry per N", &summary)?;
    ctx.finish(a, "dd")
}

#[derive(Serialize)]
struct RamseySummary {
    tilt_rad: f64,
    delta_theta_rad: f64,
    delta_theta_couplings_rad: f64,
    delta_theta_branches_rad: f64,
    period_s: f64,
}

fn ramsey_at(config: &Config, tilt: f64) -> Result<RamseySummary> {
    let base = config.field_config()?;
    let model = config.trap_model_with(FieldConfig::new(base.b0, base.bprime, tilt)?)?;
    let t = model.period();
    Ok(RamseySummary {
        tilt_rad: tilt,
        delta_theta_rad: ramsey_phase(&model),
        delta_theta_couplings_rad: ramsey_phase_from_couplings(&model),
        delta_theta_branches_rad: tilted_branch_phase(&model, t, Spin::Plus)
            - tilted_branch_phase(&model, t, Spin::Minus),
        period_s: t,
    })
}

pub fn ramsey(ctx: &Context) -> Result<()> {
    let cfg = ctx.config;
    let mut a = ctx.artifacts()?;
    let rows = cfg
        .ramsey
        .tilts_rad
        .iter()
        .map(|&tilt| {
            let r = ramsey_at(cfg, tilt)?;
            Ok([r.tilt_rad, r.delta_theta_rad, r.delta_theta_couplings_rad])
        })
        .collect::<Result<Vec<_>>>()?;
    a.csv(
        "ramsey.csv",
        "Ramsey phase after one period against the tilt angle",
        &["tilt_rad", "delta_theta_rad", "delta_theta_couplings_rad"],
        Some(Axes::new("tilt_rad", &["delta_theta_rad"])),
        rows,
    )?;
    a.json(
        "ramsey_summary.json",
        "Ramsey phase at the configured tilt",
        &ramsey_at(cfg, cfg.field.tilt_rad)?,
    )?;
    ctx.finish(a, "ramsey")
}

#[derive(Serialize)]
struct FieldmapSummary {
    mmf_At: f64,
    gradient_T_per_m: f64,
    jacobian_T_per_m: [[f64; 3]; 3],
    points: usize,
}

pub fn fieldmap(ctx: &Context) -> Result<()> {
    let cfg = ctx.config;
    let coil = cfg.coil()?;
    let grid = cfg.plane_grid()?;
    let samples = field_map(&grid, &coil)?;
    let mut a = ctx.artifacts()?;
    let rows: Vec<[f64; 6]> = samples
        .iter()
        .map(|s| [s.position[0], s.position[1], s.position[2], s.b[0], s.b[1], s.b[2]])
        .collect();
    a.csv(
        "fieldmap.csv",
        "coil field on the z plane grid, y outer, x inner",
        &["x_m", "y_m", "z_m", "Bx_T", "By_T", "Bz_T"],
        Some(Axes::new("x_m", &["Bx_T", "By_T", "Bz_T"]).grouped("y_m")),
        rows,
    )?;
    let j = coil.jacobian(Vec3::zero())?;
    a.json(
        "fieldmap_summary.json",
        "central field gradient of the assembly",
        &FieldmapSummary {
            mmf_At: cfg.coil.mmf_At,
            gradient_T_per_m: j.0[0][0],
            jacobian_T_per_m: j.0,
            points: samples.len(),
        },
    )?;
    ctx.finish(a, "fieldmap")
}

#[derive(Serialize)]
struct ScanReport {
    theta_rad: f64,
    phi_rad: f64,
    start_m: [f64; 3],
    yz_overlap: f64,
    x_separation_m: f64,
    x_separation_rel: f64,
    steps_plus: usize,
    steps_minus: usize,
}

#[derive(Serialize)]
struct DeltaReport {
    delta_rad: f64,
    deviation_rel: f64,
}

#[derive(Serialize)]
struct SensitivitySummary {
    field_source: FieldSourceKind,
    omega_rad_per_s: f64,
    period_s: f64,
    max_separation_m: f64,
    radius_m: f64,
    max_yz_overlap: f64,
    starts: Vec<ScanReport>,
    delta_N: usize,
    delta_scan: Vec<DeltaReport>,
}

pub fn sensitivity(ctx: &Context) -> Result<()> {
    let cfg = ctx.config;
    let s = &cfg.sensitivity;
    let field = source(cfg, s.field_source)?;
    let dynamics = Dynamics {
        field: &field,
        nd: cfg.nanodiamond()?,
        constants: cfg.constants()?,
        moment: s.moment,
    };
    let omega = dynamics.omega()?;
    let period = std::f64::consts::TAU / omega;
    let t_end = s.periods * period;
    let times = sample_times(t_end, s.n_samples);
    let schedule = cfg.flip_schedule("sensitivity.decoupling", s.decoupling.as_ref(), omega)?;
    let integrator = cfg.integrator()?;
    let dx = dynamics.max_separation()?;
    let scan = sensitivity_scan(
        &dynamics,
        s.radius_m,
        &s.theta_rad,
        &s.phi_rad,
        schedule.as_ref(),
        t_end,
        &times,
        &integrator,
    )?;
    let mut a = ctx.artifacts()?;
    if s.write_trajectories {
        for (i, e) in scan.iter().enumerate() {
            for (spin, run) in [("plus", &e.plus), ("minus", &e.minus)] {
                write_trajectory(
                    &mut a,
                    &format!("sensitivity/start_{i:03}_spin_{spin}.csv"),
                    &format!("start {i}: theta = {} rad, phi = {} rad", e.theta, e.phi),
                    run,
                )?;
            }
        }
    }
    let deltas = if s.deltas_rad.is_empty() {
        Vec::new()
    } else {
        delta_scan(&dynamics, &s.deltas_rad, s.delta_N, s.delta_n_samples, &integrator)?
    };
    if !deltas.is_empty() {
        a.csv(
            "delta_scan.csv",
            "deviation from the synchronized trajectory, relative to the maximal separation",
            &["delta_rad", "deviation_rel"],
            Some(Axes::new("delta_rad", &["deviation_rel"])),
            deltas.iter().map(|d| [d.delta, d.deviation]),
        )?;
    }
    let starts: Vec<ScanReport> = scan
        .iter()
        .map(|e| ScanReport {
            theta_rad: e.theta,
            phi_rad: e.phi,
            start_m: e.start.0,
            yz_overlap: e.yz_overlap,
            x_separation_m: e.x_separation,
            x_separation_rel: e.x_separation / dx,
            steps_plus: e.plus.accepted_steps,
            steps_minus: e.minus.accepted_steps,
        })
        .collect();
    let summary = SensitivitySummary {
        field_source: s.field_source,
        omega_rad_per_s: omega,
        period_s: period,
        max_separation_m: dx,
        radius_m: s.radius_m,
        max_yz_overlap: starts.iter().map(|r| r.yz_overlap).fold(0.0, f64::max),
        starts,
        delta_N: s.delta_N,
        delta_scan: deltas
            .iter()
            .map(|d| DeltaReport {
                delta_rad: d.delta,
                deviation_rel: d.deviation,
            })
            .collect(),
    };
    a.json(
        "sensitivity.json",
        "spin-channel overlap per start and phase-lag scan",
        &summary,
    )?;
    ctx.finish(a, "sensitivity")
}

#[derive(Serialize)]
struct GridOptimum {
    m_kg: f64,
    Bprime_T_per_m: f64,
    t_min_s: f64,
}

#[derive(Serialize)]
struct OptimumReport {
    scenario: Scenario,
    m_kg: f64,
    Bprime_T_per_m: f64,
    t_min_s: f64,
    t_hold_s: f64,
    period_s: f64,
    hold_fraction: f64,
    delta_phi_bd_rad: f64,
    delta_phi_hold_rad: f64,
    max_separation_m: f64,
    casimir_polder_m: f64,
    d_min_m: f64,
    mass_on_boundary: bool,
    Bprime_on_boundary: bool,
    grid: GridOptimum,
    evaluations: usize,
    surface_points: usize,
}

pub fn protocol_opt(ctx: &Context, scenario: Option<Scenario>) -> Result<()> {
    let cfg = ctx.config;
    let problem = cfg.problem(scenario)?;
    let spec = cfg.optimize_spec()?;
    let opt = optimize_tmin(&problem, &spec)?;
    let mut a = ctx.artifacts()?;
    a.csv(
        "surface.csv",
        "minimal protocol time over the mass and gradient grid, mass outer",
        &[
            "m_kg",
            "Bprime_T_per_m",
            "t_total_s",
            "t_hold_s",
            "period_s",
            "delta_phi_bd_rad",
            "d_min_m",
        ],
        Some(Axes::new("m_kg", &["t_total_s"]).grouped("Bprime_T_per_m")),
        opt.surface.iter().map(|p| {
            let r = &p.result;
            [p.mass, p.bprime, r.t_total, r.t_hold, r.period, r.delta_phi_bd, r.d_min]
        }),
    )?;
    let o = &opt.optimum;
    let r = &o.result;
    let report = OptimumReport {
        scenario: problem.protocol.scenario,
        m_kg: o.mass,
        Bprime_T_per_m: o.bprime,
        t_min_s: o.t_min,
        t_hold_s: r.t_hold,
        period_s: r.period,
        hold_fraction: r.t_hold / r.t_total,
        delta_phi_bd_rad: r.delta_phi_bd,
        delta_phi_hold_rad: r.delta_phi_hold,
        max_separation_m: r.max_separation,
        casimir_polder_m: r.casimir_polder,
        d_min_m: r.d_min,
        mass_on_boundary: o.mass_on_boundary,
        Bprime_on_boundary: o.bprime_on_boundary,
        grid: GridOptimum {
            m_kg: o.grid_mass,
            Bprime_T_per_m: o.grid_bprime,
            t_min_s: o.grid_t_min,
        },
        evaluations: o.evaluations,
        surface_points: opt.surface.len(),
    };
    a.json("optimum.json", "refined minimum of the protocol time", &report)?;
    print!("{}", to_json(&report)?);
    ctx.finish(a, "protocol-opt")
}
