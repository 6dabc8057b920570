//! Scenario configuration: one JSON document, SI quantities with unit-suffixed keys.

#![allow(non_snake_case)]

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ndspin::dd::{DdConfig, DdScheme};
use ndspin::entanglement::{Distance, ProtocolConfig};
use ndspin::magnetostatics::{CoilAssembly, GridAxis, PlaneGrid};
use ndspin::model::{FieldConfig, Material, NanodiamondParams, TrapModel};
use ndspin::optimize::{LogRange, OptimizeSpec, Problem};
use ndspin::trajectory::{FlipSchedule, IntegratorConfig};
use ndspin::{PhysicalConstants, Scenario, SpinMoment};

pub const VERSION: u32 = 1;

/// A rejected configuration, with the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config: {}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Checked<T = ()> = Result<T, ConfigError>;

fn positive(path: &str, x: f64) -> Checked {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be finite and > 0, got {x}")))
    }
}

fn finite(path: &str, x: f64) -> Checked {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be finite, got {x}")))
    }
}

fn tilt(path: &str, x: f64) -> Checked {
    if (0.0..FRAC_PI_2).contains(&x) {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must lie in [0, pi/2), got {x}")))
    }
}

fn at_least(path: &str, n: usize, min: usize) -> Checked {
    if n >= min {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be at least {min}, got {n}")))
    }
}

fn non_empty<T>(path: &str, xs: &[T]) -> Checked {
    if xs.is_empty() {
        Err(ConfigError::new(path, "must not be empty"))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub nanodiamond: NanodiamondSection,
    #[serde(default)]
    pub field: FieldSection,
    #[serde(default)]
    pub coil: CoilSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub dd: DdSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub ramsey: RamseySection,
    #[serde(default)]
    pub fieldmap: FieldmapSection,
    #[serde(default)]
    pub sensitivity: SensitivitySection,
    #[serde(default)]
    pub optimize: OptimizeSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            version: VERSION,
            constants: Default::default(),
            material: Default::default(),
            nanodiamond: Default::default(),
            field: Default::default(),
            coil: Default::default(),
            integrator: Default::default(),
            protocol: Default::default(),
            dd: Default::default(),
            trajectory: Default::default(),
            ramsey: Default::default(),
            fieldmap: Default::default(),
            sensitivity: Default::default(),
            optimize: Default::default(),
            output: Default::default(),
        }
    }
}

/// Overrides of the CODATA table. Absent keys keep the default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub hbar_J_s: Option<f64>,
    pub mu0_T_m_per_A: Option<f64>,
    pub c_m_per_s: Option<f64>,
    pub G_m3_per_kg_s2: Option<f64>,
    pub gamma_e_rad_per_s_T: Option<f64>,
    pub mu_B_J_per_T: Option<f64>,
    pub g_m_per_s2: Option<f64>,
    pub D_zfs_rad_per_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSection {
    pub density_kg_per_m3: f64,
    pub chi_magnitude: f64,
    pub epsilon_r: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        let d = Material::<f64>::diamond();
        Self {
            density_kg_per_m3: d.density,
            chi_magnitude: d.chi_magnitude,
            epsilon_r: d.epsilon,
        }
    }
}

/// Exactly one of diameter and mass. With neither, a 250 nm sphere.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NanodiamondSection {
    pub diameter_m: Option<f64>,
    pub mass_kg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSection {
    pub B0_T: f64,
    pub Bprime_T_per_m: f64,
    pub tilt_rad: f64,
}

impl Default for FieldSection {
    fn default() -> Self {
        Self {
            B0_T: 0.0,
            Bprime_T_per_m: 1e3,
            tilt_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoilSection {
    pub radius_m: f64,
    pub separation_m: f64,
    pub mmf_At: f64,
}

impl Default for CoilSection {
    fn default() -> Self {
        Self {
            radius_m: 0.03,
            separation_m: 0.03,
            mmf_At: 564.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: f64,
    pub abs_tol_position_m: f64,
    pub abs_tol_velocity_m_per_s: f64,
    /// Unbounded when absent.
    pub max_step_s: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::<f64>::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol_position_m: d.abs_tol_position,
            abs_tol_velocity_m_per_s: d.abs_tol_velocity,
            max_step_s: None,
            max_steps: d.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub scenario: Scenario,
    pub target_delta_phi_rad: f64,
    /// Centre distance; `d_min` when absent.
    pub distance_m: Option<f64>,
    pub allow_below_min: bool,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            scenario: Scenario::HoldOnly,
            target_delta_phi_rad: 0.01 * PI,
            distance_m: None,
            allow_below_min: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdSection {
    pub N_values: Vec<usize>,
    pub scheme: DdScheme,
    pub n_samples: usize,
    /// Also integrate the piecewise classical equations for comparison.
    pub ode_reference: bool,
    pub ode_rel_tol: f64,
}

impl Default for DdSection {
    fn default() -> Self {
        Self {
            N_values: vec![4, 20, 200],
            scheme: DdScheme::GradientOnlyFlip,
            n_samples: 2001,
            ode_reference: false,
            ode_rel_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldSourceKind {
    /// The anti-Helmholtz assembly from `coil`.
    Coil,
    /// The linearized trap from `field`.
    UniformGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecouplingSection {
    pub N: usize,
    #[serde(default)]
    pub delta_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub field_source: FieldSourceKind,
    pub moment: SpinMoment,
    pub start_m: [f64; 3],
    pub velocity_m_per_s: [f64; 3],
    pub spins: Vec<i8>,
    pub periods: f64,
    pub n_samples: usize,
    pub decoupling: Option<DecouplingSection>,
    /// Bias values of the analytic branch family; `field.B0_T` alone when absent.
    pub B0_sweep_T: Option<Vec<f64>>,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            field_source: FieldSourceKind::UniformGradient,
            moment: SpinMoment::HbarGamma,
            start_m: [0.0; 3],
            velocity_m_per_s: [0.0; 3],
            spins: vec![1, -1],
            periods: 1.0,
            n_samples: 401,
            decoupling: None,
            B0_sweep_T: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseySection {
    pub tilts_rad: Vec<f64>,
}

impl Default for RamseySection {
    fn default() -> Self {
        Self {
            tilts_rad: (0..18).map(|i| FRAC_PI_2 * i as f64 / 18.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearAxis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldmapSection {
    pub x_m: LinearAxis,
    pub y_m: LinearAxis,
    pub z_m: f64,
}

impl Default for FieldmapSection {
    fn default() -> Self {
        let axis = LinearAxis {
            min: -0.02,
            max: 0.02,
            n: 41,
        };
        Self {
            x_m: axis,
            y_m: axis,
            z_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivitySection {
    pub field_source: FieldSourceKind,
    pub moment: SpinMoment,
    pub radius_m: f64,
    pub theta_rad: Vec<f64>,
    pub phi_rad: Vec<f64>,
    pub periods: f64,
    pub n_samples: usize,
    pub decoupling: Option<DecouplingSection>,
    pub write_trajectories: bool,
    pub deltas_rad: Vec<f64>,
    pub delta_N: usize,
    pub delta_n_samples: usize,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        let quarter = vec![0.0, PI / 4.0, FRAC_PI_2];
        Self {
            field_source: FieldSourceKind::Coil,
            moment: SpinMoment::HbarGamma,
            radius_m: 5e-7,
            theta_rad: quarter.clone(),
            phi_rad: quarter,
            periods: 1.0,
            n_samples: 401,
            decoupling: None,
            write_trajectories: true,
            deltas_rad: vec![0.0, PI / 45.0, PI / 25.0, PI / 15.0, PI / 5.0],
            delta_N: 200,
            delta_n_samples: 2001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogAxis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    pub mass_kg: LogAxis,
    pub Bprime_T_per_m: LogAxis,
    pub resolution: f64,
    pub max_sweeps: usize,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self {
            mass_kg: LogAxis {
                min: 1e-17,
                max: 1e-12,
                n: 60,
            },
            Bprime_T_per_m: LogAxis {
                min: 0.1,
                max: 10.0,
                n: 60,
            },
            resolution: 1e-3,
            max_sweeps: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "ndspin-out".into(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Checked<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            ConfigError::new(path, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Checked<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every section, whether or not the current command reads it.
    pub fn validate(&self) -> Checked {
        if self.version != VERSION {
            return Err(ConfigError::new(
                "version",
                format!("unsupported version {}, expected {VERSION}", self.version),
            ));
        }
        self.constants()?;
        self.nanodiamond()?;
        self.field_config()?;
        self.coil()?;
        self.integrator()?;
        self.protocol_config()?;

        for (i, &n) in self.dd.N_values.iter().enumerate() {
            at_least(&format!("dd.N_values[{i}]"), n, 1)?;
        }
        non_empty("dd.N_values", &self.dd.N_values)?;
        at_least("dd.n_samples", self.dd.n_samples, 2)?;
        positive("dd.ode_rel_tol", self.dd.ode_rel_tol)?;

        let t = &self.trajectory;
        for (i, x) in t.start_m.iter().enumerate() {
            finite(&format!("trajectory.start_m[{i}]"), *x)?;
        }
        for (i, x) in t.velocity_m_per_s.iter().enumerate() {
            finite(&format!("trajectory.velocity_m_per_s[{i}]"), *x)?;
        }
        non_empty("trajectory.spins", &t.spins)?;
        for (i, s) in t.spins.iter().enumerate() {
            if !matches!(s, 1 | -1) {
                return Err(ConfigError::new(format!("trajectory.spins[{i}]"), "must be 1 or -1"));
            }
        }
        positive("trajectory.periods", t.periods)?;
        at_least("trajectory.n_samples", t.n_samples, 2)?;
        self.schedule("trajectory.decoupling", t.decoupling.as_ref())?;
        if let Some(sweep) = &t.B0_sweep_T {
            non_empty("trajectory.B0_sweep_T", sweep)?;
            for (i, b) in sweep.iter().enumerate() {
                finite(&format!("trajectory.B0_sweep_T[{i}]"), *b)?;
            }
        }

        non_empty("ramsey.tilts_rad", &self.ramsey.tilts_rad)?;
        for (i, x) in self.ramsey.tilts_rad.iter().enumerate() {
            tilt(&format!("ramsey.tilts_rad[{i}]"), *x)?;
        }

        self.plane_grid()?;

        let s = &self.sensitivity;
        if !(s.radius_m.is_finite() && s.radius_m >= 0.0) {
            return Err(ConfigError::new("sensitivity.radius_m", "must be finite and >= 0"));
        }
        for (name, angles) in [("theta_rad", &s.theta_rad), ("phi_rad", &s.phi_rad)] {
            let path = format!("sensitivity.{name}");
            non_empty(&path, angles)?;
            for (i, a) in angles.iter().enumerate() {
                if !(*a >= 0.0 && *a <= FRAC_PI_2) {
                    return Err(ConfigError::new(format!("{path}[{i}]"), "must lie in [0, pi/2]"));
                }
            }
        }
        positive("sensitivity.periods", s.periods)?;
        at_least("sensitivity.n_samples", s.n_samples, 2)?;
        self.schedule("sensitivity.decoupling", s.decoupling.as_ref())?;
        for (i, d) in s.deltas_rad.iter().enumerate() {
            if !(*d >= 0.0 && *d < PI) {
                return Err(ConfigError::new(
                    format!("sensitivity.deltas_rad[{i}]"),
                    "must lie in [0, pi)",
                ));
            }
        }
        at_least("sensitivity.delta_N", s.delta_N, 1)?;
        at_least("sensitivity.delta_n_samples", s.delta_n_samples, 2)?;

        self.optimize_spec()?;

        if self.output.dir.is_empty() {
            return Err(ConfigError::new("output.dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn constants(&self) -> Checked<PhysicalConstants> {
        let c = &self.constants;
        let mut k = PhysicalConstants::codata();
        let entries = [
            ("hbar_J_s", c.hbar_J_s, &mut k.hbar),
            ("mu0_T_m_per_A", c.mu0_T_m_per_A, &mut k.mu0),
            ("c_m_per_s", c.c_m_per_s, &mut k.c),
            ("G_m3_per_kg_s2", c.G_m3_per_kg_s2, &mut k.g_newton),
            ("gamma_e_rad_per_s_T", c.gamma_e_rad_per_s_T, &mut k.gamma_e),
            ("mu_B_J_per_T", c.mu_B_J_per_T, &mut k.mu_b),
            ("g_m_per_s2", c.g_m_per_s2, &mut k.g_earth),
            ("D_zfs_rad_per_s", c.D_zfs_rad_per_s, &mut k.d_zfs),
        ];
        for (name, value, slot) in entries {
            if let Some(v) = value {
                positive(&format!("constants.{name}"), v)?;
                *slot = v;
            }
        }
        Ok(k)
    }

    pub fn material(&self) -> Checked<Material<f64>> {
        let m = &self.material;
        positive("material.density_kg_per_m3", m.density_kg_per_m3)?;
        positive("material.chi_magnitude", m.chi_magnitude)?;
        if !(m.epsilon_r.is_finite() && m.epsilon_r > 1.0) {
            return Err(ConfigError::new("material.epsilon_r", "must be finite and > 1"));
        }
        Ok(Material {
            density: m.density_kg_per_m3,
            chi_magnitude: m.chi_magnitude,
            epsilon: m.epsilon_r,
        })
    }

    pub fn nanodiamond(&self) -> Checked<NanodiamondParams<f64>> {
        let material = self.material()?;
        let nd = &self.nanodiamond;
        let built = match (nd.diameter_m, nd.mass_kg) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "nanodiamond",
                    "set only one of diameter_m and mass_kg",
                ));
            }
            (None, Some(m)) => {
                positive("nanodiamond.mass_kg", m)?;
                NanodiamondParams::from_mass(m, material)
            }
            (d, None) => {
                let d = d.unwrap_or(250e-9);
                positive("nanodiamond.diameter_m", d)?;
                NanodiamondParams::new(d, material)
            }
        };
        built.map_err(|e| ConfigError::new("nanodiamond", e.to_string()))
    }

    pub fn field_config(&self) -> Checked<FieldConfig<f64>> {
        let f = &self.field;
        finite("field.B0_T", f.B0_T)?;
        positive("field.Bprime_T_per_m", f.Bprime_T_per_m)?;
        tilt("field.tilt_rad", f.tilt_rad)?;
        FieldConfig::new(f.B0_T, f.Bprime_T_per_m, f.tilt_rad).map_err(|e| ConfigError::new("field", e.to_string()))
    }

    pub fn trap_model(&self) -> Checked<TrapModel<f64>> {
        self.trap_model_with(self.field_config()?)
    }

    pub fn trap_model_with(&self, field: FieldConfig<f64>) -> Checked<TrapModel<f64>> {
        TrapModel::new(self.constants()?, self.nanodiamond()?, field)
            .map_err(|e| ConfigError::new("field", e.to_string()))
    }

    pub fn coil(&self) -> Checked<CoilAssembly<f64>> {
        let c = &self.coil;
        positive("coil.radius_m", c.radius_m)?;
        positive("coil.separation_m", c.separation_m)?;
        finite("coil.mmf_At", c.mmf_At)?;
        CoilAssembly::anti_helmholtz(c.radius_m, c.separation_m, c.mmf_At, self.constants()?.mu0)
            .map_err(|e| ConfigError::new("coil", e.to_string()))
    }

    pub fn integrator(&self) -> Checked<IntegratorConfig<f64>> {
        let i = &self.integrator;
        positive("integrator.rel_tol", i.rel_tol)?;
        positive("integrator.abs_tol_position_m", i.abs_tol_position_m)?;
        positive("integrator.abs_tol_velocity_m_per_s", i.abs_tol_velocity_m_per_s)?;
        if let Some(h) = i.max_step_s {
            positive("integrator.max_step_s", h)?;
        }
        at_least("integrator.max_steps", i.max_steps, 1)?;
        let cfg = IntegratorConfig {
            rel_tol: i.rel_tol,
            abs_tol_position: i.abs_tol_position_m,
            abs_tol_velocity: i.abs_tol_velocity_m_per_s,
            max_step: i.max_step_s.unwrap_or(f64::INFINITY),
            max_steps: i.max_steps,
        };
        cfg.validate()
            .map_err(|e| ConfigError::new("integrator", e.to_string()))?;
        Ok(cfg)
    }

    pub fn protocol_config(&self) -> Checked<ProtocolConfig<f64>> {
        let p = &self.protocol;
        positive("protocol.target_delta_phi_rad", p.target_delta_phi_rad)?;
        let distance = match p.distance_m {
            None => Distance::Auto,
            Some(d) => {
                positive("protocol.distance_m", d)?;
                Distance::Manual {
                    d,
                    allow_below_min: p.allow_below_min,
                }
            }
        };
        Ok(ProtocolConfig {
            target_delta_phi: p.target_delta_phi_rad,
            scenario: p.scenario,
            distance,
        })
    }

    pub fn dd_config(&self, n: usize) -> Checked<DdConfig> {
        DdConfig::new(n, self.dd.scheme).map_err(|e| ConfigError::new("dd.N_values", e.to_string()))
    }

    /// Flip schedule at ω_DD = Nω for a trap frequency `omega`.
    pub fn flip_schedule(
        &self,
        path: &str,
        section: Option<&DecouplingSection>,
        omega: f64,
    ) -> Checked<Option<FlipSchedule<f64>>> {
        self.schedule(path, section)?;
        section
            .map(|s| {
                FlipSchedule::new(s.N as f64 * omega, s.delta_rad).map_err(|e| ConfigError::new(path, e.to_string()))
            })
            .transpose()
    }

    fn schedule(&self, path: &str, section: Option<&DecouplingSection>) -> Checked {
        if let Some(s) = section {
            at_least(&format!("{path}.N"), s.N, 1)?;
            if !(s.delta_rad >= 0.0 && s.delta_rad < PI) {
                return Err(ConfigError::new(format!("{path}.delta_rad"), "must lie in [0, pi)"));
            }
        }
        Ok(())
    }

    pub fn plane_grid(&self) -> Checked<PlaneGrid<f64>> {
        let f = &self.fieldmap;
        let mut axes = Vec::new();
        for (name, a) in [("fieldmap.x_m", &f.x_m), ("fieldmap.y_m", &f.y_m)] {
            at_least(&format!("{name}.n"), a.n, 1)?;
            finite(&format!("{name}.min"), a.min)?;
            finite(&format!("{name}.max"), a.max)?;
            if a.max < a.min {
                return Err(ConfigError::new(format!("{name}.max"), "must be >= min"));
            }
            axes.push(GridAxis {
                min: a.min,
                max: a.max,
                n: a.n,
            });
        }
        finite("fieldmap.z_m", f.z_m)?;
        Ok(PlaneGrid {
            x: axes[0],
            y: axes[1],
            z: f.z_m,
        })
    }

    pub fn optimize_spec(&self) -> Checked<OptimizeSpec> {
        let o = &self.optimize;
        let range = |name: &str, a: &LogAxis| -> Checked<LogRange> {
            let path = format!("optimize.{name}");
            at_least(&format!("{path}.n"), a.n, 1)?;
            positive(&format!("{path}.min"), a.min)?;
            positive(&format!("{path}.max"), a.max)?;
            if a.max < a.min {
                return Err(ConfigError::new(format!("{path}.max"), "must be >= min"));
            }
            LogRange::new(a.min, a.max, a.n).map_err(|e| ConfigError::new(path, e.to_string()))
        };
        let spec = OptimizeSpec {
            mass: range("mass_kg", &o.mass_kg)?,
            bprime: range("Bprime_T_per_m", &o.Bprime_T_per_m)?,
            resolution: o.resolution,
            max_sweeps: o.max_sweeps,
        };
        positive("optimize.resolution", o.resolution)?;
        Ok(spec)
    }

    pub fn problem(&self, scenario: Option<Scenario>) -> Checked<Problem> {
        let mut protocol = self.protocol_config()?;
        if let Some(s) = scenario {
            protocol.scenario = s;
        }
        if protocol.distance != Distance::Auto {
            return Err(ConfigError::new(
                "protocol.distance_m",
                "the optimizer places the NDs at d_min; remove the fixed distance",
            ));
        }
        Ok(Problem {
            constants: self.constants()?,
            material: self.material()?,
            protocol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_alone_gives_the_defaults() {
        let c = Config::from_json(r#"{"version": 1}"#).unwrap();
        assert_eq!(c, Config::default());
        assert!((c.nanodiamond().unwrap().diameter() - 250e-9).abs() < 1e-20);
    }

    #[test]
    fn missing_version_is_rejected() {
        let e = Config::from_json("{}").unwrap_err();
        assert!(e.message.contains("version"), "{e}");
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let e = Config::from_json(r#"{"version": 1, "field": {"Bprime": 1.0}}"#).unwrap_err();
        assert_eq!(e.path, "field.Bprime");
        assert!(e.message.contains("unknown field `Bprime`"), "{e}");
        let e = Config::from_json(r#"{"version": 1, "colour": 3}"#).unwrap_err();
        assert!(e.message.contains("colour"), "{e}");
    }

    #[test]
    fn type_errors_name_their_path() {
        let e = Config::from_json(r#"{"version": 1, "optimize": {"mass_kg": {"min": 1, "max": 2, "n": "x"}}}"#)
            .unwrap_err();
        assert_eq!(e.path, "optimize.mass_kg.n");
    }

    #[test]
    fn zero_gradient_names_the_field() {
        let e = Config::from_json(r#"{"version": 1, "field": {"Bprime_T_per_m": 0}}"#).unwrap_err();
        assert_eq!(e.path, "field.Bprime_T_per_m");
        assert_eq!(
            e.to_string(),
            "config: field.Bprime_T_per_m: must be finite and > 0, got 0"
        );
    }

    #[test]
    fn empty_grids_are_rejected() {
        let e = Config::from_json(r#"{"version": 1, "optimize": {"mass_kg": {"min": 1e-17, "max": 1e-12, "n": 0}}}"#)
            .unwrap_err();
        assert_eq!(e.path, "optimize.mass_kg.n");
        let e = Config::from_json(r#"{"version": 1, "fieldmap": {"y_m": {"min": 0, "max": 0, "n": 0}}}"#).unwrap_err();
        assert_eq!(e.path, "fieldmap.y_m.n");
    }

    #[test]
    fn nanodiamond_takes_one_size() {
        let e =
            Config::from_json(r#"{"version": 1, "nanodiamond": {"diameter_m": 1e-7, "mass_kg": 1e-15}}"#).unwrap_err();
        assert_eq!(e.path, "nanodiamond");
        let c = Config::from_json(r#"{"version": 1, "nanodiamond": {"mass_kg": 5.6e-14}}"#).unwrap();
        assert!((c.nanodiamond().unwrap().mass() / 5.6e-14 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constants_override_the_table() {
        let c = Config::from_json(r#"{"version": 1, "constants": {"g_m_per_s2": 9.81}}"#).unwrap();
        let k = c.constants().unwrap();
        assert_eq!(k.g_earth, 9.81);
        assert_eq!(k.hbar, PhysicalConstants::codata().hbar);
        let e = Config::from_json(r#"{"version": 1, "constants": {"hbar_J_s": -1}}"#).unwrap_err();
        assert_eq!(e.path, "constants.hbar_J_s");
    }

    #[test]
    fn fixed_distance_is_refused_by_the_optimizer() {
        let c = Config::from_json(r#"{"version": 1, "protocol": {"distance_m": 1e-5}}"#).unwrap();
        assert_eq!(c.problem(None).unwrap_err().path, "protocol.distance_m");
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = Config::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(Config::from_json(&text).unwrap(), c);
    }
}
