//! Minimum protocol time over (m, B′): log-log grid scan, then coordinate golden-section refinement.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::PhysicalConstants;
use crate::entanglement::{protocol_duration, Distance, ProtocolConfig, ProtocolResult};
use crate::error::{invalid, Result};
use crate::model::{FieldConfig, Material, NanodiamondParams, TrapModel};

/// Closed positive interval scanned logarithmically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRange {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl LogRange {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        let r = Self { min, max, n };
        r.validate("range")?;
        Ok(r)
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if !(self.min > 0.0 && self.max.is_finite() && self.max >= self.min) {
            return Err(invalid(name, "needs 0 < min <= max < inf"));
        }
        if self.n == 0 || (self.n == 1 && self.min != self.max) {
            return Err(invalid(name, "needs at least two points unless min == max"));
        }
        Ok(())
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.n == 1 || i == 0 {
            return self.min;
        }
        if i + 1 == self.n {
            return self.max;
        }
        let f = i as f64 / (self.n - 1) as f64;
        (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
    }

    fn log_step(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.max.ln() - self.min.ln()) / (self.n - 1) as f64
        }
    }
}

/// Fixed physics of the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    pub constants: PhysicalConstants<f64>,
    pub material: Material<f64>,
    pub protocol: ProtocolConfig<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeSpec {
    pub mass: LogRange,
    pub bprime: LogRange,
    /// Refinement stops when a coordinate is known to this relative resolution.
    pub resolution: f64,
    pub max_sweeps: usize,
}

impl OptimizeSpec {
    pub fn grid(mass: (f64, f64), bprime: (f64, f64), n: usize) -> Result<Self> {
        Ok(Self {
            mass: LogRange::new(mass.0, mass.1, n)?,
            bprime: LogRange::new(bprime.0, bprime.1, n)?,
            resolution: 1e-3,
            max_sweeps: 20,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub mass: f64,
    pub bprime: f64,
    pub result: ProtocolResult<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub mass: f64,
    pub bprime: f64,
    pub t_min: f64,
    pub result: ProtocolResult<f64>,
    /// Grid minimizer before refinement.
    pub grid_mass: f64,
    pub grid_bprime: f64,
    pub grid_t_min: f64,
    pub mass_on_boundary: bool,
    pub bprime_on_boundary: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimization {
    pub optimum: Optimum,
    /// Row-major: mass outer, B′ inner.
    pub surface: Vec<SurfacePoint>,
}

pub fn evaluate(problem: &Problem, mass: f64, bprime: f64) -> Result<ProtocolResult<f64>> {
    let nd = NanodiamondParams::from_mass(mass, problem.material)?;
    let model = TrapModel::new(problem.constants, nd, FieldConfig::gradient(bprime)?)?;
    protocol_duration(&model, &problem.protocol)
}

fn order(a: &SurfacePoint, b: &SurfacePoint) -> Ordering {
    a.result
        .t_total
        .total_cmp(&b.result.t_total)
        .then(a.mass.total_cmp(&b.mass))
        .then(a.bprime.total_cmp(&b.bprime))
}

/// Golden-section minimum of `f` on [a, b] (log coordinates) to width `tol`.
fn golden<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

pub fn optimize_tmin(problem: &Problem, spec: &OptimizeSpec) -> Result<Optimization> {
    spec.mass.validate("mass_range")?;
    spec.bprime.validate("Bprime_range")?;
    if !matches!(problem.protocol.distance, Distance::Auto) {
        return Err(invalid("distance", "the optimizer needs d = auto"));
    }
    if !(spec.resolution > 0.0 && spec.resolution < 1.0) {
        return Err(invalid("resolution", "must lie in (0, 1)"));
    }

    let cells: Vec<(f64, f64)> = (0..spec.mass.n)
        .flat_map(|i| (0..spec.bprime.n).map(move |j| (spec.mass.point(i), spec.bprime.point(j))))
        .collect();
    let surface = cells
        .par_iter()
        .map(|&(mass, bprime)| {
            Ok(SurfacePoint {
                mass,
                bprime,
                result: evaluate(problem, mass, bprime)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = *surface.iter().min_by(|a, b| order(a, b)).expect("grid is non-empty");

    let (lm_lo, lm_hi) = (spec.mass.min.ln(), spec.mass.max.ln());
    let (lb_lo, lb_hi) = (spec.bprime.min.ln(), spec.bprime.max.ln());
    let (sm, sb) = (spec.mass.log_step(), spec.bprime.log_step());
    let tol = (1.0 + spec.resolution).ln();
    let mut evaluations = surface.len();
    let mut lm = best.mass.ln();
    let mut lb = best.bprime.ln();
    let mut t = best.result.t_total;
    for _ in 0..spec.max_sweeps {
        let (old_m, old_b) = (lm, lb);
        if sm > 0.0 {
            let (x, v) = golden(
                |x| {
                    evaluations += 1;
                    evaluate(problem, x.exp(), lb.exp()).map(|r| r.t_total)
                },
                (lm - sm).max(lm_lo),
                (lm + sm).min(lm_hi),
                tol,
            )?;
            if v < t {
                lm = x;
                t = v;
            }
        }
        if sb > 0.0 {
            let (x, v) = golden(
                |x| {
                    evaluations += 1;
                    evaluate(problem, lm.exp(), x.exp()).map(|r| r.t_total)
                },
                (lb - sb).max(lb_lo),
                (lb + sb).min(lb_hi),
                tol,
            )?;
            if v < t {
                lb = x;
                t = v;
            }
        }
        if (lm - old_m).abs() <= tol && (lb - old_b).abs() <= tol {
            break;
        }
    }
    // Pin to the range edge when refinement stalls against it, so boundary reporting is exact.
    let snap = |x: f64, lo: f64, hi: f64| {
        if x - lo <= tol {
            lo
        } else if hi - x <= tol {
            hi
        } else {
            x
        }
    };
    let lm = snap(lm, lm_lo, lm_hi);
    let lb = snap(lb, lb_lo, lb_hi);
    let mass = if lm == lm_lo {
        spec.mass.min
    } else if lm == lm_hi {
        spec.mass.max
    } else {
        lm.exp()
    };
    let bprime = if lb == lb_lo {
        spec.bprime.min
    } else if lb == lb_hi {
        spec.bprime.max
    } else {
        lb.exp()
    };
    let mut result = evaluate(problem, mass, bprime)?;
    let (mut mass, mut bprime) = (mass, bprime);
    if order(&best, &SurfacePoint { mass, bprime, result }) == Ordering::Less {
        mass = best.mass;
        bprime = best.bprime;
        result = best.result;
    }
    evaluations += 1;
    Ok(Optimization {
        optimum: Optimum {
            mass,
            bprime,
            t_min: result.t_total,
            result,
            grid_mass: best.mass,
            grid_bprime: best.bprime,
            grid_t_min: best.result.t_total,
            mass_on_boundary: spec.mass.n > 1 && (mass == spec.mass.min || mass == spec.mass.max),
            bprime_on_boundary: spec.bprime.n > 1 && (bprime == spec.bprime.min || bprime == spec.bprime.max),
            evaluations,
        },
        surface,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::Scenario;

    fn problem(scenario: Scenario) -> Problem {
        Problem {
            constants: PhysicalConstants::codata(),
            material: Material::diamond(),
            protocol: ProtocolConfig::new(scenario),
        }
    }

    #[test]
    fn log_range_endpoints_are_exact() {
        let r = LogRange::new(1e-17, 1e-12, 60).unwrap();
        assert_eq!(r.point(0), 1e-17);
        assert_eq!(r.point(59), 1e-12);
        assert!((r.point(1) / r.point(0) / 10f64.powf(5.0 / 59.0) - 1.0).abs() < 1e-10);
        assert!(LogRange::new(0.0, 1.0, 3).is_err());
        assert!(LogRange::new(1.0, 2.0, 1).is_err());
        assert!(LogRange::new(2.0, 1.0, 3).is_err());
        assert_eq!(LogRange::new(2.0, 2.0, 1).unwrap().point(0), 2.0);
    }

    #[test]
    fn golden_section_finds_a_parabola_minimum() {
        let (x, v) = golden(|x| Ok((x - 0.3) * (x - 0.3) + 1.0), -1.0, 2.0, 1e-8).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn refinement_never_worsens_the_grid_minimum() {
        let spec = OptimizeSpec::grid((1e-15, 1e-12), (0.1, 10.0), 8).unwrap();
        for s in [Scenario::HoldOnly, Scenario::FullCycle] {
            let o = optimize_tmin(&problem(s), &spec).unwrap().optimum;
            assert!(o.t_min <= o.grid_t_min);
            assert!(o.evaluations > 64);
        }
    }

    #[test]
    fn deterministic_and_row_major() {
        let spec = OptimizeSpec::grid((1e-16, 1e-13), (0.2, 5.0), 5).unwrap();
        let a = optimize_tmin(&problem(Scenario::HoldOnly), &spec).unwrap();
        let b = optimize_tmin(&problem(Scenario::HoldOnly), &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.surface.len(), 25);
        assert_eq!(a.surface[1].mass, a.surface[0].mass);
        assert_eq!(a.surface[5].bprime, a.surface[0].bprime);
    }

    #[test]
    fn rejects_manual_distance() {
        let mut p = problem(Scenario::HoldOnly);
        p.protocol.distance = Distance::Manual {
            d: 1e-3,
            allow_below_min: false,
        };
        let spec = OptimizeSpec::grid((1e-16, 1e-13), (0.2, 5.0), 5).unwrap();
        assert!(optimize_tmin(&p, &spec).is_err());
    }
}
