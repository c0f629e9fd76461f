//! The analyzed system: model + located critical points + resolved radii,
//! and assembly of the signed chain complex from trajectory counts.

use serde_json::{json, Value};

use crate::chain::{ChainComplex, ChainError, Degree, Generator, GradedModule, LinearMap};
use crate::novikov::{NovikovMatrix, NovikovScalar};

use super::count::SignedCount;
use super::critical::{find_critical_points, grad_norm, CriticalPoint};
use super::flow::{FlowConfig, FlowOutcome, Trajectory};
use super::model::MorseModel;
use super::MorseError;

/// A catalog model together with its located critical points and the
/// resolved geometric radii; all trajectory-level operations hang off this.
#[derive(Debug)]
pub struct MorseSystem {
    pub(crate) model: MorseModel,
    pub(crate) cfg: FlowConfig,
    pub(crate) points: Vec<CriticalPoint>,
    pub(crate) min_separation: f64,
    pub(crate) basin_radius: f64,
    pub(crate) link_radius: f64,
}

impl MorseSystem {
    /// Locate and classify the critical points, then fix the convergence
    /// and launch radii from the minimum separation (or the explicit
    /// values in the configuration).
    pub fn analyze(model: MorseModel, cfg: FlowConfig) -> Result<Self, MorseError> {
        cfg.validate()?;
        let points = find_critical_points(&model, &cfg)?;
        let mut min_separation = f64::INFINITY;
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                min_separation =
                    min_separation.min(model.distance(&points[i].coords, &points[j].coords));
            }
        }
        if !min_separation.is_finite() {
            // A single critical point: fall back to the injectivity scale.
            min_separation = 1.0;
        }
        let basin_radius = cfg.basin_radius.unwrap_or(0.1 * min_separation);
        let link_radius = cfg.link_radius.unwrap_or(0.05 * min_separation);
        if link_radius >= min_separation {
            return Err(MorseError::Config(format!(
                "link radius {link_radius} is not smaller than the minimum critical-point separation {min_separation}"
            )));
        }
        if basin_radius >= 0.5 * min_separation {
            return Err(MorseError::Config(format!(
                "basin radius {basin_radius} overlaps neighbouring convergence balls (separation {min_separation})"
            )));
        }
        Ok(MorseSystem {
            model,
            cfg,
            points,
            min_separation,
            basin_radius,
            link_radius,
        })
    }

    pub fn model(&self) -> &MorseModel {
        &self.model
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    pub fn points(&self) -> &[CriticalPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &CriticalPoint {
        &self.points[i]
    }

    pub fn find_point(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p.id == id)
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn basin_radius(&self) -> f64 {
        self.basin_radius
    }

    pub fn link_radius(&self) -> f64 {
        self.link_radius
    }

    /// The critical point whose convergence ball contains the trajectory's
    /// state while the gradient norm is decreasing (or already below the
    /// absolute floor, covering starts at a critical point).
    pub(crate) fn converged_at(&self, traj: &Trajectory) -> Option<usize> {
        let x = traj.state();
        let (best, dist) = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, self.model.distance(x, &p.coords)))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if dist < self.basin_radius
            && (traj.grad_decreasing()
                || grad_norm(&self.model, x) < self.cfg.grad_converged_tol)
        {
            Some(best)
        } else {
            None
        }
    }

    /// Integrate the flow from `x0` (descending when `forward`) until it
    /// converges to a critical point or the time budget runs out.
    pub fn integrate_from(&self, x0: &[f64], forward: bool) -> Result<FlowOutcome, MorseError> {
        let mut traj = Trajectory::new(&self.model, &self.cfg, x0, forward);
        traj.set_max_displacement(self.basin_radius / 2.0);
        loop {
            if let Some(i) = self.converged_at(&traj) {
                return Ok(FlowOutcome::Converged {
                    point: i,
                    time: traj.time(),
                });
            }
            if traj.time() >= self.cfg.max_flow_time {
                return Ok(FlowOutcome::Timeout {
                    state: self.model.wrap(traj.state()),
                });
            }
            traj.advance()?;
        }
    }

    /// Integrate and also record the function value after every accepted
    /// step (used to verify descent monotonicity).
    pub fn integrate_with_values(
        &self,
        x0: &[f64],
        forward: bool,
    ) -> Result<(FlowOutcome, Vec<f64>), MorseError> {
        let mut traj = Trajectory::new(&self.model, &self.cfg, x0, forward);
        traj.set_max_displacement(self.basin_radius / 2.0);
        let mut values = vec![self.model.f(traj.state())];
        loop {
            if let Some(i) = self.converged_at(&traj) {
                return Ok((
                    FlowOutcome::Converged {
                        point: i,
                        time: traj.time(),
                    },
                    values,
                ));
            }
            if traj.time() >= self.cfg.max_flow_time {
                return Ok((
                    FlowOutcome::Timeout {
                        state: self.model.wrap(traj.state()),
                    },
                    values,
                ));
            }
            traj.advance()?;
            values.push(self.model.f(traj.state()));
        }
    }

    /// Count every index-adjacent pair and assemble the chain complex with
    /// the signed counts as integer differential entries. The constructor's
    /// square-zero check is the final consistency gate.
    pub fn build_complex(&self) -> Result<(ChainComplex, Vec<SignedCount>), MorseError> {
        let generators: Vec<Generator> = self
            .points
            .iter()
            .map(|p| {
                Generator::new(p.id.clone(), p.index as i64).with_coords(p.coords.clone())
            })
            .collect();
        let module = GradedModule::new(generators).map_err(MorseError::Chain)?;
        let n = self.points.len();
        let mut matrix = NovikovMatrix::zero(n, n);
        let mut counts = Vec::new();
        for from in 0..n {
            for to in 0..n {
                if self.points[from].index != self.points[to].index + 1 {
                    continue;
                }
                let count = self.count_connecting(from, to)?;
                matrix.set(to, from, NovikovScalar::from_int(count.signed));
                counts.push(count);
            }
        }
        let d = LinearMap::new(module.clone(), module.clone(), Degree::Graded(-1), matrix)
            .map_err(MorseError::Chain)?;
        let complex = ChainComplex::new(module, d).map_err(|e| match e {
            ChainError::DifferentialSquareNonzero(msg) => {
                MorseError::DifferentialSquareNonzero(msg)
            }
            other => MorseError::Chain(other),
        })?;
        Ok((complex, counts))
    }

    /// Summary of the analyzed system (critical points with indices,
    /// values, and spectra).
    pub fn to_json(&self) -> Value {
        json!({
            "model": self.model.name(),
            "critical_points": self
                .points
                .iter()
                .map(|p| {
                    json!({
                        "id": p.id,
                        "coords": p.coords,
                        "index": p.index,
                        "value": p.value,
                        "eigenvalues": p.eigenvalues,
                    })
                })
                .collect::<Vec<_>>(),
            "min_separation": self.min_separation,
            "basin_radius": self.basin_radius,
            "link_radius": self.link_radius,
        })
    }
}
