//! Adaptive integration of the negative-gradient flow.
//!
//! Trajectories are advanced with the Dormand–Prince embedded 5(4)
//! Runge–Kutta pair with a standard proportional step controller. After
//! every accepted step the state is projected back onto the manifold
//! (sphere factors renormalized); torus coordinates run in the universal
//! cover and are only wrapped for display and distances.

use serde_json::Value;

use super::model::MorseModel;
use super::MorseError;

/// Every numerical tolerance in the engine, pinned here and nowhere else.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Initial trial step of the adaptive integrator.
    pub initial_step: f64,
    /// Absolute local-error tolerance per step.
    pub abs_tol: f64,
    /// Relative local-error tolerance per step.
    pub rel_tol: f64,
    /// A trajectory that has not converged by this flow time is reported
    /// as a timeout.
    pub max_flow_time: f64,
    /// Newton search accepts a critical point when the intrinsic gradient
    /// norm drops below this.
    pub newton_tol: f64,
    /// Hessian eigenvalues smaller than this in absolute value flag a
    /// degenerate critical point.
    pub degeneracy_tol: f64,
    /// Distance below which two search results are the same critical point.
    pub dedup_tol: f64,
    /// Radius of the convergence ball around each critical point; when
    /// `None`, it is resolved to 0.1 × the minimum inter-critical-point
    /// distance.
    pub basin_radius: Option<f64>,
    /// Radius of the sphere of initial conditions around a critical point
    /// used for launching trajectories; when `None`, resolved to
    /// 0.05 × the minimum inter-critical-point distance.
    pub link_radius: Option<f64>,
    /// Coarse sample count for one-dimensional links.
    pub link_samples: usize,
    /// Maximum bisection depth when localizing a label change on a link.
    pub bisection_depth: u32,
    /// Seed-grid refinement rounds allowed to the critical-point search.
    pub max_refinements: u32,
    /// A trajectory inside a convergence ball counts as converged once the
    /// intrinsic gradient norm falls below this.
    pub grad_converged_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            initial_step: 1e-2,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_flow_time: 400.0,
            newton_tol: 1e-12,
            degeneracy_tol: 1e-8,
            dedup_tol: 1e-6,
            basin_radius: None,
            link_radius: None,
            link_samples: 64,
            bisection_depth: 48,
            max_refinements: 3,
            grad_converged_tol: 1e-9,
        }
    }
}

impl FlowConfig {
    /// Stability-check variant: every tolerance halved and the link
    /// sampling made denser. Used to confirm that computed complexes do
    /// not change under tightening.
    pub fn halved(&self) -> Self {
        FlowConfig {
            initial_step: self.initial_step / 2.0,
            abs_tol: self.abs_tol / 2.0,
            rel_tol: self.rel_tol / 2.0,
            max_flow_time: self.max_flow_time,
            newton_tol: self.newton_tol / 2.0,
            degeneracy_tol: self.degeneracy_tol,
            dedup_tol: self.dedup_tol / 2.0,
            basin_radius: self.basin_radius,
            link_radius: self.link_radius,
            link_samples: self.link_samples * 2,
            bisection_depth: self.bisection_depth + 4,
            max_refinements: self.max_refinements,
            grad_converged_tol: self.grad_converged_tol / 2.0,
        }
    }

    /// Reject nonsensical configurations up front.
    pub fn validate(&self) -> Result<(), MorseError> {
        let positive = [
            ("initial_step", self.initial_step),
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("max_flow_time", self.max_flow_time),
            ("newton_tol", self.newton_tol),
            ("degeneracy_tol", self.degeneracy_tol),
            ("dedup_tol", self.dedup_tol),
            ("grad_converged_tol", self.grad_converged_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MorseError::Config(format!("{name} must be positive")));
            }
        }
        for (name, v) in [("basin_radius", self.basin_radius), ("link_radius", self.link_radius)]
        {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(MorseError::Config(format!("{name} must be positive")));
                }
            }
        }
        if self.link_samples < 8 {
            return Err(MorseError::Config("link_samples must be at least 8".into()));
        }
        if self.bisection_depth < 8 {
            return Err(MorseError::Config("bisection_depth must be at least 8".into()));
        }
        Ok(())
    }

    /// Apply overrides from a JSON object; unknown keys are rejected so a
    /// typo cannot silently leave a default in place.
    pub fn with_overrides(mut self, v: &Value) -> Result<Self, MorseError> {
        let obj = v
            .as_object()
            .ok_or_else(|| MorseError::Config("config must be a JSON object".into()))?;
        for (key, value) in obj {
            let as_f64 = || {
                value
                    .as_f64()
                    .ok_or_else(|| MorseError::Config(format!("{key} must be a number")))
            };
            let as_u64 = || {
                value
                    .as_u64()
                    .ok_or_else(|| MorseError::Config(format!("{key} must be a nonnegative integer")))
            };
            match key.as_str() {
                "initial_step" => self.initial_step = as_f64()?,
                "abs_tol" => self.abs_tol = as_f64()?,
                "rel_tol" => self.rel_tol = as_f64()?,
                "max_flow_time" => self.max_flow_time = as_f64()?,
                "newton_tol" => self.newton_tol = as_f64()?,
                "degeneracy_tol" => self.degeneracy_tol = as_f64()?,
                "dedup_tol" => self.dedup_tol = as_f64()?,
                "basin_radius" => self.basin_radius = Some(as_f64()?),
                "link_radius" => self.link_radius = Some(as_f64()?),
                "link_samples" => self.link_samples = as_u64()? as usize,
                "bisection_depth" => self.bisection_depth = as_u64()? as u32,
                "max_refinements" => self.max_refinements = as_u64()? as u32,
                "grad_converged_tol" => self.grad_converged_tol = as_f64()?,
                other => {
                    return Err(MorseError::Config(format!("unknown config key {other:?}")))
                }
            }
        }
        self.validate()?;
        Ok(self)
    }
}

/// Where a trajectory ended up.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowOutcome {
    /// Entered the convergence ball of critical point `point` with the
    /// gradient norm below tolerance, at flow time `time`.
    Converged { point: usize, time: f64 },
    /// Still wandering at `max_flow_time`.
    Timeout { state: Vec<f64> },
}

// Dormand–Prince 5(4) Butcher tableau.
const STAGES: usize = 7;
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; STAGES] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; STAGES] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const MIN_STEP: f64 = 1e-13;

/// A single trajectory of `±∇f` advanced step by step.
pub(crate) struct Trajectory<'m> {
    model: &'m MorseModel,
    /// −1 for the descending (forward) flow, +1 for the ascending flow.
    sign: f64,
    x: Vec<f64>,
    t: f64,
    h: f64,
    abs_tol: f64,
    rel_tol: f64,
    /// Cap on the distance covered per step, so event detection against
    /// fixed-radius balls cannot be jumped over.
    max_displacement: f64,
    /// Gradient norm at the previous accepted state (NaN before the first
    /// step); convergence detection demands a decrease.
    prev_grad: f64,
}

impl<'m> Trajectory<'m> {
    pub fn new(model: &'m MorseModel, cfg: &FlowConfig, x0: &[f64], forward: bool) -> Self {
        let mut x = x0.to_vec();
        model.project(&mut x);
        Trajectory {
            model,
            sign: if forward { -1.0 } else { 1.0 },
            x,
            t: 0.0,
            h: cfg.initial_step,
            abs_tol: cfg.abs_tol,
            rel_tol: cfg.rel_tol,
            max_displacement: f64::INFINITY,
            prev_grad: f64::NAN,
        }
    }

    pub fn set_max_displacement(&mut self, d: f64) {
        self.max_displacement = d;
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// True once the gradient norm has dropped below its value at the
    /// previous accepted state. Always false before the first step, so a
    /// launch inside a convergence ball is not mistaken for a limit.
    pub fn grad_decreasing(&self) -> bool {
        let g = self
            .model
            .grad(&self.x)
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt();
        g < self.prev_grad
    }

    fn field(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.model.grad(x);
        for c in g.iter_mut() {
            *c *= self.sign;
        }
        g
    }

    /// Advance by one accepted adaptive step.
    pub fn advance(&mut self) -> Result<(), MorseError> {
        let n = self.x.len();
        let mut k = vec![vec![0.0; n]; STAGES];
        loop {
            if self.h < MIN_STEP {
                return Err(MorseError::StepUnderflow {
                    time: self.t,
                    step: self.h,
                });
            }
            k[0] = self.field(&self.x);
            let speed = k[0].iter().map(|c| c * c).sum::<f64>().sqrt();
            let mut h = self.h;
            if speed > 0.0 {
                h = h.min(self.max_displacement / speed);
            }
            for s in 1..STAGES {
                let mut stage_x = self.x.clone();
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s - 1][j];
                    if a != 0.0 {
                        for i in 0..n {
                            stage_x[i] += h * a * kj[i];
                        }
                    }
                }
                k[s] = self.field(&stage_x);
            }
            let mut x5 = self.x.clone();
            let mut err_sq = 0.0;
            for i in 0..n {
                let mut d5 = 0.0;
                let mut d4 = 0.0;
                for s in 0..STAGES {
                    d5 += B5[s] * k[s][i];
                    d4 += B4[s] * k[s][i];
                }
                x5[i] += h * d5;
                let err = h * (d5 - d4);
                let scale = self.abs_tol + self.rel_tol * self.x[i].abs().max(x5[i].abs());
                err_sq += (err / scale) * (err / scale);
            }
            let err_norm = (err_sq / n as f64).sqrt();
            let factor = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err_norm <= 1.0 {
                self.t += h;
                self.x = x5;
                self.model.project(&mut self.x);
                self.h = (h * factor).min(1.0);
                self.prev_grad = speed;
                return Ok(());
            }
            self.h = h * factor.min(1.0);
        }
    }
}
