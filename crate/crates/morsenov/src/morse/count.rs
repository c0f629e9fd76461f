//! Counting connecting trajectories between index-adjacent critical points,
//! with orientation signs, and checking that unstable and stable sets of
//! equal-index points stay apart.
//!
//! Strategy by unstable dimension of the upper point:
//!
//! - dimension 1: the unstable sphere is two points; flow both and see where
//!   they land.
//! - dimension 2: the unstable sphere is a circle. Each launch direction is
//!   given a basin label: the critical point its trajectory converges to,
//!   together with the deck vector of the limit in the universal cover of
//!   the periodic coordinates (trajectories are integrated without
//!   wrapping, so two flows reaching the same minimum around opposite
//!   sides of a handle carry different labels). Connecting trajectories
//!   are exactly the isolated boundaries between label arcs; each boundary
//!   is localized by recursive bisection, and its target is read off from
//!   the capture arc around it — directions close to a connector converge
//!   into the target's own ball.
//! - dimension ≥ 3 on separable models: a connector moves exactly one
//!   periodic coordinate from its maximum to its minimum while every other
//!   coordinate rests; candidate pairs differing in more than one
//!   coordinate get a hard zero, and the single-coordinate case launches
//!   the two axis trajectories and follows them numerically to the bottom.
//!
//! Signs use the product orientation convention: a connector launched in
//! direction `±e_a`, where `a` is the moving axis, contributes
//! `σ · (−1)^r` with `σ` the launch sign and `r` the rank of `a` among the
//! upper point's unstable axes in ambient order.

use serde_json::{json, Value};

use super::flow::{FlowOutcome, Trajectory};
use super::model::FactorKind;
use super::{MorseError, MorseSystem};

/// Outcome of counting connecting trajectories for one index-adjacent pair.
#[derive(Debug, Clone)]
pub struct SignedCount {
    pub from: String,
    pub to: String,
    /// Number of connecting trajectories found.
    pub unsigned: usize,
    /// Orientation-signed total.
    pub signed: i64,
    /// Unit launch directions of the connectors at the upper point.
    pub directions: Vec<Vec<f64>>,
}

impl SignedCount {
    pub fn to_json(&self) -> Value {
        json!({
            "from": self.from,
            "to": self.to,
            "unsigned": self.unsigned,
            "signed": self.signed,
        })
    }
}

/// Report of the unstable/stable coincidence check between two points of
/// equal index.
#[derive(Debug, Clone)]
pub struct FiberReport {
    pub from: String,
    pub to: String,
    pub forward_samples: usize,
    pub backward_samples: usize,
    /// Closest approach of the forward cloud to the other critical point.
    pub closest_forward_to_target: f64,
    /// Closest pair between the forward cloud of `from` and the backward
    /// cloud of `to`.
    pub min_cross_distance: f64,
    /// Forward trajectories whose limit was the other point (must be 0 for
    /// distinct points).
    pub wrong_limit_hits: usize,
    /// The pinned coincidence tolerance.
    pub tolerance: f64,
    pub pass: bool,
}

impl FiberReport {
    pub fn to_json(&self) -> Value {
        json!({
            "from": self.from,
            "to": self.to,
            "forward_samples": self.forward_samples,
            "backward_samples": self.backward_samples,
            "closest_forward_to_target": self.closest_forward_to_target,
            "min_cross_distance": self.min_cross_distance,
            "wrong_limit_hits": self.wrong_limit_hits,
            "tolerance": self.tolerance,
            "pass": self.pass,
        })
    }
}

/// Coincidence tolerance of the fiber check.
pub const FIBER_TOLERANCE: f64 = 1e-6;

/// Basin label of a launch direction: where the trajectory converges, and
/// the deck vector of its unwrapped limit over the periodic coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BasinLabel {
    point: usize,
    deck: Vec<i64>,
}

fn dominant_axis(v: &[f64]) -> usize {
    v.iter()
        .map(|c| c.abs())
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .expect("nonempty vector")
}

impl MorseSystem {
    /// Count the connecting trajectories from `from` down to `to`
    /// (`index(from) = index(to) + 1`), with orientation signs.
    pub fn count_connecting(&self, from: usize, to: usize) -> Result<SignedCount, MorseError> {
        let p = self.point(from);
        let q = self.point(to);
        assert_eq!(
            p.index,
            q.index + 1,
            "count_connecting expects an index drop of exactly 1"
        );
        let directions = match p.index {
            1 => self.zero_sphere_connectors(from, to)?,
            2 => self.circle_link_connectors(from, to)?,
            _ => self.separable_connectors(from, to)?,
        };
        let (signed, unsigned) = self.sign_directions(from, &directions)?;
        Ok(SignedCount {
            from: p.id.clone(),
            to: q.id.clone(),
            unsigned,
            signed,
            directions,
        })
    }

    /// Launch point at distance `link_radius` from a critical point.
    fn launch(&self, from: usize, dir: &[f64]) -> Vec<f64> {
        let p = self.point(from);
        let mut x: Vec<f64> = p
            .coords
            .iter()
            .zip(dir)
            .map(|(c, d)| c + self.link_radius * d)
            .collect();
        self.model.project(&mut x);
        x
    }

    /// Unstable sphere is S⁰: flow the two endpoints.
    fn zero_sphere_connectors(&self, from: usize, to: usize) -> Result<Vec<Vec<f64>>, MorseError> {
        let u = self.point(from).unstable_frame()[0].clone();
        let mut directions = Vec::new();
        for sigma in [1.0f64, -1.0] {
            let dir: Vec<f64> = u.iter().map(|c| sigma * c).collect();
            match self.integrate_from(&self.launch(from, &dir), true)? {
                FlowOutcome::Converged { point, .. } if point == to => directions.push(dir),
                FlowOutcome::Converged { .. } => {}
                FlowOutcome::Timeout { .. } => {
                    return Err(MorseError::ResolutionExceeded(format!(
                        "trajectory from {} did not converge within the flow-time budget",
                        self.point(from).id
                    )))
                }
            }
        }
        Ok(directions)
    }

    /// Basin label of one launch direction. Convergence fires as soon as
    /// the trajectory enters any critical point's ball with decreasing
    /// gradient, so directions very close to a connector are captured by
    /// the target itself.
    fn basin_label(&self, from: usize, dir: &[f64]) -> Result<BasinLabel, MorseError> {
        let x0 = self.launch(from, dir);
        let mut traj = Trajectory::new(&self.model, &self.cfg, &x0, true);
        traj.set_max_displacement(self.basin_radius / 2.0);
        loop {
            if let Some(i) = self.converged_at(&traj) {
                return Ok(BasinLabel {
                    point: i,
                    deck: self.deck_vector(traj.state(), i),
                });
            }
            if traj.time() >= self.cfg.max_flow_time {
                return Err(MorseError::ResolutionExceeded(format!(
                    "link trajectory from {} did not converge while labelling",
                    self.point(from).id
                )));
            }
            traj.advance()?;
        }
    }

    /// Integer offsets of an unwrapped state from a critical point's
    /// representative, over the periodic coordinates (zero elsewhere).
    fn deck_vector(&self, x: &[f64], point: usize) -> Vec<i64> {
        let p = self.point(point);
        let mut deck = vec![0i64; x.len()];
        for block in self.model.factor_blocks() {
            if block.kind == FactorKind::Circle {
                let o = block.offset;
                deck[o] = (x[o] - p.coords[o]).round() as i64;
            }
        }
        deck
    }

    /// Unstable sphere is S¹: scan basin labels around the link circle and
    /// localize each label boundary by recursive bisection. A coarse sample
    /// landing inside a capture arc already names its connector; a boundary
    /// between two sink labels is bisected until the midpoint falls into
    /// the capture arc, which names the target.
    fn circle_link_connectors(&self, from: usize, to: usize) -> Result<Vec<Vec<f64>>, MorseError> {
        let p = self.point(from);
        let target_index = p.index - 1;
        let u1 = p.unstable_frame()[0].clone();
        let u2 = p.unstable_frame()[1].clone();
        let n = self.cfg.link_samples;
        // The 31/100 offset keeps every sample and every dyadic bisection
        // point off the separatrix angles of the separable models.
        let dir_at = |s: f64| -> Vec<f64> {
            let theta = std::f64::consts::TAU * (s + 0.31) / n as f64;
            u1.iter()
                .zip(&u2)
                .map(|(a, b)| theta.cos() * a + theta.sin() * b)
                .collect()
        };

        let mut labels = Vec::with_capacity(n);
        for j in 0..n {
            labels.push(self.basin_label(from, &dir_at(j as f64))?);
        }
        let is_capture = |l: &BasinLabel| self.point(l.point).index == target_index;

        // A connector found at angle `s` aimed at point `target`.
        let mut found: Vec<(f64, usize)> = Vec::new();

        // Capture arcs sampled directly by the coarse scan: one connector
        // per maximal run of one captured label.
        for j in 0..n {
            let here = &labels[j];
            let prev = &labels[(j + n - 1) % n];
            if is_capture(here) && here != prev {
                let mut end = j;
                while labels[(end + 1) % n] == *here {
                    end += 1;
                }
                found.push((0.5 * (j + end) as f64, here.point));
            }
        }

        // Boundaries between two sink labels: bisect. The capture arc has
        // positive width, so the deepest midpoints fall inside it and name
        // the target.
        for j in 0..n {
            let la = labels[j].clone();
            let lb0 = labels[(j + 1) % n].clone();
            if la == lb0 || is_capture(&la) || is_capture(&lb0) {
                continue;
            }
            let (mut sa, mut sb) = (j as f64, j as f64 + 1.0);
            let mut lb = lb0;
            for _ in 0..self.cfg.bisection_depth {
                let sm = 0.5 * (sa + sb);
                let lm = self.basin_label(from, &dir_at(sm))?;
                if lm == la {
                    sa = sm;
                } else {
                    // A third label still narrows onto the leftmost
                    // boundary of the interval.
                    sb = sm;
                    lb = lm;
                }
            }
            if !is_capture(&lb) {
                return Err(MorseError::ResolutionExceeded(format!(
                    "basin boundary on the link of {} could not be attributed to an index-{} point",
                    p.id, target_index
                )));
            }
            found.push((sb, lb.point));
        }

        // Distinct connectors closer than the bisection resolution cannot
        // be told apart reliably.
        let resolution = 2f64.powi(1 - self.cfg.bisection_depth as i32);
        let mut angles: Vec<f64> = found.iter().map(|(s, _)| *s).collect();
        angles.sort_by(f64::total_cmp);
        for w in angles.windows(2) {
            if w[1] - w[0] < resolution {
                return Err(MorseError::ResolutionExceeded(format!(
                    "two connectors on the link of {} are closer than the bisection resolution",
                    p.id
                )));
            }
        }

        Ok(found
            .into_iter()
            .filter(|&(_, target)| target == to)
            .map(|(s, _)| dir_at(s))
            .collect())
    }

    /// Structural route for unstable dimension ≥ 3 on separable models: at
    /// most one periodic coordinate may move, and the two axis launches are
    /// still followed numerically all the way down.
    fn separable_connectors(&self, from: usize, to: usize) -> Result<Vec<Vec<f64>>, MorseError> {
        let p = self.point(from);
        let q = self.point(to);
        if !self.model.supports_signs() {
            return Err(MorseError::ResolutionExceeded(format!(
                "no counting scheme for unstable dimension {} on model {}",
                p.index, self.model
            )));
        }
        let mut moving_circle: Option<usize> = None;
        for block in self.model.factor_blocks() {
            let (o, l) = (block.offset, block.len);
            let differs = self
                .model
                .displacement(&p.coords[..], &q.coords[..])[o..o + l]
                .iter()
                .any(|d| d.abs() > self.cfg.dedup_tol);
            if !differs {
                continue;
            }
            match (block.kind, moving_circle) {
                (FactorKind::Sphere, _) | (FactorKind::Circle, Some(_)) => {
                    // More than one factor moves, or a sphere factor moves:
                    // no single connecting trajectory exists.
                    return Ok(Vec::new());
                }
                (FactorKind::Circle, None) => moving_circle = Some(o),
            }
        }
        let Some(axis) = moving_circle else {
            // Nothing differs beyond tolerance; distinct ids at distance 0
            // cannot happen after deduplication.
            return Ok(Vec::new());
        };
        let dim = p.coords.len();
        let mut directions = Vec::new();
        for sigma in [1.0f64, -1.0] {
            let mut dir = vec![0.0; dim];
            dir[axis] = sigma;
            match self.integrate_from(&self.launch(from, &dir), true)? {
                FlowOutcome::Converged { point, .. } if point == to => directions.push(dir),
                other => {
                    return Err(MorseError::ResolutionExceeded(format!(
                        "axis trajectory from {} along coordinate {} ended unexpectedly: {:?}",
                        p.id, axis, other
                    )))
                }
            }
        }
        Ok(directions)
    }

    /// The ambient axes that are unstable at a critical point of a
    /// separable model, in ascending ambient order: circle coordinates
    /// sitting at the local maximum, plus both tangent axes of any sphere
    /// factor resting at its top.
    fn unstable_axis_ranks(&self, point: usize) -> Vec<usize> {
        let p = self.point(point);
        let mut axes = Vec::new();
        for block in self.model.factor_blocks() {
            match block.kind {
                FactorKind::Circle => {
                    let c = p.coords[block.offset];
                    if c.min(1.0 - c) < 0.25 {
                        // Coordinate at 0: the cosine factor is at its max.
                        axes.push(block.offset);
                    }
                }
                FactorKind::Sphere => {
                    if p.coords[block.offset + 2] > 0.0 {
                        axes.push(block.offset);
                        axes.push(block.offset + 1);
                    }
                }
            }
        }
        axes
    }

    /// Orientation signs: each connector direction is dominated by one
    /// unstable axis `a`; it contributes `sign(dir_a) · (−1)^rank(a)`.
    fn sign_directions(
        &self,
        from: usize,
        directions: &[Vec<f64>],
    ) -> Result<(i64, usize), MorseError> {
        if directions.is_empty() {
            return Ok((0, 0));
        }
        if !self.model.supports_signs() {
            return Err(MorseError::ResolutionExceeded(format!(
                "orientation signs are only defined for separable models, not {}",
                self.model
            )));
        }
        let axes = self.unstable_axis_ranks(from);
        let mut signed = 0i64;
        for dir in directions {
            let a = dominant_axis(dir);
            let rank = axes.iter().position(|&x| x == a).ok_or_else(|| {
                MorseError::ResolutionExceeded(format!(
                    "connector direction from {} is not aligned with an unstable axis",
                    self.point(from).id
                ))
            })?;
            let sigma = if dir[a] >= 0.0 { 1i64 } else { -1 };
            signed += sigma * if rank % 2 == 0 { 1 } else { -1 };
        }
        Ok((signed, directions.len()))
    }

    /// Sample the unstable set of `from` forwards and the stable set of
    /// `to` backwards, and check the two clouds only meet where they must.
    pub fn fiber_check(
        &self,
        from: usize,
        to: usize,
        samples: usize,
    ) -> Result<FiberReport, MorseError> {
        let p = self.point(from);
        let q = self.point(to);
        assert_eq!(p.index, q.index, "fiber check compares points of equal index");

        let forward_dirs = sphere_directions(p.unstable_frame(), samples);
        let (forward_cloud, wrong_limit_hits) =
            self.sample_cloud(from, &forward_dirs, true, samples, Some(to))?;
        let backward_dirs = sphere_directions(q.stable_frame(), samples);
        let (backward_cloud, _) = self.sample_cloud(to, &backward_dirs, false, samples, None)?;

        let closest_forward_to_target = forward_cloud
            .iter()
            .map(|x| self.model.distance(x, &q.coords))
            .fold(f64::INFINITY, f64::min);
        let mut min_cross_distance = f64::INFINITY;
        let mut stray_coincidence = false;
        for fx in &forward_cloud {
            for bx in &backward_cloud {
                let d = self.model.distance(fx, bx);
                min_cross_distance = min_cross_distance.min(d);
                if d < FIBER_TOLERANCE {
                    // Coincidences are only allowed at the shared point.
                    let near_base = from == to
                        && self.model.distance(fx, &p.coords) < 1e-3
                        && self.model.distance(bx, &p.coords) < 1e-3;
                    if !near_base {
                        stray_coincidence = true;
                    }
                }
            }
        }

        let pass = if from == to {
            !stray_coincidence && wrong_limit_hits == 0
        } else {
            !stray_coincidence
                && wrong_limit_hits == 0
                && closest_forward_to_target > FIBER_TOLERANCE
                && min_cross_distance > FIBER_TOLERANCE
        };
        Ok(FiberReport {
            from: p.id.clone(),
            to: q.id.clone(),
            forward_samples: forward_cloud.len(),
            backward_samples: backward_cloud.len(),
            closest_forward_to_target,
            min_cross_distance,
            wrong_limit_hits,
            tolerance: FIBER_TOLERANCE,
            pass,
        })
    }

    /// Flow from every direction and collect roughly `budget` states spread
    /// over the trajectories. Returns the cloud (wrapped) and how many
    /// trajectories converged to `forbidden_limit`.
    fn sample_cloud(
        &self,
        base: usize,
        directions: &[Vec<f64>],
        forward: bool,
        budget: usize,
        forbidden_limit: Option<usize>,
    ) -> Result<(Vec<Vec<f64>>, usize), MorseError> {
        if directions.is_empty() {
            // Index 0 (or top index, backwards): the set is the point itself.
            return Ok((vec![self.point(base).coords.clone()], 0));
        }
        let per_traj = budget.div_ceil(directions.len()).max(1);
        let mut cloud = Vec::new();
        let mut wrong = 0usize;
        for dir in directions {
            let x0 = self.launch(base, dir);
            let mut traj = Trajectory::new(&self.model, &self.cfg, &x0, forward);
            traj.set_max_displacement(self.basin_radius / 2.0);
            let mut states = vec![self.model.wrap(&x0)];
            let outcome = loop {
                if let Some(i) = self.converged_at(&traj) {
                    break FlowOutcome::Converged {
                        point: i,
                        time: traj.time(),
                    };
                }
                if traj.time() >= self.cfg.max_flow_time {
                    break FlowOutcome::Timeout {
                        state: traj.state().to_vec(),
                    };
                }
                traj.advance()?;
                states.push(self.model.wrap(traj.state()));
            };
            if let (FlowOutcome::Converged { point, .. }, Some(f)) = (&outcome, forbidden_limit) {
                if *point == f && base != f {
                    wrong += 1;
                }
            }
            // Thin to the per-trajectory quota, keeping endpoints.
            let take = per_traj.min(states.len());
            for k in 0..take {
                let idx = if take == 1 {
                    0
                } else {
                    k * (states.len() - 1) / (take - 1)
                };
                cloud.push(states[idx].clone());
            }
        }
        Ok((cloud, wrong))
    }
}

/// Deterministic unit directions on the sphere spanned by `frame`
/// (an orthonormal set of k ambient vectors). k = 0 gives nothing; k = 1
/// the two endpoints; k = 2 a uniform circle; k = 3 a Fibonacci sphere;
/// larger k falls back to the axis pairs.
fn sphere_directions(frame: &[Vec<f64>], want: usize) -> Vec<Vec<f64>> {
    let k = frame.len();
    let ambient = frame.first().map_or(0, Vec::len);
    let combine = |coeffs: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; ambient];
        for (c, u) in coeffs.iter().zip(frame) {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi += c * u[i];
            }
        }
        v
    };
    match k {
        0 => Vec::new(),
        1 => vec![combine(&[1.0]), combine(&[-1.0])],
        2 => {
            let m = want.clamp(8, 64);
            (0..m)
                .map(|j| {
                    let theta = std::f64::consts::TAU * (j as f64 + 0.31) / m as f64;
                    combine(&[theta.cos(), theta.sin()])
                })
                .collect()
        }
        3 => {
            let m = want.clamp(12, 64);
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            (0..m)
                .map(|j| {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = std::f64::consts::TAU * (j as f64 / golden).fract();
                    combine(&[r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut dirs = Vec::new();
            for a in 0..k {
                let mut plus = vec![0.0; k];
                plus[a] = 1.0;
                dirs.push(combine(&plus));
                plus[a] = -1.0;
                dirs.push(combine(&plus));
                for b in (a + 1)..k {
                    let s = std::f64::consts::FRAC_1_SQRT_2;
                    let mut diag = vec![0.0; k];
                    diag[a] = s;
                    diag[b] = s;
                    dirs.push(combine(&diag));
                    diag[b] = -s;
                    dirs.push(combine(&diag));
                }
            }
            dirs
        }
    }
}
