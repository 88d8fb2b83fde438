//! Steering by gradient descent on `J(eta) = |u(T) - target|_V^2` over
//! piecewise-constant controls. The gradient is the exact derivative of the
//! discrete RK4 map, obtained by a backward sweep along the stored states.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{axpy_into, ControlSchedule, GalerkinSystem, Rk4};
use crate::error::{Error, Result};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;
const STAGNATION: usize = 20;
const LBFGS_MEMORY: usize = 10;
/// Relative `J` below which further iterations only chase rounding.
const RESOLVED: f64 = 1e-24;

/// Search direction used by [`steer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Steepest descent with a Barzilai-Borwein trial step.
    Gradient,
    /// Limited-memory BFGS direction built from the same adjoint gradients.
    #[default]
    Lbfgs,
}

/// Knobs for [`steer`].
#[derive(Debug, Clone, PartialEq)]
pub struct SteerOptions {
    pub n_segments: usize,
    pub max_iters: usize,
    pub dt: f64,
    /// Seed for the random restart used when the zero control is a critical
    /// point of `J`.
    pub seed: u64,
    /// Amplitude of that restart in unit-L2 coordinates; a heuristic is used
    /// when absent.
    pub init_scale: Option<f64>,
    /// Stop once `J <= stop_ratio * J(0)`.
    pub stop_ratio: f64,
    pub method: Method,
}

impl Default for SteerOptions {
    fn default() -> Self {
        Self {
            n_segments: 8,
            max_iters: 500,
            dt: 1e-3,
            seed: 0,
            init_scale: None,
            stop_ratio: 0.0,
            method: Method::Lbfgs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLog {
    pub iter: usize,
    pub j: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteerResult {
    pub schedule: ControlSchedule,
    /// V-distance reached by `schedule`.
    pub distance: f64,
    /// V-distance under zero control.
    pub initial_distance: f64,
    pub log: Vec<IterationLog>,
    pub iterations: usize,
    /// Twenty consecutive iterations without improving the best value.
    pub stagnated: bool,
    /// The zero control was a critical point and the search restarted from a
    /// seeded random schedule.
    pub random_start: bool,
}

struct Problem<'a> {
    sys: &'a GalerkinSystem,
    u0: &'a [f64],
    target: &'a [f64],
    dt: f64,
    durations: Vec<f64>,
    /// `1 / |Y^c|` per control mode
    inv_norm: Vec<f64>,
}

struct Forward {
    /// State before every step.
    states: Vec<Vec<f64>>,
    /// Segment and step length of every step.
    steps: Vec<(usize, f64)>,
    last: Vec<f64>,
    j: f64,
}

impl<'a> Problem<'a> {
    fn new(sys: &'a GalerkinSystem, u0: &'a [f64], target: &'a [f64], dt: f64, durations: Vec<f64>) -> Result<Self> {
        if u0.len() != sys.dim() || target.len() != sys.dim() {
            return Err(Error::Precondition("state and target must have one entry per mode".into()));
        }
        let inv_norm = sys.control_modes().iter().map(|&c| 1.0 / sys.norm_sq()[c].sqrt()).collect();
        Ok(Self { sys, u0, target, dt, durations, inv_norm })
    }

    fn width(&self) -> usize {
        self.inv_norm.len()
    }

    /// Schedule from unit-L2 control coordinates.
    fn schedule(&self, theta: &[f64]) -> ControlSchedule {
        let w = self.width();
        ControlSchedule {
            segments: self
                .durations
                .iter()
                .enumerate()
                .map(|(s, &duration)| super::Segment {
                    duration,
                    values: theta[s * w..(s + 1) * w].iter().zip(&self.inv_norm).map(|(t, n)| t * n).collect(),
                })
                .collect(),
        }
    }

    fn theta(&self, sched: &ControlSchedule) -> Vec<f64> {
        sched.segments.iter().flat_map(|s| s.values.iter().zip(&self.inv_norm).map(|(v, n)| v / n)).collect()
    }

    fn terminal(&self, u: &[f64]) -> f64 {
        let sys = self.sys;
        let nu = sys.domain().nu();
        (0..sys.dim())
            .map(|c| {
                let e = u[c] - self.target[c];
                sys.lambdas()[c] / nu * sys.norm_sq()[c] * e * e
            })
            .sum()
    }

    fn forward(&self, sched: &ControlSchedule) -> Result<Forward> {
        let sys = self.sys;
        sched.check(sys)?;
        sys.check_dt(self.dt, sched)?;
        let total: usize = sched.segments.iter().map(|s| s.steps(self.dt).0).sum();
        let mut states = Vec::with_capacity(total);
        let mut steps = Vec::with_capacity(total);
        let mut rk = Rk4::new(sys.dim());
        let mut u = self.u0.to_vec();
        let mut t = 0.0;
        for (s, seg) in sched.segments.iter().enumerate() {
            let eta = sched.full_values(sys, s);
            let (n, h) = seg.steps(self.dt);
            for _ in 0..n {
                states.push(u.clone());
                steps.push((s, h));
                rk.step(sys, &mut u, &eta, h);
                t += h;
                if u.iter().any(|x| !x.is_finite()) {
                    return Err(Error::BlowUp { time: t });
                }
            }
        }
        let j = self.terminal(&u);
        Ok(Forward { states, steps, last: u, j })
    }

    /// `dJ/d eta` per segment on the control modes.
    fn backward(&self, sched: &ControlSchedule, fw: &Forward) -> Vec<Vec<f64>> {
        let sys = self.sys;
        let n = sys.dim();
        let nu = sys.domain().nu();
        let mut lam: Vec<f64> =
            (0..n).map(|c| 2.0 * sys.lambdas()[c] / nu * sys.norm_sq()[c] * (fw.last[c] - self.target[c])).collect();
        let mut eta_bar = vec![vec![0.0; n]; sched.segments.len()];
        let etas: Vec<Vec<f64>> = (0..sched.segments.len()).map(|s| sched.full_values(sys, s)).collect();
        let (mut k1, mut k2, mut k3) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let (mut x2, mut x3, mut x4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut kb = vec![0.0; n];
        for (u, &(s, h)) in fw.states.iter().zip(&fw.steps).rev() {
            let eta = &etas[s];
            sys.rhs_into(u, eta, &mut k1);
            axpy_into(&mut x2, u, 0.5 * h, &k1);
            sys.rhs_into(&x2, eta, &mut k2);
            axpy_into(&mut x3, u, 0.5 * h, &k2);
            sys.rhs_into(&x3, eta, &mut k3);
            axpy_into(&mut x4, u, h, &k3);

            let bar = &mut eta_bar[s];
            let mut next = lam.clone();
            // stage 4
            for i in 0..n {
                kb[i] = h / 6.0 * lam[i];
            }
            let mut xb = sys.rhs_jacobian_transpose(&x4, &kb);
            accumulate(&mut next, bar, &xb, &kb);
            // stage 3
            for i in 0..n {
                kb[i] = h / 3.0 * lam[i] + h * xb[i];
            }
            xb = sys.rhs_jacobian_transpose(&x3, &kb);
            accumulate(&mut next, bar, &xb, &kb);
            // stage 2
            for i in 0..n {
                kb[i] = h / 3.0 * lam[i] + 0.5 * h * xb[i];
            }
            xb = sys.rhs_jacobian_transpose(&x2, &kb);
            accumulate(&mut next, bar, &xb, &kb);
            // stage 1
            for i in 0..n {
                kb[i] = h / 6.0 * lam[i] + 0.5 * h * xb[i];
            }
            xb = sys.rhs_jacobian_transpose(u, &kb);
            accumulate(&mut next, bar, &xb, &kb);
            lam = next;
        }
        eta_bar.into_iter().map(|full| sys.control_modes().iter().map(|&c| full[c]).collect()).collect()
    }

    fn gradient_theta(&self, sched: &ControlSchedule, fw: &Forward) -> Vec<f64> {
        self.backward(sched, fw)
            .into_iter()
            .flat_map(|g| g.into_iter().zip(&self.inv_norm).map(|(g, n)| g * n))
            .collect()
    }
}

fn accumulate(next: &mut [f64], bar: &mut [f64], xb: &[f64], kb: &[f64]) {
    for i in 0..next.len() {
        next[i] += xb[i];
        bar[i] += kb[i];
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|u(T) - target|_V^2` under `schedule`.
pub fn cost(sys: &GalerkinSystem, u0: &[f64], target: &[f64], schedule: &ControlSchedule, dt: f64) -> Result<f64> {
    let durations = schedule.segments.iter().map(|s| s.duration).collect();
    Ok(Problem::new(sys, u0, target, dt, durations)?.forward(schedule)?.j)
}

/// `J` and its gradient with respect to the schedule values, one vector per
/// segment in `control_modes()` order.
pub fn cost_gradient(
    sys: &GalerkinSystem,
    u0: &[f64],
    target: &[f64],
    schedule: &ControlSchedule,
    dt: f64,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let durations = schedule.segments.iter().map(|s| s.duration).collect();
    let p = Problem::new(sys, u0, target, dt, durations)?;
    let fw = p.forward(schedule)?;
    Ok((fw.j, p.backward(schedule, &fw)))
}

/// Searches for a control driving `u0` to `target` at time `horizon`.
///
/// Descent in unit-L2 control coordinates with Armijo backtracking, starting
/// from zero control. The first trial step is `J / |g|^2`; later ones are
/// Barzilai-Borwein steps for [`Method::Gradient`] and unit steps along the
/// L-BFGS direction for [`Method::Lbfgs`]. Returns the best schedule seen.
pub fn steer(
    sys: &GalerkinSystem,
    u0: &[f64],
    target: &[f64],
    horizon: f64,
    opts: &SteerOptions,
) -> Result<SteerResult> {
    let zero = ControlSchedule::zeros(sys, horizon, opts.n_segments)?;
    let durations = zero.segments.iter().map(|s| s.duration).collect();
    let p = Problem::new(sys, u0, target, opts.dt, durations)?;

    let mut theta = p.theta(&zero);
    let mut fw = p.forward(&zero)?;
    let j0 = fw.j;
    let initial_distance = j0.sqrt();
    let mut result = SteerResult {
        schedule: zero.clone(),
        distance: initial_distance,
        initial_distance,
        log: vec![IterationLog { iter: 0, j: j0, step: 0.0 }],
        iterations: 0,
        stagnated: false,
        random_start: false,
    };
    if j0 == 0.0 || p.width() == 0 {
        return Ok(result);
    }
    let mut grad = p.gradient_theta(&zero, &fw);

    // A target orthogonal to everything the linearized dynamics can reach makes
    // the zero control a saddle of J.
    if dot(&grad, &grad).sqrt() <= 1e-12 * j0.sqrt() {
        let scale = opts.init_scale.unwrap_or_else(|| default_init_scale(sys, u0, target, horizon));
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        theta = (0..theta.len()).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let sched = p.schedule(&theta);
        fw = p.forward(&sched)?;
        grad = p.gradient_theta(&sched, &fw);
        result.random_start = true;
    }

    let mut best_j = j0;
    let mut best_theta = p.theta(&zero);
    if fw.j < best_j {
        best_j = fw.j;
        best_theta = theta.clone();
    }
    let mut step: Option<f64> = None;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    let mut since_best = 0usize;
    for iter in 1..=opts.max_iters {
        result.iterations = iter;
        let g2 = dot(&grad, &grad);
        if g2 == 0.0 || !g2.is_finite() {
            break;
        }
        let mut dir = match opts.method {
            Method::Lbfgs if !memory.is_empty() => lbfgs_direction(&grad, &memory),
            _ => grad.iter().map(|g| -g).collect(),
        };
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            memory.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = -g2;
        }
        let mut trial = match (opts.method, step) {
            (_, None) => fw.j / g2,
            (Method::Lbfgs, Some(_)) if !memory.is_empty() => 1.0,
            (_, Some(s)) => s,
        };
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + trial * d).collect();
            let sched = p.schedule(&cand);
            if let Ok(f) = p.forward(&sched) {
                if f.j <= fw.j + ARMIJO * trial * slope {
                    accepted = Some((cand, sched, f));
                    break;
                }
            }
            trial *= 0.5;
        }
        let Some((cand, sched, f)) = accepted else {
            result.log.push(IterationLog { iter, j: fw.j, step: 0.0 });
            result.stagnated = true;
            break;
        };
        let new_grad = p.gradient_theta(&sched, &f);
        let s: Vec<f64> = cand.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = Some(if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * trial });
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if memory.len() == LBFGS_MEMORY {
                memory.pop_front();
            }
            memory.push_back((s, y));
        }
        result.log.push(IterationLog { iter, j: f.j, step: trial });
        theta = cand;
        grad = new_grad;
        fw = f;
        if fw.j < best_j {
            best_j = fw.j;
            best_theta = theta.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STAGNATION {
                result.stagnated = true;
                break;
            }
        }
        if best_j <= opts.stop_ratio.max(RESOLVED) * j0 {
            break;
        }
    }
    result.schedule = p.schedule(&best_theta);
    result.distance = best_j.sqrt();
    Ok(result)
}

/// `-H g` from the two-loop recursion over the stored `(s, y)` pairs.
fn lbfgs_direction(grad: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y) in memory.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push((rho, a));
    }
    let (s, y) = memory.back().expect("memory is not empty");
    let gamma = dot(s, y) / dot(y, y);
    for qi in &mut q {
        *qi *= gamma;
    }
    for ((s, y), (rho, a)) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|x| -x).collect()
}

/// Half the square root of the target distance in L2, spread over the
/// horizon: the quadratic interactions of a response this size are of the
/// target's order.
fn default_init_scale(sys: &GalerkinSystem, u0: &[f64], target: &[f64], horizon: f64) -> f64 {
    let diff: Vec<f64> = target.iter().zip(u0).map(|(a, b)| a - b).collect();
    0.5 * sys.energy(&diff).sqrt().sqrt() / horizon
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::FieldExpansion;
    use crate::spectral_basis::{DomainSpec, Frequency, ModeIndex};

    fn small() -> GalerkinSystem {
        GalerkinSystem::assemble(&DomainSpec::new([1.0, 1.0, 1.0], 0.1).unwrap(), 3, &FieldExpansion::new()).unwrap()
    }

    #[test]
    fn already_there() {
        let sys = small();
        let z = vec![0.0; sys.dim()];
        let r = steer(&sys, &z, &z, 1.0, &SteerOptions { n_segments: 4, dt: 2e-3, ..Default::default() }).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!(r.schedule.segments.iter().all(|s| s.values.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn gradient_matches_differences() {
        let sys = small();
        let n = sys.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u0: Vec<f64> = sys.norm_sq().iter().map(|q| 0.3 * rng.gen_range(-1.0..1.0) / q.sqrt()).collect();
        let target: Vec<f64> = sys.norm_sq().iter().map(|q| 0.3 * rng.gen_range(-1.0..1.0) / q.sqrt()).collect();
        let mut sched = ControlSchedule::zeros(&sys, 0.5, 3).unwrap();
        for s in &mut sched.segments {
            for v in &mut s.values {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        let dt = 2e-3;
        let (_, g) = cost_gradient(&sys, &u0, &target, &sched, dt).unwrap();
        let dir: Vec<Vec<f64>> =
            sched.segments.iter().map(|s| s.values.iter().map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let eps = 1e-5;
        let shifted = |e: f64| {
            let mut out = sched.clone();
            for (seg, d) in out.segments.iter_mut().zip(&dir) {
                for (v, dv) in seg.values.iter_mut().zip(d) {
                    *v += e * dv;
                }
            }
            cost(&sys, &u0, &target, &out, dt).unwrap()
        };
        let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
        let ad: f64 = g.iter().zip(&dir).map(|(a, b)| dot(a, b)).sum();
        assert!((fd - ad).abs() <= 1e-5 * ad.abs(), "fd {fd} adjoint {ad}");
        assert_eq!(n, 81);
    }

    #[test]
    fn reaches_a_small_control_target() {
        let sys = small();
        let z = vec![0.0; sys.dim()];
        let idx = ModeIndex::new(1, Frequency::new(1, 1, 1));
        let c = sys.basis().position(&idx).unwrap();
        let mut target = z.clone();
        target[c] = 1e-4 / sys.norm_sq()[c].sqrt();
        let opts = SteerOptions { n_segments: 4, max_iters: 100, dt: 2e-3, ..Default::default() };
        let r = steer(&sys, &z, &target, 1.0, &opts).unwrap();
        assert!(r.distance < 1e-6, "distance {}", r.distance);
    }
}
