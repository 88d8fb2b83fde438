//! Galerkin truncation of `u' + A u + B(u, u) + h = eta` on the eigenmodes
//! with frequencies up to a cutoff, a fixed-step RK4 integrator, and adjoint
//! steering over piecewise-constant controls.
//!
//! States are coefficient vectors on the unnormalized eigenmodes in basis
//! order, so the L2 energy is `sum_c |Y^c|^2 u_c^2`.

mod steer;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interaction::{bilinear_sym, FieldExpansion};
use crate::io::{ScheduleFile, SegmentFile, StateEntry};
use crate::saturation::{first_generation_modes, ModeSet};
use crate::spectral_basis::{eigenvalue, Basis, DomainSpec, ModeIndex};

pub use steer::{cost, cost_gradient, steer, IterationLog, Method, SteerOptions, SteerResult};

const PRUNE: f64 = 1e-14;

/// One stored interaction: contributes `coef * u_a * u_b` to its output mode.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    a: u32,
    b: u32,
    coef: f64,
}

/// The assembled truncated system. Immutable once built.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    basis: Basis,
    lambdas: Vec<f64>,
    norm_sq: Vec<f64>,
    row_start: Vec<usize>,
    entries: Vec<Entry>,
    h: Vec<f64>,
    control_modes: Vec<usize>,
}

impl GalerkinSystem {
    /// Builds the system with the first-generation modes as controls.
    pub fn assemble(domain: &DomainSpec, cutoff: u32, h_spec: &FieldExpansion) -> Result<Self> {
        if cutoff < 3 {
            return Err(Error::Precondition(format!("cutoff must be at least 3, got {cutoff}")));
        }
        let controls = first_generation_modes(cutoff, domain)?;
        Self::assemble_with_controls(domain, cutoff, h_spec, &controls)
    }

    /// Builds the system with a caller-chosen control set.
    pub fn assemble_with_controls(
        domain: &DomainSpec,
        cutoff: u32,
        h_spec: &FieldExpansion,
        controls: &ModeSet,
    ) -> Result<Self> {
        if cutoff < 3 {
            return Err(Error::Precondition(format!("cutoff must be at least 3, got {cutoff}")));
        }
        let basis = Basis::up_to(cutoff, domain);
        let n = basis.len();
        let lambdas = basis.modes().iter().map(|m| eigenvalue(m.k, domain)).collect::<Result<Vec<_>>>()?;
        let norm_sq: Vec<f64> = basis.modes().iter().map(|m| m.norm_sq).collect();

        let h = expansion_to_vec(&basis, h_spec)?;
        let mut control_modes = Vec::with_capacity(controls.len());
        for idx in controls.iter() {
            let pos = basis.position(idx).ok_or_else(|| Error::UnknownMode(idx.to_string()))?;
            control_modes.push(pos);
        }
        control_modes.sort_unstable();

        // (output, entry) per left index, in a fixed order
        let per_a: Vec<Vec<(usize, Entry)>> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut out = Vec::new();
                for b in a..n {
                    let product = bilinear_sym(basis.mode(a), basis.mode(b), domain);
                    for (idx, &t) in product.iter() {
                        if t.abs() <= PRUNE {
                            continue;
                        }
                        let Some(c) = basis.position(idx) else { continue };
                        let coef = if a == b { 0.5 * t } else { t };
                        out.push((c, Entry { a: a as u32, b: b as u32, coef }));
                    }
                }
                out
            })
            .collect();

        let mut counts = vec![0usize; n + 1];
        for list in &per_a {
            for (c, _) in list {
                counts[c + 1] += 1;
            }
        }
        for c in 0..n {
            counts[c + 1] += counts[c];
        }
        let row_start = counts.clone();
        let mut fill = counts;
        let mut entries = vec![Entry { a: 0, b: 0, coef: 0.0 }; row_start[n]];
        for list in &per_a {
            for &(c, e) in list {
                entries[fill[c]] = e;
                fill[c] += 1;
            }
        }

        Ok(Self { basis, lambdas, norm_sq, row_start, entries, h, control_modes })
    }

    pub fn domain(&self) -> &DomainSpec {
        self.basis.domain()
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn modes(&self) -> Vec<ModeIndex> {
        self.basis.modes().iter().map(|m| m.index()).collect()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambdas.iter().copied().fold(0.0, f64::max)
    }

    pub fn norm_sq(&self) -> &[f64] {
        &self.norm_sq
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Basis positions of the control modes, ascending.
    pub fn control_modes(&self) -> &[usize] {
        &self.control_modes
    }

    /// Number of stored tensor entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `<B(Y^a, Y^b) + B(Y^b, Y^a), Y^c> / |Y^c|^2`, read back from storage.
    pub fn tensor_entry(&self, c: usize, a: usize, b: usize) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.row(c)
            .iter()
            .filter(|e| e.a as usize == a && e.b as usize == b)
            .map(|e| if a == b { 2.0 * e.coef } else { e.coef })
            .sum()
    }

    fn row(&self, c: usize) -> &[Entry] {
        &self.entries[self.row_start[c]..self.row_start[c + 1]]
    }

    /// Coefficients of `B(u, u)`.
    pub fn nonlinear(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.nonlinear_into(u, &mut out);
        out
    }

    fn nonlinear_into(&self, u: &[f64], out: &mut [f64]) {
        out.par_iter_mut().with_min_len(32).enumerate().for_each(|(c, o)| {
            *o = self.row(c).iter().map(|e| e.coef * u[e.a as usize] * u[e.b as usize]).sum();
        });
    }

    /// `du/dt = -lambda u - B(u, u) - h + eta`.
    pub fn rhs(&self, u: &[f64], eta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.rhs_into(u, eta, &mut out);
        out
    }

    fn rhs_into(&self, u: &[f64], eta: &[f64], out: &mut [f64]) {
        assert_eq!(u.len(), self.dim(), "state dimension");
        assert_eq!(eta.len(), self.dim(), "control dimension");
        self.nonlinear_into(u, out);
        for c in 0..out.len() {
            out[c] = -self.lambdas[c] * u[c] - out[c] - self.h[c] + eta[c];
        }
    }

    /// `J(u)^T p` for the Jacobian of the right-hand side in `u`.
    pub fn rhs_jacobian_transpose(&self, u: &[f64], p: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = self.lambdas.iter().zip(p).map(|(l, p)| -l * p).collect();
        for (c, &pc) in p.iter().enumerate() {
            if pc == 0.0 {
                continue;
            }
            for e in self.row(c) {
                let (a, b) = (e.a as usize, e.b as usize);
                let s = pc * e.coef;
                g[a] -= s * u[b];
                g[b] -= s * u[a];
            }
        }
        g
    }

    /// L2 energy `sum_c |Y^c|^2 u_c^2`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.norm_sq).map(|(x, n)| n * x * x).sum()
    }

    /// `<v, w>` in L2.
    pub fn inner(&self, v: &[f64], w: &[f64]) -> f64 {
        v.iter().zip(w).zip(&self.norm_sq).map(|((x, y), n)| n * x * y).sum()
    }

    /// `sqrt(sum_c (lambda_c / nu) |Y^c|^2 u_c^2)`.
    pub fn v_norm(&self, u: &[f64]) -> f64 {
        let nu = self.domain().nu();
        u.iter().zip(&self.norm_sq).zip(&self.lambdas).map(|((x, n), l)| l / nu * n * x * x).sum::<f64>().sqrt()
    }

    /// A state vector from an expansion; modes outside the truncation are an error.
    pub fn state_from(&self, e: &FieldExpansion) -> Result<Vec<f64>> {
        expansion_to_vec(&self.basis, e)
    }

    /// The nonzero coefficients of a state.
    pub fn state_to_expansion(&self, u: &[f64]) -> FieldExpansion {
        let mut out = FieldExpansion::new();
        for (i, &x) in u.iter().enumerate() {
            if x != 0.0 {
                out.add(self.basis.mode(i).index(), x);
            }
        }
        out
    }

    fn check_dt(&self, dt: f64, schedule: &ControlSchedule) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Precondition(format!("time step must be positive, got {dt}")));
        }
        let limit = 0.1 / self.lambda_max();
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!("time step {dt} exceeds 0.1/lambda_max = {limit}")));
        }
        if let Some(s) = schedule.segments.iter().find(|s| dt > s.duration * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!("time step {dt} exceeds segment duration {}", s.duration)));
        }
        Ok(())
    }

    /// Classical RK4 with a fixed step, hitting every segment boundary. Every
    /// step is sampled.
    pub fn integrate(&self, u0: &[f64], schedule: &ControlSchedule, dt: f64) -> Result<Trajectory> {
        let mut times = vec![0.0];
        let mut states = vec![u0.to_vec()];
        self.march(u0, schedule, dt, |t, _, u| {
            times.push(t);
            states.push(u.to_vec());
        })?;
        Ok(Trajectory { times, states })
    }

    /// Final state only.
    pub fn final_state(&self, u0: &[f64], schedule: &ControlSchedule, dt: f64) -> Result<Vec<f64>> {
        self.march(u0, schedule, dt, |_, _, _| {})
    }

    /// Runs the time loop; `on_step(t, segment, u)` sees the state after each step.
    fn march(
        &self,
        u0: &[f64],
        schedule: &ControlSchedule,
        dt: f64,
        mut on_step: impl FnMut(f64, usize, &[f64]),
    ) -> Result<Vec<f64>> {
        if u0.len() != self.dim() {
            return Err(Error::Precondition(format!("state has {} entries, system has {}", u0.len(), self.dim())));
        }
        schedule.check(self)?;
        self.check_dt(dt, schedule)?;
        let mut rk = Rk4::new(self.dim());
        let mut u = u0.to_vec();
        let mut t0 = 0.0;
        for (s, seg) in schedule.segments.iter().enumerate() {
            let eta = schedule.full_values(self, s);
            let (steps, h) = seg.steps(dt);
            for i in 0..steps {
                rk.step(self, &mut u, &eta, h);
                let t = if i + 1 == steps { t0 + seg.duration } else { t0 + (i + 1) as f64 * h };
                if u.iter().any(|x| !x.is_finite()) {
                    return Err(Error::BlowUp { time: t });
                }
                on_step(t, s, &u);
            }
            t0 += seg.duration;
        }
        Ok(u)
    }
}

fn expansion_to_vec(basis: &Basis, e: &FieldExpansion) -> Result<Vec<f64>> {
    let mut v = vec![0.0; basis.len()];
    for (idx, &x) in e.iter() {
        let pos = basis.position(idx).ok_or_else(|| Error::UnknownMode(idx.to_string()))?;
        v[pos] = x;
    }
    Ok(v)
}

struct Rk4 {
    k: [Vec<f64>; 4],
    x: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Self { k: std::array::from_fn(|_| vec![0.0; n]), x: vec![0.0; n] }
    }

    fn step(&mut self, sys: &GalerkinSystem, u: &mut [f64], eta: &[f64], h: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        let x = &mut self.x;
        sys.rhs_into(u, eta, k1);
        axpy_into(x, u, 0.5 * h, k1);
        sys.rhs_into(x, eta, k2);
        axpy_into(x, u, 0.5 * h, k2);
        sys.rhs_into(x, eta, k3);
        axpy_into(x, u, h, k3);
        sys.rhs_into(x, eta, k4);
        for i in 0..u.len() {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// `out = u + s k`
fn axpy_into(out: &mut [f64], u: &[f64], s: f64, k: &[f64]) {
    for i in 0..out.len() {
        out[i] = u[i] + s * k[i];
    }
}

/// One constant piece of a control.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration: f64,
    /// Values on the system's control modes, in `control_modes()` order.
    pub values: Vec<f64>,
}

impl Segment {
    /// Number of RK4 steps and the step actually used.
    fn steps(&self, dt: f64) -> (usize, f64) {
        let n = ((self.duration / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (n, self.duration / n as f64)
    }
}

/// A piecewise-constant control valued in the span of the control modes.
/// Values are stored on the control modes only, so a schedule is zero
/// elsewhere by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    pub segments: Vec<Segment>,
}

impl ControlSchedule {
    /// `n_segments` equal pieces of zero control over `[0, horizon]`.
    pub fn zeros(sys: &GalerkinSystem, horizon: f64, n_segments: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || n_segments == 0 {
            return Err(Error::Precondition("horizon must be positive and there must be at least one segment".into()));
        }
        let duration = horizon / n_segments as f64;
        let width = sys.control_modes().len();
        Ok(Self { segments: vec![Segment { duration, values: vec![0.0; width] }; n_segments] })
    }

    /// A single segment of constant control.
    pub fn constant(sys: &GalerkinSystem, horizon: f64, eta: &FieldExpansion) -> Result<Self> {
        let mut s = Self::zeros(sys, horizon, 1)?;
        s.segments[0].values = control_values(sys, eta)?;
        Ok(s)
    }

    pub fn horizon(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    fn check(&self, sys: &GalerkinSystem) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Precondition("schedule has no segments".into()));
        }
        for s in &self.segments {
            if !(s.duration > 0.0 && s.duration.is_finite()) {
                return Err(Error::Precondition(format!("segment duration must be positive, got {}", s.duration)));
            }
            if s.values.len() != sys.control_modes().len() {
                return Err(Error::Precondition(format!(
                    "segment has {} control values, system has {} control modes",
                    s.values.len(),
                    sys.control_modes().len()
                )));
            }
        }
        Ok(())
    }

    /// The control of segment `s` as a full state-sized vector.
    pub fn full_values(&self, sys: &GalerkinSystem, s: usize) -> Vec<f64> {
        let mut eta = vec![0.0; sys.dim()];
        for (&pos, &v) in sys.control_modes().iter().zip(&self.segments[s].values) {
            eta[pos] = v;
        }
        eta
    }

    pub fn to_file(&self, sys: &GalerkinSystem) -> ScheduleFile {
        let segments = self
            .segments
            .iter()
            .map(|s| SegmentFile {
                duration: s.duration,
                coeffs: sys
                    .control_modes()
                    .iter()
                    .zip(&s.values)
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(&pos, &value)| {
                        let idx = sys.basis().mode(pos).index();
                        StateEntry { j: idx.j, k: idx.k.0, value }
                    })
                    .collect(),
            })
            .collect();
        ScheduleFile { segments }
    }

    /// Reads a schedule; a coefficient on a non-control mode is an error.
    pub fn from_file(sys: &GalerkinSystem, file: &ScheduleFile) -> Result<Self> {
        let mut segments = Vec::with_capacity(file.segments.len());
        for seg in &file.segments {
            let mut e = FieldExpansion::new();
            for c in &seg.coeffs {
                e.add(c.index(), c.value);
            }
            segments.push(Segment { duration: seg.duration, values: control_values(sys, &e)? });
        }
        let out = Self { segments };
        out.check(sys)?;
        Ok(out)
    }
}

fn control_values(sys: &GalerkinSystem, eta: &FieldExpansion) -> Result<Vec<f64>> {
    let mut values = vec![0.0; sys.control_modes().len()];
    for (idx, &x) in eta.iter() {
        let pos = sys.basis().position(idx).ok_or_else(|| Error::UnknownMode(idx.to_string()))?;
        let slot = sys
            .control_modes()
            .binary_search(&pos)
            .map_err(|_| Error::UnknownMode(format!("{idx} is not a control mode")))?;
        values[slot] = x;
    }
    Ok(values)
}

/// Sampled solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("a trajectory has its initial state")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_basis::Frequency;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(nu: f64) -> DomainSpec {
        DomainSpec::new([1.0, 1.0, 1.0], nu).unwrap()
    }

    fn random_state(sys: &GalerkinSystem, rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
        sys.norm_sq().iter().map(|n| scale * rng.gen_range(-1.0..1.0) / n.sqrt()).collect()
    }

    #[test]
    fn seed_size_and_symmetry() {
        let sys = GalerkinSystem::assemble(&unit(0.1), 3, &FieldExpansion::new()).unwrap();
        assert_eq!(sys.dim(), 81);
        assert_eq!(sys.control_modes().len(), 81);
        let (a, b) = (3, 40);
        for c in 0..sys.dim() {
            assert_eq!(sys.tensor_entry(c, a, b), sys.tensor_entry(c, b, a));
        }
    }

    #[test]
    fn rest_state_is_fixed() {
        let sys = GalerkinSystem::assemble(&unit(0.1), 3, &FieldExpansion::new()).unwrap();
        let z = vec![0.0; sys.dim()];
        assert!(sys.rhs(&z, &z).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn self_interaction_dichotomy() {
        let sys = GalerkinSystem::assemble(&unit(0.1), 4, &FieldExpansion::new()).unwrap();
        let z = vec![0.0; sys.dim()];
        for (i, m) in sys.basis().modes().iter().enumerate() {
            let mut u = z.clone();
            u[i] = 0.7;
            let du = sys.rhs(&u, &z);
            let mut linear = z.clone();
            linear[i] = -sys.lambdas()[i] * 0.7;
            let diff = du.iter().zip(&linear).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            if m.k.num_zero() == 1 {
                assert!(diff <= 1e-12, "{}", m.index());
            } else if m.k.max_component() <= 2 {
                // products stay inside the truncation
                assert!(diff > 1e-6, "{}", m.index());
            }
        }
    }

    #[test]
    fn nonlinearity_is_energy_neutral() {
        let sys = GalerkinSystem::assemble(&DomainSpec::new([1.0, 2.0, 3.0], 0.1).unwrap(), 4, &FieldExpansion::new())
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let u = random_state(&sys, &mut rng, 1.0);
            let b = sys.nonlinear(&u);
            let norm = sys.energy(&u).sqrt();
            assert!(sys.inner(&b, &u).abs() <= 1e-10 * norm.powi(3));
        }
    }

    #[test]
    fn jacobian_transpose_matches_differences() {
        let sys = GalerkinSystem::assemble(&unit(0.1), 3, &FieldExpansion::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_state(&sys, &mut rng, 1.0);
        let p: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z = vec![0.0; sys.dim()];
        let eps = 1e-6;
        let shift = |s: f64| -> Vec<f64> { u.iter().zip(&v).map(|(a, b)| a + s * b).collect() };
        let fp = sys.rhs(&shift(eps), &z);
        let fm = sys.rhs(&shift(-eps), &z);
        let jv: f64 = fp.iter().zip(&fm).zip(&p).map(|((a, b), p)| (a - b) / (2.0 * eps) * p).sum();
        let jtp: f64 = sys.rhs_jacobian_transpose(&u, &p).iter().zip(&v).map(|(a, b)| a * b).sum();
        assert_relative_eq!(jv, jtp, max_relative = 1e-7);
    }

    #[test]
    fn linear_decay() {
        let sys = GalerkinSystem::assemble(&unit(0.1), 3, &FieldExpansion::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u0 = random_state(&sys, &mut rng, 1e-10);
        let sched = ControlSchedule::zeros(&sys, 1.0, 1).unwrap();
        let u = sys.final_state(&u0, &sched, 2.5e-4).unwrap();
        for c in 0..sys.dim() {
            let exact = u0[c] * (-sys.lambdas()[c]).exp();
            assert_relative_eq!(u[c], exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn constant_forcing_response() {
        let sys = GalerkinSystem::assemble(&unit(0.1), 3, &FieldExpansion::new()).unwrap();
        let idx = ModeIndex::new(1, Frequency::new(0, 1, 1));
        let eta = FieldExpansion::single(idx, 1e-7);
        let sched = ControlSchedule::constant(&sys, 2.0, &eta).unwrap();
        let u = sys.final_state(&vec![0.0; sys.dim()], &sched, 2.5e-4).unwrap();
        let c = sys.basis().position(&idx).unwrap();
        let l = sys.lambdas()[c];
        assert_relative_eq!(u[c], 1e-7 / l * (1.0 - (-l * 2.0).exp()), max_relative = 1e-8);
    }

    #[test]
    fn schedule_rejects_non_control_modes() {
        let dom = unit(0.1);
        let controls = ModeSet::new(0, crate::saturation::cq(3).into_iter().filter(|m| m.k.num_zero() == 1));
        let sys = GalerkinSystem::assemble_with_controls(&dom, 3, &FieldExpansion::new(), &controls).unwrap();
        let bad = FieldExpansion::single(ModeIndex::new(1, Frequency::new(1, 1, 1)), 1.0);
        assert!(matches!(ControlSchedule::constant(&sys, 1.0, &bad), Err(Error::UnknownMode(_))));
        let ok = FieldExpansion::single(ModeIndex::new(1, Frequency::new(0, 1, 1)), 1.0);
        let sched = ControlSchedule::constant(&sys, 1.0, &ok).unwrap();
        let eta = sched.full_values(&sys, 0);
        for (i, m) in sys.basis().modes().iter().enumerate() {
            if m.k.num_zero() == 0 {
                assert_eq!(eta[i], 0.0);
            }
        }
        let back = ControlSchedule::from_file(&sys, &sched.to_file(&sys)).unwrap();
        assert_eq!(back, sched);
    }

    #[test]
    fn step_size_preconditions() {
        let sys = GalerkinSystem::assemble(&unit(0.1), 3, &FieldExpansion::new()).unwrap();
        let z = vec![0.0; sys.dim()];
        let sched = ControlSchedule::zeros(&sys, 1.0, 4).unwrap();
        assert!(sys.final_state(&z, &sched, 0.0).is_err());
        assert!(sys.final_state(&z, &sched, 1.0).is_err());
        assert!(sys.final_state(&z, &sched, 1e-3).is_ok());
    }

    #[test]
    fn v_norm_of_unit_mode() {
        let dom = DomainSpec::new([1.0, 2.0, 3.0], 0.1).unwrap();
        let sys = GalerkinSystem::assemble(&dom, 3, &FieldExpansion::new()).unwrap();
        let c = 17;
        let mut u = vec![0.0; sys.dim()];
        u[c] = 1.0 / sys.norm_sq()[c].sqrt();
        let kl = sys.basis().mode(c).k.scaled(&dom);
        let expect = std::f64::consts::PI * (kl[0] * kl[0] + kl[1] * kl[1] + kl[2] * kl[2]).sqrt();
        assert_relative_eq!(sys.v_norm(&u), expect, max_relative = 1e-12);
        assert_eq!(sys.v_norm(&vec![0.0; sys.dim()]), 0.0);
    }

    #[test]
    fn forcing_h_enters_with_minus_sign() {
        let idx = ModeIndex::new(1, Frequency::new(1, 1, 1));
        let h = FieldExpansion::single(idx, 0.05);
        let sys = GalerkinSystem::assemble(&unit(0.1), 3, &h).unwrap();
        let z = vec![0.0; sys.dim()];
        let du = sys.rhs(&z, &z);
        let c = sys.basis().position(&idx).unwrap();
        assert_eq!(du[c], -0.05);
        assert_eq!(du.iter().filter(|x| **x != 0.0).count(), 1);
    }
}
