mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satspec::galerkin::{steer, ControlSchedule, GalerkinSystem, SteerOptions};
use satspec::saturation::{cq, ModeSet};
use satspec::{DomainSpec, EigenMode, FieldExpansion, Frequency, ModeIndex};

use common::{oracle_product, random_state};

fn unit(nu: f64) -> DomainSpec {
    DomainSpec::new([1.0, 1.0, 1.0], nu).unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[test]
fn rk4_converges_at_fourth_order() {
    let sys = GalerkinSystem::assemble(&unit(0.1), 3, &FieldExpansion::new()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let u0 = random_state(&sys, &mut rng, 0.5);
    let mut sched = ControlSchedule::zeros(&sys, 0.3, 2).unwrap();
    for s in &mut sched.segments {
        s.values.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    }
    let base = 0.1 / sys.lambda_max();
    let runs: Vec<Vec<f64>> = (0..4).map(|i| sys.final_state(&u0, &sched, base / f64::powi(2.0, i)).unwrap()).collect();
    let e1 = dist(&runs[0], &runs[1]);
    let e2 = dist(&runs[1], &runs[2]);
    let e3 = dist(&runs[2], &runs[3]);
    let p1 = (e1 / e2).log2();
    let p2 = (e2 / e3).log2();
    assert!(p1 >= 3.5 && p2 >= 3.5, "observed orders {p1} {p2}");
}

#[test]
fn free_decay_never_gains_energy() {
    for d in [unit(0.1), DomainSpec::new(common::IRRATIONAL, 0.05).unwrap()] {
        let sys = GalerkinSystem::assemble(&d, 4, &FieldExpansion::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u0 = random_state(&sys, &mut rng, 2.0);
        let sched = ControlSchedule::zeros(&sys, 0.5, 1).unwrap();
        let traj = sys.integrate(&u0, &sched, 0.1 / sys.lambda_max()).unwrap();
        let e0 = sys.energy(&u0);
        let energies: Vec<f64> = traj.states.iter().map(|u| sys.energy(u)).collect();
        for w in energies.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
        assert!(energies.iter().all(|&e| e <= e0 * (1.0 + 1e-12)));
    }
}

#[test]
fn energy_rate_is_pure_dissipation() {
    let sys = GalerkinSystem::assemble(&unit(0.1), 4, &FieldExpansion::new()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u0 = random_state(&sys, &mut rng, 1.0);
    let dissipation = |u: &[f64]| -> f64 {
        -2.0 * u.iter().zip(sys.norm_sq()).zip(sys.lambdas()).map(|((x, n), l)| l * n * x * x).sum::<f64>()
    };
    // one-sided second-order difference of E at t = 0, Richardson-extrapolated
    let tau = 2e-4;
    let rate = |h: f64| {
        let fwd = sys.final_state(&u0, &ControlSchedule::zeros(&sys, h, 1).unwrap(), h / 8.0).unwrap();
        let fwd2 = sys.final_state(&u0, &ControlSchedule::zeros(&sys, 2.0 * h, 1).unwrap(), h / 8.0).unwrap();
        (-3.0 * sys.energy(&u0) + 4.0 * sys.energy(&fwd) - sys.energy(&fwd2)) / (2.0 * h)
    };
    let r1 = rate(tau);
    let r2 = rate(tau / 2.0);
    let extrapolated = (4.0 * r2 - r1) / 3.0;
    let exact = dissipation(&u0);
    assert!((extrapolated - exact).abs() <= 1e-6 * exact.abs(), "{extrapolated} vs {exact}");
}

#[test]
fn nonlinearity_is_energy_neutral_on_100_states() {
    for d in [unit(0.1), DomainSpec::new([7.0 / 5.0, 11.0 / 3.0, 2.0], 0.1).unwrap()] {
        let sys = GalerkinSystem::assemble(&d, 4, &FieldExpansion::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..100 {
            let size = rng.gen_range(0.1..10.0);
            let u = random_state(&sys, &mut rng, size);
            let b = sys.nonlinear(&u);
            let norm = sys.energy(&u).sqrt();
            assert!(sys.inner(&b, &u).abs() <= 1e-10 * norm.powi(3));
        }
    }
}

#[test]
fn body_force_matches_an_equal_and_opposite_control() {
    let idx = ModeIndex::new(1, Frequency::new(1, 1, 1));
    let d = unit(0.1);
    let mut h = FieldExpansion::new();
    let mode = EigenMode::new(idx, &d).unwrap();
    // 0.05 Y^{1,(1,1,1)} with Y of unit L2 norm
    h.add(idx, 0.05 / mode.norm_sq.sqrt());
    let forced = GalerkinSystem::assemble(&d, 4, &h).unwrap();
    let free = GalerkinSystem::assemble(&d, 4, &FieldExpansion::new()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u0 = random_state(&free, &mut rng, 0.3);
    let dt = 0.1 / free.lambda_max();
    let a = forced.final_state(&u0, &ControlSchedule::zeros(&forced, 1.0, 1).unwrap(), dt).unwrap();
    let minus = FieldExpansion::single(idx, -h.get(&idx));
    let b = free.final_state(&u0, &ControlSchedule::constant(&free, 1.0, &minus).unwrap(), dt).unwrap();
    assert_eq!(a, b);

    // long run settles on a steady state close to the linear response
    let c = forced.basis().position(&idx).unwrap();
    let steady =
        forced.final_state(&vec![0.0; forced.dim()], &ControlSchedule::zeros(&forced, 15.0, 1).unwrap(), dt).unwrap();
    let residual = forced.rhs(&steady, &vec![0.0; forced.dim()]);
    assert!(forced.energy(&residual).sqrt() < 1e-8);
    let linear = -forced.h()[c] / forced.lambdas()[c];
    assert!((steady[c] - linear).abs() <= 1e-2 * linear.abs(), "{} vs {linear}", steady[c]);
    assert!(steady.iter().enumerate().any(|(i, v)| i != c && *v != 0.0));
}

#[test]
fn tensor_entries_match_quadrature() {
    let d = DomainSpec::new([1.0, 2.0, 3.0], 0.1).unwrap();
    let sys = GalerkinSystem::assemble(&d, 4, &FieldExpansion::new()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..6 {
        let (a, b) = (rng.gen_range(0..sys.dim()), rng.gen_range(0..sys.dim()));
        let (ma, mb) = (sys.basis().mode(a), sys.basis().mode(b));
        let oracle = oracle_product(ma, mb, &d, 8);
        let scale = oracle.max_abs().max(1.0);
        for (c, m) in sys.basis().modes().iter().enumerate() {
            let t = sys.tensor_entry(c, a, b);
            let o = oracle.get(&m.index());
            assert!((t - o).abs() <= 1e-10 * scale, "T({},{},{}) = {t} vs {o}", m.index(), ma.index(), mb.index());
        }
    }
}

#[test]
fn schedules_never_touch_non_control_modes() {
    let d = unit(0.1);
    let controls = ModeSet::new(0, cq(3).into_iter().filter(|m| m.k.num_zero() == 1));
    let sys = GalerkinSystem::assemble_with_controls(&d, 3, &FieldExpansion::new(), &controls).unwrap();
    let target_idx = ModeIndex::new(2, Frequency::new(1, 2, 3));
    let mut target = vec![0.0; sys.dim()];
    target[sys.basis().position(&target_idx).unwrap()] = 0.01;
    let opts = SteerOptions { n_segments: 3, max_iters: 15, dt: 2e-3, seed: 5, ..Default::default() };
    let r = steer(&sys, &vec![0.0; sys.dim()], &target, 0.5, &opts).unwrap();
    let allowed: Vec<bool> = sys.basis().modes().iter().map(|m| controls.contains(&m.index())).collect();
    for s in 0..r.schedule.segments.len() {
        let eta = r.schedule.full_values(&sys, s);
        for (i, v) in eta.iter().enumerate() {
            if !allowed[i] {
                assert_eq!(v.to_bits(), 0.0f64.to_bits(), "{}", sys.basis().mode(i).index());
            }
        }
    }
    for seg in r.schedule.to_file(&sys).segments {
        assert!(seg.coeffs.iter().all(|e| controls.contains(&e.index())));
    }
}

#[test]
fn unit_modes_have_the_expected_v_norm() {
    let d = DomainSpec::new([1.0, 2.0, 3.0], 0.2).unwrap();
    let sys = GalerkinSystem::assemble(&d, 3, &FieldExpansion::new()).unwrap();
    assert_eq!(sys.v_norm(&vec![0.0; sys.dim()]), 0.0);
    for (c, m) in sys.basis().modes().iter().enumerate() {
        let mut u = vec![0.0; sys.dim()];
        u[c] = 1.0 / m.norm_sq.sqrt();
        let kl = m.k.scaled(&d);
        let expect = std::f64::consts::PI * (kl[0] * kl[0] + kl[1] * kl[1] + kl[2] * kl[2]).sqrt();
        assert!((sys.v_norm(&u) - expect).abs() <= 1e-12 * expect);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn v_norm_is_a_norm(seed in any::<u64>(), s in -5.0f64..5.0) {
        let sys = GalerkinSystem::assemble(&unit(0.3), 3, &FieldExpansion::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(&sys, &mut rng, 1.0);
        let v = random_state(&sys, &mut rng, 1.0);
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        prop_assert!(sys.v_norm(&sum) <= (sys.v_norm(&u) + sys.v_norm(&v)) * (1.0 + 1e-14));
        let scaled: Vec<f64> = u.iter().map(|a| s * a).collect();
        prop_assert!((sys.v_norm(&scaled) - s.abs() * sys.v_norm(&u)).abs() <= 1e-12 * sys.v_norm(&u));
    }
}
