mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use satspec::interaction::{project_term, quadrature_oracle};
use satspec::{bilinear_sym, self_advection, Basis, DomainSpec, EigenMode, FieldExpansion, Frequency, ModeIndex};

use common::{advection_sym_pointwise, boxes, oracle_product};

fn domain() -> impl Strategy<Value = DomainSpec> {
    (0.5f64..3.0, 0.5f64..3.0, 0.5f64..3.0).prop_map(|(a, b, c)| DomainSpec::new([a, b, c], 0.1).unwrap())
}

fn mode(max: u32) -> impl Strategy<Value = ModeIndex> {
    ([0..=max, 0..=max, 0..=max], 1u8..=2)
        .prop_filter("at most one zero", |(k, _)| k.iter().filter(|&&x| x == 0).count() <= 1)
        .prop_map(|(k, j)| {
            let k = Frequency(k);
            ModeIndex::new(j.min(k.branch_count()), k)
        })
}

fn point(d: &DomainSpec, t: [f64; 3]) -> [f64; 3] {
    let l = d.lengths();
    [t[0] * l[0], t[1] * l[1], t[2] * l[2]]
}

/// Central difference of component `i` along axis `j`.
fn fd(m: &EigenMode, d: &DomainSpec, x: [f64; 3], i: usize, j: usize) -> f64 {
    let h = 1e-5;
    let (mut p, mut q) = (x, x);
    p[j] += h;
    q[j] -= h;
    (m.evaluate(d, p)[i] - m.evaluate(d, q)[i]) / (2.0 * h)
}

fn curl_fd(m: &EigenMode, d: &DomainSpec, x: [f64; 3]) -> [f64; 3] {
    [
        fd(m, d, x, 2, 1) - fd(m, d, x, 1, 2),
        fd(m, d, x, 0, 2) - fd(m, d, x, 2, 0),
        fd(m, d, x, 1, 0) - fd(m, d, x, 0, 1),
    ]
}

fn max_diff(a: &FieldExpansion, b: &FieldExpansion) -> f64 {
    a.iter().chain(b.iter()).map(|(i, _)| (a.get(i) - b.get(i)).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modes_are_divergence_free(d in domain(), idx in mode(5), t in prop::array::uniform3(0.05f64..0.95)) {
        let m = EigenMode::new(idx, &d).unwrap();
        let x = point(&d, t);
        let div: f64 = (0..3).map(|a| fd(&m, &d, x, a, a)).sum();
        let scale = idx.k.scaled(&d).iter().map(|v| v.abs()).sum::<f64>() * m.w.iter().map(|v| v.abs()).sum::<f64>();
        prop_assert!(div.abs() <= 1e-6 * scale, "div {div}");
        let jac = m.jacobian(&d, x);
        prop_assert!((jac[0][0] + jac[1][1] + jac[2][2]).abs() <= 1e-12 * scale);
    }

    #[test]
    fn lions_conditions_on_every_face(d in domain(), idx in mode(5), t in prop::array::uniform3(0.05f64..0.95), face in 0usize..3, top in any::<bool>()) {
        let m = EigenMode::new(idx, &d).unwrap();
        let mut x = point(&d, t);
        x[face] = if top { d.length(face) } else { 0.0 };
        let u = m.evaluate(&d, x);
        let scale = m.w.iter().map(|v| v.abs()).sum::<f64>();
        prop_assert!(u[face].abs() <= 1e-12 * scale, "normal component {}", u[face]);
        // (curl u) x n = 0: the tangential components of the vorticity vanish
        let w = curl_fd(&m, &d, x);
        let kscale = idx.k.scaled(&d).iter().map(|v| v.abs()).sum::<f64>() * scale;
        for (a, wa) in w.iter().enumerate() {
            if a != face {
                prop_assert!(wa.abs() <= 1e-6 * kscale, "tangential vorticity {wa} on axis {a}");
            }
        }
    }

    #[test]
    fn modes_are_eigenfunctions(d in domain(), idx in mode(4), t in prop::array::uniform3(0.05f64..0.95)) {
        let m = EigenMode::new(idx, &d).unwrap();
        let x = point(&d, t);
        let h = 1e-3;
        let u = m.evaluate(&d, x);
        let mut lap = [0.0; 3];
        for a in 0..3 {
            let (mut p, mut q) = (x, x);
            p[a] += h;
            q[a] -= h;
            let (up, uq) = (m.evaluate(&d, p), m.evaluate(&d, q));
            for i in 0..3 {
                lap[i] += (up[i] - 2.0 * u[i] + uq[i]) / (h * h);
            }
        }
        let lambda = satspec::eigenvalue(idx.k, &d).unwrap() / d.nu();
        let scale = lambda * m.w.iter().map(|v| v.abs()).sum::<f64>();
        for i in 0..3 {
            prop_assert!((-lap[i] - lambda * u[i]).abs() <= 1e-4 * scale);
        }
    }

    #[test]
    fn modes_are_orthogonal(d in domain(), idx in mode(3)) {
        let basis = Basis::up_to(3, &d);
        let m = EigenMode::new(idx, &d).unwrap();
        let r = quadrature_oracle(|x| m.evaluate(&d, x), basis.modes(), &d, 8);
        for other in basis.modes() {
            let expect = if other.index() == idx { 1.0 } else { 0.0 };
            prop_assert!((r.coefficients.get(&other.index()) - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn bilinear_is_symmetric(d in domain(), a in mode(4), b in mode(4)) {
        let (ma, mb) = (EigenMode::new(a, &d).unwrap(), EigenMode::new(b, &d).unwrap());
        let ab = bilinear_sym(&ma, &mb, &d);
        let ba = bilinear_sym(&mb, &ma, &d);
        prop_assert!(max_diff(&ab, &ba) <= 1e-12 * ab.max_abs().max(1.0));
    }

    #[test]
    fn bilinear_is_bilinear(d in domain(), a in mode(4), b in mode(4), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let (ma, mb) = (EigenMode::new(a, &d).unwrap(), EigenMode::new(b, &d).unwrap());
        let mut base = FieldExpansion::new();
        for (i, v) in bilinear_sym(&ma, &mb, &d).iter() {
            base.add(*i, s * t * v);
        }
        let scaled = bilinear_sym(&ma.scaled(s), &mb.scaled(t), &d);
        prop_assert!(max_diff(&base, &scaled) <= 1e-12 * base.max_abs().max(1.0));
    }

    #[test]
    fn pointwise_sum_matches_interaction_term(d in domain(), a in mode(3), b in mode(3), t in prop::array::uniform3(0.0f64..1.0)) {
        let (ma, mb) = (EigenMode::new(a, &d).unwrap(), EigenMode::new(b, &d).unwrap());
        let x = point(&d, t);
        let direct = advection_sym_pointwise(&ma, &mb, &d, x);
        let term = satspec::advection_sym(&ma, &mb, &d).evaluate(&d, x);
        let scale = direct.iter().chain(&term).map(|v| v.abs()).fold(1.0, f64::max);
        for i in 0..3 {
            prop_assert!((direct[i] - term[i]).abs() <= 1e-12 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bilinear_matches_quadrature(d in domain(), a in mode(3), b in mode(3)) {
        let (ma, mb) = (EigenMode::new(a, &d).unwrap(), EigenMode::new(b, &d).unwrap());
        let exact = bilinear_sym(&ma, &mb, &d);
        let oracle = oracle_product(&ma, &mb, &d, 6);
        prop_assert!(max_diff(&exact, &oracle) <= 1e-9 * exact.max_abs().max(oracle.max_abs()).max(1e-300));
    }
}

#[test]
fn self_interaction_vanishes_exactly_for_planar_modes() {
    for d in boxes() {
        for idx in satspec::enumerate_modes(5) {
            let m = EigenMode::new(idx, &d).unwrap();
            let p = project_term(&self_advection(&m, &d), &d).unwrap();
            let scale = m.norm_sq * idx.k.scaled(&d).iter().map(|v| v * v).sum::<f64>().sqrt();
            let size = p.l2_norm(&d);
            if idx.k.num_zero() == 1 {
                assert!(size <= 1e-12 * scale, "{idx}: {size}");
            } else {
                assert!(size >= 1e-6 * scale, "{idx}: {size}");
            }
        }
    }
}

#[test]
fn planar_self_interaction_is_a_gradient_by_quadrature() {
    let d = DomainSpec::new(common::IRRATIONAL, 0.1).unwrap();
    for k in [[0, 1, 2], [3, 0, 1], [2, 2, 0]] {
        let m = EigenMode::new(ModeIndex::new(1, Frequency(k)), &d).unwrap();
        let c = oracle_product(&m, &m, &d, 6);
        assert!(c.max_abs() < 1e-10, "{:?}: {}", k, c.max_abs());
    }
}

#[test]
fn worked_oracle_pair() {
    let d = DomainSpec::new([1.0, 2.0, 3.0], 0.1).unwrap();
    let a = EigenMode::new(ModeIndex::new(1, Frequency::new(1, 1, 1)), &d).unwrap();
    let b = EigenMode::new(ModeIndex::new(2, Frequency::new(1, 2, 1)), &d).unwrap();
    let exact = bilinear_sym(&a, &b, &d);
    let oracle = oracle_product(&a, &b, &d, 4);
    assert!(!exact.is_empty());
    for (idx, v) in exact.iter() {
        assert_relative_eq!(*v, oracle.get(idx), epsilon = 1e-10 * exact.max_abs());
    }
}
