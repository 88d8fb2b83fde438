//! Tensor-product midpoint quadrature of `<F, Y^{j,k}> / |Y^{j,k}|^2`.
//!
//! This path never touches the interaction formulas: it samples an arbitrary
//! vector field on a grid and contracts it against sines and cosines one axis
//! at a time. The midpoint rule on `n` cells integrates `cos(p pi x / L)`
//! exactly for every `0 < p < 2n`, so products of trig polynomials are exact
//! as long as the combined frequency stays below `2n`.

use std::f64::consts::PI;

use crate::interaction::FieldExpansion;
use crate::spectral_basis::{DomainSpec, EigenMode};

#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub coefficients: FieldExpansion,
    /// The grid is coarser than `2 * max_frequency + 2` per axis.
    pub aliasing_risk: bool,
}

/// Projects `field` onto each of `modes` by quadrature on a
/// `grid_per_axis^3` midpoint grid.
pub fn quadrature_oracle<F>(
    field: F,
    modes: &[EigenMode],
    domain: &DomainSpec,
    grid_per_axis: usize,
) -> QuadratureResult
where
    F: Fn([f64; 3]) -> [f64; 3],
{
    let n = grid_per_axis.max(1);
    let kmax = modes.iter().map(|m| m.k.max_component()).max().unwrap_or(0) as usize;
    let aliasing_risk = n < 2 * kmax + 2;
    let l = domain.lengths();

    let nodes: Vec<Vec<f64>> = (0..3).map(|a| (0..n).map(|i| (i as f64 + 0.5) * l[a] / n as f64).collect()).collect();

    // samples[c][(i1 * n + i2) * n + i3]
    let mut samples = vec![vec![0.0; n * n * n]; 3];
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let v = field([nodes[0][i1], nodes[1][i2], nodes[2][i3]]);
                let at = (i1 * n + i2) * n + i3;
                for c in 0..3 {
                    samples[c][at] = v[c];
                }
            }
        }
    }

    // tables[axis][is_sin][p * n + i]
    let kcount = kmax + 1;
    let tables: Vec<[Vec<f64>; 2]> = (0..3)
        .map(|a| {
            let mut cos = vec![0.0; kcount * n];
            let mut sin = vec![0.0; kcount * n];
            for p in 0..kcount {
                for i in 0..n {
                    let t = p as f64 * PI * nodes[a][i] / l[a];
                    cos[p * n + i] = t.cos();
                    sin[p * n + i] = t.sin();
                }
            }
            [cos, sin]
        })
        .collect();

    let cell = domain.volume() / (n * n * n) as f64;
    // moments[c][(p1 * K + p2) * K + p3] = int F_c psi_c^p
    let moments: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            let t0 = &tables[0][usize::from(c == 0)];
            let t1 = &tables[1][usize::from(c == 1)];
            let t2 = &tables[2][usize::from(c == 2)];
            let f = &samples[c];
            // contract axis 3
            let mut s3 = vec![0.0; n * n * kcount];
            for i12 in 0..n * n {
                for p3 in 0..kcount {
                    let mut acc = 0.0;
                    for i3 in 0..n {
                        acc += f[i12 * n + i3] * t2[p3 * n + i3];
                    }
                    s3[i12 * kcount + p3] = acc;
                }
            }
            // contract axis 2
            let mut s2 = vec![0.0; n * kcount * kcount];
            for i1 in 0..n {
                for p2 in 0..kcount {
                    for p3 in 0..kcount {
                        let mut acc = 0.0;
                        for i2 in 0..n {
                            acc += s3[(i1 * n + i2) * kcount + p3] * t1[p2 * n + i2];
                        }
                        s2[(i1 * kcount + p2) * kcount + p3] = acc;
                    }
                }
            }
            // contract axis 1
            let mut s1 = vec![0.0; kcount * kcount * kcount];
            for p1 in 0..kcount {
                for p23 in 0..kcount * kcount {
                    let mut acc = 0.0;
                    for i1 in 0..n {
                        acc += s2[i1 * kcount * kcount + p23] * t0[p1 * n + i1];
                    }
                    s1[p1 * kcount * kcount + p23] = acc * cell;
                }
            }
            s1
        })
        .collect();

    let mut coefficients = FieldExpansion::new();
    for m in modes {
        let at = (m.k.get(0) as usize * kcount + m.k.get(1) as usize) * kcount + m.k.get(2) as usize;
        let inner: f64 = (0..3).map(|c| m.w[c] * moments[c][at]).sum();
        coefficients.add(m.index(), inner / m.norm_sq);
    }
    QuadratureResult { coefficients, aliasing_risk }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_basis::{Basis, Frequency, ModeIndex};

    #[test]
    fn reproduces_a_mode() {
        let d = DomainSpec::new([1.0, 1.5, 0.75], 1.0).unwrap();
        let basis = Basis::up_to(3, &d);
        let target = EigenMode::new(ModeIndex::new(1, Frequency::new(1, 1, 1)), &d).unwrap();
        let r = quadrature_oracle(|x| target.evaluate(&d, x), basis.modes(), &d, 12);
        assert!(!r.aliasing_risk);
        for m in basis.modes() {
            let c = r.coefficients.get(&m.index());
            let expect = if m.index() == target.index() { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-10, "{} -> {c}", m.index());
        }
    }

    #[test]
    fn gradients_are_invisible() {
        let d = DomainSpec::new([1.0, 2.0, 3.0], 1.0).unwrap();
        let basis = Basis::up_to(3, &d);
        let l = d.lengths();
        // g = cos(2 pi x1/L1) cos(pi x2/L2) cos(5 pi x3/L3) - 0.3 cos(3 pi x1/L1) cos(pi x3/L3)
        let grad = |x: [f64; 3]| {
            let t = [PI * x[0] / l[0], PI * x[1] / l[1], PI * x[2] / l[2]];
            let a = [
                -2.0 * PI / l[0] * (2.0 * t[0]).sin() * t[1].cos() * (5.0 * t[2]).cos(),
                -PI / l[1] * (2.0 * t[0]).cos() * t[1].sin() * (5.0 * t[2]).cos(),
                -5.0 * PI / l[2] * (2.0 * t[0]).cos() * t[1].cos() * (5.0 * t[2]).sin(),
            ];
            let b = [
                0.9 * PI / l[0] * (3.0 * t[0]).sin() * t[2].cos(),
                0.0,
                0.3 * PI / l[2] * (3.0 * t[0]).cos() * t[2].sin(),
            ];
            [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
        };
        let r = quadrature_oracle(grad, basis.modes(), &d, 48);
        assert!(r.coefficients.max_abs() < 1e-8, "{}", r.coefficients.max_abs());
    }

    #[test]
    fn flags_coarse_grids() {
        let d = DomainSpec::unit();
        let basis = Basis::up_to(4, &d);
        assert!(quadrature_oracle(|_| [0.0; 3], basis.modes(), &d, 8).aliasing_risk);
        assert!(!quadrature_oracle(|_| [0.0; 3], basis.modes(), &d, 10).aliasing_risk);
    }
}
