#![allow(dead_code)]

use satspec::interaction::quadrature::quadrature_oracle;
use satspec::{DomainSpec, EigenMode, FieldExpansion, GalerkinSystem};

pub const IRRATIONAL: [f64; 3] = [1.0, std::f64::consts::SQRT_2, std::f64::consts::E];

pub fn boxes() -> Vec<DomainSpec> {
    [[1.0, 1.0, 1.0], [1.0, 2.0, 3.0], [7.0 / 5.0, 11.0 / 3.0, 2.0], IRRATIONAL]
        .into_iter()
        .map(|l| DomainSpec::new(l, 0.1).unwrap())
        .collect()
}

/// `(a . grad) b + (b . grad) a` evaluated pointwise from mode values and
/// Jacobians, with no reference to the interaction formulas.
pub fn advection_sym_pointwise(a: &EigenMode, b: &EigenMode, d: &DomainSpec, x: [f64; 3]) -> [f64; 3] {
    let (va, vb) = (a.evaluate(d, x), b.evaluate(d, x));
    let (ja, jb) = (a.jacobian(d, x), b.jacobian(d, x));
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += va[j] * jb[i][j] + vb[j] * ja[i][j];
        }
    }
    out
}

/// Quadrature projection of `(a . grad) b + (b . grad) a` on every mode up to
/// `cutoff`, on a grid fine enough to be exact.
pub fn oracle_product(a: &EigenMode, b: &EigenMode, d: &DomainSpec, cutoff: u32) -> FieldExpansion {
    let basis = satspec::Basis::up_to(cutoff, d);
    let grid = 2 * cutoff as usize + 2;
    let r = quadrature_oracle(|x| advection_sym_pointwise(a, b, d, x), basis.modes(), d, grid);
    assert!(!r.aliasing_risk);
    r.coefficients
}

/// Coefficients drawn uniformly in unit-L2 coordinates of size `scale`.
pub fn random_state<R: rand::Rng>(sys: &GalerkinSystem, rng: &mut R, scale: f64) -> Vec<f64> {
    sys.norm_sq().iter().map(|n| scale * rng.gen_range(-1.0..1.0) / n.sqrt()).collect()
}
