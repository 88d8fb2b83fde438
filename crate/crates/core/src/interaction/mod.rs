//! Triad interactions between eigenmodes.
//!
//! The symmetrized advection `(Y^k . grad) Y^m + (Y^m . grad) Y^k` of two
//! eigenfunctions is a finite sum of fields `Y_z^n` whose frequencies are the
//! sign foldings `(|k1 +- m1|, |k2 +- m2|, |k3 +- m3|)`. For a sign triple `s`
//! the amplitude of component `i` at the signed frequency `k + s.m` is
//!
//! ```text
//! s_i w_i^m beta^s(w^k, m) + w_i^k beta^s(w^m, k)
//! ```
//!
//! and a negative entry on axis `i` flips the sign of the sine factor. The
//! Leray projection of each `Y_z^n` is read off by writing `z` in the basis
//! `{w^{1,n}, w^{2,n}, n^L}`, the last direction being a pure gradient.

pub mod quadrature;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_basis::{perp_basis, DomainSpec, EigenMode, Frequency, ModeIndex, TrigVectorField};

pub use quadrature::{quadrature_oracle, QuadratureResult};

/// A choice of signs `(s1, s2, s3)` in `{+1, -1}^3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignTriple(pub [i8; 3]);

impl SignTriple {
    /// The eight triples, `+++` first, in binary order with `+` before `-`.
    pub fn all() -> [SignTriple; 8] {
        let mut out = [SignTriple([1; 3]); 8];
        for (bits, slot) in out.iter_mut().enumerate() {
            for axis in 0..3 {
                if bits & (4 >> axis) != 0 {
                    slot.0[axis] = -1;
                }
            }
        }
        out
    }

    pub fn get(&self, axis: usize) -> f64 {
        f64::from(self.0[axis])
    }
}

/// `(pi/8)(s1 w1 m1/L1 + s2 w2 m2/L2 + s3 w3 m3/L3)`.
pub fn beta(w: &[f64; 3], m: Frequency, signs: SignTriple, domain: &DomainSpec) -> f64 {
    let ml = m.scaled(domain);
    PI / 8.0 * (signs.get(0) * w[0] * ml[0] + signs.get(1) * w[1] * ml[1] + signs.get(2) * w[2] * ml[2])
}

/// Symmetrized advection expanded as `sum_n Y^n_{z^n}` before projection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionTerm {
    pub terms: BTreeMap<Frequency, [f64; 3]>,
}

impl InteractionTerm {
    fn accumulate(&mut self, n: Frequency, axis: usize, value: f64) {
        self.terms.entry(n).or_insert([0.0; 3])[axis] += value;
    }

    pub fn fields(&self) -> impl Iterator<Item = TrigVectorField> + '_ {
        self.terms.iter().map(|(n, z)| TrigVectorField::new(*n, *z))
    }

    /// Frequencies carrying an amplitude larger than `tol` in some active
    /// component (components on a zero axis multiply a vanishing sine).
    pub fn support(&self, tol: f64) -> Vec<Frequency> {
        self.terms.iter().filter(|(n, z)| (0..3).any(|i| n.get(i) != 0 && z[i].abs() > tol)).map(|(n, _)| *n).collect()
    }

    pub fn evaluate(&self, domain: &DomainSpec, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for f in self.fields() {
            let v = f.evaluate(domain, x);
            for i in 0..3 {
                out[i] += v[i];
            }
        }
        out
    }

    pub fn scale(&mut self, c: f64) {
        for z in self.terms.values_mut() {
            for v in z.iter_mut() {
                *v *= c;
            }
        }
    }
}

/// Finite combination `sum alpha^{j,n} Y^{j,n}` of canonical eigenmodes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldExpansion {
    pub coeffs: BTreeMap<ModeIndex, f64>,
}

impl FieldExpansion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(idx: ModeIndex, value: f64) -> Self {
        let mut e = Self::new();
        e.add(idx, value);
        e
    }

    /// Adds `value` to the coefficient of `idx`, dropping it if the sum is zero.
    pub fn add(&mut self, idx: ModeIndex, value: f64) {
        if value == 0.0 {
            return;
        }
        let entry = self.coeffs.entry(idx).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.coeffs.remove(&idx);
        }
    }

    pub fn merge(&mut self, other: &FieldExpansion) {
        for (idx, v) in &other.coeffs {
            self.add(*idx, *v);
        }
    }

    pub fn get(&self, idx: &ModeIndex) -> f64 {
        self.coeffs.get(idx).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeIndex, &f64)> {
        self.coeffs.iter()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// L2 norm of the represented field with canonical modes.
    pub fn l2_norm(&self, domain: &DomainSpec) -> f64 {
        self.coeffs
            .iter()
            .map(|(idx, v)| {
                let m = EigenMode::new(*idx, domain).expect("expansion holds admissible modes");
                v * v * m.norm_sq
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Re-expresses the expansion as trig vector fields, one per frequency.
    pub fn to_fields(&self, domain: &DomainSpec) -> Vec<TrigVectorField> {
        let mut by_freq: BTreeMap<Frequency, [f64; 3]> = BTreeMap::new();
        for (idx, v) in &self.coeffs {
            let m = EigenMode::new(*idx, domain).expect("expansion holds admissible modes");
            let z = by_freq.entry(idx.k).or_insert([0.0; 3]);
            for i in 0..3 {
                z[i] += v * m.w[i];
            }
        }
        by_freq.into_iter().map(|(n, z)| TrigVectorField::new(n, z)).collect()
    }

    pub fn evaluate(&self, domain: &DomainSpec, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (idx, c) in &self.coeffs {
            let v = EigenMode::new(*idx, domain).expect("admissible").evaluate(domain, x);
            for i in 0..3 {
                out[i] += c * v[i];
            }
        }
        out
    }
}

fn mode_order(a: &EigenMode, b: &EigenMode) -> Ordering {
    a.index().cmp(&b.index()).then_with(|| {
        a.w.iter()
            .zip(b.w.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    })
}

/// `(Y^a . grad) Y^b + (Y^b . grad) Y^a` as a sum of trig vector fields,
/// with contributions to the same folded frequency summed.
pub fn advection_sym(a: &EigenMode, b: &EigenMode, domain: &DomainSpec) -> InteractionTerm {
    // a fixed argument order keeps the floating point path symmetric
    let (p, r) = if mode_order(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
    advection_pair(p.k, &p.w, r.k, &r.w, domain)
}

/// Same expansion for raw amplitude vectors; no admissibility is required.
pub fn advection_pair(
    k: Frequency,
    wk: &[f64; 3],
    m: Frequency,
    wm: &[f64; 3],
    domain: &DomainSpec,
) -> InteractionTerm {
    let mut out = InteractionTerm::default();
    for s in SignTriple::all() {
        let beta_km = beta(wk, m, s, domain);
        let beta_mk = beta(wm, k, s, domain);
        let mut signed = [0i64; 3];
        for axis in 0..3 {
            signed[axis] = i64::from(k.get(axis)) + i64::from(s.0[axis]) * i64::from(m.get(axis));
        }
        let n = Frequency::new(
            signed[0].unsigned_abs() as u32,
            signed[1].unsigned_abs() as u32,
            signed[2].unsigned_abs() as u32,
        );
        for i in 0..3 {
            // sin(0) kills the component
            let fold = match signed[i].cmp(&0) {
                Ordering::Greater => 1.0,
                Ordering::Less => -1.0,
                Ordering::Equal => 0.0,
            };
            let amp = s.get(i) * wm[i] * beta_km + wk[i] * beta_mk;
            out.accumulate(n, i, fold * amp);
        }
    }
    out
}

/// `(Y^k . grad) Y^k` from its closed form: for component `i`, with
/// `c_l = w_l k_l / L_l`,
/// `-(pi/2) w_i sin(2 k_i pi x_i / L_i) (c_r cos^2(k_l pi x_l/L_l) + c_l cos^2(k_r pi x_r/L_r))`
/// where `{l, r}` are the other two axes.
pub fn self_advection(a: &EigenMode, domain: &DomainSpec) -> InteractionTerm {
    let k = a.k;
    let c = {
        let kl = k.scaled(domain);
        [a.w[0] * kl[0], a.w[1] * kl[1], a.w[2] * kl[2]]
    };
    let mut out = InteractionTerm::default();
    for i in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&x| x != i).collect();
        let (l, r) = (others[0], others[1]);
        let mut base = [0u32; 3];
        base[i] = 2 * k.get(i);
        let fold = if base[i] == 0 { 0.0 } else { 1.0 };
        // cos^2(t) = (1 + cos 2t)/2
        let amp = -PI / 4.0 * a.w[i] * fold;
        out.accumulate(Frequency(base), i, amp * (c[l] + c[r]));
        let mut with_l = base;
        with_l[l] = 2 * k.get(l);
        out.accumulate(Frequency(with_l), i, amp * c[r]);
        let mut with_r = base;
        with_r[r] = 2 * k.get(r);
        out.accumulate(Frequency(with_r), i, amp * c[l]);
    }
    out
}

fn det3(c0: &[f64; 3], c1: &[f64; 3], c2: &[f64; 3]) -> f64 {
    c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
        + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
}

/// Leray projection of `Y_z^n` onto the canonical eigenmodes of frequency `n`.
///
/// Solves `z = alpha^1 w^{1,n} + alpha^2 w^{2,n} + alpha_0 n^L`; the
/// `n^L` direction is the gradient of `cos cos cos` and is discarded. With one
/// zero axis the inactive component of `z` multiplies a vanishing sine and is
/// ignored, leaving a 2x2 system on the active axes.
pub fn project(t: &TrigVectorField, domain: &DomainSpec) -> Result<FieldExpansion> {
    let n = t.n;
    let mut out = FieldExpansion::new();
    match n.num_zero() {
        0 => {
            let basis = perp_basis(n, domain)?;
            let nl = n.scaled(domain);
            let det = det3(&basis[0], &basis[1], &nl);
            let scale = norm(&basis[0]) * norm(&basis[1]) * norm(&nl);
            if det.abs() <= 1e-12 * scale {
                return Err(Error::SingularBasis(n));
            }
            let a1 = det3(&t.z, &basis[1], &nl) / det;
            let a2 = det3(&basis[0], &t.z, &nl) / det;
            out.add(ModeIndex::new(1, n), a1);
            out.add(ModeIndex::new(2, n), a2);
        }
        1 => {
            let zero = n.zero_axis().expect("one zero axis");
            let (p, r) = match zero {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let w = perp_basis(n, domain)?[0];
            let nl = n.scaled(domain);
            let det = w[p] * nl[r] - w[r] * nl[p];
            let scale = (w[p].hypot(w[r])) * (nl[p].hypot(nl[r]));
            if det.abs() <= 1e-12 * scale {
                return Err(Error::SingularBasis(n));
            }
            let a1 = (t.z[p] * nl[r] - t.z[r] * nl[p]) / det;
            out.add(ModeIndex::new(1, n), a1);
        }
        // zero field or a pure gradient
        _ => {}
    }
    Ok(out)
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Projects every field of an interaction term and sums the result.
pub fn project_term(term: &InteractionTerm, domain: &DomainSpec) -> Result<FieldExpansion> {
    let mut out = FieldExpansion::new();
    for f in term.fields() {
        out.merge(&project(&f, domain)?);
    }
    Ok(out)
}

/// `Pi((Y^a . grad) Y^b + (Y^b . grad) Y^a) = B(a,b) + B(b,a)` in eigenmode
/// coordinates.
pub fn bilinear_sym(a: &EigenMode, b: &EigenMode, domain: &DomainSpec) -> FieldExpansion {
    project_term(&advection_sym(a, b, domain), domain).expect("canonical bases are nonsingular")
}
