//! Closed-form Stokes eigenfunctions of the box `(0,L1)x(0,L2)x(0,L3)` under
//! Lions (slip) boundary conditions.
//!
//! Every eigenfunction has the form
//!
//! ```text
//! Y(x) = ( w1 sin(k1 pi x1/L1) cos(k2 pi x2/L2) cos(k3 pi x3/L3),
//!          w2 cos(k1 pi x1/L1) sin(k2 pi x2/L2) cos(k3 pi x3/L3),
//!          w3 cos(k1 pi x1/L1) cos(k2 pi x2/L2) sin(k3 pi x3/L3) )
//! ```
//!
//! with `w` orthogonal to `k` in the `[L]` pairing `sum_i w_i k_i / L_i` and
//! `w_i = 0` whenever `k_i = 0`. A frequency with one vanishing component has a
//! single branch, a frequency with none has two.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Box lengths and kinematic viscosity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    lengths: [f64; 3],
    nu: f64,
}

impl DomainSpec {
    pub fn new(lengths: [f64; 3], nu: f64) -> Result<Self> {
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidDomain(format!("lengths must be positive, got {lengths:?}")));
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidDomain(format!("viscosity must be positive, got {nu}")));
        }
        Ok(Self { lengths, nu })
    }

    /// Unit cube with unit viscosity.
    pub fn unit() -> Self {
        Self { lengths: [1.0; 3], nu: 1.0 }
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        Self::new(self.lengths, nu)
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }
}

/// A frequency triple `k` in `N^3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(pub [u32; 3]);

impl Frequency {
    pub const fn new(k1: u32, k2: u32, k3: u32) -> Self {
        Self([k1, k2, k3])
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    /// Number of vanishing components.
    pub fn num_zero(&self) -> usize {
        self.0.iter().filter(|&&c| c == 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// Number of eigenfunction branches, `2 - #0(k)`, or 0 when the frequency
    /// carries no divergence-free field.
    pub fn branch_count(&self) -> u8 {
        match self.num_zero() {
            0 => 2,
            1 => 1,
            _ => 0,
        }
    }

    pub fn max_component(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `k^L = (k1/L1, k2/L2, k3/L3)`.
    pub fn scaled(&self, domain: &DomainSpec) -> [f64; 3] {
        let l = domain.lengths();
        [self.0[0] as f64 / l[0], self.0[1] as f64 / l[1], self.0[2] as f64 / l[2]]
    }

    /// Index of the vanishing component when exactly one vanishes.
    pub fn zero_axis(&self) -> Option<usize> {
        if self.num_zero() == 1 {
            self.0.iter().position(|&c| c == 0)
        } else {
            None
        }
    }

    /// Parity class `(k1 mod 2, k2 mod 2, k3 mod 2)` packed into three bits.
    pub fn parity(&self) -> usize {
        (self.0[0] as usize & 1) | ((self.0[1] as usize & 1) << 1) | ((self.0[2] as usize & 1) << 2)
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

impl From<[u32; 3]> for Frequency {
    fn from(k: [u32; 3]) -> Self {
        Self(k)
    }
}

/// Identifies the eigenfunction `Y^{j,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub k: Frequency,
    pub j: u8,
}

impl ModeIndex {
    pub fn new(j: u8, k: Frequency) -> Self {
        Self { k, j }
    }

    pub fn is_valid(&self) -> bool {
        self.j >= 1 && self.j <= self.k.branch_count()
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Y[{}]{}", self.j, self.k)
    }
}

/// The vector field `(z1 psi1^n, z2 psi2^n, z3 psi3^n)` for an arbitrary
/// amplitude `z`; it need not be divergence free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigVectorField {
    pub n: Frequency,
    pub z: [f64; 3],
}

/// One eigenfunction together with its amplitude vector and cached squared
/// L2 norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub k: Frequency,
    pub j: u8,
    pub w: [f64; 3],
    pub norm_sq: f64,
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(z, k)_[L] = z1 k1/L1 + z2 k2/L2 + z3 k3/L3`.
pub fn l_pairing(z: &[f64; 3], k: Frequency, domain: &DomainSpec) -> f64 {
    dot(z, &k.scaled(domain))
}

fn check_admissible(k: Frequency) -> Result<()> {
    let zeros = k.num_zero();
    if zeros >= 2 {
        return Err(Error::DegenerateFrequency(k, zeros));
    }
    Ok(())
}

/// Canonical amplitude basis of `{k}^perp_[L]` with zeros matching those of `k`.
///
/// One zero component `k_i = 0`: the single vector built from the two active
/// axes `p < r` as `w_p = -k_r L_p`, `w_r = k_p L_r`. No zero component:
/// `w1 = (-k2 L1, k1 L2, 0)` and `w2` the Euclidean Gram-Schmidt residual of
/// `(-k3 L1, 0, k1 L3)` against `w1`.
pub fn perp_basis(k: Frequency, domain: &DomainSpec) -> Result<Vec<[f64; 3]>> {
    check_admissible(k)?;
    let l = domain.lengths();
    let kf = [k.0[0] as f64, k.0[1] as f64, k.0[2] as f64];
    if let Some(zero) = k.zero_axis() {
        let (p, r) = match zero {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut w = [0.0; 3];
        w[p] = -kf[r] * l[p];
        w[r] = kf[p] * l[r];
        return Ok(vec![w]);
    }
    let w1 = [-kf[1] * l[0], kf[0] * l[1], 0.0];
    let v = [-kf[2] * l[0], 0.0, kf[0] * l[2]];
    let c = dot(&v, &w1) / dot(&w1, &w1);
    let w2 = [v[0] - c * w1[0], v[1] - c * w1[1], v[2] - c * w1[2]];
    Ok(vec![w1, w2])
}

/// Stokes eigenvalue `nu pi^2 |k^L|^2`.
pub fn eigenvalue(k: Frequency, domain: &DomainSpec) -> Result<f64> {
    if k.is_zero() {
        return Err(Error::Precondition("eigenvalue of the zero frequency".into()));
    }
    let s = k.scaled(domain);
    Ok(domain.nu() * PI * PI * dot(&s, &s))
}

/// All `n` with `0 <= n_i <= max_per_axis` and at most one zero component,
/// in lexicographic order.
pub fn enumerate_frequencies(max_per_axis: u32) -> Vec<Frequency> {
    let mut out = Vec::new();
    for a in 0..=max_per_axis {
        for b in 0..=max_per_axis {
            for c in 0..=max_per_axis {
                let k = Frequency::new(a, b, c);
                if k.num_zero() <= 1 {
                    out.push(k);
                }
            }
        }
    }
    out
}

/// All admissible mode indices with frequencies in `{0..=max_per_axis}^3`,
/// ordered by frequency then branch.
pub fn enumerate_modes(max_per_axis: u32) -> Vec<ModeIndex> {
    enumerate_frequencies(max_per_axis)
        .into_iter()
        .flat_map(|k| (1..=k.branch_count()).map(move |j| ModeIndex::new(j, k)))
        .collect()
}

/// `int_0^L f(k pi x / L)^2 dx` for `f = sin` or `cos`.
fn axis_integral(k: u32, length: f64, is_sin: bool) -> f64 {
    match (k, is_sin) {
        (0, true) => 0.0,
        (0, false) => length,
        _ => 0.5 * length,
    }
}

/// Squared L2 norm of the field `(z1 psi1^k, z2 psi2^k, z3 psi3^k)`.
pub fn field_norm_sq(k: Frequency, z: &[f64; 3], domain: &DomainSpec) -> f64 {
    let l = domain.lengths();
    (0..3)
        .map(|i| {
            let weight: f64 = (0..3).map(|a| axis_integral(k.0[a], l[a], a == i)).product();
            z[i] * z[i] * weight
        })
        .sum()
}

/// Squared L2 norm of an eigenfunction, in closed form.
pub fn l2_norm_sq(mode: &EigenMode, domain: &DomainSpec) -> f64 {
    field_norm_sq(mode.k, &mode.w, domain)
}

impl EigenMode {
    /// The canonical eigenfunction `Y^{j,k}`.
    pub fn new(index: ModeIndex, domain: &DomainSpec) -> Result<Self> {
        let basis = perp_basis(index.k, domain)?;
        let w =
            *basis.get(usize::from(index.j).wrapping_sub(1)).ok_or(Error::InvalidBranch { k: index.k, j: index.j })?;
        Ok(Self::from_parts(index.k, index.j, w, domain))
    }

    /// An eigenfunction with a caller-chosen amplitude. The amplitude must be
    /// `[L]`-orthogonal to `k`, vanish where `k` does, and be nonzero.
    pub fn with_amplitude(k: Frequency, j: u8, w: [f64; 3], domain: &DomainSpec) -> Result<Self> {
        check_admissible(k)?;
        let scale = w.iter().map(|c| c.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::Precondition("zero amplitude vector".into()));
        }
        for axis in 0..3 {
            if k.0[axis] == 0 && w[axis] != 0.0 {
                return Err(Error::Precondition(format!("amplitude {w:?} is nonzero on a zero axis of {k}")));
            }
        }
        let kl = k.scaled(domain);
        let pairing = l_pairing(&w, k, domain);
        let kscale = kl.iter().map(|c| c.abs()).fold(0.0, f64::max);
        if pairing.abs() > 1e-12 * scale * kscale {
            return Err(Error::Precondition(format!("amplitude {w:?} is not [L]-orthogonal to {k}")));
        }
        Ok(Self::from_parts(k, j, w, domain))
    }

    fn from_parts(k: Frequency, j: u8, w: [f64; 3], domain: &DomainSpec) -> Self {
        let norm_sq = field_norm_sq(k, &w, domain);
        Self { k, j, w, norm_sq }
    }

    pub fn index(&self) -> ModeIndex {
        ModeIndex::new(self.j, self.k)
    }

    pub fn field(&self) -> TrigVectorField {
        TrigVectorField { n: self.k, z: self.w }
    }

    /// Same mode with amplitude multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { k: self.k, j: self.j, w: [self.w[0] * c, self.w[1] * c, self.w[2] * c], norm_sq: self.norm_sq * c * c }
    }

    pub fn evaluate(&self, domain: &DomainSpec, x: [f64; 3]) -> [f64; 3] {
        self.field().evaluate(domain, x)
    }

    pub fn jacobian(&self, domain: &DomainSpec, x: [f64; 3]) -> [[f64; 3]; 3] {
        self.field().jacobian(domain, x)
    }
}

impl TrigVectorField {
    pub fn new(n: Frequency, z: [f64; 3]) -> Self {
        Self { n, z }
    }

    fn phases(&self, domain: &DomainSpec, x: [f64; 3]) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let l = domain.lengths();
        let mut s = [0.0; 3];
        let mut c = [0.0; 3];
        let mut rate = [0.0; 3];
        for a in 0..3 {
            rate[a] = self.n.0[a] as f64 * PI / l[a];
            let (sa, ca) = (rate[a] * x[a]).sin_cos();
            s[a] = sa;
            c[a] = ca;
        }
        (s, c, rate)
    }

    /// Pointwise value.
    pub fn evaluate(&self, domain: &DomainSpec, x: [f64; 3]) -> [f64; 3] {
        let (s, c, _) = self.phases(domain, x);
        [self.z[0] * s[0] * c[1] * c[2], self.z[1] * c[0] * s[1] * c[2], self.z[2] * c[0] * c[1] * s[2]]
    }

    /// `J[i][j] = d F_i / d x_j`, by direct differentiation of each factor.
    pub fn jacobian(&self, domain: &DomainSpec, x: [f64; 3]) -> [[f64; 3]; 3] {
        let (s, c, rate) = self.phases(domain, x);
        let mut jac = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut v = self.z[i];
                for a in 0..3 {
                    let factor = match (a == i, a == j) {
                        (true, true) => rate[a] * c[a],
                        (true, false) => s[a],
                        (false, true) => -rate[a] * s[a],
                        (false, false) => c[a],
                    };
                    v *= factor;
                }
                jac[i][j] = v;
            }
        }
        jac
    }

    pub fn norm_sq(&self, domain: &DomainSpec) -> f64 {
        field_norm_sq(self.n, &self.z, domain)
    }
}

/// The ordered set of canonical eigenmodes with frequencies in `{0..=cutoff}^3`.
#[derive(Debug, Clone)]
pub struct Basis {
    domain: DomainSpec,
    cutoff: u32,
    modes: Vec<EigenMode>,
    lookup: HashMap<ModeIndex, usize>,
}

impl Basis {
    pub fn up_to(cutoff: u32, domain: &DomainSpec) -> Self {
        let modes: Vec<EigenMode> = enumerate_modes(cutoff)
            .into_iter()
            .map(|idx| EigenMode::new(idx, domain).expect("enumerated modes are admissible"))
            .collect();
        let lookup = modes.iter().enumerate().map(|(i, m)| (m.index(), i)).collect();
        Self { domain: *domain, cutoff, modes, lookup }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[EigenMode] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &EigenMode {
        &self.modes[i]
    }

    pub fn position(&self, idx: &ModeIndex) -> Option<usize> {
        self.lookup.get(idx).copied()
    }
}
