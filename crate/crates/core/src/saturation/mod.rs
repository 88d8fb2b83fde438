//! The recursion `G^{j+1} = G^j + span{ B(a, b) : a in C, b in G^j }` started
//! from the 81-mode seed `C`, together with the frequency bookkeeping used by
//! the constructive proof that it exhausts every eigenmode.

mod engine;
pub mod trace;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::exact::{Rational, RationalRecord};
use crate::spectral_basis::{enumerate_frequencies, Frequency, ModeIndex};

pub use engine::{
    f_l_step, f_l_step_with, first_generation_modes, reachable_step, saturate, saturate_with, PairRule,
    SaturationReport, StepOutcome,
};
pub use trace::{paper_trace, DisplayCheck, DisplayStatus, TraceReport};

/// A set of eigenmode indices reached at some generation of the recursion.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModeSet {
    pub generation: usize,
    members: BTreeSet<ModeIndex>,
}

impl ModeSet {
    pub fn new(generation: usize, members: impl IntoIterator<Item = ModeIndex>) -> Self {
        Self { generation, members: members.into_iter().collect() }
    }

    pub fn contains(&self, idx: &ModeIndex) -> bool {
        self.members.contains(idx)
    }

    pub fn insert(&mut self, idx: ModeIndex) -> bool {
        self.members.insert(idx)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModeIndex> {
        self.members.iter()
    }

    pub fn is_subset(&self, other: &ModeSet) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Every branch of `n` is a member.
    pub fn fully_reached(&self, n: Frequency) -> bool {
        let b = n.branch_count();
        b > 0 && (1..=b).all(|j| self.contains(&ModeIndex::new(j, n)))
    }

    /// True when every mode of `C^q` is a member.
    pub fn covers_cq(&self, q: u32) -> bool {
        cq(q).iter().all(|m| self.contains(m))
    }
}

/// The seed `C = C^3`: every eigenmode with frequencies at most 3.
pub fn seed_set() -> ModeSet {
    ModeSet::new(0, cq(3))
}

/// `S^q`: frequencies in `{0..q}^3` with at most one vanishing component.
pub fn sq(q: u32) -> BTreeSet<Frequency> {
    enumerate_frequencies(q).into_iter().collect()
}

/// `C^q`: every branch of every frequency in `S^q`.
pub fn cq(q: u32) -> Vec<ModeIndex> {
    crate::spectral_basis::enumerate_modes(q)
}

/// `R^q_m`: `n_m = q` and the other components in `1..q-1`. Axes are 0-based.
pub fn rq(q: u32, m: usize) -> BTreeSet<Frequency> {
    sq(q)
        .into_iter()
        .filter(|n| n.get(m) == q && (0..3).filter(|&i| i != m).all(|i| (1..q).contains(&n.get(i))))
        .collect()
}

/// `L^q_{m1,m2}`: `n_{m1} = n_{m2} = q` and the third component in `1..q-1`.
pub fn lq(q: u32, m1: usize, m2: usize) -> BTreeSet<Frequency> {
    assert_ne!(m1, m2, "the two axes of an L-set differ");
    sq(q)
        .into_iter()
        .filter(|n| {
            n.get(m1) == q
                && n.get(m2) == q
                && (0..3).filter(|&i| i != m1 && i != m2).all(|i| (1..q).contains(&n.get(i)))
        })
        .collect()
}

/// The index sets appearing in one induction step `q -> q + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyClasses {
    pub q: u32,
    /// `{ n in S^q : #0(n) = 0 }`
    pub sq_interior: BTreeSet<Frequency>,
    /// `R^{q+1}_1, R^{q+1}_2, R^{q+1}_3`
    pub rq_m: [BTreeSet<Frequency>; 3],
    /// `L^{q+1}_{1,2}, L^{q+1}_{2,3}, L^{q+1}_{3,1}`
    pub lq_pair: [BTreeSet<Frequency>; 3],
}

impl FrequencyClasses {
    pub fn new(q: u32) -> Self {
        let interior = |s: BTreeSet<Frequency>| s.into_iter().filter(|n| n.num_zero() == 0).collect();
        Self {
            q,
            sq_interior: interior(sq(q)),
            rq_m: [rq(q + 1, 0), rq(q + 1, 1), rq(q + 1, 2)],
            lq_pair: [lq(q + 1, 0, 1), lq(q + 1, 1, 2), lq(q + 1, 2, 0)],
        }
    }

    /// Checks that the interior of `S^{q+1}` is the disjoint union of the
    /// interior of `S^q`, the three R-sets, the three L-sets and the corner
    /// `(q+1, q+1, q+1)`.
    pub fn partition_holds(&self) -> bool {
        let q1 = self.q + 1;
        let target: BTreeSet<Frequency> = sq(q1).into_iter().filter(|n| n.num_zero() == 0).collect();
        let corner = Frequency::new(q1, q1, q1);
        let mut pieces: Vec<&BTreeSet<Frequency>> = vec![&self.sq_interior];
        pieces.extend(self.rq_m.iter());
        pieces.extend(self.lq_pair.iter());
        let mut union = BTreeSet::new();
        let mut total = 1usize;
        union.insert(corner);
        for p in pieces {
            total += p.len();
            union.extend(p.iter().copied());
        }
        union == target && total == target.len()
    }
}

/// How the rank of the span at a target frequency was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankEvidence {
    /// Two witnesses whose projected coordinate pairs have nonzero 2x2
    /// determinant, so both branches are generated.
    Pilinind,
    /// A single witness with nonzero coordinate on the only branch.
    SingleBranch,
    /// The witness touches the branch but the branch was certified from the
    /// global span of all generated vectors rather than by one frequency alone.
    Span,
}

/// One `(a, b)` pair contributing to a target frequency `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Seed mode.
    pub a: ModeIndex,
    /// Mode of the current generation.
    pub b: ModeIndex,
    /// Amplitudes actually used; the branch labels above are nominal when
    /// these differ from the canonical basis.
    pub wa: [Rational; 3],
    pub wb: [Rational; 3],
    /// Amplitude of the advection at `n`, as a multiple of `pi`.
    pub z: [Rational; 3],
    /// Leray coordinates on the branches of `n`, as multiples of `pi`.
    pub alpha: Vec<Rational>,
}

/// Exact evidence that a mode joined the recursion at some generation.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub target: ModeIndex,
    pub generation: usize,
    pub witnesses: Vec<Witness>,
    /// 2x2 determinant of the witnesses' coordinates (multiple of `pi^2`), or
    /// the single coordinate (multiple of `pi`).
    pub det_value: Rational,
    /// `det(n^L, z_1, z_2)` as a multiple of `pi^2` when two witnesses exist.
    pub det_nl: Option<Rational>,
    pub rank_evidence: RankEvidence,
}

/// Flat JSON record of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub target: ModeIndex,
    /// First witness pair; absent when the mode was reached through the span
    /// alone and no product touches its frequency.
    pub a: Option<ModeIndex>,
    pub b: Option<ModeIndex>,
    pub z: Vec<[RationalRecord; 3]>,
    pub det_num: String,
    pub det_den: String,
    pub generation: usize,
    pub rank_evidence: RankEvidence,
}

impl From<&Certificate> for CertificateRecord {
    fn from(c: &Certificate) -> Self {
        let first = c.witnesses.first();
        Self {
            target: c.target,
            a: first.map(|w| w.a),
            b: first.map(|w| w.b),
            z: c.witnesses.iter().map(|w| w.z.each_ref().map(RationalRecord::from)).collect(),
            det_num: c.det_value.numer().to_string(),
            det_den: c.det_value.denom().to_string(),
            generation: c.generation,
            rank_evidence: c.rank_evidence,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_has_81_members() {
        let s = seed_set();
        assert_eq!(s.len(), 81);
        assert_eq!(s.iter().filter(|m| m.k.num_zero() == 1).count(), 27);
        assert_eq!(s.iter().filter(|m| m.k.num_zero() == 0).count(), 54);
        assert!(s.contains(&ModeIndex::new(1, Frequency::new(0, 1, 1))));
        assert!(!s.contains(&ModeIndex::new(2, Frequency::new(0, 1, 1))));
        assert!(s.covers_cq(3));
        assert!(!s.covers_cq(4));
    }

    #[test]
    fn partition_identity() {
        for q in 3..=8 {
            assert!(FrequencyClasses::new(q).partition_holds(), "q = {q}");
        }
    }

    #[test]
    fn class_sizes() {
        let c = FrequencyClasses::new(4);
        for r in &c.rq_m {
            assert_eq!(r.len(), 16);
        }
        for l in &c.lq_pair {
            assert_eq!(l.len(), 4);
        }
        assert_eq!(c.sq_interior.len(), 64);
    }
}
