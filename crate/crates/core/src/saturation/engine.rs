//! Reachability by linear algebra on the generated span.
//!
//! A step collects the vectors `B(a, b)` for `a` in the seed and `b` in the
//! current set, together with the unit vectors of the current members, and
//! asks which further eigenmodes lie in their span. All coordinates are taken
//! in the unit-L2 eigenbasis, where the span test is orthogonal projection: a
//! mode `e` belongs to the span exactly when `|P e|^2 = 1`.
//!
//! Every component of `B(a, b)` has frequency parity equal to that of `k + m`,
//! so the column space splits into eight independent parity blocks.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rayon::prelude::*;

use super::{cq, Certificate, ModeSet, RankEvidence, Witness};
use crate::error::{Error, Result};
use crate::exact::{self, ExactDomain, RVec, Rational};
use crate::interaction::{bilinear_sym, FieldExpansion};
use crate::spectral_basis::{Basis, DomainSpec, EigenMode, Frequency, ModeIndex};

/// Residual below which a vector is declared inside the span without a
/// dense check. Declaring too little never over-reports reachability.
const CHEAP_IN_SPAN: f64 = 1e-14;
/// Relative residual norm above which a vector extends the span.
const RANK_TOL: f64 = 1e-9;
/// Leverage a mode needs to count as reached.
const LEVERAGE_TOL: f64 = 1e-6;

/// Which pairs feed a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRule {
    /// `a` in the seed, `b` in the current set.
    SeedTimesCurrent,
    /// Both arguments in the current set. Not the recursion being verified;
    /// kept for comparison.
    CurrentTimesCurrent,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub next: ModeSet,
    pub certificates: Vec<Certificate>,
}

struct Block {
    width: usize,
    rows: Vec<Vec<f64>>,
}

impl Block {
    fn insert(&mut self, v: &[(usize, f64)]) {
        let norm_sq: f64 = v.iter().map(|(_, x)| x * x).sum();
        if norm_sq == 0.0 {
            return;
        }
        let coeffs: Vec<f64> = self.rows.iter().map(|q| v.iter().map(|&(i, x)| q[i] * x).sum()).collect();
        let captured: f64 = coeffs.iter().map(|c| c * c).sum();
        if norm_sq - captured <= CHEAP_IN_SPAN * norm_sq {
            return;
        }
        let mut r = vec![0.0; self.width];
        for &(i, x) in v {
            r[i] += x;
        }
        for (q, c) in self.rows.iter().zip(&coeffs) {
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= c * qi;
            }
        }
        // second Gram-Schmidt pass
        for q in &self.rows {
            let c: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= c * qi;
            }
        }
        let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if rn > RANK_TOL * norm_sq.sqrt() {
            r.iter_mut().for_each(|x| *x /= rn);
            self.rows.push(r);
        }
    }

    fn leverage(&self, i: usize) -> f64 {
        self.rows.iter().map(|q| q[i] * q[i]).sum()
    }
}

struct Span {
    columns: HashMap<ModeIndex, (usize, usize)>,
    scale: HashMap<ModeIndex, f64>,
    blocks: Vec<Block>,
}

impl Span {
    fn new(basis: &Basis) -> Self {
        let mut widths = [0usize; 8];
        let mut columns = HashMap::new();
        let mut scale = HashMap::new();
        for m in basis.modes() {
            let p = m.k.parity();
            columns.insert(m.index(), (p, widths[p]));
            scale.insert(m.index(), m.norm_sq.sqrt());
            widths[p] += 1;
        }
        let blocks = widths.iter().map(|&w| Block { width: w, rows: Vec::new() }).collect();
        Self { columns, scale, blocks }
    }

    fn insert(&mut self, e: &FieldExpansion) {
        let mut per_block: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
        for (idx, &c) in e.iter() {
            let (b, i) = self.columns[idx];
            per_block.entry(b).or_default().push((i, c * self.scale[idx]));
        }
        for (b, v) in per_block {
            self.blocks[b].insert(&v);
        }
    }

    fn contains(&self, idx: &ModeIndex) -> bool {
        let (b, i) = self.columns[idx];
        self.blocks[b].leverage(i) >= 1.0 - LEVERAGE_TOL
    }
}

/// One application of the recursion with the seed-restricted pair rule.
pub fn f_l_step(seed: &ModeSet, current: &ModeSet, cutoff: u32, domain: &ExactDomain) -> Result<StepOutcome> {
    f_l_step_with(seed, current, cutoff, domain, PairRule::SeedTimesCurrent, true)
}

/// One application of the recursion. Modes above `cutoff` are never added,
/// although the span test sees every frequency the products can produce.
pub fn f_l_step_with(
    seed: &ModeSet,
    current: &ModeSet,
    cutoff: u32,
    domain: &ExactDomain,
    rule: PairRule,
    certify: bool,
) -> Result<StepOutcome> {
    let fdom = domain.to_domain(1.0)?;
    let step = span_step(seed, current, cutoff, &fdom, rule)?;
    let certificates = if certify {
        certify_fresh(&step.fresh, current, &step.next, &step.pairs, &step.products, domain)?
    } else {
        Vec::new()
    };
    Ok(StepOutcome { next: step.next, certificates })
}

/// The uncertified step on a floating point box.
pub fn reachable_step(
    seed: &ModeSet,
    current: &ModeSet,
    cutoff: u32,
    domain: &DomainSpec,
    rule: PairRule,
) -> Result<ModeSet> {
    Ok(span_step(seed, current, cutoff, domain, rule)?.next)
}

struct SpanStep {
    next: ModeSet,
    fresh: Vec<ModeIndex>,
    pairs: Vec<(ModeIndex, ModeIndex)>,
    products: Vec<FieldExpansion>,
}

fn span_step(seed: &ModeSet, current: &ModeSet, cutoff: u32, fdom: &DomainSpec, rule: PairRule) -> Result<SpanStep> {
    if !seed.is_subset(current) {
        return Err(Error::Precondition("the seed must be contained in the current set".into()));
    }
    let mode = |idx: &ModeIndex| EigenMode::new(*idx, fdom);

    let left: Vec<ModeIndex> = match rule {
        PairRule::SeedTimesCurrent => seed.iter().copied().collect(),
        PairRule::CurrentTimesCurrent => current.iter().copied().collect(),
    };
    let right: Vec<ModeIndex> = current.iter().copied().collect();
    let reach = |v: &[ModeIndex]| v.iter().map(|m| m.k.max_component()).max().unwrap_or(0);
    let basis = Basis::up_to(cutoff.max(reach(&left) + reach(&right)), fdom);
    let mut pairs = Vec::with_capacity(left.len() * right.len());
    for a in &left {
        for b in &right {
            if rule == PairRule::CurrentTimesCurrent && b < a {
                continue;
            }
            pairs.push((*a, *b));
        }
    }
    let products: Vec<FieldExpansion> =
        pairs.par_iter().map(|(a, b)| Ok(bilinear_sym(&mode(a)?, &mode(b)?, fdom))).collect::<Result<_>>()?;

    let mut span = Span::new(&basis);
    for m in current.iter() {
        span.insert(&FieldExpansion::single(*m, 1.0));
    }
    for p in &products {
        span.insert(p);
    }

    let mut next = current.clone();
    next.generation = current.generation + 1;
    let mut fresh: Vec<ModeIndex> = Vec::new();
    for m in cq(cutoff) {
        if !current.contains(&m) && span.contains(&m) {
            next.insert(m);
            fresh.push(m);
        }
    }
    Ok(SpanStep { next, fresh, pairs, products })
}

/// Eigenmodes up to `cutoff` inside `G^1 = span(C ∪ B(C, C))`.
pub fn first_generation_modes(cutoff: u32, domain: &DomainSpec) -> Result<ModeSet> {
    let seed = super::seed_set();
    let mut g1 = reachable_step(&seed, &seed, cutoff.max(3), domain, PairRule::SeedTimesCurrent)?;
    if cutoff < 3 {
        g1 = ModeSet::new(1, g1.iter().copied().filter(|m| m.k.max_component() <= cutoff));
    }
    Ok(g1)
}

fn alpha_at(e: &FieldExpansion, n: Frequency) -> [f64; 2] {
    [e.get(&ModeIndex::new(1, n)), e.get(&ModeIndex::new(2, n))]
}

fn exact_witness(a: ModeIndex, b: ModeIndex, n: Frequency, domain: &ExactDomain) -> Result<Witness> {
    let wa = exact::perp_basis(a.k, domain)?[usize::from(a.j) - 1].clone();
    let wb = exact::perp_basis(b.k, domain)?[usize::from(b.j) - 1].clone();
    let z: RVec = exact::advection_pair(a.k, &wa, b.k, &wb, domain).remove(&n).unwrap_or_else(exact::zero_vec);
    let alpha = exact::project(n, &z, domain)?.into_iter().map(|(_, v)| v).collect();
    Ok(Witness { a, b, wa, wb, z, alpha })
}

fn certify_fresh(
    fresh: &[ModeIndex],
    current: &ModeSet,
    next: &ModeSet,
    pairs: &[(ModeIndex, ModeIndex)],
    products: &[FieldExpansion],
    domain: &ExactDomain,
) -> Result<Vec<Certificate>> {
    let mut by_freq: BTreeMap<Frequency, Vec<ModeIndex>> = BTreeMap::new();
    for m in fresh {
        by_freq.entry(m.k).or_default().push(*m);
    }
    let generation = next.generation;
    let mut out = Vec::new();
    for (n, targets) in by_freq {
        let pool: Vec<(usize, [f64; 2])> = products
            .iter()
            .enumerate()
            .map(|(i, p)| (i, alpha_at(p, n)))
            .filter(|(_, a)| a[0] != 0.0 || a[1] != 0.0)
            .collect();
        let norm = |a: &[f64; 2]| a[0].hypot(a[1]);
        if n.num_zero() == 0 && targets.len() == 2 {
            let first = pool.iter().max_by(|x, y| norm(&x.1).total_cmp(&norm(&y.1)));
            let second = first.and_then(|f| {
                pool.iter()
                    .map(|p| (p, (f.1[0] * p.1[1] - f.1[1] * p.1[0]).abs() / norm(&p.1)))
                    .max_by(|x, y| x.1.total_cmp(&y.1))
                    .map(|(p, _)| p)
            });
            if let (Some(f), Some(s)) = (first, second) {
                let w1 = exact_witness(pairs[f.0].0, pairs[f.0].1, n, domain)?;
                let w2 = exact_witness(pairs[s.0].0, pairs[s.0].1, n, domain)?;
                let det = &w1.alpha[0] * &w2.alpha[1] - &w1.alpha[1] * &w2.alpha[0];
                let det_nl = exact::det3(&domain.scaled(n), &w1.z, &w2.z);
                let evidence = if det.is_zero() { RankEvidence::Span } else { RankEvidence::Pilinind };
                for t in &targets {
                    out.push(Certificate {
                        target: *t,
                        generation,
                        witnesses: vec![w1.clone(), w2.clone()],
                        det_value: det.clone(),
                        det_nl: Some(det_nl.clone()),
                        rank_evidence: evidence,
                    });
                }
                continue;
            }
        }
        for t in targets {
            let slot = usize::from(t.j) - 1;
            let best = pool.iter().max_by(|x, y| x.1[slot].abs().total_cmp(&y.1[slot].abs()));
            let other_known = n.branch_count() == 1 || current.contains(&ModeIndex::new(3 - t.j, n));
            match best {
                Some(b) => {
                    let w = exact_witness(pairs[b.0].0, pairs[b.0].1, n, domain)?;
                    let value: Rational = w.alpha[slot].clone();
                    let evidence =
                        if !value.is_zero() && other_known { RankEvidence::SingleBranch } else { RankEvidence::Span };
                    out.push(Certificate {
                        target: t,
                        generation,
                        witnesses: vec![w],
                        det_value: value,
                        det_nl: None,
                        rank_evidence: evidence,
                    });
                }
                None => out.push(Certificate {
                    target: t,
                    generation,
                    witnesses: Vec::new(),
                    det_value: Rational::zero(),
                    det_nl: None,
                    rank_evidence: RankEvidence::Span,
                }),
            }
        }
    }
    Ok(out)
}

/// Result of iterating the recursion from the seed.
#[derive(Debug, Clone)]
pub struct SaturationReport {
    pub cutoff: u32,
    /// Member sets `G^0, G^1, ...` restricted to the cutoff.
    pub generations: Vec<ModeSet>,
    /// For each `q` in `3..=cutoff`, the first generation containing `C^q`.
    pub first_generation: BTreeMap<u32, Option<usize>>,
    /// Modes of `C^cutoff` never reached.
    pub unreached: Vec<ModeIndex>,
    pub certificates: Vec<Certificate>,
}

impl SaturationReport {
    /// `C^q` is contained in `G^{q-1}` for every `q` in `4..=cutoff`.
    pub fn inclusions_hold(&self) -> bool {
        self.first_generation.iter().all(|(&q, g)| match g {
            Some(g) => q == 3 && *g == 0 || q > 3 && *g <= (q - 1) as usize,
            None => false,
        })
    }
}

/// Iterates the recursion from the seed until nothing new appears below the
/// cutoff or `max_generations` steps have been taken.
pub fn saturate(cutoff: u32, max_generations: usize, domain: &ExactDomain) -> Result<SaturationReport> {
    saturate_with(cutoff, max_generations, domain, PairRule::SeedTimesCurrent, true)
}

pub fn saturate_with(
    cutoff: u32,
    max_generations: usize,
    domain: &ExactDomain,
    rule: PairRule,
    certify: bool,
) -> Result<SaturationReport> {
    if cutoff < 3 {
        return Err(Error::Precondition(format!("cutoff must be at least 3, got {cutoff}")));
    }
    let seed = super::seed_set();
    let mut generations = vec![seed.clone()];
    let mut certificates = Vec::new();
    let full = cq(cutoff).len();
    while generations.len() <= max_generations {
        let current = generations.last().expect("nonempty");
        if current.len() == full {
            break;
        }
        let step = f_l_step_with(&seed, current, cutoff, domain, rule, certify)?;
        let grew = step.next.len() > current.len();
        certificates.extend(step.certificates);
        generations.push(step.next);
        if !grew {
            break;
        }
    }
    let first_generation = (3..=cutoff).map(|q| (q, generations.iter().position(|g| g.covers_cq(q)))).collect();
    let last = generations.last().expect("nonempty");
    let unreached = cq(cutoff).into_iter().filter(|m| !last.contains(m)).collect();
    Ok(SaturationReport { cutoff, generations, first_generation, unreached, certificates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saturation::seed_set;

    #[test]
    fn self_pair_of_single_branch_mode_adds_nothing() {
        let d = ExactDomain::from_integers([1, 1, 1]);
        let only = ModeSet::new(0, [ModeIndex::new(1, Frequency::new(0, 1, 1))]);
        let out = f_l_step(&only, &only, 3, &d).unwrap();
        assert_eq!(out.next.len(), 1);
        assert!(out.certificates.is_empty());
    }

    #[test]
    fn one_step_reaches_c4() {
        let d = ExactDomain::from_integers([1, 1, 1]);
        let seed = seed_set();
        let out = f_l_step(&seed, &seed, 4, &d).unwrap();
        assert!(out.next.covers_cq(4));
        assert!(seed.is_subset(&out.next));
        assert_eq!(out.certificates.len(), out.next.len() - seed.len());
        for c in &out.certificates {
            assert!(!c.det_value.is_zero(), "{}", c.target);
        }
    }

    #[test]
    fn rejects_seed_outside_current() {
        let d = ExactDomain::from_integers([1, 1, 1]);
        let small = ModeSet::new(0, [ModeIndex::new(1, Frequency::new(0, 1, 1))]);
        assert!(f_l_step(&seed_set(), &small, 4, &d).is_err());
    }
}
