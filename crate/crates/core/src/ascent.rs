//! Lifting weight certificates from a merged partition to its refinement.
//!
//! For `lambda` with equal parts `lambda_p = lambda_q = a` and `mu` the result of
//! merging them, a certificate `w~` for `mu` lifts to
//!
//! ```text
//! w(i, j) = w~(i, j)          off the merged pair
//! w(p, j) = w(q, j) = w~(p, j) / 2
//! w(p, q) = f(a) - f(2a) / 2
//! ```
//!
//! which is valid on `lambda` whenever `F(A, B, a, a) >= 0` for every split
//! `A + B = n - 2a` of the remaining parts.

use std::collections::HashMap;
use std::fmt;

use crate::combinatorics::{merge_equal_pair, reduction_path, FQuad, MergeStep, Partition};
use crate::divisor::{f_inequality_value, FFunction, PairFunction};
use crate::effective::{find_certificate, WeightCertificate};
use crate::error::{Error, Result};
use crate::pullback::{pullback, symmetrize, verify_stratum, Pullback};

/// One merge of two equal parts, with the marker correspondence between the strata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AscentStep {
    lambda: Partition,
    mu: Partition,
    value: usize,
    p: usize,
    q: usize,
    /// Marker of `mu` for each marker of `lambda`; `p` and `q` share the merged marker.
    image: Vec<usize>,
}

impl AscentStep {
    /// Merges the first two markers carrying `value`.
    ///
    /// Markers of `mu` are those of `lambda` without `q`, with the merged part at
    /// `p`, stably sorted by decreasing part.
    pub fn new(lambda: &Partition, value: usize) -> Result<Self> {
        let mu = merge_equal_pair(lambda, value)?;
        let p = lambda.parts().iter().position(|&v| v == value).expect("merge checked multiplicity");
        let q = p + 1;
        let mut order: Vec<(usize, usize)> = lambda
            .parts()
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != q)
            .map(|(t, &v)| (t, if t == p { 2 * value } else { v }))
            .collect();
        order.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        let mut image = vec![0; lambda.len()];
        for (position, &(t, _)) in order.iter().enumerate() {
            image[t] = position;
        }
        image[q] = image[p];
        Ok(AscentStep { lambda: lambda.clone(), mu, value, p, q, image })
    }

    pub fn lambda(&self) -> &Partition {
        &self.lambda
    }

    pub fn mu(&self) -> &Partition {
        &self.mu
    }

    pub fn merged_value(&self) -> usize {
        self.value
    }

    /// The two 0-based markers of `lambda` carrying the merged parts.
    pub fn merged_pair(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    /// The marker of `mu` corresponding to marker `t` of `lambda`.
    pub fn image(&self, t: usize) -> usize {
        self.image[t]
    }

    /// Markers of `lambda` other than the merged pair.
    pub fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.lambda.len()).filter(move |&t| t != self.p && t != self.q)
    }

    /// The quads `{A, B, a, a}` for every split of the remaining parts into two
    /// nonempty groups with sums `A` and `B`, deduplicated and sorted.
    pub fn case_three_quads(&self) -> Vec<FQuad> {
        let rest: Vec<usize> = self.others().map(|t| self.lambda.parts()[t]).collect();
        let total: usize = rest.iter().sum();
        // Parts are positive, so any subset sum strictly between 0 and `total`
        // comes from a nonempty proper subset.
        let mut reachable = vec![false; total + 1];
        reachable[0] = true;
        for &v in &rest {
            for s in (v..=total).rev() {
                reachable[s] |= reachable[s - v];
            }
        }
        let a = self.value;
        let mut quads: Vec<FQuad> = (1..total)
            .filter(|&s| reachable[s])
            .map(|s| FQuad::new([s, total - s, a, a]).expect("positive parts"))
            .collect();
        quads.sort();
        quads.dedup();
        quads
    }
}

impl fmt::Display for AscentStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) -> ({}) merging {}+{}", self.lambda, self.mu, self.value, self.value)
    }
}

/// The certificate of a two-part stratum: its only constraint is `w(1,2) = f(mu_1)`.
pub fn two_marker_certificate(f: &FFunction, mu: &Partition) -> Result<WeightCertificate> {
    if mu.len() != 2 {
        return Err(Error::Precondition(format!("({mu}) does not have two parts")));
    }
    Ok(PairFunction::from_fn(2, |_, _| f.at(mu.parts()[0]).clone()))
}

fn check_lower(f: &FFunction, mu: &Partition, w_tilde: &WeightCertificate) -> Result<()> {
    if w_tilde.m() != mu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), got: w_tilde.m() });
    }
    if mu.len() == 2 {
        if *w_tilde != two_marker_certificate(f, mu)? {
            return Err(Error::Precondition(format!(
                "two-marker certificate for ({mu}) must be f({}) = {}",
                mu.parts()[0],
                f.at(mu.parts()[0])
            )));
        }
        return Ok(());
    }
    let report = verify_stratum(f, mu, w_tilde)?;
    match report.violations.first() {
        Some(v) => Err(Error::Precondition(format!("certificate for ({mu}) fails: {v}"))),
        None => Ok(()),
    }
}

/// Lifts a certificate for `step.mu()` to one for `step.lambda()`.
pub fn ascend(f: &FFunction, step: &AscentStep, w_tilde: &WeightCertificate) -> Result<WeightCertificate> {
    if step.lambda.total() != f.n() {
        return Err(Error::InvalidPartition(format!(
            "({}) is a partition of {}, expected {}",
            step.lambda,
            step.lambda.total(),
            f.n()
        )));
    }
    check_lower(f, &step.mu, w_tilde)?;
    lift(f, step, w_tilde)
}

/// The construction itself; checks the F-inequalities but trusts `w_tilde`.
fn lift(f: &FFunction, step: &AscentStep, w_tilde: &WeightCertificate) -> Result<WeightCertificate> {
    for quad in step.case_three_quads() {
        if f_inequality_value(f, &quad).is_negative() {
            return Err(Error::NotFNef(quad));
        }
    }
    let a = step.value;
    let merged = f.at(a) - f.at(2 * a).half();
    let (p, q) = (step.p, step.q);
    Ok(PairFunction::from_fn(step.lambda.len(), |i, j| {
        let on_pair = |t| t == p || t == q;
        match (on_pair(i), on_pair(j)) {
            (true, true) => merged.clone(),
            (false, false) => w_tilde.get(step.image[i], step.image[j]).clone(),
            _ => w_tilde.get(step.image[i], step.image[j]).half(),
        }
    }))
}

/// How an entry's certificate was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Strict partition, certificate found by the feasibility search.
    Feasibility,
    /// Lifted from the strict base along the reduction path.
    AscentChain,
    /// At most two parts; nothing to certify.
    Degenerate,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Feasibility => "feasibility",
            Provenance::AscentChain => "ascent-chain",
            Provenance::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionCertificate {
    pub partition: Partition,
    /// `None` exactly for degenerate entries.
    pub weights: Option<WeightCertificate>,
    pub provenance: Provenance,
    /// Merges from the partition down to its strict base; empty unless ascended.
    pub merge_path: Vec<MergeStep>,
}

/// Certifies partitions of `f.n()`, reusing certificates of merged partitions.
///
/// Ascended certificates are symmetrized over equal parts after each step, so
/// every stored certificate can be checked orbit by orbit. Lower certificates
/// come from this certifier and are not re-verified before lifting; the
/// F-inequalities of each step are.
pub struct Certifier<'a> {
    f: &'a FFunction,
    cache: HashMap<Partition, WeightCertificate>,
}

impl<'a> Certifier<'a> {
    pub fn new(f: &'a FFunction) -> Self {
        Certifier { f, cache: HashMap::new() }
    }

    pub fn certify(&mut self, lambda: &Partition) -> Result<PartitionCertificate> {
        if lambda.total() != self.f.n() {
            return Err(Error::InvalidPartition(format!(
                "({lambda}) is a partition of {}, expected {}",
                lambda.total(),
                self.f.n()
            )));
        }
        if lambda.len() <= 2 {
            return Ok(PartitionCertificate {
                partition: lambda.clone(),
                weights: None,
                provenance: Provenance::Degenerate,
                merge_path: Vec::new(),
            });
        }
        let weights = self.weights(lambda)?;
        let (provenance, merge_path) = if lambda.is_strict() {
            (Provenance::Feasibility, Vec::new())
        } else {
            (Provenance::AscentChain, reduction_path(lambda))
        };
        Ok(PartitionCertificate { partition: lambda.clone(), weights: Some(weights), provenance, merge_path })
    }

    fn weights(&mut self, lambda: &Partition) -> Result<WeightCertificate> {
        if let Some(w) = self.cache.get(lambda) {
            return Ok(w.clone());
        }
        let w = if lambda.len() == 2 {
            two_marker_certificate(self.f, lambda)?
        } else if lambda.is_strict() {
            let Pullback::Expression(expr) = pullback(self.f, lambda)? else {
                unreachable!("length at least three")
            };
            find_certificate(&expr).ok_or_else(|| Error::StrictBaseInfeasible(lambda.clone()))?
        } else {
            let value = lambda.largest_repeated_value().expect("not strict");
            let step = AscentStep::new(lambda, value)?;
            let lower = self.weights(&step.mu)?;
            symmetrize(lambda, &lift(self.f, &step, &lower)?)?
        };
        self.cache.insert(lambda.clone(), w.clone());
        Ok(w)
    }
}

/// Certifies one stratum: degenerate, strict by feasibility, or by ascent.
pub fn certify_partition(f: &FFunction, lambda: &Partition) -> Result<PartitionCertificate> {
    Certifier::new(f).certify(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{partitions_of, PartitionFilter, TwoPartSplit};
    use crate::cone::{extremal_rays, sample_fnef};
    use crate::divisor::{f_from_symmetric, SymmetricDivisor};
    use crate::effective::verify_certificate;
    use crate::rational::{int, ratio};
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn f_of(n: usize, c: &[i64]) -> FFunction {
        f_from_symmetric(&SymmetricDivisor::from_integers(n, c).unwrap())
    }

    fn expression(f: &FFunction, lambda: &Partition) -> crate::divisor::BoundaryExpression {
        match pullback(f, lambda).unwrap() {
            Pullback::Expression(e) => e,
            Pullback::Degenerate => panic!("degenerate"),
        }
    }

    #[test]
    fn step_correspondence() {
        let step = AscentStep::new(&p(&[2, 2, 1, 1]), 1).unwrap();
        assert_eq!(step.mu(), &p(&[2, 2, 2]));
        assert_eq!(step.merged_pair(), (2, 3));
        assert_eq!((0..4).map(|t| step.image(t)).collect::<Vec<_>>(), [0, 1, 2, 2]);

        let step = AscentStep::new(&p(&[3, 2, 2, 1]), 2).unwrap();
        assert_eq!(step.mu(), &p(&[4, 3, 1]));
        assert_eq!((0..4).map(|t| step.image(t)).collect::<Vec<_>>(), [1, 0, 0, 2]);
        assert!(AscentStep::new(&p(&[3, 2, 1]), 2).is_err());
    }

    #[test]
    fn case_three_quads_cover_subset_sums() {
        let step = AscentStep::new(&p(&[4, 3, 1, 1]), 1).unwrap();
        let quads: Vec<String> = step.case_three_quads().iter().map(ToString::to_string).collect();
        assert_eq!(quads, ["{4,3,1,1}"]);
        let step = AscentStep::new(&p(&[3, 2, 1, 1, 1]), 1).unwrap();
        // Remaining parts 3, 2, 1 with n - 2a = 6: A in {1,2,3,4,5}.
        assert_eq!(step.case_three_quads().len(), 3);
        assert!(AscentStep::new(&p(&[2, 1, 1]), 1).unwrap().case_three_quads().is_empty());
    }

    #[test]
    fn worked_example_at_six() {
        let f = f_of(6, &[1, 3]);
        let step = AscentStep::new(&p(&[2, 2, 1, 1]), 1).unwrap();
        let w_tilde = PairFunction::from_fn(3, |_, _| ratio(-1, 2));
        let w = ascend(&f, &step, &w_tilde).unwrap();
        assert_eq!(*w.get(0, 1), ratio(-1, 2));
        for i in [2, 3] {
            for j in [0, 1] {
                assert_eq!(*w.get(i, j), ratio(-1, 4));
            }
        }
        assert_eq!(*w.get(2, 3), ratio(1, 2));
        let e = expression(&f, &p(&[2, 2, 1, 1]));
        assert!(verify_certificate(&e, &w).unwrap().is_ok());
        // The split {1,3} | {2,4} separates the merged pair.
        let s = TwoPartSplit::from_side(4, 0b0101).unwrap();
        assert_eq!(w.cut_value(s.side) - e.get(&s), ratio(5, 2));
        assert_eq!(ratio(5, 2), f.at(2).half() - f.at(3));
    }

    #[test]
    fn zero_lifts_to_zero() {
        let f = f_of(9, &[0, 0, 0]);
        for lambda in partitions_of(9, PartitionFilter::All) {
            let Some(v) = lambda.largest_repeated_value() else { continue };
            if lambda.len() < 3 {
                continue;
            }
            let step = AscentStep::new(&lambda, v).unwrap();
            let w = ascend(&f, &step, &PairFunction::zero(step.mu().len())).unwrap();
            assert!(w.is_zero());
        }
    }

    #[test]
    fn four_ones() {
        let f = f_of(4, &[2]);
        let step = AscentStep::new(&p(&[1, 1, 1, 1]), 1).unwrap();
        let mu_expr = expression(&f, step.mu());
        let w_tilde = find_certificate(&mu_expr).unwrap();
        assert_eq!(*w_tilde.get(1, 2), ratio(1, 1));
        let w = ascend(&f, &step, &w_tilde).unwrap();
        let e = expression(&f, &p(&[1, 1, 1, 1]));
        let report = verify_certificate(&e, &w).unwrap();
        assert!(report.is_ok());
        for t in 0..4 {
            assert!(w.cut_value(1 << t).is_zero());
        }
    }

    #[test]
    fn two_marker_base() {
        let f = f_of(6, &[1, 3]);
        let step = AscentStep::new(&p(&[4, 1, 1]), 1).unwrap();
        let lower = two_marker_certificate(&f, step.mu()).unwrap();
        assert_eq!(*lower.get(0, 1), int(-1));
        let w = ascend(&f, &step, &lower).unwrap();
        assert!(verify_certificate(&expression(&f, &p(&[4, 1, 1])), &w).unwrap().is_ok());
        assert!(ascend(&f, &step, &PairFunction::zero(2)).is_err());
    }

    #[test]
    fn preconditions_are_checked() {
        let f = f_of(6, &[1, 3]);
        let step = AscentStep::new(&p(&[2, 2, 1, 1]), 1).unwrap();
        assert!(matches!(
            ascend(&f, &step, &PairFunction::zero(3)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            ascend(&f, &step, &PairFunction::zero(4)),
            Err(Error::DimensionMismatch { expected: 3, got: 4 })
        ));
        // c = (1, 4) violates F(3,1,1,1); the split {3} | {1} of the rest needs it.
        let bad = f_of(6, &[1, 4]);
        let step = AscentStep::new(&p(&[3, 1, 1, 1]), 1).unwrap();
        let lower = find_certificate(&expression(&bad, step.mu())).unwrap();
        match ascend(&bad, &step, &lower) {
            Err(Error::NotFNef(q)) => assert_eq!(q.to_string(), "{3,1,1,1}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn case_two_identity_and_case_three_margins() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [7, 8, 10, 11] {
            let cone = extremal_rays(n).unwrap();
            let lambdas: Vec<Partition> = partitions_of(n, PartitionFilter::All)
                .into_iter()
                .filter(|l| (3..=9).contains(&l.len()) && !l.is_strict())
                .collect();
            for _ in 0..8 {
                let f = f_from_symmetric(&sample_fnef(&cone, rng.gen()).unwrap());
                let lambda = &lambdas[rng.gen_range(0..lambdas.len())];
                let classes = lambda.value_classes();
                let repeated: Vec<usize> = classes.iter().filter(|c| c.1 >= 2).map(|c| c.0).collect();
                let step = AscentStep::new(lambda, repeated[rng.gen_range(0..repeated.len())]).unwrap();
                let lower = Certifier::new(&f).weights(step.mu()).unwrap();
                let w = ascend(&f, &step, &lower).unwrap();
                let e = expression(&f, lambda);
                assert!(verify_certificate(&e, &w).unwrap().is_ok());
                let (pp, qq) = step.merged_pair();
                let a = step.merged_value();
                assert_eq!(w.cut_value(1 << pp), *f.at(a));
                assert_eq!(w.cut_value(1 << qq), *f.at(a));
                for (s, b) in e.splits().filter(|(s, _)| s.is_proper()) {
                    if (s.side >> pp & 1) == (s.side >> qq & 1) {
                        continue;
                    }
                    let with_p = if s.side >> pp & 1 == 1 { s.side } else { s.complement() };
                    let big_a: usize = step
                        .others()
                        .filter(|&t| with_p >> t & 1 == 1)
                        .map(|t| lambda.parts()[t])
                        .sum();
                    let quad = FQuad::new([big_a, n - 2 * a - big_a, a, a]).unwrap();
                    let margin = w.cut_value(s.side) - b;
                    assert!(margin >= f_inequality_value(&f, &quad).half(), "({lambda}) {s}");
                }
            }
        }
    }

    #[test]
    fn certify_partition_provenance() {
        let f = f_of(10, &[1, 2, 2, 3]);
        let strict = certify_partition(&f, &p(&[4, 3, 2, 1])).unwrap();
        assert_eq!(strict.provenance, Provenance::Feasibility);
        assert!(strict.merge_path.is_empty());
        assert_eq!(certify_partition(&f, &p(&[10])).unwrap().provenance, Provenance::Degenerate);
        assert_eq!(certify_partition(&f, &p(&[6, 4])).unwrap().weights, None);

        let f6 = f_of(6, &[1, 3]);
        let cert = certify_partition(&f6, &p(&[2, 2, 1, 1])).unwrap();
        assert_eq!(cert.provenance, Provenance::AscentChain);
        let path: Vec<String> = cert.merge_path.iter().map(|s| format!("{}:{}", s.partition, s.merged_value)).collect();
        assert_eq!(path, ["2,2,1,1:2", "4,1,1:1"]);
        let w = cert.weights.unwrap();
        assert!(verify_certificate(&expression(&f6, &p(&[2, 2, 1, 1])), &w).unwrap().is_ok());
    }

    #[test]
    fn every_stratum_certifies_on_rays() {
        for n in 4..=12 {
            let cone = extremal_rays(n).unwrap();
            for ray in cone.rays.as_ref().unwrap() {
                let d = crate::cone::ray_divisor(n, ray).unwrap();
                let f = f_from_symmetric(&d);
                let mut certifier = Certifier::new(&f);
                for lambda in partitions_of(n, PartitionFilter::All) {
                    let cert = certifier.certify(&lambda).unwrap();
                    if let Some(w) = cert.weights {
                        let e = expression(&f, &lambda);
                        assert!(verify_certificate(&e, &w).unwrap().is_ok(), "n={n} ray={ray:?} ({lambda})");
                        assert!(verify_stratum(&f, &lambda, &w).unwrap().is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn infeasible_strict_base_is_named() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let base = p(&[4, 3, 2, 1]);
        let f = loop {
            let c: Vec<i64> = (0..4).map(|_| rng.gen_range(-4..=4)).collect();
            let f = f_of(10, &c);
            if find_certificate(&expression(&f, &base)).is_none() {
                break f;
            }
        };
        let mut certifier = Certifier::new(&f);
        for lambda in [p(&[4, 3, 2, 1]), p(&[4, 3, 1, 1, 1])] {
            match certifier.certify(&lambda) {
                Err(Error::StrictBaseInfeasible(named)) => assert_eq!(named, base),
                other => panic!("unexpected {other:?}"),
            }
        }
    }
}
