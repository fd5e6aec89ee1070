//! Pullbacks of a symmetric divisor along the boundary strata `b_lambda`.
//!
//! Marker `t` of `M_{0,k}` carries part `lambda_t` in weakly decreasing order.
//! A split `I | J` pulls back with coefficient `f(sum_{t in I} lambda_t)`.

use num_integer::Integer;
use num_traits::Zero;

use crate::combinatorics::{Partition, TwoPartSplit, MAX_SPLIT_MARKERS};
use crate::divisor::{BoundaryExpression, FFunction, PairFunction};
use crate::effective::{check_constraint, verify_certificate, VerificationReport};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest stratum length handled by [`verify_stratum`].
pub const MAX_STRATUM_MARKERS: usize = 63;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pullback {
    /// Length at most two: the stratum has no moduli.
    Degenerate,
    Expression(BoundaryExpression),
}

fn check_total(f: &FFunction, lambda: &Partition) -> Result<()> {
    if lambda.total() != f.n() {
        return Err(Error::InvalidPartition(format!(
            "({lambda}) is a partition of {}, expected {}",
            lambda.total(),
            f.n()
        )));
    }
    Ok(())
}

fn side_sum(lambda: &Partition, side: u64) -> usize {
    lambda
        .parts()
        .iter()
        .enumerate()
        .filter(|(t, _)| side >> t & 1 == 1)
        .map(|(_, &p)| p)
        .sum()
}

/// The boundary expression of `b_lambda^* L`. Materializes all `2^(k-1) - 1`
/// splits, so `k` is limited to [`MAX_SPLIT_MARKERS`].
pub fn pullback(f: &FFunction, lambda: &Partition) -> Result<Pullback> {
    check_total(f, lambda)?;
    if lambda.len() <= 2 {
        return Ok(Pullback::Degenerate);
    }
    let expr = BoundaryExpression::from_fn(lambda.len(), |s| f.at(side_sum(lambda, s.side)).clone())?;
    Ok(Pullback::Expression(expr))
}

/// Index of the value class of each marker; classes follow [`Partition::value_classes`].
pub fn marker_classes(lambda: &Partition) -> Vec<usize> {
    let mut classes = Vec::with_capacity(lambda.len());
    for (c, (_, count)) in lambda.value_classes().into_iter().enumerate() {
        classes.extend(std::iter::repeat_n(c, count));
    }
    classes
}

/// Whether `w(i, j)` depends only on the parts `lambda_i` and `lambda_j`.
pub fn is_stratum_symmetric(lambda: &Partition, w: &PairFunction) -> bool {
    if w.m() != lambda.len() {
        return false;
    }
    let class = marker_classes(lambda);
    let classes = lambda.value_classes().len();
    let mut seen: Vec<Option<&Rational>> = vec![None; classes * classes];
    w.pairs().all(|((i, j), v)| {
        let slot = &mut seen[class[i] * classes + class[j]];
        match slot {
            Some(first) => *first == v,
            None => {
                *slot = Some(v);
                true
            }
        }
    })
}

/// Averages `w` over all permutations of markers carrying equal parts.
///
/// The constraints of a stratum are invariant under these permutations and
/// convex, so the average of a valid certificate is again valid.
pub fn symmetrize(lambda: &Partition, w: &PairFunction) -> Result<PairFunction> {
    if w.m() != lambda.len() {
        return Err(Error::DimensionMismatch { expected: lambda.len(), got: w.m() });
    }
    let class = marker_classes(lambda);
    let classes = lambda.value_classes().len();
    let mut sums = vec![Rational::zero(); classes * classes];
    let mut counts = vec![0i64; classes * classes];
    for ((i, j), v) in w.pairs() {
        let slot = class[i] * classes + class[j];
        sums[slot] += v;
        counts[slot] += 1;
    }
    let means: Vec<Rational> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { Rational::zero() } else { s / &Rational::from_integer(c) })
        .collect();
    Ok(PairFunction::from_fn(w.m(), |i, j| means[class[i] * classes + class[j]].clone()))
}

/// Checks `w` against `b_lambda^* L` without building the expression when
/// `w` is symmetric under equal parts: one representative split per orbit.
/// Other certificates are checked split by split.
pub fn verify_stratum(f: &FFunction, lambda: &Partition, w: &PairFunction) -> Result<VerificationReport> {
    check_total(f, lambda)?;
    let k = lambda.len();
    if k <= 2 {
        return Err(Error::Precondition(format!("stratum ({lambda}) is degenerate")));
    }
    if w.m() != k {
        return Err(Error::DimensionMismatch { expected: k, got: w.m() });
    }
    if !is_stratum_symmetric(lambda, w) {
        if k > MAX_SPLIT_MARKERS {
            return Err(Error::TooLarge(format!(
                "certificate for ({lambda}) is not symmetric and has {k} > {MAX_SPLIT_MARKERS} markers"
            )));
        }
        let Pullback::Expression(expr) = pullback(f, lambda)? else {
            unreachable!("length checked above")
        };
        return verify_certificate(&expr, w);
    }
    if k > MAX_STRATUM_MARKERS {
        return Err(Error::TooLarge(format!("{k} markers exceed {MAX_STRATUM_MARKERS}")));
    }
    verify_orbits(f, lambda, w)
}

/// Weights and f-values multiplied by a common denominator, when everything fits.
struct Scaled {
    weight: Vec<i128>,
    f: Vec<i128>,
}

fn scaled(weight: &[Rational], f: &FFunction) -> Option<Scaled> {
    let parts: Vec<(i64, i64)> = weight.iter().chain(f.values()).map(Rational::small_parts).collect::<Option<_>>()?;
    let mut lcm: i128 = 1;
    for &(_, den) in &parts {
        let den = den as i128;
        lcm = lcm.checked_mul(den / lcm.gcd(&den))?;
    }
    let mut values = parts.iter().map(|&(num, den)| (num as i128).checked_mul(lcm / den as i128));
    let weight = values.by_ref().take(weight.len()).collect::<Option<_>>()?;
    let f = values.collect::<Option<_>>()?;
    Some(Scaled { weight, f })
}

fn verify_orbits(f: &FFunction, lambda: &Partition, w: &PairFunction) -> Result<VerificationReport> {
    let value_classes = lambda.value_classes();
    let classes = value_classes.len();
    let sizes: Vec<usize> = value_classes.iter().map(|&(_, c)| c).collect();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect();
    // Weight between a marker of class c and a marker of class d.
    let mut weight = vec![Rational::zero(); classes * classes];
    for c in 0..classes {
        for d in 0..classes {
            let (i, j) = if c == d { (offsets[c], offsets[c] + 1) } else { (offsets[c], offsets[d]) };
            if j < offsets[d] + sizes[d] {
                weight[c * classes + d] = w.get(i, j).clone();
            }
        }
    }
    let fast = scaled(&weight, f);
    let n = f.n();
    let k = lambda.len();
    let mut report = VerificationReport::default();
    // Orbits of canonical splits: how many markers of each class lie on the
    // side of marker 1, with at least one from class 0 and not all markers.
    let mut x = vec![0usize; classes];
    x[0] = 1;
    loop {
        let on_side: usize = x.iter().sum();
        if on_side < k {
            let total: usize = x.iter().zip(&value_classes).map(|(&count, &(v, _))| count * v).sum();
            let proper = on_side >= 2 && k - on_side >= 2;
            let holds = fast.as_ref().and_then(|s| {
                let mut cut: i128 = 0;
                for c in 0..classes {
                    for d in 0..classes {
                        let pairs = (x[c] * (sizes[d] - x[d])) as i128;
                        cut = cut.checked_add(pairs.checked_mul(s.weight[c * classes + d])?)?;
                    }
                }
                let required = s.f[total % n];
                Some(if proper { cut >= required } else { cut == required })
            });
            if holds != Some(true) {
                let mut cut = Rational::zero();
                for c in 0..classes {
                    for d in 0..classes {
                        let pairs = x[c] * (sizes[d] - x[d]);
                        if pairs > 0 {
                            cut += &weight[c * classes + d] * &Rational::from_integer(pairs as i64);
                        }
                    }
                }
                let side = x
                    .iter()
                    .zip(&offsets)
                    .fold(0u64, |acc, (&count, &start)| acc | (((1u64 << count) - 1) << start));
                check_constraint(&mut report, TwoPartSplit::from_side(k, side)?, cut, f.at(total));
            }
        }
        // Mixed-radix increment with x[0] in 1..=sizes[0].
        let mut c = 0;
        loop {
            if c == classes {
                return Ok(report);
            }
            if x[c] < sizes[c] {
                x[c] += 1;
                break;
            }
            x[c] = if c == 0 { 1 } else { 0 };
            c += 1;
        }
    }
}
