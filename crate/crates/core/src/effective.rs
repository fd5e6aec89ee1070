//! Effective-boundary decisions through weight functions on pairs of markers.
//!
//! `D = -sum b_{I,J} Delta_{I,J}` is an effective boundary on `M_{0,m}` iff some
//! `w` has cut value `sum_{i in I, j in J} w(i,j) >= b_{I,J}` on every proper
//! split, with equality on the `m` non-proper ones.

use std::fmt;

use num_traits::Zero;

use crate::combinatorics::TwoPartSplit;
use crate::divisor::{BoundaryExpression, PairFunction};
use crate::elimination::feasible_by_fourier_motzkin;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::simplex::{find_feasible_point, Row};

pub type WeightCertificate = PairFunction;

/// Largest `m` accepted by [`feasible_by_elimination`].
pub const MAX_ELIMINATION_MARKERS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Non-proper split, cut value must equal `b`.
    Equality,
    /// Proper split, cut value must be at least `b`.
    Inequality,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub split: TwoPartSplit,
    pub kind: ConstraintKind,
    pub cut: Rational,
    pub required: Rational,
}

impl Violation {
    /// `cut - required`; negative for a failed inequality, nonzero for a failed equality.
    pub fn margin(&self) -> Rational {
        &self.cut - &self.required
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.kind {
            ConstraintKind::Equality => "=",
            ConstraintKind::Inequality => ">=",
        };
        write!(
            f,
            "split {{{}}}: cut {} {rel} {} fails (margin {})",
            self.split,
            self.cut,
            self.required,
            self.margin()
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks one constraint and records it when violated.
pub(crate) fn check_constraint(
    report: &mut VerificationReport,
    split: TwoPartSplit,
    cut: Rational,
    required: &Rational,
) {
    let kind = if split.is_proper() { ConstraintKind::Inequality } else { ConstraintKind::Equality };
    let ok = match kind {
        ConstraintKind::Equality => &cut == required,
        ConstraintKind::Inequality => &cut >= required,
    };
    if !ok {
        report.violations.push(Violation { split, kind, cut, required: required.clone() });
    }
}

fn cut_row(m: usize, split: &TwoPartSplit) -> Vec<Rational> {
    let mut coeffs = Vec::with_capacity(m * (m - 1) / 2);
    let one = Rational::from_integer(1);
    for i in 0..m {
        for j in i + 1..m {
            let crosses = (split.side >> i & 1) != (split.side >> j & 1);
            coeffs.push(if crosses { one.clone() } else { Rational::zero() });
        }
    }
    coeffs
}

fn constraint_rows(expr: &BoundaryExpression) -> (Vec<Row>, Vec<Row>) {
    let m = expr.m();
    let (mut eqs, mut ges) = (Vec::new(), Vec::new());
    for (split, b) in expr.splits() {
        let row = Row { coeffs: cut_row(m, &split), rhs: b.clone() };
        if split.is_proper() {
            ges.push(row);
        } else {
            eqs.push(row);
        }
    }
    (eqs, ges)
}

fn pair_function_from_vec(m: usize, x: Vec<Rational>) -> PairFunction {
    // Variables are ordered (0,1),(0,2),..,(0,m-1),(1,2),.. as in `cut_row`.
    let mut values = x.into_iter();
    let mut w = PairFunction::zero(m);
    for i in 0..m {
        for j in i + 1..m {
            w.set(i, j, values.next().expect("one value per pair"));
        }
    }
    w
}

/// Searches for a weight certificate by exact phase-1 simplex; `None` means infeasible.
pub fn find_certificate(expr: &BoundaryExpression) -> Option<WeightCertificate> {
    let m = expr.m();
    let (eqs, ges) = constraint_rows(expr);
    find_feasible_point(m * (m - 1) / 2, &eqs, &ges).map(|x| pair_function_from_vec(m, x))
}

/// Re-checks every constraint against `w` and lists the violated ones.
pub fn verify_certificate(expr: &BoundaryExpression, w: &WeightCertificate) -> Result<VerificationReport> {
    if w.m() != expr.m() {
        return Err(Error::DimensionMismatch { expected: expr.m(), got: w.m() });
    }
    let mut report = VerificationReport::default();
    for (split, b) in expr.splits() {
        check_constraint(&mut report, split, w.cut_value(split.side), b);
    }
    Ok(report)
}

/// Nonnegative coefficients on proper boundary divisors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveCombination {
    pub m: usize,
    pub coeffs: Vec<(TwoPartSplit, Rational)>,
}

impl EffectiveCombination {
    pub fn min_coefficient(&self) -> Option<&Rational> {
        self.coeffs.iter().map(|(_, c)| c).min()
    }
}

/// `c_{I,J} = cut_w(I,J) - b_{I,J}` on proper splits.
pub fn effective_combination(expr: &BoundaryExpression, w: &WeightCertificate) -> Result<EffectiveCombination> {
    let report = verify_certificate(expr, w)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::Precondition(format!("certificate does not verify: {v}")));
    }
    let coeffs = expr
        .splits()
        .filter(|(s, _)| s.is_proper())
        .map(|(s, b)| (s, w.cut_value(s.side) - b))
        .collect();
    Ok(EffectiveCombination { m: expr.m(), coeffs })
}

/// Feasibility by Fourier-Motzkin elimination, independent of the simplex path.
pub fn feasible_by_elimination(expr: &BoundaryExpression) -> Result<bool> {
    let m = expr.m();
    if m > MAX_ELIMINATION_MARKERS {
        return Err(Error::TooLarge(format!(
            "elimination oracle is limited to m <= {MAX_ELIMINATION_MARKERS}, got {m}"
        )));
    }
    let (eqs, ges) = constraint_rows(expr);
    Ok(feasible_by_fourier_motzkin(m * (m - 1) / 2, &eqs, &ges))
}
