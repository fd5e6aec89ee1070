//! End-to-end nefness certificates for symmetric divisors.
//!
//! A certificate lists every stratum of the chosen mode with a weight function
//! proving its pullback is an effective boundary. [`verify`] re-derives all
//! constraints from the embedded divisor and trusts nothing else.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::ascent::{Certifier, PartitionCertificate, Provenance};
use crate::combinatorics::{four_quads, partitions_of, reduction_path, FQuad, Partition, PartitionFilter};
use crate::divisor::{f_from_symmetric, f_inequality_value, is_fnef, FFunction, FNefVerdict, SymmetricDivisor};
use crate::effective::Violation;
use crate::error::{Error, Result};
use crate::pullback::verify_stratum;
use crate::rational::Rational;

/// Policy identifiers embedded in every certificate.
pub const MERGE_POLICY: &str = "largest-repeated-value";
pub const MARKER_ORDER: &str = "decreasing-parts";
pub const SYMMETRIZATION: &str = "equal-parts-average";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Strict partitions only, enough for nefness of an F-nef divisor.
    StrictOnly,
    /// Every partition, non-strict ones by ascent.
    AllPartitions,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::StrictOnly => "strict",
            Mode::AllPartitions => "all",
        }
    }

    pub fn filter(&self) -> PartitionFilter {
        match self {
            Mode::StrictOnly => PartitionFilter::Strict,
            Mode::AllPartitions => PartitionFilter::All,
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::StrictOnly),
            "all" => Ok(Mode::AllPartitions),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?}, expected \"strict\" or \"all\""))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metadata {
    pub tool_version: String,
    pub merge_policy: String,
    pub marker_order: String,
    pub symmetrization: String,
}

impl Default for Metadata {
    fn default() -> Self {
        Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            merge_policy: MERGE_POLICY.to_string(),
            marker_order: MARKER_ORDER.to_string(),
            symmetrization: SYMMETRIZATION.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NefCertificate {
    pub divisor: SymmetricDivisor,
    pub mode: Mode,
    /// One entry per partition of `n` admitted by the mode, in enumeration order.
    pub entries: Vec<PartitionCertificate>,
    pub metadata: Metadata,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    NotFNef { witness: FQuad, value: Rational },
    StrictBaseInfeasible { partition: Partition, base: Partition },
    Stratum { partition: Partition, message: String },
}

impl Failure {
    pub fn stage(&self) -> &'static str {
        match self {
            Failure::NotFNef { .. } => "f-nef",
            Failure::StrictBaseInfeasible { .. } => "strict-base",
            Failure::Stratum { .. } => "stratum",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::NotFNef { witness, value } => write!(f, "not F-nef: F-curve {witness} has degree {value}"),
            Failure::StrictBaseInfeasible { partition, base } => {
                write!(f, "({partition}): strict base ({base}) is not an effective boundary")
            }
            Failure::Stratum { partition, message } => write!(f, "({partition}): {message}"),
        }
    }
}

/// Failures in deterministic order; fail-fast runs hold exactly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureReport {
    pub failures: Vec<Failure>,
}

fn stratum_failure(partition: &Partition, err: Error) -> Failure {
    match err {
        Error::StrictBaseInfeasible(base) => Failure::StrictBaseInfeasible { partition: partition.clone(), base },
        other => Failure::Stratum { partition: partition.clone(), message: other.to_string() },
    }
}

fn run(divisor: &SymmetricDivisor, mode: Mode, exhaustive: bool) -> std::result::Result<NefCertificate, FailureReport> {
    let mut failures = Vec::new();
    let f = f_from_symmetric(divisor);
    if exhaustive {
        for quad in four_quads(divisor.n()).expect("divisors have n >= 4") {
            let value = f_inequality_value(&f, &quad);
            if value.is_negative() {
                failures.push(Failure::NotFNef { witness: quad, value });
            }
        }
    } else if let FNefVerdict::No { witness, value } = is_fnef(divisor) {
        return Err(FailureReport { failures: vec![Failure::NotFNef { witness, value }] });
    }
    let mut certifier = Certifier::new(&f);
    let mut entries = Vec::new();
    for lambda in partitions_of(divisor.n(), mode.filter()) {
        match certifier.certify(&lambda) {
            Ok(entry) => entries.push(entry),
            Err(err) => {
                failures.push(stratum_failure(&lambda, err));
                if !exhaustive {
                    break;
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(NefCertificate { divisor: divisor.clone(), mode, entries, metadata: Metadata::default() })
    } else {
        Err(FailureReport { failures })
    }
}

/// Certifies every stratum of the mode, stopping at the first failure.
pub fn certify(divisor: &SymmetricDivisor, mode: Mode) -> std::result::Result<NefCertificate, FailureReport> {
    run(divisor, mode, false)
}

/// Like [`certify`] but keeps going and reports every failure.
pub fn certify_exhaustive(
    divisor: &SymmetricDivisor,
    mode: Mode,
) -> std::result::Result<NefCertificate, FailureReport> {
    run(divisor, mode, true)
}

/// The first problem [`verify`] finds with a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Discrepancy {
    NotFNef { witness: FQuad, value: Rational },
    Policy { field: &'static str, found: String, expected: String },
    UnexpectedEntry { partition: Partition },
    DuplicateEntry { partition: Partition },
    MissingEntry { partition: Partition },
    OutOfOrder { position: usize, partition: Partition },
    Provenance { partition: Partition, found: Provenance, expected: Provenance },
    MergePath { partition: Partition },
    Weights { partition: Partition, message: String },
    Constraint { partition: Partition, violation: Box<Violation> },
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Discrepancy::NotFNef { witness, value } => {
                write!(f, "divisor is not F-nef: F-curve {witness} has degree {value}")
            }
            Discrepancy::Policy { field, found, expected } => {
                write!(f, "metadata {field} is {found:?}, expected {expected:?}")
            }
            Discrepancy::UnexpectedEntry { partition } => write!(f, "({partition}): not a stratum of this mode"),
            Discrepancy::DuplicateEntry { partition } => write!(f, "({partition}): listed more than once"),
            Discrepancy::MissingEntry { partition } => write!(f, "({partition}): missing entry"),
            Discrepancy::OutOfOrder { position, partition } => {
                write!(f, "entry {position} ({partition}) is out of canonical order")
            }
            Discrepancy::Provenance { partition, found, expected } => {
                write!(f, "({partition}): provenance {found}, expected {expected}")
            }
            Discrepancy::MergePath { partition } => write!(f, "({partition}): merge path differs from the policy"),
            Discrepancy::Weights { partition, message } => write!(f, "({partition}): {message}"),
            Discrepancy::Constraint { partition, violation } => write!(f, "({partition}): {violation}"),
        }
    }
}

fn expected_provenance(lambda: &Partition) -> Provenance {
    if lambda.len() <= 2 {
        Provenance::Degenerate
    } else if lambda.is_strict() {
        Provenance::Feasibility
    } else {
        Provenance::AscentChain
    }
}

fn verify_entry(f: &FFunction, entry: &PartitionCertificate) -> std::result::Result<(), Discrepancy> {
    let lambda = &entry.partition;
    let expected = expected_provenance(lambda);
    if entry.provenance != expected {
        return Err(Discrepancy::Provenance { partition: lambda.clone(), found: entry.provenance, expected });
    }
    let policy_path = if expected == Provenance::AscentChain { reduction_path(lambda) } else { Vec::new() };
    if entry.merge_path != policy_path {
        return Err(Discrepancy::MergePath { partition: lambda.clone() });
    }
    let weights_error = |message: String| Discrepancy::Weights { partition: lambda.clone(), message };
    match (&entry.weights, expected) {
        (None, Provenance::Degenerate) => Ok(()),
        (Some(_), Provenance::Degenerate) => Err(weights_error("degenerate stratum carries weights".into())),
        (None, _) => Err(weights_error("weights are missing".into())),
        (Some(w), _) => {
            let report = verify_stratum(f, lambda, w).map_err(|e| weights_error(e.to_string()))?;
            match report.violations.into_iter().next() {
                Some(violation) => Err(Discrepancy::Constraint { partition: lambda.clone(), violation: Box::new(violation) }),
                None => Ok(()),
            }
        }
    }
}

/// Independently audits a certificate: F-nefness, policy, coverage, order and
/// every stratum's constraints, all recomputed from the divisor.
pub fn verify(cert: &NefCertificate) -> std::result::Result<(), Discrepancy> {
    if let FNefVerdict::No { witness, value } = is_fnef(&cert.divisor) {
        return Err(Discrepancy::NotFNef { witness, value });
    }
    let policy = [
        ("merge_policy", &cert.metadata.merge_policy, MERGE_POLICY),
        ("marker_order", &cert.metadata.marker_order, MARKER_ORDER),
        ("symmetrization", &cert.metadata.symmetrization, SYMMETRIZATION),
    ];
    for (field, found, expected) in policy {
        if found != expected {
            return Err(Discrepancy::Policy { field, found: found.clone(), expected: expected.to_string() });
        }
    }
    let expected = partitions_of(cert.divisor.n(), cert.mode.filter());
    let admitted: HashSet<&Partition> = expected.iter().collect();
    let mut listed = HashSet::new();
    for entry in &cert.entries {
        if !admitted.contains(&entry.partition) {
            return Err(Discrepancy::UnexpectedEntry { partition: entry.partition.clone() });
        }
        if !listed.insert(&entry.partition) {
            return Err(Discrepancy::DuplicateEntry { partition: entry.partition.clone() });
        }
    }
    if let Some(missing) = expected.iter().find(|p| !listed.contains(p)) {
        return Err(Discrepancy::MissingEntry { partition: missing.clone() });
    }
    for (position, (entry, lambda)) in cert.entries.iter().zip(&expected).enumerate() {
        if &entry.partition != lambda {
            return Err(Discrepancy::OutOfOrder { position, partition: entry.partition.clone() });
        }
    }
    let f = f_from_symmetric(&cert.divisor);
    cert.entries.iter().try_for_each(|entry| verify_entry(&f, entry))
}

/// `(k+1)(k+2)/2 - 1`: the largest `n` all of whose strict partitions have at most `k` parts.
pub fn conjecture_bound(k: usize) -> Result<usize> {
    if k < 3 {
        return Err(Error::Precondition(format!("conjecture_bound needs k >= 3, got {k}")));
    }
    Ok((k + 1) * (k + 2) / 2 - 1)
}
