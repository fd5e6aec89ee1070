//! JSON formats for divisors, certificates, rays, pullbacks and reports.
//!
//! Rationals are strings in lowest terms (`"-3/2"`, `"4"`), object keys are
//! sorted, and unknown fields are rejected. Markers and pairs are 1-based.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::ascent::{PartitionCertificate, Provenance};
use crate::combinatorics::{MergeStep, Partition};
use crate::cone::ConeDescription;
use crate::divisor::{BoundaryExpression, FNefVerdict, PairFunction, SymmetricDivisor};
use crate::effective::{ConstraintKind, Violation};
use crate::error::{Error, Result};
use crate::pipeline::{Discrepancy, Failure, FailureReport, Metadata, Mode, NefCertificate};
use crate::rational::{format_rational, parse_rational, Rational};

pub const SCHEMA_VERSION: u64 = 1;

fn format_error(err: serde_json::Error) -> Error {
    Error::Format(err.to_string())
}

fn check_version(version: Option<u64>) -> Result<()> {
    match version {
        None | Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(Error::SchemaVersion(v)),
    }
}

fn rational_value(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

fn field_rational(field: &str, s: &str) -> Result<Rational> {
    parse_rational(s).map_err(|e| Error::Format(format!("{field}: {e}")))
}

/// Serializes with sorted keys and a trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("values always serialize");
    out.push('\n');
    out
}

fn to_compact(value: &Value) -> String {
    let mut out = serde_json::to_string(value).expect("values always serialize");
    out.push('\n');
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisorFile {
    schema_version: Option<u64>,
    n: usize,
    #[serde(default)]
    coeffs: BTreeMap<String, String>,
}

impl DivisorFile {
    fn into_divisor(self) -> Result<SymmetricDivisor> {
        check_version(self.schema_version)?;
        let n = self.n;
        if n < 4 {
            return Err(Error::Format(format!("n must be at least 4, got {n}")));
        }
        let mut coeffs = vec![Rational::from_integer(0); n / 2 - 1];
        for (key, value) in &self.coeffs {
            let i: usize = key
                .parse()
                .ok()
                .filter(|_| key.bytes().all(|b| b.is_ascii_digit()))
                .ok_or_else(|| Error::Format(format!("coeffs: key {key:?} is not an index")))?;
            if !(2..=n / 2).contains(&i) {
                return Err(Error::Format(format!(
                    "coeffs: key {i} out of range 2..={} for n = {n}",
                    n / 2
                )));
            }
            coeffs[i - 2] = field_rational(&format!("coeffs.{key}"), value)?;
        }
        SymmetricDivisor::new(n, coeffs)
    }
}

fn divisor_value(divisor: &SymmetricDivisor) -> Value {
    let coeffs: Map<String, Value> = divisor
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| ((i + 2).to_string(), rational_value(c)))
        .collect();
    json!({"schema_version": SCHEMA_VERSION, "n": divisor.n(), "coeffs": coeffs})
}

/// Parses a divisor file; missing coefficients are zero.
pub fn parse_divisor(bytes: &[u8]) -> Result<SymmetricDivisor> {
    let file: DivisorFile = serde_json::from_slice(bytes).map_err(format_error)?;
    file.into_divisor()
}

pub fn emit_divisor(divisor: &SymmetricDivisor) -> String {
    to_pretty(&divisor_value(divisor))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairEntry {
    pair: [usize; 2],
    value: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    m: usize,
    w: Vec<PairEntry>,
}

impl WeightsFile {
    fn into_pair_function(self, context: &str) -> Result<PairFunction> {
        let m = self.m;
        let expected: Vec<(usize, usize)> = (1..=m).flat_map(|i| (i + 1..=m).map(move |j| (i, j))).collect();
        if self.w.len() != expected.len() {
            return Err(Error::Format(format!(
                "{context}: expected {} pairs for m = {m}, got {}",
                expected.len(),
                self.w.len()
            )));
        }
        let mut w = PairFunction::zero(m);
        for (entry, &(i, j)) in self.w.iter().zip(&expected) {
            if entry.pair != [i, j] {
                return Err(Error::Format(format!(
                    "{context}: pair {:?} found where [{i}, {j}] was expected",
                    entry.pair
                )));
            }
            w.set(i - 1, j - 1, field_rational(&format!("{context} pair [{i}, {j}]"), &entry.value)?);
        }
        Ok(w)
    }
}

/// `{"m": m, "w": [{"pair": [i, j], "value": "p/q"}, ..]}` with 1-based `i < j`.
pub fn weights_value(w: &PairFunction) -> Value {
    let pairs: Vec<Value> = w
        .pairs()
        .map(|((i, j), v)| json!({"pair": [i + 1, j + 1], "value": rational_value(v)}))
        .collect();
    json!({"m": w.m(), "w": pairs})
}

pub fn parse_weights(bytes: &[u8]) -> Result<PairFunction> {
    let file: WeightsFile = serde_json::from_slice(bytes).map_err(format_error)?;
    file.into_pair_function("weights")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MergeStepFile {
    partition: Vec<usize>,
    merged_value: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CertificateField {
    Marker(String),
    Weights(WeightsFile),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    partition: Vec<usize>,
    provenance: String,
    certificate: CertificateField,
    #[serde(default)]
    merge_path: Vec<MergeStepFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetadataFile {
    tool_version: String,
    merge_policy: String,
    marker_order: String,
    symmetrization: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateFile {
    schema_version: u64,
    divisor: DivisorFile,
    mode: String,
    metadata: MetadataFile,
    entries: Vec<EntryFile>,
}

fn partition_from(parts: Vec<usize>, context: &str) -> Result<Partition> {
    if parts.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Format(format!("{context}: parts {parts:?} are not weakly decreasing")));
    }
    Partition::new(parts).map_err(|e| Error::Format(format!("{context}: {e}")))
}

fn provenance_from(s: &str, context: &str) -> Result<Provenance> {
    match s {
        "feasibility" => Ok(Provenance::Feasibility),
        "ascent-chain" => Ok(Provenance::AscentChain),
        "degenerate" => Ok(Provenance::Degenerate),
        _ => Err(Error::Format(format!("{context}: unknown provenance {s:?}"))),
    }
}

impl EntryFile {
    fn into_entry(self, index: usize) -> Result<PartitionCertificate> {
        let context = format!("entries[{index}]");
        let partition = partition_from(self.partition, &context)?;
        let provenance = provenance_from(&self.provenance, &context)?;
        let weights = match self.certificate {
            CertificateField::Marker(s) if s == "degenerate" => None,
            CertificateField::Marker(s) => {
                return Err(Error::Format(format!("{context}: certificate must be an object or \"degenerate\", got {s:?}")))
            }
            CertificateField::Weights(w) => Some(w.into_pair_function(&context)?),
        };
        let merge_path = self
            .merge_path
            .into_iter()
            .map(|step| {
                Ok(MergeStep {
                    partition: partition_from(step.partition, &format!("{context}.merge_path"))?,
                    merged_value: step.merged_value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PartitionCertificate { partition, weights, provenance, merge_path })
    }
}

fn partition_value(p: &Partition) -> Value {
    json!(p.parts())
}

fn entry_value(entry: &PartitionCertificate) -> Value {
    let mut obj = Map::new();
    obj.insert("partition".into(), partition_value(&entry.partition));
    obj.insert("provenance".into(), json!(entry.provenance.as_str()));
    obj.insert(
        "certificate".into(),
        match &entry.weights {
            Some(w) => weights_value(w),
            None => json!("degenerate"),
        },
    );
    if !entry.merge_path.is_empty() {
        let path: Vec<Value> = entry
            .merge_path
            .iter()
            .map(|s| json!({"partition": partition_value(&s.partition), "merged_value": s.merged_value}))
            .collect();
        obj.insert("merge_path".into(), Value::Array(path));
    }
    Value::Object(obj)
}

/// Compact JSON: certificates for large `n` hold many thousands of entries.
pub fn emit_certificate(cert: &NefCertificate) -> String {
    let m = &cert.metadata;
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "divisor": divisor_value(&cert.divisor),
        "mode": cert.mode.as_str(),
        "metadata": {
            "tool_version": m.tool_version,
            "merge_policy": m.merge_policy,
            "marker_order": m.marker_order,
            "symmetrization": m.symmetrization,
        },
        "entries": cert.entries.iter().map(entry_value).collect::<Vec<_>>(),
    });
    to_compact(&value)
}

pub fn parse_certificate(bytes: &[u8]) -> Result<NefCertificate> {
    // Read the version first so a future layout reports the version, not a field error.
    #[derive(Deserialize)]
    struct Version {
        schema_version: Option<u64>,
    }
    let version: Version = serde_json::from_slice(bytes).map_err(format_error)?;
    match version.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(Error::SchemaVersion(v)),
        None => return Err(Error::Format("missing field `schema_version`".into())),
    }
    let file: CertificateFile = serde_json::from_slice(bytes).map_err(format_error)?;
    check_version(Some(file.schema_version))?;
    let mode: Mode = file.mode.parse().map_err(|e: Error| Error::Format(format!("mode: {e}")))?;
    let divisor = file.divisor.into_divisor()?;
    let entries = file
        .entries
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.into_entry(i))
        .collect::<Result<Vec<_>>>()?;
    let m = file.metadata;
    let metadata = Metadata {
        tool_version: m.tool_version,
        merge_policy: m.merge_policy,
        marker_order: m.marker_order,
        symmetrization: m.symmetrization,
    };
    Ok(NefCertificate { divisor, mode, entries, metadata })
}

/// `{"n": n, "rays": [..], "facets": [..]}`; rays are empty when not enumerated.
pub fn rays_value(cone: &ConeDescription) -> Value {
    let facets: Vec<&Vec<i64>> = cone.facets.iter().map(|f| &f.form).collect();
    json!({"n": cone.n, "rays": cone.rays.clone().unwrap_or_default(), "facets": facets})
}

/// The b-map keyed by the 1-based markers of the side containing marker 1.
pub fn pullback_value(expr: &BoundaryExpression) -> Value {
    let map: Map<String, Value> = expr.splits().map(|(s, b)| (s.to_string(), rational_value(b))).collect();
    Value::Object(map)
}

pub fn fnef_value(verdict: &FNefVerdict) -> Value {
    match verdict {
        FNefVerdict::Yes => json!({"fnef": true}),
        FNefVerdict::No { witness, value } => json!({
            "fnef": false,
            "witness": witness.quad,
            "value": rational_value(value),
        }),
    }
}

fn failure_value(failure: &Failure) -> Value {
    let mut v = match failure {
        Failure::NotFNef { witness, value } => json!({"witness": witness.quad, "value": rational_value(value)}),
        Failure::StrictBaseInfeasible { partition, base } => {
            json!({"partition": partition_value(partition), "base": partition_value(base)})
        }
        Failure::Stratum { partition, message } => json!({"partition": partition_value(partition), "message": message}),
    };
    v["stage"] = json!(failure.stage());
    v["description"] = json!(failure.to_string());
    v
}

pub fn failure_report_value(report: &FailureReport) -> Value {
    json!({
        "status": "failure",
        "failures": report.failures.iter().map(failure_value).collect::<Vec<_>>(),
    })
}

fn violation_value(v: &Violation) -> Value {
    json!({
        "split": v.split.to_string(),
        "kind": match v.kind {
            ConstraintKind::Equality => "equality",
            ConstraintKind::Inequality => "inequality",
        },
        "cut": rational_value(&v.cut),
        "required": rational_value(&v.required),
        "margin": rational_value(&v.margin()),
    })
}

pub fn discrepancy_value(d: &Discrepancy) -> Value {
    let (kind, mut detail) = match d {
        Discrepancy::NotFNef { witness, value } => {
            ("not-fnef", json!({"witness": witness.quad, "value": rational_value(value)}))
        }
        Discrepancy::Policy { field, found, expected } => {
            ("policy", json!({"field": field, "found": found, "expected": expected}))
        }
        Discrepancy::UnexpectedEntry { partition } => ("unexpected-entry", json!({"partition": partition_value(partition)})),
        Discrepancy::DuplicateEntry { partition } => ("duplicate-entry", json!({"partition": partition_value(partition)})),
        Discrepancy::MissingEntry { partition } => ("missing-entry", json!({"partition": partition_value(partition)})),
        Discrepancy::OutOfOrder { position, partition } => {
            ("out-of-order", json!({"position": position, "partition": partition_value(partition)}))
        }
        Discrepancy::Provenance { partition, found, expected } => (
            "provenance",
            json!({"partition": partition_value(partition), "found": found.as_str(), "expected": expected.as_str()}),
        ),
        Discrepancy::MergePath { partition } => ("merge-path", json!({"partition": partition_value(partition)})),
        Discrepancy::Weights { partition, message } => {
            ("weights", json!({"partition": partition_value(partition), "message": message}))
        }
        Discrepancy::Constraint { partition, violation } => (
            "constraint",
            json!({"partition": partition_value(partition), "violation": violation_value(violation)}),
        ),
    };
    detail["kind"] = json!(kind);
    detail["description"] = json!(d.to_string());
    detail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{certify, verify};
    use crate::rational::{int, ratio};

    fn six() -> SymmetricDivisor {
        SymmetricDivisor::from_integers(6, &[1, 3]).unwrap()
    }

    #[test]
    fn divisor_examples() {
        assert_eq!(parse_divisor(br#"{"n":6,"coeffs":{"2":"1","3":"3"}}"#).unwrap(), six());
        assert_eq!(parse_divisor(br#"{"n":6,"coeffs":{}}"#).unwrap(), SymmetricDivisor::zero(6).unwrap());
        let err = parse_divisor(br#"{"n":6,"coeffs":{"4":"1"}}"#).unwrap_err().to_string();
        assert!(err.contains("out of range"), "{err}");
    }

    #[test]
    fn divisor_errors() {
        let cases: [&[u8]; 8] = [
            br#"{"n":3,"coeffs":{}}"#,
            br#"{"n":6,"coeffs":{"2":"1/0"}}"#,
            br#"{"n":6,"coeffs":{"2":"one"}}"#,
            br#"{"n":6,"coeffs":{"x":"1"}}"#,
            br#"{"n":6,"coeffs":{"+2":"1"}}"#,
            br#"{"n":6,"coeffs":{},"extra":1}"#,
            br#"{"n":6,"coeffs":{"2":1}}"#,
            br#"{"n":6,"#,
        ];
        for bytes in cases {
            assert!(matches!(parse_divisor(bytes), Err(Error::Format(_))), "{}", String::from_utf8_lossy(bytes));
        }
        assert!(matches!(
            parse_divisor(br#"{"schema_version":2,"n":6,"coeffs":{}}"#),
            Err(Error::SchemaVersion(2))
        ));
        let err = parse_divisor(b"{\n  \"n\": 6,\n  \"coeffs\": [1]\n}").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn divisor_round_trip() {
        let d = SymmetricDivisor::new(11, vec![ratio(-3, 2), int(0), int(7), ratio(5, 9)]).unwrap();
        let text = emit_divisor(&d);
        assert_eq!(parse_divisor(text.as_bytes()).unwrap(), d);
        assert_eq!(emit_divisor(&parse_divisor(text.as_bytes()).unwrap()), text);
        assert!(text.contains("\"-3/2\""));
        let keys: Vec<usize> = ["\"10\"", "\"coeffs\"", "\"n\"", "\"schema_version\""]
            .iter()
            .map(|k| text.find(k).unwrap_or(usize::MAX))
            .collect();
        assert!(keys[1] < keys[2] && keys[2] < keys[3]);
    }

    #[test]
    fn weights_fragment() {
        let w = PairFunction::from_fn(3, |i, j| ratio(i as i64 - j as i64, 2));
        let text = serde_json::to_string(&weights_value(&w)).unwrap();
        assert_eq!(
            text,
            r#"{"m":3,"w":[{"pair":[1,2],"value":"-1/2"},{"pair":[1,3],"value":"-1"},{"pair":[2,3],"value":"-1/2"}]}"#
        );
        assert_eq!(parse_weights(text.as_bytes()).unwrap(), w);
        let swapped = r#"{"m":3,"w":[{"pair":[1,3],"value":"0"},{"pair":[1,2],"value":"0"},{"pair":[2,3],"value":"0"}]}"#;
        assert!(parse_weights(swapped.as_bytes()).is_err());
        let short = r#"{"m":3,"w":[{"pair":[1,2],"value":"0"}]}"#;
        assert!(parse_weights(short.as_bytes()).is_err());
    }

    #[test]
    fn certificate_round_trip() {
        for mode in [Mode::StrictOnly, Mode::AllPartitions] {
            let d = SymmetricDivisor::from_integers(9, &[2, 3, 3]).unwrap();
            let cert = certify(&d, mode).unwrap();
            let text = emit_certificate(&cert);
            let parsed = parse_certificate(text.as_bytes()).unwrap();
            assert_eq!(parsed, cert);
            assert_eq!(emit_certificate(&parsed), text);
            assert_eq!(emit_certificate(&certify(&d, mode).unwrap()), text);
            assert_eq!(verify(&parsed), Ok(()));
        }
    }

    #[test]
    fn golden_six() {
        let cert = certify(&six(), Mode::StrictOnly).unwrap();
        let text = emit_certificate(&cert);
        let expected = concat!(
            r#"{"divisor":{"coeffs":{"2":"1","3":"3"},"n":6,"schema_version":1},"entries":["#,
            r#"{"certificate":"degenerate","partition":[6],"provenance":"degenerate"},"#,
            r#"{"certificate":"degenerate","partition":[5,1],"provenance":"degenerate"},"#,
            r#"{"certificate":"degenerate","partition":[4,2],"provenance":"degenerate"},"#,
            r#"{"certificate":{"m":3,"w":[{"pair":[1,2],"value":"-2"},{"pair":[1,3],"value":"-1"},{"pair":[2,3],"value":"1"}]},"#,
            r#""partition":[3,2,1],"provenance":"feasibility"}],"#,
        );
        assert!(text.starts_with(expected), "{text}");
        assert!(text.contains(r#""mode":"strict""#));
        assert!(text.contains(r#""merge_policy":"largest-repeated-value""#));
    }

    #[test]
    fn certificate_rejections() {
        let cert = certify(&SymmetricDivisor::from_integers(8, &[1, 2, 2]).unwrap(), Mode::AllPartitions).unwrap();
        let text = emit_certificate(&cert);
        let bumped = text.replacen("\"mode\":\"all\",\"schema_version\":1", "\"mode\":\"all\",\"schema_version\":7", 1);
        assert!(matches!(parse_certificate(bumped.as_bytes()), Err(Error::SchemaVersion(7))));
        let extra = text.replacen("{\"divisor\"", "{\"comment\":\"x\",\"divisor\"", 1);
        assert!(matches!(parse_certificate(extra.as_bytes()), Err(Error::Format(_))));
        let bad_mode = text.replacen("\"mode\":\"all\"", "\"mode\":\"most\"", 1);
        assert!(matches!(parse_certificate(bad_mode.as_bytes()), Err(Error::Format(_))));
        let bad_marker = text.replacen("\"certificate\":\"degenerate\"", "\"certificate\":\"trivial\"", 1);
        assert!(matches!(parse_certificate(bad_marker.as_bytes()), Err(Error::Format(_))));
        let unsorted = text.replacen("\"partition\":[7,1]", "\"partition\":[1,7]", 1);
        assert!(matches!(parse_certificate(unsorted.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn reports() {
        let report = certify(&SymmetricDivisor::from_integers(6, &[1, 4]).unwrap(), Mode::StrictOnly).unwrap_err();
        let v = failure_report_value(&report);
        assert_eq!(v["failures"][0]["witness"], json!([3, 1, 1, 1]));
        assert_eq!(v["failures"][0]["stage"], json!("f-nef"));
        assert_eq!(v["failures"][0]["value"], json!("-1"));

        let mut cert = certify(&six(), Mode::StrictOnly).unwrap();
        cert.entries.pop();
        let d = verify(&cert).unwrap_err();
        let v = discrepancy_value(&d);
        assert_eq!(v["kind"], json!("missing-entry"));
        assert_eq!(v["partition"], json!([3, 2, 1]));
    }
}
