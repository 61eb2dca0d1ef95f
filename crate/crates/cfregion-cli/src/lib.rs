//! Document model for the command-line front end: JSON channel-spec ingestion
//! with strict schema checking, and canonical region-document emission whose
//! bytes are identical across runs on identical input.

use cfregion_core::{
    ChannelSpec, FiniteChannel, IntMatrix, Polyhedron, RateBound, RateRegion, RegionReport,
    SearchBudget, UserPmf,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Significant decimal digits used for every rate and entropy emitted in
/// documents and exports.
pub const RATE_DIGITS: usize = 12;

/// Rounds to [`RATE_DIGITS`] significant digits; the document value is the
/// shortest decimal that round-trips the rounded number.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", RATE_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses back")
}

/// Hex-encoded SHA-256 of the raw input bytes, recorded in every document.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

// ---------------------------------------------------------------------------
// Channel-spec documents
// ---------------------------------------------------------------------------

/// Enumeration budget section shared by all spec kinds; omitted fields take
/// the library defaults (`b_max = 3`, `c_max = 5`, no row-count restriction).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetDocument {
    #[serde(default)]
    pub b_max: Option<i64>,
    #[serde(default)]
    pub c_max: Option<i64>,
    #[serde(default)]
    pub lb_range: Option<(usize, usize)>,
}

/// One user's finitely supported pmf over centered integer representatives.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfDocument {
    pub support: Vec<i64>,
    pub probs: Vec<f64>,
}

/// Finite channel table: a pmf over `y_size` outputs for every combination of
/// per-user input indices, row-major over `input_sizes`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDocument {
    pub input_sizes: Vec<usize>,
    pub y_size: usize,
    pub rows: Vec<Vec<f64>>,
}

/// Gaussian spec: `Y = H x + z` with per-user powers `P` and optional scaling
/// factors `beta`; `A` is the integer target matrix of decoded combinations.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianDocument {
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    #[serde(default)]
    pub budget: Option<BudgetDocument>,
}

/// Integer-symbol spec: sources over integer supports, per-user modulation
/// tables mapping support symbols to channel-input indices, and a finite
/// channel table.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegerDocument {
    pub pmf: Vec<PmfDocument>,
    pub modulation: Vec<Vec<usize>>,
    pub channel: ChannelDocument,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    #[serde(default)]
    pub budget: Option<BudgetDocument>,
}

/// Finite-field spec: like the integer kind plus an odd prime modulus `q`;
/// supports are centered representatives and matrix action on `u` is mod q.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteFieldDocument {
    pub q: i64,
    pub pmf: Vec<PmfDocument>,
    pub modulation: Vec<Vec<usize>>,
    pub channel: ChannelDocument,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    #[serde(default)]
    pub budget: Option<BudgetDocument>,
}

/// A parsed channel-spec document of one of the three kinds.
#[derive(Clone, Debug)]
pub enum SpecDocument {
    Gaussian(GaussianDocument),
    Integer(IntegerDocument),
    FiniteField(FiniteFieldDocument),
}

/// Parses and schema-checks a spec document. The `kind` field selects the
/// schema; unknown keys anywhere are rejected. Error strings carry the JSON
/// line/column for syntax errors and the offending field for schema errors.
pub fn parse_spec_document(text: &str) -> Result<SpecDocument, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value
        .as_object()
        .ok_or_else(|| "spec document must be a JSON object".to_string())?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| {
            "missing string field `kind` (gaussian | integer | finite_field)".to_string()
        })?
        .to_string();
    let mut rest = obj.clone();
    rest.remove("kind");
    let rest = Value::Object(rest);
    match kind.as_str() {
        "gaussian" => serde_json::from_value(rest)
            .map(SpecDocument::Gaussian)
            .map_err(|e| format!("gaussian spec: {e}")),
        "integer" => serde_json::from_value(rest)
            .map(SpecDocument::Integer)
            .map_err(|e| format!("integer spec: {e}")),
        "finite_field" => serde_json::from_value(rest)
            .map(SpecDocument::FiniteField)
            .map_err(|e| format!("finite_field spec: {e}")),
        other => Err(format!(
            "unknown spec kind `{other}` (expected gaussian | integer | finite_field)"
        )),
    }
}

fn to_budget(doc: Option<&BudgetDocument>) -> SearchBudget {
    let defaults = SearchBudget::default();
    match doc {
        None => SearchBudget {
            lb_range: None,
            det_cap: None,
            ..defaults
        },
        Some(b) => SearchBudget {
            b_max: b.b_max.unwrap_or(defaults.b_max),
            c_max: b.c_max.unwrap_or(defaults.c_max),
            lb_range: b.lb_range,
            det_cap: None,
        },
    }
}

fn to_pmfs(docs: &[PmfDocument]) -> Vec<UserPmf> {
    docs.iter()
        .map(|d| UserPmf {
            support: d.support.clone(),
            probs: d.probs.clone(),
        })
        .collect()
}

fn to_channel(doc: &ChannelDocument) -> FiniteChannel {
    FiniteChannel {
        input_sizes: doc.input_sizes.clone(),
        y_size: doc.y_size,
        rows: doc.rows.clone(),
    }
}

impl SpecDocument {
    /// Builds the channel spec, target matrix, and search budget. Failures
    /// here mean the document contents are invalid (inconsistent sizes,
    /// non-normalized pmfs, ragged matrices), as opposed to requests the
    /// computation itself cannot honour.
    pub fn to_parts(&self) -> Result<(ChannelSpec, IntMatrix, SearchBudget), String> {
        let (spec, a, budget) = match self {
            SpecDocument::Gaussian(d) => (
                ChannelSpec::gaussian(d.h.clone(), d.p.clone(), d.beta.clone())
                    .map_err(|e| e.to_string())?,
                &d.a,
                to_budget(d.budget.as_ref()),
            ),
            SpecDocument::Integer(d) => (
                ChannelSpec::integer_lattice(
                    to_pmfs(&d.pmf),
                    d.modulation.clone(),
                    to_channel(&d.channel),
                )
                .map_err(|e| e.to_string())?,
                &d.a,
                to_budget(d.budget.as_ref()),
            ),
            SpecDocument::FiniteField(d) => (
                ChannelSpec::finite_field(
                    d.q,
                    to_pmfs(&d.pmf),
                    d.modulation.clone(),
                    to_channel(&d.channel),
                )
                .map_err(|e| e.to_string())?,
                &d.a,
                to_budget(d.budget.as_ref()),
            ),
        };
        let a = IntMatrix::from_rows_i64(a).map_err(|e| format!("target matrix A: {e}"))?;
        Ok((spec, a, budget))
    }
}

// ---------------------------------------------------------------------------
// Region documents
// ---------------------------------------------------------------------------

/// One halfspace `sum_{k in T} R_k <= r_bits` (rates and bound in bits).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundDocument {
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    pub r_bits: f64,
}

/// One member polyhedron of the region union.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyhedronDocument {
    pub bounds: Vec<BoundDocument>,
}

/// Provenance of one derived bound: the combination matrix, matroid branch,
/// user subset, entropy ingredients, and the recombination matrix attaining
/// the minimum-entropy term (when the search certified one).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerDocument {
    pub source_id: u32,
    pub b: Vec<Vec<i64>>,
    pub matroid: String,
    pub t: Vec<usize>,
    pub h_t_bits: f64,
    pub h_b_bits: f64,
    pub j_bits: f64,
    pub achieving_c: Option<Vec<Vec<i64>>>,
    pub truncated: bool,
}

/// The emitted region: canonical member/bound ordering, vertices for up to
/// three users, full derivation ledger, and truncation flags. Serialization
/// is byte-identical across runs on identical input.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDocument {
    pub tool: String,
    pub input_sha256: String,
    pub mode: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub polyhedra: Vec<PolyhedronDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    pub ledger: Vec<LedgerDocument>,
    pub b_truncated: bool,
    pub c_truncated: bool,
}

/// Builds the canonical document for a computed region. Rates are rounded to
/// [`RATE_DIGITS`] significant digits; the vertex list is included for up to
/// three users when every member is bounded; ledger entries are sorted by
/// their stable source id.
pub fn region_document(report: &RegionReport, mode: &str, input_sha256: &str) -> RegionDocument {
    let region = &report.region;
    let k = region.k();
    let polyhedra = region
        .polyhedra()
        .iter()
        .map(|p| PolyhedronDocument {
            bounds: p
                .bounds()
                .iter()
                .map(|b| BoundDocument {
                    t: b.users(),
                    r_bits: round_sig(b.bound()),
                })
                .collect(),
        })
        .collect();
    let vertices = if k <= 3 {
        region.vertices().ok().map(|vs| {
            vs.into_iter()
                .map(|v| v.into_iter().map(round_sig).collect())
                .collect()
        })
    } else {
        None
    };
    let mut ledger: Vec<LedgerDocument> = report
        .ledger
        .iter()
        .map(|r| LedgerDocument {
            source_id: r.source_id,
            b: r.b.clone(),
            matroid: r.matroid.clone(),
            t: r.t.clone(),
            h_t_bits: round_sig(r.h_t_bits),
            h_b_bits: round_sig(r.h_b_bits),
            j_bits: round_sig(r.j_bits),
            achieving_c: r.achieving_c.clone(),
            truncated: r.truncated,
        })
        .collect();
    ledger.sort_by_key(|r| r.source_id);
    RegionDocument {
        tool: format!("cfregion {}", env!("CARGO_PKG_VERSION")),
        input_sha256: input_sha256.to_string(),
        mode: mode.to_string(),
        k,
        polyhedra,
        vertices,
        ledger,
        b_truncated: report.b_truncated,
        c_truncated: report.c_truncated,
    }
}

/// Rebuilds the in-memory region from a document, for membership queries and
/// round-trip checks.
pub fn region_from_document(doc: &RegionDocument) -> RateRegion {
    let polyhedra = doc
        .polyhedra
        .iter()
        .map(|p| {
            Polyhedron::new(
                doc.k,
                p.bounds
                    .iter()
                    .map(|b| RateBound::new(&b.t, b.r_bits))
                    .collect(),
            )
        })
        .collect();
    RateRegion::new(doc.k, polyhedra)
}

/// Canonical serialization: pretty JSON with fixed field order and a trailing
/// newline.
pub fn to_canonical_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

/// CSV vertex export: header `R1,...,RK`, one row per vertex. Values are the
/// document's rounded rates, converted to nats when requested.
pub fn vertices_csv(doc: &RegionDocument, nats: bool) -> Result<String, String> {
    let vs = doc.vertices.as_ref().ok_or_else(|| {
        "no vertex list: the region is unbounded or has more than 3 users".to_string()
    })?;
    let header = (1..=doc.k)
        .map(|i| format!("R{i}"))
        .collect::<Vec<_>>()
        .join(",");
    let mut out = header + "\n";
    for v in vs {
        let row = v
            .iter()
            .map(|&x| format!("{}", rate_display(x, nats)))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// Converts a bits-valued rate for presentation: identical in bits mode,
/// rescaled (and re-rounded) in nats mode.
pub fn rate_display(bits: f64, nats: bool) -> f64 {
    if nats {
        round_sig(bits * std::f64::consts::LN_2)
    } else {
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_significant_digits() {
        assert_eq!(round_sig(0.868482797083_1031), 0.868482797083);
        assert_eq!(round_sig(-1.234567890123456e-7), -1.23456789012e-7);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-0.0), 0.0);
        assert_eq!(round_sig(1.5), 1.5);
    }

    #[test]
    fn gaussian_document_parses_and_converts() {
        let text = r#"{
            "kind": "gaussian",
            "H": [[1.0, 0.5]],
            "P": [10.0, 10.0],
            "A": [[1, 0], [0, 1]],
            "budget": {"b_max": 2}
        }"#;
        let doc = parse_spec_document(text).unwrap();
        let (spec, a, budget) = doc.to_parts().unwrap();
        assert_eq!(spec.users(), 2);
        assert_eq!(a.rows(), 2);
        assert_eq!(budget.b_max, 2);
        assert_eq!(budget.c_max, 5);
        assert_eq!(budget.lb_range, None);
    }

    #[test]
    fn unknown_keys_and_kinds_are_rejected() {
        let extra = r#"{"kind": "gaussian", "H": [[1.0]], "P": [1.0], "A": [[1]], "typo": 3}"#;
        let err = parse_spec_document(extra).unwrap_err();
        assert!(err.contains("typo"), "{err}");

        let bad_kind = r#"{"kind": "laplacian", "H": [[1.0]]}"#;
        let err = parse_spec_document(bad_kind).unwrap_err();
        assert!(err.contains("laplacian"), "{err}");

        let syntax = parse_spec_document("{ not json").unwrap_err();
        assert!(syntax.contains("invalid JSON"), "{syntax}");
    }

    #[test]
    fn finite_field_document_requires_q_and_integer_rejects_it() {
        let ff = r#"{
            "kind": "finite_field",
            "pmf": [{"support": [-1, 0, 1], "probs": [0.25, 0.5, 0.25]}],
            "modulation": [[0, 1, 2]],
            "channel": {"input_sizes": [3], "y_size": 3,
                        "rows": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]},
            "A": [[1]]
        }"#;
        let err = parse_spec_document(ff).unwrap_err();
        assert!(err.contains("q"), "{err}");

        let int_with_q = r#"{
            "kind": "integer",
            "q": 5,
            "pmf": [{"support": [0, 1], "probs": [0.5, 0.5]}],
            "modulation": [[0, 1]],
            "channel": {"input_sizes": [2], "y_size": 2, "rows": [[1.0, 0.0], [0.0, 1.0]]},
            "A": [[1]]
        }"#;
        let err = parse_spec_document(int_with_q).unwrap_err();
        assert!(err.contains("q"), "{err}");
    }

    #[test]
    fn region_document_round_trips_membership() {
        let doc = RegionDocument {
            tool: "cfregion test".into(),
            input_sha256: sha256_hex(b"x"),
            mode: "simultaneous".into(),
            k: 2,
            polyhedra: vec![
                PolyhedronDocument {
                    bounds: vec![
                        BoundDocument { t: vec![0], r_bits: 1.0 },
                        BoundDocument { t: vec![1], r_bits: 0.25 },
                    ],
                },
                PolyhedronDocument {
                    bounds: vec![
                        BoundDocument { t: vec![0], r_bits: 0.5 },
                        BoundDocument { t: vec![1], r_bits: 0.75 },
                    ],
                },
            ],
            vertices: None,
            ledger: Vec::new(),
            b_truncated: false,
            c_truncated: false,
        };
        let region = region_from_document(&doc);
        assert!(region.contains_point(&[1.0, 0.25], 1e-12));
        assert!(region.contains_point(&[0.5, 0.75], 1e-12));
        assert!(!region.contains_point(&[0.9, 0.7], 1e-9));

        let text = to_canonical_json(&doc);
        let back: RegionDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back.polyhedra.len(), 2);
        assert_eq!(to_canonical_json(&back), text);
    }

    #[test]
    fn csv_export_lists_vertices() {
        let doc = RegionDocument {
            tool: "cfregion test".into(),
            input_sha256: String::new(),
            mode: "simultaneous".into(),
            k: 2,
            polyhedra: Vec::new(),
            vertices: Some(vec![vec![0.0, 0.0], vec![1.0, 0.5]]),
            ledger: Vec::new(),
            b_truncated: false,
            c_truncated: false,
        };
        let csv = vertices_csv(&doc, false).unwrap();
        assert_eq!(csv, "R1,R2\n0,0\n1,0.5\n");
        let nats = vertices_csv(&doc, true).unwrap();
        assert!(nats.contains("0.69314718056"), "{nats}");

        let unbounded = RegionDocument { vertices: None, ..doc };
        assert!(vertices_csv(&unbounded, false).is_err());
    }
}
