//! JSON persistence.
//!
//! Every file holds one object with a `"kind"` tag. Matrices are stored as
//! `{"rows", "cols", "data"}` with `data` in row-major order; polynomials as
//! `{"coeffs"}` in descending powers. Reals are written in the shortest
//! decimal form that parses back to the same double, so a write followed by
//! a read reproduces every stored value bit for bit.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::feedback::FeedbackSystem;
use crate::harness::instance::InstanceSpec;
use crate::harness::report::ExperimentReport;
use crate::harness::verify::Certificate;
use crate::numerics::{DenseMatrix, MonicPoly};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl From<&DenseMatrix> for MatrixDoc {
    fn from(m: &DenseMatrix) -> Self {
        let data = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect();
        MatrixDoc { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl TryFrom<MatrixDoc> for DenseMatrix {
    type Error = String;
    fn try_from(doc: MatrixDoc) -> std::result::Result<Self, String> {
        if doc.rows.checked_mul(doc.cols) != Some(doc.data.len()) {
            return Err(format!("matrix is {}x{} but has {} entries", doc.rows, doc.cols, doc.data.len()));
        }
        Ok(DenseMatrix::from_row_slice(doc.rows, doc.cols, &doc.data))
    }
}

/// `#[serde(with = "matrix_format")]` for [`DenseMatrix`] fields.
pub mod matrix_format {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DenseMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixDoc::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DenseMatrix, D::Error> {
        let doc = MatrixDoc::deserialize(d)?;
        DenseMatrix::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "system_format")]` for [`FeedbackSystem`] fields. Only
/// shapes and finiteness are checked on load.
pub mod system_format {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct SystemDoc {
        #[serde(with = "matrix_format")]
        a: DenseMatrix,
        #[serde(with = "matrix_format")]
        b: DenseMatrix,
        #[serde(with = "matrix_format")]
        c: DenseMatrix,
    }

    pub fn serialize<S: Serializer>(sys: &FeedbackSystem, s: S) -> std::result::Result<S::Ok, S::Error> {
        SystemDoc { a: sys.a().clone(), b: sys.b().clone(), c: sys.c().clone() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<FeedbackSystem, D::Error> {
        let doc = SystemDoc::deserialize(d)?;
        FeedbackSystem::from_parts(doc.a, doc.b, doc.c).map_err(serde::de::Error::custom)
    }
}

/// A generated problem: the system plus whatever is known about it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<InstanceSpec>,
    #[serde(with = "system_format")]
    pub system: FeedbackSystem,
    /// Annihilating polynomial of `A`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<MonicPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<MonicPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "optional_matrix")]
    pub planted_k: Option<DenseMatrix>,
}

mod optional_matrix {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "matrix_format")] DenseMatrix);

    pub fn serialize<S: Serializer>(m: &Option<DenseMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(|m| Wrap(m.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<DenseMatrix>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// Any file this crate reads or writes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    Matrix {
        #[serde(with = "matrix_format")]
        matrix: DenseMatrix,
    },
    Poly {
        poly: MonicPoly,
    },
    System {
        #[serde(with = "system_format")]
        system: FeedbackSystem,
    },
    Instance(InstanceDoc),
    Certificate(Certificate),
    Report(ExperimentReport),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Matrix { .. } => "matrix",
            Document::Poly { .. } => "poly",
            Document::System { .. } => "system",
            Document::Instance(_) => "instance",
            Document::Certificate(_) => "certificate",
            Document::Report(_) => "report",
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Domain(format!("cannot serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Parses `text`, reporting failures with line and column.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    })
}

pub fn save(path: &Path, doc: &Document) -> Result<()> {
    fs::write(path, to_json(doc)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Document> {
    let text = fs::read_to_string(path)?;
    from_json(&text).map_err(|e| match e {
        Error::Parse { location, message } => {
            Error::Parse { location: format!("{}: {location}", path.display()), message }
        }
        other => other,
    })
}

fn wrong_kind(path: &Path, want: &str, got: &Document) -> Error {
    Error::Parse {
        location: format!("{}: field `kind`", path.display()),
        message: format!("expected a {want} document, found {}", got.kind()),
    }
}

/// Loads a system from a `system` or `instance` document.
pub fn load_instance(path: &Path) -> Result<InstanceDoc> {
    match load(path)? {
        Document::Instance(inst) => Ok(inst),
        Document::System { system } => Ok(InstanceDoc { spec: None, system, d: None, target: None, planted_k: None }),
        other => Err(wrong_kind(path, "system or instance", &other)),
    }
}

pub fn load_matrix(path: &Path) -> Result<DenseMatrix> {
    match load(path)? {
        Document::Matrix { matrix } => Ok(matrix),
        other => Err(wrong_kind(path, "matrix", &other)),
    }
}

pub fn load_poly(path: &Path) -> Result<MonicPoly> {
    match load(path)? {
        Document::Poly { poly } => Ok(poly),
        other => Err(wrong_kind(path, "poly", &other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tolerance;
    use crate::rng::{seeded, uniform_matrix};

    #[test]
    fn identity_round_trip() {
        let doc = Document::Matrix { matrix: DenseMatrix::identity(2, 2) };
        let text = to_json(&doc).unwrap();
        assert!(text.contains("\"kind\": \"matrix\""));
        match from_json::<Document>(&text).unwrap() {
            Document::Matrix { matrix } => assert_eq!(matrix, DenseMatrix::identity(2, 2)),
            other => panic!("wrong kind {}", other.kind()),
        }
    }

    #[test]
    fn row_major_layout() {
        let m = DenseMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let text = to_json(&Document::Matrix { matrix: m }).unwrap();
        let compact: String = text.split_whitespace().collect();
        assert_eq!(compact, r#"{"kind":"matrix","matrix":{"rows":2,"cols":3,"data":[1.0,2.0,3.0,4.0,5.0,6.0]}}"#);
    }

    #[test]
    fn random_system_is_bit_exact() {
        let mut rng = seeded(4);
        let sys = FeedbackSystem::new(
            uniform_matrix(&mut rng, 20, 20, 1.0),
            uniform_matrix(&mut rng, 20, 3, 1.0),
            uniform_matrix(&mut rng, 3, 20, 1.0),
            &Tolerance::for_dim(20),
        )
        .unwrap();
        let text = to_json(&Document::System { system: sys.clone() }).unwrap();
        match from_json::<Document>(&text).unwrap() {
            Document::System { system } => {
                for (x, y) in system.a().iter().zip(sys.a().iter()) {
                    assert_eq!(x.to_bits(), y.to_bits());
                }
                assert_eq!(system, sys);
            }
            other => panic!("wrong kind {}", other.kind()),
        }
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = to_json(&Document::Poly { poly: MonicPoly::new(vec![1.0, 2.0, 3.0]).unwrap() }).unwrap();
        let cut = &text[..text.len() / 2];
        match from_json::<Document>(cut) {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("line ")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_shape_and_bad_poly_are_rejected() {
        let bad = r#"{"kind": "matrix", "matrix": {"rows": 2, "cols": 2, "data": [1.0, 2.0, 3.0]}}"#;
        assert!(matches!(from_json::<Document>(bad), Err(Error::Parse { .. })));
        let not_monic = r#"{"kind": "poly", "poly": {"coeffs": [2.0, 1.0]}}"#;
        assert!(matches!(from_json::<Document>(not_monic), Err(Error::Parse { .. })));
        let unknown = r#"{"kind": "banana"}"#;
        assert!(matches!(from_json::<Document>(unknown), Err(Error::Parse { .. })));
    }

    #[test]
    fn report_and_certificates_round_trip() {
        use crate::harness::experiments::{run_experiment_one, ExperimentOneConfig};
        use crate::harness::instance::InstanceSpec;
        let cfg = ExperimentOneConfig {
            spec: InstanceSpec::new(5, 2, 2, 0),
            seed: 2,
            reps: 2,
            snapshot_iters: vec![10],
            combinations_per_iter: None,
        };
        let report = run_experiment_one(&cfg, &Tolerance::for_dim(5)).unwrap();
        let cert = report.certificates()[0].clone();
        let text = to_json(&Document::Report(report.clone())).unwrap();
        match from_json::<Document>(&text).unwrap() {
            Document::Report(r) => assert_eq!(r, report),
            other => panic!("wrong kind {}", other.kind()),
        }
        let text = to_json(&Document::Certificate(cert.clone())).unwrap();
        match from_json::<Document>(&text).unwrap() {
            Document::Certificate(c) => assert_eq!(c, cert),
            other => panic!("wrong kind {}", other.kind()),
        }
        let extra = text.replacen("\"label\"", "\"bogus\": 1,\n  \"label\"", 1);
        assert!(from_json::<Document>(&extra).is_err());
    }
}
