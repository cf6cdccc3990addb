//! JSON interchange for schemes, states, tomograms, count records and
//! tensor schemes, plus the two bundled preset schemes.
//!
//! Every file carries `format_version` and `kind`. Complex numbers are
//! `[re, im]` pairs and matrices are `{ "dim": n, "entries": [...] }` in
//! row-major order. Floats are written in shortest round-trip form.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmatrix::{CMatrix, Complex};
use crate::geometry::BlochVector;
use crate::multiqubit::{TensorScheme, DEFAULT_MATERIALIZE_LIMIT};
use crate::scheme::Spin12Scheme;
use crate::tolerance::Tolerances;
use crate::tomography::{CountRecord, DensityMatrix, Tomogram};

pub const FORMAT_VERSION: &str = "1.0";
const SUPPORTED_MAJOR: u64 = 1;

pub const PRESET_NAMES: [&str; 2] = ["example1", "example2"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON at {field}: {message}")]
    Parse { field: String, message: String },
    #[error("unsupported format_version {found:?} (this build reads {FORMAT_VERSION})")]
    SchemaVersionMismatch { found: String },
    #[error("expected a {expected} file, found kind {found:?}")]
    WrongKind { expected: FileKind, found: String },
    #[error("validation failed at {field}: {message}")]
    ValidationFailure { field: String, message: String },
    #[error("unknown preset {0:?} (available: example1, example2)")]
    UnknownPreset(String),
}

impl IoError {
    fn invalid(field: impl Into<String>, message: impl ToString) -> Self {
        IoError::ValidationFailure {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileKind {
    Scheme,
    State,
    Tomogram,
    Counts,
    TensorScheme,
}

impl std::fmt::Display for FileKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FileKind::Scheme => "scheme",
            FileKind::State => "state",
            FileKind::Tomogram => "tomogram",
            FileKind::Counts => "counts",
            FileKind::TensorScheme => "tensor_scheme",
        })
    }
}

/// Dense complex matrix, row-major `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixData {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixData {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixData {
            dim: m.dim(),
            entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self, field: &str) -> Result<CMatrix, IoError> {
        if self.entries.len() != self.dim * self.dim {
            return Err(IoError::invalid(
                format!("{field}.entries"),
                format!("{} entries for dim {}", self.entries.len(), self.dim),
            ));
        }
        let data = self.entries.iter().map(|&[re, im]| Complex::new(re, im)).collect();
        CMatrix::from_vec(self.dim, data).map_err(|e| IoError::invalid(field, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub format_version: String,
    pub kind: FileKind,
    pub label: String,
    /// `e₁ … e₄` as `[α, β, γ]`.
    pub vectors: [[f64; 3]; 4],
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dequantizer: Option<Vec<MatrixData>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantizer: Option<Vec<MatrixData>>,
}

impl SchemeFile {
    /// Vectors and tolerances only.
    pub fn from_vectors(label: &str, vectors: [BlochVector; 4], tolerances: Tolerances) -> Self {
        SchemeFile {
            format_version: FORMAT_VERSION.into(),
            kind: FileKind::Scheme,
            label: label.into(),
            vectors: vectors.map(BlochVector::to_array),
            tolerances,
            dequantizer: None,
            quantizer: None,
        }
    }

    /// Includes the built `U` and `D` matrices.
    pub fn from_scheme(s: &Spin12Scheme) -> Self {
        let mut f = Self::from_vectors(s.label(), *s.quadruple().vectors(), *s.tols());
        f.dequantizer = Some(s.dequantizer().iter().map(MatrixData::from_matrix).collect());
        f.quantizer = Some(s.quantizer().iter().map(MatrixData::from_matrix).collect());
        f
    }

    pub fn bloch_vectors(&self) -> [BlochVector; 4] {
        self.vectors.map(BlochVector::from_array)
    }

    /// Rebuilds the scheme from the vectors and checks any precomputed
    /// matrices against the rebuild within `tolerances.orth`.
    pub fn to_scheme(&self) -> Result<Spin12Scheme, IoError> {
        check_header(&self.format_version, self.kind, FileKind::Scheme)?;
        let s = Spin12Scheme::from_vectors(self.bloch_vectors(), self.label.clone(), self.tolerances)
            .map_err(|e| IoError::invalid("vectors", e))?;
        let tol = self.tolerances.orth;
        for (name, stored, built) in [
            ("dequantizer", &self.dequantizer, s.dequantizer()),
            ("quantizer", &self.quantizer, s.quantizer()),
        ] {
            let Some(stored) = stored else { continue };
            if stored.len() != 4 {
                return Err(IoError::invalid(name, format!("{} matrices, expected 4", stored.len())));
            }
            for (k, (m, b)) in stored.iter().zip(built).enumerate() {
                let field = format!("{name}[{k}]");
                let m = m.to_matrix(&field)?;
                let diff = m.max_abs_diff(b).map_err(|e| IoError::invalid(&field, e))?;
                if diff > tol {
                    return Err(IoError::invalid(
                        field,
                        format!("differs from the matrix rebuilt from the vectors by {diff:e}"),
                    ));
                }
            }
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub format_version: String,
    pub kind: FileKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub rho: MatrixData,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix, label: Option<&str>) -> Self {
        StateFile {
            format_version: FORMAT_VERSION.into(),
            kind: FileKind::State,
            label: label.map(str::to_string),
            rho: MatrixData::from_matrix(rho.matrix()),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, IoError> {
        check_header(&self.format_version, self.kind, FileKind::State)?;
        self.rho.to_matrix("rho")
    }

    /// Validated density matrix.
    pub fn to_state(&self, tols: &Tolerances) -> Result<DensityMatrix, IoError> {
        DensityMatrix::new(self.to_matrix()?, tols).map_err(|e| IoError::invalid("rho", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomogramFile {
    pub format_version: String,
    pub kind: FileKind,
    pub scheme_label: String,
    pub n_qubits: usize,
    pub w: Vec<f64>,
}

impl TomogramFile {
    pub fn from_tomogram(t: &Tomogram, n_qubits: usize) -> Self {
        TomogramFile {
            format_version: FORMAT_VERSION.into(),
            kind: FileKind::Tomogram,
            scheme_label: t.scheme_label.clone(),
            n_qubits,
            w: t.w.clone(),
        }
    }

    pub fn to_tomogram(&self) -> Result<Tomogram, IoError> {
        check_header(&self.format_version, self.kind, FileKind::Tomogram)?;
        let expected = u32::try_from(self.n_qubits)
            .ok()
            .and_then(|n| 4usize.checked_pow(n))
            .ok_or_else(|| IoError::invalid("n_qubits", "too large"))?;
        if self.n_qubits == 0 || self.w.len() != expected {
            return Err(IoError::invalid(
                "w",
                format!("{} components for n_qubits = {}", self.w.len(), self.n_qubits),
            ));
        }
        if let Some(k) = self.w.iter().position(|x| !x.is_finite()) {
            return Err(IoError::invalid(format!("w[{k}]"), "not finite"));
        }
        Ok(Tomogram::new(self.w.clone(), self.scheme_label.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountFile {
    pub format_version: String,
    pub kind: FileKind,
    pub scheme_label: String,
    pub shots_per_component: u64,
    pub seed: u64,
    pub successes: Vec<u64>,
}

impl CountFile {
    pub fn from_record(c: &CountRecord) -> Self {
        CountFile {
            format_version: FORMAT_VERSION.into(),
            kind: FileKind::Counts,
            scheme_label: c.scheme_label.clone(),
            shots_per_component: c.shots_per_component,
            seed: c.seed,
            successes: c.successes.clone(),
        }
    }

    pub fn to_record(&self) -> Result<CountRecord, IoError> {
        check_header(&self.format_version, self.kind, FileKind::Counts)?;
        let c = CountRecord {
            shots_per_component: self.shots_per_component,
            successes: self.successes.clone(),
            seed: self.seed,
            scheme_label: self.scheme_label.clone(),
        };
        c.validate().map_err(|e| IoError::invalid("successes", e))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorSchemeFile {
    pub format_version: String,
    pub kind: FileKind,
    pub n_qubits: usize,
    #[serde(default = "default_materialize_limit")]
    pub materialize_limit: usize,
    /// One entry per qubit, in tensor order.
    pub factors: Vec<SchemeFile>,
}

fn default_materialize_limit() -> usize {
    DEFAULT_MATERIALIZE_LIMIT
}

impl TensorSchemeFile {
    pub fn from_tensor_scheme(ts: &TensorScheme) -> Self {
        TensorSchemeFile {
            format_version: FORMAT_VERSION.into(),
            kind: FileKind::TensorScheme,
            n_qubits: ts.n_qubits(),
            materialize_limit: ts.materialize_limit(),
            factors: ts
                .factors()
                .iter()
                .map(|s| SchemeFile::from_vectors(s.label(), *s.quadruple().vectors(), *s.tols()))
                .collect(),
        }
    }

    pub fn to_tensor_scheme(&self) -> Result<TensorScheme, IoError> {
        check_header(&self.format_version, self.kind, FileKind::TensorScheme)?;
        if self.n_qubits == 0 || self.factors.len() != self.n_qubits {
            return Err(IoError::invalid(
                "factors",
                format!("{} factors for n_qubits = {}", self.factors.len(), self.n_qubits),
            ));
        }
        let factors = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.to_scheme().map_err(|e| match e {
                    IoError::ValidationFailure { field, message } => {
                        IoError::invalid(format!("factors[{i}].{field}"), message)
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TensorScheme::new(factors)
            .map_err(|e| IoError::invalid("factors", e))?
            .with_materialize_limit(self.materialize_limit))
    }
}

fn check_version(found: &str) -> Result<(), IoError> {
    let major = found.split('.').next().and_then(|m| m.parse::<u64>().ok());
    if major == Some(SUPPORTED_MAJOR) {
        Ok(())
    } else {
        Err(IoError::SchemaVersionMismatch { found: found.into() })
    }
}

fn check_header(version: &str, kind: FileKind, expected: FileKind) -> Result<(), IoError> {
    check_version(version)?;
    if kind != expected {
        return Err(IoError::WrongKind {
            expected,
            found: kind.to_string(),
        });
    }
    Ok(())
}

#[derive(Deserialize)]
struct Header {
    format_version: Option<String>,
    kind: Option<String>,
}

/// Parses `text` as a file of the given kind. The version and kind are
/// checked before the body so that files from a newer major version get a
/// version error rather than a schema error.
pub fn from_json_str<T: DeserializeOwned>(text: &str, expected: FileKind) -> Result<T, IoError> {
    let header: Header = serde_json::from_str(text).map_err(|e| IoError::Parse {
        field: "(root)".into(),
        message: e.to_string(),
    })?;
    let version = header.format_version.ok_or_else(|| IoError::Parse {
        field: "format_version".into(),
        message: "missing".into(),
    })?;
    check_version(&version)?;
    let kind = header.kind.unwrap_or_default();
    if kind != expected.to_string() {
        return Err(IoError::WrongKind { expected, found: kind });
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| IoError::Parse {
        field: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    fs::write(path, to_json_string(value)).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_scheme_file(path: &Path) -> Result<SchemeFile, IoError> {
    from_json_str(&read(path)?, FileKind::Scheme)
}

/// Loads and rebuilds a scheme, validating any stored matrices.
pub fn load_scheme(path: &Path) -> Result<Spin12Scheme, IoError> {
    load_scheme_file(path)?.to_scheme()
}

pub fn save_scheme(path: &Path, s: &Spin12Scheme) -> Result<(), IoError> {
    save(path, &SchemeFile::from_scheme(s))
}

pub fn load_state_file(path: &Path) -> Result<StateFile, IoError> {
    from_json_str(&read(path)?, FileKind::State)
}

pub fn load_state(path: &Path, tols: &Tolerances) -> Result<DensityMatrix, IoError> {
    load_state_file(path)?.to_state(tols)
}

pub fn save_state(path: &Path, rho: &DensityMatrix) -> Result<(), IoError> {
    save(path, &StateFile::from_state(rho, None))
}

pub fn load_tomogram(path: &Path) -> Result<Tomogram, IoError> {
    from_json_str::<TomogramFile>(&read(path)?, FileKind::Tomogram)?.to_tomogram()
}

pub fn save_tomogram(path: &Path, t: &Tomogram, n_qubits: usize) -> Result<(), IoError> {
    save(path, &TomogramFile::from_tomogram(t, n_qubits))
}

pub fn load_counts(path: &Path) -> Result<CountRecord, IoError> {
    from_json_str::<CountFile>(&read(path)?, FileKind::Counts)?.to_record()
}

pub fn save_counts(path: &Path, c: &CountRecord) -> Result<(), IoError> {
    save(path, &CountFile::from_record(c))
}

pub fn load_tensor_scheme(path: &Path) -> Result<TensorScheme, IoError> {
    from_json_str::<TensorSchemeFile>(&read(path)?, FileKind::TensorScheme)?.to_tensor_scheme()
}

pub fn save_tensor_scheme(path: &Path, ts: &TensorScheme) -> Result<(), IoError> {
    save(path, &TensorSchemeFile::from_tensor_scheme(ts))
}

/// Bloch vectors of a named preset.
pub fn preset_vectors(name: &str) -> Result<[BlochVector; 4], IoError> {
    let v = BlochVector::new;
    match name {
        "example1" => Ok([
            v(0.0, 4.0 / 5.0, 3.0 / 5.0),
            v(4.0 / 5.0, 0.0, -3.0 / 5.0),
            v(0.0, -4.0 / 5.0, 3.0 / 5.0),
            v(-4.0 / 5.0, 0.0, -3.0 / 5.0),
        ]),
        "example2" => Ok([
            v(0.0, -2.0 / 3.0, 1.0 / 3.0),
            v(2.0 / 3.0, 0.0, -1.0 / 3.0),
            v(0.0, 2.0 / 3.0, 1.0 / 3.0),
            v(-2.0 / 3.0, 0.0, -1.0 / 3.0),
        ]),
        other => Err(IoError::UnknownPreset(other.into())),
    }
}

/// `example1`: four pure states of length 1. `example2`: four mixed
/// states of length `√5/3`.
pub fn preset(name: &str) -> Result<Spin12Scheme, IoError> {
    let e = preset_vectors(name)?;
    Spin12Scheme::from_vectors(e, name, Tolerances::default()).map_err(|e| IoError::invalid("vectors", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;
    use tempfile::tempdir;

    #[test]
    fn preset_vectors_and_unknown() {
        let s = preset("example1").unwrap();
        assert_eq!(s.quadruple().vectors()[1], BlochVector::new(0.8, 0.0, -0.6));
        let s = preset("example2").unwrap();
        assert!((s.quadruple().lengths()[0] - 5f64.sqrt() / 3.0).abs() < 1e-15);
        assert!(matches!(preset("nosuch"), Err(IoError::UnknownPreset(n)) if n == "nosuch"));
    }

    #[test]
    fn scheme_round_trip_is_bit_identical() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("s.json");
        let s = preset("example2").unwrap();
        save_scheme(&path, &s).unwrap();
        let back = load_scheme(&path).unwrap();
        assert_eq!(back, s);
        let f = load_scheme_file(&path).unwrap();
        assert_eq!(f, SchemeFile::from_scheme(&s));
    }

    #[test]
    fn tampered_quantizer_is_rejected() {
        let mut f = SchemeFile::from_scheme(&preset("example1").unwrap());
        f.quantizer.as_mut().unwrap()[2].entries[1][0] += 1e-6;
        let text = to_json_string(&f);
        let parsed: SchemeFile = from_json_str(&text, FileKind::Scheme).unwrap();
        match parsed.to_scheme() {
            Err(IoError::ValidationFailure { field, .. }) => assert_eq!(field, "quantizer[2]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn version_gate() {
        let mut f = SchemeFile::from_scheme(&preset("example1").unwrap());
        f.format_version = "2.0".into();
        let err = from_json_str::<SchemeFile>(&to_json_string(&f), FileKind::Scheme).unwrap_err();
        assert!(matches!(err, IoError::SchemaVersionMismatch { found } if found == "2.0"));
        f.format_version = "1.3".into();
        assert!(from_json_str::<SchemeFile>(&to_json_string(&f), FileKind::Scheme).is_ok());
    }

    #[test]
    fn wrong_kind_and_parse_paths() {
        let t = TomogramFile::from_tomogram(&Tomogram::new(vec![0.5; 4], "x"), 1);
        let err = from_json_str::<SchemeFile>(&to_json_string(&t), FileKind::Scheme).unwrap_err();
        assert!(matches!(err, IoError::WrongKind { expected: FileKind::Scheme, .. }));

        let text = r#"{"format_version":"1.0","kind":"scheme","label":"x",
            "vectors":[[0,0,1],[0,0,"a"],[0,0,1],[0,0,1]]}"#;
        match from_json_str::<SchemeFile>(text, FileKind::Scheme) {
            Err(IoError::Parse { field, .. }) => assert_eq!(field, "vectors[1][2]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_vectors_name_the_failure() {
        let mut f = SchemeFile::from_vectors("x", preset_vectors("example1").unwrap(), Tolerances::default());
        f.vectors[0] = [0.0, 1.2, 0.9];
        let err = f.to_scheme().unwrap_err().to_string();
        assert!(err.contains("vectors"), "{err}");
        assert!(err.contains("exceeds 1"), "{err}");
    }

    #[test]
    fn state_tomogram_counts_tensor_round_trips() {
        let dir = tempdir().unwrap();
        let tols = Tolerances::default();

        let rho = states::bell_state();
        let p = dir.path().join("state.json");
        save_state(&p, &rho).unwrap();
        assert_eq!(load_state(&p, &tols).unwrap(), rho);

        let t = Tomogram::new(vec![0.1, 0.2, 0.3, 1.4], "example1");
        let p = dir.path().join("w.json");
        save_tomogram(&p, &t, 1).unwrap();
        assert_eq!(load_tomogram(&p).unwrap(), t);

        let c = CountRecord {
            shots_per_component: 100,
            successes: vec![1, 2, 3, 100],
            seed: u64::MAX,
            scheme_label: "example1".into(),
        };
        let p = dir.path().join("c.json");
        save_counts(&p, &c).unwrap();
        assert_eq!(load_counts(&p).unwrap(), c);

        let ts = TensorScheme::new(vec![preset("example1").unwrap(), preset("example2").unwrap()]).unwrap();
        let p = dir.path().join("ts.json");
        save_tensor_scheme(&p, &ts).unwrap();
        assert_eq!(load_tensor_scheme(&p).unwrap(), ts);
    }

    #[test]
    fn inconsistent_dimensions_are_rejected() {
        let mut t = TomogramFile::from_tomogram(&Tomogram::new(vec![0.5; 4], "x"), 2);
        assert!(matches!(t.to_tomogram(), Err(IoError::ValidationFailure { field, .. }) if field == "w"));
        t.n_qubits = 1;
        assert!(t.to_tomogram().is_ok());

        let mut s = StateFile::from_state(&DensityMatrix::maximally_mixed(2), None);
        s.rho.entries.pop();
        assert!(matches!(s.to_matrix(), Err(IoError::ValidationFailure { field, .. }) if field == "rho.entries"));

        let c = CountFile {
            format_version: FORMAT_VERSION.into(),
            kind: FileKind::Counts,
            scheme_label: "x".into(),
            shots_per_component: 10,
            seed: 0,
            successes: vec![11],
        };
        assert!(c.to_record().is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_scheme(Path::new("/nonexistent/s.json")),
            Err(IoError::Io { .. })
        ));
    }
}
