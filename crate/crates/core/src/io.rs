//! Versioned JSON problem files and the output encoding.
//!
//! Complex matrices are arrays of rows, each row an array of `[re, im]`
//! pairs. Floating-point numbers are written with 17 significant digits so
//! that every emitted document parses back to the same bits.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::certifier::{Certificate, HyklReport, Verdict};
use crate::choi::{choi_from_kraus, q2c_choi, BipartiteState, ChoiOp, Ensemble, Povm};
use crate::linalg::{CMatrix, HermOp, Tolerances};
use crate::objectives::{FidelityPair, ObjectiveSpec, ObjectiveValue, SubgradResult, SubgradientKind};
use crate::oracle::SolveTrace;
use crate::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

/// Row-major complex matrix as nested `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(transparent)]
pub struct JsonMatrix(pub Vec<Vec<[f64; 2]>>);

impl JsonMatrix {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if rows == 0 || self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Schema(format!("ragged or empty matrix with {rows} rows")));
        }
        let m = CMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            Complex64::new(re, im)
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Schema("matrix entries must be finite".into()));
        }
        Ok(m)
    }

    pub fn to_herm(&self, tol: &Tolerances) -> Result<HermOp> {
        HermOp::try_new(self.to_matrix()?, tol)
    }
}

impl From<&CMatrix> for JsonMatrix {
    fn from(m: &CMatrix) -> Self {
        JsonMatrix((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }
}

impl From<&HermOp> for JsonMatrix {
    fn from(h: &HermOp) -> Self {
        h.matrix().into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, SerializeDerive, Deserialize)]
pub struct Dims {
    pub d_x: usize,
    pub d_y: usize,
    #[serde(default = "one")]
    pub d_z: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct EnsembleFile {
    pub probs: Vec<f64>,
    pub states: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct PairFile {
    pub weight: f64,
    pub rho: JsonMatrix,
    pub sigma: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveFile {
    Linear { h0: JsonMatrix },
    /// Minimum-error discrimination; `d_y` is the number of states.
    Discrimination { ensemble: EnsembleFile },
    Fidelity { rho: JsonMatrix, sigma: JsonMatrix },
    FidelitySquaredEnsemble { pairs: Vec<PairFile> },
    TraceDistance { rho: JsonMatrix, sigma: JsonMatrix },
    RelativeEntropy { rho: JsonMatrix, sigma: JsonMatrix },
}

impl ObjectiveFile {
    pub fn family(&self) -> &'static str {
        match self {
            Self::Linear { .. } => "linear",
            Self::Discrimination { .. } => "discrimination",
            Self::Fidelity { .. } => "fidelity",
            Self::FidelitySquaredEnsemble { .. } => "fidelity_squared_ensemble",
            Self::TraceDistance { .. } => "trace_distance",
            Self::RelativeEntropy { .. } => "relative_entropy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelFile {
    Choi(JsonMatrix),
    Kraus(Vec<JsonMatrix>),
    Povm(Vec<JsonMatrix>),
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    pub dims: Dims,
    pub objective: ObjectiveFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// A parsed and validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub family: &'static str,
    pub spec: ObjectiveSpec,
    pub channel: Option<ChoiOp>,
    /// Set for discrimination problems.
    pub ensemble: Option<Ensemble>,
    pub povm: Option<Povm>,
    pub tolerances: Tolerances,
}

fn expect_dim(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch(format!("{what} is {got}-dim, dims say {want}")));
    }
    Ok(())
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        if file.version != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported version {:?}, expected {SCHEMA_VERSION:?}", file.version)));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Builds the objective and channel with `tol` (file overrides are the
    /// caller's business, see [`ProblemFile::tolerances`]).
    pub fn build(&self, tol: &Tolerances) -> Result<Problem> {
        tol.validate()?;
        let Dims { d_x, d_y, d_z } = self.dims;
        if d_x == 0 || d_y == 0 || d_z == 0 {
            return Err(Error::Schema("dimensions must be positive".into()));
        }
        let state = |m: &JsonMatrix, dims: (usize, usize), what: &str| -> Result<BipartiteState> {
            let h = m.to_herm(tol)?;
            expect_dim(what, h.dim(), dims.0 * dims.1)?;
            BipartiteState::new(h, dims, tol)
        };
        let mut ensemble = None;
        let spec = match &self.objective {
            ObjectiveFile::Linear { h0 } => {
                let h = h0.to_herm(tol)?;
                expect_dim("h0", h.dim(), d_y * d_x)?;
                ObjectiveSpec::linear(h, d_y, d_x)?
            }
            ObjectiveFile::Discrimination { ensemble: e } => {
                let states = e.states.iter().map(|s| s.to_herm(tol)).collect::<Result<Vec<_>>>()?;
                let ens = Ensemble::new(e.probs.clone(), states, tol)?;
                expect_dim("ensemble state", ens.dim(), d_x)?;
                expect_dim("number of states", ens.len(), d_y)?;
                let spec = ObjectiveSpec::discrimination(&ens);
                ensemble = Some(ens);
                spec
            }
            ObjectiveFile::Fidelity { rho, sigma } => {
                ObjectiveSpec::fidelity(state(rho, (d_x, d_z), "rho")?, state(sigma, (d_y, d_z), "sigma")?, tol)?
            }
            ObjectiveFile::TraceDistance { rho, sigma } => {
                ObjectiveSpec::trace_distance(state(rho, (d_x, d_z), "rho")?, state(sigma, (d_y, d_z), "sigma")?)?
            }
            ObjectiveFile::RelativeEntropy { rho, sigma } => {
                ObjectiveSpec::relative_entropy(state(rho, (d_x, d_z), "rho")?, state(sigma, (d_y, d_z), "sigma")?, tol)?
            }
            ObjectiveFile::FidelitySquaredEnsemble { pairs } => {
                let pairs = pairs
                    .iter()
                    .map(|p| {
                        let rho = p.rho.to_herm(tol)?;
                        let sigma = p.sigma.to_herm(tol)?;
                        expect_dim("rho", rho.dim(), d_x)?;
                        expect_dim("sigma", sigma.dim(), d_y)?;
                        Ok(FidelityPair { weight: p.weight, rho, sigma })
                    })
                    .collect::<Result<Vec<_>>>()?;
                ObjectiveSpec::fidelity_squared(pairs, tol)?
            }
        };
        let mut povm = None;
        let channel = match &self.channel {
            None => None,
            Some(ChannelFile::Choi(m)) => Some(ChoiOp::new(m.to_herm(tol)?, d_y, d_x, tol)?),
            Some(ChannelFile::Kraus(ks)) => {
                let ks = ks.iter().map(JsonMatrix::to_matrix).collect::<Result<Vec<_>>>()?;
                if let Some(k) = ks.iter().find(|k| k.shape() != (d_y, d_x)) {
                    return Err(Error::DimensionMismatch(format!(
                        "Kraus operator is {}x{}, dims say {d_y}x{d_x}",
                        k.nrows(),
                        k.ncols()
                    )));
                }
                Some(choi_from_kraus(&ks, tol)?)
            }
            Some(ChannelFile::Povm(es)) => {
                let es = es.iter().map(|e| e.to_herm(tol)).collect::<Result<Vec<_>>>()?;
                let p = Povm::new(es, tol)?;
                expect_dim("measurement", p.dim(), d_x)?;
                expect_dim("number of outcomes", p.outcomes(), d_y)?;
                let j = q2c_choi(&p);
                povm = Some(p);
                Some(j)
            }
        };
        Ok(Problem { family: self.objective.family(), spec, channel, ensemble, povm, tolerances: *tol })
    }
}

/// Real number that may be infinite; infinities are written as a tag.
#[derive(Debug, Clone, Copy, PartialEq, SerializeDerive, Deserialize)]
#[serde(untagged)]
pub enum JsonReal {
    Number(f64),
    Infinite { infinite: Sign },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, SerializeDerive, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

impl From<f64> for JsonReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            JsonReal::Infinite { infinite: Sign::Positive }
        } else if v == f64::NEG_INFINITY {
            JsonReal::Infinite { infinite: Sign::Negative }
        } else {
            JsonReal::Number(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JsonValue {
    Finite(f64),
    Infinite { inclusion_defect: f64 },
}

impl From<ObjectiveValue> for JsonValue {
    fn from(v: ObjectiveValue) -> Self {
        match v {
            ObjectiveValue::Finite(x) => JsonValue::Finite(x),
            ObjectiveValue::Infinite { inclusion_defect } => JsonValue::Infinite { inclusion_defect },
        }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct CertificateOutput {
    pub family: String,
    pub verdict: Verdict,
    pub value: JsonValue,
    pub subgradient: SubgradientKind,
    pub exact_gradient: bool,
    pub z: JsonMatrix,
    pub herm_defect: f64,
    pub min_eig: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degeneracy: Option<String>,
}

impl CertificateOutput {
    pub fn new(family: &str, sub: &SubgradResult, cert: &Certificate) -> Self {
        Self {
            family: family.to_string(),
            verdict: cert.verdict,
            value: sub.value.into(),
            subgradient: sub.kind,
            exact_gradient: sub.exact_gradient(),
            z: (&cert.z).into(),
            herm_defect: cert.herm_defect,
            min_eig: cert.min_eig,
            epsilon: cert.epsilon,
            bound: cert.bound,
            scale: cert.scale,
            reason: cert.reason.clone(),
            degeneracy: sub.degeneracy.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct SolveOutput {
    pub family: String,
    pub best_value: JsonReal,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: crate::oracle::StopReason,
    pub final_bound: JsonReal,
    pub channel: ChannelFile,
    pub values: Vec<f64>,
}

impl SolveOutput {
    pub fn new(family: &str, trace: &SolveTrace) -> Self {
        Self {
            family: family.to_string(),
            best_value: trace.best_value.into(),
            iterations: trace.iterations,
            converged: trace.converged,
            stop_reason: trace.stop_reason,
            final_bound: trace.final_bound.into(),
            channel: ChannelFile::Choi(trace.best_j.op().into()),
            values: trace.values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct HyklOutput {
    pub optimal: bool,
    pub herm_defect: f64,
    pub min_eigs: Vec<f64>,
    pub scale: f64,
    pub r: JsonMatrix,
    pub error_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via_choi: Option<CertificateOutput>,
}

impl HyklOutput {
    pub fn new(report: &HyklReport, error_probability: f64) -> Self {
        Self {
            optimal: report.optimal,
            herm_defect: report.herm_defect,
            min_eigs: report.min_eigs.clone(),
            scale: report.scale,
            r: (&report.r).into(),
            error_probability,
            via_choi: None,
        }
    }
}

/// Writes floats as `{:.16e}` and delegates layout to the wrapped formatter.
pub struct SciFormatter<F>(pub F);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl<F: Formatter> Formatter for SciFormatter<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

/// Serializes with 17 significant digits; `indent == 0` is compact.
pub fn to_json_string<T: Serialize>(value: &T, indent: usize) -> Result<String> {
    let mut buf = Vec::new();
    if indent == 0 {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(serde_json::ser::CompactFormatter));
        value.serialize(&mut ser)?;
    } else {
        let pad = vec![b' '; indent];
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::with_indent(&pad)));
        value.serialize(&mut ser)?;
    }
    String::from_utf8(buf).map_err(|e| Error::Schema(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HELSTROM: &str = r#"{
        "version": "1",
        "dims": {"d_x": 2, "d_y": 2},
        "objective": {"family": "discrimination", "ensemble": {
            "probs": [0.5, 0.5],
            "states": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0.5,0],[0.5,0]],[[0.5,0],[0.5,0]]]]
        }},
        "channel": {"povm": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]]}
    }"#;

    #[test]
    fn parses_and_builds() {
        let f = ProblemFile::from_json(HELSTROM).unwrap();
        let p = f.build(&Tolerances::default()).unwrap();
        assert_eq!(p.spec.channel_dims(), (2, 2));
        assert_eq!(p.povm.unwrap().outcomes(), 2);
        assert!(p.ensemble.is_some());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ProblemFile::from_json("{"), Err(Error::Schema(_))));
        let v2 = HELSTROM.replace("\"version\": \"1\"", "\"version\": \"2\"");
        assert!(matches!(ProblemFile::from_json(&v2), Err(Error::Schema(_))));
        let bad_dims = HELSTROM.replace("\"d_x\": 2", "\"d_x\": 3");
        let f = ProblemFile::from_json(&bad_dims).unwrap();
        assert!(f.build(&Tolerances::default()).is_err());
    }

    #[test]
    fn floats_round_trip() {
        let xs = vec![0.1, 1.0 / 3.0, -2.5e-300, 0.0, 123_456_789.123_456_79, f64::MIN_POSITIVE];
        let s = to_json_string(&xs, 0).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, xs);
        let m = JsonMatrix(vec![vec![[0.1, -0.2]]]);
        let s = to_json_string(&m, 2).unwrap();
        assert_eq!(serde_json::from_str::<JsonMatrix>(&s).unwrap(), m);
        assert!(s.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn tagged_infinities() {
        let s = to_json_string(&JsonReal::from(f64::INFINITY), 0).unwrap();
        assert_eq!(s, r#"{"infinite":"positive"}"#);
        assert_eq!(serde_json::from_str::<JsonReal>(&s).unwrap(), JsonReal::from(f64::INFINITY));
    }
}
