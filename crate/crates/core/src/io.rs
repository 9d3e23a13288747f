//! JSON model, stage and gain files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::GainFunction;
use crate::error::{Error, Result};
use crate::model::{default_labels, Channel, Joint, Prior};
use crate::scalar::{Mode, Scalar};

/// A probability written either as a JSON string ("1/3", "0.25") or number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Text(String),
    Number(serde_json::Number),
}

impl Literal {
    fn text(&self) -> String {
        match self {
            Literal::Text(s) => s.trim().to_string(),
            Literal::Number(n) => n.to_string(),
        }
    }

    /// Whether the literal is written in decimal notation.
    fn is_decimal(&self) -> bool {
        let t = self.text();
        t.contains(['.', 'e', 'E'])
    }

    pub fn parse<S: Scalar>(&self) -> Result<S> {
        S::parse(&self.text())
    }
}

pub type Matrix = Vec<Vec<Literal>>;

fn parse_row<S: Scalar>(row: &[Literal]) -> Result<Vec<S>> {
    row.iter().map(Literal::parse).collect()
}

fn parse_matrix<S: Scalar>(m: &Matrix) -> Result<Vec<Vec<S>>> {
    m.iter().map(|r| parse_row(r)).collect()
}

fn to_literals<S: Scalar>(values: &[S]) -> Vec<Literal> {
    values.iter().map(|v| Literal::Text(v.to_repr())).collect()
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub prior: Vec<Literal>,
    pub channel: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_x: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_y: Option<Vec<String>>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        from_json(text)
    }

    /// The declared mode, else float when any entry is written as a decimal.
    pub fn mode(&self) -> Mode {
        if let Some(m) = self.mode {
            return m;
        }
        let decimal = self.prior.iter().chain(self.channel.iter().flatten()).any(Literal::is_decimal);
        if decimal {
            Mode::Float
        } else {
            Mode::Rational
        }
    }

    pub fn joint<S: Scalar>(&self) -> Result<Joint<S>> {
        let (prior, channel) = self.parts()?;
        Joint::new(prior, channel)
    }

    /// Prior and channel as written, before zero-prior inputs are dropped.
    pub fn parts<S: Scalar>(&self) -> Result<(Prior<S>, Channel<S>)> {
        let probs = parse_row(&self.prior)?;
        let labels_x = self
            .labels_x
            .clone()
            .unwrap_or_else(|| default_labels("x", probs.len()));
        let rows = parse_matrix(&self.channel)?;
        let n_y = rows.first().map_or(0, Vec::len);
        let labels_y = self.labels_y.clone().unwrap_or_else(|| default_labels("y", n_y));
        let prior = Prior::new(labels_x.clone(), probs)?;
        let channel = Channel::new(labels_x, labels_y, rows)?;
        Ok((prior, channel))
    }

    /// The file for a prior and channel, with every entry as an exact string.
    pub fn from_model<S: Scalar>(prior: &Prior<S>, channel: &Channel<S>) -> Self {
        ModelFile {
            mode: Some(S::MODE),
            prior: to_literals(prior.probs()),
            channel: channel.rows().iter().map(|r| to_literals(r)).collect(),
            labels_x: Some(prior.labels().to_vec()),
            labels_y: Some(channel.labels_y().to_vec()),
        }
    }
}

/// Second-stage channels: either one channel per first-stage output label
/// under `stages`, or a single `channel` reused for every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFile {
    #[serde(default)]
    pub stages: Option<BTreeMap<String, Matrix>>,
    #[serde(default)]
    pub channel: Option<Matrix>,
    #[serde(default)]
    pub labels_z: Option<Vec<String>>,
    #[serde(default)]
    pub labels_y: Option<Vec<String>>,
}

impl StageFile {
    pub fn from_json(text: &str) -> Result<Self> {
        from_json(text)
    }

    /// One stage per output of `first`, rows labeled like `prior`.
    pub fn stages<S: Scalar>(
        &self,
        prior: &Prior<S>,
        first: &Channel<S>,
    ) -> Result<Vec<Option<Channel<S>>>> {
        let labels_x = prior.labels().to_vec();
        let build = |m: &Matrix| -> Result<Channel<S>> {
            let rows = parse_matrix(m)?;
            let n_z = rows.first().map_or(0, Vec::len);
            let labels_z = self
                .labels_z
                .clone()
                .or_else(|| self.labels_y.clone())
                .unwrap_or_else(|| default_labels("z", n_z));
            Channel::new(labels_x.clone(), labels_z, rows)
        };
        match (&self.stages, &self.channel) {
            (Some(map), _) => {
                if let Some(unknown) = map.keys().find(|k| !first.labels_y().contains(k)) {
                    return Err(Error::OutOfSupport(format!(
                        "stage `{unknown}` names no first-stage output"
                    )));
                }
                first
                    .labels_y()
                    .iter()
                    .map(|y| map.get(y).map(&build).transpose())
                    .collect()
            }
            (None, Some(m)) => {
                let c = build(m)?;
                Ok(vec![Some(c); first.n_outputs()])
            }
            (None, None) => Err(Error::Parse(
                "stage file needs `stages` or `channel`".to_string(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainFile {
    pub gain: Matrix,
    #[serde(default)]
    pub labels_xhat: Option<Vec<String>>,
    #[serde(default)]
    pub labels_x: Option<Vec<String>>,
}

impl GainFile {
    pub fn from_json(text: &str) -> Result<Self> {
        from_json(text)
    }

    /// Rows default to the labels of `prior`.
    pub fn gain<S: Scalar>(&self, prior: &Prior<S>) -> Result<GainFunction<S>> {
        let matrix = parse_matrix(&self.gain)?;
        let n = matrix.first().map_or(0, Vec::len);
        let labels_x = self.labels_x.clone().unwrap_or_else(|| prior.labels().to_vec());
        let labels_xhat = self
            .labels_xhat
            .clone()
            .unwrap_or_else(|| default_labels("g", n));
        GainFunction::new(labels_x, labels_xhat, matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fix_c;
    use crate::leakage::pml;
    use crate::scalar::Rational;

    const FIX_C: &str = r#"{
        "prior": ["1/4", "1/4", "1/4", "1/4"],
        "channel": [["0","0","1/2","1/2"],["0","0","1/2","1/2"],["0","1/3","1/3","1/3"],["1/3","0","1/3","1/3"]]
    }"#;

    #[test]
    fn parses_exact_models() {
        let m = ModelFile::from_json(FIX_C).unwrap();
        assert_eq!(m.mode(), Mode::Rational);
        let j = m.joint::<Rational>().unwrap();
        assert_eq!(j, fix_c());
        assert_eq!(pml(&j, 0).unwrap(), Rational::frac(4, 1));
    }

    #[test]
    fn decimals_select_float_mode() {
        let m = ModelFile::from_json(r#"{"prior":[0.5,0.5],"channel":[[0.6,0.4],[0.4,0.6]]}"#).unwrap();
        assert_eq!(m.mode(), Mode::Float);
        let j = m.joint::<f64>().unwrap();
        assert!((j.p_y(0) - 0.5).abs() < 1e-12);
        let exact = m.joint::<Rational>().unwrap();
        assert_eq!(exact.cond(0, 0), &Rational::frac(3, 5));
    }

    #[test]
    fn round_trips_through_json() {
        let j = fix_c::<Rational>();
        let m = ModelFile::from_model(j.prior(), j.channel());
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(ModelFile::from_json(&text).unwrap().joint::<Rational>().unwrap(), j);
    }

    #[test]
    fn errors_name_labels() {
        let m = ModelFile::from_json(
            r#"{"prior":["1/2","1/2"],"channel":[["1/2","1/2"],["1/2","1/3"]],"labels_x":["a","b"]}"#,
        )
        .unwrap();
        let err = m.joint::<Rational>().unwrap_err().to_string();
        assert!(err.contains('b'), "{err}");
        assert!(ModelFile::from_json("{").is_err());
    }

    #[test]
    fn stage_files() {
        let j = fix_c::<Rational>();
        let s = StageFile::from_json(r#"{"stages":{"y1":[["1","0"],["1","0"],["1","0"],["1","0"]]}}"#)
            .unwrap();
        let stages = s.stages(j.prior(), j.channel()).unwrap();
        assert!(stages[0].is_some() && stages[1].is_none());
        let bad = StageFile::from_json(r#"{"stages":{"nope":[["1"]]}}"#).unwrap();
        let err = bad.stages(j.prior(), j.channel()).unwrap_err().to_string();
        assert!(err.contains("nope"));
    }
}
