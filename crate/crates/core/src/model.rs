//! Priors, channels, joints and events.
//!
//! A [`Joint`] is the validated pair (P_X, P_{Y|X}). Inputs with zero prior
//! mass are dropped at construction; outputs with zero marginal mass are kept
//! for channel algebra but excluded from every leakage quantifier.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::{gt, sum, Scalar};

fn check_distinct(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::DuplicateLabel(label.clone()));
        }
    }
    Ok(())
}

fn is_unit<S: Scalar>(total: &S) -> bool {
    total.approx_eq(&S::one())
}

pub fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prior<S> {
    labels: Vec<String>,
    probs: Vec<S>,
}

impl<S: Scalar> Prior<S> {
    pub fn new(labels: Vec<String>, probs: Vec<S>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} input labels for {} prior entries",
                labels.len(),
                probs.len()
            )));
        }
        check_distinct(&labels)?;
        for (label, p) in labels.iter().zip(&probs) {
            if *p < S::zero() {
                return Err(Error::NegativeEntry {
                    label: label.clone(),
                    value: p.to_repr(),
                });
            }
        }
        let total = sum(&probs);
        if !is_unit(&total) {
            return Err(Error::NonStochasticPrior(total.to_repr()));
        }
        if probs.iter().all(|p| p.is_zero()) {
            return Err(Error::EmptySupport);
        }
        Ok(Prior { labels, probs })
    }

    pub fn from_probs(probs: Vec<S>) -> Result<Self> {
        Self::new(default_labels("x", probs.len()), probs)
    }

    pub fn uniform(n: usize) -> Self {
        let p = S::one() / S::from_u64(n as u64);
        Prior {
            labels: default_labels("x", n),
            probs: vec![p; n],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> &S {
        &self.probs[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    /// Indices with positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| gt(&self.probs[x], &S::zero()))
            .collect()
    }

    /// Smallest positive entry.
    pub fn min_positive(&self) -> S {
        self.support()
            .into_iter()
            .map(|x| self.probs[x].clone())
            .reduce(|a, b| if b < a { b } else { a })
            .expect("prior support is nonempty")
    }
}

/// Row-stochastic matrix P_{Y|X}; row `x`, column `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<S> {
    labels_x: Vec<String>,
    labels_y: Vec<String>,
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> Channel<S> {
    pub fn new(labels_x: Vec<String>, labels_y: Vec<String>, rows: Vec<Vec<S>>) -> Result<Self> {
        if labels_x.len() != rows.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} input labels for {} channel rows",
                labels_x.len(),
                rows.len()
            )));
        }
        if rows.is_empty() {
            return Err(Error::ShapeMismatch("channel has no rows".into()));
        }
        check_distinct(&labels_x)?;
        check_distinct(&labels_y)?;
        for (label, row) in labels_x.iter().zip(&rows) {
            if row.len() != labels_y.len() {
                return Err(Error::ShapeMismatch(format!(
                    "row `{label}` has {} entries for {} output labels",
                    row.len(),
                    labels_y.len()
                )));
            }
            for (y_label, v) in labels_y.iter().zip(row) {
                if *v < S::zero() {
                    return Err(Error::NegativeEntry {
                        label: format!("{label} -> {y_label}"),
                        value: v.to_repr(),
                    });
                }
            }
            let total = sum(row);
            if !is_unit(&total) {
                return Err(Error::NonStochasticRow {
                    label: label.clone(),
                    sum: total.to_repr(),
                });
            }
        }
        Ok(Channel {
            labels_x,
            labels_y,
            rows,
        })
    }

    /// Channel with labels `x1..` and `y1..`.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let ny = rows.first().map_or(0, Vec::len);
        Self::new(default_labels("x", rows.len()), default_labels("y", ny), rows)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { S::one() } else { S::zero() })
                    .collect()
            })
            .collect();
        Channel {
            labels_x: default_labels("x", n),
            labels_y: default_labels("y", n),
            rows,
        }
    }

    pub fn with_input_labels(mut self, labels_x: Vec<String>) -> Result<Self> {
        if labels_x.len() != self.rows.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} input labels for {} channel rows",
                labels_x.len(),
                self.rows.len()
            )));
        }
        check_distinct(&labels_x)?;
        self.labels_x = labels_x;
        Ok(self)
    }

    pub fn n_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.labels_y.len()
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &[S] {
        &self.rows[x]
    }

    pub fn get(&self, x: usize, y: usize) -> &S {
        &self.rows[x][y]
    }

    pub fn column(&self, y: usize) -> Vec<S> {
        self.rows.iter().map(|row| row[y].clone()).collect()
    }

    pub fn labels_x(&self) -> &[String] {
        &self.labels_x
    }

    pub fn labels_y(&self) -> &[String] {
        &self.labels_y
    }

    /// Output columns with at least one positive entry.
    pub fn nonzero_columns(&self) -> Vec<usize> {
        (0..self.n_outputs())
            .filter(|&y| self.rows.iter().any(|row| gt(&row[y], &S::zero())))
            .collect()
    }

    /// Matrix product `self ∘ next`, i.e. P_{Z|X} from P_{Y|X} and P_{Z|Y}.
    pub fn then(&self, next: &Channel<S>) -> Result<Channel<S>> {
        if next.n_inputs() != self.n_outputs() {
            return Err(Error::ShapeMismatch(format!(
                "post-processing expects {} inputs, channel has {} outputs",
                next.n_inputs(),
                self.n_outputs()
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                (0..next.n_outputs())
                    .map(|z| {
                        row.iter()
                            .zip(&next.rows)
                            .fold(S::zero(), |acc, (p, k)| acc + p.clone() * k[z].clone())
                    })
                    .collect()
            })
            .collect();
        Ok(Channel {
            labels_x: self.labels_x.clone(),
            labels_y: next.labels_y.clone(),
            rows,
        })
    }
}

/// Validated pair (P_X, P_{Y|X}) with cached output marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint<S> {
    prior: Prior<S>,
    channel: Channel<S>,
    output_marginal: Vec<S>,
    support_y: Vec<usize>,
    dropped_x: Vec<String>,
}

impl<S: Scalar> Joint<S> {
    pub fn new(prior: Prior<S>, channel: Channel<S>) -> Result<Self> {
        if prior.len() != channel.n_inputs() {
            return Err(Error::ShapeMismatch(format!(
                "prior has {} entries, channel has {} rows",
                prior.len(),
                channel.n_inputs()
            )));
        }
        if let Some((a, b)) = prior
            .labels()
            .iter()
            .zip(channel.labels_x())
            .find(|(a, b)| a != b)
        {
            return Err(Error::ShapeMismatch(format!(
                "prior label `{a}` does not match channel row label `{b}`"
            )));
        }
        let keep = prior.support();
        if keep.is_empty() {
            return Err(Error::EmptySupport);
        }
        let dropped_x = (0..prior.len())
            .filter(|x| !keep.contains(x))
            .map(|x| prior.label(x).to_string())
            .collect();
        let prior = Prior {
            labels: keep.iter().map(|&x| prior.labels[x].clone()).collect(),
            probs: keep.iter().map(|&x| prior.probs[x].clone()).collect(),
        };
        let channel = Channel {
            labels_x: prior.labels.clone(),
            labels_y: channel.labels_y.clone(),
            rows: keep.iter().map(|&x| channel.rows[x].clone()).collect(),
        };
        let output_marginal: Vec<S> = (0..channel.n_outputs())
            .map(|y| {
                prior
                    .probs
                    .iter()
                    .zip(&channel.rows)
                    .fold(S::zero(), |acc, (p, row)| acc + p.clone() * row[y].clone())
            })
            .collect();
        let support_y = (0..output_marginal.len())
            .filter(|&y| gt(&output_marginal[y], &S::zero()))
            .collect();
        Ok(Joint {
            prior,
            channel,
            output_marginal,
            support_y,
            dropped_x,
        })
    }

    pub fn prior(&self) -> &Prior<S> {
        &self.prior
    }

    pub fn channel(&self) -> &Channel<S> {
        &self.channel
    }

    pub fn n_x(&self) -> usize {
        self.prior.len()
    }

    pub fn n_y(&self) -> usize {
        self.channel.n_outputs()
    }

    pub fn p_x(&self, x: usize) -> &S {
        self.prior.prob(x)
    }

    pub fn p_y(&self, y: usize) -> &S {
        &self.output_marginal[y]
    }

    /// P_{Y|X=x}(y).
    pub fn cond(&self, x: usize, y: usize) -> &S {
        self.channel.get(x, y)
    }

    /// P_{XY}(x, y).
    pub fn mass(&self, x: usize, y: usize) -> S {
        self.p_x(x).clone() * self.cond(x, y).clone()
    }

    pub fn output_marginal(&self) -> &[S] {
        &self.output_marginal
    }

    pub fn support_y(&self) -> &[usize] {
        &self.support_y
    }

    /// Outputs with zero marginal mass, retained for channel algebra.
    pub fn unsupported_y(&self) -> Vec<usize> {
        (0..self.n_y())
            .filter(|y| !self.support_y.contains(y))
            .collect()
    }

    /// Labels of inputs removed because their prior mass was zero.
    pub fn dropped_x(&self) -> &[String] {
        &self.dropped_x
    }

    pub fn is_supported(&self, y: usize) -> bool {
        y < self.n_y() && gt(&self.output_marginal[y], &S::zero())
    }

    pub fn label_x(&self, x: usize) -> &str {
        self.prior.label(x)
    }

    pub fn label_y(&self, y: usize) -> &str {
        &self.channel.labels_y[y]
    }

    pub(crate) fn require_supported(&self, y: usize) -> Result<()> {
        if y >= self.n_y() {
            return Err(Error::OutOfSupport(format!("output #{y}")));
        }
        if !self.is_supported(y) {
            return Err(Error::OutOfSupport(self.label_y(y).to_string()));
        }
        Ok(())
    }

    pub fn posterior(&self, y: usize) -> Result<Vec<S>> {
        self.require_supported(y)?;
        let p_y = self.p_y(y).clone();
        Ok((0..self.n_x())
            .map(|x| self.mass(x, y) / p_y.clone())
            .collect())
    }

    /// P_{Y|X=x}(y) / P_Y(y), the exponential of the information density.
    pub fn info_density(&self, x: usize, y: usize) -> Result<S> {
        if x >= self.n_x() {
            return Err(Error::OutOfSupport(format!("input #{x}")));
        }
        self.require_supported(y)?;
        Ok(self.cond(x, y).clone() / self.p_y(y).clone())
    }

    /// Same joint with a different channel over the same inputs.
    pub fn with_channel(&self, channel: Channel<S>) -> Result<Joint<S>> {
        Joint::new(self.prior.clone(), channel.with_input_labels(self.prior.labels.clone())?)
    }
}

pub fn validate_model<S: Scalar>(prior: Prior<S>, channel: Channel<S>) -> Result<Joint<S>> {
    Joint::new(prior, channel)
}

pub fn posterior<S: Scalar>(joint: &Joint<S>, y: usize) -> Result<Vec<S>> {
    joint.posterior(y)
}

pub fn info_density<S: Scalar>(joint: &Joint<S>, x: usize, y: usize) -> Result<S> {
    joint.info_density(x, y)
}

/// A set of outputs, optionally plus a fraction ζ of one more output.
#[derive(Debug, Clone, PartialEq)]
pub struct Event<S> {
    members: Vec<usize>,
    split: Option<(usize, S)>,
}

impl<S: Scalar> Event<S> {
    pub fn new(members: impl IntoIterator<Item = usize>, split: Option<(usize, S)>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some((y, zeta)) = &split {
            if !gt(zeta, &S::zero()) || gt(zeta, &S::one()) {
                return Err(Error::InvalidZeta(zeta.to_repr()));
            }
            if members.contains(y) {
                return Err(Error::InvalidZeta(format!(
                    "split output #{y} is already a full member"
                )));
            }
        }
        if members.is_empty() && split.is_none() {
            return Err(Error::EmptyEvent);
        }
        Ok(Event { members, split })
    }

    pub fn outcomes(members: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(members, None)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn split(&self) -> Option<&(usize, S)> {
        self.split.as_ref()
    }

    /// Total weight an output carries in the event.
    pub fn weight(&self, y: usize) -> S {
        if self.members.binary_search(&y).is_ok() {
            S::one()
        } else {
            match &self.split {
                Some((s, zeta)) if *s == y => zeta.clone(),
                _ => S::zero(),
            }
        }
    }

    /// Indices with nonzero weight.
    pub fn touched(&self) -> Vec<usize> {
        let mut out = self.members.clone();
        if let Some((y, _)) = &self.split {
            out.push(*y);
        }
        out
    }
}
