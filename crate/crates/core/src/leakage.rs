//! Pointwise, conditional, event and maximal leakage.
//!
//! All quantities are returned as ratios exp(ℓ); take `ln` only for display.

use crate::error::{Error, Result};
use crate::model::{Channel, Event, Joint, Prior};
use crate::scalar::{gt, max_of, sum, Scalar};

/// Pointwise maximal leakage of output `y`: max_x P_{Y|X=x}(y) / P_Y(y).
pub fn pml<S: Scalar>(joint: &Joint<S>, y: usize) -> Result<S> {
    joint.require_supported(y)?;
    let top = max_of((0..joint.n_x()).map(|x| joint.cond(x, y))).expect("nonempty support");
    Ok(top / joint.p_y(y).clone())
}

/// Every input attaining the maximum in [`pml`], in index order.
pub fn pml_maximizers<S: Scalar>(joint: &Joint<S>, y: usize) -> Result<Vec<usize>> {
    joint.require_supported(y)?;
    let top = max_of((0..joint.n_x()).map(|x| joint.cond(x, y))).expect("nonempty support");
    Ok((0..joint.n_x())
        .filter(|&x| joint.cond(x, y).approx_eq(&top))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeakageEntry<S> {
    pub y: usize,
    pub mass: S,
    pub ratio: S,
}

/// The random variable ℓ(X→Y) as (output, P_Y, ratio) triples, sorted by
/// descending ratio with ties in output order.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageDistribution<S> {
    pub entries: Vec<LeakageEntry<S>>,
    /// Outputs with zero marginal mass; they carry no leakage.
    pub unsupported: Vec<usize>,
}

impl<S: Scalar> LeakageDistribution<S> {
    pub fn max_ratio(&self) -> S {
        self.entries[0].ratio.clone()
    }

    /// E[exp ℓ(X→Y)], which equals exp of the maximal leakage.
    pub fn expected_ratio(&self) -> S {
        self.entries
            .iter()
            .fold(S::zero(), |acc, e| acc + e.mass.clone() * e.ratio.clone())
    }

    /// E[ℓ(X→Y)] in nats.
    pub fn expected_leakage(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.mass.to_f64() * e.ratio.ln())
            .sum()
    }

    /// P_Y-mass of outputs whose ratio exceeds `threshold`.
    pub fn mass_above(&self, threshold: &S) -> S {
        sum(self
            .entries
            .iter()
            .filter(|e| gt(&e.ratio, threshold))
            .map(|e| &e.mass))
    }

    pub fn ratio_of(&self, y: usize) -> Option<&S> {
        self.entries.iter().find(|e| e.y == y).map(|e| &e.ratio)
    }
}

pub fn leakage_distribution<S: Scalar>(joint: &Joint<S>) -> LeakageDistribution<S> {
    let mut entries: Vec<LeakageEntry<S>> = joint
        .support_y()
        .iter()
        .map(|&y| LeakageEntry {
            y,
            mass: joint.p_y(y).clone(),
            ratio: pml(joint, y).expect("supported output"),
        })
        .collect();
    entries.sort_by(|a, b| {
        if a.ratio.approx_eq(&b.ratio) {
            a.y.cmp(&b.y)
        } else {
            b.ratio.partial_cmp(&a.ratio).expect("comparable ratios")
        }
    });
    LeakageDistribution {
        entries,
        unsupported: joint.unsupported_y(),
    }
}

/// ℓ(X→y | z) for Z drawn from P_{Z|X} and Y from P_{Y|X,Z}.
///
/// Rows of `channel_y` are indexed by (x, z) in x-major order, so row
/// `x * |Z| + z` is P_{Y|X=x,Z=z}.
pub fn conditional_pml<S: Scalar>(
    prior: &Prior<S>,
    channel_z: &Channel<S>,
    channel_y: &Channel<S>,
    y: usize,
    z: usize,
) -> Result<S> {
    let nz = channel_z.n_outputs();
    if channel_z.n_inputs() != prior.len() || channel_y.n_inputs() != prior.len() * nz {
        return Err(Error::ShapeMismatch(format!(
            "expected {} side-channel rows and {} conditional rows",
            prior.len(),
            prior.len() * nz
        )));
    }
    if z >= nz {
        return Err(Error::OutOfSupport(format!("side output #{z}")));
    }
    if y >= channel_y.n_outputs() {
        return Err(Error::OutOfSupport(format!("output #{y}")));
    }
    // P_{XZ}(x, z) for the fixed z; normalizing gives P_{X|Z=z}.
    let weights: Vec<S> = (0..prior.len())
        .map(|x| prior.prob(x).clone() * channel_z.get(x, z).clone())
        .collect();
    let p_z = sum(&weights);
    if !gt(&p_z, &S::zero()) {
        return Err(Error::OutOfSupport(channel_z.labels_y()[z].clone()));
    }
    let active: Vec<usize> = (0..prior.len())
        .filter(|&x| gt(&weights[x], &S::zero()))
        .collect();
    let p_yz = active.iter().fold(S::zero(), |acc, &x| {
        acc + weights[x].clone() * channel_y.get(x * nz + z, y).clone()
    });
    if !gt(&p_yz, &S::zero()) {
        return Err(Error::OutOfSupport(format!(
            "{} given {}",
            channel_y.labels_y()[y],
            channel_z.labels_y()[z]
        )));
    }
    let p_y_given_z = p_yz / p_z;
    let top = max_of(active.iter().map(|&x| channel_y.get(x * nz + z, y))).expect("active inputs");
    Ok(top / p_y_given_z)
}

fn event_masses<S: Scalar>(joint: &Joint<S>, e: &Event<S>) -> Result<(Vec<S>, S)> {
    for y in e.touched() {
        if y >= joint.n_y() {
            return Err(Error::OutOfSupport(format!("output #{y}")));
        }
    }
    for &y in e.members() {
        joint.require_supported(y)?;
    }
    let touched = e.touched();
    let weighted = |values: &dyn Fn(usize) -> S| {
        touched
            .iter()
            .fold(S::zero(), |acc, &y| acc + e.weight(y) * values(y))
    };
    let denom = weighted(&|y| joint.p_y(y).clone());
    if !gt(&denom, &S::zero()) {
        return Err(Error::ZeroProbabilityEvent);
    }
    let numers = (0..joint.n_x())
        .map(|x| weighted(&|y| joint.cond(x, y).clone()))
        .collect();
    Ok((numers, denom))
}

/// max_x P_{Y|X=x}(E) / P_Y(E), with a split output weighted by ζ.
pub fn event_leakage<S: Scalar>(joint: &Joint<S>, e: &Event<S>) -> Result<S> {
    let (numers, denom) = event_masses(joint, e)?;
    Ok(max_of(&numers).expect("nonempty support") / denom)
}

/// Probability of an event under P_Y, counting the split output at weight ζ.
pub fn event_probability<S: Scalar>(joint: &Joint<S>, e: &Event<S>) -> S {
    e.touched()
        .into_iter()
        .filter(|&y| y < joint.n_y())
        .fold(S::zero(), |acc, y| acc + e.weight(y) * joint.p_y(y).clone())
}

/// exp of maximal leakage: Σ_y max_x P_{Y|X=x}(y). Independent of the prior.
pub fn maximal_leakage<S: Scalar>(channel: &Channel<S>) -> S {
    (0..channel.n_outputs()).fold(S::zero(), |acc, y| {
        acc + max_of(channel.rows().iter().map(|row| &row[y])).expect("nonempty channel")
    })
}

/// 1 / min_x P_X(x), the largest PML ratio any channel can reach under `prior`.
pub fn eps_max<S: Scalar>(prior: &Prior<S>) -> S {
    prior.min_positive().recip()
}
