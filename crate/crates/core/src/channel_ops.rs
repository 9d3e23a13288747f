//! Channel algebra: similarity, reduction, splitting, post-processing,
//! adaptive composition, the shattering channel, and composition bounds.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::leakage::conditional_pml;
use crate::model::{Channel, Joint, Prior};
use crate::scalar::{gt, le, Scalar};

/// Letters allowed in a constructed alphabet before giving up.
pub const MAX_CONSTRUCTED_LETTERS: usize = 1 << 16;

/// Whether two supported outputs have the same posterior.
pub fn are_similar<S: Scalar>(joint: &Joint<S>, y: usize, y2: usize) -> Result<bool> {
    joint.require_supported(y)?;
    joint.require_supported(y2)?;
    Ok(similar_unchecked(joint, y, y2))
}

fn similar_unchecked<S: Scalar>(joint: &Joint<S>, y: usize, y2: usize) -> bool {
    // P(y|x)/P_Y(y) = P(y2|x)/P_Y(y2) for all x, compared on posteriors so the
    // float tolerance is relative to probabilities.
    (0..joint.n_x()).all(|x| {
        let a = joint.cond(x, y).clone() / joint.p_y(y).clone();
        let b = joint.cond(x, y2).clone() / joint.p_y(y2).clone();
        a.approx_eq(&b)
    })
}

/// The reduced channel of a joint and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedChannelMap<S> {
    /// Joint with the reduced channel and the original prior.
    pub joint: Joint<S>,
    /// For each reduced output, the original outputs merged into it.
    pub merge_map: Vec<Vec<usize>>,
    /// Original outputs with zero marginal mass.
    pub dropped: Vec<usize>,
}

impl<S: Scalar> ReducedChannelMap<S> {
    pub fn reduced(&self) -> &Channel<S> {
        self.joint.channel()
    }

    /// Reduced output containing original output `y`, if `y` was kept.
    pub fn class_of(&self, y: usize) -> Option<usize> {
        self.merge_map.iter().position(|members| members.contains(&y))
    }
}

/// Similarity classes of supported outputs, in order of their first member.
fn similarity_classes<S: Scalar>(joint: &Joint<S>) -> Vec<Vec<usize>> {
    let support = joint.support_y();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    if S::MODE == crate::scalar::Mode::Rational {
        let mut index = HashMap::new();
        for &y in support {
            let key: Vec<(num_bigint::BigInt, num_bigint::BigInt)> = (0..joint.n_x())
                .map(|x| {
                    (joint.cond(x, y).clone() / joint.p_y(y).clone())
                        .exact_key()
                        .expect("rational key")
                })
                .collect();
            match index.get(&key) {
                Some(&c) => {
                    let class: &mut Vec<usize> = &mut classes[c];
                    class.push(y)
                }
                None => {
                    index.insert(key, classes.len());
                    classes.push(vec![y]);
                }
            }
        }
    } else {
        for &y in support {
            match classes.iter_mut().find(|c| similar_unchecked(joint, c[0], y)) {
                Some(class) => class.push(y),
                None => classes.push(vec![y]),
            }
        }
    }
    classes
}

/// Drops zero-mass outputs and merges similar outputs by adding their columns.
pub fn reduce<S: Scalar>(joint: &Joint<S>) -> ReducedChannelMap<S> {
    let merge_map = similarity_classes(joint);
    let rows = (0..joint.n_x())
        .map(|x| {
            merge_map
                .iter()
                .map(|members| {
                    members
                        .iter()
                        .fold(S::zero(), |acc, &y| acc + joint.cond(x, y).clone())
                })
                .collect()
        })
        .collect();
    let labels_y = merge_map
        .iter()
        .map(|members| {
            members
                .iter()
                .map(|&y| joint.label_y(y))
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    let channel = Channel::new(joint.prior().labels().to_vec(), labels_y, rows)
        .expect("merged columns of a stochastic matrix stay stochastic");
    ReducedChannelMap {
        joint: Joint::new(joint.prior().clone(), channel).expect("same prior"),
        merge_map,
        dropped: joint.unsupported_y(),
    }
}

/// Replaces output `y` by two similar outputs carrying fractions ζ and 1−ζ of
/// its column; the second copy is inserted right after the first.
pub fn split_outcome<S: Scalar>(joint: &Joint<S>, y: usize, zeta: &S) -> Result<Joint<S>> {
    if !gt(zeta, &S::zero()) || !gt(&S::one(), zeta) {
        return Err(Error::InvalidZeta(zeta.to_repr()));
    }
    joint.require_supported(y)?;
    let rest = S::one() - zeta.clone();
    let rows = (0..joint.n_x())
        .map(|x| {
            let mut row = joint.channel().row(x).to_vec();
            let v = row[y].clone();
            row[y] = zeta.clone() * v.clone();
            row.insert(y + 1, rest.clone() * v);
            row
        })
        .collect();
    let mut labels = joint.channel().labels_y().to_vec();
    let base = labels[y].clone();
    labels[y] = format!("{base}#1");
    labels.insert(y + 1, format!("{base}#2"));
    Joint::new(
        joint.prior().clone(),
        Channel::new(joint.prior().labels().to_vec(), labels, rows)?,
    )
}

/// Joint of X and Z = k(Y), i.e. P_{Z|X} = P_{Y|X} ∘ P_{Z|Y}.
pub fn postprocess<S: Scalar>(joint: &Joint<S>, k: &Channel<S>) -> Result<Joint<S>> {
    Joint::new(joint.prior().clone(), joint.channel().then(k)?)
}

/// Adaptive composition of P_{Y|X} with a family P_{Z|X,Y=y}.
#[derive(Debug, Clone)]
pub struct AdaptiveComposition<S> {
    /// Joint of X and the pair (Y, Z); output `y * |Z| + z` is the pair (y, z).
    pub joint: Joint<S>,
    /// Joint of X and the first-stage output.
    pub first: Joint<S>,
    stages: Vec<Channel<S>>,
    stacked: Channel<S>,
}

impl<S: Scalar> AdaptiveComposition<S> {
    pub fn n_first(&self) -> usize {
        self.first.n_y()
    }

    pub fn n_second(&self) -> usize {
        self.stages[0].n_outputs()
    }

    pub fn pair(&self, y: usize, z: usize) -> usize {
        y * self.n_second() + z
    }

    pub fn unpair(&self, yz: usize) -> (usize, usize) {
        (yz / self.n_second(), yz % self.n_second())
    }

    /// Second-stage channel used after first-stage output `y`.
    pub fn stage(&self, y: usize) -> &Channel<S> {
        &self.stages[y]
    }

    /// Second stage as seen by an adversary who already observed `y`: the
    /// stage channel under the prior P_{X|Y=y}.
    pub fn stage_joint(&self, y: usize) -> Result<Joint<S>> {
        let post = self.first.posterior(y)?;
        let prior = Prior::new(self.first.prior().labels().to_vec(), post)?;
        Joint::new(prior, self.stages[y].clone())
    }

    /// ℓ(X → z | y) as a ratio.
    pub fn conditional_pml(&self, z: usize, y: usize) -> Result<S> {
        conditional_pml(self.first.prior(), self.first.channel(), &self.stacked, z, y)
    }

    /// P_{Z|Y=y}(z).
    pub fn second_given_first(&self, z: usize, y: usize) -> Result<S> {
        self.first.require_supported(y)?;
        Ok(self.joint.p_y(self.pair(y, z)).clone() / self.first.p_y(y).clone())
    }
}

/// Composes `first` with one second-stage channel per first-stage output.
///
/// `stages[y]` may be `None` only when `y` has zero marginal mass. Every stage
/// has one row per prior entry and all stages share the same output labels.
pub fn compose_adaptive<S: Scalar>(
    prior: &Prior<S>,
    first: &Channel<S>,
    stages: &[Option<Channel<S>>],
) -> Result<AdaptiveComposition<S>> {
    let first_joint = Joint::new(prior.clone(), first.clone())?;
    if stages.len() != first.n_outputs() {
        return Err(Error::ShapeMismatch(format!(
            "{} second-stage channels for {} first-stage outputs",
            stages.len(),
            first.n_outputs()
        )));
    }
    let template = stages
        .iter()
        .flatten()
        .next()
        .ok_or_else(|| Error::MissingStage(first.labels_y()[0].clone()))?;
    let labels_z = template.labels_y().to_vec();
    let nz = labels_z.len();
    let keep: Vec<usize> = prior.support();
    let mut filled = Vec::with_capacity(stages.len());
    for (y, stage) in stages.iter().enumerate() {
        let label_y = &first.labels_y()[y];
        let stage = match stage {
            Some(s) => {
                if s.n_inputs() != prior.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "stage for `{label_y}` has {} rows, prior has {}",
                        s.n_inputs(),
                        prior.len()
                    )));
                }
                if s.labels_y() != labels_z.as_slice() {
                    return Err(Error::ShapeMismatch(format!(
                        "stage for `{label_y}` uses different output labels"
                    )));
                }
                Channel::new(
                    first_joint.prior().labels().to_vec(),
                    labels_z.clone(),
                    keep.iter().map(|&x| s.row(x).to_vec()).collect(),
                )?
            }
            None if first_joint.is_supported(y) => {
                return Err(Error::MissingStage(label_y.clone()));
            }
            None => {
                // Never reached with positive probability; any stochastic row works.
                let row: Vec<S> = (0..nz)
                    .map(|z| if z == 0 { S::one() } else { S::zero() })
                    .collect();
                Channel::new(
                    first_joint.prior().labels().to_vec(),
                    labels_z.clone(),
                    vec![row; keep.len()],
                )?
            }
        };
        filled.push(stage);
    }
    let ny = first.n_outputs();
    let fc = first_joint.channel();
    let rows = (0..first_joint.n_x())
        .map(|x| {
            (0..ny)
                .flat_map(|y| {
                    let p = fc.get(x, y).clone();
                    filled[y]
                        .row(x)
                        .iter()
                        .map(move |q| p.clone() * q.clone())
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    let labels_yz = (0..ny)
        .flat_map(|y| {
            labels_z
                .iter()
                .map(move |z| format!("{},{}", first.labels_y()[y], z))
        })
        .collect();
    let joint = Joint::new(
        first_joint.prior().clone(),
        Channel::new(first_joint.prior().labels().to_vec(), labels_yz, rows)?,
    )?;
    let stacked_labels = (0..first_joint.n_x())
        .flat_map(|x| (0..ny).map(move |y| (x, y)))
        .map(|(x, y)| format!("{},{}", first_joint.label_x(x), first.labels_y()[y]))
        .collect();
    let stacked_rows = (0..first_joint.n_x())
        .flat_map(|x| (0..ny).map(move |y| (x, y)))
        .map(|(x, y)| filled[y].row(x).to_vec())
        .collect();
    let stacked = Channel::new(stacked_labels, labels_z, stacked_rows)?;
    Ok(AdaptiveComposition {
        joint,
        first: first_joint,
        stages: filled,
        stacked,
    })
}

/// Kernel P_{U|X} splitting each x into ⌈P_X(x)/p*⌉ letters of mass at most
/// p* = min P_X; rows cover the support of the prior.
pub fn shattering_channel<S: Scalar>(prior: &Prior<S>) -> Result<Channel<S>> {
    let support = prior.support();
    let p_star = prior.min_positive();
    let mut blocks = Vec::with_capacity(support.len());
    let mut total = 0usize;
    for &x in &support {
        let px = prior.prob(x).clone();
        let k = px.clone() / p_star.clone();
        let whole = k.floor_int() as usize;
        let letters = if k.is_integral() { whole } else { whole + 1 };
        total = total.saturating_add(letters);
        if total > MAX_CONSTRUCTED_LETTERS {
            return Err(Error::AlphabetTooLarge {
                size: total,
                limit: MAX_CONSTRUCTED_LETTERS,
            });
        }
        let share = p_star.clone() / px;
        let mut weights = vec![share.clone(); whole];
        if letters > whole {
            weights.push(S::one() - S::from_u64(whole as u64) * share);
        }
        blocks.push(weights);
    }
    let labels_u = support
        .iter()
        .zip(&blocks)
        .flat_map(|(&x, w)| (1..=w.len()).map(move |j| format!("{},{}", prior.label(x), j)))
        .collect();
    let mut rows = Vec::with_capacity(support.len());
    let mut offset = 0;
    for weights in &blocks {
        let mut row = vec![S::zero(); total];
        for (j, w) in weights.iter().enumerate() {
            row[offset + j] = w.clone();
        }
        offset += weights.len();
        rows.push(row);
    }
    let labels_x = support.iter().map(|&x| prior.label(x).to_string()).collect();
    Channel::new(labels_x, labels_u, rows)
}

/// An (ε, δ) pair with ε stored as the ratio exp(ε).
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyParams<S> {
    pub eps_ratio: S,
    pub delta: S,
}

impl<S: Scalar> PrivacyParams<S> {
    pub fn new(eps_ratio: S, delta: S) -> Result<Self> {
        if !le(&S::one(), &eps_ratio) {
            return Err(Error::InvalidEpsilon(eps_ratio.to_repr()));
        }
        if delta < S::zero() || gt(&delta, &S::one()) {
            return Err(Error::InvalidDelta(delta.to_repr()));
        }
        Ok(PrivacyParams { eps_ratio, delta })
    }

    pub fn pure(eps_ratio: S) -> Result<Self> {
        Self::new(eps_ratio, S::zero())
    }

    pub fn epsilon_nats(&self) -> f64 {
        self.eps_ratio.ln()
    }
}

/// Composition rules for PML guarantees of an adaptive two-stage mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmlComposition {
    /// Both stages ε-PML (second stage for every first output).
    AlmostSure,
    /// Both stages (ε, δ)-PML, the second for every first output.
    PerOutputTail,
    /// First stage (ε₁, δ₁)-PML; ℓ(X→Z|Y) ≤ ε₂ with probability ≥ 1 − δ₂ over (Y, Z).
    JointTail,
}

/// Composed (ε, δ) for PML guarantees; ε composes by ratio product.
pub fn compose_pml_bounds<S: Scalar>(
    rule: PmlComposition,
    first: &PrivacyParams<S>,
    second: &PrivacyParams<S>,
) -> Result<PrivacyParams<S>> {
    let eps = first.eps_ratio.clone() * second.eps_ratio.clone();
    let (d1, d2) = (first.delta.clone(), second.delta.clone());
    let delta = match rule {
        PmlComposition::AlmostSure => {
            for d in [&d1, &d2] {
                if !d.is_zero() {
                    return Err(Error::InvalidDelta(d.to_repr()));
                }
            }
            S::zero()
        }
        PmlComposition::PerOutputTail => d1.clone() + d2.clone() - d1 * d2,
        PmlComposition::JointTail => clamp_unit(d1 + d2),
    };
    PrivacyParams::new(eps, delta)
}

/// Composition rules for EML guarantees of an adaptive two-stage mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmlComposition {
    /// First stage (ε₁, δ₁)-EML, second stage ε₂-PML for every first output.
    PmlSecondStage,
    /// Both stages (ε, δ)-EML, the second for every first output.
    EmlSecondStage,
}

/// Composed (ε, δ) for EML guarantees. `prior` supplies ε_max for the
/// [`EmlComposition::EmlSecondStage`] rule.
pub fn compose_eml_bounds<S: Scalar>(
    rule: EmlComposition,
    first: &PrivacyParams<S>,
    second: &PrivacyParams<S>,
    prior: &Prior<S>,
) -> Result<PrivacyParams<S>> {
    let product = first.eps_ratio.clone() * second.eps_ratio.clone();
    match rule {
        EmlComposition::PmlSecondStage => {
            if !second.delta.is_zero() {
                return Err(Error::InvalidDelta(format!(
                    "{} (second stage must be pure; use event_condition_holds for δ₂ > 0)",
                    second.delta.to_repr()
                )));
            }
            PrivacyParams::new(product, first.delta.clone())
        }
        EmlComposition::EmlSecondStage => {
            let total = first.delta.clone() + second.delta.clone();
            if total.is_zero() {
                return PrivacyParams::new(product, S::zero());
            }
            let eps_max = crate::leakage::eps_max(prior);
            let ratio = second.delta.clone() / total.clone() * eps_max + product;
            PrivacyParams::new(ratio, clamp_unit(total))
        }
    }
}

fn clamp_unit<S: Scalar>(v: S) -> S {
    if v > S::one() {
        S::one()
    } else {
        v
    }
}

/// Whether an event over (Y, Z) pairs meets the condition under which the
/// second-stage EML parameter δ₂ composes: δ₂ ≤ min over y in the event of
/// P_{Z|Y=y}(E_Z(y)).
pub fn event_condition_holds<S: Scalar>(
    comp: &AdaptiveComposition<S>,
    event: &[(usize, usize)],
    delta2: &S,
) -> Result<bool> {
    let mut by_y: std::collections::BTreeMap<usize, S> = std::collections::BTreeMap::new();
    for &(y, z) in event {
        if !comp.joint.is_supported(comp.pair(y, z)) {
            continue;
        }
        let p = comp.second_given_first(z, y)?;
        let slot = by_y.entry(y).or_insert_with(S::zero);
        *slot = slot.clone() + p;
    }
    Ok(by_y.values().all(|mass| le(delta2, mass)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::leakage::{leakage_distribution, maximal_leakage, pml};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn similarity_examples() {
        let c = fix_c::<Rational>();
        assert!(are_similar(&c, 2, 3).unwrap());
        assert!(!are_similar(&c, 0, 2).unwrap());
        for y in 0..4 {
            assert!(are_similar(&c, y, y).unwrap());
        }
    }

    #[test]
    fn fix_c_reduces_to_three_outputs() {
        let r = reduce(&fix_c::<Rational>());
        assert_eq!(r.merge_map, vec![vec![0], vec![1], vec![2, 3]]);
        assert_eq!(r.reduced().column(2), vec![q(1, 1), q(1, 1), q(2, 3), q(2, 3)]);
        assert_eq!(r.reduced().labels_y()[2], "y3+y4");
        assert_eq!(r.joint.output_marginal(), &[q(1, 12), q(1, 12), q(5, 6)]);
        assert_eq!(pml(&r.joint, 2).unwrap(), q(6, 5));
    }

    #[test]
    fn reduce_in_float_mode_matches() {
        let r = reduce(&fix_c::<f64>());
        assert_eq!(r.merge_map, vec![vec![0], vec![1], vec![2, 3]]);
    }

    #[test]
    fn reduce_edge_cases() {
        let d = fix_d::<Rational>();
        let r = reduce(&d);
        assert_eq!(r.merge_map, vec![vec![0], vec![1]]);
        assert_eq!(r.reduced(), d.channel());
        let row = vec![q(1, 4), q(1, 4), q(1, 2)];
        let indep = Joint::new(
            Prior::uniform(2),
            Channel::from_rows(vec![row.clone(), row]).unwrap(),
        )
        .unwrap();
        let r = reduce(&indep);
        assert_eq!(r.merge_map, vec![vec![0, 1, 2]]);
        assert_eq!(r.reduced().column(0), vec![q(1, 1), q(1, 1)]);
    }

    #[test]
    fn splitting_round_trips_through_reduce() {
        let d = fix_d::<Rational>();
        let s = split_outcome(&d, 0, &q(1, 2)).unwrap();
        assert_eq!(s.n_y(), 3);
        assert!(are_similar(&s, 0, 1).unwrap());
        assert_eq!(reduce(&s).reduced().rows(), reduce(&d).reduced().rows());
        assert!(matches!(
            split_outcome(&d, 0, &q(1, 1)),
            Err(Error::InvalidZeta(_))
        ));
        assert!(matches!(
            split_outcome(&d, 0, &q(0, 1)),
            Err(Error::InvalidZeta(_))
        ));
    }

    #[test]
    fn fix_c_postprocessing() {
        let z = postprocess(&fix_c::<Rational>(), &fix_c_postprocess()).unwrap();
        assert_eq!(
            z.channel().rows(),
            &[
                vec![q(1, 2), q(1, 2)],
                vec![q(1, 2), q(1, 2)],
                vec![q(1, 3), q(2, 3)],
                vec![q(2, 3), q(1, 3)],
            ]
        );
        assert_eq!(z.output_marginal(), &[q(1, 2), q(1, 2)]);
        assert_eq!(pml(&z, 0).unwrap(), q(4, 3));
        assert_eq!(pml(&z, 1).unwrap(), q(4, 3));
    }

    #[test]
    fn trivial_postprocessings() {
        let c = fix_c::<Rational>();
        assert_eq!(postprocess(&c, &Channel::identity(4)).unwrap().channel().rows(), c.channel().rows());
        let constant = Channel::from_rows(vec![vec![q(1, 3), q(2, 3)]; 4]).unwrap();
        let z = postprocess(&c, &constant).unwrap();
        assert!(leakage_distribution(&z).entries.iter().all(|e| e.ratio == q(1, 1)));
        assert!(matches!(
            postprocess(&c, &Channel::identity(3)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn independent_second_stage_keeps_first_stage_leakage() {
        let d = fix_d::<Rational>();
        let stage = Channel::from_rows(vec![vec![q(1, 5), q(4, 5)]; 2]).unwrap();
        let comp = compose_adaptive(d.prior(), d.channel(), &[Some(stage.clone()), Some(stage)]).unwrap();
        for y in 0..2 {
            for z in 0..2 {
                assert_eq!(pml(&comp.joint, comp.pair(y, z)).unwrap(), pml(&d, y).unwrap());
            }
        }
    }

    #[test]
    fn copying_the_secret_reaches_eps_max() {
        let d = fix_d::<Rational>();
        let copy = Channel::identity(2);
        let comp = compose_adaptive(d.prior(), d.channel(), &[Some(copy.clone()), Some(copy)]).unwrap();
        for yz in comp.joint.support_y().to_vec() {
            assert_eq!(pml(&comp.joint, yz).unwrap(), q(2, 1));
        }
    }

    #[test]
    fn side_information_fixture_as_composition() {
        let e = fix_e::<Rational>();
        let stages: Vec<_> = (0..2)
            .map(|z| {
                let rows = (0..2).map(|x| e.channel_y.row(x * 2 + z).to_vec()).collect();
                Some(Channel::from_rows(rows).unwrap())
            })
            .collect();
        let comp = compose_adaptive(&e.prior, &e.channel_z, &stages).unwrap();
        assert_eq!(comp.conditional_pml(0, 0).unwrap(), q(10, 9));
        assert_eq!(comp.conditional_pml(0, 1).unwrap(), q(5, 4));
        assert_eq!(pml(&comp.stage_joint(1).unwrap(), 0).unwrap(), q(5, 4));
    }

    #[test]
    fn missing_stage_is_reported_by_label() {
        let d = fix_d::<Rational>();
        let stage = Channel::identity(2);
        assert_eq!(
            compose_adaptive(d.prior(), d.channel(), &[Some(stage), None]).unwrap_err(),
            Error::MissingStage("y2".into())
        );
    }

    #[test]
    fn shattering_examples() {
        let u = shattering_channel(&Prior::<Rational>::uniform(3)).unwrap();
        assert_eq!(u.rows(), Channel::<Rational>::identity(3).rows());

        let u = shattering_channel(&Prior::from_probs(vec![q(2, 3), q(1, 3)]).unwrap()).unwrap();
        assert_eq!(u.rows(), &[vec![q(1, 2), q(1, 2), q(0, 1)], vec![q(0, 1), q(0, 1), q(1, 1)]]);

        let u = shattering_channel(&Prior::from_probs(vec![q(3, 5), q(2, 5)]).unwrap()).unwrap();
        assert_eq!(u.rows(), &[vec![q(2, 3), q(1, 3), q(0, 1)], vec![q(0, 1), q(0, 1), q(1, 1)]]);
        assert_eq!(u.labels_y(), &["x1,1", "x1,2", "x2,1"]);
    }

    #[test]
    fn shattered_letters_have_mass_at_most_p_star() {
        let prior = Prior::from_probs(vec![q(1, 7), q(4, 7), q(2, 7)]).unwrap();
        let u = shattering_channel(&prior).unwrap();
        let joint = Joint::new(prior, u).unwrap();
        assert!(joint.output_marginal().iter().all(|m| *m <= q(1, 7)));
        assert_eq!(joint.output_marginal().iter().max().unwrap(), &q(1, 7));
    }

    #[test]
    fn pml_composition_rules() {
        let p = |e, d| PrivacyParams::new(e, d).unwrap();
        let out = compose_pml_bounds(PmlComposition::AlmostSure, &p(q(2, 1), q(0, 1)), &p(q(3, 1), q(0, 1))).unwrap();
        assert_eq!(out, p(q(6, 1), q(0, 1)));
        let a = p(q(6, 5), q(1, 6));
        let out = compose_pml_bounds(PmlComposition::PerOutputTail, &a, &a).unwrap();
        assert_eq!(out.delta, q(11, 36));
        let out = compose_pml_bounds(PmlComposition::JointTail, &a, &a).unwrap();
        assert_eq!(out.delta, q(1, 3));
        assert!(matches!(
            compose_pml_bounds(PmlComposition::AlmostSure, &a, &a),
            Err(Error::InvalidDelta(_))
        ));
        assert!(matches!(PrivacyParams::new(q(1, 2), q(0, 1)), Err(Error::InvalidEpsilon(_))));
        assert!(matches!(PrivacyParams::new(q(2, 1), q(3, 2)), Err(Error::InvalidDelta(_))));
    }

    #[test]
    fn eml_composition_rules() {
        let prior = Prior::<Rational>::uniform(4);
        let p = |e, d| PrivacyParams::new(e, d).unwrap();
        let first = p(q(6, 5), q(1, 10));
        let out = compose_eml_bounds(EmlComposition::PmlSecondStage, &first, &p(q(3, 2), q(0, 1)), &prior).unwrap();
        assert_eq!(out, p(q(9, 5), q(1, 10)));
        let out = compose_eml_bounds(EmlComposition::EmlSecondStage, &first, &p(q(3, 2), q(0, 1)), &prior).unwrap();
        assert_eq!(out, p(q(9, 5), q(1, 10)));
        let out = compose_eml_bounds(EmlComposition::EmlSecondStage, &first, &p(q(6, 5), q(1, 10)), &prior).unwrap();
        assert_eq!(out, p(q(86, 25), q(1, 5)));
        assert!(compose_eml_bounds(EmlComposition::PmlSecondStage, &first, &first, &prior).is_err());
    }

    #[test]
    fn reduction_preserves_maximal_leakage() {
        let c = fix_c::<Rational>();
        assert_eq!(maximal_leakage(reduce(&c).reduced()), maximal_leakage(c.channel()));
    }
}
