//! Other privacy and dependence measures and the PML-based bounds on them.

use std::str::FromStr;

use crate::channel_ops::PrivacyParams;
use crate::error::{Error, Result};
use crate::guarantees::check_eps_delta_pml;
use crate::leakage::{eps_max, leakage_distribution, maximal_leakage};
use crate::model::{Channel, Joint, Prior};
use crate::scalar::{ge, gt, le, max_of, Scalar};

/// Largest support for exhaustive event enumeration.
pub const MAX_EVENT_BITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FDivergence {
    /// t log t; gives mutual information.
    Kl,
    /// |t − 1| / 2; gives total variation privacy.
    Tv,
    /// (t − 1)².
    Chi2,
}

impl FDivergence {
    pub fn name(self) -> &'static str {
        match self {
            FDivergence::Kl => "kl",
            FDivergence::Tv => "tv",
            FDivergence::Chi2 => "chi2",
        }
    }

    pub fn eval(self, t: f64) -> f64 {
        match self {
            FDivergence::Kl if t == 0.0 => 0.0,
            FDivergence::Kl => t * t.ln(),
            FDivergence::Tv => (t - 1.0).abs() / 2.0,
            FDivergence::Chi2 => (t - 1.0) * (t - 1.0),
        }
    }

    /// f(0⁺).
    pub fn at_zero(self) -> f64 {
        self.eval(0.0)
    }
}

impl FromStr for FDivergence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kl" => Ok(FDivergence::Kl),
            "tv" => Ok(FDivergence::Tv),
            "chi2" => Ok(FDivergence::Chi2),
            other => Err(Error::UnknownF(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Ldp,
    ApproxLdp,
    Lip,
    Ldi,
    Mi,
    FInfo(FDivergence),
    Tv,
    MaxInfo,
    ApproxMaxInfo,
}

impl MeasureKind {
    pub fn name(self) -> String {
        match self {
            MeasureKind::Ldp => "LDP".into(),
            MeasureKind::ApproxLdp => "APPROX_LDP".into(),
            MeasureKind::Lip => "LIP".into(),
            MeasureKind::Ldi => "LDI".into(),
            MeasureKind::Mi => "MI".into(),
            MeasureKind::FInfo(f) => format!("F_INFO:{}", f.name()),
            MeasureKind::Tv => "TV".into(),
            MeasureKind::MaxInfo => "MAX_INFO".into(),
            MeasureKind::ApproxMaxInfo => "APPROX_MAX_INFO".into(),
        }
    }
}

/// A measure's value: an exact ratio or probability, a float in nats, an
/// infinite ratio, or a yes/no verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureValue<S> {
    Exact(S),
    Float(f64),
    Infinite,
    Holds(bool),
}

impl<S: Scalar> MeasureValue<S> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, MeasureValue::Infinite)
    }

    pub fn exact(&self) -> Option<&S> {
        match self {
            MeasureValue::Exact(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport<S> {
    pub measure: MeasureKind,
    pub value: MeasureValue<S>,
    /// PML ratio implied by the measure's value, where a bound is known.
    pub implied_pml_bound: Option<S>,
    /// Additional bound on the measure in terms of PML.
    pub pml_side_bound: Option<MeasureValue<S>>,
}

/// Running maximum of ratios a/b with a zero denominator meaning +∞.
struct RatioMax<S> {
    best: Option<S>,
    infinite: bool,
}

impl<S: Scalar> RatioMax<S> {
    fn new() -> Self {
        RatioMax {
            best: None,
            infinite: false,
        }
    }

    fn push(&mut self, num: &S, den: &S) {
        if self.infinite || !gt(num, &S::zero()) {
            if self.best.is_none() {
                self.best = Some(S::zero());
            }
            return;
        }
        if !gt(den, &S::zero()) {
            self.infinite = true;
            return;
        }
        let r = num.clone() / den.clone();
        if self.best.as_ref().is_none_or(|b| r > *b) {
            self.best = Some(r);
        }
    }

    fn finish(self) -> MeasureValue<S> {
        if self.infinite {
            MeasureValue::Infinite
        } else {
            let v = self.best.unwrap_or_else(S::one);
            MeasureValue::Exact(if v < S::one() { S::one() } else { v })
        }
    }
}

/// Smallest ratio r with P_{Y|X=x}(y) ≤ r·P_{Y|X=x'}(y) for all x, x', y.
pub fn ldp_epsilon<S: Scalar>(channel: &Channel<S>) -> MeasureValue<S> {
    let mut acc = RatioMax::new();
    for y in channel.nonzero_columns() {
        for a in channel.rows() {
            for b in channel.rows() {
                acc.push(&a[y], &b[y]);
            }
        }
    }
    acc.finish()
}

/// Whether P_{Y|X=x}(y) ≤ eps_ratio·P_{Y|X=x'}(y) + δ for all x, x', y.
pub fn approx_ldp_holds<S: Scalar>(channel: &Channel<S>, eps_ratio: &S, delta: &S) -> bool {
    (0..channel.n_outputs()).all(|y| {
        channel.rows().iter().all(|a| {
            channel
                .rows()
                .iter()
                .all(|b| le(&a[y], &(eps_ratio.clone() * b[y].clone() + delta.clone())))
        })
    })
}

/// Smallest ratio bounding P_{X|Y=y}(x)/P_X(x) from above and below.
pub fn lip_epsilon<S: Scalar>(joint: &Joint<S>) -> MeasureValue<S> {
    let mut acc = RatioMax::new();
    for &y in joint.support_y() {
        let post = joint.posterior(y).expect("supported");
        for (x, p) in post.iter().enumerate() {
            acc.push(p, joint.p_x(x));
            acc.push(joint.p_x(x), p);
        }
    }
    acc.finish()
}

/// Smallest ratio bounding P_{X|Y=y}(x)/P_{X|Y=y}(x').
pub fn ldi_epsilon<S: Scalar>(joint: &Joint<S>) -> MeasureValue<S> {
    let mut acc = RatioMax::new();
    for &y in joint.support_y() {
        let post = joint.posterior(y).expect("supported");
        for a in &post {
            for b in &post {
                acc.push(a, b);
            }
        }
    }
    acc.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalNotion {
    Ldp,
    Lip,
    Ldi,
}

/// PML ratio guaranteed by an LDP, LIP or LDI ratio under `prior`.
pub fn implied_pml_bound<S: Scalar>(
    kind: LocalNotion,
    eps_ratio: &MeasureValue<S>,
    prior: &Prior<S>,
) -> Result<S> {
    let r = match eps_ratio {
        MeasureValue::Exact(r) => r.clone(),
        MeasureValue::Float(v) => S::from_f64(v.exp()).ok_or(Error::InfiniteInput)?,
        MeasureValue::Infinite | MeasureValue::Holds(_) => return Err(Error::InfiniteInput),
    };
    let p_min = prior.min_positive();
    Ok(match kind {
        LocalNotion::Lip => r,
        LocalNotion::Ldp => {
            (p_min.clone() + (S::one() - p_min) / r).recip()
        }
        LocalNotion::Ldi => {
            let others = S::from_u64(prior.support().len() as u64 - 1);
            (p_min * (S::one() + others / r)).recip()
        }
    })
}

/// I(X; Y) in nats.
pub fn mutual_information<S: Scalar>(joint: &Joint<S>) -> f64 {
    let mut total = 0.0;
    for &y in joint.support_y() {
        for x in 0..joint.n_x() {
            let m = joint.mass(x, y);
            if gt(&m, &S::zero()) {
                let ratio = joint.info_density(x, y).expect("supported");
                total += m.to_f64() * ratio.ln();
            }
        }
    }
    total
}

/// I_f = E_{P_X P_Y}[f(P_{XY} / (P_X P_Y))].
pub fn f_information<S: Scalar>(joint: &Joint<S>, f: FDivergence) -> f64 {
    let mut total = 0.0;
    for &y in joint.support_y() {
        for x in 0..joint.n_x() {
            let ratio = joint.info_density(x, y).expect("supported").to_f64();
            total += joint.p_x(x).to_f64() * joint.p_y(y).to_f64() * f.eval(ratio);
        }
    }
    total
}

/// E_Y[max{f(exp ℓ(X→Y)), f(0)}], an upper bound on I_f.
pub fn f_info_pml_bound<S: Scalar>(joint: &Joint<S>, f: FDivergence) -> f64 {
    leakage_distribution(joint)
        .entries
        .iter()
        .map(|e| e.mass.to_f64() * f.eval(e.ratio.to_f64()).max(f.at_zero()))
        .sum()
}

/// T(X;Y) = E_Y[TV(P_{X|Y}, P_X)].
pub fn total_variation_privacy<S: Scalar>(joint: &Joint<S>) -> S {
    let half = S::frac(1, 2);
    joint.support_y().iter().fold(S::zero(), |acc, &y| {
        let post = joint.posterior(y).expect("supported");
        let tv = post
            .iter()
            .enumerate()
            .fold(S::zero(), |s, (x, p)| s + (p.clone() - joint.p_x(x).clone()).abs_val());
        acc + joint.p_y(y).clone() * half.clone() * tv
    })
}

/// Which of the three ε ranges of the (ε,δ)-PML bound on T applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvRegime {
    /// ε ≤ log 3/2.
    Small,
    /// log 3/2 ≤ ε ≤ log 2.
    Middle,
    /// ε ≥ log 2.
    Large,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvBounds<S> {
    /// exp(𝓛) − 1.
    pub maximal_leakage: S,
    /// ½ E_Y[max{exp ℓ(X→Y) − 1, 1}].
    pub pml_average: S,
    pub regime: TvRegime,
    /// Bound from the supplied (ε, δ)-PML guarantee.
    pub guarantee: S,
    /// Whether the joint actually satisfies the supplied guarantee.
    pub guarantee_holds: bool,
    /// (|X| − 1)·max P_X·(exp(𝓛) − 1); reported but never the tightest.
    pub cardinality: S,
}

impl<S: Scalar> TvBounds<S> {
    /// Smallest valid bound, ignoring the cardinality bound.
    pub fn tightest(&self) -> S {
        let mut best = if self.maximal_leakage < self.pml_average {
            self.maximal_leakage.clone()
        } else {
            self.pml_average.clone()
        };
        if self.guarantee_holds && self.guarantee < best {
            best = self.guarantee.clone();
        }
        best
    }
}

pub fn tv_bounds<S: Scalar>(joint: &Joint<S>, params: &PrivacyParams<S>) -> Result<TvBounds<S>> {
    let one = S::one();
    let half = S::frac(1, 2);
    let ml = maximal_leakage(joint.channel()) - one.clone();
    let pml_average = leakage_distribution(joint)
        .entries
        .iter()
        .fold(S::zero(), |acc, e| {
            let eta = e.ratio.clone() - one.clone();
            let m = if eta > one { eta } else { one.clone() };
            acc + e.mass.clone() * m
        })
        * half.clone();
    let eps = params.eps_ratio.clone();
    let tail = half.clone() * params.delta.clone() * (eps_max(joint.prior()) - one.clone());
    let (regime, head) = if le(&eps, &S::frac(3, 2)) {
        (TvRegime::Small, eps.clone() - one.clone())
    } else if le(&eps, &S::from_u64(2)) {
        (TvRegime::Middle, half.clone())
    } else {
        (TvRegime::Large, half.clone() * (eps.clone() - one.clone()))
    };
    let holds = check_eps_delta_pml(joint, &eps, &params.delta)?.holds;
    let p_max = max_of(joint.prior().probs()).expect("nonempty prior");
    let cardinality = S::from_u64(joint.n_x() as u64 - 1) * p_max * ml.clone();
    Ok(TvBounds {
        maximal_leakage: ml,
        pml_average,
        regime,
        guarantee: head + tail,
        guarantee_holds: holds,
        cardinality,
    })
}

/// exp I_∞(X;Y): the largest information density ratio.
pub fn max_information<S: Scalar>(joint: &Joint<S>) -> S {
    leakage_distribution(joint).max_ratio()
}

/// Support cells (x, y) of P_{XY} with masses under P_{XY} and P_X P_Y.
pub(crate) fn support_cells<S: Scalar>(joint: &Joint<S>) -> Vec<(S, S)> {
    let mut cells = Vec::new();
    for x in 0..joint.n_x() {
        for &y in joint.support_y() {
            let p = joint.mass(x, y);
            if gt(&p, &S::zero()) {
                cells.push((p, joint.p_x(x).clone() * joint.p_y(y).clone()));
            }
        }
    }
    cells
}

/// Sufficient bound: the smallest r with P_{XY}{density > r} ≤ δ.
pub fn max_info_tail_bound<S: Scalar>(joint: &Joint<S>, delta: &S) -> S {
    let mut cells: Vec<(S, S)> = support_cells(joint)
        .into_iter()
        .map(|(p, q)| (p.clone() / q, p))
        .collect();
    cells.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("comparable ratios"));
    let mut excluded = S::zero();
    let mut i = 0;
    while i < cells.len() {
        let level = cells[i].0.clone();
        let mut group = S::zero();
        let mut j = i;
        while j < cells.len() && cells[j].0.approx_eq(&level) {
            group = group + cells[j].1.clone();
            j += 1;
        }
        if gt(&(excluded.clone() + group.clone()), delta) {
            return level;
        }
        excluded = excluded + group;
        i = j;
    }
    S::zero()
}

/// exp I_∞^δ(X;Y) by enumerating events over the support of P_{XY}.
pub fn approx_max_information<S: Scalar>(joint: &Joint<S>, delta: &S) -> Result<S> {
    if *delta < S::zero() || gt(delta, &S::one()) {
        return Err(Error::InvalidDelta(delta.to_repr()));
    }
    let cells = support_cells(joint);
    let n = cells.len();
    if n > MAX_EVENT_BITS {
        return Err(Error::TooLargeForBruteForce {
            support: n,
            cap: MAX_EVENT_BITS,
            fallback: max_info_tail_bound(joint, delta).to_repr(),
        });
    }
    // Walk all nonempty subsets in Gray-code order, updating both masses by
    // one cell per step.
    let mut p = S::zero();
    let mut q = S::zero();
    let mut best: Option<S> = None;
    let mut in_set = vec![false; n];
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        let (cp, cq) = &cells[bit];
        if in_set[bit] {
            p = p - cp.clone();
            q = q - cq.clone();
        } else {
            p = p + cp.clone();
            q = q + cq.clone();
        }
        in_set[bit] = !in_set[bit];
        if ge(&p, delta) && gt(&q, &S::zero()) {
            let v = (p.clone() - delta.clone()) / q.clone();
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
    }
    Ok(best.unwrap_or_else(S::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn exact(v: Rational) -> MeasureValue<Rational> {
        MeasureValue::Exact(v)
    }

    fn independent() -> Joint<Rational> {
        let row = vec![q(1, 3), q(2, 3)];
        Joint::new(Prior::uniform(2), Channel::from_rows(vec![row.clone(), row]).unwrap()).unwrap()
    }

    #[test]
    fn ldp_examples() {
        assert_eq!(ldp_epsilon(fix_d::<Rational>().channel()), exact(q(3, 2)));
        assert_eq!(ldp_epsilon(fix_f::<Rational>().channel()), MeasureValue::Infinite);
        assert_eq!(ldp_epsilon(independent().channel()), exact(q(1, 1)));
    }

    #[test]
    fn approximate_ldp_examples() {
        let f = fix_f::<Rational>();
        assert!(approx_ldp_holds(f.channel(), &q(1, 1), &q(1, 4)));
        assert!(!approx_ldp_holds(f.channel(), &q(1, 1), &q(1, 5)));
        let g = fix_g::<Rational>();
        assert!(!approx_ldp_holds(g.channel(), &q(1_000_000, 1), &q(99, 100)));
        assert!(approx_ldp_holds(g.channel(), &q(1, 1), &q(1, 1)));
    }

    #[test]
    fn lip_ldi_examples() {
        let d = fix_d::<Rational>();
        assert_eq!(lip_epsilon(&d), exact(q(5, 4)));
        assert_eq!(ldi_epsilon(&d), exact(q(3, 2)));
        assert_eq!(lip_epsilon(&independent()), exact(q(1, 1)));
        assert_eq!(ldi_epsilon(&independent()), exact(q(1, 1)));
        let c = fix_c::<Rational>();
        assert!(lip_epsilon(&c).is_infinite());
        assert!(ldi_epsilon(&c).is_infinite());
    }

    #[test]
    fn implied_bounds() {
        let binary = Prior::<Rational>::uniform(2);
        assert_eq!(implied_pml_bound(LocalNotion::Ldp, &exact(q(3, 2)), &binary).unwrap(), q(6, 5));
        assert_eq!(implied_pml_bound(LocalNotion::Ldp, &exact(q(1, 1)), &binary).unwrap(), q(1, 1));
        assert_eq!(
            implied_pml_bound(LocalNotion::Ldi, &exact(q(1, 1)), &Prior::uniform(5)).unwrap(),
            q(1, 1)
        );
        assert_eq!(implied_pml_bound(LocalNotion::Lip, &exact(q(7, 5)), &binary).unwrap(), q(7, 5));
        assert_eq!(
            implied_pml_bound(LocalNotion::Ldp, &MeasureValue::Infinite, &binary).unwrap_err(),
            Error::InfiniteInput
        );
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(mutual_information(&independent()), 0.0);
        let bij = Joint::new(Prior::<Rational>::uniform(3), Channel::identity(3)).unwrap();
        let expected = leakage_distribution(&bij).expected_leakage();
        assert!((mutual_information(&bij) - 3f64.ln()).abs() < 1e-12);
        assert!((expected - 3f64.ln()).abs() < 1e-12);
        let d = fix_d::<Rational>();
        assert!(mutual_information(&d) < (1.2f64).ln());
        assert!((f_information(&d, FDivergence::Kl) - mutual_information(&d)).abs() < 1e-12);
    }

    #[test]
    fn f_information_examples() {
        for f in [FDivergence::Kl, FDivergence::Tv, FDivergence::Chi2] {
            assert_eq!(f_information(&independent(), f), 0.0);
            let d = fix_d::<Rational>();
            assert!(f_information(&d, f) <= f_info_pml_bound(&d, f) + 1e-12);
        }
        let d = fix_d::<Rational>();
        let t = total_variation_privacy(&d);
        assert_eq!(t, q(1, 10));
        assert!((f_information(&d, FDivergence::Tv) - 0.1).abs() < 1e-12);
        assert_eq!("hellinger".parse::<FDivergence>().unwrap_err(), Error::UnknownF("hellinger".into()));
    }

    #[test]
    fn tv_bound_examples() {
        let d = fix_d::<Rational>();
        let b = tv_bounds(&d, &PrivacyParams::new(q(6, 5), q(0, 1)).unwrap()).unwrap();
        assert_eq!(b.maximal_leakage, q(1, 5));
        assert_eq!(b.regime, TvRegime::Small);
        assert_eq!(b.guarantee, q(1, 5));
        assert!(b.guarantee_holds);
        assert!(total_variation_privacy(&d) <= b.tightest());
        let b = tv_bounds(&independent(), &PrivacyParams::new(q(1, 1), q(0, 1)).unwrap()).unwrap();
        assert_eq!(total_variation_privacy(&independent()), q(0, 1));
        assert!(b.maximal_leakage >= q(0, 1) && b.pml_average >= q(0, 1) && b.guarantee >= q(0, 1));
    }

    #[test]
    fn tv_regime_boundaries_agree() {
        let d = fix_d::<Rational>();
        let at = |e| tv_bounds(&d, &PrivacyParams::new(e, q(0, 1)).unwrap()).unwrap();
        assert_eq!(at(q(3, 2)).guarantee, q(1, 2));
        assert_eq!(at(q(2, 1)).guarantee, q(1, 2));
        assert_eq!(at(q(3, 1)).regime, TvRegime::Large);
    }

    #[test]
    fn max_information_examples() {
        let c = fix_c::<Rational>();
        assert_eq!(max_information(&c), q(4, 1));
        assert_eq!(approx_max_information(&c, &q(0, 1)).unwrap(), q(4, 1));
        let v = approx_max_information(&c, &q(1, 6)).unwrap();
        assert!(v <= q(6, 5));
        assert!(max_info_tail_bound(&c, &q(1, 6)) <= q(6, 5));
        let ind = independent();
        assert!(approx_max_information(&ind, &q(1, 10)).unwrap() <= q(1, 1));
    }

    #[test]
    fn large_supports_fall_back() {
        let big = Joint::new(Prior::<Rational>::uniform(21), Channel::identity(21)).unwrap();
        match approx_max_information(&big, &q(1, 10)).unwrap_err() {
            Error::TooLargeForBruteForce { support, fallback, .. } => {
                assert_eq!(support, 21);
                assert_eq!(fallback, "21");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
