//! ε-PML, (ε,δ)-PML and (ε,δ)-EML checks.
//!
//! κ(δ), the least ε for which (ε,δ)-EML holds, is the optimum of a linear
//! fractional program over the reduced channel. The optimum sits at an extreme
//! point: for each x, take outputs in decreasing information density until
//! their mass reaches δ, using a fraction ζ of the last one.

use crate::channel_ops::{reduce, ReducedChannelMap};
use crate::error::{Error, Result};
use crate::leakage::{leakage_distribution, pml, pml_maximizers};
use crate::model::{Event, Joint};
use crate::scalar::{ge, gt, le, max_of, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuaranteeKind {
    Pml,
    DeltaPml,
    Eml,
}

impl GuaranteeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GuaranteeKind::Pml => "PML",
            GuaranteeKind::DeltaPml => "DELTA_PML",
            GuaranteeKind::Eml => "EML",
        }
    }
}

/// Least-private event of probability δ in the reduced channel.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstEvent<S> {
    /// Input whose h_x attains κ(δ) (lowest index among ties).
    pub x: usize,
    /// Other inputs attaining the same value.
    pub alternatives: Vec<usize>,
    /// Event over outputs of `reduced`, with the boundary output split by ζ.
    pub event: Event<S>,
    pub reduced: ReducedChannelMap<S>,
}

impl<S: Scalar> WorstEvent<S> {
    /// Leakage of the event in the reduced channel.
    pub fn leakage(&self) -> S {
        crate::leakage::event_leakage(&self.reduced.joint, &self.event)
            .expect("witness events have positive mass")
    }

    /// Human-readable description using reduced output labels.
    pub fn describe(&self) -> String {
        let labels = self.reduced.reduced().labels_y();
        let mut parts: Vec<String> = self
            .event
            .members()
            .iter()
            .map(|&y| labels[y].clone())
            .collect();
        if let Some((y, zeta)) = self.event.split() {
            parts.push(format!("{} split at {}", labels[*y], zeta.to_repr()));
        }
        format!(
            "{{{}}} for {}",
            parts.join(", "),
            self.reduced.joint.label_x(self.x)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness<S> {
    /// Highest-leakage output.
    Outcome(usize),
    /// Outputs whose leakage exceeds the tested ε.
    Outcomes(Vec<usize>),
    Event(Box<WorstEvent<S>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeReport<S> {
    pub kind: GuaranteeKind,
    pub epsilon_ratio: S,
    pub delta: S,
    pub holds: bool,
    /// Smallest ε ratio for which the guarantee holds at this δ.
    pub level: S,
    pub witness: Witness<S>,
    pub diagnostic: Option<String>,
}

fn check_epsilon<S: Scalar>(eps_ratio: &S) -> Result<()> {
    if le(&S::one(), eps_ratio) {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps_ratio.to_repr()))
    }
}

fn check_delta<S: Scalar>(delta: &S) -> Result<()> {
    if *delta < S::zero() || gt(delta, &S::one()) {
        Err(Error::InvalidDelta(delta.to_repr()))
    } else {
        Ok(())
    }
}

fn check_positive_delta<S: Scalar>(delta: &S) -> Result<()> {
    check_delta(delta)?;
    if !gt(delta, &S::zero()) {
        return Err(Error::InvalidDelta(format!(
            "{} (δ = 0 is the ε-PML case)",
            delta.to_repr()
        )));
    }
    Ok(())
}

/// Supported outputs of highest leakage, lowest index first.
fn worst_outcome<S: Scalar>(joint: &Joint<S>) -> (usize, S) {
    let d = leakage_distribution(joint);
    (d.entries[0].y, d.entries[0].ratio.clone())
}

pub fn check_eps_pml<S: Scalar>(joint: &Joint<S>, eps_ratio: &S) -> Result<GuaranteeReport<S>> {
    check_epsilon(eps_ratio)?;
    let (y, level) = worst_outcome(joint);
    Ok(GuaranteeReport {
        kind: GuaranteeKind::Pml,
        epsilon_ratio: eps_ratio.clone(),
        delta: S::zero(),
        holds: le(&level, eps_ratio),
        level,
        witness: Witness::Outcome(y),
        diagnostic: None,
    })
}

/// Smallest ratio r with P_Y{y : pml(y) > r} ≤ δ, and the outputs above r.
pub fn min_eps_for_delta_pml<S: Scalar>(joint: &Joint<S>, delta: &S) -> Result<(S, Vec<usize>)> {
    check_delta(delta)?;
    let d = leakage_distribution(joint);
    let mut levels: Vec<S> = vec![S::one()];
    for e in d.entries.iter().rev() {
        if gt(&e.ratio, levels.last().expect("seeded")) {
            levels.push(e.ratio.clone());
        }
    }
    let r = levels
        .into_iter()
        .find(|r| le(&d.mass_above(r), delta))
        .expect("the largest ratio always qualifies");
    let excluded = d
        .entries
        .iter()
        .filter(|e| gt(&e.ratio, &r))
        .map(|e| e.y)
        .collect();
    Ok((r, excluded))
}

pub fn check_eps_delta_pml<S: Scalar>(
    joint: &Joint<S>,
    eps_ratio: &S,
    delta: &S,
) -> Result<GuaranteeReport<S>> {
    check_epsilon(eps_ratio)?;
    let (level, _) = min_eps_for_delta_pml(joint, delta)?;
    let d = leakage_distribution(joint);
    let above: Vec<usize> = d
        .entries
        .iter()
        .filter(|e| gt(&e.ratio, eps_ratio))
        .map(|e| e.y)
        .collect();
    let mass = d.mass_above(eps_ratio);
    let holds = le(&mass, delta);
    Ok(GuaranteeReport {
        kind: GuaranteeKind::DeltaPml,
        epsilon_ratio: eps_ratio.clone(),
        delta: delta.clone(),
        holds,
        level,
        witness: Witness::Outcomes(above),
        diagnostic: Some(format!(
            "mass of outputs above epsilon is {}",
            mass.to_repr()
        )),
    })
}

/// Extreme-point solution for one input of the reduced channel.
#[derive(Debug, Clone, PartialEq)]
struct Extreme<S> {
    value: S,
    prefix: Vec<usize>,
    boundary: usize,
    zeta: S,
}

fn solve_x<S: Scalar>(reduced: &Joint<S>, x: usize, delta: &S) -> Extreme<S> {
    let n = reduced.n_y();
    let density: Vec<S> = (0..n)
        .map(|y| reduced.cond(x, y).clone() / reduced.p_y(y).clone())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        if density[a].approx_eq(&density[b]) {
            a.cmp(&b)
        } else {
            density[b].partial_cmp(&density[a]).expect("comparable densities")
        }
    });
    let mut covered = S::zero();
    let mut gained = S::zero();
    for (i, &y) in order.iter().enumerate() {
        let p = reduced.p_y(y).clone();
        let last = i + 1 == order.len();
        if last || ge(&(covered.clone() + p.clone()), delta) {
            let mut zeta = (delta.clone() - covered) / p;
            if zeta > S::one() {
                zeta = S::one();
            }
            let value = (gained + zeta.clone() * reduced.cond(x, y).clone()) / delta.clone();
            return Extreme {
                value,
                prefix: order[..i].to_vec(),
                boundary: y,
                zeta,
            };
        }
        covered = covered + p;
        gained = gained + reduced.cond(x, y).clone();
    }
    unreachable!("reduced channels have at least one output")
}

/// h_x(δ) for input `x`, computed on the reduced channel of `joint`.
pub fn eml_h_x<S: Scalar>(joint: &Joint<S>, x: usize, delta: &S) -> Result<S> {
    check_positive_delta(delta)?;
    if x >= joint.n_x() {
        return Err(Error::OutOfSupport(format!("input #{x}")));
    }
    let reduced = reduce(joint);
    Ok(solve_x(&reduced.joint, x, delta).value)
}

/// κ(δ) with every h_x and the worst event.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaSolution<S> {
    pub kappa: S,
    /// h_x(δ) per input.
    pub h: Vec<S>,
    pub worst: WorstEvent<S>,
}

pub fn eml_kappa<S: Scalar>(joint: &Joint<S>, delta: &S) -> Result<KappaSolution<S>> {
    check_positive_delta(delta)?;
    let reduced = reduce(joint);
    let solutions: Vec<Extreme<S>> = (0..joint.n_x())
        .map(|x| solve_x(&reduced.joint, x, delta))
        .collect();
    let h: Vec<S> = solutions.iter().map(|s| s.value.clone()).collect();
    let kappa = max_of(&h).expect("nonempty support");
    let maximizers: Vec<usize> = (0..h.len()).filter(|&x| h[x].approx_eq(&kappa)).collect();
    let x = maximizers[0];
    let best = &solutions[x];
    let event = if best.zeta.approx_eq(&S::one()) {
        Event::outcomes(best.prefix.iter().copied().chain([best.boundary]))
    } else {
        Event::new(best.prefix.iter().copied(), Some((best.boundary, best.zeta.clone())))
    }
    .expect("extreme points are valid events");
    Ok(KappaSolution {
        kappa,
        h,
        worst: WorstEvent {
            x,
            alternatives: maximizers[1..].to_vec(),
            event,
            reduced,
        },
    })
}

/// One piece of h_x as a function of δ: a + b/δ on (lo, hi].
#[derive(Debug, Clone, PartialEq)]
pub struct KappaPiece<S> {
    pub lo: S,
    pub hi: S,
    pub a: S,
    pub b: S,
}

/// κ as a function of δ over (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct KappaCurve<S> {
    /// (δ, κ(δ)) at every cumulative-mass point of any input's ordering.
    pub breakpoints: Vec<(S, S)>,
    /// Pieces of h_x per input.
    pub pieces: Vec<Vec<KappaPiece<S>>>,
}

impl<S: Scalar> KappaCurve<S> {
    pub fn eval(&self, delta: &S) -> S {
        self.pieces
            .iter()
            .map(|pieces| {
                let p = pieces
                    .iter()
                    .find(|p| le(delta, &p.hi))
                    .unwrap_or_else(|| pieces.last().expect("nonempty"));
                p.a.clone() + p.b.clone() / delta.clone()
            })
            .reduce(|m, v| if v > m { v } else { m })
            .expect("nonempty support")
    }
}

pub fn kappa_curve<S: Scalar>(joint: &Joint<S>) -> KappaCurve<S> {
    let reduced = reduce(joint).joint;
    let n = reduced.n_y();
    let mut cuts: Vec<S> = Vec::new();
    let pieces: Vec<Vec<KappaPiece<S>>> = (0..reduced.n_x())
        .map(|x| {
            let density: Vec<S> = (0..n)
                .map(|y| reduced.cond(x, y).clone() / reduced.p_y(y).clone())
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                if density[a].approx_eq(&density[b]) {
                    a.cmp(&b)
                } else {
                    density[b].partial_cmp(&density[a]).expect("comparable densities")
                }
            });
            let mut covered = S::zero();
            let mut gained = S::zero();
            let mut out = Vec::with_capacity(n);
            for &y in &order {
                let hi = covered.clone() + reduced.p_y(y).clone();
                let rho = density[y].clone();
                out.push(KappaPiece {
                    lo: covered.clone(),
                    hi: hi.clone(),
                    b: gained.clone() - covered.clone() * rho.clone(),
                    a: rho,
                });
                cuts.push(hi.clone());
                gained = gained + reduced.cond(x, y).clone();
                covered = hi;
            }
            out
        })
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("comparable masses"));
    cuts.dedup_by(|a, b| a.approx_eq(b));
    let mut curve = KappaCurve {
        breakpoints: Vec::new(),
        pieces,
    };
    curve.breakpoints = cuts
        .into_iter()
        .map(|d| {
            let k = curve.eval(&d);
            (d, k)
        })
        .collect();
    curve
}

pub fn check_eps_delta_eml<S: Scalar>(
    joint: &Joint<S>,
    eps_ratio: &S,
    delta: &S,
) -> Result<GuaranteeReport<S>> {
    check_epsilon(eps_ratio)?;
    check_delta(delta)?;
    if !gt(delta, &S::zero()) {
        let mut report = check_eps_pml(joint, eps_ratio)?;
        report.kind = GuaranteeKind::Eml;
        report.diagnostic = Some("δ = 0: checked as ε-PML".into());
        return Ok(report);
    }
    let sol = eml_kappa(joint, delta)?;
    let diagnostic = (!sol.worst.alternatives.is_empty()).then(|| {
        let names: Vec<&str> = sol
            .worst
            .alternatives
            .iter()
            .map(|&x| joint.label_x(x))
            .collect();
        format!("κ is also attained for {}", names.join(", "))
    });
    Ok(GuaranteeReport {
        kind: GuaranteeKind::Eml,
        epsilon_ratio: eps_ratio.clone(),
        delta: delta.clone(),
        holds: le(&sol.kappa, eps_ratio),
        level: sol.kappa,
        witness: Witness::Event(Box::new(sol.worst)),
        diagnostic,
    })
}

/// Outcome of testing whether an (ε,δ)-EML guarantee also gives (ε,δ)-PML.
#[derive(Debug, Clone, PartialEq)]
pub struct EmlToPml<S> {
    pub eml_holds: bool,
    /// Outputs with pml above ε.
    pub high_leakage: Vec<usize>,
    pub high_leakage_mass: S,
    /// Lowest-index input maximizing the density of every high-leakage output.
    pub common_maximizer: Option<usize>,
    /// Whether a common maximizer exists (vacuously true when nothing leaks above ε).
    pub condition_met: bool,
    /// EML holds and the condition is met, so (ε,δ)-PML follows.
    pub pml_follows: bool,
    /// Direct evaluation of (ε,δ)-PML.
    pub pml_holds: bool,
    pub diagnostic: String,
}

pub fn eml_implies_pml_check<S: Scalar>(
    joint: &Joint<S>,
    eps_ratio: &S,
    delta: &S,
) -> Result<EmlToPml<S>> {
    let eml = check_eps_delta_eml(joint, eps_ratio, delta)?;
    let pml_report = check_eps_delta_pml(joint, eps_ratio, delta)?;
    let d = leakage_distribution(joint);
    let high: Vec<usize> = d
        .entries
        .iter()
        .filter(|e| gt(&e.ratio, eps_ratio))
        .map(|e| e.y)
        .collect();
    let mass = d.mass_above(eps_ratio);
    let mut common: Option<Vec<usize>> = None;
    for &y in &high {
        let m = pml_maximizers(joint, y)?;
        common = Some(match common {
            None => m,
            Some(c) => c.into_iter().filter(|x| m.contains(x)).collect(),
        });
    }
    let common_maximizer = common.as_ref().and_then(|c| c.first().copied());
    let condition_met = high.is_empty() || common_maximizer.is_some();
    let diagnostic = if high.is_empty() {
        "no output leaks more than epsilon".to_string()
    } else if let Some(x) = common_maximizer {
        format!(
            "{} maximizes the density of every high-leakage output; their mass is {}",
            joint.label_x(x),
            mass.to_repr()
        )
    } else {
        "condition not met: no single input maximizes every high-leakage output".to_string()
    };
    Ok(EmlToPml {
        eml_holds: eml.holds,
        high_leakage: high,
        high_leakage_mass: mass,
        common_maximizer,
        condition_met,
        pml_follows: eml.holds && condition_met,
        pml_holds: pml_report.holds,
        diagnostic,
    })
}

/// Leakage of the witness in a report, for checking failed guarantees.
pub fn witness_leakage<S: Scalar>(joint: &Joint<S>, report: &GuaranteeReport<S>) -> Option<S> {
    match &report.witness {
        Witness::Outcome(y) => pml(joint, *y).ok(),
        Witness::Outcomes(ys) => ys
            .iter()
            .filter_map(|&y| pml(joint, y).ok())
            .reduce(|a, b| if b < a { b } else { a }),
        Witness::Event(w) => Some(w.leakage()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_ops::postprocess;
    use crate::fixtures::*;
    use crate::model::{Channel, Prior};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn eps_pml_checks() {
        let c = fix_c::<Rational>();
        assert!(check_eps_pml(&c, &q(4, 1)).unwrap().holds);
        let r = check_eps_pml(&c, &q(6, 5)).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness, Witness::Outcome(0));
        let row = vec![q(1, 2), q(1, 2)];
        let indep = Joint::new(Prior::uniform(2), Channel::from_rows(vec![row.clone(), row]).unwrap()).unwrap();
        assert!(check_eps_pml(&indep, &q(1, 1)).unwrap().holds);
        assert!(matches!(check_eps_pml(&c, &q(1, 2)), Err(Error::InvalidEpsilon(_))));
    }

    #[test]
    fn minimal_epsilon_examples() {
        assert_eq!(
            min_eps_for_delta_pml(&fix_c::<Rational>(), &q(1, 6)).unwrap(),
            (q(6, 5), vec![0, 1])
        );
        let f = fix_f::<Rational>();
        for d in [q(0, 1), q(1, 4), q(1, 2), q(99, 100)] {
            assert_eq!(min_eps_for_delta_pml(&f, &d).unwrap().0, q(2, 1));
        }
        assert_eq!(min_eps_for_delta_pml(&f, &q(1, 1)).unwrap().0, q(1, 1));
        assert_eq!(
            min_eps_for_delta_pml(&fix_g::<Rational>(), &q(1, 10)).unwrap(),
            (q(10, 9), vec![0])
        );
    }

    #[test]
    fn fix_c_h_values() {
        let c = fix_c::<Rational>();
        let h: Vec<_> = (0..4).map(|x| eml_h_x(&c, x, &q(1, 6)).unwrap()).collect();
        assert_eq!(h, vec![q(6, 5), q(6, 5), q(12, 5), q(12, 5)]);
        let sol = eml_kappa(&c, &q(1, 6)).unwrap();
        assert_eq!(sol.kappa, q(12, 5));
        assert_eq!(sol.worst.x, 2);
        assert_eq!(sol.worst.alternatives, vec![3]);
        assert_eq!(sol.worst.event, Event::new([1], Some((2, q(1, 10)))).unwrap());
        assert_eq!(sol.worst.leakage(), q(12, 5));
        assert_eq!(sol.worst.describe(), "{y2, y3+y4 split at 1/10} for x3");
    }

    #[test]
    fn bsc_and_postprocessed_kappa() {
        assert_eq!(eml_kappa(&fix_d::<Rational>(), &q(3, 5)).unwrap().kappa, q(34, 30));
        let z = postprocess(&fix_c::<Rational>(), &fix_c_postprocess()).unwrap();
        assert_eq!(eml_kappa(&z, &q(1, 6)).unwrap().kappa, q(4, 3));
    }

    #[test]
    fn delta_one_gives_one() {
        for (_, j) in all::<Rational>() {
            assert_eq!(eml_kappa(&j, &q(1, 1)).unwrap().kappa, q(1, 1));
        }
    }

    #[test]
    fn h_x_rejects_bad_deltas() {
        let c = fix_c::<Rational>();
        assert!(matches!(eml_h_x(&c, 0, &q(0, 1)), Err(Error::InvalidDelta(_))));
        assert!(matches!(eml_h_x(&c, 0, &q(3, 2)), Err(Error::InvalidDelta(_))));
    }

    #[test]
    fn eml_checks() {
        let c = fix_c::<Rational>();
        assert!(check_eps_delta_eml(&c, &q(12, 5), &q(1, 6)).unwrap().holds);
        let r = check_eps_delta_eml(&c, &q(6, 5), &q(1, 6)).unwrap();
        assert!(!r.holds);
        assert_eq!(witness_leakage(&c, &r), Some(q(12, 5)));
        assert!(check_eps_delta_eml(&fix_d::<Rational>(), &q(6, 5), &q(3, 5)).unwrap().holds);
        let r = check_eps_delta_eml(&c, &q(4, 1), &q(0, 1)).unwrap();
        assert_eq!(r.kind, GuaranteeKind::Eml);
        assert!(r.holds);
    }

    #[test]
    fn bsc_eml_does_not_give_pml() {
        let out = eml_implies_pml_check(&fix_d::<Rational>(), &q(34, 30), &q(3, 5)).unwrap();
        assert!(out.eml_holds);
        assert!(!out.condition_met);
        assert!(!out.pml_follows);
        assert!(!out.pml_holds);
    }

    #[test]
    fn common_maximizer_gives_pml() {
        // x1 maximizes the density of both rare outputs y1 and y2.
        let prior = Prior::from_probs(vec![q(1, 3), q(1, 3), q(1, 3)]).unwrap();
        let channel = Channel::from_rows(vec![
            vec![q(1, 5), q(1, 5), q(3, 5)],
            vec![q(1, 20), q(0, 1), q(19, 20)],
            vec![q(0, 1), q(1, 20), q(19, 20)],
        ])
        .unwrap();
        let j = Joint::new(prior, channel).unwrap();
        let d = leakage_distribution(&j);
        let top = d.entries[0].ratio.clone();
        assert!(pml_maximizers(&j, 0).unwrap() == vec![0] && pml_maximizers(&j, 1).unwrap() == vec![0]);
        let eps = pml(&j, 2).unwrap();
        assert!(top > eps);
        let kappa = eml_kappa(&j, &q(1, 2)).unwrap().kappa;
        let out = eml_implies_pml_check(&j, &kappa.clone().max(eps), &q(1, 2)).unwrap();
        assert!(out.eml_holds && out.condition_met && out.pml_follows);
        assert_eq!(out.common_maximizer, Some(0));
        assert!(out.pml_holds);
    }

    #[test]
    fn empty_high_leakage_set_is_trivial() {
        let c = fix_c::<Rational>();
        let out = eml_implies_pml_check(&c, &q(4, 1), &q(1, 6)).unwrap();
        assert!(out.high_leakage.is_empty() && out.condition_met && out.pml_holds);
    }

    #[test]
    fn kappa_curve_matches_pointwise() {
        let c = fix_c::<Rational>();
        let curve = kappa_curve(&c);
        for d in [q(1, 10), q(1, 6), q(1, 3), q(1, 2), q(3, 5), q(9, 10), q(1, 1)] {
            assert_eq!(curve.eval(&d), eml_kappa(&c, &d).unwrap().kappa);
        }
        assert_eq!(curve.breakpoints.last().unwrap(), &(q(1, 1), q(1, 1)));
        let ks: Vec<_> = curve.breakpoints.iter().map(|(_, k)| k.clone()).collect();
        assert!(ks.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn float_mode_agrees() {
        let f = eml_kappa(&fix_c::<f64>(), &(1.0 / 6.0)).unwrap().kappa;
        assert!((f - 2.4).abs() < 1e-12);
        let f = eml_kappa(&fix_d::<f64>(), &0.6).unwrap().kappa;
        assert!((f - 34.0 / 30.0).abs() < 1e-12);
    }
}
