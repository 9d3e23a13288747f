//! Checks shared by the property tests and the acceptance runner. Every check
//! recomputes its reference quantity from the joint directly.

#![allow(dead_code)]

use pml_core::adversary::{
    function_from_gain, g_leakage, gain_from_function, u_leakage, GainFunction, RandomizedFunction,
};
use pml_core::channel_ops::{
    compose_eml_bounds, compose_pml_bounds, postprocess, reduce, shattering_channel,
    split_outcome, AdaptiveComposition, EmlComposition, PmlComposition, PrivacyParams,
};
use pml_core::comparisons::{
    implied_pml_bound, ldi_epsilon, ldp_epsilon, lip_epsilon, max_information, mutual_information,
    total_variation_privacy, tv_bounds, LocalNotion, MeasureValue,
};
use pml_core::guarantees::{
    check_eps_delta_eml, check_eps_delta_pml, check_eps_pml, eml_kappa, min_eps_for_delta_pml,
};
use pml_core::leakage::{conditional_pml, leakage_distribution, maximal_leakage, pml};
use pml_core::oracles::{
    brute_force_approx_maxinfo, brute_force_eml, grid_screen_eml, random_channel, random_prior,
    OracleBudget,
};
use pml_core::scalar::Scalar;
use pml_core::{Channel, Joint, Prior, Rational};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub type Q = Rational;
pub type Check = Result<(), String>;

pub fn q(n: i64, d: i64) -> Q {
    Q::frac(n, d)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

pub fn below(rng: &mut SplitMix64, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Random joint with 2..=max_x inputs and 2..=max_y outputs.
pub fn random_joint(rng: &mut SplitMix64, max_x: usize, max_y: usize) -> Joint<Q> {
    let nx = 2 + below(rng, max_x - 1);
    let ny = 2 + below(rng, max_y - 1);
    let prior = random_prior(rng, nx);
    let channel = random_channel(rng, nx, ny);
    Joint::new(prior, channel).expect("generated joint")
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn max_entry(values: impl IntoIterator<Item = Q>) -> Q {
    values.into_iter().fold(Q::frac(0, 1), |a, b| if b > a { b } else { a })
}

/// Direct column maximum divided by the output mass.
fn direct_pml(j: &Joint<Q>, y: usize) -> Q {
    max_entry((0..j.n_x()).map(|x| j.cond(x, y).clone())) / j.p_y(y).clone()
}

pub fn bounds(j: &Joint<Q>) -> Check {
    let eps_max = max_entry(j.prior().probs().iter().map(|p| p.recip()));
    for &y in j.support_y() {
        let r = pml(j, y).map_err(err)?;
        ensure!(r == direct_pml(j, y), "pml mismatch at {}", j.label_y(y));
        ensure!(r >= q(1, 1) && r <= eps_max, "pml {r} out of [1, {eps_max}]");
        let constant = (1..j.n_x()).all(|x| j.cond(x, y) == j.cond(0, y));
        ensure!((r == q(1, 1)) == constant, "ratio 1 iff constant column at {}", j.label_y(y));
    }
    Ok(())
}

pub fn average_identity(j: &Joint<Q>) -> Check {
    let avg = leakage_distribution(j).expected_ratio();
    let column_max_sum = (0..j.n_y())
        .map(|y| max_entry((0..j.n_x()).map(|x| j.cond(x, y).clone())))
        .fold(q(0, 1), |a, b| a + b);
    ensure!(avg == maximal_leakage(j.channel()), "E[pml] != maximal leakage");
    ensure!(avg == column_max_sum, "E[pml] != column-max sum");
    Ok(())
}

pub fn post_processing(j: &Joint<Q>, k: &Channel<Q>) -> Check {
    let z = postprocess(j, k).map_err(err)?;
    let before = leakage_distribution(j).max_ratio();
    let after = leakage_distribution(&z).max_ratio();
    ensure!(after <= before, "post-processing raised max pml {before} -> {after}");
    Ok(())
}

/// X − Y − Z: Y's marginal is the prior of the second link.
pub fn pre_processing(j: &Joint<Q>, k: &Channel<Q>) -> Check {
    let xz = postprocess(j, k).map_err(err)?;
    let prior_y = Prior::new(j.channel().labels_y().to_vec(), j.output_marginal().to_vec())
        .map_err(err)?;
    let k = k.clone().with_input_labels(j.channel().labels_y().to_vec()).map_err(err)?;
    let yz = Joint::new(prior_y, k).map_err(err)?;
    for &z in xz.support_y() {
        let lhs = pml(&xz, z).map_err(err)?;
        let rhs = pml(&yz, z).map_err(err)?;
        ensure!(lhs <= rhs, "pml_XZ {lhs} > pml_YZ {rhs} at {}", xz.label_y(z));
    }
    Ok(())
}

/// Z − X − Y with P_{Z|X} strictly positive.
pub fn side_information(j: &Joint<Q>, side: &Channel<Q>) -> Check {
    let nz = side.n_outputs();
    let stacked_rows: Vec<Vec<Q>> = (0..j.n_x())
        .flat_map(|x| std::iter::repeat_n(j.channel().row(x).to_vec(), nz))
        .collect();
    let stacked = Channel::from_rows(stacked_rows).map_err(err)?;
    for z in 0..nz {
        let p_z: Q = (0..j.n_x()).fold(q(0, 1), |a, x| a + j.p_x(x).clone() * side.get(x, z).clone());
        for &y in j.support_y() {
            let p_yz = (0..j.n_x()).fold(q(0, 1), |a, x| {
                a + j.p_x(x).clone() * side.get(x, z).clone() * j.cond(x, y).clone()
            });
            if p_yz == q(0, 1) {
                continue;
            }
            let density = p_yz / (p_z.clone() * j.p_y(y).clone());
            let cond = conditional_pml(j.prior(), side, &stacked, y, z).map_err(err)?;
            ensure!(
                cond.clone() * density == pml(j, y).map_err(err)?,
                "side information identity fails at ({}, z{})",
                j.label_y(y),
                z + 1
            );
        }
    }
    Ok(())
}

pub fn composition_chain(comp: &AdaptiveComposition<Q>) -> Check {
    let first = &comp.first;
    for &y in first.support_y() {
        let stage = comp.stage(y);
        let argmax_y: Vec<usize> = {
            let top = max_entry((0..first.n_x()).map(|x| first.cond(x, y).clone()));
            (0..first.n_x()).filter(|&x| *first.cond(x, y) == top).collect()
        };
        for z in 0..comp.n_second() {
            let yz = comp.pair(y, z);
            if !comp.joint.is_supported(yz) {
                continue;
            }
            let joint_ratio = pml(&comp.joint, yz).map_err(err)?;
            let product = pml(first, y).map_err(err)? * comp.conditional_pml(z, y).map_err(err)?;
            ensure!(joint_ratio <= product, "chain inequality fails at ({y}, {z})");
            // Inputs that can have produced y, then those maximizing P(z | x, y).
            let live: Vec<usize> = (0..first.n_x()).filter(|&x| *first.cond(x, y) > q(0, 1)).collect();
            let row_of = |x: usize| {
                let label = first.label_x(x);
                stage.labels_x().iter().position(|l| l == label).expect("stage row")
            };
            let top = max_entry(live.iter().map(|&x| stage.get(row_of(x), z).clone()));
            let intersect = argmax_y
                .iter()
                .any(|&x| *stage.get(row_of(x), z) == top);
            ensure!(
                (joint_ratio == product) == intersect,
                "equality at ({y}, {z}) should be {intersect}"
            );
        }
    }
    Ok(())
}

pub fn oracle_agreement(j: &Joint<Q>, delta: &Q, budget: &OracleBudget) -> Check {
    let kappa = eml_kappa(j, delta).map_err(err)?.kappa;
    let oracle = brute_force_eml(j, delta, budget).map_err(err)?;
    ensure!(kappa == oracle, "kappa {kappa} != oracle {oracle} at delta {delta}");
    let grid = grid_screen_eml(j, delta, budget).map_err(err)?;
    ensure!(grid <= kappa, "grid {grid} above kappa {kappa}");
    Ok(())
}

/// Splits random supported outputs into two similar copies, repeatedly.
pub fn random_split_variant(j: &Joint<Q>, rng: &mut SplitMix64, splits: usize) -> Joint<Q> {
    let mut out = j.clone();
    for _ in 0..splits {
        let support = out.support_y().to_vec();
        let y = support[below(rng, support.len())];
        let zeta = q(1 + below(rng, 7) as i64, 8);
        out = split_outcome(&out, y, &zeta).expect("split");
    }
    out
}

pub fn class_invariance(j: &Joint<Q>, variant: &Joint<Q>, delta: &Q) -> Check {
    let a = eml_kappa(j, delta).map_err(err)?.kappa;
    let b = eml_kappa(variant, delta).map_err(err)?.kappa;
    let r = eml_kappa(&reduce(j).joint, delta).map_err(err)?.kappa;
    ensure!(a == b && a == r, "kappa differs across the class: {a}, {b}, {r}");
    Ok(())
}

pub fn reduction_preserves_leakage(j: &Joint<Q>) -> Check {
    let map = reduce(j);
    let r = &map.joint;
    ensure!(
        maximal_leakage(r.channel()) == maximal_leakage(j.channel()),
        "maximal leakage changed"
    );
    for (class, members) in map.merge_map.iter().enumerate() {
        let mass = members.iter().fold(q(0, 1), |a, &y| a + j.p_y(y).clone());
        ensure!(*r.p_y(class) == mass, "class mass differs");
        for &y in members {
            ensure!(pml(r, class).map_err(err)? == pml(j, y).map_err(err)?, "class ratio differs");
        }
    }
    Ok(())
}

pub fn random_function(rng: &mut SplitMix64, j: &Joint<Q>, letters: usize) -> RandomizedFunction<Q> {
    let k = random_channel(rng, j.n_x(), letters)
        .with_input_labels(j.prior().labels().to_vec())
        .expect("labels");
    RandomizedFunction::new(k)
}

pub fn random_gain(rng: &mut SplitMix64, j: &Joint<Q>, guesses: usize) -> GainFunction<Q> {
    loop {
        let matrix: Vec<Vec<Q>> = (0..j.n_x())
            .map(|_| (0..guesses).map(|_| q(below(rng, 5) as i64, 4)).collect())
            .collect();
        let labels = (1..=guesses).map(|i| format!("g{i}")).collect();
        if let Ok(g) = GainFunction::new(j.prior().labels().to_vec(), labels, matrix) {
            return g;
        }
    }
}

pub fn adversary(j: &Joint<Q>, u: &RandomizedFunction<Q>, g: &GainFunction<Q>) -> Check {
    let shattered = RandomizedFunction::new(shattering_channel(j.prior()).map_err(err)?);
    let via_u = gain_from_function(u);
    for &y in j.support_y() {
        let p = pml(j, y).map_err(err)?;
        let lu = u_leakage(j, u, y).map_err(err)?;
        ensure!(lu <= p, "u_leakage {lu} > pml {p}");
        ensure!(g_leakage(j, &via_u, y).map_err(err)? == lu, "gain_from_function changed leakage");
        ensure!(u_leakage(j, &shattered, y).map_err(err)? == p, "shattering misses pml");
        match g_leakage(j, g, y) {
            Ok(lg) => {
                ensure!(lg <= p, "g_leakage {lg} > pml {p}");
                match function_from_gain(j, g, y) {
                    Ok(ug) => ensure!(
                        u_leakage(j, &ug, y).map_err(err)? == lg,
                        "function_from_gain changed leakage at {}",
                        j.label_y(y)
                    ),
                    // A zero posterior gain makes the g-leakage 0, which no
                    // randomized function can match.
                    Err(pml_core::Error::ZeroPosteriorGain(_)) => ensure!(lg == q(0, 1), "unexpected error"),
                    Err(e) => return Err(err(e)),
                }
            }
            Err(pml_core::Error::ZeroBaselineGain) => {}
            Err(e) => return Err(err(e)),
        }
    }
    Ok(())
}

/// Largest conditional pml over second-stage outputs, per first output.
fn stage_max(comp: &AdaptiveComposition<Q>) -> Result<Q, String> {
    let mut best = q(1, 1);
    for &y in comp.first.support_y() {
        let s = comp.stage_joint(y).map_err(err)?;
        let m = leakage_distribution(&s).max_ratio();
        if m > best {
            best = m;
        }
    }
    Ok(best)
}

/// Smallest r with P_{YZ}{ℓ(X→z|y) > r} ≤ δ.
fn joint_tail_level(comp: &AdaptiveComposition<Q>, delta: &Q) -> Result<Q, String> {
    let mut cells = Vec::new();
    for yz in comp.joint.support_y().to_vec() {
        let (y, z) = comp.unpair(yz);
        cells.push((comp.conditional_pml(z, y).map_err(err)?, comp.joint.p_y(yz).clone()));
    }
    let mut levels: Vec<Q> = cells.iter().map(|c| c.0.clone()).collect();
    levels.push(q(1, 1));
    levels.sort();
    for r in levels {
        let mass = cells.iter().filter(|c| c.0 > r).fold(q(0, 1), |a, c| a + c.1.clone());
        if mass <= *delta {
            return Ok(r);
        }
    }
    unreachable!()
}

pub fn composition_rules(comp: &AdaptiveComposition<Q>, d1: &Q, d2: &Q) -> Check {
    let first = &comp.first;
    let composed = &comp.joint;
    let pp = |e: Q, d: Q| PrivacyParams::new(e, d).map_err(err);

    // ε-PML at both stages.
    let e1 = leakage_distribution(first).max_ratio();
    let e2 = stage_max(comp)?;
    let c = compose_pml_bounds(PmlComposition::AlmostSure, &pp(e1.clone(), q(0, 1))?, &pp(e2.clone(), q(0, 1))?)
        .map_err(err)?;
    ensure!(check_eps_pml(composed, &c.eps_ratio).map_err(err)?.holds, "almost-sure rule fails");

    // (ε, δ)-PML at both stages, the second for every first output.
    let (e1d, _) = min_eps_for_delta_pml(first, d1).map_err(err)?;
    let mut e2d = q(1, 1);
    for &y in first.support_y() {
        let (e, _) = min_eps_for_delta_pml(&comp.stage_joint(y).map_err(err)?, d2).map_err(err)?;
        if e > e2d {
            e2d = e;
        }
    }
    let c = compose_pml_bounds(PmlComposition::PerOutputTail, &pp(e1d.clone(), d1.clone())?, &pp(e2d, d2.clone())?)
        .map_err(err)?;
    ensure!(
        check_eps_delta_pml(composed, &c.eps_ratio, &c.delta).map_err(err)?.holds,
        "per-output tail rule fails"
    );

    // Second-stage conditional leakage bounded with high probability over (Y, Z).
    let e2t = joint_tail_level(comp, d2)?;
    let c = compose_pml_bounds(PmlComposition::JointTail, &pp(e1d, d1.clone())?, &pp(e2t, d2.clone())?)
        .map_err(err)?;
    ensure!(
        check_eps_delta_pml(composed, &c.eps_ratio, &c.delta).map_err(err)?.holds,
        "joint tail rule fails"
    );

    if *d1 > q(0, 1) {
        // EML first stage, PML second stage.
        let k1 = eml_kappa(first, d1).map_err(err)?.kappa;
        let c = compose_eml_bounds(
            EmlComposition::PmlSecondStage,
            &pp(k1.clone(), d1.clone())?,
            &pp(e2, q(0, 1))?,
            first.prior(),
        )
        .map_err(err)?;
        ensure!(
            check_eps_delta_eml(composed, &c.eps_ratio, &c.delta).map_err(err)?.holds,
            "EML with pure second stage fails"
        );
        if *d2 > q(0, 1) {
            let mut k2 = q(1, 1);
            for &y in first.support_y() {
                let k = eml_kappa(&comp.stage_joint(y).map_err(err)?, d2).map_err(err)?.kappa;
                if k > k2 {
                    k2 = k;
                }
            }
            let c = compose_eml_bounds(
                EmlComposition::EmlSecondStage,
                &pp(k1, d1.clone())?,
                &pp(k2, d2.clone())?,
                first.prior(),
            )
            .map_err(err)?;
            ensure!(
                check_eps_delta_eml(composed, &c.eps_ratio, &c.delta).map_err(err)?.holds,
                "EML two-stage rule fails"
            );
        }
    }
    let _ = e1;
    Ok(())
}

fn finite(v: &MeasureValue<Q>) -> Option<Q> {
    v.exact().cloned()
}

pub fn cross_measures(j: &Joint<Q>, delta: &Q) -> Check {
    let d = leakage_distribution(j);
    let mi = mutual_information(j);
    ensure!(mi <= d.expected_leakage() + 1e-12, "MI {mi} > E[l] {}", d.expected_leakage());
    ensure!(max_information(j) == d.max_ratio(), "max-information != max pml");

    let (eps, _) = min_eps_for_delta_pml(j, delta).map_err(err)?;
    let support = (0..j.n_x())
        .flat_map(|x| (0..j.n_y()).map(move |y| (x, y)))
        .filter(|&(x, y)| *j.cond(x, y) > q(0, 1))
        .count();
    if support <= 12 {
        let approx = brute_force_approx_maxinfo(j, delta, &OracleBudget::default()).map_err(err)?;
        ensure!(approx <= eps, "approx max-info {approx} > eps {eps}");
    }

    let t = total_variation_privacy(j);
    let b = tv_bounds(j, &PrivacyParams::new(eps, delta.clone()).map_err(err)?).map_err(err)?;
    ensure!(b.guarantee_holds, "minimal epsilon must hold");
    for (name, bound) in [
        ("maximal leakage", &b.maximal_leakage),
        ("pml average", &b.pml_average),
        ("three-regime", &b.guarantee),
    ] {
        ensure!(t <= *bound, "T {t} > {name} bound {bound}");
    }

    let top = d.max_ratio();
    for (kind, value) in [
        (LocalNotion::Ldp, ldp_epsilon(j.channel())),
        (LocalNotion::Lip, lip_epsilon(j)),
        (LocalNotion::Ldi, ldi_epsilon(j)),
    ] {
        if let Some(r) = finite(&value) {
            let bound = implied_pml_bound(kind, &MeasureValue::Exact(r), j.prior()).map_err(err)?;
            ensure!(top <= bound, "{kind:?} implied bound {bound} < max pml {top}");
        }
    }
    Ok(())
}

pub fn monotone_reports(j: &Joint<Q>, eps: &Q, delta: &Q, eps2: &Q, delta2: &Q) -> Check {
    let p1 = check_eps_delta_pml(j, eps, delta).map_err(err)?.holds;
    let p2 = check_eps_delta_pml(j, eps2, delta2).map_err(err)?.holds;
    ensure!(!p1 || p2, "PML report not monotone");
    let e1 = check_eps_delta_eml(j, eps, delta).map_err(err)?.holds;
    let e2 = check_eps_delta_eml(j, eps2, delta2).map_err(err)?.holds;
    ensure!(!e1 || e2, "EML report not monotone");
    Ok(())
}

/// Reorders the outputs of a joint.
pub fn permute_outputs(j: &Joint<Q>, order: &[usize]) -> Joint<Q> {
    let labels = order.iter().map(|&y| j.label_y(y).to_string()).collect();
    let rows = (0..j.n_x())
        .map(|x| order.iter().map(|&y| j.cond(x, y).clone()).collect())
        .collect();
    let c = Channel::new(j.prior().labels().to_vec(), labels, rows).expect("permuted");
    Joint::new(j.prior().clone(), c).expect("permuted joint")
}
