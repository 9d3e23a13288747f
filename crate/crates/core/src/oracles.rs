//! Brute-force reference computations and a seeded model generator.
//!
//! Nothing here shares code paths with the main algorithms beyond the model
//! types: κ(δ) is recomputed by enumerating the vertices of the feasible set
//! of randomized events on the unreduced channel.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::model::{Channel, Joint, Prior};
use crate::scalar::Scalar;

/// Denominator of the raw entries drawn by [`random_model`].
pub const RANDOM_DENOMINATOR: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest number of positive-mass outputs to enumerate over.
    pub max_outputs: usize,
    /// log₂ of the largest number of events to visit.
    pub max_event_bits: usize,
    /// Grid resolution q for the lower-bound screen.
    pub grid_steps: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_outputs: 12,
            max_event_bits: 20,
            grid_steps: 4,
        }
    }
}

fn positive_outputs<S: Scalar>(joint: &Joint<S>) -> Vec<usize> {
    (0..joint.n_y())
        .filter(|&y| *joint.p_y(y) > S::zero())
        .collect()
}

fn max_value<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    values
        .into_iter()
        .fold(S::zero(), |best, v| if v > best { v } else { best })
}

/// κ(δ) by enumerating every vertex of {a ∈ [0,1]^Y : Σ a_y P_Y(y) ≥ δ}:
/// 0/1 vectors meeting the constraint and vectors with one fractional
/// coordinate placed on the constraint boundary.
pub fn brute_force_eml<S: Scalar>(joint: &Joint<S>, delta: &S, budget: &OracleBudget) -> Result<S> {
    if *delta <= S::zero() || *delta > S::one() {
        return Err(Error::InvalidDelta(delta.to_repr()));
    }
    let cols = positive_outputs(joint);
    let n = cols.len();
    if n > budget.max_outputs || n > budget.max_event_bits {
        return Err(Error::BudgetExceeded {
            what: "outputs",
            size: n,
            limit: budget.max_outputs.min(budget.max_event_bits),
        });
    }
    let nx = joint.n_x();
    // Per 0/1 vector: P_{Y|X=x}(E) for each x, then P_Y(E) in the last slot.
    let mut sums: Vec<Vec<S>> = Vec::with_capacity(1 << n);
    sums.push(vec![S::zero(); nx + 1]);
    let mut best = S::zero();
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        let y = cols[low];
        let prev = &sums[mask & (mask - 1)];
        let mut cur: Vec<S> = (0..nx)
            .map(|x| prev[x].clone() + joint.cond(x, y).clone())
            .collect();
        cur.push(prev[nx].clone() + joint.p_y(y).clone());
        sums.push(cur);
    }
    for (mask, cur) in sums.iter().enumerate() {
        let mass = &cur[nx];
        if mass >= delta {
            let v = max_value(cur[..nx].iter().cloned()) / mass.clone();
            if v > best {
                best = v;
            }
            continue;
        }
        let missing = delta.clone() - mass.clone();
        for (j, &y) in cols.iter().enumerate() {
            if mask >> j & 1 == 1 {
                continue;
            }
            let w = missing.clone() / joint.p_y(y).clone();
            if w > S::zero() && w < S::one() {
                let top = max_value((0..nx).map(|x| cur[x].clone() + w.clone() * joint.cond(x, y).clone()));
                let v = top / delta.clone();
                if v > best {
                    best = v;
                }
            }
        }
    }
    Ok(best)
}

/// Lower bound on κ(δ) from the grid a_y ∈ {0, 1/q, …, 1}.
pub fn grid_screen_eml<S: Scalar>(joint: &Joint<S>, delta: &S, budget: &OracleBudget) -> Result<S> {
    let cols = positive_outputs(joint);
    let q = budget.grid_steps.max(1);
    let points = (q as f64 + 1.0).powi(cols.len() as i32);
    let limit = 1u64 << budget.max_event_bits.min(40);
    if points > limit as f64 {
        return Err(Error::BudgetExceeded {
            what: "grid points",
            size: points.min(usize::MAX as f64) as usize,
            limit: limit as usize,
        });
    }
    let nx = joint.n_x();
    // steps[j][d]: weight d/q applied to column j, as (numerators per x, mass).
    let steps: Vec<Vec<Vec<S>>> = cols
        .iter()
        .map(|&y| {
            (0..=q)
                .map(|d| {
                    let a = S::frac(d as i64, q as i64);
                    let mut v: Vec<S> = (0..nx).map(|x| a.clone() * joint.cond(x, y).clone()).collect();
                    v.push(a * joint.p_y(y).clone());
                    v
                })
                .collect()
        })
        .collect();
    fn walk<S: Scalar>(steps: &[Vec<Vec<S>>], acc: &[S], delta: &S, best: &mut S) {
        let Some((head, rest)) = steps.split_first() else {
            let nx = acc.len() - 1;
            let mass = &acc[nx];
            if mass >= delta && *mass > S::zero() {
                let v = max_value(acc[..nx].iter().cloned()) / mass.clone();
                if v > *best {
                    *best = v;
                }
            }
            return;
        };
        for level in head {
            let next: Vec<S> = acc.iter().zip(level).map(|(a, b)| a.clone() + b.clone()).collect();
            walk(rest, &next, delta, best);
        }
    }
    let mut best = S::zero();
    walk(&steps, &vec![S::zero(); nx + 1], delta, &mut best);
    Ok(best)
}

/// exp I_∞^δ(X;Y) by visiting every event over the support of P_{XY}.
pub fn brute_force_approx_maxinfo<S: Scalar>(
    joint: &Joint<S>,
    delta: &S,
    budget: &OracleBudget,
) -> Result<S> {
    let mut cells = Vec::new();
    for x in 0..joint.n_x() {
        for y in 0..joint.n_y() {
            let p = joint.p_x(x).clone() * joint.cond(x, y).clone();
            if p > S::zero() {
                cells.push((p, joint.p_x(x).clone() * joint.p_y(y).clone()));
            }
        }
    }
    let n = cells.len();
    if n > budget.max_event_bits {
        return Err(Error::BudgetExceeded {
            what: "support cells",
            size: n,
            limit: budget.max_event_bits,
        });
    }
    // Subset sums built from the subset without its lowest cell.
    let mut sums: Vec<(S, S)> = Vec::with_capacity(1 << n);
    sums.push((S::zero(), S::zero()));
    let mut best = S::zero();
    for mask in 1usize..(1 << n) {
        let (cp, cq) = &cells[mask.trailing_zeros() as usize];
        let (p0, q0) = &sums[mask & (mask - 1)];
        let (p, q) = (p0.clone() + cp.clone(), q0.clone() + cq.clone());
        if p >= *delta {
            let v = (p.clone() - delta.clone()) / q.clone();
            if v > best {
                best = v;
            }
        }
        sums.push((p, q));
    }
    Ok(best)
}

fn normalized<S: Scalar>(raw: Vec<u64>) -> Vec<S> {
    let total: u64 = raw.iter().sum();
    raw.into_iter()
        .map(|k| S::frac(k as i64, total as i64))
        .collect()
}

fn draw_row<S: Scalar>(rng: &mut SplitMix64, n: usize) -> Vec<S> {
    let mut raw: Vec<u64> = (0..n)
        .map(|_| rng.next_u64() % (RANDOM_DENOMINATOR + 1))
        .collect();
    if raw.iter().all(|&k| k == 0) {
        raw[0] = 1;
    }
    normalized(raw)
}

/// Prior with entries (1 + k)/64, k < 64, normalized; always full support.
pub fn random_prior<S: Scalar>(rng: &mut SplitMix64, n: usize) -> Prior<S> {
    let raw = (0..n)
        .map(|_| 1 + rng.next_u64() % RANDOM_DENOMINATOR)
        .collect();
    Prior::from_probs(normalized(raw)).expect("normalized prior")
}

/// Channel with entries k/64, k ≤ 64, normalized per row.
pub fn random_channel<S: Scalar>(rng: &mut SplitMix64, n_x: usize, n_y: usize) -> Channel<S> {
    let rows = (0..n_x).map(|_| draw_row(rng, n_y)).collect();
    Channel::from_rows(rows).expect("normalized rows")
}

/// Reproducible joint: the prior is drawn first, then the channel row by row.
pub fn random_model<S: Scalar>(seed: u64, shape: (usize, usize)) -> Joint<S> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let prior = random_prior(&mut rng, shape.0);
    let channel = random_channel(&mut rng, shape.0, shape.1);
    Joint::new(prior, channel).expect("generated model is valid")
}
