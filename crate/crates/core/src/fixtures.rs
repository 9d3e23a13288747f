//! Small reference models shared by tests, examples and the CLI.
//!
//! - `fix_a`, `fix_b`: two ternary channels with equal maximal leakage but
//!   different leakage profiles.
//! - `fix_c`: a 4×4 channel with two high-leakage and two similar low-leakage
//!   outputs, plus a deterministic 4→2 post-processing (`fix_c_postprocess`).
//! - `fix_d`: binary symmetric channel with crossover 2/5, uniform prior.
//! - `fix_e`: binary X, Z, Y with Z−X side information and Y drawn from (X, Z).
//! - `fix_f`: odd/even channel that satisfies (0, δ)-LDP.
//! - `fix_g`: one rare input mapped to its own output.

use crate::model::{default_labels, Channel, Joint, Prior};
use crate::scalar::Scalar;

fn fr<S: Scalar>(pairs: &[(i64, i64)]) -> Vec<S> {
    pairs.iter().map(|&(n, d)| S::frac(n, d)).collect()
}

fn uniform_joint<S: Scalar>(rows: Vec<Vec<S>>) -> Joint<S> {
    let prior = Prior::uniform(rows.len());
    Joint::new(prior, Channel::from_rows(rows).expect("fixture channel")).expect("fixture joint")
}

pub fn fix_a<S: Scalar>() -> Joint<S> {
    uniform_joint(vec![
        fr(&[(1, 1), (0, 1), (0, 1)]),
        fr(&[(1, 2), (1, 2), (0, 1)]),
        fr(&[(0, 1), (1, 2), (1, 2)]),
    ])
}

pub fn fix_b<S: Scalar>() -> Joint<S> {
    uniform_joint(vec![
        fr(&[(2, 3), (1, 6), (1, 6)]),
        fr(&[(1, 6), (2, 3), (1, 6)]),
        fr(&[(1, 6), (1, 6), (2, 3)]),
    ])
}

pub fn fix_c<S: Scalar>() -> Joint<S> {
    uniform_joint(vec![
        fr(&[(0, 1), (0, 1), (1, 2), (1, 2)]),
        fr(&[(0, 1), (0, 1), (1, 2), (1, 2)]),
        fr(&[(0, 1), (1, 3), (1, 3), (1, 3)]),
        fr(&[(1, 3), (0, 1), (1, 3), (1, 3)]),
    ])
}

/// Deterministic P_{Z|Y}: y1, y3 ↦ z1 and y2, y4 ↦ z2.
pub fn fix_c_postprocess<S: Scalar>() -> Channel<S> {
    Channel::new(
        default_labels("y", 4),
        default_labels("z", 2),
        vec![
            fr(&[(1, 1), (0, 1)]),
            fr(&[(0, 1), (1, 1)]),
            fr(&[(1, 1), (0, 1)]),
            fr(&[(0, 1), (1, 1)]),
        ],
    )
    .expect("fixture kernel")
}

pub fn fix_d<S: Scalar>() -> Joint<S> {
    uniform_joint(vec![fr(&[(3, 5), (2, 5)]), fr(&[(2, 5), (3, 5)])])
}

/// Binary triple with P_{Z|X} and P_{Y|X,Z}; rows of `channel_y` are ordered
/// (x1,z1), (x1,z2), (x2,z1), (x2,z2).
#[derive(Debug, Clone)]
pub struct SideInfoFixture<S> {
    pub prior: Prior<S>,
    pub channel_z: Channel<S>,
    pub channel_y: Channel<S>,
}

pub fn fix_e<S: Scalar>() -> SideInfoFixture<S> {
    let channel_z = Channel::new(
        default_labels("x", 2),
        default_labels("z", 2),
        vec![fr(&[(2, 5), (3, 5)]), fr(&[(3, 5), (2, 5)])],
    )
    .expect("fixture side channel");
    let channel_y = Channel::new(
        vec!["x1,z1".into(), "x1,z2".into(), "x2,z1".into(), "x2,z2".into()],
        default_labels("y", 2),
        vec![
            fr(&[(1, 2), (1, 2)]),
            fr(&[(1, 3), (2, 3)]),
            fr(&[(2, 3), (1, 3)]),
            fr(&[(1, 2), (1, 2)]),
        ],
    )
    .expect("fixture conditional channel");
    SideInfoFixture {
        prior: Prior::uniform(2),
        channel_z,
        channel_y,
    }
}

/// Uniform binary prior, `2k` outputs; x1 puts mass 1/k on odd outputs and x2
/// on even outputs, so the channel satisfies (0, 1/k)-LDP.
pub fn fix_f_with<S: Scalar>(k: usize) -> Joint<S> {
    let delta = S::one() / S::from_u64(k as u64);
    let rows = (0..2)
        .map(|x| {
            (0..2 * k)
                .map(|i| if i % 2 == x { delta.clone() } else { S::zero() })
                .collect()
        })
        .collect();
    uniform_joint(rows)
}

/// [`fix_f_with`] at δ = 1/4.
pub fn fix_f<S: Scalar>() -> Joint<S> {
    fix_f_with(4)
}

/// `m` inputs and `n` outputs; x1 has prior `p_star` and always emits y1, the
/// other inputs share the remaining mass and emit y2..yn uniformly.
pub fn fix_g_with<S: Scalar>(p_star: S, m: usize, n: usize) -> Joint<S> {
    assert!(m >= 2 && n >= 2);
    let rest = (S::one() - p_star.clone()) / S::from_u64(m as u64 - 1);
    let mut probs = vec![p_star];
    probs.extend(std::iter::repeat_n(rest, m - 1));
    let spread = S::one() / S::from_u64(n as u64 - 1);
    let rows = (0..m)
        .map(|x| {
            (0..n)
                .map(|y| match (x == 0, y == 0) {
                    (true, true) => S::one(),
                    (true, false) | (false, true) => S::zero(),
                    (false, false) => spread.clone(),
                })
                .collect()
        })
        .collect();
    Joint::new(
        Prior::from_probs(probs).expect("fixture prior"),
        Channel::from_rows(rows).expect("fixture channel"),
    )
    .expect("fixture joint")
}

/// [`fix_g_with`] at p* = 1/10 with three inputs and three outputs.
pub fn fix_g<S: Scalar>() -> Joint<S> {
    fix_g_with(S::frac(1, 10), 3, 3)
}

/// Every single-joint fixture, by name.
pub fn all<S: Scalar>() -> Vec<(&'static str, Joint<S>)> {
    vec![
        ("FIX-A", fix_a()),
        ("FIX-B", fix_b()),
        ("FIX-C", fix_c()),
        ("FIX-D", fix_d()),
        ("FIX-F", fix_f()),
        ("FIX-G", fix_g()),
    ]
}
