//! Two adversary models for pointwise leakage: guessing a randomized function
//! U of X, and maximizing a gain function g(x, x̂). Each can be rewritten as
//! the other without changing the leakage of a given output.

use crate::error::{Error, Result};
use crate::model::{default_labels, Channel, Joint};
use crate::scalar::{gt, max_of, Scalar};

/// Letters allowed in a gain-to-function construction.
pub const MAX_GAIN_LETTERS: usize = 1 << 16;

/// A randomized function of X given by its kernel P_{U|X}.
///
/// Kernel rows are matched to a joint's inputs by label, so a kernel defined
/// over the full input alphabet also applies after zero-mass inputs are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedFunction<S> {
    pub kernel: Channel<S>,
}

impl<S: Scalar> RandomizedFunction<S> {
    pub fn new(kernel: Channel<S>) -> Self {
        RandomizedFunction { kernel }
    }

    pub fn labels_u(&self) -> &[String] {
        self.kernel.labels_y()
    }
}

/// Nonnegative gain g(x, x̂), stored scaled so that its largest entry is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GainFunction<S> {
    labels_x: Vec<String>,
    labels_xhat: Vec<String>,
    matrix: Vec<Vec<S>>,
    scale: S,
}

impl<S: Scalar> GainFunction<S> {
    pub fn new(labels_x: Vec<String>, labels_xhat: Vec<String>, matrix: Vec<Vec<S>>) -> Result<Self> {
        if matrix.len() != labels_x.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} gain rows for {} input labels",
                matrix.len(),
                labels_x.len()
            )));
        }
        for (label, row) in labels_x.iter().zip(&matrix) {
            if row.len() != labels_xhat.len() {
                return Err(Error::ShapeMismatch(format!(
                    "gain row `{label}` has {} entries for {} guesses",
                    row.len(),
                    labels_xhat.len()
                )));
            }
            if let Some((g, v)) = labels_xhat.iter().zip(row).find(|(_, v)| **v < S::zero()) {
                return Err(Error::NegativeEntry {
                    label: format!("{label}, {g}"),
                    value: v.to_repr(),
                });
            }
        }
        let scale = max_of(matrix.iter().flatten()).unwrap_or_else(S::zero);
        if !gt(&scale, &S::zero()) {
            return Err(Error::ZeroBaselineGain);
        }
        let matrix = matrix
            .into_iter()
            .map(|row| row.into_iter().map(|v| v / scale.clone()).collect())
            .collect();
        Ok(GainFunction {
            labels_x,
            labels_xhat,
            matrix,
            scale,
        })
    }

    /// g(x, x̂) = 1 iff x̂ = x: the adversary guesses X itself.
    pub fn identity(labels_x: Vec<String>) -> Self {
        let n = labels_x.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        GainFunction {
            labels_xhat: labels_x.clone(),
            labels_x,
            matrix,
            scale: S::one(),
        }
    }

    /// Guesses are k-subsets of X; the gain is 1 when the secret is in the guess.
    pub fn k_tries(labels_x: Vec<String>, k: usize) -> Result<Self> {
        let n = labels_x.len();
        if k == 0 || k > n {
            return Err(Error::ShapeMismatch(format!("cannot guess {k} of {n} inputs")));
        }
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        let mut current = Vec::new();
        fn walk(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if current.len() == k {
                out.push(current.clone());
                return;
            }
            for i in start..n {
                current.push(i);
                walk(i + 1, n, k, current, out);
                current.pop();
            }
        }
        walk(0, n, k, &mut current, &mut subsets);
        let labels_xhat = subsets
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&i| labels_x[i].as_str())
                    .collect::<Vec<_>>()
                    .join("|")
            })
            .collect();
        let matrix = (0..n)
            .map(|x| {
                subsets
                    .iter()
                    .map(|s| if s.contains(&x) { S::one() } else { S::zero() })
                    .collect()
            })
            .collect();
        Self::new(labels_x, labels_xhat, matrix)
    }

    pub fn labels_x(&self) -> &[String] {
        &self.labels_x
    }

    pub fn labels_xhat(&self) -> &[String] {
        &self.labels_xhat
    }

    /// Normalized gains, largest entry 1.
    pub fn matrix(&self) -> &[Vec<S>] {
        &self.matrix
    }

    /// Factor removed by normalization.
    pub fn scale(&self) -> &S {
        &self.scale
    }
}

fn aligned<'a, S: Scalar>(
    labels: &[String],
    rows: &'a [Vec<S>],
    joint: &Joint<S>,
) -> Result<Vec<&'a [S]>> {
    (0..joint.n_x())
        .map(|x| {
            let label = joint.label_x(x);
            labels
                .iter()
                .position(|l| l == label)
                .map(|i| rows[i].as_slice())
                .ok_or_else(|| Error::ShapeMismatch(format!("no row for input `{label}`")))
        })
        .collect()
}

/// max over columns of Σ_x rows[x][c]·weights[x].
fn best_column<S: Scalar>(rows: &[&[S]], weights: &[S]) -> (S, Vec<usize>) {
    let n = rows.first().map_or(0, |r| r.len());
    let values: Vec<S> = (0..n)
        .map(|c| {
            rows.iter()
                .zip(weights)
                .fold(S::zero(), |acc, (r, w)| acc + r[c].clone() * w.clone())
        })
        .collect();
    let best = max_of(&values).unwrap_or_else(S::zero);
    let argmax = (0..n).filter(|&c| values[c].approx_eq(&best)).collect();
    (best, argmax)
}

/// ℓ_U(X → y): how much more likely the best guess of U becomes after seeing y.
pub fn u_leakage<S: Scalar>(joint: &Joint<S>, u: &RandomizedFunction<S>, y: usize) -> Result<S> {
    let post = joint.posterior(y)?;
    let rows = aligned(u.kernel.labels_x(), u.kernel.rows(), joint)?;
    let (num, _) = best_column(&rows, &post);
    let (den, _) = best_column(&rows, joint.prior().probs());
    Ok(num / den)
}

/// ℓ_g(X → y): ratio of the best expected gain after and before seeing y.
pub fn g_leakage<S: Scalar>(joint: &Joint<S>, g: &GainFunction<S>, y: usize) -> Result<S> {
    let post = joint.posterior(y)?;
    let rows = aligned(&g.labels_x, &g.matrix, joint)?;
    let (den, _) = best_column(&rows, joint.prior().probs());
    if !gt(&den, &S::zero()) {
        return Err(Error::ZeroBaselineGain);
    }
    let (num, _) = best_column(&rows, &post);
    Ok(num / den)
}

/// Identity-gain leakage max_x P_{X|Y=y}(x) / max_x P_X(x); may fall below 1.
pub fn dynamic_leakage<S: Scalar>(joint: &Joint<S>, y: usize) -> Result<S> {
    g_leakage(joint, &GainFunction::identity(joint.prior().labels().to_vec()), y)
}

/// g_U(x, x̂_u) = P_{U|X=x}(u).
pub fn gain_from_function<S: Scalar>(u: &RandomizedFunction<S>) -> GainFunction<S> {
    GainFunction::new(
        u.kernel.labels_x().to_vec(),
        u.kernel.labels_y().to_vec(),
        u.kernel.rows().to_vec(),
    )
    .expect("stochastic kernels are valid gains")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainCase {
    /// One guess is best both before and after observing y.
    SharedGuess,
    /// Different best guesses with the same set of positively rewarded inputs.
    SameSupport,
    /// Different best guesses rewarding different inputs.
    DifferentSupport,
}

/// A randomized function built from a gain function for one output.
#[derive(Debug, Clone, PartialEq)]
pub struct GainConstruction<S> {
    pub function: RandomizedFunction<S>,
    pub case: GainCase,
    /// Index of the best guess after observing y.
    pub guess_after: usize,
    /// Index of the best guess with no observation.
    pub guess_before: usize,
    /// Padding letters added to the V block, the W block, and for inputs
    /// rewarded by neither guess.
    pub n_v: usize,
    pub n_w: usize,
    pub n_o: usize,
}

/// Smallest integer strictly above `ratio`.
fn strictly_above<S: Scalar>(ratio: &S) -> usize {
    ratio.floor_int() as usize + 1
}

/// Letters of a shattering block for gains `col` (zero outside the block).
fn shatter_block<S: Scalar>(col: &[S]) -> Result<(usize, Vec<Vec<S>>)> {
    let mut counts = Vec::with_capacity(col.len());
    let mut width = 0usize;
    for g in col {
        if !gt(g, &S::zero()) {
            counts.push(None);
            continue;
        }
        let k = g.recip();
        let whole = k.floor_int();
        if whole >= MAX_GAIN_LETTERS as u64 {
            return Err(Error::AlphabetTooLarge {
                size: whole as usize,
                limit: MAX_GAIN_LETTERS,
            });
        }
        let whole = whole as usize;
        let letters = if k.is_integral() { whole } else { whole + 1 };
        width = width.max(letters);
        counts.push(Some((whole, letters)));
    }
    let rows = col
        .iter()
        .zip(&counts)
        .map(|(g, c)| {
            let mut row = vec![S::zero(); width];
            if let Some((whole, letters)) = *c {
                for slot in row.iter_mut().take(whole) {
                    *slot = g.clone();
                }
                if letters > whole {
                    row[whole] = S::one() - S::from_u64(whole as u64) * g.clone();
                }
            }
            row
        })
        .collect();
    Ok((width, rows))
}

fn mass<S: Scalar>(weights: &[S], pick: impl Fn(usize) -> bool) -> S {
    weights
        .iter()
        .enumerate()
        .filter(|(x, _)| pick(*x))
        .fold(S::zero(), |acc, (_, w)| acc + w.clone())
}

/// Builds U_g with ℓ_{U_g}(X → y) = ℓ_g(X → y).
pub fn gain_construction<S: Scalar>(
    joint: &Joint<S>,
    g: &GainFunction<S>,
    y: usize,
) -> Result<GainConstruction<S>> {
    let post = joint.posterior(y)?;
    let prior = joint.prior().probs();
    let rows = aligned(&g.labels_x, &g.matrix, joint)?;
    let (den, den_arg) = best_column(&rows, prior);
    if !gt(&den, &S::zero()) {
        return Err(Error::ZeroBaselineGain);
    }
    let (num, num_arg) = best_column(&rows, &post);
    if !gt(&num, &S::zero()) {
        return Err(Error::ZeroPosteriorGain(joint.label_y(y).to_string()));
    }
    let nx = joint.n_x();
    let shared = num_arg.iter().copied().find(|c| den_arg.contains(c));
    let guess_after = shared.unwrap_or(num_arg[0]);
    let guess_before = shared.unwrap_or(den_arg[0]);
    let col = |c: usize| -> Vec<S> { rows.iter().map(|r| r[c].clone()).collect() };
    let g_v = col(guess_after);
    let g_w = col(guess_before);
    let in_v: Vec<bool> = g_v.iter().map(|v| gt(v, &S::zero())).collect();
    let in_w: Vec<bool> = g_w.iter().map(|v| gt(v, &S::zero())).collect();
    let two = S::from_u64(2);

    let (v_width, v_rows) = shatter_block(&g_v)?;
    let mixture = shared.is_none();
    let (case, w_block, n_v, n_w) = if !mixture {
        (GainCase::SharedGuess, None, 0, 0)
    } else {
        let (w_width, w_rows) = shatter_block(&g_w)?;
        // Padding letters must not beat the intended best letter in either
        // the posterior or the prior expected gain.
        let pad = |only: &dyn Fn(usize) -> bool| -> usize {
            let a = mass(&post, only) / num.clone();
            let b = mass(prior, only) / den.clone();
            strictly_above(if a > b { &a } else { &b })
        };
        let n_v = if (0..nx).any(|x| in_w[x] && !in_v[x]) {
            pad(&|x| in_w[x] && !in_v[x])
        } else {
            0
        };
        let n_w = if (0..nx).any(|x| in_v[x] && !in_w[x]) {
            pad(&|x| in_v[x] && !in_w[x])
        } else {
            0
        };
        let case = if in_v == in_w {
            GainCase::SameSupport
        } else {
            GainCase::DifferentSupport
        };
        (case, Some((w_width, w_rows)), n_v, n_w)
    };
    let outside = |x: usize| !in_v[x] && !(mixture && in_w[x]);
    let n_o = if (0..nx).any(outside) {
        // The best letter carries the full gain in the shared case and half of
        // it in the mixture.
        let factor = if mixture { two.clone() } else { S::one() };
        let a = factor.clone() * mass(&post, outside) / num.clone();
        let b = factor * mass(prior, outside) / den.clone();
        strictly_above(if a > b { &a } else { &b })
    } else {
        0
    };
    let w_width = w_block.as_ref().map_or(0, |(w, _)| *w);
    let total = v_width + n_v + w_width + n_w + n_o;
    if total > MAX_GAIN_LETTERS {
        return Err(Error::AlphabetTooLarge {
            size: total,
            limit: MAX_GAIN_LETTERS,
        });
    }
    let half = S::one() / two;
    let kernel_rows = (0..nx)
        .map(|x| {
            let mut row = vec![S::zero(); total];
            if outside(x) {
                let share = S::one() / S::from_u64(n_o as u64);
                for slot in row.iter_mut().skip(total - n_o) {
                    *slot = share.clone();
                }
                return row;
            }
            let weight = if mixture { half.clone() } else { S::one() };
            if in_v[x] {
                for (i, v) in v_rows[x].iter().enumerate() {
                    row[i] = weight.clone() * v.clone();
                }
            } else {
                let share = weight.clone() / S::from_u64(n_v as u64);
                for slot in row.iter_mut().skip(v_width).take(n_v) {
                    *slot = share.clone();
                }
            }
            if let Some((_, w_rows)) = &w_block {
                let start = v_width + n_v;
                if in_w[x] {
                    for (i, w) in w_rows[x].iter().enumerate() {
                        row[start + i] = weight.clone() * w.clone();
                    }
                } else {
                    let share = weight / S::from_u64(n_w as u64);
                    for slot in row.iter_mut().skip(start + w_width).take(n_w) {
                        *slot = share.clone();
                    }
                }
            }
            row
        })
        .collect();
    let mut labels_u = default_labels("v", v_width + n_v);
    labels_u.extend(default_labels("w", w_width + n_w));
    labels_u.extend(default_labels("o", n_o));
    let kernel = Channel::new(joint.prior().labels().to_vec(), labels_u, kernel_rows)?;
    Ok(GainConstruction {
        function: RandomizedFunction::new(kernel),
        case,
        guess_after,
        guess_before,
        n_v,
        n_w,
        n_o,
    })
}

/// Randomized function whose leakage at `y` equals the g-leakage at `y`.
pub fn function_from_gain<S: Scalar>(
    joint: &Joint<S>,
    g: &GainFunction<S>,
    y: usize,
) -> Result<RandomizedFunction<S>> {
    gain_construction(joint, g, y).map(|c| c.function)
}
