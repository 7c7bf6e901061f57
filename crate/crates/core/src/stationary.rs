//! Stationary distributions of full and lumped chains.
//!
//! The solver is the Grassmann–Taksar–Heyman state-reduction scheme: states
//! are censored one at a time, and each pivot is formed as a sum of
//! off-diagonal probabilities rather than `1 - P(x, x)`. No subtraction ever
//! occurs, so the float path keeps full relative accuracy and the same code
//! runs unchanged over exact rationals.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::chain::{ParamVector, ReducedChain, SparseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state_space::{EquivClass, RingState};

/// Float solves must satisfy `max |pi P - pi| <= RESIDUAL_TOL`.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexKind {
    FullState,
    EquivClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S> {
    pub weights: Vec<S>,
    pub index_kind: IndexKind,
}

impl<S: Scalar> Distribution<S> {
    pub fn total(&self) -> S {
        self.weights.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn to_f64(&self) -> Distribution<f64> {
        Distribution {
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
            index_kind: self.index_kind,
        }
    }
}

/// States of the unique closed communicating class, or `Reducible` if there
/// is more than one.
pub fn recurrent_states<S: Scalar>(m: &SparseMatrix<S>) -> Result<Vec<usize>> {
    let n = m.dim();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * 4);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for (i, row) in m.rows.iter().enumerate() {
        for (j, v) in row {
            if *j != i && !v.is_zero() {
                g.add_edge(nodes[i], nodes[*j], ());
            }
        }
    }
    let sccs = tarjan_scc(&g);
    let mut comp = vec![0usize; n];
    for (c, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = c;
        }
    }
    let mut leaks = vec![false; sccs.len()];
    for (i, row) in m.rows.iter().enumerate() {
        if row.iter().any(|(j, v)| !v.is_zero() && comp[*j] != comp[i]) {
            leaks[comp[i]] = true;
        }
    }
    let closed: Vec<usize> = (0..sccs.len()).filter(|&c| !leaks[c]).collect();
    if closed.len() != 1 {
        return Err(Error::Reducible(closed.len()));
    }
    let mut states: Vec<usize> = sccs[closed[0]].iter().map(|v| v.index()).collect();
    states.sort_unstable();
    Ok(states)
}

/// Stationary vector of a row-stochastic matrix with a unique closed class.
/// States outside that class get weight zero.
pub fn solve_stationary<S: Scalar>(m: &SparseMatrix<S>) -> Result<Vec<S>> {
    solve_stationary_ordered(m, |_| 0)
}

/// As [`solve_stationary`], eliminating states in descending `level` order.
/// For ring chains the number of winners is a good level: transitions only
/// move it by one, which bounds fill-in.
pub fn solve_stationary_ordered<S: Scalar>(
    m: &SparseMatrix<S>,
    level: impl Fn(usize) -> u32,
) -> Result<Vec<S>> {
    let mut keep = recurrent_states(m)?;
    keep.sort_by_key(|&s| (level(s), s));
    let local = S::stationary_block(m, &keep)?;
    let mut pi = vec![S::zero(); m.dim()];
    for (k, &s) in keep.iter().enumerate() {
        pi[s] = local[k].clone();
    }
    if !S::EXACT {
        let r = residual(m, &pi);
        if r > RESIDUAL_TOL {
            return Err(Error::Residual(r));
        }
    }
    Ok(pi)
}

/// `max_j |(pi P)_j - pi_j|`.
pub fn residual<S: Scalar>(m: &SparseMatrix<S>, pi: &[S]) -> f64 {
    m.left_mul(pi)
        .iter()
        .zip(pi)
        .map(|(a, b)| (a.clone() - b.clone()).magnitude())
        .fold(0.0, f64::max)
}

/// Plain state reduction in the scalar's own arithmetic.
pub(crate) fn gth<S: Scalar>(m: &SparseMatrix<S>, states: &[usize]) -> Result<Vec<S>> {
    let k = states.len();
    let mut pos = vec![usize::MAX; m.dim()];
    for (a, &s) in states.iter().enumerate() {
        pos[s] = a;
    }
    let mut a = vec![S::zero(); k * k];
    for (li, &s) in states.iter().enumerate() {
        for (j, v) in &m.rows[s] {
            let lj = pos[*j];
            if lj != usize::MAX && lj != li {
                a[li * k + lj] = a[li * k + lj].clone() + v.clone();
            }
        }
    }
    let mut col = Vec::with_capacity(k);
    let mut row = Vec::with_capacity(k);
    for l in (1..k).rev() {
        row.clear();
        col.clear();
        let mut s = S::zero();
        for j in 0..l {
            let v = &a[l * k + j];
            if !v.is_zero() {
                s = s + v.clone();
                row.push(j);
            }
            if !a[j * k + l].is_zero() {
                col.push(j);
            }
        }
        if s.is_zero() {
            return Err(Error::Singular);
        }
        for &i in &col {
            let scaled = a[i * k + l].clone() / s.clone();
            for &j in &row {
                if i != j {
                    let add = scaled.clone() * a[l * k + j].clone();
                    a[i * k + j] = a[i * k + j].clone() + add;
                }
            }
            a[i * k + l] = scaled;
        }
    }
    let mut pi = vec![S::zero(); k];
    if k == 0 {
        return Ok(pi);
    }
    pi[0] = S::one();
    for l in 1..k {
        let mut acc = S::zero();
        for i in 0..l {
            let v = &a[i * k + l];
            if !v.is_zero() {
                acc = acc + pi[i].clone() * v.clone();
            }
        }
        pi[l] = acc;
    }
    let total = pi.iter().cloned().fold(S::zero(), |x, y| x + y);
    Ok(pi.into_iter().map(|x| x / total.clone()).collect())
}

impl ReducedChain {
    /// Stationary distribution over classes at the given parameters.
    pub fn stationary<S: Scalar>(&self, params: &ParamVector<S>) -> Result<Distribution<S>> {
        let m = self.evaluate(params)?;
        let weights = solve_stationary_ordered(&m, |c| self.classes[c].ones_count)?;
        Ok(Distribution { weights, index_kind: IndexKind::EquivClass })
    }
}

/// Stationary distribution of the full chain at the given parameters.
pub fn full_stationary<S: Scalar>(n: u32, params: &ParamVector<S>) -> Result<Distribution<S>> {
    let m = crate::chain::build_full_chain(n, params)?;
    let weights = solve_stationary_ordered(&m, |s| s.count_ones())?;
    Ok(Distribution { weights, index_kind: IndexKind::FullState })
}

/// `pi(x) = pi_bar([x]) / |[x]|`.
pub fn lift_to_full<S: Scalar>(pi_bar: &Distribution<S>, classes: &[EquivClass]) -> Distribution<S> {
    let n = classes.first().map_or(0, |c| c.canonical.n());
    let mut weights = vec![S::zero(); 1usize << n];
    for (w, class) in pi_bar.weights.iter().zip(classes) {
        let share = w.clone() / S::from_ratio(class.orbit_size as i64, 1);
        for m in &class.members {
            weights[m.bits() as usize] = share.clone();
        }
    }
    Distribution { weights, index_kind: IndexKind::FullState }
}

/// `pi_i P_ij = pi_j P_ji` for all pairs; exact for rationals, relative
/// `1e-12` for floats.
pub fn check_detailed_balance<S: Scalar>(pi: &[S], m: &SparseMatrix<S>) -> bool {
    for (i, row) in m.rows.iter().enumerate() {
        for (j, pij) in row {
            let lhs = pi[i].clone() * pij.clone();
            let rhs = pi[*j].clone() * m.get(*j, i);
            let ok = if S::EXACT {
                lhs == rhs
            } else {
                let (l, r) = (lhs.to_f64(), rhs.to_f64());
                (l - r).abs() <= 1e-12 * l.abs().max(r.abs()).max(1e-300)
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Unnormalised invariant measure `(rho0, 3 rho1, 3 rho2, rho3)` of the
/// three-player lumped chain.
pub fn closed_form_n3<S: Scalar>(params: &ParamVector<S>) -> [S; 4] {
    let [p0, p1, p2, p3] = params.coins.clone();
    let (q0, q1, q2, q3) = (params.q_coin(0), params.q_coin(1), params.q_coin(2), params.q_coin(3));
    let three = S::from_ratio(3, 1);
    let rho0 = q0 * (q1.clone() + q2.clone()) * q3.clone();
    let rho1 = p0.clone() * (q1 + q2) * q3.clone();
    let rho2 = p0.clone() * (p1.clone() + p2.clone()) * q3;
    let rho3 = p0 * (p1 + p2) * p3;
    [rho0, three.clone() * rho1, three * rho2, rho3]
}

/// The two algebraically equal expressions for `rho2` at four players.
pub fn n4_rho2_forms<S: Scalar>(params: &ParamVector<S>) -> (S, S) {
    let t = N4Terms::new(params);
    let two = S::from_ratio(2, 1);
    let first = t.p0.clone()
        * (two.clone() * t.q0.clone() * t.q3.clone()
            + t.s.clone() * t.c.clone() * (t.q0.clone() + t.p3.clone())
            + t.c.clone() * (t.p3.clone() - t.q0.clone()))
        * t.q3.clone();
    let second = t.p0.clone()
        * (two * t.p0.clone() * t.p3.clone()
            + t.s.clone() * t.c.clone() * (t.q0.clone() + t.p3.clone())
            + t.s * (t.q0 - t.p3))
        * t.q3;
    (first, second)
}

struct N4Terms<S> {
    p0: S,
    p3: S,
    q0: S,
    q3: S,
    /// `p1 + p2`
    s: S,
    /// `q1 + q2`
    c: S,
}

impl<S: Scalar> N4Terms<S> {
    fn new(params: &ParamVector<S>) -> Self {
        let [p0, p1, p2, p3] = params.coins.clone();
        Self {
            p0,
            p3,
            q0: params.q_coin(0),
            q3: params.q_coin(3),
            s: p1 + p2,
            c: params.q_coin(1) + params.q_coin(2),
        }
    }
}

/// Unnormalised invariant measure `(rho0, 4 rho1, 4 rho2, 2 rho2', 4 rho3, rho4)`
/// of the four-player lumped chain, in class order `0, 1, 2, 2', 3, 4`.
pub fn closed_form_n4<S: Scalar>(params: &ParamVector<S>) -> [S; 6] {
    let t = N4Terms::new(params);
    let two = S::from_ratio(2, 1);
    let four = S::from_ratio(4, 1);
    let low = two.clone() * t.q0.clone() * t.q3.clone()
        + t.c.clone() * t.c.clone() * (t.q0.clone() + t.p3.clone());
    let high = two.clone() * t.p0.clone() * t.p3.clone()
        + t.s.clone() * t.s.clone() * (t.q0.clone() + t.p3.clone());
    let rho0 = t.q0.clone() * low.clone() * t.q3.clone();
    let rho1 = t.p0.clone() * low * t.q3.clone();
    let rho2 = n4_rho2_forms(params).0;
    let rho2p = t.p0.clone()
        * (two.clone() * t.p0.clone() * t.q3.clone()
            + t.s.clone() * t.s.clone() * t.q3.clone()
            + t.c.clone() * t.c.clone() * t.p0.clone())
        * t.q3.clone();
    let rho3 = t.p0.clone() * high.clone() * t.q3;
    let rho4 = t.p0 * high * t.p3;
    [rho0, four.clone() * rho1, four.clone() * rho2, two * rho2p, four * rho3, rho4]
}

/// Scales a nonnegative vector to sum 1.
pub fn normalize<S: Scalar>(v: &[S]) -> Vec<S> {
    let total = v.iter().cloned().fold(S::zero(), |a, b| a + b);
    v.iter().map(|x| x.clone() / total.clone()).collect()
}

/// The eight-state measure `(rho0, rho1, rho1, rho2, rho1, rho2, rho2, rho3)`.
pub fn closed_form_n3_full<S: Scalar>(params: &ParamVector<S>) -> Vec<S> {
    let [r0, r1x3, r2x3, r3] = closed_form_n3(params);
    let three = S::from_ratio(3, 1);
    let (r1, r2) = (r1x3 / three.clone(), r2x3 / three);
    (0..8u32)
        .map(|b| match RingState::from_raw(b, 3).ones_count() {
            0 => r0.clone(),
            1 => r1.clone(),
            2 => r2.clone(),
            _ => r3.clone(),
        })
        .collect()
}
