//! Mean profit rates per turn.
//!
//! The ensemble's expected profit on one turn from configuration `x` is
//! `(1/n) sum_i (p_{m_i(x)} - q_{m_i(x)})`, which is the row sum of the
//! payoff-flipped matrix. The long-run rate is that drift averaged over the
//! stationary distribution, and is class-invariant, so it can be computed on
//! the lumped chain.

use serde::{Deserialize, Serialize};

use crate::chain::{build_full_symbolic, BoundaryCase, CoefEntry, ParamVector, ReducedChain};
use crate::error::{Error, Result};
use crate::linalg::{self, Dense};
use crate::scalar::Scalar;
use crate::state_space::{RingState, Symmetry};
use crate::stationary::{self, solve_stationary};

/// Largest ring for the augmented `(configuration, next player)` chain.
pub const MAX_AUGMENTED_PLAYERS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanReport<S = f64> {
    pub mu_a: S,
    pub mu_b: S,
    pub mu_c: S,
    pub sigma2: Option<S>,
    pub exact: bool,
}

fn weighted_drift<S: Scalar>(pi: &[S], drift: &[CoefEntry], params: &ParamVector<S>) -> S {
    pi.iter()
        .zip(drift)
        .filter(|(w, _)| !w.is_zero())
        .fold(S::zero(), |acc, (w, d)| acc + w.clone() * d.eval(params))
}

impl ReducedChain {
    /// Long-run profit per turn of game B with the given coins.
    ///
    /// Case 2 and Case 4 return `-1` and `+1`, and Case 5 on an even ring
    /// returns `0`, all without a solve. Case 6 is rejected; see
    /// [`crate::simulate::absorption_analysis`].
    pub fn mean_rate<S: Scalar>(&self, params: &ParamVector<S>) -> Result<S> {
        self.check_params(params)?;
        match params.boundary_case() {
            BoundaryCase::Case2 => return Ok(-S::one()),
            BoundaryCase::Case4 => return Ok(S::one()),
            BoundaryCase::Case5 if self.n % 2 == 0 => return Ok(S::zero()),
            c @ (BoundaryCase::Case6 | BoundaryCase::Unsupported) => {
                return Err(Error::UnsupportedBoundary(c))
            }
            _ => {}
        }
        let pi = self.stationary(params)?;
        Ok(weighted_drift(&pi.weights, &self.drift(), params))
    }

    /// Profit rate of the mixture C, i.e. game B with coins `r_m`.
    pub fn mean_mixed<S: Scalar>(&self, params: &ParamVector<S>) -> Result<S> {
        self.mean_rate(&params.mixed())
    }

    pub fn mean_report<S: Scalar>(&self, params: &ParamVector<S>) -> Result<MeanReport<S>> {
        let two = S::from_ratio(2, 1);
        Ok(MeanReport {
            mu_a: two * params.p.clone() - S::one(),
            mu_b: self.mean_rate(params)?,
            mu_c: self.mean_mixed(params)?,
            sigma2: None,
            exact: S::EXACT,
        })
    }
}

/// Builds the lumped chain and evaluates the game-B rate.
pub fn mean_rate<S: Scalar>(n: u32, sym: Symmetry, params: &ParamVector<S>) -> Result<S> {
    ReducedChain::build(n, sym)?.mean_rate(params)
}

pub fn mean_mixed<S: Scalar>(n: u32, sym: Symmetry, params: &ParamVector<S>) -> Result<S> {
    ReducedChain::build(n, sym)?.mean_mixed(params)
}

/// The same rate computed on the unreduced `2^n`-state chain.
pub fn full_mean_rate<S: Scalar>(n: u32, params: &ParamVector<S>) -> Result<S> {
    let symbolic = build_full_symbolic(n)?;
    let m = symbolic.evaluate(params);
    let pi = stationary::solve_stationary_ordered(&m, |s| s.count_ones())?;
    Ok(weighted_drift(&pi, &symbolic.payoff_flip().row_sums(), params))
}

/// Closed form for three players with `p1 = p2`:
/// `(p1 (p0 + q3) - q3) / (p0 p1 + 2 p0 q3 + q1 q3)`.
pub fn mu_n3_closed<S: Scalar>(params: &ParamVector<S>) -> Result<S> {
    if !params.reflection_symmetric() {
        return Err(Error::Invalid("closed form requires p1 = p2".into()));
    }
    let [p0, p1, _, _] = params.coins.clone();
    let (q1, q3) = (params.q_coin(1), params.q_coin(3));
    let two = S::from_ratio(2, 1);
    let num = p1.clone() * (p0.clone() + q3.clone()) - q3.clone();
    let den = p0.clone() * p1 + two * p0 * q3.clone() + q1 * q3;
    Ok(num / den)
}

/// Mean and variance parameters of `S_n` for a chain with payoff matrix `w`:
/// `mu = pi P' 1` and
/// `sigma^2 = pi P'' 1 - mu^2 + 2 pi P' (Z - Pi) P' 1`, where `P' = P o W`,
/// `P'' = P o W o W` and `Z = (I - (P - Pi))^-1`.
pub fn markov_mean_variance<S: Scalar>(p: &Dense<S>, w: &Dense<S>, pi: &[S]) -> Result<(S, S)> {
    let n = pi.len();
    let mut drift = vec![S::zero(); n];
    let mut second = S::zero();
    let mut weighted = vec![S::zero(); n];
    for i in 0..n {
        for j in 0..n {
            if p[i][j].is_zero() || w[i][j].is_zero() {
                continue;
            }
            let pw = p[i][j].clone() * w[i][j].clone();
            drift[i] = drift[i].clone() + pw.clone();
            second = second + pi[i].clone() * pw.clone() * w[i][j].clone();
            weighted[j] = weighted[j].clone() + pi[i].clone() * pw;
        }
    }
    let mu = pi.iter().zip(&drift).fold(S::zero(), |a, (x, d)| a + x.clone() * d.clone());
    // (I - P + Pi) y = P' 1, so Z P' 1 = y and Pi P' 1 = mu 1.
    let system: Dense<S> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { S::one() } else { S::zero() };
                    id - p[i][j].clone() + pi[j].clone()
                })
                .collect()
        })
        .collect();
    let y = linalg::solve(system, drift)?;
    let u_y = weighted.iter().zip(&y).fold(S::zero(), |a, (u, v)| a + u.clone() * v.clone());
    let mu2 = mu.clone() * mu.clone();
    let two = S::from_ratio(2, 1);
    let sigma2 = second - mu2.clone() + two * (u_y - mu2);
    Ok((mu, sigma2))
}

/// The chain on `(configuration, next player)` pairs, where every transition
/// carries a payoff of exactly `+1` or `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedChain<S> {
    pub n: u32,
    /// State `(x, i)` has index `x * n + (i - 1)`.
    pub matrix: Dense<S>,
    pub payoffs: Dense<S>,
    /// `pi*(x, i) = pi(x) / n`.
    pub stationary: Vec<S>,
}

impl<S: Scalar> AugmentedChain<S> {
    pub fn index(&self, x: RingState, player: usize) -> usize {
        x.bits() as usize * self.n as usize + player - 1
    }

    pub fn mean_variance(&self) -> Result<(S, S)> {
        markov_mean_variance(&self.matrix, &self.payoffs, &self.stationary)
    }
}

pub fn build_augmented<S: Scalar>(n: u32, params: &ParamVector<S>) -> Result<AugmentedChain<S>> {
    if n > MAX_AUGMENTED_PLAYERS {
        return Err(Error::TooLarge {
            states: (n as usize) << n.min(31),
            limit: (MAX_AUGMENTED_PLAYERS as usize) << MAX_AUGMENTED_PLAYERS,
        });
    }
    if !params.is_interior() {
        return Err(Error::UnsupportedBoundary(params.boundary_case()));
    }
    let sym = if params.reflection_symmetric() { Symmetry::Dihedral } else { Symmetry::Cyclic };
    let reduced = ReducedChain::build(n, sym)?;
    let pi = stationary::lift_to_full(&reduced.stationary(params)?, &reduced.classes);

    let nn = n as usize;
    let size = nn << n;
    let inv_n = S::one() / S::from_ratio(n as i64, 1);
    let mut matrix = vec![vec![S::zero(); size]; size];
    let mut payoffs = vec![vec![S::zero(); size]; size];
    let mut stationary = vec![S::zero(); size];
    for bits in 0..1u32 << n {
        let x = RingState::from_raw(bits, n);
        for i in 1..=nn {
            let from = bits as usize * nn + i - 1;
            stationary[from] = pi.weights[bits as usize].clone() * inv_n.clone();
            let t = crate::chain::full_transition(x, i, params)?;
            for j in 1..=nn {
                let win = t.heads_state.bits() as usize * nn + j - 1;
                let loss = t.tails_state.bits() as usize * nn + j - 1;
                matrix[from][win] = t.heads_prob.clone() * inv_n.clone();
                payoffs[from][win] = S::one();
                matrix[from][loss] = t.tails_prob.clone() * inv_n.clone();
                payoffs[from][loss] = -S::one();
            }
        }
    }
    Ok(AugmentedChain { n, matrix, payoffs, stationary })
}

/// Transition matrix of three players when player `player` always plays.
pub fn forced_player_matrix<S: Scalar>(player: usize, params: &ParamVector<S>) -> Result<Dense<S>> {
    let mut m = vec![vec![S::zero(); 8]; 8];
    for bits in 0..8u32 {
        let t = crate::chain::full_transition(RingState::from_raw(bits, 3), player, params)?;
        let row = &mut m[bits as usize];
        let (h, l) = (t.heads_state.bits() as usize, t.tails_state.bits() as usize);
        row[h] = row[h].clone() + t.heads_prob;
        row[l] = row[l].clone() + t.tails_prob;
    }
    Ok(m)
}

/// Outcome of comparing the three-player game B with the sequential game
/// in which players 1, 2, 3 move in turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryCheck {
    /// `P = (P1 + P2 + P3) / 3`.
    pub average_matches: bool,
    /// `stationary(P) = stationary(P1 P2 P3)`.
    pub stationary_equal: bool,
}

impl HistoryCheck {
    pub fn holds(&self) -> bool {
        self.average_matches && self.stationary_equal
    }
}

pub fn history_equivalence_check<S: Scalar>(params: &ParamVector<S>) -> Result<HistoryCheck> {
    if !params.is_interior() {
        return Err(Error::UnsupportedBoundary(params.boundary_case()));
    }
    let forced: Vec<Dense<S>> =
        (1..=3).map(|i| forced_player_matrix(i, params)).collect::<Result<_>>()?;
    let p = crate::chain::build_full_chain(3, params)?;
    let third = S::from_ratio(1, 3);
    let average_matches = (0..8).all(|i| {
        (0..8).all(|j| {
            let avg = (forced[0][i][j].clone() + forced[1][i][j].clone() + forced[2][i][j].clone())
                * third.clone();
            let diff = avg - p.get(i, j);
            if S::EXACT {
                diff.is_zero()
            } else {
                diff.magnitude() < 1e-14
            }
        })
    });
    let product = linalg::matmul(&linalg::matmul(&forced[0], &forced[1]), &forced[2]);
    let pi = solve_stationary(&p)?;
    let pi_seq = solve_stationary(&crate::chain::SparseMatrix::from_dense(&product))?;
    let stationary_equal = if S::EXACT {
        pi == pi_seq
    } else {
        pi.iter().zip(&pi_seq).all(|(a, b)| (a.clone() - b.clone()).magnitude() < 1e-12)
    };
    Ok(HistoryCheck { average_matches, stationary_equal })
}
