//! Monte Carlo play, the complement coupling, and absorption in the
//! `p0 = 0, p3 = 1` corner.
//!
//! Every turn consumes exactly three draws from one ChaCha8 stream, in this
//! order: the player, the A-or-B choice, and the coin. Game A and game B use
//! the same layout so traces with equal seeds are comparable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{BoundaryCase, ParamVector, ReducedChain};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use crate::state_space::{EquivClass, RingState, Symmetry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GameSpec {
    A,
    B,
    /// Game A with probability `gamma`, otherwise game B, decided each turn.
    MixedC(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfitTrace {
    pub increments: Vec<i8>,
    pub sums: Vec<i64>,
    pub turns: u64,
    pub seed: u64,
    pub game: GameSpec,
    pub initial: RingState,
    pub final_state: RingState,
}

impl ProfitTrace {
    pub fn total(&self) -> i64 {
        self.sums.last().copied().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.total() as f64 / self.turns as f64
    }

    /// `sqrt(s^2 / n)` from the sample variance of the increments. This
    /// ignores serial correlation, so it is a rough scale only.
    pub fn sample_stderr(&self) -> f64 {
        let n = self.turns as f64;
        if self.turns < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.increments.iter().map(|&x| (x as f64 - m).powi(2)).sum();
        (ss / (n - 1.0) / n).sqrt()
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_state(rng: &mut ChaCha8Rng, n: u32) -> RingState {
    let mut bits = 0u32;
    for _ in 0..n {
        bits = (bits << 1) | rng.random::<bool>() as u32;
    }
    RingState::from_raw(bits, n)
}

struct Turn {
    player: usize,
    play_a: bool,
    u: f64,
}

fn draw_turn(rng: &mut ChaCha8Rng, n: u32, game: GameSpec) -> Turn {
    let player = rng.random_range(1..=n as usize);
    let choice: f64 = rng.random();
    let u: f64 = rng.random();
    let play_a = match game {
        GameSpec::A => true,
        GameSpec::B => false,
        GameSpec::MixedC(gamma) => choice < gamma,
    };
    Turn { player, play_a, u }
}

fn win_prob(x: RingState, t: &Turn, params: &ParamVector<f64>) -> f64 {
    if t.play_a {
        params.p
    } else {
        *params.p_coin(x.neighbor_code(t.player))
    }
}

fn check_setup(n: u32, params: &ParamVector<f64>, game: GameSpec, turns: u64, initial: Option<RingState>) -> Result<()> {
    RingState::zeros(n)?;
    params.validate()?;
    if turns == 0 {
        return Err(Error::Invalid("turns must be at least 1".into()));
    }
    if let GameSpec::MixedC(g) = game {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::Probability { name: "gamma", value: g });
        }
    }
    if let Some(x) = initial {
        if x.n() != n {
            return Err(Error::Invalid(format!("initial state {x} does not have {n} players")));
        }
    }
    Ok(())
}

/// Plays `turns` rounds. Without `initial`, each player's status is a fair
/// coin toss drawn from the same stream before the first turn.
pub fn simulate(
    n: u32,
    params: &ParamVector<f64>,
    game: GameSpec,
    turns: u64,
    seed: u64,
    initial: Option<RingState>,
) -> Result<ProfitTrace> {
    simulate_stream(n, params, game, turns, seed, 0, initial)
}

fn simulate_stream(
    n: u32,
    params: &ParamVector<f64>,
    game: GameSpec,
    turns: u64,
    seed: u64,
    stream: u64,
    initial: Option<RingState>,
) -> Result<ProfitTrace> {
    check_setup(n, params, game, turns, initial)?;
    let mut rng = rng_for(seed, stream);
    let start = initial.unwrap_or_else(|| random_state(&mut rng, n));
    let mut x = start;
    let mut increments = Vec::with_capacity(turns as usize);
    let mut sums = Vec::with_capacity(turns as usize);
    let mut s = 0i64;
    for _ in 0..turns {
        let t = draw_turn(&mut rng, n, game);
        let heads = t.u < win_prob(x, &t, params);
        x = x.set(t.player, heads);
        let xi = if heads { 1 } else { -1 };
        s += xi as i64;
        increments.push(xi);
        sums.push(s);
    }
    Ok(ProfitTrace { increments, sums, turns, seed, game, initial: start, final_state: x })
}

/// Independent replications on streams `1..=reps` of `seed`.
pub fn replicate(
    n: u32,
    params: &ParamVector<f64>,
    game: GameSpec,
    turns: u64,
    seed: u64,
    reps: u64,
) -> Result<Vec<ProfitTrace>> {
    (1..=reps)
        .into_par_iter()
        .map(|r| simulate_stream(n, params, game, turns, seed, r, None))
        .collect()
}

/// Runs game B alongside its mirror: the second process starts at the
/// complement of the first, plays with coins `(q3, q2, q1, q0)`, and sees
/// the complement of every coin outcome. Then `X'(k)` is the complement of
/// `X(k)` and `S'_k = -S_k` on every path.
pub fn coupled_simulate(
    n: u32,
    params: &ParamVector<f64>,
    turns: u64,
    seed: u64,
    initial: Option<RingState>,
) -> Result<(ProfitTrace, ProfitTrace)> {
    let game = GameSpec::B;
    check_setup(n, params, game, turns, initial)?;
    let mirror = params.complemented();
    let mut rng = rng_for(seed, 0);
    let start = initial.unwrap_or_else(|| random_state(&mut rng, n));
    let (mut x, mut y) = (start, start.complement());
    let mut a = (Vec::with_capacity(turns as usize), Vec::with_capacity(turns as usize), 0i64);
    let mut b = (Vec::with_capacity(turns as usize), Vec::with_capacity(turns as usize), 0i64);
    for _ in 0..turns {
        let t = draw_turn(&mut rng, n, game);
        let heads = t.u < win_prob(x, &t, params);
        // The mirrored coin has win probability q_m in the mirrored state;
        // coupling it to the complement of the original outcome keeps that
        // marginal while making the two paths exact complements.
        debug_assert!((win_prob(y, &t, &mirror) - (1.0 - win_prob(x, &t, params))).abs() < 1e-12);
        let mirrored_heads = !heads;
        x = x.set(t.player, heads);
        y = y.set(t.player, mirrored_heads);
        for (trace, h) in [(&mut a, heads), (&mut b, mirrored_heads)] {
            let xi: i8 = if h { 1 } else { -1 };
            trace.2 += xi as i64;
            trace.0.push(xi);
            trace.1.push(trace.2);
        }
    }
    debug_assert_eq!(x.complement(), y);
    let first = ProfitTrace { increments: a.0, sums: a.1, turns, seed, game, initial: start, final_state: x };
    let second = ProfitTrace {
        increments: b.0,
        sums: b.1,
        turns,
        seed,
        game,
        initial: start.complement(),
        final_state: y,
    };
    Ok((first, second))
}

/// The constant rate of a reducible corner, returned without a solve:
/// `-1` in Case 2, `+1` in Case 4, `0` in Case 5 with an even ring.
pub fn reducible_mu<S: Scalar>(n: u32, params: &ParamVector<S>) -> Result<S> {
    match params.boundary_case() {
        BoundaryCase::Case2 => Ok(-S::one()),
        BoundaryCase::Case4 => Ok(S::one()),
        BoundaryCase::Case5 if n % 2 == 0 => Ok(S::zero()),
        c => Err(Error::UnsupportedBoundary(c)),
    }
}

/// Largest ring for the exact absorption solve.
pub const MAX_ABSORPTION_PLAYERS: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionReport<S = f64> {
    pub initial_class: EquivClass,
    pub prob_absorb_at_ones: S,
    /// `2 prob - 1`: after absorption every turn pays `+1` at all-ones and
    /// `-1` at all-zeros.
    pub mu_b: S,
}

fn require_case6<S: Scalar>(n: u32, params: &ParamVector<S>) -> Result<()> {
    if params.boundary_case() != BoundaryCase::Case6 {
        return Err(Error::UnsupportedBoundary(params.boundary_case()));
    }
    if n > MAX_ABSORPTION_PLAYERS {
        return Err(Error::TooLarge {
            states: 1 << n.min(31),
            limit: 1 << MAX_ABSORPTION_PLAYERS,
        });
    }
    Ok(())
}

/// Probability of absorption at all-ones from every class, solved on the
/// lumped chain (both absorbing states are singleton classes).
pub fn absorption_probabilities<S: Scalar>(n: u32, params: &ParamVector<S>) -> Result<Vec<(EquivClass, S)>> {
    require_case6(n, params)?;
    let sym = if params.reflection_symmetric() { Symmetry::Dihedral } else { Symmetry::Cyclic };
    let chain = ReducedChain::build(n, sym)?;
    let m = chain.evaluate(params)?;
    let zero = chain.class_of(RingState::zeros(n)?).expect("all-zeros class");
    let one = chain.class_of(RingState::ones(n)?).expect("all-ones class");
    let transient: Vec<usize> = (0..chain.len()).filter(|&c| c != zero && c != one).collect();
    let mut pos = vec![usize::MAX; chain.len()];
    for (k, &c) in transient.iter().enumerate() {
        pos[c] = k;
    }
    // (I - Q) h = r with r the one-step probability of entering all-ones.
    let k = transient.len();
    let mut a = vec![vec![S::zero(); k]; k];
    let mut r = vec![S::zero(); k];
    for (i, &c) in transient.iter().enumerate() {
        a[i][i] = S::one();
        for (j, v) in &m.rows[c] {
            if *j == one {
                r[i] = r[i].clone() + v.clone();
            } else if pos[*j] != usize::MAX {
                let col = pos[*j];
                a[i][col] = a[i][col].clone() - v.clone();
            }
        }
    }
    let h = linalg::solve(a, r)?;
    let mut out = Vec::with_capacity(chain.len());
    for (c, class) in chain.classes.iter().enumerate() {
        let p = if c == one {
            S::one()
        } else if c == zero {
            S::zero()
        } else {
            h[pos[c]].clone()
        };
        out.push((class.clone(), p));
    }
    Ok(out)
}

pub fn absorption_analysis<S: Scalar>(
    n: u32,
    params: &ParamVector<S>,
    initial: RingState,
) -> Result<AbsorptionReport<S>> {
    if initial.n() != n {
        return Err(Error::Invalid(format!("initial state {initial} does not have {n} players")));
    }
    let canonical = crate::state_space::canonical_form(
        initial,
        if params.reflection_symmetric() { Symmetry::Dihedral } else { Symmetry::Cyclic },
    );
    let (class, prob) = absorption_probabilities(n, params)?
        .into_iter()
        .find(|(c, _)| c.canonical == canonical)
        .expect("every state has a class");
    let mu_b = S::from_ratio(2, 1) * prob.clone() - S::one();
    Ok(AbsorptionReport { initial_class: class, prob_absorb_at_ones: prob, mu_b })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionEstimate {
    pub hits: u64,
    pub replications: u64,
    pub prob: f64,
    pub stderr: f64,
    /// Longest run observed before absorption.
    pub max_turns: u64,
}

/// Plays game B from `initial` until it reaches all-zeros or all-ones, on
/// `replications` independent streams, and counts absorptions at all-ones.
pub fn simulate_absorption(
    n: u32,
    params: &ParamVector<f64>,
    initial: RingState,
    replications: u64,
    seed: u64,
) -> Result<AbsorptionEstimate> {
    require_case6(n, params)?;
    check_setup(n, params, GameSpec::B, 1, Some(initial))?;
    let ones = RingState::ones(n)?;
    let zeros = RingState::zeros(n)?;
    let runs: Vec<(bool, u64)> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, r);
            let mut x = initial;
            let mut steps = 0u64;
            while x != ones && x != zeros {
                let t = draw_turn(&mut rng, n, GameSpec::B);
                x = x.set(t.player, t.u < win_prob(x, &t, params));
                steps += 1;
            }
            (x == ones, steps)
        })
        .collect();
    let hits = runs.iter().filter(|r| r.0).count() as u64;
    let prob = hits as f64 / replications.max(1) as f64;
    Ok(AbsorptionEstimate {
        hits,
        replications,
        prob,
        stderr: (prob * (1.0 - prob) / replications.max(1) as f64).sqrt(),
        max_turns: runs.iter().map(|r| r.1).max().unwrap_or(0),
    })
}
