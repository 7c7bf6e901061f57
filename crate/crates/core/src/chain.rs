//! Transition matrices of the ring chain, full and lumped.
//!
//! Entries are stored symbolically as integer combinations of the eight
//! symbols `p0..p3, q0..q3` over the common denominator `n`, with `p` and `q`
//! terms never merged. That keeps the payoff sign flip (`q_m -> -q_m`)
//! meaningful, and lets one build serve any number of numeric evaluations.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state_space::{
    canonical_form, canonical_states, check_ring_size, EquivClass, RingState, Symmetry,
};

/// Largest ring for which the full `2^n`-state chain is built.
pub const MAX_FULL_PLAYERS: u32 = 20;

/// Game parameters: the game-A coin `p`, the four game-B coins indexed by the
/// neighbor code, and the weight `gamma` of game A in the mixture C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector<S = f64> {
    pub p: S,
    pub coins: [S; 4],
    pub gamma: S,
}

impl<S: Scalar> ParamVector<S> {
    /// Game-B coins with the standing defaults `p = 1/2`, `gamma = 1/2`.
    pub fn new(p0: S, p1: S, p2: S, p3: S) -> Result<Self> {
        let half = S::from_ratio(1, 2);
        Self::with_mixture(p0, p1, p2, p3, half.clone(), half)
    }

    pub fn with_mixture(p0: S, p1: S, p2: S, p3: S, p: S, gamma: S) -> Result<Self> {
        let v = Self { p, coins: [p0, p1, p2, p3], gamma };
        v.validate()?;
        Ok(v)
    }

    /// The cube parametrisation `(p0, p1, p1, p3)`.
    pub fn symmetric(p0: S, p1: S, p3: S) -> Result<Self> {
        Self::new(p0, p1.clone(), p1, p3)
    }

    pub fn validate(&self) -> Result<()> {
        const NAMES: [&str; 6] = ["p0", "p1", "p2", "p3", "p", "gamma"];
        let values = self.coins.iter().chain([&self.p, &self.gamma]);
        for (name, v) in NAMES.iter().zip(values) {
            if *v < S::zero() || *v > S::one() {
                return Err(Error::Probability { name, value: v.to_f64() });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn p_coin(&self, m: usize) -> &S {
        &self.coins[m]
    }

    #[inline]
    pub fn q_coin(&self, m: usize) -> S {
        S::one() - self.coins[m].clone()
    }

    /// Coins of the mixture C: `r_m = gamma p + (1 - gamma) p_m`.
    pub fn mixed(&self) -> Self {
        let g = self.gamma.clone();
        let coins = self
            .coins
            .clone()
            .map(|pm| g.clone() * self.p.clone() + (S::one() - g.clone()) * pm);
        Self { p: self.p.clone(), coins, gamma: self.gamma.clone() }
    }

    /// Game A alone is game B with all four coins equal to `p`.
    pub fn game_a(&self) -> Self {
        Self { p: self.p.clone(), coins: std::array::from_fn(|_| self.p.clone()), gamma: self.gamma.clone() }
    }

    /// `(q3, q2, q1, q0)`: the parameters seen by the complemented ring.
    pub fn complemented(&self) -> Self {
        let coins = [self.q_coin(3), self.q_coin(2), self.q_coin(1), self.q_coin(0)];
        Self { p: S::one() - self.p.clone(), coins, gamma: self.gamma.clone() }
    }

    pub fn is_interior(&self) -> bool {
        self.coins.iter().all(|c| *c > S::zero() && *c < S::one())
    }

    pub fn reflection_symmetric(&self) -> bool {
        self.coins[1] == self.coins[2]
    }

    pub fn boundary_case(&self) -> BoundaryCase {
        classify_boundary(self)
    }

    pub fn to_f64(&self) -> ParamVector<f64> {
        ParamVector {
            p: self.p.to_f64(),
            coins: self.coins.clone().map(|c| c.to_f64()),
            gamma: self.gamma.to_f64(),
        }
    }
}

/// Which reducible regime a parameter vector falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCase {
    /// `0 < p_m < 1` for all four coins.
    Interior,
    /// `p0 = 1`: the all-losers state is unreachable.
    Case1,
    /// `p0 = 0`: the all-losers state absorbs, `mu_B = -1`.
    Case2,
    /// `p3 = 0`: the all-winners state is unreachable.
    Case3,
    /// `p3 = 1`: the all-winners state absorbs, `mu_B = +1`.
    Case4,
    /// `p0 = 1`, `p3 = 0`.
    Case5,
    /// `p0 = 0`, `p3 = 1`: two absorbing states.
    Case6,
    Unsupported,
}

pub fn classify_boundary<S: Scalar>(params: &ParamVector<S>) -> BoundaryCase {
    let inside = |x: &S| *x > S::zero() && *x < S::one();
    let [p0, p1, p2, p3] = &params.coins;
    if !(inside(p1) && inside(p2)) {
        return BoundaryCase::Unsupported;
    }
    let end = |x: &S| {
        if inside(x) {
            Some(None)
        } else if x.is_zero() {
            Some(Some(false))
        } else if x.is_one() {
            Some(Some(true))
        } else {
            None
        }
    };
    match (end(p0), end(p3)) {
        (Some(None), Some(None)) => BoundaryCase::Interior,
        (Some(Some(true)), Some(None)) => BoundaryCase::Case1,
        (Some(Some(false)), Some(None)) => BoundaryCase::Case2,
        (Some(None), Some(Some(false))) => BoundaryCase::Case3,
        (Some(None), Some(Some(true))) => BoundaryCase::Case4,
        (Some(Some(true)), Some(Some(false))) => BoundaryCase::Case5,
        (Some(Some(false)), Some(Some(true))) => BoundaryCase::Case6,
        _ => BoundaryCase::Unsupported,
    }
}

/// Outcome of one turn by a given player, conditioned on that player being
/// chosen. Heads is always a win (+1, status 1) and tails a loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub heads_prob: S,
    pub tails_prob: S,
    pub heads_state: RingState,
    pub tails_state: RingState,
}

pub fn full_transition<S: Scalar>(
    x: RingState,
    player: usize,
    params: &ParamVector<S>,
) -> Result<Transition<S>> {
    if player == 0 || player > x.n() as usize {
        return Err(Error::PlayerIndex { index: player, n: x.n() });
    }
    let m = x.neighbor_code(player);
    Ok(Transition {
        heads_prob: params.p_coin(m).clone(),
        tails_prob: params.q_coin(m),
        heads_state: x.set(player, true),
        tails_state: x.set(player, false),
    })
}

pub const SYMBOLS: [&str; 8] = ["p0", "p1", "p2", "p3", "q0", "q1", "q2", "q3"];

/// `(1/den) * sum_k coeffs[k] * SYMBOLS[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoefEntry {
    pub coeffs: [i32; 8],
    pub den: u32,
}

impl CoefEntry {
    pub fn zero(den: u32) -> Self {
        Self { coeffs: [0; 8], den }
    }

    pub fn p(m: usize, den: u32) -> Self {
        let mut e = Self::zero(den);
        e.coeffs[m] = 1;
        e
    }

    pub fn q(m: usize, den: u32) -> Self {
        let mut e = Self::zero(den);
        e.coeffs[4 + m] = 1;
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add_assign(&mut self, other: &CoefEntry) {
        debug_assert_eq!(self.den, other.den);
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs) {
            *a += b;
        }
    }

    /// Value with `q_m := 1 - p_m`.
    pub fn eval<S: Scalar>(&self, params: &ParamVector<S>) -> S {
        let mut acc = S::zero();
        for m in 0..4 {
            let (cp, cq) = (self.coeffs[m], self.coeffs[4 + m]);
            if cp != 0 {
                acc = acc + S::from_ratio(cp as i64, 1) * params.p_coin(m).clone();
            }
            if cq != 0 {
                acc = acc + S::from_ratio(cq as i64, 1) * params.q_coin(m);
            }
        }
        acc / S::from_ratio(self.den as i64, 1)
    }

    /// The payoff-weighted entry: every `q_m` term changes sign.
    pub fn flipped(&self) -> Self {
        let mut e = *self;
        for c in &mut e.coeffs[4..] {
            *c = -*c;
        }
        e
    }
}

impl fmt::Display for CoefEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut body = String::new();
        for (c, name) in self.coeffs.iter().zip(SYMBOLS) {
            match *c {
                0 => continue,
                1 if body.is_empty() => body.push_str(name),
                1 => body.push_str(&format!("+{name}")),
                -1 => body.push_str(&format!("-{name}")),
                c if c > 0 && !body.is_empty() => body.push_str(&format!("+{c}{name}")),
                c => body.push_str(&format!("{c}{name}")),
            }
        }
        write!(f, "({body})/{}", self.den)
    }
}

/// Sparse symbolic matrix; each row is sorted by column and holds no zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefMatrix {
    pub rows: Vec<Vec<(usize, CoefEntry)>>,
}

impl CoefMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&CoefEntry> {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |(c, _)| *c).ok().map(|k| &row[k].1)
    }

    pub fn evaluate<S: Scalar>(&self, params: &ParamVector<S>) -> SparseMatrix<S> {
        SparseMatrix {
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(j, e)| (*j, e.eval(params))).collect())
                .collect(),
        }
    }

    /// `q_m -> -q_m` applied entrywise before any simplification.
    pub fn payoff_flip(&self) -> CoefMatrix {
        CoefMatrix {
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(j, e)| (*j, e.flipped())).collect())
                .collect(),
        }
    }

    /// Symbolic row sums.
    pub fn row_sums(&self) -> Vec<CoefEntry> {
        self.rows
            .iter()
            .map(|row| {
                let mut acc = CoefEntry::zero(row.first().map_or(1, |(_, e)| e.den));
                for (_, e) in row {
                    acc.add_assign(e);
                }
                acc
            })
            .collect()
    }
}

fn push_entry(row: &mut HashMap<usize, CoefEntry>, col: usize, e: CoefEntry) {
    row.entry(col).or_insert_with(|| CoefEntry::zero(e.den)).add_assign(&e);
}

fn finish_row(row: HashMap<usize, CoefEntry>) -> Vec<(usize, CoefEntry)> {
    let mut v: Vec<_> = row.into_iter().filter(|(_, e)| !e.is_zero()).collect();
    v.sort_unstable_by_key(|(j, _)| *j);
    v
}

/// Symbolic row of `x`: for every player, the heads and tails destinations.
fn symbolic_moves(x: RingState) -> impl Iterator<Item = (RingState, CoefEntry)> {
    let n = x.n();
    (1..=n as usize).flat_map(move |i| {
        let m = x.neighbor_code(i);
        let heads = (x.set(i, true), CoefEntry::p(m, n));
        let tails = (x.set(i, false), CoefEntry::q(m, n));
        [heads, tails]
    })
}

/// The `2^n`-state chain in symbolic form; state index = integer value.
pub fn build_full_symbolic(n: u32) -> Result<CoefMatrix> {
    check_ring_size(n)?;
    if n > MAX_FULL_PLAYERS {
        return Err(Error::TooLarge { states: 1 << n.min(31), limit: 1 << MAX_FULL_PLAYERS });
    }
    let rows = (0..1u32 << n)
        .map(|b| {
            let mut row = HashMap::new();
            for (y, e) in symbolic_moves(RingState::from_raw(b, n)) {
                push_entry(&mut row, y.bits() as usize, e);
            }
            finish_row(row)
        })
        .collect();
    Ok(CoefMatrix { rows })
}

/// Evaluated full chain. Rejects parameter vectors outside the known
/// boundary regimes.
pub fn build_full_chain<S: Scalar>(n: u32, params: &ParamVector<S>) -> Result<SparseMatrix<S>> {
    if params.boundary_case() == BoundaryCase::Unsupported {
        return Err(Error::UnsupportedBoundary(BoundaryCase::Unsupported));
    }
    Ok(build_full_symbolic(n)?.evaluate(params))
}

/// The lumped chain over orbits, built once per `(n, symmetry)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedChain {
    pub n: u32,
    pub symmetry: Symmetry,
    pub classes: Vec<EquivClass>,
    pub matrix: CoefMatrix,
    #[serde(skip)]
    index: HashMap<u32, usize>,
}

impl ReducedChain {
    pub fn build(n: u32, symmetry: Symmetry) -> Result<Self> {
        let reps = canonical_states(n, symmetry)?;
        let index: HashMap<u32, usize> =
            reps.iter().enumerate().map(|(k, x)| (x.bits(), k)).collect();
        let rows = reps
            .iter()
            .map(|&x| {
                let mut row = HashMap::new();
                for (y, e) in symbolic_moves(x) {
                    push_entry(&mut row, index[&canonical_form(y, symmetry).bits()], e);
                }
                finish_row(row)
            })
            .collect();
        let classes = reps.into_iter().map(|x| EquivClass::of(x, symmetry)).collect();
        Ok(Self { n, symmetry, classes, matrix: CoefMatrix { rows }, index })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Index of the class containing `x`.
    pub fn class_of(&self, x: RingState) -> Option<usize> {
        if x.n() != self.n {
            return None;
        }
        let c = canonical_form(x, self.symmetry).bits();
        match self.index.get(&c) {
            Some(&k) => Some(k),
            None => self.classes.binary_search_by_key(&c, |cl| cl.canonical.bits()).ok(),
        }
    }

    pub fn entry(&self, from: RingState, to: RingState) -> CoefEntry {
        match (self.class_of(from), self.class_of(to)) {
            (Some(i), Some(j)) => self.matrix.get(i, j).copied().unwrap_or(CoefEntry::zero(self.n)),
            _ => CoefEntry::zero(self.n),
        }
    }

    pub fn check_params<S: Scalar>(&self, params: &ParamVector<S>) -> Result<()> {
        if self.symmetry == Symmetry::Dihedral && !params.reflection_symmetric() {
            return Err(Error::DihedralAsymmetric);
        }
        Ok(())
    }

    pub fn evaluate<S: Scalar>(&self, params: &ParamVector<S>) -> Result<SparseMatrix<S>> {
        self.check_params(params)?;
        Ok(self.matrix.evaluate(params))
    }

    /// Symbolic payoff-weighted matrix.
    pub fn payoff_flip(&self) -> CoefMatrix {
        self.matrix.payoff_flip()
    }

    /// Expected payoff of one turn from each class, symbolically:
    /// `(1/n) sum_i (p_{m_i} - q_{m_i})`.
    pub fn drift(&self) -> Vec<CoefEntry> {
        self.payoff_flip().row_sums()
    }
}

/// Row-major sparse numeric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<S> {
    pub rows: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.rows[i].iter().find(|(c, _)| *c == j).map_or_else(S::zero, |(_, v)| v.clone())
    }

    pub fn from_dense(dense: &[Vec<S>]) -> Self {
        Self {
            rows: dense
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(j, v)| (j, v.clone()))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let n = self.dim();
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![S::zero(); n];
                for (j, v) in row {
                    d[*j] = d[*j].clone() + v.clone();
                }
                d
            })
            .collect()
    }

    pub fn row_sums(&self) -> Vec<S> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(S::zero(), |a, (_, v)| a + v.clone()))
            .collect()
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            if v[i].is_zero() {
                continue;
            }
            for (j, p) in row {
                out[*j] = out[*j].clone() + v[i].clone() * p.clone();
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn right_mul(&self, v: &[S]) -> Vec<S> {
        self.rows
            .iter()
            .map(|row| row.iter().fold(S::zero(), |a, (j, p)| a + p.clone() * v[*j].clone()))
            .collect()
    }
}
