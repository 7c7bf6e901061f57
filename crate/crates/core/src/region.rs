//! The Parrondo region in the `(p0, p1, p3)` cube.
//!
//! Throughout, `p = gamma = 1/2` and `p2 = p1`, so the dihedral lumping
//! applies and the mixture coins are `r_m = (1/2 + p_m) / 2`.

use num_rational::BigRational;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ParamVector, ReducedChain};
use crate::error::{Error, Result};
use crate::scalar::{rat, Scalar};
use crate::state_space::Symmetry;

/// Points scanned per p1 line when isolating interval endpoints.
pub const SCAN_POINTS: u32 = 1024;
/// Float rates closer to zero than this are recomputed exactly before a
/// sign decision.
pub const EXACT_FALLBACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubePoint {
    pub p0: f64,
    pub p1: f64,
    pub p3: f64,
}

impl CubePoint {
    pub fn new(p0: f64, p1: f64, p3: f64) -> Self {
        CubePoint { p0, p1, p3 }
    }

    pub fn is_interior(&self) -> bool {
        [self.p0, self.p1, self.p3].iter().all(|&x| x > 0.0 && x < 1.0)
    }

    pub fn params(&self) -> Result<ParamVector<f64>> {
        ParamVector::symmetric(self.p0, self.p1, self.p3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Parrondo,
    AntiParrondo,
    Neither,
}

impl Classification {
    pub fn mirror(self) -> Self {
        match self {
            Classification::Parrondo => Classification::AntiParrondo,
            Classification::AntiParrondo => Classification::Parrondo,
            Classification::Neither => Classification::Neither,
        }
    }

    fn from_signs(b: std::cmp::Ordering, c: std::cmp::Ordering) -> Self {
        use std::cmp::Ordering::*;
        match (b, c) {
            (Less | Equal, Greater) => Classification::Parrondo,
            (Greater | Equal, Less) => Classification::AntiParrondo,
            _ => Classification::Neither,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolumeMethod {
    Riemann,
    MonteCarlo,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionEstimate {
    pub volume: f64,
    pub method: VolumeMethod,
    pub grid_or_samples: u64,
    pub hits: u64,
    pub stderr: Option<f64>,
    pub seed: Option<u64>,
}

/// `(lower, upper]` in p1; `lower` is where `mu_C` crosses zero and `upper`
/// the largest p1 with `mu_B <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParrondoInterval {
    pub lower: f64,
    pub upper: f64,
    pub empty: bool,
}

impl ParrondoInterval {
    pub fn new(lower: f64, upper: f64) -> Self {
        ParrondoInterval { lower, upper, empty: lower >= upper }
    }

    pub fn empty() -> Self {
        ParrondoInterval { lower: f64::NAN, upper: f64::NAN, empty: true }
    }
}

/// `Lambda(p0, p1, p3) = (1 - p3, 1 - p1, 1 - p0)`.
pub fn symmetry_map(pt: CubePoint) -> CubePoint {
    CubePoint { p0: 1.0 - pt.p3, p1: 1.0 - pt.p1, p3: 1.0 - pt.p0 }
}

pub fn symmetry_map_exact(pt: &[BigRational; 3]) -> [BigRational; 3] {
    let one = rat(1, 1);
    [&one - &pt[2], &one - &pt[1], &one - &pt[0]]
}

/// Shares one lumped chain across all points of a scan.
#[derive(Debug, Clone)]
pub struct RegionScanner {
    chain: ReducedChain,
}

impl RegionScanner {
    pub fn new(n: u32) -> Result<Self> {
        Ok(RegionScanner { chain: ReducedChain::build(n, Symmetry::Dihedral)? })
    }

    pub fn n(&self) -> u32 {
        self.chain.n
    }

    pub fn chain(&self) -> &ReducedChain {
        &self.chain
    }

    /// `(mu_B, mu_C)` at `(p0, p1, p1, p3)`.
    pub fn means<S: Scalar>(&self, p0: S, p1: S, p3: S) -> Result<(S, S)> {
        let v = ParamVector::symmetric(p0, p1, p3)?;
        Ok((self.chain.mean_rate(&v)?, self.chain.mean_mixed(&v)?))
    }

    pub fn classify_exact(&self, pt: &[BigRational; 3]) -> Result<Classification> {
        let (b, c) = self.means(pt[0].clone(), pt[1].clone(), pt[2].clone())?;
        let zero = rat(0, 1);
        Ok(Classification::from_signs(b.cmp(&zero), c.cmp(&zero)))
    }

    /// Float classification with an exact recheck when either rate is
    /// within [`EXACT_FALLBACK`] of zero. `exact` supplies the rational
    /// coordinates of the point for that recheck.
    pub fn classify_with(
        &self,
        pt: CubePoint,
        exact: impl FnOnce() -> [BigRational; 3],
    ) -> Result<Classification> {
        if !pt.is_interior() {
            return Err(Error::Invalid(format!("point {pt:?} is not interior")));
        }
        let (b, c) = self.means(pt.p0, pt.p1, pt.p3)?;
        if b.abs() < EXACT_FALLBACK || c.abs() < EXACT_FALLBACK {
            return self.classify_exact(&exact());
        }
        Ok(Classification::from_signs(b.total_cmp(&0.0), c.total_cmp(&0.0)))
    }

    /// Classification of an interior point, exact-rechecking its binary
    /// value when a rate is near zero.
    pub fn classify(&self, pt: CubePoint) -> Result<Classification> {
        self.classify_with(pt, || {
            [pt.p0, pt.p1, pt.p3].map(<BigRational as Scalar>::from_f64)
        })
    }

    /// Classification at the cell center `((2i+1), (2j+1), (2k+1)) / (2 grid)`.
    pub fn classify_center(&self, grid: u32, i: u32, j: u32, k: u32) -> Result<Classification> {
        let den = 2 * grid as i64;
        let c = |a: u32| (2 * a as i64 + 1) as f64 / den as f64;
        let pt = CubePoint::new(c(i), c(j), c(k));
        self.classify_with(pt, || [i, j, k].map(|a| rat(2 * a as i64 + 1, den)))
    }

    pub fn volume_riemann(&self, grid: u32) -> Result<RegionEstimate> {
        if grid < 2 {
            return Err(Error::Invalid("grid must be at least 2".into()));
        }
        // Axis order (p0, p1, p3); the count is order independent.
        let hits: u64 = (0..grid * grid)
            .into_par_iter()
            .map(|ij| -> Result<u64> {
                let (i, j) = (ij / grid, ij % grid);
                let mut count = 0;
                for k in 0..grid {
                    if self.classify_center(grid, i, j, k)? == Classification::Parrondo {
                        count += 1;
                    }
                }
                Ok(count)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        let total = (grid as u64).pow(3);
        Ok(RegionEstimate {
            volume: hits as f64 / total as f64,
            method: VolumeMethod::Riemann,
            grid_or_samples: grid as u64,
            hits,
            stderr: None,
            seed: None,
        })
    }

    /// Classifies `samples` uniform points and, when `mirrored`, their
    /// Lambda images as well. Returns per-sample classifications in order.
    fn sample_classes(&self, samples: u64, seed: u64, mirrored: bool) -> Result<Vec<(Classification, Classification)>> {
        const CHUNK: u64 = 1 << 14;
        let chunks = samples.div_ceil(CHUNK);
        let per_chunk: Vec<Vec<(Classification, Classification)>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c);
                let len = CHUNK.min(samples - c * CHUNK);
                (0..len)
                    .map(|_| {
                        let pt = sample_point(&mut rng);
                        let own = self.classify(pt)?;
                        let img = if mirrored {
                            self.classify(symmetry_map(pt))?
                        } else {
                            Classification::Neither
                        };
                        Ok((own, img))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(per_chunk.into_iter().flatten().collect())
    }

    pub fn volume_monte_carlo(&self, samples: u64, seed: u64) -> Result<RegionEstimate> {
        if samples == 0 {
            return Err(Error::Invalid("samples must be at least 1".into()));
        }
        let hits = self
            .sample_classes(samples, seed, false)?
            .iter()
            .filter(|(c, _)| *c == Classification::Parrondo)
            .count() as u64;
        Ok(monte_carlo_estimate(hits, samples, seed))
    }

    /// Parrondo hits on the samples and anti-Parrondo hits on their Lambda
    /// images, from one sample set.
    pub fn mirrored_counts(&self, samples: u64, seed: u64) -> Result<(u64, u64)> {
        let classes = self.sample_classes(samples, seed, true)?;
        let parrondo = classes.iter().filter(|(c, _)| *c == Classification::Parrondo).count();
        let anti = classes.iter().filter(|(_, m)| *m == Classification::AntiParrondo).count();
        Ok((parrondo as u64, anti as u64))
    }

    pub fn parrondo_interval(&self, p0: f64, p3: f64, tol: f64) -> Result<ParrondoInterval> {
        let mu_b = |p1: f64| self.means(p0, p1, p3).map(|m| m.0);
        let mu_c = |p1: f64| self.means(p0, p1, p3).map(|m| m.1);
        let nonpos_b = sign_set(&mu_b, tol, "mu_B", false)?;
        let pos_c = sign_set(&mu_c, tol, "mu_C", true)?;
        let (Some(b), Some(c)) = (nonpos_b, pos_c) else {
            return Ok(ParrondoInterval::empty());
        };
        let lower = b.0.max(c.0);
        let upper = b.1.min(c.1);
        if lower >= upper {
            return Ok(ParrondoInterval::empty());
        }
        Ok(ParrondoInterval::new(lower, upper))
    }

    /// Row of `(p0, p3, p1, value)` at every cell center of a `grid^3` lattice.
    pub fn surface_grid(&self, grid: u32, which: Surface) -> Result<Vec<[f64; 4]>> {
        if grid < 2 {
            return Err(Error::Invalid("grid must be at least 2".into()));
        }
        let c = |a: u32| (2 * a + 1) as f64 / (2 * grid) as f64;
        let rows: Vec<Vec<[f64; 4]>> = (0..grid * grid)
            .into_par_iter()
            .map(|ik| {
                let (p0, p3) = (c(ik / grid), c(ik % grid));
                (0..grid)
                    .map(|j| {
                        let p1 = c(j);
                        let (b, m) = self.means(p0, p1, p3)?;
                        let v = match which {
                            Surface::MuB => b,
                            Surface::MuC => m,
                        };
                        Ok([p0, p3, p1, v])
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().flatten().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Surface {
    MuB,
    MuC,
}

impl std::str::FromStr for Surface {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mub" | "mu_b" | "b" => Ok(Surface::MuB),
            "muc" | "mu_c" | "c" => Ok(Surface::MuC),
            _ => Err(Error::Invalid(format!("unknown surface '{s}'"))),
        }
    }
}

fn sample_point(rng: &mut ChaCha8Rng) -> CubePoint {
    CubePoint::new(rng.sample(Open01), rng.sample(Open01), rng.sample(Open01))
}

fn monte_carlo_estimate(hits: u64, samples: u64, seed: u64) -> RegionEstimate {
    let v = hits as f64 / samples as f64;
    RegionEstimate {
        volume: v,
        method: VolumeMethod::MonteCarlo,
        grid_or_samples: samples,
        hits,
        stderr: Some((v * (1.0 - v) / samples as f64).sqrt()),
        seed: Some(seed),
    }
}

/// The sub-interval of `(0, 1)` where `f > 0` (if `positive`) or `f <= 0`,
/// assuming at most one sign change along the scan line.
fn sign_set(
    f: &dyn Fn(f64) -> Result<f64>,
    tol: f64,
    what: &'static str,
    positive: bool,
) -> Result<Option<(f64, f64)>> {
    let inside = |v: f64| if positive { v > 0.0 } else { v <= 0.0 };
    let xs: Vec<f64> = (1..SCAN_POINTS).map(|k| k as f64 / SCAN_POINTS as f64).collect();
    let flags: Vec<bool> = xs.iter().map(|&x| f(x).map(inside)).collect::<Result<_>>()?;
    let changes: Vec<usize> = (1..flags.len()).filter(|&i| flags[i] != flags[i - 1]).collect();
    match changes.as_slice() {
        [] => Ok(flags[0].then_some((0.0, 1.0))),
        [i] => {
            let (mut lo, mut hi) = (xs[i - 1], xs[*i]);
            let lo_in = flags[i - 1];
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if inside(f(mid)?) == lo_in {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            Ok(Some(if lo_in { (0.0, root) } else { (root, 1.0) }))
        }
        _ => Err(Error::NonMonotone { what, changes: changes.len() }),
    }
}

/// Classifies a single interior point.
pub fn classify_point(n: u32, pt: CubePoint) -> Result<Classification> {
    RegionScanner::new(n)?.classify(pt)
}

pub fn parrondo_interval(n: u32, p0: f64, p3: f64, tol: f64) -> Result<ParrondoInterval> {
    RegionScanner::new(n)?.parrondo_interval(p0, p3, tol)
}

pub fn volume_riemann(n: u32, grid: u32) -> Result<RegionEstimate> {
    RegionScanner::new(n)?.volume_riemann(grid)
}

pub fn volume_monte_carlo(n: u32, samples: u64, seed: u64) -> Result<RegionEstimate> {
    RegionScanner::new(n)?.volume_monte_carlo(samples, seed)
}

pub fn surface_grid(n: u32, grid: u32, which: Surface) -> Result<Vec<[f64; 4]>> {
    RegionScanner::new(n)?.surface_grid(grid, which)
}

/// Volume of the three-player region, `(9 ln 9 - 8 ln 8 - 3) / 8`.
pub fn exact_volume_n3() -> f64 {
    (9.0 * 9f64.ln() - 8.0 * 8f64.ln() - 3.0) / 8.0
}

pub fn exact_volume_estimate() -> RegionEstimate {
    RegionEstimate {
        volume: exact_volume_n3(),
        method: VolumeMethod::ClosedForm,
        grid_or_samples: 0,
        hits: 0,
        stderr: None,
        seed: None,
    }
}

/// Three players: `mu_C > 0` iff `p1 > (q0 + 3 q3) / (2 (1 + p0 + q3))` and
/// `mu_B <= 0` iff `p1 <= q3 / (p0 + q3)`.
pub fn interval_n3(p0: f64, p3: f64) -> ParrondoInterval {
    let (q0, q3) = (1.0 - p0, 1.0 - p3);
    let lower = (q0 + 3.0 * q3) / (2.0 * (1.0 + p0 + q3));
    let upper = q3 / (p0 + q3);
    if lower >= upper {
        ParrondoInterval::empty()
    } else {
        ParrondoInterval::new(lower, upper)
    }
}

/// Four players: the radical solutions of the two quadratic inequalities.
/// Empty unless `p0 + p3 < 1`. A negative discriminant in the `mu_B`
/// inequality means `mu_B <= 0` for every p1, so the upper end is 1.
pub fn boundary_n4(p0: f64, p3: f64) -> ParrondoInterval {
    if p0 + p3 >= 1.0 {
        return ParrondoInterval::empty();
    }
    let (q0, q3) = (1.0 - p0, 1.0 - p3);
    let a = q0 - p3;
    let f = (p0 * (3.0 * p0 - 2.0 * p3 - 2.0 * p0 * p3 + 2.0 * p3 * p3) - (3.0 + p3) * q3)
        / (2.0 * (q0 + p3));
    let b = (1.0 + p0) * q3;
    let disc = b * b + a * f;
    let upper = if disc >= 0.0 { ((b - disc.sqrt()) / a).min(1.0) } else { 1.0 };
    let g = 13.0 + 8.0 * p0 - 8.0 * p3 - 4.0 * p0 * p3;
    let h = (-48.0 + 14.0 * p0 + 30.0 * p3 + 13.0 * p0 * p0 - 8.0 * p0 * p3 + 3.0 * p3 * p3
        - 4.0 * p0 * p0 * p3
        + 4.0 * p0 * p3 * p3)
        / (1.0 + q0 + p3);
    let disc_c = g * g + 4.0 * a * h;
    let lower = if disc_c >= 0.0 { ((g - disc_c.sqrt()) / (4.0 * a)).max(0.0) } else { 0.0 };
    if lower >= upper {
        ParrondoInterval::empty()
    } else {
        ParrondoInterval::new(lower, upper)
    }
}

/// The fixed `(p0, p3)` lines and `p1` points of the published tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TablePreset {
    Toral,
    Boundary2,
    Interior,
}

impl TablePreset {
    pub const ALL: [TablePreset; 3] = [TablePreset::Toral, TablePreset::Boundary2, TablePreset::Interior];

    pub fn name(self) -> &'static str {
        match self {
            TablePreset::Toral => "toral",
            TablePreset::Boundary2 => "boundary2",
            TablePreset::Interior => "interior",
        }
    }

    /// `(p0, p1, p3)` as exact rationals.
    pub fn point(self) -> [BigRational; 3] {
        match self {
            TablePreset::Toral => [rat(1, 1), rat(4, 25), rat(7, 10)],
            TablePreset::Boundary2 => [rat(7, 10), rat(17, 25), rat(0, 1)],
            TablePreset::Interior => [rat(1, 10), rat(3, 5), rat(3, 4)],
        }
    }

    pub fn point_f64(self) -> CubePoint {
        let [a, b, c] = self.point().map(|x| Scalar::to_f64(&x));
        CubePoint::new(a, b, c)
    }

    pub fn params(self) -> ParamVector<BigRational> {
        let [p0, p1, p3] = self.point();
        ParamVector::symmetric(p0, p1, p3).expect("preset is valid")
    }
}

impl std::str::FromStr for TablePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TablePreset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown table '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub n: u32,
    pub interval: ParrondoInterval,
    pub mu_b: BigRational,
    pub mu_c: BigRational,
}

/// One table row: the p1-interval along the preset's line and the exact
/// rates at its point.
pub fn table_row(n: u32, preset: TablePreset, tol: f64) -> Result<TableRow> {
    let scanner = RegionScanner::new(n)?;
    let pt = preset.point_f64();
    let interval = scanner.parrondo_interval(pt.p0, pt.p3, tol)?;
    let [p0, p1, p3] = preset.point();
    let (mu_b, mu_c) = scanner.means(p0, p1, p3)?;
    Ok(TableRow { n, interval, mu_b, mu_c })
}
