//! Eigencurves of the reduced matrix over `theta in [0, pi)` and their
//! intersections.
//!
//! Eigenpairs are followed along the grid by maximal eigenvector overlap so
//! that a label names one continuous curve even where eigenvalues cross.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{FluidStack, Lattice};
use crate::dispersion::{assemble_reduced, eigen, EigenPairs};
use crate::error::{Error, Result};
use crate::numeric::dot;

/// Minimum number of grid points.
pub const MIN_GRID: usize = 64;
pub const DEFAULT_GRID: usize = 2048;

/// Tracked eigencurves for one wave vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedCurves {
    pub k: [f64; 2],
    /// Eigenpairs at each grid angle, ordered by label.
    pub pairs: Vec<EigenPairs>,
    /// Grid index where tracking started (labels there are ascending).
    pub start: usize,
    /// Label at `start` reached by following label `l` once around the
    /// period from `start`.
    pub closure: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigencurveScan {
    pub thetas: Vec<f64>,
    pub first: TrackedCurves,
    pub second: TrackedCurves,
}

impl EigencurveScan {
    pub fn grid_len(&self) -> usize {
        self.thetas.len()
    }

    /// Values `mu_l(k, theta_i)` for label `l` (zero-based) on curve set `which`.
    pub fn curve(&self, which: usize, label: usize) -> Vec<f64> {
        let c = if which == 0 { &self.first } else { &self.second };
        c.pairs.iter().map(|p| p.mu[label]).collect()
    }
}

/// Reorders `new` so that entry `l` continues entry `l` of `reference`, and
/// fixes eigenvector signs to keep overlaps positive.
pub fn match_labels(reference: &EigenPairs, new: &EigenPairs) -> EigenPairs {
    let n = new.mu.len();
    let mut overlap = vec![vec![0.0; n]; n];
    for (a, row) in overlap.iter_mut().enumerate() {
        for (b, o) in row.iter_mut().enumerate() {
            *o = dot(&reference.xi[a], &new.xi[b]).abs();
        }
    }
    let mut assigned = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for _ in 0..n {
        let mut best = (-1.0, 0, 0);
        for a in 0..n {
            if assigned[a] != usize::MAX {
                continue;
            }
            for b in 0..n {
                if !taken[b] && overlap[a][b] > best.0 {
                    best = (overlap[a][b], a, b);
                }
            }
        }
        assigned[best.1] = best.2;
        taken[best.2] = true;
    }
    let mut mu = Vec::with_capacity(n);
    let mut xi = Vec::with_capacity(n);
    for (a, &b) in assigned.iter().enumerate() {
        let mut v = new.xi[b].clone();
        if dot(&reference.xi[a], &v) < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        mu.push(new.mu[b]);
        xi.push(v);
    }
    EigenPairs { mu, xi }
}

fn spread(p: &EigenPairs) -> f64 {
    p.mu.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn track(fs: &FluidStack, k: [f64; 2], thetas: &[f64]) -> Result<TrackedCurves> {
    let raw: Vec<EigenPairs> = thetas
        .par_iter()
        .map(|&t| assemble_reduced(fs, t, k).map(|r| eigen(&r)))
        .collect::<Result<_>>()?;
    let n_grid = raw.len();
    let start = (0..n_grid)
        .max_by(|&a, &b| spread(&raw[a]).total_cmp(&spread(&raw[b])).then(b.cmp(&a)))
        .unwrap_or(0);
    let scale = spread(&raw[start]);
    let mut pairs = raw.clone();
    let mut reference = raw[start].clone();
    for step in 1..=n_grid {
        let i = (start + step) % n_grid;
        let matched = match_labels(&reference, &raw[i]);
        if step == n_grid {
            let closure = (0..matched.mu.len())
                .map(|l| {
                    let target = &matched.xi[l];
                    (0..raw[start].mu.len())
                        .max_by(|&a, &b| {
                            dot(&raw[start].xi[a], target)
                                .abs()
                                .total_cmp(&dot(&raw[start].xi[b], target).abs())
                        })
                        .unwrap_or(l)
                })
                .collect();
            return Ok(TrackedCurves { k, pairs, start, closure });
        }
        if spread(&raw[i]) > 1e-10 * scale {
            reference = matched.clone();
        }
        pairs[i] = matched;
    }
    unreachable!("loop returns on the final step")
}

/// Evaluates `R(theta, k)` on `grid` equally spaced angles in `[0, pi)` for
/// both lattice generators and tracks the eigencurves.
pub fn scan_eigencurves(fs: &FluidStack, lat: &Lattice, grid: usize) -> Result<EigencurveScan> {
    if grid < MIN_GRID {
        return Err(Error::Invalid(format!("scan grid must have at least {MIN_GRID} points")));
    }
    let thetas: Vec<f64> = (0..grid).map(|i| PI * i as f64 / grid as f64).collect();
    let first = track(fs, lat.k1, &thetas)?;
    let second = track(fs, lat.k2, &thetas)?;
    Ok(EigencurveScan { thetas, first, second })
}

/// A grid interval on which `mu_iota(k1) - mu_kappa(k2)` changes sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub iota: usize,
    pub kappa: usize,
    pub lo: f64,
    pub hi: f64,
    pub diff_lo: f64,
    pub diff_hi: f64,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    /// Set when the difference vanishes on a grid point without changing sign.
    pub touching: bool,
}

fn label_across(c: &TrackedCurves, from: usize, label: usize) -> usize {
    let n_grid = c.pairs.len();
    if (from + 1) % n_grid == c.start {
        c.closure[label]
    } else {
        label
    }
}

/// All sign changes of `mu_iota(k1, .) - mu_kappa(k2, .)`, for 1-based labels.
pub fn find_brackets(scan: &EigencurveScan, iota: usize, kappa: usize) -> Vec<Bracket> {
    let n_grid = scan.grid_len();
    let (i0, k0) = (iota - 1, kappa - 1);
    let diff = |i: usize, a: usize, b: usize| scan.first.pairs[i].mu[a] - scan.second.pairs[i].mu[b];
    let mut out = Vec::new();
    for i in 0..n_grid {
        let j = (i + 1) % n_grid;
        let a = label_across(&scan.first, i, i0);
        let b = label_across(&scan.second, i, k0);
        let d_lo = diff(i, i0, k0);
        let d_hi = diff(j, a, b);
        let lo = scan.thetas[i];
        let hi = if j == 0 { PI } else { scan.thetas[j] };
        let make = |touching: bool| Bracket {
            iota,
            kappa,
            lo,
            hi,
            diff_lo: d_lo,
            diff_hi: d_hi,
            xi1: scan.first.pairs[i].xi[i0].clone(),
            xi2: scan.second.pairs[i].xi[k0].clone(),
            touching,
        };
        if d_lo * d_hi < 0.0 {
            out.push(make(false));
        } else if d_lo == 0.0 {
            let p = (i + n_grid - 1) % n_grid;
            let d_prev = diff(p, i0, k0);
            out.push(make(d_prev * d_hi > 0.0));
        }
    }
    out
}

/// Eigenpair of `R(theta, k)` continuing `reference`: `(mu, xi, overlap)`.
pub fn tracked_eval(fs: &FluidStack, k: [f64; 2], theta: f64, reference: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
    let pairs = eigen(&assemble_reduced(fs, theta, k)?);
    let (best, ov) = (0..pairs.mu.len())
        .map(|l| (l, dot(&pairs.xi[l], reference)))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty spectrum");
    let mut v = pairs.xi[best].clone();
    if ov < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok((pairs.mu[best], v, ov.abs()))
}

/// Result of refining a bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedCrossing {
    pub theta: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub converged: bool,
}

/// Overlap below which the tracked eigenpair is considered lost.
const OVERLAP_FLOOR: f64 = 0.5;
const LOCAL_REFINE: usize = 8;

struct Probe {
    theta: f64,
    diff: f64,
    mu1: f64,
    mu2: f64,
    xi1: Vec<f64>,
    xi2: Vec<f64>,
}

fn probe(fs: &FluidStack, lat: &Lattice, theta: f64, r1: &[f64], r2: &[f64]) -> Result<(Probe, f64)> {
    let (mu1, xi1, o1) = tracked_eval(fs, lat.k1, theta, r1)?;
    let (mu2, xi2, o2) = tracked_eval(fs, lat.k2, theta, r2)?;
    Ok((Probe { theta, diff: mu1 - mu2, mu1, mu2, xi1, xi2 }, o1.min(o2)))
}

/// Locates the intersection inside `bracket` by bisection with a final
/// secant step, re-scanning at finer resolution when tracking is lost.
pub fn refine_crossing(fs: &FluidStack, lat: &Lattice, bracket: &Bracket) -> Result<RefinedCrossing> {
    refine_between(fs, lat, bracket.lo, bracket.hi, &bracket.xi1, &bracket.xi2, 0)
}

fn refine_between(
    fs: &FluidStack,
    lat: &Lattice,
    lo: f64,
    hi: f64,
    r1: &[f64],
    r2: &[f64],
    depth: usize,
) -> Result<RefinedCrossing> {
    let (mut a, _) = probe(fs, lat, lo, r1, r2)?;
    if lo == hi || a.diff == 0.0 {
        return Ok(finish(a, true));
    }
    let (mut b, ob) = probe(fs, lat, hi, &a.xi1, &a.xi2)?;
    if ob < OVERLAP_FLOOR || a.diff * b.diff > 0.0 {
        return local_rescan(fs, lat, lo, hi, r1, r2, depth);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a.theta + b.theta);
        if mid <= a.theta || mid >= b.theta {
            break;
        }
        let (m, om) = probe(fs, lat, mid, &a.xi1, &a.xi2)?;
        if om < OVERLAP_FLOOR {
            return local_rescan(fs, lat, a.theta, b.theta, &a.xi1, &a.xi2, depth);
        }
        let scale = 1.0 + m.mu1.abs();
        if m.diff == 0.0 {
            return Ok(finish(m, true));
        }
        if m.diff * a.diff < 0.0 {
            b = m;
        } else {
            a = m;
        }
        if a.diff.abs().min(b.diff.abs()) < 1e-15 * scale {
            break;
        }
    }
    let secant = a.theta - a.diff * (b.theta - a.theta) / (b.diff - a.diff);
    let mut best = if a.diff.abs() <= b.diff.abs() { a } else { b };
    if secant.is_finite() {
        let (s, os) = probe(fs, lat, secant, &best.xi1, &best.xi2)?;
        if os >= OVERLAP_FLOOR && s.diff.abs() < best.diff.abs() {
            best = s;
        }
    }
    let converged = best.diff.abs() < 1e-12 * (1.0 + best.mu1.abs());
    Ok(finish(best, converged))
}

fn local_rescan(
    fs: &FluidStack,
    lat: &Lattice,
    lo: f64,
    hi: f64,
    r1: &[f64],
    r2: &[f64],
    depth: usize,
) -> Result<RefinedCrossing> {
    if depth >= 4 {
        return Err(Error::Numerical("eigencurve bracket lost during refinement".into()));
    }
    let mut prev = probe(fs, lat, lo, r1, r2)?.0;
    for s in 1..=LOCAL_REFINE {
        let t = lo + (hi - lo) * s as f64 / LOCAL_REFINE as f64;
        let (cur, _) = probe(fs, lat, t, &prev.xi1, &prev.xi2)?;
        if prev.diff * cur.diff <= 0.0 {
            return refine_between(fs, lat, prev.theta, cur.theta, &prev.xi1, &prev.xi2, depth + 1);
        }
        prev = cur;
    }
    Err(Error::Numerical("eigencurve bracket lost during refinement".into()))
}

fn finish(p: Probe, converged: bool) -> RefinedCrossing {
    RefinedCrossing {
        theta: p.theta.rem_euclid(PI),
        mu1: p.mu1,
        mu2: p.mu2,
        xi1: p.xi1,
        xi2: p.xi2,
        converged,
    }
}
