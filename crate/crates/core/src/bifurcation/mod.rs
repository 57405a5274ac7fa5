//! Bifurcation points of the linearised problem.
//!
//! A point is a flow `tau* = (r*, theta*)` at which `A(tau*, k1)` and
//! `A(tau*, k2)` are both singular. Points are found where the eigencurves
//! `mu_iota(k1, theta)` and `mu_kappa(k2, theta)` of the reduced matrix
//! intersect at a negative value, then validated, optionally rescued by a
//! small change of the surface tensions, and continued in the vorticity.

pub mod continuation;
pub mod isolation;
pub mod point;
pub mod rescue;
pub mod scan;
pub mod two_layer;

use serde::{Deserialize, Serialize};

use crate::config::{check_non_resonance, FluidStack, Lattice};
use crate::error::{Error, Result};
use crate::trivial::Tau;

pub use continuation::{continue_alpha, newton_tau, ContinuationResult};
pub use point::{make_point, point_from_tau, verify_assumption, AssumptionReport};
pub use rescue::{rescaled_sigma, rescue_sweep, sigma_rescue};
pub use scan::{find_brackets, refine_crossing, scan_eigencurves, EigencurveScan};
pub use two_layer::{check_two_layer_conditions, TwoLayerReport};

/// Numerical thresholds of the validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value threshold for kernel dimensions.
    pub kernel: f64,
    /// `|det nu|` must exceed `nu * ||A(k1)|| ||A(k2)||`.
    pub nu: f64,
    /// `|det A(k)|` must exceed `det * prod Sigma_jj(k)`.
    pub det: f64,
    /// Intersections with `mu >= -mu_floor` are rejected.
    pub mu_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { kernel: 1e-8, nu: 1e-10, det: 1e-10, mu_floor: 1e-12 }
    }
}

/// A validated or candidate bifurcation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub tau: Tau,
    /// 1-based eigencurve labels for `k1` and `k2`.
    pub iota: usize,
    pub kappa: usize,
    /// Common eigenvalue of the reduced matrices, `-1 / r*^2`.
    pub mu: f64,
    pub k1: [f64; 2],
    pub k2: [f64; 2],
    /// Unit kernel vectors of `A(tau*, k1)` and `A(tau*, k2)`.
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    pub nu: [[f64; 2]; 2],
    /// Smallest `theta*` among the accepted points with these labels.
    pub canonical: bool,
    /// Vorticities and surface tensions the point was computed for.
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Surface-tension rescaling applied to clear a degeneracy.
    pub rescue_q: Option<f64>,
    pub report: Option<AssumptionReport>,
}

impl BifurcationPoint {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        fs: &FluidStack,
        lat: &Lattice,
        tau: Tau,
        iota: usize,
        kappa: usize,
        mu: f64,
        eta1: Vec<f64>,
        eta2: Vec<f64>,
        nu: [[f64; 2]; 2],
    ) -> Self {
        BifurcationPoint {
            tau,
            iota,
            kappa,
            mu,
            k1: lat.k1,
            k2: lat.k2,
            eta1,
            eta2,
            nu,
            canonical: false,
            alpha: fs.alpha_all().to_vec(),
            sigma: fs.sigma_all().to_vec(),
            rescue_q: None,
            report: None,
        }
    }

    /// The fluid stack this point belongs to, given the stack it came from.
    pub fn fluid(&self, base: &FluidStack) -> Result<FluidStack> {
        base.with_alpha(self.alpha.clone())?.with_sigma(self.sigma.clone())
    }

    pub fn accepted(&self) -> bool {
        self.report.as_ref().map_or(false, |r| r.ok)
    }
}

/// Why an intersection did not yield an accepted point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectionReason {
    /// The eigencurves meet at `mu >= 0`, so no real amplitude exists.
    NonNegativeEigenvalue { mu: f64 },
    /// The curves touch without crossing.
    Tangency,
    /// Refinement did not converge to a common eigenvalue.
    Unresolved { gap: f64 },
    /// The point failed validation, even after rescue if requested.
    Assumption { failures: Vec<String> },
    /// Numerical failure while refining or validating.
    Failure { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub iota: usize,
    pub kappa: usize,
    pub theta: f64,
    pub reason: RejectionReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub grid: usize,
    pub rescue: bool,
    pub tol: Tolerances,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { grid: scan::DEFAULT_GRID, rescue: false, tol: Tolerances::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub accepted: Vec<BifurcationPoint>,
    pub rejected: Vec<Rejection>,
    /// Set when intersections exist and every one of them lies at `mu >= 0`.
    pub all_intersections_nonnegative: bool,
}

/// Scans, refines, builds and validates every eigencurve intersection.
pub fn find_bifurcation_points(fs: &FluidStack, lat: &Lattice, opts: &PipelineOptions) -> Result<PipelineOutcome> {
    let resonance = check_non_resonance(fs, lat);
    if !resonance.ok {
        return Err(Error::Invalid(format!(
            "vertical non-resonance violated in {} case(s)",
            resonance.violations.len()
        )));
    }
    let scan = scan_eigencurves(fs, lat, opts.grid)?;
    let n = fs.n();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let mut crossings = 0usize;
    let mut nonnegative = 0usize;
    for iota in 1..=n {
        for kappa in 1..=n {
            for br in find_brackets(&scan, iota, kappa) {
                crossings += 1;
                let reject = |theta: f64, reason| Rejection { iota, kappa, theta, reason };
                if br.touching {
                    rejected.push(reject(br.lo, RejectionReason::Tangency));
                    continue;
                }
                let refined = match refine_crossing(fs, lat, &br) {
                    Ok(c) => c,
                    Err(e) => {
                        rejected.push(reject(br.lo, RejectionReason::Failure { message: e.to_string() }));
                        continue;
                    }
                };
                if !refined.converged {
                    let gap = (refined.mu1 - refined.mu2).abs();
                    rejected.push(reject(refined.theta, RejectionReason::Unresolved { gap }));
                    continue;
                }
                let mu = refined.mu1;
                if mu >= -opts.tol.mu_floor {
                    nonnegative += 1;
                    rejected.push(reject(refined.theta, RejectionReason::NonNegativeEigenvalue { mu }));
                    continue;
                }
                let built = make_point(fs, lat, refined.theta, iota, kappa, mu, &refined.xi1, &refined.xi2)
                    .and_then(|mut p| {
                        let report = verify_assumption(fs, lat, &p, &opts.tol)?;
                        p.report = Some(report);
                        Ok(p)
                    });
                let mut p = match built {
                    Ok(p) => p,
                    Err(e) => {
                        rejected.push(reject(refined.theta, RejectionReason::Failure { message: e.to_string() }));
                        continue;
                    }
                };
                let report = p.report.clone().expect("report attached");
                if !report.ok && opts.rescue && report.kernel_ok && report.transversality_ok {
                    if let Some(rescued) = rescue_sweep(fs, lat, &p, &opts.tol)? {
                        p = rescued.point;
                    }
                }
                if p.accepted() {
                    accepted.push(p);
                } else {
                    let failures = p.report.as_ref().map(|r| r.failures()).unwrap_or_default();
                    rejected.push(reject(p.tau.theta(), RejectionReason::Assumption { failures }));
                }
            }
        }
    }
    mark_canonical(&mut accepted);
    accepted.sort_by(|a, b| {
        (a.iota, a.kappa)
            .cmp(&(b.iota, b.kappa))
            .then(a.tau.theta().total_cmp(&b.tau.theta()))
    });
    Ok(PipelineOutcome {
        accepted,
        rejected,
        all_intersections_nonnegative: crossings > 0 && nonnegative == crossings,
    })
}

fn mark_canonical(points: &mut [BifurcationPoint]) {
    for i in 0..points.len() {
        let smallest = points
            .iter()
            .filter(|q| q.iota == points[i].iota && q.kappa == points[i].kappa)
            .map(|q| q.tau.theta())
            .fold(f64::INFINITY, f64::min);
        points[i].canonical = points[i].tau.theta() == smallest;
    }
}
