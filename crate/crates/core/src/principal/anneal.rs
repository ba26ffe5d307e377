//! Simulated annealing over the incentivizable set with hit-and-run steps.
//!
//! The set is only reachable through the membership LP. It is the convex
//! hull of the pure policies that are best responses to some assessment
//! policy, and it is usually lower-dimensional (in the classroom game, study
//! effort in the last round is always zero). The walk therefore starts at the
//! centroid of pure members found by sampling assessment policies and moves
//! inside their affine span.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use std::collections::HashSet;

use super::{outer_radius, Diagnostics, SolveMethod, SolveResult};
use crate::agent::best_response_fixed_budget;
use crate::error::{Error, Result};
use crate::game::{principal_utility, AssessmentPolicy, CostModel, EffortPolicy, GameParams};
use crate::incentives::{membership, recover_assessment, DEFAULT_MEMBERSHIP_TOL, PERTURBED_ATTEMPTS};
use crate::matrix::dot;

const BISECTION_STEPS: usize = 12;
const SHRINK_WEIGHTS: [f64; 11] = [0.0, 1e-9, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 0.5, 1.0];
const FINAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Assumed radius of a ball inside the set around the start point.
    pub inner_radius: f64,
    /// Samples per phase used to estimate the rounding covariance (default `8N`).
    pub samples_per_phase: Option<usize>,
    /// Hit-and-run steps per phase (default `50N`).
    pub walk_steps: Option<usize>,
    /// Defaults to the safe bound of [`outer_radius`].
    pub outer_radius: Option<f64>,
    pub membership_tol: f64,
    /// Policy whose best response is the first known member (default uniform).
    pub seed_policy: Option<AssessmentPolicy>,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            epsilon: 0.05,
            delta: 0.2,
            seed: 0,
            inner_radius: 1e-3,
            samples_per_phase: None,
            walk_steps: None,
            outer_radius: None,
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
            seed_policy: None,
        }
    }
}

impl AnnealConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self, outer: f64) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.epsilon) || !open_unit(self.delta) {
            return Err(Error::InvalidArgument("epsilon and delta must lie in (0, 1)".into()));
        }
        if !(self.inner_radius > 0.0) || !(outer >= self.inner_radius) {
            return Err(Error::InvalidArgument("radii must satisfy 0 < r <= R".into()));
        }
        if self.samples_per_phase == Some(0) || self.walk_steps == Some(0) {
            return Err(Error::InvalidArgument("samples_per_phase and walk_steps must be positive".into()));
        }
        Ok(())
    }

    /// `⌈√N · ln(R·N / (r·ε·δ))⌉` with `N = T(d−1)`.
    pub fn phase_count(&self, horizon: usize, d: usize) -> usize {
        let n = (horizon * d.saturating_sub(1)) as f64;
        if n == 0.0 {
            return 0;
        }
        let outer = self.outer_radius.unwrap_or_else(|| outer_radius(horizon, d).safe);
        let arg = outer * n / (self.inner_radius * self.epsilon * self.delta);
        (n.sqrt() * arg.ln()).ceil().max(1.0) as usize
    }
}

/// Counts LP solves and screens points outside the nonnegative budget box.
struct Oracle<'a> {
    params: &'a GameParams,
    tol: f64,
    calls: usize,
}

impl Oracle<'_> {
    fn contains(&mut self, x: &[f64]) -> Result<bool> {
        if x.iter().any(|&v| v < -1e-12) {
            return Ok(false);
        }
        let e = to_policy(x, self.params.d());
        if e.round_sums().iter().any(|&s| s > 1.0 + 1e-9) {
            return Ok(false);
        }
        self.calls += 1;
        membership(self.params, &e, self.tol)
            .map(|v| v.incentivizable)
            .map_err(|err| Error::MembershipOracleFailure(err.to_string()))
    }
}

fn to_policy(x: &[f64], d: usize) -> EffortPolicy {
    let clean: Vec<f64> = x.iter().map(|&v| if v < 0.0 { 0.0 } else { v }).collect();
    EffortPolicy::from_flat(&clean, d)
}

pub fn solve_fixed_budget_anneal(params: &GameParams, cfg: &AnnealConfig) -> Result<SolveResult> {
    params.require(CostModel::FixedBudget)?;
    params.validated()?;
    let (n, d, horizon) = (params.n(), params.d(), params.horizon);
    let outer = cfg.outer_radius.unwrap_or_else(|| outer_radius(horizon, d).safe);
    if d == 1 {
        let efforts = EffortPolicy::new(vec![vec![1.0]; horizon]);
        let assessment = recover_assessment(params, &efforts)?;
        return Ok(SolveResult {
            value: principal_utility(params, &efforts),
            diagnostics: Diagnostics {
                oracle_calls: 1 + assessment.perturbations,
                ..Diagnostics::default()
            },
            efforts,
            assessment,
            grid_policy: None,
            method: SolveMethod::Anneal,
        });
    }
    cfg.check(outer)?;
    let seed_policy = cfg.seed_policy.clone().unwrap_or_else(|| AssessmentPolicy::uniform(n, horizon));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut oracle = Oracle {
        params,
        tol: cfg.membership_tol,
        calls: 0,
    };
    let big_n = horizon * (d - 1);
    let vertices = discover_vertices(params, &seed_policy, 20 * big_n + 20, &mut rng, &mut oracle)?;
    if vertices.is_empty() {
        return Err(Error::MembershipOracleFailure(
            "no incentivizable policy found from the seed policy".into(),
        ));
    }
    let dim = horizon * d;
    let mut centroid = vec![0.0; dim];
    for v in &vertices {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += x / vertices.len() as f64;
        }
    }
    let basis = orthonormal_span(&vertices, &centroid);
    let gain: Vec<f64> = (0..dim).map(|i| params.lambda[i % d]).collect();

    let mut diagnostics = Diagnostics {
        subspace_dim: basis.len(),
        vertices_found: vertices.len(),
        ..Diagnostics::default()
    };
    let mut best = centroid.clone();
    if !basis.is_empty() {
        let walk = Walk {
            basis: &basis,
            origin: &centroid,
            outer,
        };
        let phases = cfg.phase_count(horizon, d);
        let samples = cfg.samples_per_phase.unwrap_or(8 * big_n);
        let steps = cfg.walk_steps.unwrap_or(50 * big_n).max(samples);
        let cooling = 1.0 - 1.0 / (big_n as f64).sqrt();
        let floor = outer * 1e-12;
        let mut x = centroid.clone();
        let mut best_value = dot(&gain, &x);
        let mut rounding: Option<DMatrix<f64>> = None;
        for phase in 0..phases {
            let temperature = (outer * cooling.powi(phase as i32)).max(floor);
            let every = (steps / samples).max(1);
            let mut recorded = Vec::with_capacity(samples);
            let mut moved = false;
            for step in 0..steps {
                let dir = walk.direction(rounding.as_ref(), &mut rng);
                let forward = walk.chord_end(&x, &dir, &mut oracle)?;
                let backward = walk.chord_end(&x, &dir.iter().map(|v| -v).collect::<Vec<_>>(), &mut oracle)?;
                if forward + backward > 1e-15 {
                    moved = true;
                    let rate = dot(&gain, &dir) / temperature;
                    let t = truncated_exponential(&mut rng, -backward, forward, rate);
                    for (xi, di) in x.iter_mut().zip(&dir) {
                        *xi += t * di;
                    }
                    walk.reproject(&mut x);
                    let value = dot(&gain, &x);
                    if value > best_value {
                        best_value = value;
                        best.clone_from(&x);
                    }
                }
                if (step + 1) % every == 0 && recorded.len() < samples {
                    recorded.push(walk.coordinates(&x));
                }
            }
            diagnostics.no_progress |= !moved;
            diagnostics.phases += 1;
            rounding = rounding_factor(&recorded, basis.len());
        }
    }

    for &eta in &SHRINK_WEIGHTS {
        let x: Vec<f64> = best.iter().zip(&centroid).map(|(b, c)| (1.0 - eta) * b + eta * c).collect();
        let efforts = to_policy(&x, d);
        oracle.calls += 1;
        if !membership(params, &efforts, FINAL_TOL)?.incentivizable {
            continue;
        }
        match recover_assessment(params, &efforts) {
            Ok(assessment) => {
                diagnostics.oracle_calls = oracle.calls + 1 + assessment.perturbations;
                diagnostics.shrink = eta;
                return Ok(SolveResult {
                    value: principal_utility(params, &efforts),
                    efforts,
                    assessment,
                    grid_policy: None,
                    method: SolveMethod::Anneal,
                    diagnostics,
                });
            }
            Err(Error::ValidationFailed { .. }) => {
                oracle.calls += 1 + PERTURBED_ATTEMPTS;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::MembershipOracleFailure(
        "no point between the best sample and the start point could be recovered".into(),
    ))
}

/// Pure best responses (with every single-round tie swap) to the seed
/// policy, to each constant single-feature policy and to random nonnegative
/// policies, kept when the membership LP confirms them.
fn discover_vertices(
    params: &GameParams,
    seed_policy: &AssessmentPolicy,
    draws: usize,
    rng: &mut ChaCha8Rng,
    oracle: &mut Oracle,
) -> Result<Vec<Vec<f64>>> {
    let (n, d, horizon) = (params.n(), params.d(), params.horizon);
    let mut policies = vec![seed_policy.clone()];
    policies.extend((0..n).map(|k| AssessmentPolicy::basis(n, k, horizon)));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut visit = |policy: &AssessmentPolicy, oracle: &mut Oracle| -> Result<()> {
        let br = best_response_fixed_budget(params, policy)?;
        if br.coefficients.iter().any(|c| c.iter().all(|&v| v <= 0.0)) {
            return Ok(());
        }
        let base = br.actions();
        let mut candidates = vec![base.clone()];
        for (t, ties) in br.tie_sets.iter().enumerate() {
            for &j in ties.iter().filter(|&&j| j != base[t]) {
                let mut v = base.clone();
                v[t] = j;
                candidates.push(v);
            }
        }
        for actions in candidates {
            if seen.insert(actions.clone()) {
                let x = EffortPolicy::pure(&actions, d).flatten();
                if oracle.contains(&x)? {
                    out.push(x);
                }
            }
        }
        Ok(())
    };
    for policy in &policies {
        visit(policy, oracle)?;
    }
    for _ in 0..draws {
        let rules = (0..horizon)
            .map(|_| {
                let scale = rng.random_range(0.05..=1.0);
                let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = raw.iter().sum::<f64>().max(f64::MIN_POSITIVE);
                raw.into_iter().map(|v: f64| scale * v / total).collect()
            })
            .collect();
        visit(&AssessmentPolicy::unnormalized(rules), oracle)?;
    }
    Ok(out)
}

/// Orthonormal basis of the span of `p − origin` (modified Gram–Schmidt, twice).
fn orthonormal_span(points: &[Vec<f64>], origin: &[f64]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in points {
        let mut v: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

struct Walk<'a> {
    basis: &'a [Vec<f64>],
    origin: &'a [f64],
    outer: f64,
}

impl Walk<'_> {
    /// Unit direction in the ambient space, drawn as `Q·L·z` with `z` standard normal.
    fn direction(&self, rounding: Option<&DMatrix<f64>>, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let m = self.basis.len();
        loop {
            let z = DVector::from_fn(m, |_, _| StandardNormal.sample(rng));
            let u = match rounding {
                Some(l) => l * z,
                None => z,
            };
            let mut v = vec![0.0; self.origin.len()];
            for (q, &c) in self.basis.iter().zip(u.iter()) {
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi += c * qi;
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-300 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    /// Largest member step from `x` along `dir`: the nonnegativity and
    /// budget box first, then bisection on the membership oracle.
    fn chord_end(&self, x: &[f64], dir: &[f64], oracle: &mut Oracle) -> Result<f64> {
        let d = oracle.params.d();
        let mut limit = 2.0 * self.outer.max(1.0) * (x.len() as f64).sqrt();
        for (xi, di) in x.iter().zip(dir) {
            if *di < -1e-15 {
                limit = limit.min(xi.max(0.0) / -di);
            }
        }
        for (xs, ds) in x.chunks(d).zip(dir.chunks(d)) {
            let rise: f64 = ds.iter().sum();
            if rise > 1e-15 {
                limit = limit.min((1.0 - xs.iter().sum::<f64>()).max(0.0) / rise);
            }
        }
        if limit <= 0.0 {
            return Ok(0.0);
        }
        let at = |t: f64| -> Vec<f64> { x.iter().zip(dir).map(|(a, b)| a + t * b).collect() };
        if oracle.contains(&at(limit))? {
            return Ok(limit);
        }
        let (mut lo, mut hi) = (0.0, limit);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if oracle.contains(&at(mid))? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        let shifted: Vec<f64> = x.iter().zip(self.origin).map(|(a, b)| a - b).collect();
        self.basis.iter().map(|q| dot(q, &shifted)).collect()
    }

    /// Removes round-off that drifted out of the affine span.
    fn reproject(&self, x: &mut [f64]) {
        let y = self.coordinates(x);
        x.copy_from_slice(self.origin);
        for (q, c) in self.basis.iter().zip(&y) {
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += c * qi;
            }
        }
    }
}

/// Cholesky factor of the sample covariance (with a small ridge); `None`
/// keeps isotropic directions.
fn rounding_factor(samples: &[Vec<f64>], m: usize) -> Option<DMatrix<f64>> {
    if samples.len() < 2 {
        return None;
    }
    let k = samples.len() as f64;
    let mut mean = DVector::zeros(m);
    for s in samples {
        mean += DVector::from_column_slice(s);
    }
    mean /= k;
    let mut cov = DMatrix::zeros(m, m);
    for s in samples {
        let c = DVector::from_column_slice(s) - &mean;
        cov += &c * c.transpose();
    }
    cov /= k - 1.0;
    let scale = cov.trace() / m as f64;
    if !(scale > 1e-24) {
        return None;
    }
    for i in 0..m {
        cov[(i, i)] += 1e-6 * scale;
    }
    cov.cholesky().map(|c| c.l())
}

/// Draws from the density `∝ exp(rate·t)` on `[a, b]`.
fn truncated_exponential(rng: &mut ChaCha8Rng, a: f64, b: f64, rate: f64) -> f64 {
    let u: f64 = rng.random();
    let z = rate * (b - a);
    let t = if z.abs() < 1e-12 {
        a + u * (b - a)
    } else if z > 0.0 {
        b + ((1.0 - u) * (-z).exp_m1()).ln_1p() / rate
    } else {
        a + (u * z.exp_m1()).ln_1p() / rate
    };
    t.clamp(a, b)
}
