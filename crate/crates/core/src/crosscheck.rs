//! Independent solver for the Dirichlet problem of the p-Laplacian on a
//! square: minimizes the discrete p-Dirichlet energy of a bilinear finite
//! element function with prescribed boundary values.
//!
//! The energy density `|∇u|^p` is regularized as `(|∇u|² + δ²)^{p/2}` for
//! the optimizer; reported energies use the unregularized form. The
//! minimizer is found by truncated Newton (preconditioned conjugate
//! gradients on Hessian-vector products) with Armijo backtracking.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hodograph::HodographModel;
use crate::pharmonic::eval_u;

pub const MIN_CELLS: usize = 16;
pub const REGULARIZATION: f64 = 1e-10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;
const MAX_CG: usize = 2000;
/// Gradient norms below this many rounding units of the term magnitudes are noise.
const GRADIENT_NOISE: f64 = 64.0;
/// Steps without halving the gradient norm after which a gradient within
/// `STALL_NOISE` times the noise estimate counts as converged.
const STALL_STEPS: usize = 3;
const STALL_NOISE: f64 = 1e2;

/// Square `center ± half_width` split into `cells × cells` bilinear cells,
/// with boundary values at the boundary nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridProblem {
    pub center: Complex64,
    pub half_width: f64,
    pub cells: usize,
    pub p: f64,
    /// Node values in row-major order (`y` outer); only boundary entries are used.
    nodes: Vec<f64>,
}

impl GridProblem {
    pub fn from_fn<F>(center: Complex64, half_width: f64, cells: usize, p: f64, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<f64>,
    {
        if cells < MIN_CELLS {
            return Err(Error::InvalidParams(format!(
                "grid needs at least {MIN_CELLS} cells per side, got {cells}"
            )));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParams(format!("energy exponent must exceed 1, got {p}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        let mut problem = Self {
            center,
            half_width,
            cells,
            p,
            nodes: vec![0.0; (cells + 1) * (cells + 1)],
        };
        for j in 0..=cells {
            for i in 0..=cells {
                if problem.is_boundary(i, j) {
                    let z = problem.node(i, j);
                    let v = f(z).map_err(|e| Error::at(z, e))?;
                    if !v.is_finite() {
                        return Err(Error::InvalidParams(format!("boundary value at {z} is not finite")));
                    }
                    problem.nodes[j * (cells + 1) + i] = v;
                }
            }
        }
        Ok(problem)
    }

    /// Boundary data from `u` of `model`, solved with the energy exponent `p`.
    ///
    /// The critical point must lie strictly inside or strictly outside the
    /// square so that no boundary node sits on it.
    pub fn from_model(
        model: &HodographModel,
        center: Complex64,
        half_width: f64,
        cells: usize,
        p: f64,
    ) -> Result<Self> {
        let dx = (center.re.abs() - half_width).abs();
        let dy = (center.im.abs() - half_width).abs();
        if dx.min(dy) < 1e-3 * half_width && center.re.abs().max(center.im.abs()) <= half_width * (1.0 + 1e-3) {
            return Err(Error::InvalidParams(
                "critical point lies on the square boundary".into(),
            ));
        }
        Self::from_fn(center, half_width, cells, p, |z| eval_u(model, z))
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let h = self.step();
        self.center + Complex64::new(-self.half_width + h * i as f64, -self.half_width + h * j as f64)
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.cells || j == self.cells
    }

    /// Transfinite bilinear blend of the boundary data.
    pub fn initial_guess(&self) -> Vec<f64> {
        let n = self.cells;
        let w = n + 1;
        let b = &self.nodes;
        let mut u = b.clone();
        for j in 1..n {
            let t = j as f64 / n as f64;
            for i in 1..n {
                let s = i as f64 / n as f64;
                let edges = (1.0 - s) * b[j * w] + s * b[j * w + n] + (1.0 - t) * b[i] + t * b[n * w + i];
                let corners = (1.0 - s) * (1.0 - t) * b[0]
                    + s * (1.0 - t) * b[n]
                    + (1.0 - s) * t * b[n * w]
                    + s * t * b[n * w + n];
                u[j * w + i] = edges - corners;
            }
        }
        u
    }

    fn energy_with(&self, u: &[f64], delta: f64) -> f64 {
        let g = self.quadrature();
        let p = self.p;
        let rows: Vec<f64> = (0..self.cells)
            .into_par_iter()
            .map(|j| {
                (0..self.cells)
                    .map(|i| {
                        let c = self.corners(u, i, j);
                        g.grads
                            .iter()
                            .map(|gq| {
                                let (gx, gy) = gq.apply(&c);
                                (gx * gx + gy * gy + delta * delta).powf(0.5 * p)
                            })
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect();
        rows.iter().sum::<f64>() * g.weight
    }

    /// `E(u + t d) - E(u)` for the regularized energy, summed cell by cell
    /// from `s^{p/2} expm1((p/2) ln1p(Δs/s))` so that the difference keeps
    /// its relative accuracy when it is far below the rounding level of `E`.
    fn energy_change(&self, u: &[f64], d: &[f64], t: f64) -> f64 {
        let g = self.quadrature();
        let p = self.p;
        let d2 = REGULARIZATION * REGULARIZATION;
        let rows: Vec<f64> = (0..self.cells)
            .into_par_iter()
            .map(|j| {
                let mut acc = 0.0;
                for i in 0..self.cells {
                    let c = self.corners(u, i, j);
                    let cd = self.corners(d, i, j);
                    for gq in &g.grads {
                        let (gx, gy) = gq.apply(&c);
                        let (dx, dy) = gq.apply(&cd);
                        let s = gx * gx + gy * gy + d2;
                        let ds = t * (2.0 * (gx * dx + gy * dy) + t * (dx * dx + dy * dy));
                        acc += s.powf(0.5 * p) * (0.5 * p * (ds / s).ln_1p()).exp_m1();
                    }
                }
                acc
            })
            .collect();
        rows.iter().sum::<f64>() * g.weight
    }

    /// Discrete `Σ_cells ∫ |∇u|^p` of a full node vector.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.energy_with(u, 0.0)
    }

    fn corners(&self, u: &[f64], i: usize, j: usize) -> [f64; 4] {
        let w = self.cells + 1;
        [
            u[j * w + i],
            u[j * w + i + 1],
            u[(j + 1) * w + i],
            u[(j + 1) * w + i + 1],
        ]
    }

    fn quadrature(&self) -> CellQuadrature {
        CellQuadrature::new(self.step())
    }

    /// Gradient of the regularized energy, zero on boundary nodes.
    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        self.gradient_terms(u, false)
    }

    /// Nodewise sums of the magnitudes of the terms entering [`Self::gradient`],
    /// which set the level of its rounding error.
    fn gradient_magnitude(&self, u: &[f64]) -> Vec<f64> {
        self.gradient_terms(u, true)
    }

    fn gradient_terms(&self, u: &[f64], magnitude: bool) -> Vec<f64> {
        let g = self.quadrature();
        let p = self.p;
        let d2 = REGULARIZATION * REGULARIZATION;
        self.scatter(
            |c| {
                let mut out = [0.0; 4];
                for gq in &g.grads {
                    let (gx, gy) = gq.apply(c);
                    let coef = p * (gx * gx + gy * gy + d2).powf(0.5 * p - 1.0);
                    for (a, o) in out.iter_mut().enumerate() {
                        let term = g.weight * coef * (gq.dx[a] * gx + gq.dy[a] * gy);
                        *o += if magnitude { term.abs() } else { term };
                    }
                }
                out
            },
            u,
            None,
        )
    }

    /// Hessian of the regularized energy at `u` applied to `v`.
    fn hessian_apply(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let g = self.quadrature();
        let (p, d2) = (self.p, REGULARIZATION * REGULARIZATION);
        self.scatter(
            |c| {
                let mut out = [0.0; 4];
                for gq in &g.grads {
                    let (gx, gy) = gq.apply(&c[..4]);
                    let (vx, vy) = gq.apply(&c[4..]);
                    let s = gx * gx + gy * gy + d2;
                    let a = p * s.powf(0.5 * p - 1.0);
                    let b = p * (p - 2.0) * s.powf(0.5 * p - 2.0) * (gx * vx + gy * vy);
                    let (hx, hy) = (a * vx + b * gx, a * vy + b * gy);
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += g.weight * (gq.dx[k] * hx + gq.dy[k] * hy);
                    }
                }
                out
            },
            u,
            Some(v),
        )
    }

    fn hessian_diagonal(&self, u: &[f64]) -> Vec<f64> {
        let g = self.quadrature();
        let (p, d2) = (self.p, REGULARIZATION * REGULARIZATION);
        let mut d = self.scatter(
            |c| {
                let mut out = [0.0; 4];
                for gq in &g.grads {
                    let (gx, gy) = gq.apply(c);
                    let s = gx * gx + gy * gy + d2;
                    let a = p * s.powf(0.5 * p - 1.0);
                    let b = p * (p - 2.0) * s.powf(0.5 * p - 2.0);
                    for (k, o) in out.iter_mut().enumerate() {
                        let proj = gq.dx[k] * gx + gq.dy[k] * gy;
                        *o += g.weight * (a * (gq.dx[k] * gq.dx[k] + gq.dy[k] * gq.dy[k]) + b * proj * proj);
                    }
                }
                out
            },
            u,
            None,
        );
        for v in &mut d {
            if !(*v > 0.0) {
                *v = 1.0;
            }
        }
        d
    }

    /// Computes per-cell local vectors in parallel and adds them into the
    /// global vector in a fixed order. With `extra`, the local closure sees
    /// eight values: the corners of `u` followed by the corners of `extra`.
    fn scatter<L>(&self, local: L, u: &[f64], extra: Option<&[f64]>) -> Vec<f64>
    where
        L: Fn(&[f64]) -> [f64; 4] + Sync,
    {
        let n = self.cells;
        let w = n + 1;
        let rows: Vec<Vec<[f64; 4]>> = (0..n)
            .into_par_iter()
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let c = self.corners(u, i, j);
                        match extra {
                            None => local(&c),
                            Some(v) => {
                                let cv = self.corners(v, i, j);
                                local(&[c[0], c[1], c[2], c[3], cv[0], cv[1], cv[2], cv[3]])
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; w * w];
        for (j, row) in rows.iter().enumerate() {
            for (i, loc) in row.iter().enumerate() {
                let idx = [j * w + i, j * w + i + 1, (j + 1) * w + i, (j + 1) * w + i + 1];
                for (k, &ix) in idx.iter().enumerate() {
                    out[ix] += loc[k];
                }
            }
        }
        self.zero_boundary(&mut out);
        out
    }

    fn zero_boundary(&self, v: &mut [f64]) {
        let n = self.cells;
        let w = n + 1;
        for k in 0..w {
            v[k] = 0.0;
            v[n * w + k] = 0.0;
            v[k * w] = 0.0;
            v[k * w + n] = 0.0;
        }
    }
}

/// Gradients of the four bilinear shape functions at the 2×2 Gauss points.
struct CellQuadrature {
    grads: [ShapeGrad; 4],
    weight: f64,
}

struct ShapeGrad {
    dx: [f64; 4],
    dy: [f64; 4],
}

impl ShapeGrad {
    fn apply(&self, c: &[f64]) -> (f64, f64) {
        c.iter()
            .zip(self.dx.iter().zip(&self.dy))
            .fold((0.0, 0.0), |g, (v, (dx, dy))| (g.0 + dx * v, g.1 + dy * v))
    }
}

impl CellQuadrature {
    fn new(h: f64) -> Self {
        let a = 0.5 - 0.5 / 3f64.sqrt();
        let pts = [(a, a), (1.0 - a, a), (a, 1.0 - a), (1.0 - a, 1.0 - a)];
        let grads = pts.map(|(s, t)| ShapeGrad {
            dx: [-(1.0 - t) / h, (1.0 - t) / h, -t / h, t / h],
            dy: [-(1.0 - s) / h, -s / h, (1.0 - s) / h, s / h],
        });
        Self {
            grads,
            weight: 0.25 * h * h,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub problem: GridProblem,
    /// Node values in row-major order, boundary included.
    pub values: Vec<f64>,
    /// Unregularized discrete energy of `values`.
    pub energy: f64,
    /// Regularized energy after each accepted step, starting from the initial guess.
    pub energy_history: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub initial_grad_norm: f64,
    /// Stopped because the remaining decrease fell below the energy's
    /// rounding level rather than by the gradient tolerance.
    pub rounding_limited: bool,
}

impl GridSolution {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.problem.cells + 1) + i]
    }
}

/// Minimizes the discrete energy from the blended initial guess until the
/// gradient norm falls to `tol` times its initial value.
pub fn minimize_energy(problem: &GridProblem, tol: f64, max_iters: usize) -> Result<GridSolution> {
    minimize_from(problem, problem.initial_guess(), tol, max_iters)
}

/// As [`minimize_energy`], starting from the blended guess plus a seeded
/// random interior perturbation of relative size `amplitude`.
pub fn minimize_energy_perturbed(
    problem: &GridProblem,
    tol: f64,
    max_iters: usize,
    amplitude: f64,
    seed: u64,
) -> Result<GridSolution> {
    let mut u = problem.initial_guess();
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.cells;
    for j in 1..n {
        for i in 1..n {
            u[j * (n + 1) + i] += amplitude * scale * rng.random_range(-1.0..1.0);
        }
    }
    minimize_from(problem, u, tol, max_iters)
}

fn minimize_from(problem: &GridProblem, mut u: Vec<f64>, tol: f64, max_iters: usize) -> Result<GridSolution> {
    let mut e = problem.energy_with(&u, REGULARIZATION);
    let mut history = vec![e];
    let mut g = problem.gradient(&u);
    let g0 = norm(&g);
    let mut gn = g0;
    let mut iterations = 0;
    let mut rounding_limited = false;
    let mut stalled = 0;
    loop {
        if gn <= tol * g0 || gn == 0.0 {
            break;
        }
        let noise = GRADIENT_NOISE * f64::EPSILON * norm(&problem.gradient_magnitude(&u));
        if gn <= noise || (stalled >= STALL_STEPS && gn <= STALL_NOISE * noise) {
            rounding_limited = true;
            break;
        }
        if iterations == max_iters {
            return Err(Error::Minimization {
                iterations,
                grad_norm: gn,
                reason: format!("gradient norm above {tol} times its initial value {g0}"),
            });
        }
        iterations += 1;
        let d = newton_direction(problem, &u, &g, gn);
        let slope = dot(&g, &d);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let change = problem.energy_change(&u, &d, t);
            if change <= ARMIJO * t * slope {
                accepted = Some((t, change));
                break;
            }
            t *= 0.5;
        }
        let Some((t, change)) = accepted else {
            // not even the accurately differenced energy resolves a decrease
            rounding_limited = true;
            break;
        };
        for (a, b) in u.iter_mut().zip(&d) {
            *a += t * b;
        }
        e += change;
        history.push(e);
        g = problem.gradient(&u);
        let previous = gn;
        gn = norm(&g);
        stalled = if gn > 0.5 * previous { stalled + 1 } else { 0 };
    }
    Ok(GridSolution {
        energy: problem.energy(&u),
        problem: problem.clone(),
        values: u,
        energy_history: history,
        iterations,
        grad_norm: gn,
        initial_grad_norm: g0,
        rounding_limited,
    })
}

/// Jacobi-preconditioned conjugate gradients on `H d = -g`, truncated at the
/// usual forcing term `min(0.5, sqrt|g|)·|g|`, falling back to steepest
/// descent on negative curvature.
fn newton_direction(problem: &GridProblem, u: &[f64], g: &[f64], gn: f64) -> Vec<f64> {
    let diag = problem.hessian_diagonal(u);
    let forcing = 0.5f64.min(gn.sqrt()).min(1e-2) * gn;
    let mut d = vec![0.0; u.len()];
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, b)| a / b).collect();
    problem.zero_boundary(&mut z);
    let mut s = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..MAX_CG {
        let hs = problem.hessian_apply(u, &s);
        let curv = dot(&s, &hs);
        if !(curv > 0.0) {
            if d.iter().all(|v| *v == 0.0) {
                return r;
            }
            break;
        }
        let alpha = rz / curv;
        for k in 0..d.len() {
            d[k] += alpha * s[k];
            r[k] -= alpha * hs[k];
        }
        if norm(&r) <= forcing {
            break;
        }
        for k in 0..z.len() {
            z[k] = r[k] / diag[k];
        }
        problem.zero_boundary(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..s.len() {
            s[k] = z[k] + beta * s[k];
        }
    }
    d
}

/// Largest `|solution - f|` over interior nodes.
pub fn compare_with<F>(solution: &GridSolution, f: F) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    let pr = &solution.problem;
    let n = pr.cells;
    let rows: Vec<f64> = (1..n)
        .into_par_iter()
        .map(|j| {
            (1..n).try_fold(0.0f64, |m, i| {
                let z = pr.node(i, j);
                let v = f(z).map_err(|e| Error::at(z, e))?;
                Ok(m.max((solution.value(i, j) - v).abs()))
            })
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Largest interior deviation of the solution from `u` of `model`.
pub fn compare_fields(solution: &GridSolution, model: &HodographModel) -> Result<f64> {
    compare_with(solution, |z| eval_u(model, z))
}
