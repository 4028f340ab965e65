//! Discrete optimal transport between weighted point clouds in the plane.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest `C / lambda` for which the plain-domain kernel `exp(-C / lambda)` is used.
const LOG_DOMAIN_SWITCH: f64 = 700.0;
const MASS_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

pub fn squared_distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
    dx * dx + dy * dy
}

fn check_masses(a: &[f64], b: &[f64]) -> Result<()> {
    let gap = a.iter().sum::<f64>() - b.iter().sum::<f64>();
    if gap.abs() > MASS_TOL {
        return Err(Error::Infeasible(gap));
    }
    Ok(())
}

/// Transport cost `<gamma, C>` of the plan reached after `iters` Sinkhorn-Knopp
/// sweeps on squared-Euclidean cost with entropic weight `lambda`.
pub fn sinkhorn_cost(
    a: &[f64],
    xa: &[[f64; 2]],
    b: &[f64],
    xb: &[[f64; 2]],
    lambda: f64,
    iters: usize,
) -> Result<f64> {
    if !(lambda > 0.0) || iters == 0 {
        return Err(Error::InvalidParameter(format!(
            "sinkhorn needs lambda > 0 and at least one iteration (got {lambda}, {iters})"
        )));
    }
    check_masses(a, b)?;
    let max_cost = xa
        .iter()
        .flat_map(|p| xb.iter().map(move |q| squared_distance(*p, *q)))
        .fold(0.0, f64::max);
    let value = if max_cost / lambda <= LOG_DOMAIN_SWITCH {
        sinkhorn_plain(a, xa, b, xb, lambda, iters)
    } else {
        None
    };
    match value {
        Some(v) => Ok(v),
        None => sinkhorn_log(a, xa, b, xb, lambda, iters),
    }
}

/// Returns `None` if a scaling denominator underflows.
fn sinkhorn_plain(
    a: &[f64],
    xa: &[[f64; 2]],
    b: &[f64],
    xb: &[[f64; 2]],
    lambda: f64,
    iters: usize,
) -> Option<f64> {
    let kernel = |i: usize, j: usize| (-squared_distance(xa[i], xb[j]) / lambda).exp();
    let mut u = vec![1.0; a.len()];
    let mut v = vec![1.0; b.len()];
    for _ in 0..iters {
        u = (0..a.len())
            .into_par_iter()
            .map(|i| {
                let s: f64 = (0..b.len()).map(|j| kernel(i, j) * v[j]).sum();
                a[i] / s
            })
            .collect();
        v = (0..b.len())
            .into_par_iter()
            .map(|j| {
                let s: f64 = (0..a.len()).map(|i| kernel(i, j) * u[i]).sum();
                b[j] / s
            })
            .collect();
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return None;
        }
    }
    let cost: f64 = (0..a.len())
        .into_par_iter()
        .map(|i| {
            (0..b.len())
                .map(|j| {
                    let c = squared_distance(xa[i], xb[j]);
                    u[i] * (-c / lambda).exp() * v[j] * c
                })
                .sum::<f64>()
        })
        .sum();
    cost.is_finite().then_some(cost)
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Same iteration on the dual potentials `f = lambda ln u`, `g = lambda ln v`.
fn sinkhorn_log(
    a: &[f64],
    xa: &[[f64; 2]],
    b: &[f64],
    xb: &[[f64; 2]],
    lambda: f64,
    iters: usize,
) -> Result<f64> {
    let mut f = vec![0.0; a.len()];
    let mut g = vec![0.0; b.len()];
    for _ in 0..iters {
        f = (0..a.len())
            .into_par_iter()
            .map(|i| {
                let lse = log_sum_exp((0..b.len()).map(|j| (g[j] - squared_distance(xa[i], xb[j])) / lambda));
                lambda * (a[i].ln() - lse)
            })
            .collect();
        g = (0..b.len())
            .into_par_iter()
            .map(|j| {
                let lse = log_sum_exp((0..a.len()).map(|i| (f[i] - squared_distance(xa[i], xb[j])) / lambda));
                lambda * (b[j].ln() - lse)
            })
            .collect();
    }
    let cost: f64 = (0..a.len())
        .into_par_iter()
        .map(|i| {
            (0..b.len())
                .map(|j| {
                    let c = squared_distance(xa[i], xb[j]);
                    ((f[i] + g[j] - c) / lambda).exp() * c
                })
                .sum::<f64>()
        })
        .sum();
    if !cost.is_finite() {
        return Err(Error::NumericalUnderflow("log-domain sinkhorn"));
    }
    Ok(cost)
}

/// Exact minimum of `sum gamma_ij cost_ij` over couplings of `a` and `b`,
/// by the transportation simplex with MODI pricing. `cost` is row-major `m x n`.
pub fn transport_simplex(a: &[f64], b: &[f64], cost: &[f64]) -> Result<f64> {
    let (m, n) = (a.len(), b.len());
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("empty marginal".into()));
    }
    if cost.len() != m * n {
        return Err(Error::LengthMismatch(cost.len(), m * n));
    }
    check_masses(a, b)?;
    let mut basis = northwest_corner(a, b);
    let cmax = cost.iter().fold(0.0f64, |x, c| x.max(c.abs()));
    let tol = -1e-12 * cmax.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_PIVOTS {
        let adj = adjacency(&basis, m, n);
        let (u, v) = potentials(&basis, &adj, cost, m, n);
        let mut best = (tol, usize::MAX, usize::MAX);
        for i in 0..m {
            for j in 0..n {
                let r = cost[i * n + j] - u[i] - v[j];
                if r < best.0 {
                    best = (r, i, j);
                }
            }
        }
        let (_, ei, ej) = best;
        if ei == usize::MAX {
            return Ok(basis.iter().map(|c| c.flow * cost[c.i * n + c.j]).sum());
        }
        // tree path from row ei to column ej; its cells alternate -, +, - ... from the column end
        let path = tree_path(&adj, ei, m + ej, m + n);
        let minus: Vec<usize> = path.iter().rev().step_by(2).copied().collect();
        let leave = *minus
            .iter()
            .min_by(|&&x, &&y| basis[x].flow.total_cmp(&basis[y].flow))
            .expect("cycle has at least one cell");
        let theta = basis[leave].flow;
        for (k, &cell) in path.iter().rev().enumerate() {
            if k % 2 == 0 {
                basis[cell].flow -= theta;
            } else {
                basis[cell].flow += theta;
            }
        }
        basis[leave] = Cell {
            i: ei,
            j: ej,
            flow: theta,
        };
    }
    Err(Error::NotConverged(MAX_PIVOTS))
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    i: usize,
    j: usize,
    flow: f64,
}

fn northwest_corner(a: &[f64], b: &[f64]) -> Vec<Cell> {
    let (m, n) = (a.len(), b.len());
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let (mut i, mut j) = (0, 0);
    let mut cells = Vec::with_capacity(m + n - 1);
    loop {
        let x = ra[i].min(rb[j]).max(0.0);
        cells.push(Cell { i, j, flow: x });
        ra[i] -= x;
        rb[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if (ra[i] <= rb[j] && i < m - 1) || j == n - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}

/// Node ids: rows `0..m`, columns `m..m+n`. Each entry is `(neighbor, cell index)`.
fn adjacency(basis: &[Cell], m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for (k, c) in basis.iter().enumerate() {
        adj[c.i].push((m + c.j, k));
        adj[m + c.j].push((c.i, k));
    }
    adj
}

fn potentials(
    basis: &[Cell],
    adj: &[Vec<(usize, usize)>],
    cost: &[f64],
    m: usize,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut pot = vec![f64::NAN; m + n];
    pot[0] = 0.0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        for &(next, k) in &adj[node] {
            if pot[next].is_nan() {
                let c = cost[basis[k].i * n + basis[k].j];
                pot[next] = c - pot[node];
                queue.push_back(next);
            }
        }
    }
    let v = pot.split_off(m);
    (pot, v)
}

/// Cells on the tree path from `from` to `to`, in order.
fn tree_path(adj: &[Vec<(usize, usize)>], from: usize, to: usize, nodes: usize) -> Vec<usize> {
    let mut parent = vec![(usize::MAX, usize::MAX); nodes];
    parent[from] = (from, usize::MAX);
    let mut queue = VecDeque::from([from]);
    while let Some(node) = queue.pop_front() {
        if node == to {
            break;
        }
        for &(next, k) in &adj[node] {
            if parent[next].0 == usize::MAX {
                parent[next] = (node, k);
                queue.push_back(next);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = to;
    while node != from {
        let (p, k) = parent[node];
        cells.push(k);
        node = p;
    }
    cells.reverse();
    cells
}
