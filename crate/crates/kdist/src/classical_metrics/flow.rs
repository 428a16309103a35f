//! Exact transport between finite supports by successive shortest paths on
//! the bipartite support graph.

use crate::error::{Error, Result};

/// Mass units per unit of probability.
pub const FLOW_SCALE: f64 = 1e12;

const DUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub value: f64,
    pub dual_value: f64,
    /// (source atom, target atom, mass)
    pub plan: Vec<(usize, usize, f64)>,
    /// Potentials f, g with f_i + g_j ≤ c_ij.
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

fn scaled(w: &[f64]) -> Vec<i64> {
    w.iter().map(|x| (x * FLOW_SCALE).round() as i64).collect()
}

fn balance(a: &mut [i64], b: &mut [i64]) -> Result<()> {
    let (sa, sb): (i64, i64) = (a.iter().sum(), b.iter().sum());
    let diff = sa - sb;
    if (diff.abs() as f64) > 1e-8 * FLOW_SCALE {
        return Err(Error::Validation(format!(
            "transport infeasible: masses {} and {} differ",
            sa as f64 / FLOW_SCALE,
            sb as f64 / FLOW_SCALE
        )));
    }
    let side = if diff > 0 { &mut *b } else { &mut *a };
    let j = (0..side.len()).fold(0, |best, j| if side[j] > side[best] { j } else { best });
    side[j] += diff.abs();
    Ok(())
}

fn improves(new: f64, old: f64) -> bool {
    if !old.is_finite() {
        return new < old;
    }
    new < old - 1e-14 * (1.0 + old.abs())
}

/// Minimum of Σ c_ij π_ij over couplings of `a` and `b`.
pub fn transport(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> Result<TransportPlan> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Err(Error::Validation("transport needs non-empty supports".into()));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("non-finite transport cost".into()));
    }
    let (mut supply, mut demand) = (scaled(a), scaled(b));
    balance(&mut supply, &mut demand)?;
    let mut flow = vec![vec![0i64; m]; n];
    // nodes 0..n are sources, n..n+m targets
    loop {
        if supply.iter().all(|&s| s == 0) {
            break;
        }
        let mut dist = vec![f64::INFINITY; n + m];
        let mut pred = vec![usize::MAX; n + m];
        for i in 0..n {
            if supply[i] > 0 {
                dist[i] = 0.0;
            }
        }
        for _ in 0..n + m {
            let mut changed = false;
            for i in 0..n {
                if dist[i].is_finite() {
                    for j in 0..m {
                        let d = dist[i] + cost[i][j];
                        if improves(d, dist[n + j]) {
                            dist[n + j] = d;
                            pred[n + j] = i;
                            changed = true;
                        }
                    }
                }
            }
            for j in 0..m {
                if dist[n + j].is_finite() {
                    for i in 0..n {
                        if flow[i][j] > 0 {
                            let d = dist[n + j] - cost[i][j];
                            if improves(d, dist[i]) {
                                dist[i] = d;
                                pred[i] = n + j;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let target = (0..m)
            .filter(|&j| demand[j] > 0 && dist[n + j].is_finite())
            .min_by(|&x, &y| dist[n + x].partial_cmp(&dist[n + y]).unwrap().then(x.cmp(&y)))
            .ok_or_else(|| Error::Numerical("no augmenting path in transport".into()))?;
        let mut path = vec![n + target];
        let mut v = n + target;
        while !(v < n && pred[v] == usize::MAX) {
            v = pred[v];
            path.push(v);
            if path.len() > 2 * (n + m) + 2 {
                return Err(Error::Numerical("cycle in transport shortest-path tree".into()));
            }
        }
        path.reverse();
        let src = path[0];
        let mut amount = supply[src].min(demand[target]);
        for w in path.windows(2) {
            if w[0] >= n {
                amount = amount.min(flow[w[1]][w[0] - n]);
            }
        }
        for w in path.windows(2) {
            if w[0] < n {
                flow[w[0]][w[1] - n] += amount;
            } else {
                flow[w[1]][w[0] - n] -= amount;
            }
        }
        supply[src] -= amount;
        demand[target] -= amount;
    }

    let mut value = 0.0;
    let mut plan = Vec::new();
    for i in 0..n {
        for j in 0..m {
            if flow[i][j] > 0 {
                let mass = flow[i][j] as f64 / FLOW_SCALE;
                value += mass * cost[i][j];
                plan.push((i, j, mass));
            }
        }
    }

    // potentials from shortest distances in the final residual graph
    let mut pi = vec![0.0f64; n + m];
    for _ in 0..=n + m {
        let mut changed = false;
        for i in 0..n {
            for j in 0..m {
                let d = pi[i] + cost[i][j];
                if improves(d, pi[n + j]) {
                    pi[n + j] = d;
                    changed = true;
                }
                if flow[i][j] > 0 {
                    let d = pi[n + j] - cost[i][j];
                    if improves(d, pi[i]) {
                        pi[i] = d;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let f: Vec<f64> = pi[..n].iter().map(|p| -p).collect();
    let g: Vec<f64> = pi[n..].to_vec();
    let dual_value: f64 =
        a.iter().zip(&f).map(|(w, x)| w * x).sum::<f64>() + b.iter().zip(&g).map(|(w, x)| w * x).sum::<f64>();
    let violation = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| f[i] + g[j] - cost[i][j])
        .fold(0.0f64, f64::max);
    let scale = 1.0 + value.abs();
    if violation > DUAL_TOL * scale || (value - dual_value).abs() > DUAL_TOL * scale {
        return Err(Error::Numerical(format!(
            "transport optimality certificate failed: primal {value}, dual {dual_value}, violation {violation}"
        )));
    }
    Ok(TransportPlan {
        value,
        dual_value,
        plan,
        f,
        g,
    })
}
