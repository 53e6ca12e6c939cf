//! Connected components of the bipartite "within `w`" graph between
//! theoretical and observed peaks, and enumeration of the partial injections
//! inside each component.
//!
//! Components never share an observed peak, so a configuration is the
//! independent choice of one partial injection per component.

use log::warn;

use crate::error::{Error, Result};
use crate::spectrum::Peak;

/// Components whose configuration count exceeds this are pruned.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 1_000_000;

/// Partial injection restricted to one component, as global
/// `(theoretical, observed)` index pairs.
pub type ComponentConfig = Vec<(usize, usize)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Theoretical indices, ascending.
    pub theoretical: Vec<usize>,
    /// Observed indices reachable from `theoretical`, ascending.
    pub observed: Vec<usize>,
    /// Feasible `(theoretical, observed)` pairs.
    pub edges: Vec<(usize, usize)>,
    /// Every partial injection along `edges`, the empty one first.
    pub configurations: Vec<ComponentConfig>,
}

/// An edge removed to keep a component enumerable.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedEdge {
    pub theoretical: usize,
    pub observed: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPartition {
    pub n: usize,
    pub m: usize,
    pub components: Vec<Component>,
    pub dropped: Vec<DroppedEdge>,
}

impl ComponentPartition {
    /// Number of joint configurations, saturating at `usize::MAX`.
    pub fn total_configurations(&self) -> usize {
        self.components
            .iter()
            .fold(1usize, |acc, c| acc.saturating_mul(c.configurations.len()))
    }

    /// Index of the component holding each theoretical peak.
    pub fn component_of_theoretical(&self) -> Vec<usize> {
        let mut owner = vec![usize::MAX; self.n];
        for (g, c) in self.components.iter().enumerate() {
            for &t in &c.theoretical {
                owner[t] = g;
            }
        }
        owner
    }
}

/// Components with enumerated configurations, pruning oversized ones with
/// [`DEFAULT_ENUMERATION_BUDGET`].
pub fn build_components(theoretical: &[Peak], observed: &[Peak], w: f64) -> ComponentPartition {
    build_components_bounded(theoretical, observed, w, DEFAULT_ENUMERATION_BUDGET, true)
        .expect("pruning keeps every component within budget")
}

/// Like [`build_components`] with an explicit budget. With `prune` unset an
/// oversized component is an [`Error::EnumerationOverflow`]; with it set the
/// longest edges of that component are dropped (and logged) until it fits.
pub fn build_components_bounded(
    theoretical: &[Peak],
    observed: &[Peak],
    w: f64,
    budget: usize,
    prune: bool,
) -> Result<ComponentPartition> {
    let n = theoretical.len();
    let m = observed.len();
    let mut edges = Vec::new();
    for (t, tp) in theoretical.iter().enumerate() {
        for (o, op) in observed.iter().enumerate() {
            if (op.mz - tp.mz).abs() <= w {
                edges.push((t, o));
            }
        }
    }

    let mut components = Vec::new();
    let mut dropped = Vec::new();
    for mut comp in connected(n, &edges) {
        if count_configurations(&comp, budget) > budget {
            if !prune {
                return Err(Error::EnumerationOverflow {
                    theoretical: comp.theoretical.len(),
                    observed: comp.observed.len(),
                    budget,
                });
            }
            let distance = |&(t, o): &(usize, usize)| (observed[o].mz - theoretical[t].mz).abs();
            while count_configurations(&comp, budget) > budget {
                let (idx, _) = comp
                    .edges
                    .iter()
                    .enumerate()
                    .max_by(|a, b| distance(a.1).total_cmp(&distance(b.1)).then(a.1.cmp(b.1)))
                    .expect("an oversized component has edges");
                let (t, o) = comp.edges.remove(idx);
                let d = (observed[o].mz - theoretical[t].mz).abs();
                warn!("enumeration budget {budget}: dropping edge theoretical {t} -> observed {o} ({d:.4} Da)");
                dropped.push(DroppedEdge {
                    theoretical: t,
                    observed: o,
                    distance: d,
                });
            }
            let pieces = connected(n, &comp.edges);
            for mut piece in pieces {
                if comp.theoretical.contains(&piece.theoretical[0]) {
                    piece.configurations = enumerate_configurations(&piece, budget)?;
                    components.push(piece);
                }
            }
            continue;
        }
        comp.configurations = enumerate_configurations(&comp, budget)?;
        components.push(comp);
    }
    components.sort_by_key(|c| c.theoretical[0]);
    Ok(ComponentPartition {
        n,
        m,
        components,
        dropped,
    })
}

/// Connected components over theoretical peaks; isolated peaks become
/// singletons with no observed peaks.
fn connected(n: usize, edges: &[(usize, usize)]) -> Vec<Component> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut claimed: std::collections::BTreeMap<usize, usize> = Default::default();
    for &(t, o) in edges {
        if let Some(&other) = claimed.get(&o) {
            let (a, b) = (find(&mut parent, t), find(&mut parent, other));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        } else {
            claimed.insert(o, t);
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Component> = Default::default();
    for t in 0..n {
        let root = find(&mut parent, t);
        by_root
            .entry(root)
            .or_insert_with(|| Component {
                theoretical: Vec::new(),
                observed: Vec::new(),
                edges: Vec::new(),
                configurations: Vec::new(),
            })
            .theoretical
            .push(t);
    }
    for &(t, o) in edges {
        let root = find(&mut parent, t);
        let c = by_root.get_mut(&root).expect("every peak has a root");
        c.edges.push((t, o));
        c.observed.push(o);
    }
    let mut out: Vec<Component> = by_root.into_values().collect();
    for c in &mut out {
        c.observed.sort_unstable();
        c.observed.dedup();
        c.edges.sort_unstable();
    }
    out
}

fn adjacency(c: &Component) -> Vec<Vec<usize>> {
    c.theoretical
        .iter()
        .map(|&t| c.edges.iter().filter(|e| e.0 == t).map(|e| e.1).collect())
        .collect()
}

/// Number of partial injections in `c`, or `cap + 1` once it exceeds `cap`.
pub fn count_configurations(c: &Component, cap: usize) -> usize {
    fn go(adj: &[Vec<usize>], i: usize, used: &mut Vec<usize>, cap: usize, acc: &mut usize) {
        if *acc > cap {
            return;
        }
        if i == adj.len() {
            *acc += 1;
            return;
        }
        go(adj, i + 1, used, cap, acc);
        for &o in &adj[i] {
            if !used.contains(&o) {
                used.push(o);
                go(adj, i + 1, used, cap, acc);
                used.pop();
            }
        }
    }
    let adj = adjacency(c);
    let mut acc = 0;
    go(&adj, 0, &mut Vec::new(), cap, &mut acc);
    acc
}

/// All partial injections from the component's theoretical peaks into its
/// observed peaks along feasible edges, including the empty map.
pub fn enumerate_configurations(c: &Component, budget: usize) -> Result<Vec<ComponentConfig>> {
    let count = count_configurations(c, budget);
    if count > budget {
        return Err(Error::EnumerationOverflow {
            theoretical: c.theoretical.len(),
            observed: c.observed.len(),
            budget,
        });
    }
    fn go(
        c: &Component,
        adj: &[Vec<usize>],
        i: usize,
        current: &mut ComponentConfig,
        out: &mut Vec<ComponentConfig>,
    ) {
        if i == adj.len() {
            out.push(current.clone());
            return;
        }
        go(c, adj, i + 1, current, out);
        for &o in &adj[i] {
            if !current.iter().any(|&(_, used)| used == o) {
                current.push((c.theoretical[i], o));
                go(c, adj, i + 1, current, out);
                current.pop();
            }
        }
    }
    let adj = adjacency(c);
    let mut out = Vec::with_capacity(count);
    go(c, &adj, 0, &mut Vec::new(), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn peaks(mzs: &[f64]) -> Vec<Peak> {
        mzs.iter().map(|&m| Peak::new(m, 1.0)).collect()
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    fn full_count(a: u64, b: u64) -> u64 {
        (0..=a.min(b))
            .map(|k| binomial(a, k) * binomial(b, k) * (1..=k).product::<u64>())
            .sum()
    }

    #[test]
    fn isolated_peaks_are_singletons() {
        let p = build_components(&peaks(&[100.0, 200.0]), &peaks(&[150.0, 300.0]), 2.0);
        assert_eq!(p.components.len(), 2);
        for c in &p.components {
            assert!(c.observed.is_empty());
            assert_eq!(c.configurations, vec![Vec::<(usize, usize)>::new()]);
        }
    }

    #[test]
    fn one_theoretical_two_observed() {
        let p = build_components(&peaks(&[100.0]), &peaks(&[99.0, 101.5, 400.0]), 2.0);
        assert_eq!(p.components.len(), 1);
        assert_eq!(p.components[0].configurations.len(), 3);
        assert_eq!(p.components[0].observed, vec![0, 1]);
    }

    #[test]
    fn two_by_two_gives_seven() {
        let p = build_components(&peaks(&[100.0, 100.5]), &peaks(&[100.2, 100.9]), 2.0);
        assert_eq!(p.components.len(), 1);
        assert_eq!(p.components[0].configurations.len(), 7);
        assert_eq!(full_count(2, 2), 7);
    }

    #[test]
    fn fully_connected_counts_match_formula() {
        for a in 1..=4usize {
            for b in 0..=5usize {
                let t: Vec<f64> = (0..a).map(|i| 100.0 + 0.1 * i as f64).collect();
                let o: Vec<f64> = (0..b).map(|j| 100.05 + 0.1 * j as f64).collect();
                let p = build_components(&peaks(&t), &peaks(&o), 2.0);
                let total = p.total_configurations() as u64;
                assert_eq!(total, full_count(a as u64, b as u64), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn empty_component_has_one_configuration() {
        let c = Component {
            theoretical: vec![0],
            observed: vec![],
            edges: vec![],
            configurations: vec![],
        };
        assert_eq!(enumerate_configurations(&c, 10).unwrap().len(), 1);
    }

    #[test]
    fn chained_components_merge_through_shared_observed() {
        // T0 -- O0 -- T1 -- O1 -- T2 chain, plus a separate pair
        let t = peaks(&[100.0, 103.0, 106.0, 500.0]);
        let o = peaks(&[101.5, 104.5, 500.5]);
        let p = build_components(&t, &o, 2.0);
        assert_eq!(p.components.len(), 2);
        assert_eq!(p.components[0].theoretical, vec![0, 1, 2]);
        assert_eq!(p.components[0].observed, vec![0, 1]);
        let mut seen = std::collections::HashSet::new();
        for c in &p.components {
            for &o in &c.observed {
                assert!(seen.insert(o));
            }
        }
    }

    #[test]
    fn overflow_errors_or_prunes() {
        let t: Vec<f64> = (0..6).map(|i| 100.0 + 0.01 * i as f64).collect();
        let o: Vec<f64> = (0..6).map(|j| 100.005 + 0.01 * j as f64).collect();
        let err = build_components_bounded(&peaks(&t), &peaks(&o), 2.0, 1000, false).unwrap_err();
        assert!(matches!(err, Error::EnumerationOverflow { theoretical: 6, observed: 6, .. }));
        let p = build_components_bounded(&peaks(&t), &peaks(&o), 2.0, 1000, true).unwrap();
        assert!(!p.dropped.is_empty());
        for c in &p.components {
            assert!(c.configurations.len() <= 1000);
        }
        let max_kept = p
            .components
            .iter()
            .flat_map(|c| c.edges.iter())
            .map(|&(a, b)| (o[b] - t[a]).abs())
            .fold(0.0, f64::max);
        let min_dropped = p.dropped.iter().map(|d| d.distance).fold(f64::INFINITY, f64::min);
        assert!(max_kept <= min_dropped);
    }
}
