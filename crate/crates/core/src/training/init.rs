use crate::model::{ComponentPartition, EmissionConfiguration};
use crate::spectrum::Peak;

/// Greedy nearest-pair matching inside each component: the closest
/// unmatched feasible pair is assigned first, ties going to the lower
/// theoretical and then the lower observed index.
pub fn init_configuration(
    partition: &ComponentPartition,
    theoretical: &[Peak],
    observed: &[Peak],
) -> EmissionConfiguration {
    let mut e = EmissionConfiguration::empty(partition.n);
    for c in &partition.components {
        let mut edges: Vec<(f64, usize, usize)> = c
            .edges
            .iter()
            .map(|&(t, o)| ((observed[o].mz - theoretical[t].mz).abs(), t, o))
            .collect();
        edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut used_o = Vec::new();
        for (_, t, o) in edges {
            if e.get(t).is_none() && !used_o.contains(&o) {
                e.set(t, Some(o));
                used_o.push(o);
            }
        }
    }
    e
}
