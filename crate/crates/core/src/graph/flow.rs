use super::{pair, MultiGraph, Pair};
use std::collections::BTreeMap;

/// Directed demand between vertex pairs. Entries with `u == v` are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Demand {
    entries: BTreeMap<(usize, usize), f64>,
}

impl Demand {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (usize, usize, f64)>>(entries: I) -> Self {
        let mut d = Self::new();
        for (u, v, x) in entries {
            d.add(u, v, x);
        }
        d
    }

    /// Unit demand `v -> perm[v]` for every non-fixed point.
    pub fn permutation(perm: &[usize]) -> Self {
        Self::from_entries(perm.iter().enumerate().map(|(u, &v)| (u, v, 1.0)))
    }

    pub fn add(&mut self, u: usize, v: usize, value: f64) {
        assert!(value >= 0.0 && value.is_finite(), "demand values must be nonnegative");
        if u == v || value == 0.0 {
            return;
        }
        *self.entries.entry((u, v)).or_insert(0.0) += value;
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.entries.get(&(u, v)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &x)| (k, x))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|D|`.
    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn max_vertex(&self) -> Option<usize> {
        self.entries.keys().map(|&(u, v)| u.max(v)).max()
    }

    /// Every vertex sends at most 1 and receives at most 1.
    pub fn is_unit(&self, n: usize) -> bool {
        let mut out = vec![0.0; n];
        let mut inc = vec![0.0; n];
        for (&(u, v), &x) in &self.entries {
            out[u] += x;
            inc[v] += x;
        }
        out.iter().chain(&inc).all(|&x| x <= 1.0 + 1e-9)
    }

    /// Positive only between pairs at distance at most `h`.
    pub fn is_h_hop(&self, g: &MultiGraph, h: usize) -> bool {
        self.entries
            .keys()
            .all(|&(u, v)| g.dist(u, v).is_some_and(|d| d <= h))
    }
}

/// Path flow: simple vertex paths with positive values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flow {
    paths: BTreeMap<Vec<usize>, f64>,
}

impl Flow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_path(&mut self, path: Vec<usize>, value: f64) {
        assert!(path.len() >= 2, "a flow path needs two endpoints");
        if value > 0.0 {
            *self.paths.entry(path).or_insert(0.0) += value;
        }
    }

    pub fn paths(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.paths.iter().map(|(p, &x)| (p.as_slice(), x))
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// `val(F)`.
    pub fn value(&self) -> f64 {
        self.paths.values().sum()
    }

    /// `D_F`: the demand this flow routes.
    pub fn routed_demand(&self) -> Demand {
        Demand::from_entries(
            self.paths
                .iter()
                .map(|(p, &x)| (p[0], *p.last().unwrap(), x)),
        )
    }

    /// Total flow per undirected vertex pair.
    pub fn pair_loads(&self) -> BTreeMap<Pair, f64> {
        let mut loads = BTreeMap::new();
        for (p, &x) in &self.paths {
            for w in p.windows(2) {
                *loads.entry(pair(w[0], w[1])).or_insert(0.0) += x;
            }
        }
        loads
    }

    /// `CONGEST_F`: the largest per-copy load over all bundles.
    pub fn congestion(&self, g: &MultiGraph) -> f64 {
        let bundles = g.bundles();
        self.pair_loads()
            .into_iter()
            .map(|(e, load)| match bundles.get(&e) {
                Some(&m) => load / m as f64,
                None => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// `hop_F`.
    pub fn max_hop(&self) -> usize {
        self.paths.keys().map(|p| p.len() - 1).max().unwrap_or(0)
    }

    /// Every path is simple and follows edges of `g`.
    pub fn is_valid_in(&self, g: &MultiGraph) -> bool {
        self.paths.iter().all(|(p, &x)| {
            let mut seen = p.clone();
            seen.sort_unstable();
            seen.dedup();
            x > 0.0
                && seen.len() == p.len()
                && p.iter().all(|&v| v < g.n())
                && p.windows(2).all(|w| g.multiplicity(w[0], w[1]) > 0)
        })
    }
}

/// A flow together with its measured hop length and congestion.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingWitness {
    pub flow: Flow,
    pub max_hop: usize,
    pub max_congestion: f64,
    /// `false` when produced by the approximate backend.
    pub exact: bool,
}

impl RoutingWitness {
    pub fn from_flow(flow: Flow, g: &MultiGraph, exact: bool) -> Self {
        Self {
            max_hop: flow.max_hop(),
            max_congestion: flow.congestion(g),
            flow,
            exact,
        }
    }

    /// Recomputes every field from the raw paths and checks it against the
    /// query. Returns a description of the first mismatch.
    pub fn check(&self, g: &MultiGraph, d: &Demand, t: usize, eta: f64) -> Result<(), String> {
        if !self.flow.is_valid_in(g) {
            return Err("flow contains an invalid path".into());
        }
        if self.flow.max_hop() != self.max_hop {
            return Err("recorded hop length differs from recount".into());
        }
        if (self.flow.congestion(g) - self.max_congestion).abs() > 1e-9 {
            return Err("recorded congestion differs from recount".into());
        }
        if self.max_hop > t {
            return Err(format!("hop length {} exceeds {t}", self.max_hop));
        }
        if self.max_congestion > eta + 1e-6 {
            return Err(format!("congestion {} exceeds {eta}", self.max_congestion));
        }
        let routed = self.flow.routed_demand();
        for ((u, v), x) in d.entries().chain(routed.entries()) {
            if (routed.get(u, v) - d.get(u, v)).abs() > 1e-6 {
                return Err(format!("pair ({u},{v}) routes {} of {x}", routed.get(u, v)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demand_predicates() {
        let g = MultiGraph::path(4);
        let d = Demand::from_entries([(0, 1, 1.0), (1, 3, 0.5), (2, 2, 7.0)]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.total(), 1.5);
        assert!(d.is_unit(4));
        assert!(d.is_h_hop(&g, 2));
        assert!(!d.is_h_hop(&g, 1));
        let heavy = Demand::from_entries([(0, 1, 1.0), (0, 2, 0.5)]);
        assert!(!heavy.is_unit(4));
    }

    #[test]
    fn flow_measurements() {
        let g = MultiGraph::from_edges(3, &[(0, 1), (0, 1), (1, 2)]).unwrap();
        let mut f = Flow::new();
        f.add_path(vec![0, 1, 2], 1.0);
        f.add_path(vec![1, 0], 0.5);
        assert_eq!(f.max_hop(), 2);
        assert_eq!(f.congestion(&g), 1.0);
        assert_eq!(f.pair_loads()[&(0, 1)], 1.5);
        assert!(f.is_valid_in(&g));
        let d = f.routed_demand();
        assert_eq!(d.get(0, 2), 1.0);
        assert_eq!(d.get(1, 0), 0.5);
        let w = RoutingWitness::from_flow(f, &g, true);
        assert!(w.check(&g, &d, 2, 1.0).is_ok());
        assert!(w.check(&g, &d, 1, 1.0).is_err());
        assert!(w.check(&g, &Demand::from_entries([(0, 2, 1.0)]), 2, 1.0).is_err());
    }

    #[test]
    fn invalid_paths_detected() {
        let g = MultiGraph::path(3);
        let mut f = Flow::new();
        f.add_path(vec![0, 2], 1.0);
        assert!(!f.is_valid_in(&g));
        assert_eq!(f.congestion(&g), f64::INFINITY);
        let mut loopy = Flow::new();
        loopy.add_path(vec![0, 1, 0], 1.0);
        assert!(!loopy.is_valid_in(&g));
    }
}
