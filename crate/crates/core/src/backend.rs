//! Backend models: native gate set, size, connectivity and gate time.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("unknown backend `{0}` (presets: allsim, superconducting-53, ion-40)")]
    Unknown(String),
    #[error("cannot read backend file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed backend description: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("backend `{name}`: {reason}")]
    Invalid { name: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum CouplingSpec {
    All(String),
    Pairs(Vec<[usize; 2]>),
}

#[derive(Serialize, Deserialize)]
struct BackendFile {
    name: String,
    qubit_count: usize,
    native_gates: Vec<String>,
    coupling_map: CouplingSpec,
    gate_time_ns: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackendModel {
    pub name: String,
    pub qubit_count: usize,
    pub native_gates: BTreeSet<String>,
    /// Undirected coupled pairs, `None` for all-to-all.
    pub coupling_map: Option<Vec<(usize, usize)>>,
    /// Duration of one depth step in nanoseconds. Pure simulators have none.
    pub gate_time_ns: Option<f64>,
}

const PRESETS: [(&str, &str); 3] = [
    ("allsim", include_str!("../backends/allsim.json")),
    ("superconducting-53", include_str!("../backends/superconducting-53.json")),
    ("ion-40", include_str!("../backends/ion-40.json")),
];

impl BackendModel {
    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    pub fn preset(name: &str) -> Result<Self, BackendError> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| BackendError::Unknown(name.to_string()))?;
        Self::from_json(text)
    }

    /// A preset name, or a path to a JSON description.
    pub fn resolve(name_or_path: &str) -> Result<Self, BackendError> {
        if PRESETS.iter().any(|(n, _)| *n == name_or_path) {
            return Self::preset(name_or_path);
        }
        let path = Path::new(name_or_path);
        if path.extension().is_some_and(|e| e == "json") || path.exists() {
            return Self::load(path);
        }
        Err(BackendError::Unknown(name_or_path.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path).map_err(|source| BackendError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let f: BackendFile = serde_json::from_str(text)?;
        let invalid = |reason: String| BackendError::Invalid {
            name: f.name.clone(),
            reason,
        };
        let coupling_map = match &f.coupling_map {
            CouplingSpec::All(s) if s == "all" => None,
            CouplingSpec::All(s) => return Err(invalid(format!("coupling_map must be \"all\" or a pair list, got `{s}`"))),
            CouplingSpec::Pairs(p) => Some(p.iter().map(|&[a, b]| (a, b)).collect()),
        };
        let model = Self {
            name: f.name.clone(),
            qubit_count: f.qubit_count,
            native_gates: f.native_gates.iter().cloned().collect(),
            coupling_map,
            gate_time_ns: f.gate_time_ns,
        };
        model.check().map_err(invalid)?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let f = BackendFile {
            name: self.name.clone(),
            qubit_count: self.qubit_count,
            native_gates: self.native_gates.iter().cloned().collect(),
            coupling_map: match &self.coupling_map {
                None => CouplingSpec::All("all".into()),
                Some(p) => CouplingSpec::Pairs(p.iter().map(|&(a, b)| [a, b]).collect()),
            },
            gate_time_ns: self.gate_time_ns,
        };
        serde_json::to_string_pretty(&f).expect("backend serializes")
    }

    fn check(&self) -> Result<(), String> {
        if self.qubit_count == 0 {
            return Err("qubit_count must be positive".into());
        }
        if let Some(t) = self.gate_time_ns {
            if !(t > 0.0 && t.is_finite()) {
                return Err(format!("gate_time_ns must be positive, got {t}"));
            }
        }
        if let Some(pairs) = &self.coupling_map {
            for &(a, b) in pairs {
                if a >= self.qubit_count || b >= self.qubit_count || a == b {
                    return Err(format!("bad coupling pair ({a}, {b})"));
                }
            }
            if !self.is_connected() {
                return Err("coupling map is not connected".into());
            }
        }
        Ok(())
    }

    pub fn is_native(&self, name: &str) -> bool {
        self.native_gates.contains(name)
    }

    pub fn is_all_to_all(&self) -> bool {
        self.coupling_map.is_none()
    }

    /// Sorted neighbour lists; every qubit is its own island on an empty map.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.qubit_count];
        match &self.coupling_map {
            None => {
                for (a, list) in adj.iter_mut().enumerate() {
                    list.extend((0..self.qubit_count).filter(|&b| b != a));
                }
            }
            Some(pairs) => {
                for &(a, b) in pairs {
                    adj[a].push(b);
                    adj[b].push(a);
                }
                for list in &mut adj {
                    list.sort_unstable();
                    list.dedup();
                }
            }
        }
        adj
    }

    pub fn coupled(&self, a: usize, b: usize) -> bool {
        match &self.coupling_map {
            None => a != b,
            Some(p) => p.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)),
        }
    }

    fn is_connected(&self) -> bool {
        bfs_order(&self.adjacency(), 0).len() == self.qubit_count
    }
}

/// Breadth-first visiting order from `start`, neighbours in ascending order.
pub fn bfs_order(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut order = Vec::with_capacity(adj.len());
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    order
}

/// Shortest path `from → to` (inclusive). Ties go to the lowest-index
/// neighbour because neighbours are explored in ascending order.
pub fn shortest_path(adj: &[Vec<usize>], from: usize, to: usize) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([from]);
    parent[from] = from;
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &v in &adj[u] {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}
