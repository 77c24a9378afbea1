//! Coined-free walk diagnostics over a plant communication graph.
//!
//! One qubit per node. Each step applies a Hadamard to every node, a CZ per
//! link, and a Z flip on the marked node, spreading amplitude along the
//! wiring so the marginals reflect how exposed each node is to the marked
//! one. Every step gate is its own inverse, which makes reversal tests cheap.
//!
//! The default topology models a small plant: node 0 is the control host in
//! a star over five field devices, with a ring between the field devices as
//! a redundant path.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{Circuit, GateOp, Statevector, MAX_QUBITS};

/// Undirected graph with one marked node. Edges are stored normalized
/// (low, high), deduplicated, sorted ascending, so circuit construction and
/// file export are deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    marked: usize,
}

impl Topology {
    pub fn new(n_nodes: usize, edges: &[(usize, usize)], marked: usize) -> Result<Self> {
        if n_nodes == 0 || n_nodes > MAX_QUBITS {
            return Err(Error::config(format!(
                "node count {n_nodes} outside 1..={MAX_QUBITS}"
            )));
        }
        if marked >= n_nodes {
            return Err(Error::usage(format!(
                "marked node {marked} outside 0..{n_nodes}"
            )));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::usage(format!(
                    "edge ({u}, {v}) outside 0..{n_nodes}"
                )));
            }
            if u == v {
                return Err(Error::usage(format!("self-loop on node {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(Topology {
            n_nodes,
            edges: normalized,
            marked,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Normalized, ascending edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn marked(&self) -> usize {
        self.marked
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| u == node || v == node)
            .count()
    }

    /// Same graph with node `i` renamed to `perm[i]`. `perm` must be a
    /// permutation of 0..n_nodes.
    pub fn relabel(&self, perm: &[usize]) -> Result<Topology> {
        if perm.len() != self.n_nodes {
            return Err(Error::usage("permutation length != node count"));
        }
        let mut seen = vec![false; self.n_nodes];
        for &p in perm {
            if p >= self.n_nodes || seen[p] {
                return Err(Error::usage("not a permutation"));
            }
            seen[p] = true;
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        Topology::new(self.n_nodes, &edges, perm[self.marked])
    }

    /// Parses the plain text format: a first line `nodes N marked M`
    /// followed by one `u v` pair per line. Blank lines and `#` comments are
    /// skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Topology> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if header.is_none() {
                if fields.len() != 4 || fields[0] != "nodes" || fields[2] != "marked" {
                    return Err(Error::parse(
                        line_no,
                        format!("expected `nodes N marked M`, got `{line}`"),
                    ));
                }
                let n = fields[1].parse().map_err(|_| {
                    Error::parse(line_no, format!("bad node count `{}`", fields[1]))
                })?;
                let m = fields[3].parse().map_err(|_| {
                    Error::parse(line_no, format!("bad marked node `{}`", fields[3]))
                })?;
                header = Some((n, m));
                continue;
            }
            if fields.len() != 2 {
                return Err(Error::parse(
                    line_no,
                    format!("expected `u v`, got `{line}`"),
                ));
            }
            let u = fields[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad endpoint `{}`", fields[0])))?;
            let v = fields[1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad endpoint `{}`", fields[1])))?;
            edges.push((u, v));
        }
        let (n_nodes, marked) =
            header.ok_or_else(|| Error::schema("topology file has no header line"))?;
        Topology::new(n_nodes, &edges, marked)
    }

    /// Text form readable by `from_file`.
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes {} marked {}\n", self.n_nodes, self.marked);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Six-node plant graph: control host 0 linked to every field device
/// (star), plus a ring over devices 1..=5.
pub fn default_topology() -> Topology {
    let edges = [
        (0, 1),
        (0, 2),
        (0, 3),
        (0, 4),
        (0, 5),
        (1, 2),
        (2, 3),
        (3, 4),
        (4, 5),
        (1, 5),
    ];
    Topology::new(6, &edges, 0).expect("static topology is valid")
}

/// Walk circuit: per step, H on every node, CZ per edge (ascending order),
/// Z on the marked node. `steps` must be at least 1.
pub fn build_walk_circuit(topology: &Topology, steps: usize) -> Result<Circuit> {
    if steps == 0 {
        return Err(Error::usage("walk needs at least one step"));
    }
    let n = topology.n_nodes();
    let mut circuit = Circuit::new(n)?;
    for _ in 0..steps {
        for q in 0..n {
            circuit.push(GateOp::H { qubit: q })?;
        }
        for &(u, v) in topology.edges() {
            circuit.push(GateOp::Cz { a: u, b: v })?;
        }
        circuit.push(GateOp::Z {
            qubit: topology.marked(),
        })?;
    }
    Ok(circuit)
}

/// Per-node probability of reading 1, i.e. the marginal over each qubit.
pub fn node_marginals(state: &Statevector) -> Vec<f64> {
    let n = state.n_qubits();
    let probs = state.probabilities();
    (0..n)
        .map(|q| {
            let mask = 1usize << q;
            probs
                .iter()
                .enumerate()
                .filter(|(i, _)| i & mask != 0)
                .map(|(_, p)| p)
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::NORM_TOL;
    use num_complex::Complex64;

    #[test]
    fn default_topology_shape() {
        let topo = default_topology();
        assert_eq!(topo.n_nodes(), 6);
        assert_eq!(topo.marked(), 0);
        assert_eq!(topo.edges().len(), 10);
        assert_eq!(topo.degree(0), 5);
        for node in 1..6 {
            assert_eq!(topo.degree(node), 3);
        }
    }

    #[test]
    fn edges_are_normalized_and_deduplicated() {
        let topo = Topology::new(3, &[(2, 0), (0, 2), (1, 0)], 0).unwrap();
        assert_eq!(topo.edges(), &[(0, 1), (0, 2)]);
    }

    #[test]
    fn invalid_graphs_are_rejected() {
        assert!(Topology::new(0, &[], 0).is_err());
        assert!(Topology::new(13, &[], 0).is_err());
        assert!(Topology::new(3, &[], 3).is_err());
        assert!(Topology::new(3, &[(0, 3)], 0).is_err());
        assert!(Topology::new(3, &[(1, 1)], 0).is_err());
    }

    #[test]
    fn one_step_circuit_gate_count() {
        let c = build_walk_circuit(&default_topology(), 1).unwrap();
        // 6 H + 10 CZ + 1 Z.
        assert_eq!(c.len(), 17);
        let c3 = build_walk_circuit(&default_topology(), 3).unwrap();
        assert_eq!(c3.len(), 51);
    }

    #[test]
    fn zero_steps_is_usage_error() {
        assert!(matches!(
            build_walk_circuit(&default_topology(), 0),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn edgeless_graph_step_is_h_layer_plus_mark() {
        let topo = Topology::new(6, &[], 0).unwrap();
        let c = build_walk_circuit(&topo, 1).unwrap();
        assert_eq!(c.len(), 7);
    }

    #[test]
    fn walk_preserves_norm_over_many_steps() {
        let c = build_walk_circuit(&default_topology(), 32).unwrap();
        let state = c.run().unwrap();
        assert!((state.norm() - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn walk_then_inverse_returns_to_ground_state() {
        let c = build_walk_circuit(&default_topology(), 3).unwrap();
        let mut state = c.run().unwrap();
        c.inverse().apply_to(&mut state).unwrap();
        assert!((state.amplitudes()[0] - Complex64::ONE).norm() < 1e-10);
        for amp in &state.amplitudes()[1..] {
            assert!(amp.norm() < 1e-10);
        }
    }

    #[test]
    fn marginals_of_basis_and_uniform_states() {
        let state = Statevector::new(6).unwrap();
        for m in node_marginals(&state) {
            assert_eq!(m, 0.0);
        }
        let mut uniform = Statevector::new(6).unwrap();
        for q in 0..6 {
            uniform.apply(&GateOp::H { qubit: q }).unwrap();
        }
        for m in node_marginals(&uniform) {
            assert!((m - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn relabeling_nodes_permutes_marginals() {
        let topo = default_topology();
        let perm = [3, 0, 5, 1, 4, 2];
        let relabeled = topo.relabel(&perm).unwrap();

        let state = build_walk_circuit(&topo, 3).unwrap().run().unwrap();
        let state_p = build_walk_circuit(&relabeled, 3).unwrap().run().unwrap();
        let m = node_marginals(&state);
        let mp = node_marginals(&state_p);
        for node in 0..6 {
            assert!((m[node] - mp[perm[node]]).abs() < 1e-10);
        }
    }

    #[test]
    fn topology_file_round_trip() {
        let topo = default_topology();
        let file = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(file.path(), topo.to_text()).unwrap();
        let back = Topology::from_file(file.path()).unwrap();
        assert_eq!(back, topo);
    }

    #[test]
    fn topology_file_parse_errors_name_lines() {
        let file = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(file.path(), "nodes 3 marked 0\n0 1\n1 x\n").unwrap();
        match Topology::from_file(file.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }

        std::fs::write(file.path(), "# only a comment\n").unwrap();
        assert!(matches!(
            Topology::from_file(file.path()),
            Err(Error::Schema(_))
        ));
    }
}
