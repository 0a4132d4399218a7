//! Graphviz rendering of open parity games.

use std::fmt::Write;

use crate::opg::OpenParityGame;
use crate::solver::Owner;

/// Renders the game as a `dot` digraph. Nodes of the left player are drawn
/// as circles, nodes of the right player as diamonds, and every edge is
/// labeled with its priority. Interface nodes are labeled by their role
/// (`in.r1`, `out.l2`, ...), all others as `v<id>`. Output is ordered by
/// node id, so equal games render to equal bytes.
pub fn emit_dot(name: &str, game: &OpenParityGame) -> String {
    let n = game.game().num_nodes();
    let mut labels: Vec<String> = (0..n).map(|id| format!("v{id}")).collect();
    let interface = game.interface();
    for (i, &node) in interface.entrances_right.iter().enumerate() {
        labels[node] = format!("in.r{}", i + 1);
    }
    for (i, &node) in interface.entrances_left.iter().enumerate() {
        labels[node] = format!("in.l{}", i + 1);
    }
    for (i, &node) in interface.exits_right.iter().enumerate() {
        labels[node] = format!("out.r{}", i + 1);
    }
    for (i, &node) in interface.exits_left.iter().enumerate() {
        labels[node] = format!("out.l{}", i + 1);
    }

    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    let _ = writeln!(out, "  rankdir=LR;");
    for id in 0..n {
        let shape = match game.game().owner(id) {
            Owner::Exists => "circle",
            Owner::Forall => "diamond",
        };
        let _ = writeln!(out, "  n{id} [label=\"{}\", shape={shape}];", labels[id]);
    }
    for edge in game.game().edges() {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            edge.from, edge.to, edge.priority
        );
    }
    out.push_str("}\n");
    out
}
