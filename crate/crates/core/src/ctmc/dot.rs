use std::fmt::Write;

use super::{enumerate_states, is_operational, SystemState};
use crate::architecture::ArchitectureSpec;

/// Phase diagram of the chain in DOT format.
///
/// Nodes are labeled `m,s`; operational states are drawn with a double
/// border. Edges carry symbolic rates such as `3λM` or `λS`.
pub fn export_dot(spec: &ArchitectureSpec) -> String {
    let states = enumerate_states(spec);
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", spec.label()).unwrap();
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle, fontname=\"Helvetica\"];\n");
    out.push_str("  edge [fontname=\"Helvetica\"];\n");
    for (i, st) in states.iter() {
        let shape = if is_operational(spec, st) {
            ", shape=doublecircle"
        } else {
            ""
        };
        writeln!(out, "  s{i} [label=\"{},{}\"{shape}];", st.m, st.s).unwrap();
    }
    for (i, st) in states.iter() {
        if st.m > 0 {
            let j = states.index_of(SystemState::new(st.m - 1, st.s)).unwrap();
            writeln!(out, "  s{i} -> s{j} [label=\"{}\"];", symbolic_rate(st.m, "λM")).unwrap();
        }
        if st.s > 0 {
            let j = states.index_of(SystemState::new(st.m, st.s - 1)).unwrap();
            writeln!(out, "  s{i} -> s{j} [label=\"{}\"];", symbolic_rate(st.s, "λS")).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

fn symbolic_rate(multiplicity: u32, symbol: &str) -> String {
    if multiplicity == 1 {
        symbol.to_string()
    } else {
        format!("{multiplicity}{symbol}")
    }
}
