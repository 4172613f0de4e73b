//! Workloads shared by the acceptance suite.

use rtzsim::adders::{build_handshake_system, build_rca, FullAdderKind, SystemModel};
use rtzsim::sim::{all_codewords, Operands};

pub fn system(kind: FullAdderKind, width: usize) -> SystemModel {
    build_handshake_system(build_rca(width, kind.design().as_ref()))
}

/// Every input codeword of a `width`-bit adder with carry-in.
pub fn codewords(width: usize) -> Vec<Operands> {
    all_codewords(width).expect("width within enumeration limits")
}

/// Every ordered pair of codewords, back to back.
pub fn ordered_pairs(width: usize) -> Vec<Operands> {
    let cw = codewords(width);
    cw.iter().flat_map(|x| cw.iter().flat_map(move |y| [*x, *y])).collect()
}
