//! Equivalence checking of hybrid quantum circuits.
//!
//! Hybrid circuits mix unitary gates with qubit initialisation, measurement,
//! discard, and classically controlled instructions. This crate decides
//! functional equivalence of such circuits by normalising both sides with
//! the deferred-measurement transformation, then checking partial
//! equivalence of the resulting unitary blocks with a path-sum rewrite
//! engine: initialised qubits are handled by projection, discarded qubits by
//! separation of the path-sum into kept and discarded factors.
//!
//! The main entry point is [`equiv::check_hybrid`]; circuits come from
//! [`qasm::parse`] or are built directly with [`circuit::HybridCircuit`].
//! A dense density-matrix simulator ([`oracle`]) serves as an independent
//! test oracle at small scale.

pub mod challenge;
pub mod circuit;
pub mod defer;
pub mod equiv;
pub mod cli;
pub mod oracle;
pub mod pathsum;
pub mod qasm;
pub mod report;
