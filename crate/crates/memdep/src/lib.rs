//! File formats, Graphviz output, a seeded corpus generator and the
//! command-line driver built on `memdep_core`.

pub mod cli;
pub mod corpus;
pub mod textio;
