pub mod cli;
pub mod coloring;
pub mod oracle;
pub mod partition;
pub mod program;
pub mod rdg;
pub mod runtime;
pub mod toy;
