pub mod error;
pub mod group;
pub mod shape;
pub mod presentation;
pub mod automaton;
pub mod dovetail;
pub mod language;
pub mod ca;
pub mod csp;
pub mod track;
pub mod projection;
pub mod expr;
pub mod maps;
pub mod oracle;
pub mod zoo;

#[cfg(test)]
mod fixtures;
