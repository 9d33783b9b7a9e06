//! Space-time diagrams of one-dimensional automata as text or portable graymaps.

use gca_core::error::Error;
use gca_core::group::Elem;
use gca_core::maps::GroupShiftHom;
use gca_core::shape::PeriodicConfiguration;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Pgm,
}

const GLYPHS: &[u8] = b"#o+*x%@=&$";

/// `steps` rows, the first being `c0` itself.
pub fn orbit_rows(f: &GroupShiftHom, c0: &PeriodicConfiguration, steps: usize) -> Result<Vec<Vec<Elem>>> {
    if f.dim() != 1 {
        return Err(Error::NotOneDimensional.into());
    }
    if !f.domain().torus_member(c0) {
        return Err(Error::ConfigNotInShift.into());
    }
    let mut rows = Vec::with_capacity(steps);
    let mut c = c0.clone();
    for t in 0..steps {
        rows.push(c.fundamental().to_vec());
        if t + 1 < steps {
            c = f.apply_periodic(&c)?;
        }
    }
    Ok(rows)
}

/// Rank of an element among the non-identity elements, starting at 1; the identity is 0.
fn rank(id: Elem, v: Elem) -> usize {
    match v.cmp(&id) {
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Less => v + 1,
        std::cmp::Ordering::Greater => v,
    }
}

/// The identity is white (`.` or 255); the other elements get glyphs or evenly spaced
/// gray levels by index, darkest last.
pub fn render(rows: &[Vec<Elem>], identity: Elem, order: usize, format: Format) -> Vec<u8> {
    match format {
        Format::Text => {
            let mut out = Vec::new();
            for row in rows {
                out.extend(row.iter().map(|&v| match rank(identity, v) {
                    0 => b'.',
                    r => GLYPHS[(r - 1) % GLYPHS.len()],
                }));
                out.push(b'\n');
            }
            out
        }
        Format::Pgm => {
            let width = rows.first().map_or(0, Vec::len);
            let mut out = format!("P2\n{width} {}\n255\n", rows.len()).into_bytes();
            let others = (order - 1).max(1);
            for row in rows {
                let line: Vec<String> = row
                    .iter()
                    .map(|&v| (255 - 255 * rank(identity, v) / others).to_string())
                    .collect();
                out.extend(line.join(" ").bytes());
                out.push(b'\n');
            }
            out
        }
    }
}
