//! Classical dot plot: pixel `(x, y)` is 1 iff `r[x] == q[y]`.

use serde::{Deserialize, Serialize};

use crate::sequence::SymbolSequence;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DotPlot {
    pub width: usize,
    pub height: usize,
    /// Row-major by `y`: pixel `(x, y)` lives at `y * width + x`, which is
    /// also the pixel index `k` used by the circuit.
    pub pixels: Vec<bool>,
}

impl DotPlot {
    pub fn pixel(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    pub fn matches(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn black_fraction(&self) -> f64 {
        self.matches() as f64 / self.pixels.len() as f64
    }

    /// `#` for a match, `.` otherwise; one text row per `y`.
    pub fn render(&self) -> String {
        let mut s = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                s.push(if self.pixel(x, y) { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }
}

/// Exhaustive `W × H` comparison over the (padded) codes.
pub fn classical_dotplot(r: &SymbolSequence, q: &SymbolSequence) -> DotPlot {
    let (rc, qc) = (r.codes(), q.codes());
    let pixels = crate::parallel::map_indices(rc.len() * qc.len(), |k| rc[k % rc.len()] == qc[k / rc.len()]);
    DotPlot {
        width: rc.len(),
        height: qc.len(),
        pixels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(codes: &[u32]) -> SymbolSequence {
        SymbolSequence::from_codes(codes.to_vec(), 3).unwrap()
    }

    #[test]
    fn self_plot_has_full_diagonal() {
        let s = seq(&[0, 1, 2, 3, 1, 1, 0, 2]);
        let p = classical_dotplot(&s, &s);
        assert!((0..8).all(|i| p.pixel(i, i)));
    }

    #[test]
    fn disjoint_codes_give_empty_plot() {
        let p = classical_dotplot(&seq(&[0, 1]), &seq(&[2, 3]));
        assert_eq!(p.matches(), 0);
    }

    #[test]
    fn two_by_two_swap() {
        let p = classical_dotplot(&seq(&[0, 1]), &seq(&[1, 0]));
        assert!(p.pixel(0, 1) && p.pixel(1, 0));
        assert!(!p.pixel(0, 0) && !p.pixel(1, 1));
        assert_eq!(p.render(), ".#\n#.\n");
    }
}
