/// Log-spaced bin edges over `[min, max]`, denser near `min`.
///
/// `alpha` controls the growth; `n` is the number of edges (at least 2 for a
/// non-degenerate range). Bins are half-open `[e_j, e_{j+1})` with `max`
/// assigned to the last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct StepVector {
    edges: Vec<f64>,
}

impl StepVector {
    pub fn new(min: f64, max: f64, alpha: f64, n: usize) -> Self {
        if !(max > min) || n < 2 {
            return StepVector { edges: vec![min, max.max(min)] };
        }
        let span = max - min;
        let top = (alpha + 1.0).log10();
        let mut edges: Vec<f64> = (0..n)
            .map(|j| {
                let t = j as f64 / (n - 1) as f64;
                span / alpha * (10f64.powf(t * top) - 1.0) + min
            })
            .collect();
        edges[0] = min;
        edges[n - 1] = max;
        StepVector { edges }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn min(&self) -> f64 {
        self.edges[0]
    }

    pub fn max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Bin index of `x`, clamped to the range.
    pub fn bin(&self, x: f64) -> usize {
        let last = self.bin_count() - 1;
        if x >= self.max() {
            return last;
        }
        // first edge strictly greater than x, minus one
        let p = self.edges.partition_point(|&e| e <= x);
        p.saturating_sub(1).min(last)
    }

    pub fn width(&self, bin: usize) -> f64 {
        self.edges[bin + 1] - self.edges[bin]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact() {
        let s = StepVector::new(0.3, 7.9, 20.0, 100);
        assert_eq!(s.edges()[0], 0.3);
        assert_eq!(s.edges()[99], 7.9);
        assert_eq!(s.bin_count(), 99);
    }

    #[test]
    fn widths_increase() {
        let s = StepVector::new(0.0, 10.0, 20.0, 50);
        for j in 1..s.bin_count() {
            assert!(s.width(j) > s.width(j - 1));
        }
    }

    #[test]
    fn closed_form_values() {
        let s = StepVector::new(0.0, 1.0, 9.0, 3);
        // middle edge: 1/9 * (10^(0.5) - 1)
        let mid = (10f64.sqrt() - 1.0) / 9.0;
        assert!((s.edges()[1] - mid).abs() < 1e-15);
    }

    #[test]
    fn bin_lookup() {
        let s = StepVector::new(0.0, 1.0, 9.0, 3);
        let mid = s.edges()[1];
        assert_eq!(s.bin(0.0), 0);
        assert_eq!(s.bin(mid - 1e-12), 0);
        assert_eq!(s.bin(mid), 1);
        assert_eq!(s.bin(1.0), 1);
        assert_eq!(s.bin(2.0), 1);
        assert_eq!(s.bin(-1.0), 0);
    }

    #[test]
    fn degenerate_range() {
        let s = StepVector::new(2.0, 2.0, 20.0, 100);
        assert_eq!(s.bin_count(), 1);
        assert_eq!(s.bin(2.0), 0);
    }
}
