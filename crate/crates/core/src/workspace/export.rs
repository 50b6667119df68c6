//! CSV renderings of artifacts. Floats use the same 17-digit format as the
//! dataset files.

use std::fmt::Write as _;

use super::csv::format_f64;
use super::{Colorfield, Detail};
use crate::metrics::{IterationViewMatrix, RealStats, TimeHistogram};

/// Long format: one line per cell.
pub fn iteration_view_csv(v: &IterationViewMatrix) -> String {
    let mut out = String::from("iteration,row,sample_index,value\n");
    for ((it, cells), order) in v.iterations.iter().zip(&v.cells).zip(&v.row_order) {
        for (row, (value, idx)) in cells.iter().zip(order).enumerate() {
            let _ = writeln!(out, "{it},{row},{idx},{}", format_f64(*value));
        }
    }
    out
}

pub fn colorfield_csv(c: &Colorfield) -> String {
    let t_len = c.rows.first().map_or(0, Vec::len);
    let mut out = String::from("id,original_index");
    for t in 0..t_len {
        let _ = write!(out, ",t{t}");
    }
    out.push('\n');
    for ((id, idx), row) in c.ids.iter().zip(&c.original_index).zip(&c.rows) {
        let _ = write!(out, "{id},{idx}");
        for v in row {
            out.push(',');
            out.push_str(&format_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Long format: one line per (time step, bin).
pub fn histogram_csv(h: &TimeHistogram) -> String {
    let edges = h.bin_edges.as_slice();
    let mut out = String::from("t,bin,lo,hi,count\n");
    for (t, col) in h.counts.iter().enumerate() {
        for (b, count) in col.iter().enumerate() {
            let _ = writeln!(
                out,
                "{t},{b},{},{},{count}",
                format_f64(edges[b]),
                format_f64(edges[b + 1])
            );
        }
    }
    out
}

pub fn detail_csv(d: &Detail) -> (String, String) {
    (colorfield_csv(&d.colorfield), histogram_csv(&d.time_histogram))
}

pub fn stats_csv(s: &RealStats) -> String {
    let mut out = String::from("t,median,lo68,hi68,lo95,hi95,lo997,hi997\n");
    for t in 0..s.median.len() {
        let _ = write!(out, "{t},{}", format_f64(s.median[t]));
        for band in [&s.band68, &s.band95, &s.band997] {
            let (lo, hi) = band[t];
            let _ = write!(out, ",{},{}", format_f64(lo), format_f64(hi));
        }
        out.push('\n');
    }
    out
}

pub fn order_csv(order: &[usize]) -> String {
    let mut out = String::from("id,original_index\n");
    for (id, idx) in order.iter().enumerate() {
        let _ = writeln!(out, "{id},{idx}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceMetric;
    use crate::metrics::{BinEdges, ViewKind};

    #[test]
    fn iteration_view_rows() {
        let v = IterationViewMatrix {
            kind: ViewKind::Innd,
            metric: DistanceMetric::Euclidean,
            iterations: vec![5, 9],
            rows: vec![1, 2],
            cells: vec![vec![0.5], vec![1.0, 2.0]],
            row_order: vec![vec![0], vec![1, 0]],
        };
        let csv = iteration_view_csv(&v);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], format!("9,0,1,{}", format_f64(1.0)));
    }

    #[test]
    fn histogram_rows() {
        let h = TimeHistogram {
            bin_edges: BinEdges::new(vec![0.0, 1.0, 2.0]).unwrap(),
            counts: vec![vec![1, 0], vec![0, 1]],
        };
        assert_eq!(histogram_csv(&h).lines().count(), 5);
    }
}
