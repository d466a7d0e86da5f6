//! Two-dimensional signal histograms over the event table.
//!
//! Events are binned on two of the four coordinates with half-open bins
//! (`[edge_i, edge_i+1)`); only the top edge of the last bin is closed, so
//! the range boundaries lose nothing. Signal is accumulated in `f64` in
//! event-table order, which keeps the result reproducible and makes the
//! single-bin grid bitwise equal to a straight sum over the same events.

use thiserror::Error;

use super::{DIM_NAMES, MdWorkspace};

#[derive(Debug, Error, PartialEq)]
pub enum SliceError {
    #[error("dimension index {0} out of range (four dimensions: Qx, Qy, Qz, E)")]
    DimOutOfRange(usize),
    #[error("slice dimensions must differ, both are {0}")]
    DimsEqual(usize),
    #[error("bin counts must be at least 1x1, got {0}x{1}")]
    EmptyGrid(usize, usize),
    #[error("range for {axis} must be finite with low < high, got {lo}..{hi}")]
    BadRange {
        axis: &'static str,
        lo: f64,
        hi: f64,
    },
}

/// A binned slice: `values[iy * nx + ix]` is the summed signal of bin
/// `(ix, iy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceGrid {
    pub dim_x: usize,
    pub dim_y: usize,
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub values: Vec<f64>,
}

impl SliceGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Row-major sum over all bins.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn x_name(&self) -> &'static str {
        DIM_NAMES[self.dim_x]
    }

    pub fn y_name(&self) -> &'static str {
        DIM_NAMES[self.dim_y]
    }
}

/// Bins `events` on coordinates `dim_x` and `dim_y`. Events outside either
/// range are skipped; everything else lands in exactly one bin.
pub fn slice_2d(
    ws: &MdWorkspace,
    dim_x: usize,
    dim_y: usize,
    bins: (usize, usize),
    ranges: ((f64, f64), (f64, f64)),
) -> Result<SliceGrid, SliceError> {
    for dim in [dim_x, dim_y] {
        if dim >= DIM_NAMES.len() {
            return Err(SliceError::DimOutOfRange(dim));
        }
    }
    if dim_x == dim_y {
        return Err(SliceError::DimsEqual(dim_x));
    }
    let (nx, ny) = bins;
    if nx == 0 || ny == 0 {
        return Err(SliceError::EmptyGrid(nx, ny));
    }
    let (x_range, y_range) = ranges;
    for (axis, (lo, hi)) in [("x", x_range), ("y", y_range)] {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(SliceError::BadRange { axis, lo, hi });
        }
    }

    let mut values = vec![0.0f64; nx * ny];
    for event in &ws.events {
        let x = f64::from(event.coords[dim_x]);
        let y = f64::from(event.coords[dim_y]);
        let (Some(ix), Some(iy)) = (bin_of(x, x_range, nx), bin_of(y, y_range, ny)) else {
            continue;
        };
        values[iy * nx + ix] += f64::from(event.signal);
    }

    Ok(SliceGrid {
        dim_x,
        dim_y,
        nx,
        ny,
        x_range,
        y_range,
        values,
    })
}

/// Half-open bin lookup; the top boundary belongs to the last bin.
fn bin_of(x: f64, (lo, hi): (f64, f64), n: usize) -> Option<usize> {
    if x < lo || x > hi {
        return None;
    }
    if x == hi {
        return Some(n - 1);
    }
    let i = ((x - lo) / (hi - lo) * n as f64) as usize;
    Some(i.min(n - 1))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::super::{ExperimentInfo, MdEvent};
    use super::*;

    fn event(x: f32, y: f32, signal: f32) -> MdEvent {
        MdEvent {
            signal,
            error_sq: signal,
            run_index: 0,
            detector_id: 0,
            coords: [x, y, 0.0, 0.0],
        }
    }

    fn workspace(events: Vec<MdEvent>) -> MdWorkspace {
        MdWorkspace {
            coordinate_system: 2,
            dimensions: vec![100; 4],
            events,
            box_structure: BTreeMap::new(),
            experiments: vec![ExperimentInfo {
                index: 0,
                ..ExperimentInfo::default()
            }],
        }
    }

    #[test]
    fn events_land_in_expected_bins() {
        // 2x2 bins over [0,4)x[0,4): x/y edges at 2.
        let ws = workspace(vec![
            event(0.0, 0.0, 1.0),  // (0,0)
            event(1.9, 1.9, 2.0),  // (0,0)
            event(2.0, 0.0, 4.0),  // (1,0): an interior edge belongs to the right bin
            event(0.0, 3.9, 8.0),  // (0,1)
            event(4.0, 4.0, 16.0), // (1,1): the top boundary is kept
            event(4.1, 0.0, 32.0), // out of range
            event(-0.1, 0.0, 64.0),
        ]);
        let grid = slice_2d(&ws, 0, 1, (2, 2), ((0.0, 4.0), (0.0, 4.0))).unwrap();
        assert_eq!(grid.values, vec![3.0, 4.0, 8.0, 16.0]);
        assert_eq!(grid.value(1, 0), 4.0);
        assert_eq!(grid.total(), 31.0);
    }

    #[test]
    fn single_bin_matches_event_order_sum() {
        let signals = [0.1f32, 0.7, 1e-6, 3.5, 0.2];
        let ws = workspace(
            signals
                .iter()
                .enumerate()
                .map(|(i, &s)| event(i as f32, -(i as f32), s))
                .collect(),
        );
        let grid = slice_2d(&ws, 0, 1, (1, 1), ((-10.0, 10.0), (-10.0, 10.0))).unwrap();
        let mut expected = 0.0f64;
        for &s in &signals {
            expected += f64::from(s);
        }
        // Bitwise: both sides add the same f64 terms in the same order.
        assert_eq!(grid.values[0].to_bits(), expected.to_bits());
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let ws = workspace(vec![]);
        let r = ((0.0, 1.0), (0.0, 1.0));
        assert_eq!(
            slice_2d(&ws, 4, 1, (1, 1), r).unwrap_err(),
            SliceError::DimOutOfRange(4)
        );
        assert_eq!(
            slice_2d(&ws, 2, 2, (1, 1), r).unwrap_err(),
            SliceError::DimsEqual(2)
        );
        assert_eq!(
            slice_2d(&ws, 0, 1, (0, 3), r).unwrap_err(),
            SliceError::EmptyGrid(0, 3)
        );
        assert!(matches!(
            slice_2d(&ws, 0, 1, (1, 1), ((1.0, 1.0), (0.0, 1.0))).unwrap_err(),
            SliceError::BadRange { axis: "x", .. }
        ));
        assert!(matches!(
            slice_2d(&ws, 0, 1, (1, 1), ((0.0, 1.0), (0.0, f64::NAN))).unwrap_err(),
            SliceError::BadRange { axis: "y", .. }
        ));
    }

    #[test]
    fn bin_lookup_is_half_open_with_closed_top() {
        let r = (0.0, 4.0);
        assert_eq!(bin_of(0.0, r, 4), Some(0));
        assert_eq!(bin_of(0.999, r, 4), Some(0));
        assert_eq!(bin_of(1.0, r, 4), Some(1));
        assert_eq!(bin_of(3.999, r, 4), Some(3));
        assert_eq!(bin_of(4.0, r, 4), Some(3));
        assert_eq!(bin_of(4.0001, r, 4), None);
        assert_eq!(bin_of(-0.0001, r, 4), None);
        // Float edge: a coordinate just below the top must not round past
        // the last bin.
        assert_eq!(bin_of(3.999_999_999_999_999_6, r, 4), Some(3));
    }
}
