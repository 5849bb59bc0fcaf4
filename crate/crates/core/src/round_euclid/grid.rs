use std::collections::BTreeMap;

use crate::error::{assertion, Result};
use crate::instance::MetricInstance;

/// Shrinks the cell side in dimensions above 4 so that a cell's diameter
/// stays within twice its side.
pub fn dimension_scale(d: usize) -> f64 {
    (2.0 / (d as f64).sqrt()).min(1.0)
}

/// Cells along one axis when a box of side `side` is cut at granularity `g`.
pub fn cells_per_axis(side: f64, g: f64) -> u64 {
    ((side / g) * (1.0 - 1e-12)).ceil().max(1.0) as u64
}

/// Cells in a `d`-dimensional box of side `side` at granularity `g`.
pub fn grid_cells(side: f64, g: f64, d: usize) -> f64 {
    (cells_per_axis(side, g) as f64).powi(d as i32)
}

/// Groups `balls` by the grid cell of their centers. The box is anchored at
/// the smallest center coordinate per axis and has side `side`; centers on
/// its far face fall into the last cell. Groups keep the input order, so
/// with `balls` in tie-break order the first ball of each group is its
/// largest.
pub fn bucket(inst: &MetricInstance, balls: &[usize], side: f64, g: f64) -> Result<Vec<Vec<usize>>> {
    let Some(first) = balls.first() else {
        return Ok(Vec::new());
    };
    let d = inst.center_coords(*first).map_or(0, <[f64]>::len);
    let mut origin = vec![f64::INFINITY; d];
    for &b in balls {
        let c = inst.center_coords(b).expect("euclidean instance");
        for (o, &x) in origin.iter_mut().zip(c) {
            *o = o.min(x);
        }
    }
    let last = cells_per_axis(side, g) as i64 - 1;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for &b in balls {
        let c = inst.center_coords(b).expect("euclidean instance");
        let mut cell = Vec::with_capacity(d);
        for (&x, &o) in c.iter().zip(&origin) {
            let off = x - o;
            if off > side * (1.0 + 1e-9) + 1e-12 {
                return Err(assertion(format!(
                    "center of ball {b} lies {off} from the grid origin, outside the box of side {side}"
                )));
            }
            cell.push(((off / g).floor() as i64).min(last));
        }
        match index.get(&cell) {
            Some(&k) => groups[k].push(b),
            None => {
                index.insert(cell, groups.len());
                groups.push(vec![b]);
            }
        }
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_counts() {
        // Side 16 at granularity 1 in the plane.
        assert_eq!(cells_per_axis(16.0, 1.0), 16);
        assert_eq!(grid_cells(16.0, 1.0, 2), 256.0);
        assert_eq!(cells_per_axis(0.5, 1.0), 1);
        assert_eq!(dimension_scale(2), 1.0);
        assert!((dimension_scale(16) - 0.5).abs() < 1e-15);
    }
}
