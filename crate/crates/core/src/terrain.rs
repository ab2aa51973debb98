//! Elevation grid storage, synthetic terrain, and line-of-sight queries.
//!
//! The world model is a regular raster of ground elevations in planar local
//! coordinates (meters east/north). Rows are stored bottom-up: row 0 is the
//! southernmost row, matching the georeferenced origin at the lower-left
//! corner. Sight lines are tested against bilinearly interpolated terrain
//! lowered by the Earth-curvature drop as seen from the observer.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean Earth radius used for the curvature drop.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Default nodata sentinel for generated grids.
pub const DEFAULT_NODATA: f64 = -9999.0;

/// A point in planar local coordinates with altitude above the common datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    /// Meters east.
    pub x: f64,
    /// Meters north.
    pub y: f64,
    /// Meters above the vertical datum.
    pub alt: f64,
}

impl GeoPoint {
    pub fn new(x: f64, y: f64, alt: f64) -> Self {
        Self { x, y, alt }
    }

    /// Horizontal distance to another point.
    pub fn horizontal_distance(&self, other: &GeoPoint) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// Regular elevation raster with a georeferenced lower-left origin.
///
/// Immutable after construction; all queries take `&self` and the grid is
/// safe to share across worker threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainGrid {
    cols: usize,
    rows: usize,
    cell_size: f64,
    origin_x: f64,
    origin_y: f64,
    elevations: Vec<f64>,
    nodata_value: f64,
}

impl TerrainGrid {
    /// Builds a grid from row-major elevations with row 0 at the bottom
    /// (south). Validates the structural invariants.
    pub fn new(
        cols: usize,
        rows: usize,
        cell_size: f64,
        origin_x: f64,
        origin_y: f64,
        elevations: Vec<f64>,
        nodata_value: f64,
    ) -> Result<Self> {
        if cols < 2 || rows < 2 {
            return Err(Error::InvalidGrid(format!(
                "grid must be at least 2x2, got {cols}x{rows}"
            )));
        }
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::InvalidGrid(format!("cell_size must be positive, got {cell_size}")));
        }
        if !origin_x.is_finite() || !origin_y.is_finite() || !nodata_value.is_finite() {
            return Err(Error::InvalidGrid("origin and nodata must be finite".into()));
        }
        if elevations.len() != rows * cols {
            return Err(Error::InvalidGrid(format!(
                "expected {} elevation values, got {}",
                rows * cols,
                elevations.len()
            )));
        }
        if let Some(bad) = elevations.iter().find(|v| **v != nodata_value && !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite elevation {bad}")));
        }
        Ok(Self { cols, rows, cell_size, origin_x, origin_y, elevations, nodata_value })
    }

    /// Constant-elevation grid, convenient for flat scenarios.
    pub fn flat(cols: usize, rows: usize, cell_size: f64, elevation: f64) -> Result<Self> {
        Self::new(cols, rows, cell_size, 0.0, 0.0, vec![elevation; rows * cols], DEFAULT_NODATA)
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.origin_x, self.origin_y)
    }

    pub fn nodata_value(&self) -> f64 {
        self.nodata_value
    }

    pub fn elevations(&self) -> &[f64] {
        &self.elevations
    }

    /// Stored value at (col, row-from-bottom).
    pub fn value(&self, col: usize, row: usize) -> f64 {
        self.elevations[row * self.cols + col]
    }

    pub fn is_nodata(&self, col: usize, row: usize) -> bool {
        self.value(col, row) == self.nodata_value
    }

    /// Center coordinates of cell (col, row).
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 + 0.5) * self.cell_size,
            self.origin_y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Cell containing (x, y), if inside the extent.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !self.contains(x, y) {
            return None;
        }
        let col = (((x - self.origin_x) / self.cell_size) as usize).min(self.cols - 1);
        let row = (((y - self.origin_y) / self.cell_size) as usize).min(self.rows - 1);
        Some((col, row))
    }

    /// Extent as (min_x, min_y, max_x, max_y).
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        (
            self.origin_x,
            self.origin_y,
            self.origin_x + self.cols as f64 * self.cell_size,
            self.origin_y + self.rows as f64 * self.cell_size,
        )
    }

    /// Coordinates of the extent center.
    pub fn center(&self) -> (f64, f64) {
        let (x0, y0, x1, y1) = self.extent();
        (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x0, y0, x1, y1) = self.extent();
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    }

    /// Bilinear interpolation of the four surrounding cell-center values.
    ///
    /// Queries in the outer half-cell margin clamp to the nearest interior
    /// cell pair, so the surface is continuous over the whole extent.
    pub fn elevation_at(&self, x: f64, y: f64) -> Result<f64> {
        if !self.contains(x, y) {
            return Err(Error::OutOfExtent { x, y });
        }
        let gx = (x - self.origin_x) / self.cell_size - 0.5;
        let gy = (y - self.origin_y) / self.cell_size - 0.5;
        let i0 = (gx.floor() as isize).clamp(0, self.cols as isize - 2) as usize;
        let j0 = (gy.floor() as isize).clamp(0, self.rows as isize - 2) as usize;
        let fx = (gx - i0 as f64).clamp(0.0, 1.0);
        let fy = (gy - j0 as f64).clamp(0.0, 1.0);
        let v00 = self.value(i0, j0);
        let v10 = self.value(i0 + 1, j0);
        let v01 = self.value(i0, j0 + 1);
        let v11 = self.value(i0 + 1, j0 + 1);
        if [v00, v10, v01, v11].contains(&self.nodata_value) {
            return Err(Error::Nodata { x, y });
        }
        let bottom = v00 + fx * (v10 - v00);
        let top = v01 + fx * (v11 - v01);
        Ok(bottom + fy * (top - bottom))
    }
}

/// Apparent lowering of terrain at horizontal distance `d` from an observer
/// due to Earth's curvature: d^2 / (2 R).
pub fn curvature_drop(distance: f64) -> f64 {
    debug_assert!(distance >= 0.0);
    distance * distance / (2.0 * EARTH_RADIUS_M)
}

/// Minimum observer altitude (exclusive) at `(from_x, from_y)` for a clear
/// sight line to `target`.
///
/// The horizontal ray is sampled at intervals no wider than half a cell,
/// endpoints excluded. At each sample the sight line must stay strictly
/// above the curvature-corrected terrain; solving that inequality for the
/// observer altitude gives the threshold returned here. Nodata terrain along
/// the ray is opaque (threshold becomes infinite). Both endpoints must lie
/// inside the grid extent.
pub fn sight_threshold(
    grid: &TerrainGrid,
    from_x: f64,
    from_y: f64,
    target: &GeoPoint,
    earth_curvature: bool,
) -> Result<f64> {
    if !grid.contains(from_x, from_y) {
        return Err(Error::OutOfExtent { x: from_x, y: from_y });
    }
    if !grid.contains(target.x, target.y) {
        return Err(Error::OutOfExtent { x: target.x, y: target.y });
    }
    let dx = target.x - from_x;
    let dy = target.y - from_y;
    let dist = dx.hypot(dy);
    let steps = (dist / (grid.cell_size * 0.5)).ceil() as usize;
    let mut threshold = f64::NEG_INFINITY;
    for i in 1..steps {
        let t = i as f64 / steps as f64;
        let x = from_x + t * dx;
        let y = from_y + t * dy;
        let ground = match grid.elevation_at(x, y) {
            Ok(g) => g,
            Err(Error::Nodata { .. }) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        };
        let drop = if earth_curvature { curvature_drop(t * dist) } else { 0.0 };
        // Sight altitude A(1-t) + alt_target*t must exceed (ground - drop).
        let required = (ground - drop - target.alt * t) / (1.0 - t);
        if required > threshold {
            threshold = required;
        }
    }
    Ok(threshold)
}

/// True iff the sight line from `observer` to `ground_target` clears the
/// curvature-corrected terrain at every intermediate sample.
pub fn line_of_sight(grid: &TerrainGrid, observer: &GeoPoint, ground_target: &GeoPoint) -> Result<bool> {
    line_of_sight_with(grid, observer, ground_target, true)
}

/// [`line_of_sight`] with the curvature correction switchable.
pub fn line_of_sight_with(
    grid: &TerrainGrid,
    observer: &GeoPoint,
    ground_target: &GeoPoint,
    earth_curvature: bool,
) -> Result<bool> {
    let threshold = sight_threshold(grid, observer.x, observer.y, ground_target, earth_curvature)?;
    Ok(observer.alt > threshold)
}

/// Deterministic fractal terrain via midpoint displacement (diamond-square).
///
/// Elevations are rescaled to `[0, max_relief]`; the same seed always yields
/// the same grid.
pub fn generate_synthetic_terrain(
    seed: u64,
    rows: usize,
    cols: usize,
    cell_size: f64,
    max_relief: f64,
) -> Result<TerrainGrid> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidArgument(format!(
            "synthetic terrain needs at least 2x2 cells, got {cols}x{rows}"
        )));
    }
    if !(cell_size > 0.0) {
        return Err(Error::InvalidArgument(format!("cell_size must be positive, got {cell_size}")));
    }
    if max_relief < 0.0 || !max_relief.is_finite() {
        return Err(Error::InvalidArgument(format!("max_relief must be >= 0, got {max_relief}")));
    }

    // Diamond-square needs a (2^k + 1) square; generate the smallest one
    // covering the requested grid and crop.
    let mut size = 2usize;
    while size + 1 < rows.max(cols) {
        size *= 2;
    }
    let side = size + 1;
    let mut field = vec![0.0f64; side * side];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let at = |f: &Vec<f64>, x: usize, y: usize| f[y * side + x];

    for &(x, y) in &[(0, 0), (size, 0), (0, size), (size, size)] {
        field[y * side + x] = rng.gen_range(-1.0..1.0);
    }
    let mut step = size;
    let mut amplitude = 1.0f64;
    while step > 1 {
        let half = step / 2;
        // Diamond step: centers of squares.
        for y in (half..side).step_by(step) {
            for x in (half..side).step_by(step) {
                let avg = (at(&field, x - half, y - half)
                    + at(&field, x + half, y - half)
                    + at(&field, x - half, y + half)
                    + at(&field, x + half, y + half))
                    / 4.0;
                field[y * side + x] = avg + amplitude * rng.gen_range(-1.0..1.0);
            }
        }
        // Square step: edge midpoints, averaging in-bounds neighbors.
        for y in (0..side).step_by(half) {
            let x_start = if (y / half).is_multiple_of(2) { half } else { 0 };
            for x in (x_start..side).step_by(step) {
                let mut sum = 0.0;
                let mut count = 0.0;
                if x >= half {
                    sum += at(&field, x - half, y);
                    count += 1.0;
                }
                if x + half < side {
                    sum += at(&field, x + half, y);
                    count += 1.0;
                }
                if y >= half {
                    sum += at(&field, x, y - half);
                    count += 1.0;
                }
                if y + half < side {
                    sum += at(&field, x, y + half);
                    count += 1.0;
                }
                field[y * side + x] = sum / count + amplitude * rng.gen_range(-1.0..1.0);
            }
        }
        step = half;
        amplitude *= 0.55;
    }

    // Crop to rows x cols and rescale to [0, max_relief].
    let mut elevations = Vec::with_capacity(rows * cols);
    for y in 0..rows {
        for x in 0..cols {
            elevations.push(at(&field, x, y));
        }
    }
    let min = elevations.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = elevations.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    for v in &mut elevations {
        *v = if span > 0.0 { (*v - min) / span * max_relief } else { 0.0 };
    }
    TerrainGrid::new(cols, rows, cell_size, 0.0, 0.0, elevations, DEFAULT_NODATA)
}

/// Parses an ESRI ASCII grid. Header keys are case-insensitive; data rows run
/// top to bottom.
pub fn load_terrain(text: &str) -> Result<TerrainGrid> {
    let mut ncols: Option<usize> = None;
    let mut nrows: Option<usize> = None;
    let mut xllcorner: Option<f64> = None;
    let mut yllcorner: Option<f64> = None;
    let mut cellsize: Option<f64> = None;
    let mut nodata: f64 = DEFAULT_NODATA;

    let mut lines = text.lines().enumerate().peekable();
    while let Some(&(idx, line)) = lines.peek() {
        let line_no = idx + 1;
        let mut parts = line.split_whitespace();
        let key = match parts.next() {
            Some(k) => k,
            None => {
                lines.next();
                continue; // blank line before data
            }
        };
        if key.parse::<f64>().is_ok() {
            break; // first data row
        }
        let value = parts
            .next()
            .ok_or_else(|| Error::Parse { line: line_no, msg: format!("missing value for header key '{key}'") })?;
        if parts.next().is_some() {
            return Err(Error::Parse { line: line_no, msg: format!("trailing tokens after header key '{key}'") });
        }
        let parse_count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("'{v}' is not a valid count") })
        };
        let parse_num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("'{v}' is not a number") })
        };
        match key.to_ascii_lowercase().as_str() {
            "ncols" => ncols = Some(parse_count(value)?),
            "nrows" => nrows = Some(parse_count(value)?),
            "xllcorner" => xllcorner = Some(parse_num(value)?),
            "yllcorner" => yllcorner = Some(parse_num(value)?),
            "cellsize" => cellsize = Some(parse_num(value)?),
            "nodata_value" => nodata = parse_num(value)?,
            other => {
                return Err(Error::Parse { line: line_no, msg: format!("unknown header key '{other}'") })
            }
        }
        lines.next();
    }

    let header_end = lines.peek().map(|&(idx, _)| idx).unwrap_or(0);
    let missing = |k: &str| Error::Parse { line: header_end, msg: format!("missing header key '{k}'") };
    let cols = ncols.ok_or_else(|| missing("ncols"))?;
    let rows = nrows.ok_or_else(|| missing("nrows"))?;
    let origin_x = xllcorner.ok_or_else(|| missing("xllcorner"))?;
    let origin_y = yllcorner.ok_or_else(|| missing("yllcorner"))?;
    let cell_size = cellsize.ok_or_else(|| missing("cellsize"))?;

    let mut elevations = vec![0.0f64; rows * cols];
    let mut filled_rows = 0usize;
    let mut last_line = header_end;
    for (idx, line) in lines {
        let line_no = idx + 1;
        last_line = line_no;
        if line.trim().is_empty() {
            continue;
        }
        if filled_rows >= rows {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {rows} data rows, found extra data"),
            });
        }
        let mut count = 0usize;
        // File rows run north to south; storage rows run south to north.
        let grid_row = rows - 1 - filled_rows;
        for token in line.split_whitespace() {
            if count >= cols {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("row has more than {cols} values"),
                });
            }
            let v = token.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("'{token}' is not a number"),
            })?;
            elevations[grid_row * cols + count] = v;
            count += 1;
        }
        if count != cols {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("row has {count} values, expected {cols}"),
            });
        }
        filled_rows += 1;
    }
    if filled_rows != rows {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("found {filled_rows} data rows, expected {rows}"),
        });
    }
    TerrainGrid::new(cols, rows, cell_size, origin_x, origin_y, elevations, nodata)
}

/// Serializes a grid as an ESRI ASCII document. Values use the shortest
/// decimal form that parses back to the identical f64, so a load/save cycle
/// is lossless.
pub fn save_terrain(grid: &TerrainGrid) -> String {
    let mut out = String::new();
    out.push_str(&format!("ncols {}\n", grid.cols()));
    out.push_str(&format!("nrows {}\n", grid.rows()));
    out.push_str(&format!("xllcorner {}\n", grid.origin().0));
    out.push_str(&format!("yllcorner {}\n", grid.origin().1));
    out.push_str(&format!("cellsize {}\n", grid.cell_size()));
    out.push_str(&format!("NODATA_value {}\n", grid.nodata_value()));
    for row in (0..grid.rows()).rev() {
        for col in 0..grid.cols() {
            if col > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{}", grid.value(col, row)));
        }
        out.push('\n');
    }
    out
}
